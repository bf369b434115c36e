//! BENCH netlist reader and writer.
//!
//! Accepted grammar, one statement per line:
//!   `# comment to end of line`
//!   `INPUT(<name>)`
//!   `OUTPUT(<name>)`
//!   `<name> = <KIND>(<name>{, <name>})`
//! Gate kinds are case-insensitive; names match
//! `[A-Za-z_][A-Za-z0-9_.\[\]]*`; whitespace around tokens is ignored.
//! `CONST0`/`CONST1` take an empty fanin list: `x = CONST0()`.

use super::{Circuit, Gate, GateKind, NetlistError};
use std::collections::{HashMap, HashSet};

struct Cursor<'a> {
    line: &'a str,
    lineno: usize,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: &'a str, lineno: usize) -> Self {
        Cursor { line, lineno, pos: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> NetlistError {
        NetlistError::Syntax {
            line: self.lineno,
            col: self.pos + 1,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        let bytes = self.line.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.line[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), NetlistError> {
        self.skip_ws();
        if self.line[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn name(&mut self) -> Result<&'a str, NetlistError> {
        self.skip_ws();
        let rest = &self.line.as_bytes()[self.pos..];
        let first_ok =
            |b: u8| b.is_ascii_alphabetic() || b == b'_';
        let rest_ok = |b: u8| {
            b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'[' | b']')
        };
        if rest.is_empty() || !first_ok(rest[0]) {
            return Err(self.err("expected identifier"));
        }
        let mut end = 1;
        while end < rest.len() && rest_ok(rest[end]) {
            end += 1;
        }
        let start = self.pos;
        self.pos += end;
        Ok(&self.line[start..start + end])
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.line.len()
    }
}

/// Parse BENCH text into a validated [`Circuit`].
pub fn parse_bench(text: &str) -> Result<Circuit, NetlistError> {
    parse_bench_named(text, "bench")
}

pub fn parse_bench_named(text: &str, name: &str) -> Result<Circuit, NetlistError> {
    let mut inputs: Vec<String> = Vec::new();
    let mut outputs: Vec<String> = Vec::new();
    let mut gates: Vec<Gate> = Vec::new();
    let mut gate_lines: Vec<usize> = Vec::new();
    let mut defined: HashMap<String, usize> = HashMap::new(); // net -> line

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if content.trim().is_empty() {
            continue;
        }
        let mut cur = Cursor::new(content, lineno);
        let head = cur.name()?;
        match cur.peek() {
            Some('(') if head == "INPUT" || head == "OUTPUT" => {
                cur.expect('(')?;
                let net = cur.name()?.to_string();
                cur.expect(')')?;
                if !cur.at_end() {
                    return Err(cur.err("trailing characters after statement"));
                }
                if head == "INPUT" {
                    if let Some(&prev) = defined.get(&net) {
                        return Err(NetlistError::DuplicateDefinition {
                            net,
                            line: Some(prev.max(lineno)),
                        });
                    }
                    defined.insert(net.clone(), lineno);
                    inputs.push(net);
                } else {
                    outputs.push(net);
                }
            }
            Some('=') => {
                cur.expect('=')?;
                let kind_name = cur.name()?;
                let kind = GateKind::from_name(kind_name)
                    .ok_or_else(|| cur.err(format!("unknown gate kind `{kind_name}`")))?;
                cur.expect('(')?;
                let mut fanins = Vec::new();
                if cur.peek() != Some(')') {
                    loop {
                        fanins.push(cur.name()?.to_string());
                        match cur.peek() {
                            Some(',') => {
                                cur.expect(',')?;
                            }
                            Some(')') => break,
                            _ => return Err(cur.err("expected `,` or `)`")),
                        }
                    }
                }
                cur.expect(')')?;
                if !cur.at_end() {
                    return Err(cur.err("trailing characters after statement"));
                }
                let net = head.to_string();
                if let Some(&prev) = defined.get(&net) {
                    return Err(NetlistError::DuplicateDefinition {
                        net,
                        line: Some(prev.max(lineno)),
                    });
                }
                if !kind.arity_ok(fanins.len()) {
                    return Err(NetlistError::Arity {
                        net,
                        kind,
                        expected: kind.arity_str(),
                        got: fanins.len(),
                        line: Some(lineno),
                    });
                }
                defined.insert(net.clone(), lineno);
                gates.push(Gate::new(net, kind, fanins));
                gate_lines.push(lineno);
            }
            _ => {
                return Err(cur.err("expected `INPUT(..)`, `OUTPUT(..)` or `<name> = KIND(..)`"))
            }
        }
    }

    // Attribute undefined-net errors to the line that uses the net.
    let known: HashSet<&str> = defined.keys().map(String::as_str).collect();
    for (g, &line) in gates.iter().zip(&gate_lines) {
        for f in &g.fanins {
            if !known.contains(f.as_str()) {
                return Err(NetlistError::UndefinedNet {
                    net: f.clone(),
                    line: Some(line),
                });
            }
        }
    }
    for o in &outputs {
        if !known.contains(o.as_str()) {
            return Err(NetlistError::UndefinedNet {
                net: o.clone(),
                line: None,
            });
        }
    }

    Circuit::new(name, inputs, outputs, gates)
}

/// Emit BENCH text that re-parses to an equivalent circuit. Gates come out
/// in topological order regardless of declaration order.
pub fn emit_bench(c: &Circuit) -> String {
    let mut s = String::new();
    s.push_str(&format!("# {}\n", c.name));
    for i in &c.inputs {
        s.push_str(&format!("INPUT({i})\n"));
    }
    for o in &c.outputs {
        s.push_str(&format!("OUTPUT({o})\n"));
    }
    let order = c.topo_order().expect("valid circuit is acyclic");
    for gi in order {
        let g = &c.gates[gi];
        s.push_str(&format!(
            "{} = {}({})\n",
            g.output,
            g.kind.name(),
            g.fanins.join(", ")
        ));
    }
    s
}
