//! Combinational gate-level netlists: parse/emit, validation, simulation,
//! truth-table extraction, and subcircuit surgery.
//!
//! Circuits are immutable values once constructed; [`Circuit::new`] enforces
//! the structural invariants (unique nets, defined fanins, arities, no
//! combinational cycles). Simulation is pure. The [`Evaluator`] compiles a
//! circuit once and evaluates 64 input vectors per pass, which keeps
//! exhaustive sweeps over 2^16 inputs cheap.

mod bench;

pub use bench::{emit_bench, parse_bench, parse_bench_named};

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::matrix::BooleanMatrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetlistError {
    #[error("syntax error at line {line}, col {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("undefined net `{net}`{}", fmt_line(.line))]
    UndefinedNet { net: String, line: Option<usize> },
    #[error("duplicate definition of net `{net}`{}", fmt_line(.line))]
    DuplicateDefinition { net: String, line: Option<usize> },
    #[error("combinational cycle through net `{net}`")]
    Cycle { net: String },
    #[error("gate `{net}`: {kind} takes {expected} fanins, got {got}{}", fmt_line(.line))]
    Arity {
        net: String,
        kind: GateKind,
        expected: &'static str,
        got: usize,
        line: Option<usize>,
    },
    #[error("input vector length {got} does not match circuit input count {expected}")]
    InputLength { expected: usize, got: usize },
    #[error("truth table needs {inputs} inputs, above the cap of {cap}")]
    TruthTableCap { inputs: usize, cap: usize },
    #[error("circuit has no outputs")]
    NoOutputs,
    #[error("gate set is empty")]
    EmptyGateSet,
    #[error("gate index {index} out of range")]
    GateIndexOutOfRange { index: usize },
    #[error("replacement arity mismatch: boundary is {expected_inputs} in / {expected_outputs} out, replacement is {got_inputs} in / {got_outputs} out")]
    StitchArity {
        expected_inputs: usize,
        expected_outputs: usize,
        got_inputs: usize,
        got_outputs: usize,
    },
}

fn fmt_line(line: &Option<usize>) -> String {
    match line {
        Some(l) => format!(" (line {l})"),
        None => String::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    Not,
    Buf,
    Mux,
    Const0,
    Const1,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Nand => "NAND",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Not => "NOT",
            GateKind::Buf => "BUF",
            GateKind::Mux => "MUX",
            GateKind::Const0 => "CONST0",
            GateKind::Const1 => "CONST1",
        }
    }

    pub fn from_name(s: &str) -> Option<GateKind> {
        match s.to_ascii_uppercase().as_str() {
            "AND" => Some(GateKind::And),
            "OR" => Some(GateKind::Or),
            "NAND" => Some(GateKind::Nand),
            "NOR" => Some(GateKind::Nor),
            "XOR" => Some(GateKind::Xor),
            "XNOR" => Some(GateKind::Xnor),
            "NOT" => Some(GateKind::Not),
            "BUF" => Some(GateKind::Buf),
            "MUX" => Some(GateKind::Mux),
            "CONST0" => Some(GateKind::Const0),
            "CONST1" => Some(GateKind::Const1),
            _ => None,
        }
    }

    /// Human-readable arity contract, also used to check a fanin count.
    pub fn arity_ok(&self, n: usize) -> bool {
        match self {
            GateKind::Not | GateKind::Buf => n == 1,
            GateKind::Mux => n == 3,
            GateKind::Const0 | GateKind::Const1 => n == 0,
            _ => n >= 2,
        }
    }

    pub fn arity_str(&self) -> &'static str {
        match self {
            GateKind::Not | GateKind::Buf => "exactly 1",
            GateKind::Mux => "exactly 3 (select, then, else)",
            GateKind::Const0 | GateKind::Const1 => "exactly 0",
            _ => "at least 2",
        }
    }

    /// Evaluate over 64 parallel lanes. `MUX(s, a, b)` selects `a` when the
    /// select bit is 1.
    #[inline]
    pub fn eval_words(&self, fanins: &[u64]) -> u64 {
        match self {
            GateKind::And => fanins.iter().fold(u64::MAX, |a, &b| a & b),
            GateKind::Or => fanins.iter().fold(0, |a, &b| a | b),
            GateKind::Nand => !fanins.iter().fold(u64::MAX, |a, &b| a & b),
            GateKind::Nor => !fanins.iter().fold(0, |a, &b| a | b),
            GateKind::Xor => fanins.iter().fold(0, |a, &b| a ^ b),
            GateKind::Xnor => !fanins.iter().fold(0, |a, &b| a ^ b),
            GateKind::Not => !fanins[0],
            GateKind::Buf => fanins[0],
            GateKind::Mux => (fanins[0] & fanins[1]) | (!fanins[0] & fanins[2]),
            GateKind::Const0 => 0,
            GateKind::Const1 => u64::MAX,
        }
    }
}

impl std::fmt::Display for GateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub output: String,
    pub kind: GateKind,
    pub fanins: Vec<String>,
}

impl Gate {
    pub fn new(output: impl Into<String>, kind: GateKind, fanins: Vec<String>) -> Gate {
        Gate {
            output: output.into(),
            kind,
            fanins,
        }
    }
}

/// A combinational gate-level circuit. Gate declaration order is free; the
/// graph itself must be acyclic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<String>,
        outputs: Vec<String>,
        gates: Vec<Gate>,
    ) -> Result<Circuit, NetlistError> {
        let c = Circuit {
            name: name.into(),
            inputs,
            outputs,
            gates,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn validate(&self) -> Result<(), NetlistError> {
        let mut defined: HashSet<&str> = HashSet::new();
        for i in &self.inputs {
            if !defined.insert(i) {
                return Err(NetlistError::DuplicateDefinition {
                    net: i.clone(),
                    line: None,
                });
            }
        }
        for g in &self.gates {
            if !defined.insert(&g.output) {
                return Err(NetlistError::DuplicateDefinition {
                    net: g.output.clone(),
                    line: None,
                });
            }
        }
        for g in &self.gates {
            if !g.kind.arity_ok(g.fanins.len()) {
                return Err(NetlistError::Arity {
                    net: g.output.clone(),
                    kind: g.kind,
                    expected: g.kind.arity_str(),
                    got: g.fanins.len(),
                    line: None,
                });
            }
            for f in &g.fanins {
                if !defined.contains(f.as_str()) {
                    return Err(NetlistError::UndefinedNet {
                        net: f.clone(),
                        line: None,
                    });
                }
            }
        }
        for o in &self.outputs {
            if !defined.contains(o.as_str()) {
                return Err(NetlistError::UndefinedNet {
                    net: o.clone(),
                    line: None,
                });
            }
        }
        self.topo_order().map(|_| ())
    }

    /// Gate indices in topological order (fanins before users). Deterministic:
    /// among ready gates the lowest declaration index goes first.
    pub fn topo_order(&self) -> Result<Vec<usize>, NetlistError> {
        let driver: HashMap<&str, usize> = self
            .gates
            .iter()
            .enumerate()
            .map(|(i, g)| (g.output.as_str(), i))
            .collect();
        let input_set: HashSet<&str> = self.inputs.iter().map(String::as_str).collect();

        let mut indegree = vec![0usize; self.gates.len()];
        let mut users: Vec<Vec<usize>> = vec![Vec::new(); self.gates.len()];
        for (i, g) in self.gates.iter().enumerate() {
            for f in &g.fanins {
                if input_set.contains(f.as_str()) {
                    continue;
                }
                if let Some(&d) = driver.get(f.as_str()) {
                    indegree[i] += 1;
                    users[d].push(i);
                }
            }
        }
        let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..self
            .gates
            .len())
            .filter(|&i| indegree[i] == 0)
            .map(std::cmp::Reverse)
            .collect();
        let mut order = Vec::with_capacity(self.gates.len());
        while let Some(std::cmp::Reverse(i)) = ready.pop() {
            order.push(i);
            for &u in &users[i] {
                indegree[u] -= 1;
                if indegree[u] == 0 {
                    ready.push(std::cmp::Reverse(u));
                }
            }
        }
        if order.len() != self.gates.len() {
            let stuck = (0..self.gates.len())
                .find(|&i| indegree[i] > 0)
                .expect("cycle implies a stuck gate");
            return Err(NetlistError::Cycle {
                net: self.gates[stuck].output.clone(),
            });
        }
        Ok(order)
    }

    /// Nets of this circuit (inputs plus gate outputs).
    pub fn defined_nets(&self) -> HashSet<&str> {
        self.inputs
            .iter()
            .map(String::as_str)
            .chain(self.gates.iter().map(|g| g.output.as_str()))
            .collect()
    }
}

/// Pure single-vector simulation. Compiles the circuit on every call; use
/// [`Evaluator`] directly when simulating many vectors.
pub fn simulate(c: &Circuit, x: &[bool]) -> Result<Vec<bool>, NetlistError> {
    if x.len() != c.num_inputs() {
        return Err(NetlistError::InputLength {
            expected: c.num_inputs(),
            got: x.len(),
        });
    }
    let ev = Evaluator::new(c)?;
    let words: Vec<u64> = x.iter().map(|&b| if b { 1 } else { 0 }).collect();
    let mut nets = vec![0u64; ev.num_nets()];
    ev.eval_block(&words, &mut nets);
    Ok(ev.output_slots().iter().map(|&s| nets[s] & 1 == 1).collect())
}

pub const DEFAULT_TT_CAP: usize = 20;

/// Exhaustive truth table: 2^n rows by m output columns. Row `r` assigns
/// input `j` the j-th bit of `r` (`inputs[0]` is the least significant bit).
pub fn truth_table(c: &Circuit) -> Result<BooleanMatrix, NetlistError> {
    truth_table_capped(c, DEFAULT_TT_CAP)
}

pub fn truth_table_capped(c: &Circuit, cap: usize) -> Result<BooleanMatrix, NetlistError> {
    let n = c.num_inputs();
    if n > cap {
        return Err(NetlistError::TruthTableCap { inputs: n, cap });
    }
    if c.num_outputs() == 0 {
        return Err(NetlistError::NoOutputs);
    }
    let ev = Evaluator::new(c)?;
    let rows = 1usize << n;
    let mut m = BooleanMatrix::zeros(rows, c.num_outputs());
    let mut nets = vec![0u64; ev.num_nets()];
    let mut in_words = vec![0u64; n];
    let words = rows.div_ceil(64);
    for w in 0..words {
        fill_counting_words(&mut in_words, w);
        ev.eval_block(&in_words, &mut nets);
        let lanes = (rows - w * 64).min(64);
        for (j, &slot) in ev.output_slots().iter().enumerate() {
            let word = nets[slot];
            for lane in 0..lanes {
                if (word >> lane) & 1 == 1 {
                    m.set(w * 64 + lane, j, true);
                }
            }
        }
    }
    Ok(m)
}

/// Lane patterns enumerating input assignments: lane `l` of word `w`
/// represents row `64w + l`, so input `j` follows bit `j` of the row index.
pub fn fill_counting_words(in_words: &mut [u64], word_index: usize) {
    const PAT: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    for (j, w) in in_words.iter_mut().enumerate() {
        *w = if j < 6 {
            PAT[j]
        } else if (word_index >> (j - 6)) & 1 == 1 {
            u64::MAX
        } else {
            0
        };
    }
}

/// A circuit compiled for 64-lane evaluation. Net slots: inputs first (in
/// declaration order), then one slot per gate in topological order.
pub struct Evaluator {
    num_inputs: usize,
    ops: Vec<(GateKind, u32, Vec<u32>)>,
    output_slots: Vec<usize>,
    /// Slot of each original gate (indexed by declaration order).
    gate_slots: Vec<usize>,
    num_nets: usize,
}

impl Evaluator {
    pub fn new(c: &Circuit) -> Result<Evaluator, NetlistError> {
        let order = c.topo_order()?;
        let mut slot: HashMap<&str, usize> = HashMap::new();
        for (i, name) in c.inputs.iter().enumerate() {
            slot.insert(name, i);
        }
        let mut gate_slots = vec![0usize; c.gates.len()];
        for (pos, &gi) in order.iter().enumerate() {
            let s = c.num_inputs() + pos;
            slot.insert(&c.gates[gi].output, s);
            gate_slots[gi] = s;
        }
        let mut ops = Vec::with_capacity(order.len());
        for &gi in &order {
            let g = &c.gates[gi];
            let fanins: Vec<u32> = g.fanins.iter().map(|f| slot[f.as_str()] as u32).collect();
            ops.push((g.kind, gate_slots[gi] as u32, fanins));
        }
        let output_slots = c.outputs.iter().map(|o| slot[o.as_str()]).collect();
        Ok(Evaluator {
            num_inputs: c.num_inputs(),
            ops,
            output_slots,
            gate_slots,
            num_nets: c.num_inputs() + c.gates.len(),
        })
    }

    pub fn num_nets(&self) -> usize {
        self.num_nets
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn output_slots(&self) -> &[usize] {
        &self.output_slots
    }

    pub fn gate_slots(&self) -> &[usize] {
        &self.gate_slots
    }

    /// Evaluate 64 lanes. `in_words[j]` carries lane bits for input j;
    /// `nets` must have `num_nets()` slots and receives every net's word.
    pub fn eval_block(&self, in_words: &[u64], nets: &mut [u64]) {
        debug_assert_eq!(in_words.len(), self.num_inputs);
        debug_assert_eq!(nets.len(), self.num_nets);
        nets[..self.num_inputs].copy_from_slice(in_words);
        let mut fanin_buf: Vec<u64> = Vec::with_capacity(4);
        for (kind, out, fanins) in &self.ops {
            fanin_buf.clear();
            fanin_buf.extend(fanins.iter().map(|&f| nets[f as usize]));
            nets[*out as usize] = kind.eval_words(&fanin_buf);
        }
    }

    /// Output words for one block of 64 lanes.
    pub fn eval_outputs(&self, in_words: &[u64], nets: &mut [u64]) -> Vec<u64> {
        self.eval_block(in_words, nets);
        self.output_slots.iter().map(|&s| nets[s]).collect()
    }
}

/// Net mapping that lets an extracted subcircuit be wired back into its
/// parent: `inputs[i]` is the parent net feeding subcircuit input i,
/// `outputs[j]` the parent net driven by subcircuit output j, and `gates`
/// the parent gate indices the subcircuit replaced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Boundary {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub gates: Vec<usize>,
}

/// Carve the given gates out as a standalone circuit. Subcircuit inputs are
/// the nets crossing into the gate set (parent primary inputs or nets driven
/// outside), in first-use order over the parent's gate declaration order;
/// outputs are nets driven inside that are consumed outside or are parent
/// primary outputs, in driver declaration order.
pub fn extract_subcircuit(
    c: &Circuit,
    gate_set: &[usize],
    name: impl Into<String>,
) -> Result<(Circuit, Boundary), NetlistError> {
    if gate_set.is_empty() {
        return Err(NetlistError::EmptyGateSet);
    }
    for &gi in gate_set {
        if gi >= c.gates.len() {
            return Err(NetlistError::GateIndexOutOfRange { index: gi });
        }
    }
    let in_set: HashSet<usize> = gate_set.iter().copied().collect();
    let inside_nets: HashSet<&str> = gate_set
        .iter()
        .map(|&gi| c.gates[gi].output.as_str())
        .collect();

    let mut ordered: Vec<usize> = (0..c.gates.len()).filter(|i| in_set.contains(i)).collect();
    ordered.sort_unstable();

    // Crossing nets, ordered by their definition position in the parent
    // (inputs first, then gate outputs by declaration index), so extracting
    // every gate reproduces the parent's own input order.
    let def_pos: HashMap<&str, usize> = c
        .inputs
        .iter()
        .map(String::as_str)
        .chain(c.gates.iter().map(|g| g.output.as_str()))
        .enumerate()
        .map(|(i, n)| (n, i))
        .collect();
    let mut crossing: Vec<&str> = Vec::new();
    let mut seen_in: HashSet<&str> = HashSet::new();
    for &gi in &ordered {
        for f in &c.gates[gi].fanins {
            if !inside_nets.contains(f.as_str()) && seen_in.insert(f.as_str()) {
                crossing.push(f);
            }
        }
    }
    crossing.sort_by_key(|n| def_pos[n]);
    let sub_inputs: Vec<String> = crossing.into_iter().map(String::from).collect();

    let primary_outputs: HashSet<&str> = c.outputs.iter().map(String::as_str).collect();
    let mut consumed_outside: HashSet<&str> = HashSet::new();
    for (gi, g) in c.gates.iter().enumerate() {
        if in_set.contains(&gi) {
            continue;
        }
        for f in &g.fanins {
            consumed_outside.insert(f.as_str());
        }
    }
    let mut sub_outputs: Vec<String> = Vec::new();
    for &gi in &ordered {
        let net = c.gates[gi].output.as_str();
        if consumed_outside.contains(net) || primary_outputs.contains(net) {
            sub_outputs.push(net.to_string());
        }
    }

    let sub_gates: Vec<Gate> = ordered.iter().map(|&gi| c.gates[gi].clone()).collect();
    let sub = Circuit::new(name, sub_inputs.clone(), sub_outputs.clone(), sub_gates)?;
    let boundary = Boundary {
        inputs: sub_inputs,
        outputs: sub_outputs,
        gates: ordered,
    };
    Ok((sub, boundary))
}

/// Replace the gates recorded in `boundary` with `replacement`. The
/// replacement's leading inputs bind to the boundary's parent nets in order;
/// any surplus inputs (enable pins) are promoted to fresh primary inputs of
/// the result. Internal replacement nets are prefixed with the replacement's
/// name and uniquified, so name collisions never fail.
pub fn stitch(
    c: &Circuit,
    boundary: &Boundary,
    replacement: &Circuit,
) -> Result<Circuit, NetlistError> {
    stitch_ext(c, boundary, replacement).map(|r| r.circuit)
}

/// [`stitch`] plus the promoted-input names, in replacement input order.
pub struct StitchResult {
    pub circuit: Circuit,
    pub promoted_inputs: Vec<String>,
}

pub fn stitch_ext(
    c: &Circuit,
    boundary: &Boundary,
    replacement: &Circuit,
) -> Result<StitchResult, NetlistError> {
    if replacement.num_inputs() < boundary.inputs.len()
        || replacement.num_outputs() != boundary.outputs.len()
    {
        return Err(NetlistError::StitchArity {
            expected_inputs: boundary.inputs.len(),
            expected_outputs: boundary.outputs.len(),
            got_inputs: replacement.num_inputs(),
            got_outputs: replacement.num_outputs(),
        });
    }
    let removed: HashSet<usize> = boundary.gates.iter().copied().collect();
    for &gi in &removed {
        if gi >= c.gates.len() {
            return Err(NetlistError::GateIndexOutOfRange { index: gi });
        }
    }

    let mut kept_gates: Vec<Gate> = c
        .gates
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed.contains(i))
        .map(|(_, g)| g.clone())
        .collect();

    // Names that must stay untouched in the merged netlist.
    let mut taken: HashSet<String> = c.inputs.iter().cloned().collect();
    taken.extend(kept_gates.iter().map(|g| g.output.clone()));
    taken.extend(boundary.outputs.iter().cloned());

    let mut rename: HashMap<&str, String> = HashMap::new();
    for (i, rin) in replacement.inputs.iter().enumerate() {
        if i < boundary.inputs.len() {
            rename.insert(rin, boundary.inputs[i].clone());
        }
    }
    let mut promoted: Vec<String> = Vec::new();
    for rin in replacement.inputs.iter().skip(boundary.inputs.len()) {
        let name = uniquify(&format!("{}__{}", replacement.name, rin), &mut taken);
        rename.insert(rin, name.clone());
        promoted.push(name);
    }

    // Map each replacement output net to the parent net of its first output
    // position; later positions for the same net become buffers.
    let mut out_target: HashMap<&str, String> = HashMap::new();
    let mut extra_bufs: Vec<Gate> = Vec::new();
    for (j, ro) in replacement.outputs.iter().enumerate() {
        let parent_net = boundary.outputs[j].clone();
        if let Some(first) = out_target.get(ro.as_str()) {
            if *first != parent_net {
                extra_bufs.push(Gate::new(parent_net, GateKind::Buf, vec![first.clone()]));
            }
            continue;
        }
        if rename.contains_key(ro.as_str()) {
            // Output wired straight to a replacement input: needs a buffer.
            let src = rename[ro.as_str()].clone();
            extra_bufs.push(Gate::new(parent_net.clone(), GateKind::Buf, vec![src]));
            out_target.insert(ro, parent_net);
        } else {
            rename.insert(ro, parent_net.clone());
            out_target.insert(ro, parent_net);
        }
    }

    for g in &replacement.gates {
        if !rename.contains_key(g.output.as_str()) {
            let name = uniquify(&format!("{}__{}", replacement.name, g.output), &mut taken);
            rename.insert(&g.output, name);
        }
    }

    for g in &replacement.gates {
        kept_gates.push(Gate::new(
            rename[g.output.as_str()].clone(),
            g.kind,
            g.fanins.iter().map(|f| rename[f.as_str()].clone()).collect(),
        ));
    }
    kept_gates.extend(extra_bufs);

    let mut inputs = c.inputs.clone();
    inputs.extend(promoted.iter().cloned());
    let circuit = Circuit::new(c.name.clone(), inputs, c.outputs.clone(), kept_gates)?;
    Ok(StitchResult {
        circuit,
        promoted_inputs: promoted,
    })
}

fn uniquify(base: &str, taken: &mut HashSet<String>) -> String {
    if taken.insert(base.to_string()) {
        return base.to_string();
    }
    let mut k = 2usize;
    loop {
        let cand = format!("{base}_{k}");
        if taken.insert(cand.clone()) {
            return cand;
        }
        k += 1;
    }
}

/// Fix some inputs to constants, removing them from the input list. Used to
/// pin enable nets when measuring one accuracy mode.
pub fn tie_inputs(c: &Circuit, ties: &[(&str, bool)]) -> Result<Circuit, NetlistError> {
    let tie_map: HashMap<&str, bool> = ties.iter().copied().collect();
    let inputs: Vec<String> = c
        .inputs
        .iter()
        .filter(|i| !tie_map.contains_key(i.as_str()))
        .cloned()
        .collect();
    let mut gates: Vec<Gate> = Vec::with_capacity(c.gates.len() + ties.len());
    for i in &c.inputs {
        if let Some(&v) = tie_map.get(i.as_str()) {
            let kind = if v { GateKind::Const1 } else { GateKind::Const0 };
            gates.push(Gate::new(i.clone(), kind, Vec::new()));
        }
    }
    gates.extend(c.gates.iter().cloned());
    Circuit::new(c.name.clone(), inputs, c.outputs.clone(), gates)
}
