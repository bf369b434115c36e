//! Recursive min-cut partitioning of a circuit's gate hypergraph.
//!
//! Every net is a hyperedge over its driver gate and sink gates. Oversized
//! gate sets are bipartitioned by Fiduccia-Mattheyses passes (gain-directed
//! single moves, best-prefix rollback, 10% balance tolerance) and halves are
//! re-split until every subcircuit fits the input/output caps.
//!
//! A final legalization makes every part convex (no path leaving a part and
//! re-entering it), merging the strongly connected components of the
//! part-quotient graph and re-splitting oversized merges along topological
//! intervals. Convexity is what lets a part be replaced by a single
//! truth-table block downstream without creating combinational cycles.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::netlist::{extract_subcircuit, Boundary, Circuit, NetlistError};

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("gate `{net}` has {fanins} fanins, above the {max_inputs}-input cap; no partition can satisfy the spec")]
    InfeasibleGate {
        net: String,
        fanins: usize,
        max_inputs: usize,
    },
    #[error("assignment covers {got} gates, circuit has {expected}")]
    IncompleteAssignment { got: usize, expected: usize },
    #[error("partition file: {0}")]
    BadPartitionFile(String),
    #[error("external partition violates caps: part {part} has {inputs} inputs / {outputs} outputs (caps {max_inputs}/{max_outputs})")]
    ExternalCapsViolated {
        part: usize,
        inputs: usize,
        outputs: usize,
        max_inputs: usize,
        max_outputs: usize,
    },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

#[derive(Debug, Clone, Copy)]
pub struct PartitionSpec {
    pub max_inputs: usize,
    pub max_outputs: usize,
    /// Fragments at or below this size are split straight into singletons
    /// instead of running FM when they still violate the caps.
    pub min_gates: usize,
}

impl Default for PartitionSpec {
    fn default() -> Self {
        PartitionSpec {
            max_inputs: 10,
            max_outputs: 10,
            min_gates: 3,
        }
    }
}

impl PartitionSpec {
    pub fn validate(&self) -> Result<(), PartitionError> {
        assert!(self.max_inputs >= 2 && self.max_outputs >= 1);
        Ok(())
    }
}

/// Disjoint, exhaustive cover of the parent's gates; each subcircuit
/// respects the caps and is convex in the parent graph.
#[derive(Debug)]
pub struct Partition {
    pub subcircuits: Vec<(Circuit, Boundary)>,
}

/// Hypergraph view of a circuit: one vertex per gate, one hyperedge per net
/// with at least two gate pins.
struct Hypergraph {
    /// Pin lists per hyperedge (gate indices).
    edges: Vec<Vec<usize>>,
    /// Incident hyperedges per gate.
    incident: Vec<Vec<usize>>,
}

impl Hypergraph {
    fn build(c: &Circuit) -> Hypergraph {
        let driver: HashMap<&str, usize> = c
            .gates
            .iter()
            .enumerate()
            .map(|(i, g)| (g.output.as_str(), i))
            .collect();
        // Net -> pins. Inputs contribute sink-only edges.
        let mut net_pins: HashMap<&str, Vec<usize>> = HashMap::new();
        for (gi, g) in c.gates.iter().enumerate() {
            net_pins.entry(g.output.as_str()).or_default().push(gi);
            for f in &g.fanins {
                let pins = net_pins.entry(f.as_str()).or_default();
                if let Some(&d) = driver.get(f.as_str()) {
                    if pins.is_empty() {
                        pins.push(d);
                    }
                }
                if !pins.contains(&gi) {
                    pins.push(gi);
                }
            }
        }
        let mut edges: Vec<Vec<usize>> = net_pins
            .into_iter()
            .filter(|(_, pins)| pins.len() >= 2)
            .map(|(_, pins)| pins)
            .collect();
        // Canonical order keeps everything deterministic.
        for e in edges.iter_mut() {
            e.sort_unstable();
            e.dedup();
        }
        edges.sort();
        let mut incident = vec![Vec::new(); c.gates.len()];
        for (ei, pins) in edges.iter().enumerate() {
            for &p in pins {
                incident[p].push(ei);
            }
        }
        Hypergraph { edges, incident }
    }
}

/// Number of hyperedges spanning both sides of a two-way assignment over
/// all gates (`assignment[i]` in {0, 1}).
pub fn cut_size(c: &Circuit, assignment: &[u8]) -> Result<usize, PartitionError> {
    if assignment.len() != c.gates.len() {
        return Err(PartitionError::IncompleteAssignment {
            got: assignment.len(),
            expected: c.gates.len(),
        });
    }
    let h = Hypergraph::build(c);
    Ok(count_cut(&h, assignment, &(0..c.gates.len()).collect::<Vec<_>>()))
}

fn count_cut(h: &Hypergraph, side: &[u8], members: &[usize]) -> usize {
    let member_set: HashSet<usize> = members.iter().copied().collect();
    h.edges
        .iter()
        .filter(|pins| {
            let mut saw = [false, false];
            for &p in pins.iter() {
                if member_set.contains(&p) {
                    saw[side[p] as usize] = true;
                }
            }
            saw[0] && saw[1]
        })
        .count()
}

/// One FM refinement pass over `members`: repeatedly move the best-gain
/// unlocked gate (ties to the lowest index) subject to the balance bound,
/// then roll back to the best prefix. Never increases the cut.
fn fm_pass(
    h: &Hypergraph,
    side: &mut [u8],
    members: &[usize],
    tolerance: f64,
) -> bool {
    let member_set: HashSet<usize> = members.iter().copied().collect();
    let total = members.len();
    let max_side = (((total as f64) * (0.5 + tolerance)).ceil() as usize).max(1);

    let mut counts: HashMap<usize, [usize; 2]> = HashMap::new();
    for (ei, pins) in h.edges.iter().enumerate() {
        let mut c = [0usize; 2];
        let mut any = false;
        for &p in pins {
            if member_set.contains(&p) {
                c[side[p] as usize] += 1;
                any = true;
            }
        }
        if any {
            counts.insert(ei, c);
        }
    }
    let gain_of = |g: usize, side: &[u8], counts: &HashMap<usize, [usize; 2]>| -> i64 {
        let from = side[g] as usize;
        let to = 1 - from;
        let mut gain = 0i64;
        for &ei in &h.incident[g] {
            let Some(c) = counts.get(&ei) else { continue };
            if c[from] == 1 {
                gain += 1;
            }
            if c[to] == 0 {
                gain -= 1;
            }
        }
        gain
    };

    let mut locked: HashSet<usize> = HashSet::new();
    let mut sizes = [0usize; 2];
    for &g in members {
        sizes[side[g] as usize] += 1;
    }
    let mut moves: Vec<usize> = Vec::with_capacity(total);
    let mut cum_gain = 0i64;
    let mut best_gain = 0i64;
    let mut best_prefix = 0usize;

    for _ in 0..total {
        let mut pick: Option<(i64, usize)> = None;
        for &g in members {
            if locked.contains(&g) {
                continue;
            }
            let to = 1 - side[g] as usize;
            if sizes[to] + 1 > max_side {
                continue;
            }
            let gain = gain_of(g, side, &counts);
            if pick.is_none_or(|(bg, bi)| gain > bg || (gain == bg && g < bi)) {
                pick = Some((gain, g));
            }
        }
        let Some((gain, g)) = pick else { break };
        // Apply the move.
        let from = side[g] as usize;
        let to = 1 - from;
        for &ei in &h.incident[g] {
            if let Some(c) = counts.get_mut(&ei) {
                c[from] -= 1;
                c[to] += 1;
            }
        }
        side[g] = to as u8;
        sizes[from] -= 1;
        sizes[to] += 1;
        locked.insert(g);
        moves.push(g);
        cum_gain += gain;
        if cum_gain > best_gain {
            best_gain = cum_gain;
            best_prefix = moves.len();
        }
    }

    // Roll back moves past the best prefix.
    for &g in moves.iter().skip(best_prefix).rev() {
        let from = side[g] as usize;
        side[g] = (1 - from) as u8;
    }
    best_gain > 0
}

/// Bipartition `members` deterministically: even/odd topological index as the
/// seed assignment, then FM passes until no pass improves the cut.
fn fm_bipartition(c: &Circuit, h: &Hypergraph, members: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let order = c.topo_order().expect("validated circuit");
    let topo_pos: HashMap<usize, usize> = order.iter().enumerate().map(|(p, &g)| (g, p)).collect();
    let mut by_topo: Vec<usize> = members.to_vec();
    by_topo.sort_by_key(|g| topo_pos[g]);

    let mut side = vec![0u8; c.gates.len()];
    for (rank, &g) in by_topo.iter().enumerate() {
        side[g] = (rank % 2) as u8;
    }
    for _ in 0..16 {
        if !fm_pass(h, &mut side, members, 0.10) {
            break;
        }
    }
    let a: Vec<usize> = members.iter().copied().filter(|&g| side[g] == 0).collect();
    let b: Vec<usize> = members.iter().copied().filter(|&g| side[g] == 1).collect();
    if a.is_empty() || b.is_empty() {
        // Balance bound makes this unreachable for |members| >= 2, but keep
        // the recursion safe.
        let mid = members.len() / 2;
        (by_topo[..mid].to_vec(), by_topo[mid..].to_vec())
    } else {
        (a, b)
    }
}

/// Input/output counts a gate set would have as a subcircuit.
fn io_counts(c: &Circuit, members: &HashSet<usize>) -> (usize, usize) {
    let driver: HashMap<&str, usize> = c
        .gates
        .iter()
        .enumerate()
        .map(|(i, g)| (g.output.as_str(), i))
        .collect();
    let primary_outputs: HashSet<&str> = c.outputs.iter().map(String::as_str).collect();
    let mut ins: HashSet<&str> = HashSet::new();
    let mut outs = 0usize;
    for &gi in members {
        for f in &c.gates[gi].fanins {
            let inside = driver
                .get(f.as_str())
                .map(|d| members.contains(d))
                .unwrap_or(false);
            if !inside {
                ins.insert(f.as_str());
            }
        }
        let net = c.gates[gi].output.as_str();
        let consumed_outside = c
            .gates
            .iter()
            .enumerate()
            .any(|(oi, og)| !members.contains(&oi) && og.fanins.iter().any(|f| f == net));
        if consumed_outside || primary_outputs.contains(net) {
            outs += 1;
        }
    }
    (ins.len(), outs)
}

/// Gate -> part id, covering every gate. The core recursive FM flow.
fn assign_parts(c: &Circuit, spec: &PartitionSpec) -> Result<Vec<usize>, PartitionError> {
    for g in &c.gates {
        if g.fanins.len() > spec.max_inputs {
            return Err(PartitionError::InfeasibleGate {
                net: g.output.clone(),
                fanins: g.fanins.len(),
                max_inputs: spec.max_inputs,
            });
        }
    }
    let h = Hypergraph::build(c);
    let mut parts: Vec<Vec<usize>> = Vec::new();
    let mut work: Vec<Vec<usize>> = vec![(0..c.gates.len()).collect()];
    while let Some(members) = work.pop() {
        if members.is_empty() {
            continue;
        }
        let set: HashSet<usize> = members.iter().copied().collect();
        let (ins, outs) = io_counts(c, &set);
        if ins <= spec.max_inputs && outs <= spec.max_outputs {
            parts.push(members);
            continue;
        }
        if members.len() == 1 {
            // Single gate over the caps can only be an output-cap issue on a
            // multiply-used net; it still has exactly one output, so the
            // input pre-check above already rejected the true dead ends.
            parts.push(members);
            continue;
        }
        if members.len() <= spec.min_gates {
            for g in members {
                work.push(vec![g]);
            }
            continue;
        }
        let (a, b) = fm_bipartition(c, &h, &members);
        work.push(a);
        work.push(b);
    }

    let mut assignment = vec![usize::MAX; c.gates.len()];
    // Deterministic part numbering by smallest topological member.
    let order = c.topo_order()?;
    let topo_pos: HashMap<usize, usize> = order.iter().enumerate().map(|(p, &g)| (g, p)).collect();
    parts.sort_by_key(|p| p.iter().map(|g| topo_pos[g]).min().unwrap_or(usize::MAX));
    for (pid, members) in parts.iter().enumerate() {
        for &g in members {
            assignment[g] = pid;
        }
    }
    Ok(assignment)
}

/// Merge quotient-graph SCCs so every part becomes convex, then re-split any
/// merged part that outgrew the caps along topological intervals (interval
/// splits of convex parts stay convex).
fn legalize_convex(
    c: &Circuit,
    assignment: &mut [usize],
    spec: &PartitionSpec,
) -> Result<(), PartitionError> {
    let driver: HashMap<&str, usize> = c
        .gates
        .iter()
        .enumerate()
        .map(|(i, g)| (g.output.as_str(), i))
        .collect();
    loop {
        let nparts = assignment.iter().map(|&p| p + 1).max().unwrap_or(0);
        if nparts == 0 {
            return Ok(());
        }
        // Quotient edges between parts.
        let mut q_edges: Vec<HashSet<usize>> = vec![HashSet::new(); nparts];
        for (gi, g) in c.gates.iter().enumerate() {
            for f in &g.fanins {
                if let Some(&d) = driver.get(f.as_str()) {
                    let (pa, pb) = (assignment[d], assignment[gi]);
                    if pa != pb {
                        q_edges[pa].insert(pb);
                    }
                }
            }
        }
        let scc = tarjan_scc(nparts, &q_edges);
        let merged_any = scc.iter().any(|comp| comp.len() > 1);
        if !merged_any {
            return Ok(());
        }
        // Relabel parts by SCC, then interval-split oversized merges.
        let mut part_of_scc = vec![0usize; nparts];
        for (cid, comp) in scc.iter().enumerate() {
            for &p in comp {
                part_of_scc[p] = cid;
            }
        }
        for a in assignment.iter_mut() {
            *a = part_of_scc[*a];
        }
        split_oversized_intervals(c, assignment, spec)?;
        // Interval splitting preserves convexity, so one more quotient pass
        // only runs if numbering artifacts remain; it terminates because
        // merges strictly reduce the SCC count.
    }
}

/// Split every over-cap part into greedy topological intervals that fit.
fn split_oversized_intervals(
    c: &Circuit,
    assignment: &mut [usize],
    spec: &PartitionSpec,
) -> Result<(), PartitionError> {
    let order = c.topo_order()?;
    let nparts = assignment.iter().map(|&p| p + 1).max().unwrap_or(0);
    let mut next_pid = nparts;
    for pid in 0..nparts {
        let members_topo: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&g| assignment[g] == pid)
            .collect();
        if members_topo.is_empty() {
            continue;
        }
        let set: HashSet<usize> = members_topo.iter().copied().collect();
        let (ins, outs) = io_counts(c, &set);
        if ins <= spec.max_inputs && outs <= spec.max_outputs {
            continue;
        }
        // Greedy: extend the current interval while caps hold.
        let mut current: Vec<usize> = Vec::new();
        let mut intervals: Vec<Vec<usize>> = Vec::new();
        for &g in &members_topo {
            current.push(g);
            let cset: HashSet<usize> = current.iter().copied().collect();
            let (ci, co) = io_counts(c, &cset);
            if ci > spec.max_inputs || co > spec.max_outputs {
                current.pop();
                if current.is_empty() {
                    // A single gate always fits (pre-checked fanin cap).
                    intervals.push(vec![g]);
                } else {
                    intervals.push(std::mem::take(&mut current));
                    current.push(g);
                }
            }
        }
        if !current.is_empty() {
            intervals.push(current);
        }
        // Last interval may still violate the output cap if the tail gates
        // fan out widely; split it down to singletons if needed.
        let mut fixed: Vec<Vec<usize>> = Vec::new();
        for iv in intervals {
            let cset: HashSet<usize> = iv.iter().copied().collect();
            let (ci, co) = io_counts(c, &cset);
            if ci <= spec.max_inputs && co <= spec.max_outputs {
                fixed.push(iv);
            } else {
                for g in iv {
                    fixed.push(vec![g]);
                }
            }
        }
        for (k, iv) in fixed.iter().enumerate() {
            let new_pid = if k == 0 { pid } else { next_pid };
            if k > 0 {
                next_pid += 1;
            }
            for &g in iv {
                assignment[g] = new_pid;
            }
        }
    }
    Ok(())
}

fn tarjan_scc(n: usize, edges: &[HashSet<usize>]) -> Vec<Vec<usize>> {
    struct State<'a> {
        edges: &'a [HashSet<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    fn visit(s: &mut State, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        let mut succ: Vec<usize> = s.edges[v].iter().copied().collect();
        succ.sort_unstable();
        for w in succ {
            if s.index[w].is_none() {
                visit(s, w);
                s.low[v] = s.low[v].min(s.low[w]);
            } else if s.on_stack[w] {
                s.low[v] = s.low[v].min(s.index[w].expect("indexed"));
            }
        }
        if s.low[v] == s.index[v].expect("indexed") {
            let mut comp = Vec::new();
            while let Some(w) = s.stack.pop() {
                s.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            s.out.push(comp);
        }
    }
    let mut s = State {
        edges,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.out.sort();
    s.out
}

/// Partition a circuit into cap-respecting convex subcircuits.
pub fn partition(c: &Circuit, spec: &PartitionSpec) -> Result<Partition, PartitionError> {
    spec.validate()?;
    let mut assignment = assign_parts(c, spec)?;
    legalize_convex(c, &mut assignment, spec)?;
    partition_from_assignment(c, &assignment)
}

/// Build a partition from an explicit gate -> part assignment, validating
/// nothing beyond structural consistency. Used for external partition files.
pub fn partition_from_assignment(
    c: &Circuit,
    assignment: &[usize],
) -> Result<Partition, PartitionError> {
    if assignment.len() != c.gates.len() {
        return Err(PartitionError::IncompleteAssignment {
            got: assignment.len(),
            expected: c.gates.len(),
        });
    }
    let nparts = assignment.iter().map(|&p| p + 1).max().unwrap_or(0);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); nparts];
    for (g, &p) in assignment.iter().enumerate() {
        groups[p].push(g);
    }
    // Stable ordering by first gate in topological order.
    let order = c.topo_order()?;
    let topo_pos: HashMap<usize, usize> = order.iter().enumerate().map(|(p, &g)| (g, p)).collect();
    let mut nonempty: Vec<Vec<usize>> = groups.into_iter().filter(|g| !g.is_empty()).collect();
    nonempty.sort_by_key(|g| g.iter().map(|x| topo_pos[x]).min().unwrap_or(usize::MAX));

    let mut subcircuits = Vec::with_capacity(nonempty.len());
    for (k, members) in nonempty.iter().enumerate() {
        let name = format!("{}_p{k}", c.name);
        subcircuits.push(extract_subcircuit(c, members, name)?);
    }
    Ok(Partition { subcircuits })
}

/// Check a partition meets the caps; returns per-part (inputs, outputs).
pub fn check_caps(
    p: &Partition,
    spec: &PartitionSpec,
) -> Result<Vec<(usize, usize)>, PartitionError> {
    let mut sizes = Vec::new();
    for (i, (sub, _)) in p.subcircuits.iter().enumerate() {
        let (ni, no) = (sub.num_inputs(), sub.num_outputs());
        if ni > spec.max_inputs || no > spec.max_outputs {
            return Err(PartitionError::ExternalCapsViolated {
                part: i,
                inputs: ni,
                outputs: no,
                max_inputs: spec.max_inputs,
                max_outputs: spec.max_outputs,
            });
        }
        sizes.push((ni, no));
    }
    Ok(sizes)
}

/// Parse a `--partition-file`: one `gate_name part_id` pair per line.
pub fn parse_partition_file(
    c: &Circuit,
    text: &str,
) -> Result<Vec<usize>, PartitionError> {
    let index: HashMap<&str, usize> = c
        .gates
        .iter()
        .enumerate()
        .map(|(i, g)| (g.output.as_str(), i))
        .collect();
    let mut assignment = vec![usize::MAX; c.gates.len()];
    for (lno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(name), Some(pid)) = (it.next(), it.next()) else {
            return Err(PartitionError::BadPartitionFile(format!(
                "line {}: expected `gate_name part_id`",
                lno + 1
            )));
        };
        let Some(&gi) = index.get(name) else {
            return Err(PartitionError::BadPartitionFile(format!(
                "line {}: unknown gate `{name}`",
                lno + 1
            )));
        };
        let pid: usize = pid.parse().map_err(|_| {
            PartitionError::BadPartitionFile(format!("line {}: bad part id `{pid}`", lno + 1))
        })?;
        assignment[gi] = pid;
    }
    if let Some(gi) = assignment.iter().position(|&p| p == usize::MAX) {
        return Err(PartitionError::BadPartitionFile(format!(
            "gate `{}` has no part assignment",
            c.gates[gi].output
        )));
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests;
