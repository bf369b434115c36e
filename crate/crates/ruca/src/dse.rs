//! Greedy design-space exploration over partitioned circuits.
//!
//! Every subcircuit gets a one-shot factorization at degree m_i - 1; the
//! loop then repeatedly trials each not-yet-committed subcircuit at one
//! degree lower, scores `loss = QoR * (P_acc + P_app)` at the top level,
//! and degrades the argmin. Whenever the current error crosses the next
//! threshold, the configuration from before that degrade is committed for
//! it and the subcircuits it approximates are frozen (each subcircuit gets
//! at most two levels: its base and its corrector). Committed groups are
//! regrouped into top-level blocks: one base block holding every
//! approximate base plus untouched logic, intermediate corrector blocks
//! per extra threshold, and a full-accuracy block.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost;
use crate::design::{
    build_two_level, factorize_for_metric, verify_modes, BlockInfo, DesignError, DesignReport,
    FullModeKind, ModeReport, ModeSpec, RucaDesign, SynthOptions, TwoLevelBlock, REPORT_SCHEMA,
};
use crate::matrix::BooleanMatrix;
use crate::netlist::{truth_table_capped, Circuit, Gate};
use crate::partition::{partition, Partition, PartitionError, PartitionSpec};
use crate::qor;

#[derive(Debug, thiserror::Error)]
pub enum DseError {
    #[error("threshold list is empty or not strictly positive/increasing: {0:?}")]
    BadThresholds(Vec<f64>),
    #[error("subcircuit {subcircuit} cannot be degraded further (degree 1 or not factorizable)")]
    CandidateSkipped { subcircuit: usize },
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Netlist(#[from] crate::netlist::NetlistError),
    #[error(transparent)]
    Qor(#[from] crate::qor::QorError),
}

/// One scored trial: subcircuit `id` degraded by one degree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateEval {
    pub subcircuit: usize,
    pub degree: usize,
    pub qor: f64,
    pub p_acc: f64,
    pub p_app: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub evals: Vec<CandidateEval>,
    pub selected: usize,
    pub qor_after: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommitRecord {
    pub threshold: f64,
    /// Measured error of the committed configuration (strictly below the
    /// threshold by construction).
    pub qor: f64,
    /// (subcircuit, frozen degree) pairs newly frozen by this commit.
    pub group: Vec<(usize, usize)>,
    /// Full configuration at commit time.
    pub degrees: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DseTrace {
    pub subcircuits: Vec<SubcircuitInfo>,
    pub iterations: Vec<IterationRecord>,
    pub commits: Vec<CommitRecord>,
    pub unreachable_thresholds: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubcircuitInfo {
    pub id: usize,
    pub name: String,
    pub inputs: usize,
    pub outputs: usize,
    pub gates: usize,
    pub factorizable: bool,
}

struct SubState {
    sub: Circuit,
    gate_indices: Vec<usize>,
    table: Option<BooleanMatrix>,
    fact: Option<crate::bmf::Factorization>,
    /// Current factorization degree f_i; m_i means "still exact".
    degree: usize,
    frozen: Option<FrozenState>,
}

#[derive(Clone, Copy)]
struct FrozenState {
    degree: usize,
    commit: usize,
}

impl SubState {
    fn is_candidate(&self) -> bool {
        self.frozen.is_none() && self.fact.is_some() && self.degree > 1
    }

    fn approximated_degree(&self) -> Option<usize> {
        if let Some(f) = self.frozen {
            return Some(f.degree);
        }
        if self.fact.is_some() && self.degree < self.sub.num_outputs() {
            Some(self.degree)
        } else {
            None
        }
    }
}

/// Sorted ascending (tightest first); rejects non-positive or duplicates.
fn ascending_thresholds(thresholds: &[f64]) -> Result<Vec<f64>, DseError> {
    if thresholds.is_empty() {
        return Err(DseError::BadThresholds(thresholds.to_vec()));
    }
    let mut t = thresholds.to_vec();
    t.sort_by(|a, b| a.partial_cmp(b).expect("thresholds must not be NaN"));
    let ok = t.iter().all(|&x| x > 0.0 && x.is_finite()) && t.windows(2).all(|w| w[0] < w[1]);
    if !ok {
        return Err(DseError::BadThresholds(t));
    }
    Ok(t)
}

/// Two-level blocks memoized per (subcircuit, degree); trial evaluation
/// re-splices cached blocks instead of re-synthesizing them.
type BlockCache = HashMap<(usize, usize), TwoLevelBlock>;

/// Exploration state: partitioned subcircuits, their factorizations and
/// current degrees, plus everything committed so far.
pub struct DseState {
    golden: Circuit,
    subs: Vec<SubState>,
    cache: BlockCache,
    opts: SynthOptions,
    commits: Vec<CommitRecord>,
}

impl DseState {
    pub fn new(
        golden: &Circuit,
        parts: Partition,
        spec: &PartitionSpec,
        opts: &SynthOptions,
    ) -> Result<DseState, DseError> {
        let mut subs = Vec::with_capacity(parts.subcircuits.len());
        for (sub, boundary) in &parts.subcircuits {
            let m = sub.num_outputs();
            let factorizable =
                m >= 2 && sub.num_inputs() >= 1 && sub.num_inputs() <= spec.max_inputs;
            let (table, fact) = if factorizable {
                let table =
                    truth_table_capped(sub, spec.max_inputs).map_err(DesignError::from)?;
                let fact = factorize_for_metric(&table, m - 1, opts)?;
                (Some(table), Some(fact))
            } else {
                (None, None)
            };
            subs.push(SubState {
                sub: sub.clone(),
                gate_indices: boundary.gates.clone(),
                table,
                fact,
                degree: m,
                frozen: None,
            });
        }
        Ok(DseState {
            golden: golden.clone(),
            subs,
            cache: HashMap::new(),
            opts: opts.clone(),
            commits: Vec::new(),
        })
    }

    pub fn subcircuit_infos(&self) -> Vec<SubcircuitInfo> {
        self.subs
            .iter()
            .enumerate()
            .map(|(i, s)| SubcircuitInfo {
                id: i,
                name: s.sub.name.clone(),
                inputs: s.sub.num_inputs(),
                outputs: s.sub.num_outputs(),
                gates: s.sub.gates.len(),
                factorizable: s.fact.is_some(),
            })
            .collect()
    }

    /// Subcircuits still eligible for one more degrade.
    pub fn candidates(&self) -> Vec<usize> {
        self.subs
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_candidate())
            .map(|(i, _)| i)
            .collect()
    }

    /// The live configuration: every approximated subcircuit with its
    /// current (or frozen) degree.
    pub fn config(&self) -> Vec<(usize, usize)> {
        self.subs
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.approximated_degree().map(|d| (i, d)))
            .collect()
    }

    fn ensure_blocks(
        &mut self,
        wanted: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<(), DseError> {
        for (sid, degree) in wanted {
            if self.cache.contains_key(&(sid, degree)) {
                continue;
            }
            let st = &self.subs[sid];
            let block = build_two_level(
                &st.sub,
                st.table.as_ref().expect("configured sub has a table"),
                st.fact.as_ref().expect("configured sub has a factorization"),
                degree,
                &self.opts,
            )?;
            self.cache.insert((sid, degree), block);
        }
        Ok(())
    }

    /// Top-level circuit for a configuration; block enables bind to the
    /// shared `en_base` / `en_full` nets.
    fn build_configuration(&self, config: &[(usize, usize)]) -> Result<Circuit, DseError> {
        let splices: Vec<SpliceSpec> = config
            .iter()
            .map(|&(sid, degree)| SpliceSpec {
                sub: sid,
                circuit: &self.cache[&(sid, degree)].circuit,
                en_base: "en_base".into(),
                en_full: "en_full".into(),
            })
            .collect();
        splice_blocks(&self.golden, &self.subs, &splices)
    }

    fn config_qor(&self, config: &[(usize, usize)]) -> Result<f64, DseError> {
        if config.is_empty() {
            return Ok(0.0);
        }
        let trial = self.build_configuration(config)?;
        let approx =
            crate::netlist::tie_inputs(&trial, &[("en_base", true), ("en_full", false)])?;
        Ok(qor::qor(&self.golden, &approx, &self.opts.qor)?.value)
    }

    /// Score a one-degree degrade of subcircuit `sid` against the current
    /// configuration. Signals [`DseError::CandidateSkipped`] when the
    /// subcircuit has no degree left to give.
    pub fn eval_candidate(&mut self, sid: usize) -> Result<CandidateEval, DseError> {
        if sid >= self.subs.len() || !self.subs[sid].is_candidate() {
            return Err(DseError::CandidateSkipped { subcircuit: sid });
        }
        let degree = self.subs[sid].degree - 1;
        let config = self.config();
        self.ensure_blocks(config.iter().copied())?;
        self.ensure_blocks([(sid, degree)])?;
        self.eval_prepared(&config, sid, degree)
    }

    /// Scoring core; every needed block must already be cached.
    fn eval_prepared(
        &self,
        config: &[(usize, usize)],
        sid: usize,
        degree: usize,
    ) -> Result<CandidateEval, DseError> {
        let mut trial_config: Vec<(usize, usize)> = config
            .iter()
            .copied()
            .filter(|&(s, _)| s != sid)
            .collect();
        trial_config.push((sid, degree));
        trial_config.sort_unstable();
        let trial = self.build_configuration(&trial_config)?;

        let approx =
            crate::netlist::tie_inputs(&trial, &[("en_base", true), ("en_full", false)])?;
        let qor_val = qor::qor(&self.golden, &approx, &self.opts.qor)?.value;
        let powers = cost::power_proxy_multi(
            &trial,
            &[
                &[("en_base", true), ("en_full", true)],
                &[("en_base", true), ("en_full", false)],
            ],
            &self.opts.cost,
        )?;
        let (p_acc, p_app) = (powers[0], powers[1]);
        Ok(CandidateEval {
            subcircuit: sid,
            degree,
            qor: qor_val,
            p_acc,
            p_app,
            loss: qor_val * (p_acc + p_app),
        })
    }

    /// Freeze every subcircuit a snapshot approximates; returns the newly
    /// frozen (id, degree) pairs.
    fn freeze_snapshot(&mut self, snapshot: &[(usize, usize)]) -> Vec<(usize, usize)> {
        let commit = self.commits.len();
        let mut group = Vec::new();
        for &(sid, degree) in snapshot {
            if self.subs[sid].frozen.is_none() {
                self.subs[sid].frozen = Some(FrozenState { degree, commit });
                self.subs[sid].degree = degree;
                group.push((sid, degree));
            }
        }
        group
    }

    /// Assemble the final top-level design from the committed groups.
    ///
    /// Base block: untouched logic plus every frozen subcircuit's base,
    /// masked by `en_base`. The group frozen at the tightest threshold feeds
    /// the full-accuracy block; later groups feed intermediate blocks so
    /// that asserting blocks base..i reproduces the configuration committed
    /// at the i-th loosest threshold.
    pub fn group_blocks(&self) -> Result<RucaDesign, DseError> {
        let golden = &self.golden;
        let opts = &self.opts;
        let commits = &self.commits;
        let levels = commits.len();
        // Enable for the corrector of a subcircuit frozen at commit g
        // (0-based): commit 0 (tightest) -> en_full; commit g -> en_l{levels - g + 1}.
        let enable_for_commit = |g: usize| -> String {
            if g == 0 {
                "en_full".to_string()
            } else {
                format!("en_l{}", levels - g + 1)
            }
        };

        let mut frozen_blocks: Vec<(usize, TwoLevelBlock)> = Vec::new();
        for (sid, s) in self.subs.iter().enumerate() {
            let Some(f) = s.frozen else { continue };
            let block = build_two_level(
                &s.sub,
                s.table.as_ref().expect("frozen sub has a table"),
                s.fact.as_ref().expect("frozen sub has a factorization"),
                f.degree,
                opts,
            )?;
            frozen_blocks.push((sid, block));
        }
        let splices: Vec<SpliceSpec> = frozen_blocks
            .iter()
            .map(|(sid, block)| {
                let commit = self.subs[*sid].frozen.expect("frozen").commit;
                SpliceSpec {
                    sub: *sid,
                    circuit: &block.circuit,
                    en_base: "en_base".into(),
                    en_full: enable_for_commit(commit),
                }
            })
            .collect();
        let mut netlist = splice_blocks(golden, &self.subs, &splices)?;

        // Blocks & enables, loosest-first mode order: base, l2.., full.
        let mut enables: Vec<String> = vec!["en_base".into()];
        for i in 1..levels {
            enables.push(format!("en_l{}", i + 1));
        }
        enables.push("en_full".into());
        // The splice may not have created every enable (empty groups); the
        // netlist must expose them all so the mode table is uniform.
        for e in &enables {
            if !netlist.inputs.iter().any(|i| i == e) {
                netlist.inputs.push(e.clone());
            }
        }
        netlist.validate().map_err(DesignError::from)?;

        // Per-block footprint: the gates gated off when only that enable drops.
        let all_on: Vec<(&str, bool)> = enables.iter().map(|e| (e.as_str(), true)).collect();
        let full_area = cost::area_proxy_gated(&netlist, &all_on, &opts.cost);
        let full_live = netlist.gates.len();
        let mut blocks: Vec<BlockInfo> = Vec::new();
        for (i, e) in enables.iter().enumerate() {
            let name = if i == 0 {
                "base".to_string()
            } else if i == enables.len() - 1 {
                "full".to_string()
            } else {
                format!("l{}", i + 1)
            };
            let mut one_off = all_on.clone();
            one_off[i] = (e.as_str(), false);
            let deasserted: std::collections::HashSet<&str> =
                [e.as_str()].into_iter().collect();
            let live = cost::live_gates(&netlist, &deasserted);
            let gated = full_live - live.iter().filter(|&&l| l).count();
            blocks.push(BlockInfo {
                name,
                enable: e.clone(),
                gate_count: gated,
                area: full_area - cost::area_proxy_gated(&netlist, &one_off, &opts.cost),
            });
        }

        let mut mode_table: Vec<ModeSpec> = Vec::new();
        for i in 0..levels.max(1) {
            mode_table.push(ModeSpec {
                name: if i == 0 {
                    "base".into()
                } else {
                    format!("level_{}", i + 1)
                },
                enables: enables[..=i.min(enables.len() - 1)].to_vec(),
            });
        }
        mode_table.push(ModeSpec {
            name: "full".into(),
            enables: enables.clone(),
        });

        let mixed_kind = if frozen_blocks
            .iter()
            .any(|(_, b)| b.kind == FullModeKind::MuxOriginal)
        {
            FullModeKind::MuxOriginal
        } else {
            FullModeKind::XorCorrector
        };

        // Thresholds loosest-first to match mode order (commit order is
        // tightest-first).
        let thresholds_lf: Vec<f64> = commits.iter().rev().map(|c| c.threshold).collect();

        let mut notes: Vec<String> = Vec::new();
        for (sid, block) in &frozen_blocks {
            let f = self.subs[*sid].frozen.expect("frozen");
            notes.push(format!(
                "subcircuit {} ({}): degree {}, commit {} ({}), full path {:?}",
                sid,
                self.subs[*sid].sub.name,
                f.degree,
                f.commit,
                enable_for_commit(f.commit),
                block.kind
            ));
        }

        let mut design = RucaDesign {
            netlist,
            blocks,
            mode_table,
            full_mode_kind: mixed_kind,
            report: DesignReport {
                schema: REPORT_SCHEMA,
                circuit: golden.name.clone(),
                metric: opts.qor.metric,
                thresholds: thresholds_lf,
                cuts: Vec::new(),
                dropped_thresholds: Vec::new(),
                full_mode_kind: mixed_kind,
                modes: Vec::new(),
                design_area: 0.0,
                golden_area: 0.0,
                golden_power: 0.0,
                notes,
            },
        };

        // Per-mode measurements plus the exactness guard.
        let verification = verify_modes(&design, golden, &opts.qor)?;
        if !verification.full_exact {
            return Err(DseError::Design(DesignError::Verification(format!(
                "full-accuracy mode shows {} mismatching vectors",
                verification
                    .modes
                    .last()
                    .map(|m| m.stats.mismatches)
                    .unwrap_or(0)
            ))));
        }
        design.report.design_area = cost::area_proxy(&design.netlist, &opts.cost);
        design.report.golden_area = cost::area_proxy(golden, &opts.cost);
        design.report.golden_power = cost::power_proxy(golden, &[], &opts.cost)?;
        let mut modes = Vec::new();
        for (i, check) in verification.modes.iter().enumerate() {
            let assignment = design.enable_assignment(i);
            let power = cost::power_proxy(&design.netlist, &assignment, &opts.cost)?;
            let area = cost::area_proxy_gated(&design.netlist, &assignment, &opts.cost);
            modes.push(ModeReport {
                name: design.mode_table[i].name.clone(),
                enables: design.mode_table[i].enables.clone(),
                qor: check.stats.value,
                power_proxy: power,
                area_proxy: area,
                threshold: design.report.thresholds.get(i).copied(),
                exact: check.stats.mismatches == 0,
                vectors: check.stats.vectors,
                exhaustive: check.stats.exhaustive,
            });
        }
        design.report.modes = modes;
        Ok(design)
    }
}

struct SpliceSpec<'a> {
    sub: usize,
    circuit: &'a Circuit,
    en_base: String,
    en_full: String,
}

/// Replace several subcircuits at once by their blocks. Blocks take the
/// subcircuit's boundary inputs positionally plus two enable pins, which are
/// bound to the given top-level enable nets (created as primary inputs on
/// first use, in first-use order).
fn splice_blocks(
    golden: &Circuit,
    subs: &[SubState],
    splices: &[SpliceSpec],
) -> Result<Circuit, DseError> {
    let mut removed: Vec<bool> = vec![false; golden.gates.len()];
    for sp in splices {
        for &gi in &subs[sp.sub].gate_indices {
            removed[gi] = true;
        }
    }
    let mut gates: Vec<Gate> = golden
        .gates
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed[*i])
        .map(|(_, g)| g.clone())
        .collect();

    let mut taken: std::collections::HashSet<String> = golden.inputs.iter().cloned().collect();
    taken.extend(golden.gates.iter().map(|g| g.output.clone()));
    let mut enable_inputs: Vec<String> = Vec::new();
    let ensure_enable = |name: &str, enable_inputs: &mut Vec<String>| {
        if !enable_inputs.iter().any(|e| e == name) {
            enable_inputs.push(name.to_string());
        }
    };

    for sp in splices {
        let st = &subs[sp.sub];
        let block = sp.circuit;
        ensure_enable(&sp.en_base, &mut enable_inputs);
        ensure_enable(&sp.en_full, &mut enable_inputs);

        // Positional input map: boundary inputs, then the two enables.
        let mut input_map: Vec<String> = st.sub.inputs.clone();
        input_map.push(sp.en_base.clone());
        input_map.push(sp.en_full.clone());
        debug_assert_eq!(block.num_inputs(), input_map.len());

        let mut rename: HashMap<&str, String> = HashMap::new();
        for (i, bin) in block.inputs.iter().enumerate() {
            rename.insert(bin, input_map[i].clone());
        }
        // Block outputs drive the parent nets the subcircuit used to drive.
        for (j, bo) in block.outputs.iter().enumerate() {
            rename.insert(bo, st.sub.outputs[j].clone());
        }
        for g in &block.gates {
            if rename.contains_key(g.output.as_str()) {
                continue;
            }
            let mut base = format!("p{}__{}", sp.sub, g.output);
            if taken.contains(&base) {
                let mut k = 2usize;
                base = loop {
                    let cand = format!("p{}__{}_{k}", sp.sub, g.output);
                    if !taken.contains(&cand) {
                        break cand;
                    }
                    k += 1;
                };
            }
            taken.insert(base.clone());
            rename.insert(&g.output, base);
        }
        for g in &block.gates {
            gates.push(Gate::new(
                rename[g.output.as_str()].clone(),
                g.kind,
                g.fanins.iter().map(|f| rename[f.as_str()].clone()).collect(),
            ));
        }
    }

    let mut inputs = golden.inputs.clone();
    inputs.extend(enable_inputs);
    Ok(Circuit::new(
        format!("{}_dse", golden.name),
        inputs,
        golden.outputs.clone(),
        gates,
    )?)
}

/// Partition, explore, and assemble a runtime-configurable design.
pub fn dse(
    golden: &Circuit,
    thresholds: &[f64],
    spec: &PartitionSpec,
    opts: &SynthOptions,
) -> Result<(RucaDesign, DseTrace), DseError> {
    let parts = partition(golden, spec)?;
    dse_with_partition(golden, thresholds, parts, spec, opts)
}

/// [`dse`] over an externally supplied partition (already cap-checked).
pub fn dse_with_partition(
    golden: &Circuit,
    thresholds: &[f64],
    parts: Partition,
    spec: &PartitionSpec,
    opts: &SynthOptions,
) -> Result<(RucaDesign, DseTrace), DseError> {
    let mut eps = ascending_thresholds(thresholds)?;
    let mut state = DseState::new(golden, parts, spec, opts)?;
    let infos = state.subcircuit_infos();

    let mut iterations: Vec<IterationRecord> = Vec::new();
    let mut unreachable: Vec<f64> = Vec::new();
    let mut current_qor = 0.0f64;

    while !eps.is_empty() {
        let snapshot = state.config();
        let candidates: Vec<(usize, usize)> = state
            .candidates()
            .into_iter()
            .map(|sid| (sid, state.subs[sid].degree - 1))
            .collect();
        if candidates.is_empty() {
            // Exploration exhausted: the current configuration serves every
            // threshold it still strictly satisfies.
            for &e in eps.iter() {
                if current_qor < e {
                    let group = state.freeze_snapshot(&snapshot);
                    state.commits.push(CommitRecord {
                        threshold: e,
                        qor: current_qor,
                        group,
                        degrees: snapshot.clone(),
                    });
                } else {
                    unreachable.push(e);
                }
            }
            break;
        }

        state.ensure_blocks(snapshot.iter().copied())?;
        state.ensure_blocks(candidates.iter().copied())?;
        let evals: Vec<CandidateEval> = candidates
            .par_iter()
            .map(|&(sid, degree)| state.eval_prepared(&snapshot, sid, degree))
            .collect::<Result<Vec<_>, _>>()?;
        let best = evals
            .iter()
            .min_by(|a, b| {
                a.loss
                    .partial_cmp(&b.loss)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.subcircuit.cmp(&b.subcircuit))
            })
            .expect("candidates nonempty")
            .clone();

        // Apply the degrade.
        state.subs[best.subcircuit].degree = best.degree;
        current_qor = best.qor;
        iterations.push(IterationRecord {
            evals,
            selected: best.subcircuit,
            qor_after: best.qor,
        });

        // Crossing thresholds commits the pre-degrade snapshot (possibly for
        // several thresholds at once when the error jumps).
        while !eps.is_empty() && current_qor >= eps[0] {
            let threshold = eps.remove(0);
            let snapshot_qor = state.config_qor(&snapshot)?;
            let group = state.freeze_snapshot(&snapshot);
            state.commits.push(CommitRecord {
                threshold,
                qor: snapshot_qor,
                group,
                degrees: snapshot.clone(),
            });
        }
    }

    // Candidates degraded but never frozen revert to exact logic.
    for s in state.subs.iter_mut() {
        if s.frozen.is_none() {
            s.degree = s.sub.num_outputs();
        }
    }

    let design = state.group_blocks()?;
    let trace = DseTrace {
        subcircuits: infos,
        iterations,
        commits: state.commits,
        unreachable_thresholds: unreachable,
    };
    Ok((design, trace))
}

#[cfg(test)]
mod tests;
