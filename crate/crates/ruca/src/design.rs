//! Runtime-configurable design assembly: split a factorization into accuracy
//! levels, synthesize each level plus the corrector into enable-gated blocks,
//! and wire them through OR (level join) and XOR (correction) connect gates.
//!
//! Block enables are extra primary inputs named `en_<block>`. A disabled
//! block contributes zeros, the identity of both OR and XOR, so any mode's
//! function is the OR of its enabled level reconstructions, XOR the corrector
//! when the full-accuracy block is on. With everything enabled the netlist is
//! bit-exact against its source.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bmf::{self, BmfError, Factorization};
use crate::cost::{self, CostModel};
use crate::matrix::{BooleanMatrix, MatrixError};
use crate::netlist::{
    truth_table_capped, Circuit, Gate, GateKind, NetlistError, DEFAULT_TT_CAP,
};
use crate::qor::{self, Metric, QorConfig, QorError, QorStats};
use crate::sop::{synth_decompressor, synth_sop, SopError};

#[derive(Debug, Error)]
pub enum DesignError {
    #[error("threshold list is empty")]
    EmptyThresholds,
    #[error("thresholds must be positive and strictly decreasing after canonicalization: {0:?}")]
    BadThresholds(Vec<f64>),
    #[error("circuit `{0}` has {1} outputs; factorization needs at least 2")]
    TooFewOutputs(String, usize),
    #[error("cut {cut} exceeds factorization degree {degree}")]
    CutOutOfRange { cut: usize, degree: usize },
    #[error("internal verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Bmf(#[from] BmfError),
    #[error(transparent)]
    Sop(#[from] SopError),
    #[error(transparent)]
    Qor(#[from] QorError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Error thresholds mapped to factorization-degree cut points,
/// loosest threshold first.
#[derive(Debug, Clone)]
pub struct LevelPlan {
    pub thresholds: Vec<f64>,
    pub cuts: Vec<usize>,
    pub metric: Metric,
    pub msb_first: bool,
    /// Thresholds dropped as unreachable (or redundant at an existing cut).
    pub dropped: Vec<f64>,
    pub notes: Vec<String>,
}

impl LevelPlan {
    pub fn levels(&self) -> usize {
        self.cuts.len()
    }

    /// Degree feeding the full-accuracy corrector.
    pub fn last_cut(&self) -> usize {
        self.cuts.last().copied().unwrap_or(0)
    }
}

/// Sort thresholds loosest-first and reject non-positive or duplicate values.
pub fn canonical_thresholds(thresholds: &[f64]) -> Result<Vec<f64>, DesignError> {
    if thresholds.is_empty() {
        return Err(DesignError::EmptyThresholds);
    }
    let mut t = thresholds.to_vec();
    t.sort_by(|a, b| b.partial_cmp(a).expect("thresholds must not be NaN"));
    let ok = t.iter().all(|&x| x > 0.0 && x.is_finite())
        && t.windows(2).all(|w| w[0] > w[1]);
    if !ok {
        return Err(DesignError::BadThresholds(t));
    }
    Ok(t)
}

/// Choose the smallest factorization degree meeting each threshold.
/// Thresholds that remain unreachable at full degree are dropped (the
/// corrector still provides exactness); a tighter threshold landing on an
/// already-used cut is dropped as redundant.
pub fn split_levels(
    fact: &Factorization,
    m: &BooleanMatrix,
    thresholds: &[f64],
    metric: Metric,
    msb_first: bool,
) -> Result<LevelPlan, DesignError> {
    let canon = canonical_thresholds(thresholds)?;
    let degree = fact.degree();

    // Per-prefix QoR curve, computed on an incrementally grown reconstruction.
    let mut curve = Vec::with_capacity(degree);
    let mut recon = BooleanMatrix::zeros(m.rows(), m.cols());
    for k in 0..degree {
        let pair = &fact.pairs[k];
        for r in 0..m.rows() {
            if pair.col.get(r) {
                for (w, src) in recon.row_mut(r).iter_mut().zip(pair.row.words()) {
                    *w |= src;
                }
            }
        }
        curve.push(qor::matrix_qor_opts(m, &recon, metric, msb_first)?);
    }

    let mut cuts = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut notes = Vec::new();
    for &eps in &canon {
        match curve.iter().position(|&q| q <= eps) {
            None => {
                notes.push(format!(
                    "threshold {eps} unreachable at degree {degree} (best {:.6}); dropped along with tighter ones",
                    curve.last().copied().unwrap_or(1.0)
                ));
                dropped.push(eps);
                // Everything tighter is unreachable too.
                let at = canon.iter().position(|&x| x == eps).unwrap_or(0);
                dropped.extend(canon[at + 1..].iter().copied());
                break;
            }
            Some(idx) => {
                let cut = idx + 1;
                if cuts.last() == Some(&cut) {
                    notes.push(format!(
                        "threshold {eps} already satisfied at cut {cut}; merged into previous level"
                    ));
                    dropped.push(eps);
                } else {
                    cuts.push(cut);
                    kept.push(eps);
                }
            }
        }
    }

    Ok(LevelPlan {
        thresholds: kept,
        cuts,
        metric,
        msb_first,
        dropped,
        notes,
    })
}

/// `C = M XOR reconstruct(pairs, k)`; XOR-ing C back onto the reconstruction
/// restores M exactly.
pub fn corrector_matrix(
    m: &BooleanMatrix,
    fact: &Factorization,
    k: usize,
) -> Result<BooleanMatrix, DesignError> {
    if k > fact.degree() {
        return Err(DesignError::CutOutOfRange {
            cut: k,
            degree: fact.degree(),
        });
    }
    let approx = bmf::reconstruct(&fact.pairs, k, m.rows(), m.cols())?;
    Ok(m.xor(&approx)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FullModeKind {
    #[serde(rename = "XOR_CORRECTOR")]
    XorCorrector,
    #[serde(rename = "MUX_ORIGINAL")]
    MuxOriginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FullModePolicy {
    /// Compare corrector and original power proxies per the overhead rule.
    Auto,
    ForceXor,
    ForceMux,
}

/// Pick the cheaper full-accuracy mechanism: keep the XOR corrector unless
/// its power proxy exceeds the original circuit's.
pub fn choose_full_mode(
    corrector: &Circuit,
    original: &Circuit,
    model: &CostModel,
) -> Result<FullModeKind, DesignError> {
    let pc = cost::power_proxy(corrector, &[], model)?;
    let po = cost::power_proxy(original, &[], model)?;
    Ok(if pc <= po {
        FullModeKind::XorCorrector
    } else {
        FullModeKind::MuxOriginal
    })
}

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub tau: f64,
    pub tt_cap: usize,
    pub qor: QorConfig,
    pub cost: CostModel,
    pub full_mode: FullModePolicy,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            tau: 0.9,
            tt_cap: DEFAULT_TT_CAP,
            qor: QorConfig::default(),
            cost: CostModel::default(),
            full_mode: FullModePolicy::Auto,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockInfo {
    pub name: String,
    pub enable: String,
    pub gate_count: usize,
    pub area: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeSpec {
    pub name: String,
    /// Enables asserted in this mode; all others are held at 0.
    pub enables: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeReport {
    pub name: String,
    pub enables: Vec<String>,
    pub qor: f64,
    pub power_proxy: f64,
    pub area_proxy: f64,
    /// Threshold this mode was built for; absent for the exact mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub exact: bool,
    pub vectors: usize,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignReport {
    pub schema: u32,
    pub circuit: String,
    pub metric: Metric,
    pub thresholds: Vec<f64>,
    pub cuts: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub dropped_thresholds: Vec<f64>,
    pub full_mode_kind: FullModeKind,
    pub modes: Vec<ModeReport>,
    pub design_area: f64,
    pub golden_area: f64,
    pub golden_power: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

pub const REPORT_SCHEMA: u32 = 1;

/// An assembled runtime-configurable design.
#[derive(Debug, Clone)]
pub struct RucaDesign {
    pub netlist: Circuit,
    pub blocks: Vec<BlockInfo>,
    pub mode_table: Vec<ModeSpec>,
    pub full_mode_kind: FullModeKind,
    pub report: DesignReport,
}

impl RucaDesign {
    /// Enable assignment for one mode as (net, value) pairs over every enable.
    pub fn enable_assignment(&self, mode: usize) -> Vec<(&str, bool)> {
        let asserted: std::collections::HashSet<&str> = self.mode_table[mode]
            .enables
            .iter()
            .map(String::as_str)
            .collect();
        self.blocks
            .iter()
            .map(|b| (b.enable.as_str(), asserted.contains(b.enable.as_str())))
            .collect()
    }

    /// The design with one mode's enables tied off, leaving only data inputs.
    pub fn mode_circuit(&self, mode: usize) -> Result<Circuit, NetlistError> {
        crate::netlist::tie_inputs(&self.netlist, &self.enable_assignment(mode))
    }
}

/// Dispenses netlist names that cannot collide with anything seen so far.
struct NameAlloc {
    taken: std::collections::HashSet<String>,
}

impl NameAlloc {
    fn for_circuit(c: &Circuit) -> NameAlloc {
        let mut taken: std::collections::HashSet<String> = c.inputs.iter().cloned().collect();
        taken.extend(c.gates.iter().map(|g| g.output.clone()));
        taken.extend(c.outputs.iter().cloned());
        NameAlloc { taken }
    }

    fn fresh(&mut self, base: &str) -> String {
        if self.taken.insert(base.to_string()) {
            return base.to_string();
        }
        let mut k = 2usize;
        loop {
            let cand = format!("{base}_{k}");
            if self.taken.insert(cand.clone()) {
                return cand;
            }
            k += 1;
        }
    }
}

/// Copy a block circuit into `dest`, renaming internals through `alloc` and
/// binding block inputs to `input_map` positionally. Returns the nets now
/// carrying the block's outputs.
fn inline_block(
    dest: &mut Vec<Gate>,
    block: &Circuit,
    input_map: &[String],
    alloc: &mut NameAlloc,
) -> Vec<String> {
    debug_assert_eq!(block.num_inputs(), input_map.len());
    let mut rename: HashMap<&str, String> = HashMap::new();
    for (i, bin) in block.inputs.iter().enumerate() {
        rename.insert(bin, input_map[i].clone());
    }
    for g in &block.gates {
        let fresh = alloc.fresh(&format!("{}_{}", block.name, g.output));
        rename.insert(&g.output, fresh);
    }
    for g in &block.gates {
        dest.push(Gate::new(
            rename[g.output.as_str()].clone(),
            g.kind,
            g.fanins.iter().map(|f| rename[f.as_str()].clone()).collect(),
        ));
    }
    block
        .outputs
        .iter()
        .map(|o| rename[o.as_str()].clone())
        .collect()
}

fn level_block_name(i: usize) -> String {
    if i == 0 {
        "base".to_string()
    } else {
        format!("l{}", i + 1)
    }
}

/// Build the multi-block netlist for one factorized circuit.
///
/// Per level i the columns/rows in `(cuts[i-1], cuts[i]]` become a
/// compressor/decompressor pair; level outputs are AND-masked by their
/// enable and OR-joined (gate a). The corrector (or, when its power proxy
/// loses, a muxed copy of the original) is masked by `en_full` and XOR-joined
/// (gate b). Mode 0 is base only; the all-enabled mode is exact, which is
/// re-verified before returning.
pub fn assemble(
    source: &Circuit,
    fact: &Factorization,
    plan: &LevelPlan,
    opts: &SynthOptions,
) -> Result<RucaDesign, DesignError> {
    let table = truth_table_capped(source, opts.tt_cap)?;
    assemble_with_table(source, &table, fact, plan, opts)
}

pub(crate) fn assemble_with_table(
    source: &Circuit,
    table: &BooleanMatrix,
    fact: &Factorization,
    plan: &LevelPlan,
    opts: &SynthOptions,
) -> Result<RucaDesign, DesignError> {
    let n = source.num_inputs();
    let m = source.num_outputs();
    let levels = plan.levels();
    for &cut in &plan.cuts {
        if cut > fact.degree() {
            return Err(DesignError::CutOutOfRange {
                cut,
                degree: fact.degree(),
            });
        }
    }

    let corrector = corrector_matrix(table, fact, plan.last_cut())?;
    let local_in: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let corr_block = {
        let outs: Vec<String> = (0..m).map(|j| format!("c{j}")).collect();
        let mut blk = synth_sop(&corrector, &local_in, &outs, "k")?;
        blk.name = "corr".into();
        blk
    };
    let full_kind = match opts.full_mode {
        FullModePolicy::ForceXor => FullModeKind::XorCorrector,
        FullModePolicy::ForceMux => FullModeKind::MuxOriginal,
        FullModePolicy::Auto => choose_full_mode(&corr_block, source, &opts.cost)?,
    };

    let mut alloc = NameAlloc::for_circuit(source);
    let mut gates: Vec<Gate> = Vec::new();
    let mut blocks: Vec<BlockInfo> = Vec::new();
    let mut enables: Vec<String> = Vec::new();
    // or_cols[j] collects each level's masked contribution to output j.
    let mut or_cols: Vec<Vec<String>> = vec![Vec::new(); m];

    let mut prev_cut = 0usize;
    for (i, &cut) in plan.cuts.iter().enumerate() {
        let bname = level_block_name(i);
        let enable = alloc.fresh(&format!("en_{bname}"));
        let width = cut - prev_cut;
        let a_cols = BooleanMatrix::from_fn(table.rows(), width, |r, c| {
            fact.pairs[prev_cut + c].col.get(r)
        });
        let b_rows = BooleanMatrix::from_fn(width, m, |r, c| fact.pairs[prev_cut + r].row.get(c));

        let wire_names: Vec<String> = (0..width).map(|k| format!("f{k}")).collect();
        let mut comp = synth_sop(&a_cols, &local_in, &wire_names, "q")?;
        comp.name = format!("{bname}_c");
        let dec_out: Vec<String> = (0..m).map(|j| format!("d{j}")).collect();
        let mut dec = synth_decompressor(&b_rows, &wire_names, &dec_out)?;
        dec.name = format!("{bname}_d");

        let before = gates.len();
        let wires = inline_block(&mut gates, &comp, &source.inputs, &mut alloc);
        let d_nets = inline_block(&mut gates, &dec, &wires, &mut alloc);
        for (j, d) in d_nets.into_iter().enumerate() {
            let masked = alloc.fresh(&format!("{bname}_md{j}"));
            gates.push(Gate::new(&masked, GateKind::And, vec![d, enable.clone()]));
            or_cols[j].push(masked);
        }
        let added = &gates[before..];
        blocks.push(BlockInfo {
            name: bname,
            enable: enable.clone(),
            gate_count: added.len(),
            area: added
                .iter()
                .map(|g| opts.cost.gate_weight(g.kind, g.fanins.len()))
                .sum(),
        });
        enables.push(enable);
        prev_cut = cut;
    }

    // Gate a: OR the enabled levels per output.
    let mut or_nets: Vec<Option<String>> = Vec::with_capacity(m);
    for (j, col) in or_cols.iter_mut().enumerate() {
        or_nets.push(match col.len() {
            0 => None,
            1 => Some(col.pop().expect("one entry")),
            _ => {
                let net = alloc.fresh(&format!("or{j}"));
                gates.push(Gate::new(&net, GateKind::Or, std::mem::take(col)));
                Some(net)
            }
        });
    }

    // Full-accuracy block: XOR corrector or muxed original (gate b).
    let en_full = alloc.fresh("en_full");
    let before = gates.len();
    match full_kind {
        FullModeKind::XorCorrector => {
            let c_nets = inline_block(&mut gates, &corr_block, &source.inputs, &mut alloc);
            for (j, out) in source.outputs.iter().enumerate() {
                let masked = alloc.fresh(&format!("full_mc{j}"));
                gates.push(Gate::new(
                    &masked,
                    GateKind::And,
                    vec![c_nets[j].clone(), en_full.clone()],
                ));
                match &or_nets[j] {
                    Some(or_net) => gates.push(Gate::new(
                        out.clone(),
                        GateKind::Xor,
                        vec![or_net.clone(), masked],
                    )),
                    None => gates.push(Gate::new(out.clone(), GateKind::Buf, vec![masked])),
                }
            }
        }
        FullModeKind::MuxOriginal => {
            let mut orig = source.clone();
            orig.name = "orig".into();
            let o_nets = inline_block(&mut gates, &orig, &source.inputs, &mut alloc);
            for (j, out) in source.outputs.iter().enumerate() {
                let masked = alloc.fresh(&format!("full_mo{j}"));
                gates.push(Gate::new(
                    &masked,
                    GateKind::And,
                    vec![o_nets[j].clone(), en_full.clone()],
                ));
                match &or_nets[j] {
                    Some(or_net) => gates.push(Gate::new(
                        out.clone(),
                        GateKind::Mux,
                        vec![en_full.clone(), masked, or_net.clone()],
                    )),
                    None => gates.push(Gate::new(out.clone(), GateKind::Buf, vec![masked])),
                }
            }
        }
    }
    let added = &gates[before..];
    blocks.push(BlockInfo {
        name: "full".into(),
        enable: en_full.clone(),
        gate_count: added.len(),
        area: added
            .iter()
            .map(|g| opts.cost.gate_weight(g.kind, g.fanins.len()))
            .sum(),
    });
    enables.push(en_full.clone());

    let mut inputs = source.inputs.clone();
    inputs.extend(enables.iter().cloned());
    let netlist = Circuit::new(
        format!("{}_ruca", source.name),
        inputs,
        source.outputs.clone(),
        gates,
    )?;

    // Mode table: base only, then one level at a time, then everything.
    let mut mode_table: Vec<ModeSpec> = Vec::new();
    for i in 0..levels {
        mode_table.push(ModeSpec {
            name: if i == 0 {
                "base".into()
            } else {
                format!("level_{}", i + 1)
            },
            enables: enables[..=i].to_vec(),
        });
    }
    mode_table.push(ModeSpec {
        name: "full".into(),
        enables: enables.clone(),
    });

    let mut design = RucaDesign {
        netlist,
        blocks,
        mode_table,
        full_mode_kind: full_kind,
        report: DesignReport {
            schema: REPORT_SCHEMA,
            circuit: source.name.clone(),
            metric: plan.metric,
            thresholds: plan.thresholds.clone(),
            cuts: plan.cuts.clone(),
            dropped_thresholds: plan.dropped.clone(),
            full_mode_kind: full_kind,
            modes: Vec::new(),
            design_area: 0.0,
            golden_area: 0.0,
            golden_power: 0.0,
            notes: plan.notes.clone(),
        },
    };
    finish_report(&mut design, source, opts)?;
    Ok(design)
}

/// Populate per-mode QoR/power/area and run the exactness guard.
fn finish_report(
    design: &mut RucaDesign,
    golden: &Circuit,
    opts: &SynthOptions,
) -> Result<(), DesignError> {
    let verification = verify_modes(design, golden, &opts.qor)?;
    if !verification.full_exact {
        return Err(DesignError::Verification(format!(
            "full-accuracy mode shows {} mismatching vectors",
            verification
                .modes
                .last()
                .map(|mc| mc.stats.mismatches)
                .unwrap_or(0)
        )));
    }
    design.report.design_area = cost::area_proxy(&design.netlist, &opts.cost);
    design.report.golden_area = cost::area_proxy(golden, &opts.cost);
    design.report.golden_power = cost::power_proxy(golden, &[], &opts.cost)?;

    let mut modes = Vec::new();
    for (i, check) in verification.modes.iter().enumerate() {
        let assignment = design.enable_assignment(i);
        let power = cost::power_proxy(&design.netlist, &assignment, &opts.cost)?;
        let area = cost::area_proxy_gated(&design.netlist, &assignment, &opts.cost);
        let threshold = if i < design.report.thresholds.len() {
            Some(design.report.thresholds[i])
        } else {
            None
        };
        modes.push(ModeReport {
            name: design.mode_table[i].name.clone(),
            enables: design.mode_table[i].enables.clone(),
            qor: check.stats.value,
            power_proxy: power,
            area_proxy: area,
            threshold,
            exact: check.stats.mismatches == 0,
            vectors: check.stats.vectors,
            exhaustive: check.stats.exhaustive,
        });
    }
    design.report.modes = modes;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ModeCheck {
    pub name: String,
    pub stats: QorStats,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ModeVerification {
    pub modes: Vec<ModeCheck>,
    pub full_exact: bool,
}

/// Measure every mode against the golden circuit. The final (all-enabled)
/// mode must match exactly: zero mismatches exhaustively when the input
/// count allows, zero observed mismatches under sampling otherwise.
pub fn verify_modes(
    design: &RucaDesign,
    golden: &Circuit,
    cfg: &QorConfig,
) -> Result<ModeVerification, DesignError> {
    let mut checks = Vec::new();
    for (i, mode) in design.mode_table.iter().enumerate() {
        let tied = design.mode_circuit(i)?;
        let stats = qor::qor(golden, &tied, cfg)?;
        checks.push(ModeCheck {
            name: mode.name.clone(),
            stats,
            threshold: None,
        });
    }
    let full_exact = checks
        .last()
        .map(|c| c.stats.mismatches == 0)
        .unwrap_or(false);
    Ok(ModeVerification {
        modes: checks,
        full_exact,
    })
}

/// The direct (unpartitioned) flow: truth table, greedy factorization at
/// degree m-1, level split against the thresholds, corrector, assembly.
pub fn ruca_direct(
    source: &Circuit,
    thresholds: &[f64],
    opts: &SynthOptions,
) -> Result<RucaDesign, DesignError> {
    let m = source.num_outputs();
    if m < 2 {
        return Err(DesignError::TooFewOutputs(source.name.clone(), m));
    }
    let table = truth_table_capped(source, opts.tt_cap)?;
    let fact = factorize_for_metric(&table, m - 1, opts)?;
    let plan = split_levels(&fact, &table, thresholds, opts.qor.metric, opts.qor.msb_first)?;
    assemble_with_table(source, &table, &fact, &plan, opts)
}

/// Factorize a truth table with gain weights matched to the QoR metric:
/// numeric MAE weights columns by their place value so significant outputs
/// get covered first, NHD treats all columns alike.
pub fn factorize_for_metric(
    table: &BooleanMatrix,
    f: usize,
    opts: &SynthOptions,
) -> Result<Factorization, DesignError> {
    let fact = match opts.qor.metric {
        Metric::Mae => {
            let w = bmf::numeric_column_weights(table.cols(), opts.qor.msb_first);
            bmf::asso_factorize_weighted(table, f, opts.tau, Some(&w))?
        }
        Metric::Nhd => bmf::asso_factorize(table, f, opts.tau)?,
    };
    Ok(fact)
}

/// A two-level runtime-configurable block for one subcircuit: the base
/// approximation gated by the block's first extra input, the full-accuracy
/// mechanism (XOR corrector or muxed original) by its second.
#[derive(Debug, Clone)]
pub struct TwoLevelBlock {
    /// Inputs are the subcircuit's inputs followed by `en_base`, `en_full`;
    /// outputs mirror the subcircuit's outputs positionally.
    pub circuit: Circuit,
    pub kind: FullModeKind,
    pub degree: usize,
}

/// Build the 2-level design of a subcircuit at a given base degree.
/// Internal names are local; callers bind the block by input position.
pub fn build_two_level(
    sub: &Circuit,
    table: &BooleanMatrix,
    fact: &Factorization,
    degree: usize,
    opts: &SynthOptions,
) -> Result<TwoLevelBlock, DesignError> {
    assert!(degree >= 1 && degree <= fact.degree());
    let n = sub.num_inputs();
    let m = sub.num_outputs();
    let local_in: Vec<String> = (0..n).map(|i| format!("i{i}")).collect();

    let a_cols = BooleanMatrix::from_fn(table.rows(), degree, |r, c| fact.pairs[c].col.get(r));
    let b_rows = BooleanMatrix::from_fn(degree, m, |r, c| fact.pairs[r].row.get(c));
    let wires: Vec<String> = (0..degree).map(|k| format!("f{k}")).collect();
    let comp = synth_sop(&a_cols, &local_in, &wires, "q")?;
    let dnets: Vec<String> = (0..m).map(|j| format!("d{j}")).collect();
    let dec = synth_decompressor(&b_rows, &wires, &dnets)?;

    let corr = corrector_matrix(table, fact, degree)?;
    let cnets: Vec<String> = (0..m).map(|j| format!("c{j}")).collect();
    let corr_blk = synth_sop(&corr, &local_in, &cnets, "k")?;
    let kind = match opts.full_mode {
        FullModePolicy::ForceXor => FullModeKind::XorCorrector,
        FullModePolicy::ForceMux => FullModeKind::MuxOriginal,
        FullModePolicy::Auto => {
            // Compare against the subcircuit itself, per the overhead rule.
            choose_full_mode(&corr_blk, sub, &opts.cost)?
        }
    };

    let mut gates: Vec<Gate> = Vec::new();
    gates.extend(comp.gates.iter().cloned());
    gates.extend(dec.gates.iter().cloned());
    let mut outputs = Vec::with_capacity(m);
    match kind {
        FullModeKind::XorCorrector => {
            gates.extend(corr_blk.gates.iter().cloned());
            for j in 0..m {
                gates.push(Gate::new(
                    format!("bm{j}"),
                    GateKind::And,
                    vec![format!("d{j}"), "en_base".into()],
                ));
                gates.push(Gate::new(
                    format!("cm{j}"),
                    GateKind::And,
                    vec![format!("c{j}"), "en_full".into()],
                ));
                gates.push(Gate::new(
                    format!("o{j}"),
                    GateKind::Xor,
                    vec![format!("bm{j}"), format!("cm{j}")],
                ));
                outputs.push(format!("o{j}"));
            }
        }
        FullModeKind::MuxOriginal => {
            // Inline a renamed copy of the original subcircuit.
            let mut rename: HashMap<&str, String> = HashMap::new();
            for (i, sin) in sub.inputs.iter().enumerate() {
                rename.insert(sin, local_in[i].clone());
            }
            for g in &sub.gates {
                rename.insert(&g.output, format!("g_{}", g.output));
            }
            for g in &sub.gates {
                gates.push(Gate::new(
                    rename[g.output.as_str()].clone(),
                    g.kind,
                    g.fanins.iter().map(|f| rename[f.as_str()].clone()).collect(),
                ));
            }
            for (j, so) in sub.outputs.iter().enumerate() {
                gates.push(Gate::new(
                    format!("bm{j}"),
                    GateKind::And,
                    vec![format!("d{j}"), "en_base".into()],
                ));
                gates.push(Gate::new(
                    format!("om{j}"),
                    GateKind::And,
                    vec![rename[so.as_str()].clone(), "en_full".into()],
                ));
                gates.push(Gate::new(
                    format!("o{j}"),
                    GateKind::Mux,
                    vec!["en_full".into(), format!("om{j}"), format!("bm{j}")],
                ));
                outputs.push(format!("o{j}"));
            }
        }
    }

    let mut inputs = local_in;
    inputs.push("en_base".into());
    inputs.push("en_full".into());
    let circuit = Circuit::new(format!("{}_2lv", sub.name), inputs, outputs, gates)?;
    Ok(TwoLevelBlock {
        circuit,
        kind,
        degree,
    })
}

#[cfg(test)]
mod tests;
