//! Command-line front end: factorize tables, synthesize runtime-configurable
//! designs (direct or partition+DSE), and verify emitted designs.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 input error,
//! 3 constraint violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ruca::cost::CostModel;
use ruca::design::{
    ruca_direct, verify_modes, BlockInfo, DesignReport, FullModePolicy, ModeSpec, RucaDesign,
    SynthOptions,
};
use ruca::matrix::BooleanMatrix;
use ruca::netlist::{emit_bench, parse_bench_named, Circuit};
use ruca::partition::{parse_partition_file, PartitionSpec};
use ruca::qor::{Metric, QorConfig};

#[derive(Parser)]
#[command(name = "ruca", version, about = "Runtime-configurable approximate circuit synthesis")]
struct Cli {
    /// Worker pool size (RUCA_THREADS overrides; 0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for every stochastic sampler (QoR sampling, activity vectors).
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factorize a truth table (from a .bench circuit or a matrix file).
    Factor(FactorArgs),
    /// Direct synthesis: factorize the whole truth table into a
    /// multi-level design with a self-correcting full-accuracy mode.
    Synth(SynthArgs),
    /// Partition a large circuit and explore per-subcircuit approximations.
    Dse(DseArgs),
    /// Re-verify an emitted design against its golden circuit.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct FactorArgs {
    /// Input circuit (.bench) or matrix file (`rows cols` header plus 0/1 rows).
    input: PathBuf,
    /// Factorization degree f.
    #[arg(long)]
    degree: usize,
    /// Association confidence threshold.
    #[arg(long, default_value_t = 0.9)]
    tau: f64,
    /// Write the factor dump (JSON) here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Weight cover gains by output place value (implied by --metric mae).
    #[arg(long)]
    numeric_weights: bool,
}

#[derive(Args, Clone)]
struct QualityArgs {
    /// Error thresholds, e.g. `--thresholds 0.01,0.02`.
    #[arg(long, value_delimiter = ',', required = true)]
    thresholds: Vec<f64>,
    #[arg(long, default_value = "mae")]
    metric: Metric,
    /// Treat outputs[0] as the most significant bit in MAE.
    #[arg(long)]
    msb_first: bool,
    #[arg(long, default_value_t = 0.9)]
    tau: f64,
    /// Exhaustive QoR up to this many inputs, sampled beyond.
    #[arg(long, default_value_t = 14)]
    exhaustive_cap: usize,
    /// Sample budget for circuits above the exhaustive cap.
    #[arg(long, default_value_t = 4096)]
    samples: usize,
    /// Full-accuracy mechanism: auto (power comparison), xor, or mux.
    #[arg(long, default_value = "auto")]
    full_mode: String,
    /// JSON file overriding gate area weights, e.g. {"and":1.0,...}.
    #[arg(long)]
    cost_model: Option<PathBuf>,
    /// Emit the design netlist here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit the JSON report here (a CSV mirror lands next to it).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Input circuit (.bench).
    input: PathBuf,
    #[command(flatten)]
    quality: QualityArgs,
    /// Truth-table input cap for the direct flow.
    #[arg(long, default_value_t = 20)]
    tt_cap: usize,
}

#[derive(Args)]
struct DseArgs {
    /// Input circuit (.bench).
    input: PathBuf,
    #[command(flatten)]
    quality: QualityArgs,
    /// Subcircuit input cap.
    #[arg(long, default_value_t = 10)]
    max_in: usize,
    /// Subcircuit output cap.
    #[arg(long, default_value_t = 10)]
    max_out: usize,
    /// Don't split fragments at or below this many gates with FM.
    #[arg(long, default_value_t = 3)]
    min_gates: usize,
    /// External `gate_name part_id` partition, overriding FM.
    #[arg(long)]
    partition_file: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Emitted design netlist (.bench, with enable inputs).
    design: PathBuf,
    /// Golden reference circuit (.bench).
    golden: PathBuf,
    /// The design's JSON report (mode table source).
    modes: PathBuf,
    /// Sample budget when the input count forces sampling.
    #[arg(long, default_value_t = 65536)]
    budget: usize,
    #[arg(long, default_value_t = 14)]
    exhaustive_cap: usize,
}

/// Input problems: unreadable/ill-formed files.
struct InputError(String);
/// Constraint problems: flag values or spec violations.
struct ConstraintError(String);

enum CliError {
    Input(String),
    Constraint(String),
    VerifyFailed(String),
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Input(e.0)
    }
}
impl From<ConstraintError> for CliError {
    fn from(e: ConstraintError) -> Self {
        CliError::Constraint(e.0)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = std::env::var("RUCA_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(cli.threads);
    if threads > 0 {
        // A failure here means a pool already exists; the default is fine.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let result = match &cli.command {
        Command::Factor(a) => cmd_factor(a, cli.seed),
        Command::Synth(a) => cmd_synth(a, cli.seed),
        Command::Dse(a) => cmd_dse(a, cli.seed),
        Command::Verify(a) => cmd_verify(a, cli.seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::VerifyFailed(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("input error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Constraint(msg)) => {
            eprintln!("constraint violation: {msg}");
            ExitCode::from(3)
        }
    }
}

fn read_to_string(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_circuit(path: &Path) -> Result<Circuit, InputError> {
    let text = read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "circuit".into());
    parse_bench_named(&text, &name).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), InputError> {
    std::fs::write(path, contents)
        .map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_cost_model(path: &Option<PathBuf>, seed: u64) -> Result<CostModel, CliError> {
    let mut model = CostModel {
        seed,
        ..CostModel::default()
    };
    if let Some(p) = path {
        let text = read_to_string(p)?;
        let weights: ruca::cost::GateWeights = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
        model.weights = weights;
    }
    Ok(model)
}

fn synth_options(q: &QualityArgs, seed: u64, tt_cap: usize) -> Result<SynthOptions, CliError> {
    if !(q.tau > 0.0 && q.tau <= 1.0) {
        return Err(CliError::Constraint(format!("tau {} out of (0, 1]", q.tau)));
    }
    if q.thresholds.is_empty() || q.thresholds.iter().any(|&t| t <= 0.0 || !t.is_finite()) {
        return Err(CliError::Constraint(format!(
            "thresholds must be positive fractions: {:?}",
            q.thresholds
        )));
    }
    let full_mode = match q.full_mode.as_str() {
        "auto" => FullModePolicy::Auto,
        "xor" => FullModePolicy::ForceXor,
        "mux" => FullModePolicy::ForceMux,
        other => {
            return Err(CliError::Constraint(format!(
                "--full-mode must be auto|xor|mux, got `{other}`"
            )))
        }
    };
    Ok(SynthOptions {
        tau: q.tau,
        tt_cap,
        qor: QorConfig {
            metric: q.metric,
            exhaustive_cap: q.exhaustive_cap,
            samples: q.samples,
            seed,
            msb_first: q.msb_first,
        },
        cost: load_cost_model(&q.cost_model, seed)?,
        full_mode,
    })
}

fn cmd_factor(a: &FactorArgs, _seed: u64) -> Result<(), CliError> {
    if a.degree == 0 {
        return Err(CliError::Constraint("--degree must be at least 1".into()));
    }
    if !(a.tau > 0.0 && a.tau <= 1.0) {
        return Err(CliError::Constraint(format!("tau {} out of (0, 1]", a.tau)));
    }
    let text = read_to_string(&a.input)?;
    let is_bench = a.input.extension().map(|e| e == "bench").unwrap_or(false)
        || text.contains("INPUT(");
    let table = if is_bench {
        let c = parse_bench_named(&text, "factor_input")
            .map_err(|e| CliError::Input(format!("{}: {e}", a.input.display())))?;
        ruca::netlist::truth_table(&c)
            .map_err(|e| CliError::Constraint(e.to_string()))?
    } else {
        BooleanMatrix::parse_text(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", a.input.display())))?
    };
    if a.degree > table.cols() {
        return Err(CliError::Constraint(format!(
            "degree {} exceeds column count {}",
            a.degree,
            table.cols()
        )));
    }
    let fact = if a.numeric_weights {
        let w = ruca::bmf::numeric_column_weights(table.cols(), false);
        ruca::bmf::asso_factorize_weighted(&table, a.degree, a.tau, Some(&w))
    } else {
        ruca::bmf::asso_factorize(&table, a.degree, a.tau)
    }
    .map_err(|e| CliError::Constraint(e.to_string()))?;

    println!("degree,hamming_error");
    for (k, err) in fact.err_curve.iter().enumerate() {
        println!("{},{}", k + 1, err);
    }
    if let Some(out) = &a.out {
        let dump = serde_json::json!({
            "rows": fact.rows,
            "cols": fact.cols,
            "degree": fact.degree(),
            "tau": a.tau,
            "err_curve": fact.err_curve,
            "pairs": fact.pairs.iter().map(|p| serde_json::json!({
                "col": format!("{:?}", p.col),
                "row": format!("{:?}", p.row),
                "gain": p.gain,
            })).collect::<Vec<_>>(),
        });
        write_file(out, &serde_json::to_string_pretty(&dump).expect("json"))?;
    }
    Ok(())
}

fn report_csv(report: &DesignReport) -> String {
    let mut s = String::from("mode,enables,qor,power_proxy,area_proxy,threshold,exact\n");
    for m in &report.modes {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            m.name,
            m.enables.join(";"),
            m.qor,
            m.power_proxy,
            m.area_proxy,
            m.threshold.map(|t| t.to_string()).unwrap_or_default(),
            m.exact
        ));
    }
    s
}

fn emit_design(
    design: &RucaDesign,
    out: &Option<PathBuf>,
    report: &Option<PathBuf>,
    extra: Option<serde_json::Value>,
) -> Result<(), CliError> {
    if let Some(path) = out {
        write_file(path, &emit_bench(&design.netlist))?;
    }
    if let Some(path) = report {
        let mut value = serde_json::to_value(&design.report).expect("report serializes");
        if let Some(extra) = extra {
            value
                .as_object_mut()
                .expect("report is an object")
                .insert("dse".into(), extra);
        }
        write_file(path, &serde_json::to_string_pretty(&value).expect("json"))?;
        let csv_path = path.with_extension("csv");
        write_file(&csv_path, &report_csv(&design.report))?;
    }
    for m in &design.report.modes {
        println!(
            "mode {:<8} qor {:<12.6} power {:<12.3} area {:<12.3} {}",
            m.name,
            m.qor,
            m.power_proxy,
            m.area_proxy,
            if m.exact { "exact" } else { "approximate" }
        );
    }
    Ok(())
}

fn cmd_synth(a: &SynthArgs, seed: u64) -> Result<(), CliError> {
    let golden = load_circuit(&a.input)?;
    let opts = synth_options(&a.quality, seed, a.tt_cap)?;
    let design = ruca_direct(&golden, &a.quality.thresholds, &opts)
        .map_err(|e| CliError::Constraint(e.to_string()))?;
    emit_design(&design, &a.quality.out, &a.quality.report, None)
}

fn cmd_dse(a: &DseArgs, seed: u64) -> Result<(), CliError> {
    let golden = load_circuit(&a.input)?;
    let opts = synth_options(&a.quality, seed, 20)?;
    let spec = PartitionSpec {
        max_inputs: a.max_in,
        max_outputs: a.max_out,
        min_gates: a.min_gates,
    };
    if let Some(pf) = &a.partition_file {
        // External partitions are validated for caps, then the same DSE runs.
        let text = read_to_string(pf)?;
        let assignment = parse_partition_file(&golden, &text)
            .map_err(|e| CliError::Input(e.to_string()))?;
        let parts = ruca::partition::partition_from_assignment(&golden, &assignment)
            .map_err(|e| CliError::Input(e.to_string()))?;
        ruca::partition::check_caps(&parts, &spec)
            .map_err(|e| CliError::Constraint(e.to_string()))?;
        let (design, trace) = ruca::dse::dse_with_partition(&golden, &a.quality.thresholds, parts, &spec, &opts)
            .map_err(|e| CliError::Constraint(e.to_string()))?;
        return emit_design(
            &design,
            &a.quality.out,
            &a.quality.report,
            Some(serde_json::to_value(&trace).expect("trace serializes")),
        );
    }
    let (design, trace) = ruca::dse::dse(&golden, &a.quality.thresholds, &spec, &opts)
        .map_err(|e| CliError::Constraint(e.to_string()))?;
    emit_design(
        &design,
        &a.quality.out,
        &a.quality.report,
        Some(serde_json::to_value(&trace).expect("trace serializes")),
    )
}

fn cmd_verify(a: &VerifyArgs, seed: u64) -> Result<(), CliError> {
    let design_netlist = load_circuit(&a.design)?;
    let golden = load_circuit(&a.golden)?;
    let report_text = read_to_string(&a.modes)?;
    let report: DesignReport = serde_json::from_str(&report_text)
        .map_err(|e| CliError::Input(format!("{}: {e}", a.modes.display())))?;

    // Rebuild the mode table from the report: the enable universe is the
    // union over modes (the full mode carries all of them).
    let mut enables: Vec<String> = Vec::new();
    for m in &report.modes {
        for e in &m.enables {
            if !enables.contains(e) {
                enables.push(e.clone());
            }
        }
    }
    let blocks: Vec<BlockInfo> = enables
        .iter()
        .map(|e| BlockInfo {
            name: e.trim_start_matches("en_").to_string(),
            enable: e.clone(),
            gate_count: 0,
            area: 0.0,
        })
        .collect();
    let mode_table: Vec<ModeSpec> = report
        .modes
        .iter()
        .map(|m| ModeSpec {
            name: m.name.clone(),
            enables: m.enables.clone(),
        })
        .collect();
    let design = RucaDesign {
        netlist: design_netlist,
        blocks,
        mode_table,
        full_mode_kind: report.full_mode_kind,
        report,
    };

    let cfg = QorConfig {
        metric: design.report.metric,
        exhaustive_cap: a.exhaustive_cap,
        samples: a.budget,
        seed,
        msb_first: false,
    };
    let verification = verify_modes(&design, &golden, &cfg)
        .map_err(|e| CliError::Input(e.to_string()))?;
    for (check, mode) in verification.modes.iter().zip(&design.mode_table) {
        println!(
            "mode {:<8} qor {:<12.6} mismatches {:<8} vectors {} ({})",
            mode.name,
            check.stats.value,
            check.stats.mismatches,
            check.stats.vectors,
            if check.stats.exhaustive {
                "exhaustive"
            } else {
                "sampled"
            }
        );
    }
    if !verification.full_exact {
        return Err(CliError::VerifyFailed(
            "full-accuracy mode differs from the golden circuit".into(),
        ));
    }
    Ok(())
}
