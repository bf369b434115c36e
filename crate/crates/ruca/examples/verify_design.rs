//! Round-trip an emitted design through BENCH text and re-verify every mode
//! against the golden circuit.
//!
//! Run with: cargo run --release --example verify_design

use ruca::design::{ruca_direct, verify_modes, SynthOptions};
use ruca::generators::abs_diff;
use ruca::netlist::{emit_bench, parse_bench};
use ruca::qor::{Metric, QorConfig};

fn main() {
    let golden = abs_diff(4);
    let opts = SynthOptions {
        qor: QorConfig {
            metric: Metric::Mae,
            ..QorConfig::default()
        },
        ..SynthOptions::default()
    };
    let mut design = ruca_direct(&golden, &[0.1], &opts).expect("synthesizable");

    // Emit, reparse, and drop the netlist back into the design: text is the
    // interchange format, so verification must survive it.
    let text = emit_bench(&design.netlist);
    design.netlist = parse_bench(&text).expect("emitted text reparses");

    let verification = verify_modes(&design, &golden, &opts.qor).expect("comparable");
    for check in &verification.modes {
        println!(
            "mode {:<8} qor {:.5} mismatches {}/{} ({})",
            check.name,
            check.stats.value,
            check.stats.mismatches,
            check.stats.vectors,
            if check.stats.exhaustive { "exhaustive" } else { "sampled" }
        );
    }
    assert!(verification.full_exact);
    println!("full-accuracy mode is bit-exact after the BENCH round-trip");

    let json = serde_json::to_string_pretty(&design.report).unwrap();
    println!("\nreport excerpt:\n{}", &json[..json.len().min(400)]);
}
