//! Direct flow: factorize a whole circuit and assemble a multi-level
//! runtime-configurable design with a self-correcting full mode.
//!
//! Run with: cargo run --release --example direct_synthesis

use ruca::design::{ruca_direct, SynthOptions};
use ruca::generators::ripple_adder;
use ruca::netlist::emit_bench;
use ruca::qor::{Metric, QorConfig};

fn main() {
    let golden = ripple_adder(4);
    let opts = SynthOptions {
        qor: QorConfig {
            metric: Metric::Mae,
            ..QorConfig::default()
        },
        ..SynthOptions::default()
    };
    // Loosest first or tightest first both work; thresholds are canonicalized.
    let design = ruca_direct(&golden, &[0.25, 0.05], &opts).expect("synthesizable");

    println!("blocks:");
    for b in &design.blocks {
        println!(
            "  {:<6} enable {:<10} {} gates, area {:.1}",
            b.name, b.enable, b.gate_count, b.area
        );
    }
    println!("\nmodes (cuts {:?}, full path {:?}):", design.report.cuts, design.full_mode_kind);
    for m in &design.report.modes {
        println!(
            "  {:<8} enables [{}] qor {:.4} power {:.1} area {:.1}{}",
            m.name,
            m.enables.join(", "),
            m.qor,
            m.power_proxy,
            m.area_proxy,
            if m.exact { " (exact)" } else { "" }
        );
    }

    let bench = emit_bench(&design.netlist);
    println!(
        "\nemitted netlist: {} lines, first 8:",
        bench.lines().count()
    );
    for line in bench.lines().take(8) {
        println!("  {line}");
    }
}
