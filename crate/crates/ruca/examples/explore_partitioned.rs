//! Scale to larger circuits: partition, then greedily explore which
//! subcircuit to approximate next by loss = QoR * (P_acc + P_app).
//!
//! Run with: cargo run --release --example explore_partitioned

use ruca::design::SynthOptions;
use ruca::dse::dse;
use ruca::generators::array_multiplier;
use ruca::partition::PartitionSpec;
use ruca::qor::{Metric, QorConfig};

fn main() {
    let golden = array_multiplier(6); // 12 inputs, 12 outputs, ~190 gates
    let opts = SynthOptions {
        qor: QorConfig {
            metric: Metric::Mae,
            ..QorConfig::default()
        },
        ..SynthOptions::default()
    };
    let spec = PartitionSpec::default(); // 10-in / 10-out caps
    let (design, trace) = dse(&golden, &[0.001, 0.01], &spec, &opts).expect("explorable");

    println!(
        "{} subcircuits, {} iterations, {} commits",
        trace.subcircuits.len(),
        trace.iterations.len(),
        trace.commits.len()
    );
    for c in &trace.commits {
        println!(
            "  threshold {:<8} committed at qor {:.6}, froze {:?}",
            c.threshold, c.qor, c.group
        );
    }
    if !trace.unreachable_thresholds.is_empty() {
        println!("  unreachable: {:?}", trace.unreachable_thresholds);
    }

    println!("\nfinal modes:");
    for m in &design.report.modes {
        println!(
            "  {:<8} qor {:.6} power {:>8.2} area {:>8.1}{}",
            m.name,
            m.qor,
            m.power_proxy,
            m.area_proxy,
            if m.exact { "  (exact)" } else { "" }
        );
    }
    println!(
        "\ngolden power {:.2}, area {:.1}; design area {:.1}",
        design.report.golden_power, design.report.golden_area, design.report.design_area
    );
}
