//! Area and power proxies: gate weights, toggle counting, and the effect of
//! power-gating blocks through their enables.
//!
//! Run with: cargo run --release --example power_modes

use ruca::cost::{area_proxy, area_proxy_gated, power_proxy, CostModel};
use ruca::design::{ruca_direct, SynthOptions};
use ruca::generators::ripple_adder;
use ruca::qor::{Metric, QorConfig};

fn main() {
    let golden = ripple_adder(6);
    let model = CostModel::default();
    println!(
        "golden adder6: area {:.1}, power {:.2}",
        area_proxy(&golden, &model),
        power_proxy(&golden, &[], &model).unwrap()
    );

    let opts = SynthOptions {
        qor: QorConfig {
            metric: Metric::Mae,
            ..QorConfig::default()
        },
        cost: model.clone(),
        ..SynthOptions::default()
    };
    let design = ruca_direct(&golden, &[0.03, 0.01], &opts).expect("synthesizable");

    println!("\nper-mode proxies (enabling more blocks costs more):");
    for (i, mode) in design.mode_table.iter().enumerate() {
        let assignment = design.enable_assignment(i);
        let p = power_proxy(&design.netlist, &assignment, &opts.cost).unwrap();
        let a = area_proxy_gated(&design.netlist, &assignment, &opts.cost);
        println!(
            "  {:<8} power {:>10.2} live-area {:>10.1}",
            mode.name, p, a
        );
    }

    // Scaling every weight scales the proxies without changing any decision.
    let scaled = model.scaled(2.0);
    let p1 = power_proxy(&golden, &[], &model).unwrap();
    let p2 = power_proxy(&golden, &[], &scaled).unwrap();
    println!("\nweight scaling x2: power {:.2} -> {:.2}", p1, p2);
}
