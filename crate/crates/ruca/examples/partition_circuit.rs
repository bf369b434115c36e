//! Partition a circuit into cap-respecting convex subcircuits and stitch
//! them back to prove nothing changed.
//!
//! Run with: cargo run --release --example partition_circuit

use ruca::generators::ripple_adder;
use ruca::netlist::{stitch, truth_table};
use ruca::partition::{check_caps, cut_size, partition, PartitionSpec};

fn main() {
    let c = ripple_adder(8);
    let spec = PartitionSpec {
        max_inputs: 6,
        max_outputs: 6,
        min_gates: 3,
    };
    let p = partition(&c, &spec).expect("feasible caps");
    let sizes = check_caps(&p, &spec).expect("caps hold");
    println!("{} gates split into {} subcircuits:", c.gates.len(), p.subcircuits.len());
    for ((sub, b), (ni, no)) in p.subcircuits.iter().zip(&sizes) {
        println!("  {:<12} {:>2} gates, {ni} in / {no} out", sub.name, b.gates.len());
    }

    // Cut size of the induced two-way split (first part vs the rest).
    let mut side = vec![1u8; c.gates.len()];
    for &g in &p.subcircuits[0].1.gates {
        side[g] = 0;
    }
    println!(
        "hyperedge cut between part 0 and the rest: {}",
        cut_size(&c, &side).unwrap()
    );

    // Identity re-stitch: replacing a part by itself preserves the function.
    let golden = truth_table(&c).unwrap();
    for (sub, boundary) in &p.subcircuits {
        let back = stitch(&c, boundary, sub).expect("identity stitch");
        assert_eq!(truth_table(&back).unwrap(), golden);
    }
    println!("identity re-stitch of every part: exhaustive match on all 2^16 inputs");
}
