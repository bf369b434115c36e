//! Factorize a truth table into rank-one pairs and watch the error fall.
//!
//! Run with: cargo run --release --example factorize_table

use ruca::bmf::{asso_factorize, brute_force_bmf, reconstruct};
use ruca::generators::ripple_adder;
use ruca::matrix::BooleanMatrix;
use ruca::netlist::truth_table;

fn main() {
    // A hand-written 6x4 matrix: two overlapping rank-one patterns.
    let m = BooleanMatrix::from_bit_rows(&[
        "1100", "1100", "0110", "0110", "0011", "0011",
    ]);
    println!("matrix:\n{m:?}");
    let fact = asso_factorize(&m, 3, 0.9).expect("within bounds");
    for (k, pair) in fact.pairs.iter().enumerate() {
        println!(
            "pair {k}: col={:?} row={:?} gain={} -> error {}",
            pair.col, pair.row, pair.gain, fact.err_curve[k]
        );
    }
    let exact = brute_force_bmf(&m, 3).expect("small enough for enumeration");
    println!(
        "greedy error {} vs optimal {}",
        fact.err_curve.last().unwrap(),
        exact.err_curve.last().unwrap()
    );

    // The same machinery on a real circuit's truth table.
    let adder = ripple_adder(4);
    let table = truth_table(&adder).expect("8 inputs fit easily");
    let fact = asso_factorize(&table, adder.num_outputs() - 1, 0.9).unwrap();
    println!("\n4-bit adder (256x5 table), per-degree Hamming error:");
    for (k, err) in fact.err_curve.iter().enumerate() {
        let recon = reconstruct(&fact.pairs, k + 1, table.rows(), table.cols()).unwrap();
        let check = table.hamming(&recon).unwrap();
        assert_eq!(check, *err);
        println!("  degree {}: {err} wrong entries", k + 1);
    }
}
