//! Two-level sum-of-products synthesis from truth-table columns.
//!
//! Minterms are merged pairwise (two cubes differing in exactly one fixed
//! literal collapse into one) until fixpoint or until the working set hits a
//! size bound; whatever cubes survive form the cover. No exact-cover step:
//! correctness is required, minimality is not.

use std::collections::HashSet;

use thiserror::Error;

use crate::matrix::BooleanMatrix;
use crate::netlist::{Circuit, Gate, GateKind, NetlistError};

#[derive(Debug, Error)]
pub enum SopError {
    #[error("row count {0} is not 2^{1}")]
    RowsNotPowerOfTwo(usize, usize),
    #[error("expected {expected} wire names, got {got}")]
    WireCount { expected: usize, got: usize },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

/// A product term: `mask` bit set means the literal is fixed to the `value`
/// bit; clear bits are don't-cares. `value & !mask == 0` is kept normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    pub value: u64,
    pub mask: u64,
}

/// Stop merging when a level would exceed this many cubes; the current cover
/// is already valid, just less merged.
const CUBE_LIMIT: usize = 1 << 17;

/// Merge minterms of an n-variable function into a (not necessarily prime,
/// never wrong) cube cover. Returns cubes sorted for determinism.
pub fn merge_cubes(minterms: &[u64], n: usize) -> Vec<Cube> {
    let full_mask: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut level: HashSet<Cube> = minterms
        .iter()
        .map(|&v| Cube {
            value: v & full_mask,
            mask: full_mask,
        })
        .collect();
    let mut cover: Vec<Cube> = Vec::new();

    while !level.is_empty() {
        let mut next: HashSet<Cube> = HashSet::new();
        let mut merged: HashSet<Cube> = HashSet::new();
        let mut blow_up = false;
        for &cube in &level {
            for b in 0..n {
                let bit = 1u64 << b;
                if cube.mask & bit == 0 {
                    continue;
                }
                let partner = Cube {
                    value: cube.value ^ bit,
                    mask: cube.mask,
                };
                if level.contains(&partner) {
                    merged.insert(cube);
                    merged.insert(partner);
                    next.insert(Cube {
                        value: cube.value & !bit,
                        mask: cube.mask & !bit,
                    });
                }
            }
            if next.len() > CUBE_LIMIT {
                blow_up = true;
                break;
            }
        }
        if blow_up {
            // Keep everything at this level; coverage stays exact.
            cover.extend(level.iter().copied());
            break;
        }
        cover.extend(level.difference(&merged).copied());
        level = next;
    }

    cover.sort_unstable();
    cover.dedup();
    cover
}

/// Gate-level SOP for several truth-table columns over shared inputs.
/// Column `j` of `cols` (2^n rows) becomes the function driving
/// `output_names[j]`; inverters are shared per input. Internal nets are
/// prefixed with `prefix`.
pub fn synth_sop(
    cols: &BooleanMatrix,
    input_names: &[String],
    output_names: &[String],
    prefix: &str,
) -> Result<Circuit, SopError> {
    let n = input_names.len();
    if cols.rows() != (1usize << n) {
        return Err(SopError::RowsNotPowerOfTwo(cols.rows(), n));
    }
    if output_names.len() != cols.cols() {
        return Err(SopError::WireCount {
            expected: cols.cols(),
            got: output_names.len(),
        });
    }

    let mut gates: Vec<Gate> = Vec::new();
    let mut inverters: Vec<Option<String>> = vec![None; n];
    let mut fresh = 0usize;

    for (j, out) in output_names.iter().enumerate() {
        let minterms: Vec<u64> = (0..cols.rows())
            .filter(|&r| cols.get(r, j))
            .map(|r| r as u64)
            .collect();
        if minterms.is_empty() {
            gates.push(Gate::new(out.clone(), GateKind::Const0, Vec::new()));
            continue;
        }
        if minterms.len() == cols.rows() {
            gates.push(Gate::new(out.clone(), GateKind::Const1, Vec::new()));
            continue;
        }
        let cubes = merge_cubes(&minterms, n);
        let mut terms: Vec<String> = Vec::with_capacity(cubes.len());
        for cube in &cubes {
            let mut literals: Vec<String> = Vec::new();
            for b in 0..n {
                let bit = 1u64 << b;
                if cube.mask & bit == 0 {
                    continue;
                }
                if cube.value & bit != 0 {
                    literals.push(input_names[b].clone());
                } else {
                    let inv = inverters[b].get_or_insert_with(|| {
                        format!("{prefix}n{b}")
                    });
                    literals.push(inv.clone());
                }
            }
            match literals.len() {
                0 => unreachable!("tautology cube on a non-constant column"),
                1 => terms.push(literals.pop().expect("one literal")),
                _ => {
                    fresh += 1;
                    let net = format!("{prefix}t{fresh}");
                    gates.push(Gate::new(&net, GateKind::And, literals));
                    terms.push(net);
                }
            }
        }
        match terms.len() {
            1 => gates.push(Gate::new(out.clone(), GateKind::Buf, vec![terms.pop().unwrap()])),
            _ => gates.push(Gate::new(out.clone(), GateKind::Or, terms)),
        }
    }

    // Materialize only the inverters that got used.
    let inv_gates: Vec<Gate> = inverters
        .iter()
        .enumerate()
        .filter_map(|(b, inv)| {
            inv.as_ref().map(|net| {
                Gate::new(net.clone(), GateKind::Not, vec![input_names[b].clone()])
            })
        })
        .collect();
    let mut all_gates = inv_gates;
    all_gates.extend(gates);

    Ok(Circuit::new(
        format!("{prefix}sop"),
        input_names.to_vec(),
        output_names.to_vec(),
        all_gates,
    )?)
}

/// The compressor of a factor block: every column of the stacked `A`
/// matrix becomes a function of the circuit inputs. The corrector synthesis
/// uses the same SOP machinery, so this is a second name for [`synth_sop`].
pub use synth_sop as synth_compressor;

/// OR-network decompressor: output `j` is the OR of the wires `i` with
/// `rows[i][j] = 1`; zero fanins become constants, single fanins buffers.
pub fn synth_decompressor(
    rows: &BooleanMatrix,
    wire_names: &[String],
    output_names: &[String],
) -> Result<Circuit, SopError> {
    if wire_names.len() != rows.rows() {
        return Err(SopError::WireCount {
            expected: rows.rows(),
            got: wire_names.len(),
        });
    }
    if output_names.len() != rows.cols() {
        return Err(SopError::WireCount {
            expected: rows.cols(),
            got: output_names.len(),
        });
    }
    let mut gates = Vec::new();
    for (j, out) in output_names.iter().enumerate() {
        let fanins: Vec<String> = (0..rows.rows())
            .filter(|&i| rows.get(i, j))
            .map(|i| wire_names[i].clone())
            .collect();
        let gate = match fanins.len() {
            0 => Gate::new(out.clone(), GateKind::Const0, Vec::new()),
            1 => Gate::new(out.clone(), GateKind::Buf, fanins),
            _ => Gate::new(out.clone(), GateKind::Or, fanins),
        };
        gates.push(gate);
    }
    Ok(Circuit::new(
        "decompressor",
        wire_names.to_vec(),
        output_names.to_vec(),
        gates,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{simulate, truth_table};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn column_equal_to_input_is_single_buffer() {
        // f(x0, x1) = x0: minterms {1, 3} merge to cube x0.
        let cols = BooleanMatrix::from_fn(4, 1, |r, _| r & 1 == 1);
        let c = synth_sop(&cols, &names("x", 2), &names("f", 1), "s_").unwrap();
        assert_eq!(c.gates.len(), 1);
        assert_eq!(c.gates[0].kind, GateKind::Buf);
        assert_eq!(truth_table(&c).unwrap(), cols);
    }

    #[test]
    fn all_zero_column_is_const0() {
        let cols = BooleanMatrix::zeros(8, 2);
        let c = synth_sop(&cols, &names("x", 3), &names("f", 2), "s_").unwrap();
        assert!(c.gates.iter().all(|g| g.kind == GateKind::Const0));
    }

    #[test]
    fn all_one_column_is_const1() {
        let cols = BooleanMatrix::from_fn(4, 1, |_, _| true);
        let c = synth_sop(&cols, &names("x", 2), &names("f", 1), "s_").unwrap();
        assert_eq!(c.gates[0].kind, GateKind::Const1);
    }

    #[test]
    fn random_tables_synthesize_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..30 {
            let n = rng.gen_range(1..=4usize);
            let k = rng.gen_range(1..=3usize);
            let density = rng.gen_range(0.1..0.9);
            let cols = BooleanMatrix::from_fn(1 << n, k, |_, _| rng.gen_bool(density));
            let c = synth_sop(&cols, &names("x", n), &names("f", k), "s_").unwrap();
            assert_eq!(
                truth_table(&c).unwrap(),
                cols,
                "trial {trial}: n={n} k={k}"
            );
        }
    }

    #[test]
    fn sixteen_row_matrix_reproduces_every_entry() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cols = BooleanMatrix::from_fn(16, 3, |_, _| rng.gen_bool(0.4));
        let c = synth_sop(&cols, &names("x", 4), &names("f", 3), "s_").unwrap();
        for r in 0..16u64 {
            let x: Vec<bool> = (0..4).map(|b| (r >> b) & 1 == 1).collect();
            let y = simulate(&c, &x).unwrap();
            for (j, &bit) in y.iter().enumerate() {
                assert_eq!(bit, cols.get(r as usize, j));
            }
        }
    }

    #[test]
    fn parity_column_yields_minterm_cover() {
        // Parity never merges: cover size must equal the minterm count.
        let n = 4;
        let cols = BooleanMatrix::from_fn(16, 1, |r, _| (r.count_ones() & 1) == 1);
        let minterms: Vec<u64> = (0..16u64).filter(|r| (r.count_ones() & 1) == 1).collect();
        let cubes = merge_cubes(&minterms, n);
        assert_eq!(cubes.len(), 8);
        let c = synth_sop(&cols, &names("x", n), &names("f", 1), "s_").unwrap();
        assert_eq!(truth_table(&c).unwrap(), cols);
    }

    #[test]
    fn decompressor_identity_is_buffers() {
        let ident = BooleanMatrix::from_fn(3, 3, |i, j| i == j);
        let c = synth_decompressor(&ident, &names("w", 3), &names("y", 3)).unwrap();
        assert!(c.gates.iter().all(|g| g.kind == GateKind::Buf));
    }

    #[test]
    fn decompressor_zero_column_is_const0() {
        let rows = BooleanMatrix::from_bit_rows(&["10", "10"]);
        let c = synth_decompressor(&rows, &names("w", 2), &names("y", 2)).unwrap();
        assert_eq!(c.gates[1].kind, GateKind::Const0);
    }

    #[test]
    fn decompressor_matches_matrix_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rows = BooleanMatrix::from_fn(3, 5, |_, _| rng.gen_bool(0.5));
        let c = synth_decompressor(&rows, &names("w", 3), &names("y", 5)).unwrap();
        for v in 0..8u64 {
            let x: Vec<bool> = (0..3).map(|b| (v >> b) & 1 == 1).collect();
            let y = simulate(&c, &x).unwrap();
            for (j, &bit) in y.iter().enumerate() {
                let expect = (0..3).any(|i| x[i] && rows.get(i, j));
                assert_eq!(bit, expect, "v={v} j={j}");
            }
        }
    }

    #[test]
    fn wrong_row_count_rejected() {
        let cols = BooleanMatrix::zeros(6, 1);
        assert!(matches!(
            synth_sop(&cols, &names("x", 3), &names("f", 1), "s_"),
            Err(SopError::RowsNotPowerOfTwo(..))
        ));
    }
}
