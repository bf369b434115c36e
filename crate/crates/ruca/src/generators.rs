//! Generators for the benchmark-style circuits used across tests and
//! examples: ripple-carry adders, schoolbook multipliers, the classic c17
//! netlist, and seeded random DAGs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::netlist::{Circuit, Gate, GateKind};

/// `bits`-bit ripple-carry adder built from 2-input gates.
/// Inputs `a0..a<bits-1>, b0..`, outputs `s0..s<bits-1>, cout`.
pub fn ripple_adder(bits: usize) -> Circuit {
    assert!(bits >= 1);
    let mut inputs = Vec::new();
    for i in 0..bits {
        inputs.push(format!("a{i}"));
    }
    for i in 0..bits {
        inputs.push(format!("b{i}"));
    }
    let mut gates = Vec::new();
    let mut carry: Option<String> = None;
    let mut outputs = Vec::new();
    for i in 0..bits {
        let a = format!("a{i}");
        let b = format!("b{i}");
        let axb = format!("axb{i}");
        gates.push(Gate::new(&axb, GateKind::Xor, vec![a.clone(), b.clone()]));
        let s = format!("s{i}");
        match &carry {
            None => {
                gates.push(Gate::new(&s, GateKind::Buf, vec![axb.clone()]));
                let c = format!("c{i}");
                gates.push(Gate::new(&c, GateKind::And, vec![a, b]));
                carry = Some(c);
            }
            Some(cin) => {
                gates.push(Gate::new(&s, GateKind::Xor, vec![axb.clone(), cin.clone()]));
                let t1 = format!("t1_{i}");
                let t2 = format!("t2_{i}");
                gates.push(Gate::new(&t1, GateKind::And, vec![a, b]));
                gates.push(Gate::new(&t2, GateKind::And, vec![axb, cin.clone()]));
                let c = format!("c{i}");
                gates.push(Gate::new(&c, GateKind::Or, vec![t1, t2]));
                carry = Some(c);
            }
        }
        outputs.push(s);
    }
    outputs.push(carry.expect("bits >= 1"));
    let n = outputs.len();
    let cout = outputs[n - 1].clone();
    outputs[n - 1] = "cout".into();
    gates.push(Gate::new("cout", GateKind::Buf, vec![cout]));
    Circuit::new(format!("adder{bits}"), inputs, outputs, gates).expect("adder is well-formed")
}

/// `bits` x `bits` unsigned schoolbook multiplier; outputs `p0..p<2*bits-1>`.
pub fn array_multiplier(bits: usize) -> Circuit {
    assert!(bits >= 1);
    let mut inputs = Vec::new();
    for i in 0..bits {
        inputs.push(format!("a{i}"));
    }
    for i in 0..bits {
        inputs.push(format!("b{i}"));
    }
    let mut gates = Vec::new();
    // Partial products.
    let mut pp = vec![vec![String::new(); bits]; bits];
    for (i, row) in pp.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let net = format!("pp_{i}_{j}");
            gates.push(Gate::new(
                &net,
                GateKind::And,
                vec![format!("a{j}"), format!("b{i}")],
            ));
            *cell = net;
        }
    }
    // Ripple rows: acc holds the running sum, shifted one position per row.
    let mut acc: Vec<String> = pp[0].clone();
    let mut outputs = vec![acc[0].clone()];
    let mut fresh = 0usize;
    let mut new_net = |gates: &mut Vec<Gate>, kind, fanins: Vec<String>| {
        fresh += 1;
        let net = format!("m{fresh}");
        gates.push(Gate::new(&net, kind, fanins));
        net
    };
    #[allow(clippy::needless_range_loop)]
    for i in 1..bits {
        let mut carry: Option<String> = None;
        let mut next_acc = Vec::new();
        for j in 0..bits {
            // Add pp[i][j] to acc[j+1] (acc shifted), with carry chain.
            let addend = if j + 1 < acc.len() {
                Some(acc[j + 1].clone())
            } else {
                None
            };
            let p = pp[i][j].clone();
            let (sum, cout) = match (addend, carry.take()) {
                (Some(x), Some(cin)) => {
                    let axb = new_net(&mut gates, GateKind::Xor, vec![x.clone(), p.clone()]);
                    let s = new_net(&mut gates, GateKind::Xor, vec![axb.clone(), cin.clone()]);
                    let t1 = new_net(&mut gates, GateKind::And, vec![x, p]);
                    let t2 = new_net(&mut gates, GateKind::And, vec![axb, cin]);
                    let c = new_net(&mut gates, GateKind::Or, vec![t1, t2]);
                    (s, Some(c))
                }
                (Some(x), None) => {
                    let s = new_net(&mut gates, GateKind::Xor, vec![x.clone(), p.clone()]);
                    let c = new_net(&mut gates, GateKind::And, vec![x, p]);
                    (s, Some(c))
                }
                (None, Some(cin)) => {
                    let s = new_net(&mut gates, GateKind::Xor, vec![p.clone(), cin.clone()]);
                    let c = new_net(&mut gates, GateKind::And, vec![p, cin]);
                    (s, Some(c))
                }
                (None, None) => (p, None),
            };
            next_acc.push(sum);
            carry = cout;
        }
        next_acc.push(carry.expect("multiplier rows always carry"));
        outputs.push(next_acc[0].clone());
        acc = next_acc;
    }
    outputs.extend(acc.into_iter().skip(1));
    // Rename outputs to stable port names via buffers.
    let mut final_outputs = Vec::new();
    for (k, src) in outputs.iter().enumerate() {
        let port = format!("p{k}");
        gates.push(Gate::new(&port, GateKind::Buf, vec![src.clone()]));
        final_outputs.push(port);
    }
    Circuit::new(format!("mult{bits}"), inputs, final_outputs, gates)
        .expect("multiplier is well-formed")
}

/// The classic c17 benchmark: 5 inputs, 2 outputs, 6 NAND gates.
pub fn c17() -> Circuit {
    parse_c17().expect("embedded c17 is well-formed")
}

fn parse_c17() -> Result<Circuit, crate::netlist::NetlistError> {
    crate::netlist::parse_bench_named(C17_BENCH, "c17")
}

pub const C17_BENCH: &str = "\
# c17
INPUT(G1)
INPUT(G2)
INPUT(G3)
INPUT(G6)
INPUT(G7)
OUTPUT(G22)
OUTPUT(G23)
G10 = NAND(G1, G3)
G11 = NAND(G3, G6)
G16 = NAND(G2, G11)
G19 = NAND(G11, G7)
G22 = NAND(G10, G16)
G23 = NAND(G16, G19)
";

/// Bitwise |a - b| over two `bits`-wide unsigned operands.
pub fn abs_diff(bits: usize) -> Circuit {
    assert!(bits >= 1);
    let mut inputs = Vec::new();
    for i in 0..bits {
        inputs.push(format!("a{i}"));
    }
    for i in 0..bits {
        inputs.push(format!("b{i}"));
    }
    let mut gates = Vec::new();
    // d = a - b (two's complement), borrow chain.
    let mut diff = Vec::new();
    let mut borrow: Option<String> = None;
    for i in 0..bits {
        let a = format!("a{i}");
        let b = format!("b{i}");
        let axb = format!("d_axb{i}");
        gates.push(Gate::new(&axb, GateKind::Xor, vec![a.clone(), b.clone()]));
        let (d, next_borrow) = match &borrow {
            None => {
                let na = format!("d_na{i}");
                gates.push(Gate::new(&na, GateKind::Not, vec![a.clone()]));
                let bo = format!("d_bo{i}");
                gates.push(Gate::new(&bo, GateKind::And, vec![na, b.clone()]));
                (axb.clone(), bo)
            }
            Some(bin) => {
                let d = format!("d{i}");
                gates.push(Gate::new(&d, GateKind::Xor, vec![axb.clone(), bin.clone()]));
                let nx = format!("d_nx{i}");
                gates.push(Gate::new(&nx, GateKind::Not, vec![axb.clone()]));
                let t1 = format!("d_t1_{i}");
                gates.push(Gate::new(&t1, GateKind::And, vec![nx, bin.clone()]));
                let na = format!("d_na{i}");
                gates.push(Gate::new(&na, GateKind::Not, vec![a.clone()]));
                let t2 = format!("d_t2_{i}");
                gates.push(Gate::new(&t2, GateKind::And, vec![na, b.clone()]));
                let bo = format!("d_bo{i}");
                gates.push(Gate::new(&bo, GateKind::Or, vec![t1, t2]));
                (d, bo)
            }
        };
        diff.push(d);
        borrow = Some(next_borrow);
    }
    let sign = borrow.expect("bits >= 1"); // 1 when a < b
    // Conditionally negate: |a-b| = sign ? (~d + 1) : d.
    let mut outputs = Vec::new();
    let mut carry: Option<String> = None;
    for (i, d) in diff.iter().enumerate() {
        let nd = format!("n_d{i}");
        gates.push(Gate::new(&nd, GateKind::Xor, vec![d.clone(), sign.clone()]));
        // Add `sign` as +1 via carry chain.
        let (s, next_carry) = match &carry {
            None => {
                let s = format!("o{i}");
                gates.push(Gate::new(&s, GateKind::Xor, vec![nd.clone(), sign.clone()]));
                let c = format!("n_c{i}");
                gates.push(Gate::new(&c, GateKind::And, vec![nd, sign.clone()]));
                (s, c)
            }
            Some(cin) => {
                let s = format!("o{i}");
                gates.push(Gate::new(&s, GateKind::Xor, vec![nd.clone(), cin.clone()]));
                let c = format!("n_c{i}");
                gates.push(Gate::new(&c, GateKind::And, vec![nd, cin.clone()]));
                (s, c)
            }
        };
        outputs.push(s);
        carry = Some(next_carry);
    }
    Circuit::new(format!("absdiff{bits}"), inputs, outputs, gates)
        .expect("abs_diff is well-formed")
}

/// Unsigned max of two `bits`-wide operands.
pub fn max_unit(bits: usize) -> Circuit {
    assert!(bits >= 1);
    let mut inputs = Vec::new();
    for i in 0..bits {
        inputs.push(format!("a{i}"));
    }
    for i in 0..bits {
        inputs.push(format!("b{i}"));
    }
    let mut gates = Vec::new();
    // a >= b comparator folded LSB to MSB: ge_i = gt_i | (eq_i & ge_{i-1}).
    let mut ge: Option<String> = None;
    for i in 0..bits {
        let a = format!("a{i}");
        let b = format!("b{i}");
        let eq = format!("eq{i}");
        gates.push(Gate::new(&eq, GateKind::Xnor, vec![a.clone(), b.clone()]));
        let gt = format!("gt{i}");
        let nb = format!("nb{i}");
        gates.push(Gate::new(&nb, GateKind::Not, vec![b.clone()]));
        gates.push(Gate::new(&gt, GateKind::And, vec![a.clone(), nb]));
        ge = Some(match ge {
            None => {
                let g = format!("ge{i}");
                gates.push(Gate::new(&g, GateKind::Or, vec![gt, eq]));
                g
            }
            Some(prev) => {
                let t = format!("ge_t{i}");
                gates.push(Gate::new(&t, GateKind::And, vec![eq, prev]));
                let g = format!("ge{i}");
                gates.push(Gate::new(&g, GateKind::Or, vec![gt, t]));
                g
            }
        });
    }
    let sel = ge.expect("bits >= 1");
    let mut outputs = Vec::new();
    for i in 0..bits {
        let o = format!("m{i}");
        gates.push(Gate::new(
            &o,
            GateKind::Mux,
            vec![sel.clone(), format!("a{i}"), format!("b{i}")],
        ));
        outputs.push(o);
    }
    Circuit::new(format!("max{bits}"), inputs, outputs, gates).expect("max is well-formed")
}

/// Seeded random layered DAG over 2-input gates. Every gate is reachable
/// from the inputs; outputs sample the deepest nets first.
pub fn random_circuit(seed: u64, n_inputs: usize, n_outputs: usize, n_gates: usize) -> Circuit {
    assert!(n_inputs >= 2 && n_outputs >= 1 && n_gates >= n_outputs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = [
        GateKind::And,
        GateKind::Or,
        GateKind::Nand,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Xnor,
    ];
    let inputs: Vec<String> = (0..n_inputs).map(|i| format!("x{i}")).collect();
    let mut nets: Vec<String> = inputs.clone();
    let mut gates = Vec::new();
    for g in 0..n_gates {
        let kind = kinds[rng.gen_range(0..kinds.len())];
        let a = nets[rng.gen_range(0..nets.len())].clone();
        let b = nets[rng.gen_range(0..nets.len())].clone();
        let net = format!("g{g}");
        gates.push(Gate::new(&net, kind, vec![a, b]));
        nets.push(net);
    }
    let outputs: Vec<String> = (0..n_outputs)
        .map(|k| format!("g{}", n_gates - 1 - k))
        .collect();
    Circuit::new(format!("rand{seed}"), inputs, outputs, gates)
        .expect("random circuit is well-formed")
}

/// Odd-parity tree over `n` inputs, one output.
pub fn parity(n: usize) -> Circuit {
    assert!(n >= 2);
    let inputs: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut gates = Vec::new();
    let mut acc = inputs[0].clone();
    for (i, x) in inputs.iter().enumerate().skip(1) {
        let net = format!("p{i}");
        gates.push(Gate::new(&net, GateKind::Xor, vec![acc.clone(), x.clone()]));
        acc = net;
    }
    Circuit::new(format!("parity{n}"), inputs, vec![acc], gates)
        .expect("parity is well-formed")
}

/// Majority vote over `n` (odd) inputs plus an AND and OR summary bit;
/// three outputs so truth tables stay factorizable.
pub fn vote3(n: usize) -> Circuit {
    assert!(n >= 3 && n % 2 == 1);
    let inputs: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut gates = Vec::new();
    // Popcount threshold via adder chain would be big; for small n just
    // OR over all majority subsets of size (n+1)/2.
    let k = n.div_ceil(2);
    let mut terms = Vec::new();
    let mut subset = vec![0usize; k];
    fn rec(
        start: usize,
        depth: usize,
        k: usize,
        n: usize,
        subset: &mut Vec<usize>,
        gates: &mut Vec<Gate>,
        terms: &mut Vec<String>,
    ) {
        if depth == k {
            let net = format!("t{}", terms.len());
            let fanins = subset.iter().map(|&i| format!("x{i}")).collect();
            gates.push(Gate::new(&net, GateKind::And, fanins));
            terms.push(net);
            return;
        }
        for i in start..n {
            subset[depth] = i;
            rec(i + 1, depth + 1, k, n, subset, gates, terms);
        }
    }
    rec(0, 0, k, n, &mut subset, &mut gates, &mut terms);
    gates.push(Gate::new("maj", GateKind::Or, terms));
    gates.push(Gate::new(
        "all",
        GateKind::And,
        inputs.clone(),
    ));
    gates.push(Gate::new("any", GateKind::Or, inputs.clone()));
    Circuit::new(
        format!("vote{n}"),
        inputs,
        vec!["maj".into(), "any".into(), "all".into()],
        gates,
    )
    .expect("vote is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::simulate;

    fn to_bits(mut v: u64, n: usize) -> Vec<bool> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(v & 1 == 1);
            v >>= 1;
        }
        out
    }

    fn from_bits(bits: &[bool]) -> u64 {
        bits.iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | ((b as u64) << i))
    }

    #[test]
    fn adder_adds() {
        let c = ripple_adder(4);
        for a in 0..16u64 {
            for b in 0..16u64 {
                let mut x = to_bits(a, 4);
                x.extend(to_bits(b, 4));
                let y = simulate(&c, &x).unwrap();
                assert_eq!(from_bits(&y), a + b, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn adder_overflow_carry() {
        let c = ripple_adder(4);
        let mut x = to_bits(0b1111, 4);
        x.extend(to_bits(0b0001, 4));
        let y = simulate(&c, &x).unwrap();
        assert_eq!(from_bits(&y[..4]), 0);
        assert!(y[4], "carry out must be set");
    }

    #[test]
    fn multiplier_multiplies() {
        let c = array_multiplier(3);
        for a in 0..8u64 {
            for b in 0..8u64 {
                let mut x = to_bits(a, 3);
                x.extend(to_bits(b, 3));
                let y = simulate(&c, &x).unwrap();
                assert_eq!(from_bits(&y), a * b, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn abs_diff_is_absolute_difference() {
        let c = abs_diff(3);
        for a in 0..8u64 {
            for b in 0..8u64 {
                let mut x = to_bits(a, 3);
                x.extend(to_bits(b, 3));
                let y = simulate(&c, &x).unwrap();
                assert_eq!(from_bits(&y), a.abs_diff(b), "a={a} b={b}");
            }
        }
    }

    #[test]
    fn max_picks_larger() {
        let c = max_unit(3);
        for a in 0..8u64 {
            for b in 0..8u64 {
                let mut x = to_bits(a, 3);
                x.extend(to_bits(b, 3));
                let y = simulate(&c, &x).unwrap();
                assert_eq!(from_bits(&y), a.max(b), "a={a} b={b}");
            }
        }
    }

    #[test]
    fn c17_matches_reference_vectors() {
        let c = c17();
        // G22 = NAND(G10, G16), spot-check a few rows against hand eval.
        let y = simulate(&c, &[false, false, false, false, false]).unwrap();
        assert_eq!(y, vec![false, false]);
        let y = simulate(&c, &[true, true, true, true, true]).unwrap();
        assert_eq!(y, vec![true, false]);
    }

    #[test]
    fn vote_majority() {
        let c = vote3(3);
        let y = simulate(&c, &[true, true, false]).unwrap();
        assert_eq!(y, vec![true, true, false]); // maj, any, all
        let y = simulate(&c, &[false, false, true]).unwrap();
        assert_eq!(y, vec![false, true, false]);
    }

    #[test]
    fn random_circuit_is_deterministic() {
        let a = random_circuit(5, 6, 3, 20);
        let b = random_circuit(5, 6, 3, 20);
        assert_eq!(a, b);
    }
}
