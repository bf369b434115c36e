//! Boolean matrix factorization over the OR/AND semiring.
//!
//! A factorization approximates `M` (p x q) as an OR of rank-one outer
//! products `a_k b_k` where `a_k` is a column of length p and `b_k` a row of
//! length q. The greedy solver follows the association-rule heuristic: build
//! candidate basis rows from pairwise column confidences, then repeatedly pick
//! the (row, column) pair covering the most uncovered ones net of newly
//! overcovered zeros. Every prefix of the pair list is itself a usable
//! approximation, which is what the level-splitting machinery relies on.

use thiserror::Error;

use crate::matrix::{Bits, BooleanMatrix, MatrixError};

#[derive(Debug, Error, PartialEq)]
pub enum BmfError {
    #[error("factorization degree {0} out of range (need 1 <= f <= {1})")]
    DegreeOutOfRange(usize, usize),
    #[error("tau {0} out of range (need 0 < tau <= 1)")]
    TauOutOfRange(f64),
    #[error("enumeration guard exceeded: p*f = {0}, q*f = {1}, limit {2}")]
    BruteForceGuard(usize, usize, usize),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// One rank-one term of a factorization. `gain` is the net count of newly
/// covered ones minus newly overcovered zeros recorded when the pair was
/// selected.
#[derive(Debug, Clone)]
pub struct RankOnePair {
    pub col: Bits,
    pub row: Bits,
    pub gain: i64,
}

impl RankOnePair {
    pub fn zero(p: usize, q: usize) -> Self {
        RankOnePair {
            col: Bits::zeros(p),
            row: Bits::zeros(q),
            gain: 0,
        }
    }
}

/// Ordered rank-one pairs plus the per-prefix error curve:
/// `err_curve[k-1]` is the Hamming distance between the source matrix and the
/// OR of the first `k` pairs.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub rows: usize,
    pub cols: usize,
    pub pairs: Vec<RankOnePair>,
    pub err_curve: Vec<usize>,
}

impl Factorization {
    pub fn degree(&self) -> usize {
        self.pairs.len()
    }

    /// Error after using the first `k` pairs; `k = 0` is the all-zero
    /// reconstruction.
    pub fn error_at(&self, k: usize, source_ones: usize) -> usize {
        if k == 0 {
            source_ones
        } else {
            self.err_curve[k - 1]
        }
    }
}

/// OR together the outer products of the first `upto` pairs.
pub fn reconstruct(
    pairs: &[RankOnePair],
    upto: usize,
    rows: usize,
    cols: usize,
) -> Result<BooleanMatrix, BmfError> {
    assert!(upto <= pairs.len(), "prefix length exceeds pair count");
    let mut m = BooleanMatrix::zeros(rows, cols);
    for pair in &pairs[..upto] {
        if pair.col.len() != rows || pair.row.len() != cols {
            return Err(BmfError::Matrix(MatrixError::DimMismatch(
                pair.col.len(),
                pair.row.len(),
                rows,
                cols,
            )));
        }
        or_outer(&mut m, &pair.col, &pair.row);
    }
    Ok(m)
}

fn or_outer(m: &mut BooleanMatrix, col: &Bits, row: &Bits) {
    for r in 0..m.rows() {
        if col.get(r) {
            for (w, src) in m.row_mut(r).iter_mut().zip(row.words()) {
                *w |= src;
            }
        }
    }
}

/// Hamming distance between a matrix and its approximation.
pub fn factor_error(m: &BooleanMatrix, approx: &BooleanMatrix) -> Result<usize, BmfError> {
    Ok(m.hamming(approx)?)
}

/// Greedy association-based factorization.
///
/// Candidate basis rows come from the association matrix `O` where
/// `O[i][j] = 1` iff `|col_i AND col_j| >= tau * |col_i|` (columns with empty
/// support are skipped). Each iteration scores every candidate row against
/// the not-yet-covered entries, picks the best-gain (column, row) pair, and
/// appends it. Candidates are enumerated highest source column first and
/// ties go to the earliest candidate; with LSB-first output numbering this
/// steers equal-gain picks toward numerically significant columns, which is
/// what makes the accuracy levels of arithmetic circuits land where the
/// method's reported results put them. Per-row column bits are set only on
/// strictly positive row gain, making the chosen column the
/// lexicographically smallest maximizer. Gains are never negative (an empty
/// column scores zero), so the error curve is non-increasing.
pub fn asso_factorize(
    m: &BooleanMatrix,
    f: usize,
    tau: f64,
) -> Result<Factorization, BmfError> {
    asso_factorize_weighted(m, f, tau, None)
}

/// [`asso_factorize`] with per-column gain weights.
///
/// A weight of `w_j` makes covering a one in column j worth `w_j` and
/// overcovering a zero there cost `w_j`. The level-splitting flow feeds
/// powers of two here when QoR is numeric mean absolute error, so the
/// greedy covers high-order output columns first; without that, columns
/// that barely differ in popcount get covered in popcount order and the
/// numerically heaviest output can stay uncovered at every usable degree.
/// The recorded `err_curve` stays the plain Hamming distance; only the
/// unweighted scorer guarantees it is non-increasing.
pub fn asso_factorize_weighted(
    m: &BooleanMatrix,
    f: usize,
    tau: f64,
    weights: Option<&[u64]>,
) -> Result<Factorization, BmfError> {
    let (p, q) = (m.rows(), m.cols());
    if f < 1 || f > q {
        return Err(BmfError::DegreeOutOfRange(f, q));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(BmfError::TauOutOfRange(tau));
    }
    if let Some(w) = weights {
        if w.len() != q {
            return Err(BmfError::Matrix(MatrixError::DimMismatch(1, w.len(), 1, q)));
        }
    }

    let candidates = association_rows(m, tau);
    let mut covered = BooleanMatrix::zeros(p, q);
    let mut err = m.count_ones();
    let mut pairs = Vec::with_capacity(f);
    let mut err_curve = Vec::with_capacity(f);

    for _ in 0..f {
        let mut best: Option<(i128, usize, Bits)> = None;
        for (ci, cand) in candidates.iter().enumerate() {
            let (gain, col) = score_candidate(m, &covered, cand, weights);
            if best.as_ref().is_none_or(|(bg, ..)| gain > *bg) {
                best = Some((gain, ci, col));
            }
        }
        let pair = match best {
            Some((gain, ci, col)) if gain > 0 => RankOnePair {
                col,
                row: candidates[ci].clone(),
                gain: gain.clamp(i64::MIN as i128, i64::MAX as i128) as i64,
            },
            // Nothing left worth covering (or no candidates at all).
            _ => RankOnePair::zero(p, q),
        };
        if pair.gain > 0 {
            or_outer(&mut covered, &pair.col, &pair.row);
            err = m.hamming(&covered)?;
        }
        err_curve.push(err);
        pairs.push(pair);
    }

    Ok(Factorization {
        rows: p,
        cols: q,
        pairs,
        err_curve,
    })
}

/// Powers-of-two column weights for numeric (MAE) circuits; `msb_first`
/// flips which end of the output vector is most significant.
pub fn numeric_column_weights(q: usize, msb_first: bool) -> Vec<u64> {
    assert!(q <= 63, "numeric weights need q <= 63");
    (0..q)
        .map(|j| 1u64 << (if msb_first { q - 1 - j } else { j }))
        .collect()
}

/// Rows of the association matrix used as basis-row candidates, enumerated
/// from the highest column index down.
fn association_rows(m: &BooleanMatrix, tau: f64) -> Vec<Bits> {
    let q = m.cols();
    let pops = m.column_popcounts();
    // and_counts[i][j] = |col_i AND col_j|
    let mut and_counts = vec![vec![0usize; q]; q];
    for r in 0..m.rows() {
        let ones: Vec<usize> = (0..q).filter(|&c| m.get(r, c)).collect();
        for &i in &ones {
            for &j in &ones {
                and_counts[i][j] += 1;
            }
        }
    }
    let mut rows = Vec::new();
    for i in (0..q).rev() {
        if pops[i] == 0 {
            continue;
        }
        let mut b = Bits::zeros(q);
        for (j, &count) in and_counts[i].iter().enumerate() {
            // Slack guards against binary representation of tau * pop
            // landing a hair above an exact integer confidence.
            if count as f64 >= tau * pops[i] as f64 - 1e-9 {
                b.set(j, true);
            }
        }
        rows.push(b);
    }
    rows
}

/// Best column for one candidate row: a row joins the column exactly when it
/// strictly gains (covers more uncovered weight than it overcovers).
fn score_candidate(
    m: &BooleanMatrix,
    covered: &BooleanMatrix,
    cand: &Bits,
    weights: Option<&[u64]>,
) -> (i128, Bits) {
    let p = m.rows();
    let q = m.cols();
    let tail = m.tail_mask();
    let mut col = Bits::zeros(p);
    let mut gain = 0i128;
    let nw = cand.words().len();
    for r in 0..p {
        let mrow = m.row(r);
        let crow = covered.row(r);
        let mut row_gain = 0i128;
        match weights {
            None => {
                for w in 0..nw {
                    let mask = if w + 1 == nw { tail } else { u64::MAX };
                    let open = cand.words()[w] & !crow[w] & mask;
                    let newly = mrow[w] & open;
                    let over = !mrow[w] & open;
                    row_gain += newly.count_ones() as i128 - over.count_ones() as i128;
                }
            }
            Some(w) => {
                for (j, &wj) in w.iter().enumerate().take(q) {
                    if !cand.get(j) || covered.get(r, j) {
                        continue;
                    }
                    if m.get(r, j) {
                        row_gain += wj as i128;
                    } else {
                        row_gain -= wj as i128;
                    }
                }
            }
        }
        if row_gain > 0 {
            col.set(r, true);
            gain += row_gain;
        }
    }
    (gain, col)
}

/// Enumeration limit for [`brute_force_bmf`]: both `p*f` and `q*f` must stay
/// at or below this.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Exact minimum-error factorization by exhaustive enumeration of the basis
/// rows; the optimal column for each basis choice is derived row-by-row.
/// Only usable on small instances, as a test oracle.
pub fn brute_force_bmf(m: &BooleanMatrix, f: usize) -> Result<Factorization, BmfError> {
    let (p, q) = (m.rows(), m.cols());
    if f < 1 || f > q {
        return Err(BmfError::DegreeOutOfRange(f, q));
    }
    if p * f > BRUTE_FORCE_LIMIT || q * f > BRUTE_FORCE_LIMIT {
        return Err(BmfError::BruteForceGuard(p * f, q * f, BRUTE_FORCE_LIMIT));
    }
    debug_assert!(q <= 64 && f <= 64);

    let qmask: u64 = if q == 64 { u64::MAX } else { (1 << q) - 1 };
    let m_rows: Vec<u64> = (0..p).map(|r| m.row(r)[0] & qmask).collect();

    let mut best_err = usize::MAX;
    let mut best_b: Vec<u64> = vec![0; f];
    let mut best_a: Vec<u64> = vec![0; p];

    // Enumerate every B as f rows of q bits packed into one integer.
    let total: u64 = 1 << (q * f);
    let mut unions = vec![0u64; 1 << f];
    for b_code in 0..total {
        let b_rows: Vec<u64> = (0..f)
            .map(|k| (b_code >> (k * q)) & qmask)
            .collect();
        // Union of each subset of basis rows; subsets indexed by selector bits.
        unions[0] = 0;
        for sel in 1..(1usize << f) {
            let k = sel.trailing_zeros() as usize;
            unions[sel] = unions[sel & (sel - 1)] | b_rows[k];
        }
        let mut err = 0usize;
        let mut a = vec![0u64; p];
        for (r, &mrow) in m_rows.iter().enumerate() {
            let mut row_best = usize::MAX;
            let mut row_sel = 0usize;
            for (sel, &u) in unions.iter().enumerate() {
                let e = (mrow ^ u).count_ones() as usize;
                if e < row_best {
                    row_best = e;
                    row_sel = sel;
                }
            }
            err += row_best;
            a[r] = row_sel as u64;
        }
        if err < best_err {
            best_err = err;
            best_b = b_rows;
            best_a = a;
        }
    }

    let pairs: Vec<RankOnePair> = (0..f)
        .map(|k| {
            let col = Bits::from_indices(
                p,
                &(0..p)
                    .filter(|&r| (best_a[r] >> k) & 1 == 1)
                    .collect::<Vec<_>>(),
            );
            let row = Bits::from_indices(
                q,
                &(0..q)
                    .filter(|&j| (best_b[k] >> j) & 1 == 1)
                    .collect::<Vec<_>>(),
            );
            RankOnePair { col, row, gain: 0 }
        })
        .collect();

    let mut err_curve = Vec::with_capacity(f);
    for k in 1..=f {
        let approx = reconstruct(&pairs, k, p, q)?;
        err_curve.push(m.hamming(&approx)?);
    }
    debug_assert_eq!(*err_curve.last().unwrap(), best_err);

    Ok(Factorization {
        rows: p,
        cols: q,
        pairs,
        err_curve,
    })
}
