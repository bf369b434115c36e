//! Quality-of-result metrics between a golden circuit and an approximation,
//! on netlists (by simulation) and on truth-table matrices.
//!
//! MAE treats the output vector as an unsigned integer (LSB = outputs[0]
//! unless `msb_first`) and averages `|R - R'| / 2^m`. NHD averages the
//! fraction of differing output bits per vector. Evaluation is exhaustive up
//! to `exhaustive_cap` inputs, seeded uniform sampling beyond that.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::matrix::BooleanMatrix;
use crate::netlist::{fill_counting_words, Circuit, Evaluator, NetlistError};

#[derive(Debug, Error)]
pub enum QorError {
    #[error("output width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("input count mismatch: {0} vs {1}")]
    InputMismatch(usize, usize),
    #[error("MAE needs at most 63 outputs, circuit has {0}")]
    MaeTooWide(usize),
    #[error("matrix dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimMismatch(usize, usize, usize, usize),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Mae,
    Nhd,
}

impl std::str::FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mae" => Ok(Metric::Mae),
            "nhd" => Ok(Metric::Nhd),
            other => Err(format!("unknown metric `{other}` (expected mae or nhd)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct QorConfig {
    pub metric: Metric,
    /// Exhaustive evaluation up to this many inputs, sampling beyond.
    pub exhaustive_cap: usize,
    pub samples: usize,
    pub seed: u64,
    /// Read output words MSB-first when converting to numbers for MAE.
    pub msb_first: bool,
}

impl Default for QorConfig {
    fn default() -> Self {
        QorConfig {
            metric: Metric::Mae,
            exhaustive_cap: 14,
            samples: 4096,
            seed: 1,
            msb_first: false,
        }
    }
}

/// Measured error plus the evidence that produced it.
#[derive(Debug, Clone, Copy)]
pub struct QorStats {
    pub value: f64,
    /// Vectors with at least one differing output bit.
    pub mismatches: usize,
    pub vectors: usize,
    pub exhaustive: bool,
}

/// Compare two circuits under the configured metric.
pub fn qor(golden: &Circuit, approx: &Circuit, cfg: &QorConfig) -> Result<QorStats, QorError> {
    let n = golden.num_inputs();
    let m = golden.num_outputs();
    if approx.num_inputs() != n {
        return Err(QorError::InputMismatch(n, approx.num_inputs()));
    }
    if approx.num_outputs() != m {
        return Err(QorError::WidthMismatch(m, approx.num_outputs()));
    }
    if cfg.metric == Metric::Mae && m > 63 {
        return Err(QorError::MaeTooWide(m));
    }
    let ev_g = Evaluator::new(golden)?;
    let ev_a = Evaluator::new(approx)?;

    let exhaustive = n <= cfg.exhaustive_cap;
    let vectors = if exhaustive {
        1usize << n
    } else {
        cfg.samples.max(1)
    };
    let blocks = vectors.div_ceil(64);

    // Pre-draw sampled input words so parallel evaluation stays deterministic.
    let sample_words: Vec<Vec<u64>> = if exhaustive {
        Vec::new()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        (0..blocks)
            .map(|_| (0..n).map(|_| rng.gen::<u64>()).collect())
            .collect()
    };

    let per_block = |b: usize| -> (f64, usize) {
        let mut in_words = vec![0u64; n];
        if exhaustive {
            fill_counting_words(&mut in_words, b);
        } else {
            in_words.copy_from_slice(&sample_words[b]);
        }
        let mut nets_g = vec![0u64; ev_g.num_nets()];
        let mut nets_a = vec![0u64; ev_a.num_nets()];
        let out_g = ev_g.eval_outputs(&in_words, &mut nets_g);
        let out_a = ev_a.eval_outputs(&in_words, &mut nets_a);
        let lanes = (vectors - b * 64).min(64);
        let lane_mask: u64 = if lanes == 64 {
            u64::MAX
        } else {
            (1u64 << lanes) - 1
        };
        let mut err_sum = 0.0f64;
        let mut mismatches = 0usize;
        match cfg.metric {
            Metric::Nhd => {
                let mut any = 0u64;
                let mut diff_bits = 0usize;
                for j in 0..m {
                    let d = (out_g[j] ^ out_a[j]) & lane_mask;
                    any |= d;
                    diff_bits += d.count_ones() as usize;
                }
                mismatches = any.count_ones() as usize;
                err_sum = diff_bits as f64 / m as f64;
            }
            Metric::Mae => {
                let denom = (1u64 << m) as f64;
                for lane in 0..lanes {
                    let mut r = 0u64;
                    let mut rp = 0u64;
                    for j in 0..m {
                        let pos = if cfg.msb_first { m - 1 - j } else { j };
                        r |= ((out_g[j] >> lane) & 1) << pos;
                        rp |= ((out_a[j] >> lane) & 1) << pos;
                    }
                    if r != rp {
                        mismatches += 1;
                    }
                    err_sum += r.abs_diff(rp) as f64 / denom;
                }
            }
        }
        (err_sum, mismatches)
    };

    // Order the partial sums by block before reducing so the floating-point
    // result does not depend on thread scheduling.
    let partials: Vec<(f64, usize)> = if blocks >= 8 {
        (0..blocks).into_par_iter().map(per_block).collect()
    } else {
        (0..blocks).map(per_block).collect()
    };
    let (err_sum, mismatches) = partials
        .into_iter()
        .fold((0.0, 0usize), |(e, mm), (pe, pm)| (e + pe, mm + pm));

    Ok(QorStats {
        value: err_sum / vectors as f64,
        mismatches,
        vectors,
        exhaustive,
    })
}

pub fn mae(golden: &Circuit, approx: &Circuit, cfg: &QorConfig) -> Result<f64, QorError> {
    let cfg = QorConfig {
        metric: Metric::Mae,
        ..cfg.clone()
    };
    Ok(qor(golden, approx, &cfg)?.value)
}

pub fn nhd(golden: &Circuit, approx: &Circuit, cfg: &QorConfig) -> Result<f64, QorError> {
    let cfg = QorConfig {
        metric: Metric::Nhd,
        ..cfg.clone()
    };
    Ok(qor(golden, approx, &cfg)?.value)
}

/// Metric over full truth-table matrices (row = one input assignment).
pub fn matrix_qor(
    m: &BooleanMatrix,
    approx: &BooleanMatrix,
    metric: Metric,
) -> Result<f64, QorError> {
    matrix_qor_opts(m, approx, metric, false)
}

pub fn matrix_qor_opts(
    m: &BooleanMatrix,
    approx: &BooleanMatrix,
    metric: Metric,
    msb_first: bool,
) -> Result<f64, QorError> {
    if m.rows() != approx.rows() || m.cols() != approx.cols() {
        return Err(QorError::DimMismatch(
            m.rows(),
            m.cols(),
            approx.rows(),
            approx.cols(),
        ));
    }
    let q = m.cols();
    match metric {
        Metric::Nhd => {
            let diff = m.hamming(approx).expect("dims checked");
            Ok(diff as f64 / (m.rows() * q) as f64)
        }
        Metric::Mae => {
            if q > 63 {
                return Err(QorError::MaeTooWide(q));
            }
            let denom = (1u64 << q) as f64;
            let mut sum = 0.0f64;
            for r in 0..m.rows() {
                let mut a = 0u64;
                let mut b = 0u64;
                for j in 0..q {
                    let pos = if msb_first { q - 1 - j } else { j };
                    a |= (m.get(r, j) as u64) << pos;
                    b |= (approx.get(r, j) as u64) << pos;
                }
                sum += a.abs_diff(b) as f64 / denom;
            }
            Ok(sum / m.rows() as f64)
        }
    }
}
