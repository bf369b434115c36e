//! Dense packed Boolean matrices and bit vectors.
//!
//! Truth tables, factor matrices and corrector matrices are all stored as
//! [`BooleanMatrix`] values: row-major, 64 entries per word. Rows index input
//! assignments, columns index outputs.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimMismatch(usize, usize, usize, usize),
    #[error("matrix text parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("matrix must be non-empty")]
    Empty,
}

/// Packed bit vector. Used for the column/row halves of a rank-one pair.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_indices(len: usize, ones: &[usize]) -> Self {
        let mut b = Bits::zeros(len);
        for &i in ones {
            b.set(i, true);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let w = &mut self.words[i / 64];
        if v {
            *w |= 1 << (i % 64);
        } else {
            *w &= !(1 << (i % 64));
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Dense 0/1 matrix, row-major, bit-packed.
#[derive(Clone, PartialEq, Eq)]
pub struct BooleanMatrix {
    rows: usize,
    cols: usize,
    wpr: usize, // words per row
    bits: Vec<u64>,
}

impl BooleanMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dims must be >= 1");
        let wpr = cols.div_ceil(64);
        BooleanMatrix {
            rows,
            cols,
            wpr,
            bits: vec![0; rows * wpr],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = BooleanMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    /// Rows given as strings of '0'/'1', e.g. `&["110", "011"]`.
    pub fn from_bit_rows(rows: &[&str]) -> Self {
        assert!(!rows.is_empty());
        let cols = rows[0].len();
        BooleanMatrix::from_fn(rows.len(), cols, |r, c| {
            rows[r].as_bytes()[c] == b'1'
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.bits[r * self.wpr + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.bits[r * self.wpr + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.wpr..(r + 1) * self.wpr]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.bits[r * self.wpr..(r + 1) * self.wpr]
    }

    /// Mask with ones in every valid column position of the last word.
    pub fn tail_mask(&self) -> u64 {
        let rem = self.cols % 64;
        if rem == 0 {
            u64::MAX
        } else {
            (1u64 << rem) - 1
        }
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of entries where `self` and `other` differ.
    pub fn hamming(&self, other: &BooleanMatrix) -> Result<usize, MatrixError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MatrixError::DimMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    pub fn xor(&self, other: &BooleanMatrix) -> Result<BooleanMatrix, MatrixError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MatrixError::DimMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let mut out = self.clone();
        for (w, o) in out.bits.iter_mut().zip(&other.bits) {
            *w ^= o;
        }
        Ok(out)
    }

    pub fn column(&self, c: usize) -> Bits {
        let mut b = Bits::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                b.set(r, true);
            }
        }
        b
    }

    pub fn column_popcounts(&self) -> Vec<usize> {
        let mut pops = vec![0usize; self.cols];
        for r in 0..self.rows {
            for (c, pop) in pops.iter_mut().enumerate() {
                if self.get(r, c) {
                    *pop += 1;
                }
            }
        }
        pops
    }

    /// Keep columns in `range`, producing a narrower matrix.
    pub fn select_columns(&self, range: std::ops::Range<usize>) -> BooleanMatrix {
        assert!(range.end <= self.cols && range.start < range.end);
        BooleanMatrix::from_fn(self.rows, range.len(), |r, c| self.get(r, range.start + c))
    }

    /// Text fixture format: first line `rows cols`, then one line of
    /// '0'/'1' characters per row.
    pub fn parse_text(text: &str) -> Result<BooleanMatrix, MatrixError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (lno, header) = lines.next().ok_or(MatrixError::Empty)?;
        let mut parts = header.split_whitespace();
        let parse_dim = |s: Option<&str>| -> Result<usize, MatrixError> {
            s.and_then(|v| v.parse().ok()).ok_or(MatrixError::Parse {
                line: lno + 1,
                msg: "expected header `rows cols`".into(),
            })
        };
        let rows = parse_dim(parts.next())?;
        let cols = parse_dim(parts.next())?;
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Empty);
        }
        let mut m = BooleanMatrix::zeros(rows, cols);
        let mut seen = 0usize;
        for (lno, line) in lines {
            if seen == rows {
                return Err(MatrixError::Parse {
                    line: lno + 1,
                    msg: format!("expected exactly {rows} rows"),
                });
            }
            if line.len() != cols {
                return Err(MatrixError::Parse {
                    line: lno + 1,
                    msg: format!("expected {cols} columns, got {}", line.len()),
                });
            }
            for (c, ch) in line.bytes().enumerate() {
                match ch {
                    b'0' => {}
                    b'1' => m.set(seen, c, true),
                    _ => {
                        return Err(MatrixError::Parse {
                            line: lno + 1,
                            msg: format!("invalid character '{}'", ch as char),
                        })
                    }
                }
            }
            seen += 1;
        }
        if seen != rows {
            return Err(MatrixError::Parse {
                line: 0,
                msg: format!("expected {rows} rows, got {seen}"),
            });
        }
        Ok(m)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                s.push(if self.get(r, c) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }
}

// Debug prints small matrices whole and large ones by shape only.
impl fmt::Debug for BooleanMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows <= 32 && self.cols <= 64 {
            writeln!(f, "BooleanMatrix {}x{}", self.rows, self.cols)?;
            for r in 0..self.rows {
                for c in 0..self.cols {
                    write!(f, "{}", if self.get(r, c) { '1' } else { '0' })?;
                }
                writeln!(f)?;
            }
            Ok(())
        } else {
            write!(f, "BooleanMatrix {}x{}", self.rows, self.cols)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_roundtrip() {
        let mut m = BooleanMatrix::zeros(3, 70);
        m.set(1, 65, true);
        m.set(2, 0, true);
        assert!(m.get(1, 65));
        assert!(!m.get(1, 64));
        assert!(m.get(2, 0));
        assert_eq!(m.count_ones(), 2);
    }

    #[test]
    fn hamming_matches_entrywise() {
        let a = BooleanMatrix::from_bit_rows(&["110", "001"]);
        let b = BooleanMatrix::from_bit_rows(&["100", "011"]);
        let mut expect = 0;
        for r in 0..2 {
            for c in 0..3 {
                if a.get(r, c) != b.get(r, c) {
                    expect += 1;
                }
            }
        }
        assert_eq!(a.hamming(&b).unwrap(), expect);
        assert_eq!(a.hamming(&a).unwrap(), 0);
    }

    #[test]
    fn hamming_dim_mismatch() {
        let a = BooleanMatrix::zeros(2, 3);
        let b = BooleanMatrix::zeros(3, 2);
        assert!(matches!(a.hamming(&b), Err(MatrixError::DimMismatch(..))));
    }

    #[test]
    fn text_roundtrip() {
        let m = BooleanMatrix::from_bit_rows(&["10101", "01010", "11111"]);
        let t = m.to_text();
        let back = BooleanMatrix::parse_text(&t).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn text_rejects_ragged() {
        assert!(BooleanMatrix::parse_text("2 3\n101\n01").is_err());
        assert!(BooleanMatrix::parse_text("2 3\n101\n010\n111").is_err());
        assert!(BooleanMatrix::parse_text("1 3\n1x1").is_err());
    }

    #[test]
    fn select_columns_narrows() {
        let m = BooleanMatrix::from_bit_rows(&["10110", "01011"]);
        let s = m.select_columns(1..4);
        assert_eq!(s.cols(), 3);
        assert_eq!(s.to_text(), "2 3\n011\n101\n");
    }
}
