//! Compressed sparse row storage.

use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

/// Coordinate-format accumulator. Duplicates are summed in insertion order,
/// which keeps assembly bitwise reproducible.
#[derive(Clone, Debug, Default)]
pub struct Triplets {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i, j, v));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn into_csr(mut self) -> CsrMatrix {
        // stable sort keeps insertion order among duplicates
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        }
    }
}

impl CsrMatrix {
    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut t = Triplets::new(d.len());
        for (i, &v) in d.iter().enumerate() {
            t.push(i, i, v);
        }
        t.into_csr()
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let mut t = Triplets::new(rows.len());
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    t.push(i, j, v);
                }
            }
        }
        t.into_csr()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `max |a_ij - a_ji| / max |a_ij|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// `i j value` lines, 17 significant digits.
    pub fn write_triplets(&self, out: &mut String) {
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let _ = writeln!(out, "{i} {j} {v:.16e}");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut t = Triplets::new(3);
        t.push(2, 0, 1.0);
        t.push(0, 1, 2.0);
        t.push(2, 0, 0.5);
        t.push(1, 1, -1.0);
        let a = t.into_csr();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(2, 0), 1.5);
        assert_eq!(a.get(0, 1), 2.0);
        assert_eq!(a.get(0, 0), 0.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), vec![2.0, -1.0, 1.5]);
    }

    #[test]
    fn asymmetry_measure() {
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        assert_eq!(a.asymmetry(), 0.0);
        let b = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![0.0, 4.0]]);
        assert_eq!(b.asymmetry(), 0.25);
    }

    #[test]
    fn empty_rows() {
        let mut t = Triplets::new(4);
        t.push(3, 3, 1.0);
        let a = t.into_csr();
        assert_eq!(a.row_ptr, vec![0, 0, 0, 0, 1]);
        assert_eq!(a.diagonal(), vec![0.0, 0.0, 0.0, 1.0]);
    }
}
