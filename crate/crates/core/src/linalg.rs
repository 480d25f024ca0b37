//! Dense Cholesky factorization with diagonal jitter escalation.

use crate::error::{Error, Result};

/// Jitter ladder tried in order when the plain factorization hits a
/// non-positive pivot.
pub const JITTER_LADDER: [f64; 6] = [0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10];

/// Lower-triangular factor `L` with `L Lᵀ = A + jitter I`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerFactor {
    n: usize,
    data: Vec<f64>,
    jitter: f64,
}

impl LowerFactor {
    pub fn order(&self) -> usize {
        self.n
    }

    /// Diagonal jitter that was needed for the factorization to succeed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Row `i` up to and including the diagonal.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..i * self.n + i + 1]
    }

    /// `(L Lᵀ)[i][j]`.
    pub fn product_entry(&self, i: usize, j: usize) -> f64 {
        let k = i.min(j);
        self.row(i)[..=k]
            .iter()
            .zip(&self.row(j)[..=k])
            .map(|(a, b)| a * b)
            .sum()
    }

    /// `out = L z`.
    pub fn mul_vec(&self, z: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            *o = self.row(i).iter().zip(z).map(|(a, b)| a * b).sum();
        }
    }
}

/// Factorizes the symmetric matrix given row-major in `a` (only the lower
/// triangle is read), escalating the diagonal jitter along [`JITTER_LADDER`].
pub fn cholesky(a: &[f64], n: usize) -> Result<LowerFactor> {
    assert_eq!(a.len(), n * n, "matrix storage does not match its order");
    let mut min_pivot = f64::INFINITY;
    for &jitter in &JITTER_LADDER {
        match try_cholesky(a, n, jitter) {
            Ok(data) => return Ok(LowerFactor { n, data, jitter }),
            Err(p) => min_pivot = min_pivot.min(p),
        }
    }
    Err(Error::NotPositiveDefinite {
        order: n,
        max_jitter: JITTER_LADDER[JITTER_LADDER.len() - 1],
        min_pivot,
    })
}

fn try_cholesky(a: &[f64], n: usize, jitter: f64) -> std::result::Result<Vec<f64>, f64> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let (ri, rj) = (i * n, j * n);
            let dot: f64 = l[ri..ri + j].iter().zip(&l[rj..rj + j]).map(|(x, y)| x * y).sum();
            if i == j {
                let pivot = a[ri + i] + jitter - dot;
                if !(pivot > 0.0) {
                    return Err(pivot);
                }
                l[ri + i] = pivot.sqrt();
            } else {
                l[ri + j] = (a[ri + j] - dot) / l[rj + j];
            }
        }
    }
    Ok(l)
}
