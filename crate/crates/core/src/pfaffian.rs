//! Dense complex antisymmetric matrices and their Pfaffians.
//!
//! The production routine is a pivoted Parlett-Reid reduction to skew
//! tridiagonal form (O(n³)). A matching-sum reference is kept alongside for
//! small matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute antisymmetry tolerance, scaled by `max(1, max |a_ij|)`.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;

/// Largest dimension accepted by [`pfaffian_bruteforce`].
pub const BRUTEFORCE_MAX: usize = 10;

/// Row-major complex matrix with `a[i][j] = -a[j][i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymmetricMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl AntisymmetricMatrix {
    /// Validates antisymmetry and projects out the residual symmetric part,
    /// `A <- (A - Aᵀ) / 2`, so the stored matrix is exactly antisymmetric.
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Shape {
                expected: n * n,
                got: entries.len(),
            });
        }
        let scale = entries.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        let tol = ANTISYMMETRY_TOL * scale;
        let mut a = entries;
        for i in 0..n {
            let d = a[i * n + i].norm();
            if d > tol {
                return Err(Error::NotAntisymmetric {
                    row: i,
                    col: i,
                    violation: d,
                });
            }
            a[i * n + i] = Complex64::new(0.0, 0.0);
            for j in (i + 1)..n {
                let upper = a[i * n + j];
                let lower = a[j * n + i];
                let violation = (upper + lower).norm();
                if violation > tol {
                    return Err(Error::NotAntisymmetric {
                        row: i,
                        col: j,
                        violation,
                    });
                }
                let v = (upper - lower) * 0.5;
                a[i * n + j] = v;
                a[j * n + i] = -v;
            }
        }
        Ok(Self { n, entries: a })
    }

    /// Builds the matrix from its strict upper triangle, `upper(i, j)` for `i < j`.
    pub fn from_upper(n: usize, mut upper: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = upper(i, j);
                entries[i * n + j] = v;
                entries[j * n + i] = -v;
            }
        }
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }
}

/// Pfaffian by pivoted skew-symmetric Parlett-Reid elimination.
///
/// `Pf` of the empty matrix is 1 and of any odd-dimensional matrix is 0.
pub fn pfaffian(a: &AntisymmetricMatrix) -> Complex64 {
    let n = a.n;
    if n % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let mut m = a.entries.clone();
    let mut pf = Complex64::new(1.0, 0.0);

    for k in (0..n.saturating_sub(1)).step_by(2) {
        // largest entry below the sub-diagonal in column k
        let mut kp = k + 1;
        let mut best = m[(k + 1) * n + k].norm();
        for r in (k + 2)..n {
            let v = m[r * n + k].norm();
            if v > best {
                best = v;
                kp = r;
            }
        }
        if kp != k + 1 {
            for c in 0..n {
                m.swap((k + 1) * n + c, kp * n + c);
            }
            for r in 0..n {
                m.swap(r * n + k + 1, r * n + kp);
            }
            pf = -pf;
        }

        let pivot = m[k * n + k + 1];
        if pivot == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        pf *= pivot;

        if k + 2 < n {
            let tau: Vec<Complex64> = ((k + 2)..n).map(|c| m[k * n + c] / pivot).collect();
            let col: Vec<Complex64> = ((k + 2)..n).map(|r| m[r * n + k + 1]).collect();
            let w = n - k - 2;
            for i in 0..w {
                let row = (k + 2 + i) * n + k + 2;
                for j in 0..w {
                    m[row + j] += tau[i] * col[j] - col[i] * tau[j];
                }
            }
        }
    }
    pf
}

/// Signed sum over perfect matchings, by expansion along the first row.
pub fn pfaffian_bruteforce(a: &AntisymmetricMatrix) -> Result<Complex64> {
    if a.n > BRUTEFORCE_MAX {
        return Err(Error::TooLarge {
            n: a.n,
            max: BRUTEFORCE_MAX,
        });
    }
    if a.n % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let idx: Vec<usize> = (0..a.n).collect();
    Ok(matching_sum(a, &idx))
}

fn matching_sum(a: &AntisymmetricMatrix, idx: &[usize]) -> Complex64 {
    if idx.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    let first = idx[0];
    let mut total = Complex64::new(0.0, 0.0);
    for (pos, &partner) in idx.iter().enumerate().skip(1) {
        let rest: Vec<usize> = idx[1..]
            .iter()
            .copied()
            .filter(|&x| x != partner)
            .collect();
        let sign = if pos % 2 == 1 { 1.0 } else { -1.0 };
        total += a.get(first, partner) * sign * matching_sum(a, &rest);
    }
    total
}
