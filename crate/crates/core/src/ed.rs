//! Exact diagonalization of the periodic transverse-field Ising chain on the
//! full 2^L Hilbert space. Reference values only; L <= 12.
//!
//! Basis: bit `j` of the basis index is 1 when site `j` points down
//! (σ^z_j = -1). Index 0 is the all-up product state.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tfim::{build_modes, contractions_at, observe, Observable, QuenchSpec};

pub const MAX_SITES: usize = 12;

/// `H = -Σ_i [σ^x_i σ^x_{i+1} + h σ^z_i]` with the wraparound bond, diagonalized.
#[derive(Debug, Clone)]
pub struct DenseSpinSystem {
    size: usize,
    field: f64,
    hamiltonian: DMatrix<f64>,
    energies: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

fn sz(state: usize, site: usize) -> f64 {
    if state >> site & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn build_hamiltonian(size: usize, field: f64) -> Result<DenseSpinSystem> {
    if !(2..=MAX_SITES).contains(&size) {
        return Err(Error::OracleSize {
            size,
            max: MAX_SITES,
        });
    }
    if !(field >= 0.0) {
        return Err(Error::InvalidSpec(format!("field must be >= 0, got {field}")));
    }
    let dim = 1usize << size;
    let mut hamiltonian = DMatrix::<f64>::zeros(dim, dim);
    for s in 0..dim {
        let diag: f64 = (0..size).map(|j| sz(s, j)).sum();
        hamiltonian[(s, s)] -= field * diag;
        for j in 0..size {
            let flipped = s ^ (1 << j) ^ (1 << ((j + 1) % size));
            hamiltonian[(flipped, s)] -= 1.0;
        }
    }
    let eig = SymmetricEigen::new(hamiltonian.clone());
    Ok(DenseSpinSystem {
        size,
        field,
        hamiltonian,
        energies: eig.eigenvalues,
        eigenvectors: eig.eigenvectors,
    })
}

impl DenseSpinSystem {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    pub fn hamiltonian(&self) -> &DMatrix<f64> {
        &self.hamiltonian
    }

    /// Eigenvalues in the order returned by the symmetric solver (unsorted).
    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `e^{-iHt} |↑↑…↑⟩` through the spectral decomposition.
    pub fn evolve(&self, t: f64) -> Vec<Complex64> {
        let dim = self.energies.len();
        // overlap of each eigenvector with basis state 0
        let coeffs: Vec<Complex64> = (0..dim)
            .map(|n| {
                let phase = Complex64::from_polar(1.0, -self.energies[n] * t);
                phase * self.eigenvectors[(0, n)]
            })
            .collect();
        (0..dim)
            .map(|s| {
                (0..dim)
                    .map(|n| coeffs[n] * self.eigenvectors[(s, n)])
                    .sum()
            })
            .collect()
    }

    pub fn energy(&self, state: &[Complex64]) -> f64 {
        let dim = state.len();
        let mut e = Complex64::new(0.0, 0.0);
        for s in 0..dim {
            let mut hs = Complex64::new(0.0, 0.0);
            for r in 0..dim {
                hs += state[r] * self.hamiltonian[(s, r)];
            }
            e += state[s].conj() * hs;
        }
        e.re
    }

    /// Site-resolved `⟨σ^x_i σ^x_{i+ℓ}⟩` or connected `⟨σ^z_i σ^z_{i+ℓ}⟩`.
    pub fn site_values(&self, state: &[Complex64], observable: Observable, ell: usize) -> Vec<f64> {
        (0..self.size)
            .map(|i| {
                let j = (i + ell) % self.size;
                match observable {
                    Observable::Xx => xx(state, i, j),
                    Observable::ZzConnected => {
                        zz(state, i, j) - z(state, i) * z(state, j)
                    }
                }
            })
            .collect()
    }

    pub fn magnetization_x(&self, state: &[Complex64], site: usize) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (s, amp) in state.iter().enumerate() {
            acc += state[s ^ (1 << site)].conj() * amp;
        }
        acc.re
    }
}

fn xx(state: &[Complex64], i: usize, j: usize) -> f64 {
    let mask = (1 << i) ^ (1 << j);
    let mut acc = Complex64::new(0.0, 0.0);
    for (s, amp) in state.iter().enumerate() {
        acc += state[s ^ mask].conj() * amp;
    }
    acc.re
}

fn zz(state: &[Complex64], i: usize, j: usize) -> f64 {
    state
        .iter()
        .enumerate()
        .map(|(s, a)| a.norm_sqr() * sz(s, i) * sz(s, j))
        .sum()
}

fn z(state: &[Complex64], i: usize) -> f64 {
    state
        .iter()
        .enumerate()
        .map(|(s, a)| a.norm_sqr() * sz(s, i))
        .sum()
}

/// Evolves the all-up state to time `t` and returns the site-averaged observable.
pub fn evolve_and_measure(
    sys: &DenseSpinSystem,
    t: f64,
    observable: Observable,
    ell: usize,
) -> f64 {
    let state = sys.evolve(t);
    let values = sys.site_values(&state, observable, ell);
    values.iter().sum::<f64>() / values.len() as f64
}

/// One engine-versus-ED comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub observable: Observable,
    pub field: f64,
    pub time: f64,
    pub ell: usize,
    pub exact: f64,
    pub engine: f64,
}

impl Comparison {
    pub fn error(&self) -> f64 {
        (self.exact - self.engine).abs()
    }
}

/// Compares the free-fermion engine with exact diagonalization on every
/// combination of field, time, distance and observable.
pub fn equivalence_check(
    size: usize,
    fields: &[f64],
    times: &[f64],
    distances: &[usize],
) -> Result<Vec<Comparison>> {
    let mut out = Vec::new();
    for &field in fields {
        let sys = build_hamiltonian(size, field)?;
        let t_max = times.iter().copied().fold(0.0, f64::max);
        let modes = build_modes(&QuenchSpec::new(size, field, t_max, 0.1)?)?;
        for &time in times {
            let state = sys.evolve(time);
            let contr = contractions_at(&modes, time);
            for observable in [Observable::Xx, Observable::ZzConnected] {
                for &ell in distances {
                    let site = sys.site_values(&state, observable, ell);
                    out.push(Comparison {
                        observable,
                        field,
                        time,
                        ell,
                        exact: site.iter().sum::<f64>() / site.len() as f64,
                        engine: observe(&contr, observable, ell)?,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(state: &[Complex64]) -> f64 {
        state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn two_sites_by_hand() {
        // L=2, h=0: the wraparound doubles the single bond, H = -2 σ^x_0 σ^x_1,
        // eigenvalues {-2, -2, 2, 2}.
        let sys = build_hamiltonian(2, 0.0).unwrap();
        let mut e: Vec<f64> = sys.energies().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        for (got, want) in e.iter().zip([-2.0, -2.0, 2.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        // L=2, h=1: block {|↑↑⟩,|↓↓⟩} = [[-2,-2],[-2,2]], block {|↑↓⟩,|↓↑⟩} = [[0,-2],[-2,0]]
        let sys = build_hamiltonian(2, 1.0).unwrap();
        let mut e: Vec<f64> = sys.energies().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        let s8 = 8f64.sqrt();
        for (got, want) in e.iter().zip([-s8, -2.0, 2.0, s8]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn hermitian() {
        let sys = build_hamiltonian(6, 0.7).unwrap();
        let h = sys.hamiltonian();
        assert!((h - h.transpose()).amax() < 1e-12);
    }

    #[test]
    fn strong_field_ground_energy() {
        // second order: E0 = -L h - L / (4h)
        let sys = build_hamiltonian(8, 50.0).unwrap();
        let expected = -8.0 * 50.0 - 8.0 / 200.0;
        assert!((sys.ground_energy() - expected).abs() < 1e-3);
    }

    #[test]
    fn rejects_large_systems() {
        assert!(matches!(build_hamiltonian(13, 1.0), Err(Error::OracleSize { .. })));
        assert!(build_hamiltonian(1, 1.0).is_err());
    }

    #[test]
    fn conservation_and_symmetry() {
        let sys = build_hamiltonian(8, 0.8).unwrap();
        let e0 = sys.energy(&sys.evolve(0.0));
        assert!((e0 + 8.0 * 0.8).abs() < 1e-12);
        for t in [0.3, 1.1, 4.0, 17.5] {
            let psi = sys.evolve(t);
            assert!((norm(&psi) - 1.0).abs() < 1e-12);
            assert!((sys.energy(&psi) - e0).abs() < 1e-10);
            for site in 0..8 {
                assert!(sys.magnetization_x(&psi, site).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn initial_values_and_translation() {
        let sys = build_hamiltonian(8, 2.0).unwrap();
        for ell in 1..=4 {
            assert!(evolve_and_measure(&sys, 0.0, Observable::Xx, ell).abs() < 1e-14);
            assert!(evolve_and_measure(&sys, 0.0, Observable::ZzConnected, ell).abs() < 1e-14);
        }
        let psi = sys.evolve(1.3);
        for obs in [Observable::Xx, Observable::ZzConnected] {
            let v = sys.site_values(&psi, obs, 2);
            for x in &v {
                assert!((x - v[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn equivalence_suite_small() {
        let cmp = equivalence_check(6, &[0.7], &[0.0, 0.9], &[1, 2, 3]).unwrap();
        assert_eq!(cmp.len(), 12);
        for c in &cmp {
            assert!(c.error() < 1e-8, "{c:?}");
        }
    }

    #[test]
    fn equivalence_at_half_chain_before_front() {
        // values ahead of the lightcone front are nonzero in both descriptions
        let cmp = equivalence_check(10, &[0.5, 2.0], &[0.6, 1.1, 2.2], &[5]).unwrap();
        for c in &cmp {
            assert!(c.error() < 1e-8, "{c:?}");
        }
        assert!(cmp.iter().any(|c| c.observable == Observable::Xx && c.exact.abs() > 1e-2));
    }
}
