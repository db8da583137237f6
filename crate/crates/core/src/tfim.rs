//! Exact quench dynamics of the periodic transverse-field Ising chain
//! `H(h) = -Σ_i [σ^x_i σ^x_{i+1} + h σ^z_i]`, starting from the all-up state.
//!
//! Conventions (pinned against the exact-diagonalization oracle):
//!
//! * Jordan-Wigner with `σ^z_j = 1 - 2 c†_j c_j`, so the all-up state is the
//!   fermion vacuum and lies in the even-parity (antiperiodic) sector,
//!   momenta `k = ±(2m-1)π/L`.
//! * Majoranas `A_j = c†_j + c_j`, `B_j = c†_j - c_j`, giving
//!   `σ^z_j = A_j B_j` and `σ^x_j σ^x_{j+1} = B_j A_{j+1}`.
//! * Each `(c_k, c†_{-k})` pair evolves under
//!   `H_k = 2(h - cos k) τ_z + 2 sin k τ_y`.
//!
//! Observables are Pfaffians of Wick matrices assembled from
//! translation-invariant contraction tables, evaluated independently at each
//! time (no stepping).

use std::f64::consts::PI;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pfaffian::{pfaffian, AntisymmetricMatrix};
use crate::recurrence::TimeSeries;

/// Imaginary parts above this signal a convention error upstream.
pub const IMAG_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observable {
    /// `⟨σ^x_i σ^x_{i+ℓ}⟩`
    Xx,
    /// `⟨σ^z_i σ^z_{i+ℓ}⟩ - ⟨σ^z_i⟩²`
    ZzConnected,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::Xx => "xx",
            Observable::ZzConnected => "zz",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "xx" => Ok(Observable::Xx),
            "zz" | "zzc" | "zz_c" | "zz_connected" => Ok(Observable::ZzConnected),
            other => Err(Error::Config(format!("unknown observable '{other}' (expected xx or zz)"))),
        }
    }
}

/// One quench run: `L` sites, post-quench field `h`, grid `t_n = n·dt` up to `t_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchSpec {
    pub size: usize,
    pub field: f64,
    pub t_max: f64,
    pub dt: f64,
}

impl QuenchSpec {
    pub fn new(size: usize, field: f64, t_max: f64, dt: f64) -> Result<Self> {
        let spec = Self {
            size,
            field,
            t_max,
            dt,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 4 || self.size % 2 != 0 {
            return Err(Error::InvalidSpec(format!(
                "L must be even and >= 4, got {}",
                self.size
            )));
        }
        if !(self.field > 0.0) || !self.field.is_finite() {
            return Err(Error::InvalidSpec(format!("h must be > 0, got {}", self.field)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidSpec(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_max >= 0.0) || !self.t_max.is_finite() {
            return Err(Error::InvalidSpec(format!("t_max must be >= 0, got {}", self.t_max)));
        }
        Ok(())
    }

    /// Number of grid points `floor(t_max/dt) + 1`, endpoint inclusive.
    pub fn num_samples(&self) -> usize {
        grid_index_floor(self.t_max, self.dt) + 1
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn max_distance(&self) -> usize {
        self.size / 2
    }

    /// `v_max = 2 min(h, 1)`.
    pub fn max_velocity(&self) -> f64 {
        max_velocity(self.field)
    }

    /// `t_F = ℓ / (2 v_max)`.
    pub fn fermi_time(&self, ell: usize) -> f64 {
        ell as f64 / (2.0 * self.max_velocity())
    }

    /// `k L / (2 v_max)`, the time for the lightcone to wrap the ring `k` times.
    pub fn revival_time(&self, k: usize) -> f64 {
        k as f64 * self.size as f64 / (2.0 * self.max_velocity())
    }
}

pub fn max_velocity(field: f64) -> f64 {
    2.0 * field.min(1.0)
}

/// `floor(t/dt)` robust to representation error in `t/dt`.
pub(crate) fn grid_index_floor(t: f64, dt: f64) -> usize {
    let x = t / dt;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as usize
    } else {
        x.floor() as usize
    }
}

pub fn dispersion(field: f64, k: f64) -> f64 {
    2.0 * ((field - k.cos()).powi(2) + k.sin().powi(2)).sqrt()
}

/// Post-quench single-particle data for the antiperiodic sector.
#[derive(Debug, Clone)]
pub struct ModeTable {
    size: usize,
    field: f64,
    /// All `L` momenta, ascending.
    pub momenta: Vec<f64>,
    /// `ε_k(h)` aligned with `momenta`.
    pub energies: Vec<f64>,
    /// Bogoliubov angle `θ_k` with `(cos θ, sin θ) = 2(h - cos k, sin k) / ε_k`.
    pub angles: Vec<f64>,
    // positive-momentum half, used for the separation sums
    half_energy: Vec<f64>,
    half_cos_theta: Vec<f64>,
    half_sin_theta: Vec<f64>,
    // cos(k r), sin(k r) for positive k, r = 0..=L/2, row-major by r
    cos_kr: Vec<f64>,
    sin_kr: Vec<f64>,
}

pub fn build_modes(spec: &QuenchSpec) -> Result<ModeTable> {
    spec.validate()?;
    let size = spec.size;
    let h = spec.field;
    let half = size / 2;

    let positive: Vec<f64> = (1..=half)
        .map(|m| (2 * m - 1) as f64 * PI / size as f64)
        .collect();
    let mut momenta: Vec<f64> = positive.iter().rev().map(|k| -k).collect();
    momenta.extend(positive.iter().copied());

    let energies: Vec<f64> = momenta.iter().map(|&k| dispersion(h, k)).collect();
    let angles: Vec<f64> = momenta
        .iter()
        .map(|&k| (k.sin()).atan2(h - k.cos()))
        .collect();

    let half_energy: Vec<f64> = positive.iter().map(|&k| dispersion(h, k)).collect();
    let half_cos_theta: Vec<f64> = positive
        .iter()
        .zip(&half_energy)
        .map(|(&k, &e)| 2.0 * (h - k.cos()) / e)
        .collect();
    let half_sin_theta: Vec<f64> = positive
        .iter()
        .zip(&half_energy)
        .map(|(&k, &e)| 2.0 * k.sin() / e)
        .collect();

    let mut cos_kr = Vec::with_capacity((half + 1) * half);
    let mut sin_kr = Vec::with_capacity((half + 1) * half);
    for r in 0..=half {
        for &k in &positive {
            let (s, c) = (k * r as f64).sin_cos();
            cos_kr.push(c);
            sin_kr.push(s);
        }
    }

    Ok(ModeTable {
        size,
        field: h,
        momenta,
        energies,
        angles,
        half_energy,
        half_cos_theta,
        half_sin_theta,
        cos_kr,
        sin_kr,
    })
}

impl ModeTable {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    /// Bogoliubov vacuum energy `-Σ_k ε_k / 2` of the antiperiodic sector.
    pub fn ground_energy(&self) -> f64 {
        -0.5 * self.energies.iter().sum::<f64>()
    }
}

/// Two-point Majorana expectation values at one time, indexed by separation
/// `r = m - l` in `[-L/2, L/2]`.
#[derive(Debug, Clone)]
pub struct MajoranaContractions {
    pub time: f64,
    half: usize,
    aa: Vec<Complex64>,
    bb: Vec<Complex64>,
    ba: Vec<Complex64>,
}

impl MajoranaContractions {
    fn slot(&self, r: isize) -> usize {
        let half = self.half as isize;
        assert!(
            (-half..=half).contains(&r),
            "separation {r} outside [-{half}, {half}]"
        );
        (r + half) as usize
    }

    pub fn max_separation(&self) -> usize {
        self.half
    }

    /// `⟨A_l A_{l+r}⟩`
    pub fn aa(&self, r: isize) -> Complex64 {
        self.aa[self.slot(r)]
    }

    /// `⟨B_l B_{l+r}⟩`
    pub fn bb(&self, r: isize) -> Complex64 {
        self.bb[self.slot(r)]
    }

    /// `⟨B_l A_{l+r}⟩`
    pub fn ba(&self, r: isize) -> Complex64 {
        self.ba[self.slot(r)]
    }

    /// `⟨A_l B_{l+r}⟩ = -⟨B_{l+r} A_l⟩` (A and B anticommute at every pair of sites).
    pub fn ab(&self, r: isize) -> Complex64 {
        -self.ba(-r)
    }

    /// Contraction `⟨X_l Y_m⟩` for Majoranas `x` at `l` and `y` at `m`.
    pub fn pair(&self, x: Majorana, l: isize, y: Majorana, m: isize) -> Complex64 {
        let r = m - l;
        match (x, y) {
            (Majorana::A, Majorana::A) => self.aa(r),
            (Majorana::B, Majorana::B) => self.bb(r),
            (Majorana::B, Majorana::A) => self.ba(r),
            (Majorana::A, Majorana::B) => self.ab(r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Majorana {
    A,
    B,
}

/// Contraction tables at time `t` from the per-mode 2×2 Heisenberg evolution.
///
/// Per positive momentum the evolved vacuum has `⟨c†_k c_k⟩ = sin²θ sin²(εt)` and
/// `⟨c_k c_{-k}⟩ = sinθ sin(εt) [cos(εt) - i cosθ sin(εt)]`; the real-space
/// tables are their cosine/sine transforms in the separation.
pub fn contractions_at(modes: &ModeTable, t: f64) -> MajoranaContractions {
    let half = modes.size / 2;
    let nk = modes.half_energy.len();
    let norm = 2.0 / modes.size as f64;

    let mut occ = Vec::with_capacity(nk);
    let mut anom_re = Vec::with_capacity(nk);
    let mut anom_im = Vec::with_capacity(nk);
    for q in 0..nk {
        let (s, c) = (modes.half_energy[q] * t).sin_cos();
        let v = modes.half_sin_theta[q] * s;
        occ.push(v * v);
        anom_re.push(v * c);
        anom_im.push(-v * modes.half_cos_theta[q] * s);
    }

    let width = 2 * half + 1;
    let zero = Complex64::new(0.0, 0.0);
    let mut aa = vec![zero; width];
    let mut bb = vec![zero; width];
    let mut ba = vec![zero; width];

    for r in 0..=half {
        let cos_row = &modes.cos_kr[r * nk..(r + 1) * nk];
        let sin_row = &modes.sin_kr[r * nk..(r + 1) * nk];
        let mut occ_cos = 0.0;
        let mut re_sin = 0.0;
        let mut im_sin = 0.0;
        for q in 0..nk {
            occ_cos += cos_row[q] * occ[q];
            re_sin += sin_row[q] * anom_re[q];
            im_sin += sin_row[q] * anom_im[q];
        }
        occ_cos *= norm;
        re_sin *= norm;
        im_sin *= norm;

        let delta = if r == 0 { 1.0 } else { 0.0 };
        // ⟨c_l c_m⟩ + ⟨c†_l c†_m⟩, odd in r
        let pair_sum = Complex64::new(0.0, -2.0 * re_sin);
        let up = half + r;
        let down = half - r;
        aa[up] = Complex64::new(delta, 0.0) + pair_sum;
        aa[down] = Complex64::new(delta, 0.0) - pair_sum;
        bb[up] = Complex64::new(-delta, 0.0) + pair_sum;
        bb[down] = Complex64::new(-delta, 0.0) - pair_sum;
        ba[up] = Complex64::new(-delta + 2.0 * occ_cos - 2.0 * im_sin, 0.0);
        ba[down] = Complex64::new(-delta + 2.0 * occ_cos + 2.0 * im_sin, 0.0);
    }

    MajoranaContractions {
        time: t,
        half,
        aa,
        bb,
        ba,
    }
}

fn check_distance(contr: &MajoranaContractions, ell: usize) -> Result<()> {
    if ell == 0 || ell > contr.half {
        return Err(Error::DistanceOutOfRange {
            ell,
            max: contr.half,
        });
    }
    Ok(())
}

fn wick(contr: &MajoranaContractions, ops: &[(Majorana, isize)]) -> Complex64 {
    let m = AntisymmetricMatrix::from_upper(ops.len(), |a, b| {
        let (x, l) = ops[a];
        let (y, mm) = ops[b];
        contr.pair(x, l, y, mm)
    });
    pfaffian(&m)
}

/// `⟨σ^x_0 σ^x_ℓ⟩` as the Pfaffian over the string `B_0 A_1 B_1 … B_{ℓ-1} A_ℓ`,
/// before the reality check.
pub fn rho_xx_complex(contr: &MajoranaContractions, ell: usize) -> Result<Complex64> {
    check_distance(contr, ell)?;
    let mut ops = Vec::with_capacity(2 * ell);
    for p in 0..ell as isize {
        ops.push((Majorana::B, p));
        ops.push((Majorana::A, p + 1));
    }
    Ok(wick(contr, &ops))
}

/// `⟨σ^z_0 σ^z_ℓ⟩ - ⟨σ^z_0⟩²` before the reality check.
pub fn rho_zz_connected_complex(contr: &MajoranaContractions, ell: usize) -> Result<Complex64> {
    check_distance(contr, ell)?;
    let l = ell as isize;
    let ops = [
        (Majorana::A, 0),
        (Majorana::B, 0),
        (Majorana::A, l),
        (Majorana::B, l),
    ];
    let sz = contr.ab(0);
    Ok(wick(contr, &ops) - sz * sz)
}

fn real_part(value: Complex64, observable: Observable, time: f64) -> Result<f64> {
    if value.im.abs() > IMAG_TOL {
        return Err(Error::ImaginaryResidue {
            observable: observable.name(),
            time,
            imag: value.im,
        });
    }
    Ok(value.re)
}

pub fn rho_xx(contr: &MajoranaContractions, ell: usize) -> Result<f64> {
    real_part(rho_xx_complex(contr, ell)?, Observable::Xx, contr.time)
}

pub fn rho_zz_connected(contr: &MajoranaContractions, ell: usize) -> Result<f64> {
    real_part(
        rho_zz_connected_complex(contr, ell)?,
        Observable::ZzConnected,
        contr.time,
    )
}

pub fn observe(contr: &MajoranaContractions, observable: Observable, ell: usize) -> Result<f64> {
    match observable {
        Observable::Xx => rho_xx(contr, ell),
        Observable::ZzConnected => rho_zz_connected(contr, ell),
    }
}

fn observe_complex(
    contr: &MajoranaContractions,
    observable: Observable,
    ell: usize,
) -> Result<Complex64> {
    match observable {
        Observable::Xx => rho_xx_complex(contr, ell),
        Observable::ZzConnected => rho_zz_connected_complex(contr, ell),
    }
}

/// Observable samples on the uniform grid `t_n = n·dt`, one row per distance.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorSeries {
    pub observable: Observable,
    pub distances: Vec<usize>,
    pub dt: f64,
    /// Grid index of the first sample.
    pub start: usize,
    /// `values[d][n]` for `distances[d]` at time `(start + n)·dt`.
    pub values: Vec<Vec<f64>>,
    /// Largest `|Im|` discarded over the run.
    pub max_imag: f64,
}

impl CorrelatorSeries {
    pub fn len(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self, n: usize) -> f64 {
        (self.start + n) as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|n| self.time(n)).collect()
    }

    /// Row for distance `ell`, if present.
    pub fn row(&self, ell: usize) -> Option<&[f64]> {
        self.distances
            .iter()
            .position(|&d| d == ell)
            .map(|i| self.values[i].as_slice())
    }

    pub fn time_series(&self, ell: usize) -> Option<TimeSeries> {
        self.row(ell).map(|row| {
            TimeSeries::scalar_on_grid(row.to_vec(), self.dt, self.start)
        })
    }
}

/// Samples the whole grid `n = 0..=floor(t_max/dt)`.
pub fn simulate_series(
    spec: &QuenchSpec,
    observable: Observable,
    distances: &[usize],
) -> Result<CorrelatorSeries> {
    simulate_range(spec, observable, distances, 0..spec.num_samples())
}

/// Samples grid indices `range`; the contraction tables at each time are shared
/// across all requested distances.
pub fn simulate_range(
    spec: &QuenchSpec,
    observable: Observable,
    distances: &[usize],
    range: Range<usize>,
) -> Result<CorrelatorSeries> {
    let indices: Vec<usize> = range.clone().collect();
    let samples = simulate_at(spec, observable, distances, &indices)?;
    Ok(CorrelatorSeries {
        observable,
        distances: distances.to_vec(),
        dt: spec.dt,
        start: range.start,
        values: samples.values,
        max_imag: samples.max_imag,
    })
}

/// Observable values at arbitrary grid indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    /// `values[d][i]` for `distances[d]` at grid index `indices[i]`.
    pub values: Vec<Vec<f64>>,
    pub max_imag: f64,
}

/// Evaluates the observable at the given grid indices. Data-parallel over
/// indices; the output order follows `indices` regardless of scheduling.
pub fn simulate_at(
    spec: &QuenchSpec,
    observable: Observable,
    distances: &[usize],
    indices: &[usize],
) -> Result<Samples> {
    let modes = build_modes(spec)?;
    let max = spec.max_distance();
    for &ell in distances {
        if ell == 0 || ell > max {
            return Err(Error::DistanceOutOfRange { ell, max });
        }
    }
    if let Some(&last) = indices.iter().max() {
        if last >= spec.num_samples() {
            return Err(Error::InvalidSpec(format!(
                "time {} beyond t_max = {}",
                spec.time(last),
                spec.t_max
            )));
        }
    }

    let rows: Vec<(Vec<f64>, f64)> = indices
        .par_iter()
        .map(|&n| {
            let t = spec.time(n);
            let contr = contractions_at(&modes, t);
            let mut out = Vec::with_capacity(distances.len());
            let mut imag = 0.0_f64;
            for &ell in distances {
                let z = observe_complex(&contr, observable, ell)?;
                out.push(real_part(z, observable, t)?);
                imag = imag.max(z.im.abs());
            }
            Ok((out, imag))
        })
        .collect::<Result<_>>()?;

    let mut values = vec![Vec::with_capacity(rows.len()); distances.len()];
    let mut max_imag = 0.0_f64;
    for (row, imag) in rows {
        max_imag = max_imag.max(imag);
        for (d, v) in row.into_iter().enumerate() {
            values[d].push(v);
        }
    }
    Ok(Samples { values, max_imag })
}
