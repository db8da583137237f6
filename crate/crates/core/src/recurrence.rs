//! Recurrence plots at a fixed recurrence rate and the line-based RQA
//! quantifiers DET, LAM, DIV and ENTR.
//!
//! Conventions:
//! * `R_ij = 1` iff `D_ij <= ε` (Heaviside with `Θ(0) = 1`), so `R_ii = 1`.
//! * `ε` is the nearest-rank quantile of the strict upper triangle of `D`.
//! * Diagonal-line statistics skip `|i - j| < theiler` (default 1, the main
//!   diagonal only); vertical lines run over the full matrix.
//! * Lines touching the border count at their truncated length.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Uniformly sampled, possibly vector-valued series stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    dim: usize,
    data: Vec<f64>,
    pub dt: f64,
    pub t0: f64,
}

impl TimeSeries {
    pub fn scalar(values: Vec<f64>, dt: f64, t0: f64) -> Self {
        Self {
            dim: 1,
            data: values,
            dt,
            t0,
        }
    }

    /// Scalar series whose first sample sits on grid index `start`.
    pub fn scalar_on_grid(values: Vec<f64>, dt: f64, start: usize) -> Self {
        Self::scalar(values, dt, start as f64 * dt)
    }

    pub fn vectors(dim: usize, data: Vec<f64>, dt: f64, t0: f64) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::Recurrence(format!(
                "{} values do not split into vectors of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { dim, data, dt, t0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Flat sample storage; for scalar series this is the series itself.
    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    Maximum,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Maximum => "maximum",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "maximum" | "max" | "chebyshev" | "linf" => Ok(Metric::Maximum),
            other => Err(Error::Config(format!("unknown metric '{other}'"))),
        }
    }
}

/// Time-delay embedding parameters: dimension `d`, delay `τ` in samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingConfig {
    pub dim: usize,
    pub delay: usize,
    pub metric: Metric,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            delay: 1,
            metric: Metric::Euclidean,
        }
    }
}

/// `X_i = (x_i, x_{i+τ}, …, x_{i+(d-1)τ})`; each `x` may itself be a vector,
/// in which case the components are concatenated.
pub fn embed(series: &TimeSeries, cfg: &EmbeddingConfig) -> Result<TimeSeries> {
    if cfg.dim == 0 || cfg.delay == 0 {
        return Err(Error::Recurrence(format!(
            "embedding needs d >= 1 and tau >= 1, got d = {}, tau = {}",
            cfg.dim, cfg.delay
        )));
    }
    if cfg.dim == 1 {
        return Ok(series.clone());
    }
    let span = (cfg.dim - 1) * cfg.delay;
    let n = series.len();
    if n < span + 2 {
        return Err(Error::SeriesTooShort(format!(
            "{n} samples cannot be embedded with d = {}, tau = {} (need {})",
            cfg.dim,
            cfg.delay,
            span + 2
        )));
    }
    let out_len = n - span;
    let mut data = Vec::with_capacity(out_len * cfg.dim * series.dim);
    for i in 0..out_len {
        for k in 0..cfg.dim {
            data.extend_from_slice(series.sample(i + k * cfg.delay));
        }
    }
    TimeSeries::vectors(cfg.dim * series.dim, data, series.dt, series.t0)
}

/// Dense symmetric distance matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

fn distance(a: &[f64], b: &[f64], metric: Metric) -> f64 {
    match metric {
        Metric::Euclidean if a.len() == 1 => (a[0] - b[0]).abs(),
        Metric::Euclidean => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
        Metric::Maximum => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max),
    }
}

pub fn distance_matrix(traj: &TimeSeries, metric: Metric) -> Result<DistanceMatrix> {
    let n = traj.len();
    if n == 0 {
        return Err(Error::SeriesTooShort("empty trajectory".into()));
    }
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let xi = traj.sample(i);
        for (j, d) in row.iter_mut().enumerate() {
            if i != j {
                *d = distance(xi, traj.sample(j), metric);
            }
        }
    });
    Ok(DistanceMatrix { n, data })
}

/// Symmetric boolean recurrence matrix together with its threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrencePlot {
    n: usize,
    cells: Vec<bool>,
    pub epsilon: f64,
    pub rr_target: f64,
    /// Fraction of recurrent off-diagonal entries.
    pub rr_achieved: f64,
}

impl RecurrencePlot {
    /// Builds a plot from an explicit matrix; used for hand-made test patterns.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut cells = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                cells[i * n + j] = f(i, j);
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if cells[i * n + j] != cells[j * n + i] {
                    return Err(Error::Recurrence(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        let rr_achieved = off_diagonal_rate(n, &cells);
        Ok(Self {
            n,
            cells,
            epsilon: f64::NAN,
            rr_target: f64::NAN,
            rr_achieved,
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.n + j]
    }

    pub fn recurrence_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }
}

fn off_diagonal_rate(n: usize, cells: &[bool]) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let mut upper = 0usize;
    for i in 0..n {
        upper += cells[i * n + i + 1..(i + 1) * n].iter().filter(|&&c| c).count();
    }
    (2 * upper) as f64 / (n * (n - 1)) as f64
}

/// `⌈q·N⌉`, ignoring representation error in the product.
fn nearest_rank(q: f64, count: usize) -> usize {
    let x = q * count as f64;
    let r = x.round();
    let rank = if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    };
    rank.clamp(1, count)
}

/// Smallest value with at least `⌈q·N⌉` values `<=` it. Reorders `values`.
fn nearest_rank_value(values: &mut [f64], q: f64) -> f64 {
    let rank = nearest_rank(q, values.len());
    *values.select_nth_unstable_by(rank - 1, f64::total_cmp).1
}

/// Picks `ε` as the nearest-rank `rr_target` quantile of the off-diagonal
/// distances and thresholds `D <= ε`.
pub fn threshold_by_rate(d: &DistanceMatrix, rr_target: f64) -> Result<RecurrencePlot> {
    if !(rr_target > 0.0 && rr_target < 1.0) {
        return Err(Error::Recurrence(format!(
            "recurrence rate must lie in (0, 1), got {rr_target}"
        )));
    }
    let n = d.n;
    if n < 2 {
        return Err(Error::SeriesTooShort(format!(
            "recurrence plot needs at least 2 samples, got {n}"
        )));
    }
    let mut upper: Vec<f64> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        upper.extend_from_slice(&d.row(i)[i + 1..]);
    }
    let epsilon = nearest_rank_value(&mut upper, rr_target);

    let cells: Vec<bool> = d.data.par_iter().map(|&x| x <= epsilon).collect();
    let rr_achieved = off_diagonal_rate(n, &cells);
    Ok(RecurrencePlot {
        n,
        cells,
        epsilon,
        rr_target,
        rr_achieved,
    })
}

pub type LineHistogram = BTreeMap<usize, usize>;

fn add_runs(hist: &mut LineHistogram, cells: impl Iterator<Item = bool>, weight: usize) {
    let mut run = 0usize;
    for c in cells {
        if c {
            run += 1;
        } else if run > 0 {
            *hist.entry(run).or_default() += weight;
            run = 0;
        }
    }
    if run > 0 {
        *hist.entry(run).or_default() += weight;
    }
}

fn merge(mut a: LineHistogram, b: LineHistogram) -> LineHistogram {
    for (k, v) in b {
        *a.entry(k).or_default() += v;
    }
    a
}

/// Maximal diagonal runs over both triangles, skipping `|i - j| < theiler`.
pub fn diagonal_histogram(rp: &RecurrencePlot, theiler: usize) -> LineHistogram {
    let n = rp.n;
    let first = theiler.max(1);
    let mut hist = (first..n)
        .into_par_iter()
        .map(|offset| {
            let mut h = LineHistogram::new();
            // the lower triangle mirrors the upper one
            add_runs(&mut h, (0..n - offset).map(|i| rp.get(i, i + offset)), 2);
            h
        })
        .reduce(LineHistogram::new, merge);
    if theiler == 0 {
        add_runs(&mut hist, (0..n).map(|i| rp.get(i, i)), 1);
    }
    hist
}

/// Maximal vertical runs over every column of the full matrix.
pub fn vertical_histogram(rp: &RecurrencePlot) -> LineHistogram {
    let n = rp.n;
    (0..n)
        .into_par_iter()
        .map(|col| {
            let mut h = LineHistogram::new();
            add_runs(&mut h, (0..n).map(|row| rp.get(row, col)), 1);
            h
        })
        .reduce(LineHistogram::new, merge)
}

pub const DEFAULT_THEILER: usize = 1;
pub const DEFAULT_L_MIN: usize = 2;
pub const DEFAULT_V_MIN: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct RqaReport {
    pub det: f64,
    pub lam: f64,
    pub div: f64,
    pub entr: f64,
    pub rr_achieved: f64,
    /// Longest diagonal outside the Theiler window (1 when there is none).
    pub l_max: usize,
    pub diag_hist: LineHistogram,
    pub vert_hist: LineHistogram,
    pub l_min: usize,
    pub v_min: usize,
}

fn line_fraction(hist: &LineHistogram, min_len: usize) -> f64 {
    let total: usize = hist.iter().map(|(l, c)| l * c).sum();
    if total == 0 {
        return 0.0;
    }
    let long: usize = hist.range(min_len..).map(|(l, c)| l * c).sum();
    long as f64 / total as f64
}

fn line_entropy(hist: &LineHistogram, min_len: usize) -> f64 {
    let count: usize = hist.range(min_len..).map(|(_, c)| c).sum();
    if count == 0 {
        return 0.0;
    }
    let total = count as f64;
    -hist
        .range(min_len..)
        .map(|(_, &c)| {
            let p = c as f64 / total;
            p * p.ln()
        })
        .sum::<f64>()
}

pub fn rqa(rp: &RecurrencePlot, l_min: usize, v_min: usize) -> RqaReport {
    rqa_with_theiler(rp, l_min, v_min, DEFAULT_THEILER)
}

pub fn rqa_with_theiler(rp: &RecurrencePlot, l_min: usize, v_min: usize, theiler: usize) -> RqaReport {
    let diag_hist = diagonal_histogram(rp, theiler);
    let vert_hist = vertical_histogram(rp);
    let l_max = diag_hist.keys().next_back().copied().unwrap_or(0).max(1);
    RqaReport {
        det: line_fraction(&diag_hist, l_min),
        lam: line_fraction(&vert_hist, v_min),
        div: 1.0 / l_max as f64,
        entr: line_entropy(&diag_hist, l_min),
        rr_achieved: rp.rr_achieved,
        l_max,
        diag_hist,
        vert_hist,
        l_min,
        v_min,
    }
}

/// Binary graymap (`P5`, maxval 255): recurrent cells black, others white,
/// origin at the lower-left so time runs up and to the right.
pub fn pgm_bytes(rp: &RecurrencePlot) -> Vec<u8> {
    let n = rp.n;
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    out.reserve(n * n);
    for y in 0..n {
        let j = n - 1 - y;
        out.extend((0..n).map(|i| if rp.get(i, j) { 0u8 } else { 255u8 }));
    }
    out
}

pub fn export_rp(rp: &RecurrencePlot, path: &Path) -> Result<()> {
    std::fs::write(path, pgm_bytes(rp)).map_err(|e| Error::io(path, e))
}

/// `R` as comma-separated 0/1 rows, row `i` first-index.
pub fn rp_csv(rp: &RecurrencePlot) -> String {
    let n = rp.n;
    let mut s = String::with_capacity(n * (2 * n + 1));
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                s.push(',');
            }
            s.push(if rp.get(i, j) { '1' } else { '0' });
        }
        s.push('\n');
    }
    s
}

pub fn histogram_csv(hist: &LineHistogram) -> String {
    let mut s = String::from("length,count\n");
    for (l, c) in hist {
        s.push_str(&format!("{l},{c}\n"));
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Scalar series to RQA in one call, with the default line parameters.
pub fn analyze(
    series: &TimeSeries,
    embedding: &EmbeddingConfig,
    rr_target: f64,
) -> Result<(RecurrencePlot, RqaReport)> {
    let traj = embed(series, embedding)?;
    let d = distance_matrix(&traj, embedding.metric)?;
    let rp = threshold_by_rate(&d, rr_target)?;
    let report = rqa(&rp, DEFAULT_L_MIN, DEFAULT_V_MIN);
    Ok((rp, report))
}
