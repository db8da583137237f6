//! Sweeps over the transverse field: simulate, window, optionally rescale,
//! threshold, quantify, export.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::recurrence::{
    analyze, histogram_csv, pgm_bytes, EmbeddingConfig, Metric, RqaReport, TimeSeries,
};
use crate::spectral::{ipr, mean_abs};
use crate::tfim::{simulate_at, Observable, QuenchSpec};

/// Relative slack when mapping times onto grid indices.
const GRID_TOL: f64 = 1e-9;

pub const SWEEP_HEADER: &str = "observable,h,ell,DET,LAM,DIV,ENTR,RR_achieved,MEAN_ABS,IPR";

fn snap(x: f64) -> Option<f64> {
    let r = x.round();
    ((x - r).abs() <= GRID_TOL * r.abs().max(1.0)).then_some(r)
}

/// Smallest integer `>= x`, treating values within rounding of an integer as that integer.
fn grid_ceil(x: f64) -> i64 {
    snap(x).unwrap_or_else(|| x.ceil()) as i64
}

fn grid_floor(x: f64) -> i64 {
    snap(x).unwrap_or_else(|| x.floor()) as i64
}

/// Grid index of the first sample of `series`.
fn start_index(series: &TimeSeries) -> Result<i64> {
    let x = series.t0 / series.dt;
    snap(x).map(|r| r as i64).ok_or_else(|| {
        Error::Window(format!(
            "series start {} is not on the dt = {} grid",
            series.t0, series.dt
        ))
    })
}

/// Index range `[first, end)` into `series` of the samples with `t_lo <= t < t_hi`.
fn window_bounds(series: &TimeSeries, t_lo: f64, t_hi: f64) -> Result<(usize, usize)> {
    if !(t_lo < t_hi) {
        return Err(Error::Window(format!("empty window [{t_lo}, {t_hi})")));
    }
    let n = series.len() as i64;
    let first = grid_ceil((t_lo - series.t0) / series.dt);
    let end = grid_ceil((t_hi - series.t0) / series.dt);
    if first < 0 || end > n {
        return Err(Error::Window(format!(
            "window [{t_lo}, {t_hi}) outside series span [{}, {})",
            series.t0,
            series.t0 + n as f64 * series.dt
        )));
    }
    if end <= first {
        return Err(Error::Window(format!("window [{t_lo}, {t_hi}) holds no samples")));
    }
    Ok((first as usize, end as usize))
}

/// Samples with `t_lo <= t_n < t_hi`.
pub fn select_window(series: &TimeSeries, t_lo: f64, t_hi: f64) -> Result<TimeSeries> {
    let (first, end) = window_bounds(series, t_lo, t_hi)?;
    let dim = series.dim();
    let data = series.values()[first * dim..end * dim].to_vec();
    // keep on-grid start times exact
    let t0 = match start_index(series) {
        Ok(n0) => (n0 + first as i64) as f64 * series.dt,
        Err(_) => series.time(first),
    };
    TimeSeries::vectors(dim, data, series.dt, t0)
}

/// `min(h, 1)`: the factor mapping physical time onto the rescaled axis.
pub fn time_scale(field: f64) -> f64 {
    field.min(1.0)
}

/// Source grid index held at output grid index `m`.
fn held_index(m: i64, scale: f64) -> i64 {
    grid_floor(m as f64 / scale)
}

/// Maps `t -> t·min(h,1)` and resamples onto the original grid by
/// previous-sample hold. Covers every output grid point whose held source
/// sample lies inside the input.
pub fn rescale_time(series: &TimeSeries, field: f64) -> Result<TimeSeries> {
    if !(field > 0.0) {
        return Err(Error::Config(format!("field must be > 0, got {field}")));
    }
    let s = time_scale(field);
    if s == 1.0 {
        return Ok(series.clone());
    }
    let n0 = start_index(series)?;
    let n1 = n0 + series.len() as i64;
    let mut m = grid_floor(n0 as f64 * s).max(0);
    while held_index(m, s) < n0 {
        m += 1;
    }
    let m_first = m;
    let dim = series.dim();
    let mut data = Vec::new();
    while held_index(m, s) < n1 {
        let src = (held_index(m, s) - n0) as usize;
        data.extend_from_slice(series.sample(src));
        m += 1;
    }
    if data.is_empty() {
        return Err(Error::Window("rescaled series is empty".into()));
    }
    TimeSeries::vectors(dim, data, series.dt, m_first as f64 * series.dt)
}

/// Grid indices of the output window and the source index each one holds.
fn window_plan(cfg: &SweepConfig, field: f64) -> (Vec<usize>, usize) {
    let dt = cfg.dt;
    let m_lo = grid_ceil(cfg.window.0 / dt).max(0);
    let m_hi = grid_ceil(cfg.window.1 / dt).max(m_lo);
    let s = if cfg.rescale { time_scale(field) } else { 1.0 };
    let sources: Vec<usize> = (m_lo..m_hi).map(|m| held_index(m, s) as usize).collect();
    (sources, m_lo as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub size: usize,
    pub t_max: f64,
    pub dt: f64,
    pub fields: Vec<f64>,
    pub distances: Vec<usize>,
    pub observables: Vec<Observable>,
    /// Half-open `[t_lo, t_hi)`.
    pub window: (f64, f64),
    pub rr: f64,
    pub rescale: bool,
    pub embedding: EmbeddingConfig,
    pub out: PathBuf,
    pub images: bool,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            size: 128,
            t_max: 500.0,
            dt: 0.1,
            fields: field_range(0.1, 3.0, 0.05).expect("valid default range"),
            distances: vec![1, 2, 3, 6, 10, 20],
            observables: vec![Observable::Xx],
            window: (300.0, 500.0),
            rr: 0.10,
            rescale: false,
            embedding: EmbeddingConfig::default(),
            out: PathBuf::from("sweep_out"),
            images: false,
            threads: 0,
        }
    }
}

/// `lo, lo+step, …` up to `hi` inclusive, each rounded to 1e-9 so that
/// printed values stay short.
pub fn field_range(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(lo <= hi) {
        return Err(Error::Config(format!("bad range {lo}:{hi}:{step}")));
    }
    let count = grid_floor((hi - lo) / step) + 1;
    Ok((0..count)
        .map(|i| ((lo + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(Error::Config(format!("{key}: expected a boolean, got {other:?}"))),
    }
}

/// `LO:HI`
pub fn parse_window(value: &str) -> Result<(f64, f64)> {
    let (lo, hi) = value
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("window: expected LO:HI, got {value:?}")))?;
    Ok((parse_num("window", lo)?, parse_num("window", hi)?))
}

/// Comma list, or `lo:hi:step`.
pub fn parse_fields(value: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').collect();
    match parts.as_slice() {
        [lo, hi, step] => field_range(
            parse_num("h", lo)?,
            parse_num("h", hi)?,
            parse_num("h", step)?,
        ),
        [_] => parse_list("h", value),
        _ => Err(Error::Config(format!("h: expected a list or lo:hi:step, got {value:?}"))),
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl SweepConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match normalize_key(key).as_str() {
            "size" | "l" => self.size = parse_num("size", value)?,
            "t_max" => self.t_max = parse_num("t_max", value)?,
            "dt" => self.dt = parse_num("dt", value)?,
            "h" | "fields" => self.fields = parse_fields(value)?,
            "distances" | "ell" => self.distances = parse_list("distances", value)?,
            "observables" | "observable" => {
                self.observables = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse())
                    .collect::<Result<_>>()?
            }
            "window" => self.window = parse_window(value)?,
            "rr" => self.rr = parse_num("rr", value)?,
            "rescale" => self.rescale = parse_bool("rescale", value)?,
            "embed_dim" => self.embedding.dim = parse_num("embed_dim", value)?,
            "embed_delay" => self.embedding.delay = parse_num("embed_delay", value)?,
            "metric" => self.embedding.metric = value.parse::<Metric>()?,
            "out" => self.out = PathBuf::from(value),
            "images" => self.images = parse_bool("images", value)?,
            "threads" => self.threads = parse_num("threads", value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let (t_lo, t_hi) = self.window;
        if !(t_lo >= 0.0 && t_lo < t_hi && t_hi <= self.t_max + self.dt * (1.0 + GRID_TOL)) {
            return Err(Error::Config(format!(
                "window [{t_lo}, {t_hi}) must satisfy 0 <= t_lo < t_hi <= t_max + dt"
            )));
        }
        if self.fields.is_empty() || self.fields.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Config("h values must be non-empty and > 0".into()));
        }
        if self.distances.is_empty() || self.observables.is_empty() {
            return Err(Error::Config("need at least one distance and observable".into()));
        }
        if !(self.rr > 0.0 && self.rr < 1.0) {
            return Err(Error::Config(format!("rr must lie in (0, 1), got {}", self.rr)));
        }
        if self.embedding.dim == 0 || self.embedding.delay == 0 {
            return Err(Error::Config("embedding dimension and delay must be >= 1".into()));
        }
        self.spec(self.fields[0])?;
        let (sources, _) = window_plan(self, self.fields[0]);
        if sources.len() < 2 {
            return Err(Error::Config("window must hold at least 2 samples".into()));
        }
        Ok(())
    }

    pub fn spec(&self, field: f64) -> Result<QuenchSpec> {
        QuenchSpec::new(self.size, field, self.t_max, self.dt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub observable: Observable,
    pub h: f64,
    pub ell: usize,
    pub rqa: RqaReport,
    pub mean_abs: f64,
    pub ipr: f64,
}

impl SweepRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.observable,
            self.h,
            self.ell,
            self.rqa.det,
            self.rqa.lam,
            self.rqa.div,
            self.rqa.entr,
            self.rqa.rr_achieved,
            self.mean_abs,
            self.ipr
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.csv_line());
    }
    out
}

pub fn image_name(observable: Observable, h: f64, ell: usize) -> String {
    format!("rp_{observable}_h{h}_l{ell}.pgm")
}

/// Windowed (and, if configured, rescaled) series for every distance at one field.
pub fn cell_series(cfg: &SweepConfig, observable: Observable, field: f64) -> Result<Vec<TimeSeries>> {
    let spec = cfg.spec(field)?;
    let (sources, m_lo) = window_plan(cfg, field);
    let needed = sources.last().copied().unwrap_or(0);
    if needed >= spec.num_samples() {
        return Err(Error::Window(format!(
            "window needs data up to t = {} but t_max = {}",
            spec.time(needed),
            cfg.t_max
        )));
    }
    // held indices are non-decreasing: evaluate each distinct one once
    let mut unique = sources.clone();
    unique.dedup();
    let samples = simulate_at(&spec, observable, &cfg.distances, &unique)?;
    Ok(samples
        .values
        .iter()
        .map(|vals| {
            let mut out = Vec::with_capacity(sources.len());
            let mut u = 0;
            for &src in &sources {
                while unique[u] != src {
                    u += 1;
                }
                out.push(vals[u]);
            }
            TimeSeries::scalar_on_grid(out, cfg.dt, m_lo)
        })
        .collect())
}

fn analyze_cell(
    cfg: &SweepConfig,
    observable: Observable,
    h: f64,
    ell: usize,
    series: &TimeSeries,
) -> Result<SweepRow> {
    let (rp, rqa) = analyze(series, &cfg.embedding, cfg.rr)?;
    if cfg.images {
        let path = cfg.out.join(image_name(observable, h, ell));
        fs::write(&path, pgm_bytes(&rp)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(SweepRow {
        observable,
        h,
        ell,
        rqa,
        mean_abs: mean_abs(series.values())?,
        ipr: ipr(series)?.ipr,
    })
}

fn wrap_cell(h: f64, ell: usize, e: Error) -> Error {
    match e {
        e @ Error::Cell { .. } => e,
        e => Error::Cell {
            h,
            ell,
            source: Box::new(e),
        },
    }
}

/// Computes every `(observable, h, ℓ)` cell. Rows come back ordered by
/// observable, then ℓ, then h, whatever the scheduling.
pub fn compute_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if cfg.images {
        fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    }
    let groups: Vec<(usize, Observable, usize, f64)> = cfg
        .observables
        .iter()
        .enumerate()
        .flat_map(|(oi, &obs)| cfg.fields.iter().enumerate().map(move |(hi, &h)| (oi, obs, hi, h)))
        .collect();
    let work = || -> Result<Vec<((usize, usize, usize), SweepRow)>> {
        let nested: Vec<Vec<_>> = groups
            .par_iter()
            .map(|&(oi, obs, hi, h)| {
                let first_ell = cfg.distances[0];
                let series = cell_series(cfg, obs, h).map_err(|e| wrap_cell(h, first_ell, e))?;
                cfg.distances
                    .par_iter()
                    .zip(series.par_iter())
                    .enumerate()
                    .map(|(di, (&ell, s))| {
                        analyze_cell(cfg, obs, h, ell, s)
                            .map(|row| ((oi, di, hi), row))
                            .map_err(|e| wrap_cell(h, ell, e))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(nested.into_iter().flatten().collect())
    };
    let keyed = if cfg.threads == 0 {
        work()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work)?
    };
    let sorted: BTreeMap<_, _> = keyed.into_iter().collect();
    Ok(sorted.into_values().collect())
}

pub const SWEEP_CSV: &str = "sweep.csv";

/// Runs the sweep and writes `sweep.csv` (plus images when enabled) into `cfg.out`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let rows = compute_sweep(cfg)?;
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let path = cfg.out.join(SWEEP_CSV);
    fs::write(&path, sweep_csv(&rows)).map_err(|e| Error::io(&path, e))?;
    Ok(rows)
}

/// Writes the image and line histograms of one series, as the `rp` subcommand does.
pub fn export_single(
    series: &TimeSeries,
    embedding: &EmbeddingConfig,
    rr: f64,
    out: &Path,
) -> Result<RqaReport> {
    let (rp, rqa) = analyze(series, embedding, rr)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let write = |name: &str, bytes: &[u8]| {
        let path = out.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))
    };
    write("rp.pgm", &pgm_bytes(&rp))?;
    write("diagonal_hist.csv", histogram_csv(&rqa.diag_hist).as_bytes())?;
    write("vertical_hist.csv", histogram_csv(&rqa.vert_hist).as_bytes())?;
    write(
        "rqa.csv",
        format!(
            "DET,LAM,DIV,ENTR,RR_achieved,epsilon,L_max\n{},{},{},{},{},{},{}\n",
            rqa.det, rqa.lam, rqa.div, rqa.entr, rqa.rr_achieved, rp.epsilon, rqa.l_max
        )
        .as_bytes(),
    )?;
    Ok(rqa)
}

/// CSV of a sampled series: `t` then one column per distance.
pub fn series_csv(observable: Observable, distances: &[usize], times: &[f64], values: &[Vec<f64>]) -> String {
    let mut out = String::from("t");
    for ell in distances {
        let _ = write!(out, ",{observable}_{ell}");
    }
    out.push('\n');
    for (n, t) in times.iter().enumerate() {
        let _ = write!(out, "{t}");
        for col in values {
            let _ = write!(out, ",{}", col[n]);
        }
        out.push('\n');
    }
    out
}

/// Reads a column of a `t,…` CSV back into a series; `column` of `None`
/// takes the first value column.
pub fn read_series_csv(text: &str, column: Option<&str>) -> Result<TimeSeries> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Config("empty series file".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    if header.len() < 2 {
        return Err(Error::Config("series CSV needs a time column and a value column".into()));
    }
    let col = match column {
        None => 1,
        Some(name) => header
            .iter()
            .position(|h| *h == name)
            .filter(|&i| i > 0)
            .ok_or_else(|| Error::Config(format!("no value column named {name:?}")))?,
    };
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != header.len() {
            return Err(Error::Config(format!("row {}: expected {} cells", i + 2, header.len())));
        }
        times.push(parse_num::<f64>("t", cells[0])?);
        values.push(parse_num::<f64>(header[col], cells[col])?);
    }
    if times.len() < 2 {
        return Err(Error::SeriesTooShort("series CSV needs at least 2 rows".into()));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::Config("time column must increase".into()));
    }
    for (n, t) in times.iter().enumerate() {
        let expected = times[0] + n as f64 * dt;
        if (t - expected).abs() > 1e-6 * dt.max(expected.abs()) {
            return Err(Error::Config(format!("non-uniform time grid at row {}", n + 2)));
        }
    }
    Ok(TimeSeries::scalar(values, dt, times[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::{export_rp, threshold_by_rate, distance_matrix, embed};
    use crate::tfim::simulate_series;

    fn ramp(n: usize, dt: f64, start: usize) -> TimeSeries {
        TimeSeries::scalar_on_grid((0..n).map(|i| (start + i) as f64).collect(), dt, start)
    }

    #[test]
    fn window_examples() {
        let s = ramp(5001, 0.1, 0);
        let w = select_window(&s, 300.0, 500.0).unwrap();
        assert_eq!(w.len(), 2000);
        assert_eq!(w.t0, 300.0);
        assert_eq!(w.values()[0], 3000.0);
        assert_eq!(*w.values().last().unwrap(), 4999.0);

        assert_eq!(select_window(&s, 0.0, 0.25).unwrap().len(), 3);

        let full = select_window(&s, 0.0, 500.1).unwrap();
        assert_eq!(full, s);
    }

    #[test]
    fn window_errors() {
        let s = ramp(100, 0.1, 0);
        assert!(select_window(&s, 2.0, 2.0).is_err());
        assert!(select_window(&s, 3.0, 2.0).is_err());
        assert!(select_window(&s, 0.01, 0.05).is_err());
        assert!(select_window(&s, 5.0, 20.0).is_err());
        assert!(select_window(&s, -1.0, 2.0).is_err());
    }

    #[test]
    fn rescale_identity_and_map() {
        let s = ramp(50, 0.1, 10);
        assert_eq!(rescale_time(&s, 1.0).unwrap(), s);
        assert_eq!(rescale_time(&s, 2.5).unwrap(), s);

        // source sample at t=600 lands on t=300
        let full = ramp(6001, 0.1, 0);
        let r = rescale_time(&full, 0.5).unwrap();
        let w = select_window(&r, 300.0, 300.05).unwrap();
        assert_eq!(w.values(), &[6000.0]);
        assert_eq!(r.len(), 3001);
    }

    #[test]
    fn rescale_holds_previous_sample() {
        let s = ramp(100, 1.0, 0);
        let r = rescale_time(&s, 0.3).unwrap();
        assert_eq!(r.t0, 0.0);
        for (m, v) in r.values().iter().enumerate() {
            assert_eq!(*v, (m as f64 / 0.3 + 1e-9).floor());
        }
        assert!(rescale_time(&s, 0.0).is_err());
    }

    #[test]
    fn rescale_window_too_short() {
        let s = ramp(5001, 0.1, 0);
        let r = rescale_time(&s, 0.5).unwrap();
        assert!(select_window(&r, 300.0, 500.0).is_err());
    }

    #[test]
    fn field_ranges() {
        let h = field_range(0.1, 3.0, 0.05).unwrap();
        assert_eq!(h.len(), 59);
        assert_eq!(h[0], 0.1);
        assert_eq!(h[1], 0.15);
        assert_eq!(h[18], 1.0);
        assert_eq!(*h.last().unwrap(), 3.0);
        assert_eq!(parse_fields("0.5, 1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert_eq!(parse_fields("1:2:0.5").unwrap(), vec![1.0, 1.5, 2.0]);
        assert!(parse_fields("1:2").is_err());
    }

    #[test]
    fn config_parsing() {
        let cfg = SweepConfig::parse(
            "# comment\nsize = 64\nt-max = 100 # trailing\nh = 0.5,1.5\n\
             distances = 1, 3\nobservables = xx, zz\nwindow = 20:40\nrr = 0.2\n\
             rescale = true\nembed_dim = 2\nembed-delay = 3\nmetric = maximum\n\
             out = /tmp/x\nimages = yes\nthreads = 2\n",
        )
        .unwrap();
        assert_eq!(cfg.size, 64);
        assert_eq!(cfg.t_max, 100.0);
        assert_eq!(cfg.fields, vec![0.5, 1.5]);
        assert_eq!(cfg.distances, vec![1, 3]);
        assert_eq!(cfg.observables, vec![Observable::Xx, Observable::ZzConnected]);
        assert_eq!(cfg.window, (20.0, 40.0));
        assert_eq!(cfg.rr, 0.2);
        assert!(cfg.rescale && cfg.images);
        assert_eq!((cfg.embedding.dim, cfg.embedding.delay), (2, 3));
        assert_eq!(cfg.embedding.metric, Metric::Maximum);
        assert_eq!(cfg.out, PathBuf::from("/tmp/x"));
        assert_eq!(cfg.threads, 2);
        cfg.validate().unwrap();

        assert!(SweepConfig::parse("bogus = 1").is_err());
        assert!(SweepConfig::parse("size 12").is_err());
        assert!(SweepConfig::parse("rr = abc").is_err());
    }

    #[test]
    fn default_config_is_valid() {
        let cfg = SweepConfig::default();
        cfg.validate().unwrap();
        assert_eq!(window_plan(&cfg, 1.0).0.len(), 2000);
    }

    #[test]
    fn validation_failures() {
        let bad = |text: &str| SweepConfig::parse(text).unwrap().validate().is_err();
        assert!(bad("window = 500:300"));
        assert!(bad("window = 300:700"));
        assert!(bad("h = 0.5, -1"));
        assert!(bad("rr = 1.0"));
        assert!(bad("size = 7"));
        assert!(bad("window = 300:300.1"));
    }

    fn small_cfg() -> SweepConfig {
        SweepConfig::parse(
            "size = 16\nt_max = 45\ndt = 0.1\nh = 0.5, 1.5\ndistances = 1, 2\nwindow = 10:20\nrr = 0.1",
        )
        .unwrap()
    }

    #[test]
    fn cell_series_matches_composition() {
        let mut cfg = small_cfg();
        for rescale in [false, true] {
            cfg.rescale = rescale;
            for &h in &[0.5, 1.5] {
                let spec = cfg.spec(h).unwrap();
                let full = simulate_series(&spec, Observable::Xx, &cfg.distances).unwrap();
                let got = cell_series(&cfg, Observable::Xx, h).unwrap();
                for (d, &ell) in cfg.distances.iter().enumerate() {
                    let mut s = full.time_series(ell).unwrap();
                    if rescale {
                        s = rescale_time(&s, h).unwrap();
                    }
                    let want = select_window(&s, 10.0, 20.0).unwrap();
                    assert_eq!(got[d], want, "h={h} ell={ell} rescale={rescale}");
                }
            }
        }
    }

    #[test]
    fn rescale_needs_data() {
        let mut cfg = small_cfg();
        cfg.rescale = true;
        cfg.fields = vec![0.2];
        let err = compute_sweep(&cfg).unwrap_err();
        assert!(matches!(err, Error::Cell { h, ell: 1, .. } if h == 0.2), "{err}");
    }

    #[test]
    fn sweep_rows_sorted() {
        let mut cfg = small_cfg();
        cfg.observables = vec![Observable::ZzConnected, Observable::Xx];
        let rows = compute_sweep(&cfg).unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.observable, r.ell, r.h)).collect();
        assert_eq!(
            keys,
            vec![
                (Observable::ZzConnected, 1, 0.5),
                (Observable::ZzConnected, 1, 1.5),
                (Observable::ZzConnected, 2, 0.5),
                (Observable::ZzConnected, 2, 1.5),
                (Observable::Xx, 1, 0.5),
                (Observable::Xx, 1, 1.5),
                (Observable::Xx, 2, 0.5),
                (Observable::Xx, 2, 1.5),
            ]
        );
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with(SWEEP_HEADER));
        assert_eq!(csv.lines().count(), 9);
        for row in &rows {
            assert!((row.rqa.rr_achieved - 0.1).abs() < 0.01);
        }
    }

    #[test]
    fn single_point_image_matches_export() {
        let dir = std::env::temp_dir().join(format!("qr-single-{}", std::process::id()));
        let mut cfg = small_cfg();
        cfg.fields = vec![1.5];
        cfg.distances = vec![2];
        cfg.images = true;
        cfg.out = dir.clone();
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 1);

        let series = &cell_series(&cfg, Observable::Xx, 1.5).unwrap()[0];
        let traj = embed(series, &cfg.embedding).unwrap();
        let rp = threshold_by_rate(&distance_matrix(&traj, cfg.embedding.metric).unwrap(), cfg.rr).unwrap();
        let reference = dir.join("reference.pgm");
        export_rp(&rp, &reference).unwrap();
        let a = fs::read(dir.join(image_name(Observable::Xx, 1.5, 2))).unwrap();
        assert_eq!(a, fs::read(&reference).unwrap());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn series_csv_round_trip() {
        let times = vec![300.0, 300.1, 300.2];
        let values = vec![vec![0.1, -0.25, 1e-17], vec![0.0, 0.5, 0.75]];
        let text = series_csv(Observable::Xx, &[1, 10], &times, &values);
        assert!(text.starts_with("t,xx_1,xx_10\n"));
        let s = read_series_csv(&text, Some("xx_10")).unwrap();
        assert_eq!(s.values(), &[0.0, 0.5, 0.75]);
        assert_eq!(s.t0, 300.0);
        assert!((s.dt - 0.1).abs() < 1e-12);
        assert_eq!(read_series_csv(&text, None).unwrap().values(), &values[0][..]);
        assert!(read_series_csv(&text, Some("t")).is_err());
        assert!(read_series_csv("t,x\n0,1\n1,2\n5,3\n", None).is_err());
    }
}
