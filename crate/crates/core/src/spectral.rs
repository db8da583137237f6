//! Non-recurrence baselines: mean absolute value and the inverse
//! participation ratio of the normalized Fourier spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::recurrence::TimeSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// `ω_k = k Δω`, `Δω = 2π / (N Δt)`, `k = 0..N`.
    pub frequencies: Vec<f64>,
    /// `|ρ̂(ω_k)|`
    pub amplitudes: Vec<f64>,
    /// `p_k = |ρ̃(ω_k)|² Δω`, summing to one.
    pub probabilities: Vec<f64>,
    pub ipr: f64,
}

/// Raw DFT of the window (no detrending, zero frequency kept), then
/// `IPR = Σ_k p_k²`.
///
/// The start time only contributes a phase `e^{-iω_k t_0}`, which drops out of
/// every magnitude.
pub fn ipr(series: &TimeSeries) -> Result<SpectrumReport> {
    if series.dim() != 1 {
        return Err(Error::Recurrence("IPR needs a scalar series".into()));
    }
    let samples: Vec<Complex64> = series
        .values()
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    ipr_complex(samples, series.dt)
}

/// Same as [`ipr`] for complex samples spaced by `dt`.
pub fn ipr_complex(mut samples: Vec<Complex64>, dt: f64) -> Result<SpectrumReport> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::SeriesTooShort(format!("IPR needs N >= 2 samples, got {n}")));
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut samples);

    let d_omega = 2.0 * PI / (n as f64 * dt);
    let frequencies = (0..n).map(|k| k as f64 * d_omega).collect();
    let amplitudes: Vec<f64> = samples.iter().map(|z| z.norm()).collect();
    let power: f64 = samples.iter().map(|z| z.norm_sqr()).sum();
    if power == 0.0 {
        return Err(Error::Recurrence("IPR undefined for an all-zero series".into()));
    }
    let probabilities: Vec<f64> = samples.iter().map(|z| z.norm_sqr() / power).collect();
    // Σ|X|⁴ / (Σ|X|²)² divides once, so integer spectra stay exact
    let ipr = samples.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() / (power * power);
    Ok(SpectrumReport {
        frequencies,
        amplitudes,
        probabilities,
        ipr,
    })
}

pub fn mean_abs(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::SeriesTooShort("mean of an empty window".into()));
    }
    Ok(values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: Vec<f64>) -> TimeSeries {
        TimeSeries::scalar(v, 0.1, 300.0)
    }

    /// Direct O(N²) transform, independent of the FFT.
    fn naive_dft(x: &[f64], dt: f64, t0: f64) -> Vec<Complex64> {
        let n = x.len();
        let dw = 2.0 * PI / (n as f64 * dt);
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(m, &v)| v * Complex64::from_polar(1.0, -(k as f64) * dw * (t0 + m as f64 * dt)))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn impulse_is_flat() {
        for n in [2usize, 7, 64, 1000, 2000, 2001] {
            let mut v = vec![0.0; n];
            v[0] = 1.0;
            let rep = ipr(&series(v)).unwrap();
            assert_eq!(rep.ipr, 1.0 / n as f64, "n={n}");
        }
    }

    #[test]
    fn complex_tone_is_monochromatic() {
        let n = 2000;
        for bin in [0usize, 1, 37, 1999] {
            let tone: Vec<Complex64> = (0..n)
                .map(|m| Complex64::from_polar(0.8, 2.0 * PI * (bin * m) as f64 / n as f64))
                .collect();
            let rep = ipr_complex(tone, 0.1).unwrap();
            assert!((rep.ipr - 1.0).abs() < 1e-10, "bin {bin}: {}", rep.ipr);
        }
    }

    #[test]
    fn tones() {
        // a real cosine at bin 5 splits between bins 5 and N-5: two equal weights
        let n = 200;
        let cosine: Vec<f64> = (0..n).map(|m| (2.0 * PI * 5.0 * m as f64 / n as f64).cos()).collect();
        assert!((ipr(&series(cosine)).unwrap().ipr - 0.5).abs() < 1e-10);

        // a constant is the zero-frequency tone
        assert!((ipr(&series(vec![0.3; n])).unwrap().ipr - 1.0).abs() < 1e-10);

        // zero-frequency plus Nyquist tone of equal amplitude
        let two: Vec<f64> = (0..n).map(|m| 1.0 + if m % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((ipr(&series(two)).unwrap().ipr - 0.5).abs() < 1e-10);
    }

    #[test]
    fn normalization_and_frequencies() {
        let v: Vec<f64> = (0..50).map(|m| ((m * m) as f64 * 0.37).sin()).collect();
        let rep = ipr(&series(v.clone())).unwrap();
        assert!((rep.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(rep.ipr > 0.0 && rep.ipr <= 1.0);
        assert!((rep.frequencies[1] - 2.0 * PI / (50.0 * 0.1)).abs() < 1e-12);

        let naive = naive_dft(&v, 0.1, 300.0);
        for (a, z) in rep.amplitudes.iter().zip(&naive) {
            assert!((a - z.norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn errors() {
        assert!(ipr(&series(vec![1.0])).is_err());
        assert!(ipr(&series(vec![0.0; 4])).is_err());
        assert!(mean_abs(&[]).is_err());
    }

    #[test]
    fn mean_abs_examples() {
        assert_eq!(mean_abs(&[-0.7; 5]).unwrap(), 0.7);
        assert_eq!(mean_abs(&[-1.0, 1.0]).unwrap(), 1.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn parseval(v in prop::collection::vec(-1.0f64..1.0, 2..300)) {
                prop_assume!(v.iter().any(|x| x.abs() > 1e-3));
                let rep = ipr(&series(v.clone())).unwrap();
                let time: f64 = v.iter().map(|x| x * x).sum();
                let freq: f64 = rep.amplitudes.iter().map(|a| a * a).sum::<f64>() / v.len() as f64;
                prop_assert!((time - freq).abs() <= 1e-8 * time);
            }

            #[test]
            fn scale_invariant(v in prop::collection::vec(-1.0f64..1.0, 2..300), c in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0]) {
                prop_assume!(v.iter().any(|x| x.abs() > 1e-3));
                let a = ipr(&series(v.clone())).unwrap().ipr;
                let b = ipr(&series(v.iter().map(|x| x * c).collect())).unwrap().ipr;
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }
    }
}
