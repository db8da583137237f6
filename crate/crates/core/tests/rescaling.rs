use quench_rqa::pipeline::{compute_sweep, field_range, SweepConfig};

fn det_curve(rescale: bool) -> Vec<(f64, f64)> {
    let cfg = SweepConfig {
        fields: field_range(0.6, 1.5, 0.05).unwrap(),
        distances: vec![1],
        rescale,
        t_max: 500.0 / 0.6,
        ..SweepConfig::default()
    };
    compute_sweep(&cfg).unwrap().iter().map(|r| (r.h, r.rqa.det)).collect()
}

fn strictly_monotone(values: &[f64], rising: bool) -> bool {
    values.windows(2).all(|w| if rising { w[1] > w[0] } else { w[1] < w[0] })
}

fn split_at_critical(curve: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>) {
    let below = curve.iter().filter(|(h, _)| *h <= 1.0).map(|p| p.1).collect();
    let above = curve.iter().filter(|(h, _)| *h >= 1.0).map(|p| p.1).collect();
    (below, above)
}

/// With the timescale factored out, nearest-neighbour DET has a clean cusp at
/// h = 1; without it the curve below h = 1 is not monotone.
#[test]
fn rescaled_nearest_neighbour_det_peaks_at_critical_field() {
    let (below, above) = split_at_critical(&det_curve(true));
    assert!(strictly_monotone(&below, true), "{below:?}");
    assert!(strictly_monotone(&above, false), "{above:?}");

    let (below, _) = split_at_critical(&det_curve(false));
    assert!(!strictly_monotone(&below, true), "{below:?}");
}
