//! One-dimensional quadrature and finite-difference stencils on uniform grids.

/// Composite Simpson rule over uniformly spaced samples.
///
/// Requires an even number of intervals (odd number of samples, at least 3).
pub fn simpson(values: &[f64], step: f64) -> f64 {
    let intervals = values.len().saturating_sub(1);
    assert!(
        intervals >= 2 && intervals.is_multiple_of(2),
        "simpson needs an even number of intervals, got {intervals}"
    );
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, v) in values.iter().enumerate().take(intervals).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    step / 3.0 * (values[0] + values[intervals] + 4.0 * odd + 2.0 * even)
}

/// Simpson rule of `f` over `[a, b]` with `intervals` panels (rounded up to even).
pub fn simpson_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let m = (intervals.max(2) + 1) & !1;
    let h = (b - a) / m as f64;
    let values: Vec<f64> = (0..=m).map(|i| f(a + h * i as f64)).collect();
    simpson(&values, h)
}

/// Area of the unit sphere `S^k` in `R^{k+1}`.
pub fn sphere_area(k: usize) -> f64 {
    use std::f64::consts::PI;
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_area(k - 2),
    }
}

/// Volume of the unit ball in `R^d`.
pub fn ball_volume(d: usize) -> f64 {
    sphere_area(d - 1) / d as f64
}

/// Central second-order first derivative at interior index `i`.
pub fn d1_central(v: &[f64], i: usize, h: f64) -> f64 {
    (v[i + 1] - v[i - 1]) / (2.0 * h)
}

/// Central second-order second derivative at interior index `i`.
pub fn d2_central(v: &[f64], i: usize, h: f64) -> f64 {
    (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h)
}

/// Second-order one-sided first derivative at the last sample.
pub fn d1_one_sided_end(v: &[f64], h: f64) -> f64 {
    let k = v.len() - 1;
    (3.0 * v[k] - 4.0 * v[k - 1] + v[k - 2]) / (2.0 * h)
}

/// Second-order one-sided first derivative at the first sample.
pub fn d1_one_sided_start(v: &[f64], h: f64) -> f64 {
    (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
}

/// Second-order second derivative at an end sample (four-point one-sided).
pub fn d2_one_sided(v: &[f64], at_end: bool, h: f64) -> f64 {
    let w = |j: usize| if at_end { v[v.len() - 1 - j] } else { v[j] };
    (2.0 * w(0) - 5.0 * w(1) + 4.0 * w(2) - w(3)) / (h * h)
}
