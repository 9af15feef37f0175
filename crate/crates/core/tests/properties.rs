use std::f64::consts::PI;

use capstab::conformal::{self, dot};
use capstab::delaunay;
use capstab::eigen::{jacobi_eigen, SquareMatrix};
use capstab::quadrature::sphere_area;
use capstab::stability::{self, AnalyzeOptions};
use capstab::surface::AngularMode;
use capstab::surface::RotationalCapillarySurface as Surface;
use capstab::{verify, Direction, Verdict};
use proptest::prelude::*;

const STEP: f64 = 1e-3;

fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim)
}

fn inside(v: Vec<f64>, radius: f64) -> Vec<f64> {
    let r = dot(&v, &v).sqrt();
    if r < 1.0 {
        v.iter().map(|c| c * radius).collect()
    } else {
        v.iter().map(|c| c * radius / (r * (1.0 + 1e-9))).collect()
    }
}

/// `(n, H, F)` with `F` a nonzero fraction of the cylinder force, so every
/// Delaunay kind except the sphere and hyperplane is reachable.
fn delaunay_params() -> impl Strategy<Value = (usize, f64, f64)> {
    (2usize..=4, 1.0f64..2.0, prop_oneof![-1.0f64..-0.05, 0.05f64..1.0])
        .prop_map(|(n, h, t)| (n, h, t * delaunay::equilibrium_force(n, h)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn directions_are_unit(v in vector(4).prop_filter("nonzero", |v| dot(v, v) > 1e-6)) {
        let d = Direction::normalized(v).unwrap();
        prop_assert!((dot(&d, &d).sqrt() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn mobius_maps_ball_to_ball(dim in 3usize..=5, a in vector(5), x in vector(5), ra in 0.0f64..0.999, rx in 0.0f64..1.0) {
        let a = inside(a[..dim].to_vec(), ra);
        let x = inside(x[..dim].to_vec(), rx);
        let y = conformal::mobius_map(&a, &x).unwrap().into_inner();
        let (aa, xx, ax) = (dot(&a, &a), dot(&x, &x), dot(&a, &x));
        let want = (1.0 - aa) * (1.0 - xx) / (1.0 - 2.0 * ax + aa * xx);
        prop_assert!((1.0 - dot(&y, &y) - want).abs() <= 1e-12);
        prop_assert!(dot(&y, &y) <= 1.0 + 1e-14);
    }

    #[test]
    fn mobius_fixes_the_sphere(a in vector(3), x in vector(3).prop_filter("nonzero", |v| dot(v, v) > 1e-6), ra in 0.0f64..0.99) {
        let a = inside(a, ra);
        let r = dot(&x, &x).sqrt();
        let x: Vec<f64> = x.iter().map(|c| c / r).collect();
        let y = conformal::mobius_map(&a, &x).unwrap();
        prop_assert!((y.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn killing_field_is_tangent_to_sphere(
        xi in vector(4).prop_filter("nonzero", |v| dot(v, v) > 1e-6),
        x in vector(4).prop_filter("nonzero", |v| dot(v, v) > 1e-6),
    ) {
        let xi = Direction::normalized(xi).unwrap();
        let r = dot(&x, &x).sqrt();
        let x: Vec<f64> = x.iter().map(|c| c / r).collect();
        prop_assert!(dot(&conformal::killing_field(&xi, &x), &x).abs() <= 1e-14);
    }

    #[test]
    fn jacobi_eigen_diagonalizes(dim in 2usize..=6, entries in prop::collection::vec(-10.0f64..10.0, 36)) {
        let rows: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| entries[i.min(j) * 6 + i.max(j)]).collect())
            .collect();
        let m = SquareMatrix::from_rows(&rows);
        let e = jacobi_eigen(&m, 1e-14);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        for (k, v) in e.vectors.iter().enumerate() {
            prop_assert!((dot(v, v) - 1.0).abs() <= 1e-12);
            for (l, w) in e.vectors.iter().enumerate().skip(k + 1) {
                prop_assert!(dot(v, w).abs() <= 1e-12, "vectors {k} {l}");
            }
            for i in 0..dim {
                let av: f64 = (0..dim).map(|j| m[(i, j)] * v[j]).sum();
                prop_assert!((av - e.values[k] * v[i]).abs() <= 1e-10 * (1.0 + m.max_abs()));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn meridians_keep_their_first_integral((n, h, f) in delaunay_params()) {
        let curve = delaunay::symmetric_segment(n, h, f, STEP).unwrap();
        prop_assert!(curve.force_drift() <= 1e-8, "drift {:e}", curve.force_drift());
        for w in curve.states.windows(2) {
            let ds = w[1].s - w[0].s;
            prop_assert!(ds > 0.0 && ds <= STEP * (1.0 + 1e-12));
        }
        // (x1)' = cos α and (x2)' = sin α by central differences, whose
        // truncation error is bounded by h²/6 · (α'² + |α''|)
        for w in curve.states.windows(3) {
            if (w[2].s - w[1].s - STEP).abs() > 1e-12 || (w[1].s - w[0].s - STEP).abs() > 1e-12 {
                continue;
            }
            let da = (w[2].alpha - w[0].alpha) / (2.0 * STEP);
            let dda = (w[2].alpha - 2.0 * w[1].alpha + w[0].alpha) / (STEP * STEP);
            let tol = STEP * STEP * (1.0 + da * da + dda.abs());
            let dx1 = (w[2].x1 - w[0].x1) / (2.0 * STEP);
            let dx2 = (w[2].x2 - w[0].x2) / (2.0 * STEP);
            prop_assert!((dx1 - w[1].alpha.cos()).abs() <= tol);
            prop_assert!((dx2 - w[1].alpha.sin()).abs() <= tol);
        }
    }

    #[test]
    fn surfaces_satisfy_their_invariants((n, h, f) in delaunay_params()) {
        let s = Surface::delaunay(n, h, f, STEP).unwrap();
        let nf = n as f64;
        for (i, st) in s.samples().iter().enumerate() {
            let k = s.shape_data_at(i);
            prop_assert!((nf * s.h - k.kappa_m - (nf - 1.0) * k.kappa_p).abs() <= 1e-10);
            if i > 0 && i + 1 < s.samples().len() {
                prop_assert!(st.radius_sq() < 1.0);
            }
        }
        let rings = s.rings().unwrap();
        prop_assert!((rings[0].theta - rings[1].theta).abs() <= 1e-8);

        let omega = s.wetted_region().unwrap();
        prop_assert!(omega.area > 0.0 && omega.area < sphere_area(n));
        for (a, m) in omega.first_moment.iter().enumerate() {
            let tol = if a == s.axis { 1e-10 } else { 1e-12 };
            prop_assert!(m.abs() <= tol, "component {a}: {m:e}");
        }
        prop_assert!(verify::check_centroid_consistency(&s).unwrap() <= 1e-6);

        let (trace, bound) = stability::trace_bound(&s);
        prop_assert!(trace <= bound + 1e-6 && bound <= 1e-6);
        let form = stability::q_form(&s).unwrap();
        prop_assert!((form.q.trace() - trace).abs() <= 1e-6 * trace.abs().max(1.0));
        let t = s.transverse_indices();
        for j in &t {
            prop_assert!((form.q[(*j, *j)] - form.q[(t[0], t[0])]).abs() <= 1e-10);
            prop_assert!(form.q[(s.axis, *j)].abs() <= 1e-10);
        }
    }

    /// The reduced entries agree with a full `(s, ψ)` product-grid quadrature
    /// of the defining integrand, including the off-diagonal entries.
    #[test]
    fn form_matches_product_grid(t in prop_oneof![-1.0f64..-0.05, 0.05f64..1.0], h in 1.0f64..2.0) {
        let f = t * delaunay::equilibrium_force(2, h);
        let s = Surface::delaunay(2, h, f, STEP).unwrap();
        let form = stability::q_form(&s).unwrap();
        let scale = form.q.max_abs().max(1.0);
        for a in 0..3 {
            for b in 0..3 {
                let entry = s
                    .integrate_product_grid(32, |x, nrm| {
                        let xn = dot(x, nrm);
                        let xx = dot(x, x);
                        let v = nrm[a] + s.h * x[a];
                        let w = (1.0 + xx) * nrm[b] - 2.0 * xn * x[b];
                        -4.0 * v * w
                    })
                    .unwrap();
                prop_assert!((entry - form.q[(a, b)]).abs() <= 1e-6 * scale, "Q[{a}][{b}] {entry} vs {}", form.q[(a, b)]);
            }
        }
    }

    /// `∂²E(φ[e]) → Q(e, e)` at second order in the grid step.
    #[test]
    fn second_variation_converges_to_form((h, t) in (1.0f64..2.0, prop_oneof![-1.0f64..-0.05, 0.05f64..1.0])) {
        let f = t * delaunay::equilibrium_force(2, h);
        let gap = |step: f64, mode: AngularMode| {
            let s = Surface::delaunay(2, h, f, step).unwrap();
            let idx = if mode == AngularMode::Zero { s.axis } else { s.transverse_indices()[0] };
            let q = stability::q_form(&s).unwrap().q[(idx, idx)];
            let e2 = stability::second_variation(&s, mode.index(), &stability::phi_profile(&s, mode)).unwrap();
            (e2 - q, q)
        };
        for mode in [AngularMode::Zero, AngularMode::One] {
            let (d1, q) = gap(2.0 * STEP, mode);
            let (d2, _) = gap(STEP, mode);
            if d1.abs() <= 1e-8 * q.abs().max(1.0) {
                prop_assert!(d2.abs() <= 1e-8 * q.abs().max(1.0));
                continue;
            }
            let ratio = d1 / d2;
            prop_assert!((3.2..=4.8).contains(&ratio), "{mode:?}: {d1:e} {d2:e}");
        }
    }

    /// Loosening the centroid tolerance never withdraws a centered-body verdict.
    #[test]
    fn verdict_is_monotone_in_centroid_tolerance((n, h, f) in delaunay_params(), exp in -12i32..-2) {
        let s = Surface::delaunay(n, h, f, STEP).unwrap();
        let tight = AnalyzeOptions { tol_centroid: 10f64.powi(exp), ..Default::default() };
        let loose = AnalyzeOptions { tol_centroid: 10f64.powi(exp + 2), ..Default::default() };
        let a = stability::assess(&s, &tight).unwrap();
        let b = stability::assess(&s, &loose).unwrap();
        if a.verdict == Verdict::UnstableTheorem1 {
            prop_assert_eq!(b.verdict, Verdict::UnstableTheorem1);
        }
        prop_assert!(!(a.verdict.is_unstable() && b.verdict == Verdict::Inconclusive));
    }
}

#[test]
fn disk_in_four_dimensions() {
    let d = Surface::equatorial_disk(3, STEP).unwrap();
    let w = d.wetted_region().unwrap();
    assert!((w.area - sphere_area(3) / 2.0).abs() < 1e-12);
    // unit 3-ball
    assert!((d.area() - 4.0 * PI / 3.0).abs() < 1e-10);
}
