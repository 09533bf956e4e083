//! Series convergence of the object expansion against direct quadrature.

use std::sync::OnceLock;

use prolatoscope::fieldmodel::*;
use prolatoscope::special::GaussLegendre;
use prolatoscope::ProlateBasis;

// K = 17 leaves a 7e-3 Parseval deficit for sigma = 0.1; 41 modes converge.
const K_HIGH: usize = 41;

fn high() -> &'static ProlateBasis {
    static B: OnceLock<ProlateBasis> = OnceLock::new();
    B.get_or_init(|| ProlateBasis::build(1.0, K_HIGH, 512).unwrap())
}

fn standard() -> &'static ProlateBasis {
    static B: OnceLock<ProlateBasis> = OnceLock::new();
    B.get_or_init(|| ProlateBasis::build(1.0, 18, 256).unwrap())
}

fn object() -> ObjectField {
    ObjectField::double_gaussian(1.0, 0.5, 0.1).unwrap()
}

#[test]
fn normalization_by_independent_quadrature() {
    let obj = object();
    let rule = GaussLegendre::new(400);
    let norm: f64 = (0..8)
        .map(|p| {
            let lo = -1.0 + 0.25 * p as f64;
            rule.integrate(lo, lo + 0.25, |s| obj.value(s).powi(2))
        })
        .sum();
    assert!((norm - 1.0).abs() < 1e-12);
}

#[test]
fn parseval_deficit_vanishes() {
    let obj = object();
    let a = project_coeffs(&obj, high(), K_HIGH).unwrap();
    let deficit = 1.0 - a.sum_sq(K_HIGH);
    assert!(
        (0.0..=1e-6).contains(&deficit) || deficit.abs() < 1e-14,
        "{deficit:e}"
    );
    // partial sums never exceed the photon budget
    for l in 1..=K_HIGH {
        assert!(a.sum_sq(l) <= 1.0 + 1e-12);
    }
}

#[test]
fn full_reconstruction_l2_error() {
    let obj = object();
    let a = project_coeffs(&obj, high(), K_HIGH).unwrap();
    let grid = uniform_grid(-1.0, 1.0, 1e-3).unwrap();
    let rec = reconstruct_object(&a, high(), K_HIGH, &grid).unwrap();
    let (mut num, mut den) = (0.0, 0.0);
    for (s, v) in grid.iter().zip(&rec.values) {
        let e = obj.value(*s);
        num += (v.re - e).powi(2) + v.im.powi(2);
        den += e * e;
    }
    let rel = (num / den).sqrt();
    assert!(rel <= 1e-4, "relative L2 error {rel:e}");
}

#[test]
fn spectrum_series_matches_direct_transform() {
    let obj = object();
    let xi = [0.0, 0.5, 3.0, 8.0];
    let a = project_coeffs(&obj, standard(), 17).unwrap();
    let series = reconstruct_spectrum(&a, standard(), 17, &xi).unwrap();
    let direct = direct_spectrum(&obj, 1.0, &xi).unwrap();
    for (s, d) in series.values.iter().zip(&direct.values) {
        assert!((s - d).norm() <= 1e-6, "{s} vs {d}");
    }
}

#[test]
fn image_two_paths_agree_at_seventeen_modes() {
    let obj = object();
    let a = project_coeffs(&obj, standard(), 17).unwrap();
    let grid = uniform_grid(-1.0, 1.0, 0.01).unwrap();
    let k = forward_image_kernel(&obj, 1.0, &grid).unwrap();
    let s = forward_image_series(&a, standard(), &grid).unwrap();
    let worst = k
        .values
        .iter()
        .zip(&s.values)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst:e}");
}

#[test]
fn point_source_limit_of_rect_coefficients() {
    let b = standard();
    let a3 = project_coeffs(&ObjectField::rect(1.0, 1e-3).unwrap(), b, 8).unwrap();
    let a4 = project_coeffs(&ObjectField::rect(1.0, 1e-4).unwrap(), b, 8).unwrap();
    for k in (0..8).step_by(2) {
        let phi0 = b.eval_phi(k, 0.0).unwrap();
        let r3 = a3.values[k].re / (1e-3f64.sqrt() * phi0);
        let r4 = a4.values[k].re / (1e-4f64.sqrt() * phi0);
        assert!((r3 / r4 - 1.0).abs() <= 0.01, "k={k}: {r3} {r4}");
    }
}
