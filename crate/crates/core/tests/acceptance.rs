//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use prolatoscope::fieldmodel::*;
use prolatoscope::metrics::{log_spaced, select_max_modes, superres_factor, sweep_s_vs_n};
use prolatoscope::special::GaussLegendre;
use prolatoscope::stochastic::{photons_from_power, run_ensemble, NoiseKind, NoiseModel};
use prolatoscope::ProlateBasis;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn standard() -> ProlateBasis {
    ProlateBasis::build(1.0, 18, 256).unwrap()
}

fn eigenvalue_regression() -> Outcome {
    let t = Instant::now();
    let b = standard();
    let elapsed = t.elapsed();
    let l17 = b.lambda(17).unwrap();
    let rel = (l17 / 4.183e-50 - 1.0).abs();
    check(
        rel <= 1e-3 && elapsed < Duration::from_secs(120),
        format!(
            "lambda_17 = {l17:.6e}, relative error {rel:.3e} (limit 1e-3), build {elapsed:.2?}"
        ),
    )
}

fn psf_triple() -> Outcome {
    let t = Instant::now();
    let sr = superres_factor(&standard(), 7).unwrap();
    check(
        (sr.w - 1.895).abs() <= 1e-3 && (sr.w_l - 0.252).abs() <= 1e-3 && (sr.s - 7.5).abs() <= 0.1,
        format!(
            "W = {:.6}, W_L = {:.6}, S = {:.4} in {:.2?}",
            sr.w,
            sr.w_l,
            sr.s,
            t.elapsed()
        ),
    )
}

fn trace_identity() -> Outcome {
    let b = ProlateBasis::build(1.0, 31, 256).unwrap();
    let sum: f64 = (0..31).map(|n| b.lambda(n).unwrap()).sum();
    let residual = (sum - 2.0 / PI).abs();
    let tail = b.lambda(30).unwrap();
    check(
        residual <= 1e-10 && tail < 1e-12,
        format!("|sum - 2/pi| = {residual:.3e}, last term {tail:.3e}"),
    )
}

fn kernel_identity() -> Outcome {
    let b = ProlateBasis::build(1.0, 20, 256).unwrap();
    let grid: Vec<f64> = (0..41).map(|i| -1.0 + 0.05 * i as f64).collect();
    let phis: Vec<Vec<f64>> = grid.iter().map(|&s| b.phi_all(s, 20).unwrap()).collect();
    let lam: Vec<f64> = (0..20).map(|n| b.lambda(n).unwrap()).collect();
    let mut worst = 0.0f64;
    for (i, &s) in grid.iter().enumerate() {
        for (j, &t) in grid.iter().enumerate() {
            let series: f64 = (0..20).map(|n| lam[n] * phis[i][n] * phis[j][n]).sum();
            worst = worst.max((series - sinc_kernel(1.0, s - t)).abs());
        }
    }
    check(
        worst <= 1e-6,
        format!("sup error {worst:.3e} over 41x41 grid, 20 terms"),
    )
}

fn fourier_self_mapping() -> Outcome {
    let b = standard();
    let c = b.c();
    let rule = GaussLegendre::new(200);
    let mut worst = 0.0f64;
    for n in 0..=6 {
        for xi in [0.0, 0.3, 1.7, 4.0] {
            let re = rule.integrate(-1.0, 1.0, |s| {
                b.eval_phi(n, s).unwrap() * (c * s * xi).cos()
            });
            let im = rule.integrate(-1.0, 1.0, |s| {
                -b.eval_phi(n, s).unwrap() * (c * s * xi).sin()
            });
            let rhs = minus_i_pow(n) * (2.0 * PI / c).sqrt() * b.eval_psi(n, xi).unwrap();
            worst = worst.max((Complex64::new(re, im) - rhs).norm());
        }
    }
    check(
        worst <= 1e-8,
        format!("max residual {worst:.3e} for n <= 6"),
    )
}

fn photon_conversion() -> Outcome {
    let n = photons_from_power(1e-3, 1064e-9, 1e-3).unwrap();
    let rel = (n / 5.3e12 - 1.0).abs();
    check(
        rel <= 0.02,
        format!("N = {n:.4e}, relative error {rel:.3e}"),
    )
}

fn rayleigh_and_reconstruction() -> Outcome {
    let b = standard();
    let obj = ObjectField::double_gaussian(1e12, 0.5, 0.1).unwrap();
    let image = forward_image_kernel(&obj, 1.0, &default_object_grid()).unwrap();
    let a = project_coeffs(&obj, &b, 7).unwrap();
    let core = uniform_grid(-1.0, 1.0, 1e-3).unwrap();
    let rec = reconstruct_object(&a, &b, 7, &core).unwrap();
    let mi = count_local_maxima(&image.real_parts());
    let mr = local_maxima(&core, &rec.real_parts());
    check(
        mi == 1 && mr.len() == 2,
        format!(
            "image maxima {mi}, L=7 reconstruction maxima {} at {:?}",
            mr.len(),
            mr
        ),
    )
}

fn spectrum_closeness() -> Outcome {
    let b = standard();
    let obj = ObjectField::double_gaussian(1.0, 0.5, 0.1).unwrap();
    let grid = default_spectrum_grid();
    let exact = direct_spectrum(&obj, 1.0, &grid).unwrap();
    let a = project_coeffs(&obj, &b, 11).unwrap();
    let mut windows = Vec::new();
    let mut rms7 = f64::NAN;
    for l in [5, 7, 11] {
        let spec = reconstruct_spectrum(&a, &b, l, &grid).unwrap();
        if l == 7 {
            rms7 = relative_rms(&spec, &exact, 8.0).unwrap();
        }
        windows.push(closeness_window(&spec, &exact, DEFAULT_CLOSENESS).unwrap());
    }
    check(
        rms7 <= DEFAULT_CLOSENESS && windows.windows(2).all(|w| w[1] >= w[0]),
        format!("L=7 relative RMS over |xi|<=8: {rms7:.4}; windows L=5,7,11: {windows:?}"),
    )
}

fn variance_law() -> Outcome {
    let t = Instant::now();
    let b = standard();
    let obj = ObjectField::double_gaussian(1e12, 0.5, 0.1).unwrap();
    let mut worst = 0.0f64;
    for model in [
        NoiseModel::coherent(),
        NoiseModel::squeezed(10f64.ln()).unwrap(),
    ] {
        let e = run_ensemble(&obj, &b, 4, &model, 100_000, 17).unwrap();
        for s in e.mode_stats() {
            let expected = (-2.0 * model.r).exp() / (4.0 * b.lambda(s.k).unwrap());
            worst = worst.max((s.var_re / expected - 1.0).abs());
        }
    }
    let elapsed = t.elapsed();
    check(
        worst <= 0.05 && elapsed < Duration::from_secs(60),
        format!(
            "max relative variance error {worst:.4} (k <= 3, r = 0 and ln 10) in {elapsed:.2?}"
        ),
    )
}

fn monte_carlo_ordering() -> Outcome {
    let b = standard();
    let bins: Vec<f64> = (1..=8).map(|i| i as f64).collect();
    let dev = |n: f64, m: NoiseModel| {
        let obj = ObjectField::double_gaussian(n, 0.5, 0.1).unwrap();
        run_ensemble(&obj, &b, 7, &m, 5, 12345)
            .unwrap()
            .relative_deviation(&b, &bins)
            .unwrap()
    };
    let base = dev(1e12, NoiseModel::coherent());
    let bright = dev(1e13, NoiseModel::coherent());
    let squeezed = dev(1e12, NoiseModel::squeezed(10f64.ln()).unwrap());
    let ok = (0..bins.len()).all(|i| bright[i] < base[i] && squeezed[i] < base[i]);
    check(
        ok,
        format!(
            "{} bins; mean ratio coherent 1e12 / 1e13 = {:.3}, coherent / squeezed = {:.3}",
            bins.len(),
            base.iter().zip(&bright).map(|(a, b)| a / b).sum::<f64>() / bins.len() as f64,
            base.iter().zip(&squeezed).map(|(a, b)| a / b).sum::<f64>() / bins.len() as f64,
        ),
    )
}

fn sweep_ordering() -> Outcome {
    let b = standard();
    let r = 10f64.ln();
    let photons = log_spaced(3.0, 15.0, 13);
    let models = [NoiseModel::coherent(), NoiseModel::squeezed(r).unwrap()];
    let pts = sweep_s_vs_n(&photons, &models, &b, 1e-2).unwrap();
    let s_of =
        |k: NoiseKind| -> Vec<f64> { pts.iter().filter(|p| p.model == k).map(|p| p.s).collect() };
    let coh = s_of(NoiseKind::Coherent);
    let sq = s_of(NoiseKind::Squeezed);
    let monotone = coh.windows(2).all(|w| w[1] >= w[0]) && sq.windows(2).all(|w| w[1] >= w[0]);
    let dominates = coh.iter().zip(&sq).all(|(c, s)| s >= c);
    let mut shift_ok = true;
    for &n in &photons {
        let lsq = select_max_modes(&b, &models[1], n, 1e-2).unwrap().l_star;
        let lcoh = select_max_modes(&b, &models[0], (2.0 * r).exp() * n, 1e-2)
            .unwrap()
            .l_star;
        shift_ok &= lsq == lcoh;
    }
    check(
        monotone && dominates && shift_ok,
        format!(
            "monotone {monotone}, squeezed >= coherent {dominates}, shift identity {shift_ok}; S_coh {:.3}..{:.3}, S_sq {:.3}..{:.3}",
            coh[0], coh[coh.len() - 1], sq[0], sq[sq.len() - 1]
        ),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_prolatoscope");
    let root = tempfile::tempdir().unwrap();
    let cache = root.path().join("cache");
    let go = |args: &[&str], out: &Path| {
        Command::new(bin)
            .args(args)
            .arg("--out-dir")
            .arg(out)
            .env("PROLATOSCOPE_CACHE", &cache)
            .output()
            .unwrap()
            .status
            .success()
    };
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    if !go(&["basis"], &a) {
        return Err("basis command failed".into());
    }
    for cmd in ["forward", "reconstruct", "montecarlo", "psf", "sweep"] {
        for dir in [&a, &b] {
            if !go(&[cmd], dir) {
                return Err(format!("{cmd} failed"));
            }
        }
    }
    let mut compared = 0;
    for entry in std::fs::read_dir(&b).unwrap() {
        let p = entry.unwrap().path();
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        let strip = |path: &Path| -> String {
            std::fs::read_to_string(path)
                .unwrap()
                .lines()
                .filter(|l| !l.contains("\"timestamp\"") && !l.contains("\"out-dir\""))
                .collect::<Vec<_>>()
                .join("\n")
        };
        if strip(&p) != strip(&a.join(&name)) {
            return Err(format!("{name} differs between runs"));
        }
        compared += 1;
    }
    check(
        compared >= 20,
        format!("{compared} files identical across runs (timestamps excluded)"),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("eigenvalue regression", eigenvalue_regression),
        ("PSF triple", psf_triple),
        ("trace identity", trace_identity),
        ("kernel identity", kernel_identity),
        ("Fourier self-mapping", fourier_self_mapping),
        ("photon conversion", photon_conversion),
        (
            "Rayleigh failure / reconstruction success",
            rayleigh_and_reconstruction,
        ),
        ("spectrum closeness", spectrum_closeness),
        ("Monte Carlo variance law", variance_law),
        ("Monte Carlo deviation ordering", monte_carlo_ordering),
        ("super-resolution sweep ordering", sweep_ordering),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(d) => println!("PASS {:>2} {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
