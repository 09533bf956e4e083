//! Quantum fluctuations as c-number Gaussian variables (antinormal
//! ordering), noisy reconstructed coefficients and seeded ensembles.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldmodel::{
    minus_i_pow, project_coeffs, spectrum_series, CoeffKind, CoeffVector, ObjectField,
};
use crate::prolate::ProlateBasis;

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light, m/s.
pub const LIGHT_SPEED: f64 = 2.997_924_58e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Coherent,
    Squeezed,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Coherent => "coherent",
            NoiseKind::Squeezed => "squeezed",
        }
    }
}

/// Amplitude-squeezed minimum-uncertainty noise: `Var X = e^{-2r}/4`,
/// `Var Y = e^{2r}/4`. Coherent light is `r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub r: f64,
}

impl NoiseModel {
    pub fn coherent() -> Self {
        NoiseModel {
            kind: NoiseKind::Coherent,
            r: 0.0,
        }
    }

    pub fn squeezed(r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::invalid(format!(
                "squeezing parameter must be finite and non-negative, got {r}"
            )));
        }
        Ok(NoiseModel {
            kind: NoiseKind::Squeezed,
            r,
        })
    }

    pub fn x_variance(&self) -> f64 {
        (-2.0 * self.r).exp() / 4.0
    }

    pub fn y_variance(&self) -> f64 {
        (2.0 * self.r).exp() / 4.0
    }
}

/// Fluctuations for modes `k < L`: `alpha` for the object modes and `beta`
/// for the wing (vacuum) modes.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDraw {
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
}

impl NoiseDraw {
    pub fn zero(l: usize) -> Self {
        NoiseDraw {
            alpha: vec![Complex64::new(0.0, 0.0); l],
            beta: vec![Complex64::new(0.0, 0.0); l],
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

/// Independent substream for one trial.
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws modes in ascending order, `alpha` before `beta`, `X` before `Y`.
pub fn sample_draw(model: &NoiseModel, l: usize, seed: u64, trial: u64) -> Result<NoiseDraw> {
    if l == 0 {
        return Err(Error::invalid("mode count must be at least 1"));
    }
    let sx = model.x_variance().sqrt();
    let sy = model.y_variance().sqrt();
    let mut rng = trial_rng(seed, trial);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut draw = NoiseDraw::zero(l);
    for k in 0..l {
        let ax = sx * normal();
        let ay = sy * normal();
        let bx = sx * normal();
        let by = sy * normal();
        draw.alpha[k] = Complex64::new(ax, ay);
        draw.beta[k] = Complex64::new(bx, by);
    }
    Ok(draw)
}

/// `alpha_k^(r) = (a_k + dalpha_k) + sqrt((1 - lambda_k)/lambda_k) dbeta_k`.
pub fn noisy_reconstruct(
    coeffs: &CoeffVector,
    basis: &ProlateBasis,
    l: usize,
    draw: &NoiseDraw,
) -> Result<CoeffVector> {
    let amp = amplification_factors(basis, l)?;
    reconstruct_with(coeffs, &amp, draw)
}

fn amplification_factors(basis: &ProlateBasis, l: usize) -> Result<Vec<f64>> {
    if l == 0 || l > basis.num_modes() {
        return Err(Error::invalid(format!(
            "mode count L = {l} must lie in 1..={}",
            basis.num_modes()
        )));
    }
    basis.modes()[..l]
        .iter()
        .map(|m| {
            let g = m.amplification();
            if m.lambda().value() == 0.0 || !g.is_finite() {
                Err(Error::LambdaUnderflow { mode: m.index() })
            } else {
                Ok(g)
            }
        })
        .collect()
}

fn reconstruct_with(coeffs: &CoeffVector, amp: &[f64], draw: &NoiseDraw) -> Result<CoeffVector> {
    let l = amp.len();
    if coeffs.kind != CoeffKind::Object {
        return Err(Error::invalid(
            "noisy reconstruction needs object-side coefficients",
        ));
    }
    if coeffs.len() < l || draw.len() < l {
        return Err(Error::invalid(format!(
            "need {l} coefficients and draws, got {} and {}",
            coeffs.len(),
            draw.len()
        )));
    }
    let values = (0..l)
        .map(|k| coeffs.values[k] + draw.alpha[k] + amp[k] * draw.beta[k])
        .collect();
    Ok(CoeffVector {
        kind: CoeffKind::Reconstructed,
        values,
    })
}

/// Seeded set of noisy reconstructions.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub seed: u64,
    pub model: NoiseModel,
    pub l: usize,
    pub photons: f64,
    pub c: f64,
    pub basis_checksum: String,
    /// Noise-free coefficients `a_k`.
    pub mean_coeffs: CoeffVector,
    pub trials: Vec<CoeffVector>,
}

/// Runs `trials` reconstructions in parallel. Trial `t` uses substream `t`
/// of `seed`, so the result does not depend on scheduling.
pub fn run_ensemble(
    object: &ObjectField,
    basis: &ProlateBasis,
    l: usize,
    model: &NoiseModel,
    trials: usize,
    seed: u64,
) -> Result<Ensemble> {
    if trials == 0 {
        return Err(Error::invalid("trial count must be at least 1"));
    }
    let coeffs = project_coeffs(object, basis, l)?;
    let amp = amplification_factors(basis, l)?;
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let draw = sample_draw(model, l, seed, t)?;
            reconstruct_with(&coeffs, &amp, &draw)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble {
        seed,
        model: *model,
        l,
        photons: object.photons(),
        c: basis.c(),
        basis_checksum: basis.checksum(),
        mean_coeffs: coeffs,
        trials: results,
    })
}

/// Per-mode sample statistics of the real and imaginary parts.
#[derive(Debug, Clone, Serialize)]
pub struct ModeStats {
    pub k: usize,
    pub mean_re: f64,
    pub mean_im: f64,
    pub var_re: f64,
    pub var_im: f64,
}

impl Ensemble {
    pub fn mode_stats(&self) -> Vec<ModeStats> {
        let t = self.trials.len() as f64;
        let denom = (t - 1.0).max(1.0);
        (0..self.l)
            .map(|k| {
                let mean_re = self.trials.iter().map(|c| c.values[k].re).sum::<f64>() / t;
                let mean_im = self.trials.iter().map(|c| c.values[k].im).sum::<f64>() / t;
                let var_re = self
                    .trials
                    .iter()
                    .map(|c| (c.values[k].re - mean_re).powi(2))
                    .sum::<f64>()
                    / denom;
                let var_im = self
                    .trials
                    .iter()
                    .map(|c| (c.values[k].im - mean_im).powi(2))
                    .sum::<f64>()
                    / denom;
                ModeStats {
                    k,
                    mean_re,
                    mean_im,
                    var_re,
                    var_im,
                }
            })
            .collect()
    }

    /// Spectrum of each trial read out in the amplitude (X) quadrature:
    /// `f_X(xi) = sum_k (-i)^k Re(alpha_k^(r)) psi_k(xi)`.
    pub fn trial_spectra(&self, basis: &ProlateBasis, grid: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        self.trials
            .par_iter()
            .map(|c| {
                let x: Vec<Complex64> =
                    c.values.iter().map(|v| Complex64::new(v.re, 0.0)).collect();
                spectrum_series(&x, basis, self.l, grid)
            })
            .collect()
    }

    /// Noise-free truncated spectrum `sum_{k<L} (-i)^k a_k psi_k(xi)`.
    pub fn noise_free_spectrum(
        &self,
        basis: &ProlateBasis,
        grid: &[f64],
    ) -> Result<Vec<Complex64>> {
        spectrum_series(&self.mean_coeffs.values, basis, self.l, grid)
    }

    /// Per-bin RMS over trials of `|f_X - f|`, divided by `|f|`.
    pub fn relative_deviation(&self, basis: &ProlateBasis, grid: &[f64]) -> Result<Vec<f64>> {
        let exact = self.noise_free_spectrum(basis, grid)?;
        let spectra = self.trial_spectra(basis, grid)?;
        let t = spectra.len() as f64;
        Ok((0..grid.len())
            .map(|i| {
                let ms = spectra
                    .iter()
                    .map(|s| (s[i] - exact[i]).norm_sqr())
                    .sum::<f64>()
                    / t;
                ms.sqrt() / exact[i].norm()
            })
            .collect())
    }

    /// One row per `(trial, k)`: `trial,k,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,k,re,im\n");
        for (t, c) in self.trials.iter().enumerate() {
            for (k, v) in c.values.iter().enumerate() {
                let _ = writeln!(out, "{t},{k},{:.16e},{:.16e}", v.re, v.im);
            }
        }
        out
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "seed": self.seed,
            "model": self.model.kind.as_str(),
            "r": self.model.r,
            "L": self.l,
            "photons": self.photons,
            "c": self.c,
            "trials": self.trials.len(),
            "basis_checksum": self.basis_checksum,
            "quadrature": "X",
            "modes": self.mode_stats(),
        })
    }
}

/// Mean photon number `P t λ / (h c)`.
pub fn photons_from_power(power: f64, wavelength: f64, time: f64) -> Result<f64> {
    for (name, v) in [("power", power), ("wavelength", wavelength), ("time", time)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(power * time * wavelength / (PLANCK * LIGHT_SPEED))
}

/// `| |f_k|² + |g_k|² - |a_k|² |` for the beam-splitter means
/// `f_k = (-i)^k sqrt(lambda) a_k`, `g_k = (-i)^k sqrt(1 - lambda) a_k`.
pub fn beamsplitter_energy_check(a: Complex64, k: usize, lambda: f64) -> f64 {
    let (f, g) = beamsplitter_means(a, k, lambda);
    (f.norm_sqr() + g.norm_sqr() - a.norm_sqr()).abs()
}

/// `(f_k, g_k)`, the transmitted and wing-scattered classical means.
pub fn beamsplitter_means(a: Complex64, k: usize, lambda: f64) -> (Complex64, Complex64) {
    let phase = minus_i_pow(k);
    (phase * lambda.sqrt() * a, phase * (1.0 - lambda).sqrt() * a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::sync::OnceLock;

    fn basis() -> &'static ProlateBasis {
        static B: OnceLock<ProlateBasis> = OnceLock::new();
        B.get_or_init(|| ProlateBasis::build(1.0, 18, 256).unwrap())
    }

    fn variance(xs: &[f64]) -> f64 {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    }

    #[test]
    fn coherent_draw_variance() {
        let m = NoiseModel::coherent();
        let xs: Vec<f64> = (0..100_000)
            .map(|t| sample_draw(&m, 1, 7, t).unwrap().alpha[0].re)
            .collect();
        let v = variance(&xs);
        assert!((0.24..=0.26).contains(&v), "{v}");
    }

    #[test]
    fn squeezed_draw_variances() {
        let m = NoiseModel::squeezed(10f64.ln()).unwrap();
        let draws: Vec<Complex64> = (0..100_000)
            .map(|t| sample_draw(&m, 1, 11, t).unwrap().alpha[0])
            .collect();
        let vx = variance(&draws.iter().map(|d| d.re).collect::<Vec<_>>());
        let vy = variance(&draws.iter().map(|d| d.im).collect::<Vec<_>>());
        assert_relative_eq!(vx, 0.0025, max_relative = 0.05);
        assert_relative_eq!(vy, 25.0, max_relative = 0.05);
        assert_relative_eq!(
            m.x_variance() * m.y_variance(),
            1.0 / 16.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn draws_are_deterministic_and_distinct() {
        let m = NoiseModel::coherent();
        assert_eq!(
            sample_draw(&m, 5, 1, 3).unwrap(),
            sample_draw(&m, 5, 1, 3).unwrap()
        );
        assert_ne!(
            sample_draw(&m, 5, 1, 3).unwrap(),
            sample_draw(&m, 5, 1, 4).unwrap()
        );
        assert!(sample_draw(&m, 0, 1, 3).is_err());
    }

    #[test]
    fn longer_draw_extends_shorter() {
        let m = NoiseModel::coherent();
        let a = sample_draw(&m, 3, 9, 0).unwrap();
        let b = sample_draw(&m, 6, 9, 0).unwrap();
        assert_eq!(a.alpha[..], b.alpha[..3]);
    }

    #[test]
    fn zero_draw_returns_object_coefficients() {
        let obj = ObjectField::double_gaussian(1.0, 0.5, 0.1).unwrap();
        let a = project_coeffs(&obj, basis(), 7).unwrap();
        let r = noisy_reconstruct(&a, basis(), 7, &NoiseDraw::zero(7)).unwrap();
        assert_eq!(r.values, a.values);
        assert_eq!(r.kind, CoeffKind::Reconstructed);
    }

    #[test]
    fn variance_law_and_squeezing_ratio() {
        let obj = ObjectField::double_gaussian(1e12, 0.5, 0.1).unwrap();
        let b = basis();
        let coh = run_ensemble(&obj, b, 4, &NoiseModel::coherent(), 100_000, 5).unwrap();
        let sq = run_ensemble(
            &obj,
            b,
            4,
            &NoiseModel::squeezed(10f64.ln()).unwrap(),
            100_000,
            5,
        )
        .unwrap();
        let (sc, ss) = (coh.mode_stats(), sq.mode_stats());
        for k in 0..4 {
            let lam = b.lambda(k).unwrap();
            assert_relative_eq!(sc[k].var_re, 1.0 / (4.0 * lam), max_relative = 0.05);
            assert_relative_eq!(sc[k].var_re / ss[k].var_re, 100.0, max_relative = 0.1);
            let se = (sc[k].var_re / 1e5).sqrt();
            assert!((sc[k].mean_re - coh.mean_coeffs.values[k].re).abs() <= 3.0 * se);
        }
    }

    #[test]
    fn ensemble_is_reproducible() {
        let obj = ObjectField::double_gaussian(1e12, 0.5, 0.1).unwrap();
        let a = run_ensemble(&obj, basis(), 7, &NoiseModel::coherent(), 50, 42).unwrap();
        let b = run_ensemble(&obj, basis(), 7, &NoiseModel::coherent(), 50, 42).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.summary_json(), b.summary_json());
    }

    #[test]
    fn underflowing_lambda_is_reported() {
        // lambda_49 at c = 0.01 lies far below the double range
        let b = ProlateBasis::build(0.01, 50, 768).unwrap();
        assert_eq!(b.lambda(49).unwrap(), 0.0);
        let obj = ObjectField::rect(1.0, 0.5).unwrap();
        let a = project_coeffs(&obj, &b, 50).unwrap();
        let err = noisy_reconstruct(&a, &b, 50, &NoiseDraw::zero(50)).unwrap_err();
        assert!(matches!(err, Error::LambdaUnderflow { .. }), "{err}");
    }

    #[test]
    fn photon_conversion() {
        let n = photons_from_power(1e-3, 1064e-9, 1e-3).unwrap();
        assert_relative_eq!(n, 5.3e12, max_relative = 0.02);
        assert_relative_eq!(photons_from_power(2e-3, 1064e-9, 1e-3).unwrap(), 2.0 * n);
        assert_relative_eq!(photons_from_power(1e-3, 532e-9, 1e-3).unwrap(), 0.5 * n);
        assert!(photons_from_power(0.0, 1e-6, 1.0).is_err());
    }

    #[test]
    fn beamsplitter_conserves_energy() {
        for (k, lam) in [(0, 0.57), (3, 1e-5), (6, 0.999_999)] {
            let a = Complex64::new(1.3, -0.4);
            assert!(beamsplitter_energy_check(a, k, lam) <= 1e-12 * a.norm_sqr());
        }
        assert_eq!(
            beamsplitter_energy_check(Complex64::new(0.0, 0.0), 2, 0.3),
            0.0
        );
        let (_, g) = beamsplitter_means(Complex64::new(1.0, 0.0), 1, 1.0);
        assert_eq!(g.norm(), 0.0);
    }
}
