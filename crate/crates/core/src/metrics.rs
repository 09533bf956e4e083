//! Resolution and noise metrics: point-spread functions and their
//! half-widths, input and reconstructed signal-to-noise ratios, the mode
//! count selection rule and super-resolution sweeps.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fieldmodel::{fmt17, project_coeffs, uniform_grid, CoeffVector, ObjectField};
use crate::prolate::ProlateBasis;
use crate::stochastic::{NoiseKind, NoiseModel};

/// Default width of the rectangular point-source probe.
pub const DEFAULT_PROBE_EPS: f64 = 1e-2;
const HALF_WIDTH_TOL: f64 = 1e-9;
const PSF_STEP: f64 = 1e-3;

/// A unit-peak profile sampled on `s >= 0` together with its half-width.
#[derive(Debug, Clone, Serialize)]
pub struct PsfProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub half_width: f64,
}

/// First `s > 0` where `f` (unit peak at 0) drops to 1/2.
///
/// The grid is scanned for the first sample below one half and the bracket
/// is refined by bisection on `f` to `1e-9`.
pub fn half_width<F: Fn(f64) -> f64>(f: F, grid: &[f64]) -> Result<f64> {
    let mut prev: Option<f64> = None;
    for &s in grid.iter().filter(|&&s| s >= 0.0) {
        if f(s) < 0.5 {
            let Some(mut lo) = prev else {
                return Err(Error::NoCrossing);
            };
            let mut hi = s;
            while hi - lo > HALF_WIDTH_TOL {
                let mid = 0.5 * (lo + hi);
                if f(mid) < 0.5 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        prev = Some(s);
    }
    Err(Error::NoCrossing)
}

fn check_c(c: f64) -> Result<()> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invalid(format!("c must be positive, got {c}")));
    }
    Ok(())
}

/// Normalized imaging PSF `sin(cs)/(cs)`.
pub fn imaging_psf_value(c: f64, s: f64) -> f64 {
    let x = c * s;
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Imaging PSF on `[0, 2π/c]`, the first two zeros included.
pub fn imaging_psf(c: f64) -> Result<PsfProfile> {
    check_c(c)?;
    let grid = uniform_grid(0.0, 2.0 * PI / c, PSF_STEP / c)?;
    let values = grid.iter().map(|&s| imaging_psf_value(c, s)).collect();
    let w = half_width(|s| imaging_psf_value(c, s), &grid)?;
    Ok(PsfProfile {
        grid,
        values,
        half_width: w,
    })
}

/// Evaluator for `h^(r)(0, s) = sum_{k<L} phi_k(0) phi_k(s)`, normalized to
/// unit peak and zero outside the core.
pub struct ReconstructionPsf<'a> {
    basis: &'a ProlateBasis,
    l: usize,
    at_zero: Vec<f64>,
    peak: f64,
}

impl<'a> ReconstructionPsf<'a> {
    pub fn new(basis: &'a ProlateBasis, l: usize) -> Result<Self> {
        if l == 0 || l > basis.num_modes() {
            return Err(Error::invalid(format!(
                "mode count L = {l} must lie in 1..={}",
                basis.num_modes()
            )));
        }
        let at_zero = basis.phi_all(0.0, l)?;
        let peak = at_zero.iter().map(|v| v * v).sum();
        Ok(ReconstructionPsf {
            basis,
            l,
            at_zero,
            peak,
        })
    }

    /// Un-normalized value.
    pub fn raw(&self, s: f64) -> f64 {
        if s.abs() > 1.0 {
            return 0.0;
        }
        let phi = self.basis.phi_all(s, self.l).expect("core point, valid L");
        self.at_zero.iter().zip(&phi).map(|(a, b)| a * b).sum()
    }

    pub fn value(&self, s: f64) -> f64 {
        self.raw(s) / self.peak
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }
}

/// Reconstruction PSF on `[0, 1.5]`.
pub fn reconstruction_psf(basis: &ProlateBasis, l: usize) -> Result<PsfProfile> {
    let h = ReconstructionPsf::new(basis, l)?;
    let grid = uniform_grid(0.0, 1.5, PSF_STEP)?;
    let values = grid.iter().map(|&s| h.value(s)).collect();
    let w = half_width(|s| h.value(s), &grid)?;
    Ok(PsfProfile {
        grid,
        values,
        half_width: w,
    })
}

/// Half-widths and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuperResolution {
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "W_L")]
    pub w_l: f64,
    #[serde(rename = "S")]
    pub s: f64,
}

/// `S = W / W_L`.
pub fn superres_factor(basis: &ProlateBasis, l: usize) -> Result<SuperResolution> {
    let w = imaging_psf(basis.c())?.half_width;
    let w_l = reconstruction_psf(basis, l)?.half_width;
    Ok(SuperResolution { w, w_l, s: w / w_l })
}

/// Input signal-to-noise ratio for coherent illumination, `R = <N>`.
pub fn snr_input(object: &ObjectField) -> f64 {
    object.photons()
}

/// `R^(r) = (sum |a_k|²)² / (e^{-2r} sum |a_k|²/lambda_k)` over `k < L`.
pub fn snr_reconstructed(
    coeffs: &CoeffVector,
    basis: &ProlateBasis,
    l: usize,
    model: &NoiseModel,
) -> Result<f64> {
    if l == 0 || l > basis.num_modes() || l > coeffs.len() {
        return Err(Error::invalid(format!(
            "mode count L = {l} must lie in 1..={}",
            basis.num_modes().min(coeffs.len())
        )));
    }
    let (mut signal, mut noise) = (0.0, 0.0);
    for (k, a) in coeffs.values[..l].iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let lam = basis.lambda(k)?;
        if lam == 0.0 {
            return Err(Error::LambdaUnderflow { mode: k });
        }
        signal += p;
        noise += p / lam;
    }
    if signal == 0.0 {
        return Err(Error::UndefinedSnr);
    }
    Ok(signal * signal / noise * (2.0 * model.r).exp())
}

/// `F = R / R^(r)`.
pub fn noise_figure(r: f64, r_rec: f64) -> Result<f64> {
    if !(r_rec > 0.0) {
        return Err(Error::UndefinedSnr);
    }
    Ok(r / r_rec)
}

/// Outcome of the mode-count rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSelection {
    pub l_star: usize,
    /// Set when even a single mode yields `R^(r) < 1`.
    pub no_reconstruction: bool,
}

/// `L* = max{L <= K : R^(r)(L) >= 1}` for the rectangular probe of width `eps`
/// carrying `photons`.
pub fn select_max_modes(
    basis: &ProlateBasis,
    model: &NoiseModel,
    photons: f64,
    eps: f64,
) -> Result<ModeSelection> {
    let probe = ObjectField::rect(photons, eps)?;
    let coeffs = project_coeffs(&probe, basis, basis.num_modes())?;
    select_from_coeffs(&coeffs, basis, model)
}

fn select_from_coeffs(
    coeffs: &CoeffVector,
    basis: &ProlateBasis,
    model: &NoiseModel,
) -> Result<ModeSelection> {
    let mut l_star = 0;
    for l in 1..=basis.num_modes() {
        if snr_reconstructed(coeffs, basis, l, model)? >= 1.0 {
            l_star = l;
        }
    }
    Ok(ModeSelection {
        l_star,
        no_reconstruction: l_star == 0,
    })
}

/// One row of the super-resolution sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    #[serde(rename = "N")]
    pub photons: f64,
    pub model: NoiseKind,
    pub r: f64,
    #[serde(rename = "L_star")]
    pub l_star: usize,
    pub no_reconstruction: bool,
    #[serde(rename = "W")]
    pub w: f64,
    /// Equal to `W` when no reconstruction is possible.
    #[serde(rename = "W_L")]
    pub w_l: f64,
    #[serde(rename = "S")]
    pub s: f64,
}

/// Evaluates `L*` and `S` for every `(photons, model)` pair, ordered by model
/// then photon number as given.
pub fn sweep_s_vs_n(
    photons: &[f64],
    models: &[NoiseModel],
    basis: &ProlateBasis,
    eps: f64,
) -> Result<Vec<SweepPoint>> {
    if photons.is_empty() || models.is_empty() {
        return Err(Error::invalid(
            "sweep needs at least one photon number and model",
        ));
    }
    // R^(r) is linear in <N>, so one unit-photon projection serves all rows
    let unit = project_coeffs(&ObjectField::rect(1.0, eps)?, basis, basis.num_modes())?;
    let w = imaging_psf(basis.c())?.half_width;
    let jobs: Vec<(NoiseModel, f64)> = models
        .iter()
        .flat_map(|m| photons.iter().map(move |&n| (*m, n)))
        .collect();
    jobs.par_iter()
        .map(|&(model, n)| {
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::invalid(format!(
                    "photon number must be positive, got {n}"
                )));
            }
            let scaled = CoeffVector {
                kind: unit.kind,
                values: unit.values.iter().map(|v| v * n.sqrt()).collect(),
            };
            let sel = select_from_coeffs(&scaled, basis, &model)?;
            let w_l = if sel.no_reconstruction {
                w
            } else {
                reconstruction_psf(basis, sel.l_star)?.half_width
            };
            Ok(SweepPoint {
                photons: n,
                model: model.kind,
                r: model.r,
                l_star: sel.l_star,
                no_reconstruction: sel.no_reconstruction,
                w,
                w_l,
                s: w / w_l,
            })
        })
        .collect()
}

/// CSV `N,model,r,L_star,W,W_L,S`.
pub fn sweep_to_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("N,model,r,L_star,W,W_L,S\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt17(p.photons),
            p.model.as_str(),
            fmt17(p.r),
            p.l_star,
            fmt17(p.w),
            fmt17(p.w_l),
            fmt17(p.s)
        );
    }
    out
}

/// `count` log-spaced values from `10^lo` to `10^hi`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![10f64.powf(lo)];
    }
    (0..count)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64))
        .collect()
}
