//! Classical object amplitudes on the core, their prolate coefficients, the
//! forward model (pupil-plane spectrum and diffraction-limited image) and
//! truncated reconstruction.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prolate::ProlateBasis;
use crate::special::{core_rule, doubled_rule, GaussLegendre};

/// Default relative RMS threshold for calling a reconstructed spectrum close.
pub const DEFAULT_CLOSENESS: f64 = 0.05;

const SMOOTH_PANELS: usize = 16;
const SAMPLED_NODES: usize = 8;
const NORMALIZATION_TOL: f64 = 1e-10;

/// Analytic or sampled description of a real object amplitude `a(s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ObjectSpec {
    /// Two Gaussian peaks at `±s0` with width `sigma`.
    DoubleGaussian { s0: f64, sigma: f64 },
    /// Centered rectangle of full width `eps`.
    Rect { eps: f64 },
    /// Samples on a strictly increasing grid, linearly interpolated and zero
    /// outside the grid.
    Sampled { grid: Vec<f64>, values: Vec<f64> },
}

/// An object amplitude normalized so that `∫ a² ds` over the core equals the
/// mean photon number.
#[derive(Debug, Clone)]
pub struct ObjectField {
    spec: ObjectSpec,
    photons: f64,
    /// Peak factor `A` for Gaussians, height for rectangles, sample scale
    /// for sampled objects.
    scale: f64,
}

fn check_photons(photons: f64) -> Result<()> {
    if !(photons.is_finite() && photons >= 0.0) {
        return Err(Error::invalid(format!(
            "photon number must be finite and non-negative, got {photons}"
        )));
    }
    Ok(())
}

impl ObjectField {
    pub fn double_gaussian(photons: f64, s0: f64, sigma: f64) -> Result<Self> {
        check_photons(photons)?;
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        if !(0.0..1.0).contains(&s0) {
            return Err(Error::invalid(format!("s0 must lie in [0, 1), got {s0}")));
        }
        let mut field = ObjectField {
            spec: ObjectSpec::DoubleGaussian { s0, sigma },
            photons,
            scale: 1.0,
        };
        let (norm, err) = field.norm_sq_with_estimate();
        if err > NORMALIZATION_TOL * norm || norm <= 0.0 {
            return Err(Error::Quadrature(format!(
                "normalization integral under-resolved for sigma = {sigma} \
                 (estimate {err:.2e}); refine the quadrature grid or widen the peaks"
            )));
        }
        field.scale = (photons / norm).sqrt();
        Ok(field)
    }

    pub fn rect(photons: f64, eps: f64) -> Result<Self> {
        check_photons(photons)?;
        if !(eps > 0.0 && eps <= 2.0) {
            return Err(Error::invalid(format!(
                "rect width must lie in (0, 2], got {eps}"
            )));
        }
        Ok(ObjectField {
            spec: ObjectSpec::Rect { eps },
            photons,
            scale: (photons / eps).sqrt(),
        })
    }

    pub fn sampled(photons: f64, grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_photons(photons)?;
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::invalid(
                "sampled object needs at least two points and matching lengths",
            ));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|g| !g.is_finite()) {
            return Err(Error::invalid(
                "sample grid must be finite and strictly increasing",
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sample values must be finite"));
        }
        let mut field = ObjectField {
            spec: ObjectSpec::Sampled { grid, values },
            photons,
            scale: 1.0,
        };
        let norm = field.norm_sq();
        if norm <= 0.0 {
            return Err(Error::invalid("sampled object vanishes on the core"));
        }
        field.scale = (photons / norm).sqrt();
        Ok(field)
    }

    pub fn from_spec(spec: &ObjectSpec, photons: f64) -> Result<Self> {
        match spec {
            ObjectSpec::DoubleGaussian { s0, sigma } => Self::double_gaussian(photons, *s0, *sigma),
            ObjectSpec::Rect { eps } => Self::rect(photons, *eps),
            ObjectSpec::Sampled { grid, values } => {
                Self::sampled(photons, grid.clone(), values.clone())
            }
        }
    }

    pub fn spec(&self) -> &ObjectSpec {
        &self.spec
    }

    pub fn photons(&self) -> f64 {
        self.photons
    }

    /// Amplitude `A` (Gaussian), height (rect) or sample scale factor.
    pub fn amplitude(&self) -> f64 {
        self.scale
    }

    /// True when `a(-s) = a(s)` by construction.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self.spec, ObjectSpec::Sampled { .. })
    }

    /// `a(s)`, zero outside the core.
    pub fn value(&self, s: f64) -> f64 {
        if !(s.abs() <= 1.0) {
            return 0.0;
        }
        match &self.spec {
            ObjectSpec::DoubleGaussian { s0, sigma } => {
                let g = |d: f64| (-d * d / (2.0 * sigma * sigma)).exp();
                self.scale * (g(s - s0) + g(s + s0))
            }
            ObjectSpec::Rect { eps } => {
                if s.abs() <= eps / 2.0 {
                    self.scale
                } else {
                    0.0
                }
            }
            ObjectSpec::Sampled { grid, values } => self.scale * interpolate(grid, values, s),
        }
    }

    /// Quadrature panels covering the support of `a` on `[lo, hi] ∩ [-1, 1]`.
    fn panels(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let (lo, hi) = (lo.max(-1.0), hi.min(1.0));
        match &self.spec {
            ObjectSpec::DoubleGaussian { .. } => {
                let n = (SMOOTH_PANELS as f64 * (hi - lo) / 2.0).ceil().max(1.0) as usize;
                split(lo, hi, n)
            }
            ObjectSpec::Rect { eps } => {
                let (a, b) = (lo.max(-eps / 2.0), hi.min(eps / 2.0));
                if b > a {
                    vec![(a, b)]
                } else {
                    vec![]
                }
            }
            ObjectSpec::Sampled { grid, .. } => grid
                .windows(2)
                .filter_map(|w| {
                    let (a, b) = (w[0].max(lo), w[1].min(hi));
                    (b > a).then_some((a, b))
                })
                .collect(),
        }
    }

    fn rule(&self) -> GaussLegendre {
        match self.spec {
            ObjectSpec::Sampled { .. } => GaussLegendre::new(SAMPLED_NODES),
            _ => core_rule().clone(),
        }
    }

    /// `(s, w·a(s))` quadrature pairs over `[lo, hi]`.
    pub(crate) fn weighted_nodes(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let rule = self.rule();
        self.panels(lo, hi)
            .into_iter()
            .flat_map(|(a, b)| {
                rule.mapped(a, b)
                    .map(|(s, w)| (s, w * self.value(s)))
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    /// `∫ a² ds` over the core.
    pub fn norm_sq(&self) -> f64 {
        let rule = self.rule();
        self.panels(-1.0, 1.0)
            .into_iter()
            .map(|(a, b)| rule.integrate(a, b, |s| self.value(s).powi(2)))
            .sum()
    }

    fn norm_sq_with_estimate(&self) -> (f64, f64) {
        let mut total = 0.0;
        let mut err = 0.0;
        for (a, b) in self.panels(-1.0, 1.0) {
            let coarse = core_rule().integrate(a, b, |s| self.value(s).powi(2));
            let fine = doubled_rule().integrate(a, b, |s| self.value(s).powi(2));
            total += fine;
            err += (fine - coarse).abs();
        }
        (total, err)
    }

    /// `∫ a ds` over the core.
    pub fn integral(&self) -> f64 {
        self.weighted_nodes(-1.0, 1.0)
            .iter()
            .map(|(_, wa)| wa)
            .sum()
    }
}

fn split(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == n {
                b
            } else {
                a + h * (i + 1) as f64
            };
            (lo, hi)
        })
        .collect()
}

fn interpolate(grid: &[f64], values: &[f64], s: f64) -> f64 {
    if s < grid[0] || s > grid[grid.len() - 1] {
        return 0.0;
    }
    let i = grid.partition_point(|&g| g <= s).clamp(1, grid.len() - 1);
    let (x0, x1) = (grid[i - 1], grid[i]);
    let t = (s - x0) / (x1 - x0);
    values[i - 1] + t * (values[i] - values[i - 1])
}

/// Which stage of the chain a coefficient set describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoeffKind {
    /// `a_k`, projections of the object onto `phi_k`.
    Object,
    /// `f_k = (-i)^k sqrt(lambda_k) a_k`, classical pupil-plane means.
    Pupil,
    /// `a_k^(r)`, reconstructed from pupil data.
    Reconstructed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    pub kind: CoeffKind,
    pub values: Vec<Complex64>,
}

impl CoeffVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum_sq(&self, l: usize) -> f64 {
        self.values.iter().take(l).map(|v| v.norm_sqr()).sum()
    }
}

/// `(-i)^k`.
pub fn minus_i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// `a_k = ∫ a(s) phi_k(s) ds` for `k < l`.
///
/// Symmetric objects are integrated over `[0, 1]` for even `k` only; odd
/// coefficients are set to exactly zero.
pub fn project_coeffs(object: &ObjectField, basis: &ProlateBasis, l: usize) -> Result<CoeffVector> {
    check_l(basis, l)?;
    let mut acc = vec![0.0; l];
    if object.is_symmetric() {
        for (s, wa) in object.weighted_nodes(0.0, 1.0) {
            let phi = basis.phi_all(s, l)?;
            for k in (0..l).step_by(2) {
                acc[k] += 2.0 * wa * phi[k];
            }
        }
    } else {
        for (s, wa) in object.weighted_nodes(-1.0, 1.0) {
            let phi = basis.phi_all(s, l)?;
            for k in 0..l {
                acc[k] += wa * phi[k];
            }
        }
    }
    if acc.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature(
            "non-finite projection coefficient".into(),
        ));
    }
    Ok(CoeffVector {
        kind: CoeffKind::Object,
        values: acc.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    })
}

/// Pupil-plane classical means `f_k = (-i)^k sqrt(lambda_k) a_k`.
pub fn pupil_coeffs(coeffs: &CoeffVector, basis: &ProlateBasis) -> Result<CoeffVector> {
    expect_kind(coeffs, &[CoeffKind::Object])?;
    check_l(basis, coeffs.len())?;
    let values = coeffs
        .values
        .iter()
        .enumerate()
        .map(|(k, a)| Ok(minus_i_pow(k) * basis.lambda(k)?.sqrt() * a))
        .collect::<Result<_>>()?;
    Ok(CoeffVector {
        kind: CoeffKind::Pupil,
        values,
    })
}

fn check_l(basis: &ProlateBasis, l: usize) -> Result<()> {
    if l == 0 || l > basis.num_modes() {
        return Err(Error::invalid(format!(
            "mode count L = {l} must lie in 1..={}",
            basis.num_modes()
        )));
    }
    Ok(())
}

fn expect_kind(coeffs: &CoeffVector, allowed: &[CoeffKind]) -> Result<()> {
    if !allowed.contains(&coeffs.kind) {
        return Err(Error::invalid(format!(
            "coefficients of kind {:?} not accepted here",
            coeffs.kind
        )));
    }
    Ok(())
}

/// What a sampled profile represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileMeaning {
    Object,
    Spectrum,
    Image,
    Reconstruction,
    ReconstructedSpectrum,
}

impl ProfileMeaning {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileMeaning::Object => "object",
            ProfileMeaning::Spectrum => "spectrum",
            ProfileMeaning::Image => "image",
            ProfileMeaning::Reconstruction => "reconstruction",
            ProfileMeaning::ReconstructedSpectrum => "reconstructed-spectrum",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldProfile {
    pub meaning: ProfileMeaning,
    pub c: f64,
    /// Mode count behind the profile, if it came from a truncated series.
    pub l: Option<usize>,
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl FieldProfile {
    fn new(
        meaning: ProfileMeaning,
        c: f64,
        l: Option<usize>,
        grid: Vec<f64>,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("profile grid must be strictly increasing"));
        }
        if values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::Invariant(format!(
                "{} profile has non-finite samples",
                meaning.as_str()
            )));
        }
        Ok(FieldProfile {
            meaning,
            c,
            l,
            grid,
            values,
        })
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// CSV with a `# meaning,c,L` comment line, then
    /// `coordinate,value_re,value_im` rows at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * self.grid.len());
        let l = self.l.map_or_else(|| "-".to_string(), |l| l.to_string());
        let _ = writeln!(out, "# {},{},{}", self.meaning.as_str(), fmt17(self.c), l);
        out.push_str("coordinate,value_re,value_im\n");
        for (x, v) in self.grid.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{},{}", fmt17(*x), fmt17(v.re), fmt17(v.im));
        }
        out
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Uniform grid `a, a + h, ..., b` computed by index to avoid drift.
pub fn uniform_grid(a: f64, b: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && b >= a && a.is_finite() && b.is_finite()) {
        return Err(Error::invalid(format!(
            "invalid grid [{a}, {b}] step {step}"
        )));
    }
    let n = ((b - a) / step).round() as usize;
    Ok((0..=n).map(|i| a + step * i as f64).collect())
}

/// Object and image grid: `s ∈ [-1.5, 1.5]`, step `1e-3`.
pub fn default_object_grid() -> Vec<f64> {
    uniform_grid(-1.5, 1.5, 1e-3).expect("static grid")
}

/// Spectrum grid: `xi ∈ [-15, 15]`, step `1e-2`.
pub fn default_spectrum_grid() -> Vec<f64> {
    uniform_grid(-15.0, 15.0, 1e-2).expect("static grid")
}

/// Object samples on a grid (zero outside the core).
pub fn object_profile(object: &ObjectField, c: f64, grid: &[f64]) -> Result<FieldProfile> {
    let values = grid
        .iter()
        .map(|&s| Complex64::new(object.value(s), 0.0))
        .collect();
    FieldProfile::new(ProfileMeaning::Object, c, None, grid.to_vec(), values)
}

/// `f(xi) = sum_k (-i)^k a_k psi_k(xi)` over all supplied coefficients.
pub fn forward_spectrum(
    coeffs: &CoeffVector,
    basis: &ProlateBasis,
    grid: &[f64],
) -> Result<FieldProfile> {
    expect_kind(coeffs, &[CoeffKind::Object])?;
    let l = coeffs.len();
    let values = spectrum_series(&coeffs.values, basis, l, grid)?;
    FieldProfile::new(
        ProfileMeaning::Spectrum,
        basis.c(),
        Some(l),
        grid.to_vec(),
        values,
    )
}

/// `f^(r)(xi) = sum_{k<l} (-i)^k a_k psi_k(xi)`.
pub fn reconstruct_spectrum(
    coeffs: &CoeffVector,
    basis: &ProlateBasis,
    l: usize,
    grid: &[f64],
) -> Result<FieldProfile> {
    expect_kind(coeffs, &[CoeffKind::Object, CoeffKind::Reconstructed])?;
    let values = spectrum_series(&coeffs.values, basis, l, grid)?;
    FieldProfile::new(
        ProfileMeaning::ReconstructedSpectrum,
        basis.c(),
        Some(l),
        grid.to_vec(),
        values,
    )
}

pub(crate) fn spectrum_series(
    coeffs: &[Complex64],
    basis: &ProlateBasis,
    l: usize,
    grid: &[f64],
) -> Result<Vec<Complex64>> {
    check_l(basis, l)?;
    if l > coeffs.len() {
        return Err(Error::invalid(format!(
            "L = {l} exceeds the {} available coefficients",
            coeffs.len()
        )));
    }
    let phased: Vec<Complex64> = (0..l).map(|k| minus_i_pow(k) * coeffs[k]).collect();
    grid.iter()
        .map(|&x| {
            let psi = basis.psi_all(x, l)?;
            Ok(phased
                .iter()
                .zip(&psi)
                .filter(|(a, _)| *a != &Complex64::new(0.0, 0.0))
                .map(|(a, p)| a * p)
                .sum())
        })
        .collect()
}

/// Direct transform `f(xi) = sqrt(c/2π) ∫ a(s) exp(-i c s xi) ds`.
pub fn direct_spectrum(object: &ObjectField, c: f64, grid: &[f64]) -> Result<FieldProfile> {
    let norm = (c / (2.0 * PI)).sqrt();
    let values = if object.is_symmetric() {
        // even object: only the cosine part survives
        let nodes = object.weighted_nodes(0.0, 1.0);
        grid.iter()
            .map(|&xi| {
                let v: f64 = nodes
                    .iter()
                    .map(|&(s, wa)| 2.0 * wa * (c * s * xi.abs()).cos())
                    .sum();
                Complex64::new(norm * v, 0.0)
            })
            .collect()
    } else {
        let nodes = object.weighted_nodes(-1.0, 1.0);
        grid.iter()
            .map(|&xi| {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(s, wa) in &nodes {
                    let (sn, cs) = (c * s * xi).sin_cos();
                    acc += Complex64::new(wa * cs, -wa * sn);
                }
                norm * acc
            })
            .collect()
    };
    FieldProfile::new(ProfileMeaning::Spectrum, c, None, grid.to_vec(), values)
}

/// Sinc kernel `sin(c d) / (π d)` with the `c/π` limit at `d = 0`.
pub fn sinc_kernel(c: f64, d: f64) -> f64 {
    if d == 0.0 {
        c / PI
    } else {
        (c * d).sin() / (PI * d)
    }
}

/// Image by direct convolution with the sinc kernel.
pub fn forward_image_kernel(object: &ObjectField, c: f64, grid: &[f64]) -> Result<FieldProfile> {
    let values = if object.is_symmetric() {
        // pair t with -t so that e(-s) = e(s) holds bit for bit
        let nodes = object.weighted_nodes(0.0, 1.0);
        grid.iter()
            .map(|&s| {
                let v: f64 = nodes
                    .iter()
                    .map(|&(t, wa)| {
                        (sinc_kernel(c, s.abs() - t) + sinc_kernel(c, s.abs() + t)) * wa
                    })
                    .sum();
                Complex64::new(v, 0.0)
            })
            .collect()
    } else {
        let nodes = object.weighted_nodes(-1.0, 1.0);
        grid.iter()
            .map(|&s| {
                let v: f64 = nodes
                    .iter()
                    .map(|&(t, wa)| sinc_kernel(c, s - t) * wa)
                    .sum();
                Complex64::new(v, 0.0)
            })
            .collect()
    };
    FieldProfile::new(ProfileMeaning::Image, c, None, grid.to_vec(), values)
}

/// Image from the series `sum_k sqrt(lambda_k) a_k psi_k(s)`, which equals
/// `sum_k lambda_k a_k phi_k(s)` on the core.
pub fn forward_image_series(
    coeffs: &CoeffVector,
    basis: &ProlateBasis,
    grid: &[f64],
) -> Result<FieldProfile> {
    expect_kind(coeffs, &[CoeffKind::Object])?;
    let l = coeffs.len();
    check_l(basis, l)?;
    let weights: Vec<Complex64> = (0..l)
        .map(|k| Ok(basis.lambda(k)?.sqrt() * coeffs.values[k]))
        .collect::<Result<_>>()?;
    let values = grid
        .iter()
        .map(|&s| {
            let psi = basis.psi_all(s, l)?;
            Ok(weights.iter().zip(&psi).map(|(w, p)| w * p).sum())
        })
        .collect::<Result<_>>()?;
    FieldProfile::new(
        ProfileMeaning::Image,
        basis.c(),
        Some(l),
        grid.to_vec(),
        values,
    )
}

/// `a^(r)(s) = sum_{k<l} a_k phi_k(s)` on the core, zero outside it.
pub fn reconstruct_object(
    coeffs: &CoeffVector,
    basis: &ProlateBasis,
    l: usize,
    grid: &[f64],
) -> Result<FieldProfile> {
    expect_kind(coeffs, &[CoeffKind::Object, CoeffKind::Reconstructed])?;
    check_l(basis, l)?;
    if l > coeffs.len() {
        return Err(Error::invalid(format!(
            "L = {l} exceeds the {} available coefficients",
            coeffs.len()
        )));
    }
    let values = grid
        .iter()
        .map(|&s| {
            if s.abs() > 1.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let phi = basis.phi_all(s, l)?;
            Ok(coeffs.values[..l]
                .iter()
                .zip(&phi)
                .map(|(a, p)| a * p)
                .sum())
        })
        .collect::<Result<_>>()?;
    FieldProfile::new(
        ProfileMeaning::Reconstruction,
        basis.c(),
        Some(l),
        grid.to_vec(),
        values,
    )
}

/// Classical two-point resolution distance `π / c`.
pub fn rayleigh_distance(c: f64) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invalid(format!("c must be positive, got {c}")));
    }
    Ok(PI / c)
}

/// Whether two points `separation` apart lie below the Rayleigh distance.
pub fn beyond_rayleigh(separation: f64, c: f64) -> Result<bool> {
    Ok(separation < rayleigh_distance(c)?)
}

/// Number of strict interior local maxima of a sampled real sequence.
pub fn count_local_maxima(values: &[f64]) -> usize {
    values
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] > w[2])
        .count()
}

/// Positions of strict interior local maxima.
pub fn local_maxima(grid: &[f64], values: &[f64]) -> Vec<f64> {
    values
        .windows(3)
        .enumerate()
        .filter(|(_, w)| w[1] > w[0] && w[1] > w[2])
        .map(|(i, _)| grid[i + 1])
        .collect()
}

/// Relative RMS `sqrt(sum |approx - exact|² / sum |exact|²)` over `|xi| <= window`.
pub fn relative_rms(approx: &FieldProfile, exact: &FieldProfile, window: f64) -> Result<f64> {
    if approx.grid != exact.grid {
        return Err(Error::invalid("profiles must share a grid"));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for ((x, a), e) in approx.grid.iter().zip(&approx.values).zip(&exact.values) {
        if x.abs() <= window {
            num += (a - e).norm_sqr();
            den += e.norm_sqr();
        }
    }
    if den == 0.0 {
        return Err(Error::invalid("reference spectrum vanishes on the window"));
    }
    Ok((num / den).sqrt())
}

/// Largest `X` on the grid such that the relative RMS over `|xi| <= X` stays
/// at or below `threshold`. Returns 0 if no window qualifies.
pub fn closeness_window(
    approx: &FieldProfile,
    exact: &FieldProfile,
    threshold: f64,
) -> Result<f64> {
    if approx.grid != exact.grid {
        return Err(Error::invalid("profiles must share a grid"));
    }
    let mut order: Vec<usize> = (0..approx.grid.len()).collect();
    order.sort_by(|&i, &j| approx.grid[i].abs().total_cmp(&approx.grid[j].abs()));
    let (mut num, mut den) = (0.0, 0.0);
    let mut best = 0.0;
    let mut idx = 0;
    while idx < order.len() {
        let x = approx.grid[order[idx]].abs();
        // take every sample at this |xi| together
        while idx < order.len() && approx.grid[order[idx]].abs() == x {
            let i = order[idx];
            num += (approx.values[i] - exact.values[i]).norm_sqr();
            den += exact.values[i].norm_sqr();
            idx += 1;
        }
        if den > 0.0 && (num / den).sqrt() <= threshold {
            best = x;
        }
    }
    Ok(best)
}
