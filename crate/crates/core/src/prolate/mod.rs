//! Linear prolate spheroidal wave functions for a space-bandwidth product `c`.
//!
//! The core-normalized functions `phi_n` are expanded in normalized Legendre
//! polynomials, `phi_n(s) = sum_k gamma_k sqrt(k + 1/2) P_k(s)`, where the
//! coefficient vectors are eigenvectors of a symmetric five-diagonal operator
//! matrix. The matrix only couples `k` to `k ± 2`, so it splits into an even
//! chain and an odd chain that are solved independently in extended
//! precision. Eigenvalues `lambda_n` fall off super-exponentially (≈4e-50 at
//! `n = 17` for `c = 1`), so they are read off the Fourier self-mapping at
//! `xi = 0` from the leading coefficient rather than by quadrature.
//!
//! The full-line functions `psi_n` use the spherical-Bessel series, and the
//! wing functions are `chi_n = psi_n / sqrt(1 - lambda_n)` for `|s| > 1`.

mod io;
mod jacobi;

pub use io::{load_basis, save_basis, BASIS_HEADER};

use std::f64::consts::PI;

use crate::error::{Error, Parity, Result};
use crate::mp::Real;
use crate::special::{legendre_p_all, spherical_bessel_j_all};

/// Smallest accepted Legendre truncation length.
pub const MIN_ORDER: usize = 4;
/// Smallest accepted working precision for the eigensolve.
pub const MIN_PRECISION_BITS: usize = 128;
/// Default working precision.
pub const DEFAULT_PRECISION_BITS: usize = 256;
/// Tail coefficients `gamma_{N-1}`, `gamma_{N-2}` must be below this.
pub const TAIL_TOLERANCE: f64 = 1e-40;
/// Bits of relative accuracy required in the coefficient that carries `lambda`.
const LAMBDA_GUARD_BITS: usize = 32;
const MAX_ORDER_DOUBLINGS: usize = 5;

/// Nonzero entries of the symmetric Legendre-basis operator matrix.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    c: f64,
    order: usize,
    diag: Vec<Real>,
    /// `upper[k] = A[k, k+2]` for `k + 2 < order`.
    upper: Vec<Real>,
}

impl OperatorMatrix {
    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn precision_bits(&self) -> usize {
        self.diag[0].precision()
    }

    /// Entry `A[i, j]` rounded to double.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i >= self.order || j >= self.order {
            return 0.0;
        }
        if i == j {
            self.diag[i].to_f64()
        } else if i.abs_diff(j) == 2 {
            self.upper[i.min(j)].to_f64()
        } else {
            0.0
        }
    }

    /// Dense block over the indices `k ≡ parity (mod 2)`.
    fn chain(&self, parity: Parity) -> Vec<Vec<Real>> {
        let bits = self.precision_bits();
        let ks: Vec<usize> = (parity.offset()..self.order).step_by(2).collect();
        let m = ks.len();
        let mut block = vec![vec![Real::zero(bits); m]; m];
        for (i, &k) in ks.iter().enumerate() {
            block[i][i] = self.diag[k].clone();
            if i + 1 < m {
                block[i][i + 1] = self.upper[k].clone();
                block[i + 1][i] = self.upper[k].clone();
            }
        }
        block
    }
}

/// Builds the operator matrix of order `order` at `bits` of precision.
///
/// `c = 0` is accepted and yields the pure Legendre operator `k(k+1)`.
pub fn build_operator_matrix(c: f64, order: usize, bits: usize) -> Result<OperatorMatrix> {
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::invalid(format!(
            "space-bandwidth product must be finite and non-negative, got {c}"
        )));
    }
    if order < MIN_ORDER {
        return Err(Error::invalid(format!(
            "matrix order {order} below minimum {MIN_ORDER}"
        )));
    }
    let cr = Real::from_f64(c, bits);
    let c2 = &cr * &cr;
    let diag = (0..order)
        .map(|k| {
            let k = k as i64;
            let base = Real::from_i64(k * (k + 1), bits);
            base + &c2 * Real::ratio(2 * k * (k + 1) - 1, (2 * k + 3) * (2 * k - 1), bits)
        })
        .collect();
    let upper = (0..order.saturating_sub(2))
        .map(|k| {
            let k = k as i64;
            let root = Real::from_i64((2 * k + 1) * (2 * k + 5), bits).sqrt();
            &c2 * Real::from_i64((k + 2) * (k + 1), bits) / (Real::from_i64(2 * k + 3, bits) * root)
        })
        .collect();
    Ok(OperatorMatrix {
        c,
        order,
        diag,
        upper,
    })
}

/// One eigenpair of the operator matrix.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    /// Operator eigenvalue.
    pub chi: Real,
    pub parity: Parity,
    /// Full-length coefficient vector, exactly zero at the opposite parity.
    pub gamma: Vec<Real>,
}

/// Solves the even and odd chains separately and returns all eigenpairs in
/// ascending operator eigenvalue, which is the prolate index order. Vectors
/// are unit-normalized with a positive leading coefficient.
pub fn solve_eigenproblem(matrix: &OperatorMatrix, bits: usize) -> Result<Vec<Eigenpair>> {
    if bits < MIN_PRECISION_BITS {
        return Err(Error::invalid(format!(
            "precision_bits {bits} below minimum {MIN_PRECISION_BITS}"
        )));
    }
    let n = matrix.order();
    let mut pairs = Vec::with_capacity(n);
    for parity in [Parity::Even, Parity::Odd] {
        let block = matrix.chain(parity);
        let (values, vectors) = jacobi::symmetric_eigen(block, bits, parity)?;
        for (chi, vec) in values.into_iter().zip(vectors) {
            let mut gamma = vec![Real::zero(bits); n];
            for (i, x) in vec.into_iter().enumerate() {
                gamma[parity.offset() + 2 * i] = x;
            }
            normalize_and_fix_sign(&mut gamma, parity);
            pairs.push(Eigenpair { chi, parity, gamma });
        }
    }
    pairs.sort_by(|a, b| a.chi.partial_cmp(&b.chi).expect("finite eigenvalues"));
    Ok(pairs)
}

fn normalize_and_fix_sign(gamma: &mut [Real], parity: Parity) {
    let bits = gamma[0].precision();
    let norm = gamma
        .iter()
        .fold(Real::zero(bits), |acc, g| acc + g.square())
        .sqrt();
    let lead_negative = gamma
        .iter()
        .skip(parity.offset())
        .step_by(2)
        .find(|g| !g.is_zero())
        .is_some_and(Real::is_negative);
    let scale = if lead_negative { -norm } else { norm };
    for g in gamma.iter_mut() {
        if !g.is_zero() {
            *g = &*g / &scale;
        }
    }
}

/// Eigenvalue `lambda_n` from the Fourier self-mapping at `xi = 0`.
///
/// Even `n`: `lambda = c/(2π) (sqrt(2) gamma_0 / phi_n(0))^2`.
/// Odd `n`: `lambda = c/(2π) (sqrt(6)/3 c gamma_1 / phi_n'(0))^2`.
pub fn compute_lambda(gamma: &[Real], n: usize, c: f64) -> Result<Real> {
    if gamma.len() < 2 {
        return Err(Error::invalid("coefficient vector too short"));
    }
    let bits = gamma[0].precision();
    let half = Real::ratio(1, 2, bits);
    let parity = Parity::of(n);
    // P_k(0) for even k, advanced by P_{k+2}(0) = -(k+1)/(k+2) P_k(0)
    let mut p_even = Real::from_i64(1, bits);
    let mut at_zero = Real::zero(bits);
    let mut k = 0usize;
    while k < gamma.len() {
        match parity {
            Parity::Even => {
                let w = (Real::from_i64(k as i64, bits) + &half).sqrt();
                at_zero = at_zero + &gamma[k] * &w * &p_even;
            }
            Parity::Odd => {
                // P'_{k+1}(0) = (k+1) P_k(0)
                if k + 1 < gamma.len() {
                    let w1 = (Real::from_i64(k as i64 + 1, bits) + &half).sqrt();
                    let dp = Real::from_i64(k as i64 + 1, bits) * &p_even;
                    at_zero = at_zero + &gamma[k + 1] * &w1 * dp;
                }
            }
        }
        p_even = -(p_even * Real::ratio(k as i64 + 1, k as i64 + 2, bits));
        k += 2;
    }
    if at_zero.is_zero() {
        return Err(Error::ParityBookkeeping {
            mode: n,
            detail: match parity {
                Parity::Even => "phi_n(0) vanishes for an even mode".into(),
                Parity::Odd => "phi_n'(0) vanishes for an odd mode".into(),
            },
        });
    }
    let cr = Real::from_f64(c, bits);
    let numerator = match parity {
        Parity::Even => Real::from_i64(2, bits).sqrt() * &gamma[0],
        Parity::Odd => Real::from_i64(6, bits).sqrt() / Real::from_i64(3, bits) * &cr * &gamma[1],
    };
    let ratio = numerator / at_zero;
    let two_pi = Real::pi(bits) * Real::from_i64(2, bits);
    Ok(cr / two_pi * ratio.square())
}

/// Eigenvalue in a form that spans the full double exponent range and
/// beyond: `mantissa * 10^exponent` with `1 <= mantissa < 10`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambda {
    pub mantissa: f64,
    pub exponent: i32,
    value: f64,
}

impl Lambda {
    fn from_real(x: &Real) -> Self {
        let s = x.to_sci_string(17);
        let (m, e) = s.split_once('e').expect("scientific notation");
        Lambda {
            mantissa: m.parse().expect("mantissa digits"),
            exponent: e.parse().expect("exponent digits"),
            value: x.to_f64(),
        }
    }

    /// Correctly rounded double value (0 if below the double range).
    pub fn value(&self) -> f64 {
        self.value
    }
}

impl std::fmt::Display for Lambda {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.6}e{}", self.mantissa, self.exponent)
    }
}

/// One prolate mode `n` of a basis.
#[derive(Debug, Clone)]
pub struct ProlateMode {
    index: usize,
    lambda: Lambda,
    lambda_hp: Real,
    chi: Real,
    gamma_hp: Vec<Real>,
    gamma: Vec<f64>,
    /// gamma_k sqrt(k + 1/2)
    weighted: Vec<f64>,
    amplification: f64,
}

impl ProlateMode {
    fn new(index: usize, chi: Real, gamma_hp: Vec<Real>, lambda_hp: Real) -> Self {
        let gamma: Vec<f64> = gamma_hp.iter().map(Real::to_f64).collect();
        let weighted = gamma
            .iter()
            .enumerate()
            .map(|(k, g)| g * (k as f64 + 0.5).sqrt())
            .collect();
        let bits = lambda_hp.precision();
        let amplification = ((Real::from_i64(1, bits) - &lambda_hp) / &lambda_hp)
            .sqrt()
            .to_f64();
        ProlateMode {
            index,
            lambda: Lambda::from_real(&lambda_hp),
            lambda_hp,
            chi,
            gamma_hp,
            gamma,
            weighted,
            amplification,
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.index)
    }

    pub fn lambda(&self) -> Lambda {
        self.lambda
    }

    pub fn lambda_extended(&self) -> &Real {
        &self.lambda_hp
    }

    pub fn chi_operator_eigenvalue(&self) -> &Real {
        &self.chi
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn gamma_extended(&self) -> &[Real] {
        &self.gamma_hp
    }

    /// `sqrt((1 - lambda) / lambda)` from the extended-precision eigenvalue,
    /// rounded once. Infinite when `lambda` underflows double precision.
    pub fn amplification(&self) -> f64 {
        self.amplification
    }
}

/// Immutable prolate data for one space-bandwidth product.
#[derive(Debug, Clone)]
pub struct ProlateBasis {
    c: f64,
    matrix_order: usize,
    precision_bits: usize,
    modes: Vec<ProlateMode>,
}

/// Initial Legendre truncation length for `num_modes` modes.
pub fn default_order(c: f64, num_modes: usize) -> usize {
    (2 * num_modes + 30).max((4.0 * c).ceil() as usize + 30)
}

impl ProlateBasis {
    /// Computes modes `0..num_modes`, doubling the truncation length until the
    /// tail coefficients of every retained mode drop below [`TAIL_TOLERANCE`].
    pub fn build(c: f64, num_modes: usize, precision_bits: usize) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!(
                "space-bandwidth product must be positive, got {c}"
            )));
        }
        if num_modes == 0 {
            return Err(Error::invalid("number of modes must be at least 1"));
        }
        if precision_bits < MIN_PRECISION_BITS {
            return Err(Error::invalid(format!(
                "precision_bits {precision_bits} below minimum {MIN_PRECISION_BITS}"
            )));
        }
        let mut order = default_order(c, num_modes);
        for _ in 0..=MAX_ORDER_DOUBLINGS {
            let matrix = build_operator_matrix(c, order, precision_bits)?;
            let mut pairs = solve_eigenproblem(&matrix, precision_bits)?;
            pairs.truncate(num_modes);
            let tail = Real::from_f64(TAIL_TOLERANCE, precision_bits);
            let tail_ok = pairs
                .iter()
                .all(|p| p.gamma[order - 1].abs() < tail && p.gamma[order - 2].abs() < tail);
            if !tail_ok {
                order *= 2;
                continue;
            }
            let mut modes = Vec::with_capacity(num_modes);
            for (n, pair) in pairs.into_iter().enumerate() {
                if pair.parity != Parity::of(n) {
                    return Err(Error::ParityBookkeeping {
                        mode: n,
                        detail: format!("eigenpair has {} parity", pair.parity),
                    });
                }
                let lead = &pair.gamma[pair.parity.offset()];
                if lead.binary_exponent() < -((precision_bits - LAMBDA_GUARD_BITS) as i32) {
                    return Err(Error::InsufficientPrecision {
                        mode: n,
                        bits: precision_bits,
                    });
                }
                let lambda = compute_lambda(&pair.gamma, n, c)?;
                modes.push(ProlateMode::new(n, pair.chi, pair.gamma, lambda));
            }
            let basis = ProlateBasis {
                c,
                matrix_order: order,
                precision_bits,
                modes,
            };
            basis.check_invariants()?;
            return Ok(basis);
        }
        Err(Error::TruncationFailure { order })
    }

    pub(crate) fn from_parts(
        c: f64,
        matrix_order: usize,
        precision_bits: usize,
        raw: Vec<(Real, Real, Vec<Real>)>,
    ) -> Result<Self> {
        let modes = raw
            .into_iter()
            .enumerate()
            .map(|(n, (lambda, chi, gamma))| ProlateMode::new(n, chi, gamma, lambda))
            .collect();
        let basis = ProlateBasis {
            c,
            matrix_order,
            precision_bits,
            modes,
        };
        basis.check_invariants()?;
        Ok(basis)
    }

    /// Structural checks shared by construction and loading.
    pub fn check_invariants(&self) -> Result<()> {
        let k = self.modes.len();
        if k == 0 {
            return Err(Error::Invariant("basis has no modes".into()));
        }
        if self.matrix_order < k + 4 {
            return Err(Error::Invariant(format!(
                "matrix order {} < K + 4 = {}",
                self.matrix_order,
                k + 4
            )));
        }
        let bits = self.precision_bits;
        let norm_tol = Real::from_f64(1e-30, bits);
        let one = Real::from_i64(1, bits);
        for (n, mode) in self.modes.iter().enumerate() {
            if mode.index != n {
                return Err(Error::Invariant(format!(
                    "mode {n} stored at index {}",
                    mode.index
                )));
            }
            if mode.gamma_hp.len() != self.matrix_order {
                return Err(Error::Invariant(format!(
                    "mode {n} has {} coefficients, expected {}",
                    mode.gamma_hp.len(),
                    self.matrix_order
                )));
            }
            let off = Parity::of(n).offset();
            for (j, g) in mode.gamma_hp.iter().enumerate() {
                if j % 2 != off && !g.is_zero() {
                    return Err(Error::Invariant(format!(
                        "mode {n}: coefficient {j} must vanish by parity"
                    )));
                }
            }
            let norm = mode
                .gamma_hp
                .iter()
                .fold(Real::zero(bits), |acc, g| acc + g.square());
            if (norm - &one).abs() > norm_tol {
                return Err(Error::Invariant(format!(
                    "mode {n}: coefficients not unit-normalized"
                )));
            }
            if !mode.gamma_hp[off].is_zero() && mode.gamma_hp[off].is_negative() {
                return Err(Error::Invariant(format!(
                    "mode {n}: leading coefficient must be positive"
                )));
            }
            let lam = &mode.lambda_hp;
            if lam.is_zero() || lam.is_negative() || *lam >= one {
                return Err(Error::Invariant(format!(
                    "lambda_{n} = {lam} outside (0, 1)"
                )));
            }
            if n > 0 && *lam >= self.modes[n - 1].lambda_hp {
                return Err(Error::Invariant(format!(
                    "lambda_{n} = {lam} not below lambda_{} = {}",
                    n - 1,
                    self.modes[n - 1].lambda_hp
                )));
            }
        }
        let trace: f64 = self.modes.iter().map(|m| m.lambda.value()).sum();
        if trace > 2.0 * self.c / PI * (1.0 + 1e-12) {
            return Err(Error::Invariant(format!(
                "eigenvalue sum {trace} exceeds kernel trace {}",
                2.0 * self.c / PI
            )));
        }
        Ok(())
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn matrix_order(&self) -> usize {
        self.matrix_order
    }

    pub fn precision_bits(&self) -> usize {
        self.precision_bits
    }

    pub fn modes(&self) -> &[ProlateMode] {
        &self.modes
    }

    pub fn mode(&self, n: usize) -> Result<&ProlateMode> {
        self.modes.get(n).ok_or_else(|| {
            Error::invalid(format!(
                "mode {n} out of range (basis has {})",
                self.modes.len()
            ))
        })
    }

    /// `lambda_n` as a double.
    pub fn lambda(&self, n: usize) -> Result<f64> {
        Ok(self.mode(n)?.lambda.value())
    }

    fn check_count(&self, count: usize) -> Result<()> {
        if count > self.modes.len() {
            return Err(Error::invalid(format!(
                "requested {count} modes but basis has {}",
                self.modes.len()
            )));
        }
        Ok(())
    }

    /// `phi_n(s)` on the core `|s| <= 1`.
    pub fn eval_phi(&self, n: usize, s: f64) -> Result<f64> {
        self.mode(n)?;
        Ok(self.phi_all(s, n + 1)?[n])
    }

    /// `[phi_0(s), ..., phi_{count-1}(s)]`.
    pub fn phi_all(&self, s: f64, count: usize) -> Result<Vec<f64>> {
        self.check_count(count)?;
        if !(s.abs() <= 1.0) {
            return Err(Error::Domain {
                what: "s",
                value: s,
                domain: "core |s| <= 1 (use eval_chi for the wings)",
            });
        }
        let mut p = vec![0.0; self.matrix_order];
        legendre_p_all(s, &mut p);
        Ok(self.modes[..count]
            .iter()
            .map(|m| parity_dot(&m.weighted, &p, m.index % 2))
            .collect())
    }

    /// `phi_n'(s)` on the core.
    pub fn eval_phi_derivative(&self, n: usize, s: f64) -> Result<f64> {
        let mode = self.mode(n)?;
        if !(s.abs() <= 1.0) {
            return Err(Error::Domain {
                what: "s",
                value: s,
                domain: "core |s| <= 1",
            });
        }
        let mut p = vec![0.0; self.matrix_order];
        legendre_p_all(s, &mut p);
        // P'_k from (1-s^2) P'_k = k (P_{k-1} - s P_k), with P'_k(±1) = (±1)^{k+1} k(k+1)/2
        let deriv = |k: usize| -> f64 {
            if k == 0 {
                return 0.0;
            }
            let kf = k as f64;
            if (1.0 - s * s).abs() < 1e-300 {
                let sign = if s > 0.0 || k % 2 == 1 { 1.0 } else { -1.0 };
                return sign * kf * (kf + 1.0) / 2.0;
            }
            kf * (p[k - 1] - s * p[k]) / (1.0 - s * s)
        };
        Ok((n % 2..self.matrix_order)
            .step_by(2)
            .map(|k| mode.weighted[k] * deriv(k))
            .sum())
    }

    /// `psi_n(x)` for any real `x`.
    pub fn eval_psi(&self, n: usize, x: f64) -> Result<f64> {
        self.mode(n)?;
        Ok(self.psi_all(x, n + 1)?[n])
    }

    /// `[psi_0(x), ..., psi_{count-1}(x)]`.
    ///
    /// The phase `i^n (-i)^k` reduces to `(-1)^((n-k)/2)` on the surviving
    /// same-parity terms, so every value is real.
    pub fn psi_all(&self, x: f64, count: usize) -> Result<Vec<f64>> {
        self.check_count(count)?;
        if !x.is_finite() {
            return Err(Error::Domain {
                what: "x",
                value: x,
                domain: "finite reals",
            });
        }
        let mut j = vec![0.0; self.matrix_order];
        spherical_bessel_j_all(self.c * x, &mut j);
        let scale = (2.0 * self.c / PI).sqrt();
        Ok(self.modes[..count]
            .iter()
            .map(|m| {
                let n = m.index;
                let mut acc = 0.0;
                for k in (n % 2..self.matrix_order).step_by(2) {
                    let term = m.weighted[k] * j[k];
                    if ((n as i64 - k as i64) / 2).rem_euclid(2) == 0 {
                        acc += term;
                    } else {
                        acc -= term;
                    }
                }
                scale * acc
            })
            .collect())
    }

    /// `chi_n(s) = psi_n(s) / sqrt(1 - lambda_n)` on the wings `|s| > 1`.
    pub fn eval_chi(&self, n: usize, s: f64) -> Result<f64> {
        let lam = self.lambda(n)?;
        if !(s.abs() > 1.0) {
            return Err(Error::Domain {
                what: "s",
                value: s,
                domain: "wings |s| > 1",
            });
        }
        Ok(self.eval_psi(n, s)? / (1.0 - lam).sqrt())
    }
}

/// `sum_k w_k p_k` over `k ≡ offset (mod 2)`.
fn parity_dot(w: &[f64], p: &[f64], offset: usize) -> f64 {
    w.iter()
        .zip(p)
        .skip(offset)
        .step_by(2)
        .map(|(a, b)| a * b)
        .sum()
}
