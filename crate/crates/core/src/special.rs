//! Numeric kernels for the two prolate series: Legendre polynomials,
//! spherical Bessel functions of the first kind, and Gauss–Legendre rules.

use std::sync::OnceLock;

/// `P_k(s)` by the ascending three-term recurrence.
pub fn legendre_p(k: usize, s: f64) -> f64 {
    let mut out = vec![0.0; k + 1];
    legendre_p_all(s, &mut out);
    out[k]
}

/// Fills `out[k] = P_k(s)` for `k = 0..out.len()`.
pub fn legendre_p_all(s: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = s;
    for k in 1..out.len() - 1 {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0) * s * out[k] - kf * out[k - 1]) / (kf + 1.0);
    }
}

/// `j_k(x)`, the spherical Bessel function of the first kind.
pub fn spherical_bessel_j(k: usize, x: f64) -> f64 {
    let mut out = vec![0.0; k + 1];
    spherical_bessel_j_all(x, &mut out);
    out[k]
}

/// Fills `out[k] = j_k(x)` for `k = 0..out.len()`.
///
/// Orders above `|x|` are only reachable stably by recurring downward, so when
/// the requested range extends past `|x|` the whole sequence comes from a
/// Miller recurrence normalized against `j_0` (or `j_1` near a zero of `j_0`).
/// Otherwise the forward recurrence is used. Odd orders pick up the sign of `x`.
pub fn spherical_bessel_j_all(x: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    let ax = x.abs();
    if ax == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
        return;
    }
    let (sn, cs) = ax.sin_cos();
    let j0 = sn / ax;
    let j1 = sn / (ax * ax) - cs / ax;
    let kmax = n - 1;

    if (kmax as f64) <= ax {
        out[0] = j0;
        if n > 1 {
            out[1] = j1;
        }
        for k in 1..kmax {
            out[k + 1] = (2.0 * k as f64 + 1.0) / ax * out[k] - out[k - 1];
        }
    } else {
        let top = kmax.max(ax.ceil() as usize);
        let start = top + 16 + (40.0 * top as f64).sqrt().ceil() as usize;
        let mut next = 0.0f64; // j_{m+1}
        let mut cur = 1e-300f64; // j_m
        for m in (1..=start).rev() {
            // cur = j_m, next = j_{m+1}  ->  j_{m-1}
            let prev = (2.0 * m as f64 + 1.0) / ax * cur - next;
            next = cur;
            cur = prev;
            if m - 1 <= kmax {
                out[m - 1] = cur;
            }
            if cur.abs() > 1e250 {
                cur *= 1e-250;
                next *= 1e-250;
                if m - 1 <= kmax {
                    for v in &mut out[m - 1..] {
                        *v *= 1e-250;
                    }
                }
            }
        }
        let norm = if j0.abs() >= j1.abs() || n == 1 {
            j0 / out[0]
        } else {
            j1 / out[1]
        };
        for v in out.iter_mut() {
            *v *= norm;
        }
    }
    if x < 0.0 {
        for v in out.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Tricomi initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                    dp = legendre_with_derivative(n, z).1;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let pm1 = if n == 0 { 0.0 } else { p0 };
    let d = n as f64 * (x * p - pm1) / (x * x - 1.0);
    (p, d)
}

/// Number of nodes in the standard core quadrature.
pub const CORE_NODES: usize = 200;

/// Shared 200-node rule.
pub fn core_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(CORE_NODES))
}

/// Shared 400-node rule, used for the node-doubling error estimate.
pub fn doubled_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(2 * CORE_NODES))
}

/// Integral over `[a, b]` with the 400-node value and `|I_400 - I_200|` as
/// the error estimate.
pub fn integrate_with_estimate<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> (f64, f64) {
    let coarse = core_rule().integrate(a, b, &mut f);
    let fine = doubled_rule().integrate(a, b, &mut f);
    (fine, (fine - coarse).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_p2_at_half() {
        assert_eq!(legendre_p(2, 0.5), -0.125);
        assert_eq!(legendre_p(0, 0.3), 1.0);
        assert_eq!(legendre_p(1, -0.3), -0.3);
    }

    #[test]
    fn legendre_endpoints() {
        for k in 0..40 {
            assert_relative_eq!(legendre_p(k, 1.0), 1.0, epsilon = 1e-13);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_relative_eq!(legendre_p(k, -1.0), sign, epsilon = 1e-13);
        }
    }

    #[test]
    fn j0_at_pi_vanishes() {
        assert!(spherical_bessel_j(0, std::f64::consts::PI).abs() <= 1e-15);
    }

    #[test]
    fn limits_at_origin() {
        assert_eq!(spherical_bessel_j(0, 0.0), 1.0);
        for k in 1..10 {
            assert_eq!(spherical_bessel_j(k, 0.0), 0.0);
        }
    }

    fn double_factorial_odd(k: usize) -> f64 {
        (1..=2 * k + 1).step_by(2).map(|v| v as f64).product()
    }

    #[test]
    fn small_argument_matches_leading_taylor_term() {
        // j_k(x) = x^k/(2k+1)!! * (1 - x^2/(2(2k+3)) + ...)
        let x = 0.1f64;
        let k = 5;
        let lead = x.powi(k as i32) / double_factorial_odd(k);
        let rel = (spherical_bessel_j(k, x) - lead).abs() / lead;
        // next Taylor correction is x^2/26 ~ 3.8e-4; the oracle is the two-term series
        let two_term = lead * (1.0 - x * x / (2.0 * (2 * k + 3) as f64));
        assert!(rel < 1e-3);
        assert_relative_eq!(spherical_bessel_j(k, x), two_term, max_relative = 1e-6);
    }

    #[test]
    fn closed_forms_low_order() {
        for &x in &[0.3, 1.0, 2.7, 9.5, 40.0, 123.4] {
            let (s, c) = (f64::sin(x), f64::cos(x));
            let j1 = s / (x * x) - c / x;
            let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
            let mut out = vec![0.0; 3];
            spherical_bessel_j_all(x, &mut out);
            assert_relative_eq!(out[1], j1, max_relative = 1e-10, epsilon = 1e-14);
            assert_relative_eq!(out[2], j2, max_relative = 1e-10, epsilon = 1e-14);
        }
    }

    #[test]
    fn downward_and_upward_regimes_agree_at_boundary() {
        // kmax just below and just above x select different branches
        let x = 20.5;
        let mut lo = vec![0.0; 21];
        let mut hi = vec![0.0; 60];
        spherical_bessel_j_all(x, &mut lo);
        spherical_bessel_j_all(x, &mut hi);
        for k in 0..21 {
            assert_relative_eq!(lo[k], hi[k], max_relative = 1e-10, epsilon = 1e-15);
        }
    }

    #[test]
    fn parity_in_argument() {
        let mut p = vec![0.0; 12];
        let mut m = vec![0.0; 12];
        spherical_bessel_j_all(3.3, &mut p);
        spherical_bessel_j_all(-3.3, &mut m);
        for k in 0..12 {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(m[k], s * p[k]);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(10);
        // degree 19 is exact for 10 nodes
        let v = rule.integrate(-1.0, 1.0, |x| x.powi(18));
        assert_relative_eq!(v, 2.0 / 19.0, max_relative = 1e-14);
        let w: f64 = rule.weights.iter().sum();
        assert_relative_eq!(w, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn core_rule_is_accurate() {
        let (v, err) = integrate_with_estimate(0.0, std::f64::consts::PI, f64::sin);
        assert_relative_eq!(v, 2.0, max_relative = 1e-14);
        assert!(err < 1e-13);
        let r = core_rule();
        assert_eq!(r.len(), 200);
        for (a, b) in r.nodes.iter().zip(r.nodes.iter().rev()) {
            assert_eq!(*a, -*b);
        }
    }
}
