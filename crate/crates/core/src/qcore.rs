//! Scalar foundation: the nome, truncation control, q-Pochhammer symbols,
//! theta functions and elementary symmetric polynomials.
//!
//! All functions are pure. Infinite products are truncated by a geometric
//! tail rule: the product `prod_{i>=0} (1 - a q^i)` stops at the first `i`
//! with `|a q^i| <= tol * (1 - |q|)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QError, Result};

/// Complex scalar used throughout the crate.
pub type Scalar = Complex64;

/// Shorthand for a real scalar.
#[inline]
pub fn re(x: f64) -> Scalar {
    Scalar::new(x, 0.0)
}

pub(crate) fn ensure_finite(z: Scalar, context: &'static str) -> Result<Scalar> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(QError::NonFinite(context))
    }
}

/// The base `q` of every q-series, with `0 < |q| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Scalar", into = "Scalar")]
pub struct Nome(Scalar);

impl Nome {
    pub fn new(q: Scalar) -> Result<Self> {
        let m = q.norm();
        if !(m > 0.0 && m < 1.0) || !m.is_finite() {
            return Err(QError::Domain(format!("nome must satisfy 0 < |q| < 1, got |q| = {m}")));
        }
        Ok(Nome(q))
    }

    pub fn real(q: f64) -> Result<Self> {
        Self::new(re(q))
    }

    #[inline]
    pub fn value(&self) -> Scalar {
        self.0
    }

    #[inline]
    pub fn abs(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_real_positive(&self) -> bool {
        self.0.im == 0.0 && self.0.re > 0.0
    }

    /// Integer power `q^n`, exact repeated multiplication for small `|n|`.
    pub fn powi(&self, n: i32) -> Scalar {
        self.0.powi(n)
    }

    /// Principal power `q^e`.
    pub fn powc(&self, e: Scalar) -> Scalar {
        (e * self.0.ln()).exp()
    }

    /// `log_q z` on the principal branch.
    pub fn log_of(&self, z: Scalar) -> Scalar {
        z.ln() / self.0.ln()
    }

    /// Distance of `log_q z` from the integers, minimised over nearby branches
    /// of the logarithm. Small values mean `z` is close to some `q^m`.
    pub fn lattice_distance(&self, z: Scalar) -> f64 {
        if z.norm() == 0.0 {
            return f64::INFINITY;
        }
        let lq = self.0.ln();
        let lz = z.ln();
        (-2..=2)
            .map(|k| {
                let w = (lz + Scalar::new(0.0, 2.0 * std::f64::consts::PI * k as f64)) / lq;
                (w - Scalar::new(w.re.round(), 0.0)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<Scalar> for Nome {
    type Error = QError;
    fn try_from(q: Scalar) -> Result<Self> {
        Nome::new(q)
    }
}

impl From<Nome> for Scalar {
    fn from(q: Nome) -> Scalar {
        q.0
    }
}

/// Tolerance and caps governing every infinite product and sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Target absolute tail bound.
    pub tol: f64,
    /// Hard cap on factors per product / terms per sum.
    pub max_terms: usize,
    /// Cap on the total index `|l|` of multiple sums.
    pub max_total_index: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { tol: 1e-15, max_terms: 10_000, max_total_index: 60 }
    }
}

impl TruncationPolicy {
    pub fn new(tol: f64, max_terms: usize, max_total_index: usize) -> Result<Self> {
        let p = TruncationPolicy { tol, max_terms, max_total_index };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(QError::InvalidParams(format!("truncation tol must be > 0, got {}", self.tol)));
        }
        if self.max_terms == 0 || self.max_total_index == 0 {
            return Err(QError::InvalidParams("truncation caps must be positive".into()));
        }
        Ok(())
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// `(a; q)_inf = prod_{i>=0} (1 - a q^i)`.
pub fn qpoch_inf(a: Scalar, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let cutoff = pol.tol * (1.0 - q.abs());
    let qv = q.value();
    let mut prod = Scalar::new(1.0, 0.0);
    let mut term = a;
    for _ in 0..pol.max_terms {
        if term.norm() <= cutoff {
            return ensure_finite(prod, "qpoch_inf");
        }
        prod *= Scalar::new(1.0, 0.0) - term;
        term *= qv;
    }
    Err(QError::TruncationExceeded { context: "qpoch_inf", max_terms: pol.max_terms })
}

/// `(a; q)_l = prod_{i=0}^{l-1} (1 - a q^i)`, evaluated as a finite product.
pub fn qpoch_fin(a: Scalar, q: Nome, l: usize) -> Scalar {
    let qv = q.value();
    let mut prod = Scalar::new(1.0, 0.0);
    let mut term = a;
    for _ in 0..l {
        prod *= Scalar::new(1.0, 0.0) - term;
        term *= qv;
    }
    prod
}

/// Length argument of a q-Pochhammer symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PochLength {
    Finite(usize),
    Infinite,
}

/// `(a_1, ..., a_r; q)_l = (a_1)_l ... (a_r)_l`.
pub fn qpoch_multi(args: &[Scalar], q: Nome, l: PochLength, pol: &TruncationPolicy) -> Result<Scalar> {
    let mut prod = Scalar::new(1.0, 0.0);
    for &a in args {
        prod *= match l {
            PochLength::Finite(n) => qpoch_fin(a, q, n),
            PochLength::Infinite => qpoch_inf(a, q, pol)?,
        };
    }
    ensure_finite(prod, "qpoch_multi")
}

/// Shorthand for the infinite product of several Pochhammer symbols.
pub fn qpoch_inf_all(args: &[Scalar], q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    qpoch_multi(args, q, PochLength::Infinite, pol)
}

/// `theta(x) = (x, q/x; q)_inf`.
pub fn theta(x: Scalar, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    if x.norm() == 0.0 {
        return Err(QError::Domain("theta(0) is undefined".into()));
    }
    let v = qpoch_inf(x, q, pol)? * qpoch_inf(q.value() / x, q, pol)?;
    ensure_finite(v, "theta")
}

/// `theta(x_1, ..., x_r) = theta(x_1) ... theta(x_r)`.
pub fn theta_multi(xs: &[Scalar], q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    xs.iter().try_fold(Scalar::new(1.0, 0.0), |acc, &x| Ok(acc * theta(x, q, pol)?))
}

/// Elementary symmetric polynomial `e_k(xs)`; zero when `k > xs.len()`.
pub fn elem_sym(k: usize, xs: &[Scalar]) -> Scalar {
    if k > xs.len() {
        return Scalar::new(0.0, 0.0);
    }
    // e[j] holds e_j of the prefix processed so far.
    let mut e = vec![Scalar::new(0.0, 0.0); xs.len() + 1];
    e[0] = Scalar::new(1.0, 0.0);
    for (n, &x) in xs.iter().enumerate() {
        for j in (1..=n + 1).rev() {
            let prev = e[j - 1];
            e[j] += prev * x;
        }
    }
    e[k]
}

/// `exp(e * Log x)` with the principal logarithm (imaginary part in `(-pi, pi]`).
pub fn principal_power(x: Scalar, e: Scalar) -> Result<Scalar> {
    if x.norm() == 0.0 {
        return Err(QError::Domain("principal_power base must be nonzero".into()));
    }
    if e == Scalar::new(0.0, 0.0) {
        return Ok(Scalar::new(1.0, 0.0));
    }
    if e == Scalar::new(1.0, 0.0) {
        return Ok(x);
    }
    ensure_finite((e * x.ln()).exp(), "principal_power")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> Nome {
        Nome::real(v).unwrap()
    }

    fn close(a: Scalar, b: Scalar, rel: f64) -> bool {
        (a - b).norm() <= rel * a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn nome_rejects_out_of_range() {
        assert!(Nome::real(0.0).is_err());
        assert!(Nome::real(1.0).is_err());
        assert!(Nome::new(Scalar::new(0.8, 0.8)).is_err());
        assert!(Nome::new(Scalar::new(0.3, 0.4)).is_ok());
    }

    #[test]
    fn policy_validation() {
        assert!(TruncationPolicy::new(0.0, 10, 10).is_err());
        assert!(TruncationPolicy::new(1e-12, 0, 10).is_err());
        assert!(TruncationPolicy::new(1e-12, 10, 10).is_ok());
    }

    #[test]
    fn qpoch_inf_of_zero_is_one() {
        let p = TruncationPolicy::default();
        assert_eq!(qpoch_inf(re(0.0), q(0.5), &p).unwrap(), re(1.0));
    }

    #[test]
    fn qpoch_inf_telescopes() {
        let p = TruncationPolicy::default();
        let nq = q(0.5);
        let a = Scalar::new(0.7, -0.2);
        let lhs = qpoch_inf(a, nq, &p).unwrap() / qpoch_inf(a * nq.value(), nq, &p).unwrap();
        assert!(close(lhs, re(1.0) - a, 1e-14));
    }

    #[test]
    fn qpoch_inf_matches_long_product() {
        let p = TruncationPolicy::default();
        let mut direct = re(1.0);
        for i in 0..200 {
            direct *= re(1.0 - 0.3 * 0.5f64.powi(i));
        }
        assert!(close(qpoch_inf(re(0.3), q(0.5), &p).unwrap(), direct, 1e-13));
    }

    #[test]
    fn qpoch_inf_reports_truncation() {
        let p = TruncationPolicy::new(1e-15, 3, 10).unwrap();
        let err = qpoch_inf(re(0.9), q(0.9), &p).unwrap_err();
        assert!(matches!(err, QError::TruncationExceeded { .. }));
    }

    #[test]
    fn qpoch_fin_small_lengths() {
        let a = Scalar::new(0.4, 0.1);
        assert_eq!(qpoch_fin(a, q(0.5), 0), re(1.0));
        assert_eq!(qpoch_fin(a, q(0.5), 1), re(1.0) - a);
    }

    #[test]
    fn qpoch_fin_matches_ratio_of_infinite_products() {
        let p = TruncationPolicy::default();
        let nq = q(0.5);
        let ratio = qpoch_inf(re(0.3), nq, &p).unwrap() / qpoch_inf(re(0.3 * 0.5f64.powi(5)), nq, &p).unwrap();
        assert!(close(qpoch_fin(re(0.3), nq, 5), ratio, 1e-12));
    }

    #[test]
    fn qpoch_fin_is_exact_at_poles_of_the_ratio_form() {
        // (q^{-2})_5 contains the factor (1 - q^{-2} q^2) = 0.
        let nq = q(0.5);
        assert_eq!(qpoch_fin(re(4.0), nq, 5), re(0.0));
    }

    #[test]
    fn qpoch_multi_cases() {
        let p = TruncationPolicy::default();
        let nq = q(0.5);
        assert_eq!(qpoch_multi(&[], nq, PochLength::Infinite, &p).unwrap(), re(1.0));
        let a = re(0.35);
        assert_eq!(qpoch_multi(&[a], nq, PochLength::Finite(4), &p).unwrap(), qpoch_fin(a, nq, 4));
        let both = qpoch_multi(&[re(0.2), re(0.4)], nq, PochLength::Infinite, &p).unwrap();
        let sep = qpoch_inf(re(0.2), nq, &p).unwrap() * qpoch_inf(re(0.4), nq, &p).unwrap();
        assert!(close(both, sep, 1e-13));
    }

    #[test]
    fn theta_basic_properties() {
        let p = TruncationPolicy::default();
        let nq = q(0.5);
        assert_eq!(theta(nq.value(), nq, &p).unwrap(), re(0.0));
        let x = Scalar::new(0.37, 0.21);
        assert!(close(theta(nq.value() / x, nq, &p).unwrap(), theta(x, nq, &p).unwrap(), 1e-14));
        let shifted = theta(nq.value() * x, nq, &p).unwrap();
        assert!(close(shifted, -theta(x, nq, &p).unwrap() / x, 1e-12));
        assert!(matches!(theta(re(0.0), nq, &p), Err(QError::Domain(_))));
    }

    #[test]
    fn theta_multi_cases() {
        let p = TruncationPolicy::default();
        let nq = q(0.4);
        assert_eq!(theta_multi(&[], nq, &p).unwrap(), re(1.0));
        let x = re(0.3);
        assert_eq!(theta_multi(&[x], nq, &p).unwrap(), theta(x, nq, &p).unwrap());
        let prod = theta(re(0.3), nq, &p).unwrap() * theta(re(0.7), nq, &p).unwrap();
        assert!(close(theta_multi(&[re(0.3), re(0.7)], nq, &p).unwrap(), prod, 1e-13));
    }

    #[test]
    fn elem_sym_definition() {
        let xs = [re(2.0), re(3.0), re(5.0)];
        assert_eq!(elem_sym(0, &xs[..2]), re(1.0));
        assert_eq!(elem_sym(2, &xs), re(6.0 + 10.0 + 15.0));
        assert_eq!(elem_sym(3, &xs), re(30.0));
        assert_eq!(elem_sym(4, &xs), re(0.0));
    }

    #[test]
    fn principal_power_cases() {
        let x = Scalar::new(-1.3, 0.4);
        assert_eq!(principal_power(x, re(0.0)).unwrap(), re(1.0));
        assert_eq!(principal_power(x, re(1.0)).unwrap(), x);
        assert!(close(principal_power(re(4.0), re(0.5)).unwrap(), re(2.0), 1e-15));
        assert!(principal_power(re(0.0), re(0.5)).is_err());
        // Branch cut: Log(-1) = i*pi, so (-1)^{1/2} = i.
        assert!(close(principal_power(re(-1.0), re(0.5)).unwrap(), Scalar::new(0.0, 1.0), 1e-15));
    }

    #[test]
    fn lattice_distance_detects_q_powers() {
        let nq = q(0.5);
        assert!(nq.lattice_distance(re(8.0)) < 1e-12);
        assert!(nq.lattice_distance(re(0.25)) < 1e-12);
        assert!((nq.lattice_distance(re(2f64.powf(0.5))) - 0.5).abs() < 1e-12);
    }
}
