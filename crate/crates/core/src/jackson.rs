//! Jackson q-integrals and the integrands built on them: Riemann-Papperitz
//! (`phi`), Jordan-Pochhammer (both sides of the Mimachi formula) and the
//! gauge-prefixed integrals of the degree-three equation.

use serde::{Deserialize, Serialize};

use crate::dd::{dd, dd_norm, qpoch_inf_dd, undd, Cdd, CANCELLATION_RATIO, DD_TOL};
use crate::error::{QError, Result};
use crate::qcore::{ensure_finite, principal_power, qpoch_inf, re, Nome, Scalar, TruncationPolicy};
use crate::qdiff::H3Params;

/// Consecutive sub-tolerance terms required before a Jackson sum stops.
const STOP_WINDOW: usize = 5;
/// Magnitude below which a denominator Pochhammer is treated as a pole.
const POLE_EPS: f64 = 1e-13;
/// Endpoints whose ratio lies this close to the q-lattice are rejected.
const LATTICE_EPS: f64 = 1e-6;

/// A function evaluated at the nodes of a Jackson integral.
pub trait Integrand: Sync {
    fn eval(&self, t: Scalar) -> Result<Scalar>;
}

impl<F> Integrand for F
where
    F: Fn(Scalar) -> Result<Scalar> + Sync,
{
    fn eval(&self, t: Scalar) -> Result<Scalar> {
        self(t)
    }
}

/// Sums `f(tau q^n) tau q^n` for `n = 0, 1, ...` (or `n = -1, -2, ...` when
/// `step` is `1/q`) until the window rule is met. Returns the sum and the
/// accumulated magnitude.
fn lattice_tail(
    tau: Scalar,
    step: Scalar,
    f: &dyn Integrand,
    start_scale: f64,
    pol: &TruncationPolicy,
    context: &'static str,
) -> Result<(Scalar, f64)> {
    let mut sum = re(0.0);
    let mut scale = start_scale;
    let mut small = 0;
    let mut t = tau;
    for _ in 0..pol.max_terms {
        let v = f.eval(t)?;
        let term = ensure_finite(v * t, context)?;
        sum += term;
        scale += term.norm();
        if term.norm() <= pol.tol * scale {
            small += 1;
            if small >= STOP_WINDOW {
                return Ok((sum, scale));
            }
        } else {
            small = 0;
        }
        t *= step;
    }
    Err(QError::TruncationExceeded { context, max_terms: pol.max_terms })
}

/// `int_0^tau f(t) d_qt = (1-q) sum_{n>=0} f(tau q^n) tau q^n`.
pub fn jackson_0_to(tau: Scalar, f: &dyn Integrand, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    if tau.norm() == 0.0 {
        return Ok(re(0.0));
    }
    let (s, _) = lattice_tail(tau, q.value(), f, 0.0, pol, "jackson_0_to")?;
    ensure_finite((re(1.0) - q.value()) * s, "jackson_0_to")
}

/// `int_0^{tau inf} f(t) d_qt = (1-q) sum_{n in Z} f(tau q^n) tau q^n`.
pub fn jackson_bilateral(tau: Scalar, f: &dyn Integrand, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    if tau.norm() == 0.0 {
        return Err(QError::Domain("bilateral Jackson integral needs tau != 0".into()));
    }
    let (pos, scale) = lattice_tail(tau, q.value(), f, 0.0, pol, "jackson_bilateral (n >= 0)")?;
    let qinv = re(1.0) / q.value();
    let (neg, _) = lattice_tail(tau * qinv, qinv, f, scale, pol, "jackson_bilateral (n < 0)")?;
    ensure_finite((re(1.0) - q.value()) * (pos + neg), "jackson_bilateral")
}

/// `int_{tau1}^{tau2} = int_0^{tau2} - int_0^{tau1}`.
pub fn jackson_between(
    tau1: Scalar,
    tau2: Scalar,
    f: &dyn Integrand,
    q: Nome,
    pol: &TruncationPolicy,
) -> Result<Scalar> {
    if tau1 == tau2 {
        return Ok(re(0.0));
    }
    Ok(jackson_0_to(tau2, f, q, pol)? - jackson_0_to(tau1, f, q, pol)?)
}

/// Parameters `(a_1..a_{M+3}; b_1..b_{M+3})` of the Riemann-Papperitz integrand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RPParams {
    pub m: usize,
    pub a: Vec<Scalar>,
    pub b: Vec<Scalar>,
}

/// Relative tolerance of the balance check.
pub const BALANCE_TOL: f64 = 1e-12;

impl RPParams {
    /// Builds and validates a balanced parameter set.
    pub fn new(a: Vec<Scalar>, b: Vec<Scalar>, q: Nome) -> Result<Self> {
        let p = Self::unchecked(a, b)?;
        p.check_balance(q)?;
        Ok(p)
    }

    /// Checks shapes and nonzero entries but not the balance condition.
    pub fn unchecked(a: Vec<Scalar>, b: Vec<Scalar>) -> Result<Self> {
        if a.len() != b.len() || a.len() < 4 {
            return Err(QError::InvalidParams(format!(
                "need equal-length a and b with at least 4 entries, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(b.iter()).any(|z| z.norm() == 0.0) {
            return Err(QError::InvalidParams("all a_i and b_i must be nonzero".into()));
        }
        Ok(RPParams { m: a.len() - 3, a, b })
    }

    pub fn n(&self) -> usize {
        self.m + 3
    }

    /// `|a_1...a_{M+3} - q^2 b_1...b_{M+3}| / |q^2 b_1...b_{M+3}|`.
    pub fn balance_residual(&self, q: Nome) -> f64 {
        let pa: Scalar = self.a.iter().product();
        let pb: Scalar = self.b.iter().product::<Scalar>() * q.value() * q.value();
        (pa - pb).norm() / pb.norm()
    }

    pub fn check_balance(&self, q: Nome) -> Result<()> {
        let residual = self.balance_residual(q);
        if residual.is_finite() && residual <= BALANCE_TOL {
            Ok(())
        } else {
            Err(QError::BalanceViolation { residual })
        }
    }

    /// Validates a 1-based index.
    pub fn index(&self, i: usize) -> Result<usize> {
        if (1..=self.n()).contains(&i) {
            Ok(i - 1)
        } else {
            Err(QError::InvalidParams(format!("index {i} outside 1..={}", self.n())))
        }
    }

    /// The same integrand with the `a` entries reordered; `order` lists
    /// 1-based indices.
    pub fn permute_a(&self, order: &[usize]) -> Result<Self> {
        let a = order.iter().map(|&i| self.index(i).map(|k| self.a[k])).collect::<Result<Vec<_>>>()?;
        RPParams::unchecked(a, self.b.clone())
    }
}

/// `t -> prod_k (a_k t)_inf / (b_k t)_inf`.
#[derive(Debug, Clone)]
pub struct RpIntegrand {
    a: Vec<Scalar>,
    b: Vec<Scalar>,
    q: Nome,
    pol: TruncationPolicy,
}

impl RpIntegrand {
    pub fn new(a: Vec<Scalar>, b: Vec<Scalar>, q: Nome, pol: &TruncationPolicy) -> Self {
        RpIntegrand { a, b, q, pol: *pol }
    }

    /// The integrand in double-double arithmetic.
    fn eval_dd(&self, t: Cdd) -> Result<Cdd> {
        let q = dd(self.q.value());
        let mut v = dd(re(1.0));
        for (&a, &b) in self.a.iter().zip(&self.b) {
            let den = qpoch_inf_dd(dd(b) * t, q, self.q.abs(), self.pol.max_terms)?;
            if dd_norm(den) < POLE_EPS {
                return Err(QError::PoleHit(format!("(b t)_inf vanishes at t = {}, b = {b}", undd(t))));
            }
            v = v * qpoch_inf_dd(dd(a) * t, q, self.q.abs(), self.pol.max_terms)? / den;
        }
        Ok(v)
    }

    /// `int_0^{q/a}` with the endpoint formed exactly from `a`. Sums that
    /// cancel by more than [`CANCELLATION_RATIO`] are recomputed in
    /// double-double arithmetic.
    pub fn integral_to_q_over(&self, a: Scalar) -> Result<Scalar> {
        let qv = self.q.value();
        let (s, scale) = lattice_tail(qv / a, qv, self, 0.0, &self.pol, "rp_integral")?;
        if scale <= CANCELLATION_RATIO * s.norm() {
            return ensure_finite((re(1.0) - qv) * s, "rp_integral");
        }
        let qd = dd(qv);
        let mut t = qd / dd(a);
        let mut sum = dd(re(0.0));
        let mut small = 0;
        for _ in 0..self.pol.max_terms {
            let term = self.eval_dd(t)? * t;
            sum = sum + term;
            if dd_norm(term) <= DD_TOL * scale {
                small += 1;
                if small >= STOP_WINDOW {
                    return ensure_finite(undd((dd(re(1.0)) - qd) * sum), "rp_integral");
                }
            } else {
                small = 0;
            }
            t = t * qd;
        }
        Err(QError::TruncationExceeded { context: "rp_integral (double-double)", max_terms: self.pol.max_terms })
    }
}

impl Integrand for RpIntegrand {
    fn eval(&self, t: Scalar) -> Result<Scalar> {
        let mut v = re(1.0);
        for (&a, &b) in self.a.iter().zip(&self.b) {
            let den = qpoch_inf(b * t, self.q, &self.pol)?;
            if den.norm() < POLE_EPS {
                return Err(QError::PoleHit(format!("(b t)_inf vanishes at t = {t}, b = {b}")));
            }
            v *= qpoch_inf(a * t, self.q, &self.pol)? / den;
        }
        ensure_finite(v, "rp_integrand")
    }
}

pub fn rp_integrand(p: &RPParams, q: Nome, pol: &TruncationPolicy) -> RpIntegrand {
    RpIntegrand::new(p.a.clone(), p.b.clone(), q, pol)
}

fn lattice_guard(z1: Scalar, z2: Scalar, i: usize, j: usize, q: Nome) -> Result<()> {
    if q.lattice_distance(z1 / z2) < LATTICE_EPS {
        Err(QError::LatticeCollision { i, j })
    } else {
        Ok(())
    }
}

/// `phi_{i,j} = int_{q/a_i}^{q/a_j} prod_k (a_k t)_inf / (b_k t)_inf d_qt`
/// with 1-based `i`, `j`.
pub fn phi(p: &RPParams, i: usize, j: usize, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let (ii, jj) = (p.index(i)?, p.index(j)?);
    if ii == jj {
        return Ok(re(0.0));
    }
    lattice_guard(p.a[ii], p.a[jj], i, j, q)?;
    let f = rp_integrand(p, q, pol);
    Ok(f.integral_to_q_over(p.a[jj])? - f.integral_to_q_over(p.a[ii])?)
}

/// `int_0^{q/a_k}` of the Riemann-Papperitz integrand (1-based `k`).
pub fn rp_integral_from_zero(p: &RPParams, k: usize, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let kk = p.index(k)?;
    rp_integrand(p, q, pol).integral_to_q_over(p.a[kk])
}

/// Builds the parameter set with `a_1 = A x`, `b_1 = B x`, requiring
/// `A a_2...a_{M+3} = q^2 B b_2...b_{M+3}`.
#[allow(non_snake_case)]
pub fn rp_from_ABx(
    A: Scalar,
    B: Scalar,
    x: Scalar,
    a_rest: &[Scalar],
    b_rest: &[Scalar],
    q: Nome,
) -> Result<RPParams> {
    let lhs = A * a_rest.iter().product::<Scalar>();
    let rhs = q.value() * q.value() * B * b_rest.iter().product::<Scalar>();
    let residual = (lhs - rhs).norm() / rhs.norm();
    if !(residual <= BALANCE_TOL) {
        return Err(QError::BalanceViolation { residual });
    }
    let mut a = vec![A * x];
    a.extend_from_slice(a_rest);
    let mut b = vec![B * x];
    b.extend_from_slice(b_rest);
    RPParams::unchecked(a, b)
}

/// Jordan-Pochhammer parameters of the Mimachi connection formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JPParams {
    pub m: usize,
    pub a: Vec<Scalar>,
    pub b: Vec<Scalar>,
    pub alpha: Scalar,
    /// `q^rho = a_1...a_{M+3} / (b_1...b_{M+3} q^alpha)`.
    pub rho_value: Scalar,
}

impl JPParams {
    pub fn new(a: Vec<Scalar>, b: Vec<Scalar>, alpha: Scalar, q: Nome) -> Result<Self> {
        let base = RPParams::unchecked(a, b)?;
        let rho_value =
            base.a.iter().product::<Scalar>() / (base.b.iter().product::<Scalar>() * q.powc(alpha));
        let p = JPParams { m: base.m, a: base.a, b: base.b, alpha, rho_value };
        if !(p.rho(q).re > 0.0) {
            return Err(QError::ConvergenceDomain(format!("Re(rho) must be positive, got {}", p.rho(q))));
        }
        Ok(p)
    }

    /// `rho = Log(q^rho) / Log(q)`.
    pub fn rho(&self, q: Nome) -> Scalar {
        q.log_of(self.rho_value)
    }
}

/// `int_0^{q b_1} t^{rho-1} prod_i (t/b_i)_inf / (t/a_i)_inf d_qt`.
pub fn jp_lhs_integral(p: &JPParams, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let rho = p.rho(q);
    let inv_a: Vec<Scalar> = p.a.iter().map(|&a| re(1.0) / a).collect();
    let inv_b: Vec<Scalar> = p.b.iter().map(|&b| re(1.0) / b).collect();
    let body = RpIntegrand::new(inv_b, inv_a, q, pol);
    let f = |t: Scalar| Ok(principal_power(t, rho - re(1.0))? * body.eval(t)?);
    jackson_0_to(q.value() * p.b[0], &f, q, pol)
}

/// `int_0^{q/a_k} t^{alpha-1} prod_i (a_i t)_inf / (b_i t)_inf d_qt` (1-based `k`).
pub fn jp_rhs_integral(p: &JPParams, k: usize, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    if !(1..=p.a.len()).contains(&k) {
        return Err(QError::InvalidParams(format!("index {k} outside 1..={}", p.a.len())));
    }
    let body = RpIntegrand::new(p.a.clone(), p.b.clone(), q, pol);
    let alpha = p.alpha;
    let f = |t: Scalar| Ok(principal_power(t, alpha - re(1.0))? * body.eval(t)?);
    jackson_0_to(q.value() / p.a[k - 1], &f, q, pol)
}

/// Endpoints `tau_1..tau_4` of the degree-three integrals.
pub fn h3_endpoints(hp: &H3Params, q: Nome) -> [Scalar; 4] {
    let mut tau = [re(0.0); 4];
    for i in 0..3 {
        tau[i] = q.powc(-hp.h[i] - re(0.5)) / hp.t[i];
    }
    tau[3] = q.powc(re(1.0) - hp.nu) / hp.x;
    tau
}

/// The integrand `(q^nu x t, q^{h_i+1/2} t_i t)_inf / (x t, q^{nu+l_i-1/2} t_i t)_inf`.
pub fn h3_integrand(hp: &H3Params, q: Nome, pol: &TruncationPolicy) -> RpIntegrand {
    let mut a = vec![q.powc(hp.nu) * hp.x];
    let mut b = vec![hp.x];
    for i in 0..3 {
        a.push(q.powc(hp.h[i] + re(0.5)) * hp.t[i]);
        b.push(q.powc(hp.nu + hp.l[i] - re(0.5)) * hp.t[i]);
    }
    RpIntegrand::new(a, b, q, pol)
}

/// `phi^{H3}_{i,j} = x^{nu-alpha} int_{tau_i}^{tau_j}` of [`h3_integrand`], 1-based indices.
pub fn h3_phi(hp: &H3Params, i: usize, j: usize, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    if !(1..=4).contains(&i) || !(1..=4).contains(&j) {
        return Err(QError::InvalidParams(format!("H3 endpoint indices must lie in 1..=4, got ({i}, {j})")));
    }
    if i == j {
        return Ok(re(0.0));
    }
    let tau = h3_endpoints(hp, q);
    lattice_guard(tau[i - 1], tau[j - 1], i, j, q)?;
    let f = h3_integrand(hp, q, pol);
    let integral = jackson_between(tau[i - 1], tau[j - 1], &f, q, pol)?;
    ensure_finite(principal_power(hp.x, hp.nu - hp.alpha)? * integral, "h3_phi")
}
