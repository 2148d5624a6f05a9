//! q-difference operators (Heine, the degree-three operator H3, E_M), the
//! Gupta-Masson recurrence and the parameter maps between them.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{QError, Result};
use crate::jackson::{jackson_0_to, RPParams, RpIntegrand, BALANCE_TOL};
use crate::qcore::{elem_sym, ensure_finite, principal_power, qpoch_inf_all, re, Nome, Scalar, TruncationPolicy};
use crate::report::IdentityReport;

/// A function of `x` that operators sample at q-shifts of their argument.
pub trait LatticeFn: Sync {
    fn eval(&self, x: Scalar) -> Result<Scalar>;
}

impl<F> LatticeFn for F
where
    F: Fn(Scalar) -> Result<Scalar> + Sync,
{
    fn eval(&self, x: Scalar) -> Result<Scalar> {
        self(x)
    }
}

/// Value of an operator applied to a function, with the sum of magnitudes of
/// its individual shift terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Applied {
    pub value: Scalar,
    pub scale: f64,
}

/// Coefficients `c_s` of `sum_s c_s T_x^s`, stored from shift `offset` upwards.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPoly {
    pub offset: i32,
    pub coeffs: Vec<Scalar>,
}

impl ShiftPoly {
    pub fn constant(c: Scalar) -> Self {
        ShiftPoly { offset: 0, coeffs: vec![c] }
    }

    /// `c0 + c1 T`.
    pub fn linear(c0: Scalar, c1: Scalar) -> Self {
        ShiftPoly { offset: 0, coeffs: vec![c0, c1] }
    }

    pub fn mul(&self, other: &ShiftPoly) -> ShiftPoly {
        let mut coeffs = vec![re(0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &x) in self.coeffs.iter().enumerate() {
            for (j, &y) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += x * y;
            }
        }
        ShiftPoly { offset: self.offset + other.offset, coeffs }
    }

    pub fn scale(&self, c: Scalar) -> ShiftPoly {
        ShiftPoly { offset: self.offset, coeffs: self.coeffs.iter().map(|&x| x * c).collect() }
    }

    /// Composition with `T_x^k` on the left.
    pub fn shift(&self, k: i32) -> ShiftPoly {
        ShiftPoly { offset: self.offset + k, coeffs: self.coeffs.clone() }
    }

    pub fn add(&self, other: &ShiftPoly) -> ShiftPoly {
        let lo = self.offset.min(other.offset);
        let hi = (self.offset + self.coeffs.len() as i32).max(other.offset + other.coeffs.len() as i32);
        let mut coeffs = vec![re(0.0); (hi - lo) as usize];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[(self.offset - lo) as usize + i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            coeffs[(other.offset - lo) as usize + i] += c;
        }
        ShiftPoly { offset: lo, coeffs }
    }

    pub fn shifts(&self) -> RangeInclusive<i32> {
        self.offset..=self.offset + self.coeffs.len() as i32 - 1
    }

    /// `sum_s c_s y(q^s x)`.
    pub fn apply(&self, x: Scalar, y: &dyn LatticeFn, q: Nome) -> Result<Applied> {
        let mut value = re(0.0);
        let mut scale = 0.0;
        for (s, &c) in self.shifts().zip(&self.coeffs) {
            if c == re(0.0) {
                continue;
            }
            let term = c * y.eval(x * q.powi(s))?;
            value += term;
            scale += term.norm();
        }
        Ok(Applied { value: ensure_finite(value, "operator application")?, scale })
    }
}

/// Parameters of Heine's equation; `a = q^alpha`, `b = q^beta`, `c = q^gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeineParams {
    pub alpha: Scalar,
    pub beta: Scalar,
    pub gamma: Scalar,
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
    pub x: Scalar,
}

impl HeineParams {
    pub fn from_exponents(alpha: Scalar, beta: Scalar, gamma: Scalar, x: Scalar, q: Nome) -> Result<Self> {
        if x.norm() == 0.0 {
            return Err(QError::InvalidParams("Heine x must be nonzero".into()));
        }
        Ok(HeineParams { alpha, beta, gamma, a: q.powc(alpha), b: q.powc(beta), c: q.powc(gamma), x })
    }

    pub fn at_x(&self, x: Scalar) -> Self {
        HeineParams { x, ..self.clone() }
    }
}

/// `[x(1 - a T)(1 - b T) - (1 - T)(1 - c q^{-1} T)] y` at `x = hp.x`.
pub fn heine_apply(hp: &HeineParams, y: &dyn LatticeFn, q: Nome) -> Result<Scalar> {
    Ok(heine_operator(hp, q).apply(hp.x, y, q)?.value)
}

pub fn heine_operator(hp: &HeineParams, q: Nome) -> ShiftPoly {
    let one = re(1.0);
    let left = ShiftPoly::linear(one, -hp.a).mul(&ShiftPoly::linear(one, -hp.b)).scale(hp.x);
    let right = ShiftPoly::linear(one, -one).mul(&ShiftPoly::linear(one, -hp.c / q.value()));
    left.add(&right.scale(-one))
}

/// `int_0^upper t^{alpha-1} (q t, b x t)_inf / (c t / a, x t)_inf d_qt`.
pub fn heine_t_integral(
    hp: &HeineParams,
    x: Scalar,
    upper: Scalar,
    q: Nome,
    pol: &TruncationPolicy,
) -> Result<Scalar> {
    let qv = q.value();
    let body = RpIntegrand::new(vec![qv, hp.b * x], vec![hp.c / hp.a, x], q, pol);
    let e = hp.alpha - re(1.0);
    let f = |t: Scalar| Ok(principal_power(t, e)? * crate::jackson::Integrand::eval(&body, t)?);
    jackson_0_to(upper, &f, q, pol)
}

/// `int_0^upper s^{beta-gamma} (q a s / c, q s / x)_inf / (s, q s / (b x))_inf d_qs`.
pub fn heine_s_integral(
    hp: &HeineParams,
    x: Scalar,
    upper: Scalar,
    q: Nome,
    pol: &TruncationPolicy,
) -> Result<Scalar> {
    let qv = q.value();
    let body = RpIntegrand::new(vec![qv * hp.a / hp.c, qv / x], vec![re(1.0), qv / (hp.b * x)], q, pol);
    let e = hp.beta - hp.gamma;
    let f = |s: Scalar| Ok(principal_power(s, e)? * crate::jackson::Integrand::eval(&body, s)?);
    jackson_0_to(upper, &f, q, pol)
}

/// The three integral solutions of Heine's equation used by its connection formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeineSolution {
    /// `int_0^1` of the `t`-integrand.
    TToOne,
    /// `int_0^{q/(b x)}` of the `t`-integrand.
    TToQOverBx,
    /// `x^{-beta} int_0^{c/a}` of the `s`-integrand.
    SToCOverA,
}

pub fn heine_solution(
    hp: &HeineParams,
    which: HeineSolution,
    x: Scalar,
    q: Nome,
    pol: &TruncationPolicy,
) -> Result<Scalar> {
    match which {
        HeineSolution::TToOne => heine_t_integral(hp, x, re(1.0), q, pol),
        HeineSolution::TToQOverBx => heine_t_integral(hp, x, q.value() / (hp.b * x), q, pol),
        HeineSolution::SToCOverA => {
            Ok(principal_power(x, -hp.beta)? * heine_s_integral(hp, x, hp.c / hp.a, q, pol)?)
        }
    }
}

/// Parameters of the degree-three operator H3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H3Params {
    pub alpha: Scalar,
    pub nu: Scalar,
    pub h: [Scalar; 3],
    pub l: [Scalar; 3],
    pub t: [Scalar; 3],
    pub x: Scalar,
}

impl H3Params {
    /// Validates nonzero `t_i`, `x` and the balance `2 nu = h1+h2+h3 - l1-l2-l3 + 1`.
    pub fn new(alpha: Scalar, nu: Scalar, h: [Scalar; 3], l: [Scalar; 3], t: [Scalar; 3], x: Scalar) -> Result<Self> {
        let hp = H3Params { alpha, nu, h, l, t, x };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t.iter().any(|t| t.norm() == 0.0) || self.x.norm() == 0.0 {
            return Err(QError::InvalidParams("t_i and x must be nonzero".into()));
        }
        let gap = re(2.0) * self.nu - (self.h.iter().sum::<Scalar>() - self.l.iter().sum::<Scalar>() + re(1.0));
        let residual = gap.norm() / (1.0 + self.nu.norm());
        if residual > BALANCE_TOL {
            return Err(QError::BalanceViolation { residual });
        }
        Ok(())
    }

    pub fn at_x(&self, x: Scalar) -> Self {
        H3Params { x, ..self.clone() }
    }

    /// The same parameters with the labels `i` and `j` (1-based) exchanged.
    pub fn swap(&self, i: usize, j: usize) -> Self {
        let mut s = self.clone();
        s.h.swap(i - 1, j - 1);
        s.l.swap(i - 1, j - 1);
        s.t.swap(i - 1, j - 1);
        s
    }
}

/// `H3 y` at `x = hp.x`.
pub fn h3_apply(hp: &H3Params, y: &dyn LatticeFn, q: Nome) -> Result<Scalar> {
    Ok(h3_operator(hp, q).apply(hp.x, y, q)?.value)
}

/// The operator H3 at `x = hp.x` as a shift polynomial over `{-1, 0, 1}`.
pub fn h3_operator(hp: &H3Params, q: Nome) -> ShiftPoly {
    let x = hp.x;
    let half = re(0.5);
    let qv = q.value();
    let sh: Scalar = hp.h.iter().sum();
    let sl: Scalar = hp.l.iter().sum();
    let tt: Scalar = hp.t.iter().product();
    let mut cm = re(1.0);
    let mut cp = q.powc(re(2.0) * hp.alpha + re(1.0));
    let mut quad = re(0.0);
    let mut lin = re(0.0);
    for i in 0..3 {
        cm *= x - q.powc(hp.h[i] + half) * hp.t[i];
        cp *= x - q.powc(hp.l[i] - half) * hp.t[i];
        quad += (q.powc(hp.h[i]) + q.powc(hp.l[i])) * hp.t[i];
        lin += (q.powc(-hp.h[i]) + q.powc(-hp.l[i])) / hp.t[i];
    }
    let c0 = q.powc(hp.alpha)
        * (-(qv + 1.0) * x * x * x + q.powc(half) * quad * x * x - q.powc((sh + sl + 1.0) / 2.0) * tt * lin * x
            + q.powc((sh + sl) / 2.0) * (qv + 1.0) * tt);
    ShiftPoly { offset: -1, coeffs: vec![cm, c0, cp] }
}

/// The operator `E_M` for parameters `A, B, a_2..a_{M+3}, b_2..b_{M+3}`.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmOperator {
    pub m: usize,
    pub A: Scalar,
    pub B: Scalar,
    pub a: Vec<Scalar>,
    pub b: Vec<Scalar>,
}

impl EmOperator {
    /// Validates shapes and `A a_2...a_{M+3} = q^2 B b_2...b_{M+3}`.
    #[allow(non_snake_case)]
    pub fn new(A: Scalar, B: Scalar, a: Vec<Scalar>, b: Vec<Scalar>, q: Nome) -> Result<Self> {
        if a.len() != b.len() || a.len() < 3 {
            return Err(QError::InvalidParams("E_M needs M+2 >= 3 entries in both a and b".into()));
        }
        let op = EmOperator { m: a.len() - 2, A, B, a, b };
        let residual = op.balance_residual(q);
        if !(residual <= BALANCE_TOL) {
            return Err(QError::BalanceViolation { residual });
        }
        Ok(op)
    }

    pub fn balance_residual(&self, q: Nome) -> f64 {
        let lhs = self.A * self.a.iter().product::<Scalar>();
        let rhs = q.value() * q.value() * self.B * self.b.iter().product::<Scalar>();
        (lhs - rhs).norm() / rhs.norm()
    }

    /// The Riemann-Papperitz parameters at `x`: `a_1 = A x`, `b_1 = B x`.
    pub fn rp_at(&self, x: Scalar) -> RPParams {
        let mut a = vec![self.A * x];
        a.extend_from_slice(&self.a);
        let mut b = vec![self.B * x];
        b.extend_from_slice(&self.b);
        RPParams { m: self.m, a, b }
    }

    /// Splits balanced parameters as `a_1 = A x`, `b_1 = B x`.
    pub fn from_rp(p: &RPParams, x: Scalar, q: Nome) -> Result<Self> {
        EmOperator::new(p.a[0] / x, p.b[0] / x, p.a[1..].to_vec(), p.b[1..].to_vec(), q)
    }

    /// `E_M` at `x` as a shift polynomial; its shift range is `{-1, ..., M}`.
    pub fn operator(&self, x: Scalar, q: Nome) -> ShiftPoly {
        let m = self.m as i32;
        let one = re(1.0);
        let qv = q.value();
        let prod_ba = |n: i32| {
            (0..n).fold(ShiftPoly::constant(one), |p, i| p.mul(&ShiftPoly::linear(self.B, -self.A * qv.powi(i))))
        };
        let prod_one = |n: i32| (0..n).fold(ShiftPoly::constant(one), |p, i| p.mul(&ShiftPoly::linear(one, -qv.powi(-i))));

        let mut op = prod_ba(m + 1).scale(x.powi(m + 2)).shift(-1);
        for k in 1..=m + 1 {
            let body = prod_ba(m - k + 1).mul(&prod_one(k - 1));
            let pre = x.powi(m + 2 - k) * if k % 2 == 0 { 1.0 } else { -1.0 };
            let ea = elem_sym(k as usize, &self.a);
            let eb = elem_sym(k as usize, &self.b);
            op = op.add(&body.scale(pre * ea).shift(-1));
            op = op.add(&body.scale(-pre * qv * eb));
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let last = self.a.iter().product::<Scalar>() / self.B * sign;
        op.add(&prod_one(m + 1).scale(last).shift(-1))
    }

    pub fn apply(&self, x: Scalar, y: &dyn LatticeFn, q: Nome) -> Result<Applied> {
        self.operator(x, q).apply(x, y, q)
    }
}

/// `E_M y` at `x`.
pub fn em_apply(op: &EmOperator, x: Scalar, y: &dyn LatticeFn, q: Nome) -> Result<Scalar> {
    Ok(op.apply(x, y, q)?.value)
}

/// `-prod_{i=0}^{M-1} (B - A q^i) q (1 - q) x^{M+1}`.
#[allow(non_snake_case)]
pub fn em_nonhomog_rhs(m: usize, A: Scalar, B: Scalar, x: Scalar, q: Nome) -> Scalar {
    let qv = q.value();
    let prod: Scalar = (0..m as i32).map(|i| B - A * qv.powi(i)).product();
    -prod * qv * (re(1.0) - qv) * x.powi(m as i32 + 1)
}

/// `y_tau(x) = int_0^{q/a_k}` of the integrand with `a_1 = A x`, `b_1 = B x`;
/// for `k = 1` the endpoint `q/(A x)` moves with `x`.
pub fn em_integral_solution(op: &EmOperator, k: usize, x: Scalar, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let p = op.rp_at(x);
    crate::jackson::rp_integral_from_zero(&p, k, q, pol)
}

/// Residual of `E_M y_tau = rhs` at `x` for the endpoint `q/a_k`.
pub fn em_nonhomog_residual(
    op: &EmOperator,
    x: Scalar,
    k: usize,
    q: Nome,
    pol: &TruncationPolicy,
    tol: f64,
) -> Result<IdentityReport> {
    if !(1..=op.m + 3).contains(&k) {
        return Err(QError::InvalidParams(format!("endpoint index {k} outside 1..={}", op.m + 3)));
    }
    let y = |xx: Scalar| em_integral_solution(op, k, xx, q, pol);
    let applied = op.apply(x, &y, q)?;
    let rhs = em_nonhomog_rhs(op.m, op.A, op.B, x, q);
    Ok(IdentityReport::compare(applied.value, rhs, applied.scale + rhs.norm(), op.m + 3, tol))
}

/// Output of [`h3_to_rp`]: the `M = 1` operator data and the point `x`.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq)]
pub struct H3Map {
    pub op: EmOperator,
    pub x: Scalar,
}

impl H3Map {
    pub fn rp(&self) -> RPParams {
        self.op.rp_at(self.x)
    }
}

/// Maps H3 parameters to `E_1` data with the normalisation `B = 1`, `A = q^nu`:
/// `a_{i+1} = q^{h_i+1/2} t_i`, `b_{i+1} = q^{nu+l_i-1/2} t_i`.
pub fn h3_to_rp(hp: &H3Params, q: Nome) -> Result<H3Map> {
    hp.validate()?;
    let half = re(0.5);
    let a = (0..3).map(|i| q.powc(hp.h[i] + half) * hp.t[i]).collect();
    let b = (0..3).map(|i| q.powc(hp.nu + hp.l[i] - half) * hp.t[i]).collect();
    let op = EmOperator::new(q.powc(hp.nu), re(1.0), a, b, q)?;
    Ok(H3Map { op, x: hp.x })
}

/// Inverse of [`h3_to_rp`] for given `alpha` and `t_i`:
/// `q^{-nu} = B/A`, `q^{h_i+1/2} t_i = a_{i+1}/B`, `q^{l_i-1/2} t_i = b_{i+1}/A`.
pub fn rp_to_h3(map: &H3Map, alpha: Scalar, t: [Scalar; 3], q: Nome) -> Result<H3Params> {
    let op = &map.op;
    if op.m != 1 {
        return Err(QError::InvalidParams("the H3 map needs M = 1".into()));
    }
    let half = re(0.5);
    let nu = -q.log_of(op.B / op.A);
    let h = [0, 1, 2].map(|i| q.log_of(op.a[i] / (op.B * t[i])) - half);
    let l = [0, 1, 2].map(|i| q.log_of(op.b[i] / (op.A * t[i])) + half);
    // Rescale x so that a_1 = A x keeps its value when B is normalised to 1.
    H3Params::new(alpha, nu, h, l, t, map.x * op.B)
}

/// Parameters of the Gupta-Masson three-term recurrence. `f` does not enter
/// `c_n`, `d_n`; it is carried for the associated three-term relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GMParams {
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
    pub d: Scalar,
    pub e: Scalar,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Scalar>,
    pub h: Scalar,
    pub n: i32,
}

impl GMParams {
    /// `C_n = -prod_{p in b,c,d,e} (1 - a q^{n+1}/(p h)) / (1 - a q^{n+1}/h)`.
    pub fn big_c(&self, n: i32, q: Nome) -> Result<Scalar> {
        let w = self.a * q.powi(n + 1) / self.h;
        let den = re(1.0) - w;
        if den.norm() < 1e-14 {
            return Err(QError::Domain(format!("1 - a q^(n+1)/h vanishes at n = {n}")));
        }
        let num: Scalar = [self.b, self.c, self.d, self.e].iter().map(|&p| re(1.0) - w / p).product();
        Ok(-num / den)
    }

    /// `D_n = -q (1 - q^n/h)(1 - a q^n/h)(1 - a^2 q^{n+1}/(b c d e h))`.
    pub fn big_d(&self, n: i32, q: Nome) -> Scalar {
        let qn = q.powi(n);
        let bcde = self.b * self.c * self.d * self.e;
        -q.value()
            * (re(1.0) - qn / self.h)
            * (re(1.0) - self.a * qn / self.h)
            * (re(1.0) - self.a * self.a * qn * q.value() / (bcde * self.h))
    }

    pub fn at_n(&self, n: i32) -> Self {
        GMParams { n, ..self.clone() }
    }
}

/// `(c_n, d_n)` of `Y_{n+1} - c_n Y_n + d_n Y_{n-1} = 0` at `n = g.n`.
pub fn gm_coeffs(g: &GMParams, q: Nome) -> Result<(Scalar, Scalar)> {
    let n = g.n;
    let w = g.a * q.powi(n + 1) / g.h;
    let big_c = g.big_c(n, q)?;
    let big_d = g.big_d(n, q);
    let bcde = g.b * g.c * g.d * g.e;
    let tail = g.a * g.a * q.powi(2 * n + 2) / (bcde * g.h * g.h)
        * (re(1.0) - g.b)
        * (re(1.0) - g.c)
        * (re(1.0) - g.d)
        * (re(1.0) - g.e)
        / (re(1.0) - w);
    let c_n = big_c + big_d + tail;
    let d_n = g.big_c(n - 1, q)? * big_d;
    Ok((ensure_finite(c_n, "gm c_n")?, ensure_finite(d_n, "gm d_n")?))
}

/// Recurrence parameters attached to `E_1` data at base point `x0` (`n = 0`).
///
/// The labels are those of `a_2, a_3, b_2, b_3, b_4`, and the correspondence
/// holds after rescaling `(A, B, x)` to `(a_3, B a_3/A, x A/a_3)`, which leaves
/// `a_1 = A x` and `b_1 = B x` unchanged:
/// `a = a_2/B'`, `b = q b_2/A'`, `c = q b_3/A'`, `d = q b_4/A'`, `e = A'/B'`,
/// `h = a/x0'`.
pub fn gm_from_e1(op: &EmOperator, x0: Scalar, q: Nome) -> Result<GMParams> {
    if op.m != 1 {
        return Err(QError::InvalidParams("the recurrence map needs M = 1".into()));
    }
    let qv = q.value();
    let lambda = op.a[1] / op.A;
    let a_n = op.A * lambda;
    let b_n = op.B * lambda;
    let x_n = x0 / lambda;
    let a = op.a[0] / b_n;
    Ok(GMParams {
        a,
        b: qv * op.b[0] / a_n,
        c: qv * op.b[1] / a_n,
        d: qv * op.b[2] / a_n,
        e: a_n / b_n,
        f: None,
        h: a / x_n,
        n: 0,
    })
}

/// Residual of the recurrence over `ns` for `Y_n = (-1)^n y(x_n) / (a_1/b_2, a_1/b_3, a_1/b_4)_inf`
/// where `x_n = x0 q^n` and `a_1 = A x_n`; reports the worst `n`.
pub fn gm_recurrence_residual(
    op: &EmOperator,
    x0: Scalar,
    y: &dyn LatticeFn,
    ns: RangeInclusive<i32>,
    q: Nome,
    pol: &TruncationPolicy,
    tol: f64,
) -> Result<IdentityReport> {
    let g = gm_from_e1(op, x0, q)?;
    let big_y = |n: i32| -> Result<Scalar> {
        let x = x0 * q.powi(n);
        let a1 = op.A * x;
        let gauge = qpoch_inf_all(&[a1 / op.b[0], a1 / op.b[1], a1 / op.b[2]], q, pol)?;
        let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        Ok(y.eval(x)? / gauge * sign)
    };
    let mut reports = Vec::new();
    for n in ns {
        let (c_n, d_n) = gm_coeffs(&g.at_n(n), q)?;
        let (yp, y0, ym) = (big_y(n + 1)?, big_y(n)?, big_y(n - 1)?);
        let terms = [yp, -c_n * y0, d_n * ym];
        reports.push(IdentityReport::vanishing(&terms, tol));
    }
    IdentityReport::combine(reports).ok_or_else(|| QError::InvalidParams("empty n range".into()))
}
