//! Theta-function and Pochhammer coefficients of the connection formulas.

use crate::error::{QError, Result};
use crate::jackson::{JPParams, RPParams};
use crate::qcore::{principal_power, qpoch_inf_all, re, theta, theta_multi, Nome, Scalar, TruncationPolicy};
use crate::qdiff::{H3Params, HeineParams};

/// Thetas in denominators smaller than this are reported as poles.
pub const THETA_FLOOR: f64 = 1e-10;

fn guarded_theta(x: Scalar, q: Nome, pol: &TruncationPolicy, what: &str) -> Result<Scalar> {
    let v = theta(x, q, pol)?;
    if v.norm() < THETA_FLOOR {
        return Err(QError::PoleHit(format!("theta({x}) = {v} in the denominator of {what}")));
    }
    Ok(v)
}

fn guarded_theta_multi(xs: &[Scalar], q: Nome, pol: &TruncationPolicy, what: &str) -> Result<Scalar> {
    xs.iter().try_fold(re(1.0), |acc, &x| Ok(acc * guarded_theta(x, q, pol, what)?))
}

/// `C~_k = (a_k/a_1)^2 prod_i theta(a_k/b_i)/theta(a_1/b_i)
///        prod_{i != 1} theta(a_1/a_i) prod_{i != k} theta(a_k/a_i)^{-1}` (1-based `k`).
pub fn coeff_rp_ctilde(p: &RPParams, k: usize, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let kk = p.index(k)?;
    let (a, b) = (&p.a, &p.b);
    let ak = a[kk];
    let a1 = a[0];
    let mut c = (ak / a1) * (ak / a1);
    for &bi in b {
        c *= theta(ak / bi, q, pol)? / guarded_theta(a1 / bi, q, pol, "C~_k")?;
    }
    for (i, &ai) in a.iter().enumerate() {
        if i != 0 {
            c *= theta(a1 / ai, q, pol)?;
        }
        if i != kk {
            c /= guarded_theta(ak / ai, q, pol, "C~_k")?;
        }
    }
    Ok(c)
}

/// Weight `D_k` of the linear relation among the permuted `W` functions.
/// Same closed form as [`coeff_rp_ctilde`], assembled from grouped theta
/// lists rather than factor by factor.
pub fn coeff_w_d(p: &RPParams, k: usize, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let kk = p.index(k)?;
    let (a, b) = (&p.a, &p.b);
    let (ak, a1) = (a[kk], a[0]);
    let num: Vec<Scalar> = b
        .iter()
        .map(|&bi| ak / bi)
        .chain(a.iter().skip(1).map(|&ai| a1 / ai))
        .collect();
    let den: Vec<Scalar> = b
        .iter()
        .map(|&bi| a1 / bi)
        .chain(a.iter().enumerate().filter(|&(i, _)| i != kk).map(|(_, &ai)| ak / ai))
        .collect();
    let n = theta_multi(&num, q, pol)?;
    let d = guarded_theta_multi(&den, q, pol, "D_k")?;
    Ok((ak * ak) / (a1 * a1) * n / d)
}

/// `C_k = (q b_1)^rho (a_k/q)^alpha theta(q^{rho+1} b_1/a_k)
///        prod_{j>=2} theta(a_k/b_j) prod_{j != k} theta(a_k/a_j)^{-1}` (1-based `k`).
pub fn coeff_mimachi_c(p: &JPParams, k: usize, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    if !(1..=p.a.len()).contains(&k) {
        return Err(QError::InvalidParams(format!("index {k} outside 1..={}", p.a.len())));
    }
    let kk = k - 1;
    let qv = q.value();
    let ak = p.a[kk];
    let rho = p.rho(q);
    let mut c = principal_power(qv * p.b[0], rho)? * principal_power(ak / qv, p.alpha)?;
    c *= theta(p.rho_value * qv * p.b[0] / ak, q, pol)?;
    for &bj in &p.b[1..] {
        c *= theta(ak / bj, q, pol)?;
    }
    for (j, &aj) in p.a.iter().enumerate() {
        if j != kk {
            c /= guarded_theta(ak / aj, q, pol, "C_k")?;
        }
    }
    Ok(c)
}

/// The combination `1 + C_2/C_1 + ... + C_{M+3}/C_1` of the Mimachi
/// coefficients; it vanishes at `alpha = 1` under the balance condition.
pub fn mimachi_coefficient_sum(p: &JPParams, q: Nome, pol: &TruncationPolicy) -> Result<(Scalar, f64)> {
    let c1 = coeff_mimachi_c(p, 1, q, pol)?;
    if c1.norm() < THETA_FLOOR {
        return Err(QError::DegenerateCoefficient("C_1 vanishes".into()));
    }
    let mut sum = re(1.0);
    let mut scale = 1.0;
    for k in 2..=p.a.len() {
        let r = coeff_mimachi_c(p, k, q, pol)? / c1;
        sum += r;
        scale += r.norm();
    }
    Ok((sum, scale))
}

/// `C_1` of the H3 three-term relation, a ratio of six thetas over six thetas.
pub fn coeff_h3_c1(hp: &H3Params, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let (h, l, t, nu, x) = (&hp.h, &hp.l, &hp.t, hp.nu, hp.x);
    let one = re(1.0);
    let half = re(0.5);
    let num = [
        q.powc(h[0] - l[0] - nu + one),
        t[0] * q.powc(h[0] - l[1] - nu + one) / t[1],
        t[0] * q.powc(h[0] - l[2] - nu + one) / t[2],
        x * q.powc(re(1.5) - h[0]) / t[0],
        x * q.powc(-h[1] + nu - half) / t[1],
        x * q.powc(-h[2] + nu - half) / t[2],
    ];
    let den = [
        q.powc(nu - one),
        t[0] * q.powc(h[0] - h[1]) / t[1],
        t[0] * q.powc(h[0] - h[2]) / t[2],
        x * q.powc(half - l[0]) / t[0],
        x * q.powc(half - l[1]) / t[1],
        x * q.powc(half - l[2]) / t[2],
    ];
    Ok(theta_multi(&num, q, pol)? / guarded_theta_multi(&den, q, pol, "H3 C_1")?)
}

/// `(C_1, C_2, C_3)`; `C_2`, `C_3` are `C_1` with labels 1 and 2 (resp. 3) exchanged.
pub fn coeff_h3(hp: &H3Params, q: Nome, pol: &TruncationPolicy) -> Result<[Scalar; 3]> {
    Ok([coeff_h3_c1(hp, q, pol)?, coeff_h3_c1(&hp.swap(1, 2), q, pol)?, coeff_h3_c1(&hp.swap(1, 3), q, pol)?])
}

/// Coefficients `(r_1, r_2)` of Heine's connection formula:
/// `r_1 = (b/q)^alpha theta(b)/theta(b/a) x^alpha theta(a x)/theta(x)` and
/// `r_2 = (a/c)^{beta-gamma+1} theta(c/b)/theta(a/b) x^beta theta(b x)/theta(x)`.
pub fn coeff_heine(hp: &HeineParams, q: Nome, pol: &TruncationPolicy) -> Result<(Scalar, Scalar)> {
    let qv = q.value();
    let (a, b, c, x) = (hp.a, hp.b, hp.c, hp.x);
    let tx = guarded_theta(x, q, pol, "Heine coefficients")?;
    let r1 = principal_power(b / qv, hp.alpha)? * theta(b, q, pol)? / guarded_theta(b / a, q, pol, "Heine r_1")?
        * principal_power(x, hp.alpha)?
        * theta(a * x, q, pol)?
        / tx;
    let r2 = principal_power(a / c, hp.beta - hp.gamma + re(1.0))? * theta(c / b, q, pol)?
        / guarded_theta(a / b, q, pol, "Heine r_2")?
        * principal_power(x, hp.beta)?
        * theta(b * x, q, pol)?
        / tx;
    Ok((r1, r2))
}

/// Six parameters `a; b, c, d, e, f` of the `_8W_7` three-term relations.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct W87Params {
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
    pub d: Scalar,
    pub e: Scalar,
    pub f: Scalar,
}

impl W87Params {
    /// `q^2 a^2 / (b c d e f)`.
    pub fn z(&self, q: Nome) -> Scalar {
        let qv = q.value();
        qv * qv * self.a * self.a / (self.b * self.c * self.d * self.e * self.f)
    }

    pub fn swap_bc(&self) -> Self {
        W87Params { b: self.c, c: self.b, ..*self }
    }
}

fn nonzero(v: Scalar, what: &str) -> Result<Scalar> {
    if v.norm() < 1e-300 {
        Err(QError::PoleHit(format!("{what} vanishes")))
    } else {
        Ok(v)
    }
}

/// Coefficient of `_8W_7(b^2/a; b, be/a, bc/a, bd/a, bf/a; z)` in the
/// three-term relation:
/// `(qa, c, c/a, qb/a)_inf / (qa/b, c/b, bc/a, qb^2/a)_inf
///  * prod_{eta in d,e,f} (qa/(b eta), qb/eta)_inf / (q/eta, qa/eta)_inf`.
pub fn coeff_w87(p: &W87Params, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let qv = q.value();
    let W87Params { a, b, c, d, e, f } = *p;
    let mut num = vec![qv * a, c, c / a, qv * b / a];
    let mut den = vec![qv * a / b, c / b, b * c / a, qv * b * b / a];
    for eta in [d, e, f] {
        num.extend([qv * a / (b * eta), qv * b / eta]);
        den.extend([qv / eta, qv * a / eta]);
    }
    Ok(qpoch_inf_all(&num, q, pol)? / nonzero(qpoch_inf_all(&den, q, pol)?, "w87 coefficient denominator")?)
}

/// The coefficient exactly as typeset, with the duplicated `(bc/a)_inf` and
/// the factor `(a/b) (b/a)_inf / (a/b)_inf`:
/// `(a/b) (qa, c, b/a, c/a)_inf / (a/b, c/b, bc/a, bc/a, qb^2/a)_inf * prod_eta(...)`.
/// It differs from [`coeff_w87`] by `-1/(bc/a)_inf`; kept for reporting.
pub fn coeff_w87_as_typeset(p: &W87Params, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let qv = q.value();
    let W87Params { a, b, c, d, e, f } = *p;
    let mut num = vec![qv * a, c, b / a, c / a];
    let mut den = vec![a / b, c / b, b * c / a, b * c / a, qv * b * b / a];
    for eta in [d, e, f] {
        num.extend([qv * a / (b * eta), qv * b / eta]);
        den.extend([qv / eta, qv * a / eta]);
    }
    Ok(a / b * qpoch_inf_all(&num, q, pol)? / nonzero(qpoch_inf_all(&den, q, pol)?, "typeset coefficient")?)
}

/// Pieces of the Gupta-Masson form of the coefficient:
/// `C(b, c) = D(b, c)/E(b, c) * (A(b, c) - A(c, b)) / (B(b, c) - B(c, b))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmCoefficient {
    /// `A(b, c) - A(c, b)`.
    pub a_diff: Scalar,
    /// `B(b, c) - B(c, b)`.
    pub b_diff: Scalar,
    /// `|B(b, c)| + |B(c, b)|`, the scale for the degeneracy test.
    pub b_scale: f64,
    /// `D(b, c)/E(b, c)` as typeset.
    pub de_typeset: Scalar,
    /// `D(b, c)/E(b, c)` consistent with the three-term relation.
    pub de: Scalar,
}

impl GmCoefficient {
    pub fn value(&self) -> Scalar {
        self.de * self.a_diff / self.b_diff
    }

    pub fn value_typeset(&self) -> Scalar {
        self.de_typeset * self.a_diff / self.b_diff
    }
}

/// `A(x, y) = theta(x, a/x, a/(y f), y d/a, y e/a, x d e f/a^2)`.
pub fn gm_big_a(p: &W87Params, x: Scalar, y: Scalar, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let W87Params { a, d, e, f, .. } = *p;
    theta_multi(&[x, a / x, a / (y * f), y * d / a, y * e / a, x * d * e * f / (a * a)], q, pol)
}

/// `B(x, y) = theta(x, x/a, x d e f/a^2) prod_{eta in d,e,f} theta(y eta/a)`.
pub fn gm_big_b(p: &W87Params, x: Scalar, y: Scalar, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let W87Params { a, d, e, f, .. } = *p;
    theta_multi(&[x, x / a, x * d * e * f / (a * a), y * d / a, y * e / a, y * f / a], q, pol)
}

/// Builds the Gupta-Masson coefficient for `(b, c)`. `A(x, y)/B(x, y)` equals
/// `a^2/(x y f)`, so the theta quotient reduces to `a^2/(b c f)`; the
/// `D/E` factor consistent with the relation is therefore
/// `b c f/a^2` times [`coeff_w87`], i.e.
/// `D = (bcf/a^2) (qa, c, c/a, qb/a)_inf prod_eta (qa/(b eta), qb/eta)_inf`,
/// `E = (qa/b, c/b, bc/a, qb^2/a)_inf prod_eta (q/eta, qa/eta)_inf`.
pub fn coeff_gm(p: &W87Params, q: Nome, pol: &TruncationPolicy) -> Result<GmCoefficient> {
    let qv = q.value();
    let W87Params { a, b, c, d, e, f } = *p;
    let a_diff = gm_big_a(p, b, c, q, pol)? - gm_big_a(p, c, b, q, pol)?;
    let (bbc, bcb) = (gm_big_b(p, b, c, q, pol)?, gm_big_b(p, c, b, q, pol)?);
    let b_diff = bbc - bcb;
    let b_scale = bbc.norm() + bcb.norm();

    // Typeset D(b, c) and E(b, c).
    let sq = qpoch_inf_all(&[c / a, qv * b / a, qv * a / c, qv * a / (b * f)], q, pol)?;
    let d_ts = theta(a / (c * f), q, pol)?
        * sq
        * sq
        * qpoch_inf_all(
            &[c, a / qv, a / b, b / c, b * f / a, qv * a / (b * d), qv * a / (b * e), qv * c * c / a],
            q,
            pol,
        )?
        * qpoch_inf_all(&[qv * c / d, qv * c / e, qv * c / f], q, pol)?;
    let e_ts = qpoch_inf_all(&[b / c, c / b, qv * b * b / a, qv * c * c / a], q, pol)?
        * theta_multi(&[a / b, a / c], q, pol)?
        * qpoch_inf_all(&[qv / d, qv / e, qv / f], q, pol)?
        * qpoch_inf_all(&[qv * a / b, qv * a / c, qv * a / d, qv * a / e, qv * a / f], q, pol)?;
    let de_typeset = d_ts / nonzero(e_ts, "typeset E(b, c)")?;

    let de = b * c * f / (a * a) * coeff_w87(p, q, pol)?;
    Ok(GmCoefficient { a_diff, b_diff, b_scale, de_typeset, de })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> Nome {
        Nome::real(v).unwrap()
    }

    fn pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    fn balanced(nq: Nome) -> RPParams {
        let a = vec![re(0.83), re(1.9), re(0.61), re(1.37), re(2.4)];
        let mut b = vec![re(1.13), re(0.71), re(2.3), re(0.47)];
        let last = a.iter().product::<Scalar>() / (nq.value() * nq.value() * b.iter().product::<Scalar>());
        b.push(last);
        RPParams::new(a, b, nq).unwrap()
    }

    #[test]
    fn ctilde_and_d_agree() {
        let nq = q(0.5);
        let p = balanced(nq);
        for k in 2..=5 {
            let c = coeff_rp_ctilde(&p, k, nq, &pol()).unwrap();
            let d = coeff_w_d(&p, k, nq, &pol()).unwrap();
            assert!((c - d).norm() <= 1e-12 * c.norm());
        }
        assert!((coeff_rp_ctilde(&p, 1, nq, &pol()).unwrap() - re(1.0)).norm() < 1e-13);
    }

    #[test]
    fn ctilde_key_lemma() {
        let nq = q(0.5);
        let p = balanced(nq);
        let mut s = re(1.0);
        for k in 2..=5 {
            s += coeff_rp_ctilde(&p, k, nq, &pol()).unwrap();
        }
        assert!(s.norm() < 1e-10);
    }

    #[test]
    fn ctilde_swaps_with_relabeling() {
        let nq = q(0.5);
        let p = balanced(nq);
        let swapped = RPParams::unchecked(vec![p.a[0], p.a[2], p.a[1], p.a[3], p.a[4]], p.b.clone()).unwrap();
        let c2 = coeff_rp_ctilde(&p, 2, nq, &pol()).unwrap();
        let c3s = coeff_rp_ctilde(&swapped, 3, nq, &pol()).unwrap();
        assert!((c2 - c3s).norm() <= 1e-13 * c2.norm());
    }

    #[test]
    fn gm_theta_quotient_identity() {
        let nq = q(0.5);
        let p = W87Params { a: re(1.3), b: re(0.7), c: re(1.9), d: re(0.55), e: re(1.4), f: re(0.9) };
        let ratio = gm_big_a(&p, p.b, p.c, nq, &pol()).unwrap() / gm_big_b(&p, p.b, p.c, nq, &pol()).unwrap();
        let expect = p.a * p.a / (p.b * p.c * p.f);
        assert!((ratio - expect).norm() <= 1e-12 * expect.norm());
        let g = coeff_gm(&p, nq, &pol()).unwrap();
        let k = coeff_w87(&p, nq, &pol()).unwrap();
        assert!((g.value() - k).norm() <= 1e-10 * k.norm());
    }

    #[test]
    fn typeset_w87_coefficient_differs_by_known_factor() {
        let nq = q(0.5);
        let p = W87Params { a: re(1.3), b: re(0.7), c: re(1.9), d: re(0.55), e: re(1.4), f: re(0.9) };
        let k = coeff_w87(&p, nq, &pol()).unwrap();
        let t = coeff_w87_as_typeset(&p, nq, &pol()).unwrap();
        let bca = qpoch_inf_all(&[p.b * p.c / p.a], nq, &pol()).unwrap();
        assert!((t * bca + k).norm() <= 1e-12 * k.norm());
    }
}
