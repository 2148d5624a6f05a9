//! Explicit q-hypergeometric series: Kajihara's multiple series `W^{M,N}`,
//! the wrapper `W` attached to the Riemann-Papperitz integral,
//! very-well-poised series and Bailey's closed form.

use serde::{Deserialize, Serialize};

use crate::dd::{dd, Cdd, Field, CANCELLATION_RATIO, DD_TOL};
use crate::error::{QError, Result};
use crate::jackson::{jackson_between, Integrand, RPParams, RpIntegrand};
use crate::qcore::{ensure_finite, qpoch_inf_all, re, Nome, Scalar, TruncationPolicy};

/// Consecutive small layers / terms required before a series stops.
const SERIES_WINDOW: usize = 3;
/// Denominator factors below this magnitude count as poles.
const DENOM_EPS: f64 = 1e-14;
/// Double-double resummation stops once layers fall below this fraction of the value.
const DD_REL_STOP: f64 = 1e-18;

/// Arguments of `W^{M,N}( {a_i} ; {x_i} | s ; {u_k} ; {v_k} ; z )`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KajiharaParams {
    pub a: Vec<Scalar>,
    pub x: Vec<Scalar>,
    pub s: Scalar,
    pub u: Vec<Scalar>,
    pub v: Vec<Scalar>,
    pub z: Scalar,
}

impl KajiharaParams {
    pub fn new(a: Vec<Scalar>, x: Vec<Scalar>, s: Scalar, u: Vec<Scalar>, v: Vec<Scalar>, z: Scalar) -> Result<Self> {
        if a.is_empty() || a.len() != x.len() || u.len() != v.len() {
            return Err(QError::InvalidParams("W^{M,N} needs |a| = |x| >= 1 and |u| = |v|".into()));
        }
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                if (x[i] - x[j]).norm() <= 1e-14 * x[i].norm().max(x[j].norm()) {
                    return Err(QError::InvalidParams("the x_i must be pairwise distinct".into()));
                }
            }
        }
        if x.iter().any(|v| v.norm() == 0.0) {
            return Err(QError::InvalidParams("the x_i must be nonzero".into()));
        }
        Ok(KajiharaParams { a, x, s, u, v, z })
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }
}

/// Value of a truncated series with bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Scalar,
    /// Sum of magnitudes of all terms.
    pub scale: f64,
    /// Number of terms (multi-indices) summed.
    pub terms: usize,
    /// Magnitude of the last layer or term added.
    pub tail: f64,
}

/// Ratios `(num)_l / (den)_l` for `l = 0..=len`.
fn poch_ratio_table<T: Field>(num: T, den: T, q: T, len: usize, what: &str) -> Result<Vec<T>> {
    let one = T::from_scalar(re(1.0));
    let mut out = Vec::with_capacity(len + 1);
    out.push(one);
    let (mut pn, mut pd) = (num, den);
    for l in 0..len {
        let d = one - pd;
        if d.mag() < DENOM_EPS {
            return Err(QError::PoleHit(format!("{what}: denominator vanishes at index {l}")));
        }
        let next = out[l] * (one - pn) / d;
        out.push(next);
        pn = pn * q;
        pd = pd * q;
    }
    Ok(out)
}

/// Calls `f` on every `l` in `Z_{>=0}^m` with `|l| = total`, in lexicographic order.
fn for_each_composition(m: usize, total: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(l: &mut Vec<usize>, pos: usize, left: usize, f: &mut dyn FnMut(&[usize])) {
        if pos + 1 == l.len() {
            l[pos] = left;
            f(l);
            return;
        }
        for v in 0..=left {
            l[pos] = v;
            rec(l, pos + 1, left - v, f);
        }
    }
    let mut l = vec![0; m];
    rec(&mut l, 0, total, f);
}

/// Kajihara's series, summed in layers of constant `|l|`.
pub fn kajihara_w(p: &KajiharaParams, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    Ok(kajihara_w_detailed(p, q, pol)?.value)
}

pub fn kajihara_w_detailed(p: &KajiharaParams, q: Nome, pol: &TruncationPolicy) -> Result<SeriesValue> {
    let args = KajArgs { a: p.a.clone(), x: p.x.clone(), s: p.s, u: p.u.clone(), v: p.v.clone(), z: p.z };
    let tol = pol.tol;
    let out = kajihara_sum(&args, q.value(), pol.max_total_index, &|layer, scale, _| layer <= tol * scale)?;
    out.ok_or(QError::TruncationExceeded { context: "kajihara_w (layer cap)", max_terms: pol.max_total_index })
}

/// [`KajiharaParams`] over either arithmetic.
struct KajArgs<T> {
    a: Vec<T>,
    x: Vec<T>,
    s: T,
    u: Vec<T>,
    v: Vec<T>,
    z: T,
}

/// Layered summation; `done(layer_abs, scale, |total|)` decides when a layer
/// counts as small. `None` means the layer cap was reached first.
fn kajihara_sum<T: Field>(
    p: &KajArgs<T>,
    q: Scalar,
    cap: usize,
    done: &dyn Fn(f64, f64, f64) -> bool,
) -> Result<Option<SeriesValue>> {
    let m = p.a.len();
    let xm = p.x[m - 1];
    let qv = T::from_scalar(q);
    let one = T::from_scalar(re(1.0));

    // Factors depending only on |l|.
    let mut layer_factor = vec![one; cap + 1];
    for j in 0..m {
        let r = poch_ratio_table(p.s * p.x[j] / xm, p.s * qv / p.a[j] * p.x[j] / xm, qv, cap, "W^{M,N} (s x_j/x_M)")?;
        layer_factor.iter_mut().zip(&r).for_each(|(a, &b)| *a = *a * b);
    }
    for k in 0..p.u.len() {
        let r = poch_ratio_table(p.v[k], p.s * qv / p.u[k], qv, cap, "W^{M,N} (v_k)")?;
        layer_factor.iter_mut().zip(&r).for_each(|(a, &b)| *a = *a * b);
    }
    // Factors depending on a single l_i.
    let mut single = vec![vec![one; cap + 1]; m];
    for (i, row) in single.iter_mut().enumerate() {
        for j in 0..m {
            let r = poch_ratio_table(p.a[j] * p.x[i] / p.x[j], qv * p.x[i] / p.x[j], qv, cap, "W^{M,N} (a_j x_i/x_j)")?;
            row.iter_mut().zip(&r).for_each(|(a, &b)| *a = *a * b);
        }
        for k in 0..p.u.len() {
            let r = poch_ratio_table(
                p.u[k] * p.x[i] / xm,
                p.s * qv / p.v[k] * p.x[i] / xm,
                qv,
                cap,
                "W^{M,N} (u_k x_i/x_M)",
            )?;
            row.iter_mut().zip(&r).for_each(|(a, &b)| *a = *a * b);
        }
    }
    let sx: Vec<T> = p.x.iter().map(|&x| p.s * x / xm).collect();
    for &w in &sx {
        if (one - w).mag() < DENOM_EPS {
            return Err(QError::PoleHit("W^{M,N}: 1 - s x_i/x_M vanishes".into()));
        }
    }
    let mut qpow = vec![one; 2 * cap + 1];
    for k in 1..qpow.len() {
        qpow[k] = qpow[k - 1] * qv;
    }

    let mut total = T::from_scalar(re(0.0));
    let mut scale = 0.0;
    let mut terms = 0;
    let mut small = 0;
    let mut zpow = one;
    for n in 0..=cap {
        let mut layer = T::from_scalar(re(0.0));
        let mut layer_abs = 0.0;
        let base = zpow * layer_factor[n];
        for_each_composition(m, n, &mut |l: &[usize]| {
            let mut t = base;
            for i in 0..m {
                for j in i + 1..m {
                    t = t * (p.x[i] * qpow[l[i]] - p.x[j] * qpow[l[j]]) / (p.x[i] - p.x[j]);
                }
                t = t * (one - qpow[n + l[i]] * sx[i]) / (one - sx[i]);
                t = t * single[i][l[i]];
            }
            layer = layer + t;
            layer_abs += t.mag();
            terms += 1;
        });
        total = total + layer;
        scale += layer_abs;
        let value = total.to_scalar();
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(QError::NonFinite("kajihara_w"));
        }
        if done(layer_abs, scale, value.norm()) {
            small += 1;
            if small >= SERIES_WINDOW {
                return Ok(Some(SeriesValue { value, scale, terms, tail: layer_abs }));
            }
        } else {
            small = 0;
        }
        zpow = zpow * p.z;
    }
    Ok(None)
}

/// The Kajihara specialisation of [`w_wrapper`], without the prefactor.
/// `x_i = a_{M+4-i}` and upper parameters `a_{M+4-i}/b_{M+4-i}` for
/// `i = 1..M`, `s = a_4 b_1 q/(a_2 a_1)`, `u = (a_4/b_3, a_4/b_2)`,
/// `v = (b_1 q/a_2, b_1 q/a_1)`, `z = a_3/b_1`.
pub fn w_wrapper_series_params(p: &RPParams, q: Nome) -> Result<KajiharaParams> {
    let m = p.m;
    let qv = q.value();
    let (a, b) = (&p.a, &p.b);
    let idx = |i: usize| m + 3 - i; // 0-based position of a_{M+4-i}
    let upper = (1..=m).map(|i| a[idx(i)] / b[idx(i)]).collect();
    let xs = (1..=m).map(|i| a[idx(i)]).collect();
    let s = a[3] * b[0] * qv / (a[1] * a[0]);
    KajiharaParams::new(
        upper,
        xs,
        s,
        vec![a[3] / b[2], a[3] / b[1]],
        vec![b[0] * qv / a[1], b[0] * qv / a[0]],
        a[2] / b[0],
    )
}

/// Infinite-product prefactor of [`w_wrapper`].
pub fn w_wrapper_prefactor(p: &RPParams, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let qv = q.value();
    let (a, b) = (&p.a, &p.b);
    let (a1, a2, a3) = (a[0], a[1], a[2]);
    let (b1, b2, b3) = (b[0], b[1], b[2]);
    let c = b1 * qv * qv / (a2 * a1);
    let mut num = vec![a3 / b1, b3 * c, b2 * c, a2 * qv / a1, a1 / a2];
    let mut den = vec![b3 * qv / a2, b2 * qv / a2, b1 * qv / a2, b3 * qv / a1, b2 * qv / a1, b1 * qv / a1];
    for i in 3..p.n() {
        num.extend([b[i] * c, a[i] * qv / a2, a[i] * qv / a1]);
        den.extend([a[i] * c, b[i] * qv / a2, b[i] * qv / a1]);
    }
    let d = a1 * qpoch_inf_all(&den, q, pol)?;
    if d.norm() < 1e-300 {
        return Err(QError::PoleHit("W prefactor denominator vanishes".into()));
    }
    ensure_finite(qpoch_inf_all(&num, q, pol)? / d, "w_wrapper prefactor")
}

/// The function `W({a_i}; {b_i})` expressed through `W^{M,2}`; it equals
/// `-1/(q(1-q)(q)_inf) * phi_{1,2}` for balanced parameters. A series that
/// cancels by more than [`CANCELLATION_RATIO`] is resummed in double-double
/// arithmetic from the original parameters.
pub fn w_wrapper(p: &RPParams, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let z = p.a[2] / p.b[0];
    if z.norm() >= 1.0 {
        return Err(QError::ConvergenceDomain(format!("|a_3/b_1| = {} >= 1", z.norm())));
    }
    let kp = w_wrapper_series_params(p, q)?;
    let mut series = kajihara_w_detailed(&kp, q, pol)?;
    if series.scale > CANCELLATION_RATIO * series.value.norm() {
        let args = w_wrapper_args_dd(p, q);
        let refined = kajihara_sum(&args, q.value(), pol.max_total_index, &|layer, scale, value| {
            layer <= DD_REL_STOP * value || layer <= DD_TOL * scale
        })?;
        if let Some(r) = refined {
            series = r;
        }
    }
    Ok(w_wrapper_prefactor(p, q, pol)? * series.value)
}

/// [`w_wrapper_series_params`] formed in double-double arithmetic.
fn w_wrapper_args_dd(p: &RPParams, q: Nome) -> KajArgs<Cdd> {
    let m = p.m;
    let qv = dd(q.value());
    let a: Vec<Cdd> = p.a.iter().map(|&v| dd(v)).collect();
    let b: Vec<Cdd> = p.b.iter().map(|&v| dd(v)).collect();
    let idx = |i: usize| m + 3 - i;
    KajArgs {
        a: (1..=m).map(|i| a[idx(i)] / b[idx(i)]).collect(),
        x: (1..=m).map(|i| a[idx(i)]).collect(),
        s: a[3] * b[0] * qv / (a[1] * a[0]),
        u: vec![a[3] / b[2], a[3] / b[1]],
        v: vec![b[0] * qv / a[1], b[0] * qv / a[0]],
        z: a[2] / b[0],
    }
}

/// `_{r+1}W_r(a_1; a_4, ..., a_{r+1}; z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VWPParams {
    pub a1: Scalar,
    pub upper: Vec<Scalar>,
    pub z: Scalar,
}

impl VWPParams {
    /// `r` of `_{r+1}W_r`.
    pub fn r(&self) -> usize {
        self.upper.len() + 2
    }
}

/// Term-recursive very-well-poised sum; stops after three consecutive terms
/// below `tol * scale`, or exactly when a numerator parameter is `q^{-m}`.
pub fn vwp_series(p: &VWPParams, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    Ok(vwp_series_detailed(p, q, pol)?.value)
}

pub fn vwp_series_detailed(p: &VWPParams, q: Nome, pol: &TruncationPolicy) -> Result<SeriesValue> {
    let one = re(1.0);
    let qv = q.value();
    if (one - p.a1).norm() < DENOM_EPS {
        return Err(QError::PoleHit("very-well-poised series with a_1 = 1".into()));
    }
    // ratio part (a_1, a_4, ...)_n / (q, q a_1/a_4, ...)_n z^n, updated per n
    let mut part = one;
    let mut qn = one;
    let mut sum = re(0.0);
    let mut scale = 0.0;
    let mut small = 0;
    for n in 0..pol.max_terms {
        let term = (one - p.a1 * qn * qn) / (one - p.a1) * part;
        sum += term;
        scale += term.norm();
        let last = term.norm();
        if !(sum.re.is_finite() && sum.im.is_finite()) {
            return Err(QError::NonFinite("vwp_series"));
        }
        if last <= pol.tol * scale {
            small += 1;
            if small >= SERIES_WINDOW {
                return Ok(SeriesValue { value: sum, scale, terms: n + 1, tail: last });
            }
        } else {
            small = 0;
        }
        // advance part from n to n+1
        let mut num = one - p.a1 * qn;
        let mut den = one - qn * qv;
        for &u in &p.upper {
            let nu = one - u * qn;
            if nu.norm() < DENOM_EPS {
                return Ok(SeriesValue { value: sum, scale, terms: n + 1, tail: 0.0 });
            }
            num *= nu;
            den *= one - qv * p.a1 / u * qn;
        }
        if num.norm() < DENOM_EPS {
            return Ok(SeriesValue { value: sum, scale, terms: n + 1, tail: 0.0 });
        }
        if den.norm() < DENOM_EPS {
            return Err(QError::PoleHit(format!("very-well-poised denominator vanishes at n = {n}")));
        }
        part *= num / den * p.z;
        qn *= qv;
    }
    Err(QError::TruncationExceeded { context: "vwp_series", max_terms: pol.max_terms })
}

/// `_8W_7(a; b, c, d, e, f; z)`.
pub fn w87(a: Scalar, b: Scalar, c: Scalar, d: Scalar, e: Scalar, f: Scalar, z: Scalar, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    vwp_series(&VWPParams { a1: a, upper: vec![b, c, d, e, f], z }, q, pol)
}

/// Parameters `(a, b, c, d, e, f, g, h)` of Bailey's integral, `c d = a b e f g h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaileyParams {
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
    pub d: Scalar,
    pub e: Scalar,
    pub f: Scalar,
    pub g: Scalar,
    pub h: Scalar,
}

impl BaileyParams {
    pub fn check(&self) -> Result<()> {
        let lhs = self.c * self.d;
        let rhs = self.a * self.b * self.e * self.f * self.g * self.h;
        let residual = (lhs - rhs).norm() / lhs.norm().max(rhs.norm());
        if !(residual <= crate::jackson::BALANCE_TOL) {
            return Err(QError::BalanceViolation { residual });
        }
        if (self.a * self.h).norm() >= 1.0 {
            return Err(QError::ConvergenceDomain(format!("|a h| = {} >= 1", (self.a * self.h).norm())));
        }
        Ok(())
    }

    pub fn swap_ab(&self) -> Self {
        BaileyParams { a: self.b, b: self.a, ..self.clone() }
    }
}

/// `int_a^b (q t/a, q t/b, c t, d t)_inf / (e t, f t, g t, h t)_inf d_qt`.
pub fn bailey_integral(p: &BaileyParams, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let qv = q.value();
    let f = RpIntegrand::new(vec![qv / p.a, qv / p.b, p.c, p.d], vec![p.e, p.f, p.g, p.h], q, pol);
    jackson_between(p.a, p.b, &f as &dyn Integrand, q, pol)
}

/// Bailey's closed form of [`bailey_integral`]:
/// `b (1-q) (q, bq/a, a/b, cd/(eh), cd/(fh), cd/(gh), bc, bd)_inf / (ae, af, ag, be, bf, bg, bh, bcd/h)_inf
///  * 8W7(bcd/(hq); be, bf, bg, c/h, d/h; ah)`.
pub fn bailey_rhs(p: &BaileyParams, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    p.check()?;
    let qv = q.value();
    let BaileyParams { a, b, c, d, e, f, g, h } = *p;
    let cd = c * d;
    let num = qpoch_inf_all(&[qv, b * qv / a, a / b, cd / (e * h), cd / (f * h), cd / (g * h), b * c, b * d], q, pol)?;
    let den = qpoch_inf_all(&[a * e, a * f, a * g, b * e, b * f, b * g, b * h, b * cd / h], q, pol)?;
    if den.norm() < 1e-300 {
        return Err(QError::PoleHit("Bailey prefactor denominator vanishes".into()));
    }
    let w = w87(b * cd / (h * qv), b * e, b * f, b * g, c / h, d / h, a * h, q, pol)?;
    ensure_finite(b * (re(1.0) - qv) * num / den * w, "bailey_rhs")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::qpoch_fin;

    fn q(v: f64) -> Nome {
        Nome::real(v).unwrap()
    }

    fn pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    fn close(a: Scalar, b: Scalar, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
    }

    fn sample_kaj(m: usize, z: f64) -> KajiharaParams {
        let a = [0.7, 1.3, 0.45][..m].iter().map(|&v| re(v)).collect();
        let x = [1.1, 0.63, 1.9][..m].iter().map(|&v| re(v)).collect();
        KajiharaParams::new(a, x, re(0.37), vec![re(0.8), re(1.2)], vec![re(0.55), re(0.3)], re(z)).unwrap()
    }

    #[test]
    fn kajihara_at_zero_argument() {
        for m in 1..=3 {
            assert_eq!(kajihara_w(&sample_kaj(m, 0.0), q(0.5), &pol()).unwrap(), re(1.0));
        }
    }

    #[test]
    fn kajihara_single_sum_oracle() {
        let nq = q(0.5);
        let p = sample_kaj(1, 0.4);
        let (a, s, z) = (p.a[0], p.s, p.z);
        let mut direct = re(0.0);
        for n in 0..120usize {
            let mut t = z.powi(n as i32) * (re(1.0) - nq.powi(2 * n as i32) * s) / (re(1.0) - s);
            t *= qpoch_fin(s, nq, n) / qpoch_fin(s * nq.value() / a, nq, n);
            t *= qpoch_fin(a, nq, n) / qpoch_fin(nq.value(), nq, n);
            for k in 0..2 {
                t *= qpoch_fin(p.v[k], nq, n) / qpoch_fin(s * nq.value() / p.u[k], nq, n);
                t *= qpoch_fin(p.u[k], nq, n) / qpoch_fin(s * nq.value() / p.v[k], nq, n);
            }
            direct += t;
        }
        assert!(close(kajihara_w(&p, nq, &pol()).unwrap(), direct, 1e-12));
    }

    #[test]
    fn kajihara_pair_permutation_symmetry() {
        let nq = q(0.5);
        let p = sample_kaj(3, 0.35);
        // x_M enters as a normaliser, so permute the first two pairs.
        let mut swapped = p.clone();
        swapped.a.swap(0, 1);
        swapped.x.swap(0, 1);
        let v1 = kajihara_w(&p, nq, &pol()).unwrap();
        let v2 = kajihara_w(&swapped, nq, &pol()).unwrap();
        assert!(close(v1, v2, 1e-11));
    }

    #[test]
    fn kajihara_layer_cap() {
        let p = sample_kaj(2, 0.95);
        let tight = TruncationPolicy::new(1e-15, 10_000, 5).unwrap();
        assert!(matches!(kajihara_w(&p, q(0.5), &tight), Err(QError::TruncationExceeded { .. })));
    }

    #[test]
    fn kajihara_rejects_repeated_x() {
        let r = KajiharaParams::new(vec![re(1.0); 2], vec![re(0.5); 2], re(0.3), vec![], vec![], re(0.1));
        assert!(r.is_err());
    }

    #[test]
    fn vwp_basic_cases() {
        let nq = q(0.5);
        let p = VWPParams { a1: re(0.3), upper: vec![re(0.5), re(1.2), re(0.7), re(2.0), re(0.9)], z: re(0.0) };
        assert_eq!(vwp_series(&p, nq, &pol()).unwrap(), re(1.0));
        assert_eq!(p.r(), 7);
    }

    fn vwp_direct(p: &VWPParams, nq: Nome, n_max: usize) -> Scalar {
        let mut s = re(0.0);
        for n in 0..n_max {
            let mut t = (re(1.0) - p.a1 * nq.powi(2 * n as i32)) / (re(1.0) - p.a1) * p.z.powi(n as i32);
            t *= qpoch_fin(p.a1, nq, n) / qpoch_fin(nq.value(), nq, n);
            for &u in &p.upper {
                t *= qpoch_fin(u, nq, n) / qpoch_fin(nq.value() * p.a1 / u, nq, n);
            }
            s += t;
        }
        s
    }

    #[test]
    fn vwp_terminating_series() {
        let nq = q(0.5);
        let p = VWPParams { a1: re(0.3), upper: vec![re(8.0), re(1.2), re(0.7), re(2.1), re(0.9)], z: re(1.7) };
        let v = vwp_series_detailed(&p, nq, &pol()).unwrap();
        assert_eq!(v.terms, 4);
        assert!(close(v.value, vwp_direct(&p, nq, 4), 1e-14));
    }

    #[test]
    fn vwp_matches_direct_sum() {
        let nq = q(0.5);
        let p = VWPParams { a1: re(0.45), upper: vec![re(0.8), re(1.3), re(0.6), re(1.7), re(0.9)], z: re(0.55) };
        assert!(close(vwp_series(&p, nq, &pol()).unwrap(), vwp_direct(&p, nq, 500), 1e-12));
    }

    #[test]
    fn bailey_validation() {
        let p = BaileyParams {
            a: re(0.8),
            b: re(1.4),
            c: re(0.9),
            d: re(1.0),
            e: re(0.6),
            f: re(1.1),
            g: re(0.7),
            h: re(0.3),
        };
        assert!(matches!(bailey_rhs(&p, q(0.5), &pol()), Err(QError::BalanceViolation { .. })));
    }
}
