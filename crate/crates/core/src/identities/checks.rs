//! Residual checkers, one per relation.

use nalgebra::DMatrix;

use super::coeffs::{
    coeff_gm, coeff_h3, coeff_heine, coeff_mimachi_c, coeff_rp_ctilde, coeff_w87, coeff_w87_as_typeset, coeff_w_d,
    mimachi_coefficient_sum, W87Params,
};
use crate::error::{QError, Result};
use crate::jackson::{h3_phi, jp_lhs_integral, jp_rhs_integral, phi, JPParams, RPParams};
use crate::qcore::{qpoch_inf, re, theta, Nome, Scalar, TruncationPolicy};
use crate::qdiff::{gm_recurrence_residual, h3_operator, h3_to_rp, heine_solution, EmOperator, H3Params, HeineParams, HeineSolution};
use crate::qdiff::em_nonhomog_residual;
use crate::report::IdentityReport;
use crate::series::{bailey_integral, bailey_rhs, w87, w_wrapper, BaileyParams};

/// Equality check judged against the larger of the two sides.
fn equality(lhs: Scalar, rhs: Scalar, terms: usize, tol: f64) -> IdentityReport {
    IdentityReport::compare(lhs, rhs, lhs.norm().max(rhs.norm()), terms, tol)
}

/// `sum_{k=2}^{M+3} C~_k phi_{1,k} = 0`.
pub fn check_rp_connection(p: &RPParams, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    let mut terms = Vec::with_capacity(p.n() - 1);
    for k in 2..=p.n() {
        terms.push(coeff_rp_ctilde(p, k, q, pol)? * phi(p, 1, k, q, pol)?);
    }
    Ok(IdentityReport::vanishing(&terms, tol))
}

/// Reconstructs `phi_{i,j}` from `phi_{1,2}, ..., phi_{1,M+2}` using the
/// connection formula (for `phi_{1,M+3}`) and the cocycle relation
/// `phi_{i,j} = phi_{1,j} - phi_{1,i}`.
pub fn reconstruct_phi(p: &RPParams, i: usize, j: usize, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let n = p.n();
    let mut base = vec![re(0.0); n + 1];
    for k in 2..n {
        base[k] = phi(p, 1, k, q, pol)?;
    }
    let c_last = coeff_rp_ctilde(p, n, q, pol)?;
    if c_last.norm() < 1e-300 {
        return Err(QError::DegenerateCoefficient("C~_{M+3} vanishes".into()));
    }
    let mut acc = re(0.0);
    for k in 2..n {
        acc += coeff_rp_ctilde(p, k, q, pol)? * base[k];
    }
    base[n] = -acc / c_last;
    Ok(base[j] - base[i])
}

/// `phi_{i,j} + phi_{j,k} + phi_{k,i} = 0` over all triples, judged against
/// the largest of the three terms.
pub fn check_cocycle(p: &RPParams, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    let n = p.n();
    let mut table = vec![vec![re(0.0); n + 1]; n + 1];
    for i in 1..=n {
        for j in i + 1..=n {
            table[i][j] = phi(p, i, j, q, pol)?;
            table[j][i] = phi(p, j, i, q, pol)?;
        }
    }
    let mut reports = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            for k in j + 1..=n {
                let t = [table[i][j], table[j][k], table[k][i]];
                let sum: Scalar = t.iter().sum();
                let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
                reports.push(IdentityReport::compare(sum, re(0.0), scale, 3, tol));
            }
        }
    }
    IdentityReport::combine(reports).ok_or_else(|| QError::InvalidParams("no triples".into()))
}

/// The Mimachi connection formula
/// `theta(q^rho) int_0^{q b_1} ... = sum_k C_k int_0^{q/a_k} ...`.
pub fn check_mimachi(p: &JPParams, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    let lhs = theta(p.rho_value, q, pol)? * jp_lhs_integral(p, q, pol)?;
    let mut rhs = re(0.0);
    let mut scale = lhs.norm();
    for k in 1..=p.a.len() {
        let t = coeff_mimachi_c(p, k, q, pol)? * jp_rhs_integral(p, k, q, pol)?;
        rhs += t;
        scale += t.norm();
    }
    Ok(IdentityReport::compare(lhs, rhs, scale, p.a.len() + 1, tol))
}

/// `1 + C_2/C_1 + ... + C_{M+3}/C_1 = 0` at `alpha = 1` for balanced parameters.
pub fn check_key_lemma(p: &RPParams, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    let jp = JPParams::new(p.a.clone(), p.b.clone(), re(1.0), q)?;
    let (sum, scale) = mimachi_coefficient_sum(&jp, q, pol)?;
    Ok(IdentityReport::compare(sum, re(0.0), scale, p.n(), tol))
}

/// Largest relative gap between `C_k/C_1` (Mimachi, `alpha = 1`), `C~_k` and `D_k`.
pub fn coefficient_agreement(p: &RPParams, q: Nome, pol: &TruncationPolicy) -> Result<f64> {
    let jp = JPParams::new(p.a.clone(), p.b.clone(), re(1.0), q)?;
    let c1 = coeff_mimachi_c(&jp, 1, q, pol)?;
    let mut worst: f64 = 0.0;
    for k in 2..=p.n() {
        let ct = coeff_rp_ctilde(p, k, q, pol)?;
        let d = coeff_w_d(p, k, q, pol)?;
        let ratio = coeff_mimachi_c(&jp, k, q, pol)? / c1;
        worst = worst.max((ct - d).norm() / ct.norm()).max((ct - ratio).norm() / ct.norm());
    }
    Ok(worst)
}

/// Heine's connection formula relating `int_0^1`, `int_0^{q/(bx)}` and
/// `x^{-beta} int_0^{c/a}`.
pub fn check_heine_connection(hp: &HeineParams, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    let x = hp.x;
    let lhs = heine_solution(hp, HeineSolution::TToOne, x, q, pol)?;
    let (r1, r2) = coeff_heine(hp, q, pol)?;
    let t1 = r1 * heine_solution(hp, HeineSolution::TToQOverBx, x, q, pol)?;
    let t2 = r2 * heine_solution(hp, HeineSolution::SToCOverA, x, q, pol)?;
    Ok(IdentityReport::compare(lhs, t1 + t2, lhs.norm() + t1.norm() + t2.norm(), 3, tol))
}

/// Heine's operator annihilates each of its three integral solutions.
pub fn check_heine_solutions(hp: &HeineParams, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    let op = crate::qdiff::heine_operator(hp, q);
    let mut reports = Vec::new();
    for which in [HeineSolution::TToOne, HeineSolution::TToQOverBx, HeineSolution::SToCOverA] {
        let y = |x: Scalar| heine_solution(hp, which, x, q, pol);
        let r = op.apply(hp.x, &y, q)?;
        reports.push(IdentityReport::compare(r.value, re(0.0), r.scale, 3, tol));
    }
    Ok(IdentityReport::combine(reports).expect("three reports"))
}

/// `W` with the `a` list reordered as `(a_1, a_k, a_2, ..., a_{k-1}, a_{k+1}, ...)`.
pub fn w_permuted(p: &RPParams, k: usize, q: Nome, pol: &TruncationPolicy) -> Result<Scalar> {
    let mut order = vec![1, k];
    order.extend((2..=p.n()).filter(|&i| i != k));
    w_wrapper(&p.permute_a(&order)?, q, pol)
}

/// `sum_{k=2}^{M+3} D_k W(a_1, a_k, ...; b) = 0`.
pub fn check_w_relation(p: &RPParams, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    let mut terms = Vec::with_capacity(p.n() - 1);
    for k in 2..=p.n() {
        terms.push(coeff_w_d(p, k, q, pol)? * w_permuted(p, k, q, pol)?);
    }
    Ok(IdentityReport::vanishing(&terms, tol))
}

/// `W({a}; {b}) = -phi_{1,2} / (q (1-q) (q)_inf)`.
pub fn check_w_integral_consistency(p: &RPParams, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    let qv = q.value();
    let lhs = w_wrapper(p, q, pol)?;
    let rhs = -phi(p, 1, 2, q, pol)? / (qv * (re(1.0) - qv) * qpoch_inf(qv, q, pol)?);
    Ok(equality(lhs, rhs, 2, tol))
}

/// `C_1 phi_{1,4} + C_2 phi_{2,4} + C_3 phi_{3,4} = 0` for the H3 integrals.
pub fn check_h3_three_term(hp: &H3Params, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    let c = coeff_h3(hp, q, pol)?;
    let mut terms = Vec::with_capacity(3);
    for i in 0..3 {
        terms.push(c[i] * h3_phi(hp, i + 1, 4, q, pol)?);
    }
    Ok(IdentityReport::vanishing(&terms, tol))
}

/// Numerical rank and kernel residual of the 4x6 system built from the
/// three cocycle rows and the three-term row.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOutcome {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub report: IdentityReport,
}

/// Rows `(1,-1,0,1,0,0)`, `(1,0,-1,0,1,0)`, `(0,1,-1,0,0,1)`, `(0,0,C1,0,C2,C3)`
/// against `(phi_12, phi_13, phi_14, phi_23, phi_24, phi_34)`.
pub fn rank_matrix(c: [Scalar; 3]) -> DMatrix<Scalar> {
    let (one, zero) = (re(1.0), re(0.0));
    #[rustfmt::skip]
    let rows = [
        one, -one, zero, one, zero, zero,
        one, zero, -one, zero, one, zero,
        zero, one, -one, zero, zero, one,
        zero, zero, c[0], zero, c[1], c[2],
    ];
    DMatrix::from_row_slice(4, 6, &rows)
}

pub fn numerical_rank(m: &DMatrix<Scalar>, rel: f64) -> (usize, Vec<f64>) {
    let sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    let top = sv.iter().copied().fold(0.0, f64::max);
    (sv.iter().filter(|&&s| s > rel * top).count(), sv)
}

pub fn check_rank(hp: &H3Params, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<RankOutcome> {
    let c = coeff_h3(hp, q, pol)?;
    let m = rank_matrix(c);
    let (rank, singular_values) = numerical_rank(&m, 1e-8);
    let pairs = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];
    let mut v = Vec::with_capacity(6);
    for (i, j) in pairs {
        v.push(h3_phi(hp, i, j, q, pol)?);
    }
    let v = nalgebra::DVector::from_vec(v);
    let mv = &m * &v;
    let mut report = IdentityReport::compare(re(mv.norm()), re(0.0), m.norm() * v.norm(), 6, tol)
        .with_note(format!("numerical rank {rank}"));
    if rank != 4 {
        report.status = crate::report::Status::Fail;
    }
    Ok(RankOutcome { rank, singular_values, report })
}

/// Bailey's formula: the integral against its `_8W_7` closed form.
pub fn check_bailey(p: &BaileyParams, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    Ok(equality(bailey_integral(p, q, pol)?, bailey_rhs(p, q, pol)?, 2, tol))
}

/// The two `_8W_7` series on the right of the three-term relations.
fn w87_branches(p: &W87Params, q: Nome, pol: &TruncationPolicy) -> Result<(Scalar, Scalar, Scalar)> {
    let z = p.z(q);
    if z.norm() >= 1.0 {
        return Err(QError::ConvergenceDomain(format!("|q^2 a^2/(bcdef)| = {} >= 1", z.norm())));
    }
    let W87Params { a, b, c, d, e, f } = *p;
    let lhs = w87(a, b, c, d, e, f, z, q, pol)?;
    let wb = w87(b * b / a, b, b * e / a, b * c / a, b * d / a, b * f / a, z, q, pol)?;
    let wc = w87(c * c / a, c, c * e / a, c * b / a, c * d / a, c * f / a, z, q, pol)?;
    Ok((lhs, wb, wc))
}

/// `8W7(a; b, c, d, e, f; z) = K(b, c) 8W7(b^2/a; ...) + K(c, b) 8W7(c^2/a; ...)`.
pub fn check_w87_three_term(p: &W87Params, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    let (lhs, wb, wc) = w87_branches(p, q, pol)?;
    let kb = coeff_w87(p, q, pol)?;
    let kc = coeff_w87(&p.swap_bc(), q, pol)?;
    let (t1, t2) = (kb * wb, kc * wc);
    let typeset = coeff_w87_as_typeset(p, q, pol)?;
    Ok(IdentityReport::compare(lhs, t1 + t2, lhs.norm() + t1.norm() + t2.norm(), 3, tol)
        .with_note(format!("typeset/used coefficient ratio {:.6e}", (typeset / kb).re)))
}

/// Ratios of the Gupta-Masson coefficient `C(b, c)` to the coefficient of
/// [`check_w87_three_term`]: `(consistent form, typeset form)`.
pub fn gm_coefficient_ratios(p: &W87Params, q: Nome, pol: &TruncationPolicy) -> Result<(Scalar, Scalar)> {
    let g = coeff_gm(p, q, pol)?;
    let k = coeff_w87(p, q, pol)?;
    Ok((g.value() / k, g.value_typeset() / k))
}

/// The three-term relation with the Gupta-Masson form of the coefficients.
pub fn check_gm_three_term(p: &W87Params, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    let (lhs, wb, wc) = w87_branches(p, q, pol)?;
    let gb = coeff_gm(p, q, pol)?;
    let gc = coeff_gm(&p.swap_bc(), q, pol)?;
    for g in [&gb, &gc] {
        if g.b_diff.norm() < 1e-10 * g.b_scale {
            return Err(QError::DegenerateCoefficient("B(b, c) - B(c, b) vanishes".into()));
        }
    }
    let (t1, t2) = (gb.value() * wb, gc.value() * wc);
    let (ratio, typeset_ratio) = gm_coefficient_ratios(p, q, pol)?;
    Ok(IdentityReport::compare(lhs, t1 + t2, lhs.norm() + t1.norm() + t2.norm(), 3, tol)
        .with_note(format!("C(b,c)/K(b,c) = {:.12}", ratio.re))
        .with_note(format!("typeset C(b,c)/K(b,c) = {:.6e}", typeset_ratio.re)))
}

/// `E_M phi_{i,j} = 0` at `x` for every pair `i < j`.
pub fn check_em_solution(op: &EmOperator, x: Scalar, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    let n = op.m + 3;
    let mut reports = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            let y = |xx: Scalar| phi(&op.rp_at(xx), i, j, q, pol);
            let r = op.apply(x, &y, q)?;
            reports.push(IdentityReport::compare(r.value, re(0.0), r.scale, op.m + 2, tol));
        }
    }
    Ok(IdentityReport::combine(reports).expect("at least one pair"))
}

/// The non-homogeneous equation for every admissible endpoint, and the
/// homogeneous equation for differences of two such solutions.
pub fn check_em_nonhomog(op: &EmOperator, x: Scalar, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    let n = op.m + 3;
    let mut reports = Vec::new();
    for k in 1..=n {
        reports.push(em_nonhomog_residual(op, x, k, q, pol, tol)?);
    }
    for k in 2..=n {
        let y = |xx: Scalar| {
            let p = op.rp_at(xx);
            Ok(crate::jackson::rp_integral_from_zero(&p, 1, q, pol)?
                - crate::jackson::rp_integral_from_zero(&p, k, q, pol)?)
        };
        let r = op.apply(x, &y, q)?;
        reports.push(IdentityReport::compare(r.value, re(0.0), r.scale, op.m + 2, tol));
    }
    Ok(IdentityReport::combine(reports).expect("nonempty"))
}

/// The H3 index `i` as an index of the mapped Riemann-Papperitz parameters.
fn h3_to_rp_index(i: usize) -> usize {
    if i == 4 {
        1
    } else {
        i + 1
    }
}

/// For the mapped `E_1` data, `E_1 y = 0` and `H3 (x^{nu-alpha} y) = 0` hold
/// together for `y = phi_{i,j}`.
pub fn check_h3_solution(hp: &H3Params, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    let map = h3_to_rp(hp, q)?;
    let op = &map.op;
    let h3 = h3_operator(hp, q);
    let mut reports = Vec::new();
    for (i, j) in [(1, 4), (2, 4), (3, 4), (1, 2), (2, 3)] {
        let (ri, rj) = (h3_to_rp_index(i), h3_to_rp_index(j));
        let y = |xx: Scalar| phi(&op.rp_at(xx), ri, rj, q, pol);
        let e = op.apply(hp.x, &y, q)?;
        reports.push(IdentityReport::compare(e.value, re(0.0), e.scale, 3, tol));
        let big_y = |xx: Scalar| h3_phi(&hp.at_x(xx), i, j, q, pol);
        let h = h3.apply(hp.x, &big_y, q)?;
        reports.push(IdentityReport::compare(h.value, re(0.0), h.scale, 3, tol));
    }
    Ok(IdentityReport::combine(reports).expect("nonempty"))
}

/// The Gupta-Masson recurrence for `Y_n` built from `phi_{1,2}` and
/// `phi_{2,3}` at `x_n = x0 q^n`, `n = 1..=5`.
pub fn check_gm_recurrence(op: &EmOperator, x0: Scalar, q: Nome, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    let mut reports = Vec::new();
    for (i, j) in [(1, 2), (2, 3)] {
        let y = |xx: Scalar| phi(&op.rp_at(xx), i, j, q, pol);
        reports.push(gm_recurrence_residual(op, x0, &y, 1..=5, q, pol, tol)?);
    }
    Ok(IdentityReport::combine(reports).expect("nonempty"))
}

/// Parameters with `b_{M+3}` multiplied by `1 + eps`, breaking the balance.
pub fn perturb_balance(p: &RPParams, eps: f64) -> RPParams {
    let mut b = p.b.clone();
    let last = b.len() - 1;
    b[last] *= 1.0 + eps;
    RPParams { m: p.m, a: p.a.clone(), b }
}
