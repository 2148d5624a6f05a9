//! Seeded sampler of admissible parameters.
//!
//! Every trial draws from its own ChaCha8 stream: the generator is seeded
//! with `seed` and its stream index set to the trial number, so trial `k`
//! yields the same parameters regardless of how many trials run or in which
//! order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::coeffs::W87Params;
use crate::error::{QError, Result};
use crate::jackson::{JPParams, RPParams};
use crate::qcore::{re, Nome, Scalar};
use crate::qdiff::{rp_to_h3, EmOperator, H3Map, H3Params, HeineParams};
use crate::series::BaileyParams;

/// Rejections allowed before a family reports [`QError::SamplerExhausted`].
pub const MAX_ATTEMPTS: usize = 10_000;

/// Cap on `|a_2/b_1|` and `|a_3/b_1|` for the `W` families.
pub const W_Z_CAP: f64 = 0.45;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleConfig {
    pub seed: u64,
    pub m: usize,
    /// Interval for a sampled real nome.
    pub q_range: (f64, f64),
    /// A fixed nome instead of sampling one.
    pub q: Option<f64>,
    pub magnitude_range: (f64, f64),
    pub real_only: bool,
    /// Minimal distance of `log_q` of guarded monomials from the integers.
    pub pole_margin: f64,
    pub z_cap: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            seed: 0,
            m: 1,
            q_range: (0.3, 0.7),
            q: None,
            magnitude_range: (0.3, 3.0),
            real_only: true,
            pole_margin: 0.05,
            z_cap: 0.8,
        }
    }
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.q_range;
        if !(0.0 < lo && lo <= hi && hi < 1.0) {
            return Err(QError::InvalidParams(format!("q_range must lie inside (0, 1), got {:?}", self.q_range)));
        }
        if let Some(qv) = self.q {
            Nome::real(qv)?;
        }
        let (mlo, mhi) = self.magnitude_range;
        if !(0.0 < mlo && mlo <= mhi && mhi.is_finite()) {
            return Err(QError::InvalidParams(format!("bad magnitude_range {:?}", self.magnitude_range)));
        }
        if !(self.pole_margin > 0.0 && self.pole_margin < 0.5) {
            return Err(QError::InvalidParams(format!("pole_margin must lie in (0, 0.5), got {}", self.pole_margin)));
        }
        if !(self.z_cap > 0.0 && self.z_cap < 1.0) {
            return Err(QError::InvalidParams(format!("z_cap must lie in (0, 1), got {}", self.z_cap)));
        }
        if self.m == 0 {
            return Err(QError::InvalidParams("M must be at least 1".into()));
        }
        Ok(())
    }
}

/// Random source for one trial.
pub struct Sampler<'a> {
    cfg: &'a SampleConfig,
    rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    pub fn new(cfg: &'a SampleConfig, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(trial);
        Sampler { cfg, rng }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            lo
        } else {
            self.rng.gen_range(lo..hi)
        }
    }

    pub fn nome(&mut self) -> Nome {
        let v = match self.cfg.q {
            Some(v) => v,
            None => self.uniform(self.cfg.q_range.0, self.cfg.q_range.1),
        };
        Nome::real(v).expect("validated q range")
    }

    /// A parameter of magnitude in `magnitude_range`; with `real_only = false`
    /// a phase in `(-0.6, 0.6)` is attached.
    pub fn param(&mut self, complex: bool) -> Scalar {
        let (lo, hi) = self.cfg.magnitude_range;
        let r = self.uniform(lo, hi);
        if complex && !self.cfg.real_only {
            Scalar::from_polar(r, self.uniform(-0.6, 0.6))
        } else {
            re(r)
        }
    }

    fn margin(&self) -> f64 {
        self.cfg.pole_margin
    }
}

/// `true` when `log_q z` stays at least `margin` away from every integer.
fn off_lattice(q: Nome, z: Scalar, margin: f64) -> bool {
    q.lattice_distance(z) >= margin
}

/// `true` unless `z` is near `q^{-m}` for some `m >= 0`, i.e. a zero of `(z)_n`.
fn off_poch_poles(q: Nome, z: Scalar, margin: f64) -> bool {
    let w = q.log_of(z);
    !(w.re < margin && q.lattice_distance(z) < margin)
}

fn retry<T>(mut attempt: impl FnMut(u64) -> Option<T>) -> Result<T> {
    for k in 0..MAX_ATTEMPTS {
        if let Some(v) = attempt(k as u64) {
            return Ok(v);
        }
    }
    Err(QError::SamplerExhausted { attempts: MAX_ATTEMPTS })
}

/// Guards shared by every Riemann-Papperitz family: `a_i/a_j` and `a_i/b_j`
/// off the q-lattice (theta zeros in the coefficients, poles of the
/// integrand on the endpoint lattices, lattice collisions of endpoints).
fn rp_guards(q: Nome, a: &[Scalar], b: &[Scalar], margin: f64) -> bool {
    for (i, &ai) in a.iter().enumerate() {
        for &aj in &a[i + 1..] {
            if !off_lattice(q, ai / aj, margin) {
                return false;
            }
        }
        for &bj in b {
            if !off_lattice(q, ai / bj, margin) {
                return false;
            }
        }
    }
    true
}

/// Extra guards for the `W` series of every permutation `(a_1, a_k, ...)`:
/// the Pochhammer denominators `b_1 b_j q^2/(a_1 a_k)` and
/// `a_i b_1 q/(a_1 a_k)`, and `|a_2/b_1|, |a_3/b_1| <= W_Z_CAP`.
fn w_guards(q: Nome, a: &[Scalar], b: &[Scalar], margin: f64) -> bool {
    let b1 = b[0];
    if (a[1] / b1).norm() > W_Z_CAP || (a[2] / b1).norm() > W_Z_CAP {
        return false;
    }
    let qv = q.value();
    for k in 1..a.len() {
        let base = b1 / (a[0] * a[k]);
        for &bj in &b[1..] {
            if !off_lattice(q, bj * base * qv * qv, margin) {
                return false;
            }
        }
        for (i, &ai) in a.iter().enumerate() {
            if i != 0 && i != k && !off_poch_poles(q, ai * base * qv, margin) {
                return false;
            }
        }
    }
    true
}

/// Rejections allowed within one attempt of [`draw_balanced`] before it
/// starts over from fresh draws.
const RESTART_AFTER: usize = 500;

/// Why an attempt of [`draw_balanced`] stopped.
enum Stop {
    Restart,
    Exhausted,
}

/// Rejections left for one sampler call and for the current attempt.
struct Budget {
    total: usize,
    attempt: usize,
}

impl Budget {
    fn spend(&mut self) -> std::result::Result<(), Stop> {
        if self.total == 0 {
            return Err(Stop::Exhausted);
        }
        self.total -= 1;
        if self.attempt == 0 {
            return Err(Stop::Restart);
        }
        self.attempt -= 1;
        Ok(())
    }
}

/// `W` pole guards among the `a_i` for a fixed `b_1`:
/// `a_i b_1 q/(a_1 a_k)` off the zeros of the Pochhammer denominators.
fn w_a_guards(q: Nome, a: &[Scalar], b1: Scalar, margin: f64) -> bool {
    let qv = q.value();
    (1..a.len()).all(|k| {
        (1..a.len()).all(|i| i == k || off_poch_poles(q, a[i] * b1 * qv / (a[0] * a[k]), margin))
    })
}

/// `W` pole guard for `b_j`, `j >= 2`: `b_1 b_j q^2/(a_1 a_k)` off the lattice.
fn w_b_guard(q: Nome, a: &[Scalar], b1: Scalar, bj: Scalar, margin: f64) -> bool {
    let qv = q.value();
    (1..a.len()).all(|k| off_lattice(q, bj * b1 * qv * qv / (a[0] * a[k]), margin))
}

/// Balanced parameters: `b_1` first, then each `a_i` is redrawn until it
/// clears its guards against the values already drawn; the balance condition
/// is enforced through a common factor on `b_2..b_{M+3}`, after which
/// failing `b_j` are nudged and `b_{M+3}` re-solved until every guard holds.
/// `a_3` is `b_1` times a ratio in `(0.1, z_cap)`.
///
/// With `w_mode`, parameters are real, `b_1` lies in the upper half of the
/// magnitude range and `a_2, a_3` are `b_1` times `(0.1, W_Z_CAP)`.
fn draw_balanced(s: &mut Sampler, q: Nome, m: usize, w_mode: bool) -> Result<RPParams> {
    let mut budget = Budget { total: MAX_ATTEMPTS, attempt: RESTART_AFTER };
    loop {
        budget.attempt = RESTART_AFTER;
        match draw_balanced_attempt(s, q, m, w_mode, &mut budget) {
            Ok(p) => return p,
            Err(Stop::Restart) => continue,
            Err(Stop::Exhausted) => return Err(QError::SamplerExhausted { attempts: MAX_ATTEMPTS }),
        }
    }
}

fn draw_balanced_attempt(
    s: &mut Sampler,
    q: Nome,
    m: usize,
    w_mode: bool,
    budget: &mut Budget,
) -> std::result::Result<Result<RPParams>, Stop> {
    let n = m + 3;
    let margin = s.margin();
    let (lo, hi) = s.cfg.magnitude_range;
    let qv = q.value();
    let in_range = |v: Scalar| v.norm() >= lo / 2.0 && v.norm() <= hi * 2.0;
    let complex = !w_mode;
    let cap = if w_mode { W_Z_CAP.min(s.cfg.z_cap) } else { s.cfg.z_cap };

    let b1 = if w_mode { re(s.uniform(0.5 * (lo + hi), hi)) } else { s.param(complex) };
    let mut a: Vec<Scalar> = Vec::with_capacity(n);
    while a.len() < n {
        let i = a.len();
        let v = if i == 2 || (w_mode && i == 1) {
            let r = s.uniform(0.1, cap);
            let ph = if complex && !s.cfg.real_only { s.uniform(-0.6, 0.6) } else { 0.0 };
            b1 * Scalar::from_polar(r, ph)
        } else {
            s.param(complex)
        };
        let mut ok = in_range(v)
            && off_lattice(q, v / b1, margin)
            && a.iter().all(|&w| off_lattice(q, v / w, margin));
        if ok && w_mode {
            a.push(v);
            ok = w_a_guards(q, &a, b1, margin);
            a.pop();
        }
        if ok {
            a.push(v);
        } else {
            budget.spend()?;
        }
    }

    let b_ok = |v: Scalar| -> bool {
        in_range(v)
            && a.iter().all(|&ai| off_lattice(q, ai / v, margin))
            && (!w_mode || w_b_guard(q, &a, b1, v, margin))
    };
    // b_2..b_{M+3} are first scaled by the common factor that restores the
    // balance; failing b_j are then nudged by factors in (e^-0.7, e^0.7) and
    // b_{M+3} is re-solved until it passes as well
    let prod_a = a.iter().product::<Scalar>();
    let raw: Vec<Scalar> = (1..n).map(|_| s.param(complex)).collect();
    let mu = (prod_a / (qv * qv * b1 * raw.iter().product::<Scalar>())).powf(1.0 / (n - 1) as f64);
    let mut b: Vec<Scalar> = std::iter::once(b1).chain(raw.iter().map(|&v| v * mu)).collect();
    for j in 1..n - 1 {
        while !b_ok(b[j]) {
            budget.spend()?;
            b[j] *= s.uniform(-0.7, 0.7).exp();
        }
    }
    loop {
        b[n - 1] = prod_a / (qv * qv * b[..n - 1].iter().product::<Scalar>());
        if b_ok(b[n - 1]) {
            break;
        }
        budget.spend()?;
        let j = 1 + (s.uniform(0.0, (n - 2) as f64) as usize).min(n - 3);
        loop {
            let v = b[j] * s.uniform(-0.7, 0.7).exp();
            if b_ok(v) {
                b[j] = v;
                break;
            }
            budget.spend()?;
        }
    }
    debug_assert!(rp_guards(q, &a, &b, margin));
    debug_assert!(!w_mode || w_guards(q, &a, &b, margin));
    Ok(RPParams::new(a, b, q))
}

/// Balanced Riemann-Papperitz parameters with theta and lattice guards.
pub fn sample_params(cfg: &SampleConfig, trial: u64) -> Result<(Nome, RPParams)> {
    cfg.validate()?;
    let mut s = Sampler::new(cfg, trial);
    let q = s.nome();
    draw_balanced(&mut s, q, cfg.m, false).map(|p| (q, p))
}

/// Real balanced parameters with the extra guards needed by the `W` series
/// of every permutation used in the linear relation.
pub fn sample_w_params(cfg: &SampleConfig, trial: u64) -> Result<(Nome, RPParams)> {
    cfg.validate()?;
    let real = SampleConfig { real_only: true, ..cfg.clone() };
    let mut s = Sampler::new(&real, trial);
    let q = s.nome();
    draw_balanced(&mut s, q, cfg.m, true).map(|p| (q, p))
}

/// `E_M` data with a base point: balanced parameters split as `a_1 = A x`,
/// `b_1 = B x` with `x` uniform in `(0.5, 1.5)`.
pub fn sample_em(cfg: &SampleConfig, trial: u64) -> Result<(Nome, EmOperator, Scalar)> {
    let real = SampleConfig { real_only: true, ..cfg.clone() };
    let (q, p) = sample_params(&real, trial)?;
    let mut s = Sampler::new(&real, trial ^ 0x5eed_0000_0000_0001);
    let x = re(s.uniform(0.5, 1.5));
    Ok((q, EmOperator::from_rp(&p, x, q)?, x))
}

/// Jordan-Pochhammer parameters with `alpha` in `(0.3, 2)` and `rho` in
/// `(0.2, 3)`; the `b_j` are rescaled by a common factor to realise `rho`.
pub fn sample_jp(cfg: &SampleConfig, trial: u64) -> Result<(Nome, JPParams)> {
    cfg.validate()?;
    let real = SampleConfig { real_only: true, ..cfg.clone() };
    let mut s = Sampler::new(&real, trial);
    let q = s.nome();
    let n = cfg.m + 3;
    let margin = real.pole_margin;
    let (lo, hi) = real.magnitude_range;
    retry(|_| {
        let a: Vec<Scalar> = (0..n).map(|_| s.param(false)).collect();
        let b: Vec<Scalar> = (0..n).map(|_| s.param(false)).collect();
        let alpha = re(s.uniform(0.3, 2.0));
        let rho = re(s.uniform(0.2, 3.0));
        let target = a.iter().product::<Scalar>() / (b.iter().product::<Scalar>() * q.powc(alpha + rho));
        let mu = target.powf(1.0 / n as f64);
        let b: Vec<Scalar> = b.iter().map(|&v| v * mu).collect();
        if b.iter().any(|v| !(v.norm() >= lo / 2.0 && v.norm() <= hi * 2.0)) || !rp_guards(q, &a, &b, margin) {
            return None;
        }
        JPParams::new(a, b, alpha, q).ok()
    })
    .map(|p| (q, p))
}

/// Parameters of the degree-three operator obtained from balanced `M = 1`
/// data: `x = b_1`, `A = a_1/b_1`, `B = 1`, `t_i` uniform in `(0.5, 2)`,
/// `alpha` uniform in `(-1, 1)`.
pub fn sample_h3(cfg: &SampleConfig, trial: u64) -> Result<(Nome, H3Params)> {
    let real = SampleConfig { real_only: true, m: 1, ..cfg.clone() };
    let (q, p) = sample_params(&real, trial)?;
    let mut s = Sampler::new(&real, trial ^ 0x5eed_0000_0000_0002);
    let x = p.b[0];
    let op = EmOperator::from_rp(&p, x, q)?;
    let t = [0; 3].map(|_| re(s.uniform(0.5, 2.0)));
    let alpha = re(s.uniform(-1.0, 1.0));
    let hp = rp_to_h3(&H3Map { op, x }, alpha, t, q)?;
    Ok((q, hp))
}

/// Heine parameters: `alpha, beta, gamma` in `(0.2, 2.5)` with
/// `beta - gamma + 1 > 0.2`, `x` in `(0.2, 0.9)`.
pub fn sample_heine(cfg: &SampleConfig, trial: u64) -> Result<(Nome, HeineParams)> {
    cfg.validate()?;
    let mut s = Sampler::new(cfg, trial);
    let q = s.nome();
    let margin = cfg.pole_margin;
    retry(|_| {
        let (al, be, ga) = (s.uniform(0.2, 2.5), s.uniform(0.2, 2.5), s.uniform(0.2, 2.5));
        let x = re(s.uniform(0.2, 0.9));
        if be - ga + 1.0 <= 0.2 {
            return None;
        }
        let hp = HeineParams::from_exponents(re(al), re(be), re(ga), x, q).ok()?;
        let qv = q.value();
        let (a, b, c) = (hp.a, hp.b, hp.c);
        let guarded = [b / a, x, c / a, qv * c / (a * b * x), qv / b, a * x, b * x, c / b, b];
        guarded.iter().all(|&z| off_lattice(q, z, margin)).then_some(hp)
    })
    .map(|hp| (q, hp))
}

/// Six parameters in `(0.3, 2.5)` with `|q^2 a^2/(bcdef)| <= z_cap` and every
/// monomial entering a denominator of the three-term relations off the lattice.
pub fn sample_w87(cfg: &SampleConfig, trial: u64) -> Result<(Nome, W87Params)> {
    cfg.validate()?;
    let mut s = Sampler::new(cfg, trial);
    let q = s.nome();
    let margin = cfg.pole_margin;
    retry(|_| {
        let v: Vec<Scalar> = (0..6).map(|_| re(s.uniform(0.3, 2.5))).collect();
        let p = W87Params { a: v[0], b: v[1], c: v[2], d: v[3], e: v[4], f: v[5] };
        if p.z(q).norm() > cfg.z_cap {
            return None;
        }
        w87_monomials(&p).iter().all(|&z| off_lattice(q, z, margin)).then_some(p)
    })
    .map(|p| (q, p))
}

fn w87_monomials(p: &W87Params) -> Vec<Scalar> {
    let W87Params { a, b, c, d, e, f } = *p;
    let mut out = vec![a, b, c, b / a, c / a, b / c, b * c / a, b * b / a, c * c / a];
    for eta in [d, e, f] {
        out.extend([eta, eta / a, b * eta / a, c * eta / a, b / eta, c / eta]);
    }
    out.extend([b * d * e * f / (a * a), c * d * e * f / (a * a), a / (b * f), a / (c * f)]);
    out
}

/// Bailey parameters: `a, b, c, e, f, g` in `(0.3, 2.5)`, `h` with
/// `|a h| < z_cap`, and `d = a b e f g h / c`.
pub fn sample_bailey(cfg: &SampleConfig, trial: u64) -> Result<(Nome, BaileyParams)> {
    cfg.validate()?;
    let mut s = Sampler::new(cfg, trial);
    let q = s.nome();
    let margin = cfg.pole_margin;
    retry(|_| {
        let v: Vec<Scalar> = (0..6).map(|_| re(s.uniform(0.3, 2.5))).collect();
        let (a, b, c, e, f, g) = (v[0], v[1], v[2], v[3], v[4], v[5]);
        let h = re(s.uniform(0.05, cfg.z_cap)) / a;
        let d = a * b * e * f * g * h / c;
        let p = BaileyParams { a, b, c, d, e, f, g, h };
        let qv = q.value();
        let cd = c * d;
        let guarded = [
            a * e, a * f, a * g, a * h, b * e, b * f, b * g, b * h, a / b,
            b * cd / h, cd / (e * h), cd / (f * h), cd / (g * h), b * c, b * d,
            b * cd / (h * qv), c / h, d / h,
        ];
        guarded.iter().all(|&z| off_lattice(q, z, margin)).then_some(p)
    })
    .map(|p| (q, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_reproducible() {
        let cfg = SampleConfig { seed: 42, m: 2, ..Default::default() };
        assert_eq!(sample_params(&cfg, 3).unwrap(), sample_params(&cfg, 3).unwrap());
        assert_ne!(sample_params(&cfg, 3).unwrap().1, sample_params(&cfg, 4).unwrap().1);
    }

    #[test]
    fn sampled_params_are_balanced_and_guarded() {
        for trial in 0..20 {
            let cfg = SampleConfig { seed: 7, m: 3, ..Default::default() };
            let (q, p) = sample_params(&cfg, trial).unwrap();
            assert!(p.balance_residual(q) <= 1e-12);
            assert!(rp_guards(q, &p.a, &p.b, cfg.pole_margin));
            assert!((p.a[2] / p.b[0]).norm() <= cfg.z_cap);
        }
    }

    #[test]
    fn complex_sampling_produces_phases() {
        let cfg = SampleConfig { seed: 1, m: 1, real_only: false, ..Default::default() };
        let (q, p) = sample_params(&cfg, 0).unwrap();
        assert!(p.a.iter().any(|z| z.im != 0.0));
        assert!(p.balance_residual(q) <= 1e-12);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = SampleConfig { q_range: (0.2, 1.0), ..Default::default() };
        assert!(sample_params(&bad, 0).is_err());
        let bad = SampleConfig { pole_margin: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SampleConfig { m: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn impossible_constraints_exhaust_the_sampler() {
        let cfg = SampleConfig { magnitude_range: (1.0, 1.0), ..Default::default() };
        assert!(matches!(sample_params(&cfg, 0), Err(QError::SamplerExhausted { .. })));
    }

    #[test]
    fn family_samplers_succeed() {
        let cfg = SampleConfig { seed: 11, m: 2, ..Default::default() };
        sample_w_params(&cfg, 0).unwrap();
        sample_em(&cfg, 0).unwrap();
        sample_jp(&cfg, 0).unwrap();
        sample_h3(&cfg, 0).unwrap();
        sample_heine(&cfg, 0).unwrap();
        sample_w87(&cfg, 0).unwrap();
        let (_, bp) = sample_bailey(&cfg, 0).unwrap();
        bp.check().unwrap();
    }
}
