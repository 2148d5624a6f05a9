//! Identity checkers: coefficient constructors, residual checks, the
//! parameter sampler and the index of verifiable relations.

pub mod checks;
pub mod coeffs;
pub mod sampler;

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{QError, Result};
use crate::jackson::{JPParams, RPParams};
use crate::qcore::{Nome, Scalar, TruncationPolicy};
use crate::qdiff::{EmOperator, H3Params, HeineParams};
use crate::report::IdentityReport;
use crate::series::BaileyParams;
use coeffs::W87Params;
use sampler::SampleConfig;

/// Pass threshold on `rel_residual` unless overridden.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Every relation the suite can verify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    HeineConnection,
    Mimachi,
    RpConnection,
    WRelation,
    H3ThreeTerm,
    Cocycle,
    Bailey,
    W87ThreeTerm,
    GmThreeTerm,
    EmSolution,
    H3Solution,
    EmNonhomog,
    GmRecurrence,
    RankCheck,
    WIntegralConsistency,
}

/// The parameter family a relation is sampled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Rp,
    W,
    Em,
    Jp,
    H3,
    Heine,
    W87,
    Bailey,
}

impl RelationKind {
    pub const ALL: [RelationKind; 15] = [
        RelationKind::HeineConnection,
        RelationKind::Mimachi,
        RelationKind::RpConnection,
        RelationKind::WRelation,
        RelationKind::H3ThreeTerm,
        RelationKind::Cocycle,
        RelationKind::Bailey,
        RelationKind::W87ThreeTerm,
        RelationKind::GmThreeTerm,
        RelationKind::EmSolution,
        RelationKind::H3Solution,
        RelationKind::EmNonhomog,
        RelationKind::GmRecurrence,
        RelationKind::RankCheck,
        RelationKind::WIntegralConsistency,
    ];

    /// Command-line name, e.g. `rp-connection`.
    pub fn name(self) -> &'static str {
        use RelationKind::*;
        match self {
            HeineConnection => "heine-connection",
            Mimachi => "mimachi",
            RpConnection => "rp-connection",
            WRelation => "w-relation",
            H3ThreeTerm => "h3-three-term",
            Cocycle => "cocycle",
            Bailey => "bailey",
            W87ThreeTerm => "w87-three-term",
            GmThreeTerm => "gm-three-term",
            EmSolution => "em-solution",
            H3Solution => "h3-solution",
            EmNonhomog => "em-nonhomog",
            GmRecurrence => "gm-recurrence",
            RankCheck => "rank-check",
            WIntegralConsistency => "w-integral-consistency",
        }
    }

    /// One-line statement of the relation being checked.
    pub fn anchor(self) -> &'static str {
        use RelationKind::*;
        match self {
            HeineConnection => "Heine connection: int_0^1 = r1 int_0^{q/(bx)} + r2 x^{-beta} int_0^{c/a}",
            Mimachi => "Jordan-Pochhammer connection: theta(q^rho) int_0^{q b_1} = sum_k C_k int_0^{q/a_k}",
            RpConnection => "Riemann-Papperitz connection: sum_{k>=2} C~_k phi_{1,k} = 0 under a_1...a_{M+3} = q^2 b_1...b_{M+3}",
            WRelation => "connection formula for Kajihara-type W: sum_{k>=2} D_k W(a_1, a_k, ...; b) = 0",
            H3ThreeTerm => "H3 three-term relation: C_1 phi_{1,4} + C_2 phi_{2,4} + C_3 phi_{3,4} = 0",
            Cocycle => "cocycle: phi_{i,j} + phi_{j,k} + phi_{k,i} = 0",
            Bailey => "Bailey's Jackson integral evaluated as a very-well-poised 8W7",
            W87ThreeTerm => "three-term relation for 8W7 with theta-quotient coefficients",
            GmThreeTerm => "three-term relation for 8W7 with Gupta-Masson coefficients C(b, c)",
            EmSolution => "phi_{i,j} solves the homogeneous equation E_M y = 0",
            H3Solution => "E_1 y = 0 and H3 (x^{nu-alpha} y) = 0 under the H3 to E_1 parameter map",
            EmNonhomog => "int_0^{tau} solves the non-homogeneous equation E_M y = rhs",
            GmRecurrence => "Gupta-Masson three-term recurrence for Y_n built from phi",
            RankCheck => "the 4x6 matrix of cocycle and three-term relations has rank 4 and annihilates the phi vector",
            WIntegralConsistency => "W({a}; {b}) = -phi_{1,2} / (q (1-q) (q)_inf)",
        }
    }

    pub fn family(self) -> Family {
        use RelationKind::*;
        match self {
            RpConnection | Cocycle => Family::Rp,
            WRelation | WIntegralConsistency => Family::W,
            EmSolution | EmNonhomog | GmRecurrence => Family::Em,
            Mimachi => Family::Jp,
            H3ThreeTerm | H3Solution | RankCheck => Family::H3,
            HeineConnection => Family::Heine,
            W87ThreeTerm | GmThreeTerm => Family::W87,
            Bailey => Family::Bailey,
        }
    }

    /// Admissible values of `M`, or `None` when the relation has no `M`.
    pub fn m_range(self) -> Option<RangeInclusive<usize>> {
        use RelationKind::*;
        match self {
            RpConnection | Cocycle => Some(1..=6),
            WRelation | WIntegralConsistency => Some(1..=3),
            EmSolution | EmNonhomog => Some(1..=3),
            Mimachi => Some(1..=3),
            _ => None,
        }
    }

    /// Whether non-real parameters are unambiguous for this relation.
    pub fn allows_complex(self) -> bool {
        matches!(self, RelationKind::RpConnection | RelationKind::Cocycle | RelationKind::Bailey)
    }

    /// Default pass threshold on `rel_residual`.
    pub fn default_tol(self) -> f64 {
        DEFAULT_TOL
    }

    /// Resolves the `M` a suite should use for a requested value.
    pub fn effective_m(self, requested: usize) -> Result<usize> {
        match self.m_range() {
            None => Ok(1),
            Some(r) if r.contains(&requested) => Ok(requested),
            Some(r) => Err(QError::InvalidParams(format!(
                "{} supports M in {}..={}, got {requested}",
                self.name(),
                r.start(),
                r.end()
            ))),
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelationKind {
    type Err = QError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('_', "-");
        RelationKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| QError::InvalidParams(format!("unknown relation '{s}'")))
    }
}

/// A sampled parameter set, tagged by family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Instance {
    Rp { q: Nome, params: RPParams },
    Em { q: Nome, op: EmOperator, x: Scalar },
    Jp { q: Nome, params: JPParams },
    H3 { q: Nome, params: H3Params },
    Heine { q: Nome, params: HeineParams },
    W87 { q: Nome, params: W87Params },
    Bailey { q: Nome, params: BaileyParams },
}

impl Instance {
    pub fn q(&self) -> Nome {
        match self {
            Instance::Rp { q, .. }
            | Instance::Em { q, .. }
            | Instance::Jp { q, .. }
            | Instance::H3 { q, .. }
            | Instance::Heine { q, .. }
            | Instance::W87 { q, .. }
            | Instance::Bailey { q, .. } => *q,
        }
    }
}

/// Draws trial `trial` of the family behind `kind`.
pub fn sample_instance(kind: RelationKind, cfg: &SampleConfig, trial: u64) -> Result<Instance> {
    if !cfg.real_only && !kind.allows_complex() {
        return Err(QError::InvalidParams(format!("{} is only checked for real parameters", kind.name())));
    }
    let mut cfg = cfg.clone();
    cfg.m = kind.effective_m(cfg.m)?;
    Ok(match kind.family() {
        Family::Rp => {
            let (q, params) = sampler::sample_params(&cfg, trial)?;
            Instance::Rp { q, params }
        }
        Family::W => {
            let (q, params) = sampler::sample_w_params(&cfg, trial)?;
            Instance::Rp { q, params }
        }
        Family::Em => {
            let (q, op, x) = sampler::sample_em(&cfg, trial)?;
            Instance::Em { q, op, x }
        }
        Family::Jp => {
            let (q, params) = sampler::sample_jp(&cfg, trial)?;
            Instance::Jp { q, params }
        }
        Family::H3 => {
            let (q, params) = sampler::sample_h3(&cfg, trial)?;
            Instance::H3 { q, params }
        }
        Family::Heine => {
            let (q, params) = sampler::sample_heine(&cfg, trial)?;
            Instance::Heine { q, params }
        }
        Family::W87 => {
            let (q, params) = sampler::sample_w87(&cfg, trial)?;
            Instance::W87 { q, params }
        }
        Family::Bailey => {
            let (q, params) = sampler::sample_bailey(&cfg, trial)?;
            Instance::Bailey { q, params }
        }
    })
}

fn run_check(kind: RelationKind, inst: &Instance, pol: &TruncationPolicy, tol: f64) -> Result<IdentityReport> {
    use RelationKind::*;
    let mismatch = || QError::InvalidParams(format!("instance family does not fit {}", kind.name()));
    match (kind, inst) {
        (RpConnection, Instance::Rp { q, params }) => checks::check_rp_connection(params, *q, pol, tol),
        (Cocycle, Instance::Rp { q, params }) => checks::check_cocycle(params, *q, pol, tol),
        (WRelation, Instance::Rp { q, params }) => {
            let report = checks::check_w_relation(params, *q, pol, tol)?;
            let gap = checks::coefficient_agreement(params, *q, pol)?;
            Ok(report.with_note(format!("max relative gap between C~_k and D_k: {gap:.3e}")))
        }
        (WIntegralConsistency, Instance::Rp { q, params }) => checks::check_w_integral_consistency(params, *q, pol, tol),
        (Mimachi, Instance::Jp { q, params }) => checks::check_mimachi(params, *q, pol, tol),
        (EmSolution, Instance::Em { q, op, x }) => checks::check_em_solution(op, *x, *q, pol, tol),
        (EmNonhomog, Instance::Em { q, op, x }) => checks::check_em_nonhomog(op, *x, *q, pol, tol),
        (GmRecurrence, Instance::Em { q, op, x }) => checks::check_gm_recurrence(op, *x, *q, pol, tol),
        (H3ThreeTerm, Instance::H3 { q, params }) => checks::check_h3_three_term(params, *q, pol, tol),
        (H3Solution, Instance::H3 { q, params }) => checks::check_h3_solution(params, *q, pol, tol),
        (RankCheck, Instance::H3 { q, params }) => Ok(checks::check_rank(params, *q, pol, tol)?.report),
        (HeineConnection, Instance::Heine { q, params }) => checks::check_heine_connection(params, *q, pol, tol),
        (W87ThreeTerm, Instance::W87 { q, params }) => checks::check_w87_three_term(params, *q, pol, tol),
        (GmThreeTerm, Instance::W87 { q, params }) => checks::check_gm_three_term(params, *q, pol, tol),
        (Bailey, Instance::Bailey { q, params }) => checks::check_bailey(params, *q, pol, tol),
        _ => Err(mismatch()),
    }
}

/// Runs the checker for `kind`; errors become reports with status `error`.
pub fn check(kind: RelationKind, inst: &Instance, pol: &TruncationPolicy, tol: f64) -> IdentityReport {
    run_check(kind, inst, pol, tol).unwrap_or_else(|e| IdentityReport::from_error(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in RelationKind::ALL {
            assert_eq!(k.name().parse::<RelationKind>().unwrap(), k);
        }
        assert_eq!("rp_connection".parse::<RelationKind>().unwrap(), RelationKind::RpConnection);
        assert!("nope".parse::<RelationKind>().is_err());
    }

    #[test]
    fn unsupported_m_is_rejected() {
        assert!(RelationKind::WRelation.effective_m(4).is_err());
        assert_eq!(RelationKind::Bailey.effective_m(5).unwrap(), 1);
    }

    #[test]
    fn complex_only_where_allowed() {
        let cfg = SampleConfig { real_only: false, ..SampleConfig::default() };
        assert!(sample_instance(RelationKind::Mimachi, &cfg, 0).is_err());
        assert!(sample_instance(RelationKind::Cocycle, &cfg, 0).is_ok());
    }

    #[test]
    fn every_relation_passes_one_default_trial() {
        let pol = TruncationPolicy::default();
        for k in RelationKind::ALL {
            let inst = sample_instance(k, &SampleConfig::default(), 0).unwrap();
            let r = check(k, &inst, &pol, k.default_tol());
            assert!(r.passed(), "{}: {:?}", k.name(), r);
        }
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = sample_instance(RelationKind::EmSolution, &SampleConfig::default(), 3).unwrap();
        let s = serde_json::to_string(&inst).unwrap();
        let back: Instance = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }
}
