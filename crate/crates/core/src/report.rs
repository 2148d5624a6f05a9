//! Outcome of a single identity check.

use serde::{Deserialize, Serialize};

use crate::error::QError;
use crate::qcore::{re, Scalar};

/// Serializes non-finite floats as `null` and reads `null` back as NaN, so
/// reports of failed evaluations survive a JSON round trip.
pub mod nullable_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// `lhs` and `rhs` of a relation together with its residual. `scale` is the
/// sum of magnitudes of the individual summands, so `rel_residual` measures
/// the residual against the size of the terms that cancel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lhs: Scalar,
    pub rhs: Scalar,
    pub scale: f64,
    #[serde(with = "nullable_f64")]
    pub abs_residual: f64,
    #[serde(with = "nullable_f64")]
    pub rel_residual: f64,
    pub status: Status,
    pub terms_used: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl IdentityReport {
    /// Compares `lhs` with `rhs`; passes when `rel_residual <= tol`.
    pub fn compare(lhs: Scalar, rhs: Scalar, scale: f64, terms_used: usize, tol: f64) -> Self {
        let abs_residual = (lhs - rhs).norm();
        let rel_residual = if scale > 0.0 {
            abs_residual / scale
        } else if abs_residual == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let status = if rel_residual <= tol { Status::Pass } else { Status::Fail };
        IdentityReport {
            lhs,
            rhs,
            scale,
            abs_residual,
            rel_residual,
            status,
            terms_used,
            error: None,
            notes: Vec::new(),
        }
    }

    /// Report for a sum of terms that should vanish.
    pub fn vanishing(terms: &[Scalar], tol: f64) -> Self {
        let lhs: Scalar = terms.iter().sum();
        let scale = terms.iter().map(|t| t.norm()).sum();
        Self::compare(lhs, re(0.0), scale, terms.len(), tol)
    }

    pub fn from_error(err: &QError) -> Self {
        IdentityReport {
            lhs: re(0.0),
            rhs: re(0.0),
            scale: 0.0,
            abs_residual: f64::NAN,
            rel_residual: f64::NAN,
            status: Status::Error,
            terms_used: 0,
            error: Some(err.to_string()),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Re-judges the report against a different tolerance.
    pub fn with_tol(mut self, tol: f64) -> Self {
        if self.status != Status::Error {
            self.status = if self.rel_residual <= tol { Status::Pass } else { Status::Fail };
        }
        self
    }

    /// Keeps whichever of two reports has the larger relative residual;
    /// errors dominate.
    pub fn worst(self, other: Self) -> Self {
        match (self.status, other.status) {
            (Status::Error, _) => self,
            (_, Status::Error) => other,
            _ if other.rel_residual > self.rel_residual => other,
            _ => self,
        }
    }

    /// Folds per-case reports into a single worst-case report, summing `terms_used`.
    pub fn combine(reports: impl IntoIterator<Item = IdentityReport>) -> Option<Self> {
        let mut total = 0;
        let mut acc: Option<IdentityReport> = None;
        for r in reports {
            total += r.terms_used;
            acc = Some(match acc {
                None => r,
                Some(a) => a.worst(r),
            });
        }
        acc.map(|mut r| {
            r.terms_used = total;
            r
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_residual_uses_scale() {
        let r = IdentityReport::compare(re(1.0), re(1.0 + 1e-10), 2.0, 2, 1e-8);
        assert!(r.passed());
        assert!((r.rel_residual - r.abs_residual / 2.0).abs() < 1e-25);
        let f = IdentityReport::compare(re(1.0), re(1.1), 1.0, 2, 1e-8);
        assert_eq!(f.status, Status::Fail);
    }

    #[test]
    fn zero_scale_cases() {
        assert!(IdentityReport::compare(re(0.0), re(0.0), 0.0, 0, 1e-8).passed());
        let r = IdentityReport::compare(re(1.0), re(0.0), 0.0, 1, 1e-8);
        assert!(r.rel_residual.is_infinite());
    }

    #[test]
    fn worst_prefers_errors_then_larger_residuals() {
        let good = IdentityReport::vanishing(&[re(1.0), re(-1.0)], 1e-8);
        let bad = IdentityReport::vanishing(&[re(1.0), re(-0.9)], 1e-8);
        let err = IdentityReport::from_error(&QError::Domain("x".into()));
        assert_eq!(good.clone().worst(bad.clone()), bad);
        assert_eq!(bad.clone().worst(err.clone()).status, Status::Error);
        let all = IdentityReport::combine(vec![good, bad]).unwrap();
        assert_eq!(all.terms_used, 4);
        assert_eq!(all.status, Status::Fail);
    }
}
