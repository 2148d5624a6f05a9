use proptest::prelude::*;
use qconnect::identities::checks::*;
use qconnect::identities::sampler::*;
use qconnect::identities::{check, sample_instance, Instance, RelationKind};
use qconnect::{QError, Status, TruncationPolicy};

fn pol() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn cfg(seed: u64, m: usize) -> SampleConfig {
    SampleConfig { seed, m, ..SampleConfig::default() }
}

#[test]
fn hundred_seeds_never_exhaust_the_sampler() {
    for seed in 0..100 {
        for kind in RelationKind::ALL {
            let m = kind.m_range().map_or(1, |r| *r.end());
            if let Err(e) = sample_instance(kind, &cfg(seed, m), 0) {
                panic!("{} seed {seed}: {e}", kind.name());
            }
        }
    }
}

#[test]
fn sampling_is_deterministic() {
    for kind in RelationKind::ALL {
        let a = sample_instance(kind, &cfg(9, 1), 4).unwrap();
        let b = sample_instance(kind, &cfg(9, 1), 4).unwrap();
        let c = sample_instance(kind, &cfg(9, 1), 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}

#[test]
fn instances_round_trip_byte_for_byte() {
    for kind in RelationKind::ALL {
        let inst = sample_instance(kind, &cfg(2, 1), 1).unwrap();
        let text = serde_json::to_string(&inst).unwrap();
        let back: Instance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}

#[test]
fn complex_parameters_where_supported() {
    let c = SampleConfig { real_only: false, ..cfg(4, 2) };
    for kind in [RelationKind::RpConnection, RelationKind::Cocycle, RelationKind::Bailey] {
        for trial in 0..10 {
            let inst = sample_instance(kind, &c, trial).unwrap();
            let r = check(kind, &inst, &pol(), kind.default_tol());
            assert!(r.passed(), "{} trial {trial}: {r:?}", kind.name());
        }
    }
}

#[test]
fn broken_balance_is_detected() {
    for m in 1..=3 {
        for trial in 0..10 {
            let (q, p) = sample_params(&cfg(5, m), trial).unwrap();
            let r = check_rp_connection(&perturb_balance(&p, 1e-3), q, &pol(), 1e-8).unwrap();
            assert_eq!(r.status, Status::Fail, "M={m} trial {trial}: {r:?}");
        }
    }
}

#[test]
fn key_lemma_and_coefficient_agreement() {
    for m in 1..=3 {
        for trial in 0..10 {
            let (q, p) = sample_w_params(&cfg(6, m), trial).unwrap();
            assert!(check_key_lemma(&p, q, &pol(), 1e-10).unwrap().passed());
            assert!(coefficient_agreement(&p, q, &pol()).unwrap() <= 1e-11);
        }
    }
}

#[test]
fn heine_integrals_solve_the_equation() {
    for trial in 0..10 {
        let (q, hp) = sample_heine(&cfg(7, 1), trial).unwrap();
        assert!(check_heine_solutions(&hp, q, &pol(), 1e-10).unwrap().passed());
    }
}

#[test]
fn rank_is_four() {
    for trial in 0..10 {
        let (q, hp) = sample_h3(&cfg(8, 1), trial).unwrap();
        let out = check_rank(&hp, q, &pol(), 1e-8).unwrap();
        assert_eq!(out.rank, 4);
        assert_eq!(out.singular_values.len(), 4);
        assert!(out.report.passed());
    }
}

#[test]
fn mismatched_family_reports_an_error() {
    let inst = sample_instance(RelationKind::Bailey, &cfg(0, 1), 0).unwrap();
    let r = check(RelationKind::RpConnection, &inst, &pol(), 1e-8);
    assert_eq!(r.status, Status::Error);
    assert!(r.rel_residual.is_nan());
}

#[test]
fn invalid_sampler_configs() {
    let bad = SampleConfig { q_range: (0.5, 1.2), ..SampleConfig::default() };
    assert!(matches!(bad.validate(), Err(QError::InvalidParams(_))));
    assert!(RelationKind::WRelation.effective_m(4).is_err());
}

fn kind() -> impl Strategy<Value = RelationKind> {
    prop::sample::select(RelationKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_relation_holds(kind in kind(), m in 1usize..=3, trial in 0u64..10_000) {
        let m = kind.effective_m(m).unwrap();
        let inst = sample_instance(kind, &cfg(21, m), trial).unwrap();
        let r = check(kind, &inst, &pol(), kind.default_tol());
        prop_assert!(r.passed(), "{} M={m} trial {trial}: {r:?}", kind.name());
    }
}
