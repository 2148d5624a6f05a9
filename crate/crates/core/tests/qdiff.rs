use qconnect::identities::sampler::{sample_em, sample_h3, sample_heine, SampleConfig};
use qconnect::qcore::{re, Scalar};
use qconnect::qdiff::*;

fn cfg(seed: u64, m: usize) -> SampleConfig {
    SampleConfig { seed, m, ..SampleConfig::default() }
}

fn close(a: Scalar, b: Scalar, scale: f64, tol: f64) -> bool {
    (a - b).norm() <= tol * scale.max(a.norm()).max(b.norm())
}

// Smooth test functions on the lattice.
fn f1(x: Scalar) -> qconnect::Result<Scalar> {
    Ok(x * x + 0.3)
}

fn f2(x: Scalar) -> qconnect::Result<Scalar> {
    Ok((x * 0.7).exp())
}

#[test]
fn operators_are_linear() {
    let (alpha, beta) = (re(0.8), Scalar::new(-1.3, 0.4));
    let combo = move |x: Scalar| -> qconnect::Result<Scalar> { Ok(alpha * f1(x)? + beta * f2(x)?) };
    for trial in 0..3 {
        let (q, op, x) = sample_em(&cfg(1, 2), trial).unwrap();
        let lhs = op.apply(x, &combo, q).unwrap();
        let (a1, a2) = (op.apply(x, &f1, q).unwrap(), op.apply(x, &f2, q).unwrap());
        assert!(close(lhs.value, alpha * a1.value + beta * a2.value, lhs.scale, 1e-12));

        let (q, hp) = sample_h3(&cfg(1, 1), trial).unwrap();
        let lhs = h3_apply(&hp, &combo, q).unwrap();
        let rhs = alpha * h3_apply(&hp, &f1, q).unwrap() + beta * h3_apply(&hp, &f2, q).unwrap();
        let scale = h3_apply(&hp, &f1, q).unwrap().norm() + h3_apply(&hp, &f2, q).unwrap().norm();
        assert!(close(lhs, rhs, scale, 1e-12));

        let (q, hp) = sample_heine(&cfg(1, 1), trial).unwrap();
        let lhs = heine_apply(&hp, &combo, q).unwrap();
        let rhs = alpha * heine_apply(&hp, &f1, q).unwrap() + beta * heine_apply(&hp, &f2, q).unwrap();
        let scale = heine_apply(&hp, &f1, q).unwrap().norm() + heine_apply(&hp, &f2, q).unwrap().norm();
        assert!(close(lhs, rhs, scale, 1e-12));
    }
}

#[test]
fn h3_map_round_trips() {
    for trial in 0..10 {
        let (q, hp) = sample_h3(&cfg(3, 1), trial).unwrap();
        let map = h3_to_rp(&hp, q).unwrap();
        assert!(map.rp().balance_residual(q) <= 1e-12);
        let back = rp_to_h3(&map, hp.alpha, hp.t, q).unwrap();
        for i in 0..3 {
            assert!(close(back.h[i], hp.h[i], 1.0, 1e-12));
            assert!(close(back.l[i], hp.l[i], 1.0, 1e-12));
        }
        assert!(close(back.nu, hp.nu, 1.0, 1e-12));
        assert!(close(back.x, hp.x, 1.0, 1e-12));
    }
}

#[test]
fn em_operator_has_balanced_data() {
    for m in 1..=3 {
        let (q, op, _) = sample_em(&cfg(2, m), 0).unwrap();
        assert_eq!(op.m, m);
        assert!(op.balance_residual(q) <= 1e-12);
        let shifts = op.operator(re(1.1), q).shifts();
        assert_eq!(shifts.end() - shifts.start(), m as i32 + 1);
    }
}

#[test]
fn shift_polynomials_compose() {
    let p = ShiftPoly::linear(re(1.0), re(-2.0));
    let r = ShiftPoly::constant(re(3.0)).mul(&p).add(&p.shift(1));
    let (q, ..) = sample_em(&cfg(4, 1), 0).unwrap();
    let x = re(0.9);
    let direct = |x: Scalar| -> qconnect::Result<Scalar> { Ok(x) };
    let got = r.apply(x, &direct, q).unwrap().value;
    let qv = q.value();
    // 3 (y(x) - 2 y(qx)) + (y(qx) - 2 y(q^2 x)) for y(x) = x.
    let want = 3.0 * (x - 2.0 * qv * x) + (qv * x - 2.0 * qv * qv * x);
    assert!(close(got, want, 1.0, 1e-14));
}
