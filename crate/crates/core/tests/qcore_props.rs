use num_complex::Complex64 as C;
use proptest::prelude::*;
use qconnect::qcore::*;

fn rel(a: Scalar, b: Scalar) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

fn pol() -> TruncationPolicy {
    TruncationPolicy::default()
}

fn nome() -> impl Strategy<Value = Nome> {
    (0.2f64..0.8, -0.6f64..0.6).prop_map(|(r, arg)| Nome::new(C::from_polar(r, arg)).unwrap())
}

fn point(lo: f64, hi: f64) -> impl Strategy<Value = Scalar> {
    (lo..hi, -3.1f64..3.1).prop_map(|(r, arg)| C::from_polar(r, arg))
}

#[test]
fn qpoch_inf_matches_long_product() {
    let q = Nome::real(0.5).unwrap();
    let direct = (0..200).fold(1.0, |p, i| p * (1.0 - 0.3 * 0.5f64.powi(i)));
    assert!(rel(qpoch_inf(re(0.3), q, &pol()).unwrap(), re(direct)) <= 1e-13);
}

#[test]
fn finite_pochhammer_is_a_ratio_of_infinite_ones() {
    let q = Nome::real(0.5).unwrap();
    let ratio = qpoch_inf(re(0.3), q, &pol()).unwrap() / qpoch_inf(re(0.3 * 0.5f64.powi(5)), q, &pol()).unwrap();
    assert!(rel(qpoch_fin(re(0.3), q, 5), ratio) <= 1e-12);
}

#[test]
fn multi_pochhammer_factorises() {
    let q = Nome::real(0.5).unwrap();
    let m = qpoch_multi(&[re(0.2), re(0.4)], q, PochLength::Infinite, &pol()).unwrap();
    let f = qpoch_inf(re(0.2), q, &pol()).unwrap() * qpoch_inf(re(0.4), q, &pol()).unwrap();
    assert!(rel(m, f) <= 1e-13);
    let q = Nome::real(0.4).unwrap();
    let t = theta_multi(&[re(0.3), re(0.7)], q, &pol()).unwrap();
    let f = theta(re(0.3), q, &pol()).unwrap() * theta(re(0.7), q, &pol()).unwrap();
    assert!(rel(t, f) <= 1e-13);
}

#[test]
fn theta_vanishes_on_the_lattice() {
    let q = Nome::real(0.45).unwrap();
    for n in -3..=3 {
        assert!(theta(q.powi(n), q, &pol()).unwrap().norm() < 1e-12);
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(Nome::real(1.0).is_err());
    assert!(Nome::real(0.0).is_err());
    assert!(theta(re(0.0), Nome::real(0.5).unwrap(), &pol()).is_err());
    assert!(TruncationPolicy::new(0.0, 10, 10).is_err());
    assert!(principal_power(re(0.0), re(0.5)).is_err());
    assert!((principal_power(re(4.0), re(0.5)).unwrap() - re(2.0)).norm() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn pochhammer_recurrence(q in nome(), a in point(0.0, 10.0)) {
        let lhs = qpoch_inf(a, q, &pol()).unwrap();
        let rhs = (1.0 - a) * qpoch_inf(a * q.value(), q, &pol()).unwrap();
        prop_assert!(rel(lhs, rhs) <= 1e-12);
    }

    #[test]
    fn theta_quasi_periodicity(q in nome(), x in point(0.5, 2.0), n in -3i32..=3) {
        let lhs = theta(x * q.powi(n), q, &pol()).unwrap();
        let rhs = (-x).powi(-n) * q.powi(-n * (n - 1) / 2) * theta(x, q, &pol()).unwrap();
        prop_assert!(rel(lhs, rhs) <= 1e-10);
    }

    #[test]
    fn theta_inversion(q in nome(), x in point(0.5, 2.0)) {
        let lhs = theta(1.0 / x, q, &pol()).unwrap();
        let rhs = -theta(x, q, &pol()).unwrap() / x;
        prop_assert!(rel(lhs, rhs) <= 1e-10);
    }

    #[test]
    fn elementary_symmetric_generating_function(xs in prop::collection::vec(point(0.1, 2.0), 1..6), t in point(0.1, 2.0)) {
        let prod = xs.iter().fold(re(1.0), |p, &x| p * (1.0 + x * t));
        let sum = (0..=xs.len()).fold(re(0.0), |s, k| s + elem_sym(k, &xs) * t.powi(k as i32));
        prop_assert!(rel(prod, sum) <= 1e-12);
    }

    #[test]
    fn finite_products_telescope(q in nome(), a in point(0.1, 3.0), l in 0usize..20, k in 0usize..20) {
        let lhs = qpoch_fin(a, q, l + k);
        let rhs = qpoch_fin(a, q, l) * qpoch_fin(a * q.powi(l as i32), q, k);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(rhs.norm()).max(1e-300));
    }
}
