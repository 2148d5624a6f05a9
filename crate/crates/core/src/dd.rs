//! Complex double-double arithmetic for sums that cancel badly in `f64`.

use std::ops::{Add, Div, Mul, Sub};

use num_complex::Complex;
use twofloat::TwoFloat;

use crate::error::{QError, Result};
use crate::qcore::{re, Scalar};

/// Relative size at which double-double sums and products stop.
pub(crate) const DD_TOL: f64 = 1e-31;

/// Absolute sums exceeding the value by this factor trigger recomputation
/// in double-double arithmetic.
pub(crate) const CANCELLATION_RATIO: f64 = 32.0;

/// Complex double-double number. Division goes through [`recip`] because
/// `TwoFloat`'s own division is only accurate to about `f64` precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Cdd(Complex<TwoFloat>);

/// `1/y` to double-double precision: one Newton step from the `f64` reciprocal.
fn recip(y: TwoFloat) -> TwoFloat {
    let r0 = TwoFloat::from(1.0 / y.hi());
    let e = TwoFloat::from(1.0) - y * r0;
    r0 + r0 * e
}

impl Add for Cdd {
    type Output = Cdd;
    fn add(self, o: Cdd) -> Cdd {
        Cdd(self.0 + o.0)
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    fn sub(self, o: Cdd) -> Cdd {
        Cdd(self.0 - o.0)
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    fn mul(self, o: Cdd) -> Cdd {
        Cdd(self.0 * o.0)
    }
}

impl Div for Cdd {
    type Output = Cdd;
    fn div(self, o: Cdd) -> Cdd {
        let (a, b) = (self.0, o.0);
        let inv = recip(b.re * b.re + b.im * b.im);
        Cdd(Complex::new((a.re * b.re + a.im * b.im) * inv, (a.im * b.re - a.re * b.im) * inv))
    }
}

pub(crate) fn dd(z: Scalar) -> Cdd {
    Cdd(Complex::new(TwoFloat::from(z.re), TwoFloat::from(z.im)))
}

pub(crate) fn undd(z: Cdd) -> Scalar {
    Scalar::new(f64::from(z.0.re), f64::from(z.0.im))
}

pub(crate) fn dd_norm(z: Cdd) -> f64 {
    z.0.re.hi().hypot(z.0.im.hi())
}

/// `(a)_inf` in double-double arithmetic; `qabs = |q|`.
pub(crate) fn qpoch_inf_dd(a: Cdd, q: Cdd, qabs: f64, max_terms: usize) -> Result<Cdd> {
    let one = dd(re(1.0));
    let mut r = one;
    let mut t = a;
    for _ in 0..max_terms {
        if dd_norm(t) <= DD_TOL * (1.0 - qabs) {
            return Ok(r);
        }
        r = r * (one - t);
        t = t * q;
    }
    Err(QError::TruncationExceeded { context: "qpoch_inf (double-double)", max_terms })
}

/// Complex field arithmetic shared by the `f64` and double-double paths.
pub(crate) trait Field:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn from_scalar(z: Scalar) -> Self;
    fn to_scalar(self) -> Scalar;
    fn mag(self) -> f64;
}

impl Field for Scalar {
    fn from_scalar(z: Scalar) -> Self {
        z
    }
    fn to_scalar(self) -> Scalar {
        self
    }
    fn mag(self) -> f64 {
        self.norm()
    }
}

impl Field for Cdd {
    fn from_scalar(z: Scalar) -> Self {
        dd(z)
    }
    fn to_scalar(self) -> Scalar {
        undd(self)
    }
    fn mag(self) -> f64 {
        dd_norm(self)
    }
}
