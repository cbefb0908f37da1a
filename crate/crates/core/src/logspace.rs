//! Extended-range complex numbers stored as `(log |z|, arg z)`, plus the
//! compensated accumulator used for every long sum in the crate.
//!
//! Magnitudes such as `exp(10^6)` or `exp(-10^6)` are routine here, so no
//! value is ever materialized in Cartesian form unless it is known to be
//! representable.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

/// Wraps an angle into the principal interval `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    if !theta.is_finite() {
        return theta;
    }
    if theta > -PI && theta <= PI {
        return theta;
    }
    let mut t = theta.rem_euclid(TAU);
    if t > PI {
        t -= TAU;
    }
    if t <= -PI {
        t += TAU;
    }
    t
}

/// `(cos, sin)` of an argument with the axis directions pinned to exact
/// values. `+-FRAC_PI_2` encodes the imaginary axis, so `cos` is exactly zero
/// there and the real-part sign is never decided by rounding noise.
pub(crate) fn axis_exact_cos_sin(arg: f64) -> (f64, f64) {
    if arg == 0.0 {
        (1.0, 0.0)
    } else if arg == FRAC_PI_2 {
        (0.0, 1.0)
    } else if arg == -FRAC_PI_2 {
        (0.0, -1.0)
    } else if arg == PI || arg == -PI {
        (-1.0, 0.0)
    } else {
        (arg.cos(), arg.sin())
    }
}

/// A complex number `exp(log_mag) * exp(i arg)`.
///
/// `log_mag = -inf` is an exact zero and `log_mag = +inf` the point at
/// infinity; the argument of either is meaningless and stored as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    #[serde(with = "extended_real")]
    pub log_mag: f64,
    pub arg: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_mag: f64::NEG_INFINITY,
        arg: 0.0,
    };
    pub const ONE: LogComplex = LogComplex {
        log_mag: 0.0,
        arg: 0.0,
    };
    pub const INFINITY: LogComplex = LogComplex {
        log_mag: f64::INFINITY,
        arg: 0.0,
    };

    pub fn new(log_mag: f64, arg: f64) -> Self {
        if log_mag.is_infinite() {
            return LogComplex { log_mag, arg: 0.0 };
        }
        LogComplex {
            log_mag,
            arg: wrap_angle(arg),
        }
    }

    /// Builds from real and imaginary parts. Exactly imaginary inputs get
    /// the canonical argument `+-FRAC_PI_2`.
    pub fn from_cartesian(re: f64, im: f64) -> Self {
        if re == 0.0 && im == 0.0 {
            return Self::ZERO;
        }
        LogComplex::new(re.hypot(im).ln(), im.atan2(re))
    }

    pub fn from_real(x: f64) -> Self {
        Self::from_cartesian(x, 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    pub fn is_infinite(&self) -> bool {
        self.log_mag == f64::INFINITY
    }

    pub fn is_finite_nonzero(&self) -> bool {
        self.log_mag.is_finite()
    }

    pub fn conj(self) -> Self {
        if self.log_mag.is_infinite() || self.arg == PI {
            return self;
        }
        LogComplex {
            log_mag: self.log_mag,
            arg: -self.arg,
        }
    }

    pub fn recip(self) -> Self {
        LogComplex::new(-self.log_mag, -self.arg)
    }

    /// Scales the modulus by `exp(delta)`.
    pub fn scale_log(self, delta: f64) -> Self {
        if self.log_mag.is_infinite() {
            return self;
        }
        LogComplex::new(self.log_mag + delta, self.arg)
    }

    /// Sign of the real part: `-1`, `0` or `1`.
    pub fn re_sign(&self) -> i8 {
        if self.is_zero() {
            return 0;
        }
        let (c, _) = axis_exact_cos_sin(self.arg);
        if c > 0.0 {
            1
        } else if c < 0.0 {
            -1
        } else {
            0
        }
    }

    /// Cartesian parts when the modulus is representable.
    pub fn to_cartesian(&self) -> Option<(f64, f64)> {
        if self.is_zero() {
            return Some((0.0, 0.0));
        }
        if !(self.log_mag < 709.0) {
            return None;
        }
        let m = self.log_mag.exp();
        let (c, s) = axis_exact_cos_sin(self.arg);
        Some((m * c, m * s))
    }
}

impl Mul for LogComplex {
    type Output = LogComplex;

    fn mul(self, rhs: LogComplex) -> LogComplex {
        let lm = self.log_mag + rhs.log_mag;
        if lm.is_nan() {
            // 0 * inf has no value; callers never form it
            return LogComplex {
                log_mag: f64::NAN,
                arg: 0.0,
            };
        }
        LogComplex::new(lm, self.arg + rhs.arg)
    }
}

impl fmt::Display for LogComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({}) * e^(i {})", self.log_mag, self.arg)
    }
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<NeumaierSum>().value()
}

/// Serializes non-finite reals as the strings `"inf"`, `"-inf"`, `"nan"`,
/// since JSON has no encoding for them.
pub mod extended_real {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;
    use std::fmt;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    struct ExtVisitor;

    impl Visitor<'_> for ExtVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("unexpected extended real {other:?}"))),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(ExtVisitor)
    }
}
