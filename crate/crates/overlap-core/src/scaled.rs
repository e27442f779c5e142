//! Overflow-safe complex numbers carried as (mantissa, log-scale).
//!
//! Kernel prefactors in this crate reach magnitudes like e^{N|λ|²} with
//! N up to several hundred, far past what an `f64` exponent can hold.
//! [`ScaledComplex`] stores a value as `mantissa · exp(log_scale)` with
//! the mantissa kept near unit modulus, so products and sums of such
//! quantities stay representable.

use num_complex::Complex64;

/// A complex value `mantissa · exp(log_scale)`.
///
/// After normalization either `mantissa == 0` and `log_scale == 0`, or
/// `0.5 ≤ |mantissa| ≤ 2`. Round-trip through [`ScaledComplex::value`]
/// reproduces any value in the `f64` range to relative accuracy
/// |log_scale|·ε (≲ 2e-13 at the extremes of the range).
#[derive(Debug, Clone, Copy)]
pub struct ScaledComplex {
    mantissa: Complex64,
    log_scale: f64,
}

impl ScaledComplex {
    pub const ZERO: ScaledComplex = ScaledComplex {
        mantissa: Complex64::new(0.0, 0.0),
        log_scale: 0.0,
    };

    pub const ONE: ScaledComplex = ScaledComplex {
        mantissa: Complex64::new(1.0, 0.0),
        log_scale: 0.0,
    };

    /// Builds from raw parts and normalizes.
    pub fn from_parts(mantissa: Complex64, log_scale: f64) -> Self {
        Self { mantissa, log_scale }.normalized()
    }

    pub fn from_complex(value: Complex64) -> Self {
        Self::from_parts(value, 0.0)
    }

    pub fn from_real(value: f64) -> Self {
        Self::from_parts(Complex64::new(value, 0.0), 0.0)
    }

    /// The value `exp(log_modulus) · exp(i·phase)`, for magnitudes that may
    /// not be representable as a plain double.
    pub fn from_log_polar(log_modulus: f64, phase: f64) -> Self {
        Self {
            mantissa: Complex64::from_polar(1.0, phase),
            log_scale: log_modulus,
        }
    }

    fn normalized(self) -> Self {
        let m = self.mantissa.norm();
        if m == 0.0 {
            return Self::ZERO;
        }
        if !m.is_finite() || !self.log_scale.is_finite() {
            // Poisoned value; keep it visibly non-finite rather than panicking.
            return Self {
                mantissa: Complex64::new(f64::NAN, f64::NAN),
                log_scale: 0.0,
            };
        }
        if (0.5..=2.0).contains(&m) {
            return self;
        }
        let shift = m.ln();
        Self {
            mantissa: self.mantissa / m,
            log_scale: self.log_scale + shift,
        }
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mantissa
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.norm() == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.mantissa.re.is_finite() && self.mantissa.im.is_finite() && self.log_scale.is_finite()
    }

    /// Collapses to a plain complex. Overflows to ±inf / underflows to 0
    /// outside the `f64` range.
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }

    /// ln|value|, or −∞ for zero.
    pub fn log_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.norm().ln() + self.log_scale
        }
    }

    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    pub fn conj(&self) -> Self {
        Self {
            mantissa: self.mantissa.conj(),
            log_scale: self.log_scale,
        }
    }

    /// Multiplies by `exp(delta)` without touching the mantissa.
    pub fn mul_exp(&self, delta: f64) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self {
            mantissa: self.mantissa,
            log_scale: self.log_scale + delta,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::from_parts(self.mantissa * rhs.mantissa, self.log_scale + rhs.log_scale)
    }

    pub fn mul_complex(&self, rhs: Complex64) -> Self {
        Self::from_parts(self.mantissa * rhs, self.log_scale)
    }

    pub fn div(&self, rhs: &Self) -> Self {
        Self::from_parts(self.mantissa / rhs.mantissa, self.log_scale - rhs.log_scale)
    }

    pub fn recip(&self) -> Self {
        Self::from_parts(1.0 / self.mantissa, -self.log_scale)
    }

    pub fn neg(&self) -> Self {
        Self {
            mantissa: -self.mantissa,
            log_scale: self.log_scale,
        }
    }

    /// Sum, computed by rescaling the smaller addend to the larger scale.
    pub fn add(&self, rhs: &Self) -> Self {
        if self.is_zero() {
            return *rhs;
        }
        if rhs.is_zero() {
            return *self;
        }
        let (hi, lo) = if self.log_scale >= rhs.log_scale {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let shift = lo.log_scale - hi.log_scale;
        // exp(shift) underflows harmlessly to 0 when the scales are far apart.
        let sum = hi.mantissa + lo.mantissa * shift.exp();
        Self::from_parts(sum, hi.log_scale)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    /// |value| as a plain double (may overflow to +inf).
    pub fn abs(&self) -> f64 {
        self.mantissa.norm() * self.log_scale.exp()
    }

    /// Quotient of two scaled values as a plain complex; well defined whenever
    /// the scale difference is representable.
    pub fn ratio(&self, rhs: &Self) -> Complex64 {
        (self.mantissa / rhs.mantissa) * (self.log_scale - rhs.log_scale).exp()
    }
}

impl Default for ScaledComplex {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<Complex64> for ScaledComplex {
    fn from(value: Complex64) -> Self {
        Self::from_complex(value)
    }
}

impl From<f64> for ScaledComplex {
    fn from(value: f64) -> Self {
        Self::from_real(value)
    }
}

impl std::ops::Add for ScaledComplex {
    type Output = ScaledComplex;
    fn add(self, rhs: Self) -> Self {
        ScaledComplex::add(&self, &rhs)
    }
}

impl std::ops::Sub for ScaledComplex {
    type Output = ScaledComplex;
    fn sub(self, rhs: Self) -> Self {
        ScaledComplex::sub(&self, &rhs)
    }
}

impl std::ops::Mul for ScaledComplex {
    type Output = ScaledComplex;
    fn mul(self, rhs: Self) -> Self {
        ScaledComplex::mul(&self, &rhs)
    }
}

impl std::ops::Div for ScaledComplex {
    type Output = ScaledComplex;
    fn div(self, rhs: Self) -> Self {
        ScaledComplex::div(&self, &rhs)
    }
}

impl std::ops::Neg for ScaledComplex {
    type Output = ScaledComplex;
    fn neg(self) -> Self {
        ScaledComplex::neg(&self)
    }
}
