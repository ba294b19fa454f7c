use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// A complex number stored as `exp(ln_abs) * unit` with `|unit| = 1`.
///
/// Entire functions of exponential type overflow `f64` long before the radii
/// the growth estimates need (|e^{z^2}| at |z| = 50 is e^2500), so the
/// evaluator works in this representation and only converts to `Complex64`
/// at the API boundary. Zero is `ln_abs = -inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wide {
    ln_abs: f64,
    unit: Complex64,
}

impl Wide {
    pub const ZERO: Wide = Wide {
        ln_abs: f64::NEG_INFINITY,
        unit: Complex64::new(1.0, 0.0),
    };
    pub const ONE: Wide = Wide {
        ln_abs: 0.0,
        unit: Complex64::new(1.0, 0.0),
    };

    pub fn from_complex(z: Complex64) -> Self {
        let r = z.norm();
        if r == 0.0 {
            Wide::ZERO
        } else if r.is_finite() {
            Wide {
                ln_abs: r.ln(),
                unit: z / r,
            }
        } else {
            Wide {
                ln_abs: f64::INFINITY,
                unit: Complex64::new(1.0, 0.0),
            }
        }
    }

    /// `exp(w)` for an ordinary complex exponent; never overflows.
    pub fn exp_of(w: Complex64) -> Self {
        if !w.re.is_finite() || !w.im.is_finite() {
            return Wide {
                ln_abs: if w.re == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                },
                unit: Complex64::new(1.0, 0.0),
            };
        }
        Wide {
            ln_abs: w.re,
            unit: Complex64::from_polar(1.0, w.im),
        }
    }

    pub fn from_parts(ln_abs: f64, unit: Complex64) -> Self {
        Wide { ln_abs, unit }
    }

    pub fn ln_abs(&self) -> f64 {
        self.ln_abs
    }

    /// Unit-modulus phase factor.
    pub fn unit(&self) -> Complex64 {
        self.unit
    }

    pub fn arg(&self) -> f64 {
        self.unit.arg()
    }

    pub fn abs(&self) -> f64 {
        self.ln_abs.exp()
    }

    pub fn is_zero(&self) -> bool {
        self.ln_abs == f64::NEG_INFINITY
    }

    /// Finite and representable as a nonzero or zero complex number.
    pub fn is_finite(&self) -> bool {
        self.ln_abs < f64::INFINITY && !self.ln_abs.is_nan() && self.unit.is_finite()
    }

    /// Converts to `Complex64`; `None` on overflow.
    pub fn to_complex(&self) -> Option<Complex64> {
        if self.is_zero() {
            return Some(Complex64::new(0.0, 0.0));
        }
        let m = self.ln_abs.exp();
        if m.is_finite() && self.unit.is_finite() {
            Some(self.unit * m)
        } else {
            None
        }
    }

    pub fn powi(&self, k: i32) -> Wide {
        if k == 0 {
            return Wide::ONE;
        }
        if self.is_zero() {
            return if k > 0 {
                Wide::ZERO
            } else {
                Wide {
                    ln_abs: f64::INFINITY,
                    unit: Complex64::new(1.0, 0.0),
                }
            };
        }
        Wide {
            ln_abs: self.ln_abs * k as f64,
            unit: self.unit.powi(k),
        }
    }

    pub fn recip(&self) -> Wide {
        Wide {
            ln_abs: -self.ln_abs,
            unit: self.unit.conj(),
        }
    }
}

impl From<Complex64> for Wide {
    fn from(z: Complex64) -> Self {
        Wide::from_complex(z)
    }
}

impl From<f64> for Wide {
    fn from(x: f64) -> Self {
        Wide::from_complex(Complex64::new(x, 0.0))
    }
}

impl Mul for Wide {
    type Output = Wide;
    fn mul(self, rhs: Wide) -> Wide {
        if self.is_zero() || rhs.is_zero() {
            return Wide::ZERO;
        }
        let u = self.unit * rhs.unit;
        // renormalise to keep rounding from drifting |unit| away from 1
        let n = u.norm();
        Wide {
            ln_abs: self.ln_abs + rhs.ln_abs,
            unit: u / n,
        }
    }
}

impl Div for Wide {
    type Output = Wide;
    fn div(self, rhs: Wide) -> Wide {
        self * rhs.recip()
    }
}

impl Neg for Wide {
    type Output = Wide;
    fn neg(self) -> Wide {
        Wide {
            ln_abs: self.ln_abs,
            unit: -self.unit,
        }
    }
}

impl Add for Wide {
    type Output = Wide;
    fn add(self, rhs: Wide) -> Wide {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.ln_abs >= rhs.ln_abs {
            (self, rhs)
        } else {
            (rhs, self)
        };
        if big.ln_abs == f64::INFINITY {
            return big;
        }
        let ratio = (small.ln_abs - big.ln_abs).exp();
        let m = big.unit + small.unit * ratio;
        let n = m.norm();
        if n == 0.0 {
            return Wide::ZERO;
        }
        Wide {
            ln_abs: big.ln_abs + n.ln(),
            unit: m / n,
        }
    }
}

impl Sub for Wide {
    type Output = Wide;
    fn sub(self, rhs: Wide) -> Wide {
        self + (-rhs)
    }
}

impl std::iter::Sum for Wide {
    fn sum<I: Iterator<Item = Wide>>(iter: I) -> Wide {
        iter.fold(Wide::ZERO, |a, b| a + b)
    }
}

impl std::iter::Product for Wide {
    fn product<I: Iterator<Item = Wide>>(iter: I) -> Wide {
        iter.fold(Wide::ONE, |a, b| a * b)
    }
}
