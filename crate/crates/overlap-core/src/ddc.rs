//! Minimal double-double complex arithmetic.
//!
//! The biorthogonal-sum form of the reduced kernel is a doubly nested sum
//! whose terms can exceed the result by many orders of magnitude; plain f64
//! leaves only ~7 significant digits on unlucky split tuples. Carrying the
//! sums as unevaluated (hi, lo) pairs keeps the arithmetic error at the
//! eps² level, so the result is limited only by the rounding of the exp/sin/
//! cos seeds (≈1 ulp).
//!
//! This is deliberately small: add/mul/div and an exponential, no more.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Dd {
        let (h, l) = quick_two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        Dd::new(s, e + self.lo + o.lo)
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::new(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    pub fn mul_f64(self, f: f64) -> Dd {
        let (p, e) = two_prod(self.hi, f);
        Dd::new(p, e + self.lo * f)
    }

    pub fn div(self, o: Dd) -> Dd {
        let q0 = self.hi / o.hi;
        let r = self.sub(o.mul_f64(q0));
        let q1 = r.hi / o.hi;
        let r2 = r.sub(o.mul_f64(q1));
        let q2 = r2.hi / o.hi;
        Dd::new(q0, q1).add(Dd::from_f64(q2))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub const ZERO: DdComplex = DdComplex { re: Dd::ZERO, im: Dd::ZERO };

    #[cfg_attr(not(test), allow(dead_code))]
    pub fn from_c64(c: Complex64) -> DdComplex {
        DdComplex {
            re: Dd::from_f64(c.re),
            im: Dd::from_f64(c.im),
        }
    }

    pub fn from_f64(x: f64) -> DdComplex {
        DdComplex {
            re: Dd::from_f64(x),
            im: Dd::ZERO,
        }
    }

    /// The product of two plain complex numbers, captured exactly.
    pub fn from_prod(a: Complex64, b: Complex64) -> DdComplex {
        let (p1, e1) = two_prod(a.re, b.re);
        let (p2, e2) = two_prod(a.im, b.im);
        let (p3, e3) = two_prod(a.re, b.im);
        let (p4, e4) = two_prod(a.im, b.re);
        let re = Dd::new(p1, e1).add(Dd::new(-p2, -e2));
        let im = Dd::new(p3, e3).add(Dd::new(p4, e4));
        DdComplex { re, im }
    }

    pub fn add(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }

    pub fn sub(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re.sub(o.re),
            im: self.im.sub(o.im),
        }
    }

    pub fn mul(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    pub fn mul_c64(self, c: Complex64) -> DdComplex {
        DdComplex {
            re: self.re.mul_f64(c.re).sub(self.im.mul_f64(c.im)),
            im: self.re.mul_f64(c.im).add(self.im.mul_f64(c.re)),
        }
    }

    pub fn mul_f64(self, f: f64) -> DdComplex {
        DdComplex {
            re: self.re.mul_f64(f),
            im: self.im.mul_f64(f),
        }
    }

    pub fn div(self, o: DdComplex) -> DdComplex {
        let den = o.re.mul(o.re).add(o.im.mul(o.im));
        let num = self.mul(DdComplex { re: o.re, im: o.im.neg() });
        DdComplex {
            re: num.re.div(den),
            im: num.im.div(den),
        }
    }

    pub fn div_f64(self, f: f64) -> DdComplex {
        DdComplex {
            re: self.re.div(Dd::from_f64(f)),
            im: self.im.div(Dd::from_f64(f)),
        }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn norm_est(self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }
}

/// e^z for a double-double complex argument.
///
/// Seeds from the f64 exp/sin/cos (≤1 ulp each) and applies the first-order
/// corrections from the lo parts, so the relative accuracy is ~1e-16 — the
/// seeds, not the arithmetic, are the limit.
pub(crate) fn exp_dd(z: DdComplex) -> DdComplex {
    let er = z.re.hi.exp();
    let (s, c) = z.im.hi.sin_cos();
    // e^{hi+lo} = e^hi·(1 + lo + …), rotate by im.lo: (c, s) ← (c − s·lo, s + c·lo)
    let re = Dd::from_f64(c)
        .add(Dd::from_f64(-s * z.im.lo))
        .mul_f64(er)
        .mul(Dd::new(1.0, z.re.lo));
    let im = Dd::from_f64(s)
        .add(Dd::from_f64(c * z.im.lo))
        .mul_f64(er)
        .mul(Dd::new(1.0, z.re.lo));
    DdComplex { re, im }
}


impl DdComplex {
    /// Scale by a real double-double factor.
    pub fn scale(self, d: Dd) -> DdComplex {
        DdComplex {
            re: self.re.mul(d),
            im: self.im.mul(d),
        }
    }
}
