//! Multi-precision complex arithmetic on top of MPFR floats.
//!
//! Every value carries its own binary precision. Binary operations return a
//! result at the larger of the two operand precisions, so a computation that
//! starts at 192 bits stays at 192 bits without any global state.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rug::float::Constant;
use rug::Float;

pub type Real = Float;

/// Builds a real at `prec` bits from an `f64`.
pub fn real(prec: u32, v: f64) -> Real {
    Float::with_val(prec, v)
}

pub fn pi(prec: u32) -> Real {
    Float::with_val(prec, Constant::Pi)
}

/// `2^-bits` at `prec` bits.
pub fn ulp_scale(prec: u32, bits: i32) -> Real {
    Float::with_val(prec, 1) >> bits
}

#[derive(Clone, PartialEq)]
pub struct Cx {
    re: Float,
    im: Float,
}

impl Cx {
    pub fn new(prec: u32, re: f64, im: f64) -> Self {
        Cx {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn from_parts(re: Float, im: Float) -> Self {
        let p = re.prec().max(im.prec());
        Cx {
            re: Float::with_val(p, re),
            im: Float::with_val(p, im),
        }
    }

    pub fn from_real(re: &Float) -> Self {
        Cx {
            re: re.clone(),
            im: Float::new(re.prec()),
        }
    }

    pub fn zero(prec: u32) -> Self {
        Cx::new(prec, 0.0, 0.0)
    }

    pub fn one(prec: u32) -> Self {
        Cx::new(prec, 1.0, 0.0)
    }

    pub fn i(prec: u32) -> Self {
        Cx::new(prec, 0.0, 1.0)
    }

    /// `e^{iθ}` for a real angle.
    pub fn unit(theta: &Float) -> Self {
        let (s, c) = theta.clone().sin_cos(Float::new(theta.prec()));
        Cx { re: c, im: s }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Cx {
            re: Float::with_val(prec, &self.re),
            im: Float::with_val(prec, &self.im),
        }
    }

    pub fn re(&self) -> &Float {
        &self.re
    }

    pub fn im(&self) -> &Float {
        &self.im
    }

    pub fn conj(&self) -> Self {
        Cx {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn scale(&self, s: &Float) -> Self {
        let p = self.prec().max(s.prec());
        Cx {
            re: Float::with_val(p, &self.re * s),
            im: Float::with_val(p, &self.im * s),
        }
    }

    pub fn scale_f64(&self, s: f64) -> Self {
        Cx {
            re: Float::with_val(self.prec(), &self.re * s),
            im: Float::with_val(self.prec(), &self.im * s),
        }
    }

    pub fn recip(&self) -> Self {
        let d = self.norm_sqr();
        Cx {
            re: Float::with_val(self.prec(), &self.re / &d),
            im: -Float::with_val(self.prec(), &self.im / &d),
        }
    }

    pub fn exp(&self) -> Self {
        let m = self.re.clone().exp();
        let (s, c) = self.im.clone().sin_cos(Float::new(self.prec()));
        Cx { re: c * &m, im: s * m }
    }

    /// Principal branch.
    pub fn ln(&self) -> Self {
        Cx {
            re: self.abs().ln(),
            im: self.arg(),
        }
    }

    pub fn powu(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Cx::one(self.prec());
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    pub fn powi(&self, k: i32) -> Self {
        if k >= 0 {
            self.powu(k as u32)
        } else {
            self.powu(k.unsigned_abs()).recip()
        }
    }

    pub fn sqr(&self) -> Self {
        self * self
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn from_c64(prec: u32, z: Complex64) -> Self {
        Cx::new(prec, z.re, z.im)
    }

    pub fn to_pair(&self) -> [f64; 2] {
        [self.re.to_f64(), self.im.to_f64()]
    }

    /// `|self - other| / max(|other|, floor)` as an `f64`.
    pub fn rel_err(&self, other: &Cx, floor: f64) -> f64 {
        let d = (self - other).abs_f64();
        d / other.abs_f64().max(floor)
    }
}

impl fmt::Debug for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:e} + {:e}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for Cx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        write!(
            f,
            "{}{}{}i",
            self.re.to_string_radix(10, Some(digits)),
            if self.im.is_sign_negative() { "" } else { "+" },
            self.im.to_string_radix(10, Some(digits))
        )
    }
}

impl Add<&Cx> for &Cx {
    type Output = Cx;
    fn add(self, o: &Cx) -> Cx {
        let p = self.prec().max(o.prec());
        Cx {
            re: Float::with_val(p, &self.re + &o.re),
            im: Float::with_val(p, &self.im + &o.im),
        }
    }
}

impl Sub<&Cx> for &Cx {
    type Output = Cx;
    fn sub(self, o: &Cx) -> Cx {
        let p = self.prec().max(o.prec());
        Cx {
            re: Float::with_val(p, &self.re - &o.re),
            im: Float::with_val(p, &self.im - &o.im),
        }
    }
}

impl Mul<&Cx> for &Cx {
    type Output = Cx;
    fn mul(self, o: &Cx) -> Cx {
        let p = self.prec().max(o.prec());
        let mut re = Float::with_val(p, &self.re * &o.re);
        re -= Float::with_val(p, &self.im * &o.im);
        let mut im = Float::with_val(p, &self.re * &o.im);
        im += Float::with_val(p, &self.im * &o.re);
        Cx { re, im }
    }
}

impl Div<&Cx> for &Cx {
    type Output = Cx;
    fn div(self, o: &Cx) -> Cx {
        let p = self.prec().max(o.prec());
        let d = Float::with_val(p, o.re.square_ref()) + Float::with_val(p, o.im.square_ref());
        let mut re = Float::with_val(p, &self.re * &o.re);
        re += Float::with_val(p, &self.im * &o.im);
        let mut im = Float::with_val(p, &self.im * &o.re);
        im -= Float::with_val(p, &self.re * &o.im);
        Cx {
            re: re / &d,
            im: im / &d,
        }
    }
}

impl Neg for &Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

impl Neg for Cx {
    type Output = Cx;
    fn neg(self) -> Cx {
        Cx {
            re: -self.re,
            im: -self.im,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Cx> for Cx {
            type Output = Cx;
            fn $m(self, o: Cx) -> Cx {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Cx> for Cx {
            type Output = Cx;
            fn $m(self, o: &Cx) -> Cx {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<Cx> for &'a Cx {
            type Output = Cx;
            fn $m(self, o: Cx) -> Cx {
                self.$m(&o)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&Cx> for Cx {
    fn add_assign(&mut self, o: &Cx) {
        *self = &*self + o;
    }
}

impl SubAssign<&Cx> for Cx {
    fn sub_assign(&mut self, o: &Cx) {
        *self = &*self - o;
    }
}

impl MulAssign<&Cx> for Cx {
    fn mul_assign(&mut self, o: &Cx) {
        *self = &*self * o;
    }
}

/// Parses `"re,im"` or a bare real.
pub fn parse_complex(prec: u32, s: &str) -> Option<Cx> {
    let mut it = s.split(',');
    let re: f64 = it.next()?.trim().parse().ok()?;
    let im: f64 = match it.next() {
        Some(t) => t.trim().parse().ok()?,
        None => 0.0,
    };
    if it.next().is_some() {
        return None;
    }
    Some(Cx::new(prec, re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_is_max_of_operands() {
        let a = Cx::new(64, 1.0, 2.0);
        let b = Cx::new(200, 0.5, -1.0);
        assert_eq!((&a * &b).prec(), 200);
        assert_eq!((&b + &a).prec(), 200);
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = Cx::new(128, 0.3, -0.7);
        let b = Cx::new(128, 1.25, 0.5);
        let r = &(&a * &b) / &b;
        assert!((&r - &a).abs_f64() < 1e-36);
    }

    #[test]
    fn exp_ln_roundtrip() {
        let z = Cx::new(192, 0.4, 1.1);
        assert!((&z.ln().exp() - &z).abs_f64() < 1e-55);
    }

    #[test]
    fn unit_has_modulus_one() {
        let t = real(160, 2.3);
        assert!((Cx::unit(&t).abs() - Float::with_val(160, 1)).abs().to_f64() < 1e-46);
    }

    #[test]
    fn powi_negative() {
        let z = Cx::new(128, 0.5, 0.5);
        let r = &z.powi(-3) * &z.powu(3);
        assert!((&r - &Cx::one(128)).abs_f64() < 1e-35);
    }

    #[test]
    fn parse() {
        let z = parse_complex(64, "0.3, 0.2").unwrap();
        assert_eq!(z.to_pair(), [0.3, 0.2]);
        assert_eq!(parse_complex(64, "0.5").unwrap().to_pair(), [0.5, 0.0]);
        assert!(parse_complex(64, "1,2,3").is_none());
        assert!(parse_complex(64, "x").is_none());
    }
}
