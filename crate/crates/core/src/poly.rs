//! Dense univariate polynomials with multi-precision complex coefficients,
//! and 2×2 matrices of them.

use std::ops::{Add, Mul, Neg, Sub};

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mp::Cx;

/// Coefficients lowest degree first. Exact zero high coefficients are
/// trimmed, so `deg` is the index of the last stored coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct CPoly {
    coeffs: Vec<Cx>,
    prec: u32,
}

impl CPoly {
    pub fn new(prec: u32, coeffs: Vec<Cx>) -> Self {
        let mut p = CPoly { coeffs, prec };
        p.trim();
        p
    }

    pub fn zero(prec: u32) -> Self {
        CPoly {
            coeffs: Vec::new(),
            prec,
        }
    }

    pub fn constant(c: Cx) -> Self {
        let prec = c.prec();
        CPoly::new(prec, vec![c])
    }

    /// `c·z^k`
    pub fn monomial(c: Cx, k: usize) -> Self {
        let prec = c.prec();
        let mut v = vec![Cx::zero(prec); k];
        v.push(c);
        CPoly::new(prec, v)
    }

    /// Polynomial with leading coefficient `lead` and the given roots.
    pub fn from_roots(lead: Cx, roots: &[Cx]) -> Self {
        let prec = lead.prec();
        let mut p = CPoly::constant(lead);
        for r in roots {
            p = &p * &CPoly::new(prec, vec![-r, Cx::one(prec)]);
        }
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Cx::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Cx] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Cx {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| Cx::zero(self.prec))
    }

    /// Coefficient of `z^k` for a possibly negative index.
    pub fn coeff_i(&self, k: isize) -> Cx {
        if k < 0 {
            Cx::zero(self.prec)
        } else {
            self.coeff(k as usize)
        }
    }

    pub fn leading(&self) -> Cx {
        self.coeffs
            .last()
            .cloned()
            .unwrap_or_else(|| Cx::zero(self.prec))
    }

    pub fn eval(&self, z: &Cx) -> Cx {
        let mut acc = Cx::zero(self.prec.max(z.prec()));
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * z) + c;
        }
        acc
    }

    pub fn scale(&self, s: &Cx) -> Self {
        CPoly::new(self.prec, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn conj(&self) -> Self {
        CPoly::new(self.prec, self.coeffs.iter().map(Cx::conj).collect())
    }

    /// `p(qz)`: coefficient `k` times `q^k`.
    pub fn q_shift(&self, q: &Float) -> Self {
        let mut qk = Float::with_val(self.prec.max(q.prec()), 1);
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c.scale(&qk));
            qk *= q;
        }
        CPoly::new(self.prec, out)
    }

    /// Multiply by `z^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![Cx::zero(self.prec); k];
        v.extend(self.coeffs.iter().cloned());
        CPoly::new(self.prec, v)
    }

    /// Divide by `z^k`, dropping the low coefficients; also returns the
    /// largest modulus dropped.
    pub fn shift_down(&self, k: usize) -> (Self, f64) {
        let dropped = self.coeffs.iter().take(k).map(Cx::abs_f64).fold(0.0, f64::max);
        (CPoly::new(self.prec, self.coeffs.iter().skip(k).cloned().collect()), dropped)
    }

    /// Keep the coefficients of `z^0 .. z^{len-1}`.
    pub fn truncate(&self, len: usize) -> Self {
        CPoly::new(
            self.prec,
            self.coeffs.iter().take(len).cloned().collect(),
        )
    }

    /// `zⁿ p̄(1/z)`: coefficient `k` becomes the conjugate of coefficient `n−k`.
    pub fn star(&self, n: usize) -> Result<Self> {
        match self.degree() {
            Some(d) if d > n => Err(Error::Degree { degree: d, bound: n }),
            _ => Ok(CPoly::new(
                self.prec,
                (0..=n).map(|k| self.coeff(n - k).conj()).collect(),
            )),
        }
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(Cx::abs_f64).fold(0.0, f64::max)
    }

    /// Coefficient pairs `[re, im]` for serialization.
    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.coeffs.iter().map(Cx::to_pair).collect()
    }

    /// Exact division by `(z - r)`; returns quotient and remainder.
    pub fn div_linear(&self, r: &Cx) -> (Self, Cx) {
        let n = self.coeffs.len();
        if n == 0 {
            return (self.clone(), Cx::zero(self.prec));
        }
        let mut q = vec![Cx::zero(self.prec); n - 1];
        let mut acc = Cx::zero(self.prec);
        for k in (0..n).rev() {
            acc = &(&acc * r) + &self.coeffs[k];
            if k > 0 {
                q[k - 1] = acc.clone();
            }
        }
        (CPoly::new(self.prec, q), acc)
    }
}

impl<'a> Add<&'a CPoly> for &'a CPoly {
    type Output = CPoly;
    fn add(self, o: &CPoly) -> CPoly {
        let n = self.len().max(o.len());
        let prec = self.prec.max(o.prec);
        CPoly::new(prec, (0..n).map(|k| &self.coeff(k) + &o.coeff(k)).collect())
    }
}

impl<'a> Sub<&'a CPoly> for &'a CPoly {
    type Output = CPoly;
    fn sub(self, o: &CPoly) -> CPoly {
        let n = self.len().max(o.len());
        let prec = self.prec.max(o.prec);
        CPoly::new(prec, (0..n).map(|k| &self.coeff(k) - &o.coeff(k)).collect())
    }
}

impl<'a> Mul<&'a CPoly> for &'a CPoly {
    type Output = CPoly;
    fn mul(self, o: &CPoly) -> CPoly {
        let prec = self.prec.max(o.prec);
        if self.is_zero() || o.is_zero() {
            return CPoly::zero(prec);
        }
        let mut out = vec![Cx::zero(prec); self.len() + o.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        CPoly::new(prec, out)
    }
}

impl Neg for &CPoly {
    type Output = CPoly;
    fn neg(self) -> CPoly {
        CPoly::new(self.prec, self.coeffs.iter().map(|c| -c).collect())
    }
}

/// A 2×2 matrix of polynomials, row major.
#[derive(Clone, Debug, PartialEq)]
pub struct MatPoly2 {
    pub e11: CPoly,
    pub e12: CPoly,
    pub e21: CPoly,
    pub e22: CPoly,
}

impl MatPoly2 {
    pub fn new(e11: CPoly, e12: CPoly, e21: CPoly, e22: CPoly) -> Self {
        MatPoly2 { e11, e12, e21, e22 }
    }

    pub fn det(&self) -> CPoly {
        &(&self.e11 * &self.e22) - &(&self.e12 * &self.e21)
    }

    pub fn q_shift(&self, q: &Float) -> Self {
        MatPoly2::new(
            self.e11.q_shift(q),
            self.e12.q_shift(q),
            self.e21.q_shift(q),
            self.e22.q_shift(q),
        )
    }

    pub fn scale(&self, s: &Cx) -> Self {
        MatPoly2::new(
            self.e11.scale(s),
            self.e12.scale(s),
            self.e21.scale(s),
            self.e22.scale(s),
        )
    }

    /// Conjugation by `diag(d, 1)`: rows scale by `d`, columns by `1/d`.
    pub fn diag_conjugate(&self, d: &Cx) -> Self {
        let inv = d.recip();
        MatPoly2::new(
            self.e11.clone(),
            self.e12.scale(d),
            self.e21.scale(&inv),
            self.e22.clone(),
        )
    }

    /// Coefficient of `z^k` of every entry as a plain 2×2 matrix.
    pub fn coeff(&self, k: usize) -> [[Cx; 2]; 2] {
        [
            [self.e11.coeff(k), self.e12.coeff(k)],
            [self.e21.coeff(k), self.e22.coeff(k)],
        ]
    }

    pub fn eval(&self, z: &Cx) -> [[Cx; 2]; 2] {
        [
            [self.e11.eval(z), self.e12.eval(z)],
            [self.e21.eval(z), self.e22.eval(z)],
        ]
    }

    pub fn max_abs(&self) -> f64 {
        [&self.e11, &self.e12, &self.e21, &self.e22]
            .iter()
            .map(|p| p.max_abs())
            .fold(0.0, f64::max)
    }

    pub fn max_degree(&self) -> Option<usize> {
        [&self.e11, &self.e12, &self.e21, &self.e22]
            .iter()
            .filter_map(|p| p.degree())
            .max()
    }

    pub fn to_json(&self) -> MatPolyJson {
        MatPolyJson {
            e11: self.e11.to_pairs(),
            e12: self.e12.to_pairs(),
            e21: self.e21.to_pairs(),
            e22: self.e22.to_pairs(),
        }
    }
}

impl<'a> Mul<&'a MatPoly2> for &'a MatPoly2 {
    type Output = MatPoly2;
    fn mul(self, o: &MatPoly2) -> MatPoly2 {
        MatPoly2::new(
            &(&self.e11 * &o.e11) + &(&self.e12 * &o.e21),
            &(&self.e11 * &o.e12) + &(&self.e12 * &o.e22),
            &(&self.e21 * &o.e11) + &(&self.e22 * &o.e21),
            &(&self.e21 * &o.e12) + &(&self.e22 * &o.e22),
        )
    }
}

impl<'a> Sub<&'a MatPoly2> for &'a MatPoly2 {
    type Output = MatPoly2;
    fn sub(self, o: &MatPoly2) -> MatPoly2 {
        MatPoly2::new(
            &self.e11 - &o.e11,
            &self.e12 - &o.e12,
            &self.e21 - &o.e21,
            &self.e22 - &o.e22,
        )
    }
}

/// Entry coefficient lists, lowest degree first.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatPolyJson {
    pub e11: Vec<[f64; 2]>,
    pub e12: Vec<[f64; 2]>,
    pub e21: Vec<[f64; 2]>,
    pub e22: Vec<[f64; 2]>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp::real;

    fn c(re: f64, im: f64) -> Cx {
        Cx::new(128, re, im)
    }

    #[test]
    fn star_examples() {
        let one = CPoly::constant(c(1.0, 0.0));
        assert_eq!(one.star(0).unwrap(), one);
        let a = c(0.2, -0.4);
        let p = CPoly::new(128, vec![a.clone(), c(1.0, 0.0)]);
        let s = p.star(1).unwrap();
        assert_eq!(s.coeffs(), &[c(1.0, 0.0), a.conj()]);
        assert!(matches!(p.star(0), Err(Error::Degree { .. })));
    }

    #[test]
    fn star_pads_with_zeros() {
        let p = CPoly::constant(c(2.0, 1.0));
        let s = p.star(2).unwrap();
        assert_eq!(s.degree(), Some(2));
        assert!(s.coeff(0).is_zero());
        assert_eq!(s.coeff(2), c(2.0, -1.0));
    }

    #[test]
    fn q_shift_matches_evaluation() {
        let p = CPoly::new(128, vec![c(1.0, 2.0), c(-0.5, 0.1), c(0.3, 0.3)]);
        let q = real(128, 0.7);
        let z = c(0.4, -0.9);
        let lhs = p.q_shift(&q).eval(&z);
        let rhs = p.eval(&z.scale(&q));
        assert!((&lhs - &rhs).abs_f64() < 1e-35);
    }

    #[test]
    fn from_roots_and_division() {
        let r = [c(1.0, 1.0), c(-0.5, 0.0), c(0.0, 2.0)];
        let p = CPoly::from_roots(c(3.0, 0.0), &r);
        assert_eq!(p.degree(), Some(3));
        for x in &r {
            assert!(p.eval(x).abs_f64() < 1e-35);
        }
        let (quo, rem) = p.div_linear(&r[0]);
        assert!(rem.abs_f64() < 1e-35);
        assert_eq!(quo.degree(), Some(2));
    }

    #[test]
    fn det_of_product_is_product_of_dets() {
        let m = MatPoly2::new(
            CPoly::new(128, vec![c(1.0, 0.0), c(0.5, 0.0)]),
            CPoly::new(128, vec![c(0.0, 1.0)]),
            CPoly::new(128, vec![c(0.2, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
            CPoly::new(128, vec![c(2.0, -1.0)]),
        );
        let n = m.q_shift(&real(128, 0.5));
        let lhs = (&m * &n).det();
        let rhs = &m.det() * &n.det();
        assert!((&lhs - &rhs).max_abs() < 1e-35);
    }
}
