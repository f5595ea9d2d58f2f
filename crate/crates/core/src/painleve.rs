//! Sakai-surface coordinates `(y, ξ)` of the Lax matrix and the explicit
//! birational step `φ`.
//!
//! A point of the surface is a matrix in the Jimbo–Sakai gauge
//!
//! ```text
//! A(z) = | κ₁z² + az + θ₁   z − y          |
//!        | z(γz + β)        κ₂z² + bz + θ₂ |
//! ```
//!
//! with `det A = κ₁κ₂(z−c₁)(z−c₂)(z−c₃)(z−c₄)`. One step multiplies `κ₁`
//! and `θ₁` by `q`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::laxpair::LaxFit;
use crate::mp::{ulp_scale, Cx, Real};
use crate::poly::{CPoly, MatPoly2};
use crate::qseries::QWeightParams;

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceParams {
    pub kappa1: Cx,
    pub kappa2: Cx,
    pub theta1: Cx,
    pub theta2: Cx,
    pub c: [Cx; 4],
    pub q: Real,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceParamsJson {
    pub kappa1: [f64; 2],
    pub kappa2: [f64; 2],
    pub theta1: [f64; 2],
    pub theta2: [f64; 2],
    pub c: [[f64; 2]; 4],
    pub q: f64,
}

impl SurfaceParams {
    /// Validates the determinant constraint `κ₁κ₂c₁c₂c₃c₄ = θ₁θ₂` to relative
    /// `tol` and genericity.
    pub fn new(kappa1: Cx, kappa2: Cx, theta1: Cx, theta2: Cx, c: [Cx; 4], q: Real, tol: f64) -> Result<Self> {
        let sp = SurfaceParams {
            kappa1,
            kappa2,
            theta1,
            theta2,
            c,
            q,
        };
        let all = [&sp.kappa1, &sp.kappa2, &sp.theta1, &sp.theta2, &sp.c[0], &sp.c[1], &sp.c[2], &sp.c[3]];
        if all.iter().any(|x| x.is_zero() || !x.is_finite()) {
            return Err(Error::Config("surface parameters must be finite and nonzero".into()));
        }
        if sp.kappa1 == sp.kappa2 || sp.theta1 == sp.theta2 {
            return Err(Error::Config("need κ₁ ≠ κ₂ and θ₁ ≠ θ₂".into()));
        }
        let dev = sp.constraint_residual();
        if !(dev <= tol) {
            return Err(Error::Constraint(dev));
        }
        Ok(sp)
    }

    pub fn prec(&self) -> u32 {
        self.kappa1.prec()
    }

    /// `|κ₁κ₂∏cᵢ − θ₁θ₂| / |θ₁θ₂|`
    pub fn constraint_residual(&self) -> f64 {
        let lhs = self.c.iter().fold(&self.kappa1 * &self.kappa2, |s, x| &s * x);
        let rhs = &self.theta1 * &self.theta2;
        lhs.rel_err(&rhs, 1e-300)
    }

    pub fn sigma1(&self) -> Cx {
        self.c.iter().fold(Cx::zero(self.prec()), |s, x| &s + x)
    }

    pub fn sigma3(&self) -> Cx {
        let [c1, c2, c3, c4] = &self.c;
        let a = &(c1 * c2) * &(c3 + c4);
        let b = &(c3 * c4) * &(c1 + c2);
        &a + &b
    }

    /// Parameters after one step: `(qκ₁, κ₂, qθ₁, θ₂)`, same `c`.
    pub fn stepped(&self) -> Self {
        SurfaceParams {
            kappa1: self.kappa1.scale(&self.q),
            theta1: self.theta1.scale(&self.q),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> SurfaceParamsJson {
        SurfaceParamsJson {
            kappa1: self.kappa1.to_pair(),
            kappa2: self.kappa2.to_pair(),
            theta1: self.theta1.to_pair(),
            theta2: self.theta2.to_pair(),
            c: [self.c[0].to_pair(), self.c[1].to_pair(), self.c[2].to_pair(), self.c[3].to_pair()],
            q: self.q.to_f64(),
        }
    }
}

/// A point of `ℙ¹`.
#[derive(Clone, Debug, PartialEq)]
pub enum Proj {
    Finite(Cx),
    Infinity,
}

impl Proj {
    pub fn finite(&self) -> Option<&Cx> {
        match self {
            Proj::Finite(z) => Some(z),
            Proj::Infinity => None,
        }
    }

    /// `[re, im]`, or `None` at infinity.
    pub fn to_pair(&self) -> Option<[f64; 2]> {
        self.finite().map(Cx::to_pair)
    }

    /// Chordal distance on the Riemann sphere.
    pub fn chordal(&self, other: &Proj) -> f64 {
        match (self, other) {
            (Proj::Infinity, Proj::Infinity) => 0.0,
            (Proj::Finite(z), Proj::Infinity) | (Proj::Infinity, Proj::Finite(z)) => {
                2.0 / (1.0 + z.abs_f64().powi(2)).sqrt()
            }
            (Proj::Finite(z), Proj::Finite(w)) => {
                let d = (z - w).abs_f64();
                2.0 * d / ((1.0 + z.abs_f64().powi(2)).sqrt() * (1.0 + w.abs_f64().powi(2)).sqrt())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceCoords {
    pub y: Proj,
    pub xi: Proj,
}

impl SurfaceCoords {
    pub fn new(y: Cx, xi: Cx) -> Self {
        SurfaceCoords {
            y: Proj::Finite(y),
            xi: Proj::Finite(xi),
        }
    }

    /// Both coordinates when finite and nonzero, the open chart `ℂ*×ℂ*`.
    pub fn chart(&self) -> Result<(&Cx, &Cx)> {
        match (&self.y, &self.xi) {
            (Proj::Finite(y), Proj::Finite(xi)) if !y.is_zero() && !xi.is_zero() => Ok((y, xi)),
            _ => Err(Error::Chart(format!(
                "(y, ξ) = ({:?}, {:?}) is outside ℂ*×ℂ*",
                self.y.to_pair(),
                self.xi.to_pair()
            ))),
        }
    }

    pub fn distance(&self, other: &SurfaceCoords) -> f64 {
        self.y.chordal(&other.y).max(self.xi.chordal(&other.xi))
    }
}

/// Parameters for degree `n` of the weight: `κ₁ = bq^{n+1}`, `κ₂ = aq`,
/// `θ₁ = b̄qⁿ`, `θ₂ = ā`, `c = (ā/q, 1/b, b̄/q, 1/a)`.
pub fn params_from_weight(p: &QWeightParams, n: usize, tol: f64) -> Result<SurfaceParams> {
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    if p.a.is_zero() || p.b.is_zero() {
        return Err(Error::Config("a and b must be nonzero for the surface parameters".into()));
    }
    let q = Cx::from_real(&p.q);
    let qn = q.powu(n as u32);
    let c = [
        &p.a.conj() / &q,
        p.b.recip(),
        &p.b.conj() / &q,
        p.a.recip(),
    ];
    SurfaceParams::new(
        &p.b * &(&qn * &q),
        &p.a * &q,
        &p.b.conj() * &qn,
        p.a.conj(),
        c,
        p.q.clone(),
        tol,
    )
}

/// The eight blown-up points with their labels.
pub fn blown_up_points(sp: &SurfaceParams) -> Vec<(&'static str, SurfaceCoords)> {
    let [c1, c2, c3, c4] = &sp.c;
    let c12 = c1 * c2;
    let fin = |y: Cx, xi: Cx| SurfaceCoords::new(y, xi);
    let zero = Cx::zero(sp.prec());
    let at = |y: Proj, xi: Proj| SurfaceCoords { y, xi };
    vec![
        ("(c1, 0)", fin(c1.clone(), zero.clone())),
        ("(c2, 0)", fin(c2.clone(), zero.clone())),
        ("(c3, inf)", at(Proj::Finite(c3.clone()), Proj::Infinity)),
        ("(c4, inf)", at(Proj::Finite(c4.clone()), Proj::Infinity)),
        ("(0, c1c2/theta1)", fin(zero.clone(), &c12 / &sp.theta1)),
        ("(0, c1c2/theta2)", fin(zero.clone(), &c12 / &sp.theta2)),
        ("(inf, 1/kappa1)", at(Proj::Infinity, Proj::Finite(sp.kappa1.recip()))),
        (
            "(inf, q/kappa2)",
            at(Proj::Infinity, Proj::Finite(&Cx::from_real(&sp.q) / &sp.kappa2)),
        ),
    ]
}

/// Label of the blown-up point nearest to `pt` and its chordal distance.
pub fn nearest_blown_up(sp: &SurfaceParams, pt: &SurfaceCoords) -> (&'static str, f64) {
    blown_up_points(sp)
        .into_iter()
        .map(|(l, b)| (l, b.distance(pt)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("eight points")
}

/// The Jimbo–Sakai matrix with coordinates `(y, ξ)`.
pub fn js_matrix(pt: &SurfaceCoords, sp: &SurfaceParams) -> Result<MatPoly2> {
    let (y, xi) = pt.chart()?;
    let [c1, c2, c3, c4] = &sp.c;
    let (k1, k2, t1, t2) = (&sp.kappa1, &sp.kappa2, &sp.theta1, &sp.theta2);
    let k12 = k1 * k2;
    let p12 = &(y - c1) * &(y - c2);
    let p34 = &(y - c3) * &(y - c4);
    let a = &(&(&p12 / &(y * xi)) - &(k1 * y)) - &(t1 / y);
    let b = &(&(&(&(&k12 * xi) * &p34) / y) - &(k2 * y)) - &(t2 / y);
    let beta = -(&(&(&(&k12 * &sp.sigma3()) + &(t1 * &b)) + &(t2 * &a)) / y);
    let gamma = &(&(k1 * &b) + &(k2 * &a)) + &(&k12 * &sp.sigma1());
    let prec = sp.prec();
    Ok(MatPoly2::new(
        CPoly::new(prec, vec![t1.clone(), a, k1.clone()]),
        CPoly::new(prec, vec![-y, Cx::one(prec)]),
        CPoly::new(prec, vec![Cx::zero(prec), beta, gamma]),
        CPoly::new(prec, vec![t2.clone(), b, k2.clone()]),
    ))
}

/// `A` conjugated by a constant diagonal matrix so that its 12-entry is monic.
pub fn js_gauge(a: &MatPoly2) -> Result<MatPoly2> {
    match a.e12.degree() {
        Some(1) => Ok(a.diag_conjugate(&a.e12.leading().recip())),
        d => Err(Error::Gauge(d)),
    }
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub coords: SurfaceCoords,
    /// `e22(y) / (κ₁κ₂(y−c₃)(y−c₄))`
    pub xi_alt: Cx,
    /// relative disagreement of the two `ξ` expressions
    pub consistency: f64,
}

/// `y` is the root of the 12-entry; `ξ = (y−c₁)(y−c₂)/e11(y)`, validated
/// against `ξ = e22(y)/(κ₁κ₂(y−c₃)(y−c₄))` to relative `tol`.
pub fn extract_coords(a: &MatPoly2, sp: &SurfaceParams, tol: f64) -> Result<Extraction> {
    let a = js_gauge(a)?;
    let y = -a.e12.coeff(0);
    let [c1, c2, c3, c4] = &sp.c;
    let xi = &(&(&y - c1) * &(&y - c2)) / &a.e11.eval(&y);
    let den = &(&(&sp.kappa1 * &sp.kappa2) * &(&y - c3)) * &(&y - c4);
    let xi_alt = &a.e22.eval(&y) / &den;
    let consistency = xi_alt.rel_err(&xi, 1e-300);
    if !(consistency <= tol) {
        return Err(Error::Consistency(consistency));
    }
    Ok(Extraction {
        coords: SurfaceCoords::new(y, xi),
        xi_alt,
        consistency,
    })
}

/// A quadratic in `ξ`, `[ξ⁰, ξ¹, ξ²]`, at fixed `y`.
type XiQuad = [Cx; 3];

fn eval_quad(p: &XiQuad, xi: &Cx) -> (Cx, f64) {
    let x2 = xi * xi;
    let terms = [p[0].clone(), &p[1] * xi, &p[2] * &x2];
    let scale = terms.iter().map(Cx::abs_f64).sum();
    let v = &(&terms[0] + &terms[1]) + &terms[2];
    (v, scale)
}

/// `S` and `T` of `ỹ = S/(yT)` as quadratics in `ξ`.
pub fn s_t(y: &Cx, sp: &SurfaceParams) -> (XiQuad, XiQuad) {
    let q = Cx::from_real(&sp.q);
    let [c1, c2, c3, c4] = &sp.c;
    let (k1, k2, t1, t2) = (&sp.kappa1, &sp.kappa2, &sp.theta1, &sp.theta2);
    let k12 = k1 * k2;
    let p12 = &(y - c1) * &(y - c2);
    let p34 = &(y - c3) * &(y - c4);
    let y2 = y * y;
    let mix = &(&(&(&q * &q) * k1) * t1) + &(k2 * t2);
    let qk12 = &q * &k12;
    let s = [
        -(&(&(&q * t2) * &p12)),
        &(&(&mix * &y2) - &(&(&qk12 * &sp.sigma3()) * y)) + &(&(&q * t1) * t2).scale_f64(2.0),
        -(&(&(&qk12 * t1) * &p34)),
    ];
    let t = [
        -(&(&(&(&q * &q) * k1) * &p12)),
        &(&(&qk12 * &y2).scale_f64(2.0) - &(&(&qk12 * &sp.sigma1()) * y)) + &mix,
        -(&(&(&k12 * k2) * &p34)),
    ];
    (s, t)
}

/// One step `(y, ξ) ↦ (ỹ, ξ̃)`; returns the image and the stepped parameters.
pub fn phi_step(pt: &SurfaceCoords, sp: &SurfaceParams) -> Result<(SurfaceCoords, SurfaceParams)> {
    let (y, xi) = pt.chart()?;
    let prec = sp.prec();
    let eps = ulp_scale(prec, prec as i32 / 2).to_f64();
    let q = Cx::from_real(&sp.q);
    let [c1, c2, c3, c4] = &sp.c;
    let (k1, k2, t1, t2) = (&sp.kappa1, &sp.kappa2, &sp.theta1, &sp.theta2);

    let indeterminate = |what: &str| {
        let (label, d) = nearest_blown_up(sp, pt);
        Error::Indeterminacy(format!("{what} at (y, ξ) = ({y:?}, {xi:?}); nearest blown-up point {label} at distance {d:.3e}"))
    };

    let (s, t) = s_t(y, sp);
    let (sv, s_scale) = eval_quad(&s, xi);
    let (tv, t_scale) = eval_quad(&t, xi);
    let s_zero = sv.abs_f64() <= eps * s_scale;
    let t_zero = tv.abs_f64() <= eps * t_scale;
    let y_new = match (s_zero, t_zero) {
        (true, true) => return Err(indeterminate("S and T vanish")),
        (false, true) => Proj::Infinity,
        _ => Proj::Finite(&sv / &(y * &tv)),
    };

    let qk2 = &q / k2;
    // ξ(y − shift) − (q/κ₂)(y − sub)
    let factor = |shift: &Cx, sub: &Cx| -> (Cx, f64) {
        let a = xi * &(y - shift);
        let b = &qk2 * &(y - sub);
        let scale = a.abs_f64() + b.abs_f64();
        (&a - &b, scale)
    };
    let qt1k2 = &(&q * t1) / k2;
    let (n1, sn1) = factor(&(&qt1k2 / c1), c2);
    let (n2, sn2) = factor(&(&qt1k2 / c2), c1);
    let qk1 = &q * k1;
    let (d1, sd1) = factor(c4, &(t2 / &(&qk1 * c3)));
    let (d2, sd2) = factor(c3, &(t2 / &(&qk1 * c4)));
    let num_zero = n1.abs_f64() <= eps * sn1 || n2.abs_f64() <= eps * sn2;
    let den_zero = d1.abs_f64() <= eps * sd1 || d2.abs_f64() <= eps * sd2;
    let xi_new = match (num_zero, den_zero) {
        (true, true) => return Err(indeterminate("a numerator and a denominator factor of ξ̃ vanish")),
        (false, true) => Proj::Infinity,
        _ => {
            let pref = &(c1 * c2) / &(&(&qk1 * t1) * xi);
            Proj::Finite(&pref * &(&(&n1 * &n2) / &(&d1 * &d2)))
        }
    };
    Ok((SurfaceCoords { y: y_new, xi: xi_new }, sp.stepped()))
}

/// `steps` applications of [`phi_step`], starting point included.
pub fn iterate(pt: &SurfaceCoords, sp: &SurfaceParams, steps: usize) -> Result<Vec<(SurfaceCoords, SurfaceParams)>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push((pt.clone(), sp.clone()));
    for _ in 0..steps {
        let (p, s) = out.last().expect("nonempty");
        let next = phi_step(p, s)?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct MatrixStep {
    /// `B(qz) A(z) B(z)⁻¹` with `A` in the Jimbo–Sakai gauge
    pub a: MatPoly2,
    pub delta: Cx,
    /// largest coefficient discarded by the division by `z` or by the
    /// shape of the Jimbo–Sakai gauge, relative to the largest kept
    pub division_residual: f64,
    /// `det Ã − q det A`
    pub det_residual: f64,
    /// `Ã_2` diagonal against `(qκ₁, κ₂)` and `Ã_0` diagonal against `(qθ₁, θ₂)`
    pub spectrum_residual: f64,
    /// `w ỹ − q` where the 12-entry is `w(z − ỹ)`
    pub wy_residual: f64,
}

/// `Ã(z) = B(qz) A(z) B(z)⁻¹` with `B(z) = [[z(qκ₁−κ₂), q], [−zβ, qθ₁−θ₂]]`.
pub fn matrix_step(a: &MatPoly2, sp: &SurfaceParams, tol: f64) -> Result<MatrixStep> {
    let a = js_gauge(a)?;
    let prec = sp.prec();
    let q = Cx::from_real(&sp.q);
    let dk = &(&q * &sp.kappa1) - &sp.kappa2;
    let dt = &(&q * &sp.theta1) - &sp.theta2;
    let beta = a.e21.coeff(1);
    let delta = &(&dk * &dt) + &(&q * &beta);
    if !(delta.abs_f64() >= tol) {
        return Err(Error::SingularGauge(delta.abs_f64()));
    }
    let zero = Cx::zero(prec);
    let b_q = MatPoly2::new(
        CPoly::new(prec, vec![zero.clone(), &dk * &q]),
        CPoly::constant(q.clone()),
        CPoly::new(prec, vec![zero.clone(), -(&beta * &q)]),
        CPoly::constant(dt.clone()),
    );
    let adj = MatPoly2::new(
        CPoly::constant(dt.clone()),
        CPoly::constant(-&q),
        CPoly::new(prec, vec![zero.clone(), beta.clone()]),
        CPoly::new(prec, vec![zero, dk]),
    );
    let prod = (&(&b_q * &a) * &adj).scale(&delta.recip());
    let (e11, r11) = prod.e11.shift_down(1);
    let (e12, r12) = prod.e12.shift_down(1);
    let (e21, r21) = prod.e21.shift_down(1);
    let (e22, r22) = prod.e22.shift_down(1);
    let scale = [&e11, &e12, &e21, &e22].iter().map(|e| e.max_abs()).fold(1e-300, f64::max);
    // the 12-entry is linear and the 21-entry vanishes at 0
    let structural = (2..e12.len()).map(|k| e12.coeff(k).abs_f64()).fold(e21.coeff(0).abs_f64(), f64::max);
    let division_residual = r11.max(r12).max(r21).max(r22).max(structural) / scale;
    let mut e21 = e21;
    if !e21.is_empty() {
        e21 = &e21 - &CPoly::constant(e21.coeff(0));
    }
    let at = MatPoly2::new(e11, e12.truncate(2), e21, e22);

    let det_residual = (&at.det() - &a.det().scale(&q)).max_abs() / a.det().max_abs().max(1e-300);
    let new = sp.stepped();
    let spectrum_residual = [
        (at.e11.coeff(2), &new.kappa1),
        (at.e22.coeff(2), &new.kappa2),
        (at.e11.coeff(0), &new.theta1),
        (at.e22.coeff(0), &new.theta2),
    ]
    .iter()
    .map(|(g, w)| g.rel_err(w, 1e-300))
    .fold(0.0, f64::max);
    let wy_residual = (&(-at.e12.coeff(0)) - &q).abs_f64() / q.abs_f64();
    Ok(MatrixStep {
        a: at,
        delta,
        division_residual,
        det_residual,
        spectrum_residual,
        wy_residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorRow {
    pub i: usize,
    /// `S − cᵢyT` against its expanded form (ξ-linear y¹ coefficient `−qκ₁κ₂σ₃ − cᵢ(q²κ₁θ₁+κ₂θ₂)`)
    pub expanded: f64,
    /// against the product of two ξ-linear factors
    pub factored: f64,
    /// expanded form with `+cᵢ(q²κ₁θ₁+κ₂θ₂)` in the y¹ coefficient
    pub expanded_plus_sign: f64,
    /// for `i = 3, 4`: second factor's constant without the factor `q`
    pub factored_without_q: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationReport {
    pub rows: Vec<FactorRow>,
}

impl FactorizationReport {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.expanded.max(r.factored)).fold(0.0, f64::max)
    }
}

fn mul_lin(a: &[Cx; 2], b: &[Cx; 2]) -> XiQuad {
    [&a[0] * &b[0], &(&a[0] * &b[1]) + &(&a[1] * &b[0]), &a[1] * &b[1]]
}

fn quad_dist(a: &XiQuad, b: &XiQuad) -> f64 {
    let scale = a.iter().chain(b.iter()).map(Cx::abs_f64).fold(0.0, f64::max).max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x - y).abs_f64()).fold(0.0, f64::max) / scale
}

/// `S − cᵢyT` for `i = 1…4` as quadratics in `ξ`, against the expanded and
/// factored forms. `i = 2` and `i = 4` are the `c₁↔c₂` and `c₃↔c₄` images of
/// `i = 1` and `i = 3`.
pub fn factorization_check(sp: &SurfaceParams, y: &Cx) -> FactorizationReport {
    let (s, t) = s_t(y, sp);
    let q = Cx::from_real(&sp.q);
    let (k1, k2, t1, t2) = (&sp.kappa1, &sp.kappa2, &sp.theta1, &sp.theta2);
    let k12 = k1 * k2;
    let mix = &(&(&(&q * &q) * k1) * t1) + &(k2 * t2);
    let y2 = y * y;
    let mut rows = Vec::new();
    for i in 0..4 {
        let mut c = sp.c.clone();
        match i {
            1 => c.swap(0, 1),
            3 => c.swap(2, 3),
            _ => {}
        }
        let [c1, c2, c3, c4] = &c;
        let ci = &sp.c[i];
        let cy = ci * y;
        let lhs: XiQuad = [0, 1, 2].map(|k| &s[k] - &(&cy * &t[k]));
        let p12 = &(y - c1) * &(y - c2);
        let p34 = &(y - c3) * &(y - c4);
        let expanded_with = |sign: f64| -> XiQuad {
            let x2 = &(&k12 * &(&(&cy * k2) - &(&q * t1))) * &p34;
            let qk12 = &q * &k12;
            let cubic = &(&qk12 * &cy).scale_f64(-2.0) * &y2;
            let square = &(&mix + &(&(&qk12 * ci) * &sp.sigma1())) * &y2;
            let linear = &(-(&qk12 * &sp.sigma3()) + (ci * &mix).scale_f64(sign)) * y;
            let x1 = &(&(&cubic + &square) + &linear) + &(&(&q * t1) * t2).scale_f64(2.0);
            let x0 = &(&q * &(&(&(&q * &cy) * k1) - t2)) * &p12;
            [x0, x1, x2]
        };
        let expanded = quad_dist(&lhs, &expanded_with(-1.0));
        let expanded_plus_sign = quad_dist(&lhs, &expanded_with(1.0));
        let (factored, factored_without_q) = if i < 2 {
            // (ξ(cᵢyκ₂ − qθ₁) − qcᵢ(y−c₂)) (κ₁κ₂ξ(y−c₃)(y−c₄) − (qcᵢκ₁y − θ₂)(y−cᵢ)/cᵢ)
            let f1 = [-(&(&q * ci) * &(y - c2)), &(&cy * k2) - &(&q * t1)];
            let f2 = [
                -(&(&(&(&(&q * &cy) * k1) - t2) * &(y - c1)) / ci),
                &k12 * &p34,
            ];
            (quad_dist(&lhs, &mul_lin(&f1, &f2)), None)
        } else {
            // (ξ(y−c₄) − (qcᵢκ₁y − θ₂)/(κ₁κ₂cᵢ)) (κ₁κ₂ξ(y−cᵢ)(cᵢyκ₂ − qθ₁) − qκ₁κ₂cᵢ(y−c₁)(y−c₂))
            let f1 = [-(&(&(&(&q * &cy) * k1) - t2) / &(&k12 * ci)), y - c4];
            let g1 = &(&k12 * &(y - c3)) * &(&(&cy * k2) - &(&q * t1));
            let with_q = [-(&(&(&q * &k12) * ci) * &p12), g1.clone()];
            let without_q = [-(&(&k12 * ci) * &p12), g1];
            (
                quad_dist(&lhs, &mul_lin(&f1, &with_q)),
                Some(quad_dist(&lhs, &mul_lin(&f1, &without_q))),
            )
        };
        rows.push(FactorRow {
            i: i + 1,
            expanded,
            factored,
            expanded_plus_sign,
            factored_without_q,
        });
    }
    FactorizationReport { rows }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitResiduals {
    /// distance to the coordinates extracted from the fitted `A_n`
    pub verblunsky: f64,
    /// distance to the coordinates extracted from the conjugated previous matrix
    pub matrix: Option<f64>,
    pub xi_consistency: f64,
    pub constraint: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitRecord {
    pub n: usize,
    pub y: Option<[f64; 2]>,
    pub xi: Option<[f64; 2]>,
    pub params: SurfaceParamsJson,
    pub residuals: OrbitResiduals,
}

/// Iterates `φ` from the coordinates of `fits[0]` and compares each iterate
/// with the coordinates of the fitted `A_n` and with the matrix route.
/// `fits` must be consecutive in `n`.
pub fn weight_orbit(p: &QWeightParams, fits: &[LaxFit], tol: f64) -> Result<Vec<OrbitRecord>> {
    let first = fits.first().ok_or_else(|| Error::Config("empty orbit".into()))?;
    let mut sp = params_from_weight(p, first.n, tol)?;
    let mut pt = extract_coords(&first.a, &sp, tol)?.coords;
    let mut prev_a: Option<MatPoly2> = None;
    let mut out = Vec::with_capacity(fits.len());
    for (k, fit) in fits.iter().enumerate() {
        if fit.n != first.n + k {
            return Err(Error::Config("fits must be consecutive".into()));
        }
        let ex = extract_coords(&fit.a, &sp, tol)?;
        let matrix = match &prev_a {
            Some(a) => {
                let prev_sp = params_from_weight(p, fit.n - 1, tol)?;
                let st = matrix_step(a, &prev_sp, tol)?;
                Some(extract_coords(&st.a, &sp, tol)?.coords.distance(&pt))
            }
            None => None,
        };
        out.push(OrbitRecord {
            n: fit.n,
            y: pt.y.to_pair(),
            xi: pt.xi.to_pair(),
            params: sp.to_json(),
            residuals: OrbitResiduals {
                verblunsky: ex.coords.distance(&pt),
                matrix,
                xi_consistency: ex.consistency,
                constraint: sp.constraint_residual(),
            },
        });
        prev_a = Some(fit.a.clone());
        if k + 1 < fits.len() {
            let (np, ns) = phi_step(&pt, &sp)?;
            pt = np;
            sp = ns;
        }
    }
    Ok(out)
}

/// A point with modulus in `[0.5, 2)` and uniform argument.
pub fn random_unit_annulus<R: rand::Rng>(rng: &mut R, prec: u32) -> Cx {
    let r = rng.gen_range(0.5..2.0);
    let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    Cx::new(prec, r * t.cos(), r * t.sin())
}

/// Random parameters on the constraint, with `θ₂` solved for.
pub fn random_params<R: rand::Rng>(rng: &mut R, prec: u32, q: f64) -> SurfaceParams {
    let c: [Cx; 4] = std::array::from_fn(|_| random_unit_annulus(rng, prec));
    let k1 = random_unit_annulus(rng, prec);
    let k2 = random_unit_annulus(rng, prec);
    let t1 = random_unit_annulus(rng, prec);
    let t2 = &c.iter().fold(&k1 * &k2, |s, x| &s * x) / &t1;
    SurfaceParams::new(k1, k2, t1, t2, c, crate::mp::real(prec, q), 1e-30).expect("generic parameters")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const PREC: u32 = 160;

    fn rc(rng: &mut ChaCha8Rng) -> Cx {
        random_unit_annulus(rng, PREC)
    }

    pub(crate) fn random_params(rng: &mut ChaCha8Rng) -> SurfaceParams {
        super::random_params(rng, PREC, 0.7)
    }

    #[test]
    fn weight_params_satisfy_constraint() {
        let p = QWeightParams::new([0.3, 0.2], [0.4, -0.25], 0.5, 128).unwrap();
        for n in 1..6 {
            let sp = params_from_weight(&p, n, 1e-30).unwrap();
            assert!(sp.constraint_residual() < 1e-35);
        }
        assert!(matches!(params_from_weight(&p, 0, 1e-30), Err(Error::Config(_))));
    }

    #[test]
    fn constraint_violation_is_reported() {
        let one = Cx::one(PREC);
        let two = Cx::new(PREC, 2.0, 0.0);
        let c = [one.clone(), one.clone(), one.clone(), one.clone()];
        let e = SurfaceParams::new(one.clone(), two, one, Cx::new(PREC, 3.0, 0.0), c, crate::mp::real(PREC, 0.5), 1e-20);
        assert!(matches!(e, Err(Error::Constraint(_))));
    }

    #[test]
    fn js_matrix_has_the_right_determinant_and_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let sp = random_params(&mut rng);
            let pt = SurfaceCoords::new(rc(&mut rng), rc(&mut rng));
            let a = js_matrix(&pt, &sp).unwrap();
            let want = CPoly::from_roots(&sp.kappa1 * &sp.kappa2, &sp.c);
            assert!((&a.det() - &want).max_abs() < 1e-35);
            let ex = extract_coords(&a.scale(&Cx::one(PREC)).diag_conjugate(&rc(&mut rng)), &sp, 1e-30).unwrap();
            assert!(ex.coords.distance(&pt) < 1e-35);
        }
    }

    #[test]
    fn gauge_error_on_wrong_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sp = random_params(&mut rng);
        let mut a = js_matrix(&SurfaceCoords::new(rc(&mut rng), rc(&mut rng)), &sp).unwrap();
        a.e12 = CPoly::constant(Cx::one(PREC));
        assert_eq!(extract_coords(&a, &sp, 1e-20).unwrap_err(), Error::Gauge(Some(0)));
    }

    #[test]
    fn coordinate_and_matrix_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let sp = random_params(&mut rng);
            let pt = SurfaceCoords::new(rc(&mut rng), rc(&mut rng));
            let (img, sp1) = phi_step(&pt, &sp).unwrap();
            let st = matrix_step(&js_matrix(&pt, &sp).unwrap(), &sp, 1e-30).unwrap();
            assert!(st.division_residual < 1e-35);
            assert!(st.det_residual < 1e-35);
            assert!(st.spectrum_residual < 1e-35);
            assert!(st.wy_residual < 1e-35);
            let ex = extract_coords(&st.a, &sp1, 1e-30).unwrap();
            assert!(ex.coords.distance(&img) < 1e-30, "{}", ex.coords.distance(&img));
            assert!(sp1.constraint_residual() < 1e-35);
        }
    }

    #[test]
    fn factorizations_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let sp = random_params(&mut rng);
            let rep = factorization_check(&sp, &rc(&mut rng));
            for r in &rep.rows {
                assert!(r.expanded < 1e-35 && r.factored < 1e-35, "{r:?}");
                assert!(r.expanded_plus_sign > 1e-6);
                if let Some(w) = r.factored_without_q {
                    assert!(w > 1e-6);
                }
            }
        }
    }

    #[test]
    fn indeterminacy_at_blown_up_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sp = random_params(&mut rng);
        let c1c2 = &sp.c[0] * &sp.c[1];
        // y → 0 along ξ = c₁c₂/θ₁: S and yT both vanish to first order
        let y = Cx::new(PREC, 1e-60, 0.0);
        let pt = SurfaceCoords::new(y, &c1c2 / &sp.theta1);
        match phi_step(&pt, &sp) {
            Err(Error::Indeterminacy(msg)) => assert!(msg.contains("(0, c1c2/theta1)"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let off = SurfaceCoords::new(Cx::zero(PREC), Cx::one(PREC));
        assert!(matches!(phi_step(&off, &sp), Err(Error::Chart(_))));
    }

    #[test]
    fn parameters_flow_multiplicatively() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sp = random_params(&mut rng);
        let pt = SurfaceCoords::new(rc(&mut rng), rc(&mut rng));
        let orbit = iterate(&pt, &sp, 5).unwrap();
        let q5 = Cx::from_real(&sp.q).powu(5);
        let last = &orbit[5].1;
        assert!(last.kappa1.rel_err(&(&sp.kappa1 * &q5), 0.0) < 1e-40);
        assert!(last.theta1.rel_err(&(&sp.theta1 * &q5), 0.0) < 1e-40);
        assert_eq!(last.kappa2, sp.kappa2);
        assert_eq!(last.theta2, sp.theta2);
        assert!(last.constraint_residual() < 1e-35);
    }

    #[test]
    fn orbit_follows_the_orthogonal_polynomials() {
        use crate::laxpair::lax_chain;
        use crate::opuc::verblunsky_from_moments;
        use crate::qseries::{default_nodes, moments};
        let p = QWeightParams::new([0.3, 0.2], [0.5, 0.0], 0.5, 192).unwrap();
        let k = 12 + 8;
        let t = moments(&p, k, default_nodes(k, 192), true, None).unwrap();
        let vt = verblunsky_from_moments(&t, 13).unwrap();
        let chain = lax_chain(&vt, &p, &t, 12, 1e-40).unwrap();
        let orbit = weight_orbit(&p, &chain.fits, 1e-30).unwrap();
        assert_eq!(orbit.len(), 12);
        for r in &orbit {
            assert!(r.residuals.verblunsky < 1e-25, "{r:?}");
            assert!(r.residuals.matrix.unwrap_or(0.0) < 1e-25, "{r:?}");
            assert!(r.residuals.xi_consistency < 1e-30);
        }
        // y_n is the root of Θ_n
        for fit in &chain.fits {
            let sp = params_from_weight(&p, fit.n, 1e-30).unwrap();
            let y = extract_coords(&fit.a, &sp, 1e-30).unwrap().coords.y;
            let want = crate::laxpair::theta_closed_form(&p, &vt, fit.n).div_linear(&Cx::zero(192));
            let root = -(&want.1 / &want.0.coeff(0));
            assert!(Proj::Finite(root).chordal(&y) < 1e-30);
        }
    }
}
