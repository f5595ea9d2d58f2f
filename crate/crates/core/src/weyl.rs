//! Picard-lattice arithmetic and the affine Weyl group action.
//!
//! The lattice side is exact: vectors and matrices over `BigInt` in the basis
//! `E₀…E₉` with form `diag(1, −1, …, −1)`. The birational side acts on
//! `(b₁…b₈; f, g)`, the `ℙ¹×ℙ¹` model blown up at
//! `(0,b₁), (0,b₂), (∞,b₃), (∞,b₄), (b₅,0), (b₆,0), (b₇,∞), (b₈,∞)`.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mp::{ulp_scale, Cx};
use crate::painleve::{phi_step, Proj, SurfaceCoords, SurfaceParams};

#[derive(Clone, PartialEq, Eq)]
pub struct PicVec(pub [BigInt; 10]);

impl PicVec {
    pub fn zero() -> Self {
        PicVec(std::array::from_fn(|_| BigInt::from(0)))
    }

    pub fn from_i64(v: [i64; 10]) -> Self {
        PicVec(v.map(BigInt::from))
    }

    /// `E_i`
    pub fn e(i: usize) -> Self {
        let mut v = PicVec::zero();
        v.0[i] = BigInt::from(1);
        v
    }

    /// `u₀v₀ − Σ uᵢvᵢ`
    pub fn dot(&self, o: &PicVec) -> BigInt {
        let mut s = &self.0[0] * &o.0[0];
        for i in 1..10 {
            s -= &self.0[i] * &o.0[i];
        }
        s
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        PicVec(std::array::from_fn(|i| &self.0[i] * k))
    }

    pub fn to_i64(&self) -> Vec<i64> {
        self.0.iter().map(|x| i64::try_from(x).unwrap_or(i64::MAX)).collect()
    }
}

impl fmt::Debug for PicVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_i64())
    }
}

impl Add for &PicVec {
    type Output = PicVec;
    fn add(self, o: &PicVec) -> PicVec {
        PicVec(std::array::from_fn(|i| &self.0[i] + &o.0[i]))
    }
}

impl Sub for &PicVec {
    type Output = PicVec;
    fn sub(self, o: &PicVec) -> PicVec {
        PicVec(std::array::from_fn(|i| &self.0[i] - &o.0[i]))
    }
}

impl Neg for &PicVec {
    type Output = PicVec;
    fn neg(self) -> PicVec {
        PicVec(std::array::from_fn(|i| -&self.0[i]))
    }
}

/// A lattice map; column `j` is the image of `E_j`.
#[derive(Clone, PartialEq, Eq)]
pub struct PicMap(pub [[BigInt; 10]; 10]);

impl PicMap {
    pub fn identity() -> Self {
        PicMap(std::array::from_fn(|i| std::array::from_fn(|j| BigInt::from((i == j) as i64))))
    }

    pub fn from_rows(rows: [[i64; 10]; 10]) -> Self {
        PicMap(rows.map(|r| r.map(BigInt::from)))
    }

    pub fn from_columns(cols: &[PicVec; 10]) -> Self {
        PicMap(std::array::from_fn(|i| std::array::from_fn(|j| cols[j].0[i].clone())))
    }

    pub fn column(&self, j: usize) -> PicVec {
        PicVec(std::array::from_fn(|i| self.0[i][j].clone()))
    }

    pub fn apply(&self, v: &PicVec) -> PicVec {
        PicVec(std::array::from_fn(|i| {
            let mut s = BigInt::from(0);
            for j in 0..10 {
                s += &self.0[i][j] * &v.0[j];
            }
            s
        }))
    }

    /// `self ∘ o`
    pub fn compose(&self, o: &PicMap) -> PicMap {
        PicMap::from_columns(&std::array::from_fn(|j| self.apply(&o.column(j))))
    }

    /// `⟨Mu, Mv⟩ = ⟨u, v⟩` on all basis pairs.
    pub fn is_isometry(&self) -> bool {
        (0..10).all(|i| {
            (0..10).all(|j| self.column(i).dot(&self.column(j)) == PicVec::e(i).dot(&PicVec::e(j)))
        })
    }

    pub fn rows_i64(&self) -> Vec<Vec<i64>> {
        self.0
            .iter()
            .map(|r| r.iter().map(|x| i64::try_from(x).unwrap_or(i64::MAX)).collect())
            .collect()
    }
}

impl fmt::Debug for PicMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows_i64())
    }
}

pub struct PicConstants {
    pub delta: PicVec,
    pub d: [PicVec; 4],
    pub alpha: [PicVec; 6],
    /// `F₁…F₈` in the `E` basis
    pub f: [PicVec; 8],
}

fn pv(terms: &[(usize, i64)]) -> PicVec {
    let mut v = PicVec::zero();
    for &(i, c) in terms {
        v.0[i] += c;
    }
    v
}

pub fn pic_constants() -> PicConstants {
    let mut delta = PicVec::from_i64([-1; 10]);
    delta.0[0] = BigInt::from(3);
    PicConstants {
        delta,
        d: [
            pv(&[(8, 1), (9, -1)]),
            pv(&[(0, 1), (6, -1), (7, -1), (8, -1)]),
            pv(&[(0, 1), (1, -1), (2, -1), (3, -1)]),
            pv(&[(0, 1), (4, -1), (5, -1), (8, -1)]),
        ],
        alpha: [
            pv(&[(0, 1), (1, -1), (8, -1), (9, -1)]),
            pv(&[(2, 1), (3, -1)]),
            pv(&[(1, 1), (2, -1)]),
            pv(&[(0, 1), (1, -1), (4, -1), (6, -1)]),
            pv(&[(6, 1), (7, -1)]),
            pv(&[(4, 1), (5, -1)]),
        ],
        f: [
            pv(&[(2, 1)]),
            pv(&[(3, 1)]),
            pv(&[(0, 1), (1, -1), (8, -1)]),
            pv(&[(9, 1)]),
            pv(&[(4, 1)]),
            pv(&[(5, 1)]),
            pv(&[(6, 1)]),
            pv(&[(7, 1)]),
        ],
    }
}

/// The translation `φ` on the Picard lattice.
pub fn phi_pic() -> PicMap {
    PicMap::from_rows([
        [6, 2, 2, 2, 3, 0, 0, 3, 2, 1],
        [-2, 0, -1, -1, -1, 0, 0, -1, -1, 0],
        [-2, -1, 0, -1, -1, 0, 0, -1, -1, 0],
        [-2, -1, -1, 0, -1, 0, 0, -1, -1, 0],
        [0, 0, 0, 0, 0, 0, 1, 0, 0, 0],
        [-3, -1, -1, -1, -2, 0, 0, -1, -1, -1],
        [-3, -1, -1, -1, -1, 0, 0, -2, -1, -1],
        [0, 0, 0, 0, 0, 1, 0, 0, 0, 0],
        [-2, -1, -1, -1, -1, 0, 0, -1, 0, 0],
        [-1, 0, 0, 0, -1, 0, 0, -1, 0, 0],
    ])
}

/// `v ↦ v + ⟨v, αᵢ⟩ αᵢ`
pub fn reflection(i: usize) -> PicMap {
    let a = &pic_constants().alpha[i];
    PicMap::from_columns(&std::array::from_fn(|j| {
        let e = PicVec::e(j);
        &e + &a.scale(&e.dot(a))
    }))
}

/// The reduced word of the translation, leftmost first.
pub const REDUCED_WORD: [usize; 8] = [4, 3, 2, 0, 1, 2, 3, 4];

/// `w₄w₃w₂w₀w₁w₂w₃w₄` as a lattice map.
pub fn word_pic() -> PicMap {
    REDUCED_WORD
        .iter()
        .fold(PicMap::identity(), |m, &i| m.compose(&reflection(i)))
}

/// `σ = φ · (w₄w₃w₂w₀w₁w₂w₃w₄)⁻¹`; reflections are involutions so the
/// inverse is the reversed word.
pub fn sigma_pic() -> PicMap {
    let inv = REDUCED_WORD
        .iter()
        .rev()
        .fold(PicMap::identity(), |m, &i| m.compose(&reflection(i)));
    phi_pic().compose(&inv)
}

#[derive(Clone, Debug, Serialize)]
pub struct PicardReport {
    pub isometry: bool,
    pub fixes_delta: bool,
    pub delta_from_roots: bool,
    pub roots_normalized: bool,
    pub cartan_d5: bool,
    /// `φ(D_i) = D̃_{perm[i]}`
    pub d_permutation: Vec<Option<usize>>,
    pub d_permutation_expected: bool,
    pub alpha_fixed: bool,
    pub alpha4_shift: bool,
    pub alpha5_shift: bool,
    pub e2_image: bool,
    /// the diagram automorphism `σ` maps `αᵢ` to `α_{perm[i]}`
    pub sigma_root_permutation: Vec<Option<usize>>,
    pub sigma_swaps_expected: bool,
    pub matrix: Vec<Vec<i64>>,
}

impl PicardReport {
    pub fn passed(&self) -> bool {
        self.isometry
            && self.fixes_delta
            && self.delta_from_roots
            && self.roots_normalized
            && self.cartan_d5
            && self.d_permutation_expected
            && self.alpha_fixed
            && self.alpha4_shift
            && self.alpha5_shift
            && self.e2_image
            && self.sigma_swaps_expected
    }
}

fn index_of(v: &PicVec, list: &[PicVec]) -> Option<usize> {
    list.iter().position(|w| w == v)
}

/// Every lattice statement about `φ`, as exact integer identities.
pub fn check_translation(m: &PicMap) -> PicardReport {
    let k = pic_constants();
    let a = &k.alpha;
    let comb = [1, 1, 2, 2, 1, 1]
        .iter()
        .zip(a.iter())
        .fold(PicVec::zero(), |s, (c, v)| &s + &v.scale(&BigInt::from(*c)));
    let adjacent = [(0, 2), (1, 2), (2, 3), (3, 4), (3, 5)];
    let cartan_d5 = (0..6).all(|i| {
        (0..6).all(|j| {
            let want = if i == j {
                -2
            } else if adjacent.contains(&(i.min(j), i.max(j))) {
                1
            } else {
                0
            };
            a[i].dot(&a[j]) == BigInt::from(want)
        })
    });
    let d_permutation: Vec<Option<usize>> = k.d.iter().map(|d| index_of(&m.apply(d), &k.d)).collect();
    let sigma = sigma_pic();
    let sigma_root_permutation: Vec<Option<usize>> = a.iter().map(|r| index_of(&sigma.apply(r), a)).collect();
    PicardReport {
        isometry: m.is_isometry(),
        fixes_delta: m.apply(&k.delta) == k.delta,
        delta_from_roots: comb == k.delta,
        roots_normalized: a.iter().all(|r| r.dot(r) == BigInt::from(-2)) && k.delta.dot(&k.delta) == BigInt::from(0),
        cartan_d5,
        d_permutation_expected: d_permutation == vec![Some(2), Some(3), Some(0), Some(1)],
        d_permutation,
        alpha_fixed: (0..4).all(|i| m.apply(&a[i]) == a[i]),
        alpha4_shift: m.apply(&a[4]) == &a[4] - &k.delta,
        alpha5_shift: m.apply(&a[5]) == &a[5] + &k.delta,
        e2_image: m.apply(&PicVec::e(2)) == pv(&[(0, 2), (1, -1), (3, -1), (5, -1), (6, -1), (8, -1)]),
        sigma_swaps_expected: sigma.is_isometry()
            && sigma_root_permutation.first() == Some(&Some(1))
            && sigma_root_permutation.get(4) == Some(&Some(5)),
        sigma_root_permutation,
        matrix: m.rows_i64(),
    }
}

/// A point `(f, g)` of `ℙ¹×ℙ¹` with its eight parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct BPoint {
    pub b: [Cx; 8],
    pub f: Proj,
    pub g: Proj,
}

impl BPoint {
    pub fn new(b: [Cx; 8], f: Cx, g: Cx) -> Self {
        BPoint {
            b,
            f: Proj::Finite(f),
            g: Proj::Finite(g),
        }
    }

    pub fn fg(&self) -> Result<(&Cx, &Cx)> {
        match (&self.f, &self.g) {
            (Proj::Finite(f), Proj::Finite(g)) => Ok((f, g)),
            _ => Err(Error::Chart("point at infinity".into())),
        }
    }

    /// `b₃b₄b₅b₆/(b₁b₂b₇b₈)`
    pub fn q_sakai(&self) -> Cx {
        let b = &self.b;
        &(&(&b[2] * &b[3]) * &(&b[4] * &b[5])) / &(&(&b[0] * &b[1]) * &(&b[6] * &b[7]))
    }

    /// Representative with `b₄ = b₈ = 1` under the torus
    /// `(g, b₁…b₄) ↦ μ(·)`, `(f, b₅…b₈) ↦ λ(·)`.
    pub fn canonical(&self) -> Result<BPoint> {
        let (f, g) = self.fg()?;
        let mu = self.b[3].recip();
        let lam = self.b[7].recip();
        let b = std::array::from_fn(|i| if i < 4 { &self.b[i] * &mu } else { &self.b[i] * &lam });
        Ok(BPoint::new(b, f * &lam, g * &mu))
    }

    /// Largest relative difference over parameters and coordinates.
    pub fn rel_dist(&self, o: &BPoint) -> Result<f64> {
        let (f, g) = self.fg()?;
        let (of, og) = o.fg()?;
        Ok(self
            .b
            .iter()
            .zip(&o.b)
            .chain([(f, of), (g, og)])
            .map(|(x, y)| x.rel_err(y, 1e-300))
            .fold(0.0, f64::max))
    }

    /// The same point up to the torus.
    pub fn torus_dist(&self, o: &BPoint) -> Result<f64> {
        self.canonical()?.rel_dist(&o.canonical()?)
    }
}

/// `a₁…a₈` of the `ℙ²` chart.
#[derive(Clone, Debug)]
pub struct AParams(pub [Cx; 8]);

pub fn to_a(b: &[Cx; 8]) -> AParams {
    let a1 = b[2].recip();
    let a4 = -(&(&b[6] * &a1).recip());
    let a5 = -(&(&b[7] * &a1).recip());
    AParams([a1, b[0].recip(), b[1].recip(), a4, a5, b[4].clone(), b[5].clone(), b[3].clone()])
}

pub fn to_b(a: &AParams) -> [Cx; 8] {
    let a = &a.0;
    [
        a[1].recip(),
        a[2].recip(),
        a[0].recip(),
        a[7].clone(),
        a[5].clone(),
        a[6].clone(),
        -(&(&a[3] * &a[0]).recip()),
        -(&(&a[4] * &a[0]).recip()),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Reflection {
    W0,
    W1,
    W2,
    W3,
    W4,
    W5,
    Sigma,
}

impl Reflection {
    pub fn from_index(i: usize) -> Option<Self> {
        [Self::W0, Self::W1, Self::W2, Self::W3, Self::W4, Self::W5].get(i).copied()
    }
}

fn guard(den: &Cx, scale: f64, what: &str) -> Result<()> {
    let eps = ulp_scale(den.prec(), den.prec() as i32 / 2).to_f64();
    if den.abs_f64() <= eps * scale.max(1e-300) {
        Err(Error::Indeterminacy(what.to_string()))
    } else {
        Ok(())
    }
}

fn transpose_a(pt: &BPoint, i: usize, j: usize) -> BPoint {
    let mut a = to_a(&pt.b);
    a.0.swap(i, j);
    BPoint {
        b: to_b(&a),
        ..pt.clone()
    }
}

pub fn elementary(w: Reflection, pt: &BPoint) -> Result<BPoint> {
    let b = &pt.b;
    match w {
        Reflection::W1 => Ok(transpose_a(pt, 1, 2)),
        Reflection::W4 => Ok(transpose_a(pt, 3, 4)),
        Reflection::W5 => Ok(transpose_a(pt, 5, 6)),
        Reflection::W0 => {
            let (f, g) = pt.fg()?;
            let a = to_a(b);
            let (a1, a8) = (&a.0[0], &a.0[7]);
            // (x : y : z) = (1 : f(1 − a₁g) : g)
            let one = Cx::one(f.prec());
            let lin = &one - &(a1 * g);
            let y = f * &lin;
            let xx = lin.clone();
            let zz = g * &lin;
            let yy = &(a8 * &y) * &(&one - &(g / a8));
            let mut na = a.clone();
            na.0[0] = a8.recip();
            na.0[7] = a1.recip();
            na.0[3] = a1 * &a.0[3];
            na.0[4] = a1 * &a.0[4];
            na.0[5] = a8 * &a.0[5];
            na.0[6] = a8 * &a.0[6];
            let den = &xx - &(&na.0[0] * &zz);
            guard(&xx, one.abs_f64() + zz.abs_f64(), "w0: x(x − a₁z) vanishes")?;
            guard(&den, xx.abs_f64() + zz.abs_f64(), "w0: chart change singular")?;
            Ok(BPoint::new(to_b(&na), &yy / &den, &zz / &xx))
        }
        Reflection::W2 => {
            let (f, g) = pt.fg()?;
            let den = g - &b[0];
            guard(&den, g.abs_f64() + b[0].abs_f64(), "w2: g = b₁")?;
            let r = &b[2] / &b[0];
            let nb = [
                b[2].clone(),
                b[1].clone(),
                b[0].clone(),
                b[3].clone(),
                &b[4] * &r,
                &b[5] * &r,
                b[6].clone(),
                b[7].clone(),
            ];
            Ok(BPoint::new(nb, &(f * &(g - &b[2])) / &den, g.clone()))
        }
        Reflection::W3 => {
            let (f, g) = pt.fg()?;
            let den = f - &b[4];
            guard(&den, f.abs_f64() + b[4].abs_f64(), "w3: f = b₅")?;
            let r = &b[4] / &b[6];
            let nb = [
                b[0].clone(),
                b[1].clone(),
                &b[2] * &r,
                &b[3] * &r,
                b[6].clone(),
                b[5].clone(),
                b[4].clone(),
                b[7].clone(),
            ];
            Ok(BPoint::new(nb, f.clone(), &(&(&r * g) * &(f - &b[6])) / &den))
        }
        Reflection::Sigma => {
            let (f, g) = pt.fg()?;
            guard(f, 1.0, "σ: f = 0")?;
            guard(g, 1.0, "σ: g = 0")?;
            let mu = &b[2] * &b[3];
            let lam = &b[6] * &b[7];
            let nb = [
                b[3].clone(),
                b[2].clone(),
                &mu / &b[0],
                &mu / &b[1],
                b[7].clone(),
                b[6].clone(),
                &lam / &b[4],
                &lam / &b[5],
            ];
            Ok(BPoint::new(nb, &lam / f, &mu / g))
        }
    }
}

/// `σ w₄ w₃ w₂ w₀ w₁ w₂ w₃ w₄`, rightmost applied first.
pub fn composite_map(pt: &BPoint) -> Result<BPoint> {
    let mut cur = pt.clone();
    for &i in REDUCED_WORD.iter().rev() {
        cur = elementary(Reflection::from_index(i).expect("index < 6"), &cur)?;
    }
    elementary(Reflection::Sigma, &cur)
}

/// The closed forms `(f̄, ḡ)` of the composite.
pub fn closed_form_fg(pt: &BPoint) -> Result<(Cx, Cx)> {
    let (f, g) = pt.fg()?;
    let [b1, b2, b3, b4, b5, _, b7, b8] = &pt.b;
    let lin = |shift: &Cx, sub: &Cx| &(f * &(g - shift)) - &(b8 * &(g - sub));
    let fb = &(&(&(b1 * b2) * b8) / &(b5 * f))
        * &(&(&lin(&(&(b1 * b8) / b5), b1) * &lin(&(&(b2 * b8) / b5), b2))
            / &(&lin(b3, &(&(b3 * b5) / b8)) * &lin(b4, &(&(b4 * b5) / b8))));
    let gg = &(g * &(f - b8)) / &(f - b5);
    let inner = &(f * &(&(&gg - b3) / &(&gg - &(&(b1 * b8) / b5))))
        * &(&(&gg - b4) / &(&gg - &(&(b2 * b8) / b5)));
    let c = &(&(b3 * b4) * &(b5 * b5)) / &(&(b1 * b2) * b8);
    let gb = &(&(&(b5 * b7) / g) * &(&(f - b5) / &(f - b8))) * &(&(&inner - &c) / &(&inner - b5));
    if !(fb.is_finite() && gb.is_finite()) {
        return Err(Error::Indeterminacy("closed form singular".into()));
    }
    Ok((fb, gb))
}

/// Surface data of a point: `c = (b₁…b₄)`, `θ₁ = b₁b₂/b₅`, `θ₂ = b₁b₂/b₆`,
/// `κ₁ = 1/b₇`, `κ₂ = q/b₈` with `q = 1/q_S`, and `(y, ξ) = (g, f)`.
/// `q_S` must be real and positive.
pub fn to_surface(pt: &BPoint, tol: f64) -> Result<(SurfaceCoords, SurfaceParams)> {
    let (f, g) = pt.fg()?;
    let qs = pt.q_sakai();
    if qs.im().to_f64().abs() > tol * qs.abs_f64() || qs.re().is_sign_negative() {
        return Err(Error::Config(format!("q = {:?} is not real and positive", qs.recip())));
    }
    let q = qs.re().clone().recip();
    let b = &pt.b;
    let b12 = &b[0] * &b[1];
    let sp = SurfaceParams::new(
        b[6].recip(),
        &Cx::from_real(&q) / &b[7],
        &b12 / &b[4],
        &b12 / &b[5],
        [b[0].clone(), b[1].clone(), b[2].clone(), b[3].clone()],
        q,
        tol,
    )?;
    Ok((SurfaceCoords::new(g.clone(), f.clone()), sp))
}

pub fn from_surface(pt: &SurfaceCoords, sp: &SurfaceParams) -> BPoint {
    let c12 = &sp.c[0] * &sp.c[1];
    let b = [
        sp.c[0].clone(),
        sp.c[1].clone(),
        sp.c[2].clone(),
        sp.c[3].clone(),
        &c12 / &sp.theta1,
        &c12 / &sp.theta2,
        sp.kappa1.recip(),
        &Cx::from_real(&sp.q) / &sp.kappa2,
    ];
    BPoint {
        b,
        f: pt.xi.clone(),
        g: pt.y.clone(),
    }
}

/// `phi_step` seen through the dictionary.
pub fn phi_via_surface(pt: &BPoint, tol: f64) -> Result<BPoint> {
    let (c, sp) = to_surface(pt, tol)?;
    let (c1, sp1) = phi_step(&c, &sp)?;
    Ok(from_surface(&c1, &sp1))
}

#[derive(Clone, Debug, Serialize)]
pub struct CompositeRow {
    /// composite against `phi_step`, both in canonical torus gauge
    pub vs_phi_step: f64,
    /// `f̄ / ξ̃` against `(b₁b₂b₈)²/(b₃b₄b₅³b₆)`
    pub closed_form_f: f64,
    /// `ḡ / ỹ` against `b₅²b₇/(b₁b₂b₈)`
    pub closed_form_g: f64,
}

/// Gauge factors relating the closed forms to `(ξ̃, ỹ)`.
pub fn closed_form_gauge(b: &[Cx; 8]) -> (Cx, Cx) {
    let [b1, b2, b3, b4, b5, b6, b7, b8] = b;
    let b128 = &(b1 * b2) * b8;
    let gf = &(&b128 * &b128) / &(&(&(b3 * b4) * &(b5 * &(b5 * b5))) * b6);
    let gg = &(&(b5 * b5) * b7) / &b128;
    (gf, gg)
}

pub fn composite_row(pt: &BPoint, tol: f64) -> Result<CompositeRow> {
    let comp = composite_map(pt)?;
    let phi = phi_via_surface(pt, tol)?;
    let (pf, pg) = closed_form_fg(pt)?;
    let (xf, yg) = phi.fg()?;
    let (gf, gg) = closed_form_gauge(&pt.b);
    Ok(CompositeRow {
        vs_phi_step: comp.torus_dist(&phi)?,
        closed_form_f: (&pf / xf).rel_err(&gf, 1e-300),
        closed_form_g: (&pg / yg).rel_err(&gg, 1e-300),
    })
}

/// Random parameters and point, with `b₈` chosen so that `q_S ∈ (1.2, 2)` is real.
pub fn random_point<R: rand::Rng>(rng: &mut R, prec: u32) -> BPoint {
    let mut rc = || Cx::new(prec, rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5));
    let mut b: [Cx; 8] = std::array::from_fn(|_| rc());
    let (f, g) = (rc(), rc());
    let qs = Cx::new(prec, rng.gen_range(1.2..2.0), 0.0);
    b[7] = &(&(&b[2] * &b[3]) * &(&b[4] * &b[5])) / &(&(&(&b[0] * &b[1]) * &b[6]) * &qs);
    BPoint::new(b, f, g)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const PREC: u32 = 128;

    pub(crate) fn random_point(rng: &mut ChaCha8Rng) -> BPoint {
        super::random_point(rng, PREC)
    }

    #[test]
    fn lattice_constants() {
        let k = pic_constants();
        assert_eq!(k.delta.dot(&k.delta), BigInt::from(0));
        for d in &k.d {
            assert_eq!(d.dot(&k.delta), BigInt::from(0));
            for a in &k.alpha {
                assert_eq!(d.dot(a), BigInt::from(0));
            }
        }
        for f in &k.f {
            assert_eq!(f.dot(f), BigInt::from(-1));
        }
    }

    #[test]
    fn translation_report_passes() {
        let rep = check_translation(&phi_pic());
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.sigma_root_permutation, vec![Some(1), Some(0), Some(2), Some(3), Some(5), Some(4)]);
    }

    #[test]
    fn transposed_matrix_is_not_the_translation() {
        let m = phi_pic();
        let t = PicMap(std::array::from_fn(|i| std::array::from_fn(|j| m.0[j][i].clone())));
        assert!(!check_translation(&t).passed());
    }

    #[test]
    fn reflections_are_involutive_isometries() {
        for i in 0..6 {
            let r = reflection(i);
            assert!(r.is_isometry());
            assert_eq!(r.compose(&r), PicMap::identity());
        }
    }

    #[test]
    fn chart_dictionary_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pt = random_point(&mut rng);
        let back = to_b(&to_a(&pt.b));
        for (x, y) in back.iter().zip(&pt.b) {
            assert!(x.rel_err(y, 0.0) < 1e-35);
        }
    }

    #[test]
    fn elementary_maps_are_involutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let pt = random_point(&mut rng);
            for w in [Reflection::W1, Reflection::W2, Reflection::W3, Reflection::W4, Reflection::W5] {
                let back = elementary(w, &elementary(w, &pt).unwrap()).unwrap();
                assert!(back.rel_dist(&pt).unwrap() < 1e-30, "{w:?}");
            }
            for w in [Reflection::W0, Reflection::Sigma] {
                let back = elementary(w, &elementary(w, &pt).unwrap()).unwrap();
                assert!(back.torus_dist(&pt).unwrap() < 1e-30, "{w:?}");
            }
        }
    }

    #[test]
    fn elementary_maps_preserve_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pt = random_point(&mut rng);
        for w in [
            Reflection::W0,
            Reflection::W1,
            Reflection::W2,
            Reflection::W3,
            Reflection::W4,
            Reflection::W5,
            Reflection::Sigma,
        ] {
            let img = elementary(w, &pt).unwrap();
            assert!(img.q_sakai().rel_err(&pt.q_sakai(), 0.0) < 1e-30, "{w:?}");
        }
    }

    #[test]
    fn w2_fixes_g_and_rescales() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pt = random_point(&mut rng);
        let img = elementary(Reflection::W2, &pt).unwrap();
        assert_eq!(img.g, pt.g);
        let r = &pt.b[2] / &pt.b[0];
        assert!(img.b[4].rel_err(&(&pt.b[4] * &r), 0.0) < 1e-35);
        assert!(img.b[5].rel_err(&(&pt.b[5] * &r), 0.0) < 1e-35);
    }

    #[test]
    fn composite_matches_phi_step_and_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let pt = random_point(&mut rng);
            let row = composite_row(&pt, 1e-25).unwrap();
            assert!(row.vs_phi_step < 1e-25, "{row:?}");
            assert!(row.closed_form_f < 1e-25 && row.closed_form_g < 1e-25, "{row:?}");
        }
    }

    #[test]
    fn surface_dictionary_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pt = random_point(&mut rng);
        let (c, sp) = to_surface(&pt, 1e-25).unwrap();
        assert!(from_surface(&c, &sp).rel_dist(&pt).unwrap() < 1e-30);
    }
}
