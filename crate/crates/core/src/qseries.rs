//! q-Pochhammer products, the q-Gamma circle weight and its moments.
//!
//! The weight is
//!
//! ```text
//! w(z) = (az; q)∞ (ā/z; q)∞ / ((bz; q)∞ (b̄/z; q)∞)
//! ```
//!
//! which is real and positive on the unit circle for `|a|, |b| < 1`, and
//! satisfies `w(qz) = ρ(z) w(z)` with `ρ = V/W` for the quadratics returned by
//! [`vw_polys`].

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::lu_solve;
use crate::mp::{pi, real, ulp_scale, Cx, Real};
use crate::poly::CPoly;

#[derive(Clone, Debug)]
pub struct QWeightParams {
    pub a: Cx,
    pub b: Cx,
    pub q: Real,
    pub prec: u32,
    pub trunc_tol: Real,
}

impl QWeightParams {
    /// Validated parameters with the default truncation tolerance `2^-(prec+10)`.
    pub fn new(a: [f64; 2], b: [f64; 2], q: f64, prec: u32) -> Result<Self> {
        if prec < 53 {
            return Err(Error::Config(format!("precision {prec} below 53 bits")));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Config(format!("q = {q} is not in (0, 1)")));
        }
        let a = Cx::new(prec, a[0], a[1]);
        let b = Cx::new(prec, b[0], b[1]);
        if a.abs_f64() >= 1.0 || b.abs_f64() >= 1.0 {
            return Err(Error::Config(format!(
                "need |a| < 1 and |b| < 1, got |a| = {}, |b| = {}",
                a.abs_f64(),
                b.abs_f64()
            )));
        }
        Ok(QWeightParams {
            a,
            b,
            q: real(prec, q),
            prec,
            trunc_tol: ulp_scale(prec, prec as i32 + 10),
        })
    }

    pub fn with_trunc_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::Config(format!("truncation tolerance {tol} must be positive")));
        }
        self.trunc_tol = real(self.prec, tol);
        Ok(self)
    }

    pub fn q_f64(&self) -> f64 {
        self.q.to_f64()
    }
}

/// `(z; q)∞`, truncated at the first index `M` with `|z| q^M < tol` and
/// completed by the tail factor `exp(−z q^{M+1}/(1−q))`.
pub fn qpoch_inf(z: &Cx, q: &Real, tol: &Real) -> Cx {
    let prec = z.prec().max(q.prec());
    let one = Cx::one(prec);
    let mut acc = one.clone();
    let mut term = z.with_prec(prec);
    loop {
        let small = term.abs() < *tol;
        acc = &acc * &(&one - &term);
        term = term.scale(q);
        if small {
            break;
        }
    }
    let denom = Float::with_val(prec, 1) - q;
    let tail = (-term.scale(&denom.recip())).exp();
    &acc * &tail
}

pub fn weight_eval(p: &QWeightParams, z: &Cx) -> Result<Cx> {
    if z.is_zero() {
        return Err(Error::Domain);
    }
    let zi = z.recip();
    let num = &qpoch_inf(&(&p.a * z), &p.q, &p.trunc_tol)
        * &qpoch_inf(&(&p.a.conj() * &zi), &p.q, &p.trunc_tol);
    let den = &qpoch_inf(&(&p.b * z), &p.q, &p.trunc_tol)
        * &qpoch_inf(&(&p.b.conj() * &zi), &p.q, &p.trunc_tol);
    if den.abs() < ulp_scale(p.prec, p.prec as i32 / 2) {
        return Err(Error::Pole { z: z.to_pair() });
    }
    Ok(&num / &den)
}

/// `V(z) = (qz − ā)(bz − 1)` and `W(z) = (qz − b̄)(az − 1)`, so that
/// `w(qz) W(z) = w(z) V(z)`.
pub fn vw_polys(p: &QWeightParams) -> (CPoly, CPoly) {
    let prec = p.prec;
    let qz = Cx::from_real(&p.q);
    let one = Cx::one(prec);
    let v = &CPoly::new(prec, vec![-p.a.conj(), qz.clone()]) * &CPoly::new(prec, vec![-&one, p.b.clone()]);
    let w = &CPoly::new(prec, vec![-p.b.conj(), qz]) * &CPoly::new(prec, vec![-one, p.a.clone()]);
    (v, w)
}

/// `ρ(z) = V(z)/W(z) = w(qz)/w(z)`.
pub fn rho_eval(p: &QWeightParams, z: &Cx) -> Cx {
    let (v, w) = vw_polys(p);
    &v.eval(z) / &w.eval(z)
}

/// Moments `c_k`, `k = −K..=K`.
#[derive(Clone, Debug)]
pub struct MomentTable {
    pub q: Real,
    pub a: Cx,
    pub b: Cx,
    pub k_max: usize,
    c: Vec<Cx>,
    /// Total mass `∫ w dθ` before normalization.
    pub mass: Real,
    pub normalized: bool,
    /// Largest change of any `c_k` when the node count is doubled.
    pub quad_error: f64,
    pub nodes: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MomentTableJson {
    pub q: f64,
    pub a: [f64; 2],
    pub b: [f64; 2],
    #[serde(rename = "K")]
    pub k: usize,
    pub c: Vec<[f64; 2]>,
}

impl MomentTable {
    pub fn prec(&self) -> u32 {
        self.mass.prec()
    }

    /// `c_k`; panics outside `−K..=K`.
    pub fn get(&self, k: i64) -> &Cx {
        assert!(
            k.unsigned_abs() as usize <= self.k_max,
            "moment index {k} outside table of size {}",
            self.k_max
        );
        &self.c[(k + self.k_max as i64) as usize]
    }

    pub fn covers(&self, k: usize) -> bool {
        k <= self.k_max
    }

    pub fn to_json(&self) -> MomentTableJson {
        MomentTableJson {
            q: self.q.to_f64(),
            a: self.a.to_pair(),
            b: self.b.to_pair(),
            k: self.k_max,
            c: self.c.iter().map(Cx::to_pair).collect(),
        }
    }
}

/// Smallest power of two that is at least `max(4K+16, prec+2K+64)`.
pub fn default_nodes(k: usize, prec: u32) -> usize {
    (4 * k + 16).max(prec as usize + 2 * k + 64).next_power_of_two()
}

/// Trapezoidal moments on `nodes` equispaced angles, certified against a
/// run on twice as many nodes. Fails with [`Error::Precision`] when the
/// doubling changes some `c_k` by more than `tol`.
pub fn moments(
    p: &QWeightParams,
    k_max: usize,
    nodes: usize,
    normalize: bool,
    tol: Option<f64>,
) -> Result<MomentTable> {
    if nodes < 4 * k_max + 16 {
        return Err(Error::Config(format!(
            "{nodes} quadrature nodes is below 4K+16 = {}",
            4 * k_max + 16
        )));
    }
    let prec = p.prec;
    let fine = 2 * nodes;
    let step = pi(prec) * 2u32 / Float::with_val(prec, fine);
    let samples: Vec<(Cx, Real)> = (0..fine)
        .into_par_iter()
        .map(|j| {
            let z = Cx::unit(&Float::with_val(prec, &step * j as u32));
            let w = weight_eval(p, &z)?;
            Ok((z, w.re().clone()))
        })
        .collect::<Result<_>>()?;

    let sum = |stride: usize| -> Vec<Cx> {
        let mut acc = vec![Cx::zero(prec); k_max + 1];
        for (z, w) in samples.iter().step_by(stride) {
            let zc = z.conj();
            let mut zk = Cx::from_real(w);
            for a in acc.iter_mut() {
                *a += &zk;
                zk = &zk * &zc;
            }
        }
        let h = Float::with_val(prec, &step * stride as u32);
        acc.into_iter().map(|c| c.scale(&h)).collect()
    };
    let coarse = sum(2);
    let refined = sum(1);

    let mass = coarse[0].re().clone();
    let fine_mass = refined[0].re().clone();
    let (scale, fine_scale) = if normalize {
        (mass.clone().recip(), fine_mass.recip())
    } else {
        (Float::with_val(prec, 1), Float::with_val(prec, 1))
    };
    let quad_error = coarse
        .iter()
        .zip(&refined)
        .map(|(c, f)| (&c.scale(&scale) - &f.scale(&fine_scale)).abs_f64())
        .fold(0.0, f64::max);
    if let Some(t) = tol {
        if quad_error > t {
            return Err(Error::Precision(format!(
                "moment quadrature moved by {quad_error:e} under node doubling (tolerance {t:e})"
            )));
        }
    }

    let pos: Vec<Cx> = coarse.iter().map(|c| c.scale(&scale)).collect();
    let mut c = Vec::with_capacity(2 * k_max + 1);
    for k in (1..=k_max).rev() {
        c.push(pos[k].conj());
    }
    let mut c0 = pos[0].clone();
    if normalize {
        c0 = Cx::one(prec);
    }
    c.push(c0);
    c.extend(pos[1..].iter().cloned());

    Ok(MomentTable {
        q: p.q.clone(),
        a: p.a.clone(),
        b: p.b.clone(),
        k_max,
        c,
        mass,
        normalized: normalize,
        quad_error,
        nodes,
    })
}

/// Equispaced nodes on the unit circle with the normalized weight, so that
/// `integrate(f) ≈ ∫ f(e^{iθ}) dμ(θ)` with `∫ dμ = 1`.
#[derive(Clone, Debug)]
pub struct CircleQuadrature {
    nodes: Vec<(Cx, Real)>,
}

impl CircleQuadrature {
    pub fn new(p: &QWeightParams, n: usize) -> Result<Self> {
        let prec = p.prec;
        let step = pi(prec) * 2u32 / Float::with_val(prec, n as u32);
        let raw: Vec<(Cx, Real)> = (0..n)
            .into_par_iter()
            .map(|j| {
                let z = Cx::unit(&Float::with_val(prec, &step * j as u32));
                let w = weight_eval(p, &z)?;
                Ok((z, w.re().clone()))
            })
            .collect::<Result<_>>()?;
        let total = raw.iter().fold(Float::new(prec), |s, (_, w)| s + w);
        let nodes = raw.into_iter().map(|(z, w)| (z, w / &total)).collect();
        Ok(CircleQuadrature { nodes })
    }

    pub fn integrate<F: Fn(&Cx) -> Cx>(&self, f: F) -> Cx {
        let prec = self.nodes.first().map_or(64, |(z, _)| z.prec());
        let mut acc = Cx::zero(prec);
        for (z, w) in &self.nodes {
            acc += &f(z).scale(w);
        }
        acc
    }
}

#[derive(Clone, Debug)]
pub struct CaratheodoryValue {
    pub value: Cx,
    pub tail_bound: f64,
}

/// `F(z) = c_0 + 2 Σ_{k≥1} c_k z^k` for `|z| < 1`, truncated at the table
/// size, with a geometric estimate of the neglected tail.
pub fn caratheodory_eval(table: &MomentTable, z: &Cx, tol: f64) -> Result<CaratheodoryValue> {
    let k_max = table.k_max;
    let mut acc = table.get(0).clone();
    let mut zk = Cx::one(table.prec());
    for k in 1..=k_max {
        zk = &zk * z;
        acc += &(table.get(k as i64) * &zk).scale_f64(2.0);
    }
    let r = z.abs_f64();
    let tail_bound = if k_max < 2 {
        if z.is_zero() { 0.0 } else { f64::INFINITY }
    } else {
        let last = table.get(k_max as i64).abs_f64();
        let ratio = [k_max - 1, k_max - 2]
            .iter()
            .filter_map(|&k| {
                let d = table.get(k as i64).abs_f64();
                (d > 0.0).then(|| table.get(k as i64 + 1).abs_f64() / d)
            })
            .fold(0.0, f64::max);
        let g = ratio * r;
        let roundoff = 2f64.powi(8 - table.prec() as i32);
        let prev = table.get(k_max as i64 - 1).abs_f64();
        if z.is_zero() || last == 0.0 {
            0.0
        } else if last.max(prev) <= roundoff && r < 1.0 {
            2.0 * roundoff * r.powi(k_max as i32) / (1.0 - r)
        } else if g >= 1.0 {
            f64::INFINITY
        } else {
            2.0 * last * r.powi(k_max as i32) * g / (1.0 - g)
        }
    };
    if tail_bound > tol {
        return Err(Error::Convergence { bound: tail_bound, tol });
    }
    Ok(CaratheodoryValue { value: acc, tail_bound })
}

/// The Carathéodory functional equation `W(z) F(qz) = V(z) F(z) + U(z)`:
/// the quadratic `U` is interpolated at three points and the identity
/// checked at further points.
#[derive(Clone, Debug)]
pub struct FunctionalEquationReport {
    pub u: CPoly,
    pub max_residual: f64,
    pub checked_points: usize,
}

pub fn caratheodory_equation_check(
    p: &QWeightParams,
    table: &MomentTable,
    n_check: usize,
    series_tol: f64,
) -> Result<FunctionalEquationReport> {
    let prec = p.prec;
    let (v, w) = vw_polys(p);
    let defect = |z: &Cx| -> Result<Cx> {
        let zq = z.scale(&p.q);
        let fq = caratheodory_eval(table, &zq, series_tol)?.value;
        let f = caratheodory_eval(table, z, series_tol)?.value;
        Ok(&(&w.eval(z) * &fq) - &(&v.eval(z) * &f))
    };
    let fit_pts: Vec<Cx> = (0..3)
        .map(|k| {
            let t = pi(prec) * Float::with_val(prec, 2 * k as u32 + 1) / 3u32;
            Cx::unit(&t).scale_f64(0.2)
        })
        .collect();
    let rows: Vec<Vec<Cx>> = fit_pts
        .iter()
        .map(|z| vec![Cx::one(prec), z.clone(), z.sqr()])
        .collect();
    let rhs = fit_pts.iter().map(&defect).collect::<Result<Vec<_>>>()?;
    let u = CPoly::new(prec, lu_solve(rows, rhs)?);

    let golden = (5f64.sqrt() - 1.0) * std::f64::consts::PI;
    let mut max_residual = 0.0f64;
    for j in 0..n_check {
        let r = 0.05 + 0.4 * (j as f64 + 0.5) / n_check as f64;
        let z = Cx::unit(&real(prec, golden * j as f64)).scale_f64(r);
        let d = &defect(&z)? - &u.eval(&z);
        max_residual = max_residual.max(d.abs_f64());
    }
    Ok(FunctionalEquationReport {
        u,
        max_residual,
        checked_points: n_check,
    })
}

/// `f₊(e^{iθ}) = (b e^{iθ}; q)∞ / (a e^{iθ}; q)∞`.
pub fn fplus_eval(p: &QWeightParams, theta: &Real) -> Cx {
    let z = Cx::unit(theta);
    &qpoch_inf(&(&p.b * &z), &p.q, &p.trunc_tol) / &qpoch_inf(&(&p.a * &z), &p.q, &p.trunc_tol)
}

/// `max_θ |w(e^{iθ}) |f₊(e^{iθ})|² − 1|` over `n` equispaced angles.
pub fn scattering_identity_residual(p: &QWeightParams, n: usize) -> Result<f64> {
    let prec = p.prec;
    (0..n)
        .into_par_iter()
        .map(|j| {
            let t = pi(prec) * Float::with_val(prec, 2 * j as u32 + 1) / Float::with_val(prec, n as u32);
            let w = weight_eval(p, &Cx::unit(&t))?;
            let f = fplus_eval(p, &t);
            Ok((&w.scale(&f.norm_sqr()) - &Cx::one(prec)).abs_f64())
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// `max |W(z) w(qz) − V(z) w(z)| / |W(z) w(qz)|` over `n` circle points.
pub fn weight_equation_residual(p: &QWeightParams, n: usize) -> Result<f64> {
    let prec = p.prec;
    let (v, w) = vw_polys(p);
    let mut worst = 0.0f64;
    for j in 0..n {
        let t = pi(prec) * Float::with_val(prec, 2 * j as u32 + 1) / Float::with_val(prec, n as u32);
        let z = Cx::unit(&t);
        let lhs = &w.eval(&z) * &weight_eval(p, &z.scale(&p.q))?;
        let rhs = &v.eval(&z) * &weight_eval(p, &z)?;
        worst = worst.max((&lhs - &rhs).abs_f64() / lhs.abs_f64());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: [f64; 2], b: [f64; 2]) -> QWeightParams {
        QWeightParams::new(a, b, 0.5, 128).unwrap()
    }

    #[test]
    fn qpoch_trivial_values() {
        let q = real(128, 0.5);
        let tol = real(128, 1e-30);
        let one = qpoch_inf(&Cx::zero(128), &q, &tol);
        assert!((&one - &Cx::one(128)).abs_f64() < 1e-38);
        for qq in [0.1, 0.5, 0.9] {
            let v = qpoch_inf(&Cx::one(128), &real(128, qq), &tol);
            assert!(v.is_zero() || v.abs_f64() < 1e-38);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(QWeightParams::new([0.3, 0.0], [0.5, 0.0], 1.0, 128).is_err());
        assert!(QWeightParams::new([0.3, 0.0], [0.5, 0.0], 0.0, 128).is_err());
        assert!(QWeightParams::new([1.0, 0.0], [0.5, 0.0], 0.5, 128).is_err());
        assert!(QWeightParams::new([0.3, 0.0], [0.0, -1.2], 0.5, 128).is_err());
        assert!(QWeightParams::new([0.3, 0.0], [0.5, 0.0], 0.5, 32).is_err());
        assert!(params([0.3, 0.0], [0.5, 0.0]).with_trunc_tol(0.0).is_err());
    }

    #[test]
    fn weight_is_one_when_a_equals_b() {
        let p = params([0.4, -0.2], [0.4, -0.2]);
        for z in [Cx::new(128, 0.3, 0.8), Cx::new(128, -1.0, 0.0), Cx::new(128, 2.0, 1.0)] {
            assert!((&weight_eval(&p, &z).unwrap() - &Cx::one(128)).abs_f64() < 1e-35);
        }
    }

    #[test]
    fn weight_domain_and_pole_errors() {
        let p = params([0.3, 0.2], [0.5, 0.0]);
        assert_eq!(weight_eval(&p, &Cx::zero(128)), Err(Error::Domain));
        // b̄ q² = 0.125 is a pole
        assert!(matches!(
            weight_eval(&p, &Cx::new(128, 0.125, 0.0)),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn weight_is_real_and_positive_on_circle() {
        let p = params([0.3, 0.2], [-0.1, 0.6]);
        for j in 0..40 {
            let w = weight_eval(&p, &Cx::unit(&real(128, 0.157 * j as f64))).unwrap();
            assert!(w.im().to_f64().abs() < 2f64.powi(-118));
            assert!(w.re().to_f64() > 0.0);
        }
    }

    #[test]
    fn vw_roots_and_degenerate_case() {
        let p = params([0.3, 0.2], [0.5, 0.0]);
        let (v, w) = vw_polys(&p);
        let q = &p.q;
        for r in [p.a.conj().scale(&q.clone().recip()), p.b.recip()] {
            assert!(v.eval(&r).abs_f64() < 1e-35);
        }
        for r in [p.b.conj().scale(&q.clone().recip()), p.a.recip()] {
            assert!(w.eval(&r).abs_f64() < 1e-35);
        }
        let z = params([0.0, 0.0], [0.0, 0.0]);
        let (v0, w0) = vw_polys(&z);
        assert_eq!(v0.degree(), Some(1));
        assert!((&v0.coeff(1) + &Cx::new(128, 0.5, 0.0)).abs_f64() < 1e-38);
        assert!((&w0.coeff(1) + &Cx::new(128, 0.5, 0.0)).abs_f64() < 1e-38);
    }

    #[test]
    fn weight_ratio_is_rho() {
        let p = params([0.3, 0.2], [0.5, 0.0]);
        for j in 0..50 {
            let z = Cx::unit(&real(128, 0.1 + 0.12 * j as f64));
            let r = &weight_eval(&p, &z.scale(&p.q)).unwrap() / &weight_eval(&p, &z).unwrap();
            assert!(r.rel_err(&rho_eval(&p, &z), 1e-300) < 1e-33);
        }
        assert!(weight_equation_residual(&p, 50).unwrap() < 1e-33);
    }

    #[test]
    fn lebesgue_moments() {
        let p = params([0.2, 0.1], [0.2, 0.1]);
        let t = moments(&p, 6, default_nodes(6, 128), false, Some(1e-30)).unwrap();
        let two_pi = pi(128) * 2u32;
        assert!((t.get(0).re().clone() - &two_pi).abs().to_f64() < 1e-35);
        for k in 1..=6 {
            assert!(t.get(k).abs_f64() < 1e-35);
            assert!(t.get(-k).abs_f64() < 1e-35);
        }
    }

    #[test]
    fn moments_are_hermitian_and_normalized() {
        let p = params([0.3, 0.2], [0.5, 0.0]);
        let t = moments(&p, 10, default_nodes(10, 128), true, Some(1e-30)).unwrap();
        assert_eq!(t.get(0), &Cx::one(128));
        for k in 1..=10 {
            assert_eq!(t.get(-k), &t.get(k).conj());
        }
        assert!(t.quad_error < 1e-30);
    }

    #[test]
    fn moments_reject_too_few_nodes() {
        let p = params([0.3, 0.2], [0.5, 0.0]);
        assert!(matches!(moments(&p, 10, 40, true, None), Err(Error::Config(_))));
    }

    #[test]
    fn moments_flag_unconverged_quadrature() {
        let p = QWeightParams::new([0.3, 0.2], [0.95, 0.0], 0.5, 128).unwrap();
        assert!(matches!(
            moments(&p, 4, 32, true, Some(1e-30)),
            Err(Error::Precision(_))
        ));
    }

    #[test]
    fn caratheodory_at_origin_and_lebesgue() {
        let p = params([0.3, 0.2], [0.5, 0.0]);
        let t = moments(&p, 40, default_nodes(40, 128), true, None).unwrap();
        let f0 = caratheodory_eval(&t, &Cx::zero(128), 1e-30).unwrap();
        assert_eq!(f0.value, Cx::one(128));
        let l = params([0.1, 0.0], [0.1, 0.0]);
        let tl = moments(&l, 20, default_nodes(20, 128), true, None).unwrap();
        let f = caratheodory_eval(&tl, &Cx::new(128, 0.3, -0.4), 1e-20).unwrap();
        assert!((&f.value - &Cx::one(128)).abs_f64() < 1e-30);
    }

    #[test]
    fn caratheodory_tail_too_large() {
        let p = params([0.3, 0.2], [0.5, 0.0]);
        let t = moments(&p, 8, default_nodes(8, 128), true, None).unwrap();
        assert!(matches!(
            caratheodory_eval(&t, &Cx::new(128, 0.9, 0.0), 1e-30),
            Err(Error::Convergence { .. })
        ));
    }

    #[test]
    fn fplus_special_cases() {
        let theta = real(128, 0.77);
        let p = params([0.3, 0.2], [0.3, 0.2]);
        assert!((&fplus_eval(&p, &theta) - &Cx::one(128)).abs_f64() < 1e-35);
        let p0 = params([0.3, 0.2], [0.0, 0.0]);
        let expect = qpoch_inf(&(&p0.a * &Cx::unit(&theta)), &p0.q, &p0.trunc_tol).recip();
        assert!(fplus_eval(&p0, &theta).rel_err(&expect, 1e-300) < 1e-35);
    }
}
