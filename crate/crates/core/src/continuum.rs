//! Continuous limit of the discrete step and its convergence study.
//!
//! With `q = 1−ε`, `qκ₁ = t(1+εK₁)`, `κ₂ = 1+εK₂`, `qθ₁ = t(1+εΘ₁)`,
//! `θ₂ = 1+εΘ₂`, `cᵢ = 1+εCᵢ`, `y = 1+εu`, `ξ = v`, the step `t ↦ qt`
//! becomes a first-order system in `t` as `ε → 0`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mp::{real, Cx};
use crate::painleve::{phi_step, Proj, SurfaceCoords, SurfaceParams};

type C64 = Complex64;

/// Radius of the exclusion discs around `t = 0`, `t = 1` and `v = 0`.
pub const SINGULAR_GUARD: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitParams {
    pub k1: C64,
    pub k2: C64,
    pub t1: C64,
    pub t2: C64,
    pub c: [C64; 4],
}

impl LimitParams {
    /// `Θ₂` fixed by the first-order determinant constraint
    /// `K₁ + K₂ + ΣCᵢ = Θ₁ + Θ₂`.
    pub fn constrained(k1: C64, k2: C64, t1: C64, c: [C64; 4]) -> Self {
        let t2 = k1 + k2 + c.iter().sum::<C64>() - t1;
        LimitParams { k1, k2, t1, t2, c }
    }

    /// Implementer-chosen reference configuration.
    pub fn reference() -> Self {
        LimitParams::constrained(
            C64::new(0.1, 0.05),
            C64::new(-0.2, 0.0),
            C64::new(0.15, 0.0),
            [
                C64::new(0.3, 0.0),
                C64::new(-0.1, 0.1),
                C64::new(0.2, 0.0),
                C64::new(-0.25, 0.0),
            ],
        )
    }

    /// `K₁ + K₂ + ΣCᵢ − Θ₁ − Θ₂`
    pub fn constraint_defect(&self) -> f64 {
        (self.k1 + self.k2 + self.c.iter().sum::<C64>() - self.t1 - self.t2).norm()
    }
}

/// The real parameters `a, b` of the specialized system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpecialParams {
    pub a: f64,
    pub b: f64,
}

impl SpecialParams {
    /// The weight dictionary `K₁ = b−1`, `K₂ = a−1`, `Θ₁ = b`, `Θ₂ = a`,
    /// `C = (a+1, b+1, −b, −a)`.
    pub fn general(&self) -> LimitParams {
        let r = |x: f64| C64::new(x, 0.0);
        let (a, b) = (self.a, self.b);
        LimitParams {
            k1: r(b - 1.0),
            k2: r(a - 1.0),
            t1: r(b),
            t2: r(a),
            c: [r(a + 1.0), r(b + 1.0), r(-b), r(-a)],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LimitSystem {
    /// the limit system in its stated closed form
    Stated,
    /// the first-order expansion of [`phi_step`]
    Derived,
}

fn check_state(t: f64, v: C64) -> Result<()> {
    if t.abs() < SINGULAR_GUARD {
        return Err(Error::Singularity { t: [t, 0.0], what: "t = 0".into() });
    }
    if (1.0 - t).abs() < SINGULAR_GUARD {
        return Err(Error::Singularity { t: [t, 0.0], what: "t = 1".into() });
    }
    if v.norm() < SINGULAR_GUARD {
        return Err(Error::Singularity { t: [t, 0.0], what: "v = 0".into() });
    }
    Ok(())
}

/// `(du/dt, dv/dt)` of the stated limit system:
///
/// ```text
/// t(1−t)u' = tv(u−C₃)(u−C₄) − t(t−1)v⁻¹(u−C₁)(u−C₂)
/// t(1−t)v' = v[2u + 2t(K₂−Θ₁) + C₁ + C₂ − K₁ − Θ₁] + 2u(t−1) + C₂ + C₁ − t(C₃+C₄)
///            + v⁻¹[2ut − t(1+K₂) + 2(1+Θ₂) − C₃ − C₄]
/// ```
pub fn ode_rhs(t: f64, u: C64, v: C64, lp: &LimitParams) -> Result<(C64, C64)> {
    check_state(t, v)?;
    let [c1, c2, c3, c4] = lp.c;
    let tc = C64::new(t, 0.0);
    let w = tc * (1.0 - t);
    let du = tc * v * (u - c3) * (u - c4) - tc * (t - 1.0) / v * (u - c1) * (u - c2);
    let dv = v * (2.0 * u + 2.0 * tc * (lp.k2 - lp.t1) + c1 + c2 - lp.k1 - lp.t1)
        + 2.0 * u * (t - 1.0)
        + c2
        + c1
        - tc * (c3 + c4)
        + (2.0 * u * t - tc * (1.0 + lp.k2) + 2.0 * (1.0 + lp.t2) - c3 - c4) / v;
    Ok((du / w, dv / w))
}

/// `(du/dt, dv/dt)` of the first-order expansion of the discrete step:
///
/// ```text
/// t(1−t)u' = v⁻¹(u−C₁)(u−C₂) − tv(u−C₃)(u−C₄)
/// t(1−t)v' = tv²(2u − C₃ − C₄) + v[ΣCᵢ + (Θ₁−K₁)(t−1) + t − 1 − 2u(t+1)] + 2u − C₁ − C₂
/// ```
pub fn derived_rhs(t: f64, u: C64, v: C64, lp: &LimitParams) -> Result<(C64, C64)> {
    check_state(t, v)?;
    let [c1, c2, c3, c4] = lp.c;
    let w = t * (1.0 - t);
    let du = (u - c1) * (u - c2) / v - t * v * (u - c3) * (u - c4);
    let sum: C64 = lp.c.iter().sum();
    let dv = t * v * v * (2.0 * u - c3 - c4)
        + v * (sum + (lp.t1 - lp.k1) * (t - 1.0) + t - 1.0 - 2.0 * u * (t + 1.0))
        + 2.0 * u
        - c1
        - c2;
    Ok((du / w, dv / w))
}

/// The stated specialized system:
///
/// ```text
/// t(1−t)u' = tv(u+b)(u+a) − t(t−1)v⁻¹(u−a+1)(u−b+1)
/// t(1−t)v' = v[2u + 2t(a−b−1) + a − b + 3] + 2u(t−1) + a + b + 2 + t(a+b)
///            + v⁻¹[(2u−a)t + 2 + 3a + b]
/// ```
pub fn special_rhs(t: f64, u: C64, v: C64, sp: &SpecialParams) -> Result<(C64, C64)> {
    check_state(t, v)?;
    let (a, b) = (sp.a, sp.b);
    let w = t * (1.0 - t);
    let du = t * v * (u + b) * (u + a) - t * (t - 1.0) / v * (u - a + 1.0) * (u - b + 1.0);
    let dv = v * (2.0 * u + 2.0 * t * (a - b - 1.0) + a - b + 3.0)
        + 2.0 * u * (t - 1.0)
        + a
        + b
        + 2.0
        + t * (a + b)
        + ((2.0 * u - a) * t + 2.0 + 3.0 * a + b) / v;
    Ok((du / w, dv / w))
}

pub fn system_rhs(system: LimitSystem, t: f64, u: C64, v: C64, lp: &LimitParams) -> Result<(C64, C64)> {
    match system {
        LimitSystem::Stated => ode_rhs(t, u, v, lp),
        LimitSystem::Derived => derived_rhs(t, u, v, lp),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    /// `(t, u, v)` at accepted steps, starting point included
    pub points: Vec<(f64, C64, C64)>,
    pub accepted: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn last(&self) -> (f64, C64, C64) {
        *self.points.last().expect("nonempty")
    }

    /// `t, Re u, Im u, Re v, Im v` rows.
    pub fn csv_rows(&self) -> Vec<[f64; 5]> {
        self.points.iter().map(|(t, u, v)| [*t, u.re, u.im, v.re, v.im]).collect()
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince 5(4) for `y' = f(t, y)` with `y ∈ ℂ²` from `t0` to
/// `t1` (either direction). The local error per step is kept below
/// `tol·(1 + |y|)` componentwise.
/// Accepted `(t, y)` points.
pub type Steps = Vec<(f64, [C64; 2])>;

/// Returns the accepted points and the number of rejected steps.
pub fn dopri<F>(f: F, t0: f64, y0: [C64; 2], t1: f64, tol: f64) -> Result<(Steps, usize)>
where
    F: Fn(f64, [C64; 2]) -> Result<[C64; 2]>,
{
    let mut out = vec![(t0, y0)];
    let span = t1 - t0;
    if span == 0.0 {
        return Ok((out, 0));
    }
    let mut rejected = 0;
    let dir = span.signum();
    let h_min = 1e-14 * span.abs().max(t0.abs());
    let mut h = dir * (span.abs() * 1e-3).max(h_min * 10.0).min(span.abs());
    let (mut t, mut y) = (t0, y0);
    let mut k0 = f(t, y)?;
    while (t1 - t) * dir > 0.0 {
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let mut k = [[C64::new(0.0, 0.0); 2]; 7];
        k[0] = k0;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for (yi, kji) in ys.iter_mut().zip(kj) {
                    *yi += h * A[s][j] * kji;
                }
            }
            k[s] = f(t + C[s] * h, ys)?;
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for i in 0..2 {
            let mut e = C64::new(0.0, 0.0);
            for s in 0..7 {
                y5[i] += h * B5[s] * k[s][i];
                e += h * (B5[s] - B4[s]) * k[s][i];
            }
            let scale = tol * (1.0 + y[i].norm().max(y5[i].norm()));
            err = err.max(e.norm() / scale);
        }
        if !err.is_finite() {
            err = 1e10;
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            k0 = k[6];
            out.push((t, y));
        } else {
            rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h.abs() < h_min && (t1 - t) * dir > h_min {
            return Err(Error::StepFailure(h.abs()));
        }
    }
    Ok((out, rejected))
}

/// Integrates the chosen system from `(t0, u0, v0)` to `t1`.
pub fn integrate(system: LimitSystem, lp: &LimitParams, s0: (f64, C64, C64), t1: f64, tol: f64) -> Result<Trajectory> {
    let (t0, u0, v0) = s0;
    let (pts, rejected) = dopri(
        |t, y| {
            let (du, dv) = system_rhs(system, t, y[0], y[1], lp)?;
            Ok([du, dv])
        },
        t0,
        [u0, v0],
        t1,
        tol,
    )?;
    let accepted = pts.len() - 1;
    Ok(Trajectory {
        points: pts.into_iter().map(|(t, y)| (t, y[0], y[1])).collect(),
        accepted,
        rejected,
    })
}

/// Discrete surface parameters for `ε` and `t`.
pub fn discrete_params(lp: &LimitParams, eps: f64, t: f64, prec: u32) -> Result<SurfaceParams> {
    let e = real(prec, eps);
    let one = Cx::one(prec);
    let q = real(prec, 1.0) - &e;
    let qc = Cx::from_real(&q);
    let tt = Cx::from_real(&real(prec, t));
    let lin = |x: C64| &one + &Cx::from_c64(prec, x).scale(&e);
    let k1 = &(&tt * &lin(lp.k1)) / &qc;
    let k2 = lin(lp.k2);
    let t1 = &(&tt * &lin(lp.t1)) / &qc;
    let c = lp.c.map(lin);
    let t2 = &c.iter().fold(&k1 * &k2, |s, x| &s * x) / &t1;
    SurfaceParams::new(k1, k2, t1, t2, c, q, 1e-20)
}

/// `((u_k, v_k), t_k)` after `k` discrete steps from `(u0, v0)` at `t0`.
pub fn discrete_orbit(lp: &LimitParams, eps: f64, t0: f64, u0: C64, v0: C64, steps: usize, prec: u32) -> Result<(f64, C64, C64)> {
    let mut sp = discrete_params(lp, eps, t0, prec)?;
    let e = real(prec, eps);
    let y = &Cx::one(prec) + &Cx::from_c64(prec, u0).scale(&e);
    let mut pt = SurfaceCoords::new(y, Cx::from_c64(prec, v0));
    for _ in 0..steps {
        let (np, ns) = phi_step(&pt, &sp)?;
        pt = np;
        sp = ns;
    }
    let (y, xi) = match (&pt.y, &pt.xi) {
        (Proj::Finite(y), Proj::Finite(xi)) => (y, xi),
        _ => return Err(Error::Singularity { t: [t0, 0.0], what: "orbit reached infinity".into() }),
    };
    let u = (y - &Cx::one(prec)).scale(&e.clone().recip());
    let t = t0 * (1.0 - eps).powi(steps as i32);
    Ok((t, u.to_c64(), xi.to_c64()))
}

/// One discrete step read as a difference quotient: `((ũ − u)/(−εt), (ṽ − v)/(−εt))`.
pub fn step_quotient(lp: &LimitParams, eps: f64, t: f64, u: C64, v: C64, prec: u32) -> Result<(C64, C64)> {
    let (_, u1, v1) = discrete_orbit(lp, eps, t, u, v, 1, prec)?;
    let dt = -eps * t;
    Ok(((u1 - u) / dt, (v1 - v) / dt))
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitConfig {
    pub params: LimitParams,
    pub t0: f64,
    pub t1: f64,
    pub u0: C64,
    pub v0: C64,
    pub ode_tol: f64,
    pub prec: u32,
}

impl LimitConfig {
    pub fn reference() -> Self {
        LimitConfig {
            params: LimitParams::reference(),
            t0: 0.6,
            t1: 0.3,
            u0: C64::new(0.2, 0.1),
            v0: C64::new(0.8, -0.3),
            ode_tol: 1e-12,
            prec: 128,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitRow {
    pub eps: f64,
    pub steps: usize,
    pub t_end: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub system: LimitSystem,
    pub rows: Vec<LimitRow>,
    /// `log₂(err_i/err_{i+1}) / log₂(ε_i/ε_{i+1})` for consecutive pairs
    pub orders: Vec<f64>,
    /// least-squares slope of `log err` against `log ε`
    pub fitted_order: f64,
    pub monotone: bool,
}

impl ConvergenceReport {
    pub fn passed(&self, min_order: f64) -> bool {
        self.monotone && self.fitted_order >= min_order
    }
}

/// Discrete orbit against the ODE endpoint for each `ε`.
pub fn limit_check(cfg: &LimitConfig, system: LimitSystem, eps_list: &[f64]) -> Result<ConvergenceReport> {
    use rayon::prelude::*;
    if eps_list.len() < 2 {
        return Err(Error::Config("need at least two ε values".into()));
    }
    let rows = eps_list
        .par_iter()
        .map(|&eps| {
            let steps = ((cfg.t1 / cfg.t0).ln() / (1.0 - eps).ln()).round() as usize;
            let (t_end, u, v) = discrete_orbit(&cfg.params, eps, cfg.t0, cfg.u0, cfg.v0, steps, cfg.prec)?;
            let tr = integrate(system, &cfg.params, (cfg.t0, cfg.u0, cfg.v0), t_end, cfg.ode_tol)?;
            let (_, ou, ov) = tr.last();
            Ok(LimitRow {
                eps,
                steps,
                t_end,
                error: (u - ou).norm().max((v - ov).norm()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let orders = rows
        .windows(2)
        .map(|w| (w[0].error / w[1].error).ln() / (w[0].eps / w[1].eps).ln())
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.eps.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.error.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let monotone = rows.windows(2).all(|w| w[1].error < w[0].error);
    Ok(ConvergenceReport {
        system,
        rows,
        orders,
        fitted_order: sxy / sxx,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rc(rng: &mut ChaCha8Rng) -> C64 {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    fn random_params(rng: &mut ChaCha8Rng) -> LimitParams {
        LimitParams::constrained(rc(rng), rc(rng), rc(rng), [rc(rng), rc(rng), rc(rng), rc(rng)])
    }

    /// Monomial expansions typed separately from the factored forms above.
    fn stated_expanded(t: f64, u: C64, v: C64, lp: &LimitParams) -> (C64, C64) {
        let [c1, c2, c3, c4] = lp.c;
        let (k1, k2, t1, t2) = (lp.k1, lp.k2, lp.t1, lp.t2);
        let w = t * (1.0 - t);
        let du = t * v * (u * u - (c3 + c4) * u + c3 * c4) + w / v * (u * u - (c1 + c2) * u + c1 * c2);
        let dv = 2.0 * u * v + 2.0 * t * v * k2 - 2.0 * t * v * t1 + (c1 + c2) * v - k1 * v - t1 * v
            + 2.0 * u * t
            - 2.0 * u
            + c1
            + c2
            - t * c3
            - t * c4
            + 2.0 * u * t / v
            - t / v
            - t * k2 / v
            + 2.0 / v
            + 2.0 * t2 / v
            - c3 / v
            - c4 / v;
        (du / w, dv / w)
    }

    fn derived_expanded(t: f64, u: C64, v: C64, lp: &LimitParams) -> (C64, C64) {
        let [c1, c2, c3, c4] = lp.c;
        let (k1, t1) = (lp.k1, lp.t1);
        let w = t * (1.0 - t);
        let du = c1 * c2 / v - c1 * u / v - c2 * u / v - c3 * c4 * t * v + c3 * t * u * v + c4 * t * u * v
            - t * u * u * v
            + u * u / v;
        let dv = c1 * v - c1 + c2 * v - c2 - c3 * t * v * v + c3 * v - c4 * t * v * v + c4 * v - k1 * t * v + k1 * v
            + t1 * t * v
            - t1 * v
            + 2.0 * t * u * v * v
            - 2.0 * t * u * v
            + t * v
            - 2.0 * u * v
            + 2.0 * u
            - v;
        (du / w, dv / w)
    }

    #[test]
    fn transcriptions_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..1000 {
            let lp = random_params(&mut rng);
            let t = rng.gen_range(0.01..0.99);
            let (u, v) = (rc(&mut rng), rc(&mut rng) + C64::new(0.0, 1.1));
            let close = |a: (C64, C64), b: (C64, C64)| {
                let s = 1.0 + a.0.norm().max(a.1.norm());
                (a.0 - b.0).norm() < 1e-12 * s && (a.1 - b.1).norm() < 1e-12 * s
            };
            assert!(close(ode_rhs(t, u, v, &lp).unwrap(), stated_expanded(t, u, v, &lp)));
            assert!(close(derived_rhs(t, u, v, &lp).unwrap(), derived_expanded(t, u, v, &lp)));
        }
    }

    #[test]
    fn common_zero() {
        let z = C64::new(0.0, 0.0);
        let lp = LimitParams { k1: z, k2: z, t1: z, t2: z, c: [z; 4] };
        let (du, _) = ode_rhs(0.4, z, C64::new(0.7, 0.2), &lp).unwrap();
        assert_eq!(du, z);
    }

    #[test]
    fn singular_points_are_rejected() {
        let lp = LimitParams::reference();
        let one = C64::new(1.0, 0.0);
        assert!(matches!(ode_rhs(0.0, one, one, &lp), Err(Error::Singularity { .. })));
        assert!(matches!(ode_rhs(1.0 - 1e-4, one, one, &lp), Err(Error::Singularity { .. })));
        assert!(matches!(derived_rhs(0.5, one, C64::new(0.0, 1e-5), &lp), Err(Error::Singularity { .. })));
    }

    #[test]
    fn derived_system_is_the_first_order_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let lp = random_params(&mut rng);
            let t = rng.gen_range(0.2..0.8);
            let (u, v) = (rc(&mut rng), rc(&mut rng) + C64::new(1.5, 0.0));
            let (du, dv) = derived_rhs(t, u, v, &lp).unwrap();
            // Richardson in ε removes the O(ε) term of the quotient
            let q1 = step_quotient(&lp, 1e-6, t, u, v, 160).unwrap();
            let q2 = step_quotient(&lp, 5e-7, t, u, v, 160).unwrap();
            let ru = 2.0 * q2.0 - q1.0;
            let rv = 2.0 * q2.1 - q1.1;
            assert!((ru - du).norm() < 1e-8 * (1.0 + du.norm()), "{ru} {du}");
            assert!((rv - dv).norm() < 1e-8 * (1.0 + dv.norm()), "{rv} {dv}");
        }
    }

    #[test]
    fn stated_system_is_not_the_first_order_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let lp = random_params(&mut rng);
        let (u, v) = (rc(&mut rng), C64::new(1.3, 0.4));
        let (du, dv) = ode_rhs(0.5, u, v, &lp).unwrap();
        let q = step_quotient(&lp, 1e-7, 0.5, u, v, 160).unwrap();
        assert!((q.0 - du).norm() > 1e-3 || (q.1 - dv).norm() > 1e-3);
    }

    #[test]
    fn derived_system_only_sees_theta1_minus_k1() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let lp = random_params(&mut rng);
        let shift = C64::new(0.3, -0.2);
        let moved = LimitParams { k1: lp.k1 + shift, t1: lp.t1 + shift, ..lp.clone() };
        let (u, v) = (rc(&mut rng), C64::new(0.9, 0.1));
        let a = derived_rhs(0.4, u, v, &lp).unwrap();
        let b = derived_rhs(0.4, u, v, &moved).unwrap();
        assert!((a.0 - b.0).norm() < 1e-14 && (a.1 - b.1).norm() < 1e-14);
        let a = ode_rhs(0.4, u, v, &lp).unwrap();
        let b = ode_rhs(0.4, u, v, &moved).unwrap();
        assert!((a.1 - b.1).norm() > 1e-3);
    }

    #[test]
    fn specialized_system_against_general() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..20 {
            let sp = SpecialParams { a: rng.gen_range(-1.0..1.0), b: rng.gen_range(-1.0..1.0) };
            let lp = sp.general();
            let t = rng.gen_range(0.1..0.9);
            let (u, v) = (rc(&mut rng), rc(&mut rng) + C64::new(2.0, 0.0));
            let (gu, gv) = ode_rhs(t, u, v, &lp).unwrap();
            let (su, sv) = special_rhs(t, u, v, &sp).unwrap();
            assert!((gv - sv).norm() < 1e-12 * (1.0 + gv.norm()));
            // the u-equations differ exactly in the sign of the unit shifts of (u−a±1)(u−b±1)
            let w = t * (1.0 - t);
            let fix = -t * (t - 1.0) / v * ((u - sp.a - 1.0) * (u - sp.b - 1.0) - (u - sp.a + 1.0) * (u - sp.b + 1.0)) / w;
            assert!((gu - (su + fix)).norm() < 1e-12 * (1.0 + gu.norm()));
            assert!(fix.norm() > 1e-6);
        }
    }

    #[test]
    fn exponential_oracle() {
        let lam = C64::new(-0.7, 1.3);
        let (pts, _) = dopri(|_, y| Ok([lam * y[0], -y[1]]), 0.0, [C64::new(1.0, 0.0); 2], 2.0, 1e-12).unwrap();
        let (t, y) = *pts.last().unwrap();
        assert_eq!(t, 2.0);
        assert!((y[0] - (lam * 2.0).exp()).norm() < 1e-10);
        assert!((y[1].re - (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn zero_length_and_round_trip() {
        let cfg = LimitConfig::reference();
        let s0 = (cfg.t0, cfg.u0, cfg.v0);
        let tr = integrate(LimitSystem::Derived, &cfg.params, s0, cfg.t0, 1e-10).unwrap();
        assert_eq!(tr.points.len(), 1);
        let tol = 1e-11;
        let fwd = integrate(LimitSystem::Derived, &cfg.params, s0, 0.45, tol).unwrap().last();
        let back = integrate(LimitSystem::Derived, &cfg.params, fwd, cfg.t0, tol).unwrap().last();
        assert!((back.1 - cfg.u0).norm() < 100.0 * tol && (back.2 - cfg.v0).norm() < 100.0 * tol);
    }

    #[test]
    fn tolerance_controls_global_error() {
        let cfg = LimitConfig::reference();
        let s0 = (cfg.t0, cfg.u0, cfg.v0);
        let end = |tol| integrate(LimitSystem::Derived, &cfg.params, s0, cfg.t1, tol).unwrap().last();
        let exact = end(1e-14);
        let err = |tol| {
            let e = end(tol);
            (e.1 - exact.1).norm().max((e.2 - exact.2).norm())
        };
        let (e6, e9) = (err(1e-6), err(1e-9));
        assert!(e9 < e6 / 50.0, "{e6} {e9}");
    }

    #[test]
    fn discrete_orbit_converges_to_derived_system() {
        let cfg = LimitConfig::reference();
        let rep = limit_check(&cfg, LimitSystem::Derived, &[1e-2, 5e-3, 2.5e-3]).unwrap();
        assert!(rep.passed(0.8), "{rep:?}");
    }
}
