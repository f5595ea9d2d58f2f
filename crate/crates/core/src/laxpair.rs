//! The q-difference Lax pair of the orthogonal polynomials.
//!
//! `Y_{n+1} = B_n Y_n` is the Szegő recursion and `V(z) Y_n(qz) = A_n(z) Y_n(z)`
//! the q-shift, where
//!
//! ```text
//! A_n = | Ω_n − zΘ_n      −α_{n+1}Θ_n |
//!       | −zᾱ_{n+1}Θ*_n   Ω*_n − Θ*_n |
//! ```
//!
//! `A_n` is never transcribed from a formula: its entries are recovered by
//! an overdetermined linear fit against the polynomials `φ_n`, `φ*_n` and
//! the power series of `ε_n`, `ε*_n`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::mp::{Cx, Real};
use crate::opuc::VerblunskyTable;
use crate::poly::{CPoly, MatPoly2};
use crate::qseries::{vw_polys, weight_eval, CircleQuadrature, MomentTable, QWeightParams};

/// `B_n(z) = [[z, α_{n+1}], [ᾱ_{n+1} z, 1]]`.
pub fn build_b(alpha_next: &Cx) -> MatPoly2 {
    let prec = alpha_next.prec();
    let one = Cx::one(prec);
    MatPoly2::new(
        CPoly::monomial(one.clone(), 1),
        CPoly::constant(alpha_next.clone()),
        CPoly::monomial(alpha_next.conj(), 1),
        CPoly::constant(one),
    )
}

/// `F(z) = c_0 + 2Σ c_k z^k` truncated to `len` coefficients.
pub fn caratheodory_series(table: &MomentTable, len: usize) -> CPoly {
    let prec = table.prec();
    let coeffs = (0..len)
        .map(|k| {
            if k == 0 {
                table.get(0).clone()
            } else {
                table.get(k as i64).scale_f64(2.0)
            }
        })
        .collect();
    CPoly::new(prec, coeffs)
}

/// Power series of `ε_n = ψ_n + Fφ_n` and `ε*_n = ψ*_n − Fφ*_n`, truncated to `len`.
/// The Cauchy transform of `conj(φ_n) zⁿ` is `−ε*_n`.
pub fn epsilon_series(vt: &VerblunskyTable, f: &CPoly, n: usize, len: usize) -> (CPoly, CPoly) {
    let e = (&vt.psi[n] + &(f * &vt.phi[n])).truncate(len);
    let es = (&vt.psi_star(n) - &(f * &vt.phi_star(n))).truncate(len);
    (e, es)
}

#[derive(Clone, Debug)]
pub struct LaxFit {
    pub n: usize,
    /// `Ω_n − zΘ_n`
    pub diag: CPoly,
    pub theta: CPoly,
    /// `Ω*_n − Θ*_n`
    pub diag_star: CPoly,
    pub theta_star: CPoly,
    pub a: MatPoly2,
    pub residual: f64,
    pub residual_star: f64,
}

/// Moments needed by [`fit_a`] at degree `n`.
pub fn required_moments(n: usize) -> usize {
    n + 5
}

pub fn fit_a(vt: &VerblunskyTable, p: &QWeightParams, table: &MomentTable, n: usize, tol: f64) -> Result<LaxFit> {
    if n == 0 || n + 1 > vt.n_max() {
        return Err(Error::Config(format!("fit needs 1 <= n < {}", vt.n_max())));
    }
    let an = &vt.alpha[n + 1];
    if an.is_zero() {
        return Err(Error::Degenerate { n: n + 1 });
    }
    let len = n + 5;
    if !table.covers(len) {
        return Err(Error::Config(format!("fit at n = {n} needs moments up to K = {len}")));
    }
    let (v, w) = vw_polys(p);
    let f = caratheodory_series(table, len);
    let (e, es) = epsilon_series(vt, &f, n, len);
    let ph = &vt.phi[n];
    let phs = vt.phi_star(n);
    let rows_eq = n + 3;
    let ac = an.conj();
    let c = |p: &CPoly, k: isize| p.coeff_i(k);

    // P φ − α Θ φ* = V φ(qz) and P ε + α Θ ε* = W ε(qz)
    let lhs_phi = &v * &ph.q_shift(&p.q);
    let lhs_eps = &w * &e.q_shift(&p.q);
    let mut rows = Vec::with_capacity(2 * rows_eq);
    let mut rhs = Vec::with_capacity(2 * rows_eq);
    for k in 0..rows_eq as isize {
        rows.push(vec![c(ph, k), c(ph, k - 1), c(ph, k - 2), -(an * &c(&phs, k)), -(an * &c(&phs, k - 1))]);
        rhs.push(c(&lhs_phi, k));
    }
    for k in 0..rows_eq as isize {
        rows.push(vec![c(&e, k), c(&e, k - 1), c(&e, k - 2), an * &c(&es, k), an * &c(&es, k - 1)]);
        rhs.push(c(&lhs_eps, k));
    }
    let (x, residual) = least_squares(&rows, &rhs)?;
    if residual > tol {
        return Err(Error::Fit { n, residual, tol });
    }
    let prec = vt.prec();
    let diag = CPoly::new(prec, x[..3].to_vec());
    let theta = CPoly::new(prec, x[3..].to_vec());

    // P* φ* − zᾱ Θ* φ = V φ*(qz) and P* ε* + zᾱ Θ* ε = W ε*(qz)
    let lhs_phis = &v * &phs.q_shift(&p.q);
    let lhs_epss = &w * &es.q_shift(&p.q);
    let mut rows = Vec::with_capacity(2 * rows_eq);
    let mut rhs = Vec::with_capacity(2 * rows_eq);
    for k in 0..rows_eq as isize {
        rows.push(vec![c(&phs, k), c(&phs, k - 1), c(&phs, k - 2), -(&ac * &c(ph, k - 1)), -(&ac * &c(ph, k - 2))]);
        rhs.push(c(&lhs_phis, k));
    }
    for k in 0..rows_eq as isize {
        rows.push(vec![c(&es, k), c(&es, k - 1), c(&es, k - 2), &ac * &c(&e, k - 1), &ac * &c(&e, k - 2)]);
        rhs.push(c(&lhs_epss, k));
    }
    let (xs, residual_star) = least_squares(&rows, &rhs)?;
    if residual_star > tol {
        return Err(Error::Fit {
            n,
            residual: residual_star,
            tol,
        });
    }
    let diag_star = CPoly::new(prec, xs[..3].to_vec());
    let theta_star = CPoly::new(prec, xs[3..].to_vec());

    let a = MatPoly2::new(
        diag.clone(),
        theta.scale(&-an),
        theta_star.shift_up(1).scale(&-ac),
        diag_star.clone(),
    );
    Ok(LaxFit {
        n,
        diag,
        theta,
        diag_star,
        theta_star,
        a,
        residual,
        residual_star,
    })
}

/// `Θ_n(z) = (a − bq^{n+1}) z + (b̄qⁿ − ā) α_n/α_{n+1}`.
pub fn theta_closed_form(p: &QWeightParams, vt: &VerblunskyTable, n: usize) -> CPoly {
    let qn = Cx::from_real(&p.q).powu(n as u32);
    let qn1 = qn.scale(&p.q);
    let ratio = &vt.alpha[n] / &vt.alpha[n + 1];
    let c0 = &(&(&p.b.conj() * &qn) - &p.a.conj()) * &ratio;
    let c1 = &p.a - &(&p.b * &qn1);
    CPoly::new(p.prec, vec![c0, c1])
}

/// `Θ*_n(z) = (aq − bq^{n+1}) ᾱ_n/ᾱ_{n+1} z + b̄q^{n+1} − ā`.
pub fn theta_star_closed_form(p: &QWeightParams, vt: &VerblunskyTable, n: usize) -> CPoly {
    let q = Cx::from_real(&p.q);
    let qn1 = q.powu(n as u32 + 1);
    let ratio = &vt.alpha[n].conj() / &vt.alpha[n + 1].conj();
    let c1 = &(&(&p.a * &q) - &(&p.b * &qn1)) * &ratio;
    let c0 = &(&p.b.conj() * &qn1) - &p.a.conj();
    CPoly::new(p.prec, vec![c0, c1])
}

/// Leading and constant coefficients of both diagonal entries compared with
/// `bq^{n+1}, b̄qⁿ` and `aq, ā`.
#[derive(Clone, Debug, Serialize)]
pub struct CornerData {
    pub n: usize,
    pub diag_leading: f64,
    pub diag_constant: f64,
    pub diag_star_leading: f64,
    pub diag_star_constant: f64,
}

impl CornerData {
    pub fn max(&self) -> f64 {
        self.diag_leading
            .max(self.diag_constant)
            .max(self.diag_star_leading)
            .max(self.diag_star_constant)
    }
}

pub fn corner_data(p: &QWeightParams, fit: &LaxFit) -> CornerData {
    let q = Cx::from_real(&p.q);
    let qn = q.powu(fit.n as u32);
    let qn1 = &qn * &q;
    let err = |got: Cx, want: Cx| (&got - &want).abs_f64();
    CornerData {
        n: fit.n,
        diag_leading: err(fit.diag.coeff(2), &p.b * &qn1),
        diag_constant: err(fit.diag.coeff(0), &p.b.conj() * &qn),
        diag_star_leading: err(fit.diag_star.coeff(2), &p.a * &q),
        diag_star_constant: err(fit.diag_star.coeff(0), p.a.conj()),
    }
}

/// `A_{n+1}B_n − B_n(qz)A_n`, largest coefficient.
pub fn check_compat(a_n: &MatPoly2, a_next: &MatPoly2, b_n: &MatPoly2, q: &Real) -> f64 {
    (&(a_next * b_n) - &(&b_n.q_shift(q) * a_n)).max_abs()
}

/// `det A_n = const · V W`: the fitted constant and the largest coefficient
/// of `det A_n − const·VW`.
#[derive(Clone, Debug, Serialize)]
pub struct DeterminantLaw {
    pub n: usize,
    pub constant: [f64; 2],
    pub residual: f64,
    /// `|constant| − qⁿ`
    pub modulus_error: f64,
    /// `constant/qⁿ`, expected `+1`
    pub sign: [f64; 2],
}

pub fn determinant_law(p: &QWeightParams, fit: &LaxFit) -> DeterminantLaw {
    let (v, w) = vw_polys(p);
    let vw = &v * &w;
    let det = fit.a.det();
    let constant = &det.leading() / &vw.leading();
    let residual = (&det - &vw.scale(&constant)).max_abs();
    let qn = Cx::from_real(&p.q).powu(fit.n as u32);
    DeterminantLaw {
        n: fit.n,
        constant: constant.to_pair(),
        residual,
        modulus_error: (constant.abs_f64() - qn.abs_f64()).abs(),
        sign: (&constant / &qn).to_pair(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LaxQReport {
    pub n: usize,
    /// `V φ_n(qz) − (A_n Y_n)_{11}`, coefficient-wise
    pub phi: f64,
    /// `V φ*_n(qz) − (A_n Y_n)_{21}`, coefficient-wise
    pub phi_star: f64,
    /// relative residual of the second column of `V Y_n(qz) = A_n Y_n` at sample points
    pub epsilon: f64,
    pub points: usize,
}

/// Both columns of `V(z) Y_n(qz) = A_n(z) Y_n(z)`: the polynomial column
/// coefficient-wise, the `ε` column at `points` samples on `|z| = radius`
/// with quadrature-evaluated `ε_n`, `ε*_n` and the weight.
pub fn check_lax_q(
    vt: &VerblunskyTable,
    p: &QWeightParams,
    quad: &CircleQuadrature,
    fit: &LaxFit,
    points: usize,
    radius: f64,
) -> Result<LaxQReport> {
    let n = fit.n;
    let (v, _) = vw_polys(p);
    let a = &fit.a;
    let ph = &vt.phi[n];
    let phs = vt.phi_star(n);
    let phi_res = (&(&v * &ph.q_shift(&p.q)) - &(&(&a.e11 * ph) + &(&a.e12 * &phs))).max_abs();
    let phis_res = (&(&v * &phs.q_shift(&p.q)) - &(&(&a.e21 * ph) + &(&a.e22 * &phs))).max_abs();

    let prec = p.prec;
    let mut eps_res = 0.0f64;
    for j in 0..points {
        let t = crate::mp::real(prec, 0.3 + 2.0 * std::f64::consts::PI * j as f64 / points as f64);
        let z = Cx::unit(&t).scale_f64(radius);
        let zq = z.scale(&p.q);
        let col = |z: &Cx| -> Result<(Cx, Cx)> {
            let w = weight_eval(p, z)?;
            let e = crate::opuc::epsilon_quadrature(quad, vt, n, z);
            let es = crate::opuc::epsilon_star_quadrature(quad, vt, n, z);
            Ok((&e / &w, &es / &w))
        };
        let (y1q, y2q) = col(&zq)?;
        let (y1, y2) = col(&z)?;
        let m = a.eval(&z);
        let vz = v.eval(&z);
        let r1 = &(&vz * &y1q) - &(&(&m[0][0] * &y1) + &(&m[0][1] * &y2));
        let r2 = &(&vz * &y2q) - &(&(&m[1][0] * &y1) + &(&m[1][1] * &y2));
        let scale = (&vz * &y1q).abs_f64().max((&vz * &y2q).abs_f64());
        eps_res = eps_res.max(r1.abs_f64().max(r2.abs_f64()) / scale);
    }
    Ok(LaxQReport {
        n,
        phi: phi_res,
        phi_star: phis_res,
        epsilon: eps_res,
        points,
    })
}

/// Fitted `A_n` for `n = 1..=n_max` and the compatibility residuals between
/// consecutive ones.
#[derive(Clone, Debug)]
pub struct LaxChain {
    pub fits: Vec<LaxFit>,
    /// `(n, residual)` for `A_{n+1}B_n − B_n(qz)A_n`
    pub compat: Vec<(usize, f64)>,
}

pub fn lax_chain(vt: &VerblunskyTable, p: &QWeightParams, table: &MomentTable, n_max: usize, tol: f64) -> Result<LaxChain> {
    use rayon::prelude::*;
    let fits = (1..=n_max)
        .into_par_iter()
        .map(|n| fit_a(vt, p, table, n, tol))
        .collect::<Result<Vec<_>>>()?;
    let compat = fits
        .windows(2)
        .map(|w| {
            let n = w[0].n;
            (n, check_compat(&w[0].a, &w[1].a, &build_b(&vt.alpha[n + 1]), &p.q))
        })
        .collect();
    Ok(LaxChain { fits, compat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opuc::verblunsky_from_moments;
    use crate::qseries::{default_nodes, moments};

    fn setup(a: [f64; 2], b: [f64; 2], n_max: usize, prec: u32) -> (QWeightParams, MomentTable, VerblunskyTable) {
        let p = QWeightParams::new(a, b, 0.5, prec).unwrap();
        let k = n_max + 8;
        let t = moments(&p, k, default_nodes(k, prec), true, None).unwrap();
        let vt = verblunsky_from_moments(&t, n_max + 2).unwrap();
        (p, t, vt)
    }

    #[test]
    fn b_matrix_examples() {
        let z = Cx::zero(128);
        let b0 = build_b(&z);
        assert_eq!(b0.e11, CPoly::monomial(Cx::one(128), 1));
        assert!(b0.e12.is_zero() && b0.e21.is_zero());
        let a = Cx::new(128, 0.3, -0.4);
        let det = build_b(&a).det();
        let want = CPoly::monomial(Cx::from_real(&(rug::Float::with_val(128, 1) - a.norm_sqr())), 1);
        assert!((&det - &want).max_abs() < 1e-36);
    }

    #[test]
    fn b_reproduces_szego_recursion() {
        let (_, _, vt) = setup([0.3, 0.2], [0.5, 0.0], 6, 128);
        for n in 0..6 {
            let b = build_b(&vt.alpha[n + 1]);
            let top = &(&b.e11 * &vt.phi[n]) + &(&b.e12 * &vt.phi_star(n));
            let bottom = &(&b.e21 * &vt.phi[n]) + &(&b.e22 * &vt.phi_star(n));
            assert!((&top - &vt.phi[n + 1]).max_abs() < 1e-35);
            assert!((&bottom - &vt.phi_star(n + 1)).max_abs() < 1e-35);
        }
    }

    #[test]
    fn fit_matches_closed_forms_and_corners() {
        let (p, t, vt) = setup([0.3, 0.2], [0.4, -0.25], 6, 192);
        for n in 1..=6 {
            let fit = fit_a(&vt, &p, &t, n, 1e-40).unwrap();
            assert!((&fit.theta - &theta_closed_form(&p, &vt, n)).max_abs() < 1e-40, "theta n={n}");
            assert!((&fit.theta_star - &theta_star_closed_form(&p, &vt, n)).max_abs() < 1e-40, "theta* n={n}");
            assert!(corner_data(&p, &fit).max() < 1e-40);
        }
    }

    #[test]
    fn compatibility_and_determinant() {
        let (p, t, vt) = setup([0.3, 0.2], [0.5, 0.0], 8, 192);
        let chain = lax_chain(&vt, &p, &t, 8, 1e-40).unwrap();
        for (_, r) in &chain.compat {
            assert!(*r < 1e-40);
        }
        for fit in &chain.fits {
            let d = determinant_law(&p, fit);
            assert!(d.residual < 1e-40);
            assert!(d.modulus_error < 1e-40);
            assert!((d.sign[0] - 1.0).abs() < 1e-30 && d.sign[1].abs() < 1e-30);
            assert!(fit.a.max_degree() <= Some(2));
        }
    }

    #[test]
    fn vanishing_coefficient_is_degenerate() {
        let (p, t, vt) = setup([0.2, 0.0], [0.2, 0.0], 4, 128);
        let mut vt = vt;
        vt.alpha[3] = Cx::zero(128);
        assert_eq!(fit_a(&vt, &p, &t, 2, 1e-20).unwrap_err(), Error::Degenerate { n: 3 });
    }

    #[test]
    fn q_difference_equation_holds() {
        let (p, t, vt) = setup([0.3, 0.2], [0.5, 0.0], 4, 160);
        let quad = CircleQuadrature::new(&p, 512).unwrap();
        let fit = fit_a(&vt, &p, &t, 3, 1e-30).unwrap();
        let rep = check_lax_q(&vt, &p, &quad, &fit, 10, 0.3).unwrap();
        assert!(rep.phi < 1e-30 && rep.phi_star < 1e-30);
        assert!(rep.epsilon < 1e-30, "{}", rep.epsilon);
    }
}
