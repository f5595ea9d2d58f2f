//! Monic orthogonal polynomials on the unit circle.
//!
//! Conventions: `φ_n` is monic of degree `n`, `α_n = φ_n(0)` with `α_0 = 1`,
//! and the recursion reads `φ_{n+1} = zφ_n + α_{n+1}φ*_n`. The second-kind
//! polynomials follow the sign-flipped recursion `ψ_{n+1} = zψ_n − α_{n+1}ψ*_n`.
//! Inner products use `⟨z^j, z^k⟩ = c_{k−j}` with `c_0 = 1`.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::lu_solve;
use crate::mp::{ulp_scale, Cx, Real};
use crate::poly::CPoly;
use crate::qseries::{CircleQuadrature, MomentTable};

pub fn star(p: &CPoly, n: usize) -> Result<CPoly> {
    p.star(n)
}

#[derive(Clone, Debug)]
pub struct VerblunskyTable {
    /// `α_0 = 1, α_1, …, α_N`
    pub alpha: Vec<Cx>,
    /// `σ_0 = 1, …, σ_N`
    pub sigma: Vec<Real>,
    pub phi: Vec<CPoly>,
    pub psi: Vec<CPoly>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerblunskyJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: Vec<[f64; 2]>,
    pub sigma: Vec<f64>,
    pub phi: Vec<Vec<[f64; 2]>>,
}

impl VerblunskyTable {
    pub fn n_max(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn prec(&self) -> u32 {
        self.sigma[0].prec()
    }

    pub fn phi_star(&self, n: usize) -> CPoly {
        self.phi[n].star(n).expect("phi_n has degree n")
    }

    pub fn psi_star(&self, n: usize) -> CPoly {
        self.psi[n].star(n).expect("psi_n has degree n")
    }

    pub fn to_json(&self) -> VerblunskyJson {
        VerblunskyJson {
            n: self.n_max(),
            alpha: self.alpha.iter().map(Cx::to_pair).collect(),
            sigma: self.sigma.iter().map(Float::to_f64).collect(),
            phi: self.phi.iter().map(CPoly::to_pairs).collect(),
        }
    }

    /// Rows `(n, Re α_n, Im α_n, σ_n)`.
    pub fn csv_rows(&self) -> Vec<(usize, f64, f64, f64)> {
        self.alpha
            .iter()
            .zip(&self.sigma)
            .enumerate()
            .map(|(n, (a, s))| {
                let [re, im] = a.to_pair();
                (n, re, im, s.to_f64())
            })
            .collect()
    }
}

/// `⟨p, r⟩ = Σ_{j,k} p_j r̄_k c_{k−j}`.
pub fn inner(table: &MomentTable, p: &CPoly, r: &CPoly) -> Cx {
    let mut acc = Cx::zero(table.prec());
    for (j, pj) in p.coeffs().iter().enumerate() {
        for (k, rk) in r.coeffs().iter().enumerate() {
            acc += &(&(pj * &rk.conj()) * table.get(k as i64 - j as i64));
        }
    }
    acc
}

pub fn verblunsky_from_moments(table: &MomentTable, n_max: usize) -> Result<VerblunskyTable> {
    if !table.covers(n_max) {
        return Err(Error::Config(format!(
            "moment table has K = {} but degree {n_max} needs K >= {n_max}",
            table.k_max
        )));
    }
    if !table.normalized {
        return Err(Error::Config("moments must be normalized to c_0 = 1".into()));
    }
    let prec = table.prec();
    let limit = Float::with_val(prec, 1) - ulp_scale(prec, prec as i32 / 2);
    let one = CPoly::constant(Cx::one(prec));
    let mut alpha = vec![Cx::one(prec)];
    let mut sigma = vec![Float::with_val(prec, 1)];
    let mut phi = vec![one.clone()];
    let mut psi = vec![one.clone()];
    for n in 0..n_max {
        // ⟨zφ_n, 1⟩ = Σ_j φ_{n,j} c_{−(j+1)}
        let mut s = Cx::zero(prec);
        for (j, pj) in phi[n].coeffs().iter().enumerate() {
            s += &(pj * table.get(-(j as i64) - 1));
        }
        let a = -(&s.scale(&sigma[n].clone().recip()));
        if a.abs() >= limit {
            return Err(Error::SingularMeasure {
                n: n + 1,
                modulus: a.abs_f64(),
            });
        }
        let zphi = phi[n].shift_up(1);
        let next_phi = &zphi + &phi[n].star(n)?.scale(&a);
        let zpsi = psi[n].shift_up(1);
        let next_psi = &zpsi - &psi[n].star(n)?.scale(&a);
        let next_sigma = Float::with_val(prec, 1) - a.norm_sqr();
        sigma.push(next_sigma * &sigma[n]);
        phi.push(next_phi);
        psi.push(next_psi);
        alpha.push(a);
    }
    Ok(VerblunskyTable { alpha, sigma, phi, psi })
}

/// Independent route: solve the Toeplitz system `⟨φ_n, z^m⟩ = 0`,
/// `m < n`, for the monic `φ_n` at every degree and read off `φ_n(0)`.
/// Returns `α_1 … α_N`.
pub fn toeplitz_verblunsky(table: &MomentTable, n_max: usize) -> Result<Vec<Cx>> {
    if !table.covers(n_max) {
        return Err(Error::Config(format!("moment table too short for degree {n_max}")));
    }
    (1..=n_max)
        .map(|n| {
            // Σ_{j<n} φ_j c_{m−j} = −c_{m−n}
            let a: Vec<Vec<Cx>> = (0..n)
                .map(|m| (0..n).map(|j| table.get(m as i64 - j as i64).clone()).collect())
                .collect();
            let b: Vec<Cx> = (0..n).map(|m| -table.get(m as i64 - n as i64)).collect();
            Ok(lu_solve(a, b)?.swap_remove(0))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct OrthogonalityRow {
    pub n: usize,
    pub orthogonality: f64,
    pub norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrthogonalityReport {
    pub rows: Vec<OrthogonalityRow>,
    pub max_orthogonality: f64,
    pub max_norm: f64,
}

pub fn check_orthogonality(vt: &VerblunskyTable, table: &MomentTable) -> OrthogonalityReport {
    let prec = vt.prec();
    let rows: Vec<OrthogonalityRow> = (0..=vt.n_max())
        .map(|n| {
            let orthogonality = (0..n)
                .map(|m| inner(table, &vt.phi[n], &CPoly::monomial(Cx::one(prec), m)).abs_f64())
                .fold(0.0, f64::max);
            let norm = (&inner(table, &vt.phi[n], &vt.phi[n]) - &Cx::from_real(&vt.sigma[n])).abs_f64();
            OrthogonalityRow { n, orthogonality, norm }
        })
        .collect();
    OrthogonalityReport {
        max_orthogonality: rows.iter().map(|r| r.orthogonality).fold(0.0, f64::max),
        max_norm: rows.iter().map(|r| r.norm).fold(0.0, f64::max),
        rows,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WronskianRow {
    pub n: usize,
    /// `φ_{n+1}ψ_n − ψ_{n+1}φ_n − 2α_{n+1}σ_n zⁿ`; absent at `n = N`.
    pub phi_psi: Option<f64>,
    /// `φ*_{n+1}ψ*_n − ψ*_{n+1}φ*_n − 2ᾱ_{n+1}σ_n z^{n+1}`; absent at `n = N`.
    pub phi_psi_star: Option<f64>,
    /// `φ_nψ*_n + ψ_nφ*_n − 2σ_n zⁿ`
    pub mixed: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WronskianReport {
    pub rows: Vec<WronskianRow>,
    pub max_residual: f64,
}

pub fn wronskian_check(vt: &VerblunskyTable) -> WronskianReport {
    let n_max = vt.n_max();
    let rows: Vec<WronskianRow> = (0..=n_max)
        .map(|n| {
            let s = Cx::from_real(&vt.sigma[n]).scale_f64(2.0);
            let (ps, ss) = (vt.phi_star(n), vt.psi_star(n));
            let mixed = &(&(&vt.phi[n] * &ss) + &(&vt.psi[n] * &ps)) - &CPoly::monomial(s.clone(), n);
            let (phi_psi, phi_psi_star) = if n < n_max {
                let a = &vt.alpha[n + 1];
                let w1 = &(&(&vt.phi[n + 1] * &vt.psi[n]) - &(&vt.psi[n + 1] * &vt.phi[n]))
                    - &CPoly::monomial(a * &s, n);
                let w2 = &(&(&vt.phi_star(n + 1) * &ss) - &(&vt.psi_star(n + 1) * &ps))
                    - &CPoly::monomial(&a.conj() * &s, n + 1);
                (Some(w1.max_abs()), Some(w2.max_abs()))
            } else {
                (None, None)
            };
            WronskianRow {
                n,
                phi_psi,
                phi_psi_star,
                mixed: mixed.max_abs(),
            }
        })
        .collect();
    let max_residual = rows
        .iter()
        .flat_map(|r| [r.phi_psi.unwrap_or(0.0), r.phi_psi_star.unwrap_or(0.0), r.mixed])
        .fold(0.0, f64::max);
    WronskianReport { rows, max_residual }
}

/// Coefficient residual of `φ*_{n+1} = φ*_n + ᾱ_{n+1} z φ_n`, maximized over `n`.
pub fn szego_star_residual(vt: &VerblunskyTable) -> f64 {
    (0..vt.n_max())
        .map(|n| {
            let rhs = &vt.phi_star(n) + &vt.phi[n].shift_up(1).scale(&vt.alpha[n + 1].conj());
            (&vt.phi_star(n + 1) - &rhs).max_abs()
        })
        .fold(0.0, f64::max)
}

/// `ε_n(z) = ∫ (e^{iθ}+z)/(e^{iθ}−z) φ_n(e^{iθ}) dμ(θ)` by quadrature.
pub fn epsilon_quadrature(quad: &CircleQuadrature, vt: &VerblunskyTable, n: usize, z: &Cx) -> Cx {
    quad.integrate(|e| &(&(e + z) / &(e - z)) * &vt.phi[n].eval(e))
}

/// `ε*_n(z) = ∫ (e^{iθ}+z)/(e^{iθ}−z) conj(φ_n(e^{iθ})) zⁿ dμ(θ)` by quadrature.
pub fn epsilon_star_quadrature(quad: &CircleQuadrature, vt: &VerblunskyTable, n: usize, z: &Cx) -> Cx {
    let zn = z.powu(n as u32);
    quad.integrate(|e| &(&(e + z) / &(e - z)) * &(&vt.phi[n].eval(e).conj() * &zn))
}

/// Relative deviations of the four asymptotic laws of `ε_n`, `ε*_n` at
/// `|z| = small` and `|z| = 1/small`.
#[derive(Clone, Debug, Serialize)]
pub struct EpsilonAsymptotics {
    pub n: usize,
    pub radius: f64,
    /// `ε_n(z) / (2σ_n zⁿ) − 1` near 0
    pub near_zero: f64,
    /// `z ε_n(z) / (2σ_n α_{n+1}) − 1` near ∞
    pub near_infinity: f64,
    /// `ε*_n(z) / (2σ_n ᾱ_{n+1} z^{n+1}) − 1` near 0
    pub star_near_zero: f64,
    /// `ε*_n(z) / (2σ_n) − 1` near ∞
    pub star_near_infinity: f64,
}

pub fn epsilon_asymptotics_check(
    quad: &CircleQuadrature,
    vt: &VerblunskyTable,
    n: usize,
    small: f64,
) -> Result<EpsilonAsymptotics> {
    if n == 0 || n >= vt.n_max() {
        return Err(Error::Config(format!("need 1 <= n < {}", vt.n_max())));
    }
    let prec = vt.prec();
    let z0 = Cx::new(prec, small * 0.6, small * 0.8);
    let zi = z0.recip();
    let two_sigma = Cx::from_real(&vt.sigma[n]).scale_f64(2.0);
    let a = &vt.alpha[n + 1];
    let one = Cx::one(prec);
    let dev = |num: Cx, den: Cx| (&(&num / &den) - &one).abs_f64();
    Ok(EpsilonAsymptotics {
        n,
        radius: small,
        near_zero: dev(epsilon_quadrature(quad, vt, n, &z0), &two_sigma * &z0.powu(n as u32)),
        near_infinity: dev(&epsilon_quadrature(quad, vt, n, &zi) * &zi, &two_sigma * a),
        star_near_zero: dev(
            epsilon_star_quadrature(quad, vt, n, &z0),
            &(&two_sigma * &a.conj()) * &z0.powu(n as u32 + 1),
        ),
        star_near_infinity: dev(epsilon_star_quadrature(quad, vt, n, &zi), two_sigma.clone()),
    })
}
