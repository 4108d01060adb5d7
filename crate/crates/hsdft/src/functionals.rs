//! Grand potential P, the free-energy apparatus N, E, S, F, second variations and
//! the derivative identities along solution branches.

use crate::eos::{g1_raw, g2p_raw, EosMode, EosModel};
use crate::error::{Error, Result};
use crate::field::{FieldSolver, RadialDomain};
use crate::quadrature::adaptive;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalValues {
    pub p: f64,
    pub n: f64,
    pub e: f64,
    pub s: f64,
    pub f: f64,
    /// int eta (-(V * eta)); the interaction energy is -alpha q / 2.
    pub q: f64,
    pub gamma: Option<f64>,
}

impl FunctionalValues {
    /// Relative defect of gamma N - F = P.
    pub fn legendre_defect(&self) -> Option<f64> {
        self.gamma.map(|g| (g * self.n - self.f - self.p).abs() / self.p.abs().max(1e-300))
    }
}

/// int eta (-(V * eta)) d^3r.
pub fn interaction(solver: &FieldSolver, values: &[f64]) -> f64 {
    solver.op.quadratic_form(values)
}

pub fn n_functional(domain: &RadialDomain, values: &[f64]) -> f64 {
    domain.integrate(values)
}

/// P = int wp(gamma - alpha V * eta) + (1/2) int int alpha V eta eta.
pub fn pressure_functional(solver: &FieldSolver, alpha: f64, gamma: f64, values: &[f64]) -> Result<f64> {
    let u = solver.potentials(alpha, gamma, values);
    let wp: Vec<f64> = u.iter().map(|&x| solver.eos.wp(x)).collect::<Result<_>>()?;
    Ok(solver.domain().integrate(&wp) - 0.5 * alpha * interaction(solver, values))
}

pub fn e_functional(solver: &FieldSolver, alpha: f64, values: &[f64]) -> f64 {
    1.5 * n_functional(solver.domain(), values) - 0.5 * alpha * interaction(solver, values)
}

pub fn s_functional(eos: &EosModel, domain: &RadialDomain, values: &[f64]) -> Result<f64> {
    if eos.mode != EosMode::IdealGas {
        if let Some(&v) = values.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
            return Err(Error::Domain { name: "eta", value: v, domain: "(0, 1)" });
        }
    }
    let s: Vec<f64> = values.iter().map(|&e| eos.entropy_density(e)).collect();
    Ok(domain.integrate(&s))
}

pub fn f_functional(solver: &FieldSolver, alpha: f64, values: &[f64]) -> Result<f64> {
    Ok(e_functional(solver, alpha, values) - s_functional(&solver.eos, solver.domain(), values)?)
}

/// All functionals; `gamma` marks the field as a solution at that chemical potential.
pub fn evaluate(solver: &FieldSolver, alpha: f64, gamma: f64, values: &[f64], is_solution: bool) -> Result<FunctionalValues> {
    let dom = solver.domain();
    let q = interaction(solver, values);
    let n = n_functional(dom, values);
    let e = 1.5 * n - 0.5 * alpha * q;
    let s = s_functional(&solver.eos, dom, values)?;
    Ok(FunctionalValues {
        p: pressure_functional(solver, alpha, gamma, values)?,
        n,
        e,
        s,
        f: e - s,
        q,
        gamma: is_solution.then_some(gamma),
    })
}

/// Entropy density from its integral definition with the Carnahan-Starling pressure,
/// 5/2 eta - eta ln eta - eta int_0^eta (g1(x) - x)/x^2 dx, by adaptive quadrature.
pub fn entropy_density_quadrature(eta: f64) -> f64 {
    let (inner, _) = adaptive(|x| if x == 0.0 { 4.0 } else { (g1_raw(x) - x) / (x * x) }, 0.0, eta, 1e-14, 1e-13);
    2.5 * eta - eta * eta.ln() - eta * inner
}

/// Derivatives along a solution branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchDerivatives {
    pub dp_dgamma: f64,
    pub dp_dalpha: f64,
    pub df_dn: f64,
    pub df_dalpha: f64,
}

pub fn branch_derivatives(solver: &FieldSolver, gamma: f64, values: &[f64]) -> BranchDerivatives {
    let q = interaction(solver, values);
    BranchDerivatives { dp_dgamma: n_functional(solver.domain(), values), dp_dalpha: 0.5 * q, df_dn: gamma, df_dalpha: -0.5 * q }
}

/// wp'' at the local chemical potentials of a solution field.
fn curvatures(solver: &FieldSolver, alpha: f64, gamma: f64, values: &[f64]) -> Result<Vec<f64>> {
    solver.potentials(alpha, gamma, values).into_iter().map(|u| solver.eos.wp_double_prime(u)).collect()
}

/// -s''(eta), the positive local stiffness of the entropy.
fn entropy_stiffness(eos: &EosModel, eta: f64) -> f64 {
    match eos.mode {
        EosMode::IdealGas => 1.0 / eta,
        _ => g2p_raw(eta),
    }
}

/// P''(sigma, sigma) = 1/2 int wp'' (alpha V * sigma)^2 + 1/2 int int alpha V sigma sigma.
pub fn second_variation_p(solver: &FieldSolver, alpha: f64, gamma: f64, values: &[f64], sigma: &[f64]) -> Result<f64> {
    let d = curvatures(solver, alpha, gamma, values)?;
    let a = solver.convolve(alpha, sigma);
    let dom = solver.domain();
    let first: Vec<f64> = a.iter().zip(&d).map(|(x, p)| p * x * x).collect();
    Ok(0.5 * dom.integrate(&first) - 0.5 * alpha * solver.op.quadratic_form(sigma))
}

/// Removes the mean so that int sigma = 0.
pub fn project_mass_free(domain: &RadialDomain, sigma: &[f64]) -> Vec<f64> {
    let mean = domain.integrate(sigma) / domain.integrate(&vec![1.0; domain.n]);
    sigma.iter().map(|s| s - mean).collect()
}

/// F''(sigma, sigma) = -1/2 int s'' sigma^2 + 1/2 int int alpha V sigma sigma on mass-free sigma.
pub fn second_variation_f(solver: &FieldSolver, alpha: f64, values: &[f64], sigma: &[f64]) -> Result<f64> {
    let dom = solver.domain();
    let sigma = project_mass_free(dom, sigma);
    let g: Vec<f64> = values.iter().zip(&sigma).map(|(&e, s)| entropy_stiffness(&solver.eos, e) * s * s).collect();
    Ok(0.5 * dom.integrate(&g) - 0.5 * alpha * solver.op.quadratic_form(&sigma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Indifferent,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// Extremal eigenvalue of the discretized form in the L2 metric: the largest for P,
    /// the smallest on mass-free perturbations for F.
    pub extreme_eigenvalue: f64,
    /// Eigenvalue at the other end of the spectrum.
    pub opposite_eigenvalue: f64,
    pub probe_min: f64,
    pub probe_max: f64,
    pub classification: Stability,
}

impl StabilityReport {
    /// Form takes both signs beyond round-off.
    pub fn indefinite(&self) -> bool {
        let (a, b) = (self.extreme_eigenvalue, self.opposite_eigenvalue);
        let tol = 1e-10 * a.abs().max(b.abs());
        a.min(b) < -tol && a.max(b) > tol
    }
}

/// Symmetric matrix of the form sigma -> sigma^T M sigma in coordinates y = W^{1/2} sigma.
fn to_l2(m: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let n = w.len();
    DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]) / (w[i] * w[j]).sqrt())
}

fn weighted_kernel(solver: &FieldSolver, w: &[f64]) -> DMatrix<f64> {
    let a = &solver.op.matrix;
    let n = w.len();
    DMatrix::from_fn(n, n, |i, j| 0.5 * (w[i] * a[(i, j)] + w[j] * a[(j, i)]))
}

fn random_probes(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

/// Unstable when the extremal eigenvalue crosses zero beyond round-off; stable when it
/// does not and every probe has the stable sign. Smooth kernels leave near-null
/// high-frequency directions, so an extremal eigenvalue at round-off level counts as stable.
fn classify(extreme: f64, scale: f64, probe_worst: f64, stable_negative: bool) -> Stability {
    let tol = 1e-10 * scale.max(1e-300);
    let (v, p) = if stable_negative { (extreme, probe_worst) } else { (-extreme, -probe_worst) };
    if v > tol {
        Stability::Unstable
    } else if p < 0.0 {
        Stability::Stable
    } else {
        Stability::Indifferent
    }
}

/// Local P-stability of a solution: stable when P'' < 0 for every perturbation.
pub fn p_stability(solver: &FieldSolver, alpha: f64, gamma: f64, values: &[f64], probes: usize, seed: u64) -> Result<StabilityReport> {
    let dom = solver.domain();
    let w = dom.volume_weights();
    let n = dom.n;
    let d = curvatures(solver, alpha, gamma, values)?;
    let a = &solver.op.matrix;
    let s = weighted_kernel(solver, &w);
    // 1/2 (alpha^2 A^T W D A - alpha S)
    let wd: Vec<f64> = w.iter().zip(&d).map(|(a, b)| a * b).collect();
    let mut da = a.clone();
    for i in 0..n {
        for j in 0..n {
            da[(i, j)] *= wd[i];
        }
    }
    let m = (a.transpose() * da) * (0.5 * alpha * alpha) - s * (0.5 * alpha);
    let eig = SymmetricEigen::new(to_l2(&m, &w));
    let top = eig.eigenvalues.max();
    let bottom = eig.eigenvalues.min();
    let values_probe: Vec<f64> = random_probes(n, probes, seed)
        .iter()
        .map(|p| second_variation_p(solver, alpha, gamma, values, p))
        .collect::<Result<_>>()?;
    let probe_min = values_probe.iter().cloned().fold(f64::INFINITY, f64::min);
    let probe_max = values_probe.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityReport {
        extreme_eigenvalue: top,
        opposite_eigenvalue: bottom,
        probe_min,
        probe_max,
        classification: classify(top, top.abs().max(bottom.abs()), probe_max, true),
    })
}

/// Local F-stability: stable when F'' > 0 for every mass-free perturbation.
pub fn f_stability(solver: &FieldSolver, alpha: f64, values: &[f64], probes: usize, seed: u64) -> Result<StabilityReport> {
    let dom = solver.domain();
    let w = dom.volume_weights();
    let n = dom.n;
    let s = weighted_kernel(solver, &w);
    let mut m = s * (-0.5 * alpha);
    for i in 0..n {
        m[(i, i)] += 0.5 * w[i] * entropy_stiffness(&solver.eos, values[i]);
    }
    let l2 = to_l2(&m, &w);
    // Householder reflection sending the constraint direction W^{1/2} 1 to e_0;
    // the complement is spanned by the remaining coordinates.
    let c: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut v: Vec<f64> = c.iter().map(|x| x / norm).collect();
    v[0] += 1.0;
    let vn = v.iter().map(|x| x * x).sum::<f64>();
    let h = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - 2.0 * v[i] * v[j] / vn);
    let rotated = &h * l2 * &h;
    let sub = rotated.view((1, 1), (n - 1, n - 1)).into_owned();
    let eig = SymmetricEigen::new(sub);
    let bottom = eig.eigenvalues.min();
    let top = eig.eigenvalues.max();
    let values_probe: Vec<f64> = random_probes(n, probes, seed)
        .iter()
        .map(|p| second_variation_f(solver, alpha, values, p))
        .collect::<Result<_>>()?;
    let probe_min = values_probe.iter().cloned().fold(f64::INFINITY, f64::min);
    let probe_max = values_probe.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityReport {
        extreme_eigenvalue: bottom,
        opposite_eigenvalue: top,
        probe_min,
        probe_max,
        classification: classify(bottom, top.abs().max(bottom.abs()), probe_min, false),
    })
}
