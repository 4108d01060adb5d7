//! Container solver: radial convolution operator, monotone Picard iteration,
//! Newton solves and the a-priori existence/uniqueness predicates.

use crate::eos::{g2_raw, g2p_raw, EosMode, EosModel, ETA_FCC, ETA_FS_LO};
use crate::error::{Error, Result};
use crate::kernels::{ball_volume, KernelSpec};
use crate::quadrature::{gl16, gl8, lagrange_weights};
use crate::uniform::{eta_bounds, solve_uniform, TriplicityRegion};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

const PANEL: usize = 8;

/// Ball of radius R with composite 8-point Gauss-Legendre panels on [0, R].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDomain {
    pub radius: f64,
    pub n: usize,
    pub nodes: Vec<f64>,
    /// Weights for integrals of the form int_0^R f(s) s^2 ds.
    pub weights: Vec<f64>,
    panel_width: f64,
}

impl RadialDomain {
    pub fn new(radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
        }
        if n < PANEL || !n.is_multiple_of(PANEL) {
            return Err(Error::InvalidParameter(format!("node count {n} must be a positive multiple of {PANEL}")));
        }
        let panels = n / PANEL;
        let h = radius / panels as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for p in 0..panels {
            let a = p as f64 * h;
            for (x, w) in gl8().on(a, a + h) {
                nodes.push(x);
                weights.push(w * x * x);
            }
        }
        Ok(RadialDomain { radius, n, nodes, weights, panel_width: h })
    }

    pub fn volume(&self) -> f64 {
        ball_volume(self.radius)
    }

    /// Quadrature weight of node i for volume integrals, 4 pi s_i^2 w_i.
    pub fn volume_weight(&self, i: usize) -> f64 {
        4.0 * PI * self.weights[i]
    }

    pub fn volume_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| 4.0 * PI * w).collect()
    }

    /// int_B f d^3r for nodal values f.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        4.0 * PI * self.weights.iter().zip(values).map(|(w, f)| w * f).sum::<f64>()
    }

    /// Index range of the panel containing r.
    fn panel_of(&self, r: f64) -> usize {
        ((r / self.panel_width) as usize).min(self.n / PANEL - 1)
    }

    /// Value at an arbitrary radius by Lagrange interpolation on the panel nodes.
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        let p = self.panel_of(r.clamp(0.0, self.radius));
        let idx = p * PANEL..(p + 1) * PANEL;
        let mut l = [0.0; PANEL];
        lagrange_weights(&self.nodes[idx.clone()], r, &mut l);
        l.iter().zip(&values[idx]).map(|(a, b)| a * b).sum()
    }
}

/// Radially symmetric density on a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub domain: Arc<RadialDomain>,
    pub values: Vec<f64>,
}

impl DensityField {
    pub fn new(domain: Arc<RadialDomain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.n {
            return Err(Error::InvalidParameter(format!("{} values for {} nodes", values.len(), domain.n)));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain { name: "eta", value: *v, domain: "(0, inf)" });
        }
        Ok(DensityField { domain, values })
    }

    pub fn constant(domain: Arc<RadialDomain>, value: f64) -> Self {
        let n = domain.n;
        DensityField { domain, values: vec![value; n] }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_distance(&self, other: &DensityField) -> f64 {
        sup_diff(&self.values, &other.values)
    }

    /// Writes a header line followed by `r,eta` rows.
    pub fn write_csv<W: Write>(&self, mut out: W, header: &str) -> Result<()> {
        writeln!(out, "# {header}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "eta"])?;
        for (r, e) in self.domain.nodes.iter().zip(&self.values) {
            w.write_record([r.to_string(), e.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Discretization of eta -> -(V * eta) on the radial grid: (A eta)_i approximates
/// the positive self-potential at node i.
#[derive(Debug, Clone)]
pub struct ConvolutionOperator {
    pub spec: KernelSpec,
    pub domain: Arc<RadialDomain>,
    pub matrix: DMatrix<f64>,
}

impl ConvolutionOperator {
    pub fn new(spec: KernelSpec, domain: Arc<RadialDomain>) -> Result<Self> {
        spec.validate()?;
        let n = domain.n;
        let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|i| row_coefficients(&spec, &domain, domain.nodes[i])).collect();
        let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Ok(ConvolutionOperator { spec, domain, matrix })
    }

    /// -(V * eta) at the nodes.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let n = self.domain.n;
        let m = &self.matrix;
        (0..n)
            .map(|i| {
                let mut s = 0.0;
                for j in 0..n {
                    s += m[(i, j)] * values[j];
                }
                s
            })
            .collect()
    }

    /// -(V * eta)(r) at any r >= 0, with eta interpolated between nodes.
    pub fn evaluate_at(&self, values: &[f64], r: f64) -> f64 {
        row_coefficients(&self.spec, &self.domain, r).iter().zip(values).map(|(c, v)| c * v).sum()
    }

    /// Quadratic form <sigma, A sigma> in the volume inner product.
    pub fn quadratic_form(&self, sigma: &[f64]) -> f64 {
        let a = self.apply(sigma);
        self.domain.integrate(&a.iter().zip(sigma).map(|(x, y)| x * y).collect::<Vec<_>>())
    }
}

fn row_coefficients(spec: &KernelSpec, domain: &RadialDomain, r: f64) -> Vec<f64> {
    let n = domain.n;
    let mut c = vec![0.0; n];
    if r < 1e-8 {
        for j in 0..n {
            let s = domain.nodes[j];
            c[j] = -4.0 * PI * domain.weights[j] * spec.eval_raw(s);
        }
        return c;
    }
    let pref = -2.0 * PI / r;
    let h = domain.panel_width;
    let panels = n / PANEL;
    let g8 = gl8();
    let mut l = [0.0; PANEL];
    for p in 0..panels {
        let a = p as f64 * h;
        let b = a + h;
        let base = p * PANEL;
        if r > a && r < b {
            let pn = &domain.nodes[base..base + PANEL];
            for (lo, hi) in [(a, r), (r, b)] {
                for (x, w) in gl16().on(lo, hi) {
                    let f = pref * w * x * spec.ring_difference(r + x, (r - x).abs());
                    lagrange_weights(pn, x, &mut l);
                    for k in 0..PANEL {
                        c[base + k] += f * l[k];
                    }
                }
            }
        } else {
            let half = 0.5 * h;
            for k in 0..PANEL {
                let s = domain.nodes[base + k];
                let w = half * g8.weights[k];
                c[base + k] += pref * w * s * spec.ring_difference(r + s, (r - s).abs());
            }
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotone {
    Up,
    Down,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Minimal,
    Maximal,
    Middle,
    Droplet,
    Vapor,
    Other,
}

/// Which statement certifies a maximal-solution launch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaximalCertification {
    /// Launched from 0.49 under the all-fluid condition: maximal among all fluid solutions.
    AllFluid,
    /// Launched from the given constant supersolution level: maximal among solutions below it.
    BelowLevel(f64),
    /// Launched from the largest algebraic root, which bounds every solution.
    AllSolutions,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub field: DensityField,
    pub alpha: f64,
    pub gamma: f64,
    pub iterations: usize,
    /// sup |eta - wp'(gamma + alpha A eta)|.
    pub residual: f64,
    pub monotone: Monotone,
    /// Largest per-step move against the monotone direction.
    pub monotone_violation: f64,
    pub branch: Branch,
    pub certified_fluid: bool,
    pub certification: Option<MaximalCertification>,
    /// Residual per iteration (Newton solvers).
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub residual_tol: f64,
    pub max_iter: usize,
    pub monotone_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { tol: 1e-10, residual_tol: 1e-9, max_iter: 200_000, monotone_tol: 1e-12 }
    }
}

/// Prop-5.1 launch selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Launch {
    Small,
    Large,
}

/// Solver bundle for one (EOS, kernel, domain).
#[derive(Debug, Clone)]
pub struct FieldSolver {
    pub eos: EosModel,
    pub op: Arc<ConvolutionOperator>,
    pub settings: SolverSettings,
}

impl FieldSolver {
    pub fn new(eos: EosModel, spec: KernelSpec, radius: f64, n: usize) -> Result<Self> {
        let domain = Arc::new(RadialDomain::new(radius, n)?);
        Ok(FieldSolver { eos, op: Arc::new(ConvolutionOperator::new(spec, domain)?), settings: SolverSettings::default() })
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn domain(&self) -> &Arc<RadialDomain> {
        &self.op.domain
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.op.spec
    }

    pub fn phi(&self) -> f64 {
        self.spec().phi_lambda(self.domain().radius)
    }

    /// -(alpha V * eta) at the nodes.
    pub fn convolve(&self, alpha: f64, values: &[f64]) -> Vec<f64> {
        let mut a = self.op.apply(values);
        a.iter_mut().for_each(|x| *x *= alpha);
        a
    }

    /// Local chemical potentials gamma - alpha V * eta.
    pub fn potentials(&self, alpha: f64, gamma: f64, values: &[f64]) -> Vec<f64> {
        self.convolve(alpha, values).into_iter().map(|x| gamma + x).collect()
    }

    fn apply_wp_prime(&self, u: &[f64], guess: &[f64]) -> Result<Vec<f64>> {
        u.iter().zip(guess).map(|(&ui, &g)| self.eos.density_seeded(ui, g)).collect()
    }

    /// The fixed-point map eta -> wp'(gamma - alpha V * eta).
    pub fn map(&self, alpha: f64, gamma: f64, values: &[f64]) -> Result<Vec<f64>> {
        let u = self.potentials(alpha, gamma, values);
        self.apply_wp_prime(&u, values)
    }

    pub fn residual(&self, alpha: f64, gamma: f64, values: &[f64]) -> Result<f64> {
        Ok(sup_diff(&self.map(alpha, gamma, values)?, values))
    }

    fn is_certified_fluid(&self, alpha: f64, gamma: f64, values: &[f64]) -> bool {
        match self.eos.mode {
            EosMode::IdealGas => true,
            _ => {
                let umax = self.potentials(alpha, gamma, values).into_iter().fold(f64::NEG_INFINITY, f64::max);
                umax < self.eos.gamma_fs - 1e-9
            }
        }
    }

    fn report(&self, alpha: f64, gamma: f64, values: Vec<f64>, iterations: usize, branch: Branch) -> Result<SolveReport> {
        let residual = self.residual(alpha, gamma, &values)?;
        let certified_fluid = self.is_certified_fluid(alpha, gamma, &values);
        Ok(SolveReport {
            field: DensityField { domain: self.domain().clone(), values },
            alpha,
            gamma,
            iterations,
            residual,
            monotone: Monotone::None,
            monotone_violation: 0.0,
            branch,
            certified_fluid,
            certification: None,
            residual_history: Vec::new(),
        })
    }

    /// Picard iteration eta <- wp'(gamma - alpha V * eta) from `eta0`.
    pub fn picard_iterate(&self, alpha: f64, gamma: f64, eta0: &DensityField) -> Result<SolveReport> {
        self.picard_observed(alpha, gamma, eta0, &mut |_, _| {})
    }

    /// Picard iteration with an observer called on every iterate (including the start).
    pub fn picard_observed(
        &self,
        alpha: f64,
        gamma: f64,
        eta0: &DensityField,
        observer: &mut dyn FnMut(usize, &[f64]),
    ) -> Result<SolveReport> {
        let s = self.settings;
        let mut cur = eta0.values.clone();
        observer(0, &cur);
        let mut direction = Monotone::None;
        let mut violation: f64 = 0.0;
        let mut first = true;
        for it in 1..=s.max_iter {
            let next = self.map(alpha, gamma, &cur)?;
            let (mut up, mut down) = (0.0f64, 0.0f64);
            for (a, b) in next.iter().zip(&cur) {
                let d = a - b;
                up = up.max(d);
                down = down.max(-d);
            }
            if first {
                direction = if down <= s.monotone_tol {
                    Monotone::Up
                } else if up <= s.monotone_tol {
                    Monotone::Down
                } else {
                    Monotone::None
                };
                first = false;
            } else {
                match direction {
                    Monotone::Up => violation = violation.max(down),
                    Monotone::Down => violation = violation.max(up),
                    Monotone::None => {}
                }
            }
            let change = up.max(down);
            cur = next;
            observer(it, &cur);
            if change < s.tol {
                let residual = self.residual(alpha, gamma, &cur)?;
                if residual < s.residual_tol {
                    let mut rep = self.report(alpha, gamma, cur, it, Branch::Other)?;
                    rep.monotone = if violation <= s.monotone_tol { direction } else { Monotone::None };
                    rep.monotone_violation = violation;
                    return Ok(rep);
                }
            }
            if cur.iter().any(|v| !v.is_finite()) {
                break;
            }
        }
        Err(Error::NoConvergence { what: "picard iteration", iterations: s.max_iter, residual: self.residual(alpha, gamma, &cur).unwrap_or(f64::NAN) })
    }

    /// Monotone-up launch from the constant subsolution wp'(gamma).
    pub fn minimal_solution(&self, alpha: f64, gamma: f64) -> Result<SolveReport> {
        let start = self.eos.density(gamma)?;
        let mut rep = self.picard_iterate(alpha, gamma, &DensityField::constant(self.domain().clone(), start))?;
        rep.branch = Branch::Minimal;
        Ok(rep)
    }

    /// Largest constant supersolution level and its certification.
    pub fn supersolution_level(&self, alpha: f64, gamma: f64) -> Result<(f64, MaximalCertification)> {
        let tau = self.phi();
        let at = alpha * tau;
        match self.eos.mode {
            EosMode::HardSphere => {
                if gamma - self.eos.gamma_fs + at * ETA_FS_LO <= 0.0 {
                    return Ok((ETA_FS_LO, MaximalCertification::AllFluid));
                }
                let roots = solve_uniform(at, gamma)?;
                let phi = |e: f64| g2_raw(e) - at * e - gamma;
                // Largest eta <= 0.49 with phi(eta) >= 0 is a down-crossing root of phi.
                roots
                    .roots
                    .iter()
                    .rev()
                    .find(|&&r| r <= ETA_FS_LO && g2p_raw(r) <= at && phi(r * (1.0 - 1e-12)) >= -1e-9)
                    .map(|&r| (r, MaximalCertification::BelowLevel(r)))
                    .ok_or_else(|| Error::InvalidParameter(format!(
                        "no constant supersolution at or below 0.49 for alpha Phi = {at}, gamma = {gamma}"
                    )))
            }
            EosMode::CsExtended => {
                let roots = solve_uniform(at, gamma)?;
                Ok((roots.largest(), MaximalCertification::AllSolutions))
            }
            EosMode::IdealGas => {
                // ln e - at e = gamma: the larger root, if any.
                if at <= 0.0 {
                    return Err(Error::InvalidParameter("ideal gas without attraction has no finite supersolution".into()));
                }
                let emax = 1.0 / at;
                let f = |e: f64| e.ln() - at * e - gamma;
                if f(emax) < 0.0 {
                    return Err(Error::InvalidParameter("no constant supersolution".into()));
                }
                let mut hi = emax * 2.0;
                while f(hi) > 0.0 {
                    hi *= 2.0;
                }
                let mut lo = emax;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if f(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok((lo, MaximalCertification::BelowLevel(lo)))
            }
        }
    }

    /// Monotone-down launch from the largest constant supersolution.
    pub fn maximal_solution(&self, alpha: f64, gamma: f64) -> Result<SolveReport> {
        let (level, cert) = self.supersolution_level(alpha, gamma)?;
        let mut rep = self.picard_iterate(alpha, gamma, &DensityField::constant(self.domain().clone(), level))?;
        rep.branch = Branch::Maximal;
        rep.certification = Some(cert);
        Ok(rep)
    }

    /// Launch wp'(gamma + alpha eta_mu (-(V * 1_{s B}))(r)) with eta_mu an outer root of the
    /// uniform equation for tau = Psi of the scaled ball, then iterate upward.
    pub fn subsolution_launch(&self, alpha: f64, gamma: f64, mu: Launch, sigma_grave: f64) -> Result<SolveReport> {
        if self.eos.mode != EosMode::CsExtended {
            return Err(Error::InvalidParameter("subsolution launch requires the CS-extended model".into()));
        }
        let radius = self.domain().radius;
        let psi = sigma_grave.powi(3) * self.spec().psi_lambda(sigma_grave * 2.0 * radius, self.domain().volume());
        let phi = self.phi();
        if !(TriplicityRegion::new(phi, false).contains(alpha, gamma) && TriplicityRegion::new(psi, false).contains(alpha, gamma)) {
            return Err(Error::InvalidParameter(format!(
                "(alpha, gamma) = ({alpha}, {gamma}) lies outside the triplicity regions for Phi = {phi}, Psi = {psi}"
            )));
        }
        let roots = solve_uniform(alpha * psi, gamma)?;
        let level = match mu {
            Launch::Small => roots.smallest(),
            Launch::Large => roots.largest(),
        };
        let shrunk = sigma_grave * radius;
        let u: Vec<f64> = self
            .domain()
            .nodes
            .iter()
            .map(|&r| gamma + alpha * level * self.spec().ball_potential(r, shrunk))
            .collect();
        let start: Vec<f64> = u.iter().map(|&x| self.eos.density(x)).collect::<Result<_>>()?;
        let mut rep = self.picard_iterate(alpha, gamma, &DensityField::new(self.domain().clone(), start)?)?;
        rep.branch = match mu {
            Launch::Small => Branch::Minimal,
            Launch::Large => Branch::Other,
        };
        Ok(rep)
    }

    /// wp'' at each node for the potentials u.
    fn curvature(&self, next: &[f64]) -> Vec<f64> {
        next.iter().map(|&e| self.eos.wp_double_prime_of_eta(e)).collect()
    }

    /// Damped Newton on eta - wp'(gamma - alpha V * eta) with a dense Jacobian.
    pub fn newton_solve(&self, alpha: f64, gamma: f64, eta0: &DensityField, tol: f64) -> Result<SolveReport> {
        let n = self.domain().n;
        let sup = self.eos.eta_sup();
        let mut eta = eta0.values.clone();
        let mut t_eta = self.map(alpha, gamma, &eta)?;
        let mut res = sup_diff(&eta, &t_eta);
        let mut history = vec![res];
        for it in 0..200 {
            if res < tol {
                let mut rep = self.report(alpha, gamma, eta, it, Branch::Other)?;
                rep.residual_history = history;
                return Ok(rep);
            }
            let d = self.curvature(&t_eta);
            let mut j = DMatrix::<f64>::identity(n, n);
            for i in 0..n {
                let s = d[i] * alpha;
                for k in 0..n {
                    j[(i, k)] -= s * self.op.matrix[(i, k)];
                }
            }
            let rhs = DVector::from_iterator(n, eta.iter().zip(&t_eta).map(|(a, b)| b - a));
            let delta = j.lu().solve(&rhs).ok_or(Error::Singular("newton solve"))?;
            let mut step = 1.0;
            let mut accepted = false;
            while step > 1e-10 {
                let trial: Vec<f64> = eta.iter().zip(delta.iter()).map(|(a, b)| a + step * b).collect();
                if trial.iter().all(|&v| v > 0.0 && v < sup) {
                    if let Ok(tt) = self.map(alpha, gamma, &trial) {
                        let r = sup_diff(&trial, &tt);
                        if r < (1.0 - 1e-4 * step) * res || r < tol {
                            eta = trial;
                            t_eta = tt;
                            res = r;
                            accepted = true;
                            break;
                        }
                    }
                }
                step *= 0.5;
            }
            history.push(res);
            if !accepted {
                break;
            }
        }
        Err(Error::NoConvergence { what: "newton solve", iterations: history.len(), residual: res })
    }

    /// Picard iteration at fixed mass: eta <- wp'(Gamma + alpha A eta) with Gamma chosen so
    /// that the new iterate has mass `n_target`. `damping` in (0, 1] mixes old and new.
    pub fn canonical_picard(&self, alpha: f64, n_target: f64, eta0: &DensityField, damping: f64) -> Result<SolveReport> {
        let s = self.settings;
        let mut cur = eta0.values.clone();
        let mut gamma = self.eos.gamma_of_eta((n_target / self.domain().volume()).min(0.49))?;
        for it in 1..=s.max_iter {
            let c = self.convolve(alpha, &cur);
            gamma = self.mass_multiplier(&c, n_target, gamma, &cur)?;
            let new: Vec<f64> = c.iter().zip(&cur).map(|(&ci, &g)| self.eos.density_seeded(gamma + ci, g)).collect::<Result<_>>()?;
            let next: Vec<f64> = cur.iter().zip(&new).map(|(a, b)| (1.0 - damping) * a + damping * b).collect();
            let change = sup_diff(&next, &cur);
            cur = next;
            if change < s.tol {
                let residual = self.residual(alpha, gamma, &cur)?;
                if residual < s.residual_tol {
                    let mut rep = self.report(alpha, gamma, cur, it, Branch::Other)?;
                    rep.residual = residual;
                    return Ok(rep);
                }
            }
        }
        Err(Error::NoConvergence { what: "canonical picard", iterations: s.max_iter, residual: f64::NAN })
    }

    /// Gamma with int wp'(Gamma + c) = n_target, by safeguarded Newton.
    fn mass_multiplier(&self, c: &[f64], n_target: f64, start: f64, guess: &[f64]) -> Result<f64> {
        let dom = self.domain();
        let mass = |g: f64| -> Result<(f64, f64)> {
            let mut m = 0.0;
            let mut dm = 0.0;
            for i in 0..dom.n {
                let e = self.eos.density_seeded(g + c[i], guess[i])?;
                let w = dom.volume_weight(i);
                m += w * e;
                dm += w * self.eos.wp_double_prime_of_eta(e);
            }
            Ok((m - n_target, dm))
        };
        let cmax = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut hi = self.eos.gamma_of_eta((n_target / dom.volume()).min(0.999 * ETA_FS_LO))?;
        let mut lo = hi - cmax - 1.0;
        while mass(lo)?.0 > 0.0 {
            lo -= 2.0 * (hi - lo);
        }
        while mass(hi)?.0 < 0.0 {
            hi += 1.0;
        }
        let mut g = start.clamp(lo, hi);
        for _ in 0..200 {
            let (f, df) = mass(g)?;
            if f.abs() < 1e-14 * n_target {
                return Ok(g);
            }
            if f > 0.0 {
                hi = g;
            } else {
                lo = g;
            }
            let mut next = g - f / df;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if hi - lo < 1e-15 * g.abs().max(1.0) {
                return Ok(next);
            }
            g = next;
        }
        Ok(g)
    }

    /// Newton on (eta, gamma) for eta = wp'(gamma + alpha A eta), int eta = n_target.
    pub fn bordered_newton(&self, alpha: f64, n_target: f64, eta0: &DensityField, gamma0: f64, tol: f64) -> Result<SolveReport> {
        let dom = self.domain().clone();
        let n = dom.n;
        let w = dom.volume_weights();
        let sup = self.eos.eta_sup();
        let mut eta = eta0.values.clone();
        let mut gamma = gamma0;
        let eval = |eta: &[f64], gamma: f64| -> Result<(Vec<f64>, f64, f64)> {
            let t = self.map(alpha, gamma, eta)?;
            let mass = dom.integrate(eta) - n_target;
            let r = sup_diff(eta, &t).max(mass.abs() / n_target);
            Ok((t, mass, r))
        };
        let (mut t, mut mass, mut res) = eval(&eta, gamma)?;
        let mut history = vec![res];
        for it in 0..200 {
            if res < tol {
                let mut rep = self.report(alpha, gamma, eta, it, Branch::Other)?;
                rep.residual_history = history;
                return Ok(rep);
            }
            let d = self.curvature(&t);
            let mut j = DMatrix::<f64>::zeros(n + 1, n + 1);
            for i in 0..n {
                let s = d[i] * alpha;
                for k in 0..n {
                    j[(i, k)] = -s * self.op.matrix[(i, k)];
                }
                j[(i, i)] += 1.0;
                j[(i, n)] = -d[i];
                j[(n, i)] = w[i];
            }
            let mut rhs = DVector::zeros(n + 1);
            for i in 0..n {
                rhs[i] = t[i] - eta[i];
            }
            rhs[n] = -mass;
            let delta = j.lu().solve(&rhs).ok_or(Error::Singular("bordered newton"))?;
            let mut step = 1.0;
            let mut accepted = false;
            while step > 1e-10 {
                let trial: Vec<f64> = (0..n).map(|i| eta[i] + step * delta[i]).collect();
                let tg = gamma + step * delta[n];
                if trial.iter().all(|&v| v > 0.0 && v < sup) {
                    if let Ok((tt, tm, tr)) = eval(&trial, tg) {
                        if tr < (1.0 - 1e-4 * step) * res || tr < tol {
                            eta = trial;
                            gamma = tg;
                            t = tt;
                            mass = tm;
                            res = tr;
                            accepted = true;
                            break;
                        }
                    }
                }
                step *= 0.5;
            }
            history.push(res);
            if !accepted {
                break;
            }
        }
        Err(Error::NoConvergence { what: "bordered newton", iterations: history.len(), residual: res })
    }
}

/// Structured result of the a-priori predicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredicateReport {
    pub phi: f64,
    /// Some eta in (0, 0.49] has gamma + alpha Phi eta <= g2(eta).
    pub existence_sufficient: bool,
    /// gamma - gamma_fs + alpha Phi 0.49 <= 0.
    pub all_fluid_sufficient: bool,
    /// gamma - gamma_fs + alpha Phi eta_fcc <= 0: no solution leaves the fluid regime.
    pub no_nonfluid_sufficient: bool,
    /// gamma - gamma_fs + alpha Phi wp'(gamma) >= 0: no all-fluid solution exists.
    pub no_fluid_necessary_violation: bool,
    /// gamma > gamma_fs: no solution is fluid anywhere.
    pub no_fluid_anywhere: bool,
    /// K alpha Phi < 1 together with existence: unique fluid solution.
    pub uniqueness_contraction: bool,
    /// Uniform triple region with positive varpi and the no-non-fluid bound for ||V||_1.
    pub triple_candidate: bool,
}

pub fn predicates(eos: &EosModel, spec: &KernelSpec, alpha: f64, gamma: f64, radius: f64) -> PredicateReport {
    let phi = spec.phi_lambda(radius);
    let at = alpha * phi;
    let gfs = eos.gamma_fs;
    let f = |e: f64| g2_raw(e) - at * e - gamma;
    let mut best = f(ETA_FS_LO);
    if let Ok((el, _)) = eta_bounds(at) {
        if el < ETA_FS_LO {
            best = best.max(f(el));
        }
    }
    let existence = best >= 0.0;
    let wp1 = eos.wp_prime(gamma, crate::eos::Side::Left).unwrap_or(f64::NAN);
    let triple = match spec.l1_norm_r3() {
        Ok(norm) => {
            let an = alpha * norm;
            TriplicityRegion::new(norm, true).contains(alpha, gamma)
                && crate::uniform::varpi(an, gamma).map(|v| v > 0.0).unwrap_or(false)
                && gamma + an * ETA_FCC <= gfs
        }
        Err(_) => false,
    };
    PredicateReport {
        phi,
        existence_sufficient: existence,
        all_fluid_sufficient: gamma - gfs + at * ETA_FS_LO <= 0.0,
        no_nonfluid_sufficient: gamma - gfs + at * ETA_FCC <= 0.0,
        no_fluid_necessary_violation: gamma - gfs + at * wp1 >= 0.0,
        no_fluid_anywhere: gamma > gfs,
        uniqueness_contraction: eos.k_gamma_fs * at < 1.0 && existence,
        triple_candidate: triple,
    }
}

/// Finite-difference residual of the radial PDE satisfied by psi = -(V * eta) for Yukawa
/// or Newton kernels, on a uniform grid of `m` intervals. Returns the sup of
/// |psi'' + 2 psi'/r + 4 pi A wp'(gamma + alpha psi) - kappa^2 psi| over interior points.
pub fn pde_residual(solver: &FieldSolver, sol: &SolveReport, m: usize) -> Result<f64> {
    let spec = *solver.spec();
    if spec.a_w > 0.0 || (spec.a_y > 0.0 && spec.a_n > 0.0) {
        return Err(Error::InvalidKernel("PDE form needs a pure Yukawa or pure Newton kernel".into()));
    }
    let (amp, k2) = if spec.a_y > 0.0 { (spec.a_y, spec.kappa * spec.kappa) } else { (spec.a_n, 0.0) };
    let radius = solver.domain().radius;
    let h = radius / m as f64;
    let psi: Vec<f64> = (0..=m)
        .into_par_iter()
        .map(|k| solver.op.evaluate_at(&sol.field.values, k as f64 * h))
        .collect();
    let mut worst: f64 = 0.0;
    for k in 1..m {
        let r = k as f64 * h;
        let lap = (psi[k + 1] - 2.0 * psi[k] + psi[k - 1]) / (h * h) + (psi[k + 1] - psi[k - 1]) / (h * r);
        let eta = solver.eos.density(sol.gamma + sol.alpha * psi[k])?;
        let res = lap + 4.0 * PI * amp * eta - k2 * psi[k];
        worst = worst.max(res.abs());
    }
    Ok(worst)
}

/// Boundary value psi(R) and the boundary integral it must equal:
/// Yukawa 4 pi A e^{-kR}/(kR) int r sinh(kr) eta dr, Newton (4 pi A / R) int r^2 eta dr.
pub fn boundary_values(solver: &FieldSolver, sol: &SolveReport) -> Result<(f64, f64)> {
    let spec = *solver.spec();
    let dom = solver.domain();
    let radius = dom.radius;
    let psi_r = solver.op.evaluate_at(&sol.field.values, radius);
    let integral = if spec.a_w == 0.0 && spec.a_n == 0.0 {
        let k = spec.kappa;
        // e^{-kR} sinh(kr) folded into decaying exponentials.
        let s: f64 = (0..dom.n)
            .map(|i| {
                let r = dom.nodes[i];
                let sh = 0.5 * ((k * (r - radius)).exp() - (-k * (r + radius)).exp());
                dom.weights[i] / r * sh * sol.field.values[i]
            })
            .sum();
        4.0 * PI * spec.a_y / (k * radius) * s
    } else if spec.a_w == 0.0 && spec.a_y == 0.0 {
        let s: f64 = (0..dom.n).map(|i| dom.weights[i] * sol.field.values[i]).sum();
        4.0 * PI * spec.a_n / radius * s
    } else {
        return Err(Error::InvalidKernel("boundary identity needs a pure Yukawa or pure Newton kernel".into()));
    };
    Ok((psi_r, integral))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_reproduces_volume() {
        let d = RadialDomain::new(3.0, 64).unwrap();
        let v: f64 = d.weights.iter().sum();
        assert!((v / 9.0 - 1.0).abs() < 1e-12);
        assert!(RadialDomain::new(3.0, 60).is_err());
    }

    #[test]
    fn constant_field_matches_ball_potential() {
        for spec in [KernelSpec::van_der_waals(1.0), KernelSpec::yukawa(1.0), KernelSpec::newton()] {
            let dom = Arc::new(RadialDomain::new(5.0, 512).unwrap());
            let op = ConvolutionOperator::new(spec, dom.clone()).unwrap();
            let a = op.apply(&vec![1.0; 512]);
            for (i, &r) in dom.nodes.iter().enumerate() {
                let exact = spec.ball_potential(r, 5.0);
                assert!((a[i] / exact - 1.0).abs() < 1e-6, "{spec:?} r={r}");
            }
            for r in [0.0, 1.0, 5.0, 7.0] {
                let exact = spec.ball_potential(r, 5.0);
                assert!((op.evaluate_at(&vec![1.0; 512], r) / exact - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn newton_point_mass_limit() {
        let dom = Arc::new(RadialDomain::new(1.0, 256).unwrap());
        let op = ConvolutionOperator::new(KernelSpec::newton(), dom.clone()).unwrap();
        let width: f64 = 0.05;
        let bump: Vec<f64> = dom.nodes.iter().map(|&r| (-(r / width).powi(2)).exp()).collect();
        let mass = dom.integrate(&bump);
        let unit: Vec<f64> = bump.iter().map(|b| b / mass).collect();
        for r in [2.0, 5.0] {
            assert!((op.evaluate_at(&unit, r) * r - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn picard_zero_coupling_one_step() {
        let s = FieldSolver::new(EosModel::hard_sphere(), KernelSpec::yukawa(1.0), 2.0, 64).unwrap();
        let rep = s.minimal_solution(0.0, -1.0).unwrap();
        assert!(rep.iterations <= 2);
        let e = crate::eos::g2_inverse_cs(-1.0).unwrap();
        assert!(rep.field.values.iter().all(|v| (v - e).abs() < 1e-14));
    }

    #[test]
    fn predicate_examples() {
        let eos = EosModel::hard_sphere();
        let y = KernelSpec::yukawa(1.0);
        let p = predicates(&eos, &y, 0.0, 0.0, 1.0);
        assert!(p.existence_sufficient);
        let p = predicates(&eos, &y, 0.0, eos.gamma_fs + 1.0, 1.0);
        assert!(p.no_fluid_anywhere);
        let alpha = 20.0 / y.phi_lambda(1.0);
        let p = predicates(&eos, &y, alpha, -5.0, 1.0);
        assert!(p.existence_sufficient && p.uniqueness_contraction);
    }
}
