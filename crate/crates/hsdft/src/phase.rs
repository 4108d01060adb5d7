//! Finite-volume transitions: the grand-canonical gas/liquid point, the petit-canonical
//! vapor/droplet point, the droplet criterion and decreasing rearrangements.

use crate::eos::{g2_raw, EosModel};
use crate::error::{Error, Result};
use crate::field::{Branch, DensityField, FieldSolver, RadialDomain, SolveReport};
use crate::functionals::{evaluate, FunctionalValues};
use crate::uniform::{coexistence_gamma, eta_bounds, gamma_boundaries, solve_uniform};
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub alpha: f64,
    pub gamma: f64,
    pub solution: SolveReport,
    pub functionals: FunctionalValues,
}

impl BranchPoint {
    pub fn from_report(solver: &FieldSolver, solution: SolveReport) -> Result<Self> {
        let functionals = evaluate(solver, solution.alpha, solution.gamma, &solution.field.values, true)?;
        Ok(BranchPoint { alpha: solution.alpha, gamma: solution.gamma, solution, functionals })
    }

    pub fn n(&self) -> f64 {
        self.functionals.n
    }
}

fn solve_branch(solver: &FieldSolver, alpha: f64, gamma: f64, branch: Branch, warm: Option<&DensityField>) -> Result<SolveReport> {
    match branch {
        Branch::Minimal | Branch::Vapor => solver.minimal_solution(alpha, gamma),
        Branch::Maximal => solver.maximal_solution(alpha, gamma),
        _ => {
            let start = warm.ok_or_else(|| Error::InvalidParameter("this branch needs a starting field".into()))?;
            let mut rep = solver.newton_solve(alpha, gamma, start, solver.settings.residual_tol)?;
            rep.branch = branch;
            Ok(rep)
        }
    }
}

/// Solution on `branch` with particle number `n_target`: safeguarded secant on gamma.
pub fn constrained_solve(solver: &FieldSolver, alpha: f64, n_target: f64, branch: Branch, warm: Option<&DensityField>) -> Result<BranchPoint> {
    let dom = solver.domain().clone();
    if branch == Branch::Droplet {
        let start = match warm {
            Some(w) => rescale_mass(w, n_target)?,
            None => return Err(Error::InvalidParameter("droplet branch needs a trial field".into())),
        };
        return droplet_solve(solver, alpha, n_target, &start).and_then(|r| BranchPoint::from_report(solver, r));
    }
    let vol = dom.volume();
    let mean = n_target / vol;
    if !(mean > 0.0 && mean < solver.eos.eta_sup().min(1.0)) {
        return Err(Error::InvalidParameter(format!("particle number {n_target} outside the attainable range")));
    }
    let hi0 = g2_raw(mean.min(0.999_999));
    let lo0 = hi0 - alpha * solver.phi() * mean - 1e-6;
    let mut warm_field = warm.cloned();
    let mut eval = |g: f64| -> Result<(f64, SolveReport)> {
        let rep = solve_branch(solver, alpha, g, branch, warm_field.as_ref())?;
        if matches!(branch, Branch::Middle | Branch::Other) {
            warm_field = Some(rep.field.clone());
        }
        Ok((dom.integrate(&rep.field.values) - n_target, rep))
    };
    let (mut a, mut b) = (lo0, hi0);
    let (mut fa, mut ra) = eval(a)?;
    let (mut fb, mut rb) = eval(b)?;
    let mut k = 0;
    while fa > 0.0 {
        a -= (b - a).max(1.0);
        (fa, ra) = eval(a)?;
        k += 1;
        if k > 60 {
            return Err(Error::Bracket("particle number below the branch".into()));
        }
    }
    while fb < 0.0 {
        b += (b - a).max(1.0);
        (fb, rb) = eval(b)?;
        k += 1;
        if k > 60 {
            return Err(Error::Bracket("particle number above the branch".into()));
        }
    }
    // Illinois regula falsi.
    let mut side = 0i8;
    for _ in 0..200 {
        if fa.abs() < 1e-9 * n_target {
            return BranchPoint::from_report(solver, ra);
        }
        if fb.abs() < 1e-9 * n_target {
            return BranchPoint::from_report(solver, rb);
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) || (b - a) < 1e-15 * b.abs().max(1.0) {
            c = 0.5 * (a + b);
        }
        let (fc, rc) = eval(c)?;
        if fc.abs() < 1e-9 * n_target || (b - a) < 1e-14 * b.abs().max(1.0) {
            return BranchPoint::from_report(solver, rc);
        }
        if fc < 0.0 {
            a = c;
            fa = fc;
            ra = rc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            rb = rc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::NoConvergence { what: "constrained solve", iterations: 200, residual: fa.abs().min(fb.abs()) })
}

fn rescale_mass(field: &DensityField, n_target: f64) -> Result<DensityField> {
    let n = field.domain.integrate(&field.values);
    DensityField::new(field.domain.clone(), field.values.iter().map(|v| v * n_target / n).collect())
}

/// Fixed-mass solution from a droplet-like start: damped canonical Picard, then bordered Newton.
pub fn droplet_solve(solver: &FieldSolver, alpha: f64, n_target: f64, start: &DensityField) -> Result<SolveReport> {
    let mut loose = solver.clone();
    loose.settings.tol = 1e-6;
    loose.settings.residual_tol = 1e-5;
    loose.settings.max_iter = 20_000;
    let pre = loose.canonical_picard(alpha, n_target, start, 0.5);
    let (field, gamma) = match pre {
        Ok(r) => (r.field, r.gamma),
        Err(_) => {
            let g = solver.eos.gamma_of_eta((n_target / solver.domain().volume()).min(0.49))?;
            (start.clone(), g)
        }
    };
    let mut rep = solver.bordered_newton(alpha, n_target, &field, gamma, 1e-11)?;
    rep.branch = Branch::Droplet;
    Ok(rep)
}

/// Concentric uniform ball of volume `ball_fraction |Lambda|` carrying mass N, floored at
/// 1e-12 outside; the interior density is rescaled so the discrete mass is exactly N.
pub fn droplet_trial(domain: &Arc<RadialDomain>, n: f64, ball_fraction: f64) -> Result<DensityField> {
    if !(ball_fraction > 0.0 && ball_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("ball fraction {ball_fraction} not in (0, 1]")));
    }
    let rho = n / (ball_fraction * domain.volume());
    if rho >= 1.0 {
        return Err(Error::InvalidParameter(format!("overpacked droplet: density {rho}")));
    }
    let rb = domain.radius * ball_fraction.cbrt();
    let floor = 1e-12;
    let inside: Vec<bool> = domain.nodes.iter().map(|&r| r <= rb).collect();
    let w = domain.volume_weights();
    let (mut m_in, mut m_out) = (0.0, 0.0);
    for i in 0..domain.n {
        if inside[i] {
            m_in += w[i];
        } else {
            m_out += w[i] * floor;
        }
    }
    if m_in == 0.0 {
        return Err(Error::InvalidParameter("droplet ball contains no nodes".into()));
    }
    let level = (n - m_out) / m_in;
    if level >= 1.0 {
        return Err(Error::InvalidParameter(format!("overpacked droplet: density {level}")));
    }
    DensityField::new(domain.clone(), inside.iter().map(|&b| if b { level } else { floor }).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DropletCriterion {
    pub alpha_norm: f64,
    pub gamma_hat: f64,
    pub eta_hat_m: f64,
    pub eta_hat_big_m: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub fires: bool,
    pub volume_ratio: f64,
}

/// Sufficient condition for a droplet to beat the vapor at N-hat, for alpha ||V||_1 = `alpha_norm`.
pub fn droplet_criterion(alpha_norm: f64) -> Result<DropletCriterion> {
    let (_, gamma_hat) = gamma_boundaries(alpha_norm, false)?;
    let (em, _) = eta_bounds(alpha_norm)?;
    let big = solve_uniform(alpha_norm, gamma_hat)?.largest();
    let h = |e: f64| (3.0 - 2.0 * e) / ((1.0 - e) * (1.0 - e));
    let rhs = 2.0 * ((big / em).ln() + h(big) - h(em)) / (big - em);
    Ok(DropletCriterion {
        alpha_norm,
        gamma_hat,
        eta_hat_m: em,
        eta_hat_big_m: big,
        lhs: alpha_norm,
        rhs,
        fires: alpha_norm > rhs,
        volume_ratio: big / em,
    })
}

/// Decreasing rearrangement: values sorted downward with the cumulative volume at the
/// right end of each step.
pub fn decreasing_rearrangement(field: &DensityField) -> Vec<(f64, f64)> {
    let w = field.domain.volume_weights();
    let mut pairs: Vec<(f64, f64)> = field.values.iter().cloned().zip(w).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut acc = 0.0;
    pairs
        .into_iter()
        .map(|(v, w)| {
            acc += w;
            (acc, v)
        })
        .collect()
}

fn step_value(steps: &[(f64, f64)], x: f64) -> f64 {
    let i = steps.partition_point(|s| s.0 < x);
    steps[i.min(steps.len() - 1)].1
}

/// Number of transversal crossings of the decreasing rearrangements of two fields.
pub fn rearrangement_intersections(a: &DensityField, b: &DensityField) -> usize {
    let ra = decreasing_rearrangement(a);
    let rb = decreasing_rearrangement(b);
    let mut cuts: Vec<f64> = ra.iter().chain(&rb).map(|s| s.0).collect();
    cuts.sort_by(f64::total_cmp);
    let scale = a.max().max(b.max());
    let tol = 1e-12 * scale;
    let mut last = 0i8;
    let mut count = 0;
    let mut prev = 0.0;
    for &c in &cuts {
        let x = 0.5 * (prev + c);
        prev = c;
        let d = step_value(&ra, x) - step_value(&rb, x);
        let s = if d > tol {
            1
        } else if d < -tol {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

#[derive(Debug, Clone)]
pub struct GcTransition {
    pub gamma_gl: f64,
    pub gas: BranchPoint,
    pub liquid: BranchPoint,
    /// N_liquid - N_gas: the jump of dP/dgamma.
    pub delta_n: f64,
    /// P of every known solution at the crossing; the best-known maximizer is the largest.
    pub known: Vec<(Branch, f64)>,
    pub evaluations: usize,
}

fn is_gas_like(rep: &SolveReport, eos: &EosModel) -> bool {
    rep.field.max() < eos.eta_wr
}

/// Bisection for P[maximal] = P[minimal] on gamma in the bracket (default: the
/// triplicity interval of alpha Phi).
pub fn grand_canonical_transition(solver: &FieldSolver, alpha: f64, bracket: Option<(f64, f64)>, scan: usize) -> Result<GcTransition> {
    let (lo, hi) = match bracket {
        Some(b) => b,
        None => gamma_boundaries(alpha * solver.phi(), false)?,
    };
    let mut evaluations = 0;
    let mut delta = |g: f64| -> Result<(f64, BranchPoint, BranchPoint)> {
        evaluations += 1;
        let m = BranchPoint::from_report(solver, solver.minimal_solution(alpha, g)?)?;
        let big = BranchPoint::from_report(solver, solver.maximal_solution(alpha, g)?)?;
        let d = big.functionals.p - m.functionals.p;
        // Coincident launches: the missing branch decides the side.
        let d = if m.solution.field.sup_distance(&big.solution.field) < 1e-7 {
            if is_gas_like(&m.solution, &solver.eos) {
                -f64::MIN_POSITIVE
            } else {
                f64::MIN_POSITIVE
            }
        } else {
            d
        };
        Ok((d, m, big))
    };
    let scan = scan.max(2);
    let eps = 1e-9 * (hi - lo);
    let grid: Vec<f64> = (0..=scan).map(|i| lo + eps + (hi - lo - 2.0 * eps) * i as f64 / scan as f64).collect();
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for &g in &grid {
        let d = match delta(g) {
            Ok((d, _, _)) => d,
            Err(Error::NoConvergence { .. }) => continue,
            Err(e) => return Err(e),
        };
        if let Some((pg, pd)) = prev {
            if pd < 0.0 && d > 0.0 {
                bracket = Some((pg, g));
                break;
            }
        }
        prev = Some((g, d));
    }
    let (mut a, mut b) = bracket.ok_or_else(|| Error::Bracket("P[maximal] - P[minimal] keeps one sign over the bracket".into()))?;
    for _ in 0..200 {
        let c = 0.5 * (a + b);
        let (d, m, big) = delta(c)?;
        let converged = d.abs() < 1e-8 * m.functionals.p.abs() && m.solution.field.sup_distance(&big.solution.field) >= 1e-7;
        if converged || b - a < 1e-15 * c.abs().max(1.0) {
            let delta_n = big.n() - m.n();
            let known = vec![(Branch::Minimal, m.functionals.p), (Branch::Maximal, big.functionals.p)];
            return Ok(GcTransition { gamma_gl: c, gas: m, liquid: big, delta_n, known, evaluations });
        }
        if d < 0.0 {
            a = c;
        } else {
            b = c;
        }
    }
    Err(Error::NoConvergence { what: "grand-canonical bisection", iterations: 200, residual: b - a })
}

#[derive(Debug, Clone)]
pub struct PcTransition {
    pub n_vd: f64,
    pub vapor: BranchPoint,
    pub droplet: BranchPoint,
    /// Gamma[droplet] - Gamma[vapor]: the jump of dF/dN.
    pub delta_gamma: f64,
    pub delta_e: f64,
    pub delta_s: f64,
    pub bracket: (f64, f64),
    pub rearrangement_crossings: usize,
    pub evaluations: usize,
}

/// N-hat: particle number of the minimal solution at gamma-hat(alpha ||V||_1).
pub fn n_hat(solver: &FieldSolver, alpha: f64) -> Result<(f64, BranchPoint)> {
    let norm = solver.spec().l1_norm_r3()?;
    let (_, gh) = gamma_boundaries(alpha * norm, false)?;
    let bp = BranchPoint::from_report(solver, solver.minimal_solution(alpha, gh)?)?;
    Ok((bp.n(), bp))
}

/// Bisection on N for F[vapor] = F[droplet]. The bracket defaults to
/// [N of the gas at the grand-canonical point, N-hat].
pub fn petit_canonical_transition(solver: &FieldSolver, alpha: f64, n_bracket: Option<(f64, f64)>) -> Result<PcTransition> {
    let norm = solver.spec().l1_norm_r3()?;
    let crit = droplet_criterion(alpha * norm)?;
    if !crit.fires {
        return Err(Error::InvalidParameter(format!("droplet criterion does not fire at alpha ||V||_1 = {}", alpha * norm)));
    }
    let (lo, hi) = match n_bracket {
        Some(b) => b,
        None => {
            let gc = grand_canonical_transition(solver, alpha, None, 16)?;
            (gc.gas.n(), n_hat(solver, alpha)?.0)
        }
    };
    let dom = solver.domain().clone();
    let mut evaluations = 0;
    let mut warm: Option<DensityField> = None;
    let mut gap = |n: f64| -> Result<(f64, BranchPoint, Option<BranchPoint>)> {
        evaluations += 1;
        let vapor = constrained_solve(solver, alpha, n, Branch::Minimal, None)?;
        let start = match &warm {
            Some(w) => rescale_mass(w, n)?,
            None => droplet_trial(&dom, n, (n / crit.eta_hat_big_m / dom.volume()).min(1.0))?,
        };
        let drop = droplet_solve(solver, alpha, n, &start).and_then(|r| BranchPoint::from_report(solver, r));
        let drop = match drop {
            Ok(d) if d.solution.field.sup_distance(&vapor.solution.field) > 1e-6 && !is_gas_like(&d.solution, &solver.eos) => d,
            _ => return Ok((-f64::MIN_POSITIVE, vapor, None)),
        };
        warm = Some(drop.solution.field.clone());
        // First-order correction for the residual mass mismatch of the vapor solve.
        let fv = vapor.functionals.f + vapor.gamma * (n - vapor.n());
        Ok((fv - drop.functionals.f, vapor, Some(drop)))
    };
    let (ga, _, _) = gap(hi)?;
    if ga <= 0.0 {
        return Err(Error::Bracket(format!("no droplet beats the vapor at N = {hi}")));
    }
    let (gb, _, _) = gap(lo)?;
    if gb > 0.0 {
        return Err(Error::Bracket(format!("droplet already wins at N = {lo}")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut best: Option<(f64, BranchPoint, BranchPoint)> = None;
    for _ in 0..200 {
        let c = 0.5 * (a + b);
        let (d, v, dp) = gap(c)?;
        if let Some(dp) = dp {
            let done = d.abs() < 1e-8 * dp.functionals.f.abs();
            best = Some((c, v, dp));
            if done || b - a < 1e-13 * c {
                break;
            }
        } else if b - a < 1e-13 * c {
            break;
        }
        if d > 0.0 {
            b = c;
        } else {
            a = c;
        }
    }
    let (n_vd, vapor, droplet) = best.ok_or_else(|| Error::Bracket("droplet branch lost".into()))?;
    let crossings = rearrangement_intersections(&vapor.solution.field, &droplet.solution.field);
    Ok(PcTransition {
        n_vd,
        delta_gamma: droplet.gamma - vapor.gamma,
        delta_e: droplet.functionals.e - vapor.functionals.e,
        delta_s: droplet.functionals.s - vapor.functionals.s,
        vapor,
        droplet,
        bracket: (lo, hi),
        rearrangement_crossings: crossings,
        evaluations,
    })
}

/// One row of the phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseRow {
    pub alpha: f64,
    pub gamma_check: f64,
    pub gamma_hat: f64,
    pub gamma_gl_alg: f64,
    pub gamma_gl_container: Option<f64>,
    pub n_vd: Option<f64>,
    pub criterion_rhs: f64,
}

/// Algebraic boundaries use tau = ||V||_1; container quantities are computed on request.
pub fn phase_row(solver: &FieldSolver, alpha: f64, container: bool) -> Result<PhaseRow> {
    let tau = solver.spec().l1_norm_r3().unwrap_or_else(|_| solver.phi());
    let at = alpha * tau;
    let (gc, gh) = gamma_boundaries(at, false)?;
    let (gamma_gl_container, n_vd) = if container {
        let gc_t = grand_canonical_transition(solver, alpha, None, 16).ok();
        let nvd = match &gc_t {
            Some(t) => n_hat(solver, alpha)
                .and_then(|(nh, _)| petit_canonical_transition(solver, alpha, Some((t.gas.n(), nh))))
                .ok()
                .map(|p| p.n_vd),
            None => None,
        };
        (gc_t.map(|t| t.gamma_gl), nvd)
    } else {
        (None, None)
    };
    Ok(PhaseRow {
        alpha,
        gamma_check: gc,
        gamma_hat: gh,
        gamma_gl_alg: coexistence_gamma(at)?,
        gamma_gl_container,
        n_vd,
        criterion_rhs: droplet_criterion(at).map(|c| c.rhs).unwrap_or(f64::NAN),
    })
}
