//! Space-uniform (algebraic) van der Waals theory: roots of
//! g2(eta) = gamma + alpha_tau * eta, triplicity boundaries and coexistence.

use crate::eos::{find_inflection, g1_raw, g2_raw, g2p_raw, gamma_fs, EosModel, ETA_FS_LO};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;

const MERGE_TOL: f64 = 1e-9;

/// Threshold slope g2'(eta_wr) below which the uniform equation has one root.
pub fn alpha_tau_min() -> f64 {
    let (e, _, _) = find_inflection();
    g2p_raw(e)
}

/// Upper slope of the fluid-restricted triplicity window, g2'(0.49).
pub fn alpha_tau_max_fluid() -> f64 {
    g2p_raw(ETA_FS_LO)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformRoots {
    pub roots: Vec<f64>,
    /// Iteration-stable iff g2'(root) > alpha_tau.
    pub stable: Vec<bool>,
    /// Set when two roots merged into a double root.
    pub degenerate: bool,
}

impl UniformRoots {
    pub fn smallest(&self) -> f64 {
        self.roots[0]
    }
    pub fn largest(&self) -> f64 {
        *self.roots.last().unwrap()
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// All roots in (0, 1) of g2(eta) = gamma + alpha_tau * eta (Carnahan-Starling function).
///
/// The residual is monotone on (0, eta_lt], [eta_lt, eta_gt] and [eta_gt, 1); each
/// interval is searched by bisection.
pub fn solve_uniform(alpha_tau: f64, gamma: f64) -> Result<UniformRoots> {
    if !(alpha_tau >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha_tau = {alpha_tau}, gamma = {gamma}")));
    }
    let phi = |e: f64| g2_raw(e) - alpha_tau * e - gamma;
    let lo = 1e-300f64.max((gamma - 1.0).exp() * 1e-3);
    let hi = 1.0 - 1e-15;
    let mut roots = Vec::new();
    let mut degenerate = false;
    if alpha_tau <= alpha_tau_min() {
        let lo = if phi(lo) < 0.0 { lo } else { f64::MIN_POSITIVE };
        roots.push(bisect(phi, lo, hi));
    } else {
        let (el, eg) = eta_bounds(alpha_tau)?;
        let (fl, fg) = (phi(el), phi(eg));
        let scale = 1.0 + gamma.abs();
        let near = |v: f64| v.abs() < 1e-12 * scale;
        if near(fl) {
            roots.push(el);
            roots.push(el);
            degenerate = true;
        } else if fl > 0.0 {
            roots.push(bisect(phi, lo.min(el * 0.5), el));
        }
        if fl > 0.0 && fg < 0.0 && !near(fg) {
            roots.push(bisect(phi, el, eg));
        }
        if near(fg) && !near(fl) {
            roots.push(eg);
            roots.push(eg);
            degenerate = true;
        } else if fg < 0.0 && !near(fg) {
            roots.push(bisect(phi, eg, hi));
        }
        if roots.is_empty() {
            roots.push(if fl < 0.0 { bisect(phi, eg, hi) } else { bisect(phi, lo, el) });
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in roots.windows(2) {
        if (w[1] - w[0]).abs() < MERGE_TOL {
            degenerate = true;
        }
    }
    let stable = roots.iter().map(|&r| g2p_raw(r) > alpha_tau).collect();
    Ok(UniformRoots { roots, stable, degenerate })
}

/// The two roots eta_lt < eta_wr < eta_gt of g2'(eta) = alpha_tau.
pub fn eta_bounds(alpha_tau: f64) -> Result<(f64, f64)> {
    let (ewr, _, _) = find_inflection();
    if !(alpha_tau > g2p_raw(ewr)) {
        return Err(Error::InvalidParameter(format!(
            "alpha_tau = {alpha_tau} does not exceed min g2' = {}",
            g2p_raw(ewr)
        )));
    }
    let f = |e: f64| g2p_raw(e) - alpha_tau;
    let lo = (0.5 / alpha_tau).min(ewr * 0.5);
    let el = bisect(f, lo, ewr);
    let eg = bisect(f, ewr, 1.0 - 1e-12);
    Ok((el, eg))
}

/// (gamma_check, gamma_hat); fluid restriction caps gamma_hat at gamma_fs - 0.49 alpha_tau.
pub fn gamma_boundaries(alpha_tau: f64, fluid_restricted: bool) -> Result<(f64, f64)> {
    if fluid_restricted && alpha_tau >= alpha_tau_max_fluid() {
        return Err(Error::InvalidParameter(format!(
            "fluid-restricted region is empty for alpha_tau = {alpha_tau} >= {}",
            alpha_tau_max_fluid()
        )));
    }
    let (el, eg) = eta_bounds(alpha_tau)?;
    let hat = g2_raw(el) - alpha_tau * el;
    let check = g2_raw(eg) - alpha_tau * eg;
    if fluid_restricted {
        Ok((check, hat.min(gamma_fs() - ETA_FS_LO * alpha_tau)))
    } else {
        Ok((check, hat))
    }
}

/// gamma_hat(alpha v) = g2(eta_lt) - alpha v eta_lt, the small-solution bound.
pub fn spinodal_gamma_hat(alpha_v: f64) -> Result<f64> {
    let (el, _) = eta_bounds(alpha_v)?;
    Ok(g2_raw(el) - alpha_v * el)
}

/// Pi = wp(gamma + alpha_tau eta) - alpha_tau eta^2 / 2.
pub fn pi_uniform(eos: &EosModel, alpha_norm: f64, gamma: f64, eta: f64) -> Result<f64> {
    Ok(eos.wp(gamma + alpha_norm * eta)? - 0.5 * alpha_norm * eta * eta)
}

/// f = eta g2(eta) - g1(eta) - alpha_tau eta^2 / 2.
pub fn f_uniform(alpha_norm: f64, eta: f64) -> Result<f64> {
    crate::error::check_open("eta", eta, 0.0, 1.0, "(0, 1)")?;
    Ok(eta * g2_raw(eta) - g1_raw(eta) - 0.5 * alpha_norm * eta * eta)
}

/// Pi(eta_M) - Pi(eta_m) at the outer roots (Carnahan-Starling pressure).
pub fn varpi(alpha_tau: f64, gamma: f64) -> Result<f64> {
    let roots = solve_uniform(alpha_tau, gamma)?;
    let (m, big) = (roots.smallest(), roots.largest());
    Ok(g1_raw(big) - g1_raw(m) - 0.5 * alpha_tau * (big * big - m * m))
}

/// Maxwell coexistence gamma_gl inside (gamma_check, gamma_hat).
pub fn coexistence_gamma(alpha_tau: f64) -> Result<f64> {
    let (check, hat) = gamma_boundaries(alpha_tau, false)?;
    let f = |g: f64| varpi(alpha_tau, g).unwrap_or(f64::NAN);
    let (mut lo, mut hi) = (check, hat);
    let w = hi - lo;
    // Stay off the tangency points, where one pair of roots merges.
    lo += 1e-12 * w;
    hi -= 1e-12 * w;
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::Bracket(format!("varpi({lo}) = {flo}, varpi({hi}) = {fhi}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() < 1e-13 || hi - lo < 1e-15 * mid.abs().max(1.0) {
            return Ok(mid);
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommonTangent {
    pub eta_a: f64,
    pub eta_b: f64,
    pub slope: f64,
}

/// Common tangent of f_uniform, found from the lower convex hull of a sampled
/// graph and polished by Newton on the tangency conditions.
pub fn common_tangent(alpha_norm: f64) -> Result<CommonTangent> {
    let (el, eg) = eta_bounds(alpha_norm)?;
    let f = |e: f64| e * g2_raw(e) - g1_raw(e) - 0.5 * alpha_norm * e * e;
    let fp = |e: f64| g2_raw(e) - alpha_norm * e;
    let fpp = |e: f64| g2p_raw(e) - alpha_norm;
    let n = 20000;
    let (emin, emax) = (1e-12f64, 1.0 - 1e-6);
    let pts: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            let e = if t < 0.5 {
                (emin.ln() + 2.0 * t * (el.ln() - emin.ln())).exp()
            } else {
                el + (2.0 * t - 1.0) * (emax - el)
            };
            (e, f(e))
        })
        .collect();
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let edge = hull
        .windows(2)
        .find(|w| w[0].0 <= el && w[1].0 >= eg)
        .ok_or_else(|| Error::Bracket("no hull edge spans the spinodal interval".into()))?;
    let (mut a, mut b) = (edge[0].0, edge[1].0);
    for _ in 0..100 {
        let r1 = fp(a) - fp(b);
        let r2 = f(b) - f(a) - fp(a) * (b - a);
        let (j11, j12) = (fpp(a), -fpp(b));
        let (j21, j22) = (-fpp(a) * (b - a), fp(b) - fp(a));
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 {
            break;
        }
        let da = (r1 * j22 - j12 * r2) / det;
        let db = (j11 * r2 - j21 * r1) / det;
        let mut t = 1.0;
        while a - t * da <= 0.0 || a - t * da >= el || b - t * db <= eg || b - t * db >= 1.0 {
            t *= 0.5;
            if t < 1e-12 {
                break;
            }
        }
        a -= t * da;
        b -= t * db;
        if (t * da).abs() < 1e-15 * a && (t * db).abs() < 1e-15 {
            break;
        }
    }
    Ok(CommonTangent { eta_a: a, eta_b: b, slope: fp(a) })
}

/// Triplicity region of the uniform equation for a coupling volume tau.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriplicityRegion {
    pub tau: f64,
    pub fluid_restricted: bool,
}

impl TriplicityRegion {
    pub fn new(tau: f64, fluid_restricted: bool) -> Self {
        TriplicityRegion { tau, fluid_restricted }
    }

    pub fn alpha_tau_min(&self) -> f64 {
        alpha_tau_min()
    }

    /// Open alpha interval on which the region has positive gamma width.
    pub fn alpha_range(&self) -> (f64, f64) {
        let hi = if self.fluid_restricted { alpha_tau_max_fluid() } else { f64::INFINITY };
        (alpha_tau_min() / self.tau, hi / self.tau)
    }

    pub fn gamma_check(&self, alpha: f64) -> Result<f64> {
        Ok(gamma_boundaries(alpha * self.tau, self.fluid_restricted)?.0)
    }

    pub fn gamma_hat(&self, alpha: f64) -> Result<f64> {
        Ok(gamma_boundaries(alpha * self.tau, self.fluid_restricted)?.1)
    }

    pub fn contains(&self, alpha: f64, gamma: f64) -> bool {
        match gamma_boundaries(alpha * self.tau, self.fluid_restricted) {
            Ok((c, h)) => c < gamma && gamma < h,
            Err(_) => false,
        }
    }
}

/// Largest overlap width over alpha of the upper boundary of the Phi region and
/// the lower boundary of the Psi region; returns (width, alpha at the maximum).
fn overlap_margin(phi: f64, psi: f64, alpha_range: (f64, f64)) -> Option<(f64, f64)> {
    let big = TriplicityRegion::new(phi, true);
    let small = TriplicityRegion::new(psi, true);
    let (a1, b1) = big.alpha_range();
    let (a2, b2) = small.alpha_range();
    let lo = a1.max(a2).max(alpha_range.0);
    let hi = b1.min(b2).min(alpha_range.1);
    if !(lo < hi) {
        return None;
    }
    let m = |a: f64| -> f64 {
        let (Ok(h), Ok(c)) = (big.gamma_hat(a), small.gamma_check(a)) else {
            return f64::NEG_INFINITY;
        };
        h - c
    };
    let n = 400;
    let eps = 1e-9 * (hi - lo);
    let (mut best_a, mut best) = (lo + eps, m(lo + eps));
    for i in 1..=n {
        let a = lo + eps + (hi - lo - 2.0 * eps) * i as f64 / n as f64;
        let v = m(a);
        if v > best {
            best = v;
            best_a = a;
        }
    }
    let h = (hi - lo) / n as f64;
    let (mut x0, mut x1) = ((best_a - h).max(lo + eps), (best_a + h).min(hi - eps));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..120 {
        let c = x1 - g * (x1 - x0);
        let d = x0 + g * (x1 - x0);
        if m(c) > m(d) {
            x1 = d;
        } else {
            x0 = c;
        }
    }
    let a = 0.5 * (x0 + x1);
    let v = m(a);
    if v > best {
        Some((v, a))
    } else {
        Some((best, best_a))
    }
}

/// Whether the fluid-restricted regions for tau = phi and tau = psi intersect.
pub fn regions_overlap(phi: f64, psi: f64) -> bool {
    matches!(overlap_margin(phi, psi, (0.0, f64::INFINITY)), Some((w, _)) if w > 0.0)
}

/// Touching scale: the domain scale at which the lower boundary of the
/// Psi-region (at the optimal scale) just touches the upper boundary of the
/// Phi-region of the scaled ball. Returns (sigma_acute, alpha_star).
///
/// The overlap width maximized over alpha is continuous and decreasing in the
/// scale, so the touching scale is its root; at that root the maximizing alpha
/// is a tangency point.
pub fn touching_scale(spec: &KernelSpec, alpha_range: (f64, f64), radius: f64) -> Result<(f64, f64)> {
    if spec.a_n > 0.0 {
        return Err(Error::InvalidKernel("touching scale needs an integrable kernel".into()));
    }
    let diam = 2.0 * radius;
    let volume = crate::kernels::ball_volume(radius);
    let (s_grave, psi) = spec.optimal_scaling(diam, volume);
    let margin = |s: f64| overlap_margin(spec.phi_lambda(s * radius), psi, alpha_range);
    match margin(s_grave) {
        Some((w, _)) if w > 0.0 => {}
        _ => {
            return Err(Error::NoTouch(format!(
                "fluid-restricted regions do not overlap at the optimal scale {s_grave} (Phi/Psi = {})",
                spec.phi_lambda(s_grave * radius) / psi
            )))
        }
    }
    let positive = |s: f64| matches!(margin(s), Some((w, _)) if w > 0.0);
    let mut lo = s_grave;
    let mut hi = s_grave * 1.25;
    let mut k = 0;
    while positive(hi) {
        lo = hi;
        hi *= 1.25;
        k += 1;
        if k > 200 {
            return Err(Error::NoTouch("regions overlap at every scale".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if positive(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi {
            break;
        }
    }
    let alpha_star = margin(lo).map(|(_, a)| a).unwrap_or(f64::NAN);
    Ok((lo, alpha_star))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan_roots(alpha_tau: f64, gamma: f64) -> usize {
        let phi = |e: f64| g2_raw(e) - alpha_tau * e - gamma;
        let n = 200_000;
        let mut count = 0;
        let mut prev = phi(1e-12);
        for i in 1..n {
            let t = i as f64 / n as f64;
            let e = if t < 0.3 { (1e-12f64.ln() * (1.0 - t / 0.3) + 1e-3f64.ln() * (t / 0.3)).exp() } else { 1e-3 + (t - 0.3) / 0.7 * (1.0 - 1e-3 - 1e-9) };
            let v = phi(e);
            if (v > 0.0) != (prev > 0.0) {
                count += 1;
            }
            prev = v;
        }
        count
    }

    #[test]
    fn no_coupling_single_root() {
        let r = solve_uniform(0.0, 0.3).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0] - crate::eos::g2_inverse_cs(0.3).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn three_roots_match_scan() {
        let (c, h) = gamma_boundaries(25.0, false).unwrap();
        let g = 0.5 * (c + h);
        let r = solve_uniform(25.0, g).unwrap();
        assert_eq!(r.roots.len(), 3);
        assert_eq!(scan_roots(25.0, g), 3);
        assert_eq!(r.stable, vec![true, false, true]);
    }

    #[test]
    fn bounds_at_31() {
        let (el, eg) = eta_bounds(31.0).unwrap();
        assert!((el - 0.046669).abs() < 1e-5);
        assert!((eg - 0.278066).abs() < 1e-5);
        let (c, h) = gamma_boundaries(31.0, false).unwrap();
        assert!((h + 4.102775).abs() < 1e-5);
        assert!((c + 5.665833).abs() < 1e-5);
        assert!(eta_bounds(21.0).is_err());
    }

    #[test]
    fn large_coupling_asymptote() {
        let h = spinodal_gamma_hat(1e4).unwrap();
        assert!((h - (-(1e4f64).ln() - 1.0)).abs() < 0.01);
    }

    #[test]
    fn coexistence_matches_common_tangent() {
        for at in [22.0, 25.0, 31.0, 60.0] {
            let g = coexistence_gamma(at).unwrap();
            let ct = common_tangent(at).unwrap();
            assert!((ct.slope - g).abs() < 1e-8, "at {at}: {} vs {g}", ct.slope);
            let r = solve_uniform(at, g).unwrap();
            assert!((r.smallest() - ct.eta_a).abs() < 1e-6);
            assert!((r.largest() - ct.eta_b).abs() < 1e-6);
        }
    }

    #[test]
    fn fluid_restricted_curves_meet_at_upper_end() {
        let at = alpha_tau_max_fluid() * (1.0 - 1e-9);
        let (c, h) = gamma_boundaries(at, true).unwrap();
        assert!((c - h).abs() < 1e-5);
        assert!(gamma_boundaries(alpha_tau_max_fluid(), true).is_err());
    }

    #[test]
    fn touching_scale_small_vdw_ball() {
        let spec = KernelSpec::van_der_waals(1.0);
        let (sa, a) = touching_scale(&spec, (0.0, f64::INFINITY), 0.15).unwrap();
        assert!(sa > 1.0 && a > 0.0);
        let psi = spec.optimal_scaling(0.3, crate::kernels::ball_volume(0.15)).1;
        assert!(regions_overlap(spec.phi_lambda(0.999 * sa * 0.15), psi));
        assert!(!regions_overlap(spec.phi_lambda(1.01 * sa * 0.15), psi));
        assert!(matches!(touching_scale(&KernelSpec::yukawa(1.0), (0.0, f64::INFINITY), 30.0), Err(Error::NoTouch(_))));
    }
}
