//! Hard-sphere equation of state: Carnahan-Starling fluid, Speedy solid,
//! and the pressure as a function of the chemical-potential ratio.

use crate::error::{check_open, Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Upper end of the fluid branch.
pub const ETA_FS_LO: f64 = 0.49;
/// Lower end of the solid branch.
pub const ETA_FS_HI: f64 = 0.54;
/// Close packing fraction of the fcc lattice, pi*sqrt(2)/6.
pub const ETA_FCC: f64 = std::f64::consts::PI * std::f64::consts::SQRT_2 / 6.0;
pub const SPEEDY_A: f64 = 0.5921;
pub const SPEEDY_B: f64 = 0.7072;
pub const SPEEDY_C: f64 = 0.601;

const ROOT_TOL: f64 = 1e-12;

/// g1: Carnahan-Starling pressure ratio p = g1(eta).
pub fn g1(eta: f64) -> Result<f64> {
    check_open("eta", eta, 0.0, 1.0, "(0, 1)")?;
    Ok(g1_raw(eta))
}

pub(crate) fn g1_raw(e: f64) -> f64 {
    let om = 1.0 - e;
    (e + e * e + e * e * e - e * e * e * e) / (om * om * om)
}

/// g1' by the quotient rule.
pub fn g1_prime(eta: f64) -> Result<f64> {
    check_open("eta", eta, 0.0, 1.0, "(0, 1)")?;
    let e = eta;
    let om = 1.0 - e;
    let num = e + e * e + e.powi(3) - e.powi(4);
    let dnum = 1.0 + 2.0 * e + 3.0 * e * e - 4.0 * e.powi(3);
    Ok((dnum * om.powi(3) + 3.0 * num * om * om) / om.powi(6))
}

/// g2: chemical-potential ratio gamma = g2(eta).
pub fn g2(eta: f64) -> Result<f64> {
    check_open("eta", eta, 0.0, 1.0, "(0, 1)")?;
    Ok(g2_raw(eta))
}

fn g2_rational(e: f64) -> f64 {
    let om = 1.0 - e;
    e * (8.0 - 9.0 * e + 3.0 * e * e) / (om * om * om)
}

pub(crate) fn g2_raw(e: f64) -> f64 {
    e.ln() + g2_rational(e)
}

pub(crate) fn g2p_raw(e: f64) -> f64 {
    1.0 / e + (8.0 - 2.0 * e) / (1.0 - e).powi(4)
}

pub(crate) fn g2pp_raw(e: f64) -> f64 {
    -1.0 / (e * e) + (30.0 - 6.0 * e) / (1.0 - e).powi(5)
}

fn g2ppp_raw(e: f64) -> f64 {
    2.0 / (e * e * e) + (144.0 - 24.0 * e) / (1.0 - e).powi(6)
}

/// Closed-form derivative of g2 of order 1, 2 or 3.
pub fn g2_derivs(eta: f64, order: u32) -> Result<f64> {
    check_open("eta", eta, 0.0, 1.0, "(0, 1)")?;
    match order {
        1 => Ok(g2p_raw(eta)),
        2 => Ok(g2pp_raw(eta)),
        3 => Ok(g2ppp_raw(eta)),
        o => Err(Error::InvalidOrder(o)),
    }
}

/// Inverse of g2 on (0, 1), by safeguarded Newton in ln(eta).
pub fn g2_inverse_cs(gamma: f64) -> Result<f64> {
    g2_inverse_seeded(gamma, None)
}

/// As [`g2_inverse_cs`], starting Newton from `guess` when given.
pub(crate) fn g2_inverse_seeded(gamma: f64, guess: Option<f64>) -> Result<f64> {
    if !gamma.is_finite() {
        return Err(Error::Domain { name: "gamma", value: gamma, domain: "finite reals" });
    }
    // h(y) = y + r(e^y) - gamma is increasing; r >= 0 gives y <= gamma.
    let mut hi = gamma.min((1.0 - 1e-12f64).ln());
    let mut lo = gamma.min(0.0) - 100.0;
    let h = |y: f64| y + g2_rational(y.exp()) - gamma;
    let tol = ROOT_TOL.max(4.0 * f64::EPSILON * gamma.abs());
    if h(hi) <= 0.0 {
        return Ok(hi.exp());
    }
    let mut y = match guess {
        Some(g) if g > 0.0 && g < 1.0 && g.ln() > lo && g.ln() < hi => g.ln(),
        _ if gamma < -3.0 => gamma,
        _ => 0.5 * (lo + hi),
    };
    for _ in 0..300 {
        let hy = h(y);
        if hy.abs() < tol {
            return Ok(y.exp());
        }
        if hy > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let e = y.exp();
        let step = hy / (e * g2p_raw(e));
        let mut next = y - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if hi - lo < 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            return Ok(next.exp());
        }
        y = next;
    }
    Ok(y.exp())
}

/// Speedy solid pressure ratio (unshifted), eta * Z with x = eta/eta_fcc and
/// Z = 3/(1-x) - a(x-b)/(x-c).
pub fn speedy_g3(eta: f64) -> Result<f64> {
    check_solid(eta)?;
    Ok(g3_raw(eta))
}

fn check_solid(eta: f64) -> Result<f64> {
    if eta.is_finite() && (ETA_FS_HI..ETA_FCC).contains(&eta) {
        Ok(eta)
    } else {
        Err(Error::Domain { name: "eta", value: eta, domain: "[0.54, eta_fcc)" })
    }
}

fn speedy_z(x: f64) -> f64 {
    3.0 / (1.0 - x) - SPEEDY_A * (x - SPEEDY_B) / (x - SPEEDY_C)
}

pub(crate) fn g3_raw(eta: f64) -> f64 {
    eta * speedy_z(eta / ETA_FCC)
}

/// d g3 / d eta.
pub fn speedy_g3_prime(eta: f64) -> Result<f64> {
    check_solid(eta)?;
    Ok(g3p_raw(eta))
}

pub(crate) fn g3p_raw(eta: f64) -> f64 {
    let x = eta / ETA_FCC;
    let zp = (3.0 / ((1.0 - x) * (1.0 - x)) - SPEEDY_A * (SPEEDY_B - SPEEDY_C) / ((x - SPEEDY_C) * (x - SPEEDY_C))) / ETA_FCC;
    speedy_z(x) + eta * zp
}

// Antiderivative of g3'(eta)/eta in x = eta/eta_fcc.
fn speedy_g_antiderivative(x: f64) -> f64 {
    let (a, b, c) = (SPEEDY_A, SPEEDY_B, SPEEDY_C);
    3.0 * x.ln() - 3.0 * (1.0 - x).ln() - a * (b / c) * x.ln() - a * ((c - b) / c) * (x - c).ln() + speedy_z(x)
}

/// Solid-branch chemical potential, gamma_fs + int_{0.54}^{eta} g3'(x)/x dx (closed form).
pub fn speedy_g4(eta: f64) -> Result<f64> {
    check_solid(eta)?;
    Ok(g4_raw(eta))
}

pub(crate) fn g4_raw(eta: f64) -> f64 {
    if eta == ETA_FS_HI {
        return gamma_fs();
    }
    gamma_fs() + speedy_g_antiderivative(eta / ETA_FCC) - speedy_g_antiderivative(ETA_FS_HI / ETA_FCC)
}

fn g4_inverse(gamma: f64) -> f64 {
    let mut lo = ETA_FS_HI;
    let mut hi = ETA_FCC * (1.0 - 1e-15);
    if gamma <= gamma_fs() {
        return lo;
    }
    if g4_raw(hi) <= gamma {
        return hi;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..300 {
        let r = g4_raw(x) - gamma;
        if r.abs() < ROOT_TOL.max(4.0 * f64::EPSILON * gamma.abs()) {
            break;
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let mut next = x - r * x / g3p_raw(x);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if hi - lo < 4.0 * f64::EPSILON {
            break;
        }
        x = next;
    }
    x
}

/// gamma_fs = g2(0.49).
pub fn gamma_fs() -> f64 {
    static G: OnceLock<f64> = OnceLock::new();
    *G.get_or_init(|| g2_raw(ETA_FS_LO))
}

/// Constant added to the Speedy pressure so the piecewise pressure is continuous at gamma_fs.
pub fn solid_pressure_shift() -> f64 {
    g1_raw(ETA_FS_LO) - g3_raw(ETA_FS_HI)
}

/// Inflection point of g2: returns (eta_wr, gamma_wr, K) with K = 1/g2'(eta_wr).
pub fn find_inflection() -> (f64, f64, f64) {
    static C: OnceLock<(f64, f64, f64)> = OnceLock::new();
    *C.get_or_init(|| {
        let (mut lo, mut hi) = (1e-3, ETA_FS_LO);
        while hi - lo > 4.0 * f64::EPSILON * hi {
            let mid = 0.5 * (lo + hi);
            if g2pp_raw(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let e = 0.5 * (lo + hi);
        (e, g2_raw(e), 1.0 / g2p_raw(e))
    })
}

/// Ideal-gas density e^gamma.
pub fn ideal_gas_wp_prime(gamma: f64) -> Result<f64> {
    if !gamma.is_finite() || gamma > 700.0 {
        return Err(Error::Domain { name: "gamma", value: gamma, domain: "(-inf, 700]" });
    }
    Ok(gamma.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EosMode {
    /// Carnahan-Starling fluid up to 0.49, Speedy solid from 0.54.
    #[default]
    HardSphere,
    /// Carnahan-Starling on all of (0, 1).
    CsExtended,
    IdealGas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Piecewise equation of state exposing the pressure and its derivatives in gamma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EosModel {
    pub mode: EosMode,
    pub eta_fs_lo: f64,
    pub eta_fs_hi: f64,
    pub eta_fcc: f64,
    pub gamma_fs: f64,
    pub eta_wr: f64,
    pub gamma_wr: f64,
    pub k_gamma_fs: f64,
    pub speedy: (f64, f64, f64),
}

impl EosModel {
    pub fn new(mode: EosMode) -> Self {
        let (eta_wr, gamma_wr, k) = find_inflection();
        EosModel {
            mode,
            eta_fs_lo: ETA_FS_LO,
            eta_fs_hi: ETA_FS_HI,
            eta_fcc: ETA_FCC,
            gamma_fs: gamma_fs(),
            eta_wr,
            gamma_wr,
            k_gamma_fs: k,
            speedy: (SPEEDY_A, SPEEDY_B, SPEEDY_C),
        }
    }

    pub fn hard_sphere() -> Self {
        Self::new(EosMode::HardSphere)
    }

    pub fn cs_extended() -> Self {
        Self::new(EosMode::CsExtended)
    }

    pub fn ideal_gas() -> Self {
        Self::new(EosMode::IdealGas)
    }

    /// Supremum of the density range of the mode.
    pub fn eta_sup(&self) -> f64 {
        match self.mode {
            EosMode::HardSphere => ETA_FCC,
            EosMode::CsExtended => 1.0,
            EosMode::IdealGas => f64::INFINITY,
        }
    }

    /// Fluid-branch inverse: in hard-sphere mode values above gamma_fs are rejected.
    pub fn g2_inverse(&self, gamma: f64) -> Result<f64> {
        match self.mode {
            EosMode::HardSphere if gamma > self.gamma_fs => Err(Error::OutOfBranch(gamma)),
            EosMode::IdealGas => ideal_gas_wp_prime(gamma),
            _ => g2_inverse_cs(gamma),
        }
    }

    /// Pressure ratio p = wp(gamma).
    pub fn wp(&self, gamma: f64) -> Result<f64> {
        match self.mode {
            EosMode::IdealGas => ideal_gas_wp_prime(gamma),
            EosMode::CsExtended => Ok(g1_raw(g2_inverse_cs(gamma)?)),
            EosMode::HardSphere => {
                if gamma <= self.gamma_fs {
                    Ok(g1_raw(g2_inverse_cs(gamma)?))
                } else {
                    Ok(g3_raw(g4_inverse(gamma)) + solid_pressure_shift())
                }
            }
        }
    }

    /// Density wp'(gamma); at the kink the side selects the one-sided derivative.
    pub fn wp_prime(&self, gamma: f64, side: Side) -> Result<f64> {
        match self.mode {
            EosMode::IdealGas => ideal_gas_wp_prime(gamma),
            EosMode::CsExtended => g2_inverse_cs(gamma),
            EosMode::HardSphere => {
                if gamma < self.gamma_fs {
                    g2_inverse_cs(gamma)
                } else if gamma == self.gamma_fs && side == Side::Left {
                    Ok(ETA_FS_LO)
                } else if gamma == self.gamma_fs {
                    Ok(ETA_FS_HI)
                } else if gamma.is_finite() {
                    Ok(g4_inverse(gamma))
                } else {
                    Err(Error::Domain { name: "gamma", value: gamma, domain: "finite reals" })
                }
            }
        }
    }

    /// Left derivative of wp, with a starting guess for the inner root solve.
    pub fn density_seeded(&self, gamma: f64, guess: f64) -> Result<f64> {
        match self.mode {
            EosMode::IdealGas => ideal_gas_wp_prime(gamma),
            EosMode::CsExtended => g2_inverse_seeded(gamma, Some(guess)),
            EosMode::HardSphere => {
                if gamma < self.gamma_fs {
                    g2_inverse_seeded(gamma, Some(guess))
                } else {
                    self.wp_prime(gamma, Side::Left)
                }
            }
        }
    }

    /// Left derivative, the convention used by the fixed-point maps.
    pub fn density(&self, gamma: f64) -> Result<f64> {
        self.wp_prime(gamma, Side::Left)
    }

    pub fn wp_double_prime(&self, gamma: f64) -> Result<f64> {
        match self.mode {
            EosMode::IdealGas => ideal_gas_wp_prime(gamma),
            EosMode::CsExtended => Ok(1.0 / g2p_raw(g2_inverse_cs(gamma)?)),
            EosMode::HardSphere => {
                if gamma == self.gamma_fs {
                    Err(Error::Kink)
                } else if gamma < self.gamma_fs {
                    Ok(1.0 / g2p_raw(g2_inverse_cs(gamma)?))
                } else {
                    let e = g4_inverse(gamma);
                    Ok(e / g3p_raw(e))
                }
            }
        }
    }

    /// wp'' evaluated from a density value, 1/(d gamma/d eta). Zero on the coexistence gap.
    pub fn wp_double_prime_of_eta(&self, eta: f64) -> f64 {
        match self.mode {
            EosMode::IdealGas => eta,
            EosMode::CsExtended => 1.0 / g2p_raw(eta),
            EosMode::HardSphere => {
                if eta <= ETA_FS_LO {
                    1.0 / g2p_raw(eta)
                } else if eta < ETA_FS_HI {
                    0.0
                } else {
                    eta / g3p_raw(eta)
                }
            }
        }
    }

    /// Inverse of wp': the chemical-potential ratio of a density.
    pub fn gamma_of_eta(&self, eta: f64) -> Result<f64> {
        match self.mode {
            EosMode::IdealGas => {
                if eta > 0.0 && eta.is_finite() {
                    Ok(eta.ln())
                } else {
                    Err(Error::Domain { name: "eta", value: eta, domain: "(0, inf)" })
                }
            }
            EosMode::CsExtended => g2(eta),
            EosMode::HardSphere => {
                check_open("eta", eta, 0.0, ETA_FCC, "(0, eta_fcc)")?;
                if eta <= ETA_FS_LO {
                    Ok(g2_raw(eta))
                } else if eta < ETA_FS_HI {
                    Ok(self.gamma_fs)
                } else {
                    Ok(g4_raw(eta))
                }
            }
        }
    }

    /// Pressure as a function of density.
    pub fn pressure_of_eta(&self, eta: f64) -> Result<f64> {
        match self.mode {
            EosMode::IdealGas => Ok(eta),
            EosMode::CsExtended => g1(eta),
            EosMode::HardSphere => {
                check_open("eta", eta, 0.0, ETA_FCC, "(0, eta_fcc)")?;
                if eta <= ETA_FS_LO {
                    Ok(g1_raw(eta))
                } else if eta < ETA_FS_HI {
                    Ok(g1_raw(ETA_FS_LO))
                } else {
                    Ok(g3_raw(eta) + solid_pressure_shift())
                }
            }
        }
    }

    /// Entropy density s(eta) with s' = 3/2 - gamma(eta). The hard-sphere mode
    /// uses the Carnahan-Starling expression for all densities.
    pub fn entropy_density(&self, eta: f64) -> f64 {
        match self.mode {
            EosMode::IdealGas => 2.5 * eta - eta * eta.ln(),
            _ => {
                let om = 1.0 - eta;
                5.5 * eta - eta * eta.ln() - eta * (3.0 - 2.0 * eta) / (om * om)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive;

    #[test]
    fn frozen_constants() {
        assert!((g1(0.49).unwrap() - 5.956238475).abs() < 1e-8);
        assert!((gamma_fs() - 15.20848259).abs() < 1e-7);
        let (e, g, k) = find_inflection();
        assert!((e - 0.1304438842).abs() < 1e-9);
        assert!((g + 0.672438951).abs() < 1e-8);
        assert!((k - 0.04716435).abs() < 1e-7);
        assert!(g2_derivs(e, 2).unwrap().abs() < 1e-8);
        assert!((g2_derivs(0.130, 3).unwrap() - 1235.2204).abs() < 1e-3);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for &e in &[0.05, 0.13, 0.3, 0.45] {
            let h = 1e-6;
            let fd1 = (g2_raw(e + h) - g2_raw(e - h)) / (2.0 * h);
            let fd2 = (g2p_raw(e + h) - g2p_raw(e - h)) / (2.0 * h);
            let fd3 = (g2pp_raw(e + h) - g2pp_raw(e - h)) / (2.0 * h);
            assert!((fd1 / g2p_raw(e) - 1.0).abs() < 1e-8);
            assert!((fd2 / g2pp_raw(e) - 1.0).abs() < 1e-6 || g2pp_raw(e).abs() < 1.0);
            assert!((fd3 / g2ppp_raw(e) - 1.0).abs() < 1e-7);
            let fdg1 = (g1_raw(e + h) - g1_raw(e - h)) / (2.0 * h);
            assert!((fdg1 / g1_prime(e).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn g4_closed_form_matches_quadrature() {
        for &e in &[0.55, 0.6, 0.65, 0.7, 0.73] {
            let (q, _) = adaptive(|x| g3p_raw(x) / x, ETA_FS_HI, e, 1e-13, 1e-12);
            assert!((g4_raw(e) - gamma_fs() - q).abs() < 1e-9 * q.abs().max(1.0));
        }
        assert_eq!(speedy_g4(0.54).unwrap(), gamma_fs());
    }

    #[test]
    fn alder_expansion_near_close_packing() {
        // g3/eta_fcc = 3/d + K0 + K1 d + O(d^2), d = 1 - eta/eta_fcc.
        let w = |d: f64| g3_raw(ETA_FCC * (1.0 - d)) / ETA_FCC - 3.0 / d;
        let (d1, d2) = (1e-4, 2e-4);
        let k1 = (w(d2) - w(d1)) / (d2 - d1);
        let k0 = w(d1) - k1 * d1;
        assert!((k0 + 3.44).abs() < 0.01, "k0 = {k0}");
        assert!((k1 - 1.0).abs() < 0.2, "k1 = {k1}");
    }

    #[test]
    fn wp_continuity_and_sides() {
        let m = EosModel::hard_sphere();
        let g = m.gamma_fs;
        let l = m.wp(g).unwrap();
        let r = g3_raw(ETA_FS_HI) + solid_pressure_shift();
        assert!((l - r).abs() < 1e-12);
        assert!((m.wp(g + 1e-9).unwrap() - l).abs() < 1e-6);
        assert_eq!(m.wp_prime(g, Side::Left).unwrap(), 0.49);
        assert_eq!(m.wp_prime(g, Side::Right).unwrap(), 0.54);
        assert!(matches!(m.wp_double_prime(g), Err(Error::Kink)));
        assert!(matches!(m.g2_inverse(g + 1.0), Err(Error::OutOfBranch(_))));
    }

    #[test]
    fn entropy_derivative_is_three_halves_minus_gamma() {
        let m = EosModel::cs_extended();
        for &e in &[0.01, 0.2, 0.4, 0.6] {
            let h = 1e-6;
            let d = (m.entropy_density(e + h) - m.entropy_density(e - h)) / (2.0 * h);
            assert!((d - (1.5 - g2_raw(e))).abs() < 1e-7);
        }
    }

    #[test]
    fn inverse_extremes() {
        let e = g2_inverse_cs(-600.0).unwrap();
        assert!((e.ln() + 600.0).abs() < 1e-9);
        let e = g2_inverse_cs(200.0).unwrap();
        assert!((g2_raw(e) - 200.0).abs() < 1e-9);
        assert!(g2_inverse_cs(f64::NAN).is_err());
    }
}
