//! Attractive pair potentials (van der Waals, Yukawa, Newton) and their ball integrals.

use crate::error::{Error, Result};
use crate::quadrature::{adaptive, adaptive_semi_infinite};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Non-negative combination A_W V_W + A_Y V_Y + A_N V_N with
/// V_W = -(1 + varkappa^2 r^2)^-3, V_Y = -e^{-kappa r}/r, V_N = -1/r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    #[serde(default)]
    pub a_w: f64,
    #[serde(default)]
    pub a_y: f64,
    #[serde(default)]
    pub a_n: f64,
    #[serde(default = "one")]
    pub varkappa: f64,
    #[serde(default = "one")]
    pub kappa: f64,
}

fn one() -> f64 {
    1.0
}

impl KernelSpec {
    pub fn new(a_w: f64, a_y: f64, a_n: f64, varkappa: f64, kappa: f64) -> Result<Self> {
        let k = KernelSpec { a_w, a_y, a_n, varkappa, kappa };
        k.validate()?;
        Ok(k)
    }

    pub fn van_der_waals(varkappa: f64) -> Self {
        KernelSpec { a_w: 1.0, a_y: 0.0, a_n: 0.0, varkappa, kappa: 1.0 }
    }

    pub fn yukawa(kappa: f64) -> Self {
        KernelSpec { a_w: 0.0, a_y: 1.0, a_n: 0.0, varkappa: 1.0, kappa }
    }

    pub fn newton() -> Self {
        KernelSpec { a_w: 0.0, a_y: 0.0, a_n: 1.0, varkappa: 1.0, kappa: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let amps = [self.a_w, self.a_y, self.a_n];
        if amps.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidKernel("amplitudes must be finite and non-negative".into()));
        }
        if amps.iter().all(|a| *a == 0.0) {
            return Err(Error::InvalidKernel("at least one amplitude must be positive".into()));
        }
        if !(self.varkappa > 0.0 && self.varkappa.is_finite() && self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidKernel("ranges varkappa and kappa must be positive".into()));
        }
        Ok(())
    }

    /// True when the kernel is singular at the origin.
    pub fn is_singular(&self) -> bool {
        self.a_y > 0.0 || self.a_n > 0.0
    }

    /// V(r); strictly negative.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain { name: "r", value: r, domain: "[0, inf)" });
        }
        if r == 0.0 && self.is_singular() {
            return Err(Error::Domain { name: "r", value: r, domain: "(0, inf) for singular kernels" });
        }
        Ok(self.eval_raw(r))
    }

    pub(crate) fn eval_raw(&self, r: f64) -> f64 {
        let mut v = 0.0;
        if self.a_w > 0.0 {
            let u = 1.0 + self.varkappa * self.varkappa * r * r;
            v -= self.a_w / (u * u * u);
        }
        if self.a_y > 0.0 {
            v -= self.a_y * (-self.kappa * r).exp() / r;
        }
        if self.a_n > 0.0 {
            v -= self.a_n / r;
        }
        v
    }

    /// ||V||_{L1(R^3)}.
    pub fn l1_norm_r3(&self) -> Result<f64> {
        if self.a_n > 0.0 {
            return Err(Error::InfiniteNorm);
        }
        Ok(self.a_w * PI * PI / (4.0 * self.varkappa.powi(3)) + self.a_y * 4.0 * PI / (self.kappa * self.kappa))
    }

    /// Antiderivative P(t) of t V(t).
    pub fn ring_primitive(&self, t: f64) -> f64 {
        let mut p = 0.0;
        if self.a_w > 0.0 {
            let u = 1.0 + self.varkappa * self.varkappa * t * t;
            p += self.a_w / (4.0 * self.varkappa * self.varkappa * u * u);
        }
        if self.a_y > 0.0 {
            p += self.a_y * (-self.kappa * t).exp() / self.kappa;
        }
        if self.a_n > 0.0 {
            p -= self.a_n * t;
        }
        p
    }

    /// P(a) - P(b) = int_b^a t V(t) dt, evaluated without cancellation.
    pub fn ring_difference(&self, a: f64, b: f64) -> f64 {
        let mut d = 0.0;
        if self.a_w > 0.0 {
            let k2 = self.varkappa * self.varkappa;
            let u = 1.0 + k2 * a * a;
            let v = 1.0 + k2 * b * b;
            d += 0.25 * self.a_w * (b - a) * (b + a) * (u + v) / (u * u * v * v);
        }
        if self.a_y > 0.0 {
            d += self.a_y * (-self.kappa * b).exp() * (-self.kappa * (a - b)).exp_m1() / self.kappa;
        }
        if self.a_n > 0.0 {
            d -= self.a_n * (a - b);
        }
        d
    }

    /// -(V * 1_{B_R})(r), closed forms; r may exceed R.
    pub fn ball_potential(&self, r: f64, radius: f64) -> f64 {
        let r = r.abs();
        let big_r = radius;
        let mut s = 0.0;
        if self.a_w > 0.0 {
            let k = self.varkappa;
            let val = if r == 0.0 {
                vdw_l1_ball(k, big_r)
            } else {
                let den = (k * k * (big_r - r).powi(2) + 1.0) * (k * k * (big_r + r).powi(2) + 1.0);
                PI / (4.0 * k.powi(3))
                    * ((k * (big_r + r)).atan() + (k * (big_r - r)).atan()
                        + 2.0 * k * big_r * (k * k * (big_r * big_r - r * r) - 1.0) / den)
            };
            s += self.a_w * val;
        }
        if self.a_y > 0.0 {
            let k = self.kappa;
            let val = if r <= big_r {
                let shape = if k * r < 1e-8 {
                    (-k * big_r).exp()
                } else {
                    ((k * (r - big_r)).exp() - (-k * (r + big_r)).exp()) / (2.0 * k * r)
                };
                4.0 * PI / (k * k) * (1.0 - (1.0 + k * big_r) * shape)
            } else {
                let kr = k * big_r;
                // (kR cosh kR - sinh kR) e^{-kr}, folded into decaying exponentials.
                let e1 = (k * (big_r - r)).exp();
                let e2 = (-k * (big_r + r)).exp();
                let g = 0.5 * (kr * (e1 + e2) - (e1 - e2));
                4.0 * PI / (k.powi(3) * r) * g
            };
            s += self.a_y * val;
        }
        if self.a_n > 0.0 {
            let val = if r <= big_r {
                2.0 * PI * (big_r * big_r - r * r / 3.0)
            } else {
                4.0 * PI * big_r.powi(3) / (3.0 * r)
            };
            s += self.a_n * val;
        }
        s
    }

    /// -(V * 1_{B_R})(r) by adaptive quadrature of the ring representation.
    pub fn ball_potential_quadrature(&self, r: f64, radius: f64) -> f64 {
        let tol = 1e-13;
        if r < 1e-10 {
            let (v, _) = adaptive(|t| -4.0 * PI * t * t * self.eval_raw(t.max(1e-300)), 0.0, radius, 0.0, tol);
            return v;
        }
        let f = |s: f64| -2.0 * PI / r * s * self.ring_difference(r + s, (r - s).abs());
        if r < radius {
            adaptive(f, 0.0, r, 0.0, tol).0 + adaptive(f, r, radius, 0.0, tol).0
        } else {
            adaptive(f, 0.0, radius, 0.0, tol).0
        }
    }

    /// ||V||_{L1(B_R)}, which equals the center value of the ball potential.
    pub fn ball_l1(&self, radius: f64) -> f64 {
        self.ball_potential(0.0, radius)
    }

    /// ||(V*1)_{B_R}||_{L1(B_R)}. The Newton term is 32 pi^2 R^5 / 15, the integral of
    /// 2 pi (R^2 - r^2/3) over the ball.
    pub fn ball_double_integral(&self, radius: f64) -> f64 {
        let big_r = radius;
        let mut s = 0.0;
        if self.a_w > 0.0 {
            let k = self.varkappa;
            let x = k * big_r;
            let bracket = if x < 0.02 {
                let x2 = x * x;
                x2 * x2 * x2 * (32.0 / 3.0 - 192.0 / 5.0 * x2 + 4608.0 / 35.0 * x2 * x2)
            } else {
                4.0 * x.powi(3) * (2.0 * x).atan() - 4.0 * x * x + (4.0 * x * x).ln_1p()
            };
            s += self.a_w * PI * PI / (6.0 * k.powi(6)) * bracket;
        }
        if self.a_y > 0.0 {
            let k = self.kappa;
            let x = k * big_r;
            let e = (-2.0 * x).exp();
            let inner = 1.5 * ((1.0 + e) / (x * x) - (-(-2.0 * x).exp_m1()) / x.powi(3));
            s += self.a_y * 16.0 * PI * PI / (3.0 * k.powi(5)) * x.powi(3) * (1.0 - (1.0 + x) * inner);
        }
        if self.a_n > 0.0 {
            s += self.a_n * 32.0 * PI * PI * big_r.powi(5) / 15.0;
        }
        s
    }

    /// Phi for the ball: sup of -(V*1) over the ball.
    pub fn phi_lambda(&self, radius: f64) -> f64 {
        self.ball_l1(radius)
    }

    /// Psi = -V(diam) |Lambda|.
    pub fn psi_lambda(&self, diam: f64, volume: f64) -> f64 {
        -self.eval_raw(diam) * volume
    }

    /// Maximizer of s -> -s^3 V(s diam) volume over (0, 1]; the largest maximizer on ties.
    pub fn optimal_scaling(&self, diam: f64, volume: f64) -> (f64, f64) {
        let f = |s: f64| -s.powi(3) * self.eval_raw(s * diam) * volume;
        let n = 4000;
        let mut best = (1.0, f(1.0));
        for i in (1..n).rev() {
            let s = i as f64 / n as f64;
            let v = f(s);
            if v > best.1 * (1.0 + 1e-14) {
                best = (s, v);
            }
        }
        let h = 1.0 / n as f64;
        let (mut a, mut b) = ((best.0 - h).max(1e-12), (best.0 + h).min(1.0));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            if b - a < 1e-15 {
                break;
            }
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let s = 0.5 * (a + b);
        if f(s) >= best.1 {
            (s, f(s))
        } else {
            best
        }
    }

    /// M2 = (1/6) int |x|^2 V over R^3.
    pub fn second_moment(&self) -> Result<f64> {
        if self.a_n > 0.0 {
            return Err(Error::InfiniteNorm);
        }
        Ok(-self.a_w * PI * PI / (8.0 * self.varkappa.powi(5)) - self.a_y * 4.0 * PI / self.kappa.powi(4))
    }

    /// Tail mass ||V||_1 - ||V||_{L1(B_R)}.
    pub fn tail_mass(&self, radius: f64) -> Result<f64> {
        if self.a_n > 0.0 {
            return Err(Error::InfiniteNorm);
        }
        let mut t = 0.0;
        if self.a_w > 0.0 {
            let k = self.varkappa;
            let x = k * radius;
            let rest = if x == 0.0 { PI / 2.0 } else { (1.0 / x).atan() };
            t += self.a_w * PI / (2.0 * k.powi(3)) * (rest - x * (x * x - 1.0) / (x * x + 1.0).powi(2));
        }
        if self.a_y > 0.0 {
            let k = self.kappa;
            t += self.a_y * 4.0 * PI / (k * k) * (1.0 + k * radius) * (-k * radius).exp();
        }
        Ok(t)
    }

    /// C(V) = int_0^inf (||V||_1 - ||V||_{L1(B_R)}) dR, by adaptive quadrature of the tail mass.
    pub fn boundary_constant(&self) -> Result<f64> {
        self.tail_mass(0.0)?;
        let (v, _) = adaptive_semi_infinite(|r| self.tail_mass(r).unwrap_or(0.0), 0.0, 1e-14, 1e-12);
        Ok(v)
    }
}

fn vdw_l1_ball(k: f64, radius: f64) -> f64 {
    let x = k * radius;
    let bracket = if x < 0.02 {
        let x2 = x * x;
        x2 * x * (8.0 / 3.0 - 24.0 / 5.0 * x2 + 48.0 / 7.0 * x2 * x2 - 80.0 / 9.0 * x2 * x2 * x2)
    } else {
        x.atan() + x * (x * x - 1.0) / ((x * x + 1.0) * (x * x + 1.0))
    };
    PI / (2.0 * k.powi(3)) * bracket
}

/// Volume of a ball.
pub fn ball_volume(radius: f64) -> f64 {
    4.0 / 3.0 * PI * radius.powi(3)
}
