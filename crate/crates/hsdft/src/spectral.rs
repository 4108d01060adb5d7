//! Spectral radius of eta -> -(V * eta) on the container by power iteration.

use crate::error::{Error, Result};
use crate::field::ConvolutionOperator;
use crate::uniform::spinodal_gamma_hat;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub v_lambda: f64,
    /// Positive eigenfunction with unit integral.
    #[serde(skip)]
    pub eigenfield: Vec<f64>,
    /// Mean of -(V * 1) over the ball.
    pub lower_bound: f64,
    /// sup of -(V * 1) over the ball.
    pub upper_bound: f64,
    pub iterations: usize,
    /// Norm ratio of the last two iterates.
    pub growth_factor: f64,
    pub radially_decreasing: bool,
}

impl SpectralReport {
    pub fn within_bounds(&self) -> bool {
        self.lower_bound <= self.v_lambda && self.v_lambda <= self.upper_bound
    }

    /// Upper estimate of the chemical potential at which the small fluid branch ends.
    pub fn spinodal_gamma_hat(&self, alpha: f64) -> Result<f64> {
        spinodal_gamma_hat(alpha * self.v_lambda)
    }
}

pub fn spectral_radius(op: &ConvolutionOperator, max_iter: usize) -> Result<SpectralReport> {
    let dom = &op.domain;
    let wnorm = |x: &[f64]| dom.integrate(&x.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
    let mut xi = vec![1.0; dom.n];
    let n0 = wnorm(&xi);
    xi.iter_mut().for_each(|v| *v /= n0);
    let mut rayleigh = f64::NAN;
    let mut growth = f64::NAN;
    for it in 1..=max_iter {
        let next = op.apply(&xi);
        let r = dom.integrate(&next.iter().zip(&xi).map(|(a, b)| a * b).collect::<Vec<_>>());
        growth = wnorm(&next);
        xi = next.into_iter().map(|v| v / growth).collect();
        if (r - rayleigh).abs() < 1e-10 * r.abs() {
            let mass = dom.integrate(&xi);
            let eigenfield: Vec<f64> = xi.iter().map(|v| v / mass).collect();
            let radially_decreasing = eigenfield.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
            let radius = dom.radius;
            return Ok(SpectralReport {
                v_lambda: r,
                eigenfield,
                lower_bound: op.spec.ball_double_integral(radius) / dom.volume(),
                upper_bound: op.spec.ball_l1(radius),
                iterations: it,
                growth_factor: growth,
                radially_decreasing,
            });
        }
        rayleigh = r;
    }
    Err(Error::NoConvergence { what: "power iteration", iterations: max_iter, residual: (growth - rayleigh).abs() })
}
