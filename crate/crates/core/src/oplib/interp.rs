use super::Operator;
use crate::error::{Error, Result};
use nalgebra::DVector;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationConfig {
    pub xi_min: f64,
    pub xi_max: f64,
    /// Initial points per decade; doubled until the sup stagnates.
    pub per_decade: usize,
    pub rel_tol: f64,
}

impl Default for InterpolationConfig {
    fn default() -> Self {
        InterpolationConfig { xi_min: 1e-4, xi_max: 1e4, per_decade: 8, rel_tol: 1e-8 }
    }
}

/// `‖x‖ + sup_{ξ>0} ξ^θ ‖ξ(ξ - 𝒜)^{-1}x - x‖`, the norm of the interpolation
/// space between X and the domain of 𝒜 (here `ξ + (-𝒜)` is the shifted
/// positive operator).
pub fn interpolation_norm(op: &Operator, theta: f64, x: &DVector<f64>) -> Result<f64> {
    interpolation_norm_with(op, theta, x, &InterpolationConfig::default())
}

pub fn interpolation_norm_with(op: &Operator, theta: f64, x: &DVector<f64>, cfg: &InterpolationConfig) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Parameter(format!("θ must lie in (0,1), got {theta}")));
    }
    if x.len() != op.dim() {
        return Err(Error::Parameter(format!("vector length {} != dim {}", x.len(), op.dim())));
    }
    if !(cfg.xi_min > 0.0 && cfg.xi_max > cfg.xi_min && cfg.per_decade >= 1) {
        return Err(Error::Parameter("ξ grid must be positive and increasing".into()));
    }
    let xc = x.map(|v| Complex64::new(v, 0.0));
    let xnorm = x.norm();
    if xnorm == 0.0 {
        return Ok(0.0);
    }
    let phi = |lx: f64| -> Result<f64> {
        let xi = lx.exp();
        let r = op.plain_resolvent(Complex64::new(xi, 0.0))?;
        let y = (r * &xc) * Complex64::new(xi, 0.0) - &xc;
        Ok(xi.powf(theta) * y.norm())
    };
    let (lo, hi) = (cfg.xi_min.ln(), cfg.xi_max.ln());
    let decades = (cfg.xi_max / cfg.xi_min).log10();
    let mut m = (cfg.per_decade as f64 * decades).ceil() as usize;
    let mut best = (f64::NEG_INFINITY, lo);
    let mut prev = f64::NEG_INFINITY;
    loop {
        let h = (hi - lo) / m as f64;
        for k in 0..=m {
            let lx = lo + k as f64 * h;
            let v = phi(lx)?;
            if v > best.0 {
                best = (v, lx);
            }
        }
        if prev.is_finite() && (best.0 - prev).abs() <= cfg.rel_tol * best.0.abs().max(f64::MIN_POSITIVE) {
            // polish the grid maximizer by golden-section search in log ξ
            let (mut a, mut b) = ((best.1 - h).max(lo), (best.1 + h).min(hi));
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let mut c = b - g * (b - a);
            let mut d = a + g * (b - a);
            let (mut fc, mut fd) = (phi(c)?, phi(d)?);
            for _ in 0..80 {
                if fc > fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = phi(c)?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = phi(d)?;
                }
                if b - a < 1e-12 {
                    break;
                }
            }
            let sup = best.0.max(fc).max(fd);
            return Ok(xnorm + sup);
        }
        if m > 1 << 20 {
            return Err(Error::Quadrature("interpolation norm grid refinement did not stagnate".into()));
        }
        prev = best.0;
        m *= 2;
    }
}
