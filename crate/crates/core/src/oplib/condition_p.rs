use super::{norm2, Operator};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Allowed excess of a far-field sample over the fitted power law.
const SLACK: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PSample {
    pub lambda: [f64; 2],
    /// Resolvent norm; `None` when λ hit the spectrum.
    pub norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionPReport {
    pub holds: bool,
    pub beta_hat: f64,
    /// Smallest M with ‖R(λ)‖ ≤ M (1+|λ|)^{-β̂} over every sample.
    pub m_hat: f64,
    /// Intercept of the least-squares fit.
    pub m_fit: f64,
    pub c_used: f64,
    pub max_far_excess: f64,
    pub singular: Vec<[f64; 2]>,
    pub samples: Vec<PSample>,
}

/// Sample points on the boundary `Re λ = -c(|Im λ| + 1)` of Ψ and inside it,
/// `|Im λ|` from 10⁻² to 10⁶.
pub fn condition_p_grid(c: f64, per_decade: usize) -> Vec<Complex64> {
    condition_p_grid_span(c, per_decade, -2, 6)
}

/// As [`condition_p_grid`] with `|Im λ|` from `10^lo` to `10^hi`.
pub fn condition_p_grid_span(c: f64, per_decade: usize, lo: i32, hi: i32) -> Vec<Complex64> {
    let per_decade = per_decade.max(2);
    let mut etas = vec![0.0];
    let decades = (hi - lo).max(1) as usize;
    for k in 0..=decades * per_decade {
        etas.push(10f64.powf(lo as f64 + k as f64 / per_decade as f64));
    }
    let mut grid = Vec::new();
    for &eta in &etas {
        let re = -c * (eta + 1.0);
        grid.push(Complex64::new(re, eta));
        if eta > 0.0 {
            grid.push(Complex64::new(re, -eta));
            // interior: halfway to the imaginary axis and on the positive axis
            grid.push(Complex64::new(0.5 * re, eta));
            grid.push(Complex64::new(eta, 0.0));
        }
    }
    grid
}

fn in_psi(l: Complex64, c: f64) -> bool {
    l.re >= -c * (l.im.abs() + 1.0) * (1.0 + 1e-12)
}

/// Probes `‖R(λ:𝒜)‖ ≤ M(1+|λ|)^{-β}` on the given points of Ψ.
///
/// β̂ is the least-squares slope of log‖R‖ against log(1+|λ|) over the far
/// field (the upper half of the sampled |λ|, reduced to its upper envelope in
/// bins of a tenth of a decade), clipped to (0, 1]. The bound holds when no
/// envelope sample exceeds the fitted line by more than 5% and no point hit
/// the spectrum. `m_hat` is the global constant valid for every sample.
pub fn check_condition_p(op: &Operator, c: f64, grid: &[Complex64]) -> Result<ConditionPReport> {
    if !(c > 0.0) {
        return Err(Error::Parameter(format!("condition (P) needs c > 0, got {c}")));
    }
    if grid.is_empty() {
        return Err(Error::Parameter("condition (P) grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|l| !in_psi(**l, c)) {
        return Err(Error::Parameter(format!("grid point {bad} lies outside Re λ ≥ -c(|Im λ| + 1)")));
    }
    let mut samples = Vec::with_capacity(grid.len());
    let mut singular = Vec::new();
    let mut pts = Vec::new();
    for &l in grid {
        match op.resolvent_uncached(l) {
            Ok(r) => {
                let n = norm2(&r);
                samples.push(PSample { lambda: [l.re, l.im], norm: Some(n) });
                if n > 0.0 {
                    pts.push(((1.0 + l.norm()).ln(), n.ln(), l.norm()));
                }
            }
            Err(Error::Singular { .. }) => {
                samples.push(PSample { lambda: [l.re, l.im], norm: None });
                singular.push([l.re, l.im]);
            }
            Err(e) => return Err(e),
        }
    }
    if pts.len() < 2 {
        return Ok(ConditionPReport {
            holds: false,
            beta_hat: 1.0,
            m_hat: f64::INFINITY,
            m_fit: f64::INFINITY,
            c_used: c,
            max_far_excess: f64::INFINITY,
            singular,
            samples,
        });
    }
    let mut mags: Vec<f64> = pts.iter().map(|p| p.2).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = mags[mags.len() / 2];
    // upper envelope of the far field: largest norm per tenth of a decade
    let mut bins: std::collections::BTreeMap<i64, (f64, f64)> = std::collections::BTreeMap::new();
    for p in pts.iter().filter(|p| p.2 >= median) {
        let key = (p.2.max(1e-300).log10() * 10.0).floor() as i64;
        let e = bins.entry(key).or_insert((p.0, p.1));
        if p.1 > e.1 {
            *e = (p.0, p.1);
        }
    }
    let far: Vec<(f64, f64)> = bins.into_values().collect();
    let nf = far.len() as f64;
    let mx = far.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = far.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = far.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = far.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let beta_hat = (-slope).clamp(1e-6, 1.0);
    let log_m_fit = far.iter().map(|p| p.1 + beta_hat * p.0).sum::<f64>() / nf;
    let max_far_excess = far.iter().map(|p| p.1 + beta_hat * p.0 - log_m_fit).fold(f64::NEG_INFINITY, f64::max);
    let m_hat = pts.iter().map(|p| p.1 + beta_hat * p.0).fold(f64::NEG_INFINITY, f64::max).exp();
    let holds = singular.is_empty() && -slope > 0.0 && max_far_excess <= SLACK.ln();
    Ok(ConditionPReport {
        holds,
        beta_hat,
        m_hat,
        m_fit: log_m_fit.exp(),
        c_used: c,
        max_far_excess: max_far_excess.exp(),
        singular,
        samples,
    })
}
