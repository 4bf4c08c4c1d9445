//! `u(t) = ∫_{-∞}^t R_γ(t-s) f(s) ds` for trigonometric forcings.
//!
//! Lags up to `near` use the product-integration table with `f` sampled at
//! negative times. Beyond that each frequency ω contributes
//! `Im(e^{i(ωt+φ)} ∫_{near}^∞ r(τ) e^{-iωτ} dτ)` per mode, integrated once on
//! `[near, history]` plus the first integration-by-parts term of the tail;
//! constants use `∫_{near}^∞ r = -s(near)/μ` exactly.

use super::conv::CausalConv;
use super::lags::LagTable;
use super::{Grid, Prepared, Trajectory};
use crate::error::{Error, Result};
use crate::families::{Family, FamilyEvaluator};
use crate::quad::GaussLegendre;
use crate::signal::Forcing;
use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeylOptions {
    /// Truncation depth H of the history integral; `None` grows H from
    /// 10³ by factors of 4 (up to 10⁸) until the tail bound meets `tol`.
    pub history: Option<f64>,
    /// Span of lags handled on the grid.
    pub near: f64,
    /// Tolerance the tail bound must certify.
    pub tol: f64,
}

impl Default for WeylOptions {
    fn default() -> Self {
        WeylOptions { history: None, near: 10.0, tol: 1e-8 }
    }
}

/// Returns the trajectory and the certified bound on the truncation error.
pub fn solve_weyl_liouville(
    ev: &FamilyEvaluator,
    f: &Forcing,
    grid: &Grid,
    opts: &WeylOptions,
) -> Result<(Trajectory, f64)> {
    grid.validate()?;
    f.validate(ev.dim())?;
    if !f.is_trigonometric() {
        return Err(Error::Parameter(
            "the full-line solve needs a bounded trigonometric forcing (sines and constants only)".into(),
        ));
    }
    let sp = ev.spectral().ok_or_else(|| Error::Parameter("the full-line solve needs the eigen mode".into()))?;
    if let Some(m) = sp.mu.iter().find(|m| !(**m < 0.0)) {
        return Err(Error::Domain(format!("mode μ = {m} is not dissipative; the history integral diverges")));
    }
    if !(opts.tol > 0.0 && opts.near > 0.0) {
        return Err(Error::Parameter("weyl options need tol > 0 and near > 0".into()));
    }
    let h = grid.h();
    let k0 = (opts.near / h).ceil().max(1.0) as usize;
    let h0 = k0 as f64 * h;
    if let Some(hist) = opts.history {
        if !(hist > h0) {
            return Err(Error::Parameter(format!("history {hist} is not beyond the near span {h0}")));
        }
    }
    let prep = Prepared::new(ev)?;
    let dim = ev.dim();
    let r = sp.rank();
    let n = grid.n;

    // near part on the extended grid t_{-k0} .. t_N
    let LagTable::Modal { near, far } = LagTable::new(ev, h, k0)? else { unreachable!() };
    let ext: Vec<DVector<f64>> = (0..=n + k0).map(|j| prep.pull(f.eval((j as f64 - k0 as f64) * h, dim))).collect();
    let mut modal = vec![vec![0.0; n + 1]; r];
    for i in 0..r {
        let kern: Vec<f64> =
            (0..=k0).map(|m| if m < k0 { near[i][m] } else { 0.0 } + if m > 0 { far[i][m - 1] } else { 0.0 }).collect();
        let wi = sp.w.row(i);
        let e: Vec<f64> = ext.iter().map(|v| wi.dot(&v.transpose())).collect();
        let y = CausalConv::new(kern, n + k0 + 1).apply(&e, n + k0 + 1);
        modal[i].copy_from_slice(&y[k0..=n + k0]);
    }

    // constants, including zero-frequency sines
    let s_h0 = ev.modal_values(Family::S, h0)?;
    let profile = |p: &Option<Vec<f64>>| match p {
        Some(p) => DVector::from_vec(p.clone()),
        None => DVector::from_element(dim, 1.0),
    };
    let mut cvec = DVector::zeros(dim);
    for c in &f.constants {
        cvec += profile(&c.profile) * c.value;
    }
    let mut sines = Vec::new();
    for s in &f.sines {
        let prof = profile(&s.profile);
        if s.omega == 0.0 {
            cvec += prof * (s.amp * s.phase.sin());
        } else {
            sines.push((s.omega, s.phase, prep.pull(prof * s.amp)));
        }
    }
    let cvec = prep.pull(cvec);
    for i in 0..r {
        let ci = sp.w.row(i).dot(&cvec.transpose()) * (-s_h0[i] / sp.mu[i]);
        for v in modal[i].iter_mut() {
            *v += ci;
        }
    }

    // far field of the oscillatory terms; the remainder after the first
    // by-parts term is (1/iω)∫_H^∞ r' e^{-iωτ}, bounded by 2√2|r'(H)|/ω²
    // since r is completely monotone
    let tail_bound = |big_h: f64| -> Result<f64> {
        let d = 1e-3 * big_h;
        let r_plus = ev.modal_values(Family::R, big_h + d)?;
        let r_minus = ev.modal_values(Family::R, big_h - d)?;
        let mut b = 0.0;
        for (om, _, q) in &sines {
            for i in 0..r {
                let qi = sp.w.row(i).dot(&q.transpose());
                let dr = 1.1 * ((r_plus[i] - r_minus[i]) / (2.0 * d)).abs();
                b += 3.0 * dr / (om * om) * qi.abs() * sp.v.column(i).norm();
            }
        }
        Ok(b)
    };
    let (big_h, bound) = match opts.history {
        Some(hist) => (hist, tail_bound(hist)?),
        None => {
            let mut hist = 1e3f64.max(4.0 * h0);
            let mut b = tail_bound(hist)?;
            while b > opts.tol && hist < 1e8 {
                hist *= 4.0;
                b = tail_bound(hist)?;
            }
            (hist, b)
        }
    };
    if bound > opts.tol {
        return Err(Error::TruncationInsufficient { bound, tol: opts.tol });
    }
    if !sines.is_empty() {
        let wmax = sines.iter().map(|s| s.0.abs()).fold(0.0, f64::max);
        let width = (std::f64::consts::FRAC_PI_2 / wmax).min(2.0);
        let panels = ((big_h - h0) / width).ceil().max(1.0) as usize;
        let pw = (big_h - h0) / panels as f64;
        let gl = GaussLegendre::cached(8);
        // F[term][mode]
        let parts: Vec<Vec<Vec<Complex64>>> = (0..panels)
            .into_par_iter()
            .map(|p| {
                let a = h0 + p as f64 * pw;
                let mut acc = vec![vec![Complex64::new(0.0, 0.0); r]; sines.len()];
                for (tau, w) in gl.on(a, a + pw) {
                    let rv = ev.modal_values(Family::R, tau)?;
                    for (j, s) in sines.iter().enumerate() {
                        let e = Complex64::new(0.0, -s.0 * tau).exp() * w;
                        for i in 0..r {
                            acc[j][i] += e * rv[i];
                        }
                    }
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        let mut fw = vec![vec![Complex64::new(0.0, 0.0); r]; sines.len()];
        for part in parts {
            for j in 0..sines.len() {
                for i in 0..r {
                    fw[j][i] += part[j][i];
                }
            }
        }
        let r_h = ev.modal_values(Family::R, big_h)?;
        for (j, (om, ph, q)) in sines.iter().enumerate() {
            for i in 0..r {
                // first by-parts term of ∫_H^∞ r e^{-iωτ}
                fw[j][i] += Complex64::new(0.0, -om * big_h).exp() * r_h[i] / Complex64::new(0.0, *om);
                let qi = sp.w.row(i).dot(&q.transpose());
                for (m, v) in modal[i].iter_mut().enumerate() {
                    let e = Complex64::new(0.0, om * grid.t(m) + ph).exp();
                    *v += (e * fw[j][i]).im * qi;
                }
            }
        }
    }
    let states = (0..=n)
        .map(|m| {
            let mut u = DVector::zeros(dim);
            for (i, md) in modal.iter().enumerate() {
                u.axpy(md[m], &sp.v.column(i), 1.0);
            }
            u
        })
        .collect();
    Ok((Trajectory { grid: *grid, states, residuals: None, iterations: Vec::new(), warnings: Vec::new() }, bound))
}
