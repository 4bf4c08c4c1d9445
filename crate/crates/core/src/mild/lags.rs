//! Product-integration weights for `∫ R_γ(τ) f(t - τ) dτ` with `f` linear
//! between grid nodes; the kernel itself is integrated exactly.

use crate::error::Result;
use crate::families::{Family, FamilyEvaluator};
use crate::quad::GaussLegendre;
use crate::specfun::{mittag_leffler_real, SpecialFnConfig};
use nalgebra::DMatrix;
use rayon::prelude::*;

/// Lags at or beyond this use the short rule: the kernel is then smooth on
/// the scale of one step.
const FAR_LAG: usize = 32;

/// For lag k the pair `(near, far)` weights `f(t_n - kh)` and
/// `f(t_n - (k+1)h)`.
pub(crate) enum LagTable {
    /// `[mode][lag]`.
    Modal {
        near: Vec<Vec<f64>>,
        far: Vec<Vec<f64>>,
    },
    Matrix {
        near: Vec<DMatrix<f64>>,
        far: Vec<DMatrix<f64>>,
    },
}

impl LagTable {
    /// Lags `0..=max_lag`.
    pub(crate) fn new(ev: &FamilyEvaluator, h: f64, max_lag: usize) -> Result<LagTable> {
        match ev.spectral() {
            Some(sp) => {
                let g = ev.gamma();
                let cfg = SpecialFnConfig::default();
                let hg = h.powf(g);
                let r = sp.rank();
                // lag 0 from the antiderivatives τ^γ E_{γ,γ+1} and τ^{γ+1} E_{γ,γ+2}
                let mut near0 = Vec::with_capacity(r);
                let mut far0 = Vec::with_capacity(r);
                for &mu in &sp.mu {
                    let x = mu * hg;
                    let e1 = mittag_leffler_real(g, g + 1.0, x, &cfg)?;
                    let e2 = mittag_leffler_real(g, g + 2.0, x, &cfg)?;
                    near0.push(hg * e2);
                    far0.push(hg * (e1 - e2));
                }
                let rows: Vec<(Vec<f64>, Vec<f64>)> = (1..=max_lag)
                    .into_par_iter()
                    .map(|k| {
                        let gl = GaussLegendre::cached(if k < FAR_LAG { 8 } else { 4 });
                        let mut near = vec![0.0; r];
                        let mut far = vec![0.0; r];
                        for (th, w) in gl.on(0.0, 1.0) {
                            let vals = ev.modal_values(Family::R, (k as f64 + th) * h)?;
                            for i in 0..r {
                                near[i] += h * w * (1.0 - th) * vals[i];
                                far[i] += h * w * th * vals[i];
                            }
                        }
                        Ok((near, far))
                    })
                    .collect::<Result<_>>()?;
                let mut near = vec![Vec::with_capacity(max_lag + 1); r];
                let mut far = vec![Vec::with_capacity(max_lag + 1); r];
                for i in 0..r {
                    near[i].push(near0[i]);
                    far[i].push(far0[i]);
                    for row in &rows {
                        near[i].push(row.0[i]);
                        far[i].push(row.1[i]);
                    }
                }
                Ok(LagTable::Modal { near, far })
            }
            None => {
                let n = ev.dim();
                let g = ev.gamma();
                let lag0 = {
                    // u = τ^γ turns τ^{γ-1} P(τ) dτ into P(u^{1/γ}) du / γ;
                    // dyadic panels absorb the kink of u^{1/γ} at 0
                    let gl = GaussLegendre::cached(8);
                    let top = h.powf(g);
                    let mut near = DMatrix::zeros(n, n);
                    let mut far = DMatrix::zeros(n, n);
                    let mut hi = top;
                    for p in 0..12 {
                        let lo = if p == 11 { 0.0 } else { 0.5 * hi };
                        for (u, w) in gl.on(lo, hi) {
                            let tau = u.powf(1.0 / g);
                            let pm = ev.family_matrix(Family::P, tau)?;
                            let th = tau / h;
                            near += &pm * (w / g * (1.0 - th));
                            far += &pm * (w / g * th);
                        }
                        hi = lo;
                    }
                    (near, far)
                };
                let rows: Vec<(DMatrix<f64>, DMatrix<f64>)> = (1..=max_lag)
                    .into_par_iter()
                    .map(|k| {
                        let gl = GaussLegendre::cached(if k < FAR_LAG { 8 } else { 4 });
                        let mut near = DMatrix::zeros(n, n);
                        let mut far = DMatrix::zeros(n, n);
                        for (th, w) in gl.on(0.0, 1.0) {
                            let rm = ev.family_matrix(Family::R, (k as f64 + th) * h)?;
                            near += &rm * (h * w * (1.0 - th));
                            far += &rm * (h * w * th);
                        }
                        Ok((near, far))
                    })
                    .collect::<Result<_>>()?;
                let mut near = vec![lag0.0];
                let mut far = vec![lag0.1];
                for (a, b) in rows {
                    near.push(a);
                    far.push(b);
                }
                Ok(LagTable::Matrix { near, far })
            }
        }
    }
}
