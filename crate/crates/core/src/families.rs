//! The base semigroup `T(t)` and the subordinated families
//! `T_{γ,ν}(t) = t^{γν} ∫_0^∞ s^ν Φ_γ(s) T(s t^γ) ds`, `S_γ = T_{γ,0}`,
//! `P_γ = γ T_{γ,1} / t^γ` and `R_γ = t^{γ-1} P_γ`.

use crate::error::{Error, Result};
use crate::oplib::{norm2, norm2_real, CMatrix, Operator, OperatorKind, Spectral};
use crate::quad::GaussLegendre;
use crate::specfun::{wright, wright_tail_cutoff, SpecialFnConfig};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// How the base semigroup is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseMode {
    /// Real eigenstructure `V diag(e^{τμ}) W` (symmetric generators).
    Eigen,
    /// Inverse-Laplace quadrature on the boundary of Ψ.
    Contour,
    /// Matrix exponential; dense and regularized kinds only.
    ScalingSquaring,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    S,
    P,
    R,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::S => "S",
            Family::P => "P",
            Family::R => "R",
        }
    }
}

/// Contour used for the pencil semigroup, `λ = -c(|η| + 1) + iη`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PencilContour {
    /// `None` picks `0.5 / ‖J(0)‖`, which keeps every eigenvalue to the left.
    pub c: Option<f64>,
    pub nodes: usize,
    /// Relative change allowed when the node count doubles.
    pub check_tol: f64,
}

impl Default for PencilContour {
    fn default() -> Self {
        PencilContour { c: None, nodes: 256, check_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Total nodes of the Wright-integral rule, 16 per panel.
    pub nodes: usize,
    /// Truncation of the Wright integral; `None` uses the certified cutoff.
    pub s_max: Option<f64>,
    /// Tail mass allowed beyond `s_max`.
    pub tail_tol: f64,
    pub contour: PencilContour,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { nodes: 768, s_max: None, tail_tol: 1e-14, contour: PencilContour::default() }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 64 {
            return Err(Error::Parameter(format!("quadrature needs at least 64 nodes, got {}", self.nodes)));
        }
        if let Some(s) = self.s_max {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Parameter("S_max must be positive".into()));
            }
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::Parameter("tail tolerance must lie in (0,1)".into()));
        }
        if self.contour.nodes < 32 || !(self.contour.check_tol > 0.0) {
            return Err(Error::Parameter("contour needs ≥ 32 nodes and a positive check tolerance".into()));
        }
        if let Some(c) = self.contour.c {
            if !(c > 0.0) {
                return Err(Error::Parameter("contour constant c must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Nodes and weights of `∫_0^∞ s^ν Φ_γ(s) g(s) ds ≈ Σ w_k g(s_k)`.
#[derive(Debug)]
struct SubRule {
    s: Vec<f64>,
    w: Vec<f64>,
}

const PANEL: usize = 16;

#[derive(Debug)]
pub struct FamilyEvaluator {
    op: Operator,
    gamma: f64,
    quad: QuadratureConfig,
    mode: BaseMode,
    sf: SpecialFnConfig,
    rules: Mutex<HashMap<u64, Arc<SubRule>>>,
}

impl FamilyEvaluator {
    /// Picks the eigen mode when available, otherwise the matrix exponential
    /// (dense, regularized) or the contour (pencil).
    pub fn new(op: Operator, gamma: f64) -> Result<Self> {
        Self::with_config(op, gamma, QuadratureConfig::default(), None)
    }

    pub fn with_config(op: Operator, gamma: f64, quad: QuadratureConfig, mode: Option<BaseMode>) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Parameter(format!("γ must lie in (0,1), got {gamma}")));
        }
        quad.validate()?;
        let mode = match mode {
            Some(BaseMode::Eigen) if op.spectral().is_none() => {
                return Err(Error::Parameter("eigen mode needs a symmetric generator".into()));
            }
            Some(BaseMode::ScalingSquaring) if matches!(op.kind(), OperatorKind::Pencil { .. }) => {
                return Err(Error::Parameter("scaling-squaring mode is unavailable for pencils".into()));
            }
            Some(m) => m,
            None if op.spectral().is_some() => BaseMode::Eigen,
            None => match op.kind() {
                OperatorKind::Pencil { .. } => BaseMode::Contour,
                _ => BaseMode::ScalingSquaring,
            },
        };
        let ev = FamilyEvaluator {
            op,
            gamma,
            quad,
            mode,
            sf: SpecialFnConfig::default(),
            rules: Mutex::new(HashMap::new()),
        };
        ev.rule(0.0)?;
        ev.rule(1.0)?;
        Ok(ev)
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mode(&self) -> BaseMode {
        self.mode
    }

    pub fn quad(&self) -> &QuadratureConfig {
        &self.quad
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Modes in eigen mode.
    pub fn spectral(&self) -> Option<&Spectral> {
        match self.mode {
            BaseMode::Eigen => self.op.spectral(),
            _ => None,
        }
    }

    fn rule(&self, nu: f64) -> Result<Arc<SubRule>> {
        if !(nu > -1.0) {
            return Err(Error::Parameter(format!("ν must exceed -1, got {nu}")));
        }
        let key = nu.to_bits();
        if let Some(r) = self.rules.lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let rule = Arc::new(self.build_rule(nu)?);
        self.rules.lock().unwrap().insert(key, rule.clone());
        Ok(rule)
    }

    fn build_rule(&self, nu: f64) -> Result<SubRule> {
        let g = self.gamma;
        let certified = wright_tail_cutoff(g, nu, self.quad.tail_tol);
        if !certified.is_finite() {
            return Err(Error::Quadrature(format!("no tail cutoff certifies {:e} for ν = {nu}", self.quad.tail_tol)));
        }
        let s_max = match self.quad.s_max {
            Some(s) if s < certified => {
                return Err(Error::Quadrature(format!(
                    "S_max = {s} is below the certified cutoff {certified:.6} for tail {:e}",
                    self.quad.tail_tol
                )))
            }
            Some(s) => s,
            None => certified,
        };
        let gl = GaussLegendre::cached(PANEL);
        let panels = self.quad.nodes / PANEL;
        let mut s = Vec::with_capacity(panels * PANEL);
        let mut w = Vec::with_capacity(panels * PANEL);
        // dyadic panels [S 2^{-j-1}, S 2^{-j}], j < panels - 1
        let mut hi = s_max;
        for _ in 0..panels - 1 {
            let lo = 0.5 * hi;
            for (x, wx) in gl.on(lo, hi) {
                let phi = wright(g, x, &self.sf)?;
                s.push(x);
                w.push(wx * x.powf(nu) * phi);
            }
            hi = lo;
        }
        // innermost panel [0, ε] with s = ε v^{1/(ν+1)}, which absorbs s^ν
        let eps = hi;
        let p = 1.0 / (nu + 1.0);
        for (v, wv) in gl.on(0.0, 1.0) {
            let x = eps * v.powf(p);
            let phi = wright(g, x, &self.sf)?;
            s.push(x);
            w.push(wv * eps.powf(nu + 1.0) * p * phi);
        }
        Ok(SubRule { s, w })
    }

    /// `T(t)` as a matrix.
    pub fn semigroup(&self, t: f64) -> Result<DMatrix<f64>> {
        if t < 0.0 || !t.is_finite() {
            return Err(Error::Parameter(format!("semigroup needs t ≥ 0, got {t}")));
        }
        if t == 0.0 {
            return match self.op.kind() {
                OperatorKind::Pencil { .. } => Err(Error::Domain("T(0) is not defined for a pencil; use t > 0".into())),
                _ => Ok(self.op.regularizer()),
            };
        }
        match self.mode {
            BaseMode::Eigen => {
                let sp = self.op.spectral().expect("eigen mode");
                let d: Vec<f64> = sp.mu.iter().map(|m| (t * m).exp()).collect();
                Ok(sp.assemble(&d))
            }
            BaseMode::ScalingSquaring => match self.op.kind() {
                OperatorKind::Dense { a } => Ok((a * t).exp()),
                OperatorKind::Regularized { a, c } => Ok((a * t).exp() * c),
                OperatorKind::Pencil { .. } => unreachable!(),
            },
            BaseMode::Contour => self.contour_semigroup(t),
        }
    }

    pub fn semigroup_apply(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(x)?;
        Ok(self.semigroup(t)? * x)
    }

    fn check_len(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Parameter(format!("vector length {} != dim {}", x.len(), self.dim())));
        }
        Ok(())
    }

    fn contour_c(&self) -> Result<f64> {
        if let Some(c) = self.quad.contour.c {
            return Ok(c);
        }
        let j0 = self.op.resolvent(Complex64::new(0.0, 0.0))?;
        Ok(0.5 / norm2(&j0).max(1e-300))
    }

    /// `T(τ) = (1/π) Im ∫_0^∞ e^{λτ} J(λ) λ'(η) dη` on the upper arm.
    fn contour_semigroup(&self, tau: f64) -> Result<DMatrix<f64>> {
        let c = self.contour_c()?;
        let eta_max = 37.0 / (c * tau);
        // graded panels up to a width of half an oscillation period
        let max_w = (std::f64::consts::PI / tau).min(eta_max);
        let mut edges = vec![0.0];
        let mut w = (1e-3 * max_w).min(1.0 / c);
        let mut x = 0.0;
        while x < eta_max {
            x = (x + w).min(eta_max);
            edges.push(x);
            w = (2.0 * w).min(max_w);
        }
        let n = self.dim();
        let eval = |per_panel: usize| -> Result<DMatrix<f64>> {
            let gl = GaussLegendre::cached(per_panel);
            let mut sum = CMatrix::zeros(n, n);
            for win in edges.windows(2) {
                for (eta, we) in gl.on(win[0], win[1]) {
                    let lam = Complex64::new(-c * (eta + 1.0), eta);
                    let dl = Complex64::new(-c, 1.0);
                    let j = self.op.resolvent_uncached(lam).map_err(|_| Error::ContourTooClose { node: lam })?;
                    sum += j * ((lam * tau).exp() * dl * we);
                }
            }
            Ok(sum.map(|z| z.im / std::f64::consts::PI))
        };
        let mut per_panel = self.quad.contour.nodes.div_ceil(edges.len() - 1).max(8);
        let mut prev = eval(per_panel)?;
        for _ in 0..4 {
            per_panel *= 2;
            let next = eval(per_panel)?;
            let diff = (&next - &prev).amax();
            if diff <= self.quad.contour.check_tol * next.amax().max(1.0) {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::Quadrature(format!("pencil contour at τ = {tau} did not settle under node doubling")))
    }

    /// Per-mode values of `t^{γν} ∫ s^ν Φ_γ(s) e^{s t^γ μ} ds` (eigen mode).
    fn modal_subordinate(&self, nu: f64, t: f64) -> Result<Vec<f64>> {
        let sp = self.spectral().ok_or_else(|| Error::Parameter("modal values need eigen mode".into()))?;
        let rule = self.rule(nu)?;
        let tg = t.powf(self.gamma);
        Ok(sp
            .mu
            .iter()
            .map(|&m| {
                let a = tg * m;
                rule.s.iter().zip(&rule.w).map(|(s, w)| w * (s * a).exp()).sum::<f64>()
            })
            .collect())
    }

    fn matrix_subordinate(&self, nu: f64, t: f64) -> Result<DMatrix<f64>> {
        let rule = self.rule(nu)?;
        let tg = t.powf(self.gamma);
        let n = self.dim();
        let parts: Vec<DMatrix<f64>> = rule
            .s
            .par_iter()
            .zip(rule.w.par_iter())
            .map(|(s, w)| self.semigroup(s * tg).map(|m| m * *w))
            .collect::<Result<_>>()?;
        Ok(parts.into_iter().fold(DMatrix::zeros(n, n), |acc, m| acc + m))
    }

    /// Per-mode scalar values of a family (eigen mode): the matrix is
    /// `V diag(values) W`.
    pub fn modal_values(&self, fam: Family, t: f64) -> Result<Vec<f64>> {
        self.check_t(fam, t)?;
        let g = self.gamma;
        match fam {
            Family::S => self.modal_subordinate(0.0, t),
            Family::P => Ok(self.modal_subordinate(1.0, t)?.into_iter().map(|v| g * v).collect()),
            Family::R => {
                let k = t.powf(g - 1.0);
                Ok(self.modal_subordinate(1.0, t)?.into_iter().map(|v| g * v * k).collect())
            }
        }
    }

    fn check_t(&self, fam: Family, t: f64) -> Result<()> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Parameter(format!("families need t ≥ 0, got {t}")));
        }
        if t == 0.0 {
            if matches!(self.op.kind(), OperatorKind::Pencil { .. }) {
                return Err(Error::Domain("families of a pencil are evaluated for t > 0 only".into()));
            }
            if fam == Family::R {
                return Err(Error::Domain("R_γ(t) is singular at t = 0".into()));
            }
        }
        Ok(())
    }

    /// `T_{γ,ν}(t)` as a matrix.
    pub fn subordinate_matrix(&self, nu: f64, t: f64) -> Result<DMatrix<f64>> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Parameter(format!("subordination needs t > 0, got {t}")));
        }
        let scale = t.powf(self.gamma * nu);
        if let Some(sp) = self.spectral() {
            let d = self.modal_subordinate(nu, t)?;
            return Ok(sp.assemble(&d) * scale);
        }
        Ok(self.matrix_subordinate(nu, t)? * scale)
    }

    pub fn subordinate(&self, nu: f64, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(x)?;
        Ok(self.subordinate_matrix(nu, t)? * x)
    }

    /// Family value as a matrix.
    pub fn family_matrix(&self, fam: Family, t: f64) -> Result<DMatrix<f64>> {
        self.check_t(fam, t)?;
        if let Some(sp) = self.spectral() {
            return Ok(sp.assemble(&self.modal_values(fam, t)?));
        }
        if t == 0.0 {
            // S(0) = T(0), P(0) = γ m_1 T(0) with m_1 = 1/Γ(1+γ)
            let t0 = self.op.regularizer();
            return Ok(match fam {
                Family::S => t0,
                _ => t0 * (self.gamma * self.rule(1.0)?.w.iter().sum::<f64>()),
            });
        }
        let g = self.gamma;
        Ok(match fam {
            Family::S => self.matrix_subordinate(0.0, t)?,
            Family::P => self.matrix_subordinate(1.0, t)? * g,
            Family::R => self.matrix_subordinate(1.0, t)? * (g * t.powf(g - 1.0)),
        })
    }

    pub fn apply(&self, fam: Family, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(x)?;
        Ok(self.family_matrix(fam, t)? * x)
    }

    pub fn s_gamma(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.apply(Family::S, t, x)
    }

    pub fn p_gamma(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.apply(Family::P, t, x)
    }

    pub fn r_gamma(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.apply(Family::R, t, x)
    }

    /// Spectral norms of a family on a grid, evaluated in parallel.
    pub fn operator_norm_curve(&self, fam: Family, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        check_grid(t_grid)?;
        t_grid.par_iter().map(|&t| Ok((t, norm2_real(&self.family_matrix(fam, t)?)))).collect()
    }

    /// Norm of `x ↦ (S x, (-𝒜)^θ S x)` in `L(X, [D((-𝒜)^θ)])` (eigen mode),
    /// reported for slope measurement only.
    pub fn graph_norm_curve(&self, fam: Family, theta: f64, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        check_grid(t_grid)?;
        let sp = self.spectral().ok_or_else(|| Error::Parameter("graph norms need eigen mode".into()))?;
        t_grid
            .par_iter()
            .map(|&t| {
                let d = self.modal_values(fam, t)?;
                let dp: Vec<f64> = d.iter().zip(&sp.mu).map(|(v, m)| v * (-m).max(0.0).powf(theta)).collect();
                let top = sp.assemble(&d);
                let bottom = sp.assemble(&dp);
                let n = self.dim();
                let mut stacked = DMatrix::zeros(2 * n, n);
                stacked.rows_mut(0, n).copy_from(&top);
                stacked.rows_mut(n, n).copy_from(&bottom);
                Ok((t, norm2_real(&stacked)))
            })
            .collect()
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("t grid must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// `per_decade` points per decade on `[t0, t1]`, both ends included.
pub fn geometric_grid(t0: f64, t1: f64, per_decade: usize) -> Vec<f64> {
    let n = ((t1 / t0).log10() * per_decade as f64).round().max(1.0) as usize;
    (0..=n).map(|k| t0 * (t1 / t0).powf(k as f64 / n as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub window: [f64; 2],
    pub slope: f64,
    /// Natural log of the fitted constant.
    pub intercept: f64,
    /// Largest `norm / (e^intercept t^slope) - 1` over the window.
    pub max_violation: f64,
}

fn window_points(curve: &[(f64, f64)], window: [f64; 2]) -> Result<Vec<(f64, f64)>> {
    if !(window[0] > 0.0 && window[1] > window[0]) {
        return Err(Error::Parameter(format!("degenerate window {window:?}")));
    }
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|(t, _)| *t >= window[0] * (1.0 - 1e-12) && *t <= window[1] * (1.0 + 1e-12))
        .copied()
        .collect();
    if pts.len() < 8 {
        return Err(Error::DegenerateFit(format!("{} samples in window, need 8", pts.len())));
    }
    if pts.iter().all(|p| p.1 < 1e-300) {
        return Err(Error::DegenerateFit("all norms vanish".into()));
    }
    if pts.iter().any(|p| !(p.1 > 0.0)) {
        return Err(Error::DegenerateFit("non-positive norm in window".into()));
    }
    Ok(pts.into_iter().map(|(t, n)| (t.ln(), n.ln())).collect())
}

/// Least-squares power law `norm ≈ e^b t^a` on a window inside `[1, ∞)`.
pub fn fit_decay(curve: &[(f64, f64)], window: [f64; 2]) -> Result<DecayFit> {
    if window[0] < 1.0 {
        return Err(Error::Parameter("decay windows start at t ≥ 1".into()));
    }
    let pts = window_points(curve, window)?;
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_violation =
        pts.iter().map(|p| (p.1 - intercept - slope * p.0).exp() - 1.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit { window, slope, intercept, max_violation })
}

/// Bound `norm ≤ c t^exponent` near the origin: c is the least-squares
/// constant on the first decade of the window, the violation is measured
/// over all of it.
pub fn fit_small_time_bound(curve: &[(f64, f64)], window: [f64; 2], exponent: f64) -> Result<DecayFit> {
    let pts = window_points(curve, window)?;
    let cut = window[0].ln() + std::f64::consts::LN_10;
    let head: Vec<&(f64, f64)> = pts.iter().filter(|p| p.0 <= cut).collect();
    if head.is_empty() {
        return Err(Error::DegenerateFit("empty first decade".into()));
    }
    let intercept = head.iter().map(|p| p.1 - exponent * p.0).sum::<f64>() / head.len() as f64;
    let max_violation =
        pts.iter().map(|p| (p.1 - intercept - exponent * p.0).exp() - 1.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit { window, slope: exponent, intercept, max_violation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::mittag_leffler_real;
    use proptest::prelude::*;

    fn ml(g: f64, b: f64, x: f64) -> f64 {
        mittag_leffler_real(g, b, x, &SpecialFnConfig::default()).unwrap()
    }

    fn scalar(a: f64, g: f64) -> FamilyEvaluator {
        FamilyEvaluator::new(Operator::diagonal(&[a]).unwrap(), g).unwrap()
    }

    fn one() -> DVector<f64> {
        DVector::from_vec(vec![1.0])
    }

    #[test]
    fn semigroup_examples() {
        let ev = scalar(-1.0, 0.5);
        assert!((ev.semigroup_apply(2.0, &one()).unwrap()[0] - (-2f64).exp()).abs() < 1e-15);
        let p = Operator::pencil(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0])),
            DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -1.0])),
        )
        .unwrap();
        let x = DVector::from_vec(vec![1.0, 1.0]);
        for mode in [BaseMode::Eigen, BaseMode::Contour] {
            let ev = FamilyEvaluator::with_config(p.clone(), 0.5, QuadratureConfig::default(), Some(mode)).unwrap();
            let y = ev.semigroup_apply(1.0, &x).unwrap();
            assert!((y[0] - (-1f64).exp()).abs() < 1e-8, "{mode:?} {y}");
            assert!(y[1].abs() < 1e-12, "{mode:?} {y}");
        }
        let r = FamilyEvaluator::new(
            Operator::regularized(DMatrix::from_element(1, 1, -1.0), DMatrix::from_element(1, 1, 0.5)).unwrap(),
            0.5,
        )
        .unwrap();
        assert_eq!(r.semigroup_apply(0.0, &one()).unwrap()[0], 0.5);
    }

    #[test]
    fn scalar_families_match_mittag_leffler() {
        let ev = scalar(-1.0, 0.5);
        let s = ev.s_gamma(1.0, &one()).unwrap()[0];
        let p = ev.p_gamma(1.0, &one()).unwrap()[0];
        let r = ev.r_gamma(1.0, &one()).unwrap()[0];
        assert!((s - 0.42758357615580700441).abs() < 1e-10, "{s}");
        assert!((p - 0.13660600739194928254).abs() < 1e-10, "{p}");
        assert_eq!(r, p);
        let sub = ev.subordinate(0.0, 1.0, &one()).unwrap()[0];
        assert_eq!(sub, s);
        assert!((ev.s_gamma(1e-6, &one()).unwrap()[0] - 1.0).abs() < 2e-3);
        assert_eq!(ev.subordinate(0.0, 1.0, &DVector::zeros(1)).unwrap()[0], 0.0);
    }

    #[test]
    fn diagonal_moment_oracle() {
        // T_{γ,1}(2) entries against per-eigenvalue adaptive quadrature
        let ev = FamilyEvaluator::new(Operator::diagonal(&[-1.0, -4.0]).unwrap(), 0.7).unwrap();
        let m = ev.subordinate_matrix(1.0, 2.0).unwrap();
        let tg = 2f64.powf(0.7);
        let cfg = SpecialFnConfig::default();
        for (i, &a) in [-1.0, -4.0].iter().enumerate() {
            let q = crate::quad::adaptive(
                |s| s * wright(0.7, s, &cfg).unwrap() * (s * tg * a).exp(),
                0.0,
                40.0,
                1e-14,
                1e-13,
            );
            let want = tg * q.value;
            assert!((m[(i, i)] - want).abs() < 1e-6 * want, "{} {}", m[(i, i)], want);
            // and P = γ T_{γ,1}/t^γ = E_{γ,γ}(t^γ a)
            assert!((0.7 * m[(i, i)] / tg - ml(0.7, 0.7, tg * a)).abs() < 1e-9);
        }
        assert!(m[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn oracle_equivalence_grid() {
        let d = [-10.0, -3.0, -0.7, -0.1];
        for &g in &[0.3, 0.5, 0.7] {
            let ev = FamilyEvaluator::new(Operator::diagonal(&d).unwrap(), g).unwrap();
            for &t in &[0.1, 1.0, 10.0] {
                let s = ev.modal_values(Family::S, t).unwrap();
                let p = ev.modal_values(Family::P, t).unwrap();
                let sp = ev.spectral().unwrap();
                for (i, &m) in sp.mu.iter().enumerate() {
                    let x = t.powf(g) * m;
                    assert!((s[i] - ml(g, 1.0, x)).abs() < 1e-8, "g={g} t={t} mu={m}");
                    assert!((p[i] - ml(g, g, x)).abs() < 1e-8, "g={g} t={t} mu={m}");
                }
            }
        }
    }

    #[test]
    fn dense_modes_agree() {
        // non-symmetric dense goes through the matrix exponential
        let a = DMatrix::from_row_slice(2, 2, &[-2.0, 0.5, 0.0, -1.0]);
        let ev = FamilyEvaluator::new(Operator::dense(a).unwrap(), 0.6).unwrap();
        assert_eq!(ev.mode(), BaseMode::ScalingSquaring);
        let s = ev.family_matrix(Family::S, 1.5).unwrap();
        // upper-triangular: diagonal entries are scalar Mittag-Leffler values
        let tg = 1.5f64.powf(0.6);
        assert!((s[(0, 0)] - ml(0.6, 1.0, -2.0 * tg)).abs() < 1e-9);
        assert!((s[(1, 1)] - ml(0.6, 1.0, -tg)).abs() < 1e-9);
        // E_γ(t^γ A) for a 2x2 triangular A: off-diagonal by divided difference
        let off = 0.5 * (ml(0.6, 1.0, -2.0 * tg) - ml(0.6, 1.0, -tg)) / (-2.0 + 1.0);
        assert!((s[(0, 1)] - off).abs() < 1e-9);
    }

    #[test]
    fn semigroup_law() {
        let p = Operator::pencil(
            DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0]),
            DMatrix::from_row_slice(3, 3, &[-3.0, 0.2, 0.0, 0.2, -2.0, 0.1, 0.0, 0.1, -1.0]),
        )
        .unwrap();
        let reg = Operator::regularized(
            DMatrix::from_row_slice(2, 2, &[-1.0, 0.3, 0.3, -2.0]),
            DMatrix::identity(2, 2) * 0.5,
        )
        .unwrap();
        for op in [p, reg] {
            let ev = FamilyEvaluator::new(op.clone(), 0.5).unwrap();
            let c = match op.kind() {
                OperatorKind::Pencil { .. } => op.range_projection().unwrap(),
                _ => op.regularizer(),
            };
            for &(t, s) in &[(0.3, 0.7), (1.0, 2.0), (0.05, 0.1)] {
                let lhs = ev.semigroup(t + s).unwrap() * &c;
                let rhs = ev.semigroup(t).unwrap() * ev.semigroup(s).unwrap();
                assert!((lhs - rhs).amax() < 1e-8);
            }
        }
    }

    #[test]
    fn pencil_contour_matches_eigen() {
        let p = Operator::pencil(
            DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0]),
            DMatrix::from_row_slice(3, 3, &[-3.0, 0.2, 0.0, 0.2, -2.0, 0.1, 0.0, 0.1, -1.0]),
        )
        .unwrap();
        let eig = FamilyEvaluator::new(p.clone(), 0.5).unwrap();
        let con = FamilyEvaluator::with_config(p, 0.5, QuadratureConfig::default(), Some(BaseMode::Contour)).unwrap();
        for &t in &[0.1, 1.0, 5.0] {
            let d = (eig.semigroup(t).unwrap() - con.semigroup(t).unwrap()).amax();
            assert!(d < 1e-8, "t={t} {d}");
        }
    }

    #[test]
    fn pencil_null_coordinate_annihilated() {
        let p = Operator::pencil(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0])),
            DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -1.0])),
        )
        .unwrap();
        let x = DVector::from_vec(vec![0.3, 1.0]);
        for &g in &[0.3, 0.7] {
            let ev = FamilyEvaluator::new(p.clone(), g).unwrap();
            for fam in [Family::S, Family::P, Family::R] {
                for &t in &[1e-3, 0.5, 20.0] {
                    let y = ev.apply(fam, t, &x).unwrap();
                    assert!(y[1].abs() <= 1e-12);
                }
            }
            assert!(ev.s_gamma(0.0, &x).is_err());
        }
    }

    #[test]
    fn norm_curves_and_fits() {
        let ev = scalar(-1.0, 0.5);
        let c = ev.operator_norm_curve(Family::S, &[1.0]).unwrap();
        assert!((c[0].1 - 0.42758357615580700441).abs() < 1e-10);
        let grid = geometric_grid(10.0, 1000.0, 8);
        let s = fit_decay(&ev.operator_norm_curve(Family::S, &grid).unwrap(), [10.0, 1000.0]).unwrap();
        assert!((s.slope + 0.5).abs() <= 0.05, "{}", s.slope);
        let p = fit_decay(&ev.operator_norm_curve(Family::P, &grid).unwrap(), [10.0, 1000.0]).unwrap();
        assert!((p.slope + 1.0).abs() <= 0.1, "{}", p.slope);

        let zero = FamilyEvaluator::new(Operator::dense(DMatrix::zeros(2, 2)).unwrap(), 0.4).unwrap();
        let curve = zero.operator_norm_curve(Family::S, &grid).unwrap();
        assert!(curve.iter().all(|(_, n)| (n - 1.0).abs() < 1e-12));
        assert!(fit_decay(&curve, [10.0, 1000.0]).unwrap().slope.abs() < 1e-6);
    }

    #[test]
    fn fit_errors() {
        let curve: Vec<(f64, f64)> = (1..=10).map(|k| (k as f64, 0.0)).collect();
        assert!(matches!(fit_decay(&curve, [1.0, 10.0]), Err(Error::DegenerateFit(_))));
        assert!(fit_decay(&curve[..5], [1.0, 10.0]).is_err());
        assert!(fit_decay(&curve, [0.5, 10.0]).is_err());
    }

    #[test]
    fn small_time_bound() {
        let ev = scalar(-1.0, 0.5);
        let grid = geometric_grid(1e-4, 1.0, 8);
        for fam in [Family::S, Family::P] {
            let fit = fit_small_time_bound(&ev.operator_norm_curve(fam, &grid).unwrap(), [1e-4, 1.0], 0.0).unwrap();
            assert!(fit.max_violation <= 0.1, "{fam:?} {}", fit.max_violation);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn random_diagonal_oracle(
            d in proptest::collection::vec(-10.0f64..-0.1, 1..4),
            gi in 0usize..3,
            ti in 0usize..3,
        ) {
            let g = [0.3, 0.5, 0.7][gi];
            let t = [0.1, 1.0, 10.0][ti];
            let ev = FamilyEvaluator::new(Operator::diagonal(&d).unwrap(), g).unwrap();
            let s = ev.family_matrix(Family::S, t).unwrap();
            let p = ev.family_matrix(Family::P, t).unwrap();
            let es = DMatrix::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|a| ml(g, 1.0, t.powf(g) * a))));
            let ep = DMatrix::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|a| ml(g, g, t.powf(g) * a))));
            prop_assert!(norm2_real(&(s - es)) <= 1e-5);
            prop_assert!(norm2_real(&(p - ep)) <= 1e-5);
        }
    }

    #[test]
    fn config_validation() {
        let op = Operator::diagonal(&[-1.0]).unwrap();
        let bad = QuadratureConfig { nodes: 32, ..Default::default() };
        assert!(FamilyEvaluator::with_config(op.clone(), 0.5, bad, None).is_err());
        let short = QuadratureConfig { s_max: Some(1.0), ..Default::default() };
        assert!(matches!(FamilyEvaluator::with_config(op.clone(), 0.5, short, None), Err(Error::Quadrature(_))));
        assert!(FamilyEvaluator::new(op, 1.0).is_err());
    }
}
