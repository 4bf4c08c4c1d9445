//! Mild solutions `u(t) = S_γ(t)x₀ + ∫_0^t R_γ(t-s) f(s, u(s)) ds`, the
//! L1 Caputo derivative and residual checks.

pub(crate) mod conv;
mod lags;
mod weyl;

pub use weyl::{solve_weyl_liouville, WeylOptions};

use crate::error::{Error, Result};
use crate::families::{geometric_grid, Family, FamilyEvaluator};
use crate::oplib::OperatorKind;
use crate::quad::GaussLegendre;
use crate::signal::{fmt17, Forcing, Signal};
use crate::specfun::gamma;
use conv::CausalConv;
use lags::LagTable;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Uniform grid `t_i = i T / N`, `i = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

impl Grid {
    pub fn new(t_end: f64, n: usize) -> Result<Grid> {
        let g = Grid { t_end, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Parameter(format!("grid needs T > 0, got {}", self.t_end)));
        }
        if self.n < 2 {
            return Err(Error::GridTooCoarse { needed: 3, got: self.n + 1 });
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        self.t_end / self.n as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t_end * i as f64 / self.n as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.t(i)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid,
    pub states: Vec<DVector<f64>>,
    /// Caputo residual per node; the first nodes carry NaN.
    pub residuals: Option<Vec<f64>>,
    /// Sup-distance between successive Picard iterates.
    pub iterations: Vec<f64>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    pub fn to_signal(&self) -> Signal {
        let dim = self.dim();
        let data = self.states.iter().flat_map(|s| s.iter().copied()).collect();
        Signal { t0: 0.0, dt: self.grid.h(), dim, data }
    }

    /// Component i as a scalar signal.
    pub fn component(&self, i: usize) -> Signal {
        Signal { t0: 0.0, dt: self.grid.h(), dim: 1, data: self.states.iter().map(|s| s[i]).collect() }
    }

    /// CSV with columns `t, u_1..u_n, residual`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("t");
        for i in 1..=self.dim() {
            out.push_str(&format!(",u_{i}"));
        }
        out.push_str(",residual\n");
        for (k, s) in self.states.iter().enumerate() {
            out.push_str(&fmt17(self.grid.t(k)));
            for v in s.iter() {
                out.push(',');
                out.push_str(&fmt17(*v));
            }
            out.push(',');
            if let Some(r) = self.residuals.as_ref().map(|r| r[k]).filter(|r| r.is_finite()) {
                out.push_str(&fmt17(r));
            }
            out.push('\n');
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// L1 approximation of the Caputo derivative at every node; entry 0 is NaN.
pub fn caputo_derivative(states: &[DVector<f64>], gamma_: f64, h: f64) -> Result<Vec<DVector<f64>>> {
    if !(gamma_ > 0.0 && gamma_ < 1.0) {
        return Err(Error::Parameter(format!("γ must lie in (0,1), got {gamma_}")));
    }
    if states.len() < 3 {
        return Err(Error::GridTooCoarse { needed: 3, got: states.len() });
    }
    let n = states.len();
    let dim = states[0].len();
    let b: Vec<f64> = (0..n).map(|j| ((j + 1) as f64).powf(1.0 - gamma_) - (j as f64).powf(1.0 - gamma_)).collect();
    let c = h.powf(-gamma_) / gamma(2.0 - gamma_);
    let conv = CausalConv::new(b, n);
    let mut out = vec![DVector::from_element(dim, f64::NAN); n];
    for i in 0..dim {
        let mut d = vec![0.0; n];
        for m in 1..n {
            d[m] = states[m][i] - states[m - 1][i];
        }
        let y = conv.apply(&d, n);
        for m in 1..n {
            out[m][i] = c * y[m];
        }
    }
    Ok(out)
}

/// Nodes excluded from residual maxima.
pub const RESIDUAL_SKIP: usize = 10;

/// Per-node residual `‖lhs·D^γu - rhs·u - lhs·f‖` (`(I, A)` or `(M, L)`).
pub fn residual_profile(ev: &FamilyEvaluator, traj: &Trajectory, f: &Forcing) -> Result<Vec<f64>> {
    let d = caputo_derivative(&traj.states, ev.gamma(), traj.grid.h())?;
    let (lhs, rhs) = ev.op().residual_matrices();
    Ok(traj
        .states
        .iter()
        .enumerate()
        .map(|(k, u)| {
            if k == 0 {
                return f64::NAN;
            }
            let fv = f.eval_state(traj.grid.t(k), u);
            (&lhs * (&d[k] - fv) - &rhs * u).norm()
        })
        .collect())
}

/// Max residual over nodes `RESIDUAL_SKIP..`.
pub fn residual_check(ev: &FamilyEvaluator, traj: &Trajectory, f: &Forcing) -> Result<f64> {
    let r = residual_profile(ev, traj, f)?;
    if r.len() <= RESIDUAL_SKIP {
        return Err(Error::GridTooCoarse { needed: RESIDUAL_SKIP + 1, got: r.len() });
    }
    Ok(r[RESIDUAL_SKIP..].iter().copied().fold(0.0, f64::max))
}

/// Convolution with the lag table, reused across Picard sweeps.
struct Convolver {
    table: LagTable,
    convs: Vec<CausalConv>,
    n: usize,
}

impl Convolver {
    fn new(ev: &FamilyEvaluator, h: f64, n: usize) -> Result<Self> {
        let table = LagTable::new(ev, h, n)?;
        let convs = match &table {
            LagTable::Modal { near, far } => near
                .iter()
                .zip(far)
                .map(|(ne, fa)| {
                    let k: Vec<f64> = (0..=n).map(|m| ne[m] + if m > 0 { fa[m - 1] } else { 0.0 }).collect();
                    CausalConv::new(k, n + 1)
                })
                .collect(),
            LagTable::Matrix { .. } => Vec::new(),
        };
        Ok(Convolver { table, convs, n })
    }

    /// `y_n = Σ_{k<n} near(k) g_{n-k} + far(k) g_{n-k-1}`, `n = 0..=N`.
    fn apply(&self, ev: &FamilyEvaluator, g: &[DVector<f64>]) -> Vec<DVector<f64>> {
        let n = self.n;
        let dim = ev.dim();
        match &self.table {
            LagTable::Modal { near, .. } => {
                let sp = ev.spectral().expect("modal table implies eigen mode");
                let mut out = vec![DVector::zeros(dim); n + 1];
                for (i, conv) in self.convs.iter().enumerate() {
                    let wi = sp.w.row(i);
                    let gh: Vec<f64> = g.iter().map(|v| wi.dot(&v.transpose())).collect();
                    let y = conv.apply(&gh, n + 1);
                    let vi = sp.v.column(i);
                    for m in 1..=n {
                        let ym = y[m] - near[i][m] * gh[0];
                        out[m].axpy(ym, &vi, 1.0);
                    }
                }
                out
            }
            LagTable::Matrix { near, far } => (0..=n)
                .map(|m| {
                    let mut acc = DVector::zeros(dim);
                    for k in 0..m {
                        acc += &near[k] * &g[m - k] + &far[k] * &g[m - k - 1];
                    }
                    acc
                })
                .collect(),
        }
    }
}

/// Initial data and forcing pulled back through `C^{-1}` in regularized mode.
struct Prepared {
    cinv: Option<DMatrix<f64>>,
}

impl Prepared {
    fn new(ev: &FamilyEvaluator) -> Result<Self> {
        let cinv = match ev.op().kind() {
            OperatorKind::Regularized { c, .. } => {
                let sv = c.clone().singular_values();
                if sv.min() <= 1e-12 * sv.max() {
                    return Err(Error::RankDeficient);
                }
                Some(c.clone().try_inverse().ok_or(Error::RankDeficient)?)
            }
            _ => None,
        };
        Ok(Prepared { cinv })
    }

    fn pull(&self, y: DVector<f64>) -> DVector<f64> {
        match &self.cinv {
            Some(ci) => ci * y,
            None => y,
        }
    }
}

fn check_inputs(ev: &FamilyEvaluator, x0: &DVector<f64>, f: &Forcing, grid: &Grid) -> Result<()> {
    grid.validate()?;
    f.validate(ev.dim())?;
    if x0.len() != ev.dim() {
        return Err(Error::Parameter(format!("x0 has length {} != dim {}", x0.len(), ev.dim())));
    }
    if ev.spectral().is_none() && matches!(ev.op().kind(), OperatorKind::Pencil { .. }) {
        return Err(Error::Parameter("pencil solves need the eigen mode (symmetric M ⪰ 0, -L ≻ 0)".into()));
    }
    Ok(())
}

/// `S_γ(t_n) x` on the grid; at t = 0 the limit `T(0+)x`.
fn homogeneous(ev: &FamilyEvaluator, x: &DVector<f64>, grid: &Grid) -> Result<Vec<DVector<f64>>> {
    let mut out = Vec::with_capacity(grid.n + 1);
    match ev.spectral() {
        Some(sp) => {
            let wx = &sp.w * x;
            for k in 0..=grid.n {
                let d = if k == 0 { vec![1.0; sp.rank()] } else { ev.modal_values(Family::S, grid.t(k))? };
                let scaled = DVector::from_iterator(sp.rank(), wx.iter().zip(&d).map(|(a, b)| a * b));
                out.push(&sp.v * scaled);
            }
        }
        None => {
            for k in 0..=grid.n {
                out.push(ev.apply(Family::S, grid.t(k), x)?);
            }
        }
    }
    Ok(out)
}

/// Warning text when `x₀` is not reproduced by `S_γ(0+)`, i.e. lies outside
/// the closure of the domain (for pencils: has an M-null component).
fn continuity_warning(ev: &FamilyEvaluator, x0p: &DVector<f64>, x0: &DVector<f64>) -> Result<Option<String>> {
    let Some(sp) = ev.spectral() else { return Ok(None) };
    let d = (&sp.v * (&sp.w * x0p) - x0).norm();
    Ok((d > 1e-3 * x0.norm().max(1.0))
        .then(|| format!("x0 outside the domain of continuity: ‖S(0+)x0 - x0‖ = {d:.3e}")))
}

/// Mild solution of the linear problem; `f` must be state-free.
pub fn solve_linear(ev: &FamilyEvaluator, x0: &DVector<f64>, f: &Forcing, grid: &Grid) -> Result<Trajectory> {
    check_inputs(ev, x0, f, grid)?;
    if !f.is_state_free() {
        return Err(Error::Parameter("solve_linear needs a state-free forcing".into()));
    }
    let prep = Prepared::new(ev)?;
    let x0p = prep.pull(x0.clone());
    let mut warnings = Vec::new();
    if let Some(w) = continuity_warning(ev, &x0p, x0)? {
        warnings.push(w);
    }
    let hom = homogeneous(ev, &x0p, grid)?;
    let conv = Convolver::new(ev, grid.h(), grid.n)?;
    let g: Vec<DVector<f64>> = (0..=grid.n).map(|k| prep.pull(f.eval(grid.t(k), ev.dim()))).collect();
    let y = conv.apply(ev, &g);
    let states: Vec<DVector<f64>> = hom.into_iter().zip(y).map(|(a, b)| a + b).collect();
    let mut traj = Trajectory { grid: *grid, states, residuals: None, iterations: Vec::new(), warnings };
    traj.residuals = Some(residual_profile(ev, &traj, f)?);
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PicardStart {
    /// `u₀ = S_γ(·)x₀`.
    Homogeneous,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub start: PicardStart,
    /// Exponent β of condition (P) used in the certificate.
    pub beta: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { tol: 1e-10, max_iter: 60, start: PicardStart::Homogeneous, beta: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionCert {
    #[serde(rename = "A1_bound")]
    pub a1_bound: f64,
    #[serde(rename = "M1")]
    pub m1: f64,
    #[serde(rename = "M2")]
    pub m2: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub gamma: f64,
    pub beta: f64,
    pub verdict: bool,
}

/// `L (M₁/(γβ) + M₂/γ)`.
pub fn contraction_bound(l: f64, gamma_: f64, beta: f64, m1: f64, m2: f64) -> f64 {
    l * (m1 / (gamma_ * beta) + m2 / gamma_)
}

/// `M₁ = sup_{(0,1]} (‖S‖ + ‖P‖) t^{γ(1-β)}` and
/// `M₂ = sup_{[1,10³]} max(‖S‖ t^γ, ‖P‖ t^{2γ})`, both on sampled grids.
pub fn measure_family_constants(ev: &FamilyEvaluator, beta: f64) -> Result<(f64, f64)> {
    let g = ev.gamma();
    let small = geometric_grid(1e-4, 1.0, 8);
    let large = geometric_grid(1.0, 1e3, 8);
    let s0 = ev.operator_norm_curve(Family::S, &small)?;
    let p0 = ev.operator_norm_curve(Family::P, &small)?;
    let m1 = s0.iter().zip(&p0).map(|((t, s), (_, p))| (s + p) * t.powf(g * (1.0 - beta))).fold(0.0, f64::max);
    let s1 = ev.operator_norm_curve(Family::S, &large)?;
    let p1 = ev.operator_norm_curve(Family::P, &large)?;
    let m2 = s1.iter().zip(&p1).map(|((t, s), (_, p))| (s * t.powf(g)).max(p * t.powf(2.0 * g))).fold(0.0, f64::max);
    Ok((m1, m2))
}

pub fn contraction_cert(ev: &FamilyEvaluator, l: f64, beta: f64) -> Result<ContractionCert> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Parameter(format!("β must lie in (0,1], got {beta}")));
    }
    let (m1, m2) = measure_family_constants(ev, beta)?;
    let a1 = contraction_bound(l, ev.gamma(), beta, m1, m2);
    Ok(ContractionCert { a1_bound: a1, m1, m2, l, gamma: ev.gamma(), beta, verdict: a1 < 1.0 })
}

/// Fixed point of `Υu = S_γ(·)x₀ + ∫ R_γ(· - s) f(s, u(s)) ds` by Picard
/// sweeps over the whole grid.
pub fn solve_semilinear_picard(
    ev: &FamilyEvaluator,
    x0: &DVector<f64>,
    f: &Forcing,
    grid: &Grid,
    opts: &PicardOptions,
) -> Result<(Trajectory, ContractionCert)> {
    check_inputs(ev, x0, f, grid)?;
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::Parameter("picard needs tol > 0 and max_iter ≥ 1".into()));
    }
    let cert = contraction_cert(ev, f.lipschitz(), opts.beta)?;
    let prep = Prepared::new(ev)?;
    let x0p = prep.pull(x0.clone());
    let mut warnings = Vec::new();
    if let Some(w) = continuity_warning(ev, &x0p, x0)? {
        warnings.push(w);
    }
    let hom = homogeneous(ev, &x0p, grid)?;
    let conv = Convolver::new(ev, grid.h(), grid.n)?;
    let mut u = match opts.start {
        PicardStart::Homogeneous => hom.clone(),
        PicardStart::Zero => vec![DVector::zeros(ev.dim()); grid.n + 1],
    };
    let mut distances = Vec::new();
    loop {
        let g: Vec<DVector<f64>> = u.iter().enumerate().map(|(k, uk)| prep.pull(f.eval_state(grid.t(k), uk))).collect();
        let y = conv.apply(ev, &g);
        let next: Vec<DVector<f64>> = hom.iter().zip(y).map(|(a, b)| a + b).collect();
        let dist = next.iter().zip(&u).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
        distances.push(dist);
        u = next;
        if dist < opts.tol {
            break;
        }
        if distances.len() >= opts.max_iter {
            return Err(Error::NoConvergence { iterations: distances.len(), last: dist, distances });
        }
    }
    let mut traj = Trajectory { grid: *grid, states: u, residuals: None, iterations: distances, warnings };
    traj.residuals = Some(residual_profile(ev, &traj, f)?);
    Ok((traj, cert))
}

/// Largest gap, over the requested nodes, between the trajectory and the
/// mild-solution right-hand side recomputed with an independent quadrature:
/// matrix-valued families on graded Gauss panels against the piecewise-linear
/// interpolant of `s ↦ C^{-1} f(s, u(s))`.
pub fn mild_equation_defect(
    ev: &FamilyEvaluator,
    x0: &DVector<f64>,
    f: &Forcing,
    traj: &Trajectory,
    nodes: &[usize],
) -> Result<f64> {
    let prep = Prepared::new(ev)?;
    let x0p = prep.pull(x0.clone());
    let h = traj.grid.h();
    let g_at = |k: usize| prep.pull(f.eval_state(traj.grid.t(k), &traj.states[k]));
    let gamma_ = ev.gamma();
    let mut worst = 0.0f64;
    for &n in nodes {
        if n == 0 || n > traj.grid.n {
            return Err(Error::Parameter(format!("node {n} outside 1..={}", traj.grid.n)));
        }
        let t = traj.grid.t(n);
        let mut rhs = ev.apply(Family::S, t, &x0p)?;
        // lag 0 in u = τ^γ on dyadic panels, later lags with GL-6 in τ
        let gl = GaussLegendre::cached(12);
        let (ga, gb) = (g_at(n), g_at(n - 1));
        let mut hi = h.powf(gamma_);
        for p in 0..16 {
            let lo = if p == 15 { 0.0 } else { 0.5 * hi };
            for (u, w) in gl.on(lo, hi) {
                let tau = u.powf(1.0 / gamma_);
                let th = tau / h;
                let fv = &ga * (1.0 - th) + &gb * th;
                rhs += ev.family_matrix(Family::P, tau)? * fv * (w / gamma_);
            }
            hi = lo;
        }
        let gl6 = GaussLegendre::cached(6);
        for k in 1..n {
            let (ga, gb) = (g_at(n - k), g_at(n - k - 1));
            for (th, w) in gl6.on(0.0, 1.0) {
                let fv = &ga * (1.0 - th) + &gb * th;
                rhs += ev.family_matrix(Family::R, (k as f64 + th) * h)? * fv * (w * h);
            }
        }
        worst = worst.max((rhs - &traj.states[n]).norm());
    }
    Ok(worst)
}

/// Spectral norm of the part of each state outside the range of the
/// spectral projection (the M-null component for pencils).
pub fn null_component_max(ev: &FamilyEvaluator, traj: &Trajectory) -> Result<f64> {
    let q = ev.op().range_projection().ok_or_else(|| Error::Parameter("no spectral projection available".into()))?;
    let n = ev.dim();
    let iq = DMatrix::identity(n, n) - q;
    Ok(traj.states.iter().skip(1).map(|u| (&iq * u).norm()).fold(0.0, f64::max))
}
