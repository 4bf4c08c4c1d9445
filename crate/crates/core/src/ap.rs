//! Almost-periodicity diagnostics for sampled signals: Stepanov norms,
//! ε-periods, trigonometric decomposition `f = g + φ`, verdicts, and the
//! empirical convolution and composition checks.
//!
//! Finite data can only support or falsify almost periodicity. Relative
//! density of ε-periods is judged against an inclusion length `l_max` tied
//! to the longest significant fitted period; a search window shorter than `l_max`
//! yields an inconclusive verdict.

use crate::error::{Error, Result};
use crate::mild::conv::CausalConv;
use crate::quad::GaussLegendre;
use crate::signal::Signal;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "AP")]
    Ap,
    #[serde(rename = "AAP")]
    Aap,
    #[serde(rename = "S^p-AP")]
    SpAp,
    #[serde(rename = "AAP-S^p")]
    AapSp,
    #[serde(rename = "none")]
    NotAp,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Verdict {
    /// Strength order; AAP and S^p-AP both sit inside AAP-S^p.
    pub fn rank(self) -> u8 {
        match self {
            Verdict::Ap => 4,
            Verdict::Aap => 3,
            Verdict::SpAp => 2,
            Verdict::AapSp => 1,
            Verdict::NotAp | Verdict::Inconclusive => 0,
        }
    }

    /// Whether the class is contained in the asymptotically Stepanov class.
    pub fn at_least_aap_sp(self) -> bool {
        self.rank() >= 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApConfig {
    /// ε levels as fractions of the oscillation scale `sup‖f - mean‖`.
    pub epsilon_rel: Vec<f64>,
    /// Working step; `1/dt` must be an integer (unit Stepanov windows).
    pub resample_dt: f64,
    /// τ candidates are every `tau_stride`-th grid shift.
    pub tau_stride: usize,
    pub tau_min: f64,
    /// `l_max = l_max_factor ×` the longest period among the significant
    /// fitted terms (amplitude ≥ 10% of the largest).
    pub l_max_factor: f64,
    /// Tail cut M as a fraction of the horizon.
    pub tail_cut_frac: f64,
    pub remainder_tol: f64,
    pub min_horizon: f64,
    pub stepanov_p: Vec<f64>,
    /// Exponent used for the Stepanov verdicts.
    pub p: f64,
    pub max_terms: usize,
    /// Initial frequency dictionary; otherwise seeded from the periodogram.
    pub seeds: Option<Vec<f64>>,
}

impl Default for ApConfig {
    fn default() -> Self {
        ApConfig {
            epsilon_rel: vec![0.5, 0.3],
            resample_dt: 1.0 / 64.0,
            tau_stride: 4,
            tau_min: 1.0,
            l_max_factor: 10.0,
            tail_cut_frac: 0.25,
            remainder_tol: 0.05,
            min_horizon: 20.0,
            stepanov_p: vec![1.0, 2.0, 4.0],
            p: 2.0,
            max_terms: 8,
            seeds: None,
        }
    }
}

impl ApConfig {
    pub fn validate(&self) -> Result<()> {
        let w = 1.0 / self.resample_dt;
        if !(self.resample_dt > 0.0) || (w - w.round()).abs() > 1e-9 {
            return Err(Error::Parameter("resample_dt must be 1/m for an integer m".into()));
        }
        if self.epsilon_rel.is_empty() || self.epsilon_rel.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Parameter("epsilon_rel needs positive entries".into()));
        }
        if self.tau_stride == 0 || !(self.l_max_factor > 0.0) || !(self.tau_min > 0.0) {
            return Err(Error::Parameter("tau_stride, tau_min and l_max_factor must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.tail_cut_frac) || !(self.remainder_tol > 0.0) {
            return Err(Error::Parameter("tail_cut_frac ∈ [0,1) and remainder_tol > 0 required".into()));
        }
        if self.p < 1.0 || self.stepanov_p.iter().any(|p| *p < 1.0) {
            return Err(Error::Parameter("Stepanov exponents must be ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTerm {
    pub frequency: f64,
    /// Euclidean norm of the (cos, sin) coefficient vectors.
    pub amplitude: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub fit_window: [f64; 2],
    pub mean: Vec<f64>,
    pub terms: Vec<FrequencyTerm>,
    /// `(t, sup_{s ≥ t} ‖φ(s)‖)`.
    pub remainder_profile: Vec<[f64; 2]>,
    pub remainder_sup: f64,
    /// Over the last quarter of the horizon.
    pub remainder_sup_tail: f64,
    pub rms: f64,
}

impl Decomposition {
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut v = self.mean.clone();
        for term in &self.terms {
            let (s, c) = (term.frequency * t).sin_cos();
            for (j, x) in v.iter_mut().enumerate() {
                *x += term.cos[j] * c + term.sin[j] * s;
            }
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Sup,
    /// Unit-window `L^p` distance of the Bochner curves.
    Stepanov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodSet {
    pub metric: Metric,
    pub epsilon: f64,
    pub tail_cut: f64,
    pub taus: Vec<f64>,
    /// Largest gap in `0, τ₁, …, τ_k, τ_max`; `None` when nothing was found.
    pub density_gap: Option<f64>,
    pub relatively_dense: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepanovNorm {
    pub p: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerdictFlags {
    pub ap: bool,
    pub aap: bool,
    pub sp_ap: bool,
    pub aap_sp: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct APReport {
    pub epsilon_levels: Vec<f64>,
    /// Sup metric, `M = 0`.
    pub period_sets: Vec<PeriodSet>,
    /// Sup metric with the tail cut, then Stepanov metric with `M = 0` and with the cut.
    pub tail_period_sets: Vec<PeriodSet>,
    pub stepanov_period_sets: Vec<PeriodSet>,
    pub stepanov_tail_period_sets: Vec<PeriodSet>,
    pub density_gap: Option<f64>,
    pub l_max: f64,
    pub tau_max: f64,
    pub p: f64,
    pub stepanov_norms: Vec<StepanovNorm>,
    pub decomposition: Option<Decomposition>,
    pub flags: VerdictFlags,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

fn vnorm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `∫_a^b ‖f‖^p` of the piecewise-linear interpolant, trapezoid on samples.
fn window_lp(f: &Signal, a: f64, b: f64, p: f64) -> f64 {
    let g = |t: f64| vnorm(&f.eval(t)).powf(p);
    let i0 = ((a - f.t0) / f.dt).ceil() as i64;
    let i1 = ((b - f.t0) / f.dt).floor() as i64;
    let mut nodes = vec![(a, g(a))];
    for i in i0.max(0)..=i1.min(f.len() as i64 - 1) {
        let t = f.t(i as usize);
        if t > a && t < b {
            nodes.push((t, vnorm(f.value(i as usize)).powf(p)));
        }
    }
    nodes.push((b, g(b)));
    nodes.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
}

/// `max_{t ∈ t_grid} (∫_t^{t+1} ‖f‖^p)^{1/p}`.
pub fn stepanov_norm(f: &Signal, p: f64, t_grid: &[f64]) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!("Stepanov exponent must be ≥ 1, got {p}")));
    }
    if t_grid.is_empty() || f.len() < 2 {
        return Err(Error::EmptyWindow);
    }
    let slack = 1e-9 * f.dt;
    let (lo, hi) = (f.t0, f.t_end());
    let mut best = 0.0f64;
    for &t in t_grid {
        if t < lo - slack || t + 1.0 > hi + slack {
            return Err(Error::WindowExceedsDomain { start: t, end: t + 1.0, lo, hi });
        }
        best = best.max(window_lp(f, t, t + 1.0, p).powf(1.0 / p));
    }
    Ok(best)
}

/// Per shift `k·dt`: sup and Stepanov distances over `t ≥ t0 + cut·dt`, for
/// each cut in `cuts`. Stepanov entries are `NaN` when `p` is `None`.
fn shift_distances(f: &Signal, shifts: &[usize], cuts: &[usize], p: Option<f64>) -> Vec<Vec<[f64; 2]>> {
    let n = f.len();
    let d = f.dim;
    let w = (1.0 / f.dt).round() as usize;
    shifts
        .par_iter()
        .map(|&k| {
            let m = n - k;
            let diff: Vec<f64> = (0..m)
                .map(|i| {
                    let a = &f.data[i * d..(i + 1) * d];
                    let b = &f.data[(i + k) * d..(i + k + 1) * d];
                    a.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum::<f64>().sqrt()
                })
                .collect();
            // suffix maxima give every cut at once
            let mut suffix = vec![0.0f64; m + 1];
            for i in (0..m).rev() {
                suffix[i] = suffix[i + 1].max(diff[i]);
            }
            let step = p.filter(|_| m > w).map(|p| {
                let pw: Vec<f64> = diff.iter().map(|x| x.powf(p)).collect();
                let mut pre = vec![0.0; m + 1];
                for i in 0..m {
                    pre[i + 1] = pre[i] + pw[i];
                }
                let nw = m - w;
                let mut win: Vec<f64> =
                    (0..nw).map(|i| f.dt * (pre[i + w + 1] - pre[i] - 0.5 * (pw[i] + pw[i + w]))).collect();
                for i in (0..nw.saturating_sub(1)).rev() {
                    win[i] = win[i].max(win[i + 1]);
                }
                (win, p)
            });
            cuts.iter()
                .map(|&c| {
                    let s = if c < m { suffix[c] } else { f64::NAN };
                    let st = match &step {
                        Some((win, p)) if c < win.len() => win[c].max(0.0).powf(1.0 / p),
                        _ => f64::NAN,
                    };
                    [s, st]
                })
                .collect()
        })
        .collect()
}

/// Every grid shift τ in `window` with `sup_{t ≥ M, t+τ ≤ T} ‖f(t+τ) - f(t)‖ ≤ ε`
/// (times relative to the signal start).
pub fn epsilon_periods(f: &Signal, eps: f64, window: [f64; 2], tail_cut: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0) || !(tail_cut >= 0.0) {
        return Err(Error::Parameter("ε-periods need ε > 0 and M ≥ 0".into()));
    }
    let k0 = (window[0] / f.dt).ceil().max(1.0) as usize;
    let k1 = ((window[1] / f.dt).floor() as usize).min(f.len().saturating_sub(2));
    if !(window[1] > window[0]) || k0 > k1 {
        return Err(Error::EmptyWindow);
    }
    let shifts: Vec<usize> = (k0..=k1).collect();
    let cut = (tail_cut / f.dt).ceil() as usize;
    let dist = shift_distances(f, &shifts, &[cut], None);
    Ok(shifts.iter().zip(dist).filter(|(_, d)| d[0][0] <= eps).map(|(k, _)| *k as f64 * f.dt).collect())
}

fn density_gap(taus: &[f64], tau_max: f64) -> Option<f64> {
    if taus.is_empty() {
        return None;
    }
    let mut prev = 0.0;
    let mut gap = 0.0f64;
    for &t in taus.iter().chain(std::iter::once(&tau_max)) {
        gap = gap.max(t - prev);
        prev = t;
    }
    Some(gap)
}

/// Least squares for `mean + Σ a_k cos ω_k t + b_k sin ω_k t` with the time
/// origin at `tc`; returns coefficients `(1 + 2K) × d` and the residual sum of squares.
fn ls_fit(ts: &[f64], ys: &DMatrix<f64>, omegas: &[f64], tc: f64) -> Option<(DMatrix<f64>, f64)> {
    let phi = design(ts, omegas, tc);
    let ata = phi.tr_mul(&phi);
    let aty = phi.tr_mul(ys);
    let coef = match ata.clone().cholesky() {
        Some(ch) => ch.solve(&aty),
        None => ata.svd(true, true).solve(&aty, 1e-12).ok()?,
    };
    let res = ys - &phi * &coef;
    Some((coef, res.norm_squared()))
}

/// Power spectrum (summed over components) of the mean-free, Hann-windowed
/// rows, zero-padded eightfold; returns `(ω, amplitude estimate)` of the peak.
fn periodogram_peak(ys: &DMatrix<f64>, dt: f64) -> Option<(f64, f64)> {
    let n = ys.nrows();
    if n < 8 {
        return None;
    }
    let size = (8 * n).next_power_of_two();
    let fft = FftPlanner::new().plan_fft_forward(size);
    let hann: Vec<f64> = (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos()).collect();
    let wsum: f64 = hann.iter().sum();
    let mut power = vec![0.0; size / 2];
    for c in 0..ys.ncols() {
        let col = ys.column(c);
        let mean = col.mean();
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        for i in 0..n {
            buf[i].re = (col[i] - mean) * hann[i];
        }
        fft.process(&mut buf);
        for (pw, z) in power.iter_mut().zip(&buf) {
            *pw += z.norm_sqr();
        }
    }
    // skip the DC lobe
    let lo = 2 * size / n;
    let (k, &pk) = power.iter().enumerate().skip(lo).max_by(|a, b| a.1.total_cmp(b.1))?;
    if pk <= 0.0 || k + 1 >= power.len() {
        return None;
    }
    let (a, b, c) = (power[k - 1].max(1e-300).ln(), pk.ln(), power[k + 1].max(1e-300).ln());
    let den = a - 2.0 * b + c;
    let shift = if den < 0.0 { (0.5 * (a - c) / den).clamp(-0.5, 0.5) } else { 0.0 };
    let omega = 2.0 * PI * (k as f64 + shift) / (size as f64 * dt);
    Some((omega, 2.0 * pk.sqrt() / wsum))
}

/// Frequency refinement by parabolic steps on the residual sum of squares,
/// one coordinate at a time.
fn refine(ts: &[f64], ys: &DMatrix<f64>, omegas: &mut [f64], tc: f64, res: f64) {
    let sse = |w: &[f64]| ls_fit(ts, ys, w, tc).map(|x| x.1).unwrap_or(f64::INFINITY);
    let mut delta = 0.05 * res;
    let mut cur = sse(omegas);
    for _ in 0..80 {
        let mut moved = 0.0f64;
        for k in 0..omegas.len() {
            let w0 = omegas[k];
            omegas[k] = w0 - delta;
            let jm = sse(omegas);
            omegas[k] = w0 + delta;
            let jp = sse(omegas);
            let den = jp - 2.0 * cur + jm;
            let step = if den > 0.0 {
                (0.5 * delta * (jm - jp) / den).clamp(-2.0 * delta, 2.0 * delta)
            } else if jm < jp {
                -delta
            } else {
                delta
            };
            omegas[k] = w0 + step;
            let jn = sse(omegas);
            if jn < cur {
                cur = jn;
                moved = moved.max(step.abs());
            } else {
                omegas[k] = w0;
            }
        }
        if moved == 0.0 {
            // the parabola over ±δ is too coarse this close to the minimum
            delta *= 0.1;
            if delta < 1e-13 {
                break;
            }
        } else if moved < 1e-12 {
            break;
        } else {
            delta = (4.0 * moved).clamp(1e-11, 0.05 * res);
        }
    }
}

/// Fits the trigonometric part on `window` (absolute times) of a uniformly
/// sampled signal and evaluates the remainder over the whole signal.
pub fn fit_ap_part(f: &Signal, window: [f64; 2], seeds: Option<&[f64]>, max_terms: usize) -> Result<Decomposition> {
    let i0 = (((window[0] - f.t0) / f.dt).ceil().max(0.0)) as usize;
    let i1 = (((window[1] - f.t0) / f.dt).floor() as usize).min(f.len() - 1);
    if i1 < i0 + 16 {
        return Err(Error::EmptyWindow);
    }
    // every fourth sample is plenty for frequencies well below Nyquist
    let dec = if f.dt <= 1.0 / 32.0 { 4 } else { 1 };
    let idx: Vec<usize> = (i0..=i1).step_by(dec).collect();
    let ts: Vec<f64> = idx.iter().map(|&i| f.t(i)).collect();
    let ys = DMatrix::from_fn(idx.len(), f.dim, |r, c| f.value(idx[r])[c]);
    let tc = 0.5 * (ts[0] + ts[ts.len() - 1]);
    let span = ts[ts.len() - 1] - ts[0];
    let res = 2.0 * PI / span;
    let scale = (0..f.dim)
        .map(|c| {
            let col = ys.column(c);
            let m = col.mean();
            col.iter().map(|x| (x - m).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let floor = 1e-3 * scale.max(1e-12);

    let mut omegas: Vec<f64> =
        seeds.map(|s| s.iter().map(|w| w.abs()).filter(|w| *w > 0.0).collect()).unwrap_or_default();
    if !omegas.is_empty() {
        refine(&ts, &ys, &mut omegas, tc, res);
    }
    while omegas.len() < max_terms {
        let (coef, _) = ls_fit(&ts, &ys, &omegas, tc).ok_or_else(|| Error::DegenerateFit("singular design".into()))?;
        let resid = &ys - design(&ts, &omegas, tc) * &coef;
        let Some((w, amp)) = periodogram_peak(&resid, f.dt * dec as f64) else { break };
        if amp < floor || omegas.iter().any(|o| (o - w).abs() < 0.5 * res) {
            break;
        }
        omegas.push(w);
        refine(&ts, &ys, &mut omegas, tc, res);
    }
    let (coef, sse) = ls_fit(&ts, &ys, &omegas, tc).ok_or_else(|| Error::DegenerateFit("singular design".into()))?;
    let mean: Vec<f64> = coef.row(0).iter().copied().collect();
    let mut terms: Vec<FrequencyTerm> = omegas
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            // move the time origin from tc back to 0
            let (s, c) = (w * tc).sin_cos();
            let a: Vec<f64> = coef.row(1 + 2 * k).iter().copied().collect();
            let b: Vec<f64> = coef.row(2 + 2 * k).iter().copied().collect();
            let cos: Vec<f64> = a.iter().zip(&b).map(|(a, b)| a * c - b * s).collect();
            let sin: Vec<f64> = a.iter().zip(&b).map(|(a, b)| a * s + b * c).collect();
            let amplitude = (vnorm(&cos).powi(2) + vnorm(&sin).powi(2)).sqrt();
            FrequencyTerm { frequency: w, amplitude, cos, sin }
        })
        .filter(|t| t.amplitude >= floor)
        .collect();
    terms.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude));
    let mut dc = Decomposition {
        fit_window: [ts[0], ts[ts.len() - 1]],
        mean,
        terms,
        remainder_profile: Vec::new(),
        remainder_sup: 0.0,
        remainder_sup_tail: 0.0,
        rms: (sse / (ts.len() * f.dim) as f64).sqrt(),
    };
    let n = f.len();
    let rem: Vec<f64> = (0..n)
        .map(|i| {
            let g = dc.eval(f.t(i));
            f.value(i).iter().zip(&g).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        })
        .collect();
    let mut suffix = rem.clone();
    for i in (0..n - 1).rev() {
        suffix[i] = suffix[i].max(suffix[i + 1]);
    }
    dc.remainder_sup = suffix[0];
    dc.remainder_sup_tail = suffix[(3 * (n - 1)) / 4];
    dc.remainder_profile = (0..=32)
        .map(|j| {
            let i = j * (n - 1) / 32;
            [f.t(i), suffix[i]]
        })
        .collect();
    Ok(dc)
}

fn design(ts: &[f64], omegas: &[f64], tc: f64) -> DMatrix<f64> {
    DMatrix::from_fn(ts.len(), 1 + 2 * omegas.len(), |i, j| {
        if j == 0 {
            1.0
        } else {
            let w = omegas[(j - 1) / 2] * (ts[i] - tc);
            if j % 2 == 1 {
                w.cos()
            } else {
                w.sin()
            }
        }
    })
}

/// Decision tree: AP if sup-metric ε-periods are relatively dense from
/// `t = 0` and the trigonometric fit explains the whole signal; AAP if they
/// are dense past the tail cut and the remainder has decayed below
/// `remainder_tol`; the Stepanov classes use the unit-window `L^p` metric of
/// the Bochner curves in place of the sup metric.
pub fn classify(f: &Signal, cfg: &ApConfig) -> Result<APReport> {
    cfg.validate()?;
    if f.len() < 2 {
        return Err(Error::EmptyWindow);
    }
    let sig = f.resample(cfg.resample_dt);
    let horizon = sig.t_end() - sig.t0;
    let mut notes = Vec::new();
    let mut report = APReport {
        epsilon_levels: Vec::new(),
        period_sets: Vec::new(),
        tail_period_sets: Vec::new(),
        stepanov_period_sets: Vec::new(),
        stepanov_tail_period_sets: Vec::new(),
        density_gap: None,
        l_max: f64::NAN,
        tau_max: 0.5 * horizon,
        p: cfg.p,
        stepanov_norms: Vec::new(),
        decomposition: None,
        flags: VerdictFlags::default(),
        verdict: Verdict::Inconclusive,
        notes: Vec::new(),
    };
    if horizon < cfg.min_horizon {
        report.notes.push(format!("horizon {horizon} below min_horizon {}", cfg.min_horizon));
        return Ok(report);
    }
    if sig.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("signal has non-finite samples".into()));
    }

    let t_grid: Vec<f64> =
        (0..sig.len()).step_by(16).map(|i| sig.t(i)).filter(|t| t + 1.0 <= sig.t_end() + 1e-12).collect();
    for &p in &cfg.stepanov_p {
        report.stepanov_norms.push(StepanovNorm { p, value: stepanov_norm(&sig, p, &t_grid)? });
    }

    let dc = fit_ap_part(&sig, [sig.t0 + 0.5 * horizon, sig.t_end()], cfg.seeds.as_deref(), cfg.max_terms)?;
    let scale = (0..sig.len())
        .skip(sig.len() / 2)
        .map(|i| sig.value(i).iter().zip(&dc.mean).map(|(x, m)| (x - m) * (x - m)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let full_scale = (0..sig.len())
        .map(|i| sig.value(i).iter().zip(&dc.mean).map(|(x, m)| (x - m) * (x - m)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    // longest period among terms within a factor 10 of the largest
    let top = dc.terms.first().map_or(0.0, |t| t.amplitude);
    let l_max = dc
        .terms
        .iter()
        .filter(|t| t.amplitude >= 0.1 * top)
        .map(|t| cfg.l_max_factor * 2.0 * PI / t.frequency)
        .reduce(f64::max)
        .unwrap_or(0.25 * horizon);
    report.l_max = l_max;
    let tau_max = report.tau_max;

    if full_scale <= 1e-12 * (1.0 + vnorm(&dc.mean)) {
        // constant signal: every τ is a period
        notes.push("constant signal".into());
        report.flags = VerdictFlags { ap: true, aap: true, sp_ap: true, aap_sp: true };
        report.verdict = Verdict::Ap;
        report.density_gap = Some(0.0);
        report.decomposition = Some(dc);
        report.notes = notes;
        return Ok(report);
    }
    let eps_scale = if scale > 0.0 { scale } else { full_scale };
    report.epsilon_levels = cfg.epsilon_rel.iter().map(|e| e * eps_scale).collect();

    let k0 = (cfg.tau_min / sig.dt).ceil() as usize;
    let k1 = (tau_max / sig.dt).floor() as usize;
    let shifts: Vec<usize> = (k0..=k1).filter(|k| k % cfg.tau_stride == 0).collect();
    if shifts.is_empty() {
        report.notes.push("empty τ window".into());
        return Ok(report);
    }
    let cut = ((cfg.tail_cut_frac * horizon) / sig.dt).round() as usize;
    let dist = shift_distances(&sig, &shifts, &[0, cut], Some(cfg.p));
    let taus: Vec<f64> = shifts.iter().map(|k| *k as f64 * sig.dt).collect();
    let make = |eps: f64, which: usize, metric: usize, m: f64| {
        let found: Vec<f64> =
            taus.iter().zip(&dist).filter(|(_, d)| d[which][metric] <= eps).map(|(t, _)| *t).collect();
        let gap = density_gap(&found, tau_max);
        PeriodSet {
            metric: if metric == 0 { Metric::Sup } else { Metric::Stepanov },
            epsilon: eps,
            tail_cut: m,
            relatively_dense: gap.is_some_and(|g| g <= l_max),
            density_gap: gap,
            taus: found,
        }
    };
    let m_abs = cut as f64 * sig.dt;
    for &eps in &report.epsilon_levels.clone() {
        report.period_sets.push(make(eps, 0, 0, 0.0));
        report.tail_period_sets.push(make(eps, 1, 0, m_abs));
        report.stepanov_period_sets.push(make(eps, 0, 1, 0.0));
        report.stepanov_tail_period_sets.push(make(eps, 1, 1, m_abs));
    }
    report.density_gap = report
        .period_sets
        .iter()
        .map(|s| s.density_gap.unwrap_or(f64::INFINITY))
        .reduce(f64::max)
        .filter(|g| g.is_finite());
    let all = |sets: &[PeriodSet]| sets.iter().all(|s| s.relatively_dense);

    let decays = dc.remainder_sup_tail <= cfg.remainder_tol;
    let mut flags = VerdictFlags {
        ap: all(&report.period_sets) && dc.remainder_sup <= cfg.remainder_tol,
        aap: all(&report.tail_period_sets) && decays,
        sp_ap: all(&report.stepanov_period_sets),
        aap_sp: all(&report.stepanov_tail_period_sets),
    };
    // class inclusions
    flags.aap |= flags.ap;
    flags.sp_ap |= flags.ap;
    flags.aap_sp |= flags.sp_ap || flags.aap;
    report.flags = flags;
    report.verdict = if tau_max < l_max {
        notes.push(format!("τ window {tau_max} shorter than l_max {l_max}"));
        Verdict::Inconclusive
    } else if flags.ap {
        Verdict::Ap
    } else if flags.aap {
        Verdict::Aap
    } else if flags.sp_ap {
        Verdict::SpAp
    } else if flags.aap_sp {
        Verdict::AapSp
    } else {
        Verdict::NotAp
    };
    report.decomposition = Some(dc);
    report.notes = notes;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvolutionConfig {
    /// Exponent q of the block norms `‖R‖_{L^q[k,k+1]}`.
    pub q: f64,
    /// Largest truncation depth for the history integral.
    pub max_history: f64,
    /// Relative size of the neglected block-norm tail that stops the history early.
    pub tail_tol: f64,
}

impl Default for ConvolutionConfig {
    fn default() -> Self {
        ConvolutionConfig { q: 1.0, max_history: 100.0, tail_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionCheck {
    pub block_norms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Estimated `Σ_{k ≥ H} ‖R‖_{L^q[k,k+1]}`.
    pub tail_estimate: f64,
    pub history: f64,
    pub g: Signal,
    pub report: APReport,
}

/// `(∫_0^1 |R|^q)^{1/q}` on dyadic panels towards the weak singularity at 0.
fn first_block(r: &(dyn Fn(f64) -> f64 + Sync), q: f64) -> Result<f64> {
    let gl = GaussLegendre::cached(16);
    let mut acc = 0.0;
    let mut hi = 1.0f64;
    for _ in 0..400 {
        let lo = 0.5 * hi;
        let part = gl.integrate(lo, hi, |t| r(t).abs().powf(q));
        acc += part;
        if !acc.is_finite() {
            break;
        }
        if part <= 1e-15 * acc || acc == 0.0 && hi < 1e-30 {
            return Ok(acc.powf(1.0 / q));
        }
        hi = lo;
    }
    Err(Error::Summability { partial: vec![acc] })
}

/// `G(t) = ∫_0^H R(τ) f(t - τ) dτ` by product integration against the linear
/// interpolant of `f`, after certifying `Σ_k ‖R‖_{L^q[k,k+1]} < ∞`, then
/// classified. `G` covers `[t0 + H, t_end]` of the input.
pub fn convolution_ap_check(
    kernel: &(dyn Fn(f64) -> f64 + Sync),
    f: &Signal,
    cfg: &ConvolutionConfig,
    ap: &ApConfig,
) -> Result<ConvolutionCheck> {
    if !(cfg.q >= 1.0) || !(cfg.max_history >= 2.0) || !(cfg.tail_tol > 0.0) {
        return Err(Error::Parameter("convolution check needs q ≥ 1, max_history ≥ 2, tail_tol > 0".into()));
    }
    let kmax = cfg.max_history.floor() as usize;
    let gl = GaussLegendre::cached(16);
    let mut blocks = vec![first_block(kernel, cfg.q)?];
    blocks.extend(
        (1..kmax)
            .into_par_iter()
            .map(|k| gl.integrate(k as f64, k as f64 + 1.0, |t| kernel(t).abs().powf(cfg.q)).powf(1.0 / cfg.q))
            .collect::<Vec<_>>(),
    );
    let partial: Vec<f64> = blocks
        .iter()
        .scan(0.0, |s, b| {
            *s += b;
            Some(*s)
        })
        .collect();
    if blocks.iter().any(|b| !b.is_finite()) {
        return Err(Error::Summability { partial });
    }
    // power-law fit of the second half decides the tail beyond kmax
    let half: Vec<(f64, f64)> =
        (kmax / 2..kmax).filter(|&k| blocks[k] > 1e-300).map(|k| ((k as f64 + 0.5).ln(), blocks[k].ln())).collect();
    let beyond = if half.len() < 4 {
        0.0
    } else {
        let n = half.len() as f64;
        let (sx, sy) = half.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let sxx: f64 = half.iter().map(|p| (p.0 - sx / n).powi(2)).sum();
        let sxy: f64 = half.iter().map(|p| (p.0 - sx / n) * (p.1 - sy / n)).sum();
        let s = sxy / sxx;
        if !(s < -1.0) {
            return Err(Error::Summability { partial });
        }
        blocks[kmax - 1] * kmax as f64 / (-s - 1.0)
    };
    let total = partial[kmax - 1] + beyond;
    // smallest depth whose neglected tail is below tail_tol
    let mut suffix = vec![beyond; kmax + 1];
    for k in (0..kmax).rev() {
        suffix[k] = suffix[k + 1] + blocks[k];
    }
    let h = (2..=kmax).find(|&k| suffix[k] <= cfg.tail_tol * total).unwrap_or(kmax);
    let tail_estimate = suffix[h];

    let dt = f.dt;
    let lags = (h as f64 / dt).round() as usize;
    let n = f.len();
    if n <= lags + 1 {
        return Err(Error::WindowExceedsDomain { start: f.t0, end: f.t0 + h as f64, lo: f.t0, hi: f.t_end() });
    }
    // weights of f(t - k dt) and f(t - (k+1) dt) for lag k
    let gl8 = GaussLegendre::cached(8);
    let weights: Vec<(f64, f64)> = (0..lags)
        .into_par_iter()
        .map(|k| {
            let mut near = 0.0;
            let mut far = 0.0;
            let mut add = |a: f64, b: f64| {
                for (s, w) in gl8.on(a, b) {
                    let th = s / dt - k as f64;
                    let r = kernel(s) * w;
                    near += r * (1.0 - th);
                    far += r * th;
                }
            };
            if k == 0 {
                let mut hi = dt;
                for _ in 0..120 {
                    add(0.5 * hi, hi);
                    hi *= 0.5;
                }
            } else {
                add(k as f64 * dt, (k + 1) as f64 * dt);
            }
            (near, far)
        })
        .collect();
    let kern: Vec<f64> = (0..=lags)
        .map(|m| if m < lags { weights[m].0 } else { 0.0 } + if m > 0 { weights[m - 1].1 } else { 0.0 })
        .collect();
    let conv = CausalConv::new(kern, n);
    let mut out = vec![0.0; (n - lags) * f.dim];
    for c in 0..f.dim {
        let x: Vec<f64> = (0..n).map(|i| f.value(i)[c]).collect();
        let y = conv.apply(&x, n);
        for i in lags..n {
            out[(i - lags) * f.dim + c] = y[i];
        }
    }
    let g = Signal::new(f.t(lags), dt, f.dim, out)?;
    let report = classify(&g, ap)?;
    Ok(ConvolutionCheck { block_norms: blocks, partial_sums: partial, tail_estimate, history: h as f64, g, report })
}

pub type Field = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub enum LipschitzData {
    Constant(f64),
    /// `L_g(t)`, with a label for reports.
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>, String),
}

impl std::fmt::Debug for LipschitzData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LipschitzData::Constant(l) => write!(f, "Constant({l})"),
            LipschitzData::Function(_, s) => write!(f, "Function({s})"),
        }
    }
}

impl LipschitzData {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            LipschitzData::Constant(l) => *l,
            LipschitzData::Function(g, _) => g(t),
        }
    }
}

/// `F(t, y) = base(t, y) + q(t, y)`, where `q` is the part whose sup over
/// bounded `y` vanishes as `t → ∞`.
#[derive(Clone)]
pub struct TwoParamForcing {
    pub base: Field,
    pub lipschitz: LipschitzData,
    pub decay_part: Option<Field>,
}

impl TwoParamForcing {
    pub fn new(base: Field, lipschitz: LipschitzData) -> Self {
        TwoParamForcing { base, lipschitz, decay_part: None }
    }

    pub fn with_decay(mut self, q: Field) -> Self {
        self.decay_part = Some(q);
        self
    }

    pub fn eval(&self, t: f64, y: &[f64]) -> Vec<f64> {
        let mut v = (self.base)(t, y);
        if let Some(q) = &self.decay_part {
            for (a, b) in v.iter_mut().zip(q(t, y)) {
                *a += b;
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionCheck {
    /// `q = pr/(p + r)`.
    pub q: f64,
    pub composed: Signal,
    pub report: APReport,
    pub meets_expectation: bool,
}

/// Classifies `t ↦ F(t, x(t))` with the Stepanov verdicts taken at
/// `q = pr/(p+r)`. The declared Lipschitz data are spot-checked on pairs of
/// sampled states.
pub fn composition_check(
    big_f: &TwoParamForcing,
    x: &Signal,
    p: f64,
    r: f64,
    cfg: &ApConfig,
) -> Result<CompositionCheck> {
    if !(p > 1.0) || !(r >= p.max(p / (p - 1.0))) {
        return Err(Error::Parameter(format!("need p > 1 and r ≥ max(p, p/(p-1)); got p = {p}, r = {r}")));
    }
    let q = if r.is_infinite() { p } else { p * r / (p + r) };
    let n = x.len();
    let stride = (n / 64).max(1);
    for i in (0..n).step_by(stride) {
        let t = x.t(i);
        let y1 = x.value(i);
        let j = (i + n / 3 + 1) % n;
        let y2 = x.value(j);
        let dy = y1.iter().zip(y2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let df = big_f.eval(t, y1).iter().zip(big_f.eval(t, y2)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if df > big_f.lipschitz.at(t) * dy * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::Parameter(format!("declared Lipschitz data violated at t = {t}: {df} > L·{dy}")));
        }
    }
    let composed = x.map(|t, y| big_f.eval(t, y));
    let mut cfg = cfg.clone();
    cfg.p = q;
    if !cfg.stepanov_p.contains(&q) {
        cfg.stepanov_p.push(q);
    }
    let report = classify(&composed, &cfg)?;
    let meets_expectation = report.verdict.at_least_aap_sp();
    Ok(CompositionCheck { q, composed, report, meets_expectation })
}

#[cfg(test)]
mod tests;
