//! Symbolic forcings and uniformly sampled signals.

use crate::error::{Error, Result};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SineTerm {
    pub amp: f64,
    pub omega: f64,
    #[serde(default)]
    pub phase: f64,
    /// Spatial profile; all ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpTerm {
    pub amp: f64,
    pub rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstTerm {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<f64>>,
}

/// Piecewise-linear table, held constant outside its range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table {
    pub t: Vec<f64>,
    /// One row per time, one column per component.
    pub values: Vec<Vec<f64>>,
}

/// How the Lipschitz constant of a coupling varies in time:
/// `L(t) = l` or `L(t) = l e^{-rate t}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Modulus {
    #[default]
    Constant,
    Decaying {
        rate: f64,
    },
}

pub type CouplingFn = Arc<dyn Fn(f64, &DVector<f64>) -> DVector<f64> + Send + Sync>;

/// State coupling `g(t, u)` added to the forcing.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Coupling {
    /// `L(t) sin(u)` componentwise.
    Sin {
        l: f64,
        #[serde(default)]
        modulus: Modulus,
    },
    /// `L(t) u`.
    Linear {
        l: f64,
        #[serde(default)]
        modulus: Modulus,
    },
    /// Arbitrary map with a declared Lipschitz constant.
    #[serde(skip)]
    Custom { f: CouplingFn, l: f64 },
}

impl fmt::Debug for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coupling::Sin { l, modulus } => write!(f, "Sin {{ l: {l}, modulus: {modulus:?} }}"),
            Coupling::Linear { l, modulus } => write!(f, "Linear {{ l: {l}, modulus: {modulus:?} }}"),
            Coupling::Custom { l, .. } => write!(f, "Custom {{ l: {l} }}"),
        }
    }
}

impl Coupling {
    pub fn lipschitz(&self) -> f64 {
        match self {
            Coupling::Sin { l, .. } | Coupling::Linear { l, .. } | Coupling::Custom { l, .. } => *l,
        }
    }

    pub fn lipschitz_at(&self, t: f64) -> f64 {
        match self {
            Coupling::Sin { l, modulus } | Coupling::Linear { l, modulus } => match modulus {
                Modulus::Constant => *l,
                Modulus::Decaying { rate } => l * (-rate * t).exp(),
            },
            Coupling::Custom { l, .. } => *l,
        }
    }

    pub fn eval(&self, t: f64, u: &DVector<f64>) -> DVector<f64> {
        match self {
            Coupling::Sin { .. } => u.map(f64::sin) * self.lipschitz_at(t),
            Coupling::Linear { .. } => u * self.lipschitz_at(t),
            Coupling::Custom { f, .. } => f(t, u),
        }
    }
}

/// `f(t, u) = Σ aᵢ sin(ωᵢ t + φᵢ) pᵢ + Σ bⱼ e^{-cⱼ t} qⱼ + Σ c pₖ + table(t) + g(t, u)`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Forcing {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sines: Vec<SineTerm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exps: Vec<ExpTerm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constants: Vec<ConstTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Coupling>,
}

fn add_profile(out: &mut DVector<f64>, c: f64, profile: &Option<Vec<f64>>) {
    match profile {
        Some(p) => {
            for (o, v) in out.iter_mut().zip(p) {
                *o += c * v;
            }
        }
        None => out.add_scalar_mut(c),
    }
}

impl Forcing {
    pub fn zero() -> Self {
        Forcing::default()
    }

    pub fn constant(c: f64) -> Self {
        Forcing { constants: vec![ConstTerm { value: c, profile: None }], ..Default::default() }
    }

    pub fn sine(amp: f64, omega: f64, phase: f64) -> Self {
        Forcing { sines: vec![SineTerm { amp, omega, phase, profile: None }], ..Default::default() }
    }

    pub fn with_sine(mut self, amp: f64, omega: f64, phase: f64) -> Self {
        self.sines.push(SineTerm { amp, omega, phase, profile: None });
        self
    }

    pub fn with_exp(mut self, amp: f64, rate: f64) -> Self {
        self.exps.push(ExpTerm { amp, rate, profile: None });
        self
    }

    pub fn with_constant(mut self, value: f64) -> Self {
        self.constants.push(ConstTerm { value, profile: None });
        self
    }

    pub fn with_coupling(mut self, c: Coupling) -> Self {
        self.coupling = Some(c);
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let check_profile = |p: &Option<Vec<f64>>, what: &str| -> Result<()> {
            if let Some(p) = p {
                if p.len() != dim {
                    return Err(Error::Parameter(format!("{what} profile has length {} != dim {dim}", p.len())));
                }
            }
            Ok(())
        };
        for s in &self.sines {
            if !s.omega.is_finite() || !s.amp.is_finite() {
                return Err(Error::Parameter("sine terms need finite amplitude and frequency".into()));
            }
            check_profile(&s.profile, "sine")?;
        }
        for e in &self.exps {
            if !(e.rate > 0.0) {
                return Err(Error::Parameter(format!("exponential rate must be positive, got {}", e.rate)));
            }
            check_profile(&e.profile, "exponential")?;
        }
        for c in &self.constants {
            check_profile(&c.profile, "constant")?;
        }
        if let Some(tab) = &self.table {
            if tab.t.len() < 2 || tab.t.len() != tab.values.len() || tab.t.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Parameter("table needs ≥ 2 strictly increasing times, one row each".into()));
            }
            if tab.values.iter().any(|r| r.len() != dim) {
                return Err(Error::Parameter(format!("table rows must have {dim} entries")));
            }
        }
        if let Some(c) = &self.coupling {
            if !(c.lipschitz() >= 0.0) {
                return Err(Error::Parameter("declared Lipschitz constant must be ≥ 0".into()));
            }
            if let Coupling::Sin { modulus: Modulus::Decaying { rate }, .. }
            | Coupling::Linear { modulus: Modulus::Decaying { rate }, .. } = c
            {
                if !(*rate >= 0.0) {
                    return Err(Error::Parameter("modulus rate must be ≥ 0".into()));
                }
            }
        }
        Ok(())
    }

    pub fn is_state_free(&self) -> bool {
        self.coupling.is_none()
    }

    pub fn lipschitz(&self) -> f64 {
        self.coupling.as_ref().map_or(0.0, |c| c.lipschitz())
    }

    /// State-free part.
    pub fn eval(&self, t: f64, dim: usize) -> DVector<f64> {
        let mut out = DVector::zeros(dim);
        for s in &self.sines {
            add_profile(&mut out, s.amp * (s.omega * t + s.phase).sin(), &s.profile);
        }
        for e in &self.exps {
            add_profile(&mut out, e.amp * (-e.rate * t).exp(), &e.profile);
        }
        for c in &self.constants {
            add_profile(&mut out, c.value, &c.profile);
        }
        if let Some(tab) = &self.table {
            let k = tab.t.partition_point(|&x| x <= t);
            if k == 0 {
                out += DVector::from_column_slice(&tab.values[0]);
            } else if k == tab.t.len() {
                out += DVector::from_column_slice(&tab.values[k - 1]);
            } else {
                let th = (t - tab.t[k - 1]) / (tab.t[k] - tab.t[k - 1]);
                for i in 0..dim {
                    out[i] += (1.0 - th) * tab.values[k - 1][i] + th * tab.values[k][i];
                }
            }
        }
        out
    }

    pub fn eval_state(&self, t: f64, u: &DVector<f64>) -> DVector<f64> {
        let mut out = self.eval(t, u.len());
        if let Some(c) = &self.coupling {
            out += c.eval(t, u);
        }
        out
    }

    /// Without a coupling, exponentials or table the forcing is a bounded
    /// trigonometric polynomial on the whole line.
    pub fn is_trigonometric(&self) -> bool {
        self.exps.is_empty() && self.table.is_none() && self.coupling.is_none()
    }
}

/// Uniformly sampled vector signal, `data[i * dim + j]` is component j at
/// `t0 + i dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub t0: f64,
    pub dt: f64,
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Signal {
    pub fn new(t0: f64, dt: f64, dim: usize, data: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || dim == 0 || !data.len().is_multiple_of(dim) || data.len() < dim {
            return Err(Error::Parameter("signal needs dt > 0, dim ≥ 1 and whole samples".into()));
        }
        Ok(Signal { t0, dt, dim, data })
    }

    /// Samples `f` at `t0, t0 + dt, …` up to `t1` inclusive (rounded).
    pub fn from_fn(t0: f64, t1: f64, dt: f64, dim: usize, f: impl Fn(f64) -> Vec<f64>) -> Self {
        let n = ((t1 - t0) / dt).round() as usize + 1;
        let mut data = Vec::with_capacity(n * dim);
        for i in 0..n {
            let v = f(t0 + i as f64 * dt);
            assert_eq!(v.len(), dim);
            data.extend(v);
        }
        Signal { t0, dt, dim, data }
    }

    pub fn scalar(t0: f64, t1: f64, dt: f64, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(t0, t1, dt, 1, |t| vec![f(t)])
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.len() - 1)
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn norm_at(&self, i: usize) -> f64 {
        self.value(i).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Linear interpolation, clamped at the ends.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let x = ((t - self.t0) / self.dt).clamp(0.0, (self.len() - 1) as f64);
        let i = (x.floor() as usize).min(self.len().saturating_sub(2));
        if self.len() == 1 {
            return self.value(0).to_vec();
        }
        let th = x - i as f64;
        self.value(i).iter().zip(self.value(i + 1)).map(|(a, b)| (1.0 - th) * a + th * b).collect()
    }

    /// Resampled on step `dt` over the same span.
    pub fn resample(&self, dt: f64) -> Signal {
        if (dt - self.dt).abs() <= 1e-12 * self.dt {
            return self.clone();
        }
        Signal::from_fn(self.t0, self.t_end(), dt, self.dim, |t| self.eval(t))
    }

    /// Samples with `t ≥ from`.
    pub fn tail_from(&self, from: f64) -> Signal {
        let i0 = (((from - self.t0) / self.dt).ceil().max(0.0) as usize).min(self.len() - 1);
        Signal { t0: self.t(i0), dt: self.dt, dim: self.dim, data: self.data[i0 * self.dim..].to_vec() }
    }

    /// Component-wise map to a new signal.
    pub fn map(&self, f: impl Fn(f64, &[f64]) -> Vec<f64>) -> Signal {
        let mut data = Vec::with_capacity(self.data.len());
        let mut dim = self.dim;
        for i in 0..self.len() {
            let v = f(self.t(i), self.value(i));
            dim = v.len();
            data.extend(v);
        }
        Signal { t0: self.t0, dt: self.dt, dim, data }
    }

    /// Reads `t,v1,…` CSV with a header row; t must be uniform.
    pub fn from_csv(path: &Path) -> Result<Signal> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let p = path.display().to_string();
        let mut rows = Vec::new();
        for (ln, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            rows.push(vals.map_err(|e| Error::config(format!("{p}:{}", ln + 1), e.to_string()))?);
        }
        if rows.len() < 2 || rows[0].len() < 2 || rows.iter().any(|r| r.len() != rows[0].len()) {
            return Err(Error::config(&p, "need ≥ 2 rows of equal width with a time column"));
        }
        let dt = rows[1][0] - rows[0][0];
        for w in rows.windows(2) {
            if ((w[1][0] - w[0][0]) - dt).abs() > 1e-9 * dt.abs().max(1e-300) {
                return Err(Error::config(&p, "time column must be uniform"));
            }
        }
        let dim = rows[0].len() - 1;
        let data = rows.iter().flat_map(|r| r[1..].iter().copied()).collect();
        Signal::new(rows[0][0], dt, dim, data).map_err(|e| Error::config(&p, e.to_string()))
    }
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forcing_terms() {
        let f = Forcing::sine(2.0, 1.0, 0.0).with_exp(1.0, 1.0).with_constant(0.5);
        let v = f.eval(1.0, 2);
        let want = 2.0 * 1f64.sin() + (-1f64).exp() + 0.5;
        assert!((v[0] - want).abs() < 1e-15 && (v[1] - want).abs() < 1e-15);
        assert!(f.validate(2).is_ok());
        assert!(!f.is_trigonometric());
        let bad = Forcing::zero().with_exp(1.0, -1.0);
        assert!(bad.validate(1).is_err());
    }

    #[test]
    fn couplings() {
        let f = Forcing::constant(1.0).with_coupling(Coupling::Sin { l: 0.5, modulus: Modulus::Constant });
        let u = DVector::from_vec(vec![std::f64::consts::FRAC_PI_2]);
        assert!((f.eval_state(0.0, &u)[0] - 1.5).abs() < 1e-15);
        assert_eq!(f.lipschitz(), 0.5);
        let c = Coupling::Linear { l: 2.0, modulus: Modulus::Decaying { rate: 1.0 } };
        assert!((c.lipschitz_at(1.0) - 2.0 * (-1f64).exp()).abs() < 1e-15);
        let js = serde_json::to_string(&Forcing::zero().with_coupling(c)).unwrap();
        let back: Forcing = serde_json::from_str(&js).unwrap();
        assert_eq!(back.lipschitz(), 2.0);
    }

    #[test]
    fn table_interpolates() {
        let f = Forcing {
            table: Some(Table { t: vec![0.0, 2.0], values: vec![vec![0.0], vec![4.0]] }),
            ..Default::default()
        };
        assert_eq!(f.eval(0.5, 1)[0], 1.0);
        assert_eq!(f.eval(5.0, 1)[0], 4.0);
        assert_eq!(f.eval(-1.0, 1)[0], 0.0);
    }

    #[test]
    fn signal_ops() {
        let s = Signal::scalar(0.0, 1.0, 0.25, |t| 4.0 * t);
        assert_eq!(s.len(), 5);
        assert_eq!(s.eval(0.3)[0], 1.2);
        let r = s.resample(0.125);
        assert_eq!(r.len(), 9);
        assert_eq!(s.tail_from(0.5).t0, 0.5);
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn csv_round() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        std::fs::write(&p, "t,v\n0,1\n0.5,2\n1,3\n").unwrap();
        let s = Signal::from_csv(&p).unwrap();
        assert_eq!((s.len(), s.dt, s.dim), (3, 0.5, 1));
        std::fs::write(&p, "t,v\n0,1\n0.5,2\n2,3\n").unwrap();
        assert!(Signal::from_csv(&p).unwrap_err().is_config());
    }
}
