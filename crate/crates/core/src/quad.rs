//! Quadrature rules shared by the special functions, the families and the
//! solvers: Gauss-Legendre, double-exponential rules and adaptive
//! Gauss-Kronrod.

use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::{Arc, Mutex, OnceLock};

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Cached rule; building a rule is cheap but it is hit in inner loops.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard.entry(n).or_insert_with(|| Arc::new(GaussLegendre::new(n))).clone()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + r * x, r * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Outcome of an adaptive rule.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub converged: bool,
}

/// Exp-sinh rule for ∫₀^∞ f(u) du with u = exp(π/2·sinh t).
///
/// Handles integrable endpoint singularities at 0 and exponential decay at
/// infinity. The step is halved until successive estimates agree to `tol`
/// (relative, with an absolute floor of `tol * 1e-3`).
pub fn exp_sinh<F: FnMut(f64) -> Complex64>(mut f: F, tol: f64) -> QuadResult<Complex64> {
    let (tmin, tmax) = (6.5, 4.0);
    let mut eval = |t: f64| -> Complex64 {
        let s = FRAC_PI_2 * t.sinh();
        let u = s.exp();
        if !u.is_finite() || u == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let jac = u * FRAC_PI_2 * t.cosh();
        let v = f(u);
        if v.re.is_finite() && v.im.is_finite() {
            v * jac
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    for k in 1..=(tmax / h) as i64 {
        sum += eval(k as f64 * h);
    }
    for k in 1..=(tmin / h) as i64 {
        sum += eval(-(k as f64) * h);
    }
    let mut est = sum * h;
    let mut err = f64::INFINITY;
    for _ in 0..9 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            sum += eval(k as f64 * h);
            k += 2;
        }
        let mut k = 1;
        while k as f64 * h <= tmin {
            sum += eval(-(k as f64) * h);
            k += 2;
        }
        let next = sum * h;
        err = (next - est).norm();
        est = next;
        if err <= tol * est.norm().max(1e-3) {
            return QuadResult { value: est, error: err, converged: true };
        }
    }
    QuadResult { value: est, error: err, converged: false }
}

/// Tanh-sinh rule on [0, 1]. The closure receives `(x, 1 - x)` so that
/// endpoint singularities at 1 can be evaluated without cancellation.
pub fn tanh_sinh01<F: FnMut(f64, f64) -> Complex64>(mut f: F, tol: f64) -> QuadResult<Complex64> {
    let (tmin, tmax) = (6.5, 6.5);
    let mut eval = |t: f64| -> Complex64 {
        let s = std::f64::consts::PI * t.sinh();
        let x = 1.0 / (1.0 + (-s).exp());
        let xc = 1.0 / (1.0 + s.exp());
        if x <= 0.0 || xc <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let jac = x * xc * std::f64::consts::PI * t.cosh();
        let v = f(x, xc);
        if v.re.is_finite() && v.im.is_finite() {
            v * jac
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    for k in 1..=(tmax / h) as i64 {
        sum += eval(k as f64 * h);
    }
    for k in 1..=(tmin / h) as i64 {
        sum += eval(-(k as f64) * h);
    }
    let mut est = sum * h;
    let mut err = f64::INFINITY;
    for _ in 0..9 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            sum += eval(k as f64 * h);
            k += 2;
        }
        let mut k = 1;
        while k as f64 * h <= tmin {
            sum += eval(-(k as f64) * h);
            k += 2;
        }
        let next = sum * h;
        err = (next - est).norm();
        est = next;
        if err <= tol * est.norm().max(1e-3) {
            return QuadResult { value: est, error: err, converged: true };
        }
    }
    QuadResult { value: est, error: err, converged: false }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = r * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * r, ((kron - gauss) * r).abs())
}

/// Globally adaptive Gauss-Kronrod (7-15) on a finite interval.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> QuadResult<f64> {
    let (v, e) = gk15(&mut f, a, b);
    let mut segs = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    let mut it = 0;
    while err > abs_tol.max(rel_tol * total.abs()) && it < 2000 {
        let (idx, _) = segs.iter().enumerate().max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap()).unwrap();
        let (sa, sb, sv, se) = segs.swap_remove(idx);
        let m = 0.5 * (sa + sb);
        let (v1, e1) = gk15(&mut f, sa, m);
        let (v2, e2) = gk15(&mut f, m, sb);
        total += v1 + v2 - sv;
        err += e1 + e2 - se;
        segs.push((sa, m, v1, e1));
        segs.push((m, sb, v2, e2));
        it += 1;
    }
    // re-sum to shed accumulated rounding from the running updates
    let value: f64 = segs.iter().map(|s| s.2).sum();
    let error: f64 = segs.iter().map(|s| s.3).sum();
    QuadResult { value, error, converged: error <= abs_tol.max(rel_tol * value.abs()) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_polynomial_exactness() {
        let g = GaussLegendre::new(8);
        let s: f64 = g.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 15 is integrated exactly
        let v = g.integrate(0.0, 1.0, |x| x.powi(15));
        assert!((v - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn exp_sinh_gamma_half() {
        let r = exp_sinh(|u| Complex64::new(u.powf(-0.5) * (-u).exp(), 0.0), 1e-13);
        assert!(r.converged);
        assert!((r.value.re - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_beta_integral() {
        // ∫ x^{-1/2} (1-x)^{-1/2} dx = π
        let r = tanh_sinh01(|x, xc| Complex64::new(1.0 / (x * xc).sqrt(), 0.0), 1e-13);
        assert!((r.value.re - std::f64::consts::PI).abs() < 1e-11);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let r = adaptive(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-12);
        let exact = 2.0 * (1.0 / 1e-4f64.sqrt()) * (1.0 / 1e-4f64.sqrt()).atan();
        assert!((r.value - exact).abs() < 1e-8 * exact);
    }
}
