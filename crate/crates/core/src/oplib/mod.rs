//! Generators: dense matrices, degenerate pencils `(M, L)` realizing a
//! multivalued operator through `(λ - 𝒜)^{-1} := (λM - L)^{-1} M`, and
//! C-regularized generators `(A, C)`.

mod condition_p;
mod frac_power;
mod interp;
mod json;

pub use condition_p::{check_condition_p, condition_p_grid, condition_p_grid_span, ConditionPReport, PSample};
pub use frac_power::{fractional_power_neg, ContourSpec};
pub use interp::{interpolation_norm, interpolation_norm_with, InterpolationConfig};
pub use json::{MatrixDoc, OperatorDoc};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    Dense { a: DMatrix<f64> },
    Pencil { m: DMatrix<f64>, l: DMatrix<f64> },
    Regularized { a: DMatrix<f64>, c: DMatrix<f64> },
}

/// Eigen-structure `T(τ) = V diag(e^{τμ}) W` of the base semigroup when the
/// generator admits one with real spectrum.
#[derive(Debug, Clone)]
pub struct Spectral {
    pub mu: Vec<f64>,
    /// n × r, columns are the right modes.
    pub v: DMatrix<f64>,
    /// r × n, rows are the left modes (already multiplied by C when
    /// regularized).
    pub w: DMatrix<f64>,
}

impl Spectral {
    pub fn rank(&self) -> usize {
        self.mu.len()
    }

    /// `V diag(d) W`.
    pub fn assemble(&self, d: &[f64]) -> DMatrix<f64> {
        let mut vd = self.v.clone();
        for (j, &dj) in d.iter().enumerate() {
            vd.column_mut(j).scale_mut(dj);
        }
        vd * &self.w
    }
}

const CACHE_LIMIT: usize = 1024;

/// A generator together with a resolvent cache keyed by λ.
#[derive(Debug)]
pub struct Operator {
    kind: OperatorKind,
    dim: usize,
    cache: Mutex<HashMap<(u64, u64), Arc<CMatrix>>>,
    spectral: OnceLock<Option<Spectral>>,
}

impl Clone for Operator {
    fn clone(&self) -> Self {
        Operator::from_kind_unchecked(self.kind.clone(), self.dim)
    }
}

impl PartialEq for Operator {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

fn check_square(name: &str, m: &DMatrix<f64>, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::InvalidOperator(format!("{name} is {}x{}, expected {n}x{n}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidOperator(format!("{name} has non-finite entries")));
    }
    Ok(())
}

pub(crate) fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Spectral norm.
pub fn norm2(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

pub fn norm2_real(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let scale = m.amax().max(1e-300);
    (m - m.transpose()).amax() <= 1e-12 * scale
}

/// Inverse through LU with an explicit pivot check.
pub(crate) fn inverse_checked(b: CMatrix, lambda: Complex64) -> Result<CMatrix> {
    let n = b.nrows();
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let lu = b.lu();
    let u = lu.u();
    let min_pivot = (0..n).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if !(min_pivot > 1e-14 * scale) {
        return Err(Error::Singular { lambda });
    }
    lu.try_inverse().ok_or(Error::Singular { lambda })
}

impl Operator {
    fn from_kind_unchecked(kind: OperatorKind, dim: usize) -> Self {
        Operator { kind, dim, cache: Mutex::new(HashMap::new()), spectral: OnceLock::new() }
    }

    pub fn dense(a: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 {
            return Err(Error::InvalidOperator("empty matrix".into()));
        }
        check_square("A", &a, n)?;
        Ok(Self::from_kind_unchecked(OperatorKind::Dense { a }, n))
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        Self::dense(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn pencil(m: DMatrix<f64>, l: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n == 0 {
            return Err(Error::InvalidOperator("empty matrix".into()));
        }
        check_square("M", &m, n)?;
        check_square("L", &l, n)?;
        // det(λM - L) is a polynomial of degree ≤ n; it vanishes identically
        // only if it vanishes at every one of these generic points.
        let probes = [Complex64::new(0.731, 0.377), Complex64::new(-2.113, 1.619), Complex64::new(5.27, -3.9)];
        let regular = probes.iter().any(|&lam| {
            let b = to_complex(&m) * lam - to_complex(&l);
            inverse_checked(b, lam).is_ok()
        });
        if !regular {
            return Err(Error::InvalidOperator("pencil is singular: det(λM - L) vanishes identically".into()));
        }
        Ok(Self::from_kind_unchecked(OperatorKind::Pencil { m, l }, n))
    }

    pub fn regularized(a: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 {
            return Err(Error::InvalidOperator("empty matrix".into()));
        }
        check_square("A", &a, n)?;
        check_square("C", &c, n)?;
        let sv = c.clone().singular_values();
        if sv.min() <= 1e-12 * sv.max() {
            return Err(Error::RankDeficient);
        }
        let comm = (&c * &a - &a * &c).amax();
        if comm > 1e-10 * (a.amax() * c.amax() + 1.0) {
            return Err(Error::InvalidOperator(format!("regularizer must commute with A (|CA - AC| = {comm:e})")));
        }
        Ok(Self::from_kind_unchecked(OperatorKind::Regularized { a, c }, n))
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            OperatorKind::Dense { .. } => "dense",
            OperatorKind::Pencil { .. } => "pencil",
            OperatorKind::Regularized { .. } => "regularized",
        }
    }

    /// The single-valued resolvent: `(λ - A)^{-1}`, `(λM - L)^{-1}M` or
    /// `(λ - A)^{-1}C`.
    pub fn resolvent(&self, lambda: Complex64) -> Result<Arc<CMatrix>> {
        let key = (lambda.re.to_bits(), lambda.im.to_bits());
        if let Some(r) = self.cache.lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let r = Arc::new(self.resolvent_uncached(lambda)?);
        let mut cache = self.cache.lock().unwrap();
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, r.clone());
        Ok(r)
    }

    pub fn resolvent_uncached(&self, lambda: Complex64) -> Result<CMatrix> {
        let n = self.dim;
        let eye = CMatrix::identity(n, n);
        match &self.kind {
            OperatorKind::Dense { a } => inverse_checked(eye * lambda - to_complex(a), lambda),
            OperatorKind::Pencil { m, l } => {
                let mc = to_complex(m);
                let inv = inverse_checked(&mc * lambda - to_complex(l), lambda)?;
                Ok(inv * mc)
            }
            OperatorKind::Regularized { a, c } => {
                let inv = inverse_checked(eye * lambda - to_complex(a), lambda)?;
                Ok(inv * to_complex(c))
            }
        }
    }

    /// Resolvent of the underlying generator without the regularizer; used
    /// for interpolation norms and fractional powers.
    pub fn plain_resolvent(&self, lambda: Complex64) -> Result<CMatrix> {
        match &self.kind {
            OperatorKind::Regularized { a, .. } => {
                let n = self.dim;
                inverse_checked(CMatrix::identity(n, n) * lambda - to_complex(a), lambda)
            }
            _ => Ok((*self.resolvent(lambda)?).clone()),
        }
    }

    /// `C^{-1} y` for the regularized kind; the identity otherwise.
    pub fn apply_regularizer_inverse(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        match &self.kind {
            OperatorKind::Regularized { c, .. } => {
                if y.len() != self.dim {
                    return Err(Error::Parameter(format!("vector length {} != dim {}", y.len(), self.dim)));
                }
                let sv = c.clone().singular_values();
                if sv.min() <= 1e-12 * sv.max() {
                    return Err(Error::RankDeficient);
                }
                c.clone().lu().solve(y).ok_or(Error::RankDeficient)
            }
            _ => Ok(y.clone()),
        }
    }

    /// The regularizer, identity for non-regularized kinds.
    pub fn regularizer(&self) -> DMatrix<f64> {
        match &self.kind {
            OperatorKind::Regularized { c, .. } => c.clone(),
            _ => DMatrix::identity(self.dim, self.dim),
        }
    }

    /// Real-spectrum eigenstructure if the operator admits one:
    /// symmetric dense `A`; symmetric regularized `A` (C commutes);
    /// pencils with symmetric `M ⪰ 0` and `-L` symmetric positive definite.
    pub fn spectral(&self) -> Option<&Spectral> {
        self.spectral.get_or_init(|| self.compute_spectral()).as_ref()
    }

    fn compute_spectral(&self) -> Option<Spectral> {
        match &self.kind {
            OperatorKind::Dense { a } => {
                if !is_symmetric(a) {
                    return None;
                }
                let eig = a.clone().symmetric_eigen();
                let w = eig.eigenvectors.transpose();
                Some(Spectral { mu: eig.eigenvalues.iter().copied().collect(), v: eig.eigenvectors, w })
            }
            OperatorKind::Regularized { a, c } => {
                if !is_symmetric(a) {
                    return None;
                }
                let eig = a.clone().symmetric_eigen();
                let w = eig.eigenvectors.transpose() * c;
                Some(Spectral { mu: eig.eigenvalues.iter().copied().collect(), v: eig.eigenvectors, w })
            }
            OperatorKind::Pencil { m, l } => {
                if !is_symmetric(m) || !is_symmetric(l) {
                    return None;
                }
                let neg_l: DMatrix<f64> = -l;
                let chol = neg_l.cholesky()?;
                // -L = Rᵀ R with R upper triangular
                let r = chol.l().transpose();
                let r_inv = r.clone().try_inverse()?;
                let g = r_inv.transpose() * m * &r_inv;
                let g = (&g + g.transpose()) * 0.5;
                let eig = g.symmetric_eigen();
                let kmax = eig.eigenvalues.amax();
                if eig.eigenvalues.iter().any(|&k| k < -1e-10 * kmax.max(1e-300)) {
                    return None; // M not semidefinite
                }
                let keep: Vec<usize> =
                    (0..self.dim).filter(|&i| eig.eigenvalues[i] > 1e-13 * kmax.max(1e-300)).collect();
                let r_cols = keep.len();
                let mut wr = DMatrix::zeros(self.dim, r_cols);
                let mut mu = Vec::with_capacity(r_cols);
                for (j, &i) in keep.iter().enumerate() {
                    wr.set_column(j, &eig.eigenvectors.column(i));
                    mu.push(-1.0 / eig.eigenvalues[i]);
                }
                let v = &r_inv * &wr;
                let w = wr.transpose() * &r;
                Some(Spectral { mu, v, w })
            }
        }
    }

    /// Projection onto the range part along the M-null space,
    /// `Q = lim_{t→0+} T(t)` for pencils; identity otherwise.
    pub fn range_projection(&self) -> Option<DMatrix<f64>> {
        match &self.kind {
            OperatorKind::Pencil { .. } => self.spectral().map(|s| &s.v * &s.w),
            _ => Some(DMatrix::identity(self.dim, self.dim)),
        }
    }

    /// Generator action for residual checks: returns `(lhs, rhs)` matrices
    /// such that the equation reads `lhs · D^γu = rhs · u + lhs · f`.
    pub fn residual_matrices(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        match &self.kind {
            OperatorKind::Dense { a } | OperatorKind::Regularized { a, .. } => {
                (DMatrix::identity(self.dim, self.dim), a.clone())
            }
            OperatorKind::Pencil { m, l } => (m.clone(), l.clone()),
        }
    }

    pub fn to_doc(&self) -> OperatorDoc {
        OperatorDoc::from_operator(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: OperatorDoc = serde_json::from_str(s).map_err(|e| Error::config("operator", e.to_string()))?;
        doc.build("operator")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("operator documents always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn resolvent_examples() {
        let op = Operator::dense(DMatrix::from_element(1, 1, -2.0)).unwrap();
        assert_relative_eq!(op.resolvent(c(1.0, 0.0)).unwrap()[(0, 0)].re, 1.0 / 3.0, epsilon = 1e-15);

        let p = Operator::pencil(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0])),
            DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -5.0])),
        )
        .unwrap();
        let r = p.resolvent(c(2.0, 0.0)).unwrap();
        assert_relative_eq!(r[(0, 0)].re, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(r[(1, 1)].norm(), 0.0);
        assert_eq!(r[(0, 1)].norm() + r[(1, 0)].norm(), 0.0);

        let g = Operator::regularized(DMatrix::from_element(1, 1, -1.0), DMatrix::from_element(1, 1, 0.5)).unwrap();
        assert_relative_eq!(g.resolvent(c(0.0, 0.0)).unwrap()[(0, 0)].re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn resolvent_singular_and_cached() {
        let op = Operator::diagonal(&[-1.0, -4.0]).unwrap();
        assert!(matches!(op.resolvent(c(-1.0, 0.0)), Err(Error::Singular { .. })));
        let a = op.resolvent(c(0.3, 0.1)).unwrap();
        let b = op.resolvent(c(0.3, 0.1)).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn invalid_operators_rejected() {
        assert!(Operator::dense(DMatrix::zeros(2, 3)).is_err());
        assert!(Operator::pencil(DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)).is_err());
        assert!(matches!(
            Operator::regularized(DMatrix::identity(2, 2), DMatrix::zeros(2, 2)),
            Err(Error::RankDeficient)
        ));
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -2.0]);
        let cc = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        assert!(Operator::regularized(a, cc).is_err());
    }

    #[test]
    fn regularizer_inverse_examples() {
        let g = Operator::regularized(DMatrix::from_element(1, 1, -1.0), DMatrix::from_element(1, 1, 0.5)).unwrap();
        assert_relative_eq!(g.apply_regularizer_inverse(&DVector::from_vec(vec![1.0])).unwrap()[0], 2.0);
        let g = Operator::regularized(DMatrix::identity(2, 2) * -1.0, DMatrix::identity(2, 2)).unwrap();
        let y = DVector::from_vec(vec![3.0, -7.0]);
        assert_eq!(g.apply_regularizer_inverse(&y).unwrap(), y);
        let g = Operator::regularized(
            DMatrix::identity(2, 2) * -1.0,
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])),
        )
        .unwrap();
        let x = g.apply_regularizer_inverse(&DVector::from_vec(vec![3.0, 4.0])).unwrap();
        assert_relative_eq!(x[0], 3.0);
        assert_relative_eq!(x[1], 2.0);
    }

    #[test]
    fn pencil_spectral_structure() {
        let p = Operator::pencil(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0])),
            DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -1.0])),
        )
        .unwrap();
        let s = p.spectral().unwrap();
        assert_eq!(s.rank(), 1);
        assert_relative_eq!(s.mu[0], -1.0, epsilon = 1e-14);
        let q = p.range_projection().unwrap();
        assert_relative_eq!(q[(0, 0)], 1.0, epsilon = 1e-14);
        assert!(q[(1, 1)].abs() < 1e-15);
    }

    #[test]
    fn pencil_spectral_matches_resolvent() {
        // random SPD -L and PSD M of rank 3
        let n = 5;
        let b = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 5) as f64 * 0.3 - 0.4);
        let l = -(&b * b.transpose() + DMatrix::identity(n, n));
        let mm = DMatrix::from_fn(n, n, |i, j| if i < 3 && j < 3 { 1.0 / (1.0 + i as f64 + j as f64) } else { 0.0 });
        let p = Operator::pencil(mm, l).unwrap();
        let s = p.spectral().unwrap().clone();
        assert_eq!(s.rank(), 3);
        let lam = c(0.4, 1.3);
        let r = p.resolvent(lam).unwrap();
        let mut approx_r = CMatrix::zeros(n, n);
        for i in 0..s.rank() {
            let vi = s.v.column(i).map(|x| c(x, 0.0));
            let wi = s.w.row(i).map(|x| c(x, 0.0));
            approx_r += vi * wi / (lam - s.mu[i]);
        }
        assert!(cmax(&(&*r - approx_r)) < 1e-12);
    }

    fn cmax(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    proptest! {
        #[test]
        fn first_resolvent_identity(
            d in proptest::collection::vec(-10.0f64..-0.1, 3),
            off in -0.5f64..0.5,
            lr in 0.1f64..5.0, li in -5.0f64..5.0,
            mr in 0.1f64..5.0, mi in -5.0f64..5.0,
        ) {
            let mut a = DMatrix::from_diagonal(&DVector::from_vec(d));
            a[(0, 1)] = off;
            a[(2, 0)] = -off;
            let op = Operator::dense(a).unwrap();
            let (l, m) = (c(lr, li), c(mr, mi));
            let rl = op.resolvent(l).unwrap();
            let rm = op.resolvent(m).unwrap();
            let lhs = (&*rl * &*rm) * (l - m);
            let rhs = &*rm - &*rl;
            prop_assert!(cmax(&(lhs - rhs)) < 1e-10);
        }

        #[test]
        fn pencil_pseudo_resolvent_identity(
            md in proptest::collection::vec(0.0f64..2.0, 3),
            ld in proptest::collection::vec(0.5f64..6.0, 3),
            off in -0.3f64..0.3,
            lr in 0.1f64..5.0, li in -5.0f64..5.0,
            mr in 0.1f64..5.0, mi in -5.0f64..5.0,
        ) {
            let mut mm = DMatrix::from_diagonal(&DVector::from_vec(md));
            mm[(1, 1)] = 0.0;
            let mut l = -DMatrix::from_diagonal(&DVector::from_vec(ld));
            l[(0, 2)] = off;
            l[(2, 0)] = off;
            let op = Operator::pencil(mm, l).unwrap();
            let (a, b) = (c(lr, li), c(mr, mi));
            let ja = op.resolvent(a).unwrap();
            let jb = op.resolvent(b).unwrap();
            let lhs = (&*ja * &*jb) * (a - b);
            prop_assert!(cmax(&(lhs - (&*jb - &*ja))) < 1e-10);
        }
    }
}
