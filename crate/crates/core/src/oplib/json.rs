use super::{Operator, OperatorKind};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Row-major matrix: a flat list of `dim²` entries or `dim` nested rows.
/// Entries are reals or `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixDoc(pub serde_json::Value);

/// JSON form of an [`Operator`]:
/// `{"kind": "dense"|"pencil"|"regularized", "dim": n, "A"|"M"|"L"|"C": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDoc {
    pub kind: String,
    pub dim: usize,
    #[serde(rename = "A", alias = "a", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<MatrixDoc>,
    #[serde(rename = "M", alias = "m", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<MatrixDoc>,
    #[serde(rename = "L", alias = "l", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<MatrixDoc>,
    #[serde(rename = "C", alias = "c", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<MatrixDoc>,
}

fn flat(m: &DMatrix<f64>) -> MatrixDoc {
    let mut v = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(serde_json::json!(m[(i, j)]));
        }
    }
    MatrixDoc(serde_json::Value::Array(v))
}

fn entry(e: &serde_json::Value) -> Option<std::result::Result<f64, ()>> {
    if let Some(x) = e.as_f64() {
        return Some(Ok(x));
    }
    let pair = e.as_array()?;
    if pair.len() != 2 {
        return None;
    }
    let (re, im) = (pair[0].as_f64()?, pair[1].as_f64()?);
    Some(if im != 0.0 { Err(()) } else { Ok(re) })
}

impl MatrixDoc {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        flat(m)
    }

    pub fn to_matrix(&self, dim: usize, path: &str) -> Result<DMatrix<f64>> {
        let complex_err =
            || Error::config(path, "complex generator entries are not supported; imaginary part must be 0");
        let items = self.0.as_array().ok_or_else(|| Error::config(path, "matrix must be an array"))?;
        let flat_vals: Option<Vec<_>> = items.iter().map(entry).collect();
        if let Some(vals) = flat_vals.filter(|v| v.len() == dim * dim) {
            let vals = vals.into_iter().collect::<std::result::Result<Vec<_>, ()>>().map_err(|_| complex_err())?;
            return Ok(DMatrix::from_row_slice(dim, dim, &vals));
        }
        if items.len() == dim {
            let mut vals = Vec::with_capacity(dim * dim);
            for (i, row) in items.iter().enumerate() {
                let row = row
                    .as_array()
                    .filter(|r| r.len() == dim)
                    .ok_or_else(|| Error::config(format!("{path}[{i}]"), format!("expected a row of {dim} entries")))?;
                for e in row {
                    match entry(e) {
                        Some(Ok(x)) => vals.push(x),
                        Some(Err(())) => return Err(complex_err()),
                        None => {
                            return Err(Error::config(
                                format!("{path}[{i}]"),
                                "entries must be numbers or [re, im] pairs",
                            ))
                        }
                    }
                }
            }
            return Ok(DMatrix::from_row_slice(dim, dim, &vals));
        }
        Err(Error::config(path, format!("expected {} entries or {dim} rows, got {} items", dim * dim, items.len())))
    }
}

impl OperatorDoc {
    pub fn from_operator(op: &Operator) -> Self {
        let mut doc = OperatorDoc { kind: op.kind_name().into(), dim: op.dim(), a: None, m: None, l: None, c: None };
        match op.kind() {
            OperatorKind::Dense { a } => doc.a = Some(flat(a)),
            OperatorKind::Pencil { m, l } => {
                doc.m = Some(flat(m));
                doc.l = Some(flat(l));
            }
            OperatorKind::Regularized { a, c } => {
                doc.a = Some(flat(a));
                doc.c = Some(flat(c));
            }
        }
        doc
    }

    /// Builds the operator; `path` prefixes field names in error messages.
    pub fn build(&self, path: &str) -> Result<Operator> {
        if self.dim == 0 {
            return Err(Error::config(format!("{path}.dim"), "must be positive"));
        }
        let get = |m: &Option<MatrixDoc>, name: &str| -> Result<DMatrix<f64>> {
            let p = format!("{path}.{name}");
            m.as_ref().ok_or_else(|| Error::config(&p, "missing matrix"))?.to_matrix(self.dim, &p)
        };
        let wrap = |r: Result<Operator>| {
            r.map_err(|e| match e {
                Error::InvalidOperator(msg) => Error::config(path, msg),
                Error::RankDeficient => Error::config(format!("{path}.C"), "regularizer is rank deficient"),
                other => other,
            })
        };
        match self.kind.as_str() {
            "dense" => wrap(Operator::dense(get(&self.a, "A")?)),
            "pencil" => wrap(Operator::pencil(get(&self.m, "M")?, get(&self.l, "L")?)),
            "regularized" => wrap(Operator::regularized(get(&self.a, "A")?, get(&self.c, "C")?)),
            other => Err(Error::config(
                format!("{path}.kind"),
                format!("unknown kind `{other}` (expected dense, pencil or regularized)"),
            )),
        }
    }
}
