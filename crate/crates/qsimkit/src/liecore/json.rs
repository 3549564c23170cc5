//! JSON algebra-spec files.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::AlgebraSpec;
use crate::error::{invalid, QsimError, Result};

/// On-disk algebra description. Structure constants are sparse
/// `[j, k, m, f_jk^m]` entries with zero-based indices; the `(k, j)` entry is
/// implied by antisymmetry. Matrices are rows of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub labels: Vec<String>,
    pub structure: Vec<(usize, usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csa: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representation: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub highest_weight: Option<Vec<f64>>,
}

impl AlgebraFile {
    pub fn into_spec(self) -> Result<AlgebraSpec> {
        let m = self.labels.len();
        let mut f = vec![0.0; m * m * m];
        let mut set = vec![false; m * m * m];
        let mut put = |j: usize, k: usize, n: usize, v: f64| -> Result<()> {
            let i = (j * m + k) * m + n;
            if set[i] && (f[i] - v).abs() > 1e-12 {
                return invalid(format!("conflicting structure constant at ({j},{k},{n})"));
            }
            f[i] = v;
            set[i] = true;
            Ok(())
        };
        for &(j, k, n, v) in &self.structure {
            for idx in [j, k, n] {
                if idx >= m {
                    return Err(QsimError::OutOfRange { index: idx, limit: m });
                }
            }
            if j == k && v != 0.0 {
                return invalid(format!("f_jj^m must vanish (entry {j},{k},{n})"));
            }
            put(j, k, n, v)?;
            put(k, j, n, -v)?;
        }
        let rep = match self.representation {
            None => None,
            Some(mats) => {
                if mats.len() != m {
                    return invalid("one representation matrix per generator is required");
                }
                let mut out = Vec::with_capacity(m);
                for (idx, rows) in mats.into_iter().enumerate() {
                    let p = rows.len();
                    if p == 0 || rows.iter().any(|r| r.len() != p) {
                        return invalid(format!("representation matrix {idx} is not square"));
                    }
                    out.push(DMatrix::from_fn(p, p, |r, c| C64::new(rows[r][c][0], rows[r][c][1])));
                }
                Some(out)
            }
        };
        let mut spec = AlgebraSpec::new(self.labels, f, rep)?;
        if let Some(csa) = self.csa {
            spec = spec.with_cartan(&csa)?;
            if let Some(r) = &self.roots {
                spec.cartan().expect("just set").check_roots(r)?;
            }
            if let Some(e) = self.highest_weight {
                spec.set_highest_weight(e)?;
            }
        } else if self.roots.is_some() || self.highest_weight.is_some() {
            return invalid("roots and highest_weight require csa");
        }
        Ok(spec)
    }
}

impl AlgebraSpec {
    pub fn to_file(&self) -> AlgebraFile {
        let m = self.dim();
        let mut structure = Vec::new();
        for j in 0..m {
            for k in j + 1..m {
                for n in 0..m {
                    let v = self.structure(j, k, n);
                    if v != 0.0 {
                        structure.push((j, k, n, v));
                    }
                }
            }
        }
        AlgebraFile {
            labels: self.labels.clone(),
            structure,
            csa: self.cartan().map(|c| c.csa.clone()),
            roots: self.cartan().map(|c| c.roots.clone()),
            representation: self.representation().map(|r| {
                r.iter()
                    .map(|mat| {
                        (0..mat.nrows())
                            .map(|i| (0..mat.ncols()).map(|c| [mat[(i, c)].re, mat[(i, c)].im]).collect())
                            .collect()
                    })
                    .collect()
            }),
            highest_weight: self.highest_weight().map(|e| e.to_vec()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("plain data serialises")
    }

    pub fn from_json(text: &str) -> Result<AlgebraSpec> {
        let file: AlgebraFile = serde_json::from_str(text).map_err(|e| QsimError::Parse(e.to_string()))?;
        file.into_spec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_su2() {
        let s = AlgebraSpec::su2(1).unwrap();
        let back = AlgebraSpec::from_json(&s.to_json()).unwrap();
        assert_eq!(back.structure_tensor(), s.structure_tensor());
        assert_eq!(back.cartan().unwrap().roots, s.cartan().unwrap().roots);
    }

    #[test]
    fn strict_schema() {
        let bad = r#"{"labels":["a"],"structure":[],"extra":1}"#;
        assert!(matches!(AlgebraSpec::from_json(bad), Err(QsimError::Parse(_))));
        let wrong_roots = r#"{"labels":["X","Y","Z"],
            "structure":[[0,1,2,2.0],[1,2,0,2.0],[2,0,1,2.0]],
            "csa":[2],"roots":[[1.0]]}"#;
        assert!(matches!(AlgebraSpec::from_json(wrong_roots), Err(QsimError::Algebra(_))));
        let good = wrong_roots.replace("[[1.0]]", "[[2.0]]");
        assert!(AlgebraSpec::from_json(&good).is_ok());
    }
}
