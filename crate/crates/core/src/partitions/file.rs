//! Operator-list JSON files.
//!
//! ```json
//! { "ambient_dim": 2,
//!   "elements": [ [[1,0],[0,0],[0,0],[0,0]], [[0,0],[0,0],[0,0],[1,0]] ] }
//! ```
//!
//! Each element is a flat row-major list of `[re, im]` pairs.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AlfError, Result};
use crate::quantum_core::ComplexMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorListFile {
    pub ambient_dim: usize,
    pub elements: Vec<Vec<[f64; 2]>>,
}

impl OperatorListFile {
    pub fn from_matrices(elements: &[ComplexMatrix]) -> Self {
        let ambient_dim = elements.first().map(|m| m.nrows()).unwrap_or(0);
        let elements = elements
            .iter()
            .map(|m| {
                let mut flat = Vec::with_capacity(m.len());
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        flat.push([m[(i, j)].re, m[(i, j)].im]);
                    }
                }
                flat
            })
            .collect();
        OperatorListFile { ambient_dim, elements }
    }

    /// Dense matrices, shape-checked but not checked for unity.
    pub fn to_matrices(&self) -> Result<Vec<ComplexMatrix>> {
        let n = self.ambient_dim;
        if n == 0 {
            return Err(AlfError::Parse("ambient_dim must be positive".into()));
        }
        if self.elements.is_empty() {
            return Err(AlfError::Parse("operator list is empty".into()));
        }
        self.elements
            .iter()
            .enumerate()
            .map(|(idx, flat)| {
                if flat.len() != n * n {
                    return Err(AlfError::Parse(format!(
                        "element {idx} has {} entries, expected {}",
                        flat.len(),
                        n * n
                    )));
                }
                Ok(ComplexMatrix::from_fn(n, n, |i, j| {
                    let [re, im] = flat[i * n + j];
                    Complex64::new(re, im)
                }))
            })
            .collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AlfError::Io(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum_core::c64;

    #[test]
    fn parses_documented_example() {
        let text = r#"{ "ambient_dim": 2,
            "elements": [ [[1,0],[0,0],[0,0],[0,0]], [[0,0],[0,0],[0,0],[1,0]] ] }"#;
        let f: OperatorListFile = serde_json::from_str(text).unwrap();
        let ms = f.to_matrices().unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[1][(1, 1)], c64(1.0, 0.0));
        assert_eq!(OperatorListFile::from_matrices(&ms), f);
    }

    #[test]
    fn rejects_wrong_entry_count() {
        let f = OperatorListFile {
            ambient_dim: 2,
            elements: vec![vec![[1.0, 0.0]; 3]],
        };
        assert!(matches!(f.to_matrices(), Err(AlfError::Parse(_))));
    }

    #[test]
    fn save_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        let f = OperatorListFile::from_matrices(&[ComplexMatrix::identity(3, 3)]);
        f.save(&path).unwrap();
        assert_eq!(OperatorListFile::load(&path).unwrap(), f);
    }
}
