use thiserror::Error;

use super::sparse::SparseIntMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("{field}: {reason}")]
    Shape { field: &'static str, reason: String },
    #[error("conservation vector: {0}")]
    InvalidConservation(String),
}

/// A network of `m` species and `n` reversible elementary reactions.
///
/// `forward[i][j]` (`F`) and `reverse[i][j]` (`R`) are the stoichiometries
/// of species `i` in the forward and reverse direction of reaction `j`.
/// `w` holds the log kinetic parameters `[ln k_f; ln k_r]` (length `2n`).
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    pub name: String,
    forward: SparseIntMatrix,
    reverse: SparseIntMatrix,
    w: Vec<f64>,
}

impl ReactionNetwork {
    pub fn new(
        name: impl Into<String>,
        forward: SparseIntMatrix,
        reverse: SparseIntMatrix,
        w: Vec<f64>,
    ) -> Result<Self, NetworkError> {
        let (m, n) = (forward.rows(), forward.cols());
        if m == 0 || n == 0 {
            return Err(NetworkError::Shape {
                field: "F",
                reason: format!("network must have at least one species and reaction, got {m}x{n}"),
            });
        }
        if reverse.rows() != m || reverse.cols() != n {
            return Err(NetworkError::Shape {
                field: "R",
                reason: format!("expected {m}x{n}, got {}x{}", reverse.rows(), reverse.cols()),
            });
        }
        if w.len() != 2 * n {
            return Err(NetworkError::Shape {
                field: "w",
                reason: format!("expected length 2n = {}, got {}", 2 * n, w.len()),
            });
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(NetworkError::Shape {
                field: "w",
                reason: "entries must be finite".into(),
            });
        }
        Ok(Self {
            name: name.into(),
            forward,
            reverse,
            w,
        })
    }

    /// Species count.
    pub fn m(&self) -> usize {
        self.forward.rows()
    }

    /// Reaction count.
    pub fn n(&self) -> usize {
        self.forward.cols()
    }

    pub fn forward(&self) -> &SparseIntMatrix {
        &self.forward
    }

    pub fn reverse(&self) -> &SparseIntMatrix {
        &self.reverse
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn with_w(mut self, w: Vec<f64>) -> Result<Self, NetworkError> {
        let n = self.n();
        self = Self::new(self.name, self.forward, self.reverse, w)?;
        debug_assert_eq!(self.n(), n);
        Ok(self)
    }

    /// Net stoichiometry `R - F` of column `j` as `(species, coefficient)`.
    pub fn net_column(&self, j: usize) -> Vec<(usize, i64)> {
        let mut out: Vec<(usize, i64)> = self.reverse.column(j).map(|(i, v)| (i, v as i64)).collect();
        for (i, v) in self.forward.column(j) {
            match out.iter_mut().find(|(r, _)| *r == i) {
                Some(e) => e.1 -= v as i64,
                None => out.push((i, -(v as i64))),
            }
        }
        out.retain(|&(_, v)| v != 0);
        out.sort_unstable();
        out
    }

    /// Structural conditions that real models satisfy: every row of `F` and
    /// `R` is nonempty and every column of `R - F` has at least two nonzeros.
    pub fn cardinality_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (label, mat) in [("F", &self.forward), ("R", &self.reverse)] {
            for (i, c) in mat.row_counts().into_iter().enumerate() {
                if c == 0 {
                    out.push(format!("row {i} of {label} is empty"));
                }
            }
        }
        for j in 0..self.n() {
            let c = self.net_column(j).len();
            if c < 2 {
                out.push(format!("column {j} of R - F has cardinality {c} < 2"));
            }
        }
        out
    }

    /// `|(R - F)^T l|_inf` for the candidate `l` (all ones when absent).
    /// With `l = 1` the residual is computed in exact integer arithmetic.
    pub fn check_mass_conservation(&self, l: Option<&[f64]>) -> Result<(f64, Vec<f64>), NetworkError> {
        let m = self.m();
        match l {
            None => {
                let ones = vec![1i64; m];
                let r = self.reverse.tr_mul_int(&ones);
                let f = self.forward.tr_mul_int(&ones);
                let res = r.iter().zip(&f).map(|(a, b)| (a - b).abs()).max().unwrap_or(0);
                Ok((res as f64, vec![1.0; m]))
            }
            Some(l) => {
                if l.len() != m {
                    return Err(NetworkError::InvalidConservation(format!(
                        "expected length {m}, got {}",
                        l.len()
                    )));
                }
                if let Some((i, v)) = l.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
                    return Err(NetworkError::InvalidConservation(format!(
                        "component {i} is {v}; all components must be positive"
                    )));
                }
                let r = self.reverse.tr_mul(l);
                let f = self.forward.tr_mul(l);
                let res = r.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                Ok((res, l.to_vec()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> ReactionNetwork {
        // A <-> 2A
        let f = SparseIntMatrix::from_triplets(1, 1, &[(0, 0, 1)]);
        let r = SparseIntMatrix::from_triplets(1, 1, &[(0, 0, 2)]);
        ReactionNetwork::new("single", f, r, vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn non_conservative_single_species() {
        let (res, l) = single().check_mass_conservation(None).unwrap();
        assert_eq!(res, 1.0);
        assert_eq!(l, vec![1.0]);
    }

    #[test]
    fn rejects_nonpositive_l_and_bad_w() {
        let net = single();
        assert!(net.check_mass_conservation(Some(&[0.0])).is_err());
        assert!(net.check_mass_conservation(Some(&[-1.0])).is_err());
        assert!(net.check_mass_conservation(Some(&[1.0, 1.0])).is_err());
        let err = net.clone().with_w(vec![0.0]).unwrap_err();
        assert!(matches!(err, NetworkError::Shape { field: "w", .. }));
    }

    #[test]
    fn cardinality_warning_for_single_column() {
        let w = single().cardinality_warnings();
        assert_eq!(w, vec!["column 0 of R - F has cardinality 1 < 2".to_string()]);
    }

    #[test]
    fn rescaled_species_with_matching_weights_conserve() {
        // A + B <-> 2C balanced with l = 1, then species scaled by D = (2, 3, 6):
        // F' = D F, R' = D R is conserved by l = 6 / D = (3, 2, 1).
        let f = SparseIntMatrix::from_triplets(3, 1, &[(0, 0, 2), (1, 0, 3)]);
        let r = SparseIntMatrix::from_triplets(3, 1, &[(2, 0, 12)]);
        let net = ReactionNetwork::new("scaled", f, r, vec![0.0; 2]).unwrap();
        let (res, _) = net.check_mass_conservation(Some(&[3.0, 2.0, 1.0])).unwrap();
        assert_eq!(res, 0.0);
        let (res, _) = net.check_mass_conservation(None).unwrap();
        assert_eq!(res, 7.0);
    }
}
