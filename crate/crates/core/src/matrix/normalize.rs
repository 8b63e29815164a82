//! Row- and column-wise normalization of similarity matrices.
//!
//! Each scheme computes a row-normalized matrix `R` and a column-normalized
//! matrix `C` and combines them by sum or element-wise product:
//!
//! | kind               | `R(i,j)`                                      |
//! |--------------------|-----------------------------------------------|
//! | `softmax`          | `exp(λS(i,j)) / Σ_k exp(λS(i,k))`             |
//! | `over_avg`         | `S(i,j) / avg_k S(i,k)`                       |
//! | `over_max`         | `S(i,j) / max_k S(i,k)`                       |
//! | `softmax_over_avg` | softmax of `λ·R_avg` along the row            |
//! | `softmax_over_max` | softmax of `λ·R_max` along the row            |
//!
//! `C` is the same along columns. The default (`over_max`, sum) needs no
//! hyper-parameter: `N(i,j) = S(i,j)/max_k S(i,k) + S(i,j)/max_k S(k,j)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{MatrixError, Provenance, SimilarityMatrix};

/// Placeholder temperature for the softmax kinds; it is not a tuned value.
pub const DEFAULT_SOFTMAX_LAMBDA: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationKind {
    Softmax,
    SoftmaxOverAvg,
    SoftmaxOverMax,
    OverAvg,
    OverMax,
}

impl NormalizationKind {
    pub fn is_softmax(self) -> bool {
        matches!(
            self,
            Self::Softmax | Self::SoftmaxOverAvg | Self::SoftmaxOverMax
        )
    }
}

impl std::str::FromStr for NormalizationKind {
    type Err = MatrixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "softmax" => Self::Softmax,
            "softmax_over_avg" => Self::SoftmaxOverAvg,
            "softmax_over_max" => Self::SoftmaxOverMax,
            "over_avg" => Self::OverAvg,
            "over_max" => Self::OverMax,
            other => {
                return Err(MatrixError::Scheme(format!(
                    "unknown normalization {other:?}"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combine {
    #[default]
    Sum,
    Hadamard,
}

impl std::str::FromStr for Combine {
    type Err = MatrixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum" => Ok(Self::Sum),
            "hadamard" | "product" => Ok(Self::Hadamard),
            other => Err(MatrixError::Scheme(format!("unknown combine {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationScheme {
    pub kind: NormalizationKind,
    /// Present iff `kind` is a softmax kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub combine: Combine,
}

impl Default for NormalizationScheme {
    fn default() -> Self {
        Self::over_max()
    }
}

impl NormalizationScheme {
    pub fn over_max() -> Self {
        Self {
            kind: NormalizationKind::OverMax,
            lambda: None,
            combine: Combine::Sum,
        }
    }

    /// Builds a scheme; softmax kinds get [`DEFAULT_SOFTMAX_LAMBDA`] when no
    /// `lambda` is given, other kinds refuse one.
    pub fn new(
        kind: NormalizationKind,
        lambda: Option<f64>,
        combine: Combine,
    ) -> Result<Self, MatrixError> {
        let lambda = match (kind.is_softmax(), lambda) {
            (true, None) => Some(DEFAULT_SOFTMAX_LAMBDA),
            (true, Some(l)) if l > 0.0 && l.is_finite() => Some(l),
            (true, Some(l)) => {
                return Err(MatrixError::Scheme(format!("lambda must be > 0, got {l}")))
            }
            (false, None) => None,
            (false, Some(_)) => {
                return Err(MatrixError::Scheme(format!(
                    "{kind:?} does not take a lambda"
                )))
            }
        };
        Ok(Self {
            kind,
            lambda,
            combine,
        })
    }

    fn validate(&self) -> Result<(), MatrixError> {
        Self::new(self.kind, self.lambda, self.combine).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Col,
}

/// A row or column whose max/avg was zero; its normalized entries were set
/// to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationWarning {
    pub axis: Axis,
    pub index: usize,
}

impl fmt::Display for NormalizationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axis = match self.axis {
            Axis::Row => "row",
            Axis::Col => "column",
        };
        write!(f, "{axis} {} has a zero denominator; set to 0", self.index)
    }
}

/// Result of [`normalize`]: the combined matrix plus both directional terms.
#[derive(Debug, Clone)]
pub struct Normalized {
    pub matrix: SimilarityMatrix,
    pub row_term: Vec<f64>,
    pub col_term: Vec<f64>,
    pub warnings: Vec<NormalizationWarning>,
}

/// Normalizes a raw matrix with `scheme`.
pub fn normalize(
    s: &SimilarityMatrix,
    scheme: &NormalizationScheme,
) -> Result<Normalized, MatrixError> {
    if s.provenance() != Provenance::Raw {
        return Err(MatrixError::Provenance {
            expected: Provenance::Raw,
            found: s.provenance(),
        });
    }
    scheme.validate()?;
    let (row_term, mut warnings) = row_normalized(s, scheme);
    let (col_term, col_warnings) = col_normalized(s, scheme);
    warnings.extend(col_warnings);
    let values = row_term
        .iter()
        .zip(&col_term)
        .map(|(&r, &c)| match scheme.combine {
            Combine::Sum => r + c,
            Combine::Hadamard => r * c,
        })
        .collect();
    let matrix = s.derive(values, Provenance::Normalized)?.with_echo(
        "normalization",
        serde_json::to_value(scheme).expect("scheme serializes"),
    );
    Ok(Normalized {
        matrix,
        row_term,
        col_term,
        warnings,
    })
}

/// The row term `R` of `scheme`, row-major.
pub fn row_normalized(
    s: &SimilarityMatrix,
    scheme: &NormalizationScheme,
) -> (Vec<f64>, Vec<NormalizationWarning>) {
    let mut out = Vec::with_capacity(s.rows() * s.cols());
    let mut warnings = Vec::new();
    for i in 0..s.rows() {
        let (line, degenerate) = normalize_line(s.row(i), scheme);
        if degenerate {
            warnings.push(NormalizationWarning {
                axis: Axis::Row,
                index: i,
            });
        }
        out.extend(line);
    }
    (out, warnings)
}

/// The column term `C` of `scheme`, row-major.
pub fn col_normalized(
    s: &SimilarityMatrix,
    scheme: &NormalizationScheme,
) -> (Vec<f64>, Vec<NormalizationWarning>) {
    let mut out = vec![0.0; s.rows() * s.cols()];
    let mut warnings = Vec::new();
    for j in 0..s.cols() {
        let column: Vec<f64> = s.col(j).collect();
        let (line, degenerate) = normalize_line(&column, scheme);
        if degenerate {
            warnings.push(NormalizationWarning {
                axis: Axis::Col,
                index: j,
            });
        }
        for (i, v) in line.into_iter().enumerate() {
            out[i * s.cols() + j] = v;
        }
    }
    (out, warnings)
}

/// Normalizes one row or column. The flag reports a zero denominator.
fn normalize_line(line: &[f64], scheme: &NormalizationScheme) -> (Vec<f64>, bool) {
    let lambda = scheme.lambda.unwrap_or(DEFAULT_SOFTMAX_LAMBDA);
    match scheme.kind {
        NormalizationKind::OverMax => over(line, max_of(line)),
        NormalizationKind::OverAvg => over(line, avg_of(line)),
        NormalizationKind::Softmax => (softmax(line, lambda), false),
        NormalizationKind::SoftmaxOverMax => {
            let (r, degenerate) = over(line, max_of(line));
            (softmax(&r, lambda), degenerate)
        }
        NormalizationKind::SoftmaxOverAvg => {
            let (r, degenerate) = over(line, avg_of(line));
            (softmax(&r, lambda), degenerate)
        }
    }
}

fn max_of(line: &[f64]) -> f64 {
    line.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn avg_of(line: &[f64]) -> f64 {
    line.iter().sum::<f64>() / line.len() as f64
}

fn over(line: &[f64], denominator: f64) -> (Vec<f64>, bool) {
    if line.is_empty() {
        return (Vec::new(), false);
    }
    if denominator == 0.0 {
        return (vec![0.0; line.len()], true);
    }
    (line.iter().map(|&v| v / denominator).collect(), false)
}

fn softmax(line: &[f64], lambda: f64) -> Vec<f64> {
    // Shifting by the max leaves the ratio unchanged and avoids overflow.
    let peak = max_of(line);
    let exps: Vec<f64> = line.iter().map(|&v| (lambda * (v - peak)).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(rows: &[Vec<f64>]) -> SimilarityMatrix {
        SimilarityMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn hand_example_over_max_sum() {
        let s = raw(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let n = normalize(&s, &NormalizationScheme::over_max()).unwrap();
        assert_eq!(n.row_term, vec![1.0, 0.5, 0.5, 1.0]);
        assert_eq!(n.matrix.to_rows(), vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert_eq!(n.matrix.provenance(), Provenance::Normalized);
        assert!(n.warnings.is_empty());
    }

    #[test]
    fn single_entry_is_two() {
        let n = normalize(&raw(&[vec![0.37]]), &NormalizationScheme::over_max()).unwrap();
        assert_eq!(n.matrix.get(0, 0), 2.0);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let s = raw(&[vec![0.2, 0.9, -0.4], vec![0.1, 0.1, 0.8]]);
        for kind in [
            NormalizationKind::Softmax,
            NormalizationKind::SoftmaxOverAvg,
            NormalizationKind::SoftmaxOverMax,
        ] {
            let scheme = NormalizationScheme::new(kind, Some(7.0), Combine::Sum).unwrap();
            let (r, _) = row_normalized(&s, &scheme);
            for row in r.chunks(3) {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            let (c, _) = col_normalized(&s, &scheme);
            for j in 0..3 {
                assert!((c[j] + c[3 + j] - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn over_avg_and_hadamard() {
        let s = raw(&[vec![1.0, 3.0], vec![2.0, 2.0]]);
        let scheme =
            NormalizationScheme::new(NormalizationKind::OverAvg, None, Combine::Hadamard).unwrap();
        let n = normalize(&s, &scheme).unwrap();
        // R = [[.5, 1.5], [1, 1]], C = [[2/3, 1.2], [4/3, .8]]
        let expected = [0.5 * 2.0 / 3.0, 1.5 * 1.2, 4.0 / 3.0, 0.8];
        for (v, e) in n.matrix.values().iter().zip(expected) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_row_is_guarded() {
        let s = raw(&[vec![0.0, 0.0], vec![1.0, 2.0]]);
        let n = normalize(&s, &NormalizationScheme::over_max()).unwrap();
        assert_eq!(n.row_term[..2], [0.0, 0.0]);
        assert_eq!(
            n.warnings,
            vec![NormalizationWarning {
                axis: Axis::Row,
                index: 0
            }]
        );
        assert!(n.matrix.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn requires_raw_input() {
        let s = raw(&[vec![1.0]]);
        let n = normalize(&s, &NormalizationScheme::over_max())
            .unwrap()
            .matrix;
        assert!(matches!(
            normalize(&n, &NormalizationScheme::over_max()),
            Err(MatrixError::Provenance { .. })
        ));
    }

    #[test]
    fn lambda_only_for_softmax() {
        assert!(
            NormalizationScheme::new(NormalizationKind::OverMax, Some(3.0), Combine::Sum).is_err()
        );
        let s = NormalizationScheme::new(NormalizationKind::Softmax, None, Combine::Sum).unwrap();
        assert_eq!(s.lambda, Some(DEFAULT_SOFTMAX_LAMBDA));
        assert!(
            NormalizationScheme::new(NormalizationKind::Softmax, Some(0.0), Combine::Sum).is_err()
        );
    }

    #[test]
    fn over_max_lines_peak_at_one() {
        let s = raw(&[vec![0.3, 0.7, 0.2], vec![0.9, 0.1, 0.4]]);
        let scheme = NormalizationScheme::over_max();
        let (r, _) = row_normalized(&s, &scheme);
        let (c, _) = col_normalized(&s, &scheme);
        for row in r.chunks(3) {
            assert_eq!(max_of(row), 1.0);
        }
        for j in 0..3 {
            assert_eq!(c[j].max(c[3 + j]), 1.0);
        }
    }
}
