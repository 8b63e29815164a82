use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CollationError, Correspondence, CorrespondenceSet, Source};
use crate::matrix::{argmax, SimilarityMatrix};

/// Which manuscript plays the query role: `Rows` queries the first
/// manuscript's illustrations against the second, `Cols` the reverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Rows,
    Cols,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Rows => "rows",
            Direction::Cols => "cols",
        })
    }
}

impl FromStr for Direction {
    type Err = CollationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rows" | "row" => Ok(Direction::Rows),
            "cols" | "col" | "columns" => Ok(Direction::Cols),
            other => Err(CollationError::InvalidArgument(format!(
                "unknown direction {other:?}"
            ))),
        }
    }
}

/// Orders scores best first. Matrix values are finite, and `0.0` and
/// `-0.0` compare equal so they fall through to the index tie-break.
pub(crate) fn score_desc(a: f64, b: f64) -> Ordering {
    b.partial_cmp(&a).expect("matrix values are finite")
}

/// Descending score, then ascending `(i, j)`.
pub(crate) fn rank_order(a: (usize, usize, f64), b: (usize, usize, f64)) -> Ordering {
    score_desc(a.2, b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1))
}

/// Every entry of `s` as `(i, j, score)` in global ranking order.
pub(crate) fn ranked_entries(s: &SimilarityMatrix) -> Vec<(usize, usize, f64)> {
    let cols = s.cols();
    let mut all: Vec<_> = s
        .values()
        .iter()
        .enumerate()
        .map(|(k, &v)| (k / cols, k % cols, v))
        .collect();
    all.sort_unstable_by(|&a, &b| rank_order(a, b));
    all
}

fn pair_name(s: &SimilarityMatrix) -> (String, String) {
    match s
        .config_echo()
        .get("manuscripts")
        .and_then(|v| v.as_array())
    {
        Some(ids) if ids.len() == 2 => (
            ids[0].as_str().unwrap_or("A").to_owned(),
            ids[1].as_str().unwrap_or("B").to_owned(),
        ),
        _ => ("A".into(), "B".into()),
    }
}

/// Each row (or column) paired with its best-scoring partner; lowest index
/// wins ties. Several queries may share a partner.
pub fn argmax_correspondences(s: &SimilarityMatrix, direction: Direction) -> CorrespondenceSet {
    let (a, b) = pair_name(s);
    let entries = match direction {
        Direction::Rows => (0..s.rows())
            .filter_map(|i| {
                argmax(s.row(i).iter().copied())
                    .map(|j| Correspondence::predicted(i, j, s.get(i, j), Source::Argmax))
            })
            .collect::<Vec<_>>(),
        Direction::Cols => (0..s.cols())
            .filter_map(|j| {
                argmax(s.col(j))
                    .map(|i| Correspondence::predicted(i, j, s.get(i, j), Source::Argmax))
            })
            .collect(),
    };
    CorrespondenceSet::from_entries(a, b, entries)
}

/// One-to-one matching by repeatedly accepting the best remaining entry
/// whose row and column are both unused, until `min(rows, cols)` pairs are
/// accepted. Output is in acceptance order.
pub fn greedy_one_to_one(s: &SimilarityMatrix) -> CorrespondenceSet {
    let (a, b) = pair_name(s);
    CorrespondenceSet::from_entries(a, b, greedy_pairs(s, s.rows().min(s.cols())))
}

/// The first `limit` pairs accepted by the greedy one-to-one procedure.
pub(crate) fn greedy_pairs(s: &SimilarityMatrix, limit: usize) -> Vec<Correspondence> {
    let mut row_used = vec![false; s.rows()];
    let mut col_used = vec![false; s.cols()];
    let mut out = Vec::with_capacity(limit);
    for (i, j, v) in ranked_entries(s) {
        if out.len() == limit {
            break;
        }
        if row_used[i] || col_used[j] {
            continue;
        }
        row_used[i] = true;
        col_used[j] = true;
        out.push(Correspondence::predicted(i, j, v, Source::Greedy));
    }
    out
}

/// The `k` best partners of query `i` along `direction`, best first, ties
/// to the lowest index. Returns fewer than `k` when the axis is shorter.
pub fn top_k(
    s: &SimilarityMatrix,
    i: usize,
    direction: Direction,
    k: usize,
) -> Result<Vec<(usize, f64)>, CollationError> {
    top_k_filtered(s, i, direction, k, |_| true)
}

/// [`top_k`] that skips partners whose pair is rejected in `mask`.
pub fn top_k_masked(
    s: &SimilarityMatrix,
    i: usize,
    direction: Direction,
    k: usize,
    mask: &CorrespondenceSet,
) -> Result<Vec<(usize, f64)>, CollationError> {
    top_k_filtered(s, i, direction, k, |other| match direction {
        Direction::Rows => !mask.is_rejected(i, other),
        Direction::Cols => !mask.is_rejected(other, i),
    })
}

fn top_k_filtered(
    s: &SimilarityMatrix,
    i: usize,
    direction: Direction,
    k: usize,
    keep: impl Fn(usize) -> bool,
) -> Result<Vec<(usize, f64)>, CollationError> {
    if k == 0 {
        return Err(CollationError::InvalidArgument("k must be >= 1".into()));
    }
    let len = match direction {
        Direction::Rows => s.rows(),
        Direction::Cols => s.cols(),
    };
    if i >= len {
        return Err(CollationError::IndexOutOfRange { index: i, len });
    }
    let mut line: Vec<(usize, f64)> = match direction {
        Direction::Rows => s.row(i).iter().copied().enumerate().collect(),
        Direction::Cols => s.col(i).enumerate().collect(),
    };
    line.retain(|&(other, _)| keep(other));
    line.sort_unstable_by(|a, b| score_desc(a.1, b.1).then(a.0.cmp(&b.0)));
    line.truncate(k);
    Ok(line)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collation::Status;

    fn m(rows: &[Vec<f64>]) -> SimilarityMatrix {
        SimilarityMatrix::from_rows(rows).unwrap()
    }

    fn pairs(set: &CorrespondenceSet) -> Vec<(usize, usize)> {
        set.iter().map(|e| (e.i, e.j)).collect()
    }

    #[test]
    fn argmax_allows_shared_partner() {
        let s = m(&[vec![0.9, 0.1], vec![0.8, 0.2]]);
        assert_eq!(
            pairs(&argmax_correspondences(&s, Direction::Rows)),
            vec![(0, 0), (1, 0)]
        );
        assert_eq!(
            pairs(&argmax_correspondences(&s, Direction::Cols)),
            vec![(0, 0), (1, 1)]
        );
    }

    #[test]
    fn argmax_empty() {
        let s = SimilarityMatrix::new(0, 3, vec![], crate::matrix::Provenance::Raw, "t").unwrap();
        assert!(argmax_correspondences(&s, Direction::Rows).is_empty());
    }

    #[test]
    fn greedy_hand_trace() {
        let s = m(&[vec![0.9, 0.1], vec![0.8, 0.2]]);
        let g = greedy_one_to_one(&s);
        assert_eq!(pairs(&g), vec![(0, 0), (1, 1)]);
        assert!(g
            .iter()
            .all(|e| e.source == Source::Greedy && e.status == Status::Predicted));
    }

    #[test]
    fn greedy_single_row() {
        let s = m(&[vec![0.1, 0.7, 0.7, 0.3]]);
        assert_eq!(pairs(&greedy_one_to_one(&s)), vec![(0, 1)]);
    }

    #[test]
    fn top_k_order_and_errors() {
        let s = m(&[vec![0.2, 0.5, 0.5, 0.9], vec![0.0; 4]]);
        assert_eq!(
            top_k(&s, 0, Direction::Rows, 3).unwrap(),
            vec![(3, 0.9), (1, 0.5), (2, 0.5)]
        );
        assert_eq!(top_k(&s, 0, Direction::Rows, 10).unwrap().len(), 4);
        assert_eq!(top_k(&s, 3, Direction::Cols, 1).unwrap(), vec![(0, 0.9)]);
        assert!(top_k(&s, 2, Direction::Rows, 1).is_err());
        assert!(top_k(&s, 0, Direction::Rows, 0).is_err());
    }

    #[test]
    fn mask_hides_rejected() {
        let s = m(&[vec![0.2, 0.5, 0.9]]);
        let mut mask = CorrespondenceSet::new("A", "B");
        mask.insert(Correspondence {
            i: 0,
            j: 2,
            status: Status::Rejected,
            score: 0.9,
            source: Source::Manual,
        });
        let got = top_k_masked(&s, 0, Direction::Rows, 5, &mask).unwrap();
        assert_eq!(got, vec![(1, 0.5), (0, 0.2)]);
    }

    #[test]
    fn pair_name_from_echo() {
        let s = m(&[vec![1.0]]).with_echo("manuscripts", serde_json::json!(["D1", "D2"]));
        assert_eq!(greedy_one_to_one(&s).pair(), ("D1", "D2"));
    }
}
