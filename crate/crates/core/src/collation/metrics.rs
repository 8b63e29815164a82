//! Evaluation on annotated correspondences only: unannotated illustrations
//! never count for or against a method. Score-based metrics read the raw
//! matrix values and ignore annotation status.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::retrieval::{greedy_pairs, ranked_entries, score_desc};
use super::{argmax_correspondences, CollationError, CorrespondenceSet, Direction, Status};
use crate::matrix::SimilarityMatrix;

/// `k` values used when none are given.
pub const DEFAULT_NN_KS: [usize; 4] = [1, 5, 10, 20];

/// Ground-truth pairs of `gt`: every entry that is not rejected.
pub fn ground_truth_pairs(gt: &CorrespondenceSet) -> Vec<(usize, usize)> {
    gt.iter()
        .filter(|e| e.status != Status::Rejected)
        .map(|e| (e.i, e.j))
        .collect()
}

fn nonempty_gt(gt: &CorrespondenceSet) -> Result<Vec<(usize, usize)>, CollationError> {
    let pairs = ground_truth_pairs(gt);
    if pairs.is_empty() {
        return Err(CollationError::EmptyGroundTruth);
    }
    Ok(pairs)
}

fn check_gt_bounds(s: &SimilarityMatrix, pairs: &[(usize, usize)]) -> Result<(), CollationError> {
    for &(i, j) in pairs {
        if i >= s.rows() {
            return Err(CollationError::IndexOutOfRange {
                index: i,
                len: s.rows(),
            });
        }
        if j >= s.cols() {
            return Err(CollationError::IndexOutOfRange {
                index: j,
                len: s.cols(),
            });
        }
    }
    Ok(())
}

/// Directional accuracies, as percentages, over `n_annotated` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub dir1: f64,
    pub dir2: f64,
    pub avg: f64,
    pub n_annotated: usize,
}

/// `dir1`: share of ground-truth pairs `(i, j)` for which `pred_dir1`
/// predicts `j` for row `i`. `dir2`: share for which `pred_dir2` predicts
/// `i` for column `j`. `None` when there is no ground truth.
pub fn accuracy(
    pred_dir1: &CorrespondenceSet,
    pred_dir2: &CorrespondenceSet,
    gt: &CorrespondenceSet,
) -> Option<Accuracy> {
    let pairs = ground_truth_pairs(gt);
    if pairs.is_empty() {
        return None;
    }
    let rows = pred_dir1.row_predictions();
    let cols = pred_dir2.col_predictions();
    let n = pairs.len();
    let hits1 = pairs.iter().filter(|(i, j)| rows.get(i) == Some(j)).count();
    let hits2 = pairs.iter().filter(|(i, j)| cols.get(j) == Some(i)).count();
    let dir1 = 100.0 * hits1 as f64 / n as f64;
    let dir2 = 100.0 * hits2 as f64 / n as f64;
    Some(Accuracy {
        dir1,
        dir2,
        avg: (dir1 + dir2) / 2.0,
        n_annotated: n,
    })
}

/// How the top-N candidate list for recall@N is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecallMode {
    /// The N highest entries of the whole matrix.
    #[default]
    Global,
    /// The first N pairs accepted by greedy one-to-one matching.
    OneToOne,
}

/// Share of the `N = |gt|` best-ranked candidate pairs that are in the
/// ground truth, as a percentage.
pub fn recall_at_n(s: &SimilarityMatrix, gt: &CorrespondenceSet) -> Result<f64, CollationError> {
    recall_at_n_with(s, gt, RecallMode::Global)
}

pub fn recall_at_n_with(
    s: &SimilarityMatrix,
    gt: &CorrespondenceSet,
    mode: RecallMode,
) -> Result<f64, CollationError> {
    let pairs = nonempty_gt(gt)?;
    check_gt_bounds(s, &pairs)?;
    let truth: HashSet<(usize, usize)> = pairs.iter().copied().collect();
    let n = truth.len();
    let hits = match mode {
        RecallMode::Global => ranked_entries(s)
            .into_iter()
            .take(n)
            .filter(|&(i, j, _)| truth.contains(&(i, j)))
            .count(),
        RecallMode::OneToOne => greedy_pairs(s, n)
            .into_iter()
            .filter(|e| truth.contains(&(e.i, e.j)))
            .count(),
    };
    Ok(100.0 * hits as f64 / n as f64)
}

/// Mean average precision over annotated query rows, with `R` the number of
/// ground-truth partners of each query. Each query's whole row is ranked;
/// AP is the mean of precision at each ground-truth hit, so a single partner
/// ranked second scores 1/2.
pub fn map_at_r(s: &SimilarityMatrix, gt: &CorrespondenceSet) -> Result<f64, CollationError> {
    let pairs = nonempty_gt(gt)?;
    check_gt_bounds(s, &pairs)?;
    let mut partners: BTreeMap<usize, HashSet<usize>> = BTreeMap::new();
    for (i, j) in pairs {
        partners.entry(i).or_default().insert(j);
    }
    let mut total = 0.0;
    for (&i, truth) in &partners {
        let mut order: Vec<usize> = (0..s.cols()).collect();
        let row = s.row(i);
        order.sort_unstable_by(|&a, &b| score_desc(row[a], row[b]).then(a.cmp(&b)));
        let (mut hits, mut sum) = (0usize, 0.0);
        for (rank, j) in order.iter().enumerate() {
            if truth.contains(j) {
                hits += 1;
                sum += hits as f64 / (rank + 1) as f64;
            }
        }
        total += sum / truth.len() as f64;
    }
    Ok(100.0 * total / partners.len() as f64)
}

/// For each `k`, the share of ground-truth pairs `(i, j)` with `j` among
/// the `k` best partners of row `i`.
pub fn nn_recall(
    s: &SimilarityMatrix,
    gt: &CorrespondenceSet,
    ks: &[usize],
) -> Result<BTreeMap<usize, f64>, CollationError> {
    let pairs = nonempty_gt(gt)?;
    check_gt_bounds(s, &pairs)?;
    if ks.contains(&0) {
        return Err(CollationError::InvalidArgument("k must be >= 1".into()));
    }
    // Rank of j in row i = entries that beat it under (score desc, index asc).
    let ranks: Vec<usize> = pairs
        .iter()
        .map(|&(i, j)| {
            let row = s.row(i);
            let v = row[j];
            row.iter()
                .enumerate()
                .filter(|&(l, &x)| x > v || (x == v && l < j))
                .count()
        })
        .collect();
    Ok(ks
        .iter()
        .map(|&k| {
            let hits = ranks.iter().filter(|&&r| r < k).count();
            (k, 100.0 * hits as f64 / pairs.len() as f64)
        })
        .collect())
}

/// All metrics for one manuscript pair. Undefined metrics are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy_dir1: Option<f64>,
    pub accuracy_dir2: Option<f64>,
    pub accuracy_avg: Option<f64>,
    pub recall_at_n: Option<f64>,
    pub map_at_r: Option<f64>,
    pub nn_recall: BTreeMap<usize, f64>,
    pub n_annotated: usize,
}

impl EvalReport {
    fn empty() -> Self {
        Self {
            accuracy_dir1: None,
            accuracy_dir2: None,
            accuracy_avg: None,
            recall_at_n: None,
            map_at_r: None,
            nn_recall: BTreeMap::new(),
            n_annotated: 0,
        }
    }

    /// Accuracy-only report for stored predictions, e.g. a greedy matching
    /// used for both directions.
    pub fn from_predictions(
        pred_dir1: &CorrespondenceSet,
        pred_dir2: &CorrespondenceSet,
        gt: &CorrespondenceSet,
    ) -> Self {
        let mut report = Self::empty();
        report.set_accuracy(accuracy(pred_dir1, pred_dir2, gt));
        report.n_annotated = ground_truth_pairs(gt).len();
        report
    }

    fn set_accuracy(&mut self, acc: Option<Accuracy>) {
        if let Some(a) = acc {
            self.accuracy_dir1 = Some(a.dir1);
            self.accuracy_dir2 = Some(a.dir2);
            self.accuracy_avg = Some(a.avg);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Column labels and cells in `value (count)` form, e.g. `70.5 (295)`.
    pub fn cells(&self) -> Vec<(String, String)> {
        let n = self.n_annotated;
        let mut out = vec![
            ("acc_1".to_owned(), format_cell(self.accuracy_dir1, n)),
            ("acc_2".to_owned(), format_cell(self.accuracy_dir2, n)),
            ("acc_avg".to_owned(), format_cell(self.accuracy_avg, n)),
            ("recall@N".to_owned(), format_cell(self.recall_at_n, n)),
            ("map@R".to_owned(), format_cell(self.map_at_r, n)),
        ];
        for (k, v) in &self.nn_recall {
            out.push((format!("nn@{k}"), format_cell(Some(*v), n)));
        }
        out
    }

    /// One-row aligned table labelled `label` (e.g. `D1-D2`).
    pub fn to_table(&self, label: &str) -> String {
        render_table(&[(label, self)])
    }
}

/// `value (count)` with one decimal; `n/a (count)` when undefined.
pub fn format_cell(value: Option<f64>, count: usize) -> String {
    match value {
        Some(v) => format!("{v:.1} ({count})"),
        None => format!("n/a ({count})"),
    }
}

/// Aligned text table with one row per labelled report. Columns come from
/// the first report.
pub fn render_table(rows: &[(&str, &EvalReport)]) -> String {
    let Some((_, first)) = rows.first() else {
        return String::new();
    };
    let header: Vec<String> = std::iter::once("pair".to_owned())
        .chain(first.cells().into_iter().map(|(h, _)| h))
        .collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(label, r)| {
            std::iter::once(label.to_string())
                .chain(r.cells().into_iter().map(|(_, c)| c))
                .collect()
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            std::iter::once(&header)
                .chain(&body)
                .map(|row| row.get(c).map_or(0, |s| s.chars().count()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in std::iter::once(&header).chain(&body) {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (s, &w))| {
                if c == 0 {
                    format!("{s:<w$}")
                } else {
                    format!("{s:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

/// Options for [`evaluate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub nn_ks: Vec<usize>,
    pub recall_mode: RecallMode,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            nn_ks: DEFAULT_NN_KS.to_vec(),
            recall_mode: RecallMode::Global,
        }
    }
}

/// Full report for a matrix: accuracy of row/column argmax predictions plus
/// the score-based metrics. With empty ground truth every metric is `None`.
pub fn evaluate(
    s: &SimilarityMatrix,
    gt: &CorrespondenceSet,
    options: &EvalOptions,
) -> Result<EvalReport, CollationError> {
    let mut report = EvalReport::empty();
    let pairs = ground_truth_pairs(gt);
    if pairs.is_empty() {
        return Ok(report);
    }
    check_gt_bounds(s, &pairs)?;
    report.n_annotated = pairs.len();
    report.set_accuracy(accuracy(
        &argmax_correspondences(s, Direction::Rows),
        &argmax_correspondences(s, Direction::Cols),
        gt,
    ));
    report.recall_at_n = Some(recall_at_n_with(s, gt, options.recall_mode)?);
    report.map_at_r = Some(map_at_r(s, gt)?);
    report.nn_recall = nn_recall(s, gt, &options.nn_ks)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collation::{Correspondence, Source};

    fn gt(pairs: &[(usize, usize)]) -> CorrespondenceSet {
        CorrespondenceSet::from_entries(
            "A",
            "B",
            pairs.iter().map(|&(i, j)| Correspondence {
                i,
                j,
                status: Status::Confirmed,
                score: 1.0,
                source: Source::Manual,
            }),
        )
    }

    fn preds(pairs: &[(usize, usize)]) -> CorrespondenceSet {
        CorrespondenceSet::from_entries(
            "A",
            "B",
            pairs
                .iter()
                .map(|&(i, j)| Correspondence::predicted(i, j, 0.0, Source::Argmax)),
        )
    }

    fn m(rows: &[Vec<f64>]) -> SimilarityMatrix {
        SimilarityMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn accuracy_arithmetic() {
        let truth = gt(&[(0, 0), (1, 1), (2, 2), (3, 3)]);
        let d1 = preds(&[(0, 0), (1, 1), (2, 2), (3, 0)]);
        let d2 = preds(&[(0, 0), (1, 1), (2, 2), (3, 3)]);
        let acc = accuracy(&d1, &d2, &truth).unwrap();
        assert_eq!((acc.dir1, acc.dir2, acc.avg), (75.0, 100.0, 87.5));
        assert!(accuracy(&d1, &d2, &gt(&[])).is_none());
    }

    #[test]
    fn rejected_gt_entries_ignored() {
        let mut truth = gt(&[(0, 0)]);
        truth.insert(Correspondence {
            i: 1,
            j: 1,
            status: Status::Rejected,
            score: 0.0,
            source: Source::Manual,
        });
        assert_eq!(ground_truth_pairs(&truth), vec![(0, 0)]);
    }

    #[test]
    fn recall_extremes() {
        let s = m(&[vec![0.9, 0.1], vec![0.2, 0.8]]);
        assert_eq!(recall_at_n(&s, &gt(&[(0, 0), (1, 1)])).unwrap(), 100.0);
        assert_eq!(recall_at_n(&s, &gt(&[(0, 1), (1, 0)])).unwrap(), 0.0);
        assert!(matches!(
            recall_at_n(&s, &gt(&[])),
            Err(CollationError::EmptyGroundTruth)
        ));
        assert!(matches!(
            recall_at_n(&s, &gt(&[(5, 0)])),
            Err(CollationError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn recall_one_to_one_differs() {
        // Global top-2 is (0,0),(1,0); greedy accepts (0,0),(1,1).
        let s = m(&[vec![0.9, 0.1], vec![0.8, 0.2]]);
        let truth = gt(&[(0, 0), (1, 1)]);
        assert_eq!(recall_at_n(&s, &truth).unwrap(), 50.0);
        assert_eq!(
            recall_at_n_with(&s, &truth, RecallMode::OneToOne).unwrap(),
            100.0
        );
    }

    #[test]
    fn map_perfect_and_second() {
        let s = m(&[vec![0.9, 0.5, 0.1], vec![0.1, 0.9, 0.5]]);
        assert_eq!(map_at_r(&s, &gt(&[(0, 0), (1, 1)])).unwrap(), 100.0);
        assert_eq!(map_at_r(&s, &gt(&[(0, 1), (1, 2)])).unwrap(), 50.0);
    }

    #[test]
    fn nn_recall_saturates_and_nests() {
        let s = m(&[vec![0.3, 0.9, 0.1, 0.5], vec![0.2, 0.1, 0.8, 0.7]]);
        let truth = gt(&[(0, 0), (1, 3)]);
        let r = nn_recall(&s, &truth, &[1, 2, 3, 4]).unwrap();
        assert_eq!(r[&1], 0.0);
        assert_eq!(r[&2], 50.0);
        assert_eq!(r[&3], 100.0);
        assert_eq!(r[&4], 100.0);
    }

    #[test]
    fn cell_format() {
        assert_eq!(format_cell(Some(70.49), 295), "70.5 (295)");
        assert_eq!(format_cell(None, 0), "n/a (0)");
    }

    #[test]
    fn table_is_aligned() {
        let s = m(&[vec![0.9, 0.1], vec![0.2, 0.8]]);
        let r = evaluate(&s, &gt(&[(0, 0), (1, 1)]), &EvalOptions::default()).unwrap();
        let t = render_table(&[("D1-D2", &r), ("D1-D3", &r)]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("D1-D2"));
        assert!(lines[1].contains("100.0 (2)"));
        assert_eq!(lines[1].len(), lines[2].len());
    }

    #[test]
    fn empty_gt_report_is_undefined() {
        let s = m(&[vec![0.9]]);
        let r = evaluate(&s, &gt(&[]), &EvalOptions::default()).unwrap();
        assert_eq!(r.accuracy_avg, None);
        assert!(r.to_table("x").contains("n/a (0)"));
    }
}
