use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::CollationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Predicted,
    Confirmed,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Argmax,
    Greedy,
    Manual,
}

/// One illustration-level correspondence: row `i` of the first manuscript,
/// column `j` of the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub i: usize,
    pub j: usize,
    pub status: Status,
    pub score: f64,
    pub source: Source,
}

impl Correspondence {
    pub fn predicted(i: usize, j: usize, score: f64, source: Source) -> Self {
        Self {
            i,
            j,
            status: Status::Predicted,
            score,
            source,
        }
    }
}

/// Correspondences between two manuscripts. Each `(i, j)` appears at most
/// once, so a pair is never both confirmed and rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSet", into = "RawSet")]
pub struct CorrespondenceSet {
    pair: (String, String),
    entries: Vec<Correspondence>,
    index: HashMap<(usize, usize), usize>,
}

#[derive(Serialize, Deserialize)]
struct RawSet {
    pair: (String, String),
    entries: Vec<Correspondence>,
}

impl TryFrom<RawSet> for CorrespondenceSet {
    type Error = CollationError;

    fn try_from(raw: RawSet) -> Result<Self, Self::Error> {
        let mut set = CorrespondenceSet::new(raw.pair.0, raw.pair.1);
        for e in raw.entries {
            if set.contains(e.i, e.j) {
                return Err(CollationError::DuplicateEntry { i: e.i, j: e.j });
            }
            set.insert(e);
        }
        Ok(set)
    }
}

impl From<CorrespondenceSet> for RawSet {
    fn from(set: CorrespondenceSet) -> Self {
        RawSet {
            pair: set.pair,
            entries: set.entries,
        }
    }
}

impl CorrespondenceSet {
    pub fn new(first: impl Into<String>, second: impl Into<String>) -> Self {
        Self {
            pair: (first.into(), second.into()),
            entries: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn from_entries(
        first: impl Into<String>,
        second: impl Into<String>,
        entries: impl IntoIterator<Item = Correspondence>,
    ) -> Self {
        let mut set = Self::new(first, second);
        for e in entries {
            set.insert(e);
        }
        set
    }

    pub fn pair(&self) -> (&str, &str) {
        (&self.pair.0, &self.pair.1)
    }

    /// Inserts `entry`, replacing any existing entry for the same `(i, j)`.
    /// Returns the replaced entry.
    pub fn insert(&mut self, entry: Correspondence) -> Option<Correspondence> {
        match self.index.get(&(entry.i, entry.j)) {
            Some(&at) => Some(std::mem::replace(&mut self.entries[at], entry)),
            None => {
                self.index.insert((entry.i, entry.j), self.entries.len());
                self.entries.push(entry);
                None
            }
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&Correspondence> {
        self.index.get(&(i, j)).map(|&at| &self.entries[at])
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.index.contains_key(&(i, j))
    }

    pub fn status(&self, i: usize, j: usize) -> Option<Status> {
        self.get(i, j).map(|e| e.status)
    }

    pub fn is_rejected(&self, i: usize, j: usize) -> bool {
        self.status(i, j) == Some(Status::Rejected)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Correspondence> {
        self.entries.iter()
    }

    pub fn entries(&self) -> &[Correspondence] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn with_status(&self, status: Status) -> impl Iterator<Item = &Correspondence> {
        self.entries.iter().filter(move |e| e.status == status)
    }

    /// First prediction for each row (`i → j`).
    pub fn row_predictions(&self) -> HashMap<usize, usize> {
        let mut map = HashMap::new();
        for e in &self.entries {
            map.entry(e.i).or_insert(e.j);
        }
        map
    }

    /// First prediction for each column (`j → i`).
    pub fn col_predictions(&self) -> HashMap<usize, usize> {
        let mut map = HashMap::new();
        for e in &self.entries {
            map.entry(e.j).or_insert(e.i);
        }
        map
    }

    pub fn to_json(&self) -> Result<String, CollationError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, CollationError> {
        Ok(serde_json::from_str(text)?)
    }

    /// CSV with columns `i,j,status,score,source`.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<(), CollationError> {
        let mut writer = csv::Writer::from_writer(sink);
        for e in &self.entries {
            writer.serialize(e)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(
        source: R,
        first: impl Into<String>,
        second: impl Into<String>,
    ) -> Result<Self, CollationError> {
        let mut reader = csv::Reader::from_reader(source);
        let mut set = Self::new(first, second);
        for row in reader.deserialize() {
            let e: Correspondence = row?;
            if set.contains(e.i, e.j) {
                return Err(CollationError::DuplicateEntry { i: e.i, j: e.j });
            }
            set.insert(e);
        }
        Ok(set)
    }
}

impl<'a> IntoIterator for &'a CorrespondenceSet {
    type Item = &'a Correspondence;
    type IntoIter = std::slice::Iter<'a, Correspondence>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> CorrespondenceSet {
        let mut set = CorrespondenceSet::new("D1", "D2");
        set.insert(Correspondence::predicted(0, 3, 0.75, Source::Greedy));
        set.insert(Correspondence {
            i: 2,
            j: 1,
            status: Status::Rejected,
            score: -0.5,
            source: Source::Manual,
        });
        set
    }

    #[test]
    fn insert_replaces_status() {
        let mut set = sample();
        set.insert(Correspondence {
            i: 2,
            j: 1,
            status: Status::Confirmed,
            score: -0.5,
            source: Source::Manual,
        });
        assert_eq!(set.len(), 2);
        assert_eq!(set.status(2, 1), Some(Status::Confirmed));
    }

    #[test]
    fn json_shape() {
        let json: serde_json::Value = serde_json::from_str(&sample().to_json().unwrap()).unwrap();
        assert_eq!(json["pair"], serde_json::json!(["D1", "D2"]));
        assert_eq!(json["entries"][1]["status"], "rejected");
        assert_eq!(json["entries"][0]["source"], "greedy");
    }

    #[test]
    fn duplicate_rejected_on_load() {
        let text = r#"{"pair":["a","b"],"entries":[
            {"i":0,"j":0,"status":"confirmed","score":1.0,"source":"manual"},
            {"i":0,"j":0,"status":"rejected","score":1.0,"source":"manual"}]}"#;
        assert!(CorrespondenceSet::from_json(text).is_err());
    }

    #[test]
    fn csv_rows_match_entries() {
        let mut out = Vec::new();
        sample().write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "i,j,status,score,source");
        assert_eq!(lines.len(), 1 + sample().len());
    }

    proptest! {
        #[test]
        fn json_and_csv_roundtrip(raw in proptest::collection::vec((0usize..30, 0usize..30, 0u8..3, -1.0f64..1.0), 0..25)) {
            let mut set = CorrespondenceSet::new("x", "y");
            for (i, j, s, score) in raw {
                let status = [Status::Predicted, Status::Confirmed, Status::Rejected][s as usize];
                set.insert(Correspondence { i, j, status, score, source: Source::Argmax });
            }
            prop_assert_eq!(&CorrespondenceSet::from_json(&set.to_json().unwrap()).unwrap(), &set);
            let mut buf = Vec::new();
            set.write_csv(&mut buf).unwrap();
            prop_assert_eq!(&CorrespondenceSet::read_csv(buf.as_slice(), "x", "y").unwrap(), &set);
        }
    }
}
