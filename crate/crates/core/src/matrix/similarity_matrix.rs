use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::MatrixError;
use crate::feature_store::{FMAP_HEADER_LEN, FMAP_MAGIC, FMAP_VERSION};

/// Processing stage a matrix has reached. Transitions only go forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Raw,
    Normalized,
    Propagated,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Raw => "raw",
            Provenance::Normalized => "normalized",
            Provenance::Propagated => "propagated",
        })
    }
}

/// Dense row-major score matrix between the illustrations of two
/// manuscripts (rows: first manuscript, columns: second).
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    provenance: Provenance,
    method_tag: String,
    config_echo: BTreeMap<String, serde_json::Value>,
}

impl SimilarityMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        values: Vec<f64>,
        provenance: Provenance,
        method_tag: impl Into<String>,
    ) -> Result<Self, MatrixError> {
        if values.len() != rows * cols {
            return Err(MatrixError::Shape {
                rows,
                cols,
                len: values.len(),
            });
        }
        if let Some(at) = values.iter().position(|v| !v.is_finite()) {
            return Err(MatrixError::NonFinite {
                i: at / cols.max(1),
                j: at % cols.max(1),
            });
        }
        Ok(Self {
            rows,
            cols,
            values,
            provenance,
            method_tag: method_tag.into(),
            config_echo: BTreeMap::new(),
        })
    }

    /// Raw matrix from nested rows; handy for fixtures.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MatrixError::Ragged);
        }
        Self::new(rows.len(), cols, rows.concat(), Provenance::Raw, "manual")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |i| self.values[i * self.cols + j])
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn method_tag(&self) -> &str {
        &self.method_tag
    }

    pub fn config_echo(&self) -> &BTreeMap<String, serde_json::Value> {
        &self.config_echo
    }

    pub fn with_echo(mut self, key: impl Into<String>, value: serde_json::Value) -> Self {
        self.config_echo.insert(key.into(), value);
        self
    }

    /// Same matrix stamped with a different provenance (for matrices built
    /// outside this crate, e.g. loaded scores that are already normalized).
    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Derives a matrix of the same shape at a later stage, keeping the
    /// method tag and config echo.
    pub(crate) fn derive(
        &self,
        values: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self, MatrixError> {
        if provenance <= self.provenance {
            return Err(MatrixError::Provenance {
                expected: provenance,
                found: self.provenance,
            });
        }
        let mut out = Self::new(
            self.rows,
            self.cols,
            values,
            provenance,
            self.method_tag.clone(),
        )?;
        out.config_echo = self.config_echo.clone();
        Ok(out)
    }

    /// Applies `g` to the row-major values, keeping every other field.
    pub fn map_values(&self, g: impl Fn(usize, usize, f64) -> f64) -> Result<Self, MatrixError> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(at, &v)| g(at / self.cols, at % self.cols, v))
            .collect();
        let mut out = Self::new(
            self.rows,
            self.cols,
            values,
            self.provenance,
            self.method_tag.clone(),
        )?;
        out.config_echo = self.config_echo.clone();
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for j in 0..self.cols {
            values.extend(self.col(j));
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            values,
            provenance: self.provenance,
            method_tag: self.method_tag.clone(),
            config_echo: self.config_echo.clone(),
        }
    }

    /// Writes the JSON header to `header_path` and the values, as an FMAP
    /// payload with `H = rows`, `W = cols`, `C = 1`, next to it (same stem,
    /// `.fmap` extension). Values are stored as `f32`.
    pub fn save(&self, header_path: &Path) -> Result<(), MatrixError> {
        let payload_path = header_path.with_extension("fmap");
        let payload_name = payload_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .ok_or_else(|| MatrixError::Header(format!("bad path {}", header_path.display())))?;
        let header = MatrixHeader {
            rows: self.rows,
            cols: self.cols,
            method: self.method_tag.clone(),
            provenance: self.provenance,
            config: self.config_echo.clone(),
            payload: payload_name,
        };
        write_atomic(&payload_path, |w| self.write_payload(w))?;
        write_atomic(header_path, |w| {
            serde_json::to_writer_pretty(&mut *w, &header)?;
            Ok(w.write_all(b"\n")?)
        })
    }

    pub fn load(header_path: &Path) -> Result<Self, MatrixError> {
        let file = File::open(header_path)?;
        let header: MatrixHeader = serde_json::from_reader(BufReader::new(file))?;
        let base = header_path.parent().unwrap_or(Path::new("."));
        let payload = File::open(base.join(&header.payload))?;
        let (rows, cols, values) = read_payload(BufReader::new(payload))?;
        if (rows, cols) != (header.rows, header.cols) {
            return Err(MatrixError::Header(format!(
                "header says {}x{}, payload is {}x{}",
                header.rows, header.cols, rows, cols
            )));
        }
        let mut m = Self::new(rows, cols, values, header.provenance, header.method)?;
        m.config_echo = header.config;
        Ok(m)
    }

    /// FMAP payload bytes. Zero-sized matrices are permitted here.
    pub fn write_payload<W: Write>(&self, sink: &mut W) -> Result<(), MatrixError> {
        let mut header = [0u8; FMAP_HEADER_LEN];
        header[0..4].copy_from_slice(&FMAP_MAGIC);
        header[4..8].copy_from_slice(&FMAP_VERSION.to_le_bytes());
        header[8..12].copy_from_slice(&(self.rows as u32).to_le_bytes());
        header[12..16].copy_from_slice(&(self.cols as u32).to_le_bytes());
        header[16..20].copy_from_slice(&1u32.to_le_bytes());
        sink.write_all(&header)?;
        let mut bytes = Vec::with_capacity(self.values.len() * 4);
        for &v in &self.values {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
        sink.write_all(&bytes)?;
        Ok(())
    }
}

fn read_payload<R: Read>(mut source: R) -> Result<(usize, usize, Vec<f64>), MatrixError> {
    let mut header = [0u8; FMAP_HEADER_LEN];
    source.read_exact(&mut header)?;
    let word = |at: usize| u32::from_le_bytes(header[at..at + 4].try_into().unwrap()) as usize;
    if header[0..4] != FMAP_MAGIC || word(4) != FMAP_VERSION as usize || word(16) != 1 {
        return Err(MatrixError::Header(
            "payload is not a C=1 FMAP v1 file".into(),
        ));
    }
    let (rows, cols) = (word(8), word(12));
    let mut bytes = vec![0u8; rows * cols * 4];
    source.read_exact(&mut bytes)?;
    let values = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    Ok((rows, cols, values))
}

fn write_atomic(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> Result<(), MatrixError>,
) -> Result<(), MatrixError> {
    let tmp: PathBuf = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixHeader {
    rows: usize,
    cols: usize,
    method: String,
    provenance: Provenance,
    #[serde(default)]
    config: BTreeMap<String, serde_json::Value>,
    payload: String,
}
