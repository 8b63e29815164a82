//! Dense feature grids and the FMAP binary codec.
//!
//! Layout (all integers and floats little-endian):
//!
//! | offset | size | field                         |
//! |--------|------|-------------------------------|
//! | 0      | 4    | magic `b"FMAP"`               |
//! | 4      | 4    | format version (`u32`, = 1)   |
//! | 8      | 4    | height `H` (`u32`)            |
//! | 12     | 4    | width `W` (`u32`)             |
//! | 16     | 4    | channels `C` (`u32`)          |
//! | 20     | 4    | reserved (`u32`, written 0)   |
//! | 24     | 4·HWC| `f32` payload, row-major `[H][W][C]` |

use std::io::{self, Read, Write};

use super::FeatureError;

pub const FMAP_MAGIC: [u8; 4] = *b"FMAP";
pub const FMAP_VERSION: u32 = 1;
pub const FMAP_HEADER_LEN: usize = 24;

/// An `height × width` grid of `channels`-dimensional descriptors.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl FeatureMap {
    /// Builds a map, checking the shape and that every value is finite.
    pub fn new(
        height: usize,
        width: usize,
        channels: usize,
        data: Vec<f32>,
    ) -> Result<Self, FeatureError> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(FeatureError::EmptyDimension {
                height,
                width,
                channels,
            });
        }
        let expected = height * width * channels;
        if data.len() != expected {
            return Err(FeatureError::DataLength {
                expected,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite { index });
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    /// All-zero map of the given shape.
    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self, FeatureError> {
        Self::new(
            height,
            width,
            channels,
            vec![0.0; height * width * channels],
        )
    }

    /// Builds a map by evaluating `f(row, col)` for every cell.
    pub fn from_fn<F>(
        height: usize,
        width: usize,
        channels: usize,
        mut f: F,
    ) -> Result<Self, FeatureError>
    where
        F: FnMut(usize, usize) -> Vec<f32>,
    {
        let mut data = Vec::with_capacity(height * width * channels);
        for r in 0..height {
            for c in 0..width {
                let v = f(r, c);
                if v.len() != channels {
                    return Err(FeatureError::DataLength {
                        expected: channels,
                        actual: v.len(),
                    });
                }
                data.extend_from_slice(&v);
            }
        }
        Self::new(height, width, channels, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Number of grid cells (`H·W`).
    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest grid dimension.
    pub fn extent(&self) -> usize {
        self.height.max(self.width)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Descriptor at linear cell index `i` (row-major).
    pub fn descriptor(&self, i: usize) -> &[f32] {
        &self.data[i * self.channels..(i + 1) * self.channels]
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.channels)
    }

    /// Position of cell `i` in normalized grid coordinates: cell centres,
    /// scaled so the largest grid dimension spans `[0, 1]`. Returned as `[x, y]`.
    pub fn position(&self, i: usize) -> [f64; 2] {
        let extent = self.extent() as f64;
        let (r, c) = (i / self.width, i % self.width);
        [(c as f64 + 0.5) / extent, (r as f64 + 0.5) / extent]
    }

    /// Applies `f` to every value, keeping the shape. Used by fixtures.
    pub fn map_values(&self, mut f: impl FnMut(f32) -> f32) -> Result<Self, FeatureError> {
        Self::new(
            self.height,
            self.width,
            self.channels,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Serializes to the FMAP layout.
    pub fn write_to<W: Write>(&self, mut sink: W) -> io::Result<()> {
        let mut header = [0u8; FMAP_HEADER_LEN];
        header[0..4].copy_from_slice(&FMAP_MAGIC);
        header[4..8].copy_from_slice(&FMAP_VERSION.to_le_bytes());
        header[8..12].copy_from_slice(&(self.height as u32).to_le_bytes());
        header[12..16].copy_from_slice(&(self.width as u32).to_le_bytes());
        header[16..20].copy_from_slice(&(self.channels as u32).to_le_bytes());
        sink.write_all(&header)?;
        let mut payload = Vec::with_capacity(self.data.len() * 4);
        for v in &self.data {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        sink.write_all(&payload)?;
        sink.flush()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FMAP_HEADER_LEN + self.data.len() * 4);
        self.write_to(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    /// Parses the FMAP layout, validating magic, version, payload length and
    /// finiteness.
    pub fn read_from<R: Read>(mut source: R) -> Result<Self, FeatureError> {
        let mut header = [0u8; FMAP_HEADER_LEN];
        read_fully(&mut source, &mut header, "header")?;
        if header[0..4] != FMAP_MAGIC {
            return Err(FeatureError::BadMagic([
                header[0], header[1], header[2], header[3],
            ]));
        }
        let word = |at: usize| u32::from_le_bytes(header[at..at + 4].try_into().unwrap());
        let version = word(4);
        if version != FMAP_VERSION {
            return Err(FeatureError::VersionMismatch {
                found: version,
                expected: FMAP_VERSION,
            });
        }
        let (height, width, channels) = (word(8) as usize, word(12) as usize, word(16) as usize);
        let count = height
            .checked_mul(width)
            .and_then(|n| n.checked_mul(channels))
            .ok_or(FeatureError::EmptyDimension {
                height,
                width,
                channels,
            })?;
        let mut payload = vec![0u8; count * 4];
        read_fully(&mut source, &mut payload, "payload")?;
        let data = payload
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        Self::new(height, width, channels, data)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FeatureError> {
        Self::read_from(bytes)
    }
}

fn read_fully<R: Read>(
    source: &mut R,
    buf: &mut [u8],
    section: &'static str,
) -> Result<(), FeatureError> {
    let mut filled = 0;
    while filled < buf.len() {
        match source.read(&mut buf[filled..]) {
            Ok(0) => {
                return Err(FeatureError::Truncated {
                    section,
                    expected: buf.len(),
                    actual: filled,
                })
            }
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(FeatureError::Io(e)),
        }
    }
    Ok(())
}

/// Writes a map to the given sink in FMAP layout.
pub fn write_feature_map<W: Write>(map: &FeatureMap, destination: W) -> io::Result<()> {
    map.write_to(destination)
}

/// Reads a map from an FMAP stream.
pub fn read_feature_map<R: Read>(source: R) -> Result<FeatureMap, FeatureError> {
    FeatureMap::read_from(source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_map_layout() {
        let map = FeatureMap::zeros(1, 1, 1).unwrap();
        let bytes = map.to_bytes();
        assert_eq!(bytes.len(), 28);
        assert_eq!(&bytes[..4], b"FMAP");
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[24..], &[0, 0, 0, 0]);
    }

    #[test]
    fn header_dims_and_payload_len() {
        let map = FeatureMap::zeros(2, 3, 4).unwrap();
        let bytes = map.to_bytes();
        assert_eq!(bytes.len() - FMAP_HEADER_LEN, 96);
        assert_eq!(&bytes[8..12], &2u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &3u32.to_le_bytes());
        assert_eq!(&bytes[16..20], &4u32.to_le_bytes());
    }

    #[test]
    fn bad_magic() {
        let mut bytes = FeatureMap::zeros(1, 1, 1).unwrap().to_bytes();
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(
            FeatureMap::from_bytes(&bytes),
            Err(FeatureError::BadMagic(m)) if &m == b"XXXX"
        ));
    }

    #[test]
    fn version_mismatch() {
        let mut bytes = FeatureMap::zeros(1, 1, 1).unwrap().to_bytes();
        bytes[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(
            FeatureMap::from_bytes(&bytes),
            Err(FeatureError::VersionMismatch { found: 2, .. })
        ));
    }

    #[test]
    fn truncated_payload() {
        let bytes = FeatureMap::zeros(2, 2, 2).unwrap().to_bytes();
        let err = FeatureMap::from_bytes(&bytes[..bytes.len() - 1]).unwrap_err();
        assert!(matches!(
            err,
            FeatureError::Truncated {
                section: "payload",
                ..
            }
        ));
        let err = FeatureMap::from_bytes(&bytes[..10]).unwrap_err();
        assert!(matches!(
            err,
            FeatureError::Truncated {
                section: "header",
                ..
            }
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let mut bytes = FeatureMap::zeros(1, 2, 1).unwrap().to_bytes();
        bytes[28..32].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(
            FeatureMap::from_bytes(&bytes),
            Err(FeatureError::NonFinite { index: 1 })
        ));
        assert!(FeatureMap::new(1, 1, 1, vec![f32::INFINITY]).is_err());
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(
            FeatureMap::zeros(0, 3, 2),
            Err(FeatureError::EmptyDimension { .. })
        ));
    }

    #[test]
    fn positions_span_largest_axis() {
        let map = FeatureMap::zeros(2, 4, 1).unwrap();
        assert_eq!(map.position(0), [0.125, 0.125]);
        assert_eq!(map.position(7), [0.875, 0.375]);
    }

    proptest! {
        #[test]
        fn write_read_is_identity(
            h in 1usize..5, w in 1usize..5, c in 1usize..6,
            seed in proptest::collection::vec(-1e6f32..1e6, 100)
        ) {
            let data: Vec<f32> = (0..h * w * c).map(|i| seed[i % seed.len()] * (i as f32 + 1.0).sqrt()).collect();
            let map = FeatureMap::new(h, w, c, data).unwrap();
            let back = read_feature_map(map.to_bytes().as_slice()).unwrap();
            prop_assert_eq!(back.to_bytes(), map.to_bytes());
            prop_assert_eq!(back, map);
        }
    }
}
