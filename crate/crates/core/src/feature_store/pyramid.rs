use std::collections::HashSet;

use super::{FeatureError, FeatureMap};

/// Scale tags used for the multi-scale target pyramid.
pub const DEFAULT_SCALE_TAGS: [u32; 5] = [18, 19, 20, 21, 22];

/// Per-illustration feature set: one square map for position-wise
/// comparison and an ordered list of aspect-preserving maps, one per scale
/// tag, where the tag equals the largest grid dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePyramid {
    illustration_id: String,
    fixed_map: FeatureMap,
    scale_maps: Vec<(u32, FeatureMap)>,
}

impl FeaturePyramid {
    pub fn new(
        illustration_id: impl Into<String>,
        fixed_map: FeatureMap,
        scale_maps: Vec<(u32, FeatureMap)>,
    ) -> Result<Self, FeatureError> {
        let illustration_id = illustration_id.into();
        if fixed_map.height() != fixed_map.width() {
            return Err(FeatureError::FixedMapNotSquare {
                illustration: illustration_id,
                height: fixed_map.height(),
                width: fixed_map.width(),
            });
        }
        if scale_maps.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(FeatureError::ScaleOrder {
                illustration: illustration_id,
                tags: scale_maps.iter().map(|(t, _)| *t).collect(),
            });
        }
        let channels = fixed_map.channels();
        for (tag, map) in &scale_maps {
            if map.extent() != *tag as usize {
                return Err(FeatureError::ShapeMismatch {
                    illustration: illustration_id,
                    scale_tag: *tag,
                    height: map.height(),
                    width: map.width(),
                });
            }
            if map.channels() != channels {
                return Err(FeatureError::ChannelMismatch {
                    illustration: illustration_id,
                    expected: channels,
                    found: map.channels(),
                });
            }
        }
        Ok(Self {
            illustration_id,
            fixed_map,
            scale_maps,
        })
    }

    pub fn illustration_id(&self) -> &str {
        &self.illustration_id
    }

    pub fn fixed_map(&self) -> &FeatureMap {
        &self.fixed_map
    }

    pub fn scale_maps(&self) -> &[(u32, FeatureMap)] {
        &self.scale_maps
    }

    pub fn scale_tags(&self) -> impl Iterator<Item = u32> + '_ {
        self.scale_maps.iter().map(|(t, _)| *t)
    }

    pub fn scale(&self, tag: u32) -> Option<&FeatureMap> {
        self.scale_maps
            .iter()
            .find(|(t, _)| *t == tag)
            .map(|(_, m)| m)
    }

    pub fn channels(&self) -> usize {
        self.fixed_map.channels()
    }
}

/// The illustrations of one manuscript, in folio order. Position in
/// `pyramids` is the index used by every similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ManuscriptFeatures {
    manuscript_id: String,
    pyramids: Vec<FeaturePyramid>,
}

impl ManuscriptFeatures {
    pub fn new(
        manuscript_id: impl Into<String>,
        pyramids: Vec<FeaturePyramid>,
    ) -> Result<Self, FeatureError> {
        let mut seen = HashSet::new();
        for p in &pyramids {
            if !seen.insert(p.illustration_id()) {
                return Err(FeatureError::DuplicateIllustration(
                    p.illustration_id().to_owned(),
                ));
            }
        }
        if let Some(first) = pyramids.first() {
            let channels = first.channels();
            if let Some(bad) = pyramids.iter().find(|p| p.channels() != channels) {
                return Err(FeatureError::ChannelMismatch {
                    illustration: bad.illustration_id().to_owned(),
                    expected: channels,
                    found: bad.channels(),
                });
            }
        }
        Ok(Self {
            manuscript_id: manuscript_id.into(),
            pyramids,
        })
    }

    pub fn manuscript_id(&self) -> &str {
        &self.manuscript_id
    }

    pub fn pyramids(&self) -> &[FeaturePyramid] {
        &self.pyramids
    }

    pub fn len(&self) -> usize {
        self.pyramids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pyramids.is_empty()
    }

    /// Descriptor dimension shared by all illustrations, if any.
    pub fn channels(&self) -> Option<usize> {
        self.pyramids.first().map(FeaturePyramid::channels)
    }

    pub fn index_of(&self, illustration_id: &str) -> Option<usize> {
        self.pyramids
            .iter()
            .position(|p| p.illustration_id() == illustration_id)
    }
}
