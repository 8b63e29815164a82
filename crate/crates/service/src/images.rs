//! Illustration images for display. The pipeline never reads them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageSize {
    Thumbnail,
    #[default]
    Full,
}

impl FromStr for ImageSize {
    type Err = ServiceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "thumbnail" | "thumb" => Ok(ImageSize::Thumbnail),
            "full" => Ok(ImageSize::Full),
            other => Err(ServiceError::InvalidArgument(format!(
                "unknown image size {other:?}"
            ))),
        }
    }
}

/// Image files of one illustration, relative to the project directory
/// unless absolute. `missing` records that no image exists, which keeps the
/// id resolvable for the review UI.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ImageEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thumbnail: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full: Option<PathBuf>,
    #[serde(default)]
    pub missing: bool,
}

impl ImageEntry {
    pub fn full(path: impl Into<PathBuf>) -> Self {
        Self {
            full: Some(path.into()),
            ..Self::default()
        }
    }

    pub fn missing() -> Self {
        Self {
            missing: true,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImageStore {
    entries: BTreeMap<String, ImageEntry>,
}

impl ImageStore {
    pub fn insert(&mut self, illustration_id: impl Into<String>, entry: ImageEntry) {
        self.entries.insert(illustration_id.into(), entry);
    }

    pub fn get(&self, illustration_id: &str) -> Option<&ImageEntry> {
        self.entries.get(illustration_id)
    }

    pub fn contains(&self, illustration_id: &str) -> bool {
        self.entries.contains_key(illustration_id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The file to serve for `illustration_id`. A thumbnail request falls
    /// back to the full image and vice versa.
    pub fn resolve(
        &self,
        project_dir: &Path,
        illustration_id: &str,
        size: ImageSize,
    ) -> Result<PathBuf, ServiceError> {
        let entry = self
            .get(illustration_id)
            .ok_or_else(|| ServiceError::UnknownImage(illustration_id.to_owned()))?;
        let (first, second) = match size {
            ImageSize::Thumbnail => (&entry.thumbnail, &entry.full),
            ImageSize::Full => (&entry.full, &entry.thumbnail),
        };
        match first.as_ref().or(second.as_ref()) {
            Some(path) if !entry.missing => Ok(project_dir.join(path)),
            _ => Err(ServiceError::ImageMissing(illustration_id.to_owned())),
        }
    }
}

/// MIME type for an image path, by extension.
pub(crate) fn content_type(path: &Path) -> &'static str {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("png") => "image/png",
        Some("gif") => "image/gif",
        Some("webp") => "image/webp",
        Some("tif" | "tiff") => "image/tiff",
        _ => "application/octet-stream",
    }
}
