//! Manifest-driven dataset loading and deterministic probe/gallery splits.
//!
//! A dataset is a UTF-8 CSV manifest with header `person_id,camera_id,image_path`
//! whose image paths are resolved relative to the manifest file. PNG and
//! binary PPM rasters are accepted.

mod synth;

pub use synth::{generate_synthetic, Perturbation, SyntheticSpec};

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use image::RgbImage;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Smallest usable image height: one row per stripe at the largest stripe
/// count of the default grid.
pub const MIN_IMAGE_HEIGHT: u32 = 25;

const MANIFEST_HEADER: [&str; 3] = ["person_id", "camera_id", "image_path"];

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read manifest {path}: {source}")]
    ManifestIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest line {line}: {message}")]
    MalformedRow { line: u64, message: String },
    #[error("manifest header must be `person_id,camera_id,image_path`, got {0:?}")]
    BadHeader(String),
    #[error("duplicate record for person {person_id:?} and image {image_path:?} (line {line})")]
    DuplicateRecord {
        person_id: String,
        image_path: String,
        line: u64,
    },
    #[error("cannot decode image {path}: {source}")]
    UndecodableImage {
        path: PathBuf,
        source: image::ImageError,
    },
    #[error("need at least 2 persons with 2+ images to build a split, got {0}")]
    InsufficientData(usize),
    #[error("invalid synthetic dataset request: {0}")]
    InvalidSyntheticSpec(String),
    #[error("cannot write {path}: {source}")]
    WriteFailed {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot encode image {path}: {source}")]
    ImageWriteFailed {
        path: PathBuf,
        source: image::ImageError,
    },
}

/// One dataset row: an identity, the camera it was seen from, and the
/// decoded image.
#[derive(Clone, PartialEq)]
pub struct PersonRecord {
    pub person_id: String,
    pub camera_id: String,
    pub image_path: PathBuf,
    image: Arc<RgbImage>,
}

impl PersonRecord {
    pub fn image(&self) -> &RgbImage {
        &self.image
    }
}

impl fmt::Debug for PersonRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PersonRecord")
            .field("person_id", &self.person_id)
            .field("camera_id", &self.camera_id)
            .field("image_path", &self.image_path)
            .field("size", &(self.image.width(), self.image.height()))
            .finish()
    }
}

/// Records accepted from a manifest, plus warnings for rows whose images
/// were rejected as too small.
#[derive(Debug, Clone)]
pub struct LoadedManifest {
    pub records: Vec<PersonRecord>,
    pub warnings: Vec<String>,
}

/// Reads a manifest and decodes every referenced image, in file order.
/// Images shorter than [`MIN_IMAGE_HEIGHT`] are excluded with a warning;
/// malformed rows, duplicates, and undecodable images are errors.
pub fn load_manifest(path: &Path) -> Result<LoadedManifest, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| map_csv_error(e, path))?;

    let headers = reader.headers().map_err(|e| map_csv_error(e, path))?;
    let header_fields: Vec<&str> = headers.iter().map(str::trim).collect();
    if header_fields != MANIFEST_HEADER {
        return Err(DatasetError::BadHeader(header_fields.join(",")));
    }

    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();

    for row in reader.records() {
        let row = row.map_err(|e| map_csv_error(e, path))?;
        let line = row.position().map_or(0, |p| p.line());
        let person_id = row.get(0).unwrap_or("").trim().to_string();
        let camera_id = row.get(1).unwrap_or("").trim().to_string();
        let rel_path = row.get(2).unwrap_or("").trim().to_string();
        if person_id.is_empty() {
            return Err(DatasetError::MalformedRow {
                line,
                message: "empty person_id".to_string(),
            });
        }
        if rel_path.is_empty() {
            return Err(DatasetError::MalformedRow {
                line,
                message: "empty image_path".to_string(),
            });
        }
        if !seen.insert((person_id.clone(), rel_path.clone())) {
            return Err(DatasetError::DuplicateRecord {
                person_id,
                image_path: rel_path,
                line,
            });
        }

        let image_path = base.join(&rel_path);
        let decoded = image::ImageReader::open(&image_path)
            .map_err(|e| DatasetError::UndecodableImage {
                path: image_path.clone(),
                source: image::ImageError::IoError(e),
            })?
            .with_guessed_format()
            .map_err(|e| DatasetError::UndecodableImage {
                path: image_path.clone(),
                source: image::ImageError::IoError(e),
            })?
            .decode()
            .map_err(|e| DatasetError::UndecodableImage {
                path: image_path.clone(),
                source: e,
            })?;

        if decoded.height() < MIN_IMAGE_HEIGHT {
            warnings.push(format!(
                "line {line}: image {} is {} rows tall (< {MIN_IMAGE_HEIGHT}), record excluded",
                image_path.display(),
                decoded.height()
            ));
            continue;
        }
        records.push(PersonRecord {
            person_id,
            camera_id,
            image_path,
            image: Arc::new(decoded.to_rgb8()),
        });
    }
    Ok(LoadedManifest { records, warnings })
}

fn map_csv_error(err: csv::Error, path: &Path) -> DatasetError {
    let line = match err.kind() {
        csv::ErrorKind::UnequalLengths { pos, .. } => pos.as_ref().map(|p| p.line()),
        csv::ErrorKind::Utf8 { pos, .. } => pos.as_ref().map(|p| p.line()),
        _ => None,
    };
    match (line, err.kind()) {
        (Some(line), _) => DatasetError::MalformedRow {
            line,
            message: err.to_string(),
        },
        (None, csv::ErrorKind::Io(_)) => {
            let message = err.to_string();
            DatasetError::ManifestIo {
                path: path.to_path_buf(),
                source: std::io::Error::other(message),
            }
        }
        _ => DatasetError::MalformedRow {
            line: 0,
            message: err.to_string(),
        },
    }
}

/// Single-shot closed-set split: one probe and one gallery image per
/// identity with two or more images, single-image identities as gallery
/// distractors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeGallerySplit {
    pub probes: Vec<PersonRecord>,
    pub gallery: Vec<PersonRecord>,
    pub seed: u64,
}

/// Builds the probe/gallery split with a seeded shuffle per identity,
/// preferring probe and gallery images from different cameras where
/// possible. Identical `(records, seed)` always yields an identical split.
pub fn make_split(records: &[PersonRecord], seed: u64) -> Result<ProbeGallerySplit, DatasetError> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<usize>> = HashMap::new();
    for (idx, r) in records.iter().enumerate() {
        groups
            .entry(r.person_id.as_str())
            .or_insert_with(|| {
                order.push(r.person_id.as_str());
                Vec::new()
            })
            .push(idx);
    }

    let multi = order
        .iter()
        .filter(|id| groups[*id].len() >= 2)
        .count();
    if multi < 2 {
        return Err(DatasetError::InsufficientData(multi));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = Vec::new();
    let mut gallery = Vec::new();
    for id in order {
        let mut indices = groups[id].clone();
        if indices.len() == 1 {
            gallery.push(records[indices[0]].clone());
            continue;
        }
        indices.shuffle(&mut rng);
        let probe = &records[indices[0]];
        let gallery_idx = indices[1..]
            .iter()
            .copied()
            .find(|&i| records[i].camera_id != probe.camera_id)
            .unwrap_or(indices[1]);
        probes.push(probe.clone());
        gallery.push(records[gallery_idx].clone());
    }
    Ok(ProbeGallerySplit {
        probes,
        gallery,
        seed,
    })
}
