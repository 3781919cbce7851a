//! On-disk dataset layout: `root/{normal,talking,yawning}/<video>_<frame>.pgm`,
//! optionally overridden by `root/manifest.csv`.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmDecoder, PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageDecoder};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{DataError, Result};
use crate::image::{grayscale_pixel, resize, GrayImage};
use crate::sample::{FrameSample, Label};

pub const MANIFEST: &str = "manifest.csv";

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Resize every frame to `n x n` while loading.
    pub resize_to: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FileError {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug)]
pub struct LoadedDataset {
    /// In deterministic order: by class, then file name (or manifest order).
    pub samples: Vec<FrameSample>,
    /// Files that could not be used; loading carries on past them.
    pub errors: Vec<FileError>,
}

impl LoadedDataset {
    pub fn count(&self) -> usize {
        self.samples.len()
    }
}

/// Splits `M042_000017` into `("M042", 17)`.
pub fn parse_frame_name(stem: &str) -> Option<(String, u64)> {
    let (video, frame) = stem.rsplit_once('_')?;
    if video.is_empty() || frame.is_empty() || !frame.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((video.to_string(), frame.parse().ok()?))
}

/// Reads an 8-bit binary PGM (P5, maxval 255). Binary PPM (P6) is accepted
/// and converted to gray.
pub fn read_pgm(path: &Path) -> std::result::Result<GrayImage, String> {
    let file = File::open(path).map_err(|e| e.to_string())?;
    let decoder = PnmDecoder::new(BufReader::new(file)).map_err(|e| e.to_string())?;
    let header = decoder.header();
    let max = header.maximal_sample();
    if max != 255 {
        return Err(format!("maxval {max}, expected 255"));
    }
    let (w, h) = (header.width() as usize, header.height() as usize);
    let subtype = header.subtype();
    let rgb = match subtype {
        PnmSubtype::Graymap(SampleEncoding::Binary) => false,
        PnmSubtype::Pixmap(SampleEncoding::Binary) => true,
        other => return Err(format!("unsupported PNM subtype {other:?}, expected binary P5")),
    };
    let mut buf = vec![0u8; decoder.total_bytes() as usize];
    decoder.read_image(&mut buf).map_err(|e| e.to_string())?;
    let pixels = if rgb {
        buf.chunks_exact(3).map(|p| grayscale_pixel(p[0], p[1], p[2])).collect()
    } else {
        buf
    };
    GrayImage::new(w, h, pixels).map_err(|e| e.to_string())
}

pub fn write_pgm(path: &Path, image: &GrayImage) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    PnmEncoder::new(out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .encode(image.pixels.as_slice(), image.width as u32, image.height as u32, ExtendedColorType::L8)
        .map_err(|e| DataError::File {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    path: String,
    label: String,
    video_id: String,
    frame_index: u64,
}

struct Entry {
    path: PathBuf,
    label: Label,
    video_id: String,
    frame_index: u64,
}

fn folder_entries(root: &Path, errors: &mut Vec<FileError>) -> Result<Vec<Entry>> {
    let mut entries = Vec::new();
    for label in Label::ALL {
        let dir = root.join(label.folder());
        if !dir.is_dir() {
            return Err(DataError::Layout(format!("missing class folder {}", dir.display())));
        }
        let mut files: Vec<PathBuf> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        for path in files {
            let parsed = path
                .extension()
                .filter(|e| e.eq_ignore_ascii_case("pgm"))
                .and_then(|_| path.file_stem()?.to_str())
                .and_then(parse_frame_name);
            match parsed {
                Some((video_id, frame_index)) => entries.push(Entry {
                    path,
                    label,
                    video_id,
                    frame_index,
                }),
                None => errors.push(FileError {
                    path,
                    reason: "file name does not match <video_id>_<frame_index>.pgm".into(),
                }),
            }
        }
    }
    Ok(entries)
}

fn manifest_entries(root: &Path, manifest: &Path) -> Result<Vec<Entry>> {
    let mut reader = csv::Reader::from_path(manifest)?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["path", "label", "video_id", "frame_index"] {
        return Err(DataError::Layout(format!(
            "{} header must be path,label,video_id,frame_index",
            manifest.display()
        )));
    }
    reader
        .deserialize::<ManifestRow>()
        .map(|row| {
            let row = row?;
            Ok(Entry {
                path: root.join(&row.path),
                label: row.label.parse()?,
                video_id: row.video_id,
                frame_index: row.frame_index,
            })
        })
        .collect()
}

/// Loads every frame under `root`. Labels come from the class folder, or
/// from `manifest.csv` when that file exists.
pub fn load_folder_dataset(root: &Path, options: LoadOptions) -> Result<LoadedDataset> {
    let mut errors = Vec::new();
    let manifest = root.join(MANIFEST);
    let entries = if manifest.is_file() {
        manifest_entries(root, &manifest)?
    } else {
        folder_entries(root, &mut errors)?
    };

    // decode in parallel; collect() keeps entry order
    let decoded: Vec<std::result::Result<FrameSample, FileError>> = entries
        .into_par_iter()
        .map(|e| {
            let fail = |reason: String| FileError {
                path: e.path.clone(),
                reason,
            };
            let mut img = read_pgm(&e.path).map_err(&fail)?;
            if let Some(n) = options.resize_to {
                img = resize(&img, n, n).map_err(|err| fail(err.to_string()))?;
            }
            Ok(FrameSample::new(img, e.label, e.video_id, e.frame_index))
        })
        .collect();

    let mut samples = Vec::with_capacity(decoded.len());
    for d in decoded {
        match d {
            Ok(s) => samples.push(s),
            Err(e) => errors.push(e),
        }
    }
    if samples.is_empty() {
        return Err(DataError::Empty(root.to_path_buf()));
    }
    Ok(LoadedDataset { samples, errors })
}

/// Writes frames in the folder layout `load_folder_dataset` reads.
pub fn write_folder_dataset(root: &Path, samples: &[FrameSample]) -> Result<()> {
    for label in Label::ALL {
        fs::create_dir_all(root.join(label.folder()))?;
    }
    samples.par_iter().try_for_each(|s| {
        let name = format!("{}_{:06}.pgm", s.video_id, s.frame_index);
        write_pgm(&root.join(s.label.folder()).join(name), &s.pixels)
    })
}
