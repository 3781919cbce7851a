use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::DataError;
use crate::image::GrayImage;
use crate::transform::standardize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Normal = 0,
    Talking = 1,
    Yawning = 2,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Normal, Label::Talking, Label::Yawning];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }

    /// Folder name used by the on-disk layout.
    pub fn folder(self) -> &'static str {
        match self {
            Label::Normal => "normal",
            Label::Talking => "talking",
            Label::Yawning => "yawning",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.folder())
    }
}

impl FromStr for Label {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, DataError> {
        let s = s.trim();
        if let Ok(i) = s.parse::<usize>() {
            return Label::from_index(i).ok_or_else(|| DataError::Config(format!("label index {i} out of range")));
        }
        Label::ALL
            .into_iter()
            .find(|l| l.folder().eq_ignore_ascii_case(s))
            .ok_or_else(|| DataError::Config(format!("unknown label {s:?}")))
    }
}

/// Anything that can be fed to a classifier: a label plus a fixed-shape
/// standardized input.
pub trait Example: Send + Sync {
    fn label(&self) -> Label;

    /// Item shape without the batch axis, e.g. `(1, H, W)`.
    fn item_shape(&self) -> Vec<usize>;

    /// Writes the standardized input into `out` (length = product of shape).
    fn write_input(&self, out: &mut [f32]);

    fn video_id(&self) -> &str;
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameSample {
    pub pixels: Arc<GrayImage>,
    pub label: Label,
    pub video_id: String,
    pub frame_index: u64,
}

impl FrameSample {
    pub fn new(pixels: GrayImage, label: Label, video_id: impl Into<String>, frame_index: u64) -> Self {
        FrameSample {
            pixels: Arc::new(pixels),
            label,
            video_id: video_id.into(),
            frame_index,
        }
    }
}

impl Example for FrameSample {
    fn label(&self) -> Label {
        self.label
    }

    fn item_shape(&self) -> Vec<usize> {
        vec![1, self.pixels.height, self.pixels.width]
    }

    fn write_input(&self, out: &mut [f32]) {
        for (o, &p) in out.iter_mut().zip(&self.pixels.pixels) {
            *o = standardize(p);
        }
    }

    fn video_id(&self) -> &str {
        &self.video_id
    }
}

/// `L` frames of one video taken every `s`-th frame.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceSample {
    pub frames: Vec<Arc<GrayImage>>,
    pub label: Label,
    pub video_id: String,
    pub start_frame: u64,
    pub frame_indices: Vec<u64>,
}

impl Example for SequenceSample {
    fn label(&self) -> Label {
        self.label
    }

    fn item_shape(&self) -> Vec<usize> {
        let first = &self.frames[0];
        vec![1, self.frames.len(), first.height, first.width]
    }

    fn write_input(&self, out: &mut [f32]) {
        let plane = self.frames[0].pixels.len();
        for (chunk, frame) in out.chunks_mut(plane).zip(&self.frames) {
            for (o, &p) in chunk.iter_mut().zip(&frame.pixels) {
                *o = standardize(p);
            }
        }
    }

    fn video_id(&self) -> &str {
        &self.video_id
    }
}
