//! Dataset side of the pipeline: load frames, preprocess them, split them
//! 90:10 per class, deal the training part out to clients, and optionally
//! stitch frames into fixed-stride clips for the 3D model.

pub mod error;
pub mod folder;
pub mod image;
pub mod sample;
pub mod sequence;
pub mod split;
pub mod synth;
pub mod transform;

pub use error::{DataError, Result};
pub use folder::{load_folder_dataset, write_folder_dataset, FileError, LoadOptions, LoadedDataset};
pub use image::{grayscale, grayscale_pixel, resize, GrayImage};
pub use sample::{Example, FrameSample, Label, SequenceSample};
pub use sequence::{assemble_sequences, sequences_from_frames};
pub use split::{partition_clients, stratified_split, DatasetShard};
pub use synth::{synth_generate, SynthSpec};
pub use transform::{batch_tensor, from_standardized, standardize};
