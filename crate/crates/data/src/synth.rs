//! Synthetic stand-in for driver video frames.
//!
//! Each frame is a schematic face: a head ellipse, two dark eyes and a
//! mouth ellipse whose opening (height over width) carries the class.
//! Closed-ish mouths are Normal, an oscillating opening is Talking and a
//! wide opening that grows through the video is Yawning.

use std::f64::consts::PI;

use fednod_core::{derive_seed, seeded_rng, SeededRng};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::image::GrayImage;
use crate::sample::{FrameSample, Label};

/// Frames per synthetic video.
pub const FRAMES_PER_VIDEO: usize = 100;

/// Mouth half-width as a fraction of the resolution.
pub const MOUTH_HALF_WIDTH: f64 = 0.12;
/// Vertical offset of the mouth centre below the head centre.
pub const MOUTH_OFFSET: f64 = 0.2;
/// Intensity of the mouth interior.
pub const MOUTH_LEVEL: f64 = 0.05;

const EYE_LEVEL: f64 = 0.1;
const SUBSAMPLES: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub n_per_class: usize,
    pub resolution: usize,
    /// Standard deviation of additive Gaussian noise on the [0, 1] scale.
    pub noise_level: f64,
}

impl SynthSpec {
    pub fn new(n_per_class: usize, resolution: usize, noise_level: f64) -> Self {
        SynthSpec {
            n_per_class,
            resolution,
            noise_level,
        }
    }
}

/// Opening ratio of the mouth for frame `t` of a video.
#[derive(Clone, Copy, Debug)]
enum MouthTrack {
    Still,
    Oscillating { freq: f64, phase: f64 },
    Ramp,
}

impl MouthTrack {
    fn ratio(self, t: usize, frames: usize, rng: &mut SeededRng) -> f64 {
        match self {
            MouthTrack::Still => rng.gen_range(0.0..=0.1),
            MouthTrack::Oscillating { freq, phase } => 0.275 + 0.125 * (2.0 * PI * freq * t as f64 + phase).sin(),
            MouthTrack::Ramp => {
                let span = frames.saturating_sub(1).max(1) as f64;
                0.5 + 0.4 * t as f64 / span
            }
        }
    }
}

struct Face {
    background: f64,
    skin: f64,
    cx: f64,
    cy: f64,
    head: (f64, f64),
    eye_dx: f64,
    eye_dy: f64,
    eye: (f64, f64),
    mouth_dy: f64,
    mouth: (f64, f64),
}

fn inside(px: f64, py: f64, cx: f64, cy: f64, (rx, ry): (f64, f64)) -> bool {
    if rx <= 0.0 || ry <= 0.0 {
        return false;
    }
    let dx = (px - cx) / rx;
    let dy = (py - cy) / ry;
    dx * dx + dy * dy <= 1.0
}

impl Face {
    fn shade(&self, x: f64, y: f64) -> f64 {
        let my = self.cy + self.mouth_dy;
        if inside(x, y, self.cx, my, self.mouth) {
            return MOUTH_LEVEL;
        }
        let ey = self.cy - self.eye_dy;
        if inside(x, y, self.cx - self.eye_dx, ey, self.eye) || inside(x, y, self.cx + self.eye_dx, ey, self.eye) {
            return EYE_LEVEL;
        }
        if inside(x, y, self.cx, self.cy, self.head) {
            return self.skin;
        }
        self.background
    }

    fn render(&self, res: usize, noise: Option<&Normal<f64>>, rng: &mut SeededRng) -> GrayImage {
        let step = 1.0 / SUBSAMPLES as f64;
        let mut pixels = Vec::with_capacity(res * res);
        for row in 0..res {
            for col in 0..res {
                let mut acc = 0.0;
                for sy in 0..SUBSAMPLES {
                    for sx in 0..SUBSAMPLES {
                        let x = col as f64 + (sx as f64 + 0.5) * step;
                        let y = row as f64 + (sy as f64 + 0.5) * step;
                        acc += self.shade(x, y);
                    }
                }
                let mut v = acc / (SUBSAMPLES * SUBSAMPLES) as f64;
                if let Some(n) = noise {
                    v += n.sample(rng);
                }
                pixels.push((v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8);
            }
        }
        GrayImage::new(res, res, pixels).expect("square buffer")
    }
}

fn render_video(label: Label, video: usize, frames: usize, spec: &SynthSpec, seed: u64) -> Vec<FrameSample> {
    let res = spec.resolution as f64;
    let mut rng = seeded_rng(derive_seed(seed, &[label.index() as u64, video as u64]));
    let background = rng.gen_range(0.75..0.9);
    let skin = rng.gen_range(0.5..0.65);
    let cx = res * (0.5 + rng.gen_range(-0.04..0.04));
    let cy = res * (0.5 + rng.gen_range(-0.04..0.04));
    let track = match label {
        Label::Normal => MouthTrack::Still,
        Label::Talking => MouthTrack::Oscillating {
            freq: rng.gen_range(0.05..0.15),
            phase: rng.gen_range(0.0..2.0 * PI),
        },
        Label::Yawning => MouthTrack::Ramp,
    };
    let noise = (spec.noise_level > 0.0).then(|| Normal::new(0.0, spec.noise_level).expect("finite noise level"));
    let video_id = format!("syn-{}-{video:04}", label.folder());
    let a = MOUTH_HALF_WIDTH * res;
    (0..frames)
        .map(|t| {
            let ratio = track.ratio(t, frames, &mut rng);
            let face = Face {
                background,
                skin,
                cx: cx + res * rng.gen_range(-0.01..0.01),
                cy: cy + res * rng.gen_range(-0.01..0.01),
                head: (0.34 * res, 0.44 * res),
                eye_dx: 0.13 * res,
                eye_dy: 0.1 * res,
                eye: (0.06 * res, 0.03 * res),
                mouth_dy: MOUTH_OFFSET * res,
                mouth: (a, ratio * a),
            };
            let img = face.render(spec.resolution, noise.as_ref(), &mut rng);
            FrameSample::new(img, label, video_id.clone(), t as u64)
        })
        .collect()
}

/// Generates `n_per_class` frames per class, grouped into videos of
/// [`FRAMES_PER_VIDEO`] frames (the last video of a class may be shorter).
/// Output order is class, then video, then frame.
pub fn synth_generate(spec: &SynthSpec, seed: u64) -> Vec<FrameSample> {
    assert!(spec.n_per_class >= 1, "n_per_class must be at least 1");
    assert!(spec.resolution >= 8, "resolution too small to draw a face");
    let jobs: Vec<(Label, usize, usize)> = Label::ALL
        .into_iter()
        .flat_map(|label| {
            (0..spec.n_per_class.div_ceil(FRAMES_PER_VIDEO)).map(move |v| {
                let frames = (spec.n_per_class - v * FRAMES_PER_VIDEO).min(FRAMES_PER_VIDEO);
                (label, v, frames)
            })
        })
        .collect();
    jobs.into_par_iter()
        .map(|(label, v, frames)| render_video(label, v, frames, spec, seed))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}
