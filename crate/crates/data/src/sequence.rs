//! Fixed-stride clips for the sequence model.

use std::collections::BTreeMap;

use crate::sample::{FrameSample, Label, SequenceSample};

/// Cuts one video's frames (sorted by frame index) into clips of
/// `length` frames taken every `skip`-th frame.
///
/// A clip spans `(length - 1) * skip + 1` frames. Clips start at 0, span,
/// 2 * span, ... and never overlap or run past the end. The clip label is
/// the majority frame label; ties go to the middle member, index
/// `(length - 1) / 2`.
pub fn assemble_sequences(frames: &[FrameSample], length: usize, skip: usize) -> Vec<SequenceSample> {
    assert!(length >= 1 && skip >= 1, "sequence length and frame skipping must be positive");
    debug_assert!(frames.windows(2).all(|w| w[0].frame_index <= w[1].frame_index));
    debug_assert!(frames.windows(2).all(|w| w[0].video_id == w[1].video_id));
    let span = (length - 1) * skip + 1;
    let mut out = Vec::new();
    let mut start = 0;
    while start + span <= frames.len() {
        let members: Vec<&FrameSample> = (0..length).map(|i| &frames[start + i * skip]).collect();
        out.push(SequenceSample {
            frames: members.iter().map(|f| f.pixels.clone()).collect(),
            label: majority_label(&members),
            video_id: members[0].video_id.clone(),
            start_frame: members[0].frame_index,
            frame_indices: members.iter().map(|f| f.frame_index).collect(),
        });
        start += span;
    }
    out
}

fn majority_label(members: &[&FrameSample]) -> Label {
    let mut counts = [0usize; 3];
    for m in members {
        counts[m.label.index()] += 1;
    }
    let best = *counts.iter().max().unwrap();
    let leaders: Vec<Label> = Label::ALL.into_iter().filter(|l| counts[l.index()] == best).collect();
    if leaders.len() == 1 {
        leaders[0]
    } else {
        members[(members.len() - 1) / 2].label
    }
}

/// Groups frames by video, sorts each video by frame index and assembles
/// clips. Videos are processed in video-id order.
pub fn sequences_from_frames(frames: &[FrameSample], length: usize, skip: usize) -> Vec<SequenceSample> {
    let mut videos: BTreeMap<&str, Vec<FrameSample>> = BTreeMap::new();
    for f in frames {
        videos.entry(f.video_id.as_str()).or_default().push(f.clone());
    }
    videos
        .into_values()
        .flat_map(|mut v| {
            v.sort_by_key(|f| f.frame_index);
            assemble_sequences(&v, length, skip)
        })
        .collect()
}
