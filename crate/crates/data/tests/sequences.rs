mod common;

use common::enumerate_windows;
use fednod_data::{assemble_sequences, sequences_from_frames, FrameSample, GrayImage, Label};
use proptest::prelude::*;

fn video(n: usize, id: &str) -> Vec<FrameSample> {
    let img = GrayImage::new(2, 2, vec![1, 2, 3, 4]).unwrap();
    (0..n)
        .map(|i| FrameSample::new(img.clone(), Label::ALL[i % 3], id, i as u64))
        .collect()
}

#[test]
fn hundred_frames_sixteen_by_five() {
    let seqs = assemble_sequences(&video(100, "x"), 16, 5);
    assert_eq!(seqs.len(), 1);
    let want: Vec<u64> = (0..=75).step_by(5).collect();
    assert_eq!(seqs[0].frame_indices, want);
    assert_eq!(seqs[0].start_frame, 0);
    assert_eq!(seqs[0].frames.len(), 16);
}

proptest! {
    #[test]
    fn matches_enumeration(n in 0usize..200, l in 1usize..20, s in 1usize..8) {
        let seqs = assemble_sequences(&video(n, "x"), l, s);
        let got: Vec<Vec<u64>> = seqs.iter().map(|q| q.frame_indices.clone()).collect();
        prop_assert_eq!(got, enumerate_windows(n, l, s));
    }

    #[test]
    fn clips_stay_inside_one_video(a in 0usize..60, b in 0usize..60, l in 1usize..6, s in 1usize..4) {
        let mut frames = video(a, "a");
        frames.extend(video(b, "b"));
        frames.reverse();
        let seqs = sequences_from_frames(&frames, l, s);
        prop_assert_eq!(seqs.len(), enumerate_windows(a, l, s).len() + enumerate_windows(b, l, s).len());
        for q in &seqs {
            prop_assert!(q.frame_indices.windows(2).all(|w| w[1] - w[0] == s as u64));
            prop_assert_eq!(q.start_frame, q.frame_indices[0]);
        }
    }
}
