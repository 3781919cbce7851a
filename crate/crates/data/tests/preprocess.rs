use fednod_core::seeded_rng;
use fednod_data::{from_standardized, grayscale, resize, standardize, GrayImage};
use rand::Rng;

/// Tent-filter form of bilinear sampling: each source pixel's weight is
/// `max(0, 1 - |u - i|)` in both axes, with the sample point clamped to
/// the pixel-centre range.
fn tent_resize(img: &GrayImage, w: usize, h: usize) -> Vec<f64> {
    let coord = |dst: usize, src: usize, dst_len: usize| {
        let u = (dst as f64 + 0.5) * src as f64 / dst_len as f64 - 0.5;
        u.clamp(0.0, (src - 1) as f64)
    };
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let v = coord(y, img.height, h);
        for x in 0..w {
            let u = coord(x, img.width, w);
            let mut acc = 0.0;
            for j in (v.floor() as usize).saturating_sub(1)..(v.ceil() as usize + 2).min(img.height) {
                let wy = (1.0 - (v - j as f64).abs()).max(0.0);
                for i in (u.floor() as usize).saturating_sub(1)..(u.ceil() as usize + 2).min(img.width) {
                    let wx = (1.0 - (u - i as f64).abs()).max(0.0);
                    acc += wx * wy * img.get(i, j) as f64;
                }
            }
            out.push(acc);
        }
    }
    out
}

fn camera_frame(seed: u64) -> GrayImage {
    let mut rng = seeded_rng(seed);
    let (w, h) = (640, 480);
    let pixels = (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            let smooth = 128.0 + 90.0 * (x / 37.0).sin() * (y / 23.0).cos();
            (smooth + rng.gen_range(-30.0..30.0)).clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::new(w, h, pixels).unwrap()
}

#[test]
fn camera_frame_to_160_matches_tent_oracle() {
    for seed in 0..3 {
        let src = camera_frame(seed);
        let got = resize(&src, 160, 160).unwrap();
        let want = tent_resize(&src, 160, 160);
        for (g, w) in got.pixels.iter().zip(&want) {
            assert!((*g as f64 - w).abs() <= 1.0, "{g} vs {w}");
        }
    }
}

#[test]
fn odd_ratios_match_tent_oracle() {
    let src = camera_frame(9);
    let small = resize(&src, 97, 61).unwrap();
    for (w, h) in [(64, 64), (150, 33), (200, 170)] {
        let got = resize(&small, w, h).unwrap();
        let want = tent_resize(&small, w, h);
        assert!(got.pixels.iter().zip(&want).all(|(g, w)| (*g as f64 - w).abs() <= 1.0));
    }
}

#[test]
fn mean_of_two_rows() {
    let img = GrayImage::new(2, 2, vec![0, 0, 255, 255]).unwrap();
    assert_eq!(resize(&img, 1, 1).unwrap().pixels, vec![128]);
}

#[test]
fn grayscale_then_standardize() {
    // planar: R plane, G plane, B plane
    let rgb = [255, 0, 255, 255, 0, 0, 255, 0, 0];
    let gray = grayscale(&rgb, 3, 1).unwrap();
    assert_eq!(gray.pixels, vec![255, 0, 76]);
    assert_eq!(standardize(0), -1.0);
    assert_eq!(standardize(255), 1.0);
    assert!((standardize(128) - 0.003_921_6).abs() < 1e-6);
    for b in 0..=255u8 {
        assert_eq!(from_standardized(standardize(b)), b);
    }
}
