#![allow(dead_code)]

use std::io::Cursor;

use fednod_core::{Arch, ModelWeights, Tensor32, WeightEntry};
use fednod_transport::{
    decode_weights, encode_weights, frame_message, read_message, MessageType, TransportError, HEADER_LEN,
};
use rand::Rng;

/// Up to ten tensors of rank 0..=4 holding arbitrary bit patterns
/// (NaNs and infinities included).
pub fn random_weights(rng: &mut impl Rng) -> ModelWeights {
    let arch = if rng.gen() { Arch::Ddd2d } else { Arch::Ddd3d };
    let entries = (0..rng.gen_range(0..=10))
        .map(|layer| {
            let rank = rng.gen_range(0..=4);
            let shape: Vec<usize> = (0..rank).map(|_| rng.gen_range(0..=5)).collect();
            let len = shape.iter().product();
            let data = (0..len).map(|_| f32::from_bits(rng.gen())).collect();
            WeightEntry {
                layer,
                param: if rng.gen() { "weight".into() } else { "bias".into() },
                tensor: Tensor32::new(shape, data).unwrap(),
            }
        })
        .collect();
    ModelWeights { arch, entries }
}

pub fn bitwise_equal(a: &ModelWeights, b: &ModelWeights) -> bool {
    a.arch == b.arch
        && a.entries.len() == b.entries.len()
        && a.entries.iter().zip(&b.entries).all(|(x, y)| {
            x.layer == y.layer
                && x.param == y.param
                && x.tensor.shape() == y.tensor.shape()
                && x.tensor.data().iter().map(|v| v.to_bits()).eq(y.tensor.data().iter().map(|v| v.to_bits()))
        })
}

/// encode -> frame -> read -> decode.
pub fn wire_round_trip(w: &ModelWeights) -> Result<ModelWeights, TransportError> {
    let frame = frame_message(MessageType::GlobalWeights, &encode_weights(w)?)?;
    let mut stream = Cursor::new(frame);
    let msg = read_message(&mut stream)?;
    assert_eq!(stream.position() as usize, stream.get_ref().len());
    decode_weights(&msg.payload, w.arch)
}

/// Flips every bit of the payload and checksum of `frame` in turn and
/// returns how many flips went undetected.
pub fn undetected_flips(frame: &[u8]) -> usize {
    let mut missed = 0;
    for byte in HEADER_LEN..frame.len() {
        for bit in 0..8 {
            let mut bad = frame.to_vec();
            bad[byte] ^= 1 << bit;
            if !matches!(read_message(&mut &bad[..]), Err(TransportError::Integrity { .. })) {
                missed += 1;
            }
        }
    }
    missed
}
