use fednod_core::Tensor32;

use crate::sample::Example;

/// Byte to `[-1, 1]`: scale to `[0, 1]`, then standardize with mean 0.5 and
/// standard deviation 0.5.
pub fn standardize(byte: u8) -> f32 {
    ((byte as f64 / 255.0 - 0.5) / 0.5) as f32
}

/// Inverse of [`standardize`], rounded to the nearest byte.
pub fn from_standardized(value: f32) -> u8 {
    ((value as f64 * 0.5 + 0.5) * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Stacks examples into one `(batch, item...)` tensor.
///
/// Panics if the examples do not share one item shape.
pub fn batch_tensor<E: Example>(items: &[&E]) -> Tensor32 {
    let item = items.first().map(|e| e.item_shape()).unwrap_or_default();
    let len: usize = item.iter().product();
    let mut data = vec![0f32; len * items.len()];
    for (chunk, e) in data.chunks_mut(len.max(1)).zip(items) {
        assert_eq!(e.item_shape(), item, "examples in one batch must share a shape");
        e.write_input(chunk);
    }
    let mut shape = vec![items.len()];
    shape.extend(item);
    Tensor32::new(shape, data).expect("batch data matches shape")
}
