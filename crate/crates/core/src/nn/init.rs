//! Weight initialization.

use super::TensorBuffer;
use crate::rng::SplitMix64;

/// Uniform Glorot initialization: values drawn from
/// `U(-limit, limit)` with `limit = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform(
    shape: &[usize],
    fan_in: usize,
    fan_out: usize,
    rng: &mut SplitMix64,
) -> TensorBuffer {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let len: usize = shape.iter().product();
    let data = (0..len)
        .map(|_| rng.uniform(-limit, limit) as f32)
        .collect();
    TensorBuffer::from_vec(shape, data).expect("length matches shape")
}
