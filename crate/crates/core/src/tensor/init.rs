use rand::Rng;

use super::Tensor;

pub const EMBEDDING_INIT_RANGE: f64 = 0.01;
pub const PRELU_INIT_SLOPE: f64 = 0.25;

/// Glorot-uniform `[fan_in, fan_out]` weight matrix.
pub fn xavier_uniform<R: Rng>(fan_in: usize, fan_out: usize, rng: &mut R) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out)
        .map(|_| rng.gen_range(-limit..=limit))
        .collect();
    Tensor::from_parts_unchecked(vec![fan_in, fan_out], data)
}

pub fn embedding_uniform<R: Rng>(vocab: usize, dim: usize, rng: &mut R) -> Tensor {
    let data = (0..vocab * dim)
        .map(|_| rng.gen_range(-EMBEDDING_INIT_RANGE..=EMBEDDING_INIT_RANGE))
        .collect();
    Tensor::from_parts_unchecked(vec![vocab, dim], data)
}
