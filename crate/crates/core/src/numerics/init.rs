use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::tensor::{dot, Tensor};
use super::NumericsError;

/// Seeded generator used for every random draw in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable sub-seed for a labelled stream (parameter name, epoch, ...).
pub fn derive_seed(base: u64, label: &str) -> u64 {
    // FNV-1a over the label, then mixed with the base seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(base ^ splitmix64(h))
}

pub fn derive_seed_n(base: u64, label: &str, index: u64) -> u64 {
    splitmix64(derive_seed(base, label) ^ splitmix64(index.wrapping_add(1)))
}

/// Values drawn uniformly from `[lo, hi]`.
pub fn init_uniform(shape: &[usize], seed: u64, lo: f64, hi: f64) -> Result<Tensor, NumericsError> {
    if !(lo <= hi) {
        return Err(NumericsError::InvalidArgument(format!("uniform range [{lo}, {hi}]")));
    }
    let mut rng = rng_from_seed(seed);
    let len: usize = shape.iter().product();
    let data = (0..len).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
    Tensor::new(shape.to_vec(), data)
}

/// Random (semi-)orthogonal matrix: the shorter of rows/columns is an
/// orthonormal set.
pub fn init_orthogonal(shape: &[usize], seed: u64) -> Result<Tensor, NumericsError> {
    let [rows, cols] = *shape else {
        return Err(NumericsError::Shape(format!("orthogonal init needs a 2-D shape, got {:?}", shape)));
    };
    if rows == 0 || cols == 0 {
        return Err(NumericsError::Shape(format!("invalid shape {:?}", shape)));
    }
    let (long, short) = (rows.max(cols), rows.min(cols));
    let mut rng = rng_from_seed(seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(short);
    while basis.len() < short {
        let mut v: Vec<f64> = (0..long).map(|_| rng.sample(StandardNormal)).collect();
        // Two rounds of modified Gram-Schmidt keep the result orthonormal to
        // near machine precision.
        for _ in 0..2 {
            for q in &basis {
                let proj = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    let mut data = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            data[i * cols + j] = if rows >= cols { basis[j][i] } else { basis[i][j] };
        }
    }
    Tensor::new(vec![rows, cols], data)
}
