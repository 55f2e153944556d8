//! Counter-based random streams.
//!
//! Every draw is a pure function of `(seed, purpose, stream, position)`: the
//! seed and purpose select a ChaCha8 key, the stream index (a trial number)
//! selects the ChaCha stream, and values are consumed in a fixed order within
//! the stream. Trials can therefore run on any worker in any order.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// What a stream is used for; distinct purposes never share keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Points = 1,
    QueryBoxes = 2,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key(seed: u64, purpose: Purpose) -> [u8; 32] {
    let mut state = seed ^ (purpose as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    let mut out = [0u8; 32];
    for chunk in out.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    out
}

/// A reproducible stream of uniform draws.
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64, purpose: Purpose, index: u64) -> Self {
        let mut rng = ChaCha8Rng::from_seed(key(seed, purpose));
        rng.set_stream(index);
        Stream { rng }
    }

    /// Jumps to the `pos`-th 64-bit draw of the stream.
    pub fn seek(&mut self, pos: u64) {
        self.rng.set_word_pos(2 * pos as u128);
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`, safe to take logarithms of.
    pub fn unit_open0(&mut self) -> f64 {
        1.0 - self.unit()
    }

    /// Uniform point of the probability simplex `{y >= 0, sum y = 1}` in `d` coordinates.
    pub fn simplex(&mut self, d: usize) -> Vec<f64> {
        let mut y: Vec<f64> = (0..d).map(|_| -self.unit_open0().ln()).collect();
        let total: f64 = y.iter().sum();
        if total > 0.0 {
            for v in &mut y {
                *v /= total;
            }
        } else {
            y.iter_mut().for_each(|v| *v = 1.0 / d as f64);
        }
        y
    }
}

/// The coordinate `axis` of point `point` in stream `index`, by direct seek.
pub fn coordinate_at(seed: u64, index: u64, d: usize, point: usize, axis: usize) -> f64 {
    let mut s = Stream::new(seed, Purpose::Points, index);
    s.seek((point * d + axis) as u64);
    s.unit()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seek_matches_sequential_draws() {
        let mut seq = Stream::new(7, Purpose::Points, 3);
        let draws: Vec<f64> = (0..40).map(|_| seq.unit()).collect();
        for (pos, &v) in draws.iter().enumerate() {
            assert_eq!(coordinate_at(7, 3, 4, pos / 4, pos % 4), v);
        }
    }

    #[test]
    fn purposes_and_streams_differ() {
        let a = Stream::new(1, Purpose::Points, 0).unit();
        let b = Stream::new(1, Purpose::QueryBoxes, 0).unit();
        let c = Stream::new(1, Purpose::Points, 1).unit();
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn simplex_draws_sum_to_one() {
        let mut s = Stream::new(9, Purpose::QueryBoxes, 0);
        for _ in 0..100 {
            let y = s.simplex(4);
            assert!(y.iter().all(|&v| v >= 0.0));
            assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
