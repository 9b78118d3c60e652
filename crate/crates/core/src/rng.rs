//! Deterministic random streams.
//!
//! Every Monte Carlo task draws from its own ChaCha20 substream. The key is
//! derived from the 64-bit experiment seed and the stream number from the
//! task's indices, so results do not depend on how tasks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

pub type Stream = ChaCha20Rng;

/// Draws per chunk of a Monte Carlo run; each chunk owns one substream.
pub const CHUNK: usize = 1 << 15;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl McEstimate {
    /// Number of standard errors separating the estimate from `reference`.
    pub fn z_score(&self, reference: f64) -> f64 {
        if self.std_err == 0.0 {
            if self.mean == reference {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - reference).abs() / self.std_err
        }
    }
}

/// Estimates `E[draw]` from `samples` draws.
///
/// Chunk `i` uses `substream(seed, [tag, i])`, so the estimate is the same
/// for any thread count.
pub fn monte_carlo_mean<F>(samples: usize, seed: u64, tag: u64, draw: F) -> McEstimate
where
    F: Fn(&mut Stream) -> f64 + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64, usize)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = CHUNK.min(samples - c * CHUNK);
            let mut rng = substream(seed, &[tag, c as u64]);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let v = draw(&mut rng);
                s += v;
                s2 += v * v;
            }
            (s, s2, n)
        })
        .collect();
    let (s, s2, n) = partial
        .into_iter()
        .fold((0.0, 0.0, 0usize), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    if n == 0 {
        return McEstimate {
            mean: f64::NAN,
            std_err: f64::NAN,
            samples: 0,
        };
    }
    let nf = n as f64;
    let mean = s / nf;
    let var = if n > 1 { ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
    McEstimate {
        mean,
        std_err: (var / nf).sqrt(),
        samples: n,
    }
}

/// Opens the substream identified by `indices` under `seed`.
///
/// Distinct index tuples give independent streams; the same tuple always
/// gives the same sequence.
pub fn substream(seed: u64, indices: &[u64]) -> Stream {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(indices));
    rng
}

/// A 64-bit seed derived from `seed` and `indices`, for APIs that take a
/// plain seed rather than a stream.
pub fn derive_seed(seed: u64, indices: &[u64]) -> u64 {
    mix(seed ^ stream_id(indices))
}

fn stream_id(indices: &[u64]) -> u64 {
    // splitmix64 chained over the indices
    let mut h = 0x9e37_79b9_7f4a_7c15u64 ^ indices.len() as u64;
    for &i in indices {
        h = mix(h ^ mix(i.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    h
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_indices_same_sequence() {
        let a: Vec<u64> = substream(7, &[1, 2]).random_iter().take(8).collect();
        let b: Vec<u64> = substream(7, &[1, 2]).random_iter().take(8).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn monte_carlo_uniform_mean() {
        let est = monte_carlo_mean(100_000, 1, 0, |r| r.random::<f64>());
        assert_eq!(est.samples, 100_000);
        assert!(est.z_score(0.5) < 4.0);
        assert!((est.std_err - (1.0f64 / 12.0 / 1e5).sqrt()).abs() < 1e-5);
        let again = monte_carlo_mean(100_000, 1, 0, |r| r.random::<f64>());
        assert_eq!(est, again);
    }

    #[test]
    fn different_indices_differ() {
        let a: u64 = substream(7, &[1, 2]).random();
        let b: u64 = substream(7, &[2, 1]).random();
        let c: u64 = substream(7, &[1]).random();
        let d: u64 = substream(8, &[1, 2]).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
