//! Named, counter-based random number streams.
//!
//! Every sampling operation in the crate draws from an [`RngStream`]
//! identified by `(seed, label, index)`. The triple fully determines the
//! stream contents, so parallel shards reproduce bit-identically no matter
//! how work is scheduled: shard `i` of a session always owns stream
//! `(seed, "session", i)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution};

/// Expand a 64-bit seed into a 256-bit ChaCha key (SplitMix64 chain).
fn expand_seed(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    key
}

/// FNV-1a over the label bytes and the little-endian index.
fn stream_id(label: &str, index: u64) -> u64 {
    let mut hash: u64 = 0xCBF2_9CE4_8422_2325;
    for byte in label.bytes().chain(index.to_le_bytes()) {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// A private, seekable random stream. Distinct `(label, index)` pairs under
/// the same seed are independent; the same triple replays the same draws.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, label: &str, index: u64) -> Self {
        let mut rng = ChaCha12Rng::from_seed(expand_seed(seed));
        rng.set_stream(stream_id(label, index));
        RngStream { rng }
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Bernoulli draw; `p` is clamped to `[0, 1]`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Binomial draw with `n` trials and success probability `p`.
    pub fn binomial(&mut self, n: u64, p: f64) -> u64 {
        if n == 0 || p <= 0.0 {
            return 0;
        }
        if p >= 1.0 {
            return n;
        }
        Binomial::new(n, p)
            .expect("binomial parameters validated above")
            .sample(&mut self.rng)
    }
}
