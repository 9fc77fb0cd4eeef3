//! Counter-based, splittable random number generator.
//!
//! Draw `i` of the stream `(seed, stream)` is a pure function of
//! `(seed, stream, i)`:
//!
//! ```text
//! seed_key   = mix(seed)
//! stream_key = mix(stream ^ 0x6A09E667F3BCC909)
//! draw(i)    = mix(mix(i ^ seed_key) + stream_key)
//! ```
//!
//! where `mix` is the SplitMix64 finalizer. No platform or thread state is
//! involved, so sequences are identical everywhere.

const STREAM_SALT: u64 = 0x6A09_E667_F3BC_C909;
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines a parent stream id with a child index into a new stream id.
pub fn derive_stream(parent: u64, child: u64) -> u64 {
    mix(parent.wrapping_add(GOLDEN).wrapping_add(mix(child ^ STREAM_SALT)))
}

/// Position in one `(seed, stream)` sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RngState {
    seed: u64,
    stream: u64,
    counter: u64,
}

impl RngState {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream, counter: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of 64-bit draws consumed so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// An independent generator for sub-stream `child` of this stream.
    pub fn split(&self, child: u64) -> Self {
        Self::new(self.seed, derive_stream(self.stream, child))
    }

    pub fn next_u64(&mut self) -> u64 {
        let seed_key = mix(self.seed);
        let stream_key = mix(self.stream ^ STREAM_SALT);
        let out = mix(mix(self.counter ^ seed_key).wrapping_add(stream_key));
        self.counter = self.counter.wrapping_add(1);
        out
    }

    /// Uniform draw on the open interval (0, 1) with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw (Box-Muller, one value per two uniforms).
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
    }
}
