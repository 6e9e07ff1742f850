//! Deterministic random number generation.
//!
//! The toolkit keys every random draw to a substream derived from a seed plus
//! an index path (e.g. `[STREAM_SCAN, scan_index, ray_index]`), so results are
//! reproducible no matter how work is split across threads.

/// SplitMix64 (Steele, Lea, Flood; JDK 8 `SplittableRandom`). The state is a
/// plain counter advanced by a fixed odd increment; each output is a bijective
/// mix of the counter, which makes arbitrary substream derivation cheap.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream tags keeping unrelated consumers of the same seed independent.
pub const STREAM_SCAN: u64 = 1;
pub const STREAM_CORRUPT: u64 = 2;
pub const STREAM_MCL_INIT: u64 = 3;
pub const STREAM_ODOMETRY: u64 = 4;
pub const STREAM_PREDICT: u64 = 5;
pub const STREAM_RESAMPLE: u64 = 6;
pub const STREAM_EVAL: u64 = 7;

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Derive an independent generator from a seed and an index path.
    pub fn substream(seed: u64, path: &[u64]) -> Self {
        let mut h = mix64(seed ^ 0x6A09_E667_F3BC_C909);
        for &p in path {
            h = mix64(h ^ p.wrapping_mul(GOLDEN_GAMMA)).wrapping_add(GOLDEN_GAMMA);
        }
        SplitMix64::new(h)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (0, 1]; safe as the argument of `ln`.
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        1.0 - self.next_f64()
    }

    /// Standard normal via Box-Muller. Consumes exactly two uniforms, which
    /// keeps substream consumption independent of the sampled value.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_open01();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
