//! Counter-based seed splitting.
//!
//! Every random stream is `ChaCha8Rng` keyed by `splitmix64(seed ^ tag)` and
//! positioned on ChaCha stream `counter`. A job identified by `(tag, counter)`
//! therefore draws the same numbers no matter how jobs are spread over
//! threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags. Stable values: changing them changes every seeded output.
pub mod tag {
    pub const GRAPH: u64 = 0x6772_6170;
    pub const XOR: u64 = 0x786f_7200;
    pub const CSP: u64 = 0x6373_7000;
    pub const LIFT: u64 = 0x6c69_6674;
    pub const WALKS: u64 = 0x7761_6c6b;
    pub const WEIGHTS: u64 = 0x7765_6967;
    pub const SUBSETS: u64 = 0x7375_6273;
    pub const BENCH: u64 = 0x6265_6e63;
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream for job `counter` under `tag`, derived from the master seed.
pub fn stream(seed: u64, tag: u64, counter: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ tag.rotate_left(17)));
    rng.set_stream(counter);
    rng
}
