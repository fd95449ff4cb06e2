//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a ChaCha stream selected by a
//! `(seed, purpose, index)` triple, so a Monte Carlo replication produces the
//! same numbers whichever worker thread runs it and in whatever order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// What a stream is used for. Distinct purposes never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Purpose {
    Simulation = 1,
    Contamination = 2,
    LimitLaw = 3,
    Integration = 4,
    Selection = 5,
    Auxiliary = 6,
}

/// Open the stream for `(seed, purpose, index)`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(purpose, index));
    rng
}

fn stream_id(purpose: Purpose, index: u64) -> u64 {
    // index occupies the low 56 bits, purpose the top byte
    ((purpose as u64) << 56) ^ (index & 0x00ff_ffff_ffff_ffff)
}
