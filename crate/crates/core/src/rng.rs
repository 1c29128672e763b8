//! Deterministic random streams keyed by `(master_seed, purpose, frame_index)`.
//!
//! Every random draw in the simulator comes from a stream derived here, so any
//! frame can be regenerated alone, in any order, on any thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random streams used by one simulated frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    Source = 1,
    ObjectPhase = 2,
    TurbulenceModes = 3,
    TurbulenceScreen = 4,
    DetectorOne = 5,
    DetectorTwo = 6,
    Subharmonics = 7,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Build the generator for one `(seed, stream, frame)` triple.
pub fn stream_rng(master_seed: u64, stream: Stream, frame_index: u64) -> ChaCha8Rng {
    let mut state = master_seed;
    let a = splitmix64(&mut state);
    state ^= (stream as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    let b = splitmix64(&mut state);
    state ^= frame_index.wrapping_mul(0xA076_1D64_78BD_642F);
    let c = splitmix64(&mut state);
    let d = splitmix64(&mut state);
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_exact_mut(8).zip([a, b, c, d]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
