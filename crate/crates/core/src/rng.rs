//! Counter-based random substreams.
//!
//! Every random draw in the simulator comes from a stream keyed by
//! `(root seed, agent, step, purpose)`. Streams are derived by hashing the
//! key, never by advancing a shared generator, so the order in which agents
//! are visited cannot change any result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::world::AgentId;

/// Generator type handed to policies and sensors.
pub type StreamRng = ChaCha8Rng;

/// What a substream is used for. Distinct purposes never share draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StreamPurpose {
    Perceive,
    Decide,
    Scenario,
    Situations,
    Episode,
}

impl StreamPurpose {
    fn tag(self) -> u64 {
        match self {
            StreamPurpose::Perceive => 0x7065_7263,
            StreamPurpose::Decide => 0x6465_6369,
            StreamPurpose::Scenario => 0x7363_656e,
            StreamPurpose::Situations => 0x7369_7475,
            StreamPurpose::Episode => 0x6570_6973,
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one 64-bit key.
pub fn derive_seed(root: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(mix64(root), |acc, &w| mix64(acc ^ mix64(w)))
}

/// Stable 64-bit hash of a label, used to derive named child seeds.
pub fn label_hash(label: &str) -> u64 {
    // FNV-1a; std's hasher is not stable across releases.
    label
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
        })
}

/// Child seed for a named sub-experiment (e.g. one allocation arm).
pub fn named_seed(root: u64, label: &str) -> u64 {
    derive_seed(root, &[label_hash(label)])
}

/// Builds the generator for one `(agent, step, purpose)` cell of an episode.
pub fn substream(root: u64, agent: AgentId, step: u64, purpose: StreamPurpose) -> StreamRng {
    let key = derive_seed(root, &[purpose.tag(), u64::from(agent.0), step]);
    let mut bytes = [0u8; 32];
    for (i, chunk) in bytes.chunks_mut(8).enumerate() {
        chunk.copy_from_slice(&mix64(key ^ (i as u64).wrapping_mul(0xA24B_AED4_963E_E407)).to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

/// Generator for a purpose not tied to any agent.
pub fn stream(root: u64, purpose: StreamPurpose) -> StreamRng {
    substream(root, AgentId(u32::MAX), 0, purpose)
}
