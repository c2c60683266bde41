use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of samples drawn from one substream in chunked parallel sampling.
pub(crate) const CHUNK: usize = 1 << 16;

/// Independent, reproducible generator for `stream` under a master `seed`.
///
/// Workers index streams by chunk or trial number, so results do not depend
/// on how work is scheduled across threads.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Streams above this offset are reserved for derived purposes (bootstrap
/// resampling, secondary scans) so they never collide with chunk streams.
pub(crate) const DERIVED_STREAM_BASE: u64 = 1 << 48;
