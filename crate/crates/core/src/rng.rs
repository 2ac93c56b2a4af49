//! Deterministic, portable random streams.
//!
//! Every random decision in the crate is drawn from a [`RandomStream`]: the
//! ChaCha8 stream cipher keyed by a 64-bit master seed and addressed by a
//! 64-bit stream index. The derivation is fixed:
//!
//! * key = the 8 little-endian bytes of the master seed followed by 24 zero bytes,
//! * nonce (ChaCha stream id) = the stream index,
//! * block counter starts at 0.
//!
//! A 64-bit draw is two consecutive 32-bit keystream words, low word first.
//! ChaCha is defined bit-exactly, so equal `(seed, index)` pairs give equal
//! sequences on every platform, and distinct indices are independent
//! keystreams.
//!
//! Streams also support positional access ([`RandomStream::u64_at`]): the
//! draw at position `p` is the 64-bit word at keystream offset `2p`. Edge
//! filtering uses this so that the fate of an edge depends only on the
//! stream and the edge, not on which other edges the graph has.

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// Largest forward gap (in 32-bit words) that is skipped by reading rather
/// than by re-seeking the cipher.
const SKIP_BY_READING: u128 = 48;

#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    index: u64,
    rng: ChaCha8Rng,
    /// Keystream word offset of the next unread word.
    cursor: u128,
}

impl RandomStream {
    /// Stream `index` of master seed `master`.
    pub fn derive(master: u64, index: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&master.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        Self { seed: master, index, rng, cursor: 0 }
    }

    /// A fresh 64-bit seed for a nested family of streams: the first draw of
    /// stream `index`.
    pub fn child_seed(master: u64, index: u64) -> u64 {
        Self::derive(master, index).next_u64()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn next_u64(&mut self) -> u64 {
        self.cursor += 2;
        self.rng.next_u64()
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, threshold: KeepThreshold) -> bool {
        threshold.accepts(self.next_u64())
    }

    /// The draw at `position`, independent of what has been read before.
    /// Reading positions in increasing order is cheap.
    pub fn u64_at(&mut self, position: u64) -> u64 {
        let target = u128::from(position) * 2;
        if target < self.cursor || target - self.cursor > SKIP_BY_READING {
            self.rng.set_word_pos(target);
        } else {
            for _ in 0..(target - self.cursor) {
                self.rng.next_u32();
            }
        }
        self.cursor = target + 2;
        self.rng.next_u64()
    }

    /// Uniform integer in `0..bound` by rejection, `bound > 0`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound + 1) % bound;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % bound;
            }
        }
    }
}

/// A Bernoulli(p) test on a uniform 64-bit draw `v`: accept iff
/// `v < floor(p * 2^64)`, with p = 1 accepting everything.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeepThreshold(Option<u64>);

impl KeepThreshold {
    pub fn new(p: f64) -> Self {
        if p >= 1.0 {
            KeepThreshold(None)
        } else if p <= 0.0 {
            KeepThreshold(Some(0))
        } else {
            KeepThreshold(Some((p * 18_446_744_073_709_551_616.0) as u64))
        }
    }

    #[inline]
    pub fn accepts(self, v: u64) -> bool {
        match self.0 {
            None => true,
            Some(t) => v < t,
        }
    }

    pub fn always(self) -> bool {
        self.0.is_none()
    }

    pub fn never(self) -> bool {
        self.0 == Some(0)
    }
}
