//! Counter-based random numbers for reproducible parallel simulation.
//!
//! Each (seed, stream) pair is an independent deterministic sequence: the
//! generator is a 10-round Philox-style bijection of a 128-bit counter keyed
//! by the seed, with the stream id in the high counter word. Work is split
//! into fixed-size chunks that each own a stream, so the assignment of random
//! numbers to samples never depends on the number of worker threads.

const MULTIPLIER: u64 = 0xD2B7_4407_B1CE_6E93;
const KEY_BUMP: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn philox_block(key: u64, ctr_hi: u64, ctr_lo: u64) -> (u64, u64) {
    let mut k = key;
    let (mut x0, mut x1) = (ctr_hi, ctr_lo);
    for _ in 0..10 {
        let prod = (MULTIPLIER as u128).wrapping_mul(x0 as u128);
        let hi = (prod >> 64) as u64;
        let lo = prod as u64;
        x0 = hi ^ k ^ x1;
        x1 = lo;
        k = k.wrapping_add(KEY_BUMP);
    }
    (x0, x1)
}

#[derive(Clone, Debug)]
pub struct CounterRng {
    key: u64,
    stream: u64,
    block: u64,
    buffer: [u64; 2],
    cursor: usize,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        CounterRng {
            key: seed,
            stream,
            block: 0,
            buffer: [0; 2],
            cursor: 2,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        if self.cursor == 2 {
            let (a, b) = philox_block(self.key, self.stream, self.block);
            self.buffer = [a, b];
            self.block = self.block.wrapping_add(1);
            self.cursor = 0;
        }
        let v = self.buffer[self.cursor];
        self.cursor += 1;
        v
    }

    /// Uniform in [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform integer in [0, bound) by rejection.
    #[inline]
    pub fn uniform_below(&mut self, bound: u32) -> u32 {
        debug_assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound as u64);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % bound as u64) as u32;
            }
        }
    }
}
