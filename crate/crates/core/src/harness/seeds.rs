//! Expansion of one run seed into independent generator seeds.

/// One step of the splitmix64 sequence.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeds for the parameter init, minibatch shuffling, evaluation and each
/// environment's stream (layout draws, action sampling, augmentation).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    pub init: u64,
    pub update: u64,
    pub eval: u64,
    env_base: u64,
}

impl SeedStreams {
    pub fn new(seed: u64) -> Self {
        let mut state = seed;
        SeedStreams {
            init: splitmix64(&mut state),
            update: splitmix64(&mut state),
            eval: splitmix64(&mut state),
            env_base: splitmix64(&mut state),
        }
    }

    pub fn env(&self, index: usize) -> u64 {
        let mut state = self.env_base ^ (index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
        splitmix64(&mut state)
    }

    /// Seed of the `n`-th evaluation round.
    pub fn eval_round(&self, n: u64) -> u64 {
        let mut state = self.eval.wrapping_add(n);
        splitmix64(&mut state)
    }
}
