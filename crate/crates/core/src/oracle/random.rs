//! Seeded random MMDP generation for the verification suites.

use super::ExplicitMmdp;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generates a deterministic MMDP from `seed`: transitions uniform over
/// states, per-agent rewards uniform in `[-1, 1]`, initial state 0.
pub fn random_mmdp(
    seed: u64,
    state_count: usize,
    agent_count: usize,
    action_count: usize,
    horizon: usize,
) -> ExplicitMmdp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = state_count * action_count.pow(agent_count as u32);
    let transition = (0..pairs).map(|_| rng.gen_range(0..state_count)).collect();
    let rewards = (0..pairs * agent_count)
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    ExplicitMmdp {
        state_count,
        agent_count,
        action_count,
        transition,
        rewards,
        initial_state: 0,
        horizon,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_tables() {
        assert_eq!(random_mmdp(9, 4, 2, 3, 3), random_mmdp(9, 4, 2, 3, 3));
    }

    #[test]
    fn different_seeds_differ_somewhere() {
        let a = random_mmdp(1, 4, 2, 3, 3);
        let b = random_mmdp(2, 4, 2, 3, 3);
        assert!(a.transition != b.transition || a.rewards != b.rewards);
    }

    #[test]
    fn rewards_stay_in_range() {
        let m = random_mmdp(5, 6, 3, 3, 4);
        assert!(m.rewards.iter().all(|r| (-1.0..=1.0).contains(r)));
        assert!(m.validate().is_ok());
    }
}
