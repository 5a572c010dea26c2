//! Properties of the compiled environment that must hold over arbitrary
//! meta-action streams, on every environment.

use proptest::prelude::*;
use supervisor_core::envs::{
    CombatConfig, CombatEnv, SwitchConfig, SwitchEnv, TrafficConfig, TrafficEnv,
};
use supervisor_core::mdp::{AgentAction, JointAction, MultiAgentEnv, ObservationMode};
use supervisor_core::oracle::{random_mmdp, ExplicitEnv};
use supervisor_core::supervisor::CompiledEnv;

/// Drives a compiled environment and a twin raw environment with the same
/// stream, checking the step cadence, zero intermediate rewards, prefix
/// structure, inner-state freezing, and exact cumulative reward equality.
fn check_stream<E>(make: impl Fn() -> E, seed: u64, stream: &[usize], episodes: usize)
where
    E: MultiAgentEnv,
{
    let mut compiled = CompiledEnv::new(make(), seed);
    let mut twin = make();
    twin.reset(seed);

    let n = compiled.agent_count();
    let actions = compiled.meta_action_count();
    let mut cumulative_meta = 0.0;
    let mut cumulative_env = 0.0;
    let mut pending: Vec<usize> = Vec::new();
    let mut step_in_episode = 0usize;
    let mut episodes_done = 0usize;

    for &raw in stream {
        if episodes_done >= episodes {
            break;
        }
        let action = raw % actions;
        let before = compiled.inner().state();
        let result = compiled.step(AgentAction(action)).expect("in-episode step");
        pending.push(action);

        let expect_env_step = step_in_episode % n == n - 1;
        assert_eq!(result.env_stepped, expect_env_step, "cadence broke");
        if !result.env_stepped {
            assert_eq!(result.meta_reward, 0.0, "intermediate reward must be 0");
            assert_eq!(compiled.inner().state(), before, "inner state moved early");
            assert!(!result.terminal);
        } else {
            let joint = JointAction::from_indices(&pending);
            let env_result = twin.execute(&joint).expect("twin step");
            let summed: f64 = env_result.rewards.iter().sum();
            assert_eq!(result.meta_reward, summed, "meta reward != summed reward");
            assert_eq!(result.terminal, env_result.terminal);
            assert_eq!(result.next.env_state, env_result.next_state);
            cumulative_env += summed;
            pending.clear();
        }
        cumulative_meta += result.meta_reward;

        // Prefix structure with at least one open slot at every decision
        // point.
        let assignments = &result.next.assignments;
        let slots = assignments.slots();
        let holes = assignments.count_unassigned();
        assert!(holes >= 1);
        let first_hole = slots.iter().position(|s| s.is_none()).unwrap();
        assert!(slots[first_hole..].iter().all(|s| s.is_none()));

        step_in_episode += 1;
        if result.terminal {
            episodes_done += 1;
            step_in_episode = 0;
            let reseed = seed ^ (episodes_done as u64) << 4;
            compiled.reset(reseed);
            twin.reset(reseed);
            pending.clear();
        }
    }
    assert_eq!(cumulative_meta, cumulative_env, "cumulative rewards diverged");
}

fn switch() -> SwitchEnv {
    SwitchEnv::new(2, SwitchConfig {
        max_env_steps: 20,
        ..SwitchConfig::default()
    })
    .unwrap()
}

fn traffic() -> TrafficEnv {
    TrafficEnv::new(4, TrafficConfig {
        max_env_steps: 25,
        ..TrafficConfig::default()
    })
    .unwrap()
}

fn combat() -> CombatEnv {
    CombatEnv::new(5, CombatConfig { max_env_steps: 15 }).unwrap()
}

fn explicit() -> ExplicitEnv {
    ExplicitEnv::new(random_mmdp(77, 4, 3, 3, 6)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn switch_stream_properties(seed in 0u64..1_000, stream in proptest::collection::vec(0usize..32, 20..160)) {
        check_stream(switch, seed, &stream, 2);
    }

    #[test]
    fn traffic_stream_properties(seed in 0u64..1_000, stream in proptest::collection::vec(0usize..32, 20..220)) {
        check_stream(traffic, seed, &stream, 2);
    }

    #[test]
    fn combat_stream_properties(seed in 0u64..1_000, stream in proptest::collection::vec(0usize..32, 20..200)) {
        check_stream(combat, seed, &stream, 2);
    }

    #[test]
    fn explicit_stream_properties(seed in 0u64..1_000, stream in proptest::collection::vec(0usize..32, 20..120)) {
        check_stream(explicit, seed, &stream, 3);
    }

    #[test]
    fn identical_streams_give_identical_results(seed in 0u64..1_000, stream in proptest::collection::vec(0usize..5, 10..60)) {
        let run = || {
            let mut compiled = CompiledEnv::new(traffic(), seed);
            let mut results = Vec::new();
            for &raw in &stream {
                let r = compiled.step(AgentAction(raw % 2)).unwrap();
                let terminal = r.terminal;
                results.push(r);
                if terminal {
                    break;
                }
            }
            results
        };
        prop_assert_eq!(run(), run());
    }
}

#[test]
fn meta_observation_length_is_obs_plus_agents() {
    fn check<E: MultiAgentEnv>(env: E, seed: u64) {
        let n = env.agent_count();
        let compiled = CompiledEnv::new(env, seed);
        for mode in [ObservationMode::Individual, ObservationMode::Collective] {
            let expected = compiled.inner().observation_len(mode) + n;
            assert_eq!(compiled.meta_observation_len(mode), expected);
            assert_eq!(compiled.observe_meta(mode).len(), expected);
            assert!(compiled
                .observe_meta(mode)
                .iter()
                .all(|v| (-1.0..=1.0).contains(v)));
        }
    }
    check(switch(), 3);
    check(traffic(), 3);
    check(combat(), 3);
    for n in 1..=4 {
        check(SwitchEnv::new(n, SwitchConfig::default()).unwrap(), 0);
    }
}
