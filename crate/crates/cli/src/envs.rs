//! Uniform dispatch over the three gridworld environments, so commands can
//! hold one concrete type regardless of the configured task.

use supervisor_core::envs::{
    CombatEnv, CombatState, SwitchEnv, SwitchState, TrafficEnv, TrafficState,
};
use supervisor_core::mdp::{EnvStepResult, JointAction, MultiAgentEnv, ObservationMode};
use supervisor_core::Result;

// Variant sizes differ by a few hundred bytes at most; boxing would only
// add indirection.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum AnyEnv {
    Switch(SwitchEnv),
    Traffic(TrafficEnv),
    Combat(CombatEnv),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyState {
    Switch(SwitchState),
    Traffic(TrafficState),
    Combat(CombatState),
}

macro_rules! dispatch {
    ($self:expr, $env:ident => $body:expr) => {
        match $self {
            AnyEnv::Switch($env) => $body,
            AnyEnv::Traffic($env) => $body,
            AnyEnv::Combat($env) => $body,
        }
    };
}

impl MultiAgentEnv for AnyEnv {
    type State = AnyState;

    fn agent_count(&self) -> usize {
        dispatch!(self, e => e.agent_count())
    }

    fn action_count(&self) -> usize {
        dispatch!(self, e => e.action_count())
    }

    fn reset(&mut self, seed: u64) -> AnyState {
        match self {
            AnyEnv::Switch(e) => AnyState::Switch(e.reset(seed)),
            AnyEnv::Traffic(e) => AnyState::Traffic(e.reset(seed)),
            AnyEnv::Combat(e) => AnyState::Combat(e.reset(seed)),
        }
    }

    fn state(&self) -> AnyState {
        match self {
            AnyEnv::Switch(e) => AnyState::Switch(e.state()),
            AnyEnv::Traffic(e) => AnyState::Traffic(e.state()),
            AnyEnv::Combat(e) => AnyState::Combat(e.state()),
        }
    }

    fn is_terminal(&self) -> bool {
        dispatch!(self, e => e.is_terminal())
    }

    fn execute(&mut self, joint: &JointAction) -> Result<EnvStepResult<AnyState>> {
        match self {
            AnyEnv::Switch(e) => e.execute(joint).map(|r| EnvStepResult {
                next_state: AnyState::Switch(r.next_state),
                rewards: r.rewards,
                terminal: r.terminal,
            }),
            AnyEnv::Traffic(e) => e.execute(joint).map(|r| EnvStepResult {
                next_state: AnyState::Traffic(r.next_state),
                rewards: r.rewards,
                terminal: r.terminal,
            }),
            AnyEnv::Combat(e) => e.execute(joint).map(|r| EnvStepResult {
                next_state: AnyState::Combat(r.next_state),
                rewards: r.rewards,
                terminal: r.terminal,
            }),
        }
    }

    fn observe(&self, mode: ObservationMode) -> Vec<f64> {
        dispatch!(self, e => e.observe(mode))
    }

    fn observation_len(&self, mode: ObservationMode) -> usize {
        dispatch!(self, e => e.observation_len(mode))
    }

    fn render(&self) -> String {
        dispatch!(self, e => e.render())
    }

    fn action_name(&self, action: usize) -> String {
        dispatch!(self, e => e.action_name(action))
    }
}
