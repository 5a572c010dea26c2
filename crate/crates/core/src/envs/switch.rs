//! Switch: up to four agents on a 3x7 grid must swap sides through a
//! one-cell-wide corridor.
//!
//! The two side columns are open; the middle row bridges them. Each agent's
//! target is the mirrored cell on the opposite side. Reaching the target pays
//! +5 once and removes the agent from the grid; every other step pays the
//! configured step cost (0 by default). The layout is fixed, so the reset
//! seed has no effect here.

use super::{scaled, Dir, GridPos};
use crate::error::{CoreError, Result};
use crate::mdp::{EnvStepResult, JointAction, MultiAgentEnv, ObservationMode};

const ROWS: usize = 3;
const COLS: usize = 7;
const ARRIVAL_REWARD: f64 = 5.0;
const ACTION_COUNT: usize = 5; // up, down, left, right, noop

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchConfig {
    /// Reward of a non-arriving step for an active agent.
    pub step_cost: f64,
    pub max_env_steps: usize,
}

impl Default for SwitchConfig {
    fn default() -> Self {
        SwitchConfig {
            step_cost: 0.0,
            max_env_steps: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchState {
    pub agent_pos: Vec<GridPos>,
    pub arrived: Vec<bool>,
    pub step_count: usize,
}

#[derive(Debug, Clone)]
pub struct SwitchEnv {
    n: usize,
    config: SwitchConfig,
    starts: Vec<GridPos>,
    targets: Vec<GridPos>,
    state: SwitchState,
}

impl SwitchEnv {
    /// Supports 1 to 4 agents. Agents split across the two sides (2/1 for
    /// three agents, 2/2 for four); targets mirror the start cells.
    pub fn new(n: usize, config: SwitchConfig) -> Result<Self> {
        if !(1..=4).contains(&n) {
            return Err(CoreError::InvalidInput(format!(
                "switch supports 1..=4 agents, got {n}"
            )));
        }
        if config.max_env_steps == 0 {
            return Err(CoreError::InvalidInput(
                "max_env_steps must be positive".into(),
            ));
        }
        let left = [GridPos::new(0, 0), GridPos::new(2, 0)];
        let right = [GridPos::new(0, COLS - 1), GridPos::new(2, COLS - 1)];
        let starts: Vec<GridPos> = match n {
            1 => vec![left[0]],
            2 => vec![left[0], right[0]],
            3 => vec![left[0], left[1], right[0]],
            _ => vec![left[0], left[1], right[0], right[1]],
        };
        let targets = starts
            .iter()
            .map(|p| GridPos::new(p.row, COLS - 1 - p.col))
            .collect();
        let state = SwitchState {
            agent_pos: starts.clone(),
            arrived: vec![false; n],
            step_count: 0,
        };
        Ok(SwitchEnv {
            n,
            config,
            starts,
            targets,
            state,
        })
    }

    pub fn targets(&self) -> &[GridPos] {
        &self.targets
    }

    fn passable(pos: GridPos) -> bool {
        // Side columns are open; between them only the middle row is.
        pos.col == 0 || pos.col == COLS - 1 || pos.row == 1
    }

    fn occupied_by_active(&self, cell: GridPos, except: usize) -> bool {
        (0..self.n).any(|j| {
            j != except && !self.state.arrived[j] && self.state.agent_pos[j] == cell
        })
    }
}

impl MultiAgentEnv for SwitchEnv {
    type State = SwitchState;

    fn agent_count(&self) -> usize {
        self.n
    }

    fn action_count(&self) -> usize {
        ACTION_COUNT
    }

    fn reset(&mut self, _seed: u64) -> SwitchState {
        self.state = SwitchState {
            agent_pos: self.starts.clone(),
            arrived: vec![false; self.n],
            step_count: 0,
        };
        self.state.clone()
    }

    fn state(&self) -> SwitchState {
        self.state.clone()
    }

    fn is_terminal(&self) -> bool {
        self.state.arrived.iter().all(|&a| a)
            || self.state.step_count >= self.config.max_env_steps
    }

    fn execute(&mut self, joint: &JointAction) -> Result<EnvStepResult<SwitchState>> {
        if self.is_terminal() {
            return Err(CoreError::ContractViolation(
                "execute on a terminal switch episode".into(),
            ));
        }
        self.validate_joint(joint)?;

        let mut rewards = vec![0.0; self.n];
        for (i, reward) in rewards.iter_mut().enumerate() {
            if self.state.arrived[i] {
                continue;
            }
            if let Some(dir) = Dir::from_action(joint.action(i).index()) {
                if let Some(cell) = self.state.agent_pos[i].moved(dir, ROWS, COLS) {
                    if Self::passable(cell) && !self.occupied_by_active(cell, i) {
                        self.state.agent_pos[i] = cell;
                    }
                }
            }
            if self.state.agent_pos[i] == self.targets[i] {
                *reward = ARRIVAL_REWARD;
                self.state.arrived[i] = true;
            } else {
                *reward = self.config.step_cost;
            }
        }
        self.state.step_count += 1;

        Ok(EnvStepResult {
            next_state: self.state.clone(),
            rewards,
            terminal: self.is_terminal(),
        })
    }

    fn observe(&self, mode: ObservationMode) -> Vec<f64> {
        match mode {
            ObservationMode::Individual => {
                let mut obs = Vec::with_capacity(2 * self.n);
                for i in 0..self.n {
                    let pos = if self.state.arrived[i] {
                        self.targets[i]
                    } else {
                        self.state.agent_pos[i]
                    };
                    obs.push(scaled(pos.row, ROWS));
                    obs.push(scaled(pos.col, COLS));
                }
                obs
            }
            ObservationMode::Collective => {
                // Channels: walls, agent identities, target identities.
                let cells = ROWS * COLS;
                let mut obs = vec![0.0; 3 * cells];
                for row in 0..ROWS {
                    for col in 0..COLS {
                        if !Self::passable(GridPos::new(row, col)) {
                            obs[row * COLS + col] = 1.0;
                        }
                    }
                }
                for i in 0..self.n {
                    let id = (i + 1) as f64 / self.n as f64;
                    if !self.state.arrived[i] {
                        let p = self.state.agent_pos[i];
                        obs[cells + p.row * COLS + p.col] = id;
                    }
                    let t = self.targets[i];
                    obs[2 * cells + t.row * COLS + t.col] = id;
                }
                obs
            }
        }
    }

    fn observation_len(&self, mode: ObservationMode) -> usize {
        match mode {
            ObservationMode::Individual => 2 * self.n,
            ObservationMode::Collective => 3 * ROWS * COLS,
        }
    }

    fn render(&self) -> String {
        let mut grid = vec![vec!['.'; COLS]; ROWS];
        for (row, cells) in grid.iter_mut().enumerate() {
            for (col, cell) in cells.iter_mut().enumerate() {
                if !Self::passable(GridPos::new(row, col)) {
                    *cell = '#';
                }
            }
        }
        for (i, t) in self.targets.iter().enumerate() {
            grid[t.row][t.col] = (b'A' + i as u8) as char;
        }
        for i in 0..self.n {
            if !self.state.arrived[i] {
                let p = self.state.agent_pos[i];
                grid[p.row][p.col] = char::from_digit(i as u32, 10).unwrap();
            }
        }
        grid.into_iter()
            .map(|row| row.into_iter().collect::<String>())
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn action_name(&self, action: usize) -> String {
        match action {
            0 => "up".into(),
            1 => "down".into(),
            2 => "left".into(),
            3 => "right".into(),
            4 => "noop".into(),
            other => format!("a{other}"),
        }
    }
}
