//! Combat: a blue team (controlled) fights a scripted red team on a 15x15
//! grid.
//!
//! Every fighter has three health points. An attack hits when the target is
//! alive and within Chebyshev distance 3; a hit fighter spends the next step
//! recovering and cannot deal damage during it (attempting an attack then
//! does nothing). Red agents resolve first each step: they attack the
//! nearest alive blue when in range and off cooldown, otherwise step toward
//! it. Rewards are zero until the episode ends; a loss (any red alive at the
//! end, including timeout) pays the team `-1 - 0.1 * (remaining red
//! health)`, split evenly across the blue reward slots, and a win pays zero.

use super::{Dir, GridPos};
use crate::error::{CoreError, Result};
use crate::mdp::{EnvStepResult, JointAction, MultiAgentEnv, ObservationMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ROWS: usize = 15;
const COLS: usize = 15;
const MAX_HEALTH: u8 = 3;
const ATTACK_RANGE: usize = 3;
const MOVE_ACTIONS: usize = 5; // up, down, left, right, noop

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombatConfig {
    pub max_env_steps: usize,
}

impl Default for CombatConfig {
    fn default() -> Self {
        CombatConfig { max_env_steps: 100 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fighter {
    pub pos: GridPos,
    pub health: u8,
    /// 1 while recovering from a hit taken last step.
    pub cooldown: u8,
}

impl Fighter {
    fn alive(&self) -> bool {
        self.health > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombatState {
    pub blue: Vec<Fighter>,
    pub red: Vec<Fighter>,
    pub step_count: usize,
}

#[derive(Debug, Clone)]
pub struct CombatEnv {
    n: usize,
    config: CombatConfig,
    state: CombatState,
}

impl CombatEnv {
    /// `n` blue agents against `n` scripted red agents. Teams spawn in
    /// opposing 5x5 regions chosen by the reset seed.
    pub fn new(n: usize, config: CombatConfig) -> Result<Self> {
        if !(1..=25).contains(&n) {
            return Err(CoreError::InvalidInput(format!(
                "combat supports 1..=25 agents per team, got {n}"
            )));
        }
        if config.max_env_steps == 0 {
            return Err(CoreError::InvalidInput(
                "max_env_steps must be positive".into(),
            ));
        }
        let mut env = CombatEnv {
            n,
            config,
            state: CombatState {
                blue: Vec::new(),
                red: Vec::new(),
                step_count: 0,
            },
        };
        env.reset(0);
        Ok(env)
    }

    pub fn red_count(&self) -> usize {
        self.n
    }

    /// Builds an arena with explicit fighters instead of seeded placement;
    /// both teams must have the same size. A later `reset` re-rolls the
    /// seeded layout.
    pub fn with_fighters(
        config: CombatConfig,
        blue: Vec<Fighter>,
        red: Vec<Fighter>,
    ) -> Result<Self> {
        if blue.is_empty() || blue.len() != red.len() {
            return Err(CoreError::InvalidInput(
                "combat teams must be non-empty and equally sized".into(),
            ));
        }
        let mut cells = std::collections::HashSet::new();
        for f in blue.iter().chain(red.iter()) {
            if f.pos.row >= ROWS || f.pos.col >= COLS || f.health > MAX_HEALTH || f.cooldown > 1 {
                return Err(CoreError::InvalidInput(format!("invalid fighter {f:?}")));
            }
            if f.alive() && !cells.insert(f.pos) {
                return Err(CoreError::InvalidInput(format!(
                    "two fighters share cell {:?}",
                    f.pos
                )));
            }
        }
        let n = blue.len();
        Ok(CombatEnv {
            n,
            config,
            state: CombatState {
                blue,
                red,
                step_count: 0,
            },
        })
    }

    fn spawn_team(rng: &mut ChaCha8Rng, n: usize, rows: &[usize], cols: &[usize]) -> Vec<Fighter> {
        let mut cells: Vec<GridPos> = rows
            .iter()
            .flat_map(|&r| cols.iter().map(move |&c| GridPos::new(r, c)))
            .collect();
        for k in 0..n {
            let j = rng.gen_range(k..cells.len());
            cells.swap(k, j);
        }
        cells[..n]
            .iter()
            .map(|&pos| Fighter {
                pos,
                health: MAX_HEALTH,
                cooldown: 0,
            })
            .collect()
    }

    fn cell_occupied(&self, cell: GridPos) -> bool {
        self.state
            .blue
            .iter()
            .chain(self.state.red.iter())
            .any(|f| f.alive() && f.pos == cell)
    }

    /// Nearest alive blue agent to `pos` (Chebyshev, lowest index wins ties).
    fn nearest_alive_blue(&self, pos: GridPos) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for (i, f) in self.state.blue.iter().enumerate() {
            if !f.alive() {
                continue;
            }
            let d = pos.chebyshev(f.pos);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, i));
            }
        }
        best.map(|(_, i)| i)
    }

    /// One step toward `target` for the fighter at `from`: prefer the axis
    /// with the larger offset (row on ties); a blocked move falls back to the
    /// other axis, then to standing still.
    fn step_toward(&self, from: GridPos, target: GridPos) -> GridPos {
        let row_dir = match target.row.cmp(&from.row) {
            std::cmp::Ordering::Less => Some(Dir::Up),
            std::cmp::Ordering::Greater => Some(Dir::Down),
            std::cmp::Ordering::Equal => None,
        };
        let col_dir = match target.col.cmp(&from.col) {
            std::cmp::Ordering::Less => Some(Dir::Left),
            std::cmp::Ordering::Greater => Some(Dir::Right),
            std::cmp::Ordering::Equal => None,
        };
        let dr = target.row.abs_diff(from.row);
        let dc = target.col.abs_diff(from.col);
        let order = if dr >= dc {
            [row_dir, col_dir]
        } else {
            [col_dir, row_dir]
        };
        for dir in order.into_iter().flatten() {
            if let Some(cell) = from.moved(dir, ROWS, COLS) {
                if !self.cell_occupied(cell) {
                    return cell;
                }
            }
        }
        from
    }

    fn team_alive(team: &[Fighter]) -> bool {
        team.iter().any(Fighter::alive)
    }
}

impl MultiAgentEnv for CombatEnv {
    type State = CombatState;

    fn agent_count(&self) -> usize {
        self.n
    }

    fn action_count(&self) -> usize {
        MOVE_ACTIONS + self.n
    }

    fn reset(&mut self, seed: u64) -> CombatState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<usize> = (5..10).collect();
        let blue_cols: Vec<usize> = (1..6).collect();
        let red_cols: Vec<usize> = (9..14).collect();
        self.state = CombatState {
            blue: Self::spawn_team(&mut rng, self.n, &rows, &blue_cols),
            red: Self::spawn_team(&mut rng, self.n, &rows, &red_cols),
            step_count: 0,
        };
        self.state.clone()
    }

    fn state(&self) -> CombatState {
        self.state.clone()
    }

    fn is_terminal(&self) -> bool {
        !Self::team_alive(&self.state.blue)
            || !Self::team_alive(&self.state.red)
            || self.state.step_count >= self.config.max_env_steps
    }

    fn execute(&mut self, joint: &JointAction) -> Result<EnvStepResult<CombatState>> {
        if self.is_terminal() {
            return Err(CoreError::ContractViolation(
                "execute on a terminal combat episode".into(),
            ));
        }
        self.validate_joint(joint)?;

        // Hits taken this step start the recovery cooldown next step.
        let mut blue_hit = vec![false; self.n];
        let mut red_hit = vec![false; self.n];

        // Red phase: scripted, resolved in index order.
        for j in 0..self.n {
            if !self.state.red[j].alive() {
                continue;
            }
            let Some(target) = self.nearest_alive_blue(self.state.red[j].pos) else {
                break;
            };
            let red_pos = self.state.red[j].pos;
            let blue_pos = self.state.blue[target].pos;
            if red_pos.chebyshev(blue_pos) <= ATTACK_RANGE && self.state.red[j].cooldown == 0 {
                self.state.blue[target].health -= 1;
                blue_hit[target] = true;
            } else {
                self.state.red[j].pos = self.step_toward(red_pos, blue_pos);
            }
        }

        // Blue phase: agents defeated earlier this step take no action.
        for i in 0..self.n {
            if !self.state.blue[i].alive() {
                continue;
            }
            let action = joint.action(i).index();
            if let Some(dir) = Dir::from_action(action) {
                if let Some(cell) = self.state.blue[i].pos.moved(dir, ROWS, COLS) {
                    if !self.cell_occupied(cell) {
                        self.state.blue[i].pos = cell;
                    }
                }
            } else if action >= MOVE_ACTIONS {
                let j = action - MOVE_ACTIONS;
                let in_range = self.state.blue[i]
                    .pos
                    .chebyshev(self.state.red[j].pos)
                    <= ATTACK_RANGE;
                if self.state.blue[i].cooldown == 0 && self.state.red[j].alive() && in_range {
                    self.state.red[j].health -= 1;
                    red_hit[j] = true;
                }
            }
        }

        // Cooldowns last exactly one step; fresh hits arm them for the next.
        for (f, &hit) in self.state.blue.iter_mut().zip(&blue_hit) {
            f.cooldown = u8::from(hit);
        }
        for (f, &hit) in self.state.red.iter_mut().zip(&red_hit) {
            f.cooldown = u8::from(hit);
        }

        self.state.step_count += 1;
        let terminal = self.is_terminal();
        let mut rewards = vec![0.0; self.n];
        if terminal && Self::team_alive(&self.state.red) {
            let remaining: u32 = self.state.red.iter().map(|f| f.health as u32).sum();
            let team = -1.0 - 0.1 * remaining as f64;
            rewards.iter_mut().for_each(|r| *r = team / self.n as f64);
        }

        Ok(EnvStepResult {
            next_state: self.state.clone(),
            rewards,
            terminal,
        })
    }

    fn observe(&self, mode: ObservationMode) -> Vec<f64> {
        match mode {
            ObservationMode::Individual => {
                let mut obs = Vec::with_capacity(7 * self.n);
                for f in &self.state.blue {
                    if f.alive() {
                        obs.push(super::scaled(f.pos.row, ROWS));
                        obs.push(super::scaled(f.pos.col, COLS));
                        obs.push(f.health as f64 / MAX_HEALTH as f64);
                        obs.push(f.cooldown as f64);
                    } else {
                        obs.extend_from_slice(&[-1.0, -1.0, 0.0, 0.0]);
                    }
                }
                for f in &self.state.red {
                    if f.alive() {
                        obs.push(super::scaled(f.pos.row, ROWS));
                        obs.push(super::scaled(f.pos.col, COLS));
                        obs.push(f.health as f64 / MAX_HEALTH as f64);
                    } else {
                        obs.extend_from_slice(&[-1.0, -1.0, 0.0]);
                    }
                }
                obs
            }
            ObservationMode::Collective => {
                // Channels: blue health, red health.
                let cells = ROWS * COLS;
                let mut obs = vec![0.0; 2 * cells];
                for f in &self.state.blue {
                    if f.alive() {
                        obs[f.pos.row * COLS + f.pos.col] =
                            f.health as f64 / MAX_HEALTH as f64;
                    }
                }
                for f in &self.state.red {
                    if f.alive() {
                        obs[cells + f.pos.row * COLS + f.pos.col] =
                            f.health as f64 / MAX_HEALTH as f64;
                    }
                }
                obs
            }
        }
    }

    fn observation_len(&self, mode: ObservationMode) -> usize {
        match mode {
            ObservationMode::Individual => 7 * self.n,
            ObservationMode::Collective => 2 * ROWS * COLS,
        }
    }

    fn render(&self) -> String {
        let mut grid = vec![vec!['.'; COLS]; ROWS];
        for f in &self.state.blue {
            if f.alive() {
                grid[f.pos.row][f.pos.col] = char::from_digit(f.health as u32, 10).unwrap();
            }
        }
        for f in &self.state.red {
            if f.alive() {
                grid[f.pos.row][f.pos.col] = (b'a' + f.health - 1) as char;
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
            a if a >= MOVE_ACTIONS && a < MOVE_ACTIONS + self.n => {
                format!("attack{}", a - MOVE_ACTIONS + 1)
            }
            other => format!("a{other}"),
        }
    }
}
