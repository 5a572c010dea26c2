//! TrafficJunction: cars cross a 4-way junction on a 14x14 grid.
//!
//! Two orthogonal two-lane roads cross at the grid center. Cars are assigned
//! to the four entry arms round-robin by index and follow a fixed route
//! (straight through by default; odd-indexed cars turn right when
//! `turning_routes` is set). An unspawned car enters with the configured
//! probability each step if its entry cell is free, drawn from the episode
//! seed. Gas advances one route cell, brake holds. Every on-grid car pays
//! `-0.01 * tau` per step (`tau` = steps since entry) plus `-10` whenever it
//! shares a cell with another car. Cars spawned this step neither move nor
//! age until the next one.

use super::{scaled, GridPos};
use crate::error::{CoreError, Result};
use crate::mdp::{EnvStepResult, JointAction, MultiAgentEnv, ObservationMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ROWS: usize = 14;
const COLS: usize = 14;
const ACTION_GAS: usize = 0;
const ACTION_BRAKE: usize = 1;
const COLLISION_REWARD: f64 = -10.0;
const DELAY_REWARD_RATE: f64 = -0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficConfig {
    /// Per-step entry probability of each unspawned car.
    pub spawn_probability: f64,
    pub max_env_steps: usize,
    /// Odd-indexed cars take a right-turning route instead of crossing
    /// straight.
    pub turning_routes: bool,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            spawn_probability: 0.3,
            max_env_steps: 200,
            turning_routes: false,
        }
    }
}

/// Lifecycle of one car.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CarPhase {
    Unspawned,
    Active {
        /// Index into the car's route.
        path_pos: usize,
        /// Steps elapsed since entry.
        tau: u32,
        /// Spawned this very step: holds still and does not age yet.
        fresh: bool,
    },
    Exited,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficState {
    pub cars: Vec<CarPhase>,
    pub step_count: usize,
}

#[derive(Debug, Clone)]
pub struct TrafficEnv {
    n: usize,
    config: TrafficConfig,
    routes: Vec<Vec<GridPos>>,
    state: TrafficState,
    rng: ChaCha8Rng,
}

/// Route along an entry arm. Arms 0..4: eastbound on row 7, westbound on
/// row 6, southbound on col 6, northbound on col 7 (right-hand traffic).
fn arm_route(arm: usize, turning: bool) -> Vec<GridPos> {
    let straight: Vec<GridPos> = match arm {
        0 => (0..COLS).map(|c| GridPos::new(7, c)).collect(),
        1 => (0..COLS).rev().map(|c| GridPos::new(6, c)).collect(),
        2 => (0..ROWS).map(|r| GridPos::new(r, 6)).collect(),
        _ => (0..ROWS).rev().map(|r| GridPos::new(r, 7)).collect(),
    };
    if !turning {
        return straight;
    }
    // Right turn at the center onto the orthogonal outbound lane.
    match arm {
        0 => (0..=6)
            .map(|c| GridPos::new(7, c))
            .chain((8..ROWS).map(|r| GridPos::new(r, 6)))
            .collect(),
        1 => (7..COLS)
            .rev()
            .map(|c| GridPos::new(6, c))
            .chain((0..6).rev().map(|r| GridPos::new(r, 7)))
            .collect(),
        2 => (0..=6)
            .map(|r| GridPos::new(r, 6))
            .chain((0..6).rev().map(|c| GridPos::new(6, c)))
            .collect(),
        _ => (7..ROWS)
            .rev()
            .map(|r| GridPos::new(r, 7))
            .chain((8..COLS).map(|c| GridPos::new(7, c)))
            .collect(),
    }
}

impl TrafficEnv {
    pub fn new(n: usize, config: TrafficConfig) -> Result<Self> {
        if n == 0 {
            return Err(CoreError::InvalidInput(
                "traffic needs at least one car".into(),
            ));
        }
        if !(0.0..=1.0).contains(&config.spawn_probability) {
            return Err(CoreError::InvalidInput(format!(
                "spawn probability {} outside [0, 1]",
                config.spawn_probability
            )));
        }
        if config.max_env_steps == 0 {
            return Err(CoreError::InvalidInput(
                "max_env_steps must be positive".into(),
            ));
        }
        let routes = (0..n)
            .map(|i| arm_route(i % 4, config.turning_routes && i % 2 == 1))
            .collect();
        Ok(TrafficEnv {
            n,
            config,
            routes,
            state: TrafficState {
                cars: vec![CarPhase::Unspawned; n],
                step_count: 0,
            },
            rng: ChaCha8Rng::seed_from_u64(0),
        })
    }

    pub fn route(&self, car: usize) -> &[GridPos] {
        &self.routes[car]
    }

    /// Cell of car `i` if it is on the grid.
    pub fn car_cell(&self, i: usize) -> Option<GridPos> {
        match self.state.cars[i] {
            CarPhase::Active { path_pos, .. } => Some(self.routes[i][path_pos]),
            _ => None,
        }
    }

    fn cell_occupied(&self, cell: GridPos) -> bool {
        (0..self.n).any(|i| self.car_cell(i) == Some(cell))
    }
}

impl MultiAgentEnv for TrafficEnv {
    type State = TrafficState;

    fn agent_count(&self) -> usize {
        self.n
    }

    fn action_count(&self) -> usize {
        2
    }

    fn reset(&mut self, seed: u64) -> TrafficState {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.state = TrafficState {
            cars: vec![CarPhase::Unspawned; self.n],
            step_count: 0,
        };
        self.state.clone()
    }

    fn state(&self) -> TrafficState {
        self.state.clone()
    }

    fn is_terminal(&self) -> bool {
        self.state.cars.iter().all(|c| matches!(c, CarPhase::Exited))
            || self.state.step_count >= self.config.max_env_steps
    }

    fn execute(&mut self, joint: &JointAction) -> Result<EnvStepResult<TrafficState>> {
        if self.is_terminal() {
            return Err(CoreError::ContractViolation(
                "execute on a terminal traffic episode".into(),
            ));
        }
        self.validate_joint(joint)?;

        // Spawn phase. One draw per unspawned car per step keeps the random
        // stream independent of occupancy.
        for i in 0..self.n {
            if matches!(self.state.cars[i], CarPhase::Unspawned) {
                let draw: f64 = self.rng.gen();
                if draw < self.config.spawn_probability && !self.cell_occupied(self.routes[i][0])
                {
                    self.state.cars[i] = CarPhase::Active {
                        path_pos: 0,
                        tau: 0,
                        fresh: true,
                    };
                }
            }
        }

        // Movement phase. Cars never block each other; overlaps are
        // penalized as collisions instead.
        for i in 0..self.n {
            if let CarPhase::Active {
                path_pos,
                tau,
                fresh: false,
            } = self.state.cars[i]
            {
                let tau = tau + 1;
                if joint.action(i).index() == ACTION_GAS {
                    if path_pos + 1 == self.routes[i].len() {
                        self.state.cars[i] = CarPhase::Exited;
                    } else {
                        self.state.cars[i] = CarPhase::Active {
                            path_pos: path_pos + 1,
                            tau,
                            fresh: false,
                        };
                    }
                } else {
                    self.state.cars[i] = CarPhase::Active {
                        path_pos,
                        tau,
                        fresh: false,
                    };
                }
            }
        }

        // Reward phase.
        let mut rewards = vec![0.0; self.n];
        for (i, reward) in rewards.iter_mut().enumerate() {
            if let CarPhase::Active { tau, .. } = self.state.cars[i] {
                *reward = DELAY_REWARD_RATE * tau as f64;
                let cell = self.car_cell(i).unwrap();
                let shared = (0..self.n).any(|j| j != i && self.car_cell(j) == Some(cell));
                if shared {
                    *reward += COLLISION_REWARD;
                }
            }
        }

        // Fresh cars join the flow next step.
        for car in &mut self.state.cars {
            if let CarPhase::Active { fresh, .. } = car {
                *fresh = false;
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
                let mut obs = Vec::with_capacity(4 * self.n);
                for i in 0..self.n {
                    match self.state.cars[i] {
                        CarPhase::Active { tau, .. } => {
                            let cell = self.car_cell(i).unwrap();
                            obs.push(scaled(cell.row, ROWS));
                            obs.push(scaled(cell.col, COLS));
                            obs.push(1.0);
                            obs.push(tau.min(100) as f64 / 100.0);
                        }
                        _ => obs.extend_from_slice(&[-1.0, -1.0, 0.0, 0.0]),
                    }
                }
                obs
            }
            ObservationMode::Collective => {
                // Channels: road cells, car identities.
                let cells = ROWS * COLS;
                let mut obs = vec![0.0f64; 2 * cells];
                for route in &self.routes {
                    for p in route {
                        obs[p.row * COLS + p.col] = 1.0;
                    }
                }
                for i in 0..self.n {
                    if let Some(cell) = self.car_cell(i) {
                        let slot = cells + cell.row * COLS + cell.col;
                        let id = (i + 1) as f64 / self.n as f64;
                        obs[slot] = obs[slot].max(id);
                    }
                }
                obs
            }
        }
    }

    fn observation_len(&self, mode: ObservationMode) -> usize {
        match mode {
            ObservationMode::Individual => 4 * self.n,
            ObservationMode::Collective => 2 * ROWS * COLS,
        }
    }

    fn render(&self) -> String {
        let mut grid = vec![vec!['.'; COLS]; ROWS];
        for route in &self.routes {
            for p in route {
                grid[p.row][p.col] = ':';
            }
        }
        for i in 0..self.n {
            if let Some(cell) = self.car_cell(i) {
                let slot = &mut grid[cell.row][cell.col];
                *slot = if slot.is_ascii_digit() || *slot == '*' {
                    '*'
                } else {
                    char::from_digit((i % 10) as u32, 10).unwrap()
                };
            }
        }
        grid.into_iter()
            .map(|row| row.into_iter().collect::<String>())
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn action_name(&self, action: usize) -> String {
        match action {
            ACTION_GAS => "gas".into(),
            ACTION_BRAKE => "brake".into(),
            other => format!("a{other}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spawn_all(env: &mut TrafficEnv) {
        // Probability 1 guarantees entry on the first free step.
        for car in env.state.cars.iter_mut() {
            *car = CarPhase::Active {
                path_pos: 0,
                tau: 0,
                fresh: false,
            };
        }
    }

    #[test]
    fn routes_are_grid_adjacent() {
        for turning in [false, true] {
            let env = TrafficEnv::new(8, TrafficConfig {
                turning_routes: turning,
                ..TrafficConfig::default()
            })
            .unwrap();
            for i in 0..8 {
                let route = env.route(i);
                assert!(!route.is_empty());
                for pair in route.windows(2) {
                    let dist = pair[0].row.abs_diff(pair[1].row)
                        + pair[0].col.abs_diff(pair[1].col);
                    assert_eq!(dist, 1, "car {i} route not adjacent: {pair:?}");
                }
            }
        }
    }

    #[test]
    fn straight_crossing_accumulates_delay_series() {
        // One car, gas every step, route of 14 cells: rewards -0.01 * tau for
        // tau = 0..=13, then exit. Total -0.91.
        let mut env = TrafficEnv::new(1, TrafficConfig {
            spawn_probability: 1.0,
            ..TrafficConfig::default()
        })
        .unwrap();
        env.reset(3);
        let mut total = 0.0;
        let mut steps = 0;
        while !env.is_terminal() {
            let r = env.execute(&JointAction::from_indices(&[ACTION_GAS])).unwrap();
            total += r.rewards[0];
            steps += 1;
        }
        assert_eq!(steps, 15); // spawn step + 14 moves (the last one exits)
        assert!((total - (-0.91)).abs() < 1e-12, "total {total}");
    }

    #[test]
    fn braking_car_never_moves_and_tau_still_grows() {
        let mut env = TrafficEnv::new(1, TrafficConfig::default()).unwrap();
        env.reset(0);
        spawn_all(&mut env);
        let cell = env.car_cell(0).unwrap();
        for expected_tau in 1..=5u32 {
            let r = env
                .execute(&JointAction::from_indices(&[ACTION_BRAKE]))
                .unwrap();
            assert_eq!(env.car_cell(0), Some(cell));
            assert!((r.rewards[0] - DELAY_REWARD_RATE * expected_tau as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn collision_penalizes_both_cars() {
        // Cars 0 (eastbound row 7) and 3 (northbound col 7) meet at (7,7):
        // car 0 needs 7 gas steps from (7,0), car 3 needs 6 from (13,7).
        let mut env = TrafficEnv::new(4, TrafficConfig::default()).unwrap();
        env.reset(0);
        spawn_all(&mut env);
        let mut last = None;
        for step in 0..7 {
            let brake_3 = usize::from(step == 0); // stagger car 3 by one step
            last = Some(
                env.execute(&JointAction::from_indices(&[
                    ACTION_GAS,
                    ACTION_BRAKE,
                    ACTION_BRAKE,
                    brake_3,
                ]))
                .unwrap(),
            );
        }
        let r = last.unwrap();
        assert_eq!(env.car_cell(0), Some(GridPos::new(7, 7)));
        assert_eq!(env.car_cell(3), Some(GridPos::new(7, 7)));
        let tau = 7.0;
        assert!((r.rewards[0] - (COLLISION_REWARD + DELAY_REWARD_RATE * tau)).abs() < 1e-12);
        assert!((r.rewards[3] - (COLLISION_REWARD + DELAY_REWARD_RATE * tau)).abs() < 1e-12);
        // Cars 1 and 2 are elsewhere: pure delay.
        assert!((r.rewards[1] - DELAY_REWARD_RATE * tau).abs() < 1e-12);
    }

    #[test]
    fn unspawned_cars_receive_zero() {
        let mut env = TrafficEnv::new(3, TrafficConfig {
            spawn_probability: 0.0,
            ..TrafficConfig::default()
        })
        .unwrap();
        env.reset(9);
        let r = env
            .execute(&JointAction::from_indices(&[0, 0, 0]))
            .unwrap();
        assert_eq!(r.rewards, vec![0.0, 0.0, 0.0]);
        assert!(env.state.cars.iter().all(|c| matches!(c, CarPhase::Unspawned)));
    }

    #[test]
    fn blocked_entry_cell_delays_spawn() {
        // Cars 0 and 4 share arm 0. Car 0 sits on the entry cell braking, so
        // car 4 cannot enter.
        let mut env = TrafficEnv::new(5, TrafficConfig {
            spawn_probability: 1.0,
            ..TrafficConfig::default()
        })
        .unwrap();
        env.reset(0);
        let brake_all = JointAction::from_indices(&[1, 1, 1, 1, 1]);
        env.execute(&brake_all).unwrap();
        assert!(matches!(env.state.cars[0], CarPhase::Active { .. }));
        assert!(matches!(env.state.cars[4], CarPhase::Unspawned));
        env.execute(&brake_all).unwrap();
        assert!(matches!(env.state.cars[4], CarPhase::Unspawned));
    }

    #[test]
    fn same_seed_same_trajectory() {
        let config = TrafficConfig::default();
        let runs: Vec<Vec<TrafficState>> = (0..2)
            .map(|_| {
                let mut env = TrafficEnv::new(4, config).unwrap();
                env.reset(42);
                (0..30)
                    .map(|step| {
                        let actions: Vec<usize> =
                            (0..4).map(|i| (step + i) % 2).collect();
                        env.execute(&JointAction::from_indices(&actions))
                            .unwrap()
                            .next_state
                    })
                    .collect()
            })
            .collect();
        assert_eq!(runs[0], runs[1]);
    }

    #[test]
    fn collision_free_rewards_are_pure_delay() {
        // Two cars on the parallel east/west lanes can never collide, so
        // every reward must be exactly -0.01 * tau tracked externally.
        use rand::{Rng, SeedableRng};
        for seed in 0..20u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut env = TrafficEnv::new(2, TrafficConfig {
                spawn_probability: 0.5,
                max_env_steps: 60,
                ..TrafficConfig::default()
            })
            .unwrap();
            env.reset(seed);
            let mut tau = [None::<u32>; 2];
            while !env.is_terminal() {
                let actions: Vec<usize> = (0..2).map(|_| rng.gen_range(0..2)).collect();
                let before: Vec<bool> = (0..2)
                    .map(|i| matches!(env.state.cars[i], CarPhase::Active { .. }))
                    .collect();
                let r = env.execute(&JointAction::from_indices(&actions)).unwrap();
                for i in 0..2 {
                    match env.state.cars[i] {
                        CarPhase::Active { .. } => {
                            tau[i] = Some(match (before[i], tau[i]) {
                                (false, _) => 0,
                                (true, Some(t)) => t + 1,
                                (true, None) => unreachable!(),
                            });
                            let expected = DELAY_REWARD_RATE * tau[i].unwrap() as f64;
                            assert!(
                                (r.rewards[i] - expected).abs() < 1e-12,
                                "seed {seed}, car {i}: reward {} vs -0.01*{}",
                                r.rewards[i],
                                tau[i].unwrap()
                            );
                        }
                        _ => assert_eq!(r.rewards[i], 0.0),
                    }
                }
            }
        }
    }

    #[test]
    fn observation_sentinels_for_absent_cars() {
        let mut env = TrafficEnv::new(4, TrafficConfig {
            spawn_probability: 0.0,
            ..TrafficConfig::default()
        })
        .unwrap();
        env.reset(0);
        let obs = env.observe(ObservationMode::Individual);
        assert_eq!(obs.len(), 16);
        for chunk in obs.chunks(4) {
            assert_eq!(chunk, &[-1.0, -1.0, 0.0, 0.0]);
        }
    }
}
