//! Deterministic, seedable cooperative gridworlds.
//!
//! Three tasks with shared conventions: agents index a common action set,
//! simultaneous moves resolve in ascending agent index (losers stay put),
//! and all randomness flows from the per-episode reset seed.

mod combat;
mod switch;
mod traffic;

pub use combat::{CombatConfig, CombatEnv, CombatState, Fighter};
pub use switch::{SwitchConfig, SwitchEnv, SwitchState};
pub use traffic::{CarPhase, TrafficConfig, TrafficEnv, TrafficState};

/// A cell in a row/column grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridPos {
    pub row: usize,
    pub col: usize,
}

impl GridPos {
    pub fn new(row: usize, col: usize) -> Self {
        GridPos { row, col }
    }

    /// Chebyshev distance: max of row and column offsets.
    pub fn chebyshev(self, other: GridPos) -> usize {
        let dr = self.row.abs_diff(other.row);
        let dc = self.col.abs_diff(other.col);
        dr.max(dc)
    }

    /// The neighboring cell in `dir`, if it stays inside a `rows x cols`
    /// grid.
    pub(crate) fn moved(self, dir: Dir, rows: usize, cols: usize) -> Option<GridPos> {
        let (row, col) = match dir {
            Dir::Up => (self.row.checked_sub(1)?, self.col),
            Dir::Down => (self.row + 1, self.col),
            Dir::Left => (self.row, self.col.checked_sub(1)?),
            Dir::Right => (self.row, self.col + 1),
        };
        (row < rows && col < cols).then_some(GridPos { row, col })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Dir {
    Up,
    Down,
    Left,
    Right,
}

impl Dir {
    /// Movement actions share index order across environments:
    /// 0 up, 1 down, 2 left, 3 right.
    pub(crate) fn from_action(index: usize) -> Option<Dir> {
        match index {
            0 => Some(Dir::Up),
            1 => Some(Dir::Down),
            2 => Some(Dir::Left),
            3 => Some(Dir::Right),
            _ => None,
        }
    }
}

/// Scales a coordinate into [0, 1].
pub(crate) fn scaled(value: usize, extent: usize) -> f64 {
    if extent <= 1 {
        0.0
    } else {
        value as f64 / (extent - 1) as f64
    }
}
