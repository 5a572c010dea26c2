//! `enumerate`: print the joint-action space size against the supervisor's
//! action and meta-state accounting.

use anyhow::Result;
use supervisor_core::supervisor::{joint_action_space_size, meta_state_space_size};

pub struct SizeReport {
    pub actions: u64,
    pub agents: u32,
    pub joint_actions: u64,
    pub supervisor_actions: u64,
    pub meta_state_multiplier: u64,
    pub meta_states: Option<u64>,
}

pub fn compute(actions: u64, agents: u32, states: Option<u64>) -> Result<SizeReport> {
    let joint = joint_action_space_size(actions, agents)?;
    // The per-state multiplier is the |S| = 1 case of the closed form.
    let multiplier = meta_state_space_size(1, actions, agents)?;
    let meta_states = match states {
        Some(s) => Some(meta_state_space_size(s, actions, agents)?),
        None => None,
    };
    Ok(SizeReport {
        actions,
        agents,
        joint_actions: joint,
        supervisor_actions: actions,
        meta_state_multiplier: multiplier,
        meta_states,
    })
}

pub fn run(actions: u64, agents: u32, states: Option<u64>, out: &mut impl std::io::Write) -> Result<()> {
    let r = compute(actions, agents, states)?;
    writeln!(out, "individual actions |A|:      {}", r.actions)?;
    writeln!(out, "agents n:                    {}", r.agents)?;
    writeln!(out, "joint actions |A|^n:         {}", r.joint_actions)?;
    writeln!(out, "supervisor actions |A'|:     {}", r.supervisor_actions)?;
    writeln!(
        out,
        "meta-states per state (sum of |A'|^i, i = 0..=n): {}",
        r.meta_state_multiplier
    )?;
    if let Some(total) = r.meta_states {
        writeln!(out, "meta-states |S'|:            {total}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_sizes() {
        let r = compute(5, 6, None).unwrap();
        assert_eq!(r.joint_actions, 15_625);
        assert_eq!(r.supervisor_actions, 5);
        assert_eq!(r.meta_state_multiplier, 19_531);

        let r = compute(3, 1, None).unwrap();
        assert_eq!(r.joint_actions, r.supervisor_actions);

        let r = compute(2, 10, Some(4)).unwrap();
        assert_eq!(r.joint_actions, 1_024);
        assert_eq!(r.meta_state_multiplier, 2_047);
        assert_eq!(r.meta_states, Some(4 * 2_047));
    }

    #[test]
    fn overflow_is_surfaced() {
        assert!(compute(10, 64, None).is_err());
    }
}
