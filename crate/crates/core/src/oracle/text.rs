//! Line-oriented text serialization of [`ExplicitMmdp`].
//!
//! ```text
//! mmdp 1
//! <states> <agents> <actions> <initial> <horizon>
//! <state> <joint-action> <next-state> <r_1> ... <r_n>
//! ```
//!
//! Blank lines and `#` comments are ignored; body lines may appear in any
//! order but every (state, joint-action) pair must occur exactly once.

use super::ExplicitMmdp;
use crate::error::{CoreError, Result};

pub(super) fn to_text(m: &ExplicitMmdp) -> String {
    let mut out = String::new();
    out.push_str("mmdp 1\n");
    out.push_str(&format!(
        "{} {} {} {} {}\n",
        m.state_count, m.agent_count, m.action_count, m.initial_state, m.horizon
    ));
    for s in 0..m.state_count {
        for ja in 0..m.joint_action_count() {
            out.push_str(&format!("{} {} {}", s, ja, m.transition(s, ja)));
            for r in m.agent_rewards(s, ja) {
                out.push_str(&format!(" {r}"));
            }
            out.push('\n');
        }
    }
    out
}

pub(super) fn from_text(input: &str) -> Result<ExplicitMmdp> {
    let mut lines = input
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));

    let magic = lines
        .next()
        .ok_or_else(|| CoreError::Format("empty mmdp file".into()))?;
    if magic != "mmdp 1" {
        return Err(CoreError::Format(format!(
            "expected header 'mmdp 1', found '{magic}'"
        )));
    }

    let header = lines
        .next()
        .ok_or_else(|| CoreError::Format("missing counts line".into()))?;
    let fields: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| CoreError::Format(format!("bad count '{t}'")))
        })
        .collect::<Result<_>>()?;
    let [state_count, agent_count, action_count, initial_state, horizon] = fields[..] else {
        return Err(CoreError::Format(
            "counts line needs: states agents actions initial horizon".into(),
        ));
    };
    if state_count == 0 || agent_count == 0 || action_count == 0 {
        return Err(CoreError::Format("counts must be positive".into()));
    }
    let ja_count = (action_count as u64)
        .checked_pow(agent_count as u32)
        .filter(|&c| c <= 10_000_000)
        .ok_or_else(|| CoreError::Format("joint action space too large to parse".into()))?
        as usize;

    let pairs = state_count * ja_count;
    let mut transition: Vec<Option<usize>> = vec![None; pairs];
    let mut rewards = vec![0.0; pairs * agent_count];

    for line in lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 3 + agent_count {
            return Err(CoreError::Format(format!(
                "body line needs {} fields, found {}: '{line}'",
                3 + agent_count,
                tokens.len()
            )));
        }
        let s: usize = tokens[0]
            .parse()
            .map_err(|_| CoreError::Format(format!("bad state '{}'", tokens[0])))?;
        let ja: usize = tokens[1]
            .parse()
            .map_err(|_| CoreError::Format(format!("bad joint action '{}'", tokens[1])))?;
        let next: usize = tokens[2]
            .parse()
            .map_err(|_| CoreError::Format(format!("bad next state '{}'", tokens[2])))?;
        if s >= state_count || ja >= ja_count || next >= state_count {
            return Err(CoreError::Format(format!("indices out of range: '{line}'")));
        }
        let slot = s * ja_count + ja;
        if transition[slot].is_some() {
            return Err(CoreError::Format(format!(
                "duplicate entry for state {s}, joint action {ja}"
            )));
        }
        transition[slot] = Some(next);
        for (i, token) in tokens[3..].iter().enumerate() {
            rewards[slot * agent_count + i] = token
                .parse()
                .map_err(|_| CoreError::Format(format!("bad reward '{token}'")))?;
        }
    }

    let transition: Vec<usize> = transition
        .into_iter()
        .enumerate()
        .map(|(slot, t)| {
            t.ok_or_else(|| {
                CoreError::Format(format!(
                    "missing entry for state {}, joint action {}",
                    slot / ja_count,
                    slot % ja_count
                ))
            })
        })
        .collect::<Result<_>>()?;

    let m = ExplicitMmdp {
        state_count,
        agent_count,
        action_count,
        transition,
        rewards,
        initial_state,
        horizon,
    };
    m.validate()?;
    Ok(m)
}
