//! `verify`: run the compilation-equivalence suite over seeded random MMDPs
//! (or one MMDP file) plus closed-form state-counting checks. Any failure
//! makes the command exit nonzero.

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use supervisor_core::oracle::{check_equivalence, random_mmdp, ExplicitMmdp};
use supervisor_core::supervisor::{meta_state_space_size, reachable_decision_states};

pub const DEFAULT_CASES: usize = 50;
pub const GAMMAS: [f64; 3] = [0.5, 0.9, 0.99];

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub passed: usize,
    pub failed: usize,
    pub failures: Vec<String>,
}

impl VerifyOutcome {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// A fully reachable deterministic MMDP: joint action `ja` in state `s`
/// moves to `(s + 1 + ja) mod |S|`, so action 0 alone walks a cycle through
/// every state.
pub fn cyclic_mmdp(state_count: usize, agent_count: usize, action_count: usize) -> ExplicitMmdp {
    let ja_count = action_count.pow(agent_count as u32);
    let mut transition = Vec::with_capacity(state_count * ja_count);
    for s in 0..state_count {
        for ja in 0..ja_count {
            transition.push((s + 1 + ja) % state_count);
        }
    }
    ExplicitMmdp {
        state_count,
        agent_count,
        action_count,
        transition,
        rewards: vec![0.0; state_count * ja_count * agent_count],
        initial_state: 0,
        horizon: 1,
    }
}

/// Decision-state counting: breadth-first enumeration against the closed
/// forms, on fully reachable instances.
pub fn check_state_counting(state_count: usize, action_count: usize, agent_count: usize) -> Result<()> {
    let m = cyclic_mmdp(state_count, agent_count, action_count);
    let enumerated = reachable_decision_states(&m)?;

    let mut decision_form = 0u64;
    let mut power = 1u64;
    for _ in 0..agent_count {
        decision_form += power;
        power *= action_count as u64;
    }
    decision_form *= state_count as u64;
    anyhow::ensure!(
        enumerated == decision_form,
        "decision states: enumerated {enumerated}, closed form {decision_form}"
    );

    // The full meta-state count additionally includes the fully assigned
    // lists the transition consumes instantaneously.
    let full = meta_state_space_size(state_count as u64, action_count as u64, agent_count as u32)?;
    anyhow::ensure!(
        full == decision_form + state_count as u64 * power,
        "meta-state closed forms disagree: {full} vs {} + {}",
        decision_form,
        state_count as u64 * power
    );
    Ok(())
}

fn check_case(label: &str, m: &ExplicitMmdp, failures: &mut Vec<String>) {
    for gamma in GAMMAS {
        match check_equivalence(m, gamma) {
            Ok(report) if report.passes() => {}
            Ok(report) => failures.push(format!(
                "{label} gamma {gamma}: max deviation {:.3e}",
                report.max_deviation()
            )),
            Err(err) => failures.push(format!("{label} gamma {gamma}: {err}")),
        }
    }
}

pub fn run(mmdp_file: Option<&Path>, cases: usize, seed: u64, quiet: bool) -> Result<VerifyOutcome> {
    let mut failures = Vec::new();
    let mut passed = 0usize;
    let mut total = 0usize;

    if let Some(path) = mmdp_file {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let m = ExplicitMmdp::from_text(&text)?;
        total += 1;
        let before = failures.len();
        check_case(&format!("mmdp file {}", path.display()), &m, &mut failures);
        if failures.len() == before {
            passed += 1;
            if !quiet {
                println!("case {}: pass", path.display());
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for case in 0..cases {
            let state_count = rng.gen_range(1..=6);
            let agent_count = rng.gen_range(1..=3);
            let action_count = rng.gen_range(1..=3);
            let horizon = rng.gen_range(1..=4);
            let case_seed = rng.gen::<u64>();
            let m = random_mmdp(case_seed, state_count, agent_count, action_count, horizon);
            let label = format!(
                "case {case} (seed {case_seed}, |S|={state_count}, n={agent_count}, |A|={action_count}, h={horizon})"
            );
            total += 1;
            let before = failures.len();
            check_case(&label, &m, &mut failures);
            if failures.len() == before {
                passed += 1;
                if !quiet {
                    println!("{label}: pass");
                }
            } else if !quiet {
                println!("{label}: FAIL");
            }
        }

        // State-space accounting on fully reachable fixtures.
        for (s, a, n) in [(1, 2, 2), (2, 2, 2), (1, 5, 3), (3, 3, 3)] {
            total += 1;
            match check_state_counting(s, a, n) {
                Ok(()) => {
                    passed += 1;
                    if !quiet {
                        println!("counting (|S|={s}, |A|={a}, n={n}): pass");
                    }
                }
                Err(err) => failures.push(format!("counting (|S|={s}, |A|={a}, n={n}): {err}")),
            }
        }
    }

    let outcome = VerifyOutcome {
        passed,
        failed: total - passed,
        failures,
    };
    if !quiet {
        println!("verify: {}/{} checks passed", outcome.passed, total);
        for f in &outcome.failures {
            println!("  FAIL {f}");
        }
    }
    Ok(outcome)
}
