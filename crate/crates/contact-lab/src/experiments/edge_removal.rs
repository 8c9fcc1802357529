//! Matched comparison of the truncated tree against its larger half after
//! cutting the marked middle edge, on shared event logs.

use super::estimate::{CiMethod, Estimate};
use super::ExperimentError;
use crate::graphs::{build_sv_tree, BuildBudget};
use crate::randomness::sample_event_log;
use crate::simulate::{run_from_log_with, Configuration, ReplayOptions, StopRule};

/// Side-by-side survival statistics for the full tree and the half left by
/// removing the edge between line positions 0 and 1, plus how often surviving
/// runs actually use that edge.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeRemovalReport {
    pub lambda: f64,
    pub horizon: f64,
    pub n_runs: u64,
    pub seed: u64,
    /// Survival to the horizon on the full tree.
    pub survival_full: Estimate,
    /// Survival to the horizon with the marked edge blocked.
    pub survival_cut: Estimate,
    /// Quartiles (25%, 50%, 75%) of extinction time, horizon-censored.
    pub extinction_quantiles_full: [f64; 3],
    pub extinction_quantiles_cut: [f64; 3],
    /// Marked-edge infections per run, over full-tree runs that survived;
    /// sorted ascending.
    pub survivor_crossings: Vec<u64>,
    pub median_survivor_crossings: Option<f64>,
    /// Runs where the cut graph survived but the full graph did not. The
    /// shared-log coupling makes this impossible; nonzero means a bug.
    pub coupling_violations: u64,
}

/// Replays each seeded event log twice, once on the full truncated tree and
/// once with the marked edge blocked, both starting from line position 1.
///
/// Blocking the edge confines the infection to the half containing the start,
/// so the second replay is exactly the process on that half.
pub fn edge_removal_experiment(
    i_max: usize,
    lambda: f64,
    horizon: f64,
    n_runs: u64,
    seed: u64,
    threads: usize,
    budget: &BuildBudget,
) -> Result<EdgeRemovalReport, ExperimentError> {
    assert!(
        lambda.is_finite() && lambda > 0.0,
        "shared logs need a positive reference rate"
    );
    assert!(horizon > 0.0 && horizon.is_finite());
    let g = build_sv_tree(i_max, budget)?;
    let cut = (
        g.line_vertex(0).expect("line position 0 is always built"),
        g.line_vertex(1).expect("line position 1 is always built"),
    );
    let start = g.line_vertex(1).unwrap();
    let init = Configuration::from_vertices(g.vertex_count(), [start]);
    let stop = StopRule::extinction().with_time_horizon(horizon);

    struct RunPair {
        full_extinct: bool,
        full_time: f64,
        crossings: u64,
        cut_extinct: bool,
        cut_time: f64,
    }
    let pairs = super::run_replicas(n_runs, seed, threads, |_, trial_seed| {
        let log = sample_event_log(&g, lambda, horizon, trial_seed);
        let full = run_from_log_with(
            &g,
            &log,
            lambda,
            &init,
            &stop,
            ReplayOptions {
                blocked_edge: None,
                track_edge: Some(cut),
            },
            |_| {},
        )
        .expect("stop rule is decidable within the log");
        let half = run_from_log_with(
            &g,
            &log,
            lambda,
            &init,
            &stop,
            ReplayOptions {
                blocked_edge: Some(cut),
                track_edge: None,
            },
            |_| {},
        )
        .expect("stop rule is decidable within the log");
        RunPair {
            full_extinct: full.extinct,
            full_time: if full.extinct { full.stop_time } else { horizon },
            crossings: full.estar_crossings,
            cut_extinct: half.extinct,
            cut_time: if half.extinct { half.stop_time } else { horizon },
        }
    });

    let full_survivors = pairs.iter().filter(|p| !p.full_extinct).count() as u64;
    let cut_survivors = pairs.iter().filter(|p| !p.cut_extinct).count() as u64;
    let coupling_violations = pairs
        .iter()
        .filter(|p| !p.cut_extinct && p.full_extinct)
        .count() as u64;

    let mut full_times: Vec<f64> = pairs.iter().map(|p| p.full_time).collect();
    let mut cut_times: Vec<f64> = pairs.iter().map(|p| p.cut_time).collect();
    full_times.sort_by(f64::total_cmp);
    cut_times.sort_by(f64::total_cmp);

    let mut survivor_crossings: Vec<u64> = pairs
        .iter()
        .filter(|p| !p.full_extinct)
        .map(|p| p.crossings)
        .collect();
    survivor_crossings.sort_unstable();
    let median_survivor_crossings = if survivor_crossings.is_empty() {
        None
    } else {
        let n = survivor_crossings.len();
        Some(if n % 2 == 1 {
            survivor_crossings[n / 2] as f64
        } else {
            (survivor_crossings[n / 2 - 1] + survivor_crossings[n / 2]) as f64 / 2.0
        })
    };

    Ok(EdgeRemovalReport {
        lambda,
        horizon,
        n_runs,
        seed,
        survival_full: Estimate::from_counts(full_survivors, n_runs, seed, CiMethod::Wilson),
        survival_cut: Estimate::from_counts(cut_survivors, n_runs, seed, CiMethod::Wilson),
        extinction_quantiles_full: quartiles(&full_times),
        extinction_quantiles_cut: quartiles(&cut_times),
        survivor_crossings,
        median_survivor_crossings,
        coupling_violations,
    })
}

fn quartiles(sorted: &[f64]) -> [f64; 3] {
    let pick = |q: f64| sorted[((sorted.len() - 1) as f64 * q).round() as usize];
    [pick(0.25), pick(0.5), pick(0.75)]
}
