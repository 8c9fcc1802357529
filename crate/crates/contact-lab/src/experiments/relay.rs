//! Hub-to-hub relay on the line-with-hubs tree: from a fully infected ball
//! around one hub, how often does the occupation of the next hub's ball pass
//! the handoff threshold.

use super::estimate::{estimate_event, Estimate};
use super::ExperimentError;
use crate::graphs::{ball, compute_sequences, Graph, VertexLabel};
use crate::randomness::replica_seed;
use crate::simulate::{run_direct, Configuration, StopReason, StopRule};
use num_traits::ToPrimitive;

#[derive(Clone, Debug, PartialEq)]
pub struct HopEstimate {
    /// Hop index j: seeded at hub j, measured at hub j+1.
    pub hop: usize,
    pub from_position: i64,
    pub to_position: i64,
    /// Size of the measured ball B(hub j+1, 1).
    pub ball_size: usize,
    /// Occupancy count that declares a handoff: the smallest integer strictly
    /// above `lambda * ball_size / (16 e)`.
    pub threshold: usize,
    pub estimate: Estimate,
}

/// For each consecutive hub pair realized in `g`, estimates the probability
/// that, starting from the fully infected unit ball of the lower hub, the
/// occupation of the next hub's unit ball ever exceeds `lambda |B| / (16 e)`.
///
/// Each hop is seeded fresh; `horizon` bounds a run that neither dies nor
/// reaches the threshold, and such runs count as failures.
pub fn relay_experiment(
    g: &Graph,
    lambda: f64,
    hops: usize,
    horizon: f64,
    n_runs: u64,
    seed: u64,
    threads: usize,
) -> Result<Vec<HopEstimate>, ExperimentError> {
    assert!(hops >= 1, "need at least one hop");
    assert!(
        lambda.is_finite() && lambda >= 0.0,
        "rate must be finite and non-negative"
    );
    let built_hubs = g
        .labels()
        .iter()
        .filter_map(|l| match l {
            VertexLabel::Leaf { hub, .. } => Some(*hub as usize),
            VertexLabel::Line(_) => None,
        })
        .max()
        .ok_or_else(|| {
            ExperimentError::HypothesisViolated("graph has no hub leaves".to_string())
        })?;
    if built_hubs < 2 {
        return Err(ExperimentError::HypothesisViolated(
            "relay needs at least two hubs".to_string(),
        ));
    }
    let table = compute_sequences(built_hubs);

    let mut out = Vec::new();
    for hop in 1..=hops.min(built_hubs - 1) {
        let from_position = table
            .hub_position(hop)
            .to_i64()
            .expect("built hub positions fit i64");
        let to_position = table
            .hub_position(hop + 1)
            .to_i64()
            .expect("built hub positions fit i64");
        let from = g.line_vertex(from_position).ok_or_else(|| {
            ExperimentError::HypothesisViolated(format!("hub {hop} missing from the graph"))
        })?;
        let to = g.line_vertex(to_position).ok_or_else(|| {
            ExperimentError::HypothesisViolated(format!("hub {} missing from the graph", hop + 1))
        })?;

        let source_ball = ball(g, from, 1);
        let target_ball = ball(g, to, 1);
        let threshold =
            (lambda * target_ball.len() as f64 / (16.0 * std::f64::consts::E)).floor() as usize + 1;
        let init = Configuration::from_vertices(g.vertex_count(), source_ball.iter().copied());
        let stop = StopRule::extinction()
            .with_time_horizon(horizon)
            .with_occupancy_target(g, &target_ball, threshold);

        let hop_seed = replica_seed(seed, hop);
        let trial = |trial_seed: u64| {
            let outcome =
                run_direct(g, lambda, &init, &stop, trial_seed).expect("validated trial inputs");
            outcome.reason == StopReason::OccupancyReached
        };
        out.push(HopEstimate {
            hop,
            from_position,
            to_position,
            ball_size: target_ball.len(),
            threshold,
            estimate: estimate_event(trial, n_runs, hop_seed, threads),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_sv_tree, BuildBudget};
    use crate::randomness::sample_event_log;
    use crate::simulate::run_from_log;

    fn tree2() -> Graph {
        build_sv_tree(2, &BuildBudget::default()).unwrap()
    }

    #[test]
    fn rate_zero_never_reaches_the_next_hub() {
        let g = tree2();
        let hops = relay_experiment(&g, 0.0, 3, 20.0, 150, 7, 1).unwrap();
        assert_eq!(hops.len(), 1, "two hubs give one hop");
        assert_eq!(hops[0].estimate.p_hat, 0.0);
        assert_eq!(hops[0].from_position, -1);
        assert_eq!(hops[0].to_position, 2);
        assert_eq!(hops[0].threshold, 1);
    }

    #[test]
    fn supercritical_relay_hands_off_almost_always() {
        let g = tree2();
        let hops = relay_experiment(&g, 3.0, 1, 60.0, 300, 11, 0).unwrap();
        assert!(
            hops[0].estimate.p_hat > 0.9,
            "handoff estimate {}",
            hops[0].estimate.p_hat
        );
        // The second hub sits at the line's right end: 10 leaves, one line
        // neighbor, plus itself; threshold = floor(12/(16e)) + 1.
        assert_eq!(hops[0].ball_size, 12);
        assert_eq!(hops[0].threshold, 1);
    }

    #[test]
    fn handoff_success_is_monotone_in_the_rate_on_shared_logs() {
        let g = tree2();
        let to = g.line_vertex(2).unwrap();
        let target_ball = ball(&g, to, 1);
        let from = g.line_vertex(-1).unwrap();
        let init =
            Configuration::from_vertices(g.vertex_count(), ball(&g, from, 1).iter().copied());
        let mut weaker = 0;
        for i in 0..150 {
            let log = sample_event_log(&g, 1.0, 25.0, replica_seed(3, i));
            let mut success = [false; 2];
            for (slot, lambda) in [(0usize, 0.45), (1usize, 1.0)] {
                let threshold = (lambda * target_ball.len() as f64
                    / (16.0 * std::f64::consts::E))
                    .floor() as usize
                    + 1;
                let stop = StopRule::extinction()
                    .with_time_horizon(20.0)
                    .with_occupancy_target(&g, &target_ball, threshold);
                let out = run_from_log(&g, &log, lambda, &init, &stop).unwrap();
                success[slot] = out.reason == StopReason::OccupancyReached;
            }
            assert!(
                success[1] || !success[0],
                "run {i}: success at 0.45 but not at 1.0"
            );
            weaker += success[0] as u32;
        }
        assert!(weaker > 5, "want some low-rate successes, got {weaker}");
    }

    #[test]
    fn relay_rejects_graphs_without_hubs() {
        let g = crate::graphs::build_interval(5, 0);
        assert!(matches!(
            relay_experiment(&g, 0.5, 1, 10.0, 150, 1, 1),
            Err(ExperimentError::HypothesisViolated(_))
        ));
    }
}

