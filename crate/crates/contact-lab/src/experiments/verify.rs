//! Bound verifiers: Monte Carlo estimates classified against closed-form
//! bounds as Consistent, Inconclusive or Violated.

use super::estimate::{estimate_event, Estimate};
use super::ExperimentError;
use crate::exact::{ctmc_survival, residual_padding, SurvivalCurve, DEFAULT_STATE_CAP};
use crate::graphs::{build_interval, Graph, VertexId};
use crate::randomness::{reachable, sample_event_log};
use crate::simulate::{confinement_trial, run_direct, Configuration, StopRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundSide {
    /// The claim is `p >= bound`.
    Lower,
    /// The claim is `p <= bound`.
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictKind {
    /// The whole confidence interval sits on the claimed side.
    Consistent,
    /// The interval straddles the bound; more runs would be needed.
    Inconclusive,
    /// The whole interval sits strictly on the wrong side.
    Violated,
}

/// Outcome of checking one Monte Carlo estimate against one bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub side: BoundSide,
    pub bound_value: f64,
    pub estimate: Estimate,
    /// Set when the run proceeded outside the bound's proven hypotheses.
    pub warning: Option<String>,
}

/// Compares an estimate's interval with a claimed bound.
pub fn classify(estimate: Estimate, bound_value: f64, side: BoundSide) -> Verdict {
    let kind = match side {
        BoundSide::Lower => {
            if estimate.ci_low >= bound_value {
                VerdictKind::Consistent
            } else if estimate.ci_high < bound_value {
                VerdictKind::Violated
            } else {
                VerdictKind::Inconclusive
            }
        }
        BoundSide::Upper => {
            if estimate.ci_high <= bound_value {
                VerdictKind::Consistent
            } else if estimate.ci_low > bound_value {
                VerdictKind::Violated
            } else {
                VerdictKind::Inconclusive
            }
        }
    };
    Verdict {
        kind,
        side,
        bound_value,
        estimate,
        warning: None,
    }
}

/// Checks that the fully infected interval 1..=n on the line stays inside
/// itself until extinction with probability at least 1/2.
///
/// The first infection outside the interval ends a trial, so one layer of
/// padding already detects escape exactly; the padding follows the walk
/// truncation convention anyway and extra vertices are simply never reached.
pub fn verify_rw_interval(n: usize, lambda: f64, n_runs: u64, seed: u64, threads: usize) -> Verdict {
    assert!(n >= 1, "interval must be nonempty");
    assert!(
        lambda.is_finite() && lambda >= 0.0,
        "rate must be finite and non-negative"
    );
    let pad = residual_padding(lambda).unwrap_or(1).max(1);
    let g = build_interval(n, pad);
    let region: Vec<VertexId> = (1..=n as i64)
        .map(|z| g.line_vertex(z).expect("interval vertex present"))
        .collect();
    let init = Configuration::from_vertices(g.vertex_count(), region.iter().copied());

    let trial = |trial_seed: u64| {
        confinement_trial(&g, &region, lambda, &init, trial_seed)
            .expect("validated trial inputs")
            .confined
    };
    let estimate = estimate_event(trial, n_runs, seed, threads);
    let mut verdict = classify(estimate, 0.5, BoundSide::Lower);
    if lambda > 0.25 {
        verdict.warning = Some(format!(
            "confinement bound is proven for rate <= 0.25, ran at {lambda}"
        ));
    }
    verdict
}

/// Checks that the fully infected star on `n` vertices dies out by
/// `3 ln(1/rate)` with probability at least `exp(-16 rate^2 n) / 4`.
pub fn verify_star_extinction(
    n: usize,
    lambda: f64,
    n_runs: u64,
    seed: u64,
    threads: usize,
) -> Verdict {
    assert!(n >= 2, "star needs a hub and at least one leaf");
    assert!(
        lambda.is_finite() && lambda > 0.0,
        "extinction deadline 3 ln(1/rate) needs a positive rate"
    );
    let g = crate::graphs::build_star(n);
    let init = Configuration::full(&g);
    let t1 = 3.0 * (1.0 / lambda).ln();
    let stop = StopRule::extinction().with_time_horizon(t1);

    let trial = |trial_seed: u64| {
        run_direct(&g, lambda, &init, &stop, trial_seed)
            .expect("validated trial inputs")
            .extinct
    };
    let estimate = estimate_event(trial, n_runs, seed, threads);
    let bound = 0.25 * (-16.0 * lambda * lambda * n as f64).exp();
    let mut verdict = classify(estimate, bound, BoundSide::Lower);
    if lambda >= 0.25 {
        verdict.warning = Some(format!(
            "extinction bound is proven for rate < 0.25, ran at {lambda}"
        ));
    }
    verdict
}

/// Per-time verdicts for tree extinction, plus the exact curve when the tree
/// is small enough for the dense oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeExtinctionReport {
    pub times: Vec<f64>,
    pub verdicts: Vec<Verdict>,
    pub oracle: Option<SurvivalCurve>,
}

/// Checks that the fully infected tree `g` is still alive at each time `t`
/// with probability at most `|T|^2 exp(-t/4)`.
///
/// Requires an actual tree with maximum degree at most `1/(8 rate^2)`, the
/// regime where the bound is proven.
pub fn verify_tree_extinction(
    g: &Graph,
    lambda: f64,
    times: &[f64],
    n_runs: u64,
    seed: u64,
    threads: usize,
) -> Result<TreeExtinctionReport, ExperimentError> {
    assert!(
        lambda.is_finite() && lambda >= 0.0,
        "rate must be finite and non-negative"
    );
    assert!(!times.is_empty(), "need at least one evaluation time");
    assert!(
        times.iter().all(|t| t.is_finite() && *t >= 0.0),
        "times must be finite and non-negative"
    );
    check_tree(g)?;
    check_degree(g.max_degree(), lambda)?;

    let horizon = times.iter().copied().fold(0.0f64, f64::max);
    let init = Configuration::full(g);
    let stop = StopRule::extinction().with_time_horizon(horizon.max(f64::MIN_POSITIVE));
    let outcomes = super::run_replicas(n_runs, seed, threads, |_, trial_seed| {
        let out = run_direct(g, lambda, &init, &stop, trial_seed).expect("validated trial inputs");
        (out.extinct, out.stop_time)
    });

    let n2 = (g.vertex_count() * g.vertex_count()) as f64;
    let verdicts = times
        .iter()
        .map(|&t| {
            let survivors = outcomes
                .iter()
                .filter(|&&(extinct, stop_time)| !extinct || stop_time > t)
                .count() as u64;
            let estimate =
                Estimate::from_counts(survivors, n_runs, seed, super::CiMethod::Wilson);
            classify(estimate, n2 * (-t / 4.0).exp(), BoundSide::Upper)
        })
        .collect();

    let oracle = if g.vertex_count() <= DEFAULT_STATE_CAP {
        Some(ctmc_survival(g, lambda, &init, times)?)
    } else {
        None
    };
    Ok(TreeExtinctionReport {
        times: times.to_vec(),
        verdicts,
        oracle,
    })
}

/// Checks end-to-end transmission across a path of `len` edges: the chance
/// that an infection seeded at one end at any time in `[0, t]` ever reaches
/// the other end is at most `(t + 1) (2 rate)^len`.
///
/// A trial samples one event log and decides the event exactly on it: the
/// source contributes an activation at 0 and at each of its recovery times in
/// `[0, t]`, and the target may be hit at any time within the log. The log
/// horizon is `t + 4 ln(1e9 |T|^2)`, leaving under `1e-9` of the event beyond
/// it.
pub fn verify_path_transmission(
    len: usize,
    lambda: f64,
    t: f64,
    n_runs: u64,
    seed: u64,
    threads: usize,
) -> Result<Verdict, ExperimentError> {
    assert!(len >= 1, "need at least one edge");
    assert!(
        lambda.is_finite() && lambda >= 0.0,
        "rate must be finite and non-negative"
    );
    assert!(t.is_finite() && t >= 0.0, "window must be finite and non-negative");
    let g = build_interval(len + 1, 0);
    check_degree(g.max_degree(), lambda)?;
    let x = VertexId(0);
    let y = VertexId(len as u32);
    let size = (len + 1) as f64;
    let horizon = t + 4.0 * (1e9 * size * size).ln();

    let trial = |trial_seed: u64| {
        if lambda == 0.0 {
            return false;
        }
        let log = sample_event_log(&g, lambda, horizon, trial_seed);
        let mut sources = vec![(x, 0.0)];
        sources.extend(
            log.recoveries(x)
                .iter()
                .take_while(|&&r| r <= t)
                .map(|&r| (x, r)),
        );
        reachable(&log, lambda, &sources, &[y], (0.0, horizon)).expect("rate within log bounds")
    };
    let estimate = estimate_event(trial, n_runs, seed, threads);
    let bound = (t + 1.0) * (2.0 * lambda).powi(len as i32);
    Ok(classify(estimate, bound, BoundSide::Upper))
}

fn check_tree(g: &Graph) -> Result<(), ExperimentError> {
    let n = g.vertex_count();
    let connected = g
        .bfs_distances(VertexId(0))
        .iter()
        .all(|&d| d != u32::MAX);
    if !connected || g.edge_count() != n - 1 {
        return Err(ExperimentError::HypothesisViolated(format!(
            "graph with {n} vertices and {} edges is not a tree",
            g.edge_count()
        )));
    }
    Ok(())
}

fn check_degree(max_degree: usize, lambda: f64) -> Result<(), ExperimentError> {
    if 8.0 * lambda * lambda * max_degree as f64 > 1.0 {
        return Err(ExperimentError::HypothesisViolated(format!(
            "maximum degree {max_degree} exceeds 1/(8 rate^2) = {}",
            1.0 / (8.0 * lambda * lambda)
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{ctmc_hit_probability, interval_confinement_probability};
    use crate::graphs::build_star;

    fn fake_estimate(s: u64, n: u64) -> Estimate {
        Estimate::from_counts(s, n, 0, super::super::CiMethod::Wilson)
    }

    #[test]
    fn classification_covers_both_sides() {
        let est = fake_estimate(700, 1000);
        assert_eq!(classify(est.clone(), 0.5, BoundSide::Lower).kind, VerdictKind::Consistent);
        assert_eq!(classify(est.clone(), 0.69, BoundSide::Lower).kind, VerdictKind::Inconclusive);
        assert_eq!(classify(est.clone(), 0.9, BoundSide::Lower).kind, VerdictKind::Violated);
        assert_eq!(classify(est.clone(), 0.9, BoundSide::Upper).kind, VerdictKind::Consistent);
        assert_eq!(classify(est.clone(), 0.71, BoundSide::Upper).kind, VerdictKind::Inconclusive);
        assert_eq!(classify(est, 0.5, BoundSide::Upper).kind, VerdictKind::Violated);
    }

    #[test]
    fn interval_confinement_holds_and_matches_the_oracle() {
        let verdict = verify_rw_interval(3, 0.25, 4_000, 21, 0);
        assert_eq!(verdict.kind, VerdictKind::Consistent);
        assert!(verdict.warning.is_none());

        let oracle = interval_confinement_probability(3, 0.25).unwrap();
        let est = &verdict.estimate;
        let sigma = (oracle * (1.0 - oracle) / est.n_runs as f64).sqrt();
        assert!(
            (est.p_hat - oracle).abs() < 3.0 * sigma,
            "mc {} vs oracle {oracle}",
            est.p_hat
        );
    }

    #[test]
    fn trivial_interval_at_rate_zero_is_always_confined() {
        let verdict = verify_rw_interval(1, 0.0, 200, 3, 1);
        assert_eq!(verdict.estimate.p_hat, 1.0);
        assert_eq!(verdict.kind, VerdictKind::Consistent);
    }

    #[test]
    fn interval_warns_outside_the_proven_rates() {
        let verdict = verify_rw_interval(2, 0.4, 200, 3, 1);
        assert!(verdict.warning.is_some());
    }

    #[test]
    fn star_extinction_holds_and_matches_the_oracle() {
        let verdict = verify_star_extinction(4, 0.2, 4_000, 31, 0);
        assert_eq!(verdict.kind, VerdictKind::Consistent);
        let bound = 0.25 * (-16.0f64 * 0.04 * 4.0).exp();
        assert!((verdict.bound_value - bound).abs() < 1e-12);
        assert!((verdict.bound_value - 0.01931).abs() < 1e-4);

        let g = build_star(4);
        let t1 = 3.0 * 5.0f64.ln();
        let oracle = 1.0
            - ctmc_survival(&g, 0.2, &Configuration::full(&g), &[t1])
                .unwrap()
                .probabilities[0];
        let est = &verdict.estimate;
        let sigma = (oracle * (1.0 - oracle) / est.n_runs as f64).sqrt();
        assert!(
            (est.p_hat - oracle).abs() < 3.0 * sigma,
            "mc {} vs oracle {oracle}",
            est.p_hat
        );
    }

    #[test]
    fn tiny_star_at_tiny_rate_dies_almost_surely() {
        let verdict = verify_star_extinction(2, 0.01, 500, 5, 1);
        assert!(verdict.estimate.p_hat > 0.99);
        assert_eq!(verdict.kind, VerdictKind::Consistent);
        assert!(verdict.warning.is_none());
        let warned = verify_star_extinction(2, 0.25, 200, 5, 1);
        assert!(warned.warning.is_some());
    }

    #[test]
    fn tree_extinction_rejects_hypothesis_failures() {
        let star = build_star(4);
        match verify_tree_extinction(&star, 0.25, &[1.0], 200, 1, 1) {
            Err(ExperimentError::HypothesisViolated(msg)) => {
                assert!(msg.contains("degree"), "{msg}");
            }
            other => panic!("expected hypothesis error, got {other:?}"),
        }

        let disconnected = Graph::from_edges(
            vec![
                crate::graphs::VertexLabel::Line(1),
                crate::graphs::VertexLabel::Line(2),
            ],
            &[],
        )
        .unwrap();
        assert!(matches!(
            verify_tree_extinction(&disconnected, 0.1, &[1.0], 200, 1, 1),
            Err(ExperimentError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn path_extinction_verdicts_track_the_envelope() {
        let g = build_interval(6, 0);
        let report = verify_tree_extinction(&g, 0.25, &[0.0, 20.0], 2_000, 11, 0).unwrap();
        assert_eq!(report.verdicts.len(), 2);
        // At t=0 the bound is 36, survival is 1: vacuously consistent.
        assert_eq!(report.verdicts[0].estimate.p_hat, 1.0);
        assert_eq!(report.verdicts[0].kind, VerdictKind::Consistent);
        // At t=20 the bound is 36 e^{-5} and the true value sits well below.
        assert_eq!(report.verdicts[1].kind, VerdictKind::Consistent);
        let oracle = report.oracle.expect("six vertices fit the oracle");
        assert!(oracle.probabilities[1] <= 36.0 * (-5.0f64).exp());
        let est = &report.verdicts[1].estimate;
        let sigma = (oracle.probabilities[1] * (1.0 - oracle.probabilities[1])
            / est.n_runs as f64)
            .sqrt();
        assert!((est.p_hat - oracle.probabilities[1]).abs() < 3.0 * sigma.max(1e-4));
    }

    #[test]
    fn path_transmission_holds_and_rate_zero_is_impossible() {
        let verdict = verify_path_transmission(4, 0.25, 2.0, 2_000, 17, 0).unwrap();
        assert!((verdict.bound_value - 0.1875).abs() < 1e-12);
        assert_eq!(verdict.kind, VerdictKind::Consistent);

        // At rate zero the bound itself is 0; no finite sample can place the
        // whole interval at or below 0, so the verdict stays Inconclusive.
        let zero = verify_path_transmission(3, 0.0, 2.0, 200, 17, 1).unwrap();
        assert_eq!(zero.estimate.p_hat, 0.0);
        assert_eq!(zero.estimate.ci_low, 0.0);
        assert_eq!(zero.kind, VerdictKind::Inconclusive);

        assert!(matches!(
            verify_path_transmission(3, 0.3, 2.0, 200, 17, 1),
            Err(ExperimentError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn single_edge_transmission_at_window_zero_matches_the_hit_oracle() {
        let verdict = verify_path_transmission(1, 0.25, 0.0, 8_000, 23, 0).unwrap();
        assert!((verdict.bound_value - 0.5).abs() < 1e-12);
        let g = build_interval(2, 0);
        let oracle = ctmc_hit_probability(&g, 0.25, VertexId(0), VertexId(1)).unwrap();
        assert!((oracle - 0.2).abs() < 1e-10);
        let est = &verdict.estimate;
        let sigma = (oracle * (1.0 - oracle) / est.n_runs as f64).sqrt();
        assert!(
            (est.p_hat - oracle).abs() < 3.0 * sigma,
            "mc {} vs oracle {oracle}",
            est.p_hat
        );
    }
}
