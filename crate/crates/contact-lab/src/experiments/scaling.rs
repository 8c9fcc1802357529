//! Star survival scaling: how long a star sustains the infection as a
//! function of `rate^2 * hub degree`.

use super::estimate::run_replicas;
use crate::graphs::build_star;
use crate::simulate::{run_direct, Configuration, StopReason, StopRule};

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingOptions {
    /// Infect the hub along with the minimum leaf set. The source material
    /// only pins the initially infected count, so both variants are of
    /// interest; the default matches the hub-plus-leaves reading.
    pub include_hub: bool,
    /// Per-run event cap. Supercritical cells survive for times exponential
    /// in `rate^2 * degree`, so uncapped runs are infeasible there; capped
    /// runs report censored medians, which are lower bounds.
    pub event_budget: Option<u64>,
    pub threads: usize,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            include_hub: true,
            event_budget: None,
            threads: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingCell {
    pub lambda: f64,
    /// Star vertex count; the hub degree is `size - 1`.
    pub size: usize,
    /// `lambda^2 * (size - 1)`, the exponent the survival time should scale with.
    pub exponent: f64,
    /// Whether `size - 1 > 64 e^2 / lambda^2`, the proven regime.
    pub lemma_regime: bool,
    pub include_hub: bool,
    pub initial_infected: usize,
    /// Median observed extinction time; a lower bound when `censored`.
    pub median_extinction_time: f64,
    /// The median run ended at the event budget rather than by extinction.
    pub censored: bool,
    pub censored_runs: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    pub cells: Vec<ScalingCell>,
    /// Least-squares slope of `ln(median extinction time)` on the exponent.
    pub slope: f64,
    pub intercept: f64,
    pub n_runs: u64,
    pub seed: u64,
}

/// Runs every `(lambda, size)` cell and fits the log-median survival time
/// against `lambda^2 * degree`.
///
/// The initial set is the smallest one allowed: `ceil(lambda * deg / (16 e)) + 1`
/// leaves, plus the hub unless disabled.
pub fn star_survival_scaling(
    lambdas: &[f64],
    sizes: &[usize],
    n_runs: u64,
    seed: u64,
    opts: &ScalingOptions,
) -> ScalingReport {
    assert!(n_runs >= 1);
    assert!(!lambdas.is_empty() && !sizes.is_empty());
    let mut cells = Vec::with_capacity(lambdas.len() * sizes.len());
    for (cell_index, (&lambda, &size)) in lambdas
        .iter()
        .flat_map(|l| sizes.iter().map(move |s| (l, s)))
        .enumerate()
    {
        assert!(lambda.is_finite() && lambda >= 0.0);
        let cell_seed = crate::randomness::replica_seed(seed, cell_index);
        cells.push(run_cell(lambda, size, n_runs, cell_seed, opts));
    }

    let points: Vec<(f64, f64)> = cells
        .iter()
        .map(|c| (c.exponent, c.median_extinction_time.ln()))
        .collect();
    let (slope, intercept) = least_squares(&points);
    ScalingReport {
        cells,
        slope,
        intercept,
        n_runs,
        seed,
    }
}

fn run_cell(lambda: f64, size: usize, n_runs: u64, seed: u64, opts: &ScalingOptions) -> ScalingCell {
    let g = build_star(size);
    let deg = (size - 1) as f64;
    let leaves = (lambda * deg / (16.0 * std::f64::consts::E)).ceil() as usize + 1;
    assert!(
        leaves < size,
        "star of {size} cannot hold {leaves} infected leaves"
    );
    let mut init_vertices: Vec<crate::graphs::VertexId> =
        (1..=leaves as u32).map(crate::graphs::VertexId).collect();
    if opts.include_hub {
        init_vertices.push(crate::graphs::VertexId(0));
    }
    let init = Configuration::from_vertices(size, init_vertices.iter().copied());

    let mut stop = StopRule::extinction();
    if let Some(budget) = opts.event_budget {
        stop = stop.with_event_budget(budget);
    }
    let outcomes = run_replicas(n_runs, seed, opts.threads, |_, trial_seed| {
        let out = run_direct(&g, lambda, &init, &stop, trial_seed).expect("validated trial inputs");
        (out.stop_time, out.reason != StopReason::Extinction)
    });

    let mut times: Vec<(f64, bool)> = outcomes;
    times.sort_by(|a, b| a.0.total_cmp(&b.0));
    let censored_runs = times.iter().filter(|(_, c)| *c).count() as u64;
    let (median_extinction_time, censored) = median_of(&times);

    let lemma_regime = lambda > 0.0
        && deg > 64.0 * std::f64::consts::E * std::f64::consts::E / (lambda * lambda);
    ScalingCell {
        lambda,
        size,
        exponent: lambda * lambda * deg,
        lemma_regime,
        include_hub: opts.include_hub,
        initial_infected: init_vertices.len(),
        median_extinction_time,
        censored,
        censored_runs,
    }
}

/// Median over observations sorted by time. Censored entries sit at their
/// observed (budget) time, so the result is a lower bound whenever the middle
/// of the order statistics is censored.
fn median_of(sorted: &[(f64, bool)]) -> (f64, bool) {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        let (a, b) = (sorted[n / 2 - 1], sorted[n / 2]);
        ((a.0 + b.0) / 2.0, a.1 || b.1)
    }
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, mean_y);
    }
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    (slope, mean_y - slope * mean_x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_recovers_a_line() {
        let points: Vec<(f64, f64)> = (0..10)
            .map(|i| (i as f64, 3.0 + 0.5 * i as f64))
            .collect();
        let (slope, intercept) = least_squares(&points);
        assert!((slope - 0.5).abs() < 1e-12);
        assert!((intercept - 3.0).abs() < 1e-12);
    }

    #[test]
    fn cells_carry_regime_flags_and_minimal_inits() {
        let opts = ScalingOptions {
            event_budget: Some(20_000),
            threads: 0,
            ..ScalingOptions::default()
        };
        let report = star_survival_scaling(&[0.4], &[20, 650], 60, 5, &opts);
        assert_eq!(report.cells.len(), 2);

        let small = &report.cells[0];
        assert!(!small.lemma_regime, "19 leaves is far from the proven regime");
        // ceil(0.4 * 19 / 16e) + 1 = 2 leaves, plus the hub.
        assert_eq!(small.initial_infected, 3);
        assert!((small.exponent - 0.16 * 19.0).abs() < 1e-12);

        let large = &report.cells[1];
        // 64 e^2 / 0.16 = 2955.6, so even 649 leaves stays exploratory.
        assert!(!large.lemma_regime);

        let regime = star_survival_scaling(
            &[0.9],
            &[650],
            30,
            5,
            &ScalingOptions {
                event_budget: Some(5_000),
                threads: 0,
                ..ScalingOptions::default()
            },
        );
        // 64 e^2 / 0.81 = 583.9 < 649.
        assert!(regime.cells[0].lemma_regime);
        assert!(regime.cells[0].censored, "a supercritical star outlives 5000 events");
        assert!(regime.cells[0].censored_runs > 0);
    }

    #[test]
    fn reports_are_reproducible_across_parallelism() {
        let base = ScalingOptions {
            event_budget: Some(10_000),
            ..ScalingOptions::default()
        };
        let make = |threads: usize| {
            star_survival_scaling(
                &[0.3, 0.5],
                &[30, 60],
                40,
                99,
                &ScalingOptions { threads, ..base.clone() },
            )
        };
        let a = make(1);
        let b = make(0);
        let c = make(2);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn hub_free_variant_infects_one_fewer_vertex() {
        let with_hub = star_survival_scaling(&[0.3], &[40], 50, 7, &ScalingOptions {
            event_budget: Some(10_000),
            ..ScalingOptions::default()
        });
        let without = star_survival_scaling(&[0.3], &[40], 50, 7, &ScalingOptions {
            include_hub: false,
            event_budget: Some(10_000),
            ..ScalingOptions::default()
        });
        assert_eq!(
            with_hub.cells[0].initial_infected,
            without.cells[0].initial_infected + 1
        );
        assert!(!without.cells[0].include_hub);
    }

    #[test]
    fn longer_lived_cells_raise_the_slope() {
        // Subcritical versus clearly supercritical at matched sizes: the
        // exponent doubles and the median lifetime must react.
        let opts = ScalingOptions {
            event_budget: Some(400_000),
            ..ScalingOptions::default()
        };
        let report = star_survival_scaling(&[0.25, 0.5], &[120], 80, 13, &opts);
        let low = &report.cells[0];
        let high = &report.cells[1];
        assert!(low.exponent < high.exponent);
        assert!(
            high.median_extinction_time > low.median_extinction_time,
            "{} vs {}",
            high.median_extinction_time,
            low.median_extinction_time
        );
        assert!(report.slope > 0.0, "slope {}", report.slope);
    }
}

