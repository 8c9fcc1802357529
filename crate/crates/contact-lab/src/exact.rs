//! Exact answers at small scale: closed-form biased random walk analytics and
//! a finite-state transient oracle for the contact process via uniformization.
//!
//! The oracle enumerates the full configuration space `{0,1}^V` (capped at
//! [`DEFAULT_STATE_CAP`] vertices), builds the uniformized jump matrix once,
//! and evaluates Poisson-weighted powers with a certified truncation error.
//! Everything here is deterministic; the only randomness is the explicit
//! seeded walk trial used by Monte Carlo callers.

use crate::graphs::{Graph, VertexId};
use crate::simulate::Configuration;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

/// Largest vertex count the dense oracle will expand into a state space.
pub const DEFAULT_STATE_CAP: usize = 12;

/// Poisson tail mass at which the uniformization series is truncated.
const SERIES_TAIL: f64 = 1e-12;

/// Residual transient mass at which absorption iteration stops.
const ABSORPTION_TAIL: f64 = 1e-11;

/// Escape probability below which a walk excursion is treated as gone for good.
const WALK_RESIDUAL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ExactError {
    #[error("{vertices} vertices expand to {states} states, above the cap of 2^{cap}")]
    StateSpaceTooLarge {
        vertices: usize,
        states: u128,
        cap: usize,
    },
    #[error("rate must be finite and non-negative, got {0}")]
    InvalidRate(f64),
    #[error("walk rate must lie in [0, 1), got {0}")]
    WalkRateOutOfRange(f64),
    #[error("times must be finite and non-negative, got {0}")]
    InvalidTime(f64),
    #[error("time {time} needs {steps} series terms, above the supported {max}")]
    HorizonTooLarge { time: f64, steps: u64, max: u64 },
    #[error("initial infection lies outside the tracked region")]
    InitOutsideRegion,
    #[error("vertex {0} is not in the graph")]
    NoSuchVertex(VertexId),
    #[error("absorption iteration still had {remaining:e} transient mass after {steps} steps")]
    NoConvergence { steps: u64, remaining: f64 },
}

/// Survival probabilities P(infected set nonempty at time t) on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    /// Sorted, deduplicated evaluation times.
    pub times: Vec<f64>,
    /// Survival probability per time, same order.
    pub probabilities: Vec<f64>,
    /// Certified absolute error bound shared by every entry.
    pub error_bound: f64,
}

impl SurvivalCurve {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times
            .iter()
            .copied()
            .zip(self.probabilities.iter().copied())
    }
}

/// Probability that a walk making unit jumps up at rate `lambda` and down at
/// rate 1 ever exceeds its starting point.
///
/// The embedded chain moves up with probability `lambda / (1 + lambda)`, so
/// gambler's ruin gives exactly `lambda`. The complement bounds one-sided
/// confinement, and `1 - 2 lambda` the two-sided version.
pub fn rw_escape_probability(lambda: f64) -> Result<f64, ExactError> {
    check_walk_rate(lambda)?;
    Ok(lambda)
}

/// Smallest `m` such that an excursion `m + 1` below the start returns above
/// it with probability under `1e-9`; the return chance from there is
/// `lambda^(m+1)`.
pub fn residual_padding(lambda: f64) -> Result<usize, ExactError> {
    check_walk_rate(lambda)?;
    let mut m = 0usize;
    let mut p = lambda;
    while p >= WALK_RESIDUAL {
        m += 1;
        p *= lambda;
    }
    Ok(m)
}

/// One seeded trial of the biased walk from 0: `true` if it ever reaches +1,
/// `false` once it falls `residual_padding(lambda) + 1` below the start.
pub fn rw_walk_escapes(lambda: f64, seed: u64) -> Result<bool, ExactError> {
    let floor = -(residual_padding(lambda)? as i64) - 1;
    let up = lambda / (1.0 + lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos = 0i64;
    loop {
        pos += if rng.random::<f64>() < up { 1 } else { -1 };
        if pos > 0 {
            return Ok(true);
        }
        if pos <= floor {
            return Ok(false);
        }
    }
}

fn check_walk_rate(lambda: f64) -> Result<(), ExactError> {
    if !(lambda >= 0.0 && lambda < 1.0) {
        return Err(ExactError::WalkRateOutOfRange(lambda));
    }
    Ok(())
}

fn check_rate(lambda: f64) -> Result<(), ExactError> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(ExactError::InvalidRate(lambda));
    }
    Ok(())
}

fn check_cap(vertices: usize) -> Result<(), ExactError> {
    if vertices > DEFAULT_STATE_CAP {
        return Err(ExactError::StateSpaceTooLarge {
            vertices,
            states: 1u128 << vertices.min(127),
            cap: DEFAULT_STATE_CAP,
        });
    }
    Ok(())
}

/// Survival probability P(infected set nonempty) at each requested time,
/// starting from `init`, with absolute error below `1e-10`.
///
/// Uses uniformization at rate `|V| + lambda * sum of degrees`: the transient
/// distribution is a Poisson mixture of powers of one substochastic jump
/// matrix, truncated when the remaining Poisson mass drops under `1e-12`.
pub fn ctmc_survival(
    g: &Graph,
    lambda: f64,
    init: &Configuration,
    times: &[f64],
) -> Result<SurvivalCurve, ExactError> {
    check_rate(lambda)?;
    check_cap(g.vertex_count())?;
    let mut grid: Vec<f64> = Vec::with_capacity(times.len());
    for &t in times {
        if !(t.is_finite() && t >= 0.0) {
            return Err(ExactError::InvalidTime(t));
        }
        grid.push(t);
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    if init.is_empty() {
        return Ok(SurvivalCurve {
            probabilities: vec![0.0; grid.len()],
            times: grid,
            error_bound: 0.0,
        });
    }

    let free: Vec<VertexId> = (0..g.vertex_count() as u32).map(VertexId).collect();
    let chain = JumpChain::build(g, lambda, &free, None);
    let init_state = state_of(init, &free)?;

    // Weight tables per time; k = 0 is the point mass at the initial state.
    let rate = chain.uniformization_rate;
    let mut weights: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
    for &t in &grid {
        weights.push(poisson_weights(rate * t, t)?);
    }
    let k_max = weights.iter().map(Vec::len).max().unwrap_or(0);

    let mut dead = vec![0.0f64; grid.len()];
    let mut pi = vec![0.0f64; chain.states];
    pi[init_state] = 1.0;
    let mut scratch = vec![0.0f64; chain.states];
    for k in 0..k_max {
        for (acc, w) in dead.iter_mut().zip(&weights) {
            if let Some(&wk) = w.get(k) {
                *acc += wk * pi[0];
            }
        }
        if k + 1 < k_max {
            chain.step(&mut pi, &mut scratch);
        }
    }

    let error_bound = SERIES_TAIL + k_max as f64 * 1e-15;
    let probabilities: Vec<f64> = dead.iter().map(|d| (1.0 - d).clamp(0.0, 1.0)).collect();
    for pair in probabilities.windows(2) {
        debug_assert!(pair[1] <= pair[0] + 2.0 * error_bound);
    }
    Ok(SurvivalCurve {
        times: grid,
        probabilities,
        error_bound,
    })
}

/// Probability that an infection started at `source` alone ever reaches
/// `target`, before global extinction ends the run.
///
/// This is the absorption probability of the chain that freezes as soon as
/// `target` is hit. It lower-bounds any event that additionally allows the
/// source to restart later in some time window.
pub fn ctmc_hit_probability(
    g: &Graph,
    lambda: f64,
    source: VertexId,
    target: VertexId,
) -> Result<f64, ExactError> {
    check_rate(lambda)?;
    let n = g.vertex_count();
    for v in [source, target] {
        if v.index() >= n {
            return Err(ExactError::NoSuchVertex(v));
        }
    }
    check_cap(n)?;
    if source == target {
        return Ok(1.0);
    }
    let free: Vec<VertexId> = (0..n as u32)
        .map(VertexId)
        .filter(|&v| v != target)
        .collect();
    let init = Configuration::from_vertices(n, [source]);
    let (hit, _confined) = absorb(g, lambda, &free, &init)?;
    Ok(hit)
}

/// Probability that an infection started from `init` inside `region` dies out
/// before any vertex outside `region` is ever infected.
///
/// Only transmissions crossing the region boundary can end confinement, so
/// the answer is exact for any ambient graph containing `region` plus its
/// neighbors; extra padding does not change it.
pub fn confinement_probability(
    g: &Graph,
    lambda: f64,
    region: &[VertexId],
    init: &Configuration,
) -> Result<f64, ExactError> {
    check_rate(lambda)?;
    let n = g.vertex_count();
    let mut free = region.to_vec();
    free.sort();
    free.dedup();
    if free.iter().any(|v| v.index() >= n) {
        return Err(ExactError::NoSuchVertex(*free.last().unwrap()));
    }
    check_cap(free.len())?;
    let (_hit, confined) = absorb(g, lambda, &free, init)?;
    Ok(confined)
}

/// Exact probability that the process started from the fully infected
/// interval 1..=n on the line never infects a vertex outside it.
pub fn interval_confinement_probability(n: usize, lambda: f64) -> Result<f64, ExactError> {
    check_rate(lambda)?;
    check_cap(n)?;
    assert!(n >= 1, "interval must be nonempty");
    let g = crate::graphs::build_interval(n, 1);
    let region: Vec<VertexId> = (1..=n as i64)
        .map(|z| g.line_vertex(z).expect("interval vertex present"))
        .collect();
    let init = Configuration::from_vertices(g.vertex_count(), region.iter().copied());
    confinement_probability(&g, lambda, &region, &init)
}

/// Runs the absorbing chain over subsets of `free` and returns
/// `(hit, confined)`: the probability some vertex outside `free` is infected,
/// and the probability of extinction before that happens.
fn absorb(
    g: &Graph,
    lambda: f64,
    free: &[VertexId],
    init: &Configuration,
) -> Result<(f64, f64), ExactError> {
    let chain = JumpChain::build(g, lambda, free, Some(free));
    let init_state = state_of(init, free)?;
    if init_state == 0 {
        return Ok((0.0, 1.0));
    }

    let mut pi = vec![0.0f64; chain.states];
    pi[init_state] = 1.0;
    let mut scratch = vec![0.0f64; chain.states];
    let mut hit = 0.0f64;
    let max_steps = 2_000_000u64;
    for step in 0..=max_steps {
        let alive = 1.0 - hit - pi[0];
        if alive < ABSORPTION_TAIL {
            return Ok((hit + alive / 2.0, pi[0] + alive / 2.0));
        }
        if step == max_steps {
            return Err(ExactError::NoConvergence {
                steps: max_steps,
                remaining: alive,
            });
        }
        for (s, &mass) in pi.iter().enumerate() {
            if mass > 0.0 {
                hit += mass * chain.hit[s];
            }
        }
        chain.step(&mut pi, &mut scratch);
    }
    unreachable!("loop returns or errors at max_steps");
}

/// Uniformized jump matrix over the subsets of a free vertex list.
///
/// Row `s` holds the probabilities of each one-event change from state `s`;
/// the leftover mass sits on the diagonal. Transmissions to vertices outside
/// the free list drain into the per-state `hit` sink instead.
struct JumpChain {
    states: usize,
    uniformization_rate: f64,
    row_start: Vec<u32>,
    col: Vec<u32>,
    val: Vec<f64>,
    diag: Vec<f64>,
    hit: Vec<f64>,
}

impl JumpChain {
    /// `trigger`: when `Some(free)`, any transmission leaving the free set is
    /// absorbed into `hit`; when `None`, `free` must cover the whole graph.
    fn build(g: &Graph, lambda: f64, free: &[VertexId], trigger: Option<&[VertexId]>) -> Self {
        let bits = free.len();
        let states = 1usize << bits;
        let rate = g.vertex_count() as f64 + lambda * g.directed_edge_count() as f64;

        let mut bit_of = vec![usize::MAX; g.vertex_count()];
        for (b, &v) in free.iter().enumerate() {
            bit_of[v.index()] = b;
        }
        debug_assert!(trigger.is_some() || bits == g.vertex_count());

        let mut row_start = Vec::with_capacity(states + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        let mut diag = Vec::with_capacity(states);
        let mut hit = vec![0.0f64; states];
        let recover = 1.0 / rate;
        let transmit = lambda / rate;

        row_start.push(0u32);
        for s in 0..states {
            let mut off_mass = 0.0f64;
            for (b, &v) in free.iter().enumerate() {
                if s & (1 << b) == 0 {
                    continue;
                }
                col.push((s & !(1 << b)) as u32);
                val.push(recover);
                off_mass += recover;
                for &u in g.neighbors(v) {
                    match bit_of[u.index()] {
                        usize::MAX => hit[s] += transmit,
                        ub if s & (1 << ub) == 0 => {
                            col.push((s | (1 << ub)) as u32);
                            val.push(transmit);
                            off_mass += transmit;
                        }
                        _ => {}
                    }
                }
            }
            diag.push(1.0 - off_mass - hit[s]);
            row_start.push(col.len() as u32);
        }

        JumpChain {
            states,
            uniformization_rate: rate,
            row_start,
            col,
            val,
            diag,
            hit,
        }
    }

    /// One uniformized step: `pi <- pi * P`, dropping hit mass (the caller
    /// accumulates it beforehand).
    fn step(&self, pi: &mut Vec<f64>, scratch: &mut Vec<f64>) {
        scratch.iter_mut().for_each(|x| *x = 0.0);
        for (s, &mass) in pi.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            scratch[s] += mass * self.diag[s];
            let lo = self.row_start[s] as usize;
            let hi = self.row_start[s + 1] as usize;
            for (&c, &w) in self.col[lo..hi].iter().zip(&self.val[lo..hi]) {
                scratch[c as usize] += mass * w;
            }
        }
        std::mem::swap(pi, scratch);
    }
}

/// Bitmask of `init` over the free vertex list; errors if `init` touches a
/// vertex outside it.
fn state_of(init: &Configuration, free: &[VertexId]) -> Result<usize, ExactError> {
    let mut bit_of = std::collections::HashMap::new();
    for (b, &v) in free.iter().enumerate() {
        bit_of.insert(v, b);
    }
    let mut state = 0usize;
    let mut seen = 0usize;
    for &v in free {
        if init.contains(v) {
            state |= 1 << bit_of[&v];
            seen += 1;
        }
    }
    if seen != init.len() {
        return Err(ExactError::InitOutsideRegion);
    }
    Ok(state)
}

/// Poisson(m) weights `w_0..w_K` with total mass at least `1 - 1e-12`,
/// computed in log space to survive large `m`.
fn poisson_weights(m: f64, time: f64) -> Result<Vec<f64>, ExactError> {
    const MAX_TERMS: u64 = 1_000_000;
    debug_assert!(m >= 0.0);
    if m == 0.0 {
        return Ok(vec![1.0]);
    }
    let ln_m = m.ln();
    let mut w = Vec::with_capacity((m + 8.0 * m.sqrt()) as usize + 8);
    let mut cum = 0.0f64;
    let mut k = 0u64;
    loop {
        let wk = (-m + k as f64 * ln_m - ln_gamma(k as f64 + 1.0)).exp();
        w.push(wk);
        cum += wk;
        if cum >= 1.0 - SERIES_TAIL {
            return Ok(w);
        }
        k += 1;
        if k >= MAX_TERMS {
            return Err(ExactError::HorizonTooLarge {
                time,
                steps: k,
                max: MAX_TERMS,
            });
        }
    }
}
