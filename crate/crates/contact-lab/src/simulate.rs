//! Contact-process simulators.
//!
//! Two engines produce statistically identical trajectories:
//!
//! * [`run_direct`] — Gillespie simulation. Each infected vertex `v` carries total
//!   event weight `1 + lambda * deg(v)`; a weighted index picks the vertex, a
//!   uniform draw picks recovery versus transmission to a uniform neighbour.
//! * [`run_from_log`] — deterministic replay of an [`EventLog`]. All randomness
//!   lives in the log, so different rates (thinning), initial sets and subgraphs
//!   (blocked edge) run against the *same* noise, turning monotonicity statements
//!   into path-by-path facts.
//!
//! Transmissions onto an already-infected vertex are executed and counted but change
//! nothing, matching the independent-clocks definition of the process.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use thiserror::Error;

use crate::graphs::{Graph, VertexId};
use crate::randomness::{
    extend_event_log, thin, EventLog, LogEvent, LogSweep, RandomnessError, Transmission,
};

/// Hard cap on stop-rule horizons and automatic log extension.
pub const MAX_HORIZON: f64 = 1e12;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("infection rate must be finite and non-negative, got {0}")]
    InvalidRate(f64),
    #[error("rate {lambda} exceeds the log's reference rate {lambda_max}")]
    RateAboveReference { lambda: f64, lambda_max: f64 },
    #[error("log ends at {horizon} with the process still alive and no stop rule decidable within it")]
    HorizonExceeded { horizon: f64 },
    #[error("initial set was built for {init} vertices, graph has {graph}")]
    InitOutOfRange { init: usize, graph: usize },
    #[error("initial infection lies outside the confinement region")]
    InitOutsideRegion,
}

impl From<RandomnessError> for SimError {
    fn from(e: RandomnessError) -> Self {
        match e {
            RandomnessError::LambdaOutOfRange { lambda, lambda_max } => {
                if lambda >= 0.0 {
                    SimError::RateAboveReference { lambda, lambda_max }
                } else {
                    SimError::InvalidRate(lambda)
                }
            }
        }
    }
}

/// Set of currently infected vertices with O(1) insert, remove and membership.
///
/// Equality is set equality; iteration order is unspecified.
#[derive(Clone, Debug)]
pub struct Configuration {
    members: Vec<VertexId>,
    position: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl Configuration {
    pub fn empty(capacity: usize) -> Self {
        Configuration {
            members: Vec::new(),
            position: vec![ABSENT; capacity],
        }
    }

    pub fn full(g: &Graph) -> Self {
        let mut c = Configuration::empty(g.vertex_count());
        for v in g.vertices() {
            c.insert(v);
        }
        c
    }

    pub fn from_vertices(capacity: usize, vertices: impl IntoIterator<Item = VertexId>) -> Self {
        let mut c = Configuration::empty(capacity);
        for v in vertices {
            c.insert(v);
        }
        c
    }

    /// Number of vertices the configuration was sized for.
    pub fn capacity(&self) -> usize {
        self.position.len()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.position[v.index()] != ABSENT
    }

    /// Returns true if the vertex was newly inserted.
    pub fn insert(&mut self, v: VertexId) -> bool {
        if self.contains(v) {
            return false;
        }
        self.position[v.index()] = self.members.len() as u32;
        self.members.push(v);
        true
    }

    /// Returns true if the vertex was present.
    pub fn remove(&mut self, v: VertexId) -> bool {
        let pos = self.position[v.index()];
        if pos == ABSENT {
            return false;
        }
        let last = *self.members.last().unwrap();
        self.members.swap_remove(pos as usize);
        if last != v {
            self.position[last.index()] = pos;
        }
        self.position[v.index()] = ABSENT;
        true
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.members.iter().copied()
    }

    pub fn to_sorted(&self) -> Vec<VertexId> {
        let mut v: Vec<VertexId> = self.members.clone();
        v.sort_unstable();
        v
    }
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.capacity() == other.capacity()
            && self.len() == other.len()
            && self.iter().all(|v| other.contains(v))
    }
}

impl Eq for Configuration {}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StopReason {
    /// No infected vertices remain.
    Extinction,
    /// The time horizon passed with the process still alive.
    TimeHorizon,
    /// A vertex outside the escape region became infected.
    Escape,
    /// The event budget was exhausted.
    EventBudget,
    /// The occupancy target was reached.
    OccupancyReached,
}

#[derive(Clone, Debug, Default)]
struct RegionMask {
    inside: Vec<bool>,
}

impl RegionMask {
    fn new(capacity: usize, members: &[VertexId]) -> Self {
        let mut inside = vec![false; capacity];
        for v in members {
            inside[v.index()] = true;
        }
        RegionMask { inside }
    }

    fn contains(&self, v: VertexId) -> bool {
        self.inside[v.index()]
    }
}

/// When to halt a run. Extinction always stops the process (nothing can happen in
/// the empty configuration); the optional conditions are checked after every
/// executed event, with precedence Extinction, Escape, OccupancyReached,
/// EventBudget if one event triggers several.
#[derive(Clone, Debug, Default)]
pub struct StopRule {
    time_horizon: Option<f64>,
    escape_region: Option<RegionMask>,
    event_budget: Option<u64>,
    occupancy: Option<(RegionMask, usize)>,
}

impl StopRule {
    /// Run until the infection dies out (or another condition added below fires).
    pub fn extinction() -> Self {
        StopRule::default()
    }

    /// Also stop at time `t`, reporting the state as of `t`.
    pub fn with_time_horizon(mut self, t: f64) -> Self {
        assert!(t > 0.0 && t <= MAX_HORIZON, "horizon must be in (0, {MAX_HORIZON}]");
        self.time_horizon = Some(t);
        self
    }

    /// Also stop as soon as any vertex outside `region` becomes infected.
    pub fn with_escape_region(mut self, g: &Graph, region: &[VertexId]) -> Self {
        self.escape_region = Some(RegionMask::new(g.vertex_count(), region));
        self
    }

    /// Also stop after `n` executed events.
    pub fn with_event_budget(mut self, n: u64) -> Self {
        assert!(n > 0, "event budget must be positive");
        self.event_budget = Some(n);
        self
    }

    /// Also stop once at least `threshold` vertices of `region` are infected
    /// simultaneously.
    pub fn with_occupancy_target(mut self, g: &Graph, region: &[VertexId], threshold: usize) -> Self {
        assert!(threshold >= 1, "occupancy threshold must be positive");
        self.occupancy = Some((RegionMask::new(g.vertex_count(), region), threshold));
        self
    }

    pub fn time_horizon(&self) -> Option<f64> {
        self.time_horizon
    }
}

/// How and when a run ended.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct SimOutcome {
    pub reason: StopReason,
    pub stop_time: f64,
    pub extinct: bool,
    /// Whether any vertex outside the escape region was ever infected.
    pub escaped: bool,
    /// Largest number of simultaneously infected vertices observed.
    pub peak_infected: usize,
    /// Executed events: recoveries of infected vertices plus transmissions fired by
    /// infected vertices (including no-op transmissions onto infected targets).
    pub total_events: u64,
    /// Transmissions across the tracked edge that infected a susceptible vertex;
    /// no-op crossings onto already-infected targets are not counted.
    pub estar_crossings: u64,
}

/// State-changing events, in time order, as seen by an observer callback.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum TraceEvent {
    Infection {
        time: f64,
        vertex: VertexId,
        source: VertexId,
    },
    Recovery {
        time: f64,
        vertex: VertexId,
    },
}

impl TraceEvent {
    pub fn time(&self) -> f64 {
        match self {
            TraceEvent::Infection { time, .. } | TraceEvent::Recovery { time, .. } => *time,
        }
    }

    pub fn vertex(&self) -> VertexId {
        match self {
            TraceEvent::Infection { vertex, .. } | TraceEvent::Recovery { vertex, .. } => *vertex,
        }
    }
}

#[derive(Clone, Copy, Default)]
pub struct DirectOptions {
    /// Count transmissions across this undirected edge in `estar_crossings`.
    pub track_edge: Option<(VertexId, VertexId)>,
}

#[derive(Clone, Copy, Default)]
pub struct ReplayOptions {
    /// Drop all transmissions across this undirected edge, realising the dynamics
    /// of the graph with the edge removed on the same log.
    pub blocked_edge: Option<(VertexId, VertexId)>,
    /// Count transmissions across this undirected edge in `estar_crossings`.
    pub track_edge: Option<(VertexId, VertexId)>,
}

fn same_undirected(edge: (VertexId, VertexId), u: VertexId, v: VertexId) -> bool {
    edge == (u, v) || edge == (v, u)
}

/// Fenwick tree over per-vertex event weights; `pick` finds the vertex covering a
/// uniform point of the total weight in O(log n).
struct WeightIndex {
    tree: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightIndex {
    fn new(n: usize) -> Self {
        WeightIndex {
            tree: vec![0.0; n + 1],
            weights: vec![0.0; n],
        }
    }

    fn set(&mut self, i: usize, w: f64) {
        let delta = w - self.weights[i];
        self.weights[i] = w;
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        let mut sum = 0.0;
        let mut j = self.tree.len() - 1;
        while j > 0 {
            sum += self.tree[j];
            j &= j - 1;
        }
        sum
    }

    /// Largest index whose prefix sum is at most `target`; requires `target` in
    /// `[0, total())`.
    fn pick(&self, mut target: f64) -> usize {
        let n = self.tree.len() - 1;
        let mut idx = 0usize;
        let mut bit = n.next_power_of_two();
        if bit > n {
            bit >>= 1;
        }
        while bit != 0 {
            let next = idx + bit;
            if next <= n && self.tree[next] <= target {
                target -= self.tree[next];
                idx = next;
            }
            bit >>= 1;
        }
        idx.min(n - 1)
    }

    /// Recomputes internal sums from the exact per-vertex weights, clearing the
    /// floating-point drift that accumulates over very long runs.
    fn rebuild(&mut self) {
        self.tree.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..self.weights.len() {
            let w = self.weights[i];
            if w != 0.0 {
                let mut j = i + 1;
                while j < self.tree.len() {
                    self.tree[j] += w;
                    j += j & j.wrapping_neg();
                }
            }
        }
    }
}

const REBUILD_PERIOD: u64 = 1 << 26;

struct RunState<'a> {
    infected: Configuration,
    stop: &'a StopRule,
    escaped: bool,
    peak: usize,
    events: u64,
    crossings: u64,
    occupancy_count: usize,
}

impl<'a> RunState<'a> {
    fn new(init: &Configuration, stop: &'a StopRule) -> Self {
        let occupancy_count = match &stop.occupancy {
            Some((region, _)) => init.iter().filter(|&v| region.contains(v)).count(),
            None => 0,
        };
        RunState {
            infected: init.clone(),
            stop,
            escaped: false,
            peak: init.len(),
            events: 0,
            crossings: 0,
            occupancy_count,
        }
    }

    fn outcome(&self, reason: StopReason, stop_time: f64) -> SimOutcome {
        SimOutcome {
            reason,
            stop_time,
            extinct: self.infected.is_empty(),
            escaped: self.escaped,
            peak_infected: self.peak,
            total_events: self.events,
            estar_crossings: self.crossings,
        }
    }

    /// Conditions already decided by the initial configuration, before any event.
    fn initial_stop(&mut self) -> Option<StopReason> {
        if self.infected.is_empty() {
            return Some(StopReason::Extinction);
        }
        if let Some(region) = &self.stop.escape_region {
            if self.infected.iter().any(|v| !region.contains(v)) {
                self.escaped = true;
                return Some(StopReason::Escape);
            }
        }
        if let Some((_, threshold)) = &self.stop.occupancy {
            if self.occupancy_count >= *threshold {
                return Some(StopReason::OccupancyReached);
            }
        }
        None
    }

    fn apply_recovery(&mut self, v: VertexId) -> Option<StopReason> {
        self.infected.remove(v);
        if let Some((region, _)) = &self.stop.occupancy {
            if region.contains(v) {
                self.occupancy_count -= 1;
            }
        }
        self.events += 1;
        if self.infected.is_empty() {
            return Some(StopReason::Extinction);
        }
        self.budget_stop()
    }

    /// Applies a transmission fired by an infected vertex; `infect` says whether the
    /// target was healthy.
    fn apply_transmission(&mut self, to: VertexId, infect: bool) -> Option<StopReason> {
        self.events += 1;
        if infect {
            self.infected.insert(to);
            self.peak = self.peak.max(self.infected.len());
            if let Some(region) = &self.stop.escape_region {
                if !region.contains(to) {
                    self.escaped = true;
                    return Some(StopReason::Escape);
                }
            }
            if let Some((region, threshold)) = &self.stop.occupancy {
                if region.contains(to) {
                    self.occupancy_count += 1;
                    if self.occupancy_count >= *threshold {
                        return Some(StopReason::OccupancyReached);
                    }
                }
            }
        }
        self.budget_stop()
    }

    fn budget_stop(&self) -> Option<StopReason> {
        match self.stop.event_budget {
            Some(budget) if self.events >= budget => Some(StopReason::EventBudget),
            _ => None,
        }
    }
}

fn check_init(g: &Graph, init: &Configuration) -> Result<(), SimError> {
    if init.capacity() != g.vertex_count() {
        return Err(SimError::InitOutOfRange {
            init: init.capacity(),
            graph: g.vertex_count(),
        });
    }
    Ok(())
}

pub fn run_direct(
    g: &Graph,
    lambda: f64,
    init: &Configuration,
    stop: &StopRule,
    seed: u64,
) -> Result<SimOutcome, SimError> {
    run_direct_with(g, lambda, init, stop, seed, DirectOptions::default(), |_| {})
}

pub fn run_direct_with(
    g: &Graph,
    lambda: f64,
    init: &Configuration,
    stop: &StopRule,
    seed: u64,
    opts: DirectOptions,
    mut observe: impl FnMut(&TraceEvent),
) -> Result<SimOutcome, SimError> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(SimError::InvalidRate(lambda));
    }
    check_init(g, init)?;

    let mut state = RunState::new(init, stop);
    if let Some(reason) = state.initial_stop() {
        return Ok(state.outcome(reason, 0.0));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.vertex_count();
    let vertex_weight = |v: VertexId| 1.0 + lambda * g.degree(v) as f64;

    let mut index = WeightIndex::new(n);
    for v in state.infected.iter() {
        index.set(v.index(), vertex_weight(v));
    }

    let mut t = 0.0f64;
    loop {
        let total = index.total();
        debug_assert!(total > 0.0, "positive weight while infected set is nonempty");
        let gap: f64 = rng.sample::<f64, _>(Exp1) / total;
        if let Some(horizon) = stop.time_horizon {
            if t + gap > horizon {
                return Ok(state.outcome(StopReason::TimeHorizon, horizon));
            }
        }
        t += gap;

        let v = VertexId(index.pick(rng.random::<f64>() * total) as u32);
        debug_assert!(state.infected.contains(v));
        if !state.infected.contains(v) {
            // Float drift landed the pick on a boundary; harmless to resample.
            continue;
        }
        let w_v = index.weights[v.index()];
        let reason = if rng.random::<f64>() * w_v < 1.0 {
            index.set(v.index(), 0.0);
            observe(&TraceEvent::Recovery { time: t, vertex: v });
            state.apply_recovery(v)
        } else {
            let neighbors = g.neighbors(v);
            let to = neighbors[rng.random_range(0..neighbors.len())];
            let infect = !state.infected.contains(to);
            if let Some(edge) = opts.track_edge {
                if infect && same_undirected(edge, v, to) {
                    state.crossings += 1;
                }
            }
            if infect {
                index.set(to.index(), vertex_weight(to));
                observe(&TraceEvent::Infection {
                    time: t,
                    vertex: to,
                    source: v,
                });
            }
            state.apply_transmission(to, infect)
        };
        if let Some(reason) = reason {
            return Ok(state.outcome(reason, t));
        }
        if state.events % REBUILD_PERIOD == 0 {
            index.rebuild();
        }
    }
}

pub fn run_from_log(
    g: &Graph,
    log: &EventLog,
    lambda: f64,
    init: &Configuration,
    stop: &StopRule,
) -> Result<SimOutcome, SimError> {
    run_from_log_with(g, log, lambda, init, stop, ReplayOptions::default(), |_| {})
}

pub fn run_from_log_with(
    g: &Graph,
    log: &EventLog,
    lambda: f64,
    init: &Configuration,
    stop: &StopRule,
    opts: ReplayOptions,
    mut observe: impl FnMut(&TraceEvent),
) -> Result<SimOutcome, SimError> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(SimError::InvalidRate(lambda));
    }
    let view = thin(log, lambda)?;
    check_init(g, init)?;
    assert_eq!(
        (g.vertex_count(), g.directed_edge_count()),
        (log.vertex_count(), log.directed_edge_count()),
        "log was sampled for a different graph"
    );

    let mut state = RunState::new(init, stop);
    if let Some(reason) = state.initial_stop() {
        return Ok(state.outcome(reason, 0.0));
    }

    let mut sweep = LogSweep::new(log);
    while let Some(event) = sweep.next() {
        if let Some(horizon) = stop.time_horizon {
            if event.time() > horizon {
                return Ok(state.outcome(StopReason::TimeHorizon, horizon));
            }
        }
        let reason = match event {
            LogEvent::Recovery { time, vertex } => {
                if state.infected.contains(vertex) {
                    observe(&TraceEvent::Recovery { time, vertex });
                    state.apply_recovery(vertex)
                } else {
                    None
                }
            }
            LogEvent::Transmission {
                time,
                from,
                to,
                mark,
                ..
            } => {
                if opts
                    .blocked_edge
                    .is_some_and(|edge| same_undirected(edge, from, to))
                {
                    None
                } else if view.is_visible(&Transmission { time, mark })
                    && state.infected.contains(from)
                {
                    let infect = !state.infected.contains(to);
                    if let Some(edge) = opts.track_edge {
                        if infect && same_undirected(edge, from, to) {
                            state.crossings += 1;
                        }
                    }
                    if infect {
                        observe(&TraceEvent::Infection {
                            time,
                            vertex: to,
                            source: from,
                        });
                    }
                    state.apply_transmission(to, infect)
                } else {
                    None
                }
            }
        };
        if let Some(reason) = reason {
            return Ok(state.outcome(reason, event.time()));
        }
    }

    // Log exhausted with the process alive: decidable only if a time horizon lies
    // within the sampled window (no events happen between the last one and the
    // horizon).
    match stop.time_horizon {
        Some(horizon) if horizon <= log.horizon() => {
            Ok(state.outcome(StopReason::TimeHorizon, horizon))
        }
        _ => Err(SimError::HorizonExceeded {
            horizon: log.horizon(),
        }),
    }
}

/// Replay that extends the log (by doubling its horizon, capped at
/// [`MAX_HORIZON`]) until the stop rule resolves.
pub fn run_from_log_auto(
    g: &Graph,
    log: &mut EventLog,
    lambda: f64,
    init: &Configuration,
    stop: &StopRule,
    opts: ReplayOptions,
) -> Result<SimOutcome, SimError> {
    loop {
        match run_from_log_with(g, log, lambda, init, stop, opts, |_| {}) {
            Err(SimError::HorizonExceeded { horizon }) if horizon < MAX_HORIZON => {
                *log = extend_event_log(log, (horizon * 2.0).min(MAX_HORIZON));
            }
            other => return other,
        }
    }
}

/// Whether the infection started in `init` dies out before ever leaving `region`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ConfinementOutcome {
    pub confined: bool,
    pub extinct_within_region: bool,
}

/// Runs the process until it either dies out or infects a vertex outside `region`.
///
/// With that stop rule the two outcome fields coincide: the process is confined
/// exactly when it goes extinct without leaving the region.
pub fn confinement_trial(
    g: &Graph,
    region: &[VertexId],
    lambda: f64,
    init: &Configuration,
    seed: u64,
) -> Result<ConfinementOutcome, SimError> {
    check_init(g, init)?;
    let mask = RegionMask::new(g.vertex_count(), region);
    if init.iter().any(|v| !mask.contains(v)) {
        return Err(SimError::InitOutsideRegion);
    }
    let stop = StopRule::extinction().with_escape_region(g, region);
    let outcome = run_direct(g, lambda, init, &stop, seed)?;
    let confined = outcome.reason == StopReason::Extinction;
    Ok(ConfinementOutcome {
        confined,
        extinct_within_region: confined,
    })
}
