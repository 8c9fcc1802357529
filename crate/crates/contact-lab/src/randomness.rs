//! Poisson event logs and the thinning coupling.
//!
//! A log fixes one realisation of the graphical construction for a graph: recovery
//! times per vertex at rate 1, candidate transmission times per directed edge at a
//! reference rate `lambda_max`, each transmission carrying an independent uniform
//! mark. A process at rate `lambda <= lambda_max` keeps exactly the transmissions
//! with `mark * lambda_max < lambda`, so all rates, all initial sets and all
//! subgraphs are coupled on the same randomness: the visible event set can only grow
//! with `lambda`, which makes monotonicity statements exact rather than statistical.
//!
//! Every stream is regenerated from its own deterministic seed, derived from the log
//! seed and the object index. Extending a log to a longer horizon just re-runs each
//! stream further, so the old log is a bitwise prefix of the new one.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use thiserror::Error;

use crate::graphs::{Graph, VertexId};

const STREAM_RECOVERY: u64 = 1;
const STREAM_TRANSMISSION: u64 = 2;
const STREAM_REPLICA: u64 = 3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix3(seed: u64, kind: u64, index: u64) -> u64 {
    let mut h = splitmix64(seed ^ 0xD6E8_FEB8_6659_FD93);
    h = splitmix64(h ^ kind);
    h = splitmix64(h ^ index);
    h
}

/// Seed for replica `index` of an experiment with the given base seed.
///
/// Replicas draw from unrelated streams regardless of how they are scheduled across
/// threads, so estimates are reproducible at any parallelism.
pub fn replica_seed(base_seed: u64, index: usize) -> u64 {
    mix3(base_seed, STREAM_REPLICA, index as u64)
}

#[derive(Debug, Error)]
pub enum RandomnessError {
    #[error("thinning rate {lambda} outside [0, {lambda_max}]")]
    LambdaOutOfRange { lambda: f64, lambda_max: f64 },
}

/// Candidate transmission along one directed edge.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Transmission {
    pub time: f64,
    /// Uniform mark in `[0, 1)`; the transmission is visible at rate `lambda` iff
    /// `mark * lambda_max < lambda`.
    pub mark: f64,
}

/// One realisation of the graphical construction up to a time horizon.
#[derive(Clone, PartialEq, Debug)]
pub struct EventLog {
    seed: u64,
    lambda_max: f64,
    horizon: f64,
    recoveries: Vec<Vec<f64>>,
    transmissions: Vec<Vec<Transmission>>,
    /// Directed edge id -> (from, to), frozen at sampling time so the log replays
    /// without the graph at hand.
    edges: Vec<(VertexId, VertexId)>,
}

impl EventLog {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn vertex_count(&self) -> usize {
        self.recoveries.len()
    }

    pub fn directed_edge_count(&self) -> usize {
        self.transmissions.len()
    }

    pub fn recoveries(&self, v: VertexId) -> &[f64] {
        &self.recoveries[v.index()]
    }

    pub fn transmissions(&self, edge: usize) -> &[Transmission] {
        &self.transmissions[edge]
    }

    pub fn edge_endpoints(&self, edge: usize) -> (VertexId, VertexId) {
        self.edges[edge]
    }

    pub fn event_count(&self) -> u64 {
        let r: usize = self.recoveries.iter().map(Vec::len).sum();
        let t: usize = self.transmissions.iter().map(Vec::len).sum();
        (r + t) as u64
    }
}

fn sample_recovery_stream(stream_seed: u64, horizon: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
    let gap = Exp::new(1.0).unwrap();
    let mut out = Vec::new();
    let mut t = 0.0f64;
    loop {
        t += gap.sample(&mut rng);
        if t >= horizon {
            return out;
        }
        out.push(t);
    }
}

fn sample_transmission_stream(stream_seed: u64, rate: f64, horizon: f64) -> Vec<Transmission> {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
    let gap = Exp::new(rate).unwrap();
    let mut out = Vec::new();
    let mut t = 0.0f64;
    loop {
        t += gap.sample(&mut rng);
        if t >= horizon {
            return out;
        }
        // The mark is drawn right after the gap that produced this event, so an
        // event keeps its mark when the log is extended past the old horizon.
        let mark: f64 = rng.random();
        out.push(Transmission { time: t, mark });
    }
}

/// Samples the graphical construction for `g` on `[0, horizon]`.
pub fn sample_event_log(g: &Graph, lambda_max: f64, horizon: f64, seed: u64) -> EventLog {
    assert!(
        lambda_max > 0.0 && lambda_max.is_finite(),
        "reference rate must be positive and finite"
    );
    assert!(
        horizon > 0.0 && horizon.is_finite(),
        "horizon must be positive and finite"
    );
    let recoveries = (0..g.vertex_count())
        .map(|v| sample_recovery_stream(mix3(seed, STREAM_RECOVERY, v as u64), horizon))
        .collect();
    let edges: Vec<(VertexId, VertexId)> =
        g.directed_edges().map(|(_, u, v)| (u, v)).collect();
    let transmissions = (0..edges.len())
        .map(|e| {
            sample_transmission_stream(mix3(seed, STREAM_TRANSMISSION, e as u64), lambda_max, horizon)
        })
        .collect();
    EventLog {
        seed,
        lambda_max,
        horizon,
        recoveries,
        transmissions,
        edges,
    }
}

/// Extends a log to a later horizon by running every stream further.
///
/// The result is exactly what [`sample_event_log`] would have produced at the longer
/// horizon: existing events (times and marks) are bitwise unchanged, and extending in
/// several steps equals extending in one.
pub fn extend_event_log(log: &EventLog, new_horizon: f64) -> EventLog {
    assert!(
        new_horizon > log.horizon && new_horizon.is_finite(),
        "new horizon must exceed the current one"
    );
    let recoveries = (0..log.recoveries.len())
        .map(|v| sample_recovery_stream(mix3(log.seed, STREAM_RECOVERY, v as u64), new_horizon))
        .collect();
    let transmissions = (0..log.transmissions.len())
        .map(|e| {
            sample_transmission_stream(
                mix3(log.seed, STREAM_TRANSMISSION, e as u64),
                log.lambda_max,
                new_horizon,
            )
        })
        .collect();
    EventLog {
        seed: log.seed,
        lambda_max: log.lambda_max,
        horizon: new_horizon,
        recoveries,
        transmissions,
        edges: log.edges.clone(),
    }
}

/// The transmissions of a log that survive thinning to rate `lambda`.
#[derive(Clone, Copy)]
pub struct ThinnedView<'a> {
    log: &'a EventLog,
    lambda: f64,
}

impl<'a> ThinnedView<'a> {
    pub fn log(&self) -> &'a EventLog {
        self.log
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_visible(&self, t: &Transmission) -> bool {
        t.mark * self.log.lambda_max < self.lambda
    }

    pub fn visible_transmissions(
        &self,
        edge: usize,
    ) -> impl Iterator<Item = &'a Transmission> + '_ {
        self.log.transmissions[edge]
            .iter()
            .filter(move |t| self.is_visible(t))
    }

    pub fn visible_count(&self) -> u64 {
        (0..self.log.transmissions.len())
            .map(|e| self.visible_transmissions(e).count() as u64)
            .sum()
    }
}

/// Restricts a log to the transmissions visible at rate `lambda`.
pub fn thin(log: &EventLog, lambda: f64) -> Result<ThinnedView<'_>, RandomnessError> {
    if !(lambda >= 0.0 && lambda <= log.lambda_max) {
        return Err(RandomnessError::LambdaOutOfRange {
            lambda,
            lambda_max: log.lambda_max,
        });
    }
    Ok(ThinnedView { log, lambda })
}

/// A log event in sweep order.
#[derive(Clone, Copy, Debug)]
pub(crate) enum LogEvent {
    Transmission {
        time: f64,
        from: VertexId,
        to: VertexId,
        mark: f64,
    },
    Recovery {
        time: f64,
        vertex: VertexId,
    },
}

impl LogEvent {
    pub(crate) fn time(&self) -> f64 {
        match self {
            LogEvent::Transmission { time, .. } | LogEvent::Recovery { time, .. } => *time,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
struct HeapKey {
    time: f64,
    kind: u8,
    stream: u32,
}

impl Eq for HeapKey {}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.kind.cmp(&other.kind))
            .then(self.stream.cmp(&other.stream))
    }
}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Chronological merge of every stream in a log.
///
/// Exact time ties are broken deterministically by (time, kind, object index), with
/// transmissions before recoveries. Ties have probability zero in sampled logs; the
/// fixed order makes replay of hand-crafted logs well defined: an arrow fires before
/// the simultaneous recovery of its source, and a vertex recovering at the instant it
/// is hit ends up healthy.
pub(crate) struct LogSweep<'a> {
    log: &'a EventLog,
    heap: BinaryHeap<Reverse<(HeapKey, u32)>>,
}

const KIND_TRANSMISSION: u8 = 0;
const KIND_RECOVERY: u8 = 1;

impl<'a> LogSweep<'a> {
    pub(crate) fn new(log: &'a EventLog) -> Self {
        let mut heap = BinaryHeap::with_capacity(log.recoveries.len() + log.transmissions.len());
        for (v, rec) in log.recoveries.iter().enumerate() {
            if let Some(&t) = rec.first() {
                heap.push(Reverse((
                    HeapKey {
                        time: t,
                        kind: KIND_RECOVERY,
                        stream: v as u32,
                    },
                    0,
                )));
            }
        }
        for (e, tr) in log.transmissions.iter().enumerate() {
            if let Some(first) = tr.first() {
                heap.push(Reverse((
                    HeapKey {
                        time: first.time,
                        kind: KIND_TRANSMISSION,
                        stream: e as u32,
                    },
                    0,
                )));
            }
        }
        LogSweep { log, heap }
    }

    pub(crate) fn next(&mut self) -> Option<LogEvent> {
        let Reverse((key, pos)) = self.heap.pop()?;
        let stream = key.stream as usize;
        let next_pos = pos + 1;
        let event = match key.kind {
            KIND_RECOVERY => {
                let rec = &self.log.recoveries[stream];
                if let Some(&t) = rec.get(next_pos as usize) {
                    self.heap.push(Reverse((
                        HeapKey {
                            time: t,
                            kind: KIND_RECOVERY,
                            stream: key.stream,
                        },
                        next_pos,
                    )));
                }
                LogEvent::Recovery {
                    time: key.time,
                    vertex: VertexId(key.stream),
                }
            }
            _ => {
                let tr = &self.log.transmissions[stream];
                if let Some(next) = tr.get(next_pos as usize) {
                    self.heap.push(Reverse((
                        HeapKey {
                            time: next.time,
                            kind: KIND_TRANSMISSION,
                            stream: key.stream,
                        },
                        next_pos,
                    )));
                }
                let (from, to) = self.log.edges[stream];
                LogEvent::Transmission {
                    time: key.time,
                    from,
                    to,
                    mark: tr[pos as usize].mark,
                }
            }
        };
        Some(event)
    }
}

/// Decides whether infection can flow from some source to some target.
///
/// Sources are (vertex, activation time) pairs; the question is whether, following
/// transmissions visible at rate `lambda` and respecting recoveries, some target
/// vertex carries infection at some instant in `window = [w0, w1]`. A source whose
/// vertex recovers at its own activation instant still counts as present, so a
/// source is always reachable from itself in a window containing its activation.
///
/// All times must lie within `[0, log.horizon()]`.
pub fn reachable(
    log: &EventLog,
    lambda: f64,
    sources: &[(VertexId, f64)],
    targets: &[VertexId],
    window: (f64, f64),
) -> Result<bool, RandomnessError> {
    let view = thin(log, lambda)?;
    let (w0, w1) = window;
    assert!(w0 <= w1, "window must be ordered");
    assert!(w0 >= 0.0 && w1 <= log.horizon, "window must lie within the log horizon");
    for &(_, s) in sources {
        assert!(
            (0.0..=log.horizon).contains(&s),
            "source times must lie within the log horizon"
        );
    }

    let n = log.vertex_count();
    let mut is_target = vec![false; n];
    for &t in targets {
        is_target[t.index()] = true;
    }

    let mut ordered: Vec<(f64, VertexId)> = sources.iter().map(|&(v, s)| (s, v)).collect();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut active = vec![false; n];
    let mut active_count = 0usize;
    // Activation start, meaningful while `active[v]` holds and `v` is a target.
    let mut start = vec![0.0f64; n];

    // Closing a target's activation interval [a, end); `end` is exclusive except at
    // the log horizon, where activity is known up to and including the horizon.
    let hits_window = |a: f64, end: f64, inclusive: bool| -> bool {
        a <= w1 && (end > w0 || (inclusive && end >= w0))
    };

    let activate = |v: VertexId,
                        t: f64,
                        active: &mut Vec<bool>,
                        start: &mut Vec<f64>,
                        active_count: &mut usize| {
        if !active[v.index()] {
            active[v.index()] = true;
            *active_count += 1;
            if is_target[v.index()] {
                start[v.index()] = t;
            }
        }
    };

    let mut sweep = LogSweep::new(log);
    let mut next_source = 0usize;
    let mut pending_log = sweep.next();

    loop {
        // Sources activate after any log event at the same instant.
        let take_source = match (&pending_log, ordered.get(next_source)) {
            (_, None) => {
                if active_count == 0 {
                    return Ok(false);
                }
                false
            }
            (None, Some(_)) => true,
            (Some(ev), Some(&(s, _))) => s < ev.time(),
        };

        if take_source {
            let (s, v) = ordered[next_source];
            next_source += 1;
            activate(v, s, &mut active, &mut start, &mut active_count);
            continue;
        }

        let Some(event) = pending_log.take() else {
            break;
        };
        pending_log = sweep.next();

        match event {
            LogEvent::Transmission {
                time, from, to, mark, ..
            } => {
                if view.is_visible(&Transmission { time, mark })
                    && active[from.index()]
                    && !active[to.index()]
                {
                    activate(to, time, &mut active, &mut start, &mut active_count);
                }
            }
            LogEvent::Recovery { time, vertex } => {
                if active[vertex.index()] {
                    active[vertex.index()] = false;
                    active_count -= 1;
                    if is_target[vertex.index()] && hits_window(start[vertex.index()], time, false)
                    {
                        return Ok(true);
                    }
                    if active_count == 0 && next_source >= ordered.len() {
                        return Ok(false);
                    }
                }
            }
        }
    }

    // Log exhausted: whoever is still active stays active through the horizon.
    for v in 0..n {
        if active[v] && is_target[v] && hits_window(start[v], log.horizon, true) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Serialises a log as one line per event in sweep order:
/// `R <vertex> <time>` and `T <from> <to> <time> <mark>`, floats with 17 significant
/// digits so they parse back bit-exactly.
pub fn write_event_log(log: &EventLog) -> String {
    let mut out = String::new();
    let mut sweep = LogSweep::new(log);
    while let Some(event) = sweep.next() {
        match event {
            LogEvent::Recovery { time, vertex } => {
                writeln!(out, "R {vertex} {time:.16e}").unwrap();
            }
            LogEvent::Transmission {
                time, from, to, mark, ..
            } => {
                writeln!(out, "T {from} {to} {time:.16e} {mark:.16e}").unwrap();
            }
        }
    }
    out
}
