//! Congestion-aware two-level route discovery over the fronthaul mesh.
//!
//! A route's score is `f(R) = ρ(R) / L(R)` where `ρ(R) = Π (1 − used/total)`
//! over the route's segments and `L(R)` is its segment count. Candidate routes
//! are every simple path of at most `max_len` segments that avoids saturated
//! segments. The best candidate is committed to the [`RoutingLedger`] as one
//! packet unit on each of its segments.
//!
//! Level 1 routes the DU to each UE's ARU. Level 2 routes the ARU to each of
//! the UE's other serving RUs. A UE whose level-1 route fails skips level 2.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouping::ServingSubset;
use crate::topology::{FronthaulTopology, NodeId, SegmentId};

/// Relative gap under which two utilities are treated as tied.
pub const UTILITY_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingLedger {
    used: Vec<u32>,
    total: Vec<u32>,
}

impl RoutingLedger {
    pub fn new(topology: &FronthaulTopology) -> Self {
        Self::from_parts(
            vec![0; topology.segments().len()],
            topology
                .segments()
                .iter()
                .map(|s| s.total_capacity)
                .collect(),
        )
    }

    /// Ledger with explicit counters. Panics if the vectors disagree in length
    /// or any `used` exceeds its `total`.
    pub fn from_parts(used: Vec<u32>, total: Vec<u32>) -> Self {
        assert_eq!(used.len(), total.len());
        assert!(used.iter().zip(&total).all(|(u, t)| u <= t && *t > 0));
        Self { used, total }
    }

    pub fn used(&self, segment: SegmentId) -> u32 {
        self.used[segment]
    }

    pub fn total(&self, segment: SegmentId) -> u32 {
        self.total[segment]
    }

    pub fn segment_count(&self) -> usize {
        self.used.len()
    }

    pub fn is_saturated(&self, segment: SegmentId) -> bool {
        self.used[segment] >= self.total[segment]
    }

    /// `used / total` for one segment.
    pub fn occupancy(&self, segment: SegmentId) -> f64 {
        f64::from(self.used[segment]) / f64::from(self.total[segment])
    }

    /// Largest per-segment load.
    pub fn peak_used(&self) -> u32 {
        self.used.iter().copied().max().unwrap_or(0)
    }

    /// Adds one packet unit to every segment of `route`. Fails without
    /// touching the ledger if any of them is already full.
    pub fn commit(&mut self, route: &Route) -> Result<()> {
        if let Some(&s) = route.segments.iter().find(|&&s| self.is_saturated(s)) {
            return Err(Error::Saturated {
                segment: s,
                used: self.used[s],
                total: self.total[s],
            });
        }
        for &s in &route.segments {
            self.used[s] += 1;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Route {
    pub segments: Vec<SegmentId>,
    /// Source first, destination last; `nodes.len() == segments.len() + 1`.
    pub nodes: Vec<NodeId>,
}

impl Route {
    /// Number of segments, `L(R)`.
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// `Π (1 − β)` over the route's segments.
pub fn utilizable_rate(ledger: &RoutingLedger, route: &Route) -> f64 {
    route
        .segments
        .iter()
        .map(|&s| 1.0 - ledger.occupancy(s))
        .product()
}

/// `ρ(R) / L(R)`.
pub fn utility(ledger: &RoutingLedger, route: &Route) -> f64 {
    utilizable_rate(ledger, route) / route.len() as f64
}

/// Every simple path from `src` to `dst` with at most `max_len` segments that
/// uses no saturated segment, in lexicographic order of node sequence.
pub fn discover_routes(
    topology: &FronthaulTopology,
    ledger: &RoutingLedger,
    src: NodeId,
    dst: NodeId,
    max_len: usize,
) -> Result<Vec<Route>> {
    let n = topology.node_count();
    for node in [src, dst] {
        if node >= n {
            return Err(Error::UnknownNode(node));
        }
    }
    if src == dst || max_len == 0 {
        return Ok(Vec::new());
    }

    // usable neighbours of each node, ascending by (neighbour, segment)
    let neighbours: Vec<Vec<(NodeId, SegmentId)>> = (0..n)
        .map(|u| {
            let mut v: Vec<(NodeId, SegmentId)> = topology
                .incident_segments(u)
                .expect("node in range")
                .iter()
                .filter(|&&s| !ledger.is_saturated(s))
                .map(|&s| (topology.segment(s).other_end(u), s))
                .collect();
            v.sort_unstable();
            v
        })
        .collect();

    // hop distance to dst over usable segments, for pruning
    let mut to_dst = vec![usize::MAX; n];
    to_dst[dst] = 0;
    let mut frontier = vec![dst];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for u in frontier {
            for &(v, _) in &neighbours[u] {
                if to_dst[v] == usize::MAX {
                    to_dst[v] = to_dst[u] + 1;
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    if to_dst[src] > max_len {
        return Ok(Vec::new());
    }

    let mut search = PathSearch {
        neighbours: &neighbours,
        to_dst: &to_dst,
        dst,
        max_len,
        on_path: vec![false; n],
        nodes: vec![src],
        segments: Vec::new(),
        found: Vec::new(),
    };
    search.on_path[src] = true;
    search.extend(src);
    Ok(search.found)
}

struct PathSearch<'a> {
    neighbours: &'a [Vec<(NodeId, SegmentId)>],
    to_dst: &'a [usize],
    dst: NodeId,
    max_len: usize,
    on_path: Vec<bool>,
    nodes: Vec<NodeId>,
    segments: Vec<SegmentId>,
    found: Vec<Route>,
}

impl PathSearch<'_> {
    fn extend(&mut self, u: NodeId) {
        for &(v, s) in &self.neighbours[u] {
            if self.on_path[v] || self.segments.len() + 1 + self.to_dst[v] > self.max_len {
                continue;
            }
            self.nodes.push(v);
            self.segments.push(s);
            if v == self.dst {
                self.found.push(Route {
                    segments: self.segments.clone(),
                    nodes: self.nodes.clone(),
                });
            } else {
                self.on_path[v] = true;
                self.extend(v);
                self.on_path[v] = false;
            }
            self.nodes.pop();
            self.segments.pop();
        }
    }
}

/// Outcome of choosing among candidate routes.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub best: Option<Route>,
    pub utility: Option<f64>,
    pub candidates_count: usize,
}

/// Highest-utility candidate. Utilities within [`UTILITY_TIE_TOLERANCE`] of
/// the maximum tie, and ties go to the shorter route, then to the
/// lexicographically smaller node sequence. No candidates gives no route.
pub fn best_route(candidates: Vec<Route>, ledger: &RoutingLedger) -> Selection {
    let candidates_count = candidates.len();
    let scored: Vec<(f64, Route)> = candidates
        .into_iter()
        .map(|r| (utility(ledger, &r), r))
        .collect();
    let Some(top) = scored.iter().map(|(f, _)| *f).reduce(f64::max) else {
        return Selection {
            best: None,
            utility: None,
            candidates_count,
        };
    };
    let (f, route) = scored
        .into_iter()
        .filter(|(f, _)| top - f <= UTILITY_TIE_TOLERANCE * top)
        .min_by(|a, b| {
            a.1.len()
                .cmp(&b.1.len())
                .then_with(|| a.1.nodes.cmp(&b.1.nodes))
        })
        .expect("the maximum is always within tolerance of itself");
    Selection {
        best: Some(route),
        utility: Some(f),
        candidates_count,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    L1,
    L2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteDecision {
    pub ue_id: usize,
    pub target_ru_id: NodeId,
    pub level: Level,
    pub best: Option<Route>,
    pub utility: Option<f64>,
    pub candidates_count: usize,
}

impl RouteDecision {
    pub fn succeeded(&self) -> bool {
        self.best.is_some()
    }

    pub fn path_len(&self) -> Option<usize> {
        self.best.as_ref().map(Route::len)
    }
}

/// Routing outcome for one UE.
#[derive(Debug, Clone, PartialEq)]
pub struct UeRouting {
    pub ue_id: usize,
    pub aru_id: NodeId,
    pub l1: RouteDecision,
    /// One decision per non-ARU serving RU; empty if level 1 failed.
    pub l2: Vec<RouteDecision>,
}

impl UeRouting {
    pub fn decision_for(&self, ru: NodeId) -> Option<&RouteDecision> {
        if ru == self.aru_id {
            Some(&self.l1)
        } else {
            self.l2.iter().find(|d| d.target_ru_id == ru)
        }
    }
}

/// Order in which UEs claim capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum UeOrder {
    #[default]
    Ascending,
    Shuffled {
        seed: u64,
    },
}

impl UeOrder {
    pub fn arrange(&self, mut ue_ids: Vec<usize>) -> Vec<usize> {
        ue_ids.sort_unstable();
        if let UeOrder::Shuffled { seed } = *self {
            ue_ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        ue_ids
    }
}

fn route_and_commit(
    topology: &FronthaulTopology,
    ledger: &mut RoutingLedger,
    ue_id: usize,
    level: Level,
    src: NodeId,
    dst: NodeId,
    max_len: usize,
) -> Result<RouteDecision> {
    let candidates = discover_routes(topology, ledger, src, dst, max_len)?;
    let sel = best_route(candidates, ledger);
    if let Some(route) = &sel.best {
        ledger.commit(route)?;
    }
    Ok(RouteDecision {
        ue_id,
        target_ru_id: dst,
        level,
        best: sel.best,
        utility: sel.utility,
        candidates_count: sel.candidates_count,
    })
}

/// Runs level-1 and level-2 routing for every subset, committing into `ledger`.
///
/// UEs are handled in `order`; within a UE, level 2 targets follow the subset's
/// own order (strongest first). The result is sorted by UE id.
pub fn route_two_level(
    topology: &FronthaulTopology,
    ledger: &mut RoutingLedger,
    subsets: &[ServingSubset],
    max_len: usize,
    order: UeOrder,
) -> Result<Vec<UeRouting>> {
    let by_ue = |id: usize| {
        subsets
            .iter()
            .find(|s| s.ue_id == id)
            .expect("id from subsets")
    };
    let du = topology.du();
    let mut out = Vec::with_capacity(subsets.len());
    for ue in order.arrange(subsets.iter().map(|s| s.ue_id).collect()) {
        let subset = by_ue(ue);
        let l1 = route_and_commit(topology, ledger, ue, Level::L1, du, subset.aru_id, max_len)?;
        let mut l2 = Vec::new();
        if l1.succeeded() {
            for ru in subset.secondary_rus() {
                l2.push(route_and_commit(
                    topology,
                    ledger,
                    ue,
                    Level::L2,
                    subset.aru_id,
                    ru,
                    max_len,
                )?);
            }
        }
        out.push(UeRouting {
            ue_id: ue,
            aru_id: subset.aru_id,
            l1,
            l2,
        });
    }
    out.sort_by_key(|u| u.ue_id);
    Ok(out)
}

/// Utility comparison used by [`best_route`], exposed for diagnostics.
pub fn compare_candidates(a: (f64, &Route), b: (f64, &Route)) -> Ordering {
    let top = a.0.max(b.0);
    if (a.0 - b.0).abs() <= UTILITY_TIE_TOLERANCE * top {
        a.1.len()
            .cmp(&b.1.len())
            .then_with(|| a.1.nodes.cmp(&b.1.nodes))
    } else if a.0 > b.0 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}
