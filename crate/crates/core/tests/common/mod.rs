#![allow(dead_code)]

use std::collections::VecDeque;

use fhsim::channel::{draw_channel, place_entities, Area, ChannelParams};
use fhsim::grouping::{select_top_m, to_association};
use fhsim::precoding::{czf, effective_channel, normalize_power, CMatrix};
use fhsim::routing::{best_route, discover_routes, RoutingLedger};
use fhsim::topology::{build_grid, DuCorner, FronthaulTopology};
use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORNERS: [DuCorner; 4] = [
    DuCorner::TopLeft,
    DuCorner::TopRight,
    DuCorner::BottomLeft,
    DuCorner::BottomRight,
];

/// Every simple path from `src` to `dst` with at most `max_len` segments that
/// avoids saturated segments, found by breadth-first expansion of partial paths
/// over the raw segment list.
pub fn brute_force_paths(
    topo: &FronthaulTopology,
    used: &[u32],
    total: &[u32],
    src: usize,
    dst: usize,
    max_len: usize,
) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut done = Vec::new();
    if src == dst {
        return done;
    }
    let mut queue = VecDeque::from([(vec![src], Vec::<usize>::new())]);
    while let Some((nodes, segs)) = queue.pop_front() {
        let here = *nodes.last().unwrap();
        if here == dst {
            done.push((nodes, segs));
            continue;
        }
        if segs.len() == max_len {
            continue;
        }
        for s in topo.segments() {
            if used[s.id] >= total[s.id] {
                continue;
            }
            let (a, b) = s.endpoints;
            let next = if a == here {
                b
            } else if b == here {
                a
            } else {
                continue;
            };
            if nodes.contains(&next) {
                continue;
            }
            let mut n2 = nodes.clone();
            n2.push(next);
            let mut s2 = segs.clone();
            s2.push(s.id);
            queue.push_back((n2, s2));
        }
    }
    done
}

pub fn oracle_utility(used: &[u32], total: &[u32], segs: &[usize]) -> f64 {
    let rho: f64 = segs
        .iter()
        .map(|&s| 1.0 - used[s] as f64 / total[s] as f64)
        .product();
    rho / segs.len() as f64
}

/// Argmax of utility; near-equal utilities (relative 1e-12) resolve to the
/// shorter path, then the smaller node sequence.
pub fn oracle_best(
    paths: &[(Vec<usize>, Vec<usize>)],
    used: &[u32],
    total: &[u32],
) -> Option<(Vec<usize>, f64)> {
    let scored: Vec<(f64, &Vec<usize>)> = paths
        .iter()
        .map(|(n, s)| (oracle_utility(used, total, s), n))
        .collect();
    let top = scored.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
    let mut tied: Vec<(f64, &Vec<usize>)> = scored
        .into_iter()
        .filter(|(f, _)| top - f <= 1e-12 * top)
        .collect();
    tied.sort_by(|a, b| a.1.len().cmp(&b.1.len()).then(a.1.cmp(b.1)));
    tied.first().map(|(f, n)| ((*n).clone(), *f))
}

pub fn random_ledger(topo: &FronthaulTopology, rng: &mut ChaCha8Rng) -> (Vec<u32>, Vec<u32>) {
    let total: Vec<u32> = topo
        .segments()
        .iter()
        .map(|_| rng.random_range(1..=4))
        .collect();
    let used = total
        .iter()
        .map(|&t| {
            if rng.random_bool(0.2) {
                t
            } else {
                rng.random_range(0..=t)
            }
        })
        .collect();
    (used, total)
}

#[derive(Debug, Default)]
pub struct OracleStats {
    pub queries: usize,
    pub with_route: usize,
    pub mismatches: Vec<String>,
}

/// Compares discovery and selection against the brute force on every grid up
/// to 3×3, `ledgers` random ledger states each, all ordered node pairs and
/// every max_len in 1..=6.
pub fn routing_oracle_sweep(ledgers: usize, seed: u64) -> OracleStats {
    let mut stats = OracleStats::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for rows in 1..=3 {
        for cols in 1..=3 {
            let corner = CORNERS[(rows * 3 + cols) % 4];
            let topo = build_grid(rows, cols, 10.0, 1, 1, corner).unwrap();
            for _ in 0..ledgers {
                let (used, total) = random_ledger(&topo, &mut rng);
                let ledger = RoutingLedger::from_parts(used.clone(), total.clone());
                for src in 0..topo.node_count() {
                    for dst in 0..topo.node_count() {
                        if src == dst {
                            continue;
                        }
                        for max_len in 1..=6 {
                            stats.queries += 1;
                            let paths = brute_force_paths(&topo, &used, &total, src, dst, max_len);
                            let expect = oracle_best(&paths, &used, &total);
                            let found = discover_routes(&topo, &ledger, src, dst, max_len).unwrap();
                            let mut want_nodes: Vec<&Vec<usize>> =
                                paths.iter().map(|p| &p.0).collect();
                            want_nodes.sort();
                            let got_nodes: Vec<&Vec<usize>> =
                                found.iter().map(|r| &r.nodes).collect();
                            if want_nodes != got_nodes {
                                stats.mismatches.push(format!(
                                    "{rows}x{cols} {src}->{dst} L<={max_len}: candidates {got_nodes:?} != {want_nodes:?}"
                                ));
                                continue;
                            }
                            let sel = best_route(found, &ledger);
                            let got = sel.best.map(|r| r.nodes).zip(sel.utility);
                            match (&got, &expect) {
                                (None, None) => {}
                                (Some((gn, gf)), Some((en, ef))) if gn == en && gf.to_bits() == ef.to_bits() => {
                                    stats.with_route += 1
                                }
                                _ => stats.mismatches.push(format!(
                                    "{rows}x{cols} {src}->{dst} L<={max_len}: best {got:?} != {expect:?}"
                                )),
                            }
                        }
                    }
                }
            }
        }
    }
    stats
}

#[derive(Debug, Default)]
pub struct ZfStats {
    pub channels: usize,
    pub skipped_rank_deficient: usize,
    pub worst_identity_error: f64,
    pub worst_power_excess: f64,
}

/// Draws realistic masked channels (K ≤ 8, N = 16, random M per draw) until
/// `count` full-rank ones have been checked. Errors are relative to the
/// common diagonal value `c` and to the power limit `P`.
pub fn zf_sweep(count: usize, seed: u64) -> ZfStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topo = build_grid(4, 4, 25.0, 10, 2, DuCorner::TopLeft).unwrap();
    let params = ChannelParams::default();
    let p = fhsim::channel::dbm_to_watts(params.ru_power_dbm);
    let mut stats = ZfStats::default();
    while stats.channels < count {
        let k = rng.random_range(1..=8);
        let m = rng.random_range(1..=5);
        let dep = place_entities(Area::square(100.0), k, 1000, 0.5, rng.random());
        let ch = draw_channel(&dep, &topo, &params, rng.random()).unwrap();
        let subsets = select_top_m(&ch.large_scale, m).unwrap();
        let a = to_association(&subsets, k, 16).unwrap();
        let eff = effective_channel(&ch.h, &a).unwrap();
        let raw = czf(&eff);
        if raw.rank < eff.active_ues.len() {
            stats.skipped_rank_deficient += 1;
            continue;
        }
        let pre = normalize_power(&raw.w, p).unwrap();
        stats.channels += 1;

        let product: CMatrix = &eff.h_eff * &pre.w;
        let c = product[(0, 0)].re;
        for i in 0..k {
            for j in 0..k {
                let target = if i == j {
                    Complex::new(c, 0.0)
                } else {
                    Complex::new(0.0, 0.0)
                };
                let err = (product[(i, j)] - target).norm() / c;
                stats.worst_identity_error = stats.worst_identity_error.max(err);
            }
        }
        for n in 0..16 {
            let power: f64 = (0..k).map(|j| pre.w[(n, j)].norm_sqr()).sum();
            stats.worst_power_excess = stats.worst_power_excess.max(power / p - 1.0);
        }
    }
    stats
}
