//! Initial UE-centric serving subsets and ARU designation.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::association::AssociationMatrix;
use crate::error::{Error, Result};
use crate::topology::{FronthaulTopology, NodeId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServingSubset {
    pub ue_id: usize,
    /// Serving RUs, strongest large-scale gain first.
    pub ru_ids: Vec<NodeId>,
    pub aru_id: NodeId,
}

impl ServingSubset {
    /// Serving RUs other than the ARU, in subset order.
    pub fn secondary_rus(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ru_ids
            .iter()
            .copied()
            .filter(move |&r| r != self.aru_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SubsetRule {
    TopM { m: usize },
    Alpha { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AruCriterion {
    #[default]
    StrongestGain,
    ClosestToDu,
}

/// RU ids of one UE's row sorted by descending gain, ties by ascending id.
fn ranked(row: impl Iterator<Item = f64>) -> Vec<(NodeId, f64)> {
    let mut v: Vec<(NodeId, f64)> = row.enumerate().collect();
    v.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    v
}

/// For each UE, the `m` RUs with the largest large-scale coefficient.
pub fn select_top_m(large_scale: &DMatrix<f64>, m: usize) -> Result<Vec<ServingSubset>> {
    let n = large_scale.ncols();
    if m > n {
        return Err(Error::SubsetTooLarge { m, n });
    }
    if m == 0 {
        return Err(Error::NonPositive {
            field: "m",
            value: 0,
        });
    }
    Ok(large_scale
        .row_iter()
        .enumerate()
        .map(|(ue_id, row)| {
            let ru_ids: Vec<NodeId> = ranked(row.iter().copied())
                .into_iter()
                .take(m)
                .map(|(id, _)| id)
                .collect();
            ServingSubset {
                ue_id,
                aru_id: ru_ids[0],
                ru_ids,
            }
        })
        .collect())
}

/// For each UE, the shortest prefix of RUs (strongest first) whose share of
/// the UE's total large-scale gain reaches `alpha`.
pub fn select_alpha(large_scale: &DMatrix<f64>, alpha: f64) -> Result<Vec<ServingSubset>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidConfig {
            field: "alpha",
            reason: format!("must lie in (0, 1], got {alpha}"),
        });
    }
    let mut out = Vec::with_capacity(large_scale.nrows());
    for (ue_id, row) in large_scale.row_iter().enumerate() {
        let order = ranked(row.iter().copied());
        let total: f64 = order.iter().map(|&(_, g)| g).sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::EmptySubset);
        }
        let mut acc = 0.0;
        let mut ru_ids = Vec::new();
        for (id, g) in order {
            if g <= 0.0 {
                break;
            }
            acc += g;
            ru_ids.push(id);
            if acc / total >= alpha {
                break;
            }
        }
        out.push(ServingSubset {
            ue_id,
            aru_id: ru_ids[0],
            ru_ids,
        });
    }
    Ok(out)
}

pub fn select_subsets(large_scale: &DMatrix<f64>, rule: SubsetRule) -> Result<Vec<ServingSubset>> {
    match rule {
        SubsetRule::TopM { m } => select_top_m(large_scale, m),
        SubsetRule::Alpha { alpha } => select_alpha(large_scale, alpha),
    }
}

/// Strongest member of `ru_ids` for this UE's gain row; ties go to the lowest id.
pub fn select_aru(ru_ids: &[NodeId], gains: &[f64]) -> Result<NodeId> {
    ru_ids
        .iter()
        .copied()
        .max_by(|&a, &b| {
            gains[a]
                .partial_cmp(&gains[b])
                .unwrap_or(Ordering::Equal)
                .then(b.cmp(&a))
        })
        .ok_or(Error::EmptySubset)
}

/// Re-designates every subset's ARU according to `criterion`.
///
/// `ClosestToDu` picks the member with the fewest hops to the DU, breaking ties
/// by stronger gain and then by lower id.
pub fn assign_arus(
    subsets: &mut [ServingSubset],
    criterion: AruCriterion,
    large_scale: &DMatrix<f64>,
    topology: &FronthaulTopology,
) -> Result<()> {
    let hops = match criterion {
        AruCriterion::ClosestToDu => Some(topology.hop_distances(topology.du())?),
        AruCriterion::StrongestGain => None,
    };
    for s in subsets.iter_mut() {
        let gains: Vec<f64> = large_scale.row(s.ue_id).iter().copied().collect();
        s.aru_id = match &hops {
            None => select_aru(&s.ru_ids, &gains)?,
            Some(hops) => s
                .ru_ids
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    hops[a]
                        .unwrap_or(usize::MAX)
                        .cmp(&hops[b].unwrap_or(usize::MAX))
                        .then(gains[b].partial_cmp(&gains[a]).unwrap_or(Ordering::Equal))
                        .then(a.cmp(&b))
                })
                .ok_or(Error::EmptySubset)?,
        };
    }
    Ok(())
}

/// Binary K × N matrix with row `k` marking UE `k`'s serving RUs.
pub fn to_association(
    subsets: &[ServingSubset],
    ue_count: usize,
    ru_count: usize,
) -> Result<AssociationMatrix> {
    let mut a = AssociationMatrix::empty(ue_count, ru_count);
    for s in subsets {
        if s.ue_id >= ue_count {
            return Err(Error::Shape(format!(
                "UE {} outside K = {ue_count}",
                s.ue_id
            )));
        }
        for &ru in &s.ru_ids {
            if ru >= ru_count {
                return Err(Error::Shape(format!("RU {ru} outside N = {ru_count}")));
            }
            a.set(s.ue_id, ru, true);
        }
        if !s.ru_ids.is_empty() {
            a.aru[s.ue_id] = Some(s.aru_id);
        }
    }
    Ok(a)
}
