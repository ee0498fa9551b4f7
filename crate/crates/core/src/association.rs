//! RU–UE association matrix and its update from routing outcomes.
//!
//! Rows are UEs and columns are RUs: `get(k, n)` is true when RU `n` serves UE `k`.

use crate::error::{Error, Result};
use crate::routing::UeRouting;
use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationMatrix {
    ue_count: usize,
    ru_count: usize,
    bits: Vec<bool>,
    pub aru: Vec<Option<NodeId>>,
    pub dropped: Vec<bool>,
}

impl AssociationMatrix {
    pub fn empty(ue_count: usize, ru_count: usize) -> Self {
        Self {
            ue_count,
            ru_count,
            bits: vec![false; ue_count * ru_count],
            aru: vec![None; ue_count],
            dropped: vec![false; ue_count],
        }
    }

    pub fn ue_count(&self) -> usize {
        self.ue_count
    }

    pub fn ru_count(&self) -> usize {
        self.ru_count
    }

    pub fn get(&self, ue: usize, ru: NodeId) -> bool {
        self.bits[ue * self.ru_count + ru]
    }

    pub fn set(&mut self, ue: usize, ru: NodeId, on: bool) {
        self.bits[ue * self.ru_count + ru] = on;
    }

    pub fn row(&self, ue: usize) -> &[bool] {
        &self.bits[ue * self.ru_count..(ue + 1) * self.ru_count]
    }

    /// Number of RUs serving `ue`.
    pub fn row_count(&self, ue: usize) -> usize {
        self.row(ue).iter().filter(|&&b| b).count()
    }

    pub fn serving_rus(&self, ue: usize) -> impl Iterator<Item = NodeId> + '_ {
        self.row(ue)
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(n, _)| n)
    }

    /// UEs that are not dropped and have at least one serving RU.
    pub fn active_ues(&self) -> Vec<usize> {
        (0..self.ue_count)
            .filter(|&k| !self.dropped[k] && self.row_count(k) > 0)
            .collect()
    }

    /// Total number of set bits.
    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// True if every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &AssociationMatrix) -> bool {
        self.bits.len() == other.bits.len()
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}

/// Clears every association whose route failed. A UE whose DU → ARU route
/// failed loses its whole row and is marked dropped.
pub fn apply_routing_outcomes(
    initial: &AssociationMatrix,
    routing: &[UeRouting],
) -> Result<AssociationMatrix> {
    let mut out = initial.clone();
    for k in 0..initial.ue_count() {
        if initial.row_count(k) == 0 {
            continue;
        }
        let r = routing
            .iter()
            .find(|r| r.ue_id == k)
            .ok_or(Error::MissingDecision {
                ue: k,
                ru: initial.aru[k].unwrap_or(0),
            })?;
        if !r.l1.succeeded() {
            for n in 0..initial.ru_count() {
                out.set(k, n, false);
            }
            out.dropped[k] = true;
            continue;
        }
        for n in initial.serving_rus(k) {
            let decision = r
                .decision_for(n)
                .ok_or(Error::MissingDecision { ue: k, ru: n })?;
            if !decision.succeeded() {
                out.set(k, n, false);
            }
        }
    }
    Ok(out)
}

/// Surviving serving RUs of `ue` over its initial subset size.
pub fn connection_ratio(
    initial: &AssociationMatrix,
    updated: &AssociationMatrix,
    ue: usize,
) -> f64 {
    let m = initial.row_count(ue);
    if m == 0 {
        return 0.0;
    }
    updated.row_count(ue) as f64 / m as f64
}
