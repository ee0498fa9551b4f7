//! Segmented fronthaul mesh: RUs on a regular grid, one segment between each
//! pair of grid neighbours, and a DU hanging off one corner RU.
//!
//! Node ids `0..N` are RUs in row-major order; the DU is node `N`.
//! Segment ids are assigned to horizontal links row by row, then to vertical
//! links column by column, and the DU attachment segment comes last. Routing
//! tie-breaks depend on these ids, so the order is part of the contract.

use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type SegmentId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuNode {
    pub id: NodeId,
    pub position: Point,
    pub antenna_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub id: SegmentId,
    /// Endpoints with `endpoints.0 < endpoints.1`.
    pub endpoints: (NodeId, NodeId),
    pub total_capacity: u32,
}

impl Segment {
    pub fn touches(&self, node: NodeId) -> bool {
        self.endpoints.0 == node || self.endpoints.1 == node
    }

    /// The endpoint that is not `node`. `node` must be an endpoint.
    pub fn other_end(&self, node: NodeId) -> NodeId {
        if self.endpoints.0 == node {
            self.endpoints.1
        } else {
            debug_assert_eq!(self.endpoints.1, node);
            self.endpoints.0
        }
    }
}

/// Grid corner the DU is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuCorner {
    #[default]
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
}

#[derive(Debug, Clone)]
pub struct FronthaulTopology {
    rows: usize,
    cols: usize,
    spacing: f64,
    nodes: Vec<RuNode>,
    du_position: Point,
    du_attachment: NodeId,
    segments: Vec<Segment>,
    adjacency: Vec<Vec<SegmentId>>,
}

/// Builds a `rows × cols` RU grid with `spacing` metres between neighbours.
///
/// RUs sit at cell centres, so the grid covers `[0, cols·spacing] × [0, rows·spacing]`.
/// The DU attaches to the RU at `du_corner` through one dedicated segment. That
/// segment and every inter-RU segment incident to the attachment RU carry
/// `base_capacity · du_corner_multiplier`; all others carry `base_capacity`.
pub fn build_grid(
    rows: usize,
    cols: usize,
    spacing: f64,
    base_capacity: u32,
    du_corner_multiplier: u32,
    du_corner: DuCorner,
) -> Result<FronthaulTopology> {
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyGrid { rows, cols });
    }
    if base_capacity == 0 {
        return Err(Error::NonPositive {
            field: "base_capacity",
            value: 0,
        });
    }
    if du_corner_multiplier == 0 {
        return Err(Error::NonPositive {
            field: "du_corner_multiplier",
            value: 0,
        });
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::InvalidConfig {
            field: "spacing",
            reason: format!("must be a positive length, got {spacing}"),
        });
    }

    let ru_id = |r: usize, c: usize| r * cols + c;
    let nodes: Vec<RuNode> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| RuNode {
            id: ru_id(r, c),
            position: Point::new((c as f64 + 0.5) * spacing, (r as f64 + 0.5) * spacing),
            antenna_count: 1,
        })
        .collect();

    let (att_r, att_c) = match du_corner {
        DuCorner::TopLeft => (0, 0),
        DuCorner::TopRight => (0, cols - 1),
        DuCorner::BottomLeft => (rows - 1, 0),
        DuCorner::BottomRight => (rows - 1, cols - 1),
    };
    let du_attachment = ru_id(att_r, att_c);
    let du_position = Point::new(
        if att_c == 0 {
            0.0
        } else {
            cols as f64 * spacing
        },
        if att_r == 0 {
            0.0
        } else {
            rows as f64 * spacing
        },
    );
    let du = nodes.len();
    let boosted = base_capacity * du_corner_multiplier;

    let mut pairs = Vec::with_capacity(rows * (cols - 1) + cols * (rows - 1) + 1);
    for r in 0..rows {
        for c in 0..cols - 1 {
            pairs.push((ru_id(r, c), ru_id(r, c + 1)));
        }
    }
    for c in 0..cols {
        for r in 0..rows - 1 {
            pairs.push((ru_id(r, c), ru_id(r + 1, c)));
        }
    }
    pairs.push((du_attachment, du));

    let segments: Vec<Segment> = pairs
        .into_iter()
        .enumerate()
        .map(|(id, (a, b))| {
            let endpoints = (a.min(b), a.max(b));
            let corner = endpoints.0 == du_attachment || endpoints.1 == du_attachment;
            Segment {
                id,
                endpoints,
                total_capacity: if corner { boosted } else { base_capacity },
            }
        })
        .collect();

    let mut adjacency = vec![Vec::new(); du + 1];
    for s in &segments {
        adjacency[s.endpoints.0].push(s.id);
        adjacency[s.endpoints.1].push(s.id);
    }

    Ok(FronthaulTopology {
        rows,
        cols,
        spacing,
        nodes,
        du_position,
        du_attachment,
        segments,
        adjacency,
    })
}

impl FronthaulTopology {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn ru_count(&self) -> usize {
        self.nodes.len()
    }

    /// RUs plus the DU.
    pub fn node_count(&self) -> usize {
        self.nodes.len() + 1
    }

    pub fn du(&self) -> NodeId {
        self.nodes.len()
    }

    pub fn du_position(&self) -> Point {
        self.du_position
    }

    /// RU the DU is attached to.
    pub fn du_attachment(&self) -> NodeId {
        self.du_attachment
    }

    pub fn rus(&self) -> &[RuNode] {
        &self.nodes
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, id: SegmentId) -> &Segment {
        &self.segments[id]
    }

    /// Segments whose endpoint set contains `node`, ascending by id.
    pub fn incident_segments(&self, node: NodeId) -> Result<&[SegmentId]> {
        self.adjacency
            .get(node)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownNode(node))
    }

    /// Hop distance from `from` to every node; `None` for unreachable nodes.
    pub fn hop_distances(&self, from: NodeId) -> Result<Vec<Option<usize>>> {
        if from >= self.node_count() {
            return Err(Error::UnknownNode(from));
        }
        let mut dist = vec![None; self.node_count()];
        dist[from] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &s in &self.adjacency[u] {
                let v = self.segments[s].other_end(u);
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    /// Writes one `id,endpoint_a,endpoint_b,capacity` record per segment.
    /// The DU appears as `DU`.
    pub fn write_segment_table<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "id,endpoint_a,endpoint_b,capacity")?;
        let name = |n: NodeId| {
            if n == self.du() {
                "DU".to_string()
            } else {
                n.to_string()
            }
        };
        for s in &self.segments {
            writeln!(
                out,
                "{},{},{},{}",
                s.id,
                name(s.endpoints.0),
                name(s.endpoints.1),
                s.total_capacity
            )?;
        }
        Ok(())
    }
}
