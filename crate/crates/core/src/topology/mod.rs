//! Patch grids: qubit placement, mapping constraints, generators and CNOT routing.
//!
//! Orientation is fixed for every patch: Z-edges face the vertical neighbours
//! `(x, y±1)` and X-edges face the horizontal neighbours `(x±1, y)`.

mod generate;
mod route;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::Axis;
use crate::error::TopologyError;

pub use generate::{gen_dense, gen_random, gen_random_many, RandomTopologies, DEFAULT_ATTEMPT_BUDGET};
pub use route::{bfs_path, route_cnot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Spot {
    pub x: usize,
    pub y: usize,
}

impl Spot {
    pub const fn new(x: usize, y: usize) -> Self {
        Spot { x, y }
    }

    pub fn l1(&self, other: &Spot) -> usize {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

/// Spots order by `(y, x)`; every tie-break in the crate relies on this.
impl Ord for Spot {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Spot {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Spot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Dense set of spots on a fixed grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpotSet {
    width: usize,
    bits: Vec<bool>,
    len: usize,
}

impl SpotSet {
    pub fn new(width: usize, height: usize) -> Self {
        SpotSet {
            width,
            bits: vec![false; width * height],
            len: 0,
        }
    }

    fn idx(&self, s: Spot) -> usize {
        s.y * self.width + s.x
    }

    pub fn contains(&self, s: Spot) -> bool {
        self.bits.get(self.idx(s)).copied().unwrap_or(false)
    }

    /// Returns false when the spot was already present.
    pub fn insert(&mut self, s: Spot) -> bool {
        let i = self.idx(s);
        let was = std::mem::replace(&mut self.bits[i], true);
        if !was {
            self.len += 1;
        }
        !was
    }

    pub fn remove(&mut self, s: Spot) -> bool {
        let i = self.idx(s);
        let was = std::mem::replace(&mut self.bits[i], false);
        if was {
            self.len -= 1;
        }
        was
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Members in `(y, x)` order.
    pub fn iter(&self) -> impl Iterator<Item = Spot> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| Spot::new(i % w, i / w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OpenEdges {
    pub x: usize,
    pub z: usize,
}

impl OpenEdges {
    pub fn get(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.x,
            Axis::Z => self.z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "constraint", rename_all = "kebab-case")]
pub enum Violation {
    /// Constraint (i): the qubit lacks a free neighbour on some axis.
    OpenEdges { qubit: usize, axis: Axis },
    /// Constraint (ii): no free path from a Z-edge of `control` to an X-edge of `target`.
    CnotPath { control: usize, target: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A `width × height` grid with an injective qubit → spot placement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    width: usize,
    height: usize,
    placement: Vec<Spot>,
    occupant: Vec<Option<usize>>,
}

impl Topology {
    pub fn new(width: usize, height: usize, placement: Vec<Spot>) -> Result<Self, TopologyError> {
        if width == 0 || height == 0 {
            return Err(TopologyError::EmptyGrid { width, height });
        }
        let mut occupant = vec![None; width * height];
        for (q, &spot) in placement.iter().enumerate() {
            if spot.x >= width || spot.y >= height {
                return Err(TopologyError::OutOfGrid {
                    qubit: q,
                    spot,
                    width,
                    height,
                });
            }
            let cell = &mut occupant[spot.y * width + spot.x];
            if cell.is_some() {
                return Err(TopologyError::NotInjective { spot });
            }
            *cell = Some(q);
        }
        Ok(Topology {
            width,
            height,
            placement,
            occupant,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn n_qubits(&self) -> usize {
        self.placement.len()
    }

    pub fn placement(&self) -> &[Spot] {
        &self.placement
    }

    pub fn spot_of(&self, qubit: usize) -> Spot {
        self.placement[qubit]
    }

    pub fn qubit_at(&self, s: Spot) -> Option<usize> {
        self.occupant[s.y * self.width + s.x]
    }

    pub fn contains(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    fn offset(&self, s: Spot, dx: isize, dy: isize) -> Option<Spot> {
        let (x, y) = (s.x as isize + dx, s.y as isize + dy);
        self.contains(x, y).then(|| Spot::new(x as usize, y as usize))
    }

    /// In-grid L1 neighbours of a spot, in `(y, x)` order.
    pub fn grid_neighbors(&self, s: Spot) -> impl Iterator<Item = Spot> + '_ {
        [(0, -1), (-1, 0), (1, 0), (0, 1)]
            .into_iter()
            .filter_map(move |(dx, dy)| self.offset(s, dx, dy))
    }

    /// Spots facing the qubit's Z-edges: `(x, y-1)` then `(x, y+1)`.
    pub fn neighbors_z(&self, qubit: usize) -> Vec<Spot> {
        let s = self.spot_of(qubit);
        [(0, -1), (0, 1)]
            .into_iter()
            .filter_map(|(dx, dy)| self.offset(s, dx, dy))
            .collect()
    }

    /// Spots facing the qubit's X-edges: `(x-1, y)` then `(x+1, y)`.
    pub fn neighbors_x(&self, qubit: usize) -> Vec<Spot> {
        let s = self.spot_of(qubit);
        [(-1, 0), (1, 0)]
            .into_iter()
            .filter_map(|(dx, dy)| self.offset(s, dx, dy))
            .collect()
    }

    pub fn axis_neighbors(&self, qubit: usize, axis: Axis) -> Vec<Spot> {
        match axis {
            Axis::X => self.neighbors_x(qubit),
            Axis::Z => self.neighbors_z(qubit),
        }
    }

    pub fn is_free(&self, s: Spot) -> bool {
        self.qubit_at(s).is_none()
    }

    /// Spots not holding a data qubit.
    pub fn free_spots(&self) -> SpotSet {
        let mut set = SpotSet::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let s = Spot::new(x, y);
                if self.is_free(s) {
                    set.insert(s);
                }
            }
        }
        set
    }

    pub fn empty_spot_set(&self) -> SpotSet {
        SpotSet::new(self.width, self.height)
    }

    pub fn open_edges(&self, qubit: usize) -> OpenEdges {
        let count = |v: Vec<Spot>| v.into_iter().filter(|&s| self.is_free(s)).count();
        OpenEdges {
            x: count(self.neighbors_x(qubit)),
            z: count(self.neighbors_z(qubit)),
        }
    }

    /// Checks constraint (i) for every qubit and constraint (ii) for every ordered pair.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for q in 0..self.n_qubits() {
            let e = self.open_edges(q);
            if e.x == 0 {
                violations.push(Violation::OpenEdges {
                    qubit: q,
                    axis: Axis::X,
                });
            }
            if e.z == 0 {
                violations.push(Violation::OpenEdges {
                    qubit: q,
                    axis: Axis::Z,
                });
            }
        }

        // label connected components of free spots
        let mut label = vec![usize::MAX; self.width * self.height];
        let mut next = 0;
        for start in self.free_spots().iter() {
            let si = start.y * self.width + start.x;
            if label[si] != usize::MAX {
                continue;
            }
            label[si] = next;
            let mut stack = vec![start];
            while let Some(s) = stack.pop() {
                for n in self.grid_neighbors(s) {
                    let ni = n.y * self.width + n.x;
                    if self.is_free(n) && label[ni] == usize::MAX {
                        label[ni] = next;
                        stack.push(n);
                    }
                }
            }
            next += 1;
        }
        let comps = |spots: Vec<Spot>| -> Vec<usize> {
            let mut c: Vec<usize> = spots
                .into_iter()
                .filter(|&s| self.is_free(s))
                .map(|s| label[s.y * self.width + s.x])
                .collect();
            c.sort_unstable();
            c.dedup();
            c
        };
        let z_comps: Vec<Vec<usize>> = (0..self.n_qubits()).map(|q| comps(self.neighbors_z(q))).collect();
        let x_comps: Vec<Vec<usize>> = (0..self.n_qubits()).map(|q| comps(self.neighbors_x(q))).collect();
        for c in 0..self.n_qubits() {
            for t in 0..self.n_qubits() {
                if c != t && !z_comps[c].iter().any(|k| x_comps[t].contains(k)) {
                    violations.push(Violation::CnotPath { control: c, target: t });
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(TopologyDoc::from(self)).expect("topology serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&TopologyDoc::from(self)).expect("topology serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TopologyJsonError> {
        let doc: TopologyDoc = serde_json::from_str(text)?;
        Ok(doc.into_topology()?)
    }

    /// ASCII rendering, top row first: `#` data qubit, `.` free spot.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for y in (0..self.height).rev() {
            for x in 0..self.width {
                out.push(if self.is_free(Spot::new(x, y)) { '.' } else { '#' });
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TopologyJsonError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QubitDoc {
    pub id: usize,
    pub x: usize,
    pub y: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopologyDoc {
    pub width: usize,
    pub height: usize,
    pub qubits: Vec<QubitDoc>,
}

impl From<&Topology> for TopologyDoc {
    fn from(t: &Topology) -> Self {
        TopologyDoc {
            width: t.width,
            height: t.height,
            qubits: t
                .placement
                .iter()
                .enumerate()
                .map(|(id, s)| QubitDoc { id, x: s.x, y: s.y })
                .collect(),
        }
    }
}

impl TopologyDoc {
    pub fn into_topology(mut self) -> Result<Topology, TopologyError> {
        self.qubits.sort_by_key(|q| q.id);
        let expected = self.qubits.len();
        if self.qubits.iter().enumerate().any(|(i, q)| q.id != i) {
            return Err(TopologyError::BadQubitIds { expected });
        }
        let placement = self.qubits.iter().map(|q| Spot::new(q.x, q.y)).collect();
        Topology::new(self.width, self.height, placement)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn topo(w: usize, h: usize, spots: &[(usize, usize)]) -> Topology {
        Topology::new(w, h, spots.iter().map(|&(x, y)| Spot::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn spot_order_is_row_major() {
        let mut v = vec![Spot::new(2, 0), Spot::new(0, 1), Spot::new(1, 0)];
        v.sort();
        assert_eq!(v, vec![Spot::new(1, 0), Spot::new(2, 0), Spot::new(0, 1)]);
    }

    #[test]
    fn neighbors_clip_at_boundaries() {
        let t = topo(3, 3, &[(0, 0), (1, 1), (2, 2)]);
        assert_eq!(t.neighbors_z(0), vec![Spot::new(0, 1)]);
        assert_eq!(t.neighbors_x(0), vec![Spot::new(1, 0)]);
        assert_eq!(t.neighbors_z(1), vec![Spot::new(1, 0), Spot::new(1, 2)]);
        assert_eq!(t.neighbors_x(1), vec![Spot::new(0, 1), Spot::new(2, 1)]);
        assert_eq!(t.neighbors_z(2), vec![Spot::new(2, 1)]);
        assert_eq!(t.neighbors_x(2), vec![Spot::new(1, 2)]);
    }

    #[test]
    fn open_edge_counts() {
        let t = topo(5, 5, &[(2, 2)]);
        assert_eq!(t.open_edges(0), OpenEdges { x: 2, z: 2 });
        let t = topo(5, 5, &[(1, 2), (2, 2)]);
        assert_eq!(t.open_edges(0).x, 1);
        assert_eq!(t.open_edges(1).x, 1);
        assert_eq!(t.open_edges(0).z, 2);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            Topology::new(2, 2, vec![Spot::new(2, 0)]),
            Err(TopologyError::OutOfGrid { .. })
        ));
        assert!(matches!(
            Topology::new(2, 2, vec![Spot::new(1, 0), Spot::new(1, 0)]),
            Err(TopologyError::NotInjective { .. })
        ));
        assert!(matches!(
            Topology::new(0, 2, vec![]),
            Err(TopologyError::EmptyGrid { .. })
        ));
    }

    #[test]
    fn packed_grid_violates_open_edges_everywhere() {
        let spots: Vec<(usize, usize)> = (0..2).flat_map(|y| (0..2).map(move |x| (x, y))).collect();
        let t = topo(2, 2, &spots);
        let r = t.validate();
        for q in 0..4 {
            assert!(r.violations.contains(&Violation::OpenEdges { qubit: q, axis: Axis::X }));
            assert!(r.violations.contains(&Violation::OpenEdges { qubit: q, axis: Axis::Z }));
        }
    }

    #[test]
    fn opposite_corners_are_valid() {
        let t = topo(3, 3, &[(0, 0), (2, 2)]);
        assert!(t.validate().is_valid());
    }

    #[test]
    fn split_free_region_violates_paths() {
        // a wall of qubits in the middle column separates the free spots
        let t = topo(3, 3, &[(1, 0), (1, 1), (1, 2)]);
        let r = t.validate();
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, Violation::CnotPath { .. })));
    }

    #[test]
    fn json_shape_and_roundtrip() {
        let t = topo(3, 2, &[(0, 0), (2, 1)]);
        let text = t.to_json();
        assert!(text.find("\"width\"").unwrap() < text.find("\"height\"").unwrap());
        assert_eq!(Topology::from_json(&text).unwrap(), t);
        let v = t.to_json_value();
        assert_eq!(v["qubits"][1]["x"], 2);
        let bad = r#"{"width":3,"height":3,"qubits":[{"id":1,"x":0,"y":0}]}"#;
        assert!(Topology::from_json(bad).is_err());
    }

    #[test]
    fn spot_set_basics() {
        let mut s = SpotSet::new(3, 3);
        assert!(s.insert(Spot::new(2, 1)));
        assert!(!s.insert(Spot::new(2, 1)));
        s.insert(Spot::new(0, 2));
        assert_eq!(s.len(), 2);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![Spot::new(2, 1), Spot::new(0, 2)]);
        assert!(s.remove(Spot::new(2, 1)));
        assert!(!s.contains(Spot::new(2, 1)));
    }
}
