//! Two-stage QUBO for placing parallel resource-state creation trials.
//!
//! Stage one puts variables on the free axis-neighbours of every qubit that wants a
//! resource state and minimises `f = f1 + A·f2 + B·f3`. Stage two grows the chosen
//! spots of not-yet-served rotations by one step and minimises `g = g1 + A·g2`.

mod solver;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::circuit::Axis;
use crate::scalar::Scalar;
use crate::topology::{Spot, SpotSet, Topology};

pub use solver::{anneal, repair, solve, solve_exhaustive, AnnealParams, EXACT_LIMIT};

pub const DEFAULT_A: f64 = 4.0;
pub const DEFAULT_B: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuboVar {
    pub id: usize,
    pub qubit: usize,
    pub spot: Spot,
    pub stage: Stage,
}

/// A qubit asking for a resource state measured through its `axis` edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Request {
    pub qubit: usize,
    pub axis: Axis,
}

/// Quadratic pseudo-boolean polynomial `offset + Σ linear·x + Σ quadratic·x·x`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboProblem<T> {
    pub vars: Vec<QuboVar>,
    pub linear: Vec<T>,
    /// Keyed by `(i, j)` with `i < j`.
    pub quadratic: BTreeMap<(usize, usize), T>,
    pub offset: T,
    pub a: T,
    pub b: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<T> {
    pub valuation: Vec<bool>,
    pub objective: T,
}

impl<T: Scalar> Assignment<T> {
    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.valuation.iter().enumerate().filter(|(_, &v)| v).map(|(i, _)| i)
    }
}

impl<T: Scalar> QuboProblem<T> {
    pub fn empty(a: T, b: T) -> Self {
        QuboProblem {
            vars: Vec::new(),
            linear: Vec::new(),
            quadratic: BTreeMap::new(),
            offset: T::zero(),
            a,
            b,
        }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    fn push_var(&mut self, qubit: usize, spot: Spot, stage: Stage) -> usize {
        let id = self.vars.len();
        self.vars.push(QuboVar {
            id,
            qubit,
            spot,
            stage,
        });
        self.linear.push(T::zero());
        id
    }

    pub fn add_quadratic(&mut self, i: usize, j: usize, c: T) {
        assert_ne!(i, j, "quadratic term needs two distinct variables");
        let key = (i.min(j), i.max(j));
        let e = self.quadratic.entry(key).or_insert_with(T::zero);
        *e = *e + c;
    }

    pub fn evaluate(&self, valuation: &[bool]) -> T {
        assert_eq!(valuation.len(), self.vars.len());
        let mut e = self.offset;
        for (i, &on) in valuation.iter().enumerate() {
            if on {
                e = e + self.linear[i];
            }
        }
        for (&(i, j), &c) in &self.quadratic {
            if valuation[i] && valuation[j] {
                e = e + c;
            }
        }
        e
    }

    /// Penalises every pair of variables sharing a spot with `weight`.
    fn add_spot_penalties(&mut self, weight: T) {
        let mut by_spot: BTreeMap<Spot, Vec<usize>> = BTreeMap::new();
        for v in &self.vars {
            by_spot.entry(v.spot).or_default().push(v.id);
        }
        for ids in by_spot.values().filter(|ids| ids.len() >= 2) {
            for (k, &i) in ids.iter().enumerate() {
                for &j in &ids[k + 1..] {
                    self.add_quadratic(i, j, weight);
                }
            }
        }
    }

    /// Pairs of selected variables that share a spot.
    pub fn conflicts(&self, valuation: &[bool]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, vi) in self.vars.iter().enumerate() {
            if !valuation[i] {
                continue;
            }
            for (j, vj) in self.vars.iter().enumerate().skip(i + 1) {
                if valuation[j] && vi.spot == vj.spot {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let quadratic: Vec<_> = self
            .quadratic
            .iter()
            .map(|(&(i, j), c)| serde_json::json!({ "i": i, "j": j, "coeff": c.to_f64_lossy() }))
            .collect();
        serde_json::json!({
            "vars": self.vars.iter().map(|v| serde_json::json!({
                "var_id": v.id,
                "qubit": v.qubit,
                "spot": [v.spot.x, v.spot.y],
                "stage": v.stage,
            })).collect::<Vec<_>>(),
            "linear": self.linear.iter().map(|c| c.to_f64_lossy()).collect::<Vec<_>>(),
            "quadratic": quadratic,
            "offset": self.offset.to_f64_lossy(),
            "a": self.a.to_f64_lossy(),
            "b": self.b.to_f64_lossy(),
        })
    }
}

/// First-stage problem. Variables follow X-axis requests before Z-axis ones, each
/// group in ascending qubit order, and each qubit's spots in `(y, x)` order.
pub fn build_first_stage<T: Scalar>(
    requests: &[Request],
    topo: &Topology,
    free: &SpotSet,
    a: T,
    b: T,
) -> QuboProblem<T> {
    let mut order: Vec<Request> = requests.to_vec();
    order.sort_by_key(|r| (r.axis, r.qubit));
    let mut p = QuboProblem::empty(a, b);
    for r in &order {
        let mut spots: Vec<Spot> = topo
            .axis_neighbors(r.qubit, r.axis)
            .into_iter()
            .filter(|&s| free.contains(s))
            .collect();
        spots.sort();
        let ids: Vec<usize> = spots
            .into_iter()
            .map(|s| p.push_var(r.qubit, s, Stage::First))
            .collect();
        // f1
        for &i in &ids {
            p.linear[i] = p.linear[i] - T::one();
        }
        // B·f3 with Π(1 - b) expanded; a qubit has at most two axis neighbours
        p.offset = p.offset + b;
        for &i in &ids {
            p.linear[i] = p.linear[i] - b;
        }
        match ids.as_slice() {
            [] | [_] => {}
            [i, j] => p.add_quadratic(*i, *j, b),
            _ => unreachable!("a qubit has at most two neighbours per axis"),
        }
    }
    p.add_spot_penalties(a);
    p
}

/// Second-stage problem over spots one step away from each request's chosen
/// first-stage spots. Spots already chosen in the first stage are not offered again.
pub fn build_second_stage<T: Scalar>(
    requests: &[Request],
    topo: &Topology,
    free: &SpotSet,
    first: &QuboProblem<T>,
    first_assignment: &Assignment<T>,
) -> QuboProblem<T> {
    let taken: Vec<Spot> = first_assignment
        .selected()
        .map(|i| first.vars[i].spot)
        .collect();
    let mut order: Vec<Request> = requests.to_vec();
    order.sort_by_key(|r| (r.axis, r.qubit));
    let mut p = QuboProblem::empty(first.a, first.b);
    for r in &order {
        let mut spots: Vec<Spot> = Vec::new();
        for i in first_assignment.selected() {
            let v = &first.vars[i];
            if v.qubit != r.qubit {
                continue;
            }
            for s in topo.grid_neighbors(v.spot) {
                if free.contains(s) && !taken.contains(&s) && !spots.contains(&s) {
                    spots.push(s);
                }
            }
        }
        spots.sort();
        for s in spots {
            let id = p.push_var(r.qubit, s, Stage::Second);
            p.linear[id] = -T::one();
        }
    }
    let a = p.a;
    p.add_spot_penalties(a);
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn topo(w: usize, h: usize, spots: &[(usize, usize)]) -> Topology {
        Topology::new(w, h, spots.iter().map(|&(x, y)| Spot::new(x, y)).collect()).unwrap()
    }

    fn brute_min(p: &QuboProblem<f64>) -> f64 {
        let n = p.len();
        (0..1u32 << n)
            .map(|m| {
                let v: Vec<bool> = (0..n).map(|i| m >> i & 1 == 1).collect();
                p.evaluate(&v)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn single_rz_both_neighbours() {
        let t = topo(3, 3, &[(1, 1)]);
        let free = t.free_spots();
        let p = build_first_stage::<f64>(&[Request { qubit: 0, axis: Axis::Z }], &t, &free, 4.0, 2.0);
        assert_eq!(p.len(), 2);
        assert_eq!(p.vars[0].spot, Spot::new(1, 0));
        assert_eq!(p.vars[1].spot, Spot::new(1, 2));
        // f3 contributes 2·(1-b0)(1-b1); all four valuations by hand
        assert_eq!(p.evaluate(&[false, false]), 2.0);
        assert_eq!(p.evaluate(&[true, false]), -1.0);
        assert_eq!(p.evaluate(&[false, true]), -1.0);
        assert_eq!(p.evaluate(&[true, true]), -2.0);
        let s = solve(&p, 0);
        assert_eq!(s.valuation, vec![true, true]);
        assert_eq!(s.objective, -2.0);
    }

    #[test]
    fn empty_request_list() {
        let t = topo(3, 3, &[(1, 1)]);
        let p = build_first_stage::<f64>(&[], &t, &t.free_spots(), 4.0, 2.0);
        assert!(p.is_empty());
        assert_eq!(p.evaluate(&[]), 0.0);
        let s = solve(&p, 3);
        assert!(s.valuation.is_empty());
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn shared_only_spot_goes_to_one_qubit() {
        // q0 at (0,0) and q1 at (0,2): their only Z-neighbour is (0,1)
        let t = topo(1, 3, &[(0, 0), (0, 2)]);
        let reqs = [
            Request { qubit: 0, axis: Axis::Z },
            Request { qubit: 1, axis: Axis::Z },
        ];
        let p = build_first_stage::<f64>(&reqs, &t, &t.free_spots(), 4.0, 2.0);
        assert_eq!(p.len(), 2);
        assert_eq!(p.quadratic.get(&(0, 1)), Some(&4.0));
        let s = solve(&p, 0);
        assert_eq!(s.selected().count(), 1);
        assert_eq!(s.objective, brute_min(&p));
        // lexicographic tie-break keeps the later variable, (false, true) < (true, false)
        assert_eq!(s.valuation, vec![false, true]);
    }

    #[test]
    fn x_requests_come_first() {
        let t = topo(5, 5, &[(1, 1), (3, 3)]);
        let reqs = [
            Request { qubit: 0, axis: Axis::Z },
            Request { qubit: 1, axis: Axis::X },
        ];
        let p = build_first_stage::<f64>(&reqs, &t, &t.free_spots(), 4.0, 2.0);
        let order: Vec<(usize, Spot)> = p.vars.iter().map(|v| (v.qubit, v.spot)).collect();
        assert_eq!(
            order,
            vec![
                (1, Spot::new(2, 3)),
                (1, Spot::new(4, 3)),
                (0, Spot::new(1, 0)),
                (0, Spot::new(1, 2)),
            ]
        );
    }

    #[test]
    fn zero_candidates_is_a_constant() {
        let t = topo(1, 2, &[(0, 0), (0, 1)]);
        let p = build_first_stage::<f64>(&[Request { qubit: 0, axis: Axis::Z }], &t, &t.free_spots(), 4.0, 2.0);
        assert!(p.is_empty());
        assert_eq!(p.offset, 2.0);
    }

    #[test]
    fn second_stage_ring() {
        // q0 at (0,1) on a 3×3 grid; first stage picks (0,0) and (0,2)
        let t = topo(3, 3, &[(0, 1)]);
        let free = t.free_spots();
        let reqs = [Request { qubit: 0, axis: Axis::Z }];
        let p1 = build_first_stage::<f64>(&reqs, &t, &free, 4.0, 2.0);
        let a1 = solve(&p1, 0);
        assert_eq!(a1.selected().count(), 2);
        let p2 = build_second_stage(&reqs, &t, &free, &p1, &a1);
        let spots: Vec<Spot> = p2.vars.iter().map(|v| v.spot).collect();
        assert_eq!(spots, vec![Spot::new(1, 0), Spot::new(1, 2)]);
        assert!(p2.vars.iter().all(|v| v.stage == Stage::Second));
        let a2 = solve(&p2, 0);
        assert_eq!(a2.objective, -2.0);
    }

    #[test]
    fn second_stage_three_neighbours() {
        // q0 at (2,1), first-stage spot (2,0) blocked on one side by the grid edge only
        let t = topo(5, 3, &[(2, 1), (2, 2)]);
        let mut free = t.free_spots();
        let reqs = [Request { qubit: 0, axis: Axis::Z }];
        let p1 = build_first_stage::<f64>(&reqs, &t, &free, 4.0, 2.0);
        assert_eq!(p1.len(), 1);
        let a1 = solve(&p1, 0);
        // (2,0) has free neighbours (1,0) and (3,0); add a third by extending the grid
        let p2 = build_second_stage(&reqs, &t, &free, &p1, &a1);
        assert_eq!(p2.len(), 2);
        let t = topo(5, 4, &[(2, 2), (2, 3)]);
        free = t.free_spots();
        let p1 = build_first_stage::<f64>(&reqs, &t, &free, 4.0, 2.0);
        let a1 = solve(&p1, 0);
        assert_eq!(p1.vars[0].spot, Spot::new(2, 1));
        let p2 = build_second_stage(&reqs, &t, &free, &p1, &a1);
        assert_eq!(p2.len(), 3);
        let a2 = solve(&p2, 0);
        assert_eq!(a2.selected().count(), 3);
        assert_eq!(a2.objective, -3.0);
    }

    #[test]
    fn second_stage_overlap_is_exclusive() {
        // q0 at (0,1) and q1 at (2,1) on 3×3: chosen spots (0,0),(0,2),(2,0),(2,2)
        // share the expansion spots (1,0) and (1,2)
        let t = topo(3, 3, &[(0, 1), (2, 1)]);
        let free = t.free_spots();
        let reqs = [
            Request { qubit: 0, axis: Axis::Z },
            Request { qubit: 1, axis: Axis::Z },
        ];
        let p1 = build_first_stage::<f64>(&reqs, &t, &free, 4.0, 2.0);
        let a1 = solve(&p1, 0);
        assert_eq!(a1.selected().count(), 4);
        let p2 = build_second_stage(&reqs, &t, &free, &p1, &a1);
        assert_eq!(p2.len(), 4);
        let a2 = solve(&p2, 0);
        assert_eq!(a2.objective, brute_min(&p2));
        assert!(p2.conflicts(&a2.valuation).is_empty());
        assert_eq!(a2.selected().count(), 2);
    }

    #[test]
    fn first_stage_excludes_taken_spots_in_second() {
        let t = topo(3, 3, &[(0, 1), (1, 1)]);
        let free = t.free_spots();
        let reqs = [
            Request { qubit: 0, axis: Axis::Z },
            Request { qubit: 1, axis: Axis::Z },
        ];
        let p1 = build_first_stage::<f64>(&reqs, &t, &free, 4.0, 2.0);
        let a1 = solve(&p1, 0);
        let taken: Vec<Spot> = a1.selected().map(|i| p1.vars[i].spot).collect();
        let p2 = build_second_stage(&reqs, &t, &free, &p1, &a1);
        assert!(p2.vars.iter().all(|v| !taken.contains(&v.spot)));
    }

    #[test]
    fn json_dump_lists_everything() {
        let t = topo(3, 3, &[(1, 1)]);
        let p = build_first_stage::<f64>(&[Request { qubit: 0, axis: Axis::X }], &t, &t.free_spots(), 4.0, 2.0);
        let v = p.to_json_value();
        assert_eq!(v["vars"].as_array().unwrap().len(), 2);
        assert_eq!(v["vars"][0]["stage"], "first");
        assert_eq!(v["quadratic"][0]["coeff"], 2.0);
        assert_eq!(v["offset"], 2.0);
    }
}
