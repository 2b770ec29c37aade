use std::collections::VecDeque;

use super::{Spot, SpotSet, Topology};

/// Shortest path through free, unblocked spots from any of `sources` to any spot
/// satisfying `is_sink`. Sources seed the queue in the given order and neighbours are
/// expanded in `(y, x)` order, so the result is deterministic.
pub fn bfs_path(
    topo: &Topology,
    blocked: &SpotSet,
    sources: &[Spot],
    is_sink: impl Fn(Spot) -> bool,
) -> Option<Vec<Spot>> {
    let w = topo.width();
    let passable = |s: Spot| topo.is_free(s) && !blocked.contains(s);
    let mut parent: Vec<Option<usize>> = vec![None; w * topo.height()];
    let mut seen = vec![false; w * topo.height()];
    let mut queue = VecDeque::new();
    for &s in sources {
        let i = s.y * w + s.x;
        if passable(s) && !seen[i] {
            seen[i] = true;
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        if is_sink(s) {
            let mut path = vec![s];
            let mut cur = s.y * w + s.x;
            while let Some(p) = parent[cur] {
                path.push(Spot::new(p % w, p / w));
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        let si = s.y * w + s.x;
        for n in topo.grid_neighbors(s) {
            let ni = n.y * w + n.x;
            if !seen[ni] && passable(n) {
                seen[ni] = true;
                parent[ni] = Some(si);
                queue.push_back(n);
            }
        }
    }
    None
}

/// Ancilla path for a CNOT: starts at a Z-neighbour of `control`, ends at an
/// X-neighbour of `target`, avoiding data qubits and `blocked`.
pub fn route_cnot(
    topo: &Topology,
    blocked: &SpotSet,
    control: usize,
    target: usize,
) -> Option<Vec<Spot>> {
    assert_ne!(control, target);
    let sinks = topo.neighbors_x(target);
    bfs_path(topo, blocked, &topo.neighbors_z(control), |s| sinks.contains(&s))
}
