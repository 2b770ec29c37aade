use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Assignment, QuboProblem};
use crate::scalar::Scalar;

/// Largest connected block solved by exhaustive enumeration.
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealParams {
    pub sweeps: usize,
    pub restarts: usize,
    pub t_start: f64,
    pub t_end: f64,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            sweeps: 400,
            restarts: 8,
            t_start: 4.0,
            t_end: 0.02,
        }
    }
}

/// Local view of a block of variables: linear terms and symmetric adjacency.
struct Block<T> {
    linear: Vec<T>,
    adj: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> Block<T> {
    fn whole(p: &QuboProblem<T>) -> Self {
        let ids: Vec<usize> = (0..p.len()).collect();
        Block::of(p, &ids)
    }

    fn of(p: &QuboProblem<T>, ids: &[usize]) -> Self {
        let mut local = vec![usize::MAX; p.len()];
        for (k, &i) in ids.iter().enumerate() {
            local[i] = k;
        }
        let mut adj = vec![Vec::new(); ids.len()];
        for (&(i, j), &c) in &p.quadratic {
            let (li, lj) = (local[i], local[j]);
            if li != usize::MAX && lj != usize::MAX {
                adj[li].push((lj, c));
                adj[lj].push((li, c));
            }
        }
        Block {
            linear: ids.iter().map(|&i| p.linear[i]).collect(),
            adj,
        }
    }

    fn len(&self) -> usize {
        self.linear.len()
    }

    /// Energy change from flipping variable `i`.
    fn delta(&self, x: &[bool], i: usize) -> T {
        let mut d = self.linear[i];
        for &(j, c) in &self.adj[i] {
            if x[j] {
                d = d + c;
            }
        }
        if x[i] {
            -d
        } else {
            d
        }
    }

    fn energy(&self, x: &[bool]) -> T {
        let mut e = T::zero();
        for i in 0..self.len() {
            if x[i] {
                e = e + self.linear[i];
                for &(j, c) in &self.adj[i] {
                    if j > i && x[j] {
                        e = e + c;
                    }
                }
            }
        }
        e
    }

    /// Minimum over all valuations via Gray-code enumeration; ties go to the
    /// lexicographically smallest valuation (variable 0 most significant).
    fn exhaustive(&self) -> Vec<bool> {
        let n = self.len();
        assert!(n <= 30, "exhaustive enumeration over {n} variables");
        let tol = T::tolerance();
        let key = |x: &[bool]| x.iter().fold(0u64, |k, &b| k << 1 | b as u64);
        let mut x = vec![false; n];
        let mut e = T::zero();
        let mut best_e = e;
        let mut best_key = 0u64;
        for step in 1u64..(1u64 << n) {
            let i = step.trailing_zeros() as usize;
            e = e + self.delta(&x, i);
            x[i] = !x[i];
            if e < best_e - tol {
                best_e = e;
                best_key = key(&x);
            } else if e <= best_e + tol {
                let k = key(&x);
                if k < best_key {
                    best_key = k;
                    best_e = best_e.min(e);
                }
            }
        }
        (0..n).map(|i| best_key >> (n - 1 - i) & 1 == 1).collect()
    }

    fn anneal(&self, params: &AnnealParams, rng: &mut ChaCha8Rng) -> Vec<bool> {
        let n = self.len();
        let mut best = vec![false; n];
        let mut best_e = T::zero();
        if n == 0 {
            return best;
        }
        let sweeps = params.sweeps.max(1);
        let ratio = (params.t_end / params.t_start).powf(1.0 / sweeps as f64);
        for _ in 0..params.restarts.max(1) {
            let mut x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            let mut e = self.energy(&x);
            if e < best_e {
                best_e = e;
                best.clone_from(&x);
            }
            let mut temp = params.t_start;
            for _ in 0..sweeps {
                for i in 0..n {
                    let d = self.delta(&x, i);
                    let df = d.to_f64_lossy();
                    if df <= 0.0 || rng.gen::<f64>() < (-df / temp).exp() {
                        x[i] = !x[i];
                        e = e + d;
                        if e < best_e {
                            best_e = e;
                            best.clone_from(&x);
                        }
                    }
                }
                temp *= ratio;
            }
        }
        best
    }
}

fn components<T: Scalar>(p: &QuboProblem<T>) -> Vec<Vec<usize>> {
    let n = p.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for &(i, j) in p.quadratic.keys() {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Drops the higher-id variable of every selected pair sharing a spot.
pub fn repair<T: Scalar>(p: &QuboProblem<T>, valuation: &mut [bool]) {
    for i in 0..p.len() {
        if !valuation[i] {
            continue;
        }
        for j in i + 1..p.len() {
            if valuation[j] && p.vars[j].spot == p.vars[i].spot {
                valuation[j] = false;
            }
        }
    }
}

fn finish<T: Scalar>(p: &QuboProblem<T>, mut valuation: Vec<bool>) -> Assignment<T> {
    repair(p, &mut valuation);
    let objective = p.evaluate(&valuation);
    Assignment {
        valuation,
        objective,
    }
}

/// Exact minimum by enumerating all valuations of the whole problem.
pub fn solve_exhaustive<T: Scalar>(p: &QuboProblem<T>) -> Assignment<T> {
    finish(p, Block::whole(p).exhaustive())
}

/// Simulated annealing over the whole problem, then repair.
pub fn anneal<T: Scalar>(p: &QuboProblem<T>, params: &AnnealParams, seed: u64) -> Assignment<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    finish(p, Block::whole(p).anneal(params, &mut rng))
}

/// Minimises each connected block independently: exhaustively when it has at most
/// [`EXACT_LIMIT`] variables, otherwise by annealing. The objective is separable over
/// blocks, so the exact result matches a whole-problem enumeration including its
/// lexicographic tie-break.
pub fn solve<T: Scalar>(p: &QuboProblem<T>, seed: u64) -> Assignment<T> {
    let mut valuation = vec![false; p.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for ids in components(p) {
        let block = Block::of(p, &ids);
        let x = if ids.len() <= EXACT_LIMIT {
            block.exhaustive()
        } else {
            block.anneal(&AnnealParams::default(), &mut rng)
        };
        for (k, &i) in ids.iter().enumerate() {
            valuation[i] = x[k];
        }
    }
    finish(p, valuation)
}
