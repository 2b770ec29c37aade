use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::TopologyError;

use super::{Spot, Topology};

pub const DEFAULT_ATTEMPT_BUDGET: usize = 10_000_000;

/// Densest valid layout: 4 qubits per 3×3 block at the block corners, leaving the
/// centre cross free, tiled `m × n` times into a `3m × 3n` grid.
pub fn gen_dense(m: usize, n: usize) -> Result<Topology, TopologyError> {
    if m == 0 || n == 0 {
        return Err(TopologyError::BadDenseShape);
    }
    let mut placement = Vec::with_capacity(4 * m * n);
    for y in 0..3 * n {
        for x in 0..3 * m {
            if x % 3 != 1 && y % 3 != 1 {
                placement.push(Spot::new(x, y));
            }
        }
    }
    Topology::new(3 * m, 3 * n, placement)
}

fn density_limit(width: usize, height: usize) -> usize {
    4 * width.div_ceil(3) * height.div_ceil(3)
}

/// Endless stream of valid random topologies drawn by rejection sampling.
///
/// Each attempt is a uniformly random injective placement; validity only depends on
/// the set of occupied spots, so accepted placements are uniform over valid maps.
pub struct RandomTopologies {
    width: usize,
    height: usize,
    n_qubits: usize,
    budget: usize,
    rng: ChaCha8Rng,
    cells: Vec<usize>,
    masks: Option<MaskGrid>,
}

impl RandomTopologies {
    pub fn new(
        width: usize,
        height: usize,
        n_qubits: usize,
        seed: u64,
        budget: usize,
    ) -> Result<Self, TopologyError> {
        if width == 0 || height == 0 {
            return Err(TopologyError::EmptyGrid { width, height });
        }
        let limit = density_limit(width, height).min(width * height);
        if n_qubits > limit {
            return Err(TopologyError::TooDense {
                n_qubits,
                limit,
                width,
                height,
            });
        }
        Ok(RandomTopologies {
            width,
            height,
            n_qubits,
            budget,
            rng: ChaCha8Rng::seed_from_u64(seed),
            cells: (0..width * height).collect(),
            masks: MaskGrid::new(width, height),
        })
    }

    /// Samples injective placements uniformly until one validates.
    pub fn next_valid(&mut self) -> Result<Topology, TopologyError> {
        let (w, n) = (self.width, self.n_qubits);
        for _ in 0..self.budget {
            // partial Fisher-Yates: cells[..n] is a uniform random ordered sample
            for i in 0..n {
                let j = self.rng.gen_range(i..self.cells.len());
                self.cells.swap(i, j);
            }
            let chosen = &self.cells[..n];
            if let Some(m) = &self.masks {
                if !m.is_valid(chosen) {
                    continue;
                }
            }
            let placement = chosen.iter().map(|&i| Spot::new(i % w, i / w)).collect();
            let topo = Topology::new(w, self.height, placement)?;
            if topo.validate().is_valid() {
                return Ok(topo);
            }
        }
        Err(TopologyError::NoValidTopology {
            attempts: self.budget,
        })
    }
}

/// Bitmask pre-filter for grids of at most 128 spots; agrees with [`Topology::validate`].
struct MaskGrid {
    width: usize,
    all: u128,
    not_first_col: u128,
    not_last_col: u128,
}

impl MaskGrid {
    fn new(width: usize, height: usize) -> Option<Self> {
        let cells = width * height;
        if cells > 128 {
            return None;
        }
        let all = if cells == 128 { u128::MAX } else { (1u128 << cells) - 1 };
        let mut first = 0u128;
        let mut last = 0u128;
        for y in 0..height {
            first |= 1 << (y * width);
            last |= 1 << (y * width + width - 1);
        }
        Some(MaskGrid {
            width,
            all,
            not_first_col: all & !first,
            not_last_col: all & !last,
        })
    }

    fn dilate(&self, m: u128) -> u128 {
        let w = self.width;
        m | ((m << 1) & self.not_first_col)
            | ((m >> 1) & self.not_last_col)
            | ((m << w) & self.all)
            | (m >> w)
    }

    /// Free Z- and X-neighbour masks of one cell.
    fn edges(&self, cell: usize, free: u128) -> (u128, u128) {
        let bit = 1u128 << cell;
        let z = ((bit << self.width) & self.all) | (bit >> self.width);
        let x = ((bit << 1) & self.not_first_col) | ((bit >> 1) & self.not_last_col);
        (z & free, x & free)
    }

    fn is_valid(&self, cells: &[usize]) -> bool {
        let occupied = cells.iter().fold(0u128, |m, &c| m | 1 << c);
        let free = self.all & !occupied;
        let mut z_edges = [0u128; 128];
        let mut x_edges = [0u128; 128];
        for (q, &c) in cells.iter().enumerate() {
            let (z, x) = self.edges(c, free);
            if z == 0 || x == 0 {
                return false;
            }
            z_edges[q] = z;
            x_edges[q] = x;
        }
        // per component: qubits reaching it through a Z-edge / an X-edge
        let n = cells.len();
        let mut reach_x_from = vec![0u128; n];
        let mut rest = free;
        while rest != 0 {
            let mut comp = rest & rest.wrapping_neg();
            loop {
                let grown = self.dilate(comp) & free;
                if grown == comp {
                    break;
                }
                comp = grown;
            }
            rest &= !comp;
            let mut xs = 0u128;
            for q in 0..n {
                if x_edges[q] & comp != 0 {
                    xs |= 1 << q;
                }
            }
            for q in 0..n {
                if z_edges[q] & comp != 0 {
                    reach_x_from[q] |= xs;
                }
            }
        }
        let everyone = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
        (0..n).all(|q| reach_x_from[q] | (1 << q) == everyone)
    }
}

pub fn gen_random(
    width: usize,
    height: usize,
    n_qubits: usize,
    seed: u64,
) -> Result<Topology, TopologyError> {
    RandomTopologies::new(width, height, n_qubits, seed, DEFAULT_ATTEMPT_BUDGET)?.next_valid()
}

/// `count` topologies from one seeded stream; a shorter request yields a prefix of a longer one.
pub fn gen_random_many(
    width: usize,
    height: usize,
    n_qubits: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Topology>, TopologyError> {
    let mut gen = RandomTopologies::new(width, height, n_qubits, seed, DEFAULT_ATTEMPT_BUDGET)?;
    (0..count).map(|_| gen.next_valid()).collect()
}
