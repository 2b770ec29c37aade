use serde::Serialize;

use crate::error::EstimatorError;
use crate::scalar::Scalar;

/// Sample Pearson correlation.
pub fn pearson_r<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T, EstimatorError> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(EstimatorError::SampleSize(xs.len(), ys.len()));
    }
    let n = T::of_usize(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return Err(EstimatorError::ZeroVariance);
    }
    let r = sxy / (sxx * syy).sqrt();
    Ok(r.max(-T::one()).min(T::one()))
}

/// Mean and sample standard deviation; the deviation of fewer than two values is 0.
pub fn mean_std<T: Scalar>(xs: &[T]) -> (T, T) {
    if xs.is_empty() {
        return (T::zero(), T::zero());
    }
    let n = T::of_usize(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    if xs.len() < 2 {
        return (mean, T::zero());
    }
    let ss: T = xs.iter().map(|&x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - T::one())).sqrt())
}

/// One topology of an ensemble: its estimators and its clock statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyRow<T> {
    pub topology_id: usize,
    pub e_analog: T,
    pub e_cnot: T,
    pub e_comb: T,
    pub t_clock_mean: T,
    pub t_clock_std: T,
}

/// Pearson R of mean clock count against each estimator; `None` where a variance vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlations<T> {
    pub e_analog: Option<T>,
    pub e_cnot: Option<T>,
    pub e_comb: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats<T> {
    pub rows: Vec<TopologyRow<T>>,
    pub r: Correlations<T>,
    pub t_clock_mean: T,
    pub t_clock_std: T,
}

impl<T: Scalar> EnsembleStats<T> {
    pub fn new(mut rows: Vec<TopologyRow<T>>) -> Self {
        rows.sort_by_key(|r| r.topology_id);
        let t: Vec<T> = rows.iter().map(|r| r.t_clock_mean).collect();
        let against = |f: fn(&TopologyRow<T>) -> T| {
            let e: Vec<T> = rows.iter().map(f).collect();
            pearson_r(&t, &e).ok()
        };
        let r = Correlations {
            e_analog: against(|r| r.e_analog),
            e_cnot: against(|r| r.e_cnot),
            e_comb: against(|r| r.e_comb),
        };
        let (t_clock_mean, t_clock_std) = mean_std(&t);
        EnsembleStats {
            rows,
            r,
            t_clock_mean,
            t_clock_std,
        }
    }

    /// Row indices from fewest to most mean clock cycles, ties by topology id.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.rows.len()).collect();
        idx.sort_by(|&a, &b| {
            let (ra, rb) = (&self.rows[a], &self.rows[b]);
            ra.t_clock_mean
                .partial_cmp(&rb.t_clock_mean)
                .expect("finite clock means")
                .then(ra.topology_id.cmp(&rb.topology_id))
        });
        idx
    }

    /// Percentile of each row in `rows` order: 0.0 for the fewest mean clock cycles,
    /// 100.0 for the most.
    pub fn percentiles(&self) -> Vec<T> {
        let n = self.rows.len();
        let mut out = vec![T::zero(); n];
        if n < 2 {
            return out;
        }
        for (rank, i) in self.ranking().into_iter().enumerate() {
            out[i] = T::of(100.0) * T::of_usize(rank) / T::of_usize(n - 1);
        }
        out
    }

    pub fn best(&self) -> Option<&TopologyRow<T>> {
        self.ranking().first().map(|&i| &self.rows[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Textbook form: (nΣxy − ΣxΣy) / sqrt((nΣx² − (Σx)²)(nΣy² − (Σy)²)).
    fn oracle(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let syy: f64 = ys.iter().map(|y| y * y).sum();
        (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt()
    }

    #[test]
    fn perfect_correlations() {
        assert_eq!(pearson_r(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(pearson_r(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn matches_textbook_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let xs: Vec<f64> = (0..100).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ys: Vec<f64> = xs.iter().map(|x| 0.4 * x + rng.gen_range(-1.0..1.0)).collect();
            assert!((pearson_r(&xs, &ys).unwrap() - oracle(&xs, &ys)).abs() < 1e-12);
        }
    }

    #[test]
    fn undefined_cases() {
        assert_eq!(pearson_r(&[1.0], &[1.0]), Err(EstimatorError::SampleSize(1, 1)));
        assert_eq!(pearson_r(&[1.0, 2.0], &[1.0]), Err(EstimatorError::SampleSize(2, 1)));
        assert_eq!(pearson_r(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(EstimatorError::ZeroVariance));
    }

    #[test]
    fn mean_and_sample_std() {
        let (m, s) = mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert!((s - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
    }

    fn row(id: usize, t: f64, e: f64) -> TopologyRow<f64> {
        TopologyRow {
            topology_id: id,
            e_analog: 1.0,
            e_cnot: e,
            e_comb: 1.0 + 0.3 * e,
            t_clock_mean: t,
            t_clock_std: 0.0,
        }
    }

    #[test]
    fn ensemble_ranking_and_r() {
        let s = EnsembleStats::new(vec![row(2, 30.0, -9.0), row(0, 10.0, -3.0), row(1, 20.0, -6.0)]);
        assert_eq!(s.rows.iter().map(|r| r.topology_id).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(s.percentiles(), vec![0.0, 50.0, 100.0]);
        assert_eq!(s.best().unwrap().topology_id, 0);
        assert_eq!(s.r.e_analog, None);
        assert!((s.r.e_cnot.unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(s.t_clock_mean, 20.0);
    }
}
