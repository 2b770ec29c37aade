//! 2x2 unitaries and their Rz·Rx·Rz Euler decomposition.

use num_complex::Complex;

use crate::scalar::{normalize_angle, Scalar};

use super::{Axis, Gate};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T> {
    pub m: [[Complex<T>; 2]; 2],
}

impl<T: Scalar> Mat2<T> {
    pub fn identity() -> Self {
        let (o, z) = (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
        Mat2 { m: [[o, z], [z, o]] }
    }

    /// Rz(θ) = diag(e^{-iθ/2}, e^{iθ/2}).
    pub fn rz(theta: T) -> Self {
        let half = theta / T::of(2.0);
        let z = Complex::new(T::zero(), T::zero());
        Mat2 {
            m: [
                [Complex::from_polar(T::one(), -half), z],
                [z, Complex::from_polar(T::one(), half)],
            ],
        }
    }

    /// Rx(θ) = [[cos θ/2, -i sin θ/2], [-i sin θ/2, cos θ/2]].
    pub fn rx(theta: T) -> Self {
        let half = theta / T::of(2.0);
        let c = Complex::new(half.cos(), T::zero());
        let s = Complex::new(T::zero(), -half.sin());
        Mat2 { m: [[c, s], [s, c]] }
    }

    pub fn rotation(axis: Axis, theta: T) -> Self {
        match axis {
            Axis::X => Self::rx(theta),
            Axis::Z => Self::rz(theta),
        }
    }

    /// Matrix product `self * rhs` (apply `rhs` first).
    pub fn mul(&self, rhs: &Self) -> Self {
        let a = &self.m;
        let b = &rhs.m;
        let mut m = [[Complex::new(T::zero(), T::zero()); 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2 { m }
    }

    pub fn adjoint(&self) -> Self {
        let a = &self.m;
        Mat2 {
            m: [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]],
        }
    }

    pub fn trace(&self) -> Complex<T> {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// |tr(U†V)|, which equals 2 exactly when U and V agree up to a global phase.
    pub fn phase_overlap(&self, other: &Self) -> T {
        self.adjoint().mul(other).trace().norm()
    }

    pub fn equal_up_to_phase(&self, other: &Self, tol: T) -> bool {
        (self.phase_overlap(other) - T::of(2.0)).abs() <= tol
    }

    /// Product of single-qubit gates applied in sequence (first element acts first).
    pub fn from_sequence<'a, I>(gates: I) -> Self
    where
        I: IntoIterator<Item = &'a Gate<T>>,
    {
        gates.into_iter().fold(Self::identity(), |acc, g| match g.as_rotation() {
            Some((axis, _, angle)) => Self::rotation(axis, angle).mul(&acc),
            None => panic!("CNOT inside a single-qubit run"),
        })
    }
}

/// Angles of `U ≅ Rz(after)·Rx(middle)·Rz(before)`; components within tolerance of zero are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerZxz<T> {
    pub before: Option<T>,
    pub middle: Option<T>,
    pub after: Option<T>,
}

impl<T: Scalar> EulerZxz<T> {
    pub fn len(&self) -> usize {
        [self.before, self.middle, self.after].iter().filter(|a| a.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Gates in application order on `qubit`.
    pub fn gates(&self, qubit: usize) -> Vec<Gate<T>> {
        let mut out = Vec::with_capacity(3);
        if let Some(a) = self.before {
            out.push(Gate::rz(qubit, a));
        }
        if let Some(a) = self.middle {
            out.push(Gate::rx(qubit, a));
        }
        if let Some(a) = self.after {
            out.push(Gate::rz(qubit, a));
        }
        out
    }
}

fn nonzero<T: Scalar>(theta: T) -> Option<T> {
    let r = normalize_angle(theta);
    (r.abs() > T::tolerance()).then_some(r)
}

/// Decomposes a 2x2 unitary into at most three rotations.
///
/// Diagonal input yields a single Rz; anti-diagonal input yields Rz(α) followed by Rx(π).
pub fn zxz_decompose<T: Scalar>(u: &Mat2<T>) -> EulerZxz<T> {
    let two = T::of(2.0);
    let root = u.det().sqrt();
    let v = Mat2 {
        m: [
            [u.m[0][0] / root, u.m[0][1] / root],
            [u.m[1][0] / root, u.m[1][1] / root],
        ],
    };
    let c = v.m[0][0].norm();
    let s = v.m[1][0].norm();
    let i = Complex::new(T::zero(), T::one());
    // sqrt(tol) keeps near-diagonal products from producing a spurious tiny Rx
    let eps = T::tolerance().sqrt() * T::of(1e-2);

    if s <= eps {
        // V ≅ diag(e^{-iλ/2}, e^{iλ/2})
        let lambda = two * v.m[1][1].arg();
        return EulerZxz {
            before: nonzero(lambda),
            middle: None,
            after: None,
        };
    }
    if c <= eps {
        // V ≅ Rx(π)·Rz(α), with i·V10 = e^{-iα/2}
        let alpha = -two * (i * v.m[1][0]).arg();
        return EulerZxz {
            before: nonzero(alpha),
            middle: Some(T::PI()),
            after: None,
        };
    }
    let phi = two * s.atan2(c);
    let half_sum = v.m[1][1].arg();
    let half_diff = -(i * v.m[1][0]).arg();
    let plain = EulerZxz {
        before: nonzero(half_sum + half_diff),
        middle: nonzero(phi),
        after: nonzero(half_sum - half_diff),
    };
    // Rz(π)·Rx(φ)·Rz(-π) ≅ Rx(-φ): the shifted triple may need fewer gates
    let shifted = EulerZxz {
        before: nonzero(half_sum + half_diff + T::PI()),
        middle: nonzero(-phi),
        after: nonzero(half_sum - half_diff - T::PI()),
    };
    if shifted.len() < plain.len() {
        shifted
    } else {
        plain
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rebuild(e: &EulerZxz<f64>) -> Mat2<f64> {
        Mat2::from_sequence(e.gates(0).iter())
    }

    #[test]
    fn diagonal_gives_single_rz() {
        let u = Mat2::rz(0.7f64).mul(&Mat2::rz(0.4));
        let e = zxz_decompose(&u);
        assert_eq!(e.middle, None);
        assert_eq!(e.after, None);
        assert!((e.before.unwrap() - 1.1).abs() < 1e-12);
    }

    #[test]
    fn anti_diagonal_gives_rx_pi_form() {
        let u = Mat2::rz(0.3f64).mul(&Mat2::rx(PI)).mul(&Mat2::rz(0.9));
        let e = zxz_decompose(&u);
        assert_eq!(e.middle, Some(PI));
        assert_eq!(e.after, None);
        assert!(rebuild(&e).equal_up_to_phase(&u, 1e-9));
    }

    #[test]
    fn identity_gives_nothing() {
        let h = Mat2::rz(PI / 2.0)
            .mul(&Mat2::rx(PI / 2.0))
            .mul(&Mat2::rz(PI / 2.0));
        let e = zxz_decompose(&h.mul(&h));
        assert!(e.gates(0).is_empty());
    }

    #[test]
    fn f32_decomposition() {
        let u = Mat2::rz(0.2f32).mul(&Mat2::rx(1.1)).mul(&Mat2::rz(-2.0));
        let e = zxz_decompose(&u);
        let back = Mat2::from_sequence(e.gates(0).iter());
        assert!(back.equal_up_to_phase(&u, 1e-4));
    }

    proptest! {
        #[test]
        fn decomposition_reproduces_unitary(a in -4.0f64..4.0, b in -4.0f64..4.0, c in -4.0f64..4.0, d in -4.0f64..4.0) {
            let u = Mat2::rz(a).mul(&Mat2::rx(b)).mul(&Mat2::rz(c)).mul(&Mat2::rx(d));
            let e = zxz_decompose(&u);
            prop_assert!(e.gates(0).len() <= 3);
            prop_assert!(rebuild(&e).equal_up_to_phase(&u, 1e-9));
        }
    }
}
