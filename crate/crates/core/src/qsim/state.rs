use num_complex::Complex;

use super::{AnsatzSpec, Family, QsimError};
use crate::scalar::Real;

/// Pure state of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    n_qubits: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// The computational basis state `|0...0>`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); 1 << n_qubits];
        amplitudes[0] = Complex::new(T::one(), T::zero());
        StateVector {
            n_qubits,
            amplitudes,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + a.conj() * b
            })
    }

    #[inline]
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    /// `R_X(theta) = exp(-i theta X / 2)`.
    pub fn apply_rx(&mut self, qubit: usize, theta: T) {
        let half = theta * T::lit(0.5);
        let (c, s) = (half.cos(), half.sin());
        let mask = self.mask(qubit);
        for i in 0..self.amplitudes.len() {
            if i & mask != 0 {
                continue;
            }
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[i | mask];
            // -i s a = (s a.im, -s a.re)
            self.amplitudes[i] = Complex::new(c * a0.re + s * a1.im, c * a0.im - s * a1.re);
            self.amplitudes[i | mask] =
                Complex::new(c * a1.re + s * a0.im, c * a1.im - s * a0.re);
        }
    }

    /// `R_Z(theta) = exp(-i theta Z / 2)`.
    pub fn apply_rz(&mut self, qubit: usize, theta: T) {
        let half = theta * T::lit(0.5);
        let (c, s) = (half.cos(), half.sin());
        let down = Complex::new(c, -s);
        let up = Complex::new(c, s);
        let mask = self.mask(qubit);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            *a = if i & mask == 0 { *a * down } else { *a * up };
        }
    }

    /// Controlled NOT.
    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let cmask = self.mask(control);
        let tmask = self.mask(target);
        for i in 0..self.amplitudes.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amplitudes.swap(i, i | tmask);
            }
        }
    }
}

/// Prepares `U(u)|0...0>` for the given ansatz.
///
/// Each layer applies, for every input index in order, `R_X(u_j)` (then
/// `R_Z(u_j)` for HEA) on qubit `j mod n`; HEA layers end with the chain
/// `CX(0,1), CX(1,2), ..., CX(n-2,n-1)`.
pub fn build_state<T: Real>(ansatz: &AnsatzSpec, u: &[T]) -> Result<StateVector<T>, QsimError> {
    ansatz.validate()?;
    if u.len() != ansatz.input_dim {
        return Err(QsimError::InputShape {
            expected: ansatz.input_dim,
            found: u.len(),
        });
    }
    let n = ansatz.n_qubits;
    let mut state = StateVector::zero(n);
    for _ in 0..ansatz.depth {
        for (j, &angle) in u.iter().enumerate() {
            let q = ansatz.qubit_for_input(j);
            state.apply_rx(q, angle);
            if ansatz.family == Family::Hea {
                state.apply_rz(q, angle);
            }
        }
        if ansatz.family == Family::Hea {
            for q in 0..n.saturating_sub(1) {
                state.apply_cx(q, q + 1);
            }
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn tpa(n: usize, depth: usize, d: usize) -> AnsatzSpec {
        AnsatzSpec::with_shape(Family::Tpa, n, depth, d).unwrap()
    }

    #[test]
    fn rx_zero_is_identity() {
        let s = build_state(&tpa(1, 1, 1), &[0.0f64]).unwrap();
        assert_eq!(s.amplitudes()[0], Complex::new(1.0, 0.0));
        assert_eq!(s.amplitudes()[1], Complex::new(0.0, 0.0));
    }

    #[test]
    fn single_rx_amplitudes() {
        for &theta in &[0.3, 1.0, PI / 2.0, 2.5, -1.2] {
            let s = build_state(&tpa(1, 1, 1), &[theta]).unwrap();
            let a = s.amplitudes();
            assert!((a[0] - Complex::new((theta / 2.0).cos(), 0.0)).norm() < 1e-15);
            assert!((a[1] - Complex::new(0.0, -(theta / 2.0).sin())).norm() < 1e-15);
        }
    }

    #[test]
    fn rz_phases() {
        let mut s = StateVector::<f64>::zero(1);
        s.apply_rx(0, PI / 2.0);
        s.apply_rz(0, 0.7);
        let a = s.amplitudes();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expect0 = Complex::new(0.0, -0.35f64).exp() * r;
        let expect1 = Complex::new(0.0, 0.35f64).exp() * Complex::new(0.0, -r);
        assert!((a[0] - expect0).norm() < 1e-15);
        assert!((a[1] - expect1).norm() < 1e-15);
    }

    #[test]
    fn cx_flips_target_when_control_set() {
        // |10> -> |11>, qubit 0 is the most significant bit.
        let mut s = StateVector::<f64>::zero(2);
        s.apply_rx(0, PI); // |0> -> -i|1>
        s.apply_cx(0, 1);
        let a = s.amplitudes();
        assert!(a[3].norm() > 1.0 - 1e-15);
        assert!(a[0].norm() + a[1].norm() + a[2].norm() < 1e-15);

        // control clear: nothing happens
        let mut s = StateVector::<f64>::zero(2);
        s.apply_rx(1, PI);
        s.apply_cx(0, 1);
        assert!(s.amplitudes()[1].norm() > 1.0 - 1e-15);
    }

    #[test]
    fn input_shape_is_checked() {
        let a = AnsatzSpec::new(Family::Hea, 2).unwrap();
        let err = build_state(&a, &[0.1f64, 0.2]).unwrap_err();
        assert_eq!(
            err,
            QsimError::InputShape {
                expected: 4,
                found: 2
            }
        );
    }

    #[test]
    fn hea_layers_preserve_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.random_range(1..=5);
            let family = if rng.random_bool(0.5) {
                Family::Hea
            } else {
                Family::Tpa
            };
            let a = AnsatzSpec::new(family, n).unwrap();
            let u: Vec<f64> = (0..a.input_dim)
                .map(|_| rng.random_range(-4.0..4.0))
                .collect();
            let s = build_state(&a, &u).unwrap();
            assert!((s.norm_sqr().sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_preserved_after_every_gate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = StateVector::<f64>::zero(3);
        for step in 0..60 {
            let q = step % 3;
            match step % 3 {
                0 => s.apply_rx(q, rng.random_range(-3.0..3.0)),
                1 => s.apply_rz(q, rng.random_range(-3.0..3.0)),
                _ => s.apply_cx(q, (q + 1) % 3),
            }
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_precision_states() {
        let s = build_state(&tpa(1, 1, 1), &[1.0f32]).unwrap();
        assert!((s.amplitudes()[0].re - 0.5f32.cos()).abs() < 1e-6);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-6);
    }
}
