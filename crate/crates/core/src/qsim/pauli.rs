use std::io::Write;

use nalgebra::DMatrix;

use super::{build_state, AnsatzSpec, QsimError, StateVector};
use crate::estimate::symmetric_eigendecomposition;
use crate::rng;
use crate::scalar::Real;

/// Memory guard for anything that materializes `4^n` coefficients.
pub const MAX_PAULI_QUBITS: usize = 6;

const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// Coefficients `r_i = Tr[rho P_i]` of a state in the normalized Pauli basis
/// (`Tr[P_i P_j] = delta_ij`, every tensor factor divided by `sqrt 2`).
///
/// Index `i` written in base 4 with qubit 0 as the most significant digit
/// gives the string, digits `0..4` standing for `I, X, Y, Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliVector<T> {
    pub n_qubits: usize,
    pub coefficients: Vec<T>,
}

impl<T: Real> PauliVector<T> {
    pub fn dot(&self, other: &Self) -> T {
        self.coefficients
            .iter()
            .zip(&other.coefficients)
            .fold(T::zero(), |acc, (a, b)| acc + *a * *b)
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }
}

/// Label of the Pauli string with lexicographic index `index`.
pub fn pauli_string(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| LETTERS[(index >> (2 * (n_qubits - 1 - q))) & 3])
        .collect()
}

/// `<psi| sigma |psi>` for the unnormalized string `sigma` given by bit masks.
fn expectation<T: Real>(state: &StateVector<T>, flip: usize, ymask: usize, zmask: usize) -> T {
    // sigma|i> = i^{#Y} (-1)^{popcount(i & (Y|Z))} |i ^ flip>
    let amps = state.amplitudes();
    let mut acc = num_complex::Complex::new(T::zero(), T::zero());
    for (i, a) in amps.iter().enumerate() {
        let term = amps[i ^ flip].conj() * a;
        if (i & (ymask | zmask)).count_ones() % 2 == 1 {
            acc -= term;
        } else {
            acc += term;
        }
    }
    match ymask.count_ones() % 4 {
        0 => acc.re,
        1 => -acc.im,
        2 => -acc.re,
        _ => acc.im,
    }
}

/// Pauli coefficient vector of the encoded state `rho(u)`.
pub fn pauli_vector<T: Real>(ansatz: &AnsatzSpec, u: &[T]) -> Result<PauliVector<T>, QsimError> {
    let n = ansatz.n_qubits;
    if n > MAX_PAULI_QUBITS {
        return Err(QsimError::ResourceLimit {
            what: "Pauli expansion",
            n_qubits: n,
            limit: MAX_PAULI_QUBITS,
        });
    }
    let state = build_state(ansatz, u)?;
    let scale = T::one() / T::count(1 << n).sqrt();
    let coefficients = (0..ansatz.ambient_dim())
        .map(|index| {
            let (mut flip, mut ymask, mut zmask) = (0usize, 0usize, 0usize);
            for q in 0..n {
                let bit = 1 << (n - 1 - q);
                match (index >> (2 * (n - 1 - q))) & 3 {
                    1 => flip |= bit,
                    2 => {
                        flip |= bit;
                        ymask |= bit;
                    }
                    3 => zmask |= bit,
                    _ => {}
                }
            }
            expectation(&state, flip, ymask, zmask) * scale
        })
        .collect();
    Ok(PauliVector {
        n_qubits: n,
        coefficients,
    })
}

/// Numerical rank of `E[r(u) r(u)^T]` under `u ~ N(0, I_d)`.
///
/// Draws `sample_count` inputs, averages the outer products of their Pauli
/// vectors, and counts eigenvalues above `rel_tol` times the largest one.
pub fn effective_rank_probe<T: Real>(
    ansatz: &AnsatzSpec,
    sample_count: usize,
    seed: u64,
    rel_tol: T,
) -> Result<usize, QsimError> {
    if ansatz.n_qubits > MAX_PAULI_QUBITS {
        return Err(QsimError::ResourceLimit {
            what: "Pauli expansion",
            n_qubits: ansatz.n_qubits,
            limit: MAX_PAULI_QUBITS,
        });
    }
    let dim = ansatz.ambient_dim();
    let mut rng = rng::seeded(seed);
    let inputs = rng::standard_normal_matrix::<T>(&mut rng, sample_count, ansatz.input_dim);
    let mut moment = DMatrix::<T>::zeros(dim, dim);
    for i in 0..sample_count {
        let u: Vec<T> = inputs.row(i).iter().copied().collect();
        let r = nalgebra::DVector::from_vec(pauli_vector(ansatz, &u)?.coefficients);
        moment.ger(T::one(), &r, &r, T::one());
    }
    moment /= T::count(sample_count.max(1));
    let eig = symmetric_eigendecomposition(&moment)
        .map_err(|e| QsimError::InvalidAnsatz(format!("rank probe eigensolver: {e}")))?;
    let top = eig.eigenvalues.first().copied().unwrap_or_else(T::zero);
    Ok(eig.eigenvalues.iter().filter(|&&x| x > rel_tol * top).count())
}

/// Writes a Pauli vector as `index,pauli_string,coefficient` CSV.
pub fn write_pauli_csv<T: Real, W: Write>(pv: &PauliVector<T>, mut out: W) -> Result<(), QsimError> {
    let io = |e: std::io::Error| QsimError::Io(e.to_string());
    writeln!(
        out,
        "# normalized Pauli basis Tr[P_i P_j] = delta_ij; strings in lexicographic I<X<Y<Z order, qubit 1 leftmost"
    )
    .map_err(io)?;
    writeln!(out, "index,pauli_string,coefficient").map_err(io)?;
    for (i, c) in pv.coefficients.iter().enumerate() {
        writeln!(out, "{},{},{}", i, pauli_string(i, pv.n_qubits), c.as_f64()).map_err(io)?;
    }
    Ok(())
}
