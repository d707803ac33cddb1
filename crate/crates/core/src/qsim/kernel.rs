use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{build_state, AnsatzSpec, QsimError, StateVector};
use crate::scalar::Real;

/// `|<a|b>|^2` for two prepared states.
#[inline]
pub fn overlap_fidelity<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> T {
    a.inner(b).norm_sqr()
}

/// Fidelity kernel `k(u, v) = |<psi(u)|psi(v)>|^2`.
pub fn kernel_value<T: Real>(ansatz: &AnsatzSpec, u: &[T], v: &[T]) -> Result<T, QsimError> {
    let a = build_state(ansatz, u)?;
    let b = build_state(ansatz, v)?;
    Ok(overlap_fidelity(&a, &b))
}

/// Encodes every row of `inputs` (one sample per row).
pub fn encode_rows<T: Real>(
    ansatz: &AnsatzSpec,
    inputs: &DMatrix<T>,
) -> Result<Vec<StateVector<T>>, QsimError> {
    if inputs.nrows() > 0 && inputs.ncols() != ansatz.input_dim {
        return Err(QsimError::InputShape {
            expected: ansatz.input_dim,
            found: inputs.ncols(),
        });
    }
    (0..inputs.nrows())
        .into_par_iter()
        .map(|i| {
            let row: Vec<T> = inputs.row(i).iter().copied().collect();
            build_state(ansatz, &row)
        })
        .collect()
}

/// Gram matrix of already prepared states. The upper triangle is computed
/// and mirrored; the diagonal is set to exactly one.
pub fn gram_from_states<T: Real>(states: &[StateVector<T>]) -> DMatrix<T> {
    let n = states.len();
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| overlap_fidelity(&states[i], &states[j]))
                .collect()
        })
        .collect();
    let mut k = DMatrix::from_element(n, n, T::one());
    for (i, row) in rows.into_iter().enumerate() {
        for (offset, value) in row.into_iter().enumerate() {
            let j = i + 1 + offset;
            k[(i, j)] = value;
            k[(j, i)] = value;
        }
    }
    k
}

/// `out[(i, j)] = |<rows_i|cols_j>|^2`.
pub fn cross_from_states<T: Real>(
    rows: &[StateVector<T>],
    cols: &[StateVector<T>],
) -> DMatrix<T> {
    let values: Vec<Vec<T>> = rows
        .par_iter()
        .map(|r| cols.iter().map(|c| overlap_fidelity(r, c)).collect())
        .collect();
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| values[i][j])
}

/// Symmetric `N x N` kernel matrix of the rows of `inputs`.
pub fn kernel_matrix<T: Real>(
    ansatz: &AnsatzSpec,
    inputs: &DMatrix<T>,
) -> Result<DMatrix<T>, QsimError> {
    let states = encode_rows(ansatz, inputs)?;
    Ok(gram_from_states(&states))
}

/// `M x N` matrix of kernels between test rows and training rows.
pub fn cross_kernel<T: Real>(
    ansatz: &AnsatzSpec,
    train: &DMatrix<T>,
    test: &DMatrix<T>,
) -> Result<DMatrix<T>, QsimError> {
    let train_states = encode_rows(ansatz, train)?;
    let test_states = encode_rows(ansatz, test)?;
    Ok(cross_from_states(&test_states, &train_states))
}
