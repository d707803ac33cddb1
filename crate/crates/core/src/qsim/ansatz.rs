use std::fmt;
use std::str::FromStr;

use super::QsimError;

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 12;

/// Circuit family of the encoding unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Hardware-efficient ansatz: `R_X`, `R_Z` rotations followed by a CX chain.
    Hea,
    /// Tensor product ansatz: `R_X` rotations only.
    Tpa,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Hea => "hea",
            Family::Tpa => "tpa",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = QsimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hea" => Ok(Family::Hea),
            "tpa" => Ok(Family::Tpa),
            other => Err(QsimError::InvalidAnsatz(format!("unknown family `{other}`"))),
        }
    }
}

/// Shape of an encoding circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AnsatzSpec {
    pub family: Family,
    pub n_qubits: usize,
    /// Number of repeated layers.
    pub depth: usize,
    /// Length of the classical input vector.
    pub input_dim: usize,
}

impl AnsatzSpec {
    /// Ansatz with the default depth `n` and input dimension `2n`.
    pub fn new(family: Family, n_qubits: usize) -> Result<Self, QsimError> {
        Self::with_shape(family, n_qubits, n_qubits, 2 * n_qubits)
    }

    pub fn with_shape(
        family: Family,
        n_qubits: usize,
        depth: usize,
        input_dim: usize,
    ) -> Result<Self, QsimError> {
        let spec = AnsatzSpec {
            family,
            n_qubits,
            depth,
            input_dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), QsimError> {
        if self.n_qubits == 0 || self.depth == 0 || self.input_dim == 0 {
            return Err(QsimError::InvalidAnsatz(format!(
                "n_qubits, depth and input_dim must be positive (got {}, {}, {})",
                self.n_qubits, self.depth, self.input_dim
            )));
        }
        if self.n_qubits > MAX_QUBITS {
            return Err(QsimError::ResourceLimit {
                what: "statevector simulation",
                n_qubits: self.n_qubits,
                limit: MAX_QUBITS,
            });
        }
        Ok(())
    }

    /// Qubit (zero based) that input entry `j` (zero based) is mapped onto.
    #[inline]
    pub fn qubit_for_input(&self, j: usize) -> usize {
        j % self.n_qubits
    }

    /// Hilbert space dimension `2^n`.
    pub fn hilbert_dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Dimension of the full Pauli feature space, `4^n`.
    pub fn ambient_dim(&self) -> usize {
        1 << (2 * self.n_qubits)
    }

    /// Rank of the population covariance of the Pauli features: `4^n` for
    /// HEA and `3^n` for TPA (the `X` component never appears).
    pub fn effective_dim(&self) -> usize {
        match self.family {
            Family::Hea => self.ambient_dim(),
            Family::Tpa => 3usize.pow(self.n_qubits as u32),
        }
    }

    pub fn name(&self) -> &'static str {
        self.family.name()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_qubit_count() {
        let a = AnsatzSpec::new(Family::Hea, 3).unwrap();
        assert_eq!((a.depth, a.input_dim), (3, 6));
        assert_eq!(a.ambient_dim(), 64);
        assert_eq!(a.effective_dim(), 64);
        let t = AnsatzSpec::new(Family::Tpa, 3).unwrap();
        assert_eq!(t.effective_dim(), 27);
    }

    #[test]
    fn rejects_degenerate_and_oversized() {
        assert!(matches!(
            AnsatzSpec::new(Family::Tpa, 0),
            Err(QsimError::InvalidAnsatz(_))
        ));
        assert!(AnsatzSpec::with_shape(Family::Tpa, 2, 0, 4).is_err());
        assert!(matches!(
            AnsatzSpec::new(Family::Hea, 13),
            Err(QsimError::ResourceLimit { .. })
        ));
    }

    #[test]
    fn cyclic_input_mapping() {
        let a = AnsatzSpec::new(Family::Hea, 4).unwrap();
        let qubits: Vec<_> = (0..8).map(|j| a.qubit_for_input(j)).collect();
        assert_eq!(qubits, vec![0, 1, 2, 3, 0, 1, 2, 3]);
    }

    #[test]
    fn family_parsing() {
        assert_eq!("TPA".parse::<Family>().unwrap(), Family::Tpa);
        assert_eq!("hea".parse::<Family>().unwrap(), Family::Hea);
        assert!("qaoa".parse::<Family>().is_err());
    }
}
