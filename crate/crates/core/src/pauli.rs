//! Single-qubit Paulis, Pauli strings and the CNOT conjugation table.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{c, CMatrix, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Position in the order I < X < Y < Z.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Pauli {
        Pauli::ALL[i & 3]
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(ch: char) -> Result<Pauli> {
        match ch.to_ascii_uppercase() {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::InvalidParameter(alloc::format!("not a Pauli: {other}"))),
        }
    }

    pub fn matrix(self) -> CMatrix {
        let d = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, c(-1.0, 0.0)],
        };
        CMatrix::from_vec(2, 2, d.to_vec())
    }

    pub fn commutes_with(self, other: Pauli) -> bool {
        self == Pauli::I || other == Pauli::I || self == other
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Tensor product of Paulis; entry `i` acts on qubit `i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PauliString(pub Vec<Pauli>);

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString(alloc::vec![Pauli::I; n])
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(Pauli::from_char)
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }

    /// A string with `p` on the listed qubits and identity elsewhere.
    pub fn on(n: usize, qubits: &[usize], p: Pauli) -> Self {
        let mut s = Self::identity(n);
        for &q in qubits {
            s.0[q] = p;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|p| **p != Pauli::I).count()
    }

    /// Base-4 index with the first qubit most significant.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, p| 4 * acc + p.index())
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        let mut v = alloc::vec![Pauli::I; n];
        let mut rest = index;
        for slot in v.iter_mut().rev() {
            *slot = Pauli::from_index(rest & 3);
            rest >>= 2;
        }
        PauliString(v)
    }

    /// `kron(P_0, P_1, ...)` with qubit 0 as the most significant factor.
    pub fn matrix(&self) -> CMatrix {
        self.0.iter().fold(CMatrix::identity(1), |acc, p| acc.kron(&p.matrix()))
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .0
            .iter()
            .zip(&other.0)
            .filter(|(a, b)| !a.commutes_with(**b))
            .count();
        anti % 2 == 0
    }

    pub fn to_string_compact(&self) -> String {
        self.0.iter().map(|p| p.as_char()).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

// CNOT (control first) maps P_c ⊗ P_t to ± the entry below under
// conjugation. Signs are irrelevant for twirling since a global sign on the
// compensating Pauli is a global phase.
const CNOT_TABLE: [[(Pauli, Pauli); 4]; 4] = {
    use Pauli::*;
    [
        [(I, I), (I, X), (Z, Y), (Z, Z)],
        [(X, X), (X, I), (Y, Z), (Y, Y)],
        [(Y, X), (Y, I), (X, Z), (X, Y)],
        [(Z, I), (Z, X), (I, Y), (I, Z)],
    ]
};

/// `CNOT (a ⊗ b) CNOT` up to sign, control first.
pub fn cnot_conjugate(a: Pauli, b: Pauli) -> (Pauli, Pauli) {
    CNOT_TABLE[a.index()][b.index()]
}

/// Two-qubit Paulis that commute with `ZZ` and are therefore usable as a
/// twirl set for `exp(-i θ ZZ / 2)` with the same pair before and after.
pub const ZZ_TWIRL_SET: [(Pauli, Pauli); 4] = [
    (Pauli::I, Pauli::I),
    (Pauli::X, Pauli::X),
    (Pauli::Y, Pauli::Y),
    (Pauli::Z, Pauli::Z),
];

pub fn cnot_matrix() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}
