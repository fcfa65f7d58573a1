//! Test-only oracles shared by the integration and acceptance suites.
#![allow(dead_code)]

use num_complex::Complex64;

use fewshot_qaoa::graph::{generate_graph, WeightedGraph};
use fewshot_qaoa::rng::seeded;

/// Seed of the fixed 20-vertex instance (16 active vertices) used by the
/// optimizer acceptance runs.
pub const INSTANCE_SEED: u64 = 4;

pub fn instance() -> WeightedGraph {
    let g = generate_graph(20, &mut seeded(INSTANCE_SEED)).unwrap();
    assert_eq!(g.num_qubits(), 16);
    g
}

/// Dense complex square matrix, row-major.
#[derive(Clone, Debug)]
pub struct Dense {
    pub dim: usize,
    pub a: Vec<Complex64>,
}

impl Dense {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, a: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.a[k * dim + k] = Complex64::new(1.0, 0.0);
        }
        m
    }

    fn from_real(rows: &[[f64; 2]; 2]) -> Self {
        let mut m = Self::zeros(2);
        for (r, row) in rows.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                m.a[r * 2 + c] = Complex64::new(x, 0.0);
            }
        }
        m
    }

    pub fn kron(&self, other: &Dense) -> Dense {
        let d = self.dim * other.dim;
        let mut m = Dense::zeros(d);
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let x = self.a[r1 * self.dim + c1];
                for r2 in 0..other.dim {
                    for c2 in 0..other.dim {
                        m.a[(r1 * other.dim + r2) * d + c1 * other.dim + c2] = x * other.a[r2 * other.dim + c2];
                    }
                }
            }
        }
        m
    }

    pub fn mul(&self, other: &Dense) -> Dense {
        let d = self.dim;
        let mut m = Dense::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let x = self.a[r * d + k];
                if x == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..d {
                    m.a[r * d + c] += x * other.a[k * d + c];
                }
            }
        }
        m
    }

    pub fn add_scaled(&mut self, other: &Dense, s: Complex64) {
        for (x, y) in self.a.iter_mut().zip(&other.a) {
            *x += s * y;
        }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.a[r * self.dim + c] * v[c]).sum())
            .collect()
    }

    fn norm1(&self) -> f64 {
        (0..self.dim)
            .map(|c| (0..self.dim).map(|r| self.a[r * self.dim + c].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `exp(s * self)` by scaling and squaring a truncated Taylor series.
    pub fn expm(&self, s: Complex64) -> Dense {
        let mut a = self.clone();
        for x in a.a.iter_mut() {
            *x *= s;
        }
        let mut squarings = 0;
        while a.norm1() > 0.25 {
            for x in a.a.iter_mut() {
                *x *= 0.5;
            }
            squarings += 1;
        }
        let mut result = Dense::identity(self.dim);
        let mut term = Dense::identity(self.dim);
        for k in 1..=24 {
            term = term.mul(&a);
            for x in term.a.iter_mut() {
                *x /= k as f64;
            }
            result.add_scaled(&term, Complex64::new(1.0, 0.0));
        }
        for _ in 0..squarings {
            result = result.mul(&result);
        }
        result
    }
}

/// Pauli `op` on `qubit` of an `n`-qubit register, qubit 0 being the least
/// significant bit of the basis index.
pub fn pauli_on(op: &Dense, qubit: usize, n: usize) -> Dense {
    let mut m = Dense::identity(1);
    for k in (0..n).rev() {
        let factor = if k == qubit { op.clone() } else { Dense::identity(2) };
        m = m.kron(&factor);
    }
    m
}

pub fn pauli_x() -> Dense {
    Dense::from_real(&[[0.0, 1.0], [1.0, 0.0]])
}

pub fn pauli_z() -> Dense {
    Dense::from_real(&[[1.0, 0.0], [0.0, -1.0]])
}

/// `C(gamma, beta)` built from dense Kronecker-product operators and matrix
/// exponentials: `H = sum w/2 (1 + Z_i Z_j)`, `B = sum X_k`,
/// `psi = exp(-i beta B) exp(-i gamma H) |+>^n`.
pub fn dense_expectation(g: &WeightedGraph, gamma: f64, beta: f64) -> f64 {
    let n = g.num_qubits();
    let dim = 1usize << n;
    let mut h = Dense::zeros(dim);
    for (i, j, w) in g.qubit_edges() {
        let zz = pauli_on(&pauli_z(), i, n).mul(&pauli_on(&pauli_z(), j, n));
        h.add_scaled(&Dense::identity(dim), Complex64::new(0.5 * w, 0.0));
        h.add_scaled(&zz, Complex64::new(0.5 * w, 0.0));
    }
    let mut b = Dense::zeros(dim);
    for k in 0..n {
        b.add_scaled(&pauli_on(&pauli_x(), k, n), Complex64::new(1.0, 0.0));
    }
    let plus = vec![Complex64::new((dim as f64).sqrt().recip(), 0.0); dim];
    let i = Complex64::new(0.0, 1.0);
    let psi = b.expm(-i * beta).apply(&h.expm(-i * gamma).apply(&plus));
    let hpsi = h.apply(&psi);
    psi.iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Single unit edge at depth one.
pub fn single_edge_closed_form(gamma: f64, beta: f64) -> f64 {
    0.5 * (1.0 + gamma.sin() * (4.0 * beta).sin())
}
