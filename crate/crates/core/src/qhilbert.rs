//! Finite-dimensional left quaternionic Hilbert spaces `ℍⁿ`.
//!
//! Scalars act on the left, `(aφ)_j = a φ_j`. The hermitian product is
//! `⟨φ|ψ⟩ = Σ_j φ_j conj(ψ_j)`, which reduces to `a b̄` for `n = 1` and is
//! left homogeneous in its first slot. Left-linear operators are stored as
//! quaternion matrices acting by right contraction,
//! `(Fφ)_j = Σ_k φ_k M[k][j]`, so `F(aφ) = aF(φ)` holds identically.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::Quaternion;
use crate::error::{ensure_len, Error, Result};

/// A vector of `ℍⁿ`, serialized as `[[w,x,y,z], ...]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Quaternion>", into = "Vec<Quaternion>")]
pub struct QuaternionTuple(Vec<Quaternion>);

impl TryFrom<Vec<Quaternion>> for QuaternionTuple {
    type Error = Error;
    fn try_from(v: Vec<Quaternion>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<QuaternionTuple> for Vec<Quaternion> {
    fn from(t: QuaternionTuple) -> Self {
        t.0
    }
}

impl QuaternionTuple {
    pub fn new(entries: Vec<Quaternion>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::validation("quaternion tuple must have at least one entry"));
        }
        if entries.iter().any(|q| !q.is_finite()) {
            return Err(Error::validation("quaternion tuple has non-finite entries"));
        }
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Quaternion::ZERO; n.max(1)])
    }

    /// The standard basis vector `e_k` of `ℍⁿ`.
    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = vec![Quaternion::ZERO; n];
        v[k] = Quaternion::ONE;
        Self(v)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| random_quaternion(rng)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.0
    }

    /// `(aφ)_j = a φ_j`.
    pub fn scale_left(&self, a: Quaternion) -> Self {
        Self(self.0.iter().map(|&q| a * q).collect())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|q| *q == Quaternion::ZERO)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        ensure_len("tuple", other.len(), self.len())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(&a, &b)| a + b).collect()))
    }

    pub fn dist(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl std::ops::Index<usize> for QuaternionTuple {
    type Output = Quaternion;
    fn index(&self, i: usize) -> &Quaternion {
        &self.0[i]
    }
}

pub(crate) fn random_quaternion<R: Rng + ?Sized>(rng: &mut R) -> Quaternion {
    Quaternion::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
}

/// Matrix of a left-linear operator; `entries[k][j]` couples input index
/// `k` to output index `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Quaternion>>", into = "Vec<Vec<Quaternion>>")]
pub struct QuaternionMatrix {
    n: usize,
    entries: Vec<Quaternion>,
}

impl TryFrom<Vec<Vec<Quaternion>>> for QuaternionMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<Quaternion>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<QuaternionMatrix> for Vec<Vec<Quaternion>> {
    fn from(m: QuaternionMatrix) -> Self {
        m.rows()
    }
}

impl QuaternionMatrix {
    pub fn from_rows(rows: Vec<Vec<Quaternion>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::validation("operator matrix must be at least 1×1"));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (k, row) in rows.into_iter().enumerate() {
            ensure_len(&format!("operator row {k}"), row.len(), n)?;
            entries.extend(row);
        }
        if entries.iter().any(|q| !q.is_finite()) {
            return Err(Error::validation("operator matrix has non-finite entries"));
        }
        Ok(Self { n, entries })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Quaternion) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for k in 0..n {
            for j in 0..n {
                entries.push(f(k, j));
            }
        }
        Self { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |k, j| if k == j { Quaternion::ONE } else { Quaternion::ZERO })
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| Quaternion::ZERO)
    }

    /// `diag(q, …, q)`, i.e. `φ ↦ φ q` entrywise.
    pub fn scalar(n: usize, q: Quaternion) -> Self {
        Self::from_fn(n, |k, j| if k == j { q } else { Quaternion::ZERO })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let entries = (0..n * n).map(|_| random_quaternion(rng)).collect();
        Self { n, entries }
    }

    /// `(A - A†)/2` for a random `A`.
    pub fn random_antihermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self::random(n, rng).antihermitian_part()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, j: usize) -> Quaternion {
        self.entries[k * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<Quaternion>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn antihermitian_part(&self) -> Self {
        let adj = adjoint(self);
        Self::from_fn(self.n, |k, j| (self.get(k, j) - adj.get(k, j)) * 0.5)
    }

    pub fn max_dist(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| a.dist(b))
            .fold(0.0, f64::max)
    }

    pub fn is_antihermitian(&self, tol: f64) -> bool {
        let adj = adjoint(self);
        self.entries
            .iter()
            .zip(&adj.entries)
            .all(|(&a, &b)| (a + b).norm() <= tol)
    }
}

/// `⟨φ|ψ⟩ = Σ_j φ_j conj(ψ_j)`.
pub fn inner(phi: &QuaternionTuple, psi: &QuaternionTuple) -> Result<Quaternion> {
    ensure_len("inner product right argument", psi.len(), phi.len())?;
    Ok(phi.0.iter().zip(&psi.0).map(|(&a, &b)| a * b.conj()).sum())
}

/// `(Fφ)_j = Σ_k φ_k M[k][j]`.
pub fn apply(f: &QuaternionMatrix, phi: &QuaternionTuple) -> Result<QuaternionTuple> {
    ensure_len("operator argument", phi.len(), f.dim())?;
    let n = f.dim();
    Ok(QuaternionTuple(
        (0..n)
            .map(|j| (0..n).map(|k| phi.0[k] * f.get(k, j)).sum())
            .collect(),
    ))
}

/// Conjugate transpose, the unique operator with `⟨φ|Fψ⟩ = ⟨F†φ|ψ⟩`.
pub fn adjoint(f: &QuaternionMatrix) -> QuaternionMatrix {
    QuaternionMatrix::from_fn(f.dim(), |k, j| f.get(j, k).conj())
}

/// `⟨φ|F(φ)⟩`; purely imaginary when `F` is antihermitian.
pub fn expectation(f: &QuaternionMatrix, phi: &QuaternionTuple) -> Result<Quaternion> {
    inner(phi, &apply(f, phi)?)
}
