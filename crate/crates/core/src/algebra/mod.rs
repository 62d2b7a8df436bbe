//! Finite-dimensional real algebras given by structure tensors, with the
//! quaternion algebra and its canonical bases as the main instance.

mod classify;
mod quaternion;

pub use classify::{classify, ClassificationReport, ZeroDivisorSearch};
pub use quaternion::Quaternion;

use nalgebra::{Matrix3, Matrix4, Vector4};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};

/// Tolerance for identities that hold exactly in exact arithmetic.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for identities checked through floating-point compositions.
pub const COMPOSITE_TOL: f64 = 1e-10;

/// Components `H^γ_{αβ}` of the quaternion structure tensor in a canonical
/// basis, one 4×4 matrix per output index `γ` with rows `α` and columns `β`.
#[rustfmt::skip]
pub const QUATERNION_COMPONENTS: [[[f64; 4]; 4]; 4] = [
    [[1.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0]],
    [[0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]],
    [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, -1.0], [1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]],
    [[0.0, 0.0, 0.0, 1.0], [0.0, 0.0, 1.0, 0.0], [0.0, -1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]],
];

/// Multiplication tensor of a real algebra, stored dense with index order
/// `[γ][α][β]` so that `(ab)^γ = H^γ_{αβ} a^α b^β`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor", into = "RawTensor")]
pub struct StructureTensor {
    dim: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTensor {
    dim: usize,
    components: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<RawTensor> for StructureTensor {
    type Error = Error;
    fn try_from(raw: RawTensor) -> Result<Self> {
        StructureTensor::from_nested(raw.dim, &raw.components)
    }
}

impl From<StructureTensor> for RawTensor {
    fn from(t: StructureTensor) -> Self {
        RawTensor {
            dim: t.dim,
            components: t.to_nested(),
        }
    }
}

impl StructureTensor {
    /// Builds a tensor from nested `components[γ][α][β]`.
    pub fn from_nested(dim: usize, components: &[Vec<Vec<f64>>]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("structure tensor dim must be at least 1"));
        }
        ensure_len("structure tensor components", components.len(), dim)?;
        let mut data = Vec::with_capacity(dim * dim * dim);
        for (g, mat) in components.iter().enumerate() {
            ensure_len(&format!("components[{g}]"), mat.len(), dim)?;
            for (a, row) in mat.iter().enumerate() {
                ensure_len(&format!("components[{g}][{a}]"), row.len(), dim)?;
                data.extend_from_slice(row);
            }
        }
        if data.iter().any(|c| !c.is_finite()) {
            return Err(Error::validation("structure tensor has non-finite entries"));
        }
        Ok(Self { dim, data })
    }

    /// Builds a tensor from the products of basis elements:
    /// `product(α, β)` returns the coordinates of `e_α e_β`.
    pub fn from_products(dim: usize, product: impl Fn(usize, usize) -> Vec<f64>) -> Result<Self> {
        let mut nested = vec![vec![vec![0.0; dim]; dim]; dim];
        for a in 0..dim {
            for b in 0..dim {
                let p = product(a, b);
                ensure_len("basis product", p.len(), dim)?;
                for (g, c) in p.into_iter().enumerate() {
                    nested[g][a][b] = c;
                }
            }
        }
        Self::from_nested(dim, &nested)
    }

    /// The quaternion algebra in a canonical basis.
    pub fn quaternion() -> Self {
        let nested: Vec<Vec<Vec<f64>>> = QUATERNION_COMPONENTS
            .iter()
            .map(|m| m.iter().map(|r| r.to_vec()).collect())
            .collect();
        Self::from_nested(4, &nested).expect("static tensor is valid")
    }

    /// The real line `ℝ`.
    pub fn real_line() -> Self {
        Self {
            dim: 1,
            data: vec![1.0],
        }
    }

    /// The complex numbers on the basis `(1, i)`.
    pub fn complex() -> Self {
        Self::from_products(2, |a, b| match (a, b) {
            (0, 0) => vec![1.0, 0.0],
            (0, 1) | (1, 0) => vec![0.0, 1.0],
            _ => vec![-1.0, 0.0],
        })
        .expect("static tensor is valid")
    }

    /// Dual numbers on the basis `(1, e)` with `e² = 0`.
    pub fn dual_numbers() -> Self {
        Self::from_products(2, |a, b| match (a, b) {
            (0, 0) => vec![1.0, 0.0],
            (0, 1) | (1, 0) => vec![0.0, 1.0],
            _ => vec![0.0, 0.0],
        })
        .expect("static tensor is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `H^γ_{αβ}`.
    pub fn get(&self, gamma: usize, alpha: usize, beta: usize) -> f64 {
        self.data[(gamma * self.dim + alpha) * self.dim + beta]
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        let d = self.dim;
        (0..d)
            .map(|g| {
                (0..d)
                    .map(|a| (0..d).map(|b| self.get(g, a, b)).collect())
                    .collect()
            })
            .collect()
    }

    /// Standard basis element `e_β`.
    pub fn basis(&self, beta: usize) -> AlgebraElement {
        let mut c = vec![0.0; self.dim];
        c[beta] = 1.0;
        AlgebraElement(c)
    }

    /// Matrix of `x ↦ a·x` acting on coordinate columns.
    pub fn left_multiplication(&self, a: &AlgebraElement) -> Result<nalgebra::DMatrix<f64>> {
        ensure_len("algebra element", a.dim(), self.dim)?;
        let d = self.dim;
        Ok(nalgebra::DMatrix::from_fn(d, d, |g, b| {
            (0..d).map(|al| self.get(g, al, b) * a.0[al]).sum()
        }))
    }
}

/// Coordinates of an algebra element in the standard basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlgebraElement(pub Vec<f64>);

impl AlgebraElement {
    pub fn new(components: Vec<f64>) -> Self {
        Self(components)
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn to_quaternion(&self) -> Result<Quaternion> {
        ensure_len("quaternion element", self.dim(), 4)?;
        Ok(Quaternion::from_slice(&self.0))
    }
}

impl From<Quaternion> for AlgebraElement {
    fn from(q: Quaternion) -> Self {
        Self(q.to_array().to_vec())
    }
}

/// `(ab)^γ = H^γ_{αβ} a^α b^β`.
pub fn multiply(a: &AlgebraElement, b: &AlgebraElement, t: &StructureTensor) -> Result<AlgebraElement> {
    let d = t.dim();
    ensure_len("left factor", a.dim(), d)?;
    ensure_len("right factor", b.dim(), d)?;
    let mut out = vec![0.0; d];
    for (g, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (al, &ca) in a.0.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            for (be, &cb) in b.0.iter().enumerate() {
                acc += t.get(g, al, be) * ca * cb;
            }
        }
        *o = acc;
    }
    Ok(AlgebraElement(out))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjNormInverse {
    pub conjugate: AlgebraElement,
    pub norm: f64,
    pub inverse: Option<AlgebraElement>,
}

/// Quaternion involution, euclidean norm and multiplicative inverse.
pub fn conjugate_norm_inverse(a: &AlgebraElement) -> Result<ConjNormInverse> {
    if a.dim() != 4 {
        return Err(Error::validation(format!(
            "conjugation needs a quaternion (dim 4), got dim {}",
            a.dim()
        )));
    }
    let q = a.to_quaternion()?;
    Ok(ConjNormInverse {
        conjugate: q.conj().into(),
        norm: q.norm(),
        inverse: q.inverse().map(Into::into),
    })
}

/// An element `B ∈ SO(3)` selecting the canonical basis
/// `i′₀ = 1`, `i′_p = Σ_q B_pq i_q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 3]; 3]", into = "[[f64; 3]; 3]")]
pub struct CanonicalFrame {
    rotation: [[f64; 3]; 3],
}

impl TryFrom<[[f64; 3]; 3]> for CanonicalFrame {
    type Error = Error;
    fn try_from(m: [[f64; 3]; 3]) -> Result<Self> {
        Self::new(m)
    }
}

impl From<CanonicalFrame> for [[f64; 3]; 3] {
    fn from(f: CanonicalFrame) -> Self {
        f.rotation
    }
}

impl CanonicalFrame {
    /// Validates `BᵀB = 1` and `det B = +1` within [`EXACT_TOL`].
    pub fn new(rotation: [[f64; 3]; 3]) -> Result<Self> {
        let m = Matrix3::from_fn(|r, c| rotation[r][c]);
        if m.iter().any(|c| !c.is_finite()) {
            return Err(Error::validation("frame matrix has non-finite entries"));
        }
        let orth = (m.transpose() * m - Matrix3::identity()).abs().max();
        if orth > EXACT_TOL {
            return Err(Error::validation(format!(
                "frame matrix is not orthogonal (max |BᵀB - 1| = {orth:e})"
            )));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > EXACT_TOL {
            return Err(Error::validation(format!(
                "frame matrix must have determinant +1, got {det}"
            )));
        }
        Ok(Self { rotation })
    }

    pub fn identity() -> Self {
        Self {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Rotation matrix of the unit quaternion `q / |q|` (`q ≠ 0`).
    pub fn from_unit_quaternion(q: Quaternion) -> Result<Self> {
        let n = q.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::validation("rotation quaternion must be nonzero"));
        }
        let Quaternion { w, x, y, z } = q / n;
        let rotation = [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ];
        // Rounding can leave the matrix ~1e-16 off SO(3); re-validate anyway.
        Self::new(rotation)
    }

    /// Rotation by `angle` about `axis` (normalised internally).
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Result<Self> {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if n == 0.0 {
            return Err(Error::validation("rotation axis must be nonzero"));
        }
        let s = (angle / 2.0).sin() / n;
        Self::from_unit_quaternion(Quaternion::new(
            (angle / 2.0).cos(),
            axis[0] * s,
            axis[1] * s,
            axis[2] * s,
        ))
    }

    /// Uniformly distributed rotation.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let q = Quaternion::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = q.norm();
            if n > 0.1 && n <= 1.0 {
                if let Ok(f) = Self::from_unit_quaternion(q) {
                    return f;
                }
            }
        }
    }

    pub fn rotation(&self) -> [[f64; 3]; 3] {
        self.rotation
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.rotation[r][c])
    }

    pub fn trace(&self) -> f64 {
        self.rotation[0][0] + self.rotation[1][1] + self.rotation[2][2]
    }

    /// 4×4 matrix `diag(1, B)` mapping standard coordinates to coordinates in
    /// this frame's basis.
    pub fn coordinate_map(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        for r in 0..3 {
            for c in 0..3 {
                m[(r + 1, c + 1)] = self.rotation[r][c];
            }
        }
        m
    }
}

/// The canonical basis `(1, i′₁, i′₂, i′₃)` selected by a frame.
pub fn frame_basis(f: &CanonicalFrame) -> [Quaternion; 4] {
    let b = f.rotation;
    let mut basis = [Quaternion::ONE; 4];
    for p in 0..3 {
        basis[p + 1] = Quaternion::pure(b[p]);
    }
    basis
}

/// Decomposes `q` into constituents along the basis of `f`.
pub fn constituents(q: Quaternion, f: &CanonicalFrame) -> [f64; 4] {
    let c = f.coordinate_map() * Vector4::from(q.to_array());
    [c[0], c[1], c[2], c[3]]
}

/// Reassembles a quaternion from its constituents in the basis of `f`.
pub fn from_constituents(c: [f64; 4], f: &CanonicalFrame) -> Quaternion {
    let q = f.coordinate_map().transpose() * Vector4::from(c);
    Quaternion::new(q[0], q[1], q[2], q[3])
}

/// Checks that the products of `basis` under `t`, expanded in `basis`
/// itself, reproduce [`QUATERNION_COMPONENTS`] within `tol`.
pub fn is_canonical_with_tol(basis: &[AlgebraElement], t: &StructureTensor, tol: f64) -> Result<bool> {
    if t.dim() != 4 {
        return Err(Error::validation(format!(
            "canonical bases are defined for dim 4, got dim {}",
            t.dim()
        )));
    }
    ensure_len("basis", basis.len(), 4)?;
    for e in basis {
        ensure_len("basis element", e.dim(), 4)?;
    }
    let columns = Matrix4::from_fn(|r, c| basis[c].0[r]);
    let Some(inv) = columns.try_inverse() else {
        return Ok(false);
    };
    for a in 0..4 {
        for b in 0..4 {
            let prod = multiply(&basis[a], &basis[b], t)?;
            let coeffs = inv * Vector4::from_column_slice(&prod.0);
            for g in 0..4 {
                if (coeffs[g] - QUATERNION_COMPONENTS[g][a][b]).abs() > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

pub fn is_canonical(basis: &[AlgebraElement], t: &StructureTensor) -> Result<bool> {
    is_canonical_with_tol(basis, t, EXACT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn el(c: &[f64]) -> AlgebraElement {
        AlgebraElement(c.to_vec())
    }

    #[test]
    fn i_times_j_is_k() {
        let t = StructureTensor::quaternion();
        let p = multiply(&el(&[0., 1., 0., 0.]), &el(&[0., 0., 1., 0.]), &t).unwrap();
        assert_eq!(p, el(&[0., 0., 0., 1.]));
    }

    #[test]
    fn one_is_left_and_right_identity() {
        let t = StructureTensor::quaternion();
        let a = el(&[0.3, -1.2, 2.5, 7.0]);
        assert_eq!(multiply(&t.basis(0), &a, &t).unwrap(), a);
        assert_eq!(multiply(&a, &t.basis(0), &t).unwrap(), a);
    }

    #[test]
    fn product_with_conjugate_of_ones() {
        // (1+i+j+k)(1-i-j-k): cross terms cancel, real part 1+1+1+1.
        let t = StructureTensor::quaternion();
        let p = multiply(&el(&[1., 1., 1., 1.]), &el(&[1., -1., -1., -1.]), &t).unwrap();
        assert_eq!(p, el(&[4., 0., 0., 0.]));
    }

    #[test]
    fn multiply_rejects_dimension_mismatch() {
        let t = StructureTensor::quaternion();
        let err = multiply(&el(&[1., 0.]), &el(&[1., 0., 0., 0.]), &t).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn tensor_agrees_with_hamilton_product() {
        let t = StructureTensor::quaternion();
        let a = Quaternion::new(0.1, -0.7, 1.9, 0.4);
        let b = Quaternion::new(-2.0, 0.3, 0.25, -1.5);
        let p = multiply(&a.into(), &b.into(), &t).unwrap().to_quaternion().unwrap();
        assert!(p.dist(a * b) < 1e-14);
    }

    #[test]
    fn conjugate_norm_inverse_examples() {
        let r = conjugate_norm_inverse(&el(&[1., 2., 0., 0.])).unwrap();
        assert_eq!(r.conjugate, el(&[1., -2., 0., 0.]));
        let r = conjugate_norm_inverse(&el(&[0., 1., 0., 0.])).unwrap();
        assert_eq!(r.inverse, Some(el(&[0., -1., 0., 0.])));
        let r = conjugate_norm_inverse(&el(&[1., 1., 1., 1.])).unwrap();
        assert_eq!(r.norm, 2.0);
        assert_eq!(r.inverse, Some(el(&[0.25, -0.25, -0.25, -0.25])));
        let r = conjugate_norm_inverse(&el(&[0., 0., 0., 0.])).unwrap();
        assert_eq!(r.inverse, None);
        assert!(conjugate_norm_inverse(&el(&[1., 0.])).is_err());
    }

    #[test]
    fn identity_frame_gives_standard_basis() {
        assert_eq!(frame_basis(&CanonicalFrame::identity()), Quaternion::BASIS);
    }

    #[test]
    fn half_turn_about_third_axis() {
        let f = CanonicalFrame::new([[-1., 0., 0.], [0., -1., 0.], [0., 0., 1.]]).unwrap();
        let basis = frame_basis(&f);
        assert_eq!(basis, [Quaternion::ONE, -Quaternion::I, -Quaternion::J, Quaternion::K]);
        let els: Vec<_> = basis.iter().map(|&q| q.into()).collect();
        assert!(is_canonical(&els, &StructureTensor::quaternion()).unwrap());
    }

    #[test]
    fn improper_matrix_is_rejected() {
        let err = CanonicalFrame::new([[1., 0., 0.], [0., 1., 0.], [0., 0., -1.]]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(CanonicalFrame::new([[1., 0.1, 0.], [0., 1., 0.], [0., 0., 1.]]).is_err());
    }

    #[test]
    fn swapped_basis_is_not_canonical() {
        let t = StructureTensor::quaternion();
        let std: Vec<_> = Quaternion::BASIS.iter().map(|&q| q.into()).collect();
        assert!(is_canonical(&std, &t).unwrap());
        let swapped = vec![std[0].clone(), std[2].clone(), std[1].clone(), std[3].clone()];
        assert!(!is_canonical(&swapped, &t).unwrap());
    }

    #[test]
    fn degenerate_basis_is_not_canonical() {
        let t = StructureTensor::quaternion();
        let b = vec![t.basis(0), t.basis(1), t.basis(1), t.basis(3)];
        assert!(!is_canonical(&b, &t).unwrap());
    }

    #[test]
    fn random_frames_give_canonical_bases() {
        let t = StructureTensor::quaternion();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let f = CanonicalFrame::random(&mut rng);
            let b: Vec<_> = frame_basis(&f).iter().map(|&q| q.into()).collect();
            assert!(is_canonical(&b, &t).unwrap());
        }
    }

    #[test]
    fn constituents_round_trip() {
        let f = CanonicalFrame::from_axis_angle([1.0, 2.0, -0.5], 0.9).unwrap();
        let q = Quaternion::new(0.5, -1.0, 2.0, 3.0);
        let c = constituents(q, &f);
        let basis = frame_basis(&f);
        let rebuilt: Quaternion = (0..4).map(|b| basis[b] * c[b]).sum();
        assert!(rebuilt.dist(q) < 1e-14);
        assert!(from_constituents(c, &f).dist(q) < 1e-14);
    }

    #[test]
    fn tensor_json_layout() {
        let t = StructureTensor::dual_numbers();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"dim":2,"components":[[[1.0,0.0],[0.0,0.0]],[[0.0,1.0],[1.0,0.0]]]}"#);
        let back: StructureTensor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<StructureTensor>(r#"{"dim":2,"components":[[[1.0]]]}"#).is_err());
    }
}
