//! Realification of `ℍⁿ` and its flat hyperkähler structure.
//!
//! A canonical frame fixes the basis `(1, i′₁, i′₂, i′₃)` used to split
//! each quaternionic entry into four real coordinates. In that basis the
//! hermitian product decomposes as
//!
//! ```text
//! ⟨u|v⟩ = g(u, v)·1 + Σ_p ω^p(u, v)·i′_p
//! ```
//!
//! and the complex structures `I_p` are realified left multiplication by
//! `i′_p`. With these conventions `ω^p(u, v) = g(u, I_p v) = -g(I_p u, v)`
//! and `I₁I₂ = I₃`.

use nalgebra::{DMatrix, DVector, LU, Dyn};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{constituents, frame_basis, from_constituents, CanonicalFrame, Quaternion};
use crate::error::{ensure_len, Error, Result};
use crate::numdiff;
use crate::qhilbert::{apply, inner, QuaternionMatrix, QuaternionTuple};

/// Coordinates in `ℝ^{4n}`, four per quaternionic entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RealPoint(Vec<f64>);

impl TryFrom<Vec<f64>> for RealPoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RealPoint> for Vec<f64> {
    fn from(p: RealPoint) -> Self {
        p.0
    }
}

impl RealPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || !coords.len().is_multiple_of(4) {
            return Err(Error::validation(format!(
                "real point length must be a positive multiple of 4, got {}",
                coords.len()
            )));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Quaternionic dimension `n`.
    pub fn quaternionic_dim(&self) -> usize {
        self.0.len() / 4
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }
}

/// A tangent vector attached to a point.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    pub point: RealPoint,
    pub vector: Vec<f64>,
}

impl FieldSample {
    pub fn new(point: RealPoint, vector: Vec<f64>) -> Result<Self> {
        ensure_len("field vector", vector.len(), point.len())?;
        Ok(Self { point, vector })
    }

    pub fn norm(&self) -> f64 {
        self.vector.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

pub fn realify(phi: &QuaternionTuple, f: &CanonicalFrame) -> RealPoint {
    RealPoint(
        phi.entries()
            .iter()
            .flat_map(|&q| constituents(q, f))
            .collect(),
    )
}

pub fn derealify(p: &RealPoint, f: &CanonicalFrame) -> QuaternionTuple {
    let entries = p
        .0
        .chunks(4)
        .map(|c| from_constituents([c[0], c[1], c[2], c[3]], f))
        .collect();
    QuaternionTuple::new(entries).expect("real point has at least one block")
}

fn tuple_from_coords(c: &[f64], f: &CanonicalFrame) -> QuaternionTuple {
    derealify(&RealPoint(c.to_vec()), f)
}

/// Metric, symplectic triple and complex structures of `ℍⁿ` realified in a
/// canonical frame. All matrices are `4n × 4n` and constant in space.
#[derive(Clone, Debug)]
pub struct HyperkahlerStructure {
    n: usize,
    frame: CanonicalFrame,
    g: DMatrix<f64>,
    omega: [DMatrix<f64>; 3],
    cplx: [DMatrix<f64>; 3],
    g_lu: LU<f64, Dyn, Dyn>,
    omega_t_lu: [LU<f64, Dyn, Dyn>; 3],
}

pub fn build_structure(n: usize, f: &CanonicalFrame) -> Result<HyperkahlerStructure> {
    if n == 0 {
        return Err(Error::validation("quaternionic dimension must be at least 1"));
    }
    let dim = 4 * n;
    let unit = |c: usize| {
        let mut v = vec![0.0; dim];
        v[c] = 1.0;
        tuple_from_coords(&v, f)
    };
    let units: Vec<QuaternionTuple> = (0..dim).map(unit).collect();

    let mut forms = [(); 4].map(|_| DMatrix::zeros(dim, dim));
    for a in 0..dim {
        for b in 0..dim {
            let c = constituents(inner(&units[a], &units[b])?, f);
            for (form, value) in forms.iter_mut().zip(c) {
                form[(a, b)] = value;
            }
        }
    }
    let basis = frame_basis(f);
    let cplx = [1, 2, 3].map(|p| {
        let mut m = DMatrix::zeros(dim, dim);
        for (c, u) in units.iter().enumerate() {
            let image = realify(&u.scale_left(basis[p]), f);
            m.set_column(c, &DVector::from_column_slice(image.coords()));
        }
        m
    });
    let [g, o1, o2, o3] = forms;
    let omega = [o1, o2, o3];
    let g_lu = g.clone().lu();
    let omega_t_lu = [0, 1, 2].map(|p| omega[p].transpose().lu());
    Ok(HyperkahlerStructure {
        n,
        frame: *f,
        g,
        omega,
        cplx,
        g_lu,
        omega_t_lu,
    })
}

impl HyperkahlerStructure {
    pub fn standard(n: usize) -> Result<Self> {
        build_structure(n, &CanonicalFrame::identity())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Real dimension `4n`.
    pub fn dim(&self) -> usize {
        4 * self.n
    }

    pub fn frame(&self) -> &CanonicalFrame {
        &self.frame
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// `ω^p` for `p ∈ {1, 2, 3}`.
    pub fn omega(&self, p: usize) -> &DMatrix<f64> {
        &self.omega[p - 1]
    }

    /// `I_p` for `p ∈ {1, 2, 3}`.
    pub fn complex_structure(&self, p: usize) -> &DMatrix<f64> {
        &self.cplx[p - 1]
    }

    pub fn g(&self, u: &[f64], v: &[f64]) -> f64 {
        bilinear(&self.g, u, v)
    }

    pub fn omega_form(&self, p: usize, u: &[f64], v: &[f64]) -> f64 {
        bilinear(&self.omega[p - 1], u, v)
    }

    pub fn realify(&self, phi: &QuaternionTuple) -> Result<RealPoint> {
        ensure_len("state", phi.len(), self.n)?;
        Ok(realify(phi, &self.frame))
    }

    pub fn derealify(&self, p: &RealPoint) -> Result<QuaternionTuple> {
        ensure_len("point", p.len(), self.dim())?;
        Ok(derealify(p, &self.frame))
    }

    /// Solves `g(x, ·) = covector`.
    pub fn g_sharp(&self, covector: &[f64]) -> Result<Vec<f64>> {
        ensure_len("covector", covector.len(), self.dim())?;
        solve(&self.g_lu, covector, "metric")
    }

    /// Solves `ω^p(x, ·) = covector` (no summation over `p`).
    pub fn omega_sharp(&self, p: usize, covector: &[f64]) -> Result<Vec<f64>> {
        ensure_len("covector", covector.len(), self.dim())?;
        solve(&self.omega_t_lu[p - 1], covector, "symplectic form")
    }

    /// The hyperfield of `F` in this structure's frame.
    pub fn hyperfield(&self, f: &QuaternionMatrix, p: &RealPoint) -> Result<FieldSample> {
        ensure_len("point", p.len(), self.dim())?;
        hyperfield_in(f, p, &self.frame)
    }

    /// Largest deviation from the hyperkähler identities: `g` symmetric,
    /// `ω^p` antisymmetric, `I_p² = -1`, `I₁I₂ = I₃`,
    /// `g(I_p u, I_p v) = g(u, v)` and `ω^p(u, v) = g(u, I_p v)`.
    pub fn invariant_defect(&self) -> f64 {
        let id = DMatrix::<f64>::identity(self.dim(), self.dim());
        let mut worst = (&self.g - self.g.transpose()).amax();
        for p in 0..3 {
            let (w, i) = (&self.omega[p], &self.cplx[p]);
            worst = worst
                .max((w + w.transpose()).amax())
                .max((i * i + &id).amax())
                .max((i.transpose() * &self.g * i - &self.g).amax())
                .max((w - &self.g * i).amax());
        }
        worst.max((&self.cplx[0] * &self.cplx[1] - &self.cplx[2]).amax())
    }

    /// Matrices as nested JSON arrays under `g`, `omega1..3`, `cplx1..3`.
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "n": self.n, "g": matrix_rows(&self.g) });
        for p in 0..3 {
            v[format!("omega{}", p + 1)] = json!(matrix_rows(&self.omega[p]));
            v[format!("cplx{}", p + 1)] = json!(matrix_rows(&self.cplx[p]));
        }
        v
    }
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn bilinear(m: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let (u, v) = (DVector::from_column_slice(u), DVector::from_column_slice(v));
    u.dot(&(m * v))
}

fn solve(lu: &LU<f64, Dyn, Dyn>, rhs: &[f64], what: &str) -> Result<Vec<f64>> {
    let x = lu
        .solve(&DVector::from_column_slice(rhs))
        .ok_or_else(|| Error::numeric(format!("{what} is singular")))?;
    if x.iter().any(|c| !c.is_finite()) {
        return Err(Error::numeric(format!("non-finite solution against the {what}")));
    }
    Ok(x.iter().copied().collect())
}

/// Operator norm of `Σ_{p,q} B_pq I^dst_q · df · I^src_p − df`; zero iff
/// `df` is quaternionic for the rotation `B`.
pub fn regularity_residual(
    df: &DMatrix<f64>,
    b: &CanonicalFrame,
    src: &HyperkahlerStructure,
    dst: &HyperkahlerStructure,
) -> Result<f64> {
    if df.nrows() != dst.dim() || df.ncols() != src.dim() {
        return Err(Error::validation(format!(
            "differential is {}×{}, expected {}×{} (target × source)",
            df.nrows(),
            df.ncols(),
            dst.dim(),
            src.dim()
        )));
    }
    let rot = b.rotation();
    let mut twisted = -df.clone();
    for (p, row) in rot.iter().enumerate() {
        let right = df * &src.cplx[p];
        for (q, &coef) in row.iter().enumerate() {
            if coef != 0.0 {
                twisted += coef * (&dst.cplx[q] * &right);
            }
        }
    }
    Ok(twisted.singular_values().max())
}

/// Field `f` with `g(f, u) = df₀(u)`, given the differential of the main
/// generator at `p`.
pub fn hyperhamiltonian_field(
    f0_grad: impl Fn(&RealPoint) -> Result<Vec<f64>>,
    s: &HyperkahlerStructure,
    p: &RealPoint,
) -> Result<FieldSample> {
    ensure_len("point", p.len(), s.dim())?;
    let d = f0_grad(p)?;
    FieldSample::new(p.clone(), s.g_sharp(&d)?)
}

/// [`hyperhamiltonian_field`] with the differential taken by central
/// differences of `f0`.
pub fn hyperhamiltonian_field_fd(
    f0: impl Fn(&[f64]) -> f64,
    s: &HyperkahlerStructure,
    p: &RealPoint,
    step: f64,
) -> Result<FieldSample> {
    hyperhamiltonian_field(|q| numdiff::gradient(&f0, q.coords(), step), s, p)
}

/// Solves `df_p(u) = ω^p(f_p, u)` for each `p` from the differentials of the
/// three imaginary constituents at `p`.
pub fn decompose_from_gradients(
    grads: [Vec<f64>; 3],
    s: &HyperkahlerStructure,
    p: &RealPoint,
) -> Result<[FieldSample; 3]> {
    ensure_len("point", p.len(), s.dim())?;
    let [g1, g2, g3] = grads;
    Ok([
        FieldSample::new(p.clone(), s.omega_sharp(1, &g1)?)?,
        FieldSample::new(p.clone(), s.omega_sharp(2, &g2)?)?,
        FieldSample::new(p.clone(), s.omega_sharp(3, &g3)?)?,
    ])
}

/// Real-valued map on realified coordinates.
pub type ScalarMap = dyn Fn(&[f64]) -> f64;

/// Decomposition of a hyperhamiltonian field into its three symplectic
/// pieces; constituent differentials by central differences with `step`.
pub fn decompose_field(
    constituents: [&ScalarMap; 3],
    s: &HyperkahlerStructure,
    p: &RealPoint,
    step: f64,
) -> Result<[FieldSample; 3]> {
    let grads = [
        numdiff::gradient(constituents[0], p.coords(), step)?,
        numdiff::gradient(constituents[1], p.coords(), step)?,
        numdiff::gradient(constituents[2], p.coords(), step)?,
    ];
    decompose_from_gradients(grads, s, p)
}

/// Componentwise sum of the decomposed pieces.
pub fn sum_fields(parts: &[FieldSample]) -> Vec<f64> {
    let mut out = vec![0.0; parts.first().map_or(0, |f| f.vector.len())];
    for f in parts {
        for (o, v) in out.iter_mut().zip(&f.vector) {
            *o += v;
        }
    }
    out
}

/// Weight of the expectation in the generating map of an operator.
///
/// Each `ω^p`-sharp of the `p`-th constituent of `⟨φ|Fφ⟩` is twice the
/// hyperfield of `F`, so the three pieces sum to the hyperfield only when
/// the imaginary part of the generating map is `⟨φ|Fφ⟩ / 6`.
pub const GENERATING_MAP_WEIGHT: f64 = 1.0 / 6.0;

/// Imaginary constituent `p ∈ {1, 2, 3}` of the generating map of `F` in
/// `frame`, as a function on realified coordinates.
pub fn generating_constituent(
    f: &QuaternionMatrix,
    frame: &CanonicalFrame,
    p: usize,
) -> impl Fn(&[f64]) -> f64 {
    let (f, frame) = (f.clone(), *frame);
    move |x: &[f64]| {
        let phi = tuple_from_coords(x, &frame);
        let e = crate::qhilbert::expectation(&f, &phi).expect("dimension checked by caller");
        GENERATING_MAP_WEIGHT * constituents(e, &frame)[p]
    }
}

/// Realification of `-F(φ)` at `p`, standard frame.
pub fn hyperfield(f: &QuaternionMatrix, p: &RealPoint) -> Result<FieldSample> {
    hyperfield_in(f, p, &CanonicalFrame::identity())
}

pub fn hyperfield_in(f: &QuaternionMatrix, p: &RealPoint, frame: &CanonicalFrame) -> Result<FieldSample> {
    ensure_len("point", p.len(), 4 * f.dim())?;
    let image = apply(f, &derealify(p, frame))?.scale_left(-Quaternion::ONE);
    FieldSample::new(p.clone(), realify(&image, frame).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Quaternion as Q;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn half_turn() -> CanonicalFrame {
        CanonicalFrame::new([[-1., 0., 0.], [0., -1., 0.], [0., 0., 1.]]).unwrap()
    }

    fn pt(c: &[f64]) -> RealPoint {
        RealPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn realify_examples() {
        let id = CanonicalFrame::identity();
        let phi = QuaternionTuple::new(vec![Q::new(1., 2., 0., 0.)]).unwrap();
        assert_eq!(realify(&phi, &id).coords(), &[1., 2., 0., 0.]);
        let phi = QuaternionTuple::new(vec![Q::I, Q::J]).unwrap();
        assert_eq!(realify(&phi, &id).coords(), &[0., 1., 0., 0., 0., 0., 1., 0.]);
        let phi = QuaternionTuple::new(vec![Q::I]).unwrap();
        assert_eq!(realify(&phi, &half_turn()).coords(), &[0., -1., 0., 0.]);
    }

    #[test]
    fn derealify_inverts_realify() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = CanonicalFrame::random(&mut rng);
        let phi = QuaternionTuple::random(3, &mut rng);
        let back = derealify(&realify(&phi, &f), &f);
        assert!(back.dist(&phi) < 1e-14);
    }

    #[test]
    fn real_point_length_is_checked() {
        assert!(RealPoint::new(vec![1.0; 5]).is_err());
        assert!(RealPoint::new(vec![]).is_err());
    }

    #[test]
    fn standard_structure_n1() {
        let s = HyperkahlerStructure::standard(1).unwrap();
        assert_eq!(s.metric(), &DMatrix::identity(4, 4));
        let i1 = s.complex_structure(1);
        assert_eq!(i1.column(0).iter().copied().collect::<Vec<_>>(), vec![0., 1., 0., 0.]);
        assert_eq!(i1.column(1).iter().copied().collect::<Vec<_>>(), vec![-1., 0., 0., 0.]);
        assert_eq!(s.omega_form(1, &[0., 1., 0., 0.], &[1., 0., 0., 0.]), 1.0);
    }

    #[test]
    fn hyperkahler_identities_hold_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            assert_eq!(HyperkahlerStructure::standard(n).unwrap().invariant_defect(), 0.0);
            let s = build_structure(n, &CanonicalFrame::random(&mut rng)).unwrap();
            assert!(s.invariant_defect() < 1e-12, "{}", s.invariant_defect());
        }
    }

    #[test]
    fn omega_convention_on_basis_pairs() {
        let s = build_structure(2, &half_turn()).unwrap();
        let dim = s.dim();
        for p in 1..=3 {
            for a in 0..dim {
                for b in 0..dim {
                    let mut u = vec![0.0; dim];
                    let mut v = vec![0.0; dim];
                    u[a] = 1.0;
                    v[b] = 1.0;
                    let iv: Vec<f64> = (s.complex_structure(p) * DVector::from_column_slice(&v))
                        .iter()
                        .copied()
                        .collect();
                    assert!((s.omega_form(p, &u, &v) - s.g(&u, &iv)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn frame_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let std = HyperkahlerStructure::standard(2).unwrap();
        for _ in 0..10 {
            let b = CanonicalFrame::random(&mut rng);
            let s = build_structure(2, &b).unwrap();
            let (phi, psi) = (QuaternionTuple::random(2, &mut rng), QuaternionTuple::random(2, &mut rng));
            let (u, v) = (s.realify(&phi).unwrap(), s.realify(&psi).unwrap());
            let (u0, v0) = (std.realify(&phi).unwrap(), std.realify(&psi).unwrap());
            assert!((s.g(u.coords(), v.coords()) - std.g(u0.coords(), v0.coords())).abs() < 1e-12);
            let rot = b.rotation();
            for p in 1..=3 {
                let rotated: f64 = (1..=3)
                    .map(|q| rot[p - 1][q - 1] * std.omega_form(q, u0.coords(), v0.coords()))
                    .sum();
                assert!((s.omega_form(p, u.coords(), v.coords()) - rotated).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn regularity_of_identity_map() {
        let s = HyperkahlerStructure::standard(1).unwrap();
        let id = DMatrix::identity(4, 4);
        assert!(regularity_residual(&id, &half_turn(), &s, &s).unwrap() <= 1e-12);
        let r = regularity_residual(&id, &CanonicalFrame::identity(), &s, &s).unwrap();
        assert!((r - 4.0).abs() < 1e-9);
        let zero = DMatrix::zeros(4, 4);
        assert_eq!(regularity_residual(&zero, &CanonicalFrame::identity(), &s, &s).unwrap(), 0.0);
        let s2 = HyperkahlerStructure::standard(2).unwrap();
        assert!(regularity_residual(&id, &half_turn(), &s2, &s).is_err());
    }

    #[test]
    fn hyperhamiltonian_examples() {
        let s = HyperkahlerStructure::standard(1).unwrap();
        let p = pt(&[0.3, -1.0, 2.0, 0.5]);
        let f = hyperhamiltonian_field_fd(|x| x[0], &s, &p, 1e-5).unwrap();
        assert!(f.vector.iter().zip([1., 0., 0., 0.]).all(|(a, b)| (a - b).abs() < 1e-9));
        let f = hyperhamiltonian_field_fd(|_| 7.0, &s, &p, 1e-5).unwrap();
        assert!(f.vector.iter().all(|c| c.abs() < 1e-12));
        let half_sq = |x: &[f64]| x.iter().map(|c| c * c).sum::<f64>() / 2.0;
        let f = hyperhamiltonian_field_fd(half_sq, &s, &p, 1e-5).unwrap();
        assert!(f.vector.iter().zip(p.coords()).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn hyperfield_examples() {
        let m = QuaternionMatrix::scalar(1, Q::I);
        assert_eq!(hyperfield(&m, &pt(&[1., 0., 0., 0.])).unwrap().vector, vec![0., -1., 0., 0.]);
        assert_eq!(hyperfield(&m, &pt(&[0., 0., 1., 0.])).unwrap().vector, vec![0., 0., 0., 1.]);
        let zero = QuaternionMatrix::zeros(1);
        assert!(hyperfield(&zero, &pt(&[0.2, 0.1, 3., 1.])).unwrap().vector.iter().all(|&c| c == 0.0));
        assert!(hyperfield(&m, &pt(&[1., 0., 0., 0., 0., 0., 0., 0.])).is_err());
    }

    #[test]
    fn constant_constituents_give_zero_fields() {
        let s = HyperkahlerStructure::standard(1).unwrap();
        let c = |_: &[f64]| 2.5;
        let parts = decompose_field([&c, &c, &c], &s, &pt(&[1., 2., 3., 4.]), 1e-5).unwrap();
        assert!(parts.iter().all(|f| f.vector.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn linear_constituents_give_constant_fields() {
        let s = HyperkahlerStructure::standard(1).unwrap();
        let lin = |k: usize| move |x: &[f64]| x[k];
        let (f1, f2, f3) = (lin(1), lin(2), lin(3));
        let at = |p: &RealPoint| decompose_field([&f1, &f2, &f3], &s, p, 1e-5).unwrap();
        let a = at(&pt(&[1., 0., 0., 0.]));
        let b = at(&pt(&[-3., 2., 0.5, 7.]));
        for p in 0..3 {
            let mut e = vec![0.0; 4];
            e[p + 1] = 1.0;
            let exact = s.omega_sharp(p + 1, &e).unwrap();
            for c in 0..4 {
                assert!((a[p].vector[c] - exact[c]).abs() < 1e-9);
                assert!((b[p].vector[c] - exact[c]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn operator_decomposition_at_unit() {
        let s = HyperkahlerStructure::standard(1).unwrap();
        let m = QuaternionMatrix::scalar(1, Q::I);
        let id = CanonicalFrame::identity();
        let (c1, c2, c3) = (
            generating_constituent(&m, &id, 1),
            generating_constituent(&m, &id, 2),
            generating_constituent(&m, &id, 3),
        );
        let parts = decompose_field([&c1, &c2, &c3], &s, &pt(&[1., 0., 0., 0.]), 1e-5).unwrap();
        let total = sum_fields(&parts);
        for (t, e) in total.iter().zip([0., -1., 0., 0.]) {
            assert!((t - e).abs() < 1e-8, "{total:?}");
        }
    }

    #[test]
    fn raw_expectation_pieces_are_twice_the_hyperfield() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = HyperkahlerStructure::standard(2).unwrap();
        let m = QuaternionMatrix::random_antihermitian(2, &mut rng);
        let p = s.realify(&QuaternionTuple::random(2, &mut rng)).unwrap();
        let hf = hyperfield(&m, &p).unwrap().vector;
        for q in 1..=3 {
            let c = generating_constituent(&m, &CanonicalFrame::identity(), q);
            let raw = |x: &[f64]| c(x) / GENERATING_MAP_WEIGHT;
            let grad = numdiff::gradient(raw, p.coords(), 1e-5).unwrap();
            let piece = s.omega_sharp(q, &grad).unwrap();
            for (a, b) in piece.iter().zip(&hf) {
                assert!((a - 2.0 * b).abs() < 1e-7);
            }
        }
    }
}
