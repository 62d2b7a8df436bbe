//! Physical systems on the realified state space `ℍⁿ ≅ ℝ^{4n}`.
//!
//! Worlds are orbits of nonzero quaternions acting on the left, the
//! evolution field is the metric gradient of the ambient time, and
//! propensity is the reciprocal straight-line distance between states in
//! different worlds.

use std::fmt;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::algebra::{constituents, frame_basis, CanonicalFrame, Quaternion};
use crate::error::{ensure_len, Error, Result};
use crate::export::fmt_num;
use crate::hyperkahler::{
    build_structure, hyperhamiltonian_field, hyperhamiltonian_field_fd, regularity_residual, FieldSample,
    HyperkahlerStructure, RealPoint,
};
use crate::numdiff::{self, DEFAULT_STEP};
use crate::qhilbert::{expectation, QuaternionMatrix, QuaternionTuple};

/// Relative tolerance for `φ = qψ` checks.
pub const WORLD_TOL: f64 = 1e-9;
/// Angular tolerance for verticality.
pub const VERTICAL_TOL: f64 = 1e-8;
/// Regularity residual below which an observable counts as quaternionic.
pub const REGULARITY_TOL: f64 = 1e-6;
/// Minimum distance from the origin allowed for a propensity segment.
pub const PUNCTURE_TOL: f64 = 1e-12;

type ScalarFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// State space structure plus the ambient (perceptible) time function.
pub struct SystemConfig {
    structure: HyperkahlerStructure,
    ambient_time: ScalarFn,
    ambient_time_grad: Option<GradFn>,
    fd_step: f64,
}

impl fmt::Debug for SystemConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemConfig")
            .field("n", &self.structure.n())
            .field("analytic_gradient", &self.ambient_time_grad.is_some())
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

impl SystemConfig {
    pub fn new(structure: HyperkahlerStructure, ambient_time: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            structure,
            ambient_time: Box::new(ambient_time),
            ambient_time_grad: None,
            fd_step: DEFAULT_STEP,
        }
    }

    /// Standard-frame structure on `ℍⁿ` with the given ambient time.
    pub fn standard(n: usize, ambient_time: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Ok(Self::new(HyperkahlerStructure::standard(n)?, ambient_time))
    }

    pub fn with_gradient(mut self, grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.ambient_time_grad = Some(Box::new(grad));
        self
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    pub fn n(&self) -> usize {
        self.structure.n()
    }

    pub fn structure(&self) -> &HyperkahlerStructure {
        &self.structure
    }

    pub fn frame(&self) -> &CanonicalFrame {
        self.structure.frame()
    }

    pub fn ambient_time(&self, p: &RealPoint) -> f64 {
        (self.ambient_time)(p.coords())
    }

    fn time_gradient(&self, p: &RealPoint) -> Result<Vec<f64>> {
        let grad = match &self.ambient_time_grad {
            Some(g) => g(p.coords()),
            None => numdiff::gradient(&self.ambient_time, p.coords(), self.fd_step)?,
        };
        ensure_len("ambient time gradient", grad.len(), p.len())?;
        if grad.iter().any(|c| !c.is_finite()) {
            return Err(Error::numeric("ambient time gradient is not finite"));
        }
        Ok(grad)
    }

    fn check_point(&self, p: &RealPoint) -> Result<()> {
        ensure_len("state", p.len(), self.structure.dim())
    }
}

/// `f_T` with `g(f_T, u) = dT(u)`.
pub fn evolution_field(cfg: &SystemConfig, p: &RealPoint) -> Result<FieldSample> {
    cfg.check_point(p)?;
    hyperhamiltonian_field(|q| cfg.time_gradient(q), &cfg.structure, p)
}

/// Whether the evolution field of `cfg` coincides with the hyperfield of
/// `h` at every sample point, i.e. `h` can serve as the system's hamiltonian.
pub fn is_hamiltonian(cfg: &SystemConfig, h: &QuaternionMatrix, samples: &[RealPoint], tol: f64) -> Result<bool> {
    for p in samples {
        let evo = evolution_field(cfg, p)?;
        let hf = cfg.structure.hyperfield(h, p)?;
        let scale = hf.norm().max(1.0);
        if evo.vector.iter().zip(&hf.vector).any(|(a, b)| (a - b).abs() > tol * scale) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Fixed-step RK4 samples, `times[0] = 0` and `points[0] = start`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<RealPoint>,
}

impl Trajectory {
    pub fn last(&self) -> &RealPoint {
        self.points.last().expect("trajectory holds the start point")
    }

    /// CSV with header `t,c0,...,c_{4n-1}`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let dim = self.points.first().map_or(0, RealPoint::len);
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((0..dim).map(|c| format!("c{c}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for (t, p) in self.times.iter().zip(&self.points) {
            let row: Vec<String> = std::iter::once(*t).chain(p.coords().iter().copied()).map(fmt_num).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Classical fixed-step RK4 from `0` to `t_end`; a shorter final step lands
/// exactly on `t_end`.
pub fn integrate(
    field: impl Fn(&RealPoint) -> Result<Vec<f64>>,
    start: &RealPoint,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::validation(format!("time step must be positive, got {dt}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::validation(format!("end time must be finite and nonnegative, got {t_end}")));
    }
    let full = (t_end / dt).floor() as usize;
    let remainder = t_end - full as f64 * dt;
    let tail = remainder > dt * 1e-9;
    let steps = full + usize::from(tail);

    let mut times = Vec::with_capacity(steps + 1);
    let mut points = Vec::with_capacity(steps + 1);
    times.push(0.0);
    points.push(start.clone());

    let dim = start.len();
    let eval = |x: &[f64], step: usize| -> Result<Vec<f64>> {
        let v = field(&RealPoint::new(x.to_vec())?)?;
        ensure_len("field value", v.len(), dim)?;
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::numeric(format!("non-finite field value at step {step}")));
        }
        Ok(v)
    };
    let axpy = |x: &[f64], h: f64, k: &[f64]| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + h * b).collect() };

    let mut x = start.coords().to_vec();
    for step in 1..=steps {
        let h = if step > full { remainder } else { dt };
        let k1 = eval(&x, step)?;
        let k2 = eval(&axpy(&x, h / 2.0, &k1), step)?;
        let k3 = eval(&axpy(&x, h / 2.0, &k2), step)?;
        let k4 = eval(&axpy(&x, h, &k3), step)?;
        for c in 0..dim {
            x[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::numeric(format!("non-finite state at step {step}")));
        }
        times.push(if step > full { t_end } else { step as f64 * dt });
        points.push(RealPoint::new(x.clone())?);
    }
    Ok(Trajectory { times, points })
}

/// The `q ∈ ℍ°` with `φ = qψ`, if `φ` and `ψ` lie in one world.
pub fn same_world(phi: &RealPoint, psi: &RealPoint) -> Result<Option<Quaternion>> {
    same_world_in(phi, psi, &CanonicalFrame::identity())
}

pub fn same_world_in(phi: &RealPoint, psi: &RealPoint, frame: &CanonicalFrame) -> Result<Option<Quaternion>> {
    ensure_len("second state", psi.len(), phi.len())?;
    if phi.is_zero() && psi.is_zero() {
        return Err(Error::validation("both states are zero"));
    }
    if phi.is_zero() || psi.is_zero() {
        return Ok(None);
    }
    let a = crate::hyperkahler::derealify(phi, frame);
    let b = crate::hyperkahler::derealify(psi, frame);
    let pivot_tol = 1e-12 * b.norm();
    let Some(k) = (0..b.len()).find(|&k| b[k].norm() > pivot_tol) else {
        return Ok(None);
    };
    let q = a[k] * b[k].inverse().expect("pivot is nonzero");
    if q.norm() == 0.0 {
        return Ok(None);
    }
    let tol = WORLD_TOL * a.norm();
    let consistent = (0..a.len()).all(|j| (a[j] - q * b[j]).norm() <= tol);
    Ok(consistent.then_some(q))
}

/// `g`-orthogonal split of `vector` at `point` into its components along
/// the world through `point` and across it.
pub fn vertical_split(cfg: &SystemConfig, point: &RealPoint, vector: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    cfg.check_point(point)?;
    ensure_len("tangent vector", vector.len(), point.len())?;
    if point.is_zero() {
        return Err(Error::validation("verticality is undefined at the zero state"));
    }
    let s = cfg.structure();
    let psi = s.derealify(point)?;
    let spanning: Vec<Vec<f64>> = frame_basis(s.frame())
        .iter()
        .map(|&u| s.realify(&psi.scale_left(u)).map(|p| p.coords().to_vec()))
        .collect::<Result<_>>()?;
    let gram = DMatrix::from_fn(4, 4, |a, b| s.g(&spanning[a], &spanning[b]));
    let rhs = DVector::from_fn(4, |a, _| s.g(&spanning[a], vector));
    let coef = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::numeric("degenerate vertical space"))?;
    let mut vertical = vec![0.0; vector.len()];
    for (a, span) in spanning.iter().enumerate() {
        for (v, s) in vertical.iter_mut().zip(span) {
            *v += coef[a] * s;
        }
    }
    let horizontal = vector.iter().zip(&vertical).map(|(x, v)| x - v).collect();
    Ok((vertical, horizontal))
}

/// Whether the field value is tangent to the world through its point.
pub fn is_proper_state(cfg: &SystemConfig, field_value: &FieldSample) -> Result<bool> {
    let (_, horizontal) = vertical_split(cfg, &field_value.point, &field_value.vector)?;
    let s = cfg.structure();
    let total = s.g(&field_value.vector, &field_value.vector).sqrt();
    if total == 0.0 {
        return Ok(true);
    }
    Ok(s.g(&horizontal, &horizontal).max(0.0).sqrt() <= VERTICAL_TOL * total)
}

/// Reciprocal geodesic distance; infinite within one world.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct Propensity(pub f64);

impl Propensity {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for Propensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_num(self.0))
    }
}

pub fn propensity(cfg: &SystemConfig, phi: &RealPoint, psi: &RealPoint) -> Result<Propensity> {
    cfg.check_point(phi)?;
    cfg.check_point(psi)?;
    if phi.is_zero() || psi.is_zero() {
        return Err(Error::validation("propensity needs nonzero states"));
    }
    if same_world_in(phi, psi, cfg.frame())?.is_some() {
        return Ok(Propensity(f64::INFINITY));
    }
    let s = cfg.structure();
    let diff: Vec<f64> = psi.coords().iter().zip(phi.coords()).map(|(b, a)| b - a).collect();
    let dd = s.g(&diff, &diff);
    // Closest point of the segment φ + t(ψ - φ), t ∈ [0, 1], to the origin.
    let t = (-s.g(phi.coords(), &diff) / dd).clamp(0.0, 1.0);
    let closest: Vec<f64> = phi.coords().iter().zip(&diff).map(|(a, d)| a + t * d).collect();
    if s.g(&closest, &closest).max(0.0).sqrt() < PUNCTURE_TOL {
        return Err(Error::numeric("puncture crossing: segment passes through the origin"));
    }
    Ok(Propensity(1.0 / dd.sqrt()))
}

/// A quaternion-valued perceptible on the state space.
pub trait Observable {
    fn value(&self, s: &HyperkahlerStructure, p: &RealPoint) -> Result<Quaternion>;

    /// Differential at `p` as a `4 × 4n` matrix of constituents in the
    /// frame of `s`, for the regularity test against `b`.
    fn differential(&self, s: &HyperkahlerStructure, p: &RealPoint, b: &CanonicalFrame) -> Result<DMatrix<f64>>;

    /// The hyperhamiltonian field (the f-field).
    fn field(&self, s: &HyperkahlerStructure, p: &RealPoint) -> Result<FieldSample>;
}

/// Observable given by an explicit map; differentials by central differences.
pub struct FunctionObservable<F> {
    map: F,
    step: f64,
}

impl<F: Fn(&[f64]) -> Quaternion> FunctionObservable<F> {
    pub fn new(map: F) -> Self {
        Self { map, step: DEFAULT_STEP }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }
}

impl<F: Fn(&[f64]) -> Quaternion> Observable for FunctionObservable<F> {
    fn value(&self, _s: &HyperkahlerStructure, p: &RealPoint) -> Result<Quaternion> {
        Ok((self.map)(p.coords()))
    }

    fn differential(&self, s: &HyperkahlerStructure, p: &RealPoint, _b: &CanonicalFrame) -> Result<DMatrix<f64>> {
        let frame = *s.frame();
        numdiff::jacobian(|x| constituents((self.map)(x), &frame).to_vec(), p.coords(), 4, self.step)
    }

    fn field(&self, s: &HyperkahlerStructure, p: &RealPoint) -> Result<FieldSample> {
        hyperhamiltonian_field_fd(|x| (self.map)(x).re(), s, p, self.step)
    }
}

/// Observable generated by a quaternionic antihermitian operator `F`.
///
/// Its value is the expectation `⟨ψ|Fψ⟩` and its field is the hyperfield of
/// `F`. The operator does not determine the main generator `f₀`, so for the
/// regularity test its differential at `p` is the one minimising the
/// regularity defect for the rotation under test.
pub struct OperatorObservable {
    operator: QuaternionMatrix,
    step: f64,
}

impl OperatorObservable {
    pub fn new(operator: QuaternionMatrix) -> Self {
        Self {
            operator,
            step: DEFAULT_STEP,
        }
    }

    pub fn operator(&self) -> &QuaternionMatrix {
        &self.operator
    }
}

impl Observable for OperatorObservable {
    fn value(&self, s: &HyperkahlerStructure, p: &RealPoint) -> Result<Quaternion> {
        expectation(&self.operator, &s.derealify(p)?)
    }

    fn differential(&self, s: &HyperkahlerStructure, p: &RealPoint, b: &CanonicalFrame) -> Result<DMatrix<f64>> {
        let frame = *s.frame();
        let f = &self.operator;
        let expect = |x: &[f64]| -> Vec<f64> {
            let phi = crate::hyperkahler::derealify(&RealPoint::new(x.to_vec()).expect("length kept"), &frame);
            let e = expectation(f, &phi).expect("dimension checked");
            let c = constituents(e, &frame);
            vec![0.0, c[1], c[2], c[3]]
        };
        ensure_len("state", p.len(), s.dim())?;
        let imaginary = numdiff::jacobian(expect, p.coords(), 4, self.step)?;
        let target = build_structure(1, &frame)?;
        Ok(fit_main_generator(&imaginary, b, s, &target))
    }

    fn field(&self, s: &HyperkahlerStructure, p: &RealPoint) -> Result<FieldSample> {
        s.hyperfield(&self.operator, p)
    }
}

/// Fills row 0 of `df` (the differential of `f₀`) with the least-squares
/// minimiser of the regularity defect.
fn fit_main_generator(
    imaginary: &DMatrix<f64>,
    b: &CanonicalFrame,
    src: &HyperkahlerStructure,
    dst: &HyperkahlerStructure,
) -> DMatrix<f64> {
    let rot = b.rotation();
    let defect = |d: &DMatrix<f64>| -> DMatrix<f64> {
        let mut out = -d.clone();
        for p in 0..3 {
            let right = d * src.complex_structure(p + 1);
            for q in 0..3 {
                out += rot[p][q] * (dst.complex_structure(q + 1) * &right);
            }
        }
        out
    };
    let cols = imaginary.ncols();
    let base = defect(imaginary);
    let mut design = DMatrix::zeros(base.len(), cols);
    for c in 0..cols {
        let mut unit = DMatrix::zeros(4, cols);
        unit[(0, c)] = 1.0;
        design.set_column(c, &DVector::from_column_slice(defect(&unit).as_slice()));
    }
    let rhs = -DVector::from_column_slice(base.as_slice());
    let row = design
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(cols));
    let mut df = imaginary.clone();
    for c in 0..cols {
        df[(0, c)] = row[c];
    }
    df
}

/// An f-observation: observable plus initial and final states.
pub struct Observation<'a> {
    pub observable: &'a dyn Observable,
    pub initial: RealPoint,
    pub final_state: RealPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementOutcome {
    pub success: bool,
    /// `q` with `final = q · initial` when both states share a world.
    pub world_witness: Option<Quaternion>,
    /// Ambient time at the final state (the hypersurface of the present).
    pub present_time: f64,
    pub property: Option<Quaternion>,
    pub propensity: Option<f64>,
    pub regularity_residual: f64,
    pub proper: bool,
}

pub fn measure(cfg: &SystemConfig, obs: &Observation<'_>, b: &CanonicalFrame) -> Result<MeasurementOutcome> {
    cfg.check_point(&obs.initial)?;
    cfg.check_point(&obs.final_state)?;
    if obs.initial.is_zero() || obs.final_state.is_zero() {
        return Err(Error::validation("observation states must be nonzero"));
    }
    let s = cfg.structure();
    let psi = &obs.final_state;
    let present_time = cfg.ambient_time(psi);

    let df = obs.observable.differential(s, psi, b)?;
    let target = build_structure(1, s.frame())?;
    let residual = regularity_residual(&df, b, s, &target)?;
    let regular = residual < REGULARITY_TOL;

    let rho = match propensity(cfg, &obs.initial, psi) {
        Ok(r) => Some(r.value()),
        Err(e) if e.is_numeric() => None,
        Err(e) => return Err(e),
    };
    let proper = is_proper_state(cfg, &obs.observable.field(s, psi)?)?;

    let success = regular && rho.is_some() && proper;
    if !success {
        return Ok(MeasurementOutcome {
            success,
            world_witness: None,
            present_time,
            property: None,
            propensity: None,
            regularity_residual: residual,
            proper,
        });
    }
    Ok(MeasurementOutcome {
        success,
        world_witness: same_world_in(psi, &obs.initial, s.frame())?,
        present_time,
        property: Some(obs.observable.value(s, psi)?),
        propensity: rho,
        regularity_residual: residual,
        proper,
    })
}

/// Realified standard basis vector `e_k` of `ℍⁿ`.
pub fn basis_state(s: &HyperkahlerStructure, k: usize) -> RealPoint {
    s.realify(&QuaternionTuple::unit(s.n(), k)).expect("dimension matches")
}
