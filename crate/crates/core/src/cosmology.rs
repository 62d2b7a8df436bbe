//! The quaternionic cosmology on `ℍ° ≅ ℝ × S³`.
//!
//! Spherical coordinates `(η, χ, θ, φ)` relate to canonical coordinates by
//!
//! ```text
//! w = R(η) cos χ
//! x = R(η) sin χ sin θ cos φ
//! y = R(η) sin χ sin θ sin φ
//! z = R(η) sin χ cos θ
//! ```
//!
//! with `R = R₀ exp ∫_{η₀}^{η} dη / (±√|Ṫ|)` for the perceptible time
//! profile `T(η)`. The metric is the closed FLRW form
//! `diag(1, -a², -a² sin²χ, -a² sin²χ sin²θ)` with `a² = |Ṫ|`.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::Quaternion;
use crate::error::{Error, Result};
use crate::export::fmt_num;

/// Absolute tolerance of the scale-factor quadrature.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// `|sin|` below which an angle counts as a coordinate singularity.
pub const AXIS_TOL: f64 = 1e-12;
/// Rotation rate below which vistas switch to the `ω → 0` limit.
pub const SMALL_OMEGA: f64 = 1e-8;

/// Perceptible time `T(η)` and its derivative `Ṫ(η)`.
pub trait TimeProfile: Send + Sync {
    fn time(&self, eta: f64) -> f64;
    fn rate(&self, eta: f64) -> f64;
}

/// `T(η) = slope · η + offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearProfile {
    pub slope: f64,
    pub offset: f64,
}

impl LinearProfile {
    pub fn new(slope: f64) -> Self {
        Self { slope, offset: 0.0 }
    }
}

impl TimeProfile for LinearProfile {
    fn time(&self, eta: f64) -> f64 {
        self.slope * eta + self.offset
    }

    fn rate(&self, _eta: f64) -> f64 {
        self.slope
    }
}

/// Profile from a pair of closures.
pub struct FnProfile<T, D> {
    time: T,
    rate: D,
}

impl<T, D> FnProfile<T, D>
where
    T: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
{
    pub fn new(time: T, rate: D) -> Self {
        Self { time, rate }
    }
}

impl<T, D> TimeProfile for FnProfile<T, D>
where
    T: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
{
    fn time(&self, eta: f64) -> f64 {
        (self.time)(eta)
    }

    fn rate(&self, eta: f64) -> f64 {
        (self.rate)(eta)
    }
}

/// Monotone cubic (Fritsch–Carlson) interpolation of tabulated `(η, T)`.
/// Evaluates to NaN outside the table.
#[derive(Clone, Debug, PartialEq)]
pub struct TableProfile {
    eta: Vec<f64>,
    time: Vec<f64>,
    slopes: Vec<f64>,
}

impl TableProfile {
    pub fn new(eta: Vec<f64>, time: Vec<f64>) -> Result<Self> {
        if eta.len() != time.len() || eta.len() < 2 {
            return Err(Error::validation("time table needs at least two (eta, T) rows"));
        }
        if eta.iter().chain(&time).any(|v| !v.is_finite()) {
            return Err(Error::validation("time table has non-finite entries"));
        }
        if eta.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("time table eta column must be strictly increasing"));
        }
        let secants: Vec<f64> = (0..eta.len() - 1)
            .map(|k| (time[k + 1] - time[k]) / (eta[k + 1] - eta[k]))
            .collect();
        let m = secants.len();
        let mut slopes = vec![0.0; eta.len()];
        slopes[0] = secants[0];
        slopes[m] = secants[m - 1];
        for k in 1..m {
            slopes[k] = if secants[k - 1] * secants[k] <= 0.0 {
                0.0
            } else {
                (secants[k - 1] + secants[k]) / 2.0
            };
        }
        for k in 0..m {
            if secants[k] == 0.0 {
                slopes[k] = 0.0;
                slopes[k + 1] = 0.0;
                continue;
            }
            let a = slopes[k] / secants[k];
            let b = slopes[k + 1] / secants[k];
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slopes[k] = tau * a * secants[k];
                slopes[k + 1] = tau * b * secants[k];
            }
        }
        Ok(Self { eta, time, slopes })
    }

    /// Parses two numeric columns separated by commas or whitespace. Blank
    /// lines, `#` comments and a non-numeric first line (header) are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut eta = Vec::new();
        let mut time = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            let parsed: std::result::Result<Vec<f64>, _> = cols.iter().map(|c| c.parse::<f64>()).collect();
            match parsed {
                Ok(v) if v.len() == 2 => {
                    eta.push(v[0]);
                    time.push(v[1]);
                }
                Err(_) if eta.is_empty() && lineno == 0 => continue,
                _ => {
                    return Err(Error::validation(format!(
                        "time table line {}: expected two numbers",
                        lineno + 1
                    )))
                }
            }
        }
        Self::new(eta, time)
    }

    fn segment(&self, eta: f64) -> Option<usize> {
        let n = self.eta.len();
        if !(eta >= self.eta[0] && eta <= self.eta[n - 1]) {
            return None;
        }
        Some(self.eta.partition_point(|&e| e <= eta).clamp(1, n - 1) - 1)
    }
}

impl TimeProfile for TableProfile {
    fn time(&self, eta: f64) -> f64 {
        let Some(k) = self.segment(eta) else { return f64::NAN };
        let h = self.eta[k + 1] - self.eta[k];
        let s = (eta - self.eta[k]) / h;
        let (h00, h10) = (2.0 * s.powi(3) - 3.0 * s * s + 1.0, s.powi(3) - 2.0 * s * s + s);
        let (h01, h11) = (-2.0 * s.powi(3) + 3.0 * s * s, s.powi(3) - s * s);
        h00 * self.time[k] + h10 * h * self.slopes[k] + h01 * self.time[k + 1] + h11 * h * self.slopes[k + 1]
    }

    fn rate(&self, eta: f64) -> f64 {
        let Some(k) = self.segment(eta) else { return f64::NAN };
        let h = self.eta[k + 1] - self.eta[k];
        let s = (eta - self.eta[k]) / h;
        let (d00, d10) = (6.0 * s * s - 6.0 * s, 3.0 * s * s - 4.0 * s + 1.0);
        let (d01, d11) = (-6.0 * s * s + 6.0 * s, 3.0 * s * s - 2.0 * s);
        (d00 * self.time[k] + d01 * self.time[k + 1]) / h + d10 * self.slopes[k] + d11 * self.slopes[k + 1]
    }
}

/// Sign choice in `R = exp ∫ dη / (±√|Ṫ|)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Clone)]
pub struct CosmologyConfig {
    pub profile: Arc<dyn TimeProfile>,
    pub branch: Branch,
    pub eta0: f64,
    pub r0: f64,
}

impl fmt::Debug for CosmologyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CosmologyConfig")
            .field("branch", &self.branch)
            .field("eta0", &self.eta0)
            .field("r0", &self.r0)
            .finish_non_exhaustive()
    }
}

impl CosmologyConfig {
    pub fn new(profile: Arc<dyn TimeProfile>, branch: Branch, eta0: f64, r0: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::validation(format!("R0 must be positive, got {r0}")));
        }
        if !eta0.is_finite() {
            return Err(Error::validation("eta0 must be finite"));
        }
        Ok(Self {
            profile,
            branch,
            eta0,
            r0,
        })
    }

    /// `T(η) = η`, `η₀ = 0`, `R₀ = 1`.
    pub fn linear(branch: Branch) -> Self {
        Self::new(Arc::new(LinearProfile::new(1.0)), branch, 0.0, 1.0).expect("static config")
    }

    /// `λ = Ṙ/R = ±1/√|Ṫ|`.
    pub fn hubble_rate(&self, eta: f64) -> Result<f64> {
        let rate = self.profile.rate(eta);
        if !rate.is_finite() || rate == 0.0 {
            return Err(Error::numeric(format!("perceptible time rate vanishes or is undefined at eta = {eta}")));
        }
        Ok(self.branch.sign() / rate.abs().sqrt())
    }
}

/// Checks that `Ṫ` is finite, nonzero and of one sign at `samples + 1`
/// evenly spaced points of `[a, b]`.
pub fn validate_profile(profile: &dyn TimeProfile, a: f64, b: f64, samples: usize) -> Result<()> {
    let samples = samples.max(1);
    let mut sign = 0.0;
    for k in 0..=samples {
        let eta = a + (b - a) * k as f64 / samples as f64;
        let r = profile.rate(eta);
        if !r.is_finite() || r == 0.0 {
            return Err(Error::validation(format!("perceptible time is not strictly monotone at eta = {eta}")));
        }
        if sign != 0.0 && r.signum() != sign {
            return Err(Error::validation(format!("perceptible time changes direction near eta = {eta}")));
        }
        sign = r.signum();
    }
    Ok(())
}

/// `ln R(η) − ln R₀`.
pub fn log_scale_factor(cfg: &CosmologyConfig, eta: f64) -> Result<f64> {
    if !eta.is_finite() {
        return Err(Error::validation("eta must be finite"));
    }
    if eta == cfg.eta0 {
        return Ok(0.0);
    }
    let sign0 = cfg.profile.rate(cfg.eta0).signum();
    let integrand = |x: f64| -> Result<f64> {
        let rate = cfg.profile.rate(x);
        if !rate.is_finite() || rate == 0.0 || rate.signum() != sign0 {
            return Err(Error::numeric(format!("perceptible time rate vanishes inside the interval near eta = {x}")));
        }
        Ok(cfg.branch.sign() / rate.abs().sqrt())
    };
    adaptive_simpson(&integrand, cfg.eta0, eta, QUADRATURE_TOL)
}

/// `R(η) = R₀ exp ∫_{η₀}^{η} dη / (±√|Ṫ|)`.
pub fn scale_factor(cfg: &CosmologyConfig, eta: f64) -> Result<f64> {
    if eta == cfg.eta0 {
        return Ok(cfg.r0);
    }
    Ok(cfg.r0 * log_scale_factor(cfg, eta)?.exp())
}

fn adaptive_simpson(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (fa, fm, fb) = (f(a)?, f((a + b) / 2.0)?, f(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = (a + b) / 2.0;
    let (lm, rm) = ((a + m) / 2.0, (m + b) / 2.0);
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 {
        return Err(Error::numeric("scale factor quadrature did not converge"));
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalCoords {
    pub eta: f64,
    pub chi: f64,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Angle {
    Theta,
    Phi,
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Angle::Theta => "theta",
            Angle::Phi => "phi",
        })
    }
}

/// Spherical coordinates of a canonical point plus the angles left
/// undetermined by a coordinate singularity (reported as 0).
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalChart {
    pub coords: SphericalCoords,
    pub degenerate: Vec<Angle>,
}

impl SphericalChart {
    /// Fails with a validation error naming the first degenerate angle.
    pub fn require_regular(self) -> Result<SphericalCoords> {
        match self.degenerate.first() {
            Some(angle) => Err(Error::validation(format!("coordinate singularity: {angle} is degenerate"))),
            None => Ok(self.coords),
        }
    }
}

/// Canonical `(w, x, y, z)` of a spherical point, together with the angles
/// that do not influence it.
pub fn spherical_to_canonical(cfg: &CosmologyConfig, p: &SphericalCoords) -> Result<([f64; 4], Vec<Angle>)> {
    let r = scale_factor(cfg, p.eta)?;
    let (sc, cc) = p.chi.sin_cos();
    let (st, ct) = p.theta.sin_cos();
    let (sp, cp) = p.phi.sin_cos();
    let point = [r * cc, r * sc * st * cp, r * sc * st * sp, r * sc * ct];
    let degenerate = if sc.abs() < AXIS_TOL {
        vec![Angle::Theta, Angle::Phi]
    } else if st.abs() < AXIS_TOL {
        vec![Angle::Phi]
    } else {
        vec![]
    };
    Ok((point, degenerate))
}

/// Inverse chart; `η` is recovered by Newton iteration on `ln R`.
pub fn canonical_to_spherical(cfg: &CosmologyConfig, p: [f64; 4]) -> Result<SphericalChart> {
    let [w, x, y, z] = p;
    let r = (w * w + x * x + y * y + z * z).sqrt();
    if r == 0.0 || !r.is_finite() {
        return Err(Error::validation("the origin is not a point of the cosmology"));
    }
    let eta = invert_scale_factor(cfg, r)?;
    let rho = (x * x + y * y + z * z).sqrt();
    let chi = rho.atan2(w);
    let mut degenerate = Vec::new();
    let (theta, phi) = if rho <= AXIS_TOL * r {
        degenerate.extend([Angle::Theta, Angle::Phi]);
        (0.0, 0.0)
    } else {
        let planar = (x * x + y * y).sqrt();
        let theta = planar.atan2(z);
        if planar <= AXIS_TOL * r {
            degenerate.push(Angle::Phi);
            (theta, 0.0)
        } else {
            (theta, y.atan2(x).rem_euclid(std::f64::consts::TAU))
        }
    };
    Ok(SphericalChart {
        coords: SphericalCoords { eta, chi, theta, phi },
        degenerate,
    })
}

fn invert_scale_factor(cfg: &CosmologyConfig, r: f64) -> Result<f64> {
    let target = (r / cfg.r0).ln();
    let mut eta = cfg.eta0;
    for _ in 0..200 {
        let resid = log_scale_factor(cfg, eta)? - target;
        if resid.abs() <= 1e-13 * target.abs().max(1.0) {
            return Ok(eta);
        }
        let step = resid / cfg.hubble_rate(eta)?;
        eta -= step;
        if !eta.is_finite() {
            break;
        }
        if step.abs() <= 1e-15 * eta.abs().max(1.0) {
            return Ok(eta);
        }
    }
    Err(Error::numeric(format!("could not invert the scale factor at R = {r}")))
}

/// Metric, structure field and ether field in the spherical frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameComponents {
    pub metric: [[f64; 4]; 4],
    pub structure: [[[f64; 4]; 4]; 4],
    pub ether: [f64; 4],
}

impl FrameComponents {
    /// JSON object with keys `metric`, `structure0..3`, `ether`.
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "metric": self.metric, "ether": self.ether });
        for (g, m) in self.structure.iter().enumerate() {
            v[format!("structure{g}")] = json!(m);
        }
        v
    }
}

pub fn frame_components(cfg: &CosmologyConfig, eta: f64, chi: f64, theta: f64) -> Result<FrameComponents> {
    let (sc, st) = (chi.sin(), theta.sin());
    if sc.abs() < AXIS_TOL {
        return Err(Error::validation("coordinate singularity: sin(chi) = 0"));
    }
    if st.abs() < AXIS_TOL {
        return Err(Error::validation("coordinate singularity: sin(theta) = 0"));
    }
    let rate = cfg.profile.rate(eta);
    let lambda = cfg.hubble_rate(eta)?;
    let a2 = rate.abs();
    let (sc2, st2) = (sc * sc, st * st);
    let metric = diag([1.0, -a2, -a2 * sc2, -a2 * sc2 * st2]);
    let inv = 1.0 / lambda;
    #[rustfmt::skip]
    let structure = [
        diag([lambda, -inv, -inv * sc2, -inv * sc2 * st2]),
        [[0.0, lambda, 0.0, 0.0], [lambda, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, sc2 * st], [0.0, 0.0, -sc2 * st, 0.0]],
        [[0.0, 0.0, lambda, 0.0], [0.0, 0.0, 0.0, -st], [lambda, 0.0, 0.0, 0.0], [0.0, st, 0.0, 0.0]],
        [[0.0, 0.0, 0.0, lambda], [0.0, 0.0, 1.0 / st, 0.0], [0.0, -1.0 / st, 0.0, 0.0], [lambda, 0.0, 0.0, 0.0]],
    ];
    Ok(FrameComponents {
        metric,
        structure,
        ether: [rate, 0.0, 0.0, 0.0],
    })
}

fn diag(d: [f64; 4]) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for k in 0..4 {
        m[k][k] = d[k];
    }
    m
}

/// Components of the left-invariant field generated by `u` at `a`, i.e. `a·u`.
pub fn left_invariant_field(u: Quaternion, a: Quaternion) -> [f64; 4] {
    let [u0, u1, u2, u3] = u.to_array();
    let Quaternion { w, x, y, z } = a;
    [
        w * u0 - x * u1 - y * u2 - z * u3,
        w * u1 + x * u0 + y * u3 - z * u2,
        w * u2 - x * u3 + y * u0 + z * u1,
        w * u3 + x * u2 - y * u1 + z * u0,
    ]
}

/// Right-invariant counterpart, `u·a`.
pub fn right_invariant_field(u: Quaternion, a: Quaternion) -> [f64; 4] {
    (u * a).to_array()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chirality {
    #[default]
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VistaSpec {
    /// Direction reflexor.
    pub u: Quaternion,
    /// Proper viewpoint, nonzero.
    pub a: Quaternion,
    pub chirality: Chirality,
}

impl VistaSpec {
    pub fn new(u: Quaternion, a: Quaternion, chirality: Chirality) -> Result<Self> {
        if a == Quaternion::ZERO {
            return Err(Error::validation("vista viewpoint must be nonzero"));
        }
        if !u.is_finite() || !a.is_finite() {
            return Err(Error::validation("vista parameters must be finite"));
        }
        Ok(Self { u, a, chirality })
    }
}

/// Point at parameter `t` on the `(u, a)`-vista: the integral curve through
/// `a` of the left (`a ↦ a·u`) or right (`a ↦ u·a`) invariant field of `u`.
pub fn vista(spec: &VistaSpec, t: f64) -> Quaternion {
    let [u0, u1, u2, u3] = spec.u.to_array();
    let Quaternion { w, x, y, z } = spec.a;
    let omega = (u1 * u1 + u2 * u2 + u3 * u3).sqrt();
    let (sinc, cos) = if omega < SMALL_OMEGA {
        (t, 1.0)
    } else {
        ((omega * t).sin() / omega, (omega * t).cos())
    };
    let grow = (u0 * t).exp();
    let turn = match spec.chirality {
        Chirality::Left => [
            -u1 * x - u2 * y - u3 * z,
            u1 * w - u2 * z + u3 * y,
            u1 * z + u2 * w - u3 * x,
            -u1 * y + u2 * x + u3 * w,
        ],
        Chirality::Right => [
            -u1 * x - u2 * y - u3 * z,
            u1 * w + u2 * z - u3 * y,
            -u1 * z + u2 * w + u3 * x,
            u1 * y - u2 * x + u3 * w,
        ],
    };
    Quaternion::new(
        grow * (turn[0] * sinc + w * cos),
        grow * (turn[1] * sinc + x * cos),
        grow * (turn[2] * sinc + y * cos),
        grow * (turn[3] * sinc + z * cos),
    )
}

/// `steps + 1` evenly spaced samples of the vista on `[0, t1]`.
pub fn vista_samples(spec: &VistaSpec, t1: f64, steps: usize) -> Result<Vec<(f64, Quaternion)>> {
    if steps == 0 {
        return Err(Error::validation("vista needs at least one step"));
    }
    if !t1.is_finite() {
        return Err(Error::validation("vista end parameter must be finite"));
    }
    Ok((0..=steps)
        .map(|k| {
            let t = if k == steps { t1 } else { t1 * k as f64 / steps as f64 };
            (t, vista(spec, t))
        })
        .collect())
}

/// CSV with header `t,w,x,y,z`.
pub fn write_vista_csv<W: Write>(samples: &[(f64, Quaternion)], mut w: W) -> io::Result<()> {
    writeln!(w, "t,w,x,y,z")?;
    for (t, q) in samples {
        let row: Vec<String> = std::iter::once(*t).chain(q.to_array()).map(fmt_num).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2, PI};

    #[test]
    fn scale_factor_linear_profile() {
        let plus = CosmologyConfig::linear(Branch::Plus);
        assert!((scale_factor(&plus, 1.0).unwrap() - E).abs() < 1e-9);
        assert_eq!(scale_factor(&plus, 0.0).unwrap(), 1.0);
        let minus = CosmologyConfig::linear(Branch::Minus);
        assert!((scale_factor(&minus, 1.0).unwrap() - 1.0 / E).abs() < 1e-9);
    }

    #[test]
    fn scale_factor_nonlinear_profile() {
        // Ṫ = 4η² on [1, 2]: ∫ dη / (2η) = ln(2)/2, so R(2) = √2.
        let profile = Arc::new(FnProfile::new(|e: f64| 4.0 * e.powi(3) / 3.0, |e: f64| 4.0 * e * e));
        let cfg = CosmologyConfig::new(profile, Branch::Plus, 1.0, 1.0).unwrap();
        assert!((scale_factor(&cfg, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn vanishing_rate_is_a_numeric_failure() {
        let profile = Arc::new(FnProfile::new(|e: f64| e * e, |e: f64| 2.0 * e));
        let cfg = CosmologyConfig::new(profile, Branch::Plus, -1.0, 1.0).unwrap();
        assert!(scale_factor(&cfg, 1.0).unwrap_err().is_numeric());
        assert!(validate_profile(&FnProfile::new(|e: f64| e * e, |e: f64| 2.0 * e), -1.0, 1.0, 10).is_err());
        assert!(validate_profile(&LinearProfile::new(-2.0), -1.0, 1.0, 10).is_ok());
    }

    #[test]
    fn bad_config_is_rejected() {
        assert!(CosmologyConfig::new(Arc::new(LinearProfile::new(1.0)), Branch::Plus, 0.0, 0.0).is_err());
    }

    #[test]
    fn spherical_to_canonical_examples() {
        let cfg = CosmologyConfig::linear(Branch::Plus);
        let (p, deg) = spherical_to_canonical(&cfg, &SphericalCoords { eta: 0.0, chi: FRAC_PI_2, theta: FRAC_PI_2, phi: 0.0 }).unwrap();
        assert!(p.iter().zip([0., 1., 0., 0.]).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!(deg.is_empty());
        let (p, deg) = spherical_to_canonical(&cfg, &SphericalCoords { eta: 1.0, chi: 0.0, theta: 0.3, phi: 2.0 }).unwrap();
        assert!((p[0] - E).abs() < 1e-9 && p[1] == 0.0 && p[2] == 0.0 && p[3] == 0.0);
        assert_eq!(deg, vec![Angle::Theta, Angle::Phi]);
    }

    #[test]
    fn canonical_to_spherical_on_axis() {
        let cfg = CosmologyConfig::linear(Branch::Plus);
        let chart = canonical_to_spherical(&cfg, [0., 0., 0., 1.]).unwrap();
        assert!((chart.coords.chi - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(chart.coords.theta, 0.0);
        assert!(chart.coords.eta.abs() < 1e-12);
        assert_eq!(chart.degenerate, vec![Angle::Phi]);
        let err = chart.require_regular().unwrap_err();
        assert!(err.to_string().contains("phi"));
        assert!(canonical_to_spherical(&cfg, [0.; 4]).is_err());
    }

    #[test]
    fn round_trip_off_axis() {
        for branch in [Branch::Plus, Branch::Minus] {
            let cfg = CosmologyConfig::linear(branch);
            let s = SphericalCoords { eta: 0.7, chi: 1.1, theta: 2.3, phi: 4.0 };
            let (p, _) = spherical_to_canonical(&cfg, &s).unwrap();
            let back = canonical_to_spherical(&cfg, p).unwrap().require_regular().unwrap();
            for (a, b) in [(back.eta, s.eta), (back.chi, s.chi), (back.theta, s.theta), (back.phi, s.phi)] {
                assert!((a - b).abs() < 1e-9, "{back:?}");
            }
        }
    }

    #[test]
    fn frame_components_linear_profile() {
        let cfg = CosmologyConfig::linear(Branch::Plus);
        let (chi, theta) = (1.0f64, 0.4f64);
        let fc = frame_components(&cfg, 0.3, chi, theta).unwrap();
        let (sc2, st2) = (chi.sin().powi(2), theta.sin().powi(2));
        assert_eq!(fc.metric, diag([1.0, -1.0, -sc2, -sc2 * st2]));
        assert_eq!(fc.structure[0], diag([1.0, -1.0, -sc2, -sc2 * st2]));
        assert_eq!(fc.ether, [1.0, 0.0, 0.0, 0.0]);
        let minus = frame_components(&CosmologyConfig::linear(Branch::Minus), 0.3, chi, theta).unwrap();
        assert_eq!(minus.structure[0], diag([-1.0, 1.0, sc2, sc2 * st2]));
        assert_eq!(minus.metric, fc.metric);
    }

    #[test]
    fn ether_of_doubled_time() {
        let cfg = CosmologyConfig::new(Arc::new(LinearProfile::new(2.0)), Branch::Plus, 0.0, 1.0).unwrap();
        let fc = frame_components(&cfg, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(fc.ether, [2.0, 0.0, 0.0, 0.0]);
        assert_eq!(fc.metric[1][1], -2.0);
    }

    #[test]
    fn frame_components_reject_axes() {
        let cfg = CosmologyConfig::linear(Branch::Plus);
        assert!(frame_components(&cfg, 0.0, 0.0, 1.0).is_err());
        assert!(frame_components(&cfg, 0.0, 1.0, PI).is_err());
    }

    #[test]
    fn frame_json_keys() {
        let fc = frame_components(&CosmologyConfig::linear(Branch::Plus), 0.0, 1.0, 1.0).unwrap();
        let v = fc.to_json();
        for key in ["metric", "structure0", "structure1", "structure2", "structure3", "ether"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn left_invariant_field_examples() {
        let a = Quaternion::new(0.3, -1.2, 2.0, 0.7);
        assert_eq!(left_invariant_field(Quaternion::ONE, a), a.to_array());
        assert_eq!(left_invariant_field(Quaternion::I, a), [1.2, 0.3, 0.7, -2.0]);
        assert_eq!(left_invariant_field(Quaternion::ZERO, a), [0.0; 4]);
        let u = Quaternion::new(0.5, 1.5, -0.25, 2.0);
        let via_product = (a * u).to_array();
        for (l, r) in left_invariant_field(u, a).iter().zip(via_product) {
            assert!((l - r).abs() < 1e-15);
        }
    }

    #[test]
    fn circle_vista() {
        let spec = VistaSpec::new(Quaternion::I, Quaternion::ONE, Chirality::Left).unwrap();
        for t in [0.0, 0.4, FRAC_PI_2, 3.0] {
            let q = vista(&spec, t);
            assert!(q.dist(Quaternion::new(t.cos(), t.sin(), 0.0, 0.0)) < 1e-15);
        }
    }

    #[test]
    fn pure_growth_vista() {
        let a = Quaternion::new(0.5, -1.0, 2.0, 0.25);
        let spec = VistaSpec::new(Quaternion::ONE, a, Chirality::Left).unwrap();
        assert!(vista(&spec, 1.3).dist(a * 1.3f64.exp()) < 1e-12);
    }

    #[test]
    fn chiralities_differ_in_initial_velocity() {
        let (u, a) = (Quaternion::I, Quaternion::J);
        assert_eq!(left_invariant_field(u, a), (-Quaternion::K).to_array());
        assert_eq!(right_invariant_field(u, a), Quaternion::K.to_array());
        let h = 1e-6;
        let l = VistaSpec::new(u, a, Chirality::Left).unwrap();
        let r = VistaSpec::new(u, a, Chirality::Right).unwrap();
        let vl = (vista(&l, h) - vista(&l, -h)) / (2.0 * h);
        let vr = (vista(&r, h) - vista(&r, -h)) / (2.0 * h);
        assert!(vl.dist(-Quaternion::K) < 1e-9);
        assert!(vr.dist(Quaternion::K) < 1e-9);
    }

    #[test]
    fn vista_at_zero_is_viewpoint() {
        let a = Quaternion::new(1.0, 2.0, -3.0, 0.5);
        for ch in [Chirality::Left, Chirality::Right] {
            let spec = VistaSpec::new(Quaternion::new(0.2, 0.3, -0.4, 1.0), a, ch).unwrap();
            assert_eq!(vista(&spec, 0.0), a);
        }
        assert!(VistaSpec::new(Quaternion::I, Quaternion::ZERO, Chirality::Left).is_err());
    }

    #[test]
    fn table_profile_reproduces_linear_data() {
        let p = TableProfile::parse("eta,T\n0,0\n1,1\n2,2\n3,3\n").unwrap();
        assert!((p.time(1.5) - 1.5).abs() < 1e-15);
        assert!((p.rate(2.25) - 1.0).abs() < 1e-15);
        assert!(p.rate(4.0).is_nan());
        assert!(TableProfile::parse("0 0\n0 1\n").is_err());
        assert!(TableProfile::parse("0 0\nx y\n").is_err());
    }

    #[test]
    fn table_profile_stays_monotone() {
        let p = TableProfile::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 0.1, 5.0, 5.2]).unwrap();
        let mut prev = p.time(0.0);
        for k in 1..=300 {
            let t = p.time(k as f64 * 0.01);
            assert!(t >= prev);
            prev = t;
        }
    }

    #[test]
    fn vista_csv_rows() {
        let spec = VistaSpec::new(Quaternion::I, Quaternion::ONE, Chirality::Left).unwrap();
        let samples = vista_samples(&spec, 1.0, 4).unwrap();
        let mut buf = Vec::new();
        write_vista_csv(&samples, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("t,w,x,y,z\n"));
    }
}
