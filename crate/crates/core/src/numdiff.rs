//! Central finite differences for pointwise differentials of user maps.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 1e-5;

/// Gradient of a scalar map by central differences with step `h`.
pub fn gradient(f: impl Fn(&[f64]) -> f64, p: &[f64], h: f64) -> Result<Vec<f64>> {
    check_step(h)?;
    let mut x = p.to_vec();
    let mut out = Vec::with_capacity(p.len());
    for c in 0..p.len() {
        x[c] = p[c] + h;
        let fp = f(&x);
        x[c] = p[c] - h;
        let fm = f(&x);
        x[c] = p[c];
        let d = (fp - fm) / (2.0 * h);
        if !d.is_finite() {
            return Err(Error::numeric(format!("non-finite derivative along coordinate {c}")));
        }
        out.push(d);
    }
    Ok(out)
}

/// Jacobian `J[r][c] = ∂f_r/∂x_c` of a vector map with `m` outputs.
pub fn jacobian(f: impl Fn(&[f64]) -> Vec<f64>, p: &[f64], m: usize, h: f64) -> Result<DMatrix<f64>> {
    check_step(h)?;
    let mut x = p.to_vec();
    let mut jac = DMatrix::zeros(m, p.len());
    for c in 0..p.len() {
        x[c] = p[c] + h;
        let fp = f(&x);
        x[c] = p[c] - h;
        let fm = f(&x);
        x[c] = p[c];
        if fp.len() != m || fm.len() != m {
            return Err(Error::validation(format!(
                "map returned {} components, expected {m}",
                fp.len()
            )));
        }
        for r in 0..m {
            let d = (fp[r] - fm[r]) / (2.0 * h);
            if !d.is_finite() {
                return Err(Error::numeric(format!("non-finite derivative ∂{r}/∂{c}")));
            }
            jac[(r, c)] = d;
        }
    }
    Ok(jac)
}

fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::validation(format!("finite-difference step must be positive, got {h}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_quadratic() {
        let g = gradient(|x| x[0] * x[0] + 3.0 * x[1], &[2.0, -1.0], DEFAULT_STEP).unwrap();
        assert!((g[0] - 4.0).abs() < 1e-9);
        assert!((g[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn jacobian_shape_and_values() {
        let j = jacobian(|x| vec![x[0] * x[1], x[1]], &[2.0, 5.0], 2, DEFAULT_STEP).unwrap();
        assert_eq!(j.shape(), (2, 2));
        assert!((j[(0, 0)] - 5.0).abs() < 1e-9);
        assert!((j[(0, 1)] - 2.0).abs() < 1e-9);
        assert!((j[(1, 0)]).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_step() {
        assert!(gradient(|x| x[0], &[0.0], 0.0).is_err());
        assert!(gradient(|x| x[0], &[0.0], f64::NAN).is_err());
    }
}
