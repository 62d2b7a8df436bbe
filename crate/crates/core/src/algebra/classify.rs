//! Necessary-condition classification of finite-dimensional real algebras.
//!
//! Unitality and associativity are decided exactly from linear identities
//! on basis elements. Zero divisors are searched for, first by probing all
//! small sign patterns and then by random sampling, so their absence is a
//! probabilistic statement.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{multiply, AlgebraElement, StructureTensor, EXACT_TOL};

/// Largest dimension for which every `{-1, 0, 1}` coefficient pattern is probed.
const FULL_PATTERN_DIM: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroDivisorSearch {
    pub probes: usize,
    pub trials: usize,
    pub seed: u64,
    /// Set when no witness was found: absence of zero divisors is then only
    /// supported by the search, not proven.
    pub probabilistic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub dim: usize,
    pub unital: bool,
    pub identity: Option<AlgebraElement>,
    pub associative: bool,
    pub zero_divisor_witness: Option<(AlgebraElement, AlgebraElement)>,
    pub division_candidate: bool,
    pub zero_divisor_search: ZeroDivisorSearch,
}

pub fn classify(t: &StructureTensor, trials: usize, seed: u64) -> ClassificationReport {
    let identity = find_identity(t);
    let associative = is_associative(t);
    let (witness, probes) = find_zero_divisor(t, trials, seed);
    let unital = identity.is_some();
    ClassificationReport {
        dim: t.dim(),
        unital,
        identity,
        associative,
        division_candidate: unital && associative && witness.is_none(),
        zero_divisor_search: ZeroDivisorSearch {
            probes,
            trials,
            seed,
            probabilistic: witness.is_none(),
        },
        zero_divisor_witness: witness,
    }
}

fn scale(t: &StructureTensor) -> f64 {
    t.to_nested()
        .iter()
        .flatten()
        .flatten()
        .fold(1.0f64, |m, c| m.max(c.abs()))
}

/// Solves `e·e_β = e_β` and `e_β·e = e_β` for all `β`; a rank-deficient or
/// inconsistent system means no unique two-sided identity.
fn find_identity(t: &StructureTensor) -> Option<AlgebraElement> {
    let d = t.dim();
    let rows = 2 * d * d;
    let mut a = DMatrix::zeros(rows, d);
    let mut rhs = DVector::zeros(rows);
    for b in 0..d {
        for g in 0..d {
            let left = b * d + g;
            let right = d * d + left;
            for al in 0..d {
                a[(left, al)] = t.get(g, al, b);
                a[(right, al)] = t.get(g, b, al);
            }
            let delta = if g == b { 1.0 } else { 0.0 };
            rhs[left] = delta;
            rhs[right] = delta;
        }
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 || svd.rank(smax * EXACT_TOL) < d {
        return None;
    }
    let e = svd.solve(&rhs, smax * EXACT_TOL).ok()?;
    let residual = (&a * &e - &rhs).amax();
    if residual > EXACT_TOL * scale(t) * d as f64 {
        return None;
    }
    Some(AlgebraElement(e.iter().copied().collect()))
}

fn is_associative(t: &StructureTensor) -> bool {
    let d = t.dim();
    let tol = EXACT_TOL * scale(t).powi(2) * d as f64;
    let basis: Vec<_> = (0..d).map(|b| t.basis(b)).collect();
    let products: Vec<Vec<AlgebraElement>> = basis
        .iter()
        .map(|x| basis.iter().map(|y| multiply(x, y, t).unwrap()).collect())
        .collect();
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let lhs = multiply(&products[a][b], &basis[c], t).unwrap();
                let rhs = multiply(&basis[a], &products[b][c], t).unwrap();
                if lhs.0.iter().zip(&rhs.0).any(|(l, r)| (l - r).abs() > tol) {
                    return false;
                }
            }
        }
    }
    true
}

/// Nonzero probe elements, ordered by support size so basis elements come first.
fn probe_elements(d: usize) -> Vec<AlgebraElement> {
    let mut out = Vec::new();
    if d <= FULL_PATTERN_DIM {
        let total = 3usize.pow(d as u32);
        for code in 1..total {
            let mut c = vec![0.0; d];
            let mut k = code;
            for slot in c.iter_mut() {
                *slot = [0.0, 1.0, -1.0][k % 3];
                k /= 3;
            }
            out.push(AlgebraElement(c));
        }
    } else {
        for i in 0..d {
            let mut c = vec![0.0; d];
            c[i] = 1.0;
            out.push(AlgebraElement(c));
        }
        for i in 0..d {
            for j in i + 1..d {
                for s in [1.0, -1.0] {
                    let mut c = vec![0.0; d];
                    c[i] = 1.0;
                    c[j] = s;
                    out.push(AlgebraElement(c));
                }
            }
        }
    }
    out.sort_by_key(|e| e.0.iter().filter(|&&c| c != 0.0).count());
    out
}

fn is_null(v: &AlgebraElement, scale: f64) -> bool {
    v.norm() <= EXACT_TOL * scale
}

/// Looks for `b ≠ 0` with `a·b = 0` (or `b·a = 0`) through the kernel of
/// the left and right multiplication matrices of `a`.
fn kernel_witness(t: &StructureTensor, a: &AlgebraElement) -> Option<(AlgebraElement, AlgebraElement)> {
    let left = t.left_multiplication(a).ok()?;
    let d = t.dim();
    let right = DMatrix::from_fn(d, d, |g, al| (0..d).map(|be| t.get(g, al, be) * a.0[be]).sum());
    for (m, a_on_left) in [(left, true), (right, false)] {
        let svd = m.svd(false, true);
        let smax = svd.singular_values.max();
        let (idx, smin) = svd.singular_values.argmin();
        if smin <= EXACT_TOL * smax.max(a.norm()) {
            let v_t = svd.v_t.as_ref()?;
            let b = AlgebraElement(v_t.row(idx).iter().copied().collect());
            return Some(if a_on_left { (a.clone(), b) } else { (b, a.clone()) });
        }
    }
    None
}

fn find_zero_divisor(
    t: &StructureTensor,
    trials: usize,
    seed: u64,
) -> (Option<(AlgebraElement, AlgebraElement)>, usize) {
    let probes = probe_elements(t.dim());
    let s = scale(t);
    for a in &probes {
        for b in &probes {
            let p = multiply(a, b, t).expect("probe dims match");
            if is_null(&p, s * a.norm() * b.norm()) {
                return (Some((a.clone(), b.clone())), probes.len());
            }
        }
    }
    for a in &probes {
        if let Some(w) = kernel_witness(t, a) {
            return (Some(w), probes.len());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let a = AlgebraElement((0..t.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect());
        if a.is_zero() {
            continue;
        }
        if let Some(w) = kernel_witness(t, &a) {
            return (Some(w), probes.len());
        }
    }
    (None, probes.len())
}
