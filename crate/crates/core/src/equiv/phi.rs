//! Maps `φ : P → P`, their operator bound `‖φ‖ = sup ‖φ(x)‖ / ‖x‖`, and
//! the radial majorant `ψ(t) = sup_{0 ≠ x ∈ P} ‖φ(t·x/‖x‖)‖`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::cone::{Cone, ConeKind, Norm, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rng;

/// Scalar functions on ℝ⁺ shipped with the crate. Each is nondecreasing,
/// concave, and vanishes at zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarFn {
    /// `x / (1 + x)`.
    Saturating,
    /// `λ x` with `λ ≥ 0`.
    Scale(f64),
    /// `min(x, c)` with `c > 0`.
    Clamp(f64),
}

impl ScalarFn {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ScalarFn::Saturating => x / (1.0 + x),
            ScalarFn::Scale(l) => l * x,
            ScalarFn::Clamp(c) => x.min(c),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ScalarFn::Scale(l) if !(l >= 0.0 && l.is_finite()) => {
                Err(Error::InvalidArgument("scale factor must be finite and ≥ 0".into()))
            }
            ScalarFn::Clamp(c) if !(c > 0.0 && c.is_finite()) => {
                Err(Error::InvalidArgument("clamp level must be finite and > 0".into()))
            }
            _ => Ok(()),
        }
    }
}

/// A map `φ : P → P`.
#[derive(Clone, Debug, PartialEq)]
pub enum PhiSpec {
    /// `φ(x) = M x`; requires `M P ⊆ P`.
    Linear(Matrix),
    /// A scalar function on a one-dimensional cone (ℝ⁺).
    Scalar1D(ScalarFn),
    /// `φ(x) = g(‖x‖₂) · x / ‖x‖₂`, `φ(0) = 0`.
    Radial(ScalarFn),
}

impl PhiSpec {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            PhiSpec::Linear(m) => m.mul_vec(x),
            PhiSpec::Scalar1D(f) => vec![f.eval(x[0])],
            PhiSpec::Radial(g) => {
                let r = linalg::norm2(x);
                if r == 0.0 {
                    vec![0.0; x.len()]
                } else {
                    linalg::scale(g.eval(r) / r, x)
                }
            }
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, PhiSpec::Linear(_))
    }

    /// Checks that `φ` maps `cone` into itself.
    ///
    /// Linear maps on polyhedral cones (and the orthant) are checked exactly
    /// on the extreme rays; on the Lorentz cone the check is sampled. Scalar
    /// maps require the cone to be ℝ⁺.
    pub fn check_maps_into(&self, cone: &Cone, samples: usize, seed: u64) -> Result<()> {
        match self {
            PhiSpec::Scalar1D(f) => {
                f.validate()?;
                if cone.dim() != 1 || !cone.contains(&[1.0], 0.0)? {
                    return Err(Error::Unsupported(
                        "scalar transforms act on the one-dimensional cone ℝ⁺ only".into(),
                    ));
                }
                Ok(())
            }
            PhiSpec::Radial(g) => g.validate(),
            PhiSpec::Linear(m) => {
                if m.rows() != cone.dim() || m.cols() != cone.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: cone.dim(),
                        found: m.rows(),
                    });
                }
                if !m.is_finite() {
                    return Err(Error::NonFinite);
                }
                let mut probes = cone.representative_directions();
                if cone.kind() == ConeKind::Lorentz {
                    let mut r = rng::rng_from_seed(seed);
                    probes.extend((0..samples).map(|_| cone.sample_point(&mut r)));
                }
                for x in &probes {
                    let y = m.mul_vec(x);
                    let tol = DEFAULT_TOL * (1.0 + linalg::norm2(&y));
                    if !cone.contains(&y, tol)? {
                        return Err(Error::InvalidArgument(format!(
                            "linear map sends {x:?} outside the cone"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Estimate (lower bound) of `‖φ‖` restricted to the cone.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorBound {
    /// Largest sampled ratio `‖φ(x)‖ / ‖x‖`.
    pub sampled: f64,
    /// Power-iteration value of `sup_{x ≥ 0} ‖Mx‖₂ / ‖x‖₂`, computed for
    /// linear maps on the orthant with the Euclidean norm.
    pub power_iteration: Option<f64>,
}

impl OperatorBound {
    pub fn value(&self) -> f64 {
        self.power_iteration.map_or(self.sampled, |p| p.max(self.sampled))
    }
}

/// Unit-norm directions in the cone: representative directions, the interior
/// point, and `samples` random cone points, all normalized.
fn unit_directions(cone: &Cone, norm: &Norm, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::rng_from_seed(seed);
    let mut dirs = cone.representative_directions();
    dirs.push(cone.interior_point());
    dirs.extend((0..samples).map(|_| cone.sample_point(&mut r)));
    dirs.into_iter()
        .filter_map(|x| {
            let n = norm.eval(&x);
            (n > 0.0).then(|| linalg::scale(1.0 / n, &x))
        })
        .collect()
}

/// Magnitudes at which the ratio of a nonlinear φ is probed.
const PROBE_SCALES: [f64; 13] = [1e-9, 1e-6, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0, 1e3, 1e6];

pub fn phi_operator_bound(phi: &PhiSpec, cone: &Cone, norm: &Norm, samples: usize, seed: u64) -> Result<OperatorBound> {
    phi.check_maps_into(cone, samples, seed)?;
    norm.check_dim(cone.dim())?;
    let dirs = unit_directions(cone, norm, samples, seed);
    let scales: &[f64] = if phi.is_linear() { &[1.0] } else { &PROBE_SCALES };
    let mut sampled = 0.0f64;
    for u in &dirs {
        for &s in scales {
            let x = linalg::scale(s, u);
            let nx = norm.eval(&x);
            if nx > 0.0 {
                sampled = sampled.max(norm.eval(&phi.apply(&x)) / nx);
            }
        }
    }
    let power_iteration = match (phi, cone.kind(), norm) {
        (PhiSpec::Linear(m), ConeKind::Orthant, Norm::Euclidean) => Some(nonnegative_power_iteration(m)),
        _ => None,
    };
    Ok(OperatorBound {
        sampled,
        power_iteration,
    })
}

/// `sup_{x ≥ 0} ‖Mx‖₂/‖x‖₂` for entrywise nonnegative `M`, by power
/// iteration on `MᵀM` from the all-ones vector (Perron vector is nonnegative).
fn nonnegative_power_iteration(m: &Matrix) -> f64 {
    let n = m.cols();
    let mut x = vec![1.0 / libm::sqrt(n as f64); n];
    let mut value = 0.0;
    for _ in 0..10_000 {
        let y = m.tr_mul_vec(&m.mul_vec(&x));
        let ny = linalg::norm2(&y);
        if ny == 0.0 {
            return 0.0;
        }
        let next = linalg::scale(1.0 / ny, &y);
        let v = linalg::norm2(&m.mul_vec(&next));
        let done = (v - value).abs() <= 1e-15 * v.max(1.0) && linalg::distance2(&next, &x) < 1e-13;
        value = v;
        x = next;
        if done {
            break;
        }
    }
    value
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsiMethod {
    /// One-dimensional cone: the unit sphere of the cone is a single point.
    OnePoint,
    /// Linear order-preserving φ: `ψ(t) = t ‖φ‖`.
    LinearClosedForm,
    /// Supremum over sampled unit directions of the cone.
    Sampled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsiEstimate {
    pub value: f64,
    pub method: PsiMethod,
}

/// `ψ(t) = sup_{0 ≠ x ∈ P} ‖φ(t·x/‖x‖)‖`.
pub fn psi_from_phi(phi: &PhiSpec, cone: &Cone, norm: &Norm, t: f64, samples: usize, seed: u64) -> Result<PsiEstimate> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument("ψ is defined for finite t ≥ 0".into()));
    }
    phi.check_maps_into(cone, samples, seed)?;
    norm.check_dim(cone.dim())?;
    if cone.dim() == 1 {
        let ray = if cone.contains(&[1.0], 0.0)? { 1.0 } else { -1.0 };
        let u = [ray / norm.eval(&[ray])];
        let x = [t * u[0]];
        return Ok(PsiEstimate {
            value: norm.eval(&phi.apply(&x)),
            method: PsiMethod::OnePoint,
        });
    }
    if phi.is_linear() {
        let bound = phi_operator_bound(phi, cone, norm, samples, seed)?;
        return Ok(PsiEstimate {
            value: t * bound.value(),
            method: PsiMethod::LinearClosedForm,
        });
    }
    let value = unit_directions(cone, norm, samples, seed)
        .iter()
        .map(|u| norm.eval(&phi.apply(&linalg::scale(t, u))))
        .fold(0.0f64, f64::max);
    Ok(PsiEstimate {
        value,
        method: PsiMethod::Sampled,
    })
}

/// Whether sampled values of ψ on `ts` (sorted ascending) are nonincreasing.
///
/// Since `ψ(0) = 0` and `ψ ≥ 0`, a nonincreasing ψ is identically zero; for
/// every shipped φ other than the zero map this returns `false`.
pub fn psi_is_decreasing(phi: &PhiSpec, cone: &Cone, norm: &Norm, ts: &[f64], samples: usize, seed: u64) -> Result<bool> {
    let mut prev = f64::INFINITY;
    for &t in ts {
        let v = psi_from_phi(phi, cone, norm, t, samples, seed)?.value;
        if v > prev + 1e-15 {
            return Ok(false);
        }
        prev = v;
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturating_bound_approaches_one() {
        let c = Cone::orthant(1).unwrap();
        let b = phi_operator_bound(&PhiSpec::Scalar1D(ScalarFn::Saturating), &c, &Norm::Euclidean, 100, 3).unwrap();
        assert!(b.value() >= 0.99 && b.value() <= 1.0);
    }

    #[test]
    fn diagonal_bound_is_largest_entry() {
        let c = Cone::orthant(2).unwrap();
        let phi = PhiSpec::Linear(Matrix::diagonal(&[2.0, 3.0]));
        let b = phi_operator_bound(&phi, &c, &Norm::Euclidean, 500, 3).unwrap();
        assert!((b.sampled - 3.0).abs() < 1e-3);
        assert!((b.power_iteration.unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn identity_bound_is_one() {
        let c = Cone::lorentz(3).unwrap();
        let b = phi_operator_bound(&PhiSpec::Linear(Matrix::identity(3)), &c, &Norm::Euclidean, 100, 3).unwrap();
        assert!((b.value() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psi_examples() {
        let r1 = Cone::orthant(1).unwrap();
        let sat = PhiSpec::Scalar1D(ScalarFn::Saturating);
        for t in [0.0, 0.1, 1.0, 10.0] {
            let p = psi_from_phi(&sat, &r1, &Norm::Euclidean, t, 10, 1).unwrap();
            assert_eq!(p.method, PsiMethod::OnePoint);
            assert_eq!(p.value, t / (1.0 + t));
        }
        let o2 = Cone::orthant(2).unwrap();
        let lin = PhiSpec::Linear(Matrix::diagonal(&[2.0, 3.0]));
        let p = psi_from_phi(&lin, &o2, &Norm::Euclidean, 2.0, 100, 1).unwrap();
        assert!((p.value - 6.0).abs() < 2e-3);
        assert_eq!(psi_from_phi(&lin, &o2, &Norm::Euclidean, 0.0, 100, 1).unwrap().value, 0.0);
    }

    #[test]
    fn non_invariant_linear_map_is_rejected() {
        let o2 = Cone::orthant(2).unwrap();
        let rot = PhiSpec::Linear(Matrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap());
        assert!(rot.check_maps_into(&o2, 10, 0).is_err());
    }

    #[test]
    fn shipped_psi_is_not_decreasing() {
        let o2 = Cone::orthant(2).unwrap();
        let ts = [0.1, 0.5, 1.0, 2.0, 10.0];
        let radial = PhiSpec::Radial(ScalarFn::Saturating);
        assert!(!psi_is_decreasing(&radial, &o2, &Norm::Euclidean, &ts, 50, 0).unwrap());
        let zero = PhiSpec::Radial(ScalarFn::Scale(0.0));
        assert!(psi_is_decreasing(&zero, &o2, &Norm::Euclidean, &ts, 50, 0).unwrap());
    }
}
