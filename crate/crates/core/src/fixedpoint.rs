//! Picard iteration `xₖ₊₁ = T xₖ` under the equivalent metric, with the
//! Banach error bounds
//!
//! ```text
//! d(xₙ, x*) ≤ αⁿ/(1−α) · d(x₀, x₁)        (a priori)
//! d(xₙ, x*) ≤ α/(1−α) · d(xₙ₋₁, xₙ)       (a posteriori)
//! ```
//!
//! Only a Banach certificate on `d` drives guaranteed iteration. Other kinds
//! are reported by [`certify_and_solve`] without convergence claims.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::catalog::{self, ContractionKind, KindTag, PowerParams};
use crate::cone::{Norm, SolverConfig};
use crate::equiv;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::space::{FiniteConeMetricSpace, SelfMap};

/// Distances and bounds recorded along one run.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace<P> {
    /// `x₀, x₁, …, x_N`.
    pub iterates: Vec<P>,
    /// `d(xₖ, xₖ₊₁)` for `k < N`.
    pub step_d: Vec<f64>,
    /// A priori bound at each `n ≥ 1`: `αⁿ/(1−α) · d(x₀, x₁)`.
    pub apriori: Vec<f64>,
    /// A posteriori bound at each `n ≥ 1`: `α/(1−α) · d(xₙ₋₁, xₙ)`.
    pub aposteriori: Vec<f64>,
}

impl<P> IterationTrace<P> {
    /// Number of map applications.
    pub fn iterations(&self) -> usize {
        self.step_d.len()
    }

    pub fn apriori_bound(&self) -> f64 {
        self.apriori.last().copied().unwrap_or(0.0)
    }

    pub fn aposteriori_bound(&self) -> f64 {
        self.aposteriori.last().copied().unwrap_or(0.0)
    }
}

/// Result of [`picard_iterate`].
#[derive(Clone, Debug, PartialEq)]
pub struct PicardRun<P> {
    pub last: P,
    pub trace: IterationTrace<P>,
    pub converged: bool,
}

/// How [`picard_iterate`] decides it is done.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    /// Stop when `xₖ₊₁ = xₖ` (finite spaces).
    Exact,
    /// Stop when `d(xₖ, xₖ₊₁) ≤ tol·(1−α)/α`, which makes the a posteriori
    /// bound at most `tol`.
    Tolerance(f64),
}

/// Iterates `step` from `x0` for at most `max_iter` applications.
///
/// `alpha ∈ [0, 1)` is the Banach constant used for the bounds. A run that
/// exhausts `max_iter` returns `converged = false`.
pub fn picard_iterate<P: Clone + PartialEq>(
    mut step: impl FnMut(&P) -> P,
    mut dist: impl FnMut(&P, &P) -> f64,
    x0: P,
    alpha: f64,
    stop: StopRule,
    max_iter: usize,
) -> Result<PicardRun<P>> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("contraction constant {alpha} is not in [0, 1)")));
    }
    let threshold = match stop {
        StopRule::Exact => 0.0,
        StopRule::Tolerance(tol) if tol > 0.0 => {
            if alpha == 0.0 {
                f64::INFINITY
            } else {
                tol * (1.0 - alpha) / alpha
            }
        }
        StopRule::Tolerance(_) => return Err(Error::InvalidArgument("tolerance must be positive".into())),
    };
    let ratio = alpha / (1.0 - alpha);
    let mut trace = IterationTrace {
        iterates: vec![x0.clone()],
        step_d: Vec::new(),
        apriori: Vec::new(),
        aposteriori: Vec::new(),
    };
    let mut x = x0;
    let mut first = None;
    let mut power = 1.0;
    for _ in 0..max_iter {
        let next = step(&x);
        let dk = dist(&x, &next);
        let d01 = *first.get_or_insert(dk);
        power *= alpha;
        trace.step_d.push(dk);
        trace.apriori.push(power / (1.0 - alpha) * d01);
        trace.aposteriori.push(ratio * dk);
        trace.iterates.push(next.clone());
        let done = match stop {
            StopRule::Exact => next == x,
            StopRule::Tolerance(_) => dk <= threshold,
        };
        x = next;
        if done {
            return Ok(PicardRun {
                last: x,
                trace,
                converged: true,
            });
        }
    }
    Ok(PicardRun {
        last: x,
        trace,
        converged: false,
    })
}

/// Picard iteration of a tabulated map on a finite space with distance table
/// `d`, stopping exactly at a repeated point.
pub fn iterate_tabulated(d: &[Vec<f64>], map: &SelfMap, start: usize, alpha: f64, max_iter: usize) -> Result<PicardRun<usize>> {
    let images = map.images_for(d.len())?;
    if start >= d.len() {
        return Err(Error::InvalidArgument(format!("start index {start} out of range")));
    }
    let run = picard_iterate(|&i| images[i], |&i, &j| d[i][j], start, alpha, StopRule::Exact, max_iter)?;
    if run.converged {
        Ok(run)
    } else {
        Err(Error::Convergence {
            best: vec![run.last as f64],
            value: run.trace.step_d.last().copied().unwrap_or(0.0),
            residual: run.trace.step_d.last().copied().unwrap_or(0.0),
            iterations: max_iter,
        })
    }
}

/// `d(x, y)` for the coordinatewise cone metric `D(x, y) = (|xᵢ − yᵢ|)ᵢ` on
/// the orthant. Every norm considered here is monotone on the orthant, so
/// `d = ‖D(x, y)‖`.
pub fn affine_demo_distance(norm: &Norm, x: &[f64], y: &[f64]) -> f64 {
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - b).abs()).collect();
    norm.eval(&diff)
}

/// The operator norm of `M` induced by `norm`, which bounds the Banach
/// constant of `x ↦ Mx + b` under [`affine_demo_distance`].
///
/// Exact for ℓ₁ (largest column sum) and ℓ∞ (largest row sum). Euclidean and
/// weighted norms use power iteration on `AᵀA` for `A = W^{1/2} M W^{-1/2}`,
/// accurate to about `1e-12` relative.
pub fn affine_operator_norm(m: &Matrix, norm: &Norm) -> Result<f64> {
    let k = m.rows();
    if m.cols() != k {
        return Err(Error::DimensionMismatch { expected: k, found: m.cols() });
    }
    norm.check_dim(k)?;
    let abs_sum = |cells: &mut dyn Iterator<Item = f64>| cells.map(f64::abs).sum::<f64>();
    Ok(match norm {
        Norm::L1 => (0..k).map(|j| abs_sum(&mut (0..k).map(|i| m.get(i, j)))).fold(0.0, f64::max),
        Norm::LInf => (0..k).map(|i| abs_sum(&mut (0..k).map(|j| m.get(i, j)))).fold(0.0, f64::max),
        Norm::Euclidean | Norm::Weighted(_) => {
            let w: Vec<f64> = match norm {
                Norm::Weighted(w) => w.as_slice().iter().map(|x| libm::sqrt(*x)).collect(),
                _ => vec![1.0; k],
            };
            let mut a = Matrix::zeros(k, k);
            for i in 0..k {
                for j in 0..k {
                    a.set(i, j, w[i] * m.get(i, j) / w[j]);
                }
            }
            let mut v = vec![1.0; k];
            let mut sigma2 = 0.0;
            for _ in 0..1000 {
                let av = a.mul_vec(&v);
                let u = a.tr_mul_vec(&av);
                let nu = linalg::norm2(&u);
                if nu == 0.0 {
                    return Ok(0.0);
                }
                let next = nu / linalg::norm2(&v);
                v = linalg::scale(1.0 / nu, &u);
                if (next - sigma2).abs() <= 1e-15 * next {
                    sigma2 = next;
                    break;
                }
                sigma2 = next;
            }
            libm::sqrt(sigma2)
        }
    })
}

/// Picard iteration of an affine map on ℝᵏ under [`affine_demo_distance`],
/// stopping once the a posteriori bound is at most `tol`.
pub fn iterate_affine(map: &SelfMap, norm: &Norm, x0: Vec<f64>, alpha: f64, tol: f64, max_iter: usize) -> Result<PicardRun<Vec<f64>>> {
    let SelfMap::Affine { matrix, .. } = map else {
        return Err(Error::Unsupported("the affine demo needs an affine map".into()));
    };
    if x0.len() != matrix.cols() {
        return Err(Error::DimensionMismatch {
            expected: matrix.cols(),
            found: x0.len(),
        });
    }
    norm.check_dim(x0.len())?;
    let run = picard_iterate(
        |x: &Vec<f64>| map.apply_affine(x).unwrap_or_default(),
        |x: &Vec<f64>, y: &Vec<f64>| affine_demo_distance(norm, x, y),
        x0,
        alpha,
        StopRule::Tolerance(tol),
        max_iter,
    )?;
    if run.converged {
        Ok(run)
    } else {
        Err(Error::Convergence {
            value: run.trace.aposteriori_bound(),
            residual: run.trace.step_d.last().copied().unwrap_or(f64::NAN),
            best: run.last,
            iterations: max_iter,
        })
    }
}

/// The Banach constant a certificate supplies for iteration.
///
/// Banach kinds pass their `α`. A cross-pair certificate is refused unless
/// `α + β < 1`, and every other kind is refused: the condition may hold, but
/// this engine only iterates under a Banach certificate.
pub fn iteration_constant(kind: &ContractionKind) -> Result<f64> {
    match kind.tag() {
        KindTag::Banach => Ok(kind.coefficients()[0]),
        KindTag::CrossPair => {
            let c = kind.coefficients();
            if c[0] + c[1] >= 1.0 {
                Err(Error::InvalidCoefficients(format!(
                    "cross-pair certificate needs α + β < 1 for iteration, got {}",
                    c[0] + c[1]
                )))
            } else {
                Err(Error::Unsupported("only Banach certificates drive iteration".into()))
            }
        }
        _ => Err(Error::Unsupported("only Banach certificates drive iteration".into())),
    }
}

/// One start point of [`certify_and_solve`].
#[derive(Clone, Debug, PartialEq)]
pub struct StartRun {
    pub start: usize,
    /// The point the iteration settled on, if it settled.
    pub fixed_point: Option<usize>,
    pub trace: IterationTrace<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointReport {
    /// Minimal Banach constant of the map under `d`.
    pub alpha: f64,
    /// `alpha < 1`.
    pub certified: bool,
    /// The common fixed point of all runs, when certified.
    pub fixed_point: Option<usize>,
    pub runs: Vec<StartRun>,
    /// Minimal Kannan and Chatterjea constants under `d`, reported when no
    /// Banach certificate exists. No convergence is claimed from them.
    pub kannan: Option<f64>,
    pub chatterjea: Option<f64>,
    /// Whether every run settled on the same point.
    pub all_agree: bool,
    pub d: Vec<Vec<f64>>,
}

/// Computes `d`, the minimal Banach constant, and iterates from every start.
///
/// Without a certificate the runs are still reported, capped at
/// `cfg.max_iter` steps, but uniqueness is not claimed.
pub fn certify_and_solve(space: &FiniteConeMetricSpace, map: &SelfMap, cfg: &SolverConfig) -> Result<FixedPointReport> {
    let d = equiv::equivalent_metric_table(space, cfg)?.d;
    solve_with_table(d, map, cfg.max_iter)
}

/// [`certify_and_solve`] on a precomputed distance table.
pub fn solve_with_table(d: Vec<Vec<f64>>, map: &SelfMap, max_iter: usize) -> Result<FixedPointReport> {
    let n = d.len();
    let images = map.images_for(n)?.to_vec();
    let alpha = catalog::minimal_constant_metric(&d, map, KindTag::Banach, PowerParams::default())?[0];
    let certified = alpha < 1.0;
    // Bounds are only meaningful under a certificate; otherwise run with α = 0
    // and ignore them.
    let bound_alpha = if certified { alpha } else { 0.0 };
    let mut runs = Vec::with_capacity(n);
    for start in 0..n {
        let run = picard_iterate(|&i| images[i], |&i, &j| d[i][j], start, bound_alpha, StopRule::Exact, max_iter.max(n))?;
        let mut trace = run.trace;
        if !certified {
            trace.apriori.clear();
            trace.aposteriori.clear();
        }
        runs.push(StartRun {
            start,
            fixed_point: run.converged.then_some(run.last),
            trace,
        });
    }
    let first = runs.first().and_then(|r| r.fixed_point);
    let all_agree = runs.iter().all(|r| r.fixed_point.is_some() && r.fixed_point == first);
    let (kannan, chatterjea) = if certified {
        (None, None)
    } else {
        let k = catalog::minimal_constant_metric(&d, map, KindTag::Kannan, PowerParams::default())?[0];
        let c = catalog::minimal_constant_metric(&d, map, KindTag::Chatterjea, PowerParams::default())?[0];
        (Some(k), Some(c))
    };
    Ok(FixedPointReport {
        alpha,
        certified,
        fixed_point: if certified && all_agree { first } else { None },
        runs,
        kannan,
        chatterjea,
        all_agree,
        d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::Cone;
    use alloc::string::ToString;

    fn abs_table(pos: &[f64]) -> Vec<Vec<f64>> {
        pos.iter().map(|a| pos.iter().map(|b| (a - b).abs()).collect()).collect()
    }

    #[test]
    fn constant_map_stops_after_one_step() {
        let d = abs_table(&[0.0, 1.0, 2.0]);
        let run = iterate_tabulated(&d, &SelfMap::constant(3, 1), 0, 0.0, 10).unwrap();
        assert_eq!(run.last, 1);
        // x₁ = 1 and x₂ = 1: the repeat is detected on the second application.
        assert!(run.trace.iterations() <= 2);
    }

    #[test]
    fn floor_half_on_eight_points() {
        let pos: Vec<f64> = (0..8).map(f64::from).collect();
        let d = abs_table(&pos);
        let t = SelfMap::tabulated((0..8).map(|i| i / 2).collect());
        for start in 0..8 {
            let run = iterate_tabulated(&d, &t, start, 0.0, 10).unwrap();
            assert_eq!(run.last, 0);
            let moves = run.trace.step_d.iter().filter(|&&s| s > 0.0).count();
            assert!(moves <= 3, "start {start}: {moves}");
        }
    }

    #[test]
    fn affine_halving_meets_bounds() {
        let m = Matrix::diagonal(&[0.5, 0.5]);
        let t = SelfMap::affine(m.clone(), vec![0.0, 0.0]).unwrap();
        assert!((affine_operator_norm(&m, &Norm::Euclidean).unwrap() - 0.5).abs() < 1e-12);
        let run = iterate_affine(&t, &Norm::Euclidean, vec![1.0, 1.0], 0.5, 1e-6, 100).unwrap();
        assert!(run.trace.iterations() <= 21);
        let zero = [0.0, 0.0];
        assert!(affine_demo_distance(&Norm::Euclidean, &run.last, &zero) <= 1e-6);
        for (n, x) in run.trace.iterates.iter().enumerate().skip(1) {
            let err = affine_demo_distance(&Norm::Euclidean, x, &zero);
            assert!(err <= run.trace.apriori[n - 1] + 1e-15);
            assert!(err <= run.trace.aposteriori[n - 1] + 1e-15);
        }
    }

    #[test]
    fn operator_norms() {
        let m = Matrix::from_rows(&[vec![1.0, -2.0], vec![0.5, 0.25]]).unwrap();
        assert_eq!(affine_operator_norm(&m, &Norm::L1).unwrap(), 2.25);
        assert_eq!(affine_operator_norm(&m, &Norm::LInf).unwrap(), 3.0);
        // Spectral norm of [[1, −2], [0.5, 0.25]]: largest root of
        // σ⁴ − 5.3125σ² + 1.5625 = 0.
        let s2 = (5.3125 + libm::sqrt(5.3125f64 * 5.3125 - 4.0 * 1.5625)) / 2.0;
        assert!((affine_operator_norm(&m, &Norm::Euclidean).unwrap() - libm::sqrt(s2)).abs() < 1e-12);
    }

    #[test]
    fn identity_is_not_certified() {
        let d = abs_table(&[0.0, 1.0, 3.0]);
        let r = solve_with_table(d, &SelfMap::identity(3), 100).unwrap();
        assert_eq!(r.alpha, 1.0);
        assert!(!r.certified);
        assert_eq!(r.fixed_point, None);
        assert!(r.runs.iter().all(|run| run.fixed_point == Some(run.start)));
        assert!(r.kannan.is_some());
    }

    #[test]
    fn doubling_line_certificate() {
        let d = abs_table(&[0.0, 1.0, 3.0, 7.0]);
        let r = solve_with_table(d, &SelfMap::tabulated(vec![0, 0, 1, 2]), 100).unwrap();
        assert_eq!(r.alpha, 0.5);
        assert_eq!(r.fixed_point, Some(0));
        for run in &r.runs {
            let tr = &run.trace;
            for (n, &x) in tr.iterates.iter().enumerate().skip(1) {
                let err = r.d[x][0];
                assert!(err <= tr.apriori[n - 1] + 1e-12);
                assert!(err <= tr.aposteriori[n - 1] + 1e-12);
            }
        }
    }

    #[test]
    fn certify_constant_map_on_space() {
        let rho = abs_table(&[0.0, 1.0, 2.0]);
        let labels = (0..3).map(|i| i.to_string()).collect();
        let s = FiniteConeMetricSpace::from_scalar_metric(labels, Cone::orthant(2).unwrap(), Norm::Euclidean, &rho, &[1.0, 1.0]).unwrap();
        let r = certify_and_solve(&s, &SelfMap::constant(3, 2), &SolverConfig::default()).unwrap();
        assert_eq!(r.alpha, 0.0);
        assert_eq!(r.fixed_point, Some(2));
    }

    #[test]
    fn cross_pair_needs_sum_below_one() {
        let k = ContractionKind::cross_pair(0.6, 0.5).unwrap();
        assert!(matches!(iteration_constant(&k), Err(Error::InvalidCoefficients(_))));
        assert_eq!(iteration_constant(&ContractionKind::banach(0.3).unwrap()).unwrap(), 0.3);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let t = SelfMap::affine(Matrix::diagonal(&[0.999, 0.999]), vec![0.0, 0.0]).unwrap();
        let err = iterate_affine(&t, &Norm::Euclidean, vec![1.0, 1.0], 0.999, 1e-12, 10).unwrap_err();
        assert!(matches!(err, Error::Convergence { iterations: 10, .. }));
    }
}
