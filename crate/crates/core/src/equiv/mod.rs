//! The equivalent real metric `d(x, y) = inf { ‖u‖ : D(x, y) ≤ u }`.
//!
//! For `v = D(x, y) ∈ P` the feasible set is the translated cone `v + P`,
//! so `d` is the norm of the minimum-norm point of `v + P`. Since `u = v` is
//! feasible the optimum always satisfies `‖u‖ ≤ ‖v‖`.
//!
//! Three solution paths are used, chosen from the cone and norm alone:
//!
//! * Euclidean norm: `d = ‖v + proj_P(−v)‖₂`, the distance from `−v` to `P`.
//! * A norm certified monotone on the cone: the infimum is attained at
//!   `u = v`, so `d = ‖v‖`.
//! * ℓ₁ on the Lorentz cone: `d = ‖x‖₂ + t` for `v = (x, t)`. In the dual
//!   form `max ⟨y, v⟩` over `y ∈ P*` with `‖y‖_∞ ≤ 1`, the box is implied by
//!   `‖y_x‖₂ ≤ y_t ≤ 1`, leaving `y = (x/‖x‖₂, 1)`.
//! * ℓ₁ or ℓ∞ on a polyhedral cone: a linear program over the extreme rays.
//! * Weighted Euclidean norm `‖u‖_W = ‖W^{1/2} u‖₂` on a polyhedral cone:
//!   the Euclidean case for the cone spanned by the scaled rays `W^{1/2} r`.
//! * Otherwise: projected subgradient descent over `p ∈ P` on `‖v + p‖`
//!   from several seeded starts.
//!
//! [`brute_force_distance`] is an independent grid oracle for dimensions up
//! to three.

mod phi;

pub use phi::{phi_operator_bound, psi_from_phi, psi_is_decreasing, OperatorBound, PhiSpec, PsiEstimate, PsiMethod, ScalarFn};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::cone::{Cone, ConeKind, Norm, SolverConfig, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng;
use crate::space::FiniteConeMetricSpace;

/// `min ‖u‖` subject to `u − v ∈ P`.
#[derive(Clone, Copy, Debug)]
pub struct MinNormProblem<'a> {
    v: &'a [f64],
    cone: &'a Cone,
    norm: &'a Norm,
}

impl<'a> MinNormProblem<'a> {
    /// Fails unless `v` lies in the cone (within the default tolerance).
    pub fn new(v: &'a [f64], cone: &'a Cone, norm: &'a Norm) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        norm.check_dim(cone.dim())?;
        if !cone.contains(v, DEFAULT_TOL)? {
            let distance = cone
                .project(v, &SolverConfig::default())
                .map(|p| linalg::distance2(&p, v))
                .unwrap_or(f64::NAN);
            return Err(Error::NotInCone { distance });
        }
        Ok(Self { v, cone, norm })
    }

    pub fn v(&self) -> &[f64] {
        self.v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverMethod {
    /// Euclidean norm through the projection identity.
    Projection,
    /// Norm known to be monotone on the cone; `d = ‖v‖`.
    Monotone,
    /// ℓ₁ norm on the Lorentz cone.
    LorentzL1,
    /// ℓ₁ or ℓ∞ norm on a polyhedral cone.
    LinearProgram,
    /// Weighted Euclidean norm on a polyhedral cone.
    ScaledProjection,
    /// Projected subgradient descent.
    Subgradient,
}

impl SolverMethod {
    /// Report label: every exact path is "closed-form".
    pub fn label(&self) -> &'static str {
        match self {
            SolverMethod::Subgradient => "subgradient",
            _ => "closed-form",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SolverMethod::Projection => "projection",
            SolverMethod::Monotone => "monotone",
            SolverMethod::LorentzL1 => "lorentz-l1",
            SolverMethod::LinearProgram => "linear-program",
            SolverMethod::ScaledProjection => "scaled-projection",
            SolverMethod::Subgradient => "subgradient",
        }
    }
}

/// The solution path [`equivalent_distance`] takes for this cone and norm.
pub fn select_method(cone: &Cone, norm: &Norm) -> SolverMethod {
    if *norm == Norm::Euclidean {
        SolverMethod::Projection
    } else if cone.norm_is_certified_monotone(norm) {
        SolverMethod::Monotone
    } else {
        match (cone.kind(), norm) {
            (ConeKind::Lorentz, Norm::L1) => SolverMethod::LorentzL1,
            (ConeKind::Generators | ConeKind::Halfspaces, Norm::L1 | Norm::LInf) => SolverMethod::LinearProgram,
            (ConeKind::Generators | ConeKind::Halfspaces, Norm::Weighted(_)) => SolverMethod::ScaledProjection,
            _ => SolverMethod::Subgradient,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Solution {
    pub value: f64,
    pub method: SolverMethod,
}

/// Computes `inf { ‖u‖ : v ≤ u }` for the problem's `v`.
pub fn equivalent_distance(prob: &MinNormProblem<'_>, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    let method = select_method(prob.cone, prob.norm);
    let upper = prob.norm.eval(prob.v);
    let value = match method {
        SolverMethod::Projection => {
            let neg: Vec<f64> = prob.v.iter().map(|x| -x).collect();
            let p = prob.cone.project(&neg, cfg)?;
            linalg::norm2(&linalg::add(prob.v, &p)).min(upper)
        }
        SolverMethod::Monotone => upper,
        SolverMethod::LorentzL1 => {
            let (x, t) = prob.v.split_at(prob.v.len() - 1);
            (linalg::norm2(x) + t[0]).min(upper)
        }
        SolverMethod::LinearProgram => polyhedral_lp_distance(prob)?.min(upper),
        SolverMethod::ScaledProjection => scaled_projection_distance(prob, cfg)?.min(upper),
        SolverMethod::Subgradient => subgradient_distance(prob, cfg)?,
    };
    Ok(Solution { value, method })
}

/// `min ‖W^{1/2}(v + Gλ)‖₂` over `λ ≥ 0`: the distance from `−W^{1/2} v` to
/// the cone spanned by the scaled rays.
fn scaled_projection_distance(prob: &MinNormProblem<'_>, cfg: &SolverConfig) -> Result<f64> {
    let (Some(rays), Norm::Weighted(w)) = (prob.cone.extreme_rays(), prob.norm) else {
        return Err(Error::Unsupported("scaled projection needs a polyhedral cone and a weighted norm".into()));
    };
    let root: Vec<f64> = w.as_slice().iter().map(|x| libm::sqrt(*x)).collect();
    let scaled: Vec<Vec<f64>> = rays
        .iter()
        .map(|r| r.iter().zip(&root).map(|(a, b)| a * b).collect())
        .collect();
    let target: Vec<f64> = prob.v.iter().zip(&root).map(|(a, b)| -a * b).collect();
    let sol = linalg::nnls(&scaled, &target, cfg.max_iter);
    if sol.converged {
        Ok(sol.residual)
    } else {
        Err(Error::Convergence {
            best: prob.v.to_vec(),
            value: prob.norm.eval(prob.v),
            residual: sol.residual,
            iterations: sol.iterations,
        })
    }
}

/// `min ‖v + Gλ‖` over `λ ≥ 0` for the extreme rays `G`, as a linear program
/// in `(λ, s) ≥ 0` with `s` bounding `|v + Gλ|` entrywise (ℓ₁) or as a
/// single scalar (ℓ∞).
fn polyhedral_lp_distance(prob: &MinNormProblem<'_>) -> Result<f64> {
    let rays = prob
        .cone
        .extreme_rays()
        .ok_or_else(|| Error::Unsupported("linear program needs a polyhedral cone".into()))?;
    let n = prob.v.len();
    let k = rays.len();
    let slacks = match prob.norm {
        Norm::L1 => n,
        Norm::LInf => 1,
        _ => return Err(Error::Unsupported("linear program needs the l1 or l-infinity norm".into())),
    };
    let mut m = Vec::with_capacity(2 * n);
    let mut c = Vec::with_capacity(2 * n);
    for sign in [-1.0, 1.0] {
        for i in 0..n {
            let mut row = vec![0.0; k + slacks];
            for (j, r) in rays.iter().enumerate() {
                row[j] = sign * r[i];
            }
            row[k + if slacks == 1 { 0 } else { i }] = 1.0;
            m.push(row);
            c.push(-sign * prob.v[i]);
        }
    }
    let mut w = vec![0.0; k + slacks];
    w[k..].iter_mut().for_each(|x| *x = 1.0);
    match linalg::lp_min_cover(&m, &c, &w) {
        linalg::LpOutcome::Optimal { objective, .. } => Ok(objective),
        linalg::LpOutcome::Infeasible => Err(Error::InvalidArgument("minimum-norm program reported infeasible".into())),
        linalg::LpOutcome::Stalled => Err(Error::Convergence {
            best: prob.v.to_vec(),
            value: prob.norm.eval(prob.v),
            residual: f64::NAN,
            iterations: 10_000,
        }),
    }
}

/// The generic path of [`equivalent_distance`], callable for any norm.
///
/// Each of `cfg.restarts` starts runs normalized projected subgradient steps
/// `p ← proj_P(p − η_k g/‖g‖₂)` over `p ∈ P`, with `g ∈ ∂‖v + p‖` and a
/// geometric step schedule from `‖v‖₂` down to `cfg.tol / 2`. A start
/// terminates once a step moves `p` by less than `cfg.tol`. The best value
/// seen is returned and never exceeds `‖v‖`.
pub fn subgradient_distance(prob: &MinNormProblem<'_>, cfg: &SolverConfig) -> Result<f64> {
    cfg.validate()?;
    let v = prob.v;
    let norm = prob.norm;
    let mut best = norm.eval(v);
    let scale = linalg::norm2(v);
    if best == 0.0 {
        return Ok(0.0);
    }
    let dim = v.len();
    let restarts = cfg.restarts.max(1);
    let budget = (cfg.max_iter / restarts).max(1);
    let ratio = libm::pow(0.5 * cfg.tol / scale, 1.0 / budget as f64).min(1.0 - 1e-9);
    let mut best_p = vec![0.0; dim];
    let mut converged = false;
    let mut last_move = f64::INFINITY;
    let mut r = rng::rng_from_seed(cfg.seed);
    for start in 0..restarts {
        let mut p = match start {
            0 => vec![0.0; dim],
            s if s % 2 == 1 => best_p.clone(),
            _ => {
                use rand::Rng as _;
                let q = prob.cone.sample_point(&mut r);
                let qn = linalg::norm2(&q);
                if qn > 0.0 {
                    linalg::scale(scale * r.gen::<f64>() / qn, &q)
                } else {
                    q
                }
            }
        };
        let mut step = scale;
        for _ in 0..budget {
            let u = linalg::add(v, &p);
            let value = norm.eval(&u);
            if value < best {
                best = value;
                best_p.clone_from(&p);
            }
            let g = norm.subgradient(&u);
            let gn = linalg::norm2(&g);
            if gn == 0.0 {
                converged = true;
                last_move = 0.0;
                break;
            }
            let mut trial = p.clone();
            linalg::axpy(-step / gn, &g, &mut trial);
            let next = prob.cone.project(&trial, cfg)?.into_inner();
            last_move = linalg::distance2(&next, &p);
            p = next;
            step *= ratio;
            if last_move < cfg.tol {
                converged = true;
                break;
            }
        }
        let value = norm.eval(&linalg::add(v, &p));
        if value < best {
            best = value;
            best_p.clone_from(&p);
        }
    }
    if converged {
        Ok(best)
    } else {
        Err(Error::Convergence {
            best: linalg::add(v, &best_p),
            value: best,
            residual: last_move,
            iterations: budget * restarts,
        })
    }
}

/// Exact membership used by the oracle: explicit inequalities only, no
/// projection.
fn in_cone_by_inequalities(cone: &Cone, x: &[f64]) -> bool {
    const EPS: f64 = 1e-12;
    match cone.kind() {
        ConeKind::Lorentz => {
            let (head, t) = x.split_at(x.len() - 1);
            linalg::norm2(head) <= t[0] + EPS
        }
        _ => cone
            .facet_normals()
            .map(|ns| ns.iter().all(|nrm| linalg::dot(nrm, x) >= -EPS))
            .unwrap_or(false),
    }
}

/// Grid oracle for `inf { ‖u‖ : v ≤ u }` in dimensions 1–3.
///
/// Enumerates `u` over the box `‖u‖_∞ ≤ 2‖v‖_∞ + 1` on a coarse grid and
/// keeps the best feasible points. At each spacing it then walks: boxes of
/// two cells around the kept points are re-gridded until the best value
/// stops improving. The spacing shrinks until it is at most
/// `cfg.grid_resolution`. Feasibility uses the cone's explicit
/// inequalities, never a projection.
pub fn brute_force_distance(prob: &MinNormProblem<'_>, cfg: &SolverConfig) -> Result<f64> {
    cfg.validate()?;
    let dim = prob.v.len();
    if dim > 3 {
        return Err(Error::Unsupported(format!(
            "grid oracle supports dimensions up to 3, got {dim}"
        )));
    }
    let v = prob.v;
    let norm = prob.norm;
    let start = norm.eval(v);
    if start == 0.0 {
        return Ok(0.0);
    }
    const KEEP: usize = 16;
    const MAX_WALK: usize = 10_000;
    let points_per_axis: usize = match dim {
        1 => 1025,
        2 => 129,
        _ => 33,
    };
    let mut kept: Vec<(f64, Vec<f64>)> = vec![(start, v.to_vec())];
    let half = 2.0 * v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + 1.0;
    let mut h = 2.0 * half / (points_per_axis - 1) as f64;
    grid_scan(prob, &[vec![0.0; dim]], half, points_per_axis, KEEP, &mut kept);
    loop {
        for _ in 0..MAX_WALK {
            let before = kept[0].0;
            let centers: Vec<Vec<f64>> = kept.iter().map(|(_, p)| p.clone()).collect();
            grid_scan(prob, &centers, 2.0 * h, 5, KEEP, &mut kept);
            if kept[0].0 >= before {
                break;
            }
        }
        if h <= cfg.grid_resolution {
            return Ok(kept[0].0);
        }
        let centers: Vec<Vec<f64>> = kept.iter().map(|(_, p)| p.clone()).collect();
        let half = 2.0 * h;
        h = 2.0 * half / (points_per_axis - 1) as f64;
        grid_scan(prob, &centers, half, points_per_axis, KEEP, &mut kept);
    }
}

/// Scans `points_per_axis` grid points per axis over `center ± half` for
/// each center, merging feasible points into the sorted list `kept`.
fn grid_scan(
    prob: &MinNormProblem<'_>,
    centers: &[Vec<f64>],
    half: f64,
    points_per_axis: usize,
    keep: usize,
    kept: &mut Vec<(f64, Vec<f64>)>,
) {
    let dim = prob.v.len();
    let h = 2.0 * half / (points_per_axis - 1) as f64;
    let mut idx = vec![0usize; dim];
    let mut u = vec![0.0; dim];
    let mut diff = vec![0.0; dim];
    for c in centers {
        idx.iter_mut().for_each(|i| *i = 0);
        'grid: loop {
            for k in 0..dim {
                u[k] = c[k] - half + idx[k] as f64 * h;
                diff[k] = u[k] - prob.v[k];
            }
            if in_cone_by_inequalities(prob.cone, &diff) {
                let val = prob.norm.eval(&u);
                if (kept.len() < keep || val < kept[kept.len() - 1].0) && !kept.iter().any(|(_, p)| *p == u) {
                    let pos = kept.partition_point(|(x, _)| *x <= val);
                    kept.insert(pos, (val, u.clone()));
                    kept.truncate(keep);
                }
            }
            let mut k = 0;
            loop {
                if k == dim {
                    break 'grid;
                }
                idx[k] += 1;
                if idx[k] < points_per_axis {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}

/// Solver configuration for table entry `(i, j)`: the seed is split from
/// `cfg.seed` so entries can be evaluated in any order.
pub fn entry_config(cfg: &SolverConfig, i: usize, j: usize) -> SolverConfig {
    SolverConfig {
        seed: rng::split_path(cfg.seed, &[i as u64, j as u64]),
        ..cfg.clone()
    }
}

/// `d(i, j)` for one pair of a space.
pub fn equivalent_distance_entry(space: &FiniteConeMetricSpace, i: usize, j: usize, cfg: &SolverConfig) -> Result<Solution> {
    let wrap = |e: Error| Error::At {
        i,
        j,
        source: alloc::boxed::Box::new(e),
    };
    let prob = MinNormProblem::new(space.distance(i, j), space.cone(), space.norm()).map_err(wrap)?;
    equivalent_distance(&prob, &entry_config(cfg, i, j)).map_err(wrap)
}

/// Tolerance of the triangle-inequality assertion on `d`.
pub const TRIANGLE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct EquivTable {
    pub d: Vec<Vec<f64>>,
    pub method: SolverMethod,
}

/// Builds the symmetric table from upper-triangle values listed row by row
/// (`(0,1), (0,2), …, (1,2), …`) and asserts the triangle inequality.
#[allow(clippy::needless_range_loop)]
pub fn assemble_table(n: usize, upper: &[f64], method: SolverMethod) -> Result<EquivTable> {
    let mut d = vec![vec![0.0; n]; n];
    let mut it = upper.iter();
    for i in 0..n {
        for j in i + 1..n {
            let v = *it.next().ok_or(Error::DimensionMismatch {
                expected: n * (n - 1) / 2,
                found: upper.len(),
            })?;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let excess = d[i][j] - d[i][k] - d[k][j];
                if excess > TRIANGLE_TOL {
                    return Err(Error::TriangleViolation { i, j, k, excess });
                }
            }
        }
    }
    Ok(EquivTable { d, method })
}

/// The full equivalent-metric table of a space.
pub fn equivalent_metric_table(space: &FiniteConeMetricSpace, cfg: &SolverConfig) -> Result<EquivTable> {
    let n = space.len();
    let mut upper = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for i in 0..n {
        for j in i + 1..n {
            upper.push(equivalent_distance_entry(space, i, j, cfg)?.value);
        }
    }
    assemble_table(n, &upper, select_method(space.cone(), space.norm()))
}
