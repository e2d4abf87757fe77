//! Closed, pointed, solid convex cones in ℝⁿ and the partial order they induce.
//!
//! Four families are supported: the nonnegative orthant, the Lorentz
//! (second-order) cone, and polyhedral cones given either by generators
//! (`P = {G λ : λ ≥ 0}`) or by inward halfspace normals (`P = {x : A x ≥ 0}`).
//!
//! The Lorentz cone uses the *last* coordinate as its height:
//! `{(x, t) : ‖x‖₂ ≤ t}`.
//!
//! Polyhedral cones are validated at construction (solid and pointed) and
//! carry both descriptions internally: unit facet normals and unit extreme
//! rays are computed by exhaustive facet enumeration, which is exact for the
//! small dimensions this crate targets.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rng;

/// Default membership tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A finite vector of ℝⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().all(|v| v.is_finite()) {
            Ok(Self(entries))
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector(linalg::add(&self.0, &other.0))
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector(linalg::sub(&self.0, &other.0))
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(linalg::scale(s, &self.0))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    /// Internal constructor for values produced by arithmetic on finite data.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        Self(entries)
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Positive weights for [`Norm::Weighted`].
#[derive(Clone, Debug, PartialEq)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidNorm("empty weight vector".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidNorm("weights must be positive and finite".into()));
        }
        Ok(Self(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// A norm on ℝⁿ.
#[derive(Clone, Debug, PartialEq)]
pub enum Norm {
    Euclidean,
    L1,
    LInf,
    /// `sqrt(Σ wᵢ vᵢ²)`.
    Weighted(Weights),
}

impl Norm {
    pub fn weighted(weights: Vec<f64>) -> Result<Self> {
        Ok(Norm::Weighted(Weights::new(weights)?))
    }

    /// Checks that the norm can be evaluated on vectors of dimension `dim`.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            Norm::Weighted(w) if w.0.len() != dim => Err(Error::DimensionMismatch {
                expected: dim,
                found: w.0.len(),
            }),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, v: &[f64]) -> f64 {
        match self {
            Norm::Euclidean => linalg::norm2(v),
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
            Norm::LInf => v.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            Norm::Weighted(w) => {
                debug_assert_eq!(w.0.len(), v.len());
                libm::sqrt(w.0.iter().zip(v).map(|(w, x)| w * x * x).sum())
            }
        }
    }

    /// The dual norm `‖y‖_* = sup_{‖x‖ ≤ 1} ⟨x, y⟩`.
    pub fn dual(&self) -> Norm {
        match self {
            Norm::Euclidean => Norm::Euclidean,
            Norm::L1 => Norm::LInf,
            Norm::LInf => Norm::L1,
            Norm::Weighted(w) => Norm::Weighted(Weights(w.0.iter().map(|x| 1.0 / x).collect())),
        }
    }

    /// Lipschitz constant of the norm with respect to the Euclidean distance
    /// on ℝⁿ, i.e. the smallest `L` with `‖x‖ ≤ L ‖x‖₂`.
    pub fn euclidean_lipschitz(&self, dim: usize) -> f64 {
        match self {
            Norm::Euclidean | Norm::LInf => 1.0,
            Norm::L1 => libm::sqrt(dim as f64),
            Norm::Weighted(w) => libm::sqrt(w.0.iter().fold(0.0f64, |m, x| m.max(*x))),
        }
    }

    /// One element of the subdifferential of the norm at `u` (zero at `u = 0`).
    pub fn subgradient(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        match self {
            Norm::Euclidean => {
                let r = linalg::norm2(u);
                if r == 0.0 {
                    vec![0.0; n]
                } else {
                    linalg::scale(1.0 / r, u)
                }
            }
            Norm::L1 => u.iter().map(|x| sign(*x)).collect(),
            Norm::LInf => {
                let mut g = vec![0.0; n];
                if let Some((k, _)) = u
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| **x != 0.0)
                    .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                {
                    g[k] = sign(u[k]);
                }
                g
            }
            Norm::Weighted(w) => {
                let r = self.eval(u);
                if r == 0.0 {
                    vec![0.0; n]
                } else {
                    w.0.iter().zip(u).map(|(w, x)| w * x / r).collect()
                }
            }
        }
    }
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Evaluates a norm, checking dimensions.
pub fn norm_eval(norm: &Norm, v: &[f64]) -> Result<f64> {
    norm.check_dim(v.len())?;
    Ok(norm.eval(v))
}

/// Tolerances and budgets shared by the iterative solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Grid spacing of the brute-force oracle.
    pub grid_resolution: f64,
    /// Number of seeded starts of the generic subgradient solver.
    pub restarts: usize,
    /// Root seed for randomized starts; per-entry seeds are split from it.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: 10_000,
            grid_resolution: 1e-3,
            restarts: 8,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 || !(self.grid_resolution > 0.0) {
            return Err(Error::InvalidArgument(
                "solver config needs tol > 0, max_iter ≥ 1, grid_resolution > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConeKind {
    Orthant,
    Lorentz,
    Generators,
    Halfspaces,
}

#[derive(Clone, Debug, PartialEq)]
struct Polyhedral {
    /// Generators as columns (generator form) or normals as rows (halfspace form).
    matrix: Matrix,
    /// Unit inward facet normals.
    normals: Vec<Vec<f64>>,
    /// Unit extreme rays (for generator form: the normalized generators).
    rays: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    Orthant,
    Lorentz,
    Generators(Polyhedral),
    Halfspaces(Polyhedral),
}

/// A closed, convex, pointed, solid cone in ℝⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct Cone {
    dim: usize,
    shape: Shape,
}

impl Cone {
    pub fn orthant(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidCone("dimension must be at least 1".into()));
        }
        Ok(Self {
            dim,
            shape: Shape::Orthant,
        })
    }

    pub fn lorentz(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidCone("dimension must be at least 1".into()));
        }
        Ok(Self {
            dim,
            shape: Shape::Lorentz,
        })
    }

    /// Cone generated by the columns of `g` (an `n × m` matrix).
    pub fn generators(g: Matrix) -> Result<Self> {
        if !g.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = g.rows();
        let gens = g.columns();
        if gens.iter().any(|c| linalg::norm2(c) == 0.0) {
            return Err(Error::InvalidCone("zero generator".into()));
        }
        if g.rank() != n {
            return Err(Error::InvalidCone(format!(
                "generators span a subspace of dimension {} < {n}; the cone is not solid",
                g.rank()
            )));
        }
        let rays: Vec<Vec<f64>> = gens.iter().map(|c| unit(c)).collect();
        let normals = facet_normals(&rays, n);
        if linalg::rank_of_rows(&normals, n) != n {
            return Err(Error::InvalidCone(
                "generators contain a line; the cone is not pointed".into(),
            ));
        }
        Ok(Self {
            dim: n,
            shape: Shape::Generators(Polyhedral {
                matrix: g,
                normals,
                rays,
            }),
        })
    }

    /// Cone `{x : A x ≥ 0}` for an `m × n` matrix `a` of inward normals.
    pub fn halfspaces(a: Matrix) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let n = a.cols();
        let rows = a.to_rows();
        if rows.iter().any(|r| linalg::norm2(r) == 0.0) {
            return Err(Error::InvalidCone("zero halfspace normal".into()));
        }
        if a.rank() != n {
            return Err(Error::InvalidCone(format!(
                "normals have rank {} < {n}; the cone contains a line and is not pointed",
                a.rank()
            )));
        }
        let normals: Vec<Vec<f64>> = rows.iter().map(|r| unit(r)).collect();
        let rays = facet_normals(&normals, n);
        if linalg::rank_of_rows(&rays, n) != n {
            return Err(Error::InvalidCone(
                "no x with A x > 0 exists; the cone is not solid".into(),
            ));
        }
        Ok(Self {
            dim: n,
            shape: Shape::Halfspaces(Polyhedral {
                matrix: a,
                normals,
                rays,
            }),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ConeKind {
        match self.shape {
            Shape::Orthant => ConeKind::Orthant,
            Shape::Lorentz => ConeKind::Lorentz,
            Shape::Generators(_) => ConeKind::Generators,
            Shape::Halfspaces(_) => ConeKind::Halfspaces,
        }
    }

    /// Generator matrix (columns) or halfspace matrix (rows) of a polyhedral cone.
    pub fn matrix(&self) -> Option<&Matrix> {
        match &self.shape {
            Shape::Generators(p) | Shape::Halfspaces(p) => Some(&p.matrix),
            _ => None,
        }
    }

    /// Unit inward facet normals of a polyhedral cone (orthant: unit axes).
    pub fn facet_normals(&self) -> Option<Vec<Vec<f64>>> {
        match &self.shape {
            Shape::Orthant => Some(axes(self.dim)),
            Shape::Lorentz => None,
            Shape::Generators(p) | Shape::Halfspaces(p) => Some(p.normals.clone()),
        }
    }

    /// Unit extreme rays of a polyhedral cone (orthant: unit axes).
    pub fn extreme_rays(&self) -> Option<Vec<Vec<f64>>> {
        match &self.shape {
            Shape::Orthant => Some(axes(self.dim)),
            Shape::Lorentz => None,
            Shape::Generators(p) | Shape::Halfspaces(p) => Some(p.rays.clone()),
        }
    }

    /// A finite set of nonzero directions in the cone that includes every
    /// extreme ray of a polyhedral cone; for the Lorentz cone, the boundary
    /// rays over `±eᵢ` plus the axis.
    pub fn representative_directions(&self) -> Vec<Vec<f64>> {
        match &self.shape {
            Shape::Lorentz => {
                let n = self.dim;
                let mut out = Vec::new();
                let s = core::f64::consts::FRAC_1_SQRT_2;
                for i in 0..n - 1 {
                    for sgn in [1.0, -1.0] {
                        let mut v = vec![0.0; n];
                        v[i] = sgn * s;
                        v[n - 1] = s;
                        out.push(v);
                    }
                }
                let mut axis = vec![0.0; n];
                axis[n - 1] = 1.0;
                out.push(axis);
                out
            }
            _ => self.extreme_rays().unwrap_or_default(),
        }
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Whether `v` lies within `tol` of the cone.
    ///
    /// Orthant: all entries ≥ −tol. Lorentz: `‖x‖₂ ≤ t + tol`. Halfspaces:
    /// `A v ≥ −tol`. Generators: Euclidean distance to the cone ≤ tol.
    pub fn contains(&self, v: &[f64], tol: f64) -> Result<bool> {
        self.check_dim(v)?;
        if !(tol >= 0.0) {
            return Err(Error::InvalidArgument("tolerance must be nonnegative".into()));
        }
        Ok(match &self.shape {
            Shape::Orthant => v.iter().all(|&x| x >= -tol),
            Shape::Lorentz => {
                let (x, t) = v.split_at(self.dim - 1);
                linalg::norm2(x) <= t[0] + tol
            }
            Shape::Halfspaces(p) => (0..p.matrix.rows()).all(|i| linalg::dot(p.matrix.row(i), v) >= -tol),
            Shape::Generators(p) => {
                if p.normals.iter().all(|nrm| linalg::dot(nrm, v) >= 0.0) {
                    true
                } else {
                    let sol = linalg::nnls(&p.matrix.columns(), v, SolverConfig::default().max_iter);
                    sol.residual <= tol
                }
            }
        })
    }

    /// Whether `v` is an interior point with slack at least `margin` in every
    /// defining inequality. Generator cones are tested against their unit facet
    /// normals.
    pub fn contains_interior(&self, v: &[f64], margin: f64) -> Result<bool> {
        self.check_dim(v)?;
        if !(margin > 0.0) {
            return Err(Error::InvalidArgument("margin must be positive".into()));
        }
        Ok(match &self.shape {
            Shape::Orthant => v.iter().all(|&x| x >= margin),
            Shape::Lorentz => {
                let (x, t) = v.split_at(self.dim - 1);
                linalg::norm2(x) <= t[0] - margin
            }
            Shape::Halfspaces(p) => (0..p.matrix.rows()).all(|i| linalg::dot(p.matrix.row(i), v) >= margin),
            Shape::Generators(p) => p.normals.iter().all(|nrm| linalg::dot(nrm, v) >= margin),
        })
    }

    /// `a ≤ b` in the cone order, i.e. `b − a ∈ P` within `tol`.
    pub fn leq(&self, a: &[f64], b: &[f64], tol: f64) -> Result<bool> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        self.contains(&linalg::sub(b, a), tol)
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, v: &[f64], cfg: &SolverConfig) -> Result<Vector> {
        self.check_dim(v)?;
        match &self.shape {
            Shape::Orthant => Ok(Vector(v.iter().map(|x| x.max(0.0)).collect())),
            Shape::Lorentz => Ok(Vector(project_lorentz(v))),
            Shape::Halfspaces(p) => project_onto_rays(&p.rays, v, cfg).map(Vector),
            Shape::Generators(p) => project_onto_rays(&p.matrix.columns(), v, cfg).map(Vector),
        }
    }

    /// Projection of a halfspace-form cone by Dykstra's alternating
    /// projections onto the individual halfspaces. [`Cone::project`] uses
    /// the enumerated extreme rays instead; this route shares no code with it.
    pub fn project_dykstra(&self, v: &[f64], cfg: &SolverConfig) -> Result<Vector> {
        self.check_dim(v)?;
        match &self.shape {
            Shape::Halfspaces(p) => dykstra(&p.matrix, v, cfg).map(Vector),
            _ => Err(Error::Unsupported("Dykstra projection needs a halfspace-form cone".into())),
        }
    }

    /// The dual cone `{y : ⟨y, x⟩ ≥ 0 ∀x ∈ P}`.
    pub fn dual(&self) -> Cone {
        let shape = match &self.shape {
            Shape::Orthant => Shape::Orthant,
            Shape::Lorentz => Shape::Lorentz,
            Shape::Generators(p) => Shape::Halfspaces(Polyhedral {
                matrix: p.matrix.transpose(),
                normals: p.rays.clone(),
                rays: p.normals.clone(),
            }),
            Shape::Halfspaces(p) => Shape::Generators(Polyhedral {
                matrix: p.matrix.transpose(),
                normals: p.rays.clone(),
                rays: p.normals.clone(),
            }),
        };
        Cone {
            dim: self.dim,
            shape,
        }
    }

    /// A fixed interior point: all-ones for the orthant, the axis for the
    /// Lorentz cone, the sum of unit extreme rays for polyhedral cones.
    pub fn interior_point(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Orthant => vec![1.0; self.dim],
            Shape::Lorentz => {
                let mut v = vec![0.0; self.dim];
                v[self.dim - 1] = 1.0;
                v
            }
            Shape::Generators(p) | Shape::Halfspaces(p) => {
                let mut v = vec![0.0; self.dim];
                for r in &p.rays {
                    linalg::axpy(1.0, r, &mut v);
                }
                v
            }
        }
    }

    /// Draws a point of the cone.
    ///
    /// Orthant and Lorentz use direct samplers, generator cones random
    /// nonnegative combinations of generators, halfspace cones rejection
    /// sampling in `[−1, 1]ⁿ` with a fallback to random combinations of
    /// extreme rays when the acceptance rate is too low.
    pub fn sample_point(&self, rng: &mut rng::Rng) -> Vec<f64> {
        let n = self.dim;
        match &self.shape {
            Shape::Orthant => (0..n).map(|_| rng.gen::<f64>()).collect(),
            Shape::Lorentz => {
                let x: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let t = linalg::norm2(&x) + rng.gen::<f64>();
                let mut v = x;
                v.push(t);
                v
            }
            Shape::Generators(p) => {
                let lambda: Vec<f64> = (0..p.matrix.cols()).map(|_| rng.gen::<f64>()).collect();
                p.matrix.mul_vec(&lambda)
            }
            Shape::Halfspaces(p) => {
                for _ in 0..REJECTION_ATTEMPTS {
                    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    if (0..p.matrix.rows()).all(|i| linalg::dot(p.matrix.row(i), &x) >= 0.0) {
                        return x;
                    }
                }
                let mut v = vec![0.0; n];
                for r in &p.rays {
                    linalg::axpy(rng.gen::<f64>(), r, &mut v);
                }
                v
            }
        }
    }

    /// Draws ordered pairs `0 ≤ a ≤ b` used by the sampled monotonicity and
    /// normality checks.
    ///
    /// The list starts with structured pairs built from
    /// [`Cone::representative_directions`]: `(r, r)` and `(r, r + s·q)` with
    /// `s ≥ 0` minimizing `‖r + s·q‖` (golden-section search). These reach
    /// the extreme ratios of two-dimensional polyhedral cones exactly. Then
    /// `samples` random pairs follow, half plain and half with the same
    /// one-dimensional minimization.
    pub fn ordered_pairs(&self, norm: &Norm, samples: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
        let dirs = self.representative_directions();
        let mut pairs = Vec::new();
        for a in &dirs {
            pairs.push((a.clone(), a.clone()));
            for q in &dirs {
                if a != q {
                    let s = shrink_step(norm, a, q);
                    let mut b = a.clone();
                    linalg::axpy(s, q, &mut b);
                    pairs.push((a.clone(), b));
                }
            }
        }
        let mut rng = rng::rng_from_seed(seed);
        for k in 0..samples {
            let a = self.sample_point(&mut rng);
            let q = self.sample_point(&mut rng);
            let s = if k % 2 == 0 {
                libm::pow(10.0, rng.gen_range(-3.0..1.0))
            } else {
                shrink_step(norm, &a, &q)
            };
            let mut b = a.clone();
            linalg::axpy(s, &q, &mut b);
            pairs.push((a, b));
        }
        pairs
    }

    /// Sampled check that `0 ≤ a ≤ b ⇒ ‖a‖ ≤ ‖b‖` (up to 1e−12).
    ///
    /// This is evidence, not a proof: a `true` answer means no violating
    /// pair was found among the drawn pairs.
    pub fn is_norm_monotone(&self, norm: &Norm, samples: usize, seed: u64) -> bool {
        self.ordered_pairs(norm, samples, seed)
            .iter()
            .all(|(a, b)| norm.eval(a) <= norm.eval(b) + 1e-12)
    }

    /// Estimate (lower bound) of the normality constant: the largest observed
    /// `‖a‖ / ‖b‖` over sampled pairs `0 ≤ a ≤ b`, `b ≠ 0`.
    pub fn normality_constant_estimate(&self, norm: &Norm, samples: usize, seed: u64) -> f64 {
        self.ordered_pairs(norm, samples, seed)
            .iter()
            .filter_map(|(a, b)| {
                let nb = norm.eval(b);
                (nb > 0.0).then(|| norm.eval(a) / nb)
            })
            .fold(0.0f64, f64::max)
    }

    /// Whether the norm is known to be monotone on this cone
    /// (`0 ≤ a ≤ b ⇒ ‖a‖ ≤ ‖b‖`) by a closed argument rather than sampling.
    ///
    /// Absolute norms are monotone on the orthant. On the Lorentz cone the
    /// Euclidean norm is monotone by self-duality, and the max norm equals
    /// the height coordinate, which is itself monotone.
    pub fn norm_is_certified_monotone(&self, norm: &Norm) -> bool {
        matches!(
            (&self.shape, norm),
            (Shape::Orthant, _) | (Shape::Lorentz, Norm::Euclidean | Norm::LInf)
        )
    }
}

const REJECTION_ATTEMPTS: usize = 256;

fn unit(v: &[f64]) -> Vec<f64> {
    linalg::scale(1.0 / linalg::norm2(v), v)
}

fn axes(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect()
}

/// `argmin_{s ≥ 0} ‖a + s q‖` by golden-section search.
fn shrink_step(norm: &Norm, a: &[f64], q: &[f64]) -> f64 {
    let qn = linalg::norm2(q);
    if qn == 0.0 {
        return 0.0;
    }
    let f = |s: f64| {
        let mut b = a.to_vec();
        linalg::axpy(s, q, &mut b);
        norm.eval(&b)
    };
    let mut lo = 0.0;
    let mut hi = 4.0 * linalg::norm2(a) / qn + 1e-12;
    let g = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let s = 0.5 * (lo + hi);
    if f(0.0) <= f(s) {
        0.0
    } else {
        s
    }
}

/// Unit inward normals of the facets of the cone generated by `gens`.
///
/// Every facet of a full-dimensional polyhedral cone in ℝⁿ is spanned by
/// `n − 1` linearly independent generators, so enumerating all such subsets
/// and keeping the normals that leave every generator on one side yields the
/// complete facet list.
fn facet_normals(gens: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let m = gens.len();
    let k = n - 1;
    if k > m {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let subset: Vec<Vec<f64>> = idx.iter().map(|&i| gens[i].clone()).collect();
        if let Some(h) = linalg::orthogonal_complement_line(&subset, n) {
            let signs: Vec<f64> = gens.iter().map(|g| linalg::dot(&h, g)).collect();
            let eps = 1e-10;
            let candidate = if signs.iter().all(|&s| s >= -eps) {
                Some(h)
            } else if signs.iter().all(|&s| s <= eps) {
                Some(linalg::scale(-1.0, &h))
            } else {
                None
            };
            if let Some(c) = candidate {
                if !out.iter().any(|o| linalg::distance2(o, &c) < 1e-9) {
                    out.push(c);
                }
            }
        }
        // Next combination in lexicographic order.
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + m - k {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Closed-form projection onto `{(x, t) : ‖x‖₂ ≤ t}`.
fn project_lorentz(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let (x, t) = v.split_at(n - 1);
    let t = t[0];
    let r = linalg::norm2(x);
    if r <= t {
        v.to_vec()
    } else if r <= -t {
        vec![0.0; n]
    } else {
        let c = 0.5 * (r + t);
        let mut out: Vec<f64> = x.iter().map(|xi| c * xi / r).collect();
        out.push(c);
        out
    }
}

/// Projection onto `cone(rays)` by nonnegative least squares.
fn project_onto_rays(rays: &[Vec<f64>], v: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    let sol = linalg::nnls(rays, v, cfg.max_iter);
    let mut proj = vec![0.0; v.len()];
    for (c, r) in sol.coefficients.iter().zip(rays) {
        linalg::axpy(*c, r, &mut proj);
    }
    if sol.converged {
        Ok(proj)
    } else {
        Err(Error::Convergence {
            value: sol.residual,
            best: proj,
            residual: sol.residual,
            iterations: sol.iterations,
        })
    }
}

/// Dykstra's alternating projections onto `{x : ⟨aᵢ, x⟩ ≥ 0}` for the rows
/// `aᵢ` of `a`. Stops when a full sweep moves the iterate by less than
/// `cfg.tol`.
fn dykstra(a: &Matrix, v: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    let m = a.rows();
    let n = v.len();
    let norms2: Vec<f64> = (0..m).map(|i| linalg::dot(a.row(i), a.row(i))).collect();
    let mut x = v.to_vec();
    let mut increments = vec![vec![0.0; n]; m];
    let mut change = f64::INFINITY;
    for iter in 0..cfg.max_iter {
        let start = x.clone();
        for i in 0..m {
            let y = linalg::add(&x, &increments[i]);
            let s = linalg::dot(a.row(i), &y);
            let mut p = y.clone();
            if s < 0.0 {
                linalg::axpy(-s / norms2[i], a.row(i), &mut p);
            }
            increments[i] = linalg::sub(&y, &p);
            x = p;
        }
        change = linalg::distance2(&x, &start);
        if change < cfg.tol {
            let _ = iter;
            return Ok(x);
        }
    }
    Err(Error::Convergence {
        value: linalg::distance2(&x, v),
        best: x,
        residual: change,
        iterations: cfg.max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obtuse() -> Cone {
        Cone::generators(Matrix::from_columns(&[vec![1.0, 0.0], vec![-1.0, 2.0]]).unwrap()).unwrap()
    }

    #[test]
    fn contains_examples() {
        let o2 = Cone::orthant(2).unwrap();
        assert!(o2.contains(&[1.0, 2.0], 0.0).unwrap());
        assert!(!o2.contains(&[-1.0, 2.0], 1e-9).unwrap());
        let l3 = Cone::lorentz(3).unwrap();
        assert!(l3.contains(&[3.0, 4.0, 5.0], 0.0).unwrap());
        assert!(!l3.contains(&[3.0, 4.0, 4.9], 1e-9).unwrap());
    }

    #[test]
    fn contains_rejects_dimension_mismatch() {
        let o2 = Cone::orthant(2).unwrap();
        assert!(matches!(
            o2.contains(&[1.0], 0.0),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn generator_membership_uses_distance() {
        let c = obtuse();
        assert!(c.contains(&[-1.0, 2.0], 0.0).unwrap());
        assert!(c.contains(&[0.0, 1.0], 0.0).unwrap());
        // (1,-1e-10) is at distance 1e-10 from the ray (1,0).
        assert!(c.contains(&[1.0, -1e-10], 1e-9).unwrap());
        assert!(!c.contains(&[1.0, -1e-6], 1e-9).unwrap());
        assert!(!c.contains(&[-1.0, 0.5], 1e-9).unwrap());
    }

    #[test]
    fn interior_examples() {
        let o2 = Cone::orthant(2).unwrap();
        assert!(o2.contains_interior(&[1.0, 1.0], 0.5).unwrap());
        assert!(!o2.contains_interior(&[1.0, 0.0], 1e-6).unwrap());
        let l3 = Cone::lorentz(3).unwrap();
        assert!(l3.contains_interior(&[0.0, 0.0, 1.0], 0.5).unwrap());
        assert!(o2.contains_interior(&[1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn leq_examples() {
        let o2 = Cone::orthant(2).unwrap();
        assert!(o2.leq(&[1.0, 1.0], &[2.0, 3.0], 0.0).unwrap());
        assert!(!o2.leq(&[1.0, 1.0], &[2.0, 0.0], 0.0).unwrap());
        assert!(obtuse().leq(&[0.3, -2.0], &[0.3, -2.0], 0.0).unwrap());
    }

    #[test]
    fn projection_examples() {
        let cfg = SolverConfig::default();
        let o2 = Cone::orthant(2).unwrap();
        assert_eq!(o2.project(&[-1.0, 2.0], &cfg).unwrap().as_slice(), &[0.0, 2.0]);
        let l2 = Cone::lorentz(2).unwrap();
        let p = l2.project(&[1.0, 0.0], &cfg).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let l3 = Cone::lorentz(3).unwrap();
        assert!(l3.project(&[0.0, 0.0, -1.0], &cfg).unwrap().is_zero());
    }

    #[test]
    fn lorentz_two_projection_matches_grid_search() {
        // Oracle: grid over {|x| ≤ t} ∩ [-1,1]×[0,2] at spacing 1e-3.
        let v = [1.0, 0.0];
        let mut best = (f64::INFINITY, 0.0, 0.0);
        let h = 1e-3;
        for it in 0..=2000 {
            let t = it as f64 * h;
            let mut ix = -(it as i64);
            while ix <= it as i64 {
                let x = ix as f64 * h;
                let d = (x - v[0]).powi(2) + (t - v[1]).powi(2);
                if d < best.0 {
                    best = (d, x, t);
                }
                ix += 1;
            }
        }
        assert!((best.1 - 0.5).abs() <= 1e-3 && (best.2 - 0.5).abs() <= 1e-3);
        let p = Cone::lorentz(2).unwrap().project(&v, &SolverConfig::default()).unwrap();
        assert!((p[0] - best.1).abs() <= 1e-3 && (p[1] - best.2).abs() <= 1e-3);
    }

    #[test]
    fn halfspace_projection_agrees_with_moreau_route() {
        // P = {x : Ax ≥ 0}; polar cone is generated by the negated rows, so
        // proj_P(v) = v + proj_{cone(Aᵀ)}(−v).
        let a = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 1.0], vec![-1.0, 0.0, 2.0]])
            .unwrap();
        let p_half = Cone::halfspaces(a.clone()).unwrap();
        let gen_dual = Cone::generators(a.transpose()).unwrap();
        let cfg = SolverConfig::default();
        for v in [[-1.0, 2.0, -3.0], [0.5, -0.2, 0.1], [3.0, 1.0, -4.0], [-1.0, -1.0, -1.0]] {
            let rays = p_half.project(&v, &cfg).unwrap();
            let dyk = p_half.project_dykstra(&v, &cfg).unwrap();
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            let q = gen_dual.project(&neg, &cfg).unwrap();
            let moreau = linalg::add(&v, &q);
            assert!(linalg::distance2(&rays, &moreau) < 1e-12, "{rays:?} vs {moreau:?}");
            assert!(linalg::distance2(&dyk, &moreau) < 1e-7, "{dyk:?} vs {moreau:?}");
        }
    }

    #[test]
    fn dual_examples() {
        assert_eq!(Cone::orthant(3).unwrap().dual().kind(), ConeKind::Orthant);
        assert_eq!(Cone::lorentz(3).unwrap().dual().kind(), ConeKind::Lorentz);
        let d = obtuse().dual();
        assert_eq!(d.kind(), ConeKind::Halfspaces);
        assert_eq!(d.matrix().unwrap().to_rows(), vec![vec![1.0, 0.0], vec![-1.0, 2.0]]);
        assert_eq!(d.dual(), obtuse());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(Norm::Euclidean.eval(&[3.0, 4.0]), 5.0);
        assert_eq!(Norm::L1.eval(&[3.0, -4.0]), 7.0);
        assert_eq!(Norm::LInf.eval(&[3.0, -4.0]), 4.0);
        let w = Norm::weighted(vec![4.0, 1.0]).unwrap();
        assert_eq!(w.eval(&[1.0, 0.0]), 2.0);
        assert!(Norm::weighted(vec![1.0, 0.0]).is_err());
        assert!(norm_eval(&w, &[1.0]).is_err());
    }

    #[test]
    fn invalid_polyhedral_cones_are_rejected() {
        // Rank deficient: not solid.
        assert!(Cone::generators(Matrix::from_columns(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap()).is_err());
        // Contains a line: not pointed.
        assert!(Cone::generators(
            Matrix::from_columns(&[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]]).unwrap()
        )
        .is_err());
        // x ≥ 0 and -x ≥ 0 in the first coordinate: not solid.
        assert!(Cone::halfspaces(Matrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]]).unwrap()).is_err());
        // Only one normal in ℝ²: contains a line.
        assert!(Cone::halfspaces(Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap()).is_err());
    }

    #[test]
    fn facet_enumeration_of_square_pyramid() {
        let gens = vec![
            vec![1.0, 1.0, 1.0],
            vec![-1.0, 1.0, 1.0],
            vec![-1.0, -1.0, 1.0],
            vec![1.0, -1.0, 1.0],
        ];
        let c = Cone::generators(Matrix::from_columns(&gens).unwrap()).unwrap();
        assert_eq!(c.facet_normals().unwrap().len(), 4);
        assert!(c.contains(&[0.0, 0.0, 1.0], 0.0).unwrap());
        assert!(!c.contains(&[0.0, 2.0, 1.0], 1e-9).unwrap());
    }

    #[test]
    fn monotonicity_examples() {
        let o2 = Cone::orthant(2).unwrap();
        assert!(o2.is_norm_monotone(&Norm::Euclidean, 1000, 1));
        assert!(!obtuse().is_norm_monotone(&Norm::Euclidean, 1000, 1));
    }

    #[test]
    fn normality_examples() {
        let k = Cone::orthant(3).unwrap().normality_constant_estimate(&Norm::Euclidean, 1000, 5);
        assert!((k - 1.0).abs() < 1e-12);
        let k = obtuse().normality_constant_estimate(&Norm::Euclidean, 1000, 5);
        assert!(k >= 5f64.sqrt() / 2.0 - 1e-3, "{k}");
    }
}
