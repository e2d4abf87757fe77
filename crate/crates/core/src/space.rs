//! Finite cone metric spaces and self-maps on them.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng as _;

use crate::cone::{Cone, Norm, Vector, DEFAULT_TOL};
use crate::equiv::PhiSpec;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rng;

/// A labeled finite point set with a table of cone-valued distances.
///
/// Construction only checks shapes. Whether the table is a cone metric is
/// answered by [`FiniteConeMetricSpace::validate_axioms`], so invalid tables
/// can be loaded and diagnosed.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteConeMetricSpace {
    labels: Vec<String>,
    cone: Cone,
    norm: Norm,
    /// Row-major `n × n`.
    table: Vec<Vector>,
}

impl FiniteConeMetricSpace {
    pub fn new(labels: Vec<String>, cone: Cone, norm: Norm, table: Vec<Vec<Vector>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidArgument("a space needs at least one point".into()));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::InvalidArgument(format!("duplicate label {a:?}")));
            }
        }
        norm.check_dim(cone.dim())?;
        if table.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: table.len(),
            });
        }
        let mut flat = Vec::with_capacity(n * n);
        for row in table {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for v in row {
                if v.dim() != cone.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: cone.dim(),
                        found: v.dim(),
                    });
                }
                flat.push(v);
            }
        }
        Ok(Self {
            labels,
            cone,
            norm,
            table: flat,
        })
    }

    /// `D(x, y) = ρ(x, y) · e` for a scalar table `ρ` and a cone vector `e`.
    pub fn from_scalar_metric(labels: Vec<String>, cone: Cone, norm: Norm, rho: &[Vec<f64>], direction: &[f64]) -> Result<Self> {
        let e = Vector::new(direction.to_vec())?;
        let table = rho
            .iter()
            .map(|row| row.iter().map(|&r| e.scale(r)).collect())
            .collect();
        Self::new(labels, cone, norm, table)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn norm(&self) -> &Norm {
        &self.norm
    }

    /// `D(i, j)`.
    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> &Vector {
        &self.table[i * self.len() + j]
    }

    pub fn table(&self) -> Vec<Vec<Vector>> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.distance(i, j).clone()).collect()).collect()
    }

    /// Overwrites the single entry `D(i, j)`; `D(j, i)` is left as is.
    pub fn set_distance(&mut self, i: usize, j: usize, v: Vector) -> Result<()> {
        if v.dim() != self.cone.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.cone.dim(),
                found: v.dim(),
            });
        }
        let n = self.len();
        self.table[i * n + j] = v;
        Ok(())
    }

    /// The same space with every distance multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            table: self.table.iter().map(|v| v.scale(s)).collect(),
            ..self.clone()
        }
    }

    /// Table of `‖D(x, y)‖`.
    pub fn norm_table(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.norm.eval(self.distance(i, j))).collect())
            .collect()
    }

    /// Checks the cone metric axioms at tolerance `tol`: zero diagonal, exact
    /// symmetry, values in the cone, nonzero off-diagonal values, and the
    /// triangle inequality `D(i, j) ≤ D(i, k) + D(k, j)` in the cone order.
    pub fn validate_axioms(&self, tol: f64) -> ValidationReport {
        let n = self.len();
        let mut report = ValidationReport::default();
        let member = |v: &[f64], report: &mut ValidationReport| -> bool {
            if self.cone.contains(v, 0.0).unwrap_or(false) {
                true
            } else if self.cone.contains(v, tol).unwrap_or(false) {
                report.within_tolerance += 1;
                true
            } else {
                false
            }
        };
        for i in 0..n {
            if linalg::norm2(self.distance(i, i)) > tol {
                report.violations.push(Violation::NonzeroDiagonal { i });
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = self.distance(i, j);
                if i < j && d != self.distance(j, i) {
                    report.violations.push(Violation::Asymmetric { i, j });
                }
                if !member(d, &mut report) {
                    report.violations.push(Violation::OutsideCone { i, j });
                }
                if linalg::norm2(d) <= tol {
                    report.violations.push(Violation::ZeroDistance { i, j });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    let slack = linalg::sub(&self.distance(i, k).add(self.distance(k, j)), self.distance(i, j));
                    if !member(&slack, &mut report) {
                        report.violations.push(Violation::Triangle { i, j, k });
                    }
                }
            }
        }
        report
    }

    /// Applies `φ` to every distance, `D*(x, y) = φ(D(x, y))`, and re-checks
    /// the axioms. Scalar transforms are only accepted on one-dimensional
    /// cones.
    pub fn transform_metric(&self, phi: &PhiSpec) -> Result<Self> {
        phi.check_maps_into(&self.cone, 256, 0)?;
        let table = self.table.iter().map(|v| Vector::from_raw(phi.apply(v))).collect();
        let out = Self {
            table,
            ..self.clone()
        };
        if out.table.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::NonFinite);
        }
        let report = out.validate_axioms(DEFAULT_TOL);
        match report.violations.first() {
            None => Ok(out),
            Some(v) => Err(Error::Transform(format!("{v}"))),
        }
    }
}

/// One failed axiom instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    NonzeroDiagonal { i: usize },
    Asymmetric { i: usize, j: usize },
    OutsideCone { i: usize, j: usize },
    ZeroDistance { i: usize, j: usize },
    Triangle { i: usize, j: usize, k: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonzeroDiagonal { i } => write!(f, "D({i},{i}) ≠ 0"),
            Violation::Asymmetric { i, j } => write!(f, "D({i},{j}) ≠ D({j},{i})"),
            Violation::OutsideCone { i, j } => write!(f, "D({i},{j}) ∉ P"),
            Violation::ZeroDistance { i, j } => write!(f, "D({i},{j}) = 0 for distinct points"),
            Violation::Triangle { i, j, k } => write!(f, "D({i},{j}) ≰ D({i},{k}) + D({k},{j})"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Checks that failed exactly but passed within tolerance.
    pub within_tolerance: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A self-map `T : X → X`.
#[derive(Clone, Debug, PartialEq)]
pub enum SelfMap {
    /// `T(i) = images[i]` on a finite space.
    Tabulated(Vec<usize>),
    /// `T(x) = M x + b` on ℝᵏ, used with the coordinatewise cone metric
    /// `D(x, y) = (|xᵢ − yᵢ|)ᵢ` on the orthant.
    Affine { matrix: Matrix, offset: Vec<f64> },
}

impl SelfMap {
    pub fn tabulated(images: Vec<usize>) -> Self {
        SelfMap::Tabulated(images)
    }

    pub fn affine(matrix: Matrix, offset: Vec<f64>) -> Result<Self> {
        if matrix.rows() != matrix.cols() || matrix.rows() != offset.len() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: offset.len(),
            });
        }
        if !matrix.is_finite() || offset.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SelfMap::Affine { matrix, offset })
    }

    pub fn constant(n: usize, target: usize) -> Self {
        SelfMap::Tabulated(vec![target; n])
    }

    pub fn identity(n: usize) -> Self {
        SelfMap::Tabulated((0..n).collect())
    }

    /// The image table of a tabulated map valid on a space of `n` points.
    pub fn images_for(&self, n: usize) -> Result<&[usize]> {
        match self {
            SelfMap::Tabulated(images) => {
                if images.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: images.len(),
                    });
                }
                if let Some(&bad) = images.iter().find(|&&t| t >= n) {
                    return Err(Error::InvalidArgument(format!("image index {bad} out of range")));
                }
                Ok(images)
            }
            SelfMap::Affine { .. } => Err(Error::Unsupported(
                "affine maps are only supported by the fixed-point engine".into(),
            )),
        }
    }

    pub fn apply_affine(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            SelfMap::Affine { matrix, offset } => Some(linalg::add(&matrix.mul_vec(x), offset)),
            SelfMap::Tabulated(_) => None,
        }
    }
}

/// `T^p(i)` for a tabulated map.
pub fn iterate_index(images: &[usize], i: usize, p: usize) -> usize {
    (0..p).fold(i, |x, _| images[x])
}

/// Parameters of [`generate_random_space`].
#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub seed: u64,
    pub n_points: usize,
    pub cone: Cone,
    pub norm: Norm,
    /// Number of scalar metrics combined along cone directions.
    pub interior_directions: usize,
}

/// Draws a random cone metric space.
///
/// For `r = 1..R` a scalar metric `ρ_r` is taken from random point
/// embeddings in ℝ³, a direction `e_r ∈ P` is drawn (`e₁` interior), and
/// `D = Σ_r ρ_r e_r`. Nonnegative cone combinations of metrics satisfy the
/// cone triangle inequality, so the result always validates.
pub fn generate_random_space(spec: &GenSpec) -> Result<FiniteConeMetricSpace> {
    if spec.n_points < 2 || spec.interior_directions == 0 {
        return Err(Error::InvalidArgument("need n_points ≥ 2 and interior_directions ≥ 1".into()));
    }
    spec.norm.check_dim(spec.cone.dim())?;
    let mut rng = rng::rng_from_seed(rng::split(spec.seed, 0x5EED_0001));
    let n = spec.n_points;
    let mut directions = Vec::with_capacity(spec.interior_directions);
    let mut embeddings = Vec::with_capacity(spec.interior_directions);
    for r in 0..spec.interior_directions {
        let scale = libm::pow(10.0, rng.gen_range(-1.0..1.0));
        let points: Vec<[f64; 3]> = (0..n)
            .map(|_| [rng.gen::<f64>() * scale, rng.gen::<f64>() * scale, rng.gen::<f64>() * scale])
            .collect();
        embeddings.push(points);
        directions.push(draw_direction(&spec.cone, r == 0, &mut rng)?);
    }
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    combine_embeddings(labels, spec.cone.clone(), spec.norm.clone(), &embeddings, &directions)
}

/// A random direction in the cone; with `interior`, the normalized interior
/// point plus half a normalized sample, which keeps it away from the boundary.
pub fn draw_direction(cone: &Cone, interior: bool, rng: &mut rng::Rng) -> Result<Vec<f64>> {
    let e = if interior {
        let mut e = cone.interior_point();
        let en = linalg::norm2(&e);
        e = linalg::scale(1.0 / en, &e);
        let extra = cone.sample_point(rng);
        let xn = linalg::norm2(&extra);
        if xn > 0.0 {
            linalg::axpy(0.5 / xn, &extra, &mut e);
        }
        e
    } else {
        cone.sample_point(rng)
    };
    if !cone.contains(&e, DEFAULT_TOL)? {
        return Err(Error::Sampler("cone sampler produced a point outside the cone".into()));
    }
    Ok(e)
}

/// `D(i, j) = Σ_r ‖f_r(i) − f_r(j)‖₂ · e_r` for embeddings `f_r` into ℝ³ and
/// cone directions `e_r`. Nonnegative cone combinations of metrics satisfy
/// the cone triangle inequality; at least one `e_r` must be nonzero and the
/// embeddings injective for the result to be a cone metric.
pub fn combine_embeddings(labels: Vec<String>, cone: Cone, norm: Norm, embeddings: &[Vec<[f64; 3]>], directions: &[Vec<f64>]) -> Result<FiniteConeMetricSpace> {
    let n = labels.len();
    let dim = cone.dim();
    if embeddings.len() != directions.len() || embeddings.iter().any(|e| e.len() != n) {
        return Err(Error::InvalidArgument("one embedding of every point per direction is required".into()));
    }
    let mut table = vec![vec![Vector::zeros(dim); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let mut d = vec![0.0; dim];
            for (pts, e) in embeddings.iter().zip(directions) {
                let rho = euclid3(&pts[i], &pts[j]);
                linalg::axpy(rho, e, &mut d);
            }
            let v = Vector::new(d)?;
            table[j][i] = v.clone();
            table[i][j] = v;
        }
    }
    FiniteConeMetricSpace::new(labels, cone, norm, table)
}

pub(crate) fn euclid3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let (x, y, z) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    libm::sqrt(x * x + y * y + z * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::ScalarFn;
    use alloc::string::ToString;

    fn line_space(n: usize) -> FiniteConeMetricSpace {
        let rho: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect();
        let labels = (0..n).map(|i| i.to_string()).collect();
        FiniteConeMetricSpace::from_scalar_metric(labels, Cone::orthant(2).unwrap(), Norm::Euclidean, &rho, &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn scalar_times_interior_vector_is_valid() {
        assert!(line_space(4).validate_axioms(1e-9).is_valid());
    }

    #[test]
    fn entry_outside_cone_is_reported() {
        let mut s = line_space(4);
        s.set_distance(0, 1, Vector::new(vec![-1.0, 1.0]).unwrap()).unwrap();
        let r = s.validate_axioms(1e-9);
        assert!(r.violations.contains(&Violation::OutsideCone { i: 0, j: 1 }));
        assert!(r.violations.contains(&Violation::Asymmetric { i: 0, j: 1 }));
    }

    #[test]
    fn triangle_violation_is_reported() {
        let mut s = line_space(4);
        let big = Vector::new(vec![5.0, 5.0]).unwrap();
        s.set_distance(0, 2, big.clone()).unwrap();
        s.set_distance(2, 0, big).unwrap();
        let r = s.validate_axioms(1e-9);
        assert!(r.violations.contains(&Violation::Triangle { i: 0, j: 2, k: 1 }));
    }

    #[test]
    fn near_misses_count_as_within_tolerance() {
        let mut s = line_space(2);
        let v = Vector::new(vec![1.0, -1e-12]).unwrap();
        s.set_distance(0, 1, v.clone()).unwrap();
        s.set_distance(1, 0, v).unwrap();
        let r = s.validate_axioms(1e-9);
        assert!(r.is_valid());
        assert!(r.within_tolerance > 0);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GenSpec {
            seed: 42,
            n_points: 5,
            cone: Cone::orthant(2).unwrap(),
            norm: Norm::Euclidean,
            interior_directions: 2,
        };
        let a = generate_random_space(&spec).unwrap();
        let b = generate_random_space(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.validate_axioms(1e-9).is_valid());
    }

    #[test]
    fn generation_rejects_degenerate_spec() {
        let spec = GenSpec {
            seed: 1,
            n_points: 1,
            cone: Cone::orthant(2).unwrap(),
            norm: Norm::Euclidean,
            interior_directions: 1,
        };
        assert!(generate_random_space(&spec).is_err());
    }

    #[test]
    fn transform_examples() {
        let rho: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect();
        let labels: Vec<String> = (0..4).map(|i| i.to_string()).collect();
        let s = FiniteConeMetricSpace::from_scalar_metric(labels, Cone::orthant(1).unwrap(), Norm::Euclidean, &rho, &[1.0]).unwrap();
        let t = s.transform_metric(&PhiSpec::Scalar1D(ScalarFn::Saturating)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let d = s.distance(i, j)[0];
                assert_eq!(t.distance(i, j)[0], d / (1.0 + d));
            }
        }
        let id = s.transform_metric(&PhiSpec::Scalar1D(ScalarFn::Scale(1.0))).unwrap();
        assert_eq!(id, s);
        let two = line_space(4)
            .transform_metric(&PhiSpec::Linear(Matrix::diagonal(&[2.0, 2.0])))
            .unwrap();
        assert_eq!(two, line_space(4).scaled(2.0));
    }

    #[test]
    fn transform_failures() {
        // Scalar transforms need a one-dimensional cone.
        assert!(line_space(3).transform_metric(&PhiSpec::Scalar1D(ScalarFn::Saturating)).is_err());
        // λ = 0 collapses distinct points.
        let rho = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let s = FiniteConeMetricSpace::from_scalar_metric(
            vec!["a".into(), "b".into()],
            Cone::orthant(1).unwrap(),
            Norm::Euclidean,
            &rho,
            &[1.0],
        )
        .unwrap();
        assert!(matches!(
            s.transform_metric(&PhiSpec::Scalar1D(ScalarFn::Scale(0.0))),
            Err(Error::Transform(_))
        ));
    }

    #[test]
    fn tabulated_map_validation() {
        assert!(SelfMap::tabulated(vec![0, 1, 5]).images_for(3).is_err());
        assert!(SelfMap::tabulated(vec![0, 1]).images_for(3).is_err());
        assert_eq!(iterate_index(&[0, 0, 1, 1], 3, 2), 0);
    }
}
