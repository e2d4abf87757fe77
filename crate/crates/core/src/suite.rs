//! Seeded random instances: cone metric spaces for axiom checks and
//! (space, map, coefficients) triples for the transfer suite.
//!
//! Every draw is a pure function of a root seed and a path of labels (see
//! [`crate::rng::split_path`]), so instances can be generated in any order
//! and on any number of threads.
//!
//! Transfer instances favour maps that are contractive in the cone order.
//! A map `T` is built as a tree flowing into a fixed point, and each point
//! gets an embedding `f(x) = K·f(Tx) + ε_x` in ℝ³ with `K > 1` and small
//! noise `ε`. Then `‖f(Tx) − f(Ty)‖ ≈ ‖f(x) − f(y)‖ / K`. The cone metric
//! is `D = Σ_r ‖f_r(x) − f_r(y)‖ e_r` over a few such embeddings and cone
//! directions `e_r`. A quarter of the attempts use a uniformly random or
//! constant map instead.
//!
//! Coefficients are drawn above the smallest feasible value on the cone
//! side, so the hypothesis holds by construction and the suite measures
//! whether the conclusion follows for `d`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::catalog::{self, ContractionKind, KindTag, PowerParams, Quantifier, TransferReport};
use crate::cone::{Cone, Norm, SolverConfig, DEFAULT_TOL};
use crate::equiv;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{self, Rng};
use crate::space::{self, FiniteConeMetricSpace, GenSpec, SelfMap};

const LABEL_SPACE: u64 = 0xA5;
const LABEL_TRANSFER: u64 = 0x7F;

/// A random pointed, solid cone of dimension `dim ≥ 2`: orthant, Lorentz,
/// generator form or halfspace form with equal probability.
///
/// Generators are `(u, 1)` with `u` uniform in a box of random half-width
/// up to 2, so cones range from narrow to obtuse. Halfspace rows are drawn
/// the same way; `(0, …, 0, 1)` is interior to both.
pub fn random_cone(rng: &mut Rng, dim: usize) -> Cone {
    loop {
        let family = rng.gen_range(0..4);
        let cone = match family {
            0 => Cone::orthant(dim),
            1 => Cone::lorentz(dim),
            _ => {
                let count = rng.gen_range(dim..=dim + 2);
                let width = rng.gen_range(0.3..2.0);
                let cols: Vec<Vec<f64>> = (0..count)
                    .map(|_| {
                        let mut c: Vec<f64> = (0..dim - 1).map(|_| rng.gen_range(-width..width)).collect();
                        c.push(1.0);
                        c
                    })
                    .collect();
                let m = Matrix::from_columns(&cols).ok_or(Error::NonFinite);
                if family == 2 {
                    m.and_then(Cone::generators)
                } else {
                    m.map(|m| m.transpose()).and_then(Cone::halfspaces)
                }
            }
        };
        if let Ok(c) = cone {
            return c;
        }
    }
}

/// Euclidean, ℓ₁, ℓ∞ or a weighted Euclidean norm with weights in `[0.5, 2]`.
pub fn random_norm(rng: &mut Rng, dim: usize) -> Norm {
    match rng.gen_range(0..4) {
        0 => Norm::Euclidean,
        1 => Norm::L1,
        2 => Norm::LInf,
        _ => Norm::Weighted(
            crate::cone::Weights::new((0..dim).map(|_| rng.gen_range(0.5..2.0)).collect())
                .expect("weights in [0.5, 2] are positive"),
        ),
    }
}

/// The space used for axiom checks under `seed`: dimension 2–4, 3–8 points,
/// one to three cone directions, random cone family and norm.
pub fn generated_space(seed: u64) -> Result<FiniteConeMetricSpace> {
    let mut r = rng::rng_from_seed(rng::split(seed, LABEL_SPACE));
    let dim = r.gen_range(2..=4);
    let cone = random_cone(&mut r, dim);
    let norm = random_norm(&mut r, dim);
    space::generate_random_space(&GenSpec {
        seed,
        n_points: r.gen_range(3..=8),
        cone,
        norm,
        interior_directions: r.gen_range(1..=3),
    })
}

/// How the map of an instance was drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapStyle {
    Tree,
    Constant,
    Uniform,
}

impl MapStyle {
    pub fn name(&self) -> &'static str {
        match self {
            MapStyle::Tree => "tree",
            MapStyle::Constant => "constant",
            MapStyle::Uniform => "uniform",
        }
    }
}

/// A random space and map for the transfer suite.
pub fn transfer_space(rng: &mut Rng) -> Result<(FiniteConeMetricSpace, SelfMap, MapStyle)> {
    let dim = rng.gen_range(2..=4);
    let cone = random_cone(rng, dim);
    let norm = random_norm(rng, dim);
    let n: usize = rng.gen_range(3..=8);
    let style = match rng.gen_range(0..8) {
        0 => MapStyle::Constant,
        1 => MapStyle::Uniform,
        _ => MapStyle::Tree,
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let images: Vec<usize> = match style {
        MapStyle::Constant => vec![order[0]; n],
        MapStyle::Uniform => (0..n).map(|_| rng.gen_range(0..n)).collect(),
        MapStyle::Tree => {
            let mut images = vec![order[0]; n];
            for k in 1..n {
                images[order[k]] = order[rng.gen_range(0..k)];
            }
            images
        }
    };
    let directions_count = rng.gen_range(1..=3);
    let mut embeddings = Vec::with_capacity(directions_count);
    let mut directions = Vec::with_capacity(directions_count);
    for r in 0..directions_count {
        let scale = libm::pow(10.0, rng.gen_range(-1.0..1.0));
        let mut f = vec![[0.0f64; 3]; n];
        match style {
            MapStyle::Tree => {
                let k = rng.gen_range(1.5..4.0);
                let sigma = scale * rng.gen_range(0.05..0.5);
                // `order` lists every point after its image.
                for &x in &order {
                    let base = if images[x] == x { [0.0; 3] } else { f[images[x]] };
                    for c in 0..3 {
                        f[x][c] = k * base[c] + sigma * rng.gen_range(-1.0..1.0);
                    }
                }
            }
            _ => {
                for p in f.iter_mut() {
                    for c in p.iter_mut() {
                        *c = scale * rng.gen::<f64>();
                    }
                }
            }
        }
        embeddings.push(f);
        directions.push(space::draw_direction(&cone, r == 0, rng)?);
    }
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    let space = space::combine_embeddings(labels, cone, norm, &embeddings, &directions)?;
    Ok((space, SelfMap::Tabulated(images), style))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Holding instances wanted per kind.
    pub per_kind: usize,
    pub kinds: Vec<KindTag>,
    /// Attempts per kind before giving up on reaching `per_kind`.
    pub max_attempts: usize,
    pub solver: SolverConfig,
    /// Comparison tolerance for both checks.
    pub tol: f64,
}

impl SuiteConfig {
    pub fn new(seed: u64, per_kind: usize, kinds: Vec<KindTag>) -> Self {
        Self {
            seed,
            per_kind,
            kinds,
            max_attempts: 50 * per_kind.max(1),
            solver: SolverConfig::default(),
            tol: DEFAULT_TOL,
        }
    }
}

/// A checked instance whose cone-side hypothesis holds.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceRecord {
    pub tag: KindTag,
    pub attempt: usize,
    pub style: MapStyle,
    pub space: FiniteConeMetricSpace,
    pub map: SelfMap,
    pub kind: ContractionKind,
    /// Smallest feasible coefficient scale along the drawn direction on the
    /// cone side (exact membership, bisection upper end).
    pub cone_scale: f64,
    pub report: TransferReport,
    /// `functional(metric minimum) / cone_scale`, when the cone scale is
    /// positive.
    pub constant_ratio: Option<f64>,
    /// Single-coefficient kinds: metric minimum ≤ cone minimum + 2e-6.
    pub constants_ok: bool,
}

impl InstanceRecord {
    pub fn ok(&self) -> bool {
        self.report.ok() && self.constants_ok
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AttemptOutcome {
    /// No admissible coefficient makes the hypothesis hold.
    NotApplicable,
    Checked(alloc::boxed::Box<InstanceRecord>),
}

/// Draws and checks attempt number `attempt` for `tag`.
pub fn run_attempt(cfg: &SuiteConfig, tag: KindTag, attempt: usize) -> Result<AttemptOutcome> {
    let seed = rng::split_path(cfg.seed, &[LABEL_TRANSFER, tag as u64, attempt as u64]);
    let mut r = rng::rng_from_seed(seed);
    let (space, map, style) = transfer_space(&mut r)?;
    let power = if tag == KindTag::PowerPair {
        PowerParams {
            m: r.gen_range(1..=3),
            n: r.gen_range(1..=3),
            mode: if r.gen::<bool>() {
                Quantifier::ForAll
            } else {
                Quantifier::Exists
            },
        }
    } else {
        PowerParams::default()
    };
    let (direction, ceiling) = if tag.coefficient_count() == 1 {
        (vec![1.0], tag.bound())
    } else {
        let raw: Vec<f64> = (0..tag.coefficient_count())
            .map(|_| -libm::log(1.0 - r.gen::<f64>()))
            .collect();
        let f = catalog::functional(tag, &raw);
        let dir: Vec<f64> = raw.iter().map(|x| x / f).collect();
        let ceiling = if tag.bounds_sum() {
            1.0
        } else {
            1.0 / dir.iter().fold(0.0f64, |m, &x| m.max(x))
        };
        (dir, ceiling)
    };
    let cone_scale = catalog::cone_min_scale(&space, &map, tag, power, &direction, 0.0)?;
    if !(cone_scale < ceiling) {
        return Ok(AttemptOutcome::NotApplicable);
    }
    // A quarter of the instances sit at the feasibility boundary.
    let u = if r.gen_range(0..4) == 0 { 0.0 } else { r.gen::<f64>() };
    let mut s = cone_scale + u * (ceiling - cone_scale);
    if s == 0.0 && tag.is_choice() {
        s = 0.5 * ceiling;
    }
    let coefficients: Vec<f64> = direction.iter().map(|d| d * s).collect();
    let Ok(kind) = ContractionKind::new(tag, coefficients, power) else {
        return Ok(AttemptOutcome::NotApplicable);
    };
    let solver = SolverConfig {
        seed: rng::split(seed, 1),
        ..cfg.solver.clone()
    };
    let d = equiv::equivalent_metric_table(&space, &solver)?.d;
    let report = catalog::verify_transfer_with_table(&space, &d, &map, &kind, cfg.tol)?;
    let metric_functional = catalog::functional(tag, &report.minimal_constants_metric);
    let constant_ratio = (cone_scale > 0.0).then(|| metric_functional / cone_scale);
    let constants_ok = tag.coefficient_count() > 1
        || report.minimal_constants_metric[0] <= report.minimal_constants_cone[0] + 2.0 * catalog::BISECTION_WIDTH;
    Ok(AttemptOutcome::Checked(alloc::boxed::Box::new(InstanceRecord {
        tag,
        attempt,
        style,
        space,
        map,
        kind,
        cone_scale,
        report,
        constant_ratio,
        constants_ok,
    })))
}

/// Per-kind aggregate of the transfer suite.
#[derive(Clone, Debug, PartialEq)]
pub struct KindSummary {
    pub tag: KindTag,
    /// Holding instances checked.
    pub instances: usize,
    pub attempts: usize,
    pub transfer_ok: usize,
    pub pairwise_ok: usize,
    pub constants_ok: usize,
    /// Largest metric/cone constant ratio seen.
    pub max_constant_ratio: f64,
    /// The first failing instance, which stops the kind.
    pub failure: Option<alloc::boxed::Box<InstanceRecord>>,
}

impl KindSummary {
    pub fn new(tag: KindTag) -> Self {
        Self {
            tag,
            instances: 0,
            attempts: 0,
            transfer_ok: 0,
            pairwise_ok: 0,
            constants_ok: 0,
            max_constant_ratio: 0.0,
            failure: None,
        }
    }

    /// Whether more attempts are needed.
    pub fn wants_more(&self, cfg: &SuiteConfig) -> bool {
        self.failure.is_none() && self.instances < cfg.per_kind && self.attempts < cfg.max_attempts
    }

    /// Folds in the next attempt, in attempt order. Ignored once complete.
    pub fn absorb(&mut self, cfg: &SuiteConfig, outcome: AttemptOutcome) {
        if !self.wants_more(cfg) {
            return;
        }
        self.attempts += 1;
        let AttemptOutcome::Checked(rec) = outcome else {
            return;
        };
        self.instances += 1;
        self.transfer_ok += usize::from(rec.report.transfer_ok);
        self.pairwise_ok += usize::from(rec.report.pairwise_ok);
        self.constants_ok += usize::from(rec.constants_ok);
        if let Some(r) = rec.constant_ratio {
            self.max_constant_ratio = self.max_constant_ratio.max(r);
        }
        if !rec.ok() {
            self.failure = Some(rec);
        }
    }

    /// All instances passed and the target count was reached.
    pub fn passed(&self, cfg: &SuiteConfig) -> bool {
        self.failure.is_none() && self.instances >= cfg.per_kind
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub summaries: Vec<KindSummary>,
}

impl SuiteReport {
    pub fn passed(&self, cfg: &SuiteConfig) -> bool {
        self.summaries.iter().all(|s| s.passed(cfg))
    }
}

/// Runs the suite sequentially. Kinds are processed in the order given and
/// a kind stops at its first failing instance.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut summaries = Vec::with_capacity(cfg.kinds.len());
    for &tag in &cfg.kinds {
        let mut s = KindSummary::new(tag);
        let mut attempt = 0;
        while s.wants_more(cfg) {
            s.absorb(cfg, run_attempt(cfg, tag, attempt)?);
            attempt += 1;
        }
        summaries.push(s);
    }
    Ok(SuiteReport { summaries })
}

/// Parses a comma-separated kind list; `all` selects every kind.
pub fn parse_kinds(spec: &str) -> Result<Vec<KindTag>> {
    if spec.trim() == "all" {
        return Ok(KindTag::ALL.to_vec());
    }
    spec.split(',')
        .map(|s| {
            KindTag::from_name(s.trim()).ok_or_else(|| Error::InvalidArgument(format!("unknown kind `{}`", s.trim())))
        })
        .collect()
}

/// Human-readable one-line description of a cone.
pub fn describe_cone(cone: &Cone) -> String {
    format!("{:?}({})", cone.kind(), cone.dim())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_spaces_validate() {
        for seed in 0..40 {
            let s = generated_space(seed).unwrap();
            let r = s.validate_axioms(1e-9);
            assert!(r.is_valid(), "seed {seed}: {:?}", r.violations);
        }
    }

    #[test]
    fn attempts_are_reproducible() {
        let cfg = SuiteConfig::new(3, 4, vec![KindTag::Banach]);
        let a = run_attempt(&cfg, KindTag::Banach, 5).unwrap();
        let b = run_attempt(&cfg, KindTag::Banach, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn small_suite_passes() {
        let cfg = SuiteConfig::new(11, 5, KindTag::ALL.to_vec());
        let r = run_suite(&cfg).unwrap();
        for s in &r.summaries {
            assert!(s.passed(&cfg), "{}: {} instances in {} attempts", s.tag, s.instances, s.attempts);
        }
    }

    #[test]
    fn tree_maps_have_a_fixed_point() {
        let mut r = rng::rng_from_seed(9);
        for _ in 0..20 {
            let (space, map, style) = transfer_space(&mut r).unwrap();
            if style == MapStyle::Tree {
                let images = map.images_for(space.len()).unwrap();
                let fixed = (0..space.len()).filter(|&i| images[i] == i).count();
                assert_eq!(fixed, 1);
            }
        }
    }

    #[test]
    fn kind_list_parsing() {
        assert_eq!(parse_kinds("all").unwrap().len(), 12);
        assert_eq!(parse_kinds("banach, kannan").unwrap(), vec![KindTag::Banach, KindTag::Kannan]);
        assert!(parse_kinds("banach,nope").is_err());
    }
}
