//! Contractive conditions on a self-map, checked in the cone order on `D`
//! and on the reals for the equivalent metric `d`.
//!
//! Every condition reduces, for an ordered pair `(x, y)`, to a short list of
//! linear inequalities `D(a, b) ≤ Σ cᵢ D(pᵢ, qᵢ)` with `cᵢ ≥ 0`, combined
//! with "all of" or "any of". If one such inequality holds for `D` in the
//! cone order, the same inequality holds for `d`: choose `vᵢ ≥ D(pᵢ, qᵢ)`
//! with `‖vᵢ‖` close to `d(pᵢ, qᵢ)`; then `Σ cᵢ vᵢ ≥ D(a, b)`, so
//! `d(a, b) ≤ Σ cᵢ ‖vᵢ‖`. [`verify_transfer`] checks exactly this, both for
//! the whole condition and inequality by inequality.
//!
//! On the metric side a choice condition "`D(Tx, Ty) ≤ c·u` for some `u` in
//! a set" becomes `d(Tx, Ty) ≤ c·max{…}`, which on the reals is the same as
//! "some alternative holds".

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cone::{Cone, ConeKind, SolverConfig};
use crate::equiv;
use crate::error::{Error, Result};
use crate::linalg;
use crate::space::{iterate_index, FiniteConeMetricSpace, SelfMap};

/// Width of the bisection for cone-side minimal constants.
pub const BISECTION_WIDTH: f64 = 1e-6;

/// Largest constant the cone-side bisection searches before reporting ∞.
const BISECTION_CEILING: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KindTag {
    /// `D(Tx, Ty) ≤ α D(x, y)`.
    Banach,
    /// `D(Tx, Ty) ≤ λ (D(Tx, x) + D(Ty, y))`.
    Kannan,
    /// `D(Tx, Ty) ≤ λ (D(Tx, y) + D(Ty, x))`.
    Chatterjea,
    /// `D(Tx, Ty) ≤ α D(x, Ty) + β D(Tx, y)`.
    CrossPair,
    /// `D(Tx, Ty) ≤ α D(x, Tx) + β D(y, Ty)`.
    SelfPair,
    /// `D(Tx, Ty) ≤ α u` for some `u` in
    /// `{D(x, y), D(x, Tx), D(y, Ty), ½(D(x, Ty) + D(y, Tx))}`.
    ChoiceA,
    /// `D(Tx, Ty) ≤ β u` for some `u` in
    /// `{D(x, y), D(x, Tx), D(y, Ty), ½D(x, Ty), ½D(y, Tx)}`.
    ChoiceB,
    /// `D(Tx, Ty) ≤ β u` for some `u` in
    /// `{D(x, y), ½(D(x, Tx) + D(y, Ty)), ½(D(x, Ty) + D(y, Tx))}`.
    ChoiceC,
    /// `D(Tx, Ty) ≤ a₁D(x, y) + a₂D(x, Tx) + a₃D(y, Ty) + a₄D(x, Ty) + a₅D(y, Tx)`.
    HardyRogers,
    /// `D(Tx, Ty) ≤ λ u` for some `u` in
    /// `{D(x, y), D(x, Tx), D(y, Ty), D(x, Ty), D(y, Tx)}`.
    QuasiMax,
    /// `D(Tx, Ty) ≤ a₁D(x, y) + a₂D(x, Tx) + a₃D(y, Ty) + a₄(D(x, Ty) + D(y, Tx))`.
    HardySym,
    /// `D(Tᵐx, Tⁿy) ≤ k D(z, t)` over distinct `z, t` in
    /// `{x, y, Tᵖx, T^q y : 1 ≤ p ≤ m, 1 ≤ q ≤ n}`.
    PowerPair,
}

impl KindTag {
    pub const ALL: [KindTag; 12] = [
        KindTag::Banach,
        KindTag::Kannan,
        KindTag::Chatterjea,
        KindTag::CrossPair,
        KindTag::SelfPair,
        KindTag::ChoiceA,
        KindTag::ChoiceB,
        KindTag::ChoiceC,
        KindTag::HardyRogers,
        KindTag::QuasiMax,
        KindTag::HardySym,
        KindTag::PowerPair,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            KindTag::Banach => "banach",
            KindTag::Kannan => "kannan",
            KindTag::Chatterjea => "chatterjea",
            KindTag::CrossPair => "cross-pair",
            KindTag::SelfPair => "self-pair",
            KindTag::ChoiceA => "choice-a",
            KindTag::ChoiceB => "choice-b",
            KindTag::ChoiceC => "choice-c",
            KindTag::HardyRogers => "hardy-rogers",
            KindTag::QuasiMax => "quasi-max",
            KindTag::HardySym => "hardy-sym",
            KindTag::PowerPair => "power-pair",
        }
    }

    pub fn from_name(name: &str) -> Option<KindTag> {
        KindTag::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn coefficient_count(&self) -> usize {
        match self {
            KindTag::CrossPair | KindTag::SelfPair => 2,
            KindTag::HardyRogers => 5,
            KindTag::HardySym => 4,
            _ => 1,
        }
    }

    /// Whether the hypothesis is an existence over a set of alternatives.
    pub fn is_choice(&self) -> bool {
        matches!(self, KindTag::ChoiceA | KindTag::ChoiceB | KindTag::ChoiceC | KindTag::QuasiMax)
    }

    /// Weights `w` of the admissibility constraint `Σ wᵢ cᵢ < bound` for
    /// multi-coefficient kinds, and the bound for each single coefficient
    /// otherwise.
    pub fn constraint_weights(&self) -> Vec<f64> {
        match self {
            KindTag::HardySym => vec![1.0, 1.0, 1.0, 2.0],
            KindTag::HardyRogers => vec![1.0; 5],
            // Each of α, β is constrained separately.
            KindTag::CrossPair | KindTag::SelfPair => vec![1.0, 1.0],
            _ => vec![1.0],
        }
    }

    /// Strict upper bound on each coefficient (or on the weighted sum for
    /// Hardy–Rogers type kinds).
    pub fn bound(&self) -> f64 {
        match self {
            KindTag::Kannan | KindTag::Chatterjea | KindTag::QuasiMax => 0.5,
            _ => 1.0,
        }
    }

    /// Whether admissibility constrains a weighted sum rather than each
    /// coefficient separately.
    pub fn bounds_sum(&self) -> bool {
        matches!(self, KindTag::HardyRogers | KindTag::HardySym)
    }
}

impl fmt::Display for KindTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    ForAll,
    Exists,
}

impl Quantifier {
    pub fn name(&self) -> &'static str {
        match self {
            Quantifier::ForAll => "forall",
            Quantifier::Exists => "exists",
        }
    }
}

/// Iteration counts and quantifier of [`KindTag::PowerPair`]; ignored by the
/// other kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PowerParams {
    pub m: usize,
    pub n: usize,
    pub mode: Quantifier,
}

impl Default for PowerParams {
    fn default() -> Self {
        Self {
            m: 1,
            n: 1,
            mode: Quantifier::ForAll,
        }
    }
}

/// A contractive condition with admissible coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionKind {
    tag: KindTag,
    coefficients: Vec<f64>,
    power: PowerParams,
}

impl ContractionKind {
    /// Validates the coefficient ranges of `tag`.
    pub fn new(tag: KindTag, coefficients: Vec<f64>, power: PowerParams) -> Result<Self> {
        validate_coefficients(tag, &coefficients, power)?;
        Ok(Self {
            tag,
            coefficients,
            power,
        })
    }

    pub fn banach(alpha: f64) -> Result<Self> {
        Self::new(KindTag::Banach, vec![alpha], PowerParams::default())
    }

    pub fn kannan(lambda: f64) -> Result<Self> {
        Self::new(KindTag::Kannan, vec![lambda], PowerParams::default())
    }

    pub fn chatterjea(lambda: f64) -> Result<Self> {
        Self::new(KindTag::Chatterjea, vec![lambda], PowerParams::default())
    }

    pub fn cross_pair(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(KindTag::CrossPair, vec![alpha, beta], PowerParams::default())
    }

    pub fn self_pair(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(KindTag::SelfPair, vec![alpha, beta], PowerParams::default())
    }

    pub fn choice_a(alpha: f64) -> Result<Self> {
        Self::new(KindTag::ChoiceA, vec![alpha], PowerParams::default())
    }

    pub fn choice_b(beta: f64) -> Result<Self> {
        Self::new(KindTag::ChoiceB, vec![beta], PowerParams::default())
    }

    pub fn choice_c(beta: f64) -> Result<Self> {
        Self::new(KindTag::ChoiceC, vec![beta], PowerParams::default())
    }

    pub fn hardy_rogers(a: [f64; 5]) -> Result<Self> {
        Self::new(KindTag::HardyRogers, a.to_vec(), PowerParams::default())
    }

    pub fn quasi_max(lambda: f64) -> Result<Self> {
        Self::new(KindTag::QuasiMax, vec![lambda], PowerParams::default())
    }

    pub fn hardy_sym(a: [f64; 4]) -> Result<Self> {
        Self::new(KindTag::HardySym, a.to_vec(), PowerParams::default())
    }

    pub fn power_pair(m: usize, n: usize, k: f64, mode: Quantifier) -> Result<Self> {
        Self::new(KindTag::PowerPair, vec![k], PowerParams { m, n, mode })
    }

    pub fn tag(&self) -> KindTag {
        self.tag
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn power(&self) -> PowerParams {
        self.power
    }

    /// Same kind with new coefficients.
    pub fn with_coefficients(&self, coefficients: Vec<f64>) -> Result<Self> {
        Self::new(self.tag, coefficients, self.power)
    }
}

fn validate_coefficients(tag: KindTag, c: &[f64], power: PowerParams) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidCoefficients(format!("{tag}: {msg}")));
    if c.len() != tag.coefficient_count() {
        return bad(format!("expected {} coefficients, got {}", tag.coefficient_count(), c.len()));
    }
    if c.iter().any(|x| !x.is_finite()) {
        return bad("coefficients must be finite".into());
    }
    match tag {
        KindTag::Banach | KindTag::CrossPair | KindTag::SelfPair => {
            if c.iter().any(|&x| !(0.0..1.0).contains(&x)) {
                return bad("each coefficient must lie in [0, 1)".into());
            }
        }
        KindTag::Kannan | KindTag::Chatterjea | KindTag::QuasiMax => {
            if !(0.0..0.5).contains(&c[0]) {
                return bad("λ must lie in [0, 1/2)".into());
            }
        }
        KindTag::ChoiceA | KindTag::ChoiceB | KindTag::ChoiceC => {
            if !(c[0] > 0.0 && c[0] < 1.0) {
                return bad("coefficient must lie in (0, 1)".into());
            }
        }
        KindTag::HardyRogers | KindTag::HardySym => {
            if c.iter().any(|&x| x < 0.0) {
                return bad("coefficients must be nonnegative".into());
            }
            let sum: f64 = c.iter().zip(tag.constraint_weights()).map(|(a, w)| a * w).sum();
            if sum >= 1.0 {
                let what = if tag == KindTag::HardySym {
                    "a₁ + a₂ + a₃ + 2a₄"
                } else {
                    "a₁ + … + a₅"
                };
                return bad(format!("{what} = {sum} must be < 1"));
            }
        }
        KindTag::PowerPair => {
            if power.m == 0 || power.n == 0 {
                return bad("m and n must be at least 1".into());
            }
            if !(0.0..1.0).contains(&c[0]) {
                return bad("k must lie in [0, 1)".into());
            }
        }
    }
    Ok(())
}

/// `c · D(p, q)`, or `c · d(p, q)` on the metric side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub pair: (usize, usize),
}

/// `D(lhs) ≤ Σ rhs`. An empty right-hand side reads `D(lhs) ≤ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Inequality {
    pub lhs: (usize, usize),
    pub rhs: Vec<Term>,
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{}) ≤ ", self.lhs.0, self.lhs.1)?;
        if self.rhs.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.rhs.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}·({},{})", t.coef, t.pair.0, t.pair.1)?;
        }
        Ok(())
    }
}

/// The inequalities a condition imposes at one ordered pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCondition {
    pub x: usize,
    pub y: usize,
    pub quantifier: Quantifier,
    pub alternatives: Vec<Inequality>,
}

/// Builds the inequalities for `(x, y)` with coefficients `c`, which need not
/// be admissible.
pub fn pair_condition(tag: KindTag, c: &[f64], power: PowerParams, images: &[usize], x: usize, y: usize) -> PairCondition {
    let tx = images[x];
    let ty = images[y];
    let t = |coef: f64, a: usize, b: usize| Term { coef, pair: (a, b) };
    let lhs = (tx, ty);
    let single = |rhs: Vec<Term>| (Quantifier::ForAll, vec![Inequality { lhs, rhs }]);
    let choice = |alts: Vec<Vec<Term>>| {
        (
            Quantifier::Exists,
            alts.into_iter().map(|rhs| Inequality { lhs, rhs }).collect(),
        )
    };
    let (quantifier, alternatives) = match tag {
        KindTag::Banach => single(vec![t(c[0], x, y)]),
        KindTag::Kannan => single(vec![t(c[0], tx, x), t(c[0], ty, y)]),
        KindTag::Chatterjea => single(vec![t(c[0], tx, y), t(c[0], ty, x)]),
        KindTag::CrossPair => single(vec![t(c[0], x, ty), t(c[1], tx, y)]),
        KindTag::SelfPair => single(vec![t(c[0], x, tx), t(c[1], y, ty)]),
        KindTag::ChoiceA => choice(vec![
            vec![t(c[0], x, y)],
            vec![t(c[0], x, tx)],
            vec![t(c[0], y, ty)],
            vec![t(0.5 * c[0], x, ty), t(0.5 * c[0], y, tx)],
        ]),
        KindTag::ChoiceB => choice(vec![
            vec![t(c[0], x, y)],
            vec![t(c[0], x, tx)],
            vec![t(c[0], y, ty)],
            vec![t(0.5 * c[0], x, ty)],
            vec![t(0.5 * c[0], y, tx)],
        ]),
        KindTag::ChoiceC => choice(vec![
            vec![t(c[0], x, y)],
            vec![t(0.5 * c[0], x, tx), t(0.5 * c[0], y, ty)],
            vec![t(0.5 * c[0], x, ty), t(0.5 * c[0], y, tx)],
        ]),
        KindTag::HardyRogers => single(vec![
            t(c[0], x, y),
            t(c[1], x, tx),
            t(c[2], y, ty),
            t(c[3], x, ty),
            t(c[4], y, tx),
        ]),
        KindTag::QuasiMax => choice(vec![
            vec![t(c[0], x, y)],
            vec![t(c[0], x, tx)],
            vec![t(c[0], y, ty)],
            vec![t(c[0], x, ty)],
            vec![t(c[0], y, tx)],
        ]),
        KindTag::HardySym => single(vec![
            t(c[0], x, y),
            t(c[1], x, tx),
            t(c[2], y, ty),
            t(c[3], x, ty),
            t(c[3], y, tx),
        ]),
        KindTag::PowerPair => {
            let lhs = (iterate_index(images, x, power.m), iterate_index(images, y, power.n));
            let mut pts = vec![x, y];
            pts.extend((1..=power.m).map(|p| iterate_index(images, x, p)));
            pts.extend((1..=power.n).map(|q| iterate_index(images, y, q)));
            pts.sort_unstable();
            pts.dedup();
            let mut alts = Vec::new();
            for (i, &z) in pts.iter().enumerate() {
                for &w in &pts[i + 1..] {
                    alts.push(Inequality {
                        lhs,
                        rhs: vec![t(c[0], z, w)],
                    });
                }
            }
            if alts.is_empty() {
                // A single admissible point: both readings force D(lhs) = 0.
                alts.push(Inequality { lhs, rhs: Vec::new() });
            }
            (power.mode, alts)
        }
    };
    PairCondition {
        x,
        y,
        quantifier,
        alternatives,
    }
}

/// An ordered pair at which a condition fails, with the unsatisfied
/// inequalities. `excess` is how far the best alternative misses: on the
/// metric side `lhs − rhs`, on the cone side the Euclidean distance of
/// `rhs − lhs` from the cone.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub x: usize,
    pub y: usize,
    pub failed: Vec<Inequality>,
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub holds: bool,
    pub witnesses: Vec<Witness>,
    pub checked_pairs: usize,
}

/// Evaluates inequalities on one side of the transfer.
trait Side {
    /// `Ok(None)` if the inequality holds, `Ok(Some(excess))` otherwise.
    fn violation(&self, ineq: &Inequality) -> Result<Option<f64>>;
}

struct ConeSide<'a> {
    space: &'a FiniteConeMetricSpace,
    tol: f64,
}

impl Side for ConeSide<'_> {
    fn violation(&self, ineq: &Inequality) -> Result<Option<f64>> {
        let dim = self.space.cone().dim();
        let mut slack = vec![0.0; dim];
        for t in &ineq.rhs {
            linalg::axpy(t.coef, self.space.distance(t.pair.0, t.pair.1), &mut slack);
        }
        linalg::axpy(-1.0, self.space.distance(ineq.lhs.0, ineq.lhs.1), &mut slack);
        if self.space.cone().contains(&slack, self.tol)? {
            Ok(None)
        } else {
            let p = self.space.cone().project(&slack, &SolverConfig::default())?;
            Ok(Some(linalg::distance2(&p, &slack)))
        }
    }
}

struct MetricSide<'a> {
    d: &'a [Vec<f64>],
    tol: f64,
}

impl MetricSide<'_> {
    fn excess(&self, ineq: &Inequality) -> f64 {
        let rhs: f64 = ineq.rhs.iter().map(|t| t.coef * self.d[t.pair.0][t.pair.1]).sum();
        self.d[ineq.lhs.0][ineq.lhs.1] - rhs
    }
}

impl Side for MetricSide<'_> {
    fn violation(&self, ineq: &Inequality) -> Result<Option<f64>> {
        let e = self.excess(ineq);
        Ok(if e <= self.tol { None } else { Some(e) })
    }
}

/// Outcome of one pair: `None` if the condition holds there.
fn evaluate_pair(side: &dyn Side, pc: &PairCondition) -> Result<Option<Witness>> {
    let mut failed = Vec::new();
    let mut excesses = Vec::new();
    for alt in &pc.alternatives {
        match side.violation(alt)? {
            None if pc.quantifier == Quantifier::Exists => return Ok(None),
            None => {}
            Some(e) => {
                failed.push(alt.clone());
                excesses.push(e);
            }
        }
    }
    if failed.is_empty() {
        return Ok(None);
    }
    let excess = match pc.quantifier {
        Quantifier::ForAll => excesses.iter().fold(0.0f64, |m, &e| m.max(e)),
        Quantifier::Exists => excesses.iter().fold(f64::INFINITY, |m, &e| m.min(e)),
    };
    Ok(Some(Witness {
        x: pc.x,
        y: pc.y,
        failed,
        excess,
    }))
}

fn sweep(side: &dyn Side, n: usize, images: &[usize], kind: &ContractionKind) -> Result<CheckResult> {
    let mut witnesses = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let pc = pair_condition(kind.tag, &kind.coefficients, kind.power, images, x, y);
            if let Some(w) = evaluate_pair(side, &pc)? {
                witnesses.push(w);
            }
        }
    }
    Ok(CheckResult {
        holds: witnesses.is_empty(),
        witnesses,
        checked_pairs: n * n,
    })
}

fn check_tol(tol: f64) -> Result<()> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument("tolerance must be finite and ≥ 0".into()))
    }
}

/// Checks the hypothesis on `D` over all ordered pairs, comparing in the
/// cone order with membership tolerance `tol`.
pub fn check_cone_condition(space: &FiniteConeMetricSpace, map: &SelfMap, kind: &ContractionKind, tol: f64) -> Result<CheckResult> {
    check_tol(tol)?;
    let images = map.images_for(space.len())?;
    sweep(&ConeSide { space, tol }, space.len(), images, kind)
}

/// Checks the conclusion on a real distance table over all ordered pairs.
pub fn check_metric_condition(d: &[Vec<f64>], map: &SelfMap, kind: &ContractionKind, tol: f64) -> Result<CheckResult> {
    check_tol(tol)?;
    check_square(d)?;
    let images = map.images_for(d.len())?;
    sweep(&MetricSide { d, tol }, d.len(), images, kind)
}

fn check_square(d: &[Vec<f64>]) -> Result<()> {
    match d.iter().find(|r| r.len() != d.len()) {
        Some(r) => Err(Error::DimensionMismatch {
            expected: d.len(),
            found: r.len(),
        }),
        None => Ok(()),
    }
}

/// Smallest coefficients for which the conclusion holds on `d`.
///
/// Single-coefficient kinds: the largest ratio `d(lhs) / rhs` over pairs,
/// with `rhs` taken at unit coefficient (the largest alternative for choice
/// kinds, the smallest for "for all" kinds). Pairs with `d(lhs) = 0` are
/// skipped; a positive left side over a zero right side gives ∞.
///
/// Multi-coefficient kinds: minimizes the admissibility functional `Σ wᵢ cᵢ`
/// subject to every pair's inequality by linear programming. Infeasible
/// systems return ∞ in every coordinate.
///
/// The result is not required to be admissible; values at or above the
/// bound mean the map is not contractive under this kind.
pub fn minimal_constant_metric(d: &[Vec<f64>], map: &SelfMap, tag: KindTag, power: PowerParams) -> Result<Vec<f64>> {
    check_square(d)?;
    let n = d.len();
    let images = map.images_for(n)?;
    let side = MetricSide { d, tol: 0.0 };
    let k = tag.coefficient_count();
    if k == 1 {
        let mut worst = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                let pc = pair_condition(tag, &[1.0], power, images, x, y);
                let lhs = side.excess(&Inequality {
                    lhs: pc.alternatives[0].lhs,
                    rhs: Vec::new(),
                });
                if lhs <= 0.0 {
                    continue;
                }
                let rhs_values = pc.alternatives.iter().map(|a| lhs - side.excess(a));
                let rhs = match pc.quantifier {
                    Quantifier::Exists => rhs_values.fold(f64::NEG_INFINITY, f64::max),
                    Quantifier::ForAll => rhs_values.fold(f64::INFINITY, f64::min),
                };
                let ratio = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
                worst = worst.max(ratio);
            }
        }
        return Ok(vec![worst]);
    }
    // Row per pair: Σ_i c_i r_i ≥ lhs, with r_i the right-hand side of the
    // inequality at the i-th unit coefficient vector.
    let mut rows = Vec::with_capacity(n * n);
    let mut lhs = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            let mut row = vec![0.0; k];
            let mut l = 0.0;
            for (i, r) in row.iter_mut().enumerate() {
                let mut unit = vec![0.0; k];
                unit[i] = 1.0;
                let pc = pair_condition(tag, &unit, power, images, x, y);
                let ineq = &pc.alternatives[0];
                l = d[ineq.lhs.0][ineq.lhs.1];
                *r = l - side.excess(ineq);
            }
            if l > 0.0 {
                rows.push(row);
                lhs.push(l);
            }
        }
    }
    if rows.is_empty() {
        return Ok(vec![0.0; k]);
    }
    match linalg::lp_min_cover(&rows, &lhs, &tag.constraint_weights()) {
        linalg::LpOutcome::Optimal { x, .. } => Ok(x),
        linalg::LpOutcome::Infeasible => Ok(vec![f64::INFINITY; k]),
        linalg::LpOutcome::Stalled => Err(Error::Convergence {
            best: Vec::new(),
            value: f64::NAN,
            residual: f64::NAN,
            iterations: 10_000,
        }),
    }
}

/// Smallest `s ≥ 0` (to [`BISECTION_WIDTH`]) such that the hypothesis with
/// coefficients `s · direction` holds on `D` at every pair, or ∞ if none up
/// to 10⁶ does. Returns the upper end of the final bracket, so the
/// hypothesis holds at the returned scale.
///
/// Feasibility is monotone in `s` because every right-hand side is a
/// nonnegative combination of cone elements.
pub fn cone_min_scale(space: &FiniteConeMetricSpace, map: &SelfMap, tag: KindTag, power: PowerParams, direction: &[f64], tol: f64) -> Result<f64> {
    check_tol(tol)?;
    if direction.len() != tag.coefficient_count() || direction.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
        return Err(Error::InvalidCoefficients(format!("{tag}: direction must be nonnegative with {} entries", tag.coefficient_count())));
    }
    let n = space.len();
    let images = map.images_for(n)?;
    let side = ConeSide { space, tol };
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            let at = |s: f64| -> Result<bool> {
                let c: Vec<f64> = direction.iter().map(|d| d * s).collect();
                let pc = pair_condition(tag, &c, power, images, x, y);
                Ok(evaluate_pair(&side, &pc)?.is_none())
            };
            if at(worst)? {
                continue;
            }
            let mut hi = worst.max(1.0);
            while !at(hi)? {
                hi *= 2.0;
                if hi > BISECTION_CEILING {
                    return Ok(f64::INFINITY);
                }
            }
            let mut lo = worst;
            while hi - lo > BISECTION_WIDTH {
                let mid = 0.5 * (lo + hi);
                if at(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            worst = hi;
        }
    }
    Ok(worst)
}

/// Cone-side counterpart of [`minimal_constant_metric`].
///
/// Single-coefficient kinds: the minimal constant by bisection. For
/// multi-coefficient kinds there is no unique minimum in the cone order; the
/// result is the smallest feasible multiple of `direction` (default: the
/// uniform direction with unit admissibility functional). It certifies
/// feasibility, not minimality.
pub fn minimal_constant_cone(space: &FiniteConeMetricSpace, map: &SelfMap, tag: KindTag, power: PowerParams, direction: Option<&[f64]>, tol: f64) -> Result<Vec<f64>> {
    let dir: Vec<f64> = match direction {
        Some(d) => d.to_vec(),
        None => {
            let w = tag.constraint_weights();
            let total: f64 = w.iter().sum();
            vec![1.0 / total; w.len()]
        }
    };
    let s = cone_min_scale(space, map, tag, power, &dir, tol)?;
    Ok(dir.iter().map(|d| if s.is_finite() { d * s } else { f64::INFINITY }).collect())
}

/// Admissibility functional `Σ wᵢ cᵢ` of a coefficient vector (the
/// coefficient itself for single-coefficient kinds).
pub fn functional(tag: KindTag, c: &[f64]) -> f64 {
    c.iter().zip(tag.constraint_weights()).map(|(a, w)| a * w).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferReport {
    pub kind: ContractionKind,
    pub cone_check: CheckResult,
    pub metric_check: CheckResult,
    pub minimal_constants_cone: Vec<f64>,
    pub minimal_constants_metric: Vec<f64>,
    /// Whole-condition transfer: the cone check failing or the metric check
    /// holding.
    pub transfer_ok: bool,
    /// Inequality-by-inequality transfer: every inequality that holds
    /// exactly in the cone order also holds on the metric side within `tol`.
    pub pairwise_ok: bool,
    /// Inequalities that held in the cone order but failed for `d`.
    pub pairwise_failures: Vec<Witness>,
}

impl TransferReport {
    pub fn ok(&self) -> bool {
        self.transfer_ok && self.pairwise_ok
    }
}

/// Computes the equivalent metric and runs [`verify_transfer_with_table`].
pub fn verify_transfer(space: &FiniteConeMetricSpace, map: &SelfMap, kind: &ContractionKind, cfg: &SolverConfig) -> Result<TransferReport> {
    let table = equiv::equivalent_metric_table(space, cfg)?;
    verify_transfer_with_table(space, &table.d, map, kind, cfg.tol)
}

/// Runs the cone and metric checks with the same coefficients and compares
/// them, both as whole conditions and inequality by inequality.
pub fn verify_transfer_with_table(space: &FiniteConeMetricSpace, d: &[Vec<f64>], map: &SelfMap, kind: &ContractionKind, tol: f64) -> Result<TransferReport> {
    if d.len() != space.len() {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            found: d.len(),
        });
    }
    let cone_check = check_cone_condition(space, map, kind, tol)?;
    let metric_check = check_metric_condition(d, map, kind, tol)?;
    let images = map.images_for(space.len())?;
    // Inequalities that hold only within the membership tolerance carry no
    // guarantee for d beyond that tolerance times a norm constant, so the
    // per-inequality comparison reads the cone side exactly.
    let cone_side = ConeSide { space, tol: 0.0 };
    let metric_side = MetricSide { d, tol };
    let n = space.len();
    let mut pairwise_failures = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let pc = pair_condition(kind.tag, &kind.coefficients, kind.power, images, x, y);
            let mut failed = Vec::new();
            let mut excess = 0.0f64;
            for alt in &pc.alternatives {
                if cone_side.violation(alt)?.is_none() {
                    if let Some(e) = metric_side.violation(alt)? {
                        failed.push(alt.clone());
                        excess = excess.max(e);
                    }
                }
            }
            if !failed.is_empty() {
                pairwise_failures.push(Witness { x, y, failed, excess });
            }
        }
    }
    let minimal_constants_metric = minimal_constant_metric(d, map, kind.tag, kind.power)?;
    let direction = if kind.tag.coefficient_count() > 1 && functional(kind.tag, &kind.coefficients) > 0.0 {
        Some(kind.coefficients.as_slice())
    } else {
        None
    };
    let minimal_constants_cone = minimal_constant_cone(space, map, kind.tag, kind.power, direction, tol)?;
    Ok(TransferReport {
        transfer_ok: !cone_check.holds || metric_check.holds,
        pairwise_ok: pairwise_failures.is_empty(),
        pairwise_failures,
        kind: kind.clone(),
        cone_check,
        metric_check,
        minimal_constants_cone,
        minimal_constants_metric,
    })
}

/// Whether `inner ⊆ outer`. Exact for every supported pair of families:
/// polyhedral and orthant cones are tested on their extreme rays, and a
/// Lorentz cone lies in a polyhedral cone iff every facet normal lies in
/// the (self-dual) Lorentz cone.
pub fn cone_contained_in(inner: &Cone, outer: &Cone, tol: f64) -> Result<bool> {
    if inner.dim() != outer.dim() {
        return Ok(false);
    }
    if inner == outer {
        return Ok(true);
    }
    match (inner.kind(), outer.kind()) {
        (ConeKind::Lorentz, ConeKind::Lorentz) => Ok(true),
        (ConeKind::Lorentz, _) => {
            let lorentz = Cone::lorentz(inner.dim())?;
            for nrm in outer.facet_normals().unwrap_or_default() {
                if !lorentz.contains(&nrm, tol)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => {
            for r in inner.extreme_rays().unwrap_or_default() {
                if !outer.contains(&r, tol)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Outcome of [`check_lemma_two_metrics`].
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    /// `D(Tx, Ty) ≤ D*(x, y)` in the order of `D`'s cone.
    pub hypothesis: CheckResult,
    /// `d(Tx, Ty) ≤ d*(x, y) + tol`.
    pub conclusion: CheckResult,
    pub transfer_ok: bool,
    pub pairwise_ok: bool,
    pub d: Vec<Vec<f64>>,
    pub d_star: Vec<Vec<f64>>,
}

impl LemmaReport {
    pub fn ok(&self) -> bool {
        self.transfer_ok && self.pairwise_ok
    }
}

/// Two cone metrics on the same points: if `D(Tx, Ty) ≤ D*(x, y)` for all
/// pairs then `d(Tx, Ty) ≤ d*(x, y)`.
///
/// The spaces must share labels and norm. Their cones may differ provided
/// the cone of `D*` lies inside the cone of `D`; the hypothesis is read in
/// the order of `D`'s cone. Without that containment the chain
/// `D(Tx, Ty) ≤ D*(x, y) ≤ v` mixes two orders and the implication can fail.
pub fn check_lemma_two_metrics(space_d: &FiniteConeMetricSpace, space_d_star: &FiniteConeMetricSpace, map: &SelfMap, cfg: &SolverConfig) -> Result<LemmaReport> {
    if space_d.labels() != space_d_star.labels() {
        return Err(Error::LabelMismatch);
    }
    if space_d.norm() != space_d_star.norm() {
        return Err(Error::InvalidArgument("both cone metrics must use the same norm".into()));
    }
    if !cone_contained_in(space_d_star.cone(), space_d.cone(), cfg.tol)? {
        return Err(Error::InvalidArgument(
            "the cone of D* must be contained in the cone of D".into(),
        ));
    }
    let n = space_d.len();
    let images = map.images_for(n)?;
    let d = equiv::equivalent_metric_table(space_d, cfg)?.d;
    let d_star = equiv::equivalent_metric_table(space_d_star, cfg)?.d;
    let cone = space_d.cone();
    let mut hyp = Vec::new();
    let mut concl = Vec::new();
    let mut pairwise_ok = true;
    for x in 0..n {
        for y in 0..n {
            let (tx, ty) = (images[x], images[y]);
            let ineq = Inequality {
                lhs: (tx, ty),
                rhs: vec![Term { coef: 1.0, pair: (x, y) }],
            };
            let slack = linalg::sub(space_d_star.distance(x, y), space_d.distance(tx, ty));
            let hyp_holds = cone.contains(&slack, cfg.tol)?;
            let hyp_exact = hyp_holds && cone.contains(&slack, 0.0)?;
            if !hyp_holds {
                let p = cone.project(&slack, cfg)?;
                hyp.push(Witness {
                    x,
                    y,
                    failed: vec![ineq.clone()],
                    excess: linalg::distance2(&p, &slack),
                });
            }
            let excess = d[tx][ty] - d_star[x][y];
            if excess > cfg.tol {
                if hyp_exact {
                    pairwise_ok = false;
                }
                concl.push(Witness {
                    x,
                    y,
                    failed: vec![ineq],
                    excess,
                });
            }
        }
    }
    let hypothesis = CheckResult {
        holds: hyp.is_empty(),
        witnesses: hyp,
        checked_pairs: n * n,
    };
    let conclusion = CheckResult {
        holds: concl.is_empty(),
        witnesses: concl,
        checked_pairs: n * n,
    };
    Ok(LemmaReport {
        transfer_ok: !hypothesis.holds || conclusion.holds,
        pairwise_ok,
        hypothesis,
        conclusion,
        d,
        d_star,
    })
}
