//! JSON renderings of core results. Point indices are emitted alongside
//! their labels where a space is known.

use cone_metric_core::catalog::{CheckResult, ContractionKind, Inequality, Witness};
use cone_metric_core::fixedpoint::IterationTrace;
use cone_metric_core::suite::{InstanceRecord, KindSummary, SuiteConfig, SuiteReport};
use serde_json::{json, Map, Value};

use crate::formats::{MapJson, SpaceJson};

pub const SCHEMA: &str = "cone-metric-kit/1";

/// A top-level document: `{"schema": ..., "command": ..., fields...}`.
pub fn document(command: &str, body: Value) -> Value {
    let mut map = Map::new();
    map.insert("schema".into(), json!(SCHEMA));
    map.insert("command".into(), json!(command));
    if let Value::Object(fields) = body {
        map.extend(fields);
    }
    Value::Object(map)
}

fn label(labels: Option<&[String]>, i: usize) -> Value {
    match labels {
        Some(l) => json!(l[i]),
        None => json!(i),
    }
}

pub fn inequality(q: &Inequality) -> Value {
    json!({
        "lhs": [q.lhs.0, q.lhs.1],
        "rhs": q.rhs.iter().map(|t| json!({"coef": t.coef, "pair": [t.pair.0, t.pair.1]})).collect::<Vec<_>>(),
        "text": q.to_string(),
    })
}

pub fn witness(w: &Witness, labels: Option<&[String]>) -> Value {
    json!({
        "x": w.x,
        "y": w.y,
        "x_label": label(labels, w.x),
        "y_label": label(labels, w.y),
        "excess": w.excess,
        "failed": w.failed.iter().map(inequality).collect::<Vec<_>>(),
    })
}

pub fn check_result(c: &CheckResult, labels: Option<&[String]>) -> Value {
    json!({
        "holds": c.holds,
        "checked_pairs": c.checked_pairs,
        "witnesses": c.witnesses.iter().map(|w| witness(w, labels)).collect::<Vec<_>>(),
    })
}

pub fn kind(k: &ContractionKind) -> Value {
    let p = k.power();
    let mut v = json!({
        "kind": k.tag().name(),
        "coefficients": k.coefficients(),
    });
    if k.tag() == cone_metric_core::catalog::KindTag::PowerPair {
        v["power"] = json!({"m": p.m, "n": p.n, "mode": p.mode.name()});
    }
    v
}

pub fn trace_summary<P>(t: &IterationTrace<P>) -> Value {
    json!({
        "iterations": t.iterations(),
        "apriori_bound": t.apriori_bound(),
        "aposteriori_bound": t.aposteriori_bound(),
    })
}

pub fn trace_detail<P: serde::Serialize>(t: &IterationTrace<P>) -> Value {
    json!({
        "iterates": t.iterates,
        "step_d": t.step_d,
        "apriori": t.apriori,
        "aposteriori": t.aposteriori,
    })
}

fn instance(rec: &InstanceRecord) -> Value {
    let labels = Some(rec.space.labels());
    let r = &rec.report;
    let mut v = kind(&rec.kind);
    let extra = json!({
        "attempt": rec.attempt,
        "map_style": rec.style.name(),
        "space": SpaceJson::from_space(&rec.space),
        "map": MapJson::from_map(&rec.map),
        "cone_scale": rec.cone_scale,
        "cone_check": check_result(&r.cone_check, labels),
        "metric_check": check_result(&r.metric_check, labels),
        "transfer_ok": r.transfer_ok,
        "pairwise_ok": r.pairwise_ok,
        "pairwise_failures": r.pairwise_failures.iter().map(|w| witness(w, labels)).collect::<Vec<_>>(),
        "minimal_constants_cone": r.minimal_constants_cone,
        "minimal_constants_metric": r.minimal_constants_metric,
        "constants_ok": rec.constants_ok,
    });
    if let (Value::Object(a), Value::Object(b)) = (&mut v, extra) {
        a.extend(b);
    }
    v
}

pub fn kind_summary(s: &KindSummary, cfg: &SuiteConfig) -> Value {
    json!({
        "kind": s.tag.name(),
        "instances": s.instances,
        "attempts": s.attempts,
        "transfer_ok": s.transfer_ok,
        "pairwise_ok": s.pairwise_ok,
        "constants_ok": s.constants_ok,
        "max_constant_ratio": s.max_constant_ratio,
        "passed": s.passed(cfg),
        "failure": s.failure.as_deref().map(instance),
    })
}

pub fn suite(r: &SuiteReport, cfg: &SuiteConfig) -> Value {
    json!({
        "seed": cfg.seed,
        "per_kind": cfg.per_kind,
        "max_attempts": cfg.max_attempts,
        "passed": r.passed(cfg),
        "kinds": r.summaries.iter().map(|s| kind_summary(s, cfg)).collect::<Vec<_>>(),
    })
}

/// The per-kind table of the text rendering.
pub fn suite_table(r: &SuiteReport, cfg: &SuiteConfig) -> String {
    let mut out = format!(
        "{:<14} {:>9} {:>9} {:>9} {:>9} {:>10}  status\n",
        "kind", "instances", "attempts", "pass", "pairwise", "max-ratio"
    );
    for s in &r.summaries {
        let status = if s.failure.is_some() {
            "FAIL"
        } else if s.instances < cfg.per_kind {
            "SHORT"
        } else {
            "ok"
        };
        out.push_str(&format!(
            "{:<14} {:>9} {:>9} {:>9} {:>9} {:>10.6}  {status}\n",
            s.tag.name(),
            s.instances,
            s.attempts,
            s.transfer_ok,
            s.pairwise_ok,
            s.max_constant_ratio
        ));
    }
    for s in &r.summaries {
        if let Some(f) = &s.failure {
            out.push_str(&format!(
                "\n{} failed at attempt {}: coefficients {:?}, cone-side scale {}\n",
                s.tag.name(),
                f.attempt,
                f.kind.coefficients(),
                f.cone_scale
            ));
            for w in f.report.metric_check.witnesses.iter().chain(&f.report.pairwise_failures) {
                out.push_str(&format!("  pair ({}, {}) excess {:e}\n", w.x, w.y, w.excess));
            }
        }
    }
    out
}
