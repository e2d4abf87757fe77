//! Parallel transfer suite.
//!
//! Attempts run in fixed-size batches on a rayon pool and are folded into
//! the per-kind summary in attempt order, so the result is identical to
//! [`cone_metric_core::suite::run_suite`] for any thread count.

use cone_metric_core::suite::{self, KindSummary, SuiteConfig, SuiteReport};
use cone_metric_core::catalog::KindTag;
use rayon::prelude::*;

use crate::error::KitError;

const BATCH: usize = 64;

/// Thread cap from `CMK_THREADS`; `0` or unset means one per core.
pub fn thread_cap() -> Result<usize, KitError> {
    match std::env::var("CMK_THREADS") {
        Err(_) => Ok(0),
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| KitError::Usage(format!("CMK_THREADS must be a nonnegative integer, got `{s}`"))),
    }
}

/// Runs `f` on a pool honouring `CMK_THREADS`.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, KitError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap()?)
        .build()
        .map_err(|e| KitError::Usage(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn run_kind(cfg: &SuiteConfig, tag: KindTag) -> Result<KindSummary, KitError> {
    let mut summary = KindSummary::new(tag);
    let mut next = 0;
    while summary.wants_more(cfg) {
        let outcomes: Vec<_> = (next..next + BATCH)
            .into_par_iter()
            .map(|a| suite::run_attempt(cfg, tag, a))
            .collect();
        next += BATCH;
        for outcome in outcomes {
            if !summary.wants_more(cfg) {
                break;
            }
            summary.absorb(cfg, outcome?);
        }
    }
    Ok(summary)
}

/// The transfer suite with kinds reported in catalog order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport, KitError> {
    let mut summaries = with_pool(|| {
        cfg.kinds
            .par_iter()
            .map(|&tag| run_kind(cfg, tag))
            .collect::<Result<Vec<_>, _>>()
    })??;
    summaries.sort_by_key(|s| s.tag as usize);
    Ok(SuiteReport { summaries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_sequential_run() {
        let cfg = SuiteConfig::new(5, 20, vec![KindTag::Chatterjea, KindTag::Banach]);
        let par = run_suite(&cfg).unwrap();
        let mut seq = suite::run_suite(&cfg).unwrap();
        seq.summaries.sort_by_key(|s| s.tag as usize);
        assert_eq!(par, seq);
    }
}
