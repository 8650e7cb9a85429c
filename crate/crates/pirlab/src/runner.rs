//! Parallel drivers. Work is split into fixed chunks of trial indices and
//! merged in index order, so results do not depend on the thread count.

use rayon::prelude::*;

use pirlab_core::scheme::SchemeInstance;
use pirlab_core::verify::{self, CorrectnessReport, PrivacyAccumulator, PrivacyReport};
use pirlab_core::{Error, Result};

const CHUNK: u64 = 256;

fn chunks(total: u64) -> Vec<std::ops::Range<u64>> {
    (0..total.div_ceil(CHUNK)).map(|c| c * CHUNK..((c + 1) * CHUNK).min(total)).collect()
}

/// Runs `f` on a pool with `jobs` threads (0 = rayon default).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

pub fn correctness(scheme: &SchemeInstance, trials: u64, seed: u64) -> Result<CorrectnessReport> {
    if trials == 0 {
        return Err(Error::BadParams("trials must be positive".into()));
    }
    let parts: Vec<Result<CorrectnessReport>> =
        chunks(trials).into_par_iter().map(|r| verify::check_correctness_range(scheme, seed, r)).collect();
    let mut out = CorrectnessReport::default();
    for p in parts {
        out.merge(&p?);
    }
    Ok(out)
}

pub fn privacy_statistical(scheme: &SchemeInstance, sets: &[Vec<usize>], samples: u64, seed: u64, alpha: f64) -> Result<PrivacyReport> {
    if samples < verify::MIN_SAMPLES {
        return Err(Error::UnderPowered(format!("{samples} samples per desired index, need {}", verify::MIN_SAMPLES)));
    }
    let parts: Vec<Result<PrivacyAccumulator>> =
        chunks(samples).into_par_iter().map(|r| verify::privacy_samples(scheme, sets, seed, r)).collect();
    let mut acc = PrivacyAccumulator::default();
    for p in parts {
        acc.merge(p?);
    }
    verify::finish_privacy(scheme, &acc, alpha)
}
