pub mod bench;
pub mod coeffs;
pub mod compare;
pub mod explore;
pub mod pose;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use ergodic_tt::distributions::ReferenceDistribution;
use ergodic_tt::fourier::{BasisConfig, CoeffOptions, CoefficientSet, PrecomputeStats};

use crate::error::CliError;
use crate::manifest::Run;

/// Coefficients plus where they came from.
pub struct Coeffs {
    pub set: Arc<CoefficientSet>,
    pub file: PathBuf,
    /// Computed in this run; `None` on a cache hit.
    pub stats: Option<PrecomputeStats>,
    pub seconds: f64,
}

/// Load the coefficient set from the cache when its fingerprint matches,
/// otherwise compute and store it.
pub fn coefficients(
    run: &Run,
    dist: &ReferenceDistribution,
    basis: &BasisConfig,
    opts: &CoeffOptions,
) -> Result<Coeffs, CliError> {
    let t0 = Instant::now();
    let fp = CoefficientSet::fingerprint(dist, basis, opts);
    let dir = run.cfg.cache_dir();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let file = dir.join(format!("coeffs-{fp:016x}.bin"));
    if file.exists() {
        match CoefficientSet::load(&file) {
            Ok((set, stored)) if stored == fp && set.config == *basis => {
                return Ok(Coeffs { set: Arc::new(set), file, stats: None, seconds: t0.elapsed().as_secs_f64() });
            }
            Ok(_) => eprintln!("warning: {} does not match this configuration; recomputing", file.display()),
            Err(e) => eprintln!("warning: unreadable cache {}: {e}; recomputing", file.display()),
        }
    }
    let (set, stats) = CoefficientSet::compute_with_stats(dist, basis, opts)?;
    set.save(&file, fp)?;
    Ok(Coeffs { set: Arc::new(set), file, stats: Some(stats), seconds: t0.elapsed().as_secs_f64() })
}

pub fn join(v: &[usize]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}
