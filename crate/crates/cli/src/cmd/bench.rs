use ergodic_tt::distributions::ReferenceDistribution;
use ergodic_tt::ergodic::ErgodicConfig;
use ergodic_tt::sim::{bench_timing, BenchOptions, TimingRow};

use crate::error::CliError;
use crate::manifest::Run;

pub fn run(run: &Run) -> Result<(), CliError> {
    let b = &run.cfg.bench;
    if b.d_list.is_empty() {
        return Err(CliError::Config("bench.d_list is empty".into()));
    }
    let opts = BenchOptions {
        k: b.k,
        steps: b.steps,
        warmup: b.warmup,
        repetitions: b.repetitions,
        dense_max_d: b.dense_max_d,
        ergodic: ErgodicConfig { metric_every: 0, ..run.cfg.ergodic_config() },
    };
    let var = b.var;
    let rows = bench_timing(&b.d_list, |d| ReferenceDistribution::iso_gaussian(vec![0.5; d], var), &opts)?;
    run.write("timing.csv", |f| TimingRow::write_table(&rows, f))?;
    TimingRow::write_table(&rows, std::io::stdout())?;
    Ok(())
}
