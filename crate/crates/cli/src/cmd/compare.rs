use std::io::Write;

use ergodic_tt::distributions::ReferenceDistribution;
use ergodic_tt::sim::{cumulative_average_experiment, radius_for_fraction, run_suite, suite_gmms, SuiteOptions, TargetRegion, TrialSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::manifest::Run;

pub fn run(run: &Run) -> Result<(), CliError> {
    let cfg = &run.cfg;
    let c = &cfg.compare;
    if c.n_gmms == 0 || c.n_trials == 0 {
        return Err(CliError::Config("compare.n_gmms and compare.n_trials must be positive".into()));
    }
    let opts = SuiteOptions {
        d: c.d,
        n_gmms: c.n_gmms,
        n_trials: c.n_trials,
        seed: cfg.seed,
        k: c.k,
        volume_fraction: c.volume_fraction,
        time_limit: c.time_limit,
        strategies: cfg.strategies()?,
        coeff_opts: cfg.coeff_options(),
        w_rank_cap: cfg.ergodic_config().w_rank_cap,
    };
    let report = run_suite(&opts)?;
    run.write("suite_rows.csv", |f| report.write_rows(f))?;
    run.write("suite_summary.csv", |f| report.write_summary(f))?;
    report.write_summary(std::io::stdout())?;

    if c.cumulative_attempts > 0 {
        let g = suite_gmms(c.d, 1, cfg.seed)?.remove(0);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let center = g.sample(&mut rng);
        let target = TargetRegion::new(center, radius_for_fraction(c.d, 1.0, c.volume_fraction), 1.0)?;
        let dist = ReferenceDistribution::Gmm(g);
        let mut lines = Vec::new();
        let mut direct = 0.0;
        for &s in &opts.strategies {
            let mut spec = TrialSpec::new(s, dist.clone(), target.clone(), opts.x0());
            spec.seed = cfg.seed;
            spec.k = c.k;
            spec.time_limit = c.time_limit;
            spec.coeff_opts = opts.coeff_opts.clone();
            spec.w_rank_cap = opts.w_rank_cap;
            let series = cumulative_average_experiment(&spec, c.cumulative_attempts)?;
            direct = series.direct_time;
            for (a, v) in &series.entries {
                lines.push(format!("{s},{a},{v}"));
            }
            let fin = series.final_value().map_or("none".into(), |v| format!("{v:.2} s"));
            let stop = if series.timed_out { " (stopped at a timeout)" } else { "" };
            println!("cumulative {s}: {} hits, final T_c/c {fin}{stop}", series.entries.len());
        }
        run.write("cumulative.csv", |f| {
            writeln!(f, "# straight-line time to target: {direct} s")?;
            writeln!(f, "# strategy,attempt,cumulative_mean_time[s]")?;
            lines.iter().try_for_each(|l| writeln!(f, "{l}"))
        })?;
    }
    Ok(())
}
