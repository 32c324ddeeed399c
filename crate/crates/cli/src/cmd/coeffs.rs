use std::io::Write;

use crate::cmd::{coefficients, join};
use crate::error::CliError;
use crate::manifest::Run;

pub const TABLE_FILE: &str = "coeffs.txt";

pub fn run(run: &Run) -> Result<(), CliError> {
    let cfg = &run.cfg;
    let dist = cfg.distribution()?;
    let basis = cfg.basis()?;
    let c = coefficients(run, &dist, &basis, &cfg.coeff_options())?;
    let (w, l) = (&c.set.w_hat, &c.set.lambda);
    let grad = basis.d * basis.k;
    run.write(TABLE_FILE, |f| {
        writeln!(f, "# coefficient storage: d={} K={} L={} N={}", basis.d, basis.k, basis.l, basis.n)?;
        writeln!(f, "# tensor,ranks,params")?;
        writeln!(f, "w_hat,{},{}", join(&w.ranks()), w.param_count())?;
        writeln!(f, "lambda,{},{}", join(&l.ranks()), l.param_count())?;
        writeln!(f, "grad_phi,{},{}", join(&vec![1; basis.d + 1]), grad)?;
        writeln!(f, "dense,,{:e}", (basis.k as f64).powi(basis.d as i32))
    })?;
    println!("w_hat ranks {} params {}", join(&w.ranks()), w.param_count());
    println!("lambda ranks {} params {}", join(&l.ranks()), l.param_count());
    match &c.stats {
        Some(s) => println!(
            "computed in {:.3} s (density {:.3} s, coefficients {:.3} s, lambda {:.3} s; {} oracle calls, cross error {:.2e})",
            c.seconds, s.density_seconds, s.coeff_seconds, s.lambda_seconds, s.oracle_calls, s.cross_error
        ),
        None => println!("loaded from cache in {:.3} s", c.seconds),
    }
    println!("cache {}", c.file.display());
    Ok(())
}
