use std::io::Write;

use ergodic_tt::distributions::{Gmm, ReferenceDistribution};
use ergodic_tt::ergodic;
use ergodic_tt::stats::{correlation, grid_centers, occupancy_2d};

use crate::cmd::coefficients;
use crate::error::CliError;
use crate::manifest::Run;

pub fn run(run: &Run) -> Result<(), CliError> {
    let cfg = &run.cfg;
    let dist = cfg.distribution()?;
    let basis = cfg.basis()?;
    let x0 = cfg.explore.x0.clone().unwrap_or_else(|| vec![0.5 * basis.l; basis.d]);
    if x0.len() != basis.d {
        return Err(CliError::Config(format!("explore.x0 has {} entries, basis.d is {}", x0.len(), basis.d)));
    }
    let c = coefficients(run, &dist, &basis, &cfg.coeff_options())?;
    let (traj, state) = ergodic::run(cfg.ergodic_config(), c.set.clone(), &x0, cfg.explore.t_final)?;

    run.write("trajectory.csv", |f| traj.write_delimited(f))?;
    run.write("metric.csv", |f| {
        writeln!(f, "# t[s],xi")?;
        for (t, xi) in state.metric_history() {
            writeln!(f, "{t},{xi}")?;
        }
        Ok(())
    })?;

    let mut summary = vec![format!("steps {}", traj.len())];
    if let Some((t, xi)) = state.metric_history().last() {
        summary.push(format!("xi({t:.2} s) {xi:.6e}"));
    }
    let bins = cfg.explore.histogram_bins;
    if bins > 0 {
        let points: Vec<Vec<f64>> = traj.samples.iter().map(|s| s.x.clone()).collect();
        for i in 0..basis.d {
            for j in i + 1..basis.d {
                let occ = occupancy_2d(&points, i, j, bins, basis.l);
                let mass = cell_mass(&dist, i, j, bins, basis.l)?;
                let centers = grid_centers(bins, basis.l);
                run.write(&format!("occupancy_{}_{}.csv", i + 1, j + 1), |f| {
                    writeln!(f, "# x{}_center,x{}_center,occupancy_fraction,density_mass", i + 1, j + 1)?;
                    for ((c, o), m) in centers.iter().zip(&occ).zip(&mass) {
                        writeln!(f, "{},{},{},{}", c[0], c[1], o, m)?;
                    }
                    Ok(())
                })?;
                summary.push(format!("occupancy correlation x{} x{}: {:.4}", i + 1, j + 1, correlation(&occ, &mass)));
            }
        }
    }
    run.write("summary.txt", |f| summary.iter().try_for_each(|l| writeln!(f, "{l}")))?;
    for l in &summary {
        println!("{l}");
    }
    Ok(())
}

/// Marginal density of coordinates `i, j` at the cell centers, normalized to
/// sum to one over the grid.
fn cell_mass(dist: &ReferenceDistribution, i: usize, j: usize, bins: usize, l: f64) -> Result<Vec<f64>, CliError> {
    let centers = grid_centers(bins, l);
    let mut m: Vec<f64> = match dist {
        ReferenceDistribution::Uniform { .. } => vec![1.0; centers.len()],
        ReferenceDistribution::IsoGaussian { mean, var } => {
            let g = Gmm::isotropic(vec![1.0], vec![vec![mean[i], mean[j]]], *var)?;
            centers.iter().map(|c| g.pdf(c)).collect()
        }
        ReferenceDistribution::Gmm(g) => {
            let g = g.marginal(&[i, j])?;
            centers.iter().map(|c| g.pdf(c)).collect()
        }
    };
    let total: f64 = m.iter().sum();
    if total > 0.0 {
        m.iter_mut().for_each(|v| *v /= total);
    }
    Ok(m)
}
