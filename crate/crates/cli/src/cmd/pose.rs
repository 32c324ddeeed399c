use std::io::Write;

use ergodic_tt::distributions::ReferenceDistribution;
use ergodic_tt::ergodic::ErgodicConfig;
use ergodic_tt::fourier::BasisConfig;
use ergodic_tt::manifold::load_poses;
use ergodic_tt::sim::pose::{explore_poses, synthetic_pose_gmm, PoseModel};

use crate::cmd::coefficients;
use crate::error::CliError;
use crate::manifest::Run;

pub fn run(run: &Run) -> Result<(), CliError> {
    let cfg = &run.cfg;
    let p = &cfg.pose;
    let (model, start) = match &p.poses {
        Some(file) => {
            let poses = load_poses(file)?;
            let model = PoseModel::from_poses(&poses, p.components, p.var, p.margin, 1.0)?;
            (model, poses[0])
        }
        None => {
            let (task, anchor) = synthetic_pose_gmm(p.components, cfg.seed)?;
            let model = PoseModel::from_task_gmm(&task, anchor, p.n_sigma, 1.0)?;
            let start = model.decode(&model.gmm.means()[0])?;
            (model, start)
        }
    };
    let basis = BasisConfig::new(6, p.k, 1.0)?;
    let dist = ReferenceDistribution::Gmm(model.gmm.clone());
    let c = coefficients(run, &dist, &basis, &cfg.coeff_options())?;
    let ecfg = ErgodicConfig { w_rank_cap: (p.w_rank_cap > 0).then_some(p.w_rank_cap), ..cfg.ergodic_config() };
    let out = explore_poses(&model, c.set.clone(), ecfg, &start, p.steps, p.keep_every)?;

    run.write("poses.csv", |f| {
        writeln!(f, "# t[s],px[m],py[m],pz[m],qw,qx,qy,qz")?;
        for s in &out.samples {
            let [a, b, cc] = s.pose.p;
            let [w, x, y, z] = s.pose.q.to_array();
            writeln!(f, "{},{a},{b},{cc},{w},{x},{y},{z}", s.t)?;
        }
        Ok(())
    })?;
    run.write("pose_model.txt", |f| {
        let a = model.anchor.to_array();
        writeln!(f, "# anchor quaternion qw qx qy qz")?;
        writeln!(f, "{} {} {} {}", a[0], a[1], a[2], a[3])?;
        writeln!(f, "# task box lower, upper: px py pz v1 v2 v3 (m, rad)")?;
        writeln!(f, "{}", model.map.lower().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))?;
        writeln!(f, "{}", model.map.upper().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))?;
        writeln!(f, "# domain mixture")?;
        write!(f, "{}", model.gmm.to_text())?;
        writeln!(f, "# max | |q| - 1 | over all steps")?;
        writeln!(f, "{:e}", out.max_norm_error)
    })?;
    run.write("pose_timing.csv", |f| {
        writeln!(f, "# steps,mean_rate[steps/s],min_window_rate[steps/s]")?;
        writeln!(f, "{},{:.1},{:.1}", out.steps, out.mean_rate, out.min_window_rate)
    })?;
    println!(
        "{} steps, {} poses kept, max quaternion norm error {:.2e}, {:.0} steps/s (slowest window {:.0})",
        out.steps,
        out.samples.len(),
        out.max_norm_error,
        out.mean_rate,
        out.min_window_rate
    );
    Ok(())
}
