//! Scalar KPP (a = 0) from compact data: the front speed approaches 2.
use lv_lab::front_metrics::{track_level_set, Component};
use lv_lab::grid::GridSpec;
use lv_lab::rd_integrator::{integrate, BcPair, IntegratorConfig, StatePair};
use lv_lab::ModelParams;

fn main() -> lv_lab::Result<()> {
    let p = ModelParams::unchecked(0.0, 0.5, 1.0, 1.0);
    let g = GridSpec::new(-10.0, 100.0, 2201)?;
    let u: Vec<f64> = g.nodes().iter().map(|x| if x.abs() < 2.0 { 1.0 } else { 0.0 }).collect();
    let s = StatePair::new(g, u, vec![0.0; g.n], 0.0, 0.0);
    let cfg = IntegratorConfig::new(0.01, BcPair::neumann(), BcPair::neumann());
    let ts: Vec<f64> = (1..=40).map(|k| k as f64).collect();
    let traj = integrate(&s, &cfg, &p, 40.0, &ts)?;
    let tr = track_level_set(&traj, Component::U, 0.5)?;
    println!("fitted speed {:.4} (2 minus the logarithmic lag)", tr.fitted_speed);
    Ok(())
}
