//! Merging type: u grows out of (0, Psi_{c_v}) and overtakes at c_u3.
use lv_lab::entire_solutions::{backward_construct, forward_extend, EntireSetup};
use lv_lab::front_metrics::{rightmost_crossing, track_level_set, Component};
use lv_lab::grid::GridSpec;
use lv_lab::linearized_eigen::solve_variant_hat;
use lv_lab::speed_atlas::merging_constants;
use lv_lab::wave_profiles::{solve_kpp_wave_normalized, Normalization};
use lv_lab::ModelParams;

fn main() -> lv_lab::Result<()> {
    let p = ModelParams::new(0.5, 2.0, 1.0, 1.0)?;
    let (_, cu3) = merging_constants(&p, 3.0)?;
    let psi = solve_kpp_wave_normalized(3.0, 1.0, 1.0, GridSpec::new(-60.0, 60.0, 2401)?, Normalization::TailUnit)?;
    let setup = EntireSetup::new(&p, solve_variant_hat(&p, 3.0, &psi, psi.grid)?, None)?;
    let run = backward_construct(&setup, &[-4.0, -6.0, -8.0], 0.0, 1e-3)?;
    let lab = GridSpec::new(-100.0, 300.0, 8001)?;
    let traj = forward_extend(&run, lab, 40.0, 1e-3, 1.0)?;
    let tail: Vec<_> = traj.into_iter().filter(|s| rightmost_crossing(&s.grid, &s.u, 0.5).is_some()).collect();
    let tr = track_level_set(&tail, Component::U, 0.5)?;
    println!("u front speed {:.4}, predicted c_u3 = {cu3:.4}", tr.fitted_speed);
    Ok(())
}
