//! Weak competition: run the entire solution forward and read off the
//! spreading speeds and the coexistence cone. Takes about a minute.
use lv_lab::acceptance::{divergent_run, lab_grid, weak_cone_speeds};
use lv_lab::entire_solutions::forward_extend;
use lv_lab::front_metrics::{region_check, rightmost_crossing, track_level_set, Component};

fn main() -> lv_lab::Result<()> {
    let p = lv_lab::acceptance::p0();
    let run = divergent_run()?;
    let traj = forward_extend(&run, lab_grid(), 60.0, 1e-3, 2.0)?;
    for comp in [Component::U, Component::V] {
        let tail: Vec<_> = traj.iter().filter(|s| rightmost_crossing(&s.grid, comp.of(s), 0.5).is_some()).cloned().collect();
        println!("{comp:?} front speed {:.4}", track_level_set(&tail, comp, 0.5)?.fitted_speed);
    }
    let (cvt, cu1) = weak_cone_speeds(&p)?;
    let r = region_check(&traj, (-cvt, cu1), p.e_star(), 0.3)?;
    for (t, dev) in &r.per_snapshot {
        println!("t = {t}: sup |state - e_*|_1 on the cone = {dev:.4}");
    }
    Ok(())
}
