//! Backward construction of the divergent-type entire solution.
use lv_lab::entire_solutions::{backward_construct, EntireSetup};
use lv_lab::grid::GridSpec;
use lv_lab::linearized_eigen::solve_divergent;
use lv_lab::wave_profiles::{solve_kpp_wave_normalized, Normalization};
use lv_lab::ModelParams;

fn main() -> lv_lab::Result<()> {
    let p = ModelParams::new(0.5, 0.5, 1.0, 1.0)?;
    let w = solve_kpp_wave_normalized(2.5, 1.0, 1.0, GridSpec::new(-60.0, 60.0, 2401)?, Normalization::TailUnit)?;
    let setup = EntireSetup::new(&p, solve_divergent(&p, 2.5, 0.2, &w)?, None)?;
    println!("eps = {:.6}, M = {:.6}", setup.gauge.eps, setup.gauge.m);
    let run = backward_construct(&setup, &[-4.0, -6.0, -8.0, -10.0], 0.0, 1e-3)?;
    for (n, gap) in run.start_times.iter().zip(&run.convergence_history) {
        println!("start {n:>5}: gap at t = 0 {gap:.3e}");
    }
    println!("chain {:.2e}, sandwich {:.2e}", run.chain_worst, run.sandwich_worst);
    let (d, bound) = run.origin_distance(-10.0, 4.0, 1e-3)?;
    println!("distance to (Phi_c, 0) at t = -10: {d:.4e} (bound {bound:.4e})");
    run.write_dir(&std::env::temp_dir().join("lv_lab_entire"))
}
