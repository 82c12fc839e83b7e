use lv_lab::entire_solutions::{backward_construct, EntireSetup};
use lv_lab::grid::GridSpec;
use lv_lab::linearized_eigen::solve_variant_weak;
use lv_lab::wave_profiles::{solve_kpp_wave_normalized, Normalization};
use lv_lab::ModelParams;

fn main() -> lv_lab::Result<()> {
    let p = ModelParams::new(0.5, 0.5, 1.0, 1.0)?;
    let w = solve_kpp_wave_normalized(2.5, 1.0, 1.0, GridSpec::new(-60.0, 60.0, 2401)?, Normalization::TailUnit)?;
    let e = solve_variant_weak(&p, 2.5, &w, w.grid)?;
    // at lambda_3 the gauge rate sits on r(1 - b) and psi has no left growth
    println!("lambda_3 = {:.6}, mu = {}, delta_v = {}", e.lambda, e.mu, e.delta_v);
    println!("psi nonincreasing: {}", e.psi.windows(2).all(|w| w[1] <= w[0]));
    let setup = EntireSetup::new(&p, e, None)?;
    let run = backward_construct(&setup, &[-4.0, -6.0, -8.0], 0.0, 1e-3)?;
    println!("gaps {:?}", run.convergence_history);
    Ok(())
}
