use lv_lab::grid::GridSpec;
use lv_lab::spectral_classifier::polar_shoot;
use lv_lab::wave_profiles::{solve_kpp_wave_normalized, Normalization};
use lv_lab::ModelParams;

fn main() -> lv_lab::Result<()> {
    let p = ModelParams::new(0.5, 0.5, 1.0, 1.0)?;
    let w = solve_kpp_wave_normalized(2.5, 1.0, 1.0, GridSpec::new(-60.0, 60.0, 2401)?, Normalization::TailUnit)?;
    for theta0 in [0.0, 0.5, 1.0, 1.5] {
        let tr = polar_shoot(&p, 2.5, 0.54, &w, theta0, -20.0)?;
        println!(
            "theta0 = {theta0}: limit {:.6}, arctan(lambda_+) = {:.6}, min margin {:.2e}",
            tr.theta_limit, tr.theta_floor, tr.min_margin
        );
    }
    Ok(())
}
