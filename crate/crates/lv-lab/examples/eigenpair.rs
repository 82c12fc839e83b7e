//! Eigenpair of the linearization about (Phi_c, 0) and the explicit
//! envelopes around psi.
use lv_lab::grid::GridSpec;
use lv_lab::linearized_eigen::{build_psi_envelope, solve_divergent};
use lv_lab::wave_profiles::{solve_kpp_wave_normalized, Normalization};
use lv_lab::ModelParams;

fn main() -> lv_lab::Result<()> {
    let p = ModelParams::new(0.5, 0.5, 1.0, 1.0)?;
    let w = solve_kpp_wave_normalized(2.5, 1.0, 1.0, GridSpec::new(-60.0, 60.0, 2401)?, Normalization::TailUnit)?;
    let e = solve_divergent(&p, 2.5, 0.2, &w)?;
    let env = build_psi_envelope(2.5, 0.2, &p, &w)?;
    let viol = (0..e.grid.n)
        .map(|i| (e.psi[i] - env.upper[i]).max(env.lower[i] - e.psi[i]))
        .fold(f64::NEG_INFINITY, f64::max);
    println!("mu = {}, delta_v = {:.6}", e.mu, e.delta_v);
    println!("residuals: psi {:.2e}, phi {:.2e}", e.residual_psi, e.residual_phi);
    println!("envelope: D = {:.6}, lambda_tilde = {:.4}, violation {:.2e}", env.d, env.lambda_tilde, viol);
    println!("gauge floor max(|phi + a psi|, r|b phi + psi|) = {:.6}", e.gauge_floor(&p));
    e.write_csv(&std::env::temp_dir().join("lv_lab_eigen.csv"))
}
