//! Solve the KPP wave at c = 2.5 and compare its fitted decay rates with
//! the linear predictions.
use lv_lab::grid::GridSpec;
use lv_lab::wave_profiles::{kpp_left_rate, kpp_residual, kpp_tail_rate, solve_kpp_wave_normalized, Normalization};

fn main() -> lv_lab::Result<()> {
    let g = GridSpec::new(-60.0, 60.0, 2401)?;
    let w = solve_kpp_wave_normalized(2.5, 1.0, 1.0, g, Normalization::TailUnit)?;
    println!("residual {:.2e}", kpp_residual(&w));
    println!("tail rate {:.6} (predicted {:.6})", w.decay.tau, kpp_tail_rate(2.5, 1.0, 1.0));
    println!("left rate {:.6} (predicted {:.6})", w.decay.tau_tilde, kpp_left_rate(2.5, 1.0, 1.0));
    let out = std::env::temp_dir().join("lv_lab_kpp_wave.csv");
    w.write_csv(&out)?;
    println!("wrote {}", out.display());
    Ok(())
}
