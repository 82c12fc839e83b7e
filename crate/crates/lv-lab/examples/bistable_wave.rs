use lv_lab::grid::GridSpec;
use lv_lab::wave_profiles::solve_bistable_wave;
use lv_lab::ModelParams;

fn main() -> lv_lab::Result<()> {
    // a = b: the wave is standing and symmetric about the u = v crossing
    let p = ModelParams::new(2.0, 2.0, 1.0, 1.0)?;
    let w = solve_bistable_wave(&p, GridSpec::new(-60.0, 60.0, 2401)?)?;
    println!("C_uv = {:.3e}", w.speed);
    println!("reflection defect = {:.3e}", w.reflection_defect().unwrap_or(f64::NAN));

    let q = ModelParams::new(3.0, 2.0, 1.0, 1.0)?;
    let w = solve_bistable_wave(&q, GridSpec::new(-60.0, 60.0, 2401)?)?;
    println!("a = 3, b = 2: C_uv = {:.6}", w.speed);
    Ok(())
}
