//! Closed-form speeds and rates for the weak-competition reference case.
use lv_lab::speed_atlas::{limiting_lambda3, merging_constants, speed_table, ExternalSpeeds};
use lv_lab::ModelParams;

fn main() -> lv_lab::Result<()> {
    let p = ModelParams::new(0.5, 0.5, 1.0, 1.0)?;
    let t = speed_table(&p, 2.5, 0.2, ExternalSpeeds::default())?;
    println!("mu = {:.6}, c_v = {:.6}", t.mu, t.c_v);
    println!("tau_c = {:.6}, tau_tilde_c = {:.6}", t.tau_c, t.tau_tilde_c);
    println!("delta_v = {:.6}, lambda_acc = {:.6}, c_acc = {:?}", t.delta_v, t.lambda_acc, t.c_acc);

    let (l3, cv3) = limiting_lambda3(&p, 2.5)?;
    println!("limiting: lambda_3 = {l3:.6}, c_v3 = {cv3:.6}");

    let q = ModelParams::new(0.5, 2.0, 1.0, 1.0)?;
    let (l4, cu3) = merging_constants(&q, 3.0)?;
    println!("merging: lambda_4 = {l4:.6}, c_u3 = {cu3:.6}");
    Ok(())
}
