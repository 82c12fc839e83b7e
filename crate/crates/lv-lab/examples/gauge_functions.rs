use lv_lab::entire_solutions::{gauge_identity_check, TimeGauge};

fn main() -> lv_lab::Result<()> {
    let g = TimeGauge::new(0.54, 0.27, 1.0)?;
    println!("{:>6} {:>12} {:>12} {:>12} {:>10}", "t", "p", "q", "r", "identity");
    for t in [-20.0, -10.0, -5.0, -2.0, -1.0, 0.0] {
        println!(
            "{t:>6} {:>12.6} {:>12.6} {:>12.3e} {:>10.1e}",
            g.p(t)?,
            g.q(t),
            g.r_shift(t),
            gauge_identity_check(&g, t)?
        );
    }
    println!("e^q at t = 50: {:.6} (limit mu / eps M = 2)", g.q(50.0).exp());
    Ok(())
}
