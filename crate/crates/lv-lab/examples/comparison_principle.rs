//! Two K-ordered random states stay K-ordered under the integrator.
use lv_lab::grid::GridSpec;
use lv_lab::rd_integrator::{integrate, k_leq, BcPair, IntegratorConfig, StatePair};
use lv_lab::ModelParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> lv_lab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = ModelParams::new(0.5, 0.5, 1.0, 1.0)?;
    let g = GridSpec::new(-20.0, 20.0, 401)?;
    let au: Vec<f64> = (0..g.n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let av: Vec<f64> = (0..g.n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let bu: Vec<f64> = au.iter().map(|x| (x + 0.1).min(1.0)).collect();
    let bv: Vec<f64> = av.iter().map(|x| (x - 0.1).max(0.0)).collect();
    let a = StatePair::new(g, au, av, 0.0, 0.0);
    let b = StatePair::new(g, bu, bv, 0.0, 0.0);
    let cfg = IntegratorConfig::new(0.01, BcPair::neumann(), BcPair::neumann());
    let ts = [1.0, 2.0, 3.0, 4.0, 5.0];
    let ta = integrate(&a, &cfg, &p, 5.0, &ts)?;
    let tb = integrate(&b, &cfg, &p, 5.0, &ts)?;
    for (x, y) in ta.iter().zip(&tb) {
        let k = k_leq(x, y, 1e-8)?;
        println!("t = {}: ordered {}, worst {:.2e}", x.time, k.holds, k.worst);
    }
    Ok(())
}
