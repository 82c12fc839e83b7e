use lv_lab::spectral_classifier::{characteristic_roots, classify_mu, region_scan};
use lv_lab::ModelParams;
use num_complex::Complex64;

fn main() -> lv_lab::Result<()> {
    let p = ModelParams::new(0.5, 0.5, 1.0, 1.0)?;
    for mu in [0.2, 0.5, 0.54, 1.0, 1.5] {
        let v = classify_mu(&p, 2.5, Complex64::new(mu, 0.0));
        let r = characteristic_roots(&p, 2.5, Complex64::new(mu, 0.0));
        println!("mu = {mu}: {:?}, index {}, lambda_tilde = {:.4}", v.region, v.index, r.lambda_tilde.0);
    }
    // complex plane scan for plotting the boundary parabolas
    let out = std::env::temp_dir().join("lv_lab_fredholm.csv");
    let scan = region_scan(&p, 2.5, (-1.0, 2.0, 121), (-4.0, 4.0, 81), Some(&out))?;
    println!("{} points -> {}", scan.len(), out.display());
    Ok(())
}
