//! Drive a scenario from a config string, as the command line does.
use lv_lab::runner::{run_speeds, run_spectrum, RunConfig};

const CONFIG: &str = r#"
scenario = "speeds-only"
params.a = 0.5
params.b = 0.5
wave.c = 2.5
wave.lambda = "auto"
"#;

fn main() -> lv_lab::Result<()> {
    let cfg = RunConfig::parse(CONFIG)?;
    let out = std::env::temp_dir().join("lv_lab_run_config");
    let rep = run_speeds(&cfg, &out)?;
    println!("c_v = {}", rep.manifest.get("c_v").unwrap_or("?"));
    let rep = run_spectrum(&cfg, &out)?;
    println!("{}", rep.manifest.get("real_axis").unwrap_or("?"));
    println!("outputs in {}", out.display());
    Ok(())
}
