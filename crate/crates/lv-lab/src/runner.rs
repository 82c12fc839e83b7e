//! Run configuration and the scenario pipelines behind the command line.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use crate::acceptance::{self, Criterion};
use crate::entire_solutions::{
    backward_construct, bistable_envelope_eval, fit_bistable_envelope, forward_extend, forward_super_check, EntireRun,
    EntireSetup,
};
use crate::error::{LabError, Result};
use crate::front_metrics::{region_check, rightmost_crossing, track_level_set, Component};
use crate::grid::GridSpec;
use crate::io::{fmt_num, write_columns, Manifest};
use crate::linearized_eigen::{solve_divergent, solve_variant_hat, solve_variant_weak, EigenKind, EigenPair};
use crate::rd_integrator::{integrate, BcPair, IntegratorConfig, StatePair};
use crate::spectral_classifier::{classify_mu, polar_shoot, region_scan, Region};
use crate::speed_atlas::{
    admissible_lambda_upper, classify_regime, limiting_lambda3, merging_constants, speed_table, ExternalSpeeds,
    ModelParams, Regime,
};
use crate::wave_profiles::{
    estimate_minimal_speed, solve_bistable_wave, solve_kpp_wave_normalized, Equilibrium, Normalization, SpeedBudget,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Divergent,
    Limiting,
    Merging,
    BistableEnvelope,
    SpeedsOnly,
    SpectrumScan,
    WaveOnly,
    EigenOnly,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Value(f64),
    Word(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsCfg {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub r: f64,
}

impl Default for ParamsCfg {
    fn default() -> Self {
        ParamsCfg { a: 0.5, b: 0.5, d: 1.0, r: 1.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveCfg {
    pub c: f64,
    pub lambda: LambdaSpec,
    /// Speed of the `v` wave in the merging construction.
    pub c_v: f64,
}

impl Default for WaveCfg {
    fn default() -> Self {
        WaveCfg { c: 2.5, lambda: LambdaSpec::Value(0.2), c_v: 3.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridCfg {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Default for GridCfg {
    fn default() -> Self {
        GridCfg { x_min: -60.0, x_max: 60.0, n: 2401 }
    }
}

impl GridCfg {
    pub fn spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.x_min, self.x_max, self.n)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackwardCfg {
    pub starts: Vec<f64>,
    pub t_end: f64,
    pub dt: f64,
    /// `None` means `eps = 0.5 mu / M`.
    pub eps: Option<f64>,
}

impl Default for BackwardCfg {
    fn default() -> Self {
        BackwardCfg { starts: acceptance::LADDER.to_vec(), t_end: 0.0, dt: acceptance::BACKWARD_DT, eps: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForwardCfg {
    pub t_end: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub dt: f64,
    pub every: f64,
}

impl Default for ForwardCfg {
    fn default() -> Self {
        ForwardCfg { t_end: 60.0, x_min: -450.0, x_max: 450.0, n: 18001, dt: acceptance::FORWARD_DT, every: 1.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumCfg {
    pub re: (f64, f64, usize),
    pub im: (f64, f64, usize),
    pub mu: f64,
    pub theta0: f64,
    pub xi0: f64,
}

impl Default for SpectrumCfg {
    fn default() -> Self {
        SpectrumCfg { re: (0.0, 1.5, 301), im: (0.0, 0.0, 1), mu: 0.54, theta0: 1.0, xi0: -20.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub params: ParamsCfg,
    pub wave: WaveCfg,
    pub grid: GridCfg,
    pub backward: BackwardCfg,
    pub forward: ForwardCfg,
    pub spectrum: SpectrumCfg,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: Scenario::Divergent,
            seed: 42,
            params: ParamsCfg::default(),
            wave: WaveCfg::default(),
            grid: GridCfg::default(),
            backward: BackwardCfg::default(),
            forward: ForwardCfg::default(),
            spectrum: SpectrumCfg::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn model(&self) -> Result<ModelParams> {
        let p = &self.params;
        ModelParams::new(p.a, p.b, p.d, p.r)
    }

    /// `lambda = "auto"` picks the midpoint of the admissible interval.
    pub fn lambda(&self, p: &ModelParams) -> Result<f64> {
        match &self.wave.lambda {
            LambdaSpec::Value(l) => Ok(*l),
            LambdaSpec::Word(w) if w == "auto" => Ok(0.5 * admissible_lambda_upper(p, self.wave.c)?),
            LambdaSpec::Word(w) => Err(LabError::Config(format!("lambda must be a number or \"auto\", got {w:?}"))),
        }
    }

    /// Regime and admissibility checks for the chosen scenario, before any
    /// computation.
    pub fn validate(&self) -> Result<ModelParams> {
        let p = self.model()?;
        let regime = classify_regime(&p)?;
        match self.scenario {
            Scenario::Divergent | Scenario::EigenOnly => {
                let l = self.lambda(&p)?;
                let up = admissible_lambda_upper(&p, self.wave.c)?;
                if !(l > 0.0 && l < up) {
                    return Err(LabError::NotAdmissible(format!("lambda = {l} outside (0, {up})")));
                }
            }
            Scenario::Limiting => {
                limiting_lambda3(&p, self.wave.c)?;
            }
            Scenario::Merging => {
                merging_constants(&p, self.wave.c_v)?;
            }
            Scenario::BistableEnvelope => {
                if regime != Regime::Bistable {
                    return Err(LabError::WrongRegime("bistable-envelope needs a > 1 and b > 1".into()));
                }
            }
            _ => {}
        }
        Ok(p)
    }
}

/// Outcome of one pipeline: the manifest and the first failed stage, if any.
#[derive(Debug, Clone)]
pub struct Report {
    pub manifest: Manifest,
    pub failed_stage: Option<String>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.failed_stage.is_none() && self.manifest.all_pass()
    }
}

struct Stages {
    m: Manifest,
}

impl Stages {
    fn stage<T>(&mut self, name: &str, r: Result<T>) -> std::result::Result<T, String> {
        match r {
            Ok(v) => {
                self.m.put(format!("stage.{name}"), "ok");
                Ok(v)
            }
            Err(e) => {
                let variant = format!("{e:?}");
                let variant = variant.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("").to_string();
                self.m.put(format!("stage.{name}"), format!("failed {variant}: {e}"));
                Err(format!("stage {name} failed: {variant}: {e}"))
            }
        }
    }
}

fn finish(mut st: Stages, out: &Path, r: std::result::Result<(), String>) -> Result<Report> {
    let failed_stage = r.err();
    if let Some(f) = &failed_stage {
        st.m.put("error", f);
    }
    st.m.write(&out.join("manifest.txt"))?;
    Ok(Report { manifest: st.m, failed_stage })
}

fn header(m: &mut Manifest, cfg: &RunConfig, command: &str) {
    m.put("command", command);
    m.put("scenario", format!("{:?}", cfg.scenario));
    m.put("seed", cfg.seed);
    let p = &cfg.params;
    m.num("params.a", p.a);
    m.num("params.b", p.b);
    m.num("params.d", p.d);
    m.num("params.r", p.r);
    m.num("wave.c", cfg.wave.c);
}

fn prepare(cfg: &RunConfig, out: &Path, command: &str) -> Result<Stages> {
    fs::create_dir_all(out)?;
    let mut m = Manifest::default();
    header(&mut m, cfg, command);
    Ok(Stages { m })
}

pub fn run_speeds(cfg: &RunConfig, out: &Path) -> Result<Report> {
    let mut st = prepare(cfg, out, "speeds")?;
    let r = (|| {
        let p = st.stage("config", cfg.model())?;
        let lambda = st.stage("lambda", cfg.lambda(&p))?;
        let mut ext = ExternalSpeeds::default();
        if st.stage("regime", classify_regime(&p))? == Regime::WeakCompetition {
            let budget = SpeedBudget::default();
            ext.c1_star = Some(st.stage("c1_star", estimate_minimal_speed(&p, (Equilibrium::EStar, Equilibrium::E2), budget))?.speed);
            ext.c2_star = Some(st.stage("c2_star", estimate_minimal_speed(&p, (Equilibrium::EStar, Equilibrium::E1), budget))?.speed);
        }
        let t = st.stage("speed_table", speed_table(&p, cfg.wave.c, lambda, ext))?;
        let m = &mut st.m;
        let opt = |x: Option<f64>| x.unwrap_or(f64::NAN);
        let rows: [(&str, f64); 12] = [
            ("lambda", t.lambda),
            ("mu", t.mu),
            ("c_v", t.c_v),
            ("tau_c", t.tau_c),
            ("tau_tilde_c", t.tau_tilde_c),
            ("delta_v", t.delta_v),
            ("lambda_acc", t.lambda_acc),
            ("c_acc", opt(t.c_acc)),
            ("lambda_tilde", opt(t.lambda_tilde)),
            ("c_v_tilde", opt(t.c_v_tilde)),
            ("c_u1", opt(t.c_u1)),
            ("c_u2", opt(t.c_u2)),
        ];
        for (k, v) in rows {
            m.num(k, v);
        }
        let names: Vec<&str> = rows.iter().map(|r| r.0).collect();
        let vals: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.1]).collect();
        let cols: Vec<&[f64]> = vals.iter().map(|v| v.as_slice()).collect();
        st.stage("write", write_columns(&out.join("speeds.csv"), &[], &names, &cols))?;
        Ok(())
    })();
    finish(st, out, r)
}

pub fn run_wave(cfg: &RunConfig, out: &Path) -> Result<Report> {
    let mut st = prepare(cfg, out, "wave")?;
    let r = (|| {
        let p = st.stage("config", cfg.model())?;
        let grid = st.stage("grid", cfg.grid.spec())?;
        let c = cfg.wave.c;
        let w = st.stage("kpp_wave", solve_kpp_wave_normalized(c, 1.0, 1.0, grid, Normalization::TailUnit))?;
        st.stage("write", w.write_csv(&out.join("wave.csv")))?;
        let tau = crate::wave_profiles::kpp_tail_rate(c, 1.0, 1.0);
        let left = crate::wave_profiles::kpp_left_rate(c, 1.0, 1.0);
        let m = &mut st.m;
        m.num("tau_fit", w.decay.tau);
        m.num("tau_tilde_fit", w.decay.tau_tilde);
        m.check("tail_rate", ((w.decay.tau - tau) / tau).abs() < 0.01, &fmt_num(w.decay.tau), "right tail rate");
        m.check("left_rate", ((w.decay.tau_tilde - left) / left).abs() < 0.02, &fmt_num(w.decay.tau_tilde), "left approach rate");
        if classify_regime(&p).ok() == Some(Regime::Bistable) {
            let sw = st.stage("bistable_wave", solve_bistable_wave(&p, grid))?;
            st.stage("write", sw.write_csv(&out.join("bistable_wave.csv")))?;
            st.m.num("c_uv", sw.speed);
            st.m.num("bistable_residual", sw.residual);
        }
        Ok(())
    })();
    finish(st, out, r)
}

fn eigen_for(cfg: &RunConfig, p: &ModelParams, kind: EigenKind) -> Result<EigenPair> {
    let grid = cfg.grid.spec()?;
    match kind {
        EigenKind::Divergent => {
            let w = solve_kpp_wave_normalized(cfg.wave.c, 1.0, 1.0, grid, Normalization::TailUnit)?;
            solve_divergent(p, cfg.wave.c, cfg.lambda(p)?, &w)
        }
        EigenKind::Limiting => {
            let w = solve_kpp_wave_normalized(cfg.wave.c, 1.0, 1.0, grid, Normalization::TailUnit)?;
            solve_variant_weak(p, cfg.wave.c, &w, w.grid)
        }
        EigenKind::Merging => {
            let w = solve_kpp_wave_normalized(cfg.wave.c_v, p.d, p.r, grid, Normalization::TailUnit)?;
            solve_variant_hat(p, cfg.wave.c_v, &w, w.grid)
        }
    }
}

fn kind_of(s: Scenario) -> EigenKind {
    match s {
        Scenario::Limiting => EigenKind::Limiting,
        Scenario::Merging => EigenKind::Merging,
        _ => EigenKind::Divergent,
    }
}

pub fn run_eigen(cfg: &RunConfig, out: &Path) -> Result<Report> {
    let mut st = prepare(cfg, out, "eigen")?;
    let r = (|| {
        let p = st.stage("config", cfg.validate())?;
        let e = st.stage("eigenpair", eigen_for(cfg, &p, kind_of(cfg.scenario)))?;
        st.stage("write", e.write_csv(&out.join("eigen.csv")))?;
        let m = &mut st.m;
        m.put("kind", format!("{:?}", e.kind));
        m.num("mu", e.mu);
        m.num("lambda", e.lambda);
        m.num("delta_v", e.delta_v);
        m.num("gauge_floor", e.gauge_floor(&p));
        m.check("residual_psi", e.residual_psi < 1e-9, &fmt_num(e.residual_psi), "eigen equation residual");
        m.check("residual_phi", e.residual_phi < 1e-9, &fmt_num(e.residual_phi), "eigen equation residual");
        Ok(())
    })();
    finish(st, out, r)
}

pub fn run_spectrum(cfg: &RunConfig, out: &Path) -> Result<Report> {
    let mut st = prepare(cfg, out, "spectrum")?;
    let r = (|| {
        let p = st.stage("config", cfg.model())?;
        let c = cfg.wave.c;
        let s = &cfg.spectrum;
        let scan = st.stage("scan", region_scan(&p, c, s.re, s.im, Some(&out.join("spectrum.csv"))))?;
        // region string along the real axis
        let mut parts: Vec<String> = Vec::new();
        let mut last: Option<Region> = None;
        for v in scan.iter().filter(|v| v.mu.im == 0.0) {
            if v.region == Region::OnBoundary {
                parts.push(format!("boundary at {}", v.mu.re));
                last = None;
                continue;
            }
            if last != Some(v.region) {
                parts.push(format!("{:?} from {}", v.region, v.mu.re));
                last = Some(v.region);
            }
        }
        st.m.put("real_axis", parts.join("; "));
        let ref_mu = [0.2, 0.54, 1.5];
        for mu in ref_mu {
            let v = classify_mu(&p, c, Complex64::new(mu, 0.0));
            st.m.put(format!("verdict.{mu}"), format!("{:?} i_plus={} i_minus={} index={}", v.region, v.i_plus, v.i_minus, v.index));
        }
        let grid = st.stage("grid", cfg.grid.spec())?;
        let w = st.stage("kpp_wave", solve_kpp_wave_normalized(c, 1.0, 1.0, grid, Normalization::TailUnit))?;
        let tr = st.stage("polar", polar_shoot(&p, c, s.mu, &w, s.theta0, s.xi0))?;
        st.stage("write", tr.write_csv(&out.join("polar.csv")))?;
        let err = ((tr.theta_limit - tr.theta_floor) / tr.theta_floor).abs();
        st.m.check("polar_invariance", tr.min_margin > -1e-9, &fmt_num(tr.min_margin), "angle interval invariance");
        st.m.check("polar_limit", err < 0.01, &fmt_num(tr.theta_limit), "tail angle arctan(lambda_plus)");
        Ok(())
    })();
    finish(st, out, r)
}

fn build_entire(st: &mut Stages, cfg: &RunConfig, p: &ModelParams) -> std::result::Result<EntireRun, String> {
    let e = st.stage("eigenpair", eigen_for(cfg, p, kind_of(cfg.scenario)))?;
    let setup = st.stage("setup", EntireSetup::new(p, e, cfg.backward.eps))?;
    let b = &cfg.backward;
    let run = st.stage("backward", backward_construct(&setup, &b.starts, b.t_end, b.dt))?;
    let m = &mut st.m;
    m.num("gauge.mu", run.setup.gauge.mu);
    m.num("gauge.eps", run.setup.gauge.eps);
    m.num("gauge.M", run.setup.gauge.m);
    for (t, g) in b.starts.iter().zip(&run.convergence_history) {
        m.num(format!("gap.{t}"), *g);
    }
    m.check("converged", run.converged, &fmt_num(run.gap), "upper/lower gap < 1e-5");
    m.check("chain", run.chain_worst <= 1e-7, &fmt_num(run.chain_worst), "monotone backward chain");
    m.check("sandwich", run.sandwich_worst < 1e-6, &fmt_num(run.sandwich_worst), "sub <=_K solution <=_K super");
    m.check("gaps_nonincreasing", run.history_nonincreasing(), "", "monotone ladder");
    Ok(run)
}

pub fn run_entire(cfg: &RunConfig, out: &Path) -> Result<Report> {
    let mut st = prepare(cfg, out, "entire")?;
    let r = (|| {
        let p = st.stage("config", cfg.validate())?;
        let run = build_entire(&mut st, cfg, &p)?;
        let t_probe = cfg.backward.starts.last().copied().unwrap_or(-10.0);
        let (dist, bound) = st.stage("origin", run.origin_distance(t_probe, 4.0, cfg.backward.dt))?;
        st.m.check("origin", dist < bound + 1e-6, &format!("{} bound {}", fmt_num(dist), fmt_num(bound)), "distance to base state");
        let fsup = st.stage("forward_super", forward_super_check(&run, 5.0, cfg.backward.dt))?;
        st.m.check("forward_super", fsup <= 1e-8, &fmt_num(fsup), "super-solution bound for t in [0, 5]");
        st.stage("write", run.write_dir(out))?;
        Ok(())
    })();
    finish(st, out, r)
}

fn write_track(path: &Path, times: &[f64], xs: &[f64]) -> Result<()> {
    write_columns(path, &[], &["t", "position"], &[times, xs])
}

pub fn run_simulate(cfg: &RunConfig, out: &Path) -> Result<Report> {
    if cfg.scenario == Scenario::BistableEnvelope {
        return run_bistable_envelope(cfg, out);
    }
    let mut st = prepare(cfg, out, "simulate")?;
    let r = (|| {
        let p = st.stage("config", cfg.validate())?;
        let run = build_entire(&mut st, cfg, &p)?;
        let f = &cfg.forward;
        let lab = st.stage("grid", GridSpec::new(f.x_min, f.x_max, f.n))?;
        let traj = st.stage("forward", forward_extend(&run, lab, f.t_end, f.dt, f.every))?;
        let last = traj.last().expect("nonempty trajectory");
        st.stage("write", last.write_csv(&out.join("final_state.csv")))?;
        for comp in [Component::U, Component::V] {
            let tail: Vec<StatePair> = traj
                .iter()
                .filter(|s| rightmost_crossing(&s.grid, comp.of(s), 0.5).is_some())
                .cloned()
                .collect();
            let name = if comp == Component::U { "u" } else { "v" };
            if let Ok(tr) = track_level_set(&tail, comp, 0.5) {
                st.m.num(format!("front.{name}.speed"), tr.fitted_speed);
                st.stage("write", write_track(&out.join(format!("front_{name}.csv")), &tr.times, &tr.positions))?;
            }
        }
        if run.setup.kind != EigenKind::Merging {
            let t = st.stage("speeds", speed_table(&p, cfg.wave.c, run.setup.eig.lambda, ExternalSpeeds::default()))?;
            st.m.num("predicted.c_v", t.c_v);
        } else {
            let (_, cu3) = st.stage("speeds", merging_constants(&p, cfg.wave.c_v))?;
            st.m.num("predicted.c_u3", cu3);
        }
        if classify_regime(&p).ok() == Some(Regime::WeakCompetition) {
            if let Ok(v) = region_check(&traj, (f64::NEG_INFINITY, f64::INFINITY), p.e_star(), 0.0) {
                st.m.num("region.whole_domain_deviation", v.deviation);
            }
        }
        Ok(())
    })();
    finish(st, out, r)
}

/// Case-(2) diagnostic: a perturbed translate of the bistable wave, run
/// forward and wrapped by the decaying envelope.
pub fn run_bistable_envelope(cfg: &RunConfig, out: &Path) -> Result<Report> {
    let mut st = prepare(cfg, out, "simulate")?;
    let r = (|| {
        let p = st.stage("config", cfg.validate())?;
        let grid = st.stage("grid", cfg.grid.spec())?;
        let w = st.stage("bistable_wave", solve_bistable_wave(&p, grid))?;
        let w = st.stage("reflect", w.reflect())?;
        st.m.num("c_uv", w.speed);
        let shift = 0.0;
        let lab = grid;
        let init = StatePair::new(
            lab,
            lab.nodes().iter().map(|x| (w.u_profile.at_clamped(x + 30.0) - 0.1).max(0.0)).collect(),
            lab.nodes().iter().map(|x| (w.v_profile.at_clamped(x + 30.0) + 0.1).min(1.0)).collect(),
            0.0,
            0.0,
        );
        let cfg_i = IntegratorConfig::new(cfg.backward.dt.max(1e-3), BcPair::neumann(), BcPair::neumann());
        let t_end = cfg.forward.t_end.min(40.0);
        let ts: Vec<f64> = (0..=(t_end as usize)).map(|k| k as f64).collect();
        let traj = st.stage("forward", integrate(&init, &cfg_i, &p, t_end, &ts))?;
        let (env, worst) = st.stage("envelope_fit", fit_bistable_envelope(&p, &w, &traj, shift))?;
        let m = &mut st.m;
        m.num("envelope.delta1", env.delta1);
        m.num("envelope.p0", env.p0);
        m.num("envelope.q0", env.q0);
        m.num("envelope.xi0", env.xi0);
        let last = traj.last().expect("nonempty trajectory");
        let e = st.stage("envelope_eval", bistable_envelope_eval(&p, &env, last.time, lab))?;
        st.stage("write", last.write_csv(&out.join("final_state.csv")))?;
        st.stage("write", e.write_csv(&out.join("envelope_final.csv")))?;
        st.m.check("envelope_order", worst <= 1e-9, &fmt_num(worst), "trajectory <=_K envelope on the window");
        Ok(())
    })();
    finish(st, out, r)
}

/// Which acceptance checks `verify` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// The criteria that finish in seconds.
    Quick,
    Acceptance,
}

pub fn run_verify(cfg: &RunConfig, suite: Suite, out: &Path) -> Result<(Report, Vec<Criterion>)> {
    let mut st = prepare(cfg, out, "verify")?;
    let crit = match suite {
        Suite::Acceptance => acceptance::run_all(cfg.seed),
        Suite::Quick => vec![
            acceptance::kpp_decay(),
            acceptance::eigen_sandwich(),
            acceptance::gauge_identities(),
            acceptance::comparison(cfg.seed),
            acceptance::bistable_symmetry(),
            acceptance::fredholm_scan(cfg.seed),
        ],
    };
    for c in &crit {
        st.m.check(&format!("criterion_{}", c.id), c.pass, &format!("{:?}", c.measured), c.name);
    }
    let ids: Vec<f64> = crit.iter().map(|c| c.id as f64).collect();
    let pass: Vec<f64> = crit.iter().map(|c| if c.pass { 1.0 } else { 0.0 }).collect();
    let secs: Vec<f64> = crit.iter().map(|c| c.seconds).collect();
    write_columns(&out.join("acceptance.csv"), &[], &["criterion", "pass", "seconds"], &[&ids, &pass, &secs])?;
    let rep = finish(st, out, Ok(()))?;
    Ok((rep, crit))
}

/// Default output directory for a command.
pub fn default_out(command: &str) -> PathBuf {
    PathBuf::from("lv-lab-out").join(command)
}
