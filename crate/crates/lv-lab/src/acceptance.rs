//! End-to-end acceptance criteria. Each check reports what it measured; the
//! long forward runs are shared between the criteria that read them.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::entire_solutions::{backward_construct, forward_extend, EntireRun, EntireSetup, TimeGauge, gauge_identity_check};
use crate::error::Result;
use crate::front_metrics::{decay_window, fit_decay_at, lock_shape, region_check, rightmost_crossing, track_level_set, Component};
use crate::grid::GridSpec;
use crate::linearized_eigen::{build_psi_envelope, max_forward_increase, solve_divergent, solve_variant_hat, solve_variant_weak};
use crate::rd_integrator::{integrate, k_leq, BcPair, IntegratorConfig, StatePair};
use crate::spectral_classifier::{classify_mu, polar_shoot, region_scan, Region};
use crate::speed_atlas::{limiting_lambda3, merging_constants, speed_table, ExternalSpeeds, ModelParams};
use crate::wave_profiles::{
    estimate_minimal_speed, solve_bistable_wave, solve_kpp_wave_normalized, Equilibrium, Normalization, SpeedBudget,
    WaveProfile,
};

pub const LADDER: [f64; 4] = [-4.0, -6.0, -8.0, -10.0];
pub const BACKWARD_DT: f64 = 1e-3;
pub const FORWARD_DT: f64 = 5e-4;
pub const FORWARD_T: f64 = 60.0;

#[derive(Debug, Clone)]
pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub measured: String,
    pub seconds: f64,
}

impl Criterion {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} {}: {} [{:.1}s]",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.seconds
        )
    }
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    ((x - target) / target).abs() <= rel
}

fn rel(x: f64, target: f64) -> f64 {
    (x - target) / target
}

pub fn p0() -> ModelParams {
    ModelParams::new(0.5, 0.5, 1.0, 1.0).expect("valid parameters")
}

pub fn frame_grid() -> GridSpec {
    GridSpec::new(-60.0, 60.0, 2401).expect("valid grid")
}

pub fn lab_grid() -> GridSpec {
    GridSpec::new(-450.0, 450.0, 18001).expect("valid grid")
}

fn phi(c: f64) -> Result<WaveProfile> {
    solve_kpp_wave_normalized(c, 1.0, 1.0, frame_grid(), Normalization::TailUnit)
}

fn timed<F: FnOnce() -> Result<(bool, String)>>(id: u32, name: &'static str, limit: f64, f: F) -> Criterion {
    let t0 = Instant::now();
    let out = f();
    let seconds = t0.elapsed().as_secs_f64();
    let (pass, measured) = match out {
        Ok((pass, m)) => (pass && seconds < limit, m),
        Err(e) => (false, format!("error: {e}")),
    };
    Criterion { id, name, pass, measured, seconds }
}

pub fn kpp_decay() -> Criterion {
    timed(1, "KPP wave decay", 10.0, || {
        let w = phi(2.5)?;
        let left = (10.25f64.sqrt() - 2.5) / 2.0;
        let (a, b) = (w.decay.tau, w.decay.tau_tilde);
        Ok((
            within(a, 0.5, 0.01) && within(b, left, 0.02),
            format!("tail rate {a:.6} ({:+.3}%), left rate {b:.6} ({:+.3}%)", 100.0 * rel(a, 0.5), 100.0 * rel(b, left)),
        ))
    })
}

pub fn eigen_sandwich() -> Criterion {
    timed(2, "eigenpair sandwich", 10.0, || {
        let p = p0();
        let w = phi(2.5)?;
        let e = solve_divergent(&p, 2.5, 0.2, &w)?;
        let env = build_psi_envelope(2.5, 0.2, &p, &w)?;
        let mut viol = f64::NEG_INFINITY;
        for i in 0..e.grid.n {
            viol = viol.max(e.psi[i] - env.upper[i]).max(env.lower[i] - e.psi[i]);
        }
        let res = e.residual_psi.max(e.residual_phi);
        let inc = max_forward_increase(&e.grid, &e.psi, e.delta_v);
        Ok((
            viol < 1e-8 && res < 1e-9 && inc <= 1e-12,
            format!("envelope violation {viol:.3e}, residual {res:.3e}, max increase of e^(-delta_v x) psi {inc:.3e}"),
        ))
    })
}

pub fn gauge_identities() -> Criterion {
    timed(3, "gauge identities", 1.0, || {
        let g = TimeGauge::new(0.54, 0.27, 1.0)?;
        let mut worst: f64 = 0.0;
        for k in 0..=20 {
            worst = worst.max(gauge_identity_check(&g, -(k as f64))?);
        }
        let t = -30.0 / g.mu;
        let dp = (g.p(t)? - g.mu * t).abs();
        let dq = (g.q(t) - g.mu * t).abs();
        Ok((
            worst < 1e-12 && dp < 1e-10 && dq < 1e-10,
            format!("identity {worst:.3e}, |p - mu t| {dp:.3e}, |q - mu t| {dq:.3e} at t = -30/mu"),
        ))
    })
}

pub fn comparison(seed: u64) -> Criterion {
    timed(4, "comparison principle", 300.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = GridSpec::new(-20.0, 20.0, 401)?;
        let mut worst = f64::NEG_INFINITY;
        let mut failures = 0;
        for _ in 0..200 {
            let p = ModelParams::new(rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0), rng.gen_range(0.2..3.0), rng.gen_range(0.2..3.0))?;
            let c = rng.gen_range(0.0..3.0);
            let n = grid.n;
            let au: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let av: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let bu: Vec<f64> = au.iter().map(|x| (x + rng.gen_range(0.0..0.3)).min(1.0)).collect();
            let bv: Vec<f64> = av.iter().map(|x| (x - rng.gen_range(0.0..0.3)).max(0.0)).collect();
            let a = StatePair::new(grid, au, av, c, 0.0);
            let b = StatePair::new(grid, bu, bv, c, 0.0);
            let cfg = IntegratorConfig::new(0.01, BcPair::neumann(), BcPair::neumann());
            let ts: Vec<f64> = (0..=10).map(|k| 0.5 * k as f64).collect();
            let ta = integrate(&a, &cfg, &p, 5.0, &ts)?;
            let tb = integrate(&b, &cfg, &p, 5.0, &ts)?;
            let mut w = f64::NEG_INFINITY;
            for (x, y) in ta.iter().zip(&tb) {
                w = w.max(k_leq(x, y, 1e-8)?.worst);
            }
            if w > 1e-8 {
                failures += 1;
            }
            worst = worst.max(w);
        }
        Ok((failures == 0, format!("200 pairs, {failures} broken, worst signed violation {worst:.3e}")))
    })
}

/// Backward construction of the divergent entire solution at the reference parameters.
pub fn divergent_run() -> Result<EntireRun> {
    let p = p0();
    let e = solve_divergent(&p, 2.5, 0.2, &phi(2.5)?)?;
    let s = EntireSetup::new(&p, e, None)?;
    backward_construct(&s, &LADDER, 0.0, BACKWARD_DT)
}

fn ladder_summary(run: &EntireRun) -> String {
    let h: Vec<String> = run.convergence_history.iter().map(|g| format!("{g:.2e}")).collect();
    format!("gaps [{}]", h.join(", "))
}

pub fn entire_sandwich(run: &Result<EntireRun>, seconds: f64) -> Criterion {
    let mut c = timed(5, "entire-solution sandwich and origin", 600.0 - seconds, || {
        let run = run.as_ref().map_err(|e| e.clone())?;
        let (dist, bound) = run.origin_distance(-10.0, 4.0, BACKWARD_DT)?;
        let ok = run.gap < 1e-5 && run.sandwich_worst < 1e-6 && dist < bound + 1e-6 && run.history_nonincreasing();
        Ok((
            ok,
            format!(
                "{}, final gap {:.3e} (< 1e-5), sandwich {:.3e}, distance at t=-10 {dist:.6e} vs bound {bound:.6e}",
                ladder_summary(run),
                run.gap,
                run.sandwich_worst
            ),
        ))
    });
    c.seconds += seconds;
    c
}

/// Front speeds entering the cone edges of the weak case.
pub fn weak_cone_speeds(p: &ModelParams) -> Result<(f64, f64)> {
    let budget = SpeedBudget::default();
    let c1 = estimate_minimal_speed(p, (Equilibrium::EStar, Equilibrium::E2), budget)?.speed;
    let c2 = estimate_minimal_speed(p, (Equilibrium::EStar, Equilibrium::E1), budget)?.speed;
    let t = speed_table(p, 2.5, 0.2, ExternalSpeeds { c1_star: Some(c1), c2_star: Some(c2), ..Default::default() })?;
    Ok((t.c_v_tilde.unwrap_or(f64::INFINITY), t.c_u1.unwrap_or(c1)))
}

fn crossing_tail(traj: &[StatePair], comp: Component) -> Vec<StatePair> {
    traj.iter()
        .filter(|s| rightmost_crossing(&s.grid, comp.of(s), 0.5).is_some())
        .cloned()
        .collect()
}

pub struct ForwardRun {
    pub traj: Vec<StatePair>,
    pub eps: f64,
    pub seconds: f64,
}

pub fn forward(run: &EntireRun) -> Result<ForwardRun> {
    let t0 = Instant::now();
    let traj = forward_extend(run, lab_grid(), FORWARD_T, FORWARD_DT, 1.0)?;
    Ok(ForwardRun { traj, eps: run.setup.gauge.eps, seconds: t0.elapsed().as_secs_f64() })
}

pub fn destiny_speeds(fw: &Result<ForwardRun>, base_seconds: f64) -> Criterion {
    let mut c = timed(6, "destiny speeds, weak case", 1800.0 - base_seconds, || {
        let fw = fw.as_ref().map_err(|e| e.clone())?;
        let p = p0();
        let tr = track_level_set(&crossing_tail(&fw.traj, Component::V), Component::V, 0.5)?;
        let (cvt, cu1) = weak_cone_speeds(&p)?;
        let inner = region_check(&fw.traj, (-cvt, cu1), p.e_star(), 0.3)?;
        let outer = region_check(&fw.traj, (5.2, f64::INFINITY), (0.0, 0.0), 0.3)?;
        let ok = within(tr.fitted_speed, 5.2, 0.02) && inner.deviation < 0.05 && outer.deviation < 0.05;
        let (t_worst, _) = inner
            .per_snapshot
            .iter()
            .cloned()
            .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        let last = inner.per_snapshot.last().map_or(f64::NAN, |x| x.1);
        Ok((
            ok,
            format!(
                "v speed {:.4} ({:+.2}%), cone (-{cvt:.3}+0.3, {cu1:.4}-0.3)t deviation {:.4} (worst at t={t_worst}, {last:.4} at t=60), beyond (5.2+0.3)t {:.2e}",
                tr.fitted_speed,
                100.0 * rel(tr.fitted_speed, 5.2),
                inner.deviation,
                outer.deviation
            ),
        ))
    });
    c.seconds += base_seconds;
    c
}

pub fn tail_and_lock(fw: &Result<ForwardRun>) -> Criterion {
    timed(7, "tail prefactor and shape lock", 1800.0, || {
        let fw = fw.as_ref().map_err(|e| e.clone())?;
        let (lambda, cv) = (0.2, 5.2);
        let last = fw.traj.last().expect("nonempty trajectory");
        let t = last.time;
        let win = decay_window(last, Component::V, 1e-8, 1e-2).ok_or(crate::error::LabError::NonPositiveValues)?;
        let fit = fit_decay_at(last, Component::V, win, cv * t)?;
        let psi = solve_kpp_wave_normalized(cv, 1.0, 1.0, GridSpec::new(-100.0, 100.0, 4001)?, Normalization::TailUnit)?;
        let (_, cu1) = weak_cone_speeds(&p0())?;
        let lab = last.grid;
        let lock = lock_shape(&fw.traj, Component::V, &psi, cv, Some((0.5 * (cu1 + cv) * t, lab.x_max - 5.0)))?;
        let h_expect = fw.eps.ln() / lambda;
        let ok = within(fit.prefactor, fw.eps, 0.05) && within(lock.fitted_shift, h_expect, 0.10);
        Ok((
            ok,
            format!(
                "plateau {:.5} vs eps {:.5} ({:+.2}%), tail rate {:.5}, lock shift {:.4} vs (1/lambda) ln eps = {h_expect:.4} ({:+.2}%), lock error {:.2e}",
                fit.prefactor,
                fw.eps,
                100.0 * rel(fit.prefactor, fw.eps),
                fit.rate,
                lock.fitted_shift,
                100.0 * rel(lock.fitted_shift, h_expect),
                lock.sup_error
            ),
        ))
    })
}

pub fn merging() -> Criterion {
    timed(8, "merging type", 1800.0, || {
        let p = ModelParams::new(0.5, 2.0, 1.0, 1.0)?;
        let (_, cu3) = merging_constants(&p, 3.0)?;
        let psi = solve_kpp_wave_normalized(3.0, 1.0, 1.0, frame_grid(), Normalization::TailUnit)?;
        let e = solve_variant_hat(&p, 3.0, &psi, psi.grid)?;
        let s = EntireSetup::new(&p, e, None)?;
        let run = backward_construct(&s, &LADDER, 0.0, BACKWARD_DT)?;
        let (dist, bound) = run.origin_distance(-10.0, 4.0, BACKWARD_DT)?;
        let traj = forward_extend(&run, lab_grid(), FORWARD_T, FORWARD_DT, 1.0)?;
        let tr = track_level_set(&crossing_tail(&traj, Component::U), Component::U, 0.5)?;
        let phi = solve_kpp_wave_normalized(cu3, 1.0, 1.0, GridSpec::new(-100.0, 100.0, 4001)?, Normalization::TailUnit)?;
        let t = FORWARD_T;
        let lock = lock_shape(&traj, Component::U, &phi, cu3, Some((0.5 * (3.0 + cu3) * t, lab_grid().x_max - 5.0)))?;
        let ok = within(tr.fitted_speed, 5.822876, 0.03) && lock.sup_error < 0.05 && dist < bound && run.sandwich_worst < 1e-6;
        Ok((
            ok,
            format!(
                "u speed {:.4} vs c_u3 {cu3:.6} ({:+.2}%), lock error {:.2e}, distance at t=-10 {dist:.6e} vs bound {bound:.6e}, sandwich {:.2e}, {}",
                tr.fitted_speed,
                100.0 * rel(tr.fitted_speed, 5.822876),
                lock.sup_error,
                run.sandwich_worst,
                ladder_summary(&run)
            ),
        ))
    })
}

pub fn bistable_symmetry() -> Criterion {
    timed(9, "bistable symmetric wave", 30.0, || {
        let p = ModelParams::new(2.0, 2.0, 1.0, 1.0)?;
        let w = solve_bistable_wave(&p, frame_grid())?;
        let defect = w.reflection_defect().unwrap_or(f64::INFINITY);
        Ok((
            w.speed.abs() < 1e-3 && defect < 1e-6,
            format!("C_uv {:.3e}, reflection defect {defect:.3e}", w.speed),
        ))
    })
}

pub fn fredholm_scan(seed: u64) -> Criterion {
    timed(10, "Fredholm scan and polar shooting", 30.0, || {
        let p = p0();
        let c = 2.5;
        let scan = region_scan(&p, c, (0.0, 1.5, 301), (0.0, 0.0, 1), None)?;
        let mut bad = 0;
        for v in &scan {
            let mu = v.mu.re;
            let expect = if (mu - 0.5).abs() < 1e-12 || (mu - 1.0).abs() < 1e-12 {
                (Region::OnBoundary, None)
            } else if mu < 0.5 {
                (Region::Omega2, Some(0))
            } else if mu < 1.0 {
                (Region::Omega3, Some(1))
            } else {
                (Region::Omega1, Some(0))
            };
            if v.region != expect.0 || expect.1.map_or(false, |k| k != v.index) {
                bad += 1;
            }
        }
        // the two transitions sit exactly at 0.5 and 1.0
        let sharp = [(0.5, Region::Omega2, Region::Omega3), (1.0, Region::Omega3, Region::Omega1)]
            .iter()
            .all(|&(m, lo, hi)| {
                classify_mu(&p, c, Complex64::new(m - 1e-9, 0.0)).region == lo
                    && classify_mu(&p, c, Complex64::new(m + 1e-9, 0.0)).region == hi
            });
        let w = phi(c)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let floor = (-0.2f64).atan();
        let mut min_margin = f64::INFINITY;
        let mut worst_angle: f64 = 0.0;
        for _ in 0..20 {
            let theta0 = rng.gen_range(floor + 1e-3..FRAC_PI_2 - 1e-3);
            let tr = polar_shoot(&p, c, 0.54, &w, theta0, -20.0)?;
            min_margin = min_margin.min(tr.min_margin);
            worst_angle = worst_angle.max(((tr.theta_limit - tr.theta_floor) / tr.theta_floor).abs());
        }
        Ok((
            bad == 0 && sharp && min_margin > -1e-9 && worst_angle < 0.01,
            format!(
                "{bad} misclassified of {}, transitions sharp: {sharp}, min angle margin {min_margin:.3e}, limit angle error {:.3}%",
                scan.len(),
                100.0 * worst_angle
            ),
        ))
    })
}

pub fn limiting() -> Criterion {
    timed(11, "limiting divergent type", 1800.0, || {
        let p = p0();
        let (l3, cv3) = limiting_lambda3(&p, 2.5)?;
        let w = phi(2.5)?;
        let e = solve_variant_weak(&p, 2.5, &w, w.grid)?;
        let mono = e.psi.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        let (mu, dv) = (e.mu, e.delta_v);
        let s = EntireSetup::new(&p, e, None)?;
        let run = backward_construct(&s, &LADDER, 0.0, BACKWARD_DT)?;
        let traj = forward_extend(&run, lab_grid(), FORWARD_T, FORWARD_DT, 1.0)?;
        let tr = track_level_set(&crossing_tail(&traj, Component::V), Component::V, 0.5)?;
        let ok = (mu - 0.5).abs() < 1e-12 && dv == 0.0 && mono <= 0.0 && within(tr.fitted_speed, cv3, 0.03) && run.sandwich_worst < 1e-6;
        Ok((
            ok,
            format!(
                "lambda_3 {l3:.6}, mu {mu}, delta_v {dv}, max psi increment {mono:.2e}, v speed {:.4} vs {cv3:.4} ({:+.2}%), sandwich {:.2e}, {}",
                tr.fitted_speed,
                100.0 * rel(tr.fitted_speed, cv3),
                run.sandwich_worst,
                ladder_summary(&run)
            ),
        ))
    })
}

/// Every criterion, in order.
pub fn run_all(seed: u64) -> Vec<Criterion> {
    let mut out = vec![kpp_decay(), eigen_sandwich(), gauge_identities(), comparison(seed)];
    let t0 = Instant::now();
    let run = divergent_run();
    let build = t0.elapsed().as_secs_f64();
    out.push(entire_sandwich(&run, build));
    let fw = match &run {
        Ok(r) => forward(r),
        Err(e) => Err(e.clone()),
    };
    let fw_seconds = build + fw.as_ref().map_or(0.0, |f| f.seconds);
    out.push(destiny_speeds(&fw, fw_seconds));
    out.push(tail_and_lock(&fw));
    out.push(merging());
    out.push(bistable_symmetry());
    out.push(fredholm_scan(seed));
    out.push(limiting());
    out
}
