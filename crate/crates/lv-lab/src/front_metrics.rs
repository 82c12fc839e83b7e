//! Observables of simulated fronts: level-set positions and speeds, tail
//! fits, cone-wise distances to equilibria and shape locking.

use crate::error::{LabError, Result};
use crate::grid::GridSpec;
use crate::rd_integrator::StatePair;
use crate::stats::fit_line;
use crate::wave_profiles::WaveProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    U,
    V,
}

impl Component {
    pub fn of<'a>(&self, s: &'a StatePair) -> &'a [f64] {
        match self {
            Component::U => &s.u,
            Component::V => &s.v,
        }
    }
}

/// Rightmost point where the piecewise-linear interpolant crosses `level`.
pub fn rightmost_crossing(grid: &GridSpec, values: &[f64], level: f64) -> Option<f64> {
    let n = values.len();
    for i in (0..n - 1).rev() {
        let (a, b) = (values[i] - level, values[i + 1] - level);
        if a == 0.0 {
            return Some(grid.x(i));
        }
        if a * b < 0.0 || b == 0.0 {
            let w = a / (a - b);
            return Some(grid.x(i) + w * grid.h());
        }
    }
    None
}

/// Lab-frame coordinate of node `i` of a snapshot.
pub fn lab_x(s: &StatePair, i: usize) -> f64 {
    s.grid.x(i) + s.frame_speed * s.time
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontTrack {
    pub component: Component,
    pub level: f64,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub fitted_speed: f64,
    pub fit_window: (f64, f64),
    pub residual: f64,
}

pub fn track_level_set(traj: &[StatePair], component: Component, level: f64) -> Result<FrontTrack> {
    if traj.len() < 4 {
        return Err(LabError::DomainError("need at least 4 snapshots".into()));
    }
    let mut times = Vec::with_capacity(traj.len());
    let mut positions = Vec::with_capacity(traj.len());
    for s in traj {
        let x = rightmost_crossing(&s.grid, component.of(s), level)
            .ok_or(LabError::LevelNotCrossed { level, t: s.time })?;
        times.push(s.time);
        positions.push(x + s.frame_speed * s.time);
    }
    let k = times.len() / 2;
    let fit = fit_line(&times[k..], &positions[k..])
        .ok_or_else(|| LabError::DomainError("degenerate time window".into()))?;
    let residual = (k..times.len())
        .map(|i| (positions[i] - fit.intercept - fit.slope * times[i]).abs())
        .fold(0.0, f64::max);
    Ok(FrontTrack {
        component,
        level,
        fit_window: (times[k], times[times.len() - 1]),
        times,
        positions,
        fitted_speed: fit.slope,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    /// Amplitude at coordinate zero: `values ~ prefactor * e^{-rate y}`.
    pub prefactor: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
}

/// Fit on the state's own coordinate.
pub fn fit_decay(s: &StatePair, component: Component, window: (f64, f64)) -> Result<DecayFit> {
    fit_decay_at(s, component, window, 0.0)
}

/// Fit in the coordinate `y = x - origin` (`x` the state's grid coordinate).
pub fn fit_decay_at(s: &StatePair, component: Component, window: (f64, f64), origin: f64) -> Result<DecayFit> {
    let vals = component.of(s);
    let mut ys = Vec::new();
    let mut ls = Vec::new();
    for i in 0..s.grid.n {
        let x = s.grid.x(i);
        if x < window.0 || x > window.1 {
            continue;
        }
        if !(vals[i] > 0.0) {
            return Err(LabError::NonPositiveValues);
        }
        ys.push(x - origin);
        ls.push(vals[i].ln());
    }
    let f = fit_line(&ys, &ls).ok_or(LabError::NonPositiveValues)?;
    Ok(DecayFit {
        rate: -f.slope,
        prefactor: f.intercept.exp(),
        window,
        r_squared: f.r_squared,
    })
}

/// Widest interval of the right tail where the component lies in `[lo, hi]`.
pub fn decay_window(s: &StatePair, component: Component, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let vals = component.of(s);
    let mut right = None;
    let mut left = None;
    for i in (0..s.grid.n).rev() {
        let v = vals[i];
        if right.is_none() {
            if v >= lo && v <= hi {
                right = Some(s.grid.x(i));
                left = Some(s.grid.x(i));
            }
            continue;
        }
        if v >= lo && v <= hi {
            left = Some(s.grid.x(i));
        } else {
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) if r > l => Some((l, r)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionVerdict {
    pub cone: (f64, f64),
    pub target: (f64, f64),
    pub deviation: f64,
    /// `(t, sup deviation)` per tail snapshot.
    pub per_snapshot: Vec<(f64, f64)>,
}

/// Sup of `|u - u_T| + |v - v_T|` over `(s1 + margin) t <= x <= (s2 - margin) t`
/// for snapshots in the last quarter of the time span. Infinite speeds stand
/// for the domain edge minus a 5-unit buffer.
pub fn region_check(
    traj: &[StatePair],
    speeds: (f64, f64),
    target: (f64, f64),
    margin: f64,
) -> Result<RegionVerdict> {
    if traj.is_empty() {
        return Err(LabError::EmptyCone);
    }
    let t0 = traj[0].time;
    let t1 = traj[traj.len() - 1].time;
    let tq = t0 + 0.75 * (t1 - t0);
    let mut per = Vec::new();
    let mut worst: f64 = 0.0;
    for s in traj.iter().filter(|s| s.time >= tq - 1e-12) {
        let lo_edge = lab_x(s, 0) + 5.0;
        let hi_edge = lab_x(s, s.grid.n - 1) - 5.0;
        let lo = if speeds.0.is_finite() { ((speeds.0 + margin) * s.time).max(lo_edge) } else { lo_edge };
        let hi = if speeds.1.is_finite() { ((speeds.1 - margin) * s.time).min(hi_edge) } else { hi_edge };
        let mut dev: f64 = 0.0;
        let mut any = false;
        for i in 0..s.grid.n {
            let x = lab_x(s, i);
            if x >= lo && x <= hi {
                any = true;
                dev = dev.max((s.u[i] - target.0).abs() + (s.v[i] - target.1).abs());
            }
        }
        if !any {
            return Err(LabError::EmptyCone);
        }
        per.push((s.time, dev));
        worst = worst.max(dev);
    }
    if per.is_empty() {
        return Err(LabError::EmptyCone);
    }
    Ok(RegionVerdict {
        cone: (speeds.0 + margin, speeds.1 - margin),
        target,
        deviation: worst,
        per_snapshot: per,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeLock {
    pub reference: WaveProfile,
    pub fitted_shift: f64,
    pub sup_error: f64,
}

/// Sup error between the component and `reference(x - speed t - h)` over a
/// lab-frame window (whole snapshot when `None`).
pub fn lock_error(s: &StatePair, component: Component, reference: &WaveProfile, speed: f64, h: f64, window: Option<(f64, f64)>) -> f64 {
    let vals = component.of(s);
    let mut e: f64 = 0.0;
    for i in 0..s.grid.n {
        let x = lab_x(s, i);
        if let Some((a, b)) = window {
            if x < a || x > b {
                continue;
            }
        }
        e = e.max((vals[i] - reference.at_extended(x - speed * s.time - h)).abs());
    }
    e
}

/// Shift minimizing the sup error at the final snapshot.
pub fn lock_shape(
    traj: &[StatePair],
    component: Component,
    reference: &WaveProfile,
    speed: f64,
    window: Option<(f64, f64)>,
) -> Result<ShapeLock> {
    let s = traj.last().ok_or(LabError::EmptyCone)?;
    let vals = component.of(s);
    let ref_half = rightmost_crossing(&reference.grid, &reference.values, 0.5)
        .ok_or(LabError::LevelNotCrossed { level: 0.5, t: 0.0 })?;
    let sol_half = rightmost_crossing(&s.grid, vals, 0.5)
        .ok_or(LabError::LevelNotCrossed { level: 0.5, t: s.time })?
        + s.frame_speed * s.time;
    let h0 = sol_half - speed * s.time - ref_half;
    let f = |h: f64| lock_error(s, component, reference, speed, h, window);
    // coarse scan then golden section
    let mut best = (h0, f(h0));
    let mut k = -40;
    while k <= 40 {
        let h = h0 + 0.1 * k as f64;
        let e = f(h);
        if e < best.1 {
            best = (h, e);
        }
        k += 1;
    }
    let (mut a, mut b) = (best.0 - 0.1, best.0 + 0.1);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let h = 0.5 * (a + b);
    let e = f(h);
    let (h, e) = if e <= best.1 { (h, e) } else { best };
    if e > 0.1 {
        return Err(LabError::PoorLock(e));
    }
    Ok(ShapeLock {
        reference: reference.clone(),
        fitted_shift: h,
        sup_error: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave_profiles::solve_kpp_wave;

    fn wave() -> WaveProfile {
        solve_kpp_wave(2.5, 1.0, 1.0, GridSpec::new(-60.0, 60.0, 2401).unwrap()).unwrap()
    }

    fn translate(w: &WaveProfile, s: f64, t: f64, grid: GridSpec) -> StatePair {
        let u: Vec<f64> = grid.nodes().iter().map(|x| w.at_extended(x - s * t)).collect();
        StatePair::new(grid, u, vec![0.0; grid.n], 0.0, t)
    }

    #[test]
    fn exact_translate_speed() {
        let w = wave();
        let g = GridSpec::new(-40.0, 80.0, 2401).unwrap();
        let traj: Vec<StatePair> = (0..8).map(|k| translate(&w, 1.7, k as f64, g)).collect();
        let tr = track_level_set(&traj, Component::U, 0.5).unwrap();
        assert!((tr.fitted_speed - 1.7).abs() < 1e-3);
        let still: Vec<StatePair> = (0..8).map(|k| translate(&w, 0.0, k as f64, g)).collect();
        assert!(track_level_set(&still, Component::U, 0.5).unwrap().fitted_speed.abs() < 1e-12);
    }

    #[test]
    fn level_not_crossed() {
        let g = GridSpec::new(0.0, 1.0, 11).unwrap();
        let traj = vec![StatePair::constant(g, 0.2, 0.0); 4];
        assert!(matches!(
            track_level_set(&traj, Component::U, 0.5),
            Err(LabError::LevelNotCrossed { .. })
        ));
    }

    #[test]
    fn planted_exponential() {
        let g = GridSpec::new(0.0, 50.0, 501).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|x| 0.07 * (-0.2 * x).exp()).collect();
        let s = StatePair::new(g, vec![0.0; g.n], v, 0.0, 0.0);
        let f = fit_decay(&s, Component::V, (10.0, 40.0)).unwrap();
        assert!((f.rate - 0.2).abs() < 1e-12);
        assert!((f.prefactor - 0.07).abs() < 1e-12);
        assert!(f.r_squared > 0.9999);
        assert!(matches!(fit_decay(&s, Component::U, (10.0, 40.0)), Err(LabError::NonPositiveValues)));
    }

    #[test]
    fn lock_recovers_shift() {
        let w = wave();
        let g = GridSpec::new(-40.0, 80.0, 2401).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|x| w.at_extended(x - 2.5 * 4.0 - 3.3)).collect();
        let s = StatePair::new(g, u, vec![0.0; g.n], 0.0, 4.0);
        let lock = lock_shape(&[s], Component::U, &w, 2.5, None).unwrap();
        assert!((lock.fitted_shift - 3.3).abs() < 1e-6);
        assert!(lock.sup_error < 1e-6);
    }

    #[test]
    fn empty_cone() {
        let g = GridSpec::new(0.0, 8.0, 9).unwrap();
        let traj = vec![StatePair::constant(g, 0.2, 0.0)];
        assert!(matches!(
            region_check(&traj, (f64::NEG_INFINITY, f64::INFINITY), (0.0, 0.0), 0.0),
            Err(LabError::EmptyCone)
        ));
    }
}
