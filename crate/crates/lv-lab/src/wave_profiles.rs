//! Traveling-wave profiles: scalar Fisher-KPP waves and two-component
//! bistable waves, plus spreading-speed estimates from simulation.

use std::path::Path;

use crate::error::{LabError, Result};
use crate::front_metrics::rightmost_crossing;
use crate::grid::{interp, Advection, Banded, Bc, GridSpec, Stencil};
use crate::io::{read_columns, write_columns};
use crate::rd_integrator::{integrate, BcPair, IntegratorConfig, StatePair};
use crate::speed_atlas::{classify_regime, ModelParams, Regime};
use crate::stats::fit_line;

/// How the translation freedom of a wave is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// Value 1/2 at the node nearest `x0`.
    Half { x0: f64 },
    /// `e^{tau x} Psi(x) = 1` at the right end of the grid.
    TailUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DecayMeta {
    /// Fitted exponent of the right tail.
    pub tau: f64,
    /// Fitted approach exponent at the left end.
    pub tau_tilde: f64,
    /// `lim e^{tau_c x} Psi(x)` with the predicted rate.
    pub tail_amplitude: f64,
    /// Left amplitude in `1 - Psi ~ M e^{tau_tilde x}`.
    pub m_tilde_c: f64,
    /// Envelope constants of the tail-normalized wave, when `c` is supercritical.
    pub m_c: Option<f64>,
    pub x_c: Option<f64>,
    pub tau_second: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub speed: f64,
    pub d: f64,
    pub r: f64,
    pub normalization: Normalization,
    pub decay: DecayMeta,
}

/// Predicted slow tail rate of `d y'' + c y' + r y(1-y) = 0`.
pub fn kpp_tail_rate(c: f64, d: f64, r: f64) -> f64 {
    let disc = (c * c - 4.0 * d * r).max(0.0);
    (c - disc.sqrt()) / (2.0 * d)
}

/// Predicted approach rate to 1 at the left.
pub fn kpp_left_rate(c: f64, d: f64, r: f64) -> f64 {
    ((c * c + 4.0 * d * r).sqrt() - c) / (2.0 * d)
}

impl WaveProfile {
    pub fn at(&self, x: f64) -> Option<f64> {
        interp(&self.grid, &self.values, x)
    }

    /// Value with constant extension beyond the grid ends.
    pub fn at_clamped(&self, x: f64) -> f64 {
        let xc = x.clamp(self.grid.x_min, self.grid.x_max);
        interp(&self.grid, &self.values, xc).unwrap()
    }

    /// Value with the asymptotic tails used beyond the grid ends.
    pub fn at_extended(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x > g.x_max {
            let tail = kpp_tail_rate(self.speed, self.d, self.r);
            self.values[g.n - 1] * (-tail * (x - g.x_max)).exp()
        } else if x < g.x_min {
            let lr = kpp_left_rate(self.speed, self.d, self.r);
            1.0 - (1.0 - self.values[0]) * (lr * (x - g.x_min)).exp()
        } else {
            interp(g, &self.values, x).unwrap()
        }
    }

    /// Shift that maps this profile to its tail-normalized translate:
    /// `tail_normalized(y) = self(y + shift)`.
    pub fn tail_shift(&self) -> f64 {
        let tau = kpp_tail_rate(self.speed, self.d, self.r);
        self.decay.tail_amplitude.ln() / tau
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let x = self.grid.nodes();
        let norm = match self.normalization {
            Normalization::Half { x0 } => format!("half@{x0}"),
            Normalization::TailUnit => "tail".to_string(),
        };
        let mut meta = vec![
            ("speed".to_string(), format!("{:.16e}", self.speed)),
            ("d".to_string(), format!("{:.16e}", self.d)),
            ("r".to_string(), format!("{:.16e}", self.r)),
            ("normalization".to_string(), norm),
            ("tau".to_string(), format!("{:.16e}", self.decay.tau)),
            ("tau_tilde".to_string(), format!("{:.16e}", self.decay.tau_tilde)),
            ("tail_amplitude".to_string(), format!("{:.16e}", self.decay.tail_amplitude)),
            ("m_tilde_c".to_string(), format!("{:.16e}", self.decay.m_tilde_c)),
        ];
        if let (Some(m), Some(xc)) = (self.decay.m_c, self.decay.x_c) {
            meta.push(("m_c".to_string(), format!("{m:.16e}")));
            meta.push(("x_c".to_string(), format!("{xc:.16e}")));
        }
        write_columns(path, &meta, &["x", "value"], &[&x, &self.values])
    }

    pub fn read_csv(path: &Path) -> Result<WaveProfile> {
        let t = read_columns(path)?;
        let bad = |k: &str| LabError::Io(format!("missing {k} in {}", path.display()));
        let x = t.col("x").ok_or_else(|| bad("x"))?;
        let values = t.col("value").ok_or_else(|| bad("value"))?.to_vec();
        let grid = GridSpec::new(x[0], x[x.len() - 1], x.len())?;
        let normalization = match t.meta("normalization") {
            Some("tail") => Normalization::TailUnit,
            Some(s) => Normalization::Half {
                x0: s.trim_start_matches("half@").parse().map_err(|_| bad("normalization"))?,
            },
            None => return Err(bad("normalization")),
        };
        let f = |k: &str| t.meta_f64(k).ok_or_else(|| bad(k));
        Ok(WaveProfile {
            grid,
            values,
            speed: f("speed")?,
            d: f("d")?,
            r: f("r")?,
            normalization,
            decay: DecayMeta {
                tau: f("tau")?,
                tau_tilde: f("tau_tilde")?,
                tail_amplitude: f("tail_amplitude")?,
                m_tilde_c: f("m_tilde_c")?,
                m_c: t.meta_f64("m_c"),
                x_c: t.meta_f64("x_c"),
                tau_second: None,
            },
        })
    }
}

/// Boundary conditions shared by the wave solver and the integrator for a
/// scalar KPP front on spacing `h`. The Robin rates are the exact decay rates
/// of the central-difference linearizations, so geometric tails are discrete
/// solutions.
pub fn kpp_bcs(c: f64, d: f64, r: f64, h: f64) -> (Bc, Bc) {
    // (d/h^2 + c/2h) z^2 + (s - 2d/h^2) z + (d/h^2 - c/2h) = 0, s = +-r
    let roots = |s: f64| {
        let qa = d / (h * h) + c / (2.0 * h);
        let qb = s - 2.0 * d / (h * h);
        let qc = d / (h * h) - c / (2.0 * h);
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
        ((-qb - disc) / (2.0 * qa), (-qb + disc) / (2.0 * qa))
    };
    let (_, z_tail) = roots(r);
    let (_, z_left) = roots(-r);
    (
        Bc::Robin { rate: (z_left - 1.0 / z_left) / (2.0 * h), target: 1.0 },
        Bc::Robin { rate: (1.0 / z_tail - z_tail) / (2.0 * h), target: 0.0 },
    )
}

/// Sup of the discrete wave-equation residual over interior nodes.
pub fn kpp_residual(w: &WaveProfile) -> f64 {
    let st = Stencil::build_with(&w.grid, w.d, w.speed, Bc::Neumann, Bc::Neumann, Advection::Central);
    let n = w.grid.n;
    (1..n - 1)
        .map(|i| {
            let u = w.values[i];
            (st.apply_at(&w.values, i) + w.r * u * (1.0 - u)).abs()
        })
        .fold(0.0, f64::max)
}

pub fn solve_kpp_wave(c: f64, d: f64, r: f64, grid: GridSpec) -> Result<WaveProfile> {
    solve_kpp_wave_normalized(c, d, r, grid, Normalization::Half { x0: 0.0 })
}

pub fn solve_kpp_wave_normalized(
    c: f64,
    d: f64,
    r: f64,
    grid: GridSpec,
    norm: Normalization,
) -> Result<WaveProfile> {
    let c_min = 2.0 * (d * r).sqrt();
    if c < c_min - 1e-12 {
        return Err(LabError::NoWave { c, c_min });
    }
    let grid = widen_for_tail(grid, kpp_tail_rate(c, d, r))?;
    let guess = logistic_guess(&grid, c, d, r, norm);
    match kpp_newton(c, d, r, &grid, norm, guess) {
        Ok(v) => finish_kpp(c, d, r, grid, norm, v),
        Err(_) => {
            // continuation from a faster wave
            let mut cc = c + 1.0;
            let mut vals = kpp_newton(cc, d, r, &grid, norm, logistic_guess(&grid, cc, d, r, norm))?;
            while cc > c {
                cc = (cc - 0.125).max(c);
                vals = kpp_newton(cc, d, r, &grid, norm, vals)?;
            }
            finish_kpp(c, d, r, grid, norm, vals)
        }
    }
}

/// Solve from a caller-supplied initial profile.
pub fn solve_kpp_wave_from(
    c: f64,
    d: f64,
    r: f64,
    grid: GridSpec,
    norm: Normalization,
    guess: Vec<f64>,
) -> Result<WaveProfile> {
    let c_min = 2.0 * (d * r).sqrt();
    if c < c_min - 1e-12 {
        return Err(LabError::NoWave { c, c_min });
    }
    let v = kpp_newton(c, d, r, &grid, norm, guess)?;
    finish_kpp(c, d, r, grid, norm, v)
}

fn widen_for_tail(grid: GridSpec, tau: f64) -> Result<GridSpec> {
    if (-tau * grid.x_max).exp() < 1e-10 {
        return Ok(grid);
    }
    let h = grid.h();
    let need = 10.0 * std::f64::consts::LN_10 / tau;
    let extra = ((need - grid.x_max) / h).ceil().max(0.0) as usize + 1;
    GridSpec::new(grid.x_min, grid.x_max + extra as f64 * h, grid.n + extra)
}

fn logistic_guess(grid: &GridSpec, c: f64, d: f64, r: f64, norm: Normalization) -> Vec<f64> {
    let tau = kpp_tail_rate(c, d, r);
    let x0 = match norm {
        Normalization::Half { x0 } => x0,
        Normalization::TailUnit => 0.0,
    };
    grid.nodes()
        .iter()
        .map(|x| 1.0 / (1.0 + (tau * (x - x0)).exp()))
        .collect()
}

fn pin_of(grid: &GridSpec, c: f64, d: f64, r: f64, norm: Normalization) -> (usize, f64) {
    match norm {
        Normalization::Half { x0 } => (grid.nearest(x0), 0.5),
        Normalization::TailUnit => (
            grid.n - 1,
            (-kpp_tail_rate(c, d, r) * grid.x_max).exp(),
        ),
    }
}

fn central_diff(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|i| match i {
            0 => (u[1] - u[0]) / h,
            _ if i == n - 1 => (u[n - 1] - u[n - 2]) / h,
            _ => (u[i + 1] - u[i - 1]) / (2.0 * h),
        })
        .collect()
}

/// Bordered Newton: a pin fixes the translate, and a slack speed correction
/// `alpha u'` balances the count. `alpha` is exponentially small in the
/// domain length at convergence.
fn kpp_newton(
    c: f64,
    d: f64,
    r: f64,
    grid: &GridSpec,
    norm: Normalization,
    mut u: Vec<f64>,
) -> Result<Vec<f64>> {
    let n = grid.n;
    let h = grid.h();
    let (left, right) = kpp_bcs(c, d, r, h);
    let st = Stencil::build_with(grid, d, c, left, right, Advection::Central);
    let (k, pin) = pin_of(grid, c, d, r, norm);
    let mut alpha = 0.0;

    let resid = |u: &[f64], alpha: f64| -> Vec<f64> {
        let du = central_diff(u, h);
        (0..n)
            .map(|i| st.apply_at(u, i) + r * u[i] * (1.0 - u[i]) + alpha * du[i])
            .collect()
    };
    let merit = |f: &[f64], u: &[f64]| -> f64 {
        f.iter().fold(0.0f64, |m, x| m.max(x.abs())) + (u[k] - pin).abs() / (h * h)
    };

    let mut f = resid(&u, alpha);
    let mut m = merit(&f, &u);
    for _ in 0..80 {
        if m < 1e-11 {
            break;
        }
        let mut t = Banded::new(n, 1, 1);
        for i in 0..n {
            t.set(i, i, st.diag[i] + r * (1.0 - 2.0 * u[i]));
            if i > 0 {
                t.set(i, i - 1, st.lower[i]);
            }
            if i + 1 < n {
                t.set(i, i + 1, st.upper[i]);
            }
        }
        t.add(0, 0, -alpha / h);
        t.add(0, 1, alpha / h);
        t.add(n - 1, n - 1, alpha / h);
        t.add(n - 1, n - 2, -alpha / h);
        for i in 1..n - 1 {
            t.add(i, i + 1, alpha / (2.0 * h));
            t.add(i, i - 1, -alpha / (2.0 * h));
        }
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let bvec = central_diff(&u, h);
        let y1 = t.clone().solve(&rhs)?;
        let y2 = t.solve(&bvec)?;
        if y2[k].abs() < 1e-300 {
            return Err(LabError::NonConvergence("degenerate bordered system".into()));
        }
        // J du + b dalpha = -F, du_k = pin - u_k
        let dalpha = (y1[k] - (pin - u[k])) / y2[k];
        let du: Vec<f64> = (0..n).map(|i| y1[i] - dalpha * y2[i]).collect();
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = (0..n).map(|i| u[i] + step * du[i]).collect();
            let ta = alpha + step * dalpha;
            let tf = resid(&trial, ta);
            let tm = merit(&tf, &trial);
            if tm.is_finite() && (tm < m || tm < 1e-11) {
                u = trial;
                alpha = ta;
                f = tf;
                m = tm;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(LabError::NonConvergence(format!(
                "line search stalled at residual {m:e} (c = {c})"
            )));
        }
    }
    if m >= 1e-9 {
        return Err(LabError::NonConvergence(format!("residual {m:e} after 80 iterations (c = {c})")));
    }
    // critical fronts have an algebraic prefactor the Robin closure misses
    let slack_tol = if c <= 2.0 * (d * r).sqrt() + 1e-9 { 1e-3 } else { 1e-6 };
    if alpha.abs() > slack_tol {
        return Err(LabError::NonConvergence(format!("speed slack {alpha:e} too large; domain too short")));
    }
    Ok(u)
}

fn finish_kpp(
    c: f64,
    d: f64,
    r: f64,
    grid: GridSpec,
    norm: Normalization,
    values: Vec<f64>,
) -> Result<WaveProfile> {
    for i in 1..grid.n {
        if values[i] >= values[i - 1] || values[i] < -1e-10 || values[i] > 1.0 + 1e-10 {
            return Err(LabError::NonConvergence(format!(
                "converged profile not monotone in [0,1] at x = {}",
                grid.x(i)
            )));
        }
    }
    let mut w = WaveProfile {
        grid,
        values,
        speed: c,
        d,
        r,
        normalization: norm,
        decay: DecayMeta::default(),
    };
    w.decay = decay_meta(&w);
    Ok(w)
}

fn window_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let (mut xs, mut ls) = (Vec::new(), Vec::new());
    for (xi, yi) in x.iter().zip(y) {
        if *yi >= 1e-8 && *yi <= 1e-2 {
            xs.push(*xi);
            ls.push(yi.ln());
        }
    }
    fit_line(&xs, &ls).map(|f| (f.slope, f.intercept))
}

fn decay_meta(w: &WaveProfile) -> DecayMeta {
    let x = w.grid.nodes();
    let tau_c = kpp_tail_rate(w.speed, w.d, w.r);
    let (tau, _) = window_fit(&x, &w.values).map(|(s, i)| (-s, i)).unwrap_or((f64::NAN, 0.0));
    let one_minus: Vec<f64> = w.values.iter().map(|v| 1.0 - v).collect();
    let (tau_tilde, m_tilde_c) = window_fit(&x, &one_minus)
        .map(|(s, i)| (s, i.exp()))
        .unwrap_or((f64::NAN, f64::NAN));
    let tail_amplitude = x
        .iter()
        .zip(&w.values)
        .map(|(xi, v)| v * (tau_c * xi).exp())
        .fold(0.0, f64::max);
    let mut meta = DecayMeta {
        tau,
        tau_tilde,
        tail_amplitude,
        m_tilde_c,
        ..Default::default()
    };
    let critical = w.speed <= 2.0 * (w.d * w.r).sqrt() + 1e-9;
    if !critical {
        let top = (2.0 * tau_c).min(1.0);
        if top > tau_c {
            let t2 = 0.5 * (tau_c + top);
            let shift = tail_amplitude.ln() / tau_c;
            let mut m_c: f64 = 0.0;
            for (xi, v) in x.iter().zip(&w.values) {
                let y = xi - shift;
                if y >= 0.0 && *v > 1e-300 {
                    m_c = m_c.max(((-tau_c * y).exp() - v) * (t2 * y).exp());
                }
            }
            let x_c = (m_c.max(1.0)).ln() / (t2 - tau_c) + 1e-6;
            meta.m_c = Some(m_c);
            meta.x_c = Some(x_c);
            meta.tau_second = Some(t2);
        }
    }
    meta
}

/// Tail-normalized envelope check `e^{-tau_c y} - M e^{-tau y} <= Phi(y) <= e^{-tau_c y}`
/// for `y >= x_c`; returns the worst violation (nonpositive when it holds).
pub fn kpp_envelope_violation(w: &WaveProfile) -> Option<f64> {
    let (m_c, x_c, t2) = (w.decay.m_c?, w.decay.x_c?, w.decay.tau_second?);
    let tau_c = kpp_tail_rate(w.speed, w.d, w.r);
    let shift = w.tail_shift();
    let mut worst = f64::NEG_INFINITY;
    for (i, v) in w.values.iter().enumerate() {
        let y = w.grid.x(i) - shift;
        if y < x_c {
            continue;
        }
        let up = (-tau_c * y).exp();
        let lo = up - m_c * (-t2 * y).exp();
        worst = worst.max(v - up).max(lo - v).max(-lo);
    }
    Some(worst)
}

/// `Psi_c(x) = Phi_{c/sqrt(rd)}(sqrt(r/d) x)` on the correspondingly scaled grid.
pub fn rescale_wave(phi: &WaveProfile, d: f64, r: f64) -> Result<WaveProfile> {
    if (phi.d - 1.0).abs() > 1e-15 || (phi.r - 1.0).abs() > 1e-15 {
        return Err(LabError::DomainError("rescale_wave expects a unit-parameter wave".into()));
    }
    let s = (d / r).sqrt();
    let grid = GridSpec::new(phi.grid.x_min * s, phi.grid.x_max * s, phi.grid.n)?;
    let normalization = match phi.normalization {
        Normalization::Half { x0 } => Normalization::Half { x0: x0 * s },
        Normalization::TailUnit => Normalization::TailUnit,
    };
    let mut w = WaveProfile {
        grid,
        values: phi.values.clone(),
        speed: phi.speed * (r * d).sqrt(),
        d,
        r,
        normalization,
        decay: DecayMeta::default(),
    };
    w.decay = decay_meta(&w);
    Ok(w)
}

/// Linear resampling onto another grid.
pub fn resample(w: &WaveProfile, grid: GridSpec) -> Result<WaveProfile> {
    if grid.x_min < w.grid.x_min - 1e-12 || grid.x_max > w.grid.x_max + 1e-12 {
        return Err(LabError::GridMismatch(format!(
            "[{}, {}] not inside [{}, {}]",
            grid.x_min, grid.x_max, w.grid.x_min, w.grid.x_max
        )));
    }
    let values = grid.nodes().iter().map(|x| w.at_clamped(*x)).collect();
    Ok(WaveProfile { grid, values, ..w.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equilibrium {
    Zero,
    E1,
    E2,
    EStar,
}

impl Equilibrium {
    pub fn state(&self, p: &ModelParams) -> (f64, f64) {
        match self {
            Equilibrium::Zero => (0.0, 0.0),
            Equilibrium::E1 => (1.0, 0.0),
            Equilibrium::E2 => (0.0, 1.0),
            Equilibrium::EStar => p.e_star(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemWave {
    pub u_profile: WaveProfile,
    pub v_profile: WaveProfile,
    pub speed: f64,
    pub boundary_pair: (Equilibrium, Equilibrium),
    pub residual: f64,
}

/// Four-point Lagrange interpolation; `None` outside the grid.
pub fn interp_cubic(grid: &GridSpec, values: &[f64], x: f64) -> Option<f64> {
    let h = grid.h();
    let s = (x - grid.x_min) / h;
    if s < 0.0 || s > (grid.n - 1) as f64 {
        return None;
    }
    let i = (s.floor() as usize).clamp(1, grid.n - 3) - 1;
    let t = s - i as f64;
    let (y0, y1, y2, y3) = (values[i], values[i + 1], values[i + 2], values[i + 3]);
    Some(
        -y0 * (t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0 + y1 * t * (t - 2.0) * (t - 3.0) / 2.0
            - y2 * t * (t - 1.0) * (t - 3.0) / 2.0
            + y3 * t * (t - 1.0) * (t - 2.0) / 6.0,
    )
}

impl SystemWave {
    /// Point where `u = v`, by bisection on the cubic interpolant.
    pub fn crossing(&self) -> Option<f64> {
        let g = self.u_profile.grid;
        let diff = |x: f64| {
            interp_cubic(&g, &self.u_profile.values, x).unwrap() - interp_cubic(&g, &self.v_profile.values, x).unwrap()
        };
        let d0 = diff(g.x_min);
        let i = (1..g.n).find(|i| diff(g.x(*i)).signum() != d0.signum())?;
        let (mut lo, mut hi) = (g.x(i - 1), g.x(i));
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if diff(mid).signum() == diff(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// `sup |u(x* + s) - v(x* - s)|` after centering at the crossing `x*`.
    pub fn reflection_defect(&self) -> Option<f64> {
        let g = self.u_profile.grid;
        let xs = self.crossing()?;
        let reach = (g.x_max - xs).min(xs - g.x_min);
        let mut worst: f64 = 0.0;
        let mut s = 0.0;
        while s <= reach {
            for sg in [1.0, -1.0] {
                let u = interp_cubic(&g, &self.u_profile.values, xs + sg * s)?;
                let v = interp_cubic(&g, &self.v_profile.values, xs - sg * s)?;
                worst = worst.max((u - v).abs());
            }
            s += g.h();
        }
        Some(worst)
    }

    /// Mirror image `x -> -x`; requires a symmetric grid.
    pub fn reflect(&self) -> Result<SystemWave> {
        let g = self.u_profile.grid;
        if (g.x_min + g.x_max).abs() > 1e-12 {
            return Err(LabError::GridMismatch("reflection needs a symmetric grid".into()));
        }
        let flip = |w: &WaveProfile| {
            let mut values = w.values.clone();
            values.reverse();
            WaveProfile { values, speed: -w.speed, ..w.clone() }
        };
        Ok(SystemWave {
            u_profile: flip(&self.u_profile),
            v_profile: flip(&self.v_profile),
            speed: -self.speed,
            boundary_pair: (self.boundary_pair.1, self.boundary_pair.0),
            residual: self.residual,
        })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let x = self.u_profile.grid.nodes();
        let meta = vec![
            ("speed".to_string(), format!("{:.16e}", self.speed)),
            ("normalization".to_string(), "u=1/2 at x=0".to_string()),
            ("left".to_string(), format!("{:?}", self.boundary_pair.0)),
            ("right".to_string(), format!("{:?}", self.boundary_pair.1)),
            ("residual".to_string(), format!("{:.3e}", self.residual)),
        ];
        write_columns(path, &meta, &["x", "u", "v"], &[&x, &self.u_profile.values, &self.v_profile.values])
    }
}

struct SysEval {
    f: Vec<f64>,
    fc: Vec<f64>,
}

fn sys_residual(p: &ModelParams, grid: &GridSpec, z: &[f64], c: f64, k: usize) -> SysEval {
    let n = grid.n;
    let h = grid.h();
    let mut f = vec![0.0; 2 * n];
    let mut fc = vec![0.0; 2 * n];
    for i in 0..n {
        let (u, v) = (z[2 * i], z[2 * i + 1]);
        if i == 0 {
            f[0] = u;
            f[1] = v - 1.0;
            continue;
        }
        if i == n - 1 {
            f[2 * i] = u - 1.0;
            f[2 * i + 1] = v;
            continue;
        }
        let (um, up) = (z[2 * i - 2], z[2 * i + 2]);
        let (vm, vp) = (z[2 * i - 1], z[2 * i + 3]);
        let du = (up - um) / (2.0 * h);
        let dv = (vp - vm) / (2.0 * h);
        f[2 * i] = (up - 2.0 * u + um) / (h * h) + c * du + u * (1.0 - u - p.a * v);
        f[2 * i + 1] = p.d * (vp - 2.0 * v + vm) / (h * h) + c * dv + p.r * v * (1.0 - v - p.b * u);
        fc[2 * i] = du;
        fc[2 * i + 1] = dv;
    }
    let _ = k;
    SysEval { f, fc }
}

fn sys_jacobian(p: &ModelParams, grid: &GridSpec, z: &[f64], c: f64) -> Banded {
    let n = grid.n;
    let h = grid.h();
    let mut m = Banded::new(2 * n, 2, 2);
    for i in 0..n {
        let (iu, iv) = (2 * i, 2 * i + 1);
        if i == 0 || i == n - 1 {
            m.set(iu, iu, 1.0);
            m.set(iv, iv, 1.0);
            continue;
        }
        let (u, v) = (z[iu], z[iv]);
        m.set(iu, iu - 2, 1.0 / (h * h) - c / (2.0 * h));
        m.set(iu, iu + 2, 1.0 / (h * h) + c / (2.0 * h));
        m.set(iu, iu, -2.0 / (h * h) + 1.0 - 2.0 * u - p.a * v);
        m.set(iu, iv, -p.a * u);
        m.set(iv, iv - 2, p.d / (h * h) - c / (2.0 * h));
        m.set(iv, iv + 2, p.d / (h * h) + c / (2.0 * h));
        m.set(iv, iv, -2.0 * p.d / (h * h) + p.r * (1.0 - 2.0 * v - p.b * u));
        m.set(iv, iu, -p.r * p.b * v);
    }
    m
}

fn bistable_newton(
    p: &ModelParams,
    grid: &GridSpec,
    mut z: Vec<f64>,
    mut c: f64,
) -> Result<(Vec<f64>, f64, f64)> {
    let n = grid.n;
    let k = grid.nearest(0.0);
    let ku = 2 * k;
    let h2 = grid.h() * grid.h();
    let merit = |e: &SysEval, z: &[f64]| -> f64 {
        e.f.iter().fold(0.0f64, |m, x| m.max(x.abs())) + (z[ku] - 0.5).abs() / h2
    };
    let mut ev = sys_residual(p, grid, &z, c, k);
    let mut m = merit(&ev, &z);
    for _ in 0..100 {
        if m < 1e-10 {
            return Ok((z, c, m));
        }
        let jac = sys_jacobian(p, grid, &z, c);
        // row ku of the full Jacobian, kept for the bordered equation
        let jrow: Vec<(usize, f64)> = {
            let (u, v) = (z[ku], z[ku + 1]);
            let hh = grid.h();
            vec![
                (ku - 2, 1.0 / h2 - c / (2.0 * hh)),
                (ku + 2, 1.0 / h2 + c / (2.0 * hh)),
                (ku, -2.0 / h2 + 1.0 - 2.0 * u - p.a * v),
                (ku + 1, -p.a * u),
            ]
        };
        let mut t = jac;
        t.clear_row(ku);
        t.set(ku, ku, 1.0);
        let mut rhs: Vec<f64> = ev.f.iter().map(|x| -x).collect();
        rhs[ku] = 0.5 - z[ku];
        let mut fc = ev.fc.clone();
        fc[ku] = 0.0;
        let y1 = t.clone().solve(&rhs)?;
        let y2 = t.solve(&fc)?;
        let dot = |y: &[f64]| jrow.iter().map(|(j, a)| a * y[*j]).sum::<f64>();
        let den = dot(&y2) - ev.fc[ku];
        if den.abs() < 1e-300 {
            return Err(LabError::NonConvergence("degenerate speed border".into()));
        }
        let dc = (ev.f[ku] + dot(&y1)) / den;
        let dz: Vec<f64> = (0..2 * n).map(|i| y1[i] - dc * y2[i]).collect();
        let mut step = 1.0;
        let mut ok = false;
        for _ in 0..30 {
            let tz: Vec<f64> = (0..2 * n).map(|i| z[i] + step * dz[i]).collect();
            let tc = c + step * dc;
            let te = sys_residual(p, grid, &tz, tc, k);
            let tm = merit(&te, &tz);
            if tm.is_finite() && tm < m {
                z = tz;
                c = tc;
                ev = te;
                m = tm;
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if !ok {
            break;
        }
    }
    if m < 1e-8 {
        Ok((z, c, m))
    } else {
        Err(LabError::NonConvergence(format!("bistable wave residual {m:e}")))
    }
}

/// Bistable wave with `e_2` at the left end and `e_1` at the right end.
pub fn solve_bistable_wave(p: &ModelParams, grid: GridSpec) -> Result<SystemWave> {
    if classify_regime(p)? != Regime::Bistable {
        return Err(LabError::WrongRegime("bistable wave needs a > 1 and b > 1".into()));
    }
    let x = grid.nodes();
    let mut z0 = vec![0.0; 2 * grid.n];
    for (i, xi) in x.iter().enumerate() {
        let u = 0.5 * (1.0 + (xi / 4.0).tanh());
        z0[2 * i] = u;
        z0[2 * i + 1] = 1.0 - u;
    }
    let (z, c, res) = match bistable_newton(p, &grid, z0.clone(), 0.0) {
        Ok(s) => s,
        Err(_) => {
            // homotopy from the symmetric pair (m, m)
            let m = 0.5 * (p.a + p.b);
            let steps = 20;
            let mut z = z0;
            let mut c = 0.0;
            let mut res = f64::NAN;
            for s in 0..=steps {
                let t = s as f64 / steps as f64;
                let q = ModelParams::unchecked(m + t * (p.a - m), m + t * (p.b - m), p.d, p.r);
                let out = bistable_newton(&q, &grid, z, c)?;
                z = out.0;
                c = out.1;
                res = out.2;
            }
            (z, c, res)
        }
    };
    let n = grid.n;
    let u: Vec<f64> = (0..n).map(|i| z[2 * i]).collect();
    let v: Vec<f64> = (0..n).map(|i| z[2 * i + 1]).collect();
    let mk = |values: Vec<f64>, d: f64, r: f64| WaveProfile {
        grid,
        values,
        speed: c,
        d,
        r,
        normalization: Normalization::Half { x0: 0.0 },
        decay: DecayMeta::default(),
    };
    Ok(SystemWave {
        u_profile: mk(u, 1.0, 1.0),
        v_profile: mk(v, p.d, p.r),
        speed: c,
        boundary_pair: (Equilibrium::E2, Equilibrium::E1),
        residual: res,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedBudget {
    pub t_end: f64,
    pub h: f64,
    pub dt: f64,
}

impl Default for SpeedBudget {
    fn default() -> Self {
        SpeedBudget { t_end: 200.0, h: 0.1, dt: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedEstimate {
    pub speed: f64,
    /// Half-width of the 95% interval from the regression.
    pub ci_half_width: f64,
    pub drift: f64,
    pub note: &'static str,
}

/// Spreading speed of step data connecting `pair.0` (left) to `pair.1` (right).
pub fn estimate_minimal_speed(
    p: &ModelParams,
    pair: (Equilibrium, Equilibrium),
    budget: SpeedBudget,
) -> Result<SpeedEstimate> {
    use Equilibrium::*;
    let regime = classify_regime(p)?;
    let ok = matches!(
        (regime, pair),
        (Regime::WeakCompetition, (EStar, E1))
            | (Regime::WeakCompetition, (EStar, E2))
            | (Regime::UWins, (E1, E2))
            | (Regime::VWins, (E2, E1))
    );
    if !ok {
        return Err(LabError::WrongRegime(format!("pair {pair:?} does not match {regime:?}")));
    }
    let (l, r) = (pair.0.state(p), pair.1.state(p));
    // the component that vanishes on the right is the invader
    let track_v = r.1 == 0.0 && l.1 > 0.0;
    let level = if track_v { 0.5 * l.1 } else { 0.5 * l.0 };
    let vmax = 2.0 * (1f64).max((p.d * p.r).sqrt());
    let grid = GridSpec::with_spacing(-20.0, 20.0 + 1.2 * vmax * budget.t_end, budget.h)?;
    let x = grid.nodes();
    let u0: Vec<f64> = x.iter().map(|xi| if *xi < 0.0 { l.0 } else { r.0 }).collect();
    let v0: Vec<f64> = x.iter().map(|xi| if *xi < 0.0 { l.1 } else { r.1 }).collect();
    let state = StatePair::new(grid, u0, v0, 0.0, 0.0);
    let cfg = IntegratorConfig::new(
        budget.dt,
        BcPair { u: Bc::Neumann, v: Bc::Neumann },
        BcPair { u: Bc::Neumann, v: Bc::Neumann },
    );
    let times: Vec<f64> = (1..=(budget.t_end as usize)).map(|t| t as f64).collect();
    let traj = integrate(&state, &cfg, p, budget.t_end, &times)?;
    let mut ts = Vec::new();
    let mut xs = Vec::new();
    for s in &traj {
        let vals = if track_v { &s.v } else { &s.u };
        if let Some(xc) = rightmost_crossing(&s.grid, vals, level) {
            ts.push(s.time);
            xs.push(xc);
        }
    }
    if ts.len() < 8 {
        return Err(LabError::BudgetExceeded("front not detected".into()));
    }
    let nt = ts.len();
    let half = fit_line(&ts[nt / 2..], &xs[nt / 2..]).unwrap();
    let q1 = fit_line(&ts[3 * nt / 4..7 * nt / 8], &xs[3 * nt / 4..7 * nt / 8]).unwrap();
    let q2 = fit_line(&ts[7 * nt / 8..], &xs[7 * nt / 8..]).unwrap();
    let drift = (q2.slope - q1.slope).abs() / half.slope.abs().max(1e-12);
    if drift > 5e-3 {
        return Err(LabError::BudgetExceeded(format!(
            "front speed drift {:.3}% over the last quarter",
            100.0 * drift
        )));
    }
    Ok(SpeedEstimate {
        speed: half.slope,
        ci_half_width: 1.96 * half.slope_se,
        drift,
        note: "spreading-simulation estimate, not a certificate",
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> GridSpec {
        GridSpec::new(-60.0, 60.0, 2401).unwrap()
    }

    #[test]
    fn kpp_decay_rates() {
        let w = solve_kpp_wave(2.5, 1.0, 1.0, g()).unwrap();
        assert!(((w.decay.tau - 0.5) / 0.5).abs() < 0.01, "tau {}", w.decay.tau);
        let tt = (10.25f64.sqrt() - 2.5) / 2.0;
        assert!(((w.decay.tau_tilde - tt) / tt).abs() < 0.02);
        assert!(kpp_residual(&w) < 1e-10);
        assert!((w.at(0.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn kpp_no_wave_below_minimal_speed() {
        assert!(matches!(
            solve_kpp_wave(1.0, 1.0, 1.0, g()),
            Err(LabError::NoWave { .. })
        ));
    }

    #[test]
    fn kpp_envelope_holds() {
        let w = solve_kpp_wave(2.5, 1.0, 1.0, g()).unwrap();
        let worst = kpp_envelope_violation(&w).unwrap();
        assert!(worst <= 1e-12, "worst {worst}");
    }

    #[test]
    fn tail_normalization() {
        let w = solve_kpp_wave_normalized(2.5, 1.0, 1.0, g(), Normalization::TailUnit).unwrap();
        assert!((w.decay.tail_amplitude - 1.0).abs() < 1e-12);
        let half = solve_kpp_wave(2.5, 1.0, 1.0, g()).unwrap();
        let s = half.tail_shift();
        // the two are translates of each other
        for x in [-5.0, 0.0, 5.0, 10.0] {
            assert!((w.at(x).unwrap() - half.at(x + s).unwrap()).abs() < 2e-3);
        }
    }

    #[test]
    fn rescale_identity_and_residuals() {
        let w = solve_kpp_wave(2.5, 1.0, 1.0, g()).unwrap();
        let same = rescale_wave(&w, 1.0, 1.0).unwrap();
        assert_eq!(same.values, w.values);
        assert_eq!(same.grid, w.grid);
        let v = rescale_wave(&w, 4.0, 1.0).unwrap();
        assert!((v.speed - 5.0).abs() < 1e-15);
        assert!(kpp_residual(&v) < 1e-8);
        let v = rescale_wave(&w, 1.0, 4.0).unwrap();
        assert!((v.speed - 5.0).abs() < 1e-15);
        assert!((v.grid.x_max - 30.0).abs() < 1e-12);
        assert!(kpp_residual(&v) < 1e-8);
    }

    #[test]
    fn resample_outside_is_mismatch() {
        let w = solve_kpp_wave(2.5, 1.0, 1.0, g()).unwrap();
        let big = GridSpec::new(-70.0, 60.0, 100).unwrap();
        assert!(matches!(resample(&w, big), Err(LabError::GridMismatch(_))));
    }

    #[test]
    fn bistable_symmetric() {
        let p = ModelParams::new(2.0, 2.0, 1.0, 1.0).unwrap();
        let sw = solve_bistable_wave(&p, g()).unwrap();
        assert!(sw.speed.abs() < 1e-3);
        let defect = sw.reflection_defect().unwrap();
        assert!(defect < 1e-6, "{defect}");
        assert!(sw.residual < 1e-8);
    }

    #[test]
    fn bistable_wrong_regime() {
        let p = ModelParams::new(0.5, 0.5, 1.0, 1.0).unwrap();
        assert!(matches!(solve_bistable_wave(&p, g()), Err(LabError::WrongRegime(_))));
    }

    #[test]
    fn csv_roundtrip() {
        let w = solve_kpp_wave(2.5, 1.0, 1.0, GridSpec::new(-40.0, 60.0, 501).unwrap()).unwrap();
        let dir = std::env::temp_dir().join("lv_lab_wave_rt");
        let path = dir.join("w.csv");
        w.write_csv(&path).unwrap();
        let back = WaveProfile::read_csv(&path).unwrap();
        assert_eq!(back.values, w.values);
        assert_eq!(back.speed, w.speed);
        assert_eq!(back.normalization, w.normalization);
    }
}
