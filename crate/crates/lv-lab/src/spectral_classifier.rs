//! Fredholm regions of `L - mu` for the linearized v-operator
//! `L psi = d psi'' + c psi' + r(1 - b Phi_c) psi`, and polar shooting.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::io::write_columns;
use crate::speed_atlas::ModelParams;
use crate::wave_profiles::{interp_cubic, WaveProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Omega1,
    Omega2,
    Omega3,
    OnBoundary,
}

impl Region {
    pub fn code(&self) -> f64 {
        match self {
            Region::Omega1 => 1.0,
            Region::Omega2 => 2.0,
            Region::Omega3 => 3.0,
            Region::OnBoundary => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FredholmVerdict {
    pub mu: Complex64,
    pub region: Region,
    pub i_plus: i32,
    pub i_minus: i32,
    pub index: i32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharRoots {
    /// Roots of `d l^2 + c l + r = mu`, `+` root first.
    pub lambda: (Complex64, Complex64),
    /// Roots of `d l^2 + c l + r(1-b) = mu`.
    pub lambda_tilde: (Complex64, Complex64),
}

fn quad_roots(d: f64, c: f64, k: Complex64) -> (Complex64, Complex64) {
    // d l^2 + c l + k = 0
    let disc = (Complex64::new(c * c, 0.0) - 4.0 * d * k).sqrt();
    ((-c + disc) / (2.0 * d), (-c - disc) / (2.0 * d))
}

pub fn characteristic_roots(p: &ModelParams, c: f64, mu: Complex64) -> CharRoots {
    CharRoots {
        lambda: quad_roots(p.d, c, p.r - mu),
        lambda_tilde: quad_roots(p.d, c, p.r * (1.0 - p.b) - mu),
    }
}

pub fn classify_mu(p: &ModelParams, c: f64, mu: Complex64) -> FredholmVerdict {
    let shift = -p.d * (mu.im / c).powi(2);
    let g_plus = mu.re - (shift + p.r);
    let g_minus = mu.re - (shift + p.r * (1.0 - p.b));
    let region = if g_plus.abs() <= 1e-12 || g_minus.abs() <= 1e-12 {
        Region::OnBoundary
    } else if g_plus > 0.0 {
        Region::Omega1
    } else if g_minus < 0.0 {
        Region::Omega2
    } else {
        Region::Omega3
    };
    let (i_plus, i_minus) = match region {
        Region::Omega1 => (1, 1),
        Region::Omega3 => (0, 1),
        _ => (0, 0),
    };
    FredholmVerdict {
        mu,
        region,
        i_plus,
        i_minus,
        index: i_minus - i_plus,
    }
}

/// Classify a rectangular grid of `mu` values and write the scan CSV.
pub fn region_scan(
    p: &ModelParams,
    c: f64,
    re: (f64, f64, usize),
    im: (f64, f64, usize),
    path: Option<&Path>,
) -> Result<Vec<FredholmVerdict>> {
    let lin = |(a, b, n): (f64, f64, usize), i: usize| {
        if n <= 1 {
            a
        } else {
            a + (b - a) * i as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(re.2 * im.2);
    for j in 0..im.2 {
        for i in 0..re.2 {
            out.push(classify_mu(p, c, Complex64::new(lin(re, i), lin(im, j))));
        }
    }
    if let Some(path) = path {
        let col = |f: &dyn Fn(&FredholmVerdict) -> f64| out.iter().map(f).collect::<Vec<f64>>();
        write_columns(
            path,
            &[("c".into(), c.to_string())],
            &["re_mu", "im_mu", "region", "i_plus", "i_minus", "index"],
            &[
                &col(&|v| v.mu.re),
                &col(&|v| v.mu.im),
                &col(&|v| v.region.code()),
                &col(&|v| v.i_plus as f64),
                &col(&|v| v.i_minus as f64),
                &col(&|v| v.index as f64),
            ],
        )?;
    }
    Ok(out)
}

fn phi_at(w: &WaveProfile, xi: f64) -> f64 {
    interp_cubic(&w.grid, &w.values, xi).unwrap_or_else(|| w.at_extended(xi))
}

/// Angle field `theta' = -(1/d)(P(tan theta; xi) - mu) cos^2 theta`, written
/// without `tan` so it stays finite at `pi/2`.
pub fn polar_f(p: &ModelParams, c: f64, mu: f64, theta: f64, phi: f64) -> f64 {
    let (s, co) = theta.sin_cos();
    -(p.d * s * s + c * s * co + (p.r * (1.0 - p.b * phi) - mu) * co * co) / p.d
}

/// Log-radius field; `rho' = sin cos [1 + (mu - r(1 - b Phi))/d] - (c/d) sin^2`.
pub fn polar_rho(p: &ModelParams, c: f64, mu: f64, theta: f64, phi: f64) -> f64 {
    let (s, co) = theta.sin_cos();
    s * co * (1.0 + (mu - p.r * (1.0 - p.b * phi)) / p.d) - c / p.d * s * s
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarTrajectory {
    pub xi: Vec<f64>,
    pub theta: Vec<f64>,
    pub r_log: Vec<f64>,
    pub lambda_plus: f64,
    pub theta_floor: f64,
    pub theta_limit: f64,
    /// Smallest margin to the interval ends seen at accepted steps.
    pub min_margin: f64,
}

impl PolarTrajectory {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_columns(
            path,
            &[
                ("lambda_plus".into(), format!("{:.16e}", self.lambda_plus)),
                ("theta_floor".into(), format!("{:.16e}", self.theta_floor)),
                ("theta_limit".into(), format!("{:.16e}", self.theta_limit)),
            ],
            &["xi", "theta", "r_log"],
            &[&self.xi, &self.theta, &self.r_log],
        )
    }
}

// Dormand-Prince 5(4)
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate the angle/log-radius pair from `xi0` to the right end of the
/// wave grid, sampling on a uniform grid by cubic Hermite dense output.
pub fn polar_shoot(
    p: &ModelParams,
    c: f64,
    mu: f64,
    phi_c: &WaveProfile,
    theta0: f64,
    xi0: f64,
) -> Result<PolarTrajectory> {
    let lo_mu = (p.r * (1.0 - p.b)).max(p.r - c * c / (4.0 * p.d));
    if !(mu > lo_mu && mu < p.r) {
        return Err(LabError::DomainError(format!("mu = {mu} outside ({lo_mu}, {})", p.r)));
    }
    let roots = characteristic_roots(p, c, Complex64::new(mu, 0.0));
    let lambda_plus = roots.lambda.0.re;
    let floor = lambda_plus.atan();
    let top = std::f64::consts::FRAC_PI_2;
    if !(theta0 > floor && theta0 < top) {
        return Err(LabError::DomainError(format!("theta0 = {theta0} outside ({floor}, pi/2)")));
    }
    let xi_end = phi_c.grid.x_max;
    if !(xi0 < xi_end) {
        return Err(LabError::DomainError("xi0 must lie left of the grid end".into()));
    }
    let rhs = |xi: f64, y: [f64; 2]| -> [f64; 2] {
        let ph = phi_at(phi_c, xi);
        [polar_f(p, c, mu, y[0], ph), polar_rho(p, c, mu, y[0], ph)]
    };
    let tol = 1e-10;
    let sample_h = phi_c.grid.h();
    let mut xs = vec![xi0];
    let mut th = vec![theta0];
    let mut rl = vec![0.0];
    let mut next_sample = xi0 + sample_h;
    let mut x = xi0;
    let mut y = [theta0, 0.0];
    let mut f0 = rhs(x, y);
    let mut dt: f64 = 1e-3;
    let mut min_margin = f64::INFINITY;
    while x < xi_end {
        dt = dt.min(xi_end - x);
        let mut k = [[0.0; 2]; 7];
        k[0] = f0;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys[0] += dt * A[s][j] * kj[0];
                ys[1] += dt * A[s][j] * kj[1];
            }
            k[s] = rhs(x + C[s] * dt, ys);
        }
        let mut y5 = y;
        let mut err: f64 = 0.0;
        for comp in 0..2 {
            let mut e = 0.0;
            for s in 0..7 {
                y5[comp] += dt * B5[s] * k[s][comp];
                e += dt * (B5[s] - B4[s]) * k[s][comp];
            }
            let scale = if comp == 0 { 1.0 } else { 1.0 + y[1].abs() };
            err = err.max(e.abs() / scale);
        }
        if err <= tol || dt < 1e-12 {
            let x1 = x + dt;
            let f1 = k[6];
            while next_sample <= x1 + 1e-12 && next_sample <= xi_end + 1e-12 {
                let s = ((next_sample - x) / dt).clamp(0.0, 1.0);
                let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
                let h10 = s.powi(3) - 2.0 * s * s + s;
                let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
                let h11 = s.powi(3) - s * s;
                let at = |c: usize| h00 * y[c] + h10 * dt * f0[c] + h01 * y5[c] + h11 * dt * f1[c];
                xs.push(next_sample);
                th.push(at(0));
                rl.push(at(1));
                next_sample += sample_h;
            }
            x = x1;
            y = y5;
            f0 = f1;
            let margin = (y[0] - floor).min(top - y[0]);
            min_margin = min_margin.min(margin);
            if margin < -1e-9 {
                return Err(LabError::InvarianceViolation(format!(
                    "theta = {} left ({floor}, pi/2) at xi = {x}",
                    y[0]
                )));
            }
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) };
        dt *= fac;
    }
    let m = (xs.len() / 20).max(1);
    let theta_limit = th[th.len() - m..].iter().sum::<f64>() / m as f64;
    Ok(PolarTrajectory {
        xi: xs,
        theta: th,
        r_log: rl,
        lambda_plus,
        theta_floor: floor,
        theta_limit,
        min_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::wave_profiles::{solve_kpp_wave_normalized, Normalization};

    fn p0() -> ModelParams {
        ModelParams::new(0.5, 0.5, 1.0, 1.0).unwrap()
    }

    fn close(z: Complex64, re: f64) -> bool {
        (z.re - re).abs() < 1e-12 && z.im.abs() < 1e-12
    }

    #[test]
    fn roots_oracles() {
        let r = characteristic_roots(&p0(), 2.5, Complex64::new(1.0, 0.0));
        assert!(close(r.lambda.0, 0.0) && close(r.lambda.1, -2.5));
        let r = characteristic_roots(&p0(), 2.5, Complex64::new(0.5, 0.0));
        assert!(close(r.lambda_tilde.0, 0.0) && close(r.lambda_tilde.1, -2.5));
        let r = characteristic_roots(&p0(), 2.5, Complex64::new(0.54, 0.0));
        let s = 6.41f64.sqrt();
        assert!(close(r.lambda_tilde.0, (-2.5 + s) / 2.0));
        assert!(close(r.lambda_tilde.1, (-2.5 - s) / 2.0));
        let mu = Complex64::new(0.3, 0.7);
        let r = characteristic_roots(&p0(), 2.5, mu);
        for l in [r.lambda.0, r.lambda.1] {
            assert!((l * l + 2.5 * l + 1.0 - mu).norm() < 1e-12);
        }
    }

    #[test]
    fn region_oracles() {
        let v = classify_mu(&p0(), 2.5, Complex64::new(1.5, 0.0));
        assert_eq!((v.region, v.i_plus, v.i_minus, v.index), (Region::Omega1, 1, 1, 0));
        let v = classify_mu(&p0(), 2.5, Complex64::new(0.54, 0.0));
        assert_eq!((v.region, v.index), (Region::Omega3, 1));
        let v = classify_mu(&p0(), 2.5, Complex64::new(0.2, 0.0));
        assert_eq!((v.region, v.index), (Region::Omega2, 0));
        let v = classify_mu(&p0(), 2.5, Complex64::new(0.5, 0.0));
        assert_eq!(v.region, Region::OnBoundary);
        // a point on Gamma_+ = {P_+(ik)}
        let k: f64 = 0.8;
        let on = Complex64::new(1.0 - k * k, 2.5 * k);
        assert_eq!(classify_mu(&p0(), 2.5, on).region, Region::OnBoundary);
    }

    #[test]
    fn polar_field_values() {
        let p = ModelParams::new(0.5, 0.5, 3.0, 1.0).unwrap();
        for phi in [0.0, 0.3, 1.0] {
            assert!((polar_f(&p, 2.5, 0.7, std::f64::consts::FRAC_PI_2, phi) + 1.0).abs() < 1e-12);
        }
        let p = p0();
        let lp = characteristic_roots(&p, 2.5, Complex64::new(0.54, 0.0)).lambda.0.re;
        assert!((lp + 0.2).abs() < 1e-12);
        let phi = 0.37;
        let f = polar_f(&p, 2.5, 0.54, lp.atan(), phi);
        assert!((f - p.r * p.b * phi / (p.d * (lp * lp + 1.0))).abs() < 1e-12);
    }

    #[test]
    fn shoot_recovers_tail_angle() {
        let g = GridSpec::new(-60.0, 60.0, 2401).unwrap();
        let w = solve_kpp_wave_normalized(2.5, 1.0, 1.0, g, Normalization::TailUnit).unwrap();
        let tr = polar_shoot(&p0(), 2.5, 0.54, &w, 1.0, -20.0).unwrap();
        assert!(tr.min_margin > -1e-9);
        let target = (-0.2f64).atan();
        assert!(((tr.theta_limit - target) / target).abs() < 0.01);
        assert!(matches!(
            polar_shoot(&p0(), 2.5, 0.3, &w, 1.0, -20.0),
            Err(LabError::DomainError(_))
        ));
    }
}
