//! Linearized eigenpairs around `(Phi_c, 0)` and `(0, Psi_{c_v})`.
//!
//! All problems are linear two-point BVPs discretized with the same stencil
//! as the integrator, so the discrete sub/super-solutions built from them are
//! exact for the semi-discrete system.

use std::path::Path;

use crate::error::{LabError, Result};
use crate::grid::{Advection, Banded, Bc, GridSpec, Stencil};
use crate::io::write_columns;
use crate::speed_atlas::{
    admissible_lambda_upper, delta_v, g_eval, limiting_lambda3, merging_constants, ModelParams,
};
use crate::stats::median;
use crate::wave_profiles::{kpp_left_rate, kpp_tail_rate, WaveProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenKind {
    /// Around `(Phi_c, 0)` with `mu = g(lambda)`.
    Divergent,
    /// Same operator with `mu = r(1-b)`, `lambda = lambda_3`, `delta_v = 0`.
    Limiting,
    /// Around `(0, Psi_{c_v})` with rate `1-a`; signs flipped.
    Merging,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsiEnvelope {
    pub d: f64,
    pub lambda_tilde: f64,
    pub k0: f64,
    pub eps2: f64,
    pub x2: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Largest discrete residual of the upper function (should be <= 0).
    pub upper_residual: f64,
    /// Smallest discrete residual of the lower function where positive (should be >= 0).
    pub lower_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub kind: EigenKind,
    pub grid: GridSpec,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub mu: f64,
    pub lambda: f64,
    pub delta_v: f64,
    pub upsilon: f64,
    pub base_wave: WaveProfile,
    pub envelope: Option<PsiEnvelope>,
    pub residual_phi: f64,
    pub residual_psi: f64,
    /// Boundary conditions used for (phi, psi), reused by the integrator.
    pub bc_phi: (Bc, Bc),
    pub bc_psi: (Bc, Bc),
}

impl EigenPair {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let x = self.grid.nodes();
        let zeros = vec![0.0; self.grid.n];
        let (lo, up) = match &self.envelope {
            Some(e) => (&e.lower, &e.upper),
            None => (&zeros, &zeros),
        };
        let meta = vec![
            ("kind".to_string(), format!("{:?}", self.kind)),
            ("mu".to_string(), format!("{:.16e}", self.mu)),
            ("lambda".to_string(), format!("{:.16e}", self.lambda)),
            ("delta_v".to_string(), format!("{:.16e}", self.delta_v)),
            ("upsilon".to_string(), format!("{:.16e}", self.upsilon)),
        ];
        write_columns(
            path,
            &meta,
            &["x", "phi", "psi", "envelope_lower", "envelope_upper"],
            &[&x, &self.phi, &self.psi, lo, up],
        )
    }

    /// `max{||phi + a psi||, r ||b phi + psi||}` (the same with roles of the
    /// flipped pair for the merging variant).
    pub fn gauge_floor(&self, p: &ModelParams) -> f64 {
        let n = self.grid.n;
        let mut m1: f64 = 0.0;
        let mut m2: f64 = 0.0;
        for i in 0..n {
            m1 = m1.max((self.phi[i] + p.a * self.psi[i]).abs());
            m2 = m2.max((p.b * self.phi[i] + self.psi[i]).abs());
        }
        m1.max(p.r * m2)
    }

    /// Largest of `(phi + a psi)` and `r(b phi + psi)` over the grid; the
    /// sub/super computation only needs `M` above these signed values.
    pub fn gauge_floor_signed(&self, p: &ModelParams) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for i in 0..self.grid.n {
            m = m.max(self.phi[i] + p.a * self.psi[i]);
            m = m.max(p.r * (p.b * self.phi[i] + self.psi[i]));
        }
        m
    }
}

/// Row operator `diff u'' + adv u' + coef_i u` plus boundary closure, as a
/// banded matrix; Dirichlet rows become identity rows.
fn assemble(st: &Stencil, coef: &[f64]) -> Banded {
    let n = coef.len();
    let mut m = Banded::new(n, 1, 1);
    for i in 0..n {
        if st.is_fixed(i, n) {
            m.set(i, i, 1.0);
            continue;
        }
        m.set(i, i, st.diag[i] + coef[i]);
        if i > 0 {
            m.set(i, i - 1, st.lower[i]);
        }
        if i + 1 < n {
            m.set(i, i + 1, st.upper[i]);
        }
    }
    m
}

fn residual(st: &Stencil, coef: &[f64], u: &[f64], forcing: &[f64]) -> f64 {
    let n = u.len();
    (0..n)
        .filter(|i| !st.is_fixed(*i, n))
        .map(|i| (st.apply_at(u, i) + coef[i] * u[i] - forcing[i]).abs())
        .fold(0.0, f64::max)
}

fn rhs_with_bc(st: &Stencil, forcing: &[f64]) -> Vec<f64> {
    let n = forcing.len();
    let mut rhs: Vec<f64> = (0..n).map(|i| forcing[i] - st.konst[i]).collect();
    if let Some(w) = st.fixed_left {
        rhs[0] = w;
    }
    if let Some(w) = st.fixed_right {
        rhs[n - 1] = w;
    }
    rhs
}

fn scheme(diff: f64, adv: f64, grid: &GridSpec) -> Advection {
    Stencil::auto_scheme(diff, adv, grid.h())
}

/// Envelopes of the psi-problem.
pub fn build_psi_envelope(c: f64, lambda: f64, p: &ModelParams, phi_c: &WaveProfile) -> Result<PsiEnvelope> {
    let mu = g_eval(p, c, lambda);
    if !(lambda > 0.0 && lambda < c / (2.0 * p.d)) || mu < p.r * (1.0 - p.b).max(0.0) - 1e-14 {
        return Err(LabError::NotAdmissible(format!("lambda = {lambda} outside (0, c/2d) or g too small")));
    }
    let grid = phi_c.grid;
    let tau_c = kpp_tail_rate(c, 1.0, 1.0);
    let tau_tilde = kpp_left_rate(c, 1.0, 1.0);
    let dv = delta_v(p, c, mu)?;
    let lt = lambda + (tau_c.min(c / (2.0 * p.d) - lambda)) / 2.0;
    // Phi_c <= A e^{-tau_c x}; A = 1 for the tail-normalized wave
    let amp = phi_c.decay.tail_amplitude.max(1.0);
    let dcoef = 2.0 * p.r * p.b * amp / (g_eval(p, c, lambda) - g_eval(p, c, lt));
    let eps2 = tau_tilde / 2.0;
    let x = grid.nodes();
    let n = grid.n;
    let st = Stencil::build_with(
        &grid,
        p.d,
        c,
        Bc::Robin { rate: dv, target: 0.0 },
        Bc::Neumann,
        scheme(p.d, c, &grid),
    );
    let coef: Vec<f64> = phi_c.values.iter().map(|ph| p.r * (1.0 - p.b * ph) - mu).collect();
    let lower: Vec<f64> = x
        .iter()
        .map(|xi| ((-lambda * xi).exp() - dcoef * (-lt * xi).exp()).max(0.0))
        .collect();
    let w1: Vec<f64> = x.iter().map(|xi| (dv * xi).exp() * (1.0 - (eps2 * xi).exp())).collect();
    let w2: Vec<f64> = x.iter().map(|xi| (-lambda * xi).exp()).collect();
    let res = |w: &[f64], i: usize| st.apply_at(w, i) + coef[i] * w[i];
    let tol = |w: f64| 1e-10 * w.abs().max(1.0);
    // prefix: w1 residual ok on [0, i]; suffix: w2 residual ok on [i, n-2]
    let mut pre = vec![false; n];
    let mut ok = true;
    for i in 0..n {
        ok = ok && x[i] < 0.0 && res(&w1, i) <= tol(w1[i]);
        pre[i] = ok;
    }
    let mut suf = vec![false; n + 1];
    suf[n] = true;
    suf[n - 1] = true; // Dirichlet row
    for i in (0..n - 1).rev() {
        suf[i] = suf[i + 1] && res(&w2, i) <= tol(w2[i]);
    }
    let mut chosen = None;
    for j in (1..n - 2).rev() {
        if !pre[j - 1] || !suf[j + 2] || x[j] >= 0.0 {
            continue;
        }
        let k0 = w2[j] / w1[j];
        let mut up = vec![0.0; 3];
        let mut ok = true;
        for (slot, node) in [j, j + 1].iter().enumerate() {
            let i = *node;
            for (k, q) in [i - 1, i, i + 1].iter().enumerate() {
                up[k] = if *q <= j { k0 * w1[*q] } else { w2[*q] };
            }
            let r = st.lower[i] * up[0] + st.diag[i] * up[1] + st.upper[i] * up[2] + coef[i] * up[1];
            let _ = slot;
            ok = ok && r <= tol(up[1]);
        }
        if ok {
            chosen = Some(j);
            break;
        }
    }
    let j = chosen.ok_or_else(|| LabError::EnvelopeFailure("no junction satisfies the discrete inequalities".into()))?;
    let x2 = x[j];
    let k0 = (-lambda * x2).exp() / ((dv * x2).exp() * (1.0 - (eps2 * x2).exp()));
    let upper: Vec<f64> = (0..n).map(|i| if i <= j { k0 * w1[i] } else { w2[i] }).collect();
    let upper_residual = (0..n - 1).map(|i| res(&upper, i)).fold(f64::NEG_INFINITY, f64::max);
    let mut lower_residual = f64::INFINITY;
    for i in 1..n - 1 {
        if lower[i - 1] > 0.0 && lower[i] > 0.0 && lower[i + 1] > 0.0 {
            lower_residual = lower_residual.min(res(&lower, i));
        }
    }
    for i in 0..n {
        if lower[i] > upper[i] + 1e-12 {
            return Err(LabError::EnvelopeFailure(format!("lower above upper at x = {}", x[i])));
        }
    }
    Ok(PsiEnvelope {
        d: dcoef,
        lambda_tilde: lt,
        k0,
        eps2,
        x2,
        lower,
        upper,
        upper_residual,
        lower_residual,
    })
}

/// `mu psi = d psi'' + c psi' + r(1 - b Phi_c) psi`, Robin rate `delta_v` on the
/// left, `psi(x_max) = e^{-lambda x_max}`.
pub fn solve_psi(c: f64, lambda: f64, p: &ModelParams, phi_c: &WaveProfile, grid: GridSpec) -> Result<Vec<f64>> {
    Ok(solve_psi_full(c, lambda, p, phi_c, grid)?.0)
}

fn solve_psi_full(c: f64, lambda: f64, p: &ModelParams, phi_c: &WaveProfile, grid: GridSpec) -> Result<(Vec<f64>, f64, (Bc, Bc))> {
    if !grid.same_as(&phi_c.grid) {
        return Err(LabError::GridMismatch("psi grid differs from the wave grid".into()));
    }
    let mu = g_eval(p, c, lambda);
    let dv = delta_v(p, c, mu)?;
    let bcs = (
        Bc::Robin { rate: dv, target: 0.0 },
        Bc::Dirichlet((-lambda * grid.x_max).exp()),
    );
    let st = Stencil::build_with(&grid, p.d, c, bcs.0, bcs.1, scheme(p.d, c, &grid));
    let coef: Vec<f64> = phi_c.values.iter().map(|ph| p.r * (1.0 - p.b * ph) - mu).collect();
    let zero = vec![0.0; grid.n];
    let psi = assemble(&st, &coef).solve(&rhs_with_bc(&st, &zero))?;
    let res = residual(&st, &coef, &psi, &zero);
    if res > 1e-9 {
        return Err(LabError::NonConvergence(format!("psi residual {res:e}")));
    }
    Ok((psi, res, bcs))
}

/// Left decay rate of phi: the forced rate `delta_v` unless the homogeneous
/// mode decays more slowly.
fn phi_left_rate(c: f64, mu: f64, dv: f64) -> f64 {
    let kp = (-c + (c * c + 4.0 * (1.0 + mu)).sqrt()) / 2.0;
    dv.min(kp)
}

/// `mu phi = phi'' + c phi' + (1 - 2 Phi_c) phi - a Phi_c psi`, solved through
/// the scaled unknown `phi / Phi_c`.
pub fn solve_phi(psi: &[f64], phi_c: &WaveProfile, mu: f64, a: f64, grid: GridSpec) -> Result<Vec<f64>> {
    let c = phi_c.speed;
    // forced left rate read off psi itself
    let dv = if psi[0] > 0.0 && psi[1] > 0.0 { ((psi[1] / psi[0]).ln() / grid.h()).max(0.0) } else { 0.0 };
    let left = Bc::Robin { rate: phi_left_rate(c, mu, dv), target: 0.0 };
    Ok(solve_phi_bc(psi, phi_c, mu, a, grid, left)?.0)
}

fn solve_phi_bc(psi: &[f64], phi_c: &WaveProfile, mu: f64, a: f64, grid: GridSpec, left: Bc) -> Result<(Vec<f64>, f64, (Bc, Bc))> {
    if !grid.same_as(&phi_c.grid) {
        return Err(LabError::GridMismatch("phi grid differs from the wave grid".into()));
    }
    let c = phi_c.speed;
    let n = grid.n;
    let bcs = (left, Bc::Dirichlet(0.0));
    let st = Stencil::build_with(&grid, 1.0, c, bcs.0, bcs.1, scheme(1.0, c, &grid));
    let w = &phi_c.values;
    let coef: Vec<f64> = w.iter().map(|ph| 1.0 - 2.0 * ph - mu).collect();
    // scaled matrix A diag(Phi_c): off-diagonals >= 0, row sums < 0
    for i in 0..n - 1 {
        let mut s = (st.diag[i] + coef[i]) * w[i];
        let mut off_ok = true;
        if i > 0 {
            s += st.lower[i] * w[i - 1];
            off_ok &= st.lower[i] >= 0.0;
        }
        s += st.upper[i] * w[i + 1];
        off_ok &= st.upper[i] >= 0.0;
        if !(s < 0.0) || !off_ok {
            return Err(LabError::SingularSystem(format!(
                "scaled phi operator not diagonally dominant at x = {}",
                grid.x(i)
            )));
        }
    }
    let forcing: Vec<f64> = (0..n).map(|i| a * w[i] * psi[i]).collect();
    let mut m = Banded::new(n, 1, 1);
    for i in 0..n {
        if st.is_fixed(i, n) {
            m.set(i, i, 1.0);
            continue;
        }
        m.set(i, i, (st.diag[i] + coef[i]) * w[i]);
        if i > 0 {
            m.set(i, i - 1, st.lower[i] * w[i - 1]);
        }
        if i + 1 < n {
            m.set(i, i + 1, st.upper[i] * w[i + 1]);
        }
    }
    let rhs = rhs_with_bc(&st, &forcing);
    let tilde = m.solve(&rhs)?;
    let phi: Vec<f64> = (0..n).map(|i| tilde[i] * w[i]).collect();
    let res = residual(&st, &coef, &phi, &forcing);
    if res > 1e-9 {
        return Err(LabError::NonConvergence(format!("phi residual {res:e}")));
    }
    Ok((phi, res, bcs))
}

fn upsilon_of(grid: &GridSpec, vals: &[f64], rate: f64) -> f64 {
    let m = (grid.n / 10).max(1);
    median((0..m).map(|i| (-rate * grid.x(i)).exp() * vals[i]).collect())
}

/// Eigenpair around `(Phi_c, 0)` for an admissible `lambda`.
pub fn solve_divergent(p: &ModelParams, c: f64, lambda: f64, phi_c: &WaveProfile) -> Result<EigenPair> {
    let upper = admissible_lambda_upper(p, c)?;
    if !(lambda > 0.0 && lambda < upper && lambda < (p.r / p.d).sqrt()) {
        return Err(LabError::NotAdmissible(format!("lambda = {lambda} not in (0, {upper})")));
    }
    solve_around_phi_c(EigenKind::Divergent, p, c, lambda, phi_c)
}

/// Limiting variant with `lambda = lambda_3` and `mu = r(1-b)`.
pub fn solve_variant_weak(p: &ModelParams, c: f64, phi_c: &WaveProfile, grid: GridSpec) -> Result<EigenPair> {
    if !grid.same_as(&phi_c.grid) {
        return Err(LabError::GridMismatch("variant grid differs from the wave grid".into()));
    }
    let (l3, _) = limiting_lambda3(p, c)?;
    solve_around_phi_c(EigenKind::Limiting, p, c, l3, phi_c)
}

fn solve_around_phi_c(kind: EigenKind, p: &ModelParams, c: f64, lambda: f64, phi_c: &WaveProfile) -> Result<EigenPair> {
    if (phi_c.speed - c).abs() > 1e-12 || phi_c.d != 1.0 || phi_c.r != 1.0 {
        return Err(LabError::DomainError("base wave must be Phi_c with d = r = 1".into()));
    }
    let grid = phi_c.grid;
    let mu = match kind {
        EigenKind::Limiting => p.r * (1.0 - p.b),
        _ => g_eval(p, c, lambda),
    };
    let env = build_psi_envelope(c, lambda, p, phi_c)?;
    let (psi, res_psi, bc_psi) = solve_psi_full(c, lambda, p, phi_c, grid)?;
    let dv = match kind {
        EigenKind::Limiting => 0.0,
        _ => delta_v(p, c, mu)?,
    };
    for i in 0..grid.n {
        let over = psi[i] - env.upper[i];
        let under = env.lower[i] - psi[i];
        if over > 1e-8 || under > 1e-8 {
            return Err(LabError::EnvelopeViolation { violation: over.max(under), x: grid.x(i) });
        }
    }
    let left = Bc::Robin { rate: phi_left_rate(c, mu, dv), target: 0.0 };
    let (phi, res_phi, bc_phi) = solve_phi_bc(&psi, phi_c, mu, p.a, grid, left)?;
    let upsilon = upsilon_of(&grid, &psi, dv);
    Ok(EigenPair {
        kind,
        grid,
        phi,
        psi,
        mu,
        lambda,
        delta_v: dv,
        upsilon,
        base_wave: phi_c.clone(),
        envelope: Some(env),
        residual_phi: res_phi,
        residual_psi: res_psi,
        bc_phi,
        bc_psi,
    })
}

/// Eigenpair around `(0, Psi_{c_v})` with rate `1-a`: `phi_hat > 0 > psi_hat`.
pub fn solve_variant_hat(p: &ModelParams, c_v: f64, psi_cv: &WaveProfile, grid: GridSpec) -> Result<EigenPair> {
    if !(p.a < 1.0 && p.b > 1.0) {
        return Err(LabError::WrongRegime("merging variant needs 0 < a < 1 < b".into()));
    }
    if !grid.same_as(&psi_cv.grid) {
        return Err(LabError::GridMismatch("variant grid differs from the wave grid".into()));
    }
    let (l4, _) = merging_constants(p, c_v)?;
    let mu = 1.0 - p.a;
    let n = grid.n;
    let w = &psi_cv.values;
    // phi_hat'' + c_v phi_hat' + a(1 - Psi) phi_hat = 0
    let bc_phi = (Bc::Neumann, Bc::Dirichlet((-l4 * grid.x_max).exp()));
    let st = Stencil::build_with(&grid, 1.0, c_v, bc_phi.0, bc_phi.1, scheme(1.0, c_v, &grid));
    let coef: Vec<f64> = w.iter().map(|s| p.a * (1.0 - s)).collect();
    let zero = vec![0.0; n];
    let phi = assemble(&st, &coef).solve(&rhs_with_bc(&st, &zero))?;
    let res_phi = residual(&st, &coef, &phi, &zero);
    // d psi'' + c_v psi' + (r(1 - 2 Psi) - (1-a)) psi = r b Psi phi_hat
    let bc_psi = (Bc::Neumann, Bc::Dirichlet(0.0));
    let sv = Stencil::build_with(&grid, p.d, c_v, bc_psi.0, bc_psi.1, scheme(p.d, c_v, &grid));
    let coef_v: Vec<f64> = w.iter().map(|s| p.r * (1.0 - 2.0 * s) - mu).collect();
    let forcing: Vec<f64> = (0..n).map(|i| p.r * p.b * w[i] * phi[i]).collect();
    let psi = assemble(&sv, &coef_v).solve(&rhs_with_bc(&sv, &forcing))?;
    let res_psi = residual(&sv, &coef_v, &psi, &forcing);
    if res_phi > 1e-9 || res_psi > 1e-9 {
        return Err(LabError::NonConvergence(format!(
            "merging eigen residuals {res_phi:e}, {res_psi:e}"
        )));
    }
    let upsilon = upsilon_of(&grid, &phi, 0.0);
    Ok(EigenPair {
        kind: EigenKind::Merging,
        grid,
        phi,
        psi,
        mu,
        lambda: l4,
        delta_v: 0.0,
        upsilon,
        base_wave: psi_cv.clone(),
        envelope: None,
        residual_phi: res_phi,
        residual_psi: res_psi,
        bc_phi,
        bc_psi,
    })
}

/// Largest forward difference of `e^{-rate x} f(x)` (nonpositive when nonincreasing).
pub fn max_forward_increase(grid: &GridSpec, f: &[f64], rate: f64) -> f64 {
    (0..grid.n - 1)
        .map(|i| (-rate * grid.x(i + 1)).exp() * f[i + 1] - (-rate * grid.x(i)).exp() * f[i])
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave_profiles::{solve_kpp_wave_normalized, Normalization};

    fn p0() -> ModelParams {
        ModelParams::new(0.5, 0.5, 1.0, 1.0).unwrap()
    }

    fn phi_c() -> WaveProfile {
        let g = GridSpec::new(-60.0, 60.0, 2401).unwrap();
        solve_kpp_wave_normalized(2.5, 1.0, 1.0, g, Normalization::TailUnit).unwrap()
    }

    #[test]
    fn envelope_constants() {
        let w = phi_c();
        let e = build_psi_envelope(2.5, 0.2, &p0(), &w).unwrap();
        assert!((e.lambda_tilde - 0.45).abs() < 1e-12);
        // g(0.2) - g(0.45) = 0.54 - 0.0775
        assert!((e.d - 1.0 / 0.4625).abs() < 1e-12);
        let x = w.grid.nodes();
        for i in 0..w.grid.n {
            if x[i] <= e.d.ln() / (e.lambda_tilde - 0.2) {
                assert_eq!(e.lower[i], 0.0);
            }
            assert!(e.lower[i] <= e.upper[i]);
        }
        assert!(e.upper_residual <= 1e-10);
    }

    #[test]
    fn psi_properties() {
        let w = phi_c();
        let ep = solve_divergent(&p0(), 2.5, 0.2, &w).unwrap();
        let g = ep.grid;
        let n = g.n;
        assert!(((0.2 * g.x_max).exp() * ep.psi[n - 1] - 1.0).abs() < 1e-14);
        let k = g.nearest(g.x_max - 5.0);
        assert!(((0.2 * g.x(k)).exp() * ep.psi[k] - 1.0).abs() < 1e-3);
        assert!(max_forward_increase(&g, &ep.psi, ep.delta_v) <= 1e-10);
        for i in 1..n - 1 {
            assert!(ep.phi[i] < 0.0 && ep.psi[i] > 0.0);
        }
        assert!(ep.residual_phi < 1e-9 && ep.residual_psi < 1e-9);
        // phi / Phi_c -> 0 on the right; on the left phi follows the forced rate
        assert!((ep.phi[n - 2] / w.values[n - 2]).abs() < 1e-4);
    }

    #[test]
    fn phi_linear_in_a() {
        let w = phi_c();
        let g = w.grid;
        let psi = solve_psi(2.5, 0.2, &p0(), &w, g).unwrap();
        let zero = solve_phi(&psi, &w, 0.54, 0.0, g).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
        let one = solve_phi(&psi, &w, 0.54, 0.5, g).unwrap();
        let two = solve_phi(&psi, &w, 0.54, 1.0, g).unwrap();
        for i in 0..g.n {
            assert!((two[i] - 2.0 * one[i]).abs() < 1e-12 * (1.0 + one[i].abs()));
        }
    }

    #[test]
    fn limiting_variant() {
        let w = phi_c();
        let ep = solve_variant_weak(&p0(), 2.5, &w, w.grid).unwrap();
        assert!((ep.mu - 0.5).abs() < 1e-15);
        assert!((ep.lambda - 0.219224).abs() < 1e-6);
        assert_eq!(ep.delta_v, 0.0);
        assert!(max_forward_increase(&ep.grid, &ep.psi, 0.0) <= 1e-10);
        assert!(ep.upsilon > 0.0);
        for i in 1..ep.grid.n - 1 {
            assert!(ep.phi[i] < 0.0 && ep.psi[i] > 0.0);
        }
    }

    #[test]
    fn merging_variant() {
        let p = ModelParams::new(0.5, 2.0, 1.0, 1.0).unwrap();
        let g = GridSpec::new(-60.0, 60.0, 2401).unwrap();
        let psi_cv = solve_kpp_wave_normalized(3.0, 1.0, 1.0, g, Normalization::TailUnit).unwrap();
        let ep = solve_variant_hat(&p, 3.0, &psi_cv, psi_cv.grid).unwrap();
        let n = ep.grid.n;
        for i in 0..n - 1 {
            assert!(ep.phi[i] > 0.0);
            if i > 0 {
                assert!(ep.psi[i] < 0.0);
            }
        }
        assert!(ep.upsilon > 0.0 && ep.upsilon.is_finite());
        // psi_hat vanishes on the right and tends to -r b Upsilon / (r + 1 - a) on the left
        assert!(ep.psi[n - 1].abs() < 1e-5);
        let left = -p.r * p.b * ep.upsilon / (p.r + 1.0 - p.a);
        assert!((ep.psi[0] - left).abs() < 1e-5 * left.abs().max(1.0), "{} vs {left}", ep.psi[0]);
        assert!(matches!(
            solve_variant_hat(&p0(), 3.0, &psi_cv, psi_cv.grid),
            Err(LabError::WrongRegime(_))
        ));
    }
}
