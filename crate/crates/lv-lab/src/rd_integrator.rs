//! Order-preserving IMEX integrator for the competition system in a frame
//! moving with speed `frame_speed` (`xi = x - frame_speed * t`).

use crate::error::{LabError, Result};
use crate::grid::{Advection, Bc, GridSpec, Stencil};
use crate::io::write_columns;
use crate::speed_atlas::ModelParams;

#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub grid: GridSpec,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub frame_speed: f64,
    pub time: f64,
}

impl StatePair {
    pub fn new(grid: GridSpec, u: Vec<f64>, v: Vec<f64>, frame_speed: f64, time: f64) -> Self {
        assert_eq!(u.len(), grid.n);
        assert_eq!(v.len(), grid.n);
        StatePair { grid, u, v, frame_speed, time }
    }

    pub fn constant(grid: GridSpec, u: f64, v: f64) -> Self {
        StatePair::new(grid, vec![u; grid.n], vec![v; grid.n], 0.0, 0.0)
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let x = self.grid.nodes();
        let meta = vec![
            ("time".to_string(), format!("{:.16e}", self.time)),
            ("frame_speed".to_string(), format!("{:.16e}", self.frame_speed)),
        ];
        write_columns(path, &meta, &["x", "u", "v"], &[&x, &self.u, &self.v])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcPair {
    pub u: Bc,
    pub v: Bc,
}

impl BcPair {
    pub fn neumann() -> Self {
        BcPair { u: Bc::Neumann, v: Bc::Neumann }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub left: BcPair,
    pub right: BcPair,
    /// Bound on the reaction Jacobian; derived from the initial data when `None`.
    pub reaction_lipschitz_cap: Option<f64>,
    /// Advection scheme; chosen from the cell Peclet number when `None`.
    pub advection: Option<Advection>,
}

impl IntegratorConfig {
    pub fn new(dt: f64, left: BcPair, right: BcPair) -> Self {
        IntegratorConfig {
            dt,
            left,
            right,
            reaction_lipschitz_cap: None,
            advection: None,
        }
    }
}

/// `L = max{1 + 2 u_cap + a v_cap, r (1 + 2 v_cap + b u_cap)}`.
pub fn reaction_lipschitz(p: &ModelParams, u_cap: f64, v_cap: f64) -> f64 {
    (1.0 + 2.0 * u_cap + p.a * v_cap).max(p.r * (1.0 + 2.0 * v_cap + p.b * u_cap))
}

struct TriFactor {
    dt: f64,
    a: Vec<f64>,
    cp: Vec<f64>,
    inv: Vec<f64>,
    fixed: Vec<Option<f64>>,
    konst: Vec<f64>,
}

impl TriFactor {
    fn new(st: &Stencil, dt: f64) -> Result<TriFactor> {
        let n = st.diag.len();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut fixed = vec![None; n];
        let mut konst = vec![0.0; n];
        for i in 0..n {
            if st.is_fixed(i, n) {
                fixed[i] = if i == 0 { st.fixed_left } else { st.fixed_right };
                b[i] = 1.0;
                continue;
            }
            a[i] = -dt * st.lower[i];
            b[i] = 1.0 - dt * st.diag[i];
            c[i] = -dt * st.upper[i];
            konst[i] = dt * st.konst[i];
            if a[i] > 0.0 || c[i] > 0.0 {
                return Err(LabError::SingularSystem(format!(
                    "implicit operator is not an M-matrix at row {i}"
                )));
            }
        }
        let mut cp = vec![0.0; n];
        let mut inv = vec![0.0; n];
        inv[0] = 1.0 / b[0];
        cp[0] = c[0] * inv[0];
        for i in 1..n {
            let piv = b[i] - a[i] * cp[i - 1];
            if piv <= 0.0 {
                return Err(LabError::SingularSystem(format!("nonpositive pivot at row {i}")));
            }
            inv[i] = 1.0 / piv;
            cp[i] = c[i] * inv[i];
        }
        Ok(TriFactor { dt, a, cp, inv, fixed, konst })
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 0..n {
            if let Some(w) = self.fixed[i] {
                x[i] = w;
            } else {
                x[i] += self.konst[i];
            }
        }
        x[0] *= self.inv[0];
        for i in 1..n {
            x[i] = (x[i] - self.a[i] * x[i - 1]) * self.inv[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.cp[i] * x[i + 1];
        }
    }
}

/// Reusable integrator with cached factorizations.
pub struct Integrator {
    pub grid: GridSpec,
    pub params: ModelParams,
    pub frame_speed: f64,
    pub cfg: IntegratorConfig,
    su: Stencil,
    sv: Stencil,
    cache: Vec<(TriFactor, TriFactor)>,
    u_cap: f64,
    v_cap: f64,
}

impl Integrator {
    pub fn new(initial: &StatePair, cfg: &IntegratorConfig, p: &ModelParams) -> Result<Integrator> {
        let grid = initial.grid;
        let h = grid.h();
        let c = initial.frame_speed;
        let su = match cfg.advection {
            Some(s) => Stencil::build_with(&grid, 1.0, c, cfg.left.u, cfg.right.u, s),
            None => Stencil::build(&grid, 1.0, c, cfg.left.u, cfg.right.u),
        };
        let sv = match cfg.advection {
            Some(s) => Stencil::build_with(&grid, p.d, c, cfg.left.v, cfg.right.v, s),
            None => Stencil::build(&grid, p.d, c, cfg.left.v, cfg.right.v),
        };
        let _ = h;
        let sup = |v: &[f64]| v.iter().fold(1.0f64, |m, x| m.max(*x));
        let u_cap = sup(&initial.u);
        let v_cap = sup(&initial.v);
        let lcap = cfg
            .reaction_lipschitz_cap
            .unwrap_or_else(|| reaction_lipschitz(p, u_cap, v_cap));
        if cfg.dt * lcap > 1.0 + 1e-12 {
            return Err(LabError::DomainError(format!(
                "dt = {} exceeds 1/L = {}",
                cfg.dt,
                1.0 / lcap
            )));
        }
        Ok(Integrator {
            grid,
            params: *p,
            frame_speed: c,
            cfg: cfg.clone(),
            su,
            sv,
            cache: Vec::new(),
            u_cap,
            v_cap,
        })
    }

    fn factors(&mut self, dt: f64) -> Result<usize> {
        if let Some(k) = self.cache.iter().position(|(f, _)| f.dt == dt) {
            return Ok(k);
        }
        let fu = TriFactor::new(&self.su, dt)?;
        let fv = TriFactor::new(&self.sv, dt)?;
        if self.cache.len() > 8 {
            self.cache.remove(0);
        }
        self.cache.push((fu, fv));
        Ok(self.cache.len() - 1)
    }

    /// One step in place.
    pub fn step_in_place(&mut self, s: &mut StatePair, dt: f64) -> Result<()> {
        let k = self.factors(dt)?;
        let p = self.params;
        let n = s.u.len();
        let mut ru = vec![0.0; n];
        let mut rv = vec![0.0; n];
        for i in 0..n {
            let (u, v) = (s.u[i], s.v[i]);
            ru[i] = u + dt * u * (1.0 - u - p.a * v);
            rv[i] = v + dt * p.r * v * (1.0 - v - p.b * u);
        }
        let (fu, fv) = &self.cache[k];
        fu.solve_in_place(&mut ru);
        fv.solve_in_place(&mut rv);
        s.u = ru;
        s.v = rv;
        s.time += dt;
        self.check(s)
    }

    fn check(&self, s: &StatePair) -> Result<()> {
        for i in 0..s.u.len() {
            let (u, v) = (s.u[i], s.v[i]);
            if !(u >= -1e-12 && v >= -1e-12 && u <= self.u_cap + 1e-12 && v <= self.v_cap + 1e-12) {
                return Err(LabError::StabilityViolation {
                    t: s.time,
                    what: format!("(u, v) = ({u}, {v}) at x = {}", s.grid.x(i)),
                });
            }
        }
        Ok(())
    }

    /// Advance to `t_end`, calling `on_snapshot` at each requested time.
    pub fn run<F>(&mut self, state: &StatePair, t_end: f64, snapshot_times: &[f64], mut on_snapshot: F) -> Result<StatePair>
    where
        F: FnMut(&StatePair) -> Result<()>,
    {
        let mut s = state.clone();
        let mut targets: Vec<f64> = snapshot_times.to_vec();
        for w in targets.windows(2) {
            if w[1] < w[0] {
                return Err(LabError::DomainError("snapshot times must be sorted".into()));
            }
        }
        if targets.iter().any(|t| *t < state.time - 1e-12 || *t > t_end + 1e-12) {
            return Err(LabError::DomainError("snapshot time outside the run".into()));
        }
        targets.push(t_end);
        let mut emitted = vec![false; snapshot_times.len()];
        for (j, &target) in targets.iter().enumerate() {
            let span = target - s.time;
            if span > 1e-12 {
                let nsteps = (span / self.cfg.dt - 1e-9).ceil().max(1.0) as usize;
                let dt = span / nsteps as f64;
                for _ in 0..nsteps {
                    self.step_in_place(&mut s, dt)?;
                }
                s.time = target;
            }
            if j < snapshot_times.len() && !emitted[j] {
                emitted[j] = true;
                on_snapshot(&s)?;
            }
        }
        Ok(s)
    }
}

pub fn step(state: &StatePair, cfg: &IntegratorConfig, p: &ModelParams) -> Result<StatePair> {
    let mut it = Integrator::new(state, cfg, p)?;
    let mut s = state.clone();
    it.step_in_place(&mut s, cfg.dt)?;
    Ok(s)
}

/// Snapshots at the requested times followed by the final state (unless the
/// last snapshot already sits at `t_end`).
pub fn integrate(
    state: &StatePair,
    cfg: &IntegratorConfig,
    p: &ModelParams,
    t_end: f64,
    snapshot_times: &[f64],
) -> Result<Vec<StatePair>> {
    let mut it = Integrator::new(state, cfg, p)?;
    let mut out = Vec::new();
    let last = it.run(state, t_end, snapshot_times, |s| {
        out.push(s.clone());
        Ok(())
    })?;
    if out.last().map_or(true, |s| (s.time - t_end).abs() > 1e-12) {
        out.push(last);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KCheck {
    pub holds: bool,
    /// Largest of `A.u - B.u` and `B.v - A.v` over the grid.
    pub worst: f64,
    pub x: f64,
    pub component: char,
}

/// `A <=_K B` iff `A.u <= B.u` and `A.v >= B.v`.
pub fn k_leq(a: &StatePair, b: &StatePair, tol: f64) -> Result<KCheck> {
    if !a.grid.same_as(&b.grid) {
        return Err(LabError::GridMismatch("k_leq on different grids".into()));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut at = 0;
    let mut comp = 'u';
    for i in 0..a.grid.n {
        let du = a.u[i] - b.u[i];
        let dv = b.v[i] - a.v[i];
        if du > worst {
            worst = du;
            at = i;
            comp = 'u';
        }
        if dv > worst {
            worst = dv;
            at = i;
            comp = 'v';
        }
    }
    Ok(KCheck {
        holds: worst <= tol,
        worst,
        x: a.grid.x(at),
        component: comp,
    })
}

/// Resample a state given in a moving frame onto a lab-frame grid at its time.
pub fn to_lab_frame(s: &StatePair, lab: GridSpec) -> StatePair {
    let shift = s.frame_speed * s.time;
    let mut u = Vec::with_capacity(lab.n);
    let mut v = Vec::with_capacity(lab.n);
    for x in lab.nodes() {
        let xi = x - shift;
        let xc = xi.clamp(s.grid.x_min, s.grid.x_max);
        u.push(crate::grid::interp(&s.grid, &s.u, xc).unwrap());
        v.push(crate::grid::interp(&s.grid, &s.v, xc).unwrap());
    }
    StatePair::new(lab, u, v, 0.0, s.time)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(-20.0, 20.0, 401).unwrap()
    }

    fn p0() -> ModelParams {
        ModelParams::new(0.5, 0.5, 1.0, 1.0).unwrap()
    }

    fn cfg(dt: f64) -> IntegratorConfig {
        IntegratorConfig::new(dt, BcPair::neumann(), BcPair::neumann())
    }

    #[test]
    fn equilibria_are_fixed() {
        let p = p0();
        let (us, vs) = p.e_star();
        for (u, v) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (us, vs)] {
            let s = StatePair::constant(grid(), u, v);
            let out = step(&s, &cfg(0.01), &p).unwrap();
            for i in 0..grid().n {
                assert!((out.u[i] - u).abs() < 1e-13);
                assert!((out.v[i] - v).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn small_constant_goes_to_coexistence() {
        let p = p0();
        let s = StatePair::constant(grid(), 0.01, 0.01);
        let out = integrate(&s, &cfg(0.05), &p, 60.0, &[]).unwrap();
        assert_eq!(out.len(), 1);
        let f = &out[0];
        assert!((f.u[200] - 2.0 / 3.0).abs() < 1e-6);
        assert!((f.v[200] - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn snapshot_at_start_is_initial_state() {
        let p = p0();
        let x = grid().nodes();
        let u: Vec<f64> = x.iter().map(|x| 0.5 + 0.3 * (x / 3.0).sin()).collect();
        let s = StatePair::new(grid(), u, vec![0.2; grid().n], 0.0, 0.0);
        let out = integrate(&s, &cfg(0.01), &p, 1.0, &[0.0, 0.5]).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out[0], s);
        assert!((out[1].time - 0.5).abs() < 1e-15);
        assert!((out[2].time - 1.0).abs() < 1e-15);
    }

    #[test]
    fn k_order_basics() {
        let a = StatePair::constant(grid(), 0.0, 1.0);
        let b = StatePair::constant(grid(), 1.0, 0.0);
        assert!(k_leq(&a, &a, 0.0).unwrap().holds);
        assert_eq!(k_leq(&a, &a, 0.0).unwrap().worst, 0.0);
        assert!(k_leq(&a, &b, 0.0).unwrap().holds);
        let back = k_leq(&b, &a, 0.0).unwrap();
        assert!(!back.holds);
        assert_eq!(back.worst, 1.0);
        let other = StatePair::constant(GridSpec::new(-1.0, 1.0, 5).unwrap(), 0.0, 0.0);
        assert!(matches!(k_leq(&a, &other, 0.0), Err(LabError::GridMismatch(_))));
    }

    #[test]
    fn rejects_large_dt() {
        let s = StatePair::constant(grid(), 0.5, 0.5);
        assert!(Integrator::new(&s, &cfg(0.5), &p0()).is_err());
    }
}
