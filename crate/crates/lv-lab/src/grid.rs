//! Uniform grids, boundary conditions and the shared second-order stencil.
//!
//! Every solver in the crate (wave BVPs, eigenproblems, the time integrator)
//! builds its spatial operator through [`Stencil`], so a steady state of one is
//! a steady state of the others at the discrete level.

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min < x_max) || n < 3 {
            return Err(LabError::DomainError(format!(
                "bad grid [{x_min}, {x_max}] with n = {n}"
            )));
        }
        Ok(GridSpec { x_min, x_max, n })
    }

    /// Grid with spacing as close to `h` as possible.
    pub fn with_spacing(x_min: f64, x_max: f64, h: f64) -> Result<Self> {
        let n = ((x_max - x_min) / h).round() as usize + 1;
        Self::new(x_min, x_max, n)
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Index of the node nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let k = ((x - self.x_min) / self.h()).round();
        k.clamp(0.0, (self.n - 1) as f64) as usize
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self.n == other.n
            && (self.x_min - other.x_min).abs() < 1e-12
            && (self.x_max - other.x_max).abs() < 1e-12
    }
}

/// Linear interpolation of grid data at an arbitrary point; `None` outside.
pub fn interp(grid: &GridSpec, values: &[f64], x: f64) -> Option<f64> {
    let h = grid.h();
    let s = (x - grid.x_min) / h;
    if s < -1e-9 || s > (grid.n - 1) as f64 + 1e-9 {
        return None;
    }
    let s = s.clamp(0.0, (grid.n - 1) as f64);
    let i = (s.floor() as usize).min(grid.n - 2);
    let w = s - i as f64;
    Some(values[i] * (1.0 - w) + values[i + 1] * w)
}

/// Boundary condition for one component at one end.
///
/// `Robin { rate, target }` means the solution approaches `target`
/// exponentially with `rate` towards the exterior: `u' = rate (u - target)` at
/// the left end and `u' = -rate (u - target)` at the right end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bc {
    Neumann,
    Dirichlet(f64),
    Robin { rate: f64, target: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Advection {
    Central,
    Upwind,
}

/// Tridiagonal row data of `diff * u'' + adv * u'` with ghost-node boundary
/// closure. Dirichlet ends are flagged and carry no operator row.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub konst: Vec<f64>,
    pub fixed_left: Option<f64>,
    pub fixed_right: Option<f64>,
    pub scheme: Advection,
}

impl Stencil {
    /// Central differences when the cell Peclet number is below one,
    /// first-order upwind otherwise.
    pub fn auto_scheme(diff: f64, adv: f64, h: f64) -> Advection {
        if adv.abs() * h / (2.0 * diff) < 1.0 {
            Advection::Central
        } else {
            Advection::Upwind
        }
    }

    pub fn build(grid: &GridSpec, diff: f64, adv: f64, left: Bc, right: Bc) -> Stencil {
        let h = grid.h();
        Self::build_with(grid, diff, adv, left, right, Self::auto_scheme(diff, adv, h))
    }

    pub fn build_with(
        grid: &GridSpec,
        diff: f64,
        adv: f64,
        left: Bc,
        right: Bc,
        scheme: Advection,
    ) -> Stencil {
        let n = grid.n;
        let h = grid.h();
        let dd = diff / (h * h);
        let (am, a0, ap) = match scheme {
            Advection::Central => (-adv / (2.0 * h), 0.0, adv / (2.0 * h)),
            Advection::Upwind if adv >= 0.0 => (0.0, -adv / h, adv / h),
            Advection::Upwind => (adv / h, -adv / h, 0.0),
        };
        let wm = dd + am;
        let w0 = -2.0 * dd + a0;
        let wp = dd + ap;
        let mut lower = vec![wm; n];
        let mut diag = vec![w0; n];
        let mut upper = vec![wp; n];
        let mut konst = vec![0.0; n];
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        let mut fixed_left = None;
        let mut fixed_right = None;
        // ghost u_{-1} = u_1 - 2h k (u_0 - T)
        match left {
            Bc::Dirichlet(w) => fixed_left = Some(w),
            Bc::Neumann => upper[0] += wm,
            Bc::Robin { rate, target } => {
                upper[0] += wm;
                diag[0] -= 2.0 * h * rate * wm;
                konst[0] += 2.0 * h * rate * target * wm;
            }
        }
        // ghost u_n = u_{n-2} - 2h k (u_{n-1} - T)
        match right {
            Bc::Dirichlet(w) => fixed_right = Some(w),
            Bc::Neumann => lower[n - 1] += wp,
            Bc::Robin { rate, target } => {
                lower[n - 1] += wp;
                diag[n - 1] -= 2.0 * h * rate * wp;
                konst[n - 1] += 2.0 * h * rate * target * wp;
            }
        }
        Stencil {
            lower,
            diag,
            upper,
            konst,
            fixed_left,
            fixed_right,
            scheme,
        }
    }

    /// Operator value at node `i` (ignores Dirichlet flags).
    pub fn apply_at(&self, u: &[f64], i: usize) -> f64 {
        let n = u.len();
        let mut s = self.diag[i] * u[i] + self.konst[i];
        if i > 0 {
            s += self.lower[i] * u[i - 1];
        }
        if i + 1 < n {
            s += self.upper[i] * u[i + 1];
        }
        s
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..u.len()).map(|i| self.apply_at(u, i)).collect()
    }

    pub fn is_fixed(&self, i: usize, n: usize) -> bool {
        (i == 0 && self.fixed_left.is_some()) || (i == n - 1 && self.fixed_right.is_some())
    }
}

/// Thomas algorithm. Rows are `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv.abs() < 1e-300 {
        return Err(LabError::SingularSystem("zero pivot at row 0".into()));
    }
    c[0] = upper[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i] * c[i - 1];
        if piv.abs() < 1e-300 || !piv.is_finite() {
            return Err(LabError::SingularSystem(format!("zero pivot at row {i}")));
        }
        c[i] = if i + 1 < n { upper[i] / piv } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

/// Banded matrix with LU factorization and partial pivoting.
#[derive(Debug, Clone)]
pub struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    // row-major storage of width 2*kl+ku+1, column offset relative to row
    data: Vec<f64>,
    width: usize,
}

impl Banded {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Banded {
            n,
            kl,
            ku,
            data: vec![0.0; n * width],
            width,
        }
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        // column j stored at offset j + kl - i within row i
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    pub fn clear_row(&mut self, i: usize) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        for j in lo..=hi {
            self.set(i, j, 0.0);
        }
    }

    /// In-place solve; consumes the matrix.
    pub fn solve(mut self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let kl = self.kl;
        let ku_eff = self.ku + self.kl;
        let mut b = rhs.to_vec();
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.slot(k, k)].abs();
            for i in k + 1..=last {
                let v = self.data[self.slot(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < 1e-300 {
                return Err(LabError::SingularSystem(format!("zero pivot at column {k}")));
            }
            let jmax = (k + ku_eff).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.slot(k, j);
                    let c = self.slot(p, j);
                    self.data.swap(a, c);
                }
                b.swap(k, p);
            }
            let piv = self.data[self.slot(k, k)];
            for i in k + 1..=last {
                let f = self.data[self.slot(i, k)] / piv;
                if f == 0.0 {
                    continue;
                }
                let s = self.slot(i, k);
                self.data[s] = 0.0;
                for j in k + 1..=jmax {
                    let v = self.data[self.slot(k, j)];
                    let s = self.slot(i, j);
                    self.data[s] -= f * v;
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let jmax = (k + ku_eff).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=jmax {
                s -= self.data[self.slot(k, j)] * x[j];
            }
            x[k] = s / self.data[self.slot(k, k)];
        }
        Ok(x)
    }
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_banded() {
        let n = 7;
        let lower: Vec<f64> = (0..n).map(|i| -1.0 - 0.1 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| -0.5 + 0.05 * i as f64).collect();
        let diag = vec![4.0; n];
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        let mut m = Banded::new(n, 1, 1);
        for i in 0..n {
            m.set(i, i, diag[i]);
            if i > 0 {
                m.set(i, i - 1, lower[i]);
            }
            if i + 1 < n {
                m.set(i, i + 1, upper[i]);
            }
        }
        let y = m.solve(&rhs).unwrap();
        for i in 0..n {
            assert!((x[i] - y[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn banded_pivots() {
        // zero on the diagonal forces a row swap
        let mut m = Banded::new(3, 1, 1);
        m.set(0, 0, 0.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        m.set(1, 1, 0.0);
        m.set(1, 2, 2.0);
        m.set(2, 1, 1.0);
        m.set(2, 2, 1.0);
        let x = m.solve(&[2.0, 7.0, 5.0]).unwrap();
        assert!((x[1] - 2.0).abs() < 1e-14);
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn robin_stencil_is_exact_on_exponential_tail() {
        // u = e^{-k x} satisfies the right Robin condition with rate k
        let g = GridSpec::new(0.0, 10.0, 1001).unwrap();
        let k = 0.5;
        let st = Stencil::build(&g, 1.0, 2.5, Bc::Neumann, Bc::Robin { rate: k, target: 0.0 });
        let u: Vec<f64> = g.nodes().iter().map(|x| (-k * x).exp()).collect();
        let lu = st.apply(&u);
        let exact = (k * k - 2.5 * k) * u[g.n - 1];
        assert!((lu[g.n - 1] - exact).abs() < 1e-4);
    }
}
