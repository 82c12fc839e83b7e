//! Closed-form speeds, decay rates and regime classification.

use crate::error::{LabError, Result};

/// Coefficients of `u_t = u_xx + u(1-u-av)`, `v_t = d v_xx + r v(1-v-bu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub r: f64,
}

impl ModelParams {
    pub fn new(a: f64, b: f64, d: f64, r: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && d > 0.0 && r > 0.0) {
            return Err(LabError::DomainError(format!(
                "coefficients must be positive: a={a}, b={b}, d={d}, r={r}"
            )));
        }
        if a == 1.0 || b == 1.0 {
            return Err(LabError::DegenerateRegime { a, b });
        }
        Ok(ModelParams { a, b, d, r })
    }

    /// No validation. For scalar sub-cases such as `a = 0` in tests.
    pub fn unchecked(a: f64, b: f64, d: f64, r: f64) -> Self {
        ModelParams { a, b, d, r }
    }

    pub fn regime(&self) -> Result<Regime> {
        classify_regime(self)
    }

    /// Coexistence state `e_*`.
    pub fn e_star(&self) -> (f64, f64) {
        let den = 1.0 - self.a * self.b;
        ((1.0 - self.a) / den, (1.0 - self.b) / den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    WeakCompetition,
    Bistable,
    UWins,
    VWins,
}

pub fn classify_regime(p: &ModelParams) -> Result<Regime> {
    if p.a == 1.0 || p.b == 1.0 {
        return Err(LabError::DegenerateRegime { a: p.a, b: p.b });
    }
    Ok(match (p.a < 1.0, p.b < 1.0) {
        (true, true) => Regime::WeakCompetition,
        (false, false) => Regime::Bistable,
        (true, false) => Regime::UWins,
        (false, true) => Regime::VWins,
    })
}

/// Square root with a tiny negative-radicand guard.
pub(crate) fn guarded_sqrt(x: f64, what: &str) -> Result<f64> {
    if x >= 0.0 {
        Ok(x.sqrt())
    } else if x > -1e-14 {
        Ok(0.0)
    } else {
        Err(LabError::DomainError(format!("negative radicand {x:e} in {what}")))
    }
}

pub fn g_eval(p: &ModelParams, c: f64, lambda: f64) -> f64 {
    p.d * lambda * lambda - c * lambda + p.r
}

pub fn admissible_lambda_upper(p: &ModelParams, c: f64) -> Result<f64> {
    let m = p.b.min(1.0);
    let disc = c * c - 4.0 * p.d * p.r * m;
    if c <= 0.0 || disc <= 0.0 {
        return Err(LabError::NotAdmissible(format!(
            "c = {c} must exceed 2 sqrt(d r min(b,1)) = {}",
            2.0 * (p.d * p.r * m).sqrt()
        )));
    }
    Ok((c - disc.sqrt()) / (2.0 * p.d))
}

pub fn tau(c: f64) -> Result<f64> {
    Ok((c - guarded_sqrt(c * c - 4.0, "tau_c")?) / 2.0)
}

pub fn tau_tilde(c: f64) -> f64 {
    ((c * c + 4.0).sqrt() - c) / 2.0
}

/// Externally measured wave speeds that enter some of the maxima.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExternalSpeeds {
    pub c1: Option<f64>,
    pub c1_star: Option<f64>,
    pub c2_star: Option<f64>,
    pub c_uv: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedTable {
    pub c: f64,
    pub lambda: f64,
    pub mu: f64,
    pub c_v: f64,
    pub tau_c: f64,
    pub tau_tilde_c: f64,
    pub delta_v: f64,
    pub lambda_acc: f64,
    pub c_acc: Option<f64>,
    pub lambda_tilde: Option<f64>,
    pub c_v_tilde: Option<f64>,
    pub c_u1: Option<f64>,
    pub c_u2: Option<f64>,
    pub external: ExternalSpeeds,
}

pub fn delta_v(p: &ModelParams, c: f64, mu: f64) -> Result<f64> {
    let rad = c * c + 4.0 * p.d * (mu + p.r * (p.b - 1.0));
    Ok((guarded_sqrt(rad, "delta_v")? - c) / (2.0 * p.d))
}

pub fn speed_table(p: &ModelParams, c: f64, lambda: f64, ext: ExternalSpeeds) -> Result<SpeedTable> {
    if !(lambda > 0.0) {
        return Err(LabError::DomainError(format!("lambda = {lambda} must be positive")));
    }
    let mu = g_eval(p, c, lambda);
    let c_v = p.d * lambda + p.r / lambda;
    let tau_c = tau(c)?;
    let tau_tilde_c = tau_tilde(c);
    let dv = delta_v(p, c, mu)?;
    let lambda_acc = 0.5 * (c_v - ((c_v - 2.0 * tau_c).powi(2) + 4.0 * p.a).sqrt());
    let c_acc = if p.a < 1.0 {
        let s = (1.0 - p.a).sqrt();
        Some(if lambda_acc <= s {
            lambda_acc + (1.0 - p.a) / lambda_acc
        } else {
            2.0 * s
        })
    } else {
        None
    };
    let weak = p.a < 1.0 && p.b < 1.0;
    let (lambda_tilde, c_v_tilde) = if weak {
        let lt = (p.r * (1.0 - p.b) / p.d).sqrt().min(dv);
        let own = if lt > 0.0 {
            Some(p.d * lt + p.r * (1.0 - p.b) / lt)
        } else {
            None
        };
        let cvt = match (ext.c2_star, own) {
            (Some(s), Some(o)) => Some(s.max(o)),
            _ => None,
        };
        (Some(lt), cvt)
    } else {
        (None, None)
    };
    let c_u1 = match (weak, ext.c1_star, c_acc) {
        (true, Some(s), Some(acc)) => Some(s.max(acc)),
        _ => None,
    };
    let c_u2 = match (p.a < 1.0 && p.b > 1.0, ext.c1, c_acc) {
        (true, Some(s), Some(acc)) => Some(s.max(acc)),
        _ => None,
    };
    Ok(SpeedTable {
        c,
        lambda,
        mu,
        c_v,
        tau_c,
        tau_tilde_c,
        delta_v: dv,
        lambda_acc,
        c_acc,
        lambda_tilde,
        c_v_tilde,
        c_u1,
        c_u2,
        external: ext,
    })
}

pub fn limiting_lambda3(p: &ModelParams, c: f64) -> Result<(f64, f64)> {
    let weak = p.a > 0.0 && p.a < 1.0 && p.b > 0.0 && p.b < 1.0;
    let floor = 2.0 * 1f64.max((p.d * p.r * p.b).sqrt());
    if !weak || c <= floor {
        return Err(LabError::NotAdmissible(format!(
            "limiting type needs 0<a,b<1 and c > {floor}"
        )));
    }
    let rad = guarded_sqrt(c * c - 4.0 * p.d * p.r * p.b, "lambda_3")?;
    let l3 = (c - rad) / (2.0 * p.d);
    Ok((l3, p.d * l3 + p.r / l3))
}

pub fn merging_constants(p: &ModelParams, c_v: f64) -> Result<(f64, f64)> {
    let floor = 2.0 * (p.r * p.d).sqrt().max(p.a.sqrt());
    if !(p.a < 1.0 && p.b > 1.0) || c_v <= floor {
        return Err(LabError::NotAdmissible(format!(
            "merging type needs 0<a<1<b and c_v > {floor}"
        )));
    }
    let s = guarded_sqrt(c_v * c_v - 4.0 * p.a, "lambda_4")?;
    let l4 = 0.5 * (c_v - s);
    let cu3 = l4 + 1.0 / l4;
    Ok((l4, cu3))
}

/// Gauge rates for the merging construction: `(1-a, r(1-a))`.
/// The construction uses the first.
pub fn merging_gauge_rates(p: &ModelParams) -> (f64, f64) {
    (1.0 - p.a, p.r * (1.0 - p.a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p0() -> ModelParams {
        ModelParams::new(0.5, 0.5, 1.0, 1.0).unwrap()
    }

    #[test]
    fn g_oracles() {
        let p = p0();
        assert_eq!(g_eval(&p, 2.5, 0.0), 1.0);
        assert!((g_eval(&p, 2.5, 1.25) + 0.5625).abs() < 1e-15);
        assert!((g_eval(&p, 2.5, 0.2) - 0.54).abs() < 1e-15);
    }

    #[test]
    fn admissible_upper_oracles() {
        assert!((admissible_lambda_upper(&p0(), 2.5).unwrap() - 0.219224).abs() < 1e-6);
        let q = ModelParams::new(1.5, 2.0, 1.0, 1.0).unwrap();
        assert!((admissible_lambda_upper(&q, 2.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            admissible_lambda_upper(&p0(), 1.0),
            Err(LabError::NotAdmissible(_))
        ));
    }

    #[test]
    fn p0_table() {
        let t = speed_table(&p0(), 2.5, 0.2, ExternalSpeeds::default()).unwrap();
        assert!((t.mu - 0.54).abs() < 1e-14);
        assert!((t.c_v - 5.2).abs() < 1e-14);
        assert!((t.tau_c - 0.5).abs() < 1e-14);
        // 0.5 (sqrt(6.41) - 2.5) = 0.0158989...
        assert!((t.delta_v - 0.5 * (6.41f64.sqrt() - 2.5)).abs() < 1e-15);
        assert!((t.delta_v - 0.015899).abs() < 1e-6);
        // 0.5 (5.2 - sqrt(19.64))
        assert!((t.lambda_acc - 0.384148).abs() < 1e-6);
        assert!((t.c_acc.unwrap() - (t.lambda_acc + 0.5 / t.lambda_acc)).abs() < 1e-15);
        assert!((t.c_acc.unwrap() - 1.685729).abs() < 1e-6);
        assert!(t.c_u1.is_none());
        assert!(matches!(
            speed_table(&p0(), 2.5, 0.0, ExternalSpeeds::default()),
            Err(LabError::DomainError(_))
        ));
    }

    #[test]
    fn lambda3_oracles() {
        let (l3, cv3) = limiting_lambda3(&p0(), 2.5).unwrap();
        assert!((l3 - 0.219224).abs() < 1e-6);
        assert!((cv3 - 4.780777).abs() < 1e-6);
        let near = ModelParams::unchecked(0.5, 1.0 - 1e-12, 1.0, 1.0);
        assert!((limiting_lambda3(&near, 2.5).unwrap().0 - 0.5).abs() < 1e-6);
        assert!(limiting_lambda3(&p0(), 1.9).is_err());
    }

    #[test]
    fn merging_oracles() {
        let p = ModelParams::new(0.5, 2.0, 1.0, 1.0).unwrap();
        let (l4, cu3) = merging_constants(&p, 3.0).unwrap();
        assert!((l4 - 0.177124).abs() < 1e-6);
        assert!((cu3 - 5.822876).abs() < 1e-6);
        assert!((cu3 - 3.0 - 0.5 * (3.0 + 7f64.sqrt())).abs() < 1e-12);
        assert!(merging_constants(&p, 1.0).is_err());
        let near = ModelParams::unchecked(1.0 - 1e-9, 2.0, 1.0, 1.0);
        let (_, c) = merging_constants(&near, 3.0).unwrap();
        assert!((c - 3.0).abs() < 1e-8);
    }

    #[test]
    fn regimes() {
        let r = |a, b| classify_regime(&ModelParams::unchecked(a, b, 1.0, 1.0));
        assert_eq!(r(0.5, 0.5).unwrap(), Regime::WeakCompetition);
        assert_eq!(r(2.0, 2.0).unwrap(), Regime::Bistable);
        assert_eq!(r(0.5, 2.0).unwrap(), Regime::UWins);
        assert_eq!(r(2.0, 0.5).unwrap(), Regime::VWins);
        assert!(matches!(r(1.0, 0.5), Err(LabError::DegenerateRegime { .. })));
    }
}
