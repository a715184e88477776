//! The utility mathematics.
//!
//! A server earns utility for hosting a request at rate
//! `(gamma1*c + gamma2*r + gamma3*h) * gamma4 / d` per slot, so an
//! allocation held for `t` slots earns `(gamma1*c + gamma2*r + gamma3*h)
//! * gamma4 * t / d` in total. Everything here is a pure function.

use thiserror::Error;

use crate::model::{Coefficients, UERequest};

#[derive(Debug, Error, PartialEq)]
pub enum UtilityError {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("negative input: {0}")]
    NegativeInput(&'static str),
    #[error("utilities has {utilities} entries, feasible has {feasible}")]
    LengthMismatch { utilities: usize, feasible: usize },
    #[error("coefficient derivation: {0} must be positive")]
    NonPositiveTotal(&'static str),
}

/// Utility earned for holding (c, r, h) for `t` slots at distance `d`.
pub fn utility(
    c: f64,
    r: f64,
    h: f64,
    t: f64,
    d: f64,
    coeffs: &Coefficients,
) -> Result<f64, UtilityError> {
    if !(d > 0.0) {
        return Err(UtilityError::NonPositiveDistance(d));
    }
    if t < 0.0 {
        return Err(UtilityError::NegativeInput("t"));
    }
    if c < 0.0 || r < 0.0 || h < 0.0 {
        return Err(UtilityError::NegativeInput("allocation"));
    }
    Ok((coeffs.gamma1 * c + coeffs.gamma2 * r + coeffs.gamma3 * h) * coeffs.gamma4 * t / d)
}

/// Bounds on a request's achievable utility at one server.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityBounds {
    pub u_min: f64,
    pub u_max: f64,
}

/// Utility at the minimum and maximum acceptable allocations.
pub fn utility_bounds(
    req: &UERequest,
    d: f64,
    coeffs: &Coefficients,
) -> Result<UtilityBounds, UtilityError> {
    let t = req.t as f64;
    Ok(UtilityBounds {
        u_min: utility(req.c_min, req.r_min, req.h, t, d, coeffs)?,
        u_max: utility(req.c_max, req.r_max, req.h, t, d, coeffs)?,
    })
}

/// Fleet-wide resource totals used by derived-mode coefficients.
#[derive(Debug, Clone, Copy)]
pub struct FleetTotals {
    pub cpu: f64,
    pub ram: f64,
    pub disk: f64,
}

/// Inputs to [`derive_coefficients`].
#[derive(Debug, Clone, Copy)]
pub enum CoefficientSettings {
    /// Use these values as-is.
    Direct {
        gamma1: f64,
        gamma2: f64,
        gamma3: f64,
        gamma4: f64,
        gamma5: f64,
    },
    /// gamma1..3 = w / fleet total, gamma4 = d_max / t_max, gamma5 = w5 / e_max.
    Derived {
        w1: f64,
        w2: f64,
        w3: f64,
        w5: f64,
        totals: FleetTotals,
        d_max: f64,
        t_max: f64,
        e_max: f64,
    },
}

pub fn derive_coefficients(settings: &CoefficientSettings) -> Result<Coefficients, UtilityError> {
    match *settings {
        CoefficientSettings::Direct {
            gamma1,
            gamma2,
            gamma3,
            gamma4,
            gamma5,
        } => Ok(Coefficients::new(gamma1, gamma2, gamma3, gamma4, gamma5)),
        CoefficientSettings::Derived {
            w1,
            w2,
            w3,
            w5,
            totals,
            d_max,
            t_max,
            e_max,
        } => {
            for (name, v) in [
                ("fleet cpu total", totals.cpu),
                ("fleet ram total", totals.ram),
                ("fleet disk total", totals.disk),
                ("d_max", d_max),
                ("t_max", t_max),
                ("e_max", e_max),
            ] {
                if !(v > 0.0) {
                    return Err(UtilityError::NonPositiveTotal(name));
                }
            }
            Ok(Coefficients::new(
                w1 / totals.cpu,
                w2 / totals.ram,
                w3 / totals.disk,
                d_max / t_max,
                w5 / e_max,
            ))
        }
    }
}

/// Utility as seen by an idle server: activating it costs `gamma5 * p_k`.
/// A server already on keeps the plain utility.
pub fn penalized_utility(u: f64, server_on: bool, p_k: f64, gamma5: f64) -> f64 {
    if server_on {
        u
    } else {
        u - gamma5 * p_k
    }
}

/// Index of the highest-utility feasible server, lowest index on ties.
/// None when no server is feasible.
pub fn optimal_server(utilities: &[f64], feasible: &[bool]) -> Result<Option<usize>, UtilityError> {
    if utilities.len() != feasible.len() {
        return Err(UtilityError::LengthMismatch {
            utilities: utilities.len(),
            feasible: feasible.len(),
        });
    }
    let mut best: Option<(usize, f64)> = None;
    for (k, (&u, &f)) in utilities.iter().zip(feasible).enumerate() {
        if !f {
            continue;
        }
        match best {
            Some((_, bu)) if u <= bu => {}
            _ => best = Some((k, u)),
        }
    }
    Ok(best.map(|(k, _)| k))
}
