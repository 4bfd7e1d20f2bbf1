//! Fluid-model analysis of a shared buffer.
//!
//! Closed forms are evaluated in exact rational arithmetic; the transient
//! integrator in [`ode`] runs in `f64` and serves as an independent check on
//! the crossing times.

mod bounds;
mod curve;
pub mod ode;
mod omega;
mod scenario;
mod steady;
mod transient;

pub use bounds::{
    alpha_bounds_general, alpha_h_for_burst, alpha_l_for_burst, alpha_l_for_zero_transient,
    multi_priority_alpha_h, AlphaBound, GeneralBounds,
};
pub use curve::{
    burst_absorption_curve, fb_lower_bound_holds, write_curve_csv, CurveConfig, CurveRow,
    FIG12_BUFFER_PACKETS,
};
pub use ode::{estimate_t1, integrate_transient, IntegrationOptions, ResolutionWarning, Trajectory};
pub use omega::{omega_vector, FluidPolicy, FluidQueue, FluidQueueSpec, OmegaVector};
pub use scenario::{scenario_fluid, ScenarioFluid};
pub use steady::{occupancy_bound, steady_state, SteadyState};
pub use transient::{
    analyze, burst_tolerance, classify_case, t1, t1_case1, t1_case2, AnalysisResult, Case, Extended,
    T1Report, TransientScenario,
};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::model::Frac;

/// Exact rational `num / den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn from_frac(f: Frac) -> BigRational {
    ratio(*f.numer(), *f.denom())
}

/// Exact value of a finite `f64` (binary expansion, no rounding).
pub fn from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parse `"p/q"`, an integer or a plain decimal (`"0.5"`, `"-3.25"`) exactly.
pub fn parse_rational(text: &str) -> Result<BigRational, String> {
    let t = text.trim();
    let bad = |e: &dyn std::fmt::Display| format!("{t:?}: {e}");
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|e| bad(&e))?;
        let d: BigInt = d.trim().parse().map_err(|e| bad(&e))?;
        if d.is_zero() {
            return Err(bad(&"zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad(&"empty number"));
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) || frac.len() > 30 {
        return Err(bad(&"expected p/q or a decimal number"));
    }
    let digits: BigInt = format!("0{whole}{frac}").parse().map_err(|e| bad(&e))?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    let v = BigRational::new(digits, scale);
    Ok(if neg { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_forms() {
        assert_eq!(parse_rational("20/7"), Ok(ratio(20, 7)));
        assert_eq!(parse_rational("0.5"), Ok(ratio(1, 2)));
        assert_eq!(parse_rational("-3.25"), Ok(ratio(-13, 4)));
        assert_eq!(parse_rational("667"), Ok(int(667)));
        assert_eq!(parse_rational(".1"), Ok(ratio(1, 10)));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1e3").is_err());
        assert!(parse_rational(".").is_err());
        assert!(parse_rational("").is_err());
    }
}
