use crate::error::{Error, Result};

pub const IRR_BRACKET: (f64, f64) = (-0.99, 10.0);
pub const IRR_TOLERANCE: f64 = 1e-9;

/// Net present value of `flows`, where `flows[t]` falls at the end of year
/// `t` (so `flows[0]` is undiscounted).
pub fn npv(rate: f64, flows: &[f64]) -> f64 {
    let growth = 1.0 + rate;
    let mut discount = 1.0;
    let mut total = 0.0;
    for (t, cf) in flows.iter().enumerate() {
        if t > 0 {
            discount *= growth;
        }
        total += cf / discount;
    }
    total
}

/// Internal rate of return by bisection on `[-0.99, 10]`.
///
/// Returns `Ok(None)` when NPV does not change sign over the bracket.
pub fn irr(flows: &[f64]) -> Result<Option<f64>> {
    if flows.len() < 2 {
        return Err(Error::domain(format!(
            "IRR needs at least 2 cash flows, got {}",
            flows.len()
        )));
    }
    let (mut lo, mut hi) = IRR_BRACKET;
    let mut f_lo = npv(lo, flows);
    let f_hi = npv(hi, flows);
    if f_lo == 0.0 {
        return Ok(Some(lo));
    }
    if f_hi == 0.0 {
        return Ok(Some(hi));
    }
    if !f_lo.is_finite() || !f_hi.is_finite() || f_lo.signum() == f_hi.signum() {
        return Ok(None);
    }
    while hi - lo > IRR_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let f_mid = npv(mid, flows);
        if f_mid == 0.0 {
            return Ok(Some(mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// `(-cost, benefit, ..., benefit)` over `horizon` years.
pub fn project_flows(cost: f64, annual_benefit: f64, horizon: u32) -> Vec<f64> {
    std::iter::once(-cost)
        .chain(std::iter::repeat_n(annual_benefit, horizon as usize))
        .collect()
}
