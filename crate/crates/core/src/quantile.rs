//! Standard normal quantiles and the critical levels built on them.

use crate::error::{Error, Result};

/// Inverse standard normal CDF (Wichura's AS 241, relative accuracy about
/// 1e-16 over the open unit interval).
pub fn gaussian_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!("quantile level must lie in (0,1), got {q}")));
    }
    Ok(ppnd16(q))
}

/// `Phi^{-1}(1 - r)` evaluated without forming `1 - r`, for `r` in (0,1).
pub fn upper_quantile(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::domain(format!("tail probability must lie in (0,1), got {r}")));
    }
    Ok(-ppnd16(r))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    Ok(())
}

/// Holm critical levels `C_i = Phi^{-1}(1 - alpha / i)`, `i = 1..=L`.
pub fn holm_levels(l: usize, alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if l < 1 {
        return Err(Error::domain("need at least one hypothesis"));
    }
    (1..=l).map(|i| upper_quantile(alpha / i as f64)).collect()
}

/// Per-step level of the backward stepwise search,
/// `Phi^{-1}((1 - alpha)^{1/L_k})`.
pub fn stepwise_level(l_k: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if l_k < 1 {
        return Err(Error::domain("need at least one candidate"));
    }
    // 1 - (1 - alpha)^{1/L} computed through expm1/ln_1p so tiny alphas keep
    // their precision.
    let tail = -((-alpha).ln_1p() / l_k as f64).exp_m1();
    upper_quantile(tail)
}

#[allow(clippy::excessive_precision)]
fn ppnd16(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r
                + 45921.953931549871457)
                * r
                + 13731.693765509461125)
                * r
                + 1971.5909503065514427)
                * r
                + 133.14166789178437745)
                * r
                + 3.387132872796366608)
            / (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r
                + 21213.794301586595867)
                * r
                + 5394.1960214247511077)
                * r
                + 687.1870074920579083)
                * r
                + 42.313330701600911252)
                * r
                + 1.0);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let value = if r <= 5.0 {
        r -= 1.6;
        (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r
            + 1.27045825245236838258)
            * r
            + 3.64784832476320460504)
            * r
            + 5.7694972214606914055)
            * r
            + 4.6303378461565452959)
            * r
            + 1.42343711074968357734)
            / (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r
                + 0.14810397642748007459)
                * r
                + 0.68976733498510000455)
                * r
                + 1.6763848301838038494)
                * r
                + 2.05319162663775882187)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r
            + 0.026532189526576123093)
            * r
            + 0.29656057182850489123)
            * r
            + 1.7848265399172913358)
            * r
            + 5.4637849111641143699)
            * r
            + 6.6579046435011037772)
            / (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r
                + 7.868691311456132591e-4)
                * r
                + 0.0148753612908506148525)
                * r
                + 0.13692988092273580531)
                * r
                + 0.59983220655588793769)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}
