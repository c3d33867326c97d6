//! Recovery quality and its aggregation across seeds.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    /// Set when either side has zero variance; `r` is then 0.
    pub degenerate: bool,
}

/// Pearson correlation between true and estimated values.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::Input(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Input("need at least two values".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(Correlation {
            r: 0.0,
            degenerate: true,
        });
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    Ok(Correlation {
        r,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateStat {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_seeds: usize,
    pub sd: f64,
}

/// Two-sided normal quantile for `confidence`, e.g. 1.96 at 0.95.
pub fn z_quantile(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::config_key("confidence", None, "must lie in (0, 1)"));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(0.5 + confidence / 2.0))
}

/// Mean with a normal-approximation interval `mean ± z * sd / sqrt(n)`, using
/// the sample standard deviation. A single seed gives a zero-width interval.
pub fn aggregate(values: &[f64], confidence: f64) -> Result<AggregateStat> {
    if values.is_empty() {
        return Err(Error::Input("cannot aggregate zero seeds".into()));
    }
    let z = z_quantile(confidence)?;
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let half = z * sd / (n as f64).sqrt();
    Ok(AggregateStat {
        mean,
        ci_low: mean - half,
        ci_high: mean + half,
        n_seeds: n,
        sd,
    })
}
