//! Moment estimators of tail dependence.
//!
//! For a max-stable vector with uniform pseudo-observations u_ij, the mean
//! m of a row maximum of powers satisfies l = m / (1 - m). Every estimator
//! here is that ratio applied to a sample mean:
//!
//! * [`stdf_estimate`]: max_j u_j^{x_j}, estimating -log F(x_1..x_d),
//! * [`eps_scaled_estimate`]: max_{j in I} u_j^{1/x}, estimating x eps_I,
//! * [`l_pair_estimate`]: the same maximum over I1 u I2 with powers 1/x on
//!   I1 and 1/y on I2,
//! * [`lambda_estimate`] and [`eps_pair_estimate`]: the combination
//!   x eps_I1 + y eps_I2 - l_pair.
//!
//! The same code runs on known-margin and rank-based pseudo-samples. With
//! ranks the closed-form standard errors are only approximate and are
//! flagged as such.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::normal;
use crate::sample::{row_group_max, IndexPair, Provenance, PseudoSample};
use crate::stats::{block_mean, block_means};

pub const DEFAULT_LEVEL: f64 = 0.95;

/// Means at or above this bound are rejected.
pub const MEAN_CEILING: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Stdf,
    EpsScaled,
    LPair,
    Lambda,
    EpsPair,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Stdf => "stdf",
            EstimatorKind::EpsScaled => "eps_scaled",
            EstimatorKind::LPair => "l_pair",
            EstimatorKind::Lambda => "lambda",
            EstimatorKind::EpsPair => "eps_pair",
        }
    }
}

/// How the standard error was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeMethod {
    /// sigma^2 = l (1 + l)^2 / (2 + l) evaluated at the estimate.
    Delta,
    /// Delta method with the empirical covariance of the three row maxima;
    /// used for the composite estimators.
    EmpiricalDelta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub estimator: EstimatorKind,
    pub value: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub n: usize,
    pub provenance: Provenance,
    pub se_method: SeMethod,
    /// Set for rank-based samples, where the variance formula ignores the
    /// estimation of the margins.
    pub se_approximate: bool,
}

impl Estimate {
    fn new(
        estimator: EstimatorKind,
        value: f64,
        std_error: f64,
        n: usize,
        provenance: Provenance,
        se_method: SeMethod,
    ) -> Self {
        let mut e = Self {
            estimator,
            value,
            std_error,
            ci_low: value,
            ci_high: value,
            level: DEFAULT_LEVEL,
            n,
            provenance,
            se_method,
            se_approximate: provenance == Provenance::EmpiricalRanks,
        };
        e.set_level(DEFAULT_LEVEL);
        e
    }

    fn set_level(&mut self, level: f64) {
        let half = normal::two_sided_z(level) * self.std_error;
        self.level = level;
        self.ci_low = self.value - half;
        self.ci_high = self.value + half;
    }

    /// Same estimate with the confidence interval recomputed at `level`.
    pub fn at_level(mut self, level: f64) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::Config(format!(
                "confidence level must lie in (0,1), got {level}"
            )));
        }
        self.set_level(level);
        Ok(self)
    }

    /// |value - target| in units of the reported standard error.
    pub fn z_distance(&self, target: f64) -> f64 {
        (self.value - target).abs() / self.std_error
    }
}

/// Asymptotic variance l (1 + l)^2 / (2 + l) of sqrt(n) (l_hat - l).
pub fn variance_formula(l_value: f64) -> Result<f64> {
    if !(l_value >= 0.0) {
        return Err(Error::NegativeInput(l_value));
    }
    Ok(l_value * (1.0 + l_value).powi(2) / (2.0 + l_value))
}

/// m / (1 - m).
fn ratio(m: f64) -> Result<f64> {
    if !(m < MEAN_CEILING) {
        return Err(Error::DegenerateMean(m));
    }
    Ok(m / (1.0 - m))
}

fn ratio_slope(m: f64) -> f64 {
    (1.0 - m).powi(-2)
}

fn check_sample(sample: &PseudoSample) -> Result<()> {
    if sample.n() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: sample.n(),
        });
    }
    Ok(())
}

fn check_set(sample: &PseudoSample, set: &[usize]) -> Result<()> {
    if set.is_empty() {
        return Err(Error::EmptySet("I"));
    }
    if let Some(&c) = set.iter().find(|&&c| c >= sample.d()) {
        return Err(Error::OutOfRange {
            index: c + 1,
            d: sample.d(),
        });
    }
    Ok(())
}

fn check_scale(x: f64) -> Result<()> {
    if !(x > 0.0) {
        return Err(Error::NonPositiveScale(x));
    }
    Ok(())
}

fn delta_estimate(kind: EstimatorKind, sample: &PseudoSample, mean: f64) -> Result<Estimate> {
    let value = ratio(mean)?;
    let se = (variance_formula(value)? / sample.n() as f64).sqrt();
    Ok(Estimate::new(
        kind,
        value,
        se,
        sample.n(),
        sample.provenance(),
        SeMethod::Delta,
    ))
}

/// Estimates -log F(x_1, ..., x_d) from the mean of max_j u_j^{x_j}.
///
/// `x_j = +inf` removes column j from the maximum (u^inf = 0 on (0,1)).
pub fn stdf_estimate(sample: &PseudoSample, x: &[f64]) -> Result<Estimate> {
    check_sample(sample)?;
    if x.len() != sample.d() {
        return Err(Error::Shape(format!(
            "{} exponents for {} columns",
            x.len(),
            sample.d()
        )));
    }
    for &xj in x {
        check_scale(xj)?;
    }
    let mean = block_mean(sample.n(), |i| {
        sample
            .row(i)
            .iter()
            .zip(x)
            .map(|(u, p)| u.powf(*p))
            .fold(0.0, f64::max)
    });
    delta_estimate(EstimatorKind::Stdf, sample, mean)
}

/// Estimates x eps_I from the mean of max_{j in I} u_j^{1/x}.
pub fn eps_scaled_estimate(sample: &PseudoSample, set: &[usize], x: f64) -> Result<Estimate> {
    check_sample(sample)?;
    check_set(sample, set)?;
    check_scale(x)?;
    let p = 1.0 / x;
    let mean = block_mean(sample.n(), |i| row_group_max(sample.row(i), set, p));
    delta_estimate(EstimatorKind::EpsScaled, sample, mean)
}

fn check_pair(sample: &PseudoSample, pair: &IndexPair) -> Result<()> {
    if pair.d() != sample.d() {
        return Err(Error::Shape(format!(
            "pair built for d = {}, sample has d = {}",
            pair.d(),
            sample.d()
        )));
    }
    Ok(())
}

/// Estimates l^{(I1,I2)}(1/x, 1/y).
pub fn l_pair_estimate(
    sample: &PseudoSample,
    pair: &IndexPair,
    x: f64,
    y: f64,
) -> Result<Estimate> {
    check_sample(sample)?;
    check_pair(sample, pair)?;
    check_scale(x)?;
    check_scale(y)?;
    let (px, py) = (1.0 / x, 1.0 / y);
    let mean = block_mean(sample.n(), |i| {
        let r = sample.row(i);
        row_group_max(r, pair.i1(), px).max(row_group_max(r, pair.i2(), py))
    });
    delta_estimate(EstimatorKind::LPair, sample, mean)
}

/// The three ingredients of the upper-tail dependence estimate and their combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaBreakdown {
    /// x eps_I1
    pub scaled_i1: Estimate,
    /// y eps_I2
    pub scaled_i2: Estimate,
    pub l_pair: Estimate,
    pub combined: Estimate,
}

impl LambdaBreakdown {
    /// True when the combined value leaves [0, min(scaled_i1, scaled_i2)].
    /// Only the lower end can be crossed.
    pub fn out_of_bounds(&self) -> bool {
        let v = self.combined.value;
        v < 0.0 || v > self.scaled_i1.value.min(self.scaled_i2.value)
    }

    pub fn at_level(self, level: f64) -> Result<Self> {
        Ok(Self {
            scaled_i1: self.scaled_i1.at_level(level)?,
            scaled_i2: self.scaled_i2.at_level(level)?,
            l_pair: self.l_pair.at_level(level)?,
            combined: self.combined.at_level(level)?,
        })
    }
}

/// One pass computing the three row maxima, their means and second moments.
pub fn lambda_breakdown(
    sample: &PseudoSample,
    pair: &IndexPair,
    x: f64,
    y: f64,
) -> Result<LambdaBreakdown> {
    check_sample(sample)?;
    check_pair(sample, pair)?;
    check_scale(x)?;
    check_scale(y)?;
    let (px, py) = (1.0 / x, 1.0 / y);
    let n = sample.n();
    let m = block_means::<9, _>(n, |i| {
        let r = sample.row(i);
        let a = row_group_max(r, pair.i1(), px);
        let b = row_group_max(r, pair.i2(), py);
        let c = a.max(b);
        [a, b, c, a * a, b * b, c * c, a * b, a * c, b * c]
    });
    let scaled_i1 = delta_estimate(EstimatorKind::EpsScaled, sample, m[0])?;
    let scaled_i2 = delta_estimate(EstimatorKind::EpsScaled, sample, m[1])?;
    let l_pair = delta_estimate(EstimatorKind::LPair, sample, m[2])?;

    let (g1, g2, g3) = (scaled_i1.value, scaled_i2.value, l_pair.value);
    // g3 >= max(g1, g2) exactly, so lo + (hi - g3) <= lo holds in floating point
    let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
    let value = lo + (hi - g3);

    let corr = n as f64 / (n as f64 - 1.0);
    let cov = |e_xy: f64, mx: f64, my: f64| (e_xy - mx * my) * corr;
    let (saa, sbb, scc) = (
        cov(m[3], m[0], m[0]),
        cov(m[4], m[1], m[1]),
        cov(m[5], m[2], m[2]),
    );
    let (sab, sac, sbc) = (
        cov(m[6], m[0], m[1]),
        cov(m[7], m[0], m[2]),
        cov(m[8], m[1], m[2]),
    );
    let (d1, d2, d3) = (ratio_slope(m[0]), ratio_slope(m[1]), -ratio_slope(m[2]));
    let var = d1 * d1 * saa
        + d2 * d2 * sbb
        + d3 * d3 * scc
        + 2.0 * (d1 * d2 * sab + d1 * d3 * sac + d2 * d3 * sbc);
    let se = (var.max(0.0) / n as f64).sqrt();
    let combined = Estimate::new(
        EstimatorKind::Lambda,
        value,
        se,
        n,
        sample.provenance(),
        SeMethod::EmpiricalDelta,
    );
    Ok(LambdaBreakdown {
        scaled_i1,
        scaled_i2,
        l_pair,
        combined,
    })
}

/// x eps_I1 + y eps_I2 - l^{(I1,I2)}(1/x, 1/y).
pub fn lambda_estimate(
    sample: &PseudoSample,
    pair: &IndexPair,
    x: f64,
    y: f64,
) -> Result<Estimate> {
    Ok(lambda_breakdown(sample, pair, x, y)?.combined)
}

/// eps_I1 + eps_I2 - eps_{I1 u I2}; reported raw, possibly slightly negative.
pub fn eps_pair_breakdown(sample: &PseudoSample, pair: &IndexPair) -> Result<LambdaBreakdown> {
    let mut b = lambda_breakdown(sample, pair, 1.0, 1.0)?;
    b.combined.estimator = EstimatorKind::EpsPair;
    Ok(b)
}

pub fn eps_pair_estimate(sample: &PseudoSample, pair: &IndexPair) -> Result<Estimate> {
    Ok(eps_pair_breakdown(sample, pair)?.combined)
}
