//! Exact tail functionals for the supported model families.
//!
//! For a pair of column groups (I1, I2) every model provides
//!
//! * `l_pair(x, y)`: the stable tail dependence function evaluated with
//!   weight `x` on I1, `y` on I2 and zero elsewhere,
//! * the extremal coefficients eps_I1, eps_I2, eps_{I1 u I2},
//! * `lambda_u(x, y) = x eps_I1 + y eps_I2 - l_pair(x, y)`, the upper-tail
//!   dependence function, and `eps_pair = lambda_u(1, 1)`.
//!
//! The Gaussian and minimum-factor models are asymptotically independent
//! across any pair; their functionals are those of the independence limit and
//! the interesting quantity is the tail-independence coefficient eta.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{IndexPair, Margin, Margins};

/// Absolute tolerance on M4 column sums.
pub const M4_COLUMN_TOL: f64 = 1e-12;

/// Symmetric logistic max-stable model with unit Fréchet margins.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    theta: f64,
    d: usize,
}

impl LogisticModel {
    pub fn new(theta: f64, d: usize) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::InvalidModel(format!(
                "logistic theta must lie in (0,1], got {theta}"
            )));
        }
        if d < 2 {
            return Err(Error::InvalidModel(format!(
                "logistic model needs d >= 2, got {d}"
            )));
        }
        Ok(Self { theta, d })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn d(&self) -> usize {
        self.d
    }
}

/// Max-stable margin of a multivariate maxima of moving maxima process,
/// with the doubly indexed weight family flattened to a list of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct M4Model {
    rows: Vec<Vec<f64>>,
    d: usize,
}

impl M4Model {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || d == 0 {
            return Err(Error::InvalidModel(
                "M4 model needs at least one non-empty weight row".into(),
            ));
        }
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidModel(
                "M4 weight rows have different lengths".into(),
            ));
        }
        if rows.iter().flatten().any(|&a| !(a >= 0.0 && a.is_finite())) {
            return Err(Error::InvalidModel(
                "M4 weights must be finite and non-negative".into(),
            ));
        }
        for j in 0..d {
            let s: f64 = rows.iter().map(|r| r[j]).sum();
            if (s - 1.0).abs() > M4_COLUMN_TOL {
                return Err(Error::InvalidModel(format!(
                    "M4 column {} sums to {s}, expected 1",
                    j + 1
                )));
            }
        }
        Ok(Self { rows, d })
    }

    /// The four-term, four-column weight table used as the worked example
    /// throughout the documentation.
    pub fn example() -> Self {
        let e = |v: [f64; 4]| v.iter().map(|a| a / 8.0).collect::<Vec<_>>();
        Self::new(vec![
            e([1.0, 1.0, 1.0, 1.0]),
            e([5.0, 4.0, 7.0, 1.0]),
            e([1.0, 2.0, 0.0, 0.0]),
            e([1.0, 1.0, 0.0, 6.0]),
        ])
        .expect("example table is valid")
    }

    /// Single row of ones: all columns equal almost surely.
    pub fn total_dependence(d: usize) -> Self {
        Self::new(vec![vec![1.0; d]]).expect("ones are valid")
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn d(&self) -> usize {
        self.d
    }

    fn row_max(row: &[f64], set: &[usize]) -> f64 {
        set.iter().map(|&j| row[j]).fold(0.0, f64::max)
    }

    /// eps_I = sum over rows of max_{j in I} alpha_j.
    pub fn extremal_coefficient(&self, set: &[usize]) -> f64 {
        self.rows.iter().map(|r| Self::row_max(r, set)).sum()
    }
}

/// Standard Gaussian vector with a positive definite correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModel {
    corr: Vec<Vec<f64>>,
    chol: DMatrix<f64>,
}

impl GaussianModel {
    #[allow(clippy::needless_range_loop)]
    pub fn new(corr: Vec<Vec<f64>>) -> Result<Self> {
        let d = corr.len();
        if d == 0 || corr.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidModel(
                "correlation matrix must be square and non-empty".into(),
            ));
        }
        for i in 0..d {
            if corr[i][i] != 1.0 {
                return Err(Error::InvalidModel(format!(
                    "diagonal entry {} is not 1",
                    i + 1
                )));
            }
            for j in 0..i {
                let r = corr[i][j];
                if r != corr[j][i] {
                    return Err(Error::InvalidModel(
                        "correlation matrix is not symmetric".into(),
                    ));
                }
                if !(r > -1.0 && r < 1.0) {
                    return Err(Error::InvalidModel(format!(
                        "correlation ({},{}) = {r} is outside (-1,1)",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let m = DMatrix::from_fn(d, d, |i, j| corr[i][j]);
        let chol = m.cholesky().ok_or(Error::NotPositiveDefinite)?.unpack();
        Ok(Self { corr, chol })
    }

    pub fn corr(&self) -> &[Vec<f64>] {
        &self.corr
    }

    pub fn d(&self) -> usize {
        self.corr.len()
    }

    /// Lower Cholesky factor of the correlation matrix.
    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.chol
    }
}

/// X1 = min(V3,V2,V1), X2 = min(V4,V2,V1), X3 = min(V4,V3,V1), X4 = V5 with
/// V1..V5 i.i.d. uniform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MinFactorModel;

impl MinFactorModel {
    pub const D: usize = 4;
    /// Zero-based V indices entering each of the first three columns.
    pub const FACTORS: [[usize; 3]; 3] = [[0, 1, 2], [0, 1, 3], [0, 2, 3]];
}

/// A validated model specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpecRaw", into = "ModelSpecRaw")]
pub enum ModelSpec {
    Logistic(LogisticModel),
    M4(M4Model),
    Gaussian(GaussianModel),
    MinFactor(MinFactorModel),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum ModelSpecRaw {
    Logistic { theta: f64, d: usize },
    M4 { rows: Vec<Vec<f64>> },
    Gaussian { corr: Vec<Vec<f64>> },
    Minfactor {},
}

impl TryFrom<ModelSpecRaw> for ModelSpec {
    type Error = Error;

    fn try_from(raw: ModelSpecRaw) -> Result<Self> {
        Ok(match raw {
            ModelSpecRaw::Logistic { theta, d } => {
                ModelSpec::Logistic(LogisticModel::new(theta, d)?)
            }
            ModelSpecRaw::M4 { rows } => ModelSpec::M4(M4Model::new(rows)?),
            ModelSpecRaw::Gaussian { corr } => ModelSpec::Gaussian(GaussianModel::new(corr)?),
            ModelSpecRaw::Minfactor {} => ModelSpec::MinFactor(MinFactorModel),
        })
    }
}

impl From<ModelSpec> for ModelSpecRaw {
    fn from(m: ModelSpec) -> Self {
        match m {
            ModelSpec::Logistic(l) => ModelSpecRaw::Logistic {
                theta: l.theta,
                d: l.d,
            },
            ModelSpec::M4(m) => ModelSpecRaw::M4 { rows: m.rows },
            ModelSpec::Gaussian(g) => ModelSpecRaw::Gaussian { corr: g.corr },
            ModelSpec::MinFactor(_) => ModelSpecRaw::Minfactor {},
        }
    }
}

impl ModelSpec {
    pub fn d(&self) -> usize {
        match self {
            ModelSpec::Logistic(m) => m.d(),
            ModelSpec::M4(m) => m.d(),
            ModelSpec::Gaussian(m) => m.d(),
            ModelSpec::MinFactor(_) => MinFactorModel::D,
        }
    }

    /// Whether the model is max-stable, i.e. the moment identities hold exactly.
    pub fn is_max_stable(&self) -> bool {
        matches!(self, ModelSpec::Logistic(_) | ModelSpec::M4(_))
    }

    /// Declared marginal distributions of simulated data.
    pub fn margins(&self) -> Margins {
        match self {
            ModelSpec::Logistic(m) => Margins::uniform(Margin::UnitFrechet, m.d()),
            ModelSpec::M4(m) => Margins::uniform(Margin::UnitFrechet, m.d()),
            ModelSpec::Gaussian(m) => Margins::uniform(Margin::StdNormal, m.d()),
            ModelSpec::MinFactor(_) => Margins(vec![
                Margin::PowerUniform { k: 3 },
                Margin::PowerUniform { k: 3 },
                Margin::PowerUniform { k: 3 },
                Margin::Uniform01,
            ]),
        }
    }

    pub fn functionals(&self, pair: &IndexPair) -> Result<TailFunctionals> {
        check_dim(pair, self.d())?;
        Ok(match self {
            ModelSpec::Logistic(m) => logistic_functionals(m, pair)?,
            ModelSpec::M4(m) => m4_functionals(m, pair)?,
            ModelSpec::Gaussian(_) | ModelSpec::MinFactor(_) => {
                TailFunctionals::independent(pair.i1().len(), pair.i2().len())
            }
        })
    }

    /// -log F(x_1..x_d) for unit Fréchet margins; `x_j = +inf` drops column j.
    pub fn neg_log_cdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d() {
            return Err(Error::Shape(format!(
                "{} arguments for d = {}",
                x.len(),
                self.d()
            )));
        }
        if let Some(&bad) = x.iter().find(|&&v| !(v > 0.0)) {
            return Err(Error::NonPositiveScale(bad));
        }
        match self {
            ModelSpec::Logistic(m) => {
                let s: f64 = x.iter().map(|&v| v.powf(-1.0 / m.theta)).sum();
                Ok(s.powf(m.theta))
            }
            ModelSpec::M4(m) => Ok(m
                .rows
                .iter()
                .map(|r| r.iter().zip(x).map(|(a, v)| a / v).fold(0.0, f64::max))
                .sum()),
            _ => Err(Error::NoTruthAvailable(
                "the model is not max-stable; -log F has no closed form here".into(),
            )),
        }
    }
}

fn check_dim(pair: &IndexPair, d: usize) -> Result<()> {
    if pair.d() != d {
        return Err(Error::Shape(format!(
            "pair built for d = {}, model has d = {d}",
            pair.d()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum Kernel {
    Logistic {
        theta: f64,
        n1: f64,
        n2: f64,
    },
    /// Per-row group maxima of the weights.
    M4 {
        m1: Vec<f64>,
        m2: Vec<f64>,
    },
    Independent {
        n1: f64,
        n2: f64,
    },
}

/// Exact extremal-dependence functionals of one model for one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TailFunctionals {
    pub eps_i1: f64,
    pub eps_i2: f64,
    pub eps_union: f64,
    pub eps_pair: f64,
    kernel: Kernel,
}

impl TailFunctionals {
    fn independent(n1: usize, n2: usize) -> Self {
        let (a, b) = (n1 as f64, n2 as f64);
        Self {
            eps_i1: a,
            eps_i2: b,
            eps_union: a + b,
            eps_pair: 0.0,
            kernel: Kernel::Independent { n1: a, n2: b },
        }
    }

    /// Stable tail dependence function with weight x on I1 and y on I2 (x, y >= 0).
    pub fn l_pair(&self, x: f64, y: f64) -> f64 {
        match &self.kernel {
            Kernel::Logistic { theta, n1, n2 } => {
                logistic_l(*theta, n1.powf(*theta) * x, n2.powf(*theta) * y)
            }
            Kernel::M4 { m1, m2 } => m1.iter().zip(m2).map(|(a, b)| (x * a).max(y * b)).sum(),
            Kernel::Independent { n1, n2 } => n1 * x + n2 * y,
        }
    }

    /// Upper-tail dependence function on [0, inf]^2 minus (inf, inf).
    ///
    /// An infinite argument follows the 1/0 = inf convention of the defining
    /// limit: lambda_u(inf, y) = y eps_I2. This is not always the limit as
    /// x grows; M4 rows with no weight on I1 keep contributing to l_pair.
    pub fn lambda_u(&self, x: f64, y: f64) -> f64 {
        match (x.is_infinite(), y.is_infinite()) {
            (true, true) => return f64::NAN,
            (true, false) => return y * self.eps_i2,
            (false, true) => return x * self.eps_i1,
            _ => {}
        }
        match &self.kernel {
            Kernel::Logistic { theta, n1, n2 } => {
                logistic_lambda(*theta, n1.powf(*theta) * x, n2.powf(*theta) * y)
            }
            // x a + y b - max(x a, y b) = min(x a, y b)
            Kernel::M4 { m1, m2 } => m1.iter().zip(m2).map(|(a, b)| (x * a).min(y * b)).sum(),
            Kernel::Independent { .. } => 0.0,
        }
    }
}

/// (a^{1/theta} + b^{1/theta})^theta for a, b >= 0, without overflow.
fn logistic_l(theta: f64, a: f64, b: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if hi == 0.0 {
        return 0.0;
    }
    let r = (lo / hi).powf(1.0 / theta);
    hi * (theta * r.ln_1p()).exp()
}

/// a + b - (a^{1/theta} + b^{1/theta})^theta, stable for lopsided arguments.
fn logistic_lambda(theta: f64, a: f64, b: f64) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if hi == 0.0 {
        return 0.0;
    }
    let r = (lo / hi).powf(1.0 / theta);
    lo - hi * (theta * r.ln_1p()).exp_m1()
}

/// l^{(I1,I2)}(1/x, 1/y) = (|I1| x^{1/theta} + |I2| y^{1/theta})^theta.
pub fn logistic_l_pair(model: &LogisticModel, pair: &IndexPair, x: f64, y: f64) -> Result<f64> {
    check_positive(x, y)?;
    check_dim(pair, model.d)?;
    let t = model.theta;
    let (n1, n2) = (pair.i1().len() as f64, pair.i2().len() as f64);
    Ok(logistic_l(t, n1.powf(t) * x, n2.powf(t) * y))
}

pub fn logistic_functionals(model: &LogisticModel, pair: &IndexPair) -> Result<TailFunctionals> {
    check_dim(pair, model.d)?;
    let t = model.theta;
    let (n1, n2) = (pair.i1().len() as f64, pair.i2().len() as f64);
    let eps_i1 = n1.powf(t);
    let eps_i2 = n2.powf(t);
    let eps_union = (n1 + n2).powf(t);
    Ok(TailFunctionals {
        eps_i1,
        eps_i2,
        eps_union,
        eps_pair: eps_i1 + eps_i2 - eps_union,
        kernel: Kernel::Logistic { theta: t, n1, n2 },
    })
}

/// sum over rows of max(x max_{I1} alpha, y max_{I2} alpha); other columns drop out.
pub fn m4_l_pair(model: &M4Model, pair: &IndexPair, x: f64, y: f64) -> Result<f64> {
    check_positive(x, y)?;
    Ok(m4_functionals(model, pair)?.l_pair(x, y))
}

pub fn m4_functionals(model: &M4Model, pair: &IndexPair) -> Result<TailFunctionals> {
    check_dim(pair, model.d)?;
    let m1: Vec<f64> = model
        .rows
        .iter()
        .map(|r| M4Model::row_max(r, pair.i1()))
        .collect();
    let m2: Vec<f64> = model
        .rows
        .iter()
        .map(|r| M4Model::row_max(r, pair.i2()))
        .collect();
    let eps_i1: f64 = m1.iter().sum();
    let eps_i2: f64 = m2.iter().sum();
    let eps_union: f64 = m1.iter().zip(&m2).map(|(a, b)| a.max(*b)).sum();
    Ok(TailFunctionals {
        eps_i1,
        eps_i2,
        eps_union,
        eps_pair: eps_i1 + eps_i2 - eps_union,
        kernel: Kernel::M4 { m1, m2 },
    })
}

/// x eps1 + y eps2 - l.
pub fn lambda_from_parts(eps1: f64, eps2: f64, l_pair_value: f64, x: f64, y: f64) -> f64 {
    x * eps1 + y * eps2 - l_pair_value
}

fn check_positive(x: f64, y: f64) -> Result<()> {
    if !(x > 0.0) {
        return Err(Error::NonPositiveScale(x));
    }
    if !(y > 0.0) {
        return Err(Error::NonPositiveScale(y));
    }
    Ok(())
}

/// (1 + max cross-correlation) / 2.
pub fn gaussian_eta(model: &GaussianModel, pair: &IndexPair) -> Result<f64> {
    check_dim(pair, model.d())?;
    let rho = pair
        .i1()
        .iter()
        .flat_map(|&i| pair.i2().iter().map(move |&j| model.corr[i][j]))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((1.0 + rho) / 2.0)
}

/// Maximum of pairwise coefficients over I1 x I2. Keys are one-based and
/// may be given in either order.
pub fn eta_from_pairwise(table: &HashMap<(usize, usize), f64>, pair: &IndexPair) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for &i in pair.i1() {
        for &j in pair.i2() {
            let (a, b) = (i + 1, j + 1);
            let v = *table
                .get(&(a, b))
                .or_else(|| table.get(&(b, a)))
                .ok_or(Error::MissingPair(a, b))?;
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::OutOfDomain(format!(
                    "eta({a},{b}) = {v} is outside (0,1]"
                )));
            }
            best = best.max(v);
        }
    }
    Ok(best)
}

/// The three pairs of the minimum-factor model with known tail behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinFactorPair {
    /// ({1,2},{3,4})
    TwoTwo,
    /// ({1,2,3},{4})
    ThreeOne,
    /// ({1},{2,3,4})
    OneThree,
}

impl MinFactorPair {
    pub fn classify(pair: &IndexPair) -> Result<Self> {
        check_dim(pair, MinFactorModel::D)?;
        match (pair.i1(), pair.i2()) {
            ([0, 1], [2, 3]) => Ok(Self::TwoTwo),
            ([0, 1, 2], [3]) => Ok(Self::ThreeOne),
            ([0], [1, 2, 3]) => Ok(Self::OneThree),
            _ => Err(Error::UnsupportedPair(pair.label())),
        }
    }
}

/// Coefficient of tail dependence and limiting function c of one minimum-factor pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinFactorTail {
    pub kind: MinFactorPair,
    pub eta: f64,
}

impl MinFactorTail {
    /// Limit function c(x, y), homogeneous of order 1/eta with c(1, 1) = 1.
    pub fn c(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            MinFactorPair::TwoTwo => c_two_two(x, y),
            MinFactorPair::ThreeOne => x * y,
            MinFactorPair::OneThree => c_two_two(y, x),
        }
    }
}

fn c_two_two(x: f64, y: f64) -> f64 {
    if x <= y {
        2.0 * x * y.cbrt() - x * x.cbrt()
    } else {
        y * x.cbrt()
    }
}

pub fn minfactor_eta_and_c(pair: &IndexPair) -> Result<MinFactorTail> {
    let kind = MinFactorPair::classify(pair)?;
    let eta = match kind {
        MinFactorPair::TwoTwo | MinFactorPair::OneThree => 0.75,
        MinFactorPair::ThreeOne => 0.5,
    };
    Ok(MinFactorTail { kind, eta })
}

fn check_survival_args(t: f64, x: f64, y: f64) -> Result<()> {
    if !(t > 1.0) {
        return Err(Error::OutOfDomain(format!("t must exceed 1, got {t}")));
    }
    check_positive(x, y)?;
    if !(x / t < 1.0 && y / t < 1.0) {
        return Err(Error::OutOfDomain(format!(
            "need x/t and y/t below 1 (x={x}, y={y}, t={t})"
        )));
    }
    Ok(())
}

/// Closed-form joint survival P(M(I1) > 1 - x/t, M(I2) > 1 - y/t) for the
/// minimum-factor model.
///
/// For ({1,2},{3,4}) this is the published two-branch expression, whose
/// leading terms are exact but whose t^{-7/3} corrections are not; at
/// moderate t it differs from [`minfactor_exact_survival`] by several
/// percent. ({1},{2,3,4}) uses the same expression with (x, y) swapped.
/// ({1,2,3},{4}) is the exact product of independent marginal terms.
pub fn minfactor_joint_survival(t: f64, x: f64, y: f64, pair: &IndexPair) -> Result<f64> {
    let kind = MinFactorPair::classify(pair)?;
    check_survival_args(t, x, y)?;
    Ok(match kind {
        MinFactorPair::TwoTwo => two_two_survival(t, x, y),
        MinFactorPair::OneThree => two_two_survival(t, y, x),
        MinFactorPair::ThreeOne => {
            let s = x / t;
            (3.0 * s - 2.0 * s.powf(4.0 / 3.0)) * (y / t)
        }
    })
}

fn two_two_survival(t: f64, x: f64, y: f64) -> f64 {
    let t43 = t.powf(-4.0 / 3.0);
    let t2 = t.powi(-2);
    let t73 = t.powf(-7.0 / 3.0);
    let (xc, yc) = (x.cbrt(), y.cbrt());
    if x <= y {
        2.0 * t43 * x * yc + 2.0 * t2 * x * y
            - t43 * x * xc
            - 2.0 * t73 * x * y * yc
            - 2.0 * t73 * x * xc * y
    } else {
        t43 * y * xc + 2.0 * t2 * x * y - 3.0 * t73 * xc * y * y - t73 * x * xc * y
    }
}

/// Exact joint survival for any pair of the minimum-factor model, by
/// inclusion-exclusion over the underlying uniforms.
pub fn minfactor_exact_survival(t: f64, x: f64, y: f64, pair: &IndexPair) -> Result<f64> {
    check_dim(pair, MinFactorModel::D)?;
    check_survival_args(t, x, y)?;
    // exceedance level s_j for each column in the pair
    let mut s = [None; 4];
    for &j in pair.i1() {
        s[j] = Some(x / t);
    }
    for &j in pair.i2() {
        s[j] = Some(y / t);
    }
    let n1 = pair.i1().len();
    let n2 = pair.i2().len();
    let mut total = 0.0;
    for mask1 in 1u32..(1 << n1) {
        for mask2 in 1u32..(1 << n2) {
            let cols = pair
                .i1()
                .iter()
                .enumerate()
                .filter(|(k, _)| mask1 >> k & 1 == 1)
                .chain(
                    pair.i2()
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| mask2 >> k & 1 == 1),
                )
                .map(|(_, &j)| j);
            // lower thresholds each V must exceed
            let mut thr = [0.0f64; 5];
            for j in cols {
                let sj = s[j].expect("column belongs to the pair");
                if j == 3 {
                    thr[4] = thr[4].max(1.0 - sj);
                } else {
                    let a = 1.0 - sj.cbrt();
                    for &v in &MinFactorModel::FACTORS[j] {
                        thr[v] = thr[v].max(a);
                    }
                }
            }
            let p: f64 = thr.iter().map(|a| 1.0 - a).product();
            let sign = if (mask1.count_ones() + mask2.count_ones()) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            total += sign * p;
        }
    }
    Ok(total)
}
