//! Monte Carlo checks of the estimators' limit behaviour.
//!
//! Replication `r` simulates from stream `seed.stream + r`, and results are
//! collected in replication order before any statistic is computed, so a
//! report does not depend on how many worker threads ran it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{
    eps_pair_estimate, eps_scaled_estimate, l_pair_estimate, stdf_estimate, variance_formula,
};
use crate::models::{MinFactorModel, ModelSpec};
use crate::normal;
use crate::sample::{
    make_index_pair, one_based_set, pit_transform, rank_transform, IndexPair, Provenance,
    PseudoSample,
};
use crate::simulate::{sample_minfactor, simulate, Seed};
use crate::stats::{ks_distance, mean, median, variance};

/// Mean gate: |scaled mean| <= MEAN_SDS * sqrt(sigma^2 / reps).
pub const MEAN_SDS: f64 = 4.0;
/// Accepted band for empirical / theoretical variance.
pub const VAR_BAND: (f64, f64) = (0.85, 1.15);
/// KS gate: distance <= KS_COEF / sqrt(reps) (1% level).
pub const KS_COEF: f64 = 1.63;
/// Binomial standard errors allowed in the survival check.
pub const SURVIVAL_SDS: f64 = 3.0;
pub const SURVIVAL_MIN_N: usize = 100_000;

/// One-based column groups as they appear in configuration files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSpec {
    pub i1: Vec<usize>,
    pub i2: Vec<usize>,
}

impl PairSpec {
    pub fn resolve(&self, d: usize) -> Result<IndexPair> {
        make_index_pair(&self.i1, &self.i2, d)
    }
}

/// Quantity estimated in each replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    /// -log F(x); `null` entries drop the column.
    Stdf {
        x: Vec<Option<f64>>,
    },
    /// x eps_I for a one-based column set.
    EpsScaled {
        set: Vec<usize>,
        x: f64,
    },
    LPair {
        x: f64,
        y: f64,
    },
    EpsPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub model: ModelSpec,
    pub pair: PairSpec,
    pub target: Target,
    pub n: usize,
    pub reps: usize,
    #[serde(default)]
    pub seed: Seed,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCReport {
    pub estimates: Vec<f64>,
    pub truth: f64,
    pub scaled_mean: f64,
    pub scaled_var: f64,
    pub theory_var: f64,
    pub var_ratio: f64,
    pub ks_distance: f64,
    pub mean_bound: f64,
    pub ks_bound: f64,
    pub pass: bool,
    /// Rank-based runs compare against the known-margin variance and are
    /// informational only.
    pub informational: bool,
}

/// Resolved target: what to compute on each pseudo-sample.
enum Plan {
    Stdf(Vec<f64>),
    EpsScaled(Vec<usize>, f64),
    LPair(f64, f64),
    EpsPair,
}

impl MCConfig {
    fn validate(&self) -> Result<IndexPair> {
        if self.n < 2 {
            return Err(Error::Config(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        if self.reps < 2 {
            return Err(Error::Config(format!(
                "reps must be at least 2, got {}",
                self.reps
            )));
        }
        self.pair.resolve(self.model.d())
    }

    fn plan(&self) -> Result<Plan> {
        let d = self.model.d();
        Ok(match &self.target {
            Target::Stdf { x } => {
                if x.len() != d {
                    return Err(Error::Config(format!("stdf target needs {d} exponents")));
                }
                Plan::Stdf(x.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect())
            }
            Target::EpsScaled { set, x } => Plan::EpsScaled(one_based_set(set, d)?, *x),
            Target::LPair { x, y } => Plan::LPair(*x, *y),
            Target::EpsPair => Plan::EpsPair,
        })
    }

    /// Exact value of the target under the configured model.
    pub fn truth(&self) -> Result<f64> {
        let pair = self.validate()?;
        if !self.model.is_max_stable() {
            return Err(Error::NoTruthAvailable(
                "moment identities need a max-stable model (logistic or m4)".into(),
            ));
        }
        match self.plan()? {
            Plan::Stdf(x) => self.model.neg_log_cdf(&x),
            Plan::EpsScaled(set, x) => {
                let mut w = vec![f64::INFINITY; self.model.d()];
                for j in set {
                    w[j] = 1.0;
                }
                Ok(x * self.model.neg_log_cdf(&w)?)
            }
            Plan::LPair(x, y) => Ok(self.model.functionals(&pair)?.l_pair(x, y)),
            Plan::EpsPair => Ok(self.model.functionals(&pair)?.eps_pair),
        }
    }
}

fn pseudo(model: &ModelSpec, n: usize, seed: Seed, provenance: Provenance) -> Result<PseudoSample> {
    let out = simulate(model, n, seed)?;
    match provenance {
        Provenance::KnownMargins => pit_transform(&out.raw, &out.margins),
        Provenance::EmpiricalRanks => rank_transform(&out.raw),
    }
}

fn run_estimates(cfg: &MCConfig, pair: &IndexPair, plan: &Plan, n: usize) -> Result<Vec<f64>> {
    (0..cfg.reps as u64)
        .into_par_iter()
        .map(|r| {
            let s = pseudo(&cfg.model, n, cfg.seed.offset(r), cfg.provenance)?;
            let e = match plan {
                Plan::Stdf(x) => stdf_estimate(&s, x)?,
                Plan::EpsScaled(set, x) => eps_scaled_estimate(&s, set, *x)?,
                Plan::LPair(x, y) => l_pair_estimate(&s, pair, *x, *y)?,
                Plan::EpsPair => eps_pair_estimate(&s, pair)?,
            };
            Ok(e.value)
        })
        .collect()
}

/// Checks sqrt(n)(estimate - truth) against N(0, sigma^2).
pub fn mc_normality(cfg: &MCConfig) -> Result<MCReport> {
    let pair = cfg.validate()?;
    if cfg.target == Target::EpsPair {
        return Err(Error::UnsupportedTarget(
            "eps_pair has no closed-form asymptotic variance".into(),
        ));
    }
    let truth = cfg.truth()?;
    let theory_var = variance_formula(truth)?;
    if theory_var <= 0.0 {
        return Err(Error::NoTruthAvailable(
            "asymptotic variance is zero".into(),
        ));
    }
    let plan = cfg.plan()?;
    let estimates = run_estimates(cfg, &pair, &plan, cfg.n)?;

    let root_n = (cfg.n as f64).sqrt();
    let scaled: Vec<f64> = estimates.iter().map(|e| root_n * (e - truth)).collect();
    let scaled_mean = mean(&scaled);
    let scaled_var = variance(&scaled);
    let sd = theory_var.sqrt();
    let standardized: Vec<f64> = scaled.iter().map(|s| s / sd).collect();
    let ks = ks_distance(&standardized, normal::cdf);
    let reps = cfg.reps as f64;
    let mean_bound = MEAN_SDS * (theory_var / reps).sqrt();
    let ks_bound = KS_COEF / reps.sqrt();
    let var_ratio = scaled_var / theory_var;
    let pass = scaled_mean.abs() <= mean_bound
        && (VAR_BAND.0..=VAR_BAND.1).contains(&var_ratio)
        && ks <= ks_bound;
    Ok(MCReport {
        estimates,
        truth,
        scaled_mean,
        scaled_var,
        theory_var,
        var_ratio,
        ks_distance: ks,
        mean_bound,
        ks_bound,
        pass,
        informational: cfg.provenance == Provenance::EmpiricalRanks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub n: usize,
    pub median_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub truth: f64,
    pub rows: Vec<ConsistencyRow>,
    pub strictly_decreasing: bool,
}

/// Median absolute error over `cfg.reps` replications for each sample size.
/// `cfg.n` is ignored in favour of `n_grid`.
pub fn mc_consistency(cfg: &MCConfig, n_grid: &[usize]) -> Result<ConsistencyReport> {
    if n_grid.len() < 3 {
        return Err(Error::Config("n_grid needs at least 3 sizes".into()));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("n_grid must be strictly increasing".into()));
    }
    let pair = cfg.validate()?;
    let truth = cfg.truth()?;
    let plan = cfg.plan()?;
    let rows = n_grid
        .iter()
        .map(|&n| {
            let est = run_estimates(cfg, &pair, &plan, n)?;
            let abs: Vec<f64> = est.iter().map(|e| (e - truth).abs()).collect();
            Ok(ConsistencyRow {
                n,
                median_abs_error: median(&abs),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let strictly_decreasing = rows
        .windows(2)
        .all(|w| w[1].median_abs_error < w[0].median_abs_error);
    Ok(ConsistencyReport {
        truth,
        rows,
        strictly_decreasing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCheck {
    pub empirical: f64,
    pub closed_form: f64,
    /// Inclusion-exclusion value, reported for comparison.
    pub exact: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub pass_exact: bool,
}

/// Serialized form of a survival check run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalConfig {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub pair: PairSpec,
    pub n: usize,
    #[serde(default)]
    pub seed: Seed,
}

impl SurvivalConfig {
    pub fn run(&self) -> Result<SurvivalCheck> {
        let pair = self.pair.resolve(MinFactorModel::D)?;
        mc_survival_check(self.t, self.x, self.y, &pair, self.n, self.seed)
    }
}

/// Empirical P(M(I1) > 1 - x/t, M(I2) > 1 - y/t) on the minimum-factor model
/// against the closed form.
pub fn mc_survival_check(
    t: f64,
    x: f64,
    y: f64,
    pair: &IndexPair,
    n: usize,
    seed: Seed,
) -> Result<SurvivalCheck> {
    if n < SURVIVAL_MIN_N {
        return Err(Error::Config(format!(
            "survival check needs n >= {SURVIVAL_MIN_N}, got {n}"
        )));
    }
    let closed_form = crate::models::minfactor_joint_survival(t, x, y, pair)?;
    let exact = crate::models::minfactor_exact_survival(t, x, y, pair)?;
    let out = sample_minfactor(n, seed)?;
    let u = pit_transform(&out.raw, &out.margins)?;
    debug_assert_eq!(u.d(), MinFactorModel::D);
    let (lx, ly) = (1.0 - x / t, 1.0 - y / t);
    let hits = u
        .rows()
        .filter(|r| pair.i1().iter().any(|&j| r[j] > lx) && pair.i2().iter().any(|&j| r[j] > ly))
        .count();
    let empirical = hits as f64 / n as f64;
    let tolerance = SURVIVAL_SDS * (closed_form * (1.0 - closed_form) / n as f64).sqrt();
    let tol_exact = SURVIVAL_SDS * (exact * (1.0 - exact) / n as f64).sqrt();
    Ok(SurvivalCheck {
        empirical,
        closed_form,
        exact,
        tolerance,
        pass: (empirical - closed_form).abs() <= tolerance,
        pass_exact: (empirical - exact).abs() <= tol_exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{GaussianModel, LogisticModel, M4Model};

    fn cfg(model: ModelSpec, target: Target) -> MCConfig {
        MCConfig {
            model,
            pair: PairSpec {
                i1: vec![1, 2],
                i2: vec![3, 4],
            },
            target,
            n: 200,
            reps: 200,
            seed: Seed::new(99, 0),
            provenance: Provenance::KnownMargins,
        }
    }

    #[test]
    fn truths() {
        let l = ModelSpec::Logistic(LogisticModel::new(0.5, 4).unwrap());
        let c = cfg(
            l.clone(),
            Target::EpsScaled {
                set: vec![1, 2],
                x: 1.0,
            },
        );
        assert!((c.truth().unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let c = cfg(
            l.clone(),
            Target::EpsScaled {
                set: vec![1, 2],
                x: 2.0,
            },
        );
        assert!((c.truth().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        let m4 = ModelSpec::M4(M4Model::example());
        assert_eq!(
            cfg(m4.clone(), Target::LPair { x: 1.0, y: 1.0 })
                .truth()
                .unwrap(),
            2.0
        );
        assert_eq!(cfg(m4.clone(), Target::EpsPair).truth().unwrap(), 7.0 / 8.0);
        assert_eq!(
            cfg(
                m4,
                Target::Stdf {
                    x: vec![Some(1.0), Some(1.0), None, None]
                }
            )
            .truth()
            .unwrap(),
            9.0 / 8.0
        );
    }

    #[test]
    fn rejects_unsupported() {
        let g = ModelSpec::Gaussian(
            GaussianModel::new(vec![
                vec![1.0, 0.3, 0.0, 0.0],
                vec![0.3, 1.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0],
            ])
            .unwrap(),
        );
        assert!(matches!(
            mc_normality(&cfg(g, Target::EpsPair)),
            Err(Error::UnsupportedTarget(_))
        ));
        let g = ModelSpec::MinFactor(MinFactorModel);
        assert!(matches!(
            mc_normality(&cfg(g, Target::LPair { x: 1.0, y: 1.0 })),
            Err(Error::NoTruthAvailable(_))
        ));
        let m4 = ModelSpec::M4(M4Model::example());
        let mut c = cfg(m4, Target::LPair { x: 1.0, y: 1.0 });
        c.reps = 1;
        assert!(matches!(mc_normality(&c), Err(Error::Config(_))));
        c.reps = 10;
        assert!(mc_consistency(&c, &[10, 20]).is_err());
        assert!(mc_consistency(&c, &[10, 30, 20]).is_err());
    }

    #[test]
    fn total_dependence_stdf_normality() {
        let total = ModelSpec::M4(M4Model::total_dependence(2));
        let c = MCConfig {
            model: total,
            pair: PairSpec {
                i1: vec![1],
                i2: vec![2],
            },
            target: Target::Stdf {
                x: vec![Some(1.0), Some(1.0)],
            },
            n: 500,
            reps: 2000,
            seed: Seed::new(4, 0),
            provenance: Provenance::KnownMargins,
        };
        let r = mc_normality(&c).unwrap();
        assert_eq!(r.truth, 1.0);
        assert!((r.theory_var - 4.0 / 3.0).abs() < 1e-15);
        assert!(r.pass, "{:?}", (r.scaled_mean, r.var_ratio, r.ks_distance));
    }

    #[test]
    fn reports_independent_of_thread_count() {
        let m4 = ModelSpec::M4(M4Model::example());
        let c = cfg(m4, Target::LPair { x: 1.0, y: 1.0 });
        let run = |t| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .unwrap()
                .install(|| mc_normality(&c).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(
            a.estimates.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.estimates.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(a.var_ratio.to_bits(), b.var_ratio.to_bits());
    }

    #[test]
    fn independence_consistency_shrinks() {
        let indep = ModelSpec::Logistic(LogisticModel::new(1.0, 4).unwrap());
        let mut c = cfg(indep, Target::EpsPair);
        c.reps = 100;
        let r = mc_consistency(&c, &[250, 1000, 4000]).unwrap();
        assert_eq!(r.truth, 0.0);
        assert!(r.strictly_decreasing, "{r:?}");
    }

    #[test]
    fn survival_product_pair() {
        let pair = make_index_pair(&[1, 2, 3], &[4], 4).unwrap();
        let r = mc_survival_check(10.0, 1.0, 1.0, &pair, 1_000_000, Seed::new(31, 0)).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.pass_exact);
        assert!(mc_survival_check(10.0, 1.0, 1.0, &pair, 1000, Seed::new(31, 0)).is_err());
    }
}
