//! Exact samplers for the supported models.
//!
//! Every sampler draws from a ChaCha8 generator keyed by [`Seed`]: the seed
//! value selects the key and the stream selects one of 2^64 independent
//! sequences. A given `(model, n, seed)` always produces the same sample.

use rand::distr::Open01;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::models::{GaussianModel, LogisticModel, M4Model, MinFactorModel, ModelSpec};
use crate::sample::{Margins, RawSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Seed {
    pub value: u64,
    #[serde(default)]
    pub stream: u64,
}

impl Seed {
    pub fn new(value: u64, stream: u64) -> Self {
        Self { value, stream }
    }

    /// Same key, stream shifted by `offset`.
    pub fn offset(self, offset: u64) -> Self {
        Self {
            value: self.value,
            stream: self.stream.wrapping_add(offset),
        }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.value);
        rng.set_stream(self.stream);
        rng
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub raw: RawSample,
    pub margins: Margins,
    pub model: ModelSpec,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    Ok(())
}

/// Unit Fréchet variate -1/log(U), U strictly inside (0,1).
fn unit_frechet<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = Open01.sample(rng);
    -1.0 / u.ln()
}

/// log of a positive stable variable with Laplace transform exp(-s^theta),
/// 0 < theta < 1, via Kanter's representation.
fn log_positive_stable<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> f64 {
    let u: f64 = Open01.sample(rng);
    let w: f64 = Exp1.sample(rng);
    let one_m = 1.0 - theta;
    let log_a = ((one_m * PI * u).sin()).ln() + theta / one_m * (theta * PI * u).sin().ln()
        - (PI * u).sin().ln() / one_m;
    one_m / theta * (log_a - w.ln())
}

pub fn sample_logistic(model: &LogisticModel, n: usize, seed: Seed) -> Result<SimOutput> {
    check_n(n)?;
    let (theta, d) = (model.theta(), model.d());
    let mut rng = seed.rng();
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        if theta == 1.0 {
            data.extend((0..d).map(|_| {
                let e: f64 = Exp1.sample(&mut rng);
                1.0 / e
            }));
        } else {
            let log_s = log_positive_stable(theta, &mut rng);
            data.extend((0..d).map(|_| {
                let e: f64 = Exp1.sample(&mut rng);
                (theta * (log_s - e.ln())).exp()
            }));
        }
    }
    Ok(SimOutput {
        raw: RawSample::new(data, n, d)?,
        margins: ModelSpec::Logistic(model.clone()).margins(),
        model: ModelSpec::Logistic(model.clone()),
    })
}

pub fn sample_m4(model: &M4Model, n: usize, seed: Seed) -> Result<SimOutput> {
    check_n(n)?;
    let d = model.d();
    let mut rng = seed.rng();
    let mut data = Vec::with_capacity(n * d);
    let mut z = vec![0.0; model.rows().len()];
    for _ in 0..n {
        for zr in z.iter_mut() {
            *zr = unit_frechet(&mut rng);
        }
        data.extend((0..d).map(|j| {
            model
                .rows()
                .iter()
                .zip(&z)
                .map(|(row, zr)| row[j] * zr)
                .fold(0.0, f64::max)
        }));
    }
    Ok(SimOutput {
        raw: RawSample::new(data, n, d)?,
        margins: ModelSpec::M4(model.clone()).margins(),
        model: ModelSpec::M4(model.clone()),
    })
}

pub fn sample_gaussian(model: &GaussianModel, n: usize, seed: Seed) -> Result<SimOutput> {
    check_n(n)?;
    let d = model.d();
    let l = model.cholesky();
    let mut rng = seed.rng();
    let mut data = Vec::with_capacity(n * d);
    let mut z = vec![0.0; d];
    for _ in 0..n {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        data.extend((0..d).map(|i| (0..=i).map(|k| l[(i, k)] * z[k]).sum::<f64>()));
    }
    Ok(SimOutput {
        raw: RawSample::new(data, n, d)?,
        margins: ModelSpec::Gaussian(model.clone()).margins(),
        model: ModelSpec::Gaussian(model.clone()),
    })
}

pub fn sample_minfactor(n: usize, seed: Seed) -> Result<SimOutput> {
    check_n(n)?;
    let mut rng = seed.rng();
    let mut data = Vec::with_capacity(n * MinFactorModel::D);
    for _ in 0..n {
        let v: [f64; 5] = std::array::from_fn(|_| rng.random::<f64>());
        for f in MinFactorModel::FACTORS {
            data.push(v[f[0]].min(v[f[1]]).min(v[f[2]]));
        }
        data.push(v[4]);
    }
    let model = ModelSpec::MinFactor(MinFactorModel);
    Ok(SimOutput {
        raw: RawSample::new(data, n, MinFactorModel::D)?,
        margins: model.margins(),
        model,
    })
}

/// Dispatches to the sampler of `model`.
pub fn simulate(model: &ModelSpec, n: usize, seed: Seed) -> Result<SimOutput> {
    match model {
        ModelSpec::Logistic(m) => sample_logistic(m, n, seed),
        ModelSpec::M4(m) => sample_m4(m, n, seed),
        ModelSpec::Gaussian(m) => sample_gaussian(m, n, seed),
        ModelSpec::MinFactor(_) => sample_minfactor(n, seed),
    }
}
