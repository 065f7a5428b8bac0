//! Sample containers, index pairs and margin transforms.
//!
//! Samples are stored row-major. Column indices are zero-based inside the
//! library; [`make_index_pair`] is the one-based entry point used by the CLI
//! and configuration files.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;

/// Lower/upper clamp applied to probability-integral-transform outputs.
pub const PIT_CLAMP: f64 = 1e-12;

/// An n x d matrix of finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSample {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl RawSample {
    pub fn new(data: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Shape(format!(
                "n={n}, d={d}; both must be at least 1"
            )));
        }
        if data.len() != n * d {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {n}x{d} sample",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / d,
                col: pos % d,
            });
        }
        Ok(Self { data, n, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Shape("rows have different lengths".into()));
        }
        Self::new(rows.concat(), n, d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.d).copied()
    }
}

/// How a pseudo-sample was obtained from raw data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    KnownMargins,
    EmpiricalRanks,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::KnownMargins => "known_margins",
            Provenance::EmpiricalRanks => "empirical_ranks",
        }
    }
}

/// Margin-transformed observations, every entry strictly inside (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSample {
    data: Vec<f64>,
    n: usize,
    d: usize,
    provenance: Provenance,
}

impl PseudoSample {
    /// Wraps values that are already on the uniform scale.
    pub fn new(data: Vec<f64>, n: usize, d: usize, provenance: Provenance) -> Result<Self> {
        if n == 0 || d == 0 || data.len() != n * d {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {n}x{d} sample",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|&u| !(u > 0.0 && u < 1.0)) {
            return Err(Error::Shape(format!(
                "entry at row {}, column {} is {}; pseudo-observations must lie in (0,1)",
                pos / d,
                pos % d,
                data[pos]
            )));
        }
        Ok(Self {
            data,
            n,
            d,
            provenance,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.d).copied()
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.d) {
            return Err(Error::OutOfRange {
                index: bad + 1,
                d: self.d,
            });
        }
        let data = self
            .rows()
            .flat_map(|r| cols.iter().map(move |&c| r[c]))
            .collect();
        Ok(Self {
            data,
            n: self.n,
            d: cols.len(),
            provenance: self.provenance,
        })
    }
}

/// Two disjoint, non-empty groups of columns. Stored zero-based and sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexPair {
    i1: Vec<usize>,
    i2: Vec<usize>,
    d: usize,
}

impl IndexPair {
    /// Builds a pair from zero-based column indices.
    pub fn from_zero_based(i1: &[usize], i2: &[usize], d: usize) -> Result<Self> {
        let i1 = normalize_set(i1, d, "I1")?;
        let i2 = normalize_set(i2, d, "I2")?;
        if let Some(&c) = i1.iter().find(|c| i2.binary_search(c).is_ok()) {
            return Err(Error::Overlap(c + 1));
        }
        Ok(Self { i1, i2, d })
    }

    pub fn i1(&self) -> &[usize] {
        &self.i1
    }

    pub fn i2(&self) -> &[usize] {
        &self.i2
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Sorted union of both groups.
    pub fn union(&self) -> Vec<usize> {
        let mut u: Vec<usize> = self.i1.iter().chain(&self.i2).copied().collect();
        u.sort_unstable();
        u
    }

    /// The same pair with the roles of the two groups exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            i1: self.i2.clone(),
            i2: self.i1.clone(),
            d: self.d,
        }
    }

    /// One-based rendering, e.g. `{1,2},{3,4}`.
    pub fn label(&self) -> String {
        let fmt = |s: &[usize]| {
            s.iter()
                .map(|c| (c + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!("{{{}}},{{{}}}", fmt(&self.i1), fmt(&self.i2))
    }
}

fn normalize_set(set: &[usize], d: usize, name: &'static str) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::EmptySet(name));
    }
    let mut v = set.to_vec();
    v.sort_unstable();
    for w in v.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateIndex(w[0] + 1));
        }
    }
    if let Some(&c) = v.iter().find(|&&c| c >= d) {
        return Err(Error::OutOfRange { index: c + 1, d });
    }
    Ok(v)
}

/// Validates a single one-based index set; returns it zero-based and sorted.
pub fn one_based_set(set: &[usize], d: usize) -> Result<Vec<usize>> {
    if let Some(&c) = set.iter().find(|&&c| c == 0 || c > d) {
        return Err(Error::OutOfRange { index: c, d });
    }
    let zero: Vec<usize> = set.iter().map(|c| c - 1).collect();
    normalize_set(&zero, d, "I")
}

/// Validates two one-based index sets against dimension `d`.
pub fn make_index_pair(i1: &[usize], i2: &[usize], d: usize) -> Result<IndexPair> {
    let shift = |s: &[usize]| -> Result<Vec<usize>> {
        s.iter()
            .map(|&c| {
                if c == 0 || c > d {
                    Err(Error::OutOfRange { index: c, d })
                } else {
                    Ok(c - 1)
                }
            })
            .collect()
    };
    if i1.is_empty() {
        return Err(Error::EmptySet("I1"));
    }
    if i2.is_empty() {
        return Err(Error::EmptySet("I2"));
    }
    IndexPair::from_zero_based(&shift(i1)?, &shift(i2)?, d)
}

/// Marginal distribution of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Margin {
    /// exp(-1/x) on x > 0.
    UnitFrechet,
    Uniform01,
    StdNormal,
    /// 1 - (1 - x)^k on [0, 1].
    PowerUniform {
        k: u32,
    },
}

impl Margin {
    pub fn cdf(self, x: f64) -> f64 {
        match self {
            Margin::UnitFrechet => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-1.0 / x).exp()
                }
            }
            Margin::Uniform01 => x.clamp(0.0, 1.0),
            Margin::StdNormal => normal::cdf(x),
            Margin::PowerUniform { k } => {
                let x = x.clamp(0.0, 1.0);
                // 1 - (1-x)^k without cancellation for small x
                -((k as f64) * (-x).ln_1p()).exp_m1()
            }
        }
    }

    pub fn inverse_cdf(self, p: f64) -> f64 {
        match self {
            Margin::UnitFrechet => -1.0 / p.ln(),
            Margin::Uniform01 => p,
            Margin::StdNormal => normal::quantile(p),
            Margin::PowerUniform { k } => -((-p).ln_1p() / k as f64).exp_m1(),
        }
    }
}

/// One margin descriptor per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Margins(pub Vec<Margin>);

impl Margins {
    pub fn uniform(margin: Margin, d: usize) -> Self {
        Self(vec![margin; d])
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .0
            .iter()
            .any(|m| matches!(m, Margin::PowerUniform { k: 0 }))
        {
            return Err(Error::InvalidModel(
                "PowerUniform exponent must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Probability integral transform with known margins.
pub fn pit_transform(raw: &RawSample, margins: &Margins) -> Result<PseudoSample> {
    margins.validate()?;
    if margins.len() != raw.d() {
        return Err(Error::Shape(format!(
            "{} margin descriptors for {} columns",
            margins.len(),
            raw.d()
        )));
    }
    let d = raw.d();
    let data = raw
        .data()
        .iter()
        .enumerate()
        .map(|(k, &x)| margins.0[k % d].cdf(x).clamp(PIT_CLAMP, 1.0 - PIT_CLAMP))
        .collect();
    Ok(PseudoSample {
        data,
        n: raw.n(),
        d,
        provenance: Provenance::KnownMargins,
    })
}

/// Column-wise ranks divided by n + 1; ties get their average rank.
pub fn rank_transform(raw: &RawSample) -> Result<PseudoSample> {
    let (n, d) = (raw.n(), raw.d());
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    let mut data = vec![0.0; n * d];
    let denom = (n + 1) as f64;
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for j in 0..d {
        let col: Vec<f64> = raw.column(j).collect();
        order.clear();
        order.extend(0..n);
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && col[order[end]] == col[order[start]] {
                end += 1;
            }
            // ranks start+1..=end share their mean
            let rank = (start + 1 + end) as f64 / 2.0;
            for &i in &order[start..end] {
                data[i * d + j] = rank / denom;
            }
            start = end;
        }
    }
    Ok(PseudoSample {
        data,
        n,
        d,
        provenance: Provenance::EmpiricalRanks,
    })
}

/// max over j in `set` of u[row, j]^(1/x).
pub fn group_max(sample: &PseudoSample, set: &[usize], x: f64, row: usize) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::NonPositiveScale(x));
    }
    if set.is_empty() {
        return Err(Error::EmptySet("I"));
    }
    if let Some(&c) = set.iter().find(|&&c| c >= sample.d()) {
        return Err(Error::OutOfRange {
            index: c + 1,
            d: sample.d(),
        });
    }
    Ok(row_group_max(sample.row(row), set, 1.0 / x))
}

/// Unchecked kernel: max over `set` of `row[j]^power`.
#[inline]
pub(crate) fn row_group_max(row: &[f64], set: &[usize], power: f64) -> f64 {
    // u^p is increasing in u, so raise only the largest entry
    let m = set
        .iter()
        .map(|&j| row[j])
        .fold(f64::NEG_INFINITY, f64::max);
    if power == 1.0 {
        m
    } else {
        m.powf(power)
    }
}
