//! Daily prices to monthly block maxima to a table of group-to-group
//! extremal coefficients of dependence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{eps_pair_breakdown, Estimate, LambdaBreakdown};
use crate::sample::{rank_transform, IndexPair, RawSample};

pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// Dated rows of per-column values: prices or returns.
#[derive(Debug, Clone, PartialEq)]
pub struct DatedTable {
    dates: Vec<NaiveDate>,
    names: Vec<String>,
    values: RawSample,
}

/// Daily closing prices; all values positive, dates strictly increasing.
pub type PriceSeries = DatedTable;

impl DatedTable {
    pub fn new(dates: Vec<NaiveDate>, names: Vec<String>, values: RawSample) -> Result<Self> {
        if dates.len() != values.n() || names.len() != values.d() {
            return Err(Error::Shape(format!(
                "{} dates and {} names for a {}x{} table",
                dates.len(),
                names.len(),
                values.n(),
                values.d()
            )));
        }
        if let Some(i) = dates.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::NonMonotoneDates(i + 2));
        }
        check_unique(&names)?;
        Ok(Self {
            dates,
            names,
            values,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &RawSample {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.n()
    }
}

fn check_unique(names: &[String]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for name in names {
        if name.is_empty() {
            return Err(Error::Config("empty column name".into()));
        }
        if !seen.insert(name) {
            return Err(Error::Config(format!("duplicate column name {name}")));
        }
    }
    Ok(())
}

/// Reads `date,<name1>,...` with ISO dates. Line numbers in errors are 1-based
/// file lines (the header is line 1).
pub fn load_prices(path: impl AsRef<Path>) -> Result<PriceSeries> {
    let file = std::fs::File::open(path)?;
    read_prices(file)
}

pub fn read_prices<R: std::io::Read>(reader: R) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.get(0).map(|h| h.eq_ignore_ascii_case("date")) != Some(true) {
        return Err(Error::Parse {
            line: 1,
            msg: "first column must be `date`".into(),
        });
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    if names.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "no price columns".into(),
        });
    }
    check_unique(&names)?;

    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut data = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != names.len() + 1 {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, found {}", names.len() + 1, rec.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&rec[0], DATE_FORMAT).map_err(|e| Error::Parse {
            line,
            msg: format!("bad date {:?}: {e}", &rec[0]),
        })?;
        if dates.last().is_some_and(|&prev| prev >= date) {
            return Err(Error::NonMonotoneDates(line));
        }
        for (cell, name) in rec.iter().skip(1).zip(&names) {
            if cell.is_empty() {
                return Err(Error::MissingValue {
                    line,
                    column: name.clone(),
                });
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad number {cell:?} in {name}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    msg: format!("non-finite value in {name}"),
                });
            }
            if v <= 0.0 {
                return Err(Error::NonPositivePrice {
                    line,
                    column: name.clone(),
                });
            }
            data.push(v);
        }
        dates.push(date);
    }
    let n = dates.len();
    if n == 0 {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    let d = names.len();
    DatedTable::new(dates, names, RawSample::new(data, n, d)?)
}

/// Inner join on dates. Returns the joined series and the number of distinct
/// dates dropped because some series lacked them.
pub fn align(series: &[PriceSeries]) -> Result<(PriceSeries, usize)> {
    let Some(first) = series.first() else {
        return Err(Error::Config("no price series to align".into()));
    };
    let names: Vec<String> = series
        .iter()
        .flat_map(|s| s.names.iter().cloned())
        .collect();
    check_unique(&names)?;
    let all: BTreeSet<NaiveDate> = series
        .iter()
        .flat_map(|s| s.dates.iter().copied())
        .collect();
    let common: Vec<NaiveDate> = first
        .dates
        .iter()
        .copied()
        .filter(|d| series[1..].iter().all(|s| s.dates.binary_search(d).is_ok()))
        .collect();
    if common.is_empty() {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    let mut data = Vec::with_capacity(common.len() * names.len());
    for date in &common {
        for s in series {
            let i = s.dates.binary_search(date).expect("date is common");
            data.extend_from_slice(s.values.row(i));
        }
    }
    let dropped = all.len() - common.len();
    let d = names.len();
    let n = common.len();
    Ok((
        DatedTable::new(common, names, RawSample::new(data, n, d)?)?,
        dropped,
    ))
}

/// r_t = -log(P_t / P_{t-1}), dated by the later day.
pub fn neg_log_returns(series: &PriceSeries) -> Result<DatedTable> {
    let n = series.n();
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    let d = series.values.d();
    let mut data = Vec::with_capacity((n - 1) * d);
    for t in 1..n {
        let (prev, cur) = (series.values.row(t - 1), series.values.row(t));
        data.extend(cur.iter().zip(prev).map(|(c, p)| -(c / p).ln()));
    }
    DatedTable::new(
        series.dates[1..].to_vec(),
        series.names.clone(),
        RawSample::new(data, n - 1, d)?,
    )
}

/// One row per calendar month present in the data.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMaxima {
    pub months: Vec<(i32, u32)>,
    pub names: Vec<String>,
    pub maxima: RawSample,
}

/// Column-wise maxima within each (year, month). Months without rows are absent.
pub fn monthly_block_maxima(returns: &DatedTable) -> Result<BlockMaxima> {
    let d = returns.values.d();
    let mut months: Vec<(i32, u32)> = Vec::new();
    let mut data: Vec<f64> = Vec::new();
    for (date, row) in returns.dates.iter().zip(returns.values.rows()) {
        let key = (date.year(), date.month());
        if months.last() == Some(&key) {
            let start = data.len() - d;
            for (m, v) in data[start..].iter_mut().zip(row) {
                *m = m.max(*v);
            }
        } else {
            months.push(key);
            data.extend_from_slice(row);
        }
    }
    let n = months.len();
    Ok(BlockMaxima {
        months,
        names: returns.names.clone(),
        maxima: RawSample::new(data, n, d)?,
    })
}

/// Named column groups and the pairs of group expressions to analyze.
/// An expression is a group label or labels joined by `|` (union).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupConfig {
    pub groups: BTreeMap<String, Vec<String>>,
    pub pairs: Vec<(String, String)>,
}

const MARKETS: &str = include_str!("../configs/markets.json");

impl GroupConfig {
    /// Europe / USA / Far East grouping with the six pairs of the market table.
    pub fn markets() -> Self {
        serde_json::from_str(MARKETS).expect("bundled config is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Zero-based column indices of an expression, sorted.
    pub fn resolve(&self, expr: &str, names: &[String]) -> Result<Vec<usize>> {
        let mut cols = BTreeSet::new();
        for label in expr.split('|').map(str::trim) {
            let members = self
                .groups
                .get(label)
                .ok_or_else(|| Error::Config(format!("unknown group {label:?}")))?;
            for m in members {
                let j = names
                    .iter()
                    .position(|c| c == m)
                    .ok_or_else(|| Error::UnknownColumn(m.clone()))?;
                cols.insert(j);
            }
        }
        if cols.is_empty() {
            return Err(Error::Config(format!(
                "group expression {expr:?} has no columns"
            )));
        }
        Ok(cols.into_iter().collect())
    }

    pub fn resolve_pair(&self, pair: &(String, String), names: &[String]) -> Result<IndexPair> {
        let a = self.resolve(&pair.0, names)?;
        let b = self.resolve(&pair.1, names)?;
        if let Some(j) = a.iter().find(|j| b.contains(j)) {
            return Err(Error::OverlappingGroups(format!(
                "{} and {} share column {}",
                pair.0, pair.1, names[*j]
            )));
        }
        IndexPair::from_zero_based(&a, &b, names.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisRow {
    pub group1: String,
    pub group2: String,
    pub eps_pair: Estimate,
    pub eps_i1: f64,
    pub eps_i2: f64,
    pub eps_union: f64,
    pub n: usize,
    /// Estimate lies in [0, min(eps_i1, eps_i2)].
    pub in_bounds: bool,
}

impl AnalysisRow {
    fn from_breakdown(pair: &(String, String), b: &LambdaBreakdown) -> Self {
        Self {
            group1: pair.0.clone(),
            group2: pair.1.clone(),
            eps_pair: b.combined,
            eps_i1: b.scaled_i1.value,
            eps_i2: b.scaled_i2.value,
            eps_union: b.l_pair.value,
            n: b.combined.n,
            in_bounds: !b.out_of_bounds(),
        }
    }

    pub fn bound_note(&self) -> &'static str {
        if self.in_bounds {
            "ok"
        } else {
            "below_zero"
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisTable {
    pub n: usize,
    pub rows: Vec<AnalysisRow>,
}

pub const TSV_HEADER: &str =
    "group1\tgroup2\teps_pair\tstd_error\tci_low\tci_high\teps_i1\teps_i2\teps_union\tn\tbounds";

impl AnalysisTable {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(TSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let e = &r.eps_pair;
            let _ = writeln!(
                out,
                "{}\t{}\t{:.9}\t{:.9}\t{:.9}\t{:.9}\t{:.9}\t{:.9}\t{:.9}\t{}\t{}",
                r.group1,
                r.group2,
                e.value,
                e.std_error,
                e.ci_low,
                e.ci_high,
                r.eps_i1,
                r.eps_i2,
                r.eps_union,
                r.n,
                r.bound_note()
            );
        }
        out
    }
}

/// Rank-transforms the maxima and estimates eps_(I1,I2) for every configured pair.
pub fn analyze(maxima: &BlockMaxima, groups: &GroupConfig, level: f64) -> Result<AnalysisTable> {
    let pairs = groups
        .pairs
        .iter()
        .map(|p| groups.resolve_pair(p, &maxima.names))
        .collect::<Result<Vec<_>>>()?;
    let u = rank_transform(&maxima.maxima)?;
    let rows = groups
        .pairs
        .iter()
        .zip(&pairs)
        .map(|(p, ip)| {
            let b = eps_pair_breakdown(&u, ip)?.at_level(level)?;
            Ok(AnalysisRow::from_breakdown(p, &b))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AnalysisTable { n: u.n(), rows })
}

/// Reads a numeric CSV with a header row; returns column names and the sample.
pub fn read_sample_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, RawSample)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let names: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let mut data = Vec::new();
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        for (cell, name) in rec.iter().zip(&names) {
            if cell.is_empty() {
                return Err(Error::MissingValue {
                    line,
                    column: name.clone(),
                });
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad number {cell:?} in {name}"),
            })?;
            data.push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    let raw = RawSample::new(data, n, names.len())?;
    Ok((names, raw))
}

/// Writes a sample with header `x1..xd`, 17 significant digits per value.
pub fn write_sample_csv<W: std::io::Write>(sample: &RawSample, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record((1..=sample.d()).map(|j| format!("x{j}")))?;
    for row in sample.rows() {
        w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}
