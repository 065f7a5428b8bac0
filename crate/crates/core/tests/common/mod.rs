#![allow(dead_code)]

use std::io::Write;
use std::time::Duration;

use chrono::{Datelike, Months, NaiveDate, Weekday};
use extdep::models::M4Model;
use extdep::simulate::{sample_m4, Seed};

/// Prints one acceptance line straight to stdout, bypassing the harness capture.
pub fn report(id: u32, name: &str, pass: bool, detail: &str, elapsed: Duration) {
    let line = format!(
        "\n{} criterion {id:>2}: {name} | {detail} | {:.3}s\n",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

/// Weekdays of the month starting at `first`.
fn trading_days(first: NaiveDate) -> Vec<NaiveDate> {
    first
        .iter_days()
        .take_while(|d| d.month() == first.month())
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .collect()
}

/// Daily price CSV whose monthly maxima of negative log-returns are i.i.d.
/// draws from the example M4 model (columns x1..x4) and from an independent
/// second copy (columns y1..y4), up to the monotone map z -> 0.01 log(1 + z).
///
/// In each month one day (varying by column) carries the return m; every other
/// day carries -m/(N-1), so prices return to their starting level.
pub fn synthetic_m4_prices(months: usize, seed: u64) -> String {
    let a = sample_m4(&M4Model::example(), months, Seed::new(seed, 0)).unwrap();
    let b = sample_m4(&M4Model::example(), months, Seed::new(seed, 1)).unwrap();
    let start = NaiveDate::from_ymd_opt(1900, 1, 1).unwrap();
    let mut csv = String::from("date,x1,x2,x3,x4,y1,y2,y3,y4\n");
    let mut prices = [100.0f64; 8];
    let write_row = |csv: &mut String, date: NaiveDate, p: &[f64; 8]| {
        csv.push_str(&date.format("%Y-%m-%d").to_string());
        for v in p {
            csv.push_str(&format!(",{v:.17e}"));
        }
        csv.push('\n');
    };
    write_row(&mut csv, start.pred_opt().unwrap(), &prices);
    for k in 0..months {
        let days = trading_days(start.checked_add_months(Months::new(k as u32)).unwrap());
        let nd = days.len();
        let draws: Vec<f64> = a.raw.row(k).iter().chain(b.raw.row(k)).copied().collect();
        for (t, date) in days.iter().enumerate() {
            for j in 0..8 {
                let m = 0.01 * draws[j].ln_1p();
                let r = if t == (k + 3 * j) % nd {
                    m
                } else {
                    -m / (nd - 1) as f64
                };
                prices[j] *= (-r).exp();
            }
            write_row(&mut csv, *date, &prices);
        }
    }
    csv
}

/// Groups with the three-market pair structure; "Europe" vs "USA" is the
/// ({1,2},{3,4}) pair of the first M4 copy.
pub const SYNTHETIC_GROUPS: &str = r#"{
  "groups": {"Europe": ["x1", "x2"], "USA": ["x3", "x4"], "FarEast": ["y1", "y2"]},
  "pairs": [["Europe", "USA"], ["Europe", "FarEast"], ["USA", "FarEast"],
            ["Europe", "USA|FarEast"], ["USA", "Europe|FarEast"], ["FarEast", "USA|Europe"]]
}"#;
