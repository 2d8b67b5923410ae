//! Per-(sweep value, scheme) means and standard errors of a result file.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use anyhow::{bail, Context, Result};

use crate::runner::RESULT_HEADER;

pub const SUMMARY_HEADER: [&str; 9] =
    ["sweep_axis", "sweep_value", "scheme", "n", "failures", "gain_mean", "gain_stderr", "acc_mean", "acc_stderr"];

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub sweep_axis: String,
    pub sweep_value: f64,
    pub scheme: String,
    /// Successful rows.
    pub n: usize,
    pub failures: usize,
    pub gain_mean: f64,
    pub gain_stderr: f64,
    pub acc_mean: f64,
    pub acc_stderr: f64,
}

/// Mean and standard error of the mean (sample standard deviation over `sqrt(n)`, 0 for one value).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Default)]
struct Group {
    gains: Vec<f64>,
    accs: Vec<f64>,
    failures: usize,
}

/// Groups rows by `(sweep_axis, sweep_value, scheme)` in order of first appearance.
pub fn summarize<R: Read>(r: R) -> Result<Vec<SummaryRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != RESULT_HEADER {
        bail!("unexpected header `{}`", header.join(","));
    }
    let mut order: Vec<(String, u64, String)> = Vec::new();
    let mut groups: BTreeMap<(String, u64, String), Group> = BTreeMap::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let value: f64 = rec[2].parse().with_context(|| format!("row {row}: bad sweep_value"))?;
        let key = (rec[1].to_string(), value.to_bits(), rec[3].to_string());
        let g = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key.clone());
            Group::default()
        });
        let ok = !rec[9].starts_with("failed");
        let gain = rec[4].parse::<f64>().ok();
        let acc = rec[5].parse::<f64>().ok();
        match (ok, gain) {
            (true, Some(gain)) => {
                g.gains.push(gain);
                g.accs.extend(acc);
            }
            _ => g.failures += 1,
        }
    }
    if groups.values().all(|g| g.gains.is_empty()) {
        bail!("no successful rows");
    }
    Ok(order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let (gain_mean, gain_stderr) = mean_stderr(&g.gains);
            let (acc_mean, acc_stderr) = mean_stderr(&g.accs);
            SummaryRow {
                sweep_axis: key.0,
                sweep_value: f64::from_bits(key.1),
                scheme: key.2,
                n: g.gains.len(),
                failures: g.failures,
                gain_mean,
                gain_stderr,
                acc_mean,
                acc_stderr,
            }
        })
        .collect())
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    let num = |x: f64| if x.is_nan() { String::new() } else { x.to_string() };
    for r in rows {
        w.write_record([
            r.sweep_axis.clone(),
            r.sweep_value.to_string(),
            r.scheme.clone(),
            r.n.to_string(),
            r.failures.to_string(),
            num(r.gain_mean),
            num(r.gain_stderr),
            num(r.acc_mean),
            num(r.acc_stderr),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "trial,sweep_axis,sweep_value,scheme,disc_gain,accuracy,acc_stderr,iterations,wall_ms,status\n";

    #[test]
    fn single_row_has_zero_stderr() {
        let s = summarize(format!("{HEAD}0,power,0.1,proposed,2.5,0.9,0.01,3,0,ok\n").as_bytes()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].gain_mean, s[0].gain_stderr, s[0].acc_mean), (2.5, 0.0, 0.9));
    }

    #[test]
    fn two_rows_hand_statistics() {
        let text = format!("{HEAD}0,power,0.1,proposed,1,0.5,0,3,0,ok\n1,power,0.1,proposed,3,0.7,0,3,0,ok\n");
        let s = summarize(text.as_bytes()).unwrap();
        assert_eq!((s[0].gain_mean, s[0].gain_stderr), (2.0, 1.0));
        assert!((s[0].acc_mean - 0.6).abs() < 1e-15);
    }

    #[test]
    fn failed_rows_are_counted_not_averaged() {
        let text = format!(
            "{HEAD}0,power,0.1,proposed,1,0.5,0,3,0,ok\n1,power,0.1,proposed,,,,0,0,failed: boom\n2,power,0.2,proposed,,,,0,0,failed: x\n"
        );
        let s = summarize(text.as_bytes()).unwrap();
        assert_eq!((s[0].n, s[0].failures, s[0].gain_mean), (1, 1, 1.0));
        assert_eq!((s[1].n, s[1].failures), (0, 1));
        assert!(s[1].gain_mean.is_nan());
        let mut buf = Vec::new();
        write_summary(&s, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().ends_with("power,0.2,proposed,0,1,,,,\n"));
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(summarize("a,b\n1,2\n".as_bytes()).is_err());
        assert!(summarize(format!("{HEAD}0,power,0.1,proposed,,,,0,0,failed: x\n").as_bytes()).is_err());
    }
}
