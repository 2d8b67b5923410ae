//! Labelled feature tables: CSV with header `label,f1,...,fS`.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};
use crane_core::linalg::Matrix;
use crane_core::scenario::{fit_mixture, fit_pca};
use crane_core::FeatureStatistics;

#[derive(Debug, Clone, PartialEq)]
pub struct LabelledFeatures {
    /// `n x S`.
    pub features: Matrix,
    /// Class index of each row, `0..classes`.
    pub labels: Vec<usize>,
    /// Original label of each class index, in increasing order.
    pub label_names: Vec<i64>,
}

/// Reads the table. Integer labels are mapped to class indices in increasing order.
pub fn read_labelled<R: Read>(r: R) -> Result<LabelledFeatures> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header = rd.headers()?.clone();
    if header.get(0) != Some("label") || header.len() < 2 {
        bail!("header must be `label,f1,...,fS`");
    }
    for (j, h) in header.iter().enumerate().skip(1) {
        if h != format!("f{j}") {
            bail!("column {} is `{h}`, expected `f{j}`", j + 1);
        }
    }
    let s = header.len() - 1;
    let mut raw_labels = Vec::new();
    let mut data = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let label: i64 = rec.get(0).unwrap_or("").parse().with_context(|| format!("row {row}: bad label"))?;
        raw_labels.push(label);
        for j in 1..=s {
            let v: f64 = rec
                .get(j)
                .filter(|v| !v.is_empty())
                .with_context(|| format!("row {row}: missing f{j}"))?
                .parse()
                .with_context(|| format!("row {row}: bad value in f{j}"))?;
            if !v.is_finite() {
                bail!("row {row}: non-finite value in f{j}");
            }
            data.push(v);
        }
    }
    if raw_labels.is_empty() {
        bail!("no data rows");
    }
    let index: BTreeMap<i64, usize> = {
        let mut m: BTreeMap<i64, usize> = raw_labels.iter().map(|&l| (l, 0)).collect();
        for (i, v) in m.values_mut().enumerate() {
            *v = i;
        }
        m
    };
    let n = raw_labels.len();
    Ok(LabelledFeatures {
        features: Matrix::from_row_major(n, s, data).context("ragged rows")?,
        labels: raw_labels.iter().map(|l| index[l]).collect(),
        label_names: index.keys().copied().collect(),
    })
}

pub fn load_labelled(path: &Path) -> Result<LabelledFeatures> {
    let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_labelled(f).with_context(|| format!("in {}", path.display()))
}

/// Projects onto the leading `dims` principal directions and fits the class-conditional mixture.
pub fn fit_statistics(data: &LabelledFeatures, dims: usize) -> Result<FeatureStatistics> {
    let pca = fit_pca(&data.features, dims).map_err(|e| anyhow::anyhow!("{e}"))?;
    let n = data.features.rows();
    let mut projected = Matrix::zeros(n, dims);
    for i in 0..n {
        for (d, v) in pca.project(data.features.row(i)).into_iter().enumerate() {
            projected.set(i, d, v);
        }
    }
    fit_mixture(&projected, &data.labels, data.label_names.len()).map_err(|e| anyhow::anyhow!("{e}"))
}
