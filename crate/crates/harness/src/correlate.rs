//! Spearman correlation recomputed from emitted sweep files.

use std::collections::BTreeMap;
use std::path::Path;

use crate::emit::{read_absorption_csv, read_stmc_csv};
use crate::stats::{mean, spearman};
use crate::HarnessError;

/// Per degree found in `stmc.csv`: Spearman correlation between the ensemble-mean total
/// capacity and the ensemble-mean `ᾱ_γ` of `absorption.csv`, over γ values present in both.
pub fn correlate_files(dir: &Path) -> Result<BTreeMap<usize, Result<f64, HarnessError>>, HarnessError> {
    let stmc = read_stmc_csv(&dir.join("stmc.csv"))?;
    let absorption = read_absorption_csv(&dir.join("absorption.csv"))?;

    // Positive floats order the same way as their bit patterns.
    let mut alpha: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for row in absorption.iter().filter(|r| r.s.is_none()) {
        if let Some(a) = row.alpha0 {
            alpha.entry(row.gamma.to_bits()).or_default().push(a);
        }
    }
    let mut capacity: BTreeMap<usize, BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for row in &stmc {
        let per_gamma = capacity.entry(row.degree).or_default();
        if let Some(c) = row.total_capacity {
            per_gamma.entry(row.gamma.to_bits()).or_default().push(c);
        }
    }
    Ok(capacity
        .into_iter()
        .map(|(degree, per_gamma)| {
            let (a, b): (Vec<f64>, Vec<f64>) = per_gamma
                .iter()
                .filter_map(|(g, c)| Some((mean(c), mean(alpha.get(g)?))))
                .unzip();
            (degree, spearman(&a, &b))
        })
        .collect())
}
