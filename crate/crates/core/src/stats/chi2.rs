//! Pearson χ² test of homogeneity across segments.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{check_alpha, Method, TestReport};
use crate::error::{Error, Result};

/// Merges columns whose smallest expected count is below one into their right
/// neighbor (the left one for the last column) until none remain.
fn pool_columns(mut cols: Vec<Vec<u64>>, row_totals: &[u64], grand: u64) -> Vec<Vec<u64>> {
    let min_expected = |col: &[u64]| {
        let total: u64 = col.iter().sum();
        row_totals
            .iter()
            .map(|&r| r as f64 * total as f64 / grand as f64)
            .fold(f64::INFINITY, f64::min)
    };
    while cols.len() > 1 {
        let Some(j) = (0..cols.len()).find(|&j| min_expected(&cols[j]) < 1.0) else {
            break;
        };
        let src = cols.remove(j);
        let dst = if j < cols.len() { j } else { j - 1 };
        for (d, s) in cols[dst].iter_mut().zip(src) {
            *d += s;
        }
    }
    cols
}

/// χ² homogeneity test over per-segment category counts.
///
/// Empty segments and unused categories are dropped, then sparse categories
/// are pooled with a neighbor. Degrees of freedom are `(rows−1)(cols−1)` of the
/// pooled table. Reported sample sizes are the number of segments and the
/// number of pooled categories.
pub fn chi2_homogeneity(tables: &[Vec<u64>], alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    let rows: Vec<&Vec<u64>> = tables.iter().filter(|r| r.iter().any(|&c| c > 0)).collect();
    if rows.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "χ² homogeneity needs at least two non-empty segments, got {}",
            rows.len()
        )));
    }
    let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let cell = |r: &Vec<u64>, j: usize| r.get(j).copied().unwrap_or(0);
    let cols: Vec<Vec<u64>> = (0..width)
        .map(|j| rows.iter().map(|r| cell(r, j)).collect::<Vec<u64>>())
        .filter(|c| c.iter().any(|&x| x > 0))
        .collect();
    let row_totals: Vec<u64> = rows.iter().map(|r| r.iter().sum()).collect();
    let grand: u64 = row_totals.iter().sum();
    let cols = pool_columns(cols, &row_totals, grand);
    let sizes = (rows.len(), cols.len());
    if cols.len() < 2 {
        return Ok(TestReport::new("chi2-homogeneity", 0.0, 1.0, Method::Asymptotic, sizes, alpha));
    }

    let mut stat = 0.0;
    for col in &cols {
        let col_total: u64 = col.iter().sum();
        for (&obs, &rt) in col.iter().zip(&row_totals) {
            let expected = rt as f64 * col_total as f64 / grand as f64;
            stat += (obs as f64 - expected).powi(2) / expected;
        }
    }
    let df = ((rows.len() - 1) * (cols.len() - 1)) as f64;
    let p = ChiSquared::new(df)
        .map_err(|e| Error::Domain(e.to_string()))?
        .sf(stat);
    Ok(TestReport::new("chi2-homogeneity", stat, p, Method::Asymptotic, sizes, alpha))
}
