use serde::{Deserialize, Serialize};

use super::special::f_upper_tail;
use crate::error::{Error, Result};

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "pearson: lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("pearson: need at least two points".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidArgument("pearson: constant input".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pairwise correlation matrix. Entries are `None` where a pair has fewer than two
/// complete rows or a constant column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i][j]
    }
}

/// Rows where either value is missing are dropped for that pair only.
pub fn corr_matrix(columns: &[(String, Vec<Option<f64>>)]) -> Result<CorrMatrix> {
    let n = columns.first().map_or(0, |c| c.1.len());
    if let Some((name, _)) = columns.iter().find(|c| c.1.len() != n) {
        return Err(Error::InvalidArgument(format!("column `{name}` has a different length")));
    }
    let k = columns.len();
    let mut values = vec![vec![None; k]; k];
    for i in 0..k {
        values[i][i] = Some(1.0);
        for j in i + 1..k {
            let (xs, ys): (Vec<f64>, Vec<f64>) = columns[i]
                .1
                .iter()
                .zip(&columns[j].1)
                .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
                .unzip();
            let r = pearson(&xs, &ys).ok();
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrMatrix {
        names: columns.iter().map(|c| c.0.clone()).collect(),
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    /// `+inf` when within-group variance is zero but group means differ.
    pub f_value: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p_value: f64,
}

pub fn one_way_anova(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    let k = groups.len();
    if k < 2 {
        return Err(Error::InvalidArgument("anova: need at least two groups".into()));
    }
    if groups.iter().any(Vec::is_empty) {
        return Err(Error::InvalidArgument("anova: empty group".into()));
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    if n <= k {
        return Err(Error::InvalidArgument(format!("anova: {n} values for {k} groups")));
    }
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let (mut ssb, mut ssw) = (0.0, 0.0);
    for g in groups {
        let m = mean(g);
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += g.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    }
    let (df_between, df_within) = (k - 1, n - k);
    let (f_value, p_value) = if ssw == 0.0 {
        if ssb > 0.0 {
            (f64::INFINITY, 0.0)
        } else {
            (0.0, 1.0)
        }
    } else {
        let f = (ssb / df_between as f64) / (ssw / df_within as f64);
        (f, f_upper_tail(f, df_between as f64, df_within as f64))
    };
    Ok(AnovaResult {
        f_value,
        df_between,
        df_within,
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_cases() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        // by hand: sxy = 3, sxx = syy = 5
        assert!((pearson(&x, &[2.0, 1.0, 4.0, 3.0]).unwrap() - 0.6).abs() < 1e-15);
        assert!(pearson(&x, &[1.0; 4]).is_err());
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn corr_matrix_drops_missing_pairwise() {
        let cols = vec![
            ("a".to_string(), vec![Some(1.0), Some(2.0), Some(3.0), None]),
            ("b".to_string(), vec![Some(1.0), Some(2.0), Some(3.0), Some(100.0)]),
        ];
        let m = corr_matrix(&cols).unwrap();
        assert!((m.get(0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(m.get(0, 0), Some(1.0));
    }

    #[test]
    fn anova_cases() {
        let same = one_way_anova(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(same.f_value, 0.0);
        assert!((same.p_value - 1.0).abs() < 1e-12);
        let r = one_way_anova(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert!((r.f_value - 8.0).abs() < 1e-12);
        assert_eq!((r.df_between, r.df_within), (1, 2));
        // t tail with 2 df at sqrt(8): 1 - sqrt(8)/sqrt(10)
        assert!((r.p_value - (1.0 - (0.8f64).sqrt())).abs() < 1e-12);
        assert!((r.p_value - 0.1056).abs() < 1e-4);
    }

    #[test]
    fn anova_degenerate() {
        let r = one_way_anova(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert!(r.f_value.is_infinite());
        assert_eq!(r.p_value, 0.0);
        let r = one_way_anova(&[vec![3.0, 3.0], vec![3.0]]).unwrap();
        assert_eq!((r.f_value, r.p_value), (0.0, 1.0));
        assert!(one_way_anova(&[vec![1.0]]).is_err());
        assert!(one_way_anova(&[vec![1.0], vec![2.0]]).is_err());
        assert!(one_way_anova(&[vec![1.0, 2.0], vec![]]).is_err());
    }
}
