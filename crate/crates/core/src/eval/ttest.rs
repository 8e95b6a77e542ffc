use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::special::student_t_two_tailed;

/// Two-tailed threshold for marking a difference significant.
pub const SIGNIFICANCE_LEVEL: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    /// Every paired difference is zero: `t = 0`, `p = 1`.
    AllZero,
    /// Non-zero differences with zero spread: `t = ±∞`, `p = 0`.
    ConstantDifference,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub n: usize,
    pub mean_difference: f64,
    pub t_statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub degenerate: Option<Degeneracy>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mark {
    Improvement,
    Deterioration,
    None,
}

impl Mark {
    pub fn symbol(self) -> &'static str {
        match self {
            Mark::Improvement => "▲",
            Mark::Deterioration => "▼",
            Mark::None => "◦",
        }
    }
}

impl TTest {
    /// Improvement of `a` over `b` when `t > 0` and `p < level`.
    pub fn mark(&self, level: f64) -> Mark {
        if self.p_value < level && self.t_statistic > 0.0 {
            Mark::Improvement
        } else if self.p_value < level && self.t_statistic < 0.0 {
            Mark::Deterioration
        } else {
            Mark::None
        }
    }
}

/// Two-tailed paired t-test on `a - b`, with `n - 1` degrees of freedom and
/// the sample standard deviation.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(EvalError::TooFewPairs(n));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let df = n - 1;
    if d.iter().all(|&x| x == 0.0) {
        return Ok(TTest {
            n,
            mean_difference: 0.0,
            t_statistic: 0.0,
            df,
            p_value: 1.0,
            degenerate: Some(Degeneracy::AllZero),
        });
    }
    if sd == 0.0 {
        return Ok(TTest {
            n,
            mean_difference: mean,
            t_statistic: f64::INFINITY.copysign(mean),
            df,
            p_value: 0.0,
            degenerate: Some(Degeneracy::ConstantDifference),
        });
    }
    let t = mean / (sd / (n as f64).sqrt());
    Ok(TTest {
        n,
        mean_difference: mean,
        t_statistic: t,
        df,
        p_value: student_t_two_tailed(t, df as f64),
        degenerate: None,
    })
}

/// Outcome of comparing `system_a` against `system_b` on one metric column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignificanceMark {
    pub system_a: String,
    pub system_b: String,
    pub metric: String,
    pub t_statistic: f64,
    pub p_value: f64,
    pub degenerate: Option<Degeneracy>,
    pub mark: Mark,
}
