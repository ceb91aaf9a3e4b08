use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorrelationError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 points, got {0}")]
    TooShort(usize),
    #[error("constant input, correlation undefined")]
    Constant,
    #[error("non-finite input")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficient {
    Pearson,
    Spearman,
    Kendall,
}

impl Coefficient {
    pub const ALL: [Coefficient; 3] = [Self::Pearson, Self::Spearman, Self::Kendall];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pearson => "pearson",
            Self::Spearman => "spearman",
            Self::Kendall => "kendall",
        }
    }

    /// Column symbol used in rendered tables.
    pub fn symbol(self) -> &'static str {
        match self {
            Self::Pearson => "r",
            Self::Spearman => "rho",
            Self::Kendall => "tau",
        }
    }

    pub fn compute<T: Real>(self, xs: &[T], ys: &[T]) -> Result<T, CorrelationError> {
        match self {
            Self::Pearson => pearson(xs, ys),
            Self::Spearman => spearman(xs, ys),
            Self::Kendall => kendall_tau(xs, ys),
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Coefficient {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pearson" | "r" => Ok(Self::Pearson),
            "spearman" | "rho" => Ok(Self::Spearman),
            "kendall" | "kendall_tau" | "tau" => Ok(Self::Kendall),
            other => Err(format!("unknown coefficient \"{other}\"")),
        }
    }
}

fn check<T: Real>(xs: &[T], ys: &[T]) -> Result<(), CorrelationError> {
    if xs.len() != ys.len() {
        return Err(CorrelationError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(CorrelationError::TooShort(xs.len()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(CorrelationError::NonFinite);
    }
    Ok(())
}

fn clamp_unit<T: Real>(v: T) -> T {
    v.max(-T::one()).min(T::one())
}

/// Sample Pearson correlation.
pub fn pearson<T: Real>(xs: &[T], ys: &[T]) -> Result<T, CorrelationError> {
    check(xs, ys)?;
    let n = T::of_usize(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(CorrelationError::Constant);
    }
    Ok(clamp_unit(sxy / (sxx * syy).sqrt()))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks<T: Real>(values: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![T::zero(); values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i+1 ..= j
        let rank = T::of_usize(i + 1 + j) / T::of(2.0);
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Pearson correlation of average ranks.
pub fn spearman<T: Real>(xs: &[T], ys: &[T]) -> Result<T, CorrelationError> {
    check(xs, ys)?;
    pearson(&average_ranks(xs), &average_ranks(ys))
}

fn tied_pairs(sorted_run_lengths: impl Iterator<Item = u64>) -> u64 {
    sorted_run_lengths.map(|t| t * (t - 1) / 2).sum()
}

fn run_lengths<T: PartialEq>(sorted: &[T]) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        out.push((j - i) as u64);
        i = j;
    }
    out
}

/// Sorts `v` and returns the number of strict inversions.
fn merge_count<T: Real>(v: &mut [T], buf: &mut [T]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], &mut buf[..mid]) + merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Kendall tau-b in O(n log n) (Knight's algorithm).
pub fn kendall_tau<T: Real>(xs: &[T], ys: &[T]) -> Result<T, CorrelationError> {
    check(xs, ys)?;
    let n = xs.len() as u64;
    let mut pairs: Vec<(T, T)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
    });
    let n0 = n * (n - 1) / 2;
    let n1 = tied_pairs(run_lengths(&pairs.iter().map(|p| p.0).collect::<Vec<_>>()).into_iter());
    let n3 = tied_pairs(run_lengths(&pairs).into_iter());
    let mut ys_sorted: Vec<T> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![T::zero(); ys_sorted.len()];
    let discordant = merge_count(&mut ys_sorted, &mut buf);
    let n2 = tied_pairs(run_lengths(&ys_sorted).into_iter());
    if n0 == n1 || n0 == n2 {
        return Err(CorrelationError::Constant);
    }
    // C - D = n0 - n1 - n2 + n3 - 2D
    let numerator = n0 as i128 - n1 as i128 - n2 as i128 + n3 as i128 - 2 * discordant as i128;
    let denom = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    Ok(clamp_unit(T::of(numerator as f64 / denom)))
}
