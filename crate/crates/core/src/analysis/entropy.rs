use std::collections::HashMap;

use super::AnalysisError;
use crate::align::{StructureMap, DEFAULT_ENUMERATION_CAP};

/// Multiplicities of `s = b_1 + ... + b_w` over all `(2Q+1)^w` tuples of
/// independent symbols uniform on `{-Q, ..., Q}`; entry `i` counts `s = i - wQ`.
pub fn sum_uniform_counts(w: usize, q: u32) -> Vec<u128> {
    let q = q as usize;
    let mut counts = vec![1u128];
    for _ in 0..w {
        // Convolving with the box of width 2Q+1 is a sliding window sum.
        let len = counts.len() + 2 * q;
        let mut prefix = vec![0u128; counts.len() + 1];
        for (i, c) in counts.iter().enumerate() {
            prefix[i + 1] = prefix[i] + c;
        }
        let next = (0..len)
            .map(|s| {
                let hi = (s + 1).min(counts.len());
                let lo = s.saturating_sub(2 * q);
                if lo >= hi {
                    0
                } else {
                    prefix[hi] - prefix[lo]
                }
            })
            .collect();
        counts = next;
    }
    counts
}

/// Entropy in bits of the distribution proportional to `counts`.
pub fn entropy_from_counts(counts: &[u128]) -> f64 {
    let total: u128 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let weighted: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let c = c as f64;
            c * c.log2()
        })
        .sum();
    (n.log2() - weighted / n).max(0.0)
}

/// Entropy of a row that sums `w` independent uniform symbols.
pub fn row_entropy(w: usize, q: u32) -> f64 {
    if w == 0 {
        return 0.0;
    }
    entropy_from_counts(&sum_uniform_counts(w, q))
}

/// `sum_t H((S b)_t)` for `b` uniform on `{-Q..Q}^cols`.
pub fn leakage_marginal_entropy(smap: &StructureMap, q: u32) -> f64 {
    let mut cache: HashMap<usize, f64> = HashMap::new();
    smap.row_weights()
        .map(|w| *cache.entry(w).or_insert_with(|| row_entropy(w, q)))
        .sum()
}

/// `H(S b)` by enumerating every input tuple.
pub fn leakage_joint_entropy_exact(smap: &StructureMap, q: u32) -> Result<f64, AnalysisError> {
    leakage_joint_entropy_exact_with(smap, q, DEFAULT_ENUMERATION_CAP)
}

pub fn leakage_joint_entropy_exact_with(smap: &StructureMap, q: u32, cap: u64) -> Result<f64, AnalysisError> {
    let cols = smap.cols();
    let radix = 2 * u64::from(q) + 1;
    let count = (radix as u128).checked_pow(cols as u32).unwrap_or(u128::MAX);
    if count > u128::from(cap) {
        return Err(AnalysisError::SizeOverflow { count, cap });
    }
    if cols == 0 {
        return Ok(0.0);
    }

    // Dense mixed-radix index over the row sums of the non-empty rows. Its
    // size never exceeds the input count because 2wQ+1 <= (2Q+1)^w.
    let mut row_of = vec![0usize; cols];
    let mut strides = Vec::new();
    let mut size = 1usize;
    for cols_in_row in smap.ones().iter().filter(|r| !r.is_empty()) {
        for &c in cols_in_row {
            row_of[c] = strides.len();
        }
        strides.push(size);
        size *= 2 * cols_in_row.len() * q as usize + 1;
    }
    let col_stride: Vec<usize> = row_of.iter().map(|&r| strides[r]).collect();

    let mut counts = vec![0u32; size];
    let mut digits = vec![0u64; cols];
    // All symbols start at -Q, which is index 0 of every row sum.
    let mut index = 0usize;
    let wrap = 2 * q as usize;
    for _ in 0..count {
        counts[index] += 1;
        for c in (0..cols).rev() {
            if digits[c] + 1 < radix {
                digits[c] += 1;
                index += col_stride[c];
                break;
            }
            digits[c] = 0;
            index -= wrap * col_stride[c];
        }
    }
    let wide: Vec<u128> = counts.into_iter().map(u128::from).collect();
    Ok(entropy_from_counts(&wide))
}
