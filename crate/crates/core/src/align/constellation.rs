use std::collections::HashSet;

use super::monomial::MonomialExponent;
use super::pam::PamCode;
use super::{checked_count, AlignError, DEFAULT_ENUMERATION_CAP};

/// Values closer than this (relative to the constellation's extent) are
/// treated as the same point.
const MERGE_TOLERANCE: f64 = 1e-12;

/// Every received point `a * alpha^T b` for `b` in `{-Q..Q}^L`, with the
/// generating tuples kept as back-pointers.
///
/// Tuples are identified by their mixed-radix index: digit `b_i + Q` in base
/// `2Q + 1`, first symbol most significant, so index order is lexicographic
/// order on `b`.
#[derive(Debug, Clone)]
pub struct ReceiverConstellation {
    q: u32,
    dims: usize,
    /// `(value, tuple index)` sorted by value, then index.
    entries: Vec<(f64, u64)>,
    /// Start offset of every group of coincident entries, plus a sentinel.
    groups: Vec<usize>,
}

impl ReceiverConstellation {
    pub fn len(&self) -> usize {
        self.groups.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tuples(&self) -> usize {
        self.entries.len()
    }

    /// Number of tuples that landed on an already occupied point.
    pub fn collisions(&self) -> usize {
        self.tuples() - self.len()
    }

    pub fn value(&self, point: usize) -> f64 {
        self.entries[self.groups[point]].0
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|p| self.value(p))
    }

    /// Tuple indices generating `point`, ascending.
    pub fn generators(&self, point: usize) -> impl Iterator<Item = u64> + '_ {
        self.entries[self.groups[point]..self.groups[point + 1]]
            .iter()
            .map(|&(_, idx)| idx)
    }

    pub fn tuple(&self, index: u64) -> Vec<i64> {
        index_to_tuple(index, self.q, self.dims)
    }
}

pub(crate) fn index_to_tuple(mut index: u64, q: u32, dims: usize) -> Vec<i64> {
    let radix = 2 * u64::from(q) + 1;
    let mut out = vec![0i64; dims];
    for slot in out.iter_mut().rev() {
        *slot = (index % radix) as i64 - i64::from(q);
        index /= radix;
    }
    out
}

pub(crate) fn tuple_to_index(b: &[i64], q: u32) -> u64 {
    let radix = 2 * u64::from(q) + 1;
    b.iter()
        .fold(0u64, |acc, &s| acc * radix + (s + i64::from(q)) as u64)
}

pub fn enumerate_receiver_constellation(alpha: &[f64], pam: &PamCode) -> Result<ReceiverConstellation, AlignError> {
    enumerate_receiver_constellation_with(alpha, pam, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_receiver_constellation_with(
    alpha: &[f64],
    pam: &PamCode,
    cap: u64,
) -> Result<ReceiverConstellation, AlignError> {
    let dims = alpha.len();
    if dims == 0 {
        return Err(AlignError::ZeroParameter("alpha length"));
    }
    let count = checked_count(pam.points_per_symbol(), dims, cap)?;
    let scaled: Vec<f64> = alpha.iter().map(|x| x * pam.a).collect();
    let mut entries: Vec<(f64, u64)> = (0..count)
        .map(|idx| {
            let b = index_to_tuple(idx, pam.q, dims);
            let v: f64 = scaled.iter().zip(&b).map(|(s, &bi)| s * bi as f64).sum();
            (v, idx)
        })
        .collect();
    entries.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let extent = scaled.iter().map(|s| s.abs()).sum::<f64>() * f64::from(pam.q);
    let tol = MERGE_TOLERANCE * extent.max(f64::MIN_POSITIVE);
    let mut groups = vec![0];
    for i in 1..entries.len() {
        if entries[i].0 - entries[i - 1].0 > tol {
            groups.push(i);
        }
    }
    groups.push(entries.len());
    // Within a group keep tuple indices ascending; the representative value
    // is the one of the smallest tuple.
    for w in groups.windows(2) {
        let group = &mut entries[w[0]..w[1]];
        if group.len() > 1 {
            let rep = group.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
            group.sort_unstable_by_key(|e| e.1);
            group[0].0 = rep;
        }
    }
    Ok(ReceiverConstellation {
        q: pam.q,
        dims,
        entries,
        groups,
    })
}

/// Smallest gap between distinct points; coincident tuples are collapsed
/// first and reported by [`ReceiverConstellation::collisions`].
pub fn min_distance(constellation: &ReceiverConstellation) -> Option<f64> {
    let vals: Vec<f64> = constellation.values().collect();
    vals.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
}

/// Maximum-likelihood decoder for `y = a alpha^T b + noise` by exhaustive
/// nearest-point search over the enumerated constellation.
#[derive(Debug, Clone)]
pub struct NearestPointDecoder {
    constellation: ReceiverConstellation,
    values: Vec<f64>,
}

impl NearestPointDecoder {
    pub fn new(alpha: &[f64], pam: &PamCode) -> Result<Self, AlignError> {
        Self::with_cap(alpha, pam, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(alpha: &[f64], pam: &PamCode, cap: u64) -> Result<Self, AlignError> {
        let constellation = enumerate_receiver_constellation_with(alpha, pam, cap)?;
        if constellation.collisions() > 0 {
            return Err(AlignError::AmbiguousConstellation {
                duplicates: constellation.collisions(),
            });
        }
        let values = constellation.values().collect();
        Ok(Self {
            constellation,
            values,
        })
    }

    pub fn constellation(&self) -> &ReceiverConstellation {
        &self.constellation
    }

    pub fn min_distance(&self) -> Option<f64> {
        min_distance(&self.constellation)
    }

    /// Mixed-radix index of the nearest tuple; exact ties go to the
    /// lexicographically smaller tuple.
    pub fn decode_index(&self, y: f64) -> u64 {
        let vals = &self.values;
        let hi = vals.partition_point(|&v| v < y);
        let best = match (hi.checked_sub(1), (hi < vals.len()).then_some(hi)) {
            (Some(lo), Some(hi)) => {
                let dl = y - vals[lo];
                let dh = vals[hi] - y;
                if dl < dh {
                    lo
                } else if dh < dl {
                    hi
                } else {
                    let il = self.index_of_point(lo);
                    let ih = self.index_of_point(hi);
                    return il.min(ih);
                }
            }
            (Some(lo), None) => lo,
            (None, Some(hi)) => hi,
            (None, None) => unreachable!("constellation is never empty"),
        };
        self.index_of_point(best)
    }

    fn index_of_point(&self, point: usize) -> u64 {
        self.constellation.generators(point).next().expect("non-empty group")
    }

    pub fn decode(&self, y: f64) -> Vec<i64> {
        self.constellation.tuple(self.decode_index(y))
    }

    pub fn encode(&self, b: &[i64]) -> u64 {
        tuple_to_index(b, self.constellation.q)
    }
}

/// One-shot nearest-point decoding of `y`.
pub fn decode_nearest(y: f64, alpha: &[f64], pam: &PamCode) -> Result<Vec<i64>, AlignError> {
    Ok(NearestPointDecoder::new(alpha, pam)?.decode(y))
}

/// Coefficients whose rational independence is to be certified.
#[derive(Debug, Clone)]
pub enum AlphaSpec {
    /// Monomials in continuously distributed gains, by exponent tuple.
    Monomials(Vec<MonomialExponent>),
    /// Bare numbers without provenance.
    Numeric(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Independence {
    Independent,
    Dependent,
    Unknown,
}

/// Distinct monomials in almost-surely algebraically independent gains are
/// almost surely rationally independent, so pairwise-distinct exponent
/// tuples certify independence and a repeated tuple refutes it. Bare numbers
/// cannot be certified here.
pub fn check_rational_independence(alpha: &AlphaSpec) -> Independence {
    match alpha {
        AlphaSpec::Numeric(_) => Independence::Unknown,
        AlphaSpec::Monomials(exps) => {
            let mut seen = HashSet::with_capacity(exps.len());
            if exps.iter().all(|e| seen.insert(e)) {
                Independence::Independent
            } else {
                Independence::Dependent
            }
        }
    }
}
