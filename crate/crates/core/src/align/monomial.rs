use std::fmt::Write as _;

use super::{checked_count, AlignError, DEFAULT_ENUMERATION_CAP};
use crate::channel::ChannelVector;

/// Exponent tuple of a monomial `prod_{k,i} g_{ki}^{e_{ki}}`, flattened so that
/// base `(k, i)` sits at position `k * M + i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonomialExponent(pub Vec<u32>);

impl MonomialExponent {
    pub fn get(&self, receiver: usize, antenna: usize, antennas: usize) -> u32 {
        self.0[receiver * antennas + antenna]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Evaluates the monomial over flattened base gains.
    pub fn evaluate(&self, bases: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(bases)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, &g)| g.powi(e as i32))
            .product()
    }
}

/// Generator sets carry `N` exponent values per base and build the precoder;
/// product sets carry `N + 1` and index what a receiver observes after
/// multiplying a generator by one of its own gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonomialRole {
    Generator,
    Product,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonomialSet {
    n: u32,
    offset: u32,
    role: MonomialRole,
    receivers: usize,
    antennas: usize,
    bases: Vec<f64>,
    members: Vec<MonomialExponent>,
    values: Vec<f64>,
}

/// All monomials over `base_gains` with exponents in `{0..N-1}` (generator)
/// or `{0..N}` (product), in lexicographic order.
pub fn build_monomial_set(
    base_gains: &[ChannelVector],
    n: u32,
    role: MonomialRole,
) -> Result<MonomialSet, AlignError> {
    build_monomial_set_with(base_gains, n, role, 0, DEFAULT_ENUMERATION_CAP)
}

/// Like [`build_monomial_set`] with every exponent range shifted up by
/// `offset` and an explicit enumeration cap.
pub fn build_monomial_set_with(
    base_gains: &[ChannelVector],
    n: u32,
    role: MonomialRole,
    offset: u32,
    cap: u64,
) -> Result<MonomialSet, AlignError> {
    if n == 0 {
        return Err(AlignError::ZeroParameter("N"));
    }
    let antennas = base_gains.first().ok_or(AlignError::NoBases)?.len();
    let receivers = base_gains.len();
    let bases: Vec<f64> = base_gains
        .iter()
        .flat_map(|g| g.as_slice().iter().copied())
        .collect();
    let radix = match role {
        MonomialRole::Generator => n,
        MonomialRole::Product => n + 1,
    };
    let width = bases.len();
    let count = checked_count(radix as u64, width, cap)? as usize;

    let mut members = Vec::with_capacity(count);
    let mut digits = vec![0u32; width];
    for _ in 0..count {
        members.push(MonomialExponent(digits.iter().map(|d| d + offset).collect()));
        // odometer, last position fastest
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < radix {
                break;
            }
            *d = 0;
        }
    }
    let values = members.iter().map(|e| e.evaluate(&bases)).collect();
    Ok(MonomialSet {
        n,
        offset,
        role,
        receivers,
        antennas,
        bases,
        members,
        values,
    })
}

impl MonomialSet {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn offset(&self) -> u32 {
        self.offset
    }

    pub fn role(&self) -> MonomialRole {
        self.role
    }

    pub fn receivers(&self) -> usize {
        self.receivers
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn num_bases(&self) -> usize {
        self.bases.len()
    }

    pub fn bases(&self) -> &[f64] {
        &self.bases
    }

    pub fn members(&self) -> &[MonomialExponent] {
        &self.members
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn radix(&self) -> u32 {
        match self.role {
            MonomialRole::Generator => self.n,
            MonomialRole::Product => self.n + 1,
        }
    }

    /// Position of `exponent` in the canonical order, if it is a member.
    pub fn index_of(&self, exponent: &MonomialExponent) -> Option<usize> {
        if exponent.0.len() != self.bases.len() {
            return None;
        }
        let radix = self.radix();
        let mut idx = 0usize;
        for &e in &exponent.0 {
            let d = e.checked_sub(self.offset)?;
            if d >= radix {
                return None;
            }
            idx = idx * radix as usize + d as usize;
        }
        Some(idx)
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// One exponent tuple per line, preceded by a `#` header.
    pub fn to_text(&self) -> String {
        let role = match self.role {
            MonomialRole::Generator => "generator",
            MonomialRole::Product => "product",
        };
        let mut out = format!(
            "# monomial-set role={role} N={} offset={} bases={} size={}\n",
            self.n,
            self.offset,
            self.bases.len(),
            self.members.len()
        );
        for m in &self.members {
            let line = m.0.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
            writeln!(out, "{line}").unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gains(rows: &[&[f64]]) -> Vec<ChannelVector> {
        rows.iter()
            .map(|r| ChannelVector::new(r.to_vec()).unwrap())
            .collect()
    }

    #[test]
    fn single_base_single_monomial() {
        let s = build_monomial_set(&gains(&[&[2.5]]), 1, MonomialRole::Generator).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.members()[0], MonomialExponent(vec![0]));
        assert_eq!(s.values()[0], 1.0);
    }

    #[test]
    fn sizes_match_closed_forms() {
        let g = gains(&[&[0.3, 1.2], &[-0.7, 2.0]]);
        assert_eq!(build_monomial_set(&g, 2, MonomialRole::Generator).unwrap().len(), 16);
        assert_eq!(build_monomial_set(&g, 2, MonomialRole::Product).unwrap().len(), 81);
    }

    #[test]
    fn members_are_sorted_and_distinct() {
        let g = gains(&[&[0.3, 1.2, 0.4]]);
        let s = build_monomial_set(&g, 3, MonomialRole::Product).unwrap();
        assert!(s.members().windows(2).all(|w| w[0] < w[1]));
        for (i, m) in s.members().iter().enumerate() {
            assert_eq!(s.index_of(m), Some(i));
        }
    }

    #[test]
    fn offset_shifts_ranges() {
        let g = gains(&[&[2.0, 3.0]]);
        let s = build_monomial_set_with(&g, 2, MonomialRole::Generator, 1, 100).unwrap();
        assert_eq!(s.members()[0], MonomialExponent(vec![1, 1]));
        assert_eq!(s.members()[3], MonomialExponent(vec![2, 2]));
        assert_eq!(s.values()[0], 6.0);
        assert_eq!(s.index_of(&MonomialExponent(vec![0, 1])), None);
    }

    #[test]
    fn cap_is_enforced() {
        let g = gains(&[&[0.3, 1.2], &[-0.7, 2.0]]);
        let err = build_monomial_set_with(&g, 10, MonomialRole::Generator, 0, 1000).unwrap_err();
        assert_eq!(err, AlignError::SizeOverflow { count: 10_000, cap: 1000 });
        let err = build_monomial_set(&g, 0, MonomialRole::Generator).unwrap_err();
        assert_eq!(err, AlignError::ZeroParameter("N"));
    }

    #[test]
    fn text_dump() {
        let g = gains(&[&[2.0, 3.0]]);
        let s = build_monomial_set(&g, 2, MonomialRole::Generator).unwrap();
        assert_eq!(
            s.to_text(),
            "# monomial-set role=generator N=2 offset=0 bases=2 size=4\n0 0\n0 1\n1 0\n1 1\n"
        );
    }
}
