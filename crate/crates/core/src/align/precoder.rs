use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::monomial::{build_monomial_set_with, MonomialExponent, MonomialRole, MonomialSet};
use super::{AlignError, DEFAULT_ENUMERATION_CAP};
use crate::channel::{ChannelVector, CompoundChannel};

/// Block-diagonal precoder `V = diag(v^T, ..., v^T)` of shape `M x (M L)`,
/// where `v` lists the generator monomials.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentPrecoder {
    m: usize,
    set: MonomialSet,
}

pub fn build_precoder(set: &MonomialSet, m: usize) -> Result<AlignmentPrecoder, AlignError> {
    if set.role() != MonomialRole::Generator {
        return Err(AlignError::NotGenerator);
    }
    if m == 0 {
        return Err(AlignError::ZeroParameter("M"));
    }
    Ok(AlignmentPrecoder {
        m,
        set: set.clone(),
    })
}

impl AlignmentPrecoder {
    pub fn antennas(&self) -> usize {
        self.m
    }

    /// Number of generator monomials `L`.
    pub fn l(&self) -> usize {
        self.set.len()
    }

    pub fn columns(&self) -> usize {
        self.m * self.l()
    }

    pub fn values(&self) -> &[f64] {
        self.set.values()
    }

    pub fn monomials(&self) -> &MonomialSet {
        &self.set
    }

    /// `(antenna, monomial index)` carried by column `c`.
    pub fn layout(&self, c: usize) -> (usize, usize) {
        (c / self.l(), c % self.l())
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let l = self.l();
        let v = self.values();
        DMatrix::from_fn(self.m, self.columns(), |r, c| {
            if c / l == r {
                v[c % l]
            } else {
                0.0
            }
        })
    }

    /// `V b` without materializing `V`.
    pub fn apply(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.columns());
        let v = self.values();
        b.chunks(self.l())
            .map(|block| crate::channel::dot(v, block))
            .collect()
    }

    /// Exponent tuples of `h^T V` for a receiver whose own gains are treated
    /// as `M` fresh bases placed in front of the generator bases.
    pub fn direct_exponents(&self) -> Vec<MonomialExponent> {
        (0..self.columns())
            .map(|c| {
                let (i, l) = self.layout(c);
                let mut e = vec![0u32; self.m];
                e[i] = 1;
                e.extend_from_slice(self.set.members()[l].as_slice());
                MonomialExponent(e)
            })
            .collect()
    }
}

/// 0/1 matrix collapsing the `M L` effective-channel entries of one aligned
/// receiver onto the product monomials, stored row-wise as column lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureMap {
    cols: usize,
    ones: Vec<Vec<usize>>,
}

impl StructureMap {
    /// Builds a map and checks that every column lands in exactly one row.
    pub fn new(cols: usize, ones: Vec<Vec<usize>>) -> Result<Self, AlignError> {
        let mut seen = vec![false; cols];
        for row in &ones {
            for &c in row {
                if c >= cols {
                    return Err(AlignError::MalformedStructureMap(format!(
                        "column {c} out of range 0..{cols}"
                    )));
                }
                if std::mem::replace(&mut seen[c], true) {
                    return Err(AlignError::MalformedStructureMap(format!(
                        "column {c} appears twice"
                    )));
                }
            }
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(AlignError::MalformedStructureMap(format!(
                "column {c} is not mapped"
            )));
        }
        Ok(Self { cols, ones })
    }

    /// Each column in its own row.
    pub fn identity(cols: usize) -> Self {
        Self {
            cols,
            ones: (0..cols).map(|c| vec![c]).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.ones.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ones(&self) -> &[Vec<usize>] {
        &self.ones
    }

    pub fn row_weights(&self) -> impl Iterator<Item = usize> + '_ {
        self.ones.iter().map(Vec::len)
    }

    pub fn max_row_weight(&self) -> usize {
        self.row_weights().max().unwrap_or(0)
    }

    pub fn nonempty_rows(&self) -> usize {
        self.row_weights().filter(|&w| w > 0).count()
    }

    /// Independent re-check of the partition property.
    pub fn is_partition(&self) -> bool {
        let mut hits = vec![0u32; self.cols];
        for &c in self.ones.iter().flatten() {
            match hits.get_mut(c) {
                Some(h) => *h += 1,
                None => return false,
            }
        }
        hits.iter().all(|&h| h == 1)
    }

    /// `S b` for an integer vector `b`.
    pub fn apply(&self, b: &[i64]) -> Vec<i64> {
        assert_eq!(b.len(), self.cols);
        self.ones
            .iter()
            .map(|row| row.iter().map(|&c| b[c]).sum())
            .collect()
    }

    /// A `#` header followed by one line per row listing its columns.
    pub fn to_text(&self) -> String {
        let mut out = format!("# structure-map rows={} cols={}\n", self.rows(), self.cols);
        for row in &self.ones {
            let line = row.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
            writeln!(out, "{line}").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, AlignError> {
        let bad = |msg: &str| AlignError::MalformedStructureMap(msg.to_string());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty input"))?;
        let field = |name: &str| -> Result<usize, AlignError> {
            header
                .split_whitespace()
                .find_map(|tok| tok.strip_prefix(name))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad("bad header"))
        };
        let rows = field("rows=")?;
        let cols = field("cols=")?;
        let ones = lines
            .take(rows)
            .map(|line| {
                line.split_whitespace()
                    .map(|t| t.parse::<usize>().map_err(|_| bad("bad column index")))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        if ones.len() != rows {
            return Err(bad("truncated row list"));
        }
        Self::new(cols, ones)
    }
}

/// Which group of receivers the precoder aligns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Legitimate,
    Eavesdroppers,
}

impl Group {
    pub fn gains(self, channel: &CompoundChannel) -> &[ChannelVector] {
        match self {
            Group::Legitimate => channel.legit(),
            Group::Eavesdroppers => channel.eaves(),
        }
    }

    pub fn other(self) -> Group {
        match self {
            Group::Legitimate => Group::Eavesdroppers,
            Group::Eavesdroppers => Group::Legitimate,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Group::Legitimate => "legitimate",
            Group::Eavesdroppers => "eavesdropper",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EffectiveChannels {
    /// `h_j^T V` for every receiver of the non-aligned group.
    pub direct: Vec<Vec<f64>>,
    /// One structure map per receiver of the aligned group.
    pub maps: Vec<StructureMap>,
    /// Product monomials indexing the rows of every map.
    pub product_set: MonomialSet,
}

impl EffectiveChannels {
    pub fn product_values(&self) -> &[f64] {
        self.product_set.values()
    }

    /// `gbar^T S_k` evaluated numerically.
    pub fn aligned_vector(&self, k: usize) -> Vec<f64> {
        let map = &self.maps[k];
        let gbar = self.product_values();
        let mut out = vec![0.0; map.cols()];
        for (row, cols) in map.ones().iter().enumerate() {
            for &c in cols {
                out[c] = gbar[row];
            }
        }
        out
    }
}

/// Effective channels seen through `precoder`: numeric `h_j^T V` for the
/// other group and exact structure maps for the aligned group.
pub fn effective_channels(
    precoder: &AlignmentPrecoder,
    channel: &CompoundChannel,
    aligned: Group,
) -> Result<EffectiveChannels, AlignError> {
    effective_channels_with(precoder, channel, aligned, DEFAULT_ENUMERATION_CAP)
}

/// Like [`effective_channels`] with an explicit enumeration cap.
pub fn effective_channels_with(
    precoder: &AlignmentPrecoder,
    channel: &CompoundChannel,
    aligned: Group,
    cap: u64,
) -> Result<EffectiveChannels, AlignError> {
    let set = precoder.monomials();
    let gains = aligned.gains(channel);
    let flat: Vec<f64> = gains.iter().flat_map(|g| g.as_slice().iter().copied()).collect();
    if set.receivers() != gains.len() || set.bases() != flat.as_slice() {
        return Err(AlignError::BaseMismatch(aligned.name()));
    }
    let m = precoder.antennas();
    let l = precoder.l();
    let product_set = build_monomial_set_with(gains, set.n(), MonomialRole::Product, set.offset(), cap)?;

    let mut maps = Vec::with_capacity(gains.len());
    for k in 0..gains.len() {
        let mut ones = vec![Vec::new(); product_set.len()];
        for c in 0..precoder.columns() {
            let (i, t) = precoder.layout(c);
            let mut e = set.members()[t].clone();
            e.0[k * m + i] += 1;
            let row = product_set
                .index_of(&e)
                .expect("g * t always lies in the product set");
            ones[row].push(c);
        }
        maps.push(StructureMap::new(m * l, ones)?);
    }

    let v = precoder.values();
    let direct = aligned
        .other()
        .gains(channel)
        .iter()
        .map(|h| {
            (0..precoder.columns())
                .map(|c| h[c / l] * v[c % l])
                .collect()
        })
        .collect();

    Ok(EffectiveChannels {
        direct,
        maps,
        product_set,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::build_monomial_set;
    use crate::channel::sample_compound_channel;

    #[test]
    fn trivial_precoder_is_identity_shaped() {
        let ch = sample_compound_channel(2, 2, 2, 1);
        let set = build_monomial_set(ch.eaves(), 1, MonomialRole::Generator).unwrap();
        let p = build_precoder(&set, 2).unwrap();
        assert_eq!(p.matrix(), DMatrix::identity(2, 2));
    }

    #[test]
    fn block_layout() {
        let ch = CompoundChannel::from_rows(&[&[1.0, 1.0]], &[&[2.0, 3.0]], 1.0).unwrap();
        let set = build_monomial_set(ch.eaves(), 2, MonomialRole::Generator).unwrap();
        let p = build_precoder(&set, 2).unwrap();
        let v = p.matrix();
        assert_eq!(v.shape(), (2, 8));
        for c in 0..8 {
            assert_eq!(p.layout(c).0, c / 4);
            for r in 0..2 {
                assert_eq!(v[(r, c)] != 0.0, r == c / 4);
            }
        }
        assert_eq!(v.iter().filter(|x| **x != 0.0).count(), 8);
        // exponent (1, 1) over (g1 = 2, g2 = 3)
        assert_eq!(p.values()[3], 6.0);
    }

    #[test]
    fn product_set_is_rejected_as_precoder() {
        let ch = sample_compound_channel(2, 1, 1, 1);
        let set = build_monomial_set(ch.eaves(), 1, MonomialRole::Product).unwrap();
        assert_eq!(build_precoder(&set, 2), Err(AlignError::NotGenerator));
    }

    #[test]
    fn degenerate_n_one_maps_are_injective() {
        let ch = sample_compound_channel(3, 3, 3, 4);
        let set = build_monomial_set(ch.eaves(), 1, MonomialRole::Generator).unwrap();
        let p = build_precoder(&set, 3).unwrap();
        let eff = effective_channels(&p, &ch, Group::Eavesdroppers).unwrap();
        for (k, map) in eff.maps.iter().enumerate() {
            assert_eq!(map.max_row_weight(), 1);
            assert_eq!(map.nonempty_rows(), 3);
            let numeric = eff.aligned_vector(k);
            assert_eq!(numeric, ch.eaves()[k].as_slice());
        }
    }

    #[test]
    fn aligned_vector_matches_numeric_product() {
        let ch = sample_compound_channel(2, 2, 2, 8);
        let set = build_monomial_set(ch.eaves(), 2, MonomialRole::Generator).unwrap();
        let p = build_precoder(&set, 2).unwrap();
        let eff = effective_channels(&p, &ch, Group::Eavesdroppers).unwrap();
        let v = p.matrix();
        for (k, g) in ch.eaves().iter().enumerate() {
            let aligned = eff.aligned_vector(k);
            for c in 0..p.columns() {
                let numeric: f64 = (0..2).map(|i| g[i] * v[(i, c)]).sum();
                assert!((numeric - aligned[c]).abs() <= 1e-12 * numeric.abs().max(1.0));
            }
        }
        assert_eq!(eff.direct.len(), 2);
        let h = &ch.legit()[1];
        for c in 0..p.columns() {
            let numeric: f64 = (0..2).map(|i| h[i] * v[(i, c)]).sum();
            assert!((numeric - eff.direct[1][c]).abs() <= 1e-12);
        }
    }

    #[test]
    fn base_mismatch_is_detected() {
        let ch = sample_compound_channel(2, 2, 2, 8);
        let set = build_monomial_set(ch.eaves(), 1, MonomialRole::Generator).unwrap();
        let p = build_precoder(&set, 2).unwrap();
        assert!(matches!(
            effective_channels(&p, &ch, Group::Legitimate),
            Err(AlignError::BaseMismatch(_))
        ));
    }

    #[test]
    fn structure_map_validation_and_text() {
        assert!(StructureMap::new(3, vec![vec![0, 1], vec![]]).is_err());
        assert!(StructureMap::new(2, vec![vec![0, 1], vec![1]]).is_err());
        let s = StructureMap::new(3, vec![vec![0, 2], vec![], vec![1]]).unwrap();
        assert_eq!(s.to_text(), "# structure-map rows=3 cols=3\n0 2\n\n1\n");
        assert_eq!(StructureMap::from_text(&s.to_text()).unwrap(), s);
        assert_eq!(s.apply(&[1, -2, 5]), vec![6, 0, -2]);
    }
}
