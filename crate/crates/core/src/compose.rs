//! Group filling, Wilson's fundamental construction, and truncation.

use std::collections::BTreeMap;
use std::ops::Range;

use crate::design::{verify_gdd, verify_pbd, GroupedDesign, IncidenceDesign, TypeMultiset};
use crate::error::{Error, Result};

/// Nonnegative weight per master point.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightAssignment(Vec<usize>);

impl WeightAssignment {
    pub fn new(weights: Vec<usize>) -> Self {
        WeightAssignment(weights)
    }

    pub fn uniform(v: usize, w: usize) -> Self {
        WeightAssignment(vec![w; v])
    }

    pub fn get(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// FNV-1a over the little-endian weights, for certificates.
    pub fn digest(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &w in &self.0 {
            for byte in (w as u64).to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        format!("{h:016x}")
    }
}

/// Master point to the contiguous range of output points replacing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionMap(Vec<Range<usize>>);

impl ExpansionMap {
    pub fn range(&self, x: usize) -> Range<usize> {
        self.0[x].clone()
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.0
    }

    /// The master point an output point came from.
    pub fn origin(&self, y: usize) -> Option<usize> {
        self.0.iter().position(|r| r.contains(&y))
    }
}

/// Fills the groups of `gdd` with PBDs.
///
/// Without `plus_point`, each group of size `g > 1` is replaced by the blocks
/// of `fillers[g]`, a PBD on `g` points; singleton groups need nothing. With
/// `plus_point`, a new point `v` is appended and each group of size `g` is
/// filled with `fillers[g + 1]`, whose last point becomes the new point.
pub fn fill_groups(
    gdd: &GroupedDesign,
    fillers: &BTreeMap<usize, IncidenceDesign>,
    plus_point: bool,
) -> Result<IncidenceDesign> {
    let v = gdd.v();
    let infinity = v;
    let mut checked: BTreeMap<usize, ()> = BTreeMap::new();
    let mut blocks = gdd.blocks().to_vec();
    for group in gdd.groups() {
        let g = group.len();
        if g == 1 && !plus_point {
            continue;
        }
        let size = if plus_point { g + 1 } else { g };
        let filler = fillers.get(&size).ok_or(Error::MissingFiller(size))?;
        if let std::collections::btree_map::Entry::Vacant(e) = checked.entry(size) {
            if filler.v() != size {
                return Err(Error::InvalidFiller { size, reason: format!("filler has {} points", filler.v()) });
            }
            let sizes: Vec<usize> = filler.block_size_histogram().into_keys().collect();
            let report = verify_pbd(filler, &sizes);
            if let Some(first) = report.first_violation() {
                return Err(Error::InvalidFiller { size, reason: first.to_string() });
            }
            e.insert(());
        }
        let image = |i: usize| if i < g { group[i] } else { infinity };
        blocks.extend(filler.blocks().iter().map(|b| b.iter().map(|&i| image(i)).collect::<Vec<_>>()));
    }
    IncidenceDesign::new(if plus_point { v + 1 } else { v }, blocks)
}

/// Wilson's fundamental construction.
///
/// Every master point `x` is replaced by `weights[x]` new points, and every
/// master block by an ingredient GDD whose groups are the expanded points of
/// the block. Output groups are the unions of expanded points over each master
/// group. `provider` maps a type to an ingredient whose groups, taken in order
/// of decreasing size (ties by position), are matched to the block's weighted
/// points sorted by decreasing weight (ties by point index). Blocks whose
/// surviving points number at most one contribute nothing.
pub fn fundamental_construction<P>(
    master: &GroupedDesign,
    weights: &WeightAssignment,
    mut provider: P,
) -> Result<(GroupedDesign, ExpansionMap)>
where
    P: FnMut(&TypeMultiset) -> Result<GroupedDesign>,
{
    if weights.as_slice().len() != master.v() {
        return Err(Error::InvalidDesign(format!(
            "{} weights for {} master points",
            weights.as_slice().len(),
            master.v()
        )));
    }
    let mut ranges = vec![0..0; master.v()];
    let mut groups = Vec::new();
    let mut next = 0;
    for g in master.groups() {
        let start = next;
        for &x in g {
            ranges[x] = next..next + weights.get(x);
            next += weights.get(x);
        }
        if next > start {
            groups.push((start..next).collect::<Vec<_>>());
        }
    }
    let mut blocks = Vec::new();
    for b in master.blocks() {
        let mut weighted: Vec<(usize, usize)> =
            b.iter().map(|&x| (weights.get(x), x)).filter(|&(w, _)| w > 0).collect();
        if weighted.len() <= 1 {
            continue;
        }
        weighted.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let ty = TypeMultiset::from_sizes(weighted.iter().map(|&(w, _)| w));
        let ingredient = provider(&ty)?;
        if ingredient.type_multiset() != ty {
            return Err(Error::ProviderGap(format!(
                "asked for {ty}, provider returned {}",
                ingredient.type_multiset()
            )));
        }
        let mut order: Vec<usize> = (0..ingredient.groups().len()).collect();
        order.sort_by(|&a, &b| ingredient.groups()[b].len().cmp(&ingredient.groups()[a].len()).then(a.cmp(&b)));
        let mut image = vec![0usize; ingredient.v()];
        for (slot, &gi) in order.iter().enumerate() {
            let base = ranges[weighted[slot].1].start;
            for (k, &p) in ingredient.groups()[gi].iter().enumerate() {
                image[p] = base + k;
            }
        }
        blocks.extend(ingredient.blocks().iter().map(|blk| blk.iter().map(|&p| image[p]).collect::<Vec<_>>()));
    }
    let out = GroupedDesign::new(next, groups, blocks)?;
    let sizes: Vec<usize> = out.block_size_histogram().into_keys().collect();
    verify_gdd(&out, &sizes).into_result()?;
    Ok((out, ExpansionMap(ranges)))
}

/// Restriction to a subset of points, relabeled onto `0..keep.len()` in
/// ascending order. Blocks left with at most one point are discarded; blocks
/// of size two are kept.
pub trait Truncate: Sized {
    fn truncate(&self, keep: &[usize]) -> Result<Self>;
}

fn relabeling(v: usize, keep: &[usize]) -> Result<(Vec<usize>, usize)> {
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut map = vec![usize::MAX; v];
    for (i, &x) in sorted.iter().enumerate() {
        if x >= v {
            return Err(Error::PointOutOfRange { point: x, v });
        }
        map[x] = i;
    }
    Ok((map, sorted.len()))
}

fn restrict_sets(sets: &[Vec<usize>], map: &[usize], min_len: usize) -> Vec<Vec<usize>> {
    sets.iter()
        .map(|s| s.iter().filter(|&&x| map[x] != usize::MAX).map(|&x| map[x]).collect::<Vec<_>>())
        .filter(|s| s.len() >= min_len)
        .collect()
}

impl Truncate for IncidenceDesign {
    fn truncate(&self, keep: &[usize]) -> Result<Self> {
        let (map, n) = relabeling(self.v(), keep)?;
        let out = IncidenceDesign::new(n, restrict_sets(self.blocks(), &map, 2))?;
        match self.labels() {
            Some(labels) => {
                let kept = (0..self.v()).filter(|&x| map[x] != usize::MAX).map(|x| labels[x].clone()).collect();
                out.with_labels(kept)
            }
            None => Ok(out),
        }
    }
}

impl Truncate for GroupedDesign {
    fn truncate(&self, keep: &[usize]) -> Result<Self> {
        let (map, n) = relabeling(self.v(), keep)?;
        GroupedDesign::new(n, restrict_sets(self.groups(), &map, 1), restrict_sets(self.blocks(), &map, 2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flats::{flat_spectrum, ScanMode};
    use crate::geometry::{build_projective_space, ProjectiveSpace};

    fn single_block(n: usize) -> IncidenceDesign {
        IncidenceDesign::new(n, vec![(0..n).collect()]).unwrap()
    }

    fn punctured_pg24() -> GroupedDesign {
        let pg = ProjectiveSpace::new(2, 4).unwrap();
        let p = 0;
        let keep: Vec<usize> = (1..21).collect();
        let relabel = |x: usize| x - 1;
        let mut groups = Vec::new();
        let mut blocks = Vec::new();
        for l in pg.lines() {
            if l.contains(&p) {
                groups.push(l.iter().filter(|&&x| x != p).map(|&x| relabel(x)).collect());
            } else {
                blocks.push(l.iter().map(|&x| relabel(x)).collect());
            }
        }
        assert_eq!(keep.len(), 20);
        GroupedDesign::new(20, groups, blocks).unwrap()
    }

    fn td33() -> GroupedDesign {
        let mut blocks = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                blocks.push((0..3).map(|g| 3 * g + (a + b * g) % 3).collect());
            }
        }
        GroupedDesign::new(9, (0..3).map(|g| (3 * g..3 * g + 3).collect()).collect(), blocks).unwrap()
    }

    #[test]
    fn filling_punctured_plane_gives_pbd20() {
        let gdd = punctured_pg24();
        assert!(verify_gdd(&gdd, &[5]).passed);
        let fillers = BTreeMap::from([(4, single_block(4))]);
        let pbd = fill_groups(&gdd, &fillers, false).unwrap();
        assert_eq!(pbd.v(), 20);
        assert!(verify_pbd(&pbd, &[4, 5]).passed);
    }

    #[test]
    fn plus_point_filling_of_td33() {
        let fillers = BTreeMap::from([(4, single_block(4))]);
        let pbd = fill_groups(&td33(), &fillers, true).unwrap();
        assert_eq!(pbd.v(), 10);
        assert!(verify_pbd(&pbd, &[3, 4]).passed);
    }

    #[test]
    fn singleton_groups_need_no_filler() {
        let pg = build_projective_space(2, 2).unwrap();
        let out = fill_groups(&pg.as_grouped(), &BTreeMap::new(), false).unwrap();
        assert_eq!(out.blocks(), pg.blocks());
    }

    #[test]
    fn missing_or_bad_filler_is_an_error() {
        assert!(matches!(
            fill_groups(&td33(), &BTreeMap::new(), false),
            Err(Error::MissingFiller(3))
        ));
        let bad = IncidenceDesign::new(3, vec![vec![0, 1]]).unwrap();
        let fillers = BTreeMap::from([(3, bad)]);
        assert!(matches!(fill_groups(&td33(), &fillers, false), Err(Error::InvalidFiller { .. })));
    }

    fn blocks_of_type(ty: &TypeMultiset) -> Result<GroupedDesign> {
        // only types with all groups of size 1: a single block
        let sizes = ty.sizes();
        if sizes.iter().any(|&s| s != 1) {
            return Err(Error::ProviderGap(ty.to_string()));
        }
        let n = sizes.len();
        GroupedDesign::new(n, (0..n).map(|x| vec![x]).collect(), vec![(0..n).collect()])
    }

    #[test]
    fn unit_weights_reproduce_master() {
        let pg = build_projective_space(2, 4).unwrap();
        let (out, map) =
            fundamental_construction(&pg.as_grouped(), &WeightAssignment::uniform(21, 1), blocks_of_type).unwrap();
        assert_eq!(out.to_incidence(), pg.canonical());
        assert_eq!(map.range(5), 5..6);
    }

    #[test]
    fn provider_gap_aborts() {
        let pg = build_projective_space(2, 4).unwrap();
        let err = fundamental_construction(&pg.as_grouped(), &WeightAssignment::uniform(21, 3), blocks_of_type)
            .unwrap_err();
        assert!(matches!(err, Error::ProviderGap(ref t) if t == "3^5"));
    }

    #[test]
    fn zero_weights_truncate() {
        let pg = build_projective_space(2, 4).unwrap();
        let mut w = vec![1; 21];
        w[0] = 0;
        let (out, _) =
            fundamental_construction(&pg.as_grouped(), &WeightAssignment::new(w), blocks_of_type).unwrap();
        assert_eq!(out.v(), 20);
        assert_eq!(out.block_size_histogram(), BTreeMap::from([(4, 5), (5, 16)]));
    }

    #[test]
    fn truncating_fano_by_a_point() {
        let fano = build_projective_space(2, 2).unwrap();
        let out = fano.truncate(&(1..7).collect::<Vec<_>>()).unwrap();
        assert_eq!(out.v(), 6);
        assert_eq!(out.block_size_histogram(), BTreeMap::from([(2, 3), (3, 4)]));
    }

    #[test]
    fn truncate_identity_and_block() {
        let pg = build_projective_space(2, 4).unwrap();
        let all: Vec<usize> = (0..21).collect();
        assert_eq!(pg.truncate(&all).unwrap(), pg);
        let line = pg.blocks()[7].clone();
        let one = pg.truncate(&line).unwrap();
        assert_eq!(one.blocks(), &[vec![0, 1, 2, 3, 4]]);
        let g = td33().truncate(&[0, 1, 3, 4, 6]).unwrap();
        assert_eq!(g.groups().len(), 3);
    }

    #[test]
    fn flat_bound_after_unit_expansion() {
        let pg = build_projective_space(2, 3).unwrap();
        let (out, _) =
            fundamental_construction(&pg.as_grouped(), &WeightAssignment::uniform(13, 1), blocks_of_type).unwrap();
        let s = flat_spectrum(&out.to_incidence(), 3, ScanMode::Exhaustive).unwrap();
        assert_eq!(s.max, 13);
    }

    #[test]
    fn digest_is_stable() {
        let w = WeightAssignment::new(vec![1, 3, 3]);
        assert_eq!(w.digest(), WeightAssignment::new(vec![1, 3, 3]).digest());
        assert_ne!(w.digest(), WeightAssignment::new(vec![3, 1, 3]).digest());
    }
}
