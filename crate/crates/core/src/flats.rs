//! Flat closure, flat spectra and dimension.
//!
//! The closure `<S>` of a seed set is computed with a worklist: every point
//! entering the flat is paired with the points already in it, and the block
//! through each such pair (looked up in a [`PairIndex`]) is absorbed whole.
//! Each pair of the final flat is inspected once, so one closure costs
//! `O(|<S>|^2)` lookups.
//!
//! Sampled scans draw seeds from [`SplitMix64`] seeded with the caller's seed.
//! Sample `i` (in order) repeatedly calls `gen_range(0..v)` from `rand` 0.8 on
//! the shared generator, discarding repeats, until it holds `d` distinct
//! points. Results are therefore reproducible bit-for-bit for a given seed.

use rand::Rng;
use rand::SeedableRng;
pub use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::Serialize;

use crate::design::{GroupedDesign, IncidenceDesign};
use crate::error::{Error, Result};

const NO_BLOCK: u32 = u32::MAX;

/// Default ceiling on the number of seeds an exhaustive scan may visit.
pub const DEFAULT_EXHAUSTIVE_CEILING: u128 = 3_000_000;

/// Maps each covered pair of points to the unique block through it.
#[derive(Debug, Clone)]
pub struct PairIndex {
    v: usize,
    cells: Vec<u32>,
}

impl PairIndex {
    /// Fails if some pair lies in two blocks.
    pub fn new(v: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut cells = vec![NO_BLOCK; v * v];
        for (i, b) in blocks.iter().enumerate() {
            for (j, &x) in b.iter().enumerate() {
                if x >= v {
                    return Err(Error::PointOutOfRange { point: x, v });
                }
                for &y in &b[j + 1..] {
                    if cells[x * v + y] != NO_BLOCK {
                        return Err(Error::Verification(format!(
                            "pair ({},{}) lies in blocks {} and {i}",
                            x.min(y),
                            x.max(y),
                            cells[x * v + y]
                        )));
                    }
                    cells[x * v + y] = i as u32;
                    cells[y * v + x] = i as u32;
                }
            }
        }
        Ok(PairIndex { v, cells })
    }

    pub fn v(&self) -> usize {
        self.v
    }

    #[inline]
    pub fn block_of(&self, a: usize, b: usize) -> Option<usize> {
        let c = self.cells[a * self.v + b];
        (c != NO_BLOCK).then_some(c as usize)
    }
}

/// Reusable closure engine over one design.
///
/// Scratch buffers are stamped with a generation counter, so successive
/// closures do not clear anything.
#[derive(Debug, Clone)]
pub struct FlatCloser<'a> {
    index: &'a PairIndex,
    blocks: &'a [Vec<usize>],
    point_stamp: Vec<u32>,
    block_stamp: Vec<u32>,
    generation: u32,
    members: Vec<usize>,
}

impl<'a> FlatCloser<'a> {
    pub fn new(index: &'a PairIndex, blocks: &'a [Vec<usize>]) -> Self {
        FlatCloser {
            index,
            blocks,
            point_stamp: vec![0; index.v()],
            block_stamp: vec![0; blocks.len()],
            generation: 0,
            members: Vec::new(),
        }
    }

    fn next_generation(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.point_stamp.fill(0);
            self.block_stamp.fill(0);
            self.generation = 1;
        }
    }

    /// Members of `<seed>` in insertion order. Seed points must be in range.
    pub fn close(&mut self, seed: &[usize]) -> &[usize] {
        self.next_generation();
        let gen = self.generation;
        self.members.clear();
        for &x in seed {
            if self.point_stamp[x] != gen {
                self.point_stamp[x] = gen;
                self.members.push(x);
            }
        }
        let mut next = 0;
        while next < self.members.len() {
            let x = self.members[next];
            for k in 0..next {
                let y = self.members[k];
                if let Some(b) = self.index.block_of(x, y) {
                    if self.block_stamp[b] != gen {
                        self.block_stamp[b] = gen;
                        for &z in &self.blocks[b] {
                            if self.point_stamp[z] != gen {
                                self.point_stamp[z] = gen;
                                self.members.push(z);
                            }
                        }
                    }
                }
            }
            next += 1;
        }
        &self.members
    }

    /// Whether `x` belongs to the flat produced by the latest [`close`](Self::close).
    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        self.point_stamp[x] == self.generation
    }
}

fn check_seed(v: usize, seed: &[usize]) -> Result<()> {
    match seed.iter().find(|&&x| x >= v) {
        Some(&point) => Err(Error::PointOutOfRange { point, v }),
        None => Ok(()),
    }
}

/// The flat generated by `seed`, sorted ascending.
pub fn generated_flat(design: &IncidenceDesign, seed: &[usize]) -> Result<Vec<usize>> {
    check_seed(design.v(), seed)?;
    let index = PairIndex::new(design.v(), design.blocks())?;
    let mut closer = FlatCloser::new(&index, design.blocks());
    let mut flat = closer.close(seed).to_vec();
    flat.sort_unstable();
    Ok(flat)
}

/// Closure in a GDD. Pairs inside a group lie in no block and do not expand.
pub fn generated_subdesign(gdd: &GroupedDesign, seed: &[usize]) -> Result<Vec<usize>> {
    check_seed(gdd.v(), seed)?;
    let index = PairIndex::new(gdd.v(), gdd.blocks())?;
    let mut closer = FlatCloser::new(&index, gdd.blocks());
    let mut flat = closer.close(seed).to_vec();
    flat.sort_unstable();
    Ok(flat)
}

/// The blocks of `design` lying inside `subset`, relabeled onto `0..|subset|`
/// in the order of `subset`.
pub fn restrict(design: &IncidenceDesign, subset: &[usize]) -> Result<IncidenceDesign> {
    let mut relabel = vec![usize::MAX; design.v()];
    for (i, &x) in subset.iter().enumerate() {
        check_seed(design.v(), &[x])?;
        relabel[x] = i;
    }
    let blocks = design
        .blocks()
        .iter()
        .filter(|b| b.iter().all(|&x| relabel[x] != usize::MAX))
        .map(|b| b.iter().map(|&x| relabel[x]).collect())
        .collect();
    IncidenceDesign::new(subset.len(), blocks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    Exhaustive,
    Sample { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlatSpectrum {
    /// Largest generated flat seen.
    pub max: usize,
    /// A seed achieving `max`: the lexicographically least one in exhaustive
    /// mode, the earliest drawn one in sample mode.
    pub witness: Vec<usize>,
    /// Number of closures actually computed.
    pub closures: u64,
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(x) => x / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Largest flat generated by a `d`-subset of points.
pub fn flat_spectrum(design: &IncidenceDesign, d: usize, mode: ScanMode) -> Result<FlatSpectrum> {
    flat_spectrum_with_ceiling(design, d, mode, DEFAULT_EXHAUSTIVE_CEILING)
}

pub fn flat_spectrum_with_ceiling(
    design: &IncidenceDesign,
    d: usize,
    mode: ScanMode,
    ceiling: u128,
) -> Result<FlatSpectrum> {
    if d < 2 {
        return Err(Error::OutOfRange(format!("seed size must be at least 2, got {d}")));
    }
    spectrum(design.v(), design.blocks(), d, mode, ceiling)
}

fn spectrum(v: usize, blocks: &[Vec<usize>], d: usize, mode: ScanMode, ceiling: u128) -> Result<FlatSpectrum> {
    if d > v {
        return Err(Error::OutOfRange(format!("seed size {d} exceeds the {v} available points")));
    }
    let index = PairIndex::new(v, blocks)?;
    match mode {
        ScanMode::Exhaustive => {
            let subsets = binomial(v, d);
            if subsets > ceiling {
                return Err(Error::ExhaustiveOverCeiling { subsets, ceiling });
            }
            Ok(exhaustive(&index, blocks, d))
        }
        ScanMode::Sample { count, seed } => Ok(sampled(&index, blocks, d, count, seed)),
    }
}

fn better(a: &FlatSpectrum, b: &FlatSpectrum) -> bool {
    a.max > b.max || (a.max == b.max && a.witness < b.witness)
}

/// Exact maximum over all `d`-subsets.
///
/// With the first `d - 1` points fixed, a last point lying inside the flat of
/// an earlier seed with the same prefix generates a subflat of it, so that seed
/// is skipped. The maximum and its lexicographically least witness are unchanged.
fn exhaustive(index: &PairIndex, blocks: &[Vec<usize>], d: usize) -> FlatSpectrum {
    let v = index.v();
    let empty = FlatSpectrum { max: 0, witness: Vec::new(), closures: 0 };
    let parts: Vec<FlatSpectrum> = (0..=v - d)
        .into_par_iter()
        .map(|first| {
            let mut closer = FlatCloser::new(index, blocks);
            let mut best = FlatSpectrum { max: 0, witness: Vec::new(), closures: 0 };
            let mut prefix = vec![first];
            let mut dominated = vec![0u32; v];
            let mut stamp = 0u32;
            scan_prefix(&mut closer, &mut prefix, d, v, &mut dominated, &mut stamp, &mut best);
            best
        })
        .collect();
    parts.into_iter().fold(empty, |acc, p| {
        let closures = acc.closures + p.closures;
        let mut winner = if better(&p, &acc) { p } else { acc };
        winner.closures = closures;
        winner
    })
}

fn scan_prefix(
    closer: &mut FlatCloser<'_>,
    prefix: &mut Vec<usize>,
    d: usize,
    v: usize,
    dominated: &mut [u32],
    stamp: &mut u32,
    best: &mut FlatSpectrum,
) {
    let start = prefix.last().map_or(0, |&x| x + 1);
    if prefix.len() + 1 < d {
        for x in start..v {
            if v - x < d - prefix.len() {
                break;
            }
            prefix.push(x);
            scan_prefix(closer, prefix, d, v, dominated, stamp, best);
            prefix.pop();
        }
        return;
    }
    *stamp += 1;
    for last in start..v {
        if dominated[last] == *stamp {
            continue;
        }
        prefix.push(last);
        let flat = closer.close(prefix);
        let size = flat.len();
        for &z in flat {
            dominated[z] = *stamp;
        }
        best.closures += 1;
        if size > best.max {
            best.max = size;
            best.witness = prefix.clone();
        }
        prefix.pop();
    }
}

/// Draws `count` seeds of `d` distinct points, in order, from one generator.
pub fn sample_seeds(v: usize, d: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut s: Vec<usize> = Vec::with_capacity(d);
            while s.len() < d {
                let x = rng.gen_range(0..v);
                if !s.contains(&x) {
                    s.push(x);
                }
            }
            s.sort_unstable();
            s
        })
        .collect()
}

fn sampled(index: &PairIndex, blocks: &[Vec<usize>], d: usize, count: usize, seed: u64) -> FlatSpectrum {
    let seeds = sample_seeds(index.v(), d, count, seed);
    let sizes: Vec<usize> = seeds
        .par_chunks(256)
        .flat_map_iter(|chunk| {
            let mut closer = FlatCloser::new(index, blocks);
            chunk.iter().map(|s| closer.close(s).len()).collect::<Vec<_>>()
        })
        .collect();
    let mut best = FlatSpectrum { max: 0, witness: Vec::new(), closures: count as u64 };
    for (s, size) in seeds.into_iter().zip(sizes) {
        if size > best.max {
            best.max = size;
            best.witness = s;
        }
    }
    best
}

/// Largest `d` such that every `d`-subset generates a proper flat.
///
/// Every step is an exhaustive scan, so this is only practical for small designs.
pub fn dimension(design: &IncidenceDesign, ceiling: u128) -> Result<usize> {
    let v = design.v();
    if v < 2 {
        return Ok(0);
    }
    let mut d = 1;
    while d < v {
        let next = d + 1;
        let subsets = binomial(v, next);
        if subsets > ceiling {
            return Err(Error::ExhaustiveOverCeiling { subsets, ceiling });
        }
        let s = spectrum(v, design.blocks(), next, ScanMode::Exhaustive, ceiling)?;
        if s.max >= v {
            break;
        }
        d = next;
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::verify_pbd;
    use crate::geometry::{build_affine_space, build_projective_space};

    /// Fixpoint iteration straight from the definition: absorb any block that
    /// meets the set in two or more points until nothing changes.
    fn naive_closure(design: &IncidenceDesign, seed: &[usize]) -> Vec<usize> {
        let mut inside = vec![false; design.v()];
        for &x in seed {
            inside[x] = true;
        }
        loop {
            let mut changed = false;
            for b in design.blocks() {
                if b.iter().filter(|&&x| inside[x]).count() >= 2 {
                    for &x in b {
                        changed |= !std::mem::replace(&mut inside[x], true);
                    }
                }
            }
            if !changed {
                break;
            }
        }
        (0..design.v()).filter(|&x| inside[x]).collect()
    }

    fn brute_spectrum(design: &IncidenceDesign, d: usize) -> usize {
        fn rec(design: &IncidenceDesign, d: usize, start: usize, cur: &mut Vec<usize>, best: &mut usize) {
            if cur.len() == d {
                *best = (*best).max(naive_closure(design, cur).len());
                return;
            }
            for x in start..design.v() {
                cur.push(x);
                rec(design, d, x + 1, cur, best);
                cur.pop();
            }
        }
        let mut best = 0;
        rec(design, d, 0, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn two_points_generate_their_line() {
        let pg = build_projective_space(2, 4).unwrap();
        let line = &pg.blocks()[3];
        assert_eq!(&generated_flat(&pg, &line[..2]).unwrap(), line);
    }

    #[test]
    fn fano_flats_in_pg32() {
        let pg = build_projective_space(3, 2).unwrap();
        let line = pg.blocks()[0].clone();
        let off = (0..15).find(|x| !line.contains(x)).unwrap();
        let flat = generated_flat(&pg, &[line[0], line[1], off]).unwrap();
        assert_eq!(flat.len(), 7);
        assert!(verify_pbd(&restrict(&pg, &flat).unwrap(), &[3]).passed);
    }

    #[test]
    fn tiny_seeds_are_fixed() {
        let pg = build_projective_space(2, 2).unwrap();
        assert!(generated_flat(&pg, &[]).unwrap().is_empty());
        assert_eq!(generated_flat(&pg, &[4]).unwrap(), vec![4]);
        assert!(matches!(generated_flat(&pg, &[7]), Err(Error::PointOutOfRange { .. })));
    }

    #[test]
    fn spectrum_examples() {
        let pg24 = build_projective_space(2, 4).unwrap();
        assert_eq!(flat_spectrum(&pg24, 3, ScanMode::Exhaustive).unwrap().max, 21);
        let pg32 = build_projective_space(3, 2).unwrap();
        assert_eq!(flat_spectrum(&pg32, 3, ScanMode::Exhaustive).unwrap().max, 7);
        let ag23 = build_affine_space(2, 3).unwrap();
        assert_eq!(flat_spectrum(&ag23, 2, ScanMode::Exhaustive).unwrap().max, 3);
    }

    #[test]
    fn pruned_scan_matches_brute_force() {
        for design in [
            build_projective_space(3, 2).unwrap(),
            build_affine_space(3, 3).unwrap(),
            build_projective_space(2, 3).unwrap(),
            build_affine_space(2, 4).unwrap(),
        ] {
            for d in 2..=4 {
                let fast = flat_spectrum(&design, d, ScanMode::Exhaustive).unwrap();
                assert_eq!(fast.max, brute_spectrum(&design, d));
                assert_eq!(naive_closure(&design, &fast.witness).len(), fast.max);
            }
        }
    }

    #[test]
    fn witness_is_lexicographically_least() {
        let pg = build_projective_space(3, 2).unwrap();
        let s = flat_spectrum(&pg, 3, ScanMode::Exhaustive).unwrap();
        // 0,1,2 is a line in canonical order; 0,1,3 spans a Fano plane
        assert_eq!(pg.blocks()[0], vec![0, 1, 2]);
        assert_eq!(s.witness, vec![0, 1, 3]);
    }

    #[test]
    fn exhaustive_ceiling_rejects() {
        let pg = build_projective_space(3, 4).unwrap();
        let err = flat_spectrum_with_ceiling(&pg, 3, ScanMode::Exhaustive, 1000).unwrap_err();
        assert!(matches!(err, Error::ExhaustiveOverCeiling { .. }));
    }

    #[test]
    fn sampling_is_deterministic_and_bounded() {
        let ag = build_affine_space(3, 3).unwrap();
        let mode = ScanMode::Sample { count: 500, seed: 7 };
        let a = flat_spectrum(&ag, 3, mode).unwrap();
        let b = flat_spectrum(&ag, 3, mode).unwrap();
        assert_eq!(a, b);
        let full = flat_spectrum(&ag, 3, ScanMode::Exhaustive).unwrap();
        assert!(a.max <= full.max);
        assert_eq!(sample_seeds(30, 3, 5, 1), sample_seeds(30, 3, 5, 1));
        assert_ne!(sample_seeds(30, 3, 5, 1), sample_seeds(30, 3, 5, 2));
    }

    #[test]
    fn dimension_examples() {
        let pg32 = build_projective_space(3, 2).unwrap();
        assert_eq!(dimension(&pg32, DEFAULT_EXHAUSTIVE_CEILING).unwrap(), 3);
        let pg24 = build_projective_space(2, 4).unwrap();
        assert_eq!(dimension(&pg24, DEFAULT_EXHAUSTIVE_CEILING).unwrap(), 2);
        let one = IncidenceDesign::new(5, vec![vec![0, 1, 2, 3, 4]]).unwrap();
        assert_eq!(dimension(&one, DEFAULT_EXHAUSTIVE_CEILING).unwrap(), 1);
    }

    #[test]
    fn flats_form_a_lattice_in_pg32() {
        let pg = build_projective_space(3, 2).unwrap();
        let mut flats = std::collections::BTreeSet::new();
        for a in 0..15 {
            for b in a + 1..15 {
                for c in b + 1..15 {
                    flats.insert(generated_flat(&pg, &[a, b, c]).unwrap());
                }
            }
        }
        for x in &flats {
            for y in &flats {
                let meet: Vec<usize> = x.iter().filter(|p| y.contains(p)).copied().collect();
                assert_eq!(generated_flat(&pg, &meet).unwrap(), meet);
            }
        }
    }
}
