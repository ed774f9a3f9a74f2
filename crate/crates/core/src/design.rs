//! Incidence structures and exact verification of the PBD and GDD axioms.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of violations kept in a report; the rest are only counted.
pub const MAX_REPORTED_VIOLATIONS: usize = 1000;

fn check_block(block: &mut [usize], v: usize, index: usize) -> Result<()> {
    block.sort_unstable();
    if let Some(&last) = block.last() {
        if last >= v {
            return Err(Error::PointOutOfRange { point: last, v });
        }
    }
    if block.len() < 2 {
        return Err(Error::InvalidDesign(format!("block {index} has fewer than two points")));
    }
    if block.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidDesign(format!("block {index} repeats a point")));
    }
    Ok(())
}

/// A point set `0..v` with a family of blocks.
///
/// Blocks are stored with their points in ascending order. Balance is not
/// assumed; use [`verify_pbd`] to check it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceDesign {
    v: usize,
    blocks: Vec<Vec<usize>>,
    labels: Option<Vec<Vec<u8>>>,
}

impl IncidenceDesign {
    pub fn new(v: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        for (i, b) in blocks.iter_mut().enumerate() {
            check_block(b, v, i)?;
        }
        Ok(IncidenceDesign { v, blocks, labels: None })
    }

    /// Attaches coordinate labels, one per point.
    pub fn with_labels(mut self, labels: Vec<Vec<u8>>) -> Result<Self> {
        if labels.len() != self.v {
            return Err(Error::InvalidDesign(format!(
                "{} labels for {} points",
                labels.len(),
                self.v
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn labels(&self) -> Option<&[Vec<u8>]> {
        self.labels.as_deref()
    }

    pub fn block_size_histogram(&self) -> BTreeMap<usize, usize> {
        histogram(&self.blocks)
    }

    pub fn min_block_size(&self) -> Option<usize> {
        self.blocks.iter().map(Vec::len).min()
    }

    /// The same design viewed as a GDD with singleton groups.
    pub fn as_grouped(&self) -> GroupedDesign {
        GroupedDesign {
            v: self.v,
            groups: (0..self.v).map(|x| vec![x]).collect(),
            blocks: self.blocks.clone(),
        }
    }

    /// Blocks sorted lexicographically, labels dropped.
    pub fn canonical(&self) -> IncidenceDesign {
        let mut blocks = self.blocks.clone();
        blocks.sort();
        IncidenceDesign { v: self.v, blocks, labels: None }
    }
}

/// A group divisible design: a partition of `0..v` into groups plus blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupedDesign {
    v: usize,
    groups: Vec<Vec<usize>>,
    blocks: Vec<Vec<usize>>,
}

impl GroupedDesign {
    /// Validates that `groups` partition `0..v` into nonempty cells. The
    /// block/group intersection axiom is left to [`verify_gdd`].
    pub fn new(v: usize, mut groups: Vec<Vec<usize>>, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; v];
        for (i, g) in groups.iter_mut().enumerate() {
            g.sort_unstable();
            if g.is_empty() {
                return Err(Error::InvalidDesign(format!("group {i} is empty")));
            }
            for &x in g.iter() {
                if x >= v {
                    return Err(Error::PointOutOfRange { point: x, v });
                }
                if std::mem::replace(&mut seen[x], true) {
                    return Err(Error::InvalidDesign(format!("point {x} lies in two groups")));
                }
            }
        }
        if let Some(x) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidDesign(format!("point {x} lies in no group")));
        }
        for (i, b) in blocks.iter_mut().enumerate() {
            check_block(b, v, i)?;
        }
        Ok(GroupedDesign { v, groups, blocks })
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn type_multiset(&self) -> TypeMultiset {
        TypeMultiset::from_sizes(self.groups.iter().map(Vec::len))
    }

    pub fn block_size_histogram(&self) -> BTreeMap<usize, usize> {
        histogram(&self.blocks)
    }

    /// Group index of every point.
    pub fn group_of(&self) -> Vec<usize> {
        let mut owner = vec![0; self.v];
        for (i, g) in self.groups.iter().enumerate() {
            for &x in g {
                owner[x] = i;
            }
        }
        owner
    }

    /// Drops the group structure.
    pub fn to_incidence(&self) -> IncidenceDesign {
        IncidenceDesign { v: self.v, blocks: self.blocks.clone(), labels: None }
    }
}

fn histogram(blocks: &[Vec<usize>]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for b in blocks {
        *h.entry(b.len()).or_insert(0) += 1;
    }
    h
}

/// Group sizes with multiplicities, in exponential notation `g^u`.
///
/// Entries are kept sorted by descending group size, with no repeated sizes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeMultiset(Vec<(usize, usize)>);

impl TypeMultiset {
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut sizes = Vec::new();
        for (g, u) in pairs {
            if g == 0 || u == 0 {
                return Err(Error::InvalidDesign(format!("bad type entry {g}^{u}")));
            }
            sizes.extend(std::iter::repeat_n(g, u));
        }
        Ok(Self::from_sizes(sizes))
    }

    pub fn from_sizes(sizes: impl IntoIterator<Item = usize>) -> Self {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for g in sizes {
            *counts.entry(g).or_insert(0) += 1;
        }
        TypeMultiset(counts.into_iter().rev().collect())
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.0
    }

    /// Group sizes, largest first.
    pub fn sizes(&self) -> Vec<usize> {
        self.0
            .iter()
            .flat_map(|&(g, u)| std::iter::repeat_n(g, u))
            .collect()
    }

    pub fn total_points(&self) -> usize {
        self.0.iter().map(|&(g, u)| g * u).sum()
    }

    pub fn group_count(&self) -> usize {
        self.0.iter().map(|&(_, u)| u).sum()
    }

    /// Number of point pairs lying in different groups.
    pub fn cross_pairs(&self) -> usize {
        let v = self.total_points();
        let within: usize = self.0.iter().map(|&(g, u)| u * g * (g - 1) / 2).sum();
        v * (v - 1) / 2 - within
    }
}

impl fmt::Display for TypeMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (g, u)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{g}^{u}")?;
        }
        Ok(())
    }
}

impl FromStr for TypeMultiset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for tok in s.split_whitespace() {
            let (g, u) = match tok.split_once('^') {
                Some((g, u)) => (g, u),
                None => (tok, "1"),
            };
            let g = g.parse().map_err(|_| Error::InvalidDesign(format!("bad type token {tok:?}")))?;
            let u = u.parse().map_err(|_| Error::InvalidDesign(format!("bad type token {tok:?}")))?;
            pairs.push((g, u));
        }
        if pairs.is_empty() {
            return Err(Error::InvalidDesign("empty type".into()));
        }
        TypeMultiset::new(pairs)
    }
}

/// The divisibility data of a block-size set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdmissibilityRecord {
    pub alpha: u64,
    pub beta: u64,
    pub admissible: bool,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `alpha = gcd{k-1}`, `beta = gcd{k(k-1)}`; `v` is admissible when
/// `alpha | v-1` and `beta | v(v-1)`.
pub fn admissibility(v: u64, k: &[u64]) -> AdmissibilityRecord {
    let alpha = k.iter().fold(0, |acc, &k| gcd(acc, k.saturating_sub(1)));
    let beta = k.iter().fold(0, |acc, &k| gcd(acc, k * k.saturating_sub(1)));
    let divides = |d: u64, x: u64| if d == 0 { x == 0 } else { x.is_multiple_of(d) };
    let admissible = v >= 1 && divides(alpha, v - 1) && divides(beta, v * (v - 1));
    AdmissibilityRecord { alpha, beta, admissible }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    PairUncovered { a: usize, b: usize },
    PairRepeated { a: usize, b: usize, times: usize },
    BlockSize { block: usize, size: usize },
    /// A block meets a group in two points, covering a within-group pair.
    BlockMeetsGroup { block: usize, group: usize, a: usize, b: usize },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::PairUncovered { .. } => "pair_uncovered",
            Violation::PairRepeated { .. } => "pair_repeated",
            Violation::BlockSize { .. } => "block_size",
            Violation::BlockMeetsGroup { .. } => "block_meets_group",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PairUncovered { a, b } => write!(f, "pair ({a},{b}) is not covered"),
            Violation::PairRepeated { a, b, times } => {
                write!(f, "pair ({a},{b}) is covered {times} times")
            }
            Violation::BlockSize { block, size } => {
                write!(f, "block {block} has disallowed size {size}")
            }
            Violation::BlockMeetsGroup { block, group, a, b } => {
                write!(f, "block {block} meets group {group} in points {a} and {b}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerificationStats {
    pub block_sizes: BTreeMap<usize, usize>,
    pub pairs_uncovered: usize,
    pub pairs_covered_once: usize,
    pub pairs_covered_repeatedly: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
    /// Violations found beyond [`MAX_REPORTED_VIOLATIONS`].
    pub omitted: usize,
    pub stats: VerificationStats,
}

impl VerificationReport {
    fn new(block_sizes: BTreeMap<usize, usize>) -> Self {
        VerificationReport {
            passed: true,
            violations: Vec::new(),
            omitted: 0,
            stats: VerificationStats { block_sizes, ..Default::default() },
        }
    }

    fn push(&mut self, v: Violation) {
        self.passed = false;
        if self.violations.len() < MAX_REPORTED_VIOLATIONS {
            self.violations.push(v);
        } else {
            self.omitted += 1;
        }
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }

    /// `Ok` when the report passed, otherwise an error naming the first violation.
    pub fn into_result(self) -> Result<Self> {
        match self.violations.first() {
            None => Ok(self),
            Some(v) => Err(Error::Verification(v.to_string())),
        }
    }
}

/// Pair multiplicities, row-major upper triangle in a dense `v*v` buffer.
fn pair_counts(v: usize, blocks: &[Vec<usize>]) -> Vec<u8> {
    let mut counts = vec![0u8; v * v];
    for b in blocks {
        for (i, &x) in b.iter().enumerate() {
            for &y in &b[i + 1..] {
                let c = &mut counts[x * v + y];
                *c = c.saturating_add(1);
            }
        }
    }
    counts
}

/// Verifies that every pair of distinct points lies in exactly one block and
/// that all block sizes belong to `k`.
pub fn verify_pbd(design: &IncidenceDesign, k: &[usize]) -> VerificationReport {
    let singletons: Vec<usize> = (0..design.v()).collect();
    verify_pairs(design.v(), design.blocks(), k, &singletons)
}

/// Verifies the GDD axioms: each block meets each group at most once and every
/// pair from distinct groups lies in exactly one block. Block sizes must be in `k`.
pub fn verify_gdd(gdd: &GroupedDesign, k: &[usize]) -> VerificationReport {
    verify_pairs(gdd.v(), gdd.blocks(), k, &gdd.group_of())
}

fn verify_pairs(
    v: usize,
    blocks: &[Vec<usize>],
    k: &[usize],
    group_of: &[usize],
) -> VerificationReport {
    let mut report = VerificationReport::new(histogram(blocks));
    for (i, b) in blocks.iter().enumerate() {
        if !k.contains(&b.len()) {
            report.push(Violation::BlockSize { block: i, size: b.len() });
        }
        for (j, &x) in b.iter().enumerate() {
            for &y in &b[j + 1..] {
                if group_of[x] == group_of[y] {
                    report.push(Violation::BlockMeetsGroup { block: i, group: group_of[x], a: x, b: y });
                }
            }
        }
    }
    let counts = pair_counts(v, blocks);
    for x in 0..v {
        for y in x + 1..v {
            let c = counts[x * v + y] as usize;
            let cross = group_of[x] != group_of[y];
            match (cross, c) {
                (true, 0) => {
                    report.stats.pairs_uncovered += 1;
                    report.push(Violation::PairUncovered { a: x, b: y });
                }
                (_, 0) => report.stats.pairs_uncovered += 1,
                (_, 1) => report.stats.pairs_covered_once += 1,
                (_, times) => {
                    report.stats.pairs_covered_repeatedly += 1;
                    if cross {
                        report.push(Violation::PairRepeated { a: x, b: y, times });
                    }
                }
            }
        }
    }
    report
}
