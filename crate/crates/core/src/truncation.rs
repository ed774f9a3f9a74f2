//! Legal truncations of PG_d(4): point sets whose removal leaves no line with
//! exactly two points.
//!
//! Every plan at dimension `d` realizes a set `R` together with a designated
//! hyperplane, always moved to `{x0 = 0}`, on which `R` is either empty (level
//! `None`) or exactly the subspace `F_i` of points whose first `d - i`
//! coordinates vanish (level `Some(i)`). The *value* of a plan is
//! `|R| - [i]_4`. Values combine by addition under gluing, which lets the
//! reachable values be computed as a table and each entry carry the plan that
//! realizes it.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, Route};
use crate::compose::Truncate;
use crate::design::{verify_pbd, IncidenceDesign};
use crate::error::{Error, Result};
use crate::field::FieldTable;
use crate::geometry::{projective_points, ProjectiveSpace};

pub type Level = Option<usize>;

/// `[i]_4`, with `[None] = 0`.
pub fn level_size(level: Level) -> usize {
    level.map_or(0, |i| projective_points(i as i32, 4) as usize)
}

fn pow4(d: usize) -> usize {
    4usize.pow(d as u32)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TruncationPlan {
    /// On PG_1(4): remove the first `removed` affine points `[1:a]`, and the
    /// point `[0:1]` when `marked`.
    LineBase { marked: bool, removed: usize },
    /// Remove every point off the designated hyperplane, plus `F_level`.
    AffineBase { d: usize, level: Level },
    /// Two children on the hyperplanes `{x1 = 0}` and `{x0 = 0}`, agreeing on
    /// the spine `{x0 = x1 = 0}`.
    Glue { d: usize, level: Level, left: Box<TruncationPlan>, right: Box<TruncationPlan> },
    /// A child whose designated hyperplane is fully removed, placed on
    /// `{x1 = 0}`, plus page `[1:1]` or all four pages other than `[1:0]`.
    PageFill { d: usize, all_pages: bool, child: Box<TruncationPlan> },
}

impl TruncationPlan {
    pub fn dim(&self) -> usize {
        match self {
            TruncationPlan::LineBase { .. } => 1,
            TruncationPlan::AffineBase { d, .. }
            | TruncationPlan::Glue { d, .. }
            | TruncationPlan::PageFill { d, .. } => *d,
        }
    }

    pub fn level(&self) -> Level {
        match self {
            TruncationPlan::LineBase { marked, .. } => marked.then_some(0),
            TruncationPlan::AffineBase { level, .. } | TruncationPlan::Glue { level, .. } => *level,
            TruncationPlan::PageFill { d, .. } => Some(d - 1),
        }
    }

    /// `|R| - [level]_4`, computed from the children.
    pub fn value(&self) -> usize {
        match self {
            TruncationPlan::LineBase { removed, .. } => *removed,
            TruncationPlan::AffineBase { d, .. } => pow4(*d),
            TruncationPlan::Glue { left, right, .. } => left.value() + right.value(),
            TruncationPlan::PageFill { d, all_pages, child } => {
                child.value() + if *all_pages { 3 * pow4(d - 1) } else { 0 }
            }
        }
    }

    /// Number of points removed.
    pub fn count(&self) -> usize {
        self.value() + level_size(self.level())
    }

    /// Checks the structural rules of every node.
    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Consistency(msg));
        match self {
            TruncationPlan::LineBase { marked, removed } => {
                let allowed: &[usize] = if *marked { &[0, 1, 3, 4] } else { &[0, 1, 2, 4] };
                if !allowed.contains(removed) {
                    return bad(format!("line base removing {removed} affine points is illegal"));
                }
            }
            TruncationPlan::AffineBase { d, level } => {
                if *d < 1 || level.is_some_and(|i| i >= *d) {
                    return bad(format!("affine base at d={d} with level {level:?}"));
                }
            }
            TruncationPlan::Glue { d, level, left, right } => {
                if *d < 2 || level.is_some_and(|i| i + 2 > *d) {
                    return bad(format!("glue at d={d} with level {level:?}"));
                }
                for c in [left, right] {
                    if c.dim() != d - 1 || c.level() != *level {
                        return bad(format!("glue child at d={} level {:?} under d={d} level {level:?}", c.dim(), c.level()));
                    }
                    c.check()?;
                }
            }
            TruncationPlan::PageFill { d, child, .. } => {
                if *d < 2 || child.dim() != d - 1 || child.level() != Some(d - 2) {
                    return bad(format!("page fill at d={d} over child d={} level {:?}", child.dim(), child.level()));
                }
                child.check()?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Derivation {
    LineBase,
    AffineBase,
    Glue(usize, usize),
    PageFill { all_pages: bool, child: usize },
}

/// Reachable values per `(d, level)` up to a bound, each with a derivation.
#[derive(Debug, Clone)]
pub struct ReachabilityTable {
    d_max: usize,
    bound: usize,
    entries: BTreeMap<(usize, Level), BTreeMap<usize, Derivation>>,
}

/// Levels at dimension `d`: `None` then `0..d`.
fn levels(d: usize) -> impl Iterator<Item = Level> {
    std::iter::once(None).chain((0..d).map(Some))
}

/// Closure of the base facts under gluing and page filling.
pub fn reachable_sets(d_max: usize, bound: usize) -> ReachabilityTable {
    let mut entries: BTreeMap<(usize, Level), BTreeMap<usize, Derivation>> = BTreeMap::new();
    for d in 1..=d_max {
        for level in levels(d) {
            let mut set = BTreeMap::new();
            if d == 1 {
                let base: &[usize] = if level.is_some() { &[0, 1, 3, 4] } else { &[0, 1, 2, 4] };
                for &s in base.iter().filter(|&&s| s <= bound) {
                    set.insert(s, Derivation::LineBase);
                }
            }
            if pow4(d) <= bound {
                set.entry(pow4(d)).or_insert(Derivation::AffineBase);
            }
            if d >= 2 && level.is_none_or(|i| i + 2 <= d) {
                let child: Vec<usize> = entries[&(d - 1, level)].keys().copied().collect();
                for &a in &child {
                    for &b in child.iter().take_while(|&&b| a + b <= bound) {
                        set.entry(a + b).or_insert(Derivation::Glue(a, b));
                    }
                }
            }
            if d >= 2 && level == Some(d - 1) {
                let child: Vec<usize> = entries[&(d - 1, Some(d - 2))].keys().copied().collect();
                for &c in &child {
                    set.entry(c).or_insert(Derivation::PageFill { all_pages: false, child: c });
                    let top = c + 3 * pow4(d - 1);
                    if top <= bound {
                        set.entry(top).or_insert(Derivation::PageFill { all_pages: true, child: c });
                    }
                }
            }
            entries.insert((d, level), set);
        }
    }
    ReachabilityTable { d_max, bound, entries }
}

impl ReachabilityTable {
    pub fn d_max(&self) -> usize {
        self.d_max
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    /// Reachable values at `(d, level)` in increasing order.
    pub fn values(&self, d: usize, level: Level) -> Vec<usize> {
        self.entries.get(&(d, level)).map(|m| m.keys().copied().collect()).unwrap_or_default()
    }

    pub fn contains(&self, d: usize, level: Level, value: usize) -> bool {
        self.entries.get(&(d, level)).is_some_and(|m| m.contains_key(&value))
    }

    /// Rebuilds the witness plan for a reachable value.
    pub fn plan(&self, d: usize, level: Level, value: usize) -> Option<TruncationPlan> {
        let how = *self.entries.get(&(d, level))?.get(&value)?;
        Some(match how {
            Derivation::LineBase => TruncationPlan::LineBase { marked: level.is_some(), removed: value },
            Derivation::AffineBase => TruncationPlan::AffineBase { d, level },
            Derivation::Glue(a, b) => TruncationPlan::Glue {
                d,
                level,
                left: Box::new(self.plan(d - 1, level, a)?),
                right: Box::new(self.plan(d - 1, level, b)?),
            },
            Derivation::PageFill { all_pages, child } => TruncationPlan::PageFill {
                d,
                all_pages,
                child: Box::new(self.plan(d - 1, Some(d - 2), child)?),
            },
        })
    }
}

pub const MAX_TRUNCATION_DIM: usize = 5;

/// The table up to dimension 5, built once.
pub fn standard_table() -> &'static ReachabilityTable {
    static TABLE: OnceLock<ReachabilityTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        reachable_sets(MAX_TRUNCATION_DIM, projective_points(MAX_TRUNCATION_DIM as i32, 4) as usize)
    })
}

/// A plan removing exactly `n` points of PG_d(4), for `n` in
/// `[0, [d-1]_4 + 1]`. Levels are tried in the order `0, None, 1, 2, ..`.
pub fn plan_truncation(d: usize, n: usize) -> Result<TruncationPlan> {
    if !(2..=MAX_TRUNCATION_DIM).contains(&d) {
        return Err(Error::OutOfRange(format!("truncation planner supports 2 <= d <= {MAX_TRUNCATION_DIM}, got {d}")));
    }
    let top = projective_points(d as i32 - 1, 4) as usize + 1;
    if n > top {
        return Err(Error::OutOfRange(format!("n = {n} exceeds [d-1]_4 + 1 = {top} for d = {d}")));
    }
    let table = standard_table();
    let order = std::iter::once(Some(0)).chain(std::iter::once(None)).chain((1..d).map(Some));
    for level in order {
        let Some(value) = n.checked_sub(level_size(level)) else { continue };
        if let Some(plan) = table.plan(d, level, value) {
            return Ok(plan);
        }
    }
    Err(Error::OutOfRange(format!("no truncation plan removes {n} points of PG_{d}(4)")))
}

struct Coords {
    f: FieldTable,
}

impl Coords {
    fn normalize(&self, mut x: Vec<u8>) -> Vec<u8> {
        let lead = *x.iter().find(|&&c| c != 0).expect("nonzero vector");
        let inv = self.f.inv(lead).expect("field element");
        for c in x.iter_mut() {
            *c = self.f.mul(*c, inv);
        }
        x
    }

    /// All vectors of length `len` over GF(4).
    fn all(len: usize) -> Vec<Vec<u8>> {
        (0..pow4(len)).map(|code| (0..len).rev().map(|k| ((code >> (2 * k)) & 3) as u8).collect()).collect()
    }

    /// Normalized points of `F_level` inside PG_d(4).
    fn flat(&self, d: usize, level: Level) -> Vec<Vec<u8>> {
        let Some(i) = level else { return Vec::new() };
        Self::all(i + 1)
            .into_iter()
            .filter(|tail| tail.iter().any(|&c| c != 0))
            .map(|tail| {
                let mut x = vec![0; d - i];
                x.extend(tail);
                self.normalize(x)
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Points with leading pair `[a:b]`, `a` in `{0,1}`, normalized.
    fn page(&self, d: usize, a: u8, b: u8) -> Vec<Vec<u8>> {
        Self::all(d - 1)
            .into_iter()
            .map(|tail| {
                let mut x = vec![a, b];
                x.extend(tail);
                x
            })
            .collect()
    }

    /// `x -> (x0 + x1, x1, x2, ..)`, which sends `{x0 = x1}` onto `{x0 = 0}`.
    fn shear(&self, set: BTreeSet<Vec<u8>>) -> BTreeSet<Vec<u8>> {
        set.into_iter()
            .map(|mut x| {
                x[0] = self.f.add(x[0], x[1]);
                self.normalize(x)
            })
            .collect()
    }

    fn realize(&self, plan: &TruncationPlan, sheared: bool) -> BTreeSet<Vec<u8>> {
        match plan {
            TruncationPlan::LineBase { marked, removed } => {
                let mut set: BTreeSet<Vec<u8>> = (0..*removed as u8).map(|a| vec![1, a]).collect();
                if *marked {
                    set.insert(vec![0, 1]);
                }
                set
            }
            TruncationPlan::AffineBase { d, level } => {
                let mut set: BTreeSet<Vec<u8>> = Self::all(*d)
                    .into_iter()
                    .map(|tail| {
                        let mut x = vec![1];
                        x.extend(tail);
                        x
                    })
                    .collect();
                set.extend(self.flat(*d, *level));
                set
            }
            TruncationPlan::Glue { left, right, .. } => {
                let mut set = embed_first(self.realize(left, true));
                set.extend(embed_second(self.realize(right, true)));
                if sheared {
                    self.shear(set)
                } else {
                    set
                }
            }
            TruncationPlan::PageFill { d, all_pages, child } => {
                let mut set = embed_first(self.realize(child, true));
                set.extend(self.page(*d, 1, 1));
                if *all_pages {
                    set.extend(self.page(*d, 0, 1));
                    set.extend(self.page(*d, 1, 2));
                    set.extend(self.page(*d, 1, 3));
                }
                if sheared {
                    self.shear(set)
                } else {
                    set
                }
            }
        }
    }
}

/// `y -> (y0, 0, y1, ..)`: onto the hyperplane `{x1 = 0}`.
fn embed_first(set: BTreeSet<Vec<u8>>) -> BTreeSet<Vec<u8>> {
    set.into_iter()
        .map(|y| {
            let mut x = vec![y[0], 0];
            x.extend_from_slice(&y[1..]);
            x
        })
        .collect()
}

/// `y -> (0, y0, y1, ..)`: onto the hyperplane `{x0 = 0}`.
fn embed_second(set: BTreeSet<Vec<u8>>) -> BTreeSet<Vec<u8>> {
    set.into_iter()
        .map(|y| {
            let mut x = vec![0];
            x.extend(y);
            x
        })
        .collect()
}

fn realize_in(space: &ProjectiveSpace, plan: &TruncationPlan, sheared: bool) -> Result<Vec<usize>> {
    if plan.dim() != space.dim() {
        return Err(Error::Consistency(format!("plan for d={} used at d={}", plan.dim(), space.dim())));
    }
    plan.check()?;
    let coords = Coords { f: FieldTable::new(4)? };
    let mut out: Vec<usize> = coords
        .realize(plan, sheared)
        .iter()
        .map(|x| space.index_of(x).ok_or_else(|| Error::Consistency(format!("{x:?} is not a point"))))
        .collect::<Result<_>>()?;
    out.sort_unstable();
    if out.len() != plan.count() {
        return Err(Error::Consistency(format!("plan claims {} points, realized {}", plan.count(), out.len())));
    }
    Ok(out)
}

/// Point indices of PG_d(4) removed by `plan`.
pub fn realize_plan(plan: &TruncationPlan, d: usize) -> Result<Vec<usize>> {
    realize_in(&ProjectiveSpace::new(d, 4)?, plan, true)
}

/// The points removed by the top node before the final change of
/// coordinates, so the spine and pages of the canonical decomposition are the
/// ones the gluing used.
pub fn realize_unsheared(plan: &TruncationPlan, space: &ProjectiveSpace) -> Result<Vec<usize>> {
    realize_in(space, plan, false)
}

/// PG_d(4) with `n` points legally removed.
pub fn truncate_projective(d: usize, n: usize) -> Result<(IncidenceDesign, Certificate)> {
    let plan = plan_truncation(d, n)?;
    let space = ProjectiveSpace::new(d, 4)?;
    let removed = realize_in(&space, &plan, true)?;
    let keep: Vec<usize> = (0..space.point_count()).filter(|x| removed.binary_search(x).is_err()).collect();
    let design = space.design().truncate(&keep)?;
    if let Some(b) = design.blocks().iter().find(|b| b.len() == 2) {
        return Err(Error::Consistency(format!("truncation left the 2-line {b:?}")));
    }
    verify_pbd(&design, &[3, 4, 5]).into_result()?;
    let cert = Certificate::new(Route::Truncate, Some(d), 21)
        .with("n", n)
        .with("plan", serde_json::to_value(&plan).expect("plan serializes"));
    Ok((design, cert))
}
