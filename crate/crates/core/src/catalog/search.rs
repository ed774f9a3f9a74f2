//! Backtracking search for small GDDs, used as an independent oracle for the
//! catalog recipes.
//!
//! The problem is an exact cover of the cross-group pairs by blocks. At each
//! node the uncovered pair with the fewest candidate blocks is branched on,
//! so a pair that can no longer be covered ends the branch at once.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use thiserror::Error;

use super::GddTemplate;
use crate::design::{verify_gdd, GroupedDesign, TypeMultiset};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpec {
    pub ty: TypeMultiset,
    pub k: Vec<usize>,
    /// Maximum number of search nodes.
    pub budget: u64,
    /// Zero keeps the natural candidate order; other values shuffle blocks
    /// of equal size.
    pub seed: u64,
    /// At most this many blocks of the smallest usable size.
    pub small_cap: Option<usize>,
}

impl SearchSpec {
    pub fn new(ty: TypeMultiset, k: &[usize]) -> Self {
        SearchSpec { ty, k: k.to_vec(), budget: 2_000_000, seed: 0, small_cap: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NotFound {
    #[error("no design of this type can exist: {0}")]
    Infeasible(String),
    #[error("search space exhausted after {nodes} nodes; no design exists")]
    Exhausted { nodes: u64 },
    #[error("no design within the small-block cap after {nodes} nodes")]
    CapExhausted { nodes: u64 },
    #[error("node budget exhausted after {nodes} nodes")]
    BudgetExhausted { nodes: u64 },
}

/// Which residues `r` are sums of values `k - 1`, `k` in `sizes`.
fn representable(limit: usize, sizes: &[usize]) -> Vec<bool> {
    let mut rep = vec![false; limit + 1];
    rep[0] = true;
    for r in 1..=limit {
        rep[r] = sizes.iter().any(|&k| k >= 2 && r >= k - 1 && rep[r - (k - 1)]);
    }
    rep
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Counting conditions every GDD of the given type must satisfy.
///
/// A block meets each group at most once, so block sizes above the number of
/// groups are useless. The cross pairs must be a sum of `C(k,2)` values, and
/// the cross degree `v - g` of a point in a group of size `g` a sum of `k - 1`
/// values.
pub fn preflight(ty: &TypeMultiset, k: &[usize]) -> Result<Vec<usize>, NotFound> {
    let u = ty.group_count();
    let usable: Vec<usize> = k.iter().copied().filter(|&s| s >= 2 && s <= u).collect();
    let pairs = ty.cross_pairs();
    if pairs == 0 {
        return Ok(usable);
    }
    if usable.is_empty() {
        return Err(NotFound::Infeasible(format!("{u} groups admit no block size in {k:?}")));
    }
    let pair_gcd = usable.iter().fold(0, |acc, &s| gcd(acc, s * (s - 1) / 2));
    if !pairs.is_multiple_of(pair_gcd) {
        return Err(NotFound::Infeasible(format!(
            "{pairs} cross pairs are not a multiple of {pair_gcd}, the gcd of pairs per usable block {usable:?}"
        )));
    }
    let v = ty.total_points();
    let rep = representable(v, &usable);
    for &(g, _) in ty.entries() {
        if !rep[v - g] {
            return Err(NotFound::Infeasible(format!(
                "a point in a group of size {g} has cross degree {} not a sum of block degrees from {usable:?}",
                v - g
            )));
        }
    }
    Ok(usable)
}

struct Search {
    v: usize,
    group_of: Vec<usize>,
    sizes: Vec<usize>,
    rep: Vec<bool>,
    covered: Vec<bool>,
    degree: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    nodes: u64,
    budget: u64,
    rng: Option<SplitMix64>,
    small_size: usize,
    small_left: Option<usize>,
}

enum Step {
    Found,
    Dead,
    OutOfBudget,
}

impl Search {
    fn candidates(&self, a: usize, b: usize) -> Vec<Vec<usize>> {
        let v = self.v;
        let max = *self.sizes.iter().max().unwrap_or(&0);
        let ext: Vec<usize> = (0..v)
            .filter(|&c| {
                c != a
                    && c != b
                    && self.group_of[c] != self.group_of[a]
                    && self.group_of[c] != self.group_of[b]
                    && !self.covered[a * v + c]
                    && !self.covered[b * v + c]
            })
            .collect();
        let mut out = Vec::new();
        let mut cur = vec![a, b];
        self.extend(&ext, 0, &mut cur, max, &mut out);
        out.retain(|block| self.fits(block) && (self.small_left != Some(0) || block.len() != self.small_size));
        for block in &mut out {
            block.sort_unstable();
        }
        out.sort_by(|x, y| y.len().cmp(&x.len()).then_with(|| x.cmp(y)));
        out
    }

    /// Whether every point of `block` keeps a representable residual degree.
    fn fits(&self, block: &[usize]) -> bool {
        let d = block.len() - 1;
        block.iter().all(|&x| self.degree[x] >= d && self.rep[self.degree[x] - d])
    }

    /// Candidates for the uncovered pair with the fewest of them, or `None`
    /// when every pair is covered.
    fn most_constrained(&self) -> Option<Vec<Vec<usize>>> {
        let v = self.v;
        let mut best: Option<Vec<Vec<usize>>> = None;
        for a in (0..v).filter(|&a| self.degree[a] > 0) {
            for b in a + 1..v {
                if self.group_of[a] == self.group_of[b] || self.covered[a * v + b] {
                    continue;
                }
                let cands = self.candidates(a, b);
                if best.as_ref().is_none_or(|cur| cands.len() < cur.len()) {
                    let stop = cands.len() <= 1;
                    best = Some(cands);
                    if stop {
                        return best;
                    }
                }
            }
        }
        best
    }

    fn extend(&self, ext: &[usize], start: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if self.sizes.contains(&cur.len()) {
            out.push(cur.clone());
        }
        if cur.len() == max {
            return;
        }
        for i in start..ext.len() {
            let c = ext[i];
            let ok = cur[2..]
                .iter()
                .all(|&y| self.group_of[y] != self.group_of[c] && !self.covered[y * self.v + c]);
            if ok {
                cur.push(c);
                self.extend(ext, i + 1, cur, max, out);
                cur.pop();
            }
        }
    }

    fn mark(&mut self, block: &[usize], on: bool) {
        let v = self.v;
        for (i, &x) in block.iter().enumerate() {
            for &y in &block[i + 1..] {
                self.covered[x * v + y] = on;
                self.covered[y * v + x] = on;
            }
            let d = block.len() - 1;
            if on {
                self.degree[x] -= d;
            } else {
                self.degree[x] += d;
            }
        }
    }

    fn run(&mut self) -> Step {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Step::OutOfBudget;
        }
        let Some(mut cands) = self.most_constrained() else {
            return Step::Found;
        };
        if let Some(rng) = self.rng.as_mut() {
            for run in cands.chunk_by_mut(|x, y| x.len() == y.len()) {
                run.shuffle(rng);
            }
        }
        for block in cands {
            self.mark(&block, true);
            let small = block.len() == self.small_size;
            if small {
                self.small_left = self.small_left.map(|n| n - 1);
            }
            self.blocks.push(block.clone());
            match self.run() {
                Step::Dead => {
                    self.blocks.pop();
                }
                other => return other,
            }
            if small {
                self.small_left = self.small_left.map(|n| n + 1);
            }
            self.mark(&block, false);
        }
        Step::Dead
    }
}

/// Searches for a GDD of the requested type with block sizes in `spec.k`.
///
/// Groups are numbered by decreasing size, points consecutively within groups.
pub fn search_design(spec: &SearchSpec) -> Result<GddTemplate, NotFound> {
    let sizes = preflight(&spec.ty, &spec.k)?;
    let sizes_min = sizes.iter().copied().min().unwrap_or(0);
    let v = spec.ty.total_points();
    let mut groups = Vec::new();
    let mut group_of = vec![0; v];
    let mut next = 0;
    for (i, g) in spec.ty.sizes().into_iter().enumerate() {
        groups.push((next..next + g).collect::<Vec<_>>());
        for x in next..next + g {
            group_of[x] = i;
        }
        next += g;
    }
    let degree = (0..v).map(|x| v - groups[group_of[x]].len()).collect();
    let mut search = Search {
        v,
        group_of,
        rep: representable(v, &sizes),
        sizes,
        covered: vec![false; v * v],
        degree,
        blocks: Vec::new(),
        nodes: 0,
        budget: spec.budget,
        rng: (spec.seed != 0).then(|| SplitMix64::seed_from_u64(spec.seed)),
        small_size: sizes_min,
        small_left: spec.small_cap,
    };
    match search.run() {
        Step::Found => {
            let design = GroupedDesign::new(v, groups, search.blocks).expect("search keeps indices in range");
            debug_assert!(verify_gdd(&design, &spec.k).passed);
            Ok(GddTemplate::new(spec.ty.clone(), spec.k.clone(), design, "search".into()))
        }
        Step::Dead if spec.small_cap.is_some() => Err(NotFound::CapExhausted { nodes: search.nodes }),
        Step::Dead => Err(NotFound::Exhausted { nodes: search.nodes }),
        Step::OutOfBudget => Err(NotFound::BudgetExhausted { nodes: search.nodes }),
    }
}

/// Searches with a growing cap on the number of smallest blocks, then
/// uncapped, restarting each stage with `attempts` seeds.
///
/// Designs assembled mostly from large blocks are found far sooner when the
/// search cannot wander into covers by small blocks.
pub fn search_capped(ty: &TypeMultiset, k: &[usize], budget: u64, attempts: u64) -> Result<GddTemplate, NotFound> {
    let mut last = NotFound::BudgetExhausted { nodes: 0 };
    for small_cap in [Some(0), Some(1), Some(2), Some(3), Some(4), Some(6), Some(8), None] {
        for seed in 0..attempts {
            let spec = SearchSpec { ty: ty.clone(), k: k.to_vec(), budget, seed, small_cap };
            match search_design(&spec) {
                Err(NotFound::CapExhausted { nodes }) => {
                    last = NotFound::CapExhausted { nodes };
                    break;
                }
                Err(NotFound::BudgetExhausted { nodes }) => last = NotFound::BudgetExhausted { nodes },
                other => return other,
            }
        }
    }
    Err(last)
}
