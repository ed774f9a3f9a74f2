//! Projective and affine spaces over small fields, with lines as blocks.
//!
//! Points are listed in lexicographic order of their coordinates. Projective
//! points use homogeneous coordinates normalized so the first nonzero entry is 1.

use serde::{Deserialize, Serialize};

use crate::design::IncidenceDesign;
use crate::error::{Error, Result};
use crate::field::FieldTable;

/// Largest geometry built unless a caller raises the ceiling; `[5]_4 = 1365`.
pub const DEFAULT_POINT_CEILING: u64 = 1365;

/// `[d]_q = 1 + q + ... + q^d`, the number of points of PG_d(q). `[-1]_q = 0`.
pub fn projective_points(d: i32, q: u64) -> u64 {
    if d < 0 {
        return 0;
    }
    (0..=d as u32).map(|i| q.pow(i)).sum()
}

/// A projective point in normalized homogeneous coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectivePoint(Vec<u8>);

impl ProjectivePoint {
    /// Normalizes `coords` so that its first nonzero entry is 1.
    pub fn new(field: &FieldTable, mut coords: Vec<u8>) -> Result<Self> {
        let lead = coords
            .iter()
            .copied()
            .find(|&c| c != 0)
            .ok_or_else(|| Error::InvalidDesign("zero vector is not a projective point".into()))?;
        let scale = field.inv(lead).expect("nonzero");
        for c in coords.iter_mut() {
            *c = field.mul(*c, scale);
        }
        Ok(ProjectivePoint(coords))
    }

    pub fn coords(&self) -> &[u8] {
        &self.0
    }
}

fn encode(coords: &[u8], q: usize) -> usize {
    coords.iter().fold(0, |acc, &c| acc * q + c as usize)
}

fn decode(mut code: usize, len: usize, q: usize) -> Vec<u8> {
    let mut v = vec![0u8; len];
    for slot in v.iter_mut().rev() {
        *slot = (code % q) as u8;
        code /= q;
    }
    v
}

/// Lines from a point list: for each uncovered pair `(i, j)` in lexicographic
/// order, `line(i, j)` returns the full line. The result is sorted.
fn collect_lines(v: usize, mut line: impl FnMut(usize, usize) -> Vec<usize>) -> Vec<Vec<usize>> {
    let mut covered = vec![false; v * v];
    let mut lines = Vec::new();
    for i in 0..v {
        for j in i + 1..v {
            if covered[i * v + j] {
                continue;
            }
            let mut l = line(i, j);
            l.sort_unstable();
            for (a, &x) in l.iter().enumerate() {
                for &y in &l[a + 1..] {
                    covered[x * v + y] = true;
                }
            }
            lines.push(l);
        }
    }
    lines
}

/// PG_d(q) with coordinate lookup.
#[derive(Debug, Clone)]
pub struct ProjectiveSpace {
    field: FieldTable,
    dim: usize,
    points: Vec<ProjectivePoint>,
    index: Vec<u32>,
    lines: Vec<Vec<usize>>,
}

impl ProjectiveSpace {
    pub fn new(d: usize, q: u32) -> Result<Self> {
        Self::with_ceiling(d, q, DEFAULT_POINT_CEILING)
    }

    pub fn with_ceiling(d: usize, q: u32, ceiling: u64) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidDimension(format!("projective dimension must be >= 1, got {d}")));
        }
        let field = FieldTable::new(q)?;
        let count = projective_points(d as i32, q as u64);
        if count > ceiling {
            return Err(Error::GeometryTooLarge { points: count, ceiling });
        }
        let qs = q as usize;
        let total = qs.pow(d as u32 + 1);
        let mut index = vec![u32::MAX; total];
        let mut points = Vec::with_capacity(count as usize);
        for code in 0..total {
            let coords = decode(code, d + 1, qs);
            if coords.iter().find(|&&c| c != 0) == Some(&1) {
                index[code] = points.len() as u32;
                points.push(ProjectivePoint(coords));
            }
        }
        let mut space = ProjectiveSpace { field, dim: d, points, index, lines: Vec::new() };
        let v = space.points.len();
        let lines = collect_lines(v, |i, j| space.line_through(i, j));
        space.lines = lines;
        Ok(space)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> &FieldTable {
        &self.field
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[ProjectivePoint] {
        &self.points
    }

    pub fn lines(&self) -> &[Vec<usize>] {
        &self.lines
    }

    /// Index of the point with the given (not necessarily normalized) coordinates.
    pub fn index_of(&self, coords: &[u8]) -> Option<usize> {
        if coords.len() != self.dim + 1 {
            return None;
        }
        let p = ProjectivePoint::new(&self.field, coords.to_vec()).ok()?;
        let i = self.index[encode(p.coords(), self.field.order() as usize)];
        (i != u32::MAX).then_some(i as usize)
    }

    /// The `q + 1` points of the line through two distinct points.
    pub fn line_through(&self, a: usize, b: usize) -> Vec<usize> {
        let f = &self.field;
        let (pa, pb) = (self.points[a].coords(), self.points[b].coords());
        let mut out = vec![a];
        for c in f.elements() {
            let w: Vec<u8> = pb.iter().zip(pa).map(|(&y, &x)| f.add(y, f.mul(c, x))).collect();
            out.push(self.index_of(&w).expect("nonzero combination"));
        }
        out
    }

    pub fn design(&self) -> IncidenceDesign {
        IncidenceDesign::new(self.points.len(), self.lines.clone())
            .expect("projective lines are valid blocks")
            .with_labels(self.points.iter().map(|p| p.0.clone()).collect())
            .expect("one label per point")
    }
}

/// PG_d(q) as a PBD whose blocks are its lines.
pub fn build_projective_space(d: usize, q: u32) -> Result<IncidenceDesign> {
    Ok(ProjectiveSpace::new(d, q)?.design())
}

/// AG_d(q) as a PBD whose blocks are its lines.
pub fn build_affine_space(d: usize, q: u32) -> Result<IncidenceDesign> {
    build_affine_space_with_ceiling(d, q, DEFAULT_POINT_CEILING)
}

pub fn build_affine_space_with_ceiling(d: usize, q: u32, ceiling: u64) -> Result<IncidenceDesign> {
    if d < 1 {
        return Err(Error::InvalidDimension(format!("affine dimension must be >= 1, got {d}")));
    }
    let field = FieldTable::new(q)?;
    let count = (q as u64).pow(d as u32);
    if count > ceiling {
        return Err(Error::GeometryTooLarge { points: count, ceiling });
    }
    let qs = q as usize;
    let v = count as usize;
    let points: Vec<Vec<u8>> = (0..v).map(|code| decode(code, d, qs)).collect();
    let lines = collect_lines(v, |i, j| {
        let dir: Vec<u8> = points[j].iter().zip(&points[i]).map(|(&y, &x)| field.sub(y, x)).collect();
        field
            .elements()
            .map(|t| {
                let p: Vec<u8> = points[i].iter().zip(&dir).map(|(&x, &u)| field.add(x, field.mul(t, u))).collect();
                encode(&p, qs)
            })
            .collect()
    });
    IncidenceDesign::new(v, lines)?.with_labels(points)
}

/// The spine `{x0 = x1 = 0}` of PG_d(4) and the five pages around it.
///
/// Page `k` holds the points whose leading pair `[x0:x1]` is the `k`-th point
/// of PG_1(4) in canonical order: `[0:1], [1:0], [1:1], [1:2], [1:3]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinePageDecomposition {
    pub spine: Vec<usize>,
    pub pages: [Vec<usize>; 5],
}

/// Page index for a normalized PG_d(4) coordinate vector, `None` on the spine.
pub fn page_of_coords(coords: &[u8]) -> Option<usize> {
    match (coords[0], coords[1]) {
        (0, 0) => None,
        (0, _) => Some(0),
        (_, x1) => Some(1 + x1 as usize),
    }
}

pub fn spine_page_decomposition(d: usize) -> Result<SpinePageDecomposition> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("spine/page decomposition needs d >= 2, got {d}")));
    }
    let space = ProjectiveSpace::new(d, 4)?;
    Ok(decompose(&space))
}

pub fn decompose(space: &ProjectiveSpace) -> SpinePageDecomposition {
    let mut spine = Vec::new();
    let mut pages: [Vec<usize>; 5] = Default::default();
    for (i, p) in space.points().iter().enumerate() {
        match page_of_coords(p.coords()) {
            None => spine.push(i),
            Some(k) => pages[k].push(i),
        }
    }
    SpinePageDecomposition { spine, pages }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LineClass {
    /// Four points in one page and one on the spine.
    A,
    /// Entirely inside the spine.
    B,
    /// One point in each page.
    C,
}

pub fn classify_line(block: &[usize], decomp: &SpinePageDecomposition) -> Result<LineClass> {
    let mut on_spine = 0;
    let mut per_page = [0usize; 5];
    for &x in block {
        if decomp.spine.binary_search(&x).is_ok() {
            on_spine += 1;
            continue;
        }
        let k = decomp
            .pages
            .iter()
            .position(|p| p.binary_search(&x).is_ok())
            .ok_or_else(|| Error::Consistency(format!("point {x} is in neither spine nor pages")))?;
        per_page[k] += 1;
    }
    let max_page = per_page.iter().copied().max().unwrap_or(0);
    match (block.len(), on_spine, max_page) {
        (5, 1, 4) => Ok(LineClass::A),
        (5, 5, 0) => Ok(LineClass::B),
        (5, 0, 1) => Ok(LineClass::C),
        _ => Err(Error::Consistency(format!(
            "line {block:?} fits no class: {on_spine} spine points, page counts {per_page:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::verify_pbd;

    #[test]
    fn bracket_counts() {
        assert_eq!(projective_points(-1, 4), 0);
        assert_eq!(projective_points(0, 4), 1);
        assert_eq!(projective_points(2, 4), 21);
        assert_eq!(projective_points(5, 4), 1365);
        assert_eq!(projective_points(3, 2), 15);
    }

    #[test]
    fn projective_examples() {
        let pg24 = build_projective_space(2, 4).unwrap();
        assert_eq!((pg24.v(), pg24.blocks().len()), (21, 21));
        assert!(pg24.blocks().iter().all(|b| b.len() == 5));
        let pg32 = build_projective_space(3, 2).unwrap();
        assert_eq!((pg32.v(), pg32.blocks().len()), (15, 35));
        let pg14 = build_projective_space(1, 4).unwrap();
        assert_eq!((pg14.v(), pg14.blocks().len()), (5, 1));
    }

    #[test]
    fn affine_examples() {
        let ag23 = build_affine_space(2, 3).unwrap();
        assert_eq!((ag23.v(), ag23.blocks().len()), (9, 12));
        assert!(ag23.blocks().iter().all(|b| b.len() == 3));
        assert_eq!(build_affine_space(4, 3).unwrap().v(), 81);
        let ag14 = build_affine_space(1, 4).unwrap();
        assert_eq!((ag14.v(), ag14.blocks().len()), (4, 1));
    }

    #[test]
    fn line_counts_and_balance() {
        for (d, q) in [(1, 2), (2, 2), (3, 2), (2, 3), (3, 3), (2, 4), (3, 4), (2, 5), (2, 7), (2, 8)] {
            let n = projective_points(d as i32, q as u64);
            let pg = build_projective_space(d, q).unwrap();
            assert_eq!(pg.v() as u64, n);
            assert_eq!(pg.blocks().len() as u64, n * (n - 1) / (q as u64 * (q as u64 + 1)));
            assert!(verify_pbd(&pg, &[q as usize + 1]).passed, "PG_{d}({q})");
            let m = (q as u64).pow(d as u32);
            let ag = build_affine_space(d, q).unwrap();
            assert_eq!(ag.blocks().len() as u64, m * (m - 1) / (q as u64 * (q as u64 - 1)));
            assert!(verify_pbd(&ag, &[q as usize]).passed, "AG_{d}({q})");
        }
    }

    #[test]
    fn points_are_normalized_and_sorted() {
        let space = ProjectiveSpace::new(3, 4).unwrap();
        let pts = space.points();
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(pts.iter().all(|p| p.coords().iter().find(|&&c| c != 0) == Some(&1)));
        assert_eq!(space.index_of(&[0, 2, 0, 2]), space.index_of(&[0, 1, 0, 1]));
    }

    #[test]
    fn ceiling_is_enforced() {
        assert!(matches!(ProjectiveSpace::new(6, 4), Err(Error::GeometryTooLarge { .. })));
        assert!(ProjectiveSpace::with_ceiling(2, 4, 20).is_err());
        assert!(matches!(build_projective_space(0, 4), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn builders_are_deterministic() {
        assert_eq!(build_projective_space(3, 3).unwrap(), build_projective_space(3, 3).unwrap());
        assert_eq!(build_affine_space(3, 4).unwrap(), build_affine_space(3, 4).unwrap());
    }

    #[test]
    fn decomposition_sizes() {
        for (d, spine, page) in [(2, 1, 4), (3, 5, 16), (4, 21, 64)] {
            let dec = spine_page_decomposition(d).unwrap();
            assert_eq!(dec.spine.len(), spine);
            assert!(dec.pages.iter().all(|p| p.len() == page));
            let total: usize = dec.spine.len() + dec.pages.iter().map(Vec::len).sum::<usize>();
            assert_eq!(total as u64, projective_points(d as i32, 4));
        }
        assert!(spine_page_decomposition(1).is_err());
    }

    #[test]
    fn classification_is_total() {
        for d in 2..=4 {
            let space = ProjectiveSpace::new(d, 4).unwrap();
            let dec = decompose(&space);
            let mut counts = std::collections::HashMap::new();
            for line in space.lines() {
                *counts.entry(classify_line(line, &dec).unwrap()).or_insert(0) += 1;
            }
            // the spine of PG_d(4) is a PG_{d-2}(4)
            let s = projective_points(d as i32 - 2, 4);
            let expected_b = s * (s - 1) / 20;
            assert_eq!(counts.get(&LineClass::B).copied().unwrap_or(0) as u64, expected_b);
            if d == 3 {
                assert_eq!(space.lines().len(), 357);
                assert_eq!(counts[&LineClass::B], 1);
                assert!(counts[&LineClass::C] > 0);
            }
        }
    }

    #[test]
    fn each_page_with_spine_is_a_hyperplane() {
        let space = ProjectiveSpace::new(3, 4).unwrap();
        let dec = decompose(&space);
        for page in &dec.pages {
            let mut hyper: Vec<usize> = page.iter().chain(&dec.spine).copied().collect();
            hyper.sort_unstable();
            let inside = space
                .lines()
                .iter()
                .filter(|l| l.iter().all(|x| hyper.binary_search(x).is_ok()))
                .count();
            // PG_2(4) has 21 lines
            assert_eq!(inside, 21);
        }
    }

    #[test]
    fn class_a_through_spine_point_in_plane() {
        let space = ProjectiveSpace::new(2, 4).unwrap();
        let dec = decompose(&space);
        let s = dec.spine[0];
        for l in space.lines().iter().filter(|l| l.contains(&s)) {
            assert_eq!(classify_line(l, &dec).unwrap(), LineClass::A);
        }
    }
}
