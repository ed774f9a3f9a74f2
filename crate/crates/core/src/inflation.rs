//! Weighted inflations of projective spaces over GF(4) and the top-level
//! dispatch that picks a route for each `v`.

use std::collections::BTreeMap;

use crate::catalog::Catalog;
use crate::certificate::{Certificate, Route};
use crate::compose::{fill_groups, fundamental_construction, WeightAssignment};
use crate::design::{verify_pbd, IncidenceDesign};
use crate::error::{Error, Result};
use crate::geometry::{build_affine_space, projective_points, ProjectiveSpace};
use crate::truncation::truncate_projective;

pub const FLAT_BOUND_WEIGHT3: usize = 63;
pub const FLAT_BOUND_HEAVY: usize = 94;
pub const FLAT_BOUND_FALLBACK: usize = 65;

/// `[d]_4 = 1 + 4 + .. + 4^d`.
pub fn gauss4(d: usize) -> usize {
    projective_points(d as i32, 4) as usize
}

fn block_filler(g: usize) -> IncidenceDesign {
    IncidenceDesign::new(g, vec![(0..g).collect()]).expect("single block")
}

/// Applies `weights` to PG_d(4) with catalog ingredients, then closes every
/// group of size 3 to 5 with a single block.
fn inflate(catalog: &Catalog, space: &ProjectiveSpace, weights: &WeightAssignment) -> Result<IncidenceDesign> {
    let master = space.design().as_grouped();
    let (gdd, _) = fundamental_construction(&master, weights, |ty| {
        catalog.get_ingredient(ty, &[3, 4, 5]).map(|t| t.design().clone())
    })?;
    let fillers: BTreeMap<usize, IncidenceDesign> = (3..=5).map(|g| (g, block_filler(g))).collect();
    let design = fill_groups(&gdd, &fillers, false)?;
    verify_pbd(&design, &[3, 4, 5]).into_result()?;
    Ok(design)
}

/// Weight 3 on the first `t` points of PG_d(4), 1 elsewhere.
pub fn inflate_odd_with(catalog: &Catalog, d: usize, t: usize) -> Result<(IncidenceDesign, Certificate)> {
    let space = ProjectiveSpace::new(d, 4)?;
    let n = space.point_count();
    if t > n {
        return Err(Error::OutOfRange(format!("cannot triple {t} of {n} points")));
    }
    let weights = WeightAssignment::new((0..n).map(|x| if x < t { 3 } else { 1 }).collect());
    let design = inflate(catalog, &space, &weights)?;
    let cert = Certificate::new(Route::InflateOdd, Some(d), FLAT_BOUND_WEIGHT3)
        .with("t", t)
        .with("weights", weights.digest());
    Ok((design, cert))
}

pub fn inflate_odd(d: usize, t: usize) -> Result<(IncidenceDesign, Certificate)> {
    inflate_odd_with(Catalog::embedded()?, d, t)
}

/// Splits `t = 4a + 3b` with `b < 4`. Counts 1, 2 and 5 have no split.
pub fn even_split(t: usize) -> Option<(usize, usize)> {
    let b = (4 - t % 4) % 4;
    (t >= 3 * b).then(|| ((t - 3 * b) / 4, b))
}

/// Point 0 of PG_d(4) deleted; `t` points tripled along the punctured lines
/// through it, each of which gets 0, 3 or 4 tripled points.
pub fn inflate_even_with(catalog: &Catalog, d: usize, t: usize) -> Result<(IncidenceDesign, Certificate)> {
    let space = ProjectiveSpace::new(d, 4)?;
    let lines: Vec<Vec<usize>> = space
        .lines()
        .iter()
        .filter(|l| l.contains(&0))
        .map(|l| l.iter().copied().filter(|&x| x != 0).collect())
        .collect();
    if t > 4 * lines.len() {
        return Err(Error::OutOfRange(format!("cannot triple {t} points on {} punctured lines", lines.len())));
    }
    let (a, b) = even_split(t).ok_or_else(|| Error::Unreachable(format!("no split of {t} into 4s and 3s")))?;
    let mut weights = vec![1; space.point_count()];
    weights[0] = 0;
    for (i, line) in lines.iter().enumerate() {
        let c = if i < a {
            4
        } else if i < a + b {
            3
        } else {
            0
        };
        for &x in &line[..c] {
            weights[x] = 3;
        }
    }
    for line in &lines {
        let c = line.iter().filter(|&&x| weights[x] == 3).count();
        if ![0, 3, 4].contains(&c) {
            return Err(Error::Consistency(format!("punctured line {line:?} has {c} tripled points")));
        }
    }
    let weights = WeightAssignment::new(weights);
    let design = inflate(catalog, &space, &weights)?;
    let cert = Certificate::new(Route::InflateEven, Some(d), FLAT_BOUND_WEIGHT3)
        .with("t", t)
        .with("fours", a)
        .with("threes", b)
        .with("deleted_point", 0)
        .with("weights", weights.digest());
    Ok((design, cert))
}

pub fn inflate_even(d: usize, t: usize) -> Result<(IncidenceDesign, Certificate)> {
    inflate_even_with(Catalog::embedded()?, d, t)
}

/// Weight 5 on the first `w` points of PG_(d-1)(4), 4 elsewhere.
pub fn inflate_heavy_with(catalog: &Catalog, d: usize, w: usize) -> Result<(IncidenceDesign, Certificate)> {
    if ![2, 4, 10].contains(&w) {
        return Err(Error::OutOfRange(format!("weight-5 count must be 2, 4 or 10, got {w}")));
    }
    if d < 2 {
        return Err(Error::InvalidDimension(format!("inflate_heavy needs d >= 2, got {d}")));
    }
    let space = ProjectiveSpace::new(d - 1, 4)?;
    let n = space.point_count();
    if w > n {
        return Err(Error::OutOfRange(format!("PG_{}(4) has only {n} points for weight 5 on {w}", d - 1)));
    }
    let weights = WeightAssignment::new((0..n).map(|x| if x < w { 5 } else { 4 }).collect());
    let design = inflate(catalog, &space, &weights)?;
    let cert = Certificate::new(Route::InflateHeavy, Some(d), FLAT_BOUND_HEAVY)
        .with("w", w)
        .with("weights", weights.digest());
    Ok((design, cert))
}

pub fn inflate_heavy(d: usize, w: usize) -> Result<(IncidenceDesign, Certificate)> {
    inflate_heavy_with(Catalog::embedded()?, d, w)
}

/// Point `p = 0` deleted, weight 4 on `q1 = 1` and on the first point `q2`
/// off the line through `p` and `q1`, weight 3 elsewhere.
pub fn fallback_even_top_with(catalog: &Catalog, d: usize) -> Result<(IncidenceDesign, Certificate)> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("fallback_even_top needs d >= 2, got {d}")));
    }
    let space = ProjectiveSpace::new(d, 4)?;
    let line = space.line_through(0, 1);
    let q2 = (2..space.point_count()).find(|x| !line.contains(x)).expect("a plane has points off a line");
    let mut weights = vec![3; space.point_count()];
    weights[0] = 0;
    weights[1] = 4;
    weights[q2] = 4;
    let weights = WeightAssignment::new(weights);
    let design = inflate(catalog, &space, &weights)?;
    let cert = Certificate::new(Route::FallbackEvenTop, Some(d), FLAT_BOUND_FALLBACK)
        .with("deleted_point", 0)
        .with("q1", 1)
        .with("q2", q2)
        .with("weights", weights.digest());
    Ok((design, cert))
}

pub fn fallback_even_top(d: usize) -> Result<(IncidenceDesign, Certificate)> {
    fallback_even_top_with(Catalog::embedded()?, d)
}

/// Exact geometries used directly, checked in this order:
/// PG_d(4), AG_d(4), PG_d(3), AG_d(3), PG_d(2).
pub fn geometry_for(v: usize) -> Option<(bool, usize, u32, usize)> {
    let families: [(bool, u32, usize); 5] = [(true, 4, 21), (false, 4, 16), (true, 3, 13), (false, 3, 9), (true, 2, 7)];
    for (projective, q, bound) in families {
        for d in 2..=16usize {
            let size = if projective {
                projective_points(d as i32, q as u64) as usize
            } else {
                (q as usize).pow(d as u32)
            };
            if size == v {
                return Some((projective, d, q, bound));
            }
            if size > v {
                break;
            }
        }
    }
    None
}

/// The route `construct_bounded_pbd` takes for `v`, with its main parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plan {
    Catalog,
    Geometry { projective: bool, d: usize, q: u32, bound: usize },
    Truncate { d: usize, n: usize },
    InflateOdd { d: usize, t: usize },
    InflateEven { d: usize, t: usize },
    InflateHeavy { d: usize, w: usize },
    FallbackEvenTop { d: usize },
}

impl Plan {
    pub fn route(&self) -> Route {
        match self {
            Plan::Catalog => Route::Catalog,
            Plan::Geometry { .. } => Route::Geometry,
            Plan::Truncate { .. } => Route::Truncate,
            Plan::InflateOdd { .. } => Route::InflateOdd,
            Plan::InflateEven { .. } => Route::InflateEven,
            Plan::InflateHeavy { .. } => Route::InflateHeavy,
            Plan::FallbackEvenTop { .. } => Route::FallbackEvenTop,
        }
    }
}

pub const SMALL_LIMIT: usize = 62;

/// Picks the first applicable route for `v`, smallest `d` first.
pub fn dispatch(v: usize) -> Result<Plan> {
    if v == 0 || [2, 6, 8].contains(&v) {
        return Err(Error::NoDesignExists(v));
    }
    if v <= SMALL_LIMIT {
        return Ok(Plan::Catalog);
    }
    if let Some((projective, d, q, bound)) = geometry_for(v) {
        return Ok(Plan::Geometry { projective, d, q, bound });
    }
    let ds = || 2..=12usize;
    for d in 3..=5 {
        if 3 * gauss4(d - 1) <= v && v <= gauss4(d) {
            return Ok(Plan::Truncate { d, n: gauss4(d) - v });
        }
    }
    if v % 2 == 1 {
        if let Some(d) = ds().find(|&d| gauss4(d) < v && v < 3 * gauss4(d)) {
            return Ok(Plan::InflateOdd { d, t: (v - gauss4(d)) / 2 });
        }
    } else {
        for d in ds() {
            if v + 1 < gauss4(d) {
                break;
            }
            let t = (v + 1 - gauss4(d)) / 2;
            if t <= 4 * gauss4(d - 1) && even_split(t).is_some() {
                return Ok(Plan::InflateEven { d, t });
            }
        }
    }
    for d in ds() {
        if let Some(w) = v.checked_sub(gauss4(d)).filter(|e| [1, 3, 9].contains(e)).map(|e| e + 1) {
            if w <= gauss4(d - 1) {
                return Ok(Plan::InflateHeavy { d, w });
            }
        }
        if v + 1 == 3 * gauss4(d) {
            return Ok(Plan::FallbackEvenTop { d });
        }
    }
    Err(Error::Unreachable(format!("no route covers v = {v}")))
}

fn geometry_design(projective: bool, d: usize, q: u32) -> Result<IncidenceDesign> {
    if projective {
        Ok(ProjectiveSpace::new(d, q)?.design())
    } else {
        build_affine_space(d, q)
    }
}

/// A verified PBD(v, {3,4,5}) with a certificate for its flat bound.
pub fn construct_bounded_pbd_with(catalog: &Catalog, v: usize) -> Result<(IncidenceDesign, Certificate)> {
    let (design, cert) = match dispatch(v)? {
        Plan::Catalog => {
            let small = catalog.small_pbd(v)?;
            let cert = Certificate::new(Route::Catalog, None, v).with("provenance", small.provenance.clone());
            (small.design.clone(), cert)
        }
        Plan::Geometry { projective, d, q, bound } => {
            let design = geometry_design(projective, d, q)?;
            let cert = Certificate::new(Route::Geometry, Some(d), bound)
                .with("family", if projective { "PG" } else { "AG" })
                .with("q", q);
            (design, cert)
        }
        Plan::Truncate { d, n } => truncate_projective(d, n)?,
        Plan::InflateOdd { d, t } => inflate_odd_with(catalog, d, t)?,
        Plan::InflateEven { d, t } => inflate_even_with(catalog, d, t)?,
        Plan::InflateHeavy { d, w } => inflate_heavy_with(catalog, d, w)?,
        Plan::FallbackEvenTop { d } => fallback_even_top_with(catalog, d)?,
    };
    if design.v() != v {
        return Err(Error::Consistency(format!("route {} built {} points for v = {v}", cert.route, design.v())));
    }
    verify_pbd(&design, &[3, 4, 5]).into_result()?;
    Ok((design, cert))
}

pub fn construct_bounded_pbd(v: usize) -> Result<(IncidenceDesign, Certificate)> {
    construct_bounded_pbd_with(Catalog::embedded()?, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_split_excludes_1_2_5() {
        for t in 0..200 {
            match even_split(t) {
                Some((a, b)) => {
                    assert_eq!(4 * a + 3 * b, t);
                    assert!(b < 4);
                }
                None => assert!([1, 2, 5].contains(&t), "{t}"),
            }
        }
    }

    #[test]
    fn dispatch_is_total_up_to_1365() {
        for v in 1..=1365 {
            match dispatch(v) {
                Ok(_) => assert!(![2, 6, 8].contains(&v)),
                Err(Error::NoDesignExists(x)) => assert!([2, 6, 8].contains(&x)),
                Err(e) => panic!("v={v}: {e}"),
            }
        }
    }

    #[test]
    fn dispatch_examples() {
        assert_eq!(dispatch(85).unwrap(), Plan::Geometry { projective: true, d: 3, q: 4, bound: 21 });
        assert_eq!(dispatch(88).unwrap(), Plan::InflateHeavy { d: 3, w: 4 });
        assert_eq!(dispatch(100).unwrap(), Plan::InflateEven { d: 3, t: 8 });
        assert_eq!(dispatch(254).unwrap(), Plan::FallbackEvenTop { d: 3 });
        assert_eq!(dispatch(63).unwrap().route(), Route::Geometry);
        assert_eq!(dispatch(70).unwrap(), Plan::Truncate { d: 3, n: 15 });
        assert_eq!(dispatch(87).unwrap(), Plan::InflateOdd { d: 3, t: 1 });
        assert_eq!(dispatch(350).unwrap(), Plan::InflateHeavy { d: 4, w: 10 });
        assert!(matches!(dispatch(6), Err(Error::NoDesignExists(6))));
    }

    #[test]
    fn heavy_exactly_on_exception_family() {
        for v in 63..=1365 {
            let heavy = matches!(dispatch(v), Ok(Plan::InflateHeavy { .. }));
            let exceptional = (3..=5).any(|d| [1, 3, 9].contains(&v.wrapping_sub(gauss4(d))));
            assert_eq!(heavy, exceptional, "v={v}");
        }
    }
}
