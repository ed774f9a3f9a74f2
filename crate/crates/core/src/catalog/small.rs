//! Recipes for PBD(v, {3,4,5}) with `v <= 62`.

use std::collections::BTreeMap;

use super::{recipes, Catalog, SmallPbd};
use crate::compose::fill_groups;
use crate::design::{IncidenceDesign, TypeMultiset};
use crate::error::{Error, Result};
use crate::geometry::{build_affine_space, build_projective_space};
use crate::inflation::{fallback_even_top_with, inflate_even_with, inflate_heavy_with, inflate_odd_with};
use crate::truncation::truncate_projective;

pub const SMALL_MAX: usize = 62;

/// A PBD(14, {3,4,5}) with one block of size 5, nine of size 4 and nine of
/// size 3.
const PBD_14: [&[usize]; 19] = [
    &[0, 1, 7, 10],
    &[0, 2, 3, 6, 13],
    &[0, 4, 9, 11],
    &[0, 5, 8, 12],
    &[1, 2, 8, 11],
    &[1, 3, 4],
    &[1, 5, 6],
    &[1, 9, 12, 13],
    &[2, 4, 5],
    &[2, 7, 12],
    &[2, 9, 10],
    &[3, 5, 7, 9],
    &[3, 8, 10],
    &[3, 11, 12],
    &[4, 6, 10, 12],
    &[4, 7, 8, 13],
    &[5, 10, 11, 13],
    &[6, 7, 11],
    &[6, 8, 9],
];

fn block(g: usize) -> IncidenceDesign {
    IncidenceDesign::new(g, if g >= 2 { vec![(0..g).collect()] } else { vec![] }).expect("single block")
}

fn fillers(sizes: &[usize]) -> BTreeMap<usize, IncidenceDesign> {
    sizes.iter().map(|&g| (g, block(g))).collect()
}

fn entry(design: IncidenceDesign, provenance: impl Into<String>) -> SmallPbd {
    SmallPbd { design: design.canonical(), provenance: provenance.into() }
}

pub fn build(cat: &Catalog, v: usize) -> Result<SmallPbd> {
    let template = |s: &str| -> Result<_> { Ok(cat.get_ingredient(&s.parse::<TypeMultiset>()?, &[3, 4, 5])?.design().clone()) };
    Ok(match v {
        1 => entry(IncidenceDesign::new(1, vec![])?, "a single point"),
        3..=5 => entry(block(v), "single block"),
        7 => entry(build_projective_space(2, 2)?, "PG_2(2)"),
        9 => entry(build_affine_space(2, 3)?, "AG_2(3)"),
        10 => {
            let td = recipes::transversal_design(3, 3)?;
            entry(fill_groups(&td, &fillers(&[4]), true)?, "TD(3,3) plus a point, groups filled")
        }
        11 => entry(fill_groups(&template("3^3 1^2")?, &fillers(&[3]), false)?, "GDD 3^3 1^2, groups filled"),
        12 => entry(fill_groups(&template("3^4")?, &fillers(&[3]), false)?, "GDD 3^4, groups filled"),
        13 => entry(build_projective_space(2, 3)?, "PG_2(3)"),
        14 => entry(IncidenceDesign::new(14, PBD_14.iter().map(|b| b.to_vec()).collect())?, "explicit block list"),
        15 => entry(build_projective_space(3, 2)?, "PG_3(2)"),
        16 => entry(build_affine_space(2, 4)?, "AG_2(4)"),
        17..=20 => {
            let n = 21 - v;
            entry(truncate_projective(2, n)?.0, format!("PG_2(4) legally truncated by {n}"))
        }
        21 => entry(build_projective_space(2, 4)?, "PG_2(4)"),
        22 | 24 => {
            let w = v - 20;
            entry(inflate_heavy_with(cat, 2, w)?.0, format!("PG_1(4) with weight 5 on {w} points, 4 elsewhere"))
        }
        25 => entry(build_affine_space(2, 5)?, "AG_2(5)"),
        27 => entry(build_affine_space(3, 3)?, "AG_3(3)"),
        30 => {
            let gdd = recipes::td7_truncated()?;
            let mut f = fillers(&[4, 5]);
            f.insert(7, build_projective_space(2, 2)?);
            entry(fill_groups(&gdd, &f, false)?, "TD(5,7) truncated to 7^3 4^1 5^1, groups filled")
        }
        31 => entry(build_projective_space(4, 2)?, "PG_4(2)"),
        40 => entry(build_projective_space(3, 3)?, "PG_3(3)"),
        62 => entry(fallback_even_top_with(cat, 2)?.0, "PG_2(4) minus a point, weights 4,4 and 3"),
        v if v % 2 == 1 && v > 21 => {
            let t = (v - 21) / 2;
            entry(inflate_odd_with(cat, 2, t)?.0, format!("PG_2(4) with {t} points tripled"))
        }
        v if v % 2 == 0 && v > 24 => {
            let t = (v - 20) / 2;
            entry(inflate_even_with(cat, 2, t)?.0, format!("PG_2(4) minus a point with {t} points tripled"))
        }
        _ => return Err(Error::NoDesignExists(v)),
    })
}
