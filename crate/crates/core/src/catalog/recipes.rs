//! Direct constructions for the catalog GDDs.

use crate::compose::Truncate;
use crate::design::{GroupedDesign, IncidenceDesign};
use crate::error::{Error, Result};
use crate::field::FieldTable;
use crate::geometry::{build_affine_space, ProjectiveSpace};

/// TD(k, q) over GF(q): point `(g, x)` has index `g*q + x`. For `k <= q` the
/// blocks are the graphs `{(g, a + b*g)}`; for `k = q + 1` the last group is
/// the point at infinity with coordinate `b`.
pub fn transversal_design(k: usize, q: usize) -> Result<GroupedDesign> {
    let f = FieldTable::new(q as u32)?;
    if k < 2 || k > q + 1 {
        return Err(Error::InvalidDimension(format!("TD({k},{q}) needs 2 <= k <= {}", q + 1)));
    }
    let finite = k.min(q);
    let groups: Vec<Vec<usize>> = (0..k).map(|g| (g * q..(g + 1) * q).collect()).collect();
    let mut blocks = Vec::with_capacity(q * q);
    for a in 0..q as u8 {
        for b in 0..q as u8 {
            let mut block: Vec<usize> =
                (0..finite).map(|g| g * q + f.add(a, f.mul(b, g as u8)) as usize).collect();
            if k == q + 1 {
                block.push(q * q + b as usize);
            }
            blocks.push(block);
        }
    }
    GroupedDesign::new(k * q, groups, blocks)
}

/// The blocks of TD(k, q) whose slope is `b`, which partition the finite
/// groups (a parallel class).
fn parallel_class(td: &GroupedDesign, q: usize, b: usize) -> Vec<Vec<usize>> {
    // Blocks are generated a-major, b-minor.
    (0..q).map(|a| td.blocks()[a * q + b].clone()).collect()
}

pub fn single_block(v: usize) -> GroupedDesign {
    let blocks = if v >= 2 { vec![(0..v).collect()] } else { vec![] };
    GroupedDesign::new(v, (0..v).map(|x| vec![x]).collect(), blocks).expect("single block")
}

/// One line of a PBD becomes a group; the remaining blocks stay.
fn line_as_group(design: &IncidenceDesign, line: usize) -> Result<GroupedDesign> {
    let group = design.blocks()[line].clone();
    let mut groups = vec![group.clone()];
    groups.extend((0..design.v()).filter(|x| !group.contains(x)).map(|x| vec![x]));
    let blocks = design.blocks().iter().enumerate().filter(|&(i, _)| i != line).map(|(_, b)| b.clone()).collect();
    GroupedDesign::new(design.v(), groups, blocks)
}

/// Type 3^1 1^4: the Fano plane with one line as the group.
pub fn fano_with_group() -> Result<GroupedDesign> {
    line_as_group(&ProjectiveSpace::new(2, 2)?.design(), 0)
}

/// Type 3^2 1^3: AG_2(3) with two lines of one parallel class as groups.
pub fn affine_plane_3_two_groups() -> Result<GroupedDesign> {
    let ag = build_affine_space(2, 3)?;
    let g0 = ag.blocks()[0].clone();
    let g1 = ag
        .blocks()
        .iter()
        .find(|b| b.iter().all(|x| !g0.contains(x)) && **b != g0)
        .expect("AG_2(3) has parallel lines")
        .clone();
    let mut groups = vec![g0.clone(), g1.clone()];
    groups.extend((0..9).filter(|x| !g0.contains(x) && !g1.contains(x)).map(|x| vec![x]));
    let blocks = ag.blocks().iter().filter(|b| **b != g0 && **b != g1).cloned().collect();
    GroupedDesign::new(9, groups, blocks)
}

/// Type 4^5: PG_2(4) with point 0 deleted; the punctured lines through it
/// become groups.
pub fn punctured_plane_4() -> Result<GroupedDesign> {
    let pg = ProjectiveSpace::new(2, 4)?;
    let mut groups = Vec::new();
    let mut blocks = Vec::new();
    for line in pg.lines() {
        if line.contains(&0) {
            groups.push(line.iter().filter(|&&x| x != 0).map(|&x| x - 1).collect());
        } else {
            blocks.push(line.iter().map(|&x| x - 1).collect());
        }
    }
    GroupedDesign::new(20, groups, blocks)
}

/// Type 4^i 5^(5-i) for `i` in `0..5`: TD(5,5) minus the conic points
/// `(g, g^2)` for `g < i`. A block meets the conic in at most two points.
pub fn conic_truncated_td5(i: usize) -> Result<GroupedDesign> {
    let td = transversal_design(5, 5)?;
    let removed: Vec<usize> = (0..i).map(|g| g * 5 + (g * g) % 5).collect();
    let keep: Vec<usize> = (0..25).filter(|x| !removed.contains(x)).collect();
    td.truncate(&keep)
}

/// TD(5,4) minus the conic points `(g, g^2)` over GF(4) for the first
/// `count` finite groups; no three of them lie in a block.
pub fn conic_truncated_td4(count: usize) -> Result<GroupedDesign> {
    let f = FieldTable::new(4)?;
    let td = transversal_design(5, 4)?;
    let removed: Vec<usize> = (0..count as u8).map(|g| g as usize * 4 + f.mul(g, g) as usize).collect();
    let keep: Vec<usize> = (0..20).filter(|x| !removed.contains(x)).collect();
    td.truncate(&keep)
}

/// Type 4^1 3^3 with K = {3,4}: TD(4,4) minus three points of one block.
pub fn td4_minus_block_points() -> Result<GroupedDesign> {
    let td = transversal_design(4, 4)?;
    let block = td.blocks()[0].clone();
    let keep: Vec<usize> = (0..16).filter(|x| !block[..3].contains(x)).collect();
    td.truncate(&keep)
}

/// Type 3^3 1^1 with K = {3,4}: TD(3,3) with a new point on one parallel class.
pub fn td3_plus_point() -> Result<GroupedDesign> {
    let td = transversal_design(3, 3)?;
    let class = parallel_class(&td, 3, 0);
    let mut blocks: Vec<Vec<usize>> = td.blocks().iter().filter(|b| !class.contains(b)).cloned().collect();
    blocks.extend(class.into_iter().map(|mut b| {
        b.push(9);
        b
    }));
    let mut groups = td.groups().to_vec();
    groups.push(vec![9]);
    GroupedDesign::new(10, groups, blocks)
}

/// Type 7^3 4^1 5^1: TD(5,7) with three points removed from group 3 and two
/// from group 4.
pub fn td7_truncated() -> Result<GroupedDesign> {
    let td = transversal_design(5, 7)?;
    let keep: Vec<usize> = (0..35).filter(|&x| !(21..24).contains(&x) && !(28..30).contains(&x)).collect();
    td.truncate(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::verify_gdd;

    #[test]
    fn transversal_designs_verify() {
        for (k, q) in [(3, 3), (4, 3), (4, 4), (5, 4), (5, 5), (6, 5), (5, 7), (8, 7)] {
            let td = transversal_design(k, q).unwrap();
            assert!(verify_gdd(&td, &[k]).passed, "TD({k},{q})");
            assert_eq!(td.blocks().len(), q * q);
        }
        assert!(transversal_design(5, 3).is_err());
    }

    #[test]
    fn recipes_have_expected_types() {
        let cases: Vec<(GroupedDesign, &str, Vec<usize>)> = vec![
            (fano_with_group().unwrap(), "3^1 1^4", vec![3]),
            (affine_plane_3_two_groups().unwrap(), "3^2 1^3", vec![3]),
            (punctured_plane_4().unwrap(), "4^5", vec![5]),
            (conic_truncated_td5(0).unwrap(), "5^5", vec![5]),
            (conic_truncated_td5(3).unwrap(), "5^2 4^3", vec![3, 4, 5]),
            (conic_truncated_td4(4).unwrap(), "4^1 3^4", vec![3, 4, 5]),
            (conic_truncated_td4(3).unwrap(), "4^2 3^3", vec![3, 4, 5]),
            (td4_minus_block_points().unwrap(), "4^1 3^3", vec![3, 4]),
            (td3_plus_point().unwrap(), "3^3 1^1", vec![3, 4]),
            (td7_truncated().unwrap(), "7^3 5^1 4^1", vec![3, 4, 5]),
        ];
        for (gdd, ty, k) in cases {
            assert_eq!(gdd.type_multiset().to_string(), ty);
            let report = verify_gdd(&gdd, &k);
            assert!(report.passed, "{ty}: {:?}", report.first_violation());
        }
    }
}
