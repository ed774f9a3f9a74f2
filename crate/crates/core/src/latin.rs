//! Idempotent latin squares glued along the blocks of a PBD, their subsquares,
//! and the two-colored cycles of the induced one-factorization of `K_{n,n}`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;

use crate::catalog::idempotent_square;
use crate::design::{verify_pbd, IncidenceDesign};
use crate::error::{Error, Result};
use crate::flats::generated_flat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatinSquare {
    n: usize,
    grid: Vec<Vec<usize>>,
}

impl LatinSquare {
    /// Checks that every row and column is a permutation of `0..n`.
    pub fn new(grid: Vec<Vec<usize>>) -> Result<Self> {
        let n = grid.len();
        if grid.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidDesign(format!("latin square rows must have length {n}")));
        }
        let mut seen = vec![false; n];
        for i in 0..n {
            for pass in 0..2 {
                seen.iter_mut().for_each(|s| *s = false);
                for j in 0..n {
                    let x = if pass == 0 { grid[i][j] } else { grid[j][i] };
                    if x >= n || std::mem::replace(&mut seen[x], true) {
                        let what = if pass == 0 { "row" } else { "column" };
                        return Err(Error::InvalidDesign(format!("{what} {i} is not a permutation of 0..{n}")));
                    }
                }
            }
        }
        Ok(LatinSquare { n, grid })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> usize {
        self.grid[row][col]
    }

    pub fn grid(&self) -> &[Vec<usize>] {
        &self.grid
    }

    pub fn into_grid(self) -> Vec<Vec<usize>> {
        self.grid
    }

    pub fn is_idempotent(&self) -> bool {
        (0..self.n).all(|i| self.grid[i][i] == i)
    }

    /// Whether rows `y` by columns `y` form a latin square on the symbols `y`.
    pub fn is_subsquare(&self, y: &[usize]) -> bool {
        let mut member = vec![false; self.n];
        for &x in y {
            member[x] = true;
        }
        y.iter().all(|&r| y.iter().all(|&c| member[self.grid[r][c]]))
            && y.iter().all(|&r| {
                let mut row: Vec<usize> = y.iter().map(|&c| self.grid[r][c]).collect();
                row.sort_unstable();
                row.dedup();
                row.len() == y.len()
            })
    }

    /// First line `n`, then `n` rows of space-separated symbols.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for row in &self.grid {
            let line: Vec<String> = row.iter().map(usize::to_string).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let bad = |line: usize, message: String| Error::Parse { line: line + 1, column: 1, message };
        let (i0, first) = lines.next().ok_or_else(|| bad(0, "empty input".into()))?;
        let n: usize = first.trim().parse().map_err(|_| bad(i0, format!("expected the order, got {first:?}")))?;
        let mut grid = Vec::with_capacity(n);
        for (i, line) in lines {
            let row = line
                .split_whitespace()
                .map(|tok| tok.parse().map_err(|_| bad(i, format!("bad symbol {tok:?}"))))
                .collect::<Result<Vec<usize>>>()?;
            grid.push(row);
        }
        if grid.len() != n {
            return Err(Error::Format(format!("expected {n} rows, found {}", grid.len())));
        }
        LatinSquare::new(grid)
    }
}

/// A glued square together with the PBD it came from.
#[derive(Debug, Clone)]
pub struct GluedSquare {
    pub square: LatinSquare,
    pub source: IncidenceDesign,
    /// Block index for each off-diagonal cell, row-major; `u32::MAX` on the
    /// diagonal.
    cell_block: Vec<u32>,
}

impl GluedSquare {
    pub fn block_of_cell(&self, row: usize, col: usize) -> Option<usize> {
        let b = self.cell_block[row * self.square.n + col];
        (b != u32::MAX).then_some(b as usize)
    }
}

/// Places an idempotent square of order `|B|` on the points of every block
/// `B`, and `i` on each diagonal cell `(i, i)`.
pub fn glue_latin(pbd: &IncidenceDesign) -> Result<GluedSquare> {
    let n = pbd.v();
    let sizes: Vec<usize> = pbd.block_size_histogram().into_keys().collect();
    if sizes.contains(&2) {
        return Err(Error::NoIdempotentSquare(2));
    }
    verify_pbd(pbd, &sizes).into_result()?;
    let squares: Vec<Option<LatinSquare>> =
        (0..=sizes.last().copied().unwrap_or(0)).map(|k| idempotent_square(k).ok()).collect();
    let mut grid = vec![vec![usize::MAX; n]; n];
    let mut cell_block = vec![u32::MAX; n * n];
    for (i, row) in grid.iter_mut().enumerate() {
        row[i] = i;
    }
    for (bi, block) in pbd.blocks().iter().enumerate() {
        let sq = squares[block.len()].as_ref().ok_or(Error::NotInCatalog(format!(
            "idempotent square of order {}",
            block.len()
        )))?;
        for (a, &r) in block.iter().enumerate() {
            for (b, &c) in block.iter().enumerate() {
                if a != b {
                    grid[r][c] = block[sq.get(a, b)];
                    cell_block[r * n + c] = bi as u32;
                }
            }
        }
    }
    let square = LatinSquare::new(grid)?;
    debug_assert!(square.is_idempotent());
    Ok(GluedSquare { square, source: pbd.clone(), cell_block })
}

/// The flat generated by `{row, col, symbol}`; its rows and columns carry a
/// latin subsquare containing the cell and the symbol.
pub fn locate_subsquare(sq: &GluedSquare, row: usize, col: usize, symbol: usize) -> Result<Vec<usize>> {
    let n = sq.square.n();
    for x in [row, col, symbol] {
        if x >= n {
            return Err(Error::PointOutOfRange { point: x, v: n });
        }
    }
    let mut seed = vec![row, col, symbol];
    seed.sort_unstable();
    seed.dedup();
    generated_flat(&sq.source, &seed)
}

/// Per symbol, the column holding it in each row.
fn columns_by_symbol(sq: &LatinSquare) -> Vec<Vec<usize>> {
    let n = sq.n();
    let mut col_of = vec![vec![0; n]; n];
    for r in 0..n {
        for c in 0..n {
            col_of[sq.get(r, c)][r] = c;
        }
    }
    col_of
}

/// Per symbol, the row holding it in each column.
fn rows_by_symbol(sq: &LatinSquare) -> Vec<Vec<usize>> {
    let n = sq.n();
    let mut row_of = vec![vec![0; n]; n];
    for r in 0..n {
        for c in 0..n {
            row_of[sq.get(r, c)][c] = r;
        }
    }
    row_of
}

fn cycles(col_of: &[Vec<usize>], row_of: &[Vec<usize>], s: usize, t: usize) -> Vec<usize> {
    let n = col_of.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut r = start;
        let mut len = 0;
        while !seen[r] {
            seen[r] = true;
            len += 2;
            r = row_of[t][col_of[s][r]];
        }
        out.push(len);
    }
    out.sort_unstable();
    out
}

/// Cycle lengths, in edges, of the union of the perfect matchings of `K_{n,n}`
/// colored `s` and `t`.
pub fn bicolored_cycles(sq: &LatinSquare, s: usize, t: usize) -> Result<Vec<usize>> {
    let n = sq.n();
    if s == t {
        return Err(Error::InvalidDesign(format!("symbols must differ, got {s} twice")));
    }
    if s >= n || t >= n {
        return Err(Error::PointOutOfRange { point: s.max(t), v: n });
    }
    Ok(cycles(&columns_by_symbol(sq), &rows_by_symbol(sq), s, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleScan {
    Exhaustive,
    Sample { count: usize, seed: u64 },
}

pub const EXHAUSTIVE_CYCLE_LIMIT: usize = 300;

/// Longest two-colored cycle over the scanned symbol pairs, with the
/// lexicographically least pair achieving it.
pub fn max_cycle_scan(sq: &LatinSquare, mode: CycleScan) -> Result<(usize, (usize, usize))> {
    let n = sq.n();
    if n < 2 {
        return Err(Error::OutOfRange(format!("order {n} has no symbol pairs")));
    }
    let pairs: Vec<(usize, usize)> = match mode {
        CycleScan::Exhaustive => {
            if n > EXHAUSTIVE_CYCLE_LIMIT {
                return Err(Error::OutOfRange(format!(
                    "exhaustive cycle scans are limited to order {EXHAUSTIVE_CYCLE_LIMIT}, got {n}"
                )));
            }
            (0..n).flat_map(|s| (s + 1..n).map(move |t| (s, t))).collect()
        }
        CycleScan::Sample { count, seed } => {
            let mut rng = SplitMix64::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let s = rng.gen_range(0..n);
                    let t = (s + rng.gen_range(1..n)) % n;
                    (s.min(t), s.max(t))
                })
                .collect()
        }
    };
    let col_of = columns_by_symbol(sq);
    let row_of = rows_by_symbol(sq);
    let best = pairs
        .par_iter()
        .map(|&(s, t)| (*cycles(&col_of, &row_of, s, t).last().expect("n >= 2"), (s, t)))
        .reduce(|| (0, (usize::MAX, usize::MAX)), |a, b| {
            if a.0 != b.0 {
                if a.0 > b.0 {
                    a
                } else {
                    b
                }
            } else if a.1 <= b.1 {
                a
            } else {
                b
            }
        });
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_projective_space;

    /// Backtracking search for an idempotent latin square of order `n`.
    fn idempotent_exists(n: usize) -> bool {
        fn fill(g: &mut Vec<Vec<usize>>, cell: usize, n: usize) -> bool {
            if cell == n * n {
                return true;
            }
            let (r, c) = (cell / n, cell % n);
            if r == c {
                return fill(g, cell + 1, n);
            }
            for x in 0..n {
                if (0..n).any(|j| g[r][j] == x || g[j][c] == x) {
                    continue;
                }
                g[r][c] = x;
                if fill(g, cell + 1, n) {
                    return true;
                }
                g[r][c] = usize::MAX;
            }
            false
        }
        let mut g = vec![vec![usize::MAX; n]; n];
        for i in 0..n {
            g[i][i] = i;
        }
        fill(&mut g, 0, n)
    }

    #[test]
    fn oracle_agrees_on_idempotent_existence() {
        assert!(!idempotent_exists(2));
        for n in 3..=5 {
            assert!(idempotent_exists(n));
            assert!(idempotent_square(n).unwrap().is_idempotent());
        }
    }

    #[test]
    fn single_block_gives_the_square_itself() {
        let pbd = IncidenceDesign::new(3, vec![vec![0, 1, 2]]).unwrap();
        let g = glue_latin(&pbd).unwrap();
        assert_eq!(g.square, idempotent_square(3).unwrap());
    }

    #[test]
    fn fano_glue_has_line_subsquares() {
        let fano = build_projective_space(2, 2).unwrap();
        let g = glue_latin(&fano).unwrap();
        assert!(g.square.is_idempotent());
        for line in fano.blocks() {
            assert!(g.square.is_subsquare(line));
        }
        let (max, _) = max_cycle_scan(&g.square, CycleScan::Exhaustive).unwrap();
        assert!(max <= 8, "{max}");
    }

    #[test]
    fn locate_examples() {
        let pg = build_projective_space(2, 4).unwrap();
        let g = glue_latin(&pg).unwrap();
        assert_eq!(locate_subsquare(&g, 5, 5, 5).unwrap(), vec![5]);
        let b = &pg.blocks()[3];
        let y = locate_subsquare(&g, b[0], b[1], g.square.get(b[0], b[1])).unwrap();
        assert_eq!(&y, b);
        assert_eq!(g.block_of_cell(b[0], b[1]), Some(3));
    }

    #[test]
    fn two_blocks_rejected() {
        let pbd = IncidenceDesign::new(2, vec![vec![0, 1]]).unwrap();
        assert!(matches!(glue_latin(&pbd), Err(Error::NoIdempotentSquare(2))));
    }

    #[test]
    fn cycles_conserve_edges() {
        let sq = idempotent_square(3).unwrap();
        for (s, t) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(bicolored_cycles(&sq, s, t).unwrap().iter().sum::<usize>(), 6);
        }
        assert_eq!(max_cycle_scan(&sq, CycleScan::Exhaustive).unwrap().0, 6);
        assert!(bicolored_cycles(&sq, 1, 1).is_err());
    }

    #[test]
    fn text_round_trip() {
        let sq = idempotent_square(5).unwrap();
        assert_eq!(LatinSquare::from_text(&sq.to_text()).unwrap(), sq);
        assert!(LatinSquare::from_text("2\n0 1\n0 1\n").is_err());
    }
}
