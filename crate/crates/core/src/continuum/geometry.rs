//! Separating sets used by the mixing diagnostics.

use super::{BoxSpec, Region};

/// The two horizontal segments `[-m, 0) × {0}` and `(L, L+m] × {0}` that,
/// together with the slit, complete the equator of the slit box.
#[derive(Debug, Clone, PartialEq)]
pub struct Equator {
    pub m: usize,
    pub block_len: usize,
}

impl Equator {
    /// Half-open line ranges `[-m, 0)` and `(L, L+m]` as inclusive integer ranges.
    pub fn line_ranges(&self) -> [std::ops::RangeInclusive<i64>; 2] {
        let (m, l) = (self.m as i64, self.block_len as i64);
        [-m..=-1, l + 1..=l + m]
    }

    /// The lines meet the equator only at time 0.
    pub fn regions(&self) -> Vec<Region> {
        self.line_ranges()
            .into_iter()
            .flatten()
            .map(|line| Region::Point { line, time: 0.0 })
            .collect()
    }
}

/// One vertical step of the staircase circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallPiece {
    pub line: i64,
    pub lo: f64,
    pub hi: f64,
}

/// Staircase circuit around the slit: on line `x` the upper wall is
/// `[2d, 2d+2]` and the lower wall its mirror image, where
/// `d = min(x + k, L + k − x)` is the distance to the nearer horizontal corner.
#[derive(Debug, Clone, PartialEq)]
pub struct Parallelogram {
    pub k: usize,
    pub block_len: usize,
}

impl Parallelogram {
    fn depth(&self, x: i64) -> i64 {
        let (k, l) = (self.k as i64, self.block_len as i64);
        (x + k).min(l + k - x)
    }

    /// Horizontal diagonal `2k + L`.
    pub fn horizontal_extent(&self) -> usize {
        2 * self.k + self.block_len
    }

    /// Vertical diagonal from the lowest to the highest wall point (about `4k + 2L`).
    pub fn vertical_extent(&self) -> f64 {
        let (k, l) = (self.k as i64, self.block_len as i64);
        let top = (-k..=l + k).map(|x| self.depth(x)).max().unwrap_or(0);
        2.0 * (2 * top + 2) as f64
    }

    /// Every vertical wall piece, upper and lower; the corner lines carry `[-2, 2]`.
    pub fn pieces(&self) -> Vec<WallPiece> {
        let (k, l) = (self.k as i64, self.block_len as i64);
        let mut out = Vec::new();
        for x in -k..=l + k {
            let d = self.depth(x) as f64;
            if d == 0.0 {
                out.push(WallPiece { line: x, lo: -2.0, hi: 2.0 });
            } else {
                out.push(WallPiece { line: x, lo: 2.0 * d, hi: 2.0 * d + 2.0 });
                out.push(WallPiece { line: x, lo: -2.0 * d - 2.0, hi: -2.0 * d });
            }
        }
        out
    }

    /// `D₀ ∩ Λ` as intervals clipped to the box; pieces outside the box are dropped.
    pub fn regions_in(&self, bx: &BoxSpec) -> Vec<Region> {
        self.pieces()
            .into_iter()
            .filter(|p| bx.lines().contains(&p.line))
            .filter_map(|p| {
                let lo = p.lo.max(bx.start());
                let hi = p.hi.min(bx.end());
                (lo <= hi).then_some(Region::Interval { line: p.line, lo, hi })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatingSets {
    pub equator: Equator,
    pub parallelogram: Parallelogram,
}

/// The equator complement for `(m, L)` and the staircase circuit with half-width `k`.
pub fn separating_sets(m: usize, l: usize, k: usize) -> SeparatingSets {
    SeparatingSets {
        equator: Equator { m, block_len: l },
        parallelogram: Parallelogram { k, block_len: l },
    }
}

/// `k = ⌊3m/7⌋`.
pub fn parallelogram_k(m: usize) -> usize {
    3 * m / 7
}
