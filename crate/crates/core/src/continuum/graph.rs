//! Connectivity queries that walk the segment graph directly, without a full labeling.

use std::collections::{HashSet, VecDeque};

use super::{BoxSpec, GeometryError, RcConfig, Region, SideBc};

/// A maximal death-free piece of one line: `(line index, position among the line's segments)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    pub line: usize,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Node {
    Seg(Segment),
    /// Stands for the wired side boundary.
    Ghost,
}

/// Sorted cut times of one line, merged with the slit instant where present.
pub(crate) trait Cuts {
    fn len(&self) -> usize;
    fn get(&self, j: usize) -> f64;
    /// Number of cuts `<= time`.
    fn count_le(&self, time: f64) -> usize;
    /// Number of cuts `< time`.
    fn count_lt(&self, time: f64) -> usize;
}

impl Cuts for [f64] {
    fn len(&self) -> usize {
        <[f64]>::len(self)
    }
    fn get(&self, j: usize) -> f64 {
        self[j]
    }
    fn count_le(&self, time: f64) -> usize {
        self.partition_point(|&c| c <= time)
    }
    fn count_lt(&self, time: f64) -> usize {
        self.partition_point(|&c| c < time)
    }
}

/// Deaths of one line plus an optional cut at 0, merged on the fly.
pub(crate) struct LineCuts<'a> {
    deaths: &'a [f64],
    slit: bool,
}

impl Cuts for LineCuts<'_> {
    fn len(&self) -> usize {
        self.deaths.len() + self.slit as usize
    }
    fn get(&self, j: usize) -> f64 {
        if !self.slit {
            return self.deaths[j];
        }
        let p = self.deaths.partition_point(|&d| d < 0.0);
        match j.cmp(&p) {
            std::cmp::Ordering::Less => self.deaths[j],
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => self.deaths[j - 1],
        }
    }
    fn count_le(&self, time: f64) -> usize {
        self.deaths.partition_point(|&c| c <= time) + (self.slit && 0.0 <= time) as usize
    }
    fn count_lt(&self, time: f64) -> usize {
        self.deaths.partition_point(|&c| c < time) + (self.slit && 0.0 < time) as usize
    }
}

pub(crate) fn n_segments(n_cuts: usize, periodic: bool) -> usize {
    if periodic {
        n_cuts.max(1)
    } else {
        n_cuts + 1
    }
}

pub(crate) fn index_from_count(count: usize, n_cuts: usize, periodic: bool) -> usize {
    if periodic {
        if n_cuts == 0 {
            0
        } else {
            count % n_cuts
        }
    } else {
        count
    }
}

/// Time pieces covered by segment `j`; periodic segment 0 wraps and has two pieces.
pub(crate) fn pieces<C: Cuts + ?Sized>(
    cuts: &C,
    j: usize,
    start: f64,
    end: f64,
    periodic: bool,
) -> ([(f64, f64); 2], usize) {
    let n = cuts.len();
    if periodic {
        if n == 0 {
            ([(start, end), (0.0, 0.0)], 1)
        } else if j == 0 {
            ([(start, cuts.get(0)), (cuts.get(n - 1), end)], 2)
        } else {
            ([(cuts.get(j - 1), cuts.get(j)), (0.0, 0.0)], 1)
        }
    } else {
        let lo = if j == 0 { start } else { cuts.get(j - 1) };
        let hi = if j == n { end } else { cuts.get(j) };
        ([(lo, hi), (0.0, 0.0)], 1)
    }
}

/// Read-only segment-graph view of a configuration in a box.
#[derive(Clone, Copy)]
pub struct SegmentView<'a> {
    bx: &'a BoxSpec,
    cfg: &'a RcConfig,
}

impl<'a> SegmentView<'a> {
    pub fn new(bx: &'a BoxSpec, cfg: &'a RcConfig) -> Self {
        debug_assert_eq!(cfg.deaths().len(), bx.width());
        debug_assert_eq!(cfg.bridges().len(), bx.n_pairs());
        Self { bx, cfg }
    }

    pub fn boxspec(&self) -> &'a BoxSpec {
        self.bx
    }

    pub(crate) fn cuts(&self, line: usize) -> LineCuts<'a> {
        LineCuts {
            deaths: &self.cfg.deaths()[line],
            slit: self.bx.is_slit_index(line),
        }
    }

    pub fn n_segments(&self, line: usize) -> usize {
        n_segments(self.cuts(line).len(), self.bx.is_periodic())
    }

    /// Segment containing `(line, time)`; a point on a cut belongs to the segment above.
    pub fn segment_at(&self, line: usize, time: f64) -> Segment {
        let cuts = self.cuts(line);
        Segment {
            line,
            index: index_from_count(cuts.count_le(time), cuts.len(), self.bx.is_periodic()),
        }
    }

    /// Segment immediately below `(line, time)`.
    pub fn segment_below(&self, line: usize, time: f64) -> Segment {
        let cuts = self.cuts(line);
        Segment {
            line,
            index: index_from_count(cuts.count_lt(time), cuts.len(), self.bx.is_periodic()),
        }
    }

    pub fn pieces(&self, seg: Segment) -> ([(f64, f64); 2], usize) {
        pieces(&self.cuts(seg.line), seg.index, self.bx.start(), self.bx.end(), self.bx.is_periodic())
    }

    fn is_side(&self, line: usize) -> bool {
        line == 0 || line + 1 == self.bx.width()
    }

    fn touches_top_bottom(&self, seg: Segment) -> bool {
        !self.bx.is_periodic() && (seg.index == 0 || seg.index == self.cuts(seg.line).len())
    }

    pub(crate) fn for_each_neighbor(&self, node: Node, mut f: impl FnMut(Node)) {
        match node {
            Node::Ghost => {
                let last = self.bx.width() - 1;
                for line in [0, last] {
                    for index in 0..self.n_segments(line) {
                        f(Node::Seg(Segment { line, index }));
                    }
                    if last == 0 {
                        break;
                    }
                }
            }
            Node::Seg(seg) => {
                if self.bx.bc() == SideBc::Wired && self.is_side(seg.line) {
                    f(Node::Ghost);
                }
                let (pcs, np) = self.pieces(seg);
                let bridges = self.cfg.bridges();
                for &(lo, hi) in &pcs[..np] {
                    if seg.line > 0 {
                        let bs = &bridges[seg.line - 1];
                        let from = bs.partition_point(|&b| b < lo);
                        let to = bs.partition_point(|&b| b <= hi);
                        for &time in &bs[from..to] {
                            f(Node::Seg(self.segment_at(seg.line - 1, time)));
                        }
                    }
                    if seg.line + 1 < self.bx.width() {
                        let bs = &bridges[seg.line];
                        let from = bs.partition_point(|&b| b < lo);
                        let to = bs.partition_point(|&b| b <= hi);
                        for &time in &bs[from..to] {
                            f(Node::Seg(self.segment_at(seg.line + 1, time)));
                        }
                    }
                }
            }
        }
    }

    /// Whether two segments lie in one cluster, by bidirectional breadth-first search.
    ///
    /// Expands the smaller frontier first, so the cost is governed by the smaller
    /// of the two clusters when they are disjoint.
    pub fn segments_connected(&self, a: Segment, b: Segment) -> bool {
        if a == b {
            return true;
        }
        let mut seen = [HashSet::new(), HashSet::new()];
        let mut queue = [VecDeque::new(), VecDeque::new()];
        for (side, s) in [(0, a), (1, b)] {
            seen[side].insert(Node::Seg(s));
            queue[side].push_back(Node::Seg(s));
        }
        loop {
            let side = if queue[0].len() <= queue[1].len() { 0 } else { 1 };
            let Some(node) = queue[side].pop_front() else {
                return false;
            };
            let mut met = false;
            self.for_each_neighbor(node, |nb| {
                if met {
                    return;
                }
                if seen[1 - side].contains(&nb) {
                    met = true;
                } else if seen[side].insert(nb) {
                    queue[side].push_back(nb);
                }
            });
            if met {
                return true;
            }
        }
    }

    pub(crate) fn region_segments(&self, region: &Region) -> Result<Vec<Segment>, GeometryError> {
        let bx = self.bx;
        let out = match *region {
            Region::Point { line, time } => {
                if !bx.contains_time(time) {
                    return Err(GeometryError::PointOutside { line, time });
                }
                let i = bx.line_index(line).map_err(|_| GeometryError::PointOutside { line, time })?;
                vec![self.segment_at(i, time)]
            }
            Region::Interval { line, lo, hi } => {
                if !(bx.contains_time(lo) && bx.contains_time(hi) && lo <= hi) {
                    return Err(GeometryError::PointOutside { line, time: lo });
                }
                let i = bx.line_index(line)?;
                let first = self.segment_at(i, lo).index;
                let last = self.segment_at(i, hi).index;
                let n = self.n_segments(i);
                let mut v = Vec::new();
                let mut j = first;
                loop {
                    v.push(Segment { line: i, index: j });
                    if j == last {
                        break;
                    }
                    j = (j + 1) % n;
                }
                v
            }
            Region::SlitUpper(x) | Region::SlitLower(x) => {
                let i = bx.line_index(x)?;
                if !bx.is_slit_index(i) {
                    return Err(GeometryError::NotOnSlit { line: x });
                }
                if matches!(region, Region::SlitUpper(_)) {
                    vec![self.segment_at(i, 0.0)]
                } else {
                    vec![self.segment_below(i, 0.0)]
                }
            }
            Region::Sides | Region::Boundary => {
                let mut v = Vec::new();
                for line in 0..bx.width() {
                    let n = self.n_segments(line);
                    if self.is_side(line) {
                        v.extend((0..n).map(|index| Segment { line, index }));
                    } else if matches!(region, Region::Boundary) && !bx.is_periodic() {
                        v.push(Segment { line, index: 0 });
                        if n > 1 {
                            v.push(Segment { line, index: n - 1 });
                        }
                    }
                }
                v
            }
        };
        Ok(out)
    }

    fn region_contains(&self, region: &Region, seg: Segment) -> bool {
        match *region {
            Region::Sides => self.is_side(seg.line),
            Region::Boundary => self.is_side(seg.line) || self.touches_top_bottom(seg),
            Region::Interval { line, lo, hi } => {
                self.bx.line_index(line) == Ok(seg.line) && {
                    let (pcs, np) = self.pieces(seg);
                    pcs[..np].iter().any(|&(a, b)| a <= hi && lo <= b)
                }
            }
            _ => self
                .region_segments(region)
                .map(|v| v.contains(&seg))
                .unwrap_or(false),
        }
    }
}

/// Target set for [`reaches_boundary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// The vertical sides only.
    Sides,
    /// Sides plus top and bottom (the latter absent when periodic).
    Full,
}

/// `A ↔ B`: some point of `a` is joined by an open path to some point of `b`.
pub fn joined(
    bx: &BoxSpec,
    cfg: &RcConfig,
    a: &[Region],
    b: &[Region],
) -> Result<bool, GeometryError> {
    let view = SegmentView::new(bx, cfg);
    // resolve point-like targets once
    let mut target_segs = HashSet::new();
    let mut target_regions = Vec::new();
    for r in b {
        match r {
            Region::Sides | Region::Boundary | Region::Interval { .. } => {
                view.region_segments(r)?;
                target_regions.push(*r);
            }
            _ => target_segs.extend(view.region_segments(r)?),
        }
    }
    let hits = |seg: Segment| {
        target_segs.contains(&seg) || target_regions.iter().any(|r| view.region_contains(r, seg))
    };
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    for r in a {
        for s in view.region_segments(r)? {
            if seen.insert(Node::Seg(s)) {
                queue.push_back(Node::Seg(s));
            }
        }
    }
    while let Some(node) = queue.pop_front() {
        if let Node::Seg(s) = node {
            if hits(s) {
                return Ok(true);
            }
        }
        view.for_each_neighbor(node, |nb| {
            if seen.insert(nb) {
                queue.push_back(nb);
            }
        });
    }
    Ok(false)
}

/// Whether the clusters of `source` reach the chosen part of the boundary.
pub fn reaches_boundary(
    bx: &BoxSpec,
    cfg: &RcConfig,
    source: &[Region],
    target: Boundary,
) -> Result<bool, GeometryError> {
    let t = match target {
        Boundary::Sides => Region::Sides,
        Boundary::Full => Region::Boundary,
    };
    joined(bx, cfg, source, &[t])
}
