use super::graph::{index_from_count, n_segments, pieces, Cuts, SegmentView};
use super::{BoxSpec, GeometryError, RcConfig, Region, SideBc, UnionFind};

pub use super::graph::Segment;

/// Maximal death-free segments of every line together with their cluster labels.
#[derive(Debug, Clone)]
pub struct ClusterLabeling {
    bx: BoxSpec,
    /// Per line: deaths merged with the slit cut.
    cuts: Vec<Vec<f64>>,
    offsets: Vec<usize>,
    /// Dense cluster label of every segment, `0..n_clusters`.
    labels: Vec<usize>,
    n_clusters: usize,
}

/// Segments only: every segment is its own label (bridges and wiring not applied).
pub fn segments_of(bx: &BoxSpec, cfg: &RcConfig) -> ClusterLabeling {
    ClusterLabeling::assemble(bx, cfg, false)
}

/// Number of clusters `k(ω)`.
pub fn cluster_count(bx: &BoxSpec, cfg: &RcConfig) -> usize {
    ClusterLabeling::build(bx, cfg).n_clusters()
}

/// Whether two points of the box lie in one cluster.
pub fn connected(
    bx: &BoxSpec,
    cfg: &RcConfig,
    p: (i64, f64),
    q: (i64, f64),
) -> Result<bool, GeometryError> {
    let lab = ClusterLabeling::build(bx, cfg);
    Ok(lab.label_of_point(p.0, p.1)? == lab.label_of_point(q.0, q.1)?)
}

impl ClusterLabeling {
    /// Segments merged across bridges, with side wiring applied.
    pub fn build(bx: &BoxSpec, cfg: &RcConfig) -> Self {
        Self::assemble(bx, cfg, true)
    }

    fn assemble(bx: &BoxSpec, cfg: &RcConfig, merge: bool) -> Self {
        let width = bx.width();
        let periodic = bx.is_periodic();
        let cuts: Vec<Vec<f64>> = (0..width)
            .map(|i| {
                let mut c = cfg.deaths()[i].clone();
                if bx.is_slit_index(i) {
                    let p = c.partition_point(|&d| d < 0.0);
                    c.insert(p, 0.0);
                }
                c
            })
            .collect();
        let mut offsets = Vec::with_capacity(width + 1);
        let mut total = 0;
        for c in &cuts {
            offsets.push(total);
            total += n_segments(c.len(), periodic);
        }
        offsets.push(total);

        let wired = merge && bx.bc() == SideBc::Wired;
        let mut uf = UnionFind::new(total + wired as usize);
        if merge {
            let view = SegmentView::new(bx, cfg);
            for (p, bs) in cfg.bridges().iter().enumerate() {
                for &time in bs {
                    let a = view.segment_at(p, time);
                    let b = view.segment_at(p + 1, time);
                    uf.union(offsets[p] + a.index, offsets[p + 1] + b.index);
                }
            }
        }
        if wired {
            let ghost = total;
            for line in [0, width - 1] {
                for s in offsets[line]..offsets[line + 1] {
                    uf.union(ghost, s);
                }
            }
        }
        let mut dense = vec![usize::MAX; uf.len()];
        let mut labels = Vec::with_capacity(total);
        let mut n_clusters = 0;
        for s in 0..total {
            let r = uf.find(s);
            if dense[r] == usize::MAX {
                dense[r] = n_clusters;
                n_clusters += 1;
            }
            labels.push(dense[r]);
        }
        Self {
            bx: bx.clone(),
            cuts,
            offsets,
            labels,
            n_clusters,
        }
    }

    pub fn boxspec(&self) -> &BoxSpec {
        &self.bx
    }

    /// `k(ω)`.
    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn n_segments(&self) -> usize {
        self.labels.len()
    }

    pub fn segments_on(&self, line: usize) -> usize {
        self.offsets[line + 1] - self.offsets[line]
    }

    /// Merged cut times (deaths and slit) on line index `line`.
    pub fn cuts(&self, line: usize) -> &[f64] {
        &self.cuts[line]
    }

    pub fn segment_at(&self, line: usize, time: f64) -> Segment {
        let c = &self.cuts[line][..];
        Segment {
            line,
            index: index_from_count(c.count_le(time), c.len(), self.bx.is_periodic()),
        }
    }

    pub fn segment_below(&self, line: usize, time: f64) -> Segment {
        let c = &self.cuts[line][..];
        Segment {
            line,
            index: index_from_count(c.count_lt(time), c.len(), self.bx.is_periodic()),
        }
    }

    /// Time pieces (one, or two for a wrapping periodic segment).
    pub fn pieces(&self, seg: Segment) -> Vec<(f64, f64)> {
        let (p, n) = pieces(
            &self.cuts[seg.line][..],
            seg.index,
            self.bx.start(),
            self.bx.end(),
            self.bx.is_periodic(),
        );
        p[..n].to_vec()
    }

    pub fn label(&self, seg: Segment) -> usize {
        self.labels[self.offsets[seg.line] + seg.index]
    }

    pub fn label_of_point(&self, line: i64, time: f64) -> Result<usize, GeometryError> {
        if !self.bx.contains_time(time) {
            return Err(GeometryError::PointOutside { line, time });
        }
        let i = self
            .bx
            .line_index(line)
            .map_err(|_| GeometryError::PointOutside { line, time })?;
        Ok(self.label(self.segment_at(i, time)))
    }

    /// Label of `x⁺`.
    pub fn slit_upper(&self, x: i64) -> Result<usize, GeometryError> {
        let i = self.slit_line(x)?;
        Ok(self.label(self.segment_at(i, 0.0)))
    }

    /// Label of `x⁻`.
    pub fn slit_lower(&self, x: i64) -> Result<usize, GeometryError> {
        let i = self.slit_line(x)?;
        Ok(self.label(self.segment_below(i, 0.0)))
    }

    fn slit_line(&self, x: i64) -> Result<usize, GeometryError> {
        let i = self.bx.line_index(x)?;
        if !self.bx.is_slit_index(i) {
            return Err(GeometryError::NotOnSlit { line: x });
        }
        Ok(i)
    }

    /// Labels of every cluster meeting `region`.
    pub fn region_labels(&self, region: &Region) -> Result<Vec<usize>, GeometryError> {
        let mut out: Vec<usize> = match *region {
            Region::Point { line, time } => vec![self.label_of_point(line, time)?],
            Region::SlitUpper(x) => vec![self.slit_upper(x)?],
            Region::SlitLower(x) => vec![self.slit_lower(x)?],
            Region::Interval { line, lo, hi } => {
                if !(self.bx.contains_time(lo) && self.bx.contains_time(hi) && lo <= hi) {
                    return Err(GeometryError::PointOutside { line, time: lo });
                }
                let i = self.bx.line_index(line)?;
                (0..self.segments_on(i))
                    .map(|index| Segment { line: i, index })
                    .filter(|s| self.pieces(*s).iter().any(|&(a, b)| a <= hi && lo <= b))
                    .map(|s| self.label(s))
                    .collect()
            }
            Region::Sides | Region::Boundary => {
                let last = self.bx.width() - 1;
                let mut v: Vec<usize> = self.labels[self.offsets[0]..self.offsets[1]].to_vec();
                v.extend_from_slice(&self.labels[self.offsets[last]..self.offsets[last + 1]]);
                if matches!(region, Region::Boundary) && !self.bx.is_periodic() {
                    for line in 0..=last {
                        v.push(self.labels[self.offsets[line]]);
                        v.push(self.labels[self.offsets[line + 1] - 1]);
                    }
                }
                v
            }
        };
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// `A ↔ B` evaluated on the labeling.
    pub fn joins(&self, a: &[Region], b: &[Region]) -> Result<bool, GeometryError> {
        let mut la = Vec::new();
        for r in a {
            la.extend(self.region_labels(r)?);
        }
        la.sort_unstable();
        for r in b {
            for l in self.region_labels(r)? {
                if la.binary_search(&l).is_ok() {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}
