//! Space-time boxes, death/bridge configurations and their clusters.
//!
//! A box is a set of integer time-lines `a..=b`, each a copy of `[s, t]`.
//! Deaths cut a line; bridges join two adjacent lines at one instant. Clusters
//! are unions of death-free line segments glued by bridges, so connectivity is
//! resolved on the graph of maximal segments rather than in the plane.
//!
//! A point that sits exactly on a cut (a death or the slit) belongs to the
//! segment above it. In particular `(x, 0)` on a slit line is `x⁺`.

mod format;
mod geometry;
mod graph;
mod labeling;
mod union_find;

pub use format::{read_config, write_config};
pub use geometry::{parallelogram_k, separating_sets, Equator, Parallelogram, SeparatingSets, WallPiece};
pub use graph::{joined, reaches_boundary, Boundary, SegmentView};
pub use labeling::{cluster_count, connected, segments_of, ClusterLabeling, Segment};
pub use union_find::UnionFind;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("empty line range {a}..={b}")]
    EmptyLines { a: i64, b: i64 },
    #[error("time interval [{s}, {t}] must satisfy s < t")]
    EmptyTime { s: f64, t: f64 },
    #[error("slit [0, {len}] does not fit inside lines {a}..={b} and times ({s}, {t})")]
    SlitOutside {
        len: usize,
        a: i64,
        b: i64,
        s: f64,
        t: f64,
    },
    #[error("line {line} outside the box")]
    LineOutside { line: i64 },
    #[error("time {time} outside the open interval ({s}, {t})")]
    TimeOutside { time: f64, s: f64, t: f64 },
    #[error("event time {time} used twice")]
    CoincidentTimes { time: f64 },
    #[error("point ({line}, {time}) outside the box")]
    PointOutside { line: i64, time: f64 },
    #[error("line {line} is not on the slit")]
    NotOnSlit { line: i64 },
    #[error("config parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Boundary condition on the two vertical sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SideBc {
    #[default]
    Free,
    /// Every segment on the outermost two lines belongs to one cluster.
    Wired,
}

/// A box `[a, b] × [s, t]` with optional top/bottom identification and slit.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpec {
    first_line: i64,
    last_line: i64,
    start: f64,
    end: f64,
    periodic_tb: bool,
    side_bc: SideBc,
    slit: Option<usize>,
}

impl BoxSpec {
    /// Free, non-periodic box without a slit.
    pub fn new(a: i64, b: i64, s: f64, t: f64) -> Result<Self, GeometryError> {
        if a > b {
            return Err(GeometryError::EmptyLines { a, b });
        }
        if !s.is_finite() || !t.is_finite() || s >= t {
            return Err(GeometryError::EmptyTime { s, t });
        }
        Ok(Self {
            first_line: a,
            last_line: b,
            start: s,
            end: t,
            periodic_tb: false,
            side_bc: SideBc::Free,
            slit: None,
        })
    }

    /// `[-m, m+L] × [-β/2, β/2]` with a slit along `[0, L] × {0}`, free on the whole boundary.
    pub fn slit_box(m: usize, l: usize, beta: f64) -> Result<Self, GeometryError> {
        Self::new(-(m as i64), (m + l) as i64, -beta / 2.0, beta / 2.0)?.with_slit(l)
    }

    /// `[-m, m+L] × [-β/2, β/2]`, top/bottom periodic, free sides, no slit.
    pub fn chain_box(m: usize, l: usize, beta: f64) -> Result<Self, GeometryError> {
        Ok(Self::new(-(m as i64), (m + l) as i64, -beta / 2.0, beta / 2.0)?.periodic(true))
    }

    pub fn periodic(mut self, periodic_tb: bool) -> Self {
        self.periodic_tb = periodic_tb;
        self
    }

    pub fn side_bc(mut self, bc: SideBc) -> Self {
        self.side_bc = bc;
        self
    }

    pub fn with_slit(mut self, len: usize) -> Result<Self, GeometryError> {
        if self.first_line > 0 || (len as i64) > self.last_line || !(self.start < 0.0 && 0.0 < self.end) {
            return Err(GeometryError::SlitOutside {
                len,
                a: self.first_line,
                b: self.last_line,
                s: self.start,
                t: self.end,
            });
        }
        self.slit = Some(len);
        Ok(self)
    }

    pub fn without_slit(mut self) -> Self {
        self.slit = None;
        self
    }

    pub fn first_line(&self) -> i64 {
        self.first_line
    }

    pub fn last_line(&self) -> i64 {
        self.last_line
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn height(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic_tb
    }

    pub fn bc(&self) -> SideBc {
        self.side_bc
    }

    pub fn slit(&self) -> Option<usize> {
        self.slit
    }

    /// Number of time-lines.
    pub fn width(&self) -> usize {
        (self.last_line - self.first_line + 1) as usize
    }

    pub fn n_pairs(&self) -> usize {
        self.width() - 1
    }

    pub fn lines(&self) -> std::ops::RangeInclusive<i64> {
        self.first_line..=self.last_line
    }

    /// Zero-based index of line `x`.
    pub fn line_index(&self, x: i64) -> Result<usize, GeometryError> {
        if x < self.first_line || x > self.last_line {
            return Err(GeometryError::LineOutside { line: x });
        }
        Ok((x - self.first_line) as usize)
    }

    /// Whether line index `i` carries a slit cut at time 0.
    pub fn is_slit_index(&self, i: usize) -> bool {
        match self.slit {
            Some(len) => {
                let x = self.first_line + i as i64;
                (0..=len as i64).contains(&x)
            }
            None => false,
        }
    }

    pub fn contains_time(&self, time: f64) -> bool {
        self.start <= time && time <= self.end
    }
}

/// One death or bridge. A bridge at `line` joins `line` and `line + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Death { line: i64, time: f64 },
    Bridge { line: i64, time: f64 },
}

/// A finite configuration of deaths and bridges, stored per line and per adjacent pair.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RcConfig {
    deaths: Vec<Vec<f64>>,
    bridges: Vec<Vec<f64>>,
}

impl RcConfig {
    pub fn empty(bx: &BoxSpec) -> Self {
        Self {
            deaths: vec![Vec::new(); bx.width()],
            bridges: vec![Vec::new(); bx.n_pairs()],
        }
    }

    /// Validates that every event lies inside the box and all times are distinct
    /// (including the slit instant 0 when the box has a slit).
    pub fn from_events(bx: &BoxSpec, events: &[Event]) -> Result<Self, GeometryError> {
        let mut cfg = Self::empty(bx);
        let mut times = Vec::with_capacity(events.len() + 1);
        if bx.slit.is_some() {
            times.push(0.0);
        }
        for ev in events {
            let (line, time, is_bridge) = match *ev {
                Event::Death { line, time } => (line, time, false),
                Event::Bridge { line, time } => (line, time, true),
            };
            // fold -0.0 into 0.0 so the slit instant compares equal
            let time = time + 0.0;
            let i = bx.line_index(line)?;
            if is_bridge && i + 1 >= bx.width() {
                return Err(GeometryError::LineOutside { line: line + 1 });
            }
            if !(bx.start < time && time < bx.end) {
                return Err(GeometryError::TimeOutside {
                    time,
                    s: bx.start,
                    t: bx.end,
                });
            }
            times.push(time);
            if is_bridge {
                cfg.bridges[i].push(time);
            } else {
                cfg.deaths[i].push(time);
            }
        }
        times.sort_by(f64::total_cmp);
        if let Some(w) = times.windows(2).find(|w| w[0] == w[1]) {
            return Err(GeometryError::CoincidentTimes { time: w[0] });
        }
        cfg.deaths.iter_mut().for_each(|v| v.sort_by(f64::total_cmp));
        cfg.bridges.iter_mut().for_each(|v| v.sort_by(f64::total_cmp));
        Ok(cfg)
    }

    /// Sorted death times on each line, indexed from the first line of the box.
    pub fn deaths(&self) -> &[Vec<f64>] {
        &self.deaths
    }

    /// Sorted bridge times on each adjacent pair `(i, i+1)`.
    pub fn bridges(&self) -> &[Vec<f64>] {
        &self.bridges
    }

    pub fn n_deaths(&self) -> usize {
        self.deaths.iter().map(Vec::len).sum()
    }

    pub fn n_bridges(&self) -> usize {
        self.bridges.iter().map(Vec::len).sum()
    }

    pub fn n_events(&self) -> usize {
        self.n_deaths() + self.n_bridges()
    }

    pub fn events(&self, bx: &BoxSpec) -> Vec<Event> {
        let a = bx.first_line;
        let mut out = Vec::with_capacity(self.n_events());
        for (i, ds) in self.deaths.iter().enumerate() {
            out.extend(ds.iter().map(|&time| Event::Death { line: a + i as i64, time }));
        }
        for (i, bs) in self.bridges.iter().enumerate() {
            out.extend(bs.iter().map(|&time| Event::Bridge { line: a + i as i64, time }));
        }
        out
    }

    pub(crate) fn from_sorted_parts(deaths: Vec<Vec<f64>>, bridges: Vec<Vec<f64>>) -> Self {
        Self { deaths, bridges }
    }

    /// Whether `time` on line index `i` collides with a death there or a bridge touching it.
    pub(crate) fn occupied_near(&self, i: usize, time: f64) -> bool {
        let hit = |v: &Vec<f64>| v.binary_search_by(|p| p.total_cmp(&time)).is_ok();
        hit(&self.deaths[i])
            || (i > 0 && hit(&self.bridges[i - 1]))
            || (i < self.bridges.len() && hit(&self.bridges[i]))
    }

    pub(crate) fn insert_death(&mut self, i: usize, time: f64) -> usize {
        insert_sorted(&mut self.deaths[i], time)
    }

    pub(crate) fn remove_death(&mut self, i: usize, pos: usize) -> f64 {
        self.deaths[i].remove(pos)
    }

    pub(crate) fn insert_bridge(&mut self, p: usize, time: f64) -> usize {
        insert_sorted(&mut self.bridges[p], time)
    }

    pub(crate) fn remove_bridge(&mut self, p: usize, pos: usize) -> f64 {
        self.bridges[p].remove(pos)
    }
}

fn insert_sorted(v: &mut Vec<f64>, time: f64) -> usize {
    let pos = v.partition_point(|&x| x < time);
    v.insert(pos, time);
    pos
}

/// A subset of the box used as a source or target of connection events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Point { line: i64, time: f64 },
    /// `{line} × [lo, hi]`.
    Interval { line: i64, lo: f64, hi: f64 },
    /// The vertex `x⁺` just above the slit.
    SlitUpper(i64),
    /// The vertex `x⁻` just below the slit.
    SlitLower(i64),
    /// The two vertical sides `{a, b} × [s, t]`.
    Sides,
    /// The whole boundary: sides, plus top and bottom unless identified.
    Boundary,
}
