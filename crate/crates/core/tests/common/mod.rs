#![allow(dead_code)]

use std::collections::VecDeque;

use isingrc::continuum::{BoxSpec, Event, RcConfig, SideBc};
use rand::Rng;

/// A node of the point graph: `(line, time, lower)` where `lower` marks the
/// vertex just below the slit.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Node {
    line: i64,
    time: f64,
    lower: bool,
}

/// Connectivity by exhaustive search on an explicit point graph.
///
/// Each line carries nodes at its ends, at every death, at both ends of every
/// bridge touching it, at each query time and at the midpoint of every gap
/// between consecutive such times. Consecutive nodes on a line are joined
/// unless a death lies in `(lower, upper]` or the slit separates them; a
/// bridge joins its two endpoints; periodic boxes join the top node to the
/// bottom node; wired sides add one ghost node joined to both side lines.
pub struct PointGraph {
    nodes: Vec<Node>,
    adj: Vec<Vec<usize>>,
    /// Index of the ghost node for wired sides.
    ghost: Option<usize>,
}

impl PointGraph {
    pub fn new(bx: &BoxSpec, events: &[Event], queries: &[(i64, f64)]) -> Self {
        let slit = bx.slit();
        let on_slit = |x: i64| slit.is_some_and(|l| (0..=l as i64).contains(&x));
        let mut nodes = Vec::new();
        let mut adj: Vec<Vec<usize>> = Vec::new();
        let mut line_nodes: Vec<Vec<usize>> = Vec::new();
        for x in bx.lines() {
            let mut times = vec![bx.start(), bx.end()];
            let mut deaths = Vec::new();
            for e in events {
                match *e {
                    Event::Death { line, time } if line == x => {
                        times.push(time);
                        deaths.push(time);
                    }
                    Event::Bridge { line, time } if line == x || line + 1 == x => times.push(time),
                    _ => {}
                }
            }
            times.extend(queries.iter().filter(|q| q.0 == x).map(|q| q.1));
            if on_slit(x) {
                times.push(0.0);
            }
            times.sort_by(f64::total_cmp);
            times.dedup();
            let mids: Vec<f64> = times.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            times.extend(mids);
            times.sort_by(f64::total_cmp);
            let mut seq: Vec<Node> = Vec::new();
            for &t in &times {
                if on_slit(x) && t == 0.0 {
                    seq.push(Node { line: x, time: t, lower: true });
                }
                seq.push(Node { line: x, time: t, lower: false });
            }
            let base = nodes.len();
            let ids: Vec<usize> = (base..base + seq.len()).collect();
            nodes.extend(seq.iter().copied());
            adj.extend(seq.iter().map(|_| Vec::new()));
            for i in 1..seq.len() {
                let (lo, hi) = (seq[i - 1], seq[i]);
                let cut = lo.time == hi.time || deaths.iter().any(|&d| lo.time < d && d <= hi.time);
                if !cut {
                    adj[ids[i - 1]].push(ids[i]);
                    adj[ids[i]].push(ids[i - 1]);
                }
            }
            if bx.is_periodic() {
                let (first, last) = (ids[0], *ids.last().expect("line has nodes"));
                adj[first].push(last);
                adj[last].push(first);
            }
            line_nodes.push(ids);
        }
        let index = |line: i64| (line - bx.first_line()) as usize;
        for e in events {
            if let Event::Bridge { line, time } = *e {
                let find = |l: i64| -> usize {
                    *line_nodes[index(l)]
                        .iter()
                        .find(|&&n| nodes[n].time == time && !nodes[n].lower)
                        .expect("bridge endpoint node")
                };
                let (a, b) = (find(line), find(line + 1));
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        let ghost = (bx.bc() == SideBc::Wired).then(|| {
            let g = nodes.len();
            nodes.push(Node { line: i64::MIN, time: 0.0, lower: false });
            adj.push(Vec::new());
            for l in [bx.first_line(), bx.last_line()] {
                for &n in &line_nodes[index(l)] {
                    adj[g].push(n);
                    adj[n].push(g);
                }
            }
            g
        });
        Self { nodes, adj, ghost }
    }

    fn node(&self, line: i64, time: f64, lower: bool) -> usize {
        self.nodes
            .iter()
            .position(|n| n.line == line && n.time == time && n.lower == lower)
            .expect("query point is a node")
    }

    /// Component index of every node by breadth-first search.
    fn components(&self) -> (Vec<usize>, usize) {
        let mut comp = vec![usize::MAX; self.nodes.len()];
        let mut count = 0;
        for s in 0..self.nodes.len() {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adj[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        (comp, count)
    }

    /// Number of clusters.
    pub fn cluster_count(&self) -> usize {
        self.components().1
    }

    pub fn connected(&self, p: (i64, f64), q: (i64, f64)) -> bool {
        let (comp, _) = self.components();
        comp[self.node(p.0, p.1, false)] == comp[self.node(q.0, q.1, false)]
    }

    /// Whether `x⁺` and `x⁻` of two slit sites are connected; `upper` selects the side.
    pub fn slit_connected(&self, x: (i64, bool), y: (i64, bool)) -> bool {
        let (comp, _) = self.components();
        comp[self.node(x.0, 0.0, !x.1)] == comp[self.node(y.0, 0.0, !y.1)]
    }

    /// Whether a point reaches one of the two vertical sides.
    pub fn reaches_sides(&self, bx: &BoxSpec, p: (i64, f64)) -> bool {
        let (comp, _) = self.components();
        let c = comp[self.node(p.0, p.1, false)];
        if self.ghost.is_some_and(|g| comp[g] == c) {
            return true;
        }
        self.nodes
            .iter()
            .zip(&comp)
            .any(|(n, &k)| k == c && (n.line == bx.first_line() || n.line == bx.last_line()))
    }
}

/// A random time strictly inside the box, away from the slit time.
pub fn random_time<R: Rng>(bx: &BoxSpec, rng: &mut R) -> f64 {
    loop {
        let t = rng.random_range(bx.start()..bx.end());
        if t > bx.start() && t != 0.0 {
            return t;
        }
    }
}

/// Up to `max_events` random deaths and bridges; `None` if two events collide.
pub fn random_config<R: Rng>(bx: &BoxSpec, max_events: usize, rng: &mut R) -> Option<(Vec<Event>, RcConfig)> {
    let n = rng.random_range(0..=max_events);
    let events: Vec<Event> = (0..n)
        .map(|_| {
            let time = random_time(bx, rng);
            if bx.n_pairs() > 0 && rng.random_bool(0.5) {
                let line = rng.random_range(bx.first_line()..bx.last_line());
                Event::Bridge { line, time }
            } else {
                let line = rng.random_range(bx.first_line()..=bx.last_line());
                Event::Death { line, time }
            }
        })
        .collect();
    let cfg = RcConfig::from_events(bx, &events).ok()?;
    Some((events, cfg))
}

/// `P(N = n)` for the death count on a single periodic line of height `β` at
/// cluster weight `q`: `k = max(1, N)` so the law is proportional to
/// `(δβ)^n/n! · q^{max(1,n)}`, with normaliser `q + e^{qδβ} − 1`.
pub fn single_line_death_law(delta: f64, beta: f64, q: f64, n: usize) -> f64 {
    let mu = delta * beta;
    let z = q + (q * mu).exp() - 1.0;
    let log_fact: f64 = (1..=n).map(|i| (i as f64).ln()).sum();
    let k = n.max(1) as f64;
    (n as f64 * mu.ln() - log_fact + k * q.ln()).exp() / z
}

/// The box shapes exercised by the connectivity comparisons.
pub fn oracle_boxes() -> Vec<BoxSpec> {
    vec![
        BoxSpec::new(0, 2, 0.0, 1.0).unwrap(),
        BoxSpec::new(-1, 1, -1.0, 1.0).unwrap().periodic(true),
        BoxSpec::new(0, 2, 0.0, 1.0).unwrap().side_bc(SideBc::Wired),
        BoxSpec::slit_box(1, 1, 2.0).unwrap(),
        BoxSpec::new(0, 0, 0.0, 1.0).unwrap().periodic(true),
    ]
}

/// Compare the library against the point-graph oracle on one random
/// configuration with up to `max_events` events. Returns `Ok(false)` when
/// the draw had colliding events and was skipped.
pub fn compare_with_oracle<R: Rng>(bx: &BoxSpec, max_events: usize, rng: &mut R) -> Result<bool, String> {
    use isingrc::continuum::{cluster_count, connected, reaches_boundary, Boundary, ClusterLabeling, Region};
    let Some((events, cfg)) = random_config(bx, max_events, rng) else {
        return Ok(false);
    };
    let queries: Vec<(i64, f64)> = (0..4)
        .map(|_| (rng.random_range(bx.first_line()..=bx.last_line()), random_time(bx, rng)))
        .collect();
    let oracle = PointGraph::new(bx, &events, &queries);
    let ctx = || format!("box {bx:?}, events {events:?}, queries {queries:?}");
    let k = cluster_count(bx, &cfg);
    if k != oracle.cluster_count() {
        return Err(format!("cluster count {k} vs oracle {} for {}", oracle.cluster_count(), ctx()));
    }
    for i in 0..queries.len() {
        for j in i + 1..queries.len() {
            let lib = connected(bx, &cfg, queries[i], queries[j]).map_err(|e| e.to_string())?;
            if lib != oracle.connected(queries[i], queries[j]) {
                return Err(format!("connectivity of {:?}, {:?} differs for {}", queries[i], queries[j], ctx()));
            }
        }
        let src = [Region::Point { line: queries[i].0, time: queries[i].1 }];
        let lib = reaches_boundary(bx, &cfg, &src, Boundary::Sides).map_err(|e| e.to_string())?;
        if lib != oracle.reaches_sides(bx, queries[i]) {
            return Err(format!("side reaching of {:?} differs for {}", queries[i], ctx()));
        }
    }
    if let Some(l) = bx.slit() {
        let lab = ClusterLabeling::build(bx, &cfg);
        let label = |x: i64, upper: bool| if upper { lab.slit_upper(x) } else { lab.slit_lower(x) };
        let vertices: Vec<(i64, bool)> = (0..=l as i64).flat_map(|x| [(x, true), (x, false)]).collect();
        for (i, &a) in vertices.iter().enumerate() {
            for &b in &vertices[i + 1..] {
                let lib = label(a.0, a.1).map_err(|e| e.to_string())? == label(b.0, b.1).map_err(|e| e.to_string())?;
                if lib != oracle.slit_connected(a, b) {
                    return Err(format!("slit vertices {a:?}, {b:?} differ for {}", ctx()));
                }
            }
        }
    }
    Ok(true)
}
