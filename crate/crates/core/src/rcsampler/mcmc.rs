use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::direct::uniform_time;
use super::{stream, RcParams, Rates, SamplerError};
use crate::continuum::{cluster_count, BoxSpec, RcConfig, SegmentView};

/// How the change in cluster count is evaluated for each proposal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaK {
    /// Full recount below 512 events, local search above.
    #[default]
    Auto,
    /// Relabel the whole configuration before and after the move.
    Recount,
    /// Decide by a bidirectional search between the two affected segments.
    LocalSearch,
}

const RECOUNT_LIMIT: usize = 512;

/// The four single-event moves, each proposed with probability 1/4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    InsertDeath,
    DeleteDeath,
    InsertBridge,
    DeleteBridge,
}

/// Metropolis–Hastings acceptance probability.
///
/// For insertions `ratio = mass/(n+1)`, for deletions `ratio = n/mass`, where
/// `mass` is the expected number of events of that kind and `n` the current count.
pub fn acceptance(q: f64, delta_k: i32, ratio: f64) -> f64 {
    (q.powi(delta_k) * ratio).min(1.0)
}

/// Unnormalized density of the random-cluster measure with respect to
/// unit-rate Poisson processes: `Π δ · Π λ · q^{k(ω)}`.
pub fn target_density(bx: &BoxSpec, params: &RcParams, cfg: &RcConfig) -> Result<f64, SamplerError> {
    let rates = params.rates(bx)?;
    let mut w = params.q().powi(cluster_count(bx, cfg) as i32);
    for (r, ds) in rates.death.iter().zip(cfg.deaths()) {
        w *= r.powi(ds.len() as i32);
    }
    for (r, bs) in rates.bridge.iter().zip(cfg.bridges()) {
        w *= r.powi(bs.len() as i32);
    }
    Ok(w)
}

/// Density of one chain step from `from` to `to`, which must differ by one event.
///
/// For an insertion this is a density in the new event's time; for a deletion
/// it is a probability. Detailed balance reads
/// `target(ω)·K(ω→ω') = target(ω')·K(ω'→ω)`.
pub fn transition_density(
    bx: &BoxSpec,
    params: &RcParams,
    from: &RcConfig,
    to: &RcConfig,
) -> Result<f64, SamplerError> {
    let rates = params.rates(bx)?;
    let (mv, index) = single_difference(from, to).ok_or(SamplerError::NotAdjacent)?;
    let dk = cluster_count(bx, to) as i32 - cluster_count(bx, from) as i32;
    let q = params.q();
    let (md, mb) = (rates.death_mass(), rates.bridge_mass());
    let (nd, nb) = (from.n_deaths() as f64, from.n_bridges() as f64);
    let d = match mv {
        Move::InsertDeath => {
            let propose = rates.death[index] / (md / bx.height()) / bx.height();
            propose * acceptance(q, dk, md / (nd + 1.0))
        }
        Move::DeleteDeath => acceptance(q, dk, nd / md) / nd,
        Move::InsertBridge => {
            let propose = rates.bridge[index] / (mb / bx.height()) / bx.height();
            propose * acceptance(q, dk, mb / (nb + 1.0))
        }
        Move::DeleteBridge => acceptance(q, dk, nb / mb) / nb,
    };
    Ok(d / 4.0)
}

/// The move that takes `from` to `to` and the affected line or pair index.
fn single_difference(from: &RcConfig, to: &RcConfig) -> Option<(Move, usize)> {
    let diff = |a: &[Vec<f64>], b: &[Vec<f64>]| -> Option<Vec<(usize, isize)>> {
        let mut out = Vec::new();
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            if x != y {
                let d = y.len() as isize - x.len() as isize;
                let (small, big) = if d > 0 { (x, y) } else { (y, x) };
                if d.abs() != 1 || !small.iter().all(|t| big.contains(t)) {
                    return None;
                }
                out.push((i, d));
            }
        }
        Some(out)
    };
    let dd = diff(from.deaths(), to.deaths())?;
    let bd = diff(from.bridges(), to.bridges())?;
    match (dd.as_slice(), bd.as_slice()) {
        ([(i, 1)], []) => Some((Move::InsertDeath, *i)),
        ([(i, -1)], []) => Some((Move::DeleteDeath, *i)),
        ([], [(p, 1)]) => Some((Move::InsertBridge, *p)),
        ([], [(p, -1)]) => Some((Move::DeleteBridge, *p)),
        _ => None,
    }
}

/// A birth/death Metropolis–Hastings chain with one mutable configuration.
#[derive(Debug, Clone)]
pub struct Chain {
    bx: BoxSpec,
    rates: Rates,
    q: f64,
    cfg: RcConfig,
    rng: ChaCha8Rng,
    strategy: DeltaK,
    /// Cluster count of `cfg`, tracked while the recount path is in use.
    k: Option<usize>,
    proposed: u64,
    accepted: u64,
}

impl Chain {
    /// Start from the empty configuration on stream `(seed, chain)`.
    pub fn new(bx: &BoxSpec, params: &RcParams, seed: u64, chain: u64) -> Result<Self, SamplerError> {
        Self::from_config(bx, params, RcConfig::empty(bx), seed, chain)
    }

    pub fn from_config(
        bx: &BoxSpec,
        params: &RcParams,
        cfg: RcConfig,
        seed: u64,
        chain: u64,
    ) -> Result<Self, SamplerError> {
        // revalidate so a hand-built configuration cannot break the invariants
        let cfg = RcConfig::from_events(bx, &cfg.events(bx))?;
        Ok(Self {
            bx: bx.clone(),
            rates: params.rates(bx)?,
            q: params.q(),
            cfg,
            rng: stream(seed, chain),
            strategy: DeltaK::Auto,
            k: None,
            proposed: 0,
            accepted: 0,
        })
    }

    pub fn with_strategy(mut self, strategy: DeltaK) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn config(&self) -> &RcConfig {
        &self.cfg
    }

    pub fn into_config(self) -> RcConfig {
        self.cfg
    }

    pub fn boxspec(&self) -> &BoxSpec {
        &self.bx
    }

    /// Fraction of proposals accepted so far.
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// Moves per sweep: the expected event count of the reference Poisson
    /// process plus one. Fixed per chain so that recording at sweep ends keeps
    /// the target invariant; a length read from the current state would not.
    pub fn sweep_len(&self) -> usize {
        (self.rates.death_mass() + self.rates.bridge_mass()).ceil() as usize + 1
    }

    /// One sweep of [`Self::sweep_len`] single moves.
    pub fn sweep(&mut self) {
        for _ in 0..self.sweep_len() {
            self.step();
        }
    }

    /// One proposal; returns whether it was accepted.
    pub fn step(&mut self) -> bool {
        self.proposed += 1;
        let mv = match (self.rng.random::<f64>() * 4.0) as usize {
            0 => Move::InsertDeath,
            1 => Move::DeleteDeath,
            2 => Move::InsertBridge,
            _ => Move::DeleteBridge,
        };
        let ok = match mv {
            Move::InsertDeath => self.insert_death(),
            Move::DeleteDeath => self.delete_death(),
            Move::InsertBridge => self.insert_bridge(),
            Move::DeleteBridge => self.delete_bridge(),
        };
        self.accepted += ok as u64;
        ok
    }

    fn use_recount(&self) -> bool {
        match self.strategy {
            DeltaK::Recount => true,
            DeltaK::LocalSearch => false,
            DeltaK::Auto => self.cfg.n_events() < RECOUNT_LIMIT,
        }
    }

    fn current_k(&mut self) -> usize {
        match self.k {
            Some(k) => k,
            None => {
                let k = cluster_count(&self.bx, &self.cfg);
                self.k = Some(k);
                k
            }
        }
    }

    fn is_slit_time(&self, time: f64) -> bool {
        self.bx.slit().is_some() && time == 0.0
    }

    /// Accept with probability `acceptance(q, dk, ratio)`.
    fn coin(&mut self, dk: i32, ratio: f64) -> bool {
        let a = acceptance(self.q, dk, ratio);
        a >= 1.0 || self.rng.random::<f64>() < a
    }

    /// Whether this move evaluates `Δk` by recounting; also primes the cached count.
    fn begin(&mut self) -> Option<bool> {
        if self.q == 1.0 {
            return None;
        }
        let recount = self.use_recount();
        if recount {
            self.current_k();
        }
        Some(recount)
    }

    /// Decide a move that has already been applied to `cfg`. `mode` comes from
    /// [`Self::begin`]; `local` gives `Δk` by local search; `undo` reverts the move.
    fn settle(
        &mut self,
        mode: Option<bool>,
        ratio: f64,
        local: impl FnOnce(&BoxSpec, &RcConfig) -> i32,
        undo: impl FnOnce(&mut RcConfig),
    ) -> bool {
        let (dk, after) = match mode {
            None => (0, None),
            Some(true) => {
                let before = self.k.expect("cluster count primed by begin");
                let after = cluster_count(&self.bx, &self.cfg);
                (after as i32 - before as i32, Some(after))
            }
            Some(false) => (local(&self.bx, &self.cfg), None),
        };
        if self.coin(dk, ratio) {
            self.k = after;
            true
        } else {
            undo(&mut self.cfg);
            false
        }
    }

    fn insert_death(&mut self) -> bool {
        let (u, t) = (self.rng.random::<f64>(), uniform_time(&self.bx, &mut self.rng));
        let i = self.rates.pick_line(u);
        let Some(time) = t else { return false };
        if self.is_slit_time(time) || self.cfg.occupied_near(i, time) {
            return false;
        }
        let ratio = self.rates.death_mass() / (self.cfg.n_deaths() + 1) as f64;
        let mode = self.begin();
        let pos = self.cfg.insert_death(i, time);
        self.settle(
            mode,
            ratio,
            |bx, cfg| {
                let view = SegmentView::new(bx, cfg);
                let below = view.segment_below(i, time);
                let above = view.segment_at(i, time);
                (below != above && !view.segments_connected(below, above)) as i32
            },
            |cfg| {
                cfg.remove_death(i, pos);
            },
        )
    }

    fn delete_death(&mut self) -> bool {
        let n = self.cfg.n_deaths();
        if n == 0 {
            return false;
        }
        let (i, pos) = nth_event(self.cfg.deaths(), self.rng.random_range(0..n));
        let ratio = n as f64 / self.rates.death_mass();
        let mode = self.begin();
        // connectivity across the cut must be read before the cut is removed
        let local_dk = if mode == Some(false) {
            let view = SegmentView::new(&self.bx, &self.cfg);
            let time = self.cfg.deaths()[i][pos];
            let below = view.segment_below(i, time);
            let above = view.segment_at(i, time);
            -((below != above && !view.segments_connected(below, above)) as i32)
        } else {
            0
        };
        let time = self.cfg.remove_death(i, pos);
        self.settle(mode, ratio, |_, _| local_dk, |cfg| {
            cfg.insert_death(i, time);
        })
    }

    fn insert_bridge(&mut self) -> bool {
        if self.rates.bridge.is_empty() {
            return false;
        }
        let (u, t) = (self.rng.random::<f64>(), uniform_time(&self.bx, &mut self.rng));
        let p = self.rates.pick_pair(u);
        let Some(time) = t else { return false };
        if self.is_slit_time(time) || self.cfg.occupied_near(p, time) || self.cfg.occupied_near(p + 1, time) {
            return false;
        }
        let ratio = self.rates.bridge_mass() / (self.cfg.n_bridges() + 1) as f64;
        let mode = self.begin();
        let local_dk = if mode == Some(false) {
            let view = SegmentView::new(&self.bx, &self.cfg);
            -(!view.segments_connected(view.segment_at(p, time), view.segment_at(p + 1, time)) as i32)
        } else {
            0
        };
        let pos = self.cfg.insert_bridge(p, time);
        self.settle(mode, ratio, |_, _| local_dk, |cfg| {
            cfg.remove_bridge(p, pos);
        })
    }

    fn delete_bridge(&mut self) -> bool {
        let n = self.cfg.n_bridges();
        if n == 0 {
            return false;
        }
        let (p, pos) = nth_event(self.cfg.bridges(), self.rng.random_range(0..n));
        let ratio = n as f64 / self.rates.bridge_mass();
        let mode = self.begin();
        let time = self.cfg.remove_bridge(p, pos);
        self.settle(
            mode,
            ratio,
            |bx, cfg| {
                let view = SegmentView::new(bx, cfg);
                !view.segments_connected(view.segment_at(p, time), view.segment_at(p + 1, time)) as i32
            },
            |cfg| {
                cfg.insert_bridge(p, time);
            },
        )
    }
}

/// `(line, position)` of the `j`-th event in line order.
fn nth_event(per_line: &[Vec<f64>], mut j: usize) -> (usize, usize) {
    for (i, v) in per_line.iter().enumerate() {
        if j < v.len() {
            return (i, j);
        }
        j -= v.len();
    }
    unreachable!("event index out of range")
}

/// One sweep from `config` on stream `(seed, 0)`.
pub fn mcmc_sweep(config: RcConfig, bx: &BoxSpec, params: &RcParams, seed: u64) -> Result<RcConfig, SamplerError> {
    let mut chain = Chain::from_config(bx, params, config, seed, 0)?;
    chain.sweep();
    Ok(chain.into_config())
}
