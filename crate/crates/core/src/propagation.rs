//! Spreading one kernel over the whole graph.
//!
//! The kernel is seeded on a most central vertex and moved across edges by
//! local translations. Scores add up along the way, and each vertex keeps the
//! cheapest placement that reaches it. Because step scores are nonnegative,
//! best-first settlement (as in Dijkstra's algorithm) reaches the fixed point
//! after one settlement per vertex.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par;
use crate::translations::{
    find_local_translation, DeformationScore, KernelPlacement, ScoreWeights,
};

/// Closeness centrality `1 / sum of hop distances`, per vertex.
pub fn closeness_centrality(g: &Graph) -> Result<Vec<f64>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(par::map_range(g.n(), |v| {
        let sum: usize = g.bfs_distances(v).iter().flatten().sum();
        if sum == 0 {
            0.0
        } else {
            1.0 / sum as f64
        }
    }))
}

/// Vertex with the largest closeness; the smallest id wins ties.
pub fn most_central_vertex(g: &Graph) -> Result<usize> {
    let c = closeness_centrality(g)?;
    let mut best = 0;
    for v in 1..c.len() {
        if c[v] > c[best] {
            best = v;
        }
    }
    Ok(best)
}

/// Kernel made of `center` and every vertex within `radius` hops, ordered by
/// (hop distance, id). Slot 0 is the center.
pub fn init_kernel(g: &Graph, center: usize, radius: usize) -> Result<KernelPlacement> {
    if center >= g.n() {
        return Err(Error::VertexRange {
            line: 0,
            vertex: center,
            n: g.n(),
        });
    }
    let dist = g.bfs_distances(center);
    let mut members: Vec<(usize, usize)> = dist
        .iter()
        .enumerate()
        .filter_map(|(v, d)| d.filter(|&d| d <= radius).map(|d| (d, v)))
        .collect();
    members.sort_unstable();
    let slots = members.into_iter().map(|(_, v)| Some(v)).collect();
    KernelPlacement::new(center, slots, DeformationScore::default())
}

/// Best kernel placement for every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementMap {
    seed: usize,
    k: usize,
    placements: Vec<Option<KernelPlacement>>,
}

impl PlacementMap {
    pub fn new(seed: usize, k: usize, placements: Vec<Option<KernelPlacement>>) -> Result<Self> {
        if seed >= placements.len() {
            return Err(Error::param(format!("seed {seed} out of range")));
        }
        for (v, p) in placements.iter().enumerate() {
            if let Some(p) = p {
                if p.center() != v {
                    return Err(Error::param(format!(
                        "placement stored at {v} is centered on {}",
                        p.center()
                    )));
                }
                if p.k() != k {
                    return Err(Error::param(format!(
                        "placement at {v} has {} slots, expected {k}",
                        p.k()
                    )));
                }
                if let Some(&w) = p.slots().iter().flatten().find(|&&w| w >= placements.len()) {
                    return Err(Error::param(format!(
                        "placement at {v} uses vertex {w} out of range"
                    )));
                }
            }
        }
        Ok(PlacementMap {
            seed,
            k,
            placements,
        })
    }

    pub fn n(&self) -> usize {
        self.placements.len()
    }

    pub fn seed(&self) -> usize {
        self.seed
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, v: usize) -> Option<&KernelPlacement> {
        self.placements.get(v).and_then(Option::as_ref)
    }

    pub fn placements(&self) -> &[Option<KernelPlacement>] {
        &self.placements
    }

    pub fn is_complete(&self) -> bool {
        self.placements.iter().all(Option::is_some)
    }

    pub fn report(&self) -> PlacementReport {
        placement_report(self)
    }
}

/// Heap entry ordered so that `BinaryHeap` pops the preferred placement first.
struct Pending(KernelPlacement);

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .preference_cmp(&self.0)
            .then_with(|| other.0.center().cmp(&self.0.center()))
    }
}

/// Moves `seed_kernel` to every vertex, keeping the least-deformed placement
/// per center.
///
/// Placements are settled in order of increasing accumulated score. When a
/// placement settles, the translations towards all its unsettled neighbors
/// are searched (concurrently under the `parallel` feature) and the
/// candidates are then merged in neighbor order, so the result does not
/// depend on the worker count.
pub fn propagate(
    g: &Graph,
    seed_kernel: &KernelPlacement,
    weights: ScoreWeights,
) -> Result<PlacementMap> {
    let n = g.n();
    let seed = seed_kernel.center();
    if seed >= n {
        return Err(Error::VertexRange {
            line: 0,
            vertex: seed,
            n,
        });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let start = KernelPlacement::new(
        seed,
        seed_kernel.slots().to_vec(),
        DeformationScore::default(),
    )?;
    let k = start.k();

    let mut best: Vec<Option<KernelPlacement>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[seed] = Some(start.clone());
    heap.push(Pending(start));

    while let Some(Pending(current)) = heap.pop() {
        let v = current.center();
        if settled[v] || best[v].as_ref() != Some(&current) {
            continue;
        }
        settled[v] = true;

        let targets: Vec<usize> = g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| !settled[w])
            .collect();
        let candidates = par::map_collect(&targets, |&w| {
            let (t, step) = find_local_translation(g, &current, w, weights)?;
            current.translate(&t, &step)
        });

        for (w, cand) in targets.into_iter().zip(candidates) {
            let cand = cand?;
            let better = match &best[w] {
                None => true,
                Some(b) => cand.preference_cmp(b) == Ordering::Less,
            };
            if better {
                best[w] = Some(cand.clone());
                heap.push(Pending(cand));
            }
        }
    }

    PlacementMap::new(seed, k, best)
}

/// True when no single translation step from a stored placement yields a
/// strictly better score at a neighboring center.
pub fn is_fixed_point(g: &Graph, pm: &PlacementMap, weights: ScoreWeights) -> Result<bool> {
    for v in 0..g.n() {
        let Some(p) = pm.get(v) else { continue };
        for &w in g.neighbors(v) {
            let (t, step) = find_local_translation(g, p, w, weights)?;
            let cand = p.translate(&t, &step)?;
            match pm.get(w) {
                None => return Ok(false),
                Some(q) if cand.score().rank_cmp(q.score()) == Ordering::Less => return Ok(false),
                _ => {}
            }
        }
    }
    Ok(true)
}

/// Summary of a [`PlacementMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementReport {
    /// `(total score, lost slots)` per vertex; `None` if unplaced.
    pub per_vertex: Vec<Option<(f64, usize)>>,
    /// `(total score, vertex count)`, ascending by score.
    pub histogram: Vec<(f64, usize)>,
    /// Placements with no lost slot.
    pub complete: usize,
    pub placed: usize,
}

pub fn placement_report(pm: &PlacementMap) -> PlacementReport {
    let per_vertex: Vec<Option<(f64, usize)>> = pm
        .placements
        .iter()
        .map(|p| p.as_ref().map(|p| (p.score().total, p.lost_slots())))
        .collect();
    let mut totals: Vec<f64> = per_vertex.iter().flatten().map(|&(s, _)| s).collect();
    totals.sort_by(f64::total_cmp);
    let mut histogram: Vec<(f64, usize)> = Vec::new();
    for s in totals {
        match histogram.last_mut() {
            Some((last, count)) if *last == s => *count += 1,
            _ => histogram.push((s, 1)),
        }
    }
    PlacementReport {
        complete: per_vertex
            .iter()
            .flatten()
            .filter(|&&(_, l)| l == 0)
            .count(),
        placed: per_vertex.iter().flatten().count(),
        per_vertex,
        histogram,
    }
}

impl fmt::Display for PlacementReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "placed {} of {} vertices, {} complete",
            self.placed,
            self.per_vertex.len(),
            self.complete
        )?;
        writeln!(f, "score histogram:")?;
        for (s, c) in &self.histogram {
            writeln!(f, "  {s}: {c}")?;
        }
        Ok(())
    }
}

// Placement file:
//
//   placements n=<n> K=<K> seed=<seed>
//   <center>; total=<t> losses=<l> snp=<s> cn=<c> dist=<d> rev=<r>; slot0=<v>, slot1=⊥, ...
//
// One line per placed vertex in ascending center order; `#` starts a comment line.

const BOTTOM: &str = "⊥";

impl PlacementMap {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "placements n={} K={} seed={}",
            self.n(),
            self.k,
            self.seed
        )
        .unwrap();
        for p in self.placements.iter().flatten() {
            let s = p.score();
            write!(
                out,
                "{}; total={} losses={} snp={} cn={} dist={} rev={}; ",
                p.center(),
                s.total,
                s.losses,
                s.snp_violations,
                s.cn_mismatches,
                s.loss_distance,
                s.reversals
            )
            .unwrap();
            for (i, slot) in p.slots().iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                match slot {
                    Some(v) => write!(out, "slot{i}={v}").unwrap(),
                    None => write!(out, "slot{i}={BOTTOM}").unwrap(),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<PlacementMap> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing placements header"))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("placements") {
            return Err(Error::parse(
                hline,
                "expected `placements n=.. K=.. seed=..`",
            ));
        }
        let n = keyed(fields.next(), "n", hline)?;
        let k = keyed(fields.next(), "K", hline)?;
        let seed = keyed(fields.next(), "seed", hline)?;

        let mut placements: Vec<Option<KernelPlacement>> = vec![None; n];
        for (line, content) in lines {
            let parts: Vec<&str> = content.split(';').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(Error::parse(line, "expected `center; score; slots`"));
            }
            let center: usize = parts[0]
                .parse()
                .map_err(|_| Error::parse(line, format!("invalid center `{}`", parts[0])))?;
            if center >= n {
                return Err(Error::VertexRange {
                    line,
                    vertex: center,
                    n,
                });
            }
            if placements[center].is_some() {
                return Err(Error::parse(
                    line,
                    format!("duplicate placement for {center}"),
                ));
            }

            let mut sf = parts[1].split_whitespace();
            let total: f64 = keyed(sf.next(), "total", line)?;
            let score = DeformationScore {
                total,
                losses: keyed(sf.next(), "losses", line)?,
                snp_violations: keyed(sf.next(), "snp", line)?,
                cn_mismatches: keyed(sf.next(), "cn", line)?,
                loss_distance: keyed(sf.next(), "dist", line)?,
                reversals: keyed(sf.next(), "rev", line)?,
            };

            let mut slots = Vec::with_capacity(k);
            for (i, entry) in parts[2].split(',').map(str::trim).enumerate() {
                let value = entry.strip_prefix(&format!("slot{i}=")).ok_or_else(|| {
                    Error::parse(line, format!("expected `slot{i}=..`, found `{entry}`"))
                })?;
                if value == BOTTOM {
                    slots.push(None);
                } else {
                    let v: usize = value.parse().map_err(|_| {
                        Error::parse(line, format!("invalid slot vertex `{value}`"))
                    })?;
                    if v >= n {
                        return Err(Error::VertexRange { line, vertex: v, n });
                    }
                    slots.push(Some(v));
                }
            }
            if slots.len() != k {
                return Err(Error::parse(
                    line,
                    format!("expected {k} slots, found {}", slots.len()),
                ));
            }
            let p = KernelPlacement::new(center, slots, score)
                .map_err(|e| Error::parse(line, e.to_string()))?;
            placements[center] = Some(p);
        }
        PlacementMap::new(seed, k, placements).map_err(|e| Error::parse(hline, e.to_string()))
    }
}

fn keyed<T: std::str::FromStr>(field: Option<&str>, key: &str, line: usize) -> Result<T> {
    field
        .and_then(|f| f.strip_prefix(key))
        .and_then(|f| f.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::parse(line, format!("expected `{key}=<value>`")))
}
