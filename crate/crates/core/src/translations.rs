//! Translations on a graph and the search for the least-deforming one.
//!
//! A translation maps each vertex of its domain either to a vertex or to the
//! loss symbol (`None` here, written `⊥` in files). A proper translation is
//! injective on its non-lost images, edge-constrained (every vertex moves to
//! a neighbor or is lost) and strongly neighborhood-preserving (two surviving
//! vertices are adjacent iff their images are).
//!
//! [`find_local_translation`] searches, over the support of a kernel only,
//! for the edge-constrained injective map that moves the kernel center onto a
//! chosen neighbor with minimal [`DeformationScore`].

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest domain accepted by [`enumerate_translations_bruteforce`].
pub const MAX_BRUTEFORCE_DOMAIN: usize = 12;

/// Sort key for an image where `⊥` orders after every vertex id.
#[inline]
pub(crate) fn image_key(img: Option<usize>) -> usize {
    img.unwrap_or(usize::MAX)
}

/// Lexicographic comparison of image sequences, `⊥` last.
pub(crate) fn cmp_images(a: &[Option<usize>], b: &[Option<usize>]) -> Ordering {
    a.iter()
        .map(|&x| image_key(x))
        .cmp(b.iter().map(|&x| image_key(x)))
}

/// Costs of a lost vertex (`alpha`) and of a neighborhood violation (`beta`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

impl ScoreWeights {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, x) in [("alpha", alpha), ("beta", beta)] {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::param(format!(
                    "{name} must be finite and >= 0, got {x}"
                )));
            }
        }
        Ok(ScoreWeights { alpha, beta })
    }

    #[inline]
    pub fn total(&self, losses: usize, snp_violations: usize) -> f64 {
        self.alpha * losses as f64 + self.beta * snp_violations as f64
    }
}

/// Deformation caused by a translation (or accumulated along a path of them).
///
/// `total = alpha * losses + beta * snp_violations`. The remaining counts
/// never enter `total` and only separate candidates that tie on it:
///
/// * `cn_mismatches`: surviving pairs whose number of common neighbors changes;
/// * `loss_distance`: summed hop distance from each lost vertex to the
///   step's target (a shift drops entries at its leading edge);
/// * `reversals`: pairs of vertices swapped onto each other.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DeformationScore {
    pub losses: usize,
    pub snp_violations: usize,
    pub cn_mismatches: usize,
    pub loss_distance: usize,
    pub reversals: usize,
    pub total: f64,
}

impl DeformationScore {
    /// Score with the given counts and no tie-break terms.
    pub fn new(losses: usize, snp_violations: usize, weights: ScoreWeights) -> Self {
        DeformationScore {
            losses,
            snp_violations,
            total: weights.total(losses, snp_violations),
            ..Default::default()
        }
    }

    fn reweighted(self, weights: ScoreWeights) -> Self {
        DeformationScore {
            total: weights.total(self.losses, self.snp_violations),
            ..self
        }
    }

    /// Sum of two scores, as accumulated along a translation path.
    pub fn accumulate(&self, step: &DeformationScore) -> DeformationScore {
        DeformationScore {
            losses: self.losses + step.losses,
            snp_violations: self.snp_violations + step.snp_violations,
            cn_mismatches: self.cn_mismatches + step.cn_mismatches,
            loss_distance: self.loss_distance + step.loss_distance,
            reversals: self.reversals + step.reversals,
            total: self.total + step.total,
        }
    }

    /// Orders by `total`, then `snp_violations`, `cn_mismatches`,
    /// `loss_distance` and `reversals`.
    ///
    /// At equal total a lost entry is preferred over a broken adjacency: on a
    /// grid border the rigid shift loses the entry that leaves the grid,
    /// while folding that entry back costs the same total as a violation.
    /// Once entries are lost, rotated or mirrored kernels can tie with the
    /// shift on adjacency alone; they drop entries behind the center instead
    /// of ahead of it.
    pub fn rank_cmp(&self, other: &DeformationScore) -> Ordering {
        self.total
            .total_cmp(&other.total)
            .then(self.snp_violations.cmp(&other.snp_violations))
            .then(self.cn_mismatches.cmp(&other.cn_mismatches))
            .then(self.loss_distance.cmp(&other.loss_distance))
            .then(self.reversals.cmp(&other.reversals))
    }
}

/// Partial vertex map with explicit losses, stored sorted by domain vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Translation {
    pairs: Vec<(usize, Option<usize>)>,
}

impl Translation {
    /// Builds a translation from `(vertex, image)` pairs. Each domain vertex
    /// may appear once.
    pub fn new<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Option<usize>)>,
    {
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        pairs.sort_unstable_by_key(|&(v, _)| v);
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::param(format!(
                "vertex {} appears twice in the translation domain",
                w[0].0
            )));
        }
        Ok(Translation { pairs })
    }

    /// Identity map on `domain`.
    pub fn identity<I: IntoIterator<Item = usize>>(domain: I) -> Result<Self> {
        Translation::new(domain.into_iter().map(|v| (v, Some(v))))
    }

    pub fn pairs(&self) -> &[(usize, Option<usize>)] {
        &self.pairs
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|&(v, _)| v)
    }

    /// Image of `v`: `None` if `v` is outside the domain, `Some(None)` if lost.
    pub fn image(&self, v: usize) -> Option<Option<usize>> {
        self.pairs
            .binary_search_by_key(&v, |&(d, _)| d)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl fmt::Display for Translation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, img)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match img {
                Some(w) => write!(f, "{v}→{w}")?,
                None => write!(f, "{v}→⊥")?,
            }
        }
        write!(f, "}}")
    }
}

/// Kernel anchored at `center`: slot `i` holds the vertex carrying weight `i`,
/// or `None` once that weight has been lost.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPlacement {
    center: usize,
    slots: Vec<Option<usize>>,
    score: DeformationScore,
}

impl KernelPlacement {
    pub fn new(center: usize, slots: Vec<Option<usize>>, score: DeformationScore) -> Result<Self> {
        if slots.first() != Some(&Some(center)) {
            return Err(Error::param(format!(
                "slot 0 must hold the center vertex {center}"
            )));
        }
        let mut seen: Vec<usize> = slots.iter().flatten().copied().collect();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::param(format!(
                "vertex {} occupies two kernel slots",
                w[0]
            )));
        }
        Ok(KernelPlacement {
            center,
            slots,
            score,
        })
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn slots(&self) -> &[Option<usize>] {
        &self.slots
    }

    /// Number of weight slots, lost ones included.
    pub fn k(&self) -> usize {
        self.slots.len()
    }

    pub fn score(&self) -> &DeformationScore {
        &self.score
    }

    pub fn lost_slots(&self) -> usize {
        self.slots.iter().filter(|s| s.is_none()).count()
    }

    /// Surviving `(slot, vertex)` pairs in slot order.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|v| (i, v)))
    }

    /// Applies `t` to every slot and adds `step` to the accumulated score.
    /// Slots already lost stay lost.
    pub fn translate(&self, t: &Translation, step: &DeformationScore) -> Result<KernelPlacement> {
        let slots: Vec<Option<usize>> = self
            .slots
            .iter()
            .map(|s| s.and_then(|v| t.image(v).flatten()))
            .collect();
        let center = slots[0].ok_or_else(|| Error::param("translation loses the kernel center"))?;
        KernelPlacement::new(center, slots, self.score.accumulate(step))
    }

    /// Full ordering used to keep one placement per center: score rank, then
    /// slot images lexicographically with `⊥` last.
    pub fn preference_cmp(&self, other: &KernelPlacement) -> Ordering {
        self.score
            .rank_cmp(&other.score)
            .then_with(|| cmp_images(&self.slots, &other.slots))
    }
}

/// No two domain vertices share a non-lost image.
pub fn is_injective(t: &Translation) -> bool {
    let mut images: Vec<usize> = t.pairs.iter().filter_map(|&(_, i)| i).collect();
    images.sort_unstable();
    images.windows(2).all(|w| w[0] != w[1])
}

/// Every domain vertex is lost or moves along one of its edges.
pub fn is_edge_constrained(g: &Graph, t: &Translation) -> bool {
    t.pairs.iter().all(|&(v, img)| match img {
        None => true,
        Some(w) => v < g.n() && w < g.n() && g.has_edge(v, w),
    })
}

fn surviving_pairs(t: &Translation) -> impl Iterator<Item = ((usize, usize), (usize, usize))> + '_ {
    let live: Vec<(usize, usize)> = t
        .pairs
        .iter()
        .filter_map(|&(v, i)| i.map(|w| (v, w)))
        .collect();
    (0..live.len()).flat_map(move |a| {
        let live = live.clone();
        (a + 1..live.len()).map(move |b| (live[a], live[b]))
    })
}

/// Surviving domain pairs whose adjacency differs from that of their images.
pub fn snp_violations(g: &Graph, t: &Translation) -> usize {
    surviving_pairs(t)
        .filter(|&((v1, w1), (v2, w2))| g.has_edge(v1, v2) != g.has_edge(w1, w2))
        .count()
}

/// Surviving domain pairs whose common-neighbor count differs from that of
/// their images.
pub fn cn_mismatches(g: &Graph, t: &Translation) -> usize {
    surviving_pairs(t)
        .filter(|&((v1, w1), (v2, w2))| g.common_neighbors(v1, v2) != g.common_neighbors(w1, w2))
        .count()
}

/// Domain pairs `{v, w}` with `v → w` and `w → v`.
pub fn reversals(t: &Translation) -> usize {
    t.pairs
        .iter()
        .filter(|&&(v, img)| match img {
            Some(w) if w > v => t.image(w) == Some(Some(v)),
            _ => false,
        })
        .count()
}

/// Summed hop distance from each lost vertex to `target`.
pub fn loss_distance(g: &Graph, t: &Translation, target: usize) -> usize {
    let dist = g.bfs_distances(target);
    t.pairs
        .iter()
        .filter(|(_, i)| i.is_none())
        .map(|&(v, _)| dist[v].unwrap_or(g.n()))
        .sum()
}

/// Score of `t`. `loss_distance` needs a target and is left at 0; see
/// [`deformation_score_toward`].
pub fn deformation_score(g: &Graph, t: &Translation, weights: ScoreWeights) -> DeformationScore {
    let losses = t.pairs.iter().filter(|(_, i)| i.is_none()).count();
    DeformationScore {
        losses,
        snp_violations: snp_violations(g, t),
        cn_mismatches: cn_mismatches(g, t),
        loss_distance: 0,
        reversals: reversals(t),
        total: 0.0,
    }
    .reweighted(weights)
}

/// Score of `t` as a step whose center moves onto `target`.
pub fn deformation_score_toward(
    g: &Graph,
    t: &Translation,
    target: usize,
    weights: ScoreWeights,
) -> DeformationScore {
    DeformationScore {
        loss_distance: loss_distance(g, t, target),
        ..deformation_score(g, t, weights)
    }
}

fn check_step(g: &Graph, center: usize, target: usize) -> Result<()> {
    for v in [center, target] {
        if v >= g.n() {
            return Err(Error::VertexRange {
                line: 0,
                vertex: v,
                n: g.n(),
            });
        }
    }
    if !g.has_edge(center, target) {
        return Err(Error::NotAdjacent { center, target });
    }
    Ok(())
}

/// Best translation of the kernel support that moves the center to `target`.
///
/// Every surviving slot vertex must move to one of its neighbors or be lost;
/// images are pairwise distinct. Among all such maps the result minimizes
/// the score rank (see [`DeformationScore::rank_cmp`]), then the image
/// sequence in slot order with `⊥` last. The search is exhaustive
/// branch-and-bound over that space.
pub fn find_local_translation(
    g: &Graph,
    placement: &KernelPlacement,
    target: usize,
    weights: ScoreWeights,
) -> Result<(Translation, DeformationScore)> {
    check_step(g, placement.center, target)?;
    let domain: Vec<usize> = placement.support().map(|(_, v)| v).collect();
    let (images, score) = LocalSearch::new(g, &domain, target, weights).run();
    let t = Translation::new(domain.into_iter().zip(images))?;
    Ok((t, score))
}

/// Hop distances from `source` to each vertex of `targets`, by a BFS that
/// stops once all of them are reached. Unreachable vertices get `n`.
fn hops_to(g: &Graph, source: usize, targets: &[usize]) -> Vec<usize> {
    use std::collections::{HashMap, VecDeque};
    let mut dist: HashMap<usize, usize> = HashMap::from([(source, 0)]);
    let mut remaining = targets.iter().filter(|&&v| v != source).count();
    let mut queue = VecDeque::from([source]);
    while remaining > 0 {
        let Some(u) = queue.pop_front() else { break };
        let d = dist[&u] + 1;
        for &w in g.neighbors(u) {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                e.insert(d);
                queue.push_back(w);
                if targets.contains(&w) {
                    remaining -= 1;
                }
            }
        }
    }
    targets
        .iter()
        .map(|v| dist.get(v).copied().unwrap_or(g.n()))
        .collect()
}

/// Branch-and-bound over slot images.
///
/// Vertices that can appear as images (the target and all neighbors of the
/// domain) are renumbered densely, so adjacency and common-neighbor counts
/// become table lookups. `snp_cost[i][p]` holds the violations that giving
/// slot `i` its `p`-th candidate would cause against the slots assigned so
/// far; it is kept up to date on every assignment and feeds the lower bound.
struct LocalSearch<'g> {
    g: &'g Graph,
    weights: ScoreWeights,
    domain: &'g [usize],
    adjacent: Vec<Vec<bool>>,
    common: Vec<Vec<usize>>,
    to_target: Vec<usize>,
    universe: Vec<usize>,
    universe_adj: Vec<bool>,
    universe_common: Vec<u32>,
    candidates: Vec<Vec<usize>>,
    snp_cost: Vec<Vec<usize>>,
    used: Vec<bool>,
    images: Vec<Option<usize>>,
    best: Option<(DeformationScore, Vec<Option<usize>>)>,
}

const UNKNOWN: u32 = u32::MAX;

impl<'g> LocalSearch<'g> {
    fn new(g: &'g Graph, domain: &'g [usize], target: usize, weights: ScoreWeights) -> Self {
        let k = domain.len();
        let mut adjacent = vec![vec![false; k]; k];
        let mut common = vec![vec![0; k]; k];
        for i in 0..k {
            for j in 0..i {
                let e = g.has_edge(domain[i], domain[j]);
                let c = g.common_neighbors(domain[i], domain[j]);
                adjacent[i][j] = e;
                adjacent[j][i] = e;
                common[i][j] = c;
                common[j][i] = c;
            }
        }

        let mut universe: Vec<usize> = std::iter::once(target)
            .chain(domain.iter().flat_map(|&v| g.neighbors(v).iter().copied()))
            .collect();
        universe.sort_unstable();
        universe.dedup();
        let index = |v: usize| universe.binary_search(&v).expect("in universe");
        let candidates: Vec<Vec<usize>> = domain
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if i == 0 {
                    vec![index(target)]
                } else {
                    g.neighbors(v).iter().map(|&w| index(w)).collect()
                }
            })
            .collect();
        let m = universe.len();
        let mut universe_adj = vec![false; m * m];
        for (a, &u) in universe.iter().enumerate() {
            for &w in g.neighbors(u) {
                if let Ok(b) = universe.binary_search(&w) {
                    universe_adj[a * m + b] = true;
                }
            }
        }
        let snp_cost = candidates.iter().map(|c| vec![0; c.len()]).collect();

        LocalSearch {
            g,
            weights,
            domain,
            adjacent,
            common,
            to_target: hops_to(g, target, domain),
            universe_adj,
            universe_common: vec![UNKNOWN; m * m],
            used: vec![false; m],
            universe,
            candidates,
            snp_cost,
            images: Vec::with_capacity(k),
            best: None,
        }
    }

    fn run(mut self) -> (Vec<Option<usize>>, DeformationScore) {
        self.descend(0, DeformationScore::default());
        let (score, images) = self.best.expect("the all-lost completion always exists");
        let images = images
            .into_iter()
            .map(|i| i.map(|u| self.universe[u]))
            .collect();
        (images, score)
    }

    fn common_of(&mut self, a: usize, b: usize) -> usize {
        let m = self.universe.len();
        let cached = self.universe_common[a * m + b];
        if cached != UNKNOWN {
            return cached as usize;
        }
        let c = self.g.common_neighbors(self.universe[a], self.universe[b]);
        self.universe_common[a * m + b] = c as u32;
        self.universe_common[b * m + a] = c as u32;
        c
    }

    /// Lower bound on `total` over all completions of the current prefix:
    /// each open slot costs at least a loss or its cheapest violations.
    fn bound(&self, depth: usize, partial: &DeformationScore) -> f64 {
        let (alpha, beta) = (self.weights.alpha, self.weights.beta);
        let mut losses = partial.losses;
        let mut snp = partial.snp_violations;
        for i in depth..self.domain.len() {
            let cheapest = self.candidates[i]
                .iter()
                .zip(&self.snp_cost[i])
                .filter(|(&c, _)| !self.used[c])
                .map(|(_, &s)| s)
                .min();
            match cheapest {
                Some(s) if i == 0 || beta * (s as f64) < alpha => snp += s,
                _ => losses += 1,
            }
        }
        self.weights.total(losses, snp)
    }

    /// True if `partial` can still lead to a strictly preferred completion.
    /// Equal ranks are cut: candidates are visited in lexicographic order, so
    /// any later completion with the same rank is lexicographically larger.
    #[inline]
    fn promising(&self, partial: &DeformationScore) -> bool {
        match &self.best {
            None => true,
            Some((best, _)) => partial.rank_cmp(best) == Ordering::Less,
        }
    }

    fn assign(&mut self, depth: usize, u: usize, sign: isize) {
        let m = self.universe.len();
        for i in depth + 1..self.domain.len() {
            let adj = self.adjacent[i][depth];
            for (p, &c) in self.candidates[i].iter().enumerate() {
                if adj != self.universe_adj[u * m + c] {
                    self.snp_cost[i][p] = self.snp_cost[i][p].wrapping_add_signed(sign);
                }
            }
        }
        self.used[u] = sign > 0;
    }

    fn descend(&mut self, depth: usize, partial: DeformationScore) {
        if depth == self.domain.len() {
            self.best = Some((partial, self.images.clone()));
            return;
        }
        if let Some((best, _)) = &self.best {
            let lb = self.bound(depth, &partial);
            if lb > best.total + 1e-9 * best.total.abs().max(1.0) {
                return;
            }
        }
        let v = self.domain[depth];
        for p in 0..self.candidates[depth].len() {
            let c = self.candidates[depth][p];
            if self.used[c] {
                continue;
            }
            let mut cn = 0;
            let mut rev = 0;
            for j in 0..depth {
                if let Some(w) = self.images[j] {
                    if self.common[depth][j] != self.common_of(w, c) {
                        cn += 1;
                    }
                    if self.universe[w] == v && self.universe[c] == self.domain[j] {
                        rev += 1;
                    }
                }
            }
            let next = DeformationScore {
                snp_violations: partial.snp_violations + self.snp_cost[depth][p],
                cn_mismatches: partial.cn_mismatches + cn,
                reversals: partial.reversals + rev,
                ..partial
            }
            .reweighted(self.weights);
            if self.promising(&next) {
                self.assign(depth, c, 1);
                self.images.push(Some(c));
                self.descend(depth + 1, next);
                self.images.pop();
                self.assign(depth, c, -1);
            }
        }

        if depth > 0 {
            let next = DeformationScore {
                losses: partial.losses + 1,
                loss_distance: partial.loss_distance + self.to_target[depth],
                ..partial
            }
            .reweighted(self.weights);
            if self.promising(&next) {
                self.images.push(None);
                self.descend(depth + 1, next);
                self.images.pop();
            }
        }
    }
}

/// Every edge-constrained injective map of `domain` sending `center` to
/// `target`, with its score, best first.
///
/// `domain` is taken in slot order and must contain `center`. Results are
/// sorted by score rank, then image sequence (in `domain` order, `⊥` last).
/// Exponential; guarded by [`MAX_BRUTEFORCE_DOMAIN`].
pub fn enumerate_translations_bruteforce(
    g: &Graph,
    domain: &[usize],
    center: usize,
    target: usize,
    weights: ScoreWeights,
) -> Result<Vec<(Translation, DeformationScore)>> {
    if domain.len() > MAX_BRUTEFORCE_DOMAIN {
        return Err(Error::DomainTooLarge {
            size: domain.len(),
            max: MAX_BRUTEFORCE_DOMAIN,
        });
    }
    check_step(g, center, target)?;
    if !domain.contains(&center) {
        return Err(Error::param(format!(
            "center {center} is not in the domain"
        )));
    }

    // Per-vertex choices: the forced target for the center, else neighbors and ⊥.
    let choices: Vec<Vec<Option<usize>>> = domain
        .iter()
        .map(|&v| {
            if v == center {
                vec![Some(target)]
            } else {
                g.neighbors(v)
                    .iter()
                    .map(|&w| Some(w))
                    .chain(std::iter::once(None))
                    .collect()
            }
        })
        .collect();

    let mut results: Vec<(Vec<Option<usize>>, Translation, DeformationScore)> = Vec::new();
    let mut odometer = vec![0usize; domain.len()];
    'outer: loop {
        let images: Vec<Option<usize>> =
            odometer.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        let t = Translation::new(domain.iter().copied().zip(images.iter().copied()))?;
        if is_injective(&t) {
            let s = deformation_score_toward(g, &t, target, weights);
            results.push((images, t, s));
        }
        for pos in (0..domain.len()).rev() {
            odometer[pos] += 1;
            if odometer[pos] < choices[pos].len() {
                continue 'outer;
            }
            odometer[pos] = 0;
        }
        break;
    }

    results.sort_by(|a, b| a.2.rank_cmp(&b.2).then_with(|| cmp_images(&a.0, &b.0)));
    Ok(results.into_iter().map(|(_, t, s)| (t, s)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(pairs: &[(usize, Option<usize>)]) -> Translation {
        Translation::new(pairs.iter().copied()).unwrap()
    }

    fn placement(slots: &[usize]) -> KernelPlacement {
        KernelPlacement::new(
            slots[0],
            slots.iter().map(|&v| Some(v)).collect(),
            DeformationScore::default(),
        )
        .unwrap()
    }

    #[test]
    fn injectivity() {
        assert!(is_injective(&t(&[(0, Some(1)), (1, None), (2, None)])));
        assert!(!is_injective(&t(&[(0, Some(1)), (2, Some(1))])));
        assert!(is_injective(&Translation::identity(0..3).unwrap()));
    }

    #[test]
    fn edge_constraint() {
        let g = Graph::path(3);
        assert!(is_edge_constrained(&g, &t(&[(0, Some(1)), (1, Some(2))])));
        assert!(!is_edge_constrained(&g, &t(&[(0, Some(2))])));
        assert!(is_edge_constrained(
            &g,
            &t(&[(0, None), (1, None), (2, None)])
        ));
    }

    #[test]
    fn snp_counts() {
        let k3 = Graph::complete(3);
        assert_eq!(
            snp_violations(&k3, &t(&[(0, Some(1)), (1, Some(2)), (2, Some(0))])),
            0
        );
        let p3 = Graph::path(3);
        assert_eq!(snp_violations(&p3, &t(&[(0, Some(1)), (1, Some(0))])), 0);
        // Non-edge {0,3} maps to edge {1,2}.
        let p4 = Graph::path(4);
        assert_eq!(snp_violations(&p4, &t(&[(0, Some(1)), (3, Some(2))])), 1);
        // Lost vertices never count.
        assert_eq!(snp_violations(&p4, &t(&[(0, Some(1)), (3, None)])), 0);
    }

    #[test]
    fn scores() {
        let p3 = Graph::path(3);
        let w = ScoreWeights::default();
        let id = deformation_score(&p3, &Translation::identity(0..3).unwrap(), w);
        assert_eq!((id.losses, id.snp_violations, id.total), (0, 0, 0.0));

        let s = deformation_score(&p3, &t(&[(0, Some(1)), (1, Some(2)), (2, None)]), w);
        assert_eq!((s.losses, s.snp_violations, s.total), (1, 0, 1.0));

        let p4 = Graph::path(4);
        let s = deformation_score(&p4, &t(&[(0, Some(1)), (3, Some(2))]), w);
        assert_eq!(s.total, s.snp_violations as f64);
        assert_eq!(s.total, 1.0);

        let w = ScoreWeights::new(2.5, 0.5).unwrap();
        let tr = t(&[(0, Some(1)), (3, Some(2)), (1, None)]);
        let s = deformation_score(&p4, &tr, w);
        assert_eq!(s.total, 2.5 + 0.5);
        assert_eq!(loss_distance(&p4, &tr, 3), 2);
    }

    #[test]
    fn negative_weights_rejected() {
        assert!(ScoreWeights::new(-1.0, 1.0).is_err());
        assert!(ScoreWeights::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn local_translation_on_path() {
        let g = Graph::path(3);
        let p = placement(&[1, 0, 2]);
        let (tr, s) = find_local_translation(&g, &p, 2, ScoreWeights::default()).unwrap();
        assert_eq!(tr, t(&[(0, Some(1)), (1, Some(2)), (2, None)]));
        assert_eq!(s.total, 1.0);
    }

    #[test]
    fn local_translation_on_triangle_is_rotation() {
        let g = Graph::complete(3);
        let p = placement(&[0, 1, 2]);
        let (tr, s) = find_local_translation(&g, &p, 1, ScoreWeights::default()).unwrap();
        assert_eq!(tr, t(&[(0, Some(1)), (1, Some(2)), (2, Some(0))]));
        assert_eq!(s.total, 0.0);
    }

    #[test]
    fn local_translation_on_grid_is_rigid_shift() {
        // 5x5 grid, plus kernel at (2,2) = 12, move right to 13.
        let g = Graph::grid(5, 5);
        let p = placement(&[12, 7, 11, 13, 17]);
        let (tr, s) = find_local_translation(&g, &p, 13, ScoreWeights::default()).unwrap();
        assert_eq!(
            tr,
            t(&[
                (7, Some(8)),
                (11, Some(12)),
                (12, Some(13)),
                (13, Some(14)),
                (17, Some(18))
            ])
        );
        assert_eq!(s.total, 0.0);
        let all = enumerate_translations_bruteforce(
            &g,
            &[12, 7, 11, 13, 17],
            12,
            13,
            ScoreWeights::default(),
        )
        .unwrap();
        assert_eq!(all.iter().filter(|(_, s)| s.total == 0.0).count(), 1);
    }

    #[test]
    fn grid_border_step_prefers_rigid_shift() {
        // Plus kernel at (1,2) on a 5x5 grid moved up to (0,2). Folding the
        // up slot back costs one violation instead of one loss; mirroring
        // across the moved edge ties on adjacency and common neighbors.
        let g = Graph::grid(5, 5);
        let p = placement(&[7, 2, 6, 8, 12]);
        let (tr, s) = find_local_translation(&g, &p, 2, ScoreWeights::default()).unwrap();
        assert_eq!(
            tr,
            t(&[
                (2, None),
                (6, Some(1)),
                (7, Some(2)),
                (8, Some(3)),
                (12, Some(7))
            ])
        );
        assert_eq!(
            (
                s.total,
                s.losses,
                s.cn_mismatches,
                s.loss_distance,
                s.reversals
            ),
            (1.0, 1, 0, 0, 0)
        );
        let all =
            enumerate_translations_bruteforce(&g, &[7, 2, 6, 8, 12], 7, 2, ScoreWeights::default())
                .unwrap();
        assert_eq!(all[0].0, tr);
        let mirror = t(&[
            (2, Some(7)),
            (6, Some(1)),
            (7, Some(2)),
            (8, Some(3)),
            (12, None),
        ]);
        let (_, ms) = all.iter().find(|(m, _)| *m == mirror).unwrap();
        assert_eq!(
            (
                ms.total,
                ms.snp_violations,
                ms.cn_mismatches,
                ms.loss_distance,
                ms.reversals
            ),
            (1.0, 0, 0, 2, 1)
        );
    }

    #[test]
    fn reversal_count() {
        assert_eq!(
            reversals(&t(&[(0, Some(1)), (1, Some(0)), (2, Some(3))])),
            1
        );
        assert_eq!(
            reversals(&t(&[(0, Some(1)), (1, Some(2)), (2, Some(0))])),
            0
        );
    }

    #[test]
    fn not_adjacent_target() {
        let g = Graph::path(3);
        let p = placement(&[0, 1]);
        assert!(matches!(
            find_local_translation(&g, &p, 2, ScoreWeights::default()),
            Err(Error::NotAdjacent {
                center: 0,
                target: 2
            })
        ));
    }

    #[test]
    fn bruteforce_singleton() {
        let g = Graph::path(3);
        let all =
            enumerate_translations_bruteforce(&g, &[0], 0, 1, ScoreWeights::default()).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].0, t(&[(0, Some(1))]));
        assert_eq!(all[0].1.total, 0.0);
    }

    #[test]
    fn bruteforce_matches_search_on_path() {
        let g = Graph::path(3);
        let all = enumerate_translations_bruteforce(&g, &[1, 0, 2], 1, 2, ScoreWeights::default())
            .unwrap();
        let (tr, s) =
            find_local_translation(&g, &placement(&[1, 0, 2]), 2, ScoreWeights::default()).unwrap();
        assert_eq!(all[0].0, tr);
        assert_eq!(all[0].1, s);
    }

    #[test]
    fn bruteforce_contains_triangle_rotation() {
        let g = Graph::complete(3);
        let all = enumerate_translations_bruteforce(&g, &[0, 1, 2], 0, 1, ScoreWeights::default())
            .unwrap();
        let rot = t(&[(0, Some(1)), (1, Some(2)), (2, Some(0))]);
        assert!(all.iter().any(|(tr, s)| *tr == rot && s.total == 0.0));
    }

    #[test]
    fn bruteforce_size_guard() {
        let g = Graph::complete(14);
        let domain: Vec<usize> = (0..13).collect();
        assert!(matches!(
            enumerate_translations_bruteforce(&g, &domain, 0, 1, ScoreWeights::default()),
            Err(Error::DomainTooLarge { size: 13, max: 12 })
        ));
    }

    #[test]
    fn placement_invariants() {
        assert!(KernelPlacement::new(0, vec![Some(1)], DeformationScore::default()).is_err());
        assert!(KernelPlacement::new(0, vec![None], DeformationScore::default()).is_err());
        assert!(KernelPlacement::new(
            0,
            vec![Some(0), Some(1), Some(1)],
            DeformationScore::default()
        )
        .is_err());
        assert!(
            KernelPlacement::new(0, vec![Some(0), None, None], DeformationScore::default()).is_ok()
        );
    }
}
