//! Ground-truth graph generators for the synthetic bias scenarios.
//!
//! Four families: plain Erdos-Renyi graphs, graphs with a prescribed
//! across-group edge ratio (group bias knob), the subgroup construction
//! (node bias knob while group bias stays low), and weight biasing
//! (support fixed, within-group weights inflated).
//!
//! Rewiring primitive: delete a uniformly random edge of the source
//! category and insert its weight at a uniformly random empty slot of the
//! target category, so the weight multiset is preserved. Deletions that
//! would push an endpoint's weighted degree below 1 are rejected and
//! resampled.

use crate::error::{Error, Result};
use crate::graph::{Gso, GsoKind};
use crate::groups::GroupAssignment;
use crate::scalar::Scalar;
use crate::vectorize::{half_vectorize, lift, n_pairs, pair_list};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Scenario families of the synthetic experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    PlainEr,
    /// `param` = target fraction of across-group edges in `[0, 1]`.
    AcrossRatio,
    /// `param` = fraction of subgroup edges rewired in `[0, 1]`.
    Subgroup,
    /// `param` = weight-bias factor `>= 1`.
    WeightBias,
}

/// A full description of one synthetic ground-truth graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub n: usize,
    pub g: usize,
    /// Group sizes; balanced as evenly as possible when omitted.
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
    pub kind: ScenarioKind,
    pub param: f64,
    /// Edge probability of the base ER graph.
    pub p: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn groups(&self) -> Result<GroupAssignment> {
        let sizes = match &self.sizes {
            Some(s) => {
                if s.len() != self.g || s.iter().sum::<usize>() != self.n {
                    return Err(Error::InvalidParameter(
                        "group sizes must have length g and sum to n".into(),
                    ));
                }
                s.clone()
            }
            None => {
                let base = self.n / self.g;
                let extra = self.n % self.g;
                (0..self.g)
                    .map(|k| base + usize::from(k < extra))
                    .collect()
            }
        };
        let mut labels = Vec::with_capacity(self.n);
        for (g, &sz) in sizes.iter().enumerate() {
            labels.extend(std::iter::repeat_n(g, sz));
        }
        GroupAssignment::new(labels)
    }
}

/// Mutable edge set over node pairs, the working representation of all
/// generators.
struct EdgeMap {
    n: usize,
    weights: Vec<f64>,
    pairs: Vec<(usize, usize)>,
}

impl EdgeMap {
    fn new(n: usize) -> Self {
        Self {
            n,
            weights: vec![0.0; n_pairs(n)],
            pairs: pair_list(n),
        }
    }

    fn from_gso<T: Scalar>(gso: &Gso<T>) -> Self {
        let w = half_vectorize(gso);
        Self {
            n: gso.n(),
            weights: w.iter().map(|x| x.to_f64()).collect(),
            pairs: pair_list(gso.n()),
        }
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        a * self.n - a * (a + 1) / 2 + (b - a - 1)
    }

    fn row_sums(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            d[i] += self.weights[k];
            d[j] += self.weights[k];
        }
        d
    }

    fn edge_indices(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&k| self.weights[k] > 0.0)
            .collect()
    }

    fn into_gso<T: Scalar>(self, kind: GsoKind) -> Result<Gso<T>> {
        let s = DVector::from_iterator(self.weights.len(), self.weights.iter().map(|&w| T::of(w)));
        lift(&s, kind)
    }
}

fn draw_weight(rng: &mut ChaCha8Rng, dist: (f64, f64)) -> f64 {
    dist.0 + (dist.1 - dist.0) * rng.random::<f64>()
}

/// Default edge-weight distribution: uniform on `[0.5, 1.5]`.
pub const DEFAULT_WEIGHTS: (f64, f64) = (0.5, 1.5);

/// Add random edges from nodes with weighted degree below 1 until every
/// row sum reaches 1, so the result satisfies the full adjacency validity
/// set.
fn repair_degrees(map: &mut EdgeMap, rng: &mut ChaCha8Rng, dist: (f64, f64)) -> Result<()> {
    loop {
        let sums = map.row_sums();
        let Some(node) = (0..map.n).find(|&i| sums[i] < 1.0) else {
            return Ok(());
        };
        let open: Vec<usize> = (0..map.n)
            .filter(|&j| j != node && map.weights[map.index(node, j)] == 0.0)
            .collect();
        if open.is_empty() {
            // node is fully connected with tiny weights; scale its row up
            let scale = 1.0 / sums[node];
            for j in 0..map.n {
                if j != node {
                    let k = map.index(node, j);
                    map.weights[k] *= scale;
                }
            }
            continue;
        }
        let partner = open[rng.random_range(0..open.len())];
        let k = map.index(node, partner);
        map.weights[k] = draw_weight(rng, dist);
    }
}

/// Erdos-Renyi graph with uniform edge weights and degree repair.
pub fn er_graph<T: Scalar>(
    n: usize,
    p: f64,
    seed: u64,
    weight_dist: (f64, f64),
) -> Result<Gso<T>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} outside (0, 1]")));
    }
    if weight_dist.0 <= 0.0 || weight_dist.1 < weight_dist.0 {
        return Err(Error::InvalidParameter("bad weight range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = EdgeMap::new(n);
    for k in 0..map.weights.len() {
        if rng.random::<f64>() < p {
            map.weights[k] = draw_weight(&mut rng, weight_dist);
        }
    }
    repair_degrees(&mut map, &mut rng, weight_dist)?;
    map.into_gso(GsoKind::Adjacency)
}

fn is_across(groups: &GroupAssignment, pair: (usize, usize)) -> bool {
    groups.label(pair.0) != groups.label(pair.1)
}

/// Rewire edges until the across-group edge fraction hits `ratio`
/// (rounded to the nearest achievable edge count). Edge count and the
/// weight multiset are preserved; only `G = 2` is supported.
pub fn set_across_ratio<T: Scalar>(
    gso: &Gso<T>,
    groups: &GroupAssignment,
    ratio: f64,
    seed: u64,
) -> Result<Gso<T>> {
    if groups.n_groups() != 2 {
        return Err(Error::InvalidParameter(
            "across-ratio scenario needs exactly 2 groups".into(),
        ));
    }
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::InvalidParameter(format!("ratio {ratio} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = EdgeMap::from_gso(gso);
    let edges = map.edge_indices();
    let total = edges.len();
    let across_slots = map
        .pairs
        .iter()
        .filter(|&&p| is_across(groups, p))
        .count();
    let within_slots = map.pairs.len() - across_slots;
    let target = (ratio * total as f64).round() as usize;
    if target > across_slots || total - target > within_slots {
        return Err(Error::Infeasible(format!(
            "cannot place {target} across / {} within edges with {across_slots} across and {within_slots} within slots",
            total - target
        )));
    }

    let mut current = edges
        .iter()
        .filter(|&&k| is_across(groups, map.pairs[k]))
        .count();
    let max_tries = 200 * total.max(1);
    let mut tries = 0;
    while current != target {
        let need_more_across = current < target;
        tries += 1;
        if tries > max_tries {
            return Err(Error::Infeasible(
                "rewiring stalled under the degree-rule guard".into(),
            ));
        }
        // source edge of the over-represented category
        let candidates: Vec<usize> = map
            .edge_indices()
            .into_iter()
            .filter(|&k| is_across(groups, map.pairs[k]) != need_more_across)
            .collect();
        if candidates.is_empty() {
            return Err(Error::Infeasible("no movable edges left".into()));
        }
        let src = candidates[rng.random_range(0..candidates.len())];
        let w = map.weights[src];
        let (i, j) = map.pairs[src];
        let sums = map.row_sums();
        if sums[i] - w < 1.0 || sums[j] - w < 1.0 {
            continue;
        }
        let open: Vec<usize> = (0..map.pairs.len())
            .filter(|&k| {
                map.weights[k] == 0.0 && is_across(groups, map.pairs[k]) == need_more_across
            })
            .collect();
        if open.is_empty() {
            return Err(Error::Infeasible("no empty slots in target category".into()));
        }
        let dst = open[rng.random_range(0..open.len())];
        map.weights[src] = 0.0;
        map.weights[dst] = w;
        current = if need_more_across { current + 1 } else { current - 1 };
    }
    polish_group_balance(&mut map, groups, &mut rng);
    map.into_gso(gso.kind())
}

/// Group-wise bias of an edge map from the three weight totals; cheap
/// enough to drive the local search below.
fn group_bias_of_totals(map: &EdgeMap, groups: &GroupAssignment) -> f64 {
    let sizes = groups.sizes();
    let mut within = [0.0f64; 2];
    let mut across = 0.0f64;
    for (k, &(i, j)) in map.pairs.iter().enumerate() {
        let w = map.weights[k];
        if w == 0.0 {
            continue;
        }
        if groups.label(i) == groups.label(j) {
            within[groups.label(i)] += w;
        } else {
            across += w;
        }
    }
    let avg = |g: usize| {
        let n = sizes[g] as f64;
        2.0 * within[g] / (n * n - n)
    };
    let across_avg = across / (sizes[0] as f64 * sizes[1] as f64);
    ((avg(0) - across_avg).powi(2) + (avg(1) - across_avg).powi(2)) / 2.0
}

/// Local search driving the group-wise bias toward its structural floor.
/// Moves: relocating a within-group edge to an empty within slot of the
/// other group (degree-guarded, count- and category-preserving) and
/// swapping the weights of a within and an across edge. A move is kept
/// only if the bias drops, so the pass never degrades balance.
fn polish_group_balance(map: &mut EdgeMap, groups: &GroupAssignment, rng: &mut ChaCha8Rng) {
    let mut score = group_bias_of_totals(map, groups);
    let mut stale = 0;
    let budget = 40 * map.edge_indices().len().max(8);
    for _ in 0..budget {
        if stale > 300 || score < 1e-10 {
            break;
        }
        stale += 1;
        let edges = map.edge_indices();
        let within_edges: Vec<usize> = edges
            .iter()
            .copied()
            .filter(|&k| !is_across(groups, map.pairs[k]))
            .collect();
        let across_edges: Vec<usize> = edges
            .iter()
            .copied()
            .filter(|&k| is_across(groups, map.pairs[k]))
            .collect();
        if within_edges.is_empty() || across_edges.is_empty() {
            break;
        }
        if rng.random::<f64>() < 0.5 {
            // relocate a within edge to the other group
            let src = within_edges[rng.random_range(0..within_edges.len())];
            let (i, j) = map.pairs[src];
            let w = map.weights[src];
            let sums = map.row_sums();
            if sums[i] - w < 1.0 || sums[j] - w < 1.0 {
                continue;
            }
            let other = 1 - groups.label(i);
            let open: Vec<usize> = (0..map.pairs.len())
                .filter(|&k| {
                    map.weights[k] == 0.0
                        && !is_across(groups, map.pairs[k])
                        && groups.label(map.pairs[k].0) == other
                })
                .collect();
            if open.is_empty() {
                continue;
            }
            let dst = open[rng.random_range(0..open.len())];
            map.weights[src] = 0.0;
            map.weights[dst] = w;
            let new_score = group_bias_of_totals(map, groups);
            if new_score < score {
                score = new_score;
                stale = 0;
            } else {
                map.weights[dst] = 0.0;
                map.weights[src] = w;
            }
        } else {
            // swap weights between categories
            let a = within_edges[rng.random_range(0..within_edges.len())];
            let b = across_edges[rng.random_range(0..across_edges.len())];
            let (ia, ja) = map.pairs[a];
            let (ib, jb) = map.pairs[b];
            let delta = map.weights[b] - map.weights[a];
            let sums = map.row_sums();
            let ok = [ia, ja].iter().all(|&u| sums[u] + delta >= 1.0)
                && [ib, jb].iter().all(|&u| sums[u] - delta >= 1.0);
            if !ok {
                continue;
            }
            map.weights.swap(a, b);
            let new_score = group_bias_of_totals(map, groups);
            if new_score < score {
                score = new_score;
                stale = 0;
            } else {
                map.weights.swap(a, b);
            }
        }
    }
}

/// Build the subgroup scenario: each group splits into halves `a` and
/// `b`; `a`-anchored edges connect within-group and `b`-anchored edges
/// across groups, then a `fraction` of each family is flipped to the
/// opposite category. Group-level balance (half the edges across) holds
/// for every `fraction`, while per-node preferences vary from extreme
/// (`fraction` 0 or 1) to balanced (`fraction` 0.5).
///
/// The input graph supplies the edge count and weight multiset. Odd
/// group sizes split with the extra node in the `a` half.
pub fn subgroup_rewire<T: Scalar>(
    gso: &Gso<T>,
    groups: &GroupAssignment,
    fraction: f64,
    seed: u64,
) -> Result<Gso<T>> {
    if groups.n_groups() != 2 {
        return Err(Error::InvalidParameter(
            "subgroup scenario needs exactly 2 groups".into(),
        ));
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "fraction {fraction} outside [0, 1]"
        )));
    }
    if groups.n_min() < 4 {
        return Err(Error::InvalidParameter(
            "subgroup scenario needs groups of size >= 4".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = gso.n();
    let source = EdgeMap::from_gso(gso);
    let mut weights: Vec<f64> = source
        .weights
        .iter()
        .copied()
        .filter(|&w| w > 0.0)
        .collect();
    weights.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let m = weights.len();

    // subgroup membership: first half of each group is the `a` subgroup
    let mut in_a = vec![false; n];
    for g in 0..2 {
        let members = groups.members(g);
        let cut = members.len().div_ceil(2);
        for &node in &members[..cut] {
            in_a[node] = true;
        }
    }

    // Placement cells: (a-family?, anchor group). Edge counts per cell and
    // the number of flipped edges per cell are fixed up front, so the
    // within/across split and the per-group totals carry no sampling
    // noise; only slot choices are random. a-family edges are
    // within-group unless flipped, b-family edges across unless flipped.
    struct Cell {
        a_family: bool,
        group: usize,
        remaining: usize,
        flips_left: usize,
    }
    let mut cells: Vec<Cell> = (0..4)
        .map(|c| {
            let count = m / 4 + usize::from(c < m % 4);
            Cell {
                a_family: c % 2 == 0,
                group: c / 2,
                remaining: count,
                flips_left: (fraction * count as f64).round() as usize,
            }
        })
        .collect();

    let mut map = EdgeMap::new(n);
    let strict_tries = 200;
    let max_tries = 400 * m.max(1);
    let mut place = |anchored_a: bool,
                     within: bool,
                     g: usize,
                     w: f64,
                     rng: &mut ChaCha8Rng|
     -> Result<()> {
        let mut tries = 0;
        loop {
            tries += 1;
            if tries > max_tries {
                return Err(Error::Infeasible("no empty slot for subgroup edge".into()));
            }
            let anchors: Vec<usize> = groups
                .members(g)
                .into_iter()
                .filter(|&u| in_a[u] == anchored_a)
                .collect();
            let u = anchors[rng.random_range(0..anchors.len())];
            // partners stay inside the same subgroup family, so at the
            // extreme fractions each subgroup's nodes carry pure
            // within- or across-group profiles; once a family cell
            // congests, fall back to group-level-correct placements
            let strict = tries <= strict_tries;
            let partners: Vec<usize> = if within {
                groups
                    .members(g)
                    .into_iter()
                    .filter(|&v| v != u && (!strict || in_a[v] == anchored_a))
                    .collect()
            } else {
                groups
                    .members(1 - g)
                    .into_iter()
                    .filter(|&v| !strict || in_a[v] == anchored_a)
                    .collect()
            };
            let v = partners[rng.random_range(0..partners.len())];
            let k = map.index(u, v);
            if map.weights[k] == 0.0 {
                map.weights[k] = w;
                return Ok(());
            }
        }
    };

    // Deal sorted weights to the cell with the most placements left, so
    // heavy weights spread evenly over all four cells.
    for &w in &weights {
        let c = (0..4).max_by_key(|&c| cells[c].remaining).unwrap();
        let cell = &mut cells[c];
        // flip decision: spread flipped placements evenly through the deal
        let flip = cell.flips_left * 2 >= cell.remaining.max(1) && cell.flips_left > 0;
        if flip {
            cell.flips_left -= 1;
        }
        cell.remaining -= 1;
        let within = cell.a_family != flip;
        let (a_family, group) = (cell.a_family, cell.group);
        place(a_family, within, group, w, &mut rng)?;
    }
    drop(place);
    repair_degrees(&mut map, &mut rng, DEFAULT_WEIGHTS)?;
    map.into_gso(gso.kind())
}

/// Scale within-group edge weights by `factor` and across-group weights
/// by `1 / factor`; the support is untouched. Large factors can push
/// across-heavy rows below the degree rule, which callers normalize away
/// if they need strict validity.
pub fn bias_weights<T: Scalar>(
    gso: &Gso<T>,
    groups: &GroupAssignment,
    factor: f64,
) -> Result<Gso<T>> {
    if factor < 1.0 {
        return Err(Error::InvalidParameter(format!("factor {factor} < 1")));
    }
    if gso.n() != groups.n() {
        return Err(Error::Dimension {
            expected: groups.n(),
            got: gso.n(),
        });
    }
    let mut map = EdgeMap::from_gso(gso);
    for (k, &pair) in map.pairs.iter().enumerate() {
        if map.weights[k] > 0.0 {
            map.weights[k] *= if is_across(groups, pair) {
                1.0 / factor
            } else {
                factor
            };
        }
    }
    map.into_gso(gso.kind())
}

/// Realize a scenario: the base ER graph plus the configured bias knob.
pub fn generate<T: Scalar>(spec: &ScenarioSpec) -> Result<(Gso<T>, GroupAssignment)> {
    let groups = spec.groups()?;
    let base = er_graph::<T>(spec.n, spec.p, spec.seed, DEFAULT_WEIGHTS)?;
    let gso = match spec.kind {
        ScenarioKind::PlainEr => base,
        ScenarioKind::AcrossRatio => set_across_ratio(&base, &groups, spec.param, spec.seed ^ 1)?,
        ScenarioKind::Subgroup => subgroup_rewire(&base, &groups, spec.param, spec.seed ^ 1)?,
        ScenarioKind::WeightBias => bias_weights(&base, &groups, spec.param)?,
    };
    Ok((gso, groups))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{bias_group, bias_node, normalized_bias, BiasMetric};

    #[test]
    fn complete_graph_at_p_one() {
        let g = er_graph::<f64>(6, 1.0, 1, DEFAULT_WEIGHTS).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(g.mat()[(i, j)] > 0.0, i != j);
            }
        }
    }

    #[test]
    fn repair_guarantees_degree_rule() {
        for seed in 0..30 {
            let g = er_graph::<f64>(12, 0.02, seed, DEFAULT_WEIGHTS).unwrap();
            assert!(g.validate().pass, "seed {seed}");
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = er_graph::<f64>(10, 0.4, 5, DEFAULT_WEIGHTS).unwrap();
        let b = er_graph::<f64>(10, 0.4, 5, DEFAULT_WEIGHTS).unwrap();
        let c = er_graph::<f64>(10, 0.4, 6, DEFAULT_WEIGHTS).unwrap();
        assert_eq!(a.mat(), b.mat());
        assert_ne!(a.mat(), c.mat());
    }

    #[test]
    fn edge_count_mean_is_binomial() {
        // weights >= 1 so the degree repair almost never adds edges
        let n = 50;
        let p = 5.0 / 49.0;
        let trials = 200;
        let mut total = 0.0;
        for seed in 0..trials {
            let g = er_graph::<f64>(n, p, seed, (1.0, 2.0)).unwrap();
            total += g
                .mat()
                .iter()
                .filter(|&&w| w > 0.0)
                .count() as f64
                / 2.0;
        }
        let mean = total / trials as f64;
        let expect = n_pairs(n) as f64 * p;
        let sd_mean = (n_pairs(n) as f64 * p * (1.0 - p)).sqrt() / (trials as f64).sqrt();
        assert!(
            (mean - expect).abs() < 3.0 * sd_mean + 0.5,
            "mean {mean} vs {expect}"
        );
    }

    fn edge_count(g: &Gso<f64>) -> usize {
        g.mat().iter().filter(|&&w| w > 0.0).count() / 2
    }

    #[test]
    fn across_ratio_balanced_is_fair() {
        // at N = 40 the within/across pair-count mismatch is small enough
        // for a count-balanced graph to read as group-fair
        let groups = GroupAssignment::balanced_halves(40).unwrap();
        for seed in 0..5 {
            let base = er_graph::<f64>(40, 5.0 / 39.0, seed, DEFAULT_WEIGHTS).unwrap();
            let g = set_across_ratio(&base, &groups, 0.5, seed).unwrap();
            let b = normalized_bias(&g, &groups, BiasMetric::Group).unwrap();
            assert!(b < 0.05, "seed {seed}: b_G = {b}");
            assert_eq!(edge_count(&g), edge_count(&base));
            assert!(g.validate().pass);
        }
    }

    #[test]
    fn across_ratio_low_is_biased() {
        let groups = GroupAssignment::balanced_halves(20).unwrap();
        let base = er_graph::<f64>(20, 0.3, 3, DEFAULT_WEIGHTS).unwrap();
        let fair = set_across_ratio(&base, &groups, 0.5, 3).unwrap();
        let biased = set_across_ratio(&base, &groups, 0.2, 3).unwrap();
        assert!(
            bias_group(&biased, &groups).unwrap() > 4.0 * bias_group(&fair, &groups).unwrap()
        );
        assert!(bias_node(&biased, &groups).unwrap() > bias_node(&fair, &groups).unwrap());
    }

    #[test]
    fn across_ratio_needs_two_groups() {
        let groups = GroupAssignment::new(vec![0, 0, 1, 1, 2, 2]).unwrap();
        let base = er_graph::<f64>(6, 0.8, 0, DEFAULT_WEIGHTS).unwrap();
        assert!(set_across_ratio(&base, &groups, 0.5, 0).is_err());
    }

    #[test]
    fn infeasible_ratio_errors() {
        // 2 + 2 nodes have only 4 across slots; a dense graph cannot be
        // pushed to ratio 1.
        let groups = GroupAssignment::balanced_halves(4).unwrap();
        let base = er_graph::<f64>(4, 1.0, 0, DEFAULT_WEIGHTS).unwrap();
        assert!(matches!(
            set_across_ratio(&base, &groups, 1.0, 0),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn subgroup_keeps_group_bias_low() {
        let groups = GroupAssignment::balanced_halves(32).unwrap();
        for seed in 0..20 {
            let base = er_graph::<f64>(32, 0.15, seed, DEFAULT_WEIGHTS).unwrap();
            for fraction in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let g = subgroup_rewire(&base, &groups, fraction, seed).unwrap();
                let b = normalized_bias(&g, &groups, BiasMetric::Group).unwrap();
                assert!(b < 0.1, "seed {seed} fraction {fraction}: b_G = {b}");
                assert!(g.validate().pass);
            }
        }
    }

    #[test]
    fn subgroup_fraction_controls_node_bias() {
        let groups = GroupAssignment::balanced_halves(32).unwrap();
        let mut extreme = 0.0;
        let mut balanced = 0.0;
        for seed in 0..10 {
            let base = er_graph::<f64>(32, 0.15, seed, DEFAULT_WEIGHTS).unwrap();
            let g0 = subgroup_rewire(&base, &groups, 0.0, seed).unwrap();
            let g5 = subgroup_rewire(&base, &groups, 0.5, seed).unwrap();
            extreme += normalized_bias(&g0, &groups, BiasMetric::Node).unwrap();
            balanced += normalized_bias(&g5, &groups, BiasMetric::Node).unwrap();
        }
        assert!(
            extreme > 2.0 * balanced,
            "extreme {extreme} vs balanced {balanced}"
        );
    }

    #[test]
    fn weight_bias_identity_and_support() {
        let groups = GroupAssignment::balanced_halves(12).unwrap();
        let base = er_graph::<f64>(12, 0.4, 9, DEFAULT_WEIGHTS).unwrap();
        let same = bias_weights(&base, &groups, 1.0).unwrap();
        assert_eq!(same.mat(), base.mat());
        let biased = bias_weights(&base, &groups, 2.0).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                assert_eq!(biased.mat()[(i, j)] != 0.0, base.mat()[(i, j)] != 0.0);
            }
        }
        assert!(bias_weights(&base, &groups, 0.5).is_err());
    }

    #[test]
    fn weight_bias_raises_group_bias_monotonically() {
        let groups = GroupAssignment::balanced_halves(16).unwrap();
        let base = er_graph::<f64>(16, 0.4, 2, DEFAULT_WEIGHTS).unwrap();
        let fair = set_across_ratio(&base, &groups, 0.5, 2).unwrap();
        let mut last = bias_group(&fair, &groups).unwrap();
        for factor in [1.5, 2.0, 3.0] {
            let g = bias_weights(&fair, &groups, factor).unwrap();
            let r = bias_group(&g, &groups).unwrap();
            assert!(r > last, "factor {factor}: {r} <= {last}");
            last = r;
        }
    }

    #[test]
    fn scenario_spec_generates() {
        let spec = ScenarioSpec {
            n: 16,
            g: 2,
            sizes: None,
            kind: ScenarioKind::AcrossRatio,
            param: 0.5,
            p: 0.3,
            seed: 4,
        };
        let (gso, groups) = generate::<f64>(&spec).unwrap();
        assert_eq!(gso.n(), 16);
        assert_eq!(groups.sizes(), &[8, 8]);
        let unbalanced = ScenarioSpec {
            sizes: Some(vec![10, 6]),
            ..spec.clone()
        };
        let (_, groups) = generate::<f64>(&unbalanced).unwrap();
        assert_eq!(groups.sizes(), &[10, 6]);
        let bad = ScenarioSpec {
            sizes: Some(vec![9, 6]),
            ..spec
        };
        assert!(generate::<f64>(&bad).is_err());
    }
}
