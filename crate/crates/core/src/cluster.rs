//! Grouping agents at one step into clusters of similar state.
//!
//! The default mapping is threshold-cut agglomerative clustering: start from
//! singletons and keep merging the closest pair of clusters while their
//! linkage distance stays within `threshold`. Seeded k-means is available
//! for experiments where the number of groups is fixed in advance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AgentState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Agglomerative,
    Kmeans,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Manhattan,
}

/// Clustering settings. Agglomerative uses `linkage` and `threshold`;
/// k-means uses `k`, `seed` and `max_iterations`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    pub method: Method,
    pub linkage: Linkage,
    pub threshold: f64,
    pub k: Option<usize>,
    pub metric: Metric,
    pub seed: u64,
    pub max_iterations: usize,
}

impl Default for ClusterConfig {
    /// Agglomerative, complete linkage, euclidean, threshold 0.15.
    fn default() -> Self {
        ClusterConfig {
            method: Method::Agglomerative,
            linkage: Linkage::Complete,
            threshold: 0.15,
            k: None,
            metric: Metric::Euclidean,
            seed: 0,
            max_iterations: 100,
        }
    }
}

impl ClusterConfig {
    pub fn kmeans(k: usize, seed: u64) -> Self {
        ClusterConfig {
            method: Method::Kmeans,
            k: Some(k),
            seed,
            ..Default::default()
        }
    }

    pub fn agglomerative(linkage: Linkage, threshold: f64) -> Self {
        ClusterConfig {
            linkage,
            threshold,
            ..Default::default()
        }
    }

    /// Checks everything that does not depend on the number of agents.
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(Error::Config(format!(
                "threshold must be a finite non-negative number, got {}",
                self.threshold
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        match (self.method, self.k) {
            (Method::Kmeans, None) => Err(Error::Config("k-means requires k".into())),
            (_, Some(0)) => Err(Error::Config("k must be positive".into())),
            _ => Ok(()),
        }
    }
}

/// One cluster: sorted member agent indices and their mean state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub members: Vec<usize>,
    pub centroid: Vec<f64>,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Partition of the agents at one step. Cluster ids are dense and ordered by
/// each cluster's smallest member.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterPartition {
    pub step_index: usize,
    pub assignments: Vec<usize>,
    pub clusters: Vec<Cluster>,
}

impl ClusterPartition {
    /// Builds the canonical partition from arbitrary groups of agent indices.
    /// Centroids are computed from the raw member vectors in `values`.
    pub fn from_groups(
        step_index: usize,
        groups: Vec<Vec<usize>>,
        values: &[Vec<f64>],
    ) -> Result<Self> {
        let m = values.len();
        let mut groups: Vec<Vec<usize>> = groups.into_iter().filter(|g| !g.is_empty()).collect();
        for g in &mut groups {
            g.sort_unstable();
        }
        groups.sort_unstable_by_key(|g| g[0]);

        let mut assignments = vec![usize::MAX; m];
        for (id, g) in groups.iter().enumerate() {
            for &j in g {
                if j >= m {
                    return Err(Error::Usage(format!("agent index {j} out of range 0..{m}")));
                }
                if assignments[j] != usize::MAX {
                    return Err(Error::Usage(format!("agent {j} assigned to two clusters")));
                }
                assignments[j] = id;
            }
        }
        if let Some(j) = assignments.iter().position(|&a| a == usize::MAX) {
            return Err(Error::Usage(format!("agent {j} is not assigned to any cluster")));
        }
        let clusters = groups
            .into_iter()
            .map(|members| {
                let centroid = centroid(members.iter().map(|&j| values[j].as_slice()));
                Cluster { members, centroid }
            })
            .collect();
        Ok(ClusterPartition {
            step_index,
            assignments,
            clusters,
        })
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Member sets only, in id order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        self.clusters.iter().map(|c| c.members.clone()).collect()
    }

    /// The `similar(j, l)` relation.
    pub fn similar(&self, j: usize, l: usize) -> bool {
        self.assignments[j] == self.assignments[l]
    }

    /// Verifies the partition invariants for `m` agents.
    pub fn check(&self, m: usize) -> Result<()> {
        if self.assignments.len() != m {
            return Err(Error::Internal(format!(
                "partition covers {} agents, expected {m}",
                self.assignments.len()
            )));
        }
        let mut seen = vec![false; m];
        let mut prev_min = None;
        for (id, c) in self.clusters.iter().enumerate() {
            let Some(&first) = c.members.first() else {
                return Err(Error::Internal(format!("cluster {id} is empty")));
            };
            if prev_min.is_some_and(|p| p >= first) {
                return Err(Error::Internal("cluster ids not ordered by smallest member".into()));
            }
            prev_min = Some(first);
            for &j in &c.members {
                if j >= m || seen[j] || self.assignments[j] != id {
                    return Err(Error::Internal(format!(
                        "agent {j} inconsistently assigned"
                    )));
                }
                seen[j] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Internal("partition does not cover every agent".into()));
        }
        Ok(())
    }
}

/// Correctly rounded sum (Shewchuk's exact partials).
fn exact_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in xs {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let Some(mut n) = partials.len().checked_sub(1) else {
        return 0.0;
    };
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        n -= 1;
        let x = hi;
        let y = partials[n];
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    // round-half-even correction across the remaining partials
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

/// Arithmetic mean accurate to within one ulp. A run of identical values
/// returns that value exactly.
pub fn mean(xs: &[f64]) -> f64 {
    let Some(&first) = xs.first() else {
        return f64::NAN;
    };
    if xs.iter().all(|&x| x == first) {
        return first;
    }
    let n = xs.len() as f64;
    let q = exact_sum(xs.iter().copied()) / n;
    // q*n == p + e exactly; refine q by the exact residual
    let p = q * n;
    let e = q.mul_add(n, -p);
    let r = exact_sum(xs.iter().copied().chain([-p, -e]));
    q + r / n
}

/// Component-wise mean of a non-empty set of equal-length vectors.
pub fn centroid<'a>(vectors: impl IntoIterator<Item = &'a [f64]>) -> Vec<f64> {
    let vectors: Vec<&[f64]> = vectors.into_iter().collect();
    let dim = vectors.first().map_or(0, |v| v.len());
    let mut column = Vec::with_capacity(vectors.len());
    (0..dim)
        .map(|i| {
            column.clear();
            column.extend(vectors.iter().map(|v| v[i]));
            mean(&column)
        })
        .collect()
}

fn raw_distance(a: &[f64], b: &[f64], metric: Metric) -> f64 {
    match metric {
        Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        Metric::Euclidean => {
            // scaled to avoid underflow, so distinct vectors never report 0
            let scale = a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            if scale == 0.0 {
                return 0.0;
            }
            let ss: f64 = a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let d = (x - y) / scale;
                    d * d
                })
                .sum();
            scale * ss.sqrt()
        }
    }
}

/// Distance between two state vectors.
pub fn distance(a: &[f64], b: &[f64], metric: Metric) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Usage(format!(
            "vector lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(raw_distance(a, b, metric))
}

fn combine<I: Iterator<Item = f64>>(dists: I, linkage: Linkage) -> f64 {
    match linkage {
        Linkage::Single => dists.fold(f64::INFINITY, f64::min),
        Linkage::Complete => dists.fold(0.0, f64::max),
        Linkage::Average => {
            let (sum, n) = dists.fold((0.0, 0usize), |(s, n), d| (s + d, n + 1));
            sum / n as f64
        }
    }
}

/// Linkage distance between two clusters given their member vectors.
pub fn linkage_distance(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    linkage: Linkage,
    metric: Metric,
) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Usage("linkage of an empty cluster".into()));
    }
    let mut dists = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            dists.push(distance(x, y, metric)?);
        }
    }
    Ok(combine(dists.into_iter(), linkage))
}

fn agglomerate(values: &[Vec<f64>], cfg: &ClusterConfig) -> Vec<Vec<usize>> {
    let m = values.len();
    let point: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| raw_distance(&values[i], &values[j], cfg.metric)).collect())
        .collect();
    let link = |a: &[usize], b: &[usize]| {
        combine(
            a.iter().flat_map(|&i| b.iter().map(move |&j| (i, j))).map(|(i, j)| point[i][j]),
            cfg.linkage,
        )
    };

    // Groups stay ordered by smallest member: merging b into a (a < b) keeps
    // a's minimum.
    let mut groups: Vec<Vec<usize>> = (0..m).map(|j| vec![j]).collect();
    let mut between = point.clone();
    while groups.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                let d = between[a][b];
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        let Some((d, a, b)) = best else { break };
        if d > cfg.threshold {
            break;
        }
        let absorbed = groups.remove(b);
        groups[a].extend(absorbed);
        groups[a].sort_unstable();
        between.remove(b);
        for row in &mut between {
            row.remove(b);
        }
        for c in 0..groups.len() {
            if c != a {
                let d = link(&groups[a], &groups[c]);
                between[a][c] = d;
                between[c][a] = d;
            }
        }
    }
    groups
}

fn nearest(v: &[f64], centers: &[Vec<f64>], metric: Metric) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = raw_distance(v, center, metric);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans(values: &[Vec<f64>], k: usize, cfg: &ClusterConfig) -> Vec<Vec<usize>> {
    let m = values.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // k-means++ seeding
    let mut chosen = vec![rng.random_range(0..m)];
    while chosen.len() < k {
        let centers: Vec<Vec<f64>> = chosen.iter().map(|&i| values[i].clone()).collect();
        let weights: Vec<f64> = values
            .iter()
            .map(|v| nearest(v, &centers, cfg.metric).1.powi(2))
            .collect();
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, w) in weights.iter().enumerate() {
                acc += w;
                if *w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| weights.iter().rposition(|w| *w > 0.0).unwrap())
        } else {
            (0..m).find(|i| !chosen.contains(i)).unwrap()
        };
        chosen.push(pick);
    }
    let mut centers: Vec<Vec<f64>> = chosen.iter().map(|&i| values[i].clone()).collect();

    let mut assign: Vec<usize> = Vec::new();
    for _ in 0..cfg.max_iterations {
        let mut next: Vec<usize> = values
            .iter()
            .map(|v| nearest(v, &centers, cfg.metric).0)
            .collect();

        // repair empty clusters by moving in the point farthest from its center
        for c in 0..k {
            let mut sizes = vec![0usize; k];
            for &a in &next {
                sizes[a] += 1;
            }
            if sizes[c] > 0 {
                continue;
            }
            let far = (0..m)
                .filter(|&j| sizes[next[j]] > 1)
                .map(|j| (j, raw_distance(&values[j], &centers[next[j]], cfg.metric)))
                .fold(None, |best: Option<(usize, f64)>, (j, d)| match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((j, d)),
                });
            if let Some((j, _)) = far {
                next[j] = c;
                centers[c] = values[j].clone();
            }
        }

        if next == assign {
            break;
        }
        assign = next;
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&[f64]> = (0..m)
                .filter(|&j| assign[j] == c)
                .map(|j| values[j].as_slice())
                .collect();
            if !members.is_empty() {
                *center = centroid(members);
            }
        }
    }

    let mut groups = vec![Vec::new(); k];
    for (j, &c) in assign.iter().enumerate() {
        groups[c].push(j);
    }
    groups
}

/// Clusters the agents of one step.
pub fn cluster_step(states: &[AgentState], cfg: &ClusterConfig) -> Result<ClusterPartition> {
    cfg.validate()?;
    let Some(first) = states.first() else {
        return Err(Error::Usage("no agent states to cluster".into()));
    };
    let step = first.step_index;
    if let Some(s) = states.iter().find(|s| s.step_index != step) {
        return Err(Error::Usage(format!(
            "states mix steps {step} and {}",
            s.step_index
        )));
    }
    if states.iter().enumerate().any(|(j, s)| s.agent_index != j) {
        return Err(Error::Usage("states must be in agent order 0..M".into()));
    }
    let dim = first.values.len();
    if states.iter().any(|s| s.values.len() != dim) {
        return Err(Error::Usage("states have differing dimensions".into()));
    }
    let values: Vec<Vec<f64>> = states.iter().map(|s| s.values.clone()).collect();
    let m = values.len();

    let groups = match cfg.method {
        Method::Agglomerative => agglomerate(&values, cfg),
        Method::Kmeans => {
            let k = cfg.k.unwrap_or(0);
            if k > m {
                return Err(Error::Config(format!("k = {k} exceeds the {m} agents")));
            }
            kmeans(&values, k, cfg)
        }
    };
    ClusterPartition::from_groups(step, groups, &values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::memory_experiment;
    use crate::model::agent_states;

    fn partition_at(t: usize, cfg: &ClusterConfig) -> ClusterPartition {
        cluster_step(&agent_states(&memory_experiment(), t).unwrap(), cfg).unwrap()
    }

    #[test]
    fn memory_step0() {
        let p = partition_at(0, &ClusterConfig::default());
        assert_eq!(p.groups(), vec![vec![0, 1], vec![2]]);
        assert_eq!(p.assignments, vec![0, 0, 1]);
        assert!((p.clusters[0].centroid[0] - 0.225).abs() < 1e-15);
        assert_eq!(p.clusters[0].centroid[1], 0.50);
        assert_eq!(p.clusters[1].centroid, vec![0.45, 0.70]);
    }

    #[test]
    fn memory_step1() {
        let p = partition_at(1, &ClusterConfig::default());
        assert_eq!(p.groups(), vec![vec![0, 1, 2]]);
        // (0.70 + 0.75 + 0.70) / 3 = 2.15 / 3
        for c in &p.clusters[0].centroid {
            assert!((c - 2.15 / 3.0).abs() < 1e-15);
            assert_eq!(format!("{c:.5}"), "0.71667");
        }
    }

    #[test]
    fn memory_step2_singletons() {
        let exp = memory_experiment();
        let p = partition_at(2, &ClusterConfig::default());
        assert_eq!(p.num_clusters(), 3);
        for (j, c) in p.clusters.iter().enumerate() {
            assert_eq!(c.members, vec![j]);
            assert_eq!(c.centroid, exp.steps()[2].measurements[j]);
        }
    }

    #[test]
    fn distances() {
        let d = distance(&[0.20, 0.50], &[0.25, 0.50], Metric::Euclidean).unwrap();
        assert!((d - 0.05).abs() < 1e-15);
        assert_eq!(distance(&[0.0, 0.0], &[3.0, 4.0], Metric::Euclidean).unwrap(), 5.0);
        assert_eq!(distance(&[0.0, 0.0], &[3.0, 4.0], Metric::Manhattan).unwrap(), 7.0);
        let v = [0.3, -1.2, 7.0];
        assert_eq!(distance(&v, &v, Metric::Euclidean).unwrap(), 0.0);
        assert_eq!(distance(&v, &v, Metric::Manhattan).unwrap(), 0.0);
        assert!(distance(&[1e-200], &[2e-200], Metric::Euclidean).unwrap() > 0.0);
        assert!(matches!(distance(&[1.0], &[1.0, 2.0], Metric::Euclidean), Err(Error::Usage(_))));
    }

    #[test]
    fn linkage_on_memory_step1() {
        let pair = vec![vec![0.70, 0.70], vec![0.75, 0.70]];
        let third = vec![vec![0.70, 0.75]];
        let d = linkage_distance(&pair, &third, Linkage::Complete, Metric::Euclidean).unwrap();
        assert!((d - 0.05f64.hypot(0.05)).abs() < 1e-15);
        assert!(d <= 0.15);
        let s = linkage_distance(&pair, &third, Linkage::Single, Metric::Euclidean).unwrap();
        assert!((s - 0.05).abs() < 1e-15);

        let a = vec![vec![1.0, 2.0]];
        let b = vec![vec![4.0, 6.0]];
        for l in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            assert_eq!(linkage_distance(&a, &b, l, Metric::Euclidean).unwrap(), 5.0);
            let same = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
            assert_eq!(linkage_distance(&same, &same, l, Metric::Manhattan).unwrap(), 0.0);
        }
    }

    #[test]
    fn tie_prefers_smallest_indices() {
        // 0-1 and 1-2 both at distance 1; threshold admits one merge only
        // under complete linkage (0-2 is at distance 2).
        let states: Vec<AgentState> = [0.0, 1.0, 2.0]
            .iter()
            .enumerate()
            .map(|(j, &x)| AgentState { agent_index: j, step_index: 0, values: vec![x] })
            .collect();
        let p = cluster_step(&states, &ClusterConfig::agglomerative(Linkage::Complete, 1.5)).unwrap();
        assert_eq!(p.groups(), vec![vec![0, 1], vec![2]]);
        let p = cluster_step(&states, &ClusterConfig::agglomerative(Linkage::Single, 1.0)).unwrap();
        assert_eq!(p.groups(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn kmeans_memory() {
        let states = agent_states(&memory_experiment(), 0).unwrap();
        let p = cluster_step(&states, &ClusterConfig::kmeans(2, 7)).unwrap();
        assert_eq!(p.groups(), vec![vec![0, 1], vec![2]]);
        let again = cluster_step(&states, &ClusterConfig::kmeans(2, 7)).unwrap();
        assert_eq!(p, again);
        let all = cluster_step(&states, &ClusterConfig::kmeans(3, 1)).unwrap();
        assert_eq!(all.num_clusters(), 3);
        let err = cluster_step(&states, &ClusterConfig::kmeans(4, 1)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn kmeans_identical_points_fills_every_cluster() {
        let states: Vec<AgentState> = (0..5)
            .map(|j| AgentState { agent_index: j, step_index: 0, values: vec![1.0, 1.0] })
            .collect();
        let p = cluster_step(&states, &ClusterConfig::kmeans(3, 3)).unwrap();
        assert_eq!(p.num_clusters(), 3);
        p.check(5).unwrap();
    }

    #[test]
    fn rejects_mixed_steps_and_bad_config() {
        let mut states = agent_states(&memory_experiment(), 0).unwrap();
        states[1].step_index = 1;
        assert!(matches!(cluster_step(&states, &ClusterConfig::default()), Err(Error::Usage(_))));
        let states = agent_states(&memory_experiment(), 0).unwrap();
        let bad = ClusterConfig { threshold: -0.1, ..Default::default() };
        assert!(matches!(cluster_step(&states, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn mean_is_exact_on_repeats() {
        assert_eq!(mean(&[0.1, 0.1, 0.1]), 0.1);
        assert_eq!(mean(&[1e16, 1.0, -1e16]), 1.0 / 3.0);
        assert_eq!(exact_sum([0.1; 10]), 1.0);
    }
}
