//! Synthetic experiments with planted group structure.
//!
//! Agent `j` at step `t` sits at its planted cluster's center plus isotropic
//! Gaussian noise. Each `(seed, t, j)` triple keys its own ChaCha stream, so
//! a value never depends on the order in which others were generated.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Experiment;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    #[serde(alias = "M")]
    pub m: usize,
    #[serde(alias = "N")]
    pub n: usize,
    #[serde(alias = "T")]
    pub t: usize,
    /// Per step, the planted groups of agent indices.
    pub planted_partitions: Vec<Vec<Vec<usize>>>,
    /// Per step, one center per planted group.
    pub cluster_centers: Vec<Vec<Vec<f64>>>,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Per step, the independent values (all of equal length K).
    pub independent_schedule: Vec<Vec<f64>>,
}

fn stream_key(seed: u64, t: usize, j: usize) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(t as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(j as u64).to_le_bytes());
    key[24..].copy_from_slice(b"cmdsynth");
    key
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.m == 0 || self.n == 0 || self.t == 0 {
            return bad("M, N and T must be positive".into());
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!("noise_sigma must be finite and >= 0, got {}", self.noise_sigma));
        }
        if self.planted_partitions.len() != self.t
            || self.cluster_centers.len() != self.t
            || self.independent_schedule.len() != self.t
        {
            return bad(format!(
                "planted_partitions, cluster_centers and independent_schedule need {} entries",
                self.t
            ));
        }
        let k = self.independent_schedule[0].len();
        for (t, ivs) in self.independent_schedule.iter().enumerate() {
            if k == 0 || ivs.len() != k || ivs.iter().any(|v| !v.is_finite()) {
                return bad(format!("step {t}: independent values must be {k} finite numbers, K >= 1"));
            }
        }
        for (t, (groups, centers)) in self.planted_partitions.iter().zip(&self.cluster_centers).enumerate() {
            if groups.len() != centers.len() {
                return bad(format!(
                    "step {t}: {} planted groups but {} centers",
                    groups.len(),
                    centers.len()
                ));
            }
            let mut seen = vec![false; self.m];
            for g in groups {
                if g.is_empty() {
                    return bad(format!("step {t}: empty planted group"));
                }
                for &j in g {
                    if j >= self.m || std::mem::replace(&mut seen[j], true) {
                        return bad(format!("step {t}: agent {j} out of range or repeated"));
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return bad(format!("step {t}: planted groups do not cover every agent"));
            }
            if centers.iter().any(|c| c.len() != self.n || c.iter().any(|v| !v.is_finite())) {
                return bad(format!("step {t}: every center needs {} finite values", self.n));
            }
        }
        Ok(())
    }

    /// Smallest distance between two planted centers at step `t`
    /// (infinite when there is only one group).
    pub fn min_center_gap(&self, t: usize) -> f64 {
        let c = &self.cluster_centers[t];
        let mut gap = f64::INFINITY;
        for a in 0..c.len() {
            for b in a + 1..c.len() {
                let d: f64 = c[a].iter().zip(&c[b]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                gap = gap.min(d);
            }
        }
        gap
    }

    /// Radius that contains a noisy agent state around its center with
    /// overwhelming probability: `3 * sigma * sqrt(N)`.
    pub fn noise_radius(&self) -> f64 {
        3.0 * self.noise_sigma * (self.n as f64).sqrt()
    }

    /// Smallest center gap over all steps divided by the noise radius.
    pub fn separation_ratio(&self) -> f64 {
        let gap = (0..self.t).map(|t| self.min_center_gap(t)).fold(f64::INFINITY, f64::min);
        gap / self.noise_radius()
    }

    /// Agglomerative threshold that separates planted groups: half the
    /// smallest center gap. With every state inside its noise radius `r` and
    /// gaps above `4r`, same-group distances stay below `2r` and cross-group
    /// distances stay above `gap - 2r`, both on the right side of `gap / 2`.
    pub fn recovery_threshold(&self) -> f64 {
        let gap = (0..self.t).map(|t| self.min_center_gap(t)).fold(f64::INFINITY, f64::min);
        if gap.is_finite() {
            gap / 2.0
        } else {
            f64::MAX
        }
    }

    /// Random spec: every step gets between 1 and `max_groups` planted groups
    /// (capped at `m`), with centers on distinct points of a lattice of pitch
    /// `separation`, so any two centers are at least `separation` apart.
    pub fn random_planted(
        m: usize,
        n: usize,
        t: usize,
        max_groups: usize,
        separation: f64,
        noise_sigma: f64,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0fc1_u64);
        let mut partitions = Vec::with_capacity(t);
        let mut centers = Vec::with_capacity(t);
        let mut schedule = Vec::with_capacity(t);
        let side = (max_groups.max(2) as f64).sqrt().ceil() as i64 + 1;
        for step in 0..t {
            let groups = rng.random_range(1..=max_groups.clamp(1, m));
            let mut agents: Vec<usize> = (0..m).collect();
            agents.shuffle(&mut rng);
            // first `groups` agents seed distinct groups, the rest join at random
            let mut planted: Vec<Vec<usize>> = agents[..groups].iter().map(|&j| vec![j]).collect();
            for &j in &agents[groups..] {
                let g = rng.random_range(0..groups);
                planted[g].push(j);
            }
            let mut lattice: Vec<Vec<f64>> = Vec::with_capacity(groups);
            while lattice.len() < groups {
                let p: Vec<f64> = (0..n)
                    .map(|_| rng.random_range(-side..=side) as f64 * separation)
                    .collect();
                if !lattice.contains(&p) {
                    lattice.push(p);
                }
            }
            partitions.push(planted);
            centers.push(lattice);
            schedule.push(vec![step as f64]);
        }
        SynthSpec {
            m,
            n,
            t,
            planted_partitions: partitions,
            cluster_centers: centers,
            noise_sigma,
            seed,
            independent_schedule: schedule,
        }
    }
}

/// Builds the experiment described by `spec`.
pub fn generate(spec: &SynthSpec) -> Result<Experiment> {
    spec.validate()?;
    let k = spec.independent_schedule[0].len();
    let steps = (0..spec.t)
        .map(|t| {
            let mut rows = vec![Vec::new(); spec.m];
            for (g, members) in spec.planted_partitions[t].iter().enumerate() {
                let center = &spec.cluster_centers[t][g];
                for &j in members {
                    let mut rng = ChaCha8Rng::from_seed(stream_key(spec.seed, t, j));
                    rows[j] = center
                        .iter()
                        .map(|c| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            c + spec.noise_sigma * z
                        })
                        .collect();
                }
            }
            (spec.independent_schedule[t].clone(), rows)
        })
        .collect();
    Experiment::new(
        (1..=spec.m).map(|j| format!("A{j}")).collect(),
        (1..=spec.n).map(|i| format!("y{i}")).collect(),
        (1..=k).map(|i| format!("x{i}")).collect(),
        steps,
    )
}
