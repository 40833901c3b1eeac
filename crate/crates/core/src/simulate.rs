//! Seeded Monte Carlo simulation of the absorbing walk and of the discrete
//! boundary jump chain, with statistics against the exact quantities.
//!
//! Determinism is part of the contract: identical (seed, config, spec)
//! produce bit-identical output, and the generator is specified exactly so
//! that ports to other languages can reproduce the streams.

use num_traits::Zero;

use crate::boundary::{JumpProcessSpec, LeafMatrix};
use crate::error::Error;
use crate::ratio::{rat_from_f64, rat_to_f64, Rat};
use crate::tree::Vertex;
use crate::walk::{Walk, WalkKernels};
use crate::Result;

/// Deterministic 64-bit generator: xorshift64* (Marsaglia's xorshift with
/// the multiplier of Vigna's variant).
///
/// State update: `x ^= x >> 12; x ^= x << 25; x ^= x >> 27`, output
/// `x * 0x2545F4914F6CDD1D`. The state is seeded through one round of
/// SplitMix64 (`z = (seed + 0x9E3779B97F4A7C15); z = (z ^ (z >> 30)) *
/// 0xBF58476D1CE4E5B9; z = (z ^ (z >> 27)) * 0x94D049BB133111EB; z ^ (z >>
/// 31)`), replaced by `0x9E3779B97F4A7C15` in the measure-zero case that
/// the mix returns 0 (xorshift state must be nonzero).
#[derive(Debug, Clone)]
pub struct Rng64 {
    state: u64,
}

const GOLDEN: u64 = 0x9E3779B97F4A7C15;

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

impl Rng64 {
    pub fn new(seed: u64) -> Rng64 {
        let mixed = splitmix64(seed);
        Rng64 { state: if mixed == 0 { GOLDEN } else { mixed } }
    }

    /// Derive the stream of worker `index` from a base seed. Workers must
    /// use `splitmix64(seed ^ (index + 1) * GOLDEN)` so that merged counts
    /// are order-independent and reproducible across runs and languages.
    pub fn for_worker(seed: u64, index: u64) -> Rng64 {
        Rng64::new(seed ^ (index.wrapping_add(1)).wrapping_mul(GOLDEN))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    /// Uniform in [0, 1): the top 53 bits scaled by 2^-53.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Simulation parameters.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub seed: u64,
    pub trials: u64,
    pub start: Vertex,
    /// Cap per trajectory; exceeding it is counted, not an error.
    pub max_steps: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        if self.max_steps < 1 {
            return Err(Error::InvalidInput("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Empirical results of simulating the walk to absorption.
#[derive(Debug, Clone)]
pub struct WalkStats {
    /// Absorption counts per leaf, in leaf order.
    pub counts: Vec<u64>,
    /// counts / trials.
    pub empirical: Vec<f64>,
    /// Exact absorption probabilities from the start.
    pub exact: Vec<f64>,
    /// Total variation distance between empirical and exact.
    pub tv: f64,
    /// Per-leaf standard error sqrt(p(1-p)/N) under the exact p.
    pub std_error: Vec<f64>,
    /// Trajectories that hit the step cap without absorbing.
    pub overflows: u64,
    pub trials: u64,
    pub seed: u64,
}

/// Run the absorbing walk `trials` times from `config.start` and compare
/// absorption frequencies with the exact limit distribution. A leaf start
/// absorbs immediately at itself.
pub fn simulate_walk(walk: &Walk, kernels: &WalkKernels, config: &SimConfig) -> Result<WalkStats> {
    config.validate()?;
    let tree = walk.tree();
    if config.start >= tree.vertex_count() {
        return Err(Error::InvalidInput(format!("unknown start vertex {}", config.start)));
    }
    // Cumulative rational thresholds per interior vertex; a uniform draw is
    // an exact dyadic rational, so the comparison is exact and the sampled
    // step distribution is the transition row itself.
    let n = tree.vertex_count();
    let mut cumulative: Vec<Vec<(Vertex, Rat)>> = vec![Vec::new(); n];
    for v in tree.interior_vertices() {
        let mut acc = Rat::zero();
        let row = walk
            .outgoing(v)
            .iter()
            .map(|(y, p)| {
                acc += p;
                (*y, acc.clone())
            })
            .collect();
        cumulative[v] = row;
    }

    let mut rng = Rng64::new(config.seed);
    let mut counts = vec![0u64; tree.leaf_count()];
    let mut overflows = 0u64;
    for _ in 0..config.trials {
        let mut at = config.start;
        let mut steps = 0u64;
        loop {
            if tree.is_leaf(at) {
                counts[tree.leaf_position(at).unwrap()] += 1;
                break;
            }
            if steps >= config.max_steps {
                overflows += 1;
                break;
            }
            let u = rat_from_f64(rng.uniform()).expect("uniform draws are finite");
            let row = &cumulative[at];
            let mut next = row.last().expect("interior rows are nonempty").0;
            for (y, threshold) in row {
                if u < *threshold {
                    next = *y;
                    break;
                }
            }
            at = next;
            steps += 1;
        }
    }

    let exact_rat = kernels.absorption_vector(config.start);
    let exact: Vec<f64> = exact_rat.iter().map(rat_to_f64).collect();
    let empirical: Vec<f64> =
        counts.iter().map(|&c| c as f64 / config.trials as f64).collect();
    let tv = 0.5
        * empirical
            .iter()
            .zip(exact.iter())
            .map(|(e, x)| (e - x).abs())
            .sum::<f64>()
        + 0.5 * overflows as f64 / config.trials as f64;
    let std_error: Vec<f64> =
        exact.iter().map(|p| (p * (1.0 - p) / config.trials as f64).sqrt()).collect();
    Ok(WalkStats {
        counts,
        empirical,
        exact,
        tv,
        std_error,
        overflows,
        trials: config.trials,
        seed: config.seed,
    })
}

/// Empirical results of simulating the discrete boundary jump chain.
#[derive(Debug, Clone)]
pub struct JumpStats {
    /// Landing counts per leaf after `steps` steps, in leaf order.
    pub counts: Vec<u64>,
    pub empirical: Vec<f64>,
    /// The matching row of the exact operator power.
    pub exact: Vec<f64>,
    pub tv: f64,
    pub steps: u32,
    pub trials: u64,
    pub seed: u64,
}

/// Sample the discrete jump chain of the t = 1 operator: draw a radius by
/// inverse-CDF sampling of the radius distribution, then land
/// μ-proportionally inside the ball of that radius around the current
/// point. Repeats `steps` times per trial and compares the landing
/// frequencies with the exact operator power row.
pub fn simulate_jump_chain(
    spec: &JumpProcessSpec,
    config: &SimConfig,
    steps: u32,
) -> Result<JumpStats> {
    config.validate()?;
    if steps < 1 {
        return Err(Error::InvalidInput("steps must be at least 1".into()));
    }
    let tree = spec.tree();
    if tree.leaf_position(config.start).is_none() {
        return Err(Error::InvalidInput(format!(
            "jump chain starts at a leaf; {} is interior",
            config.start
        )));
    }

    // Per-leaf path structure: interior CDF values bottom-up
    // (smallest radius first) paired with the ball vertex they select.
    // Given u uniform in [0,1): u < F(smallest radius) keeps the chain at
    // the current atom; otherwise the selected ball is the one whose CDF
    // bracket contains u; u >= F(diameter) averages over everything.
    struct LeafPlan {
        /// (CDF value at the radius of the vertex, ball vertex), ordered
        /// from the leaf's parent up to the root.
        levels: Vec<(f64, Vertex)>,
    }
    let mut plans: Vec<LeafPlan> = Vec::with_capacity(tree.leaf_count());
    for &leaf in tree.leaves() {
        let mut levels = Vec::new();
        let mut path = tree.path_from_root(leaf);
        path.pop(); // drop the leaf; interior prefix remains
        for &v in path.iter().rev() {
            levels.push((spec.cdf_at(v), v));
        }
        plans.push(LeafPlan { levels });
    }
    // μ cumulative over the full leaf order; ball-conditional sampling uses
    // the branch's contiguous leaf range.
    let mu = spec.measure();
    let leaf_count = tree.leaf_count();
    let mut mu_prefix: Vec<Rat> = Vec::with_capacity(leaf_count + 1);
    mu_prefix.push(Rat::zero());
    for i in 0..leaf_count {
        let v = &mu_prefix[i] + mu.mass_at(i);
        mu_prefix.push(v);
    }

    let mut rng = Rng64::new(config.seed);
    let mut counts = vec![0u64; leaf_count];
    let start_index = tree.leaf_position(config.start).unwrap();
    for _ in 0..config.trials {
        let mut at = start_index;
        for _ in 0..steps {
            let u = rng.uniform();
            let plan = &plans[at];
            let mut ball: Option<Vertex> = None;
            let mut stay = true;
            for &(cdf, v) in &plan.levels {
                if u >= cdf {
                    stay = false;
                    ball = Some(v);
                } else {
                    break;
                }
            }
            // u below every interior CDF value: atomic ball, stay in place.
            if stay {
                continue;
            }
            // The selected ball is the highest vertex whose CDF value is
            // <= u; when u exceeds the CDF at the root that is the whole
            // boundary (the root's branch).
            let v = ball.unwrap();
            let (lo, hi) = tree.leaf_range(v);
            // Land μ-proportionally within the ball: pick the first leaf
            // whose cumulative conditional mass exceeds a fresh uniform.
            let u2 = rat_from_f64(rng.uniform()).expect("uniform draws are finite");
            let ball_mass = &mu_prefix[hi] - &mu_prefix[lo];
            let target = &mu_prefix[lo] + u2 * ball_mass;
            // binary search over the exact prefix sums
            let mut a = lo;
            let mut b = hi;
            while a + 1 < b {
                let mid = (a + b) / 2;
                if mu_prefix[mid] <= target {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            at = a;
        }
        counts[at] += 1;
    }

    // Exact row of the operator power.
    let p1 = spec.transition_operator(1.0)?;
    let mut power: LeafMatrix<f64> = p1.clone();
    for _ in 1..steps {
        power = power.mul(&p1);
    }
    let exact = power.row(start_index).to_vec();
    let empirical: Vec<f64> =
        counts.iter().map(|&c| c as f64 / config.trials as f64).collect();
    let tv = 0.5
        * empirical
            .iter()
            .zip(exact.iter())
            .map(|(e, x)| (e - x).abs())
            .sum::<f64>();
    Ok(JumpStats {
        counts,
        empirical,
        exact,
        tv,
        steps,
        trials: config.trials,
        seed: config.seed,
    })
}
