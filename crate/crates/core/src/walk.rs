//! Isotropic random walks on discrete ultrametric groups.
//!
//! One step: draw a level k with probability π_k, then move to a uniform
//! point of the ball 𝔊_k around the current position (right multiplication
//! by a uniform element of 𝔊_k, making balls the left cosets x·𝔊_k). The
//! cumulative masses σ_k = Σ_{j<k} π_j determine the walk spectrum through
//! λ_k = −ln σ_k, and the n-step return probability equals the spectral sum
//! at integer time, which is delegated to the heat-kernel evaluator.
//!
//! Everything here follows one indexing convention: π_k is the probability of
//! drawing a step inside the ball of radius r_k, σ_k = Σ_{j<k} π_j =
//! 1 − Σ_{j>=k} π_j is the mass strictly inside radius r_k, and π_0 is the
//! holding mass on 𝔊_0 = {e}.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::heat::HeatKernelEvaluator;
use crate::rng::CounterRng;
use crate::rules::{Domain, SequenceRule};
use crate::space::{CaseKind, EigenvalueProfile, HomogeneousSpace, Provenance};

/// What to do with the step mass above the truncation level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailPolicy {
    /// Add the tail mass to the top level (errs toward longer steps).
    #[default]
    ToTopLevel,
    /// Add the tail mass to the holding weight π_0.
    ToHolding,
    /// Rescale all weights by the retained mass.
    Renormalize,
}

/// Step-length weights π_0..π_K with Σπ = 1 after the truncation policy.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepDistribution {
    pi: Vec<f64>,
    /// Mass that lay above the truncation level before the policy applied.
    tail_mass: f64,
    policy: TailPolicy,
}

impl StepDistribution {
    /// Normalizes non-negative weights; rejects empty or zero-mass tables.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Degenerate("no step weights given".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Degenerate(
                "step weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Degenerate("step weights sum to zero".into()));
        }
        let pi: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Ok(StepDistribution {
            pi,
            tail_mass: 0.0,
            policy: TailPolicy::Renormalize,
        })
    }

    /// Weights induced by an eigenvalue profile on a one-sided space:
    /// σ_k = e^{−λ_k}, so π_0 = e^{−λ_1} and π_k = e^{−λ_{k+1}} − e^{−λ_k}.
    /// The infinite tail above `k_max` carries mass 1 − e^{−λ_{K+1}} and is
    /// folded back per `policy`; if that mass exceeds `tail_tol` the requested
    /// truncation is refused with the level that would suffice.
    pub fn from_profile(
        profile: &EigenvalueProfile,
        k_max: usize,
        policy: TailPolicy,
        tail_tol: f64,
    ) -> Result<Self> {
        let k_top = k_max as i64;
        let tail_mass = 1.0 - (-profile.lambda_extended(k_top + 1)?).exp();
        if tail_mass > tail_tol {
            let mut k = k_top + 1;
            while 1.0 - (-profile.lambda_extended(k + 1)?).exp() > tail_tol {
                k += 1;
                if k > k_top + 100_000 {
                    return Err(Error::Resource(
                        "tail tolerance unreachable within 1e5 levels".into(),
                    ));
                }
            }
            return Err(Error::Config(format!(
                "truncation level {k_max} leaves tail mass {tail_mass:e} > {tail_tol:e}; level {k} suffices"
            )));
        }
        let mut pi = Vec::with_capacity(k_max + 1);
        pi.push((-profile.lambda_extended(1)?).exp()); // π_0 = σ_1
        for k in 1..=k_top {
            // π_k = e^{-λ_{k+1}} - e^{-λ_k} = e^{-λ_k} (e^{C_k} - 1), which
            // keeps full relative precision deep in the tail where both
            // exponentials saturate at 1
            let lam_k = profile.lambda_extended(k)?;
            let c_k = lam_k - profile.lambda_extended(k + 1)?;
            if c_k < 0.0 {
                return Err(Error::Degenerate(format!(
                    "λ increases at level {k}; profile is not a step law"
                )));
            }
            pi.push((-lam_k).exp() * c_k.exp_m1());
        }
        match policy {
            TailPolicy::ToTopLevel => pi[k_max] += tail_mass,
            TailPolicy::ToHolding => pi[0] += tail_mass,
            TailPolicy::Renormalize => {
                let kept: f64 = pi.iter().sum();
                for w in &mut pi {
                    *w /= kept;
                }
            }
        }
        Ok(StepDistribution {
            pi,
            tail_mass,
            policy,
        })
    }

    pub fn levels(&self) -> usize {
        self.pi.len() - 1
    }

    pub fn pi(&self, k: usize) -> f64 {
        self.pi.get(k).copied().unwrap_or(0.0)
    }

    pub fn weights(&self) -> &[f64] {
        &self.pi
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn policy(&self) -> TailPolicy {
        self.policy
    }

    /// σ_k = Σ_{j<k} π_j.
    pub fn sigma(&self, k: usize) -> f64 {
        self.pi[..k.min(self.pi.len())].iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.pi.iter().sum()
    }

    /// Cumulative table for inverse-CDF sampling.
    fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.pi
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect()
    }

    /// Recovers λ_k = −ln(1 − Σ_{j>=k} π_j) for k = 1..=K as a finite-table
    /// profile. The suffix sums keep the mass above each level at full
    /// relative precision even where the prefix σ_k would round to 1. The
    /// tail rule continues the last geometric decay; the table part is exact.
    /// Rejected when some σ_k is not in (0, 1).
    pub fn to_profile(&self) -> Result<EigenvalueProfile> {
        let k_top = self.levels();
        let mut above = vec![0.0f64; k_top + 2];
        for k in (0..=k_top).rev() {
            above[k] = above[k + 1] + self.pi[k];
        }
        let mut lambdas = Vec::with_capacity(k_top);
        for (k, &tail) in above.iter().enumerate().take(k_top + 1).skip(1) {
            if tail >= 1.0 {
                return Err(Error::Degenerate(format!(
                    "σ_{k} <= 0: no mass below level {k}"
                )));
            }
            if tail <= 0.0 {
                return Err(Error::Degenerate(format!(
                    "σ_{k} = 1: all mass lies below level {k}, eigenvalues vanish"
                )));
            }
            lambdas.push(-(-tail).ln_1p());
        }
        if lambdas.len() < 2 {
            return Err(Error::Degenerate(
                "need at least two levels to recover a profile".into(),
            ));
        }
        let last = lambdas[lambdas.len() - 1];
        let prev = lambdas[lambdas.len() - 2];
        let ratio = (last / prev).min(0.999_999);
        let tail = SequenceRule::geometric(
            last * (ratio.powi(-(k_top as i32))),
            ratio,
            Domain::from_index(k_top as i64 + 1),
        );
        Ok(EigenvalueProfile::with_provenance(
            SequenceRule::finite_table(1, lambdas, tail),
            Provenance::FromStepWeights,
        ))
    }
}

/// Group selector for walks and oracles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum GroupKind {
    DirectSum { q: u32 },
    SymmetricGroup,
}

impl GroupKind {
    pub fn space(&self) -> Result<HomogeneousSpace> {
        match self {
            GroupKind::DirectSum { q } => HomogeneousSpace::direct_sum(*q as u64),
            GroupKind::SymmetricGroup => Ok(HomogeneousSpace::symmetric_group()),
        }
    }
}

/// Monte-Carlo configuration. The seed and the chunked counter RNG fully
/// determine the output; the worker count only changes scheduling.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WalkConfig {
    pub group: GroupKind,
    pub step: StepDistribution,
    pub horizon: u32,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

/// Hard budget on horizon × samples.
const WALK_BUDGET: u64 = 10_000_000_000;

/// Walks per RNG stream; fixed so that worker count cannot shift the
/// sample-to-stream assignment.
const CHUNK: u64 = 8192;

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReturnRow {
    pub n: u32,
    pub empirical: f64,
    pub stderr: f64,
    pub exact: f64,
    pub z: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EstimateReport {
    pub rows: Vec<ReturnRow>,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

/// Internal dense walk states; equivalent to the sparse `GroupElement`
/// composition but O(level) per step with no allocation.
enum WalkState {
    Sum {
        q: u32,
        coords: Vec<u32>,
        nonzero: usize,
    },
    Perm {
        map: Vec<u32>,
        scratch: Vec<u32>,
        moved: usize,
    },
}

impl WalkState {
    fn new(kind: GroupKind, levels: usize) -> Self {
        match kind {
            GroupKind::DirectSum { q } => WalkState::Sum {
                q,
                coords: vec![0; levels + 1],
                nonzero: 0,
            },
            // the level-k ball of the symmetric group is S_{k+1}, so a walk
            // truncated at `levels` touches points up to levels+1
            GroupKind::SymmetricGroup => WalkState::Perm {
                map: (0..=levels as u32 + 1).collect(),
                scratch: vec![0; levels + 2],
                moved: 0,
            },
        }
    }

    fn reset(&mut self) {
        match self {
            WalkState::Sum {
                coords, nonzero, ..
            } => {
                coords.fill(0);
                *nonzero = 0;
            }
            WalkState::Perm { map, moved, .. } => {
                for (i, v) in map.iter_mut().enumerate() {
                    *v = i as u32;
                }
                *moved = 0;
            }
        }
    }

    fn is_identity(&self) -> bool {
        match self {
            WalkState::Sum { nonzero, .. } => *nonzero == 0,
            WalkState::Perm { moved, .. } => *moved == 0,
        }
    }

    /// Right-multiplies by a uniform element of 𝔊_k.
    fn step(&mut self, k: usize, rng: &mut CounterRng) {
        if k == 0 {
            return;
        }
        match self {
            WalkState::Sum { q, coords, nonzero } => {
                for c in coords.iter_mut().take(k + 1).skip(1) {
                    let add = rng.uniform_below(*q);
                    let old = *c;
                    let new = (old + add) % *q;
                    *c = new;
                    if old == 0 && new != 0 {
                        *nonzero += 1;
                    } else if old != 0 && new == 0 {
                        *nonzero -= 1;
                    }
                }
            }
            WalkState::Perm {
                map,
                scratch,
                moved,
            } => {
                // the level-k ball is S_{k+1}: draw a uniform permutation g of
                // {1..k+1} (Fisher–Yates), then compose (x·g)(i) = x(g(i))
                let m = k + 1;
                let g = &mut scratch[..=m];
                for (i, v) in g.iter_mut().enumerate() {
                    *v = i as u32;
                }
                for i in (2..=m).rev() {
                    let j = rng.uniform_below(i as u32) as usize + 1;
                    g.swap(i, j);
                }
                // compose in place: first record x(g(i)) into g, then copy back
                for i in 1..=m {
                    g[i] = map[g[i] as usize];
                }
                for i in 1..=m {
                    let old = map[i];
                    let new = g[i];
                    if old == i as u32 && new != i as u32 {
                        *moved += 1;
                    } else if old != i as u32 && new == i as u32 {
                        *moved -= 1;
                    }
                    map[i] = new;
                }
            }
        }
    }
}

/// One public step of the walk on sparse group elements: draw a level from
/// the step law, then multiply by a uniform element of that subgroup.
pub fn sample_step(
    current: &GroupElement,
    step: &StepDistribution,
    rng: &mut CounterRng,
) -> Result<GroupElement> {
    let cumulative = step.cumulative();
    let u = rng.uniform_f64();
    let k = cumulative.partition_point(|c| *c <= u).min(step.levels());
    if k == 0 {
        return Ok(current.clone());
    }
    let g = match current {
        GroupElement::DirectSum { q, .. } => {
            let mut entries = Vec::with_capacity(k);
            for i in 1..=k as u32 {
                entries.push((i, rng.uniform_below(*q)));
            }
            GroupElement::sum_from_coords(*q, &entries)?
        }
        GroupElement::Permutation { .. } => {
            // uniform on the level-k ball S_{k+1}
            let m = k + 1;
            let mut g: Vec<u32> = (0..=m as u32).collect();
            for i in (2..=m).rev() {
                let j = rng.uniform_below(i as u32) as usize + 1;
                g.swap(i, j);
            }
            let entries: Vec<(u32, u32)> = (1..=m as u32).map(|i| (i, g[i as usize])).collect();
            GroupElement::permutation_from_map(&entries)?
        }
    };
    current.compose(&g)
}

/// Runs `samples` independent walks of length `horizon` and counts returns to
/// the identity at each step. Deterministic for a fixed seed regardless of
/// the worker count: samples are split into fixed chunks, each chunk owns the
/// counter-RNG stream keyed by its index, and chunk counts merge by addition.
/// `exact` supplies the reference return probabilities for n = 1..=horizon.
pub fn simulate_return(config: &WalkConfig, exact: &[f64]) -> Result<EstimateReport> {
    if config.samples == 0 || config.horizon == 0 {
        return Err(Error::config("need samples >= 1 and horizon >= 1"));
    }
    match (config.horizon as u64).checked_mul(config.samples) {
        Some(work) if work <= WALK_BUDGET => {}
        _ => {
            return Err(Error::Resource(format!(
                "horizon × samples exceeds the budget of {WALK_BUDGET}"
            )))
        }
    }
    if exact.len() < config.horizon as usize {
        return Err(Error::config(
            "need an exact return value for every step up to the horizon",
        ));
    }
    let total: f64 = config.step.total_mass();
    if (total - 1.0).abs() > 1e-14 {
        return Err(Error::Degenerate(format!(
            "step weights sum to {total}, not 1"
        )));
    }

    let horizon = config.horizon as usize;
    let n_chunks = config.samples.div_ceil(CHUNK);
    let workers = config.workers.max(1);
    let cumulative = config.step.cumulative();
    let levels = config.step.levels();

    let run_chunk = |chunk: u64| -> Vec<u64> {
        let mut counts = vec![0u64; horizon + 1];
        let mut rng = CounterRng::new(config.seed, chunk);
        let lo = chunk * CHUNK;
        let hi = ((chunk + 1) * CHUNK).min(config.samples);
        let mut state = WalkState::new(config.group, levels);
        for _ in lo..hi {
            state.reset();
            for count in counts.iter_mut().skip(1) {
                let u = rng.uniform_f64();
                let k = cumulative.partition_point(|c| *c <= u).min(levels);
                state.step(k, &mut rng);
                if state.is_identity() {
                    *count += 1;
                }
            }
        }
        counts
    };

    let mut counts = vec![0u64; horizon + 1];
    if workers == 1 || n_chunks == 1 {
        for chunk in 0..n_chunks {
            for (acc, c) in counts.iter_mut().zip(run_chunk(chunk)) {
                *acc += c;
            }
        }
    } else {
        let next = std::sync::atomic::AtomicU64::new(0);
        let partials = std::sync::Mutex::new(vec![0u64; horizon + 1]);
        std::thread::scope(|scope| {
            for _ in 0..workers.min(n_chunks as usize) {
                scope.spawn(|| {
                    let mut local = vec![0u64; horizon + 1];
                    loop {
                        let chunk = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        if chunk >= n_chunks {
                            break;
                        }
                        for (acc, c) in local.iter_mut().zip(run_chunk(chunk)) {
                            *acc += c;
                        }
                    }
                    let mut guard = partials.lock().unwrap();
                    for (acc, c) in guard.iter_mut().zip(local) {
                        *acc += c;
                    }
                });
            }
        });
        counts = partials.into_inner().unwrap();
    }

    let m = config.samples as f64;
    let rows = (1..=horizon)
        .map(|n| {
            let empirical = counts[n] as f64 / m;
            let stderr = (empirical * (1.0 - empirical) / m).sqrt();
            let e = exact[n - 1];
            let z = if stderr > 0.0 {
                (empirical - e) / stderr
            } else if empirical == e {
                0.0
            } else {
                f64::INFINITY * (empirical - e).signum()
            };
            ReturnRow {
                n: n as u32,
                empirical,
                stderr,
                exact: e,
                z,
            }
        })
        .collect();
    Ok(EstimateReport {
        rows,
        samples: config.samples,
        seed: config.seed,
        workers: config.workers,
    })
}

/// Exact n-step return probability: the spectral sum at integer time,
/// delegated to the certified heat-kernel series. n = 0 returns 1.
pub fn exact_return(
    n: u32,
    profile: &EigenvalueProfile,
    space: &HomogeneousSpace,
    rel_tol: f64,
) -> Result<f64> {
    if space.case() != CaseKind::OneSided {
        return Err(Error::domain(
            "return probabilities live on one-sided (discrete group) spaces",
        ));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let evaluator = HeatKernelEvaluator::new(space.clone(), profile.clone(), rel_tol)?;
    Ok(evaluator.diagonal(n as f64)?.value)
}

/// Finite truncation of the group for the dense convolution oracle.
#[derive(Clone, Copy, Debug)]
pub enum FiniteGroup {
    /// ⊕_{j<=levels} Z(q), order q^levels.
    DirectSum { q: u32, levels: u32 },
    /// Permutations of {1..degree}, order degree!.
    Symmetric { degree: u32 },
}

const ORACLE_MAX_ORDER: usize = 10_000;

impl FiniteGroup {
    pub fn order(&self) -> Result<usize> {
        let order = match self {
            FiniteGroup::DirectSum { q, levels } => {
                (*q as u128).checked_pow(*levels).unwrap_or(u128::MAX)
            }
            FiniteGroup::Symmetric { degree } => (2..=*degree as u128).product::<u128>(),
        };
        if order > ORACLE_MAX_ORDER as u128 {
            return Err(Error::Resource(format!(
                "finite group of order {order} exceeds the oracle cap {ORACLE_MAX_ORDER}"
            )));
        }
        Ok(order as usize)
    }

    fn levels(&self) -> usize {
        match self {
            FiniteGroup::DirectSum { levels, .. } => *levels as usize,
            // ball levels 0..=degree-1 with V(k) = (k+1)!
            FiniteGroup::Symmetric { degree } => *degree as usize - 1,
        }
    }

    /// Ball volumes V(0..=levels).
    fn volumes(&self) -> Vec<usize> {
        match self {
            FiniteGroup::DirectSum { q, levels } => {
                (0..=*levels).map(|k| (*q as usize).pow(k)).collect()
            }
            FiniteGroup::Symmetric { degree } => (1..=*degree as usize)
                .map(|m| (1..=m).product::<usize>())
                .collect(),
        }
    }
}

/// n-fold convolution power of the hierarchical step density evaluated at the
/// identity, by direct dense convolution over the finite group. Independent
/// of the spectral machinery. The step law is folded onto the available
/// levels (mass above the top level is added to it).
pub fn convolution_oracle(step: &StepDistribution, group: FiniteGroup, n: u32) -> Result<f64> {
    let order = group.order()?;
    let levels = group.levels();
    let volumes = group.volumes();

    let mut pi: Vec<f64> = (0..=levels).map(|k| step.pi(k)).collect();
    let extra: f64 = (levels + 1..=step.levels()).map(|k| step.pi(k)).sum();
    pi[levels] += extra;

    // density of one step: μ(g) = Σ_{k >= level(g)} π_k / V(k)
    let density_by_level: Vec<f64> = (0..=levels)
        .map(|lvl| (lvl..=levels).map(|k| pi[k] / volumes[k] as f64).sum())
        .collect();

    match group {
        FiniteGroup::DirectSum { q, levels } => {
            let q = q as usize;
            let level_of = |idx: usize| -> usize {
                let mut i = idx;
                let mut lvl = 0;
                let mut pos = 0;
                while i > 0 {
                    pos += 1;
                    if !i.is_multiple_of(q) {
                        lvl = pos;
                    }
                    i /= q;
                }
                lvl
            };
            let mu: Vec<f64> = (0..order).map(|g| density_by_level[level_of(g)]).collect();
            let mut nu = vec![0.0f64; order];
            nu[0] = 1.0;
            let mut digits_diff = vec![0usize; levels as usize];
            for _ in 0..n {
                let mut out = vec![0.0f64; order];
                for (g, &w) in nu.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    for (h, o) in out.iter_mut().enumerate() {
                        // componentwise h - g mod q
                        let mut gg = g;
                        let mut hh = h;
                        for d in digits_diff.iter_mut() {
                            *d = (hh % q + q - gg % q) % q;
                            gg /= q;
                            hh /= q;
                        }
                        let mut diff = 0usize;
                        for (pos, &d) in digits_diff.iter().enumerate() {
                            diff += d * q.pow(pos as u32);
                        }
                        *o += w * mu[diff];
                    }
                }
                nu = out;
            }
            Ok(nu[0])
        }
        FiniteGroup::Symmetric { degree } => {
            let deg = degree as usize;
            let perms = enumerate_permutations(deg);
            let index_of: std::collections::HashMap<Vec<u32>, usize> = perms
                .iter()
                .enumerate()
                .map(|(i, p)| (p.clone(), i))
                .collect();
            let level_of = |p: &[u32]| -> usize {
                (1..=deg)
                    .rev()
                    .find(|&i| p[i] != i as u32)
                    .map_or(0, |m| m - 1)
            };
            let mu: Vec<f64> = perms
                .iter()
                .map(|p| density_by_level[level_of(p)])
                .collect();
            // inverse and product tables
            let inv: Vec<usize> = perms
                .iter()
                .map(|p| {
                    let mut q = vec![0u32; deg + 1];
                    for i in 1..=deg {
                        q[p[i] as usize] = i as u32;
                    }
                    index_of[&q]
                })
                .collect();
            let mut nu = vec![0.0f64; order];
            nu[0] = 1.0;
            for _ in 0..n {
                let mut out = vec![0.0f64; order];
                for (g, &w) in nu.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let pg_inv = &perms[inv[g]];
                    for (h, o) in out.iter_mut().enumerate() {
                        // μ(g⁻¹ h): (g⁻¹·h)(i) = g⁻¹(h(i))
                        let ph = &perms[h];
                        let mut comp = vec![0u32; deg + 1];
                        for i in 1..=deg {
                            comp[i] = pg_inv[ph[i] as usize];
                        }
                        *o += w * mu[index_of[&comp]];
                    }
                }
                nu = out;
            }
            Ok(nu[0])
        }
    }
}

/// All permutations of {1..deg} as 1-indexed image vectors, identity first.
fn enumerate_permutations(deg: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current: Vec<u32> = (0..=deg as u32).collect();
    fn rec(current: &mut Vec<u32>, pos: usize, deg: usize, out: &mut Vec<Vec<u32>>) {
        if pos > deg {
            out.push(current.clone());
            return;
        }
        for i in pos..=deg {
            current.swap(pos, i);
            rec(current, pos + 1, deg, out);
            current.swap(pos, i);
        }
    }
    rec(&mut current, 1, deg, &mut out);
    out.sort();
    out
}

/// Exact spectral return probability of the truncated step law on the finite
/// group 𝔊_K: Σ_{k=1}^{K} σ_k^n (1/V(k-1) − 1/V(k)) + 1/V(K).
pub fn finite_spectral_return(step: &StepDistribution, group: FiniteGroup, n: u32) -> Result<f64> {
    let levels = group.levels();
    let volumes = group.volumes();
    let mut pi: Vec<f64> = (0..=levels).map(|k| step.pi(k)).collect();
    let extra: f64 = (levels + 1..=step.levels()).map(|k| step.pi(k)).sum();
    pi[levels] += extra;
    let mut acc = 1.0 / volumes[levels] as f64;
    let mut sigma = 0.0;
    for k in 1..=levels {
        sigma += pi[k - 1];
        acc += sigma.powi(n as i32) * (1.0 / volumes[k - 1] as f64 - 1.0 / volumes[k] as f64);
    }
    Ok(acc)
}
