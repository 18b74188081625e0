//! Greedy, certificate-driven clustering of a block collection, plus the
//! seeded random baseline.
//!
//! Each algorithm walks the collection anchor-first and merges candidate
//! blocks only while its certificate keeps the predicted relative
//! truncation error of the post-merge cluster within the budget. Certificates
//! are always evaluated on a tentative state that already includes the
//! candidate, so rejected candidates leave no trace.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::{weyl_bound, weyl_tail_bound, BlockSummary, BoundValue};
use crate::collection::{Block, Collection};
use crate::error::{Error, Result};
use crate::linalg::{exact_trunc_error, Tolerances};
use crate::tracker::{GramTracker, ResidualTracker};

/// Relative error budget and target rank shared by all clusters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget {
    epsilon: f64,
    target_rank: usize,
}

impl ErrorBudget {
    pub fn new(epsilon: f64, target_rank: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(
                "epsilon must lie strictly between 0 and 1".into(),
            ));
        }
        if target_rank == 0 {
            return Err(Error::InvalidArgument("target rank must be positive".into()));
        }
        Ok(Self {
            epsilon,
            target_rank,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn target_rank(&self) -> usize {
        self.target_rank
    }
}

/// Candidate ordering inside a growing cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortMode {
    /// Ascending Frobenius norm among the remaining blocks.
    Frobenius,
    /// Ascending residual norm against the current cluster basis,
    /// re-evaluated after every accepted merge.
    Residual,
}

impl fmt::Display for SortMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SortMode::Frobenius => "frobenius",
            SortMode::Residual => "residual",
        })
    }
}

impl FromStr for SortMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frobenius" => Ok(SortMode::Frobenius),
            "residual" => Ok(SortMode::Residual),
            other => Err(Error::InvalidArgument(format!("unknown sort mode `{other}`"))),
        }
    }
}

/// What to do when a candidate fails the certificate: end the cluster, or
/// set the candidate aside and keep probing the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RejectPolicy {
    #[default]
    Stop,
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmKind {
    MaxNorm,
    Residual,
    Approx,
    Random,
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgorithmKind::MaxNorm => "max-norm",
            AlgorithmKind::Residual => "residual",
            AlgorithmKind::Approx => "approx",
            AlgorithmKind::Random => "random",
        })
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-norm" => Ok(AlgorithmKind::MaxNorm),
            "residual" => Ok(AlgorithmKind::Residual),
            "approx" => Ok(AlgorithmKind::Approx),
            "random" => Ok(AlgorithmKind::Random),
            other => Err(Error::InvalidArgument(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// One planned cluster: ordered members with their column counts, the rank
/// assigned to the cluster and the bound that admitted it.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedCluster {
    pub id: String,
    pub members: Vec<(String, usize)>,
    pub rank: usize,
    pub predicted: BoundValue,
}

impl PlannedCluster {
    /// Total column count of the concatenated cluster.
    pub fn total_cols(&self) -> usize {
        self.members.iter().map(|(_, c)| c).sum()
    }

    pub fn member_ids(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(|(id, _)| id.as_str())
    }
}

/// A disjoint cover of the collection's block ids with per-cluster ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub m: usize,
    pub algorithm: AlgorithmKind,
    pub epsilon: Option<f64>,
    pub rank: usize,
    pub sort_mode: Option<SortMode>,
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub clusters: Vec<PlannedCluster>,
}

impl Partition {
    /// Checks that the partition is a disjoint, exact cover of the collection.
    pub fn validate_cover(&self, coll: &Collection) -> Result<()> {
        if self.m != coll.m() {
            return Err(Error::PlanMismatch(format!(
                "row dimension {} differs from collection {}",
                self.m,
                coll.m()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for cluster in &self.clusters {
            for (id, cols) in &cluster.members {
                let block = coll
                    .get(id)
                    .ok_or_else(|| Error::PlanMismatch(format!("plan names unknown block `{id}`")))?;
                if block.cols() != *cols {
                    return Err(Error::PlanMismatch(format!(
                        "block `{id}` has {} columns, plan records {cols}",
                        block.cols()
                    )));
                }
                if !seen.insert(id.clone()) {
                    return Err(Error::PlanMismatch(format!(
                        "block `{id}` appears in more than one cluster"
                    )));
                }
            }
        }
        if seen.len() != coll.len() {
            return Err(Error::PlanMismatch(format!(
                "plan covers {} of {} blocks",
                seen.len(),
                coll.len()
            )));
        }
        Ok(())
    }
}

/// Caps each cluster rank at `min(r, min(m, N_c))` so no cluster requests
/// more singular triplets than its concatenation has.
pub fn assign_rank(mut partition: Partition, r: usize) -> Partition {
    for cluster in &mut partition.clusters {
        cluster.rank = r.min(partition.m).min(cluster.total_cols().max(1));
    }
    partition
}

fn cluster_id(index: usize) -> String {
    format!("c{index}")
}

fn members_of(coll: &Collection, indices: &[usize]) -> Vec<(String, usize)> {
    indices
        .iter()
        .map(|&i| {
            let b = &coll.blocks()[i];
            (b.id().to_string(), b.cols())
        })
        .collect()
}

/// Index of the remaining block with the largest energy, ties broken by
/// ascending id.
fn take_largest(coll: &Collection, remaining: &mut Vec<usize>) -> usize {
    let pos = remaining
        .iter()
        .enumerate()
        .max_by(|(_, &a), (_, &b)| {
            let (ba, bb) = (&coll.blocks()[a], &coll.blocks()[b]);
            ba.energy_sq()
                .total_cmp(&bb.energy_sq())
                .then_with(|| bb.id().cmp(ba.id()))
        })
        .map(|(pos, _)| pos)
        .expect("remaining is non-empty");
    remaining.swap_remove(pos)
}

/// Position in `remaining` of the smallest-energy block, ties by ascending id.
fn smallest_position(coll: &Collection, remaining: &[usize]) -> usize {
    remaining
        .iter()
        .enumerate()
        .min_by(|(_, &a), (_, &b)| {
            let (ba, bb) = (&coll.blocks()[a], &coll.blocks()[b]);
            ba.energy_sq()
                .total_cmp(&bb.energy_sq())
                .then_with(|| ba.id().cmp(bb.id()))
        })
        .map(|(pos, _)| pos)
        .expect("remaining is non-empty")
}

/// Anchor-and-tail clustering from block norms alone.
///
/// The head is grown with the largest remaining blocks while its total column
/// count stays within the target rank; the tail is filled with the smallest
/// remaining blocks while the prospective tail energy keeps the certificate
/// below the budget.
pub fn cluster_max_norm(coll: &Collection, budget: &ErrorBudget) -> Result<Partition> {
    if coll.is_empty() {
        return Err(Error::EmptyInput("cannot cluster an empty collection"));
    }
    let r = budget.target_rank();
    let eps_sq = budget.epsilon() * budget.epsilon();
    let mut remaining: Vec<usize> = (0..coll.len()).collect();
    let mut clusters = Vec::new();

    while !remaining.is_empty() {
        let anchor = take_largest(coll, &mut remaining);
        let mut members = vec![anchor];
        let mut head_cols = coll.blocks()[anchor].cols();
        let mut head_energy = coll.blocks()[anchor].energy_sq();

        // Grow the head with the next-largest blocks within the width budget.
        loop {
            if remaining.is_empty() {
                break;
            }
            let pos = remaining
                .iter()
                .enumerate()
                .max_by(|(_, &a), (_, &b)| {
                    let (ba, bb) = (&coll.blocks()[a], &coll.blocks()[b]);
                    ba.energy_sq()
                        .total_cmp(&bb.energy_sq())
                        .then_with(|| bb.id().cmp(ba.id()))
                })
                .map(|(pos, _)| pos)
                .expect("non-empty");
            let next = remaining[pos];
            if head_cols + coll.blocks()[next].cols() > r {
                break;
            }
            remaining.swap_remove(pos);
            head_cols += coll.blocks()[next].cols();
            head_energy += coll.blocks()[next].energy_sq();
            members.push(next);
        }

        // Absorb the smallest blocks while the tail certificate holds.
        let mut total = head_energy;
        while !remaining.is_empty() {
            let pos = smallest_position(coll, remaining.as_slice());
            let cand = remaining[pos];
            let cand_energy = coll.blocks()[cand].energy_sq();
            if cand_energy == 0.0 {
                remaining.swap_remove(pos);
                members.push(cand);
                continue;
            }
            let total_next = total + cand_energy;
            let tail_sq = total_next - head_energy;
            if tail_sq <= eps_sq * total_next {
                remaining.swap_remove(pos);
                members.push(cand);
                total = total_next;
            } else {
                break;
            }
        }

        let predicted = if members.len() == 1 {
            weyl_bound(
                &[BlockSummary::from_block(&coll.blocks()[anchor], r)?],
                r,
            )?
        } else {
            weyl_tail_bound(total, head_energy)?
        };
        clusters.push(PlannedCluster {
            id: cluster_id(clusters.len()),
            members: members_of(coll, &members),
            rank: r,
            predicted,
        });
    }

    Ok(assign_rank(
        Partition {
            m: coll.m(),
            algorithm: AlgorithmKind::MaxNorm,
            epsilon: Some(budget.epsilon()),
            rank: r,
            sort_mode: None,
            seed: None,
            k: None,
            clusters,
        },
        r,
    ))
}

/// Certificate interface shared by the residual- and Gram-backed greedy
/// loops: grow a tentative state and report the post-merge relative bound.
trait MergeState: Clone {
    fn append(&mut self, block: &Block) -> Result<()>;
    fn relative_bound(&self, r: usize) -> Result<f64>;
    fn predicted(&self, r: usize) -> Result<BoundValue>;
    fn residual_norm_of(&self, block: &Block) -> Result<f64>;
}

#[derive(Clone)]
struct ResidualState(ResidualTracker);

impl MergeState for ResidualState {
    fn append(&mut self, block: &Block) -> Result<()> {
        self.0.append(block)
    }

    fn relative_bound(&self, r: usize) -> Result<f64> {
        Ok(self.0.certified_bound(r).relative)
    }

    fn predicted(&self, r: usize) -> Result<BoundValue> {
        Ok(self.0.certified_bound(r))
    }

    fn residual_norm_of(&self, block: &Block) -> Result<f64> {
        self.0.residual_norm_of(block)
    }
}

#[derive(Clone)]
struct GramState(GramTracker);

impl MergeState for GramState {
    fn append(&mut self, block: &Block) -> Result<()> {
        self.0.append(block)?;
        self.0.truncate()
    }

    fn relative_bound(&self, r: usize) -> Result<f64> {
        Ok(self.0.estimate(r)?.relative)
    }

    fn predicted(&self, r: usize) -> Result<BoundValue> {
        self.0.estimate(r)
    }

    fn residual_norm_of(&self, block: &Block) -> Result<f64> {
        self.0.residual_norm_of(block)
    }
}

fn greedy_certified<S, F>(
    coll: &Collection,
    budget: &ErrorBudget,
    mode: SortMode,
    policy: RejectPolicy,
    algorithm: AlgorithmKind,
    new_state: F,
) -> Result<Partition>
where
    S: MergeState,
    F: Fn() -> S,
{
    if coll.is_empty() {
        return Err(Error::EmptyInput("cannot cluster an empty collection"));
    }
    let r = budget.target_rank();
    let eps = budget.epsilon();
    let mut remaining: Vec<usize> = (0..coll.len()).collect();
    let mut clusters = Vec::new();

    while !remaining.is_empty() {
        let anchor = take_largest(coll, &mut remaining);
        let mut state = new_state();
        state.append(&coll.blocks()[anchor])?;
        let mut members = vec![anchor];
        let mut skipped: Vec<usize> = Vec::new();

        'grow: loop {
            // Candidate selection over the not-yet-skipped remainder.
            let candidates: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|i| !skipped.contains(i))
                .collect();
            if candidates.is_empty() {
                break;
            }
            let cand = match mode {
                SortMode::Frobenius => candidates
                    .into_iter()
                    .min_by(|&a, &b| {
                        let (ba, bb) = (&coll.blocks()[a], &coll.blocks()[b]);
                        ba.energy_sq()
                            .total_cmp(&bb.energy_sq())
                            .then_with(|| ba.id().cmp(bb.id()))
                    })
                    .expect("non-empty"),
                SortMode::Residual => {
                    let mut best: Option<(f64, usize)> = None;
                    for i in candidates {
                        let norm = state.residual_norm_of(&coll.blocks()[i])?;
                        let better = match &best {
                            None => true,
                            Some((bn, bi)) => {
                                norm < *bn
                                    || (norm == *bn
                                        && coll.blocks()[i].id() < coll.blocks()[*bi].id())
                            }
                        };
                        if better {
                            best = Some((norm, i));
                        }
                    }
                    best.expect("non-empty").1
                }
            };

            let block = &coll.blocks()[cand];
            // All-zero blocks never change any bound; merge them outright.
            if block.energy_sq() == 0.0 {
                state.append(block)?;
                remaining.retain(|&i| i != cand);
                members.push(cand);
                continue;
            }
            let mut tentative = state.clone();
            tentative.append(block)?;
            if tentative.relative_bound(r)? <= eps {
                state = tentative;
                remaining.retain(|&i| i != cand);
                members.push(cand);
            } else {
                match policy {
                    RejectPolicy::Stop => break 'grow,
                    RejectPolicy::Skip => skipped.push(cand),
                }
            }
        }

        clusters.push(PlannedCluster {
            id: cluster_id(clusters.len()),
            members: members_of(coll, &members),
            rank: r,
            predicted: state.predicted(r)?,
        });
    }

    Ok(assign_rank(
        Partition {
            m: coll.m(),
            algorithm,
            epsilon: Some(eps),
            rank: r,
            sort_mode: Some(mode),
            seed: None,
            k: None,
            clusters,
        },
        r,
    ))
}

/// Residual-certificate clustering: merges are admitted by the certified
/// bound from pooled residual singular values.
pub fn cluster_residual(
    coll: &Collection,
    budget: &ErrorBudget,
    mode: SortMode,
) -> Result<Partition> {
    cluster_residual_with(coll, budget, mode, RejectPolicy::Stop)
}

pub fn cluster_residual_with(
    coll: &Collection,
    budget: &ErrorBudget,
    mode: SortMode,
    policy: RejectPolicy,
) -> Result<Partition> {
    let rows = coll.m();
    greedy_certified(
        coll,
        budget,
        mode,
        policy,
        AlgorithmKind::Residual,
        || ResidualState(ResidualTracker::new(rows, Tolerances::default())),
    )
}

/// Approximate clustering: the tracker truncates to the target rank after
/// every append and the certificate is the plug-in estimate, so no exact
/// error guarantee is claimed.
pub fn cluster_approx(
    coll: &Collection,
    budget: &ErrorBudget,
    mode: SortMode,
) -> Result<Partition> {
    cluster_approx_with(coll, budget, mode, RejectPolicy::Stop)
}

pub fn cluster_approx_with(
    coll: &Collection,
    budget: &ErrorBudget,
    mode: SortMode,
    policy: RejectPolicy,
) -> Result<Partition> {
    let rows = coll.m();
    let rank = budget.target_rank();
    greedy_certified(
        coll,
        budget,
        mode,
        policy,
        AlgorithmKind::Approx,
        || GramState(GramTracker::new(rows, rank, Tolerances::default())),
    )
}

/// Seeded uniform assignment into `k` clusters; the baseline for comparing
/// the certificate-driven algorithms against.
///
/// Empty clusters are repaired deterministically: the assignment is resampled
/// a bounded number of times, then blocks rotate out of the largest clusters.
pub fn cluster_random(coll: &Collection, k: usize, rank: usize, seed: u64) -> Result<Partition> {
    if coll.is_empty() {
        return Err(Error::EmptyInput("cannot cluster an empty collection"));
    }
    if k == 0 || k > coll.len() {
        return Err(Error::InvalidArgument(format!(
            "cluster count k = {k} must lie in 1..={}",
            coll.len()
        )));
    }
    if rank == 0 {
        return Err(Error::InvalidArgument("target rank must be positive".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment: Vec<usize> = Vec::new();
    for _attempt in 0..100 {
        assignment = (0..coll.len()).map(|_| rng.random_range(0..k)).collect();
        let mut counts = vec![0usize; k];
        for &c in &assignment {
            counts[c] += 1;
        }
        if counts.iter().all(|&c| c > 0) {
            break;
        }
    }
    // Deterministic repair if sampling never produced a full cover.
    let mut counts = vec![0usize; k];
    for &c in &assignment {
        counts[c] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let donor = (0..k)
            .max_by_key(|&c| (counts[c], usize::MAX - c))
            .expect("k > 0");
        let moved = assignment
            .iter()
            .rposition(|&c| c == donor)
            .expect("donor has members");
        assignment[moved] = empty;
        counts[donor] -= 1;
        counts[empty] += 1;
    }

    let mut clusters = Vec::with_capacity(k);
    for c in 0..k {
        let members: Vec<usize> = (0..coll.len()).filter(|&i| assignment[i] == c).collect();
        let total_cols: usize = members.iter().map(|&i| coll.blocks()[i].cols()).sum();
        let r_c = rank.min(coll.m()).min(total_cols.max(1));
        let parts: Vec<&str> = members.iter().map(|&i| coll.blocks()[i].id()).collect();
        let m_c = coll.hcat_members(parts.iter().copied())?;
        let exact = exact_trunc_error(&m_c, r_c)?;
        clusters.push(PlannedCluster {
            id: cluster_id(c),
            members: members_of(coll, &members),
            rank: r_c,
            predicted: BoundValue::from_exact_error(exact, m_c.frobenius_sq()),
        });
    }

    Ok(Partition {
        m: coll.m(),
        algorithm: AlgorithmKind::Random,
        epsilon: None,
        rank,
        sort_mode: None,
        seed: Some(seed),
        k: Some(k),
        clusters,
    })
}
