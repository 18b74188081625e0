//! Shared-basis store: each cluster keeps two matrices, the scaled left
//! factor and the right factor of a rank-r truncated SVD of its
//! concatenation. Blocks are reconstructed from their slice of the right
//! factor alone.

use nalgebra::DMatrix;

use crate::cluster::Partition;
use crate::collection::Collection;
use crate::error::{Error, Result};
use crate::linalg::thin_svd;
use crate::matrix::Matrix;

pub const STORE_FORMAT_VERSION: u32 = 1;

/// One compressed cluster: `U_tilde = U S` (m x r) and `V` (N_c x r) with the
/// per-member column counts needed to slice `V` back apart.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedCluster {
    pub cluster_id: String,
    pub rank: usize,
    pub u_tilde: Matrix,
    pub members: Vec<(String, usize)>,
    pub v: Matrix,
}

impl CompressedCluster {
    /// Total column count of the cluster's concatenation.
    pub fn total_cols(&self) -> usize {
        self.members.iter().map(|(_, c)| c).sum()
    }

    /// Row span of a member inside `V`: `(offset, cols)`.
    pub fn member_span(&self, block_id: &str) -> Option<(usize, usize)> {
        let mut offset = 0;
        for (id, cols) in &self.members {
            if id == block_id {
                return Some((offset, *cols));
            }
            offset += cols;
        }
        None
    }
}

/// All compressed clusters of one collection.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedStore {
    pub m: usize,
    pub format_version: u32,
    pub clusters: Vec<CompressedCluster>,
}

impl CompressedStore {
    /// Assembles a store, validating dimensions and block-id uniqueness.
    pub fn new(m: usize, clusters: Vec<CompressedCluster>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("row dimension must be positive".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for cluster in &clusters {
            if cluster.rank == 0 {
                return Err(Error::InvalidArgument(format!(
                    "cluster `{}` has rank zero",
                    cluster.cluster_id
                )));
            }
            if cluster.u_tilde.rows() != m || cluster.u_tilde.cols() != cluster.rank {
                return Err(Error::InvalidArgument(format!(
                    "cluster `{}` left factor has shape {}x{}, expected {}x{}",
                    cluster.cluster_id,
                    cluster.u_tilde.rows(),
                    cluster.u_tilde.cols(),
                    m,
                    cluster.rank
                )));
            }
            let n_c = cluster.total_cols();
            if cluster.v.rows() != n_c || cluster.v.cols() != cluster.rank {
                return Err(Error::InvalidArgument(format!(
                    "cluster `{}` right factor has shape {}x{}, expected {}x{}",
                    cluster.cluster_id,
                    cluster.v.rows(),
                    cluster.v.cols(),
                    n_c,
                    cluster.rank
                )));
            }
            for (id, _) in &cluster.members {
                if !seen.insert(id.clone()) {
                    return Err(Error::DuplicateId(id.clone()));
                }
            }
        }
        Ok(Self {
            m,
            format_version: STORE_FORMAT_VERSION,
            clusters,
        })
    }

    pub fn find_block(&self, block_id: &str) -> Option<&CompressedCluster> {
        self.clusters
            .iter()
            .find(|c| c.members.iter().any(|(id, _)| id == block_id))
    }

    pub fn block_ids(&self) -> impl Iterator<Item = &str> {
        self.clusters
            .iter()
            .flat_map(|c| c.members.iter().map(|(id, _)| id.as_str()))
    }
}

/// Compresses a collection along a partition: per cluster, concatenate the
/// members in plan order, truncate the SVD at the planned rank and fold the
/// singular values into the left factor.
pub fn compress(coll: &Collection, plan: &Partition) -> Result<CompressedStore> {
    plan.validate_cover(coll)?;
    let mut clusters = Vec::with_capacity(plan.clusters.len());
    for planned in &plan.clusters {
        let n_c = planned.total_cols();
        let r_c = planned.rank;
        if r_c == 0 || r_c > coll.m().min(n_c) {
            return Err(Error::PlanMismatch(format!(
                "cluster `{}` requests rank {r_c}, valid range is 1..={}",
                planned.id,
                coll.m().min(n_c)
            )));
        }
        let m_c = coll.hcat_members(planned.member_ids())?;
        let (u, s, v) = thin_svd(&m_c)?;
        let mut u_tilde = DMatrix::zeros(coll.m(), r_c);
        for j in 0..r_c {
            let scale = s.get(j);
            for i in 0..coll.m() {
                u_tilde[(i, j)] = u.get(i, j) * scale;
            }
        }
        let v_r = DMatrix::from_fn(n_c, r_c, |i, j| v.get(i, j));
        clusters.push(CompressedCluster {
            cluster_id: planned.id.clone(),
            rank: r_c,
            u_tilde: Matrix::from_dmatrix(u_tilde),
            members: planned.members.clone(),
            v: Matrix::from_dmatrix(v_r),
        });
    }
    CompressedStore::new(coll.m(), clusters)
}

/// Rebuilds one block as `U_tilde V_i^T`.
pub fn reconstruct_block(store: &CompressedStore, block_id: &str) -> Result<Matrix> {
    let cluster = store
        .find_block(block_id)
        .ok_or_else(|| Error::UnknownBlock(block_id.to_string()))?;
    let (offset, cols) = cluster
        .member_span(block_id)
        .expect("member present in cluster");
    let v_i = cluster.v.row_block(offset, cols);
    Ok(Matrix::from_dmatrix(
        cluster.u_tilde.as_dmatrix() * v_i.as_dmatrix().transpose(),
    ))
}

/// Stored real values: `sum_c r_c (m + N_c)`.
pub fn memory_footprint(store: &CompressedStore) -> u64 {
    store
        .clusters
        .iter()
        .map(|c| c.rank as u64 * (store.m as u64 + c.total_cols() as u64))
        .sum()
}

/// Original parameter count over stored parameter count.
pub fn compression_ratio(coll: &Collection, store: &CompressedStore) -> Result<f64> {
    let mut stored: Vec<&str> = store.block_ids().collect();
    stored.sort_unstable();
    let mut original: Vec<&str> = coll.blocks().iter().map(|b| b.id()).collect();
    original.sort_unstable();
    if stored != original {
        return Err(Error::PlanMismatch(
            "store does not cover the collection".into(),
        ));
    }
    let footprint = memory_footprint(store);
    if footprint == 0 {
        return Err(Error::EmptyInput("store holds no clusters"));
    }
    Ok(coll.total_param_count() as f64 / footprint as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{cluster_max_norm, cluster_random, ErrorBudget};
    use crate::collection::Block;
    use crate::linalg::{exact_trunc_error, singular_values};
    use crate::testutil::{random_matrix, rng_for};

    fn single_cluster_plan(coll: &Collection, rank: usize) -> Partition {
        cluster_random(coll, 1, rank, 0).unwrap()
    }

    #[test]
    fn rank_covering_cluster_reconstructs_exactly() {
        let mut rng = rng_for(1);
        let left = random_matrix(6, 2, 1.0, &mut rng);
        let right = random_matrix(2, 4, 1.0, &mut rng);
        let block = Matrix::from_dmatrix(left.as_dmatrix() * right.as_dmatrix());
        let coll = Collection::from_blocks(6, vec![Block::new("a", block.clone())]).unwrap();
        let store = compress(&coll, &single_cluster_plan(&coll, 2)).unwrap();
        let recon = reconstruct_block(&store, "a").unwrap();
        let err = (recon.as_dmatrix() - block.as_dmatrix()).norm();
        assert!(err <= 1e-9 * block.frobenius_norm());
    }

    #[test]
    fn duplicated_blocks_stay_exact() {
        let mut rng = rng_for(2);
        let left = random_matrix(7, 2, 1.0, &mut rng);
        let right = random_matrix(2, 3, 1.0, &mut rng);
        let block = Matrix::from_dmatrix(left.as_dmatrix() * right.as_dmatrix());
        let blocks: Vec<Block> = (0..4)
            .map(|i| Block::new(format!("b{i}"), block.clone()))
            .collect();
        let coll = Collection::from_blocks(7, blocks).unwrap();
        let store = compress(&coll, &single_cluster_plan(&coll, 2)).unwrap();
        for i in 0..4 {
            let recon = reconstruct_block(&store, &format!("b{i}")).unwrap();
            let err = (recon.as_dmatrix() - block.as_dmatrix()).norm();
            assert!(err <= 1e-9 * block.frobenius_norm());
        }
    }

    #[test]
    fn truncation_error_splits_across_members() {
        let mut rng = rng_for(3);
        let blocks: Vec<Block> = (0..3)
            .map(|i| Block::new(format!("b{i}"), random_matrix(8, 3, 1.0, &mut rng)))
            .collect();
        let coll = Collection::from_blocks(8, blocks).unwrap();
        let store = compress(&coll, &single_cluster_plan(&coll, 2)).unwrap();
        let m_c = coll
            .hcat_members(coll.blocks().iter().map(Block::id))
            .unwrap();
        let expected_sq = exact_trunc_error(&m_c, 2).unwrap().powi(2);
        let mut measured_sq = 0.0;
        for block in coll.blocks() {
            let recon = reconstruct_block(&store, block.id()).unwrap();
            measured_sq += (recon.as_dmatrix() - block.matrix().as_dmatrix()).norm_squared();
        }
        assert!((measured_sq - expected_sq).abs() <= 1e-9 * m_c.frobenius_sq());
    }

    #[test]
    fn factor_shapes_and_orthogonality() {
        let mut rng = rng_for(4);
        let blocks: Vec<Block> = (0..3)
            .map(|i| Block::new(format!("b{i}"), random_matrix(9, 2, 1.0, &mut rng)))
            .collect();
        let coll = Collection::from_blocks(9, blocks).unwrap();
        let store = compress(&coll, &single_cluster_plan(&coll, 4)).unwrap();
        let cluster = &store.clusters[0];
        // Columns of U_tilde are mutually orthogonal (orthonormal basis times
        // a diagonal), V has orthonormal columns.
        let gram_u = cluster.u_tilde.as_dmatrix().transpose() * cluster.u_tilde.as_dmatrix();
        let scale = gram_u.diagonal().max();
        for i in 0..cluster.rank {
            for j in 0..cluster.rank {
                if i != j {
                    assert!(gram_u[(i, j)].abs() <= 1e-9 * scale);
                }
            }
        }
        let gram_v = cluster.v.as_dmatrix().transpose() * cluster.v.as_dmatrix();
        let eye = DMatrix::<f64>::identity(cluster.rank, cluster.rank);
        assert!((gram_v - eye).norm() <= 1e-9);
    }

    #[test]
    fn zero_block_reconstruction_stays_within_cluster_error() {
        let mut coll = Collection::new(6).unwrap();
        coll.push(Block::new("a", random_matrix(6, 3, 1.0, &mut rng_for(5))))
            .unwrap();
        coll.push(Block::new("z", Matrix::zeros(6, 2))).unwrap();
        let store = compress(&coll, &single_cluster_plan(&coll, 2)).unwrap();
        let recon = reconstruct_block(&store, "z").unwrap();
        let m_c = coll.hcat_members(["a", "z"]).unwrap();
        let cluster_err = exact_trunc_error(&m_c, 2).unwrap();
        assert!(recon.frobenius_norm() <= cluster_err + 1e-12);
    }

    #[test]
    fn footprint_formula() {
        // One cluster at rank 32 over ten single-column blocks of height 768.
        let members: Vec<(String, usize)> = (0..10).map(|i| (format!("b{i}"), 1)).collect();
        let cluster = CompressedCluster {
            cluster_id: "c0".into(),
            rank: 32,
            u_tilde: Matrix::zeros(768, 32),
            members,
            v: Matrix::zeros(10, 32),
        };
        let store = CompressedStore::new(768, vec![cluster]).unwrap();
        assert_eq!(memory_footprint(&store), 32 * (768 + 10));
        assert_eq!(
            memory_footprint(&CompressedStore::new(5, vec![]).unwrap()),
            0
        );
    }

    #[test]
    fn footprint_two_clusters() {
        let c1 = CompressedCluster {
            cluster_id: "c0".into(),
            rank: 2,
            u_tilde: Matrix::zeros(4, 2),
            members: vec![("a".into(), 3)],
            v: Matrix::zeros(3, 2),
        };
        let c2 = CompressedCluster {
            cluster_id: "c1".into(),
            rank: 1,
            u_tilde: Matrix::zeros(4, 1),
            members: vec![("b".into(), 5)],
            v: Matrix::zeros(5, 1),
        };
        let store = CompressedStore::new(4, vec![c1, c2]).unwrap();
        assert_eq!(memory_footprint(&store), 14 + 9);
    }

    #[test]
    fn compression_ratio_closed_form() {
        let mut rng = rng_for(6);
        let mut coll = Collection::new(64).unwrap();
        for i in 0..10 {
            coll.push(Block::new(format!("b{i}"), random_matrix(64, 8, 1.0, &mut rng)))
                .unwrap();
        }
        let store = compress(&coll, &single_cluster_plan(&coll, 4)).unwrap();
        let ratio = compression_ratio(&coll, &store).unwrap();
        let expected = 5120.0 / (4.0 * (64.0 + 80.0));
        assert!((ratio - expected).abs() < 1e-12);
    }

    #[test]
    fn singleton_full_rank_store_expands() {
        let mut rng = rng_for(7);
        let mut coll = Collection::new(8).unwrap();
        for i in 0..4 {
            coll.push(Block::new(format!("b{i}"), random_matrix(8, 3, 1.0, &mut rng)))
                .unwrap();
        }
        // All singletons at full per-block rank: storage grows.
        let budget = ErrorBudget::new(1e-6, 3).unwrap();
        let plan = cluster_max_norm(&coll, &budget).unwrap();
        assert!(plan.clusters.iter().all(|c| c.members.len() == 1));
        let store = compress(&coll, &plan).unwrap();
        let ratio = compression_ratio(&coll, &store).unwrap();
        assert!(ratio < 1.0);
    }

    #[test]
    fn unknown_block_and_coverage_errors() {
        let coll = Collection::from_blocks(
            4,
            vec![Block::new("a", random_matrix(4, 2, 1.0, &mut rng_for(8)))],
        )
        .unwrap();
        let store = compress(&coll, &single_cluster_plan(&coll, 2)).unwrap();
        assert!(matches!(
            reconstruct_block(&store, "missing"),
            Err(Error::UnknownBlock(_))
        ));
        let mut bigger = coll.clone();
        bigger
            .push(Block::new("b", random_matrix(4, 1, 1.0, &mut rng_for(9))))
            .unwrap();
        assert!(compression_ratio(&bigger, &store).is_err());
    }

    #[test]
    fn eigen_values_of_u_tilde_match_spectrum() {
        let mut rng = rng_for(10);
        let coll = Collection::from_blocks(
            6,
            vec![Block::new("a", random_matrix(6, 4, 1.0, &mut rng))],
        )
        .unwrap();
        let store = compress(&coll, &single_cluster_plan(&coll, 3)).unwrap();
        let sigma = singular_values(coll.blocks()[0].matrix()).unwrap();
        let u = &store.clusters[0].u_tilde;
        for j in 0..3 {
            let col_norm: f64 = (0..6).map(|i| u.get(i, j).powi(2)).sum::<f64>().sqrt();
            assert!((col_norm - sigma.get(j)).abs() <= 1e-9 * sigma.get(0));
        }
    }
}
