//! Deterministic synthetic collection generators covering the structural
//! regimes the bounds care about: unstructured noise, a shared left
//! subspace, power-law spectra, nested ranges and mutually orthogonal
//! ranges.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::collection::{Block, Collection};
use crate::error::{Error, Result};
use crate::linalg::{orthonormal_basis, Tolerances};
use crate::matrix::Matrix;

const DEFAULT_SHARED_RANK: usize = 4;
const DEFAULT_DECAY_ALPHA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// Independent standard-normal entries.
    Gaussian,
    /// All blocks drawn from one random rank-`rank` left subspace.
    SharedSubspace { rank: usize },
    /// Per-block singular values proportional to `i^-alpha`.
    DecayingSpectrum { alpha: f64 },
    /// Every block's range contained in the first block's range.
    Nested,
    /// Pairwise orthogonal block ranges.
    OrthogonalFamilies,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Gaussian => write!(f, "gaussian"),
            Profile::SharedSubspace { rank } => write!(f, "shared-subspace:{rank}"),
            Profile::DecayingSpectrum { alpha } => write!(f, "decaying-spectrum:{alpha}"),
            Profile::Nested => write!(f, "nested"),
            Profile::OrthogonalFamilies => write!(f, "orthogonal-families"),
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    /// Accepts `gaussian`, `shared-subspace[:rank]`, `decaying-spectrum[:alpha]`,
    /// `nested` and `orthogonal-families`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        match (name, param) {
            ("gaussian", None) => Ok(Profile::Gaussian),
            ("nested", None) => Ok(Profile::Nested),
            ("orthogonal-families", None) => Ok(Profile::OrthogonalFamilies),
            ("shared-subspace", None) => Ok(Profile::SharedSubspace {
                rank: DEFAULT_SHARED_RANK,
            }),
            ("shared-subspace", Some(p)) => {
                let rank = p.parse().map_err(|_| {
                    Error::InvalidArgument(format!("bad shared-subspace rank `{p}`"))
                })?;
                Ok(Profile::SharedSubspace { rank })
            }
            ("decaying-spectrum", None) => Ok(Profile::DecayingSpectrum {
                alpha: DEFAULT_DECAY_ALPHA,
            }),
            ("decaying-spectrum", Some(p)) => {
                let alpha = p.parse().map_err(|_| {
                    Error::InvalidArgument(format!("bad decaying-spectrum alpha `{p}`"))
                })?;
                Ok(Profile::DecayingSpectrum { alpha })
            }
            _ => Err(Error::InvalidArgument(format!("invalid profile `{s}`"))),
        }
    }
}

fn standard_normal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let normal = StandardNormal;
    Matrix::from_fn(rows, cols, |_, _| normal.sample(rng))
}

fn random_orthonormal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Result<Matrix> {
    let raw = standard_normal(rows, cols, rng);
    let q = orthonormal_basis(&raw, &Tolerances::default())?;
    if q.cols() != cols {
        // A zero-probability event for Gaussian draws.
        return Err(Error::InvalidArgument(
            "random orthonormal draw was rank-deficient".into(),
        ));
    }
    Ok(q)
}

fn block_id(i: usize) -> String {
    format!("b{i:05}")
}

/// Generates `count` blocks of shape `rows x cols` under the given profile.
/// Identical arguments always produce identical collections.
pub fn generate(
    profile: &Profile,
    count: usize,
    rows: usize,
    cols: usize,
    seed: u64,
) -> Result<Collection> {
    if count == 0 || rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument(
            "count, rows and cols must all be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coll = Collection::new(rows)?;
    match profile {
        Profile::Gaussian => {
            for i in 0..count {
                coll.push(Block::new(block_id(i), standard_normal(rows, cols, &mut rng)))?;
            }
        }
        Profile::SharedSubspace { rank } => {
            if *rank == 0 || *rank > rows {
                return Err(Error::InvalidArgument(format!(
                    "shared-subspace rank {rank} must lie in 1..={rows}"
                )));
            }
            let basis = random_orthonormal(rows, *rank, &mut rng)?;
            for i in 0..count {
                let coeff = standard_normal(*rank, cols, &mut rng);
                let block = Matrix::from_dmatrix(basis.as_dmatrix() * coeff.as_dmatrix());
                coll.push(Block::new(block_id(i), block))?;
            }
        }
        Profile::DecayingSpectrum { alpha } => {
            if !alpha.is_finite() || *alpha < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "decaying-spectrum alpha {alpha} must be finite and non-negative"
                )));
            }
            let p = rows.min(cols);
            for i in 0..count {
                let u = random_orthonormal(rows, p, &mut rng)?;
                let v = random_orthonormal(cols, p, &mut rng)?;
                let mut scaled = DMatrix::zeros(rows, p);
                for j in 0..p {
                    let sigma = ((j + 1) as f64).powf(-alpha);
                    for r in 0..rows {
                        scaled[(r, j)] = u.get(r, j) * sigma;
                    }
                }
                let block = Matrix::from_dmatrix(scaled * v.as_dmatrix().transpose());
                coll.push(Block::new(block_id(i), block))?;
            }
        }
        Profile::Nested => {
            let base = standard_normal(rows, cols, &mut rng);
            coll.push(Block::new(block_id(0), base.clone()))?;
            for i in 1..count {
                let mix = standard_normal(cols, cols, &mut rng);
                let block = Matrix::from_dmatrix(base.as_dmatrix() * mix.as_dmatrix());
                coll.push(Block::new(block_id(i), block))?;
            }
        }
        Profile::OrthogonalFamilies => {
            let family_dim = (rows / count).min(cols);
            if family_dim == 0 {
                return Err(Error::InvalidArgument(format!(
                    "orthogonal-families needs rows >= count, got {rows} rows for {count} blocks"
                )));
            }
            let basis = random_orthonormal(rows, family_dim * count, &mut rng)?;
            for i in 0..count {
                let columns = basis
                    .as_dmatrix()
                    .columns(i * family_dim, family_dim)
                    .into_owned();
                let coeff = standard_normal(family_dim, cols, &mut rng);
                let block = Matrix::from_dmatrix(columns * coeff.as_dmatrix());
                coll.push(Block::new(block_id(i), block))?;
            }
        }
    }
    Ok(coll)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::singular_values;

    #[test]
    fn profiles_parse_with_and_without_params() {
        assert_eq!("gaussian".parse::<Profile>().unwrap(), Profile::Gaussian);
        assert_eq!(
            "shared-subspace:8".parse::<Profile>().unwrap(),
            Profile::SharedSubspace { rank: 8 }
        );
        assert_eq!(
            "shared-subspace".parse::<Profile>().unwrap(),
            Profile::SharedSubspace { rank: 4 }
        );
        assert_eq!(
            "decaying-spectrum:1.5".parse::<Profile>().unwrap(),
            Profile::DecayingSpectrum { alpha: 1.5 }
        );
        assert!("nonsense".parse::<Profile>().is_err());
        assert!("shared-subspace:x".parse::<Profile>().is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&Profile::Gaussian, 4, 6, 3, 42).unwrap();
        let b = generate(&Profile::Gaussian, 4, 6, 3, 42).unwrap();
        assert_eq!(a, b);
        let c = generate(&Profile::Gaussian, 4, 6, 3, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn shared_subspace_blocks_have_bounded_rank() {
        let coll = generate(&Profile::SharedSubspace { rank: 2 }, 5, 10, 4, 1).unwrap();
        let parts: Vec<&str> = coll.blocks().iter().map(Block::id).collect();
        let m = coll.hcat_members(parts.iter().copied()).unwrap();
        let sigma = singular_values(&m).unwrap();
        assert!(sigma.get(2) <= 1e-10 * sigma.get(0));
    }

    #[test]
    fn decaying_spectrum_matches_power_law() {
        let coll = generate(&Profile::DecayingSpectrum { alpha: 1.5 }, 1, 8, 4, 2).unwrap();
        let sigma = singular_values(coll.blocks()[0].matrix()).unwrap();
        for j in 0..4 {
            let expected = ((j + 1) as f64).powf(-1.5);
            assert!((sigma.get(j) - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn nested_blocks_share_the_first_range() {
        let coll = generate(&Profile::Nested, 3, 9, 3, 3).unwrap();
        let first = coll.blocks()[0].matrix();
        let q = orthonormal_basis(first, &Tolerances::default()).unwrap();
        for block in &coll.blocks()[1..] {
            let residual = crate::linalg::project_residual(&q, block.matrix()).unwrap();
            assert!(residual.frobenius_norm() <= 1e-9 * block.energy_sq().sqrt());
        }
    }

    #[test]
    fn orthogonal_families_have_orthogonal_ranges() {
        let coll = generate(&Profile::OrthogonalFamilies, 4, 12, 2, 4).unwrap();
        for (i, a) in coll.blocks().iter().enumerate() {
            for b in coll.blocks().iter().skip(i + 1) {
                let cross = a.matrix().as_dmatrix().transpose() * b.matrix().as_dmatrix();
                assert!(cross.norm() <= 1e-10 * (a.energy_sq() * b.energy_sq()).sqrt().max(1.0));
            }
        }
        assert!(generate(&Profile::OrthogonalFamilies, 20, 10, 2, 4).is_err());
    }
}
