//! Named matrix blocks and ordered collections sharing a row dimension.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Block ids travel through text plans and CSV reports, so they are
/// restricted to printable characters without separators.
pub(crate) fn validate_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id
            .chars()
            .all(|c| !c.is_whitespace() && !c.is_control() && c != ',' && c != ';' && c != '"');
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidId(id.to_string()))
    }
}

/// One named matrix with its cached squared Frobenius norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    id: String,
    matrix: Matrix,
    energy_sq: f64,
}

impl Block {
    pub fn new(id: impl Into<String>, matrix: Matrix) -> Self {
        let energy_sq = matrix.frobenius_sq();
        Self {
            id: id.into(),
            matrix,
            energy_sq,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    /// Cached `||A||_F^2`.
    pub fn energy_sq(&self) -> f64 {
        self.energy_sq
    }
}

/// Ordered set of blocks sharing the row dimension `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Collection {
    m: usize,
    blocks: Vec<Block>,
    #[doc(hidden)]
    index: HashMap<String, usize>,
}

impl Collection {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("row dimension must be positive".into()));
        }
        Ok(Self {
            m,
            blocks: Vec::new(),
            index: HashMap::new(),
        })
    }

    pub fn from_blocks(m: usize, blocks: Vec<Block>) -> Result<Self> {
        let mut coll = Self::new(m)?;
        for block in blocks {
            coll.push(block)?;
        }
        Ok(coll)
    }

    pub fn push(&mut self, block: Block) -> Result<()> {
        validate_id(block.id())?;
        if block.rows() != self.m {
            return Err(Error::DimensionMismatch {
                context: "collection block rows",
                expected: self.m,
                found: block.rows(),
            });
        }
        if block.cols() == 0 {
            return Err(Error::InvalidArgument(format!(
                "block `{}` has no columns",
                block.id()
            )));
        }
        if self.index.contains_key(block.id()) {
            return Err(Error::DuplicateId(block.id().to_string()));
        }
        self.index.insert(block.id().to_string(), self.blocks.len());
        self.blocks.push(block);
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn get(&self, id: &str) -> Option<&Block> {
        self.index.get(id).map(|&i| &self.blocks[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Sum of cached block energies.
    pub fn total_energy_sq(&self) -> f64 {
        self.blocks.iter().map(Block::energy_sq).sum()
    }

    /// Number of stored real values across all blocks, `sum(m * n_i)`.
    pub fn total_param_count(&self) -> u64 {
        self.blocks
            .iter()
            .map(|b| self.m as u64 * b.cols() as u64)
            .sum()
    }

    /// Horizontal concatenation of the named members, in the given order.
    pub fn hcat_members<'a, I>(&self, ids: I) -> Result<Matrix>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut parts = Vec::new();
        for id in ids {
            let block = self
                .get(id)
                .ok_or_else(|| Error::UnknownBlock(id.to_string()))?;
            parts.push(block.matrix());
        }
        Matrix::hcat(&parts)
    }
}
