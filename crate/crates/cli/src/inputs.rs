//! JSON input files and input digests.

use std::path::Path;

use equitile::rectangular::BlockDiagonal;
use equitile::{CMatrix, Partition, Phase, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Partition with 1-based indices, `{"n": N, "cells": [[…], …]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionFile {
    pub n: usize,
    pub cells: Vec<Vec<usize>>,
}

impl PartitionFile {
    pub fn from_partition(p: &Partition) -> Self {
        Self { n: p.n(), cells: p.to_one_based() }
    }

    pub fn to_partition(&self) -> Result<Partition> {
        Ok(Partition::from_one_based(self.n, &self.cells)?)
    }
}

/// A complex number written as `[re, im]` or as a plain real.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
enum ComplexEntry {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexEntry> for C64 {
    fn from(e: ComplexEntry) -> Self {
        match e {
            ComplexEntry::Real(x) => C64::new(x, 0.0),
            ComplexEntry::Pair([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeftStructure {
    pub m_sizes: Vec<usize>,
    pub q_sizes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RightStructure {
    pub n_sizes: Vec<usize>,
    pub r_sizes: Vec<usize>,
}

/// Block grid of the two side matrices of the rectangular transform.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Structure {
    pub left: LeftStructure,
    pub right: RightStructure,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn parse_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_slice(&read(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn load_partition(path: &Path) -> Result<Partition> {
    parse_json::<PartitionFile>(path)?.to_partition()
}

pub fn load_weights(path: &Path) -> Result<Vec<C64>> {
    Ok(parse_json::<Vec<ComplexEntry>>(path)?.into_iter().map(C64::from).collect())
}

pub fn load_phases(path: &Path) -> Result<Vec<Phase>> {
    parse_json::<Vec<ComplexEntry>>(path)?.into_iter().map(|e| Ok(Phase::new(e.into())?)).collect()
}

pub fn load_structure(path: &Path) -> Result<Structure> {
    parse_json(path)
}

/// Cuts a dense side matrix into its diagonal blocks; entries off the blocks
/// must be exactly zero.
pub fn block_diagonal(m: &CMatrix, row_sizes: &[usize], col_sizes: &[usize], name: &str) -> Result<BlockDiagonal> {
    BlockDiagonal::from_dense(m, row_sizes, col_sizes, 0.0).map_err(|e| CliError::input(format!("{name}: {e}")))
}

/// Hex SHA-256 of a file's bytes.
pub fn digest(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(read(path)?)))
}
