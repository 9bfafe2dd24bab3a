use std::fmt::Display;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::CadlagPath;
use crate::scalar::Scalar;

use super::rng::{stream_id, RngStream};

/// A set of sampled paths with the provenance needed to regenerate it.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble<S> {
    pub digest: String,
    pub seed: u64,
    pub paths: Vec<CadlagPath<S>>,
    pub stream_ids: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleFile {
    config_digest: String,
    seed: u64,
    n_paths: usize,
    stream_ids: Vec<u64>,
    paths: Vec<String>,
}

impl<S: Scalar> PathEnsemble<S> {
    /// Sample `n` paths in parallel; path `i` draws from stream
    /// `stream_id(block, i)` of `seed`, so the result does not depend on the
    /// thread count.
    pub fn generate<F>(digest: &str, seed: u64, block: u64, n: usize, sampler: F) -> Result<Self>
    where
        F: Fn(&mut RngStream) -> Result<CadlagPath<S>> + Sync,
    {
        let stream_ids: Vec<u64> = (0..n as u64).map(|i| stream_id(block, i)).collect();
        let paths = stream_ids
            .par_iter()
            .map(|&id| sampler(&mut RngStream::new(seed, id)))
            .collect::<Result<Vec<_>>>()?;
        Ok(PathEnsemble {
            digest: digest.to_string(),
            seed,
            paths,
            stream_ids,
        })
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Apply `op` to every path, keeping provenance.
    pub fn map_paths(
        &self,
        op: impl Fn(&CadlagPath<S>) -> Result<CadlagPath<S>> + Sync + Send,
    ) -> Result<Self> {
        let paths = self.paths.par_iter().map(op).collect::<Result<Vec<_>>>()?;
        Ok(PathEnsemble {
            digest: self.digest.clone(),
            seed: self.seed,
            paths,
            stream_ids: self.stream_ids.clone(),
        })
    }
}

impl<S: Scalar + Display> PathEnsemble<S> {
    pub fn to_json(&self) -> String {
        let file = EnsembleFile {
            config_digest: self.digest.clone(),
            seed: self.seed,
            n_paths: self.paths.len(),
            stream_ids: self.stream_ids.clone(),
            paths: self.paths.iter().map(|p| p.to_csv()).collect(),
        };
        serde_json::to_string_pretty(&file).expect("ensemble serializes")
    }
}

impl<S: Scalar + FromStr> PathEnsemble<S> {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: EnsembleFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.paths.len() != file.n_paths || file.stream_ids.len() != file.n_paths {
            return Err(Error::Parse("n_paths does not match the path list".into()));
        }
        let paths = file
            .paths
            .iter()
            .map(|csv| CadlagPath::from_csv(csv))
            .collect::<Result<Vec<_>>>()?;
        Ok(PathEnsemble {
            digest: file.config_digest,
            seed: file.seed,
            paths,
            stream_ids: file.stream_ids,
        })
    }
}
