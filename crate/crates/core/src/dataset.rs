use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{norm, MIN_NORM};

/// Rows whose input norm deviates from 1 by more than this are reported.
pub const RENORM_WARN_TOLERANCE: f64 = 1e-3;

/// `N` unit-norm embeddings in `R^d` with per-row identity labels and stable
/// image ids. Immutable once built.
#[derive(Debug, Clone)]
pub struct EmbeddingDataset {
    image_ids: Vec<String>,
    identities: Vec<usize>,
    identity_keys: Vec<String>,
    data: Vec<f64>,
    dim: usize,
    index: HashMap<String, usize>,
    renormalized: usize,
}

impl EmbeddingDataset {
    /// Builds a dataset from row-major embeddings and per-row identity keys.
    ///
    /// Identity keys are mapped to dense integers in order of first
    /// appearance. Every row is re-normalized; rows whose original norm was
    /// off by more than [`RENORM_WARN_TOLERANCE`] are counted and logged.
    pub fn new(image_ids: Vec<String>, identity_keys: &[String], mut data: Vec<f64>, dim: usize) -> Result<Self> {
        let n = image_ids.len();
        if n == 0 {
            return Err(Error::InvalidDataset("dataset has no rows".into()));
        }
        if dim < 2 {
            return Err(Error::InvalidDataset(format!(
                "dimension must be at least 2, got {dim}"
            )));
        }
        if identity_keys.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{} identity labels for {n} image ids",
                identity_keys.len()
            )));
        }
        if data.len() != n * dim {
            return Err(Error::InvalidDataset(format!(
                "expected {} embedding values ({n} x {dim}), got {}",
                n * dim,
                data.len()
            )));
        }

        let mut index = HashMap::with_capacity(n);
        for (i, id) in image_ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::InvalidDataset(format!("duplicate image id {id:?}")));
            }
        }

        let mut key_to_dense: HashMap<&str, usize> = HashMap::new();
        let mut dense_keys = Vec::new();
        let identities = identity_keys
            .iter()
            .map(|k| {
                *key_to_dense.entry(k.as_str()).or_insert_with(|| {
                    dense_keys.push(k.clone());
                    dense_keys.len() - 1
                })
            })
            .collect();

        let mut renormalized = 0;
        for (i, row) in data.chunks_exact_mut(dim).enumerate() {
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "row {i} ({}) has non-finite components",
                    image_ids[i]
                )));
            }
            let nrm = norm(row);
            if !(nrm > MIN_NORM) {
                return Err(Error::InvalidDataset(format!(
                    "row {i} ({}) is a zero vector",
                    image_ids[i]
                )));
            }
            if (nrm - 1.0).abs() > RENORM_WARN_TOLERANCE {
                renormalized += 1;
            }
            row.iter_mut().for_each(|x| *x /= nrm);
        }
        if renormalized > 0 {
            log::warn!(
                "{renormalized} of {n} embeddings deviated from unit norm by more than \
                 {RENORM_WARN_TOLERANCE}; re-normalized"
            );
        }

        Ok(Self {
            image_ids,
            identities,
            identity_keys: dense_keys,
            data,
            dim,
            index,
            renormalized,
        })
    }

    /// Convenience constructor for in-memory rows with integer identities.
    /// Image ids become `img{i}`.
    pub fn from_rows(rows: &[Vec<f64>], identities: &[usize]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        let ids = (0..rows.len()).map(|i| format!("img{i}")).collect();
        let keys: Vec<String> = identities.iter().map(|l| l.to_string()).collect();
        Self::new(ids, &keys, data, dim)
    }

    pub fn len(&self) -> usize {
        self.image_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image_ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn image_id(&self, i: usize) -> &str {
        &self.image_ids[i]
    }

    pub fn image_ids(&self) -> &[String] {
        &self.image_ids
    }

    /// Dense identity label of row `i`.
    #[inline]
    pub fn identity(&self, i: usize) -> usize {
        self.identities[i]
    }

    pub fn identities(&self) -> &[usize] {
        &self.identities
    }

    /// Original identity key for a dense label.
    pub fn identity_key(&self, label: usize) -> &str {
        &self.identity_keys[label]
    }

    /// Number of distinct identities (`C_max`).
    pub fn identity_count(&self) -> usize {
        self.identity_keys.len()
    }

    pub fn index_of(&self, image_id: &str) -> Option<usize> {
        self.index.get(image_id).copied()
    }

    /// Rows whose input norm was off by more than the warning tolerance.
    pub fn renormalized_count(&self) -> usize {
        self.renormalized
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, len: self.len() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_renormalized() {
        let ds = EmbeddingDataset::from_rows(&[vec![3.0, 4.0], vec![0.0, 2.0]], &[7, 7]).unwrap();
        assert_eq!(ds.renormalized_count(), 2);
        for row in ds.rows() {
            assert!((norm(row) - 1.0).abs() < 1e-12);
        }
        assert_eq!(ds.identity(0), 0);
        assert_eq!(ds.identity_count(), 1);
        assert_eq!(ds.identity_key(0), "7");
    }

    #[test]
    fn identity_keys_are_dense_in_first_appearance_order() {
        let keys: Vec<String> = ["bob", "amy", "bob", "cat"].iter().map(|s| s.to_string()).collect();
        let ids = (0..4).map(|i| format!("x{i}")).collect();
        let data = vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0];
        let ds = EmbeddingDataset::new(ids, &keys, data, 2).unwrap();
        assert_eq!(ds.identities(), &[0, 1, 0, 2]);
        assert_eq!(ds.identity_key(1), "amy");
        assert_eq!(ds.index_of("x2"), Some(2));
        assert_eq!(ds.renormalized_count(), 0);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(EmbeddingDataset::from_rows(&[], &[]).is_err());
        assert!(EmbeddingDataset::from_rows(&[vec![1.0]], &[0]).is_err());
        assert!(EmbeddingDataset::from_rows(&[vec![0.0, 0.0]], &[0]).is_err());
        assert!(EmbeddingDataset::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0, 0.0]], &[0, 1]).is_err());
        let ids = vec!["a".to_string(), "a".to_string()];
        let keys = vec!["p".to_string(), "q".to_string()];
        assert!(EmbeddingDataset::new(ids, &keys, vec![1.0, 0.0, 0.0, 1.0], 2).is_err());
    }
}
