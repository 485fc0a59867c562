use serde::{Deserialize, Serialize};

use super::BackendError;

/// A fixed-dimension real vector stored sparsely as sorted `(index, value)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    dim: u64,
    entries: Vec<(u64, f64)>,
}

impl EmbeddingVector {
    /// Builds a vector from unsorted pairs; duplicate indices are summed and zeros dropped.
    pub fn from_pairs(dim: u64, mut pairs: Vec<(u64, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(u64, f64)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            debug_assert!(i < dim);
            match entries.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|&(_, v)| v != 0.0);
        Self { dim, entries }
    }

    pub fn dense(values: &[f64]) -> Self {
        let pairs = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as u64, v))
            .collect();
        Self::from_pairs(values.len() as u64, pairs)
    }

    pub fn dim(&self) -> u64 {
        self.dim
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn get(&self, index: u64) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |pos| self.entries[pos].1)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|(_, v)| v.is_finite())
    }

    pub fn normalized(mut self) -> Self {
        let norm = self.norm();
        if norm > 0.0 {
            for (_, v) in &mut self.entries {
                *v /= norm;
            }
        }
        self
    }

    pub fn negated(mut self) -> Self {
        for (_, v) in &mut self.entries {
            *v = -*v;
        }
        self
    }

    pub fn dot(&self, other: &EmbeddingVector) -> f64 {
        let (mut i, mut j, mut sum) = (0, 0, 0.0);
        while i < self.entries.len() && j < other.entries.len() {
            let (a, b) = (self.entries[i], other.entries[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a.1 * b.1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }
}

pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, BackendError> {
    if a.dim != b.dim {
        return Err(BackendError::DimensionMismatch(a.dim, b.dim));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(BackendError::ZeroVector);
    }
    Ok((a.dot(b) / (na * nb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        let v = EmbeddingVector::dense(&[0.3, -1.2, 4.0]);
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-9);
        assert!((cosine(&v, &v.clone().negated()).unwrap() + 1.0).abs() < 1e-9);
        let x = EmbeddingVector::dense(&[1.0, 0.0]);
        let y = EmbeddingVector::dense(&[0.0, 1.0]);
        assert_eq!(cosine(&x, &y).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        let x = EmbeddingVector::dense(&[1.0, 0.0]);
        let z = EmbeddingVector::dense(&[0.0, 0.0]);
        let w = EmbeddingVector::dense(&[1.0, 0.0, 0.0]);
        assert!(matches!(cosine(&x, &z), Err(BackendError::ZeroVector)));
        assert!(matches!(cosine(&x, &w), Err(BackendError::DimensionMismatch(2, 3))));
    }

    proptest! {
        #[test]
        fn sparse_dot_matches_dense(a in prop::collection::vec(-5.0f64..5.0, 8), b in prop::collection::vec(-5.0f64..5.0, 8)) {
            let dense: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            let sparse = EmbeddingVector::dense(&a).dot(&EmbeddingVector::dense(&b));
            prop_assert!((dense - sparse).abs() < 1e-9);
        }
    }
}
