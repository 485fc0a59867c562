use crate::util::{fnv1a64, fnv1a64_from};

use super::{BackendError, EmbeddingVector, Translator};

pub const DEFAULT_HASH_DIM: u64 = 1024;

const SEED_TAG: &[u8] = b"kbreason/hash-embed/v1";

/// Signed feature hashing of character 3-grams.
///
/// The text is trimmed and lowercased; texts shorter than three characters
/// hash as a single gram. Each gram's 64-bit FNV-1a hash picks a bucket
/// (`h % dim`) and a sign (top bit); counts are L2-normalized.
pub fn hash_embed(text: &str, dim: u64) -> Result<EmbeddingVector, BackendError> {
    if dim < 64 {
        return Err(BackendError::DimensionTooSmall(dim));
    }
    let text = text.trim().to_lowercase();
    if text.is_empty() {
        return Err(BackendError::EmptyText);
    }
    let seed = fnv1a64(SEED_TAG);
    let chars: Vec<char> = text.chars().collect();
    let mut buf = [0u8; 4];
    let gram_hash = |gram: &[char], buf: &mut [u8; 4]| {
        gram.iter()
            .fold(seed, |h, c| fnv1a64_from(h, c.encode_utf8(buf).as_bytes()))
    };
    let grams: Vec<&[char]> = if chars.len() < 3 {
        vec![&chars[..]]
    } else {
        chars.windows(3).collect()
    };
    let pairs: Vec<(u64, f64)> = grams
        .into_iter()
        .map(|g| {
            let h = gram_hash(g, &mut buf);
            let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
            (h % dim, sign)
        })
        .collect();
    let v = EmbeddingVector::from_pairs(dim, pairs);
    if v.norm() == 0.0 {
        let h = gram_hash(&chars, &mut buf);
        return Ok(EmbeddingVector::from_pairs(dim, vec![(h % dim, 1.0)]));
    }
    Ok(v.normalized())
}

#[derive(Debug, Clone)]
pub struct HashTranslator {
    dim: u64,
}

impl HashTranslator {
    pub fn new(dim: u64) -> Result<Self, BackendError> {
        if dim < 64 {
            return Err(BackendError::DimensionTooSmall(dim));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> u64 {
        self.dim
    }
}

impl Default for HashTranslator {
    fn default() -> Self {
        Self {
            dim: DEFAULT_HASH_DIM,
        }
    }
}

impl Translator for HashTranslator {
    fn embed(&self, text: &str) -> Result<EmbeddingVector, BackendError> {
        hash_embed(text, self.dim)
    }

    fn name(&self) -> &str {
        "hash"
    }
}
