use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::num::Scalar;
use crate::shadowcast::ShadeRaster;

/// `n` embeddings of dimension `dim`, row-major.
///
/// For the contrastive loss the batch is laid out as `2B` rows: anchors
/// `0..B` followed by their positives `B..2B`, so anchor `i` pairs with row `B + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingBatch<T> {
    n: usize,
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> EmbeddingBatch<T> {
    pub fn new(n: usize, dim: usize, data: Vec<T>) -> Result<Self, MetricsError> {
        if data.len() != n * dim || dim == 0 {
            return Err(MetricsError::Invalid(format!("{} values for {n}x{dim}", data.len())));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(MetricsError::NonFinite(i));
        }
        Ok(Self { n, dim, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, MetricsError> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(MetricsError::Invalid("rows of differing dimension".into()));
        }
        Self::new(rows.len(), dim, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Splits a `2B` batch into its anchor and positive halves.
    pub fn split_pairs(&self) -> Result<(Self, Self), MetricsError> {
        if self.n % 2 != 0 || self.n == 0 {
            return Err(MetricsError::Invalid(format!("paired batch needs an even size, got {}", self.n)));
        }
        let half = self.n / 2 * self.dim;
        Ok((
            Self::new(self.n / 2, self.dim, self.data[..half].to_vec())?,
            Self::new(self.n / 2, self.dim, self.data[half..].to_vec())?,
        ))
    }

    fn norms(&self) -> Result<Vec<T>, MetricsError> {
        (0..self.n)
            .map(|i| {
                let norm = self.row(i).iter().fold(T::zero(), |s, &v| s + v * v).sqrt();
                if norm > T::zero() {
                    Ok(norm)
                } else {
                    Err(MetricsError::ZeroVector(i))
                }
            })
            .collect()
    }
}

/// Dense row-major matrix of similarities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> SimilarityMatrix<T> {
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, MetricsError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MetricsError::Invalid("ragged similarity matrix".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

/// Cosine similarity between every pair of rows.
pub fn similarity_matrix<T: Scalar>(e: &EmbeddingBatch<T>) -> Result<SimilarityMatrix<T>, MetricsError> {
    let norms = e.norms()?;
    let n = e.len();
    let mut data = vec![T::zero(); n * n];
    for i in 0..n {
        data[i * n + i] = T::one();
        for j in i + 1..n {
            let s = dot(e.row(i), e.row(j)) / (norms[i] * norms[j]);
            data[i * n + j] = s;
            data[j * n + i] = s;
        }
    }
    Ok(SimilarityMatrix { rows: n, cols: n, data })
}

/// Cosine similarity of each anchor (row) against each positive (column).
pub fn cross_similarity<T: Scalar>(
    anchors: &EmbeddingBatch<T>,
    positives: &EmbeddingBatch<T>,
) -> Result<SimilarityMatrix<T>, MetricsError> {
    if anchors.dim() != positives.dim() {
        return Err(MetricsError::Invalid("anchor and positive dimensions differ".into()));
    }
    let (na, np) = (anchors.norms()?, positives.norms()?);
    let mut data = Vec::with_capacity(anchors.len() * positives.len());
    for i in 0..anchors.len() {
        for j in 0..positives.len() {
            data.push(dot(anchors.row(i), positives.row(j)) / (na[i] * np[j]));
        }
    }
    Ok(SimilarityMatrix {
        rows: anchors.len(),
        cols: positives.len(),
        data,
    })
}

/// InfoNCE over a square similarity matrix whose diagonal holds the positive
/// pairs: `−(1/n) Σᵢ log softmax(Sᵢ./τ)ᵢ`, evaluated with max subtraction.
pub fn info_nce<T: Scalar>(s: &SimilarityMatrix<T>, tau: T) -> Result<T, MetricsError> {
    let n = s.rows;
    if n < 2 || s.cols != n {
        return Err(MetricsError::Invalid(format!("need a square matrix with n >= 2, got {}x{}", s.rows, s.cols)));
    }
    if !(tau > T::zero()) {
        return Err(MetricsError::Invalid("temperature must be positive".into()));
    }
    if let Some(i) = s.data.iter().position(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite(i));
    }
    let mut total = T::zero();
    for i in 0..n {
        let row: Vec<T> = (0..n).map(|j| s.get(i, j) / tau).collect();
        let (argmax, max) = row
            .iter()
            .copied()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (j, v)| if v > best.1 { (j, v) } else { best });
        // log Σ exp(v - max) = ln_1p(Σ over the non-max terms)
        let rest = row
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != argmax)
            .fold(T::zero(), |acc, (_, &v)| acc + (v - max).exp());
        let log_softmax = row[i] - max - rest.ln_1p();
        total = total - log_softmax;
    }
    Ok((total / T::lit(n as f64)).max(T::zero()))
}

/// InfoNCE of a paired `2B` batch (see [`EmbeddingBatch`] for the layout).
pub fn contrastive_loss<T: Scalar>(batch: &EmbeddingBatch<T>, tau: T) -> Result<T, MetricsError> {
    let (anchors, positives) = batch.split_pairs()?;
    info_nce(&cross_similarity(&anchors, &positives)?, tau)
}

/// Weighted objective: primary term plus `lambda1` times the contrastive term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossTerms<T> {
    pub l_controlnet: T,
    pub l_contrastive: T,
    pub lambda1: T,
}

impl<T: Scalar> LossTerms<T> {
    pub fn new(l_controlnet: T, l_contrastive: T, lambda1: T) -> Result<Self, MetricsError> {
        if l_controlnet < T::zero() || lambda1 < T::zero() {
            return Err(MetricsError::Invalid("loss and weight must be nonnegative".into()));
        }
        Ok(Self {
            l_controlnet,
            l_contrastive,
            lambda1,
        })
    }

    /// Terms with the default weight 0.1.
    pub fn with_default_weight(l_controlnet: T, l_contrastive: T) -> Result<Self, MetricsError> {
        Self::new(l_controlnet, l_contrastive, T::lit(0.1))
    }
}

pub fn total_loss<T: Scalar>(t: &LossTerms<T>) -> T {
    t.l_controlnet + t.lambda1 * t.l_contrastive
}

/// Side length of the pooling grid used by [`reference_embedding`].
pub const REFERENCE_POOL: usize = 16;

/// Non-learned stand-in embedder: 16×16 average pooling of the raster,
/// flattened and mean-centered (256 values).
pub fn reference_embedding<T: Scalar>(r: &ShadeRaster) -> Vec<T> {
    let (w, h) = (r.width(), r.height());
    let mut pooled = vec![T::zero(); REFERENCE_POOL * REFERENCE_POOL];
    for by in 0..REFERENCE_POOL {
        let (y0, y1) = (by * h / REFERENCE_POOL, ((by + 1) * h / REFERENCE_POOL).max(by * h / REFERENCE_POOL + 1).min(h));
        for bx in 0..REFERENCE_POOL {
            let (x0, x1) = (bx * w / REFERENCE_POOL, ((bx + 1) * w / REFERENCE_POOL).max(bx * w / REFERENCE_POOL + 1).min(w));
            let mut sum = 0u64;
            let mut count = 0u64;
            for y in y0..y1 {
                for x in x0..x1 {
                    sum += r.get(x, y) as u64;
                    count += 1;
                }
            }
            if count > 0 {
                pooled[by * REFERENCE_POOL + bx] = T::lit(sum as f64 / count as f64);
            }
        }
    }
    let mean = pooled.iter().fold(T::zero(), |s, &v| s + v) / T::lit(pooled.len() as f64);
    pooled.into_iter().map(|v| v - mean).collect()
}
