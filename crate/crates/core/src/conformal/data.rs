//! Synthetic inlier/outlier data and the k-NN anomaly score.

use rand::Rng;
use rand_distr::StandardNormal;

/// Row-major points in `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    dim: usize,
    data: Vec<f64>,
}

impl Points {
    pub fn new(dim: usize) -> Self {
        Self { dim, data: Vec::new() }
    }

    pub fn from_rows(dim: usize, data: Vec<f64>) -> Self {
        assert!(dim > 0 && data.len() % dim == 0, "data is not a whole number of rows");
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.dim);
        self.data.extend_from_slice(row);
    }
}

/// Number of mixture components.
pub const COMPONENTS: usize = 3;
/// Distance of each component mean from the origin.
pub const MEAN_SCALE: f64 = 3.0;

/// Component means `3 e1`, `-3 e1` and `3 e2`.
pub fn component_mean(k: usize, dim: usize) -> Vec<f64> {
    let mut m = vec![0.0; dim];
    match k % COMPONENTS {
        0 => m[0] = MEAN_SCALE,
        1 => m[0] = -MEAN_SCALE,
        _ => m[1.min(dim - 1)] = MEAN_SCALE,
    }
    m
}

/// Mixture draws kept as component labels plus standard normal noise, so the
/// same draw can be rendered at several noise scales.
#[derive(Debug, Clone)]
pub struct MixtureDraw {
    components: Vec<usize>,
    noise: Points,
}

impl MixtureDraw {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> Self {
        let mut components = Vec::with_capacity(count);
        let mut noise = Points::new(dim);
        noise.data.reserve(count * dim);
        for _ in 0..count {
            components.push(rng.random_range(0..COMPONENTS));
            for _ in 0..dim {
                noise.data.push(rng.sample::<f64, _>(StandardNormal));
            }
        }
        Self { components, noise }
    }

    /// The points `mean_k + scale * noise`.
    pub fn points(&self, scale: f64) -> Points {
        let dim = self.noise.dim;
        let means: Vec<Vec<f64>> = (0..COMPONENTS).map(|k| component_mean(k, dim)).collect();
        let mut out = Points::new(dim);
        out.data.reserve(self.noise.data.len());
        for (&k, z) in self.components.iter().zip(self.noise.rows()) {
            out.data.extend(means[k].iter().zip(z).map(|(m, e)| m + scale * e));
        }
        out
    }
}

/// Draws `count` points from the equal-weight mixture with component noise
/// scaled by `scale` (1 for inliers, `sqrt(a)` for outliers).
pub fn draw_mixture<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize, scale: f64) -> Points {
    MixtureDraw::sample(rng, dim, count).points(scale)
}

/// Mean Euclidean distance from `point` to its `k` nearest reference points;
/// larger means more outlying. `k` is capped at the reference size.
pub fn one_class_score(point: &[f64], reference: &Points, k: usize) -> f64 {
    assert!(!reference.is_empty(), "reference set is empty");
    let mut d2: Vec<f64> = reference
        .rows()
        .map(|r| r.iter().zip(point).map(|(a, b)| (a - b) * (a - b)).sum())
        .collect();
    let k = k.clamp(1, d2.len());
    if k < d2.len() {
        d2.select_nth_unstable_by(k - 1, f64::total_cmp);
    }
    let mut nearest = d2[..k].to_vec();
    nearest.sort_by(f64::total_cmp);
    nearest.iter().map(|x| x.sqrt()).sum::<f64>() / k as f64
}

pub fn score_all(points: &Points, reference: &Points, k: usize) -> Vec<f64> {
    points.rows().map(|x| one_class_score(x, reference, k)).collect()
}
