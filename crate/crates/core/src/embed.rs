//! Low-distortion embeddings of the canonical configuration through
//! near-orthogonal unit vectors and a real Clifford representation.
//!
//! For unit vectors `x_i` in `R^k`, `A'_i = Σ_j (x_i)_j C'_j` is a real
//! symmetric involution and `(A'_i - A'_j)² = (2 - 2 x_i·x_j) Id`, so the
//! cross distances of the resulting point set move by at most the inner
//! products.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{clifford_family, projector_pointset, real_clifford_family, ObservableFamily, PointConfig};
use crate::error::{Error, Result};
use crate::linalg::{schatten1, Operator};
use crate::random::{gaussian_vector, random_orthonormal_rows, seeded};

/// Failed batches tolerated before the vector dimension doubles.
pub const BATCHES_PER_DIM: usize = 100;

/// Unit-norm tolerance for [`jl_pointset`] inputs.
pub const UNIT_TOL: f64 = 1e-9;

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("delta = {delta} must lie in (0, 1)")))
    }
}

/// Initial dimension `⌈64 ln(max(n, 2)) / δ²⌉` of the Gaussian step.
pub fn jl_dimension(n: usize, delta: f64) -> usize {
    (64.0 * (n.max(2) as f64).ln() / (delta * delta)).ceil() as usize
}

/// Output of [`near_orthogonal_vectors`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearOrthogonal {
    pub vectors: Vec<Vec<f64>>,
    pub dim: usize,
    /// Rejected batches.
    pub retries: usize,
    pub max_abs_inner_product: f64,
}

fn max_abs_inner(vectors: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for b in &vectors[i + 1..] {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            worst = worst.max(dot.abs());
        }
    }
    worst
}

/// `n` unit vectors with pairwise `|x_i·x_j| <= δ/4`.
///
/// The dimension is the Gaussian-step dimension capped at `n`. Below `n`,
/// batches of normalized Gaussian vectors are drawn until one satisfies the
/// bound, doubling the dimension after every [`BATCHES_PER_DIM`] failures; at
/// `n` the rows of a random orthogonal matrix are returned, which satisfy it
/// exactly.
pub fn near_orthogonal_vectors(n: usize, delta: f64, seed: u64) -> Result<NearOrthogonal> {
    near_orthogonal_vectors_from(n, delta, jl_dimension(n, delta), seed)
}

/// [`near_orthogonal_vectors`] with the search starting at dimension
/// `start_dim` instead of the Gaussian-step dimension.
pub fn near_orthogonal_vectors_from(
    n: usize,
    delta: f64,
    start_dim: usize,
    seed: u64,
) -> Result<NearOrthogonal> {
    check_delta(delta)?;
    if n == 0 || start_dim == 0 {
        return Err(Error::InvalidParameter("n and the start dimension must be positive".into()));
    }
    let bound = delta / 4.0;
    let mut k = start_dim.min(n);
    let mut rng = seeded(seed);
    let mut retries = 0;
    let mut failures = 0;
    loop {
        if k >= n {
            let vectors = random_orthonormal_rows(&mut rng, n, n);
            return Ok(NearOrthogonal {
                max_abs_inner_product: max_abs_inner(&vectors),
                vectors,
                dim: n,
                retries,
            });
        }
        let vectors: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let v = gaussian_vector(&mut rng, k);
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        let worst = max_abs_inner(&vectors);
        if worst <= bound {
            return Ok(NearOrthogonal {
                vectors,
                dim: k,
                retries,
                max_abs_inner_product: worst,
            });
        }
        retries += 1;
        failures += 1;
        if failures == BATCHES_PER_DIM {
            failures = 0;
            k = (2 * k).min(n);
        }
    }
}

/// `A'_i = Σ_j (x_i)_j C'_j` over the real Clifford family of the common
/// vector dimension.
pub fn jl_observables(vectors: &[Vec<f64>]) -> Result<ObservableFamily> {
    let k = vectors
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidParameter("no vectors".into()))?;
    for v in vectors {
        if v.len() != k {
            return Err(Error::DimensionMismatch { left: k, right: v.len() });
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidParameter(format!("non-unit vector (norm {norm})")));
        }
    }
    let basis = real_clifford_family(k)?;
    let ops = vectors
        .iter()
        .map(|v| {
            v.iter()
                .zip(&basis.ops)
                .fold(Operator::zeros(basis.dim), |acc, (&c, op)| &acc + &op.scaled(c))
        })
        .collect();
    ObservableFamily::new(ops)
}

/// Point set `σ = Id/D`, `X_i = P'_{i,+}/D`, `Y_i = P'_{i,-}/D`, `O = 0` of the
/// observables from [`jl_observables`], without the final rescaling.
pub fn jl_pointset(vectors: &[Vec<f64>]) -> Result<PointConfig> {
    Ok(projector_pointset(&jl_observables(vectors)?))
}

/// Ratio `max r / min r` of the target-to-source Schatten-1 distance ratios
/// over all pairs of labeled points.
pub fn distortion(source: &PointConfig, target: &PointConfig) -> Result<f64> {
    if source.n != target.n {
        return Err(Error::DimensionMismatch { left: source.n, right: target.n });
    }
    source.validate()?;
    target.validate()?;
    let src: Vec<(String, &Operator)> = source.points().collect();
    let tgt: Vec<&Operator> = target.points().map(|(_, op)| op).collect();
    let pairs: Vec<(usize, usize)> = (0..src.len())
        .flat_map(|a| (a + 1..src.len()).map(move |b| (a, b)))
        .collect();
    let dists = pairs
        .par_iter()
        .map(|&(a, b)| -> Result<(f64, f64)> {
            Ok((schatten1(&(src[a].1 - src[b].1))?, schatten1(&(tgt[a] - tgt[b]))?))
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = dists.iter().map(|d| d.0).fold(0.0, f64::max);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (&(a, b), &(s, t)) in pairs.iter().zip(&dists) {
        if s <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateMetric(src[a].0.clone(), src[b].0.clone()));
        }
        lo = lo.min(t / s);
        hi = hi.max(t / s);
    }
    Ok(if lo > 0.0 { hi / lo } else { f64::INFINITY })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedStats {
    pub n: usize,
    pub delta_target: f64,
    pub seed: u64,
    /// Dimension of the near-orthogonal vectors.
    pub vec_dim: usize,
    /// Gaussian-step dimension before capping at `n`.
    pub jl_dim: usize,
    pub rep_dim: usize,
    pub distortion: f64,
    pub retries: usize,
    pub max_abs_inner_product: f64,
    /// `(1 + δ/4) / (1 - δ/4)`.
    pub proof_distortion_bound: f64,
    /// All `2n + 2` labeled points are embedded.
    pub points_embedded: usize,
    pub notes: BTreeMap<String, String>,
}

/// Embeds the canonical configuration of `n` pairs with distortion at most
/// `1 + δ`, and measures the distortion actually achieved.
pub fn embed(n: usize, delta: f64, seed: u64) -> Result<(PointConfig, EmbedStats)> {
    check_delta(delta)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let vecs = near_orthogonal_vectors(n, delta, seed)?;
    let image = jl_pointset(&vecs.vectors)?;
    let scale = 1.0 / (1.0 - delta / 4.0);
    let target = image.map(|op| op.scaled(scale));
    let source = projector_pointset(&clifford_family(n)?);
    let measured = distortion(&source, &target)?;
    let mut notes = BTreeMap::new();
    notes.insert(
        "points".to_string(),
        "the full 2n+2 point configuration (O, sigma, X_i, Y_i) is embedded".to_string(),
    );
    if vecs.dim < jl_dimension(n, delta) {
        notes.insert(
            "vec_dim".to_string(),
            "vector dimension capped at n, where an orthonormal frame meets the bound".to_string(),
        );
    }
    let stats = EmbedStats {
        n,
        delta_target: delta,
        seed,
        vec_dim: vecs.dim,
        jl_dim: jl_dimension(n, delta),
        rep_dim: target.dim,
        distortion: measured,
        retries: vecs.retries,
        max_abs_inner_product: vecs.max_abs_inner_product,
        proof_distortion_bound: (1.0 + delta / 4.0) / (1.0 - delta / 4.0),
        points_embedded: 2 * n + 2,
        notes,
    };
    Ok((target, stats))
}
