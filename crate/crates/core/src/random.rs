//! Seeded random operators for perturbations, embeddings and experiments.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{hermitian_part, Operator, C64};

/// The generator used everywhere a seed is accepted.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator keyed by `seed`.
pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Entries i.i.d. standard complex Gaussian (real and imaginary parts each N(0, 1/2)).
/// Entries are drawn in row-major order.
pub fn gaussian_operator<R: Rng>(rng: &mut R, dim: usize) -> Operator {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let data = (0..dim * dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * scale, im * scale)
        })
        .collect();
    Operator::from_row_major(dim, data).expect("gaussian entries are finite")
}

pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> Operator {
    hermitian_part(&gaussian_operator(rng, dim))
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of the diagonal of R moved into Q.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> Operator {
    let g = gaussian_operator(rng, dim).into_matrix();
    let (q, r) = g.qr().unpack();
    let phases = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Operator::from_matrix(q * phases).expect("unitary entries are finite")
}

/// Random PSD operator `G G*` (Wishart), optionally rank-deficient.
pub fn random_psd<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> Operator {
    let g = gaussian_operator(rng, dim).into_matrix();
    let g = g.columns(0, rank.min(dim)).into_owned();
    hermitian_part(&Operator::from_matrix(&g * g.adjoint()).expect("finite"))
}

/// Random density operator: PSD with unit trace.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize) -> Operator {
    let s = random_psd(rng, dim, dim);
    let t = s.trace().re;
    s.scaled(1.0 / t)
}

/// Random orthogonal projector of the given rank.
pub fn random_projector<R: Rng>(rng: &mut R, dim: usize, rank: usize) -> Operator {
    let u = random_unitary(rng, dim).into_matrix();
    let v = u.columns(0, rank.min(dim));
    hermitian_part(&Operator::from_matrix(v * v.adjoint()).expect("finite"))
}

/// Rows of a random real orthogonal matrix (QR of a real Gaussian matrix),
/// truncated to `count` rows; `count <= dim`.
pub fn random_orthonormal_rows<R: Rng>(rng: &mut R, count: usize, dim: usize) -> Vec<Vec<f64>> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let (q, r) = g.qr().unpack();
    (0..count)
        .map(|i| {
            let sign = if r[(i, i)] < 0.0 { -1.0 } else { 1.0 };
            (0..dim).map(|j| q[(j, i)] * sign).collect()
        })
        .collect()
}
