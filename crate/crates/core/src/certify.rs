//! From metric data to near-anticommuting observables.
//!
//! The pipeline mirrors the constructive rigidity argument:
//!
//! 1. [`normalize_config`] moves `O` to zero and makes `σ` a density operator.
//! 2. [`certify_pair`] extracts a resolution of the identity `P + Q = Id` from
//!    each `(X_i, Y_i)`, using the positive eigenspace of `X_h - Y_h`.
//! 3. `A_i = P_i - Q_i` are observables; [`anticommutation_residual`] measures
//!    `|{A_i, A_j} σ^{1/2}|_F`.
//! 4. [`select_block`] picks a spectral threshold projector `R` of `σ^{1/2}`
//!    on which the anticommutators and the commutators `[A_i, R]` are small on
//!    average.
//! 5. [`round_observables`] compresses `R A_i R` to the range of `R` and
//!    rounds it to an exact observable with the matrix sign.
//!
//! No residual is compared against an asymptotic bound; everything is
//! reported raw.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{verify_metric_relations, ObservableFamily, PairMode, PointConfig};
use crate::error::{Error, Result};
use crate::linalg::{
    anti_commutator, commutator, eigh, frobenius, hermitian_part, matrix_sign,
    normalized_frobenius, observable_defect, polar_unitary, positive_negative_parts,
    projector_defect, psd_sqrt, schatten1, spectral_projector_nonneg, Operator, C64,
};
use crate::report::fmt_f64;

/// Tolerance on `σ` being PSD with unit trace.
pub const STATE_TOL: f64 = 1e-8;
/// Floor on the averaged residuals in the block-selection objective.
pub const OBJECTIVE_FLOOR: f64 = 1e-14;
/// Constant asserted in the block-selection post-check.
pub const BLOCK_CONSTANT: f64 = 4.0;
/// Smallest `|σ - O|_1` accepted by [`normalize_config`].
pub const MIN_SIGMA_NORM: f64 = 1e-6;

fn require_state(sigma: &Operator) -> Result<()> {
    sigma.require_square_nonempty()?;
    if !sigma.is_hermitian() {
        return Err(Error::InvalidState("sigma is not Hermitian".into()));
    }
    let eig = eigh(sigma)?;
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -STATE_TOL {
        return Err(Error::InvalidState(format!("smallest eigenvalue {min:e}")));
    }
    let tr = sigma.trace().re;
    if (tr - 1.0).abs() > STATE_TOL {
        return Err(Error::InvalidState(format!("trace {tr}")));
    }
    Ok(())
}

fn require_observable(a: &Operator, tol: f64) -> Result<()> {
    a.require_square_nonempty()?;
    if observable_defect(a) > tol * a.dim() as f64 {
        Err(Error::ObservableRequired)
    } else {
        Ok(())
    }
}

/// Subtracts `O`, left-multiplies by the inverse polar unitary of `σ - O`
/// and rescales so that `σ` becomes PSD with unit trace.
pub fn normalize_config(cfg: &PointConfig) -> Result<PointConfig> {
    cfg.validate()?;
    let shifted = cfg.map(|op| op - &cfg.o);
    let norm = schatten1(&shifted.sigma)?;
    if norm < MIN_SIGMA_NORM {
        return Err(Error::DegenerateConfiguration(norm));
    }
    let u_inv = polar_unitary(&shifted.sigma)?.adjoint();
    let rotated = shifted.map(|op| &u_inv * op);
    let sigma = hermitian_part(&rotated.sigma);
    let scale = 1.0 / sigma.trace().re;
    let mut out = rotated.map(|op| op.scaled(scale));
    out.sigma = sigma.scaled(scale);
    out.o = Operator::zeros(cfg.dim);
    Ok(out)
}

/// Projections extracted from one `(X, Y)` pair, with the residuals that
/// measure how well they explain the pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairCertificate {
    pub p: Operator,
    pub q: Operator,
    /// Positive part of `P X_h P + Q (σ - X_h) Q`; commutes with `P` and `Q`.
    pub rho: Operator,
    /// `|X - σ^{1/2} P σ^{1/2}|_1`
    pub res_x: f64,
    /// `|Y - σ^{1/2} Q σ^{1/2}|_1`
    pub res_y: f64,
    /// `|[P, σ^{1/2}]|_F`
    pub com_p: f64,
    /// `|[Q, σ^{1/2}]|_F`
    pub com_q: f64,
    /// `|ρ - σ|_1`
    pub rho_dist: f64,
}

impl PairCertificate {
    /// `P - Q`.
    pub fn observable(&self) -> Operator {
        hermitian_part(&(&self.p - &self.q))
    }

    pub fn summary(&self, index: usize) -> PairSummary {
        PairSummary {
            index,
            rank_p: self.p.trace().re.round() as usize,
            res_x: self.res_x,
            res_y: self.res_y,
            com_p: self.com_p,
            com_q: self.com_q,
            rho_dist: self.rho_dist,
        }
    }
}

/// Certificate for the pair `(X, Y)` against the state `σ`.
pub fn certify_pair(sigma: &Operator, x: &Operator, y: &Operator) -> Result<PairCertificate> {
    require_state(sigma)?;
    sigma.require_same_dim(x)?;
    sigma.require_same_dim(y)?;
    let xh = hermitian_part(x);
    let yh = hermitian_part(y);
    let p = spectral_projector_nonneg(&(&xh - &yh))?;
    let q = &Operator::identity(sigma.dim()) - &p;
    let rho_tilde = &(&(&p * &xh) * &p) + &(&(&q * &(sigma - &xh)) * &q);
    let (rho, _) = positive_negative_parts(&hermitian_part(&rho_tilde))?;
    let root = psd_sqrt(sigma)?;
    let sandwich = |m: &Operator| &(&root * m) * &root;
    Ok(PairCertificate {
        res_x: schatten1(&(x - &sandwich(&p)))?,
        res_y: schatten1(&(y - &sandwich(&q)))?,
        com_p: frobenius(&commutator(&p, &root)?)?,
        com_q: frobenius(&commutator(&q, &root)?)?,
        rho_dist: schatten1(&(&rho - sigma))?,
        p,
        q,
        rho,
    })
}

fn ac_residual_with_root(root: &Operator, a: &Operator, b: &Operator) -> Result<f64> {
    frobenius(&(&anti_commutator(a, b)? * root))
}

/// `|{A, B} σ^{1/2}|_F` for observables `A`, `B` and a density operator `σ`.
pub fn anticommutation_residual(sigma: &Operator, a: &Operator, b: &Operator) -> Result<f64> {
    require_state(sigma)?;
    sigma.require_same_dim(a)?;
    sigma.require_same_dim(b)?;
    require_observable(a, 1e-8)?;
    require_observable(b, 1e-8)?;
    ac_residual_with_root(&psd_sqrt(sigma)?, a, b)
}

/// Outcome of [`select_block`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockSelection {
    pub projector: Operator,
    /// Threshold `λ` with `R = χ_{>=λ}(σ^{1/2})`.
    pub threshold: f64,
    pub rank: usize,
    pub candidates: usize,
    /// `mean_i |T_i σ^{1/2}|_F²`
    pub eps: f64,
    /// `mean_j |[X_j, σ^{1/2}]|_F²`
    pub comm_delta: f64,
    /// `mean_i |T_i R|_F² / Tr R`
    pub r1: f64,
    /// `mean_j |[X_j, R]|_F² / Tr R`
    pub r2: f64,
    pub objective: f64,
    /// Whether `r1 <= 4 max(eps, η₀)` and `r2 <= 4 max(comm_delta^{1/2}, η₀)`.
    pub within_bound: bool,
}

fn mean_sq_frobenius(ops: impl Iterator<Item = Result<Operator>>) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for op in ops {
        let f = frobenius(&op?)?;
        sum += f * f;
        count += 1;
    }
    Ok(sum / count as f64)
}

/// Chooses a nonzero spectral threshold projector `R` of `σ^{1/2}` on which
/// the operators `T_i` and the commutators `[X_j, R]` are small relative to
/// `Tr R`.
///
/// Candidates are `χ_{>=λ}(σ^{1/2})` for each distinct eigenvalue `λ`; the
/// winner minimizes `max(r1 / max(eps, η₀), r2 / max(comm_delta^{1/2}, η₀))`,
/// ties going to the larger `λ`. The layer-cake averaging over thresholds
/// guarantees a candidate with objective at most 4; `within_bound` records the
/// check and a violation is logged, not raised.
pub fn select_block(
    sigma: &Operator,
    t_list: &[Operator],
    x_list: &[Operator],
) -> Result<BlockSelection> {
    if t_list.is_empty() || x_list.is_empty() {
        return Err(Error::InvalidParameter(
            "block selection needs nonempty operator lists".into(),
        ));
    }
    require_state(sigma)?;
    for op in t_list.iter().chain(x_list) {
        sigma.require_same_dim(op)?;
    }
    for x in x_list {
        require_observable(x, 1e-8)?;
    }
    let root = psd_sqrt(sigma)?;
    let eps = mean_sq_frobenius(t_list.iter().map(|t| Ok(t * &root)))?;
    let comm_delta = mean_sq_frobenius(x_list.iter().map(|x| commutator(x, &root)))?;
    let eps_scale = eps.max(OBJECTIVE_FLOOR);
    let comm_scale = comm_delta.sqrt().max(OBJECTIVE_FLOOR);

    let eig = eigh(&root)?;
    let ends = eig.level_ends();
    let scored: Vec<(usize, f64, f64, f64)> = ends
        .par_iter()
        .map(|&end| -> Result<(usize, f64, f64, f64)> {
            let r = eig.leading_projector(end);
            let tr = end as f64;
            let r1 = mean_sq_frobenius(t_list.iter().map(|t| Ok(t * &r)))? / tr;
            let r2 = mean_sq_frobenius(x_list.iter().map(|x| commutator(x, &r)))? / tr;
            Ok((end, r1, r2, (r1 / eps_scale).max(r2 / comm_scale)))
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (k, cand) in scored.iter().enumerate() {
        if cand.3 < scored[best].3 {
            best = k;
        }
    }
    let (end, r1, r2, objective) = scored[best];
    let slack = 1.0 + 1e-9;
    let within_bound = r1 <= BLOCK_CONSTANT * eps_scale * slack
        && r2 <= BLOCK_CONSTANT * comm_scale * slack;
    if !within_bound {
        log::warn!(
            "block selection exceeded constant {BLOCK_CONSTANT}: r1 = {r1:e} (eps = {eps:e}), \
             r2 = {r2:e} (comm_delta^1/2 = {:e})",
            comm_delta.sqrt()
        );
    }
    Ok(BlockSelection {
        projector: eig.leading_projector(end),
        threshold: eig.eigenvalues[end - 1],
        rank: end,
        candidates: ends.len(),
        eps,
        comm_delta,
        r1,
        r2,
        objective,
        within_bound,
    })
}

/// Orthonormal basis of the range of a projector, taken from its own columns
/// by Gram-Schmidt with largest-residual pivoting (lowest index on ties), so
/// coordinate projectors give coordinate vectors.
fn range_isometry(r: &Operator) -> Result<DMatrix<C64>> {
    r.require_square_nonempty()?;
    let defect = projector_defect(r);
    if defect > 1e-8 {
        return Err(Error::NotProjector(format!("|R² - R|_F + |R - R*|_F = {defect:e}")));
    }
    let rank = r.trace().re.round() as usize;
    if rank == 0 {
        return Err(Error::NotProjector("rank zero".into()));
    }
    let d = r.dim();
    let mut residual: Vec<DVector<C64>> = (0..d).map(|j| r.matrix().column(j).into_owned()).collect();
    let mut used = vec![false; d];
    let mut basis = DMatrix::<C64>::zeros(d, rank);
    for k in 0..rank {
        let mut pick = None;
        let mut best = 0.0;
        for j in 0..d {
            let norm = residual[j].norm();
            if !used[j] && norm > best {
                best = norm;
                pick = Some(j);
            }
        }
        let j = pick.ok_or_else(|| Error::NotProjector("range collapsed".into()))?;
        used[j] = true;
        let v = &residual[j] / C64::new(best, 0.0);
        for (other, res) in residual.iter_mut().enumerate() {
            if !used[other] {
                let coeff = v.dotc(res);
                *res -= &v * coeff;
            }
        }
        basis.set_column(k, &v);
    }
    Ok(basis)
}

/// `V* A_i V` for an isometry `V` onto the range of `R`; these are the
/// compressions of `R A_i R` to that `d'`-dimensional subspace.
pub fn compress_to_range(r: &Operator, a_list: &[Operator]) -> Result<Vec<Operator>> {
    let v = range_isometry(r)?;
    a_list
        .iter()
        .map(|a| {
            r.require_same_dim(a)?;
            Ok(hermitian_part(&Operator::from_matrix(v.adjoint() * a.matrix() * &v)?))
        })
        .collect()
}

/// Rounds each compressed `R A_i R` to an exact observable on the range of
/// `R` via the matrix sign.
pub fn round_observables(r: &Operator, a_list: &[Operator]) -> Result<ObservableFamily> {
    let compressed = compress_to_range(r, a_list)?;
    let ops = compressed
        .iter()
        .map(matrix_sign)
        .collect::<Result<Vec<_>>>()?;
    ObservableFamily::new(ops)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub index: usize,
    pub rank_p: usize,
    pub res_x: f64,
    pub res_y: f64,
    pub com_p: f64,
    pub com_q: f64,
    pub rho_dist: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairValue {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Everything measured along the certification pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub n: usize,
    pub dim: usize,
    pub input_delta: f64,
    pub per_pair: Vec<PairSummary>,
    /// `|{A_i, A_j} σ^{1/2}|_F` for `i < j`.
    pub pre_block_ac: Vec<PairValue>,
    /// `|[A_i, σ^{1/2}]|_F`.
    pub commutation: Vec<f64>,
    pub block_dim: usize,
    pub block_trace_fraction: f64,
    pub block_candidates: usize,
    pub block_eps: f64,
    pub block_comm_delta: f64,
    pub block_r1: f64,
    pub block_r2: f64,
    pub block_within_bound: bool,
    /// `|{A'_i, A'_j}|_f²` for `i < j`.
    pub final_ac: Vec<PairValue>,
    /// Mean of `final_ac` over all pairs.
    pub final_ac_mean_sq: f64,
    /// `n² · input_delta^{1/32}`, for scale only.
    pub bound_rhs_shape: f64,
}

impl CertificationReport {
    pub fn max_pre_block_ac(&self) -> f64 {
        self.pre_block_ac.iter().map(|p| p.value).fold(0.0, f64::max)
    }

    pub fn mean_pre_block_ac(&self) -> f64 {
        let n = self.pre_block_ac.len().max(1) as f64;
        self.pre_block_ac.iter().map(|p| p.value).sum::<f64>() / n
    }

    pub fn max_commutation(&self) -> f64 {
        self.commutation.iter().cloned().fold(0.0, f64::max)
    }

    /// Long-format CSV `section,item,metric,value` with sections
    /// `pairs`, `anticommutators`, `block` and `final`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["section", "item", "metric", "value"])?;
        let mut row = |section: &str, item: String, metric: &str, value: String| {
            w.write_record([section, item.as_str(), metric, value.as_str()])
        };
        for p in &self.per_pair {
            let item = p.index.to_string();
            row("pairs", item.clone(), "rank_P", p.rank_p.to_string())?;
            row("pairs", item.clone(), "res_X", fmt_f64(p.res_x))?;
            row("pairs", item.clone(), "res_Y", fmt_f64(p.res_y))?;
            row("pairs", item.clone(), "com_P", fmt_f64(p.com_p))?;
            row("pairs", item.clone(), "com_Q", fmt_f64(p.com_q))?;
            row("pairs", item.clone(), "rho_dist", fmt_f64(p.rho_dist))?;
            row("pairs", item, "commutation", fmt_f64(self.commutation[p.index - 1]))?;
        }
        for ac in &self.pre_block_ac {
            row("anticommutators", format!("{}-{}", ac.i, ac.j), "pre_block", fmt_f64(ac.value))?;
        }
        row("block", String::new(), "block_dim", self.block_dim.to_string())?;
        row("block", String::new(), "block_trace_fraction", fmt_f64(self.block_trace_fraction))?;
        row("block", String::new(), "candidates", self.block_candidates.to_string())?;
        row("block", String::new(), "eps", fmt_f64(self.block_eps))?;
        row("block", String::new(), "comm_delta", fmt_f64(self.block_comm_delta))?;
        row("block", String::new(), "r1", fmt_f64(self.block_r1))?;
        row("block", String::new(), "r2", fmt_f64(self.block_r2))?;
        row("block", String::new(), "within_bound", self.block_within_bound.to_string())?;
        for ac in &self.final_ac {
            row("final", format!("{}-{}", ac.i, ac.j), "ac_normalized_sq", fmt_f64(ac.value))?;
        }
        row("final", String::new(), "input_delta", fmt_f64(self.input_delta))?;
        row("final", String::new(), "final_ac_mean_sq", fmt_f64(self.final_ac_mean_sq))?;
        row("final", String::new(), "bound_rhs_shape", fmt_f64(self.bound_rhs_shape))?;
        w.flush()?;
        Ok(())
    }
}

/// Intermediate objects of a certification run.
#[derive(Clone, Debug)]
pub struct Certification {
    pub report: CertificationReport,
    pub normalized: PointConfig,
    pub pairs: Vec<PairCertificate>,
    /// `A_i = P_i - Q_i` on the full space.
    pub observables: Vec<Operator>,
    pub block: BlockSelection,
    /// Rounded observables `A'_i` on the range of the block.
    pub rounded: ObservableFamily,
}

/// Observables `A_i = P_i - Q_i` certified from a configuration.
pub fn observables_from_config(cfg: &PointConfig) -> Result<ObservableFamily> {
    let norm = normalize_config(cfg)?;
    let ops = (0..cfg.n)
        .into_par_iter()
        .map(|i| certify_pair(&norm.sigma, &norm.x[i], &norm.y[i]).map(|c| c.observable()))
        .collect::<Result<Vec<_>>>()?;
    ObservableFamily::new(ops)
}

/// Runs the whole pipeline and returns the report.
pub fn certify_config(cfg: &PointConfig) -> Result<CertificationReport> {
    certify_config_detailed(cfg).map(|c| c.report)
}

/// Runs the whole pipeline and keeps every intermediate object.
pub fn certify_config_detailed(cfg: &PointConfig) -> Result<Certification> {
    if cfg.n < 2 {
        return Err(Error::NeedTwoPairs);
    }
    let metric = verify_metric_relations(cfg, PairMode::All)?;
    let normalized = normalize_config(cfg)?;
    let sigma = &normalized.sigma;
    let n = cfg.n;

    let pairs = (0..n)
        .into_par_iter()
        .map(|i| certify_pair(sigma, &normalized.x[i], &normalized.y[i]))
        .collect::<Result<Vec<_>>>()?;
    let observables: Vec<Operator> = pairs.iter().map(PairCertificate::observable).collect();
    let root = psd_sqrt(sigma)?;

    let index_pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let pre_block_ac = index_pairs
        .par_iter()
        .map(|&(i, j)| -> Result<PairValue> {
            Ok(PairValue {
                i: i + 1,
                j: j + 1,
                value: ac_residual_with_root(&root, &observables[i], &observables[j])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let commutation = observables
        .iter()
        .map(|a| frobenius(&commutator(a, &root)?))
        .collect::<Result<Vec<_>>>()?;

    let t_list = index_pairs
        .iter()
        .map(|&(i, j)| anti_commutator(&observables[i], &observables[j]))
        .collect::<Result<Vec<_>>>()?;
    let block = select_block(sigma, &t_list, &observables)?;
    let rounded = round_observables(&block.projector, &observables)?;

    let final_ac = index_pairs
        .iter()
        .map(|&(i, j)| -> Result<PairValue> {
            let f = normalized_frobenius(&anti_commutator(&rounded.ops[i], &rounded.ops[j])?)?;
            Ok(PairValue {
                i: i + 1,
                j: j + 1,
                value: f * f,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let final_ac_mean_sq =
        final_ac.iter().map(|p| p.value).sum::<f64>() / index_pairs.len() as f64;

    let report = CertificationReport {
        n,
        dim: cfg.dim,
        input_delta: metric.delta_observed,
        per_pair: pairs.iter().enumerate().map(|(i, c)| c.summary(i + 1)).collect(),
        pre_block_ac,
        commutation,
        block_dim: rounded.dim,
        block_trace_fraction: block.projector.trace().re / cfg.dim as f64,
        block_candidates: block.candidates,
        block_eps: block.eps,
        block_comm_delta: block.comm_delta,
        block_r1: block.r1,
        block_r2: block.r2,
        block_within_bound: block.within_bound,
        final_ac,
        final_ac_mean_sq,
        bound_rhs_shape: (n * n) as f64 * metric.delta_observed.powf(1.0 / 32.0),
    };
    Ok(Certification {
        report,
        normalized,
        pairs,
        observables,
        block,
        rounded,
    })
}
