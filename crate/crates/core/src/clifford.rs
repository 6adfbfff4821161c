//! Anticommuting observable families and the (2n+2)-point configuration
//! `{O, σ, X_1, Y_1, ..., X_n, Y_n}` built from their eigenprojectors.
//!
//! The canonical configuration has `O = 0`, `σ = Id/d`, `X_i = P_{i,+}/d` and
//! `Y_i = P_{i,-}/d`, where `P_{i,±} = (Id ± C_i)/2` are the eigenprojectors of
//! the i-th Clifford generator. Points are stored already divided by `d`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{observable_defect, schatten1, Operator, C64};
use crate::random::{gaussian_operator, seeded};

pub fn pauli_x() -> Operator {
    Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("static")
}

/// `[[0, i], [-i, 0]]`.
pub fn pauli_y() -> Operator {
    let zero = C64::new(0.0, 0.0);
    Operator::from_row_major(2, vec![zero, C64::new(0.0, 1.0), C64::new(0.0, -1.0), zero])
        .expect("static")
}

pub fn pauli_z() -> Operator {
    Operator::diag(&[1.0, -1.0])
}

fn tensor(factors: &[Operator]) -> Operator {
    factors
        .iter()
        .fold(Operator::identity(1), |acc, f| acc.kron(f))
}

/// Observables (Hermitian involutions) on a common space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableFamily {
    pub n: usize,
    pub dim: usize,
    pub ops: Vec<Operator>,
}

impl ObservableFamily {
    /// Validates that every operator is an observable of the same dimension.
    pub fn new(ops: Vec<Operator>) -> Result<Self> {
        let dim = ops.first().map(Operator::dim).unwrap_or(0);
        let family = ObservableFamily {
            n: ops.len(),
            dim,
            ops,
        };
        family.validate()?;
        Ok(family)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ops.len() != self.n {
            return Err(Error::Malformed(format!(
                "family declares n = {} but holds {} operators",
                self.n,
                self.ops.len()
            )));
        }
        for op in &self.ops {
            if op.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    left: self.dim,
                    right: op.dim(),
                });
            }
            op.require_square_nonempty()?;
            let herm = op.hermiticity_defect();
            let sq = observable_defect(op) - herm;
            if herm > 1e-10 * (self.dim as f64).max(1.0) || sq > 1e-9 * self.dim as f64 {
                return Err(Error::ObservableRequired);
            }
        }
        Ok(())
    }

    /// Max over `i < j` of `|{A_i, A_j}|_f`.
    pub fn max_anticommutator(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let ac = crate::linalg::anti_commutator(&self.ops[i], &self.ops[j])?;
                worst = worst.max(crate::linalg::normalized_frobenius(&ac)?);
            }
        }
        Ok(worst)
    }
}

/// `n` pairwise anticommuting observables of dimension `2^{⌈n/2⌉}` built from
/// Pauli tensors: `C_{2i-1} = X^{⊗(i-1)} ⊗ Z ⊗ Id^{⊗(m-i)}` and
/// `C_{2i} = X^{⊗(i-1)} ⊗ Y ⊗ Id^{⊗(m-i)}` with `m = ⌈n/2⌉`. For odd `n` the
/// last generator is `X^{⊗(m-1)} ⊗ Z`.
pub fn clifford_family(n: usize) -> Result<ObservableFamily> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let m = n.div_ceil(2);
    let mut ops = Vec::with_capacity(n);
    for i in 1..=m {
        for middle in [pauli_z(), pauli_y()] {
            if ops.len() == n {
                break;
            }
            let mut factors = vec![pauli_x(); i - 1];
            factors.push(middle);
            factors.extend(std::iter::repeat_n(Operator::identity(2), m - i));
            ops.push(tensor(&factors));
        }
    }
    Ok(ObservableFamily {
        n,
        dim: 1 << m,
        ops,
    })
}

/// Real-entried variant of [`clifford_family`]: `C'_{2i-1} = C_{2i-1} ⊗ Id`
/// and `C'_{2i} = C_{2i} ⊗ Y`, dimension `2 · 2^{⌈n/2⌉}`.
pub fn real_clifford_family(n: usize) -> Result<ObservableFamily> {
    let base = clifford_family(n)?;
    let (id, y) = (Operator::identity(2), pauli_y());
    let ops = base
        .ops
        .iter()
        .enumerate()
        .map(|(k, c)| if k % 2 == 0 { c.kron(&id) } else { c.kron(&y) })
        .collect();
    Ok(ObservableFamily {
        n,
        dim: 2 * base.dim,
        ops,
    })
}

/// The labeled point set `{O, σ, X_1, Y_1, ..., X_n, Y_n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    pub n: usize,
    pub dim: usize,
    #[serde(rename = "O")]
    pub o: Operator,
    pub sigma: Operator,
    #[serde(rename = "X")]
    pub x: Vec<Operator>,
    #[serde(rename = "Y")]
    pub y: Vec<Operator>,
}

impl PointConfig {
    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.n || self.y.len() != self.n {
            return Err(Error::Malformed(format!(
                "config declares n = {} but holds {} X and {} Y operators",
                self.n,
                self.x.len(),
                self.y.len()
            )));
        }
        if self.dim == 0 {
            return Err(Error::EmptyOperator);
        }
        for (_, op) in self.points() {
            if op.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    left: self.dim,
                    right: op.dim(),
                });
            }
        }
        Ok(())
    }

    /// Labeled points in the order O, σ, X_1, ..., X_n, Y_1, ..., Y_n.
    pub fn points(&self) -> impl Iterator<Item = (String, &Operator)> {
        [("O".to_string(), &self.o), ("sigma".to_string(), &self.sigma)]
            .into_iter()
            .chain(self.x.iter().enumerate().map(|(i, op)| (format!("X{}", i + 1), op)))
            .chain(self.y.iter().enumerate().map(|(i, op)| (format!("Y{}", i + 1), op)))
    }

    /// Applies `f` to every point.
    pub fn map(&self, f: impl Fn(&Operator) -> Operator) -> PointConfig {
        PointConfig {
            n: self.n,
            dim: self.dim,
            o: f(&self.o),
            sigma: f(&self.sigma),
            x: self.x.iter().map(&f).collect(),
            y: self.y.iter().map(&f).collect(),
        }
    }
}

/// Canonical configuration of a family: `O = 0`, `σ = Id/d`,
/// `X_i = (Id + C_i)/(2d)`, `Y_i = (Id - C_i)/(2d)`.
pub fn projector_pointset(fam: &ObservableFamily) -> PointConfig {
    let d = fam.dim;
    let id = Operator::identity(d);
    let inv_d = 1.0 / d as f64;
    let x = fam
        .ops
        .iter()
        .map(|c| (&id + c).scaled(0.5).scaled(inv_d))
        .collect();
    let y = fam
        .ops
        .iter()
        .map(|c| (&id - c).scaled(0.5).scaled(inv_d))
        .collect();
    PointConfig {
        n: fam.n,
        dim: d,
        o: Operator::zeros(d),
        sigma: id.scaled(inv_d),
        x,
        y,
    }
}

/// Which `i < j` pairs enter the anticommutation constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum PairMode {
    All,
    Sampled { count: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// `value >= bound` must hold up to `δ`.
    AtLeast,
    /// `value <= bound` must hold up to `δ`.
    AtMost,
}

/// One hypothesis, evaluated at `δ = 0`. `slack` is positive when the
/// constraint holds with room to spare; `required_delta` is the smallest
/// `δ >= 0` at which it holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRow {
    pub id: String,
    pub kind: ConstraintKind,
    pub value: f64,
    pub bound: f64,
    pub slack: f64,
    pub required_delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub n: usize,
    pub dim: usize,
    pub pair_mode: PairMode,
    pub pairs_checked: usize,
    /// Smallest `δ` for which every checked hypothesis holds.
    pub delta_observed: f64,
    pub constraints: Vec<ConstraintRow>,
}

impl MetricReport {
    pub fn worst(&self) -> Option<&ConstraintRow> {
        self.constraints
            .iter()
            .max_by(|a, b| a.required_delta.total_cmp(&b.required_delta))
    }

    /// CSV with columns `id,value,bound,slack`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "value", "bound", "slack"])?;
        for row in &self.constraints {
            w.write_record([
                row.id.clone(),
                crate::report::fmt_f64(row.value),
                crate::report::fmt_f64(row.bound),
                crate::report::fmt_f64(row.slack),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn at_least(id: String, value: f64, bound: f64, required_delta: f64) -> ConstraintRow {
    ConstraintRow {
        id,
        kind: ConstraintKind::AtLeast,
        value,
        bound,
        slack: value - bound,
        required_delta,
    }
}

fn at_most(id: String, value: f64, bound: f64, required_delta: f64) -> ConstraintRow {
    ConstraintRow {
        id,
        kind: ConstraintKind::AtMost,
        value,
        bound,
        slack: bound - value,
        required_delta,
    }
}

fn dist(a: &Operator, b: &Operator) -> Result<f64> {
    a.require_same_dim(b)?;
    schatten1(&(a - b))
}

/// Evaluates every hypothesis on the configuration: the `1 ± δ` bracket on
/// `|σ - O|_1`, the triangle sums for each `X_i` and `Y_i`, `|X_i - Y_i|_1 >= 1 - δ`,
/// and the four-way minimum `>= (1 - δ)√2/2` for each checked pair `i < j`.
pub fn verify_metric_relations(cfg: &PointConfig, mode: PairMode) -> Result<MetricReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let s = dist(&cfg.sigma, &cfg.o)?;
    rows.push(at_least("sigma_O_lower".into(), s, 1.0, 1.0 - s));
    rows.push(at_most("sigma_O_upper".into(), s, 1.0, s - 1.0));

    let per_point: Vec<Vec<ConstraintRow>> = (0..cfg.n)
        .into_par_iter()
        .map(|i| -> Result<Vec<ConstraintRow>> {
            let (xi, yi) = (&cfg.x[i], &cfg.y[i]);
            let sx = dist(xi, &cfg.o)? + dist(&cfg.sigma, xi)?;
            let sy = dist(yi, &cfg.o)? + dist(&cfg.sigma, yi)?;
            let xy = dist(xi, yi)?;
            let k = i + 1;
            Ok(vec![
                at_most(format!("sum_X{k}"), sx, 1.0, sx - 1.0),
                at_most(format!("sum_Y{k}"), sy, 1.0, sy - 1.0),
                at_least(format!("sep_X{k}_Y{k}"), xy, 1.0, 1.0 - xy),
            ])
        })
        .collect::<Result<_>>()?;
    rows.extend(per_point.into_iter().flatten());

    let all_pairs: Vec<(usize, usize)> = (0..cfg.n)
        .flat_map(|i| (i + 1..cfg.n).map(move |j| (i, j)))
        .collect();
    let pairs = match mode {
        PairMode::All => all_pairs,
        PairMode::Sampled { count, seed } => {
            let mut rng = seeded(seed);
            let take = count.min(all_pairs.len());
            let mut picked = index::sample(&mut rng, all_pairs.len(), take).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|k| all_pairs[k]).collect()
        }
    };
    let target = FRAC_1_SQRT_2;
    let pair_rows: Vec<ConstraintRow> = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<ConstraintRow> {
            let m = [
                dist(&cfg.x[i], &cfg.x[j])?,
                dist(&cfg.x[i], &cfg.y[j])?,
                dist(&cfg.y[i], &cfg.x[j])?,
                dist(&cfg.y[i], &cfg.y[j])?,
            ]
            .into_iter()
            .fold(f64::INFINITY, f64::min);
            Ok(at_least(
                format!("cross_{}_{}", i + 1, j + 1),
                m,
                target,
                1.0 - m / target,
            ))
        })
        .collect::<Result<_>>()?;
    let pairs_checked = pair_rows.len();
    rows.extend(pair_rows);

    let delta_observed = rows
        .iter()
        .map(|r| r.required_delta)
        .fold(0.0, f64::max);
    Ok(MetricReport {
        n: cfg.n,
        dim: cfg.dim,
        pair_mode: mode,
        pairs_checked,
        delta_observed,
        constraints: rows,
    })
}

/// Adds to `σ` and every `X_i`, `Y_i` an independent complex Gaussian matrix
/// rescaled to Schatten-1 norm `delta/8`. Draw order is σ, X_1, Y_1, X_2, ...
/// so a seed fixes the output bit for bit. `O` is left untouched.
pub fn perturb_pointset(cfg: &PointConfig, delta: f64, seed: u64) -> Result<PointConfig> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "perturbation delta must lie in [0, 1], got {delta}"
        )));
    }
    cfg.validate()?;
    if delta == 0.0 {
        return Ok(cfg.clone());
    }
    let budget = delta / 8.0;
    let mut rng = seeded(seed);
    let mut bump = |op: &Operator| -> Result<Operator> {
        let g = gaussian_operator(&mut rng, cfg.dim);
        let norm = schatten1(&g)?;
        Ok(op + &g.scaled(budget / norm))
    };
    let sigma = bump(&cfg.sigma)?;
    let mut x = Vec::with_capacity(cfg.n);
    let mut y = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        x.push(bump(&cfg.x[i])?);
        y.push(bump(&cfg.y[i])?);
    }
    Ok(PointConfig {
        n: cfg.n,
        dim: cfg.dim,
        o: cfg.o.clone(),
        sigma,
        x,
        y,
    })
}

/// Two orthonormal bases of the real plane at angle π/4: `(u1, v1)` standard,
/// `u2 = (c, s)`, `v2 = (s, -c)` with `c = s = 1/√2`.
#[derive(Clone, Copy, Debug)]
pub struct PlaneFixture {
    pub u1: [f64; 2],
    pub v1: [f64; 2],
    pub u2: [f64; 2],
    pub v2: [f64; 2],
}

impl PlaneFixture {
    pub fn pi_over_four() -> Self {
        let c = FRAC_1_SQRT_2;
        PlaneFixture {
            u1: [1.0, 0.0],
            v1: [0.0, 1.0],
            u2: [c, c],
            v2: [c, -c],
        }
    }

    /// `[|u1-u2|², |u1-v2|², |v1-u2|², |v1+v2|²]`, each `2 - √2` at π/4.
    pub fn squared_distances(&self) -> [f64; 4] {
        let sq = |a: [f64; 2], b: [f64; 2], sign: f64| {
            let dx = a[0] + sign * b[0];
            let dy = a[1] + sign * b[1];
            dx * dx + dy * dy
        };
        [
            sq(self.u1, self.u2, -1.0),
            sq(self.u1, self.v2, -1.0),
            sq(self.v1, self.u2, -1.0),
            sq(self.v1, self.v2, 1.0),
        ]
    }

    /// Reflections `u u* - v v*` for both bases.
    pub fn reflections(&self) -> (Operator, Operator) {
        let refl = |u: [f64; 2], v: [f64; 2]| {
            Operator::from_fn(2, |r, c| C64::new(u[r] * u[c] - v[r] * v[c], 0.0))
        };
        (refl(self.u1, self.v1), refl(self.u2, self.v2))
    }
}
