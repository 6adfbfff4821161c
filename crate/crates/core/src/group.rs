//! The group `C(n)` generated by `J, x_1, ..., x_n` with `J` central,
//! `J² = x_i² = 1` and `x_i x_j = J x_j x_i` for `i != j`, and the homomorphism
//! defect of the map it induces from an observable family.
//!
//! Every element has the normal form `J^a x_{i_1} ... x_{i_k}` with
//! `i_1 < ... < i_k`, so `|C(n)| = 2^{n+1}`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{clifford_family, ObservableFamily};
use crate::error::{Error, Result};
use crate::linalg::{normalized_frobenius, Operator};
use crate::random::seeded_stream;
use crate::report::fmt_f64;

/// Stability constant in the dimension bound.
pub const C_SMALL: f64 = 0.1;
/// Scale constant in the dimension bound.
pub const C_BIG: f64 = 1.0;
/// Largest `n` for which the exhaustive defect is computed.
pub const EXHAUSTIVE_MAX_N: usize = 12;

/// Normal form `J^sign x_{support[0]} x_{support[1]} ...`, 1-based, increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub sign: bool,
    pub support: Vec<usize>,
}

impl GroupElement {
    pub fn identity() -> Self {
        Self { sign: false, support: Vec::new() }
    }

    pub fn j() -> Self {
        Self { sign: true, support: Vec::new() }
    }

    pub fn generator(i: usize) -> Self {
        Self { sign: false, support: vec![i] }
    }

    /// Validates the normal form against `n` generators.
    pub fn new(sign: bool, support: Vec<usize>, n: usize) -> Result<Self> {
        let el = Self { sign, support };
        el.check(n)?;
        Ok(el)
    }

    fn check(&self, n: usize) -> Result<()> {
        for (k, &i) in self.support.iter().enumerate() {
            if i == 0 || i > n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if k > 0 && self.support[k - 1] >= i {
                return Err(Error::Malformed(format!(
                    "support {:?} is not strictly increasing",
                    self.support
                )));
            }
        }
        Ok(())
    }

    /// Bits `0..n` mark the support, bit `n` the power of `J`.
    pub fn from_index(index: u64, n: usize) -> Self {
        Self {
            sign: (index >> n) & 1 == 1,
            support: (0..n).filter(|&b| (index >> b) & 1 == 1).map(|b| b + 1).collect(),
        }
    }

    pub fn index(&self, n: usize) -> u64 {
        let mut idx = if self.sign { 1u64 << n } else { 0 };
        for &i in &self.support {
            idx |= 1 << (i - 1);
        }
        idx
    }
}

/// All `2^{n+1}` elements in index order.
pub fn all_elements(n: usize) -> Vec<GroupElement> {
    (0..1u64 << (n + 1)).map(|idx| GroupElement::from_index(idx, n)).collect()
}

/// Product in normal form. Moving each `x_q` of `y` left past the larger
/// indices of `x` picks up one `J` per crossing; equal indices cancel.
pub fn group_multiply(x: &GroupElement, y: &GroupElement, n: usize) -> Result<GroupElement> {
    x.check(n)?;
    y.check(n)?;
    let crossings: usize = y
        .support
        .iter()
        .map(|&q| x.support.len() - x.support.partition_point(|&p| p <= q))
        .sum();
    let mut support = Vec::with_capacity(x.support.len() + y.support.len());
    let (mut a, mut b) = (0, 0);
    while a < x.support.len() || b < y.support.len() {
        match (x.support.get(a), y.support.get(b)) {
            (Some(&p), Some(&q)) if p == q => {
                a += 1;
                b += 1;
            }
            (Some(&p), Some(&q)) if p < q => {
                support.push(p);
                a += 1;
            }
            (Some(_), Some(&q)) | (None, Some(&q)) => {
                support.push(q);
                b += 1;
            }
            (Some(&p), None) => {
                support.push(p);
                a += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    Ok(GroupElement {
        sign: x.sign ^ y.sign ^ (crossings % 2 == 1),
        support,
    })
}

/// `φ(J^a x_{i_1} ... x_{i_k}) = (-1)^a A_{i_1} ... A_{i_k}`.
pub fn phi(fam: &ObservableFamily, x: &GroupElement) -> Result<Operator> {
    x.check(fam.n)?;
    let mut out = Operator::identity(fam.dim);
    for &i in &x.support {
        out = &out * &fam.ops[i - 1];
    }
    Ok(if x.sign { out.scaled(-1.0) } else { out })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DefectMode {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

/// Result of [`dimension_bound`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionBound {
    pub n: usize,
    pub eps: f64,
    pub c_small: f64,
    pub c_big: f64,
    /// Whether `n² ε <= c_small`.
    pub applicable: bool,
    /// `(1 - C_big n⁴ ε²) 2^{⌊n/2⌋}`, reported whether or not it applies.
    pub bound: f64,
    /// `2^{⌊n/2⌋ - 1}`, the bound once `C_big n⁴ ε² <= 1/2`.
    pub corollary: f64,
}

/// Lower bound on the dimension of any family of `n` observables whose
/// pairwise anticommutators are at most `eps` in normalized Frobenius norm.
pub fn dimension_bound(n: usize, eps: f64, c_small: f64, c_big: f64) -> Result<DimensionBound> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n} must be at least 2")));
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must be nonnegative")));
    }
    if !(c_small > 0.0 && c_big > 0.0) {
        return Err(Error::InvalidParameter("constants must be positive".into()));
    }
    let n2eps = (n * n) as f64 * eps;
    let full = 2f64.powi((n / 2) as i32);
    let applicable = n2eps <= c_small;
    let bound = (1.0 - c_big * n2eps * n2eps) * full;
    Ok(DimensionBound {
        n,
        eps,
        c_small,
        c_big,
        applicable,
        bound,
        corollary: full / 2.0,
    })
}

/// Defect of `φ` over a set of pairs of group elements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub n: usize,
    pub dim: usize,
    pub mode: DefectMode,
    pub pairs_tested: u64,
    /// `max |φ(xy) - φ(x)φ(y)|_f`
    pub eta_max: f64,
    pub eta_mean: f64,
    /// `|φ(J) - Id|_f`
    pub j_image_distance: f64,
    /// Whether `|φ(J) - Id|_f > 42 η_max`, the hypothesis of the stability theorem.
    pub stability_hypothesis: bool,
    /// `max_{i<j} |{A_i, A_j}|_f`
    pub max_anticommutator: f64,
    /// `n² ε`, the defect bound predicted from the anticommutators.
    pub predicted_eta_bound: f64,
    pub dimension_bound: Option<DimensionBound>,
}

impl DefectReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["key", "value"])?;
        let mode = match self.mode {
            DefectMode::Exhaustive => "exhaustive".to_string(),
            DefectMode::Sampled { count, seed } => format!("sampled:{count}:{seed}"),
        };
        let mut rows = vec![
            ("n", self.n.to_string()),
            ("dim", self.dim.to_string()),
            ("mode", mode),
            ("pairs_tested", self.pairs_tested.to_string()),
            ("eta_max", fmt_f64(self.eta_max)),
            ("eta_mean", fmt_f64(self.eta_mean)),
            ("j_image_distance", fmt_f64(self.j_image_distance)),
            ("stability_hypothesis", self.stability_hypothesis.to_string()),
            ("max_anticommutator", fmt_f64(self.max_anticommutator)),
            ("predicted_eta_bound", fmt_f64(self.predicted_eta_bound)),
        ];
        if let Some(b) = &self.dimension_bound {
            rows.push(("c_small", fmt_f64(b.c_small)));
            rows.push(("c_big", fmt_f64(b.c_big)));
            rows.push(("dimension_bound_applicable", b.applicable.to_string()));
            rows.push(("dimension_bound", fmt_f64(b.bound)));
            rows.push(("dimension_corollary", fmt_f64(b.corollary)));
        }
        for (k, v) in rows {
            w.write_record([k, v.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn pair_defect(fam: &ObservableFamily, x: &GroupElement, y: &GroupElement) -> Result<f64> {
    let xy = group_multiply(x, y, fam.n)?;
    normalized_frobenius(&(&phi(fam, &xy)? - &(&phi(fam, x)? * &phi(fam, y)?)))
}

fn random_element<R: rand::Rng>(rng: &mut R, n: usize) -> GroupElement {
    let sign = rng.random::<bool>();
    let support = (1..=n).filter(|_| rng.random::<bool>()).collect();
    GroupElement { sign, support }
}

/// Homomorphism defect of `φ` induced by `fam`, over all `4^{n+1}` pairs or
/// over `count` uniformly random pairs.
pub fn homomorphism_defect(fam: &ObservableFamily, mode: DefectMode) -> Result<DefectReport> {
    fam.validate()?;
    let n = fam.n;
    let (pairs_tested, eta_max, eta_sum) = match mode {
        DefectMode::Exhaustive => {
            if n > EXHAUSTIVE_MAX_N {
                return Err(Error::TooLarge(n));
            }
            let elements = all_elements(n);
            let images = elements
                .par_iter()
                .map(|x| phi(fam, x))
                .collect::<Result<Vec<_>>>()?;
            let rows = elements
                .par_iter()
                .enumerate()
                .map(|(a, x)| -> Result<(f64, f64)> {
                    let mut max = 0.0f64;
                    let mut sum = 0.0;
                    for (b, y) in elements.iter().enumerate() {
                        let xy = group_multiply(x, y, n)?.index(n) as usize;
                        let d = normalized_frobenius(&(&images[xy] - &(&images[a] * &images[b])))?;
                        max = max.max(d);
                        sum += d;
                    }
                    Ok((max, sum))
                })
                .collect::<Result<Vec<_>>>()?;
            let count = (elements.len() * elements.len()) as u64;
            rows.into_iter()
                .fold((count, 0.0f64, 0.0), |(c, m, s), (rm, rs)| (c, m.max(rm), s + rs))
        }
        DefectMode::Sampled { count, seed } => {
            if count == 0 {
                return Err(Error::InvalidParameter("sample count must be positive".into()));
            }
            let values = (0..count as u64)
                .into_par_iter()
                .map(|k| {
                    let mut rng = seeded_stream(seed, k);
                    let x = random_element(&mut rng, n);
                    let y = random_element(&mut rng, n);
                    pair_defect(fam, &x, &y)
                })
                .collect::<Result<Vec<_>>>()?;
            let max = values.iter().cloned().fold(0.0, f64::max);
            (count as u64, max, values.iter().sum())
        }
    };
    let j_image_distance =
        normalized_frobenius(&(&phi(fam, &GroupElement::j())? - &Operator::identity(fam.dim)))?;
    let eps = fam.max_anticommutator()?;
    Ok(DefectReport {
        n,
        dim: fam.dim,
        mode,
        pairs_tested,
        eta_max,
        eta_mean: eta_sum / pairs_tested as f64,
        j_image_distance,
        stability_hypothesis: j_image_distance > 42.0 * eta_max,
        max_anticommutator: eps,
        predicted_eta_bound: (n * n) as f64 * eps,
        dimension_bound: if n >= 2 {
            Some(dimension_bound(n, eps, C_SMALL, C_BIG)?)
        } else {
            None
        },
    })
}

/// Clifford family with `A_2` rotated towards `A_1` by angle `theta`, so that
/// `|{A_1, A_2}|_f = 2 |sin θ|` and every other pair still anticommutes.
pub fn planted_family(n: usize, theta: f64) -> Result<ObservableFamily> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n = {n} must be at least 2")));
    }
    let mut fam = clifford_family(n)?;
    let tilted = &fam.ops[1].scaled(theta.cos()) + &fam.ops[0].scaled(theta.sin());
    fam.ops[1] = tilted;
    ObservableFamily::new(fam.ops)
}
