//! Dense complex linear algebra on square operators.
//!
//! Everything downstream works with [`Operator`], a finite square complex
//! matrix. This module supplies the Schatten norms, the Hermitian spectral
//! calculus (positive/negative parts, spectral projectors, square roots and
//! the matrix sign) and the polar unitary. Hermitian inputs are
//! re-symmetrized before they are factored, so results never depend on which
//! triangle of a nearly-Hermitian matrix the eigensolver happens to read.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative tolerance for the Hermiticity check `|A - A*|_F <= tol (1 + |A|_F)`.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Eigenvalues within `ZERO_TOL * |H|_inf` of zero are sent to the positive side.
pub const ZERO_TOL: f64 = 1e-10;
/// Absolute clip window for slightly negative eigenvalues of PSD inputs.
pub const PSD_CLIP: f64 = 1e-10;
/// Eigenvalues below `-PSD_REJECT * |S|_inf` mean the input is not PSD.
pub const PSD_REJECT: f64 = 1e-6;
/// Eigenvalues closer than this (relative to the spectral radius) form one level.
pub const LEVEL_TOL: f64 = 1e-10;

/// A square complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorRepr", into = "OperatorRepr")]
pub struct Operator(DMatrix<C64>);

/// JSON form: `{"dim": d, "data": [[re, im], ...]}`, row-major.
#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    dim: usize,
    data: Vec<[f64; 2]>,
}

impl TryFrom<OperatorRepr> for Operator {
    type Error = Error;

    fn try_from(repr: OperatorRepr) -> Result<Self> {
        let data = repr.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
        Operator::from_row_major(repr.dim, data)
    }
}

impl From<Operator> for OperatorRepr {
    fn from(op: Operator) -> Self {
        OperatorRepr {
            dim: op.dim(),
            data: op.row_major().into_iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Operator(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Operator(DMatrix::identity(dim, dim))
    }

    /// Wraps a matrix, rejecting non-square or non-finite input.
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let z = m[(r, c)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: r, col: c });
                }
            }
        }
        Ok(Operator(m))
    }

    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::BadLength {
                got: data.len(),
                expected: dim * dim,
            });
        }
        Operator::from_matrix(DMatrix::from_row_slice(dim, dim, &data))
    }

    /// Builds a real operator from rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    cols: row.len(),
                });
            }
            data.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Operator::from_row_major(dim, data)
    }

    pub fn diag(values: &[f64]) -> Self {
        let dim = values.len();
        Operator(DMatrix::from_fn(dim, dim, |r, c| {
            if r == c {
                C64::new(values[r], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Operator(DMatrix::from_fn(dim, dim, f))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn row_major(&self) -> Vec<C64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                out.push(self.0[(r, c)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Operator {
        Operator(self.0.adjoint())
    }

    pub fn scaled(&self, s: f64) -> Operator {
        Operator(self.0.map(|z| z * s))
    }

    pub fn scaled_c(&self, s: C64) -> Operator {
        Operator(self.0.map(|z| z * s))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Operator) -> Operator {
        Operator(self.0.kronecker(&other.0))
    }

    /// Largest absolute imaginary part over all entries.
    pub fn max_imag(&self) -> f64 {
        self.0.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// `|A - A*|_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.0 - self.0.adjoint()).norm()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_TOL * (1.0 + self.0.norm())
    }

    pub(crate) fn require_square_nonempty(&self) -> Result<()> {
        if self.dim() == 0 {
            Err(Error::EmptyOperator)
        } else {
            Ok(())
        }
    }

    pub(crate) fn require_same_dim(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            })
        } else {
            Ok(())
        }
    }

    fn require_hermitian(&self) -> Result<()> {
        self.require_square_nonempty()?;
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::HermitianRequired)
        }
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator(-&self.0)
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        Operator(self.0 + rhs.0)
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        Operator(self.0 - rhs.0)
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        Operator(self.0 * rhs.0)
    }
}

/// Sum of singular values.
pub fn schatten1(a: &Operator) -> Result<f64> {
    a.require_square_nonempty()?;
    Ok(a.0.singular_values().iter().sum())
}

pub fn frobenius(a: &Operator) -> Result<f64> {
    a.require_square_nonempty()?;
    Ok(a.0.norm())
}

/// `d^{-1/2} |A|_F`.
pub fn normalized_frobenius(a: &Operator) -> Result<f64> {
    Ok(frobenius(a)? / (a.dim() as f64).sqrt())
}

/// Largest singular value.
pub fn operator_norm(a: &Operator) -> Result<f64> {
    a.require_square_nonempty()?;
    Ok(a.0.singular_values().iter().cloned().fold(0.0, f64::max))
}

/// `(A + A*)/2`, symmetrized entrywise so the result is exactly Hermitian.
pub fn hermitian_part(a: &Operator) -> Operator {
    let d = a.dim();
    let m = &a.0;
    Operator(DMatrix::from_fn(d, d, |r, c| {
        if r == c {
            C64::new(m[(r, r)].re, 0.0)
        } else if r < c {
            (m[(r, c)] + m[(c, r)].conj()) * 0.5
        } else {
            (m[(c, r)] + m[(r, c)].conj()).conj() * 0.5
        }
    }))
}

/// Eigendecomposition `H = V diag(λ) V*` of a Hermitian operator, eigenvalues
/// sorted in descending order.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Operator,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Largest absolute eigenvalue (equals the operator norm).
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    /// `V diag(f(λ)) V*`, returned exactly Hermitian.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Operator {
        let v = &self.eigenvectors.0;
        let mut scaled = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            scaled.column_mut(j).scale_mut(w);
        }
        hermitian_part(&Operator(scaled * v.adjoint()))
    }

    pub fn reconstruct(&self) -> Operator {
        self.apply(|x| x)
    }

    /// Orthogonal projector onto the span of the first `count` eigenvectors.
    pub fn leading_projector(&self, count: usize) -> Operator {
        let v = self.eigenvectors.0.columns(0, count);
        hermitian_part(&Operator(v * v.adjoint()))
    }

    /// Groups the (descending) eigenvalues into levels: maximal runs whose
    /// neighbours differ by at most `LEVEL_TOL` times the spectral radius.
    /// Returns the exclusive end index of each level.
    pub fn level_ends(&self) -> Vec<usize> {
        let tol = LEVEL_TOL * self.spectral_radius().max(f64::MIN_POSITIVE);
        let mut ends = Vec::new();
        for i in 1..self.eigenvalues.len() {
            if self.eigenvalues[i - 1] - self.eigenvalues[i] > tol {
                ends.push(i);
            }
        }
        if !self.eigenvalues.is_empty() {
            ends.push(self.eigenvalues.len());
        }
        ends
    }
}

/// Spectral decomposition of a Hermitian operator.
pub fn eigh(h: &Operator) -> Result<SpectralDecomposition> {
    h.require_hermitian()?;
    let sym = hermitian_part(h);
    let eig = SymmetricEigen::new(sym.0);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let d = order.len();
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: Operator(vectors),
    })
}

/// `(H⁺, H⁻)` with `H = H⁺ - H⁻`, both PSD and `H⁺H⁻ = 0`.
pub fn positive_negative_parts(h: &Operator) -> Result<(Operator, Operator)> {
    let eig = eigh(h)?;
    Ok((eig.apply(|x| x.max(0.0)), eig.apply(|x| (-x).max(0.0))))
}

fn nonneg_side(eig: &SpectralDecomposition) -> impl Fn(f64) -> bool {
    let tol = ZERO_TOL * eig.spectral_radius();
    move |x| x >= -tol
}

/// Projector onto the eigenvectors with eigenvalue `>= 0`; eigenvalues within
/// `ZERO_TOL * |H|_inf` of zero count as positive.
pub fn spectral_projector_nonneg(h: &Operator) -> Result<Operator> {
    let eig = eigh(h)?;
    let keep = nonneg_side(&eig);
    Ok(eig.apply(|x| if keep(x) { 1.0 } else { 0.0 }))
}

/// Hermitian involution with the eigenvectors of `H`: `+1` on the
/// nonnegative side, `-1` elsewhere.
pub fn matrix_sign(h: &Operator) -> Result<Operator> {
    let eig = eigh(h)?;
    let keep = nonneg_side(&eig);
    Ok(eig.apply(|x| if keep(x) { 1.0 } else { -1.0 }))
}

fn require_psd(eig: &SpectralDecomposition) -> Result<()> {
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -PSD_REJECT * eig.spectral_radius() && min < -PSD_CLIP {
        Err(Error::NotPsd(min))
    } else {
        Ok(())
    }
}

/// `χ_{>=a}(S)`: projector onto the eigenspaces of the PSD operator `S` with
/// eigenvalue at least `a`. Round-off below the threshold (relative to
/// `|S|_inf`) is tolerated, so `a = 0` always yields the identity.
pub fn threshold_projector(s: &Operator, a: f64) -> Result<Operator> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "threshold must be a nonnegative real, got {a}"
        )));
    }
    let eig = eigh(s)?;
    require_psd(&eig)?;
    let slack = 1e-12 * eig.spectral_radius();
    Ok(eig.apply(|x| if x >= a - slack { 1.0 } else { 0.0 }))
}

/// The layer-cake sum `Σ_k (μ_k² - μ_{k+1}²) χ_{>=μ_k}(S)` over the distinct
/// eigenvalue levels `μ_1 > μ_2 > ...` of a PSD operator (`μ_{m+1} = 0`).
/// This is `∫_0^∞ χ_{>=√a}(S) da` written as a finite sum, and equals `S²`.
pub fn threshold_integral(s: &Operator) -> Result<Operator> {
    let eig = eigh(s)?;
    require_psd(&eig)?;
    let ends = eig.level_ends();
    let level_value = |end: usize| eig.eigenvalues[end - 1].max(0.0);
    let mut acc = Operator::zeros(s.dim());
    for (k, &end) in ends.iter().enumerate() {
        let upper = level_value(end);
        let lower = ends.get(k + 1).map(|&e| level_value(e)).unwrap_or(0.0);
        let weight = upper * upper - lower * lower;
        if weight != 0.0 {
            acc = acc + eig.leading_projector(end).scaled(weight);
        }
    }
    Ok(acc)
}

/// PSD square root. Small negative eigenvalues are clipped to zero; anything
/// below `-PSD_REJECT * |S|_inf` is an error.
pub fn psd_sqrt(s: &Operator) -> Result<Operator> {
    let eig = eigh(s)?;
    require_psd(&eig)?;
    Ok(eig.apply(|x| x.max(0.0).sqrt()))
}

/// Unitary factor `U` of the polar decomposition `A = U |A|`, taken as
/// `W V*` from the SVD `A = W Σ V*` (which also fixes a completion when `A`
/// is singular).
pub fn polar_unitary(a: &Operator) -> Result<Operator> {
    a.require_square_nonempty()?;
    let svd = a.0.clone().svd(true, true);
    let (w, v_t) = match (svd.u, svd.v_t) {
        (Some(w), Some(v_t)) => (w, v_t),
        _ => unreachable!("SVD was asked for both factors"),
    };
    Ok(Operator(w * v_t))
}

pub fn anti_commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.require_same_dim(b)?;
    Ok(Operator(&a.0 * &b.0 + &b.0 * &a.0))
}

pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.require_same_dim(b)?;
    Ok(Operator(&a.0 * &b.0 - &b.0 * &a.0))
}

/// `|A² - Id|_F + |A - A*|_F`: how far `A` is from being an observable.
pub fn observable_defect(a: &Operator) -> f64 {
    let sq = &a.0 * &a.0 - DMatrix::<C64>::identity(a.dim(), a.dim());
    sq.norm() + a.hermiticity_defect()
}

/// `|P² - P|_F + |P - P*|_F`.
pub fn projector_defect(p: &Operator) -> f64 {
    (&p.0 * &p.0 - &p.0).norm() + p.hermiticity_defect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_z() -> Operator {
        Operator::diag(&[1.0, -1.0])
    }

    fn pauli_y() -> Operator {
        Operator::from_row_major(2, vec![c(0., 0.), c(0., 1.), c(0., -1.), c(0., 0.)]).unwrap()
    }

    fn close(a: &Operator, b: &Operator, tol: f64) -> bool {
        frobenius(&(a - b)).unwrap() <= tol
    }

    #[test]
    fn nilpotent_norms() {
        let a = Operator::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!((schatten1(&a).unwrap() - 1.0).abs() < 1e-15);
        assert!((frobenius(&a).unwrap() - 1.0).abs() < 1e-15);
        let h = hermitian_part(&a);
        let expected = Operator::from_real_rows(&[&[0.0, 0.5], &[0.5, 0.0]]).unwrap();
        assert_eq!(h, expected);
    }

    #[test]
    fn ones_matrix_has_nuclear_norm_two() {
        let a = Operator::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert!((schatten1(&a).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn identity_norms() {
        let id = Operator::identity(4);
        assert!((frobenius(&id).unwrap() - 2.0).abs() < 1e-15);
        assert!((normalized_frobenius(&id).unwrap() - 1.0).abs() < 1e-15);
        assert!((operator_norm(&id).unwrap() - 1.0).abs() < 1e-14);
        assert!((operator_norm(&Operator::diag(&[1.0, -3.0, 2.0])).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn empty_operator_is_rejected() {
        let e = Operator::zeros(0);
        assert!(matches!(schatten1(&e), Err(Error::EmptyOperator)));
        assert!(matches!(frobenius(&e), Err(Error::EmptyOperator)));
        assert!(matches!(operator_norm(&e), Err(Error::EmptyOperator)));
    }

    #[test]
    fn construction_validates_entries() {
        assert!(matches!(
            Operator::from_row_major(2, vec![c(0., 0.); 3]),
            Err(Error::BadLength { got: 3, expected: 4 })
        ));
        assert!(matches!(
            Operator::from_row_major(1, vec![c(f64::NAN, 0.)]),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            Operator::from_matrix(DMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn hermitian_part_fixes_hermitian_input() {
        let y = pauli_y();
        assert_eq!(hermitian_part(&y), y);
    }

    #[test]
    fn positive_negative_parts_of_diag() {
        let (p, n) = positive_negative_parts(&Operator::diag(&[2.0, -3.0])).unwrap();
        assert!(close(&p, &Operator::diag(&[2.0, 0.0]), 1e-14));
        assert!(close(&n, &Operator::diag(&[0.0, 3.0]), 1e-14));
        let psd = Operator::diag(&[1.0, 0.5]);
        let (p, n) = positive_negative_parts(&psd).unwrap();
        assert!(close(&p, &psd, 1e-14));
        assert!(frobenius(&n).unwrap() < 1e-14);
        let bad = Operator::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(positive_negative_parts(&bad), Err(Error::HermitianRequired)));
    }

    #[test]
    fn nonneg_projector_conventions() {
        let p = spectral_projector_nonneg(&Operator::diag(&[1.0, -1.0])).unwrap();
        assert!(close(&p, &Operator::diag(&[1.0, 0.0]), 1e-14));
        let p = spectral_projector_nonneg(&Operator::zeros(3)).unwrap();
        assert!(close(&p, &Operator::identity(3), 1e-14));
    }

    #[test]
    fn threshold_projector_examples() {
        let s = Operator::diag(&[0.8, 0.6]);
        assert!(close(&threshold_projector(&s, 0.7).unwrap(), &Operator::diag(&[1.0, 0.0]), 1e-14));
        assert!(close(&threshold_projector(&s, 0.0).unwrap(), &Operator::identity(2), 1e-14));
        assert!(matches!(threshold_projector(&s, -0.1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn psd_sqrt_examples() {
        let r = psd_sqrt(&Operator::diag(&[4.0, 9.0])).unwrap();
        assert!(close(&r, &Operator::diag(&[2.0, 3.0]), 1e-14));
        assert!(close(&psd_sqrt(&Operator::identity(3)).unwrap(), &Operator::identity(3), 1e-14));
        let clipped = psd_sqrt(&Operator::diag(&[1.0, -1e-11])).unwrap();
        assert!(close(&clipped, &Operator::diag(&[1.0, 0.0]), 1e-14));
        assert!(matches!(psd_sqrt(&Operator::diag(&[1.0, -0.1])), Err(Error::NotPsd(_))));
    }

    #[test]
    fn polar_examples() {
        let u = polar_unitary(&Operator::diag(&[-1.0, 2.0])).unwrap();
        assert!(close(&u, &Operator::diag(&[-1.0, 1.0]), 1e-14));
        let y = pauli_y();
        assert!(close(&polar_unitary(&y).unwrap(), &y, 1e-14));
        // Singular input: any unitary completion with A = U|A| is acceptable.
        let a = Operator::diag(&[0.0, 2.0]);
        let u = polar_unitary(&a).unwrap();
        assert!(close(&(&u.adjoint() * &u), &Operator::identity(2), 1e-14));
        let abs = psd_sqrt(&(&a.adjoint() * &a)).unwrap();
        assert!(close(&(&u * &abs), &a, 1e-14));
    }

    #[test]
    fn sign_examples() {
        let s = matrix_sign(&Operator::diag(&[0.5, -0.3, 0.0])).unwrap();
        assert!(close(&s, &Operator::diag(&[1.0, -1.0, 1.0]), 1e-14));
        let z = pauli_z();
        assert!(close(&matrix_sign(&z).unwrap(), &z, 1e-14));
        let y = pauli_y();
        assert!(close(&matrix_sign(&y).unwrap(), &y, 1e-14));
    }

    #[test]
    fn pauli_anticommutators() {
        let (z, y) = (pauli_z(), pauli_y());
        assert!(frobenius(&anti_commutator(&z, &y).unwrap()).unwrap() == 0.0);
        assert!(close(&anti_commutator(&z, &z).unwrap(), &Operator::identity(2).scaled(2.0), 0.0));
        assert!(frobenius(&commutator(&y, &y).unwrap()).unwrap() == 0.0);
        assert!(matches!(
            anti_commutator(&z, &Operator::identity(3)),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn z_minus_y_projector() {
        // Z - Y has eigenvalues ±√2; P (Z - Y) P must have √2 as its only
        // nonzero eigenvalue.
        let h = &pauli_z() - &pauli_y();
        let p = spectral_projector_nonneg(&h).unwrap();
        assert!(projector_defect(&p) < 1e-14);
        let eig = eigh(&(&(&p * &h) * &p)).unwrap();
        assert!((eig.eigenvalues[0] - 2f64.sqrt()).abs() < 1e-14);
        assert!(eig.eigenvalues[1].abs() < 1e-14);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let y = pauli_y();
        let text = serde_json::to_string(&y).unwrap();
        assert_eq!(text, r#"{"dim":2,"data":[[0.0,0.0],[0.0,1.0],[0.0,-1.0],[0.0,0.0]]}"#);
        let back: Operator = serde_json::from_str(&text).unwrap();
        assert_eq!(back, y);
        assert!(serde_json::from_str::<Operator>(r#"{"dim":2,"data":[[1,0]]}"#).is_err());
    }
}
