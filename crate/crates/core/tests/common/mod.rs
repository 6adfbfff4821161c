//! Independent oracles and helpers shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use schatten_rigidity::linalg::{frobenius, Operator};

pub type C64 = Complex64;

/// Singular values by one-sided Jacobi rotations on the columns, written
/// without any library decomposition. Sorted descending.
pub fn jacobi_singular_values(a: &Operator) -> Vec<f64> {
    let d = a.dim();
    let mut cols: Vec<Vec<C64>> = (0..d).map(|j| (0..d).map(|i| a.get(i, j)).collect()).collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..d {
            for q in p + 1..d {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                if gamma.norm() <= 1e-15 * (alpha * beta).sqrt() || gamma.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                // Rotate the phase of column q so the inner product is real.
                let g = gamma / gamma.norm();
                for z in cols[q].iter_mut() {
                    *z *= g.conj();
                }
                let zeta = (beta - alpha) / (2.0 * gamma.norm());
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..d {
                    let (x, y) = (cols[p][k], cols[q][k]);
                    cols[p][k] = x * c - y * s;
                    cols[q][k] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Reduces a word in the generators `J = 0`, `x_i = i` by the defining
/// relations alone: adjacent `x_i x_i` cancel, an out-of-order adjacent pair
/// swaps at the cost of one `J`, and every `J` is pulled to the front.
pub fn rewrite_word(word: &[usize]) -> (bool, Vec<usize>) {
    let mut sign = false;
    let mut w: Vec<usize> = Vec::new();
    for &g in word {
        if g == 0 {
            sign = !sign;
        } else {
            w.push(g);
        }
    }
    loop {
        let mut changed = false;
        let mut k = 0;
        while k + 1 < w.len() {
            if w[k] == w[k + 1] {
                w.drain(k..k + 2);
                changed = true;
            } else if w[k] > w[k + 1] {
                w.swap(k, k + 1);
                sign = !sign;
                changed = true;
                k += 1;
            } else {
                k += 1;
            }
        }
        if !changed {
            return (sign, w);
        }
    }
}

pub fn dist_f(a: &Operator, b: &Operator) -> f64 {
    frobenius(&(a - b)).unwrap()
}

/// `Tr(A* A)` computed entrywise.
pub fn trace_gram(a: &Operator) -> f64 {
    let d = a.dim();
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..d {
            sum += (a.get(j, i).conj() * a.get(j, i)).re;
        }
    }
    sum
}
