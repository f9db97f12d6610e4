//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants, and its directional derivative.
//!
//! The degree is the smallest of 3, 5, 7, 9, 13 whose backward-error bound
//! covers the 1-norm of the input; beyond the degree-13 threshold the input
//! is halved `s` times and the result squared back. The derivative uses the
//! block identity
//!
//! ```text
//! exp([[A, E], [0, A]] t) = [[exp(At), D], [0, exp(At)]],
//! D = ∫₀ᵗ exp(A(t−τ)) E exp(Aτ) dτ
//! ```

use ndarray::Array2;

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

// Backward-error thresholds θ_m for degrees 3, 5, 7, 9, 13 in double precision.
const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

type Mat = Array2<C64>;

fn eye(n: usize) -> Mat {
    Array2::eye(n)
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `Σ_k c_k P_k` over matching coefficient/matrix pairs.
fn combine(terms: &[(f64, &Mat)]) -> Mat {
    let mut out = terms[0].1 * real(terms[0].0);
    for &(c, m) in &terms[1..] {
        out.scaled_add(real(c), m);
    }
    out
}

/// Numerator/denominator halves `(U, V)` for the low-degree approximants
/// given the even powers `[I, A², A⁴, ...]`.
fn pade_low(a: &Mat, powers: &[Mat], coeffs: &[f64]) -> (Mat, Mat) {
    let odd: Vec<(f64, &Mat)> = powers.iter().enumerate().map(|(k, p)| (coeffs[2 * k + 1], p)).collect();
    let even: Vec<(f64, &Mat)> = powers.iter().enumerate().map(|(k, p)| (coeffs[2 * k], p)).collect();
    (a.dot(&combine(&odd)), combine(&even))
}

fn pade_13(a: &Mat) -> (Mat, Mat) {
    let b = &PADE_13;
    let n = a.nrows();
    let ident = eye(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let inner_u = a6.dot(&combine(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)]));
    let u = a.dot(&(&inner_u + &combine(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &ident)])));
    let inner_v = a6.dot(&combine(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)]));
    let v = &inner_v + &combine(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &ident)]);
    (u, v)
}

/// Solves `lhs · X = rhs` by LU with partial pivoting.
fn solve(mut lhs: Mat, mut rhs: Mat) -> Mat {
    let n = lhs.nrows();
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&x, &y| lhs[[x, k]].norm().total_cmp(&lhs[[y, k]].norm()))
            .unwrap_or(k);
        if pivot != k {
            for j in 0..n {
                lhs.swap([k, j], [pivot, j]);
            }
            for j in 0..rhs.ncols() {
                rhs.swap([k, j], [pivot, j]);
            }
        }
        let d = lhs[[k, k]];
        if d == ZERO {
            continue;
        }
        for i in k + 1..n {
            let f = lhs[[i, k]] / d;
            if f == ZERO {
                continue;
            }
            lhs[[i, k]] = f;
            for j in k + 1..n {
                let t = lhs[[k, j]];
                lhs[[i, j]] -= f * t;
            }
            for j in 0..rhs.ncols() {
                let t = rhs[[k, j]];
                rhs[[i, j]] -= f * t;
            }
        }
    }
    for k in (0..n).rev() {
        let d = lhs[[k, k]];
        for j in 0..rhs.ncols() {
            let mut acc = rhs[[k, j]];
            for i in k + 1..n {
                acc -= lhs[[k, i]] * rhs[[i, j]];
            }
            rhs[[k, j]] = acc / d;
        }
    }
    rhs
}

/// Matrix exponential of a square matrix.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("expm needs a square matrix, got {:?}", a.shape())));
    }
    let n = a.rows();
    let m = a.as_array();
    let norm = a.norm_one();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }

    for &(degree, theta) in &THETA[..4] {
        if norm <= theta {
            let coeffs: &[f64] = match degree {
                3 => &PADE_3,
                5 => &PADE_5,
                7 => &PADE_7,
                _ => &PADE_9,
            };
            let a2 = m.dot(m);
            let mut powers = vec![eye(n), a2.clone()];
            while powers.len() < (degree + 1) / 2 {
                let next = powers.last().unwrap().dot(&a2);
                powers.push(next);
            }
            let (u, v) = pade_low(m, &powers, coeffs);
            return Ok(ComplexMatrix::from_array_unchecked(solve(&v - &u, &v + &u)));
        }
    }

    let theta13 = THETA[4].1;
    let s = (norm / theta13).log2().ceil().max(0.0) as i32;
    let scaled = m * real(0.5f64.powi(s));
    let (u, v) = pade_13(&scaled);
    let mut r = solve(&v - &u, &v + &u);
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(ComplexMatrix::from_array_unchecked(r))
}

/// Returns `(exp(a·t), D)` with `D = ∫₀ᵗ exp(a(t−τ)) e exp(aτ) dτ`, the
/// directional derivative of `exp(a·t)` along `e`.
pub fn expm_frechet(a: &ComplexMatrix, e: &ComplexMatrix, t: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !a.is_square() || a.shape() != e.shape() {
        return Err(Error::Dimension(format!(
            "expm_frechet needs equal square matrices, got {:?} and {:?}",
            a.shape(),
            e.shape()
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("evolution time must be finite and >= 0, got {t}")));
    }
    let n = a.rows();
    let at = a.scale_real(t);
    let mut block = ComplexMatrix::zeros(2 * n, 2 * n);
    block.set_block(0, 0, &at);
    block.set_block(n, n, &at);
    block.set_block(0, n, &e.scale_real(t));
    let big = expm(&block)?;
    Ok((big.block(0, 0, n, n), big.block(0, n, n, n)))
}
