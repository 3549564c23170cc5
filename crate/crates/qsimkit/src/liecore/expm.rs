//! Matrix exponential by scaling and squaring with diagonal Padé approximants.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{invalid, QsimError, Result};

pub const DEFAULT_PADE_ORDER: usize = 6;
const MAX_PADE_ORDER: usize = 13;

/// Result of [`expm`] with the parameters that were used.
#[derive(Clone, Debug)]
pub struct Expm {
    pub matrix: DMatrix<C64>,
    pub order: usize,
    pub squarings: u32,
    /// Bound on `|E| / |A|` where the result equals `exp(A + E)`.
    pub backward_bound: f64,
}

/// Induced 1-norm (maximum column sum).
pub fn norm1(a: &DMatrix<C64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `8 x^{2q} (q!)^2 / ((2q)! (2q+1)!)` with `x = |A| / 2^s`.
pub fn pade_backward_bound(scaled_norm: f64, q: usize) -> f64 {
    8.0 * scaled_norm.powi(2 * q as i32) * factorial(q).powi(2) / (factorial(2 * q) * factorial(2 * q + 1))
}

/// `exp(A)`. The scaling `s` is the smallest with `|A|_1 / 2^s <= 1/2`; the
/// order starts at 6 and grows only if the backward bound exceeds `tol`.
pub fn expm(a: &DMatrix<C64>, tol: f64) -> Result<Expm> {
    if !a.is_square() {
        return invalid("expm needs a square matrix");
    }
    if a.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return invalid("expm input has non-finite entries");
    }
    let n = a.nrows();
    let nrm = norm1(a);
    let mut s: u32 = 0;
    if nrm > 0.5 {
        s = (nrm / 0.5).log2().ceil().max(0.0) as u32;
        while nrm / 2f64.powi(s as i32) > 0.5 {
            s += 1;
        }
    }
    let scaled = nrm / 2f64.powi(s as i32);
    let mut q = DEFAULT_PADE_ORDER;
    while pade_backward_bound(scaled, q) > tol && q < MAX_PADE_ORDER {
        q += 1;
    }
    let x = a / C64::new(2f64.powi(s as i32), 0.0);
    // c_j = (2q-j)! q! / ((2q)! j! (q-j)!)
    let mut c = vec![1.0; q + 1];
    for j in 1..=q {
        c[j] = c[j - 1] * (q + 1 - j) as f64 / (j * (2 * q + 1 - j)) as f64;
    }
    let id = DMatrix::<C64>::identity(n, n);
    let mut num = id.clone() * C64::new(c[0], 0.0);
    let mut den = num.clone();
    let mut pw = id;
    for (j, cj) in c.iter().enumerate().skip(1) {
        pw = &pw * &x;
        let term = &pw * C64::new(*cj, 0.0);
        num += &term;
        if j % 2 == 0 {
            den += &term;
        } else {
            den -= &term;
        }
    }
    let lu = den.lu();
    let mut r = lu
        .solve(&num)
        .ok_or_else(|| QsimError::Algebra("singular Padé denominator".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(QsimError::Algebra("overflow in expm".into()));
    }
    Ok(Expm {
        matrix: r,
        order: q,
        squarings: s,
        backward_bound: pade_backward_bound(scaled, q),
    })
}
