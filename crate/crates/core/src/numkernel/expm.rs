//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (degrees 3, 5, 7, 9, 13 with the standard backward-error thresholds).

use super::{c64, check_finite, check_square, identity, CMat};
use crate::error::Result;

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const PADE13: [f64; 14] = [
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

const THETA: [(f64, &[f64]); 4] = [
    (1.495585217958292e-2, &PADE3),
    (2.539398330063230e-1, &PADE5),
    (9.504178996162932e-1, &PADE7),
    (2.097847961257068e0, &PADE9),
];
const THETA_13: f64 = 5.371920351148152;

fn norm1(a: &CMat) -> f64 {
    a.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn scaled(a: &CMat, s: f64) -> CMat {
    a * c64(s, 0.0)
}

/// Padé numerator/denominator pieces for odd degree `m <= 9`:
/// returns `(U, V)` with `r = (V - U)^{-1} (V + U)`.
fn pade_low(a: &CMat, b: &[f64]) -> (CMat, CMat) {
    let n = a.nrows();
    let a2 = a * a;
    let mut pow = identity(n);
    let mut u_inner = scaled(&pow, b[1]);
    let mut v = scaled(&pow, b[0]);
    for k in 1..b.len() / 2 {
        pow = &pow * &a2;
        u_inner += scaled(&pow, b[2 * k + 1]);
        v += scaled(&pow, b[2 * k]);
    }
    (a * u_inner, v)
}

fn pade13(a: &CMat) -> (CMat, CMat) {
    let b = &PADE13;
    let n = a.nrows();
    let id = identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    let u = a * (&a6 * u_hi + scaled(&a6, b[7]) + scaled(&a4, b[5]) + scaled(&a2, b[3]) + scaled(&id, b[1]));
    let v_hi = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    let v = &a6 * v_hi + scaled(&a6, b[6]) + scaled(&a4, b[4]) + scaled(&a2, b[2]) + scaled(&id, b[0]);
    (u, v)
}

fn pade_solve(u: CMat, v: CMat) -> CMat {
    let p = &v + &u;
    let q = v - u;
    q.lu().solve(&p).expect("Padé denominator is nonsingular below theta_13")
}

pub fn matrix_exp(a: &CMat) -> Result<CMat> {
    check_square(a, "matrix_exp")?;
    check_finite(a, "matrix_exp argument")?;
    let n = a.nrows();
    if n == 0 {
        return Ok(a.clone());
    }
    let nrm = norm1(a);
    for (theta, coeffs) in THETA {
        if nrm <= theta {
            let (u, v) = pade_low(a, coeffs);
            return Ok(pade_solve(u, v));
        }
    }
    let s = (nrm / THETA_13).log2().ceil().max(0.0) as i32;
    let a_s = scaled(a, 0.5f64.powi(s));
    let (u, v) = pade13(&a_s);
    let mut r = pade_solve(u, v);
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}
