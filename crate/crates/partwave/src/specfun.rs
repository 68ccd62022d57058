//! Special functions underlying the partial-wave machinery: modified
//! spherical Bessel functions of the first kind with complex argument,
//! Legendre polynomials of complex argument, orthonormal spherical harmonics
//! (Condon-Shortley phase), and solid harmonics of complex vectors.
//!
//! The modified spherical Bessel function of the first kind is
//!
//! ```text
//! W_l(z) = sqrt(pi / 2z) I_{l+1/2}(z)
//!        = z^l / (2l+1)!! [ 1 + (z^2/2)/(1!(2l+3)) + (z^2/2)^2/(2!(2l+3)(2l+5)) + ... ]
//! ```
//!
//! ("Handbook of Mathematical Functions" 10.2.2 / 10.2.5). It is regular at
//! the origin and satisfies `z^2 W'' + 2z W' - [l(l+1) + z^2] W = 0`.
//!
//! Two evaluation routes are used. Near the origin, or whenever the argument
//! is close enough to the real axis that the all-positive-coefficient power
//! series suffers no harmful cancellation, the series is summed directly with
//! a term-ratio stopping criterion. Everywhere else a Miller downward
//! recurrence is run and normalized with the plane-wave sum
//! `sum_l (2l+1) W_l(z) = e^z`, whose condition number grows only linearly in
//! `|z|`. Both routes carry an external `log_scale` so that the product with
//! the Gaussian prefactors of the wave functions never overflows.

use num_complex::Complex64;

use crate::{Error, Result};

/// Hard cap on the degree `l` accepted by the Bessel evaluators.
pub const DEGREE_CAP: u32 = 256;

/// Guard on `|z|` for the Bessel evaluators; larger arguments are rejected.
pub const ARG_GUARD: f64 = 2000.0;

/// Term-ratio stopping criterion for the power series.
const SERIES_REL_TOL: f64 = 1e-18;

/// Hard cap on the number of series terms. The series needs roughly
/// `|z|/2 + O(sqrt(|z|))` terms, so 1500 covers the full `|z| <= 2000` domain.
const SERIES_MAX_TERMS: usize = 1500;

/// The series is only summed where its cancellation, bounded by
/// `e^{|z| - Re z}`, costs at most a few digits.
const SERIES_DOMAIN_RADIUS: f64 = 5.0;

/// Magnitude at which running recurrences are renormalized.
const RESCALE_THRESHOLD: f64 = 1e250;
const LN_RESCALE: f64 = 575.6462732485114; // ln(1e250)

const LN_F64_MAX: f64 = 709.782712893384;

/// A 3-vector with complex Cartesian components.
///
/// Holds quantities like `R_t = r_t + i p_t`; the dot product is bilinear
/// (no conjugation), matching the analytic continuation used throughout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexVector3 {
    pub x: Complex64,
    pub y: Complex64,
    pub z: Complex64,
}

impl ComplexVector3 {
    pub fn new(x: Complex64, y: Complex64, z: Complex64) -> Self {
        Self { x, y, z }
    }

    pub fn from_real(v: [f64; 3]) -> Self {
        Self {
            x: Complex64::new(v[0], 0.0),
            y: Complex64::new(v[1], 0.0),
            z: Complex64::new(v[2], 0.0),
        }
    }

    pub fn from_re_im(re: [f64; 3], im: [f64; 3]) -> Self {
        Self {
            x: Complex64::new(re[0], im[0]),
            y: Complex64::new(re[1], im[1]),
            z: Complex64::new(re[2], im[2]),
        }
    }

    /// Bilinear dot product `v.w` (no conjugation).
    pub fn dot(&self, other: &Self) -> Complex64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Bilinear dot with a real vector.
    pub fn dot_real(&self, r: [f64; 3]) -> Complex64 {
        self.x * r[0] + self.y * r[1] + self.z * r[2]
    }

    pub fn scale(&self, f: Complex64) -> Self {
        Self {
            x: self.x * f,
            y: self.y * f,
            z: self.z * f,
        }
    }

    pub fn re(&self) -> [f64; 3] {
        [self.x.re, self.y.re, self.z.re]
    }

    pub fn im(&self) -> [f64; 3] {
        [self.x.im, self.y.im, self.z.im]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

fn check_domain(l: u32, z: Complex64) -> Result<()> {
    if l > DEGREE_CAP {
        return Err(Error::DegreeTooLarge { l, cap: DEGREE_CAP });
    }
    let modulus = z.norm();
    if !modulus.is_finite() || modulus > ARG_GUARD {
        return Err(Error::ArgumentTooLarge {
            modulus,
            guard: ARG_GUARD,
        });
    }
    Ok(())
}

/// W_l(z), the modified spherical Bessel function of the first kind.
///
/// Errors if `l` exceeds [`DEGREE_CAP`], `|z|` exceeds [`ARG_GUARD`], or the
/// result is not representable in f64 (use [`mod_sph_bessel_scaled`] then).
pub fn mod_sph_bessel_first(l: u32, z: Complex64) -> Result<Complex64> {
    mod_sph_bessel_scaled(l, z, 0.0)
}

/// `W_l(z) * exp(-log_scale)`.
///
/// `mod_sph_bessel_scaled(l, z, s) * e^s == mod_sph_bessel_first(l, z)`
/// wherever the right-hand side is representable. Callers evaluating
/// Gaussian-weighted products pass the Gaussian exponent as `log_scale` so no
/// intermediate overflows.
pub fn mod_sph_bessel_scaled(l: u32, z: Complex64, log_scale: f64) -> Result<Complex64> {
    Ok(mod_sph_bessel_scaled_seq(l, z, log_scale)?[l as usize])
}

/// `W_l(z) * exp(-log_scale)` for every `l = 0..=lmax` in one pass.
pub fn mod_sph_bessel_scaled_seq(
    lmax: u32,
    z: Complex64,
    log_scale: f64,
) -> Result<Vec<Complex64>> {
    check_domain(lmax, z)?;
    if z.norm() == 0.0 {
        let mut out = vec![Complex64::new(0.0, 0.0); lmax as usize + 1];
        if -log_scale > LN_F64_MAX {
            return Err(Error::Overflow {
                log_magnitude: -log_scale,
            });
        }
        out[0] = Complex64::new((-log_scale).exp(), 0.0);
        return Ok(out);
    }

    // Parity reduction to Re z >= 0: W_l(-z) = (-1)^l W_l(z).
    let flip = z.re < 0.0;
    let zr = if flip { -z } else { z };

    let mut out = if zr.norm() <= SERIES_DOMAIN_RADIUS {
        (0..=lmax)
            .map(|l| series_scaled(l, zr, log_scale))
            .collect::<Result<Vec<_>>>()?
    } else {
        miller_scaled_seq(lmax, zr, log_scale)?
    };

    if flip {
        for (l, w) in out.iter_mut().enumerate() {
            if l % 2 == 1 {
                *w = -*w;
            }
        }
    }
    for w in &out {
        if !w.is_finite() {
            return Err(Error::Overflow {
                log_magnitude: f64::INFINITY,
            });
        }
    }
    Ok(out)
}

/// ln (2l+1)!!
fn ln_double_factorial_odd(l: u32) -> f64 {
    let mut acc = 0.0;
    let mut k = 3u64;
    while k <= 2 * l as u64 + 1 {
        acc += (k as f64).ln();
        k += 2;
    }
    acc
}

/// Power series of W_l, with the external scale folded into the leading term.
///
/// Only called for `|z| <= SERIES_DOMAIN_RADIUS` plus the tiny-argument path,
/// where at most a few digits cancel.
fn series_scaled(l: u32, z: Complex64, log_scale: f64) -> Result<Complex64> {
    let ln_lead = l as f64 * z.norm().ln() - ln_double_factorial_odd(l) - log_scale;
    // The bracket series is bounded by e^{|z|}.
    if ln_lead + z.norm() > LN_F64_MAX {
        return Err(Error::Overflow {
            log_magnitude: ln_lead + z.norm(),
        });
    }
    let lead = Complex64::from_polar(ln_lead.exp(), l as f64 * z.arg());
    let half_z2 = 0.5 * z * z;
    let mut term = lead;
    let mut sum = term;
    for k in 0..SERIES_MAX_TERMS {
        term *= half_z2 / ((k as f64 + 1.0) * (2 * l as u64 + 2 * k as u64 + 3) as f64);
        sum += term;
        if term.norm() < SERIES_REL_TOL * sum.norm() {
            break;
        }
    }
    Ok(sum)
}

/// Miller downward recurrence for `W_l(z) e^{-s}`, `l = 0..=lmax`.
///
/// Requires `Re z >= 0` and `z != 0`. Starts well above both `lmax` and the
/// turning point `l ~ |z|`, recurs down with periodic renormalization, and
/// fixes the overall scale with `sum_l (2l+1) W_l(z) = e^z`.
fn miller_scaled_seq(lmax: u32, z: Complex64, log_scale: f64) -> Result<Vec<Complex64>> {
    let zmod = z.norm();
    // Buffer above the turning point: the minimal/dominant separation grows
    // slowly through the Airy zone of width ~ |z|^(1/3).
    let buffer = 64 + (10.0 * zmod.max(1.0).cbrt()).ceil() as usize;
    let start = (lmax as usize).max(zmod.ceil() as usize) + buffer;

    let inv_z = 1.0 / z;
    let mut upper = Complex64::new(0.0, 0.0); // surrogate for W_{start+1}
    let mut cur = Complex64::new(1e-280, 0.0); // surrogate for W_{start}
    let mut norm_sum = Complex64::new(0.0, 0.0);
    let mut out = vec![Complex64::new(0.0, 0.0); lmax as usize + 1];

    let mut l = start as i64;
    while l >= 0 {
        norm_sum += (2 * l + 1) as f64 * cur;
        if l <= lmax as i64 {
            out[l as usize] = cur;
        }
        if l > 0 {
            // W_{l-1} = W_{l+1} + (2l+1)/z W_l
            let next = upper + (2 * l + 1) as f64 * inv_z * cur;
            upper = cur;
            cur = next;
            if cur.norm() > RESCALE_THRESHOLD {
                let f = (-LN_RESCALE).exp();
                upper *= f;
                cur *= f;
                norm_sum *= f;
                for w in out.iter_mut() {
                    *w *= f;
                }
            }
        }
        l -= 1;
    }

    // out[l] / norm_sum = W_l(z) / e^z; attach e^{z - s}. The running
    // magnitudes can sit far outside [1e-154, 1e154] where complex division
    // under/overflows its |denominator|^2, so divide through the real
    // magnitude first.
    let mag = norm_sum.norm();
    let norm_unit = norm_sum / mag;
    let ln_exp = z.re - log_scale;
    let max_ratio = out
        .iter()
        .map(|w| (*w / mag / norm_unit).norm())
        .fold(0.0_f64, f64::max);
    if ln_exp + max_ratio.ln() > LN_F64_MAX {
        return Err(Error::Overflow {
            log_magnitude: ln_exp + max_ratio.ln(),
        });
    }
    if ln_exp.abs() <= 680.0 {
        let exp_part = Complex64::from_polar(ln_exp.exp(), z.im);
        for w in out.iter_mut() {
            *w = *w / mag / norm_unit * exp_part;
        }
    } else {
        // e^{ln_exp} itself is not representable: assemble per element in
        // log space.
        for w in out.iter_mut() {
            let ratio = *w / mag / norm_unit;
            let ln_val = ratio.norm().ln() + ln_exp;
            *w = if ln_val < -745.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(ln_val.exp(), ratio.arg() + z.im)
            };
        }
    }
    Ok(out)
}

/// Legendre polynomial P_l(x) for complex x, by the three-term upward
/// recurrence `(n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}`.
pub fn legendre_p(l: u32, x: Complex64) -> Complex64 {
    match l {
        0 => Complex64::new(1.0, 0.0),
        1 => x,
        _ => {
            let mut pm1 = Complex64::new(1.0, 0.0);
            let mut p = x;
            for n in 1..l {
                let nf = n as f64;
                let next = ((2.0 * nf + 1.0) * x * p - nf * pm1) / (nf + 1.0);
                pm1 = p;
                p = next;
            }
            p
        }
    }
}

/// Packed index for tables over `(l, m)`, `0 <= l <= lmax`, `|m| <= l`.
#[inline]
pub fn lm_index(l: u32, m: i32) -> usize {
    (l as usize) * (l as usize) + (l as i64 + m as i64) as usize
}

/// Orthonormal spherical harmonic `Y_l^m(theta, phi)` with the
/// Condon-Shortley phase, so that `Y_l^0(pi, 0) = (-1)^l sqrt((2l+1)/4pi)`
/// and `Y_1^1 = -sqrt(3/8pi) sin(theta) e^{i phi}`.
pub fn sph_harm(l: u32, m: i32, theta: f64, phi: f64) -> Result<Complex64> {
    if m.unsigned_abs() > l {
        return Err(Error::OrderOutOfRange { l, m });
    }
    let table = sph_harm_table(l, theta, phi);
    Ok(table[lm_index(l, m)])
}

/// All `Y_l^m(theta, phi)` for `l <= lmax`, packed with [`lm_index`].
pub fn sph_harm_table(lmax: u32, theta: f64, phi: f64) -> Vec<Complex64> {
    let bands = normalized_assoc_legendre(lmax, theta.cos(), theta.sin(), None);
    assemble_harmonics(lmax, &bands, phi, None)
}

/// All `Y_l^m` for `l <= lmax` but only for the orders `|m|` listed in
/// `orders` (plus nothing else); entries of other orders are left zero.
/// Used by hot loops over sparse coefficient tables.
pub fn sph_harm_table_for_orders(
    lmax: u32,
    cos_theta: f64,
    sin_theta: f64,
    phi: f64,
    orders: &[u32],
) -> Vec<Complex64> {
    let bands = normalized_assoc_legendre(lmax, cos_theta, sin_theta, Some(orders));
    assemble_harmonics(lmax, &bands, phi, Some(orders))
}

/// Fully normalized associated Legendre values
/// `Ybar_l^m = sqrt((2l+1)/4pi (l-m)!/(l+m)!) P_l^m(cos theta)` including the
/// Condon-Shortley phase, for `0 <= m <= l <= lmax`. Stored at `lm_index(l, m)`
/// (non-negative m only); when `orders` is given, other m-bands stay zero.
fn normalized_assoc_legendre(
    lmax: u32,
    cos_theta: f64,
    sin_theta: f64,
    orders: Option<&[u32]>,
) -> Vec<f64> {
    let n = (lmax as usize + 1) * (lmax as usize + 1);
    let mut out = vec![0.0; n];
    let wanted = |m: u32| -> bool {
        match orders {
            None => true,
            Some(list) => list.contains(&m),
        }
    };
    // Diagonal chain Ybar_m^m, built unconditionally (cheap, O(lmax)).
    let mut diag = vec![0.0; lmax as usize + 1];
    let mut d = (0.25 / std::f64::consts::PI).sqrt();
    diag[0] = d;
    for m in 1..=lmax {
        let mf = m as f64;
        d *= -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_theta;
        diag[m as usize] = d;
    }
    for m in 0..=lmax {
        if !wanted(m) {
            continue;
        }
        let mf = m as f64;
        let mut prev2 = diag[m as usize];
        out[lm_index(m, m as i32)] = prev2;
        if m == lmax {
            continue;
        }
        let mut prev1 = (2.0 * mf + 3.0).sqrt() * cos_theta * prev2;
        out[lm_index(m + 1, m as i32)] = prev1;
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = -(((2.0 * lf + 1.0) * (lf - 1.0 + mf) * (lf - 1.0 - mf))
                / ((2.0 * lf - 3.0) * (lf * lf - mf * mf)))
                .sqrt();
            let cur = a * cos_theta * prev1 + b * prev2;
            out[lm_index(l, m as i32)] = cur;
            prev2 = prev1;
            prev1 = cur;
        }
    }
    out
}

fn assemble_harmonics(
    lmax: u32,
    bands: &[f64],
    phi: f64,
    orders: Option<&[u32]>,
) -> Vec<Complex64> {
    let n = (lmax as usize + 1) * (lmax as usize + 1);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let wanted = |m: u32| -> bool {
        match orders {
            None => true,
            Some(list) => list.contains(&m),
        }
    };
    for m in 0..=lmax {
        if !wanted(m) {
            continue;
        }
        let e = Complex64::from_polar(1.0, m as f64 * phi);
        let neg_sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        for l in m..=lmax {
            let ybar = bands[lm_index(l, m as i32)];
            out[lm_index(l, m as i32)] = ybar * e;
            if m > 0 {
                // Y_l^{-m} = (-1)^m conj(Y_l^m) for real angles.
                out[lm_index(l, -(m as i32))] = neg_sign * ybar * e.conj();
            }
        }
    }
    out
}

/// Solid harmonic `S_l^m(v) = r^l Y_l^m` continued to complex Cartesian
/// components: a harmonic polynomial in `(x, y, z)`.
///
/// For a real unit vector it equals [`sph_harm`]; for any `v` with
/// `s = sqrt(v.v) != 0`, `solid_harm(l, m, v) / s^l` is `Y_l^m` at the
/// complex direction of `v`, without ever forming complex polar angles.
pub fn solid_harm(l: u32, m: i32, v: &ComplexVector3) -> Result<Complex64> {
    if m.unsigned_abs() > l {
        return Err(Error::OrderOutOfRange { l, m });
    }
    // S_l^m = sqrt((2l+1)/4pi) sqrt((l+m)!(l-m)!) *
    //         sum_q u^(q+m) w^q z^s / ((q+m)! q! s!),  s = l - m - 2q,
    // with u = -(x+iy)/2, w = (x-iy)/2.
    let u = -(v.x + Complex64::i() * v.y) * 0.5;
    let w = (v.x - Complex64::i() * v.y) * 0.5;
    let lf = l as i64;
    let mf = m as i64;

    let mut ln_fact = vec![0.0f64; (2 * l + 2) as usize];
    for k in 1..ln_fact.len() {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let ln_norm = 0.5
        * (((2 * l + 1) as f64 / (4.0 * std::f64::consts::PI)).ln()
            + ln_fact[(lf + mf) as usize]
            + ln_fact[(lf - mf) as usize]);

    let q_min = 0.max(-mf);
    let q_max = (lf - mf).div_euclid(2);
    let mut sum = Complex64::new(0.0, 0.0);
    for q in q_min..=q_max {
        let p = q + mf;
        let s = lf - mf - 2 * q;
        let mut ln_mag = ln_norm - ln_fact[p as usize] - ln_fact[q as usize] - ln_fact[s as usize];
        let mut phase = 0.0;
        let mut zero = false;
        for (base, exp) in [(u, p), (w, q), (v.z, s)] {
            if exp == 0 {
                continue;
            }
            let r = base.norm();
            if r == 0.0 {
                zero = true;
                break;
            }
            ln_mag += exp as f64 * r.ln();
            phase += exp as f64 * base.arg();
        }
        if zero {
            continue;
        }
        sum += Complex64::from_polar(ln_mag.exp(), phase);
    }
    Ok(sum)
}
