//! Expansion of a Gaussian coherent packet over time-dependent partial
//! waves. The weights are
//!
//! ```text
//! C_lm = (-1)^m 4 pi^{1/4} e^{-E0/2} Y_l^{-m}(theta_R0, phi_R0)
//! ```
//!
//! evaluated through solid harmonics of `Rvec_0` divided by `R_0^l`, which
//! sidesteps complex inverse trigonometry and its branch ambiguity. For an
//! axial packet (`r_0 = -r0 z_hat`, `p_0 = 0`) this collapses to the closed
//! form `C_l0 = (-1)^l 2 pi^{-1/4} e^{-N/2} sqrt(2l+1)`, all other m zero.
//!
//! The principal-branch choice for `R_0` is cosmetic: flipping its sign
//! multiplies both `C_lm` and `W_l(R_t r)` by `(-1)^l`, leaving every product
//! in the reconstruction unchanged.

use std::io::Write;

use num_complex::Complex64;

use crate::oscillator::{DecompositionClass, PacketSpec, DEGENERACY_THRESHOLD};
use crate::specfun::{self, lm_index};
use crate::vec3;
use crate::{Error, Result};

/// Truncated set of decomposition weights `C_lm` for one packet, together
/// with the squared radial norms `nu_l` used for captured-norm bookkeeping.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    spec: PacketSpec,
    lmax: u32,
    coeffs: Vec<Complex64>,
    norms: Vec<f64>,
    /// Sorted distinct |m| with a nonzero coefficient anywhere (plus the
    /// shifted orders needed by the spin-lowered component).
    active_orders: Vec<u32>,
}

/// The weight of the l-th axial partial wave, `C_l0`, computed through the
/// same solid-harmonic route as the full table.
pub fn axial_weight(spec: &PacketSpec, l: u32) -> Result<Complex64> {
    single_weight(spec, l, 0)
}

fn single_weight(spec: &PacketSpec, l: u32, m: i32) -> Result<Complex64> {
    let prefactor = 4.0 * std::f64::consts::PI.powf(0.25) * (-0.5 * spec.energy()).exp();
    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let harmonic = specfun::solid_harm(l, -m, &spec.rvec0())?;
    let r0_pow = if l == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(
            (l as f64 * spec.big_r0().norm().ln()).exp(),
            l as f64 * spec.delta0(),
        )
    };
    Ok(sign * prefactor * harmonic / r0_pow)
}

/// Builds the table of weights `C_lm` for `l <= lmax`.
///
/// A packet whose `Rvec_0` itself vanishes is the ground state: only the
/// `l = 0` entry is nonzero. Packets with `Rvec_0 . Rvec_0` near zero but
/// `Rvec_0` finite (circular orbits) are rejected.
pub fn coefficients(spec: &PacketSpec, lmax: u32) -> Result<CoefficientTable> {
    if lmax > specfun::DEGREE_CAP {
        return Err(Error::DegreeTooLarge {
            l: lmax,
            cap: specfun::DEGREE_CAP,
        });
    }
    let n = (lmax as usize + 1) * (lmax as usize + 1);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    match spec.decomposition_class() {
        DecompositionClass::Degenerate => {
            return Err(Error::DegenerateSpec {
                threshold: DEGENERACY_THRESHOLD,
            })
        }
        DecompositionClass::GroundState => {
            coeffs[lm_index(0, 0)] = Complex64::new(
                4.0 * std::f64::consts::PI.powf(0.25) * (-0.5 * spec.energy()).exp()
                    / (4.0 * std::f64::consts::PI).sqrt(),
                0.0,
            );
        }
        DecompositionClass::Regular => {
            for l in 0..=lmax {
                for m in -(l as i32)..=(l as i32) {
                    coeffs[lm_index(l, m)] = single_weight(spec, l, m)?;
                }
            }
        }
    }
    let norms = spec.partial_wave_norms(lmax)?;
    let mut active: Vec<u32> = Vec::new();
    for l in 0..=lmax {
        for m in -(l as i32)..=(l as i32) {
            if coeffs[lm_index(l, m)].norm_sqr() != 0.0 {
                let am = m.unsigned_abs();
                if !active.contains(&am) {
                    active.push(am);
                }
                let shifted = (m + 1).unsigned_abs();
                if !active.contains(&shifted) {
                    active.push(shifted);
                }
            }
        }
    }
    active.sort_unstable();
    Ok(CoefficientTable {
        spec: *spec,
        lmax,
        coeffs,
        norms,
        active_orders: active,
    })
}

impl CoefficientTable {
    pub fn spec(&self) -> &PacketSpec {
        &self.spec
    }

    pub fn lmax(&self) -> u32 {
        self.lmax
    }

    /// `C_lm`; panics if `|m| > l` or `l > lmax`.
    pub fn get(&self, l: u32, m: i32) -> Complex64 {
        assert!(l <= self.lmax && m.unsigned_abs() <= l, "index ({l},{m})");
        self.coeffs[lm_index(l, m)]
    }

    /// Squared radial norm `nu_l` of the l-th partial wave.
    pub fn norm_sq(&self, l: u32) -> f64 {
        self.norms[l as usize]
    }

    pub(crate) fn active_orders(&self) -> &[u32] {
        &self.active_orders
    }

    /// Captured norm `sum_lm |C_lm|^2 nu_l` of the truncated expansion.
    pub fn captured_norm(&self) -> f64 {
        let mut total = 0.0;
        for l in 0..=self.lmax {
            let mut msum = 0.0;
            for m in -(l as i32)..=(l as i32) {
                msum += self.coeffs[lm_index(l, m)].norm_sqr();
            }
            total += msum * self.norms[l as usize];
        }
        total
    }

    /// Reconstructs the packet from the truncated expansion:
    /// `sum_lm C_lm psi_l^m(r, t)`, accumulated in a fixed order (ascending
    /// l, then ascending m) with compensated summation.
    pub fn reconstruct(&self, r: [f64; 3], t: f64) -> Result<Complex64> {
        let radius = vec3::norm(r);
        let radial = self.spec.partial_wave_radial_seq(self.lmax, radius, t)?;
        let (theta, phi) = vec3::polar_angles(r);
        let harmonics = specfun::sph_harm_table_for_orders(
            self.lmax,
            theta.cos(),
            theta.sin(),
            phi,
            &self.active_orders,
        );
        let mut sum = KahanC::new();
        for l in 0..=self.lmax {
            for m in -(l as i32)..=(l as i32) {
                let c = self.coeffs[lm_index(l, m)];
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                sum.add(c * radial[l as usize] * harmonics[lm_index(l, m)]);
            }
        }
        Ok(sum.value())
    }

    /// Coefficient-table export: '#'-metadata header, then one row per
    /// coefficient `l m Re(C) Im(C)`.
    pub fn write_to(&self, w: &mut dyn Write, epsilon: Option<f64>) -> std::io::Result<()> {
        use crate::observables::fmt17;
        let r0 = self.spec.r0();
        let p0 = self.spec.p0();
        writeln!(
            w,
            "# r0 = {} {} {}",
            fmt17(r0[0]),
            fmt17(r0[1]),
            fmt17(r0[2])
        )?;
        writeln!(
            w,
            "# p0 = {} {} {}",
            fmt17(p0[0]),
            fmt17(p0[1]),
            fmt17(p0[2])
        )?;
        writeln!(w, "# energy = {}", fmt17(self.spec.energy()))?;
        writeln!(
            w,
            "# R0 = {} {}",
            fmt17(self.spec.big_r0().re),
            fmt17(self.spec.big_r0().im)
        )?;
        writeln!(w, "# delta0 = {}", fmt17(self.spec.delta0()))?;
        writeln!(w, "# lmax = {}", self.lmax)?;
        match epsilon {
            Some(eps) => writeln!(w, "# epsilon = {}", fmt17(eps))?,
            None => writeln!(w, "# epsilon = none")?,
        }
        writeln!(w, "# columns = l m re_c im_c")?;
        // exact zeros (symmetry-forbidden orders) are omitted
        for l in 0..=self.lmax {
            for m in -(l as i32)..=(l as i32) {
                let c = self.coeffs[lm_index(l, m)];
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                writeln!(w, "{} {} {} {}", l, m, fmt17(c.re), fmt17(c.im))?;
            }
        }
        Ok(())
    }
}

/// Kahan-compensated complex accumulator; fixes the summation order's
/// rounding independently of term count.
pub(crate) struct KahanC {
    sum: Complex64,
    comp: Complex64,
}

impl KahanC {
    pub fn new() -> Self {
        KahanC {
            sum: Complex64::new(0.0, 0.0),
            comp: Complex64::new(0.0, 0.0),
        }
    }

    pub fn add(&mut self, v: Complex64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> Complex64 {
        self.sum
    }
}

/// Weight mass per degree, `w_l = sum_m |C_lm|^2 nu_l`, for `l <= lmax`.
fn weight_masses(spec: &PacketSpec, lmax: u32) -> Result<Vec<f64>> {
    let norms = spec.partial_wave_norms(lmax)?;
    let mut out = vec![0.0; lmax as usize + 1];
    for l in 0..=lmax {
        let mut msum = 0.0;
        for m in -(l as i32)..=(l as i32) {
            msum += single_weight(spec, l, m)?.norm_sqr();
        }
        out[l as usize] = msum * norms[l as usize];
    }
    Ok(out)
}

/// Smallest `lmax` whose truncation tail `sum_{l > lmax} w_l` falls below
/// `epsilon` (relative to the total mass). The tail is accumulated forward,
/// smallest terms first, so truncation levels far below f64 resolution of
/// `1 - sum` remain meaningful.
pub fn truncation_lmax(spec: &PacketSpec, epsilon: f64) -> Result<u32> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::ConfigValue {
            key: "epsilon".into(),
            msg: format!("must lie in (0, 1), got {epsilon}"),
        });
    }
    match spec.decomposition_class() {
        DecompositionClass::Degenerate => {
            return Err(Error::DegenerateSpec {
                threshold: DEGENERACY_THRESHOLD,
            })
        }
        DecompositionClass::GroundState => return Ok(0),
        DecompositionClass::Regular => {}
    }
    // Extend the weight list until it has decayed far below epsilon times
    // the running total, then locate the truncation point from the tail.
    let mut guess = 16u32.max((2.0 * spec.energy()) as u32);
    loop {
        let w = weight_masses(spec, guess.min(specfun::DEGREE_CAP))?;
        let total: f64 = w.iter().sum();
        let peak = w.iter().cloned().fold(0.0, f64::max);
        let converged = w.len() >= 8
            && w[w.len() - 4..]
                .iter()
                .all(|&x| x <= epsilon * 1e-4 * total && x < 1e-6 * peak);
        if converged || guess >= specfun::DEGREE_CAP {
            if !converged {
                return Err(Error::DegreeTooLarge {
                    l: guess,
                    cap: specfun::DEGREE_CAP,
                });
            }
            // Backward partial sums of the tail.
            let mut tail = vec![0.0; w.len() + 1];
            for l in (0..w.len()).rev() {
                tail[l] = tail[l + 1] + w[l];
            }
            for lmax in 0..w.len() {
                if tail[lmax + 1] < epsilon * total {
                    return Ok(lmax as u32);
                }
            }
            return Err(Error::DegreeTooLarge {
                l: guess,
                cap: specfun::DEGREE_CAP,
            });
        }
        guess = (guess * 2).min(specfun::DEGREE_CAP);
    }
}
