//! Exact spin-orbit propagator acting on the partial-wave expansion.
//!
//! With `V_ls = kappa (l.sigma)` the evolution factorizes as
//! `U_ls(t) = f(t) + g(t) (l.sigma)` where, on the degree-l subspace with
//! `tau = kappa t` and `Omega = 2l + 1`,
//!
//! ```text
//! f_l = e^{i tau/2} ( cos(Omega tau/2) - (i/Omega) sin(Omega tau/2) )
//! g_l = e^{i tau/2} ( -2i/Omega ) sin(Omega tau/2)
//! ```
//!
//! This is exactly `exp(-i kappa t (l.sigma))` resolved on the two
//! eigenvalues `l` and `-(l+1)` of `l.sigma`: `f_l + l g_l = e^{-i tau l}`
//! and `f_l - (l+1) g_l = e^{i tau (l+1)}`, both of modulus one.
//!
//! Acting on a packet that starts in the `s_z = +1/2` eigenstate,
//!
//! ```text
//! up   = sum_lm C_lm (f_l + m g_l)                  chi_l Y_l^m
//! down = sum_lm C_lm g_l sqrt(l(l+1) - m(m+1))      chi_l Y_l^{m+1}
//! ```
//!
//! where `chi_l` carries the oscillator radial/time factors. The lowering
//! coefficient has no 1/2: `|f_l + m g_l|^2 + |g_l|^2 (l(l+1) - m(m+1)) = 1`
//! holds for every `(l, m)` only with the coefficient as written, which is
//! what pins the convention.
//!
//! In frozen-oscillator mode the oscillator factors stay at their `t = 0`
//! values while `f_l, g_l` advance, isolating the spin-orbit dynamics.

use num_complex::Complex64;

use crate::decomposition::CoefficientTable;
use crate::oscillator::PacketSpec;
use crate::specfun::{lm_index, sph_harm_table_for_orders};
use crate::vec3;
use crate::{Error, Result};

/// Spin-orbit coupling parameters. `T_ls / T = 1 / kappa` with `T = 2 pi`.
#[derive(Clone, Copy, Debug)]
pub struct SpinOrbitParams {
    /// Coupling constant `kappa > 0`.
    pub kappa: f64,
    /// Freeze the oscillator factor at `t = 0` while the spin factor runs.
    pub frozen: bool,
}

impl SpinOrbitParams {
    pub fn new(kappa: f64, frozen: bool) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::ConfigValue {
                key: "kappa".into(),
                msg: format!("must be positive and finite, got {kappa}"),
            });
        }
        Ok(SpinOrbitParams { kappa, frozen })
    }

    /// Oscillator period.
    pub fn period(&self) -> f64 {
        crate::oscillator::PERIOD
    }

    /// Spin-orbit period `T_ls = 2 pi / kappa`.
    pub fn t_ls(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.kappa
    }

    /// The time at which the oscillator factors are evaluated.
    pub fn radial_time(&self, t: f64) -> f64 {
        if self.frozen {
            0.0
        } else {
            t
        }
    }
}

/// Two-component spinor amplitude at one space-time point
/// (`s_z = +1/2` and `s_z = -1/2` components).
#[derive(Clone, Copy, Debug)]
pub struct SpinorAmplitude {
    pub up: Complex64,
    pub down: Complex64,
}

impl SpinorAmplitude {
    /// Local probability density `|up|^2 + |down|^2`.
    pub fn probability_density(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    /// Local spin density `psi^dag sigma psi`.
    pub fn spin_density(&self) -> [f64; 3] {
        let cross = self.up.conj() * self.down;
        [
            2.0 * cross.re,
            2.0 * cross.im,
            self.up.norm_sqr() - self.down.norm_sqr(),
        ]
    }
}

/// `(f_l, g_l)` of the spin-orbit propagator on the degree-l subspace.
pub fn fg_coefficients(l: u32, t: f64, kappa: f64) -> (Complex64, Complex64) {
    let tau = kappa * t;
    let omega = 2.0 * l as f64 + 1.0;
    let (s, c) = (0.5 * omega * tau).sin_cos();
    let e = Complex64::from_polar(1.0, 0.5 * tau);
    let f = e * Complex64::new(c, -s / omega);
    let g = e * Complex64::new(0.0, -2.0 * s / omega);
    (f, g)
}

/// Precomputed `(f_l, g_l)` for all `l <= lmax` at one `(t, kappa)`.
///
/// Values are bit-identical to per-point [`fg_coefficients`] calls, so grid
/// evaluation through this table cannot change any result.
#[derive(Clone, Debug)]
pub struct FgTable {
    pub fg: Vec<(Complex64, Complex64)>,
}

impl FgTable {
    pub fn build(lmax: u32, t: f64, kappa: f64) -> Self {
        FgTable {
            fg: (0..=lmax).map(|l| fg_coefficients(l, t, kappa)).collect(),
        }
    }
}

/// Evolves the packet's spinor to `(r, t)` under `U_0 U_ls` (or `U_ls` alone
/// in frozen mode). The initial spin is `s_z = +1/2`; other initial spins are
/// handled through [`rotate_setup`].
pub fn evolve_spinor(
    table: &CoefficientTable,
    params: &SpinOrbitParams,
    r: [f64; 3],
    t: f64,
) -> Result<SpinorAmplitude> {
    let fg = FgTable::build(table.lmax(), t, params.kappa);
    evolve_spinor_precomputed(table, params, &fg, r, t)
}

/// [`evolve_spinor`] with the `(f_l, g_l)` table precomputed by the caller.
pub fn evolve_spinor_precomputed(
    table: &CoefficientTable,
    params: &SpinOrbitParams,
    fg: &FgTable,
    r: [f64; 3],
    t: f64,
) -> Result<SpinorAmplitude> {
    let radius = vec3::norm(r);
    let radial =
        table
            .spec()
            .partial_wave_radial_seq(table.lmax(), radius, params.radial_time(t))?;
    evolve_spinor_at_radial(table, fg, &radial, r)
}

/// Innermost spinor assembly: radial factors already evaluated at `|r|`.
pub(crate) fn evolve_spinor_at_radial(
    table: &CoefficientTable,
    fg: &FgTable,
    radial: &[Complex64],
    r: [f64; 3],
) -> Result<SpinorAmplitude> {
    let (theta, phi) = vec3::polar_angles(r);
    let harmonics = sph_harm_table_for_orders(
        table.lmax(),
        theta.cos(),
        theta.sin(),
        phi,
        table.active_orders(),
    );
    let mut up = crate::decomposition::KahanC::new();
    let mut down = crate::decomposition::KahanC::new();
    for l in 0..=table.lmax() {
        let (f, g) = fg.fg[l as usize];
        let chi = radial[l as usize];
        for m in -(l as i32)..=(l as i32) {
            let c = table.get(l, m);
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let base = c * chi;
            up.add(base * (f + m as f64 * g) * harmonics[lm_index(l, m)]);
            if m < l as i32 {
                let lower = (l as f64 * (l as f64 + 1.0) - m as f64 * (m as f64 + 1.0)).sqrt();
                down.add(base * g * lower * harmonics[lm_index(l, m + 1)]);
            }
        }
    }
    Ok(SpinorAmplitude {
        up: up.value(),
        down: down.value(),
    })
}

/// Maps a setup with initial spin along `spin_axis` onto the canonical
/// `s_z = +1/2` setup, exploiting the rotational invariance of the
/// Hamiltonian.
///
/// Returns `(canonical_spec, rot)` where `rot` maps `z_hat` to `spin_axis`
/// and `canonical_spec` carries the back-rotated geometry. The original
/// setup's amplitudes at a point `p` equal the canonical amplitudes at
/// `rot^T p` (with spin components read along back-rotated axes); total
/// densities transfer directly.
pub fn rotate_setup(spec: &PacketSpec, spin_axis: [f64; 3]) -> Result<(PacketSpec, [[f64; 3]; 3])> {
    let n = vec3::norm(spin_axis);
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::ConfigValue {
            key: "spin_axis".into(),
            msg: format!("must be a unit vector, |axis| = {n}"),
        });
    }
    let axis = vec3::scale(spin_axis, 1.0 / n);
    let rot = if axis[2] >= 1.0 - 1e-15 {
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    } else if axis[2] <= -1.0 + 1e-15 {
        // rotate about x by pi
        [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]
    } else {
        let raw = vec3::cross([0.0, 0.0, 1.0], axis);
        let u = vec3::scale(raw, 1.0 / vec3::norm(raw));
        vec3::rotation_about(u, axis[2].clamp(-1.0, 1.0).acos())
    };
    let rt = vec3::transpose(&rot);
    let canonical = PacketSpec::new(vec3::mat_vec(&rt, spec.r0()), vec3::mat_vec(&rt, spec.p0()));
    Ok((canonical, rot))
}

/// Amplitudes along the spin eigenvectors of `axis . sigma`:
/// `plus = <+axis|psi>`, `minus = <-axis|psi>`, with the `-axis` eigenvector
/// phased so that `axis = z_hat` returns `(up, down)` unchanged.
pub fn spin_project(amp: &SpinorAmplitude, axis: [f64; 3]) -> Result<(Complex64, Complex64)> {
    let n = vec3::norm(axis);
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::ConfigValue {
            key: "axis".into(),
            msg: format!("must be a unit vector, |axis| = {n}"),
        });
    }
    let (theta, phi) = vec3::polar_angles(axis);
    let c = (0.5 * theta).cos();
    let s = Complex64::from_polar((0.5 * theta).sin(), phi);
    let plus = c * amp.up + s.conj() * amp.down;
    let minus = c * amp.down - s * amp.up;
    Ok((plus, minus))
}
