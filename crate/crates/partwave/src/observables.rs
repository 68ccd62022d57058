//! Grid sampling of densities and spin fields, quadrature norms and spin
//! expectation values, radial partial-wave profiles and vortex-ring metrics.

use std::io::Write;

use crate::decomposition::CoefficientTable;
use crate::oscillator::PacketSpec;
use crate::spinorbit::{evolve_spinor_precomputed, spin_project, FgTable, SpinOrbitParams};
use crate::vec3;
use crate::{Error, Result};

/// Coordinate axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn unit(self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
        }
    }

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    /// The two in-plane axes for a plane with this normal, in coordinate
    /// order: X -> (Y, Z), Y -> (X, Z), Z -> (X, Y).
    pub fn in_plane(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::X, Axis::Z),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::InvalidGrid(format!("unknown axis `{other}`"))),
        }
    }
}

/// Sampling description for fields.
///
/// `Plane` and `Cut` share the same geometry (a normal axis, an offset along
/// it, and two in-plane ranges); `Plane` is used for principal planes through
/// the packet, `Cut` for offset slices perpendicular to a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    Plane {
        normal: Axis,
        offset: f64,
        u_range: (f64, f64),
        v_range: (f64, f64),
        nu: usize,
        nv: usize,
    },
    Cut {
        normal: Axis,
        offset: f64,
        u_range: (f64, f64),
        v_range: (f64, f64),
        nu: usize,
        nv: usize,
    },
    Line {
        axis: Axis,
        range: (f64, f64),
        n: usize,
    },
    Radial {
        r_max: f64,
        n: usize,
    },
}

impl GridSpec {
    /// Centered square plane: normal `normal`, offset `offset`, both in-plane
    /// ranges `[-extent, extent]` with `n` samples each.
    pub fn centered_plane(normal: Axis, offset: f64, extent: f64, n: usize) -> Self {
        GridSpec::Plane {
            normal,
            offset,
            u_range: (-extent, extent),
            v_range: (-extent, extent),
            nu: n,
            nv: n,
        }
    }

    /// Same geometry as [`GridSpec::centered_plane`] but tagged as a cut.
    pub fn centered_cut(normal: Axis, offset: f64, extent: f64, n: usize) -> Self {
        GridSpec::Cut {
            normal,
            offset,
            u_range: (-extent, extent),
            v_range: (-extent, extent),
            nu: n,
            nv: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_range = |r: (f64, f64), n: usize| -> Result<()> {
            if !(r.0.is_finite() && r.1.is_finite()) || r.0 >= r.1 {
                return Err(Error::InvalidGrid(format!("bad range {:?}", r)));
            }
            if n < 2 {
                return Err(Error::InvalidGrid(format!("need >= 2 samples, got {n}")));
            }
            Ok(())
        };
        match self {
            GridSpec::Plane {
                offset,
                u_range,
                v_range,
                nu,
                nv,
                ..
            }
            | GridSpec::Cut {
                offset,
                u_range,
                v_range,
                nu,
                nv,
                ..
            } => {
                if !offset.is_finite() {
                    return Err(Error::InvalidGrid("non-finite offset".into()));
                }
                check_range(*u_range, *nu)?;
                check_range(*v_range, *nv)
            }
            GridSpec::Line { range, n, .. } => check_range(*range, *n),
            GridSpec::Radial { r_max, n } => check_range((0.0, *r_max), *n),
        }
    }

    pub fn point_count(&self) -> usize {
        match self {
            GridSpec::Plane { nu, nv, .. } | GridSpec::Cut { nu, nv, .. } => nu * nv,
            GridSpec::Line { n, .. } => *n,
            GridSpec::Radial { n, .. } => *n,
        }
    }

    /// Sample points in the fixed emission order (v outer, u inner for
    /// planes). Radial grids report points as `(r, 0, 0)`.
    pub fn points(&self) -> Vec<[f64; 3]> {
        let lin = |r: (f64, f64), n: usize, i: usize| r.0 + (r.1 - r.0) * i as f64 / (n - 1) as f64;
        match self {
            GridSpec::Plane {
                normal,
                offset,
                u_range,
                v_range,
                nu,
                nv,
            }
            | GridSpec::Cut {
                normal,
                offset,
                u_range,
                v_range,
                nu,
                nv,
            } => {
                let (ua, va) = normal.in_plane();
                let mut pts = Vec::with_capacity(nu * nv);
                for iv in 0..*nv {
                    let v = lin(*v_range, *nv, iv);
                    for iu in 0..*nu {
                        let u = lin(*u_range, *nu, iu);
                        let mut p = [0.0; 3];
                        p[normal.index()] = *offset;
                        p[ua.index()] = u;
                        p[va.index()] = v;
                        pts.push(p);
                    }
                }
                pts
            }
            GridSpec::Line { axis, range, n } => (0..*n)
                .map(|i| {
                    let mut p = [0.0; 3];
                    p[axis.index()] = lin(*range, *n, i);
                    p
                })
                .collect(),
            GridSpec::Radial { r_max, n } => (0..*n)
                .map(|i| [lin((0.0, *r_max), *n, i), 0.0, 0.0])
                .collect(),
        }
    }

    pub fn kind_label(&self) -> &'static str {
        match self {
            GridSpec::Plane { .. } => "plane",
            GridSpec::Cut { .. } => "cut",
            GridSpec::Line { .. } => "line",
            GridSpec::Radial { .. } => "radial",
        }
    }

    fn header_lines(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "# grid_kind = {}", self.kind_label())?;
        match self {
            GridSpec::Plane {
                normal,
                offset,
                u_range,
                v_range,
                nu,
                nv,
            }
            | GridSpec::Cut {
                normal,
                offset,
                u_range,
                v_range,
                nu,
                nv,
            } => {
                writeln!(w, "# normal = {}", normal.label())?;
                writeln!(w, "# offset = {}", fmt17(*offset))?;
                writeln!(w, "# u_range = {} {}", fmt17(u_range.0), fmt17(u_range.1))?;
                writeln!(w, "# v_range = {} {}", fmt17(v_range.0), fmt17(v_range.1))?;
                writeln!(w, "# nu = {nu}")?;
                writeln!(w, "# nv = {nv}")?;
            }
            GridSpec::Line { axis, range, n } => {
                writeln!(w, "# axis = {}", axis.label())?;
                writeln!(w, "# range = {} {}", fmt17(range.0), fmt17(range.1))?;
                writeln!(w, "# n = {n}")?;
            }
            GridSpec::Radial { r_max, n } => {
                writeln!(w, "# r_max = {}", fmt17(*r_max))?;
                writeln!(w, "# n = {n}")?;
                writeln!(w, "# columns = r 0 0 value")?;
            }
        }
        Ok(())
    }
}

/// Metadata attached to every emitted field.
#[derive(Clone, Debug)]
pub struct FieldMeta {
    pub label: String,
    pub r0: [f64; 3],
    pub p0: [f64; 3],
    pub energy: f64,
    pub kappa: f64,
    pub frozen: bool,
    pub t: f64,
    pub lmax: u32,
    /// Extra figure-specific annotations, emitted in order.
    pub extras: Vec<(String, String)>,
}

impl FieldMeta {
    pub fn new(
        label: &str,
        spec: &PacketSpec,
        params: &SpinOrbitParams,
        t: f64,
        lmax: u32,
    ) -> Self {
        FieldMeta {
            label: label.to_string(),
            r0: spec.r0(),
            p0: spec.p0(),
            energy: spec.energy(),
            kappa: params.kappa,
            frozen: params.frozen,
            t,
            lmax,
            extras: Vec::new(),
        }
    }
}

/// A sampled real-valued field (probability density, or `|r psi|^2` for
/// radial grids) together with its grid and run metadata.
#[derive(Clone, Debug)]
pub struct DensityField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub meta: FieldMeta,
}

/// 17-significant-digit decimal rendering used for all emitted numbers;
/// bit-exact across runs.
pub fn fmt17(v: f64) -> String {
    format!("{:.16e}", v)
}

impl DensityField {
    /// Plain-text long format: '#'-metadata header, then one row per point
    /// `x y z value`.
    pub fn write_to(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "# label = {}", self.meta.label)?;
        writeln!(
            w,
            "# r0 = {} {} {}",
            fmt17(self.meta.r0[0]),
            fmt17(self.meta.r0[1]),
            fmt17(self.meta.r0[2])
        )?;
        writeln!(
            w,
            "# p0 = {} {} {}",
            fmt17(self.meta.p0[0]),
            fmt17(self.meta.p0[1]),
            fmt17(self.meta.p0[2])
        )?;
        writeln!(w, "# energy = {}", fmt17(self.meta.energy))?;
        writeln!(w, "# kappa = {}", fmt17(self.meta.kappa))?;
        writeln!(w, "# frozen = {}", self.meta.frozen)?;
        writeln!(w, "# t = {}", fmt17(self.meta.t))?;
        writeln!(w, "# lmax = {}", self.meta.lmax)?;
        self.grid.header_lines(w)?;
        for (key, value) in &self.meta.extras {
            writeln!(w, "# {key} = {value}")?;
        }
        for (p, v) in self.grid.points().iter().zip(&self.values) {
            writeln!(
                w,
                "{} {} {} {}",
                fmt17(p[0]),
                fmt17(p[1]),
                fmt17(p[2]),
                fmt17(*v)
            )?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("serialized field is UTF-8")
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// Quadrature description for norms and expectation values.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureSpec {
    pub radial_nodes: usize,
    pub radial_cutoff: f64,
    /// Spherical-harmonic degree the angular rule must integrate products of.
    pub angular_order: u32,
}

impl QuadratureSpec {
    /// Default rule for a table: 200 radial Gauss-Legendre nodes on
    /// `[0, r_amp + 10]`, angular order equal to the table's `lmax`.
    pub fn default_for(table: &CoefficientTable) -> Self {
        QuadratureSpec {
            radial_nodes: 200,
            radial_cutoff: table.spec().radial_amplitude() + 10.0,
            angular_order: table.lmax(),
        }
    }

    pub fn validate(&self, spec: &PacketSpec) -> Result<()> {
        if self.radial_nodes < 8 {
            return Err(Error::InvalidGrid(format!(
                "need >= 8 radial nodes, got {}",
                self.radial_nodes
            )));
        }
        if !self.radial_cutoff.is_finite() || self.radial_cutoff <= spec.radial_amplitude() + 8.0 {
            return Err(Error::InvalidGrid(format!(
                "radial cutoff {} must exceed packet extent + 8 = {}",
                self.radial_cutoff,
                spec.radial_amplitude() + 8.0
            )));
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_and_derivative(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|t| t * half).collect(),
    )
}

/// Angular product rule: Gauss-Legendre in `cos(theta)` crossed with a
/// uniform azimuthal grid, exact for products of spherical harmonics up to
/// degree `2 * order`; weights sum to `4 pi`.
///
/// The azimuthal count covers harmonics through `|k| = 2 order + 2`: the
/// spin-lowered component carries orders up to `m + 1`, so spin-density
/// cross terms reach one unit past `2 order` and would alias on the
/// minimal grid.
pub fn angular_product_rule(order: u32) -> Vec<([f64; 3], f64)> {
    let n_theta = order as usize + 1;
    let n_phi = 2 * order as usize + 3;
    let (ct_nodes, ct_weights) = gauss_legendre(n_theta);
    let mut rule = Vec::with_capacity(n_theta * n_phi);
    let wphi = 2.0 * std::f64::consts::PI / n_phi as f64;
    for (ct, wt) in ct_nodes.iter().zip(&ct_weights) {
        let st = (1.0 - ct * ct).sqrt();
        for k in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n_phi as f64;
            rule.push(([st * phi.cos(), st * phi.sin(), *ct], wt * wphi));
        }
    }
    rule
}

/// Radial profile `|r psi_l(r, t)|^2` of the l-th term in the axial
/// decomposition, i.e. with the closed-form axial weight `C_l0` included, so
/// that the profiles sum (over l, with unit-normalized `Y_l^0`) to the packet.
///
/// Requires an axial spec (`r0` along z, `p0 = 0`).
pub fn radial_density(l: u32, spec: &PacketSpec, t: f64, samples: &[f64]) -> Result<Vec<f64>> {
    if !spec.is_axial() {
        return Err(Error::NonAxialSpec);
    }
    let c_l0 = crate::decomposition::axial_weight(spec, l)?;
    let mut out = Vec::with_capacity(samples.len());
    for &r in samples {
        let radial = spec.partial_wave_radial_seq(l, r, t)?[l as usize];
        let v = (r * c_l0 * radial).norm_sqr();
        out.push(v);
    }
    Ok(out)
}

/// Pointwise spinor density `|up|^2 + |down|^2` on a grid.
pub fn density_grid(
    table: &CoefficientTable,
    params: &SpinOrbitParams,
    grid: &GridSpec,
    t: f64,
) -> Result<DensityField> {
    grid.validate()?;
    let fg = FgTable::build(table.lmax(), t, params.kappa);
    let mut values = Vec::with_capacity(grid.point_count());
    for p in grid.points() {
        let amp = evolve_spinor_precomputed(table, params, &fg, p, t)?;
        values.push(amp.probability_density());
    }
    Ok(DensityField {
        grid: grid.clone(),
        values,
        meta: FieldMeta::new("density", table.spec(), params, t, table.lmax()),
    })
}

/// Pointwise spin-projected densities along `axis`: `(plus, minus)` fields
/// whose sum is the total density.
pub fn spin_density_pair(
    table: &CoefficientTable,
    params: &SpinOrbitParams,
    grid: &GridSpec,
    t: f64,
    axis: [f64; 3],
) -> Result<(DensityField, DensityField)> {
    grid.validate()?;
    let fg = FgTable::build(table.lmax(), t, params.kappa);
    let n = grid.point_count();
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for p in grid.points() {
        let amp = evolve_spinor_precomputed(table, params, &fg, p, t)?;
        let (a, b) = spin_project(&amp, axis)?;
        plus.push(a.norm_sqr());
        minus.push(b.norm_sqr());
    }
    let mut meta_plus = FieldMeta::new("spin_plus", table.spec(), params, t, table.lmax());
    let mut meta_minus = FieldMeta::new("spin_minus", table.spec(), params, t, table.lmax());
    let axis_str = format!("{} {} {}", fmt17(axis[0]), fmt17(axis[1]), fmt17(axis[2]));
    meta_plus
        .extras
        .push(("spin_axis".into(), axis_str.clone()));
    meta_minus.extras.push(("spin_axis".into(), axis_str));
    Ok((
        DensityField {
            grid: grid.clone(),
            values: plus,
            meta: meta_plus,
        },
        DensityField {
            grid: grid.clone(),
            values: minus,
            meta: meta_minus,
        },
    ))
}

/// Total norm and spin expectation `<sigma>` by radial x angular quadrature
/// over the spinor field. Errors if doubling the radial node count moves the
/// norm by more than 1e-7.
pub fn norm_and_spin(
    table: &CoefficientTable,
    params: &SpinOrbitParams,
    quad: &QuadratureSpec,
    t: f64,
) -> Result<(f64, [f64; 3])> {
    quad.validate(table.spec())?;
    let (norm, sigma) = norm_and_spin_with_nodes(table, params, quad, t, quad.radial_nodes)?;
    let (norm2, _) = norm_and_spin_with_nodes(table, params, quad, t, quad.radial_nodes * 2)?;
    if (norm2 - norm).abs() > 1e-7 {
        return Err(Error::QuadratureNoConverge(format!(
            "norm moved by {:.3e} when radial nodes doubled",
            (norm2 - norm).abs()
        )));
    }
    Ok((norm, sigma))
}

fn norm_and_spin_with_nodes(
    table: &CoefficientTable,
    params: &SpinOrbitParams,
    quad: &QuadratureSpec,
    t: f64,
    radial_nodes: usize,
) -> Result<(f64, [f64; 3])> {
    let fg = FgTable::build(table.lmax(), t, params.kappa);
    let (r_nodes, r_weights) = gauss_legendre_on(0.0, quad.radial_cutoff, radial_nodes);
    let angular = angular_product_rule(quad.angular_order);
    let mut norm = 0.0;
    let mut sigma = [0.0; 3];
    for (r, wr) in r_nodes.iter().zip(&r_weights) {
        let radial =
            table
                .spec()
                .partial_wave_radial_seq(table.lmax(), *r, params.radial_time(t))?;
        let w_shell = wr * r * r;
        for (dir, wa) in &angular {
            let point = vec3::scale(*dir, *r);
            let amp = crate::spinorbit::evolve_spinor_at_radial(table, &fg, &radial, point)?;
            let w = w_shell * wa;
            norm += w * amp.probability_density();
            let s = amp.spin_density();
            sigma[0] += w * s[0];
            sigma[1] += w * s[1];
            sigma[2] += w * s[2];
        }
    }
    Ok((norm, sigma))
}

/// Centroid, ring radius and peak of a plane/cut field.
#[derive(Clone, Copy, Debug)]
pub struct RingMetrics {
    /// Density-weighted centroid of the field.
    pub center: [f64; 3],
    /// Density-weighted mean in-plane distance from the centroid, over the
    /// points at or above half maximum.
    pub ring_radius: f64,
    /// Maximum sampled density.
    pub peak: f64,
}

/// Ring metrics of a field sampled on a plane or cut.
pub fn ring_metrics(field: &DensityField) -> Result<RingMetrics> {
    match field.grid {
        GridSpec::Plane { .. } | GridSpec::Cut { .. } => {}
        _ => {
            return Err(Error::InvalidGrid(
                "ring metrics need a plane or cut field".into(),
            ))
        }
    }
    let points = field.grid.points();
    let peak = field.peak();
    if peak < 1e-300 {
        return Err(Error::DegenerateField);
    }
    let mut total = 0.0;
    let mut center = [0.0; 3];
    for (p, v) in points.iter().zip(&field.values) {
        total += v;
        center[0] += v * p[0];
        center[1] += v * p[1];
        center[2] += v * p[2];
    }
    center = vec3::scale(center, 1.0 / total);
    let half = 0.5 * peak;
    let mut wsum = 0.0;
    let mut dsum = 0.0;
    for (p, v) in points.iter().zip(&field.values) {
        if *v >= half {
            let d = vec3::norm(vec3::sub(*p, center));
            wsum += v;
            dsum += v * d;
        }
    }
    Ok(RingMetrics {
        center,
        ring_radius: dsum / wsum,
        peak,
    })
}
