//! Configuration parsing, figure-reproduction pipelines and ad-hoc
//! evaluation commands. The `simulate` binary is a thin wrapper over
//! [`run_figure`] and [`run_eval`].
//!
//! Config files are UTF-8 `key = value` lines with `#` comments. Unknown
//! keys are rejected. All emitted numbers use a fixed 17-significant-digit
//! rendering and fixed summation orders, so identical configs produce
//! byte-identical outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::decomposition::{coefficients, truncation_lmax, CoefficientTable};
use crate::observables::{
    fmt17, ring_metrics, Axis, DensityField, FieldMeta, GridSpec, QuadratureSpec,
};
use crate::oscillator::{PacketSpec, PERIOD};
use crate::spinorbit::{
    evolve_spinor_precomputed, rotate_setup, spin_project, FgTable, SpinOrbitParams,
};
use crate::vec3;
use crate::{Error, Result};

/// Figure-reproduction pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
        }
    }
}

impl std::str::FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            "fig5" => Ok(Figure::Fig5),
            "fig6" => Ok(Figure::Fig6),
            other => Err(Error::Usage(format!("unknown figure `{other}`"))),
        }
    }
}

/// Ad-hoc evaluation commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalWhat {
    Packet,
    PartialWave,
    Coeffs,
    Density,
    Spin,
    Norm,
}

impl EvalWhat {
    pub fn name(self) -> &'static str {
        match self {
            EvalWhat::Packet => "packet",
            EvalWhat::PartialWave => "partialwave",
            EvalWhat::Coeffs => "coeffs",
            EvalWhat::Density => "density",
            EvalWhat::Spin => "spin",
            EvalWhat::Norm => "norm",
        }
    }
}

impl std::str::FromStr for EvalWhat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "packet" => Ok(EvalWhat::Packet),
            "partialwave" => Ok(EvalWhat::PartialWave),
            "coeffs" => Ok(EvalWhat::Coeffs),
            "density" => Ok(EvalWhat::Density),
            "spin" => Ok(EvalWhat::Spin),
            "norm" => Ok(EvalWhat::Norm),
            other => Err(Error::Usage(format!("unknown eval subcommand `{other}`"))),
        }
    }
}

/// Truncation policy for the expansion degree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LmaxPolicy {
    /// Smallest degree whose captured-norm deficit is below epsilon.
    Auto(f64),
    Fixed(u32),
}

/// Initial geometry of the packet and its spin.
///
/// * `axial-z`: `r_0 = -r0 z_hat`, `p_0 = 0`, spin along `+z` (the linear
///   motion analysed through the closed-form axial weights).
/// * `axial-x`: `r_0 = +r0 x_hat`, `p_0 = 0`, spin along `+x`.
/// * `custom`: explicit `r_0`, `p_0` and spin axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Geometry {
    AxialZ,
    AxialX,
    Custom {
        r0: [f64; 3],
        p0: [f64; 3],
        spin_axis: [f64; 3],
    },
}

/// Raw parsed configuration: every key optional, defaults applied per run.
#[derive(Clone, Debug, Default)]
pub struct ParsedConfig {
    pub n: Option<f64>,
    pub kappa: Option<f64>,
    pub frozen: Option<bool>,
    pub lmax: Option<u32>,
    pub epsilon: Option<f64>,
    pub initial: Option<String>,
    pub r0: Option<[f64; 3]>,
    pub p0: Option<[f64; 3]>,
    pub spin_axis: Option<[f64; 3]>,
    pub grid_points: Option<usize>,
    pub grid_extent: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
}

/// Resolved run configuration with documented defaults applied.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub n: f64,
    pub kappa: f64,
    pub frozen: bool,
    pub lmax_policy: LmaxPolicy,
    pub geometry: Geometry,
    pub grid_points: usize,
    pub grid_points_explicit: bool,
    pub grid_extent: Option<f64>,
    /// Time list as fractions of the relevant period (`T` for fig1/fig2,
    /// `T_ls` for fig3..fig6).
    pub times: Option<Vec<f64>>,
    pub out_dir: PathBuf,
}

fn parse_triple(key: &str, value: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::ConfigValue {
            key: key.into(),
            msg: format!("expected three comma-separated numbers, got `{value}`"),
        });
    }
    let mut out = [0.0f64; 3];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p.parse().map_err(|_| Error::ConfigValue {
            key: key.into(),
            msg: format!("`{p}` is not a number"),
        })?;
        if !out[i].is_finite() {
            return Err(Error::ConfigValue {
                key: key.into(),
                msg: format!("`{p}` is not finite"),
            });
        }
    }
    Ok(out)
}

fn apply_key(cfg: &mut ParsedConfig, key: &str, value: &str, line: usize) -> Result<()> {
    let bad_number = |key: &str, value: &str| Error::ConfigValue {
        key: key.into(),
        msg: format!("`{value}` is not a number"),
    };
    match key {
        "N" => {
            let n: f64 = value.parse().map_err(|_| bad_number(key, value))?;
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::ConfigValue {
                    key: "N".into(),
                    msg: format!("must be positive and finite, got {n}"),
                });
            }
            cfg.n = Some(n);
        }
        "kappa" => {
            let k: f64 = value.parse().map_err(|_| bad_number(key, value))?;
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::ConfigValue {
                    key: "kappa".into(),
                    msg: format!("must be positive and finite, got {k}"),
                });
            }
            cfg.kappa = Some(k);
        }
        "frozen" => {
            cfg.frozen = Some(match value {
                "true" | "1" | "yes" => true,
                "false" | "0" | "no" => false,
                other => {
                    return Err(Error::ConfigValue {
                        key: "frozen".into(),
                        msg: format!("expected true/false, got `{other}`"),
                    })
                }
            });
        }
        "lmax" => {
            let l: u32 = value.parse().map_err(|_| Error::ConfigValue {
                key: "lmax".into(),
                msg: format!("`{value}` is not a non-negative integer"),
            })?;
            if l > crate::specfun::DEGREE_CAP {
                return Err(Error::ConfigValue {
                    key: "lmax".into(),
                    msg: format!("exceeds the degree cap {}", crate::specfun::DEGREE_CAP),
                });
            }
            cfg.lmax = Some(l);
        }
        "epsilon" => {
            let e: f64 = value.parse().map_err(|_| bad_number(key, value))?;
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::ConfigValue {
                    key: "epsilon".into(),
                    msg: format!("must lie in (0, 1), got {e}"),
                });
            }
            cfg.epsilon = Some(e);
        }
        "initial" => match value {
            "axial-z" | "axial-x" | "custom" => cfg.initial = Some(value.to_string()),
            other => {
                return Err(Error::ConfigValue {
                    key: "initial".into(),
                    msg: format!("expected axial-z | axial-x | custom, got `{other}`"),
                })
            }
        },
        "r0" => cfg.r0 = Some(parse_triple("r0", value)?),
        "p0" => cfg.p0 = Some(parse_triple("p0", value)?),
        "spin_axis" => cfg.spin_axis = Some(parse_triple("spin_axis", value)?),
        "grid_points" => {
            let n: usize = value.parse().map_err(|_| Error::ConfigValue {
                key: "grid_points".into(),
                msg: format!("`{value}` is not a positive integer"),
            })?;
            if n < 2 {
                return Err(Error::ConfigValue {
                    key: "grid_points".into(),
                    msg: "need at least 2 points".into(),
                });
            }
            cfg.grid_points = Some(n);
        }
        "grid_extent" => {
            let e: f64 = value.parse().map_err(|_| bad_number(key, value))?;
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::ConfigValue {
                    key: "grid_extent".into(),
                    msg: format!("must be positive and finite, got {e}"),
                });
            }
            cfg.grid_extent = Some(e);
        }
        "times" => {
            let mut times = Vec::new();
            for part in value.split(',') {
                let t: f64 = part.trim().parse().map_err(|_| Error::ConfigValue {
                    key: "times".into(),
                    msg: format!("`{part}` is not a number"),
                })?;
                if !t.is_finite() {
                    return Err(Error::ConfigValue {
                        key: "times".into(),
                        msg: format!("`{part}` is not finite"),
                    });
                }
                times.push(t);
            }
            if times.is_empty() {
                return Err(Error::ConfigValue {
                    key: "times".into(),
                    msg: "empty time list".into(),
                });
            }
            cfg.times = Some(times);
        }
        "out" => cfg.out = Some(PathBuf::from(value)),
        other => {
            return Err(Error::ConfigParse {
                line,
                msg: format!("unknown key `{other}`"),
            })
        }
    }
    Ok(())
}

/// Parses a config text: `key = value` lines, `#` comments, blank lines.
pub fn parse_config(text: &str) -> Result<ParsedConfig> {
    let mut cfg = ParsedConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigParse {
            line: line_no,
            msg: format!("expected key=value, got `{line}`"),
        })?;
        apply_key(&mut cfg, key.trim(), value.trim(), line_no)?;
    }
    Ok(cfg)
}

/// Applies `key=value` command-line overrides on top of a parsed config.
pub fn apply_overrides(cfg: &mut ParsedConfig, overrides: &[String]) -> Result<()> {
    for (idx, item) in overrides.iter().enumerate() {
        let (key, value) = item.split_once('=').ok_or_else(|| {
            Error::Usage(format!("override `{item}` is not of the form key=value"))
        })?;
        apply_key(cfg, key.trim(), value.trim(), idx + 1)?;
    }
    Ok(())
}

/// Resolves defaults. `fig = None` applies the eval defaults.
pub fn resolve(parsed: &ParsedConfig, fig: Option<Figure>) -> Result<RunConfig> {
    let n = parsed.n.unwrap_or(match fig {
        Some(Figure::Fig6) => 4.0,
        _ => 20.0,
    });
    let kappa = parsed.kappa.unwrap_or(1.0);
    let frozen = parsed.frozen.unwrap_or(matches!(
        fig,
        Some(Figure::Fig3) | Some(Figure::Fig4) | Some(Figure::Fig5) | Some(Figure::Fig6)
    ));
    let lmax_policy = match (parsed.lmax, parsed.epsilon) {
        (Some(l), _) => LmaxPolicy::Fixed(l),
        (None, Some(e)) => LmaxPolicy::Auto(e),
        (None, None) => LmaxPolicy::Auto(1e-10),
    };
    let geometry = match parsed.initial.as_deref() {
        None => match fig {
            Some(Figure::Fig1) | Some(Figure::Fig2) | None => Geometry::AxialZ,
            _ => Geometry::AxialX,
        },
        Some("axial-z") => Geometry::AxialZ,
        Some("axial-x") => Geometry::AxialX,
        Some("custom") => {
            let r0 = parsed.r0.ok_or(Error::ConfigValue {
                key: "r0".into(),
                msg: "required for initial = custom".into(),
            })?;
            let p0 = parsed.p0.unwrap_or([0.0; 3]);
            let spin_axis = parsed.spin_axis.ok_or(Error::ConfigValue {
                key: "spin_axis".into(),
                msg: "required for initial = custom".into(),
            })?;
            let norm = vec3::norm(spin_axis);
            if norm < 1e-12 {
                return Err(Error::ConfigValue {
                    key: "spin_axis".into(),
                    msg: "must be a nonzero vector".into(),
                });
            }
            Geometry::Custom {
                r0,
                p0,
                spin_axis: vec3::scale(spin_axis, 1.0 / norm),
            }
        }
        Some(other) => {
            return Err(Error::ConfigValue {
                key: "initial".into(),
                msg: format!("unknown geometry `{other}`"),
            })
        }
    };
    Ok(RunConfig {
        n,
        kappa,
        frozen,
        lmax_policy,
        geometry,
        grid_points: parsed.grid_points.unwrap_or(161),
        grid_points_explicit: parsed.grid_points.is_some(),
        grid_extent: parsed.grid_extent,
        times: parsed.times.clone(),
        out_dir: parsed.out.clone().unwrap_or_else(|| PathBuf::from("out")),
    })
}

/// Resolved run record: config echo, derived quantities, emitted files with
/// their SHA-256 checksums.
#[derive(Clone, Debug)]
pub struct RunManifest {
    pub prefix: String,
    pub resolved: Vec<(String, String)>,
    pub derived: Vec<(String, String)>,
    pub notes: Vec<(String, String)>,
    /// `(file name, sha256 hex)` in emission order.
    pub files: Vec<(String, String)>,
    pub out_dir: PathBuf,
}

impl RunManifest {
    fn new(prefix: &str, cfg: &RunConfig) -> Self {
        let mut resolved = vec![
            ("N".to_string(), fmt17(cfg.n)),
            ("kappa".to_string(), fmt17(cfg.kappa)),
            ("frozen".to_string(), cfg.frozen.to_string()),
            (
                "lmax_policy".to_string(),
                match cfg.lmax_policy {
                    LmaxPolicy::Auto(e) => format!("auto({})", fmt17(e)),
                    LmaxPolicy::Fixed(l) => format!("fixed({l})"),
                },
            ),
            (
                "initial".to_string(),
                match cfg.geometry {
                    Geometry::AxialZ => "axial-z".to_string(),
                    Geometry::AxialX => "axial-x".to_string(),
                    Geometry::Custom { r0, p0, spin_axis } => format!(
                        "custom r0=({},{},{}) p0=({},{},{}) spin=({},{},{})",
                        fmt17(r0[0]),
                        fmt17(r0[1]),
                        fmt17(r0[2]),
                        fmt17(p0[0]),
                        fmt17(p0[1]),
                        fmt17(p0[2]),
                        fmt17(spin_axis[0]),
                        fmt17(spin_axis[1]),
                        fmt17(spin_axis[2])
                    ),
                },
            ),
            ("grid_points".to_string(), cfg.grid_points.to_string()),
        ];
        if let Some(e) = cfg.grid_extent {
            resolved.push(("grid_extent".to_string(), fmt17(e)));
        }
        RunManifest {
            prefix: prefix.to_string(),
            resolved,
            derived: Vec::new(),
            notes: Vec::new(),
            files: Vec::new(),
            out_dir: cfg.out_dir.clone(),
        }
    }

    fn emit(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.out_dir.join(name);
        fs::write(&path, content)?;
        let digest = Sha256::digest(content.as_bytes());
        self.files.push((name.to_string(), hex(&digest)));
        Ok(())
    }

    /// Re-reads every emitted file and checks its checksum.
    pub fn verify_checksums(&self) -> Result<()> {
        for (name, expected) in &self.files {
            let bytes = fs::read(self.out_dir.join(name))?;
            let digest = hex(&Sha256::digest(&bytes));
            if digest != *expected {
                return Err(Error::Io(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("checksum mismatch for {name}"),
                )));
            }
        }
        Ok(())
    }

    pub fn manifest_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# simulate run manifest: {}", self.prefix);
        let _ = writeln!(s, "# resolved config:");
        for (k, v) in &self.resolved {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s, "# derived:");
        for (k, v) in &self.derived {
            let _ = writeln!(s, "{k} = {v}");
        }
        for (k, v) in &self.notes {
            let _ = writeln!(s, "# note: {k} = {v}");
        }
        let _ = writeln!(s, "# files (sha256  name):");
        for (name, digest) in &self.files {
            let _ = writeln!(s, "{digest}  {name}");
        }
        s
    }

    fn write_manifest(&mut self) -> Result<PathBuf> {
        let name = format!("{}_manifest.txt", self.prefix);
        let path = self.out_dir.join(&name);
        fs::write(&path, self.manifest_text())?;
        Ok(path)
    }
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// A spin run prepared in the canonical frame: the physical setup, the
/// canonical-frame coefficient table, and the rotation mapping the frames.
pub struct SpinSetup {
    pub phys_spec: PacketSpec,
    pub spin_axis_phys: [f64; 3],
    pub table: CoefficientTable,
    pub params: SpinOrbitParams,
    /// Maps canonical coordinates to physical ones (`rot * z_hat = spin`).
    pub rot: [[f64; 3]; 3],
    /// Maps physical coordinates to canonical ones.
    pub rot_t: [[f64; 3]; 3],
    pub lmax: u32,
}

impl SpinSetup {
    /// Canonical-frame evaluation of the physical setup at a physical point.
    pub fn amplitude(
        &self,
        fg: &FgTable,
        p_phys: [f64; 3],
        t: f64,
    ) -> Result<crate::spinorbit::SpinorAmplitude> {
        evolve_spinor_precomputed(
            &self.table,
            &self.params,
            fg,
            vec3::mat_vec(&self.rot_t, p_phys),
            t,
        )
    }

    pub fn density_field(&self, grid: &GridSpec, t: f64, label: &str) -> Result<DensityField> {
        grid.validate()?;
        let fg = FgTable::build(self.table.lmax(), t, self.params.kappa);
        let mut values = Vec::with_capacity(grid.point_count());
        for p in grid.points() {
            values.push(self.amplitude(&fg, p, t)?.probability_density());
        }
        Ok(DensityField {
            grid: grid.clone(),
            values,
            meta: self.meta(label, t),
        })
    }

    pub fn spin_field_pair(
        &self,
        grid: &GridSpec,
        t: f64,
        axis_phys: [f64; 3],
        label: &str,
    ) -> Result<(DensityField, DensityField)> {
        grid.validate()?;
        let axis_canon = vec3::mat_vec(&self.rot_t, axis_phys);
        let fg = FgTable::build(self.table.lmax(), t, self.params.kappa);
        let n = grid.point_count();
        let mut plus = Vec::with_capacity(n);
        let mut minus = Vec::with_capacity(n);
        for p in grid.points() {
            let amp = self.amplitude(&fg, p, t)?;
            let (a, b) = spin_project(&amp, axis_canon)?;
            plus.push(a.norm_sqr());
            minus.push(b.norm_sqr());
        }
        let mut meta_plus = self.meta(&format!("{label}_plus"), t);
        let mut meta_minus = self.meta(&format!("{label}_minus"), t);
        let axis_str = format!(
            "{} {} {}",
            fmt17(axis_phys[0]),
            fmt17(axis_phys[1]),
            fmt17(axis_phys[2])
        );
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

    fn meta(&self, label: &str, t: f64) -> FieldMeta {
        let mut meta = FieldMeta::new(label, &self.phys_spec, &self.params, t, self.lmax);
        meta.extras.push((
            "spin_axis_initial".into(),
            format!(
                "{} {} {}",
                fmt17(self.spin_axis_phys[0]),
                fmt17(self.spin_axis_phys[1]),
                fmt17(self.spin_axis_phys[2])
            ),
        ));
        meta
    }

    /// Spin expectation in the physical frame.
    pub fn norm_and_spin_phys(&self, quad: &QuadratureSpec, t: f64) -> Result<(f64, [f64; 3])> {
        let (norm, sigma_canon) =
            crate::observables::norm_and_spin(&self.table, &self.params, quad, t)?;
        Ok((norm, vec3::mat_vec(&self.rot, sigma_canon)))
    }
}

/// Builds the canonical-frame machinery for a resolved config. An explicit
/// `spin_override` replaces the geometry's default spin axis (used by fig6,
/// where the spin lies perpendicular to the trajectory).
pub fn build_setup(cfg: &RunConfig, spin_override: Option<[f64; 3]>) -> Result<SpinSetup> {
    let r0_len = (2.0 * cfg.n).sqrt();
    let (phys_spec, default_spin) = match cfg.geometry {
        Geometry::AxialZ => (PacketSpec::axial(cfg.n), [0.0, 0.0, 1.0]),
        Geometry::AxialX => (
            PacketSpec::new([r0_len, 0.0, 0.0], [0.0; 3]),
            [1.0, 0.0, 0.0],
        ),
        Geometry::Custom { r0, p0, spin_axis } => (PacketSpec::new(r0, p0), spin_axis),
    };
    let spin_axis = spin_override.unwrap_or(default_spin);
    let (canon_spec, rot) = rotate_setup(&phys_spec, spin_axis)?;
    let lmax = match cfg.lmax_policy {
        LmaxPolicy::Fixed(l) => l,
        LmaxPolicy::Auto(eps) => truncation_lmax(&canon_spec, eps)?,
    };
    let table = coefficients(&canon_spec, lmax)?;
    let params = SpinOrbitParams::new(cfg.kappa, cfg.frozen)?;
    Ok(SpinSetup {
        phys_spec,
        spin_axis_phys: spin_axis,
        rot_t: vec3::transpose(&rot),
        rot,
        table,
        params,
        lmax,
    })
}

fn frame_labels(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("{i:02}")
            }
        })
        .collect()
}

/// The symmetry axis of the configured geometry, for cut planes. The fig4
/// and fig5 pipelines require an axial geometry.
fn symmetry_axis(cfg: &RunConfig) -> Result<(Axis, f64)> {
    match cfg.geometry {
        Geometry::AxialZ => Ok((Axis::Z, -(2.0 * cfg.n).sqrt())),
        Geometry::AxialX => Ok((Axis::X, (2.0 * cfg.n).sqrt())),
        Geometry::Custom { .. } => Err(Error::ConfigValue {
            key: "initial".into(),
            msg: "figure pipelines support axial-z or axial-x geometries".into(),
        }),
    }
}

/// Runs a figure pipeline, emits its dataset files plus a manifest, and
/// verifies every checksum.
pub fn run_figure(fig: Figure, parsed: &ParsedConfig) -> Result<RunManifest> {
    let cfg = resolve(parsed, Some(fig))?;
    fs::create_dir_all(&cfg.out_dir)?;
    let mut manifest = RunManifest::new(fig.name(), &cfg);
    let r0_len = (2.0 * cfg.n).sqrt();
    manifest.derived.push(("r0".into(), fmt17(r0_len)));
    manifest.derived.push(("T".into(), fmt17(PERIOD)));
    manifest
        .derived
        .push(("T_ls".into(), fmt17(PERIOD / cfg.kappa)));

    let result = match fig {
        Figure::Fig1 | Figure::Fig2 => run_radial_figure(fig, &cfg, &mut manifest),
        Figure::Fig3 => run_fig3(&cfg, &mut manifest, "fig3"),
        Figure::Fig4 => run_fig4(&cfg, &mut manifest),
        Figure::Fig5 => run_fig5(&cfg, &mut manifest),
        Figure::Fig6 => run_fig6(&cfg, &mut manifest),
    };
    if let Err(err) = result {
        // leave a partial manifest behind for whatever was emitted
        manifest.notes.push(("aborted".into(), format!("{err}")));
        let _ = manifest.write_manifest();
        return Err(err);
    }

    manifest.write_manifest()?;
    manifest.verify_checksums()?;
    Ok(manifest)
}

/// fig1: 8 radial profiles at 30 times in [0, T/2]; fig2: 16 profiles at
/// t = 0 with the peak-intensity ordering recorded.
fn run_radial_figure(fig: Figure, cfg: &RunConfig, manifest: &mut RunManifest) -> Result<()> {
    let spec = match cfg.geometry {
        Geometry::AxialZ => PacketSpec::axial(cfg.n),
        _ => {
            return Err(Error::ConfigValue {
                key: "initial".into(),
                msg: "radial profiles are defined for the axial-z geometry".into(),
            })
        }
    };
    let r0_len = spec.radial_amplitude();
    let extent = cfg.grid_extent.unwrap_or(r0_len + 4.0);
    let n_samples = if cfg.grid_points_explicit {
        cfg.grid_points
    } else {
        481
    };
    let samples: Vec<f64> = (0..n_samples)
        .map(|i| extent * i as f64 / (n_samples - 1) as f64)
        .collect();
    let params = SpinOrbitParams::new(cfg.kappa, false)?;

    let (l_count, times): (u32, Vec<f64>) = match fig {
        Figure::Fig1 => {
            let fracs: Vec<f64> = cfg
                .times
                .clone()
                .unwrap_or_else(|| (0..30).map(|i| 0.5 * i as f64 / 29.0).collect());
            (8, fracs.iter().map(|f| f * PERIOD).collect())
        }
        _ => (16, vec![0.0]),
    };
    manifest
        .derived
        .push(("profiles".into(), l_count.to_string()));
    manifest
        .derived
        .push(("times".into(), times.len().to_string()));

    let mut peaks = Vec::new();
    for l in 0..l_count {
        for (ti, &t) in times.iter().enumerate() {
            let values = crate::observables::radial_density(l, &spec, t, &samples)?;
            if fig == Figure::Fig2 {
                peaks.push(values.iter().cloned().fold(0.0, f64::max));
            }
            let grid = GridSpec::Radial {
                r_max: extent,
                n: n_samples,
            };
            let mut meta = FieldMeta::new(
                &format!("{} radial profile", fig.name()),
                &spec,
                &params,
                t,
                l,
            );
            meta.extras.push(("l".into(), l.to_string()));
            let field = DensityField { grid, values, meta };
            let name = match fig {
                Figure::Fig1 => format!("fig1_l{l}_t{ti:02}.dat"),
                _ => format!("fig2_l{l:02}.dat"),
            };
            manifest.emit(&name, &field.to_text())?;
        }
    }

    match fig {
        Figure::Fig1 => {
            // Position of the radial maximum at t = T/4 for the extreme l.
            for l in [0u32, 7] {
                let values = crate::observables::radial_density(l, &spec, 0.25 * PERIOD, &samples)?;
                let argmax = values
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| samples[i])
                    .unwrap_or(0.0);
                manifest
                    .notes
                    .push((format!("argmax_r_quarter_period_l{l}"), fmt17(argmax)));
            }
        }
        Figure::Fig2 => {
            let increasing = (0..4).all(|l| peaks[l + 1] > peaks[l]);
            let decreasing = (5..15).all(|l| peaks[l + 1] < peaks[l]);
            let argmax = peaks
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            manifest.notes.push((
                "peak_ordering".into(),
                format!(
                    "increasing_l0_to_l4={increasing} decreasing_l5_to_l15={decreasing} argmax_l={argmax}"
                ),
            ));
            for (l, p) in peaks.iter().enumerate() {
                manifest.notes.push((format!("peak_l{l}"), fmt17(*p)));
            }
        }
        _ => {}
    }
    Ok(())
}

/// Caption times of the fig3/fig4/fig5 frames, as fractions of `T_ls`.
pub const FIG3_FRACTIONS: [f64; 6] = [0.0, 0.125, 0.25, 0.375, 15.0 / 32.0, 0.5];

/// fig3: six density frames on the plane containing the trajectory axis.
fn run_fig3(cfg: &RunConfig, manifest: &mut RunManifest, prefix: &str) -> Result<()> {
    let setup = build_setup(cfg, None)?;
    symmetry_axis(cfg)?;
    let r0_len = (2.0 * cfg.n).sqrt();
    let extent = cfg.grid_extent.unwrap_or(r0_len + 4.0);
    let fracs = cfg.times.clone().unwrap_or_else(|| FIG3_FRACTIONS.to_vec());
    let labels = frame_labels(fracs.len());
    let t_ls = setup.params.t_ls();
    manifest
        .derived
        .push(("lmax".into(), setup.lmax.to_string()));
    let grid = GridSpec::centered_plane(Axis::Y, 0.0, extent, cfg.grid_points);
    for (frac, label) in fracs.iter().zip(&labels) {
        let t = frac * t_ls;
        let mut field = setup.density_field(&grid, t, &format!("{prefix} frame {label}"))?;
        field
            .meta
            .extras
            .push(("t_fraction_of_T_ls".into(), fmt17(*frac)));
        manifest.emit(&format!("{prefix}_frame_{label}.dat"), &field.to_text())?;
    }
    Ok(())
}

/// Locates the cut-plane offset along the symmetry axis that maximizes the
/// in-plane density, scanning offsets against an in-plane radial ray
/// (cylindrical symmetry of the axial setups makes one ray sufficient).
fn locate_cut_offset(setup: &SpinSetup, axis: Axis, t: f64, r0_len: f64) -> Result<f64> {
    let fg = FgTable::build(setup.table.lmax(), t, setup.params.kappa);
    let (u_axis, _) = axis.in_plane();
    let n_off = 201;
    let n_ray = 81;
    let mut best = (f64::MIN, 0.0);
    for i in 0..n_off {
        let offset = -(r0_len + 1.0) + 2.0 * (r0_len + 1.0) * i as f64 / (n_off - 1) as f64;
        let mut peak = f64::MIN;
        for j in 0..n_ray {
            let rho = (r0_len + 2.0) * j as f64 / (n_ray - 1) as f64;
            let mut p = [0.0; 3];
            p[axis.index()] = offset;
            p[u_axis.index()] = rho;
            let d = setup.amplitude(&fg, p, t)?.probability_density();
            if d > peak {
                peak = d;
            }
        }
        if peak > best.0 {
            best = (peak, offset);
        }
    }
    Ok(best.1)
}

/// fig4: six cut planes perpendicular to the trajectory axis, offsets
/// located empirically (the caption's `z_i = z_0 cos t_i` values are
/// recorded alongside for comparison).
fn run_fig4(cfg: &RunConfig, manifest: &mut RunManifest) -> Result<()> {
    let setup = build_setup(cfg, None)?;
    let (axis, z0) = symmetry_axis(cfg)?;
    let r0_len = (2.0 * cfg.n).sqrt();
    let extent = cfg.grid_extent.unwrap_or(r0_len + 4.0);
    let fracs = cfg.times.clone().unwrap_or_else(|| FIG3_FRACTIONS.to_vec());
    let labels = frame_labels(fracs.len());
    let t_ls = setup.params.t_ls();
    manifest
        .derived
        .push(("lmax".into(), setup.lmax.to_string()));
    for (frac, label) in fracs.iter().zip(&labels) {
        let t = frac * t_ls;
        let offset = locate_cut_offset(&setup, axis, t, r0_len)?;
        let reference = z0 * t.cos();
        let grid = GridSpec::centered_cut(axis, offset, extent, cfg.grid_points);
        let mut field = setup.density_field(&grid, t, &format!("fig4 frame {label}"))?;
        field
            .meta
            .extras
            .push(("t_fraction_of_T_ls".into(), fmt17(*frac)));
        field
            .meta
            .extras
            .push(("offset_located".into(), fmt17(offset)));
        field
            .meta
            .extras
            .push(("offset_cosine_reference".into(), fmt17(reference)));
        manifest.emit(&format!("fig4_frame_{label}.dat"), &field.to_text())?;
        manifest.notes.push((
            format!("frame_{label}_offset"),
            format!(
                "located={} cosine_reference={}",
                fmt17(offset),
                fmt17(reference)
            ),
        ));
    }
    Ok(())
}

/// fig5: the fig3 frames plus a ring-metrics summary (centers, radii and
/// the sphere check `sqrt(|center|^2 + radius^2)`).
fn run_fig5(cfg: &RunConfig, manifest: &mut RunManifest) -> Result<()> {
    let setup = build_setup(cfg, None)?;
    symmetry_axis(cfg)?;
    let r0_len = (2.0 * cfg.n).sqrt();
    let extent = cfg.grid_extent.unwrap_or(r0_len + 4.0);
    let fracs = cfg.times.clone().unwrap_or_else(|| FIG3_FRACTIONS.to_vec());
    let labels = frame_labels(fracs.len());
    let t_ls = setup.params.t_ls();
    manifest
        .derived
        .push(("lmax".into(), setup.lmax.to_string()));
    let grid = GridSpec::centered_plane(Axis::Y, 0.0, extent, cfg.grid_points);
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "# columns = t_fraction t center_x center_y center_z ring_radius peak sphere_radius"
    );
    for (frac, label) in fracs.iter().zip(&labels) {
        let t = frac * t_ls;
        let mut field = setup.density_field(&grid, t, &format!("fig5 frame {label}"))?;
        field
            .meta
            .extras
            .push(("t_fraction_of_T_ls".into(), fmt17(*frac)));
        manifest.emit(&format!("fig5_frame_{label}.dat"), &field.to_text())?;
        let metrics = ring_metrics(&field)?;
        let sphere = (vec3::dot(metrics.center, metrics.center)
            + metrics.ring_radius * metrics.ring_radius)
            .sqrt();
        let _ = writeln!(
            summary,
            "{} {} {} {} {} {} {} {}",
            fmt17(*frac),
            fmt17(t),
            fmt17(metrics.center[0]),
            fmt17(metrics.center[1]),
            fmt17(metrics.center[2]),
            fmt17(metrics.ring_radius),
            fmt17(metrics.peak),
            fmt17(sphere)
        );
    }
    manifest.emit("fig5_ring_metrics.dat", &summary)?;
    Ok(())
}

/// Caption times of the fig6 frames, as fractions of `T_ls`.
pub const FIG6_FRACTIONS: [f64; 5] = [0.0, 0.125, 0.25, 0.375, 0.5];

/// fig6: spin-component decomposition of the packet along an axis
/// perpendicular to the trajectory, spin initially along that axis; five
/// frame triples (minus / plus / total).
fn run_fig6(cfg: &RunConfig, manifest: &mut RunManifest) -> Result<()> {
    let (axis, _) = symmetry_axis(cfg)?;
    // Projection axis perpendicular to the trajectory.
    let proj_axis = match axis {
        Axis::X => [0.0, 0.0, 1.0],
        Axis::Z => [1.0, 0.0, 0.0],
        Axis::Y => [0.0, 0.0, 1.0],
    };
    let setup = build_setup(cfg, Some(proj_axis))?;
    let r0_len = (2.0 * cfg.n).sqrt();
    let extent = cfg.grid_extent.unwrap_or(r0_len + 4.0);
    let fracs = cfg.times.clone().unwrap_or_else(|| FIG6_FRACTIONS.to_vec());
    let labels = frame_labels(fracs.len());
    let t_ls = setup.params.t_ls();
    manifest
        .derived
        .push(("lmax".into(), setup.lmax.to_string()));
    manifest.notes.push((
        "projection_axis".into(),
        format!(
            "{} {} {}",
            fmt17(proj_axis[0]),
            fmt17(proj_axis[1]),
            fmt17(proj_axis[2])
        ),
    ));
    let grid = GridSpec::centered_plane(Axis::Y, 0.0, extent, cfg.grid_points);
    for (frac, label) in fracs.iter().zip(&labels) {
        let t = frac * t_ls;
        let (plus, minus) =
            setup.spin_field_pair(&grid, t, proj_axis, &format!("fig6 frame {label}"))?;
        let total = setup.density_field(&grid, t, &format!("fig6 frame {label} total"))?;
        manifest.emit(&format!("fig6_frame_{label}_minus.dat"), &minus.to_text())?;
        manifest.emit(&format!("fig6_frame_{label}_plus.dat"), &plus.to_text())?;
        manifest.emit(&format!("fig6_frame_{label}_total.dat"), &total.to_text())?;
    }
    Ok(())
}

/// Flags accepted by the eval subcommands.
#[derive(Clone, Debug, Default)]
pub struct EvalFlags {
    pub l: Option<u32>,
    pub m: Option<i32>,
    pub t: Option<f64>,
    pub grid: Option<String>,
    pub axis: Option<String>,
    pub lmax: Option<u32>,
}

fn parse_axis_flag(s: &str) -> Result<[f64; 3]> {
    match s {
        "x" => Ok([1.0, 0.0, 0.0]),
        "y" => Ok([0.0, 1.0, 0.0]),
        "z" => Ok([0.0, 0.0, 1.0]),
        other => {
            let v = parse_triple("axis", other).map_err(|_| {
                Error::Usage(format!(
                    "--axis expects x|y|z or three comma-separated components, got `{other}`"
                ))
            })?;
            let n = vec3::norm(v);
            if n < 1e-12 {
                return Err(Error::Usage("--axis must be a nonzero vector".into()));
            }
            Ok(vec3::scale(v, 1.0 / n))
        }
    }
}

/// `--grid` syntax:
/// `plane:<axis>:<offset>:<n>[:<extent>]` | `cut:<axis>:<offset>:<n>[:<extent>]`
/// | `radial:<n>[:<rmax>]` | `line:<axis>:<n>[:<extent>]`.
pub fn parse_grid_flag(s: &str, default_extent: f64) -> Result<GridSpec> {
    let usage = |msg: &str| Error::Usage(format!("--grid `{s}`: {msg}"));
    let parts: Vec<&str> = s.split(':').collect();
    let parse_f = |v: &str, what: &str| -> Result<f64> {
        v.parse()
            .map_err(|_| usage(&format!("{what} `{v}` is not a number")))
    };
    let parse_n = |v: &str| -> Result<usize> {
        v.parse()
            .map_err(|_| usage(&format!("count `{v}` is not a positive integer")))
    };
    match parts.first().copied() {
        Some("plane") | Some("cut") => {
            if parts.len() < 4 || parts.len() > 5 {
                return Err(usage("expected plane:<axis>:<offset>:<n>[:<extent>]"));
            }
            let normal: Axis = parts[1]
                .parse()
                .map_err(|_| usage(&format!("unknown axis `{}`", parts[1])))?;
            let offset = parse_f(parts[2], "offset")?;
            let n = parse_n(parts[3])?;
            let extent = if parts.len() == 5 {
                parse_f(parts[4], "extent")?
            } else {
                default_extent
            };
            Ok(if parts[0] == "plane" {
                GridSpec::centered_plane(normal, offset, extent, n)
            } else {
                GridSpec::centered_cut(normal, offset, extent, n)
            })
        }
        Some("radial") => {
            if parts.len() < 2 || parts.len() > 3 {
                return Err(usage("expected radial:<n>[:<rmax>]"));
            }
            let n = parse_n(parts[1])?;
            let r_max = if parts.len() == 3 {
                parse_f(parts[2], "rmax")?
            } else {
                default_extent
            };
            Ok(GridSpec::Radial { r_max, n })
        }
        Some("line") => {
            if parts.len() < 3 || parts.len() > 4 {
                return Err(usage("expected line:<axis>:<n>[:<extent>]"));
            }
            let axis: Axis = parts[1]
                .parse()
                .map_err(|_| usage(&format!("unknown axis `{}`", parts[1])))?;
            let n = parse_n(parts[2])?;
            let extent = if parts.len() == 4 {
                parse_f(parts[3], "extent")?
            } else {
                default_extent
            };
            Ok(GridSpec::Line {
                axis,
                range: (-extent, extent),
                n,
            })
        }
        _ => Err(usage(
            "expected plane:... | cut:... | radial:... | line:...",
        )),
    }
}

/// Runs an eval subcommand. `norm` prints to standard output and emits no
/// files; everything else writes datasets plus a manifest.
pub fn run_eval(what: EvalWhat, parsed: &ParsedConfig, flags: &EvalFlags) -> Result<RunManifest> {
    let cfg = resolve(parsed, None)?;
    let r0_len = (2.0 * cfg.n).sqrt();
    let default_extent = cfg.grid_extent.unwrap_or(r0_len + 4.0);
    let t = flags.t.unwrap_or(0.0);
    let prefix = format!("eval_{}", what.name());
    let mut manifest = RunManifest::new(&prefix, &cfg);
    manifest.derived.push(("r0".into(), fmt17(r0_len)));
    manifest.derived.push(("t".into(), fmt17(t)));
    if what != EvalWhat::Norm {
        fs::create_dir_all(&cfg.out_dir)?;
    }

    match what {
        EvalWhat::Packet => {
            let setup = build_setup(&cfg, None)?;
            let grid = parse_grid_flag(
                flags.grid.as_deref().unwrap_or("plane:y:0:161"),
                default_extent,
            )?;
            grid.validate()?;
            let params = SpinOrbitParams::new(cfg.kappa, cfg.frozen)?;
            let mut values = Vec::with_capacity(grid.point_count());
            for p in grid.points() {
                values.push(setup.phys_spec.gaussian_packet(p, t).norm_sqr());
            }
            let field = DensityField {
                grid,
                values,
                meta: FieldMeta::new("packet density", &setup.phys_spec, &params, t, 0),
            };
            manifest.emit("eval_packet.dat", &field.to_text())?;
        }
        EvalWhat::PartialWave => {
            let l = flags
                .l
                .ok_or_else(|| Error::Usage("partialwave requires --l".into()))?;
            let m = flags.m.unwrap_or(0);
            let idx = crate::oscillator::WaveIndex::new(l, m)?;
            let setup = build_setup(&cfg, None)?;
            let grid = parse_grid_flag(
                flags.grid.as_deref().unwrap_or("plane:y:0:161"),
                default_extent,
            )?;
            grid.validate()?;
            let params = SpinOrbitParams::new(cfg.kappa, cfg.frozen)?;
            let mut values = Vec::with_capacity(grid.point_count());
            for p in grid.points() {
                values.push(setup.phys_spec.partial_wave(idx, p, t)?.norm_sqr());
            }
            let mut meta = FieldMeta::new("partial wave density", &setup.phys_spec, &params, t, l);
            meta.extras.push(("l".into(), l.to_string()));
            meta.extras.push(("m".into(), m.to_string()));
            let field = DensityField { grid, values, meta };
            manifest.emit(&format!("eval_partialwave_l{l}_m{m}.dat"), &field.to_text())?;
        }
        EvalWhat::Coeffs => {
            let setup = build_setup(&cfg, None)?;
            let lmax = match flags.lmax {
                Some(l) => l,
                None => setup.lmax,
            };
            let table = coefficients(&setup.phys_spec, lmax)?;
            let mut buf = Vec::new();
            let eps = match cfg.lmax_policy {
                LmaxPolicy::Auto(e) => Some(e),
                LmaxPolicy::Fixed(_) => None,
            };
            table.write_to(&mut buf, eps).map_err(Error::Io)?;
            manifest.emit("eval_coeffs.dat", &String::from_utf8_lossy(&buf))?;
            manifest.derived.push(("lmax".into(), lmax.to_string()));
        }
        EvalWhat::Density => {
            let setup = build_setup(&cfg, None)?;
            let grid = parse_grid_flag(
                flags.grid.as_deref().unwrap_or("plane:y:0:161"),
                default_extent,
            )?;
            let field = setup.density_field(&grid, t, "eval density")?;
            manifest.emit("eval_density.dat", &field.to_text())?;
            manifest
                .derived
                .push(("lmax".into(), setup.lmax.to_string()));
        }
        EvalWhat::Spin => {
            let setup = build_setup(&cfg, None)?;
            let axis = parse_axis_flag(flags.axis.as_deref().unwrap_or("z"))?;
            let grid = parse_grid_flag(
                flags.grid.as_deref().unwrap_or("plane:y:0:161"),
                default_extent,
            )?;
            let (plus, minus) = setup.spin_field_pair(&grid, t, axis, "eval spin")?;
            manifest.emit("eval_spin_plus.dat", &plus.to_text())?;
            manifest.emit("eval_spin_minus.dat", &minus.to_text())?;
            manifest
                .derived
                .push(("lmax".into(), setup.lmax.to_string()));
        }
        EvalWhat::Norm => {
            let setup = build_setup(&cfg, None)?;
            let quad = QuadratureSpec::default_for(&setup.table);
            let (norm, sigma) = setup.norm_and_spin_phys(&quad, t)?;
            println!(
                "norm={} sx={} sy={} sz={}",
                fmt17(norm),
                fmt17(sigma[0]),
                fmt17(sigma[1]),
                fmt17(sigma[2])
            );
            return Ok(manifest);
        }
    }
    manifest.write_manifest()?;
    manifest.verify_checksums()?;
    Ok(manifest)
}

/// Reads, parses and override-patches a config file (if any).
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<ParsedConfig> {
    let mut parsed = match path {
        Some(p) => parse_config(&fs::read_to_string(p)?)?,
        None => ParsedConfig::default(),
    };
    apply_overrides(&mut parsed, overrides)?;
    Ok(parsed)
}
