//! Spin-component decomposition of the N = 4 packet along an axis
//! perpendicular to the trajectory (the fig6 setup): the packet starts
//! fully polarized along the projection axis, and the antiparallel
//! component grows as the torus forms.

use partwave::cli::{build_setup, resolve, Figure, ParsedConfig};
use partwave::observables::{Axis, GridSpec};

fn main() {
    let parsed = ParsedConfig::default();
    let cfg = resolve(&parsed, Some(Figure::Fig6)).unwrap();
    // trajectory along x, initial spin and projection axis along z
    let setup = build_setup(&cfg, Some([0.0, 0.0, 1.0])).unwrap();
    let r0 = (2.0 * cfg.n).sqrt();
    let t_ls = setup.params.t_ls();
    println!(
        "N = {}, r0 = {r0:.4}, lmax = {}, projection axis z (trajectory x)\n",
        cfg.n, setup.lmax
    );

    let grid = GridSpec::centered_plane(Axis::Y, 0.0, r0 + 4.0, 81);
    println!("  t/T_ls   sum(minus)/sum(total)   max |plus+minus-total|/total");
    for &frac in &[0.0, 0.125, 0.25, 0.375, 0.5] {
        let t = frac * t_ls;
        let (plus, minus) = setup
            .spin_field_pair(&grid, t, [0.0, 0.0, 1.0], "demo")
            .unwrap();
        let total = setup.density_field(&grid, t, "demo").unwrap();
        let minus_mass: f64 = minus.values.iter().sum();
        let total_mass: f64 = total.values.iter().sum();
        let worst = plus
            .values
            .iter()
            .zip(&minus.values)
            .zip(&total.values)
            .map(|((p, m), d)| (p + m - d).abs() / d.max(1e-300))
            .fold(0.0, f64::max);
        println!(
            "  {frac:<7.3}  {:>18.6}   {worst:.3e}",
            minus_mass / total_mass
        );
    }
}
