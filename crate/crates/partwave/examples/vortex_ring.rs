//! Frozen-oscillator spin-orbit evolution of the N = 20 packet: the packet
//! rolls into a vortex ring of radius ~ r0 at a quarter of the spin-orbit
//! period and reassembles at the antipode at half the period, with ring
//! centers staying on a sphere of radius r0.

use partwave::decomposition::{coefficients, truncation_lmax};
use partwave::observables::{density_grid, ring_metrics, Axis, GridSpec};
use partwave::oscillator::PacketSpec;
use partwave::spinorbit::SpinOrbitParams;

fn main() {
    let spec = PacketSpec::axial(20.0);
    let r0 = spec.radial_amplitude();
    let lmax = truncation_lmax(&spec, 1e-10).unwrap();
    let table = coefficients(&spec, lmax).unwrap();
    let params = SpinOrbitParams::new(1.0, true).unwrap();
    let t_ls = params.t_ls();
    println!("N = 20, r0 = {r0:.4}, lmax = {lmax}, frozen oscillator, kappa = 1\n");

    let grid = GridSpec::centered_plane(Axis::Y, 0.0, r0 + 4.0, 121);
    println!("  t/T_ls   center_z   ring radius   peak        sqrt(|c|^2 + rr^2) / r0");
    for &frac in &[0.0, 0.125, 0.25, 0.375, 15.0 / 32.0, 0.5] {
        let field = density_grid(&table, &params, &grid, frac * t_ls).unwrap();
        let m = ring_metrics(&field).unwrap();
        let sphere =
            (m.center.iter().map(|c| c * c).sum::<f64>() + m.ring_radius * m.ring_radius).sqrt();
        println!(
            "  {frac:<7.4}  {:+8.4}   {:>9.4}   {:.4e}   {:.4}",
            m.center[2],
            m.ring_radius,
            m.peak,
            sphere / r0
        );
    }

    // face-on view: cut through the ring center at the quarter period
    let t = 0.25 * t_ls;
    let plane_field = density_grid(&table, &params, &grid, t).unwrap();
    let center_z = ring_metrics(&plane_field).unwrap().center[2];
    let cut = GridSpec::centered_cut(Axis::Z, center_z, r0 + 4.0, 121);
    let m = ring_metrics(&density_grid(&table, &params, &cut, t).unwrap()).unwrap();
    println!(
        "\ncut through z = {center_z:.3} at T_ls/4: ring radius = {:.4} = {:.4} r0",
        m.ring_radius,
        m.ring_radius / r0
    );
}
