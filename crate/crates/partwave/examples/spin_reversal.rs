//! Norm conservation and the near-reversal of the spin expectation over
//! half a spin-orbit period, frozen and unfrozen.

use partwave::decomposition::{coefficients, truncation_lmax};
use partwave::observables::{norm_and_spin, QuadratureSpec};
use partwave::oscillator::PacketSpec;
use partwave::spinorbit::SpinOrbitParams;

fn main() {
    let spec = PacketSpec::axial(20.0);
    let lmax = truncation_lmax(&spec, 1e-10).unwrap();
    let table = coefficients(&spec, lmax).unwrap();
    let quad = QuadratureSpec::default_for(&table);

    for frozen in [true, false] {
        let params = SpinOrbitParams::new(1.0, frozen).unwrap();
        let t_ls = params.t_ls();
        println!("N = 20, kappa = 1, frozen = {frozen} (T_ls = {t_ls:.4}):");
        println!("  t/T_ls    norm - 1      <sigma_z>");
        for &frac in &[0.0, 0.125, 0.25, 0.375, 0.5] {
            let (norm, sigma) = norm_and_spin(&table, &params, &quad, frac * t_ls).unwrap();
            println!("  {frac:<7.3}  {:+.3e}   {:+.6}", norm - 1.0, sigma[2]);
        }
        println!();
    }
    println!("the spin is approximately reversed at half the spin-orbit period;");
    println!("the l = 0 weight (which carries no spin-orbit torque) sets the gap to -1.");
}
