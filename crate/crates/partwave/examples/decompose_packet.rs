//! Decomposition of a Gaussian coherent packet into time-dependent partial
//! waves: weights, truncation levels, and reconstruction accuracy against
//! the closed-form packet.

use std::f64::consts::PI;

use partwave::decomposition::{coefficients, truncation_lmax};
use partwave::oscillator::PacketSpec;

fn main() {
    let n = 20.0;
    let spec = PacketSpec::axial(n);
    println!(
        "axial packet: N = {n}, r0 = {:.6}, R0 = {:.6}",
        spec.radial_amplitude(),
        spec.big_r0().re
    );

    // weights against the closed form (-1)^l 2 pi^{-1/4} e^{-N/2} sqrt(2l+1)
    let table = coefficients(&spec, 8).unwrap();
    println!("\n  l    C_l0             closed form");
    for l in 0..=8u32 {
        let closed = if l % 2 == 0 { 1.0 } else { -1.0 }
            * 2.0
            * PI.powf(-0.25)
            * (-0.5 * n).exp()
            * (2.0 * l as f64 + 1.0).sqrt();
        println!("  {l}   {:+.9e}  {closed:+.9e}", table.get(l, 0).re);
    }

    // truncation level as a function of the captured-norm deficit
    println!("\n  epsilon   lmax   captured norm deficit");
    for &eps in &[1e-4, 1e-8, 1e-10, 1e-14] {
        let lmax = truncation_lmax(&spec, eps).unwrap();
        let table = coefficients(&spec, lmax).unwrap();
        println!(
            "  {eps:<8.0e}  {lmax:>3}    {:.3e}",
            1.0 - table.captured_norm()
        );
    }

    // reconstruction error at a few points, including the destructive
    // direction theta = 0 where every partial wave cancels
    let lmax = truncation_lmax(&spec, 1e-14).unwrap();
    let table = coefficients(&spec, lmax).unwrap();
    let r0 = spec.radial_amplitude();
    println!("\nreconstruction vs closed-form packet (lmax = {lmax}):");
    for (label, r, t) in [
        ("packet center     ", [0.0, 0.0, -r0], 0.0),
        ("one sigma off     ", [1.0, 0.0, -r0 + 0.5], 0.3),
        ("quarter period    ", [0.5, -0.5, 0.0], PI / 2.0),
        ("destructive pole  ", [0.0, 0.0, r0], 0.0),
    ] {
        let rec = table.reconstruct(r, t).unwrap();
        let exact = spec.gaussian_packet(r, t);
        println!(
            "  {label} |psi| = {:.6e}   |diff| = {:.3e}",
            exact.norm(),
            (rec - exact).norm()
        );
    }
}
