//! Modified spherical Bessel functions with complex argument: closed-form
//! checks, the overflow-safe scaled form, and parity.

use num_complex::Complex64;
use partwave::specfun::{legendre_p, mod_sph_bessel_first, mod_sph_bessel_scaled, sph_harm};

fn main() {
    // W_0(z) = sinh(z)/z
    for &x in &[0.5, 1.0, 4.0, 10.0] {
        let w = mod_sph_bessel_first(0, Complex64::new(x, 0.0)).unwrap();
        println!(
            "W_0({x:>4}) = {:.12}   sinh({x})/{x} = {:.12}",
            w.re,
            x.sinh() / x
        );
    }

    // Purely imaginary argument: W_l(iy) = i^l j_l(y), here l = 0
    let y = 25.0f64;
    let w = mod_sph_bessel_first(0, Complex64::new(0.0, y)).unwrap();
    println!(
        "\nW_0({y} i) = {:.12e} + {:.2e} i   sin({y})/{y} = {:.12e}",
        w.re,
        w.im,
        y.sin() / y
    );

    // The scaled form W_l(z) e^{-s} stays representable where the raw value
    // overflows f64.
    let z = Complex64::new(800.0, 0.0);
    println!(
        "\nW_0(800) raw: {:?}",
        mod_sph_bessel_first(0, z).map(|v| v.re)
    );
    let scaled = mod_sph_bessel_scaled(0, z, 800.0).unwrap();
    println!(
        "W_0(800) e^(-800) = {:.12e}  (exact: (1 - e^(-1600))/1600)",
        scaled.re
    );

    // Parity: W_l(-z) = (-1)^l W_l(z)
    let z = Complex64::new(3.0, 7.0);
    for l in 0..4u32 {
        let a = mod_sph_bessel_first(l, z).unwrap();
        let b = mod_sph_bessel_first(l, -z).unwrap();
        println!(
            "l = {l}: W_l(-z) / W_l(z) = {:+.6} {:+.6}i",
            (b / a).re,
            (b / a).im
        );
    }

    // Legendre polynomials of complex argument and a spherical harmonic
    let x = Complex64::new(0.3, 0.4);
    println!("\nP_5({x}) = {}", legendre_p(5, x));
    println!("Y_3^2(1.1, 0.7) = {}", sph_harm(3, 2, 1.1, 0.7).unwrap());
}
