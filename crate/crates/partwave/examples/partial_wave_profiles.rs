//! Radial motion of the weighted partial waves |r psi_l|^2: peak positions
//! and heights over half an oscillator period, and the peak-intensity
//! ordering at t = 0.

use partwave::observables::radial_density;
use partwave::oscillator::{PacketSpec, PERIOD};

fn main() {
    let spec = PacketSpec::axial(20.0);
    let r0 = spec.radial_amplitude();
    let samples: Vec<f64> = (0..800).map(|i| (r0 + 4.0) * i as f64 / 799.0).collect();

    let peak_of = |l: u32, t: f64| -> (f64, f64) {
        let profile = radial_density(l, &spec, t, &samples).unwrap();
        let (i, v) = profile
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        (samples[i], *v)
    };

    println!("peak height of |r psi_l|^2 at t = 0 (N = 20):");
    for l in 0..16u32 {
        let (r, v) = peak_of(l, 0.0);
        let bar = "#".repeat((140.0 * v) as usize);
        println!("  l = {l:>2}: peak {v:.4e} at r = {r:.3}  {bar}");
    }

    println!("\nradial motion of l = 0 and l = 7 over half a period:");
    println!("  t/T      argmax_r l=0   argmax_r l=7");
    for i in 0..7 {
        let t = 0.5 * PERIOD * i as f64 / 6.0;
        let (r0pos, _) = peak_of(0, t);
        let (r7pos, _) = peak_of(7, t);
        println!("  {:.4}    {r0pos:>7.3}        {r7pos:>7.3}", t / PERIOD);
    }
    println!("\nat the quarter period the high-l wave stays repelled from the origin.");
}
