//! Lateral and longitudinal Magic Formula curves at the static front load.

use rhonn_lateral::plant::tire::{magic_formula, static_loads, TireConfig};
use rhonn_lateral::plant::VehicleParams;

fn main() {
    let p = VehicleParams::default();
    let tire = TireConfig::default();
    let fz = static_loads(&p)[0];
    for mu in [0.35, 0.7] {
        let d = mu * fz;
        println!("mu = {mu}, Fz = {fz:.0} N");
        println!("  peak slip angle {:.2} deg, peak slip ratio {:.3}", tire.lateral.peak_slip().to_degrees(), tire.longitudinal.peak_slip());
        println!("  {:>8} {:>10} {:>10}", "slip", "Fy (N)", "Fx (N)");
        for i in 0..=12 {
            let s = 0.02 * i as f64;
            println!("  {s:>8.2} {:>10.1} {:>10.1}", magic_formula(s, &tire.lateral, d), magic_formula(s, &tire.longitudinal, d));
        }
    }
}
