//! Torque split for a few drive/yaw-moment pairs, including saturation.

use rhonn_lateral::allocation::allocate;

fn main() {
    let cap = 400.0;
    println!("{:>7} {:>7} | {:>7} {:>7} {:>7} {:>7} | {:>7} {:>7} sat", "Tt", "dM", "T1", "T2", "T3", "T4", "sum", "dM'");
    for (total, dm) in [(0.0, 0.0), (400.0, 100.0), (0.0, 1600.0), (1000.0, 1500.0), (-800.0, -900.0), (1600.0, 10.0)] {
        match allocate(total, dm, cap) {
            Ok(a) => {
                let t = a.torques.0;
                println!(
                    "{total:>7.0} {dm:>7.0} | {:>7.1} {:>7.1} {:>7.1} {:>7.1} | {:>7.1} {:>7.1} {}",
                    t[0], t[1], t[2], t[3], a.torques.total(), a.torques.yaw_moment(), a.saturated
                );
            }
            Err(e) => println!("{total:>7.0} {dm:>7.0} | {e}"),
        }
    }
    println!("{:?}", allocate(2000.0, 0.0, cap));
}
