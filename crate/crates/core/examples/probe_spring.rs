use waterbomb_opt::spring::{spring_energy_curve, SpringModelParams};
use waterbomb_opt::engine::SweepOptions;
fn main() {
    let p = SpringModelParams::default();
    let land = spring_energy_curve(&p, &SweepOptions::default()).unwrap();
    let n = land.len();
    for k in [0, n/4, n/2, 3*n/4, n-3, n-2, n-1] {
        println!("k {k} delta {:.3} F {:.5} U {:.5}", land.delta[k], land.force[k], land.energy[k]);
    }
    let umax = land.energy.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("umax {umax:.4} u_end {:.6} F_end {:.6}", land.energy[n-1], land.force[n-1]);
}
