use phaserand::fockspace::*;
use std::f64::consts::PI;

fn delta(mu: f64, theta0: f64, sigma: f64, n_max: usize) -> f64 {
    let z = build_rho_z(mu, &PhaseDistribution::gaussian(theta0, sigma).unwrap(), n_max).unwrap();
    let x = build_rho_x(mu, sigma, n_max).unwrap();
    (1.0 - uhlmann_fidelity(&x, &z).unwrap()) / 2.0
}

fn main() {
    let n_max = 16;
    for mu in [0.01, 0.09] {
        for s in [0.0, 0.3, 0.5, 0.8, 1.0, 1.5, 2.0] {
            let d0 = delta(mu, 0.0, s, n_max);
            let dpi = delta(mu, PI, s, n_max);
            println!("mu={mu} sigma={s}: delta(0)={d0:.8} delta(pi)={dpi:.8}  pi>0? {}", dpi > d0);
        }
    }
}
