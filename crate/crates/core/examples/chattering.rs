//! Chattering a relaxed control into switching signals of growing slice
//! counts, and the doubling search for a target accuracy.

use nalgebra::dvector;
use tubeflow::integrate::{integrate_relaxed, integrate_switching, sup_gap, RelaxedControl};
use tubeflow::relaxation::{chatter_control, fw_approximate, ChatterOptions};
use tubeflow::setvalued::PolytopicField;

fn main() {
    let h = 1e-3;
    let f = PolytopicField::parse(2, &[vec!["x2^2", "-1"], vec!["x2^2", "1"]]).unwrap();
    let lam = RelaxedControl::constant(vec![0.5, 0.5], (0.0, 1.0)).unwrap();
    let z = integrate_relaxed(&f, &lam, &dvector![0.0, 0.0], (0.0, 1.0), h).unwrap();

    println!("{:>5} {:>12} {:>12} {:>12}", "N", "sup gap", "1/(2N)", "x(1)");
    for p in 0..=8 {
        let n = 1usize << p;
        let u = chatter_control(&lam, n, None).unwrap();
        let y = integrate_switching(&f, &u, &dvector![0.0, 0.0], (0.0, 1.0), h).unwrap();
        let (gap, _) = sup_gap(&z, &y).unwrap();
        println!("{n:>5} {gap:>12.4e} {:>12.4e} {:>12.4e}", 0.5 / n as f64, y.final_state()[0]);
    }

    for eps in [0.1, 0.01, 0.001] {
        let approx = fw_approximate(&f, &z, &lam, eps, h, &ChatterOptions::default()).unwrap();
        println!("eps = {eps}: N = {}, gap = {:.4e}", approx.slices, approx.sup_gap);
    }
}
