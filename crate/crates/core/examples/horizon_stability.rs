//! How the perturbed start eta0 moves as the horizon (segment count K) grows.

use nalgebra::dvector;
use tubeflow::horizon::{plan_segments, shadow_trajectory, HorizonOptions};
use tubeflow::integrate::{integrate_relaxed, RelaxedControl};
use tubeflow::relaxation::SelectionOptions;
use tubeflow::setvalued::{AnalyticBounds, BoundsStrategy, PolytopicField, Radius};

fn main() {
    let h = 1e-3;
    let f = PolytopicField::parse(2, &[vec!["x2^2", "-1"], vec!["x2^2", "1"]]).unwrap();
    let radius = Radius::parse("exp(-t)").unwrap();
    let options = HorizonOptions::new(SelectionOptions::new(BoundsStrategy::Analytic(
        AnalyticBounds::parse("2*R", "sqrt(R^4+1)").unwrap(),
    )));
    let mut previous: Option<f64> = None;
    println!("{:>3} {:>14} {:>12}", "K", "eta0.x", "change");
    for k in 1..=7 {
        let horizon = k as f64;
        let lam = RelaxedControl::constant(vec![0.5, 0.5], (0.0, horizon)).unwrap();
        let z = integrate_relaxed(&f, &lam, &dvector![0.0, 0.0], (0.0, horizon), h).unwrap();
        let plan = plan_segments(&radius, horizon, 1.0).unwrap();
        let res = shadow_trajectory(&f, &z, &lam, &radius, &plan, h, &options).unwrap();
        let x0 = res.eta0[0];
        let change = previous.map(|p| (x0 - p).abs());
        println!("{k:>3} {x0:>14.6e} {:>12}", change.map_or("-".into(), |c| format!("{c:.3e}")));
        previous = Some(x0);
    }
}
