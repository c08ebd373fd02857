//! The counterexample: z = 0 is relaxed-feasible, no trajectory from the
//! origin stays in x^2 + y^2 <= e^-t, but one from a perturbed start does.

use nalgebra::dvector;
use tubeflow::horizon::{plan_segments, shadow_trajectory, HorizonOptions};
use tubeflow::integrate::{integrate_relaxed, RelaxedControl};
use tubeflow::relaxation::SelectionOptions;
use tubeflow::setvalued::{AnalyticBounds, BoundsStrategy, PolytopicField, Radius};

fn main() {
    let (h, horizon) = (1e-3, 5.0);
    let f = PolytopicField::parse(2, &[vec!["x2^2", "-1"], vec!["x2^2", "1"]]).unwrap();
    let lam = RelaxedControl::constant(vec![0.5, 0.5], (0.0, horizon)).unwrap();
    let z = integrate_relaxed(&f, &lam, &dvector![0.0, 0.0], (0.0, horizon), h).unwrap();
    let radius = Radius::parse("exp(-t)").unwrap();
    let plan = plan_segments(&radius, horizon, 1.0).unwrap();
    let options = HorizonOptions::new(SelectionOptions::new(BoundsStrategy::Analytic(
        AnalyticBounds::parse("2*R", "sqrt(R^4+1)").unwrap(),
    )));
    let res = shadow_trajectory(&f, &z, &lam, &radius, &plan, h, &options).unwrap();

    println!("eta0 = ({:.6e}, {:.6e})", res.eta0[0], res.eta0[1]);
    println!("{:>3} {:>10} {:>6} {:>12} {:>12}", "k", "eps", "N", "gap", "delta");
    for s in &res.segments {
        println!("{:>3} {:>10.4e} {:>6} {:>12.4e} {:>12.4e}", s.k, s.epsilon, s.slices, s.achieved_gap, s.delta);
    }
    for t in [0.0, 1.0, 2.0, 3.0, 4.0, 5.0] {
        let x = res.trajectory.at(t);
        println!("t = {t}: x^2 + y^2 = {:.4e} <= e^-t = {:.4e}", x.norm_squared(), f64::exp(-t));
    }
    println!("worst |x - z| / r = {:.4} at t = {:.4}", res.worst_ratio, res.worst_ratio_time);
}
