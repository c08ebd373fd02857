//! A family of original-inclusion trajectories, all driven by one switching
//! signal, that stays in the eps-tube for every start in a small ball.

use nalgebra::dvector;
use tubeflow::integrate::{integrate_relaxed, sup_gap, RelaxedControl};
use tubeflow::relaxation::{tube_selection, SelectionOptions};
use tubeflow::setvalued::{AnalyticBounds, BoundsStrategy, PolytopicField};

fn main() {
    let h = 1e-3;
    let f = PolytopicField::parse(2, &[vec!["x2^2", "-1"], vec!["x2^2", "1"]]).unwrap();
    let lam = RelaxedControl::constant(vec![0.5, 0.5], (0.0, 1.0)).unwrap();
    let z = integrate_relaxed(&f, &lam, &dvector![0.0, 0.0], (0.0, 1.0), h).unwrap();
    let bounds = BoundsStrategy::Analytic(AnalyticBounds::parse("2*R", "sqrt(R^4+1)").unwrap());
    let family = tube_selection(&f, &z, &lam, 0.2, h, &SelectionOptions::new(bounds)).unwrap();

    println!(
        "k = alpha + k0 = {:.4}, delta = {:.4e}, N = {}, base gap {:.4e}",
        family.lipschitz, family.radius, family.slices, family.chatter_gap
    );
    println!("verification: {:?}", family.verification);
    for eta in [dvector![0.0, 0.0], dvector![family.radius, 0.0], dvector![0.0, -family.radius]] {
        let member = family.member(&f, &eta, h).unwrap();
        let (gap, t) = sup_gap(&z, &member).unwrap();
        println!("eta = ({:+.3e}, {:+.3e}): sup gap {gap:.4e} at t = {t:.3}", eta[0], eta[1]);
    }
}
