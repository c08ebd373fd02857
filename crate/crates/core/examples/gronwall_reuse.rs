//! Reusing a trajectory's control from a shifted start: the gap obeys the
//! Gronwall bound, and saturates it for x' = x.

use nalgebra::dvector;
use tubeflow::integrate::{check_gronwall, integrate_switching, reuse_control, SwitchingSignal};
use tubeflow::setvalued::{AnalyticBounds, PolytopicField};

fn main() {
    let h = 1e-4;
    let f = PolytopicField::parse(1, &[vec!["x"]]).unwrap();
    let u = SwitchingSignal::constant(0, (0.0, 1.0)).unwrap();
    let reference = integrate_switching(&f, &u, &dvector![1.0], (0.0, 1.0), h).unwrap();
    let member = reuse_control(&f, &reference, &u, &dvector![1.1], h).unwrap();
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let gap = (reference.at(t) - member.at(t)).norm();
        println!("t = {t:.2}: gap {gap:.10}, 0.1 e^t = {:.10}", 0.1 * f64::exp(t));
    }
    let bounds = AnalyticBounds::parse("1", "R").unwrap().at(member.max_norm() + 1.0).unwrap();
    println!("{:?}", check_gronwall(&reference, &member, &bounds, h).unwrap());

    // x-shift in the counterexample does not feed back: constant gap
    let g = PolytopicField::parse(2, &[vec!["x2^2", "-1"], vec!["x2^2", "1"]]).unwrap();
    let plus = SwitchingSignal::constant(1, (0.0, 1.0)).unwrap();
    let r = integrate_switching(&g, &plus, &dvector![0.0, 0.0], (0.0, 1.0), 1e-3).unwrap();
    let m = reuse_control(&g, &r, &plus, &dvector![0.1, 0.0], 1e-3).unwrap();
    println!("counterexample x-shift gap at t = 1: {}", (r.final_state() - m.final_state()).norm());
}
