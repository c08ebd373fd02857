//! From the origin, every chattered control pushes x up by 1/(12 N^2) per
//! unit time, which eventually beats the shrinking tube.

use nalgebra::dvector;
use tubeflow::integrate::{integrate_switching, RelaxedControl};
use tubeflow::relaxation::chatter_control;
use tubeflow::setvalued::PolytopicField;

fn main() {
    let (h, end) = (1e-3, 8.0);
    let f = PolytopicField::parse(2, &[vec!["x2^2", "-1"], vec!["x2^2", "1"]]).unwrap();
    let lam = RelaxedControl::constant(vec![0.5, 0.5], (0.0, end)).unwrap();
    for n in [1usize, 4, 16, 64] {
        let u = chatter_control(&lam, n * end as usize, None).unwrap();
        let x = integrate_switching(&f, &u, &dvector![0.0, 0.0], (0.0, end), h).unwrap();
        let exit = x
            .times()
            .iter()
            .zip(x.states())
            .find(|(t, s)| s.norm() > f64::exp(-**t))
            .map(|(t, _)| *t);
        println!(
            "N = {n:>2}: x(1) = {:.6e} (1/(12N^2) = {:.6e}), leaves |x| <= e^-t at {exit:?}",
            x.at(1.0)[0],
            1.0 / (12.0 * (n * n) as f64)
        );
    }
}
