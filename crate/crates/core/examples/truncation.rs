//! The truncated field agrees with F on the tube, fades out across the unit
//! layer around it and is zero beyond.

use nalgebra::dvector;
use tubeflow::integrate::{integrate_relaxed, RelaxedControl};
use tubeflow::setvalued::{hausdorff_finite, truncate_field, PolytopicField, Tube};

fn main() {
    let f = PolytopicField::parse(2, &[vec!["x2^2", "-1"], vec!["x2^2", "1"]]).unwrap();
    let lam = RelaxedControl::constant(vec![0.5, 0.5], (0.0, 1.0)).unwrap();
    let z = integrate_relaxed(&f, &lam, &dvector![0.0, 0.0], (0.0, 1.0), 1e-3).unwrap();
    let tube = Tube::constant(z, 0.2).unwrap();
    let trunc = truncate_field(&f, &tube).unwrap();

    for y in [0.0, 0.2, 0.5, 0.9, 1.2, 2.0] {
        let x = dvector![0.0, y];
        let set = trunc.eval_set(0.0, &x).unwrap();
        println!(
            "y = {y:.1}: cutoff {:.2}, vertices {:?}",
            trunc.cutoff(&x),
            set.iter().map(|v| (v[0], v[1])).collect::<Vec<_>>()
        );
    }

    let (a, b) = (dvector![0.1, 0.3], dvector![-0.2, 0.6]);
    let d = hausdorff_finite(&trunc.eval_set(0.0, &a).unwrap(), &trunc.eval_set(0.0, &b).unwrap()).unwrap();
    let k = (1.2f64.powi(4) + 1.0).sqrt() + 2.4;
    println!("d_H = {d:.4} <= (alpha + k0)|a - b| = {:.4}", k * (&a - &b).norm());
}
