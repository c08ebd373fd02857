//! Forward completeness of an inclusion and of its relaxation, probed with
//! random switching signals and random relaxed controls.

use nalgebra::dvector;
use tubeflow::horizon::{completeness_probe, ProbeOptions};
use tubeflow::setvalued::PolytopicField;

fn main() {
    let options = ProbeOptions {
        seed: 1,
        ..ProbeOptions::default()
    };
    let cases = [
        ("{x^2 - 1, x^2 + 1}", vec![vec!["x^2 - 1"], vec!["x^2 + 1"]], 2.0, 1e-3),
        ("{-x, x}", vec![vec!["-x"], vec!["x"]], 10.0, 1e-2),
    ];
    for (name, vertices, t_max, h) in cases {
        let f = PolytopicField::parse(1, &vertices).unwrap();
        let report = completeness_probe(&f, &[dvector![2.0], dvector![1.0]], t_max, 10, h, 1e9, &options).unwrap();
        for row in &report.starts {
            let first = |c: &tubeflow::horizon::ColumnReport| c.escape_times.iter().flatten().copied().reduce(f64::min);
            println!(
                "{name} from {:?}: original escapes {} (first {:?}), relaxed escapes {} (first {:?}), disagreement {}",
                row.start,
                row.original.escaped_any,
                first(&row.original),
                row.relaxed.escaped_any,
                first(&row.relaxed),
                row.disagreement
            );
        }
    }
}
