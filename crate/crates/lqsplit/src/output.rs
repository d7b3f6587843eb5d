//! Trajectory CSV: time, state, every gain entry and every control.

use std::fmt::Write as _;
use std::path::Path;

use lqsplit_core::Trajectory;

use crate::error::{Error, Result};

pub fn trajectory_header(tr: &Trajectory) -> String {
    let first = &tr.samples[0];
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=first.x.len()).map(|j| format!("x{j}")));
    for (i, p) in first.gains.iter().enumerate() {
        for r in 1..=p.rows() {
            for c in 1..=p.cols() {
                cols.push(format!("p{}_{r}{c}", i + 1));
            }
        }
    }
    for (i, u) in first.controls.iter().enumerate() {
        cols.extend((1..=u.len()).map(|j| format!("u{}_{j}", i + 1)));
    }
    cols.join(",")
}

pub fn render_trajectory(tr: &Trajectory) -> String {
    let mut out = trajectory_header(tr);
    out.push('\n');
    for s in &tr.samples {
        let mut fields = vec![s.t];
        fields.extend(&s.x);
        for p in &s.gains {
            fields.extend(p.as_slice());
        }
        for u in &s.controls {
            fields.extend(u);
        }
        let line: Vec<String> = fields.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(",")).expect("writing to a String");
    }
    out
}

pub fn write_trajectory(tr: &Trajectory, path: &Path) -> Result<()> {
    std::fs::write(path, render_trajectory(tr)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use lqsplit_core::pipeline::{solve, Method};
    use lqsplit_core::riccati::BackwardMethod;
    use lqsplit_core::{LQProblem, Matrix};

    #[test]
    fn columns_and_rows() {
        let p = LQProblem::constant(
            Matrix::identity(2),
            Matrix::column(&[0.0, 1.0]),
            Matrix::identity(2),
            Matrix::scalar(1.0),
            Matrix::zeros(2, 2),
            vec![1.0, 2.0],
            0.0,
            1.0,
        )
        .unwrap();
        let tr = solve(&p, &Method::Rk4, 3, BackwardMethod::Exponential).unwrap();
        let text = render_trajectory(&tr);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,x1,x2,p1_11,p1_12,p1_21,p1_22,u1_1"
        );
        assert_eq!(lines.clone().count(), 4);
        assert!(lines.all(|l| l.split(',').count() == 8));
    }
}
