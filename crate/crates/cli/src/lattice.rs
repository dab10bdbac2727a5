//! Plain-text dumps of the `(x, y, alpha)` lattice, one block per plane.

use std::fmt::Write;

use sepdec::{Ensemble, TriJointDist};

const CELL: usize = 12;

fn header(out: &mut String, ny: usize, sub: bool) {
    let _ = write!(out, "{:>6}", "");
    for y in 0..ny {
        let label = format!("y={y}");
        if sub {
            let _ = write!(out, " {label:>w$}", w = 2 * CELL + 1);
        } else {
            let _ = write!(out, " {label:>CELL$}");
        }
    }
    out.push('\n');
}

/// Per member: `|sqrt(w) psi_xy|` and its phase in radians.
pub fn quantum(ens: &Ensemble) -> String {
    let (nx, ny) = (ens.nx(), ens.ny());
    let mut out = String::new();
    for (alpha, w, psi) in ens.members() {
        let _ = writeln!(out, "alpha {alpha}  w = {w:.9e}");
        header(&mut out, ny, true);
        for x in 0..nx {
            let _ = write!(out, "{:>6}", format!("x={x}"));
            for y in 0..ny {
                let a = psi[x * ny + y] * w.sqrt();
                let phase = if a.norm() > 0.0 { a.arg() } else { 0.0 };
                let _ = write!(out, " {:>CELL$.6e} {:>+CELL$.6}", a.norm(), phase);
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Per plane: `P~(x, y, alpha)`; empty cells print as `.`.
pub fn classical(pt: &TriJointDist) -> String {
    let (nx, ny) = (pt.nx(), pt.ny());
    let pa = pt.marginal_alpha();
    let mut out = String::new();
    for (alpha, mass) in pa.iter().enumerate() {
        let _ = writeln!(out, "alpha {alpha}  P(alpha) = {mass:.9e}");
        header(&mut out, ny, false);
        for x in 0..nx {
            let _ = write!(out, "{:>6}", format!("x={x}"));
            for y in 0..ny {
                let v = pt.get(x, y, alpha);
                if v > 0.0 {
                    let _ = write!(out, " {v:>CELL$.6e}");
                } else {
                    let _ = write!(out, " {:>CELL$}", ".");
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use sepdec::{construct_line_decomposition, construct_point_decomposition, JointDist};

    fn filled(block: &str) -> usize {
        block.lines().skip(2).flat_map(|l| l.split_whitespace().skip(1)).filter(|c| *c != ".").count()
    }

    #[test]
    fn uniform_point_decomposition_has_single_point_planes() {
        let p = JointDist::new(2, 2, vec![0.25; 4]).unwrap();
        let text = classical(&construct_point_decomposition(&p).pt);
        let blocks: Vec<&str> = text.split("\n\n").filter(|b| !b.trim().is_empty()).collect();
        assert_eq!(blocks.len(), 4);
        assert!(blocks.iter().all(|b| filled(b) == 1));
        assert!(text.contains("2.500000e-1"));
    }

    #[test]
    fn uniform_line_decomposition_has_line_planes() {
        let p = JointDist::new(2, 2, vec![0.25; 4]).unwrap();
        let text = classical(&construct_line_decomposition(&p).pt);
        let blocks: Vec<&str> = text.split("\n\n").filter(|b| !b.trim().is_empty()).collect();
        assert_eq!(blocks.len(), 2);
        assert!(blocks.iter().all(|b| filled(b) == 2));
    }
}
