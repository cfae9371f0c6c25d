//! Brute-force eigenvalues from a finite-difference discretization.
//!
//! The operator is discretized through its quadratic form
//! `Σ_j ∫ |y'|² + Σ_jumps c·|y(a)|²`, where the jumps are those of `σ`
//! extended by zero (point masses of `q = σ'`, including the ones the
//! quasi-derivative conditions place at edge ends). Piecewise-linear elements
//! with lumped mass give the usual three-point second difference in the
//! interior, one-sided stencils at vertices, and the Kirchhoff condition as
//! the natural condition at `v_0`. Breakpoints always land on grid nodes.

use std::io::Write;

use faer::{Mat, Side};

use crate::charfn::Problem;
use crate::error::{Error, Result};
use crate::graph::{to_f64, ValidatedGraph};

/// Smallest accepted grid density.
pub const MIN_POINTS_PER_UNIT: f64 = 50.0;

/// Symmetric matrix `M^{-1/2} K M^{-1/2}` of the discretized problem.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub matrix: Mat<f64>,
    pub h: f64,
    pub problem: Problem,
    /// Lumped mass per node.
    pub mass: Vec<f64>,
}

impl DiscreteOperator {
    pub fn dimension(&self) -> usize {
        self.mass.len()
    }

    /// `max |A − Aᵀ|`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dimension();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)]).abs());
            }
        }
        worst
    }

    /// `‖A v‖ / ‖v‖` for `v = M^{1/2}·1`, the image of the constant function.
    pub fn constant_residual(&self) -> f64 {
        let v: Vec<f64> = self.mass.iter().map(|m| m.sqrt()).collect();
        let n = self.dimension();
        let mut num = 0.0;
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += self.matrix[(i, j)] * v[j];
            }
            num += acc * acc;
        }
        let den: f64 = v.iter().map(|x| x * x).sum();
        (num / den).sqrt()
    }
}

/// Discretizes `problem` on `graph` with about `points_per_unit_length` nodes
/// per unit physical length.
pub fn discretize(graph: &ValidatedGraph, problem: Problem, points_per_unit_length: f64) -> Result<DiscreteOperator> {
    let problem = problem.check(graph)?;
    if !(points_per_unit_length >= MIN_POINTS_PER_UNIT) {
        return Err(Error::GridTooCoarse(format!(
            "{points_per_unit_length} points per unit length, need at least {MIN_POINTS_PER_UNIT}"
        )));
    }
    let measure = graph.breakpoint_measure();
    let cell = to_f64(measure) * graph.unit();
    let per_measure = (cell * points_per_unit_length).ceil().max(2.0) as usize;
    let h = cell / per_measure as f64;
    let intervals = |j: usize| -> usize {
        let ratio = graph.rational_length(j) / measure;
        *ratio.numer() as usize * per_measure / *ratio.denom() as usize
    };

    // node 0 is v_0; every edge lists its nodes from x = 0 to x = |e|
    let mut count = 1usize;
    let mut edge_nodes: Vec<Vec<Option<usize>>> = Vec::with_capacity(graph.num_edges());
    for j in 0..graph.num_edges() {
        let n = intervals(j);
        let mut nodes = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let id = if i == n || (j == 0 && i == 0) {
                Some(0)
            } else if i == 0 && problem == Problem::Lj(j) {
                None
            } else {
                count += 1;
                Some(count - 1)
            };
            nodes.push(id);
        }
        edge_nodes.push(nodes);
    }

    let mut stiff = Mat::<f64>::zeros(count, count);
    let mut mass = vec![0.0; count];
    for nodes in &edge_nodes {
        for w in nodes.windows(2) {
            for &a in w.iter().flatten() {
                mass[a] += 0.5 * h;
            }
            match (w[0], w[1]) {
                (Some(a), Some(b)) => {
                    stiff[(a, a)] += 1.0 / h;
                    stiff[(b, b)] += 1.0 / h;
                    stiff[(a, b)] -= 1.0 / h;
                    stiff[(b, a)] -= 1.0 / h;
                }
                (Some(a), None) | (None, Some(a)) => stiff[(a, a)] += 1.0 / h,
                (None, None) => {}
            }
        }
    }
    for (j, nodes) in edge_nodes.iter().enumerate() {
        for (x, c) in graph.potential(j).jumps() {
            let ratio = x / measure;
            let i = *ratio.numer() as usize * per_measure / *ratio.denom() as usize;
            if let Some(a) = nodes[i] {
                stiff[(a, a)] += c;
            }
        }
    }

    let scale: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let matrix = Mat::from_fn(count, count, |a, b| stiff[(a, b)] * scale[a] * scale[b]);
    Ok(DiscreteOperator { matrix, h, problem, mass })
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(matrix: &Mat<f64>) -> Result<Vec<f64>> {
    let mut ev = matrix
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::GridTooCoarse(format!("eigensolver failed: {e:?}")))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// The `count` smallest eigenvalues of the discrete operator.
pub fn oracle_eigs(op: &DiscreteOperator, count: usize) -> Result<Vec<f64>> {
    let mut ev = symmetric_eigenvalues(&op.matrix)?;
    ev.truncate(count);
    Ok(ev)
}

/// `(4 λ_{h/2} − λ_h) / 3`, elementwise.
pub fn richardson(coarse: &[f64], fine: &[f64]) -> Vec<f64> {
    coarse.iter().zip(fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
}

/// Eigenvalues on grids `h` and `h/2`, and their extrapolation.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    pub extrapolated: Vec<f64>,
    pub dimension: usize,
}

pub fn extrapolated_eigs(
    graph: &ValidatedGraph,
    problem: Problem,
    points_per_unit_length: f64,
    count: usize,
) -> Result<OracleRun> {
    let coarse = oracle_eigs(&discretize(graph, problem, points_per_unit_length)?, count)?;
    let fine_op = discretize(graph, problem, 2.0 * points_per_unit_length)?;
    let fine = oracle_eigs(&fine_op, count)?;
    let extrapolated = richardson(&coarse, &fine);
    Ok(OracleRun { coarse, fine, extrapolated, dimension: fine_op.dimension() })
}

pub fn write_eigs_csv<W: Write>(eigs: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "rho"])?;
    for &l in eigs {
        w.write_record([format!("{l:?}"), format!("{:?}", l.max(0.0).sqrt())])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{validate, GraphSpec, PotentialSpec, Rational};
    use std::f64::consts::PI;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn pi_lasso() -> ValidatedGraph {
        validate(&GraphSpec::lasso(PI, &[r(1), r(1), r(1)])).unwrap()
    }

    #[test]
    fn toy_matrix() {
        let m = Mat::from_fn(2, 2, |i, j| if i == j { 2.0 } else { -1.0 });
        let ev = symmetric_eigenvalues(&m).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_coarse_grids() {
        assert!(matches!(discretize(&pi_lasso(), Problem::L, 20.0), Err(Error::GridTooCoarse(_))));
        assert!(matches!(discretize(&pi_lasso(), Problem::Lj(3), 60.0), Err(Error::BadIndex { .. })));
    }

    #[test]
    fn structure_of_the_discrete_operator() {
        let g = pi_lasso();
        let op = discretize(&g, Problem::L, 50.0).unwrap();
        assert!(op.symmetry_defect() <= 1e-12);
        assert!(op.constant_residual() < 1e-10);
        let total: f64 = op.mass.iter().sum();
        assert!((total - 3.0 * PI).abs() < 1e-12);
        let dir = discretize(&g, Problem::Lj(1), 50.0).unwrap();
        assert_eq!(dir.dimension() + 1, op.dimension());
        assert!(dir.constant_residual() > 1e-3);
    }

    #[test]
    fn converges_to_the_free_spectrum() {
        let g = pi_lasso();
        let run = extrapolated_eigs(&g, Problem::L, 60.0, 6).unwrap();
        let exact = [0.0, 0.25, 4.0 / 9.0, 16.0 / 9.0, 2.25, 4.0];
        for (e, x) in run.extrapolated.iter().zip(exact) {
            assert!((e - x).abs() < 1e-5 * (1.0 + x), "{e} vs {x}");
        }
        // second order: error ratio between h and h/2 close to 4
        for (i, &x) in exact.iter().enumerate().skip(1).take(5) {
            let ratio = (run.coarse[i] - x) / (run.fine[i] - x);
            assert!((3.5..=4.5).contains(&ratio), "eigenvalue {i}: ratio {ratio}");
        }
    }

    #[test]
    fn delta_terms_land_on_nodes() {
        let spec = GraphSpec::lasso(PI, &[r(1), r(1), r(1)])
            .with_potential(1, PotentialSpec::delta(r(1), Rational::new(1, 3), 1.0));
        let g = validate(&spec).unwrap();
        let op = discretize(&g, Problem::L, 50.0).unwrap();
        // breakpoint measure 1/3 (in units of π): the grid spacing divides it
        let cells = (PI / 3.0) / op.h;
        assert!((cells - cells.round()).abs() < 1e-9);
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        write_eigs_csv(&[0.0, 0.25], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "lambda,rho\n0.0,0.0\n0.25,0.5\n");
    }
}
