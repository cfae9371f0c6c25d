//! Exact propagation of the quasi-derivative system.
//!
//! With `y^{[1]} = y' − σy` the equation `ℓy = λy` becomes the first-order
//! system
//!
//! ```text
//! y'       =  σ y + y^{[1]}
//! y^{[1]}' = −(σ² + λ) y − σ y^{[1]}
//! ```
//!
//! For constant `σ` the system matrix `A` satisfies `A² = −λI`, so the
//! propagator over a segment of length `h` is `φ0(λ,h)·I + φ1(λ,h)·A` with
//! `φ0 = cos(ρh)`, `φ1 = sin(ρh)/ρ` (`λ = ρ²`), continued to `λ ≤ 0`.

use std::ops::Mul;

use crate::graph::{to_f64, PotentialSpec, ValidatedGraph};

/// Below this value of `|λ|h²` the `φ` pair is summed as a power series.
const SERIES_THRESHOLD: f64 = 1e-4;

/// `(φ0, φ1)` for spectral parameter `lambda` over length `h`.
pub fn phi_pair(lambda: f64, h: f64) -> (f64, f64) {
    let x = lambda * h * h;
    if x.abs() <= SERIES_THRESHOLD {
        return phi_series(x, h);
    }
    if lambda > 0.0 {
        let rho = lambda.sqrt();
        let (s, c) = (rho * h).sin_cos();
        (c, s / rho)
    } else {
        let kappa = (-lambda).sqrt();
        ((kappa * h).cosh(), (kappa * h).sinh() / kappa)
    }
}

/// `(φ0, φ1, s)` with `φ·e^{s}` equal to [`phi_pair`]; `s = κh` for
/// `λ = −κ² < 0` outside the series region, otherwise 0.
pub fn phi_pair_scaled(lambda: f64, h: f64) -> (f64, f64, f64) {
    let x = lambda * h * h;
    if lambda >= 0.0 || x.abs() <= SERIES_THRESHOLD {
        let (a, b) = phi_pair(lambda, h);
        return (a, b, 0.0);
    }
    let kappa = (-lambda).sqrt();
    let e = (-2.0 * kappa * h).exp();
    (0.5 * (1.0 + e), 0.5 * (1.0 - e) / kappa, kappa * h)
}

fn phi_series(x: f64, h: f64) -> (f64, f64) {
    // Terms through x^5; remainder below 1e-27 for |x| <= 1e-4.
    let mut phi0 = 0.0;
    let mut phi1 = 0.0;
    let mut term0 = 1.0; // (−x)^m / (2m)!
    let mut term1 = 1.0; // (−x)^m / (2m+1)!
    for m in 0..6 {
        phi0 += term0;
        phi1 += term1;
        let k = 2.0 * m as f64;
        term0 *= -x / ((k + 1.0) * (k + 2.0));
        term1 *= -x / ((k + 2.0) * (k + 3.0));
    }
    (phi0, h * phi1)
}

/// 2×2 propagator acting on the state `(y, y^{[1]})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateMatrix(pub [[f64; 2]; 2]);

impl StateMatrix {
    pub const IDENTITY: StateMatrix = StateMatrix([[1.0, 0.0], [0.0, 1.0]]);

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }
}

impl Mul for StateMatrix {
    type Output = StateMatrix;

    fn mul(self, rhs: StateMatrix) -> StateMatrix {
        let (a, b) = (&self.0, &rhs.0);
        StateMatrix([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }
}

fn combine(phi0: f64, phi1: f64, sigma: f64, lambda: f64) -> StateMatrix {
    StateMatrix([
        [phi0 + phi1 * sigma, phi1],
        [-phi1 * (sigma * sigma + lambda), phi0 - phi1 * sigma],
    ])
}

/// Propagator over one segment of constant `σ`.
pub fn step_matrix(sigma: f64, h: f64, lambda: f64) -> StateMatrix {
    let (phi0, phi1) = phi_pair(lambda, h);
    combine(phi0, phi1, sigma, lambda)
}

/// [`step_matrix`] divided by `e^{s}`, returned with `s`.
pub fn step_matrix_scaled(sigma: f64, h: f64, lambda: f64) -> (StateMatrix, f64) {
    let (phi0, phi1, s) = phi_pair_scaled(lambda, h);
    (combine(phi0, phi1, sigma, lambda), s)
}

/// Ordered product of segment propagators over a whole edge (first segment
/// applied first), scaled by `e^{−s}`; returns the product and `s`.
pub fn edge_propagator(potential: &PotentialSpec, unit: f64, lambda: f64) -> (StateMatrix, f64) {
    potential.segments().fold((StateMatrix::IDENTITY, 0.0), |(acc, s), (sigma, a, b)| {
        let h = to_f64(b - a) * unit;
        let (m, ds) = step_matrix_scaled(sigma, h, lambda);
        (m * acc, s + ds)
    })
}

/// End-of-edge values of the fundamental solutions `C`, `S` and their
/// quasi-derivatives, for initial data `C(0) = S^{[1]}(0) = 1`,
/// `C^{[1]}(0) = S(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalSolution {
    pub c: f64,
    pub c1: f64,
    pub s: f64,
    pub s1: f64,
}

impl FundamentalSolution {
    fn from_matrix(m: &StateMatrix) -> Self {
        FundamentalSolution { c: m.0[0][0], c1: m.0[1][0], s: m.0[0][1], s1: m.0[1][1] }
    }

    /// `⟨C, S⟩ = C·S^{[1]} − C^{[1]}·S`, equal to 1.
    pub fn wronskian(&self) -> f64 {
        self.c * self.s1 - self.c1 * self.s
    }

    pub fn scaled(&self, factor: f64) -> Self {
        FundamentalSolution {
            c: self.c * factor,
            c1: self.c1 * factor,
            s: self.s * factor,
            s1: self.s1 * factor,
        }
    }
}

/// Fundamental solutions of an edge with potential `potential` in physical units.
pub fn fundamental_solutions_for(potential: &PotentialSpec, unit: f64, lambda: f64) -> FundamentalSolution {
    let (m, s) = edge_propagator(potential, unit, lambda);
    FundamentalSolution::from_matrix(&m).scaled(s.exp())
}

/// Fundamental solutions at `x_j = |e_j|`.
pub fn fundamental_solutions(graph: &ValidatedGraph, j: usize, lambda: f64) -> FundamentalSolution {
    fundamental_solutions_for(graph.potential(j), graph.unit(), lambda)
}

/// Fundamental solutions divided by `e^{s}`, together with `s`.
pub fn fundamental_solutions_scaled(
    graph: &ValidatedGraph,
    j: usize,
    lambda: f64,
) -> (FundamentalSolution, f64) {
    let (m, s) = edge_propagator(graph.potential(j), graph.unit(), lambda);
    (FundamentalSolution::from_matrix(&m), s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Rational;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    /// Classical RK4 on the first-order quasi-derivative system with piecewise
    /// constant σ; fixed step, independent of the closed-form propagator.
    fn rk4(segments: &[(f64, f64)], lambda: f64, init: [f64; 2], step: f64) -> [f64; 2] {
        let mut y = init;
        for &(sigma, len) in segments {
            let n = (len / step).round() as usize;
            let h = len / n as f64;
            let f = |v: [f64; 2]| [sigma * v[0] + v[1], -(sigma * sigma + lambda) * v[0] - sigma * v[1]];
            for _ in 0..n {
                let k1 = f(y);
                let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
                let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
                let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]]);
                y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
                y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            }
        }
        y
    }

    #[test]
    fn phi_pair_examples() {
        assert_eq!(phi_pair(0.0, 0.7), (1.0, 0.7));
        let (a, b) = phi_pair(PI * PI, 1.0);
        assert!(close(a, -1.0, 1e-15) && b.abs() < 1e-15);
        let (a, b) = phi_pair(-1.0, 1.0);
        assert!(close(a, 1.543_080_634_815_243_7, 1e-15));
        assert!(close(b, 1.175_201_193_643_801_4, 1e-15));
    }

    #[test]
    fn phi_pair_series_matches_closed_form_at_switch() {
        for &lam in &[1e-4, -1e-4, 0.99e-4, -0.99e-4, 1.01e-4] {
            let (s0, s1) = phi_series(lam, 1.0);
            let (c0, c1) = if lam > 0.0 {
                let r: f64 = lam.sqrt();
                (r.cos(), r.sin() / r)
            } else {
                let k: f64 = (-lam).sqrt();
                (k.cosh(), k.sinh() / k)
            };
            assert!(close(s0, c0, 1e-15) && close(s1, c1, 1e-15), "{lam}");
        }
    }

    #[test]
    fn scaled_pair_is_consistent() {
        for &lam in &[-0.5, -30.0, -400.0] {
            let (a, b) = phi_pair(lam, 0.8);
            let (sa, sb, s) = phi_pair_scaled(lam, 0.8);
            assert!(close(sa * s.exp(), a, 1e-14) && close(sb * s.exp(), b, 1e-14));
        }
    }

    #[test]
    fn step_matrix_examples() {
        let rho: f64 = 1.7;
        let h = 0.9;
        let m = step_matrix(0.0, h, rho * rho);
        let expect = [[(rho * h).cos(), (rho * h).sin() / rho], [-rho * (rho * h).sin(), (rho * h).cos()]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(m.0[i][j], expect[i][j], 1e-14));
            }
        }
        assert_eq!(step_matrix(0.0, 2.5, 0.0), StateMatrix([[1.0, 2.5], [0.0, 1.0]]));
        assert_eq!(step_matrix(1.0, 1.0, 0.0), StateMatrix([[2.0, 1.0], [-1.0, 0.0]]));
    }

    #[test]
    fn step_matrix_matches_rk4_oracle() {
        let m = step_matrix(1.0, 1.0, 0.0);
        let c = rk4(&[(1.0, 1.0)], 0.0, [1.0, 0.0], 1e-4);
        let s = rk4(&[(1.0, 1.0)], 0.0, [0.0, 1.0], 1e-4);
        assert!(close(m.0[0][0], c[0], 1e-10) && close(m.0[1][0], c[1], 1e-10));
        assert!(close(m.0[0][1], s[0], 1e-10) && close(m.0[1][1], s[1], 1e-10));
    }

    #[test]
    fn zero_potential_edge_examples() {
        let pot = PotentialSpec::zero(Rational::from_integer(1));
        let f = fundamental_solutions_for(&pot, 1.0, PI * PI);
        assert!(close(f.c, -1.0, 1e-14) && f.c1.abs() < 1e-13);
        assert!(f.s.abs() < 1e-15 && close(f.s1, -1.0, 1e-14));
        for &len in &[0.3, 1.0, 7.5] {
            let f = fundamental_solutions_for(&pot, len, 0.0);
            assert_eq!(f, FundamentalSolution { c: 1.0, c1: 0.0, s: len, s1: 1.0 });
        }
    }

    #[test]
    fn two_segment_edge_matches_rk4_oracle() {
        let pot = PotentialSpec::delta(Rational::from_integer(1), Rational::new(1, 2), 1.0);
        let f = fundamental_solutions_for(&pot, 1.0, 1.0);
        let segs = [(0.0, 0.5), (1.0, 0.5)];
        let c = rk4(&segs, 1.0, [1.0, 0.0], 1e-5);
        let s = rk4(&segs, 1.0, [0.0, 1.0], 1e-5);
        for (a, b) in [(f.c, c[0]), (f.c1, c[1]), (f.s, s[0]), (f.s1, s[1])] {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn splitting_a_segment_changes_nothing() {
        let whole = PotentialSpec::constant(Rational::from_integer(2), 0.7);
        let split = PotentialSpec {
            breakpoints: vec![Rational::from_integer(0), Rational::new(2, 3), Rational::from_integer(2)],
            values: vec![0.7, 0.7],
        };
        for &lam in &[-20.0, -1.0, 0.0, 0.3, 5.0, 80.0] {
            let a = fundamental_solutions_for(&whole, 1.0, lam);
            let b = fundamental_solutions_for(&split, 1.0, lam);
            let scale = a.c.abs().max(a.c1.abs()).max(a.s.abs()).max(a.s1.abs());
            for (x, y) in [(a.c, b.c), (a.c1, b.c1), (a.s, b.s), (a.s1, b.s1)] {
                assert!((x - y).abs() <= 1e-12 * scale, "{lam}: {x} vs {y}");
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn wronskian_is_one(
            values in proptest::collection::vec(-5.0f64..5.0, 1..5),
            lambda in -10.0f64..400.0,
        ) {
            let n = values.len() as i64;
            let breakpoints = (0..=n).map(|i| Rational::new(i, n)).collect();
            let pot = PotentialSpec { breakpoints, values };
            let f = fundamental_solutions_for(&pot, 1.3, lambda);
            proptest::prop_assert!((f.wronskian() - 1.0).abs() <= 1e-10);
        }
    }
}
