//! Characteristic functions of the lasso boundary value problems.
//!
//! With `C_j, S_j` the fundamental solutions at the vertex end of each edge,
//!
//! ```text
//! Δ(λ, T)     = C_0 + S_0^{[1]} − 2
//! Δ(λ, G_0)   = (−1)^p Σ_j C_j^{[1]} Π_{i≠j} C_i
//! Δ(λ, L(G))  = S_0 Δ(λ, G_0) + (−1)^p Δ(λ, T) Π_k C_k
//! ```
//!
//! and `L_j(G)` (Dirichlet at the free end of pendant `j`) is obtained by
//! replacing `(C_j, C_j^{[1]})` with `(S_j, S_j^{[1]})`.
//!
//! For `λ → −∞` every term grows like `e^{√−λ |G|}`; evaluation is done on
//! values scaled by `e^{−√−λ |e_j|}` per edge and reported as [`CharValue`].

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::ValidatedGraph;
use crate::integrator::{fundamental_solutions_scaled, step_matrix_scaled, FundamentalSolution};

/// Which boundary value problem: `L(G)` or `L_j(G)` for pendant `j ∈ 1..=p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    L,
    Lj(usize),
}

impl Problem {
    pub fn check(self, graph: &ValidatedGraph) -> Result<Self> {
        match self {
            Problem::Lj(j) if j == 0 || j > graph.p() => Err(Error::BadIndex { index: j, p: graph.p() }),
            _ => Ok(self),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::L => write!(f, "L"),
            Problem::Lj(j) => write!(f, "L_{j}"),
        }
    }
}

/// A real number stored as `mantissa · e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharValue {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl CharValue {
    pub fn plain(x: f64) -> Self {
        CharValue { mantissa: x, log_scale: 0.0 }
    }

    /// The value itself; may overflow to infinity for very negative `λ`.
    pub fn value(&self) -> f64 {
        self.mantissa * self.log_scale.exp()
    }

    pub fn ratio(&self, other: &CharValue) -> f64 {
        self.mantissa / other.mantissa * (self.log_scale - other.log_scale).exp()
    }

    pub fn scale_by(self, k: f64) -> Self {
        CharValue { mantissa: self.mantissa * k, ..self }
    }

    pub fn signum(&self) -> f64 {
        self.mantissa.signum()
    }
}

fn parity(p: usize) -> f64 {
    if p.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Scaled endpoint data of every edge at one `λ`.
#[derive(Debug, Clone)]
pub struct EndpointData {
    fs: Vec<FundamentalSolution>,
    scales: Vec<f64>,
}

impl EndpointData {
    pub fn new(graph: &ValidatedGraph, lambda: f64) -> Self {
        let (fs, scales) = (0..graph.num_edges())
            .map(|j| fundamental_solutions_scaled(graph, j, lambda))
            .unzip();
        EndpointData { fs, scales }
    }

    /// Endpoint data of the same geometry with zero potential.
    pub fn free(graph: &ValidatedGraph, lambda: f64) -> Self {
        let (fs, scales) = (0..graph.num_edges())
            .map(|j| {
                let (m, s) = step_matrix_scaled(0.0, graph.length(j), lambda);
                (FundamentalSolution { c: m.0[0][0], c1: m.0[1][0], s: m.0[0][1], s1: m.0[1][1] }, s)
            })
            .unzip();
        EndpointData { fs, scales }
    }

    fn p(&self) -> usize {
        self.fs.len() - 1
    }

    fn pendant_scale(&self) -> f64 {
        self.scales[1..].iter().sum()
    }

    /// Pendant endpoint values with edge `dirichlet` switched to `(S, S^{[1]})`.
    fn pendant_pairs(&self, dirichlet: Option<usize>) -> Vec<(f64, f64)> {
        (1..self.fs.len())
            .map(|j| {
                let f = &self.fs[j];
                if Some(j) == dirichlet {
                    (f.s, f.s1)
                } else {
                    (f.c, f.c1)
                }
            })
            .collect()
    }

    pub fn delta_t(&self) -> CharValue {
        let f = &self.fs[0];
        let s = self.scales[0];
        CharValue { mantissa: f.c + f.s1 - 2.0 * (-s).exp(), log_scale: s }
    }

    /// `(−1)^p Σ_j D_j Π_{i≠j} V_i` over pendant pairs `(V, D)`, ascending id.
    fn star(&self, pairs: &[(f64, f64)]) -> CharValue {
        let mut sum = 0.0;
        for j in 0..pairs.len() {
            let mut term = pairs[j].1;
            for (i, &(v, _)) in pairs.iter().enumerate() {
                if i != j {
                    term *= v;
                }
            }
            sum += term;
        }
        CharValue { mantissa: parity(self.p()) * sum, log_scale: self.pendant_scale() }
    }

    pub fn delta_g0(&self) -> CharValue {
        self.star(&self.pendant_pairs(None))
    }

    /// Star characteristic function with Dirichlet data at pendant `k`.
    pub fn delta_k_g0(&self, k: usize) -> CharValue {
        self.star(&self.pendant_pairs(Some(k)))
    }

    fn assemble(&self, dirichlet: Option<usize>) -> CharValue {
        let pairs = self.pendant_pairs(dirichlet);
        let star = self.star(&pairs);
        let cycle = self.delta_t();
        let prod: f64 = pairs.iter().map(|&(v, _)| v).product();
        let s0 = self.fs[0].s;
        CharValue {
            mantissa: s0 * star.mantissa + parity(self.p()) * cycle.mantissa * prod,
            log_scale: self.scales[0] + star.log_scale,
        }
    }

    pub fn delta_l(&self) -> CharValue {
        self.assemble(None)
    }

    pub fn delta_lj(&self, j: usize) -> CharValue {
        self.assemble(Some(j))
    }

    pub fn delta(&self, problem: Problem) -> CharValue {
        match problem {
            Problem::L => self.delta_l(),
            Problem::Lj(j) => self.delta_lj(j),
        }
    }
}

/// `Δ(λ, L(T)) = C_0(|e_0|, λ) + S_0^{[1]}(|e_0|, λ) − 2`.
pub fn delta_t(graph: &ValidatedGraph, lambda: f64) -> f64 {
    EndpointData::new(graph, lambda).delta_t().value()
}

pub fn delta_g0(graph: &ValidatedGraph, lambda: f64) -> f64 {
    EndpointData::new(graph, lambda).delta_g0().value()
}

pub fn delta_k_g0(graph: &ValidatedGraph, k: usize, lambda: f64) -> Result<f64> {
    Problem::Lj(k).check(graph)?;
    Ok(EndpointData::new(graph, lambda).delta_k_g0(k).value())
}

pub fn delta_l(graph: &ValidatedGraph, lambda: f64) -> f64 {
    EndpointData::new(graph, lambda).delta_l().value()
}

pub fn delta_lj(graph: &ValidatedGraph, j: usize, lambda: f64) -> Result<f64> {
    Problem::Lj(j).check(graph)?;
    Ok(EndpointData::new(graph, lambda).delta_lj(j).value())
}

/// Characteristic function of `problem`, in scaled form.
pub fn delta_scaled(graph: &ValidatedGraph, problem: Problem, lambda: f64) -> Result<CharValue> {
    problem.check(graph)?;
    Ok(EndpointData::new(graph, lambda).delta(problem))
}

pub fn delta(graph: &ValidatedGraph, problem: Problem, lambda: f64) -> Result<f64> {
    delta_scaled(graph, problem, lambda).map(|v| v.value())
}

/// Zero-potential characteristic function `Δ_0(λ, problem)` at any real `λ`.
pub fn delta0_scaled(graph: &ValidatedGraph, problem: Problem, lambda: f64) -> Result<CharValue> {
    problem.check(graph)?;
    Ok(EndpointData::free(graph, lambda).delta(problem))
}

pub fn delta0(graph: &ValidatedGraph, problem: Problem, lambda: f64) -> Result<f64> {
    delta0_scaled(graph, problem, lambda).map(|v| v.value())
}

/// `d_0(ρ) = Δ_0(ρ², L(G))` from the closed trigonometric form
/// `(−1)^p [2(cos ρ|e_0| − 1) Π cos ρ|e_k| − sin ρ|e_0| Σ_j sin ρ|e_j| Π_{i≠j} cos ρ|e_i|]`.
pub fn delta0_l(graph: &ValidatedGraph, rho: f64) -> f64 {
    let p = graph.p();
    let l0 = graph.length(0);
    let cos: Vec<f64> = (1..=p).map(|k| (rho * graph.length(k)).cos()).collect();
    let sin: Vec<f64> = (1..=p).map(|k| (rho * graph.length(k)).sin()).collect();
    let prod: f64 = cos.iter().product();
    let mut sum = 0.0;
    for j in 0..p {
        let mut term = sin[j];
        for (i, c) in cos.iter().enumerate() {
            if i != j {
                term *= c;
            }
        }
        sum += term;
    }
    parity(p) * (2.0 * ((rho * l0).cos() - 1.0) * prod - (rho * l0).sin() * sum)
}

/// `Δ_0(ρ², L_j(G))` with `C = cos`, `S = sin(ρl)/ρ`, `C^{[1]} = −ρ sin`, `S^{[1]} = cos`.
pub fn delta0_lj(graph: &ValidatedGraph, j: usize, rho: f64) -> Result<f64> {
    Problem::Lj(j).check(graph)?;
    let p = graph.p();
    let sinc = |l: f64| if rho == 0.0 { l } else { (rho * l).sin() / rho };
    let l0 = graph.length(0);
    let mut pairs = Vec::with_capacity(p);
    for k in 1..=p {
        let l = graph.length(k);
        pairs.push(if k == j { (sinc(l), (rho * l).cos()) } else { ((rho * l).cos(), -rho * (rho * l).sin()) });
    }
    let mut star = 0.0;
    for a in 0..p {
        let mut term = pairs[a].1;
        for (b, &(v, _)) in pairs.iter().enumerate() {
            if a != b {
                term *= v;
            }
        }
        star += term;
    }
    let prod: f64 = pairs.iter().map(|&(v, _)| v).product();
    let cycle = 2.0 * ((rho * l0).cos() - 1.0);
    Ok(parity(p) * (sinc(l0) * star + cycle * prod))
}

/// Weyl function `M_j(λ) = Δ(λ, L_j(G)) / Δ(λ, L(G))`.
pub fn weyl(graph: &ValidatedGraph, j: usize, lambda: f64) -> Result<f64> {
    Problem::Lj(j).check(graph)?;
    let data = EndpointData::new(graph, lambda);
    let den = data.delta_l();
    let magnitude = den.value().abs();
    if magnitude < 1e-9 * (1.0 + lambda.abs()) {
        return Err(Error::NearPole { lambda, magnitude });
    }
    Ok(data.delta_lj(j).ratio(&den))
}

/// Poles of `M_j` on `[rho_lo, rho_hi]`, as `ρ` values.
///
/// Candidates are sign changes of `1/M_j = Δ(L)/Δ(L_j)` on a grid of
/// spacing `step`, refined by bisection; a candidate is kept when [`weyl`]
/// reports [`Error::NearPole`] there, which discards the sign changes coming
/// from zeros of `Δ(L_j)`.
pub fn weyl_poles(graph: &ValidatedGraph, j: usize, rho_lo: f64, rho_hi: f64, step: f64) -> Result<Vec<f64>> {
    Problem::Lj(j).check(graph)?;
    let inverse = |rho: f64| {
        let data = EndpointData::new(graph, rho * rho);
        let num = data.delta_l();
        let den = data.delta_lj(j);
        num.mantissa / den.mantissa
    };
    let cells = ((rho_hi - rho_lo) / step).ceil().max(1.0) as usize;
    let mut poles = Vec::new();
    let mut a = rho_lo;
    let mut fa = inverse(a);
    for i in 1..=cells {
        let b = if i == cells { rho_hi } else { rho_lo + i as f64 * step };
        let fb = inverse(b);
        if fa == 0.0 || (fa.is_finite() && fb.is_finite() && fb != 0.0 && (fa > 0.0) != (fb > 0.0)) {
            let rho = if fa == 0.0 { a } else { crate::roots::bisect(&inverse, a, b, fa, 1e-13 * (1.0 + b)) };
            if matches!(weyl(graph, j, rho * rho), Err(Error::NearPole { .. })) {
                poles.push(rho);
            }
        }
        a = b;
        fa = fb;
    }
    Ok(poles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{validate, GraphSpec, PotentialSpec, Rational};
    use std::f64::consts::PI;

    fn lasso(unit: f64, lens: &[i64]) -> ValidatedGraph {
        let ls: Vec<Rational> = lens.iter().map(|&l| Rational::from_integer(l)).collect();
        validate(&GraphSpec::lasso(unit, &ls)).unwrap()
    }

    fn delta_graph(c: f64) -> ValidatedGraph {
        let one = Rational::from_integer(1);
        let spec = GraphSpec::lasso(PI, &[one, one, one])
            .with_potential(1, PotentialSpec::delta(one, Rational::new(1, 2), c));
        validate(&spec).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    /// Determinant of the linear system for the unknowns (A, B, a_1..a_p):
    /// continuity on the cycle, continuity at each pendant, Kirchhoff.
    fn boundary_determinant(graph: &ValidatedGraph, dirichlet: Option<usize>, lambda: f64) -> f64 {
        let p = graph.p();
        let n = p + 2;
        let f: Vec<FundamentalSolution> =
            (0..=p).map(|j| crate::integrator::fundamental_solutions(graph, j, lambda)).collect();
        let mut m = vec![vec![0.0; n]; n];
        m[0][0] = f[0].c - 1.0;
        m[0][1] = f[0].s;
        for k in 1..=p {
            let (v, _) = if Some(k) == dirichlet { (f[k].s, f[k].s1) } else { (f[k].c, f[k].c1) };
            m[k][0] = -1.0;
            m[k][k + 1] = v;
        }
        m[p + 1][0] = f[0].c1;
        m[p + 1][1] = f[0].s1 - 1.0;
        for k in 1..=p {
            m[p + 1][k + 1] = if Some(k) == dirichlet { f[k].s1 } else { f[k].c1 };
        }
        // Gaussian elimination with partial pivoting
        let mut det = 1.0;
        for col in 0..n {
            let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
            if m[piv][col] == 0.0 {
                return 0.0;
            }
            if piv != col {
                m.swap(piv, col);
                det = -det;
            }
            det *= m[col][col];
            for r in col + 1..n {
                let factor = m[r][col] / m[col][col];
                for c in col..n {
                    m[r][c] -= factor * m[col][c];
                }
            }
        }
        det
    }

    #[test]
    fn cycle_examples() {
        let g = lasso(1.0, &[1, 1]);
        assert!(delta_t(&g, 4.0 * PI * PI).abs() < 1e-13);
        assert_eq!(delta_t(&g, 0.0), 0.0);
        assert!((delta_t(&g, PI * PI) + 4.0).abs() < 1e-13);
    }

    #[test]
    fn star_examples() {
        let g = lasso(1.0, &[1, 1, 1]);
        for &rho in &[0.3, 1.1, 2.9] {
            let lam = rho * rho;
            assert!(rel(delta_g0(&g, lam), -rho * (2.0 * rho).sin()) < 1e-13);
        }
        let g1 = lasso(1.0, &[1, 2]);
        let rho: f64 = 0.8;
        assert!(rel(delta_g0(&g1, rho * rho), rho * (2.0 * rho).sin()) < 1e-13);
        assert_eq!(delta_g0(&g, 0.0), 0.0);
        assert!(matches!(delta_k_g0(&g, 3, 1.0), Err(Error::BadIndex { .. })));
    }

    #[test]
    fn delta_l_examples() {
        let g = lasso(1.0, &[1, 1, 1]);
        let c1: f64 = 1f64.cos();
        let expect = 1f64.sin() * -(2f64.sin()) + 2.0 * (c1 - 1.0) * c1 * c1;
        assert!(rel(delta_l(&g, 1.0), expect) < 1e-13);
        assert_eq!(delta_l(&g, 0.0), 0.0);
    }

    #[test]
    fn delta_lj_examples() {
        // p = 1, unit lengths: Δ(L_1) = −(sin ρ / ρ)(3 cos ρ − 2)
        let g = lasso(1.0, &[1, 1]);
        for &rho in &[0.4f64, 1.3, 2.2] {
            let expect = -(rho.sin() / rho) * (3.0 * rho.cos() - 2.0);
            assert!(rel(delta_lj(&g, 1, rho * rho).unwrap(), expect) < 1e-12);
        }
        let root = (2.0f64 / 3.0).acos();
        assert!(delta_lj(&g, 1, root * root).unwrap().abs() < 1e-14);
        // S_0(0)·Δ_1(0, G_0) = |e_0|·(−1)^p, the Dirichlet problem has no zero mode
        assert_eq!(delta_lj(&lasso(1.0, &[1, 2, 3]), 1, 0.0).unwrap(), 1.0);
        assert!(matches!(delta_lj(&g, 2, 1.0), Err(Error::BadIndex { index: 2, p: 1 })));
    }

    #[test]
    fn matches_boundary_determinant() {
        let g = delta_graph(0.5);
        let p = g.p();
        let sign = parity(p + 1);
        for &lam in &[-3.0, -0.2, 0.37, 1.9, 5.5, 12.0] {
            let det = boundary_determinant(&g, None, lam);
            assert!(rel(delta_l(&g, lam), sign * det) < 1e-10, "{lam}");
            for j in 1..=p {
                let det = boundary_determinant(&g, Some(j), lam);
                assert!(rel(delta_lj(&g, j, lam).unwrap(), sign * det) < 1e-10, "{lam} {j}");
            }
        }
    }

    #[test]
    fn zero_potential_closed_forms_agree() {
        let g = validate(&GraphSpec::lasso(
            1.0,
            &[Rational::new(3, 2), Rational::new(1, 2), Rational::from_integer(1), Rational::new(5, 4)],
        ))
        .unwrap();
        let mut x = 0.123f64;
        for _ in 0..100 {
            x = (x * 7.31 + 0.917).fract();
            let rho = 50.0 * x;
            let lam = rho * rho;
            let a = delta0_l(&g, rho);
            let b = delta_l(&g, lam);
            let scale = 1.0 + rho;
            assert!((a - b).abs() <= 1e-12 * scale.powi(2), "{rho}: {a} vs {b}");
            for j in 1..=g.p() {
                let a = delta0_lj(&g, j, rho).unwrap();
                let b = delta_lj(&g, j, lam).unwrap();
                assert!((a - b).abs() <= 1e-12 * scale.powi(2), "{rho} {j}");
            }
            assert!((delta0(&g, Problem::L, lam).unwrap() - a).abs() <= 1e-12 * scale.powi(2));
        }
    }

    #[test]
    fn delta0_examples() {
        let g = lasso(PI, &[1, 1, 1]);
        assert!((delta0_l(&g, 1.0) + 4.0).abs() < 1e-13);
        assert_eq!(delta0_l(&g, 0.0), 0.0);
        assert!(matches!(delta0_lj(&g, 0, 1.0), Err(Error::BadIndex { .. })));
    }

    #[test]
    fn evenness_in_rho() {
        let g = delta_graph(0.5);
        for &rho in &[0.3f64, 1.7, 4.4] {
            assert_eq!(delta_l(&g, rho * rho), delta_l(&g, (-rho) * (-rho)));
            assert_eq!(delta0_l(&g, rho), delta0_l(&g, -rho));
        }
    }

    #[test]
    fn scaled_values_survive_large_negative_lambda() {
        // the ratio approaches 1 like c²/(2√−λ)
        let g = delta_graph(0.2);
        let free = delta0_scaled(&g, Problem::L, -1e4).unwrap();
        let full = delta_scaled(&g, Problem::L, -1e4).unwrap();
        assert!(full.value().is_infinite());
        assert!((full.ratio(&free) - 1.0).abs() < 1e-3);
        let g = delta_graph(0.5);
        let near = delta_scaled(&g, Problem::L, -1e3).unwrap();
        let free = delta0_scaled(&g, Problem::L, -1e3).unwrap();
        assert!((near.ratio(&free) - 1.0).abs() < 1e-2);
        assert!((near.value() / free.value() - near.ratio(&free)).abs() < 1e-12);
    }

    #[test]
    fn weyl_poles_of_unit_lasso() {
        // p = 1, unit lengths: Δ(L) = −(3cos ρ + 1)(cos ρ − 1), Δ(L_1) = −(sin ρ/ρ)(3cos ρ − 2);
        // at ρ = 2π the double zero of Δ(L) outweighs the simple zero of Δ(L_1)
        let g = lasso(1.0, &[1, 1]);
        let poles = weyl_poles(&g, 1, 0.05, 7.0, 0.01).unwrap();
        let a = (-1.0f64 / 3.0).acos();
        let expect = [a, 2.0 * PI - a, 2.0 * PI];
        assert_eq!(poles.len(), expect.len(), "{poles:?}");
        for (p, e) in poles.iter().zip(expect) {
            assert!((p - e).abs() < 1e-9, "{p} vs {e}");
        }
    }

    #[test]
    fn weyl_behaviour() {
        let g = lasso(PI, &[1, 1, 1]);
        let lam = -100.0;
        let m = weyl(&g, 1, lam).unwrap();
        let expect = delta0_lj(&g, 1, 0.0).map(|_| {
            let d = EndpointData::free(&g, lam);
            d.delta_lj(1).ratio(&d.delta_l())
        });
        assert!(rel(m, expect.unwrap()) < 1e-12);
        assert!(matches!(weyl(&g, 1, 0.25), Err(Error::NearPole { .. })));
        assert!(matches!(weyl(&g, 3, -1.0), Err(Error::BadIndex { .. })));
    }
}
