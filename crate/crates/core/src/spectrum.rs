//! Zero-potential trigonometric structure and the perturbed eigenvalue catalog.
//!
//! With zero potential the characteristic function is a trigonometric
//! polynomial in `ρ` (divided by `ρ` for `L_j`), periodic with period `τ`.
//! Its zeros on `[0, τ/2]` generate the unperturbed grid
//! `ρ⁰ = |τn + α|`; perturbed eigenvalues are matched to that grid in order.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::charfn::{delta_scaled, CharValue, Problem};
use crate::error::{Error, Result};
use crate::graph::{to_f64, ValidatedGraph};
use crate::roots::{bisect, scan, ScanOptions};
use crate::trig::TrigPoly;

/// `Δ_0(ρ², problem) = poly(ρ) / ρ^{rho_power}`.
#[derive(Debug, Clone, PartialEq)]
pub struct D0Expansion {
    pub poly: TrigPoly,
    pub rho_power: u32,
}

impl D0Expansion {
    /// `Δ_0` at real `λ`, through the `λ`-series near 0 and the closed forms elsewhere.
    pub fn eval_lambda(&self, lambda: f64) -> f64 {
        self.eval_lambda_scaled(lambda).value()
    }

    /// [`Self::eval_lambda`] in scaled form, finite for any `λ < 0`.
    pub fn eval_lambda_scaled(&self, lambda: f64) -> CharValue {
        let w = self.max_omega();
        if lambda.abs() * w * w < 1e-2 {
            let coeffs = self.poly.lambda_series(self.rho_power, 24);
            return CharValue::plain(coeffs.iter().rev().fold(0.0, |acc, c| acc * lambda + c));
        }
        if lambda > 0.0 {
            let rho = lambda.sqrt();
            return CharValue::plain(self.poly.eval(rho) / rho.powi(self.rho_power as i32));
        }
        // cos(iκx) = cosh κx, sin(iκx)/(iκ) = sinh κx / κ, all divided by e^{wκ}
        let kappa = (-lambda).sqrt();
        let top = w * kappa;
        let half_exp = |x: f64| (0.5 * (x - top).exp(), 0.5 * (-x - top).exp());
        let mut acc = 0.0;
        if self.rho_power == 0 {
            for (f, c) in self.poly.cos_terms() {
                let (a, b) = half_exp(to_f64(f) * self.poly.unit() * kappa);
                acc += c * (a + b);
            }
        } else {
            for (f, c) in self.poly.sin_terms() {
                let (a, b) = half_exp(to_f64(f) * self.poly.unit() * kappa);
                acc += c * (a - b) / kappa;
            }
        }
        CharValue { mantissa: acc, log_scale: top }
    }

    pub fn eval_rho(&self, rho: f64) -> f64 {
        if rho == 0.0 {
            return self.eval_lambda(0.0);
        }
        self.poly.eval(rho) / rho.powi(self.rho_power as i32)
    }

    pub(crate) fn max_omega(&self) -> f64 {
        let top = self
            .poly
            .cos_terms()
            .into_iter()
            .chain(self.poly.sin_terms())
            .map(|(f, _)| to_f64(f))
            .fold(0.0, f64::max);
        top * self.poly.unit()
    }

    /// Coefficients of `Δ_0` in powers of `λ`.
    pub fn lambda_series(&self, count: usize) -> Vec<f64> {
        self.poly.lambda_series(self.rho_power, count)
    }
}

fn parity(p: usize) -> f64 {
    if p.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Exact trigonometric expansion of the zero-potential characteristic function.
pub fn expand_d0(graph: &ValidatedGraph, problem: Problem) -> Result<D0Expansion> {
    let problem = problem.check(graph)?;
    let u = graph.unit();
    let p = graph.p();
    let cos = |j: usize| TrigPoly::cos(u, graph.rational_length(j), 1.0);
    let sin = |j: usize| TrigPoly::sin(u, graph.rational_length(j), 1.0);
    let cycle = cos(0).scale(2.0).add(&TrigPoly::constant(u, -2.0));
    let product = |skip: &[usize]| {
        (1..=p)
            .filter(|k| !skip.contains(k))
            .fold(TrigPoly::constant(u, 1.0), |acc, k| acc.mul(&cos(k)))
    };
    let (poly, rho_power) = match problem {
        Problem::L => {
            // (−1)^p [(2cos₀ − 2) Π cos_k − sin₀ Σ_j sin_j Π_{i≠j} cos_i]
            let mut star = TrigPoly::zero(u);
            for j in 1..=p {
                star = star.add(&sin(j).mul(&product(&[j])));
            }
            let poly = cycle.mul(&product(&[])).add(&sin(0).mul(&star).scale(-1.0));
            (poly, 0)
        }
        Problem::Lj(j) => {
            // ρΔ_0 = (−1)^p [sin₀ (cos_j Π_{k≠j} cos_k − sin_j Σ_{k≠j} sin_k Π_{i≠j,k} cos_i)
            //                + (2cos₀ − 2) sin_j Π_{k≠j} cos_k]
            let mut star = cos(j).mul(&product(&[j]));
            for k in (1..=p).filter(|&k| k != j) {
                star = star.add(&sin(j).mul(&sin(k)).mul(&product(&[j, k])).scale(-1.0));
            }
            let poly = sin(0).mul(&star).add(&cycle.mul(&sin(j)).mul(&product(&[j])));
            (poly, 1)
        }
    };
    Ok(D0Expansion { poly: poly.scale(parity(p)).pruned(1e-14), rho_power })
}

/// Smallest period `τ = 2π / (g·unit)`, `g` the rational gcd of the frequencies.
pub fn smallest_period(poly: &TrigPoly) -> Result<f64> {
    let g = poly.frequency_gcd().ok_or(Error::ConstantFunction)?;
    Ok(2.0 * std::f64::consts::PI / (to_f64(g) * poly.unit()))
}

/// A zero of the reduced polynomial on `[0, τ/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaseZero {
    pub alpha: f64,
    /// Number of eigenvalue families attached to this zero.
    pub mu: usize,
    /// Order of the zero of `d_0` at `ρ = τn ± α` away from `ρ = 0`.
    pub rho_order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// `ρ⁰ = |τn + α|`, `n ∈ ℤ`.
    Symmetric,
    /// `ρ⁰ = τn + α`, `n ≥ n_min`.
    OneSided { n_min: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Family {
    pub k: usize,
    pub alpha: f64,
    pub kind: FamilyKind,
}

impl Family {
    pub fn rho0(&self, tau: f64, n: i64) -> f64 {
        (tau * n as f64 + self.alpha).abs()
    }

    pub fn admits(&self, n: i64) -> bool {
        match self.kind {
            FamilyKind::Symmetric => true,
            FamilyKind::OneSided { n_min } => n >= n_min,
        }
    }

    /// All admissible `n` with `ρ⁰ ≤ rho_max`.
    pub fn indices_up_to(&self, tau: f64, rho_max: f64) -> Vec<i64> {
        let reach = ((rho_max + self.alpha) / tau).floor() as i64 + 1;
        (-reach..=reach)
            .filter(|&n| self.admits(n) && self.rho0(tau, n) <= rho_max)
            .collect()
    }
}

/// Period, base zeros and family structure of one boundary value problem.
#[derive(Debug, Clone)]
pub struct AsymptoticFrame {
    pub problem: Problem,
    pub expansion: D0Expansion,
    pub tau: f64,
    pub zeros: Vec<BaseZero>,
    pub mu0: usize,
    /// `τ/2` is a zero of the reduced polynomial.
    pub half_period_zero: bool,
    /// Smallest gap between distinct unperturbed grid points.
    pub delta: f64,
    pub families: Vec<Family>,
}

#[derive(Serialize)]
struct FrameJson<'a> {
    problem: String,
    tau: f64,
    alphas: Vec<AlphaJson>,
    mu0: usize,
    half_period_zero: bool,
    delta: f64,
    families: &'a [Family],
}

#[derive(Serialize)]
struct AlphaJson {
    alpha: f64,
    mu: usize,
}

impl AsymptoticFrame {
    pub fn new(graph: &ValidatedGraph, problem: Problem) -> Result<Self> {
        let expansion = expand_d0(graph, problem)?;
        let tau = smallest_period(&expansion.poly)?;
        let (raw, half_period_zero) = base_zeros(&expansion.poly, tau)?;
        let nu0 = raw.first().filter(|z| z.0 == 0.0).map_or(0, |z| z.1);
        let mu0 = (nu0 - expansion.rho_power as usize) / 2;

        let mut zeros = Vec::new();
        let mut families = Vec::new();
        for &(alpha, nu) in &raw {
            let boundary = alpha == 0.0 || alpha == tau / 2.0;
            let (sym, one_sided) = if boundary { (nu / 2, nu % 2) } else { (nu, 0) };
            for _ in 0..sym {
                families.push(Family { k: families.len(), alpha, kind: FamilyKind::Symmetric });
            }
            if one_sided == 1 {
                let n_min = if alpha == 0.0 { 1 } else { 0 };
                families.push(Family { k: families.len(), alpha, kind: FamilyKind::OneSided { n_min } });
            }
            zeros.push(BaseZero { alpha, mu: sym + one_sided, rho_order: nu });
        }

        // distinct grid positions on the circle ℝ/τℤ
        let mut points: Vec<f64> = raw.iter().flat_map(|&(a, _)| [a, tau - a]).filter(|&x| x < tau).collect();
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * tau);
        let mut delta = tau / 2.0;
        for w in points.windows(2) {
            delta = delta.min(w[1] - w[0]);
        }
        if let (Some(first), Some(last)) = (points.first(), points.last()) {
            if points.len() > 1 {
                delta = delta.min(first + tau - last);
            }
        }

        Ok(AsymptoticFrame { problem, expansion, tau, zeros, mu0, half_period_zero, delta, families })
    }

    pub fn to_json(&self) -> String {
        let frame = FrameJson {
            problem: self.problem.to_string(),
            tau: self.tau,
            alphas: self.zeros.iter().map(|z| AlphaJson { alpha: z.alpha, mu: z.mu }).collect(),
            mu0: self.mu0,
            half_period_zero: self.half_period_zero,
            delta: self.delta,
            families: &self.families,
        };
        serde_json::to_string_pretty(&frame).expect("frame serializes")
    }

    /// Midpoint between the last grid point at or below `rho` and the next
    /// one: a counting radius that keeps away from every grid point.
    pub fn contour_radius(&self, rho: f64) -> f64 {
        let mut points: Vec<f64> = self.grid(rho + self.tau).iter().map(|g| g.0).collect();
        points.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let below = points.iter().copied().rev().find(|&x| x <= rho).unwrap_or(0.0);
        match points.iter().copied().find(|&x| x > rho) {
            Some(above) => 0.5 * (below + above),
            None => rho,
        }
    }

    /// Unperturbed grid on `[0, rho_max]` as `(ρ⁰, k, n)`, ascending.
    pub fn grid(&self, rho_max: f64) -> Vec<(f64, usize, i64)> {
        let mut out: Vec<(f64, usize, i64)> = self
            .families
            .iter()
            .flat_map(|f| f.indices_up_to(self.tau, rho_max).into_iter().map(move |n| (f.rho0(self.tau, n), f.k, n)))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        out
    }
}

/// Order of the zero of `poly` at `x`: the first derivative exceeding
/// `1e−7` of its bound. `0` when `x` is not a zero.
fn zero_order(poly: &TrigPoly, x: f64) -> Result<usize> {
    const MAX_ORDER: u32 = 12;
    for m in 0..=MAX_ORDER {
        let bound = poly.derivative_bound(m);
        if poly.derivative(m, x).abs() > 1e-7 * bound {
            return Ok(m as usize);
        }
    }
    Err(Error::UnresolvedMultiplicity { alpha: x })
}

/// Zeros of `poly` on `[0, τ/2]` as `(α, order)`, plus whether `τ/2` is one.
pub fn base_zeros(poly: &TrigPoly, tau: f64) -> Result<(Vec<(f64, usize)>, bool)> {
    let half = tau / 2.0;
    let samples = 4000;
    let xs: Vec<f64> = (0..=samples).map(|i| half * i as f64 / samples as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| poly.eval(x)).collect();
    let f = |x: f64| poly.eval(x);
    let df = |x: f64| poly.derivative(1, x);

    let mut candidates = Vec::new();
    for i in 1..samples {
        let (a, b) = (xs[i], xs[i + 1]);
        let (fa, fb) = (vals[i], vals[i + 1]);
        if fa == 0.0 {
            candidates.push(a);
        } else if fb != 0.0 && (fa > 0.0) != (fb > 0.0) {
            candidates.push(bisect(&f, a, b, fa, 1e-15 * tau));
        }
        // interior minimum of |f| at a
        let fp = vals[i - 1];
        if fa != 0.0 && fa.abs() < fp.abs() && fa.abs() <= fb.abs() && (fp > 0.0) == (fa > 0.0) {
            let (l, r) = (xs[i - 1], b);
            let (dl, dr) = (df(l), df(r));
            if dl != 0.0 && dr != 0.0 && (dl > 0.0) != (dr > 0.0) {
                candidates.push(bisect(&df, l, r, dl, 1e-15 * tau));
            }
        }
    }
    // crossings in the first cell
    if vals[0] != 0.0 && vals[1] != 0.0 && (vals[0] > 0.0) != (vals[1] > 0.0) {
        candidates.push(bisect(&f, xs[0], xs[1], vals[0], 1e-15 * tau));
    }

    let snap = 1e-9 * tau;
    let mut zeros: Vec<(f64, usize)> = Vec::new();
    for x in [0.0, half] {
        let nu = zero_order(poly, x)?;
        if nu > 0 {
            zeros.push((x, nu));
        }
    }
    for x in candidates {
        if x < snap || x > half - snap {
            continue;
        }
        let nu = zero_order(poly, x)?;
        if nu == 0 || zeros.iter().any(|z| (z.0 - x).abs() < 1e-7 * tau) {
            continue;
        }
        zeros.push((x, nu));
    }
    zeros.sort_by(|a, b| a.0.total_cmp(&b.0));
    let half_zero = zeros.iter().any(|z| z.0 == half);
    Ok((zeros, half_zero))
}

/// An eigenvalue with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub lambda: f64,
    pub multiplicity: usize,
}

impl Eigenvalue {
    pub fn rho(&self) -> f64 {
        self.lambda.max(0.0).sqrt()
    }
}

/// Lower bound `−K²` on the spectrum used by the scan.
fn negative_reach(graph: &ValidatedGraph) -> f64 {
    1.0 + 2.0 * graph.sigma_variation()
}

/// Zeros of `t ↦ Δ(t|t|, problem)` on `[−K, rho_max]` with `step` in `t`.
fn scan_eigenvalues(
    graph: &ValidatedGraph,
    problem: Problem,
    expansion: &D0Expansion,
    rho_max: f64,
    step: f64,
) -> Result<Vec<Eigenvalue>> {
    problem.check(graph)?;
    let f = |t: f64| {
        let v = delta_scaled(graph, problem, t * t.abs()).expect("problem index checked");
        v.mantissa
    };
    let bound = expansion.poly.derivative_bound(0);
    let power = expansion.rho_power as i32;
    let amplitude = |t: f64| bound / t.abs().max(1e-3).powi(power) * (1.0 + graph.sigma_variation());
    let opts = ScanOptions { step, tol: 1e-11, tangent_from: 0.0, tangent_tol: 1e-11 };
    let roots = scan(&f, &amplitude, -negative_reach(graph), rho_max, opts);
    Ok(roots
        .into_iter()
        .map(|r| Eigenvalue { lambda: r.at * r.at.abs(), multiplicity: r.multiplicity })
        .collect())
}

/// Eigenvalues of `problem` with `ρ ≤ rho_max` (including all negative ones),
/// ascending, each with its multiplicity.
pub fn find_eigenvalues(graph: &ValidatedGraph, problem: Problem, rho_max: f64) -> Result<Vec<Eigenvalue>> {
    let expansion = expand_d0(graph, problem)?;
    let tau = smallest_period(&expansion.poly)?;
    // scan past the end so tangencies at rho_max have a right neighbour
    let eigs = scan_eigenvalues(graph, problem, &expansion, rho_max + tau / 50.0, tau / 200.0)?;
    Ok(eigs.into_iter().filter(|e| e.rho() <= rho_max + ROOT_RESOLUTION).collect())
}

/// One cataloged eigenvalue `λ_nk`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub n: i64,
    pub k: usize,
    pub lambda: f64,
    pub rho: f64,
    pub rho0: f64,
    pub eps: f64,
    pub multiplicity: usize,
}

impl CatalogEntry {
    pub fn lambda0(&self) -> f64 {
        self.rho0 * self.rho0
    }
}

/// Eigenvalues indexed by `(n, k)`, with the frame that defines the indexing.
#[derive(Debug, Clone)]
pub struct SpectrumCatalog {
    pub frame: AsymptoticFrame,
    pub rho_max: f64,
    pub entries: Vec<CatalogEntry>,
    /// `(n, k)` whose `|ε|` is not below `δ/2`; matched by order since every
    /// closer grid position holds a root inside its own window.
    pub outside_window: Vec<(i64, usize)>,
}

/// `|ε|` for an eigenvalue against a grid point, with `ρ = √max(λ, 0)`.
fn rho_distance(lambda: f64, rho0: f64) -> f64 {
    (lambda.max(0.0).sqrt() - rho0).abs()
}

/// Matches eigenvalues (with multiplicity, ascending) to the unperturbed grid
/// on `[0, rho_max]` in order, checking every match lies in its `δ/2` window.
pub fn catalog(eigs: &[Eigenvalue], frame: &AsymptoticFrame, rho_max: f64) -> Result<SpectrumCatalog> {
    let grid = frame.grid(rho_max);
    let mut flat: Vec<(f64, usize)> = Vec::new();
    for e in eigs {
        for _ in 0..e.multiplicity {
            flat.push((e.lambda, e.multiplicity));
        }
    }
    flat.sort_by(|a, b| a.0.total_cmp(&b.0));
    if flat.len() < grid.len() {
        return Err(Error::ScanResolutionTooCoarse(format!(
            "{} eigenvalues found for {} grid points up to rho = {rho_max}",
            flat.len(),
            grid.len()
        )));
    }
    let window = frame.delta / 2.0;
    let beyond: Vec<(f64, usize, i64)> = frame.grid(rho_max + frame.tau).into_iter().filter(|g| g.0 > rho_max).collect();
    let matched: Vec<f64> = flat.iter().zip(&grid).map(|(&(lambda, _), g)| rho_distance(lambda, g.0)).collect();
    let mut entries = Vec::with_capacity(grid.len());
    let mut outside_window = Vec::new();
    for (i, (&(lambda, multiplicity), &(rho0, k, n))) in flat.iter().zip(&grid).enumerate() {
        let dist = matched[i];
        if dist >= window {
            // a grid position at least as close whose own match is not settled
            let rival = grid
                .iter()
                .enumerate()
                .filter(|(r, g)| *r != i && (g.0 - rho0).abs() > 1e-12 * (1.0 + rho0) && matched[*r] >= window)
                .map(|(_, g)| g)
                .chain(&beyond)
                .filter(|g| rho_distance(lambda, g.0) <= dist)
                .min_by(|a, b| rho_distance(lambda, a.0).total_cmp(&rho_distance(lambda, b.0)));
            if let Some(rival) = rival {
                return Err(Error::AssignmentAmbiguity(format!(
                    "lambda = {lambda} assigned in order to (n={n}, k={k}, rho0={rho0}) at distance {dist:.3e} \
                     outside the window {window:.3e}; (n={}, k={}, rho0={}) is at distance {:.3e}",
                    rival.2,
                    rival.1,
                    rival.0,
                    rho_distance(lambda, rival.0)
                )));
            }
            outside_window.push((n, k));
        }
        let rho = lambda.max(0.0).sqrt();
        entries.push(CatalogEntry { n, k, lambda, rho, rho0, eps: rho - rho0, multiplicity });
    }
    // leftovers must belong to grid points beyond rho_max
    for &(lambda, _) in &flat[grid.len()..] {
        if lambda.max(0.0).sqrt() <= rho_max - window {
            return Err(Error::AssignmentAmbiguity(format!(
                "lambda = {lambda} has no unperturbed partner on [0, {rho_max}]"
            )));
        }
    }
    Ok(SpectrumCatalog { frame: frame.clone(), rho_max, entries, outside_window })
}

impl SpectrumCatalog {
    /// Scan, then catalog; refines the scan step when the count falls short.
    pub fn compute(graph: &ValidatedGraph, problem: Problem, rho_max: f64) -> Result<Self> {
        let frame = AsymptoticFrame::new(graph, problem)?;
        if rho_max <= 0.0 {
            return Ok(SpectrumCatalog { frame, rho_max: rho_max.max(0.0), entries: Vec::new(), outside_window: Vec::new() });
        }
        let reach = rho_max + frame.delta / 2.0;
        let mut step = frame.tau / 200.0;
        let mut last = None;
        for _ in 0..3 {
            let eigs = scan_eigenvalues(graph, problem, &frame.expansion, reach, step)?;
            match catalog(&eigs, &frame, rho_max) {
                Err(e @ Error::ScanResolutionTooCoarse(_)) => last = Some(e),
                other => return other,
            }
            step /= 4.0;
        }
        Err(last.expect("loop ran"))
    }

    /// Catalog of the unperturbed problem: every `ε = 0`.
    pub fn unperturbed(frame: &AsymptoticFrame, rho_max: f64) -> Self {
        let grid = frame.grid(rho_max);
        let entries = grid
            .iter()
            .map(|&(rho0, k, n)| CatalogEntry { n, k, lambda: rho0 * rho0, rho: rho0, rho0, eps: 0.0, multiplicity: 1 })
            .collect();
        SpectrumCatalog { frame: frame.clone(), rho_max, entries, outside_window: Vec::new() }
    }

    pub fn get(&self, n: i64, k: usize) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.n == n && e.k == k)
    }

    /// Entries of family `k` ordered by `|n|`, then `n`.
    pub fn family(&self, k: usize) -> Vec<&CatalogEntry> {
        let mut out: Vec<&CatalogEntry> = self.entries.iter().filter(|e| e.k == k).collect();
        out.sort_by_key(|e| (e.n.abs(), e.n));
        out
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(CATALOG_COLUMNS)?;
        for e in &self.entries {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Reads catalog rows; the frame comes from the graph geometry.
    pub fn read_csv<R: Read>(input: R, frame: &AsymptoticFrame) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers().map_err(|e| Error::Config(format!("catalog csv: {e}")))?;
        for column in CATALOG_COLUMNS {
            if !headers.iter().any(|h| h == column) {
                return Err(Error::Config(format!("catalog csv: missing column {column:?}")));
            }
        }
        let mut entries = Vec::new();
        for row in r.deserialize() {
            let e: CatalogEntry = row.map_err(|e| Error::Config(format!("catalog csv: {e}")))?;
            if !e.lambda.is_finite() || !e.rho0.is_finite() {
                return Err(Error::Config("catalog csv: non-finite value".into()));
            }
            if e.k >= frame.families.len() {
                return Err(Error::Config(format!("catalog csv: family {} does not exist", e.k)));
            }
            entries.push(e);
        }
        let rho_max = entries.iter().map(|e| e.rho0).fold(0.0, f64::max);
        let window = frame.delta / 2.0;
        let outside_window = entries.iter().filter(|e| e.eps.abs() >= window).map(|e| (e.n, e.k)).collect();
        Ok(SpectrumCatalog { frame: frame.clone(), rho_max, entries, outside_window })
    }
}

const CATALOG_COLUMNS: [&str; 7] = ["n", "k", "lambda", "rho", "rho0", "eps", "multiplicity"];

/// Residuals below this are root-finding noise and count as zero.
pub const EPS_RESOLUTION: f64 = 1e-9;
/// Roots this close to the end of a range count as inside it.
pub const ROOT_RESOLUTION: f64 = 1e-9;

/// Per-family behaviour of the residuals `ε_nk`.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyDiagnostic {
    pub k: usize,
    pub alpha: f64,
    pub exponent: i32,
    /// `(n, ε_nk)` ordered by `|n|`.
    pub eps: Vec<(i64, f64)>,
    /// `partial_sums[N] = Σ_{|n| ≤ N} |ε_nk|^exponent`.
    pub partial_sums: Vec<f64>,
    pub bounded: bool,
}

/// Partial sums of `|ε_nk|^{2ν}` per family, `ν` the order of the base zero,
/// up to `|n| ≤ n_max`. A family is flagged bounded when its partial sum grows
/// by less than 10% over the second half of the range.
pub fn epsilon_diagnostics(cat: &SpectrumCatalog, n_max: i64) -> Vec<FamilyDiagnostic> {
    let frame = &cat.frame;
    frame
        .families
        .iter()
        .map(|fam| {
            let nu = frame.zeros.iter().find(|z| z.alpha == fam.alpha).map_or(1, |z| z.rho_order.max(1));
            let exponent = 2 * nu as i32;
            let eps: Vec<(i64, f64)> =
                cat.family(fam.k).into_iter().filter(|e| e.n.abs() <= n_max).map(|e| (e.n, e.eps)).collect();
            let mut partial_sums = vec![0.0; n_max.max(0) as usize + 1];
            for &(n, e) in &eps {
                let e = if e.abs() < EPS_RESOLUTION { 0.0 } else { e };
                partial_sums[n.unsigned_abs() as usize] += e.abs().powi(exponent);
            }
            for i in 1..partial_sums.len() {
                partial_sums[i] += partial_sums[i - 1];
            }
            let full = *partial_sums.last().unwrap_or(&0.0);
            let half = partial_sums[partial_sums.len() / 2];
            let bounded = full <= half * 1.1 || full == 0.0;
            FamilyDiagnostic { k: fam.k, alpha: fam.alpha, exponent, eps, partial_sums, bounded }
        })
        .collect()
}

/// Relative growth of a family's partial sum from `|n| ≤ a` to `|n| ≤ b`.
pub fn partial_sum_growth(diag: &FamilyDiagnostic, a: usize, b: usize) -> f64 {
    let sa = diag.partial_sums[a.min(diag.partial_sums.len() - 1)];
    let sb = diag.partial_sums[b.min(diag.partial_sums.len() - 1)];
    if sa == 0.0 {
        if sb == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (sb - sa) / sa
    }
}
