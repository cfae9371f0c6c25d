//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::time::Instant;

use lasso_spectra::charfn::{delta0_scaled, delta_scaled, weyl_poles};
use lasso_spectra::graph::validate;
use lasso_spectra::integrator::{fundamental_solutions, fundamental_solutions_for};
use lasso_spectra::oracle::extrapolated_eigs;
use lasso_spectra::reconstruct::{compare, hadamard_reconstruct};
use lasso_spectra::spectrum::{epsilon_diagnostics, find_eigenvalues, partial_sum_growth};
use lasso_spectra::{AsymptoticFrame, GraphSpec, PotentialSpec, Problem, Rational, SpectrumCatalog, ValidatedGraph};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

/// p = 2 lasso with every edge of length π.
fn pi_lasso() -> GraphSpec {
    GraphSpec::lasso(PI, &[int(1), int(1), int(1)])
}

fn zero_fixture() -> ValidatedGraph {
    validate(&pi_lasso()).unwrap()
}

/// Delta of strength `c` at the midpoint of the first pendant.
fn delta_fixture(c: f64) -> ValidatedGraph {
    validate(&pi_lasso().with_potential(1, PotentialSpec::delta(int(1), Rational::new(1, 2), c))).unwrap()
}

fn lowest(graph: &ValidatedGraph, problem: Problem, count: usize) -> Vec<f64> {
    let mut rho = 4.0;
    loop {
        let flat: Vec<f64> = find_eigenvalues(graph, problem, rho)
            .unwrap()
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.lambda, e.multiplicity))
            .collect();
        if flat.len() >= count {
            return flat[..count].to_vec();
        }
        rho *= 2.0;
    }
}

/// `|a − b| / max(|a|, |b|)`, or `0` when both vanish to within `1e−8`.
fn rel_diff(a: f64, b: f64) -> f64 {
    if a.abs() < 1e-8 && b.abs() < 1e-8 {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

fn fundamental_exactness() -> Outcome {
    let mut graphs = vec![zero_fixture()];
    // zero potential split into several constant pieces
    let split = PotentialSpec { breakpoints: vec![int(0), Rational::new(1, 3), Rational::new(1, 2), int(1)], values: vec![0.0; 3] };
    graphs.push(validate(&pi_lasso().with_potential(1, split)).unwrap());
    let mut worst = 0.0f64;
    let mut count = 0;
    for g in &graphs {
        for j in 0..g.num_edges() {
            let len = g.length(j);
            for i in 1..=2000 {
                let rho = 100.0 / len * i as f64 / 2000.0;
                let f = fundamental_solutions(g, j, rho * rho);
                let (c, s) = ((rho * len).cos(), (rho * len).sin());
                // each component against its own amplitude
                worst = worst
                    .max((f.c - c).abs())
                    .max((f.s - s / rho).abs() * rho)
                    .max((f.c1 + rho * s).abs() / rho)
                    .max((f.s1 - c).abs());
                count += 1;
            }
        }
    }
    outcome(worst <= 1e-12, format!("{count} (edge, rho) pairs, max relative error {worst:.2e} (tol 1e-12)"))
}

fn wronskian() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x1a55_0001);
    let mut worst = 0.0f64;
    let mut deltas = 0;
    for _ in 0..1000 {
        let den = rng.gen_range(1..=6i64);
        let length = Rational::new(rng.gen_range(1..=3 * den), den);
        let pot = match rng.gen_range(0..3) {
            0 => PotentialSpec::zero(length),
            1 => {
                deltas += 1;
                let at = Rational::new(rng.gen_range(1..*length.numer() * 4), *length.denom() * 4);
                PotentialSpec::delta(length, at, rng.gen_range(-5.0..=5.0))
            }
            _ => {
                let pieces = rng.gen_range(1..=4i64);
                let breakpoints = (0..=pieces).map(|i| length * Rational::new(i, pieces)).collect();
                let values = (0..pieces).map(|_| rng.gen_range(-5.0..=5.0)).collect();
                PotentialSpec { breakpoints, values }
            }
        };
        let lambda = rng.gen_range(-10.0..=400.0);
        let f = fundamental_solutions_for(&pot, 1.0, lambda);
        worst = worst.max((f.wronskian() - 1.0).abs());
    }
    outcome(worst <= 1e-10, format!("1000 pairs ({deltas} delta edges), max |W - 1| = {worst:.2e} (tol 1e-10)"))
}

fn oracle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let mut dim = 0;
    for g in [zero_fixture(), delta_fixture(0.5)] {
        let computed = lowest(&g, Problem::L, 6);
        let run = extrapolated_eigs(&g, Problem::L, 160.0, 6).unwrap();
        dim = run.dimension;
        for (a, b) in computed.iter().zip(&run.extrapolated) {
            worst = worst.max(rel_diff(*a, *b));
        }
    }
    outcome(worst <= 1e-3, format!("6 eigenvalues x 2 potentials, fine dimension {dim}, max relative gap {worst:.2e} (tol 1e-3)"))
}

fn asymptotic_frame() -> Outcome {
    let g = zero_fixture();
    let frame = AsymptoticFrame::new(&g, Problem::L).unwrap();
    let expect = [0.0, 0.5, 2.0 / 3.0];
    let alphas_ok = frame.zeros.len() == 3
        && frame.zeros.iter().zip(expect).all(|(z, a)| (z.alpha - a).abs() <= 1e-9 && z.mu == 1);
    let factor = |rho: f64| {
        let c = (PI * rho).cos();
        2.0 * c * (2.0 * c + 1.0) * (c - 1.0)
    };
    let worst = (1..=400)
        .map(|i| 0.0137 * i as f64)
        .map(|rho| (frame.expansion.eval_rho(rho) - factor(rho)).abs())
        .fold(0.0, f64::max);
    let passed = (frame.tau - 2.0).abs() <= 1e-12 && alphas_ok && frame.mu0 == 1 && worst <= 1e-12;
    let alphas: Vec<String> = frame.zeros.iter().map(|z| format!("({:.10}, {})", z.alpha, z.mu)).collect();
    outcome(
        passed,
        format!("tau = {}, alphas [{}], mu0 = {}, |d0 - factorization| <= {worst:.1e}", frame.tau, alphas.join(", "), frame.mu0),
    )
}

fn numbering() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, g) in [("zero", zero_fixture()), ("delta c=0.5", delta_fixture(0.5)), ("delta c=1", delta_fixture(1.0))] {
        assert!(g.max_abs_sigma() <= 1.0);
        let frame = AsymptoticFrame::new(&g, Problem::L).unwrap();
        let rho_max = 10.0 * frame.tau;
        let radius = frame.contour_radius(rho_max);
        let roots: usize = find_eigenvalues(&g, Problem::L, radius).unwrap().iter().map(|e| e.multiplicity).sum();
        let grid = frame.grid(rho_max).len();
        let cat = SpectrumCatalog::compute(&g, Problem::L, rho_max).unwrap();
        let max_eps = cat.entries.iter().map(|e| e.eps.abs()).fold(0.0, f64::max);
        let ok = roots == grid && max_eps < frame.delta / 2.0;
        passed &= ok;
        parts.push(format!("{name}: {roots}/{grid} roots, max|eps| {max_eps:.3} < {:.3}", frame.delta / 2.0));
    }
    outcome(passed, parts.join("; "))
}

fn epsilon_decay() -> Outcome {
    let g = delta_fixture(0.5);
    let cat = SpectrumCatalog::compute(&g, Problem::L, 2.0 * 51.0).unwrap();
    let diags = epsilon_diagnostics(&cat, 50);
    let growth: Vec<f64> = diags.iter().map(|d| partial_sum_growth(d, 25, 50)).collect();
    let worst = growth.iter().copied().fold(0.0, f64::max);
    let per_family: Vec<String> = diags.iter().zip(&growth).map(|(d, g)| format!("k{}: {g:.2e}", d.k)).collect();
    outcome(worst < 0.1, format!("growth N=25 -> 50 [{}] (tol 0.1)", per_family.join(", ")))
}

/// `count` points of a uniform grid on `[lo, hi]`, with points closer than
/// `1e−2` to an eigenvalue moved just outside that neighbourhood.
fn clear_grid(eigs: &[f64], lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let mut l = lo + (hi - lo) * i as f64 / (count - 1) as f64;
            while let Some(e) = eigs.iter().find(|e| (*e - l).abs() <= 1e-2) {
                l = if l >= *e { e + 1.5e-2 } else { e - 1.5e-2 };
            }
            l
        })
        .collect()
}

fn round_trip() -> Outcome {
    let g = delta_fixture(0.5);
    let mut passed = true;
    let mut parts = Vec::new();
    for problem in [Problem::L, Problem::Lj(1)] {
        let cat = SpectrumCatalog::compute(&g, problem, 2.0 * 201.0).unwrap();
        let eigs: Vec<f64> = cat.entries.iter().map(|e| e.lambda).collect();
        let grid = clear_grid(&eigs, -5.0, 9.0, 200);
        let direct = |l: f64| delta_scaled(&g, problem, l).unwrap();
        let errors: Vec<f64> = [25, 50, 100, 200]
            .iter()
            .map(|&n| compare(&hadamard_reconstruct(&cat, &grid, n).unwrap(), direct).1.max)
            .collect();
        let monotone = errors.windows(2).all(|w| w[1] <= w[0]);
        passed &= monotone && errors[2] <= 1e-3;
        let list: Vec<String> = errors.iter().map(|e| format!("{e:.2e}")).collect();
        parts.push(format!("{problem}: max error at n_max 25/50/100/200 = {}", list.join("/")));
    }
    outcome(passed, parts.join("; ") + " (tol 1e-3 at 100, non-increasing)")
}

fn normalization() -> Outcome {
    let g = delta_fixture(0.5);
    let lambda = -1e3;
    let mut passed = true;
    let mut parts = Vec::new();
    for problem in [Problem::L, Problem::Lj(1)] {
        let cat = SpectrumCatalog::compute(&g, problem, 2.0 * 101.0).unwrap();
        let hat = hadamard_reconstruct(&cat, &[lambda], 100).unwrap().ratio_to_free[0].unwrap();
        let direct = delta_scaled(&g, problem, lambda).unwrap().ratio(&delta0_scaled(&g, problem, lambda).unwrap());
        passed &= (hat - 1.0).abs() <= 1e-2 && (direct - 1.0).abs() <= 1e-2;
        parts.push(format!("{problem}: hat/free = {hat:.6}, direct/free = {direct:.6}"));
    }
    outcome(passed, parts.join("; ") + " (tol 1e-2)")
}

fn weyl_consistency() -> Outcome {
    let g = delta_fixture(0.5);
    let frame = AsymptoticFrame::new(&g, Problem::L).unwrap();
    let hi = 5.0 * frame.tau;
    let cat = SpectrumCatalog::compute(&g, Problem::L, hi + frame.tau).unwrap();
    let poles = weyl_poles(&g, 1, 0.0, hi, frame.tau / 400.0).unwrap();
    let worst = poles
        .iter()
        .map(|p| cat.entries.iter().map(|e| (e.rho - p).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    outcome(!poles.is_empty() && worst <= 1e-8, format!("{} poles of M_1 on [0, 5 tau], max distance to the spectrum {worst:.2e} (tol 1e-8)", poles.len()))
}

fn main() {
    let criteria: [(&str, f64, fn() -> Outcome); 9] = [
        ("fundamental-solution exactness", 1.0, fundamental_exactness),
        ("Wronskian invariant", 1.0, wronskian),
        ("oracle equivalence", 30.0, oracle_equivalence),
        ("asymptotic frame", 1.0, asymptotic_frame),
        ("numbering and root count", 10.0, numbering),
        ("epsilon decay", 10.0, epsilon_decay),
        ("reconstruction round trip", 60.0, round_trip),
        ("normalization limit", 1.0, normalization),
        ("Weyl consistency", 5.0, weyl_consistency),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        let passed = result.passed && secs <= *budget;
        if !passed {
            failures += 1;
        }
        println!(
            "{} {}. {name}: {} [{secs:.2} s, budget {budget} s]",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            result.detail
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
