//! The invariant suite behind `lasso-spectra verify`.

use lasso_spectra::charfn::{delta0_scaled, delta_scaled, weyl_poles};
use lasso_spectra::integrator::fundamental_solutions;
use lasso_spectra::oracle::extrapolated_eigs;
use lasso_spectra::reconstruct::{compare, hadamard_reconstruct};
use lasso_spectra::spectrum::find_eigenvalues;
use lasso_spectra::{AsymptoticFrame, Problem, Result, SpectrumCatalog, ValidatedGraph};
use serde::Serialize;
use serde_json::{json, Value};

use crate::commands::{load_graph, problems, write_json};
use crate::VerifyArgs;

const WRONSKIAN_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-3;
const ORACLE_POINTS_PER_UNIT: f64 = 60.0;
const ORACLE_COUNT: usize = 6;
const RECONSTRUCTION_TOL: f64 = 1e-3;
/// Reconstruction errors below this are set by the eigenvalue root tolerance.
const RECONSTRUCTION_FLOOR: f64 = 1e-8;
const NORMALIZATION_LAMBDA: f64 = -1e3;
const NORMALIZATION_TOL: f64 = 1e-2;
const WEYL_TOL: f64 = 1e-8;

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    passed: bool,
    detail: Value,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: Value) -> Self {
        Check { name: name.into(), passed, detail }
    }

    fn failed(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Check::new(name, false, json!({ "error": err.to_string() }))
    }
}

/// Relative agreement, with an absolute floor for values at zero.
fn agree(a: f64, b: f64, tol: f64) -> bool {
    let diff = (a - b).abs();
    diff <= tol * a.abs().max(b.abs()) || diff <= 1e-8
}

fn wronskian(graph: &ValidatedGraph) -> Check {
    let samples = 200;
    let mut worst = 0.0f64;
    for j in 0..graph.num_edges() {
        for i in 0..samples {
            let lambda = -10.0 + 410.0 * i as f64 / (samples - 1) as f64;
            let f = fundamental_solutions(graph, j, lambda);
            let scale = (f.c * f.s1).abs().max((f.c1 * f.s).abs()).max(1.0);
            worst = worst.max((f.wronskian() - 1.0).abs() / scale);
        }
    }
    let pairs = samples * graph.num_edges();
    Check::new("wronskian", worst <= WRONSKIAN_TOL, json!({ "pairs": pairs, "max_defect": worst, "tol": WRONSKIAN_TOL }))
}

/// The first `count` eigenvalues with multiplicity.
fn lowest_eigenvalues(graph: &ValidatedGraph, problem: Problem, tau: f64, count: usize) -> Result<Vec<f64>> {
    let mut rho = 3.0 * tau;
    loop {
        let flat: Vec<f64> = find_eigenvalues(graph, problem, rho)?
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.lambda, e.multiplicity))
            .collect();
        if flat.len() >= count {
            return Ok(flat[..count].to_vec());
        }
        rho *= 2.0;
    }
}

fn oracle(graph: &ValidatedGraph, problem: Problem, tau: f64) -> Check {
    let name = format!("oracle_{problem}");
    let run = || -> Result<Check> {
        let computed = lowest_eigenvalues(graph, problem, tau, ORACLE_COUNT)?;
        let discrete = extrapolated_eigs(graph, problem, ORACLE_POINTS_PER_UNIT, ORACLE_COUNT)?;
        let passed = computed.iter().zip(&discrete.extrapolated).all(|(&a, &b)| agree(a, b, ORACLE_TOL));
        let detail = json!({
            "computed": computed,
            "oracle": discrete.extrapolated,
            "dimension": discrete.dimension,
            "tol": ORACLE_TOL,
        });
        Ok(Check::new(name.clone(), passed, detail))
    };
    run().unwrap_or_else(|e| Check::failed(name.clone(), e))
}

/// Root count inside a contour through the first gap above `rho_max`, and the
/// window check on `[0, rho_max]`; applicable for small `σ`.
fn numbering(graph: &ValidatedGraph, cat: &SpectrumCatalog, rho_max: f64) -> Check {
    let name = "numbering_L";
    let run = || -> Result<Check> {
        let radius = cat.frame.contour_radius(rho_max);
        let roots: usize = find_eigenvalues(graph, Problem::L, radius)?.iter().map(|e| e.multiplicity).sum();
        let grid = cat.frame.grid(radius).len();
        let window = cat.frame.delta / 2.0;
        let max_eps = cat.entries.iter().filter(|e| e.rho0 <= rho_max).map(|e| e.eps.abs()).fold(0.0, f64::max);
        let passed = roots == grid && max_eps < window;
        Ok(Check::new(
            name,
            passed,
            json!({ "radius": radius, "roots": roots, "grid_points": grid, "max_abs_eps": max_eps, "window": window }),
        ))
    };
    run().unwrap_or_else(|e| Check::failed(name, e))
}

/// `count` equispaced points on `[lo, hi]`, dropping those near an eigenvalue.
fn test_grid(cat: &SpectrumCatalog, lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .filter(|l| cat.entries.iter().all(|e| (e.lambda - l).abs() > 1e-2))
        .collect()
}

fn reconstruction(graph: &ValidatedGraph, cat: &SpectrumCatalog, n_max: i64) -> Check {
    let problem = cat.frame.problem;
    let name = format!("reconstruction_{problem}");
    let run = || -> Result<Check> {
        let grid = test_grid(cat, -5.0, 9.0, 200);
        let direct = |l: f64| delta_scaled(graph, problem, l).expect("problem index checked");
        let depths = [n_max / 4, n_max / 2, n_max];
        let mut errors = Vec::new();
        for &n in &depths {
            let result = hadamard_reconstruct(cat, &grid, n)?;
            errors.push(compare(&result, direct).1.max);
        }
        let monotone = errors.windows(2).all(|w| w[1] <= w[0].max(RECONSTRUCTION_FLOOR));
        let last = *errors.last().expect("three depths");
        let detail = json!({
            "points": grid.len(),
            "n_max": depths,
            "max_error": errors,
            "tol": RECONSTRUCTION_TOL,
            "non_increasing": monotone,
        });
        Ok(Check::new(name.clone(), monotone && last <= RECONSTRUCTION_TOL, detail))
    };
    run().unwrap_or_else(|e| Check::failed(name.clone(), e))
}

fn normalization(graph: &ValidatedGraph, cat: &SpectrumCatalog, n_max: i64) -> Check {
    let problem = cat.frame.problem;
    let name = format!("normalization_{problem}");
    let run = || -> Result<Check> {
        let lambda = NORMALIZATION_LAMBDA;
        let hat = hadamard_reconstruct(cat, &[lambda], n_max)?.ratio_to_free[0].unwrap_or(f64::NAN);
        let direct = delta_scaled(graph, problem, lambda)?.ratio(&delta0_scaled(graph, problem, lambda)?);
        let passed = (hat - 1.0).abs() <= NORMALIZATION_TOL && (direct - 1.0).abs() <= NORMALIZATION_TOL;
        Ok(Check::new(
            name.clone(),
            passed,
            json!({ "lambda": lambda, "reconstructed_ratio": hat, "direct_ratio": direct, "tol": NORMALIZATION_TOL }),
        ))
    };
    run().unwrap_or_else(|e| Check::failed(name.clone(), e))
}

/// Poles of `M_j = Δ(L_j)/Δ(L)` against the catalog of `L`.
fn weyl(graph: &ValidatedGraph, cat_l: &SpectrumCatalog, j: usize, rho_hi: f64) -> Check {
    let name = format!("weyl_poles_{j}");
    let run = || -> Result<Check> {
        let poles = weyl_poles(graph, j, 0.0, rho_hi, cat_l.frame.tau / 400.0)?;
        let unmatched: Vec<f64> = poles
            .iter()
            .copied()
            .filter(|p| cat_l.entries.iter().all(|e| (e.rho - p).abs() > WEYL_TOL))
            .collect();
        Ok(Check::new(
            name.clone(),
            unmatched.is_empty(),
            json!({ "range": [0.0, rho_hi], "poles": poles.len(), "unmatched": unmatched, "tol": WEYL_TOL }),
        ))
    };
    run().unwrap_or_else(|e| Check::failed(name.clone(), e))
}

pub fn run(args: &VerifyArgs) -> Result<bool> {
    let graph = load_graph(&args.config)?;
    if args.n_max < 4 {
        return Err(lasso_spectra::Error::Config("--n-max must be at least 4".into()));
    }
    let tau = AsymptoticFrame::new(&graph, Problem::L)?.tau;
    let rho_max = args.rho_max.unwrap_or(10.0 * tau);
    if !(rho_max > 0.0 && rho_max.is_finite()) {
        return Err(lasso_spectra::Error::Config(format!("--rho-max must be positive, got {rho_max}")));
    }
    // enough of the spectrum for every family up to |n| = n_max
    let reach = rho_max.max(tau * (args.n_max + 1) as f64);

    let mut checks = vec![wronskian(&graph)];
    let mut cat_l = None;
    for problem in problems(&graph) {
        checks.push(oracle(&graph, problem, tau));
        let cat = match SpectrumCatalog::compute(&graph, problem, reach) {
            Ok(cat) => cat,
            Err(e) => {
                checks.push(Check::failed(format!("catalog_{problem}"), e));
                continue;
            }
        };
        checks.push(Check::new(
            format!("catalog_{problem}"),
            true,
            json!({ "entries": cat.entries.len(), "outside_window": cat.outside_window }),
        ));
        if problem == Problem::L && graph.max_abs_sigma() <= 1.0 {
            checks.push(numbering(&graph, &cat, rho_max));
        }
        checks.push(reconstruction(&graph, &cat, args.n_max));
        checks.push(normalization(&graph, &cat, args.n_max));
        match problem {
            Problem::L => cat_l = Some(cat),
            Problem::Lj(j) => match &cat_l {
                Some(l) => checks.push(weyl(&graph, l, j, (5.0 * l.frame.tau).min(reach))),
                None => checks.push(Check::failed(format!("weyl_poles_{j}"), "no catalog for L")),
            },
        }
    }

    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        eprintln!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    let report = json!({
        "config": args.config.display().to_string(),
        "rho_max": rho_max,
        "n_max": args.n_max,
        "passed": passed,
        "checks": checks,
    });
    write_json(&args.out, &report)?;
    Ok(passed)
}
