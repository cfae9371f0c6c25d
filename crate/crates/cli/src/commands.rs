use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use lasso_spectra::charfn::delta_scaled;
use lasso_spectra::graph::validate;
use lasso_spectra::reconstruct::hadamard_reconstruct;
use lasso_spectra::{AsymptoticFrame, CharValue, Error, GraphSpec, Problem, Result, SpectrumCatalog, ValidatedGraph};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{CharfnArgs, EigsArgs, Format, ReconstructArgs};

pub fn load_graph(path: &Path) -> Result<ValidatedGraph> {
    validate(&GraphSpec::from_path(path)?)
}

pub fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json(path: &Option<PathBuf>, value: &Value) -> Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn parse_json(text: &str) -> Value {
    serde_json::from_str(text).expect("library emits valid json")
}

fn finite(value: f64, lambda: f64) -> Result<f64> {
    if value.is_nan() {
        return Err(Error::Config(format!("characteristic function is undefined at lambda = {lambda}")));
    }
    Ok(value)
}

pub fn charfn(args: &CharfnArgs) -> Result<()> {
    let graph = load_graph(&args.config)?;
    let problem = args.problem.problem().check(&graph)?;
    let (column, points, lambdas): (&str, Vec<f64>, Vec<f64>) = match (&args.rho, &args.lambda) {
        (Some(g), _) => {
            let rho = g.points();
            let lambda = rho.iter().map(|r| r * r.abs()).collect();
            ("rho", rho, lambda)
        }
        (None, Some(g)) => ("lambda", g.points(), g.points()),
        (None, None) => return Err(Error::Config("one of --rho or --lambda is required".into())),
    };
    let values: Vec<f64> = lambdas
        .par_iter()
        .map(|&l| delta_scaled(&graph, problem, l).map(|v| v.value()))
        .collect::<Result<_>>()?;
    for (v, l) in values.iter().zip(&lambdas) {
        finite(*v, *l)?;
    }

    match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(output(&args.out)?);
            w.write_record([column, "delta"])?;
            for (x, v) in points.iter().zip(&values) {
                w.write_record([format!("{x:?}"), format!("{v:?}")])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let rows: Vec<Value> = points.iter().zip(&values).map(|(x, v)| json!({ column: x, "delta": v })).collect();
            write_json(&args.out, &json!({ "problem": problem.to_string(), "points": rows }))?;
        }
    }
    Ok(())
}

fn warn_frame(frame: &AsymptoticFrame) {
    if frame.half_period_zero {
        eprintln!(
            "warning: {}: tau/2 = {:?} is a base zero; its grid points tau*n + tau/2 form a single family",
            frame.problem,
            frame.tau / 2.0
        );
    }
}

fn warn_catalog(cat: &SpectrumCatalog) {
    for &(n, k) in &cat.outside_window {
        if let Some(e) = cat.get(n, k) {
            eprintln!(
                "warning: {}: (n={n}, k={k}) lambda = {:?} lies outside its window around rho0 = {:?} (eps = {:?})",
                cat.frame.problem, e.lambda, e.rho0, e.eps
            );
        }
    }
}

pub fn eigs(args: &EigsArgs) -> Result<()> {
    let graph = load_graph(&args.config)?;
    let problem = args.problem.problem().check(&graph)?;
    if !(args.rho_max >= 0.0 && args.rho_max.is_finite()) {
        return Err(Error::Config(format!("--rho-max must be a finite non-negative number, got {}", args.rho_max)));
    }
    let cat = SpectrumCatalog::compute(&graph, problem, args.rho_max)?;
    warn_frame(&cat.frame);
    warn_catalog(&cat);

    if let Some(path) = &args.frame_out {
        std::fs::write(path, cat.frame.to_json() + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    match args.format {
        Format::Csv => {
            let mut out = output(&args.out)?;
            cat.write_csv(&mut out)?;
            out.flush()?;
        }
        Format::Json => {
            let doc = json!({
                "frame": parse_json(&cat.frame.to_json()),
                "rho_max": cat.rho_max,
                "entries": cat.entries,
                "outside_window": cat.outside_window,
            });
            write_json(&args.out, &doc)?;
        }
    }
    Ok(())
}

pub fn reconstruct(args: &ReconstructArgs) -> Result<()> {
    let graph = load_graph(&args.config)?;
    let problem = args.problem.problem().check(&graph)?;
    if args.n_max < 0 {
        return Err(Error::Config("--n-max must be non-negative".into()));
    }
    let frame = AsymptoticFrame::new(&graph, problem)?;
    let file = File::open(&args.spectra).map_err(|e| Error::Io(format!("{}: {e}", args.spectra.display())))?;
    let cat = SpectrumCatalog::read_csv(file, &frame)?;
    warn_catalog(&cat);

    let grid = args.lambda.points();
    let mut result = hadamard_reconstruct(&cat, &grid, args.n_max)?;
    let direct: Option<Vec<CharValue>> = if graph.potentials_known() {
        let direct_at = |l: f64| delta_scaled(&graph, problem, l).expect("problem index checked");
        result = result.with_direct(direct_at);
        Some(grid.par_iter().map(|&l| direct_at(l)).collect())
    } else {
        None
    };

    let mut summary = serde_json::to_value(result.summary()).map_err(|e| Error::Io(e.to_string()))?;
    summary["problem"] = json!(problem.to_string());
    if let Some(path) = &args.summary {
        write_json(&Some(path.clone()), &summary)?;
    }
    match args.format {
        Format::Csv => {
            let mut out = output(&args.out)?;
            result.write_csv(&mut out, direct.as_deref())?;
            out.flush()?;
        }
        Format::Json => {
            let errors = result.error_vs_direct.as_ref();
            let rows: Vec<Value> = grid
                .iter()
                .enumerate()
                .map(|(i, &l)| {
                    let mut row = json!({ "lambda": l, "delta_hat": result.values[i].map(|v| v.value()) });
                    if let (Some(d), Some(e)) = (&direct, errors) {
                        row["delta_direct"] = json!(d[i].value());
                        row["rel_error"] = json!(e[i]);
                    }
                    row
                })
                .collect();
            write_json(&args.out, &json!({ "summary": summary, "points": rows }))?;
        }
    }
    Ok(())
}

pub fn problems(graph: &ValidatedGraph) -> Vec<Problem> {
    std::iter::once(Problem::L).chain((1..=graph.p()).map(Problem::Lj)).collect()
}
