//! Characteristic functions recovered from spectra alone.
//!
//! The entire function is rebuilt as
//!
//! ```text
//! Δ̂(λ) = Δ_0(λ) · Π_{|n| ≤ N} (λ_nk − λ) / (λ⁰_nk − λ)
//! ```
//!
//! over the cataloged eigenvalues. Each truncated tail factor is
//! `1 + O(ε_nk / n)`, so finite truncation converges. Grid points `λ⁰ = 0`
//! are folded into `Δ_0(λ) / (−λ)^{μ_0}`, which stays finite at `λ = 0` and
//! equals the leading constant divided by `μ_0!` there.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::charfn::CharValue;
use crate::error::{Error, Result};
use crate::spectrum::{AsymptoticFrame, CatalogEntry, D0Expansion, SpectrumCatalog};

/// Eigenvalues this close to zero are the zero eigenvalue.
pub const ZERO_SNAP: f64 = 1e-12;
/// Grid points this close to a nonzero unperturbed eigenvalue are skipped.
pub const SINGULAR_TOL: f64 = 1e-10;

/// `λ` itself, or `1` for the zero eigenvalue.
pub fn regularized(lambda: f64) -> f64 {
    if lambda.abs() < ZERO_SNAP {
        1.0
    } else {
        lambda
    }
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

/// `(−1)^{μ_0} ∂^{μ_0}Δ_0/∂λ^{μ_0}` at `λ = 0`, from the exact expansion.
pub fn leading_constant(expansion: &D0Expansion, mu0: usize) -> Result<f64> {
    let series = expansion.lambda_series(mu0 + 1);
    let sign = if mu0.is_multiple_of(2) { 1.0 } else { -1.0 };
    let value = sign * factorial(mu0) * series[mu0];
    // size of the μ_0-th coefficient if nothing cancelled
    let mut abs = expansion.clone();
    abs.poly = abs.poly.abs_coefficients();
    let scale = factorial(mu0) * abs.lambda_series(mu0 + 1)[mu0].abs();
    if !(value.abs() > 1e-12 * scale) {
        return Err(Error::DegenerateLeadingTerm { value, scale });
    }
    Ok(value)
}

/// `Δ_0(λ) / (−λ)^{μ_0}`, scaled.
fn reduced_free(expansion: &D0Expansion, mu0: usize, lambda: f64) -> CharValue {
    let w2 = expansion.max_omega().powi(2);
    if mu0 > 0 && lambda.abs() * w2 < 1e-2 {
        let series = expansion.lambda_series(mu0 + 24);
        let sign = if mu0.is_multiple_of(2) { 1.0 } else { -1.0 };
        let tail = series[mu0..].iter().rev().fold(0.0, |acc, c| acc * lambda + c);
        return CharValue::plain(sign * tail);
    }
    expansion.eval_lambda_scaled(lambda).scale_by((-lambda).powi(-(mu0 as i32)))
}

/// Reconstruction on a grid.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub grid: Vec<f64>,
    /// `Δ̂(λ)`; `None` where `λ` sits on an unperturbed eigenvalue.
    pub values: Vec<Option<CharValue>>,
    /// `Δ̂(λ) / Δ_0(λ)`.
    pub ratio_to_free: Vec<Option<f64>>,
    pub n_max: i64,
    pub leading_const: f64,
    pub error_vs_direct: Option<Vec<Option<f64>>>,
}

impl ReconstructionResult {
    /// Grid points flagged as coinciding with an unperturbed eigenvalue.
    pub fn singular_points(&self) -> Vec<f64> {
        self.grid.iter().zip(&self.values).filter(|(_, v)| v.is_none()).map(|(&l, _)| l).collect()
    }

    /// Attaches relative errors against a directly computed function.
    pub fn with_direct<F>(mut self, direct: F) -> Self
    where
        F: Fn(f64) -> CharValue + Sync,
    {
        let errors = self
            .grid
            .par_iter()
            .zip(&self.values)
            .map(|(&lambda, v)| v.map(|v| (v.ratio(&direct(lambda)) - 1.0).abs()))
            .collect();
        self.error_vs_direct = Some(errors);
        self
    }

    pub fn write_csv<W: Write>(&self, out: W, direct: Option<&[CharValue]>) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let with_errors = self.error_vs_direct.is_some() && direct.is_some();
        if with_errors {
            w.write_record(["lambda", "delta_hat", "delta_direct", "rel_error"])?;
        } else {
            w.write_record(["lambda", "delta_hat"])?;
        }
        for (i, &lambda) in self.grid.iter().enumerate() {
            let hat = self.values[i].map_or(String::new(), |v| format!("{:?}", v.value()));
            let mut row = vec![format!("{lambda:?}"), hat];
            if with_errors {
                let d = direct.expect("checked")[i].value();
                row.push(format!("{d:?}"));
                let e = self.error_vs_direct.as_ref().expect("checked")[i];
                row.push(e.map_or(String::new(), |e| format!("{e:?}")));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> Summary {
        let report = self.error_vs_direct.as_ref().map(|e| ErrorReport::from_errors(e));
        Summary {
            n_max: self.n_max,
            leading_const: self.leading_const,
            points: self.grid.len(),
            singular_points: self.singular_points().len(),
            max_error: report.as_ref().map(|r| r.max),
            median_error: report.as_ref().map(|r| r.median),
        }
    }
}

/// JSON summary of a reconstruction.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Summary {
    pub n_max: i64,
    pub leading_const: f64,
    pub points: usize,
    pub singular_points: usize,
    pub max_error: Option<f64>,
    pub median_error: Option<f64>,
}

/// Catalog entries for `|n| ≤ n_max`, ascending `|n|` with families interleaved.
fn factors(cat: &SpectrumCatalog, n_max: i64) -> Result<Vec<CatalogEntry>> {
    let frame = &cat.frame;
    let mut out = Vec::new();
    for fam in &frame.families {
        for n in -n_max..=n_max {
            if !fam.admits(n) {
                continue;
            }
            match cat.get(n, fam.k) {
                Some(e) => out.push(*e),
                None => {
                    return Err(Error::InsufficientCatalog {
                        n_max,
                        reason: format!("missing (n={n}, k={}), rho0 = {}", fam.k, fam.rho0(frame.tau, n)),
                    })
                }
            }
        }
    }
    out.sort_by_key(|e| (e.n.abs(), e.k, e.n));
    Ok(out)
}

fn evaluate(frame: &AsymptoticFrame, factors: &[CatalogEntry], lambda: f64) -> Option<(CharValue, f64)> {
    let mut prod = 1.0;
    let mut zero_family = 1.0;
    for e in factors {
        let lam0 = e.lambda0();
        let lam = if regularized(e.lambda) == e.lambda { e.lambda } else { 0.0 };
        if lam0.abs() < ZERO_SNAP {
            zero_family *= lam - lambda;
            continue;
        }
        if (lam0 - lambda).abs() < SINGULAR_TOL * (1.0 + lam0.abs()) {
            return None;
        }
        prod *= (lam - lambda) / (lam0 - lambda);
    }
    let mu0 = frame.mu0;
    let free = frame.expansion.eval_lambda_scaled(lambda);
    let reduced = reduced_free(&frame.expansion, mu0, lambda);
    let value = reduced.scale_by(zero_family * prod);
    // Δ̂/Δ_0 = prod · Π(λ_n0 − λ)/(−λ)^{μ_0}
    let ratio = value.ratio(&free);
    let ratio = if ratio.is_finite() { ratio } else { prod };
    Some((value, ratio))
}

/// Hadamard-product reconstruction of the characteristic function whose
/// spectrum is cataloged in `cat`, truncated at `|n| ≤ n_max`.
pub fn hadamard_reconstruct(cat: &SpectrumCatalog, grid: &[f64], n_max: i64) -> Result<ReconstructionResult> {
    let frame = &cat.frame;
    let leading_const = leading_constant(&frame.expansion, frame.mu0)?;
    let factors = factors(cat, n_max)?;
    let points: Vec<Option<(CharValue, f64)>> = grid.par_iter().map(|&l| evaluate(frame, &factors, l)).collect();
    Ok(ReconstructionResult {
        grid: grid.to_vec(),
        values: points.iter().map(|p| p.map(|p| p.0)).collect(),
        ratio_to_free: points.iter().map(|p| p.map(|p| p.1)).collect(),
        n_max,
        leading_const,
        error_vs_direct: None,
    })
}

/// [`hadamard_reconstruct`] for `L_j(G)`; the catalog must be built for `L_j`.
pub fn reconstruct_lj(cat_j: &SpectrumCatalog, grid: &[f64], n_max: i64, j: usize) -> Result<ReconstructionResult> {
    if cat_j.frame.problem != crate::charfn::Problem::Lj(j) {
        return Err(Error::Config(format!("catalog is for {}, expected L_{j}", cat_j.frame.problem)));
    }
    hadamard_reconstruct(cat_j, grid, n_max)
}

/// Max/median of per-point errors.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ErrorReport {
    pub max: f64,
    pub median: f64,
    pub count: usize,
}

impl ErrorReport {
    pub fn from_errors(errors: &[Option<f64>]) -> Self {
        let mut v: Vec<f64> = errors.iter().flatten().copied().collect();
        v.sort_by(f64::total_cmp);
        let max = v.last().copied().unwrap_or(0.0);
        let median = if v.is_empty() { 0.0 } else { v[v.len() / 2] };
        ErrorReport { max, median, count: v.len() }
    }
}

/// Per-point relative errors of `result` against `direct`, with summary.
pub fn compare<F>(result: &ReconstructionResult, direct: F) -> (Vec<Option<f64>>, ErrorReport)
where
    F: Fn(f64) -> CharValue + Sync,
{
    let errors: Vec<Option<f64>> = result
        .grid
        .par_iter()
        .zip(&result.values)
        .map(|(&l, v)| v.map(|v| (v.ratio(&direct(l)) - 1.0).abs()))
        .collect();
    let report = ErrorReport::from_errors(&errors);
    (errors, report)
}

/// One row of a convergence table.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ConvergenceRow {
    pub n_max: i64,
    pub max_error: f64,
    pub median_error: f64,
}

/// Reconstruction error for each truncation depth in `n_maxes`.
pub fn convergence_table<F>(cat: &SpectrumCatalog, grid: &[f64], n_maxes: &[i64], direct: F) -> Result<Vec<ConvergenceRow>>
where
    F: Fn(f64) -> CharValue + Sync,
{
    n_maxes
        .iter()
        .map(|&n_max| {
            let result = hadamard_reconstruct(cat, grid, n_max)?;
            let (_, report) = compare(&result, &direct);
            Ok(ConvergenceRow { n_max, max_error: report.max, median_error: report.median })
        })
        .collect()
}

pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
