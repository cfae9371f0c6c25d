//! Lasso-graph geometry and singular potentials.
//!
//! Edge `e_0` is the cycle, edges `e_1..e_p` are pendant. Every edge is
//! parameterized by `x ∈ [0, |e_j|]` with `x = |e_j|` at the central vertex
//! `v_0`; the cycle edge has both of its ends at `v_0`.
//!
//! Lengths and breakpoints are exact rationals measured in a common `unit`
//! (1 by default, `π` if requested), so commensurability is exact.

use std::fmt;
use std::path::Path;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Greatest common measure of two positive rationals.
pub fn rational_gcd(a: Rational, b: Rational) -> Rational {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let num = (a.numer() * b.denom()).gcd(&(b.numer() * a.denom()));
    Rational::new(num, a.denom() * b.denom())
}

pub fn to_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"num/den"`, an integer, or a finite decimal such as `"0.25"`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Ok(n) = t.parse::<i64>() {
        return Some(Rational::from_integer(n));
    }
    let (int, frac) = t.split_once('.')?;
    if frac.is_empty() || frac.len() > 15 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let negative = int.starts_with('-');
    let int_part: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
    let scale = 10i64.checked_pow(frac.len() as u32)?;
    let frac_part: i64 = frac.parse().ok()?;
    let mag = int_part.abs().checked_mul(scale)?.checked_add(frac_part)?;
    Some(Rational::new(if negative { -mag } else { mag }, scale))
}

fn format_rational(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Piecewise-constant antiderivative `σ` of the singular potential `q = σ'`.
///
/// `values[m]` holds on `(breakpoints[m], breakpoints[m + 1])`. A jump of
/// height `c` at a breakpoint encodes a delta potential of strength `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub breakpoints: Vec<Rational>,
    pub values: Vec<f64>,
}

impl PotentialSpec {
    pub fn zero(length: Rational) -> Self {
        PotentialSpec { breakpoints: vec![Rational::zero(), length], values: vec![0.0] }
    }

    /// Constant `σ = value` on the whole edge.
    pub fn constant(length: Rational, value: f64) -> Self {
        PotentialSpec { breakpoints: vec![Rational::zero(), length], values: vec![value] }
    }

    /// `σ = 0` before `position` and `σ = strength` after it, i.e. a delta
    /// potential of the given strength at `position`.
    pub fn delta(length: Rational, position: Rational, strength: f64) -> Self {
        PotentialSpec {
            breakpoints: vec![Rational::zero(), position, length],
            values: vec![0.0, strength],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Segments as `(σ, start, end)` in rational units.
    pub fn segments(&self) -> impl Iterator<Item = (f64, Rational, Rational)> + '_ {
        self.values
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(&s, w)| (s, w[0], w[1]))
    }

    /// Jumps of `σ` extended by zero outside the edge, as `(position, height)`.
    /// These are exactly the point masses of `q = σ'` seen by the quadratic form.
    pub fn jumps(&self) -> Vec<(Rational, f64)> {
        let mut out = Vec::with_capacity(self.breakpoints.len());
        let mut prev = 0.0;
        for (m, &x) in self.breakpoints.iter().enumerate() {
            let next = self.values.get(m).copied().unwrap_or(0.0);
            let c = next - prev;
            if c != 0.0 {
                out.push((x, c));
            }
            prev = next;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn validate(&self, edge: usize, length: Rational) -> Result<()> {
        let bad = |reason: &str| Error::BadBreakpoints { edge, reason: reason.to_string() };
        if self.breakpoints.len() < 2 {
            return Err(bad("need at least two breakpoints"));
        }
        if self.values.len() + 1 != self.breakpoints.len() {
            return Err(bad("expected one value per segment"));
        }
        if !self.breakpoints[0].is_zero() {
            return Err(bad("first breakpoint must be 0"));
        }
        if *self.breakpoints.last().unwrap() != length {
            return Err(bad("last breakpoint must equal the edge length"));
        }
        if self.breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("breakpoints must strictly increase"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinitePotential { edge });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeRole {
    Cycle,
    Pendant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub id: usize,
    pub length: Rational,
    pub role: EdgeRole,
    /// `None` means the potential is unknown; it is treated as zero.
    pub potential: Option<PotentialSpec>,
}

impl EdgeSpec {
    pub fn new(id: usize, length: Rational, potential: Option<PotentialSpec>) -> Self {
        let role = if id == 0 { EdgeRole::Cycle } else { EdgeRole::Pendant };
        EdgeSpec { id, length, role, potential }
    }
}

/// Unvalidated graph description.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec {
    /// Physical length of one rational unit.
    pub unit: f64,
    pub edges: Vec<EdgeSpec>,
}

impl GraphSpec {
    /// Lasso with zero potentials: `lengths[0]` is the cycle.
    pub fn lasso(unit: f64, lengths: &[Rational]) -> Self {
        let edges = lengths
            .iter()
            .enumerate()
            .map(|(id, &l)| EdgeSpec::new(id, l, Some(PotentialSpec::zero(l))))
            .collect();
        GraphSpec { unit, edges }
    }

    pub fn with_potential(mut self, edge: usize, potential: PotentialSpec) -> Self {
        self.edges[edge].potential = Some(potential);
        self
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        file.into_spec()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let file = GraphFile::from_spec(self);
        serde_json::to_string_pretty(&file).expect("graph file serializes")
    }
}

/// Validated, immutable lasso graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedGraph {
    unit: f64,
    edges: Vec<EdgeSpec>,
    potentials: Vec<PotentialSpec>,
    potentials_known: bool,
}

pub fn validate(spec: &GraphSpec) -> Result<ValidatedGraph> {
    if !(spec.unit.is_finite() && spec.unit > 0.0) {
        return Err(Error::BadUnit(spec.unit.to_string()));
    }
    let mut edges = spec.edges.clone();
    edges.sort_by_key(|e| e.id);
    if edges.iter().enumerate().any(|(i, e)| e.id != i) {
        return Err(Error::BadTopology("edge ids must be 0..=p without gaps".into()));
    }
    if edges.is_empty() {
        return Err(Error::BadTopology("graph has no edges".into()));
    }
    for e in &edges {
        let expected = if e.id == 0 { EdgeRole::Cycle } else { EdgeRole::Pendant };
        if e.role != expected {
            return Err(Error::BadTopology(format!(
                "edge {} must be {:?}; exactly one cycle edge, at index 0",
                e.id, expected
            )));
        }
        if !e.length.is_positive() {
            return Err(Error::NonPositiveLength { edge: e.id });
        }
        if let Some(pot) = &e.potential {
            pot.validate(e.id, e.length)?;
        }
    }
    if edges.len() < 2 {
        return Err(Error::NoPendantEdge);
    }
    let potentials_known = edges.iter().all(|e| e.potential.is_some());
    let potentials = edges
        .iter()
        .map(|e| e.potential.clone().unwrap_or_else(|| PotentialSpec::zero(e.length)))
        .collect();
    Ok(ValidatedGraph { unit: spec.unit, edges, potentials, potentials_known })
}

impl ValidatedGraph {
    /// Number of pendant edges.
    pub fn p(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn unit(&self) -> f64 {
        self.unit
    }

    pub fn edges(&self) -> &[EdgeSpec] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn rational_length(&self, j: usize) -> Rational {
        self.edges[j].length
    }

    /// Physical length `|e_j|`.
    pub fn length(&self, j: usize) -> f64 {
        to_f64(self.edges[j].length) * self.unit
    }

    pub fn total_length(&self) -> f64 {
        (0..self.num_edges()).map(|j| self.length(j)).sum()
    }

    pub fn potential(&self, j: usize) -> &PotentialSpec {
        &self.potentials[j]
    }

    /// Whether every edge came with an explicit potential.
    pub fn potentials_known(&self) -> bool {
        self.potentials_known
    }

    pub fn is_zero_potential(&self) -> bool {
        self.potentials.iter().all(PotentialSpec::is_zero)
    }

    pub fn max_abs_sigma(&self) -> f64 {
        self.potentials.iter().fold(0.0, |m, p| m.max(p.max_abs()))
    }

    /// Total variation of the zero-extended `σ` over all edges.
    pub fn sigma_variation(&self) -> f64 {
        self.potentials
            .iter()
            .flat_map(|p| p.jumps())
            .map(|(_, c)| c.abs())
            .sum()
    }

    /// Same geometry with every potential set to zero.
    pub fn zero_potential(&self) -> ValidatedGraph {
        ValidatedGraph {
            unit: self.unit,
            edges: self.edges.clone(),
            potentials: self.edges.iter().map(|e| PotentialSpec::zero(e.length)).collect(),
            potentials_known: true,
        }
    }

    pub fn spec(&self) -> GraphSpec {
        GraphSpec { unit: self.unit, edges: self.edges.clone() }
    }

    /// Greatest common measure of the edge lengths, in rational units.
    pub fn common_measure(&self) -> Rational {
        self.edges.iter().map(|e| e.length).fold(Rational::zero(), rational_gcd)
    }

    /// Greatest common measure of all lengths and all potential breakpoints.
    pub fn breakpoint_measure(&self) -> Rational {
        self.potentials
            .iter()
            .flat_map(|p| p.breakpoints.iter().copied())
            .fold(self.common_measure(), rational_gcd)
    }
}

/// Convenience wrapper for [`ValidatedGraph::common_measure`].
pub fn common_measure(graph: &ValidatedGraph) -> Rational {
    graph.common_measure()
}

impl fmt::Display for ValidatedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lasso(p={}, lengths=[", self.p())?;
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", e.length)?;
        }
        write!(f, "] x {})", self.unit)
    }
}

// JSON file schema

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    unit: Option<serde_json::Value>,
    edges: Vec<EdgeFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    id: usize,
    length: String,
    role: EdgeRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma: Option<SigmaFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SigmaFile {
    breakpoints: Vec<String>,
    values: Vec<f64>,
}

fn parse_unit(v: &serde_json::Value) -> Result<f64> {
    match v {
        serde_json::Value::Number(n) => {
            n.as_f64().filter(|x| *x > 0.0).ok_or_else(|| Error::BadUnit(n.to_string()))
        }
        serde_json::Value::String(s) if s.eq_ignore_ascii_case("pi") => Ok(std::f64::consts::PI),
        serde_json::Value::String(s) => {
            s.parse::<f64>().ok().filter(|x| *x > 0.0).ok_or_else(|| Error::BadUnit(s.clone()))
        }
        other => Err(Error::BadUnit(other.to_string())),
    }
}

impl GraphFile {
    fn into_spec(self) -> Result<GraphSpec> {
        let unit = self.unit.as_ref().map(parse_unit).transpose()?.unwrap_or(1.0);
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in self.edges {
            let length = parse_rational(&e.length)
                .ok_or_else(|| Error::IrrationalLength { edge: e.id, text: e.length.clone() })?;
            let potential = match e.sigma {
                None => None,
                Some(s) => {
                    let breakpoints = s
                        .breakpoints
                        .iter()
                        .map(|b| {
                            parse_rational(b).ok_or_else(|| Error::BadBreakpoints {
                                edge: e.id,
                                reason: format!("{b:?} is not an exact rational"),
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Some(PotentialSpec { breakpoints, values: s.values })
                }
            };
            edges.push(EdgeSpec { id: e.id, length, role: e.role, potential });
        }
        Ok(GraphSpec { unit, edges })
    }

    fn from_spec(spec: &GraphSpec) -> Self {
        let unit = if spec.unit == 1.0 {
            None
        } else if spec.unit == std::f64::consts::PI {
            Some(serde_json::Value::String("pi".into()))
        } else {
            serde_json::Number::from_f64(spec.unit).map(serde_json::Value::Number)
        };
        let edges = spec
            .edges
            .iter()
            .map(|e| EdgeFile {
                id: e.id,
                length: format_rational(e.length),
                role: e.role,
                sigma: e.potential.as_ref().map(|p| SigmaFile {
                    breakpoints: p.breakpoints.iter().map(|&b| format_rational(b)).collect(),
                    values: p.values.clone(),
                }),
            })
            .collect();
        GraphFile { unit, edges }
    }
}
