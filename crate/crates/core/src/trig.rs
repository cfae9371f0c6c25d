//! Exact trigonometric polynomials `Σ a_f cos(fuρ) + Σ b_f sin(fuρ)` with
//! rational frequencies `f` and a common physical unit `u`.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::graph::{rational_gcd, to_f64, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    unit: f64,
    cos: BTreeMap<Rational, f64>,
    sin: BTreeMap<Rational, f64>,
}

impl TrigPoly {
    pub fn zero(unit: f64) -> Self {
        TrigPoly { unit, cos: BTreeMap::new(), sin: BTreeMap::new() }
    }

    pub fn constant(unit: f64, c: f64) -> Self {
        let mut p = Self::zero(unit);
        p.add_cos(Rational::zero(), c);
        p
    }

    /// `c·cos(f u ρ)`.
    pub fn cos(unit: f64, f: Rational, c: f64) -> Self {
        let mut p = Self::zero(unit);
        p.add_cos(f, c);
        p
    }

    /// `c·sin(f u ρ)`.
    pub fn sin(unit: f64, f: Rational, c: f64) -> Self {
        let mut p = Self::zero(unit);
        p.add_sin(f, c);
        p
    }

    pub fn unit(&self) -> f64 {
        self.unit
    }

    fn add_cos(&mut self, f: Rational, c: f64) {
        if c != 0.0 {
            *self.cos.entry(f.abs()).or_insert(0.0) += c;
        }
    }

    fn add_sin(&mut self, f: Rational, c: f64) {
        if c == 0.0 || f.is_zero() {
            return;
        }
        let (f, c) = if f.is_negative() { (-f, -c) } else { (f, c) };
        *self.sin.entry(f).or_insert(0.0) += c;
    }

    pub fn scale(mut self, k: f64) -> Self {
        self.cos.values_mut().for_each(|c| *c *= k);
        self.sin.values_mut().for_each(|c| *c *= k);
        self
    }

    pub fn add(mut self, other: &TrigPoly) -> Self {
        for (&f, &c) in &other.cos {
            self.add_cos(f, c);
        }
        for (&f, &c) in &other.sin {
            self.add_sin(f, c);
        }
        self
    }

    /// Product by the product-to-sum identities.
    pub fn mul(&self, other: &TrigPoly) -> Self {
        let mut out = TrigPoly::zero(self.unit);
        for (&a, &ca) in &self.cos {
            for (&b, &cb) in &other.cos {
                out.add_cos(a - b, 0.5 * ca * cb);
                out.add_cos(a + b, 0.5 * ca * cb);
            }
            for (&b, &sb) in &other.sin {
                // cos a sin b = (sin(a+b) − sin(a−b)) / 2
                out.add_sin(a + b, 0.5 * ca * sb);
                out.add_sin(a - b, -0.5 * ca * sb);
            }
        }
        for (&a, &sa) in &self.sin {
            for (&b, &cb) in &other.cos {
                out.add_sin(a + b, 0.5 * sa * cb);
                out.add_sin(a - b, 0.5 * sa * cb);
            }
            for (&b, &sb) in &other.sin {
                out.add_cos(a - b, 0.5 * sa * sb);
                out.add_cos(a + b, -0.5 * sa * sb);
            }
        }
        out
    }

    /// The same frequencies with every coefficient replaced by its modulus.
    pub fn abs_coefficients(mut self) -> Self {
        self.cos.values_mut().for_each(|c| *c = c.abs());
        self.sin.values_mut().for_each(|c| *c = c.abs());
        self
    }

    /// Drops coefficients below `rel_tol` times the largest one.
    pub fn pruned(mut self, rel_tol: f64) -> Self {
        let max = self.cos.values().chain(self.sin.values()).fold(0.0f64, |m, c| m.max(c.abs()));
        let cut = rel_tol * max;
        self.cos.retain(|_, c| c.abs() > cut);
        self.sin.retain(|_, c| c.abs() > cut);
        self
    }

    /// Cosine terms as `(frequency, coefficient)`, ascending frequency.
    pub fn cos_terms(&self) -> Vec<(Rational, f64)> {
        self.cos.iter().map(|(&f, &c)| (f, c)).collect()
    }

    pub fn sin_terms(&self) -> Vec<(Rational, f64)> {
        self.sin.iter().map(|(&f, &c)| (f, c)).collect()
    }

    pub fn is_even(&self) -> bool {
        self.sin.is_empty()
    }

    pub fn is_odd(&self) -> bool {
        self.cos.is_empty()
    }

    fn omega(&self, f: Rational) -> f64 {
        to_f64(f) * self.unit
    }

    pub fn eval(&self, rho: f64) -> f64 {
        self.derivative(0, rho)
    }

    /// `m`-th derivative in `ρ`, computed exactly term by term.
    pub fn derivative(&self, m: u32, rho: f64) -> f64 {
        // d^m cos(x) = cos(x + mπ/2), d^m sin(x) = sin(x + mπ/2)
        let phase = |x: f64, is_sin: bool| -> f64 {
            let (s, c) = x.sin_cos();
            let k = (m + if is_sin { 3 } else { 0 }) % 4;
            match k {
                0 => c,
                1 => -s,
                2 => -c,
                _ => s,
            }
        };
        let mut acc = 0.0;
        for (&f, &c) in &self.cos {
            let w = self.omega(f);
            acc += c * w.powi(m as i32) * phase(w * rho, false);
        }
        for (&f, &c) in &self.sin {
            let w = self.omega(f);
            acc += c * w.powi(m as i32) * phase(w * rho, true);
        }
        acc
    }

    /// `Σ |c| ω^m`, an upper bound for the `m`-th derivative.
    pub fn derivative_bound(&self, m: u32) -> f64 {
        self.cos
            .iter()
            .chain(self.sin.iter())
            .map(|(&f, &c)| c.abs() * self.omega(f).powi(m as i32))
            .sum()
    }

    /// Exact gcd of the positive frequencies carrying a nonzero coefficient.
    pub fn frequency_gcd(&self) -> Option<Rational> {
        let g = self
            .cos
            .keys()
            .chain(self.sin.keys())
            .filter(|f| f.is_positive())
            .fold(Rational::zero(), |g, &f| rational_gcd(g, f));
        (!g.is_zero()).then_some(g)
    }

    /// Taylor coefficients in `λ = ρ²` of `self(ρ) / ρ^{rho_power}`.
    ///
    /// Valid when the quotient is even in `ρ`: an even polynomial with
    /// `rho_power = 0` or an odd one with `rho_power = 1`.
    pub fn lambda_series(&self, rho_power: u32, count: usize) -> Vec<f64> {
        debug_assert!((rho_power == 0 && self.is_even()) || (rho_power == 1 && self.is_odd()));
        let mut out = vec![0.0; count];
        let offset = rho_power as i32;
        let terms = if rho_power == 0 { &self.cos } else { &self.sin };
        for (&f, &c) in terms {
            let w = self.omega(f);
            // cos(wρ) = Σ (−1)^m w^{2m} λ^m / (2m)!; sin(wρ)/ρ = Σ (−1)^m w^{2m+1} λ^m / (2m+1)!
            let mut term = c * w.powi(offset);
            let mut k = offset as f64;
            for (m, slot) in out.iter_mut().enumerate() {
                if m > 0 {
                    term *= -w * w / ((k + 1.0) * (k + 2.0));
                    k += 2.0;
                }
                *slot += term;
            }
        }
        out
    }
}
