//! Bracketing root search for oscillating real functions.

use rayon::prelude::*;

/// A located root with its multiplicity (1 for a crossing, 2 for a tangency).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub at: f64,
    pub multiplicity: usize,
}

/// Bisection on a bracket with `f(a)` and `f(b)` of opposite sign.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, mut fa: f64, tol: f64) -> f64 {
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Location of the extremum of `f` inside `(a, b)`, by bisection on a
/// central-difference derivative. `None` when the derivative does not change
/// sign across the interval.
pub fn extremum<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Option<f64> {
    let slope = |t: f64| {
        let h = 1e-7 * t.abs().max(1.0);
        f(t + h) - f(t - h)
    };
    let sa = slope(a);
    let sb = slope(b);
    if sa == 0.0 {
        return Some(a);
    }
    if sb == 0.0 {
        return Some(b);
    }
    if (sa > 0.0) == (sb > 0.0) {
        return None;
    }
    Some(bisect(&slope, a, b, sa, tol))
}

/// Options for [`scan`].
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub step: f64,
    pub tol: f64,
    /// Tangential zeros are only sought for `t` above this value.
    pub tangent_from: f64,
    /// A tangency is accepted when `|f| ≤ tangent_tol · amplitude(t)`.
    pub tangent_tol: f64,
}

/// All zeros of `f` on `[lo, hi]` from a uniform scan.
///
/// Crossings are refined by bisection. Where `|f|` has a local minimum
/// without a sign change, the extremum is located: a sign flip there yields
/// two crossings, a value below tolerance a double root.
pub fn scan<F, A>(f: &F, amplitude: &A, lo: f64, hi: f64, opts: ScanOptions) -> Vec<Root>
where
    F: Fn(f64) -> f64 + Sync,
    A: Fn(f64) -> f64 + Sync,
{
    if hi < lo {
        return Vec::new();
    }
    let cells = ((hi - lo) / opts.step).ceil().max(1.0) as usize;
    let ts: Vec<f64> = (0..=cells).map(|i| if i == cells { hi } else { lo + i as f64 * opts.step }).collect();
    let vals: Vec<f64> = ts.par_iter().map(|&t| f(t)).collect();

    let mut roots: Vec<Vec<Root>> = (0..cells)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            let (a, b) = (ts[i], ts[i + 1]);
            let (fa, fb) = (vals[i], vals[i + 1]);
            if fa == 0.0 {
                let before = if i > 0 { vals[i - 1] } else { fb };
                let mult = if i > 0 && before != 0.0 && fb != 0.0 && (before > 0.0) == (fb > 0.0) { 2 } else { 1 };
                out.push(Root { at: a, multiplicity: mult });
                return out;
            }
            if i + 1 == cells && fb == 0.0 {
                out.push(Root { at: b, multiplicity: 1 });
                return out;
            }
            if fb != 0.0 && (fa > 0.0) != (fb > 0.0) {
                out.push(Root { at: bisect(f, a, b, fa, opts.tol), multiplicity: 1 });
                return out;
            }
            // local minimum of |f| at the right end of the cell: inspect (a, c)
            if i + 2 <= cells && b > opts.tangent_from {
                let fc = vals[i + 2];
                let same = fb != 0.0 && fc != 0.0 && (fa > 0.0) == (fb > 0.0) && (fb > 0.0) == (fc > 0.0);
                if same && fb.abs() < fa.abs() && fb.abs() <= fc.abs() {
                    let c = ts[i + 2];
                    if let Some(t) = extremum(f, a, c, opts.tol) {
                        let ft = f(t);
                        if ft == 0.0 || (ft > 0.0) != (fb > 0.0) {
                            if ft == 0.0 {
                                out.push(Root { at: t, multiplicity: 2 });
                            } else {
                                out.push(Root { at: bisect(f, a, t, fa, opts.tol), multiplicity: 1 });
                                out.push(Root { at: bisect(f, t, c, ft, opts.tol), multiplicity: 1 });
                            }
                        } else if ft.abs() <= opts.tangent_tol * amplitude(t) {
                            out.push(Root { at: t, multiplicity: 2 });
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut all: Vec<Root> = roots.drain(..).flatten().collect();
    all.sort_by(|x, y| x.at.total_cmp(&y.at));
    all
}
