//! Composite adaptive Simpson quadrature over caller-supplied panels.
//!
//! Integrands of the form `|g(t)|` have kinks where the smooth `g` changes
//! sign. Simpson's error estimate assumes smoothness, so those points are
//! located first ([`sign_changes`]) and used as panel boundaries.

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Sum of the per-interval Richardson error estimates.
    pub error_estimate: f64,
    /// False when some interval hit the depth limit before meeting its share
    /// of the tolerance.
    pub converged: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveSimpson {
    pub tolerance: f64,
    pub max_depth: u32,
    /// Subdivisions forced before the error test is trusted.
    pub min_depth: u32,
}

impl AdaptiveSimpson {
    pub fn new(tolerance: f64) -> Self {
        Self {
            tolerance,
            max_depth: 48,
            min_depth: 3,
        }
    }

    /// Integrates `f` over `[breaks[0], breaks[last]]`, treating every entry
    /// of `breaks` as a panel boundary. `breaks` must be sorted.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> QuadResult {
        let mut total = QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            converged: true,
            evaluations: 0,
        };
        if breaks.len() < 2 {
            return total;
        }
        let span = breaks[breaks.len() - 1] - breaks[0];
        if span <= 0.0 {
            return total;
        }

        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let tol = self.tolerance * (b - a) / span;
            let m = 0.5 * (a + b);
            let (fa, fm, fb) = (f(a), f(m), f(b));
            let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            let mut panel = Panel {
                value: 0.0,
                error: 0.0,
                converged: true,
                evaluations: 3,
            };
            self.refine(&f, [a, m, b], [fa, fm, fb], whole, tol, 0, &mut panel);
            total.value += panel.value;
            total.error_estimate += panel.error;
            total.converged &= panel.converged;
            total.evaluations += panel.evaluations;
        }
        total
    }

    #[allow(clippy::too_many_arguments)]
    fn refine<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        [a, m, b]: [f64; 3],
        [fa, fm, fb]: [f64; 3],
        whole: f64,
        tol: f64,
        depth: u32,
        out: &mut Panel,
    ) {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let (flm, frm) = (f(lm), f(rm));
        out.evaluations += 2;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;

        let accurate = delta.abs() <= 15.0 * tol;
        if (depth >= self.min_depth && accurate) || depth >= self.max_depth {
            out.value += left + right + delta / 15.0;
            out.error += delta.abs() / 15.0;
            out.converged &= accurate;
            return;
        }
        self.refine(
            f,
            [a, lm, m],
            [fa, flm, fm],
            left,
            0.5 * tol,
            depth + 1,
            out,
        );
        self.refine(
            f,
            [m, rm, b],
            [fm, frm, fb],
            right,
            0.5 * tol,
            depth + 1,
            out,
        );
    }
}

struct Panel {
    value: f64,
    error: f64,
    converged: bool,
    evaluations: usize,
}

/// Points in `[a, b]` where `g` changes sign.
///
/// `g` is sampled every `step`; each bracketing pair is refined by bisection
/// to machine precision. Sign changes closer together than `step` can be
/// missed, so the caller picks `step` below the minimum root spacing.
pub fn sign_changes<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, step: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    if !(b > a && step > 0.0) {
        return roots;
    }
    let n = ((b - a) / step).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let mut x0 = a;
    let mut g0 = g(x0);
    for i in 1..=n {
        let x1 = if i == n { b } else { a + i as f64 * h };
        let g1 = g(x1);
        if g0 == 0.0 {
            if x0 > a {
                roots.push(x0);
            }
        } else if g0 * g1 < 0.0 {
            roots.push(bisect(&g, x0, x1, g0));
        }
        x0 = x1;
        g0 = g1;
    }
    roots
}

fn bisect<G: Fn(f64) -> f64>(g: &G, mut lo: f64, mut hi: f64, mut g_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return mid;
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
