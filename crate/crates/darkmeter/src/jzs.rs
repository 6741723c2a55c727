//! Analytic-prior one-sample Bayes factor with a Cauchy prior on the
//! standardised effect size.
//!
//! The sampling distribution of the t statistic given an effect size
//! `delta = mu / sigma` is noncentral t with `n - 1` degrees of freedom and
//! noncentrality `delta * sqrt(n)`; the scale nuisance is already integrated
//! out in that construction. The Bayes factor for the point null is
//!
//! ```text
//! BF01 = f(t | delta = 0) / integral f(t | delta) pi(delta) d delta
//! ```
//!
//! with `pi` a Cauchy(0, scale) prior, truncated to `delta >= 0` for the
//! one-sided test. The integral runs over the prior variable through the
//! tail-compactifying substitution `delta = scale * tan(theta)`, so the
//! domain is finite and both the spike near zero (tiny scales) and the
//! likelihood bump (huge `n`) are resolved by seeded adaptive quadrature.

use thiserror::Error;
use crate::math::positive;

#[derive(Debug, Error)]
pub enum JzsError {
    #[error("invalid t-test input: {0}")]
    InvalidInput(String),
    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestSide {
    TwoSided,
    /// Prior truncated to non-negative effect sizes.
    PositiveOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTestInput {
    /// t statistic, `mean / (sd / sqrt(n))`.
    pub t: f64,
    pub n: usize,
    /// Cauchy scale on the standardised effect size.
    pub scale: f64,
    pub side: TestSide,
}

pub const DEFAULT_CAUCHY_SCALE: f64 = 0.707;

impl TTestInput {
    pub fn new(t: f64, n: usize, scale: f64, side: TestSide) -> Self {
        TTestInput { t, n, scale, side }
    }

    /// Build the input from summary statistics; the t statistic is always
    /// recomputed here rather than supplied by hand.
    pub fn from_stats(
        mean: f64,
        variance: f64,
        n: usize,
        scale: f64,
        side: TestSide,
    ) -> Result<Self, JzsError> {
        if n < 2 {
            return Err(JzsError::InvalidInput(format!("need n >= 2, got {n}")));
        }
        if !positive(variance) {
            return Err(JzsError::InvalidInput(format!(
                "variance must be positive, got {variance}"
            )));
        }
        let t = mean / (variance / n as f64).sqrt();
        Ok(TTestInput { t, n, scale, side })
    }

    fn validate(&self) -> Result<(), JzsError> {
        if self.n < 2 {
            return Err(JzsError::InvalidInput(format!("need n >= 2, got {}", self.n)));
        }
        if !positive(self.scale) {
            return Err(JzsError::InvalidInput(format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        if !self.t.is_finite() {
            return Err(JzsError::InvalidInput(format!("t must be finite, got {}", self.t)));
        }
        Ok(())
    }
}

/// Unnormalised log sampling density of the t statistic at `t` given degrees
/// of freedom `df` and noncentrality `ncp`. Terms constant in `ncp` and `t`
/// are dropped; only differences of this quantity are meaningful.
///
/// Writing the statistic as `Z / S` with `Z ~ N(ncp, 1)` and
/// `S = sqrt(chi2_df / df)`, the density is a one-dimensional integral over
/// the scale variable,
///
/// ```text
/// f(t) ~ integral s^df exp(-df s^2 / 2) exp(-(t s - ncp)^2 / 2) ds.
/// ```
///
/// The integrand is an analytic single bump (the degrees of freedom are a
/// whole number), so after Laplace centring a fixed composite Gauss-Legendre
/// rule resolves it to near machine precision at constant cost.
pub fn noncentral_t_ln_shape(t: f64, df: f64, ncp: f64) -> f64 {
    let g = |s: f64| -> f64 {
        if s <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let resid = t * s - ncp;
        df * s.ln() - 0.5 * df * s * s - 0.5 * resid * resid
    };

    // The mode solves (df + t^2) s^2 - t ncp s - df = 0; pick the stable
    // quadratic root depending on the sign of t * ncp.
    let ta = t * ncp;
    let disc = (ta * ta + 4.0 * df * (df + t * t)).sqrt();
    let s_star = if ta >= 0.0 {
        (ta + disc) / (2.0 * (df + t * t))
    } else {
        2.0 * df / (disc - ta)
    };
    let g_max = g(s_star);
    if !g_max.is_finite() {
        return f64::NEG_INFINITY;
    }
    // Relative to the df-dependent baseline -df/2, anything this deep is an
    // exact exp-zero; evaluating the integral there would only amplify
    // cancellation noise in g into garbage.
    if g_max + 0.5 * df < -1e5 {
        return f64::NEG_INFINITY;
    }
    let width = 1.0 / (df / (s_star * s_star) + df + t * t).sqrt();
    let lo = (s_star - 12.0 * width).max(0.0);
    let hi = s_star + 12.0 * width;

    let (nodes, weights) = gauss_legendre_20();
    let panels = 6usize;
    let panel_width = (hi - lo) / panels as f64;
    let mut integral = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * panel_width;
        let mid = a + 0.5 * panel_width;
        let half = 0.5 * panel_width;
        for (&x, &w) in nodes.iter().zip(weights.iter()) {
            let s = mid + half * x;
            integral += w * half * (g(s) - g_max).exp();
        }
    }
    g_max + integral.ln()
}

/// 20-point Gauss-Legendre nodes and weights on [-1, 1], computed once by
/// Newton iteration on the Legendre recurrence.
fn gauss_legendre_20() -> (&'static [f64; 20], &'static [f64; 20]) {
    use std::sync::OnceLock;
    static RULE: OnceLock<([f64; 20], [f64; 20])> = OnceLock::new();
    let (nodes, weights) = RULE.get_or_init(|| {
        const N: usize = 20;
        let mut nodes = [0.0; N];
        let mut weights = [0.0; N];
        for i in 0..N.div_ceil(2) {
            // Chebyshev-based starting guess for the i-th root.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            loop {
                // Legendre recurrence for P_N(x) and its derivative.
                let (mut p0, mut p1) = (1.0f64, x);
                for k in 2..=N {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let dp = {
                        let (mut p0, mut p1) = (1.0f64, x);
                        for k in 2..=N {
                            let kf = k as f64;
                            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                            p0 = p1;
                            p1 = p2;
                        }
                        N as f64 * (x * p1 - p0) / (x * x - 1.0)
                    };
                    nodes[i] = -x;
                    nodes[N - 1 - i] = x;
                    let w = 2.0 / ((1.0 - x * x) * dp * dp);
                    weights[i] = w;
                    weights[N - 1 - i] = w;
                    break;
                }
            }
        }
        (nodes, weights)
    });
    (nodes, weights)
}

/// Globally adaptive Simpson over pre-seeded segments.
///
/// Segments are refined worst-error-first with Richardson extrapolation until
/// the pooled error estimate drops below `rel_tol` times the integral, under
/// a hard evaluation budget so pathological integrands fail loudly instead of
/// hanging.
fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: &F,
    breakpoints: &[f64],
    rel_tol: f64,
    max_splits: usize,
) -> Result<f64, String> {
    #[derive(Clone, Copy)]
    struct Seg {
        a: f64,
        b: f64,
        fa: f64,
        flm: f64,
        fm: f64,
        frm: f64,
        fb: f64,
        value: f64,
        err: f64,
    }

    fn build<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> Seg {
        let lm = a + 0.25 * (b - a);
        let rm = a + 0.75 * (b - a);
        let flm = f(lm);
        let frm = f(rm);
        let coarse = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        let m = 0.5 * (a + b);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let fine = left + right;
        Seg {
            a,
            b,
            fa,
            flm,
            fm,
            frm,
            fb,
            value: fine + (fine - coarse) / 15.0,
            err: (fine - coarse).abs() / 15.0,
        }
    }

    let mut segs: Vec<Seg> = Vec::new();
    for pair in breakpoints.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
        segs.push(build(f, a, b, fa, fm, fb));
    }
    if segs.is_empty() {
        return Err("empty integration domain".into());
    }

    for _ in 0..max_splits {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.err).sum();
        if err <= rel_tol * total.abs().max(f64::MIN_POSITIVE) {
            return Ok(total);
        }
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.err.total_cmp(&b.1.err))
            .map(|(i, _)| i)
            .unwrap();
        let s = segs[worst];
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            // Interval at floating-point resolution; accept its estimate.
            segs[worst].err = 0.0;
            continue;
        }
        segs[worst] = build(f, s.a, m, s.fa, s.flm, s.fm);
        segs.push(build(f, m, s.b, s.fm, s.frm, s.fb));
    }
    Err(format!(
        "error target {rel_tol:.1e} not reached within {max_splits} refinements"
    ))
}

/// Quadrature segment seeds in the compactified variable: the prior scale
/// features and the likelihood bump, whichever is narrower in theta.
fn theta_breakpoints(t: f64, df: f64, cauchy_ncp_scale: f64, positive_only: bool) -> Vec<f64> {
    let w = 1.0 + 0.5 * t.abs() + 8.0 * (1.0 + t.abs()) / df.sqrt();
    let mut us: Vec<f64> = vec![0.0];
    for k in [0.25, 1.0, 4.0, 20.0] {
        us.push(k * cauchy_ncp_scale);
        us.push(-k * cauchy_ncp_scale);
    }
    for k in [-20.0, -6.0, -2.0, 0.0, 2.0, 6.0, 20.0] {
        us.push(t + k * w);
    }
    let lo = if positive_only {
        0.0
    } else {
        -std::f64::consts::FRAC_PI_2
    };
    let hi = std::f64::consts::FRAC_PI_2;
    let mut thetas: Vec<f64> = us
        .into_iter()
        .map(|u| (u / cauchy_ncp_scale).atan())
        .filter(|&th| th > lo && th < hi)
        .collect();
    thetas.push(lo);
    thetas.push(hi);
    thetas.sort_by(|a, b| a.total_cmp(b));
    thetas.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    thetas
}

/// Bayes factor for the point null against the Cauchy-prior alternative.
///
/// Values above one favour the null. Relative quadrature error is held below
/// 1e-6; failure to converge is reported as an error rather than a value.
pub fn jzs_bf01(input: &TTestInput) -> Result<f64, JzsError> {
    input.validate()?;
    let t = input.t;
    let df = (input.n - 1) as f64;
    let sqrt_n = (input.n as f64).sqrt();
    // Cauchy scale expressed in noncentrality units.
    let s_c = input.scale * sqrt_n;
    let positive_only = input.side == TestSide::PositiveOnly;

    let ln_f0 = noncentral_t_ln_shape(t, df, 0.0);
    let breakpoints = theta_breakpoints(t, df, s_c, positive_only);

    // Shift by the largest log value seen at the seeds to keep exp in range.
    let ln_at = |theta: f64| noncentral_t_ln_shape(t, df, s_c * theta.tan());
    let mut shift = ln_f0;
    for pair in breakpoints.windows(2) {
        let mid = 0.5 * (pair[0] + pair[1]);
        shift = shift.max(ln_at(mid)).max(ln_at(pair[0]));
    }

    let integrand = |theta: f64| {
        let v = ln_at(theta) - shift;
        if v < -745.0 {
            0.0
        } else {
            v.exp()
        }
    };

    let total = integrate_adaptive(&integrand, &breakpoints, 1e-9, 4000)
        .map_err(JzsError::Quadrature)?;
    if !positive(total) {
        return Err(JzsError::Quadrature(format!(
            "marginal integral degenerate: {total}"
        )));
    }

    let norm = if positive_only {
        2.0 / std::f64::consts::PI
    } else {
        1.0 / std::f64::consts::PI
    };
    let ln_marginal = shift + (norm * total).ln();
    Ok((ln_f0 - ln_marginal).exp())
}
