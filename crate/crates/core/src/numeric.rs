//! Scalar numerical building blocks shared across the crate: stable
//! log-domain sums, bracketing root refinement, quadrature, the composite
//! α-grid used by every sweep over the two-component ridgeline, and the
//! fixed-precision number formatting used by the CSV outputs.

/// `log(Σ exp(v_i))` without overflow. Returns `-inf` for an empty slice or
/// when every term is `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Normalizes log-weights into probabilities, in place.
pub fn softmax_in_place(values: &mut [f64]) {
    let lse = log_sum_exp(values);
    for v in values.iter_mut() {
        *v = (*v - lse).exp();
    }
}

/// Refines a sign-change bracket `[lo, hi]` of `f` by bisection until the
/// bracket is narrower than `tol` or can no longer be split in floating point.
///
/// The caller guarantees `f(lo)` and `f(hi)` have opposite signs (or one is zero).
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= tol {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`.
/// Returns `(argmin, min)`.
pub fn golden_min<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..300 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The interval is first cut into a handful of panels so that sharply peaked
/// integrands are not accepted on the strength of a single coarse estimate.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    const PANELS: usize = 16;
    let width = (b - a) / PANELS as f64;
    let panel_tol = tol / PANELS as f64;
    (0..PANELS)
        .map(|p| {
            let lo = a + width * p as f64;
            let hi = if p + 1 == PANELS { b } else { lo + width };
            let (flo, fmid, fhi) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
            simpson_step(&f, lo, hi, flo, fmid, fhi, whole, panel_tol, 48)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Innermost α searched for crossings and zeroes on the two-component ridgeline.
pub const ALPHA_EDGE: f64 = 1e-14;
/// Number of uniform points in the default composite α-grid.
pub const DEFAULT_UNIFORM_POINTS: usize = 4096;

/// Geometric ladder `0.1, 0.05, ..., >= 1e-12` (ratio 0.5).
pub fn endpoint_ladder() -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = 0.1;
    while t >= 1e-12 {
        out.push(t);
        t *= 0.5;
    }
    out
}

/// Sorted composite α-grid: `n_uniform` equispaced points on `[0, 1]` plus the
/// geometric ladder at both ends. With `edge = Some(e)` the endpoints 0 and 1
/// are replaced by `e` and `1 - e`.
pub fn composite_grid(n_uniform: usize, edge: Option<f64>) -> Vec<f64> {
    let n = n_uniform.max(2);
    let mut pts: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    for t in endpoint_ladder() {
        pts.push(t);
        pts.push(1.0 - t);
    }
    if let Some(e) = edge {
        pts.retain(|&a| a > e && a < 1.0 - e);
        pts.push(e);
        pts.push(1.0 - e);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Radical inverse of `index` in base `base` (van der Corput sequence).
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

/// The first `n` primes; enough for Halton sequences in modest dimension.
pub fn primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut cand = 2u64;
    while out.len() < n {
        if out
            .iter()
            .take_while(|&&p| p * p <= cand)
            .all(|&p| !cand.is_multiple_of(p))
        {
            out.push(cand);
        }
        cand += 1;
    }
    out
}

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros removed,
/// scientific notation outside `[1e-4, 1e12)`.
pub fn fmt_sig12(x: f64) -> String {
    const SIG: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIG).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
