//! Small statistics helpers used by the ensemble reductions.

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Ordinary least squares `y = intercept + slope * x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Average ranks (1-based), ties share the mean rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let rx = ranks(x);
    let ry = ranks(y);
    let mx = mean(&rx);
    let my = mean(&ry);
    let num: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let dx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let dy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    num / (dx * dy).sqrt()
}

/// Complementary Kolmogorov distribution Q(λ) = 2 Σ (-1)^{j-1} exp(-2 j² λ²).
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let term = sign * (-2.0 * (j as f64 * lambda).powi(2)).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test of `samples` against the uniform
/// distribution on `[lo, hi)`. Returns `(D, p_value)`.
pub fn ks_uniform(samples: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    let n = samples.len();
    let mut u: Vec<f64> = samples.iter().map(|x| (x - lo) / (hi - lo)).collect();
    u.sort_by(|a, b| a.total_cmp(b));
    let nf = n as f64;
    let d = u
        .iter()
        .enumerate()
        .map(|(i, &ui)| {
            let lo_gap = ui - i as f64 / nf;
            let hi_gap = (i as f64 + 1.0) / nf - ui;
            lo_gap.max(hi_gap)
        })
        .fold(0.0, f64::max);
    let sn = nf.sqrt();
    let p = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
    (d, p)
}

/// Fixed-width histogram over `[lo, hi)`; values outside are clamped into the
/// edge bins.
pub fn histogram(xs: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<u64> {
    let mut h = vec![0u64; bins];
    for &x in xs {
        let f = ((x - lo) / (hi - lo) * bins as f64).floor();
        let i = f.clamp(0.0, bins as f64 - 1.0) as usize;
        h[i] += 1;
    }
    h
}
