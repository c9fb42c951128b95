//! Polynomial root finding: closed-form real cubic roots and Aberth–Ehrlich
//! iteration for complex roots of general polynomials.

use num_complex::Complex64;

/// Evaluates `coeffs[0] + coeffs[1] x + ...` by Horner's rule.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn eval_with_derivative(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn polish(coeffs: &[f64], mut x: f64) -> f64 {
    for _ in 0..8 {
        let (p, dp) = eval_with_derivative(coeffs, x);
        if dp == 0.0 || !p.is_finite() {
            break;
        }
        let step = p / dp;
        let next = x - step;
        if !next.is_finite() {
            break;
        }
        if eval(coeffs, next).abs() >= p.abs() {
            break;
        }
        x = next;
    }
    x
}

/// All real roots of `c0 + c1 x + c2 x^2 + c3 x^3`, ascending. Degrades to
/// quadratic or linear when leading coefficients vanish. Repeated roots are
/// returned once.
pub fn real_cubic_roots(c0: f64, c1: f64, c2: f64, c3: f64) -> Vec<f64> {
    let coeffs = [c0, c1, c2, c3];
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let mut roots = if c3.abs() <= 1e-300 {
        real_quadratic_roots(c0, c1, c2)
    } else {
        // depressed cubic t^3 + p t + q with x = t - a/3
        let a = c2 / c3;
        let b = c1 / c3;
        let c = c0 / c3;
        let p = b - a * a / 3.0;
        let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
        let shift = -a / 3.0;
        let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
        if disc > 0.0 {
            let s = disc.sqrt();
            let u = (-q / 2.0 + s).cbrt();
            let v = (-q / 2.0 - s).cbrt();
            vec![u + v + shift]
        } else if p == 0.0 {
            vec![shift]
        } else {
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            (0..3)
                .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift)
                .collect()
        }
    };
    for r in roots.iter_mut() {
        *r = polish(&coeffs, *r);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300));
    roots
}

fn real_quadratic_roots(c0: f64, c1: f64, c2: f64) -> Vec<f64> {
    if c2.abs() <= 1e-300 {
        if c1 == 0.0 {
            return Vec::new();
        }
        return vec![-c0 / c1];
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return Vec::new();
    }
    // numerically stable form
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    let mut r = vec![q / c2, c0 / q];
    r.sort_by(|a, b| a.partial_cmp(b).unwrap());
    r
}

/// Complex roots of a real or complex polynomial `coeffs[0] + coeffs[1] z + ...`
/// via simultaneous Aberth–Ehrlich iteration.
pub fn complex_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(|z| z.norm() == 0.0) {
        c.pop();
    }
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let monic: Vec<Complex64> = c.iter().map(|z| z / lead).collect();
    // Cauchy bound on root moduli
    let radius = 1.0 + monic[..deg].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let angle = std::f64::consts::TAU * (k as f64 + 0.25) / deg as f64 + 0.4;
            Complex64::from_polar(0.5 * radius, angle)
        })
        .collect();
    let horner = |x: Complex64| {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for a in monic.iter().rev() {
            dp = dp * x + p;
            p = p * x + a;
        }
        (p, dp)
    };
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..deg {
            let (p, dp) = horner(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let sum: Complex64 = (0..deg)
                .filter(|&j| j != i)
                .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    z
}
