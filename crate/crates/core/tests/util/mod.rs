//! Shared test oracles, independent of the library's quadrature path.

/// Gauss-Legendre rule on [0,1] (no endpoint nodes): roots of P_n found by
/// Newton iteration, weights 2/((1−t²)P'_n(t)²) mapped with Jacobian 1/2.
/// Exact for polynomials of degree ≤ 2n−1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, t);
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        nodes.push(0.5 * (t + 1.0));
        weights.push(0.5 * w);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

fn legendre_pair(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * t * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

/// ∫_0^1 f dx with the 64-point Gauss rule.
pub fn integrate_64(f: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = gauss_legendre(64);
    nodes.iter().zip(&weights).map(|(&x, &w)| w * f(x)).sum()
}
