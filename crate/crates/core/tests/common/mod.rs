//! Oracles shared by the integration tests. Nothing here calls into the
//! library's own quadrature or closed forms.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Composite 20-point Gauss-Legendre over `panels` equal panels of [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        let s: f64 = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| wi * f(mid + 0.5 * h * xi))
            .sum();
        total += 0.5 * h * s;
    }
    total
}

/// Density of the net flow for constant demand `p` and exponential arrivals.
/// Deficit frames: `z = (u - p)/beta` on `[-p/beta, 0)`. Surplus frames:
/// `z = mu (u - p)` on `[0, inf)`.
pub fn net_flow_pdf(z: f64, p: f64, lambda: f64, mu: f64, beta: f64) -> f64 {
    if z < -p / beta {
        0.0
    } else if z < 0.0 {
        let u = p + beta * z;
        beta * lambda * (-lambda * u).exp()
    } else {
        let u = p + z / mu;
        lambda / mu * (-lambda * u).exp()
    }
}

/// `int g(z) f_z(z) dz`, split at the kink and truncated where the
/// exponential tail is below 1e-30 of its head.
pub fn expect_net_flow<G: Fn(f64) -> f64>(g: G, p: f64, lambda: f64, mu: f64, beta: f64) -> f64 {
    let lower = if p > 0.0 {
        integrate(
            |z| g(z) * net_flow_pdf(z, p, lambda, mu, beta),
            -p / beta,
            0.0,
            64,
        )
    } else {
        0.0
    };
    let z_max = 70.0 * mu / lambda;
    let upper = integrate(
        |z| g(z) * net_flow_pdf(z, p, lambda, mu, beta),
        0.0,
        z_max,
        400,
    );
    lower + upper
}

/// Available-space recursion, written directly: `min{[space - z]^+, e_max}`.
pub fn space_step(space: f64, z: f64, e_max: f64) -> f64 {
    (space - z).max(0.0).min(e_max)
}

/// Stored-energy recursion: `min{[e + z]^+, e_max}`.
pub fn energy_step(e: f64, z: f64, e_max: f64) -> f64 {
    (e + z).max(0.0).min(e_max)
}

/// Net flow with charging efficiency `mu` and discharging efficiency `beta`.
pub fn net_flow(u: f64, p: f64, mu: f64, beta: f64) -> f64 {
    if u >= p {
        mu * (u - p)
    } else {
        (u - p) / beta
    }
}
