//! One-dimensional Gauss-Legendre and spherical Lebedev rules.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::Vec3;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Point counts of the implemented Lebedev rules.
pub const LEBEDEV_SIZES: [usize; 5] = [6, 14, 26, 38, 50];

/// Polynomial degree integrated exactly by the Lebedev rule with `n` points.
pub fn lebedev_degree(n: usize) -> Option<usize> {
    match n {
        6 => Some(3),
        14 => Some(5),
        26 => Some(7),
        38 => Some(9),
        50 => Some(11),
        _ => None,
    }
}

/// Lebedev rule on the unit sphere; weights sum to 1.
pub fn lebedev(n: usize) -> Result<(Vec<Vec3>, Vec<f64>)> {
    let mut pts = Vec::with_capacity(n);
    let mut wts = Vec::with_capacity(n);
    let mut push = |set: Vec<Vec3>, w: f64| {
        wts.extend(std::iter::repeat_n(w, set.len()));
        pts.extend(set);
    };
    match n {
        6 => push(octahedron(), 1.0 / 6.0),
        14 => {
            push(octahedron(), 1.0 / 15.0);
            push(cube(), 3.0 / 40.0);
        }
        26 => {
            push(octahedron(), 1.0 / 21.0);
            push(edges(), 4.0 / 105.0);
            push(cube(), 9.0 / 280.0);
        }
        38 => {
            push(octahedron(), 1.0 / 105.0);
            push(cube(), 9.0 / 280.0);
            push(pq0(0.459_700_843_380_983_1, 0.888_073_833_977_115_3), 1.0 / 35.0);
        }
        50 => {
            push(octahedron(), 4.0 / 315.0);
            push(edges(), 64.0 / 2835.0);
            push(cube(), 27.0 / 1280.0);
            let l = 1.0 / 11f64.sqrt();
            push(llm(l, 3.0 * l), 14641.0 / 725_760.0);
        }
        _ => return Err(Error::InvalidGrid(format!("no Lebedev rule with {n} points (available: {LEBEDEV_SIZES:?})"))),
    }
    Ok((pts, wts))
}

fn octahedron() -> Vec<Vec3> {
    let mut v = Vec::new();
    for axis in 0..3 {
        for s in [1.0, -1.0] {
            let mut p = Vec3::zeros();
            p[axis] = s;
            v.push(p);
        }
    }
    v
}

fn cube() -> Vec<Vec3> {
    let a = 1.0 / 3f64.sqrt();
    let mut v = Vec::new();
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                v.push(Vec3::new(sx * a, sy * a, sz * a));
            }
        }
    }
    v
}

fn edges() -> Vec<Vec3> {
    let a = 1.0 / 2f64.sqrt();
    let mut v = Vec::new();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        for si in [1.0, -1.0] {
            for sj in [1.0, -1.0] {
                let mut p = Vec3::zeros();
                p[i] = si * a;
                p[j] = sj * a;
                v.push(p);
            }
        }
    }
    v
}

/// All sign and axis arrangements of `(±p, ±q, 0)`.
fn pq0(p: f64, q: f64) -> Vec<Vec3> {
    let mut v = Vec::new();
    for (i, j, k) in [(0, 1, 2), (1, 0, 2), (0, 2, 1), (2, 0, 1), (1, 2, 0), (2, 1, 0)] {
        for sp in [1.0, -1.0] {
            for sq in [1.0, -1.0] {
                let mut x = Vec3::zeros();
                x[i] = sp * p;
                x[j] = sq * q;
                x[k] = 0.0;
                v.push(x);
            }
        }
    }
    v
}

/// All sign and axis arrangements of `(±l, ±l, ±m)`.
fn llm(l: f64, m: f64) -> Vec<Vec3> {
    let mut v = Vec::new();
    for axis in 0..3 {
        for s0 in [1.0, -1.0] {
            for s1 in [1.0, -1.0] {
                for s2 in [1.0, -1.0] {
                    let mut x = Vec3::from_element(l);
                    x[axis] = m;
                    v.push(Vec3::new(s0 * x[0], s1 * x[1], s2 * x[2]));
                }
            }
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn double_factorial(n: i64) -> f64 {
        if n <= 0 {
            1.0
        } else {
            (n as f64) * double_factorial(n - 2)
        }
    }

    /// Mean of x^a y^b z^c over the unit sphere (closed form).
    fn sphere_moment(a: u32, b: u32, c: u32) -> f64 {
        if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
            return 0.0;
        }
        let (a, b, c) = (a as i64, b as i64, c as i64);
        double_factorial(a - 1) * double_factorial(b - 1) * double_factorial(c - 1) / double_factorial(a + b + c + 1)
    }

    #[test]
    fn lebedev_exact_on_monomials() {
        for &n in &LEBEDEV_SIZES {
            let (pts, wts) = lebedev(n).unwrap();
            assert_eq!(pts.len(), n);
            assert!((wts.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(pts.iter().all(|p| (p.norm() - 1.0).abs() < 1e-14));
            let deg = lebedev_degree(n).unwrap() as u32;
            for a in 0..=deg {
                for b in 0..=deg - a {
                    for c in 0..=deg - a - b {
                        let q: f64 = pts
                            .iter()
                            .zip(&wts)
                            .map(|(p, w)| w * p.x.powi(a as i32) * p.y.powi(b as i32) * p.z.powi(c as i32))
                            .sum();
                        assert!(
                            (q - sphere_moment(a, b, c)).abs() < 1e-14,
                            "n={n} monomial ({a},{b},{c}): {q} vs {}",
                            sphere_moment(a, b, c)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn unknown_lebedev_size() {
        assert!(lebedev(7).is_err());
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in [1, 2, 5, 12, 24, 40] {
            let (x, w) = gauss_legendre(n);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}: {q} vs {exact}");
            }
        }
    }
}
