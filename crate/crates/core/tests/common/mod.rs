//! Reference computations written independently of the crate: closed forms,
//! composite Simpson quadrature and an RK4 shooting solver.

#![allow(dead_code)]

use std::f64::consts::PI;

/// `W(r) = (1 + r²/(d(d-2)))^{-(d-2)/2}`
pub fn w_exact(d: usize, r: f64) -> f64 {
    let d = d as f64;
    (1.0 + r * r / (d * (d - 2.0))).powf(-(d - 2.0) / 2.0)
}

pub fn p_c(d: usize) -> f64 {
    (d as f64 + 2.0) / (d as f64 - 2.0)
}

/// `Γ(n/2)` by the half-integer recursion.
pub fn gamma_half(n: usize) -> f64 {
    let (mut g, mut x) = if n % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while x < n as f64 / 2.0 - 1e-12 {
        g *= x;
        x += 1.0;
    }
    g
}

/// `|S^{d-1}| = 2 π^{d/2} / Γ(d/2)`
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

/// Composite Simpson rule with `n` (made even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `∫_{|x| < R} f(|x|) dx` in `R^d`.
pub fn radial_integral(d: usize, radius: f64, f: impl Fn(f64) -> f64) -> f64 {
    sphere_area(d) * simpson(|r| f(r) * r.powi(d as i32 - 1), 0.0, radius, 40_000)
}

/// `-e0²`, the negative eigenvalue of `-Δ - p_c W^{p_c-1}` on all of `R^d`,
/// by shooting from the origin and bisecting on the sign of the far field.
pub fn shooting_e0(d: usize) -> f64 {
    let p = p_c(d);
    let dd = d as f64;
    let v = |r: f64| p * (1.0 + r * r / (dd * (dd - 2.0))).powi(-2);
    // +1: stays positive and grows (e too large); -1: crosses zero (e too small).
    let shoot = |e: f64| -> f64 {
        let rhs = |r: f64, y: f64, z: f64| (z, -(dd - 1.0) / r * z + (e * e - v(r)) * y);
        let h = 1e-3;
        let mut r = 1e-4;
        let mut y = 1.0;
        let mut z = (e * e - v(0.0)) * r / dd;
        while r < 60.0 {
            let k1 = rhs(r, y, z);
            let k2 = rhs(r + h / 2.0, y + h / 2.0 * k1.0, z + h / 2.0 * k1.1);
            let k3 = rhs(r + h / 2.0, y + h / 2.0 * k2.0, z + h / 2.0 * k2.1);
            let k4 = rhs(r + h, y + h * k3.0, z + h * k3.1);
            y += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            z += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            r += h;
            if y < 0.0 {
                return -1.0;
            }
            if y > 1e8 {
                return 1.0;
            }
        }
        z.signum()
    };
    let (mut lo, mut hi) = (1e-3, v(0.0).sqrt());
    assert!(shoot(lo) < 0.0 && shoot(hi) > 0.0, "no bound state bracketed");
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if shoot(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Hermite `H_j`, so that `∂_r^j e^{-r²} = (-1)^j H_j(r) e^{-r²}`.
pub fn hermite(j: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * x);
    if j == 0 {
        return a;
    }
    for n in 1..j {
        let next = 2.0 * x * b - 2.0 * n as f64 * a;
        a = b;
        b = next;
    }
    b
}
