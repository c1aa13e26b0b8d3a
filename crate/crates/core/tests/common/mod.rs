//! Reference implementations used by the integration tests. Written from the
//! closed forms directly and sharing no code with the library.
#![allow(dead_code)]

use num_complex::Complex64;

pub fn optimal_detuning(kappa: f64) -> f64 {
    (kappa * kappa / 4.0 + 1.0).sqrt()
}

pub fn chi(w: f64, kappa: f64, delta: f64) -> Complex64 {
    1.0 / Complex64::new(kappa / 2.0, delta - w)
}

pub fn v_sb(w: f64, kappa: f64, delta: f64, g: f64) -> f64 {
    g * g * kappa * chi(w, kappa, delta).norm_sqr()
}

pub fn v_ks(w: f64, kappa: f64, delta: f64, g: f64, xi: Complex64) -> f64 {
    let i = Complex64::i();
    let num = 1.0 - 2.0 * i * xi * chi(-w, kappa, delta);
    let den = 1.0 - 4.0 * xi.norm_sqr() * chi(w, kappa, delta) * chi(-w, kappa, delta).conj();
    v_sb(w, kappa, delta, g) * num.norm_sqr() / den.norm_sqr()
}

pub fn v_ss(w: f64, kappa: f64, delta: f64, g: f64, r: f64, phi: f64) -> f64 {
    let a0 = chi(-w, kappa, delta) / chi(w, kappa, delta).conj();
    let f = r.cosh() + a0 * Complex64::from_polar(1.0, -2.0 * phi) * r.sinh();
    v_sb(w, kappa, delta, g) * f.norm_sqr()
}

/// Root of 1 − 2iξχ(ω_b) = 0 found by Newton iteration on (Re, Im) with a
/// finite-difference Jacobian, starting from ξ = 0.
pub fn xi_null_newton(kappa: f64, delta: f64) -> Complex64 {
    let f = |x: Complex64| 1.0 - 2.0 * Complex64::i() * x * chi(1.0, kappa, delta);
    let mut x = Complex64::new(0.0, 0.0);
    for _ in 0..100 {
        let r = f(x);
        let h = 1e-7 * (1.0 + x.norm());
        let dr = (f(x + h) - r) / h;
        let di = (f(x + Complex64::new(0.0, h)) - r) / h;
        // Solve [dr di] (dx, dy) = −r as a real 2×2 system.
        let det = dr.re * di.im - di.re * dr.im;
        let dx = (-r.re * di.im + di.re * r.im) / det;
        let dy = (-dr.re * r.im + r.re * dr.im) / det;
        x += Complex64::new(dx, dy);
        if dx.hypot(dy) < 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

/// Real roots of x³ + b x² + c x + d (trigonometric or Cardano form),
/// polished by Newton steps, ascending.
pub fn monic_cubic_real_roots(b: f64, c: f64, d: f64) -> Vec<f64> {
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let mut ts = if disc < 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let theta = (3.0 * q / (p * m)).acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect::<Vec<_>>()
    } else {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    };
    for t in ts.iter_mut() {
        for _ in 0..4 {
            let f = *t * *t * *t + p * *t + q;
            let df = 3.0 * *t * *t + p;
            if df != 0.0 {
                *t -= f / df;
            }
        }
    }
    let mut xs: Vec<f64> = ts.into_iter().map(|t| t - b / 3.0).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs
}

/// Magnon occupations |m|² of the g_0 = 0 Kerr model: positive roots of
/// |P1|² n³ + 2Re(P0 P1*) n² + |P0|² n − J²ε² with u = iδ_a + κ_a/2,
/// P0 = u(κ_m/2 + iδ_m) + J², P1 = −iKu.
pub fn kerr_cubic_occupations(
    delta_a: f64,
    kappa_a: f64,
    delta_m: f64,
    kappa_m: f64,
    kerr: f64,
    j: f64,
    eps: f64,
) -> Vec<f64> {
    let i = Complex64::i();
    let u = i * delta_a + kappa_a / 2.0;
    let p0 = u * (kappa_m / 2.0 + i * delta_m) + j * j;
    let p1 = -i * kerr * u;
    let a3 = p1.norm_sqr();
    let a2 = 2.0 * (p0 * p1.conj()).re;
    let a1 = p0.norm_sqr();
    let a0 = -j * j * eps * eps;
    monic_cubic_real_roots(a2 / a3, a1 / a3, a0 / a3)
        .into_iter()
        .filter(|&n| n > 0.0)
        .collect()
}

/// det(M) of a complex 4×4 matrix by cofactor expansion.
pub fn det4(m: &[[Complex64; 4]; 4]) -> Complex64 {
    fn det3(m: [[Complex64; 3]; 3]) -> Complex64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
    let mut total = Complex64::new(0.0, 0.0);
    for col in 0..4 {
        let mut minor = [[Complex64::new(0.0, 0.0); 3]; 3];
        for r in 1..4 {
            let mut k = 0;
            for c in 0..4 {
                if c != col {
                    minor[r - 1][k] = m[r][c];
                    k += 1;
                }
            }
        }
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        total += m[0][col] * det3(minor) * sign;
    }
    total
}
