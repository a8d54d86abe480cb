#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

pub mod scenarios;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Bessel J0 and Y0 by their power series (x <= 12) or the Hankel asymptotic
/// expansion beyond.
pub fn bessel_j0_y0(x: f64) -> (f64, f64) {
    assert!(x > 0.0);
    if x <= 12.0 {
        let q = -(x * x) / 4.0;
        let (mut term, mut j0, mut y_sum, mut harmonic) = (1.0, 1.0, 0.0, 0.0);
        for k in 1..200 {
            term *= q / (k * k) as f64;
            harmonic += 1.0 / k as f64;
            j0 += term;
            y_sum += term * harmonic;
            if term.abs() < 1e-18 * j0.abs().max(1e-300) && k > 2 * x as usize {
                break;
            }
        }
        let y0 = 2.0 / PI * (((x / 2.0).ln() + EULER_GAMMA) * j0 - y_sum);
        (j0, y0)
    } else {
        // P0, Q0 asymptotic series
        let mut p = 1.0;
        let mut q = -1.0 / (8.0 * x);
        let mut tp = 1.0;
        let mut tq = -1.0 / (8.0 * x);
        for k in 1..12 {
            let a = (4 * k - 1) as f64;
            let b = (4 * k - 3) as f64;
            tp *= -(b * b) * (a * a) / ((2 * k - 1) as f64 * (2 * k) as f64 * 64.0 * x * x);
            p += tp;
            let c = (4 * k + 1) as f64;
            tq *= -(a * a) * (c * c) / ((2 * k) as f64 * (2 * k + 1) as f64 * 64.0 * x * x);
            q += tq;
        }
        let chi = x - PI / 4.0;
        let amp = (2.0 / (PI * x)).sqrt();
        (amp * (p * chi.cos() - q * chi.sin()), amp * (p * chi.sin() + q * chi.cos()))
    }
}

/// Outgoing free-space Green's function `(i/4) H0^(1)(k r)` of `-(lap + k^2)`.
pub fn greens_function(k: f64, r: f64) -> Complex64 {
    let (j0, y0) = bessel_j0_y0(k * r);
    Complex64::new(0.0, 0.25) * Complex64::new(j0, y0)
}

pub fn relative_l2(numeric: &[Complex64], exact: &[Complex64]) -> f64 {
    let num: f64 = numeric.iter().zip(exact).map(|(a, b)| (a - b).norm_sqr()).sum();
    let den: f64 = exact.iter().map(|b| b.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Tabulated `(x, J0(x), Y0(x))`.
pub const BESSEL_TABLE: [(f64, f64, f64); 10] = [
    (0.5, 0.938469807240813, -0.4445187335067066),
    (11.9, 0.02504944169958986, -0.2298332139433751),
    (12.1, 0.06966677360680752, -0.21843838055092546),
    (1.0, 0.7651976865579665, 0.08825696421567697),
    (5.0, -0.1775967713143383, -0.30851762524903303),
    (10.0, -0.24593576445134832, 0.05567116728359961),
    (24.9, 0.08324596835301536, -0.1364991839967653),
    (25.1, 0.10827567149994938, -0.11676770763803707),
    (30.0, -0.08636798358104031, -0.11729573168666398),
    (60.0, -0.09147180408906201, 0.047358952209449155),
];
