//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::path::PathBuf;

/// Lanczos approximation (g = 7, 9 terms), written out here rather than
/// borrowed from the library's dependency.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Textbook shifted Gamma density with location -1.
pub fn gamma_pdf(x: f64, alpha: f64, beta: f64) -> f64 {
    let z = (x + 1.0) / beta;
    if z <= 0.0 {
        return 0.0;
    }
    (z.powf(alpha - 1.0) * (-z).exp()) / (beta * ln_gamma(alpha).exp())
}

pub fn grid() -> Vec<f64> {
    (0..=40)
        .map(|i| -1.0 + i as f64 * 0.05)
        .map(|x: f64| (x * 20.0).round() / 20.0)
        .collect()
}

/// Grid argmax, ties to the larger x.
pub fn grid_argmax(alpha: f64, beta: f64) -> f64 {
    let mut best_x = -1.0;
    let mut best_g = f64::NEG_INFINITY;
    for x in grid() {
        let g = gamma_pdf(x, alpha, beta);
        if g >= best_g {
            best_g = g;
            best_x = x;
        }
    }
    best_x
}

/// Density-weighted harm over x < 0, unscaled.
pub fn harm_scan(alpha: f64, beta: f64) -> f64 {
    grid()
        .into_iter()
        .filter(|x| *x < 0.0)
        .map(|x| gamma_pdf(x, alpha, beta) * -x)
        .fold(0.0, f64::max)
}

pub fn shape(eps: u8) -> f64 {
    match eps {
        1 => 10.0,
        2 => 4.5,
        3 => 1.65,
        _ => panic!("eps"),
    }
}

pub fn scale(dose: f64) -> f64 {
    (-2.65 - dose / 2.0).exp() + 0.01
}

pub fn risk_threshold(c_rp: f64) -> f64 {
    ((c_rp / 4.17).exp() - 1.0) / 10.0
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn test_data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}
