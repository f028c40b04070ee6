#![allow(dead_code)]

use std::f64::consts::PI;

use spectral_mappings::linalg::re;
use spectral_mappings::{CMat, Projector, SpectralData, SpectralDatum};

/// Closed form for the three-edge star with `λ₁₁ = a²`: `(S₁₁₀, S₁₁₁, ε₀)` at `x`.
pub fn perturbed_star(a: f64, x: f64) -> (CMat, CMat, CMat) {
    let f11 = 1.0 + (x - (2.0 * a * x).sin() / (2.0 * a)) / (4.0 * PI * a * a);
    let f22 = 1.0 - (x - x.sin()) / PI;
    let f12 = (((a - 0.5) * x).sin() / (a - 0.5) - ((a + 0.5) * x).sin() / (a + 0.5)) / (2.0 * PI * a);
    let s = (a * x).sin() / a;
    let h = 2.0 * (x / 2.0).sin();
    let d0 = f11 * f22 + f12 * f12;
    let d1 = s * f22 + f12 * h;
    let d2 = f11 * h - s * f12;
    let t = Projector::star(3);
    (
        t.matrix() * re(d1 / d0) + t.complement() * re(s),
        t.matrix() * re(d2 / d0) + t.complement() * re(h),
        t.matrix() * re((d1 * s - d2 * h) / (2.0 * PI * d0)),
    )
}

/// Spectral data of the unperturbed three-edge star: `Q ≡ 0`, `T = ones/3`, `H = 0`.
pub fn star_model_data(n_bands: usize) -> SpectralData {
    let t = Projector::star(3);
    let mut d = Vec::new();
    for n in 1..=n_bands {
        let h = n as f64 - 0.5;
        d.push(SpectralDatum {
            n,
            k: 1,
            lambda: h * h,
            alpha: t.matrix() * re(2.0 * h * h / PI),
        });
        for k in 2..=3 {
            d.push(SpectralDatum {
                n,
                k,
                lambda: (n * n) as f64,
                alpha: t.complement() * re(2.0 * (n * n) as f64 / PI),
            });
        }
    }
    SpectralData::new(3, d).unwrap()
}
