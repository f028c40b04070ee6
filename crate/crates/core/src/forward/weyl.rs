//! Weyl matrix `M(λ) = −V(S)⁻¹ V(C)` and weight matrices `α = −Res M`.

use std::f64::consts::PI;

use super::{EigenRecord, Operator};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};

#[derive(Clone, Debug)]
pub struct WeylSample {
    pub lambda: C64,
    pub m: CMat,
}

impl Operator<'_> {
    /// `(V(S), V(C))` from one integration of the `m×2m` system `[S C]`.
    fn boundary_pair(&self, lambda: C64) -> Result<(CMat, CMat, f64)> {
        let m = self.dim();
        let mut y0 = CMat::zeros(m, 2 * m);
        let mut y1 = CMat::zeros(m, 2 * m);
        for i in 0..m {
            y1[(i, i)] = linalg::re(1.0);
            y0[(i, m + i)] = linalg::re(1.0);
        }
        let (y, dy) = self.fundamental.terminal(lambda, &y0, &y1)?;
        let scale = linalg::spectral_norm(&y.columns(0, m).into_owned())
            .max(linalg::spectral_norm(&dy.columns(0, m).into_owned()))
            * (1.0 + self.h_norm);
        let vs = self.boundary_form(&y.columns(0, m).into_owned(), &dy.columns(0, m).into_owned());
        let vc = self.boundary_form(&y.columns(m, m).into_owned(), &dy.columns(m, m).into_owned());
        Ok((vs, vc, scale))
    }

    pub fn weyl(&self, lambda: C64) -> Result<WeylSample> {
        let (vs, vc, scale) = self.boundary_pair(lambda)?;
        let m = solve_weyl(lambda, vs, &vc, scale)?;
        Ok(WeylSample { lambda, m })
    }

    /// `α = −(1/2πi) ∮ M(λ) dλ` by the trapezoid rule on a circle around the
    /// eigenvalue, cross-checking the multiplicity against the winding number
    /// of `det V(S)` on the same circle.
    pub fn weight(&self, eigen: &EigenRecord) -> Result<CMat> {
        let radius = self.tol.contour_radius.min(eigen.gap / 3.0);
        self.weight_with_radius(eigen, radius)
    }

    pub fn weight_with_radius(&self, eigen: &EigenRecord, radius: f64) -> Result<CMat> {
        if !(radius > 0.0) || radius >= 0.5 * eigen.gap {
            return Err(Error::ContourClash {
                lambda: eigen.lambda,
                suggested_radius: eigen.gap / 3.0,
            });
        }
        let n = self.tol.contour_points;
        let m = self.dim();
        let mut acc = CMat::zeros(m, m);
        let mut dets = Vec::with_capacity(n);
        for j in 0..n {
            let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
            let lambda = C64::new(eigen.lambda, 0.0) + e * radius;
            let (vs, vc, scale) = self.boundary_pair(lambda)?;
            dets.push(vs.determinant());
            acc += solve_weyl(lambda, vs, &vc, scale)? * e;
        }
        let mut phase = 0.0;
        for j in 0..n {
            phase += (dets[(j + 1) % n] / dets[j]).arg();
        }
        let winding = (phase / (2.0 * PI)).round() as i64;
        let deficiency = self.rank_deficiency(eigen.lambda)?;
        if winding != deficiency as i64 || deficiency < eigen.multiplicity {
            return Err(Error::MultiplicityMismatch {
                lambda: eigen.lambda,
                rank_deficiency: deficiency,
                winding,
            });
        }
        Ok(acc * linalg::re(-radius / n as f64))
    }
}

fn solve_weyl(lambda: C64, vs: CMat, vc: &CMat, scale: f64) -> Result<CMat> {
    let s = linalg::singular_values(&vs);
    if s.last().copied().unwrap_or(0.0) <= 1e-12 * scale {
        return Err(Error::AtEigenvalue { lambda });
    }
    let lu = vs.lu();
    lu.solve(vc)
        .map(|x| -x)
        .ok_or(Error::AtEigenvalue { lambda })
}
