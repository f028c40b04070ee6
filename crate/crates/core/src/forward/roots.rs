//! Eigenvalue location: argument-principle counts on circles in the λ-plane,
//! bisection of clusters and polishing on the singular values of `V(S(λ))`.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::Operator;
use crate::error::{Error, Result};
use crate::linalg::{self, C64};

/// One (possibly multiple) eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenRecord {
    pub lambda: f64,
    pub multiplicity: usize,
    /// Band of the first occupied slot.
    pub band: usize,
    /// Occupied `(n, k)` slots in lexicographic order.
    pub slots: Vec<(usize, usize)>,
    /// Distance to the nearest other eigenvalue.
    pub gap: f64,
}

const MAX_PHASE_STEP: f64 = PI / 4.0;
const MAX_REFINE: u32 = 16;

impl Operator<'_> {
    /// Number of eigenvalues inside the circle with diameter `[a, b]` on the real axis.
    pub fn count_in(&self, a: f64, b: f64) -> Result<usize> {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let at = |theta: f64| -> Result<C64> {
            self.characteristic(C64::new(c, 0.0) + C64::from_polar(r, theta))
        };
        let n0 = 32;
        let mut samples = Vec::with_capacity(n0 + 1);
        for j in 0..n0 {
            let th = 2.0 * PI * j as f64 / n0 as f64;
            samples.push((th, at(th)?));
        }
        samples.push((2.0 * PI, samples[0].1));
        let clash = |e: Error| match e {
            Error::ContourClash { .. } => Error::ContourClash {
                lambda: c,
                suggested_radius: r / 2.0,
            },
            other => other,
        };
        let mut total = 0.0;
        for w in samples.windows(2) {
            total += self.phase_change(&at, w[0], w[1], 0).map_err(clash)?;
        }
        let winding = total / (2.0 * PI);
        let rounded = winding.round();
        if (winding - rounded).abs() > 0.2 || rounded < 0.0 {
            return Err(Error::ContourClash {
                lambda: c,
                suggested_radius: r / 2.0,
            });
        }
        Ok(rounded as usize)
    }

    fn phase_change(
        &self,
        at: &dyn Fn(f64) -> Result<C64>,
        (t0, d0): (f64, C64),
        (t1, d1): (f64, C64),
        depth: u32,
    ) -> Result<f64> {
        let step = (d1 / d0).arg();
        if step.abs() <= MAX_PHASE_STEP {
            return Ok(step);
        }
        if depth >= MAX_REFINE {
            return Err(Error::ContourClash {
                lambda: f64::NAN,
                suggested_radius: f64::NAN,
            });
        }
        let tm = 0.5 * (t0 + t1);
        let dm = at(tm)?;
        Ok(self.phase_change(at, (t0, d0), (tm, dm), depth + 1)?
            + self.phase_change(at, (tm, dm), (t1, d1), depth + 1)?)
    }

    /// Singular values of `V(S(λ))` relative to the size of the terminal data, ascending.
    pub(crate) fn relative_singular_values(&self, lambda: f64) -> Result<Vec<f64>> {
        let (v, scale) = self.vs_scaled(C64::new(lambda, 0.0))?;
        let mut s = linalg::singular_values(&v);
        s.reverse();
        Ok(s.into_iter().map(|x| x / scale).collect())
    }

    /// `m − rank V(S(λ))`.
    pub fn rank_deficiency(&self, lambda: f64) -> Result<usize> {
        let s = self.relative_singular_values(lambda)?;
        Ok(s.iter().filter(|&&x| x < self.tol.rank).count())
    }

    /// Moves a window boundary off the spectrum.
    fn clean_boundary(&self, lambda: f64, width: f64) -> Result<f64> {
        let mut x = lambda;
        for k in 1..=16 {
            if self.relative_singular_values(x)?[0] >= 1e-4 {
                return Ok(x);
            }
            let shift = width * 0.03 * k as f64;
            x = if k % 2 == 1 { lambda + shift } else { lambda - shift };
        }
        Ok(x)
    }

    /// Minimises the `c`-th smallest relative singular value on `[a, b]`.
    fn polish(&self, a: f64, b: f64, c: usize) -> Result<(f64, f64)> {
        let f = |x: f64| -> Result<f64> { Ok(self.relative_singular_values(x)?[c - 1]) };
        let k = 24;
        let xs: Vec<f64> = (0..=k).map(|i| a + (b - a) * i as f64 / k as f64).collect();
        let vals = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        let best = (0..=k).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
        let (mut lo, mut hi) = (xs[best.saturating_sub(1)], xs[(best + 1).min(k)]);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (f(x1)?, f(x2)?);
        let scale = 1.0 + 0.5 * (a.abs() + b.abs());
        let target = (self.tol.root * 1e-2 * scale.sqrt()).max(1e-15 * scale);
        while hi - lo > target {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = f(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = f(x2)?;
            }
        }
        let (x, v) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
        Ok((x, v))
    }

    /// All eigenvalues in `(a, b)`, known to number `count` with multiplicity.
    fn locate(&self, a: f64, b: f64, count: usize, depth: u32) -> Result<Vec<(f64, usize)>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        let (x, _) = self.polish(a, b, count)?;
        if self.rank_deficiency(x)? == count {
            return Ok(vec![(x, count)]);
        }
        if depth > 60 || b - a < 1e-12 * (1.0 + a.abs()) {
            return Err(Error::BracketExhaustion {
                band: 0,
                found: 0,
                expected: count,
            });
        }
        let mid = self.clean_boundary(0.5 * (a + b), b - a)?;
        let left = self.count_in(a, mid)?;
        if left > count {
            return Err(Error::BracketExhaustion {
                band: 0,
                found: left,
                expected: count,
            });
        }
        let mut out = self.locate(a, mid, left, depth + 1)?;
        out.extend(self.locate(mid, b, count - left, depth + 1)?);
        Ok(out)
    }

    /// The lowest `n_max · m` eigenvalues grouped into records.
    pub fn eigenvalues(&self, n_max: usize) -> Result<Vec<EigenRecord>> {
        let m = self.dim();
        let needed = n_max * m;
        let lower = self.lower;
        // One extra band provides the gap above the last requested eigenvalue.
        let wanted = needed + m;

        let mut edges = vec![lower];
        let mut j = 1usize;
        let mut total = 0usize;
        let mut roots: Vec<(f64, usize)> = Vec::new();
        let mut processed = 0usize;
        let limit_rho = n_max as f64 + 8.0 + lower.max(0.0).sqrt();
        while total < wanted {
            let batch_end = (j + 8).max(2 * (n_max + 2));
            while j < batch_end {
                let rho = 0.5 * j as f64 + 0.25;
                j += 1;
                let lam = rho * rho;
                if lam <= *edges.last().unwrap_or(&lower) + 1e-9 {
                    continue;
                }
                let width = lam - edges.last().copied().unwrap_or(lower);
                edges.push(self.clean_boundary(lam, width.min(rho))?);
            }
            let new: Vec<(f64, f64)> = edges[processed..]
                .windows(2)
                .map(|w| (w[0], w[1]))
                .collect();
            let c = new
                .par_iter()
                .map(|&(a, b)| self.count_in(a, b))
                .collect::<Result<Vec<_>>>()?;
            let found = new
                .par_iter()
                .zip(&c)
                .map(|(&(a, b), &c)| self.locate(a, b, c, 0))
                .collect::<Vec<_>>();
            for (r, &c) in found.into_iter().zip(&c) {
                let r = r.map_err(|e| match e {
                    Error::BracketExhaustion { found, .. } => Error::BracketExhaustion {
                        band: total / m + 1,
                        found,
                        expected: c,
                    },
                    other => other,
                })?;
                total += c;
                roots.extend(r);
            }
            processed = edges.len() - 1;
            if total < wanted && (0.5 * j as f64) > limit_rho {
                return Err(Error::BracketExhaustion {
                    band: total / m + 1,
                    found: total % m,
                    expected: m,
                });
            }
        }
        roots.sort_by(|x, y| x.0.total_cmp(&y.0));

        let mut records = Vec::new();
        let mut slot = 0usize;
        for (i, &(lam, mult)) in roots.iter().enumerate() {
            if slot >= needed {
                break;
            }
            let prev = if i > 0 { lam - roots[i - 1].0 } else { f64::INFINITY };
            let next = roots.get(i + 1).map_or(f64::INFINITY, |r| r.0 - lam);
            let take = mult.min(needed - slot);
            let slots: Vec<(usize, usize)> =
                (slot..slot + take).map(|s| (s / m + 1, s % m + 1)).collect();
            records.push(EigenRecord {
                lambda: lam,
                multiplicity: take,
                band: slots[0].0,
                slots,
                gap: prev.min(next),
            });
            slot += mult;
        }
        Ok(records)
    }
}
