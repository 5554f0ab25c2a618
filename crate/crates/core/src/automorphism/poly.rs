//! One-variable polynomials used as shear and overshear profiles.
//!
//! The carry construction needs polynomials that vanish *exactly* (in IEEE
//! arithmetic, not merely to roundoff) at a list of pinned abscissas. A dense
//! coefficient list cannot deliver that: at the degrees we use, evaluating an
//! expanded polynomial near a root loses six or more digits to cancellation.
//! So profiles built by the library are kept in factored form
//!
//! `h(t) = scale * prod_i (t - root_i) * (t - damp_center)^damp_power`
//!
//! and evaluated as written; `t == root_i` then yields a hard zero because the
//! subtraction itself is exact. Dense coefficient lists are still accepted (a
//! hand-written word file may define its profile that way), they just offer no
//! exactness guarantee.

use crate::scalar::{cone, czero, Real, C};


#[derive(Clone, Debug, PartialEq)]
pub enum Poly<R: Real> {
    /// `scale * prod (t - root_i) * (t - damp_center)^damp_power`.
    Factored {
        scale: C<R>,
        roots: Vec<C<R>>,
        damp_center: C<R>,
        damp_power: u32,
    },
    /// `sum_k coeffs[k] * t^k`, evaluated by Horner's rule.
    Dense { coeffs: Vec<C<R>> },
}

impl<R: Real> Poly<R> {
    pub fn zero() -> Self {
        Poly::Dense { coeffs: vec![] }
    }

    pub fn degree(&self) -> usize {
        match self {
            Poly::Factored {
                roots, damp_power, ..
            } => roots.len() + *damp_power as usize,
            Poly::Dense { coeffs } => coeffs.len().saturating_sub(1),
        }
    }

    pub fn eval(&self, t: C<R>) -> C<R> {
        match self {
            Poly::Factored {
                scale,
                roots,
                damp_center,
                damp_power,
            } => {
                let mut acc = *scale;
                for r in roots {
                    acc = acc * (t - r);
                }
                if *damp_power > 0 {
                    acc = acc * (t - damp_center).powu(*damp_power);
                }
                acc
            }
            Poly::Dense { coeffs } => {
                let mut acc = czero();
                for c in coeffs.iter().rev() {
                    acc = acc * t + c;
                }
                acc
            }
        }
    }

    /// Expanded coefficient list, low degree first. For factored profiles this
    /// is derived data (the factored fields stay authoritative); it is written
    /// to word files so that other tooling can read the profile without
    /// knowing the factored encoding.
    pub fn coefficients(&self) -> Vec<C<R>> {
        match self {
            Poly::Dense { coeffs } => coeffs.clone(),
            Poly::Factored {
                scale,
                roots,
                damp_center,
                damp_power,
            } => {
                let mut c: Vec<C<R>> = vec![*scale];
                let mul_linear = |c: &mut Vec<C<R>>, r: C<R>| {
                    // multiply by (t - r)
                    let mut next = vec![czero(); c.len() + 1];
                    for (k, &ck) in c.iter().enumerate() {
                        next[k + 1] = next[k + 1] + ck;
                        next[k] = next[k] - ck * r;
                    }
                    *c = next;
                };
                for r in roots {
                    mul_linear(&mut c, *r);
                }
                for _ in 0..*damp_power {
                    mul_linear(&mut c, *damp_center);
                }
                c
            }
        }
    }

    /// Upper bound for `|h|` on the closed disc `|t - c| <= r`, using
    /// `sup |t - a| = r + |c - a|` factor by factor. Exact for a single
    /// factor, conservative for products.
    pub fn sup_bound_on_disc(&self, c: C<R>, r: R) -> R {
        match self {
            Poly::Factored {
                scale,
                roots,
                damp_center,
                damp_power,
            } => {
                let mut acc = scale.norm();
                for root in roots {
                    acc = acc * (r + (c - root).norm());
                }
                if *damp_power > 0 {
                    let f = r + (c - damp_center).norm();
                    acc = acc * f.powi(*damp_power as i32);
                }
                acc
            }
            Poly::Dense { coeffs } => {
                let big = r + c.norm();
                let mut acc = R::zero();
                let mut pw = R::one();
                for ck in coeffs {
                    acc = acc + ck.norm() * pw;
                    pw = pw * big;
                }
                acc
            }
        }
    }
}

/// Convenience constructor used across the relocation module.
pub fn factored<R: Real>(
    scale: C<R>,
    roots: Vec<C<R>>,
    damp_center: C<R>,
    damp_power: u32,
) -> Poly<R> {
    Poly::Factored {
        scale,
        roots,
        damp_center,
        damp_power,
    }
}

/// The constant-one polynomial, occasionally useful in tests.
pub fn one<R: Real>() -> Poly<R> {
    Poly::Dense { coeffs: vec![cone()] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c64;

    fn sample_factored() -> Poly<f64> {
        Poly::Factored {
            scale: c64(0.25, 0.0),
            roots: vec![c64(5.0, 0.0), c64(-1.0, 2.0)],
            damp_center: c64(0.5, 0.5),
            damp_power: 3,
        }
    }

    #[test]
    fn factored_eval_is_exactly_zero_at_roots() {
        let p = sample_factored();
        let z = p.eval(c64(5.0, 0.0));
        assert_eq!(z.re, 0.0);
        assert_eq!(z.im, 0.0);
        let z = p.eval(c64(-1.0, 2.0));
        assert_eq!(z.re, 0.0);
        assert_eq!(z.im, 0.0);
        let z = p.eval(c64(0.5, 0.5));
        assert_eq!(z.re, 0.0);
        assert_eq!(z.im, 0.0);
    }

    #[test]
    fn expansion_matches_factored_eval_away_from_roots() {
        let p = sample_factored();
        let dense = Poly::Dense {
            coeffs: p.coefficients(),
        };
        for &(re, im) in &[(0.3, -0.7), (2.0, 1.0), (-3.0, 0.1), (0.0, 0.0)] {
            let t = c64(re, im);
            let a = p.eval(t);
            let b = dense.eval(t);
            // Expanded evaluation is allowed to be sloppy near roots, but at
            // generic points the two must agree to rounding.
            assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn horner_matches_naive_powers() {
        let p: Poly<f64> = Poly::Dense {
            coeffs: vec![c64(1.0, 0.0), c64(0.0, -2.0), c64(3.0, 0.0)],
        };
        let t: crate::scalar::C<f64> = c64(1.5, -0.5);
        let naive = c64::<f64>(1.0, 0.0) + c64::<f64>(0.0, -2.0) * t + c64::<f64>(3.0, 0.0) * t * t;
        assert!((p.eval(t) - naive).norm() < 1e-14);
    }

    #[test]
    fn sup_bound_dominates_samples_on_the_disc() {
        let p = sample_factored();
        let c: crate::scalar::C<f64> = c64(1.0, -1.0);
        let r = 2.0;
        let bound = p.sup_bound_on_disc(c, r);
        for k in 0..200 {
            let th = std::f64::consts::TAU * (k as f64) / 200.0;
            let rho = r * ((k % 7) as f64 + 1.0) / 7.0;
            let t = c + c64(rho * th.cos(), rho * th.sin());
            assert!(p.eval(t).norm() <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn degree_counts_all_factors() {
        assert_eq!(sample_factored().degree(), 5);
        let d: Poly<f64> = Poly::Dense {
            coeffs: vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)],
        };
        assert_eq!(d.degree(), 2);
    }
}
