//! Ladder-operator auxiliary quantities for one and two jumps.
//!
//! `R_n` and `r_n` are the residues at the jump point(s) of the ladder
//! coefficient functions `A_n(z)`, `B_n(z)`:
//!
//! ```text
//! R_n = B1 P_n²(t1) e^{-t1²} / h_n,     r_n = B1 P_n(t1) P_{n-1}(t1) e^{-t1²} / h_{n-1},
//! ```
//!
//! with the two-jump analogues `R_{n,i}`, `r_{n,i}`.  They are computed both
//! from these definitions and from the string relations `R_n = 2 α_n`,
//! `r_n = 2 β_n - n`; the two routes must agree to tolerance — that agreement
//! is itself the primary correctness check of the whole construction.
//! `σ_n = -Σ_{j<n} R_j = 2 p(n)` is the logarithmic derivative of `D_n`.

use crate::numerics::PrecisionContext;
use crate::ortho::{eval_poly, OrthoSystem};
use crate::{Error, Real, Result};
use rug::Assign;

/// Which route produced an [`AuxSingle`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuxSource {
    FromDefinitions,
    FromRecurrence,
}

/// Single-jump auxiliary quantities up to `n_max`.
///
/// `res_a[n]` is the paper's `R_n(t1)`, `res_b[n]` is `r_n(t1)`
/// (`res_b[0] = 0`), `sigma[n]` is `σ_n(t1)` with `sigma[0] = 0`.
#[derive(Clone, Debug)]
pub struct AuxSingle {
    pub t1: Real,
    pub n_max: usize,
    pub res_a: Vec<Real>,
    pub res_b: Vec<Real>,
    pub sigma: Vec<Real>,
    pub source: AuxSource,
}

/// Two-jump auxiliary quantities (`R_{n,1}`, `R_{n,2}`, `r_{n,1}`, `r_{n,2}`,
/// `σ_n(t1,t2)`).
#[derive(Clone, Debug)]
pub struct AuxDouble {
    pub t1: Real,
    pub t2: Real,
    pub n_max: usize,
    pub res_a1: Vec<Real>,
    pub res_a2: Vec<Real>,
    pub res_b1: Vec<Real>,
    pub res_b2: Vec<Real>,
    pub sigma: Vec<Real>,
}

/// Per-jump factors `(B_i e^{-t_i²}, P_n(t_i) values 0..=n_max)`.
fn jump_column(sys: &OrthoSystem, b: &Real, t: &Real) -> (Real, Vec<Real>) {
    let bits = sys.ctx.bits;
    let mut scale = Real::with_val(bits, t * t);
    scale = (-scale).exp();
    scale *= b;
    // P_0..P_{n_max} at t via one recurrence sweep
    let mut vals = Vec::with_capacity(sys.n_max + 1);
    let mut pm = Real::new(bits);
    let mut p = Real::with_val(bits, 1);
    let mut scratch = Real::new(bits);
    vals.push(p.clone());
    for k in 0..sys.n_max {
        let mut next = Real::with_val(bits, t - &sys.alpha[k]);
        next *= &p;
        if k > 0 {
            scratch.assign(&sys.beta[k] * &pm);
            next -= &scratch;
        }
        pm = std::mem::replace(&mut p, next);
        vals.push(p.clone());
    }
    (scale, vals)
}

fn res_from_defs(sys: &OrthoSystem, b: &Real, t: &Real) -> (Vec<Real>, Vec<Real>) {
    let bits = sys.ctx.bits;
    let (scale, pv) = jump_column(sys, b, t);
    let mut res_a = Vec::with_capacity(sys.n_max + 1);
    let mut res_b = vec![Real::new(bits)];
    for n in 0..=sys.n_max {
        let mut ra = Real::with_val(bits, &pv[n] * &pv[n]);
        ra *= &scale;
        ra /= &sys.h[n];
        res_a.push(ra);
        if n >= 1 {
            let mut rb = Real::with_val(bits, &pv[n] * &pv[n - 1]);
            rb *= &scale;
            rb /= &sys.h[n - 1];
            res_b.push(rb);
        }
    }
    (res_a, res_b)
}

fn sigma_from_p1(sys: &OrthoSystem) -> Vec<Real> {
    (0..=sys.n_max)
        .map(|n| {
            let mut v = sys.p1[n].clone();
            v *= 2u32;
            v
        })
        .collect()
}

impl AuxSingle {
    /// `R_n`, `r_n` by polynomial evaluation at the jump; `σ_n` primarily from
    /// `2 p(n)` with the partial-sum route `-Σ R_j` required to agree to
    /// tolerance (disagreement is a hard error).
    pub fn from_definitions(sys: &OrthoSystem) -> Result<Self> {
        if !sys.spec.single_jump() {
            return Err(Error::SingleJumpRequired);
        }
        let (res_a, res_b) = res_from_defs(sys, &sys.spec.b1, &sys.spec.t1);
        let sigma = sigma_from_p1(sys);
        let aux = Self {
            t1: sys.spec.t1.clone(),
            n_max: sys.n_max,
            res_a,
            res_b,
            sigma,
            source: AuxSource::FromDefinitions,
        };
        aux.check_sigma_routes(sys)?;
        Ok(aux)
    }

    /// `R_n = 2 α_n`, `r_n = 2 β_n - n`, `σ_n` as in `from_definitions`.
    pub fn from_recurrence(sys: &OrthoSystem) -> Result<Self> {
        if !sys.spec.single_jump() {
            return Err(Error::SingleJumpRequired);
        }
        let bits = sys.ctx.bits;
        let res_a = sys
            .alpha
            .iter()
            .map(|a| {
                let mut v = a.clone();
                v *= 2u32;
                v
            })
            .collect();
        let res_b = (0..=sys.n_max)
            .map(|n| {
                let mut v = sys.beta[n].clone();
                v *= 2u32;
                v -= Real::with_val(bits, n as u64);
                v
            })
            .collect();
        Ok(Self {
            t1: sys.spec.t1.clone(),
            n_max: sys.n_max,
            res_a,
            res_b,
            sigma: sigma_from_p1(sys),
            source: AuxSource::FromRecurrence,
        })
    }

    /// `σ_n = 2 p(n)` against `σ_n = -Σ_{j<n} R_j`, to tolerance.
    fn check_sigma_routes(&self, sys: &OrthoSystem) -> Result<()> {
        let bits = sys.ctx.bits;
        let tol = sys.ctx.tol();
        let mut partial = Real::new(bits);
        for n in 0..=self.n_max {
            let mut diff = Real::with_val(bits, &self.sigma[n] - &partial);
            diff = diff.abs();
            let mut scale = Real::with_val(bits, self.sigma[n].clone().abs());
            scale.assign(scale.clone().max(&Real::with_val(bits, 1)));
            diff /= &scale;
            if !(diff < tol) {
                return Err(Error::ConsistencyFailure(format!(
                    "sigma routes disagree at n = {n}: rel = {:e}",
                    diff.to_f64()
                )));
            }
            partial -= &self.res_a[n];
        }
        Ok(())
    }
}

impl AuxDouble {
    /// Two-jump auxiliaries from the defining formulas.  Works for `B2 = 0`
    /// too (then `R_{n,2} = r_{n,2} = 0` exactly and every quantity reduces
    /// bit-for-bit to the single-jump one).
    pub fn from_definitions(sys: &OrthoSystem) -> Result<Self> {
        let bits = sys.ctx.bits;
        let (res_a1, res_b1) = res_from_defs(sys, &sys.spec.b1, &sys.spec.t1);
        let (res_a2, res_b2) = if sys.spec.b2.is_zero() {
            (
                vec![Real::new(bits); sys.n_max + 1],
                vec![Real::new(bits); sys.n_max + 1],
            )
        } else {
            res_from_defs(sys, &sys.spec.b2, &sys.spec.t2)
        };
        Ok(Self {
            t1: sys.spec.t1.clone(),
            t2: sys.spec.t2.clone(),
            n_max: sys.n_max,
            res_a1,
            res_a2,
            res_b1,
            res_b2,
            sigma: sigma_from_p1(sys),
        })
    }
}

/// The paper's exact first t-derivatives for a single-jump system:
/// `h_n' = -R_n h_n`, `p(n)' = r_n`, `σ_n' = 2 r_n`,
/// `β_n' = β_n (R_{n-1} - R_n)`.
#[derive(Clone, Debug)]
pub struct DerivBundle {
    pub dh: Vec<Real>,
    pub dp: Vec<Real>,
    pub dsigma: Vec<Real>,
    pub dbeta: Vec<Real>,
}

pub fn exact_t_derivatives(sys: &OrthoSystem, aux: &AuxSingle) -> DerivBundle {
    let bits = sys.ctx.bits;
    let top = aux.n_max;
    let mut dh = Vec::with_capacity(top + 1);
    let mut dbeta = vec![Real::new(bits)];
    for n in 0..=top {
        let mut v = Real::with_val(bits, &aux.res_a[n] * &sys.h[n]);
        v = -v;
        dh.push(v);
        if n >= 1 {
            let mut v = Real::with_val(bits, &aux.res_a[n - 1] - &aux.res_a[n]);
            v *= &sys.beta[n];
            dbeta.push(v);
        }
    }
    let dp = aux.res_b.clone();
    let dsigma = aux
        .res_b
        .iter()
        .map(|r| {
            let mut v = r.clone();
            v *= 2u32;
            v
        })
        .collect();
    DerivBundle {
        dh,
        dp,
        dsigma,
        dbeta,
    }
}

/// Exact first partials for a two-jump system, per jump:
/// `∂_{t_i} ln h_n = -R_{n,i}`, `∂_{t_i} p(n) = r_{n,i}`,
/// `∂_{t_i} σ_n = 2 r_{n,i}`, `∂_{t_i} β_n = β_n (R_{n-1,i} - R_{n,i})`.
#[derive(Clone, Debug)]
pub struct DerivBundleDouble {
    pub dh: [Vec<Real>; 2],
    pub dp: [Vec<Real>; 2],
    pub dsigma: [Vec<Real>; 2],
    pub dbeta: [Vec<Real>; 2],
}

pub fn exact_t_derivatives_double(sys: &OrthoSystem, aux: &AuxDouble) -> DerivBundleDouble {
    let bits = sys.ctx.bits;
    let top = aux.n_max;
    let mut out = DerivBundleDouble {
        dh: [Vec::new(), Vec::new()],
        dp: [Vec::new(), Vec::new()],
        dsigma: [Vec::new(), Vec::new()],
        dbeta: [vec![Real::new(bits)], vec![Real::new(bits)]],
    };
    for (i, (ra, rb)) in [(&aux.res_a1, &aux.res_b1), (&aux.res_a2, &aux.res_b2)]
        .into_iter()
        .enumerate()
    {
        for n in 0..=top {
            let mut v = Real::with_val(bits, &ra[n] * &sys.h[n]);
            v = -v;
            out.dh[i].push(v);
            if n >= 1 {
                let mut v = Real::with_val(bits, &ra[n - 1] - &ra[n]);
                v *= &sys.beta[n];
                out.dbeta[i].push(v);
            }
            out.dp[i].push(rb[n].clone());
            let mut s = rb[n].clone();
            s *= 2u32;
            out.dsigma[i].push(s);
        }
    }
    out
}

/// Convenience: build system + definition-route aux for a single-jump spec.
pub fn single_aux(
    spec: &crate::WeightSpec,
    n_max: usize,
    ctx: &PrecisionContext,
) -> Result<(OrthoSystem, AuxSingle)> {
    let sys = crate::ortho::build_system(spec, n_max, ctx)?;
    let aux = AuxSingle::from_definitions(&sys)?;
    Ok((sys, aux))
}

/// Calibration point used by tests: `P_1(t1)` from the system matches
/// `t1 - α_0`.
pub fn p1_at_jump(sys: &OrthoSystem) -> Result<Real> {
    Ok(eval_poly(sys, 1, &sys.spec.t1)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{fd_derivative, FdOrder};
    use crate::ortho::build_system;
    use crate::WeightSpec;

    fn rel_or_abs_err(a: &Real, b: &Real) -> Real {
        let p = a.prec();
        let mut d = Real::with_val(p, a - b);
        d = d.abs();
        let den = Real::with_val(p, b.clone().abs()).max(&Real::with_val(p, 1));
        d / den
    }

    #[test]
    fn pure_gaussian_all_zero() {
        let ctx = PrecisionContext::policy(8);
        let spec = WeightSpec::gaussian(1.0, ctx.bits).unwrap();
        let sys = build_system(&spec, 8, &ctx).unwrap();
        let aux = AuxSingle::from_definitions(&sys).unwrap();
        for n in 0..=8usize {
            assert!(aux.res_a[n].is_zero());
            assert!(aux.res_b[n].is_zero());
            assert!(aux.sigma[n].clone().abs() < ctx.tol());
        }
        let rec = AuxSingle::from_recurrence(&sys).unwrap();
        for n in 0..=8usize {
            // r_n = 2 (n/2) - n = 0
            assert!(rec.res_b[n].clone().abs() < ctx.tol());
        }
    }

    #[test]
    fn jump_small_n_values() {
        let ctx = PrecisionContext::policy(4);
        let spec = WeightSpec::single(1.0, 1.0, 0.0, ctx.bits).unwrap();
        let sys = build_system(&spec, 4, &ctx).unwrap();
        let aux = AuxSingle::from_definitions(&sys).unwrap();
        // R_0 = 1/(3√π/2) = 2/(3√π)
        let mut want = ctx.sqrt_pi();
        want *= 3u32;
        want = want.recip();
        want *= 2u32;
        assert!(rel_or_abs_err(&aux.res_a[0], &want) < ctx.tol());
        // r_1 = P_1(0) P_0(0)/h_0 = (-1/(3√π)) / (3√π/2) = -2/(9π)
        let mut nine_pi = ctx.pi();
        nine_pi *= 9u32;
        let mut want = nine_pi.recip();
        want *= 2u32;
        want = -want;
        assert!(rel_or_abs_err(&aux.res_b[1], &want) < ctx.tol());
        // recurrence route R_0 = 2 α_0 = 2/(3√π) agrees
        let rec = AuxSingle::from_recurrence(&sys).unwrap();
        assert!(rel_or_abs_err(&rec.res_a[0], &aux.res_a[0]) < ctx.tol());
        // r_1 = 2 β_1 - 1 = -2/(9π)
        assert!(rel_or_abs_err(&rec.res_b[1], &aux.res_b[1]) < ctx.tol());
    }

    #[test]
    fn route_agreement_componentwise() {
        let ctx = PrecisionContext::policy(24);
        for (a, b1, t1) in [(1.0, 1.0, 0.0), (1.0, -0.5, 0.7), (0.8, 0.4, -1.2)] {
            let spec = WeightSpec::single(a, b1, t1, ctx.bits).unwrap();
            let sys = build_system(&spec, 24, &ctx).unwrap();
            let d = AuxSingle::from_definitions(&sys).unwrap();
            let r = AuxSingle::from_recurrence(&sys).unwrap();
            let tol = ctx.tol();
            for n in 0..=24usize {
                assert!(
                    rel_or_abs_err(&d.res_a[n], &r.res_a[n]) < tol,
                    "R mismatch n={n} ({a},{b1},{t1})"
                );
                assert!(
                    rel_or_abs_err(&d.res_b[n], &r.res_b[n]) < tol,
                    "r mismatch n={n} ({a},{b1},{t1})"
                );
            }
        }
    }

    #[test]
    fn sign_of_res_a_matches_b1() {
        let ctx = PrecisionContext::policy(12);
        for b1 in [0.5, -0.5] {
            let spec = WeightSpec::single(1.0, b1, 0.3, ctx.bits).unwrap();
            let sys = build_system(&spec, 12, &ctx).unwrap();
            let aux = AuxSingle::from_definitions(&sys).unwrap();
            for n in 0..=12usize {
                if !aux.res_a[n].is_zero() {
                    assert_eq!(aux.res_a[n].is_sign_positive(), b1 > 0.0, "n={n}");
                }
            }
        }
    }

    #[test]
    fn two_jump_sum_rule_and_reduction() {
        let ctx = PrecisionContext::policy(10);
        let mu = 0.3f64;
        let spec = WeightSpec::double(
            mu.exp(),
            1.0 - mu.exp(),
            (-mu).exp() - 1.0,
            -0.5,
            0.7,
            ctx.bits,
        )
        .unwrap();
        let sys = build_system(&spec, 10, &ctx).unwrap();
        let aux = AuxDouble::from_definitions(&sys).unwrap();
        let tol = ctx.tol();
        for n in 0..=10usize {
            // R_{n,1} + R_{n,2} = 2 α_n
            let mut lhs = Real::with_val(ctx.bits, &aux.res_a1[n] + &aux.res_a2[n]);
            let mut rhs = sys.alpha[n].clone();
            rhs *= 2u32;
            lhs -= &rhs;
            assert!(lhs.abs() < tol, "sum rule n={n}");
        }
        // B2 = 0 reduction equals the single-jump quantities bit for bit
        let s1 = WeightSpec::single(1.0, 0.6, 0.4, ctx.bits).unwrap();
        let sys1 = build_system(&s1, 6, &ctx).unwrap();
        let d2 = AuxDouble::from_definitions(&sys1).unwrap();
        let d1 = AuxSingle::from_definitions(&sys1).unwrap();
        for n in 0..=6usize {
            assert_eq!(d2.res_a1[n], d1.res_a[n]);
            assert_eq!(d2.res_b1[n], d1.res_b[n]);
            assert!(d2.res_a2[n].is_zero() && d2.res_b2[n].is_zero());
            assert_eq!(d2.sigma[n], d1.sigma[n]);
        }
    }

    #[test]
    fn symmetric_two_jump_gives_zero_sigma() {
        let ctx = PrecisionContext::policy(8);
        let b = 0.45f64;
        let spec = WeightSpec::double(1.0, b, -b, -0.8, 0.8, ctx.bits).unwrap();
        let sys = build_system(&spec, 8, &ctx).unwrap();
        let aux = AuxDouble::from_definitions(&sys).unwrap();
        let tol = ctx.tol();
        for n in 0..=8usize {
            assert!(aux.sigma[n].clone().abs() < tol, "sigma[{n}] != 0");
            let mut s = Real::with_val(ctx.bits, &aux.res_a1[n] + &aux.res_a2[n]);
            s = s.abs();
            assert!(s < tol, "R1+R2 != 0 at n={n}");
        }
    }

    #[test]
    fn exact_derivative_examples() {
        let ctx = PrecisionContext::policy(4);
        let spec = WeightSpec::single(1.0, 1.0, 0.0, ctx.bits).unwrap();
        let sys = build_system(&spec, 4, &ctx).unwrap();
        let aux = AuxSingle::from_definitions(&sys).unwrap();
        let der = exact_t_derivatives(&sys, &aux);
        // h_0'(0) = -B1 P_0² e^0 = -1
        let mut d = der.dh[0].clone();
        d += 1u32;
        assert!(d.abs() < ctx.tol());
        // σ_1'(0) = 2 r_1 = -4/(9π)
        let mut want = ctx.pi();
        want *= 9u32;
        want = want.recip();
        want *= 4u32;
        want = -want;
        assert!(rel_or_abs_err(&der.dsigma[1], &want) < ctx.tol());
    }

    #[test]
    fn fd_of_ln_h_matches_minus_res_a() {
        let ctx = PrecisionContext::policy(6);
        let spec = WeightSpec::single(1.0, 0.8, 0.25, ctx.bits).unwrap();
        let sys = build_system(&spec, 6, &ctx).unwrap();
        let aux = AuxSingle::from_definitions(&sys).unwrap();
        for n in [2usize, 5] {
            let d = fd_derivative(
                |t| {
                    let s = build_system(&spec.at_t1(t), n, &ctx)?;
                    Ok(Real::with_val(ctx.bits, s.h[n].ln_ref()))
                },
                &spec.t1,
                FdOrder::First,
                &ctx,
            )
            .unwrap();
            let mut want = aux.res_a[n].clone();
            want = -want;
            let mut diff = Real::with_val(ctx.bits, &d - &want);
            diff = diff.abs();
            assert!(diff < ctx.tol_fd1(), "(ln h_{n})' != -R_{n}");
        }
    }
}
