//! Quadrature used by the independent oracles: tanh-sinh / exp-sinh rules at
//! arbitrary precision (level doubling until stable), and float64
//! Gauss-Legendre nodes for the low-accuracy expectation oracle.

use crate::{Error, PrecisionContext, Real, Result};
use rug::ops::Pow;

/// ∫_t^∞ x^j e^{-x²} dx by the exp-sinh substitution x = t + e^{(π/2) sinh v},
/// doubling the level until two successive levels agree to context tolerance.
pub fn integrate_gaussian_tail(t: &Real, j: u32, ctx: &PrecisionContext) -> Result<Real> {
    let wp = ctx.bits + 32;
    let half_pi = {
        let mut v = Real::with_val(wp, rug::float::Constant::Pi);
        v /= 2u32;
        v
    };
    let tw = Real::with_val(wp, t);
    let fterm = |v: &Real| -> Real {
        // u = exp(half_pi * sinh v); du/dv = half_pi * cosh(v) * u
        let sh = Real::with_val(wp, v.clone().sinh());
        let ch = Real::with_val(wp, v.clone().cosh());
        let mut u = Real::with_val(wp, &half_pi * &sh);
        u = u.exp();
        let x = Real::with_val(wp, &tw + &u);
        let mut w = Real::with_val(wp, &half_pi * &ch);
        w *= &u;
        let mut val = Real::with_val(wp, &x * &x);
        val = (-val).exp();
        if j > 0 {
            val *= Real::with_val(wp, (&x).pow(j));
        }
        val *= &w;
        val
    };
    let cut = Real::with_val(wp, 2).pow(-(wp as i32));
    let mut prev: Option<Real> = None;
    for level in 2..=12u32 {
        let h = Real::with_val(wp, 2).pow(-(level as i32));
        let mut sum = fterm(&Real::new(wp));
        for sign in [1i32, -1] {
            let mut k = 1u64;
            loop {
                let mut v = Real::with_val(wp, k);
                v *= &h;
                if sign < 0 {
                    v = -v;
                }
                let term = fterm(&v);
                let tiny = term.clone().abs() < cut && k > 8;
                sum += &term;
                k += 1;
                if tiny || k > 2_000_000 {
                    break;
                }
            }
        }
        sum *= &h;
        if let Some(p) = &prev {
            let mut diff = Real::with_val(wp, &sum - p);
            diff = diff.abs();
            let mut bound = ctx.tol();
            bound *= Real::with_val(wp, sum.clone().abs().max(&Real::with_val(wp, 1e-300)));
            if diff < bound {
                return Ok(Real::with_val(ctx.bits, sum));
            }
        }
        prev = Some(sum);
    }
    Err(Error::QuadratureNonConvergent(format!(
        "gaussian tail at t = {}, j = {j}",
        t.to_f64()
    )))
}

/// ∫_a^b f(x) dx by tanh-sinh, doubling the level until stable.
pub fn integrate_tanh_sinh<F>(mut f: F, a: &Real, b: &Real, ctx: &PrecisionContext) -> Result<Real>
where
    F: FnMut(&Real) -> Real,
{
    let wp = ctx.bits + 32;
    let half_pi = {
        let mut v = Real::with_val(wp, rug::float::Constant::Pi);
        v /= 2u32;
        v
    };
    let mid = Real::with_val(wp, a + b) / 2u32;
    let rad = Real::with_val(wp, b - a) / 2u32;
    let cut = Real::with_val(wp, 2).pow(-(wp as i32));
    let mut prev: Option<Real> = None;
    for level in 2..=12u32 {
        let h = Real::with_val(wp, 2).pow(-(level as i32));
        let mut sum = Real::new(wp);
        let mut eval = |v: &Real, sum: &mut Real| -> bool {
            let sh = Real::with_val(wp, v.clone().sinh());
            let ch = Real::with_val(wp, v.clone().cosh());
            let arg = Real::with_val(wp, &half_pi * &sh);
            let th = arg.clone().tanh();
            let sech = arg.cosh().recip();
            let mut w = Real::with_val(wp, &sech * &sech);
            w *= &half_pi;
            w *= &ch;
            w *= &rad;
            let mut x = Real::with_val(wp, &rad * &th);
            x += &mid;
            let mut term = f(&x);
            term *= &w;
            let tiny = term.clone().abs() < cut;
            *sum += &term;
            tiny
        };
        eval(&Real::new(wp), &mut sum);
        for sign in [1i32, -1] {
            let mut k = 1u64;
            loop {
                let mut v = Real::with_val(wp, k);
                v *= &h;
                if sign < 0 {
                    v = -v;
                }
                let tiny = eval(&v, &mut sum);
                k += 1;
                if (tiny && k > 8) || k > 2_000_000 {
                    break;
                }
            }
        }
        sum *= &h;
        if let Some(p) = &prev {
            let mut diff = Real::with_val(wp, &sum - p);
            diff = diff.abs();
            let mut bound = ctx.tol();
            bound *= Real::with_val(wp, sum.clone().abs().max(&Real::with_val(wp, 1e-300)));
            if diff < bound {
                return Ok(Real::with_val(ctx.bits, sum));
            }
        }
        prev = Some(sum);
    }
    Err(Error::QuadratureNonConvergent("tanh-sinh".into()))
}

/// Gauss-Legendre nodes and weights on [-1, 1] in f64 (Newton on P_m).
pub fn gauss_legendre_f64(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_deriv(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_integral_matches_closed_forms() {
        let ctx = PrecisionContext::new(256);
        // ∫_0^∞ e^{-x²} = √π/2 ; ∫_0^∞ x e^{-x²} = 1/2
        let i0 = integrate_gaussian_tail(&ctx.real(0.0), 0, &ctx).unwrap();
        let mut want = ctx.sqrt_pi();
        want /= 2u32;
        let mut d = Real::with_val(ctx.bits, &i0 - &want);
        d = d.abs();
        assert!(d < ctx.tol());
        let i1 = integrate_gaussian_tail(&ctx.real(0.0), 1, &ctx).unwrap();
        let mut d = i1;
        d -= 0.5f64;
        assert!(d.abs() < ctx.tol());
    }

    #[test]
    fn tanh_sinh_polynomial() {
        let ctx = PrecisionContext::new(192);
        // ∫_0^2 x³ dx = 4
        let v = integrate_tanh_sinh(
            |x| {
                let sq = Real::with_val(ctx.bits + 32, x * x);
                Real::with_val(ctx.bits + 32, &sq * x)
            },
            &ctx.real(0.0),
            &ctx.real(2.0),
            &ctx,
        )
        .unwrap();
        let mut d = v;
        d -= 4u32;
        assert!(d.abs() < ctx.tol());
    }

    #[test]
    fn gauss_legendre_integrates_smooth() {
        let (x, w) = gauss_legendre_f64(48);
        // ∫_{-1}^{1} e^x dx = e - 1/e
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.exp()).sum();
        assert!((s - (1f64.exp() - (-1f64).exp())).abs() < 1e-14);
    }
}
