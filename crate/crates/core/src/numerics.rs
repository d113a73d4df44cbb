//! Precision bookkeeping, the complementary error function at arbitrary
//! precision, and the Richardson-extrapolated finite-difference derivative
//! used as an independent oracle by the identity checks.

use crate::{Error, Real, Result};
use rug::float::Constant;
use rug::ops::Pow;
use rug::Assign;

/// Binary working precision plus the decimal guard used when deriving
/// tolerances from it.
///
/// The derived tolerance is `tol = 10^-(0.3010 * bits - guard_digits)`:
/// `guard_digits` is the number of decimal digits written off to accumulated
/// roundoff in the computation chain the context serves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    pub bits: u32,
    pub guard_digits: u32,
}

/// Flat guard for plain scalar work (special functions, quadrature).
pub const DEFAULT_GUARD_DIGITS: u32 = 12;

impl PrecisionContext {
    /// Context with the default 12-digit guard.  `bits` is clamped to >= 128.
    pub fn new(bits: u32) -> Self {
        Self {
            bits: bits.max(128),
            guard_digits: DEFAULT_GUARD_DIGITS,
        }
    }

    pub fn with_guard(bits: u32, guard_digits: u32) -> Self {
        Self {
            bits: bits.max(128),
            guard_digits,
        }
    }

    /// Policy precision for an orthogonal-system build up to `n_max`.
    ///
    /// Bits scale as `max(256, 10 n_max)`.  The guard scales with `n_max`
    /// because a Hankel/Cholesky chain of length n loses ~0.5 decimal digits
    /// per step (measured; both the raw-moment and modified-moment routes),
    /// so a flat guard cannot absorb it. 0.75 digits/step keeps ~50% margin.
    pub fn policy(n_max: usize) -> Self {
        Self {
            bits: (10 * n_max as u32).max(256),
            guard_digits: DEFAULT_GUARD_DIGITS + (3 * n_max as u32).div_ceil(4),
        }
    }

    /// Same bit policy as [`PrecisionContext::policy`] but with an explicit
    /// bit count (still n-aware in the guard).
    pub fn with_bits_for(bits: u32, n_max: usize) -> Self {
        Self {
            bits: bits.max(128),
            guard_digits: DEFAULT_GUARD_DIGITS + (3 * n_max as u32).div_ceil(4),
        }
    }

    /// Decimal digits considered trustworthy under this context.
    pub fn trusted_digits(&self) -> u32 {
        let d = (0.3010 * self.bits as f64).floor() as i64 - self.guard_digits as i64;
        d.max(1) as u32
    }

    /// `tol = 10^-(0.3010 bits - guard_digits)`.
    pub fn tol(&self) -> Real {
        let e = 0.3010 * self.bits as f64 - self.guard_digits as f64;
        Real::with_val(64, -e).exp10()
    }

    /// `tol^(1/2)`: tolerance class for single finite-difference residuals.
    pub fn tol_fd1(&self) -> Real {
        self.tol().sqrt()
    }

    /// `tol^(1/4)`: tolerance class for mixed/double finite-difference residuals.
    pub fn tol_fd2(&self) -> Real {
        self.tol().sqrt().sqrt()
    }

    pub fn real(&self, v: f64) -> Real {
        Real::with_val(self.bits, v)
    }

    pub fn int(&self, v: i64) -> Real {
        Real::with_val(self.bits, v)
    }

    pub fn zero(&self) -> Real {
        Real::new(self.bits)
    }

    pub fn pi(&self) -> Real {
        Real::with_val(self.bits, Constant::Pi)
    }

    pub fn sqrt_pi(&self) -> Real {
        self.pi().sqrt()
    }

    /// Re-round (or extend) a value to this context's precision.
    pub fn round(&self, v: &Real) -> Real {
        Real::with_val(self.bits, v)
    }

    /// Parse a decimal literal at full context precision.
    pub fn parse(&self, s: &str) -> Result<Real> {
        let p = Real::parse(s).map_err(|e| Error::Config(format!("bad real '{s}': {e}")))?;
        Ok(Real::with_val(self.bits, p))
    }
}

/// erfc(x) = (2/√π) ∫_x^∞ e^{-u²} du, correct to context precision.
///
/// Taylor series of erf for |x| <= 2; the classical continued fraction for
/// x > 2; reflection erfc(x) = 2 - erfc(-x) for x < -2.  Values lie in (0, 2).
pub fn erfc_mp(x: &Real, ctx: &PrecisionContext) -> Result<Real> {
    if !x.is_finite() {
        return Err(Error::InvalidWeight("erfc argument not finite".into()));
    }
    let wp = ctx.bits + 64;
    let xw = Real::with_val(wp, x);
    let ax = xw.clone().abs();
    let r = if ax <= 2u32 {
        let erf = erf_taylor(&xw, wp)?;
        let mut one = Real::with_val(wp, 1);
        one -= &erf;
        one
    } else if xw.is_sign_positive() {
        erfc_cf(&xw, wp)?
    } else {
        let pos = erfc_cf(&ax, wp)?;
        let mut two = Real::with_val(wp, 2);
        two -= &pos;
        two
    };
    Ok(Real::with_val(ctx.bits, r))
}

/// erf by its alternating Taylor series (2/√π) Σ (-1)^k x^{2k+1}/(k!(2k+1)).
fn erf_taylor(x: &Real, wp: u32) -> Result<Real> {
    let x2 = Real::with_val(wp, x * x);
    let mut term = Real::with_val(wp, x); // x^{2k+1}/k!
    let mut sum = Real::with_val(wp, x);
    let cutoff = Real::with_val(wp, 2).pow(-(wp as i32) - 16);
    let mut converged = false;
    for k in 1..20_000u32 {
        term *= &x2;
        term /= k;
        let mut t = term.clone();
        t /= 2 * k + 1;
        if k % 2 == 1 {
            sum -= &t;
        } else {
            sum += &t;
        }
        let mut mag = t.abs();
        mag /= &sum.clone().abs().max(&Real::with_val(wp, 1e-300));
        if mag < cutoff {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::PrecisionUnachievable(
            "erf Taylor series hit its iteration cap".into(),
        ));
    }
    let two_over_sqrt_pi = {
        let mut v = Real::with_val(wp, Constant::Pi);
        v = v.sqrt().recip();
        v *= 2u32;
        v
    };
    sum *= &two_over_sqrt_pi;
    Ok(sum)
}

/// erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + (2/2)/(x + (3/2)/(x + ...)))),
/// for x > 2, evaluated bottom-up with doubling depth until stable.
fn erfc_cf(x: &Real, wp: u32) -> Result<Real> {
    let cutoff = Real::with_val(wp, 2).pow(-(wp as i32) - 8);
    let mut depth = 64 + (wp / 8) as usize;
    let mut prev: Option<Real> = None;
    for _ in 0..16 {
        let mut f = Real::with_val(wp, x);
        for k in (1..=depth).rev() {
            // f <- x + (k/2)/f
            let mut t = Real::with_val(wp, k as u32);
            t /= 2u32;
            t /= &f;
            f.assign(x + &t);
        }
        if let Some(p) = &prev {
            let mut diff = Real::with_val(wp, &f - p);
            diff = diff.abs();
            diff /= Real::with_val(wp, f.clone().abs());
            if diff < cutoff {
                let mut r = Real::with_val(wp, x * x);
                r = (-r).exp();
                r /= Real::with_val(wp, Constant::Pi).sqrt();
                r /= &f;
                return Ok(r);
            }
        }
        prev = Some(f);
        depth *= 2;
    }
    Err(Error::PrecisionUnachievable(
        "erfc continued fraction hit its depth cap".into(),
    ))
}

/// Derivative order for [`fd_derivative`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FdOrder {
    First,
    Second,
}

/// Central finite difference with a 4-level Richardson table.
///
/// Step sizes: `h = 2^(-bits/3) max(1,|t|)` for first derivatives and
/// `h = 2^(-bits/5) max(1,|t|)` for second derivatives (the larger step keeps
/// the roundoff floor of the h² division below tol^(1/2)).  The returned
/// value carries estimated error <= tol(ctx)^(1/2).
pub fn fd_derivative<F>(mut f: F, t: &Real, order: FdOrder, ctx: &PrecisionContext) -> Result<Real>
where
    F: FnMut(&Real) -> Result<Real>,
{
    let wp = ctx.bits + 64;
    let shift = match order {
        FdOrder::First => ctx.bits / 3,
        FdOrder::Second => ctx.bits / 5,
    };
    let mut h0 = Real::with_val(wp, 2).pow(-(shift as i32));
    let scale = Real::with_val(wp, t).abs().max(&Real::with_val(wp, 1));
    h0 *= &scale;

    let f0 = if matches!(order, FdOrder::Second) {
        Some(f(&Real::with_val(wp, t))?)
    } else {
        None
    };

    const LEVELS: usize = 4;
    let mut table: Vec<Vec<Real>> = Vec::with_capacity(LEVELS);
    for i in 0..LEVELS {
        let mut h = h0.clone();
        h >>= i as u32; // h0 / 2^i
        let tp = Real::with_val(wp, t + &h);
        let tm = Real::with_val(wp, t - &h);
        let fp = f(&tp)?;
        let fm = f(&tm)?;
        let d = match order {
            FdOrder::First => {
                let mut d = Real::with_val(wp, &fp - &fm);
                d /= &h;
                d /= 2u32;
                d
            }
            FdOrder::Second => {
                let mut d = Real::with_val(wp, &fp + &fm);
                let mut f2 = f0.as_ref().unwrap().clone();
                f2 *= 2u32;
                d -= &f2;
                d /= Real::with_val(wp, &h * &h);
                d
            }
        };
        // Richardson in h^2: T[i][j] = (4^j T[i][j-1] - T[i-1][j-1]) / (4^j - 1)
        let mut row = vec![d];
        for j in 1..=i {
            let pow4 = Real::with_val(wp, 4).pow(j as u32);
            let mut v = Real::with_val(wp, &pow4 * &row[j - 1]);
            v -= &table[i - 1][j - 1];
            v /= Real::with_val(wp, &pow4 - &Real::with_val(wp, 1));
            row.push(v);
        }
        table.push(row);
    }

    let best = table[LEVELS - 1][LEVELS - 1].clone();
    let prev = table[LEVELS - 2][LEVELS - 2].clone();
    let mut est = Real::with_val(wp, &best - &prev);
    est = est.abs();
    let mut bound = ctx.tol_fd1();
    let unit = Real::with_val(wp, 1);
    bound *= best.clone().abs().max(&unit);
    if est > bound {
        return Err(Error::FdNonConvergent(format!(
            "order {:?} at t = {}: estimate {:e} exceeds {:e}",
            order,
            t.to_f64(),
            est.to_f64(),
            bound.to_f64()
        )));
    }
    Ok(Real::with_val(ctx.bits, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256)
    }

    #[test]
    fn tol_is_positive_and_monotone() {
        let t1 = PrecisionContext::new(128).tol();
        let t2 = PrecisionContext::new(256).tol();
        let t3 = PrecisionContext::new(512).tol();
        assert!(t1 > 0 && t2 > 0 && t3 > 0);
        assert!(t2 < t1 && t3 < t2);
    }

    #[test]
    fn erfc_at_zero_is_one() {
        let c = ctx();
        let v = erfc_mp(&c.real(0.0), &c).unwrap();
        let mut d = v;
        d -= 1u32;
        assert!(d.abs() < c.tol());
    }

    #[test]
    fn erfc_reflection_identity() {
        let c = ctx();
        for x in [0.3, 1.25, 2.5, 7.0] {
            let a = erfc_mp(&c.real(x), &c).unwrap();
            let b = erfc_mp(&c.real(-x), &c).unwrap();
            let mut s = a;
            s += &b;
            s -= 2u32;
            assert!(s.abs() < c.tol(), "reflection failed at x={x}");
        }
    }

    /// Independent oracle: brute-force integration of e^{-u²} on (x, ∞) by
    /// tanh-sinh quadrature with level doubling until stable.
    #[test]
    fn erfc_matches_integration_oracle() {
        let c = PrecisionContext::new(320);
        for x in [0.5, 1.0, 1.7, 3.0] {
            let xr = c.real(x);
            let integral = quad::integrate_gaussian_tail(&xr, 0, &c).unwrap();
            let mut expected = integral;
            expected *= 2u32;
            expected /= &c.sqrt_pi();
            let got = erfc_mp(&xr, &c).unwrap();
            let mut d = Real::with_val(c.bits, &got - &expected);
            d = d.abs();
            d /= &expected;
            assert!(d < c.tol(), "erfc({x}) mismatch: {:e}", d.to_f64());
        }
        // frozen 30-digit reference from the oracle, erfc(1)
        let got = erfc_mp(&c.real(1.0), &c).unwrap();
        let want = c.parse("0.157299207050285130658779364917").unwrap();
        let mut d = Real::with_val(c.bits, &got - &want);
        d = d.abs();
        assert!(d < c.real(1e-29));
    }

    #[test]
    fn erfc_bounds_and_monotone_on_grid() {
        let c = ctx();
        let mut prev: Option<Real> = None;
        for i in -40..=40 {
            let x = c.real(i as f64 * 0.25);
            let v = erfc_mp(&x, &c).unwrap();
            assert!(v > 0 && v < 2);
            if let Some(p) = prev {
                assert!(v < p, "erfc not strictly decreasing at {}", i);
            }
            prev = Some(v);
        }
    }

    #[test]
    fn erfc_precision_improves_quadratically() {
        // doubling bits shrinks |erfc - reference| at least quadratically in tol
        let grid = [-2.5, -0.75, 0.5, 1.5, 4.0];
        let reference: Vec<Real> = {
            let c = PrecisionContext::new(2048);
            grid.iter().map(|&x| erfc_mp(&c.real(x), &c).unwrap()).collect()
        };
        for bits in [128u32, 256] {
            let lo = PrecisionContext::new(bits);
            let hi = PrecisionContext::new(2 * bits);
            for (i, &x) in grid.iter().enumerate() {
                let e_lo = {
                    let d = Real::with_val(2048, &erfc_mp(&lo.real(x), &lo).unwrap() - &reference[i]);
                    d.abs()
                };
                let e_hi = {
                    let d = Real::with_val(2048, &erfc_mp(&hi.real(x), &hi).unwrap() - &reference[i]);
                    d.abs()
                };
                // e_hi <= e_lo^2 modulo scale: compare against tol classes
                assert!(e_lo < lo.tol());
                assert!(e_hi < hi.tol());
                let mut sq = Real::with_val(2048, &e_lo * &e_lo);
                sq += lo.tol().square();
                assert!(e_hi <= sq, "no quadratic gain at x={x} bits={bits}");
            }
        }
    }

    #[test]
    fn fd_polynomial_exactness() {
        let c = ctx();
        // f = square map
        let d1 = fd_derivative(
            |t| Ok(Real::with_val(c.bits, t * t)),
            &c.real(3.0),
            FdOrder::First,
            &c,
        )
        .unwrap();
        let mut e = d1;
        e -= 6u32;
        assert!(e.abs() < c.tol_fd1());
        let d2 = fd_derivative(
            |t| Ok(Real::with_val(c.bits, t * t)),
            &c.real(3.0),
            FdOrder::Second,
            &c,
        )
        .unwrap();
        let mut e = d2;
        e -= 2u32;
        assert!(e.abs() < c.tol_fd1());
    }

    #[test]
    fn fd_degree_six_polynomials() {
        let c = ctx();
        // p(x) = x^6 - 2x^3 + x, p'(2) = 6*32 - 6*4 + 1 = 169, p''(2) = 30*16 - 12*2 = 456
        let p = |t: &Real| {
            let t2 = Real::with_val(c.bits, t * t);
            let t3 = Real::with_val(c.bits, &t2 * t);
            let mut v = Real::with_val(c.bits, &t3 * &t3);
            let mut two_t3 = t3;
            two_t3 *= 2u32;
            v -= &two_t3;
            v += t;
            Ok(v)
        };
        let d1 = fd_derivative(p, &c.real(2.0), FdOrder::First, &c).unwrap();
        let mut e = d1;
        e -= 169u32;
        assert!(e.abs() < c.tol_fd1());
        let d2 = fd_derivative(p, &c.real(2.0), FdOrder::Second, &c).unwrap();
        let mut e = d2;
        e -= 456u32;
        assert!(e.abs() < c.tol_fd1());
    }

    #[test]
    fn fd_erfc_derivative_matches_analytic() {
        let c = ctx();
        let d = fd_derivative(|t| erfc_mp(t, &c), &c.real(0.0), FdOrder::First, &c).unwrap();
        // d/dx erfc(0) = -2/sqrt(pi)
        let mut want = c.real(2.0);
        want /= &c.sqrt_pi();
        let mut e = d;
        e += &want;
        assert!(e.abs() < c.tol_fd1());
    }
}
