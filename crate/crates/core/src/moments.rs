//! The jump weight `w(x) = e^{-x²}(A + B1 θ(x-t1) + B2 θ(x-t2))` and its
//! exact closed-form moments, the input to every Hankel computation.
//!
//! Full-line Gaussian moments come from the double-factorial split, half-line
//! moments `I_j(t) = ∫_t^∞ x^j e^{-x²} dx` from the two-term recurrence
//! seeded by `I_0 = (√π/2) erfc(t)` and `I_1 = e^{-t²}/2`.  Quadrature is
//! never used on this path.

use crate::numerics::{erfc_mp, PrecisionContext};
use crate::{Error, Real, Result};

/// Parameters of the jump weight.  `t2` is ignored when `b2 = 0`.
///
/// Positivity constraints: `A >= 0`, `A + B1 >= 0`, `A + B1 + B2 >= 0`, and
/// `t1 < t2` whenever `b2 != 0`.
#[derive(Clone, Debug)]
pub struct WeightSpec {
    pub a: Real,
    pub b1: Real,
    pub b2: Real,
    pub t1: Real,
    pub t2: Real,
}

impl WeightSpec {
    pub fn new(a: Real, b1: Real, b2: Real, t1: Real, t2: Real) -> Result<Self> {
        let s = Self { a, b1, b2, t1, t2 };
        s.validate()?;
        Ok(s)
    }

    /// Single-jump convenience constructor (B2 = 0) from f64 parameters.
    pub fn single(a: f64, b1: f64, t1: f64, bits: u32) -> Result<Self> {
        Self::new(
            Real::with_val(bits, a),
            Real::with_val(bits, b1),
            Real::new(bits),
            Real::with_val(bits, t1),
            Real::new(bits),
        )
    }

    /// Two-jump convenience constructor from f64 parameters.
    pub fn double(a: f64, b1: f64, b2: f64, t1: f64, t2: f64, bits: u32) -> Result<Self> {
        Self::new(
            Real::with_val(bits, a),
            Real::with_val(bits, b1),
            Real::with_val(bits, b2),
            Real::with_val(bits, t1),
            Real::with_val(bits, t2),
        )
    }

    /// Pure Gaussian weight `A e^{-x²}`.
    pub fn gaussian(a: f64, bits: u32) -> Result<Self> {
        Self::single(a, 0.0, 0.0, bits)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("A", &self.a),
            ("B1", &self.b1),
            ("B2", &self.b2),
            ("t1", &self.t1),
            ("t2", &self.t2),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidWeight(format!("{name} is not finite")));
            }
        }
        if self.a.is_sign_negative() && !self.a.is_zero() {
            return Err(Error::InvalidWeight("A >= 0 violated".into()));
        }
        let ab1 = Real::with_val(self.a.prec(), &self.a + &self.b1);
        if ab1 < 0 {
            return Err(Error::InvalidWeight("A + B1 >= 0 violated".into()));
        }
        let ab12 = Real::with_val(self.a.prec(), &ab1 + &self.b2);
        if ab12 < 0 {
            return Err(Error::InvalidWeight("A + B1 + B2 >= 0 violated".into()));
        }
        if !self.b2.is_zero() && !(self.t1 < self.t2) {
            return Err(Error::InvalidWeight("t1 < t2 violated".into()));
        }
        if self.a.is_zero() && self.b1.is_zero() && self.b2.is_zero() {
            return Err(Error::DegenerateWeight);
        }
        Ok(())
    }

    pub fn single_jump(&self) -> bool {
        self.b2.is_zero()
    }

    pub fn pure_gaussian(&self) -> bool {
        self.b1.is_zero() && self.b2.is_zero()
    }

    /// Same weight with `t1` replaced (the variable of all t-derivatives).
    pub fn at_t1(&self, t1: &Real) -> Self {
        let mut s = self.clone();
        s.t1 = t1.clone();
        s
    }

    /// Same weight with `t2` replaced.
    pub fn at_t2(&self, t2: &Real) -> Self {
        let mut s = self.clone();
        s.t2 = t2.clone();
        s
    }
}

/// Pointwise weight value with the θ(0) := 0 convention (values at one point
/// affect no integral; a fixed convention keeps this testable).
pub fn weight_at(x: &Real, spec: &WeightSpec) -> Real {
    let p = x.prec().max(spec.a.prec());
    let mut f = Real::with_val(p, &spec.a);
    if *x > spec.t1 {
        f += &spec.b1;
    }
    if !spec.b2.is_zero() && *x > spec.t2 {
        f += &spec.b2;
    }
    let mut g = Real::with_val(p, x * x);
    g = (-g).exp();
    g *= &f;
    g
}

/// Half-line moment `I_j(t) = ∫_t^∞ x^j e^{-x²} dx`.
pub fn half_line_moment(j: usize, t: &Real, ctx: &PrecisionContext) -> Result<Real> {
    Ok(half_line_moments(j, t, ctx)?.pop().unwrap())
}

/// `I_0 .. I_jmax` in one sweep (shared `e^{-t²}`).
pub fn half_line_moments(jmax: usize, t: &Real, ctx: &PrecisionContext) -> Result<Vec<Real>> {
    let p = ctx.bits;
    let t = Real::with_val(p, t);
    let emt2 = {
        let mut v = Real::with_val(p, &t * &t);
        v = (-v).exp();
        v
    };
    let mut i0 = erfc_mp(&t, ctx)?;
    i0 *= &ctx.sqrt_pi();
    i0 /= 2u32;
    let mut out = vec![i0];
    if jmax >= 1 {
        let mut i1 = emt2.clone();
        i1 /= 2u32;
        out.push(i1);
    }
    let mut tpow = Real::with_val(p, &t); // t^{j-1} for j = 2
    for j in 2..=jmax {
        // I_j = t^{j-1} e^{-t²} / 2 + (j-1)/2 I_{j-2}
        let mut v = Real::with_val(p, &tpow * &emt2);
        v /= 2u32;
        let mut w = out[j - 2].clone();
        w *= (j - 1) as u32;
        w /= 2u32;
        v += &w;
        out.push(v);
        tpow *= &t;
    }
    Ok(out)
}

/// Full Gaussian moments `G_0 .. G_jmax`, zero for odd `j` and
/// `(j-1)!! √π / 2^{j/2}` for even `j` (double-factorial recurrence, no Γ).
pub fn gaussian_moments(jmax: usize, ctx: &PrecisionContext) -> Vec<Real> {
    let mut out = vec![ctx.sqrt_pi()];
    for j in 1..=jmax {
        if j % 2 == 1 {
            out.push(ctx.zero());
        } else {
            let mut v = out[j - 2].clone();
            v *= (j - 1) as u32;
            v /= 2u32;
            out.push(v);
        }
    }
    out
}

/// Moment `μ_j = A G_j + B1 I_j(t1) + B2 I_j(t2)` of the jump weight.
pub fn moment(j: usize, spec: &WeightSpec, ctx: &PrecisionContext) -> Result<Real> {
    Ok(moments_upto(j, spec, ctx)?.pop().unwrap())
}

/// `μ_0 .. μ_jmax`.
pub fn moments_upto(jmax: usize, spec: &WeightSpec, ctx: &PrecisionContext) -> Result<Vec<Real>> {
    spec.validate()?;
    let g = gaussian_moments(jmax, ctx);
    let i1 = half_line_moments(jmax, &spec.t1, ctx)?;
    let i2 = if spec.b2.is_zero() {
        None
    } else {
        Some(half_line_moments(jmax, &spec.t2, ctx)?)
    };
    let mut out = Vec::with_capacity(jmax + 1);
    for j in 0..=jmax {
        let mut v = Real::with_val(ctx.bits, &spec.a * &g[j]);
        let mut w = Real::with_val(ctx.bits, &spec.b1 * &i1[j]);
        v += &w;
        if let Some(i2) = &i2 {
            use rug::Assign;
            w.assign(&spec.b2 * &i2[j]);
            v += &w;
        }
        out.push(v);
    }
    Ok(out)
}

/// Modified moments `ν_l = ∫ π_l(x) w(x) dx` against the monic Hermite-type
/// basis of `e^{-x²}` (`π_{k+1} = x π_k - (k/2) π_{k-1}`).  Closed form:
/// `ν_0 = μ_0` and `ν_l = Σ_i (B_i/2) e^{-t_i²} π_{l-1}(t_i)` for `l >= 1`,
/// since `∫_t^∞ π_l e^{-x²} dx = e^{-t²} π_{l-1}(t) / 2`.
pub fn modified_moments(lmax: usize, spec: &WeightSpec, ctx: &PrecisionContext) -> Result<Vec<Real>> {
    spec.validate()?;
    let p = ctx.bits;
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(moment(0, spec, ctx)?);
    if lmax == 0 {
        return Ok(out);
    }
    let jump = |b: &Real, t: &Real| -> Vec<Real> {
        let pi_vals = monic_hermite_values(lmax - 1, t, p);
        let mut scale = Real::with_val(p, t * t);
        scale = (-scale).exp();
        scale *= b;
        scale /= 2u32;
        pi_vals
            .into_iter()
            .map(|v| Real::with_val(p, &v * &scale))
            .collect()
    };
    let j1 = jump(&spec.b1, &spec.t1);
    let j2 = if spec.b2.is_zero() {
        None
    } else {
        Some(jump(&spec.b2, &spec.t2))
    };
    for l in 1..=lmax {
        let mut v = j1[l - 1].clone();
        if let Some(j2) = &j2 {
            v += &j2[l - 1];
        }
        out.push(v);
    }
    Ok(out)
}

/// `π_0(t) .. π_kmax(t)` for the monic Hermite-type basis of `e^{-x²}`.
pub fn monic_hermite_values(kmax: usize, t: &Real, bits: u32) -> Vec<Real> {
    let t = Real::with_val(bits, t);
    let mut out = vec![Real::with_val(bits, 1)];
    if kmax == 0 {
        return out;
    }
    out.push(t.clone());
    for k in 1..kmax {
        // π_{k+1} = t π_k - (k/2) π_{k-1}
        let mut v = Real::with_val(bits, &t * &out[k]);
        let mut w = out[k - 1].clone();
        w *= k as u32;
        w /= 2u32;
        v -= &w;
        out.push(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use rug::ops::Pow;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256)
    }

    fn rel_err(a: &Real, b: &Real) -> Real {
        let p = a.prec();
        let mut d = Real::with_val(p, a - b);
        d = d.abs();
        let den = Real::with_val(p, b.clone().abs()).max(&Real::with_val(p, 1e-300));
        d / den
    }

    #[test]
    fn spec_constraints_reject_invalid() {
        assert!(matches!(
            WeightSpec::single(-1.0, 0.5, 0.0, 128),
            Err(Error::InvalidWeight(_))
        ));
        assert!(matches!(
            WeightSpec::single(1.0, -2.0, 0.0, 128),
            Err(Error::InvalidWeight(_))
        ));
        assert!(matches!(
            WeightSpec::double(1.0, 0.5, -2.0, 0.0, 1.0, 128),
            Err(Error::InvalidWeight(_))
        ));
        assert!(matches!(
            WeightSpec::double(1.0, 0.5, 0.25, 1.0, 0.0, 128),
            Err(Error::InvalidWeight(_))
        ));
        assert!(matches!(
            WeightSpec::single(0.0, 0.0, 0.0, 128),
            Err(Error::DegenerateWeight)
        ));
    }

    #[test]
    fn weight_at_jump_conventions() {
        let c = ctx();
        let s = WeightSpec::single(1.0, 1.0, 0.0, c.bits).unwrap();
        // below the jump: e^{-1}; above: 2 e^{-1}
        let lo = weight_at(&c.real(-1.0), &s);
        let hi = weight_at(&c.real(1.0), &s);
        let e1 = c.real(-1.0).exp();
        assert!(rel_err(&lo, &e1) < c.tol());
        let mut e2 = e1.clone();
        e2 *= 2u32;
        assert!(rel_err(&hi, &e2) < c.tol());
        // θ(0) = 0: at the jump the lower value applies
        let at = weight_at(&c.real(0.0), &s);
        let mut one = at;
        one -= 1u32;
        assert!(one.abs() < c.tol());
    }

    #[test]
    fn weight_at_two_jump_paper_parametrization() {
        // A = e^mu, B1 = 1 - e^mu, B2 = e^{-mu} - 1, mu = 0.3: between the
        // jumps the factor is exactly 1.
        let c = ctx();
        let mu = 0.3f64;
        let s = WeightSpec::double(
            mu.exp(),
            1.0 - mu.exp(),
            (-mu).exp() - 1.0,
            0.0,
            1.0,
            c.bits,
        )
        .unwrap();
        let v = weight_at(&c.real(0.5), &s);
        let want = c.real(-0.25).exp();
        assert!(rel_err(&v, &want) < c.real(1e-15), "f64 parameters round A+B1");
    }

    #[test]
    fn half_line_examples() {
        let c = ctx();
        // I_0(0) = √π/2
        let i0 = half_line_moment(0, &c.real(0.0), &c).unwrap();
        let mut want = c.sqrt_pi();
        want /= 2u32;
        assert!(rel_err(&i0, &want) < c.tol());
        // I_1(0) = 1/2
        let i1 = half_line_moment(1, &c.real(0.0), &c).unwrap();
        assert!(rel_err(&i1, &c.real(0.5)) < c.tol());
    }

    #[test]
    fn half_line_matches_quadrature_oracle() {
        let c = ctx();
        let t = c.real(1.0);
        let got = half_line_moment(4, &t, &c).unwrap();
        let want = quad::integrate_gaussian_tail(&t, 4, &c).unwrap();
        assert!(rel_err(&got, &want) < c.tol());
    }

    #[test]
    fn recurrence_consistency_random() {
        let c = ctx();
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..25 {
            let j = rng.gen_range(2..14usize);
            let t = c.real(rng.gen_range(-3.0..3.0));
            let ij = half_line_moment(j, &t, &c).unwrap();
            let ijm2 = half_line_moment(j - 2, &t, &c).unwrap();
            let mut rhs = Real::with_val(c.bits, &t * &t);
            rhs = (-rhs).exp();
            let tp = Real::with_val(c.bits, (&t).pow((j - 1) as u32));
            rhs *= &tp;
            rhs /= 2u32;
            let mut w = ijm2;
            w *= (j - 1) as u32;
            w /= 2u32;
            rhs += &w;
            assert!(rel_err(&ij, &rhs) < c.tol(), "recurrence failed j={j}");
        }
    }

    #[test]
    fn tail_limit_reaches_full_moment() {
        let c = ctx();
        let t = c.real(-30.0);
        let g = gaussian_moments(6, &c);
        for j in [0usize, 2, 4, 6] {
            let i = half_line_moment(j, &t, &c).unwrap();
            assert!(rel_err(&i, &g[j]) < c.tol(), "I_{j}(-30) != G_{j}");
        }
    }

    #[test]
    fn moment_examples() {
        let c = ctx();
        let s = WeightSpec::single(1.0, 1.0, 0.0, c.bits).unwrap();
        // μ_0 = 3√π/2
        let m0 = moment(0, &s, &c).unwrap();
        let mut want = c.sqrt_pi();
        want *= 3u32;
        want /= 2u32;
        assert!(rel_err(&m0, &want) < c.tol());
        // μ_1 = 1/2 (Gaussian part vanishes by parity)
        let m1 = moment(1, &s, &c).unwrap();
        assert!(rel_err(&m1, &c.real(0.5)) < c.tol());
        // pure Gaussian μ_2 = √π/2
        let g = WeightSpec::gaussian(1.0, c.bits).unwrap();
        let m2 = moment(2, &g, &c).unwrap();
        let mut want = c.sqrt_pi();
        want /= 2u32;
        assert!(rel_err(&m2, &want) < c.tol());
    }

    #[test]
    fn moment_t1_derivative_is_minus_b1_tj_weight() {
        // d μ_j / d t1 = -B1 t1^j e^{-t1²}
        let c = ctx();
        let spec = WeightSpec::single(1.0, 0.7, 0.0, c.bits).unwrap();
        for j in [0usize, 1, 3] {
            let d = crate::numerics::fd_derivative(
                |t| moment(j, &spec.at_t1(t), &c),
                &c.real(0.6),
                crate::numerics::FdOrder::First,
                &c,
            )
            .unwrap();
            let t1 = c.real(0.6);
            let mut want = Real::with_val(c.bits, &t1 * &t1);
            want = (-want).exp();
            if j > 0 {
                want *= Real::with_val(c.bits, (&t1).pow(j as u32));
            }
            want *= &spec.b1;
            want = -want;
            let mut diff = Real::with_val(c.bits, &d - &want);
            diff = diff.abs();
            assert!(diff < c.tol_fd1(), "j={j}");
        }
    }

    #[test]
    fn modified_moments_match_raw_on_low_orders() {
        // ν_0 = μ_0, ν_1 = μ_1 (π_1 = x), ν_2 = μ_2 - μ_0/2 (π_2 = x² - 1/2)
        let c = ctx();
        let s = WeightSpec::double(1.2, 0.5, -0.3, -0.4, 0.9, c.bits).unwrap();
        let nus = modified_moments(2, &s, &c).unwrap();
        let mus = moments_upto(2, &s, &c).unwrap();
        assert!(rel_err(&nus[0], &mus[0]) < c.tol());
        assert!(rel_err(&nus[1], &mus[1]) < c.tol());
        let mut want = mus[0].clone();
        want /= 2u32;
        want = Real::with_val(c.bits, &mus[2] - &want);
        let mut diff = Real::with_val(c.bits, &nus[2] - &want);
        diff = diff.abs();
        let mut bound = c.tol();
        bound *= Real::with_val(c.bits, want.abs());
        assert!(diff < bound);
    }
}
