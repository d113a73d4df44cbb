//! Every difference/differential identity of the ladder framework evaluated
//! as a numerical residual with a derived tolerance.
//!
//! Residuals are relative: each identity is written as a sum of terms and the
//! absolute value of the sum is normalized by the largest |term|, so pass/fail
//! is scale-free.  Tolerance classes: algebraic identities use `tol(ctx)`,
//! single finite-difference identities `tol^(1/2)`, mixed/double FD
//! `tol^(1/4)`; limit properties compare residual ratios against 1.
//!
//! Single-jump and two-jump suites share the residual kernels, so setting
//! `B2 = 0` in the two-jump suite reproduces the single-jump reports bit for
//! bit (second-jump inputs are exact zeros and MPFR arithmetic with exact
//! zeros is exact).

use crate::ladder::{AuxDouble, AuxSingle};
use crate::moments::WeightSpec;
use crate::numerics::{fd_derivative, FdOrder, PrecisionContext};
use crate::ortho::{build_system, build_system_large, eval_poly_derivs, OrthoSystem};
use crate::{Error, Real, Result};
use rug::Assign;
use std::rc::Rc;

/// Tolerance class a residual was checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdentityClass {
    /// no FD input: `tol`
    Algebraic,
    /// one FD derivative in the inputs: `tol^(1/2)`
    SingleFd,
    /// mixed/double FD: `tol^(1/4)`
    MixedFd,
    /// asymptotic ratio property: tolerance 1
    Property,
}

impl IdentityClass {
    pub fn label(&self) -> &'static str {
        match self {
            IdentityClass::Algebraic => "algebraic",
            IdentityClass::SingleFd => "single-fd",
            IdentityClass::MixedFd => "mixed-fd",
            IdentityClass::Property => "property",
        }
    }

    pub fn tolerance(&self, ctx: &PrecisionContext) -> Real {
        match self {
            IdentityClass::Algebraic => ctx.tol(),
            IdentityClass::SingleFd => ctx.tol_fd1(),
            IdentityClass::MixedFd => ctx.tol_fd2(),
            IdentityClass::Property => Real::with_val(64, 1),
        }
    }
}

/// One identity evaluated at one `(n, t)` point.
#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub id: String,
    pub n: usize,
    pub t: Vec<f64>,
    pub residual: Real,
    pub tolerance: Real,
    pub class: IdentityClass,
    pub pass: bool,
    pub skipped: Option<String>,
}

impl IdentityReport {
    fn from_terms(
        id: &str,
        n: usize,
        t: Vec<f64>,
        terms: &[Real],
        class: IdentityClass,
        ctx: &PrecisionContext,
    ) -> Self {
        let bits = terms.first().map(|x| x.prec()).unwrap_or(64);
        let mut sum = Real::new(bits);
        let mut max = Real::new(bits);
        for term in terms {
            sum += term;
            let a = term.clone().abs();
            if a > max {
                max.assign(&a);
            }
        }
        let residual = if max.is_zero() {
            Real::new(bits)
        } else {
            let mut r = sum.abs();
            r /= &max;
            r
        };
        let tolerance = class.tolerance(ctx);
        let pass = residual <= tolerance;
        Self {
            id: id.to_string(),
            n,
            t,
            residual,
            tolerance,
            class,
            pass,
            skipped: None,
        }
    }

    fn skipped(id: &str, n: usize, t: Vec<f64>, class: IdentityClass, ctx: &PrecisionContext, why: &str) -> Self {
        Self {
            id: id.to_string(),
            n,
            t,
            residual: Real::new(64),
            tolerance: class.tolerance(ctx),
            class,
            pass: true,
            skipped: Some(why.to_string()),
        }
    }
}

/// Parameters the substituted equations take as pure functions of `n` (and
/// the sign of `B1` for the Heun limit).
pub struct IdentitySpec;

impl IdentitySpec {
    /// Painlevé IV for `y(t) = R_n(-t)`: `(α₁, β₁) = (2n+1, 0)`.
    pub fn piv_params(n: usize, bits: u32) -> (Real, Real) {
        (Real::with_val(bits, 2 * n as u64 + 1), Real::new(bits))
    }

    /// Chazy II for `v = -2 r_n - 2n/3`: `(α₂, β₂) = (-8n²/3, -64n³/27)`.
    pub fn chazy_params(n: usize, bits: u32) -> (Real, Real) {
        let mut a = Real::with_val(bits, 8 * (n * n) as u64);
        a /= 3u32;
        a = -a;
        let mut b = Real::with_val(bits, 64u64 * (n * n * n) as u64);
        b /= 27u32;
        b = -b;
        (a, b)
    }

    /// σ-form parameters `(ν₀, ν₁, ν₂) = (0, 0, 2n)`.
    pub fn sigma_params(n: usize, bits: u32) -> (Real, Real, Real) {
        (
            Real::new(bits),
            Real::new(bits),
            Real::with_val(bits, 2 * n as u64),
        )
    }

    /// Biconfluent Heun parameters `(γ, δ, α, q)` with
    /// `q = -sign(B1) 4√3 n^{3/2} / 9`.
    pub fn bhe_params(n: usize, t1: &Real, b1_positive: bool, bits: u32) -> (Real, Real, Real, Real) {
        let gamma = Real::with_val(bits, -1);
        let mut delta = Real::with_val(bits, 2).sqrt();
        delta *= t1;
        let alpha = Real::new(bits);
        let mut q = Real::with_val(bits, 3).sqrt();
        q *= 4u32;
        q *= Real::with_val(bits, n as u64).pow_u(3).sqrt();
        q /= 9u32;
        if b1_positive {
            q = -q;
        }
        (gamma, delta, alpha, q)
    }
}

trait PowU {
    fn pow_u(self, e: u32) -> Real;
}

impl PowU for Real {
    fn pow_u(self, e: u32) -> Real {
        use rug::ops::Pow;
        let p = self.prec();
        Real::with_val(p, (&self).pow(e))
    }
}

// ---------------------------------------------------------------------------
// shared residual kernels (single jump calls them with zero second-jump data)
// ---------------------------------------------------------------------------

struct JumpData<'a> {
    t: &'a Real,
    /// R_{n,i} and R_{n-1,i}
    ra_n: &'a Real,
    ra_nm1: &'a Real,
    /// r_{n,i}, r_{n+1,i}
    rb_n: &'a Real,
    rb_np1: &'a Real,
    /// Σ_{j<n} R_{j,i}
    sum_ra: Real,
}

fn prod(bits: u32, a: &Real, b: &Real) -> Real {
    Real::with_val(bits, a * b)
}

/// `(s12)` at jump i: r_{n+1,i} + r_{n,i} - (t_i - α_n) R_{n,i}.
fn kernel_s12(bits: u32, j: &JumpData, alpha_n: &Real) -> Vec<Real> {
    let mut f = Real::with_val(bits, j.t - alpha_n);
    f *= j.ra_n;
    f = -f;
    vec![j.rb_np1.clone(), j.rb_n.clone(), f]
}

/// `(s21)`/`(s2p2)`: r_{n,i}² - β_n R_{n,i} R_{n-1,i}.
fn kernel_s21(bits: u32, j: &JumpData, beta_n: &Real) -> Vec<Real> {
    let sq = prod(bits, j.rb_n, j.rb_n);
    let mut p = prod(bits, j.ra_n, j.ra_nm1);
    p *= beta_n;
    p = -p;
    vec![sq, p]
}

/// `(s23)`/`(s2p1)`: 2β_n - n - r_{n,1} - r_{n,2}.
fn kernel_s23(bits: u32, n: usize, beta_n: &Real, rb1: &Real, rb2: &Real) -> Vec<Real> {
    let mut b = beta_n.clone();
    b *= 2u32;
    let nn = Real::with_val(bits, -(n as i64));
    let mut m1 = rb1.clone();
    m1 = -m1;
    let mut m2 = rb2.clone();
    m2 = -m2;
    vec![b, nn, m1, m2]
}

/// `(s11)`/`(s1e)`: R_{n,1} + R_{n,2} - 2 α_n.
fn kernel_s11(bits: u32, ra1: &Real, ra2: &Real, alpha_n: &Real) -> Vec<Real> {
    let mut a = alpha_n.clone();
    a *= 2u32;
    a = -a;
    let _ = bits;
    vec![ra1.clone(), ra2.clone(), a]
}

/// `(s22a)`/`(s2p4)` at jump i (cross terms vanish exactly when the other
/// jump is absent):
/// 2 r_{n,i} r_{n,k}/(t_i - t_k) + 2 t_i r_{n,i} + Σ_{j<n} R_{j,i}
///   - β_n (R_{n,i} R_{n-1,k} + R_{n,k} R_{n-1,i})/(t_i - t_k)
///   - 2 β_n R_{n,i} - 2 β_n R_{n-1,i}.
fn kernel_s22a(
    bits: u32,
    this: &JumpData,
    other: Option<&JumpData>,
    beta_n: &Real,
) -> Vec<Real> {
    let mut terms = Vec::with_capacity(6);
    match other {
        Some(o) => {
            let mut dt = Real::with_val(bits, this.t - o.t);
            let mut cross = prod(bits, this.rb_n, o.rb_n);
            cross *= 2u32;
            cross /= &dt;
            terms.push(cross);
            let mut m = prod(bits, this.ra_n, o.ra_nm1);
            let mut m2 = prod(bits, o.ra_n, this.ra_nm1);
            m += &m2;
            m *= beta_n;
            m /= &dt;
            m = -m;
            dt.assign(0);
            m2.assign(0);
            terms.push(m);
        }
        None => {
            terms.push(Real::new(bits));
            terms.push(Real::new(bits));
        }
    }
    let mut lin = prod(bits, this.t, this.rb_n);
    lin *= 2u32;
    terms.push(lin);
    terms.push(this.sum_ra.clone());
    let mut a = prod(bits, beta_n, this.ra_n);
    a *= 2u32;
    a = -a;
    terms.push(a);
    let mut b = prod(bits, beta_n, this.ra_nm1);
    b *= 2u32;
    b = -b;
    terms.push(b);
    terms
}

/// `(s22)` (division form, R_n != 0): 2 t r_n - (n + r_n) R_n - 2 r_n²/R_n + Σ_{j<n} R_j.
fn kernel_s22(bits: u32, n: usize, j: &JumpData) -> Option<Vec<Real>> {
    if j.ra_n.is_zero() {
        if j.rb_n.is_zero() {
            // trivial limit: the division term vanishes with r_n
            let mut lin = prod(bits, j.t, j.rb_n);
            lin *= 2u32;
            return Some(vec![lin, Real::new(bits), j.sum_ra.clone()]);
        }
        return None;
    }
    let mut lin = prod(bits, j.t, j.rb_n);
    lin *= 2u32;
    let mut mid = Real::with_val(bits, n as u64);
    mid += j.rb_n;
    mid *= j.ra_n;
    mid = -mid;
    let mut divterm = prod(bits, j.rb_n, j.rb_n);
    divterm *= 2u32;
    divterm /= j.ra_n;
    divterm = -divterm;
    Some(vec![lin, mid, divterm, j.sum_ra.clone()])
}

/// `(jmo)`/`(p41)`: (σ'')² - 4(tσ' - σ)² + 4(σ' + ν₀)(σ' + ν₁)(σ' + ν₂),
/// with σ' exact (= 2 r_n) and σ'' from an order-2 finite difference.
fn kernel_jmo(
    bits: u32,
    n: usize,
    t: &Real,
    sigma: &Real,
    dsigma: &Real,
    d2sigma: &Real,
) -> Vec<Real> {
    let (nu0, nu1, nu2) = IdentitySpec::sigma_params(n, bits);
    let lhs = prod(bits, d2sigma, d2sigma);
    let mut lin = prod(bits, t, dsigma);
    lin -= sigma;
    let mut sq = prod(bits, &lin, &lin);
    sq *= 4u32;
    sq = -sq;
    let mut cub = Real::with_val(bits, dsigma + &nu0);
    cub *= &Real::with_val(bits, dsigma + &nu1);
    cub *= &Real::with_val(bits, dsigma + &nu2);
    cub *= 4u32;
    vec![lhs, sq, cub]
}

/// `(s2p6)`: 2t1 r1 + 2t2 r2 + ΣR1 + ΣR2 - 2β(R1_n + R2_n + R1_{n-1} + R2_{n-1}).
fn kernel_s2p6(bits: u32, j1: &JumpData, j2: &JumpData, beta_n: &Real) -> Vec<Real> {
    let mut a = prod(bits, j1.t, j1.rb_n);
    a *= 2u32;
    let mut b = prod(bits, j2.t, j2.rb_n);
    b *= 2u32;
    let mut out = vec![a, b, j1.sum_ra.clone(), j2.sum_ra.clone()];
    for ra in [j1.ra_n, j2.ra_n, j1.ra_nm1, j2.ra_nm1] {
        let mut v = prod(bits, beta_n, ra);
        v *= 2u32;
        v = -v;
        out.push(v);
    }
    out
}

/// `(s2p7)` with the exact β-partials substituted:
/// 2t1 r1 + 2t2 r2 - σ_n - 2β(R1 + R2) - 2r1²/R1 - 2r2²/R2.
fn kernel_s2p7(bits: u32, j1: &JumpData, j2: &JumpData, beta_n: &Real, sigma_n: &Real) -> Option<Vec<Real>> {
    let mut a = prod(bits, j1.t, j1.rb_n);
    a *= 2u32;
    let mut b = prod(bits, j2.t, j2.rb_n);
    b *= 2u32;
    let mut s = sigma_n.clone();
    s = -s;
    let mut out = vec![a, b, s];
    for j in [j1, j2] {
        let mut v = prod(bits, beta_n, j.ra_n);
        v *= 2u32;
        v = -v;
        out.push(v);
        if j.ra_n.is_zero() {
            if j.rb_n.is_zero() {
                out.push(Real::new(bits));
                continue;
            }
            return None;
        }
        let mut d = prod(bits, j.rb_n, j.rb_n);
        d *= 2u32;
        d /= j.ra_n;
        d = -d;
        out.push(d);
    }
    Some(out)
}

// ---------------------------------------------------------------------------
// single-jump suites
// ---------------------------------------------------------------------------

fn sum_ra_below(aux_ra: &[Real], n: usize, bits: u32) -> Real {
    let mut s = Real::new(bits);
    for r in &aux_ra[..n] {
        s += r;
    }
    s
}

fn single_jump_data<'a>(aux: &'a AuxSingle, n: usize, bits: u32) -> JumpData<'a> {
    JumpData {
        t: &aux.t1,
        ra_n: &aux.res_a[n],
        ra_nm1: &aux.res_a[n - 1],
        rb_n: &aux.res_b[n],
        rb_np1: &aux.res_b[n + 1],
        sum_ra: sum_ra_below(&aux.res_a, n, bits),
    }
}

/// Route-agreement reports `(s11)`: `R_n = 2 α_n` and `(s23)`: `r_n = 2 β_n - n`,
/// comparing the definition-route aux against the recurrence coefficients.
pub fn check_route_agreement(
    aux: &AuxSingle,
    sys: &OrthoSystem,
    n: usize,
) -> Result<Vec<IdentityReport>> {
    if n > sys.n_max {
        return Err(Error::IndexOutOfRange { n, n_max: sys.n_max });
    }
    let bits = sys.ctx.bits;
    let t = vec![aux.t1.to_f64()];
    let zero = Real::new(bits);
    let s11 = kernel_s11(bits, &aux.res_a[n], &zero, &sys.alpha[n]);
    let s23 = kernel_s23(bits, n, &sys.beta[n], &aux.res_b[n], &zero);
    Ok(vec![
        IdentityReport::from_terms("S11", n, t.clone(), &s11, IdentityClass::Algebraic, &sys.ctx),
        IdentityReport::from_terms("S23", n, t, &s23, IdentityClass::Algebraic, &sys.ctx),
    ])
}

/// String relations `(s12)`, `(s21)`, `(s22a)`, `(s22)`, `(s121)`, `(s211)`
/// at one `n` (`1 <= n <= n_max - 1`).
pub fn check_string_single(
    aux: &AuxSingle,
    sys: &OrthoSystem,
    n: usize,
) -> Result<Vec<IdentityReport>> {
    if n == 0 || n + 1 > aux.n_max {
        return Err(Error::IndexOutOfRange { n, n_max: aux.n_max });
    }
    let bits = sys.ctx.bits;
    let ctx = &sys.ctx;
    let t = vec![aux.t1.to_f64()];
    let j = single_jump_data(aux, n, bits);
    let mut out = Vec::new();
    out.push(IdentityReport::from_terms(
        "S12",
        n,
        t.clone(),
        &kernel_s12(bits, &j, &sys.alpha[n]),
        IdentityClass::Algebraic,
        ctx,
    ));
    out.push(IdentityReport::from_terms(
        "S21",
        n,
        t.clone(),
        &kernel_s21(bits, &j, &sys.beta[n]),
        IdentityClass::Algebraic,
        ctx,
    ));
    out.push(IdentityReport::from_terms(
        "S22:unreduced",
        n,
        t.clone(),
        &kernel_s22a(bits, &j, None, &sys.beta[n]),
        IdentityClass::Algebraic,
        ctx,
    ));
    match kernel_s22(bits, n, &j) {
        Some(terms) => out.push(IdentityReport::from_terms(
            "S22",
            n,
            t.clone(),
            &terms,
            IdentityClass::Algebraic,
            ctx,
        )),
        None => out.push(IdentityReport::skipped(
            "S22",
            n,
            t.clone(),
            IdentityClass::Algebraic,
            ctx,
            "R_n = 0 with r_n != 0",
        )),
    }
    // (s121): r_{n+1} + r_n - (t - R_n/2) R_n
    {
        let mut half = aux.res_a[n].clone();
        half /= 2u32;
        let mut f = Real::with_val(bits, &aux.t1 - &half);
        f *= &aux.res_a[n];
        f = -f;
        out.push(IdentityReport::from_terms(
            "S121",
            n,
            t.clone(),
            &[aux.res_b[n + 1].clone(), aux.res_b[n].clone(), f],
            IdentityClass::Algebraic,
            ctx,
        ));
    }
    // (s211): r_n² - (n + r_n) R_n R_{n-1} / 2
    {
        let sq = prod(bits, &aux.res_b[n], &aux.res_b[n]);
        let mut f = Real::with_val(bits, n as u64);
        f += &aux.res_b[n];
        f *= &prod(bits, &aux.res_a[n], &aux.res_a[n - 1]);
        f /= 2u32;
        f = -f;
        out.push(IdentityReport::from_terms(
            "S211",
            n,
            t,
            &[sq, f],
            IdentityClass::Algebraic,
            ctx,
        ));
    }
    Ok(out)
}

/// The squared-form second-order difference equations `(dr)`, `(dr1)` and the
/// discrete σ form, exactly as printed (`1 <= n <= n_max - 1`).
pub fn check_difference(aux: &AuxSingle, ctx: &PrecisionContext, n: usize) -> Result<Vec<IdentityReport>> {
    if n == 0 || n + 1 > aux.n_max {
        return Err(Error::IndexOutOfRange { n, n_max: aux.n_max });
    }
    let bits = ctx.bits;
    let tvec = vec![aux.t1.to_f64()];
    let t = &aux.t1;
    let nn = Real::with_val(bits, n as u64);
    let mut out = Vec::new();

    // (dr) for r_n
    {
        let r = |k: usize| &aux.res_b[k];
        let npr = Real::with_val(bits, &nn + r(n)); // n + r_n
        let npr2 = prod(bits, &npr, &npr);
        let t2 = prod(bits, t, t);
        // lhs inner: (n+r)² (r_{n-1}+r_n-t²) r_{n+1} + (n+r)² r_n r_{n-1}
        //            + 2n r_n³ - n(t²-n) r_n² - n² t² r_n
        let mut inner = Real::with_val(bits, r(n - 1) + r(n));
        inner -= &t2;
        inner *= r(n + 1);
        inner *= &npr2;
        let mut t_b = prod(bits, r(n), r(n - 1));
        t_b *= &npr2;
        inner += &t_b;
        let mut t_c = prod(bits, r(n), r(n));
        t_c *= r(n);
        t_c *= &nn;
        t_c *= 2u32;
        inner += &t_c;
        let mut t_d = Real::with_val(bits, &t2 - &nn);
        t_d *= &prod(bits, r(n), r(n));
        t_d *= &nn;
        inner -= &t_d;
        let mut t_e = prod(bits, &nn, &nn);
        t_e *= &t2;
        t_e *= r(n);
        inner -= &t_e;
        let lhs = prod(bits, &inner, &inner);
        // rhs: t²(n+r)²(t² - 2r_{n-1} - 2r_n)[n r_n + (n+r) r_{n+1}]²
        let mut gap = t2.clone();
        let mut tw = r(n - 1).clone();
        tw *= 2u32;
        gap -= &tw;
        tw.assign(r(n));
        tw *= 2u32;
        gap -= &tw;
        let mut bracket = prod(bits, &nn, r(n));
        let mut t_f = prod(bits, &npr, r(n + 1));
        bracket += &t_f;
        t_f.assign(&bracket * &bracket);
        let mut rhs = prod(bits, &t2, &npr2);
        rhs *= &gap;
        rhs *= &t_f;
        rhs = -rhs;
        out.push(IdentityReport::from_terms(
            "DIFF_R",
            n,
            tvec.clone(),
            &[lhs, rhs],
            IdentityClass::Algebraic,
            ctx,
        ));
    }

    // (dr1) for R_n
    {
        let rr = |k: usize| &aux.res_a[k];
        // inner: (2R² - 4tR + R_{n-1}R - 4n - 4) R_{n+1}
        //        + 2(R² - 2tR - 2n) R_{n-1} + 2R(R-2t)²
        let r2 = prod(bits, rr(n), rr(n));
        let mut tr = prod(bits, t, rr(n));
        let mut g1 = r2.clone();
        g1 *= 2u32;
        let mut t4 = tr.clone();
        t4 *= 4u32;
        g1 -= &t4;
        g1 += &prod(bits, rr(n - 1), rr(n));
        g1 -= Real::with_val(bits, 4 * n as u64 + 4);
        g1 *= rr(n + 1);
        let mut g2 = r2.clone();
        tr *= 2u32;
        g2 -= &tr;
        g2 -= Real::with_val(bits, 2 * n as u64);
        g2 *= rr(n - 1);
        g2 *= 2u32;
        let mut g3 = Real::with_val(bits, t + t);
        g3 = Real::with_val(bits, rr(n) - &g3);
        g3.square_mut();
        g3 *= rr(n);
        g3 *= 2u32;
        let mut inner = g1;
        inner += &g2;
        inner += &g3;
        let lhs = prod(bits, &inner, &inner);
        // rhs: R_{n-1} R_{n+1} (R_{n-1}R_n + 8n)(R_n R_{n+1} + 8n + 8)
        let mut f1 = prod(bits, rr(n - 1), rr(n));
        f1 += Real::with_val(bits, 8 * n as u64);
        let mut f2 = prod(bits, rr(n), rr(n + 1));
        f2 += Real::with_val(bits, 8 * n as u64 + 8);
        let mut rhs = prod(bits, rr(n - 1), rr(n + 1));
        rhs *= &f1;
        rhs *= &f2;
        rhs = -rhs;
        out.push(IdentityReport::from_terms(
            "DIFF_RCAP",
            n,
            tvec.clone(),
            &[lhs, rhs],
            IdentityClass::Algebraic,
            ctx,
        ));
    }

    // discrete σ form:
    // 2[σ_n + n(σ_{n-1} - σ_{n+1})]² =
    //   (σ_n - σ_{n+1})(σ_{n-1} - σ_n)(σ_n + 2nt)(σ_{n+1} - σ_{n-1} + 2t)
    {
        let s = |k: usize| &aux.sigma[k];
        let mut inner = Real::with_val(bits, s(n - 1) - s(n + 1));
        inner *= &nn;
        inner += s(n);
        let mut lhs = prod(bits, &inner, &inner);
        lhs *= 2u32;
        let d1 = Real::with_val(bits, s(n) - s(n + 1));
        let d2 = Real::with_val(bits, s(n - 1) - s(n));
        let mut f3 = Real::with_val(bits, t + t);
        f3 *= &nn;
        f3 += s(n);
        let mut f4 = Real::with_val(bits, t + t);
        f4 += s(n + 1);
        f4 -= s(n - 1);
        let mut rhs = prod(bits, &d1, &d2);
        rhs *= &f3;
        rhs *= &f4;
        rhs = -rhs;
        out.push(IdentityReport::from_terms(
            "DISCRETE_SIGMA",
            n,
            tvec,
            &[lhs, rhs],
            IdentityClass::Algebraic,
            ctx,
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// finite-difference rebuild plumbing
// ---------------------------------------------------------------------------

/// Cache of rebuilt systems at finite-difference stencil points (the same
/// stencil t is requested by several quantity extractors).
struct RebuildCache {
    spec: WeightSpec,
    n_local: usize,
    ctx: PrecisionContext,
    vary_t2: bool,
    entries: Vec<(Real, Rc<(OrthoSystem, AuxDouble)>)>,
}

impl RebuildCache {
    fn new(spec: &WeightSpec, n_local: usize, ctx: PrecisionContext, vary_t2: bool) -> Self {
        Self {
            spec: spec.clone(),
            n_local,
            ctx,
            vary_t2,
            entries: Vec::new(),
        }
    }

    fn get(&mut self, t: &Real) -> Result<Rc<(OrthoSystem, AuxDouble)>> {
        for (key, val) in &self.entries {
            if key == t {
                return Ok(val.clone());
            }
        }
        let spec = if self.vary_t2 {
            self.spec.at_t2(t)
        } else {
            self.spec.at_t1(t)
        };
        let sys = build_system(&spec, self.n_local, &self.ctx)?;
        let aux = AuxDouble::from_definitions(&sys)?;
        let rc = Rc::new((sys, aux));
        self.entries.push((t.clone(), rc.clone()));
        Ok(rc)
    }
}

/// FD a scalar extracted from rebuilt systems along t1 (or t2).
fn fd_quantity(
    cache: &mut RebuildCache,
    at: &Real,
    order: FdOrder,
    ctx: &PrecisionContext,
    extract: impl Fn(&OrthoSystem, &AuxDouble) -> Real,
) -> Result<Real> {
    fd_derivative(
        |t| {
            let entry = cache.get(t)?;
            Ok(extract(&entry.0, &entry.1))
        },
        at,
        order,
        ctx,
    )
}

// ---------------------------------------------------------------------------
// Riccati / Toda and second-order ODE checks (single jump)
// ---------------------------------------------------------------------------

/// Riccati `(ri1)`, `(ri2)` and Toda `(toda1)`, `(toda2)` residuals at one
/// `n`, with the FD first derivatives also reconciled against the paper's
/// exact forms (`(hn)`, `(dp)`, `(rnt)`, `(e1)`).
pub fn check_riccati_toda(
    aux: &AuxSingle,
    sys: &OrthoSystem,
    n: usize,
    ctx: &PrecisionContext,
) -> Result<Vec<IdentityReport>> {
    if n == 0 || n + 1 > sys.n_max {
        return Err(Error::IndexOutOfRange { n, n_max: sys.n_max });
    }
    if !sys.spec.single_jump() {
        return Err(Error::SingleJumpRequired);
    }
    let bits = ctx.bits;
    let tvec = vec![aux.t1.to_f64()];
    let t1 = aux.t1.clone();
    let mut cache = RebuildCache::new(&sys.spec, n + 2, *ctx, false);

    let d_rb = fd_quantity(&mut cache, &t1, FdOrder::First, ctx, |_, a| a.res_b1[n].clone())?;
    let d_ra = fd_quantity(&mut cache, &t1, FdOrder::First, ctx, |_, a| a.res_a1[n].clone())?;
    let d_beta = fd_quantity(&mut cache, &t1, FdOrder::First, ctx, |s, _| s.beta[n].clone())?;
    let d_alpha = fd_quantity(&mut cache, &t1, FdOrder::First, ctx, |s, _| s.alpha[n].clone())?;
    let d_lnh = fd_quantity(&mut cache, &t1, FdOrder::First, ctx, |s, _| {
        Real::with_val(s.ctx.bits, s.h[n].ln_ref())
    })?;
    let d_p1 = fd_quantity(&mut cache, &t1, FdOrder::First, ctx, |s, _| s.p1[n].clone())?;
    let d_sigma = fd_quantity(&mut cache, &t1, FdOrder::First, ctx, |s, _| {
        let mut v = s.p1[n].clone();
        v *= 2u32;
        v
    })?;

    let mut out = Vec::new();
    // (ri1): r' = 2r²/R - (n + r) R
    if aux.res_a[n].is_zero() && !aux.res_b[n].is_zero() {
        out.push(IdentityReport::skipped(
            "RICCATI_R",
            n,
            tvec.clone(),
            IdentityClass::SingleFd,
            ctx,
            "R_n = 0 with r_n != 0",
        ));
    } else {
        let divterm = if aux.res_a[n].is_zero() {
            Real::new(bits)
        } else {
            let mut v = prod(bits, &aux.res_b[n], &aux.res_b[n]);
            v *= 2u32;
            v /= &aux.res_a[n];
            v = -v;
            v
        };
        let mut last = Real::with_val(bits, n as u64);
        last += &aux.res_b[n];
        last *= &aux.res_a[n];
        out.push(IdentityReport::from_terms(
            "RICCATI_R",
            n,
            tvec.clone(),
            &[d_rb.clone(), divterm, last],
            IdentityClass::SingleFd,
            ctx,
        ));
    }
    // (ri2): R' = R² - 2tR + 4r
    {
        let mut sq = prod(bits, &aux.res_a[n], &aux.res_a[n]);
        sq = -sq;
        let mut lin = prod(bits, &t1, &aux.res_a[n]);
        lin *= 2u32;
        let mut r4 = aux.res_b[n].clone();
        r4 *= 4u32;
        r4 = -r4;
        out.push(IdentityReport::from_terms(
            "RICCATI_RCAP",
            n,
            tvec.clone(),
            &[d_ra.clone(), sq, lin, r4],
            IdentityClass::SingleFd,
            ctx,
        ));
    }
    // (toda1): β' = 2β(α_{n-1} - α_n)
    {
        let mut f = Real::with_val(bits, &sys.alpha[n - 1] - &sys.alpha[n]);
        f *= &sys.beta[n];
        f *= 2u32;
        f = -f;
        out.push(IdentityReport::from_terms(
            "TODA1",
            n,
            tvec.clone(),
            &[d_beta.clone(), f],
            IdentityClass::SingleFd,
            ctx,
        ));
    }
    // (toda2): α' = 2(β_n - β_{n+1}) + 1
    {
        let mut f = Real::with_val(bits, &sys.beta[n] - &sys.beta[n + 1]);
        f *= 2u32;
        f = -f;
        out.push(IdentityReport::from_terms(
            "TODA2",
            n,
            tvec.clone(),
            &[d_alpha, f, Real::with_val(bits, -1)],
            IdentityClass::SingleFd,
            ctx,
        ));
    }
    // exact-form reconciliations
    out.push(IdentityReport::from_terms(
        "RICCATI_RCAP:dlnh",
        n,
        tvec.clone(),
        &[d_lnh, aux.res_a[n].clone()],
        IdentityClass::SingleFd,
        ctx,
    ));
    {
        let mut m = aux.res_b[n].clone();
        m = -m;
        out.push(IdentityReport::from_terms(
            "RICCATI_R:dp",
            n,
            tvec.clone(),
            &[d_p1, m],
            IdentityClass::SingleFd,
            ctx,
        ));
    }
    {
        let mut m = aux.res_b[n].clone();
        m *= 2u32;
        m = -m;
        out.push(IdentityReport::from_terms(
            "RICCATI_R:dsigma",
            n,
            tvec.clone(),
            &[d_sigma, m],
            IdentityClass::SingleFd,
            ctx,
        ));
    }
    {
        let mut f = Real::with_val(bits, &aux.res_a[n - 1] - &aux.res_a[n]);
        f *= &sys.beta[n];
        f = -f;
        out.push(IdentityReport::from_terms(
            "TODA1:dbeta",
            n,
            tvec,
            &[d_beta, f],
            IdentityClass::SingleFd,
            ctx,
        ));
    }
    Ok(out)
}

/// Second-order ODE residuals at one `n`: `(sod)` for `R_n`, `(difr)` for
/// `r_n`, the σ form `(jmo)`, and the substituted Painlevé IV / Chazy II
/// forms as distinct reports.
pub fn check_ode(
    aux: &AuxSingle,
    sys: &OrthoSystem,
    n: usize,
    ctx: &PrecisionContext,
) -> Result<Vec<IdentityReport>> {
    if n == 0 || n + 1 > sys.n_max {
        return Err(Error::IndexOutOfRange { n, n_max: sys.n_max });
    }
    if !sys.spec.single_jump() {
        return Err(Error::SingleJumpRequired);
    }
    let bits = ctx.bits;
    let tvec = vec![aux.t1.to_f64()];
    let t1 = aux.t1.clone();
    let mut cache = RebuildCache::new(&sys.spec, n + 2, *ctx, false);

    let ra = aux.res_a[n].clone();
    let rb = aux.res_b[n].clone();
    let sg = aux.sigma[n].clone();
    let d1_ra = fd_quantity(&mut cache, &t1, FdOrder::First, ctx, |_, a| a.res_a1[n].clone())?;
    let d2_ra = fd_quantity(&mut cache, &t1, FdOrder::Second, ctx, |_, a| a.res_a1[n].clone())?;
    let d1_rb = fd_quantity(&mut cache, &t1, FdOrder::First, ctx, |_, a| a.res_b1[n].clone())?;
    let d2_rb = fd_quantity(&mut cache, &t1, FdOrder::Second, ctx, |_, a| a.res_b1[n].clone())?;
    let d2_sg = fd_quantity(&mut cache, &t1, FdOrder::Second, ctx, |s, _| {
        let mut v = s.p1[n].clone();
        v *= 2u32;
        v
    })?;
    let d1_sg = {
        let mut v = rb.clone();
        v *= 2u32;
        v
    };

    let mut out = Vec::new();

    // (sod): R'' = (R')²/(2R) + (3/2)R³ - 4tR² + 2(t² - 2n - 1)R
    let sod_terms = |tt: &Real, sign_4t: bool, two_n_plus: u64| -> Option<Vec<Real>> {
        if ra.is_zero() {
            return None;
        }
        let mut q = prod(bits, &d1_ra, &d1_ra);
        q /= &ra;
        q /= 2u32;
        q = -q;
        let mut cube = prod(bits, &ra, &ra);
        cube *= &ra;
        cube *= 3u32;
        cube /= 2u32;
        cube = -cube;
        let mut quad = prod(bits, &ra, &ra);
        quad *= tt;
        quad *= 4u32;
        if !sign_4t {
            quad = -quad;
        }
        let mut lin = prod(bits, tt, tt);
        lin -= Real::with_val(bits, two_n_plus);
        lin *= &ra;
        lin *= 2u32;
        lin = -lin;
        Some(vec![d2_ra.clone(), q, cube, quad, lin])
    };
    match sod_terms(&t1, true, 2 * n as u64 + 1) {
        Some(terms) => out.push(IdentityReport::from_terms(
            "PIV_ODE",
            n,
            tvec.clone(),
            &terms,
            IdentityClass::SingleFd,
            ctx,
        )),
        None => out.push(IdentityReport::skipped(
            "PIV_ODE",
            n,
            tvec.clone(),
            IdentityClass::SingleFd,
            ctx,
            "R_n = 0",
        )),
    }

    // substituted PIV at y(τ) = R_n(-τ), τ = -t1, (α₁, β₁) = (2n+1, 0):
    // y'' - (y')²/(2y) - (3/2)y³ - 4τ y² - 2(τ² - α₁) y  (β₁/y term exactly 0)
    {
        let tau = Real::with_val(bits, -&t1);
        let (alpha1, _beta1) = IdentitySpec::piv_params(n, bits);
        if ra.is_zero() {
            out.push(IdentityReport::skipped(
                "PIV_ODE:p4",
                n,
                tvec.clone(),
                IdentityClass::SingleFd,
                ctx,
                "R_n = 0",
            ));
        } else {
            // y = R, y' = -R', y'' = R''
            let mut q = prod(bits, &d1_ra, &d1_ra);
            q /= &ra;
            q /= 2u32;
            q = -q;
            let mut cube = prod(bits, &ra, &ra);
            cube *= &ra;
            cube *= 3u32;
            cube /= 2u32;
            cube = -cube;
            let mut quad = prod(bits, &ra, &ra);
            quad *= &tau;
            quad *= 4u32;
            quad = -quad;
            let mut lin = prod(bits, &tau, &tau);
            lin -= &alpha1;
            lin *= &ra;
            lin *= 2u32;
            lin = -lin;
            out.push(IdentityReport::from_terms(
                "PIV_ODE:p4",
                n,
                tvec.clone(),
                &[d2_ra.clone(), q, cube, quad, lin],
                IdentityClass::SingleFd,
                ctx,
            ));
        }
    }

    // (difr): [r'' + 12r² + 8nr]² = 4t²[(r')² + 8r³ + 8nr²]
    {
        let mut inner = prod(bits, &rb, &rb);
        inner *= 12u32;
        inner += &d2_rb;
        let mut f = rb.clone();
        f *= 8 * n as u64;
        inner += &f;
        let lhs = prod(bits, &inner, &inner);
        let mut disc = prod(bits, &d1_rb, &d1_rb);
        let mut c = prod(bits, &rb, &rb);
        c *= &rb;
        c *= 8u32;
        disc += &c;
        c.assign(&rb * &rb);
        c *= 8 * n as u64;
        disc += &c;
        let mut rhs = prod(bits, &t1, &t1);
        rhs *= 4u32;
        rhs *= &disc;
        rhs = -rhs;
        out.push(IdentityReport::from_terms(
            "CHAZY",
            n,
            tvec.clone(),
            &[lhs, rhs],
            IdentityClass::SingleFd,
            ctx,
        ));
    }

    // Chazy II for v = -2r - 2n/3: (v'' - 6v² - α₂)² = 4t²((v')² - 4v³ - 2α₂v - β₂).
    // (Substituting r = -v/2 - n/3 into (difr) gives (v')² in the right
    // bracket; the printed v'' there is not an identity.)
    {
        let (alpha2, beta2) = IdentitySpec::chazy_params(n, bits);
        let mut v = rb.clone();
        v *= 2u32;
        v = -v;
        let mut shift = Real::with_val(bits, 2 * n as u64);
        shift /= 3u32;
        v -= &shift;
        let mut vp = d1_rb.clone();
        vp *= 2u32;
        vp = -vp;
        let mut vpp = d2_rb.clone();
        vpp *= 2u32;
        vpp = -vpp;
        let mut inner = prod(bits, &v, &v);
        inner *= 6u32;
        inner = -inner;
        inner += &vpp;
        inner -= &alpha2;
        let lhs = prod(bits, &inner, &inner);
        let mut rhs_inner = prod(bits, &v, &v);
        rhs_inner *= &v;
        rhs_inner *= 4u32;
        rhs_inner = -rhs_inner;
        rhs_inner += &prod(bits, &vp, &vp);
        let mut c = prod(bits, &alpha2, &v);
        c *= 2u32;
        rhs_inner -= &c;
        rhs_inner -= &beta2;
        let mut rhs = prod(bits, &t1, &t1);
        rhs *= 4u32;
        rhs *= &rhs_inner;
        rhs = -rhs;
        out.push(IdentityReport::from_terms(
            "CHAZY:chazy2",
            n,
            tvec.clone(),
            &[lhs, rhs],
            IdentityClass::SingleFd,
            ctx,
        ));
    }

    // (jmo): (σ'')² = 4(tσ' - σ)² - 4(σ' + ν₀)(σ' + ν₁)(σ' + ν₂)
    out.push(IdentityReport::from_terms(
        "SIGMA_FORM",
        n,
        tvec,
        &kernel_jmo(bits, n, &t1, &sg, &d1_sg, &d2_sg),
        IdentityClass::SingleFd,
        ctx,
    ));
    Ok(out)
}

/// `(§4)` conclusion relations: `σ_n = (ln D_n)'`, `r_n = σ_n'/2`,
/// `R_n = (2tσ' - 2σ - σ'')/(4n + 2σ')`, all against FD derivatives.
pub fn check_conclusion_relations(
    aux: &AuxSingle,
    sys: &OrthoSystem,
    n: usize,
    ctx: &PrecisionContext,
) -> Result<Vec<IdentityReport>> {
    if n == 0 || n > sys.n_max {
        return Err(Error::IndexOutOfRange { n, n_max: sys.n_max });
    }
    let bits = ctx.bits;
    let tvec = vec![aux.t1.to_f64()];
    let t1 = aux.t1.clone();
    let mut cache = RebuildCache::new(&sys.spec, n + 1, *ctx, false);

    let d_lnd = fd_quantity(&mut cache, &t1, FdOrder::First, ctx, |s, _| s.log_d[n].clone())?;
    let d1_sg = fd_quantity(&mut cache, &t1, FdOrder::First, ctx, |s, _| {
        let mut v = s.p1[n].clone();
        v *= 2u32;
        v
    })?;
    let d2_sg = fd_quantity(&mut cache, &t1, FdOrder::Second, ctx, |s, _| {
        let mut v = s.p1[n].clone();
        v *= 2u32;
        v
    })?;

    let mut out = Vec::new();
    {
        let mut m = aux.sigma[n].clone();
        m = -m;
        out.push(IdentityReport::from_terms(
            "CONCLUSION_RELATIONS:sigma_dlnd",
            n,
            tvec.clone(),
            &[d_lnd, m],
            IdentityClass::SingleFd,
            ctx,
        ));
    }
    {
        let mut half = d1_sg.clone();
        half /= 2u32;
        let mut m = aux.res_b[n].clone();
        m = -m;
        out.push(IdentityReport::from_terms(
            "CONCLUSION_RELATIONS:r_dsigma",
            n,
            tvec.clone(),
            &[half, m],
            IdentityClass::SingleFd,
            ctx,
        ));
    }
    {
        let mut den = d1_sg.clone();
        den *= 2u32;
        den += Real::with_val(bits, 4 * n as u64);
        let mut floor = ctx.tol_fd1();
        floor *= Real::with_val(bits, 4 * n as u64);
        if den.clone().abs() < floor {
            out.push(IdentityReport::skipped(
                "CONCLUSION_RELATIONS:r_recover",
                n,
                tvec,
                IdentityClass::SingleFd,
                ctx,
                "4n + 2σ' near zero",
            ));
        } else {
            let mut num = prod(bits, &t1, &d1_sg);
            num *= 2u32;
            let mut s2 = aux.sigma[n].clone();
            s2 *= 2u32;
            num -= &s2;
            num -= &d2_sg;
            num /= &den;
            let mut m = aux.res_a[n].clone();
            m = -m;
            out.push(IdentityReport::from_terms(
                "CONCLUSION_RELATIONS:r_recover",
                n,
                tvec,
                &[num, m],
                IdentityClass::SingleFd,
                ctx,
            ));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// exact pre-limit ODE and limit properties
// ---------------------------------------------------------------------------

/// Residual terms of the exact finite-n ODE `(ode1)` satisfied by `P_n(z)`,
/// with `R_n'` supplied by the exact Riccati relation.  This is an algebraic
/// check: it must vanish to `tol` at any finite n.
pub fn ode1_residual_terms(
    sys: &OrthoSystem,
    aux: &AuxSingle,
    n: usize,
    z: &Real,
) -> Result<Vec<Real>> {
    let bits = sys.ctx.bits;
    let t1 = &aux.t1;
    let ra = &aux.res_a[n];
    if ra.is_zero() {
        return Err(Error::ConsistencyFailure("R_n = 0 in (ode1)".into()));
    }
    // R' from (ri2)
    let mut rap = prod(bits, ra, ra);
    let mut w = prod(bits, t1, ra);
    w *= 2u32;
    rap -= &w;
    w.assign(&aux.res_b[n] * &Real::with_val(bits, 4));
    rap += &w;

    let (p, d1, d2) = eval_poly_derivs(sys, n, z)?;
    let zt = Real::with_val(bits, z - t1);
    let mut denom2 = Real::with_val(bits, z - t1);
    denom2 *= 2u32;
    denom2 += ra; // 2z - 2t + R
    let zt2 = prod(bits, &zt, &zt);

    // common combo: R' - R² + 2tR
    let mut combo = rap.clone();
    let mut w2 = prod(bits, ra, ra);
    combo -= &w2;
    w2.assign(t1 * ra);
    w2 *= 2u32;
    combo += &w2;

    let mut terms = Vec::new();
    terms.push(d2);
    // P' * ( R/((z-t)(2z-2t+R)) - 2z )
    {
        let mut c = Real::with_val(bits, ra / &zt);
        c /= &denom2;
        c *= &d1;
        terms.push(c);
        let mut c2 = Real::with_val(bits, z + z);
        c2 *= &d1;
        c2 = -c2;
        terms.push(c2);
    }
    // P * [ 2n - combo/(4(z-t)²) + R combo/(4(z-t)²(2z-2t+R))
    //       + ((R')² - R⁴ + 4tR³ + (8n - 4t²)R²)/(8(z-t)R) ]
    {
        let mut c = Real::with_val(bits, 2 * n as u64);
        c *= &p;
        terms.push(c);

        let mut c2 = Real::with_val(bits, &combo / &zt2);
        c2 /= 4u32;
        c2 *= &p;
        c2 = -c2;
        terms.push(c2);

        let mut c3 = Real::with_val(bits, ra * &combo);
        c3 /= &zt2;
        c3 /= 4u32;
        c3 /= &denom2;
        c3 *= &p;
        terms.push(c3);

        let r2 = prod(bits, ra, ra);
        let mut big = prod(bits, &rap, &rap);
        let mut r4 = prod(bits, &r2, &r2);
        big -= &r4;
        r4.assign(&r2 * ra);
        r4 *= t1;
        r4 *= 4u32;
        big += &r4;
        let mut tt = prod(bits, t1, t1);
        tt *= 4u32;
        let mut f = Real::with_val(bits, 8 * n as u64);
        f -= &tt;
        f *= &r2;
        big += &f;
        big /= &zt;
        big /= ra;
        big /= 8u32;
        big *= &p;
        terms.push(big);
    }
    Ok(terms)
}

/// Exact `(ode1)` residual reports plus the biconfluent-Heun and Hermite
/// limit properties.
///
/// The exact part evaluates `(ode1)` at finite n (algebraic tolerance).  The
/// asymptotic parts report ratios `res(n_{k+1})/res(n_k)` of the BHE residual
/// of `P̂_n(u) = P_n(u/√2 + t1)` and of the Hermite residual under the
/// edge double scaling; ratio < 1 means the residual decreases with n.
#[allow(clippy::too_many_arguments)]
pub fn check_limits(
    spec: &WeightSpec,
    exact_n: usize,
    z_exact: &[Real],
    u: &Real,
    z_herm: &Real,
    s_herm: f64,
    n_list: &[usize],
    ctx: &PrecisionContext,
) -> Result<Vec<IdentityReport>> {
    if !spec.single_jump() {
        return Err(Error::SingleJumpRequired);
    }
    let mut out = Vec::new();
    // (a) exact (ode1) at finite n
    {
        let sys = build_system(spec, exact_n + 1, ctx)?;
        let aux = AuxSingle::from_definitions(&sys)?;
        for z in z_exact {
            let terms = ode1_residual_terms(&sys, &aux, exact_n, z)?;
            let mut rep = IdentityReport::from_terms(
                "BHE_LIMIT:ode1_exact",
                exact_n,
                vec![spec.t1.to_f64()],
                &terms,
                IdentityClass::Algebraic,
                ctx,
            );
            rep.t.push(z.to_f64());
            out.push(rep);
        }
    }
    // (b) BHE residual ratios at fixed u
    {
        let digits = 30;
        let mut residuals = Vec::new();
        for &n in n_list {
            let sys = build_system_large(spec, n + 1, digits)?;
            let bits = sys.ctx.bits;
            let (_, delta, alpha_p, q) =
                IdentitySpec::bhe_params(n, &spec.t1, spec.b1.is_sign_positive(), bits);
            // z = u/sqrt(2) + t1
            let mut z = Real::with_val(bits, u);
            z /= Real::with_val(bits, 2).sqrt();
            z += &spec.t1;
            let (p, d1, d2) = eval_poly_derivs(&sys, n, &z)?;
            // P̂'' = P''/2 ; P̂' = P'/√2
            let mut t_a = d2;
            t_a /= 2u32;
            let mut coeff = Real::with_val(bits, -1); // γ = -1
            coeff /= u;
            coeff += &delta;
            coeff += u;
            let mut t_b = d1;
            t_b /= Real::with_val(bits, 2).sqrt();
            t_b *= &coeff;
            t_b = -t_b;
            let mut t_c = Real::with_val(bits, &alpha_p * u);
            t_c -= &q;
            t_c /= u;
            t_c *= &p;
            let rep = IdentityReport::from_terms(
                "BHE_LIMIT:residual",
                n,
                vec![spec.t1.to_f64(), u.to_f64()],
                &[t_a, t_b, t_c],
                IdentityClass::Property,
                ctx,
            );
            residuals.push((n, rep.residual.clone()));
        }
        for pair in residuals.windows(2) {
            let (n0, r0) = &pair[0];
            let (n1, r1) = &pair[1];
            let ratio = if r0.is_zero() {
                Real::new(64)
            } else {
                Real::with_val(r1.prec(), r1 / r0)
            };
            let pass = ratio < 1;
            out.push(IdentityReport {
                id: format!("BHE_LIMIT:ratio_{n0}_{n1}"),
                n: *n1,
                t: vec![spec.t1.to_f64(), u.to_f64()],
                residual: ratio,
                tolerance: Real::with_val(64, 1),
                class: IdentityClass::Property,
                pass,
                skipped: None,
            });
        }
    }
    // (c) Hermite residual under double scaling, decreasing in n
    {
        let digits = 30;
        let mut residuals = Vec::new();
        for &n in n_list {
            let bits_t = 2048;
            let mut t1n = Real::with_val(bits_t, 2 * n as u64);
            t1n = t1n.sqrt();
            let mut corr = Real::with_val(bits_t, s_herm);
            corr /= Real::with_val(bits_t, 2).sqrt();
            corr /= Real::with_val(bits_t, n as u64).pow_u(1).root(6);
            t1n += &corr;
            let sys = build_system_large(&spec.at_t1(&t1n), n + 1, digits)?;
            let bits = sys.ctx.bits;
            let (p, d1, d2) = eval_poly_derivs(&sys, n, z_herm)?;
            let mut t_b = Real::with_val(bits, z_herm + z_herm);
            t_b *= &d1;
            t_b = -t_b;
            let mut t_c = Real::with_val(bits, 2 * n as u64);
            t_c *= &p;
            let rep = IdentityReport::from_terms(
                "HERMITE_LIMIT:residual",
                n,
                vec![z_herm.to_f64(), s_herm],
                &[d2, t_b, t_c],
                IdentityClass::Property,
                ctx,
            );
            residuals.push((n, rep.residual.clone()));
        }
        for pair in residuals.windows(2) {
            let (n0, r0) = &pair[0];
            let (n1, r1) = &pair[1];
            let ratio = if r0.is_zero() {
                Real::new(64)
            } else {
                Real::with_val(r1.prec(), r1 / r0)
            };
            let pass = ratio < 1;
            out.push(IdentityReport {
                id: format!("HERMITE_LIMIT:ratio_{n0}_{n1}"),
                n: *n1,
                t: vec![z_herm.to_f64(), s_herm],
                residual: ratio,
                tolerance: Real::with_val(64, 1),
                class: IdentityClass::Property,
                pass,
                skipped: None,
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// two-jump suite
// ---------------------------------------------------------------------------

fn double_jump_data<'a>(aux: &'a AuxDouble, n: usize, bits: u32) -> (JumpData<'a>, JumpData<'a>) {
    (
        JumpData {
            t: &aux.t1,
            ra_n: &aux.res_a1[n],
            ra_nm1: &aux.res_a1[n - 1],
            rb_n: &aux.res_b1[n],
            rb_np1: &aux.res_b1[n + 1],
            sum_ra: sum_ra_below(&aux.res_a1, n, bits),
        },
        JumpData {
            t: &aux.t2,
            ra_n: &aux.res_a2[n],
            ra_nm1: &aux.res_a2[n - 1],
            rb_n: &aux.res_b2[n],
            rb_np1: &aux.res_b2[n + 1],
            sum_ra: sum_ra_below(&aux.res_a2, n, bits),
        },
    )
}

/// Two-jump string relations, the two-variable Toda pair, the quartic σ-PDE
/// `(equ)` and its `(p41)` reduction, at one `n`.
pub fn check_two_jump(
    aux: &AuxDouble,
    sys: &OrthoSystem,
    n: usize,
    ctx: &PrecisionContext,
) -> Result<Vec<IdentityReport>> {
    if n == 0 || n + 1 > sys.n_max {
        return Err(Error::IndexOutOfRange { n, n_max: sys.n_max });
    }
    let bits = ctx.bits;
    let tvec = vec![aux.t1.to_f64(), aux.t2.to_f64()];
    let (j1, j2) = double_jump_data(aux, n, bits);
    let two_jump = !sys.spec.b2.is_zero();
    let mut out = Vec::new();

    out.push(IdentityReport::from_terms(
        "TJ_STRING:s1e",
        n,
        tvec.clone(),
        &kernel_s11(bits, j1.ra_n, j2.ra_n, &sys.alpha[n]),
        IdentityClass::Algebraic,
        ctx,
    ));
    out.push(IdentityReport::from_terms(
        "TJ_STRING:s12_t1",
        n,
        tvec.clone(),
        &kernel_s12(bits, &j1, &sys.alpha[n]),
        IdentityClass::Algebraic,
        ctx,
    ));
    if two_jump {
        out.push(IdentityReport::from_terms(
            "TJ_STRING:s12_t2",
            n,
            tvec.clone(),
            &kernel_s12(bits, &j2, &sys.alpha[n]),
            IdentityClass::Algebraic,
            ctx,
        ));
    }
    out.push(IdentityReport::from_terms(
        "TJ_STRING:s2p1",
        n,
        tvec.clone(),
        &kernel_s23(bits, n, &sys.beta[n], j1.rb_n, j2.rb_n),
        IdentityClass::Algebraic,
        ctx,
    ));
    out.push(IdentityReport::from_terms(
        "TJ_STRING:s2p2",
        n,
        tvec.clone(),
        &kernel_s21(bits, &j1, &sys.beta[n]),
        IdentityClass::Algebraic,
        ctx,
    ));
    if two_jump {
        out.push(IdentityReport::from_terms(
            "TJ_STRING:s2p3",
            n,
            tvec.clone(),
            &kernel_s21(bits, &j2, &sys.beta[n]),
            IdentityClass::Algebraic,
            ctx,
        ));
    }
    out.push(IdentityReport::from_terms(
        "TJ_STRING:s2p4",
        n,
        tvec.clone(),
        &kernel_s22a(bits, &j1, two_jump.then_some(&j2), &sys.beta[n]),
        IdentityClass::Algebraic,
        ctx,
    ));
    if two_jump {
        out.push(IdentityReport::from_terms(
            "TJ_STRING:s2p5",
            n,
            tvec.clone(),
            &kernel_s22a(bits, &j2, Some(&j1), &sys.beta[n]),
            IdentityClass::Algebraic,
            ctx,
        ));
        out.push(IdentityReport::from_terms(
            "TJ_STRING:s2p6",
            n,
            tvec.clone(),
            &kernel_s2p6(bits, &j1, &j2, &sys.beta[n]),
            IdentityClass::Algebraic,
            ctx,
        ));
        match kernel_s2p7(bits, &j1, &j2, &sys.beta[n], &aux.sigma[n]) {
            Some(terms) => out.push(IdentityReport::from_terms(
                "TJ_STRING:s2p7",
                n,
                tvec.clone(),
                &terms,
                IdentityClass::Algebraic,
                ctx,
            )),
            None => out.push(IdentityReport::skipped(
                "TJ_STRING:s2p7",
                n,
                tvec.clone(),
                IdentityClass::Algebraic,
                ctx,
                "R_{n,i} = 0 with r_{n,i} != 0",
            )),
        }
    }

    // two-variable Toda: FD partials along each axis
    let mut cache1 = RebuildCache::new(&sys.spec, n + 2, *ctx, false);
    let mut cache2 = RebuildCache::new(&sys.spec, n + 2, *ctx, true);
    let t1 = aux.t1.clone();
    let t2 = aux.t2.clone();
    let d1_beta = fd_quantity(&mut cache1, &t1, FdOrder::First, ctx, |s, _| s.beta[n].clone())?;
    let d2_beta = fd_quantity(&mut cache2, &t2, FdOrder::First, ctx, |s, _| s.beta[n].clone())?;
    let d1_alpha = fd_quantity(&mut cache1, &t1, FdOrder::First, ctx, |s, _| s.alpha[n].clone())?;
    let d2_alpha = fd_quantity(&mut cache2, &t2, FdOrder::First, ctx, |s, _| s.alpha[n].clone())?;
    {
        let mut f = Real::with_val(bits, &sys.alpha[n - 1] - &sys.alpha[n]);
        f *= &sys.beta[n];
        f *= 2u32;
        f = -f;
        out.push(IdentityReport::from_terms(
            "TJ_TODA:toda11",
            n,
            tvec.clone(),
            &[Real::with_val(bits, &d1_beta + &d2_beta), f],
            IdentityClass::SingleFd,
            ctx,
        ));
        let mut g = Real::with_val(bits, &sys.beta[n] - &sys.beta[n + 1]);
        g *= 2u32;
        g = -g;
        out.push(IdentityReport::from_terms(
            "TJ_TODA:toda21",
            n,
            tvec.clone(),
            &[
                Real::with_val(bits, &d1_alpha + &d2_alpha),
                g,
                Real::with_val(bits, -1),
            ],
            IdentityClass::SingleFd,
            ctx,
        ));
    }

    // quartic PDE (equ): second partials of σ via FD of the exact first
    // partials 2 r_{n,i}
    {
        let d11 = fd_quantity(&mut cache1, &t1, FdOrder::First, ctx, |_, a| {
            let mut v = a.res_b1[n].clone();
            v *= 2u32;
            v
        })?;
        let d12 = fd_quantity(&mut cache2, &t2, FdOrder::First, ctx, |_, a| {
            let mut v = a.res_b1[n].clone();
            v *= 2u32;
            v
        })?;
        let d21 = fd_quantity(&mut cache1, &t1, FdOrder::First, ctx, |_, a| {
            let mut v = a.res_b2[n].clone();
            v *= 2u32;
            v
        })?;
        let d22 = fd_quantity(&mut cache2, &t2, FdOrder::First, ctx, |_, a| {
            let mut v = a.res_b2[n].clone();
            v *= 2u32;
            v
        })?;
        let mut s1 = aux.res_b1[n].clone();
        s1 *= 2u32; // ∂_{t1} σ
        let mut s2 = aux.res_b2[n].clone();
        s2 *= 2u32; // ∂_{t2} σ
        let sg = aux.sigma[n].clone();

        // mixed-partial symmetry is itself an identity worth reporting
        out.push(IdentityReport::from_terms(
            "TJ_PDE:mixed_symmetry",
            n,
            tvec.clone(),
            &[d12.clone(), {
                let mut m = d21.clone();
                m = -m;
                m
            }],
            IdentityClass::SingleFd,
            ctx,
        ));

        let bracket1 = Real::with_val(bits, &d11 + &d12); // ∂₁²σ + ∂₁∂₂σ
        let bracket2 = Real::with_val(bits, &d22 + &d21); // ∂₂²σ + ∂₂∂₁σ
        let mut depth = Real::with_val(bits, 2 * n as u64);
        depth += &s1;
        depth += &s2; // 2n + ∂₁σ + ∂₂σ

        let mut lin = prod(bits, &t1, &s1);
        let mut lin2 = prod(bits, &t2, &s2);
        lin += &lin2;
        lin -= &sg;
        lin *= 2u32; // 2t₁∂₁σ + 2t₂∂₂σ - 2σ
        lin2.assign(&lin * &lin);

        let sq1 = prod(bits, &bracket1, &bracket1);
        let sq2 = prod(bits, &bracket2, &bracket2);
        let mut q1 = prod(bits, &s1, &s1);
        q1 *= &depth;
        q1 *= 4u32; // 4(∂₁σ)²(2n+…)
        let mut q2 = prod(bits, &s2, &s2);
        q2 *= &depth;
        q2 *= 4u32;

        // normalization scale: the largest of the five constituent blocks
        let mut scale = lin2.clone().abs();
        for v in [&sq1, &sq2, &q1, &q2] {
            let a = v.clone().abs();
            if a > scale {
                scale.assign(&a);
            }
        }

        let mut inner = lin2;
        inner -= &sq1;
        inner -= &sq2;
        inner -= &q1;
        inner -= &q2;
        let lhs = prod(bits, &inner, &inner);
        let mut delta1 = sq1;
        delta1 += &q1;
        let mut delta2 = sq2;
        delta2 += &q2;
        let mut rhs = prod(bits, &delta1, &delta2);
        rhs *= 4u32;
        rhs = -rhs;

        let mut sum = Real::with_val(bits, &lhs + &rhs);
        sum = sum.abs();
        let mut scale2 = prod(bits, &scale, &scale);
        if scale2.is_zero() {
            scale2.assign(1);
        }
        sum /= &scale2;
        let tolerance = IdentityClass::MixedFd.tolerance(ctx);
        let pass = sum <= tolerance;
        out.push(IdentityReport {
            id: "TJ_PDE".into(),
            n,
            t: tvec.clone(),
            residual: sum,
            tolerance,
            class: IdentityClass::MixedFd,
            pass,
            skipped: None,
        });

        // (p41) reduction: σ independent of t2 (B2 = 0) satisfies the
        // one-variable σ form; computed exactly as the single-jump (jmo)
        // report so the reduction is bit-identical
        if !two_jump {
            let d2_sg = fd_quantity(&mut cache1, &t1, FdOrder::Second, ctx, |s, _| {
                let mut v = s.p1[n].clone();
                v *= 2u32;
                v
            })?;
            out.push(IdentityReport::from_terms(
                "TJ_PDE:p41_reduction",
                n,
                tvec.clone(),
                &kernel_jmo(bits, n, &t1, &sg, &s1, &d2_sg),
                IdentityClass::SingleFd,
                ctx,
            ));
        }
    }
    Ok(out)
}

/// Scaled two-jump PDE property: residual of the limiting PDE decreases along
/// a geometric n-list at fixed `(s1, s2)`.
pub fn check_two_jump_scaled(
    spec: &WeightSpec,
    s1: f64,
    s2: f64,
    n_list: &[usize],
    ctx: &PrecisionContext,
) -> Result<Vec<IdentityReport>> {
    if spec.b2.is_zero() {
        return Err(Error::TwoJumpRequired);
    }
    let mut residuals = Vec::new();
    for &n in n_list {
        let bits_t = 1024;
        let scale_t = |s: f64| -> Real {
            let mut t = Real::with_val(bits_t, 2 * n as u64);
            t = t.sqrt();
            let mut c = Real::with_val(bits_t, s);
            c /= Real::with_val(bits_t, 2).sqrt();
            c /= Real::with_val(bits_t, n as u64).root(6);
            t += &c;
            t
        };
        let t1n = scale_t(s1);
        let t2n = scale_t(s2);
        let mut sp = spec.clone();
        sp.t1 = t1n.clone();
        sp.t2 = t2n.clone();
        sp.validate()?;
        let n_local = n + 2;
        let texp = 1.4427 * t2n.to_f64().powi(2);
        let bits = ((0.6 * n_local as f64 + 60.0) * 3.33 + texp).ceil() as u32 + 128;
        let cl = PrecisionContext::with_bits_for(bits, n_local);
        let sys = build_system_chebyshev(&sp, n_local, &cl)?;
        let aux = AuxDouble::from_definitions(&sys)?;
        let bits = cl.bits;
        // ∂_{s_i} σ̃ = (dt/ds) ∂_{t_i} σ = 2 r_{n,i} / (√2 n^{1/6})
        let mut dtds = Real::with_val(bits, 2).sqrt();
        dtds *= Real::with_val(bits, n as u64).root(6);
        dtds = dtds.recip();
        let g1 = {
            let mut v = aux.res_b1[n].clone();
            v *= 2u32;
            v *= &dtds;
            v
        };
        let g2 = {
            let mut v = aux.res_b2[n].clone();
            v *= 2u32;
            v *= &dtds;
            v
        };
        // second partials in s via FD (step in s, chain through t)
        let fd_s = |vary_t2: bool, which2: bool| -> Result<Real> {
            let mut cache = RebuildCache::new(&sp, n_local, cl, vary_t2);
            let at = if vary_t2 { t2n.clone() } else { t1n.clone() };
            let inner = fd_quantity(&mut cache, &Real::with_val(bits, &at), FdOrder::First, &cl, move |_, a| {
                let mut v = if which2 {
                    a.res_b2[n].clone()
                } else {
                    a.res_b1[n].clone()
                };
                v *= 2u32;
                v
            })?;
            // d/ds = dtds · d/dt; two chain factors for second partials in s
            let mut v = inner;
            v *= &dtds;
            v *= &dtds;
            Ok(v)
        };
        let d11 = fd_s(false, false)?;
        let d12 = fd_s(true, false)?;
        let d21 = fd_s(false, true)?;
        let d22 = fd_s(true, true)?;
        let sg = aux.sigma[n].clone();

        let b1 = Real::with_val(bits, &d22 + &d21);
        let b2 = Real::with_val(bits, &d11 + &d12);
        let mut lhs1 = prod(bits, &b1, &b1);
        lhs1 *= &g1;
        let mut lhs2 = prod(bits, &b2, &b2);
        lhs2 *= &g2;
        let mut rhs = prod(bits, &Real::with_val(bits, s1), &g1);
        let mut w = prod(bits, &Real::with_val(bits, s2), &g2);
        rhs += &w;
        w.assign(&sg * &dtds);
        // σ̃ = σ_n; the PDE is stated for σ̃(s1,s2) = σ_n(t1(s1), t2(s2))
        rhs -= &sg;
        let mut g12 = prod(bits, &g1, &g2);
        g12 *= 4u32;
        rhs *= &g12;
        rhs = -rhs;
        let rep = IdentityReport::from_terms(
            "TJ_PDE_SCALED:residual",
            n,
            vec![s1, s2],
            &[lhs1, lhs2, rhs],
            IdentityClass::Property,
            ctx,
        );
        residuals.push((n, rep.residual.clone()));
    }
    let mut out = Vec::new();
    for pair in residuals.windows(2) {
        let (n0, r0) = &pair[0];
        let (n1, r1) = &pair[1];
        let ratio = if r0.is_zero() {
            Real::new(64)
        } else {
            Real::with_val(r1.prec(), r1 / r0)
        };
        let pass = ratio < 1;
        out.push(IdentityReport {
            id: format!("TJ_PDE_SCALED:ratio_{n0}_{n1}"),
            n: *n1,
            t: vec![s1, s2],
            residual: ratio,
            tolerance: Real::with_val(64, 1),
            class: IdentityClass::Property,
            pass,
            skipped: None,
        });
    }
    Ok(out)
}

use crate::ortho::build_system_chebyshev;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::AuxSingle;
    use crate::ortho::build_system;

    #[test]
    fn pure_gaussian_string_residuals_zero() {
        let ctx = PrecisionContext::policy(6);
        let spec = WeightSpec::gaussian(1.0, ctx.bits).unwrap();
        let sys = build_system(&spec, 6, &ctx).unwrap();
        let aux = AuxSingle::from_definitions(&sys).unwrap();
        for n in 1..=5usize {
            for rep in check_string_single(&aux, &sys, n).unwrap() {
                assert!(rep.pass, "{} at n={n}", rep.id);
                assert!(rep.residual.is_zero(), "{} residual nonzero", rep.id);
            }
            for rep in check_difference(&aux, &ctx, n).unwrap() {
                assert!(rep.residual.is_zero(), "{} residual nonzero", rep.id);
            }
        }
    }

    #[test]
    fn string_and_difference_pass_on_jump_weight() {
        let ctx = PrecisionContext::policy(12);
        let spec = WeightSpec::single(1.0, 1.0, 0.5, ctx.bits).unwrap();
        let sys = build_system(&spec, 12, &ctx).unwrap();
        let aux = AuxSingle::from_definitions(&sys).unwrap();
        for n in 1..=11usize {
            for rep in check_string_single(&aux, &sys, n)
                .unwrap()
                .into_iter()
                .chain(check_difference(&aux, &ctx, n).unwrap())
                .chain(check_route_agreement(&aux, &sys, n).unwrap())
            {
                assert!(
                    rep.pass,
                    "{} failed at n={n}: residual {:e} > tol {:e}",
                    rep.id,
                    rep.residual.to_f64(),
                    rep.tolerance.to_f64()
                );
            }
        }
    }

    #[test]
    fn paper_beta_parametrization_difference_equations() {
        // A = 1 - β/2, B1 = β with β = 0.4
        let ctx = PrecisionContext::policy(22);
        let spec = WeightSpec::single(0.8, 0.4, 1.0, ctx.bits).unwrap();
        let sys = build_system(&spec, 22, &ctx).unwrap();
        let aux = AuxSingle::from_definitions(&sys).unwrap();
        for rep in check_difference(&aux, &ctx, 20).unwrap() {
            assert!(rep.pass, "{} at n=20", rep.id);
        }
    }

    #[test]
    fn riccati_toda_small_case() {
        let ctx = PrecisionContext::with_bits_for(512, 5);
        let spec = WeightSpec::single(1.0, 1.0, 0.0, ctx.bits).unwrap();
        let sys = build_system(&spec, 5, &ctx).unwrap();
        let aux = AuxSingle::from_definitions(&sys).unwrap();
        for rep in check_riccati_toda(&aux, &sys, 3, &ctx).unwrap() {
            assert!(
                rep.pass,
                "{} failed: {:e} > {:e}",
                rep.id,
                rep.residual.to_f64(),
                rep.tolerance.to_f64()
            );
        }
    }

    #[test]
    fn ode_suite_small_case() {
        let ctx = PrecisionContext::with_bits_for(512, 5);
        let spec = WeightSpec::single(1.0, 1.0, 0.5, ctx.bits).unwrap();
        let sys = build_system(&spec, 5, &ctx).unwrap();
        let aux = AuxSingle::from_definitions(&sys).unwrap();
        for rep in check_ode(&aux, &sys, 3, &ctx).unwrap() {
            assert!(
                rep.pass,
                "{} failed: {:e} > {:e}",
                rep.id,
                rep.residual.to_f64(),
                rep.tolerance.to_f64()
            );
        }
    }

    #[test]
    fn conclusion_relations_small_case() {
        let ctx = PrecisionContext::with_bits_for(512, 7);
        let spec = WeightSpec::single(1.0, 1.0, 0.3, ctx.bits).unwrap();
        let sys = build_system(&spec, 7, &ctx).unwrap();
        let aux = AuxSingle::from_definitions(&sys).unwrap();
        for rep in check_conclusion_relations(&aux, &sys, 7, &ctx).unwrap() {
            assert!(rep.pass, "{} failed", rep.id);
        }
        // σ_1(0) = 2 p(1,0) = -2 α_0 = -2/(3√π) at t1 = 0
        let ctx0 = PrecisionContext::policy(2);
        let spec0 = WeightSpec::single(1.0, 1.0, 0.0, ctx0.bits).unwrap();
        let sys0 = build_system(&spec0, 2, &ctx0).unwrap();
        let aux0 = AuxSingle::from_definitions(&sys0).unwrap();
        let mut want = ctx0.sqrt_pi();
        want *= 3u32;
        want = want.recip();
        want *= 2u32;
        want = -want;
        let mut d = Real::with_val(ctx0.bits, &aux0.sigma[1] - &want);
        d = d.abs();
        assert!(d < ctx0.tol());
    }

    #[test]
    fn exact_ode1_residual_vanishes() {
        let ctx = PrecisionContext::policy(6);
        let spec = WeightSpec::single(1.0, 1.0, 0.0, ctx.bits).unwrap();
        let sys = build_system(&spec, 7, &ctx).unwrap();
        let aux = AuxSingle::from_definitions(&sys).unwrap();
        for z in [0.3, 0.7, 1.5] {
            let terms = ode1_residual_terms(&sys, &aux, 6, &ctx.real(z)).unwrap();
            let rep = IdentityReport::from_terms(
                "BHE_LIMIT:ode1_exact",
                6,
                vec![0.0, z],
                &terms,
                IdentityClass::Algebraic,
                &ctx,
            );
            assert!(rep.pass, "(ode1) residual at z={z}: {:e}", rep.residual.to_f64());
        }
    }

    #[test]
    fn two_jump_suite_small_case() {
        let ctx = PrecisionContext::with_bits_for(512, 4);
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
        let sys = build_system(&spec, 4, &ctx).unwrap();
        let aux = AuxDouble::from_definitions(&sys).unwrap();
        for rep in check_two_jump(&aux, &sys, 3, &ctx).unwrap() {
            assert!(
                rep.pass,
                "{} failed: {:e} > {:e}",
                rep.id,
                rep.residual.to_f64(),
                rep.tolerance.to_f64()
            );
        }
    }

    #[test]
    fn two_jump_reduction_is_bit_identical() {
        let ctx = PrecisionContext::with_bits_for(512, 5);
        let spec = WeightSpec::single(1.0, 0.8, 0.4, ctx.bits).unwrap();
        let sys = build_system(&spec, 5, &ctx).unwrap();
        let aux1 = AuxSingle::from_definitions(&sys).unwrap();
        let aux2 = AuxDouble::from_definitions(&sys).unwrap();
        let n = 3;
        let two = check_two_jump(&aux2, &sys, n, &ctx).unwrap();
        let single: Vec<IdentityReport> = check_string_single(&aux1, &sys, n)
            .unwrap()
            .into_iter()
            .chain(check_route_agreement(&aux1, &sys, n).unwrap())
            .chain(check_riccati_toda(&aux1, &sys, n, &ctx).unwrap())
            .chain(check_ode(&aux1, &sys, n, &ctx).unwrap())
            .collect();
        let find = |v: &[IdentityReport], id: &str| -> IdentityReport {
            v.iter().find(|r| r.id == id).unwrap_or_else(|| panic!("missing {id}")).clone()
        };
        for (tj, sj) in [
            ("TJ_STRING:s1e", "S11"),
            ("TJ_STRING:s2p1", "S23"),
            ("TJ_STRING:s12_t1", "S12"),
            ("TJ_STRING:s2p2", "S21"),
            ("TJ_STRING:s2p4", "S22:unreduced"),
            ("TJ_TODA:toda11", "TODA1"),
            ("TJ_TODA:toda21", "TODA2"),
            ("TJ_PDE:p41_reduction", "SIGMA_FORM"),
        ] {
            let a = find(&two, tj);
            let b = find(&single, sj);
            assert_eq!(a.residual, b.residual, "{tj} != {sj}");
        }
    }
}
