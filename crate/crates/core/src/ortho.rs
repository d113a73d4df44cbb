//! Construction of the monic orthogonal system for a jump weight: recurrence
//! coefficients `alpha_n`, `beta_n`, squared norms `h_n`, the sub-leading
//! coefficient `p(n)` and `log D_n`, plus polynomial evaluation and the
//! independent determinant/expectation oracles.
//!
//! The primary path is Cholesky of the raw Hankel moment matrix at policy
//! precision.  A second, exactly equivalent route (modified Chebyshev on
//! closed-form Hermite modified moments) runs in O(n²) and is used for the
//! large-n asymptotic comparisons; the two routes cross-check each other in
//! the test suite.

use crate::moments::{self, WeightSpec};
use crate::numerics::PrecisionContext;
use crate::{Error, Real, Result};
use rug::Assign;

/// Monic orthogonal system for a weight, up to degree `n_max`.
///
/// Index conventions: `h[n]`, `alpha[n]` for `0 <= n <= n_max`; `beta[0] = 0`
/// and `beta[n] = h_n/h_{n-1}` for `1 <= n <= n_max`; `p1[n] = p(n)` (the
/// coefficient of x^{n-1} in P_n, `p1[0] = 0`) and `log_d[n] = ln D_n`
/// (`log_d[0] = 0`, D_0 := 1) for `0 <= n <= n_max + 1`.
#[derive(Clone, Debug)]
pub struct OrthoSystem {
    pub spec: WeightSpec,
    pub n_max: usize,
    pub h: Vec<Real>,
    pub alpha: Vec<Real>,
    pub beta: Vec<Real>,
    pub p1: Vec<Real>,
    pub log_d: Vec<Real>,
    pub ctx: PrecisionContext,
}

const MAX_RETRIES: u32 = 3;

/// Build the system by Cholesky factorization `M = L Lᵀ` of the raw moment
/// matrix `M[i][j] = μ_{i+j}` of size `(n_max+2)²`, with
/// `h_n = L[n][n]²`, `β_n = (L[n][n]/L[n-1][n-1])²` and
/// `α_n = L[n+1][n]/L[n][n] - L[n][n-1]/L[n-1][n-1]`.
///
/// A non-positive pivot signals insufficient precision for the requested
/// `n_max`; the build retries with doubled bits (up to 3 doublings) before
/// giving up.
pub fn build_system(spec: &WeightSpec, n_max: usize, ctx: &PrecisionContext) -> Result<OrthoSystem> {
    spec.validate()?;
    let mut c = *ctx;
    let mut last_err = None;
    for _ in 0..=MAX_RETRIES {
        match build_cholesky_once(spec, n_max, &c) {
            Ok(sys) => return Ok(sys),
            Err(e @ Error::CholeskyBreakdown { .. }) => {
                last_err = Some(e);
                c = PrecisionContext::with_guard(c.bits * 2, c.guard_digits);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}

fn build_cholesky_once(spec: &WeightSpec, n_max: usize, ctx: &PrecisionContext) -> Result<OrthoSystem> {
    let dim = n_max + 2;
    let bits = ctx.bits;
    let mus = moments::moments_upto(2 * dim - 2, spec, ctx)?;

    // lower-triangular factor, row-major
    let mut l: Vec<Vec<Real>> = Vec::with_capacity(dim);
    let mut scratch = Real::new(bits);
    for i in 0..dim {
        let mut row: Vec<Real> = Vec::with_capacity(i + 1);
        for j in 0..=i {
            let mut s = Real::with_val(bits, &mus[i + j]);
            for k in 0..j {
                let ljk = if j == i { &row[k] } else { &l[j][k] };
                scratch.assign(&row[k] * ljk);
                s -= &scratch;
            }
            if i == j {
                if !(s > 0) {
                    return Err(Error::CholeskyBreakdown { row: i, bits });
                }
                row.push(s.sqrt());
            } else {
                s /= &l[j][j];
                row.push(s);
            }
        }
        l.push(row);
    }

    let mut h = Vec::with_capacity(n_max + 1);
    let mut alpha = Vec::with_capacity(n_max + 1);
    let mut beta = Vec::with_capacity(n_max + 1);
    for k in 0..=n_max {
        h.push(Real::with_val(bits, &l[k][k] * &l[k][k]));
        if k == 0 {
            beta.push(Real::new(bits));
        } else {
            let mut b = Real::with_val(bits, &l[k][k] / &l[k - 1][k - 1]);
            b.square_mut();
            beta.push(b);
        }
        let mut a = Real::with_val(bits, &l[k + 1][k] / &l[k][k]);
        if k > 0 {
            scratch.assign(&l[k][k - 1] / &l[k - 1][k - 1]);
            a -= &scratch;
        }
        alpha.push(a);
    }

    let sys = assemble(spec.clone(), n_max, h, alpha, beta, *ctx);
    verify_reconstruction(&sys, &mus)?;
    Ok(sys)
}

fn assemble(
    spec: WeightSpec,
    n_max: usize,
    h: Vec<Real>,
    alpha: Vec<Real>,
    beta: Vec<Real>,
    ctx: PrecisionContext,
) -> OrthoSystem {
    let bits = ctx.bits;
    let mut p1 = vec![Real::new(bits)];
    for n in 1..=n_max + 1 {
        let mut v = p1[n - 1].clone();
        v -= &alpha[n - 1];
        p1.push(v);
    }
    let mut log_d = vec![Real::new(bits)];
    for n in 1..=n_max + 1 {
        let mut v = log_d[n - 1].clone();
        v += Real::with_val(bits, h[n - 1].ln_ref());
        log_d.push(v);
    }
    OrthoSystem {
        spec,
        n_max,
        h,
        alpha,
        beta,
        p1,
        log_d,
        ctx,
    }
}

/// Post-build consistency gate: reconstruct `∫ P_m P_n w dx` from expanded
/// coefficients and raw moments and require `h_n δ_mn` to tolerance, for
/// `m, n <= min(6, n_max)`.
fn verify_reconstruction(sys: &OrthoSystem, mus: &[Real]) -> Result<()> {
    let bits = sys.ctx.bits;
    let top = sys.n_max.min(6);
    let coeffs = monomial_coefficients(sys, top);
    let tol = sys.ctx.tol();
    for m in 0..=top {
        for n in m..=top {
            let mut acc = Real::new(bits);
            let mut scratch = Real::new(bits);
            for (i, cm) in coeffs[m].iter().enumerate() {
                for (j, cn) in coeffs[n].iter().enumerate() {
                    scratch.assign(cm * cn);
                    scratch *= &mus[i + j];
                    acc += &scratch;
                }
            }
            if m == n {
                acc -= &sys.h[n];
            }
            let mut scale = Real::with_val(bits, &sys.h[m] * &sys.h[n]);
            scale = scale.sqrt();
            let mut rel = acc.abs();
            rel /= &scale;
            if !(rel < tol) {
                return Err(Error::ConsistencyFailure(format!(
                    "moment reconstruction failed at (m,n)=({m},{n}): rel = {:e}",
                    rel.to_f64()
                )));
            }
        }
    }
    Ok(())
}

/// Monomial coefficient vectors of `P_0 .. P_top` (index k holds the
/// coefficient of x^k).
pub fn monomial_coefficients(sys: &OrthoSystem, top: usize) -> Vec<Vec<Real>> {
    let bits = sys.ctx.bits;
    let mut out: Vec<Vec<Real>> = vec![vec![Real::with_val(bits, 1)]];
    if top == 0 {
        return out;
    }
    out.push(vec![
        Real::with_val(bits, -&sys.alpha[0]),
        Real::with_val(bits, 1),
    ]);
    for n in 1..top {
        let mut next = vec![Real::new(bits); n + 2];
        let mut scratch = Real::new(bits);
        for (k, c) in out[n].iter().enumerate() {
            next[k + 1] += c; // x * P_n
            scratch.assign(&sys.alpha[n] * c);
            next[k] -= &scratch;
        }
        for (k, c) in out[n - 1].iter().enumerate() {
            scratch.assign(&sys.beta[n] * c);
            next[k] -= &scratch;
        }
        out.push(next);
    }
    out
}

/// Build the same system through the modified Chebyshev algorithm on the
/// closed-form Hermite modified moments (auxiliary recurrence `a_l = 0`,
/// `b_l = l/2`).  O(n²) rather than O(n³); identical output in exact
/// arithmetic, equally conditioned in practice.
pub fn build_system_chebyshev(
    spec: &WeightSpec,
    n_max: usize,
    ctx: &PrecisionContext,
) -> Result<OrthoSystem> {
    spec.validate()?;
    let mut c = *ctx;
    let mut last_err = None;
    for _ in 0..=MAX_RETRIES {
        match build_chebyshev_once(spec, n_max, &c) {
            Ok(sys) => return Ok(sys),
            Err(e @ Error::CholeskyBreakdown { .. }) => {
                last_err = Some(e);
                c = PrecisionContext::with_guard(c.bits * 2, c.guard_digits);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}

fn build_chebyshev_once(spec: &WeightSpec, n_max: usize, ctx: &PrecisionContext) -> Result<OrthoSystem> {
    let dim = n_max + 2; // need alpha_0..alpha_{n_max+1-1} and h up to n_max
    let m = 2 * dim;
    let bits = ctx.bits;
    let nus = moments::modified_moments(m - 1, spec, ctx)?;

    let mut sig_prev: Vec<Real> = vec![Real::new(bits); m];
    let mut sig_cur: Vec<Real> = nus.clone();
    if !(sig_cur[0] > 0) {
        return Err(Error::CholeskyBreakdown { row: 0, bits });
    }
    let mut alpha = Vec::with_capacity(dim);
    let mut beta = Vec::with_capacity(dim);
    let mut h = Vec::with_capacity(dim);
    alpha.push(Real::with_val(bits, &nus[1] / &nus[0]));
    beta.push(Real::new(bits));
    h.push(nus[0].clone());

    let mut scratch = Real::new(bits);
    for k in 1..dim {
        let mut sig_new: Vec<Real> = vec![Real::new(bits); m];
        for l in k..=(m - k - 1) {
            // σ_{k,l} = σ_{k-1,l+1} - α_{k-1} σ_{k-1,l} - β_{k-1} σ_{k-2,l} + (l/2) σ_{k-1,l-1}
            let mut v = sig_cur[l + 1].clone();
            scratch.assign(&alpha[k - 1] * &sig_cur[l]);
            v -= &scratch;
            if k >= 2 {
                scratch.assign(&beta[k - 1] * &sig_prev[l]);
                v -= &scratch;
            }
            scratch.assign(&sig_cur[l - 1] * (l as u32));
            scratch /= 2u32;
            v += &scratch;
            sig_new[l] = v;
        }
        if !(sig_new[k] > 0) {
            return Err(Error::CholeskyBreakdown { row: k, bits });
        }
        if k < dim {
            let mut a = Real::with_val(bits, &sig_new[k + 1] / &sig_new[k]);
            scratch.assign(&sig_cur[k] / &sig_cur[k - 1]);
            a -= &scratch;
            alpha.push(a);
            beta.push(Real::with_val(bits, &sig_new[k] / &sig_cur[k - 1]));
            h.push(sig_new[k].clone());
        }
        sig_prev = std::mem::replace(&mut sig_cur, sig_new);
    }

    alpha.truncate(n_max + 1);
    beta.truncate(n_max + 1);
    h.truncate(n_max + 1);
    let sys = assemble(spec.clone(), n_max, h, alpha, beta, *ctx);
    let mus = moments::moments_upto(2 * sys.n_max.min(6) + 2, spec, ctx)?;
    verify_reconstruction(&sys, &mus)?;
    Ok(sys)
}

/// Large-n entry point with auto-scaled precision: estimates the bits needed
/// from the measured ~0.5 digit/step conditioning loss plus the dynamic range
/// of `e^{-t²}`, then verifies against a higher-precision rebuild, escalating
/// until `digits_needed` significant digits of the top coefficients are
/// stable.
pub fn build_system_large(spec: &WeightSpec, n_max: usize, digits_needed: u32) -> Result<OrthoSystem> {
    let t1s = spec.t1.to_f64();
    let t2s = if spec.b2.is_zero() { 0.0 } else { spec.t2.to_f64() };
    let texp = if spec.pure_gaussian() {
        0.0
    } else {
        1.4427 * (t1s * t1s).max(t2s * t2s)
    };
    let mut bits = (3.33 * (12.0 + 0.6 * (n_max as f64 + 2.0) + digits_needed as f64) + 64.0 + texp)
        .ceil() as u32;
    bits = bits.max(256);
    for _ in 0..=MAX_RETRIES {
        let lo = build_system_chebyshev(spec, n_max, &PrecisionContext::with_bits_for(bits, n_max))?;
        let hi = build_system_chebyshev(
            spec,
            n_max,
            &PrecisionContext::with_bits_for(bits + 256, n_max),
        )?;
        if stable_to_digits(&lo, &hi, digits_needed) {
            return Ok(hi);
        }
        bits += bits / 2;
    }
    Err(Error::PrecisionUnachievable(format!(
        "large-n build at n_max = {n_max} did not stabilize"
    )))
}

fn stable_to_digits(lo: &OrthoSystem, hi: &OrthoSystem, digits: u32) -> bool {
    let bits = hi.ctx.bits;
    let n = lo.n_max;
    let target = Real::with_val(64, -(digits as f64)).exp10();
    // h must agree relatively; alpha absolutely on the sqrt(beta) scale
    let mut dh = Real::with_val(bits, &lo.h[n] - &hi.h[n]);
    dh = dh.abs();
    dh /= &hi.h[n];
    if dh > target {
        return false;
    }
    let scale = Real::with_val(bits, hi.beta[n].sqrt_ref()).max(&Real::with_val(bits, 1e-30));
    let mut da = Real::with_val(bits, &lo.alpha[n] - &hi.alpha[n]);
    da = da.abs();
    da /= &scale;
    da < target
}

/// Evaluate the monic pair `(P_n(x), P_{n-1}(x))` by the upward three-term
/// recurrence from `P_0 = 1`.
pub fn eval_poly(sys: &OrthoSystem, n: usize, x: &Real) -> Result<(Real, Real)> {
    if n > sys.n_max + 1 {
        return Err(Error::IndexOutOfRange { n, n_max: sys.n_max });
    }
    let bits = sys.ctx.bits;
    let x = Real::with_val(bits, x);
    let mut pm = Real::new(bits);
    let mut p = Real::with_val(bits, 1);
    let mut scratch = Real::new(bits);
    for k in 0..n {
        let mut next = Real::with_val(bits, &x - &sys.alpha[k]);
        next *= &p;
        if k > 0 {
            scratch.assign(&sys.beta[k] * &pm);
            next -= &scratch;
        }
        pm = std::mem::replace(&mut p, next);
    }
    Ok((p, pm))
}

/// `(P_n(x), P_n'(x), P_n''(x))` by the differentiated recurrence
/// (`P'_{k+1} = P_k + (x-α_k)P'_k - β_k P'_{k-1}`, and once more for `P''`).
pub fn eval_poly_derivs(sys: &OrthoSystem, n: usize, x: &Real) -> Result<(Real, Real, Real)> {
    if n > sys.n_max + 1 {
        return Err(Error::IndexOutOfRange { n, n_max: sys.n_max });
    }
    let bits = sys.ctx.bits;
    let x = Real::with_val(bits, x);
    let mut p_prev = Real::new(bits);
    let mut p_cur = Real::with_val(bits, 1);
    let mut d1_prev = Real::new(bits);
    let mut d1_cur = Real::new(bits);
    let mut d2_prev = Real::new(bits);
    let mut d2_cur = Real::new(bits);
    let mut scratch = Real::new(bits);
    for k in 0..n {
        let xa = Real::with_val(bits, &x - &sys.alpha[k]);
        let mut p_next = Real::with_val(bits, &xa * &p_cur);
        let mut d1_next = Real::with_val(bits, &xa * &d1_cur);
        let mut d2_next = Real::with_val(bits, &xa * &d2_cur);
        if k > 0 {
            scratch.assign(&sys.beta[k] * &p_prev);
            p_next -= &scratch;
            scratch.assign(&sys.beta[k] * &d1_prev);
            d1_next -= &scratch;
            scratch.assign(&sys.beta[k] * &d2_prev);
            d2_next -= &scratch;
        }
        d1_next += &p_cur;
        scratch.assign(&d1_cur * 2u32);
        d2_next += &scratch;
        p_prev = std::mem::replace(&mut p_cur, p_next);
        d1_prev = std::mem::replace(&mut d1_cur, d1_next);
        d2_prev = std::mem::replace(&mut d2_cur, d2_next);
    }
    Ok((p_cur, d1_cur, d2_cur))
}

/// Direct determinant of the n×n raw moment matrix by pivoted LU at full
/// precision; the independent oracle for `exp(log_d[n])`.  Oracle scale:
/// `n <= 30`.
pub fn hankel_oracle(spec: &WeightSpec, n: usize, ctx: &PrecisionContext) -> Result<Real> {
    if n > 30 {
        return Err(Error::IndexOutOfRange { n, n_max: 30 });
    }
    if n == 0 {
        return Ok(Real::with_val(ctx.bits, 1));
    }
    let bits = ctx.bits;
    let mus = moments::moments_upto(2 * n - 2, spec, ctx)?;
    let mut m: Vec<Vec<Real>> = (0..n)
        .map(|i| (0..n).map(|j| mus[i + j].clone()).collect())
        .collect();
    let mut det = Real::with_val(bits, 1);
    let mut scratch = Real::new(bits);
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&a, &b| {
                let fa = m[a][c].clone().abs();
                let fb = m[b][c].clone().abs();
                fa.partial_cmp(&fb).unwrap()
            })
            .unwrap();
        if m[piv][c].is_zero() {
            return Err(Error::SingularMatrix);
        }
        if piv != c {
            m.swap(piv, c);
            det = -det;
        }
        det *= &m[c][c];
        for r in c + 1..n {
            let f = Real::with_val(bits, &m[r][c] / &m[c][c]);
            for cc in c..n {
                scratch.assign(&f * &m[c][cc]);
                m[r][cc] -= &scratch;
            }
        }
    }
    Ok(det)
}

/// log of the Gaussian closed form `D_n[w0] = (2π)^{n/2} 2^{-n²/2} G(n+1)`
/// with the Barnes G built by its recurrence `G(z+1) = Γ(z) G(z)`, `G(1)=1`
/// (pure integer factorial chain here).
pub fn log_gaussian_dn(n: usize, ctx: &PrecisionContext) -> Real {
    let bits = ctx.bits;
    let mut two_pi = ctx.pi();
    two_pi *= 2u32;
    let mut out = Real::with_val(bits, two_pi.ln_ref());
    out *= n as u32;
    out /= 2u32;
    let mut half_n2 = Real::with_val(bits, (n * n) as u64);
    half_n2 /= 2u32;
    half_n2 *= Real::with_val(bits, 2).ln();
    out -= &half_n2;
    // ln G(n+1) = sum_{k=1}^{n-1} ln(k!)
    let mut ln_fact = Real::new(bits);
    let mut ln_g = Real::new(bits);
    for k in 1..n {
        ln_fact += Real::with_val(bits, k as u64).ln();
        ln_g += &ln_fact;
    }
    out += &ln_g;
    out
}

/// Expectation `E(∏ f(x_j)) = D_n[w]/D_n[w0]` for `n <= 3` by tensor-product
/// Gauss-Legendre quadrature of the Vandermonde-squared density, split at the
/// jump points so each panel sees a smooth integrand.  Quadrature-limited to
/// about 1e-10 relative; the consistency contract is 1e-8.
pub fn expectation_oracle(spec: &WeightSpec, n: usize, ctx: &PrecisionContext) -> Result<Real> {
    if n == 0 || n > 3 {
        return Err(Error::IndexOutOfRange { n, n_max: 3 });
    }
    spec.validate()?;
    let a = spec.a.to_f64();
    let b1 = spec.b1.to_f64();
    let b2 = spec.b2.to_f64();
    let t1 = spec.t1.to_f64();
    let t2 = spec.t2.to_f64();
    let two_jump = !spec.b2.is_zero();

    const L: f64 = 9.0;
    let mut cuts = vec![-L];
    if t1 > -L && t1 < L {
        cuts.push(t1);
    }
    if two_jump && t2 > -L && t2 < L {
        cuts.push(t2);
    }
    cuts.push(L);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let (gx, gw) = crate::quad::gauss_legendre_f64(48);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for seg in cuts.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let mid = 0.5 * (lo + hi);
        let rad = 0.5 * (hi - lo);
        for (x, w) in gx.iter().zip(&gw) {
            let xx = mid + rad * x;
            let f = a
                + if xx > t1 { b1 } else { 0.0 }
                + if two_jump && xx > t2 { b2 } else { 0.0 };
            nodes.push(xx);
            weights.push(w * rad * (-xx * xx).exp() * f);
        }
    }

    let m = nodes.len();
    let mut integral = 0.0f64;
    match n {
        1 => {
            for i in 0..m {
                integral += weights[i];
            }
        }
        2 => {
            for i in 0..m {
                for j in 0..m {
                    let d = nodes[i] - nodes[j];
                    integral += weights[i] * weights[j] * d * d;
                }
            }
        }
        _ => {
            for i in 0..m {
                for j in 0..m {
                    let dij = nodes[i] - nodes[j];
                    let wij = weights[i] * weights[j] * dij * dij;
                    if wij == 0.0 {
                        continue;
                    }
                    for k in 0..m {
                        let dik = nodes[i] - nodes[k];
                        let djk = nodes[j] - nodes[k];
                        integral += wij * weights[k] * dik * dik * djk * djk;
                    }
                }
            }
        }
    }
    let fact = [1.0, 1.0, 2.0, 6.0][n];
    let d0 = log_gaussian_dn(n, ctx).exp().to_f64();
    Ok(Real::with_val(ctx.bits, integral / fact / d0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: &Real, b: &Real) -> Real {
        let p = a.prec();
        let mut d = Real::with_val(p, a - b);
        d = d.abs();
        let den = Real::with_val(p, b.clone().abs()).max(&Real::with_val(p, 1e-300));
        d / den
    }

    #[test]
    fn pure_gaussian_classical_values() {
        let ctx = PrecisionContext::policy(10);
        let spec = WeightSpec::gaussian(1.0, ctx.bits).unwrap();
        let sys = build_system(&spec, 10, &ctx).unwrap();
        let tol = ctx.tol();
        let mut fact = Real::with_val(ctx.bits, 1);
        for n in 0..=10usize {
            assert!(sys.alpha[n].clone().abs() < tol, "alpha[{n}] != 0");
            if n > 0 {
                fact *= n as u32;
                let mut want = Real::with_val(ctx.bits, n as u32);
                want /= 2u32;
                assert!(rel_err(&sys.beta[n], &want) < tol, "beta[{n}]");
            }
            // h_n = √π n! / 2^n
            let mut want = ctx.sqrt_pi();
            want *= &fact;
            want >>= n as u32;
            assert!(rel_err(&sys.h[n], &want) < tol, "h[{n}]");
        }
    }

    #[test]
    fn jump_small_n_closed_forms() {
        let ctx = PrecisionContext::policy(4);
        let spec = WeightSpec::single(1.0, 1.0, 0.0, ctx.bits).unwrap();
        let sys = build_system(&spec, 4, &ctx).unwrap();
        // alpha_0 = mu_1/mu_0 = 1/(3 sqrt(pi))
        let mut want = ctx.sqrt_pi();
        want *= 3u32;
        want = want.recip();
        assert!(rel_err(&sys.alpha[0], &want) < ctx.tol());
        // beta_1 = 1/2 - 1/(9 pi)
        let mut nine_pi = ctx.pi();
        nine_pi *= 9u32;
        let mut want = nine_pi.recip();
        want = -want;
        want += 0.5f64;
        assert!(rel_err(&sys.beta[1], &want) < ctx.tol());
    }

    #[test]
    fn chebyshev_route_agrees_with_cholesky() {
        let ctx = PrecisionContext::policy(18);
        let spec = WeightSpec::double(1.0, 1.0, -0.25, 0.3, 1.1, ctx.bits).unwrap();
        let a = build_system(&spec, 18, &ctx).unwrap();
        let b = build_system_chebyshev(&spec, 18, &ctx).unwrap();
        let tol = ctx.tol();
        for n in 0..=18usize {
            assert!(rel_err(&a.h[n], &b.h[n]) < tol, "h[{n}]");
            let mut d = Real::with_val(ctx.bits, &a.alpha[n] - &b.alpha[n]);
            d = d.abs();
            assert!(d < tol, "alpha[{n}]");
        }
        let mut d = Real::with_val(ctx.bits, &a.log_d[19] - &b.log_d[19]);
        d = d.abs();
        assert!(d < tol);
    }

    #[test]
    fn eval_poly_examples() {
        let ctx = PrecisionContext::policy(4);
        let spec = WeightSpec::single(1.0, 1.0, 0.0, ctx.bits).unwrap();
        let sys = build_system(&spec, 4, &ctx).unwrap();
        let (p0, pm) = eval_poly(&sys, 0, &ctx.real(0.37)).unwrap();
        assert!(rel_err(&p0, &ctx.real(1.0)) < ctx.tol());
        assert!(pm.is_zero());
        // P_1(0) = -alpha_0 = -1/(3 sqrt(pi))
        let (p1, _) = eval_poly(&sys, 1, &ctx.real(0.0)).unwrap();
        let mut want = ctx.sqrt_pi();
        want *= 3u32;
        want = -want.recip();
        assert!(rel_err(&p1, &want) < ctx.tol());
        // pure Gaussian: P_2(1) = 1 - 1/2 = 1/2
        let g = WeightSpec::gaussian(1.0, ctx.bits).unwrap();
        let gs = build_system(&g, 4, &ctx).unwrap();
        let (p2, _) = eval_poly(&gs, 2, &ctx.real(1.0)).unwrap();
        assert!(rel_err(&p2, &ctx.real(0.5)) < ctx.tol());
    }

    #[test]
    fn poly_derivs_match_fd() {
        let ctx = PrecisionContext::policy(8);
        let spec = WeightSpec::single(1.0, 0.5, 0.4, ctx.bits).unwrap();
        let sys = build_system(&spec, 8, &ctx).unwrap();
        let x = ctx.real(0.8);
        let (p, d1, d2) = eval_poly_derivs(&sys, 6, &x).unwrap();
        let (pchk, _) = eval_poly(&sys, 6, &x).unwrap();
        assert!(rel_err(&p, &pchk) < ctx.tol());
        let fd1 = crate::numerics::fd_derivative(
            |t| Ok(eval_poly(&sys, 6, t).unwrap().0),
            &x,
            crate::numerics::FdOrder::First,
            &ctx,
        )
        .unwrap();
        assert!(rel_err(&d1, &fd1) < ctx.tol_fd1());
        let fd2 = crate::numerics::fd_derivative(
            |t| Ok(eval_poly(&sys, 6, t).unwrap().0),
            &x,
            crate::numerics::FdOrder::Second,
            &ctx,
        )
        .unwrap();
        assert!(rel_err(&d2, &fd2) < ctx.tol_fd1());
    }

    #[test]
    fn hankel_oracle_examples() {
        let ctx = PrecisionContext::policy(5);
        // D_1 = mu_0 = 3 sqrt(pi)/2 for A=1,B1=1,t1=0
        let spec = WeightSpec::single(1.0, 1.0, 0.0, ctx.bits).unwrap();
        let d1 = hankel_oracle(&spec, 1, &ctx).unwrap();
        let mut want = ctx.sqrt_pi();
        want *= 3u32;
        want /= 2u32;
        assert!(rel_err(&d1, &want) < ctx.tol());
        // pure Gaussian D_2 = pi/2
        let g = WeightSpec::gaussian(1.0, ctx.bits).unwrap();
        let d2 = hankel_oracle(&g, 2, &ctx).unwrap();
        let mut want = ctx.pi();
        want /= 2u32;
        assert!(rel_err(&d2, &want) < ctx.tol());
        // pure Gaussian D_5 = (2pi)^{5/2} 2^{-25/2} * 288  (Barnes G(6) = 1!2!3!4!)
        let d5 = hankel_oracle(&g, 5, &ctx).unwrap();
        let want = log_gaussian_dn(5, &ctx).exp();
        assert!(rel_err(&d5, &want) < ctx.tol());
        let mut check = ctx.pi();
        check *= 2u32;
        check = check.ln();
        check *= 5u32;
        check /= 2u32;
        let mut t = Real::with_val(ctx.bits, 2).ln();
        t *= 25u32;
        t /= 2u32;
        check -= &t;
        check += Real::with_val(ctx.bits, 288).ln();
        assert!(rel_err(&check.exp(), &want) < ctx.tol());
    }

    #[test]
    fn oracle_equivalence_random_specs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(42);
        for _ in 0..4 {
            let a = rng.gen_range(0.1..2.0);
            let b1 = rng.gen_range(-0.9 * a..2.0);
            let t1 = rng.gen_range(-1.5..1.5);
            let n = 12usize;
            let ctx = PrecisionContext::policy(n);
            let spec = WeightSpec::single(a, b1, t1, ctx.bits).unwrap();
            let sys = build_system(&spec, n, &ctx).unwrap();
            let oracle = hankel_oracle(&spec, n, &ctx).unwrap();
            let got = sys.log_d[n].clone().exp();
            assert!(
                rel_err(&got, &oracle) < ctx.tol(),
                "oracle mismatch at A={a} B1={b1} t1={t1}"
            );
        }
    }

    #[test]
    fn jump_removal_limit() {
        let ctx = PrecisionContext::policy(8);
        let spec = WeightSpec::single(1.0, 1.0, -30.0, ctx.bits).unwrap();
        let sys = build_system(&spec, 8, &ctx).unwrap();
        for n in 0..=8usize {
            assert!(sys.alpha[n].clone().abs() < ctx.tol(), "alpha[{n}] not ~0");
        }
        // and h matches the (A+B1) e^{-x^2} weight
        let pure = WeightSpec::gaussian(2.0, ctx.bits).unwrap();
        let ps = build_system(&pure, 8, &ctx).unwrap();
        for n in 0..=8usize {
            assert!(rel_err(&sys.h[n], &ps.h[n]) < ctx.tol(), "h[{n}]");
        }
    }

    #[test]
    fn orthogonality_reconstruction_to_ten() {
        let ctx = PrecisionContext::policy(10);
        let spec = WeightSpec::single(1.0, 1.0, 0.5, ctx.bits).unwrap();
        let sys = build_system(&spec, 10, &ctx).unwrap();
        let mus = moments::moments_upto(22, &spec, &ctx).unwrap();
        let coeffs = monomial_coefficients(&sys, 10);
        let mut scratch = Real::new(ctx.bits);
        for m in 0..=10usize {
            for n in 0..=10usize {
                let mut acc = Real::new(ctx.bits);
                for (i, cm) in coeffs[m].iter().enumerate() {
                    for (j, cn) in coeffs[n].iter().enumerate() {
                        scratch.assign(cm * cn);
                        scratch *= &mus[i + j];
                        acc += &scratch;
                    }
                }
                if m == n {
                    acc -= &sys.h[n];
                }
                let mut scale = Real::with_val(ctx.bits, &sys.h[m] * &sys.h[n]);
                scale = scale.sqrt();
                let mut rel = acc.abs();
                rel /= &scale;
                assert!(rel < ctx.tol(), "orthogonality ({m},{n})");
            }
        }
    }

    #[test]
    fn monotone_precision_shrinks_residuals() {
        let spec64 = |bits: u32| WeightSpec::single(1.0, 1.0, 0.5, bits).unwrap();
        let mut prev: Option<Real> = None;
        for bits in [256u32, 512] {
            let ctx = PrecisionContext::with_bits_for(bits, 8);
            let sys = build_system(&spec64(bits), 8, &ctx).unwrap();
            let oracle = hankel_oracle(&spec64(bits), 8, &ctx).unwrap();
            let got = sys.log_d[8].clone().exp();
            let r = rel_err(&got, &oracle);
            if let Some(p) = prev {
                assert!(r < p, "residual did not shrink with bits");
            }
            prev = Some(r);
        }
    }

    #[test]
    fn expectation_oracle_values() {
        let ctx = PrecisionContext::new(256);
        // n=1, A=1,B1=1,t1=0: (3√π/2)/√π = 3/2
        let spec = WeightSpec::single(1.0, 1.0, 0.0, ctx.bits).unwrap();
        let e1 = expectation_oracle(&spec, 1, &ctx).unwrap();
        let mut d = e1;
        d -= 1.5f64;
        assert!(d.abs() < 1e-10);
        // n=2 pure Gaussian: 1
        let g = WeightSpec::gaussian(1.0, ctx.bits).unwrap();
        let e2 = expectation_oracle(&g, 2, &ctx).unwrap();
        let mut d = e2;
        d -= 1u32;
        assert!(d.abs() < 1e-10);
        // n=2 jump weight: matches D_2[w]/D_2[w0] from the determinant oracle
        let e2j = expectation_oracle(&spec, 2, &ctx).unwrap();
        let d2w = hankel_oracle(&spec, 2, &ctx).unwrap();
        let d2g = hankel_oracle(&g, 2, &ctx).unwrap();
        let want = Real::with_val(ctx.bits, &d2w / &d2g);
        let mut d = Real::with_val(ctx.bits, &e2j - &want);
        d = d.abs();
        d /= &want;
        assert!(d < 1e-8);
    }
}
