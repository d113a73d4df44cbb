//! Truncated Laurent series with exact coefficients: polynomials in `t` over
//! ℚ(√2,√3), in a formal variable `x` that stands for either `n^{-1/2}`
//! (large-n expansions; the explicit `n` in ODE coefficients becomes `x^{-2}`)
//! or `1/s` (large-s scaling expansions).
//!
//! Arithmetic tracks the truncation order exactly: a series knows the first
//! exponent it can say nothing about, and products/sums propagate that bound.

use crate::algebraic::AlgebraicNumber;
use crate::{Error, Real, Result};

/// Polynomial in `t` over ℚ(√2,√3); `coeffs[k]` multiplies `t^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TPoly {
    pub coeffs: Vec<AlgebraicNumber>,
}

impl TPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: AlgebraicNumber) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Self { coeffs: vec![c] }
        }
    }

    pub fn t_power(c: AlgebraicNumber, k: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![AlgebraicNumber::zero(); k + 1];
        coeffs[k] = c;
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Degree-0 nonzero content, if the polynomial is a constant.
    pub fn as_constant(&self) -> Option<&AlgebraicNumber> {
        match self.coeffs.len() {
            0 => None,
            _ if self.coeffs[1..].iter().all(|c| c.is_zero()) => Some(&self.coeffs[0]),
            _ => None,
        }
    }

    fn trim(mut self) -> Self {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let a = self.coeffs.get(k).cloned().unwrap_or_else(AlgebraicNumber::zero);
            let b = o.coeffs.get(k).cloned().unwrap_or_else(AlgebraicNumber::zero);
            out.push(a + b);
        }
        Self { coeffs: out }.trim()
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![AlgebraicNumber::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let p = a.clone() * b.clone();
                out[i + j] = out[i + j].clone() + p;
            }
        }
        Self { coeffs: out }.trim()
    }

    pub fn scale(&self, c: &AlgebraicNumber) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
        }
        .trim()
    }

    /// d/dt.
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let mut out = Vec::with_capacity(self.coeffs.len() - 1);
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            out.push(c.clone() * AlgebraicNumber::from_int(k as i64));
        }
        Self { coeffs: out }.trim()
    }

    pub fn eval(&self, t: &Real, bits: u32) -> Real {
        let mut acc = Real::new(bits);
        for c in self.coeffs.iter().rev() {
            acc *= t;
            acc += c.to_real(bits);
        }
        acc
    }
}

impl std::fmt::Display for TPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if k == 0 {
                write!(f, "({c})")?;
            } else if k == 1 {
                write!(f, "({c})*t")?;
            } else {
                write!(f, "({c})*t^{k}")?;
            }
        }
        Ok(())
    }
}

/// Formal variable of an [`AlgebraicSeries`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesVar {
    /// `x = n^{-1/2}`; exponents count half-powers of `1/n`.
    InvSqrtN,
    /// `x = 1/s`, finitely many negative exponents (positive powers of s).
    InvS,
}

/// Truncated Laurent series `Σ_k coeffs[k] · x^{lead+k}` with exact
/// truncation bookkeeping: nothing is known at exponents `>= trunc`.
#[derive(Clone, Debug)]
pub struct AlgebraicSeries {
    pub var: SeriesVar,
    pub lead: i64,
    pub coeffs: Vec<TPoly>,
    pub trunc: i64,
}

impl AlgebraicSeries {
    pub fn zero(var: SeriesVar, trunc: i64) -> Self {
        Self {
            var,
            lead: trunc,
            coeffs: Vec::new(),
            trunc,
        }
    }

    /// Single term `c · x^k`, known through `trunc`.
    pub fn term(var: SeriesVar, c: TPoly, k: i64, trunc: i64) -> Self {
        let mut s = Self::zero(var, trunc);
        if k < trunc && !c.is_zero() {
            s.lead = k;
            s.coeffs = vec![c];
            s.pad();
        }
        s
    }

    fn pad(&mut self) {
        let want = (self.trunc - self.lead).max(0) as usize;
        self.coeffs.resize(want, TPoly::zero());
    }

    /// Coefficient of `x^e`; zero below the lead, error at or above the
    /// truncation bound.
    pub fn coeff_at(&self, e: i64) -> Result<TPoly> {
        if e >= self.trunc {
            return Err(Error::InsufficientTruncation(format!(
                "coefficient at exponent {e} beyond truncation {}",
                self.trunc
            )));
        }
        if e < self.lead {
            return Ok(TPoly::zero());
        }
        Ok(self.coeffs[(e - self.lead) as usize].clone())
    }

    /// True if every known coefficient vanishes.
    pub fn is_zero_through_truncation(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn check_var(&self, o: &Self) {
        assert_eq!(self.var, o.var, "mixing series in different variables");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check_var(o);
        let lead = self.lead.min(o.lead);
        let trunc = self.trunc.min(o.trunc);
        let mut out = Self {
            var: self.var,
            lead: lead.min(trunc),
            coeffs: Vec::new(),
            trunc,
        };
        out.pad();
        for (src, base) in [(self, self.lead), (o, o.lead)] {
            for (k, c) in src.coeffs.iter().enumerate() {
                let e = base + k as i64;
                if e >= trunc {
                    break;
                }
                let idx = (e - out.lead) as usize;
                out.coeffs[idx] = out.coeffs[idx].add(c);
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            var: self.var,
            lead: self.lead,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            trunc: self.trunc,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check_var(o);
        // an unknown O(x^t1) term times a known lead x^l2 pollutes x^{t1+l2}
        let trunc = (self.trunc + o.lead).min(o.trunc + self.lead);
        let lead = (self.lead + o.lead).min(trunc);
        let mut out = Self {
            var: self.var,
            lead,
            coeffs: Vec::new(),
            trunc,
        };
        out.pad();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                let e = self.lead + i as i64 + o.lead + j as i64;
                if e >= trunc {
                    break;
                }
                let idx = (e - out.lead) as usize;
                out.coeffs[idx] = out.coeffs[idx].add(&a.mul(b));
            }
        }
        out
    }

    pub fn scale(&self, c: &AlgebraicNumber) -> Self {
        Self {
            var: self.var,
            lead: self.lead,
            coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect(),
            trunc: self.trunc,
        }
    }

    pub fn scale_tpoly(&self, c: &TPoly) -> Self {
        Self {
            var: self.var,
            lead: self.lead,
            coeffs: self.coeffs.iter().map(|p| p.mul(c)).collect(),
            trunc: self.trunc,
        }
    }

    /// Multiply by `x^k` (exact exponent shift).
    pub fn shift(&self, k: i64) -> Self {
        Self {
            var: self.var,
            lead: self.lead + k,
            coeffs: self.coeffs.clone(),
            trunc: self.trunc + k,
        }
    }

    /// d/dt, coefficient-wise (the `InvSqrtN` series carry t-polynomials).
    pub fn deriv_t(&self) -> Self {
        Self {
            var: self.var,
            lead: self.lead,
            coeffs: self.coeffs.iter().map(|c| c.derivative()).collect(),
            trunc: self.trunc,
        }
    }

    /// d/ds for `x = 1/s` series: `c s^m -> m c s^{m-1}` i.e.
    /// `c x^e -> -e c x^{e+1}`.
    pub fn deriv_s(&self) -> Self {
        debug_assert_eq!(self.var, SeriesVar::InvS);
        let mut out = Self {
            var: self.var,
            lead: self.lead + 1,
            coeffs: Vec::with_capacity(self.coeffs.len()),
            trunc: self.trunc + 1,
        };
        for (k, c) in self.coeffs.iter().enumerate() {
            let e = self.lead + k as i64;
            out.coeffs
                .push(c.scale(&AlgebraicNumber::from_int(-e)));
        }
        out
    }

    /// Long division by a series whose leading coefficient is a nonzero
    /// constant (a unit of the coefficient ring).
    pub fn div(&self, o: &Self) -> Result<Self> {
        self.check_var(o);
        let lead_c = o
            .coeffs
            .first()
            .and_then(|c| c.as_constant())
            .cloned()
            .ok_or_else(|| {
                Error::InsufficientTruncation("division requires a unit-leading series".into())
            })?;
        let inv = lead_c
            .inverse()
            .ok_or_else(|| Error::InsufficientTruncation("division by zero series".into()))?;
        // quotient known through min(self.trunc, o.trunc + self.lead?) –
        // standard bound: q has lead self.lead - o.lead and the recursion
        // stays valid while both inputs are known
        let trunc = (self.trunc - o.lead).min(o.trunc + self.lead - 2 * o.lead);
        let qlead = self.lead - o.lead;
        let len = (trunc - qlead).max(0) as usize;
        let mut q = Self {
            var: self.var,
            lead: qlead,
            coeffs: vec![TPoly::zero(); len],
            trunc,
        };
        let mut rem = self.clone();
        for k in 0..len {
            let e = qlead + k as i64;
            let r = rem.coeff_at(e + o.lead)?;
            if r.is_zero() {
                continue;
            }
            let qc = r.scale(&inv);
            q.coeffs[k] = qc.clone();
            let piece = o.scale_tpoly(&qc).shift(e - o.lead);
            rem = rem.sub(&piece);
        }
        Ok(q)
    }

    /// Evaluate at a numeric point.  `x` is the value of the formal variable
    /// (`n^{-1/2}` or `1/s`); `t` is required when coefficients depend on t.
    pub fn eval(&self, x: &Real, t: Option<&Real>, bits: u32) -> Real {
        let tval = t.cloned().unwrap_or_else(|| Real::new(bits));
        let mut acc = Real::new(bits);
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c.eval(&tval, bits);
        }
        use rug::ops::Pow;
        let lead_pow = Real::with_val(bits, x.pow(self.lead as i32));
        acc * lead_pow
    }

    /// Canonical text form, one `coeff * var^k` per known nonzero term.
    pub fn canonical(&self) -> String {
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = self.lead + k as i64;
            let var = match self.var {
                SeriesVar::InvS => {
                    let p = -e;
                    format!("s^{p}")
                }
                SeriesVar::InvSqrtN => {
                    // x = n^{-1/2}
                    if e % 2 == 0 {
                        format!("n^{}", -e / 2)
                    } else {
                        format!("n^({}/2)", -e)
                    }
                }
            };
            parts.push(format!("({c}) * {var}"));
        }
        if parts.is_empty() {
            format!("0 + O({})", self.order_tag())
        } else {
            format!("{} + O({})", parts.join(" + "), self.order_tag())
        }
    }

    fn order_tag(&self) -> String {
        match self.var {
            SeriesVar::InvS => format!("s^{}", -self.trunc),
            SeriesVar::InvSqrtN => format!("n^({}/2)", -self.trunc),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: i64, d: i64) -> TPoly {
        TPoly::constant(AlgebraicNumber::from_ratio(n, d))
    }

    #[test]
    fn truncation_bookkeeping_mul() {
        // (x^-1 + ... O(x^3)) * (x^2 + ... O(x^4)) known through x^{1+...}:
        // trunc = min(3+2, 4-1) = 3
        let a = AlgebraicSeries::term(SeriesVar::InvS, c(1, 1), -1, 3);
        let b = AlgebraicSeries::term(SeriesVar::InvS, c(1, 1), 2, 4);
        let p = a.mul(&b);
        assert_eq!(p.trunc, 3);
        assert_eq!(p.coeff_at(1).unwrap(), c(1, 1));
        assert!(p.coeff_at(2).unwrap().is_zero());
        assert!(p.coeff_at(3).is_err());
    }

    #[test]
    fn deriv_s_shifts_orders() {
        // d/ds (s^2) = 2 s ; in x: x^{-2} -> 2 x^{-1}
        let a = AlgebraicSeries::term(SeriesVar::InvS, c(1, 1), -2, 5);
        let d = a.deriv_s();
        assert_eq!(d.coeff_at(-1).unwrap(), c(2, 1));
        assert_eq!(d.trunc, 6);
        // d/ds (s^{-3}) = -3 s^{-4}
        let b = AlgebraicSeries::term(SeriesVar::InvS, c(1, 1), 3, 7);
        let db = b.deriv_s();
        assert_eq!(db.coeff_at(4).unwrap(), c(-3, 1));
    }

    #[test]
    fn division_roundtrip() {
        // a / b * b == a through the guaranteed order
        let mut a = AlgebraicSeries::term(SeriesVar::InvS, c(3, 2), -1, 6);
        a = a.add(&AlgebraicSeries::term(SeriesVar::InvS, c(1, 3), 1, 6));
        let mut b = AlgebraicSeries::term(SeriesVar::InvS, c(2, 1), 0, 6);
        b = b.add(&AlgebraicSeries::term(SeriesVar::InvS, c(-1, 1), 2, 6));
        let q = a.div(&b).unwrap();
        let back = q.mul(&b);
        let diff = back.sub(&a);
        assert!(diff.is_zero_through_truncation(), "{}", diff.canonical());
    }

    #[test]
    fn tpoly_derivative_and_eval() {
        // p = t^2 - 1/2 ; p' = 2t
        let p = TPoly::t_power(AlgebraicNumber::one(), 2)
            .add(&TPoly::constant(AlgebraicNumber::from_ratio(-1, 2)));
        let d = p.derivative();
        assert_eq!(d, TPoly::t_power(AlgebraicNumber::from_int(2), 1));
        let v = p.eval(&Real::with_val(64, 3), 64);
        assert!((v.to_f64() - 8.5).abs() < 1e-14);
    }

    #[test]
    fn eval_half_powers() {
        // series 2 x^{-1} with x = n^{-1/2} at n = 9: 2*3 = 6
        let a = AlgebraicSeries::term(SeriesVar::InvSqrtN, c(2, 1), -1, 4);
        let x = Real::with_val(128, 9).recip().sqrt();
        let v = a.eval(&x, None, 128);
        assert!((v.to_f64() - 6.0).abs() < 1e-12);
    }
}
