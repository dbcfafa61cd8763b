use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{fmt_rational, Rational};

/// Univariate polynomial over Q in the variable `s`; `coeffs[k]` multiplies `s^k`.
/// No trailing zero coefficients are stored, so the zero polynomial is empty.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| super::int(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    /// `a*s + b`.
    pub fn linear(a: Rational, b: Rational) -> Self {
        Self::new(vec![b, a])
    }

    /// Monic product of `(s - r)` over the roots, with repetition.
    pub fn from_roots<'a>(roots: impl IntoIterator<Item = &'a Rational>) -> Self {
        roots.into_iter().fold(Self::one(), |acc, r| {
            &acc * &Self::linear(Rational::one(), -r.clone())
        })
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, s: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * s + c)
    }

    pub fn eval_f64(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * s + super::to_f64(c))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading().recip())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * super::int(k as i64))
                .collect(),
        )
    }

    /// Substitutes `s -> c*s`.
    pub fn compose_scale(&self, c: &Rational) -> Self {
        let mut pow = Rational::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            out.push(a * &pow);
            pow = &pow * c;
        }
        Self::new(out)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead_inv = divisor.leading().recip();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rational::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let q = rem.last().unwrap() * &lead_inv;
            if !q.is_zero() {
                for (i, d) in divisor.coeffs.iter().enumerate() {
                    rem[k + i] = &rem[k + i] - &q * d;
                }
            }
            quot[k] = q;
            rem.pop();
            while rem.last().is_some_and(Zero::is_zero) {
                rem.pop();
            }
        }
        (Poly::new(quot), Poly::new(rem))
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Integer polynomial with the same roots: cleared denominators, content removed,
    /// positive leading coefficient.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return Vec::new();
        }
        let l = super::lcm_of_denominators(&self.coeffs);
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        let sign = if ints.last().unwrap().is_negative() {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        ints.into_iter().map(|x| x / &g * &sign).collect()
    }

    /// Rational roots with multiplicity, found by the rational root theorem with exact
    /// deflation. Returns the roots (descending) and the remaining factor without
    /// rational roots (monic, possibly constant 1).
    pub fn rational_roots(&self) -> (Vec<(Rational, usize)>, Poly) {
        assert!(!self.is_zero(), "roots of the zero polynomial");
        let mut rest = self.monic();
        let mut roots: Vec<(Rational, usize)> = Vec::new();
        let mut zero_mult = 0;
        while rest.coeffs.len() > 1 && rest.coeffs[0].is_zero() {
            rest = Poly::new(rest.coeffs[1..].to_vec());
            zero_mult += 1;
        }
        if zero_mult > 0 {
            roots.push((Rational::zero(), zero_mult));
        }
        if rest.degree().unwrap_or(0) > 0 {
            let ints = rest.primitive_integer();
            let ps = divisors(&ints[0].abs());
            let qs = divisors(ints.last().unwrap());
            let mut candidates: Vec<Rational> = Vec::new();
            for p in &ps {
                for q in &qs {
                    let c = Rational::new(p.clone(), q.clone());
                    candidates.push(c.clone());
                    candidates.push(-c);
                }
            }
            candidates.sort();
            candidates.dedup();
            for c in candidates.into_iter().rev() {
                let lin = Poly::linear(Rational::one(), -c.clone());
                let mut mult = 0;
                while rest.degree().unwrap_or(0) > 0 && rest.eval(&c).is_zero() {
                    rest = rest.div_rem(&lin).0;
                    mult += 1;
                }
                if mult > 0 {
                    roots.push((c, mult));
                }
            }
        }
        roots.sort_by(|a, b| b.0.cmp(&a.0));
        (roots, rest.monic())
    }

    /// Compact display in `s`, e.g. `3s^2-s+2/3`.
    pub fn to_compact_string(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if neg {
                out.push('-');
            } else if !out.is_empty() {
                out.push('+');
            }
            let mono = match k {
                0 => String::new(),
                1 => "s".into(),
                _ => format!("s^{k}"),
            };
            if k == 0 {
                out.push_str(&fmt_rational(&a));
            } else if a.is_one() {
                out.push_str(&mono);
            } else if a.is_integer() {
                out.push_str(&format!("{}{mono}", a.numer()));
            } else {
                out.push_str(&format!("({}){mono}", fmt_rational(&a)));
            }
        }
        out
    }
}

const TRIAL_DIVISION_LIMIT: u64 = 100_000_000_000_000;

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    if let Some(m) = n.to_u64().filter(|&m| m <= TRIAL_DIVISION_LIMIT) {
        let mut small = Vec::new();
        let mut large = Vec::new();
        let mut d = 1u64;
        while d.saturating_mul(d) <= m {
            if m % d == 0 {
                small.push(BigInt::from(d));
                if d != m / d {
                    large.push(BigInt::from(m / d));
                }
            }
            d += 1;
        }
        small.extend(large.into_iter().rev());
        return small;
    }
    // Too large for trial division; only the trivial divisors are tried.
    vec![BigInt::one(), n]
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_compact_string())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_compact_string())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Rational::zero();
        Poly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + rhs.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + a * b;
            }
        }
        Poly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    #[test]
    fn division_identity() {
        let a = Poly::from_i64(&[-1, 0, 0, 2, 5]);
        let b = Poly::from_i64(&[3, 0, 2]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(&(&q * &b) + &r, a);
        assert!(r.degree().unwrap() < 2);
    }

    #[test]
    fn gcd_of_shared_factor() {
        let a = Poly::from_i64(&[-1, 0, 1]);
        let b = Poly::from_i64(&[-1, 1]);
        assert_eq!(a.gcd(&b), b);
    }

    #[test]
    fn roots_with_multiplicity() {
        let p = Poly::from_roots(&[int(-1), int(-1), rat(-2, 3), int(0)]);
        let (roots, rest) = p.scale(&int(9)).rational_roots();
        assert_eq!(
            roots,
            vec![(int(0), 1), (rat(-2, 3), 1), (int(-1), 2)]
        );
        assert_eq!(rest, Poly::one());
    }

    #[test]
    fn irrational_remainder() {
        let p = &Poly::from_i64(&[-2, 0, 1]) * &Poly::from_i64(&[1, 1]);
        let (roots, rest) = p.rational_roots();
        assert_eq!(roots, vec![(int(-1), 1)]);
        assert_eq!(rest, Poly::from_i64(&[-2, 0, 1]));
    }

    #[test]
    fn compact_display() {
        assert_eq!(Poly::from_i64(&[2, -1]).to_string(), "-s+2");
        assert_eq!(Poly::from_i64(&[2, 5, 3]).to_string(), "3s^2+5s+2");
        assert_eq!(Poly::new(vec![rat(2, 3), rat(-1, 3)]).to_string(), "-(1/3)s+2/3");
    }
}
