use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{fmt_rational, Poly, Rational};
use crate::error::{Error, Result};

/// Reduced quotient `num/den` with `den` monic and `gcd(num, den) = 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pole {
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
    pub order: usize,
    #[serde(serialize_with = "ser_opt_rational")]
    pub residue: Option<Rational>,
}

pub fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(q))
}

fn ser_opt_rational<S: serde::Serializer>(
    q: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_str(&fmt_rational(q)),
        None => s.serialize_none(),
    }
}

impl RationalFunction {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Self { num, den: Poly::one() });
        }
        let g = num.gcd(&den);
        let num = num.div_rem(&g).0;
        let den = den.div_rem(&g).0;
        let lead = den.leading().recip();
        Ok(Self {
            num: num.scale(&lead),
            den: den.scale(&lead),
        })
    }

    pub fn from_poly(p: Poly) -> Self {
        Self { num: p, den: Poly::one() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Value at `s`; `None` at a pole.
    pub fn eval(&self, s: &Rational) -> Option<Rational> {
        let d = self.den.eval(s);
        (!d.is_zero()).then(|| self.num.eval(s) / d)
    }

    pub fn eval_f64(&self, s: f64) -> f64 {
        self.num.eval_f64(s) / self.den.eval_f64(s)
    }

    /// `f(c*s)`.
    pub fn compose_scale(&self, c: &Rational) -> Self {
        Self::new(self.num.compose_scale(c), self.den.compose_scale(c))
            .expect("nonzero scale keeps the denominator nonzero")
    }

    pub fn recip(&self) -> Result<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }

    /// Poles with orders, descending by value; simple poles carry their residue.
    pub fn poles(&self) -> Result<Vec<Pole>> {
        let (roots, rest) = self.den.rational_roots();
        if rest.degree().unwrap_or(0) > 0 {
            return Err(Error::NonRationalPole {
                factor: rest.to_compact_string(),
            });
        }
        let dprime = self.den.derivative();
        Ok(roots
            .into_iter()
            .map(|(value, order)| {
                let residue = (order == 1).then(|| self.num.eval(&value) / dprime.eval(&value));
                Pole { value, order, residue }
            })
            .collect())
    }

    /// Integer-coefficient display with the denominator split into linear factors,
    /// e.g. `(-s+2)/((3s+2)(s+1))`.
    pub fn to_factored_string(&self) -> String {
        let (roots, rest) = self.den.rational_roots();
        let mut factors = Vec::new();
        let mut scale = Rational::one();
        for (r, m) in &roots {
            let (p, q) = (r.numer().clone(), r.denom().clone());
            let lin = Poly::new(vec![Rational::from_integer(-p), Rational::from_integer(q.clone())]);
            let text = lin.to_compact_string();
            let body = if m > &1 { format!("({text})^{m}") } else { format!("({text})") };
            factors.push(body);
            for _ in 0..*m {
                scale *= Rational::from_integer(q.clone());
            }
        }
        let rest_ints = rest.primitive_integer();
        if rest.degree().unwrap_or(0) > 0 {
            let p = Poly::new(rest_ints.iter().map(|c| Rational::from_integer(c.clone())).collect());
            scale *= p.leading();
            factors.push(format!("({})", p.to_compact_string()));
        }
        let num = self.num.scale(&scale);
        let l = super::lcm_of_denominators(num.coeffs());
        let num = num.scale(&Rational::from_integer(l.clone()));
        let mut den = factors.concat();
        if l != BigInt::one() {
            den = format!("{l}{den}");
        }
        let num_text = if num.coeffs().len() > 1 {
            format!("({})", num.to_compact_string())
        } else {
            num.to_compact_string()
        };
        if den.is_empty() {
            num.to_compact_string()
        } else if factors.len() == 1 && l == BigInt::one() {
            format!("{num_text}/{den}")
        } else {
            format!("{num_text}/({den})")
        }
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_factored_string())
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_factored_string())
    }
}

impl Serialize for RationalFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_factored_string())
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RationalFunction::new(num, &self.den * &rhs.den).expect("product of monic polynomials")
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        let neg = RationalFunction {
            num: -&rhs.num,
            den: rhs.den.clone(),
        };
        self + &neg
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction::new(&self.num * &rhs.num, &self.den * &rhs.den)
            .expect("product of monic polynomials")
    }
}
