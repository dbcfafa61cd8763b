//! Local topological zeta function at the origin of a central line arrangement in the plane,
//! from the resolution obtained by one blow-up of the origin.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arrangement::Arrangement;
use crate::error::{Error, Result};
use crate::exact::{fmt_rational, int, Poly, RationalFunction, Rational};

#[derive(Clone, Debug, Serialize)]
pub struct Stratum {
    pub label: String,
    pub euler_characteristic: i64,
    /// `(N, nu)` of each divisor through the stratum.
    pub factors: Vec<(u64, u64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TopZeta {
    pub value: RationalFunction,
    pub strata: Vec<Stratum>,
    /// Fewer than three lines: the n/d statements do not apply.
    pub outside_hypotheses: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NdPoleStatus {
    pub survives: bool,
    /// Order of `-2/d` as a pole (0 when it cancels).
    pub order: usize,
    /// Some `b_i = d/2`, so order 2 is possible a priori.
    pub potential_order_two: bool,
    #[serde(serialize_with = "ser_opt")]
    pub residue: Option<Rational>,
}

fn ser_opt<S: serde::Serializer>(q: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_str(&fmt_rational(q)),
        None => s.serialize_none(),
    }
}

/// `Z(s) = (2-r)/(ds+2) + sum_i 1/((ds+2)(b_i s+1))`.
pub fn topzeta_from_multiplicities(b: &[u64]) -> Result<TopZeta> {
    if b.is_empty() || b.contains(&0) {
        return Err(Error::InvalidInput("multiplicities must be positive and nonempty".into()));
    }
    let r = b.len() as i64;
    let d: u64 = b.iter().sum();
    let factor = |n: u64, nu: u64| {
        RationalFunction::new(Poly::one(), Poly::linear(int(n as i64), int(nu as i64)))
            .expect("nonzero linear denominator")
    };
    let exceptional = factor(d, 2);
    let mut strata = vec![Stratum {
        label: "E0 minus strict transforms".into(),
        euler_characteristic: 2 - r,
        factors: vec![(d, 2)],
    }];
    let mut value = &RationalFunction::constant(int(2 - r)) * &exceptional;
    for (i, &bi) in b.iter().enumerate() {
        strata.push(Stratum {
            label: format!("E0 meets line {}", i + 1),
            euler_characteristic: 1,
            factors: vec![(d, 2), (bi, 1)],
        });
        value = &value + &(&exceptional * &factor(bi, 1));
    }
    Ok(TopZeta { value, strata, outside_hypotheses: r < 3 })
}

pub fn topzeta_local_dim2(a: &Arrangement, b: &[u64]) -> Result<TopZeta> {
    if a.dim() != 2 {
        return Err(Error::Hypothesis(format!(
            "topological zeta is implemented for n = 2 only, got n = {}",
            a.dim()
        )));
    }
    if b.len() != a.len() {
        return Err(Error::InvalidInput(format!(
            "{} multiplicities given for {} lines",
            b.len(),
            a.len()
        )));
    }
    topzeta_from_multiplicities(b)
}

pub fn nd_pole_status(b: &[u64]) -> Result<NdPoleStatus> {
    let z = topzeta_from_multiplicities(b)?;
    let d: u64 = b.iter().sum();
    let target = -int(2) / int(d as i64);
    let pole = z.value.poles()?.into_iter().find(|p| p.value == target);
    Ok(NdPoleStatus {
        survives: pole.is_some(),
        order: pole.as_ref().map_or(0, |p| p.order),
        potential_order_two: b.iter().any(|&x| 2 * x == d),
        residue: pole.and_then(|p| p.residue),
    })
}

pub fn nd_pole_survives(a: &Arrangement, b: &[u64]) -> Result<NdPoleStatus> {
    topzeta_local_dim2(a, b)?;
    nd_pole_status(b)
}

/// Non-increasing tuples in `[1, b_max]^r` with no `b_i = d/2` for which `-2/d` is not a pole.
pub fn scan_cancellations(r: usize, b_max: u64) -> Result<Vec<Vec<u64>>> {
    if r < 3 || b_max == 0 {
        return Err(Error::InvalidInput("scan needs r >= 3 and b_max >= 1".into()));
    }
    let mut tuples = Vec::new();
    let mut current = vec![b_max; r];
    loop {
        tuples.push(current.clone());
        // previous non-increasing tuple in reverse lexicographic order
        let Some(i) = (0..r).rev().find(|&i| current[i] > 1) else {
            break;
        };
        current[i] -= 1;
        for j in i + 1..r {
            current[j] = current[i];
        }
    }
    let hits: Vec<Option<Vec<u64>>> = tuples
        .into_par_iter()
        .map(|b| {
            let d: u64 = b.iter().sum();
            if b.iter().any(|&x| 2 * x == d) {
                return Ok(None);
            }
            Ok((!nd_pole_status(&b)?.survives).then_some(b))
        })
        .collect::<Result<_>>()?;
    let mut hits: Vec<Vec<u64>> = hits.into_iter().flatten().collect();
    hits.sort();
    Ok(hits)
}

/// Poles of `Z(m b)` are the poles of `Z(b)` divided by `m`, with the same orders.
pub fn scaling_pole_check(a: &Arrangement, b: &[u64], m: u64) -> Result<bool> {
    if m == 0 {
        return Err(Error::InvalidInput("scale must be positive".into()));
    }
    let base = topzeta_local_dim2(a, b)?.value.poles()?;
    let scaled_b: Vec<u64> = b.iter().map(|x| x * m).collect();
    let scaled = topzeta_local_dim2(a, &scaled_b)?.value.poles()?;
    let m = int(m as i64);
    let expected: Vec<(Rational, usize)> = base.iter().map(|p| (&p.value / &m, p.order)).collect();
    let got: Vec<(Rational, usize)> = scaled.iter().map(|p| (p.value.clone(), p.order)).collect();
    Ok(expected == got)
}

/// Sum over strata of `chi * prod 1/(N s + nu)`, evaluated independently of `value`.
pub fn strata_sum(z: &TopZeta) -> RationalFunction {
    z.strata.iter().fold(RationalFunction::constant(Rational::zero()), |acc, st| {
        let mut den = Poly::one();
        for &(n, nu) in &st.factors {
            den = &den * &Poly::linear(int(n as i64), int(nu as i64));
        }
        let term = RationalFunction::new(Poly::constant(int(st.euler_characteristic)), den)
            .expect("nonzero");
        &acc + &term
    })
}

pub fn value_at_zero(z: &TopZeta) -> Rational {
    z.value.eval(&Rational::zero()).unwrap_or_else(Rational::one)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn three_reduced_lines() {
        let z = topzeta_from_multiplicities(&[1, 1, 1]).unwrap();
        let expected = RationalFunction::new(
            Poly::from_i64(&[2, -1]),
            &Poly::from_i64(&[2, 3]) * &Poly::from_i64(&[1, 1]),
        )
        .unwrap();
        assert_eq!(z.value, expected);
        assert_eq!(value_at_zero(&z), int(1));
        assert_eq!(strata_sum(&z), z.value);
    }

    #[test]
    fn smooth_line() {
        let z = topzeta_from_multiplicities(&[1]).unwrap();
        assert!(z.outside_hypotheses);
        assert_eq!(value_at_zero(&z), int(1));
        let poles: Vec<Rational> = z.value.poles().unwrap().into_iter().map(|p| p.value).collect();
        assert!(poles.contains(&int(-1)));
        assert!(poles.iter().all(|p| *p == int(-1) || *p == int(-2)));
    }

    #[test]
    fn two_lines_double_pole() {
        let z = topzeta_from_multiplicities(&[1, 1]).unwrap();
        let expected =
            RationalFunction::new(Poly::one(), Poly::from_i64(&[1, 2, 1])).unwrap();
        assert_eq!(z.value, expected);
        let st = nd_pole_status(&[1, 1]).unwrap();
        assert!(st.survives && st.potential_order_two);
        assert_eq!(st.order, 2);
    }

    #[test]
    fn nd_pole_of_three_lines() {
        let st = nd_pole_status(&[1, 1, 1]).unwrap();
        assert_eq!(st.order, 1);
        assert_eq!(st.residue, Some(rat(8, 3)));
    }

    #[test]
    fn cancellation_condition_matches_scan() {
        // pole at -2/d cancels iff (2 - r) + sum d/(d - 2 b_i) = 0 when no b_i = d/2
        for b in [[1u64, 1, 1], [3, 1, 1], [4, 2, 1], [5, 3, 3], [2, 2, 1]] {
            let d: i64 = b.iter().map(|&x| x as i64).sum();
            let cond = b.iter().fold(int(2 - b.len() as i64), |acc, &x| {
                acc + int(d) / int(d - 2 * x as i64)
            });
            assert_eq!(nd_pole_status(&b).unwrap().survives, !cond.is_zero(), "{b:?}");
        }
    }

    #[test]
    fn scan_small() {
        assert!(scan_cancellations(3, 1).unwrap().is_empty());
        assert!(scan_cancellations(2, 3).is_err());
    }

    #[test]
    fn scaling() {
        let a = Arrangement::from_i64_reduced(2, &[&[1, 0], &[1, 1], &[1, -1]]).unwrap();
        assert!(scaling_pole_check(&a, &[1, 1, 1], 2).unwrap());
        assert!(scaling_pole_check(&a, &[1, 1, 1], 1).unwrap());
        let xy = Arrangement::from_i64_reduced(2, &[&[1, 0], &[0, 1]]).unwrap();
        assert!(scaling_pole_check(&xy, &[1, 1], 3).unwrap());
        let z = topzeta_local_dim2(&xy, &[3, 3]).unwrap();
        let p = z.value.poles().unwrap();
        assert_eq!((p[0].value.clone(), p[0].order), (rat(-1, 3), 2));
    }
}
