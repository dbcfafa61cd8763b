//! Numerical data of the canonical log resolutions, log canonical thresholds, candidate poles,
//! pole-order bounds and good tuples.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arrangement::{Arrangement, Edge, EdgePoset};
use crate::error::{Error, Result};
use crate::exact::{fmt_rational, int, lcm_of_denominators, Rational};
use crate::lp::{LinearProgram, LpOutcome};

/// Which canonical resolution indexes the exceptional divisors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ResolutionChoice {
    /// Blow up all edges.
    #[default]
    Edges,
    /// Blow up dense edges only.
    Dense,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolutionDatum {
    pub edge: Edge,
    /// `nu_W = codim W`.
    pub nu: usize,
    /// `N_iW = 1` iff `W` lies on hyperplane `i`; also the coefficients of `P_W`.
    pub n_indicator: Vec<u8>,
}

impl ResolutionDatum {
    /// `P_W(b) = sum of b_i over hyperplanes containing W`.
    pub fn p(&self, b: &[Rational]) -> Rational {
        self.edge
            .hyperplanes
            .iter()
            .fold(Rational::zero(), |acc, &i| acc + &b[i])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PoleSource {
    pub hyperplanes: Vec<usize>,
    pub beta: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidatePole {
    #[serde(serialize_with = "crate::exact::ser_rational")]
    pub value: Rational,
    pub sources: Vec<PoleSource>,
    pub order_bound: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GoodTupleCertificate {
    pub tuple: Vec<u64>,
    pub edge: Edge,
    pub margins: Vec<EdgeMargin>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeMargin {
    pub hyperplanes: Vec<usize>,
    #[serde(serialize_with = "crate::exact::ser_rational")]
    pub margin: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub enum GoodTupleVerdict {
    Good(GoodTupleCertificate),
    NotGood { violations: Vec<EdgeMargin> },
}

impl GoodTupleVerdict {
    pub fn is_good(&self) -> bool {
        matches!(self, GoodTupleVerdict::Good(_))
    }
}

pub fn resolution_data(a: &Arrangement, choice: ResolutionChoice) -> Vec<ResolutionDatum> {
    let poset = EdgePoset::build(a);
    let edges: Vec<Edge> = match choice {
        ResolutionChoice::Edges => poset.edges().to_vec(),
        ResolutionChoice::Dense => a.dense_edges(&poset),
    };
    edges
        .into_iter()
        .map(|edge| {
            let n_indicator = (0..a.len())
                .map(|i| edge.hyperplanes.contains(&i) as u8)
                .collect();
            ResolutionDatum { nu: edge.codim, n_indicator, edge }
        })
        .collect()
}

pub(crate) fn to_rationals(b: &[u64]) -> Vec<Rational> {
    b.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect()
}

fn check_b(a: &Arrangement, b: &[u64]) -> Result<()> {
    if b.len() != a.len() {
        return Err(Error::InvalidInput(format!(
            "{} multiplicities given for {} hyperplanes",
            b.len(),
            a.len()
        )));
    }
    if b.contains(&0) {
        return Err(Error::InvalidInput("multiplicities must be positive".into()));
    }
    Ok(())
}

/// `min_W nu_W / P_W(b)` over all edges.
pub fn lct(a: &Arrangement, b: &[u64]) -> Result<Rational> {
    lct_with(a, b, ResolutionChoice::Edges)
}

pub fn lct_with(a: &Arrangement, b: &[u64], choice: ResolutionChoice) -> Result<Rational> {
    check_b(a, b)?;
    let bq = to_rationals(b);
    Ok(resolution_data(a, choice)
        .iter()
        .map(|d| int(d.nu as i64) / d.p(&bq))
        .min()
        .expect("at least one edge"))
}

/// Values `-(nu_W + beta/2)/P_W(b) >= s_min` for `beta <= beta_max`, merged and sorted descending.
pub fn candidate_poles_archimedean(
    a: &Arrangement,
    b: &[u64],
    beta_max: u32,
    s_min: &Rational,
    choice: ResolutionChoice,
) -> Result<Vec<CandidatePole>> {
    check_b(a, b)?;
    let bq = to_rationals(b);
    let data = resolution_data(a, choice);
    let mut merged: BTreeMap<Rational, Vec<PoleSource>> = BTreeMap::new();
    for d in &data {
        let p = d.p(&bq);
        for beta in 0..=beta_max {
            let value = -(int(d.nu as i64) + int(beta as i64) / int(2)) / &p;
            if &value < s_min {
                break;
            }
            merged.entry(value).or_default().push(PoleSource {
                hyperplanes: d.edge.hyperplanes.clone(),
                beta,
            });
        }
    }
    finish_candidates(&data, &bq, merged)
}

/// `-nu_W / P_W(b)` over dense edges.
pub fn candidate_poles_motivic(a: &Arrangement, b: &[u64]) -> Result<Vec<CandidatePole>> {
    check_b(a, b)?;
    let bq = to_rationals(b);
    let data = resolution_data(a, ResolutionChoice::Dense);
    let mut merged: BTreeMap<Rational, Vec<PoleSource>> = BTreeMap::new();
    for d in &data {
        let value = -int(d.nu as i64) / d.p(&bq);
        merged.entry(value).or_default().push(PoleSource {
            hyperplanes: d.edge.hyperplanes.clone(),
            beta: 0,
        });
    }
    finish_candidates(&data, &bq, merged)
}

fn finish_candidates(
    data: &[ResolutionDatum],
    bq: &[Rational],
    merged: BTreeMap<Rational, Vec<PoleSource>>,
) -> Result<Vec<CandidatePole>> {
    let mut out: Vec<CandidatePole> = merged
        .into_iter()
        .map(|(value, sources)| {
            let order_bound = chain_bound(data, bq, &value).max(1);
            CandidatePole { value, sources, order_bound }
        })
        .collect();
    out.reverse();
    Ok(out)
}

/// `beta = -2(P_W(b) s0 + nu_W)` when it is a natural number.
fn beta_at(d: &ResolutionDatum, bq: &[Rational], s0: &Rational) -> Option<u32> {
    let beta = -(d.p(bq) * s0 + int(d.nu as i64)) * int(2);
    (beta.is_integer() && !beta.is_negative()).then(|| {
        use num_traits::ToPrimitive;
        beta.to_integer().to_u32().unwrap_or(u32::MAX)
    })
}

// Longest chain (under hyperplane-set inclusion) of edges whose divisor can carry `s0`.
fn chain_bound(data: &[ResolutionDatum], bq: &[Rational], s0: &Rational) -> usize {
    let mut cands: Vec<&Edge> = data
        .iter()
        .filter(|d| beta_at(d, bq, s0).is_some())
        .map(|d| &d.edge)
        .collect();
    cands.sort_by_key(|e| e.hyperplanes.len());
    let mut best = vec![1usize; cands.len()];
    for i in 0..cands.len() {
        for j in 0..i {
            if cands[i].hyperplanes.len() > cands[j].hyperplanes.len()
                && cands[i].contains_hyperplanes_of(cands[j])
            {
                best[i] = best[i].max(best[j] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

/// Upper bound for the order of `s0` as a pole: the longest chain of edges through which `s0`
/// is a candidate. Exact for planar arrangements; for `n >= 3` it assumes exceptional divisors
/// meet only along nested edges.
pub fn pole_order_bound(a: &Arrangement, b: &[u64], s0: &Rational) -> Result<usize> {
    check_b(a, b)?;
    let bq = to_rationals(b);
    let data = resolution_data(a, ResolutionChoice::Edges);
    match chain_bound(&data, &bq, s0) {
        0 => Err(Error::NotACandidate(fmt_rational(s0))),
        k => Ok(k),
    }
}

pub fn pole_order_assumption(a: &Arrangement) -> Option<&'static str> {
    (a.dim() >= 3).then_some(
        "pole-order bound assumes exceptional divisors meet only along nested edges (chain criterion)",
    )
}

/// Margins `-P_W'(b) nu_W / P_W(b) + nu_W'` over every other edge of the resolution.
pub fn is_good_tuple(
    a: &Arrangement,
    b: &[u64],
    w: &Edge,
    choice: ResolutionChoice,
) -> Result<GoodTupleVerdict> {
    check_b(a, b)?;
    let bq = to_rationals(b);
    let data = resolution_data(a, choice);
    let Some(home) = data.iter().find(|d| d.edge == *w) else {
        return Err(Error::NotAnEdge(format!(
            "{:?} is not an edge of the chosen resolution",
            w.hyperplanes
        )));
    };
    let ratio = int(home.nu as i64) / home.p(&bq);
    let margins: Vec<EdgeMargin> = data
        .iter()
        .filter(|d| d.edge != *w)
        .map(|d| EdgeMargin {
            hyperplanes: d.edge.hyperplanes.clone(),
            margin: int(d.nu as i64) - d.p(&bq) * &ratio,
        })
        .collect();
    let violations: Vec<EdgeMargin> = margins
        .iter()
        .filter(|m| !m.margin.is_positive())
        .cloned()
        .collect();
    Ok(if violations.is_empty() {
        GoodTupleVerdict::Good(GoodTupleCertificate {
            tuple: b.to_vec(),
            edge: home.edge.clone(),
            margins,
        })
    } else {
        GoodTupleVerdict::NotGood { violations }
    })
}

/// Constructs a good tuple at the origin by exact LP: with `x_i = -u_i`,
/// maximize `e` subject to `sum x_i = n`, `sum_{i in W} x_i + e <= nu_W` for `W != 0`, `x_i >= e`.
/// For a non-origin edge the problem is solved on the localization at that edge and the
/// certificate refers to the localized arrangement.
pub fn find_good_tuple(
    a: &Arrangement,
    w: Option<&Edge>,
    choice: ResolutionChoice,
) -> Result<GoodTupleCertificate> {
    if let Some(w) = w {
        let poset = EdgePoset::build(a);
        if poset.origin() != Some(w) {
            let loc = a.localize(w)?;
            return find_good_tuple(&loc, None, choice);
        }
    }
    let class = a.classify();
    if !class.essential {
        return Err(Error::Hypothesis("arrangement is not essential".into()));
    }
    if class.decomposable {
        return Err(Error::Hypothesis("arrangement is decomposable".into()));
    }
    let r = a.len();
    let n = a.dim();
    let data = resolution_data(a, choice);
    let origin = data
        .iter()
        .find(|d| d.nu == n)
        .map(|d| d.edge.clone())
        .expect("essential arrangement has the origin as an edge");
    let mut lp = LinearProgram {
        num_vars: r + 1,
        objective: (0..=r).map(|j| int((j == r) as i64)).collect(),
        eq: vec![((0..=r).map(|j| int((j < r) as i64)).collect(), int(n as i64))],
        le: Vec::new(),
    };
    for d in data.iter().filter(|d| d.edge != origin) {
        let mut row: Vec<Rational> = d.n_indicator.iter().map(|&x| int(x as i64)).collect();
        row.push(Rational::one());
        lp.le.push((row, int(d.nu as i64)));
    }
    for i in 0..r {
        let mut row = vec![Rational::zero(); r + 1];
        row[i] = -Rational::one();
        row[r] = Rational::one();
        lp.le.push((row, Rational::zero()));
    }
    let x = match lp.solve() {
        LpOutcome::Optimal { x, value } if value.is_positive() => x,
        _ => return Err(Error::NoGoodTuple),
    };
    let l = Rational::from_integer(lcm_of_denominators(&x[..r]));
    let tuple: Vec<u64> = x[..r]
        .iter()
        .map(|xi| {
            use num_traits::ToPrimitive;
            (xi * &l).to_integer().to_u64().expect("tuple entry fits in u64")
        })
        .collect();
    match is_good_tuple(a, &tuple, &origin, choice)? {
        GoodTupleVerdict::Good(cert) => Ok(cert),
        GoodTupleVerdict::NotGood { .. } => unreachable!("LP optimum with positive margin is a good tuple"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn three_lines() -> Arrangement {
        Arrangement::from_i64_reduced(2, &[&[1, 0], &[1, 1], &[1, -1]]).unwrap()
    }

    #[test]
    fn data_of_three_lines() {
        let data = resolution_data(&three_lines(), ResolutionChoice::Edges);
        assert_eq!(data.len(), 4);
        assert_eq!(data[3].nu, 2);
        assert_eq!(data[3].n_indicator, vec![1, 1, 1]);
        let b = to_rationals(&[3, 1, 1]);
        assert_eq!(data[3].p(&b), int(5));
        assert_eq!(data[0].p(&b), int(3));
    }

    #[test]
    fn single_hyperplane_datum() {
        let a = Arrangement::from_i64(1, &[&[1]], &[4]).unwrap();
        let data = resolution_data(&a, ResolutionChoice::Edges);
        assert_eq!(data.len(), 1);
        assert_eq!(data[0].nu, 1);
        assert_eq!(lct(&a, &[1]).unwrap(), int(1));
    }

    #[test]
    fn dense_data_of_four_planes() {
        let a =
            Arrangement::from_i64_reduced(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 1]])
                .unwrap();
        let dense = resolution_data(&a, ResolutionChoice::Dense);
        assert_eq!(dense.len(), 5);
        assert_eq!(dense.iter().filter(|d| d.nu == 2).count(), 0);
    }

    #[test]
    fn lct_examples() {
        assert_eq!(lct(&three_lines(), &[1, 1, 1]).unwrap(), rat(2, 3));
        assert_eq!(lct(&three_lines(), &[3, 1, 1]).unwrap(), rat(1, 3));
    }

    #[test]
    fn archimedean_candidates() {
        let c = candidate_poles_archimedean(&three_lines(), &[1, 1, 1], 0, &int(-2), ResolutionChoice::Edges)
            .unwrap();
        let values: Vec<Rational> = c.iter().map(|p| p.value.clone()).collect();
        assert_eq!(values, vec![rat(-2, 3), int(-1)]);
        assert_eq!(c[1].sources.len(), 3);

        let c = candidate_poles_archimedean(&three_lines(), &[3, 1, 1], 2, &int(-1), ResolutionChoice::Edges)
            .unwrap();
        let values: Vec<Rational> = c.iter().map(|p| p.value.clone()).collect();
        // origin: -2/5, -1/2, -3/5; V1: -1/3, -1/2, -2/3; V2, V3: -1
        assert_eq!(
            values,
            vec![rat(-1, 3), rat(-2, 5), rat(-1, 2), rat(-3, 5), rat(-2, 3), int(-1)]
        );
        let half = c.iter().find(|p| p.value == rat(-1, 2)).unwrap();
        assert_eq!(half.sources.len(), 2);
        assert_eq!(half.order_bound, 2);
    }

    #[test]
    fn motivic_candidates() {
        let c = candidate_poles_motivic(&three_lines(), &[1, 1, 1]).unwrap();
        let values: Vec<Rational> = c.iter().map(|p| p.value.clone()).collect();
        assert_eq!(values, vec![rat(-2, 3), int(-1)]);
        let xy = Arrangement::from_i64_reduced(2, &[&[1, 0], &[0, 1]]).unwrap();
        let c = candidate_poles_motivic(&xy, &[1, 1]).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].value, int(-1));
    }

    #[test]
    fn good_tuple_margins() {
        let a = three_lines();
        let origin = EdgePoset::build(&a).origin().unwrap().clone();
        let GoodTupleVerdict::Good(cert) = is_good_tuple(&a, &[2, 2, 2], &origin, ResolutionChoice::Edges).unwrap()
        else {
            panic!("expected good tuple")
        };
        assert!(cert.margins.iter().all(|m| m.margin == rat(1, 3)));
        let GoodTupleVerdict::NotGood { violations } =
            is_good_tuple(&a, &[3, 1, 1], &origin, ResolutionChoice::Edges).unwrap()
        else {
            panic!("expected violation")
        };
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].margin, rat(-1, 5));
    }

    #[test]
    fn constructed_tuples() {
        let c = find_good_tuple(&three_lines(), None, ResolutionChoice::Edges).unwrap();
        assert_eq!(c.tuple, vec![2, 2, 2]);
        let four = Arrangement::from_i64_reduced(2, &[&[1, 0], &[0, 1], &[1, 1], &[1, -1]]).unwrap();
        assert_eq!(find_good_tuple(&four, None, ResolutionChoice::Edges).unwrap().tuple, vec![1, 1, 1, 1]);
        let planes =
            Arrangement::from_i64_reduced(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 1]])
                .unwrap();
        assert_eq!(find_good_tuple(&planes, None, ResolutionChoice::Edges).unwrap().tuple, vec![3, 3, 3, 3]);
    }

    #[test]
    fn decomposable_rejected() {
        let xy = Arrangement::from_i64_reduced(2, &[&[1, 0], &[0, 1]]).unwrap();
        assert!(matches!(
            find_good_tuple(&xy, None, ResolutionChoice::Edges),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn pole_order_examples() {
        let a = three_lines();
        assert_eq!(pole_order_bound(&a, &[2, 1, 1], &rat(-1, 2)).unwrap(), 2);
        assert_eq!(pole_order_bound(&a, &[1, 1, 1], &rat(-2, 3)).unwrap(), 1);
        assert_eq!(pole_order_bound(&a, &[3, 1, 1], &rat(-2, 5)).unwrap(), 1);
        assert!(matches!(
            pole_order_bound(&a, &[1, 1, 1], &rat(-1, 7)),
            Err(Error::NotACandidate(_))
        ));
    }
}
