//! Closed-form Bernstein-Sato root data for a small catalog of arrangements.

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arrangement::Arrangement;
use crate::error::{Error, Result};
use crate::exact::{fmt_rational, int, rat, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    GenericReduced,
    NormalCrossings,
    TwoLinePowers,
    SmoothPower,
}

/// Roots of `b_f` as a multiset, sorted descending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BFunction {
    #[serde(serialize_with = "ser_roots")]
    roots: Vec<(Rational, usize)>,
    pub provenance: Provenance,
}

fn ser_roots<S: serde::Serializer>(
    roots: &[(Rational, usize)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(roots.len()))?;
    for (q, m) in roots {
        seq.serialize_element(&(fmt_rational(q), m))?;
    }
    seq.end()
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CatalogEntry {
    Known(BFunction),
    Unknown { reason: String },
}

impl BFunction {
    fn from_roots(list: impl IntoIterator<Item = Rational>, provenance: Provenance) -> Self {
        let mut roots: Vec<(Rational, usize)> = Vec::new();
        let mut all: Vec<Rational> = list.into_iter().collect();
        all.sort_by(|a, b| b.cmp(a));
        for q in all {
            match roots.last_mut() {
                Some((last, m)) if *last == q => *m += 1,
                _ => roots.push((q, 1)),
            }
        }
        Self { roots, provenance }
    }

    pub fn roots(&self) -> &[(Rational, usize)] {
        &self.roots
    }

    pub fn multiplicity(&self, q: &Rational) -> usize {
        self.roots
            .iter()
            .find(|(r, _)| r == q)
            .map_or(0, |(_, m)| *m)
    }

    pub fn has_root(&self, q: &Rational) -> bool {
        self.multiplicity(q) > 0
    }

    pub fn degree(&self) -> usize {
        self.roots.iter().map(|(_, m)| m).sum()
    }
}

/// `(s+1)^(n-1) prod_{j=0}^{2d-n-2} (s + (j+n)/d)` for `d > n`; for `d = n` the arrangement is
/// normal crossings and the answer is `(s+1)^n`.
pub fn bfun_generic_reduced(n: u32, d: u32) -> Result<BFunction> {
    if n < 2 || d < n {
        return Err(Error::InvalidInput(format!(
            "generic reduced formula needs d >= n >= 2, got n={n}, d={d}"
        )));
    }
    if d == n {
        return Ok(BFunction::from_roots(
            std::iter::repeat_n(int(-1), n as usize),
            Provenance::NormalCrossings,
        ));
    }
    let ones = std::iter::repeat_n(int(-1), (n - 1) as usize);
    let rest = (0..=(2 * d - n - 2)).map(|j| rat(-((j + n) as i64), d as i64));
    Ok(BFunction::from_roots(ones.chain(rest), Provenance::GenericReduced))
}

/// `x^b1 y^b2`.
pub fn bfun_two_line_powers(b1: u32, b2: u32) -> Result<BFunction> {
    if b1 == 0 || b2 == 0 {
        return Err(Error::InvalidInput("powers must be positive".into()));
    }
    let roots = (1..=b1)
        .map(|i| rat(-(i as i64), b1 as i64))
        .chain((1..=b2).map(|j| rat(-(j as i64), b2 as i64)));
    Ok(BFunction::from_roots(roots, Provenance::TwoLinePowers))
}

/// `x^a`.
pub fn bfun_smooth_power(a: u32) -> Result<BFunction> {
    if a == 0 {
        return Err(Error::InvalidInput("power must be positive".into()));
    }
    Ok(BFunction::from_roots(
        (1..=a).map(|i| rat(-(i as i64), a as i64)),
        Provenance::SmoothPower,
    ))
}

/// Matches an arrangement with multiplicities against the catalog.
pub fn catalog_lookup(a: &Arrangement) -> CatalogEntry {
    let b = a.multiplicities();
    let n = a.dim();
    let essential = a.rank() == n;
    if a.len() == 1 {
        return CatalogEntry::Known(bfun_smooth_power(b[0]).expect("positive multiplicity"));
    }
    if n == 2 && a.len() == 2 && essential {
        return CatalogEntry::Known(bfun_two_line_powers(b[0], b[1]).expect("positive"));
    }
    if b.iter().all(|&x| x == 1) && essential && n >= 2 && is_generic(a) {
        return CatalogEntry::Known(
            bfun_generic_reduced(n as u32, a.len() as u32).expect("d >= n for essential"),
        );
    }
    CatalogEntry::Unknown {
        reason: "arrangement outside the closed-form catalog".into(),
    }
}

/// Every `min(n, r)` of the normals are linearly independent.
pub fn is_generic(a: &Arrangement) -> bool {
    let k = a.dim().min(a.len());
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        if a.rank_of(&subset) < k {
            return false;
        }
        // next k-subset in lexicographic order
        let r = a.len();
        let Some(i) = (0..k).rev().find(|&i| subset[i] < r - k + i) else {
            return true;
        };
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PoleRootEntry {
    #[serde(serialize_with = "crate::exact::ser_rational")]
    pub pole: Rational,
    /// Smallest `alpha` with `pole + alpha` a root, if any.
    pub shift: Option<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PoleRootReport {
    pub entries: Vec<PoleRootEntry>,
    pub consistent: bool,
    pub caveat: Option<String>,
}

/// For each pole `p`: if `p >= -1`, is `p` a root; otherwise is `p + alpha` a root for some
/// `0 <= alpha <= floor(-p)`.
pub fn check_pole_root_implication(bf: &BFunction, poles: &[Rational]) -> PoleRootReport {
    let entries: Vec<PoleRootEntry> = poles
        .iter()
        .map(|p| {
            let max_shift = if *p >= -Rational::one() {
                0
            } else {
                (-p).floor().to_integer().to_u32().unwrap_or(u32::MAX)
            };
            let shift = (0..=max_shift).find(|&alpha| bf.has_root(&(p + int(alpha as i64))));
            PoleRootEntry { pole: p.clone(), shift }
        })
        .collect();
    let consistent = entries.iter().all(|e| e.shift.is_some());
    let caveat = match bf.provenance {
        Provenance::TwoLinePowers | Provenance::NormalCrossings => Some(
            "decomposable arrangement: the pole/root statements for indecomposable arrangements do not apply"
                .to_string(),
        ),
        Provenance::SmoothPower => Some("single hyperplane: smooth reduced divisor".to_string()),
        Provenance::GenericReduced => None,
    };
    PoleRootReport { entries, consistent, caveat }
}

/// Asserts the catalog invariants that every entry satisfies.
pub fn roots_are_well_formed(bf: &BFunction) -> bool {
    bf.has_root(&-Rational::one())
        && bf.roots.iter().all(|(q, m)| q.is_negative() && *m > 0 && !q.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(bf: &BFunction) -> Vec<Rational> {
        bf.roots()
            .iter()
            .flat_map(|(q, m)| std::iter::repeat_n(q.clone(), *m))
            .collect()
    }

    #[test]
    fn generic_two_three() {
        let bf = bfun_generic_reduced(2, 3).unwrap();
        assert_eq!(flat(&bf), vec![rat(-2, 3), int(-1), int(-1), rat(-4, 3)]);
    }

    #[test]
    fn generic_three_four() {
        let bf = bfun_generic_reduced(3, 4).unwrap();
        assert_eq!(
            flat(&bf),
            vec![rat(-3, 4), int(-1), int(-1), int(-1), rat(-5, 4), rat(-3, 2)]
        );
        assert!(bf.has_root(&rat(-3, 4)));
    }

    #[test]
    fn generic_range() {
        assert!(bfun_generic_reduced(3, 2).is_err());
        assert!(bfun_generic_reduced(1, 4).is_err());
        assert_eq!(flat(&bfun_generic_reduced(2, 2).unwrap()), vec![int(-1); 2]);
        assert_eq!(flat(&bfun_generic_reduced(3, 3).unwrap()), vec![int(-1); 3]);
    }

    #[test]
    fn two_line_powers() {
        assert_eq!(flat(&bfun_two_line_powers(1, 1).unwrap()), vec![int(-1), int(-1)]);
        let bf = bfun_two_line_powers(3, 2).unwrap();
        assert_eq!(
            flat(&bf),
            vec![rat(-1, 3), rat(-1, 2), rat(-2, 3), int(-1), int(-1)]
        );
        assert!(!bf.has_root(&rat(-2, 5)));
        assert_eq!(bf, bfun_two_line_powers(2, 3).unwrap());
    }

    #[test]
    fn smooth_powers() {
        assert_eq!(flat(&bfun_smooth_power(1).unwrap()), vec![int(-1)]);
        assert_eq!(flat(&bfun_smooth_power(2).unwrap()), vec![rat(-1, 2), int(-1)]);
        assert_eq!(bfun_smooth_power(5).unwrap().degree(), 5);
    }

    #[test]
    fn pole_root_checks() {
        let generic = bfun_generic_reduced(2, 3).unwrap();
        let report = check_pole_root_implication(&generic, &[rat(-2, 3)]);
        assert!(report.consistent && report.caveat.is_none());

        let two = bfun_two_line_powers(3, 2).unwrap();
        let report = check_pole_root_implication(&two, &[rat(-2, 5)]);
        assert!(!report.consistent);
        assert!(report.caveat.is_some());

        assert!(check_pole_root_implication(&two, &[]).consistent);
        // below -1 a shift is allowed
        let report = check_pole_root_implication(&generic, &[rat(-5, 3)]);
        assert_eq!(report.entries[0].shift, Some(1));
    }

    #[test]
    fn catalog_matching() {
        let three = Arrangement::from_i64_reduced(2, &[&[1, 0], &[1, 1], &[1, -1]]).unwrap();
        assert!(matches!(catalog_lookup(&three), CatalogEntry::Known(b) if b.provenance == Provenance::GenericReduced));
        let non_generic = Arrangement::from_i64_reduced(
            3,
            &[&[1, 0, 0], &[0, 1, 0], &[1, 1, 0], &[0, 0, 1]],
        )
        .unwrap();
        assert!(matches!(catalog_lookup(&non_generic), CatalogEntry::Unknown { .. }));
        let weighted = Arrangement::from_i64(2, &[&[1, 0], &[0, 1]], &[3, 2]).unwrap();
        assert!(matches!(catalog_lookup(&weighted), CatalogEntry::Known(b) if b.provenance == Provenance::TwoLinePowers));
    }
}
