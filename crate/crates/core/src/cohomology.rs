//! Exact cohomology bookkeeping for the two SU(2)-bundles over S⁵.
//!
//! Both S³×S⁵ and SU(3) have cohomology `Λ[α, β]` with `|α| = 3`, `|β| = 5`
//! and `ω = α∪β`. They differ only in `Sq²: H³(·;ℤ₂) → H⁵(·;ℤ₂)`, which is
//! zero on the product and an isomorphism on SU(3). A map induces
//! `α ↦ κα`, `β ↦ λβ`, so its degree is `κλ`, and naturality of `Sq²`
//! forces `κ·c(source) ≡ λ·c(target) (mod 2)` where `c` is the Sq² coefficient.
//! That congruence is the whole obstruction; the closed-form sets below are
//! checked against it by enumeration.

use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};
use crate::manifold::ManifoldId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    S3xS5,
    SU3,
}

impl Space {
    pub const ALL: [Space; 2] = [Space::S3xS5, Space::SU3];

    /// Tag of an 8-manifold in the catalog. A pullback `φ*(SU(3))` is
    /// classified by `deg φ mod 2`, so it needs the degree of its base map.
    pub fn of(m: &ManifoldId, pullback_base_degree: Option<i64>) -> Option<Space> {
        match m {
            ManifoldId::S3xS5 => Some(Space::S3xS5),
            ManifoldId::SU3 => Some(Space::SU3),
            ManifoldId::Pullback(_) => pullback_base_degree.map(pullback_space),
            _ => None,
        }
    }

    pub fn parse(s: &str) -> Result<Space> {
        match s.to_ascii_lowercase().as_str() {
            "s3xs5" => Ok(Space::S3xS5),
            "su3" => Ok(Space::SU3),
            _ => Err(Error::UnknownManifold(s.to_string())),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::S3xS5 => write!(f, "S3xS5"),
            Space::SU3 => write!(f, "SU3"),
        }
    }
}

/// The pullback of SU(3) → S⁵ along a map of degree `d`.
pub fn pullback_space(d: i64) -> Space {
    if d.rem_euclid(2) == 1 {
        Space::SU3
    } else {
        Space::S3xS5
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coefficients {
    Z,
    Z2,
}

/// `c₀·1 + c_α·α + c_β·β + c_ω·ω`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RingElement {
    pub space: Space,
    pub ring: Coefficients,
    /// Coefficients on `(1, α, β, ω)`, in degrees `(0, 3, 5, 8)`.
    pub coeffs: [i64; 4],
}

pub const GRADING: [u32; 4] = [0, 3, 5, 8];

impl RingElement {
    pub fn new(space: Space, ring: Coefficients, coeffs: [i64; 4]) -> RingElement {
        let coeffs = match ring {
            Coefficients::Z => coeffs,
            Coefficients::Z2 => coeffs.map(|c| c.rem_euclid(2)),
        };
        RingElement {
            space,
            ring,
            coeffs,
        }
    }

    pub fn zero(space: Space, ring: Coefficients) -> RingElement {
        RingElement::new(space, ring, [0; 4])
    }

    pub fn one(space: Space, ring: Coefficients) -> RingElement {
        RingElement::new(space, ring, [1, 0, 0, 0])
    }

    pub fn alpha(space: Space, ring: Coefficients) -> RingElement {
        RingElement::new(space, ring, [0, 1, 0, 0])
    }

    pub fn beta(space: Space, ring: Coefficients) -> RingElement {
        RingElement::new(space, ring, [0, 0, 1, 0])
    }

    pub fn omega(space: Space, ring: Coefficients) -> RingElement {
        RingElement::new(space, ring, [0, 0, 0, 1])
    }

    pub fn scale(self, k: i64) -> RingElement {
        RingElement::new(self.space, self.ring, self.coeffs.map(|c| c * k))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// The degree if the element is nonzero and homogeneous.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut found = None;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                if found.is_some() {
                    return None;
                }
                found = Some(GRADING[i]);
            }
        }
        found
    }

    pub fn try_add(self, rhs: RingElement) -> Result<RingElement> {
        if self.space != rhs.space || self.ring != rhs.ring {
            return Err(Error::TagMismatch);
        }
        let mut c = self.coeffs;
        for (a, b) in c.iter_mut().zip(rhs.coeffs) {
            *a += b;
        }
        Ok(RingElement::new(self.space, self.ring, c))
    }
}

impl Add for RingElement {
    type Output = RingElement;

    /// Panics on mismatched tags; use [`RingElement::try_add`] otherwise.
    fn add(self, rhs: RingElement) -> RingElement {
        self.try_add(rhs).expect("ring elements with matching tags")
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = match self.ring {
            Coefficients::Z => ["1", "α", "β", "ω"],
            Coefficients::Z2 => ["1", "ᾱ", "β̄", "ω̄"],
        };
        let mut first = true;
        for (c, name) in self.coeffs.iter().zip(names) {
            if *c == 0 {
                continue;
            }
            let sep = match (first, *c < 0) {
                (true, false) => "",
                (true, true) => "-",
                (false, false) => " + ",
                (false, true) => " - ",
            };
            first = false;
            match (c.abs(), name) {
                (1, _) => write!(f, "{sep}{name}")?,
                (k, "1") => write!(f, "{sep}{k}")?,
                (k, _) => write!(f, "{sep}{k}{name}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Graded product in `Λ[α, β]`.
pub fn cup(x: &RingElement, y: &RingElement) -> Result<RingElement> {
    if x.space != y.space || x.ring != y.ring {
        return Err(Error::TagMismatch);
    }
    let [x0, xa, xb, xw] = x.coeffs;
    let [y0, ya, yb, yw] = y.coeffs;
    Ok(RingElement::new(
        x.space,
        x.ring,
        [
            x0 * y0,
            x0 * ya + xa * y0,
            x0 * yb + xb * y0,
            x0 * yw + xw * y0 + xa * yb - xb * ya,
        ],
    ))
}

pub fn mod2_reduce(x: &RingElement) -> RingElement {
    RingElement::new(x.space, Coefficients::Z2, x.coeffs)
}

/// Coefficient `c` in `Sq²(ᾱ) = c·β̄`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SteenrodTable;

impl SteenrodTable {
    pub fn sq2_coeff(space: Space) -> i64 {
        match space {
            Space::S3xS5 => 0,
            Space::SU3 => 1,
        }
    }
}

/// `Sq²` on `H³(·;ℤ₂)`. Other degrees are out of scope.
pub fn sq2(x: &RingElement) -> Result<RingElement> {
    if x.ring != Coefficients::Z2 {
        return Err(Error::TagMismatch);
    }
    match x.homogeneous_degree() {
        None if x.is_zero() => Ok(*x),
        Some(3) => Ok(RingElement::beta(x.space, Coefficients::Z2)
            .scale(x.coeffs[1] * SteenrodTable::sq2_coeff(x.space))),
        Some(d) => Err(Error::WrongDegree(d)),
        None => Err(Error::WrongDegree(0)),
    }
}

/// `α ↦ κα`, `β ↦ λβ` for a map `source → target`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InducedMap {
    pub source: Space,
    pub target: Space,
    pub kappa: i64,
    pub lambda: i64,
}

impl InducedMap {
    pub fn degree(&self) -> i64 {
        self.kappa * self.lambda
    }

    /// Pull back a class on the target.
    pub fn pull_back(&self, x: &RingElement) -> Result<RingElement> {
        if x.space != self.target {
            return Err(Error::TagMismatch);
        }
        let [c0, ca, cb, cw] = x.coeffs;
        Ok(RingElement::new(
            self.source,
            x.ring,
            [c0, self.kappa * ca, self.lambda * cb, self.degree() * cw],
        ))
    }
}

/// `Sq²(φ*ᾱ) = φ*(Sq²ᾱ)`, i.e. `κ·c(source) ≡ λ·c(target) (mod 2)`.
pub fn naturality_ok(m: &InducedMap) -> bool {
    let lhs = m.kappa * SteenrodTable::sq2_coeff(m.source);
    let rhs = m.lambda * SteenrodTable::sq2_coeff(m.target);
    (lhs - rhs).rem_euclid(2) == 0
}

/// A pair `(κ, λ)` with `κλ = d` passing naturality, if any.
pub fn admissible_witness(source: Space, target: Space, d: i64) -> Option<(i64, i64)> {
    if d == 0 {
        return Some((0, 0));
    }
    let n = d.unsigned_abs();
    let mut k = 1u64;
    while k * k <= n {
        if n.is_multiple_of(k) {
            for kappa in [k, n / k] {
                let kappa = kappa as i64;
                for kappa in [kappa, -kappa] {
                    let m = InducedMap {
                        source,
                        target,
                        kappa,
                        lambda: d / kappa,
                    };
                    if naturality_ok(&m) {
                        return Some((m.kappa, m.lambda));
                    }
                }
            }
        }
        k += 1;
    }
    None
}

pub fn admissible_degree(source: Space, target: Space, d: i64) -> bool {
    admissible_witness(source, target, d).is_some()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DegreePredicate {
    AllIntegers,
    Even,
    MultiplesOf4OrOdd,
    /// `d mod modulus ∈ residues`.
    Residues {
        modulus: i64,
        residues: Vec<i64>,
    },
}

impl DegreePredicate {
    pub fn contains(&self, d: i64) -> bool {
        match self {
            DegreePredicate::AllIntegers => true,
            DegreePredicate::Even => d.rem_euclid(2) == 0,
            DegreePredicate::MultiplesOf4OrOdd => d.rem_euclid(4) == 0 || d.rem_euclid(2) == 1,
            DegreePredicate::Residues { modulus, residues } => {
                residues.contains(&d.rem_euclid(*modulus))
            }
        }
    }

    /// Members of `[-bound, bound]` in increasing order.
    pub fn members(&self, bound: i64) -> Vec<i64> {
        (-bound..=bound).filter(|&d| self.contains(d)).collect()
    }
}

impl fmt::Display for DegreePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegreePredicate::AllIntegers => write!(f, "Z"),
            DegreePredicate::Even => write!(f, "2Z"),
            DegreePredicate::MultiplesOf4OrOdd => write!(f, "4Z∪(2Z+1)"),
            DegreePredicate::Residues { modulus, residues } => {
                let r: Vec<String> = residues.iter().map(|r| r.to_string()).collect();
                write!(f, "{{{}}}+{modulus}Z", r.join(","))
            }
        }
    }
}

/// The set of degrees of maps `source → target`.
pub fn degree_set_closed_form(source: Space, target: Space) -> DegreePredicate {
    match (source, target) {
        (Space::S3xS5, Space::S3xS5) => DegreePredicate::AllIntegers,
        (Space::S3xS5, Space::SU3) | (Space::SU3, Space::S3xS5) => DegreePredicate::Even,
        (Space::SU3, Space::SU3) => DegreePredicate::MultiplesOf4OrOdd,
    }
}

/// Whether naturality alone reproduces the closed form on `[-bound, bound]`.
pub fn verify_only_obstruction(source: Space, target: Space, bound: i64) -> bool {
    let set = degree_set_closed_form(source, target);
    (-bound..=bound).all(|d| admissible_degree(source, target, d) == set.contains(d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// `λ` of a pullback bundle map equals the degree of its base map,
    /// read off the map's name.
    BaseDegree,
    Trivial,
    EngineDerived,
    Unknown,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::BaseDegree => "base-degree",
            Provenance::Trivial => "trivial",
            Provenance::EngineDerived => "engine-derived",
            Provenance::Unknown => "unknown",
        };
        write!(f, "{s}")
    }
}

/// Numerically computed degrees that [`induced_coefficients`] may use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NumericDegrees {
    /// Degree of the map itself.
    pub total: Option<i64>,
    /// Degree of the S⁵ map it covers.
    pub base: Option<i64>,
    /// Degree of the map along which a pullback source or target is formed.
    pub pullback_base: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedCoefficients {
    pub map_id: String,
    pub source: Option<Space>,
    pub target: Option<Space>,
    pub kappa: Option<i64>,
    pub kappa_provenance: Provenance,
    pub lambda: Option<i64>,
    pub lambda_provenance: Provenance,
}

impl InducedCoefficients {
    pub fn induced_map(&self) -> Option<InducedMap> {
        Some(InducedMap {
            source: self.source?,
            target: self.target?,
            kappa: self.kappa?,
            lambda: self.lambda?,
        })
    }
}

fn kappa_from(total: Option<i64>, lambda: Option<i64>) -> (Option<i64>, Provenance) {
    match (total, lambda) {
        (Some(t), Some(l)) if l != 0 && t % l == 0 => (Some(t / l), Provenance::EngineDerived),
        _ => (None, Provenance::Unknown),
    }
}

/// `(κ, λ)` for catalog maps whose induced action on `H³`, `H⁵` is
/// determined, with a provenance tag on each.
///
/// `λ` is the degree of the covered base map; `κ` is then `deg/λ`.
/// Accepted ids: `id_su3`, `id_s3xs5`, `g`, `h`, `su3pow:<k>`, `ftilde`,
/// `ftilde:<m>`, and `ftilde[<S5 map>]`.
pub fn induced_coefficients(map_id: &str, numeric: NumericDegrees) -> Result<InducedCoefficients> {
    let id = map_id.trim();
    let su3 = Some(Space::SU3);
    let trivial = |source, target, k, l| InducedCoefficients {
        map_id: id.to_string(),
        source,
        target,
        kappa: Some(k),
        kappa_provenance: Provenance::Trivial,
        lambda: Some(l),
        lambda_provenance: Provenance::Trivial,
    };
    match id {
        "id_su3" => return Ok(trivial(su3, su3, 1, 1)),
        "id_s3xs5" => {
            let s = Some(Space::S3xS5);
            return Ok(trivial(s, s, 1, 1));
        }
        "g" => {
            let lambda = numeric.base;
            let (kappa, kp) = kappa_from(numeric.total, lambda);
            return Ok(InducedCoefficients {
                map_id: id.to_string(),
                source: su3,
                target: su3,
                kappa,
                kappa_provenance: kp,
                lambda,
                lambda_provenance: if lambda.is_some() {
                    Provenance::EngineDerived
                } else {
                    Provenance::Unknown
                },
            });
        }
        "h" => {
            let (kappa, kp) = kappa_from(numeric.total, Some(1));
            return Ok(InducedCoefficients {
                map_id: id.to_string(),
                source: su3,
                target: numeric.pullback_base.map(pullback_space),
                kappa,
                kappa_provenance: kp,
                lambda: Some(1),
                lambda_provenance: Provenance::Trivial,
            });
        }
        _ => {}
    }
    if let Some(k) = id.strip_prefix("su3pow:") {
        let k: i64 = k.parse().map_err(|_| Error::UnknownMap(id.to_string()))?;
        return Ok(match k {
            0 => trivial(su3, su3, 0, 0),
            1 => trivial(su3, su3, 1, 1),
            _ => InducedCoefficients {
                map_id: id.to_string(),
                source: su3,
                target: su3,
                kappa: None,
                kappa_provenance: Provenance::Unknown,
                lambda: None,
                lambda_provenance: Provenance::Unknown,
            },
        });
    }
    let suspension_degree = id
        .strip_prefix("ftilde:")
        .or_else(|| id.strip_prefix("ftilde[susp5:")?.strip_suffix(']'));
    let (lambda, lambda_provenance) = if let Some(m) = suspension_degree {
        let m: i64 = m.parse().map_err(|_| Error::UnknownMap(id.to_string()))?;
        (Some(m), Provenance::BaseDegree)
    } else if id == "ftilde" || id.starts_with("ftilde[") {
        match numeric.base {
            Some(b) => (Some(b), Provenance::EngineDerived),
            None => (None, Provenance::Unknown),
        }
    } else {
        return Err(Error::UnknownMap(id.to_string()));
    };
    let (kappa, kappa_provenance) = kappa_from(numeric.total, lambda);
    Ok(InducedCoefficients {
        map_id: id.to_string(),
        source: lambda.or(numeric.pullback_base).map(pullback_space),
        target: su3,
        kappa,
        kappa_provenance,
        lambda,
        lambda_provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Coefficients::{Z, Z2};
    use Space::{S3xS5, SU3};

    #[test]
    fn cup_examples() {
        let a = RingElement::alpha(SU3, Z);
        let b = RingElement::beta(SU3, Z);
        assert_eq!(cup(&a, &b).unwrap(), RingElement::omega(SU3, Z));
        assert_eq!(cup(&b, &a).unwrap(), RingElement::omega(SU3, Z).scale(-1));
        assert!(cup(&a, &a).unwrap().is_zero());
        assert_eq!(
            cup(&a, &RingElement::beta(S3xS5, Z)),
            Err(Error::TagMismatch)
        );
        assert_eq!(cup(&b, &a).unwrap().to_string(), "-ω");
    }

    #[test]
    fn mod2_examples() {
        let b = RingElement::beta(SU3, Z);
        assert!(mod2_reduce(&b.scale(2)).is_zero());
        let x = RingElement::new(SU3, Z, [0, 3, 1, 0]);
        assert_eq!(mod2_reduce(&x).coeffs, [0, 1, 1, 0]);
        assert_eq!(
            mod2_reduce(&RingElement::alpha(SU3, Z).scale(-5)),
            RingElement::alpha(SU3, Z2)
        );
        assert_eq!(mod2_reduce(&x).to_string(), "ᾱ + β̄");
    }

    #[test]
    fn sq2_examples() {
        assert_eq!(
            sq2(&RingElement::alpha(SU3, Z2)).unwrap(),
            RingElement::beta(SU3, Z2)
        );
        assert!(sq2(&RingElement::alpha(S3xS5, Z2)).unwrap().is_zero());
        assert!(sq2(&RingElement::zero(SU3, Z2)).unwrap().is_zero());
        assert_eq!(sq2(&RingElement::beta(SU3, Z2)), Err(Error::WrongDegree(5)));
    }

    #[test]
    fn naturality_examples() {
        let m = |source, target, kappa, lambda| InducedMap {
            source,
            target,
            kappa,
            lambda,
        };
        assert!(naturality_ok(&m(S3xS5, SU3, 1, 2)));
        assert!(!naturality_ok(&m(S3xS5, SU3, 1, 1)));
        for l in -3..=3 {
            assert!(!naturality_ok(&m(SU3, S3xS5, 1, l)));
        }
        assert!(naturality_ok(&m(SU3, SU3, 1, 1)));
        assert!(!naturality_ok(&m(SU3, SU3, 1, 2)));
        assert!(naturality_ok(&m(SU3, SU3, 2, 2)));
    }

    #[test]
    fn naturality_is_what_sq2_commuting_means() {
        for (source, target) in [(S3xS5, S3xS5), (S3xS5, SU3), (SU3, S3xS5), (SU3, SU3)] {
            for kappa in -3..=3 {
                for lambda in -3..=3 {
                    let m = InducedMap {
                        source,
                        target,
                        kappa,
                        lambda,
                    };
                    let a = RingElement::alpha(target, Z);
                    let lhs = sq2(&mod2_reduce(&m.pull_back(&a).unwrap())).unwrap();
                    let rhs = mod2_reduce(&m.pull_back(&sq2(&mod2_reduce(&a)).unwrap()).unwrap());
                    assert_eq!(lhs == rhs, naturality_ok(&m));
                }
            }
        }
    }

    #[test]
    fn admissible_examples() {
        assert!(!admissible_degree(SU3, SU3, 2));
        assert!(!admissible_degree(SU3, SU3, 6));
        assert!(admissible_degree(SU3, SU3, 9));
        assert!(admissible_degree(SU3, SU3, 12));
        assert!(!admissible_degree(S3xS5, SU3, 3));
        assert!(admissible_degree(S3xS5, SU3, 4));
        let (k, l) = admissible_witness(S3xS5, SU3, 8).unwrap();
        assert_eq!(k * l, 8);
        assert_eq!(l.rem_euclid(2), 0);
    }

    #[test]
    fn closed_forms() {
        assert_eq!(degree_set_closed_form(S3xS5, S3xS5).to_string(), "Z");
        assert_eq!(degree_set_closed_form(SU3, S3xS5).to_string(), "2Z");
        assert_eq!(degree_set_closed_form(S3xS5, SU3), DegreePredicate::Even);
        assert_eq!(
            degree_set_closed_form(SU3, SU3),
            DegreePredicate::MultiplesOf4OrOdd
        );
        let r = DegreePredicate::Residues {
            modulus: 4,
            residues: vec![0, 1, 3],
        };
        for d in -20..20 {
            assert_eq!(
                r.contains(d),
                DegreePredicate::MultiplesOf4OrOdd.contains(d)
            );
        }
    }

    #[test]
    fn only_obstruction_small_and_large_ranges() {
        for s in Space::ALL {
            for t in Space::ALL {
                assert!(verify_only_obstruction(s, t, 1));
                assert!(verify_only_obstruction(s, t, 100));
            }
        }
        let admissible: Vec<i64> = (-12..=12)
            .filter(|&d| admissible_degree(SU3, SU3, d))
            .collect();
        let mut expected = vec![0, 1, 3, 4, 5, 7, 8, 9, 11, 12];
        expected.extend([1, 3, 4, 5, 7, 8, 9, 11, 12].map(|d: i64| -d));
        expected.sort();
        assert_eq!(admissible, expected);
    }

    #[test]
    fn induced_coefficient_bookkeeping() {
        let f3 = induced_coefficients("ftilde:3", NumericDegrees::default()).unwrap();
        assert_eq!(
            (f3.lambda, f3.lambda_provenance),
            (Some(3), Provenance::BaseDegree)
        );
        assert_eq!(f3.kappa_provenance, Provenance::Unknown);
        assert_eq!(f3.source, Some(SU3));
        let same = induced_coefficients("ftilde[susp5:3]", NumericDegrees::default()).unwrap();
        assert_eq!((same.lambda, same.source), (Some(3), Some(SU3)));

        let f3 = induced_coefficients(
            "ftilde:3",
            NumericDegrees {
                total: Some(3),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            (f3.kappa, f3.kappa_provenance),
            (Some(1), Provenance::EngineDerived)
        );

        let id = induced_coefficients("id_su3", NumericDegrees::default()).unwrap();
        assert_eq!((id.kappa, id.lambda), (Some(1), Some(1)));

        let g = induced_coefficients(
            "g",
            NumericDegrees {
                total: Some(4),
                base: Some(2),
                pullback_base: None,
            },
        )
        .unwrap();
        assert_eq!((g.kappa, g.lambda), (Some(2), Some(2)));
        assert!(naturality_ok(&g.induced_map().unwrap()));

        let h = induced_coefficients(
            "h",
            NumericDegrees {
                total: Some(2),
                base: Some(1),
                pullback_base: Some(2),
            },
        )
        .unwrap();
        assert_eq!(h.target, Some(S3xS5));
        assert!(naturality_ok(&h.induced_map().unwrap()));

        assert!(matches!(
            induced_coefficients("p", NumericDegrees::default()),
            Err(Error::UnknownMap(_))
        ));
        let pow = induced_coefficients("su3pow:3", NumericDegrees::default()).unwrap();
        assert_eq!(pow.kappa_provenance, Provenance::Unknown);
    }

    fn space() -> impl Strategy<Value = Space> {
        prop_oneof![Just(S3xS5), Just(SU3)]
    }

    fn element(ring: Coefficients) -> impl Strategy<Value = RingElement> {
        (space(), prop::array::uniform4(-50i64..50))
            .prop_map(move |(s, c)| RingElement::new(s, ring, c))
    }

    fn homogeneous(space: Space, ring: Coefficients) -> impl Strategy<Value = RingElement> {
        (0usize..4, -50i64..50).prop_map(move |(i, c)| {
            let mut coeffs = [0; 4];
            coeffs[i] = c;
            RingElement::new(space, ring, coeffs)
        })
    }

    proptest! {
        #[test]
        fn naturality_depends_only_on_parity(
            s in space(), t in space(),
            k in -100i64..100, l in -100i64..100, j in -20i64..20, i in -20i64..20,
        ) {
            let a = InducedMap { source: s, target: t, kappa: k, lambda: l };
            let b = InducedMap { source: s, target: t, kappa: k + 2 * j, lambda: l + 2 * i };
            prop_assert_eq!(naturality_ok(&a), naturality_ok(&b));
        }

        #[test]
        fn admissible_sets_are_closed_under_negation(s in space(), t in space(), d in -1000i64..1000) {
            prop_assert_eq!(admissible_degree(s, t, d), admissible_degree(s, t, -d));
        }

        #[test]
        fn witnesses_are_valid(s in space(), t in space(), d in -1000i64..1000) {
            if let Some((k, l)) = admissible_witness(s, t, d) {
                prop_assert_eq!(k * l, d);
                let m = InducedMap { source: s, target: t, kappa: k, lambda: l };
                prop_assert!(naturality_ok(&m));
            }
        }

        #[test]
        fn cup_is_graded_commutative(
            s in space(),
            x in (0usize..4, -50i64..50), y in (0usize..4, -50i64..50),
        ) {
            let mk = |(i, c): (usize, i64)| {
                let mut coeffs = [0; 4];
                coeffs[i] = c;
                (RingElement::new(s, Z, coeffs), GRADING[i])
            };
            let ((x, dx), (y, dy)) = (mk(x), mk(y));
            let sign = if dx * dy % 2 == 1 { -1 } else { 1 };
            prop_assert_eq!(cup(&x, &y).unwrap(), cup(&y, &x).unwrap().scale(sign));
        }

        #[test]
        fn cup_commutes_mod_2(x in homogeneous(SU3, Z2), y in homogeneous(SU3, Z2)) {
            prop_assert_eq!(cup(&x, &y).unwrap(), cup(&y, &x).unwrap());
        }

        #[test]
        fn reduction_is_a_ring_map(x in element(Z), y in element(Z)) {
            let y = RingElement { space: x.space, ..y };
            prop_assert_eq!(
                mod2_reduce(&cup(&x, &y).unwrap()),
                cup(&mod2_reduce(&x), &mod2_reduce(&y)).unwrap()
            );
        }
    }
}
