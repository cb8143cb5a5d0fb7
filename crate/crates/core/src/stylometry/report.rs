//! Scorecard of the clustering inequalities within and across extraction
//! modes.
//!
//! Every relation is reported with its signed margin `lhs - rhs`; the
//! expected direction is always `lhs > rhs`. Violations are data, not
//! errors.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{
    cluster_margins_beta, cluster_margins_distance, Authorship, DistanceMatrix, Margin, Result,
    StylometryError,
};

/// Results for one extraction mode.
#[derive(Debug, Clone, Copy)]
pub struct ModeResults<'a> {
    pub matrix: &'a DistanceMatrix,
    /// Fitted `β` per text; not available for exclusive-type profiles.
    pub betas: Option<&'a BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ModeSet<'a> {
    pub all: Option<ModeResults<'a>>,
    pub types: Option<ModeResults<'a>>,
    pub exclusive: Option<ModeResults<'a>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationKind {
    /// `b(a) > 0` within a mode.
    BetaMarginPositive,
    /// `z_λ(a) > 0` within a mode.
    DistanceMarginPositive,
    /// `b^types(a) > b^all(a)`.
    TypesBetaMarginExceedsAll,
    /// `β_i^types > β_i^all`.
    TypesBetaExceedsAll,
    /// `z_λ^types(a) > z_λ^all(a)`.
    TypesDistanceMarginExceedsAll,
    /// `ρ_λ^all(ij) > ρ_λ^types(ij)` for texts by one author.
    SameAuthorAllExceedsTypes,
    /// `ρ_λ^exclusive(ij) > ρ_λ^types(ij)` for texts by one author.
    SameAuthorExclusiveExceedsTypes,
    /// `z_λ^exclusive(a) > z_λ^types(a)`.
    ExclusiveMarginExceedsTypes,
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Violated,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub kind: RelationKind,
    /// Mode for within-mode relations.
    pub mode: Option<String>,
    /// Author, text, or `i-j` pair.
    pub subject: String,
    pub lambda: Option<u8>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub holds: usize,
    pub violated: usize,
    pub ties: usize,
}

impl Tally {
    pub fn total(&self) -> usize {
        self.holds + self.violated + self.ties
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeComparisonReport {
    pub tie_tolerance: f64,
    pub relations: Vec<Relation>,
}

impl ModeComparisonReport {
    pub fn of_kind(&self, kind: RelationKind) -> impl Iterator<Item = &Relation> {
        self.relations.iter().filter(move |r| r.kind == kind)
    }

    pub fn tally(&self, kind: RelationKind) -> Tally {
        let mut t = Tally { holds: 0, violated: 0, ties: 0 };
        for r in self.of_kind(kind) {
            match r.outcome {
                Outcome::Holds => t.holds += 1,
                Outcome::Violated => t.violated += 1,
                Outcome::Tie => t.ties += 1,
            }
        }
        t
    }

    /// Relations that do not hold strictly.
    pub fn exceptions(&self) -> impl Iterator<Item = &Relation> {
        self.relations.iter().filter(|r| r.outcome != Outcome::Holds)
    }
}

struct Builder {
    tol: f64,
    relations: Vec<Relation>,
}

impl Builder {
    fn push(&mut self, kind: RelationKind, mode: Option<&str>, subject: String, lambda: Option<u8>, lhs: f64, rhs: f64) {
        let margin = lhs - rhs;
        let outcome = if margin.abs() <= self.tol {
            Outcome::Tie
        } else if margin > 0.0 {
            Outcome::Holds
        } else {
            Outcome::Violated
        };
        self.relations.push(Relation {
            kind,
            mode: mode.map(str::to_owned),
            subject,
            lambda,
            lhs,
            rhs,
            margin,
            outcome,
        });
    }

    fn positive(&mut self, kind: RelationKind, mode: &str, lambda: Option<u8>, margins: &[Margin]) {
        for m in margins {
            self.push(kind, Some(mode), m.author.clone(), lambda, m.value, 0.0);
        }
    }

    fn exceeds(&mut self, kind: RelationKind, lambda: Option<u8>, larger: &[Margin], smaller: &[Margin]) {
        for (a, b) in larger.iter().zip(smaller) {
            debug_assert_eq!(a.author, b.author);
            self.push(kind, None, a.author.clone(), lambda, a.value, b.value);
        }
    }
}

fn same_author_pairs(matrix: &DistanceMatrix, authorship: &Authorship) -> Vec<(String, String)> {
    let ids = matrix.ids();
    let mut out = Vec::new();
    for (x, i) in ids.iter().enumerate() {
        for j in &ids[x + 1..] {
            if let (Some(a), Some(b)) = (authorship.get(i), authorship.get(j)) {
                if a == b {
                    out.push((i.clone(), j.clone()));
                }
            }
        }
    }
    out
}

fn same_texts(a: &DistanceMatrix, b: &DistanceMatrix) -> Result<()> {
    if a.len() != b.len() || a.ids().iter().any(|id| !b.contains(id)) {
        return Err(StylometryError::ModeSetIncomplete(
            "modes were computed over different texts".into(),
        ));
    }
    Ok(())
}

/// Evaluates the within-mode margins and the cross-mode orderings.
///
/// The all-tokens and distinct-types modes are required; exclusive-type
/// relations are added when that mode is present. A difference within
/// `tie_tolerance` of zero is reported as a tie.
pub fn mode_comparison_report(
    modes: &ModeSet<'_>,
    authorship: &Authorship,
    tie_tolerance: f64,
) -> Result<ModeComparisonReport> {
    use RelationKind::*;

    let (Some(all), Some(types)) = (modes.all, modes.types) else {
        return Err(StylometryError::ModeSetIncomplete(
            "need both all-tokens and distinct-types results".into(),
        ));
    };
    same_texts(all.matrix, types.matrix)?;
    if let Some(ex) = modes.exclusive {
        same_texts(types.matrix, ex.matrix)?;
    }

    let mut b = Builder { tol: tie_tolerance, relations: Vec::new() };
    let z = |m: &ModeResults<'_>, lambda| cluster_margins_distance(m.matrix, authorship, lambda);

    let b_all = all.betas.map(|bs| cluster_margins_beta(bs, authorship)).transpose()?;
    let b_types = types.betas.map(|bs| cluster_margins_beta(bs, authorship)).transpose()?;
    if let Some(m) = &b_all {
        b.positive(BetaMarginPositive, "all", None, m);
    }
    if let Some(m) = &b_types {
        b.positive(BetaMarginPositive, "types", None, m);
    }
    for lambda in [0u8, 1] {
        b.positive(DistanceMarginPositive, "all", Some(lambda), &z(&all, lambda)?);
        b.positive(DistanceMarginPositive, "types", Some(lambda), &z(&types, lambda)?);
        if let Some(ex) = &modes.exclusive {
            b.positive(DistanceMarginPositive, "exclusive-types", Some(lambda), &z(ex, lambda)?);
        }
    }

    if let (Some(ma), Some(mt)) = (&b_all, &b_types) {
        b.exceeds(TypesBetaMarginExceedsAll, None, mt, ma);
    }
    if let (Some(ba), Some(bt)) = (all.betas, types.betas) {
        for (text, &beta_all) in ba {
            if let Some(&beta_types) = bt.get(text) {
                b.push(TypesBetaExceedsAll, None, text.clone(), None, beta_types, beta_all);
            }
        }
    }
    for lambda in [0u8, 1] {
        b.exceeds(TypesDistanceMarginExceedsAll, Some(lambda), &z(&types, lambda)?, &z(&all, lambda)?);
    }

    let pairs = same_author_pairs(types.matrix, authorship);
    for lambda in [0u8, 1] {
        for (i, j) in &pairs {
            let subject = format!("{i}-{j}");
            let t = types.matrix.rho(lambda, i, j)?;
            b.push(SameAuthorAllExceedsTypes, None, subject.clone(), Some(lambda), all.matrix.rho(lambda, i, j)?, t);
            if let Some(ex) = &modes.exclusive {
                b.push(SameAuthorExclusiveExceedsTypes, None, subject, Some(lambda), ex.matrix.rho(lambda, i, j)?, t);
            }
        }
    }
    if let Some(ex) = &modes.exclusive {
        for lambda in [0u8, 1] {
            b.exceeds(ExclusiveMarginExceedsTypes, Some(lambda), &z(ex, lambda)?, &z(&types, lambda)?);
        }
    }

    Ok(ModeComparisonReport { tie_tolerance, relations: b.relations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (DistanceMatrix, Authorship, BTreeMap<String, f64>) {
        let ids: Vec<String> = ["a1", "a2", "b1", "b2"].iter().map(|s| s.to_string()).collect();
        let m = DistanceMatrix::from_fn(ids.clone(), |i, j| {
            let d = if (i < 2) == (j < 2) { 0.1 } else { 0.3 };
            Ok((d, d / 2.0))
        })
        .unwrap();
        let auth = ids.iter().map(|id| (id.clone(), id[..1].to_string())).collect();
        let betas = ids.iter().enumerate().map(|(i, id)| (id.clone(), 0.6 + 0.1 * (i / 2) as f64)).collect();
        (m, auth, betas)
    }

    #[test]
    fn identical_modes_give_ties() {
        let (m, auth, betas) = toy();
        let r = ModeResults { matrix: &m, betas: Some(&betas) };
        let set = ModeSet { all: Some(r), types: Some(r), exclusive: Some(r) };
        let report = mode_comparison_report(&set, &auth, 1e-12).unwrap();
        for kind in [
            RelationKind::TypesBetaMarginExceedsAll,
            RelationKind::TypesBetaExceedsAll,
            RelationKind::TypesDistanceMarginExceedsAll,
            RelationKind::SameAuthorAllExceedsTypes,
            RelationKind::SameAuthorExclusiveExceedsTypes,
            RelationKind::ExclusiveMarginExceedsTypes,
        ] {
            let t = report.tally(kind);
            assert!(t.total() > 0, "{kind}");
            assert_eq!(t.ties, t.total(), "{kind}");
        }
        let t = report.tally(RelationKind::DistanceMarginPositive);
        assert_eq!((t.holds, t.total()), (12, 12));
    }

    #[test]
    fn missing_mode() {
        let (m, auth, _) = toy();
        let r = ModeResults { matrix: &m, betas: None };
        let set = ModeSet { all: Some(r), ..ModeSet::default() };
        assert!(matches!(
            mode_comparison_report(&set, &auth, 0.0),
            Err(StylometryError::ModeSetIncomplete(_))
        ));
    }

    #[test]
    fn kind_names() {
        assert_eq!(RelationKind::SameAuthorAllExceedsTypes.to_string(), "same-author-all-exceeds-types");
    }
}
