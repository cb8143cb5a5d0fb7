//! Author-cluster margins and the attribution rule.
//!
//! For an author `a`, the margin of a dissimilarity `d` is
//! `min d(i, k) - max d(i, j)`, with `i, j` ranging over texts by `a` and `k`
//! over texts by other authors. A positive margin means every foreign text
//! is farther from `a`'s texts than they are from each other.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{DistanceMatrix, Result, StylometryError};

/// Text id → author label.
pub type Authorship = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub author: String,
    pub min_inter: f64,
    /// Zero for an author with a single text.
    pub max_intra: f64,
    pub value: f64,
}

fn group<'a>(ids: impl IntoIterator<Item = &'a str>, authorship: &'a Authorship) -> BTreeMap<&'a str, Vec<&'a str>> {
    let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for id in ids {
        if let Some((id, author)) = authorship.get_key_value(id) {
            groups.entry(author.as_str()).or_default().push(id.as_str());
        }
    }
    groups
}

/// Margins of an arbitrary dissimilarity over the labelled texts in `ids`.
///
/// Texts without an author label are ignored. Every author needs at least
/// `min_texts` texts.
pub fn cluster_margins_with<'a, F>(
    ids: impl IntoIterator<Item = &'a str>,
    authorship: &'a Authorship,
    min_texts: usize,
    d: F,
) -> Result<Vec<Margin>>
where
    F: Fn(&str, &str) -> Result<f64>,
{
    let groups = group(ids, authorship);
    if groups.len() < 2 {
        return Err(StylometryError::InsufficientAuthors(groups.len()));
    }
    let mut out = Vec::with_capacity(groups.len());
    for (&author, own) in &groups {
        if own.len() < min_texts.max(1) {
            return Err(StylometryError::InsufficientTexts {
                author: author.to_owned(),
                count: own.len(),
                need: min_texts.max(1),
            });
        }
        let mut max_intra = 0.0f64;
        for (x, &i) in own.iter().enumerate() {
            for &j in &own[x + 1..] {
                max_intra = max_intra.max(d(i, j)?);
            }
        }
        let mut min_inter = f64::INFINITY;
        for (_, foreign) in groups.iter().filter(|(&a, _)| a != author) {
            for &i in own {
                for &k in foreign {
                    min_inter = min_inter.min(d(i, k)?);
                }
            }
        }
        out.push(Margin {
            author: author.to_owned(),
            min_inter,
            max_intra,
            value: min_inter - max_intra,
        });
    }
    Ok(out)
}

/// `b(a)` from fitted `β` values, using `|β_i - β_k|` as dissimilarity.
pub fn cluster_margins_beta(betas: &BTreeMap<String, f64>, authorship: &Authorship) -> Result<Vec<Margin>> {
    cluster_margins_with(betas.keys().map(String::as_str), authorship, 2, |i, k| {
        Ok((betas[i] - betas[k]).abs())
    })
}

/// `z_λ(a)` from a distance matrix.
pub fn cluster_margins_distance(
    matrix: &DistanceMatrix,
    authorship: &Authorship,
    lambda: u8,
) -> Result<Vec<Margin>> {
    cluster_margins_with(matrix.ids().iter().map(String::as_str), authorship, 1, |i, k| {
        matrix.rho(lambda, i, k)
    })
}

/// All margins of one author under one extraction mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterMargins {
    pub author: String,
    pub mode: String,
    pub b: Option<f64>,
    pub z0: f64,
    pub z1: f64,
}

/// Combines `z₀`, `z₁` and, when fits are supplied, `b` per author.
pub fn cluster_margins(
    mode: &str,
    matrix: &DistanceMatrix,
    betas: Option<&BTreeMap<String, f64>>,
    authorship: &Authorship,
) -> Result<Vec<ClusterMargins>> {
    let z0 = cluster_margins_distance(matrix, authorship, 0)?;
    let z1 = cluster_margins_distance(matrix, authorship, 1)?;
    let b = betas.map(|bs| cluster_margins_beta(bs, authorship)).transpose()?;
    Ok(z0
        .into_iter()
        .zip(z1)
        .map(|(m0, m1)| ClusterMargins {
            b: b.as_ref()
                .and_then(|b| b.iter().find(|m| m.author == m0.author))
                .map(|m| m.value),
            mode: mode.to_owned(),
            z0: m0.value,
            z1: m1.value,
            author: m0.author,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Evidence,
    NoEvidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaVerdict {
    pub lambda: u8,
    /// `max_i ρ_λ(i, candidate)` over reference texts.
    pub max_to_candidate: f64,
    /// `max_{i<j} ρ_λ(i, j)` among reference texts.
    pub max_intra: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub candidate: String,
    pub verdicts: Vec<LambdaVerdict>,
}

impl Attribution {
    pub fn verdict(&self, lambda: u8) -> Option<Verdict> {
        self.verdicts.iter().find(|v| v.lambda == lambda).map(|v| v.verdict)
    }
}

/// Evidence that `candidate` shares the authorship of `references`: the
/// candidate is no farther from any reference than the references are from
/// each other.
pub fn attribute(candidate: &str, references: &[&str], matrix: &DistanceMatrix) -> Result<Attribution> {
    if references.len() < 2 {
        return Err(StylometryError::InsufficientTexts {
            author: "reference set".into(),
            count: references.len(),
            need: 2,
        });
    }
    if references.contains(&candidate) {
        return Err(StylometryError::Degenerate(format!(
            "candidate {candidate} is among its own references"
        )));
    }
    let mut verdicts = Vec::with_capacity(2);
    for lambda in [0u8, 1] {
        let mut max_to_candidate = 0.0f64;
        for &r in references {
            max_to_candidate = max_to_candidate.max(matrix.rho(lambda, r, candidate)?);
        }
        let mut max_intra = 0.0f64;
        for (x, &i) in references.iter().enumerate() {
            for &j in &references[x + 1..] {
                max_intra = max_intra.max(matrix.rho(lambda, i, j)?);
            }
        }
        let verdict = if max_to_candidate <= max_intra {
            Verdict::Evidence
        } else {
            Verdict::NoEvidence
        };
        verdicts.push(LambdaVerdict { lambda, max_to_candidate, max_intra, verdict });
    }
    Ok(Attribution { candidate: candidate.to_owned(), verdicts })
}

/// Applies [`attribute`] against each labelled author in the matrix, leaving
/// the candidate itself out of its author's references. Authors with fewer
/// than two remaining texts are skipped.
pub fn attribute_against_authors(
    candidate: &str,
    matrix: &DistanceMatrix,
    authorship: &Authorship,
) -> Result<Vec<(String, Attribution)>> {
    if !matrix.contains(candidate) {
        return Err(StylometryError::UnknownText(candidate.to_owned()));
    }
    let groups = group(matrix.ids().iter().map(String::as_str), authorship);
    let mut out = Vec::new();
    for (author, texts) in groups {
        let refs: Vec<&str> = texts.into_iter().filter(|&t| t != candidate).collect();
        if refs.len() >= 2 {
            out.push((author.to_owned(), attribute(candidate, &refs, matrix)?));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn authorship(pairs: &[(&str, &str)]) -> Authorship {
        pairs.iter().map(|&(t, a)| (t.to_owned(), a.to_owned())).collect()
    }

    fn betas(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|&(t, b)| (t.to_owned(), b)).collect()
    }

    fn matrix(ids: &[&str], d: impl Fn(usize, usize) -> f64 + Sync) -> DistanceMatrix {
        DistanceMatrix::from_fn(ids.iter().map(|s| s.to_string()).collect(), |i, j| {
            Ok((d(i, j), d(i, j)))
        })
        .unwrap()
    }

    #[test]
    fn beta_margins_of_fitted_table() {
        let auth = authorship(&[
            ("1", "A"), ("2", "A"), ("3", "A"),
            ("4", "D"), ("5", "D"), ("6", "D"),
            ("7", "T"), ("8", "T"), ("9", "T"),
        ]);
        let b = betas(&[
            ("1", 0.61), ("2", 0.63), ("3", 0.61),
            ("4", 0.67), ("5", 0.69), ("6", 0.69),
            ("7", 0.75), ("8", 0.74), ("9", 0.79),
        ]);
        let m = cluster_margins_beta(&b, &auth).unwrap();
        let value = |a: &str| m.iter().find(|x| x.author == a).unwrap().value;
        assert!((value("A") - 0.02).abs() < 1e-12);
        assert!((value("D") - 0.02).abs() < 1e-12);
        assert!(value("T").abs() < 1e-12);
    }

    #[test]
    fn identical_beta_sets_overlap() {
        let auth = authorship(&[("1", "A"), ("2", "A"), ("3", "B"), ("4", "B")]);
        let b = betas(&[("1", 0.6), ("2", 0.7), ("3", 0.6), ("4", 0.7)]);
        for m in cluster_margins_beta(&b, &auth).unwrap() {
            assert!((m.value + 0.1).abs() < 1e-12);
        }
        let short = authorship(&[("1", "A"), ("2", "A"), ("3", "B")]);
        assert!(matches!(
            cluster_margins_beta(&b, &short),
            Err(StylometryError::InsufficientTexts { .. })
        ));
    }

    #[test]
    fn distance_margins() {
        let m = matrix(&["x", "y"], |_, _| 0.25);
        let auth = authorship(&[("x", "A"), ("y", "B")]);
        for z in cluster_margins_distance(&m, &auth, 0).unwrap() {
            assert_eq!(z.value, 0.25);
        }
        // intra 0.1 within {a1, a2} and {b1, b2}, 0.3 across
        let ids = ["a1", "a2", "b1", "b2"];
        let m = matrix(&ids, |i, j| if (i < 2) == (j < 2) { 0.1 } else { 0.3 });
        let auth = authorship(&[("a1", "A"), ("a2", "A"), ("b1", "B"), ("b2", "B")]);
        for z in cluster_margins("all", &m, None, &auth).unwrap() {
            assert!((z.z0 - 0.2).abs() < 1e-15 && (z.z1 - 0.2).abs() < 1e-15);
            assert_eq!(z.b, None);
        }
        let one = authorship(&[("a1", "A"), ("a2", "A")]);
        assert!(matches!(
            cluster_margins_distance(&m, &one, 0),
            Err(StylometryError::InsufficientAuthors(1))
        ));
    }

    #[test]
    fn attribution_rule() {
        // c equals r1; far is 0.5 from everything
        let ids = ["r1", "r2", "r3", "c", "far"];
        let m = matrix(&ids, |i, j| {
            let (i, j) = (i.min(j), i.max(j));
            match (ids[i], ids[j]) {
                ("r1", "c") => 0.0,
                (_, "far") => 0.5,
                (_, "c") => 0.05,
                _ => 0.05,
            }
        });
        let refs = ["r1", "r2", "r3"];
        let a = attribute("c", &refs, &m).unwrap();
        assert_eq!(a.verdict(0), Some(Verdict::Evidence));
        assert_eq!(a.verdict(1), Some(Verdict::Evidence));
        let a = attribute("far", &refs, &m).unwrap();
        assert_eq!(a.verdict(0), Some(Verdict::NoEvidence));
        assert_eq!(a.verdicts[0].max_to_candidate, 0.5);
        assert_eq!(a.verdicts[0].max_intra, 0.05);
        assert!(attribute("c", &["r1"], &m).is_err());
        assert!(attribute("r1", &refs, &m).is_err());
    }

    #[test]
    fn wide_gap_between_two_authors() {
        // intra-author distances 0.001155, cross-author at least 0.01508
        let ids = ["d1", "d2", "d3", "d4", "t1", "t2", "t3"];
        let m = matrix(&ids, |i, j| {
            let same = (i < 4) == (j < 4);
            if same { 0.001155 } else { 0.01508 + 0.001 * (i + j) as f64 }
        });
        let auth: Authorship = ids
            .iter()
            .map(|id| (id.to_string(), if id.starts_with('d') { "D" } else { "T" }.to_string()))
            .collect();
        for &c in &ids[..4] {
            let verdicts = attribute_against_authors(c, &m, &auth).unwrap();
            for (author, a) in verdicts {
                let want = if author == "D" { Verdict::Evidence } else { Verdict::NoEvidence };
                assert_eq!(a.verdict(0), Some(want), "{c} vs {author}");
            }
        }
    }
}
