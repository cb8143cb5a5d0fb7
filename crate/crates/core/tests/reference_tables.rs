//! Margins and cross-mode relations on distances and fitted β values
//! measured on a nine-novel corpus (three texts each by authors A, D, T).
//! Distances are given in units of 1e-5.

use std::collections::BTreeMap;

use phonorank::stylometry::{
    cluster_margins_beta, cluster_margins_distance, cluster_margins_with, mode_comparison_report,
    Authorship, DistanceMatrix, ModeResults, ModeSet, Outcome, RelationKind,
};

const PAIRS: [&str; 36] = [
    "12", "13", "23", "45", "46", "56", "78", "79", "89", "14", "15", "16", "17", "18", "19", "24",
    "25", "26", "27", "28", "29", "34", "35", "36", "37", "38", "39", "47", "48", "49", "57", "58",
    "59", "67", "68", "69",
];

const ALL_RHO0: [u32; 36] = [
    3045, 2062, 2549, 3423, 2382, 3448, 2584, 2066, 2464, 3583, 4690, 4000, 7372, 7402, 7322, 3645,
    4762, 4064, 7653, 7629, 7650, 3562, 4924, 4358, 7737, 6950, 7447, 5174, 5327, 5061, 6113, 6436,
    6217, 5074, 5706, 5202,
];
const ALL_RHO1: [u32; 36] = [
    2227, 1602, 2103, 2100, 1978, 2753, 1808, 1809, 2037, 2784, 3044, 3260, 5149, 5227, 5599, 2712,
    3059, 3110, 4978, 5052, 5449, 2546, 3022, 3181, 5266, 5085, 5654, 3950, 3568, 3935, 3894, 4014,
    4325, 3727, 3934, 3770,
];
const TYPES_RHO0: [u32; 36] = [
    1563, 1317, 1413, 1568, 1380, 1100, 2853, 1946, 2025, 2296, 2703, 2868, 7430, 9535, 8434, 2839,
    3318, 3458, 8141, 9999, 9167, 2718, 3264, 3257, 7943, 9998, 8997, 5918, 7875, 6899, 5521, 7842,
    6646, 5595, 7785, 6786,
];
const TYPES_RHO1: [u32; 36] = [
    1346, 1205, 1346, 1266, 1126, 1052, 1635, 1476, 1569, 1967, 2110, 2470, 6103, 7200, 6775, 2252,
    2436, 2709, 6587, 7544, 7136, 2193, 2486, 2636, 6539, 7447, 7022, 4795, 5971, 5368, 4631, 5566,
    5222, 4486, 5645, 5201,
];
const EXCL_RHO0: [u32; 36] = [
    3792, 3217, 3734, 3146, 2930, 2329, 5918, 4421, 4770, 4758, 5742, 6087, 12574, 15119, 13490,
    5708, 6385, 6880, 13323, 15733, 14113, 5188, 5887, 6476, 13391, 15842, 14244, 10980, 13905,
    12109, 10346, 13003, 11673, 10413, 13288, 11911,
];
const EXCL_RHO1: [u32; 36] = [
    2832, 2463, 2502, 2190, 2215, 1610, 3317, 2773, 2809, 3912, 4276, 4830, 8800, 9576, 8895, 4529,
    4991, 5495, 9469, 10387, 9621, 4344, 4917, 5285, 9835, 10637, 9891, 7025, 7371, 6928, 6537,
    7021, 6673, 6580, 6667, 6433,
];
/// Jaccard fraction of shared word types.
const COMMON: [u32; 36] = [
    47554, 47786, 50655, 41146, 42454, 41822, 45010, 46948, 48173, 35592, 35819, 36660, 28978,
    25870, 26730, 32902, 32499, 33877, 26549, 24180, 24643, 33463, 32813, 34643, 27572, 25340,
    25733, 33901, 30387, 32005, 32069, 27963, 29994, 32002, 28649, 30518,
];

const BETA_ALL: [f64; 9] = [0.61, 0.63, 0.61, 0.67, 0.69, 0.69, 0.75, 0.74, 0.79];
const BETA_TYPES: [f64; 9] = [0.72, 0.69, 0.69, 0.77, 0.78, 0.79, 0.968, 0.979, 0.975];

fn ids() -> Vec<String> {
    (1..=9).map(|i| i.to_string()).collect()
}

fn authorship() -> Authorship {
    ids().into_iter().zip("AAADDDTTT".chars()).map(|(id, a)| (id, a.to_string())).collect()
}

fn lookup(table: &[u32; 36], i: usize, j: usize) -> f64 {
    let (a, b) = (i.min(j) + 1, i.max(j) + 1);
    let key = format!("{a}{b}");
    let k = PAIRS.iter().position(|p| *p == key).unwrap();
    table[k] as f64 * 1e-5
}

fn matrix(rho0: &'static [u32; 36], rho1: &'static [u32; 36]) -> DistanceMatrix {
    DistanceMatrix::from_fn(ids(), |i, j| Ok((lookup(rho0, i, j), lookup(rho1, i, j)))).unwrap()
}

fn betas(values: &[f64; 9]) -> BTreeMap<String, f64> {
    ids().into_iter().zip(values.iter().copied()).collect()
}

fn margin(margins: &[phonorank::stylometry::Margin], author: &str) -> f64 {
    margins.iter().find(|m| m.author == author).unwrap().value
}

#[test]
fn beta_margins() {
    let all = cluster_margins_beta(&betas(&BETA_ALL), &authorship()).unwrap();
    assert!((margin(&all, "A") - 0.02).abs() < 1e-12);
    assert!((margin(&all, "D") - 0.02).abs() < 1e-12);
    assert!(margin(&all, "T").abs() < 1e-12);
    let types = cluster_margins_beta(&betas(&BETA_TYPES), &authorship()).unwrap();
    assert!((margin(&types, "A") - 0.02).abs() < 1e-12);
    assert!((margin(&types, "D") - 0.03).abs() < 1e-12);
    assert!((margin(&types, "T") - 0.167).abs() < 1e-12);
}

#[test]
fn one_negative_distance_margin() {
    let auth = authorship();
    let mut negative = Vec::new();
    let mut count = 0;
    for (mode, m) in [("all", matrix(&ALL_RHO0, &ALL_RHO1)), ("types", matrix(&TYPES_RHO0, &TYPES_RHO1))] {
        for lambda in [0, 1] {
            for z in cluster_margins_distance(&m, &auth, lambda).unwrap() {
                count += 1;
                if z.value <= 0.0 {
                    negative.push((mode, lambda, z.author, z.value));
                }
            }
        }
    }
    assert_eq!(count, 12);
    assert_eq!(negative.len(), 1, "{negative:?}");
    let (mode, lambda, author, value) = &negative[0];
    assert_eq!((*mode, *lambda, author.as_str()), ("all", 1, "D"));
    assert!((value + 0.00207).abs() < 1e-12);
}

#[test]
fn cross_mode_scorecard() {
    let (all, types, excl) = (
        matrix(&ALL_RHO0, &ALL_RHO1),
        matrix(&TYPES_RHO0, &TYPES_RHO1),
        matrix(&EXCL_RHO0, &EXCL_RHO1),
    );
    let (ba, bt) = (betas(&BETA_ALL), betas(&BETA_TYPES));
    let set = ModeSet {
        all: Some(ModeResults { matrix: &all, betas: Some(&ba) }),
        types: Some(ModeResults { matrix: &types, betas: Some(&bt) }),
        exclusive: Some(ModeResults { matrix: &excl, betas: None }),
    };
    let report = mode_comparison_report(&set, &authorship(), 1e-9).unwrap();

    // all-token distances exceed distinct-type distances for same-author pairs
    let t = report.tally(RelationKind::SameAuthorAllExceedsTypes);
    assert_eq!((t.holds, t.total()), (17, 18));
    let miss: Vec<_> = report
        .of_kind(RelationKind::SameAuthorAllExceedsTypes)
        .filter(|r| r.outcome != Outcome::Holds)
        .collect();
    assert_eq!((miss[0].subject.as_str(), miss[0].lambda), ("7-8", Some(0)));
    assert!((miss[0].margin + 0.00269).abs() < 1e-12);

    assert_eq!(report.tally(RelationKind::TypesBetaExceedsAll).holds, 9);
    // b(A) is 0.02 in both modes at two-digit precision
    let t = report.tally(RelationKind::TypesBetaMarginExceedsAll);
    assert_eq!((t.holds, t.ties, t.violated), (2, 1, 0));
    let t = report.tally(RelationKind::TypesDistanceMarginExceedsAll);
    assert_eq!((t.holds, t.total()), (6, 6));
    let t = report.tally(RelationKind::SameAuthorExclusiveExceedsTypes);
    assert_eq!((t.holds, t.total()), (18, 18));
    let t = report.tally(RelationKind::ExclusiveMarginExceedsTypes);
    assert_eq!((t.holds, t.total()), (6, 6));

    let excl_positive: Vec<_> = report
        .of_kind(RelationKind::DistanceMarginPositive)
        .filter(|r| r.mode.as_deref() == Some("exclusive-types"))
        .collect();
    assert_eq!(excl_positive.len(), 6);
    assert!(excl_positive.iter().all(|r| r.outcome == Outcome::Holds));
}

#[test]
fn shared_vocabulary_clusters_by_author() {
    let auth = authorship();
    let ids = ids();
    let index = |id: &str| ids.iter().position(|x| x == id).unwrap();
    let margins = cluster_margins_with(ids.iter().map(String::as_str), &auth, 2, |a, b| {
        Ok(1.0 - lookup(&COMMON, index(a), index(b)))
    })
    .unwrap();
    for m in &margins {
        assert!(m.value > 0.0, "{m:?}");
    }
    assert!((margin(&margins, "D") - 0.04486).abs() < 1e-9);
}
