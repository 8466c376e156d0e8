use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};

/// One agglomeration step. Leaves are `0..n`; the cluster formed at step `i` is `n + i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
    pub size: usize,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DendrogramLinkage {
    pub labels: Vec<String>,
    pub merges: Vec<Merge>,
}

struct Cluster {
    id: usize,
    leaves: Vec<usize>,
    min_label: String,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Average-linkage agglomerative clustering on Euclidean distance.
///
/// Equal distances are broken by the lexicographically smallest member label
/// of the two clusters, then by the other cluster's smallest label.
pub fn hierarchical_cluster<S: AsRef<str>, V: AsRef<[f64]>>(profiles: &[(S, V)]) -> Result<DendrogramLinkage> {
    let n = profiles.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("clustering needs at least 2 profiles, got {n}")));
    }
    let dim = profiles[0].1.as_ref().len();
    for (_, v) in profiles {
        if v.as_ref().len() != dim {
            return Err(Error::LengthMismatch { left: v.as_ref().len(), right: dim });
        }
    }
    let labels: Vec<String> = profiles.iter().map(|(l, _)| l.as_ref().to_string()).collect();
    let leaf_dist: Vec<Vec<f64>> = profiles
        .iter()
        .map(|(_, a)| profiles.iter().map(|(_, b)| euclidean(a.as_ref(), b.as_ref())).collect())
        .collect();
    let avg = |x: &Cluster, y: &Cluster| {
        let mut sum = 0.0;
        for &i in &x.leaves {
            for &j in &y.leaves {
                sum += leaf_dist[i][j];
            }
        }
        sum / (x.leaves.len() * y.leaves.len()) as f64
    };
    let mut active: Vec<Cluster> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| Cluster { id: i, leaves: vec![i], min_label: l.clone() })
        .collect();
    let mut merges = Vec::with_capacity(n - 1);
    while active.len() > 1 {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..active.len() {
            for j in i + 1..active.len() {
                let d = avg(&active[i], &active[j]);
                let better = match best {
                    None => true,
                    Some((bi, bj, bd)) => match d.total_cmp(&bd) {
                        Ordering::Less => true,
                        Ordering::Greater => false,
                        Ordering::Equal => tie_key(&active[i], &active[j]) < tie_key(&active[bi], &active[bj]),
                    },
                };
                if better {
                    best = Some((i, j, d));
                }
            }
        }
        let (i, j, d) = best.expect("at least two active clusters");
        let second = active.remove(j);
        let first = active.remove(i);
        let mut leaves = [first.leaves, second.leaves].concat();
        leaves.sort_unstable();
        let mut members: Vec<String> = leaves.iter().map(|&l| labels[l].clone()).collect();
        members.sort();
        let merged = Cluster {
            id: n + merges.len(),
            min_label: members[0].clone(),
            leaves,
        };
        merges.push(Merge {
            a: first.id.min(second.id),
            b: first.id.max(second.id),
            distance: d,
            size: merged.leaves.len(),
            members,
        });
        active.push(merged);
    }
    Ok(DendrogramLinkage { labels, merges })
}

fn tie_key<'a>(x: &'a Cluster, y: &'a Cluster) -> (&'a str, &'a str) {
    let (a, b) = (x.min_label.as_str(), y.min_label.as_str());
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}
