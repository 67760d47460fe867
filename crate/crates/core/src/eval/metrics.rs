//! Cluster-quality metrics over a cluster/label contingency table.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Tweet id to cluster index (the LDA topic of highest probability).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClusterAssignment(pub BTreeMap<String, usize>);

/// Tweet id to query label.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelAssignment(pub BTreeMap<String, String>);

impl FromIterator<(String, usize)> for ClusterAssignment {
    fn from_iter<I: IntoIterator<Item = (String, usize)>>(iter: I) -> Self {
        ClusterAssignment(iter.into_iter().collect())
    }
}

impl FromIterator<(String, String)> for LabelAssignment {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        LabelAssignment(iter.into_iter().collect())
    }
}

/// Counts `n_ij = |T_i ∩ Q_j|`; rows are clusters, columns labels, both in
/// sorted order. Empty rows and columns do not appear.
pub fn contingency(clusters: &ClusterAssignment, labels: &LabelAssignment) -> Result<Vec<Vec<u64>>> {
    if clusters.0.is_empty() && labels.0.is_empty() {
        return Err(Error::EmptyInput("no tweets to score"));
    }
    if clusters.0.len() != labels.0.len() || clusters.0.keys().ne(labels.0.keys()) {
        return Err(Error::Mismatch(
            "cluster and label assignments cover different tweets".into(),
        ));
    }
    let rows: BTreeSet<usize> = clusters.0.values().copied().collect();
    let cols: BTreeSet<&str> = labels.0.values().map(String::as_str).collect();
    let row_of: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let col_of: BTreeMap<&str, usize> = cols.iter().enumerate().map(|(j, &c)| (c, j)).collect();
    let mut table = vec![vec![0u64; cols.len()]; rows.len()];
    for (id, c) in &clusters.0 {
        let label = labels.0[id].as_str();
        table[row_of[c]][col_of[label]] += 1;
    }
    Ok(table)
}

/// `(1/n) sum_i max_j n_ij`.
pub fn purity_from_table(table: &[Vec<u64>]) -> f64 {
    let n: u64 = table.iter().flatten().sum();
    if n == 0 {
        return 0.0;
    }
    let majority: u64 = table.iter().map(|row| row.iter().copied().max().unwrap_or(0)).sum();
    majority as f64 / n as f64
}

/// Shannon entropy (natural log) of a count vector. Counts are summed in
/// ascending order so equal multisets give bit-identical entropies.
fn entropy(counts: impl IntoIterator<Item = u64>, n: u64) -> f64 {
    let mut counts: Vec<u64> = counts.into_iter().filter(|&c| c > 0).collect();
    counts.sort_unstable();
    let n = n as f64;
    counts
        .into_iter()
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `2 I(T;Q) / (H(T) + H(Q))` with `I = H(T) + H(Q) - H(T,Q)`.
///
/// When either entropy is zero the ratio is undefined: two single-block
/// partitions (of the same items) score 1, anything else 0.
pub fn nmi_from_table(table: &[Vec<u64>]) -> f64 {
    let n: u64 = table.iter().flatten().sum();
    if n == 0 {
        return 0.0;
    }
    let cols = table.first().map_or(0, Vec::len);
    let h_t = entropy(table.iter().map(|r| r.iter().sum::<u64>()), n);
    let h_q = entropy((0..cols).map(|j| table.iter().map(|r| r[j]).sum::<u64>()), n);
    if h_t == 0.0 || h_q == 0.0 {
        return if h_t == 0.0 && h_q == 0.0 { 1.0 } else { 0.0 };
    }
    let h_tq = entropy(table.iter().flatten().copied(), n);
    let mutual = (h_t + h_q - h_tq).max(0.0);
    (2.0 * mutual / (h_t + h_q)).clamp(0.0, 1.0)
}

pub fn purity(clusters: &ClusterAssignment, labels: &LabelAssignment) -> Result<f64> {
    Ok(purity_from_table(&contingency(clusters, labels)?))
}

pub fn nmi(clusters: &ClusterAssignment, labels: &LabelAssignment) -> Result<f64> {
    Ok(nmi_from_table(&contingency(clusters, labels)?))
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
