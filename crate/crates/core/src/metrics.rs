//! Evaluation metrics: predictive scores, feature-selection quality, run
//! stability, survival concordance, and the brute-force mutual-information
//! search over small discrete feature subsets.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::losses::SurvivalTarget;
use crate::matrix::Matrix;

/// Fraction of exactly matching labels.
pub fn accuracy(pred: &[usize], target: &[usize]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::Shape(format!(
            "accuracy lengths {} vs {}",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Degenerate("accuracy on empty input".into()));
    }
    let hits = pred.iter().zip(target).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Root mean squared error.
pub fn rmse(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::Shape(format!(
            "rmse lengths {} vs {}",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Degenerate("rmse on empty input".into()));
    }
    let mse: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / pred.len() as f64;
    Ok(mse.sqrt())
}

/// Precision, recall, and F1 of a selected set against the informative set.
/// Empty selection has precision 0; F1 is 0 when both terms vanish.
pub fn selection_f1(selected: &[usize], informative: &[usize], d: usize) -> Result<(f64, f64, f64)> {
    let sel: HashSet<usize> = selected.iter().cloned().collect();
    let inf: HashSet<usize> = informative.iter().cloned().collect();
    if sel.iter().chain(inf.iter()).any(|&i| i >= d) {
        return Err(Error::Domain("feature index out of range".into()));
    }
    let hit = sel.intersection(&inf).count() as f64;
    let precision = if sel.is_empty() { 0.0 } else { hit / sel.len() as f64 };
    let recall = if inf.is_empty() { 0.0 } else { hit / inf.len() as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok((precision, recall, f1))
}

/// Ranks features by weight (rank 1 = largest, ties broken by ascending
/// feature index) and returns the median rank of the informative features
/// (midpoint of the two central ranks when the count is even).
pub fn median_rank(weights: &[f64], informative: &[usize]) -> Result<f64> {
    if informative.is_empty() {
        return Err(Error::Degenerate("median rank needs informative features".into()));
    }
    if informative.iter().any(|&i| i >= weights.len()) {
        return Err(Error::Domain("informative index out of range".into()));
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        weights[b]
            .partial_cmp(&weights[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut rank_of = vec![0usize; weights.len()];
    for (pos, &feat) in order.iter().enumerate() {
        rank_of[feat] = pos + 1;
    }
    let mut ranks: Vec<usize> = informative.iter().map(|&i| rank_of[i]).collect();
    ranks.sort_unstable();
    let m = ranks.len();
    Ok(if m % 2 == 1 {
        ranks[m / 2] as f64
    } else {
        (ranks[m / 2 - 1] + ranks[m / 2]) as f64 / 2.0
    })
}

/// Informative-feature weight ratio: share of total weight mass on the
/// informative features. Equals recall for binary weights.
pub fn ifwr(weights: &[f64], informative: &[usize]) -> Result<f64> {
    if weights.iter().any(|&w| w < 0.0) {
        return Err(Error::Domain("ifwr needs nonnegative weights".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("ifwr on all-zero weights".into()));
    }
    if informative.iter().any(|&i| i >= weights.len()) {
        return Err(Error::Domain("informative index out of range".into()));
    }
    let on: f64 = informative.iter().map(|&i| weights[i]).sum();
    Ok(on / total)
}

/// Exact-match support recovery indicator.
pub fn support_recovery(selected: &[usize], true_support: &[usize]) -> bool {
    let a: HashSet<usize> = selected.iter().cloned().collect();
    let b: HashSet<usize> = true_support.iter().cloned().collect();
    a == b
}

/// Tolerant variant: 1 iff the symmetric difference has at most `slack`
/// elements.
pub fn support_recovery_within(selected: &[usize], true_support: &[usize], slack: usize) -> bool {
    let a: HashSet<usize> = selected.iter().cloned().collect();
    let b: HashSet<usize> = true_support.iter().cloned().collect();
    a.symmetric_difference(&b).count() <= slack
}

/// Harrell concordance index. A pair is comparable iff its earlier time
/// belongs to an observed event and the times differ; score ties count 1/2.
pub fn concordance_index(scores: &[f64], targets: &[SurvivalTarget]) -> Result<f64> {
    if scores.len() != targets.len() {
        return Err(Error::Shape(format!(
            "c-index lengths {} vs {}",
            scores.len(),
            targets.len()
        )));
    }
    let n = scores.len();
    let mut comparable = 0.0;
    let mut concordant = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            // i is the earlier, observed member of the pair.
            if !(targets[i].event && targets[i].time < targets[j].time) {
                continue;
            }
            comparable += 1.0;
            if scores[i] > scores[j] {
                concordant += 1.0;
            } else if scores[i] == scores[j] {
                concordant += 0.5;
            }
        }
    }
    if comparable == 0.0 {
        return Err(Error::Degenerate("no comparable pairs".into()));
    }
    Ok(concordant / comparable)
}

/// Stability statistics of selected sets across repeated runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stability {
    pub union_size: usize,
    /// Sample variance of the per-run selected-set sizes.
    pub size_variance: f64,
    /// Mean Jaccard similarity over all run pairs; Jaccard(empty, empty) = 1.
    pub mean_jaccard: f64,
}

pub fn selection_stability(runs: &[Vec<usize>]) -> Result<Stability> {
    if runs.len() < 2 {
        return Err(Error::Degenerate("stability needs at least two runs".into()));
    }
    let sets: Vec<HashSet<usize>> = runs.iter().map(|r| r.iter().cloned().collect()).collect();
    let union_size = sets
        .iter()
        .fold(HashSet::new(), |mut acc, s| {
            acc.extend(s.iter().cloned());
            acc
        })
        .len();
    let sizes: Vec<f64> = sets.iter().map(|s| s.len() as f64).collect();
    let mean = sizes.iter().sum::<f64>() / sizes.len() as f64;
    let size_variance = sizes.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
        / (sizes.len() - 1) as f64;
    let mut jac_sum = 0.0;
    let mut pairs = 0.0;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let inter = sets[i].intersection(&sets[j]).count() as f64;
            let uni = sets[i].union(&sets[j]).count() as f64;
            jac_sum += if uni == 0.0 { 1.0 } else { inter / uni };
            pairs += 1.0;
        }
    }
    Ok(Stability {
        union_size,
        size_variance,
        mean_jaccard: jac_sum / pairs,
    })
}

/// Enumeration bounds of the brute-force mutual information search.
pub const MI_MAX_FEATURES: usize = 16;
pub const MI_MAX_SUBSET: usize = 4;

/// Exhaustive search for the feature subset of the given size with maximal
/// plug-in mutual information (in bits) with the labels. `x` must hold
/// discrete values (compared exactly). Ties break toward the subset that
/// enumerates first in lexicographic index order.
pub fn mi_bruteforce(x: &Matrix, y: &[usize], subset_size: usize) -> Result<(Vec<usize>, f64)> {
    let d = x.cols();
    if x.rows() != y.len() {
        return Err(Error::Shape("mi rows vs labels".into()));
    }
    if d > MI_MAX_FEATURES || subset_size > MI_MAX_SUBSET {
        return Err(Error::Size(format!(
            "mi_bruteforce bounds: D <= {MI_MAX_FEATURES}, subset <= {MI_MAX_SUBSET}"
        )));
    }
    if subset_size == 0 || subset_size > d {
        return Err(Error::Domain("subset size must be in 1..=D".into()));
    }
    // Small per-column alphabets keyed by bit pattern.
    let mut levels: Vec<HashMap<u64, u64>> = vec![HashMap::new(); d];
    let mut coded = vec![0u64; x.rows() * d];
    for i in 0..x.rows() {
        for j in 0..d {
            let bits = x.get(i, j).to_bits();
            let next = levels[j].len() as u64;
            let code = *levels[j].entry(bits).or_insert(next);
            coded[i * d + j] = code;
        }
    }

    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut subset: Vec<usize> = (0..subset_size).collect();
    loop {
        let mi = plug_in_mi(&coded, d, x.rows(), &subset, &levels, y);
        let better = match &best {
            None => true,
            Some((_, b)) => mi > *b,
        };
        if better {
            best = Some((subset.clone(), mi));
        }
        if !next_combination(&mut subset, d) {
            break;
        }
    }
    Ok(best.unwrap())
}

/// Plug-in MI (bits) between one fixed subset and the labels.
pub fn plug_in_mi_subset(x: &Matrix, y: &[usize], subset: &[usize]) -> Result<f64> {
    let d = x.cols();
    if subset.iter().any(|&j| j >= d) {
        return Err(Error::Domain("subset index out of range".into()));
    }
    let mut levels: Vec<HashMap<u64, u64>> = vec![HashMap::new(); d];
    let mut coded = vec![0u64; x.rows() * d];
    for i in 0..x.rows() {
        for &j in subset {
            let bits = x.get(i, j).to_bits();
            let next = levels[j].len() as u64;
            let code = *levels[j].entry(bits).or_insert(next);
            coded[i * d + j] = code;
        }
    }
    Ok(plug_in_mi(&coded, d, x.rows(), subset, &levels, y))
}

fn plug_in_mi(
    coded: &[u64],
    d: usize,
    n: usize,
    subset: &[usize],
    levels: &[HashMap<u64, u64>],
    y: &[usize],
) -> f64 {
    // Mixed-radix key over the subset values.
    let mut joint: HashMap<(u64, usize), f64> = HashMap::new();
    let mut marg_x: HashMap<u64, f64> = HashMap::new();
    let mut marg_y: HashMap<usize, f64> = HashMap::new();
    for i in 0..n {
        let mut key = 0u64;
        for &j in subset {
            key = key * levels[j].len().max(1) as u64 + coded[i * d + j];
        }
        *joint.entry((key, y[i])).or_insert(0.0) += 1.0;
        *marg_x.entry(key).or_insert(0.0) += 1.0;
        *marg_y.entry(y[i]).or_insert(0.0) += 1.0;
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for (&(kx, ky), &c) in &joint {
        let p = c / nf;
        let px = marg_x[&kx] / nf;
        let py = marg_y[&ky] / nf;
        mi += p * (p / (px * py)).log2();
    }
    mi.max(0.0)
}

/// Advances `subset` to the next size-k combination of [0, d); returns false
/// after the last one.
fn next_combination(subset: &mut [usize], d: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < d - (k - i) {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
