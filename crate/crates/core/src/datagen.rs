//! Seeded generators for the synthetic benchmarks, plus CSV load/save.
//! Every generator records the ground-truth informative index set and tags
//! train/validation/test rows; identical seeds give bit-identical datasets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{SurvivalTarget, Targets};
use crate::matrix::{cholesky, Matrix};
use crate::rng::Rng;

/// Row partition of a dataset.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitTags {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitTags {
    pub fn all_train(n: usize) -> Self {
        Self {
            train: (0..n).collect(),
            valid: Vec::new(),
            test: Vec::new(),
        }
    }

    /// Shuffled split with `test_frac` of all rows held out for test and
    /// `valid_frac` of the remainder for validation.
    pub fn random(n: usize, test_frac: f64, valid_frac: f64, rng: &mut Rng) -> Self {
        let mut idx: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut idx);
        let n_test = (n as f64 * test_frac).round() as usize;
        let rest = n - n_test;
        let n_valid = (rest as f64 * valid_frac).round() as usize;
        let test = idx[..n_test].to_vec();
        let valid = idx[n_test..n_test + n_valid].to_vec();
        let train = idx[n_test + n_valid..].to_vec();
        Self { train, valid, test }
    }

    /// Shuffled split with fixed counts (train, valid, test); counts must
    /// sum to n.
    pub fn counts(n: usize, train: usize, valid: usize, test: usize, rng: &mut Rng) -> Result<Self> {
        if train + valid + test != n {
            return Err(Error::Domain(format!(
                "split {train}+{valid}+{test} != {n}"
            )));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut idx);
        Ok(Self {
            train: idx[..train].to_vec(),
            valid: idx[train..train + valid].to_vec(),
            test: idx[train + valid..].to_vec(),
        })
    }
}

/// Design matrix, targets, ground-truth informative set (0-based, empty for
/// loaded CSVs), and split tags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Targets,
    pub informative: Vec<usize>,
    pub splits: SplitTags,
    /// Target normalization (center, scale) when the generator applies one.
    pub normalization: Option<(f64, f64)>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    pub fn view(&self, idx: &[usize]) -> (Matrix, Targets) {
        (self.x.gather_rows(idx), self.y.gather(idx))
    }
}

/// Binary XOR: all D coordinates fair Bernoulli bits, y = x1 xor x2,
/// informative = first two features. Split: 70% test, then 10% of the
/// remaining rows for validation.
pub fn gen_xor(n: usize, d: usize, rng: &mut Rng) -> Result<Dataset> {
    if d < 2 {
        return Err(Error::Domain(format!("xor needs D >= 2, got {d}")));
    }
    let mut data = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let mut bits = Vec::with_capacity(d);
        for _ in 0..d {
            bits.push(if rng.bernoulli(0.5) { 1.0 } else { 0.0 });
        }
        y.push(((bits[0] as usize) ^ (bits[1] as usize)) as usize);
        data.extend(bits);
    }
    let splits = SplitTags::random(n, 0.7, 0.1, rng);
    Ok(Dataset {
        x: Matrix::new(n, d, data)?,
        y: Targets::Class(y),
        informative: vec![0, 1],
        splits,
        normalization: None,
    })
}

/// Coordinates of the clean moon point at parameter t in [0, pi].
pub fn moon_point(t: f64, upper: bool) -> (f64, f64) {
    if upper {
        (t.cos(), t.sin())
    } else {
        (1.0 - t.cos(), 0.5 - t.sin())
    }
}

/// Default noise variance on the two moon coordinates.
pub const MOON_NOISE_VAR: f64 = 0.1;

/// Two nested half circles in coordinates 1-2 (plus Gaussian noise of the
/// given variance); remaining coordinates are N(0,1) nuisance. Class labels
/// are balanced by construction.
pub fn gen_two_moons_with(n: usize, d: usize, noise_var: f64, rng: &mut Rng) -> Result<Dataset> {
    if d < 2 {
        return Err(Error::Domain(format!("two moons needs D >= 2, got {d}")));
    }
    let noise_std = noise_var.sqrt();
    let mut data = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let upper = i < n.div_ceil(2);
        let t = rng.uniform(0.0, std::f64::consts::PI);
        let (mx, my) = moon_point(t, upper);
        data.push(mx + noise_std * rng.standard_gaussian());
        data.push(my + noise_std * rng.standard_gaussian());
        for _ in 2..d {
            data.push(rng.standard_gaussian());
        }
        y.push(if upper { 0 } else { 1 });
    }
    let splits = SplitTags::random(n, 0.7, 0.1, rng);
    Ok(Dataset {
        x: Matrix::new(n, d, data)?,
        y: Targets::Class(y),
        informative: vec![0, 1],
        splits,
        normalization: None,
    })
}

pub fn gen_two_moons(n: usize, d: usize, rng: &mut Rng) -> Result<Dataset> {
    gen_two_moons_with(n, d, MOON_NOISE_VAR, rng)
}

/// Noise-free regression response of the modified Friedman problem:
/// 10 sin(x1 x2)^2 + 20 x3^2 + 10 sign(x4 x5 - 0.2), with sign(0) = 0.
pub fn friedman_response(x: &[f64]) -> f64 {
    let s = (x[0] * x[1]).sin();
    let sign_arg = x[3] * x[4] - 0.2;
    let sign = if sign_arg > 0.0 {
        1.0
    } else if sign_arg < 0.0 {
        -1.0
    } else {
        0.0
    };
    10.0 * s * s + 20.0 * x[2] * x[2] + 10.0 * sign
}

/// Modified Friedman regression: X uniform on [0,1]^D, response from
/// [`friedman_response`] plus N(0,1) noise, then centered and divided by the
/// largest absolute centered value of the realized sample. Informative =
/// first five features. Split counts follow the 450/50/100 pattern
/// (valid = n/12, test = n/6).
pub fn gen_friedman_mod(n: usize, d: usize, rng: &mut Rng) -> Result<Dataset> {
    if d < 5 {
        return Err(Error::Domain(format!("friedman needs D >= 5, got {d}")));
    }
    let mut data = Vec::with_capacity(n * d);
    let mut raw = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..d).map(|_| rng.next_f64()).collect();
        raw.push(friedman_response(&row) + rng.standard_gaussian());
        data.extend(row);
    }
    let center = raw.iter().sum::<f64>() / n as f64;
    let scale = raw
        .iter()
        .map(|v| (v - center).abs())
        .fold(0.0, f64::max)
        .max(1e-12);
    let y: Vec<f64> = raw.iter().map(|v| (v - center) / scale).collect();
    let valid = n / 12;
    let test = n / 6;
    let splits = SplitTags::counts(n, n - valid - test, valid, test, rng)?;
    Ok(Dataset {
        x: Matrix::new(n, d, data)?,
        y: Targets::Real(y),
        informative: (0..5).collect(),
        splits,
        normalization: Some((center, scale)),
    })
}

/// Knobs of the MADELON-like generator that the benchmark protocol leaves
/// open: cluster separation and label-flip handling live in the public
/// signature; everything else is fixed by the construction.
#[derive(Clone, Debug)]
pub struct MadelonParts {
    pub dataset: Dataset,
    /// Cluster centers on the informative subspace, one row per cluster.
    pub centers: Matrix,
    /// Class of each cluster.
    pub cluster_class: Vec<usize>,
    /// Combination weights (informative x combined), unit-norm columns.
    pub combine: Matrix,
    /// Clean informative block before per-feature noise injection.
    pub clean_informative: Matrix,
    /// Row indices whose label was flipped.
    pub flipped: Vec<usize>,
}

/// Default separation of the hypercube cluster centers.
pub const MADELON_SEPARATION: f64 = 1.0;

/// MADELON-like classification with full construction details returned.
///
/// Informative block: two Gaussian clusters per class centered on distinct
/// vertices of the {-sep, +sep}^n_informative hypercube, unit within-cluster
/// spread. Combined block: random unit-norm linear combinations of the clean
/// informative values. Unit Gaussian noise is then injected into every
/// signal feature; nuisance features are i.i.d. N(0,1); a fraction of labels
/// is flipped uniformly at random.
pub fn gen_madelon_like_with(
    n: usize,
    n_informative: usize,
    n_combined: usize,
    n_nuisance: usize,
    flip_frac: f64,
    separation: f64,
    rng: &mut Rng,
) -> Result<MadelonParts> {
    if n_informative < 1 {
        return Err(Error::Domain("madelon needs at least one informative feature".into()));
    }
    if !(0.0..=1.0).contains(&flip_frac) {
        return Err(Error::Domain(format!("flip fraction must be in [0,1], got {flip_frac}")));
    }
    let d = n_informative + n_combined + n_nuisance;
    let n_clusters = 4; // cluster pair per class
    // Distinct hypercube vertices for the cluster centers, classes alternating.
    let mut centers = Matrix::zeros(n_clusters, n_informative);
    let mut seen = std::collections::HashSet::new();
    let mut c = 0;
    while c < n_clusters {
        let vertex: Vec<bool> = (0..n_informative).map(|_| rng.bernoulli(0.5)).collect();
        // With few informative dims there are at least 4 vertices (2^2);
        // retry duplicates so clusters stay distinct.
        if n_informative >= 2 && !seen.insert(vertex.clone()) {
            continue;
        }
        for (j, &b) in vertex.iter().enumerate() {
            centers.set(c, j, if b { separation } else { -separation });
        }
        c += 1;
    }
    let cluster_class: Vec<usize> = (0..n_clusters).map(|c| c % 2).collect();

    // Balanced labels: n/2 per class, then shuffled row order.
    let mut labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    rng.shuffle(&mut labels);

    let mut clean = Matrix::zeros(n, n_informative);
    for (i, &label) in labels.iter().enumerate() {
        let cluster = if rng.bernoulli(0.5) { label } else { label + 2 };
        for j in 0..n_informative {
            clean.set(i, j, centers.get(cluster, j) + rng.standard_gaussian());
        }
    }

    // Unit-norm random combination weights.
    let mut combine = Matrix::zeros(n_informative, n_combined);
    for j in 0..n_combined {
        let mut col: Vec<f64> = (0..n_informative).map(|_| rng.standard_gaussian()).collect();
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        for v in col.iter_mut() {
            *v /= norm;
        }
        for (i, &v) in col.iter().enumerate() {
            combine.set(i, j, v);
        }
    }
    let combined = clean.matmul(&combine)?;

    let mut data = Vec::with_capacity(n * d);
    for i in 0..n {
        for j in 0..n_informative {
            data.push(clean.get(i, j) + rng.standard_gaussian());
        }
        for j in 0..n_combined {
            data.push(combined.get(i, j) + rng.standard_gaussian());
        }
        for _ in 0..n_nuisance {
            data.push(rng.standard_gaussian());
        }
    }

    let n_flip = (flip_frac * n as f64).round() as usize;
    let flipped = rng.sample_indices(n, n_flip);
    let mut y = labels;
    for &i in &flipped {
        y[i] = 1 - y[i];
    }

    // D > N protocol: 70% test, then 10% of the remainder for validation.
    let splits = SplitTags::random(n, 0.7, 0.1, rng);
    let dataset = Dataset {
        x: Matrix::new(n, d, data)?,
        y: Targets::Class(y),
        informative: (0..n_informative).collect(),
        splits,
        normalization: None,
    };
    Ok(MadelonParts {
        dataset,
        centers,
        cluster_class,
        combine,
        clean_informative: clean,
        flipped,
    })
}

pub fn gen_madelon_like(
    n: usize,
    n_informative: usize,
    n_combined: usize,
    n_nuisance: usize,
    flip_frac: f64,
    rng: &mut Rng,
) -> Result<Dataset> {
    Ok(gen_madelon_like_with(
        n,
        n_informative,
        n_combined,
        n_nuisance,
        flip_frac,
        MADELON_SEPARATION,
        rng,
    )?
    .dataset)
}

/// Sparsity rule k = ceil(0.4 D^0.75) of the linear recovery benchmark.
pub fn sparsity_rule(d: usize) -> usize {
    (0.4 * (d as f64).powf(0.75)).ceil() as usize
}

/// Sparse linear regression y = X beta* + w. Uncorrelated rows are i.i.d.
/// N(0,1); correlated rows have covariance Sigma_ij = 0.3^|i-j| via its
/// Cholesky factor. beta* has a uniformly chosen support of size
/// k = ceil(0.4 D^0.75) with unit-magnitude entries of random sign, and
/// w ~ N(0, noise_var). All rows are tagged train.
pub fn gen_sparse_linear(
    n: usize,
    d: usize,
    correlated: bool,
    noise_var: f64,
    rng: &mut Rng,
) -> Result<(Dataset, Vec<f64>)> {
    if d < 1 {
        return Err(Error::Domain("sparse linear needs D >= 1".into()));
    }
    if !(noise_var >= 0.0) {
        return Err(Error::Domain("noise variance must be >= 0".into()));
    }
    let k = sparsity_rule(d).min(d);
    let chol = if correlated {
        let mut sigma = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                sigma.set(i, j, 0.3f64.powi((i as i32 - j as i32).abs()));
            }
        }
        Some(cholesky(&sigma)?)
    } else {
        None
    };

    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        let g: Vec<f64> = (0..d).map(|_| rng.standard_gaussian()).collect();
        match &chol {
            Some(l) => {
                // row = L g so that Cov(row) = L L^T = Sigma
                for i in 0..d {
                    let mut acc = 0.0;
                    for j in 0..=i {
                        acc += l.get(i, j) * g[j];
                    }
                    data.push(acc);
                }
            }
            None => data.extend(g),
        }
    }
    let x = Matrix::new(n, d, data)?;

    let support = rng.sample_indices(d, k);
    let mut beta = vec![0.0; d];
    for &j in &support {
        beta[j] = if rng.bernoulli(0.5) { 1.0 } else { -1.0 };
    }
    let noise_std = noise_var.sqrt();
    let y: Vec<f64> = x
        .matvec(&beta)?
        .iter()
        .map(|v| v + noise_std * rng.standard_gaussian())
        .collect();

    let dataset = Dataset {
        x,
        y: Targets::Real(y),
        informative: support,
        splits: SplitTags::all_train(n),
        normalization: None,
    };
    Ok((dataset, beta))
}

/// Magnitude of each informative coefficient in [`gen_survival`].
pub const SURVIVAL_EFFECT: f64 = 1.0;

/// Proportional-hazards data with exponential baseline: T ~ Exp(rate =
/// exp(theta^T x)) with theta supported on a random informative subset
/// (alternating signs, magnitude `effect`). Censoring times are independent
/// exponentials whose rate is tuned by bisection so the expected censored
/// fraction matches `censor_frac`. Split: 30% test, 10% of the rest
/// validation.
pub fn gen_survival_with(
    n: usize,
    d: usize,
    informative_count: usize,
    censor_frac: f64,
    effect: f64,
    rng: &mut Rng,
) -> Result<Dataset> {
    if informative_count > d {
        return Err(Error::Domain(format!(
            "informative count {informative_count} exceeds D = {d}"
        )));
    }
    if !(0.0..1.0).contains(&censor_frac) {
        return Err(Error::Domain(format!(
            "censor fraction must be in [0,1), got {censor_frac}"
        )));
    }
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        for _ in 0..d {
            data.push(rng.standard_gaussian());
        }
    }
    let x = Matrix::new(n, d, data)?;
    let support = rng.sample_indices(d, informative_count);
    let mut theta = vec![0.0; d];
    for (pos, &j) in support.iter().enumerate() {
        theta[j] = if pos % 2 == 0 { effect } else { -effect };
    }
    let rates: Vec<f64> = x.matvec(&theta)?.iter().map(|s| s.exp()).collect();
    let event_times: Vec<f64> = rates
        .iter()
        .map(|&r| -rng.next_f64_open().ln() / r)
        .collect();

    let censor_rate = if censor_frac == 0.0 {
        0.0
    } else {
        // P(censored | rates) = mean_i c / (c + rate_i), increasing in c.
        let frac_at = |c: f64| rates.iter().map(|&r| c / (c + r)).sum::<f64>() / n as f64;
        let mut lo = 1e-9f64;
        let mut hi = 1e9f64;
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if frac_at(mid) < censor_frac {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo * hi).sqrt()
    };

    let mut targets = Vec::with_capacity(n);
    for (i, &t_event) in event_times.iter().enumerate() {
        let _ = i;
        let (time, event) = if censor_rate == 0.0 {
            (t_event, true)
        } else {
            let t_cens = -rng.next_f64_open().ln() / censor_rate;
            if t_event <= t_cens {
                (t_event, true)
            } else {
                (t_cens, false)
            }
        };
        targets.push(SurvivalTarget::new(time.max(1e-12), event)?);
    }
    let splits = SplitTags::random(n, 0.3, 0.1, rng);
    Ok(Dataset {
        x,
        y: Targets::Survival(targets),
        informative: support,
        splits,
        normalization: None,
    })
}

pub fn gen_survival(
    n: usize,
    d: usize,
    informative_count: usize,
    censor_frac: f64,
    rng: &mut Rng,
) -> Result<Dataset> {
    gen_survival_with(n, d, informative_count, censor_frac, SURVIVAL_EFFECT, rng)
}

/// Declared layout of a dataset CSV. Features are every column except the
/// trailing target column(s).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsvSchema {
    /// Final column: real-valued target.
    Regression,
    /// Final column: nonnegative integer class label.
    Classification,
    /// Final two columns: time (positive real), event (0 or 1).
    Survival,
}

impl CsvSchema {
    fn target_cols(self) -> usize {
        match self {
            CsvSchema::Survival => 2,
            _ => 1,
        }
    }
}

/// Loads a dataset CSV (header row, one sample per line, UTF-8, '.' decimal,
/// ',' separator). The informative set is empty and all rows are tagged
/// train; the harness re-splits as configured.
pub fn load_csv(path: &Path, schema: CsvSchema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Parse(e.to_string()))?;
    let width = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .len();
    if width < schema.target_cols() + 1 {
        return Err(Error::Schema {
            line: 1,
            msg: format!(
                "need at least {} columns, header has {width}",
                schema.target_cols() + 1
            ),
        });
    }
    let d = width - schema.target_cols();

    let mut data = Vec::new();
    let mut reals = Vec::new();
    let mut classes = Vec::new();
    let mut survival = Vec::new();
    let mut n = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(n as u64 + 2);
        if record.len() != width {
            return Err(Error::Schema {
                line,
                msg: format!("expected {width} columns, found {}", record.len()),
            });
        }
        let cell = |idx: usize| -> Result<f64> {
            record[idx].trim().parse::<f64>().map_err(|_| Error::Schema {
                line,
                msg: format!("non-numeric cell '{}' in column {}", &record[idx], idx + 1),
            })
        };
        for c in 0..d {
            let v = cell(c)?;
            if !v.is_finite() {
                return Err(Error::Schema {
                    line,
                    msg: format!("non-finite value in column {}", c + 1),
                });
            }
            data.push(v);
        }
        match schema {
            CsvSchema::Regression => reals.push(cell(d)?),
            CsvSchema::Classification => {
                let v = cell(d)?;
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(Error::Schema {
                        line,
                        msg: format!("class label must be a nonnegative integer, got '{}'", &record[d]),
                    });
                }
                classes.push(v as usize);
            }
            CsvSchema::Survival => {
                let time = cell(d)?;
                let event = cell(d + 1)?;
                if event != 0.0 && event != 1.0 {
                    return Err(Error::Schema {
                        line,
                        msg: format!("event column must be 0 or 1, got '{}'", &record[d + 1]),
                    });
                }
                survival.push(SurvivalTarget::new(time, event == 1.0).map_err(|e| {
                    Error::Schema {
                        line,
                        msg: e.to_string(),
                    }
                })?);
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Degenerate("csv has no data rows".into()));
    }
    let y = match schema {
        CsvSchema::Regression => Targets::Real(reals),
        CsvSchema::Classification => Targets::Class(classes),
        CsvSchema::Survival => Targets::Survival(survival),
    };
    Ok(Dataset {
        x: Matrix::new(n, d, data)?,
        y,
        informative: Vec::new(),
        splits: SplitTags::all_train(n),
        normalization: None,
    })
}

/// Writes the dataset in the layout [`load_csv`] reads back: header
/// x1..xD then y (or time,event).
pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    for j in 0..dataset.d() {
        out.push_str(&format!("x{},", j + 1));
    }
    match &dataset.y {
        Targets::Survival(_) => out.push_str("time,event\n"),
        _ => out.push_str("y\n"),
    }
    for i in 0..dataset.n() {
        for v in dataset.x.row(i) {
            out.push_str(&format!("{v},"));
        }
        match &dataset.y {
            Targets::Real(y) => out.push_str(&format!("{}\n", y[i])),
            Targets::Class(y) => out.push_str(&format!("{}\n", y[i])),
            Targets::Survival(y) => {
                out.push_str(&format!("{},{}\n", y[i].time, if y[i].event { 1 } else { 0 }))
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_truth_table_and_balance() {
        let mut rng = Rng::new(1);
        let ds = gen_xor(100_000, 4, &mut rng).unwrap();
        let Targets::Class(y) = &ds.y else { panic!() };
        for i in 0..ds.n() {
            let a = ds.x.get(i, 0) as usize;
            let b = ds.x.get(i, 1) as usize;
            assert_eq!(y[i], a ^ b);
        }
        let ones = y.iter().filter(|&&v| v == 1).count() as f64;
        let p = ones / ds.n() as f64;
        let se = (0.25f64 / ds.n() as f64).sqrt();
        assert!((p - 0.5).abs() < 3.0 * se, "class balance {p}");
        assert_eq!(ds.informative, vec![0, 1]);
        assert!(gen_xor(10, 1, &mut rng).is_err());
    }

    #[test]
    fn xor_split_ratios() {
        let mut rng = Rng::new(2);
        let ds = gen_xor(1500, 10, &mut rng).unwrap();
        assert_eq!(ds.splits.test.len(), 1050);
        assert_eq!(ds.splits.valid.len(), 45);
        assert_eq!(ds.splits.train.len(), 405);
        let mut all: Vec<usize> = ds
            .splits
            .train
            .iter()
            .chain(&ds.splits.valid)
            .chain(&ds.splits.test)
            .cloned()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..1500).collect::<Vec<_>>());
    }

    #[test]
    fn moons_endpoint_and_nuisance_variance() {
        assert_eq!(moon_point(0.0, true), (1.0, 0.0));
        let mut rng = Rng::new(3);
        let ds = gen_two_moons_with(100_000, 3, 0.0, &mut rng).unwrap();
        let col = ds.x.column(2);
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        // variance of the sample variance of a Gaussian is 2 sigma^4 / (n-1)
        let se = (2.0 / (n - 1.0)).sqrt();
        assert!((var - 1.0).abs() < 3.0 * se, "nuisance variance {var}");
        let Targets::Class(y) = &ds.y else { panic!() };
        assert_eq!(y.iter().filter(|&&v| v == 0).count(), 50_000);
    }

    #[test]
    fn friedman_formula_and_normalization() {
        let raw = friedman_response(&[0.5; 5]);
        assert!((raw - 15.612087).abs() < 1e-6, "raw {raw}");
        // boundary rule: sign(0) = 0
        assert_eq!(friedman_response(&[0.5, 0.5, 0.0, 0.4, 0.5]), {
            let s = (0.25f64).sin();
            10.0 * s * s
        });
        let mut rng = Rng::new(4);
        let ds = gen_friedman_mod(600, 20, &mut rng).unwrap();
        let Targets::Real(y) = &ds.y else { panic!() };
        let mean: f64 = y.iter().sum::<f64>() / y.len() as f64;
        assert!(mean.abs() < 1e-10, "centered mean {mean}");
        assert!(y.iter().cloned().fold(0.0, f64::max) <= 1.0 + 1e-12);
        assert_eq!(ds.splits.train.len(), 450);
        assert_eq!(ds.splits.valid.len(), 50);
        assert_eq!(ds.splits.test.len(), 100);
        assert!(ds.normalization.is_some());
    }

    #[test]
    fn madelon_construction_facts() {
        let mut rng = Rng::new(5);
        let parts = gen_madelon_like_with(1500, 5, 15, 480, 0.01, 1.0, &mut rng).unwrap();
        let ds = &parts.dataset;
        assert_eq!(ds.d(), 500);
        assert_eq!(parts.flipped.len(), 15); // round(0.01 * 1500)
        assert_eq!(ds.informative, vec![0, 1, 2, 3, 4]);

        // Combined columns lie in the span of the clean informative block.
        let combined = parts.clean_informative.matmul(&parts.combine).unwrap();
        // Residual of projecting `combined` onto the informative columns is 0
        // by construction; verify one column against a least-squares fit.
        let target = combined.column(0);
        let coef = crate::testkit::ols_solve(&parts.clean_informative, &target).unwrap();
        let back = parts.clean_informative.matvec(&coef).unwrap();
        let resid: f64 = back
            .iter()
            .zip(&target)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        assert!(resid < 1e-16, "residual {resid}");
    }

    #[test]
    fn madelon_far_clusters_nearest_centroid_is_exact() {
        let mut rng = Rng::new(6);
        let parts = gen_madelon_like_with(1500, 5, 0, 0, 0.0, 10.0, &mut rng).unwrap();
        let ds = &parts.dataset;
        let Targets::Class(y) = &ds.y else { panic!() };
        let mut correct = 0usize;
        for i in 0..ds.n() {
            let row = ds.x.row(i);
            let (mut best, mut best_d) = (0usize, f64::INFINITY);
            for c in 0..parts.centers.rows() {
                let dist: f64 = row
                    .iter()
                    .zip(parts.centers.row(c))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if dist < best_d {
                    best_d = dist;
                    best = c;
                }
            }
            if parts.cluster_class[best] == y[i] {
                correct += 1;
            }
        }
        assert_eq!(correct, ds.n());
    }

    #[test]
    fn sparse_linear_facts() {
        assert_eq!(sparsity_rule(64), 10);
        let mut rng = Rng::new(7);
        let (ds, beta) = gen_sparse_linear(200, 64, false, 0.0, &mut rng).unwrap();
        assert_eq!(ds.informative.len(), 10);
        // noiseless: OLS recovers beta exactly
        let Targets::Real(y) = &ds.y else { panic!() };
        let hat = crate::testkit::ols_solve(&ds.x, y).unwrap();
        for (a, b) in hat.iter().zip(&beta) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(beta
            .iter()
            .all(|&v| v == 0.0 || v == 1.0 || v == -1.0));
    }

    #[test]
    fn correlated_design_covariance() {
        let d = 8;
        let mut rng = Rng::new(8);
        let (ds, _) = gen_sparse_linear(100_000, d, true, 0.0, &mut rng).unwrap();
        // Sigma_13 = 0.3^2 = 0.09 (1-based) and every entry within 0.01.
        let n = ds.n() as f64;
        for i in 0..d {
            for j in 0..d {
                let ci = ds.x.column(i);
                let cj = ds.x.column(j);
                let mi = ci.iter().sum::<f64>() / n;
                let mj = cj.iter().sum::<f64>() / n;
                let cov = ci
                    .iter()
                    .zip(&cj)
                    .map(|(a, b)| (a - mi) * (b - mj))
                    .sum::<f64>()
                    / (n - 1.0);
                let expect = 0.3f64.powi((i as i32 - j as i32).abs());
                assert!(
                    (cov - expect).abs() < 0.01,
                    "cov[{i}][{j}] = {cov}, expected {expect}"
                );
            }
        }
    }

    #[test]
    fn survival_null_model_unit_mean() {
        let mut rng = Rng::new(9);
        let ds = gen_survival_with(100_000, 5, 0, 0.0, 1.0, &mut rng).unwrap();
        let Targets::Survival(t) = &ds.y else { panic!() };
        assert!(t.iter().all(|s| s.event));
        let mean: f64 = t.iter().map(|s| s.time).sum::<f64>() / t.len() as f64;
        // Exp(1) has mean 1, sd 1.
        let se = 1.0 / (t.len() as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn survival_censoring_calibrated_and_scores_anticorrelate() {
        let mut rng = Rng::new(10);
        let ds = gen_survival(5000, 10, 2, 0.3, &mut rng).unwrap();
        let Targets::Survival(t) = &ds.y else { panic!() };
        let censored = t.iter().filter(|s| !s.event).count() as f64 / t.len() as f64;
        assert!((censored - 0.3).abs() < 0.05, "censored fraction {censored}");

        // Spearman-style check: higher risk direction means shorter times.
        let mut rng2 = Rng::new(11);
        let ds2 = gen_survival_with(20_000, 3, 2, 0.0, 2.0, &mut rng2).unwrap();
        let Targets::Survival(t2) = &ds2.y else { panic!() };
        // Recover theta direction from the informative set (signs alternate).
        let mut theta = vec![0.0; 3];
        for (pos, &j) in ds2.informative.iter().enumerate() {
            theta[j] = if pos % 2 == 0 { 2.0 } else { -2.0 };
        }
        let scores = ds2.x.matvec(&theta).unwrap();
        let mean_s = scores.iter().sum::<f64>() / scores.len() as f64;
        let logs: Vec<f64> = t2.iter().map(|s| s.time.ln()).collect();
        let mean_l = logs.iter().sum::<f64>() / logs.len() as f64;
        let cov: f64 = scores
            .iter()
            .zip(&logs)
            .map(|(a, b)| (a - mean_s) * (b - mean_l))
            .sum();
        assert!(cov < 0.0, "score vs log-time covariance {cov}");
    }

    #[test]
    fn csv_round_trip_and_schema_errors() {
        let dir = std::env::temp_dir().join("stg_csv_test");
        std::fs::create_dir_all(&dir).unwrap();

        let path = dir.join("reg.csv");
        std::fs::write(&path, "x1,x2,y\n1.0,2.0,3.5\n-0.5,0.25,1.0\n4.0,0.0,-2.0\n").unwrap();
        let ds = load_csv(&path, CsvSchema::Regression).unwrap();
        assert_eq!(ds.n(), 3);
        assert_eq!(ds.d(), 2);
        assert!(ds.informative.is_empty());

        // round trip: write then load gives identical values
        let back_path = dir.join("reg_back.csv");
        write_csv(&ds, &back_path).unwrap();
        let back = load_csv(&back_path, CsvSchema::Regression).unwrap();
        assert_eq!(ds.x, back.x);
        assert_eq!(ds.y, back.y);

        // bad event value
        let surv = dir.join("surv.csv");
        std::fs::write(&surv, "x1,time,event\n1.0,2.0,1\n0.5,1.0,2\n").unwrap();
        match load_csv(&surv, CsvSchema::Survival) {
            Err(Error::Schema { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected schema error, got {other:?}"),
        }

        // non-numeric cell with line number
        let bad = dir.join("bad.csv");
        std::fs::write(&bad, "x1,y\n1.0,2.0\nfoo,1.0\n").unwrap();
        match load_csv(&bad, CsvSchema::Regression) {
            Err(Error::Schema { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn generators_are_seed_deterministic() {
        let a = gen_xor(200, 6, &mut Rng::new(42)).unwrap();
        let b = gen_xor(200, 6, &mut Rng::new(42)).unwrap();
        assert_eq!(a, b);
        let c = gen_friedman_mod(120, 10, &mut Rng::new(42)).unwrap();
        let d = gen_friedman_mod(120, 10, &mut Rng::new(42)).unwrap();
        assert_eq!(c, d);
        let (e, be) = gen_sparse_linear(50, 16, true, 0.25, &mut Rng::new(1)).unwrap();
        let (f, bf) = gen_sparse_linear(50, 16, true, 0.25, &mut Rng::new(1)).unwrap();
        assert_eq!(e, f);
        assert_eq!(be, bf);
    }
}
