//! Candidate-pool selection inside user-defined asset groups.
//!
//! Pools are scored by the smallest eigenvalue of their lag-0 covariance
//! (smaller means a flatter direction exists, the fast spectral stand-in for
//! mean-reversion potential). The search seeds on every size-3 subset of the
//! group and hill-descends by single-asset additions/removals, recording
//! every visited pool whose size falls in the requested band.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;

use crate::linalg::sym_part;
use crate::timeseries::{autocovariance, SamplePath};
use crate::{Error, Result};

/// A scored asset pool. Indices are unique, ascending, and refer to columns
/// of the path the search ran on.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolCandidate {
    pub assets: Vec<usize>,
    /// Smallest eigenvalue of the pool's covariance; smaller is better.
    pub score: f64,
}

/// Knobs for [`greedy_pool_search`].
#[derive(Debug, Clone, Copy)]
pub struct PoolSearchParams {
    /// Smallest pool size recorded.
    pub n_min: usize,
    /// Largest pool size recorded (and the growth cap for the walk).
    pub n_max: usize,
    /// Maximum number of candidates returned.
    pub max_candidates: usize,
}

impl Default for PoolSearchParams {
    fn default() -> Self {
        Self { n_min: 8, n_max: 12, max_candidates: 200 }
    }
}

/// Exhaustive size-3 seeds are capped at this many; beyond it only the
/// lowest-scored seeds start walks.
const MAX_SEEDS: usize = 20_000;
/// Bound on states visited per seed walk.
const MAX_WALK_STATES: usize = 5_000;

struct PoolScorer {
    cov: DMatrix<f64>,
    cache: HashMap<Vec<usize>, f64>,
}

impl PoolScorer {
    fn new(cov: DMatrix<f64>) -> Self {
        Self { cov, cache: HashMap::new() }
    }

    fn score(&mut self, pool: &[usize]) -> f64 {
        if let Some(&v) = self.cache.get(pool) {
            return v;
        }
        let k = pool.len();
        let sub = DMatrix::from_fn(k, k, |r, c| self.cov[(pool[r], pool[c])]);
        let eig = sub.symmetric_eigen();
        let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        // principal submatrices of a PSD covariance are PSD; clamp rounding noise
        let score = min_eig.max(0.0);
        self.cache.insert(pool.to_vec(), score);
        score
    }
}

/// Greedy backward-forward pool search within one group.
///
/// Starts from every size-3 subset of the group (the lowest-scored 20000 if
/// the group is large), then repeatedly applies the best single-asset
/// addition or removal that strictly lowers the score, stopping on plateaus.
/// Every pool visited with `n_min <= size <= n_max` is recorded; the result
/// is deduplicated, sorted ascending by score, and truncated to
/// `max_candidates`.
///
/// A group of exactly 3 assets yields its single pool only when `n_min <= 3`,
/// otherwise the result is empty.
pub fn greedy_pool_search(
    path: &SamplePath,
    group: &[usize],
    params: &PoolSearchParams,
) -> Result<Vec<PoolCandidate>> {
    let mut group = group.to_vec();
    group.sort_unstable();
    group.dedup();
    if group.len() < 3 {
        return Err(Error::GroupTooSmall { len: group.len() });
    }
    if params.n_min < 3 || params.n_max < params.n_min {
        return Err(Error::InvalidInput(format!(
            "invalid size band [{}, {}]",
            params.n_min, params.n_max
        )));
    }
    let sub_path = path.select_assets(&group)?;
    let cov = sym_part(&autocovariance(&sub_path, 0)?);
    let g = group.len();
    let mut scorer = PoolScorer::new(cov);

    // Size-3 seeds, lexicographic.
    let mut seeds: Vec<Vec<usize>> = Vec::new();
    for a in 0..g {
        for b in (a + 1)..g {
            for c in (b + 1)..g {
                seeds.push(vec![a, b, c]);
            }
        }
    }
    if seeds.len() > MAX_SEEDS {
        let mut scored: Vec<(f64, Vec<usize>)> = seeds
            .into_iter()
            .map(|s| (scorer.score(&s), s))
            .collect();
        scored.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
        seeds = scored.into_iter().take(MAX_SEEDS).map(|(_, s)| s).collect();
    }

    let mut recorded: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut expanded: HashSet<Vec<usize>> = HashSet::new();

    for seed in seeds {
        let mut pool = seed;
        let mut score = scorer.score(&pool);
        for _ in 0..MAX_WALK_STATES {
            if pool.len() >= params.n_min && pool.len() <= params.n_max {
                recorded.entry(pool.clone()).or_insert(score);
            }
            // A state already expanded continues exactly as before; the rest
            // of this walk would duplicate it.
            if !expanded.insert(pool.clone()) {
                break;
            }
            let mut best_move: Option<(f64, Vec<usize>)> = None;
            if pool.len() < params.n_max {
                for add in 0..g {
                    if pool.binary_search(&add).is_err() {
                        let mut next = pool.clone();
                        let pos = next.binary_search(&add).unwrap_err();
                        next.insert(pos, add);
                        let s = scorer.score(&next);
                        if s < score && best_move.as_ref().map_or(true, |(bs, _)| s < *bs) {
                            best_move = Some((s, next));
                        }
                    }
                }
            }
            if pool.len() > 3 {
                for drop_pos in 0..pool.len() {
                    let mut next = pool.clone();
                    next.remove(drop_pos);
                    let s = scorer.score(&next);
                    if s < score && best_move.as_ref().map_or(true, |(bs, _)| s < *bs) {
                        best_move = Some((s, next));
                    }
                }
            }
            match best_move {
                Some((s, next)) => {
                    pool = next;
                    score = s;
                }
                None => break,
            }
        }
    }

    let mut candidates: Vec<PoolCandidate> = recorded
        .into_iter()
        .map(|(local, score)| PoolCandidate {
            assets: local.iter().map(|&i| group[i]).collect(),
            score,
        })
        .collect();
    candidates.sort_by(|a, b| {
        a.score
            .partial_cmp(&b.score)
            .expect("non-finite pool score")
            .then_with(|| a.assets.cmp(&b.assets))
    });
    candidates.truncate(params.max_candidates);
    Ok(candidates)
}

/// Global ascending-score truncation across groups/windows.
pub fn keep_best(mut candidates: Vec<PoolCandidate>, m: usize) -> Vec<PoolCandidate> {
    candidates.sort_by(|a, b| {
        a.score
            .partial_cmp(&b.score)
            .expect("non-finite pool score")
            .then_with(|| a.assets.cmp(&b.assets))
    });
    candidates.truncate(m);
    candidates
}

/// Reads the sidecar group file: CSV with header `asset_label,group_label`.
pub fn read_groups_csv<R: Read>(reader: R) -> Result<Vec<(String, String)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut pairs = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() < 2 {
            return Err(Error::Parse {
                location: format!("groups row {}", i + 2),
                reason: "expected asset_label,group_label".into(),
            });
        }
        pairs.push((record[0].to_string(), record[1].to_string()));
    }
    Ok(pairs)
}

pub fn read_groups_path<P: AsRef<Path>>(path: P) -> Result<Vec<(String, String)>> {
    read_groups_csv(std::fs::File::open(path)?)
}

/// Maps (asset_label, group_label) pairs to column indices of the path,
/// keyed by group label. Unknown asset labels are rejected.
pub fn group_indices(
    path: &SamplePath,
    pairs: &[(String, String)],
) -> Result<BTreeMap<String, Vec<usize>>> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (asset, group) in pairs {
        let idx = path.label_index(asset).ok_or_else(|| Error::Parse {
            location: format!("groups entry '{asset}'"),
            reason: "asset label not present in data".into(),
        })?;
        groups.entry(group.clone()).or_default().push(idx);
    }
    for indices in groups.values_mut() {
        indices.sort_unstable();
        indices.dedup();
    }
    Ok(groups)
}
