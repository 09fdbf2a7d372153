//! C4.5-style decision tree (gain-ratio splits, binary thresholds) and the
//! bagged forest built from it.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::seed::stream_rng;

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeOptions {
    /// Nodes smaller than this become leaves without trying to split.
    pub min_leaf: usize,
    pub prune: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) enum Node {
    Leaf {
        p_sick: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct TreeModel {
    pub root: Node,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct ForestModel {
    pub trees: Vec<Node>,
}

fn entropy_counts(sick: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = sick as f64 / n as f64;
    let mut h = 0.0;
    for q in [p, 1.0 - p] {
        if q > 0.0 {
            h -= q * q.log2();
        }
    }
    h
}

/// Upper confidence bound on the error rate (normal approximation at
/// CF = 0.25), scaled back to an error count.
fn pessimistic_errors(n: usize, errors: usize) -> f64 {
    const Z: f64 = 0.6744897501960817;
    let nf = n as f64;
    let f = errors as f64 / nf;
    let z2 = Z * Z;
    let upper = (f + z2 / (2.0 * nf)
        + Z * (f * (1.0 - f) / nf + z2 / (4.0 * nf * nf)).sqrt())
        / (1.0 + z2 / nf);
    upper * nf
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain_ratio: f64,
}

struct Builder<'a> {
    data: &'a Dataset,
    opts: TreeOptions,
    /// Present only for forest trees: RNG plus features-per-split count.
    subsample: Option<(rand_chacha::ChaCha8Rng, usize)>,
}

impl<'a> Builder<'a> {
    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.data.n_features();
        match &mut self.subsample {
            None => (0..d).collect(),
            Some((rng, m)) => {
                let mut pool: Vec<usize> = (0..d).collect();
                let take = (*m).min(d);
                for i in 0..take {
                    let j = rng.gen_range(i..d);
                    pool.swap(i, j);
                }
                let mut chosen = pool[..take].to_vec();
                chosen.sort_unstable();
                chosen
            }
        }
    }

    fn best_split(&mut self, idx: &[usize]) -> Option<SplitChoice> {
        let n = idx.len();
        let sick_total = idx
            .iter()
            .filter(|&&i| self.data.instances()[i].label.is_sick())
            .count();
        let parent_entropy = entropy_counts(sick_total, n);
        let mut best: Option<SplitChoice> = None;
        for feature in self.candidate_features() {
            let mut column: Vec<(f64, bool)> = idx
                .iter()
                .map(|&i| {
                    let inst = &self.data.instances()[i];
                    (inst.values[feature], inst.label.is_sick())
                })
                .collect();
            column.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut left_n = 0usize;
            let mut left_sick = 0usize;
            for i in 0..n - 1 {
                left_n += 1;
                if column[i].1 {
                    left_sick += 1;
                }
                if column[i].0 == column[i + 1].0 {
                    continue;
                }
                let right_n = n - left_n;
                let right_sick = sick_total - left_sick;
                let wl = left_n as f64 / n as f64;
                let wr = right_n as f64 / n as f64;
                let gain = parent_entropy
                    - wl * entropy_counts(left_sick, left_n)
                    - wr * entropy_counts(right_sick, right_n);
                // a zero-gain split of an impure node is still taken: parity
                // patterns need two levels before any gain shows up
                let split_info = -(wl * wl.log2() + wr * wr.log2());
                let gain_ratio = gain.max(0.0) / split_info;
                // strictly-greater keeps the first (feature, threshold) on ties
                if best.as_ref().map_or(true, |b| gain_ratio > b.gain_ratio) {
                    best = Some(SplitChoice {
                        feature,
                        threshold: (column[i].0 + column[i + 1].0) / 2.0,
                        gain_ratio,
                    });
                }
            }
        }
        best
    }

    /// Returns the node and its pessimistic error estimate.
    fn build(&mut self, idx: &[usize]) -> (Node, f64) {
        let n = idx.len();
        let sick = idx
            .iter()
            .filter(|&&i| self.data.instances()[i].label.is_sick())
            .count();
        let leaf = Node::Leaf {
            p_sick: (sick as f64 + 1.0) / (n as f64 + 2.0),
        };
        let leaf_pess = pessimistic_errors(n, n - sick.max(n - sick));
        if sick == 0 || sick == n || n < self.opts.min_leaf {
            return (leaf, leaf_pess);
        }
        let Some(split) = self.best_split(idx) else {
            return (leaf, leaf_pess);
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            idx.iter().copied().partition(|&i| {
                self.data.instances()[i].values[split.feature] <= split.threshold
            });
        let (left, left_pess) = self.build(&left_idx);
        let (right, right_pess) = self.build(&right_idx);
        let subtree_pess = left_pess + right_pess;
        if self.opts.prune && leaf_pess <= subtree_pess {
            return (leaf, leaf_pess);
        }
        (
            Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left: Box::new(left),
                right: Box::new(right),
            },
            subtree_pess,
        )
    }
}

pub(crate) fn train_tree(data: &Dataset, opts: TreeOptions) -> Result<TreeModel> {
    if opts.min_leaf == 0 {
        return Err(Error::Hyperparameter {
            kind: "decision_tree".into(),
            detail: "min_leaf must be at least 1".into(),
        });
    }
    let idx: Vec<usize> = (0..data.len()).collect();
    let mut builder = Builder {
        data,
        opts,
        subsample: None,
    };
    Ok(TreeModel {
        root: builder.build(&idx).0,
    })
}

pub(crate) fn train_forest(
    data: &Dataset,
    n_trees: usize,
    min_leaf: usize,
    seed: u64,
) -> Result<ForestModel> {
    if n_trees == 0 {
        return Err(Error::Hyperparameter {
            kind: "random_forest".into(),
            detail: "n_trees must be at least 1".into(),
        });
    }
    if min_leaf == 0 {
        return Err(Error::Hyperparameter {
            kind: "random_forest".into(),
            detail: "min_leaf must be at least 1".into(),
        });
    }
    let n = data.len();
    let m = (data.n_features() as f64).sqrt().ceil() as usize;
    let trees: Vec<Node> = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, "random_forest", "tree", t as u64);
            let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let mut builder = Builder {
                data,
                opts: TreeOptions {
                    min_leaf,
                    prune: false,
                },
                subsample: Some((rng, m)),
            };
            builder.build(&bootstrap).0
        })
        .collect();
    Ok(ForestModel { trees })
}

fn walk(node: &Node, values: &[f64]) -> f64 {
    match node {
        Node::Leaf { p_sick } => *p_sick,
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            if values[*feature] <= *threshold {
                walk(left, values)
            } else {
                walk(right, values)
            }
        }
    }
}

pub(crate) fn predict_tree(model: &TreeModel, values: &[f64]) -> f64 {
    walk(&model.root, values)
}

pub(crate) fn predict_forest(model: &ForestModel, values: &[f64]) -> f64 {
    let sum: f64 = model.trees.iter().map(|t| walk(t, values)).sum();
    sum / model.trees.len() as f64
}
