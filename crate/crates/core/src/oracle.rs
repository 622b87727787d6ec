//! Exact finite-volume computations on the semi-infinite order-3 tree by
//! direct enumeration. Nothing here uses the closed-form recurrence; the
//! point is to check it.
//!
//! Vertices are numbered breadth first, so the ball `V_m` is always the
//! index prefix `0..|V_m|` and a configuration on `V_n` restricts to `V_m`
//! by masking the low bits of its index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    classify_config, BoundaryFieldVector, CouplingParameters, SemiBallConfiguration, Spin,
    TransferWeights,
};
use crate::recurrence::{full_step, UVector, DIRECT_CLASSES};

pub const BRANCHING: usize = 3;
pub const MAX_TREE_DEPTH: usize = 4;
/// Largest depth for which a full probability table is enumerated.
pub const MAX_ENUMERATION_DEPTH: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CayleyTree {
    depth: usize,
    levels: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

pub fn build_tree(depth: usize) -> Result<CayleyTree> {
    if !(1..=MAX_TREE_DEPTH).contains(&depth) {
        return Err(Error::DepthOutOfRange {
            depth,
            min: 1,
            max: MAX_TREE_DEPTH,
        });
    }
    let mut levels = vec![vec![0usize]];
    let mut parent = vec![None];
    let mut children = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &x in levels.last().unwrap() {
            for _ in 0..BRANCHING {
                let y = parent.len();
                parent.push(Some(x));
                children.push(Vec::new());
                children[x].push(y);
                next.push(y);
            }
        }
        levels.push(next);
    }
    Ok(CayleyTree {
        depth,
        levels,
        parent,
        children,
    })
}

impl CayleyTree {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    /// Vertices at distance `m` from the root.
    pub fn level(&self, m: usize) -> &[usize] {
        &self.levels[m]
    }

    /// Number of vertices in the ball of radius `m`.
    pub fn ball_size(&self, m: usize) -> usize {
        self.levels[..=m].iter().map(Vec::len).sum()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Nearest-neighbour pairs (tree edges).
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.vertex_count()).map(|y| (self.parent[y].unwrap(), y))
    }

    /// Prolonged next-nearest-neighbour pairs `(x, z)` with `z ∈ S²(x)`.
    pub fn prolonged_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.vertex_count()).filter_map(|z| {
            let y = self.parent[z]?;
            self.parent[y].map(|x| (x, z))
        })
    }
}

/// Assignment of `±1` to every vertex of a ball.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfiguration {
    spins: Vec<i8>,
}

impl SpinConfiguration {
    pub fn uniform(n: usize, spin: Spin) -> Self {
        Self {
            spins: vec![spin.value() as i8; n],
        }
    }

    /// Bit `v` of `index` set means vertex `v` is down.
    pub fn from_index(index: u64, n: usize) -> Self {
        Self {
            spins: (0..n)
                .map(|v| if index >> v & 1 == 1 { -1 } else { 1 })
                .collect(),
        }
    }

    pub fn index(&self) -> u64 {
        self.spins
            .iter()
            .enumerate()
            .fold(0, |acc, (v, &s)| if s < 0 { acc | 1 << v } else { acc })
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn value(&self, v: usize) -> i32 {
        self.spins[v] as i32
    }

    pub fn spin(&self, v: usize) -> Spin {
        Spin::from_value(self.value(v)).expect("spins are ±1")
    }

    pub fn flip(&mut self, v: usize) {
        self.spins[v] = -self.spins[v];
    }

    pub fn semi_ball(&self, tree: &CayleyTree, x: usize) -> SemiBallConfiguration {
        let s = tree.successors(x);
        SemiBallConfiguration::new(
            self.spin(x),
            [self.spin(s[0]), self.spin(s[1]), self.spin(s[2])],
        )
    }
}

/// `H(σ) = -Jp Σ_{>x,z<} σ(x)σ(z) - J Σ_{<x,y>} σ(x)σ(y)` over the ball.
pub fn hamiltonian(cfg: &SpinConfiguration, tree: &CayleyTree, params: &CouplingParameters) -> f64 {
    assert_eq!(
        cfg.len(),
        tree.vertex_count(),
        "configuration must cover the ball"
    );
    let nn: i32 = tree.edges().map(|(x, y)| cfg.value(x) * cfg.value(y)).sum();
    let nnn: i32 = tree
        .prolonged_pairs()
        .map(|(x, z)| cfg.value(x) * cfg.value(z))
        .sum();
    -params.jp() * nnn as f64 - params.j() * nn as f64
}

/// `Σ_{x ∈ W_{n-1}} σ(x)σ(y)σ(z)σ(w) h_{class(x;y,z,w)}`.
pub fn boundary_exponent(
    cfg: &SpinConfiguration,
    tree: &CayleyTree,
    h: &BoundaryFieldVector,
) -> f64 {
    tree.level(tree.depth() - 1)
        .iter()
        .map(|&x| h.semi_ball_exponent(&cfg.semi_ball(tree, x)))
        .sum()
}

/// Unnormalised log-probability `-βH(σ) + boundary(σ)`.
pub fn log_weight(
    cfg: &SpinConfiguration,
    tree: &CayleyTree,
    params: &CouplingParameters,
    h: &BoundaryFieldVector,
) -> f64 {
    -params.beta() * hamiltonian(cfg, tree, params) + boundary_exponent(cfg, tree, h)
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Probability table over all configurations of a ball, indexed by
/// [`SpinConfiguration::index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteVolumeMeasure {
    /// Radius of the ball the table lives on.
    pub depth: usize,
    pub vertex_count: usize,
    pub probabilities: Vec<f64>,
    pub log_partition_function: f64,
}

impl FiniteVolumeMeasure {
    pub fn partition_function(&self) -> f64 {
        self.log_partition_function.exp()
    }

    pub fn probability(&self, cfg: &SpinConfiguration) -> f64 {
        self.probabilities[cfg.index() as usize]
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Marginal on the ball of radius `m < depth`.
    pub fn marginal(&self, tree: &CayleyTree, m: usize) -> Vec<f64> {
        let inner = tree.ball_size(m);
        let mask = (1usize << inner) - 1;
        let mut out = vec![0.0; 1 << inner];
        for (idx, p) in self.probabilities.iter().enumerate() {
            out[idx & mask] += p;
        }
        out
    }
}

/// Exact measure `μ_h^{(n)}` by enumerating every configuration of `V_n`.
pub fn finite_measure(
    tree: &CayleyTree,
    params: &CouplingParameters,
    h: &BoundaryFieldVector,
) -> Result<FiniteVolumeMeasure> {
    if tree.depth() > MAX_ENUMERATION_DEPTH {
        return Err(Error::DepthOutOfRange {
            depth: tree.depth(),
            min: 1,
            max: MAX_ENUMERATION_DEPTH,
        });
    }
    let n = tree.vertex_count();
    let log_weights: Vec<f64> = (0..1u64 << n)
        .map(|idx| log_weight(&SpinConfiguration::from_index(idx, n), tree, params, h))
        .collect();
    let ln_z = log_sum_exp(&log_weights);
    Ok(FiniteVolumeMeasure {
        depth: tree.depth(),
        vertex_count: n,
        probabilities: log_weights.iter().map(|lw| (lw - ln_z).exp()).collect(),
        log_partition_function: ln_z,
    })
}

/// Log of the sum over the three successors `η` of a boundary vertex `x`:
/// `Σ_η exp(βJ σ(x)Ση + βJp σ(parent x)Ση + σ(x)Πη h_class)`.
fn ln_leaf_sum(
    spin_x: Spin,
    spin_parent: Option<Spin>,
    params: &CouplingParameters,
    h: &BoundaryFieldVector,
) -> f64 {
    let beta = params.beta();
    let p = spin_parent.map_or(0, Spin::value) as f64;
    let terms: Vec<f64> = SemiBallConfiguration::all()
        .into_iter()
        .filter(|cfg| cfg.center == spin_x)
        .map(|cfg| {
            let sum: i32 = cfg.successors.iter().map(|s| s.value()).sum();
            let sum = sum as f64;
            beta * params.j() * spin_x.value() as f64 * sum
                + beta * params.jp() * p * sum
                + h.semi_ball_exponent(&cfg)
        })
        .collect();
    log_sum_exp(&terms)
}

/// Marginal of `μ_h^{(n)}` on `V_{n-1}`, obtained by summing each boundary
/// vertex's three leaves independently. Supports `n` up to 3.
pub fn leaf_summed_marginal(
    depth: usize,
    params: &CouplingParameters,
    h: &BoundaryFieldVector,
) -> Result<FiniteVolumeMeasure> {
    if !(2..=MAX_ENUMERATION_DEPTH + 1).contains(&depth) {
        return Err(Error::DepthOutOfRange {
            depth,
            min: 2,
            max: MAX_ENUMERATION_DEPTH + 1,
        });
    }
    let inner_tree = build_tree(depth - 1)?;
    let n = inner_tree.vertex_count();
    let boundary = inner_tree.level(depth - 1);
    let beta = params.beta();
    let log_weights: Vec<f64> = (0..1u64 << n)
        .map(|idx| {
            let cfg = SpinConfiguration::from_index(idx, n);
            let leaves: f64 = boundary
                .iter()
                .map(|&x| {
                    let parent = inner_tree.parent(x).map(|p| cfg.spin(p));
                    ln_leaf_sum(cfg.spin(x), parent, params, h)
                })
                .sum();
            -beta * hamiltonian(&cfg, &inner_tree, params) + leaves
        })
        .collect();
    let ln_z = log_sum_exp(&log_weights);
    Ok(FiniteVolumeMeasure {
        depth: depth - 1,
        vertex_count: n,
        probabilities: log_weights.iter().map(|lw| (lw - ln_z).exp()).collect(),
        log_partition_function: ln_z,
    })
}

fn max_abs_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `max_σ |Σ_ω μ^{(2)}(σ ∨ ω) - μ^{(1)}(σ)|` over the 16 configurations of
/// `V_1`, with `μ^{(2)}` enumerated over all 2¹³ states.
pub fn kolmogorov_consistency_check(
    params: &CouplingParameters,
    h: &BoundaryFieldVector,
) -> Result<f64> {
    consistency_residual(2, params, h)
}

/// Consistency residual between levels `depth` and `depth - 1`. Level 2 uses
/// full enumeration; level 3 sums leaves branch by branch.
pub fn consistency_residual(
    depth: usize,
    params: &CouplingParameters,
    h: &BoundaryFieldVector,
) -> Result<f64> {
    match depth {
        2 => {
            let outer_tree = build_tree(2)?;
            let outer = finite_measure(&outer_tree, params, h)?;
            let inner = finite_measure(&build_tree(1)?, params, h)?;
            Ok(max_abs_difference(
                &outer.marginal(&outer_tree, 1),
                &inner.probabilities,
            ))
        }
        3 => {
            let marginal = leaf_summed_marginal(3, params, h)?;
            let inner = finite_measure(&build_tree(2)?, params, h)?;
            Ok(max_abs_difference(
                &marginal.probabilities,
                &inner.probabilities,
            ))
        }
        _ => Err(Error::DepthOutOfRange {
            depth,
            min: 2,
            max: 3,
        }),
    }
}

/// `ln Z_n` computed recursively from the independence of the branches
/// below each vertex. Valid for every supported depth.
pub fn log_partition_function_factorized(
    depth: usize,
    params: &CouplingParameters,
    h: &BoundaryFieldVector,
) -> Result<f64> {
    let tree = build_tree(depth)?;
    let beta = params.beta();

    // ln of the weight of the subtree hanging below a vertex at `level`
    // with spin `s` whose parent has spin `p`, including the couplings from
    // the vertex's ancestors into that subtree.
    fn below(
        level: usize,
        depth: usize,
        p: Option<Spin>,
        s: Spin,
        beta: f64,
        params: &CouplingParameters,
        h: &BoundaryFieldVector,
    ) -> f64 {
        if level == depth - 1 {
            return ln_leaf_sum(s, p, params, h);
        }
        let pv = p.map_or(0, Spin::value) as f64;
        let per_child: Vec<f64> = Spin::ALL
            .iter()
            .map(|&c| {
                let cv = c.value() as f64;
                beta * (params.j() * s.value() as f64 + params.jp() * pv) * cv
                    + below(level + 1, depth, Some(s), c, beta, params, h)
            })
            .collect();
        BRANCHING as f64 * log_sum_exp(&per_child)
    }

    let roots: Vec<f64> = Spin::ALL
        .iter()
        .map(|&s| below(0, tree.depth(), None, s, beta, params, h))
        .collect();
    Ok(log_sum_exp(&roots))
}

/// Sum over the nine grandchildren of a semi-ball `(i; j,k,l)`:
/// `Σ exp(βJp·i·Σleaves + βJ·Σ_branch spin·Σleaves + Σ_branch sign·h)`,
/// with `a = e^{βJ}`, `b = e^{βJp}`, `u = e^h`.
pub fn enumerate_semi_ball_sum(
    cfg: &SemiBallConfiguration,
    u: &UVector,
    w: &TransferWeights,
) -> Result<f64> {
    let i = cfg.center.value();
    let mut total = 0.0;
    for bits in 0u32..1 << 9 {
        let leaf = |k: usize| {
            if bits >> k & 1 == 1 {
                Spin::Down
            } else {
                Spin::Up
            }
        };
        let mut jp_exponent = 0;
        let mut j_exponent = 0;
        let mut field = 1.0;
        for (branch, &succ) in cfg.successors.iter().enumerate() {
            let leaves = [leaf(3 * branch), leaf(3 * branch + 1), leaf(3 * branch + 2)];
            let leaf_sum: i32 = leaves.iter().map(|s| s.value()).sum();
            jp_exponent += i * leaf_sum;
            j_exponent += succ.value() * leaf_sum;
            let class = classify_config(&SemiBallConfiguration::new(succ, leaves));
            field *= u.get(class.index()).powi(class.sign());
        }
        total += w.b().powi(jp_exponent) * w.a().powi(j_exponent) * field;
    }
    if total.is_finite() && total > 0.0 {
        Ok(total)
    } else {
        Err(Error::Overflow {
            equation: "semi-ball enumeration sum",
        })
    }
}

/// Relative mismatch, per class, between the enumerated sums and the
/// closed-form brackets returned by [`full_step`], after dividing out the
/// common constant fitted on class 1.
pub fn verify_recurrence_by_enumeration(u: &UVector, w: &TransferWeights) -> Result<[f64; 8]> {
    let (raw, _) = full_step(u, w)?;
    let mut representatives: [Option<SemiBallConfiguration>; 8] = [None; 8];
    for cfg in SemiBallConfiguration::all() {
        let k = classify_config(&cfg).index() - 1;
        representatives[k].get_or_insert(cfg);
    }
    let mut ratios = [0.0; 8];
    for (k, cfg) in representatives.iter().enumerate() {
        let cfg = cfg.expect("every class is populated");
        let enumerated = enumerate_semi_ball_sum(&cfg, u, w)?;
        let closed = if DIRECT_CLASSES.contains(&k) {
            raw.components()[k]
        } else {
            1.0 / raw.components()[k]
        };
        ratios[k] = enumerated / closed;
    }
    Ok(ratios.map(|r| (r / ratios[0] - 1.0).abs()))
}
