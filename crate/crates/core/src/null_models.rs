//! Success probabilities of the one-tailed binomial tests under random
//! linear arrangements, and a seeded arrangement sampler.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::{DistanceDistribution, LinearizedTree, TreeShape};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NullModelError {
    #[error("no exact tail probability for a {shape} tree with n = {n}")]
    Unsupported { shape: TreeShape, n: usize },
    #[error("the real-tree ensemble needs the observed star proportion")]
    MissingStarProportion,
    #[error("star proportion {0} is outside [0, 1]")]
    InvalidStarProportion(Rational64),
    #[error("distribution is empty")]
    EmptyDistribution,
}

/// Side of the random baseline being tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `D` above its random expectation (anti-minimization).
    Above,
    /// `D` below its random expectation (minimization).
    Below,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Above, Direction::Below];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Above => "above",
            Direction::Below => "below",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "above" => Ok(Direction::Above),
            "below" => Ok(Direction::Below),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    Real,
    UniformLabelled,
    UniformUnlabelled,
}

/// Tree ensemble for four-vertex trees, which fixes the probability of a star.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub p_star: Option<Rational64>,
}

impl EnsembleSpec {
    pub fn real(p_star: Rational64) -> Self {
        Self {
            kind: EnsembleKind::Real,
            p_star: Some(p_star),
        }
    }

    /// 4 of the 16 labelled trees on four vertices are stars.
    pub fn uniform_labelled() -> Self {
        Self {
            kind: EnsembleKind::UniformLabelled,
            p_star: None,
        }
    }

    /// One of the two unlabelled trees on four vertices is a star.
    pub fn uniform_unlabelled() -> Self {
        Self {
            kind: EnsembleKind::UniformUnlabelled,
            p_star: None,
        }
    }

    pub fn star_probability(&self) -> Result<Rational64, NullModelError> {
        let p = match self.kind {
            EnsembleKind::UniformLabelled => return Ok(Rational64::new(1, 4)),
            EnsembleKind::UniformUnlabelled => return Ok(Rational64::new(1, 2)),
            EnsembleKind::Real => self.p_star.ok_or(NullModelError::MissingStarProportion)?,
        };
        if p < Rational64::from_integer(0) || p > Rational64::from_integer(1) {
            return Err(NullModelError::InvalidStarProportion(p));
        }
        Ok(p)
    }
}

/// `(n^2 - 1) / 3`, the mean of `D` over uniformly random arrangements.
pub fn expected_d_random_arrangement(n: u64) -> Rational64 {
    let n = n as i64;
    Rational64::new(n * n - 1, 3)
}

pub fn expected_d_from_distribution(
    dist: &DistanceDistribution,
) -> Result<Rational64, NullModelError> {
    dist.mean().ok_or(NullModelError::EmptyDistribution)
}

/// Mean of `D` over the arrangements the null model allows. With crossings
/// banned the four-vertex path averages 19/4 instead of 5; every other tree
/// with at most four vertices is unaffected.
pub fn expected_baseline(shape: TreeShape, n: usize, noncrossing: bool) -> Rational64 {
    if noncrossing && n == 4 && shape == TreeShape::Linear {
        return Rational64::new(19, 4);
    }
    expected_d_random_arrangement(n as u64)
}

/// Exact probability that `D` lands on the `dir` side of its random
/// expectation for the trees with `n` in {3, 4}.
pub fn shape_tail_probability(
    shape: TreeShape,
    n: usize,
    dir: Direction,
) -> Result<Rational64, NullModelError> {
    match (shape, n, dir) {
        (TreeShape::Both, 3, Direction::Above) => Ok(Rational64::new(2, 3)),
        (TreeShape::Both, 3, Direction::Below) => Ok(Rational64::new(1, 3)),
        (TreeShape::Star, 4, _) => Ok(Rational64::new(1, 2)),
        (TreeShape::Linear, 4, _) => Ok(Rational64::new(1, 4)),
        _ => Err(NullModelError::Unsupported { shape, n }),
    }
}

/// Same as [`shape_tail_probability`] but over crossing-free arrangements
/// only, measured against [`expected_baseline`].
pub fn noncrossing_shape_tail_probability(
    shape: TreeShape,
    n: usize,
    dir: Direction,
) -> Result<Rational64, NullModelError> {
    match (shape, n, dir) {
        (TreeShape::Linear, 4, Direction::Above) => Ok(Rational64::new(5, 8)),
        (TreeShape::Linear, 4, Direction::Below) => Ok(Rational64::new(3, 8)),
        // Stars and three-vertex trees cannot cross.
        _ => shape_tail_probability(shape, n, dir),
    }
}

/// `(p_s + 1) / 4` for four-vertex trees drawn from `ensemble`; the same in
/// both directions.
pub fn mixture_probability(
    ensemble: &EnsembleSpec,
    _dir: Direction,
) -> Result<Rational64, NullModelError> {
    let p_s = ensemble.star_probability()?;
    Ok((p_s + 1) / 4)
}

/// `(5 - p_s) / 8` above and `(p_s + 3) / 8` below, when crossings are banned.
pub fn noncrossing_mixture_probability(
    ensemble: &EnsembleSpec,
    dir: Direction,
) -> Result<Rational64, NullModelError> {
    let p_s = ensemble.star_probability()?;
    Ok(match dir {
        Direction::Above => (Rational64::from_integer(5) - p_s) / 8,
        Direction::Below => (p_s + 3) / 8,
    })
}

/// Seeded source of uniformly random linear arrangements.
///
/// One sampler per worker; it is not meant to be shared.
#[derive(Debug, Clone)]
pub struct ArrangementSampler {
    rng: ChaCha8Rng,
}

impl ArrangementSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform random permutation of `1..=n` (Fisher-Yates).
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (1..=n).collect();
        perm.shuffle(&mut self.rng);
        perm
    }

    pub fn sample(&mut self, tree: &LinearizedTree) -> LinearizedTree {
        let perm = self.permutation(tree.n());
        tree.rearranged(&perm)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

pub fn sample_random_arrangement(tree: &LinearizedTree, seed: u64) -> LinearizedTree {
    ArrangementSampler::new(seed).sample(tree)
}
