//! Partitions of the repair set computed from the distance matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, JACOBI_TOLERANCE};
use crate::metric::DistanceMatrix;

const KMEANS_MAX_ITERS: usize = 100;

/// Gaussian affinities with a zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }
}

/// `s_ij = exp(−d_ij² / (2σ²))` off the diagonal.
pub fn similarity_from_distance(m: &DistanceMatrix, sigma: f64) -> Result<SimilarityMatrix> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let n = m.len();
    let values = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        let d = m.get(i, j);
                        (-(d * d) / (2.0 * sigma * sigma)).exp()
                    }
                })
                .collect()
        })
        .collect();
    Ok(SimilarityMatrix { values })
}

/// Half the median off-diagonal distance; 1 when there is no positive distance.
pub fn default_sigma(m: &DistanceMatrix) -> f64 {
    let mut upper = m.upper_triangle();
    if upper.is_empty() {
        return 1.0;
    }
    upper.sort_by(f64::total_cmp);
    let mid = upper.len() / 2;
    let median = if upper.len() % 2 == 1 {
        upper[mid]
    } else {
        0.5 * (upper[mid - 1] + upper[mid])
    };
    if median > 0.0 {
        median / 2.0
    } else {
        1.0
    }
}

/// Disjoint nonempty blocks of repair positions covering `0..n`, each block
/// sorted and blocks ordered by their smallest member.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        if blocks.iter().any(Vec::is_empty) {
            return Err(Error::InvalidParameter(
                "partition blocks must be nonempty".into(),
            ));
        }
        blocks.sort();
        let mut all: Vec<usize> = blocks.iter().flatten().copied().collect();
        all.sort_unstable();
        if all.iter().enumerate().any(|(i, &x)| i != x) {
            return Err(Error::InvalidParameter(
                "partition blocks must be disjoint and cover every repair".into(),
            ));
        }
        Ok(Partition { blocks })
    }

    /// Groups positions by an assignment vector.
    pub fn from_assignment(assignment: &[usize]) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut slot: Vec<Option<usize>> = Vec::new();
        for (i, &a) in assignment.iter().enumerate() {
            if a >= slot.len() {
                slot.resize(a + 1, None);
            }
            let b = *slot[a].get_or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[b].push(i);
        }
        Partition { blocks }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            blocks: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn single_block(n: usize) -> Self {
        Partition {
            blocks: if n == 0 {
                vec![]
            } else {
                vec![(0..n).collect()]
            },
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn element_count(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Block index of every element.
    pub fn assignment(&self) -> Vec<usize> {
        let mut out = vec![0; self.element_count()];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                out[i] = b;
            }
        }
        out
    }

    /// True if every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let a = coarser.assignment();
        self.blocks
            .iter()
            .all(|block| block.iter().all(|&i| a[i] == a[block[0]]))
    }

    pub fn labelled(&self, labels: &[String]) -> Vec<Vec<String>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&i| labels[i].clone()).collect())
            .collect()
    }
}

/// Connected components of the graph joining i and j whenever `d_ij < tau`.
pub fn threshold_partition(m: &DistanceMatrix, tau: f64) -> Result<Partition> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let n = m.len();
    let mut component = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        component[start] = next;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if component[j] == usize::MAX && m.get(i, j) < tau {
                    component[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    Ok(Partition::from_assignment(&component))
}

/// Symmetric normalized affinity `D^{-1/2} A D^{-1/2}`.
fn normalized_affinity(m: &DistanceMatrix, sigma: f64) -> Result<Vec<Vec<f64>>> {
    let a = similarity_from_distance(m, sigma)?;
    let n = m.len();
    let degree: Vec<f64> = a.values.iter().map(|row| row.iter().sum()).collect();
    if let Some(i) = degree.iter().position(|&d| d <= 0.0) {
        return Err(Error::IsolatedVertex {
            label: m.labels()[i].clone(),
        });
    }
    let inv_sqrt: Vec<f64> = degree.iter().map(|d| 1.0 / d.sqrt()).collect();
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| inv_sqrt[i] * a.get(i, j) * inv_sqrt[j])
                .collect()
        })
        .collect())
}

/// Eigenvalues of the normalized affinity in descending order, for judging
/// how many clusters the data supports.
pub fn spectral_eigenvalues(m: &DistanceMatrix, sigma: f64) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(&normalized_affinity(m, sigma)?, JACOBI_TOLERANCE).values)
}

/// Normalized spectral clustering into at most `k` blocks.
///
/// Rows of the top-`k` eigenvectors are scaled to unit length and grouped by
/// k-means started from a farthest-first seeding. The first seed is the row
/// farthest from the mean row; `seed` only breaks exact ties there. The
/// result can have fewer than `k` blocks when rows coincide.
pub fn spectral_partition(
    m: &DistanceMatrix,
    k: usize,
    sigma: f64,
    seed: u64,
) -> Result<Partition> {
    let n = m.len();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "k must be between 1 and {n}, got {k}"
        )));
    }
    if k == 1 {
        return Ok(Partition::single_block(n));
    }
    let eig = symmetric_eigen(&normalized_affinity(m, sigma)?, JACOBI_TOLERANCE);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let row: Vec<f64> = (0..k).map(|c| eig.vectors[c][i]).collect();
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter().map(|x| x / norm).collect()
            } else {
                row
            }
        })
        .collect();
    let assignment = kmeans(&rows, k, seed);
    Ok(Partition::from_assignment(&assignment))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

const TIE_EPS: f64 = 1e-12;

fn farthest_first(rows: &[Vec<f64>], k: usize, seed: u64) -> Vec<Vec<f64>> {
    let dim = rows[0].len();
    let n = rows.len();
    let mean: Vec<f64> = (0..dim)
        .map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / n as f64)
        .collect();
    let spread: Vec<f64> = rows.iter().map(|r| sq_dist(r, &mean)).collect();
    let far = spread.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..n).filter(|&i| spread[i] >= far - TIE_EPS).collect();
    let first = tied[ChaCha8Rng::seed_from_u64(seed).random_range(0..tied.len())];

    let mut centers = vec![rows[first].clone()];
    let mut nearest: Vec<f64> = rows.iter().map(|r| sq_dist(r, &rows[first])).collect();
    while centers.len() < k {
        let mut best = 0;
        for i in 1..n {
            if nearest[i] > nearest[best] + TIE_EPS {
                best = i;
            }
        }
        centers.push(rows[best].clone());
        for (i, r) in rows.iter().enumerate() {
            nearest[i] = nearest[i].min(sq_dist(r, &rows[best]));
        }
    }
    centers
}

/// Lloyd iterations to an assignment fixpoint. Ties go to the lowest centre;
/// an emptied centre keeps its position.
fn kmeans(rows: &[Vec<f64>], k: usize, seed: u64) -> Vec<usize> {
    let mut centers = farthest_first(rows, k, seed);
    let nearest_center = |row: &[f64], centers: &[Vec<f64>]| {
        let mut best = 0;
        let mut best_d = sq_dist(row, &centers[0]);
        for (c, center) in centers.iter().enumerate().skip(1) {
            let d = sq_dist(row, center);
            if d < best_d - TIE_EPS {
                best = c;
                best_d = d;
            }
        }
        best
    };
    let mut assignment: Vec<usize> = rows.iter().map(|r| nearest_center(r, &centers)).collect();
    for _ in 0..KMEANS_MAX_ITERS {
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = rows
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a == c)
                .map(|(r, _)| r)
                .collect();
            if members.is_empty() {
                continue;
            }
            for (d, x) in center.iter_mut().enumerate() {
                *x = members.iter().map(|r| r[d]).sum::<f64>() / members.len() as f64;
            }
        }
        let next: Vec<usize> = rows.iter().map(|r| nearest_center(r, &centers)).collect();
        if next == assignment {
            break;
        }
        assignment = next;
    }
    assignment
}

/// A clustering function and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ClusteringMethod {
    Spectral {
        k: usize,
        /// Kernel width; `None` selects [`default_sigma`].
        #[serde(default)]
        sigma: Option<f64>,
        #[serde(default)]
        seed: u64,
    },
    Threshold {
        tau: f64,
    },
}

impl ClusteringMethod {
    pub fn apply(&self, m: &DistanceMatrix) -> Result<Partition> {
        match *self {
            ClusteringMethod::Spectral { k, sigma, seed } => {
                spectral_partition(m, k, sigma.unwrap_or_else(|| default_sigma(m)), seed)
            }
            ClusteringMethod::Threshold { tau } => threshold_partition(m, tau),
        }
    }

    /// Stable textual key, used for caching.
    pub fn cache_key(&self) -> String {
        match self {
            ClusteringMethod::Spectral { k, sigma, seed } => {
                format!("spectral:k={k}:sigma={sigma:?}:seed={seed}")
            }
            ClusteringMethod::Threshold { tau } => format!("threshold:tau={tau:?}"),
        }
    }
}
