//! Planar embedding of a distance matrix by metric multidimensional scaling.
//!
//! Classical scaling gives the starting configuration; stress majorization
//! (Guttman transforms) then lowers the raw stress until the relative
//! improvement falls under the tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, JACOBI_TOLERANCE};
use crate::metric::DistanceMatrix;

pub type Point = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedPoint {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub points: Vec<EmbeddedPoint>,
    pub achieved_stress: f64,
    pub iterations: usize,
}

impl Embedding {
    pub fn coordinates(&self) -> Vec<Point> {
        self.points.iter().map(|p| [p.x, p.y]).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdsOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for MdsOptions {
    fn default() -> Self {
        MdsOptions {
            max_iters: 500,
            tol: 1e-9,
            seed: 0,
        }
    }
}

fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Sum over ordered pairs of squared residuals, before the square root.
fn raw_stress(points: &[Point], m: &DistanceMatrix) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let r = m.get(i, j) - dist(&points[i], &points[j]);
            total += r * r;
        }
    }
    total
}

/// `sqrt(Σ_{i,j} (d_ij − ‖x_i − x_j‖)²)` over all ordered pairs.
pub fn stress(points: &[Point], m: &DistanceMatrix) -> Result<f64> {
    if points.len() != m.len() {
        return Err(Error::DimensionMismatch {
            expected: m.len(),
            found: points.len(),
        });
    }
    Ok(raw_stress(points, m).sqrt())
}

/// Top two components of classical (Torgerson) scaling, or `None` when the
/// double-centred matrix has no positive spectrum to speak of.
pub fn classical_scaling(m: &DistanceMatrix) -> Option<Vec<Point>> {
    let n = m.len();
    if n == 0 {
        return None;
    }
    let sq: Vec<Vec<f64>> = m
        .values()
        .iter()
        .map(|row| row.iter().map(|d| d * d).collect())
        .collect();
    let row_mean: Vec<f64> = sq
        .iter()
        .map(|r| r.iter().sum::<f64>() / n as f64)
        .collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    let b: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| -0.5 * (sq[i][j] - row_mean[i] - row_mean[j] + grand))
                .collect()
        })
        .collect();
    let eig = symmetric_eigen(&b, JACOBI_TOLERANCE);
    let magnitude = b.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if eig.values[0] <= 1e-12 * (1.0 + magnitude) {
        return None;
    }
    let scale: Vec<f64> = (0..2)
        .map(|c| eig.values.get(c).map_or(0.0, |l| l.max(0.0).sqrt()))
        .collect();
    Some(
        (0..n)
            .map(|i| {
                let coord = |c: usize| eig.vectors.get(c).map_or(0.0, |v| v[i] * scale[c]);
                [coord(0), coord(1)]
            })
            .collect(),
    )
}

/// Result of running stress majorization from a given start.
#[derive(Clone, Debug)]
pub struct MajorizationRun {
    pub points: Vec<Point>,
    /// Stress before the first transform and after each one.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

/// Guttman-transform iterations with unit weights.
pub fn smacof(m: &DistanceMatrix, init: Vec<Point>, max_iters: usize, tol: f64) -> MajorizationRun {
    let n = m.len();
    let mut x = init;
    let mut current = raw_stress(&x, m).sqrt();
    let mut trace = vec![current];
    let mut iterations = 0;
    while iterations < max_iters && current > 0.0 {
        let mut next = vec![[0.0; 2]; n];
        for i in 0..n {
            let mut acc = [0.0; 2];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let dij = dist(&x[i], &x[j]);
                let ratio = if dij > 0.0 { m.get(i, j) / dij } else { 0.0 };
                acc[0] += ratio * (x[i][0] - x[j][0]);
                acc[1] += ratio * (x[i][1] - x[j][1]);
            }
            // B(X)X row i: Σ_j b_ij x_j with b_ii = −Σ_{j≠i} b_ij
            next[i] = [acc[0] / n as f64, acc[1] / n as f64];
        }
        // the transform is defined up to translation; keep the centroid fixed
        let centroid = centroid(&x);
        for p in next.iter_mut() {
            p[0] += centroid[0];
            p[1] += centroid[1];
        }
        let updated = raw_stress(&next, m).sqrt();
        iterations += 1;
        x = next;
        trace.push(updated);
        let improvement = (current - updated) / current;
        current = updated;
        if improvement < tol {
            break;
        }
    }
    MajorizationRun {
        points: x,
        trace,
        iterations,
    }
}

fn centroid(points: &[Point]) -> Point {
    let n = points.len().max(1) as f64;
    let sx: f64 = points.iter().map(|p| p[0]).sum();
    let sy: f64 = points.iter().map(|p| p[1]).sum();
    [sx / n, sy / n]
}

/// Seeded uniform points in [−1, 1]².
pub fn random_points(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)])
        .collect()
}

/// Centroid to the origin, then the first point away from the origin
/// rotated onto the positive x-axis.
pub fn canonicalize(points: &mut [Point]) {
    let c = centroid(points);
    for p in points.iter_mut() {
        p[0] -= c[0];
        p[1] -= c[1];
    }
    let Some(anchor) = points.iter().find(|p| p[0].hypot(p[1]) > 1e-12).copied() else {
        return;
    };
    let angle = anchor[1].atan2(anchor[0]);
    let (sin, cos) = (-angle).sin_cos();
    for p in points.iter_mut() {
        *p = [cos * p[0] - sin * p[1], sin * p[0] + cos * p[1]];
    }
}

/// Embeds the matrix in the plane. Deterministic in (matrix, options); the
/// seed only matters when classical scaling degenerates.
pub fn mds_embed(m: &DistanceMatrix, opts: &MdsOptions) -> Result<Embedding> {
    m.validate_symmetric()?;
    let init = classical_scaling(m).unwrap_or_else(|| random_points(m.len(), opts.seed));
    let run = smacof(m, init, opts.max_iters, opts.tol);
    Ok(finish(m, run))
}

/// Like [`mds_embed`] but from seeded random starting points.
pub fn mds_embed_random_start(m: &DistanceMatrix, opts: &MdsOptions) -> Result<Embedding> {
    m.validate_symmetric()?;
    let run = smacof(
        m,
        random_points(m.len(), opts.seed),
        opts.max_iters,
        opts.tol,
    );
    Ok(finish(m, run))
}

fn finish(m: &DistanceMatrix, run: MajorizationRun) -> Embedding {
    let mut points = run.points;
    canonicalize(&mut points);
    let achieved_stress = raw_stress(&points, m).sqrt();
    Embedding {
        points: m
            .labels()
            .iter()
            .zip(points)
            .map(|(label, p)| EmbeddedPoint {
                label: label.clone(),
                x: p[0],
                y: p[1],
            })
            .collect(),
        achieved_stress,
        iterations: run.iterations,
    }
}
