//! Orbit density on an ε-grid, relative measure in balls, and the coverage
//! of forward images of a ball.

use std::collections::{HashSet, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{bail, Result};
use crate::geom::{net, sample_in_ball, sphere_radius, Ball, Manifold, Measure, Point};
use crate::ifs::{IfsSystem, Letter};
use crate::scalar::{wrap_unit, Real};

const MAX_CELLS: usize = 50_000_000;

/// Partition of a manifold into cells of diameter about `eps`. The torus and
/// circle use square cells; the sphere uses equal-area cells cut by
/// `ceil(1/eps)` longitude sectors and bands of equal height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsGrid {
    pub manifold: Manifold,
    pub eps: f64,
    /// Cells per axis (circle, torus) or longitude sectors (sphere).
    pub n: usize,
    /// Height bands on the sphere; 1 otherwise.
    pub bands: usize,
}

impl EpsGrid {
    pub fn new(m: Manifold, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            bail!(Input, "grid resolution {eps} must lie in (0, 1]");
        }
        let n = (1.0 / eps).ceil() as usize;
        let g = match m {
            Manifold::Circle => EpsGrid { manifold: m, eps, n, bands: 1 },
            Manifold::Torus2 => EpsGrid { manifold: m, eps, n, bands: 1 },
            Manifold::Sphere2 => {
                let total = (1.0 / (std::f64::consts::PI * eps * eps)).ceil() as usize;
                EpsGrid { manifold: m, eps, n, bands: total.div_ceil(n).max(1) }
            }
        };
        if g.cells() > MAX_CELLS {
            bail!(Budget, "an eps-grid with {} cells exceeds the memory budget", g.cells());
        }
        Ok(g)
    }

    pub fn cells(&self) -> usize {
        match self.manifold {
            Manifold::Circle => self.n,
            Manifold::Torus2 => self.n * self.n,
            Manifold::Sphere2 => self.n * self.bands,
        }
    }

    pub fn cell<S: Real>(&self, p: &Point<S>) -> usize {
        let idx = |x: f64, n: usize| ((wrap_unit(x) * n as f64) as usize).min(n - 1);
        match *p {
            Point::Circle(x) => idx(x.as_f64(), self.n),
            Point::Torus([x, y]) => idx(x.as_f64(), self.n) * self.n + idx(y.as_f64(), self.n),
            Point::Sphere([x, y, z]) => {
                let rho = sphere_radius::<f64>();
                let lon = y.as_f64().atan2(x.as_f64()) / std::f64::consts::TAU;
                let h = ((z.as_f64() / rho + 1.0) * 0.5).clamp(0.0, 1.0);
                let band = ((h * self.bands as f64) as usize).min(self.bands - 1);
                band * self.n + idx(lon, self.n)
            }
        }
    }
}

/// Key of the fine cell of side `res` used to prune near-duplicate points.
fn fine_key<S: Real>(p: &Point<S>, res: f64) -> [i64; 3] {
    let q = |x: S| (x.as_f64() / res).floor() as i64;
    match *p {
        Point::Circle(x) => [q(x), 0, 0],
        Point::Torus([x, y]) => [q(x), q(y), 0],
        Point::Sphere([x, y, z]) => [q(x), q(y), q(z)],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub dense: bool,
    /// Orbit points generated, duplicates included.
    pub steps_used: u64,
    pub cells_hit: usize,
    pub cells_total: usize,
    pub eps: f64,
}

/// Grows the forward orbit of `x` breadth first, dropping points within a
/// fine cell of side `ε/4` already visited, until every cell of the ε-grid
/// is hit or `budget` points have been generated. A single generator gives
/// a plain sequence, which is followed without pruning.
pub fn check_minimality_density<S: Real>(
    sys: &IfsSystem<S>,
    x: &Point<S>,
    eps: f64,
    budget: u64,
) -> Result<DensityReport> {
    let grid = EpsGrid::new(sys.manifold(), eps)?;
    let letters: Vec<Letter> = sys.alphabet(false);
    let mut hit = vec![false; grid.cells()];
    let mut n_hit = 0;
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([*x]);
    let mut mark = |p: &Point<S>, hit: &mut Vec<bool>| {
        let c = grid.cell(p);
        if !hit[c] {
            hit[c] = true;
            n_hit += 1;
        }
        n_hit
    };
    seen.insert(fine_key(x, eps / 4.0));
    mark(x, &mut hit);
    let mut steps = 0u64;
    let total = grid.cells();
    'grow: while let Some(p) = queue.pop_front() {
        for &l in &letters {
            if steps >= budget {
                break 'grow;
            }
            let q = sys.apply_letter(l, &p);
            steps += 1;
            if letters.len() == 1 || seen.insert(fine_key(&q, eps / 4.0)) {
                if mark(&q, &mut hit) == total {
                    break 'grow;
                }
                queue.push_back(q);
            }
        }
    }
    let cells_hit = hit.iter().filter(|&&h| h).count();
    Ok(DensityReport { dense: cells_hit == total, steps_used: steps, cells_hit, cells_total: total, eps })
}

/// Monte Carlo estimate of `m(B ∩ B(p,κ)) / m(B(p,κ))` for the set `B`
/// given by `member`.
pub fn density_ratio<S: Real, F>(member: F, p: &Point<S>, kappa: S, n: usize, seed: u64) -> Result<Measure>
where
    F: Fn(&Point<S>) -> bool,
{
    if n == 0 {
        bail!(Input, "at least one sample is required");
    }
    let ball = Ball::new(*p, kappa)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..n).filter(|_| member(&sample_in_ball(&ball, &mut rng))).count();
    let f = hits as f64 / n as f64;
    Ok(Measure { value: f, std_err: (f * (1.0 - f) / n as f64).sqrt() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coverage {
    /// Fraction of ε-grid cells hit after each depth, starting at depth 0.
    pub coverage: Vec<f64>,
    pub cells_total: usize,
    /// Distinct points kept over all depths.
    pub points: usize,
    /// Stopped because no new points appeared.
    pub saturated: bool,
    /// Stopped because `max_points` was reached.
    pub truncated: bool,
}

impl Coverage {
    pub fn last(&self) -> f64 {
        *self.coverage.last().unwrap_or(&0.0)
    }
}

/// Coverage of the ε-grid by `U₀ ∪ F(U₀) ∪ F²(U₀) ∪ …`, where `U₀` is
/// replaced by an `ε/4`-net and each depth pushes the new points of the
/// previous depth through every generator.
pub fn invariant_hull_coverage<S: Real>(
    sys: &IfsSystem<S>,
    u0: &Ball<S>,
    eps: f64,
    max_depth: usize,
    max_points: usize,
) -> Result<Coverage> {
    if u0.manifold() != sys.manifold() {
        bail!(Domain, "ball on {} for a system on {}", u0.manifold(), sys.manifold());
    }
    let grid = EpsGrid::new(sys.manifold(), eps)?;
    let res = eps / 4.0;
    let letters = sys.alphabet(false);
    let mut hit = vec![false; grid.cells()];
    let mut n_hit = 0usize;
    let mut seen = HashSet::new();
    let mut frontier = Vec::new();
    let start = if u0.radius.as_f64() > res { net(&u0.center, u0.radius, S::lit(res))? } else { vec![u0.center] };
    let mut admit = |q: Point<S>, out: &mut Vec<Point<S>>, hit: &mut Vec<bool>| {
        if seen.insert(fine_key(&q, res)) {
            let c = grid.cell(&q);
            if !hit[c] {
                hit[c] = true;
                n_hit += 1;
            }
            out.push(q);
        }
        n_hit
    };
    let mut covered = 0;
    for p in start {
        covered = admit(p, &mut frontier, &mut hit);
    }
    let total = grid.cells() as f64;
    let mut coverage = vec![covered as f64 / total];
    let mut points = frontier.len();
    let (mut saturated, mut truncated) = (false, false);
    for _ in 0..max_depth {
        if covered == grid.cells() {
            break;
        }
        let images: Vec<Point<S>> =
            frontier.par_iter().flat_map_iter(|p| letters.iter().map(move |&l| sys.apply_letter(l, p))).collect();
        let mut next = Vec::new();
        for q in images {
            covered = admit(q, &mut next, &mut hit);
        }
        coverage.push(covered as f64 / total);
        points += next.len();
        if next.is_empty() {
            saturated = true;
            break;
        }
        if points >= max_points {
            truncated = true;
            break;
        }
        frontier = next;
    }
    Ok(Coverage { coverage, cells_total: grid.cells(), points, saturated, truncated })
}
