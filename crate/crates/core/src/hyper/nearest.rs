//! Exact nearest-neighbour distances over a finite point set.
//!
//! Points are embedded in a Euclidean space whose distance is monotone in
//! the geodesic one near the minimum: sorted positions on the circle, the
//! nine periodic images on the torus, chords on the sphere. The k-d tree
//! only proposes candidates; the returned value is always `dist` to the
//! best of them, so results agree with brute force.

use kiddo::{KdTree, SquaredEuclidean};

use crate::geom::{dist_unchecked, Point};
use crate::scalar::Real;

/// Candidates examined per query; covers ties and rounding in the embedding.
const CANDIDATES: usize = 4;
/// Below this size a linear scan is faster than building a tree.
const SCAN_BELOW: usize = 48;

// Generic rotations keep lattice nets from putting many points on one
// coordinate value, which the tree's buckets cannot split.
const TURN2: [[f64; 2]; 2] = [[0.8775825618903728, -0.479425538604203], [0.479425538604203, 0.8775825618903728]];
const TURN3: [[f64; 3]; 3] = [
    [0.8034005696020168, -0.40182138823093544, 0.4394167688235383],
    [0.5169039816346329, 0.8369663260114285, -0.1797154497899226],
    [-0.2955635270689164, 0.37151977212941845, 0.8801222985378151],
];

enum Search {
    Scan,
    /// Circle coordinates sorted ascending, with the original indices.
    Sorted(Vec<(f64, u32)>),
    Plane(KdTree<f64, 2>),
    Space(KdTree<f64, 3>),
}

pub(crate) struct Nearest<'a, S> {
    points: &'a [Point<S>],
    search: Search,
}

fn turn<const K: usize>(m: &[[f64; K]; K], v: [f64; K]) -> [f64; K] {
    std::array::from_fn(|i| (0..K).map(|j| m[i][j] * v[j]).sum())
}

/// Indices of the first occurrence of every distinct point.
fn distinct<S: Real>(points: &[Point<S>]) -> Vec<u32> {
    let mut keyed: Vec<(Vec<u64>, u32)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.coords_f64().iter().map(|c| c.to_bits()).collect(), i as u32))
        .collect();
    keyed.sort();
    keyed.dedup_by(|a, b| a.0 == b.0);
    let mut idx: Vec<u32> = keyed.into_iter().map(|(_, i)| i).collect();
    idx.sort_unstable();
    idx
}

impl<'a, S: Real> Nearest<'a, S> {
    pub fn new(points: &'a [Point<S>]) -> Self {
        if points.len() < SCAN_BELOW {
            return Nearest { points, search: Search::Scan };
        }
        let keep = distinct(points);
        let search = match points[0] {
            Point::Circle(_) => {
                let mut v: Vec<(f64, u32)> = keep.iter().map(|&i| (points[i as usize].coords_f64()[0], i)).collect();
                v.sort_by(|a, b| a.0.total_cmp(&b.0));
                Search::Sorted(v)
            }
            Point::Torus(_) => {
                let mut tree = KdTree::with_capacity(9 * keep.len());
                for &i in &keep {
                    let c = points[i as usize].coords_f64();
                    for dx in [-1.0, 0.0, 1.0] {
                        for dy in [-1.0, 0.0, 1.0] {
                            tree.add(&turn(&TURN2, [c[0] + dx, c[1] + dy]), i as u64);
                        }
                    }
                }
                Search::Plane(tree)
            }
            Point::Sphere(_) => {
                let mut tree = KdTree::with_capacity(keep.len());
                for &i in &keep {
                    let c = points[i as usize].coords_f64();
                    tree.add(&turn(&TURN3, [c[0], c[1], c[2]]), i as u64);
                }
                Search::Space(tree)
            }
        };
        Nearest { points, search }
    }

    fn d(&self, q: &Point<S>, i: u64) -> f64 {
        dist_unchecked(q, &self.points[i as usize]).as_f64()
    }

    /// Distance from `q` to the nearest point of the set (infinite if empty).
    pub fn distance(&self, q: &Point<S>) -> f64 {
        match &self.search {
            Search::Scan => self.points.iter().map(|p| dist_unchecked(q, p).as_f64()).fold(f64::INFINITY, f64::min),
            Search::Sorted(v) => {
                let x = q.coords_f64()[0];
                let n = v.len();
                let at = v.partition_point(|e| e.0 < x);
                // neighbours on both sides, wrapping around the circle
                (0..CANDIDATES)
                    .map(|k| v[(at + n + k - CANDIDATES / 2) % n].1)
                    .map(|i| self.d(q, i as u64))
                    .fold(f64::INFINITY, f64::min)
            }
            Search::Plane(tree) => {
                let c = q.coords_f64();
                let hits = tree.nearest_n::<SquaredEuclidean>(&turn(&TURN2, [c[0], c[1]]), CANDIDATES);
                hits.iter().map(|h| self.d(q, h.item)).fold(f64::INFINITY, f64::min)
            }
            Search::Space(tree) => {
                let c = q.coords_f64();
                let hits = tree.nearest_n::<SquaredEuclidean>(&turn(&TURN3, [c[0], c[1], c[2]]), CANDIDATES);
                hits.iter().map(|h| self.d(q, h.item)).fold(f64::INFINITY, f64::min)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{dist, net, sample_uniform, Manifold};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn rotations_are_orthogonal() {
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| TURN3[i][k] * TURN3[j][k]).sum();
                assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
        let dot: f64 = TURN2[0][0] * TURN2[1][0] + TURN2[0][1] * TURN2[1][1];
        assert!(dot.abs() < 1e-15);
    }

    #[test]
    fn agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in [Manifold::Circle, Manifold::Torus2, Manifold::Sphere2] {
            for n in [5usize, 60, 2000] {
                let mut pts: Vec<Point<f64>> = (0..n).map(|_| sample_uniform(m, &mut rng)).collect();
                // lattice nets and repeated points must not upset the tree
                pts.extend(net(&pts[0], 0.2, 0.004).unwrap());
                pts.extend(std::iter::repeat_n(pts[1], 100));
                let idx = Nearest::new(&pts);
                for _ in 0..300 {
                    let q: Point<f64> = sample_uniform(m, &mut rng);
                    let brute = pts.iter().map(|p| dist(&q, p).unwrap()).fold(f64::INFINITY, f64::min);
                    assert_eq!(idx.distance(&q), brute, "{m} n={n}");
                }
            }
        }
    }
}
