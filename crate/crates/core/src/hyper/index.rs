//! Uniform bucket grid over chart coordinates for fixed-radius queries.
//!
//! Circle and torus cells live in the wrapped chart, sphere cells in the
//! ambient 3-space; in both cases a point `k` rings of cells away is at
//! geodesic distance at least `(k - 1) * cell` from the query.

use std::collections::HashMap;

use crate::geom::{dist, sphere_radius, Manifold, Point};
use crate::scalar::Real;

type Key = [i64; 3];

pub(crate) struct PointIndex<'a, S> {
    points: &'a [Point<S>],
    manifold: Manifold,
    cell: f64,
    wrap: i64,
    cells: HashMap<Key, Vec<u32>>,
}

impl<'a, S: Real> PointIndex<'a, S> {
    pub fn new(points: &'a [Point<S>], cell: f64) -> Self {
        let manifold = points.first().map(|p| p.manifold()).unwrap_or(Manifold::Circle);
        let (cell, wrap) = match manifold {
            Manifold::Circle | Manifold::Torus2 => {
                let n = (1.0 / cell).floor().clamp(1.0, 1e6) as i64;
                (1.0 / n as f64, n)
            }
            Manifold::Sphere2 => (cell.max(1e-9), 0),
        };
        let mut idx = PointIndex { points, manifold, cell, wrap, cells: HashMap::new() };
        for (i, p) in points.iter().enumerate() {
            let k = idx.key(p);
            idx.cells.entry(k).or_default().push(i as u32);
        }
        idx
    }

    fn key(&self, p: &Point<S>) -> Key {
        let f = |x: S| (x.as_f64() / self.cell).floor() as i64;
        match *p {
            Point::Circle(x) => [f(x).rem_euclid(self.wrap), 0, 0],
            Point::Torus([x, y]) => [f(x).rem_euclid(self.wrap), f(y).rem_euclid(self.wrap), 0],
            Point::Sphere([x, y, z]) => [f(x), f(y), f(z)],
        }
    }

    fn grid_dims(&self) -> usize {
        match self.manifold {
            Manifold::Circle => 1,
            Manifold::Torus2 => 2,
            Manifold::Sphere2 => 3,
        }
    }

    fn max_ring(&self) -> i64 {
        match self.manifold {
            Manifold::Circle | Manifold::Torus2 => self.wrap / 2 + 1,
            Manifold::Sphere2 => (2.0 * sphere_radius::<f64>() / self.cell).ceil() as i64 + 1,
        }
    }

    fn visit_ring<F: FnMut(u32)>(&self, center: Key, k: i64, mut f: F) {
        let dims = self.grid_dims();
        let norm = |c: i64| if self.wrap > 0 { c.rem_euclid(self.wrap) } else { c };
        let mut visit = |off: Key| {
            let key = [
                norm(center[0] + off[0]),
                if dims > 1 { norm(center[1] + off[1]) } else { 0 },
                if dims > 2 { center[2] + off[2] } else { 0 },
            ];
            if let Some(v) = self.cells.get(&key) {
                v.iter().for_each(|&i| f(i));
            }
        };
        let r = -k..=k;
        match dims {
            1 => {
                if k == 0 {
                    visit([0, 0, 0]);
                } else {
                    visit([-k, 0, 0]);
                    visit([k, 0, 0]);
                }
            }
            2 => {
                for a in r.clone() {
                    for b in r.clone() {
                        if a.abs().max(b.abs()) == k {
                            visit([a, b, 0]);
                        }
                    }
                }
            }
            _ => {
                for a in r.clone() {
                    for b in r.clone() {
                        for c in r.clone() {
                            if a.abs().max(b.abs()).max(c.abs()) == k {
                                visit([a, b, c]);
                            }
                        }
                    }
                }
            }
        }
    }

    fn ring_is_cheaper_than_scan(&self, k: i64) -> bool {
        let cells = (2 * k + 1).pow(self.grid_dims() as u32) as usize;
        cells < self.points.len() && k <= self.max_ring()
    }

    /// Indices of points within `radius` of `q`.
    pub fn within(&self, q: &Point<S>, radius: f64) -> Vec<u32> {
        let center = self.key(q);
        let rings = (radius / self.cell).ceil() as i64 + 1;
        let mut out = Vec::new();
        if !self.ring_is_cheaper_than_scan(rings) {
            for (i, p) in self.points.iter().enumerate() {
                if dist(q, p).expect("same manifold").as_f64() <= radius {
                    out.push(i as u32);
                }
            }
            return out;
        }
        for k in 0..=rings {
            self.visit_ring(center, k, |i| {
                if dist(q, &self.points[i as usize]).expect("same manifold").as_f64() <= radius {
                    out.push(i);
                }
            });
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::sample_uniform;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn within_agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in [Manifold::Circle, Manifold::Torus2, Manifold::Sphere2] {
            for &(n, cell) in &[(50usize, 0.01), (2000, 0.02), (300, 0.3)] {
                let pts: Vec<Point<f64>> = (0..n).map(|_| sample_uniform(m, &mut rng)).collect();
                let idx = PointIndex::new(&pts, cell);
                for _ in 0..200 {
                    let q: Point<f64> = sample_uniform(m, &mut rng);
                    let near: Vec<u32> =
                        (0..n as u32).filter(|&i| dist(&q, &pts[i as usize]).unwrap() <= 0.05).collect();
                    assert_eq!(idx.within(&q, 0.05), near);
                }
            }
        }
    }
}
