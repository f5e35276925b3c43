//! The hyperspace of continua: representations of closed balls and their
//! images, the Hausdorff metric, and induced maps `f̂(A) = f(A)`.
//!
//! A continuum is either an exact closed geodesic ball (on the circle, an
//! arc) or a finite net together with the resolution `δ` to which it covers
//! the set it stands for. Exact balls survive isometries and pure-rotation
//! steps; anything else is pushed forward pointwise as a net.

mod hausdorff;
mod index;
mod nearest;

pub use hausdorff::{arc_hausdorff, directed_hausdorff, hausdorff, hausdorff_points};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::geom::{check_radius, dist, net, Manifold, Point};
use crate::ifs::{IfsSystem, Word};
use crate::scalar::Real;
use index::PointIndex;

#[derive(Debug, Clone, PartialEq)]
pub enum Continuum<S> {
    /// Closed geodesic ball; an arc when the manifold is the circle.
    Ball { center: Point<S>, radius: S },
    /// Finite set covering the represented continuum to within `delta`.
    Net { manifold: Manifold, points: Vec<Point<S>>, delta: S },
}

impl<S: Real> Continuum<S> {
    pub fn ball(center: Point<S>, radius: S) -> Result<Self> {
        check_radius(center.manifold(), radius)?;
        if center.manifold() == Manifold::Circle && radius >= S::lit(0.5) {
            bail!(Domain, "arc radius must be below 1/2");
        }
        Ok(Continuum::Ball { center, radius })
    }

    /// Builds a net continuum; the points must be nonempty and share a manifold.
    pub fn net(points: Vec<Point<S>>, delta: S) -> Result<Self> {
        let Some(first) = points.first() else {
            bail!(Input, "a net needs at least one point");
        };
        let manifold = first.manifold();
        if points.iter().any(|p| p.manifold() != manifold) {
            bail!(Domain, "net mixes points of different manifolds");
        }
        if !(delta >= S::zero()) {
            bail!(Domain, "net resolution must be nonnegative");
        }
        Ok(Continuum::Net { manifold, points, delta })
    }

    pub fn manifold(&self) -> Manifold {
        match self {
            Continuum::Ball { center, .. } => center.manifold(),
            Continuum::Net { manifold, .. } => *manifold,
        }
    }

    /// Covering resolution: zero for exact balls.
    pub fn resolution(&self) -> S {
        match self {
            Continuum::Ball { .. } => S::zero(),
            Continuum::Net { delta, .. } => *delta,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Continuum::Ball { .. })
    }

    pub fn points(&self) -> &[Point<S>] {
        match self {
            Continuum::Ball { center, .. } => std::slice::from_ref(center),
            Continuum::Net { points, .. } => points,
        }
    }

    /// Discretises a ball at resolution `delta`; nets are returned unchanged.
    pub fn to_net(&self, delta: S) -> Result<Self> {
        match self {
            Continuum::Ball { center, radius } => {
                let d = delta.min(*radius * S::lit(0.5));
                Continuum::net(net(center, *radius, d)?, d)
            }
            Continuum::Net { .. } => Ok(self.clone()),
        }
    }

    /// Whether the δ-neighbourhood graph of the net is connected (balls are).
    pub fn is_chain_connected(&self) -> bool {
        let Continuum::Net { points, delta, .. } = self else {
            return true;
        };
        let hop = (delta.as_f64() * 2.0).max(1e-15);
        let idx = PointIndex::new(points, hop);
        let mut seen = vec![false; points.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in idx.within(&points[i], hop) {
                let j = j as usize;
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn to_json(&self) -> ContinuumJson {
        match self {
            Continuum::Ball { center, radius } => ContinuumJson {
                manifold: center.manifold(),
                variant: if center.manifold() == Manifold::Circle { "arc" } else { "ball" }.to_string(),
                center: Some(center.coords_f64()),
                radius: Some(radius.as_f64()),
                dim: None,
                points: None,
                delta: None,
            },
            Continuum::Net { manifold, points, delta } => ContinuumJson {
                manifold: *manifold,
                variant: "net".to_string(),
                center: None,
                radius: None,
                dim: Some(points[0].coords().len()),
                points: Some(points.iter().flat_map(|p| p.coords_f64()).collect()),
                delta: Some(delta.as_f64()),
            },
        }
    }

    pub fn from_json(j: &ContinuumJson) -> Result<Self> {
        let m = j.manifold;
        match j.variant.as_str() {
            "arc" | "ball" => {
                let (Some(c), Some(r)) = (&j.center, j.radius) else {
                    bail!(Input, "ball continuum needs center and radius");
                };
                let c: Vec<S> = c.iter().map(|&x| S::lit(x)).collect();
                Continuum::ball(Point::from_coords(m, &c)?, S::lit(r))
            }
            "net" => {
                let (Some(dim), Some(pts), Some(delta)) = (j.dim, &j.points, j.delta) else {
                    bail!(Input, "net continuum needs dim, points and delta");
                };
                if dim == 0 || pts.len() % dim != 0 {
                    bail!(Input, "{} coordinates do not split into points of dimension {dim}", pts.len());
                }
                let points = pts
                    .chunks(dim)
                    .map(|c| Point::from_coords(m, &c.iter().map(|&x| S::lit(x)).collect::<Vec<_>>()))
                    .collect::<Result<Vec<_>>>()?;
                Continuum::net(points, S::lit(delta))
            }
            v => bail!(Input, "unknown continuum variant {v:?}"),
        }
    }
}

/// Serialised form of a [`Continuum`]; net points are a row-major list of
/// coordinates with `dim` entries per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumJson {
    pub manifold: Manifold,
    pub variant: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub center: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub points: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
}

/// `B̄(x, r)`: an exact arc on the circle, a `δ`-net elsewhere.
pub fn closure_ball<S: Real>(x: &Point<S>, r: S, delta: S) -> Result<Continuum<S>> {
    match x.manifold() {
        Manifold::Circle => Continuum::ball(*x, r),
        _ => Continuum::net(net(x, r, delta)?, delta),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InducedOptions<S> {
    /// Target covering resolution of a net image; defaults to `radius / 20`.
    pub delta_cap: Option<S>,
    /// Upper bound on the size of a source net during refinement.
    pub max_points: usize,
    /// Skip the exact paths and always push a net forward.
    pub force_net: bool,
}

impl<S: Real> Default for InducedOptions<S> {
    fn default() -> Self {
        InducedOptions { delta_cap: None, max_points: 200_000, force_net: false }
    }
}

/// Image of a continuum under an induced word together with how it was
/// obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct Induced<S> {
    pub image: Continuum<S>,
    /// The image is an exact ball.
    pub exact: bool,
    /// An exact path was attempted but a step left its rotation domain.
    pub fell_back: bool,
    /// Largest observed local expansion of the word on the source net.
    pub expansion: f64,
    /// The requested resolution could not be reached within `max_points`.
    pub under_resolved: bool,
}

/// `ŵ(A) = w(A)`.
pub fn induced_apply<S: Real>(
    sys: &IfsSystem<S>,
    w: &Word,
    a: &Continuum<S>,
    opts: &InducedOptions<S>,
) -> Result<Induced<S>> {
    if a.manifold() != sys.manifold() {
        bail!(Domain, "continuum on {} given to a system on {}", a.manifold(), sys.manifold());
    }
    sys.check_word(w)?;
    let exact = |image| Induced { image, exact: true, fell_back: false, expansion: 1.0, under_resolved: false };
    if w.is_empty() {
        return Ok(Induced { exact: a.is_exact(), ..exact(a.clone()) });
    }
    let mut fell_back = false;
    if let (Continuum::Ball { center, radius }, false) = (a, opts.force_net) {
        if w.letters().iter().all(|&l| sys.letter_is_isometry(l)) {
            let c = w.time_order().fold(*center, |p, l| sys.apply_letter(l, &p));
            return Ok(exact(Continuum::Ball { center: c, radius: *radius }));
        }
        if let Point::Circle(x) = center {
            match arc_fast_path(sys, w, *x, *radius) {
                Some(c) => return Ok(exact(Continuum::Ball { center: Point::circle(c), radius: *radius })),
                None => fell_back = true,
            }
        }
    }
    let isometric = w.letters().iter().all(|&l| sys.letter_is_isometry(l));
    let push = |pts: &[Point<S>]| -> Vec<Point<S>> {
        pts.par_iter().map(|p| w.time_order().fold(*p, |q, l| sys.apply_letter(l, &q))).collect()
    };
    match a {
        Continuum::Ball { center, radius } => {
            let cap = opts.delta_cap.unwrap_or(*radius / S::lit(20.0)).min(*radius * S::lit(0.5));
            let mut delta_src = cap;
            loop {
                let src = net(center, *radius, delta_src)?;
                let img = push(&src);
                let expansion = if isometric { 1.0 } else { local_expansion(&src, &img, delta_src.as_f64()) };
                let delta_out = if isometric {
                    delta_src.as_f64()
                } else {
                    // finite differences at the net scale; pad for curvature
                    1.05 * expansion * delta_src.as_f64()
                };
                let next = S::lit(0.9 * cap.as_f64() / delta_out.max(1e-300)) * delta_src;
                let too_big = estimated_net_size(center.manifold(), radius.as_f64(), next.as_f64()) > opts.max_points;
                if delta_out <= cap.as_f64() || too_big {
                    return Ok(Induced {
                        image: Continuum::net(img, S::lit(delta_out))?,
                        exact: false,
                        fell_back,
                        expansion,
                        under_resolved: delta_out > cap.as_f64(),
                    });
                }
                delta_src = next;
            }
        }
        Continuum::Net { points, delta, .. } => {
            let img = push(points);
            let expansion = if isometric { 1.0 } else { local_expansion(points, &img, delta.as_f64()) };
            let delta_out = if isometric { delta.as_f64() } else { 1.05 * expansion * delta.as_f64() };
            let under_resolved = opts.delta_cap.is_some_and(|c| delta_out > c.as_f64());
            Ok(Induced {
                image: Continuum::net(img, S::lit(delta_out))?,
                exact: false,
                fell_back,
                expansion,
                under_resolved,
            })
        }
    }
}

/// Centre of the image arc if every step keeps the arc inside the acting
/// letter's pure-rotation domain.
fn arc_fast_path<S: Real>(sys: &IfsSystem<S>, w: &Word, x: S, r: S) -> Option<S> {
    let mut c = x;
    for l in w.time_order() {
        let dom = sys.letter_rotation_domain(l)?;
        if !dom.arc.contains_ball(c, r) {
            return None;
        }
        c = crate::scalar::wrap_unit(c + dom.shift);
    }
    Some(c)
}

fn estimated_net_size(m: Manifold, r: f64, delta: f64) -> usize {
    let q = r / delta.max(1e-300);
    match m {
        Manifold::Circle => (2.0 * q + 1.0) as usize,
        _ => (std::f64::consts::PI * q * q + 2.0 * std::f64::consts::PI * q) as usize,
    }
}

/// Largest ratio `d(f p, f q) / d(p, q)` over neighbouring net points.
fn local_expansion<S: Real>(src: &[Point<S>], img: &[Point<S>], delta: f64) -> f64 {
    if src.len() < 2 {
        return 1.0;
    }
    let reach = 2.5 * delta;
    let idx = PointIndex::new(src, reach);
    (0..src.len())
        .into_par_iter()
        .map(|i| {
            idx.within(&src[i], reach)
                .into_iter()
                .filter(|&j| j as usize > i)
                .map(|j| {
                    let j = j as usize;
                    let d0 = dist(&src[i], &src[j]).expect("same manifold").as_f64();
                    let d1 = dist(&img[i], &img[j]).expect("same manifold").as_f64();
                    if d0 > 0.0 {
                        d1 / d0
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}
