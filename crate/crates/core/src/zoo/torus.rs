//! An irrational translation of the torus conjugated by a homeomorphism that
//! is affine near a base point.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::criteria::WitnessResult;
use crate::error::{bail, Result};
use crate::geom::{dist, Ball, Manifold, Point};
use crate::hyper::{closure_ball, hausdorff_points, induced_apply, Continuum, InducedOptions};
use crate::ifs::{IfsSystem, Letter, Map, Word};
use crate::scalar::{wrap_signed, Real};

pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TorusConfig {
    /// Translation vector.
    pub gamma: [f64; 2],
    /// Centre of the affine region.
    pub base: [f64; 2],
    /// Linear part of the conjugacy on the affine region.
    pub linear: Mat2,
    /// Radius of the affine region; the blend to the identity ends at twice this.
    pub affine_radius: f64,
}

impl Default for TorusConfig {
    fn default() -> Self {
        TorusConfig {
            gamma: [std::f64::consts::FRAC_1_SQRT_2, 3f64.sqrt() - 1.0],
            base: [0.5, 0.5],
            linear: [[1.0, 0.2], [0.0, 1.0]],
            affine_radius: 0.05,
        }
    }
}

fn mat_vec(m: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// Spectral norm of a 2×2 matrix.
pub fn spectral_norm(m: &Mat2) -> f64 {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let s = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    (0.5 * (s + (s * s - 4.0 * det * det).max(0.0).sqrt())).sqrt()
}

fn minus_identity(m: &Mat2) -> Mat2 {
    [[m[0][0] - 1.0, m[0][1]], [m[1][0], m[1][1] - 1.0]]
}

/// Radial cutoff: 1 up to `rho`, 0 from `2 rho`, smoothstep in between.
fn profile(s: f64, rho: f64) -> (f64, f64) {
    if s <= rho {
        return (1.0, 0.0);
    }
    if s >= 2.0 * rho {
        return (0.0, 0.0);
    }
    let t = (s - rho) / rho;
    (1.0 - t * t * (3.0 - 2.0 * t), -6.0 * t * (1.0 - t) / rho)
}

/// Largest slope of [`profile`].
fn profile_slope(rho: f64) -> f64 {
    1.5 / rho
}

/// The conjugacy `h(z) = z + φ(|v|)(A − I)v` with `v` the minimal-image
/// offset of `z` from the base point.
#[derive(Debug, Clone, Copy)]
pub struct Conjugacy {
    base: [f64; 2],
    linear: Mat2,
    shear: Mat2,
    rho: f64,
}

impl Conjugacy {
    pub fn new(cfg: &TorusConfig) -> Result<Self> {
        let m = cfg.linear;
        if (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs() < 1e-12 {
            bail!(Construction, "the linear part is singular");
        }
        if !(cfg.affine_radius > 0.0 && cfg.affine_radius < 0.25) {
            bail!(Construction, "affine radius {} must lie in (0, 1/4)", cfg.affine_radius);
        }
        let shear = minus_identity(&m);
        let bound = spectral_norm(&shear) * (1.0 + profile_slope(cfg.affine_radius) * 2.0 * cfg.affine_radius);
        if bound >= 1.0 {
            bail!(Construction, "invertibility bound |A - I| (1 + max|phi'| 2 rho) = {bound} is not below 1");
        }
        Ok(Conjugacy { base: cfg.base, linear: m, shear, rho: cfg.affine_radius })
    }

    fn offset(&self, z: [f64; 2]) -> [f64; 2] {
        [wrap_signed(z[0] - self.base[0]), wrap_signed(z[1] - self.base[1])]
    }

    /// `v + φ(|v|)(A − I)v` in the plane.
    fn planar(&self, v: [f64; 2]) -> [f64; 2] {
        let (phi, _) = profile(v[0].hypot(v[1]), self.rho);
        let s = mat_vec(&self.shear, v);
        [v[0] + phi * s[0], v[1] + phi * s[1]]
    }

    fn planar_jacobian(&self, v: [f64; 2]) -> Mat2 {
        let n = v[0].hypot(v[1]);
        let (phi, dphi) = profile(n, self.rho);
        let s = mat_vec(&self.shear, v);
        let grad = if n > 0.0 { [dphi * v[0] / n, dphi * v[1] / n] } else { [0.0, 0.0] };
        let mut j = [[0.0; 2]; 2];
        for (r, row) in j.iter_mut().enumerate() {
            for (c, e) in row.iter_mut().enumerate() {
                *e = f64::from(u8::from(r == c)) + phi * self.shear[r][c] + s[r] * grad[c];
            }
        }
        j
    }

    pub fn apply(&self, z: [f64; 2]) -> [f64; 2] {
        let w = self.planar(self.offset(z));
        [self.base[0] + w[0], self.base[1] + w[1]]
    }

    pub fn inverse(&self, y: [f64; 2]) -> [f64; 2] {
        let u = self.offset(y);
        if u[0].hypot(u[1]) >= 2.0 * self.rho {
            // h fixes the complement of the blend disc and maps the disc onto itself
            return y;
        }
        let mut v = u;
        for _ in 0..50 {
            let f = self.planar(v);
            let r = [f[0] - u[0], f[1] - u[1]];
            if r[0].hypot(r[1]) < 1e-16 {
                break;
            }
            let j = self.planar_jacobian(v);
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let step = [(j[1][1] * r[0] - j[0][1] * r[1]) / det, (-j[1][0] * r[0] + j[0][0] * r[1]) / det];
            let next = [v[0] - step[0], v[1] - step[1]];
            // fall back to the contraction v = u - φ(A - I)v if Newton overshoots
            v = if self.residual(next, u) < self.residual(v, u) {
                next
            } else {
                let f = self.planar(v);
                [u[0] - (f[0] - v[0]), u[1] - (f[1] - v[1])]
            };
        }
        [self.base[0] + v[0], self.base[1] + v[1]]
    }

    fn residual(&self, v: [f64; 2], u: [f64; 2]) -> f64 {
        let f = self.planar(v);
        (f[0] - u[0]).hypot(f[1] - u[1])
    }

    pub fn linear(&self) -> Mat2 {
        self.linear
    }

    pub fn affine_radius(&self) -> f64 {
        self.rho
    }

    pub fn base(&self) -> [f64; 2] {
        self.base
    }
}

fn to_pair<S: Real>(p: &Point<S>) -> [f64; 2] {
    let c = p.coords_f64();
    [c[0], c[1]]
}

fn from_pair<S: Real>(z: [f64; 2]) -> Point<S> {
    Point::torus(S::lit(z[0]), S::lit(z[1]))
}

/// `h ∘ R_{nγ} ∘ h⁻¹`.
#[derive(Debug, Clone, Copy)]
pub struct ConjugatedTranslation {
    h: Conjugacy,
    shift: [f64; 2],
}

impl ConjugatedTranslation {
    pub fn new(h: Conjugacy, gamma: [f64; 2], power: f64) -> Self {
        ConjugatedTranslation { h, shift: [gamma[0] * power, gamma[1] * power] }
    }

    fn eval(&self, z: [f64; 2], sign: f64) -> [f64; 2] {
        let w = self.h.inverse(z);
        self.h.apply([w[0] + sign * self.shift[0], w[1] + sign * self.shift[1]])
    }
}

impl<S: Real> Map<S> for ConjugatedTranslation {
    fn name(&self) -> String {
        "hRh^-1".to_string()
    }

    fn apply(&self, p: &Point<S>) -> Point<S> {
        match p {
            Point::Torus(_) => from_pair(self.eval(to_pair(p), 1.0)),
            other => *other,
        }
    }

    fn apply_inverse(&self, p: &Point<S>) -> Option<Point<S>> {
        match p {
            Point::Torus(_) => Some(from_pair(self.eval(to_pair(p), -1.0))),
            _ => None,
        }
    }

    fn has_inverse(&self) -> bool {
        true
    }

    fn affine_region(&self) -> Option<Ball<S>> {
        Ball::new(from_pair(self.h.base), S::lit(self.h.rho)).ok()
    }
}

/// The built example: the system plus the conjugacy it was made from.
#[derive(Clone)]
pub struct TorusExample<S> {
    pub config: TorusConfig,
    pub h: Conjugacy,
    pub system: IfsSystem<S>,
}

impl<S: Real> std::fmt::Debug for TorusExample<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TorusExample").field("config", &self.config).field("system", &self.system).finish()
    }
}

impl TorusConfig {
    pub fn build<S: Real>(&self) -> Result<TorusExample<S>> {
        let h = Conjugacy::new(self)?;
        let g: Arc<dyn Map<S>> = Arc::new(ConjugatedTranslation::new(h, self.gamma, 1.0));
        let system = IfsSystem::new(Manifold::Torus2, "torus example", vec![g])?;
        Ok(TorusExample { config: *self, h, system })
    }
}

impl<S: Real> TorusExample<S> {
    pub fn h(&self, p: &Point<S>) -> Point<S> {
        from_pair(self.h.apply(to_pair(p)))
    }

    pub fn h_inv(&self, p: &Point<S>) -> Point<S> {
        from_pair(self.h.inverse(to_pair(p)))
    }

    /// `h R_{nγ} h⁻¹ (p)`, equal to the `n`-th power of the generator.
    pub fn power(&self, n: u64, p: &Point<S>) -> Point<S> {
        from_pair(ConjugatedTranslation::new(self.h, self.config.gamma, n as f64).eval(to_pair(p), 1.0))
    }

    pub fn affine_region(&self) -> Ball<S> {
        Ball { center: from_pair(self.h.base), radius: S::lit(self.h.rho) }
    }
}

/// Result of a return-index scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnIndex {
    pub n: Option<u64>,
    pub certified_distance: f64,
    pub delta_total: f64,
    /// Smallest centre distance seen during the scan.
    pub best_distance: f64,
    /// Every set along the way stayed in the affine region.
    pub affine: bool,
    pub scanned: u64,
}

/// Scans `n = 1..=budget` for an index with
/// `d_H(h R^n h⁻¹ (B̄(z,r)), B̄(y,r)) < r/θ`, certified on nets with the
/// resolutions added.
///
/// On the affine region the image of a ball is the ball about
/// `h(R^n h⁻¹ z)`, so candidates are screened by that centre and then
/// certified by pushing a net of `B̄(z,r)` forward.
pub fn torus_return_index<S: Real>(
    ex: &TorusExample<S>,
    z: &Point<S>,
    y: &Point<S>,
    r: f64,
    theta: f64,
    budget: u64,
    delta_cap: Option<f64>,
) -> Result<ReturnIndex> {
    let region = ex.affine_region();
    let half = Ball { center: region.center, radius: region.radius * S::lit(0.5) };
    if !half.contains(z) || !half.contains(y) {
        bail!(Precondition, "both points must lie in the half affine region");
    }
    let threshold = r / theta;
    let delta = delta_cap.unwrap_or(r / (10.0 * theta));
    // screening allows for the discretisation of both nets
    let screen = threshold - 3.0 * delta;
    let h = ex.h;
    let w = h.inverse(to_pair(z));
    let yy = to_pair(y);
    let inv_norm = {
        let a = h.linear;
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        spectral_norm(&[[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]])
    };
    let rho = h.rho;
    let base = from_pair::<f64>(h.base);
    let source_affine = dist(&from_pair::<f64>(to_pair(z)), &base)? + r <= rho;
    let target = closure_ball(y, S::lit(r), S::lit(delta))?;
    let mut best = f64::INFINITY;
    let gamma = ex.config.gamma;
    for n in 1..=budget {
        let moved = [w[0] + n as f64 * gamma[0], w[1] + n as f64 * gamma[1]];
        let centre = h.apply(moved);
        let d = dist(&from_pair::<f64>(centre), &from_pair::<f64>(yy))?;
        best = best.min(d);
        if d >= screen {
            continue;
        }
        let g: Arc<dyn Map<S>> = Arc::new(ConjugatedTranslation::new(h, gamma, n as f64));
        let power = IfsSystem::new(Manifold::Torus2, "power", vec![g])?;
        let a = Continuum::ball(*z, S::lit(r))?;
        let opts = InducedOptions { delta_cap: Some(S::lit(delta)), ..InducedOptions::default() };
        let img = induced_apply(&power, &Word::new(vec![Letter::forward(0)]), &a, &opts)?;
        let d_nets = hausdorff_points(img.image.points(), target.points());
        let delta_total = img.image.resolution().as_f64() + target.resolution().as_f64();
        let certified = d_nets + delta_total;
        if certified < threshold {
            let affine = source_affine && dist(&from_pair::<f64>(moved), &base)? + inv_norm * r <= rho;
            return Ok(ReturnIndex {
                n: Some(n),
                certified_distance: certified,
                delta_total,
                best_distance: best,
                affine,
                scanned: n,
            });
        }
    }
    Ok(ReturnIndex {
        n: None,
        certified_distance: f64::INFINITY,
        delta_total: 0.0,
        best_distance: best,
        affine: source_affine,
        scanned: budget,
    })
}

/// Return-index search packaged as a witness; the word is the `n`-th power
/// of the single generator.
pub fn torus_witness<S: Real>(
    ex: &TorusExample<S>,
    x: &Point<S>,
    y: &Point<S>,
    r: f64,
    theta: f64,
    budget: u64,
    delta_cap: Option<f64>,
) -> Result<WitnessResult> {
    let threshold = r / theta;
    if dist(x, y)?.as_f64() == 0.0 {
        return Ok(WitnessResult::exact(Word::empty(), 0.0, threshold, 0));
    }
    let ri = torus_return_index(ex, x, y, r, theta, budget, delta_cap)?;
    let mut w = match ri.n {
        Some(n) => WitnessResult::net(
            Word::power(Letter::forward(0), n as usize),
            ri.certified_distance,
            ri.delta_total,
            threshold,
            ri.scanned,
        ),
        None => WitnessResult::not_found(ri.best_distance, threshold, ri.scanned),
    };
    if !ri.affine {
        w.note = Some("non-affine steps".to_string());
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{sample_in_ball, sample_uniform};
    use crate::ifs::apply_word;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn affine_on_the_region() {
        let ex = TorusConfig::default().build::<f64>().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let region = ex.affine_region();
        for _ in 0..1000 {
            let z = sample_in_ball(&region, &mut rng);
            let v = [z.coords()[0] - 0.5, z.coords()[1] - 0.5];
            let av = mat_vec(&ex.config.linear, v);
            let expected = Point::torus(0.5 + av[0], 0.5 + av[1]);
            assert!(dist(&ex.h(&z), &expected).unwrap() < 1e-15);
        }
        assert_eq!(ex.h(&Point::torus(0.5, 0.5)), Point::torus(0.5, 0.5));
    }

    #[test]
    fn two_sided_inverse() {
        let ex = TorusConfig::default().build::<f64>().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let blend = Ball::new(Point::torus(0.5, 0.5), 0.1).unwrap();
        for i in 0..2000 {
            let z: Point<f64> =
                if i % 2 == 0 { sample_uniform(Manifold::Torus2, &mut rng) } else { sample_in_ball(&blend, &mut rng) };
            assert!(dist(&ex.h_inv(&ex.h(&z)), &z).unwrap() < 1e-9);
            assert!(dist(&ex.h(&ex.h_inv(&z)), &z).unwrap() < 1e-9);
        }
        ex.system.validate(1000, 3).unwrap();
    }

    #[test]
    fn identity_linear_part_gives_translation() {
        let cfg = TorusConfig { linear: [[1.0, 0.0], [0.0, 1.0]], ..TorusConfig::default() };
        let ex = cfg.build::<f64>().unwrap();
        let z = Point::torus(0.3, 0.9);
        assert_eq!(ex.h(&z), z);
        let g = ex.system.apply_letter(Letter::forward(0), &z);
        let t = Point::torus(0.3 + cfg.gamma[0], 0.9 + cfg.gamma[1]);
        assert!(dist(&g, &t).unwrap() < 1e-15);
    }

    #[test]
    fn invertibility_bound_enforced() {
        let cfg = TorusConfig { linear: [[1.0, 0.3], [0.0, 1.0]], ..TorusConfig::default() };
        let e = cfg.build::<f64>().unwrap_err().to_string();
        assert!(e.contains("invertibility bound"), "{e}");
        let cfg = TorusConfig { linear: [[1.0, 1.0], [1.0, 1.0]], ..TorusConfig::default() };
        assert!(cfg.build::<f64>().is_err());
    }

    #[test]
    fn conjugation_identity_for_powers() {
        let ex = TorusConfig::default().build::<f64>().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1u64, 2, 7, 30] {
            let w = Word::power(Letter::forward(0), n as usize);
            for _ in 0..50 {
                let z = sample_in_ball(&ex.affine_region(), &mut rng);
                let a = apply_word(&ex.system, &w, &z).unwrap();
                assert!(dist(&a, &ex.power(n, &z)).unwrap() < 1e-9, "n = {n}");
            }
        }
    }

    #[test]
    fn return_to_self_and_plain_translation() {
        let ex = TorusConfig::default().build::<f64>().unwrap();
        let z = Point::torus(0.5, 0.5);
        let ri = torus_return_index(&ex, &z, &z, 0.03, 6.0, 100_000, None).unwrap();
        let n = ri.n.expect("return exists");
        assert!(ri.certified_distance < 0.03 / 6.0 && ri.affine);
        let w = ex.h.inverse(to_pair(&z));
        let back = Point::torus(w[0] + n as f64 * ex.config.gamma[0], w[1] + n as f64 * ex.config.gamma[1]);
        assert!(dist(&back, &Point::torus(w[0], w[1])).unwrap() < 0.03 / 6.0);

        let plain = TorusConfig { linear: [[1.0, 0.0], [0.0, 1.0]], ..TorusConfig::default() }.build::<f64>().unwrap();
        let y = Point::torus(0.51, 0.5);
        let ri = torus_return_index(&plain, &z, &y, 0.03, 6.0, 100_000, None).unwrap();
        let n = ri.n.expect("return exists");
        let moved = Point::torus(0.5 + n as f64 * plain.config.gamma[0], 0.5 + n as f64 * plain.config.gamma[1]);
        assert!(dist(&moved, &y).unwrap() < 0.03 / 6.0);
        assert!(torus_return_index(&ex, &Point::torus(0.1, 0.1), &z, 0.01, 6.0, 10, None).is_err());
    }
}
