//! Two near-rotations of the circle that act as exact rotations on two
//! overlapping arcs, and the inductive symbol sequence that keeps an orbit
//! inside those arcs.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::criteria::WitnessResult;
use crate::error::{bail, Result};
use crate::geom::{dist, CircleArc, Manifold, Point};
use crate::hyper::{hausdorff, induced_apply, Continuum, InducedOptions};
use crate::ifs::{IfsSystem, Letter, Map, RotationDomain, Word};
use crate::scalar::{wrap_unit, Real};

const GRID: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircleConfig {
    /// Arc on which the first map is the rotation by `beta`.
    pub i1: CircleArc<f64>,
    /// Arc on which the second map is the rotation by `gamma`.
    pub i2: CircleArc<f64>,
    pub beta: f64,
    pub gamma: f64,
    /// Height of the smooth bump added to the lift off each arc.
    pub blend_amplitude: f64,
}

impl Default for CircleConfig {
    fn default() -> Self {
        let beta = (std::f64::consts::SQRT_2 - 1.0) / 10.0;
        CircleConfig {
            i1: CircleArc::between(0.02, 0.98),
            i2: CircleArc::between(0.7, 0.3),
            beta,
            gamma: beta + 0.001 * (std::f64::consts::PI - 3.0),
            blend_amplitude: 0.005,
        }
    }
}

/// Outcome of the grid checks on a [`CircleConfig`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircleConditions {
    pub arcs_cover: bool,
    pub gap_measure: f64,
    pub gap_small: bool,
    pub quarter_balls_in_i2: bool,
    pub beta_exceeds_gap: bool,
}

impl CircleConditions {
    pub fn all(&self) -> bool {
        self.arcs_cover && self.gap_small && self.quarter_balls_in_i2 && self.beta_exceeds_gap
    }
}

fn grid() -> impl Iterator<Item = f64> {
    (0..GRID).map(|i| i as f64 / GRID as f64)
}

impl CircleConfig {
    /// Evaluates the three arc conditions on a uniform grid of the circle.
    pub fn conditions(&self) -> CircleConditions {
        let gap = self.i1.complement();
        let gap_measure = 1.0 - self.i1.len;
        let in_gap = |x: f64| !self.i1.contains(x);
        CircleConditions {
            arcs_cover: grid().all(|x| self.i1.contains(x) || self.i2.contains(x)),
            gap_measure,
            gap_small: gap_measure < 1.0 / 20.0,
            // the gap endpoints are checked too: the grid may straddle them
            quarter_balls_in_i2: grid()
                .filter(|&x| in_gap(x))
                .chain([gap.start, gap.end()])
                .all(|x| self.i2.contains_ball(x, 0.25)),
            beta_exceeds_gap: self.beta > gap_measure,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("beta", self.beta), ("gamma", self.gamma)] {
            if !(v > 0.0 && v < 1.0) {
                bail!(Construction, "{name} = {v} must lie in (0, 1)");
            }
        }
        if self.beta == self.gamma {
            bail!(Construction, "beta and gamma must differ");
        }
        let c = self.conditions();
        if !c.arcs_cover {
            bail!(Construction, "condition (i) violated: I1 and I2 do not cover the circle");
        }
        if !c.gap_small {
            bail!(Construction, "condition (ii) violated: m(S1 \\ I1) = {} is not below 1/20", c.gap_measure);
        }
        if !c.quarter_balls_in_i2 {
            bail!(Construction, "condition (iii) violated: some B(x, 1/4) with x outside I1 leaves I2");
        }
        if !c.beta_exceeds_gap {
            bail!(Construction, "beta = {} does not exceed m(S1 \\ I1) = {}", self.beta, c.gap_measure);
        }
        for (arc, name) in [(self.i1, "I1"), (self.i2, "I2")] {
            let free = 1.0 - arc.len;
            if self.blend_amplitude < 0.0 || self.blend_amplitude * std::f64::consts::PI >= free {
                bail!(Construction, "blend amplitude {} breaks monotonicity off {name}", self.blend_amplitude);
            }
        }
        Ok(())
    }

    pub fn build<S: Real>(&self) -> Result<IfsSystem<S>> {
        self.validate()?;
        let gens: Vec<Arc<dyn Map<S>>> = vec![
            Arc::new(BlendedRotation::new("f1", self.i1, self.beta, self.blend_amplitude)),
            Arc::new(BlendedRotation::new("f2", self.i2, self.gamma, self.blend_amplitude)),
        ];
        IfsSystem::new(Manifold::Circle, "circle example", gens)
    }
}

/// Circle homeomorphism equal to `x ↦ x + shift` on an open arc, with lift
/// `x + shift + a·sin²(π s / L)` at offset `s` into the complementary arc of
/// length `L`. The bump vanishes to first order at both ends, so the lift is
/// C¹, and it is strictly increasing while `a·π < L`.
#[derive(Debug, Clone, Copy)]
pub struct BlendedRotation<S> {
    label: &'static str,
    domain: CircleArc<S>,
    shift: S,
    amplitude: S,
}

impl<S: Real> BlendedRotation<S> {
    pub fn new(label: &'static str, domain: CircleArc<f64>, shift: f64, amplitude: f64) -> Self {
        BlendedRotation {
            label,
            domain: CircleArc { start: S::lit(domain.start), len: S::lit(domain.len) },
            shift: S::lit(shift),
            amplitude: S::lit(amplitude),
        }
    }

    fn bump(&self, x: S) -> S {
        let gap = S::one() - self.domain.len;
        let s = wrap_unit(x - self.domain.end());
        if gap <= S::zero() || s >= gap {
            return S::zero();
        }
        let t = (S::PI() * s / gap).sin();
        self.amplitude * t * t
    }

    /// Lift of the map evaluated at a real number.
    pub fn lift(&self, x: S) -> S {
        x + self.shift + self.bump(x)
    }

    fn invert(&self, y: S) -> S {
        // the lift minus the shift lies in [x, x + a]
        let u = y - self.shift;
        let (mut lo, mut hi) = (u - self.amplitude, u);
        for _ in 0..200 {
            let mid = (lo + hi) * S::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if mid + self.bump(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // pick the endpoint whose image is closer
        let err = |x: S| (x + self.bump(x) - u).abs();
        if err(lo) < err(hi) {
            lo
        } else {
            hi
        }
    }
}

impl<S: Real> Map<S> for BlendedRotation<S> {
    fn name(&self) -> String {
        self.label.to_string()
    }

    fn apply(&self, p: &Point<S>) -> Point<S> {
        match *p {
            Point::Circle(x) => Point::circle(self.lift(x)),
            other => other,
        }
    }

    fn apply_inverse(&self, p: &Point<S>) -> Option<Point<S>> {
        match *p {
            Point::Circle(y) => Some(Point::circle(self.invert(y))),
            _ => None,
        }
    }

    fn has_inverse(&self) -> bool {
        true
    }

    fn is_isometry(&self) -> bool {
        self.amplitude == S::zero()
    }

    fn rotation_domain(&self) -> Option<RotationDomain<S>> {
        Some(RotationDomain { arc: self.domain, shift: self.shift })
    }
}

/// `k = max{n : nβ ≤ 1 − γ}`.
pub fn compute_k(beta: f64, gamma: f64) -> Result<u64> {
    if !(beta > 0.0 && beta < 1.0 && gamma > 0.0 && gamma < 1.0) {
        bail!(Domain, "beta and gamma must lie in (0, 1), got {beta} and {gamma}");
    }
    let bound = 1.0 - gamma;
    let mut n = (bound / beta).floor() as u64;
    while n > 0 && n as f64 * beta > bound {
        n -= 1;
    }
    while (n + 1) as f64 * beta <= bound {
        n += 1;
    }
    Ok(n)
}

/// Lebesgue number of a cover of the circle by open arcs, by grid minimax:
/// the minimum over grid points of the largest distance to the boundary of
/// an arc containing the point.
pub fn lebesgue_number(arcs: &[CircleArc<f64>]) -> f64 {
    let depth = |a: &CircleArc<f64>, x: f64| -> f64 {
        if a.is_full() {
            return 0.5;
        }
        if !a.contains(x) {
            return 0.0;
        }
        let o = wrap_unit(x - a.start);
        o.min(a.len - o)
    };
    grid().map(|x| arcs.iter().map(|a| depth(a, x)).fold(0.0, f64::max)).fold(f64::INFINITY, f64::min)
}

/// A symbol sequence together with the orbit it drives.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaRun<S> {
    /// The composed word; its acting order is the sequence order.
    pub word: Word,
    /// `orbit[i]` is the point after `i + 1` steps.
    pub orbit: Vec<Point<S>>,
    /// `rotation_sum[i]` is the total rotation applied in the first `i + 1` steps.
    pub rotation_sum: Vec<f64>,
}

impl<S: Real> OmegaRun<S> {
    /// Fraction of steps that use the first generator.
    pub fn first_symbol_frequency(&self) -> f64 {
        let n = self.word.len();
        if n == 0 {
            return 0.0;
        }
        self.word.letters().iter().filter(|l| l.generator == 0).count() as f64 / n as f64
    }
}

fn domains<S: Real>(sys: &IfsSystem<S>) -> Result<(RotationDomain<S>, RotationDomain<S>)> {
    if sys.manifold() != Manifold::Circle || sys.len() != 2 {
        bail!(Input, "expected a two-generator circle system");
    }
    match (sys.letter_rotation_domain(Letter::forward(0)), sys.letter_rotation_domain(Letter::forward(1))) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => bail!(Capability, "both generators must declare rotation domains"),
    }
}

/// Iterator form of the inductive rule, producing `(letter, next point)`.
struct OmegaSteps<S> {
    d1: RotationDomain<S>,
    d2: RotationDomain<S>,
    margin: S,
    z: S,
    prev: Option<(usize, S)>,
}

impl<S: Real> OmegaSteps<S> {
    fn step(&mut self) -> Result<(usize, S)> {
        let gap = self.d1.arc.complement();
        let fits1 = self.d1.arc.contains_ball(self.z, self.margin);
        let first = match self.prev {
            // after f1 from z_prev, stay only if the gap was not jumped over
            Some((0, zp)) => fits1 && !gap.inside_closed(zp, self.z),
            _ => fits1,
        };
        let (letter, dom) = if first { (0, self.d1) } else { (1, self.d2) };
        if !dom.arc.contains_ball(self.z, self.margin) {
            bail!(Construction, "no generator acts as a rotation near {}", self.z);
        }
        let next = wrap_unit(self.z + dom.shift);
        self.prev = Some((letter, self.z));
        self.z = next;
        Ok((letter, next))
    }
}

/// Builds the inductive symbol sequence of length `n` from `x`: keep using
/// the first map while the point stays in its arc and the last step did not
/// pass over the gap `S¹ ∖ I₁`, otherwise use the second map once.
///
/// With `margin > 0` the arc tests apply to the closed ball of that radius
/// around the point, so balls of radius `margin` move rigidly too.
pub fn omega_construction<S: Real>(sys: &IfsSystem<S>, x: &Point<S>, n: usize, margin: S) -> Result<OmegaRun<S>> {
    if n == 0 {
        bail!(Input, "the sequence length must be at least 1");
    }
    let Point::Circle(x0) = *x else {
        bail!(Domain, "point on {} given to a circle system", x.manifold());
    };
    let (d1, d2) = domains(sys)?;
    let mut steps = OmegaSteps { d1, d2, margin, z: x0, prev: None };
    let mut letters = Vec::with_capacity(n);
    let mut orbit = Vec::with_capacity(n);
    let mut rotation_sum = Vec::with_capacity(n);
    let mut sum = 0.0;
    for _ in 0..n {
        let (l, z) = steps.step()?;
        sum += if l == 0 { d1.shift.as_f64() } else { d2.shift.as_f64() };
        letters.push(Letter::forward(l));
        orbit.push(Point::circle(z));
        rotation_sum.push(sum);
    }
    Ok(OmegaRun { word: Word::from_time_order(letters), orbit, rotation_sum })
}

/// Runs the inductive sequence from `x` until the arc around the current
/// point is within `r / θ` of the arc around `y`. Since every step is a
/// rotation of the whole arc, the Hausdorff distance is the distance of the
/// centres.
pub fn circle_witness<S: Real>(
    sys: &IfsSystem<S>,
    x: &Point<S>,
    y: &Point<S>,
    r: S,
    theta: f64,
    max_len: usize,
) -> Result<WitnessResult> {
    let (d1, d2) = domains(sys)?;
    let (Point::Circle(x0), Point::Circle(_)) = (*x, *y) else {
        bail!(Domain, "circle witness needs circle points");
    };
    let cover = [
        CircleArc { start: d1.arc.start.as_f64(), len: d1.arc.len.as_f64() },
        CircleArc { start: d2.arc.start.as_f64(), len: d2.arc.len.as_f64() },
    ];
    let lebesgue = lebesgue_number(&cover);
    if r.as_f64() >= lebesgue {
        bail!(Precondition, "radius {r} is not below the Lebesgue number {lebesgue} of the rotation arcs");
    }
    let threshold = r.as_f64() / theta;
    let d0 = dist(x, y)?.as_f64();
    if d0 < threshold {
        return Ok(WitnessResult::exact(Word::empty(), d0, threshold, 0));
    }
    let mut steps = OmegaSteps { d1, d2, margin: r, z: x0, prev: None };
    let mut letters = Vec::new();
    let mut best = d0;
    for i in 1..=max_len {
        let (l, z) = steps.step()?;
        letters.push(Letter::forward(l));
        let d = dist(&Point::circle(z), y)?.as_f64();
        best = best.min(d);
        if d < threshold {
            let word = Word::from_time_order(letters);
            // replay through the induced map: the arc path must stay exact
            let a = Continuum::ball(*x, r)?;
            let img = induced_apply(sys, &word, &a, &InducedOptions::default())?;
            if !img.exact {
                bail!(Construction, "arc left a rotation domain along the constructed word");
            }
            let certified = hausdorff(&img.image, &Continuum::ball(*y, r)?)?;
            return Ok(WitnessResult::exact(word, certified, threshold, i as u64));
        }
    }
    Ok(WitnessResult::not_found(best, threshold, max_len as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::fiberwise_orbit;

    #[test]
    fn default_config_conditions() {
        let c = CircleConfig::default().conditions();
        assert!(c.all(), "{c:?}");
        assert!((c.gap_measure - 0.04).abs() < 1e-12);
        let cfg = CircleConfig::default();
        assert!((cfg.gamma - cfg.beta).abs() < 2e-4);
    }

    #[test]
    fn violated_conditions_are_named() {
        let cfg = CircleConfig { i2: CircleArc::between(0.75, 0.25), ..CircleConfig::default() };
        let e = cfg.build::<f64>().unwrap_err().to_string();
        assert!(e.contains("(iii)"), "{e}");
        let cfg = CircleConfig { i1: CircleArc::between(0.05, 0.95), ..CircleConfig::default() };
        assert!(cfg.build::<f64>().unwrap_err().to_string().contains("(ii)"));
        let cfg = CircleConfig { i2: CircleArc::between(0.9, 0.01), ..CircleConfig::default() };
        assert!(cfg.build::<f64>().unwrap_err().to_string().contains("(i)"));
    }

    #[test]
    fn maps_rotate_on_their_arcs() {
        let cfg = CircleConfig::default();
        let sys = cfg.build::<f64>().unwrap();
        let p = sys.apply_letter(Letter::forward(0), &Point::circle(0.5));
        assert!((p.coords()[0] - (0.5 + cfg.beta)).abs() < 1e-15);
        let q = sys.apply_letter(Letter::forward(1), &Point::circle(0.99));
        assert!((q.coords()[0] - (0.99 + cfg.gamma - 1.0)).abs() < 1e-15);
        sys.validate(1000, 5).unwrap();
    }

    #[test]
    fn lifts_strictly_increase() {
        let cfg = CircleConfig::default();
        for (arc, shift) in [(cfg.i1, cfg.beta), (cfg.i2, cfg.gamma)] {
            let f = BlendedRotation::<f64>::new("f", arc, shift, cfg.blend_amplitude);
            let vals: Vec<f64> = (0..=GRID).map(|i| f.lift(i as f64 / GRID as f64)).collect();
            assert!(vals.windows(2).all(|w| w[1] > w[0]));
            assert!((vals[GRID] - vals[0] - 1.0).abs() < 1e-12, "degree one");
        }
    }

    #[test]
    fn k_by_enumeration() {
        let enumerate = |b: f64, g: f64| (1..10_000u64).take_while(|&n| n as f64 * b <= 1.0 - g).last().unwrap_or(0);
        assert_eq!(compute_k(0.1, 0.05).unwrap(), 9);
        assert_eq!(compute_k(0.5, 0.5).unwrap(), 1);
        let cfg = CircleConfig::default();
        assert_eq!(compute_k(cfg.beta, cfg.gamma).unwrap(), enumerate(cfg.beta, cfg.gamma));
        assert_eq!(compute_k(cfg.beta, cfg.gamma).unwrap(), 23);
        assert!(compute_k(0.0, 0.5).is_err());
    }

    #[test]
    fn lebesgue_number_of_default_cover() {
        let cfg = CircleConfig::default();
        let l = lebesgue_number(&[cfg.i1, cfg.i2]);
        assert!((l - 0.14).abs() < 1e-3, "{l}");
    }

    #[test]
    fn omega_is_a_rotation_orbit() {
        let sys = CircleConfig::default().build::<f64>().unwrap();
        let run = omega_construction(&sys, &Point::circle(0.5), 1, 0.0).unwrap();
        assert_eq!(run.word.to_signed(), vec![1]);
        let x = Point::circle(0.123);
        let run = omega_construction(&sys, &x, 5000, 0.0).unwrap();
        let orbit = fiberwise_orbit(&sys, &run.word, &x).unwrap();
        for (i, p) in orbit.iter().enumerate() {
            let expected = Point::circle(0.123 + run.rotation_sum[i]);
            assert!(dist(p, &expected).unwrap() < 1e-9, "step {i}");
            assert_eq!(*p, run.orbit[i]);
        }
    }

    #[test]
    fn witness_cases() {
        let sys = CircleConfig::default().build::<f64>().unwrap();
        let x = Point::circle(0.1);
        let same = circle_witness(&sys, &x, &x, 0.02, 6.0, 10).unwrap();
        assert!(same.found && same.word.as_ref().unwrap().is_empty());
        let w = circle_witness(&sys, &x, &Point::circle(0.6), 0.02, 6.0, 5000).unwrap();
        assert!(w.found && w.word.as_ref().unwrap().len() <= 5000);
        assert!(w.certified_distance < 0.02 / 6.0);
        assert!(matches!(circle_witness(&sys, &x, &x, 0.2, 6.0, 10), Err(crate::Error::Precondition(_))));
    }
}
