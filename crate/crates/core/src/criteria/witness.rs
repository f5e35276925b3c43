//! Witness words for hyper-minimality: a word `h` with
//! `d_H(ĥ(B̄(x,r)), B̄(y,r)) < r/Θ`, certified with discretisation margin.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sample_rng, SampleRow, VerifierReport};
use crate::error::{bail, Result};
use crate::geom::{check_radius, dist, sample_in_ball, sample_uniform, Ball, Manifold, Point};
use crate::hyper::{hausdorff, hausdorff_points, induced_apply, Continuum, InducedOptions};
use crate::ifs::{word_count, IfsSystem, Letter, Word};
use crate::scalar::Real;

/// Limits and tuning of the witness search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchBudget {
    /// Longest word tried by the exhaustive search.
    pub max_len: usize,
    /// Longest word produced by any strategy.
    pub max_word_len: usize,
    /// Evaluated words before giving up.
    pub max_nodes: u64,
    pub beam_width: usize,
    /// Largest power of a single letter appended in one greedy step.
    pub max_power: usize,
    /// Greedy steps per restart.
    pub max_depth: usize,
    pub restarts: usize,
    pub with_inverses: bool,
    /// Resolution of nets; `r / (10 Θ)` when absent.
    pub delta_cap: Option<f64>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_len: 12,
            max_word_len: 100_000,
            max_nodes: 2_000_000,
            beam_width: 8,
            max_power: 64,
            max_depth: 32,
            restarts: 4,
            with_inverses: false,
            delta_cap: None,
        }
    }
}

impl SearchBudget {
    pub fn delta(&self, r: f64, theta: f64) -> f64 {
        self.delta_cap.unwrap_or(r / (10.0 * theta))
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_word_len == 0 || self.max_nodes == 0 || self.beam_width == 0 || self.max_power == 0 {
            bail!(Input, "search budgets must be positive");
        }
        if self.delta_cap.is_some_and(|d| !(d > 0.0)) {
            bail!(Input, "net resolution must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessResult {
    pub found: bool,
    pub word: Option<Word>,
    /// Hausdorff distance of the representations plus their resolutions.
    pub certified_distance: f64,
    pub delta_total: f64,
    /// `r/Θ − certified_distance`.
    pub margin: f64,
    /// Both sets were exact balls, so no discretisation entered.
    pub exact: bool,
    pub nodes_expanded: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip)]
    pub runtime: Duration,
}

impl WitnessResult {
    /// Witness certified without discretisation.
    pub fn exact(word: Word, distance: f64, threshold: f64, nodes: u64) -> Self {
        let found = distance < threshold;
        WitnessResult {
            found,
            word: found.then_some(word),
            certified_distance: distance,
            delta_total: 0.0,
            margin: threshold - distance,
            exact: true,
            nodes_expanded: nodes,
            note: None,
            runtime: Duration::ZERO,
        }
    }

    /// Witness certified on nets whose resolutions add up to `delta_total`.
    pub fn net(word: Word, certified: f64, delta_total: f64, threshold: f64, nodes: u64) -> Self {
        let found = certified < threshold;
        WitnessResult {
            found,
            word: found.then_some(word),
            certified_distance: certified,
            delta_total,
            margin: threshold - certified,
            exact: false,
            nodes_expanded: nodes,
            note: None,
            runtime: Duration::ZERO,
        }
    }

    /// Search failed; `best` is the closest uncertified distance seen.
    pub fn not_found(best: f64, threshold: f64, nodes: u64) -> Self {
        WitnessResult {
            found: false,
            word: None,
            certified_distance: best,
            delta_total: 0.0,
            margin: threshold - best,
            exact: false,
            nodes_expanded: nodes,
            note: Some("budget exhausted".to_string()),
            runtime: Duration::ZERO,
        }
    }

    fn from_certificate(word: Word, c: &Certificate, threshold: f64, nodes: u64) -> Self {
        let mut w = if c.exact {
            Self::exact(word, c.certified, threshold, nodes)
        } else {
            Self::net(word, c.certified, c.delta_total, threshold, nodes)
        };
        if c.fell_back {
            w.note = Some("arc left a rotation domain; net mode used".to_string());
        }
        w
    }
}

/// Constructs witnesses for a particular system by a dedicated rule.
pub trait WitnessConstructor<S: Real>: Send + Sync {
    fn name(&self) -> String;

    fn construct(&self, x: &Point<S>, y: &Point<S>, r: f64, theta: f64, budget: &SearchBudget)
        -> Result<WitnessResult>;
}

pub enum Strategy<'a, S> {
    /// All words up to `max_len`, in length-lexicographic order.
    Exhaustive,
    /// Beam search on the distance of the image centre to `y`.
    Greedy,
    Custom(&'a dyn WitnessConstructor<S>),
}

impl<S: Real> Strategy<'_, S> {
    pub fn name(&self) -> String {
        match self {
            Strategy::Exhaustive => "exhaustive".to_string(),
            Strategy::Greedy => "greedy".to_string(),
            Strategy::Custom(c) => c.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    /// Hausdorff distance between the two representations.
    pub distance: f64,
    pub delta_total: f64,
    /// `distance + delta_total`: an upper bound for the true distance.
    pub certified: f64,
    pub exact: bool,
    pub fell_back: bool,
}

/// Bounds `d_H(ŵ(B̄(x,r)), B̄(y,r))` from above. Exact balls are compared in
/// closed form; otherwise both sets are nets and their resolutions are added.
pub fn certify<S: Real>(
    sys: &IfsSystem<S>,
    w: &Word,
    x: &Point<S>,
    y: &Point<S>,
    r: f64,
    delta: f64,
) -> Result<Certificate> {
    let a = Continuum::ball(*x, S::lit(r))?;
    let opts = InducedOptions { delta_cap: Some(S::lit(delta)), ..InducedOptions::default() };
    let img = induced_apply(sys, w, &a, &opts)?;
    let target = Continuum::ball(*y, S::lit(r))?;
    if let Continuum::Ball { center, .. } = &img.image {
        let closed_form = y.manifold() == Manifold::Circle || dist(center, y)?.as_f64() + r <= 0.5;
        if closed_form {
            let d = hausdorff(&img.image, &target)?;
            return Ok(Certificate {
                distance: d,
                delta_total: 0.0,
                certified: d,
                exact: true,
                fell_back: img.fell_back,
            });
        }
    }
    let na = img.image.to_net(S::lit(delta))?;
    let nb = target.to_net(S::lit(delta))?;
    let d = hausdorff_points(na.points(), nb.points());
    let delta_total = na.resolution().as_f64() + nb.resolution().as_f64();
    Ok(Certificate { distance: d, delta_total, certified: d + delta_total, exact: false, fell_back: img.fell_back })
}

/// Searches for a witness word with the given strategy.
#[allow(clippy::too_many_arguments)]
pub fn find_witness<S: Real>(
    sys: &IfsSystem<S>,
    x: &Point<S>,
    y: &Point<S>,
    r: f64,
    theta: f64,
    budget: &SearchBudget,
    strategy: &Strategy<'_, S>,
    seed: u64,
) -> Result<WitnessResult> {
    let start = Instant::now();
    if !(theta > 5.0) {
        bail!(Precondition, "theta = {theta} must exceed 5");
    }
    budget.validate()?;
    check_radius(sys.manifold(), r)?;
    if x.manifold() != sys.manifold() || y.manifold() != sys.manifold() {
        bail!(Domain, "points must lie on {}", sys.manifold());
    }
    let threshold = r / theta;
    let mut result = if dist(x, y)?.as_f64() == 0.0 {
        WitnessResult::exact(Word::empty(), 0.0, threshold, 0)
    } else {
        match strategy {
            Strategy::Exhaustive => exhaustive(sys, x, y, r, theta, budget)?,
            Strategy::Greedy => greedy(sys, x, y, r, theta, budget, seed)?,
            Strategy::Custom(c) => c.construct(x, y, r, theta, budget)?,
        }
    };
    result.runtime = start.elapsed();
    Ok(result)
}

fn exhaustive<S: Real>(
    sys: &IfsSystem<S>,
    x: &Point<S>,
    y: &Point<S>,
    r: f64,
    theta: f64,
    budget: &SearchBudget,
) -> Result<WitnessResult> {
    let threshold = r / theta;
    let delta = budget.delta(r, theta);
    let alphabet = sys.alphabet(budget.with_inverses);
    let k = alphabet.len();
    let len = budget.max_len.min(budget.max_word_len);
    match word_count(k, len) {
        Some(n) if n <= budget.max_nodes => {}
        _ => bail!(Budget, "{k} letters up to length {len} exceed {} words", budget.max_nodes),
    }
    // level n holds f_w(x) for every word of length n; index a·kⁿ⁻¹ + j is
    // the letter a composed after word j of the previous level
    let mut level = vec![*x];
    let mut nodes = 1u64;
    let mut best = dist(x, y)?.as_f64();
    for n in 1..=len {
        let prev = level;
        level = alphabet.iter().flat_map(|&l| prev.iter().map(move |p| sys.apply_letter(l, p))).collect();
        let block = prev.len();
        for (i, q) in level.iter().enumerate() {
            nodes += 1;
            let d = dist(q, y)?.as_f64();
            best = best.min(d);
            if d < threshold {
                let w = decode(&alphabet, i, n, block);
                let c = certify(sys, &w, x, y, r, delta)?;
                if c.certified < threshold {
                    return Ok(WitnessResult::from_certificate(w, &c, threshold, nodes));
                }
            }
        }
    }
    Ok(WitnessResult::not_found(best, threshold, nodes))
}

fn decode(alphabet: &[Letter], mut index: usize, len: usize, mut block: usize) -> Word {
    let k = alphabet.len();
    let mut letters = Vec::with_capacity(len);
    for _ in 0..len {
        letters.push(alphabet[index / block]);
        index %= block;
        block = (block / k).max(1);
    }
    Word::new(letters)
}

fn greedy<S: Real>(
    sys: &IfsSystem<S>,
    x: &Point<S>,
    y: &Point<S>,
    r: f64,
    theta: f64,
    budget: &SearchBudget,
    seed: u64,
) -> Result<WitnessResult> {
    let threshold = r / theta;
    let delta = budget.delta(r, theta);
    let alphabet = sys.alphabet(budget.with_inverses);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = 0u64;
    let mut best = dist(x, y)?.as_f64();
    for attempt in 0..=budget.restarts {
        let start = if attempt == 0 {
            Word::empty()
        } else {
            let len = rng.gen_range(1..=budget.max_power.min(budget.max_word_len));
            Word::new((0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect())
        };
        let p0 = start.time_order().fold(*x, |p, l| sys.apply_letter(l, &p));
        let mut beam = vec![(start, p0)];
        for _ in 0..budget.max_depth {
            let mut children: Vec<(f64, Word, Point<S>)> = Vec::new();
            for (w, p) in &beam {
                for &l in &alphabet {
                    let mut q = *p;
                    for j in 1..=budget.max_power {
                        if w.len() + j > budget.max_word_len {
                            break;
                        }
                        q = sys.apply_letter(l, &q);
                        nodes += 1;
                        children.push((dist(&q, y)?.as_f64(), Word::power(l, j).compose(w), q));
                    }
                }
            }
            if children.is_empty() {
                break;
            }
            children.sort_by(|a, b| a.0.total_cmp(&b.0));
            best = best.min(children[0].0);
            // a few certification attempts per step; the centre distance is only a guide
            for (_, w, _) in children.iter().take_while(|c| c.0 < threshold).take(4) {
                let c = certify(sys, w, x, y, r, delta)?;
                if c.certified < threshold {
                    return Ok(WitnessResult::from_certificate(w.clone(), &c, threshold, nodes));
                }
            }
            if nodes >= budget.max_nodes {
                return Ok(WitnessResult::not_found(best, threshold, nodes));
            }
            let spread = threshold / 8.0;
            let mut next: Vec<(Word, Point<S>)> = Vec::with_capacity(budget.beam_width);
            for (_, w, q) in children {
                if next.len() == budget.beam_width {
                    break;
                }
                if next.iter().all(|(_, o)| dist(o, &q).map(|d| d.as_f64() > spread).unwrap_or(true)) {
                    next.push((w, q));
                }
            }
            beam = next;
        }
    }
    Ok(WitnessResult::not_found(best, threshold, nodes))
}

fn row_from<S: Real>(id: usize, x: &Point<S>, y: &Point<S>, r: f64, w: WitnessResult) -> SampleRow {
    SampleRow {
        id,
        x: x.coords_f64(),
        y: y.coords_f64(),
        r,
        found: w.found,
        certified_distance: w.certified_distance,
        margin: w.margin,
        word: w.word,
        note: w.note,
    }
}

fn check_theta_radii(theta: f64, r0: f64, radii: &[f64]) -> Result<()> {
    if !(theta > 5.0) {
        bail!(Precondition, "theta = {theta} must exceed 5");
    }
    if radii.is_empty() {
        bail!(Input, "at least one radius is required");
    }
    if let Some(r) = radii.iter().find(|&&r| !(r > 0.0 && r < r0)) {
        bail!(Input, "radius {r} is not in (0, r0 = {r0})");
    }
    Ok(())
}

fn witness_parameters<S: Real>(
    theta: f64,
    r0: f64,
    n_pairs: usize,
    radii: &[f64],
    budget: &SearchBudget,
    strategy: &Strategy<'_, S>,
) -> serde_json::Value {
    serde_json::json!({
        "theta": theta,
        "r0": r0,
        "pairs": n_pairs,
        "radii": radii,
        "budget": budget,
        "strategy": strategy.name(),
        "certificate": "d_H(nets) + delta_a + delta_b < r/theta; exact balls compared in closed form",
    })
}

/// Samples `n_pairs` uniform pairs `(x, y)` and looks for a witness at every
/// listed radius.
#[allow(clippy::too_many_arguments)]
pub fn check_hyper_minimal<S: Real>(
    sys: &IfsSystem<S>,
    theta: f64,
    r0: f64,
    n_pairs: usize,
    radii: &[f64],
    budget: &SearchBudget,
    strategy: &Strategy<'_, S>,
    seed: u64,
) -> Result<VerifierReport> {
    let start = Instant::now();
    check_theta_radii(theta, r0, radii)?;
    let m = sys.manifold();
    let pairs: Vec<(Point<S>, Point<S>)> = (0..n_pairs)
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            (sample_uniform(m, &mut rng), sample_uniform(m, &mut rng))
        })
        .collect();
    let rows = run_pairs(sys, &pairs, theta, radii, budget, strategy, seed)?;
    let mut rep = VerifierReport::new(
        "hyper_minimal",
        sys.label(),
        witness_parameters(theta, r0, n_pairs, radii, budget, strategy),
        seed,
        rows,
    );
    rep.runtime = start.elapsed();
    Ok(rep)
}

fn run_pairs<S: Real>(
    sys: &IfsSystem<S>,
    pairs: &[(Point<S>, Point<S>)],
    theta: f64,
    radii: &[f64],
    budget: &SearchBudget,
    strategy: &Strategy<'_, S>,
    seed: u64,
) -> Result<Vec<SampleRow>> {
    let jobs: Vec<(usize, usize)> = (0..pairs.len()).flat_map(|p| (0..radii.len()).map(move |i| (p, i))).collect();
    jobs.par_iter()
        .map(|&(p, i)| {
            let id = p * radii.len() + i;
            let (x, y) = &pairs[p];
            let w = find_witness(sys, x, y, radii[i], theta, budget, strategy, seed.wrapping_add(id as u64))?;
            Ok(row_from(id, x, y, radii[i], w))
        })
        .collect()
}

/// As [`check_hyper_minimal`] with `x` drawn by `sampler` (which must stay
/// inside `u`) and `y` uniform in `u`.
#[allow(clippy::too_many_arguments)]
pub fn check_local_hyper_minimal<S: Real>(
    sys: &IfsSystem<S>,
    u: &Ball<S>,
    sampler: &(dyn Fn(&mut ChaCha8Rng) -> Point<S> + Sync),
    theta: f64,
    r0: f64,
    n_pairs: usize,
    radii: &[f64],
    budget: &SearchBudget,
    strategy: &Strategy<'_, S>,
    seed: u64,
) -> Result<VerifierReport> {
    let start = Instant::now();
    check_theta_radii(theta, r0, radii)?;
    if u.manifold() != sys.manifold() {
        bail!(Domain, "neighbourhood on {} for a system on {}", u.manifold(), sys.manifold());
    }
    let mut pairs = Vec::with_capacity(n_pairs);
    for i in 0..n_pairs {
        let mut rng = sample_rng(seed, i as u64);
        let x = sampler(&mut rng);
        if !u.contains(&x) {
            bail!(Input, "sampler produced {:?} outside the neighbourhood", x.coords_f64());
        }
        pairs.push((x, sample_in_ball(u, &mut rng)));
    }
    let rows = run_pairs(sys, &pairs, theta, radii, budget, strategy, seed)?;
    let mut params = witness_parameters(theta, r0, n_pairs, radii, budget, strategy);
    params["neighbourhood"] = serde_json::json!({ "center": u.center.coords_f64(), "radius": u.radius.as_f64() });
    let mut rep = VerifierReport::new("local_hyper_minimal", sys.label(), params, seed, rows);
    rep.runtime = start.elapsed();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{rotation_system, SphereConfig};

    #[test]
    fn identity_witness() {
        let sys = rotation_system(&[0.1_f64]).unwrap();
        let x = Point::circle(0.3);
        let w = find_witness(&sys, &x, &x, 0.05, 6.0, &SearchBudget::default(), &Strategy::Greedy, 1).unwrap();
        assert!(w.found && w.word.unwrap().is_empty() && w.certified_distance == 0.0);
    }

    #[test]
    fn theta_precondition() {
        let sys = rotation_system(&[0.1_f64]).unwrap();
        let (x, y) = (Point::circle(0.3), Point::circle(0.6));
        let e = find_witness(&sys, &x, &y, 0.05, 4.0, &SearchBudget::default(), &Strategy::Greedy, 1);
        assert!(matches!(e, Err(crate::Error::Precondition(_))));
    }

    #[test]
    fn exhaustive_budget_error() {
        let sys = rotation_system(&[0.1_f64, 0.2]).unwrap();
        let b = SearchBudget { max_len: 30, ..SearchBudget::default() };
        let (x, y) = (Point::circle(0.3), Point::circle(0.6));
        assert!(matches!(
            find_witness(&sys, &x, &y, 0.05, 6.0, &b, &Strategy::Exhaustive, 1),
            Err(crate::Error::Budget(_))
        ));
    }

    #[test]
    fn decode_matches_level_order() {
        let alphabet = [Letter::forward(0), Letter::forward(1), Letter::inverse(0)];
        let w = decode(&alphabet, 2 * 9 + 3, 3, 9);
        assert_eq!(w.to_signed(), vec![-1, 2, 1]);
    }

    #[test]
    fn exhaustive_finds_rotation_sums() {
        let sys = rotation_system(&[0.1_f64, 0.01]).unwrap();
        let (x, y) = (Point::circle(0.0), Point::circle(0.23));
        let b = SearchBudget { max_len: 6, ..SearchBudget::default() };
        let w = find_witness(&sys, &x, &y, 0.05, 6.0, &b, &Strategy::Exhaustive, 1).unwrap();
        assert!(w.found && w.exact);
        let word = w.word.unwrap();
        let sum: f64 = word.letters().iter().map(|l| [0.1, 0.01][l.generator]).sum();
        assert!((sum - 0.23).abs() < 0.05 / 6.0);
        // shortest words come first
        assert_eq!(word.len(), 5);
    }

    #[test]
    fn greedy_on_sphere_is_exact() {
        let sys = SphereConfig::default().build::<f64>().unwrap();
        let mut rng = sample_rng(5, 0);
        for _ in 0..5 {
            let x: Point<f64> = sample_uniform(Manifold::Sphere2, &mut rng);
            let y: Point<f64> = sample_uniform(Manifold::Sphere2, &mut rng);
            let w = find_witness(&sys, &x, &y, 0.05, 6.0, &SearchBudget::default(), &Strategy::Greedy, 3).unwrap();
            assert!(w.found && w.exact);
            let word = w.word.unwrap();
            let hx = crate::ifs::apply_word(&sys, &word, &x).unwrap();
            assert!((dist(&hx, &y).unwrap() - w.certified_distance).abs() < 1e-12);
            let again = certify(&sys, &word, &x, &y, 0.05, 0.05 / 60.0).unwrap();
            assert!((again.certified - w.certified_distance).abs() < 1e-9);
        }
    }

    #[test]
    fn exhaustive_agrees_with_short_greedy() {
        let sys = SphereConfig::default().build::<f64>().unwrap();
        let b = SearchBudget { max_len: 8, max_power: 2, max_depth: 4, restarts: 0, ..SearchBudget::default() };
        let mut rng = sample_rng(9, 0);
        let mut compared = 0;
        for _ in 0..40 {
            let x: Point<f64> = sample_uniform(Manifold::Sphere2, &mut rng);
            // targets reachable by a short word
            let len = rng.gen_range(1..=4);
            let w = Word::new((0..len).map(|_| Letter::forward(rng.gen_range(0..2))).collect());
            let y = crate::ifs::apply_word(&sys, &w, &x).unwrap();
            let g = find_witness(&sys, &x, &y, 0.1, 6.0, &b, &Strategy::Greedy, 1).unwrap();
            if g.found && g.word.as_ref().unwrap().len() <= b.max_len {
                compared += 1;
                let e = find_witness(&sys, &x, &y, 0.1, 6.0, &b, &Strategy::Exhaustive, 1).unwrap();
                assert!(e.found);
                assert!(e.word.unwrap().len() <= g.word.unwrap().len());
            }
        }
        assert!(compared > 10);
    }

    #[test]
    fn rational_rotation_fails_generic_pairs() {
        let sys = rotation_system(&[1.0_f64 / 3.0]).unwrap();
        let b = SearchBudget { max_depth: 4, restarts: 1, ..SearchBudget::default() };
        let rep = check_hyper_minimal(&sys, 6.0, 0.1, 20, &[0.02], &b, &Strategy::Greedy, 4).unwrap();
        assert!(rep.aggregate.success_rate < 1.0);
        let irr = rotation_system(&[(5f64.sqrt() - 1.0) / 2.0]).unwrap();
        let rep =
            check_hyper_minimal(&irr, 6.0, 0.1, 20, &[0.02], &SearchBudget::default(), &Strategy::Greedy, 4).unwrap();
        assert_eq!(rep.aggregate.success_rate, 1.0);
    }

    #[test]
    fn local_sampler_must_stay_inside() {
        let sys = rotation_system(&[0.1_f64]).unwrap();
        let u = Ball::new(Point::circle(0.5), 0.1).unwrap();
        let outside = |_: &mut ChaCha8Rng| Point::circle(0.9);
        let r = check_local_hyper_minimal(
            &sys,
            &u,
            &outside,
            6.0,
            0.1,
            3,
            &[0.01],
            &SearchBudget::default(),
            &Strategy::Greedy,
            1,
        );
        assert!(matches!(r, Err(crate::Error::Input(_))));
        let single = |_: &mut ChaCha8Rng| Point::circle(0.5);
        let rep = check_local_hyper_minimal(
            &sys,
            &u,
            &single,
            6.0,
            0.1,
            3,
            &[0.01],
            &SearchBudget::default(),
            &Strategy::Greedy,
            1,
        )
        .unwrap();
        assert_eq!(rep.samples.len(), 3);
    }
}
