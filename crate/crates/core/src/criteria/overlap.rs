//! The overlap inequality
//! `m(B(x,r) ∩ B(y,r−r/Θ)) − t·m(B(x,r)) > ℓ·m(B(x,r−r/Θ))` for `y ∈ B(x,r/Θ)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sample_rng, SampleRow, VerifierReport};
use crate::error::{bail, Result};
use crate::geom::intersection_monte_carlo;
use crate::geom::{
    ball_intersection_measure, ball_measure, check_radius, dist, sample_in_ball, sample_uniform, Ball, Manifold, Point,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OverlapParams {
    pub theta: f64,
    pub t: f64,
    pub ell: f64,
}

impl Default for OverlapParams {
    fn default() -> Self {
        OverlapParams { theta: 6.0, t: 0.1, ell: 0.8 }
    }
}

impl OverlapParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 1.0) {
            bail!(Input, "theta = {} must exceed 1", self.theta);
        }
        if !(0.0..=0.5).contains(&self.t) {
            bail!(Input, "t = {} must lie in [0, 1/2]", self.t);
        }
        if !(self.ell > 0.0 && self.ell < 1.0) {
            bail!(Input, "ell = {} must lie in (0, 1)", self.ell);
        }
        Ok(())
    }
}

/// `[(1 − ℓ)·m(B(r − r/Θ)) − t·m(B(r))] / m(B(r))`: the margin once the
/// small ball is known to sit inside the large one.
pub fn closed_form_relative_margin(m: Manifold, p: &OverlapParams, r: f64) -> Result<f64> {
    let big = ball_measure(m, r)?;
    let small = ball_measure(m, r - r / p.theta)?;
    Ok(((1.0 - p.ell) * small - p.t * big) / big)
}

/// Per-radius summary of an overlap run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusSummary {
    pub r: f64,
    pub closed_form: f64,
    pub min_margin: f64,
    pub max_margin: f64,
    /// Relative margin with the intersection estimated by Monte Carlo for
    /// the first sample at this radius.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo_std_err: Option<f64>,
}

/// Samples `x` uniformly and `y ∈ B(x, r/Θ)` for every radius, evaluates
/// the relative margin (LHS − RHS) / m(B(r)) and reports the minimum.
/// With `mc_samples > 0` the first sample of each radius is cross-checked
/// by Monte Carlo.
pub fn check_overlap_number(
    m: Manifold,
    params: &OverlapParams,
    radii: &[f64],
    samples_per_radius: usize,
    mc_samples: usize,
    seed: u64,
) -> Result<VerifierReport> {
    let start = std::time::Instant::now();
    params.validate()?;
    if radii.is_empty() || samples_per_radius == 0 {
        bail!(Input, "need at least one radius and one sample per radius");
    }
    for &r in radii {
        check_radius(m, r)?;
    }
    let jobs: Vec<(usize, usize)> =
        (0..radii.len()).flat_map(|i| (0..samples_per_radius).map(move |j| (i, j))).collect();
    let rows: Vec<(SampleRow, Option<(f64, f64)>)> = jobs
        .par_iter()
        .map(|&(i, j)| -> Result<_> {
            let id = i * samples_per_radius + j;
            let r = radii[i];
            let mut rng = sample_rng(seed, id as u64);
            let x: Point<f64> = sample_uniform(m, &mut rng);
            let y = sample_in_ball(&Ball::new(x, r / params.theta)?, &mut rng);
            let small = r - r / params.theta;
            let big_m = ball_measure(m, r)?;
            let small_m = ball_measure(m, small)?;
            let inter = ball_intersection_measure(&x, r, &y, small)?;
            let margin = (inter.value - params.t * big_m - params.ell * small_m) / big_m;
            let mc = if j == 0 && mc_samples > 0 {
                let est = intersection_monte_carlo(&x, r, &y, small, mc_samples, seed ^ id as u64)?;
                Some(((est.value - params.t * big_m - params.ell * small_m) / big_m, est.std_err / big_m))
            } else {
                None
            };
            let row = SampleRow {
                id,
                x: x.coords(),
                y: y.coords(),
                r,
                found: margin > 0.0,
                certified_distance: dist(&x, &y)?,
                margin,
                word: None,
                note: None,
            };
            Ok((row, mc))
        })
        .collect::<Result<_>>()?;
    let mut summaries = Vec::with_capacity(radii.len());
    for (i, &r) in radii.iter().enumerate() {
        let chunk = &rows[i * samples_per_radius..(i + 1) * samples_per_radius];
        let margins = chunk.iter().map(|(row, _)| row.margin);
        summaries.push(RadiusSummary {
            r,
            closed_form: closed_form_relative_margin(m, params, r)?,
            min_margin: margins.clone().fold(f64::INFINITY, f64::min),
            max_margin: margins.fold(f64::NEG_INFINITY, f64::max),
            monte_carlo: chunk[0].1.map(|v| v.0),
            monte_carlo_std_err: chunk[0].1.map(|v| v.1),
        });
    }
    let parameters = serde_json::json!({
        "manifold": m,
        "theta": params.theta,
        "t": params.t,
        "ell": params.ell,
        "radii": radii.len(),
        "samples_per_radius": samples_per_radius,
        "mc_samples": mc_samples,
    });
    let mut report = VerifierReport::new(
        "overlap_number",
        m.name(),
        parameters,
        seed,
        rows.into_iter().map(|(row, _)| row).collect(),
    );
    report.details = serde_json::json!({ "radii": summaries });
    report.runtime = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_and_torus_closed_forms() {
        let p = OverlapParams::default();
        for r in [0.01, 0.1, 0.3, 0.45] {
            let c = closed_form_relative_margin(Manifold::Circle, &p, r).unwrap();
            assert!((c - 1.0 / 15.0).abs() < 1e-12);
        }
        let c = closed_form_relative_margin(Manifold::Torus2, &p, 0.1).unwrap();
        assert!((c - (5.0 / 36.0 - 0.1)).abs() < 1e-12);
        // degenerate parameters: margin tends to m(B(r - r/Θ)) / m(B(r))
        let q = OverlapParams { theta: 6.0, t: 0.0, ell: 1e-9 };
        let c = closed_form_relative_margin(Manifold::Circle, &q, 0.1).unwrap();
        assert!((c - 5.0 / 6.0).abs() < 1e-8);
    }

    #[test]
    fn sampled_margin_is_independent_of_y() {
        let p = OverlapParams::default();
        let rep = check_overlap_number(Manifold::Circle, &p, &[0.05, 0.2], 50, 0, 1).unwrap();
        assert!(rep.holds());
        for row in &rep.samples {
            assert!((row.margin - 1.0 / 15.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_parameters() {
        let p = OverlapParams { theta: 0.5, ..OverlapParams::default() };
        assert!(check_overlap_number(Manifold::Circle, &p, &[0.1], 1, 0, 1).is_err());
        assert!(check_overlap_number(Manifold::Circle, &OverlapParams::default(), &[0.7], 1, 0, 1).is_err());
        let bad = OverlapParams { t: 0.5, ell: 0.99, ..OverlapParams::default() };
        let rep = check_overlap_number(Manifold::Circle, &bad, &[0.1], 3, 0, 1).unwrap();
        assert!(!rep.holds() && rep.aggregate.min_margin < 0.0);
    }
}
