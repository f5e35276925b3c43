//! Property batteries of the three examples, written as report bundles.

use serde::Serialize;
use serde_json::json;

use super::{radius_for_measure, write_file, ExampleName, Outcome, RunConfig};
use crate::criteria::{
    check_hyper_minimal, check_local_hyper_minimal, check_minimality_density, check_overlap_number,
    invariant_hull_coverage, sample_rng, SearchBudget, Strategy,
};
use crate::error::Result;
use crate::geom::{dist, sample_in_ball, sample_uniform, sphere_radius, Ball, Manifold, Point};
use crate::ifs::{apply_word, enumerate_words, fiberwise_orbit, IfsSystem, Letter, Word};
use crate::zoo::{
    compute_k, equicontinuity_check, lebesgue_number, omega_construction, word_rotation_axis, CircleOmega,
    TorusExample, TorusReturn,
};

/// One line of a battery summary.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: serde_json::Value,
}

struct Battery<'a> {
    cfg: &'a RunConfig,
    dir: std::path::PathBuf,
    checks: Vec<Check>,
}

impl Battery<'_> {
    fn check(&mut self, name: &str, passed: bool, value: impl Serialize) {
        let value = serde_json::to_value(value).expect("check value serialises");
        self.checks.push(Check { name: name.to_string(), passed, value });
    }

    fn overlap(&mut self, m: Manifold, radii: &[f64]) -> Result<()> {
        let rep = check_overlap_number(m, &self.cfg.overlap, radii, 250, 0, self.cfg.seed)?;
        self.cfg.write_report(&self.dir, "overlap", &rep)?;
        self.check("overlap_min_margin_positive", rep.aggregate.min_margin > 0.0, rep.aggregate.min_margin);
        Ok(())
    }

    fn density(&mut self, sys: &IfsSystem<f64>, eps: f64) -> Result<()> {
        let x = sample_uniform(sys.manifold(), &mut sample_rng(self.cfg.seed, 1));
        let rep = check_minimality_density(sys, &x, eps, 1_000_000)?;
        self.cfg.write_json(&self.dir, "density.json", &rep)?;
        self.check("orbit_eps_dense", rep.dense, json!({ "eps": eps, "steps": rep.steps_used }));
        Ok(())
    }

    fn coverage(&mut self, sys: &IfsSystem<f64>, eps: f64) -> Result<()> {
        let m = sys.manifold();
        let center = sample_uniform(m, &mut sample_rng(self.cfg.seed, 2));
        let radius = radius_for_measure(m, 0.01)?;
        let cov = invariant_hull_coverage(sys, &Ball::new(center, radius)?, eps, 5000, 20_000_000)?;
        let mut text = String::from("depth,coverage\n");
        for (d, c) in cov.coverage.iter().enumerate() {
            text += &format!("{d},{c}\n");
        }
        write_file(&self.dir, "coverage.csv", text.as_bytes())?;
        let last = cov.last();
        self.cfg.write_json(
            &self.dir,
            "coverage.json",
            &json!({ "center": center.coords(), "radius": radius, "eps": eps, "coverage": cov }),
        )?;
        self.check("hull_coverage_at_least_0.99", last >= 0.99, last);
        Ok(())
    }

    fn finish(self, name: ExampleName) -> Result<Outcome> {
        let holds = self.checks.iter().all(|c| c.passed);
        self.cfg.write_json(
            &self.dir,
            "summary.json",
            &json!({ "example": name, "holds": holds, "checks": self.checks }),
        )?;
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let mut summary = format!(
            "example {}: {}/{} checks passed; bundle in {}",
            serde_json::to_value(name).expect("name serialises").as_str().unwrap_or_default(),
            self.checks.len() - failed.len(),
            self.checks.len(),
            self.dir.display()
        );
        if !failed.is_empty() {
            summary += &format!("; failed: {}", failed.join(", "));
        }
        Ok(Outcome { holds, summary })
    }
}

pub(super) fn run(cfg: &RunConfig, name: ExampleName) -> Result<Outcome> {
    let stem = match name {
        ExampleName::Circle => "example_circle",
        ExampleName::Torus => "example_torus",
        ExampleName::Sphere => "example_sphere",
    };
    let mut b = Battery { cfg, dir: cfg.out_dir.join(stem), checks: Vec::new() };
    match name {
        ExampleName::Circle => circle(&mut b)?,
        ExampleName::Torus => torus(&mut b)?,
        ExampleName::Sphere => sphere(&mut b)?,
    }
    b.finish(name)
}

fn circle(b: &mut Battery) -> Result<()> {
    let cfg = b.cfg.circle;
    let conditions = cfg.conditions();
    let sys: IfsSystem<f64> = cfg.build()?;
    b.check("arc_conditions", conditions.all(), &conditions);
    let k = compute_k(cfg.beta, cfg.gamma)?;
    b.check("k_at_least_2", k >= 2, k);
    let lebesgue = lebesgue_number(&[cfg.i1, cfg.i2]);
    b.check("lebesgue_number_positive", lebesgue > 0.0, lebesgue);

    let n = 100_000;
    let x = sample_uniform(Manifold::Circle, &mut sample_rng(b.cfg.seed, 0));
    let run = omega_construction(&sys, &x, n, 0.0)?;
    let freq = run.first_symbol_frequency();
    let target = (k - 1) as f64 / k as f64;
    b.check(
        "omega_frequency_within_0.01",
        (freq - target).abs() <= 0.01,
        json!({ "frequency": freq, "target": target }),
    );
    // the maps themselves must reproduce the rotation orbit at every prefix
    let actual = fiberwise_orbit(&sys, &run.word, &x)?;
    let mut worst: f64 = 0.0;
    for (p, q) in actual.iter().zip(&run.orbit) {
        worst = worst.max(dist(p, q)?);
    }
    b.check("omega_prefixes_are_rotations", worst < 1e-12, worst);
    b.cfg.write_json(
        &b.dir,
        "omega.json",
        &json!({
            "start": x.coords(),
            "length": n,
            "frequency": freq,
            "target": target,
            "max_prefix_deviation": worst,
        }),
    )?;

    b.overlap(Manifold::Circle, &[0.01, 0.02, 0.05, 0.1])?;
    let omega = CircleOmega { system: &sys };
    let budget = SearchBudget { max_word_len: 5000, ..b.cfg.budget };
    let rep = check_hyper_minimal(&sys, 6.0, lebesgue, 100, &[0.02], &budget, &Strategy::Custom(&omega), b.cfg.seed)?;
    b.cfg.write_report(&b.dir, "hyper_minimal", &rep)?;
    b.check("witnesses_for_all_pairs", rep.holds(), rep.aggregate.success_rate);
    b.density(&sys, 1e-3)?;
    b.coverage(&sys, 1e-3)
}

fn torus(b: &mut Battery) -> Result<()> {
    let ex: TorusExample<f64> = b.cfg.torus.build()?;
    let region = ex.affine_region();
    let base = b.cfg.torus.base;
    let a = b.cfg.torus.linear;
    let mut rng = sample_rng(b.cfg.seed, 0);
    let (mut affine_err, mut inverse_err, mut power_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let z = sample_in_ball(&region, &mut rng);
        let c = z.coords();
        let v = [c[0] - base[0], c[1] - base[1]];
        let expected =
            Point::torus(base[0] + a[0][0] * v[0] + a[0][1] * v[1], base[1] + a[1][0] * v[0] + a[1][1] * v[1]);
        affine_err = affine_err.max(dist(&ex.h(&z), &expected)?);
        let u = sample_uniform(Manifold::Torus2, &mut rng);
        inverse_err = inverse_err.max(dist(&ex.h_inv(&ex.h(&u)), &u)?).max(dist(&ex.h(&ex.h_inv(&u)), &u)?);
    }
    for _ in 0..100 {
        let mut p = sample_uniform(Manifold::Torus2, &mut rng);
        let start = p;
        for n in 1..=20 {
            p = ex.system.apply_letter(Letter::forward(0), &p);
            power_err = power_err.max(dist(&p, &ex.power(n, &start))?);
        }
    }
    b.check("affine_identity_on_region", affine_err <= 1e-14, affine_err);
    b.check("two_sided_inverse_1e-9", inverse_err < 1e-9, inverse_err);
    b.check("power_identity_1e-9", power_err < 1e-9, power_err);

    b.overlap(Manifold::Torus2, &[0.01, 0.02, 0.05, 0.1])?;
    let u = Ball::new(region.center, 0.5 * region.radius)?;
    let sampler = move |rng: &mut rand_chacha::ChaCha8Rng| sample_in_ball(&u, rng);
    let ret = TorusReturn { example: &ex };
    let budget = SearchBudget { max_word_len: 100_000, ..b.cfg.budget };
    let rep = check_local_hyper_minimal(
        &ex.system,
        &u,
        &sampler,
        6.0,
        0.5,
        100,
        &[0.01],
        &budget,
        &Strategy::Custom(&ret),
        b.cfg.seed,
    )?;
    b.cfg.write_report(&b.dir, "return_index", &rep)?;
    nj_histogram(b, &rep.samples)?;
    b.check("return_index_for_all_pairs", rep.holds(), rep.aggregate.success_rate);
    b.density(&ex.system, 1e-2)?;
    b.coverage(&ex.system, 1e-2)
}

/// Counts of the return indices by decade, plus the pairs with none.
fn nj_histogram(b: &Battery, rows: &[crate::criteria::SampleRow]) -> Result<()> {
    let mut bins = [0usize; 6];
    let mut missing = 0;
    for row in rows {
        match &row.word {
            Some(w) if row.found => bins[(w.len().max(1) as f64).log10().floor().min(5.0) as usize] += 1,
            _ => missing += 1,
        }
    }
    let mut text = String::from("n_min,n_max,count\n");
    for (i, c) in bins.iter().enumerate() {
        text += &format!("{},{},{c}\n", 10u64.pow(i as u32), 10u64.pow(i as u32 + 1) - 1);
    }
    text += &format!("none,none,{missing}\n");
    write_file(&b.dir, "nj_histogram.csv", text.as_bytes())?;
    Ok(())
}

fn sphere(b: &mut Battery) -> Result<()> {
    let cfg = b.cfg.sphere;
    let sys: IfsSystem<f64> = cfg.build()?;
    let rho = sphere_radius::<f64>();
    let mut pole_residual: f64 = 0.0;
    for (g, axis) in [(0, [0.0, 0.0, rho]), (1, [rho, 0.0, 0.0])] {
        for sign in [1.0, -1.0] {
            let p = Point::sphere(axis.map(|c| sign * c));
            pole_residual = pole_residual.max(dist(&sys.apply_letter(Letter::forward(g), &p), &p)?);
        }
    }
    b.check("poles_fixed_1e-12", pole_residual < 1e-12, pole_residual);
    let formula = cfg.formula_deviation::<f64>(1000, b.cfg.seed)?;
    b.check("formula_matches_matrix_1e-12", formula < 1e-12, formula);
    let fwd = equicontinuity_check(&sys, 1000, 20, false, b.cfg.seed)?;
    let both = equicontinuity_check(&sys, 1000, 20, true, b.cfg.seed)?;
    let dev = fwd.max_deviation.max(both.max_deviation);
    b.check("isometry_deviation_1e-12", dev < 1e-12, dev);
    b.cfg.write_json(&b.dir, "equicontinuity.json", &[fwd, both])?;
    fixed_point_table(b, &sys)?;

    b.overlap(Manifold::Sphere2, &[0.01, 0.05, 0.1])?;
    b.density(&sys, 0.05)?;
    let rep = check_hyper_minimal(&sys, 6.0, 0.5, 50, &[0.05], &b.cfg.budget, &Strategy::Greedy, b.cfg.seed)?;
    b.cfg.write_report(&b.dir, "hyper_minimal", &rep)?;
    b.check("greedy_witnesses_for_all_pairs", rep.holds(), rep.aggregate.success_rate);
    b.coverage(&sys, 1e-2)
}

/// Axis, angle and fixed-point residual of every word of length at most 6
/// over the generators and their inverses.
fn fixed_point_table(b: &mut Battery, sys: &IfsSystem<f64>) -> Result<()> {
    let mut text = String::from("word,axis_x,axis_y,axis_z,angle,residual,identity\n");
    let (mut worst, mut words, mut identities): (f64, usize, usize) = (0.0, 0, 0);
    let probe = sample_uniform(Manifold::Sphere2, &mut sample_rng(b.cfg.seed, 3));
    for w in enumerate_words(sys.len(), 6, true, u64::MAX)?.filter(|w: &Word| !w.is_empty()) {
        let rot = word_rotation_axis(sys, &w)?;
        words += 1;
        let row = match rot.axis {
            Some(a) => {
                worst = worst.max(rot.residual);
                format!("{w},{},{},{},{},{},false\n", a[0], a[1], a[2], rot.angle, rot.residual)
            }
            None => {
                // numerically the identity: every point is fixed
                identities += 1;
                let moved = dist(&apply_word(sys, &w, &probe)?, &probe)?;
                worst = worst.max(moved);
                format!("{w},,,,0,{moved},true\n")
            }
        };
        text += &row;
    }
    write_file(&b.dir, "fixed_points.csv", text.as_bytes())?;
    b.check(
        "every_short_word_has_fixed_point_1e-9",
        worst < 1e-9,
        json!({ "words": words, "identities": identities, "max_residual": worst }),
    );
    Ok(())
}
