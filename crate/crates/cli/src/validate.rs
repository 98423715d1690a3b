//! The acceptance suite: fifteen checks, each reported as pass or fail with
//! a short measured detail.

use std::cell::OnceCell;
use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use subquantum::analytics::{
    fisher_identity, quantum_potential_quadrature, zitterbewegung_frequency,
};
use subquantum::collapse::{self, visibility_under_collapse};
use subquantum::lattice::{self, LatticeRun};
use subquantum::numerics::{gaussian, UniformGrid};
use subquantum::rng;
use subquantum::superposition::{
    self, double_slit, ktot_reduction_check, product_rule_check, two_particle_intensity,
    GradientCorrelation, PathWave, Sign, SuperpositionSetup, Vec3,
};
use subquantum::walkers::WalkerEnsemble;
use subquantum::{Exec, PacketSpec};

use crate::config::{Scenario, ScenarioConfig};
use crate::scenario::{random_path, render};

/// Substream label for the random draws made by the checks themselves.
const VALIDATE_LABEL: u64 = 0x5641_4c49_4441_5445;

pub const CHECKS: [(u8, &str); 15] = [
    (1, "variance law, lattice vs analytic"),
    (2, "quantile trajectory invariance"),
    (3, "velocity field vs trajectory derivative"),
    (4, "walker variance and orthogonality"),
    (5, "uncertainty product"),
    (6, "Fisher-information identity"),
    (7, "quantum potential bookkeeping"),
    (8, "double slit pattern"),
    (9, "superposition reduction to k_tot^2"),
    (10, "Born normalization"),
    (11, "two-particle correlation and product rule"),
    (12, "narrow packet spreads faster"),
    (13, "collapse suite"),
    (14, "zitterbewegung frequency"),
    (15, "determinism across reruns and workers"),
];

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

type Outcome = Result<(bool, String), subquantum::Error>;

struct WalkerStudy {
    variance: f64,
    stderr: f64,
    expected: f64,
    rho: f64,
    products: Vec<(f64, f64)>,
}

struct Suite<'a> {
    cfg: &'a ScenarioConfig,
    exec: &'a Exec,
    lattice: OnceCell<Result<LatticeRun, subquantum::Error>>,
    walkers: OnceCell<Result<WalkerStudy, subquantum::Error>>,
}

impl Suite<'_> {
    fn lattice(&self) -> Result<&LatticeRun, subquantum::Error> {
        self.lattice
            .get_or_init(|| {
                let lc = self.cfg.lattice.build(&self.cfg.packet)?;
                lattice::run(self.cfg.packet, lc, self.exec)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn walkers(&self) -> Result<&WalkerStudy, subquantum::Error> {
        self.walkers
            .get_or_init(|| {
                let spec = self.cfg.packet;
                let mut ec = self.cfg.ensemble.build(self.cfg.seed)?;
                ec.schedule = self.cfg.schedule();
                let mut ens = WalkerEnsemble::sample_initial(spec, ec, self.exec)?;
                let mut products = Vec::new();
                for t in [0.5, 1.0, 2.0] {
                    ens.advance_to(t, self.exec)?;
                    let u = ens
                        .uncertainty_from_histogram(self.cfg.ensemble.histogram_bins, self.exec)?;
                    products.push((t, u.product));
                }
                let m = ens.moments(self.exec);
                let (rho, _) = ens.orthogonality_stats(self.exec)?;
                Ok(WalkerStudy {
                    variance: m.variance,
                    stderr: m.stderr_variance,
                    expected: spec.variance(ens.t())?,
                    rho,
                    products,
                })
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn run(&self, id: u8) -> Outcome {
        match id {
            1 => self.variance_law(),
            2 => self.trajectory_invariance(),
            3 => self.velocity_field(),
            4 => self.brownian(),
            5 => self.uncertainty(),
            6 => fisher(),
            7 => self.quantum_potential(),
            8 => double_slit_check(),
            9 => self.reduction(),
            10 => self.born(),
            11 => self.two_particle(),
            12 => self.ordering(),
            13 => self.collapse(),
            14 => zitterbewegung(),
            15 => self.determinism(),
            _ => Ok((false, format!("no check with id {id}"))),
        }
    }

    fn variance_law(&self) -> Outcome {
        let run = self.lattice()?;
        let spec = self.cfg.packet;
        let mut worst: f64 = 0.0;
        for &(t, var) in &run.variance_series {
            let exact = spec.variance(t)?;
            worst = worst.max((var - exact).abs() / exact);
        }
        let times = run.variance_series.len() - 1;
        Ok((
            worst < 0.01 && times >= 20,
            format!("max rel err {worst:.3e} over {times} output times (bound 1e-2, >= 20 times)"),
        ))
    }

    fn trajectory_invariance(&self) -> Outcome {
        let run = self.lattice()?;
        let spec = self.cfg.packet;
        let one_sigma = Normal::standard().cdf(1.0);
        let mut qs = lattice::nine_quantiles();
        qs.push(one_sigma);
        let tracks = lattice::extract_quantile_trajectories(&run.fields, &qs)?;
        let mut worst: f64 = 0.0;
        for tr in &tracks[..9] {
            let (mean, sd) = tr.ratio_stats(&run.fields);
            // x_q / sigma averages to zero on the median, so use its spread directly
            let cv = if (tr.q - 0.5).abs() < 1e-12 {
                sd
            } else {
                sd / mean.abs()
            };
            worst = worst.max(cv);
        }
        let &(t_end, x_end) = tracks[9].samples.last().expect("run has fields");
        let track = (x_end - spec.x0 - spec.v * t_end) / spec.sigma0;
        let expected = spec.sigma(t_end)? / spec.sigma0;
        let rel = (track - expected).abs() / expected;
        Ok((
            worst < 1e-3 && rel < 0.01,
            format!(
                "worst ratio spread {worst:.3e} (bound 1e-3); one-sigma track at t={t_end} is {track:.6} vs {expected:.6} (rel {rel:.2e}, bound 1e-2)"
            ),
        ))
    }

    fn velocity_field(&self) -> Outcome {
        let spec = self.cfg.packet;
        let mut worst: f64 = 0.0;
        for i in 0..100u64 {
            let mut r = rng::stream(self.cfg.seed, VALIDATE_LABEL, 3, i);
            let magnitude = r.random_range(0.5..3.0) * spec.sigma0;
            let x_init = if r.random::<bool>() {
                magnitude
            } else {
                -magnitude
            };
            let t = r.random_range(0.1..3.0);
            let h = 1e-4 * (1.0 + t);
            let fd =
                (spec.trajectory(x_init, t + h)? - spec.trajectory(x_init, t - h)?) / (2.0 * h);
            let v = spec.velocity_field(spec.trajectory(x_init, t)?, t)?;
            worst = worst.max((v - fd).abs() / v.abs());
        }
        Ok((
            worst < 1e-6,
            format!("max rel err {worst:.3e} at 100 points (bound 1e-6)"),
        ))
    }

    fn brownian(&self) -> Outcome {
        let w = self.walkers()?;
        let z = (w.variance - w.expected).abs() / w.stderr;
        Ok((
            z <= 3.0 && w.rho.abs() < 0.003,
            format!(
                "N={} variance {:.6} vs {:.6} ({z:.2} stderr, bound 3); |pearson| {:.2e} (bound 3e-3)",
                self.cfg.ensemble.n_walkers,
                w.variance,
                w.expected,
                w.rho.abs()
            ),
        ))
    }

    fn uncertainty(&self) -> Outcome {
        let spec = self.cfg.packet;
        let half = 0.5 * spec.hbar;
        let mut analytic_ok = true;
        for t in [0.0, 0.5, 1.0, 2.0] {
            analytic_ok &= (spec.uncertainty_product(t)? - half).abs() <= 1e-14 * half;
        }
        let w = self.walkers()?;
        let mut worst: f64 = 0.0;
        let mut parts = Vec::new();
        for &(t, p) in &w.products {
            let rel = (p - half).abs() / half;
            worst = worst.max(rel);
            parts.push(format!("t={t}: {p:.5}"));
        }
        Ok((
            analytic_ok && worst < 0.02,
            format!(
                "analytic exact: {analytic_ok}; histogram {} (max rel err {worst:.2e}, bound 2e-2)",
                parts.join(", ")
            ),
        ))
    }

    fn quantum_potential(&self) -> Outcome {
        let spec = self.cfg.packet;
        let avg = spec.avg_quantum_potential();
        let half_omega = 0.5 * spec.hbar * spec.scales().omega;
        let quad = quantum_potential_quadrature(&spec, 1 << 17)?;
        let (d1, d2) = ((avg - half_omega).abs(), (avg - quad).abs());
        Ok((
            d1 < 1e-12 && d2 < 1e-8,
            format!("|avg - hbar omega/2| = {d1:.2e} (bound 1e-12); |avg - quadrature| = {d2:.2e} (bound 1e-8)"),
        ))
    }

    fn reduction(&self) -> Outcome {
        let s = &self.cfg.superposition;
        let mut ok = true;
        let mut parts = Vec::new();
        for &alpha in &s.alphas {
            let iso = ktot_reduction_check(
                &s.reduction(alpha, self.cfg.seed, GradientCorrelation::Isotropic),
                self.exec,
            )?;
            let ctl = ktot_reduction_check(
                &s.reduction(alpha, self.cfg.seed, GradientCorrelation::Aligned),
                self.exec,
            )?;
            ok &= iso.within(3.0) && !ctl.within(3.0);
            parts.push(format!(
                "alpha={alpha}: {:.2} stderr, control {:.1} stderr",
                iso.deviation_in_stderr(),
                ctl.deviation_in_stderr()
            ));
        }
        Ok((ok, format!("{} (n={})", parts.join("; "), s.n_samples)))
    }

    fn born(&self) -> Outcome {
        let hbar = self.cfg.packet.hbar;
        let mut worst: f64 = 0.0;
        for n in [1usize, 2, 4, 8] {
            for set in 0..100u64 {
                let mut r = rng::stream(self.cfg.seed, VALIDATE_LABEL, 10, (n as u64) << 32 | set);
                let mut paths = (0..n)
                    .map(|_| random_path(&mut r, hbar))
                    .collect::<Result<Vec<_>, _>>()?;
                if n == 2 {
                    // two-path setups need equal |k_tot|
                    let scale = (paths[0].k_tot_sqr() / paths[1].k_tot_sqr()).sqrt();
                    let b = paths[1];
                    paths[1] = PathWave::from_wave_vectors(
                        b.amplitude(),
                        b.phase(),
                        b.k() * scale,
                        b.k_u() * scale,
                        hbar,
                    )?;
                }
                let setup = SuperpositionSetup::new(paths, Sign::Plus)?;
                worst = worst.max((setup.born_total() - 1.0).abs());
            }
        }
        Ok((
            worst < 1e-12,
            format!("max |sum |c|^2 - 1| = {worst:.2e} over 400 sets (bound 1e-12)"),
        ))
    }

    fn two_particle(&self) -> Outcome {
        let (k1, k2) = (Vec3::new(1.0, 0.2, 0.0), Vec3::new(-1.0, 0.2, 0.0));
        let mut worst_cos: f64 = 0.0;
        for r in crate::scenario::linspace(0.0, PI, 361) {
            let pos = Vec3::new(r, 0.3, -0.7);
            let exact = pos.dot(&(k1 - k2)).cos().powi(2);
            worst_cos = worst_cos.max((two_particle_intensity(pos, k1, k2) - exact).abs());
        }
        let mut worst_rule: f64 = 0.0;
        for i in 0..1000u64 {
            let mut r = rng::stream(self.cfg.seed, VALIDATE_LABEL, 11, i);
            let p1 = random_path(&mut r, self.cfg.packet.hbar)?;
            let p2 = random_path(&mut r, self.cfg.packet.hbar)?;
            let (lhs, rhs) = product_rule_check(&p1, &p2);
            worst_rule = worst_rule.max((lhs - rhs).abs() / rhs.max(1.0));
        }
        Ok((
            worst_cos <= 1e-15 && worst_rule <= 1e-12,
            format!("cos^2 max err {worst_cos:.2e} (bound 1e-15); product rule max rel err {worst_rule:.2e} on 1000 instances (bound 1e-12)"),
        ))
    }

    fn ordering(&self) -> Outcome {
        let wide = PacketSpec {
            sigma0: 1.0,
            ..self.cfg.packet
        };
        let narrow = PacketSpec {
            sigma0: 0.5,
            ..self.cfg.packet
        };
        let ratio = narrow.diffusivity_rate() / wide.diffusivity_rate();
        let spread = |spec: PacketSpec| -> Result<f64, subquantum::Error> {
            let lc = self.cfg.lattice.build(&spec)?;
            Ok(lattice::spreading_ratio(&lattice::run(
                spec, lc, self.exec,
            )?))
        };
        let (sw, sn) = (spread(wide)?, spread(narrow)?);
        Ok((
            ratio == 4.0 && sn > sw,
            format!("dD/dt ratio {ratio} (expected 4 exactly); spreading ratio narrow {sn:.5} vs wide {sw:.5}"),
        ))
    }

    fn collapse(&self) -> Outcome {
        let mut worst_id: f64 = 0.0;
        for i in 0..1000u64 {
            let mut r = rng::stream(self.cfg.seed, VALIDATE_LABEL, 13, i);
            let (a, t, eps) = (
                r.random_range(-50.0..50.0),
                r.random_range(0.0..5.0),
                r.random_range(0.0..0.99),
            );
            let recip = collapse::dissipation_ratio(a, t)? * collapse::dissipation_ratio(-a, t)?;
            let (pa, pma) = collapse::probabilities_from_ratio(a, t, eps)?;
            worst_id = worst_id
                .max((recip - 1.0).abs())
                .max((pa + pma - eps).abs());
        }

        let model = self.cfg.collapse_model(1.0);
        let grid = model.grid()?;
        let p = model.density()?;
        let half = 0.5 * model.epsilon;
        let tot = collapse::total_fluctuation(&p, half, half, &grid, model.hbar)?;
        let osmotic_err = grid
            .points()
            .zip(&tot)
            .map(|(x, f)| (f - 0.5 * model.hbar * x / (model.sigma * model.sigma)).abs())
            .fold(0.0f64, f64::max);
        let dx2 = grid.step * grid.step;

        let setup = SuperpositionSetup::two_path(1.0, 1.0, 0.0, Sign::Plus)?;
        let mut vis = Vec::new();
        for a in [0.0, 0.5, 1.0, 2.0] {
            vis.push(visibility_under_collapse(
                &setup,
                &self.cfg.collapse_model(a),
                self.cfg.collapse.n_samples,
                self.cfg.seed,
                self.exec,
            )?);
        }
        let monotone = vis
            .windows(2)
            .all(|w| w[1].visibility <= w[0].visibility + 3.0 * w[0].stderr.max(w[1].stderr));
        let start_ok = vis[0].visibility == 1.0;
        let seq: Vec<String> = vis.iter().map(|v| format!("{:.4}", v.visibility)).collect();
        Ok((
            worst_id < 1e-12 && osmotic_err < dx2 && monotone && start_ok,
            format!(
                "identity err {worst_id:.1e} (bound 1e-12); osmotic err {osmotic_err:.1e} (bound dx^2 = {dx2:.1e}); visibility over A=0,0.5,1,2: {}",
                seq.join(", ")
            ),
        ))
    }

    fn determinism(&self) -> Outcome {
        let mut cfg = self.cfg.clone();
        cfg.lattice.cell_count = cfg.lattice.cell_count.min(512);
        cfg.lattice.outputs = cfg.lattice.outputs.min(20);
        cfg.ensemble.n_walkers = 20_000;
        cfg.ensemble.horizon = 0.5;
        cfg.ensemble.outputs = 5;
        cfg.superposition.n_samples = 10_000;
        cfg.collapse.n_samples = 10_000;
        cfg.entangle.product_instances = 100;
        cfg.emit_svg = true;
        let execs = [
            Exec::sequential(),
            Exec::with_workers(1)?,
            Exec::with_workers(3)?,
            self.exec.clone(),
        ];
        let mut compared = 0;
        for scenario in Scenario::ALL
            .into_iter()
            .filter(|s| *s != Scenario::Validate)
        {
            let mut reference: Option<Vec<_>> = None;
            for exec in execs.iter().chain(std::iter::once(&execs[0])) {
                let rendered = render(&cfg, scenario, exec)
                    .map_err(|e| subquantum::Error::Degenerate(e.to_string()))?;
                match &reference {
                    None => reference = Some(rendered.artifacts),
                    Some(r) if *r != rendered.artifacts => {
                        return Ok((false, format!("{scenario} output differs between runs")));
                    }
                    Some(_) => compared += rendered.artifacts.len(),
                }
            }
        }
        Ok((
            true,
            format!("{compared} files byte-identical across reruns and 1/3/default workers"),
        ))
    }
}

fn fisher() -> Outcome {
    let mut worst: f64 = 0.0;
    for sigma in [0.5, 1.0, 2.0] {
        let grid = UniformGrid::centered(0.0, 10.0 * sigma, 4096)?;
        let p = grid.sample(|x| gaussian(x, 0.0, sigma));
        let (lhs, rhs) = fisher_identity(&p, grid.step)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok((
        worst < 1e-6,
        format!("max |lhs - rhs| = {worst:.2e} for sigma 0.5, 1, 2 (bound 1e-6)"),
    ))
}

fn double_slit_check() -> Outcome {
    let worst = superposition::phase_grid(361)
        .into_iter()
        .map(|d| (double_slit(d) - 0.5 * (1.0 + d.cos())).abs())
        .fold(0.0f64, f64::max);
    let (p0, ppi) = (double_slit(0.0), double_slit(PI));
    Ok((
        worst <= 1e-15 && (p0 - 1.0).abs() <= 1e-15 && ppi.abs() <= 1e-15,
        format!("max err {worst:.2e} at 361 points (bound 1e-15); P(0) = {p0}, P(pi) = {ppi:.1e}"),
    ))
}

fn zitterbewegung() -> Outcome {
    let omega = zitterbewegung_frequency(9.1093837015e-31, 2.99792458e8, 1.054571817e-34)?;
    let rel = (omega - 7.76e20).abs() / 7.76e20;
    Ok((
        rel < 0.005,
        format!("electron omega = {omega:.4e} rad/s (rel {rel:.2e} from 7.76e20, bound 5e-3)"),
    ))
}

/// Runs the checks with the given ids, in order.
pub fn run_selected(cfg: &ScenarioConfig, exec: &Exec, ids: &[u8]) -> Report {
    let suite = Suite {
        cfg,
        exec,
        lattice: OnceCell::new(),
        walkers: OnceCell::new(),
    };
    let checks: Vec<CheckResult> = ids
        .iter()
        .map(|&id| {
            let name = CHECKS
                .iter()
                .find(|c| c.0 == id)
                .map(|c| c.1)
                .unwrap_or("unknown");
            let start = Instant::now();
            let (passed, detail) = suite
                .run(id)
                .unwrap_or_else(|e| (false, format!("error: {e}")));
            CheckResult {
                id,
                name,
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect();
    Report {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

pub fn run_all(cfg: &ScenarioConfig, exec: &Exec) -> Report {
    let ids: Vec<u8> = CHECKS.iter().map(|c| c.0).collect();
    run_selected(cfg, exec, &ids)
}
