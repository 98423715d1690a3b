//! Scenario orchestration: each scenario renders its outputs in memory, then
//! [`run_scenario`] writes them and the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use subquantum::collapse::{self, visibility_under_collapse};
use subquantum::lattice::{self, LatticeRun};
use subquantum::rng;
use subquantum::superposition::{
    self, double_slit, product_rule_check, two_particle_intensity, two_path_intensity,
    GradientCorrelation, PathWave, SuperpositionSetup, Vec3,
};
use subquantum::walkers::WalkerEnsemble;
use subquantum::{DiffusivitySchedule, Exec};

use crate::config::{ConfigError, Scenario, ScenarioConfig};
use crate::output::{write_atomic, Artifact, Csv, FileRecord, RunManifest};
use crate::svg;
use crate::validate;

/// Substream label for the random path instances of the product-rule table.
pub const PRODUCT_RULE_LABEL: u64 = 0x5052_4f44_5255_4c45;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{scenario}: {source}")]
    Model {
        scenario: Scenario,
        source: subquantum::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Outputs of one scenario, not yet written.
#[derive(Debug, Clone, Default)]
pub struct Rendered {
    pub artifacts: Vec<Artifact>,
    pub timings: BTreeMap<String, f64>,
    /// Number of failed checks (only for `validate`).
    pub failed_checks: usize,
}

impl Rendered {
    fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings
            .insert(phase.to_string(), start.elapsed().as_secs_f64());
        out
    }

    fn push(&mut self, artifact: Artifact) {
        self.artifacts.push(artifact);
    }
}

impl ScenarioConfig {
    pub fn schedule(&self) -> DiffusivitySchedule {
        if self.lattice.diffusivity_exponent == 1.0 {
            DiffusivitySchedule::Linear
        } else {
            DiffusivitySchedule::Power {
                exponent: self.lattice.diffusivity_exponent,
            }
        }
    }
}

/// Renders every output of `scenario` in memory.
pub fn render(cfg: &ScenarioConfig, scenario: Scenario, exec: &Exec) -> Result<Rendered, RunError> {
    let model = |source| RunError::Model { scenario, source };
    let mut out = Rendered::default();
    match scenario {
        Scenario::Dispersion => dispersion(cfg, exec, &mut out).map_err(model)?,
        Scenario::Trajectories => trajectories(cfg, exec, &mut out).map_err(model)?,
        Scenario::Interfere => interfere(cfg, exec, &mut out).map_err(model)?,
        Scenario::Entangle => entangle(cfg, &mut out).map_err(model)?,
        Scenario::Collapse => collapse_sweep(cfg, exec, &mut out).map_err(model)?,
        Scenario::Validate => {
            let report = out.time("checks", || validate::run_all(cfg, exec));
            out.failed_checks = report.failed();
            out.push(Artifact::new("validate.json", report.to_json()));
        }
    }
    Ok(out)
}

fn lattice_run(cfg: &ScenarioConfig, exec: &Exec) -> subquantum::Result<LatticeRun> {
    let lc = cfg.lattice.build(&cfg.packet)?;
    lattice::run(cfg.packet, lc, exec)
}

fn dispersion(cfg: &ScenarioConfig, exec: &Exec, out: &mut Rendered) -> subquantum::Result<()> {
    let spec = cfg.packet;
    let run = out.time("lattice", || lattice_run(cfg, exec))?;
    let mut csv = Csv::new(&["t", "sigma2_analytic", "sigma2_cml", "rel_err"]);
    let mut analytic_pts = Vec::new();
    let mut cml_pts = Vec::new();
    for &(t, var) in &run.variance_series {
        let exact = spec.variance(t)?;
        csv.row(&[t, exact, var, (var - exact).abs() / exact]);
        analytic_pts.push((t, exact));
        cml_pts.push((t, var));
    }
    out.push(csv.into_artifact("variance.csv"));

    let mut ec = cfg.ensemble.build(cfg.seed)?;
    ec.schedule = cfg.schedule();
    let mut csv = Csv::new(&[
        "t",
        "sigma2_analytic",
        "sigma2_walkers",
        "stderr",
        "pearson_init_displacement",
    ]);
    let mut walker_pts = Vec::new();
    out.time("walkers", || -> subquantum::Result<()> {
        let mut ens = WalkerEnsemble::sample_initial(spec, ec, exec)?;
        for k in 1..=cfg.ensemble.outputs {
            ens.advance_to(ec.horizon * k as f64 / cfg.ensemble.outputs as f64, exec)?;
            let t = ens.t();
            let m = ens.moments(exec);
            let rho = ens
                .orthogonality_stats(exec)
                .map(|r| r.0)
                .unwrap_or(f64::NAN);
            csv.row(&[t, spec.variance(t)?, m.variance, m.stderr_variance, rho]);
            walker_pts.push((t, m.variance));
        }
        Ok(())
    })?;
    out.push(csv.into_artifact("walkers.csv"));
    if cfg.emit_svg {
        let plot = svg::line_chart(
            "packet variance",
            "t",
            "sigma^2",
            &[
                ("analytic", analytic_pts),
                ("lattice", cml_pts),
                ("walkers", walker_pts),
            ],
        );
        out.push(Artifact::new("dispersion.svg", plot));
    }
    Ok(())
}

/// At most `max` evenly strided indices into `0..len`.
pub fn stride_indices(len: usize, max: usize) -> Vec<usize> {
    let stride = len.div_ceil(max).max(1);
    (0..len).step_by(stride).collect()
}

fn trajectories(cfg: &ScenarioConfig, exec: &Exec, out: &mut Rendered) -> subquantum::Result<()> {
    let spec = cfg.packet;
    let run = out.time("lattice", || lattice_run(cfg, exec))?;
    let qs = lattice::nine_quantiles();
    let tracks = out.time("quantiles", || {
        lattice::extract_quantile_trajectories(&run.fields, &qs)
    })?;

    let mut header = vec!["t".to_string(), "sigma_analytic".into(), "sigma_cml".into()];
    header.extend(qs.iter().map(|q| format!("x_q{q:.1}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&header);
    for (k, field) in run.fields.iter().enumerate() {
        let mut row = vec![field.t(), spec.sigma(field.t())?, field.variance().sqrt()];
        row.extend(tracks.iter().map(|tr| tr.samples[k].1));
        csv.row(&row);
    }
    out.push(csv.into_artifact("trajectories.csv"));

    let n = run.fields[0].values().len();
    let cols = stride_indices(n, 256);
    let mut csv = Csv::new(&["t", "x", "density"]);
    for field in &run.fields {
        for &i in &cols {
            csv.row(&[field.t(), field.x(i), field.values()[i]]);
        }
    }
    out.push(csv.into_artifact("intensity.csv"));

    if cfg.emit_svg {
        let plot_cols = stride_indices(n, 128);
        // Plot in the co-moving frame so a drifting packet stays centred.
        let xs: Vec<f64> = plot_cols
            .iter()
            .map(|&i| run.fields[0].config().cell_center(i))
            .collect();
        let times: Vec<f64> = run.fields.iter().map(|f| f.t()).collect();
        let rows: Vec<Vec<f64>> = run
            .fields
            .iter()
            .map(|f| plot_cols.iter().map(|&i| f.values()[i]).collect())
            .collect();
        let lines: Vec<Vec<(f64, f64)>> = tracks
            .iter()
            .map(|tr| {
                tr.samples
                    .iter()
                    .map(|&(t, x)| (t, x - spec.x0 - spec.v * t))
                    .collect()
            })
            .collect();
        out.push(Artifact::new(
            "trajectories.svg",
            svg::spacetime(
                "intensity and nine quantile trajectories",
                &xs,
                &times,
                &rows,
                &lines,
            ),
        ));
    }
    Ok(())
}

/// `points` values evenly covering `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn interfere(cfg: &ScenarioConfig, exec: &Exec, out: &mut Rendered) -> subquantum::Result<()> {
    let s = &cfg.superposition;
    let mut csv = Csv::new(&["dphi", "p_double_slit", "p_reference", "intensity_two_path"]);
    let mut slit = Vec::new();
    let mut general = Vec::new();
    for dphi in superposition::phase_grid(s.points) {
        let p = double_slit(dphi);
        let i2 = two_path_intensity(s.r_a, s.r_b, dphi, s.sign)?;
        csv.row(&[dphi, p, 0.5 * (1.0 + dphi.cos()), i2]);
        slit.push((dphi, p));
        general.push((dphi, i2));
    }
    out.push(csv.into_artifact("interference.csv"));

    let mut csv = Csv::new(&[
        "ensemble",
        "alpha",
        "mean_full",
        "target",
        "stderr",
        "deviation_stderr",
        "rejected",
    ]);
    out.time("reduction", || -> subquantum::Result<()> {
        for (label, corr) in [
            ("isotropic", GradientCorrelation::Isotropic),
            ("aligned", GradientCorrelation::Aligned),
        ] {
            for &alpha in &s.alphas {
                let r =
                    superposition::ktot_reduction_check(&s.reduction(alpha, cfg.seed, corr), exec)?;
                csv.labeled_row(
                    label,
                    &[
                        alpha,
                        r.mean_full,
                        r.target,
                        r.stderr,
                        r.deviation_in_stderr(),
                        r.rejected as f64,
                    ],
                );
            }
        }
        Ok(())
    })?;
    out.push(csv.into_artifact("reduction.csv"));
    if cfg.emit_svg {
        out.push(Artifact::new(
            "interference.svg",
            svg::line_chart(
                "two-path interference",
                "dphi",
                "P",
                &[("double slit", slit), ("two path", general)],
            ),
        ));
    }
    Ok(())
}

/// Random path with amplitude, action and gradients drawn uniformly.
pub fn random_path<R: Rng + ?Sized>(rng: &mut R, hbar: f64) -> subquantum::Result<PathWave> {
    let mut v = || {
        Vec3::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
        )
    };
    let (s_grad, r_grad) = (v(), v());
    PathWave::new(
        rng.random_range(0.1..3.0),
        rng.random_range(-5.0..5.0) * hbar,
        s_grad,
        r_grad,
        hbar,
    )
}

fn entangle(cfg: &ScenarioConfig, out: &mut Rendered) -> subquantum::Result<()> {
    let e = &cfg.entangle;
    let (k1, k2) = (Vec3::new(e.k1, 0.0, 0.0), Vec3::new(e.k2, 0.0, 0.0));
    let mut csv = Csv::new(&["r", "dphi", "intensity", "cos2"]);
    let mut pts = Vec::new();
    for r in linspace(0.0, e.r_max, e.points) {
        let dphi = r * (e.k1 - e.k2);
        let p = two_particle_intensity(Vec3::new(r, 0.0, 0.0), k1, k2);
        csv.row(&[r, dphi, p, dphi.cos().powi(2)]);
        pts.push((r, p));
    }
    out.push(csv.into_artifact("entangle.csv"));

    let mut csv = Csv::new(&["instance", "lhs", "rhs", "abs_diff"]);
    for i in 0..e.product_instances {
        let mut rng = rng::stream(cfg.seed, PRODUCT_RULE_LABEL, i as u64, 0);
        let p1 = random_path(&mut rng, cfg.packet.hbar)?;
        let p2 = random_path(&mut rng, cfg.packet.hbar)?;
        let (lhs, rhs) = product_rule_check(&p1, &p2);
        csv.row(&[i as f64, lhs, rhs, (lhs - rhs).abs()]);
    }
    out.push(csv.into_artifact("product_rule.csv"));
    if cfg.emit_svg {
        out.push(Artifact::new(
            "entangle.svg",
            svg::line_chart("two-particle correlation", "r", "P", &[("intensity", pts)]),
        ));
    }
    Ok(())
}

fn collapse_sweep(cfg: &ScenarioConfig, exec: &Exec, out: &mut Rendered) -> subquantum::Result<()> {
    let s = &cfg.superposition;
    let setup = SuperpositionSetup::two_path(s.r_a.max(1e-300), s.r_b.max(1e-300), 0.0, s.sign)?;
    let mut csv = Csv::new(&["A", "visibility", "stderr"]);
    let mut pts = Vec::new();
    out.time("visibility", || -> subquantum::Result<()> {
        for &a in &cfg.collapse.rates {
            let v = visibility_under_collapse(
                &setup,
                &cfg.collapse_model(a),
                cfg.collapse.n_samples,
                cfg.seed,
                exec,
            )?;
            csv.row(&[a, v.visibility, v.stderr]);
            pts.push((a, v.visibility));
        }
        Ok(())
    })?;
    out.push(csv.into_artifact("collapse.csv"));

    let a_max = cfg
        .collapse
        .rates
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let model = cfg.collapse_model(a_max);
    let grid = model.grid()?;
    let p = model.density()?;
    let (pa, pma) = collapse::probabilities_from_ratio(model.a, model.t, model.epsilon)?;
    let ext = collapse::external_fluctuation(&model.profile, model.omega, &grid)?;
    let osm = collapse::total_fluctuation(&p, 0.0, 0.0, &grid, model.hbar)?;
    let tot = collapse::total_fluctuation(&p, pa, pma, &grid, model.hbar)?;
    let mut csv = Csv::new(&["x", "density", "dp_ext", "dp_osmotic", "dp_tot"]);
    for (i, x) in grid.points().enumerate() {
        csv.row(&[x, p[i], ext[i], osm[i], tot[i]]);
    }
    out.push(csv.into_artifact("collapse_fields.csv"));
    if cfg.emit_svg {
        out.push(Artifact::new(
            "collapse.svg",
            svg::line_chart(
                "fringe visibility",
                "A",
                "visibility",
                &[("visibility", pts)],
            ),
        ));
    }
    Ok(())
}

/// Where outputs go: the explicit flag, then the config, then
/// `SUBQUANTUM_OUTPUT_DIR`, then `subquantum-out`.
pub fn resolve_output_dir(flag: Option<&Path>, cfg: &ScenarioConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os("SUBQUANTUM_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("subquantum-out"))
}

/// Renders the scenario, writes all outputs into `dir`, then writes
/// `manifest.json` last.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    scenario: Scenario,
    dir: &Path,
    exec: &Exec,
    workers: Option<usize>,
) -> Result<(RunManifest, Rendered), RunError> {
    let start = Instant::now();
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Io { path, source }
    };
    let mut rendered = render(cfg, scenario, exec)?;
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut files = Vec::with_capacity(rendered.artifacts.len());
    for art in &rendered.artifacts {
        write_atomic(dir, &art.name, &art.bytes).map_err(io(&dir.join(&art.name)))?;
        files.push(FileRecord {
            name: art.name.clone(),
            bytes: art.bytes.len(),
            sha256: art.sha256(),
        });
    }
    rendered
        .timings
        .insert("total".into(), start.elapsed().as_secs_f64());
    let manifest = RunManifest {
        tool: "subquantum",
        version: env!("CARGO_PKG_VERSION"),
        scenario: scenario.name().into(),
        seed: cfg.seed,
        workers,
        config: cfg
            .entries()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        files,
        timings: rendered.timings.clone(),
    };
    write_atomic(dir, "manifest.json", manifest.to_json().as_bytes())
        .map_err(io(&dir.join("manifest.json")))?;
    Ok((manifest, rendered))
}
