use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use surface_ac::config::{InitMode, RunConfig, RunManifest};
use surface_ac::export::{self, SweepResult, SweepRow};
use surface_ac::mesh::{read_mesh_data, shapes, validate as validate_mesh, MeshData, TriangleMesh};
use surface_ac::one_dim::{self, OneDimError};
use surface_ac::patterns;
use surface_ac::solver::{run_with, Discretization};

use crate::{InitArg, OnedArgs, SimArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Input,
    Numerical,
}

impl Kind {
    pub fn code(self) -> u8 {
        match self {
            Kind::Input => 2,
            Kind::Numerical => 3,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

type Result<T> = std::result::Result<T, Failure>;

trait Classify<T> {
    fn input(self) -> Result<T>;
    fn numerical(self) -> Result<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for std::result::Result<T, E> {
    fn input(self) -> Result<T> {
        self.map_err(|e| Failure {
            kind: Kind::Input,
            error: e.into(),
        })
    }

    fn numerical(self) -> Result<T> {
        self.map_err(|e| Failure {
            kind: Kind::Numerical,
            error: e.into(),
        })
    }
}

type Header = Vec<(String, String)>;

fn base_config(path: Option<&Path>) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = path {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .input()?;
        config
            .apply(&text)
            .with_context(|| format!("in config {}", path.display()))
            .input()?;
    }
    Ok(config)
}

fn sim_config(args: &SimArgs) -> Result<RunConfig> {
    let mut c = base_config(args.config.as_deref())?;
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got `{kv}`"))
            .input()?;
        c.set(k.trim(), v.trim()).input()?;
    }
    if let Some(m) = &args.mesh {
        c.mesh = m.clone();
    }
    let s = &mut c.solver;
    s.b = args.b.unwrap_or(s.b);
    s.epsilon = args.eps.unwrap_or(s.epsilon);
    s.dt = args.dt.unwrap_or(s.dt);
    s.max_iterations = args.iters.unwrap_or(s.max_iterations);
    s.seed = args.seed.unwrap_or(s.seed);
    if let Some(mode) = args.init {
        c.init.mode = match mode {
            InitArg::Random => InitMode::Random,
            InitArg::Localized => InitMode::Localized,
        };
    }
    c.init.center = args.center.unwrap_or(c.init.center);
    c.init.radius = args.radius.unwrap_or(c.init.radius);
    c.init.amplitude = args.amplitude.unwrap_or(c.init.amplitude);
    c.init.background = args.background.unwrap_or(c.init.background);
    c.solver.validate().input()?;
    if !(c.init.amplitude > 0.0 && c.init.amplitude.is_finite()) {
        return Err(anyhow!("amplitude must be positive, got {}", c.init.amplitude)).input();
    }
    if c.init.mode == InitMode::Localized && c.init.radius < 1 {
        return Err(anyhow!("radius must be at least 1 hop")).input();
    }
    if !(c.dead_band >= 0.0) {
        return Err(anyhow!("dead_band must be non-negative, got {}", c.dead_band)).input();
    }
    Ok(c)
}

fn mesh_data(spec: &str) -> Result<MeshData> {
    match shapes::builtin(spec) {
        Some(data) => data.map_err(|m| anyhow!(m)).input(),
        None => read_mesh_data(spec, None).input(),
    }
}

fn load_mesh(spec: &str) -> Result<TriangleMesh> {
    TriangleMesh::from_data(mesh_data(spec)?)
        .with_context(|| format!("mesh {spec}"))
        .input()
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .with_context(|| format!("creating {}", path.display()))
        .input()
}

fn write_file(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(dir, name)?;
    f(&mut w)
        .and_then(|()| w.flush())
        .with_context(|| format!("writing {}", dir.join(name).display()))
        .input()
}

fn header(command: &str, config: &RunConfig, mesh: &TriangleMesh) -> Header {
    let mut h = vec![
        ("command".to_string(), command.to_string()),
        ("vertices".to_string(), mesh.vertex_count().to_string()),
        ("faces".to_string(), mesh.face_count().to_string()),
    ];
    h.extend(config.entries().into_iter().map(|(k, v)| (k.to_string(), v)));
    h
}

fn write_manifest(
    command: &str,
    config_path: Option<&Path>,
    out: &Path,
    config: &RunConfig,
    outputs: &[&str],
) -> Result<()> {
    let manifest = RunManifest {
        command: command.to_string(),
        config_path: config_path.map(PathBuf::from),
        mesh: config.mesh.clone(),
        output_dir: out.to_path_buf(),
        config: config.clone(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    };
    write_file(out, "manifest.json", |w| writeln!(w, "{}", manifest.to_json()))
}

fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))
        .input()
}

pub fn run(args: &SimArgs) -> Result<()> {
    let config = sim_config(args)?;
    let mesh = load_mesh(&config.mesh)?;
    let disc = Discretization::new(mesh, config.solver.area_convention).input()?;
    let (u0, region) = config.init.build(&disc.mesh, config.solver.seed).input()?;
    prepare_out(&args.out)?;

    let outcome = run_with(&disc, u0, &config.solver).numerical()?;
    let u = &outcome.field.values;
    let report = patterns::classify(&disc, u, config.dead_band).numerical()?;
    let mut text = report.to_string();
    text.push_str(&format!("steps = {}\n", outcome.field.time_level));
    text.push_str(&format!("termination = {:?}\n", outcome.termination).to_lowercase());
    if let Some(last) = outcome.trace.last() {
        text.push_str(&format!("final_energy = {}\n", last.energy));
    }
    if let Some(region) = &region {
        let score = patterns::locality_score(&disc, u, region, patterns::DEFAULT_DILATION_HOPS).numerical()?;
        text.push_str(&format!("support_vertices = {}\n", region.vertices.len()));
        text.push_str(&format!("inside_variance = {}\n", score.inside_variance));
        match score.outside_variance {
            Some(v) => text.push_str(&format!("outside_variance = {v}\n")),
            None => text.push_str("outside_variance = none\n"),
        }
    }

    let h = header("run", &config, &disc.mesh);
    let out = &args.out;
    write_file(out, "field.ply", |w| export::write_ply(w, &disc.mesh, u, &h))?;
    write_file(out, "field.txt", |w| export::write_field(w, u))?;
    write_file(out, "trace.csv", |w| export::write_trace_csv(w, &outcome.trace, &h))?;
    write_file(out, "report.txt", |w| export::write_report(w, &text, &h))?;
    write_file(out, "report.json", |w| writeln!(w, "{}", report.to_json()))?;
    let outputs = ["field.ply", "field.txt", "trace.csv", "report.txt", "report.json"];
    write_manifest("run", args.config.as_deref(), out, &config, &outputs)?;
    print!("{text}");
    println!("output = {}", out.display());
    Ok(())
}

pub fn sweep(args: &SimArgs, b_list: Option<&str>) -> Result<()> {
    let mut config = sim_config(args)?;
    if let Some(list) = b_list {
        config.set("b_list", list).input()?;
    }
    let mesh = load_mesh(&config.mesh)?;
    let disc = Discretization::new(mesh, config.solver.area_convention).input()?;
    let (u0, _) = config.init.build(&disc.mesh, config.solver.seed).input()?;
    prepare_out(&args.out)?;

    let rows: Vec<SweepRow> = config
        .b_list
        .iter()
        .map(|&b| {
            let mut solver = config.solver.clone();
            solver.b = b;
            let outcome = run_with(&disc, u0.clone(), &solver)
                .map_err(|e| e.to_string())
                .and_then(|o| {
                    let report =
                        patterns::classify(&disc, &o.field.values, config.dead_band).map_err(|e| e.to_string())?;
                    let final_energy = o.trace.last().map_or(f64::NAN, |s| s.energy);
                    Ok(SweepResult {
                        class: report.class,
                        minority_fraction: report.minority_fraction,
                        component_count: report.minority_components,
                        final_energy,
                    })
                });
            match &outcome {
                Ok(r) => println!(
                    "b = {b}: {} (minority {:.3}, {} components)",
                    r.class, r.minority_fraction, r.component_count
                ),
                Err(e) => println!("b = {b}: error: {e}"),
            }
            SweepRow { b, outcome }
        })
        .collect();

    let h = header("sweep", &config, &disc.mesh);
    write_file(&args.out, "sweep.csv", |w| export::write_sweep_csv(w, &rows, &h))?;
    write_manifest("sweep", args.config.as_deref(), &args.out, &config, &["sweep.csv"])?;
    println!("output = {}", args.out.join("sweep.csv").display());
    Ok(())
}

pub fn oned(args: &OnedArgs) -> Result<()> {
    let mut config = base_config(args.config.as_deref())?;
    let o = &mut config.one_dim;
    config.solver.b = args.b.unwrap_or(config.solver.b);
    o.u0 = args.u0.unwrap_or(o.u0);
    o.du0 = args.du0.unwrap_or(o.du0);
    o.x_start = args.x_start.unwrap_or(o.x_start);
    o.x_end = args.x_end.unwrap_or(o.x_end);
    o.samples = args.samples.unwrap_or(o.samples);
    o.tolerance = args.tolerance.unwrap_or(o.tolerance);
    let o = config.one_dim.clone();
    let b = config.solver.b;

    let profile = match one_dim::integrate_stationary(o.u0, o.du0, b, (o.x_start, o.x_end), &o.settings()) {
        Ok(p) => p,
        Err(e @ (OneDimError::BlowUp { .. } | OneDimError::StepUnderflow(_) | OneDimError::TooManySteps(_))) => {
            return Err(e).numerical()
        }
        Err(e) => return Err(e).input(),
    };
    prepare_out(&args.out)?;
    let fi = one_dim::first_integral(&profile);
    let curvature = profile.mean_second_difference();
    let mut text = String::new();
    text.push_str(&format!("b = {b}\n"));
    text.push_str(&format!("first_integral = {}\n", fi.c));
    text.push_str(&format!("first_integral_drift = {:e}\n", fi.drift));
    text.push_str(&format!("mean_second_difference = {curvature}\n"));
    let shape = if curvature > 0.0 {
        "concave_up"
    } else if curvature < 0.0 {
        "concave_down"
    } else {
        "flat"
    };
    text.push_str(&format!("concavity = {shape}\n"));
    if b == 0.0 {
        // the kink through (x_start, u0) when the launch lies on it
        if fi.c.abs() < 1e-8 && o.u0.abs() < 1.0 && o.du0 > 0.0 {
            let shift = std::f64::consts::SQRT_2 * o.u0.atanh() - o.x_start;
            let err = profile
                .x
                .iter()
                .zip(&profile.u)
                .map(|(x, u)| (u - one_dim::kink(x + shift).0).abs())
                .fold(0.0, f64::max);
            text.push_str(&format!("kink_max_error = {err:e}\n"));
        } else {
            text.push_str("kink_max_error = not_applicable\n");
        }
    }

    let mut h: Header = vec![("command".into(), "oned".into()), ("b".into(), b.to_string())];
    for (k, v) in config.entries() {
        if matches!(k, "u0" | "du0" | "x_start" | "x_end" | "samples" | "ode_tolerance") {
            h.push((k.to_string(), v));
        }
    }
    write_file(&args.out, "profile.csv", |w| export::write_profile_csv(w, &profile, &h))?;
    write_file(&args.out, "oned_report.txt", |w| export::write_report(w, &text, &h))?;
    write_manifest(
        "oned",
        args.config.as_deref(),
        &args.out,
        &config,
        &["profile.csv", "oned_report.txt"],
    )?;
    print!("{text}");
    println!("output = {}", args.out.display());
    Ok(())
}

pub fn validate(spec: &str, json: bool) -> Result<()> {
    let data = mesh_data(spec)?;
    let d = validate_mesh(&data);
    if json {
        println!("{}", d.to_json());
    } else {
        print!("{d}");
    }
    if d.is_clean() {
        Ok(())
    } else {
        Err(anyhow!("{spec}: {} defects", d.defect_count())).input()
    }
}
