//! Configuration-driven experiment runner behind the `heatreach` binary.
//!
//! Each subcommand reads one flat key–value config file (dotted
//! namespaces, one `key = value` per line, `#` comments), validates
//! every key before any computation starts — unknown keys are errors,
//! not warnings — runs one experiment, and writes CSV outputs plus a
//! `manifest.txt` echoing the full configuration, the library version,
//! and the wall time.
//!
//! Outputs are staged in memory and written only after the experiment
//! succeeds, so a failed run leaves no partial files.  Bodies are
//! deterministic: rerunning a config reproduces every CSV byte for
//! byte at any thread count (the manifest's two timestamp lines,
//! `started_at_unix` and `wall_time_seconds`, are the only fields that
//! vary).
//!
//! Exit codes: `0` success, `2` validation failure (bad config, bad
//! parameters, I/O), `3` numerical-guard trip (the experiment is
//! well-formed but would amplify roundoff past the configured limit;
//! the message says how to reshape it).
//!
//! The default output root is the current directory; set
//! `HEATREACH_OUTPUT_ROOT` to redirect relative `output.dir` values.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::csvio::{self, format_f64};
use crate::fdm::{crank_nicolson_disk, crank_nicolson_interval, FieldSample};
use crate::geometry::{
    distance_to_boundary, sample_compact_subset, ComplexPoint, DomainSpec, GridCounts,
};
use crate::layer::{
    boundary_operator_apply, dirichlet_solve_bie, single_layer_eval_real, volterra_solve,
    BoundaryDensity, SpaceTimeGrid,
};
use crate::onedim::{
    endpoint_kernel_ft, rep1_eval, solve_endpoint_densities, EndpointSignals, FrequencyGrid,
};
use crate::special::heat_kernel;
use crate::targets::{make_cutoff, CutoffBump, HolomorphicTarget, Monomial};
use crate::verify::{
    contour_shift_check, convergence_sweep, monodromy_detect, optimality_cross_check, LoopSpec,
    TubeCutoff,
};
use crate::wick::{roundtrip_verify, wick_synthesize, SynthesisGrids};
use crate::{Error, Result};

/// Reproducible experiments on heat-equation reachable sets.
#[derive(Debug, Parser)]
#[command(name = "heatreach", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Shared per-run arguments: a config file and an optional thread cap.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// Path to the experiment's key-value config file.
    pub config: PathBuf,
    /// Cap the data-parallel thread count (default: machine
    /// parallelism; results do not depend on this).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a compact subset of a domain's analyticity egg.
    EggSample(RunArgs),
    /// Solve the first-kind boundary integral equation for a
    /// single-layer density.
    BieSolve(RunArgs),
    /// Run the Crank-Nicolson reference solver from a target's trace.
    ForwardSolve(RunArgs),
    /// Recover endpoint control densities on a slab from Dirichlet
    /// traces.
    OnedimControls(RunArgs),
    /// Synthesize a boundary-control schedule steering a ball to a
    /// holomorphic target.
    WickSynthesize(RunArgs),
    /// Measure the small-time convergence of the cut-off heat evolution
    /// on an egg.
    VerifyConvergence(RunArgs),
    /// Check the contour-shift identity and the decay of its area
    /// correction.
    VerifyContour(RunArgs),
    /// Cross-check the singular control family against its closed form.
    VerifyOptimality(RunArgs),
    /// Continue the singular family around a loop and report the branch
    /// jump.
    VerifyMonodromy(RunArgs),
}

impl Command {
    /// The experiment-kind string the config file must name.
    pub fn kind(&self) -> &'static str {
        match self {
            Command::EggSample(_) => "egg-sample",
            Command::BieSolve(_) => "bie-solve",
            Command::ForwardSolve(_) => "forward-solve",
            Command::OnedimControls(_) => "onedim-controls",
            Command::WickSynthesize(_) => "wick-synthesize",
            Command::VerifyConvergence(_) => "verify-convergence",
            Command::VerifyContour(_) => "verify-contour",
            Command::VerifyOptimality(_) => "verify-optimality",
            Command::VerifyMonodromy(_) => "verify-monodromy",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::EggSample(a)
            | Command::BieSolve(a)
            | Command::ForwardSolve(a)
            | Command::OnedimControls(a)
            | Command::WickSynthesize(a)
            | Command::VerifyConvergence(a)
            | Command::VerifyContour(a)
            | Command::VerifyOptimality(a)
            | Command::VerifyMonodromy(a) => a,
        }
    }
}

/// Parsed flat key–value configuration with strict key accounting:
/// every key present in the file must be read by the experiment, and
/// [`ConfigReader::finish`] rejects leftovers by name.
pub struct ConfigReader {
    entries: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl ConfigReader {
    /// Parses `key = value` lines; `#` starts a comment line, blank
    /// lines are ignored, duplicate keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "config line {}: expected 'key = value', got '{line}'",
                    idx + 1
                ))
            })?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "config line {}: empty key",
                    idx + 1
                )));
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "config line {}: duplicate key '{key}'",
                    idx + 1
                )));
            }
        }
        Ok(Self {
            entries,
            used: BTreeSet::new(),
        })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.entries.get(key).cloned()
    }

    pub fn optional(&mut self, key: &str) -> Option<String> {
        self.take(key)
    }

    pub fn require(&mut self, key: &str) -> Result<String> {
        self.take(key)
            .ok_or_else(|| Error::InvalidArgument(format!("missing config key '{key}'")))
    }

    pub fn require_f64(&mut self, key: &str) -> Result<f64> {
        parse_f64_value(key, &self.require(key)?)
    }

    pub fn optional_f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|v| parse_f64_value(key, &v)).transpose()
    }

    pub fn require_usize(&mut self, key: &str) -> Result<usize> {
        let v = self.require(key)?;
        v.parse::<usize>().map_err(|_| {
            Error::InvalidArgument(format!("config key '{key}': expected an integer, got '{v}'"))
        })
    }

    pub fn optional_usize(&mut self, key: &str) -> Result<Option<usize>> {
        self.take(key)
            .map(|v| {
                v.parse::<usize>().map_err(|_| {
                    Error::InvalidArgument(format!(
                        "config key '{key}': expected an integer, got '{v}'"
                    ))
                })
            })
            .transpose()
    }

    pub fn optional_bool(&mut self, key: &str) -> Result<Option<bool>> {
        self.take(key)
            .map(|v| match v.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(Error::InvalidArgument(format!(
                    "config key '{key}': expected true or false, got '{other}'"
                ))),
            })
            .transpose()
    }

    /// Comma-separated list of doubles.
    pub fn require_f64_list(&mut self, key: &str) -> Result<Vec<f64>> {
        let v = self.require(key)?;
        v.split(',')
            .map(|f| parse_f64_value(key, f))
            .collect::<Result<Vec<f64>>>()
            .and_then(|list| {
                if list.is_empty() {
                    Err(Error::InvalidArgument(format!(
                        "config key '{key}': empty list"
                    )))
                } else {
                    Ok(list)
                }
            })
    }

    /// Fails if the file contains keys the experiment never read.
    pub fn finish(&self) -> Result<()> {
        let unknown: Vec<&str> = self
            .entries
            .keys()
            .filter(|k| !self.used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "unknown config keys: {}",
                unknown.join(", ")
            )))
        }
    }

    /// All entries, sorted by key (for the manifest echo).
    pub fn iter(&self) -> impl Iterator<Item = (&String, &String)> {
        self.entries.iter()
    }
}

fn parse_f64_value(key: &str, raw: &str) -> Result<f64> {
    let raw = raw.trim();
    raw.parse::<f64>().map_err(|_| {
        Error::InvalidArgument(format!("config key '{key}': expected a number, got '{raw}'"))
    })
}

/// In-memory staging area: files materialize on disk only on success.
struct Staging {
    files: Vec<(String, Vec<u8>)>,
}

impl Staging {
    fn new() -> Self {
        Self { files: Vec::new() }
    }

    fn add(&mut self, name: &str) -> &mut Vec<u8> {
        self.files.push((name.to_string(), Vec::new()));
        &mut self.files.last_mut().unwrap().1
    }

    /// Writes every staged file; if any write fails, removes the ones
    /// already written so the directory never holds a partial run.
    fn commit(self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            if let Err(e) = std::fs::write(&path, bytes) {
                for p in &written {
                    let _ = std::fs::remove_file(p);
                }
                return Err(e.into());
            }
            written.push(path);
        }
        Ok(written)
    }
}

/// Resolves `output.dir` against `HEATREACH_OUTPUT_ROOT` (absolute
/// paths are used as given; the root defaults to the current
/// directory).
fn resolve_output_dir(dir: &str) -> PathBuf {
    let dir = PathBuf::from(dir);
    if dir.is_absolute() {
        return dir;
    }
    let root = std::env::var_os("HEATREACH_OUTPUT_ROOT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    root.join(dir)
}

/// Runs one experiment end to end: parse, validate, compute, commit.
pub fn run(command: &Command) -> Result<()> {
    let args = command.args();
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg = ConfigReader::parse(&text)?;

    let stated = cfg.require("experiment")?;
    if stated != command.kind() {
        return Err(Error::InvalidArgument(format!(
            "config names experiment '{stated}' but the subcommand is '{}'",
            command.kind()
        )));
    }
    let threads = match args.threads {
        Some(n) => Some(n),
        None => cfg.optional_usize("threads")?,
    };
    if let Some(n) = threads {
        if n > 0 {
            // First-come wins if a pool already exists (results never
            // depend on the width, so this is only a resource cap).
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    let out_dir = resolve_output_dir(&cfg.require("output.dir")?);

    let started = std::time::SystemTime::now();
    let clock = std::time::Instant::now();
    let mut staging = Staging::new();
    match command {
        Command::EggSample(_) => run_egg_sample(&mut cfg, &mut staging)?,
        Command::BieSolve(_) => run_bie_solve(&mut cfg, &mut staging)?,
        Command::ForwardSolve(_) => run_forward_solve(&mut cfg, &mut staging)?,
        Command::OnedimControls(_) => run_onedim_controls(&mut cfg, &mut staging)?,
        Command::WickSynthesize(_) => run_wick_synthesize(&mut cfg, &mut staging)?,
        Command::VerifyConvergence(_) => run_verify_convergence(&mut cfg, &mut staging)?,
        Command::VerifyContour(_) => run_verify_contour(&mut cfg, &mut staging)?,
        Command::VerifyOptimality(_) => run_verify_optimality(&mut cfg, &mut staging)?,
        Command::VerifyMonodromy(_) => run_verify_monodromy(&mut cfg, &mut staging)?,
    }

    let manifest = staging.add("manifest.txt");
    writeln!(manifest, "# heatreach run manifest")?;
    writeln!(manifest, "version = {}", env!("CARGO_PKG_VERSION"))?;
    for (k, v) in cfg.iter() {
        writeln!(manifest, "config.{k} = {v}")?;
    }
    let unix = started
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0);
    writeln!(manifest, "started_at_unix = {}", format_f64(unix))?;
    writeln!(
        manifest,
        "wall_time_seconds = {}",
        format_f64(clock.elapsed().as_secs_f64())
    )?;

    for path in staging.commit(&out_dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Shared config builders
// ---------------------------------------------------------------------------

fn read_domain(cfg: &mut ConfigReader) -> Result<DomainSpec> {
    match cfg.require("domain.kind")?.as_str() {
        "interval" => {
            DomainSpec::interval(cfg.require_f64("domain.a")?, cfg.require_f64("domain.b")?)
        }
        "ball" => DomainSpec::ball(
            cfg.require_f64_list("domain.center")?,
            cfg.require_f64("domain.radius")?,
        ),
        "polygon" => {
            let raw = cfg.require("domain.vertices")?;
            let mut vertices = Vec::new();
            for pair in raw.split(';') {
                let coords: Vec<&str> = pair.split(',').map(str::trim).collect();
                if coords.len() != 2 {
                    return Err(Error::InvalidArgument(format!(
                        "config key 'domain.vertices': expected 'x,y' pairs separated by \
                         ';', got '{pair}'"
                    )));
                }
                vertices.push([
                    parse_f64_value("domain.vertices", coords[0])?,
                    parse_f64_value("domain.vertices", coords[1])?,
                ]);
            }
            DomainSpec::polygon(vertices)
        }
        other => Err(Error::InvalidArgument(format!(
            "config key 'domain.kind': expected interval, ball, or polygon, got '{other}'"
        ))),
    }
}

fn read_target(cfg: &mut ConfigReader) -> Result<HolomorphicTarget> {
    match cfg.require("target.kind")?.as_str() {
        "polynomial" => {
            if let Some(raw) = cfg.optional("target.coeffs") {
                let coeffs: Vec<f64> = raw
                    .split(',')
                    .map(|c| parse_f64_value("target.coeffs", c))
                    .collect::<Result<_>>()?;
                return HolomorphicTarget::polynomial_1d(&coeffs);
            }
            let dim = cfg.require_usize("target.dim")?;
            let raw = cfg.require("target.monomials")?;
            let mut monomials = Vec::new();
            for term in raw.split(';') {
                let fields: Vec<&str> = term.split_whitespace().collect();
                if fields.len() != dim + 1 {
                    return Err(Error::InvalidArgument(format!(
                        "config key 'target.monomials': each term needs {dim} exponents \
                         and a coefficient, got '{term}'"
                    )));
                }
                let powers: Vec<u32> = fields[..dim]
                    .iter()
                    .map(|p| {
                        p.parse::<u32>().map_err(|_| {
                            Error::InvalidArgument(format!(
                                "config key 'target.monomials': bad exponent '{p}'"
                            ))
                        })
                    })
                    .collect::<Result<_>>()?;
                monomials.push(Monomial {
                    powers,
                    coeff: parse_f64_value("target.monomials", fields[dim])?,
                });
            }
            HolomorphicTarget::polynomial(monomials, dim)
        }
        "lorentzian" => HolomorphicTarget::lorentzian(
            cfg.require_f64("target.alpha")?,
            cfg.require_usize("target.dim")?,
        ),
        "pole-quotient" => HolomorphicTarget::pole_quotient(Complex64::new(
            cfg.require_f64("target.pole_re")?,
            cfg.require_f64("target.pole_im")?,
        )),
        "singular-e1" => HolomorphicTarget::singular_e1(
            cfg.require_f64("target.x0")?,
            Complex64::new(
                cfg.require_f64("target.a_re")?,
                cfg.require_f64("target.a_im")?,
            ),
        ),
        other => Err(Error::InvalidArgument(format!(
            "config key 'target.kind': expected polynomial, lorentzian, pole-quotient, \
             or singular-e1, got '{other}'"
        ))),
    }
}

fn read_cutoff(cfg: &mut ConfigReader) -> Result<CutoffBump> {
    make_cutoff(
        cfg.require_f64("cutoff.r_one")?,
        cfg.require_f64("cutoff.r_zero")?,
    )
}

fn read_counts(cfg: &mut ConfigReader) -> Result<GridCounts> {
    Ok(GridCounts {
        n_re: cfg.require_usize("grid.n_re")?,
        n_im: cfg.require_usize("grid.n_im")?,
    })
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

fn run_egg_sample(cfg: &mut ConfigReader, out: &mut Staging) -> Result<()> {
    let domain = read_domain(cfg)?;
    let margin = cfg.require_f64("margin")?;
    let counts = read_counts(cfg)?;
    cfg.finish()?;

    let points = sample_compact_subset(&domain, margin, counts)?;
    csvio::write_points(
        out.add("points.csv"),
        &points,
        &[
            ("experiment", "egg-sample".to_string()),
            ("domain", csvio::describe_domain(&domain)),
            ("margin", format_f64(margin)),
            ("count", points.len().to_string()),
        ],
    )
}

fn run_bie_solve(cfg: &mut ConfigReader, out: &mut Staging) -> Result<()> {
    let domain = read_domain(cfg)?;
    let t_final = cfg.require_f64("t_final")?;
    let nt = cfg.require_usize("grid.nt")?;
    let nb = cfg.optional_usize("grid.nb")?.unwrap_or(0);
    let data_kind = cfg.require("data.kind")?;
    match data_kind.as_str() {
        "manufactured" => {
            cfg.finish()?;
            let grid = SpaceTimeGrid::new(domain.clone(), t_final, nt, nb)?;
            // A smooth space-time density with both symmetric and
            // antisymmetric content across the boundary.
            let reference = BoundaryDensity::from_fn(&grid, |t, y| {
                Complex64::new(
                    (std::f64::consts::PI * t / t_final).sin() * (1.0 + 0.5 * y[0]),
                    0.0,
                )
            });
            let g = boundary_operator_apply(&grid, &reference)?;
            let solved = volterra_solve(&grid, &g)?;
            let rel_l2 = solved.rel_l2_distance(&reference);
            let meta = [("experiment", "bie-solve".to_string())];
            csvio::write_boundary_density(out.add("density.csv"), &solved, &meta)?;
            csvio::write_boundary_density(out.add("reference.csv"), &reference, &meta)?;
            csvio::write_report_row(
                out.add("report.csv"),
                &[
                    ("rel_l2_error", format_f64(rel_l2)),
                    ("nt", nt.to_string()),
                    ("nb", grid.nb().to_string()),
                ],
                &[("check", "manufactured density round trip".to_string())],
            )
        }
        "exterior-source" => {
            let source = cfg.require_f64_list("data.source")?;
            let t_offset = cfg.require_f64("data.t_offset")?;
            cfg.finish()?;
            if source.len() != domain.dimension() {
                return Err(Error::DimensionMismatch(format!(
                    "data.source has dimension {}, domain has {}",
                    source.len(),
                    domain.dimension()
                )));
            }
            if !(t_offset > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "data.t_offset must be positive, got {t_offset}"
                )));
            }
            if distance_to_boundary(&domain, &source)?.interior {
                return Err(Error::InvalidArgument(
                    "data.source must lie strictly outside the domain".into(),
                ));
            }
            let known = |t: f64, x: &[f64]| -> f64 {
                let diff: Vec<f64> = x.iter().zip(&source).map(|(a, b)| a - b).collect();
                heat_kernel(t + t_offset, &diff)
            };
            let grid = SpaceTimeGrid::new(domain.clone(), t_final, nt, nb)?;
            let g = BoundaryDensity::from_fn(&grid, |t, y| Complex64::new(known(t, y), 0.0));
            let q = dirichlet_solve_bie(&grid, &g)?;

            // Reproduce the exterior-source field at interior points on
            // the first axis.
            let (lo, hi) = domain.bounding_box();
            let center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
            let half = 0.5 * (hi[0] - lo[0]);
            let mut sup = 0.0_f64;
            let mut checked = 0usize;
            for frac in [-0.6, -0.3, 0.0, 0.3, 0.6] {
                let mut x = center.clone();
                x[0] += frac * half;
                if !distance_to_boundary(&domain, &x)?.interior {
                    continue;
                }
                let u = single_layer_eval_real(&q, t_final, &x)?;
                sup = sup.max((u - known(t_final, &x)).norm());
                checked += 1;
            }
            let meta = [("experiment", "bie-solve".to_string())];
            csvio::write_boundary_density(out.add("density.csv"), &q, &meta)?;
            csvio::write_report_row(
                out.add("report.csv"),
                &[
                    ("sup_error_at_t_final", format_f64(sup)),
                    ("interior_points_checked", checked.to_string()),
                    ("nt", nt.to_string()),
                    ("nb", grid.nb().to_string()),
                ],
                &[(
                    "check",
                    "Dirichlet data from an exterior heat-kernel source".to_string(),
                )],
            )
        }
        other => Err(Error::InvalidArgument(format!(
            "config key 'data.kind': expected manufactured or exterior-source, got '{other}'"
        ))),
    }
}

fn run_forward_solve(cfg: &mut ConfigReader, out: &mut Staging) -> Result<()> {
    let domain = read_domain(cfg)?;
    let target = read_target(cfg)?;
    let t_final = cfg.require_f64("t_final")?;
    let nt = cfg.require_usize("grid.nt")?;
    let d = domain.dimension();
    if target.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "target dimension {} vs domain dimension {d}",
            target.dim()
        )));
    }
    let field = match d {
        1 => {
            let nx = cfg.require_usize("grid.nx")?;
            let save_every = cfg.optional_usize("output.save_every")?;
            cfg.finish()?;
            let tf = target.clone();
            let u0 = move |x: &[f64]| tf.value_real(x).expect("dimension validated");
            let tf = target.clone();
            let g = move |_t: f64, y: &[f64]| tf.value_real(y).expect("dimension validated");
            let full = crank_nicolson_interval(&domain, t_final, nx, nt, u0, g)?;
            stride_rows(full, save_every.unwrap_or_else(|| (nt / 32).max(1)))
        }
        2 => {
            let nr = cfg.require_usize("grid.nr")?;
            let ntheta = cfg.require_usize("grid.ntheta")?;
            let save_every = cfg.optional_usize("output.save_every")?;
            cfg.finish()?;
            let tf = target.clone();
            let u0 = move |x: &[f64]| tf.value_real(x).expect("dimension validated");
            let tf = target.clone();
            let g = move |_t: f64, y: &[f64]| tf.value_real(y).expect("dimension validated");
            let full = crank_nicolson_disk(&domain, t_final, nr, ntheta, nt, u0, g)?;
            stride_rows(full, save_every.unwrap_or_else(|| (nt / 32).max(1)))
        }
        _ => {
            return Err(Error::InvalidDomain(format!(
                "the reference solver runs in dimensions 1 and 2, not {d}"
            )))
        }
    };
    csvio::write_field_sample(
        out.add("field.csv"),
        &field,
        &[
            ("experiment", "forward-solve".to_string()),
            ("t_final", format_f64(t_final)),
            ("nt", nt.to_string()),
        ],
    )
}

/// Keeps every `stride`-th time row (always the first and the last).
fn stride_rows(full: FieldSample, stride: usize) -> FieldSample {
    let stride = stride.max(1);
    let last = full.times.len() - 1;
    let keep: Vec<usize> = (0..=last)
        .filter(|&r| r % stride == 0 || r == last)
        .collect();
    let npoints = full.npoints();
    FieldSample {
        domain: full.domain.clone(),
        times: keep.iter().map(|&r| full.times[r]).collect(),
        spatial_grid: full.spatial_grid.clone(),
        values: keep
            .iter()
            .flat_map(|&r| full.values[r * npoints..(r + 1) * npoints].iter().copied())
            .collect(),
    }
}

fn run_onedim_controls(cfg: &mut ConfigReader, out: &mut Staging) -> Result<()> {
    let l_half = cfg.require_f64("l_half")?;
    let t_final = cfg.require_f64("t_final")?;
    let nt = cfg.require_usize("grid.nt")?;
    let kind = cfg.require("signal.kind")?;
    if kind != "sine-squared" {
        return Err(Error::InvalidArgument(format!(
            "config key 'signal.kind': only 'sine-squared' is available, got '{kind}'"
        )));
    }
    let amp1 = cfg.require_f64("signal.amp1")?;
    let amp2 = cfg.require_f64("signal.amp2")?;
    let pad = cfg.optional_usize("solver.pad_factor")?.unwrap_or(4);
    let taper = cfg.optional_f64("solver.taper")?.unwrap_or(0.25);
    let verify_nx = cfg.optional_usize("verify.nx")?;
    let verify_nt = cfg.optional_usize("verify.nt")?;
    cfg.finish()?;
    if verify_nx.is_some() != verify_nt.is_some() {
        return Err(Error::InvalidArgument(
            "verify.nx and verify.nt must be given together".into(),
        ));
    }

    let pulse = move |amp: f64| {
        move |t: f64| {
            let s = (std::f64::consts::PI * t / t_final).sin();
            amp * s * s
        }
    };
    let signals = EndpointSignals::from_fn(l_half, t_final, nt, pulse(amp1), pulse(amp2))?;
    let grid = FrequencyGrid::for_signals(&signals, pad, taper)?;
    let densities = solve_endpoint_densities(&signals, &grid)?;

    // Determinant scan of the endpoint kernel matrix over the decades
    // the solve actually touches.
    let mut det_min = f64::INFINITY;
    for k in 0..=240 {
        let tau = 1e-3 * 10f64.powf(k as f64 / 40.0);
        let det = endpoint_kernel_ft(tau, l_half)?.determinant().norm();
        det_min = det_min.min(det);
    }

    let meta = [("experiment", "onedim-controls".to_string())];
    csvio::write_endpoint_signals(out.add("signals.csv"), &signals, &meta)?;
    csvio::write_endpoint_densities(out.add("densities.csv"), &densities, &meta)?;

    let mut report = vec![
        ("roundtrip_rel_l2", format_f64(densities.roundtrip_rel_l2)),
        ("skipped_bins", densities.skipped_bins.to_string()),
        ("kernel_det_min_abs", format_f64(det_min)),
    ];
    if let (Some(nx), Some(nt_cn)) = (verify_nx, verify_nt) {
        let domain = DomainSpec::interval(-l_half, l_half)?;
        let h1 = signals.h1().to_vec();
        let h2 = signals.h2().to_vec();
        let g = move |t: f64, y: &[f64]| {
            let h = if y[0] < 0.0 { &h1 } else { &h2 };
            Complex64::new(sample_linear(h, t_final, t), 0.0)
        };
        let cn = crank_nicolson_interval(&domain, t_final, nx, nt_cn, |_| Complex64::new(0.0, 0.0), g)?;
        let last = cn.times.len() - 1;
        let mut sup = 0.0_f64;
        for (p, x) in cn.spatial_grid.iter().enumerate() {
            let direct = rep1_eval(&densities, t_final, &ComplexPoint::real(x.clone()))?;
            sup = sup.max((cn.value(last, p) - direct).norm());
        }
        report.push(("rep1_vs_reference_sup", format_f64(sup)));
    }
    csvio::write_report_row(out.add("report.csv"), &report, &meta)
}

/// Piecewise-linear sample of values on the uniform grid `[0, t_final]`.
fn sample_linear(values: &[f64], t_final: f64, t: f64) -> f64 {
    let n = values.len();
    let dt = t_final / (n - 1) as f64;
    let t = t.clamp(0.0, t_final);
    let k = ((t / dt).floor() as usize).min(n - 2);
    let lambda = ((t - k as f64 * dt) / dt).clamp(0.0, 1.0);
    (1.0 - lambda) * values[k] + lambda * values[k + 1]
}

fn run_wick_synthesize(cfg: &mut ConfigReader, out: &mut Staging) -> Result<()> {
    let domain = read_domain(cfg)?;
    let target = read_target(cfg)?;
    let t_final = cfg.require_f64("t_final")?;
    let cutoff = read_cutoff(cfg)?;
    let grids = SynthesisGrids {
        nx: cfg.require_usize("grid.nx")?,
        ntheta: cfg.optional_usize("grid.ntheta")?.unwrap_or(0),
        nt: cfg.require_usize("grid.nt")?,
    };
    let nt_solver = cfg.optional_usize("verify.nt_solver")?;
    cfg.finish()?;

    let schedule = wick_synthesize(&target, &domain, t_final, &cutoff, grids)?;
    csvio::write_schedule_initial(out.add("initial.csv"), &schedule)?;
    csvio::write_schedule_boundary(out.add("boundary.csv"), &schedule)?;
    if let Some(nt_solver) = nt_solver {
        let report = roundtrip_verify(&schedule, &target, nt_solver)?;
        csvio::write_report_row(
            out.add("report.csv"),
            &[
                ("sup_error", format_f64(report.sup_error)),
                ("l2_error", format_f64(report.l2_error)),
                (
                    "cutoff_tail_bound",
                    format_f64(schedule.metadata.cutoff_tail_bound),
                ),
                ("amplification", format_f64(schedule.metadata.amplification)),
                (
                    "final_step_mismatch",
                    format_f64(schedule.metadata.final_step_mismatch),
                ),
                ("solver_nt", nt_solver.to_string()),
            ],
            &[(
                "check",
                "schedule driven through the reference solver vs the target trace".to_string(),
            )],
        )?;
    }
    Ok(())
}

fn run_verify_convergence(cfg: &mut ConfigReader, out: &mut Staging) -> Result<()> {
    let domain = read_domain(cfg)?;
    let target = read_target(cfg)?;
    let cutoff = read_cutoff(cfg)?;
    let margin = cfg.require_f64("margin")?;
    let times = cfg.require_f64_list("times")?;
    let counts = read_counts(cfg)?;
    cfg.finish()?;

    let report = convergence_sweep(&target, &domain, &cutoff, margin, &times, counts)?;
    csvio::write_error_profile(
        out.add("sweep.csv"),
        &report.samples,
        &[
            ("experiment", "verify-convergence".to_string()),
            ("domain", csvio::describe_domain(&domain)),
            ("margin", format_f64(report.margin)),
            ("points", report.points.to_string()),
        ],
    )
}

fn run_verify_contour(cfg: &mut ConfigReader, out: &mut Staging) -> Result<()> {
    let target = read_target(cfg)?;
    let tube = TubeCutoff::new(
        cfg.require_f64("tube.l_inner")?,
        cfg.require_f64("tube.l_outer")?,
    )?;
    let raw_checks = cfg.require("checks")?;
    let decay_z_re = cfg.optional_f64("decay.z_re")?;
    let decay_z_im = cfg.optional_f64("decay.z_im")?;
    let decay_t = cfg.optional_f64("decay.t_start")?;
    let decay_halvings = cfg.optional_usize("decay.halvings")?;
    cfg.finish()?;

    let mut checks = Vec::new();
    for triple in raw_checks.split(';') {
        let fields: Vec<&str> = triple.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "config key 'checks': expected 'z_re z_im t' triples separated by ';', \
                 got '{triple}'"
            )));
        }
        checks.push((
            parse_f64_value("checks", fields[0])?,
            parse_f64_value("checks", fields[1])?,
            parse_f64_value("checks", fields[2])?,
        ));
    }

    let file = out.add("checks.csv");
    csvio::write_metadata(
        file,
        &[("experiment", "verify-contour".to_string())],
    )?;
    writeln!(
        file,
        "z_re,z_im,t,direct_re,direct_im,i1_re,i1_im,i2_re,i2_im,defect"
    )?;
    for &(re, im, t) in &checks {
        let z = ComplexPoint::scalar(re, im);
        let r = contour_shift_check(&z, t, &target, &tube)?;
        writeln!(
            file,
            "{},{},{},{},{},{},{},{},{},{}",
            format_f64(re),
            format_f64(im),
            format_f64(t),
            format_f64(r.direct.re),
            format_f64(r.direct.im),
            format_f64(r.i1.re),
            format_f64(r.i1.im),
            format_f64(r.i2.re),
            format_f64(r.i2.im),
            format_f64(r.defect())
        )?;
    }

    let decay_given = [
        decay_z_re.is_some(),
        decay_z_im.is_some(),
        decay_t.is_some(),
        decay_halvings.is_some(),
    ];
    if decay_given.iter().any(|&g| g) {
        if !decay_given.iter().all(|&g| g) {
            return Err(Error::InvalidArgument(
                "decay.z_re, decay.z_im, decay.t_start, and decay.halvings must be \
                 given together"
                    .into(),
            ));
        }
        let z = ComplexPoint::scalar(decay_z_re.unwrap(), decay_z_im.unwrap());
        let mut rows = Vec::new();
        let mut t = decay_t.unwrap();
        for _ in 0..=decay_halvings.unwrap() {
            let r = contour_shift_check(&z, t, &target, &tube)?;
            rows.push((t, r.i2.norm()));
            t *= 0.5;
        }
        csvio::write_error_profile(
            out.add("decay.csv"),
            &rows,
            &[
                ("experiment", "verify-contour".to_string()),
                (
                    "column",
                    "magnitude of the area correction vs flow time".to_string(),
                ),
            ],
        )?;
    }
    Ok(())
}

fn run_verify_optimality(cfg: &mut ConfigReader, out: &mut Staging) -> Result<()> {
    let domain = read_domain(cfg)?;
    let p = ComplexPoint::scalar(
        cfg.require_f64("point.re")?,
        cfg.require_f64("point.im")?,
    );
    let margin = cfg.require_f64("margin")?;
    let counts = read_counts(cfg)?;
    let panels = cfg.optional_usize("quad.panels")?.unwrap_or(240);
    cfg.finish()?;

    let report = optimality_cross_check(&domain, &p, margin, counts, panels)?;
    csvio::write_report_row(
        out.add("report.csv"),
        &[
            ("x0", format_f64(report.x0[0])),
            ("a_re", format_f64(report.a.re)),
            ("a_im", format_f64(report.a.im)),
            ("points", report.points.to_string()),
            ("max_defect", format_f64(report.max_defect)),
        ],
        &[(
            "check",
            "kernel time-integral vs exponential-integral closed form".to_string(),
        )],
    )
}

fn run_verify_monodromy(cfg: &mut ConfigReader, out: &mut Staging) -> Result<()> {
    let x0 = cfg.require_f64("x0")?;
    let a = Complex64::new(cfg.require_f64("a_re")?, cfg.require_f64("a_im")?);
    let dim = cfg.optional_usize("dim")?.unwrap_or(1);
    let radius = cfg.require_f64("loop.radius")?;
    let steps = cfg.optional_usize("loop.steps")?.unwrap_or(128);
    let positive = cfg.optional_bool("loop.positive")?.unwrap_or(true);
    let center_re = cfg.optional_f64("loop.center_re")?;
    let center_im = cfg.optional_f64("loop.center_im")?;
    cfg.finish()?;
    if center_re.is_some() != center_im.is_some() {
        return Err(Error::InvalidArgument(
            "loop.center_re and loop.center_im must be given together".into(),
        ));
    }
    let spec = LoopSpec {
        center: center_re.map(|re| Complex64::new(re, center_im.unwrap())),
        radius,
        steps,
        positive,
    };
    let report = monodromy_detect(x0, a, dim, &spec)?;
    csvio::write_report_row(
        out.add("report.csv"),
        &[
            ("singular_re", format_f64(report.singular_point.re)),
            ("singular_im", format_f64(report.singular_point.im)),
            ("loop_radius", format_f64(report.loop_radius)),
            ("steps", report.steps.to_string()),
            ("winding", report.winding.to_string()),
            ("start_re", format_f64(report.start_value.re)),
            ("start_im", format_f64(report.start_value.im)),
            ("end_re", format_f64(report.end_value.re)),
            ("end_im", format_f64(report.end_value.im)),
            ("jump_re", format_f64(report.jump.re)),
            ("jump_im", format_f64(report.jump.im)),
            ("jump_abs", format_f64(report.jump.norm())),
        ],
        &[(
            "check",
            "branch jump of the singular family around a loop".to_string(),
        )],
    )
}
