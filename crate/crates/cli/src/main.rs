//! Command-line front end: loads JSON inputs, runs computations and
//! property suites, emits CSV/JSON reports and SVG plots.
//!
//! Exit codes: 0 success, 1 malformed input, 2 feasibility gate failure,
//! 3 winding mismatch in the spectral scan, 4 violated property suite.

mod svg;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use spectral_glue::boundary::{build_engine, gates, BoundaryError, SpectralPossible};
use spectral_glue::spectrum::{
    self, eigenphases, find_spectrum_threaded, secular, SpectrumError,
};
use spectral_glue::suites;
use spectral_glue::tiling::{dual_points_1d, tiles_by_intervals};
use spectral_glue::{BoundaryMatrix, IntervalUnion, Lattice, PiecewiseExp};
use std::path::{Path, PathBuf};

const EXIT_BAD_INPUT: i32 = 1;
const EXIT_GATE: i32 = 2;
const EXIT_WINDING: i32 = 3;
const EXIT_SUITE: i32 = 4;

#[derive(Parser)]
#[command(name = "spectral-glue", version, about = "Spectra, evolutions and tilings of glued interval unions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the atomic spectrum in a window and plot it.
    Spectrum {
        #[arg(long)]
        omega: PathBuf,
        #[arg(long)]
        boundary: PathBuf,
        /// Window endpoints: --window A B
        #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
        window: Vec<f64>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Evolve a piecewise-exponential function and plot snapshots.
    Evolve {
        #[arg(long)]
        omega: PathBuf,
        #[arg(long)]
        boundary: PathBuf,
        #[arg(long)]
        function: PathBuf,
        /// Comma-separated times.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        times: Vec<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run a deterministic property suite.
    Verify {
        #[arg(long, value_parser = ["unitarity", "grouplaw", "eigen", "parseval", "localtranslation", "tiling", "pairmeasure"])]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random instances for the engine suites.
        #[arg(long, default_value_t = 100)]
        instances: usize,
        /// Override fixture for the localtranslation suite.
        #[arg(long)]
        omega: Option<PathBuf>,
        #[arg(long)]
        boundary: Option<PathBuf>,
        /// Also write the JSON report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact lattice-tiling certificate for an interval union.
    Tiling {
        #[arg(long)]
        omega: PathBuf,
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncated dual-lattice Parseval defect.
    Pairmeasure {
        #[arg(long)]
        omega: PathBuf,
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long, default_value_t = 20.0)]
        window_n: f64,
        #[arg(long, default_value_t = 8)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every suite and write a combined report.
    Report {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        instances: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_BAD_INPUT,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::exit(f.code);
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Spectrum {
            omega,
            boundary,
            window,
            tol,
            out,
        } => cmd_spectrum(&omega, &boundary, (window[0], window[1]), tol, &out),
        Command::Evolve {
            omega,
            boundary,
            function,
            times,
            out,
        } => cmd_evolve(&omega, &boundary, &function, &times, &out),
        Command::Verify {
            suite,
            seed,
            instances,
            omega,
            boundary,
            out,
        } => cmd_verify(&suite, seed, instances, omega.as_deref(), boundary.as_deref(), out.as_deref()),
        Command::Tiling { omega, lattice, out } => cmd_tiling(&omega, &lattice, out.as_deref()),
        Command::Pairmeasure {
            omega,
            lattice,
            window_n,
            trials,
            seed,
            out,
        } => cmd_pairmeasure(&omega, &lattice, window_n, trials, seed, out.as_deref()),
        Command::Report { seed, instances, out } => cmd_report(seed, instances, &out),
    }
}

// ---------------------------------------------------------------------------
// IO helpers

fn load_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(EXIT_BAD_INPUT, format!("cannot read {what} file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| fail(EXIT_BAD_INPUT, format!("malformed {what} in {}: {e}", path.display())))
}

/// Writes every output atomically (temp file + rename) only after all of
/// them have been computed, so failures leave no partial files behind.
fn write_outputs(dir: &Path, outputs: &[(String, Vec<u8>)]) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| fail(EXIT_BAD_INPUT, format!("cannot create {}: {e}", dir.display())))?;
    for (name, bytes) in outputs {
        let target = dir.join(name);
        let tmp = dir.join(format!("{name}.tmp"));
        std::fs::write(&tmp, bytes)
            .map_err(|e| fail(EXIT_BAD_INPUT, format!("cannot write {}: {e}", tmp.display())))?;
        std::fs::rename(&tmp, &target)
            .map_err(|e| fail(EXIT_BAD_INPUT, format!("cannot rename to {}: {e}", target.display())))?;
    }
    Ok(())
}

fn thread_count() -> usize {
    std::env::var("SPECTRAL_GLUE_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

fn spectrum_failure(e: SpectrumError) -> Failure {
    match e {
        SpectrumError::WindingMismatch { .. } => fail(EXIT_WINDING, e.to_string()),
        SpectrumError::UnboundedDomain => fail(EXIT_GATE, e.to_string()),
        SpectrumError::Boundary(BoundaryError::NoExtension { .. }) => {
            fail(EXIT_GATE, e.to_string())
        }
        other => fail(EXIT_BAD_INPUT, other.to_string()),
    }
}

fn check_gates(omega: &IntervalUnion) -> Result<(), Failure> {
    let g = gates(omega);
    if !g.extension_exists || g.spectral_possible == SpectralPossible::No {
        return Err(fail(EXIT_GATE, g.reasons.join("; ")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// spectrum

fn cmd_spectrum(
    omega_path: &Path,
    boundary_path: &Path,
    window: (f64, f64),
    tol: f64,
    out: &Path,
) -> Result<(), Failure> {
    let omega: IntervalUnion = load_json(omega_path, "omega")?;
    let b: BoundaryMatrix = load_json(boundary_path, "boundary")?;
    if window.1 <= window.0 {
        return Err(fail(EXIT_BAD_INPUT, "window must satisfy A < B"));
    }
    check_gates(&omega)?;
    let set = find_spectrum_threaded(&omega, &b, window, tol, thread_count())
        .map_err(spectrum_failure)?;

    let csv = spectrum::to_csv(&set).into_bytes();
    let json = serde_json::to_vec_pretty(&set)
        .map_err(|e| fail(EXIT_BAD_INPUT, e.to_string()))?;
    let stem_svg = spectrum_svg(&set, window).into_bytes();
    let phases_svg = eigenphases_svg(&omega, &b, window)?.into_bytes();
    write_outputs(
        out,
        &[
            ("spectrum.csv".into(), csv),
            ("spectrum.json".into(), json),
            ("spectrum.svg".into(), stem_svg),
            ("eigenphases.svg".into(), phases_svg),
        ],
    )?;
    println!(
        "{} spectrum points, total multiplicity {} in [{}, {}]",
        set.points.len(),
        set.total_multiplicity(),
        window.0,
        window.1
    );
    Ok(())
}

fn spectrum_svg(set: &spectral_glue::SpectrumSet, window: (f64, f64)) -> String {
    let max_mult = set.points.iter().map(|p| p.multiplicity).max().unwrap_or(1) as f64;
    let mut plot = svg::Plot::new(720.0, 260.0, window, (0.0, max_mult + 0.5));
    plot.title("atomic spectrum: lambda vs multiplicity");
    for pt in &set.points {
        let color = svg::PALETTE[(pt.multiplicity - 1).min(svg::PALETTE.len() - 1)];
        plot.stem(pt.lambda, pt.multiplicity as f64, color);
    }
    plot.finish()
}

fn eigenphases_svg(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    window: (f64, f64),
) -> Result<String, Failure> {
    let mut plot = svg::Plot::new(
        720.0,
        320.0,
        window,
        (-std::f64::consts::PI, std::f64::consts::PI),
    );
    plot.title("eigenphases of S(lambda) over the window");
    let samples = 480;
    for k in 0..=samples {
        let lam = window.0 + (window.1 - window.0) * (k as f64) / (samples as f64);
        let sec = secular(omega, b, lam).map_err(spectrum_failure)?;
        let (phases, _) = eigenphases(&sec).map_err(spectrum_failure)?;
        for (j, phi) in phases.iter().enumerate() {
            plot.dot(lam, *phi, 1.2, svg::PALETTE[j % svg::PALETTE.len()]);
        }
    }
    Ok(plot.finish())
}

// ---------------------------------------------------------------------------
// evolve

fn cmd_evolve(
    omega_path: &Path,
    boundary_path: &Path,
    function_path: &Path,
    times: &[f64],
    out: &Path,
) -> Result<(), Failure> {
    let omega: IntervalUnion = load_json(omega_path, "omega")?;
    let b: BoundaryMatrix = load_json(boundary_path, "boundary")?;
    let f: PiecewiseExp = load_json(function_path, "function")?;
    let engine = build_engine(&omega, &b).map_err(|e| match e {
        BoundaryError::NoExtension { .. } => fail(EXIT_GATE, e.to_string()),
        other => fail(EXIT_BAD_INPUT, other.to_string()),
    })?;

    let snapshots: Vec<PiecewiseExp> = times.iter().map(|&t| engine.evolve(&f, t)).collect();
    let mut outputs: Vec<(String, Vec<u8>)> = Vec::new();
    for (i, snap) in snapshots.iter().enumerate() {
        let json = serde_json::to_vec_pretty(snap)
            .map_err(|e| fail(EXIT_BAD_INPUT, e.to_string()))?;
        outputs.push((format!("snapshot_{i:03}.json"), json));
    }
    let manifest = serde_json::to_vec_pretty(&serde_json::json!({
        "times": times,
        "files": (0..times.len()).map(|i| format!("snapshot_{i:03}.json")).collect::<Vec<_>>(),
    }))
    .map_err(|e| fail(EXIT_BAD_INPUT, e.to_string()))?;
    outputs.push(("times.json".into(), manifest));
    outputs.push(("snapshots.svg".into(), snapshots_svg(&omega, &f, times, &snapshots).into_bytes()));
    write_outputs(out, &outputs)?;
    println!("wrote {} snapshots to {}", times.len(), out.display());
    Ok(())
}

/// `|f|` sampled on a 2048-point grid per component, one polyline per
/// time; unbounded components are clipped to a width-8 window at their
/// finite end.
fn snapshots_svg(
    omega: &IntervalUnion,
    initial: &PiecewiseExp,
    times: &[f64],
    snapshots: &[PiecewiseExp],
) -> String {
    let windows: Vec<(f64, f64)> = omega
        .intervals()
        .iter()
        .map(|iv| match (iv.alpha.is_finite(), iv.beta.is_finite()) {
            (true, true) => (iv.alpha, iv.beta),
            (true, false) => (iv.alpha, iv.alpha + 8.0),
            (false, true) => (iv.beta - 8.0, iv.beta),
            (false, false) => (-4.0, 4.0),
        })
        .collect();
    let x_lo = windows.iter().map(|w| w.0).fold(f64::INFINITY, f64::min);
    let x_hi = windows.iter().map(|w| w.1).fold(f64::NEG_INFINITY, f64::max);
    let mut y_hi = 1e-9f64;
    let mut series: Vec<Vec<Vec<(f64, f64)>>> = Vec::new(); // [time][component][samples]
    let all: Vec<&PiecewiseExp> = std::iter::once(initial).chain(snapshots.iter()).collect();
    for snap in &all {
        let mut per_comp = Vec::new();
        for w in &windows {
            let mut pts = Vec::with_capacity(2048);
            for k in 0..2048 {
                let x = w.0 + (w.1 - w.0) * (k as f64 + 0.5) / 2048.0;
                let y = snap.eval(x).norm();
                y_hi = y_hi.max(y);
                pts.push((x, y));
            }
            per_comp.push(pts);
        }
        series.push(per_comp);
    }
    let mut plot = svg::Plot::new(720.0, 320.0, (x_lo, x_hi), (0.0, 1.1 * y_hi));
    plot.title("|f| snapshots (series 0 = initial state)");
    for (si, per_comp) in series.iter().enumerate() {
        let color = svg::PALETTE[si % svg::PALETTE.len()];
        for pts in per_comp {
            plot.polyline(pts, color);
        }
    }
    let _ = times;
    plot.finish()
}

// ---------------------------------------------------------------------------
// verify / report

fn run_suite(
    name: &str,
    seed: u64,
    instances: usize,
    omega: Option<&Path>,
    boundary: Option<&Path>,
) -> Result<suites::SuiteReport, Failure> {
    Ok(match name {
        "unitarity" => suites::suite_unitarity(seed, instances),
        "grouplaw" => suites::suite_grouplaw(seed, instances),
        "eigen" => suites::suite_eigen(seed, instances.min(12)),
        "parseval" => suites::suite_parseval(seed),
        "localtranslation" => {
            let (fo, fb) = suites::default_localtranslation_fixture();
            let o: IntervalUnion = match omega {
                Some(p) => load_json(p, "omega")?,
                None => fo,
            };
            let b: BoundaryMatrix = match boundary {
                Some(p) => load_json(p, "boundary")?,
                None => fb,
            };
            suites::suite_localtranslation(&o, &b, seed)
        }
        "tiling" => suites::suite_tiling(seed),
        "pairmeasure" => suites::suite_pairmeasure(seed),
        other => return Err(fail(EXIT_BAD_INPUT, format!("unknown suite {other}"))),
    })
}

fn cmd_verify(
    suite: &str,
    seed: u64,
    instances: usize,
    omega: Option<&Path>,
    boundary: Option<&Path>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let report = run_suite(suite, seed, instances, omega, boundary)?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| fail(EXIT_BAD_INPUT, e.to_string()))?;
    println!("{json}");
    if let Some(path) = out {
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
        if let Some(dir) = dir {
            std::fs::create_dir_all(dir)
                .map_err(|e| fail(EXIT_BAD_INPUT, format!("cannot create {}: {e}", dir.display())))?;
        }
        let name = path
            .file_name()
            .ok_or_else(|| fail(EXIT_BAD_INPUT, "verify --out needs a file name"))?
            .to_string_lossy()
            .into_owned();
        write_outputs(dir.unwrap_or(Path::new(".")), &[(name, json.clone().into_bytes())])?;
    }
    if report.passed {
        Ok(())
    } else {
        Err(fail(
            EXIT_SUITE,
            format!(
                "suite {suite} violated: max residual {} > tol {}",
                report.max_residual, report.tol
            ),
        ))
    }
}

fn cmd_report(seed: u64, instances: usize, out: &Path) -> Result<(), Failure> {
    let reports = suites::all_suites(seed, instances);
    let json = serde_json::to_vec_pretty(&reports)
        .map_err(|e| fail(EXIT_BAD_INPUT, e.to_string()))?;
    let mut md = String::from("# Property suite report\n\n| suite | checks | max residual | tol | passed |\n|---|---|---|---|---|\n");
    for r in &reports {
        md.push_str(&format!(
            "| {} | {} | {:.3e} | {:.0e} | {} |\n",
            r.suite, r.checks, r.max_residual, r.tol, r.passed
        ));
    }
    write_outputs(
        out,
        &[("report.json".into(), json), ("report.md".into(), md.into_bytes())],
    )?;
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.suite.as_str())
        .collect();
    if failed.is_empty() {
        println!("all {} suites passed", reports.len());
        Ok(())
    } else {
        Err(fail(EXIT_SUITE, format!("suites violated: {}", failed.join(", "))))
    }
}

// ---------------------------------------------------------------------------
// tiling / pairmeasure

fn cmd_tiling(omega_path: &Path, lattice_path: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let omega: IntervalUnion = load_json(omega_path, "omega")?;
    let lattice: Lattice = load_json(lattice_path, "lattice")?;
    let report = tiles_by_intervals(&omega, &lattice)
        .map_err(|e| fail(EXIT_BAD_INPUT, e.to_string()))?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| fail(EXIT_BAD_INPUT, e.to_string()))?;
    println!("{json}");
    if let Some(path) = out {
        write_named(path, json.into_bytes())?;
    }
    Ok(())
}

fn cmd_pairmeasure(
    omega_path: &Path,
    lattice_path: &Path,
    window_n: f64,
    trials: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let omega: IntervalUnion = load_json(omega_path, "omega")?;
    let lattice: Lattice = load_json(lattice_path, "lattice")?;
    let defect = spectral_glue::spectral_pair::pair_measure_check(&omega, &lattice, window_n, trials, seed)
        .map_err(|e| fail(EXIT_BAD_INPUT, e.to_string()))?;
    let dual = dual_points_1d(&lattice, (-window_n, window_n))
        .map_err(|e| fail(EXIT_BAD_INPUT, e.to_string()))?;
    let json = serde_json::to_string_pretty(&serde_json::json!({
        "window_n": window_n,
        "trials": trials,
        "seed": seed,
        "dual_points": dual,
        "max_defect": defect,
    }))
    .map_err(|e| fail(EXIT_BAD_INPUT, e.to_string()))?;
    println!("{json}");
    if let Some(path) = out {
        write_named(path, json.into_bytes())?;
    }
    Ok(())
}

fn write_named(path: &Path, bytes: Vec<u8>) -> Result<(), Failure> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| fail(EXIT_BAD_INPUT, "--out needs a file name"))?
        .to_string_lossy()
        .into_owned();
    write_outputs(dir, &[(name, bytes)])
}
