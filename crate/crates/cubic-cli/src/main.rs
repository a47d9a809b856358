mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use cubic::borel::{resummed_energy_with, series_orders_needed, ResummationConfig};
use cubic::dynamics::{
    AnalyticPacket, DissipationProfile, DynamicsConfig, GaussianPacket, Pipeline, QuadratureGrid,
};
use cubic::grid::{cn_autocorrelation, GridConfig};
use cubic::series::b_series;
use cubic::spectral::{default_theta, resonances, resonances_with, ResonanceOptions};
use cubic::strong::{default_ladder, evaluate_coefficients, fit_coefficients};
use cubic::{Complex64, OscillatorSpec};
use output::{emit, now, num, Manifest, Table};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const SUBCOMMANDS: &[&str] = &[
    "spectrum",
    "methods-compare",
    "propagate",
    "series",
    "strong-table",
];

/// Resonances, resummation and wave-packet dynamics of the cubic oscillator.
#[derive(Parser, Debug)]
#[command(
    name = "cubicres",
    version,
    about,
    allow_negative_numbers = true,
    args_override_self = true
)]
#[command(
    after_help = "Any subcommand accepts --config FILE with `flag = value` lines; explicit flags win."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Resonance energies by complex-scaled diagonalization.
    Spectrum(SpectrumArgs),
    /// Side-by-side energies from diagonalization, Borel-Pade resummation and the
    /// strong-coupling expansion over a coupling ladder.
    MethodsCompare(CompareArgs),
    /// Autocorrelation trace of a wave packet, optionally against Crank-Nicolson.
    Propagate(PropagateArgs),
    /// Exact coefficients of B(E, g) as polynomials in E.
    Series(SeriesArgs),
    /// Fitted strong-coupling coefficients L_{N,K}.
    StrongTable(StrongArgs),
}

#[derive(Args, Debug, Serialize)]
#[group(id = "coupling", required = true, multiple = false)]
struct Coupling {
    /// Real coupling g >= 0.
    #[arg(long, group = "coupling")]
    g: Option<f64>,
    /// PT-symmetric coupling sqrt(g) = i beta.
    #[arg(long, group = "coupling")]
    beta: Option<f64>,
}

impl Coupling {
    fn g_root(&self) -> Result<Complex64, String> {
        match (self.g, self.beta) {
            (Some(g), None) if g >= 0.0 && g.is_finite() => Ok(Complex64::new(g.sqrt(), 0.0)),
            (Some(g), None) => Err(format!("g = {g} must be a nonnegative number")),
            (None, Some(b)) if b.is_finite() => Ok(Complex64::new(0.0, b)),
            _ => Err("give exactly one of --g and --beta".into()),
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct SpectrumArgs {
    #[command(flatten)]
    coupling: Coupling,
    /// Continuum rotation angle in degrees, in [0, 45). Defaults to 36 for real
    /// coupling and 0 for --beta.
    #[arg(long)]
    theta_deg: Option<f64>,
    #[arg(long, default_value_t = 200)]
    nmax: usize,
    #[arg(long, default_value_t = 5)]
    levels: usize,
    /// Basis increase used for the truncation uncertainty.
    #[arg(long, default_value_t = 40)]
    delta_n: usize,
    /// Largest accepted uncertainty.
    #[arg(long, default_value_t = 1e-6)]
    ceiling: f64,
    /// Output prefix.
    #[arg(long, default_value = "spectrum")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct CompareArgs {
    /// Comma-separated couplings.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.01,0.025,0.1,0.3,0.6,1,3,10"
    )]
    g_list: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    level: usize,
    #[arg(long, default_value_t = 36.0)]
    theta_deg: f64,
    #[arg(long, default_value_t = 200)]
    nmax: usize,
    /// Highest diagonal Pade order of the resummation.
    #[arg(long, default_value_t = 20)]
    max_order: usize,
    /// Highest strong-coupling order K.
    #[arg(long, default_value_t = 4)]
    k_max: usize,
    /// Couplings below this are flagged outside the strong-coupling domain.
    #[arg(long, default_value_t = 0.025)]
    strong_min_g: f64,
    #[arg(long, default_value = "compare")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
#[group(id = "dyn_coupling", required = true, multiple = false)]
struct DynCoupling {
    /// Real coupling g >= 0.
    #[arg(long, group = "dyn_coupling")]
    g: Option<f64>,
    /// sqrt(g) >= 0.
    #[arg(long, group = "dyn_coupling")]
    sqrt_g: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct PropagateArgs {
    #[command(flatten)]
    coupling: DynCoupling,
    #[arg(long, default_value_t = 0.0)]
    center: f64,
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    #[arg(long, default_value_t = 0.0)]
    momentum: f64,
    /// Initial packet as oscillator coefficients, one `re im` pair per line.
    #[arg(long)]
    coeffs: Option<PathBuf>,
    #[arg(long, default_value_t = 25.0)]
    t_max: f64,
    /// Output time spacing.
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, default_value_t = 36.0)]
    theta_deg: f64,
    #[arg(long, default_value_t = 200)]
    nmax: usize,
    #[arg(long, default_value_t = 60)]
    max_modes: usize,
    #[arg(long, default_value_t = 1e-8)]
    mode_ceiling: f64,
    #[arg(long, default_value_t = -12.0)]
    grid_min: f64,
    #[arg(long, default_value_t = 12.0)]
    grid_max: f64,
    #[arg(long, default_value_t = 0.005)]
    grid_step: f64,
    /// Fail when the expansion residual exceeds this value.
    #[arg(long)]
    residual_tol: Option<f64>,
    /// Width corrections, one `N delta` pair per line.
    #[arg(long)]
    delta: Option<PathBuf>,
    /// Also run the Crank-Nicolson reference.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 300.0)]
    cn_half_width: f64,
    #[arg(long, default_value_t = 0.02)]
    cn_spacing: f64,
    #[arg(long, default_value_t = 0.002)]
    cn_dt: f64,
    #[arg(long, default_value = "propagate")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SeriesArgs {
    /// Highest order in g.
    #[arg(long, default_value_t = 10)]
    k_max: usize,
    #[arg(long, default_value = "series")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct StrongArgs {
    #[arg(long, default_value_t = 3)]
    levels: usize,
    #[arg(long, default_value_t = 4)]
    k_max: usize,
    #[arg(long, default_value = "strong")]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Numeric(cubic::Error),
    Io(std::io::Error),
}

impl From<cubic::Error> for Failure {
    fn from(e: cubic::Error) -> Self {
        Failure::Numeric(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numeric(e) if e.is_input() => 2,
            Failure::Numeric(e) if e.is_ceiling() => 4,
            Failure::Numeric(_) | Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Numeric(e) => e.to_string(),
            Failure::Io(e) => format!("i/o error: {e}"),
        }
    }
}

type Outcome = Result<Vec<PathBuf>, Failure>;

fn radians(deg: f64) -> f64 {
    deg.to_radians()
}

fn manifest<C: Serialize, R: Serialize>(
    command: &str,
    configuration: C,
    results: R,
    started: f64,
) -> Manifest<C, R> {
    Manifest {
        command: command.into(),
        tool: "cubicres",
        version: env!("CARGO_PKG_VERSION"),
        configuration,
        started_unix: started,
        finished_unix: started,
        outputs: Vec::new(),
        results,
    }
}

fn spectrum(a: &SpectrumArgs) -> Outcome {
    let started = now();
    let g_root = a.coupling.g_root().map_err(Failure::Usage)?;
    let theta = a.theta_deg.map_or_else(|| default_theta(g_root), radians);
    let spec = OscillatorSpec::new(g_root, theta, a.nmax)?;
    let opts = ResonanceOptions {
        delta_n: a.delta_n,
        uncertainty_ceiling: a.ceiling,
        ..Default::default()
    };
    let set = resonances_with(&spec, a.levels, &opts)?;
    let mut t = Table::new(
        "cubicres spectrum",
        vec!["N", "re_E", "im_E", "gamma", "uncertainty"],
    );
    t.meta.push(format!(
        "g_root = {} {:+}i, theta = {}, n_max = {}",
        g_root.re, g_root.im, spec.theta, a.nmax
    ));
    let mut results = Vec::new();
    for l in &set.levels {
        t.rows.push(vec![
            l.index.to_string(),
            num(l.energy.re),
            num(l.energy.im),
            num(l.width),
            num(l.uncertainty),
        ]);
        results.push(BTreeMap::from([
            ("N", l.index as f64),
            ("uncertainty", l.uncertainty),
        ]));
    }
    Ok(emit(
        &a.out,
        &[(".csv", &t)],
        manifest("spectrum", a, results, started),
    )?)
}

#[derive(Serialize)]
struct CompareRow {
    g: f64,
    method: &'static str,
    energy: Option<(f64, f64)>,
    uncertainty: Option<f64>,
    status: String,
}

fn compare(a: &CompareArgs) -> Outcome {
    let started = now();
    if a.g_list.is_empty() || a.g_list.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
        return Err(Failure::Usage("--g-list needs positive couplings".into()));
    }
    let theta = radians(a.theta_deg);
    OscillatorSpec::real(0.0, theta, a.nmax)?;
    let cfg = ResummationConfig {
        max_order: a.max_order,
        ..Default::default()
    };
    let series = b_series(series_orders_needed(&cfg).max(1))?;
    let strong = fit_coefficients(a.level, &default_ladder(), a.k_max)?;
    let mut rows = Vec::new();
    for &g in &a.g_list {
        let m1 = OscillatorSpec::real(g, theta, a.nmax)
            .and_then(|s| resonances(&s, a.level + 1))
            .map(|set| set.levels[a.level].clone());
        rows.push(match m1 {
            Ok(l) => CompareRow {
                g,
                method: "I",
                energy: Some((l.energy.re, l.energy.im)),
                uncertainty: Some(l.uncertainty),
                status: "ok".into(),
            },
            Err(e) => CompareRow {
                g,
                method: "I",
                energy: None,
                uncertainty: None,
                status: format!("failed: {e}"),
            },
        });
        rows.push(match resummed_energy_with(&series, a.level, g, &cfg) {
            Ok(r) => CompareRow {
                g,
                method: "II",
                energy: Some((r.value.re, r.value.im)),
                uncertainty: Some(r.uncertainty),
                status: "ok".into(),
            },
            Err(e) => CompareRow {
                g,
                method: "II",
                energy: None,
                uncertainty: None,
                status: format!("failed: {e}"),
            },
        });
        let e3 = evaluate_coefficients(&strong.coefficients, g);
        let last = strong.coefficients.len() - 1;
        let tail = (evaluate_coefficients(&strong.coefficients, g)
            - evaluate_coefficients(&strong.coefficients[..last], g))
        .norm();
        rows.push(CompareRow {
            g,
            method: "III",
            energy: Some((e3.re, e3.im)),
            uncertainty: Some(tail),
            status: if g < a.strong_min_g {
                "out_of_domain".into()
            } else {
                "ok".into()
            },
        });
    }
    let mut t = Table::new(
        "cubicres methods-compare",
        vec!["g", "method", "re_E", "im_E", "uncertainty", "status"],
    );
    t.meta.push(format!(
        "level = {}, theta = {theta}, n_max = {}, max_order = {}, k_max = {}",
        a.level, a.nmax, a.max_order, a.k_max
    ));
    t.meta
        .push("method III uncertainty: magnitude of the highest included term".into());
    for r in &rows {
        let (re, im) = r.energy.unwrap_or((f64::NAN, f64::NAN));
        t.rows.push(vec![
            num(r.g),
            r.method.into(),
            num(re),
            num(im),
            num(r.uncertainty.unwrap_or(f64::NAN)),
            r.status.replace(',', ";"),
        ]);
    }
    Ok(emit(
        &a.out,
        &[(".csv", &t)],
        manifest("methods-compare", a, &rows, started),
    )?)
}

fn read_pairs(path: &Path) -> Result<Vec<(String, String)>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',' || c == '=')
            .filter(|s| !s.is_empty())
            .collect();
        if f.len() != 2 {
            return Err(Failure::Usage(format!(
                "{} line {}: expected two fields",
                path.display(),
                i + 1
            )));
        }
        out.push((f[0].to_string(), f[1].to_string()));
    }
    Ok(out)
}

fn parse_f64(s: &str, path: &Path) -> Result<f64, Failure> {
    s.parse()
        .map_err(|_| Failure::Usage(format!("{}: bad number {s}", path.display())))
}

fn trace_table(
    title: &str,
    meta: Vec<String>,
    pts: &[(f64, f64, Complex64, f64)],
    p0: f64,
) -> Table {
    let mut t = Table::new(
        title,
        vec![
            "t",
            "P",
            "re_overlap",
            "im_overlap",
            "modal_norm",
            "P_normalized",
            "uncertainty",
        ],
    );
    t.meta = meta;
    t.meta
        .push("uncertainty: normalization defect |P(0) - 1|".into());
    let defect = (p0 - 1.0).abs();
    for &(tt, p, ov, norm) in pts {
        t.rows.push(vec![
            num(tt),
            num(p),
            num(ov.re),
            num(ov.im),
            num(norm),
            num(p / p0),
            num(defect),
        ]);
    }
    t
}

#[derive(Serialize)]
struct PropagateResults {
    modes: usize,
    expansion_residual: f64,
    p0: f64,
    /// (t, P) at interior local maxima of the spectral trace.
    local_maxima: Vec<(f64, f64)>,
    oracle_max_abs_diff: Option<f64>,
    oracle_edge_amplitude: Option<f64>,
    warnings: Vec<String>,
}

fn propagate(a: &PropagateArgs) -> Outcome {
    let started = now();
    let g_root = match (a.coupling.g, a.coupling.sqrt_g) {
        (Some(g), None) if g >= 0.0 && g.is_finite() => g.sqrt(),
        (None, Some(s)) if s >= 0.0 && s.is_finite() => s,
        _ => {
            return Err(Failure::Usage(
                "give exactly one nonnegative --g or --sqrt-g".into(),
            ))
        }
    };
    let g_root = Complex64::new(g_root, 0.0);
    if !(a.t_max >= 0.0) || !(a.dt > 0.0) {
        return Err(Failure::Usage("--t-max must be >= 0 and --dt > 0".into()));
    }
    let packet = match &a.coeffs {
        Some(p) => AnalyticPacket::Oscillator(
            read_pairs(p)?
                .iter()
                .map(|(re, im)| Ok(Complex64::new(parse_f64(re, p)?, parse_f64(im, p)?)))
                .collect::<Result<_, Failure>>()?,
        ),
        None => AnalyticPacket::gaussian(GaussianPacket {
            center: a.center,
            width: a.width,
            momentum: a.momentum,
        }),
    };
    let dissipation = match &a.delta {
        Some(p) => {
            let mut m = BTreeMap::new();
            for (n, d) in read_pairs(p)? {
                let n: usize = n
                    .parse()
                    .map_err(|_| Failure::Usage(format!("{}: bad level {n}", p.display())))?;
                m.insert(n, parse_f64(&d, p)?);
            }
            DissipationProfile::new(m)?
        }
        None => DissipationProfile::default(),
    };
    let config = DynamicsConfig {
        theta: radians(a.theta_deg),
        n_max: a.nmax,
        mode_ceiling: a.mode_ceiling,
        max_modes: a.max_modes,
        grid: QuadratureGrid {
            min: a.grid_min,
            max: a.grid_max,
            step: a.grid_step,
        },
        residual_tol: a.residual_tol,
    };
    let steps = (a.t_max / a.dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * a.dt).collect();
    let pipe = Pipeline::new(g_root, packet.clone(), config, dissipation)?;
    let pts = pipe.autocorrelation(&times)?;
    let rows: Vec<(f64, f64, Complex64, f64)> = pts
        .iter()
        .map(|p| (p.t, p.p, p.overlap, p.modal_norm))
        .collect();
    let p0 = pts[0].p;
    let meta = vec![
        format!(
            "sqrt_g = {}, theta = {}, n_max = {}, modes = {}",
            g_root.re,
            config.theta,
            a.nmax,
            pipe.basis().levels.len()
        ),
        format!("expansion residual = {:.3e}", pipe.expansion_residual),
    ];
    let spectral = trace_table("cubicres propagate spectral trace", meta, &rows, p0);
    let local_maxima = pts
        .windows(3)
        .filter(|w| w[1].p > w[0].p && w[1].p >= w[2].p)
        .map(|w| (w[1].t, w[1].p))
        .collect();
    let mut results = PropagateResults {
        modes: pipe.basis().levels.len(),
        expansion_residual: pipe.expansion_residual,
        p0,
        local_maxima,
        oracle_max_abs_diff: None,
        oracle_edge_amplitude: None,
        warnings: Vec::new(),
    };
    if !a.oracle {
        return Ok(emit(
            &a.out,
            &[(".spectral.csv", &spectral)],
            manifest("propagate", a, results, started),
        )?);
    }
    let cfg = GridConfig {
        half_width: a.cn_half_width,
        spacing: a.cn_spacing,
        time_step: a.cn_dt,
    };
    let cn = cn_autocorrelation(&packet, &times, &cfg, g_root)?;
    let cn_p0 = cn.points[0].1;
    let oracle = trace_table(
        "cubicres propagate Crank-Nicolson trace",
        vec![format!(
            "L = {}, dq = {}, dt = {}; modal_norm column holds the grid norm",
            cfg.half_width, cfg.spacing, cfg.time_step
        )],
        &cn.points,
        cn_p0,
    );
    let mut diff = Table::new(
        "cubicres propagate |P_spectral - P_oracle|",
        vec!["t", "P_spectral", "P_oracle", "abs_diff", "uncertainty"],
    );
    let mut worst: f64 = 0.0;
    let defect = (p0 - 1.0).abs().max((cn_p0 - 1.0).abs());
    for (s, o) in rows.iter().zip(&cn.points) {
        let d = (s.1 - o.1).abs();
        worst = worst.max(d);
        diff.rows
            .push(vec![num(s.0), num(s.1), num(o.1), num(d), num(defect)]);
    }
    for w in &cn.warnings {
        eprintln!("warning: {w}");
    }
    results.oracle_max_abs_diff = Some(worst);
    results.oracle_edge_amplitude = Some(cn.edge_amplitude);
    results.warnings = cn.warnings.clone();
    Ok(emit(
        &a.out,
        &[
            (".spectral.csv", &spectral),
            (".oracle.csv", &oracle),
            (".diff.csv", &diff),
        ],
        manifest("propagate", a, results, started),
    )?)
}

fn series(a: &SeriesArgs) -> Outcome {
    let started = now();
    let b = b_series(a.k_max)?;
    let mut t = Table::new(
        "cubicres series: B(E, g) = sum_k g^k sum_d c_{k,d} E^d",
        vec!["k", "d", "numerator", "denominator", "uncertainty"],
    );
    for line in b.to_text().lines() {
        let mut f: Vec<String> = line.split_whitespace().map(String::from).collect();
        f.push("0".into());
        t.rows.push(f);
    }
    Ok(emit(
        &a.out,
        &[(".csv", &t)],
        manifest("series", a, (), started),
    )?)
}

fn strong_table(a: &StrongArgs) -> Outcome {
    let started = now();
    if a.levels == 0 {
        return Err(Failure::Usage("--levels must be positive".into()));
    }
    let ladder = default_ladder();
    let mut t = Table::new(
        "cubicres strong-table",
        vec!["N", "K", "re_L", "im_L", "residual"],
    );
    let mut diag = Vec::new();
    for n in 0..a.levels {
        let row = fit_coefficients(n, &ladder, a.k_max)?;
        for (k, l) in row.coefficients.iter().enumerate() {
            t.rows.push(vec![
                n.to_string(),
                k.to_string(),
                num(l.re),
                num(l.im),
                num(row.residual),
            ]);
        }
        diag.push(BTreeMap::from([
            ("N", n as f64),
            ("residual", row.residual),
            ("condition", row.condition),
        ]));
    }
    t.meta.push(format!(
        "ladder g = 10^(1 + j/4), j = 0..{}; residual is the rms fit residual",
        ladder.len() - 1
    ));
    Ok(emit(
        &a.out,
        &[(".csv", &t)],
        manifest("strong-table", a, diag, started),
    )?)
}

fn main() -> ExitCode {
    let argv = match config::expand_argv(std::env::args().collect(), SUBCOMMANDS) {
        Ok(v) => v,
        Err(m) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Spectrum(a) => spectrum(a),
        Command::MethodsCompare(a) => compare(a),
        Command::Propagate(a) => propagate(a),
        Command::Series(a) => series(a),
        Command::StrongTable(a) => strong_table(a),
    };
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
