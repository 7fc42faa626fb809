use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use jetmorse::error::Error;
use jetmorse::exact::{to_f64, Rational, RationalRepr};
use jetmorse::jet_combinatorics::{
    composition_count, ikrn_asymptotic, ikrn_bounds, ikrn_enumerated, ikrn_exact_with_ceiling,
    ikrn_monte_carlo, DEFAULT_TERM_CEILING,
};
use jetmorse::models::{ci_diagnostics, ci_threshold, ci_threshold_limit, CompleteIntersectionSpec, ModelSpec};
use jetmorse::morse::{convergence_study, DEFAULT_TOL};
use jetmorse::wps::{volume_closed_form, volume_monte_carlo, WeightSpec};

/// Weighted projective volumes, Dirichlet jet integrals and Monte-Carlo
/// Morse integrals for jet differentials.
#[derive(Parser, Debug)]
#[command(name = "jetmorse", version)]
struct Cli {
    /// Worker threads. Results do not depend on this value.
    #[arg(long, global = true, env = "JETMORSE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Volume of a weighted projective space P(a^[r]).
    ///
    /// Compares the closed form 1/∏ a_s^{r_s} with an independent Monte-Carlo
    /// estimate of the Monge–Ampère mass of log(1 + e^φ), where
    /// φ = (1/p) log Σ |z_s|^{2p/a_s}.
    WpsVolume(WpsArgs),
    /// Simplex moment I_{k,r,n} = ∫ (Σ x_s/s)^n dν_{k,r}.
    ///
    /// Modes: exact rational value, rational lower/upper bounds built from
    /// harmonic numbers, the (log k + γ)^n / k^n asymptotic, a Monte-Carlo
    /// estimate, or the multinomial sum over weak compositions.
    Ikrn(IkrnArgs),
    /// Reduced q-index Morse integrals of a curvature model.
    ///
    /// Estimates Σ_points w ∫∫ 1_{g_k,q} det g_k dν dμ for each k and compares
    /// R_q(k) r^n / I_{k,r,n} with the quadrature of ∫ 1_{η,q} η^n.
    Morse(MorseArgs),
    /// Jet order sufficient for sections on a complete intersection.
    ///
    /// Prints ln k_min = 7.38 n^{n+1/2} ((Σd+1)/(Σd−n−s−a−1))^n and, for a given
    /// k, the error ratio ε and the error integral J.
    CiThreshold(CiArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TextFormat {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum IkrnMode {
    Exact,
    Bounds,
    Asymptotic,
    Mc,
    Enumerate,
}

#[derive(Args, Debug)]
struct WpsArgs {
    /// Weights a_1,…,a_k (coprime).
    #[arg(long, value_delimiter = ',', required = true)]
    weights: Vec<u64>,
    /// Multiplicities r_1,…,r_k.
    #[arg(long, value_delimiter = ',', required = true)]
    mults: Vec<u64>,
    /// Exponent p ≥ max a (default: lcm of the weights).
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    format: TextFormat,
}

#[derive(Args, Debug)]
struct IkrnArgs {
    #[arg(long)]
    k: u64,
    #[arg(long)]
    r: u64,
    #[arg(long)]
    n: u64,
    #[arg(long, value_enum, default_value_t = IkrnMode::Exact)]
    mode: IkrnMode,
    /// Samples for --mode mc.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Seed for --mode mc.
    #[arg(long)]
    seed: Option<u64>,
    /// Largest number of terms the exact and enumerate modes may touch.
    #[arg(long, default_value_t = DEFAULT_TERM_CEILING)]
    ceiling: u128,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    format: TextFormat,
}

#[derive(Args, Debug)]
struct MorseArgs {
    /// Model JSON: a file path, or the JSON text itself.
    #[arg(long)]
    model: String,
    /// Ascending jet orders.
    #[arg(long, value_delimiter = ',', required = true)]
    k_list: Vec<u64>,
    /// Indices q (default: 0..=n).
    #[arg(long, value_delimiter = ',')]
    q: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long)]
    seed: u64,
    /// Relative width of the zero band for index classification.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Write PREFIX.csv and PREFIX.json instead of printing.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
}

#[derive(Args, Debug)]
struct CiArgs {
    /// Dimension of X.
    #[arg(long)]
    n: usize,
    /// Codimension (default: number of degrees).
    #[arg(long)]
    s: Option<usize>,
    /// Degrees d_1,…,d_s.
    #[arg(long, value_delimiter = ',', required = true)]
    degrees: Vec<u64>,
    /// Twist parameter a ≥ 0, decimal or p/q.
    #[arg(long, default_value = "0", value_parser = parse_nonnegative)]
    a: f64,
    /// Jet order for the ε and J diagnostics.
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    format: TextFormat,
}

fn parse_nonnegative(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|e| format!("{e}"))?;
            let q: f64 = q.trim().parse().map_err(|e| format!("{e}"))?;
            p / q
        }
        None => s.trim().parse().map_err(|e| format!("{e}"))?,
    };
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(format!("{s} is not a nonnegative number"))
    }
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ResourceCeiling { .. } => 3,
            Error::Numerical(_) | Error::Evaluation { .. } => 4,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn rational_json(r: &Rational) -> serde_json::Value {
    let repr = RationalRepr::from(r);
    json!({ "num": repr.num, "den": repr.den })
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn cmd_wps_volume(args: &WpsArgs) -> Result<String, Failure> {
    let w = WeightSpec::new(args.weights.clone(), args.mults.clone(), args.p)?;
    let exact = volume_closed_form(&w);
    let exact_f = to_f64(&exact);
    let est = volume_monte_carlo(&w, args.samples, args.seed)?;
    let z = est.z_score(exact_f);
    Ok(match args.format {
        TextFormat::Json => pretty(&json!({
            "weights": w.weights(),
            "mults": w.multiplicities(),
            "p": w.exponent(),
            "closed_form": rational_json(&exact),
            "closed_form_value": exact_f,
            "estimate": est.value,
            "std_error": est.std_error,
            "z_score": z,
            "samples": args.samples,
            "seed": args.seed,
        })),
        TextFormat::Text => {
            let mut s = String::new();
            writeln!(s, "closed_form {exact}").unwrap();
            writeln!(s, "closed_form_value {}", num(exact_f)).unwrap();
            writeln!(s, "estimate {}", num(est.value)).unwrap();
            writeln!(s, "std_error {}", num(est.std_error)).unwrap();
            writeln!(s, "z_score {}", num(z)).unwrap();
            s
        }
    })
}

fn cmd_ikrn(args: &IkrnArgs) -> Result<String, Failure> {
    let (k, r, n) = (args.k, args.r, args.n);
    let ceiling_failure = |e: Error| -> Failure {
        match e {
            Error::ResourceCeiling { ceiling, .. } if args.mode == IkrnMode::Enumerate => Failure {
                code: 3,
                message: format!(
                    "resource ceiling exceeded: {} weak compositions of n = {n} into k = {k} parts, ceiling is {ceiling}",
                    composition_count(k, n)
                ),
            },
            other => other.into(),
        }
    };
    let mut fields = serde_json::Map::new();
    fields.insert("k".into(), json!(k));
    fields.insert("r".into(), json!(r));
    fields.insert("n".into(), json!(n));
    let mut text = String::new();
    match args.mode {
        IkrnMode::Exact | IkrnMode::Enumerate => {
            let v = if args.mode == IkrnMode::Exact {
                ikrn_exact_with_ceiling(k, r, n, args.ceiling)
            } else {
                ikrn_enumerated(k, r, n, args.ceiling)
            }
            .map_err(ceiling_failure)?;
            writeln!(text, "{v}").unwrap();
            writeln!(text, "value {}", num(to_f64(&v))).unwrap();
            fields.insert("exact".into(), rational_json(&v));
            fields.insert("value".into(), json!(to_f64(&v)));
        }
        IkrnMode::Bounds => {
            let (lo, hi) = ikrn_bounds(k, r, n)?;
            writeln!(text, "lower {lo}").unwrap();
            writeln!(text, "upper {hi}").unwrap();
            writeln!(text, "lower_value {}", num(to_f64(&lo))).unwrap();
            writeln!(text, "upper_value {}", num(to_f64(&hi))).unwrap();
            fields.insert("lower".into(), rational_json(&lo));
            fields.insert("upper".into(), rational_json(&hi));
        }
        IkrnMode::Asymptotic => {
            let v = ikrn_asymptotic(k, n);
            writeln!(text, "asymptotic {}", num(v)).unwrap();
            fields.insert("asymptotic".into(), json!(v));
        }
        IkrnMode::Mc => {
            let seed = args.seed.ok_or_else(|| input_error("--mode mc requires --seed"))?;
            let e = ikrn_monte_carlo(k, r, n, args.samples, seed)?;
            writeln!(text, "estimate {}", num(e.value)).unwrap();
            writeln!(text, "std_error {}", num(e.std_error)).unwrap();
            fields.insert("estimate".into(), json!(e.value));
            fields.insert("std_error".into(), json!(e.std_error));
            fields.insert("samples".into(), json!(args.samples));
            fields.insert("seed".into(), json!(seed));
        }
    }
    Ok(match args.format {
        TextFormat::Text => text,
        TextFormat::Json => pretty(&serde_json::Value::Object(fields)),
    })
}

fn read_model(model: &str) -> Result<ModelSpec, Failure> {
    let text = if model.trim_start().starts_with('{') {
        model.to_string()
    } else {
        std::fs::read_to_string(model)
            .map_err(|e| input_error(format!("cannot read model {model}: {e}")))?
    };
    ModelSpec::from_json_str(&text).map_err(|e| match e {
        Error::Json { line, column, message } => input_error(format!(
            "malformed model JSON at line {line}, column {column}: {message}"
        )),
        other => other.into(),
    })
}

fn cmd_morse(args: &MorseArgs) -> Result<String, Failure> {
    let sample = read_model(&args.model)?.build()?;
    let q: Vec<usize> = if args.q.is_empty() {
        (0..=sample.n()).collect()
    } else {
        args.q.clone()
    };
    let report = convergence_study(&sample, &args.k_list, &q, args.samples, args.seed, args.tol)?;
    match &args.out {
        Some(prefix) => {
            let with_ext = |ext: &str| {
                let mut p = prefix.clone().into_os_string();
                p.push(ext);
                PathBuf::from(p)
            };
            let (csv, js) = (with_ext(".csv"), with_ext(".json"));
            std::fs::write(&csv, report.to_csv())
                .map_err(|e| input_error(format!("cannot write {}: {e}", csv.display())))?;
            std::fs::write(&js, report.to_json())
                .map_err(|e| input_error(format!("cannot write {}: {e}", js.display())))?;
            Ok(String::new())
        }
        None => Ok(match args.format {
            TableFormat::Csv => report.to_csv(),
            TableFormat::Json => report.to_json(),
        }),
    }
}

fn cmd_ci_threshold(args: &CiArgs) -> Result<String, Failure> {
    let mut spec = CompleteIntersectionSpec::new(args.n, args.degrees.clone(), args.a)?;
    if let Some(s) = args.s {
        spec.s = s;
    }
    let ln_k = ci_threshold(&spec)?;
    let limit = ci_threshold_limit(spec.n);
    let diag = args.k.map(|k| ci_diagnostics(&spec, k)).transpose()?;
    Ok(match args.format {
        TextFormat::Json => pretty(&json!({
            "n": spec.n,
            "s": spec.s,
            "degrees": spec.degrees,
            "a": spec.a,
            "ln_k_min": ln_k,
            "log10_k_min": ln_k / std::f64::consts::LN_10,
            "large_degree_limit": limit,
            "diagnostics": diag,
        })),
        TextFormat::Text => {
            let mut s = String::new();
            writeln!(s, "ln_k_min {}", num(ln_k)).unwrap();
            writeln!(s, "log10_k_min {}", num(ln_k / std::f64::consts::LN_10)).unwrap();
            writeln!(s, "large_degree_limit {}", num(limit)).unwrap();
            if let Some(d) = diag {
                writeln!(s, "k {}", d.k).unwrap();
                match d.epsilon {
                    Some(e) => writeln!(s, "epsilon {}", num(e)).unwrap(),
                    None => writeln!(s, "epsilon not evaluated (k too large)").unwrap(),
                }
                writeln!(s, "epsilon_log_bound {}", num(d.epsilon_log_bound)).unwrap();
                writeln!(s, "j_bound {}", num(d.j_bound)).unwrap();
                writeln!(s, "eta_volume {}", num(d.eta_volume)).unwrap();
                writeln!(s, "omega_volume {}", num(d.omega_volume)).unwrap();
                writeln!(s, "margin {}", num(d.margin)).unwrap();
            }
            s
        }
    })
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(input_error("--threads must be at least 1"));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| Failure { code: 4, message: format!("cannot start worker pool: {e}") })?;
    pool.install(|| match &cli.command {
        Command::WpsVolume(a) => cmd_wps_volume(a),
        Command::Ikrn(a) => cmd_ikrn(a),
        Command::Morse(a) => cmd_morse(a),
        Command::CiThreshold(a) => cmd_ci_threshold(a),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
