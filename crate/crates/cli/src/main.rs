use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use jumploci::alexander::{theorem4_cover_check, weights_and_w};
use jumploci::higgs::{theorem3_sweep, ComplexTorusModel};
use jumploci::jump::{
    abelian_cover_certificate, certify_component, count_ng, discover_components, numeric_unitary_scan,
    twisted_cohomology_dims, Group, Status,
};
use jumploci::presentation::{from_json_str, to_json_value, FinitePresentation};
use jumploci::report::{envelope, refusal, to_canonical_string};
use jumploci::torus::{orbit_closure, parse_rational, Character, TranslatedSubtorus, Variant};
use jumploci::{corpus, Error};

#[derive(Parser)]
#[command(
    name = "jumploci",
    version,
    about = "Cohomology jump loci of finitely presented groups"
)]
struct Cli {
    /// Worker threads for scans (defaults to one per core).
    #[arg(long, global = true, env = "JUMPLOCI_THREADS")]
    threads: Option<usize>,

    /// Seed for numeric sampling; echoed in every report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Scan {
    /// Cohomological degree.
    #[arg(long = "i", default_value_t = 1)]
    i: usize,
    /// Multiplicity threshold.
    #[arg(long = "m", default_value_t = 1)]
    m: usize,
    /// Largest character order scanned.
    #[arg(long = "K", default_value_t = 6)]
    k: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Abelianization, cohomology at 1 and the components of Σ_m^i.
    Analyze {
        /// Presentation file, or a corpus name (`corpus:<name>` to force).
        input: String,
        #[command(flatten)]
        scan: Scan,
        /// Also sample random unitary characters numerically.
        #[arg(long)]
        numeric_fallback: bool,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Number of certified components of Σ¹ of dimension 2g through 1.
    Ng {
        input: String,
        #[arg(long = "g")]
        g: usize,
        #[arg(long = "K", default_value_t = 6)]
        k: u64,
    },
    /// Exact test of Σ_m^i on the generic point of a translated subtorus.
    Certify {
        input: String,
        /// Cocharacter rows, `;`-separated, entries `,`-separated.
        #[arg(long)]
        lattice: String,
        /// Translate angles on the free part (turns); default 0.
        #[arg(long)]
        angles: Option<String>,
        /// Translate residues on the torsion part; default 0.
        #[arg(long)]
        finite: Option<String>,
        #[arg(long = "i", default_value_t = 1)]
        i: usize,
        #[arg(long = "m", default_value_t = 1)]
        m: usize,
    },
    /// Finite cyclic cover on which a positive-dimensional component of Σ¹
    /// passes through 1.
    Cover {
        input: String,
        #[arg(long = "K", default_value_t = 6)]
        k: u64,
    },
    /// Zariski closure of the R⁺-orbit of an exact character.
    Orbit {
        #[arg(long)]
        moduli: String,
        #[arg(long)]
        angles: String,
        #[arg(long, default_value = "B")]
        variant: Variant,
    },
    /// Weights of the maximal abelian cover, compared with Σ⁰ ∪ Σ¹.
    Weights {
        input: String,
        #[arg(long = "N", default_value_t = 2)]
        n_bound: usize,
        #[arg(long = "K", default_value_t = 6)]
        k: u64,
    },
    /// Rescan Σ on the finite abelian cover that kills every weight.
    Thm4 {
        input: String,
        #[arg(long = "N", default_value_t = 2)]
        n_bound: usize,
        #[arg(long = "K", default_value_t = 6)]
        k: u64,
    },
    /// Higgs line bundles on complex tori.
    Higgs {
        #[command(subcommand)]
        command: HiggsCommand,
    },
}

#[derive(Subcommand)]
enum HiggsCommand {
    /// Compare local system and Higgs cohomology at sampled characters.
    VerifyThm3 {
        #[arg(long = "n", default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Model file `{"n": .., "period": [[[re, im], ..], ..]}`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

enum Failure {
    Library(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

struct Config {
    input: Option<String>,
    i: usize,
    m: usize,
    k: u64,
    g: Option<usize>,
    n_bound: Option<usize>,
    variant: Variant,
    numeric_fallback: bool,
}

impl Config {
    fn new() -> Self {
        Config {
            input: None,
            i: 1,
            m: 1,
            k: 6,
            g: None,
            n_bound: None,
            variant: Variant::B,
            numeric_fallback: false,
        }
    }

    fn to_json(&self, output: &Option<PathBuf>) -> Value {
        json!({
            "input": self.input,
            "i": self.i,
            "m": self.m,
            "K": self.k,
            "g": self.g,
            "N": self.n_bound,
            "variant": self.variant.to_string(),
            "numeric_fallback": self.numeric_fallback,
            "output": output.as_ref().map(|p| p.display().to_string()),
        })
    }
}

fn read_presentation(input: &str) -> Result<FinitePresentation, Failure> {
    if let Some(name) = input.strip_prefix("corpus:") {
        return Ok(corpus::load(name)?);
    }
    // bare corpus names, unless shadowed by a file
    if !std::path::Path::new(input).exists() && corpus::source(input).is_some() {
        return Ok(corpus::load(input)?);
    }
    let text = std::fs::read_to_string(input).map_err(|e| Failure::Input(format!("{}: {}", input, e)))?;
    Ok(from_json_str(&text)?)
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T, Error>) -> Result<Vec<T>, Error> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(f).collect()
}

fn parse_int(s: &str) -> Result<i64, Error> {
    s.parse().map_err(|_| Error::Parse {
        location: format!("{:?}", s),
        message: "expected an integer".into(),
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Analyze { .. } => "analyze",
        Command::Ng { .. } => "ng",
        Command::Certify { .. } => "certify",
        Command::Cover { .. } => "cover",
        Command::Orbit { .. } => "orbit",
        Command::Weights { .. } => "weights",
        Command::Thm4 { .. } => "thm4",
        Command::Higgs { .. } => "higgs-verify-thm3",
    }
}

/// Fills `cfg` from the arguments, then runs. Returns the result and a one
/// line summary.
fn run(command: &Command, cfg: &mut Config, seed: u64) -> Result<(Value, String), Failure> {
    match command {
        Command::Analyze {
            input,
            scan,
            numeric_fallback,
            samples,
        } => {
            cfg.input = Some(input.clone());
            cfg.i = scan.i;
            cfg.m = scan.m;
            cfg.k = scan.k;
            cfg.numeric_fallback = *numeric_fallback;
            let group = Group::new(read_presentation(input)?);
            let trivial = twisted_cohomology_dims(&group, &group.trivial_character())?;
            let report = discover_components(&group, scan.i, scan.m, scan.k)?;
            let numeric = if *numeric_fallback {
                Some(numeric_unitary_scan(&group, &report, *samples, seed)?.to_json())
            } else {
                None
            };
            let certified = report.certified().count();
            let candidates = report
                .components
                .iter()
                .filter(|c| c.status == Status::Candidate)
                .count();
            let summary = format!(
                "Σ_{}^{}: {} members at order ≤ {}, {} certified component(s), {} candidate(s)",
                scan.m,
                scan.i,
                report.members.len(),
                scan.k,
                certified,
                candidates
            );
            let result = json!({
                "presentation": to_json_value(group.presentation()),
                "h1": { "free_rank": group.free_rank(), "torsion": group.torsion() },
                "trivial_dims": trivial.to_json(),
                "locus": report.to_json(),
                "numeric": numeric,
            });
            Ok((result, summary))
        }
        Command::Ng { input, g, k } => {
            cfg.input = Some(input.clone());
            cfg.g = Some(*g);
            cfg.k = *k;
            let group = Group::new(read_presentation(input)?);
            let n = count_ng(&group, *g, *k)?;
            Ok((json!({ "N_g": n, "g": g, "K": k }), format!("N_{} = {}", g, n)))
        }
        Command::Certify {
            input,
            lattice,
            angles,
            finite,
            i,
            m,
        } => {
            cfg.input = Some(input.clone());
            cfg.i = *i;
            cfg.m = *m;
            let group = Group::new(read_presentation(input)?);
            let rows: Vec<Vec<i64>> = lattice
                .split(';')
                .map(str::trim)
                .filter(|r| !r.is_empty())
                .map(|r| parse_list(r, parse_int))
                .collect::<Result<_, _>>()?;
            let b = group.free_rank();
            let angles = match angles {
                Some(a) => parse_list(a, parse_rational)?,
                None => vec![num::BigRational::from_integer(0.into()); b],
            };
            let finite = match finite {
                Some(f) => parse_list(f, |x| parse_int(x).map(|v| v as u64))?,
                None => vec![0; group.torsion().len()],
            };
            let tau = Character::unitary(angles, finite, group.torsion().to_vec())?;
            let t = TranslatedSubtorus::from_lattice(&rows, &tau)?;
            let c = certify_component(&group, &t, *i, *m)?;
            let summary = format!(
                "dimension {} coset {}",
                t.dimension(),
                if c.certified { "certified" } else { "refuted" }
            );
            let result = json!({
                "subtorus": t.to_json(),
                "certified": c.certified,
                "generic_rank": c.generic_rank,
                "generic_dims": c.generic.to_json(),
            });
            Ok((result, summary))
        }
        Command::Cover { input, k } => {
            cfg.input = Some(input.clone());
            cfg.k = *k;
            let group = Group::new(read_presentation(input)?);
            let report = discover_components(&group, 1, 1, *k)?;
            let cert = abelian_cover_certificate(&group, &report)?;
            let summary = match &cert {
                Some(c) => format!(
                    "index {} cover, pulled-back component {}",
                    c.cover.index,
                    if c.passes() {
                        "certified through 1"
                    } else {
                        "not certified"
                    }
                ),
                None => "no positive-dimensional certified component".into(),
            };
            Ok((json!({ "certificate": cert.map(|c| c.to_json()) }), summary))
        }
        Command::Orbit {
            moduli,
            angles,
            variant,
        } => {
            cfg.variant = *variant;
            let moduli = parse_list(moduli, parse_rational)?;
            let angles = parse_list(angles, parse_rational)?;
            let chi = Character::exact(moduli, angles, vec![], vec![])?;
            let t = orbit_closure(&chi, *variant)?;
            let summary = format!("orbit closure of dimension {}", t.dimension());
            Ok((t.to_json(), summary))
        }
        Command::Weights { input, n_bound, k } => {
            cfg.input = Some(input.clone());
            cfg.n_bound = Some(*n_bound);
            cfg.k = *k;
            let group = Group::new(read_presentation(input)?);
            let r = weights_and_w(&group, *n_bound, *k)?;
            let summary = format!(
                "{} weight(s); W⁻¹ {} Σ over order ≤ {}",
                r.w.len(),
                if r.cross_check() { "=" } else { "≠" },
                k
            );
            Ok((r.to_json(), summary))
        }
        Command::Thm4 { input, n_bound, k } => {
            cfg.input = Some(input.clone());
            cfg.n_bound = Some(*n_bound);
            cfg.k = *k;
            let group = Group::new(read_presentation(input)?);
            let r = theorem4_cover_check(&group, *n_bound, *k)?;
            let summary = format!(
                "index {} cover: {} surviving character(s), {}",
                r.index,
                r.survivors.len(),
                if r.passes() { "pass" } else { "fail" }
            );
            Ok((r.to_json(), summary))
        }
        Command::Higgs {
            command: HiggsCommand::VerifyThm3 { n, samples, model },
        } => {
            let model = match model {
                Some(path) => {
                    cfg.input = Some(path.display().to_string());
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Failure::Input(format!("{}: {}", path.display(), e)))?;
                    let v: Value = serde_json::from_str(&text).map_err(|e| {
                        Failure::Library(Error::Parse {
                            location: format!("line {} column {}", e.line(), e.column()),
                            message: e.to_string(),
                        })
                    })?;
                    ComplexTorusModel::from_json(&v)?
                }
                None => ComplexTorusModel::standard(*n)?,
            };
            let r = theorem3_sweep(&model, *samples, seed)?;
            let summary = format!(
                "n = {}: {} sample(s), {} failure(s)",
                model.dimension(),
                r.samples,
                r.failures.len()
            );
            let mut result = r.to_json();
            result["model"] = model.to_json();
            Ok((result, summary))
        }
    }
}

fn emit(text: &str, output: &Option<PathBuf>) -> Result<(), String> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {}", path.display(), e)),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {}", e);
            return ExitCode::from(1);
        }
    }
    let name = command_name(&cli.command);
    let mut cfg = Config::new();
    let outcome = run(&cli.command, &mut cfg, cli.seed);
    let config = cfg.to_json(&cli.output);
    let (report, code, summary) = match outcome {
        Ok((result, summary)) => (envelope(name, config, cli.seed, result), 0, summary),
        Err(Failure::Library(e)) if e.is_refusal() => {
            let reason = e.to_string();
            (
                refusal(name, config, cli.seed, &reason),
                2,
                format!("refused: {}", reason),
            )
        }
        Err(Failure::Library(e)) => {
            eprintln!("error: {}", e);
            return ExitCode::from(1);
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {}", msg);
            return ExitCode::from(1);
        }
    };
    if let Err(msg) = emit(&to_canonical_string(&report), &cli.output) {
        eprintln!("error: {}", msg);
        return ExitCode::from(1);
    }
    eprintln!("{}: {}", name, summary);
    ExitCode::from(code)
}
