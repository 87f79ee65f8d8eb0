//! Command-line front end: loads instances, runs the verification suites and
//! prints reports. Exit status 0 when every check passes, 1 when one fails,
//! 2 on invalid input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tribekit::clan::{slice_clan, verify_clan, ClanStructure};
use tribekit::fincat::Category;
use tribekit::models::load::{load_presentation, parse_presentation};
use tribekit::models::universe::{check_universe, generate_universe, UniverseChecks, UniverseSpec};
use tribekit::pi::poly::{compose_spans, eval_polynomial, verify_composite, Family, PolynomialSpan};
use tribekit::pi::{verify_pi_tribe, Law, PiSuiteOptions};
use tribekit::sample::seed_from_env;
use tribekit::tribe::{
    factorization_witness, homotopy_category, homotopy_relation_report, is_n_truncated, verify_tribe, Tribe,
};
use tribekit::{Check, Status, VerificationReport};

#[derive(Parser)]
#[command(name = "tribekit", version, about = "Checks clans, tribes and π-tribes on finite instances")]
struct Cli {
    /// Print the report as JSON on standard output.
    #[arg(long, global = true)]
    json: bool,
    /// Largest number of morphisms accepted in a loaded or derived presentation.
    #[arg(long, global = true, default_value_t = 512)]
    max_size: usize,
    /// Instances sampled per quantified check in `gpd check`.
    #[arg(long, global = true, default_value_t = 20)]
    cap: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Clan,
    Tribe,
    Pi,
}

#[derive(Subcommand)]
enum Command {
    /// Run the clan, tribe or π-tribe suite on a presentation.
    Check { level: Level, file: PathBuf },
    /// The slice clan over an object.
    Slice {
        file: PathBuf,
        #[arg(long)]
        at: String,
    },
    /// The AF-factorization of a map.
    Factorize {
        file: PathBuf,
        #[arg(long)]
        map: String,
    },
    /// The homotopy category.
    Hocat { file: PathBuf },
    /// Whether two parallel maps are homotopic.
    Homotopic {
        file: PathBuf,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
    /// Whether a map is n-truncated.
    Truncate {
        file: PathBuf,
        #[arg(long)]
        map: String,
        #[arg(long, allow_hyphen_values = true)]
        level: i32,
    },
    /// Polynomial functors between finite sets.
    #[command(subcommand)]
    Poly(PolyCommand),
    /// Finite groupoid universes.
    #[command(subcommand)]
    Gpd(GpdCommand),
}

#[derive(Subcommand)]
enum PolyCommand {
    /// Evaluate a span on a family over its source.
    Eval { span: PathBuf, input: PathBuf },
    /// Compose two spans and compare with the composite functor.
    Compose {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value_t = 4)]
        verify_upto: usize,
    },
}

#[derive(Subcommand)]
enum GpdCommand {
    /// Generate a universe and run the suites and laws on it.
    Check {
        /// A universe spec file, or `standard`.
        #[arg(long)]
        universe: String,
        /// Comma-separated laws.
        #[arg(long, value_delimiter = ',')]
        laws: Vec<String>,
    },
}

struct Outcome {
    report: VerificationReport,
    result: Option<Value>,
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn clan_from(path: &Path, max: usize) -> Result<ClanStructure, String> {
    load_presentation(&read(path)?, max).map_err(|e| e.to_string())
}

fn unchecked_clan_from(path: &Path, max: usize) -> Result<ClanStructure, String> {
    let p = parse_presentation(&read(path)?).map_err(|e| e.to_string())?;
    ClanStructure::from_presentation(&p, max).map_err(|e| e.to_string())
}

fn morphism(c: &ClanStructure, name: &str) -> Result<usize, String> {
    c.morphism(name).map_err(|e| e.to_string())
}

fn run(cli: &Cli) -> Result<Outcome, String> {
    let max = cli.max_size;
    let only = |report| Ok(Outcome { report, result: None });
    match &cli.command {
        Command::Check { level, file } => {
            let c = unchecked_clan_from(file, max)?;
            only(match level {
                Level::Clan => verify_clan(&c),
                Level::Tribe => verify_tribe(&c),
                Level::Pi => verify_pi_tribe(&c, &PiSuiteOptions { seed: seed_from_env(), ..Default::default() }),
            })
        }
        Command::Slice { file, at } => {
            let c = clan_from(file, max)?;
            let a = c.object(at).map_err(|e| e.to_string())?;
            let s = slice_clan(&c, a, max).map_err(|e| e.to_string())?;
            Ok(Outcome { report: verify_clan(&s), result: Some(json!(s.to_presentation())) })
        }
        Command::Factorize { file, map } => {
            let c = clan_from(file, max)?;
            let f = morphism(&c, map)?;
            let mut report = VerificationReport::new();
            report.push(Check::from_witness("af_factorization", factorization_witness(&c, &f)));
            let result = c.af_factorize(&f).map(|(u, p)| {
                json!({"map": map, "anodyne": c.mor_label(&u), "fibration": c.mor_label(&p), "middle": c.obj_label(&c.cod(&u))})
            });
            Ok(Outcome { report, result })
        }
        Command::Hocat { file } => {
            let c = clan_from(file, max)?;
            let ho = homotopy_category(&c);
            let (p, quotient) = ho.to_presentation(&c);
            Ok(Outcome {
                report: homotopy_relation_report(&c),
                result: Some(json!({"classes": ho.num_classes(), "presentation": p, "quotient": quotient})),
            })
        }
        Command::Homotopic { file, f, g } => {
            let c = clan_from(file, max)?;
            let (fm, gm) = (morphism(&c, f)?, morphism(&c, g)?);
            if c.dom(&fm) != c.dom(&gm) || c.cod(&fm) != c.cod(&gm) {
                return Err(format!("{f} and {g} are not parallel"));
            }
            let check = match c.homotopy(&fm, &gm) {
                Some(h) => Check {
                    name: "homotopic".into(),
                    status: Status::Pass,
                    witness: Some(json!({"homotopy": c.mor_label(&h)})),
                    elapsed_ms: 0,
                },
                None => Check::fail("homotopic", json!({"f": f, "g": g})),
            };
            only(VerificationReport { checks: vec![check] })
        }
        Command::Truncate { file, map, level } => {
            let c = clan_from(file, max)?;
            let f = morphism(&c, map)?;
            let ok = is_n_truncated(&c, &f, *level).map_err(|e| e.to_string())?;
            let name = format!("{level}-truncated");
            let check = if ok { Check::pass(name) } else { Check::fail(name, json!({"map": map})) };
            only(VerificationReport { checks: vec![check] })
        }
        Command::Poly(PolyCommand::Eval { span, input }) => {
            let p = PolynomialSpan::from_json(&read(span)?).map_err(|e| e.to_string())?;
            let x: Family = serde_json::from_str(&read(input)?).map_err(|e| format!("family: {e}"))?;
            let out = eval_polynomial(&p, &x).map_err(|e| e.to_string())?;
            let sizes: serde_json::Map<String, Value> =
                p.j.iter().map(|j| (j.clone(), json!(out.over.values().filter(|v| *v == j).count()))).collect();
            Ok(Outcome { report: VerificationReport::new(), result: Some(json!({"family": out, "sizes": sizes})) })
        }
        Command::Poly(PolyCommand::Compose { first, second, verify_upto }) => {
            let p = PolynomialSpan::from_json(&read(first)?).map_err(|e| e.to_string())?;
            let q = PolynomialSpan::from_json(&read(second)?).map_err(|e| e.to_string())?;
            let r = compose_spans(&p, &q).map_err(|e| e.to_string())?;
            let compiled = |s: &PolynomialSpan| s.compile().map_err(|e| e.to_string());
            let report = verify_composite(&compiled(&p)?, &compiled(&q)?, &compiled(&r)?, *verify_upto);
            Ok(Outcome { report, result: Some(json!(r)) })
        }
        Command::Gpd(GpdCommand::Check { universe, laws }) => {
            let spec = if universe == "standard" {
                UniverseSpec::standard()
            } else {
                UniverseSpec::from_json(&read(Path::new(universe))?).map_err(|e| e.to_string())?
            };
            let laws = laws.iter().map(|l| l.parse::<Law>()).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
            let u = generate_universe(&spec).map_err(|e| e.to_string())?;
            let report = check_universe(&u, &UniverseChecks { laws, cap: cli.cap, seed: seed_from_env() });
            Ok(Outcome { report, result: Some(json!({"members": u.names()})) })
        }
    }
}

fn print_human(o: &Outcome) {
    for c in &o.report.checks {
        let tag = match c.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Skipped => "skip",
        };
        match (&c.status, &c.witness) {
            (Status::Pass, _) | (_, None) => println!("{tag}  {}", c.name),
            (_, Some(w)) => println!("{tag}  {}  {w}", c.name),
        }
    }
    if let Some(r) = &o.result {
        println!("{}", serde_json::to_string_pretty(r).expect("serializable"));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Ok(o) => {
            if cli.json {
                let mut doc = json!({"checks": o.report.checks});
                if let Some(r) = &o.result {
                    doc["result"] = r.clone();
                }
                println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
            } else {
                print_human(&o);
            }
            if o.report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
