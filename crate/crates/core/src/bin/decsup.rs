use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use decsup::checks::{
    check_cp_coobservable, check_da_coobservable, check_gen_coobservable, check_lang_controllable,
    check_marked_closed, check_plant_detspec_bisim, decide_existence, Entry, Verdict,
};
use decsup::io::dot::{export_dot, DotOptions};
use decsup::io::json::{bundle_json, oracle_row, verdict_json};
use decsup::io::problem_file::load_problem;
use decsup::io::text::{
    parse_automaton, parse_supervisor, write_automaton, write_relation, write_supervisor,
};
use decsup::io::Diagnostics;
use decsup::oracle::{oracle_check, problem_depth_bound, random_problem, Property, RandomLimits};
use decsup::{bisimilar, Alphabet, Architecture, Automaton, ControlProblem, Synthesis};

const EXIT_INPUT: u8 = 1;
const EXIT_REFUSED: u8 = 2;
const EXIT_DISAGREE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "decsup",
    version,
    about = "Decentralized bisimilarity supervisor checking and synthesis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(clap::Args)]
struct Common {
    /// Override the architecture named in the problem file.
    #[arg(long, value_parser = parse_arch)]
    arch: Option<Architecture>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn parse_arch(s: &str) -> Result<Architecture, String> {
    s.parse()
}

#[derive(Subcommand)]
enum Command {
    /// Parse a problem file and report whether it is well formed.
    Validate { problem: PathBuf },
    /// Decide whether supervisors exist; exit 0 iff every condition holds.
    Check {
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Build supervisors and the closed loop, or refuse with the verdict.
    Synthesize {
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Output directory; defaults to the file's `output` entry, then `synthesis`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether two automata are bisimilar.
    Bisim {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Compare every checker with the brute-force oracle.
    Oracle {
        /// Problem file; a random problem is generated from `--seed` when absent.
        problem: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        /// String length bound; defaults to the sound bound.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Print an automaton or supervisor file as Graphviz.
    ExportDot { file: PathBuf },
}

struct Failure(u8, String);

impl From<Diagnostics> for Failure {
    fn from(d: Diagnostics) -> Self {
        Failure(EXIT_INPUT, d.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn read_automaton(path: &Path) -> Result<Automaton, Failure> {
    parse_automaton(&read(path)?).map_err(|d| d.in_source(path.display().to_string()).into())
}

fn problem_with_arch(
    path: &Path,
    arch: Option<Architecture>,
) -> Result<(decsup::io::problem_file::ProblemFile, ControlProblem), Failure> {
    let (file, p) = load_problem(path)?;
    let p = match arch {
        Some(a) => p
            .with_architecture(a)
            .map_err(|e| Failure(EXIT_INPUT, e.to_string()))?,
        None => p,
    };
    Ok((file, p))
}

fn print_json(v: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("values serialize")
    );
}

fn entry_text(alphabet: &Alphabet, e: &Entry, indent: &str, out: &mut String) {
    let name = match e.condition.variant() {
        Some(v) => format!("{} ({})", e.condition.as_str(), v.as_str()),
        None => e.condition.as_str().to_string(),
    };
    match &e.witness {
        None => out.push_str(&format!("{indent}{name}: holds\n")),
        Some(w) => {
            out.push_str(&format!(
                "{indent}{name}: fails at s = {}",
                alphabet.format_string(&w.s)
            ));
            if let Some(sigma) = w.sigma {
                out.push_str(&format!(", σ = {}", alphabet.name(sigma)));
            }
            out.push('\n');
            for c in &w.per_agent {
                out.push_str(&format!(
                    "{indent}  agent {} confuses {}\n",
                    c.agent,
                    alphabet.format_string(&c.confusing)
                ));
            }
        }
    }
    for part in &e.parts {
        entry_text(alphabet, part, &format!("{indent}  "), out);
    }
}

fn verdict_text(alphabet: &Alphabet, v: &Verdict) -> String {
    let mut out = format!("architecture: {}\n", v.architecture);
    for e in &v.entries {
        entry_text(alphabet, e, "", &mut out);
    }
    out.push_str(&format!("overall: {}\n", v.overall));
    out
}

fn show_verdict(alphabet: &Alphabet, v: &Verdict, format: Format) {
    match format {
        Format::Json => print_json(&verdict_json(alphabet, v)),
        Format::Text => print!("{}", verdict_text(alphabet, v)),
    }
}

fn validate(path: &Path) -> Result<u8, Failure> {
    let (_, p) = load_problem(path)?;
    println!(
        "ok: {} agents, {} events, plant {} states, spec {} states, {}",
        p.agents().len(),
        p.alphabet().len(),
        p.plant().num_states(),
        p.spec().num_states(),
        p.architecture()
    );
    Ok(0)
}

fn check(path: &Path, common: &Common) -> Result<u8, Failure> {
    let (_, p) = problem_with_arch(path, common.arch)?;
    let v = decide_existence(&p);
    show_verdict(p.alphabet(), &v, common.format);
    Ok(if v.overall { 0 } else { EXIT_REFUSED })
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn synthesize_cmd(path: &Path, common: &Common, out: Option<&Path>) -> Result<u8, Failure> {
    let (file, p) = problem_with_arch(path, common.arch)?;
    let s = match decsup::synthesize(&p) {
        Synthesis::Refused(v) => {
            show_verdict(p.alphabet(), &v, common.format);
            return Ok(EXIT_REFUSED);
        }
        Synthesis::Synthesized(s) => s,
    };
    let dir = match (out, &file.output) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => path.parent().unwrap_or(Path::new(".")).join(o),
        (None, None) => PathBuf::from("synthesis"),
    };
    std::fs::create_dir_all(&dir)
        .map_err(|e| Failure(EXIT_INPUT, format!("{}: {e}", dir.display())))?;
    for sup in &s.supervisors {
        let name = format!("supervisor_{}.sup", sup.agent.index);
        write_file(
            &dir.join(name),
            &write_supervisor(&sup.automaton, &sup.decisions),
        )?;
    }
    let cl = &s.closed_loop.automaton;
    write_file(&dir.join("closed_loop.aut"), &write_automaton(cl))?;
    write_file(
        &dir.join("relation.txt"),
        &write_relation(cl, p.spec(), &s.relation.relation),
    )?;
    let bundle = bundle_json(p.plant(), p.spec(), &s);
    write_file(
        &dir.join("bundle.json"),
        &(serde_json::to_string_pretty(&bundle).expect("values serialize") + "\n"),
    )?;
    match common.format {
        Format::Json => print_json(&bundle),
        Format::Text => {
            print!("{}", verdict_text(p.alphabet(), &s.verdict));
            println!(
                "wrote {} supervisors and a closed loop with {} states to {}",
                s.supervisors.len(),
                cl.num_states(),
                dir.display()
            );
        }
    }
    Ok(0)
}

fn bisim_cmd(a: &Path, b: &Path, format: Format) -> Result<u8, Failure> {
    let x = read_automaton(a)?;
    let y = read_automaton(b)?;
    let y = y
        .with_alphabet(x.alphabet())
        .map_err(|e| Failure(EXIT_INPUT, e.to_string()))?;
    let w = bisimilar(&x, &y).map_err(|e| Failure(EXIT_INPUT, e.to_string()))?;
    let spine = w.counterexample.as_ref().map(|t| {
        t.spine()
            .iter()
            .map(|&e| x.alphabet().name(e).to_string())
            .collect::<Vec<_>>()
    });
    match format {
        Format::Json => print_json(&serde_json::json!({
            "schema": decsup::io::json::SCHEMA,
            "bisimilar": w.holds,
            "relation": w.relation.iter().map(|&(p, q)| [x.name(p), y.name(q)]).collect::<Vec<_>>(),
            "counterexample": spine,
        })),
        Format::Text => {
            println!("bisimilar: {}", w.holds);
            print!("{}", write_relation(&x, &y, &w.relation));
            if let Some(s) = spine {
                println!(
                    "distinguishing moves: {}",
                    if s.is_empty() {
                        "ε (marking)".into()
                    } else {
                        s.join(" ")
                    }
                );
            }
        }
    }
    Ok(if w.holds { 0 } else { EXIT_REFUSED })
}

fn oracle_cmd(
    path: Option<&Path>,
    common: &Common,
    seed: Option<u64>,
    depth: Option<usize>,
) -> Result<u8, Failure> {
    let p = match (path, seed) {
        (Some(path), _) => problem_with_arch(path, common.arch)?.1,
        (None, Some(seed)) => {
            let p = random_problem(seed, RandomLimits::default());
            match common.arch {
                Some(a) => p
                    .with_architecture(a)
                    .map_err(|e| Failure(EXIT_INPUT, e.to_string()))?,
                None => p,
            }
        }
        (None, None) => return Err(Failure(EXIT_INPUT, "give a problem file or --seed".into())),
    };
    let k = depth.unwrap_or_else(|| problem_depth_bound(&p));
    let mut rows = Vec::new();
    let mut disagree = false;
    for prop in Property::ALL {
        let checker = match prop {
            Property::BisimPlantDetspec => check_plant_detspec_bisim(&p),
            Property::LangControllable => check_lang_controllable(&p),
            Property::CpCoobservable => check_cp_coobservable(&p, None),
            Property::DaCoobservable => check_da_coobservable(&p, None),
            Property::GenCoobservable => match check_gen_coobservable(&p) {
                Ok(e) => e,
                Err(_) => continue,
            },
            Property::MarkedLangClosed => check_marked_closed(&p),
        };
        let o =
            oracle_check(prop.as_str(), &p, k).map_err(|e| Failure(EXIT_INPUT, e.to_string()))?;
        disagree |= checker.holds != o.holds;
        rows.push(oracle_row(p.alphabet(), prop.as_str(), checker.holds, &o));
    }
    match common.format {
        Format::Json => print_json(&serde_json::json!({
            "schema": decsup::io::json::SCHEMA,
            "seed": seed.filter(|_| path.is_none()),
            "rows": rows,
        })),
        Format::Text => {
            println!(
                "{:<22} {:>8} {:>8} {:>6}",
                "property", "checker", "oracle", "exact"
            );
            for r in &rows {
                println!(
                    "{:<22} {:>8} {:>8} {:>6}",
                    r["property"].as_str().unwrap_or_default(),
                    r["checker"].to_string(),
                    r["oracle"].to_string(),
                    r["exact"].to_string()
                );
            }
        }
    }
    Ok(if disagree { EXIT_DISAGREE } else { 0 })
}

fn export_dot_cmd(path: &Path) -> Result<u8, Failure> {
    let text = read(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let has_decisions = text.lines().any(|l| l.trim_start().starts_with("decision"));
    let options;
    let a = if has_decisions {
        let (a, d) = parse_supervisor(&text)
            .map_err(|d| Failure::from(d.in_source(path.display().to_string())))?;
        options = DotOptions {
            name,
            decisions: Some(d),
        };
        a
    } else {
        options = DotOptions {
            name,
            decisions: None,
        };
        read_automaton(path)?
    };
    print!("{}", export_dot(&a, &options));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { problem } => validate(problem),
        Command::Check { problem, common } => check(problem, common),
        Command::Synthesize {
            problem,
            common,
            out,
        } => synthesize_cmd(problem, common, out.as_deref()),
        Command::Bisim { a, b, format } => bisim_cmd(a, b, *format),
        Command::Oracle {
            problem,
            common,
            seed,
            depth,
        } => oracle_cmd(problem.as_deref(), common, *seed, *depth),
        Command::ExportDot { file } => export_dot_cmd(file),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
