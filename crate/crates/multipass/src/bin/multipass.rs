use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use multipass::closures::{complement, intersection, profile_decomposition, union};
use multipass::format;
use multipass::groups::{build_wp, wp_pullback};
use multipass::gsm::{interleaved_product, inverse_gsm, left_quotient};
use multipass::machine::{MultipassAutomaton, Verdict, Word, DEFAULT_BUDGET};
use multipass::oracles::{self, Oracle};
use multipass::pda::{onepass_to_pda, pda_to_onepass};
use multipass::verify::verify;
use multipass::words;
use multipass::Error;

const EXIT_OK: u8 = 0;
const EXIT_SEMANTIC: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_PARSE: u8 = 3;

#[derive(Parser)]
#[command(name = "multipass", about = "Multipass automata toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a machine file and print its validation report.
    Validate { machine: PathBuf },
    /// Run a machine on a word and print the verdict and step count.
    Run {
        machine: PathBuf,
        /// Whitespace-separated symbols, e.g. "a b a^-1 b^-1".
        word: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Machine constructions; each writes a machine file.
    #[command(subcommand)]
    Build(BuildCommand),
    /// Compare a machine against an oracle on all words up to a length.
    Verify {
        machine: PathBuf,
        /// Oracle spec file ({"family": ...}).
        oracle: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Worker threads; defaults to the machine core count.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Oracle evaluation and Parikh utilities.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args)]
struct OutputArg {
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BuildCommand {
    /// Complement of a complete deterministic machine.
    Complement {
        machine: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Union of two machines over the same alphabet and mode.
    Union {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Intersection of two machines over the same alphabet and mode.
    Intersection {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Profile decomposition into one-pass slice machines.
    Profiles {
        machine: PathBuf,
        /// Output directory for the slice machine files.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Convert a PDA file to an equivalent one-pass machine.
    Pda2mp {
        pda: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Convert a one-pass machine file to an equivalent PDA.
    Mp2pda {
        machine: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Inverse gsm image g⁻¹(L(M)).
    Invgsm {
        machine: PathBuf,
        gsm: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Interleaved product of two or more machines.
    Interleave {
        machines: Vec<PathBuf>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Left quotient K⁻¹L for a finite word set K.
    Lquot {
        machine: PathBuf,
        /// Quotient words, each a whitespace-separated symbol list
        /// (use "" for the empty word).
        words: Vec<String>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Word-problem machine from a group spec file.
    Wp {
        spec: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Pullback along generator images (JSON object symbol → word).
    Pullback {
        machine: PathBuf,
        images: PathBuf,
        #[command(flatten)]
        out: OutputArg,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Evaluate a word in the oracle and report identity membership.
    Eval {
        oracle: PathBuf,
        word: String,
    },
    /// Parikh vector of a word over an explicit alphabet ordering.
    Parikh {
        word: String,
        /// Whitespace-separated alphabet ordering.
        #[arg(long)]
        alphabet: String,
    },
    /// Parikh image of the oracle's identity language, one vector per line.
    ParikhImage {
        oracle: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        /// Restrict enumeration to the block pattern t⁺ b t⁻¹⁺ b⁻¹⁺.
        #[arg(long)]
        bs_pattern: bool,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Io(_) | Error::InvalidMachine(_) => EXIT_PARSE,
        _ => EXIT_SEMANTIC,
    }
}

fn read_to_string(path: &Path) -> multipass::Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_machine(path: &Path) -> multipass::Result<MultipassAutomaton> {
    format::machine_from_json(&read_to_string(path)?)
}

fn load_oracle(path: &Path) -> multipass::Result<Oracle> {
    serde_json::from_str(&read_to_string(path)?)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn emit(text: &str, output: &Option<PathBuf>) -> multipass::Result<()> {
    match output {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run() -> multipass::Result<u8> {
    match Cli::parse().command {
        Command::Validate { machine } => {
            let m = load_machine(&machine)?;
            let report = m.validate();
            for issue in report.issues.iter() {
                let tag = match issue.severity {
                    multipass::machine::Severity::Error => "error",
                    multipass::machine::Severity::Warning => "warning",
                };
                println!("{tag}: {}", issue.message);
            }
            if report.is_valid() {
                println!("valid");
                Ok(EXIT_OK)
            } else {
                Ok(EXIT_SEMANTIC)
            }
        }
        Command::Run {
            machine,
            word,
            budget,
        } => {
            let m = load_machine(&machine)?;
            let w = words::word(&word);
            for sym in &w {
                if !m.input_alphabet.contains(sym) {
                    return Err(Error::Parse(format!(
                        "symbol {sym:?} is not in the machine alphabet"
                    )));
                }
            }
            let trace = m.run(&w, budget);
            println!("{}", trace.verdict);
            println!("steps: {}", trace.steps_total);
            Ok(match trace.verdict {
                Verdict::BudgetExceeded => EXIT_BUDGET,
                _ => EXIT_OK,
            })
        }
        Command::Build(cmd) => run_build(cmd),
        Command::Verify {
            machine,
            oracle,
            max_len,
            budget,
            jobs,
        } => {
            if let Some(n) = jobs {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| Error::Precondition(e.to_string()))?;
            }
            let m = load_machine(&machine)?;
            let o = load_oracle(&oracle)?;
            let report = verify(
                &m,
                &o,
                &machine.display().to_string(),
                max_len,
                budget,
            )?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serialization")
            );
            if report.ok() {
                Ok(EXIT_OK)
            } else if !report.disagreements.is_empty()
                || report.linear_bound.as_ref().is_some_and(|lb| lb.violations > 0)
            {
                Ok(EXIT_SEMANTIC)
            } else {
                Ok(EXIT_BUDGET)
            }
        }
        Command::Oracle(cmd) => run_oracle(cmd),
    }
}

fn run_build(cmd: BuildCommand) -> multipass::Result<u8> {
    match cmd {
        BuildCommand::Complement { machine, out } => {
            let m = complement(&load_machine(&machine)?)?;
            emit(&format::machine_to_json(&m), &out.output)?;
        }
        BuildCommand::Union { left, right, out } => {
            let m = union(&load_machine(&left)?, &load_machine(&right)?)?;
            emit(&format::machine_to_json(&m), &out.output)?;
        }
        BuildCommand::Intersection { left, right, out } => {
            let m = intersection(&load_machine(&left)?, &load_machine(&right)?)?;
            emit(&format::machine_to_json(&m), &out.output)?;
        }
        BuildCommand::Profiles { machine, output } => {
            let m = load_machine(&machine)?;
            let decomposition = profile_decomposition(&m)?;
            let dir = output.unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir)?;
            for (i, (profile, slices)) in decomposition.iter().enumerate() {
                for (j, slice) in slices.iter().enumerate() {
                    let path = dir.join(format!("profile_{i}_pass_{}.json", j + 1));
                    std::fs::write(&path, format::machine_to_json(slice))?;
                    println!("{}", path.display());
                }
                let _ = profile;
            }
            println!("{} profiles", decomposition.len());
        }
        BuildCommand::Pda2mp { pda, out } => {
            let p = format::pda_from_json(&read_to_string(&pda)?)?;
            let m = pda_to_onepass(&p)?;
            emit(&format::machine_to_json(&m), &out.output)?;
        }
        BuildCommand::Mp2pda { machine, out } => {
            let p = onepass_to_pda(&load_machine(&machine)?)?;
            emit(&format::pda_to_json(&p), &out.output)?;
        }
        BuildCommand::Invgsm { machine, gsm, out } => {
            let s = format::gsm_from_json(&read_to_string(&gsm)?)?;
            let m = inverse_gsm(&load_machine(&machine)?, &s)?;
            emit(&format::machine_to_json(&m), &out.output)?;
        }
        BuildCommand::Interleave { machines, out } => {
            let loaded: Vec<MultipassAutomaton> = machines
                .iter()
                .map(|p| load_machine(p))
                .collect::<multipass::Result<_>>()?;
            let m = interleaved_product(&loaded)?;
            emit(&format::machine_to_json(&m), &out.output)?;
        }
        BuildCommand::Lquot {
            machine,
            words: ws,
            out,
        } => {
            let k_set: Vec<Word> = ws.iter().map(|s| words::word(s)).collect();
            let m = left_quotient(&load_machine(&machine)?, &k_set)?;
            emit(&format::machine_to_json(&m), &out.output)?;
        }
        BuildCommand::Wp { spec, out } => {
            let s = format::group_spec_from_json(&read_to_string(&spec)?)?;
            let m = build_wp(&s)?;
            emit(&format::machine_to_json(&m), &out.output)?;
        }
        BuildCommand::Pullback {
            machine,
            images,
            out,
        } => {
            let raw: BTreeMap<String, Word> =
                serde_json::from_str(&read_to_string(&images)?)
                    .map_err(|e| Error::Parse(e.to_string()))?;
            let m = wp_pullback(&load_machine(&machine)?, &raw)?;
            emit(&format::machine_to_json(&m), &out.output)?;
        }
    }
    Ok(EXIT_OK)
}

fn run_oracle(cmd: OracleCommand) -> multipass::Result<u8> {
    match cmd {
        OracleCommand::Eval { oracle, word } => {
            let o = load_oracle(&oracle)?;
            let w = words::word(&word);
            println!("{}", o.evaluate(&w)?);
            println!(
                "{}",
                if o.is_identity(&w)? {
                    "identity"
                } else {
                    "non-identity"
                }
            );
            Ok(EXIT_OK)
        }
        OracleCommand::Parikh { word, alphabet } => {
            let alpha = words::word(&alphabet);
            let v = oracles::parikh(&words::word(&word), &alpha)?;
            println!(
                "({})",
                v.iter()
                    .map(u64::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            );
            Ok(EXIT_OK)
        }
        OracleCommand::ParikhImage {
            oracle,
            max_len,
            bs_pattern,
        } => {
            let o = load_oracle(&oracle)?;
            let alphabet = o.alphabet();
            let pattern = bs_pattern.then(oracles::bs_pattern);
            let image = oracles::parikh_image(
                |w| o.is_identity(w).unwrap_or(false),
                &alphabet,
                pattern.as_deref(),
                max_len,
            )?;
            for v in image {
                println!(
                    "({})",
                    v.iter()
                        .map(u64::to_string)
                        .collect::<Vec<_>>()
                        .join(",")
                );
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
