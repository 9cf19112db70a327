//! Command-line front end: validation, property reports, abstraction
//! builders, ordering comparisons and the randomized law checker.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use domino_core::fuzz::{self, FuzzConfig};
use domino_core::relations::{canonical_relation, CanonicalKind};
use domino_core::report::{build_report, compare};
use domino_core::{
    behavior_included, build_abstract_machine, build_quotient_machine, dominoes, verify_simulation, Error,
    ExternalAlphabet, ExternalMode, IntervalSpec, Relation, StateMachine,
};

#[derive(Parser)]
#[command(name = "domino", version, about = "Window and quotient abstractions of nondeterministic machines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Kind {
    Salca,
    Qba,
}

#[derive(Args)]
struct Common {
    /// External alphabet observed by the abstractions
    #[arg(long, default_value = "y")]
    external: ExternalMode,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Exit with status 1 when the command reports a negative finding
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a machine file is separable, reachable and live
    Validate {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// List the dominoes of one length
    Dominoes {
        file: PathBuf,
        #[arg(long)]
        l: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate every predicate for window lengths up to `--l`
    Report {
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        l: usize,
        /// Bound on refinement steps; defaults to the number of states
        #[arg(long)]
        max_steps: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Build a window abstraction or a quotient
    Build {
        #[arg(value_enum)]
        kind: Kind,
        file: PathBuf,
        #[arg(long)]
        l: usize,
        /// Future part of the window; ignored by quotients
        #[arg(long, default_value_t = 0)]
        m: usize,
        /// Destination of the machine JSON; the DOT rendering and the
        /// canonical relation are written next to it
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Order the future-window abstraction, the quotient and the past-window
    /// abstraction by simulation over outputs
    Compare {
        file: PathBuf,
        #[arg(long)]
        l: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Check a relation file between two machines
    Simulate {
        left: PathBuf,
        right: PathBuf,
        #[arg(long)]
        relation: PathBuf,
        /// Require the inverse to be a simulation as well
        #[arg(long)]
        bisimulation: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Decide whether the behavior of one machine is contained in another's
    Include {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Generate random machines and check every law on them
    Fuzz {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 6)]
        max_states: usize,
        #[arg(long, default_value_t = 3)]
        max_inputs: usize,
        #[arg(long, default_value_t = 3)]
        max_outputs: usize,
        #[arg(long, default_value_t = 3)]
        l: usize,
        /// Directory receiving one JSON file per generated machine
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

struct Outcome {
    text: String,
    negative: bool,
}

fn load(path: &Path) -> Result<StateMachine, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    StateMachine::from_json(&text)
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report values serialize");
    s.push('\n');
    s
}

fn no_dot(what: &str) -> Error {
    Error::Parse(format!("{what} has no DOT rendering"))
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Validate { file, common } => {
            let q = load(&file)?;
            let v = q.validate();
            let text = match common.format {
                Format::Json => json(&v),
                Format::Text => {
                    let failures = v.failures();
                    if failures.is_empty() {
                        "accepted\n".to_string()
                    } else {
                        format!("not accepted: {}\n", failures.join(", "))
                    }
                }
                Format::Dot => q.to_dot("machine"),
            };
            Ok(Outcome {
                text,
                negative: !v.failures().is_empty(),
            })
        }
        Command::Dominoes { file, l, common } => {
            let q = load(&file)?;
            let d = dominoes(&q, common.external, l)?;
            let alphabet = ExternalAlphabet::of(&q, common.external);
            let text = match common.format {
                Format::Json => {
                    let names: Vec<String> = d.windows.iter().map(|w| alphabet.window_name(w)).collect();
                    json(&names)
                }
                Format::Text => d.render(&alphabet),
                Format::Dot => return Err(no_dot("a domino set")),
            };
            Ok(Outcome { text, negative: false })
        }
        Command::Report { file, l, max_steps, common } => {
            let q = load(&file)?;
            let r = build_report(&q, common.external, l, max_steps)?;
            let negative = r.specs.iter().any(|s| !s.future_unique || !s.sbalc)
                || r.levels.iter().any(|v| !v.async_complete || !v.domino_consistent || !v.fixed_point);
            let text = match common.format {
                Format::Json => json(&r),
                Format::Text => r.render_text(),
                Format::Dot => return Err(no_dot("a report")),
            };
            Ok(Outcome { text, negative })
        }
        Command::Build { kind, file, l, m, out, common } => {
            let q = load(&file)?;
            let (am, rel, name) = match kind {
                Kind::Salca => {
                    let spec = IntervalSpec::new(l, m)?;
                    let am = build_abstract_machine(&q, common.external, spec)?;
                    let rel = canonical_relation(CanonicalKind::StateToAbstract, &q, common.external, l, m)?;
                    (am, rel, format!("window_{l}_{m}"))
                }
                Kind::Qba => {
                    let am = build_quotient_machine(&q, l)?;
                    let rel = canonical_relation(CanonicalKind::StateToQuotient, &q, ExternalMode::Outputs, l, 0)?;
                    (am, rel, format!("quotient_{l}"))
                }
            };
            let machine_json = format!("{}\n", am.machine.to_json_pretty());
            let dot = am.machine.to_dot(&name);
            let relation = rel.relation.render(&q, &am.machine);
            let text = match &out {
                Some(path) => {
                    write(path, &machine_json)?;
                    write(&path.with_extension("dot"), &dot)?;
                    write(&path.with_extension("rel"), &relation)?;
                    format!(
                        "{name}: {} states, {} transitions -> {}\n",
                        am.machine.num_states(),
                        am.machine.transitions().len(),
                        path.display()
                    )
                }
                None => match common.format {
                    Format::Json => machine_json,
                    Format::Dot => dot,
                    Format::Text => relation,
                },
            };
            Ok(Outcome { text, negative: false })
        }
        Command::Compare { file, l, common } => {
            let q = load(&file)?;
            let c = compare(&q, l)?;
            let negative = c.bisimilar_to_source.is_empty();
            let text = match common.format {
                Format::Json => json(&c),
                Format::Text => c.render_text(),
                Format::Dot => return Err(no_dot("a comparison")),
            };
            Ok(Outcome { text, negative })
        }
        Command::Simulate {
            left,
            right,
            relation,
            bisimulation,
            common,
        } => {
            let q1 = load(&left)?;
            let q2 = load(&right)?;
            let text = fs::read_to_string(&relation).map_err(|e| Error::Parse(format!("{}: {e}", relation.display())))?;
            let r = Relation::parse(&text, &q1, &q2)?;
            let v = verify_simulation(&q1, &q2, common.external, &r, bisimulation)?;
            let lines = v.describe(&q1, &q2);
            let text = match common.format {
                Format::Json => json(&serde_json::json!({ "valid": v.valid, "failures": lines })),
                Format::Text => {
                    let mut s = format!("{}\n", if v.valid { "valid" } else { "invalid" });
                    for line in &lines {
                        s.push_str(&format!("  {line}\n"));
                    }
                    s
                }
                Format::Dot => return Err(no_dot("a simulation verdict")),
            };
            Ok(Outcome { text, negative: !v.valid })
        }
        Command::Include { left, right, common } => {
            let q1 = load(&left)?;
            let q2 = load(&right)?;
            let v = behavior_included(&q1, &q2, common.external)?;
            let text = match common.format {
                Format::Json => json(&v),
                Format::Text => match &v.counterexample {
                    None => "included\n".to_string(),
                    Some(word) => format!("not included: {}\n", word.join(" ")),
                },
                Format::Dot => return Err(no_dot("an inclusion verdict")),
            };
            Ok(Outcome {
                text,
                negative: !v.included,
            })
        }
        Command::Fuzz {
            seed,
            count,
            max_states,
            max_inputs,
            max_outputs,
            l,
            out,
            common,
        } => {
            let config = FuzzConfig {
                seed,
                max_states,
                max_inputs,
                max_outputs,
                count,
                max_l: l,
            };
            config.validate()?;
            if let Some(dir) = &out {
                fs::create_dir_all(dir).map_err(|e| Error::Parse(format!("{}: {e}", dir.display())))?;
                for (i, q) in fuzz::generate(&config).iter().enumerate() {
                    write(&dir.join(format!("machine_{i:04}.json")), &format!("{}\n", q.to_json_pretty()))?;
                }
            }
            let summary = fuzz::run(&config, true);
            let text = match common.format {
                Format::Json => json(&summary),
                Format::Text => summary.render_text(),
                Format::Dot => return Err(no_dot("a fuzz summary")),
            };
            Ok(Outcome {
                text,
                negative: !summary.all_passed(),
            })
        }
    }
}

fn strict(cli: &Cli) -> bool {
    match &cli.command {
        Command::Validate { common, .. }
        | Command::Dominoes { common, .. }
        | Command::Report { common, .. }
        | Command::Build { common, .. }
        | Command::Compare { common, .. }
        | Command::Simulate { common, .. }
        | Command::Include { common, .. }
        | Command::Fuzz { common, .. } => common.strict,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let strict = strict(&cli);
    match run(cli) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            if strict && outcome.negative {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
