use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pancake_core::cayley::{graph_metrics, CayleyError, DEFAULT_HAMILTON_BUDGET};
use pancake_core::classifier::{
    build_generates_witness, classify, ClassifierError, Triple, VerdictRecord,
};
use pancake_core::experiments::{
    check_conjecture_km_sum, check_conjecture_mod2, check_conjecture_mod4, fit_fn, fk_scan,
    read_fcounts_csv, render_svg, reproduce_tables, scan, write_fcounts_csv, write_metrics_csv,
    write_triples_csv, ExperimentError, OracleMode,
};
use pancake_core::grouptest::{group_order, GroupError};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "pancake",
    version,
    about = "Prefix-reversal triples and cubic pancake graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form verdict for one triple, as JSON.
    Classify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        /// Attach a constructive witness for generating triples.
        #[arg(long)]
        witness: bool,
        /// Re-verify the certificate of a negative verdict.
        #[arg(long)]
        certificate: bool,
    },
    /// Exact group order of one triple, as JSON.
    Oracle {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
    },
    /// Classify every triple in a degree range and cross-check with the oracle.
    Scan {
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value = "auto")]
        oracle: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-degree generating-pair counts.
        #[arg(long)]
        fcounts: Option<PathBuf>,
    },
    /// Diameter, girth and shortest cycles of one cubic pancake graph.
    Metrics {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        hamiltonian: bool,
        #[arg(long, default_value_t = DEFAULT_HAMILTON_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metrics of every generating triple of a degree, plus extremes.
    Tables {
        #[arg(long)]
        n: usize,
        /// Cover every degree from 4 up to this one instead.
        #[arg(long)]
        all_n_upto: Option<usize>,
        /// Check Hamiltonicity for degrees up to this value.
        #[arg(long, default_value_t = 7)]
        hamiltonian_upto: usize,
        #[arg(long, default_value_t = DEFAULT_HAMILTON_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write min/max diameter and girth per degree here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Evidence for the conjectures on generating triples, as JSON.
    Conjectures {
        #[arg(long)]
        n_max: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [1u8, 2, 3, 4, 5])]
        which: Vec<u8>,
    },
    /// SVG scatter of f(n) with fitted curves.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Disagreement(String),
    Resource(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Disagreement(_) => 3,
            Failure::Resource(_) => 4,
            Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(s)
            | Failure::Disagreement(s)
            | Failure::Resource(s)
            | Failure::Io(s) => s,
        }
    }
}

impl From<ClassifierError> for Failure {
    fn from(e: ClassifierError) -> Self {
        match e {
            ClassifierError::Group(g) => g.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<GroupError> for Failure {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::DegreeTooLarge(_) => Failure::Resource(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<CayleyError> for Failure {
    fn from(e: CayleyError) -> Self {
        match e {
            CayleyError::DegreeTooLargeForBfs(_)
            | CayleyError::DegreeTooLargeForHamilton(_)
            | CayleyError::BudgetExceeded { .. } => Failure::Resource(e.to_string()),
            CayleyError::Group(g) => g.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Group(g) => g.into(),
            ExperimentError::Cayley(c) => c.into(),
            ExperimentError::Io(_) | ExperimentError::Csv(_) => Failure::Io(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn create(path: &PathBuf) -> Result<File, Failure> {
    File::create(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn print_json(v: &Value) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Classify {
            n,
            m,
            k,
            witness,
            certificate,
        } => {
            let t = Triple::new(n, m, k)?;
            let verdict = classify(t);
            let mut out =
                serde_json::to_value(VerdictRecord::new(t, &verdict)).expect("serializable");
            if certificate {
                out["certificate_verified"] =
                    json!(verdict.certificate().map(|c| c.verify(&t.generators())));
            }
            if witness {
                let w = match verdict.decision() {
                    Some(true) => build_generates_witness(t)?,
                    _ => None,
                };
                out["witness"] = serde_json::to_value(w).expect("serializable");
            }
            print_json(&out)
        }
        Command::Oracle { n, m, k } => {
            let t = Triple::new(n, m, k)?;
            let order = group_order(&t.generators())?;
            let generates = order == pancake_core::grouptest::factorial_big(n);
            print_json(&json!({
                "n": n, "m": m, "k": k,
                "order": order.to_string(),
                "generates": generates,
            }))
        }
        Command::Scan {
            n_min,
            n_max,
            oracle,
            out,
            fcounts,
        } => {
            let mode: OracleMode = oracle.parse()?;
            if n_max > pancake_core::grouptest::MAX_ORACLE_DEGREE && mode != OracleMode::Off {
                return Err(Failure::Resource(format!(
                    "oracle limited to degree {}",
                    pancake_core::grouptest::MAX_ORACLE_DEGREE
                )));
            }
            let result = scan(n_min, n_max, mode)?;
            write_triples_csv(&result.records, create(&out)?)?;
            if let Some(path) = fcounts {
                write_fcounts_csv(&result.fcounts, create(&path)?)?;
            }
            let bad = result.disagreements();
            print_json(&json!({
                "triples": result.records.len(),
                "disagreements": bad.iter().map(|r| r.triple.to_string()).collect::<Vec<_>>(),
                "incomplete_degrees": result.incomplete,
                "f": result.fcounts.iter().map(|c| json!({"n": c.n, "f": c.f})).collect::<Vec<_>>(),
            }))?;
            if bad.is_empty() {
                Ok(())
            } else {
                Err(Failure::Disagreement(format!(
                    "{} classifier/oracle disagreements",
                    bad.len()
                )))
            }
        }
        Command::Metrics {
            n,
            m,
            k,
            hamiltonian,
            budget,
            out,
        } => {
            let t = Triple::new(n, m, k)?;
            let metrics = graph_metrics(t, hamiltonian.then_some(budget))?;
            match out {
                Some(path) => write_metrics_csv(&[metrics], create(&path)?)?,
                None => write_metrics_csv(&[metrics], io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Tables {
            n,
            all_n_upto,
            hamiltonian_upto,
            budget,
            out,
            summary,
        } => {
            let ns: Vec<usize> = match all_n_upto {
                Some(upto) => (4..=upto).collect(),
                None => vec![n],
            };
            let tables = reproduce_tables(&ns, hamiltonian_upto, budget)?;
            match out {
                Some(path) => write_metrics_csv(&tables.rows, create(&path)?)?,
                None => write_metrics_csv(&tables.rows, io::stdout().lock())?,
            }
            if let Some(path) = summary {
                let mut w = create(&path)?;
                writeln!(w, "n,statistic,value,triples")?;
                for s in &tables.summaries {
                    for (name, e) in [
                        ("min_diameter", &s.min_diameter),
                        ("max_diameter", &s.max_diameter),
                        ("min_girth", &s.min_girth),
                        ("max_girth", &s.max_girth),
                    ] {
                        let triples: Vec<String> =
                            e.triples.iter().map(|t| t.to_string()).collect();
                        writeln!(w, "{},{name},{},\"{}\"", s.n, e.value, triples.join(" "))?;
                    }
                }
            }
            Ok(())
        }
        Command::Conjectures { n_max, which } => {
            if n_max < 8 {
                return Err(Failure::Usage("--n-max must be at least 8".into()));
            }
            if n_max > pancake_core::grouptest::MAX_ORACLE_DEGREE {
                return Err(Failure::Resource(format!(
                    "oracle limited to degree {}",
                    pancake_core::grouptest::MAX_ORACLE_DEGREE
                )));
            }
            let result = scan(4, n_max, OracleMode::On)?;
            let census = result.census();
            let mut report = json!({ "n_max": n_max });
            for c in which {
                let (key, value) = match c {
                    1 => (
                        "fit",
                        serde_json::to_value(fit_fn(&result.fcounts)?).expect("serializable"),
                    ),
                    2 => ("shift_by_4", json!(check_conjecture_mod4(&census))),
                    3 => ("shift_by_2", json!(check_conjecture_mod2(&census))),
                    4 => ("index_sum", json!(check_conjecture_km_sum(&census))),
                    5 => (
                        "fk_max",
                        json!((2..=5)
                            .map(|k| {
                                let s = fk_scan(&census, k);
                                json!({
                                    "k": k,
                                    "observed_max": s.observed_max,
                                    "conjectured_max": s.conjectured_max,
                                })
                            })
                            .collect::<Vec<_>>()),
                    ),
                    other => {
                        return Err(Failure::Usage(format!(
                            "unknown conjecture {other}; expected 1-5"
                        )))
                    }
                };
                report[key] = value;
            }
            print_json(&report)
        }
        Command::Plot { input, out } => {
            let file =
                File::open(&input).map_err(|e| Failure::Io(format!("{}: {e}", input.display())))?;
            let counts = read_fcounts_csv(file)?;
            let fits = fit_fn(&counts)?;
            create(&out)?.write_all(render_svg(&counts, &fits).as_bytes())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
