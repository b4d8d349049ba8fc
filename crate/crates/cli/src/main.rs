//! `tamratio` — command-line front end.
//!
//! Subcommands:
//!
//! * `family-info` — derived polynomials, discriminant split and constants;
//! * `verify-tables` — recompute every reference row and list mismatches;
//! * `experiment` — distribution, average, density, tail and volume runs.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use tamratio::algebra::rational::{fmt_q, parse_q};
use tamratio::enumerate::{
    count_congruence, enum_points, parse_height, projective_line, region_volume, scaled_volume, CongruenceClass,
};
use tamratio::family::tables::{diff_row, expected_rows, Mismatch};
use tamratio::family::{builtin_family, builtin_registry, find_entry, load_family, parse_registry, FamilySpec, VBranch};
use tamratio::family::{AdmissibilityClass, FamilyConstants, RegistryEntry};
use tamratio::statlab::{
    average_power_of, exponent_histogram, family_records, summarize_distribution, tail_count_of, write_records_csv,
    MIN_CURVES,
};
use tamratio::Error;

#[derive(Parser, Debug)]
#[command(name = "tamratio", version, about = "Tamagawa-ratio statistics for isogeny families")]
struct Cli {
    /// Registry JSON file to use instead of the built-in families.
    #[arg(long, global = true)]
    registry: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for sampling experiments.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Reading of v(R) used for the constants.
    #[arg(long = "v-branch", global = true, value_enum, default_value_t = Branch::Theta)]
    v_branch: Branch,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Branch {
    Theta,
    HalfU,
    Definition,
}

impl From<Branch> for VBranch {
    fn from(b: Branch) -> Self {
        match b {
            Branch::Theta => VBranch::Theta,
            Branch::HalfU => VBranch::HalfU,
            Branch::Definition => VBranch::DefinitionParity,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Distribution,
    Average,
    Density,
    Tail,
    Volume,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Show the derived data and constants of a family.
    FamilyInfo {
        #[arg(long)]
        family: String,
        /// Print JSON instead of the text report.
        #[arg(long)]
        json: bool,
        /// Also write the JSON report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the reference rows and report every mismatch.
    VerifyTables {
        /// Restrict to one family.
        #[arg(long)]
        family: Option<String>,
    },
    /// Run an experiment over the curves of height at most N.
    Experiment {
        #[arg(long)]
        family: String,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Height bound, e.g. 1e10 (default 1e12 for density, 1e10 otherwise).
        #[arg(long = "N")]
        n: Option<String>,
        /// Modulus for density runs.
        #[arg(long, default_value_t = 5)]
        q: u64,
        /// Single class for density runs: `a:b` (projective) or `affine:a:b`.
        #[arg(long)]
        class: Option<String>,
        /// Powers for average runs, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        k: Vec<u32>,
        /// Tail thresholds for tail runs, comma separated rationals.
        #[arg(long = "A", value_delimiter = ',', default_value = "1")]
        a: Vec<String>,
        /// Largest prime in the per-prime diagnostics.
        #[arg(long = "p-cut", default_value_t = 300)]
        p_cut: u64,
        /// Minimum number of curves for distribution runs.
        #[arg(long = "min-curves", default_value_t = MIN_CURVES)]
        min_curves: usize,
        /// Samples for volume runs.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// Directory for summary.json and curves.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => 3,
            Error::Parse(_) | Error::Domain(_) | Error::Sample(_) | Error::Inapplicable(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: msg.into(),
    }
}

fn io_fail(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 3,
        message: format!("{}: {e}", path.display()),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Registry entries and whether they are the built-in ones.
struct Registry {
    entries: Vec<RegistryEntry>,
    builtin: bool,
}

impl Registry {
    fn open(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Registry {
                entries: builtin_registry(),
                builtin: true,
            }),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| io_fail(p, e))?;
                let entries = parse_registry(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?;
                Ok(Registry {
                    entries,
                    builtin: false,
                })
            }
        }
    }

    fn family(&self, name: &str) -> CliResult<Arc<FamilySpec>> {
        let entry = find_entry(&self.entries, name).map_err(|e| usage(e.to_string()))?;
        if self.builtin {
            Ok(builtin_family(name)?)
        } else {
            Ok(Arc::new(load_family(entry)?))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> CliResult<u8> {
    let reg = Registry::open(cli.registry.as_deref())?;
    let branch = VBranch::from(cli.v_branch);
    match &cli.command {
        Command::FamilyInfo { family, json, out } => family_info(&reg, branch, family, *json, out.as_deref()),
        Command::VerifyTables { family } => verify_tables(&reg, branch, family.as_deref()),
        Command::Experiment { .. } => experiment(cli, &reg),
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON serializes"));
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| io_fail(path, e))
}

/// Labels and values of the constant row shown for a family.
fn constant_row(fam: &FamilySpec, c: &FamilyConstants) -> (Vec<&'static str>, Vec<String>) {
    if fam.ell == 2 {
        let mut names = vec!["u+1", "u+2", "u-1", "u-2", "v+2", "v-2", "mu", "sigma^2", "rho(1)"];
        let mut vals = vec![
            c.u_plus1.to_string(),
            c.u_plus2.to_string(),
            c.u_minus1.to_string(),
            c.u_minus2.to_string(),
            fmt_q(&c.v_plus2),
            fmt_q(&c.v_minus2),
            fmt_q(&c.mu),
            fmt_q(&c.sigma_sq),
            fmt_q(&c.rho(1)),
        ];
        names.push("rho(2)");
        vals.push(fmt_q(&c.rho(2)));
        (names, vals)
    } else {
        (
            vec!["u+", "u-", "v+", "v-", "mu", "sigma^2", "rho(1)"],
            vec![
                c.u_plus.to_string(),
                c.u_minus.to_string(),
                fmt_q(&c.v_plus),
                fmt_q(&c.v_minus),
                fmt_q(&c.mu),
                fmt_q(&c.sigma_sq),
                fmt_q(&c.rho(1)),
            ],
        )
    }
}

fn family_info(reg: &Registry, branch: VBranch, name: &str, as_json: bool, out: Option<&Path>) -> CliResult<u8> {
    let fam = reg.family(name)?;
    let c = fam.constants(branch)?;
    let report = json!({"family": fam.to_json(), "constants": c.to_json()});
    if let Some(p) = out {
        let text = serde_json::to_string_pretty(&report).expect("JSON serializes");
        write_file(p, text.as_bytes())?;
    }
    if as_json {
        print_json(&report);
        return Ok(0);
    }
    let (names, vals) = constant_row(&fam, &c);
    let excluded: Vec<String> = fam.excluded_primes.iter().map(u64::to_string).collect();
    println!("family   {} ({})", fam.name, fam.entry.label);
    println!(
        "         ell = {}, upsilon = {}, tau = {}, m = {}, varsigma = {}, delta = {}, class = {:?}",
        fam.ell, fam.upsilon, fam.tau, fam.m, fam.varsigma, fam.delta, fam.class
    );
    let fj = fam.to_json();
    for key in ["f", "g", "f_prime", "g_prime", "A", "B", "A_prime", "B_prime", "Delta", "Delta_prime"] {
        println!("{key:<8} {}", fj[key].as_str().unwrap_or(""));
    }
    println!("D+       {}", fam.split.d_plus.format());
    println!("D-       {}", fam.split.d_minus.format());
    if let Some(l) = &fam.lambda_hat {
        println!("Lambda^  {l}");
    }
    println!("excluded {}", excluded.join(", "));
    println!("v-branch {branch:?}");
    println!("({}) = ({})", names.join(", "), vals.join(", "));
    Ok(0)
}

fn verify_tables(reg: &Registry, branch: VBranch, only: Option<&str>) -> CliResult<u8> {
    let rows: Vec<_> = expected_rows()
        .into_iter()
        .filter(|r| only.map_or(true, |f| f == r.family))
        .collect();
    if let Some(f) = only {
        if rows.is_empty() {
            return Err(usage(format!("no reference row for family {f:?}")));
        }
    }
    let mut mismatches: Vec<Mismatch> = Vec::new();
    let mut failed_loads = 0usize;
    let mut checked = 0usize;
    for r in &rows {
        if find_entry(&reg.entries, r.family).is_err() {
            println!("{:<10} {:<18} skipped (not in registry)", r.family, r.group);
            continue;
        }
        let fam = match reg.family(r.family) {
            Ok(f) => f,
            Err(e) => {
                failed_loads += 1;
                println!("{:<10} {:<18} FAIL validation: {}", r.family, r.group, e.message);
                continue;
            }
        };
        let c = fam.constants(branch)?;
        let diff = diff_row(r, fam.disc.weighted_degree(), &c);
        checked += 1;
        if diff.is_empty() {
            println!("{:<10} {:<18} ok", r.family, r.group);
        } else {
            for m in &diff {
                println!(
                    "{:<10} {:<18} MISMATCH {}: expected {}, computed {}",
                    r.family, r.group, m.field, m.expected, m.computed
                );
            }
            mismatches.extend(diff);
        }
    }
    let fields: usize = rows.iter().map(|r| r.kind.fields().len()).sum();
    println!(
        "{checked} rows checked, {} mismatching fields of {fields}, {failed_loads} validation failures",
        mismatches.len()
    );
    Ok(if mismatches.is_empty() && failed_loads == 0 { 0 } else { 1 })
}

fn parse_class(s: &str, q: u64) -> CliResult<CongruenceClass> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| -> CliResult<u64> {
        t.trim()
            .parse::<i64>()
            .map(|v| v.rem_euclid(q as i64) as u64)
            .map_err(|_| usage(format!("bad class component {t:?}")))
    };
    match parts.as_slice() {
        [a, b] => Ok(CongruenceClass::Projective {
            q,
            a1: num(a)?,
            b1: num(b)?,
        }),
        ["affine", a, b] => Ok(CongruenceClass::Affine {
            q,
            a1: num(a)?,
            b1: num(b)?,
        }),
        _ => Err(usage(format!("bad class {s:?}; expected a:b or affine:a:b"))),
    }
}

fn class_label(c: &CongruenceClass) -> String {
    match *c {
        CongruenceClass::Projective { q, a1, b1 } => format!("[{a1}:{b1}] mod {q}"),
        CongruenceClass::Affine { q, a1, b1 } => format!("({a1},{b1}) mod {q}"),
    }
}

fn note_unused_seed(seed: u64) {
    eprintln!("note: seed {seed} unused (this experiment does no sampling)");
}

fn experiment(cli: &Cli, reg: &Registry) -> CliResult<u8> {
    let Command::Experiment {
        family,
        kind,
        n,
        q,
        class,
        k,
        a,
        p_cut,
        min_curves,
        samples,
        out,
    } = &cli.command
    else {
        unreachable!("experiment called with another subcommand")
    };
    let fam = reg.family(family)?;
    let default_n = if *kind == Kind::Density { "1e12" } else { "1e10" };
    let n_text = n.as_deref().unwrap_or(default_n);
    let n: BigInt = parse_height(n_text)?;
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| io_fail(dir, e))?;
    }
    let mut records = None;
    let summary = match kind {
        Kind::Volume => {
            let v = region_volume(&fam, *samples, cli.seed)?;
            let nf: f64 = n_text.parse().unwrap_or(f64::NAN);
            json!({
                "family": fam.name, "kind": "volume", "seed": cli.seed,
                "volume": v.volume, "half_width": v.half_width, "samples": v.samples,
                "N": n.to_string(), "scaled_volume": scaled_volume(&fam, nf, v.volume),
            })
        }
        Kind::Distribution => {
            note_unused_seed(cli.seed);
            let (en, recs) = family_records(&fam, &n)?;
            if recs.len() < (*min_curves).max(1) {
                return Err(usage(format!(
                    "{} at N = {n}: {} curves < {min_curves}; raise --N or lower --min-curves",
                    fam.name,
                    recs.len()
                )));
            }
            let s = summarize_distribution(&fam, &n, *p_cut, &recs, en.degenerate)?;
            let hist: Vec<(i64, usize)> = exponent_histogram(&recs).into_iter().collect();
            records = Some(recs);
            json!({"kind": "distribution", "summary": s, "histogram": hist})
        }
        Kind::Average => {
            note_unused_seed(cli.seed);
            let (_, recs) = family_records(&fam, &n)?;
            let c = fam.constants(VBranch::from(cli.v_branch))?;
            let avgs = k
                .iter()
                .map(|&kk| average_power_of(&c, fam.ell, &n, &recs, kk))
                .collect::<Result<Vec<_>, _>>()?;
            records = Some(recs);
            json!({"family": fam.name, "kind": "average", "N": n.to_string(), "averages": avgs})
        }
        Kind::Tail => {
            note_unused_seed(cli.seed);
            let (_, recs) = family_records(&fam, &n)?;
            let c = fam.constants(VBranch::from(cli.v_branch))?;
            let tails = a
                .iter()
                .map(|s| tail_count_of(&c, &n, &recs, &parse_q(s)?))
                .collect::<Result<Vec<_>, _>>()?;
            records = Some(recs);
            json!({"family": fam.name, "kind": "tail", "N": n.to_string(), "tails": tails})
        }
        Kind::Density => {
            note_unused_seed(cli.seed);
            if *q == 0 {
                return Err(usage("--q must be positive"));
            }
            let classes = match class {
                Some(s) => vec![parse_class(s, *q)?],
                None => projective_line(*q),
            };
            // Projective counts use the unnormalized height unless the family
            // carries a common factor, whose weighted law needs its own height.
            let projective_delta = match fam.class {
                AdmissibilityClass::A1 | AdmissibilityClass::A2 => 0,
                _ => fam.delta,
            };
            let mut reports = Vec::new();
            let mut cache: Vec<(u32, Vec<_>)> = Vec::new();
            for c in classes {
                let delta = match c {
                    CongruenceClass::Projective { .. } => projective_delta,
                    CongruenceClass::Affine { .. } => fam.delta,
                };
                if !cache.iter().any(|(d, _)| *d == delta) {
                    cache.push((delta, enum_points(&fam, &n, delta)?.points));
                }
                let pts = &cache.iter().find(|(d, _)| *d == delta).expect("cached").1;
                let r = count_congruence(&fam, pts, delta, c)?;
                reports.push(json!({
                    "class": class_label(&c), "delta": delta, "report": r,
                    "ratio": r.observed / r.predicted, "relative_error": r.relative_error(),
                }));
            }
            json!({"family": fam.name, "kind": "density", "N": n.to_string(), "q": q, "classes": reports})
        }
    };
    let text = serde_json::to_string_pretty(&summary).expect("JSON serializes");
    if let Some(dir) = out {
        write_file(&dir.join("summary.json"), text.as_bytes())?;
        if let Some(recs) = &records {
            let path = dir.join("curves.csv");
            let mut buf = Vec::new();
            write_records_csv(&mut buf, recs)?;
            write_file(&path, &buf)?;
        }
    }
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{text}").map_err(|e| Failure {
        code: 3,
        message: format!("stdout: {e}"),
    })?;
    Ok(0)
}
