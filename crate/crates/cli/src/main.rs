//! `period-hecke`: batch front-end for cosets, chains, Hecke operators and
//! transfer spectra. Output is JSON (default) or CSV.

mod out;
mod suite;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use period_hecke::chains::{chain_of, psi_of, verify_lewis_system};
use period_hecke::cosets::{enumerate, parse_word, CosetSpace};
use period_hecke::hecke::{kappa_tilde, HeckeSet, Variant};
use period_hecke::partitions::{m_of, minimal_partition};
use period_hecke::slash::{default_points, lewis_residual, two_term_residual, BranchedFunction};
use period_hecke::transfer::{build, selberg_zeta_of, spectrum};
use period_hecke::ExtRational;
use rayon::prelude::*;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Tilde,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PhiArg {
    Inv,
}

#[derive(Parser, Debug)]
#[command(name = "period-hecke", version, about = "Period functions, Hecke operators and transfer spectra")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Tolerance for numeric checks.
    #[arg(long, default_value_t = 1e-10, global = true)]
    tol: f64,

    /// Seed for randomized checks.
    #[arg(long, default_value_t = 0x5eed, global = true)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ordered coset indices of Γ̄₀(n) with d, A and x.
    Cosets {
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
    },
    /// Minimal partition of a positive rational p/q and its m(P).
    Partition { x: String },
    /// K-chains, one per coset index.
    Chains {
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
    },
    /// Components of the special solution ψ.
    Psi {
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
    },
    /// Terms of T̃_n or T_n.
    Hecke {
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_enum, default_value_t = VariantArg::Tilde)]
        variant: VariantArg,
    },
    /// The multiplier κ̃(n) with (1/z)|T̃_n = κ̃(n)/z.
    HeckeKappa {
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
    },
    /// Permutation of the coset indices induced by a word in T, t, M, Q, q.
    Rho {
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        word: String,
    },
    /// Verification suites.
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
    /// Eigenvalues of the truncated transfer operator.
    Spectrum {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_parser = parse_weight, default_value = "1")]
        s: Complex64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(4..=128), default_value_t = 32)]
        order: u64,
    },
    /// Selberg zeta det(1 - L_s²); repeat --s for a sweep.
    Zeta {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_parser = parse_weight, required = true, allow_hyphen_values = true)]
        s: Vec<Complex64>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(4..=128), default_value_t = 32)]
        order: u64,
    },
    /// Lewis and two-term residuals of a closed-form function.
    LewisCheck {
        #[arg(long, value_enum, default_value_t = PhiArg::Inv)]
        phi: PhiArg,
        #[arg(long, value_parser = parse_weight, default_value = "1", allow_hyphen_values = true)]
        s: Complex64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        lambda: f64,
    },
}

#[derive(Subcommand, Debug)]
enum Verify {
    /// Certified Lewis system at level n for λ = ±1.
    #[command(allow_negative_numbers = true)]
    Lewis {
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        lambda: i64,
    },
    /// Every check for levels 1..=max-n plus the spectral checks.
    All {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 30)]
        max_n: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(4..=128), default_value_t = 32)]
        order: u64,
    },
}

fn parse_weight(s: &str) -> Result<Complex64, String> {
    let bad = || format!("expected <re>[,<im>], got {s:?}");
    let (re, im) = match s.split_once(',') {
        Some((a, b)) => (a, b),
        None => (s, "0"),
    };
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    if re.is_finite() && im.is_finite() {
        Ok(Complex64::new(re, im))
    } else {
        Err(bad())
    }
}

/// Exit status of a command that ran to completion.
enum Status {
    Pass,
    Fail(Value),
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Internal(String),
}

impl From<period_hecke::Error> for Failure {
    fn from(e: period_hecke::Error) -> Self {
        use period_hecke::Error as E;
        match e {
            E::Integrity(_) | E::Numeric(_) => Failure::Internal(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

type Run = Result<Status, Failure>;

fn csv_complex(z: Complex64) -> [String; 2] {
    [z.re.to_string(), z.im.to_string()]
}

fn cosets(cli: &Cli, n: u64) -> Run {
    let idx = enumerate(n);
    match cli.format {
        Format::Json => {
            let rows: Vec<Value> = idx
                .iter()
                .map(|i| {
                    json!({ "c": i.c(), "b": i.b(), "d": i.d(), "A": out::matrix(&i.a_matrix()), "x": out::ext(&i.x()) })
                })
                .collect();
            out::emit_json("cosets", json!({ "n": n, "count": idx.len(), "indices": rows }))?;
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = idx
                .iter()
                .map(|i| {
                    vec![
                        i.c().to_string(),
                        i.b().to_string(),
                        i.d().to_string(),
                        out::matrix_cell(&i.a_matrix()),
                        out::ext(&i.x()),
                    ]
                })
                .collect();
            out::emit_csv(&["c", "b", "d", "A", "x"], &rows)?;
        }
    }
    Ok(Status::Pass)
}

fn partition(cli: &Cli, x: &str) -> Run {
    let x: ExtRational = x.parse()?;
    let p = minimal_partition(&x)?;
    let m = m_of(&p);
    let points: Vec<String> = p.points().iter().map(out::ext).collect();
    match cli.format {
        Format::Json => out::emit_json(
            "partition",
            json!({ "x": out::ext(&x), "points": points, "m": out::formal(&m) }),
        )?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = m
                .terms()
                .map(|(a, k)| vec![k.to_string(), out::matrix_cell(a)])
                .collect();
            out::emit_csv(&["coeff", "matrix"], &rows)?;
        }
    }
    Ok(Status::Pass)
}

fn chains(cli: &Cli, n: u64) -> Run {
    let chains = enumerate(n).iter().map(chain_of).collect::<Result<Vec<_>, _>>()?;
    match cli.format {
        Format::Json => {
            let list: Vec<Value> = chains
                .iter()
                .map(|c| {
                    json!({
                        "index": out::index(&c.owner),
                        "k": c.k(),
                        "matrices": c.matrices.iter().map(out::matrix).collect::<Vec<_>>(),
                    })
                })
                .collect();
            out::emit_json("chains", json!({ "n": n, "chains": list }))?;
        }
        Format::Csv => {
            let mut rows = Vec::new();
            for c in &chains {
                for (j, m) in c.matrices.iter().enumerate() {
                    rows.push(vec![c.owner.c().to_string(), c.owner.b().to_string(), j.to_string(), out::matrix_cell(m)]);
                }
            }
            out::emit_csv(&["c", "b", "step", "matrix"], &rows)?;
        }
    }
    Ok(Status::Pass)
}

fn psi(cli: &Cli, n: u64) -> Run {
    let psi = psi_of(n)?;
    match cli.format {
        Format::Json => {
            let list: Vec<Value> = psi
                .iter()
                .map(|(i, p)| json!({ "index": out::index(i), "terms": out::formal(p) }))
                .collect();
            out::emit_json("psi", json!({ "n": n, "components": list }))?;
        }
        Format::Csv => {
            let mut rows = Vec::new();
            for (i, p) in psi.iter() {
                for (m, k) in p.terms() {
                    rows.push(vec![i.c().to_string(), i.b().to_string(), k.to_string(), out::matrix_cell(m)]);
                }
            }
            out::emit_csv(&["c", "b", "coeff", "matrix"], &rows)?;
        }
    }
    Ok(Status::Pass)
}

fn hecke(cli: &Cli, n: u64, variant: VariantArg) -> Run {
    let (variant, name) = match variant {
        VariantArg::Tilde => (Variant::Tilde, "tilde"),
        VariantArg::Full => (Variant::Full, "full"),
    };
    let set = HeckeSet::new(n, variant);
    match cli.format {
        Format::Json => out::emit_json(
            "hecke",
            json!({ "n": n, "variant": name, "count": set.len(), "terms": out::formal(&set.terms) }),
        )?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = set
                .terms
                .terms()
                .map(|(m, k)| vec![k.to_string(), out::matrix_cell(m)])
                .collect();
            out::emit_csv(&["coeff", "matrix"], &rows)?;
        }
    }
    Ok(Status::Pass)
}

fn hecke_kappa(cli: &Cli, n: u64) -> Run {
    let k = kappa_tilde(n)?;
    let text = if k.is_integer() { k.numer().to_string() } else { out::rational(&k) };
    match cli.format {
        Format::Json => out::emit_json("hecke-kappa", json!({ "n": n, "kappa": out::rational(&k), "value": text }))?,
        Format::Csv => out::emit_csv(&["n", "kappa"], &[vec![n.to_string(), text]])?,
    }
    Ok(Status::Pass)
}

fn rho_cmd(cli: &Cli, n: u64, word: &str) -> Run {
    let g = parse_word(word)?;
    let space = CosetSpace::new(n);
    let p = space.rho(&g)?;
    let one_line: Vec<usize> = p.images().iter().map(|k| k + 1).collect();
    let text = format!(
        "[{}]",
        one_line.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
    );
    match cli.format {
        Format::Json => out::emit_json(
            "rho",
            json!({
                "n": n,
                "word": word,
                "matrix": out::matrix(&g),
                "indices": space.indices().iter().map(out::index).collect::<Vec<_>>(),
                "images": one_line,
                "one_line": text,
            }),
        )?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = space
                .indices()
                .iter()
                .zip(&one_line)
                .enumerate()
                .map(|(k, (i, img))| vec![(k + 1).to_string(), i.c().to_string(), i.b().to_string(), img.to_string()])
                .collect();
            out::emit_csv(&["position", "c", "b", "image"], &rows)?;
        }
    }
    Ok(Status::Pass)
}

fn verify_lewis(cli: &Cli, n: u64, lambda: i64) -> Run {
    if lambda != 1 && lambda != -1 {
        return Err(Failure::Usage(format!("λ must be 1 or -1, got {lambda}")));
    }
    let rep = verify_lewis_system(n, lambda)?;
    let passed = rep.passed();
    match cli.format {
        Format::Json => {
            let checks: Vec<Value> = rep
                .checks
                .iter()
                .map(|c| {
                    json!({
                        "index": out::index(&c.index),
                        "passed": c.passed(),
                        "certificate_terms": c.certificate.len(),
                        "transported_terms": c.transported.len(),
                    })
                })
                .collect();
            out::emit_json(
                "verify-lewis",
                json!({ "n": n, "lambda": lambda, "passed": passed, "checks": checks }),
            )?;
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = rep
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.index.c().to_string(),
                        c.index.b().to_string(),
                        c.passed().to_string(),
                        c.certificate.len().to_string(),
                        c.transported.len().to_string(),
                    ]
                })
                .collect();
            out::emit_csv(&["c", "b", "passed", "certificate_terms", "transported_terms"], &rows)?;
        }
    }
    Ok(match rep.first_failure() {
        None => Status::Pass,
        Some(c) => {
            let mut v = suite::check_json(c);
            v["n"] = json!(n);
            v["lambda"] = json!(lambda);
            Status::Fail(v)
        }
    })
}

fn verify_all(cli: &Cli, max_n: u64, order: u64) -> Run {
    let cfg = suite::Settings { max_n, seed: cli.seed, tol: cli.tol, order: order as usize };
    let threads = std::thread::available_parallelism().map_or(1, |p| p.get()).min(8);
    let (outcomes, first) = suite::run(&cfg, threads);
    match cli.format {
        Format::Json => {
            let checks: Vec<Value> = outcomes
                .iter()
                .map(|o| json!({ "check": o.check, "passed": o.passed }))
                .collect();
            out::emit_json(
                "verify-all",
                json!({ "max_n": max_n, "order": order, "seed": cli.seed, "tol": cli.tol, "passed": first.is_none(), "checks": checks }),
            )?;
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = outcomes
                .iter()
                .map(|o| vec![o.check.to_string(), if o.passed { "pass" } else { "fail" }.to_string()])
                .collect();
            out::emit_csv(&["check", "status"], &rows)?;
        }
    }
    Ok(match first {
        None => Status::Pass,
        Some(f) => Status::Fail(json!({ "check": f.check, "n": f.n, "detail": f.detail })),
    })
}

fn spectrum_cmd(cli: &Cli, n: u64, s: Complex64, order: u64) -> Run {
    let op = build(n, s, order as usize)?;
    let sp = spectrum(&op)?;
    match cli.format {
        Format::Json => {
            let leading = sp.leading.as_ref().map(|l| json!({ "value": out::complex(l.value), "residual": l.residual }));
            out::emit_json(
                "spectrum",
                json!({
                    "n": n,
                    "s": out::complex(s),
                    "order": order,
                    "dim": op.dim(),
                    "eigenvalues": sp.eigenvalues.iter().map(|z| out::complex(*z)).collect::<Vec<_>>(),
                    "leading": leading,
                }),
            )?;
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = sp
                .eigenvalues
                .iter()
                .enumerate()
                .map(|(k, z)| {
                    let [re, im] = csv_complex(*z);
                    vec![k.to_string(), re, im, z.norm().to_string()]
                })
                .collect();
            out::emit_csv(&["k", "re", "im", "abs"], &rows)?;
        }
    }
    Ok(Status::Pass)
}

fn zeta_cmd(cli: &Cli, n: u64, weights: &[Complex64], order: u64) -> Run {
    let values = weights
        .par_iter()
        .map(|&s| build(n, s, order as usize).map(|op| (s, selberg_zeta_of(&op))))
        .collect::<Result<Vec<_>, _>>()?;
    match cli.format {
        Format::Json => {
            let list: Vec<Value> = values
                .iter()
                .map(|(s, z)| {
                    json!({ "s": out::complex(*s), "value": out::complex(z.value()), "factored": out::complex(z.factored), "gap": z.gap() })
                })
                .collect();
            out::emit_json("zeta", json!({ "n": n, "order": order, "values": list }))?;
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = values
                .iter()
                .map(|(s, z)| {
                    let [sr, si] = csv_complex(*s);
                    let [zr, zi] = csv_complex(z.value());
                    vec![sr, si, zr, zi, z.gap().to_string()]
                })
                .collect();
            out::emit_csv(&["s_re", "s_im", "z_re", "z_im", "gap"], &rows)?;
        }
    }
    Ok(Status::Pass)
}

fn lewis_check(cli: &Cli, phi: PhiArg, s: Complex64, lambda: f64) -> Run {
    let f = match phi {
        PhiArg::Inv => BranchedFunction::inverse(),
    };
    let pts = default_points();
    let lam = Complex64::new(lambda, 0.0);
    let lewis = lewis_residual(&f, s, lam, &pts)?;
    let two_term = two_term_residual(&f, s, lam, &pts)?;
    let passed = lewis < cli.tol;
    match cli.format {
        Format::Json => out::emit_json(
            "lewis-check",
            json!({
                "phi": "1/z",
                "s": out::complex(s),
                "lambda": lambda,
                "points": pts.len(),
                "lewis_residual": lewis,
                "two_term_residual": two_term,
                "tol": cli.tol,
                "passed": passed,
            }),
        )?,
        Format::Csv => out::emit_csv(
            &["lewis_residual", "two_term_residual", "tol", "passed"],
            &[vec![lewis.to_string(), two_term.to_string(), cli.tol.to_string(), passed.to_string()]],
        )?,
    }
    Ok(if passed {
        Status::Pass
    } else {
        Status::Fail(json!({ "lewis_residual": lewis, "tol": cli.tol }))
    })
}

fn run(cli: &Cli) -> Run {
    match &cli.command {
        Command::Cosets { n } => cosets(cli, *n),
        Command::Partition { x } => partition(cli, x),
        Command::Chains { n } => chains(cli, *n),
        Command::Psi { n } => psi(cli, *n),
        Command::Hecke { n, variant } => hecke(cli, *n, *variant),
        Command::HeckeKappa { n } => hecke_kappa(cli, *n),
        Command::Rho { n, word } => rho_cmd(cli, *n, word),
        Command::Verify { what: Verify::Lewis { n, lambda } } => verify_lewis(cli, *n, *lambda),
        Command::Verify { what: Verify::All { max_n, order } } => verify_all(cli, *max_n, *order),
        Command::Spectrum { n, s, order } => spectrum_cmd(cli, *n, *s, *order),
        Command::Zeta { n, s, order } => zeta_cmd(cli, *n, s, *order),
        Command::LewisCheck { phi, s, lambda } => lewis_check(cli, *phi, *s, *lambda),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !(cli.tol > 0.0) {
        eprintln!("error: --tol must be positive");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail(counterexample)) => {
            let doc = json!({ "schema": out::SCHEMA, "counterexample": counterexample });
            eprintln!("{}", serde_json::to_string(&doc).unwrap_or_default());
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
