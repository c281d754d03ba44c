use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use primpair::charsum::{BruteForceCounter, CharSumEngine, BRUTE_LIMIT, CHARSUM_LIMIT};
use primpair::ffield::FieldContext;
use primpair::intnum::{as_prime_power, factorize, factorize_power_minus_one, is_prime};
use primpair::sieve::{mpsc_check, optimize_plan_with, psc_check, CriterionKind, SievePlan};
use primpair::survey::{self, Resolution};
use primpair::verifier::{
    verify_exhaustive, verify_quartic_prime, verify_quartic_primepower, VerificationResult, VerifyOptions,
    Witness, EXHAUSTIVE_LIMIT,
};

#[derive(Parser)]
#[command(name = "primpair", version, about = "Primitive elements with prescribed trace whose sum with the inverse is primitive")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Factor a positive integer.
    Factor {
        #[arg(long)]
        m: u128,
    },
    /// Evaluate BC, PSC and MPSC for (q, n).
    Criterion {
        #[command(flatten)]
        field: FieldArgs,
        /// Core size; fixes the plan instead of searching.
        #[arg(long)]
        t: Option<usize>,
        /// Number of large primes (with --t).
        #[arg(long, default_value_t = 0, requires = "t")]
        s: usize,
    },
    /// Check the character sum bounds on a small field.
    Charsum {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = CHARSUM_LIMIT, value_parser = positive)]
        limit_charsum: u128,
    },
    /// Decide membership by direct search.
    Verify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum, default_value_t = Algorithm::Exhaustive)]
        algorithm: Algorithm,
        /// Restrict to one trace value.
        #[arg(long)]
        trace: Option<u64>,
        /// Append-only record file to resume from.
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(long, default_value_t = EXHAUSTIVE_LIMIT, value_parser = positive)]
        limit_exhaustive: u128,
    },
    /// Classify every prime power in a range.
    Survey {
        #[arg(long, default_value_t = 4)]
        n: u32,
        #[arg(long)]
        range_lo: u64,
        #[arg(long)]
        range_hi: u64,
        /// Keep only q with this ω(q^n - 1).
        #[arg(long)]
        omega_filter: Option<usize>,
        /// Criteria to try, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "BC,PSC,MPSC")]
        cascade: Vec<CriterionKind>,
    },
    /// Recompute the published tables and the ω descent.
    Tables {
        #[arg(value_enum)]
        which: Table,
        /// Degree for the descent.
        #[arg(long, default_value_t = 4)]
        n: u32,
        /// Upper end of the exception scan.
        #[arg(long = "range-hi", default_value_t = survey::TABLE1_Q_MAX)]
        range_hi: u64,
    },
}

#[derive(Args)]
struct FieldArgs {
    /// Field size q; alternatively give --p and --h.
    #[arg(long, conflicts_with_all = ["p", "h"])]
    q: Option<u128>,
    #[arg(long, requires = "h")]
    p: Option<u128>,
    #[arg(long, requires = "p")]
    h: Option<u32>,
    #[arg(long, default_value_t = 4)]
    n: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Exhaustive,
    Quartic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Table {
    Table1,
    Table2,
    Cascade,
    Anchor,
}

fn positive(s: &str) -> Result<u128, String> {
    match s.parse::<u128>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

/// Exit status and rendered output of a subcommand.
struct Outcome {
    ok: bool,
    json: Value,
    csv: Vec<String>,
    text: Vec<String>,
}

type Run = Result<Outcome, String>;

impl FieldArgs {
    fn q(&self) -> Result<u128, String> {
        let q = match (self.q, self.p, self.h) {
            (Some(q), _, _) => q,
            (None, Some(p), Some(h)) => {
                if !is_prime(p) {
                    return Err(format!("{p} is not prime"));
                }
                p.checked_pow(h).ok_or("p^h overflows")?
            }
            _ => return Err("give --q, or --p with --h".into()),
        };
        if as_prime_power(q).is_none() {
            return Err(format!("{q} is not a prime power"));
        }
        Ok(q)
    }
}

fn err(e: primpair::Error) -> String {
    e.to_string()
}

fn opt(x: &Option<String>) -> &str {
    x.as_deref().unwrap_or("")
}

fn run_factor(m: u128) -> Run {
    let f = factorize(m).map_err(err)?;
    let factors: Vec<Value> = f
        .factors()
        .iter()
        .map(|&(p, e)| json!({"prime": p.to_string(), "exponent": e}))
        .collect();
    let mut csv = vec!["prime,exponent".to_string()];
    csv.extend(f.factors().iter().map(|(p, e)| format!("{p},{e}")));
    let text = if f.factors().is_empty() {
        vec![format!("{m} = 1")]
    } else {
        let parts: Vec<String> = f
            .factors()
            .iter()
            .map(|&(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect();
        vec![format!("{m} = {}", parts.join(" * "))]
    };
    Ok(Outcome {
        ok: true,
        json: json!({
            "m": m.to_string(),
            "factors": factors,
            "omega": f.omega(),
            "radical": f.radical().to_string(),
        }),
        csv,
        text,
    })
}

fn run_criterion(field: &FieldArgs, t: Option<usize>, s: usize) -> Run {
    let q = field.q()?;
    let n = field.n;
    let fact = factorize_power_minus_one(q, n).map_err(err)?;
    let report = match t {
        Some(t) => {
            let plan = SievePlan::standard(q, n, &fact, t, s).map_err(err)?;
            if s == 0 {
                psc_check(&plan)
            } else {
                mpsc_check(&plan)
            }
            .map_err(err)?
        }
        None => optimize_plan_with(q, n, &fact, &CriterionKind::ALL).map_err(err)?,
    };
    let sum = report.summary();
    let csv = vec![
        "q,n,omega,kind,t,r,s,delta,epsilon,threshold,outcome,passed".to_string(),
        format!(
            "{},{},{},{},{},{},{},{},{},{},{:?},{}",
            q,
            n,
            fact.omega(),
            sum.kind.name(),
            sum.t,
            sum.r,
            sum.s,
            opt(&sum.delta),
            opt(&sum.epsilon),
            sum.threshold.as_deref().unwrap_or("inf"),
            sum.outcome,
            sum.passed
        ),
    ];
    let text = vec![
        format!("q = {q}, n = {n}, omega = {}", fact.omega()),
        format!("{} with t = {}, r = {}, s = {}", sum.kind.name(), sum.t, sum.r, sum.s),
        format!("delta = {}, epsilon = {}", opt(&sum.delta), opt(&sum.epsilon)),
        format!(
            "threshold = {} vs q^(n/2-1) = {}: {:?}",
            sum.threshold.as_deref().unwrap_or("inf"),
            sum.lhs,
            sum.outcome
        ),
    ];
    let mut json = serde_json::to_value(&sum).expect("summary serializes");
    json["q"] = json!(q.to_string());
    json["omega"] = json!(fact.omega());
    Ok(Outcome {
        ok: report.passed(),
        json,
        csv,
        text,
    })
}

fn run_charsum(field: &FieldArgs, limit: u128) -> Run {
    let q = field.q()?;
    let (p, h) = as_prime_power(q).expect("checked above");
    let ctx = FieldContext::build(p as u64, h, field.n).map_err(err)?;
    let engine = CharSumEngine::new(&ctx, limit).map_err(err)?;
    let brute = if ctx.size() <= BRUTE_LIMIT.max(limit) {
        Some(BruteForceCounter::new(&ctx, BRUTE_LIMIT.max(limit)).map_err(err)?)
    } else {
        None
    };
    let report = engine.verify_bounds(brute.as_ref());
    let mut csv = vec!["key,max_ratio,checked,holds".to_string()];
    let mut text = vec![format!(
        "F_{}^{}: S(chi1, chi1, 0) = {} (expected {})",
        report.q, report.n, report.trivial_sum, report.trivial_sum_expected
    )];
    for c in &report.classes {
        csv.push(format!("{},{:.9},{},{}", c.key, c.max_ratio, c.checked, c.holds()));
        text.push(format!(
            "{:<18} max ratio {:.6} over {} values  {}",
            c.key,
            c.max_ratio,
            c.checked,
            if c.holds() { "ok" } else { "EXCEEDED" }
        ));
    }
    let mut json = serde_json::to_value(&report).expect("report serializes");
    json["all_hold"] = json!(report.all_hold());
    Ok(Outcome {
        ok: report.all_hold(),
        json,
        csv,
        text,
    })
}

fn witness_csv(w: &Witness) -> String {
    match w {
        Witness::Element { coords } => {
            let c: Vec<String> = coords.iter().map(u64::to_string).collect();
            format!("element,{}", c.join(" "))
        }
        Witness::Polynomial { a, b, c } => format!("polynomial,{a} {b} {c}"),
    }
}

fn verification_outcome(res: &VerificationResult) -> Outcome {
    let mut csv = vec!["a,kind,witness".to_string()];
    for a in 0..res.q {
        match res.witnesses.get(&a) {
            Some(w) => csv.push(format!("{a},{}", witness_csv(w))),
            None if res.failures.contains(&a) => csv.push(format!("{a},none,")),
            None => {}
        }
    }
    let mut text = vec![format!("({}, {}): {}", res.q, res.n, res.outcome.name())];
    if !res.failures.is_empty() {
        let f: Vec<String> = res.failures.iter().map(u64::to_string).collect();
        text.push(format!("no witness for a in {{{}}}", f.join(", ")));
    }
    if let Some(st) = &res.stats {
        text.push(format!(
            "c = {}, largest least b = {} at a = {:?}",
            st.c, st.max_min_b, st.max_at
        ));
    }
    let mut json = serde_json::to_value(res).expect("result serializes");
    // Object keys must be strings; keep them numeric-looking and ordered.
    json["witnesses"] = Value::Object(
        res.witnesses
            .iter()
            .map(|(a, w)| (a.to_string(), serde_json::to_value(w).expect("witness")))
            .collect(),
    );
    Outcome {
        ok: res.outcome == primpair::verifier::Verdict::Success,
        json,
        csv,
        text,
    }
}

fn run_verify(
    field: &FieldArgs,
    algorithm: Algorithm,
    trace: Option<u64>,
    resume: Option<PathBuf>,
    limit: u128,
) -> Run {
    let q = field.q()?;
    let opts = VerifyOptions {
        trace,
        exhaustive_limit: limit,
        checkpoint: resume,
        ..VerifyOptions::default()
    };
    let res = match algorithm {
        Algorithm::Exhaustive => verify_exhaustive(q, field.n, &opts),
        Algorithm::Quartic => {
            if field.n != 4 {
                return Err("the quartic search needs --n 4".into());
            }
            let (p, h) = as_prime_power(q).expect("checked above");
            if h == 1 {
                verify_quartic_prime(q, &opts)
            } else {
                verify_quartic_primepower(p as u64, h, &opts)
            }
        }
    }
    .map_err(err)?;
    Ok(verification_outcome(&res))
}

fn run_survey(n: u32, lo: u64, hi: u64, omega: Option<usize>, cascade: &[CriterionKind]) -> Run {
    if lo > hi {
        return Err("--range-lo exceeds --range-hi".into());
    }
    let mut recs = survey::scan(n, lo, hi, cascade).map_err(err)?;
    if let Some(w) = omega {
        recs.retain(|r| r.omega == w);
    }
    let unresolved: Vec<u64> = recs
        .iter()
        .filter(|r| r.resolution == Resolution::Unresolved)
        .map(|r| r.q)
        .collect();
    let mut csv = vec![survey::CSV_HEADER.to_string()];
    csv.extend(recs.iter().map(|r| r.csv_line()));
    let mut text: Vec<String> = recs
        .iter()
        .map(|r| {
            let row = r.row();
            format!(
                "q = {:>8}  omega = {:>2}  {:<10}  t = {} r = {} s = {}  threshold = {}",
                r.q,
                r.omega,
                r.resolution.name(),
                row.t,
                row.r,
                row.s,
                row.threshold.as_deref().unwrap_or("inf")
            )
        })
        .collect();
    text.push(format!("{} prime powers, {} unresolved", recs.len(), unresolved.len()));
    let rows: Vec<_> = recs.iter().map(|r| r.row()).collect();
    Ok(Outcome {
        ok: unresolved.is_empty(),
        json: json!({
            "n": n,
            "range_lo": lo,
            "range_hi": hi,
            "omega_filter": omega,
            "records": rows,
            "unresolved": unresolved,
        }),
        csv,
        text,
    })
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(";")
}

fn run_table1(hi: u64) -> Run {
    let rep = survey::reproduce_table1(hi).map_err(err)?;
    let mut csv = vec!["omega,printed_count,listed,computed,only_listed,only_computed".to_string()];
    let mut text = Vec::new();
    for r in &rep.rows {
        csv.push(format!(
            "{},{},{},{},{},{}",
            r.omega,
            r.printed_count.map(|c| c.to_string()).unwrap_or_default(),
            r.listed.len(),
            r.computed.len(),
            join(&r.only_listed),
            join(&r.only_computed)
        ));
        text.push(format!(
            "omega = {:>2}: printed {:>3}, listed {:>3}, computed {:>3}{}{}",
            r.omega,
            r.printed_count.map(|c| c.to_string()).unwrap_or("-".into()),
            r.listed.len(),
            r.computed.len(),
            if r.only_listed.is_empty() { String::new() } else { format!("; only listed {:?}", r.only_listed) },
            if r.only_computed.is_empty() { String::new() } else { format!("; only computed {:?}", r.only_computed) },
        ));
        for n in &r.notes {
            text.push(format!("    note: {n}"));
        }
    }
    text.push(format!(
        "total: printed {} ({} listed), computed {}; after the modified sieve {} remain (claimed {})",
        rep.printed_total,
        rep.listed_total,
        rep.computed_total,
        rep.residual.len(),
        survey::CLAIMED_RESIDUAL
    ));
    let mut json = serde_json::to_value(&rep).expect("report serializes");
    json["claimed_total"] = json!(survey::CLAIMED_PSC_EXCEPTIONS);
    json["claimed_residual"] = json!(survey::CLAIMED_RESIDUAL);
    Ok(Outcome {
        ok: true,
        json,
        csv,
        text,
    })
}

fn run_table2() -> Run {
    let checks = survey::reproduce_table2().map_err(err)?;
    let mut csv = vec!["q,omega,omega_k,r,s,delta,printed_delta,r_prime,printed_r_prime,satisfied,ok".to_string()];
    let mut text = Vec::new();
    for c in &checks {
        csv.push(format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.row.q,
            c.omega,
            c.row.omega_k,
            c.r,
            c.s_used,
            c.delta,
            c.row.delta,
            opt(&c.r_prime),
            c.row.r_prime,
            c.satisfied,
            c.ok()
        ));
        let mut line = format!(
            "q = {:>5}: delta {} (printed {}), R' {} (printed {}), R' < q: {}",
            c.row.q,
            c.delta,
            c.row.delta,
            opt(&c.r_prime),
            c.row.r_prime,
            c.satisfied
        );
        if !c.printed_match() {
            line.push_str(match c.variant_ok {
                Some(true) => "  [printed figures match the annotated reading]",
                _ => "  [MISMATCH]",
            });
        }
        text.push(line);
    }
    let ok = checks.iter().all(|c| c.ok());
    text.push(format!(
        "{} rows, {} fully consistent",
        checks.len(),
        checks.iter().filter(|c| c.ok()).count()
    ));
    Ok(Outcome {
        ok,
        json: json!({ "rows": checks, "all_ok": ok }),
        csv,
        text,
    })
}

fn run_cascade(n: u32) -> Run {
    let rep = survey::cascade_thresholds(n).map_err(err)?;
    let mut csv = vec!["n,omega_max,t,r,delta,R,log10_cutoff,cleared_from,q_lower,q_upper".to_string()];
    let mut text = Vec::new();
    for s in rep.general.iter().chain(&rep.stages) {
        csv.push(format!(
            "{},{},{},{},{:.6},{:.6e},{:.4},{},{:.6e},{:.6e}",
            s.n,
            s.omega_max,
            s.t,
            s.r,
            s.delta,
            s.r_value,
            s.log10_cutoff,
            s.cleared_from.map(|w| w.to_string()).unwrap_or_default(),
            s.q_lower,
            s.q_upper
        ));
        text.push(format!(
            "omega <= {:>5}, t = {:>3}, r = {:>5}: delta > {:.6}, R < {:.6e}, q^{} > 1e{:.3}{}",
            s.omega_max,
            s.t,
            s.r,
            s.delta,
            s.r_value,
            s.n,
            s.log10_cutoff,
            match s.cleared_from {
                Some(w) if w <= s.omega_max => format!(", clears omega >= {w}"),
                _ => String::new(),
            }
        ));
    }
    for w in &rep.open {
        text.push(format!(
            "omega = {}: {} < q < {}{}",
            w.omega,
            w.q_above,
            w.q_below,
            match (&w.members, &w.psc_unresolved) {
                (Some(m), Some(u)) => format!(", {} prime powers, PSC leaves {:?}", m.len(), u),
                _ => String::new(),
            }
        ));
    }
    Ok(Outcome {
        ok: true,
        json: serde_json::to_value(&rep).expect("report serializes"),
        csv,
        text,
    })
}

fn run_anchor() -> Run {
    let a = survey::divisor_bound_anchor();
    Ok(Outcome {
        ok: a.holds,
        text: vec![format!(
            "p_{} = {}, log10 of the primorial = {:.6}, 2^w / P^(1/16) < 0.95: {}",
            a.count, a.last_prime, a.log10_primorial, a.holds
        )],
        csv: vec![
            "count,last_prime,log10_primorial,holds".into(),
            format!("{},{},{:.6},{}", a.count, a.last_prime, a.log10_primorial, a.holds),
        ],
        json: serde_json::to_value(&a).expect("anchor serializes"),
    })
}

fn dispatch(cli: Cli) -> Run {
    match cli.command {
        Command::Factor { m } => run_factor(m),
        Command::Criterion { field, t, s } => run_criterion(&field, t, s),
        Command::Charsum { field, limit_charsum } => run_charsum(&field, limit_charsum),
        Command::Verify {
            field,
            algorithm,
            trace,
            resume,
            limit_exhaustive,
        } => run_verify(&field, algorithm, trace, resume, limit_exhaustive),
        Command::Survey {
            n,
            range_lo,
            range_hi,
            omega_filter,
            cascade,
        } => run_survey(n, range_lo, range_hi, omega_filter, &cascade),
        Command::Tables { which, n, range_hi } => match which {
            Table::Table1 => run_table1(range_hi),
            Table::Table2 => run_table2(),
            Table::Cascade => run_cascade(n),
            Table::Anchor => run_anchor(),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w as usize)
            .build_global()
            .expect("thread pool is configured once");
    }
    let format = cli.format;
    match dispatch(cli) {
        Ok(out) => {
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).expect("json")),
                Format::Csv => out.csv.iter().for_each(|l| println!("{l}")),
                Format::Text => out.text.iter().for_each(|l| println!("{l}")),
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
