//! `kronloc`: Euler characteristics of Kronecker moduli spaces from the
//! command line.
//!
//! Exit codes: 0 success, 2 input error, 3 resource cap exceeded.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use serde_json::json;

use kronloc::covering::{enumerate_localization_data, CensusOptions, TotalChi, Weight};
use kronloc::formulas::{
    conjecture_f, douglas_k, euler_34, euler_d_dplus1, euler_nn, lower_bound_L, EulerResult,
};
use kronloc::glueing::{decompose, starting_vector};
use kronloc::quiver::{classify_root, BipartiteQuiver, KroneckerPair, RootClass};
use kronloc::series::{
    asymptotic_coeff_estimate, lagrange_power_coeff, solve_functional, x0_inverse, PhiSpec,
};
use kronloc::Error;

#[derive(Parser)]
#[command(
    name = "kronloc",
    version,
    about = "Kronecker quiver moduli computations"
)]
struct Cli {
    /// optional key=value config file (enumerationCap, precisionDigits,
    /// threads, outputFormat); flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// node-visit cap for enumerations and stability sweeps
    #[arg(long, global = true)]
    cap: Option<u64>,

    /// working precision in digits (recorded; logs are exact-integer based)
    #[arg(long, global = true)]
    precision: Option<u64>,

    /// thread count (output is byte-identical regardless)
    #[arg(long, global = true)]
    threads: Option<u64>,

    /// output format: text or json (dot applies to `enumerate --emit dot`)
    #[arg(long, global = true)]
    format: Option<String>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Euler characteristic of the moduli space of type (d, e)
    Euler(TypeArgs),
    /// Enumerate tree-shaped localization data of type (d, e)
    Enumerate(EnumArgs),
    /// Glue-tuple decomposition of a coprime pair
    Decompose {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        e: u64,
    },
    /// Exponential lower bound L for the ray through (d, e)
    Lowerbound(TypeArgs),
    /// Generating-series utilities
    Series {
        #[command(subcommand)]
        cmd: SeriesCmd,
    },
    /// Generic (semi)stability of a bipartite quiver from JSON
    Stability {
        /// path to a quiver JSON file
        #[arg(long)]
        file: PathBuf,
        /// test semistability instead of stability
        #[arg(long)]
        semistable: bool,
    },
    /// Conjectural limit function f(r) on the imaginary cone
    ConjectureF {
        #[arg(long)]
        m: u64,
        /// rational argument, e.g. 8/5 or 1
        #[arg(long)]
        r: String,
    },
}

#[derive(Args)]
struct TypeArgs {
    #[arg(long)]
    m: u64,
    #[arg(long)]
    d: u64,
    #[arg(long)]
    e: u64,
}

#[derive(Args)]
struct EnumArgs {
    #[arg(long)]
    m: u64,
    #[arg(long)]
    d: u64,
    #[arg(long)]
    e: u64,
    /// restrict to data with all vertex dimensions 1
    #[arg(long)]
    type1_only: bool,
    /// emit one file per datum: `--emit dot`
    #[arg(long)]
    emit: Option<String>,
    /// output directory for emitted files
    #[arg(long, default_value = "dot")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum SeriesCmd {
    /// [x^n] y(x)^m for phi = 1 + a x^b (exact closed form)
    Coeff {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        n: u64,
    },
    /// coefficients of the fixed point y = x phi(y)
    Solve {
        /// polynomial like "1+x^2" or "1+2x^3"
        #[arg(long)]
        phi: String,
        #[arg(long)]
        order: usize,
    },
    /// dominant singularity x0^{-1} for phi = 1 + a x^b
    X0 {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
    },
    /// square-root-singularity estimate of [x^n] y(x)
    Asym {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        n: u64,
    },
}

#[derive(Clone)]
struct RunConfig {
    enumeration_cap: u64,
    precision_digits: u64,
    threads: u64,
    output_format: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            enumeration_cap: 10_000_000,
            precision_digits: 64,
            threads: std::thread::available_parallelism()
                .map(|n| n.get() as u64)
                .unwrap_or(1),
            output_format: "text".into(),
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::CapExceeded { .. } | Error::SweepTooLarge { .. } => 3,
            _ => 2,
        };
        let message = match &e {
            Error::CapExceeded {
                visited,
                cap,
                found,
            } => json!({
                "status": "partial",
                "visited": visited,
                "cap": cap,
                "found": found,
            })
            .to_string(),
            _ => format!("error: {e}"),
        };
        fail(code, message)
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| fail(2, format!("error: cannot read config: {e}")))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                fail(2, format!("error: config line {}: missing `=`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| fail(2, format!("error: config key {key}: {what}"));
            match key {
                "enumerationCap" => {
                    cfg.enumeration_cap = value.parse().map_err(|_| bad("not an integer"))?
                }
                "precisionDigits" => {
                    cfg.precision_digits = value.parse().map_err(|_| bad("not an integer"))?
                }
                "threads" => cfg.threads = value.parse().map_err(|_| bad("not an integer"))?,
                "outputFormat" => cfg.output_format = value.to_string(),
                _ => return Err(fail(2, format!("error: unknown config key `{key}`"))),
            }
        }
    }
    if let Some(cap) = cli.cap {
        cfg.enumeration_cap = cap;
    }
    if let Some(p) = cli.precision {
        cfg.precision_digits = p;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if let Some(f) = &cli.format {
        cfg.output_format = f.clone();
    }
    if cfg.enumeration_cap == 0 || cfg.precision_digits == 0 || cfg.threads == 0 {
        return Err(fail(2, "error: config values must be positive"));
    }
    if !matches!(cfg.output_format.as_str(), "text" | "json" | "dot") {
        return Err(fail(
            2,
            format!("error: unknown output format `{}`", cfg.output_format),
        ));
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(f) => {
            eprintln!("{}", f.message);
            return ExitCode::from(f.code);
        }
    };
    let result = match &cli.cmd {
        Cmd::Euler(args) => cmd_euler(args, &cfg),
        Cmd::Enumerate(args) => cmd_enumerate(args, &cfg),
        Cmd::Decompose { d, e } => cmd_decompose(*d, *e, &cfg),
        Cmd::Lowerbound(args) => cmd_lowerbound(args, &cfg),
        Cmd::Series { cmd } => cmd_series(cmd, &cfg),
        Cmd::Stability { file, semistable } => cmd_stability(file, *semistable, &cfg),
        Cmd::ConjectureF { m, r } => cmd_conjecture_f(*m, r, &cfg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn print_euler(m: u64, d: u64, e: u64, method: &str, r: &EulerResult, cfg: &RunConfig) {
    if cfg.output_format == "json" {
        let checks: Vec<_> = r
            .cross_checks
            .iter()
            .map(|c| json!({"name": c.name, "pass": c.pass}))
            .collect();
        let out = json!({
            "m": m, "d": d, "e": e,
            "method": method,
            "value": r.value.to_string(),
            "crossChecks": checks,
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("chi(M_{{{d},{e}}}^{m}) = {}", r.value);
        println!("method: {method}");
        for c in &r.cross_checks {
            println!("check [{}]: {}", if c.pass { "ok" } else { "FAIL" }, c.name);
        }
    }
}

fn cmd_euler(args: &TypeArgs, cfg: &RunConfig) -> Result<(), Failure> {
    let (m, d, e) = (args.m, args.d, args.e);
    if m < 3 {
        return Err(fail(2, "error: need m >= 3"));
    }
    if d == 0 || e == 0 {
        return Err(fail(2, "error: need d >= 1 and e >= 1"));
    }
    // (n, (m-1)n) is the only legal non-coprime input; the diagonal (n, n)
    // is rejected below like every other non-coprime pair
    let nn = if e == (m - 1) * d && d >= 2 {
        Some(d)
    } else if d == (m - 1) * e && e >= 2 {
        Some(e)
    } else {
        None
    };
    if let Some(n) = nn {
        let r = euler_nn(m, n)?;
        print_euler(m, d, e, "vanishing theorem", &r, cfg);
        return Ok(());
    }
    if num_integer::gcd(d, e) != 1 {
        return Err(Error::NotCoprime { d, e }.into());
    }
    // reduce to the base-region representative d0 <= e0 <= (m-1) d0
    let (mut d0, mut e0) = (d, e);
    let reduced = loop {
        if d0 > e0 {
            std::mem::swap(&mut d0, &mut e0);
        } else if e0 > (m - 1) * d0 {
            if e0 >= m * d0 {
                break None;
            }
            (d0, e0) = (m * d0 - e0, d0);
        } else {
            break Some((d0, e0));
        }
    };
    let Some((d0, e0)) = reduced else {
        // outside the imaginary cone: a real root is a point, otherwise empty
        let r = match classify_root(&KroneckerPair::new(m, d, e)) {
            RootClass::Real => EulerResult {
                value: 1u32.into(),
                cross_checks: vec![],
            },
            _ => EulerResult {
                value: 0u32.into(),
                cross_checks: vec![],
            },
        };
        print_euler(m, d, e, "real root classification", &r, cfg);
        return Ok(());
    };
    if (d0, e0) == (3, 4) {
        let r = euler_34(m)?;
        print_euler(m, d, e, "census polynomial (3,4)", &r, cfg);
        return Ok(());
    }
    if e0 == d0 + 1 {
        let r = euler_d_dplus1(m, d0)?;
        print_euler(m, d, e, "closed form (d,d+1)", &r, cfg);
        return Ok(());
    }
    // fallback: census with cap, exact only when every component is a point
    let p = KroneckerPair::new(m, d0, e0);
    let opts = CensusOptions {
        type1_only: false,
        cap: cfg.enumeration_cap,
    };
    let report = enumerate_localization_data(&p, &opts)?;
    let method = format!(
        "census fallback (cap={}, type1Only=false)",
        cfg.enumeration_cap
    );
    match &report.total_chi {
        TotalChi::Count(c) => {
            let r = EulerResult {
                value: c.clone(),
                cross_checks: vec![],
            };
            print_euler(m, d, e, &method, &r, cfg);
            Ok(())
        }
        TotalChi::PositiveDimensional => {
            if cfg.output_format == "json" {
                let out = json!({
                    "m": m, "d": d, "e": e,
                    "method": method,
                    "value": null,
                    "flagged": "positive-dimensional components; datum count is not an Euler characteristic",
                    "data": report.data.len(),
                });
                println!("{}", serde_json::to_string_pretty(&out).unwrap());
            } else {
                println!(
                    "chi(M_{{{d},{e}}}^{m}): flagged partial; {} data found, positive-dimensional components present",
                    report.data.len()
                );
                println!("method: {method}");
            }
            Ok(())
        }
    }
}

/// FNV-1a over the canonical form: stable across platforms and runs.
fn canonical_hash(key: &[(u8, Weight, u64)]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |b: u8| {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    };
    for (side, w, dim) in key {
        eat(*side);
        for &x in &w.0 {
            for b in x.to_le_bytes() {
                eat(b);
            }
        }
        for b in dim.to_le_bytes() {
            eat(b);
        }
        eat(0xff);
    }
    h
}

fn cmd_enumerate(args: &EnumArgs, cfg: &RunConfig) -> Result<(), Failure> {
    if args.m < 3 {
        return Err(fail(2, "error: need m >= 3"));
    }
    let p = KroneckerPair::new(args.m, args.d, args.e);
    let opts = CensusOptions {
        type1_only: args.type1_only,
        cap: cfg.enumeration_cap,
    };
    let report = enumerate_localization_data(&p, &opts)?;
    if let Some(kind) = &args.emit {
        if kind != "dot" {
            return Err(fail(2, format!("error: unknown emit kind `{kind}`")));
        }
        fs::create_dir_all(&args.out)
            .map_err(|e| fail(2, format!("error: cannot create output dir: {e}")))?;
        let mut names: Vec<String> = Vec::new();
        for datum in &report.data {
            let name = format!("{:016x}.dot", canonical_hash(&datum.canonical_key()));
            fs::write(args.out.join(&name), datum.to_dot())
                .map_err(|e| fail(2, format!("error: cannot write {name}: {e}")))?;
            names.push(name);
        }
        names.sort();
        for name in &names {
            println!("{}", args.out.join(name).display());
        }
        return Ok(());
    }
    if cfg.output_format == "json" {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!("data: {}", report.data.len());
        println!("rawCount: {}", report.raw_count);
        match &report.total_chi {
            TotalChi::Count(c) => println!("totalChi: {c}"),
            TotalChi::PositiveDimensional => println!("totalChi: positive-dimensional"),
        }
        for (i, dim) in report.per_datum_moduli_dim.iter().enumerate() {
            println!("datum {i}: moduli dimension {dim}");
        }
    }
    Ok(())
}

fn cmd_decompose(d: u64, e: u64, cfg: &RunConfig) -> Result<(), Failure> {
    let (lo, hi) = if d <= e { (d, e) } else { (e, d) };
    let chain = decompose(lo, hi)?;
    let sv = starting_vector(lo, hi)?;
    if cfg.output_format == "json" {
        let chain_json: serde_json::Value = serde_json::from_str(&chain.to_json()).unwrap();
        let out = json!({
            "startingVector": {"ds": sv.d_s, "es": sv.e_s},
            "decomposition": chain_json,
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("startingVector({lo},{hi}) = ({},{})", sv.d_s, sv.e_s);
        println!(
            "tuple: [{}]",
            chain
                .tuple
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        println!("n: {}", chain.n);
        for step in &chain.chain {
            println!(
                "block ({},{}) start ({},{}) repeats {}",
                step.d, step.e, step.ds, step.es, step.k
            );
        }
    }
    Ok(())
}

/// The base-region representative of the reflection orbit of `(d, e)`,
/// the same reduction `lower_bound_L` performs internally.
fn base_region(m: u64, mut d: u64, mut e: u64) -> Option<(u64, u64)> {
    loop {
        if d == 0 || e == 0 {
            return None;
        }
        if d > e {
            std::mem::swap(&mut d, &mut e);
        } else if e > (m - 1) * d {
            if e >= m * d {
                return None;
            }
            (d, e) = (m * d - e, d);
        } else {
            return Some((d, e));
        }
    }
}

fn cmd_lowerbound(args: &TypeArgs, cfg: &RunConfig) -> Result<(), Failure> {
    let b = lower_bound_L(args.m, args.d, args.e)?;
    // soft comparison against the conjectural limit on the same ray
    let soft = base_region(args.m, args.d, args.e).and_then(|(d0, e0)| {
        let r = Ratio::new(e0 as i64, d0 as i64);
        conjecture_f(args.m, r).ok().map(|f| (e0, d0, f))
    });
    if cfg.output_format == "json" {
        println!("{}", b.to_json());
    } else {
        println!("a = {}", b.a);
        println!("K = {}", b.k);
        println!("d = {}", b.d);
        println!("L = {:.6}", b.l);
        if let Some((e0, d0, f)) = soft {
            println!(
                "conjectural limit f({e0}/{d0}) = {f:.6}; L <= f: {}",
                b.l <= f + 1e-9
            );
        }
    }
    Ok(())
}

fn parse_phi(text: &str) -> Result<PhiSpec, Failure> {
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut coeffs: Vec<u64> = Vec::new();
    let mut add = |pow: usize, c: u64| {
        if coeffs.len() <= pow {
            coeffs.resize(pow + 1, 0);
        }
        coeffs[pow] += c;
    };
    for term in cleaned.split('+') {
        if term.is_empty() {
            return Err(fail(2, "error: malformed phi: empty term"));
        }
        let bad = || fail(2, format!("error: malformed phi term `{term}`"));
        if let Some((cpart, ppart)) = term.split_once('x') {
            let cpart = cpart.strip_suffix('*').unwrap_or(cpart);
            let c: u64 = if cpart.is_empty() {
                1
            } else {
                cpart.parse().map_err(|_| bad())?
            };
            let pow: usize = if ppart.is_empty() {
                1
            } else {
                ppart
                    .strip_prefix('^')
                    .ok_or_else(bad)?
                    .parse()
                    .map_err(|_| bad())?
            };
            add(pow, c);
        } else {
            add(0, term.parse().map_err(|_| bad())?);
        }
    }
    Ok(PhiSpec::dense_u64(&coeffs))
}

fn cmd_series(cmd: &SeriesCmd, cfg: &RunConfig) -> Result<(), Failure> {
    match cmd {
        SeriesCmd::Coeff { a, b, m, n } => {
            if *a == 0 || *b == 0 || *m == 0 || *n == 0 {
                return Err(fail(2, "error: a, b, m, n must be positive"));
            }
            let v = lagrange_power_coeff(*a, *b, *m, *n);
            if cfg.output_format == "json" {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({"coefficient": v.to_string()})).unwrap()
                );
            } else {
                println!("{v}");
            }
        }
        SeriesCmd::Solve { phi, order } => {
            if *order == 0 {
                return Err(fail(2, "error: order must be positive"));
            }
            let spec = parse_phi(phi)?;
            let y = solve_functional(&spec, *order);
            let coeffs: Vec<String> = (0..=*order).map(|i| y.coeff(i).to_string()).collect();
            if cfg.output_format == "json" {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({"coefficients": coeffs})).unwrap()
                );
            } else {
                println!("{}", coeffs.join(" "));
            }
        }
        SeriesCmd::X0 { a, b } => {
            let s = x0_inverse(*a, *b)?;
            let x0 = 1.0 / s.value;
            if cfg.output_format == "json" {
                let out = json!({
                    "x0": x0,
                    "x0Inverse": s.value,
                    "exact": {"prefactor": s.prefactor, "base": s.base,
                              "exponent": format!("{}/{}", s.exponent.numer(), s.exponent.denom())},
                });
                println!("{}", serde_json::to_string_pretty(&out).unwrap());
            } else {
                println!("x0 = {x0}");
                println!(
                    "x0^-1 = {} = {} * {}^({}/{})",
                    s.value,
                    s.prefactor,
                    s.base,
                    s.exponent.numer(),
                    s.exponent.denom()
                );
            }
        }
        SeriesCmd::Asym { a, b, n } => {
            let v = asymptotic_coeff_estimate(*a, *b, *n)?;
            if cfg.output_format == "json" {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({"estimate": v})).unwrap()
                );
            } else {
                println!("{v}");
            }
        }
    }
    Ok(())
}

fn cmd_stability(file: &PathBuf, semistable: bool, cfg: &RunConfig) -> Result<(), Failure> {
    let text =
        fs::read_to_string(file).map_err(|e| fail(2, format!("error: cannot read file: {e}")))?;
    let q = BipartiteQuiver::from_json(&text)?;
    let cap = cfg.enumeration_cap as u128;
    let strict_witness = q.is_generically_stable_capped(true, cap)?;
    let verdict;
    let mut witness = None;
    if strict_witness.is_none() {
        verdict = "stable";
    } else if q.is_generically_stable_capped(false, cap)?.is_none() {
        verdict = "semistable";
        witness = strict_witness;
    } else {
        verdict = "unstable";
        witness = q.is_generically_stable_capped(false, cap)?;
    }
    let passes = verdict == "stable" || (semistable && verdict == "semistable");
    if cfg.output_format == "json" {
        let w = witness
            .as_ref()
            .map(|w| w.iter().map(|(id, u)| json!([id, u])).collect::<Vec<_>>());
        let out = json!({
            "verdict": verdict,
            "passes": passes,
            "witness": w,
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("{verdict}");
        if let Some(w) = &witness {
            let parts: Vec<String> = w.iter().map(|(id, u)| format!("{id}={u}")).collect();
            println!("destabilizing sub-dimensions: {}", parts.join(" "));
        }
    }
    Ok(())
}

fn cmd_conjecture_f(m: u64, r: &str, cfg: &RunConfig) -> Result<(), Failure> {
    let bad = || fail(2, format!("error: malformed rational `{r}`"));
    let (p, q) = match r.split_once('/') {
        Some((p, q)) => (
            p.trim().parse::<i64>().map_err(|_| bad())?,
            q.trim().parse::<i64>().map_err(|_| bad())?,
        ),
        None => (r.trim().parse::<i64>().map_err(|_| bad())?, 1),
    };
    if q == 0 {
        return Err(bad());
    }
    let value = conjecture_f(m, Ratio::new(p, q))?;
    let k = douglas_k(m);
    if cfg.output_format == "json" {
        let out = json!({
            "conjectural": true,
            "m": m,
            "r": format!("{p}/{q}"),
            "f": value,
            "K": k,
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("f({p}/{q}) = {value} (conjectural)");
        println!("K = {k}");
    }
    Ok(())
}
