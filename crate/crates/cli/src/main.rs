mod config;

use clap::{Args, Parser, Subcommand, ValueEnum};
use config::{Format, RunConfig};
use ilab_core::auxiliary::{self, AuxiliaryFamily};
use ilab_core::circle::{self, ArcParams, IncrementOutcome};
use ilab_core::expsum::{self, Alpha, RationalPoint, Restriction};
use ilab_core::padic::{self, IntersectivityVerdict};
use ilab_core::selftest::{self, SelftestOptions};
use ilab_core::setlab::{self, SearchMode, TableMethod};
use ilab_core::sieve::SieveProfile;
use ilab_core::{setio, Error, IntPolynomial};
use num_bigint::BigInt;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

/// Intersective polynomials, sieved exponential sums and difference-free sets.
#[derive(Parser)]
#[command(name = "ilab", version)]
struct Cli {
    /// `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Summation block size, a power of two.
    #[arg(long, global = true)]
    block_size: Option<u64>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Intersectivity and p-adic roots.
    #[command(subcommand)]
    Intersect(IntersectCmd),
    /// Auxiliary polynomial families.
    #[command(subcommand)]
    Aux(AuxCmd),
    /// The derivative-root sieve.
    #[command(subcommand)]
    Sieve(SieveCmd),
    /// Complete and Weyl exponential sums.
    #[command(subcommand)]
    Expsum(ExpsumCmd),
    /// Arcs over Z_N and the density increment.
    #[command(subcommand)]
    Circle(CircleCmd),
    /// Difference-free sets.
    #[command(subcommand)]
    Sets(SetsCmd),
    /// Run the acceptance checks.
    Selftest {
        /// Smaller sizes, for a fast smoke run.
        #[arg(long)]
        quick: bool,
        /// Only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

#[derive(Args, Clone)]
struct PolyArg {
    /// Coefficients `a0,a1,...` or an expression such as `(x-1)(x-2)`.
    #[arg(long, allow_hyphen_values = true)]
    poly: String,
}

#[derive(Args, Clone)]
struct FamilyArgs {
    #[command(flatten)]
    poly: PolyArg,
    /// Use this integer root at every prime.
    #[arg(long, allow_hyphen_values = true)]
    root: Option<i64>,
    /// Precision searched when choosing roots.
    #[arg(long, default_value_t = 8)]
    depth: u32,
}

#[derive(Subcommand)]
enum IntersectCmd {
    /// Decide intersectivity up to a prime bound.
    Check {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, default_value_t = 100)]
        prime_bound: u64,
        #[arg(long, default_value_t = 6)]
        depth: u32,
    },
    /// Roots modulo q.
    Roots {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        q: u64,
    },
    /// Hensel-lift a root modulo p^j.
    Lift {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long)]
        j: u32,
    },
}

#[derive(Subcommand)]
enum AuxCmd {
    /// lambda(d), r_d and h_d.
    Family {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long)]
        d: u64,
    },
    /// Content bound audit for all d <= d_max.
    Audit {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long)]
        d_max: u64,
    },
    /// Positive image elements up to a bound.
    Image {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        bound: u64,
    },
    /// Truncated inheritance check on a set file.
    Inherit {
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long)]
        set: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: i64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        d: u64,
        #[arg(long)]
        bound: u64,
    },
}

#[derive(Args, Clone)]
struct SieveArgs {
    #[command(flatten)]
    poly: PolyArg,
    #[arg(long = "y")]
    y: f64,
}

#[derive(Subcommand)]
enum SieveCmd {
    /// gamma(p), j(p) and the wheel.
    Profile {
        #[command(flatten)]
        s: SieveArgs,
    },
    /// |W(Y) ∩ [1, X]|.
    Count {
        #[command(flatten)]
        s: SieveArgs,
        #[arg(long = "x")]
        x: u64,
        #[arg(long)]
        list: bool,
    },
    /// Exact count against X prod (1 - j/p^gamma).
    Brun {
        #[command(flatten)]
        s: SieveArgs,
        #[arg(long = "x")]
        x: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RestrictArg {
    None,
    Wq,
    W,
}

#[derive(Subcommand)]
enum ExpsumCmd {
    /// sum_{s mod q} e(g(s) a/q).
    Complete {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long)]
        q: u64,
        #[arg(long, value_enum, default_value = "none")]
        restrict: RestrictArg,
        #[arg(long = "y", default_value_t = 20.0)]
        y: f64,
        /// Multiply the prime-power parts instead.
        #[arg(long)]
        crt: bool,
    },
    /// sum_{n <= X} e(g(n) alpha), optionally sieved and weighted by g'.
    Weyl {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long = "x")]
        x: u64,
        /// `a/q`.
        #[arg(long, conflicts_with = "real")]
        rational: Option<String>,
        /// Added to the rational frequency.
        #[arg(long, allow_hyphen_values = true, requires = "rational")]
        beta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        real: Option<f64>,
        /// Restrict to W(Y).
        #[arg(long = "sieve-y")]
        sieve_y: Option<f64>,
        #[arg(long)]
        weighted: bool,
    },
    /// Major arc main term against the sieved weighted sum.
    Major {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long)]
        q: u64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        beta: f64,
        #[arg(long = "x")]
        x: u64,
        #[arg(long = "y")]
        y: f64,
    },
    /// Minor arc bound: Weyl's inequality, or the sieved form with --y and --z.
    Minor {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long)]
        q: u64,
        #[arg(long = "x")]
        x: u64,
        #[arg(long = "y", requires = "z")]
        y: Option<f64>,
        #[arg(long = "z", requires = "y")]
        z: Option<f64>,
    },
    /// |S(a/q)| / sqrt(q) over q <= q_max.
    Audit {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long)]
        q_max: u64,
        #[arg(long = "y")]
        y: f64,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
    /// Empirical moment of the normalized sieved sum.
    Moment {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long = "l")]
        l: u64,
        #[arg(long = "m")]
        m: u32,
        #[arg(long = "y")]
        y: f64,
    },
}

#[derive(Subcommand)]
enum CircleCmd {
    /// Arc label of one frequency.
    Classify {
        #[arg(long = "n")]
        n: u64,
        #[arg(long = "k")]
        k: f64,
        #[arg(long = "q-max")]
        q_max: u64,
        #[arg(long = "t")]
        t: u64,
    },
    /// Fourier mass of a set on M_q, or M'_q with --divisors.
    Mass {
        #[arg(long)]
        set: PathBuf,
        #[arg(long = "n")]
        n: u64,
        #[arg(long = "q")]
        q: u64,
        #[arg(long = "k")]
        k: f64,
        #[arg(long)]
        divisors: bool,
    },
    /// Density increment onto a progression of step q.
    Increment {
        #[arg(long)]
        set: PathBuf,
        #[arg(long = "l")]
        l: u64,
        #[arg(long = "q")]
        q: u64,
        #[arg(long = "k")]
        k: f64,
        #[arg(long)]
        theta: f64,
    },
}

#[derive(Args, Clone)]
struct GensArg {
    /// Generators separated by `;`, e.g. `x^2;x^3`.
    #[arg(long, default_value = "x^2")]
    gens: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    BranchBound,
}

#[derive(Subcommand)]
enum SetsCmd {
    /// Check a set file against the generators.
    Verify {
        #[arg(long)]
        set: PathBuf,
        /// Defaults to the DFSET1 header, else the largest element.
        #[arg(long = "n")]
        n: Option<u64>,
        #[command(flatten)]
        gens: GensArg,
    },
    Greedy {
        #[arg(long = "n")]
        n: u64,
        #[command(flatten)]
        gens: GensArg,
        /// Write the set in DFSET1 form.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Multiples of the largest prime p <= N^(1/k).
    Trivial {
        #[arg(long = "n")]
        n: u64,
        #[arg(long = "k")]
        k: u32,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Exact maximum over [1, N], N <= 40.
    Exhaustive {
        #[arg(long = "n")]
        n: u64,
        #[command(flatten)]
        gens: GensArg,
    },
    /// Largest B in Z/q with no k-th power difference.
    Search {
        #[arg(long = "q")]
        q: u64,
        #[arg(long = "k")]
        k: u32,
        #[arg(long, value_enum, default_value = "branch-bound")]
        mode: ModeArg,
        #[arg(long, default_value_t = 1_000_000_000)]
        budget: u64,
    },
    /// Lift B mod q to [1, N] by base-q digits.
    Ruzsa {
        /// Elements of B, comma separated.
        #[arg(long = "b")]
        b: String,
        #[arg(long = "q")]
        q: u64,
        #[arg(long = "k")]
        k: u32,
        #[arg(long = "n")]
        n: u64,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Density table as CSV.
    Table {
        /// Comma separated.
        #[arg(long)]
        ns: String,
        #[command(flatten)]
        gens: GensArg,
        #[arg(long, value_delimiter = ',', default_value = "greedy,trivial")]
        methods: Vec<String>,
    },
}

enum Outcome {
    /// Success (exit 0) or a data outcome such as a violation (exit 1).
    Json(Value, bool),
    Csv(String),
}

fn ok(v: impl serde::Serialize) -> Result<Outcome, Error> {
    Ok(Outcome::Json(serde_json::to_value(v).expect("serializable"), true))
}

fn poly(a: &PolyArg) -> Result<IntPolynomial, Error> {
    IntPolynomial::parse(&a.poly)
}

fn family(f: &FamilyArgs) -> Result<AuxiliaryFamily, Error> {
    let base = poly(&f.poly)?;
    match f.root {
        Some(z) => AuxiliaryFamily::with_integer_root(base, BigInt::from(z)),
        None => AuxiliaryFamily::new(base, f.depth),
    }
}

fn gens(g: &GensArg) -> Result<Vec<IntPolynomial>, Error> {
    g.gens.split(';').map(IntPolynomial::parse).collect()
}

fn read_set(path: &PathBuf) -> Result<(Vec<u64>, Option<u64>), Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    setio::parse_set(&text)
}

fn write_witness(path: &Option<PathBuf>, set: &[u64], n: u64) -> Result<(), Error> {
    if let Some(p) = path {
        std::fs::write(p, setio::write_runs(set, n)).map_err(|e| Error::Resource(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn parse_fraction(s: &str) -> Result<(i64, u64), Error> {
    let bad = || Error::Parse(format!("expected a/q, got {s:?}"));
    let (a, q) = s.split_once('/').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?))
}

fn verdict_json(v: &IntersectivityVerdict) -> (Value, bool) {
    (serde_json::to_value(v).expect("serializable"), !matches!(v, IntersectivityVerdict::NotIntersective { .. }))
}

fn intersect(cmd: &IntersectCmd) -> Result<Outcome, Error> {
    match cmd {
        IntersectCmd::Check { poly: p, prime_bound, depth } => {
            let h = poly(p)?;
            let (v, good) = verdict_json(&padic::is_intersective(&h, *prime_bound, *depth)?);
            Ok(Outcome::Json(json!({ "poly": h.to_string(), "prime_bound": prime_bound, "depth": depth, "verdict": v }), good))
        }
        IntersectCmd::Roots { poly: p, q } => {
            if *q == 0 {
                return Err(Error::domain("q must be positive"));
            }
            ok(json!({ "q": q, "roots": padic::roots_mod(&poly(p)?, *q) }))
        }
        IntersectCmd::Lift { poly: p, p: prime, n, j } => {
            let root = padic::hensel_lift(&poly(p)?, *prime, &BigInt::from(*n), *j)?;
            ok(json!({ "p": prime, "j": j, "root": root.to_string() }))
        }
    }
}

fn aux(cmd: &AuxCmd) -> Result<Outcome, Error> {
    match cmd {
        AuxCmd::Family { fam, d } => {
            let f = family(fam)?;
            let hd = f.aux_poly(*d)?;
            ok(json!({
                "d": d,
                "lambda": f.lambda(*d)?.to_string(),
                "r": f.r_of(*d)?.to_string(),
                "h_d": hd.to_string(),
                "coeffs": hd.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            }))
        }
        AuxCmd::Audit { fam, d_max } => match family(fam)?.content_bound_audit(*d_max) {
            Ok(r) => ok(r),
            Err(Error::ContentBoundViolation { d, content, bound_sq }) => Ok(Outcome::Json(
                json!({ "status": "ContentBoundViolation", "d": d, "content": content, "bound_sq": bound_sq }),
                false,
            )),
            Err(e) => Err(e),
        },
        AuxCmd::Image { poly: p, bound } => {
            ok(json!({ "bound": bound, "values": auxiliary::image_elements(&poly(p)?, *bound)? }))
        }
        AuxCmd::Inherit { fam, set, x, q, d, bound } => {
            let (a, _) = read_set(set)?;
            let out = auxiliary::inheritance_check(&a, *x, *q, &family(fam)?, *d, *bound)?;
            let holds = out.holds;
            Ok(Outcome::Json(serde_json::to_value(out).expect("serializable"), holds))
        }
    }
}

fn profile(s: &SieveArgs) -> Result<SieveProfile, Error> {
    SieveProfile::new(poly(&s.poly)?, s.y)
}

fn sieve(cmd: &SieveCmd) -> Result<Outcome, Error> {
    match cmd {
        SieveCmd::Profile { s } => {
            let p = profile(s)?;
            ok(json!({
                "profile": p,
                "wheel_modulus": p.wheel_modulus(),
                "density": p.density(),
                "idzero": p.idzero_check(),
            }))
        }
        SieveCmd::Count { s, x, list } => ok(profile(s)?.enumerate_w(*x, *list)),
        SieveCmd::Brun { s, x } => ok(profile(s)?.brun_compare(*x)),
    }
}

fn expsum_cmd(cmd: &ExpsumCmd, cfg: &RunConfig) -> Result<Outcome, Error> {
    match cmd {
        ExpsumCmd::Complete { poly: p, a, q, restrict, y, crt } => {
            let g = poly(p)?;
            let pt = RationalPoint::new(*a, *q)?;
            let prof = SieveProfile::new(g.clone(), *y)?;
            let r = if *crt {
                expsum::complete_sum_crt(&g, pt, &prof, matches!(restrict, RestrictArg::Wq))?
            } else {
                let res = match restrict {
                    RestrictArg::None => Restriction::None,
                    RestrictArg::Wq => Restriction::Wq(&prof),
                    RestrictArg::W => Restriction::W(&prof),
                };
                expsum::complete_sum(&g, pt, res)?
            };
            ok(json!({ "point": pt, "result": r, "parts": expsum::crt_split(pt, &prof) }))
        }
        ExpsumCmd::Weyl { poly: p, x, rational, beta, real, sieve_y, weighted } => {
            let g = poly(p)?;
            let alpha = match (rational, real) {
                (Some(r), _) => {
                    let (a, q) = parse_fraction(r)?;
                    match beta {
                        Some(b) => Alpha::Shifted { a, q, beta: *b },
                        None => Alpha::Rational { a, q },
                    }
                }
                (None, Some(v)) => Alpha::Real(*v),
                (None, None) => return Err(Error::Parse("give --rational a/q or --real alpha".into())),
            };
            let prof = sieve_y.map(|y| SieveProfile::new(g.clone(), y)).transpose()?;
            ok(expsum::weyl_sum_with_block(&g, alpha, *x, prof.as_ref(), *weighted, cfg.block_size)?)
        }
        ExpsumCmd::Major { poly: p, a, q, beta, x, y } => {
            let g = poly(p)?;
            let prof = SieveProfile::new(g.clone(), *y)?;
            ok(expsum::major_arc_asymptotic(&g, RationalPoint::new(*a, *q)?, *beta, *x, &prof)?)
        }
        ExpsumCmd::Minor { poly: p, a, q, x, y, z } => {
            let g = poly(p)?;
            let pt = RationalPoint::new(*a, *q)?;
            match (y, z) {
                (Some(y), Some(z)) => ok(expsum::sieved_minor_audit(&g, pt, *x, *y, *z)?),
                _ => ok(expsum::weyl_minor_bound(&g, pt, *x)?),
            }
        }
        ExpsumCmd::Audit { poly: p, q_max, y, samples } => {
            let g = poly(p)?;
            let prof = SieveProfile::new(g.clone(), *y)?;
            let audit = expsum::sqrt_cancel_audit(&g, *q_max, &prof, *samples, cfg.seed)?;
            match cfg.format {
                Format::Csv => Ok(Outcome::Csv(audit.to_csv())),
                Format::Json => ok(audit),
            }
        }
        ExpsumCmd::Moment { poly: p, l, m, y } => {
            let g = poly(p)?;
            let prof = SieveProfile::new(g.clone(), *y)?;
            ok(expsum::moment_sum(&g, *l, *m, &prof)?)
        }
    }
}

fn circle_cmd(cmd: &CircleCmd) -> Result<Outcome, Error> {
    match cmd {
        CircleCmd::Classify { n, k, q_max, t } => {
            let p = ArcParams::new(*n, *k, *q_max)?;
            ok(json!({ "params": p, "disjoint": p.disjoint(), "t": t, "label": circle::classify(*t, &p) }))
        }
        CircleCmd::Mass { set, n, q, k, divisors } => {
            let (a, _) = read_set(set)?;
            let fd = circle::dft_indicator(&a, *n)?;
            let mass = if *divisors { circle::arc_mass_divisors(&fd, *q, *k) } else { circle::arc_mass(&fd, *q, *k) };
            ok(json!({ "N": n, "q": q, "K": k, "divisors": divisors, "mass": mass, "total_mass": fd.mass() }))
        }
        CircleCmd::Increment { set, l, q, k, theta } => {
            let (b, _) = read_set(set)?;
            let out = circle::extract_progression(&b, *l, *q, *k, *theta)?;
            let good = !matches!(&out, IncrementOutcome::Progression(p) if !p.verified);
            Ok(Outcome::Json(serde_json::to_value(out).expect("serializable"), good))
        }
    }
}

fn sets(cmd: &SetsCmd) -> Result<Outcome, Error> {
    match cmd {
        SetsCmd::Verify { set, n, gens: g } => {
            let (a, header) = read_set(set)?;
            let n = n.or(header).or(a.last().copied()).unwrap_or(1);
            let inst = setlab::DiffFreeInstance::new(n, gens(g)?, a)?;
            let v = inst.verify();
            let good = v.is_ok();
            Ok(Outcome::Json(json!({ "instance": inst.summary(), "verdict": v }), good))
        }
        SetsCmd::Greedy { n, gens: g, witness } => {
            let inst = setlab::greedy(*n, gens(g)?)?;
            write_witness(witness, &inst.a, *n)?;
            let k = inst.generators.iter().map(|g| g.deg()).max().unwrap_or(1) as f64;
            let reference = (*n as f64).powf(1.0 - 1.0 / k);
            ok(json!({
                "instance": inst.summary(),
                "verdict": inst.verify(),
                "reference_n_pow": reference,
                "ratio": inst.a.len() as f64 / reference,
            }))
        }
        SetsCmd::Trivial { n, k, witness } => {
            let inst = setlab::trivial_multiples(*n, *k)?;
            write_witness(witness, &inst.a, *n)?;
            ok(json!({ "instance": inst.summary(), "p": inst.a[0], "verdict": inst.verify() }))
        }
        SetsCmd::Exhaustive { n, gens: g } => {
            let inst = setlab::exhaustive_max(*n, gens(g)?)?;
            ok(json!({ "instance": inst.summary(), "set": inst.a }))
        }
        SetsCmd::Search { q, k, mode, budget } => {
            let mode = match mode {
                ModeArg::Exhaustive => SearchMode::Exhaustive,
                ModeArg::BranchBound => SearchMode::BranchBound { budget: *budget },
            };
            ok(setlab::modular_search(*q, *k, mode)?)
        }
        SetsCmd::Ruzsa { b, q, k, n, witness } => {
            let bs: Vec<u64> = b
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad element {t:?}"))))
                .collect::<Result<_, _>>()?;
            match setlab::ruzsa_lift(&bs, *q, *k, *n) {
                Ok(r) => {
                    write_witness(witness, &r.instance.a, *n)?;
                    ok(r)
                }
                Err(Error::ConstructionRejected { a, b, diff }) => Ok(Outcome::Json(
                    json!({ "status": "ConstructionRejected", "a": a, "a_prime": b, "diff": diff }),
                    false,
                )),
                Err(e) => Err(e),
            }
        }
        SetsCmd::Table { ns, gens: g, methods } => {
            let ns: Vec<u64> = ns
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad N {t:?}"))))
                .collect::<Result<_, _>>()?;
            let methods: Vec<TableMethod> = methods.iter().map(|m| m.parse()).collect::<Result<_, _>>()?;
            Ok(Outcome::Csv(setlab::density_table(&ns, &gens(g)?, &methods)?))
        }
    }
}

fn run_selftest(quick: bool, only: &[u32], cfg: &RunConfig) -> Result<Outcome, Error> {
    let opts = SelftestOptions { quick, seed: cfg.seed };
    let report = if only.is_empty() {
        selftest::run(opts)
    } else {
        selftest::run_only(opts, only)
    };
    let good = report.all_pass();
    Ok(Outcome::Json(serde_json::to_value(report).expect("serializable"), good))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Resource(_) => 3,
        _ => 2,
    }
}

fn emit(text: &str, cfg: &RunConfig) -> Result<(), Error> {
    match &cfg.output {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Resource(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = RunConfig::default();
    let setup = (|| {
        if let Some(p) = &cli.config {
            cfg.apply_file(p)?;
        }
        cfg.apply_env()?;
        if let Some(t) = cli.threads {
            cfg.threads = t;
        }
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        if let Some(b) = cli.block_size {
            cfg.block_size = b;
        }
        if let Some(o) = &cli.output {
            cfg.output = Some(o.clone());
        }
        if let Some(f) = cli.format {
            cfg.format = f;
        }
        cfg.validate()
    })();
    if let Err(e) = setup {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(3);
        }
    };
    let result = pool.install(|| match &cli.cmd {
        Cmd::Intersect(c) => intersect(c),
        Cmd::Aux(c) => aux(c),
        Cmd::Sieve(c) => sieve(c),
        Cmd::Expsum(c) => expsum_cmd(c, &cfg),
        Cmd::Circle(c) => circle_cmd(c),
        Cmd::Sets(c) => sets(c),
        Cmd::Selftest { quick, only } => run_selftest(*quick, only, &cfg),
    });
    let (text, code) = match result {
        Ok(Outcome::Json(v, good)) => {
            (serde_json::to_string_pretty(&v).expect("serializable") + "\n", if good { 0 } else { 1 })
        }
        Ok(Outcome::Csv(s)) => (s, 0),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if let Err(e) = emit(&text, &cfg) {
        eprintln!("error: {e}");
        return ExitCode::from(exit_code(&e));
    }
    ExitCode::from(code)
}
