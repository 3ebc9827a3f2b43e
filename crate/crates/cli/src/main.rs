mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use serrin_core::constants::{ledger, LedgerInputs};
use serrin_core::deviation::{deviation_field, select_center};
use serrin_core::experiments::{fit_csv, run_family, stability_report, FamilyKind, FamilySpec, ReportOptions};
use serrin_core::geometry::{build_domain, summary_from_grid, Domain, DomainSpec};
use serrin_core::identities::{check_pointwise, deficits, sample, verify_all, DeficitKind, Grids};
use serrin_core::torsion::{gradient_bound, solve_adaptive};

use config::{Config, Failure};
use output::{emit, Format};

const SYMBOLS: &str = "\
Column names and the quantities they denote:
  r, R                 R = N|Ω|/|Γ|, the Neumann value of the ball
  h0                   H₀ = 1/R
  volume, surface      |Ω|, |Γ|
  diameter             d_Ω
  r_i, r_e             uniform interior / exterior touching-ball radii
  m                    M = max_Γ u_ν
  rho_i, rho_e, gap    ρ_i, ρ_e about the center z, and ρ_e − ρ_i
  serrin_l1            ‖u_ν − R‖ in L¹(Γ)
  serrin_l2            ‖u_ν − R‖ in L²(Γ)
  sbt_l2               ‖H₀ − H‖ in L²(Γ)
  sbt_pos_part         ∫_Γ (H₀ − H)⁺
  neg_part_weighted    ∫_Γ (H₀ − H)⁻ u_ν²
  heintze_karcher      ∫_Γ 1/H − N|Ω|
  one_over_h           ∫_Γ (1/H − u_ν)
  ratio                gap / deficit^τ with the theorem's exponent τ
  local_slope          log-ratio of consecutive gaps over consecutive deficits
  residual_*           largest |LHS − RHS| among the named identities
  idwps-h, idwps-u     ∫(−u)|∇²h|² = ½∫(R² − u_ν²)h_ν, and its form in u, q
  h-fundamental        (1/(N−1))∫|∇²h|² + (1/R)∫(u_ν − R)² = ∫(H₀ − H)u_ν²
  heintze-karcher      (1/(N−1))∫|∇²h|² + ∫(1 − Hu_ν)²/H = ∫1/H − N|Ω|
  flux-torsion         ∫_Γ u_ν = N|Ω|
  flux-minkowski       ∫_Γ H q_ν = |Γ|
  gradient-flux        ∫_Γ |∇h|²u_ν = N∫|∇h|² + 2∫(−u)|∇²h|²
Here u solves Δu = N in Ω, u = 0 on Γ, q = (|x − z|² − a)/2 and h = q − u.

Exit codes: 0 success, 2 invalid input or failed computation, 3 failed verification.";

#[derive(Parser, Debug)]
#[command(name = "serrin-lab", version, about = "Numerical laboratory for quantitative Serrin and soap-bubble stability", after_long_help = SYMBOLS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Geometric summary of a domain.
    Describe(DomainArgs),
    /// Check the integral identities and pointwise inequalities.
    Verify(DomainArgs),
    /// The six deficits.
    Deficits(DomainArgs),
    /// Explicit constants from geometric inputs.
    Constants(ConstantArgs),
    /// Sweep a family of domains and fit the stability exponent.
    Fit(FitArgs),
    /// Full per-domain stability report.
    Report(DomainArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// JSON file with defaults for any flag (keys in snake_case); explicit flags win.
    #[arg(long)]
    config: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    boundary_order: Option<usize>,
    #[arg(long)]
    radial_order: Option<usize>,
    #[arg(long)]
    angular_order: Option<usize>,
    /// Starting collocation degree for non-ellipsoidal domains; raised until the boundary residual is small.
    #[arg(long)]
    degree: Option<usize>,
    /// `argmin`, `centroid`, or `feldman:x1,x2,...`.
    #[arg(long)]
    center: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Args, Debug)]
struct DomainArgs {
    /// Inline JSON (`{"kind":"ellipsoid","axes":[2,1]}`) or a path to a JSON file.
    #[arg(long)]
    domain: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ConstantArgs {
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    ri: Option<f64>,
    /// Exterior radius; omitted means convex (`r_e = ∞`).
    #[arg(long)]
    re: Option<f64>,
    #[arg(long = "M")]
    m: Option<f64>,
    #[arg(long)]
    volume: Option<f64>,
    #[arg(long)]
    surface: Option<f64>,
    /// `δ_Γ(z)`; defaults to its lower bound `r_i²/(2M)`.
    #[arg(long)]
    delta_z: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
enum FamilyName {
    /// Constant-area ellipses.
    Ellipse2d,
    /// Constant-volume ellipsoids in `--dim` dimensions.
    Ellipsoid,
    /// `r(θ) = 1 + ε cos(kθ)` with `k = --mode`.
    Fourier,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long, value_enum)]
    family: Option<FamilyName>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    mode: Option<usize>,
    /// Comma-separated, strictly decreasing.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// serrin-l2, serrin-l1, sbt-l2, sbt-pos-part, hk, one-over-h.
    #[arg(long)]
    deficit: Option<String>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("serrin-lab: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Describe(a) => describe(a),
        Command::Verify(a) => verify(a),
        Command::Deficits(a) => deficit_table(a),
        Command::Constants(a) => constants(a),
        Command::Fit(a) => fit(a),
        Command::Report(a) => report(a),
    }
}

struct Setup {
    spec: DomainSpec,
    spec_text: String,
    domain: Domain,
    cfg: Config,
}

fn setup(args: &DomainArgs, op: &'static str) -> Result<Setup, Failure> {
    let cfg = Config::load(&args.common)?.with_domain(args.domain.clone());
    let text = cfg.domain.clone().ok_or_else(|| Failure::invalid("--domain is required"))?;
    let spec = config::parse_domain(&text)?;
    let spec_text = serde_json::to_string(&spec).expect("domain specs serialize");
    let domain = build_domain(&spec).map_err(|e| Failure::core(op, &spec_text, e))?;
    Ok(Setup { spec, spec_text, domain, cfg })
}

impl Setup {
    fn grids(&self, op: &'static str) -> Result<Grids, Failure> {
        let o = self.cfg.orders(self.domain.dim())?;
        Grids::new(&self.domain, o.boundary, o.radial, o.angular).map_err(|e| Failure::core(op, &self.spec_text, e))
    }

    fn fail(&self, op: &'static str) -> impl Fn(serrin_core::Error) -> Failure + '_ {
        move |e| Failure::core(op, &self.spec_text, e)
    }
}

fn describe(args: DomainArgs) -> Result<u8, Failure> {
    let s = setup(&args, "describe")?;
    let grids = s.grids("describe")?;
    let summary = summary_from_grid(&grids.boundary);
    let value = json!({
        "domain": s.spec,
        "summary": summary,
        "r": summary.reference_r(),
        "h0": summary.reference_h0(),
    });
    emit(&value, s.cfg.format(), s.cfg.output.as_deref())?;
    Ok(0)
}

fn verify(args: DomainArgs) -> Result<u8, Failure> {
    let s = setup(&args, "verify")?;
    let field = solve_adaptive(&s.domain, s.cfg.degree()).map_err(s.fail("verify"))?;
    let grids = s.grids("verify")?;
    let summary = summary_from_grid(&grids.boundary);
    let z = select_center(&field, &s.cfg.center()?, &grids.volume).map_err(s.fail("verify"))?;
    let dev = deviation_field(&field, &z, 0.0).map_err(s.fail("verify"))?;
    let samples = sample(&field, &grids);
    let reports = verify_all(&samples, &dev, &summary);
    let m = gradient_bound(&field, &grids.boundary).m;
    let violations = check_pointwise(&samples, &summary, m);
    let bound = if field.is_closed_form() { 1e-8 } else { 1e-6 };
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passes(bound)).map(|r| r.name.as_str()).collect();
    let value = json!({
        "domain": s.spec,
        "center": z,
        "solver": { "degree": field.degree(), "boundary_residual": field.boundary_residual() },
        "bound": bound,
        "identities": reports,
        "pointwise_violations": violations,
        "passed": failed.is_empty(),
    });
    emit(&value, s.cfg.format(), s.cfg.output.as_deref())?;
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("serrin-lab: verify: residual above {bound:e} for {} on {}", failed.join(", "), s.spec_text);
        Ok(3)
    }
}

fn deficit_table(args: DomainArgs) -> Result<u8, Failure> {
    let s = setup(&args, "deficits")?;
    let field = solve_adaptive(&s.domain, s.cfg.degree()).map_err(s.fail("deficits"))?;
    let grids = s.grids("deficits")?;
    let summary = summary_from_grid(&grids.boundary);
    let d = deficits(&sample(&field, &grids), &summary).map_err(s.fail("deficits"))?;
    emit(&json!({ "domain": s.spec, "deficits": d }), s.cfg.format(), s.cfg.output.as_deref())?;
    Ok(0)
}

fn report(args: DomainArgs) -> Result<u8, Failure> {
    let s = setup(&args, "report")?;
    let options = ReportOptions {
        orders: Some(s.cfg.orders(s.domain.dim())?),
        degree: s.cfg.degree(),
        center: s.cfg.center()?,
        theta: s.cfg.theta(),
        rayleigh: true,
    };
    let rep = stability_report(&s.spec, &options).map_err(s.fail("report"))?;
    emit(&serde_json::to_value(&rep).expect("reports serialize"), s.cfg.format(), s.cfg.output.as_deref())?;
    Ok(0)
}

fn constants(args: ConstantArgs) -> Result<u8, Failure> {
    let cfg = Config::load(&args.common)?;
    let need = |v: Option<f64>, key: &str, flag: &str| {
        v.or_else(|| cfg.number(key)).ok_or_else(|| Failure::invalid(format!("{flag} is required")))
    };
    let inputs = LedgerInputs {
        dim: args
            .n
            .or_else(|| cfg.number("N").map(|v| v as usize))
            .ok_or_else(|| Failure::invalid("--N is required"))?,
        p: args.p.or_else(|| cfg.number("p")).unwrap_or(2.0),
        diameter: need(args.d, "d", "--d")?,
        r_i: need(args.ri, "ri", "--ri")?,
        r_e: args.re.or_else(|| cfg.number("re")).unwrap_or(f64::INFINITY),
        m: need(args.m, "M", "--M")?,
        volume: args.volume.or_else(|| cfg.number("volume")),
        surface: args.surface.or_else(|| cfg.number("surface")),
        delta_z: args.delta_z.or_else(|| cfg.number("delta_z")),
        theta: cfg.theta(),
    };
    let l = ledger(&inputs).map_err(|e| Failure::core("constants", &format!("{inputs:?}"), e))?;
    emit(&serde_json::to_value(&l).expect("ledgers serialize"), cfg.format(), cfg.output.as_deref())?;
    Ok(0)
}

fn fit(args: FitArgs) -> Result<u8, Failure> {
    let cfg = Config::load(&args.common)?;
    let family = match args.family {
        Some(f) => f,
        None => cfg.get("family").ok_or_else(|| Failure::invalid("--family is required"))?,
    };
    let dim = args.dim.or_else(|| cfg.get("dim"));
    let kind = match family {
        FamilyName::Ellipse2d => {
            if dim.is_some_and(|d| d != 2) {
                return Err(Failure::invalid("ellipse2d is two-dimensional; use --family ellipsoid with --dim"));
            }
            FamilyKind::EllipsoidEccentric { dim: 2, base: 1.0 }
        }
        FamilyName::Ellipsoid => FamilyKind::EllipsoidEccentric {
            dim: dim.ok_or_else(|| Failure::invalid("--dim is required for the ellipsoid family"))?,
            base: 1.0,
        },
        FamilyName::Fourier => FamilyKind::FourierPerturb {
            base: 1.0,
            mode: args.mode.or_else(|| cfg.get("mode")).ok_or_else(|| Failure::invalid("--mode is required"))?,
        },
    };
    let eps: Vec<f64> = match args.eps {
        Some(e) => e,
        None => cfg.get("eps").ok_or_else(|| Failure::invalid("--eps is required"))?,
    };
    let deficit_name: String = match args.deficit {
        Some(d) => d,
        None => cfg.get("deficit").unwrap_or_else(|| "serrin-l2".to_string()),
    };
    let deficit = DeficitKind::parse(&deficit_name)
        .ok_or_else(|| Failure::invalid(format!("unknown deficit `{deficit_name}`")))?;
    let spec = FamilySpec {
        orders: Some(cfg.orders(kind_dim(&kind))?),
        degree: cfg.degree(),
        center: cfg.center()?,
        theta: cfg.theta(),
        ..FamilySpec::new(kind, eps, deficit)
    };
    let jobs = args.jobs.or_else(|| cfg.get("jobs"));
    let spec_text = serde_json::to_string(&spec).expect("family specs serialize");
    let result = run_family(&spec, jobs).map_err(|e| Failure::core("fit", &spec_text, e))?;
    match cfg.format_or(Format::Csv) {
        Format::Csv => output::write(&fit_csv(&result), cfg.output.as_deref())?,
        f => emit(&serde_json::to_value(&result).expect("fits serialize"), f, cfg.output.as_deref())?,
    }
    Ok(0)
}

fn kind_dim(kind: &FamilyKind) -> usize {
    match kind {
        FamilyKind::EllipsoidEccentric { dim, .. } => *dim,
        FamilyKind::FourierPerturb { .. } => 2,
    }
}
