use bose2d::dyson_kernel::Point;
use bose2d::filling_holes::{neumann_ground_energy, weak_coupling_ratio, whole_plane_ground_energy, WellSpec, DEFAULT_CTILDE};
use bose2d::free_energy::{critical_data, error_budget, lower_bound, BudgetConstants};
use bose2d::ideal_gas::{f0, mu0, ThermoPoint};
use bose2d::quantum_toy::{berezin_lieb_margin, default_quadrature, FockSpace};
use bose2d::report::{self, fmt17, DysonCheck, HolesCheck, PotentialSource, SweepConfig, ToyCheck};
use bose2d::scattering::{functional_energy, scattering_length, RadialPotential};
use bose2d::surgery::{cap_integral, cutoff_range, DeltaChoice, SurgeryReport};
use bose2d::Error;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bose2d", version, about = "Numerics for the free energy of the dilute two-dimensional Bose gas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ideal-gas chemical potential and free energy
    Ideal {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        rho: f64,
        /// Scattering length; adds critical data and the correction term
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Scattering length of a radial potential (`hard_disk(d)`, `soft_disk(v0, d)` or a JSON file)
    Scatter {
        #[arg(long)]
        potential: String,
        /// Ball radius; defaults to ten times the range
        #[arg(long = "R")]
        r: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Potential modifications with certified bounds
    Surgery {
        #[command(subcommand)]
        op: SurgeryOp,
    },
    /// Discretised operator inequalities
    Verify {
        #[command(subcommand)]
        op: VerifyOp,
    },
    /// Two-term lower bound on the free energy
    Bound {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        a: f64,
        #[command(flatten)]
        constants: ConstantArgs,
        #[arg(long)]
        json: bool,
    },
    /// Error budget at a point
    Budget {
        #[arg(long)]
        sigma: f64,
        #[arg(long = "beta-rho")]
        beta_rho: f64,
        #[command(flatten)]
        constants: ConstantArgs,
        #[arg(long)]
        json: bool,
    },
    /// Truncated Fock-space checks
    Toy {
        #[command(subcommand)]
        op: ToyOp,
    },
    /// Run a configured sweep
    Sweep {
        config: PathBuf,
        /// Overrides the configured output path
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the configured JSON report path
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConstantArgs {
    /// Multiplier of the total-error row
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
}

#[derive(Subcommand)]
enum SurgeryOp {
    /// Cap the integral of v at 4πφ
    Cap {
        #[arg(long)]
        potential: String,
        #[arg(long)]
        phi: f64,
        /// Shaving width, or `paper-delta`
        #[arg(long, default_value = "0.5")]
        delta: String,
        #[arg(long = "R")]
        r: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cut v off at a new range
    Cutoff {
        #[arg(long)]
        potential: String,
        #[arg(long = "R0")]
        r0: f64,
        #[arg(long = "R")]
        r: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum VerifyOp {
    /// Dyson-type lemma on the torus
    Dyson {
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long = "L", default_value_t = 20.0)]
        l: f64,
        #[arg(long = "R", default_value_t = 2.0)]
        r: f64,
        #[arg(long, default_value_t = 4.0)]
        s: f64,
        #[arg(long, default_value_t = 0.3)]
        eps: f64,
        /// JSON file, or `hard_disk(d)` / `soft_disk(v0, d)`
        #[arg(long)]
        potential: String,
        /// JSON list of `[x, y]` pairs; defaults to one centre in the middle
        #[arg(long)]
        centers: Option<PathBuf>,
        #[arg(long = "R0")]
        r0: Option<f64>,
        #[arg(long = "a-tilde")]
        a_tilde: Option<f64>,
        /// Restrict nearest neighbours to the separated set
        #[arg(long)]
        separated: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shallow-well bounds and the penalised torus operator
    Holes {
        #[arg(long = "R0")]
        r0: f64,
        #[arg(long = "R")]
        r: f64,
        #[arg(long, default_value_t = DEFAULT_CTILDE)]
        ctilde: f64,
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
        #[arg(long)]
        centers: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ToyOp {
    /// Berezin–Lieb margin for the single-mode quartic Hamiltonian
    BerezinLieb {
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = 0.5)]
        g: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 12)]
        nmax: usize,
    },
    /// Seeded Pinsker and superadditivity draws
    Entropy {
        #[arg(long, default_value_t = 500)]
        pinsker: usize,
        #[arg(long, default_value_t = 50)]
        superadditivity: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Outcome of a subcommand: 0 pass, 1 failed check.
type Outcome = Result<u8, Error>;

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load_potential(spec: &str) -> Result<RadialPotential, Error> {
    PotentialSource::parse(spec, Path::new("."))?.load()
}

fn load_centers(path: &Path) -> Result<Vec<Point>, Error> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn status(ok: bool) -> u8 {
    if ok {
        0
    } else {
        1
    }
}

#[derive(Serialize)]
struct IdealReport {
    beta: f64,
    rho: f64,
    beta_rho: f64,
    mu0: f64,
    f0: f64,
    sigma: Option<f64>,
    beta_c: Option<f64>,
    rho_s: Option<f64>,
    correction: Option<f64>,
}

fn ideal(beta: f64, rho: f64, a: Option<f64>, json: bool) -> Outcome {
    let p = match a {
        Some(a) => ThermoPoint::with_a(beta, rho, a)?,
        None => ThermoPoint::new(beta, rho)?,
    };
    let crit = if a.is_some() { Some(critical_data(&p)?) } else { None };
    let rep = IdealReport {
        beta,
        rho,
        beta_rho: p.beta_rho(),
        mu0: mu0(&p),
        f0: f0(&p),
        sigma: p.sigma(),
        beta_c: crit.map(|c| c.beta_c),
        rho_s: crit.map(|c| c.rho_s),
        correction: if a.is_some() { Some(bose2d::free_energy::correction_term(&p)?) } else { None },
    };
    if json {
        emit(&rep, None)?;
    } else {
        println!("beta_rho = {}", fmt17(rep.beta_rho));
        println!("mu0 = {}", fmt17(rep.mu0));
        println!("f0 = {}", fmt17(rep.f0));
        if let (Some(s), Some(bc), Some(rs), Some(c)) = (rep.sigma, rep.beta_c, rep.rho_s, rep.correction) {
            println!("sigma = {}\nbeta_c = {}\nrho_s = {}\ncorrection = {}", fmt17(s), fmt17(bc), fmt17(rs), fmt17(c));
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct ScatterReport {
    a: f64,
    r_used: f64,
    functional_value: f64,
    functional_energy: f64,
    degenerate: bool,
    a_spread: f64,
}

fn scatter(spec: &str, r: Option<f64>, json: bool) -> Outcome {
    let v = load_potential(spec)?;
    let r = r.unwrap_or(10.0 * v.range());
    let res = scattering_length(&v, r)?;
    let rep = ScatterReport {
        a: res.a,
        r_used: res.r_used,
        functional_value: res.functional_value,
        functional_energy: functional_energy(&v, &res),
        degenerate: res.degenerate,
        a_spread: res.a_spread,
    };
    if json {
        emit(&rep, None)?;
    } else {
        println!("a = {}", fmt17(rep.a));
        println!("2pi/ln(R/a) = {}", fmt17(rep.functional_value));
        println!("functional energy = {}", fmt17(rep.functional_energy));
        if rep.degenerate {
            println!("degenerate: v vanishes identically");
        }
    }
    Ok(0)
}

fn surgery(op: SurgeryOp) -> Outcome {
    let (report, out): (SurgeryReport, Option<PathBuf>) = match op {
        SurgeryOp::Cap { potential, phi, delta, r, out } => {
            let delta = match delta.as_str() {
                "paper-delta" => DeltaChoice::PaperPreset,
                s => DeltaChoice::Value(s.parse().map_err(|_| Error::Parse(format!("--delta expects a number or `paper-delta`, got `{s}`")))?),
            };
            (cap_integral(&load_potential(&potential)?, phi, delta, r)?.1, out)
        }
        SurgeryOp::Cutoff { potential, r0, r, out } => (cutoff_range(&load_potential(&potential)?, r0, r)?.1, out),
    };
    emit(&report, out.as_deref())?;
    Ok(status(report.certified))
}

fn verify(op: VerifyOp) -> Outcome {
    match op {
        VerifyOp::Dyson { grid, l, r, s, eps, potential, centers, r0, a_tilde, separated, out } => {
            let centers = match centers {
                Some(p) => load_centers(&p)?,
                None => vec![[0.5 * l, 0.5 * l]],
            };
            let check = DysonCheck {
                grid,
                l,
                r,
                s,
                epsilon: eps,
                r0,
                a_tilde,
                potential: PotentialSource::parse(&potential, Path::new("."))?,
                centers,
                separated,
            };
            let res = check.run()?;
            emit(&res, out.as_deref())?;
            Ok(status(res.certified))
        }
        VerifyOp::Holes { r0, r, ctilde, grid, l, centers, out } => {
            let centers = match centers {
                Some(p) => load_centers(&p)?,
                None => vec![[0.5 * l, 0.5 * l]],
            };
            let spec = WellSpec::new(r0, r)?;
            let neumann = neumann_ground_energy(&spec)?;
            let plane = whole_plane_ground_energy(&spec)?;
            let check = HolesCheck { grid, l, r0, r, ctilde, centers }.run()?;
            #[derive(Serialize)]
            struct HolesReport {
                neumann_energy: f64,
                whole_plane_energy: f64,
                weak_coupling_ratio: f64,
                near_edge_bound: f64,
                operator: report::CheckResult,
            }
            let rep = HolesReport {
                neumann_energy: neumann.energy,
                whole_plane_energy: plane.energy,
                weak_coupling_ratio: weak_coupling_ratio(&spec, plane.energy),
                near_edge_bound: -361.0 / (r * r),
                operator: check,
            };
            emit(&rep, out.as_deref())?;
            Ok(status(rep.operator.certified))
        }
    }
}

fn constants(c: &ConstantArgs) -> BudgetConstants {
    BudgetConstants { rate: c.rate, ..BudgetConstants::default() }
}

fn bound(beta: f64, rho: f64, a: f64, k: &ConstantArgs, json: bool) -> Outcome {
    let p = ThermoPoint::with_a(beta, rho, a)?;
    let lb = lower_bound(&p, &constants(k))?;
    if json {
        emit(&lb, None)?;
    } else {
        println!("regime = {}", lb.budget.regime.name());
        println!("f0 = {}", fmt17(lb.f0));
        println!("correction = {}", fmt17(lb.correction));
        println!("o1_bound = {}", fmt17(lb.budget.o1_bound));
        println!("f_lower = {}", fmt17(lb.f_lower));
        println!("f_lower - f0 = {}", fmt17(lb.excess));
        if lb.budget.vacuous {
            println!("warning: o1_bound >= 1, the bound is vacuous here");
        }
    }
    Ok(0)
}

fn budget(sigma: f64, beta_rho: f64, k: &ConstantArgs, json: bool) -> Outcome {
    let b = error_budget(sigma, beta_rho, &constants(k))?;
    if json {
        emit(&b, None)?;
    } else {
        println!("regime = {}", b.regime.name());
        println!("pc_sq_beta = {}", fmt17(b.pc_sq_beta));
        println!("A1 = {}\nA2 = {}\nA3 = {}", fmt17(b.a1), fmt17(b.a2), fmt17(b.a3));
        println!("row = {}", fmt17(b.row));
        for (k, v) in &b.z_terms {
            println!("{k} = {}", fmt17(*v));
        }
        println!("o1_bound = {}", fmt17(b.o1_bound));
        if b.vacuous {
            println!("warning: o1_bound >= 1, the bound is vacuous here");
        }
    }
    Ok(0)
}

fn toy(op: ToyOp) -> Outcome {
    match op {
        ToyOp::BerezinLieb { omega, g, beta, nmax } => {
            let space = FockSpace::new(1, nmax)?;
            let bl = berezin_lieb_margin(&space, omega, g, beta, &default_quadrature(omega, g, beta)?)?;
            emit(&bl, None)?;
            Ok(status(bl.margin >= -1e-8))
        }
        ToyOp::Entropy { pinsker, superadditivity, seed } => {
            let check = ToyCheck { omega: vec![], g: vec![], beta: vec![], nmax: 12, pinsker_draws: pinsker, superadditivity_draws: superadditivity };
            let res = check.run(seed)?;
            emit(&res, None)?;
            Ok(status(res.iter().all(|c| c.certified)))
        }
    }
}

fn sweep(config: &Path, out: Option<PathBuf>, report_path: Option<PathBuf>) -> Outcome {
    let mut cfg = SweepConfig::from_file(config)?;
    if out.is_some() {
        cfg.output = out;
    }
    if report_path.is_some() {
        cfg.report = report_path;
    }
    let rep = report::run_sweep(&cfg);
    if let Some(body) = report::write_outputs(&cfg, &rep)? {
        print!("{body}");
    }
    eprint!("{}", report::render_checks(&rep));
    for row in rep.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("row sigma={} beta_rho={}: {}", fmt17(row.sigma), fmt17(row.beta_rho), row.error.as_deref().unwrap_or(""));
    }
    Ok(rep.exit_code() as u8)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Ideal { beta, rho, a, json } => ideal(beta, rho, a, json),
        Command::Scatter { potential, r, json } => scatter(&potential, r, json),
        Command::Surgery { op } => surgery(op),
        Command::Verify { op } => verify(op),
        Command::Bound { beta, rho, a, constants, json } => bound(beta, rho, a, &constants, json),
        Command::Budget { sigma, beta_rho, constants, json } => budget(sigma, beta_rho, &constants, json),
        Command::Toy { op } => toy(op),
        Command::Sweep { config, out, report } => sweep(&config, out, report),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match report::with_pool(|| run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
