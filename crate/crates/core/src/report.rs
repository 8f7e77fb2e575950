//! Sweep configuration, execution and rendering.
//!
//! The configuration format is line oriented:
//!
//! ```text
//! # comment
//! seed = 7
//! output = sweep.csv
//!
//! [sweep]
//! ln_sigma = 50, 100, 200
//! beta_rho = logspace(1, 1e3, 200)
//!
//! [constants]
//! rate = 1
//!
//! [dyson]
//! grid = 64
//! L = 20
//! potential = soft_disk(4.0, 1.0)
//! centers = 10, 10
//! ```
//!
//! Values are numbers, comma-separated lists, `linspace(lo, hi, n)`, `logspace(lo, hi, n)`,
//! or strings. The sections `[dyson]` and `[holes]` may repeat. A JSON object with the same
//! sections as keys is accepted as well.

use crate::dyson_kernel::{dyson_inequality_margin, CutoffProfile, DysonParams, NearestSet, Point, TorusGrid};
use crate::error::{Error, Result};
use crate::filling_holes::{holes_inequality_margin, DEFAULT_CTILDE};
use crate::free_energy::{lower_bound, BudgetConstants, Regime};
use crate::ideal_gas::ThermoPoint;
use crate::quantum_toy::{
    berezin_lieb_margin, default_quadrature, pinsker_margin, random_density, superadditivity_check, FockSpace,
};
use crate::scattering::{scattering_length, RadialPotential};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "BOSE2D_THREADS";

/// Columns of the sweep CSV.
pub const CSV_HEADER: &str = "sigma,beta_rho,regime,pc_sq_beta,A1,A2,A3,o1_bound,f0,correction,f_lower";

#[derive(Clone, Debug, PartialEq)]
enum Value {
    Num(Vec<f64>),
    Text(String),
}

#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    value: Value,
}

type Section = BTreeMap<String, Entry>;

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok()
}

fn parse_value(raw: &str, line: usize) -> Result<Value> {
    let raw = raw.trim();
    for (name, log) in [("linspace", false), ("logspace", true)] {
        if let Some(rest) = raw.strip_prefix(name) {
            let inner = rest.trim().strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(|| parse_err(line, format!("malformed {name}")))?;
            let args: Vec<&str> = inner.split(',').collect();
            if args.len() != 3 {
                return Err(parse_err(line, format!("{name} takes (lo, hi, n)")));
            }
            let lo = parse_number(args[0]).ok_or_else(|| parse_err(line, "bad lower end"))?;
            let hi = parse_number(args[1]).ok_or_else(|| parse_err(line, "bad upper end"))?;
            let n: usize = args[2].trim().parse().map_err(|_| parse_err(line, "bad point count"))?;
            if log && !(lo > 0.0 && hi > 0.0) {
                return Err(parse_err(line, "logspace needs positive ends"));
            }
            let pts = (0..n)
                .map(|i| {
                    let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                    if log {
                        (lo.ln() + t * (hi.ln() - lo.ln())).exp()
                    } else {
                        lo + t * (hi - lo)
                    }
                })
                .collect();
            return Ok(Value::Num(pts));
        }
    }
    let parts: Vec<Option<f64>> = raw.split(',').map(parse_number).collect();
    if !raw.is_empty() && parts.iter().all(Option::is_some) {
        return Ok(Value::Num(parts.into_iter().flatten().collect()));
    }
    Ok(Value::Text(raw.trim_matches('"').to_string()))
}

fn parse_text(text: &str) -> Result<Vec<(String, Section)>> {
    let mut out: Vec<(String, Section)> = vec![(String::new(), Section::new())];
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| parse_err(line, "unterminated section header"))?;
            out.push((name.trim().to_string(), Section::new()));
            continue;
        }
        let (key, val) = content.split_once('=').ok_or_else(|| parse_err(line, format!("expected key = value, got `{content}`")))?;
        let key = key.trim().to_string();
        let value = parse_value(val, line)?;
        let section = &mut out.last_mut().expect("root section").1;
        if section.insert(key.clone(), Entry { line, value }).is_some() {
            return Err(parse_err(line, format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}

fn json_to_value(v: &serde_json::Value) -> Result<Value> {
    match v {
        serde_json::Value::Number(n) => Ok(Value::Num(vec![n.as_f64().unwrap_or(f64::NAN)])),
        serde_json::Value::Array(a) => {
            let mut nums = Vec::with_capacity(a.len());
            for x in a {
                match x {
                    serde_json::Value::Number(n) => nums.push(n.as_f64().unwrap_or(f64::NAN)),
                    serde_json::Value::Array(pair) => {
                        for y in pair {
                            nums.push(y.as_f64().ok_or_else(|| Error::Parse(format!("non-numeric entry {y}")))?)
                        }
                    }
                    _ => return Err(Error::Parse(format!("non-numeric list entry {x}"))),
                }
            }
            Ok(Value::Num(nums))
        }
        serde_json::Value::String(s) => parse_value(s, 0),
        serde_json::Value::Bool(b) => Ok(Value::Text(b.to_string())),
        other => Err(Error::Parse(format!("unsupported JSON value {other}"))),
    }
}

fn parse_json(text: &str) -> Result<Vec<(String, Section)>> {
    let root: serde_json::Value = serde_json::from_str(text)?;
    let obj = root.as_object().ok_or_else(|| Error::Parse("JSON config must be an object".into()))?;
    let mut out = vec![(String::new(), Section::new())];
    let section = |body: &serde_json::Map<String, serde_json::Value>| -> Result<Section> {
        let mut s = Section::new();
        for (k, v) in body {
            s.insert(k.clone(), Entry { line: 0, value: json_to_value(v)? });
        }
        Ok(s)
    };
    for (key, v) in obj {
        match v {
            serde_json::Value::Object(body) => out.push((key.clone(), section(body)?)),
            serde_json::Value::Array(items) if items.iter().all(|i| i.is_object()) && !items.is_empty() => {
                for item in items {
                    out.push((key.clone(), section(item.as_object().expect("checked"))?));
                }
            }
            other => {
                out[0].1.insert(key.clone(), Entry { line: 0, value: json_to_value(other)? });
            }
        }
    }
    Ok(out)
}

struct Reader<'a> {
    name: &'a str,
    section: &'a Section,
    used: Vec<&'a str>,
}

impl<'a> Reader<'a> {
    fn new(name: &'a str, section: &'a Section) -> Self {
        Reader { name, section, used: vec![] }
    }

    fn err(&self, key: &str, msg: impl std::fmt::Display) -> Error {
        let line = self.section.get(key).map(|e| e.line).unwrap_or(0);
        let sec = if self.name.is_empty() { "top level".to_string() } else { format!("[{}]", self.name) };
        if line > 0 {
            Error::Parse(format!("line {line}: {sec} `{key}`: {msg}"))
        } else {
            Error::Parse(format!("{sec} `{key}`: {msg}"))
        }
    }

    fn list(&mut self, key: &'a str) -> Result<Option<Vec<f64>>> {
        self.used.push(key);
        match self.section.get(key).map(|e| &e.value) {
            None => Ok(None),
            Some(Value::Num(v)) => Ok(Some(v.clone())),
            Some(Value::Text(t)) => Err(self.err(key, format!("expected numbers, got `{t}`"))),
        }
    }

    fn num(&mut self, key: &'a str) -> Result<Option<f64>> {
        match self.list(key)? {
            None => Ok(None),
            Some(v) if v.len() == 1 => Ok(Some(v[0])),
            Some(_) => Err(self.err(key, "expected a single number")),
        }
    }

    fn num_or(&mut self, key: &'a str, default: f64) -> Result<f64> {
        Ok(self.num(key)?.unwrap_or(default))
    }

    fn text(&mut self, key: &'a str) -> Result<Option<String>> {
        self.used.push(key);
        match self.section.get(key).map(|e| &e.value) {
            None => Ok(None),
            Some(Value::Text(t)) => Ok(Some(t.clone())),
            Some(Value::Num(v)) => Ok(Some(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))),
        }
    }

    fn flag(&mut self, key: &'a str) -> Result<bool> {
        match self.text(key)?.as_deref() {
            None | Some("false") | Some("0") => Ok(false),
            Some("true") | Some("1") => Ok(true),
            Some(other) => Err(self.err(key, format!("expected true/false, got `{other}`"))),
        }
    }

    fn finish(self) -> Result<()> {
        for key in self.section.keys() {
            if !self.used.contains(&key.as_str()) {
                return Err(self.err(key, "unknown key"));
            }
        }
        Ok(())
    }
}

/// Potential given either inline (`hard_disk(d)`, `soft_disk(v0, d)`) or as a JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PotentialSource {
    HardDisk(f64),
    SoftDisk(f64, f64),
    File(PathBuf),
}

impl PotentialSource {
    pub fn parse(s: &str, base: &Path) -> Result<Self> {
        let call = |name: &str| -> Option<Vec<f64>> {
            let inner = s.trim().strip_prefix(name)?.trim().strip_prefix('(')?.strip_suffix(')')?;
            inner.split(',').map(parse_number).collect()
        };
        if let Some(a) = call("hard_disk") {
            if a.len() == 1 {
                return Ok(PotentialSource::HardDisk(a[0]));
            }
        }
        if let Some(a) = call("soft_disk") {
            if a.len() == 2 {
                return Ok(PotentialSource::SoftDisk(a[0], a[1]));
            }
        }
        Ok(PotentialSource::File(base.join(s.trim())))
    }

    pub fn load(&self) -> Result<RadialPotential> {
        match self {
            PotentialSource::HardDisk(d) => RadialPotential::hard_disk(*d),
            PotentialSource::SoftDisk(v0, d) => RadialPotential::soft_disk(*v0, *d),
            PotentialSource::File(p) => RadialPotential::from_json(&std::fs::read_to_string(p)?),
        }
    }

    pub fn label(&self) -> String {
        match self {
            PotentialSource::HardDisk(d) => format!("hard_disk({d})"),
            PotentialSource::SoftDisk(v0, d) => format!("soft_disk({v0}, {d})"),
            PotentialSource::File(p) => p.display().to_string(),
        }
    }
}

/// One discretised Dyson-inequality check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DysonCheck {
    pub grid: usize,
    pub l: f64,
    pub r: f64,
    pub s: f64,
    pub epsilon: f64,
    /// Defaults to `max(range of v, R/2)`.
    pub r0: Option<f64>,
    /// Defaults to the scattering length of `v`.
    pub a_tilde: Option<f64>,
    pub potential: PotentialSource,
    pub centers: Vec<Point>,
    pub separated: bool,
}

impl DysonCheck {
    pub fn run(&self) -> Result<CheckResult> {
        let grid = TorusGrid::new(self.l, self.grid)?;
        let v = self.potential.load()?;
        let r0 = self.r0.unwrap_or_else(|| v.range().max(0.5 * self.r));
        let a_tilde = match self.a_tilde {
            Some(a) => a,
            None => scattering_length(&v, r0.max(v.range()) + 0.5)?.a.max(f64::MIN_POSITIVE),
        };
        let params = DysonParams {
            r: self.r,
            s: self.s,
            epsilon: self.epsilon,
            kappa: 0.0,
            r0,
            centers: self.centers.clone(),
            nearest: if self.separated { NearestSet::Separated } else { NearestSet::All },
            cutoff: CutoffProfile::Smooth,
            hardcore_penalty: None,
        };
        let m = dyson_inequality_margin(&grid, &v, &params, a_tilde)?;
        Ok(CheckResult {
            name: format!("dyson N={} L={} R={} s={} eps={} v={} centers={}", self.grid, self.l, self.r, self.s, self.epsilon, self.potential.label(), self.centers.len()),
            certified: m.certified,
            margin: m.margin,
            tolerance: m.tolerance,
        })
    }
}

/// One filling-holes operator check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolesCheck {
    pub grid: usize,
    pub l: f64,
    pub r0: f64,
    pub r: f64,
    pub ctilde: f64,
    pub centers: Vec<Point>,
}

impl HolesCheck {
    pub fn run(&self) -> Result<CheckResult> {
        let grid = TorusGrid::new(self.l, self.grid)?;
        let m = holes_inequality_margin(&grid, &self.centers, self.r0, self.r, self.ctilde)?;
        Ok(CheckResult {
            name: format!("holes N={} L={} R0={} R={} ctilde={} centers={}", self.grid, self.l, self.r0, self.r, self.ctilde, self.centers.len()),
            certified: m.certified,
            margin: m.margin,
            tolerance: m.tolerance,
        })
    }
}

/// Quantum toy checks: a Berezin–Lieb grid and seeded entropy inequalities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyCheck {
    pub omega: Vec<f64>,
    pub g: Vec<f64>,
    pub beta: Vec<f64>,
    pub nmax: usize,
    pub pinsker_draws: usize,
    pub superadditivity_draws: usize,
}

impl ToyCheck {
    pub fn run(&self, seed: u64) -> Result<Vec<CheckResult>> {
        let space = FockSpace::new(1, self.nmax)?;
        let mut grid = vec![];
        for &o in &self.omega {
            for &g in &self.g {
                for &b in &self.beta {
                    grid.push((o, g, b));
                }
            }
        }
        let mut out = grid
            .par_iter()
            .map(|&(o, g, b)| {
                let bl = berezin_lieb_margin(&space, o, g, b, &default_quadrature(o, g, b)?)?;
                Ok(CheckResult {
                    name: format!("berezin-lieb omega={o} g={g} beta={b} nmax={}", self.nmax),
                    certified: bl.margin >= -1e-8,
                    margin: bl.margin,
                    tolerance: 1e-8,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if self.pinsker_draws > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst = f64::INFINITY;
            for _ in 0..self.pinsker_draws {
                let d = rng.gen_range(2..=8);
                let g = random_density(d, &mut rng);
                let w = random_density(d, &mut rng);
                worst = worst.min(pinsker_margin(&g, &w)?);
            }
            out.push(CheckResult { name: format!("pinsker draws={}", self.pinsker_draws), certified: worst >= -1e-12, margin: worst, tolerance: 1e-12 });
        }
        if self.superadditivity_draws > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
            let mut worst = f64::INFINITY;
            for _ in 0..self.superadditivity_draws {
                let (d1, d2) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
                let g = random_density(d1 * d2, &mut rng);
                let (o1, o2) = (random_density(d1, &mut rng), random_density(d2, &mut rng));
                let (lhs, rhs) = superadditivity_check(&g, &o1, &o2)?;
                worst = worst.min(lhs - rhs);
            }
            out.push(CheckResult {
                name: format!("superadditivity draws={}", self.superadditivity_draws),
                certified: worst >= -1e-10,
                margin: worst,
                tolerance: 1e-10,
            });
        }
        Ok(out)
    }
}

/// One sweep point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub beta: f64,
    pub rho: f64,
    pub sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Optional JSON report with rows and check results.
    pub report: Option<PathBuf>,
    pub format: OutputFormat,
    pub points: Vec<SweepPoint>,
    pub constants: BudgetConstants,
    pub dyson: Vec<DysonCheck>,
    pub holes: Vec<HolesCheck>,
    pub toy: Option<ToyCheck>,
}

fn centers_of(r: &mut Reader<'_>, key: &'static str) -> Result<Vec<Point>> {
    let flat = r.list(key)?.unwrap_or_default();
    if flat.len() % 2 != 0 {
        return Err(r.err(key, "centers need an even number of coordinates"));
    }
    Ok(flat.chunks(2).map(|c| [c[0], c[1]]).collect())
}

fn count(r: &mut Reader<'_>, key: &'static str, default: usize) -> Result<usize> {
    match r.num(key)? {
        None => Ok(default),
        Some(x) if x >= 0.0 && x.fract() == 0.0 => Ok(x as usize),
        Some(x) => Err(r.err(key, format!("expected a non-negative integer, got {x}"))),
    }
}

impl SweepConfig {
    /// Parse a key-value or JSON configuration; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let sections = if text.trim_start().starts_with('{') { parse_json(text)? } else { parse_text(text)? };
        let mut cfg = SweepConfig {
            seed: 0,
            output: None,
            report: None,
            format: OutputFormat::Csv,
            points: vec![],
            constants: BudgetConstants::default(),
            dyson: vec![],
            holes: vec![],
            toy: None,
        };
        let mut seen_sweep = false;
        for (name, section) in &sections {
            let mut r = Reader::new(name, section);
            match name.as_str() {
                "" => {
                    if let Some(s) = r.num("seed")? {
                        if !(s >= 0.0 && s.fract() == 0.0) {
                            return Err(r.err("seed", "expected a non-negative integer"));
                        }
                        cfg.seed = s as u64;
                    }
                    cfg.output = r.text("output")?.map(|p| base.join(p));
                    cfg.report = r.text("report")?.map(|p| base.join(p));
                    cfg.format = match r.text("format")?.as_deref() {
                        None | Some("csv") => OutputFormat::Csv,
                        Some("json") => OutputFormat::Json,
                        Some(other) => return Err(r.err("format", format!("expected csv or json, got `{other}`"))),
                    };
                }
                "sweep" => {
                    if seen_sweep {
                        return Err(Error::Parse("only one [sweep] section is allowed".into()));
                    }
                    seen_sweep = true;
                    cfg.points = sweep_points(&mut r)?;
                }
                "constants" => {
                    let k = &mut cfg.constants;
                    k.rate = r.num_or("rate", k.rate)?;
                    k.delta = r.num_or("delta", k.delta)?;
                    if let Some(z) = r.list("z")? {
                        if z.len() != 5 {
                            return Err(r.err("z", "expected five constants"));
                        }
                        k.z.copy_from_slice(&z);
                    }
                    k.phi = r.num("phi")?;
                    k.c = r.num("c")?;
                }
                "dyson" => {
                    let potential = r.text("potential")?.ok_or_else(|| Error::Parse("[dyson] needs `potential`".into()))?;
                    let check = DysonCheck {
                        grid: count(&mut r, "grid", 64)?,
                        l: r.num_or("L", 20.0)?,
                        r: r.num_or("R", 2.0)?,
                        s: r.num_or("s", 4.0)?,
                        epsilon: r.num_or("eps", 0.3)?,
                        r0: r.num("R0")?,
                        a_tilde: r.num("a_tilde")?,
                        potential: PotentialSource::parse(&potential, base)?,
                        centers: centers_of(&mut r, "centers")?,
                        separated: r.flag("separated")?,
                    };
                    cfg.dyson.push(check);
                }
                "holes" => {
                    let check = HolesCheck {
                        grid: count(&mut r, "grid", 128)?,
                        l: r.num_or("L", 1.0)?,
                        r0: r.num("R0")?.ok_or_else(|| Error::Parse("[holes] needs `R0`".into()))?,
                        r: r.num("R")?.ok_or_else(|| Error::Parse("[holes] needs `R`".into()))?,
                        ctilde: r.num_or("ctilde", DEFAULT_CTILDE)?,
                        centers: centers_of(&mut r, "centers")?,
                    };
                    cfg.holes.push(check);
                }
                "toy" => {
                    if cfg.toy.is_some() {
                        return Err(Error::Parse("only one [toy] section is allowed".into()));
                    }
                    cfg.toy = Some(ToyCheck {
                        omega: r.list("omega")?.unwrap_or_else(|| vec![1.0]),
                        g: r.list("g")?.unwrap_or_else(|| vec![0.5]),
                        beta: r.list("beta")?.unwrap_or_else(|| vec![1.0]),
                        nmax: count(&mut r, "nmax", 12)?,
                        pinsker_draws: count(&mut r, "pinsker_draws", 0)?,
                        superadditivity_draws: count(&mut r, "superadditivity_draws", 0)?,
                    });
                }
                other => return Err(Error::Parse(format!("unknown section [{other}]"))),
            }
            r.finish()?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

fn sweep_points(r: &mut Reader<'_>) -> Result<Vec<SweepPoint>> {
    let sigma = r.list("sigma")?;
    let ln_sigma = r.list("ln_sigma")?;
    let beta_rho = r.list("beta_rho")?;
    let beta = r.list("beta")?;
    let rho = r.list("rho")?;
    let a = r.list("a")?;
    let lo = r.num_or("beta_rho_min", f64::NEG_INFINITY)?;
    let hi = r.num_or("beta_rho_max", f64::INFINITY)?;
    let mut pts = vec![];
    match (sigma, ln_sigma, beta_rho, beta, rho, a) {
        (s, ls, Some(br), None, None, None) if s.is_some() != ls.is_some() => {
            let sig: Vec<f64> = match (s, ls) {
                (Some(s), None) => s,
                (None, Some(ls)) => ls.iter().map(|l| l.exp()).collect(),
                _ => unreachable!(),
            };
            if sig.is_empty() || br.is_empty() {
                return Err(Error::Parse("[sweep] ranges must be nonempty".into()));
            }
            for &s in &sig {
                for &x in &br {
                    pts.push(SweepPoint { beta: x, rho: 1.0, sigma: s });
                }
            }
        }
        (None, None, None, Some(b), Some(rh), Some(aa)) => {
            if b.is_empty() || rh.is_empty() || aa.is_empty() {
                return Err(Error::Parse("[sweep] ranges must be nonempty".into()));
            }
            for &bb in &b {
                for &rr in &rh {
                    for &av in &aa {
                        pts.push(SweepPoint { beta: bb, rho: rr, sigma: (av * av * rr).ln().abs() });
                    }
                }
            }
        }
        _ => {
            return Err(Error::Parse(
                "[sweep] needs either `beta_rho` with one of `sigma`/`ln_sigma`, or all of `beta`, `rho`, `a`".into(),
            ))
        }
    }
    pts.retain(|p| {
        let x = p.beta * p.rho;
        x >= lo && x <= hi
    });
    Ok(pts)
}

/// Values computed for one sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowValues {
    pub regime: Regime,
    pub pc_sq_beta: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub o1_bound: f64,
    pub f0: f64,
    pub correction: f64,
    pub f_lower: f64,
    pub vacuous: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub beta_rho: f64,
    pub values: Option<RowValues>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub certified: bool,
    pub margin: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub seed: u64,
    pub rows: Vec<SweepRow>,
    pub checks: Vec<CheckResult>,
    /// Checks that could not be run, with the reason.
    pub check_errors: Vec<String>,
}

impl SweepReport {
    /// 0 when everything passes, 1 when a check fails, 2 on any input or domain error.
    pub fn exit_code(&self) -> i32 {
        if !self.check_errors.is_empty() || self.rows.iter().any(|r| r.error.is_some()) {
            2
        } else if self.checks.iter().any(|c| !c.certified) {
            1
        } else {
            0
        }
    }
}

fn evaluate_point(p: &SweepPoint, k: &BudgetConstants) -> SweepRow {
    let beta_rho = p.beta * p.rho;
    let result = ThermoPoint::with_sigma(p.beta, p.rho, p.sigma).and_then(|tp| lower_bound(&tp, k));
    match result {
        Ok(lb) => SweepRow {
            sigma: p.sigma,
            beta_rho,
            values: Some(RowValues {
                regime: lb.budget.regime,
                pc_sq_beta: lb.budget.pc_sq_beta,
                a1: lb.budget.a1,
                a2: lb.budget.a2,
                a3: lb.budget.a3,
                o1_bound: lb.budget.o1_bound,
                f0: lb.f0,
                correction: lb.correction,
                f_lower: lb.f_lower,
                vacuous: lb.budget.vacuous,
            }),
            error: None,
        },
        Err(e) => SweepRow { sigma: p.sigma, beta_rho, values: None, error: Some(e.to_string()) },
    }
}

/// Worker count from `BOSE2D_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse().ok()).filter(|&n: &usize| n > 0)
}

/// Run `f` on a pool capped by `BOSE2D_THREADS`.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match threads_from_env().and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Evaluate every point and check; rows keep input order.
pub fn run_sweep(cfg: &SweepConfig) -> SweepReport {
    with_pool(|| {
        let rows: Vec<SweepRow> = cfg.points.par_iter().map(|p| evaluate_point(p, &cfg.constants)).collect();
        let mut checks = vec![];
        let mut check_errors = vec![];
        let dyson: Vec<Result<CheckResult>> = cfg.dyson.par_iter().map(DysonCheck::run).collect();
        let holes: Vec<Result<CheckResult>> = cfg.holes.par_iter().map(HolesCheck::run).collect();
        for r in dyson.into_iter().chain(holes) {
            match r {
                Ok(c) => checks.push(c),
                Err(e) => check_errors.push(e.to_string()),
            }
        }
        if let Some(toy) = &cfg.toy {
            match toy.run(cfg.seed) {
                Ok(c) => checks.extend(c),
                Err(e) => check_errors.push(e.to_string()),
            }
        }
        SweepReport { seed: cfg.seed, rows, checks, check_errors }
    })
}

/// Seventeen significant digits.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn regime_name(r: Regime) -> &'static str {
    r.name()
}

pub fn render_csv(report: &SweepReport) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for row in &report.rows {
        match &row.values {
            Some(v) => {
                let cols = [v.pc_sq_beta, v.a1, v.a2, v.a3, v.o1_bound, v.f0, v.correction, v.f_lower];
                let _ = write!(s, "{},{},{}", fmt17(row.sigma), fmt17(row.beta_rho), regime_name(v.regime));
                for c in cols {
                    let _ = write!(s, ",{}", fmt17(c));
                }
                s.push('\n');
            }
            None => {
                let _ = writeln!(s, "{},{},error,,,,,,,,", fmt17(row.sigma), fmt17(row.beta_rho));
            }
        }
    }
    s
}

pub fn render_json(report: &SweepReport) -> String {
    serde_json::to_string_pretty(report).expect("report serialises") + "\n"
}

/// One line per check.
pub fn render_checks(report: &SweepReport) -> String {
    let mut s = String::new();
    for c in &report.checks {
        let _ = writeln!(s, "{} {} margin={} tol={}", if c.certified { "PASS" } else { "FAIL" }, c.name, fmt17(c.margin), fmt17(c.tolerance));
    }
    for e in &report.check_errors {
        let _ = writeln!(s, "ERROR {e}");
    }
    s
}

/// Write the configured outputs; returns what would go to stdout when no output path is set.
pub fn write_outputs(cfg: &SweepConfig, report: &SweepReport) -> Result<Option<String>> {
    let body = match cfg.format {
        OutputFormat::Csv => render_csv(report),
        OutputFormat::Json => render_json(report),
    };
    if let Some(p) = &cfg.report {
        std::fs::write(p, render_json(report))?;
    }
    match &cfg.output {
        Some(p) => {
            std::fs::write(p, body)?;
            Ok(None)
        }
        None => Ok(Some(body)),
    }
}
