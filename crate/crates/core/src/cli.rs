//! The `nhlab` command line: argument parsing, jobs, verdict records.
//!
//! Every subcommand prints a JSON verdict on stdout and, with `--out DIR`,
//! writes its artifacts there. Exit status is `0` when every check passed,
//! `1` when a mathematical check failed and `2` for usage or feasibility errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::character::{AswCharacter, CharacterSpec};
use crate::dwork::{local_np_oracle, OracleParams};
use crate::error::{Error, Result};
use crate::exactnum::Rational;
use crate::lfunction::{self, POINT_LIMIT};
use crate::polygon::{render_svg, SlopePolygon};
use crate::valmat;

pub const THREADS_ENV: &str = "NHLAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "nhlab", version, about = "Newton and Hodge polygons of Artin-Schreier-Witt L-functions")]
pub struct Cli {
    /// Worker threads for character sums
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Directory for CSV/SVG/listing artifacts
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// L-polynomial listing
    Lfunction(CharArgs),
    /// Newton and Hodge polygons as CSV and SVG
    Polygon(CharArgs),
    /// Local-to-global touching at slope r
    CheckTouching {
        #[command(flatten)]
        character: CharArgs,
        #[arg(long, default_value = "1")]
        r: String,
    },
    /// Whether NP = HP, observed and predicted
    CheckEquality(CharArgs),
    /// Local Newton polygon from a truncated Dwork operator
    DworkOracle {
        #[command(flatten)]
        character: CharArgs,
        #[arg(long, default_value = "1")]
        r: String,
        /// Basis size M'
        #[arg(long)]
        m_prime: Option<usize>,
        /// π-adic working precision N
        #[arg(long)]
        precision: Option<u64>,
    },
    /// Zeta function of the cover y^p - y = f
    ZetaCover(CharArgs),
    /// Seeded random valued-matrix suites
    PerturbSuite {
        #[arg(long, value_enum, default_value_t = Suite::Perturbation)]
        suite: Suite,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        size: usize,
        #[arg(long, default_value_t = 3)]
        p: u64,
        /// p-adic precision exponent
        #[arg(long, default_value_t = 20)]
        prec: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Perturbation,
    Hodge,
    Root,
}

/// A character given either as a TOML file or as `--p/--q/--f`.
#[derive(Args, Debug, Clone)]
pub struct CharArgs {
    /// TOML character spec (`p`, `n`, `q`, `witt = [...]`)
    #[arg(long, conflicts_with_all = ["p", "f"])]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub q: Option<u64>,
    /// Rational function in x (and a, a generator of F_q)
    #[arg(long)]
    pub f: Option<String>,
}

impl CharArgs {
    pub fn load(&self) -> Result<AswCharacter> {
        match (&self.spec, self.p, &self.f) {
            (Some(path), _, _) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
                CharacterSpec::from_toml(&text)?.build()
            }
            (None, Some(p), Some(f)) => AswCharacter::parse(p, self.q.unwrap_or(p as u64), f),
            _ => Err(Error::InvalidParameter("give either --spec FILE or both --p and --f".into())),
        }
    }
}

/// Machine-readable outcome of one job.
#[derive(Serialize, Debug, Default, Clone, PartialEq)]
pub struct Verdict {
    pub command: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub np_slopes: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hp_slopes: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub touching_global: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub touching_local: Option<BTreeMap<String, bool>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equality_predicted: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equality_observed: Option<bool>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, serde_json::Value>,
}

impl Verdict {
    fn new(command: &str) -> Self {
        Self { command: command.into(), passed: true, ..Default::default() }
    }

    fn polygons(mut self, np: &SlopePolygon, hp: &SlopePolygon) -> Self {
        self.np_slopes = Some(np.slope_strings());
        self.hp_slopes = Some(hp.slope_strings());
        self
    }

    fn detail(mut self, key: &str, v: impl Serialize) -> Self {
        self.details.insert(key.into(), serde_json::to_value(v).expect("serializable"));
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

fn parse_r(text: &str) -> Result<Rational> {
    text.trim().parse::<Rational>().map_err(|_| Error::Parse(format!("cannot parse r = {text:?} as a fraction")))
}

/// Rejects character-sum jobs whose enumeration would exceed the point limit.
pub fn estimate_cost(f: &AswCharacter) -> Result<u128> {
    let swan = f.swan_conductors()?;
    let d = swan.degree(0)?;
    let mut cost: u128 = 0;
    for k in 1..=d.max(1) {
        let qk = (f.q() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        cost = cost.saturating_add(qk);
    }
    if cost > POINT_LIMIT {
        return Err(Error::Infeasible { what: format!("L-function of degree {d} over F_{}", f.q()), cost, limit: POINT_LIMIT });
    }
    Ok(cost)
}

fn write_artifact(out: Option<&Path>, name: &str, contents: &str) -> Result<()> {
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Error::InvalidParameter(format!("cannot create {}: {e}", dir.display())))?;
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn write_polygons(out: Option<&Path>, np: &SlopePolygon, hp: &SlopePolygon) -> Result<()> {
    write_artifact(out, "np.csv", &np.to_csv())?;
    write_artifact(out, "hp.csv", &hp.to_csv())?;
    write_artifact(out, "polygons.svg", &render_svg(&[("NP", np), ("HP", hp)]))
}

/// Runs one parsed command.
pub fn run(cli: &Cli) -> Result<Verdict> {
    let out = cli.out.as_deref();
    let v = match &cli.command {
        Command::Lfunction(c) => {
            let f = c.load()?;
            estimate_cost(&f)?;
            let l = lfunction::l_polynomial(&f)?;
            let np = l.newton_polygon()?;
            let hp = lfunction::hodge_polygon(&f)?;
            write_artifact(out, "lpoly.txt", &format!("{}\n", l.display()))?;
            Verdict::new("lfunction")
                .polygons(&np, &hp)
                .detail("degree", l.degree())
                .detail("coefficients", l.coefficient_lists())
        }
        Command::Polygon(c) => {
            let f = c.load()?;
            estimate_cost(&f)?;
            let np = lfunction::l_polynomial(&f)?.newton_polygon()?;
            let hp = lfunction::hodge_polygon(&f)?;
            write_polygons(out, &np, &hp)?;
            let mut v = Verdict::new("polygon").polygons(&np, &hp);
            v.passed = np.lies_on_or_above(&hp)? && np.shares_terminal_point(&hp)?;
            v
        }
        Command::CheckTouching { character, r } => {
            let f = character.load()?;
            estimate_cost(&f)?;
            let r = parse_r(r)?;
            let rep = lfunction::check_touching(&f, &r)?;
            write_polygons(out, &rep.np, &rep.hp)?;
            let mut v = Verdict::new("check-touching").polygons(&rep.np, &rep.hp).detail("r", r.to_string());
            v.touching_global = Some(rep.global);
            v.touching_local = Some(rep.locals.iter().map(|l| (l.place.clone(), l.touching)).collect());
            v.passed = rep.theorem_consistent;
            v.detail("theorem_consistent", rep.theorem_consistent)
        }
        Command::CheckEquality(c) => {
            let f = c.load()?;
            estimate_cost(&f)?;
            let rep = lfunction::check_equality(&f)?;
            write_polygons(out, &rep.np, &rep.hp)?;
            let mut v = Verdict::new("check-equality").polygons(&rep.np, &rep.hp);
            v.equality_predicted = Some(rep.predicted);
            v.equality_observed = Some(rep.observed);
            v.passed = rep.predicted == rep.observed;
            v
        }
        Command::DworkOracle { character, r, m_prime, precision } => {
            let f = character.load()?;
            estimate_cost(&f)?;
            let r = parse_r(r)?;
            let terms = crate::dwork::polynomial_terms(&f)?;
            let d = terms.iter().map(|t| t.0).max().unwrap_or(1);
            let mut params = OracleParams::defaults(f.p(), d);
            if let Some(m) = m_prime {
                params.m_prime = *m;
            }
            if let Some(n) = precision {
                params.precision = *n;
            }
            let rep = local_np_oracle(&f, &r, params)?;
            let np = lfunction::l_polynomial(&f)?.newton_polygon()?.truncate_below(&r);
            write_polygons(out, rep.np(), &np)?;
            let mut v = Verdict::new("dwork-oracle")
                .detail("oracle_slopes", rep.np().slope_strings())
                .detail("character_sum_slopes", np.slope_strings())
                .detail("m_prime", params.m_prime)
                .detail("precision", params.precision)
                .detail("stabilized", rep.stabilized);
            v.np_slopes = Some(rep.np().slope_strings());
            v.passed = rep.stabilized && rep.np() == &np;
            v
        }
        Command::ZetaCover(c) => {
            let f = c.load()?;
            estimate_cost(&f)?;
            let z = lfunction::zeta_cover(&f)?;
            let listing: Vec<String> = z.factors.iter().map(|l| l.display()).collect();
            write_artifact(out, "lpoly.txt", &(listing.join("\n") + "\n"))?;
            let counts: Vec<(u32, String, String)> =
                z.point_counts.iter().map(|(k, a, b)| (*k, a.to_string(), b.to_string())).collect();
            let mut v = Verdict::new("zeta-cover")
                .detail("product", z.product.iter().map(|c| c.to_string()).collect::<Vec<_>>())
                .detail("point_counts", &counts);
            v.passed = z.point_counts.iter().all(|(_, a, b)| a == b);
            v
        }
        Command::PerturbSuite { suite, trials, seed, size, p, prec } => {
            let rep = match suite {
                Suite::Perturbation => valmat::perturbation_suite(*trials, *seed, *size, *p, *prec),
                Suite::Hodge => valmat::hodge_suite(*trials, *seed, *p, *prec),
                Suite::Root => valmat::root_suite(*trials, *seed, *p, *prec),
            };
            write_artifact(out, "suite.txt", &format!("{rep:#?}\n"))?;
            let mut v = Verdict::new("perturb-suite")
                .detail("suite", rep.name.clone())
                .detail("trials", rep.trials)
                .detail("passed_trials", rep.passed)
                .detail("nonvacuous", rep.nonvacuous)
                .detail("redrawn", rep.redrawn)
                .detail("failures", &rep.failures);
            v.passed = rep.all_passed();
            v
        }
    };
    Ok(v)
}

fn configure_threads(threads: Option<usize>) {
    if let Some(n) = threads.filter(|&n| n > 0) {
        // a second call in the same process keeps the existing pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Entry point shared by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    configure_threads(cli.threads);
    match run(&cli) {
        Ok(v) => {
            println!("{}", v.to_json());
            if v.passed {
                0
            } else {
                1
            }
        }
        Err(e @ (Error::BoundViolation(_) | Error::Stabilization(_))) => {
            eprintln!("check failed: {e}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<Verdict> {
        let cli = Cli::try_parse_from(std::iter::once("nhlab").chain(args.iter().copied())).unwrap();
        run(&cli)
    }

    #[test]
    fn equality_verdicts() {
        let v = run_args(&["check-equality", "--p", "5", "--f", "x^4"]).unwrap();
        assert_eq!((v.equality_predicted, v.equality_observed), (Some(true), Some(true)));
        let v = run_args(&["check-equality", "--p", "3", "--f", "x^5"]).unwrap();
        assert_eq!((v.equality_predicted, v.equality_observed), (Some(false), Some(false)));
        assert!(v.passed);
    }

    #[test]
    fn infeasible_jobs_are_rejected() {
        let e = run_args(&["lfunction", "--p", "7", "--f", "x^40"]).unwrap_err();
        assert!(matches!(e, Error::Infeasible { .. }), "{e}");
        assert_eq!(main_with_args(["nhlab", "lfunction", "--p", "7", "--f", "x^40"]), 2);
        assert_eq!(main_with_args(["nhlab", "lfunction", "--f", "x^4"]), 2);
        assert_eq!(main_with_args(["nhlab", "frobnicate"]), 2);
    }

    #[test]
    fn verdict_is_deterministic() {
        let a = run_args(&["check-touching", "--p", "5", "--f", "x^2 + x^-2"]).unwrap();
        let b = run_args(&["check-touching", "--p", "5", "--f", "x^2 + x^-2"]).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.touching_global, Some(true));
        assert_eq!(a.touching_local.unwrap().len(), 2);
    }
}
