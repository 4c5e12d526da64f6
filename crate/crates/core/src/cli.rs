//! Command-line front end. Exit codes: 0 success, 1 usage error,
//! 2 assumption violation, 3 infeasible enumeration or metric computation.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bounds::{
    aux_inequalities_check, hellinger_affinity, model_selection_bound, phase_example_bounds,
    point_bound, posterior_set_bound, ring_bound, test_power_bound, BoundReport,
};
use crate::error::{Error, Result};
use crate::family::ModelFamily;
use crate::graph::Graph;
use crate::harness::{run_experiment, ExperimentConfig};
use crate::inference::{
    confidence_from_credible, enlarge, hpd_credible_set, odds_test, OddsErrorInputs,
};
use crate::labelling::Labelling;
use crate::posterior::exact_posterior;
use crate::prior::{Prior, PriorKind};
use crate::probs::EdgeProbs;
use crate::sbm::sample_graph;
use crate::sets::TargetSpec;

#[derive(Parser)]
#[command(
    name = "sbm-infer",
    version,
    about = "Bayesian inference for the planted multi-section block model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FamilyArgs {
    /// Vertex count.
    #[arg(long)]
    n: usize,
    /// Maximum class count for the windowed family construction.
    #[arg(long = "L", visible_alias = "l-max")]
    l_max: Option<usize>,
    /// Use the windowed family n/l +- n/(4 L^2).
    #[arg(long)]
    window: bool,
    /// Explicit size vector, repeatable: --sizes 4,4 --sizes 8
    #[arg(long, value_delimiter = ' ')]
    sizes: Vec<String>,
    /// Enumeration cap override.
    #[arg(long)]
    enum_cap: Option<usize>,
}

impl FamilyArgs {
    fn build(&self) -> Result<ModelFamily> {
        let fam = if !self.sizes.is_empty() {
            let mut vectors = Vec::new();
            for s in &self.sizes {
                let v: Vec<u32> = s
                    .split(',')
                    .filter(|t| !t.is_empty())
                    .map(|t| {
                        t.trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad size {t:?}")))
                    })
                    .collect::<Result<_>>()?;
                vectors.push(v);
            }
            ModelFamily::from_size_vectors(self.n, vectors)?
        } else if let Some(l) = self.l_max {
            if !self.window {
                return Err(Error::InvalidArgument(
                    "--L needs --window (or pass explicit --sizes)".into(),
                ));
            }
            ModelFamily::windowed(self.n, l)?
        } else {
            return Err(Error::InvalidArgument(
                "specify a family via --sizes or --L with --window".into(),
            ));
        };
        Ok(match self.enum_cap {
            Some(cap) => fam.with_enum_cap(cap),
            None => fam,
        })
    }
}

#[derive(Args, Clone)]
struct PriorArgs {
    /// Prior kind: flat-uniform or hierarchical-uniform.
    #[arg(long, default_value = "flat-uniform")]
    prior: String,
}

impl PriorArgs {
    fn build(&self, family: &ModelFamily) -> Result<Prior> {
        let kind = match self.prior.as_str() {
            "flat-uniform" | "flat" => PriorKind::FlatUniform,
            "hierarchical-uniform" | "hierarchical" => PriorKind::HierarchicalUniform,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown prior kind {other:?}"
                )))
            }
        };
        Prior::of_kind(kind, family)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph from the planted model and write its edge list.
    Simulate {
        /// True labelling, e.g. "1 1 2 2" or 1,1,2,2.
        #[arg(long)]
        theta0: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact posterior table as CSV (labelling, log_mass, mass).
    Posterior {
        /// Graph file (n=<int> header plus "i j" lines).
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        prior: PriorArgs,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a named theoretical bound; emits BoundReport JSON.
    Bounds {
        /// One of: hellinger, test-power, prop-postconvset, prop-model-select,
        /// prop-ring, cor-point, thm-odds, example-dense, example-ch, example-ks.
        #[arg(long)]
        name: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "L")]
        l_max: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        d: Option<f64>,
        /// Wrong class count for prop-model-select.
        #[arg(long)]
        ell: Option<usize>,
        /// Ring radius for prop-ring.
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        d1: Option<u64>,
        #[arg(long)]
        d2: Option<u64>,
        /// Set cardinality / prior mass / exponent for prop-postconvset.
        #[arg(long)]
        s_card: Option<f64>,
        #[arg(long)]
        s_prior_mass: Option<f64>,
        #[arg(long)]
        b_exponent: Option<f64>,
        #[arg(long)]
        theta0: Option<String>,
        #[arg(long)]
        window: bool,
        #[arg(long, value_delimiter = ' ')]
        sizes: Vec<String>,
        #[arg(long, default_value = "flat-uniform")]
        prior: String,
        /// Odds threshold and contraction inputs for thm-odds.
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        a_n: Option<f64>,
        #[arg(long)]
        b_n: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// HPD credible set, optional enlargement, and the confidence statement.
    Credible {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        prior: PriorArgs,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        alpha: f64,
        /// Enlargement radius.
        #[arg(long, default_value_t = 0)]
        k: u32,
        /// Contraction input x_n for the confidence statement.
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Posterior-odds test between two disjoint sets.
    Test {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        prior: PriorArgs,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        /// Null-hypothesis set, e.g. model:2.
        #[arg(long = "A")]
        set_a: String,
        /// Alternative set, e.g. model:1.
        #[arg(long = "B")]
        set_b: String,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// Centre for point/ring/ball sets.
        #[arg(long)]
        theta0: Option<String>,
        #[arg(long)]
        a_n: Option<f64>,
        #[arg(long)]
        b_n: Option<f64>,
        #[arg(long)]
        second_kind: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo verification experiment from a JSON config.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// List the labellings of a family, one per line.
    Enumerate {
        #[command(flatten)]
        family: FamilyArgs,
        /// Restrict to one class count.
        #[arg(long)]
        ell: Option<usize>,
    },
    /// Randomized check of the auxiliary inequalities.
    AuxCheck {
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn json_line<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn require<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidArgument(format!("missing --{name}")))
}

#[allow(clippy::too_many_arguments)]
fn run_bounds_command(
    name: &str,
    n: Option<usize>,
    l_max: Option<usize>,
    p: Option<f64>,
    q: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    d: Option<f64>,
    ell: Option<usize>,
    k: Option<u32>,
    d1: Option<u64>,
    d2: Option<u64>,
    s_card: Option<f64>,
    s_prior_mass: Option<f64>,
    b_exponent: Option<f64>,
    theta0: &Option<String>,
    window: bool,
    sizes: &[String],
    prior_kind: &str,
    r: Option<f64>,
    a_n: Option<f64>,
    b_n: Option<f64>,
) -> Result<Vec<BoundReport>> {
    let explicit_probs =
        || -> Result<EdgeProbs> { EdgeProbs::explicit(require(p, "p")?, require(q, "q")?) };
    let family_prior_theta = || -> Result<(Prior, Labelling, EdgeProbs)> {
        let fargs = FamilyArgs {
            n: require(n, "n")?,
            l_max,
            window,
            sizes: sizes.to_vec(),
            enum_cap: None,
        };
        let family = fargs.build()?;
        let prior = PriorArgs {
            prior: prior_kind.to_string(),
        }
        .build(&family)?;
        let theta0: Labelling = theta0
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("missing --theta0".into()))?
            .parse()?;
        Ok((prior, theta0, explicit_probs()?))
    };
    match name {
        "hellinger" => {
            let rho = hellinger_affinity(require(p, "p")?, require(q, "q")?)?;
            let mut report = BoundReport {
                name: "hellinger".into(),
                inputs: Default::default(),
                value: rho,
                log_value: rho.ln(),
                vacuous: false,
                assumptions_checked: vec![],
            };
            report.inputs.insert("p".into(), p.unwrap());
            report.inputs.insert("q".into(), q.unwrap());
            Ok(vec![report])
        }
        "test-power" => {
            let value = test_power_bound(
                require(d1, "d1")?,
                require(d2, "d2")?,
                require(p, "p")?,
                require(q, "q")?,
            )?;
            let mut report = BoundReport {
                name: "test-power".into(),
                inputs: Default::default(),
                value,
                log_value: value.ln(),
                vacuous: value >= 1.0,
                assumptions_checked: vec![],
            };
            report.inputs.insert("d1".into(), d1.unwrap() as f64);
            report.inputs.insert("d2".into(), d2.unwrap() as f64);
            Ok(vec![report])
        }
        "prop-postconvset" => {
            let (prior, theta0, probs) = family_prior_theta()?;
            Ok(vec![posterior_set_bound(
                &prior,
                &theta0,
                require(s_card, "s-card")?,
                require(s_prior_mass, "s-prior-mass")?,
                require(b_exponent, "b-exponent")?,
                &probs,
            )?])
        }
        "prop-model-select" => {
            let (prior, theta0, probs) = family_prior_theta()?;
            Ok(vec![model_selection_bound(
                &prior,
                &theta0,
                require(ell, "ell")?,
                &probs,
            )?])
        }
        "prop-ring" => {
            let (prior, theta0, probs) = family_prior_theta()?;
            Ok(vec![ring_bound(&prior, &theta0, require(k, "k")?, &probs)?])
        }
        "cor-point" => {
            let (prior, theta0, probs) = family_prior_theta()?;
            Ok(vec![point_bound(&prior, &theta0, &probs)?])
        }
        "thm-odds" => {
            let r = r.unwrap_or(1.0);
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::InvalidArgument("--r must be positive".into()));
            }
            let a_n = require(a_n, "a-n")?;
            let first = 2.0 * a_n * (1.0 + 1.0 / r);
            let mut report = BoundReport {
                name: "thm-odds".into(),
                inputs: Default::default(),
                value: first,
                log_value: first.max(f64::MIN_POSITIVE).ln(),
                vacuous: first >= 1.0,
                assumptions_checked: vec![],
            };
            report.inputs.insert("a_n".into(), a_n);
            report.inputs.insert("r".into(), r);
            let mut out = vec![report];
            if let Some(b_n) = b_n {
                let combined = 2.0 * a_n + 2.0 * b_n / r;
                let mut report = BoundReport {
                    name: "thm-odds-combined".into(),
                    inputs: Default::default(),
                    value: combined,
                    log_value: combined.max(f64::MIN_POSITIVE).ln(),
                    vacuous: combined >= 1.0,
                    assumptions_checked: vec![],
                };
                report.inputs.insert("a_n".into(), a_n);
                report.inputs.insert("b_n".into(), b_n);
                report.inputs.insert("r".into(), r);
                out.push(report);
            }
            Ok(out)
        }
        "example-dense" => {
            let probs = explicit_probs()?;
            phase_example_bounds(&probs, require(n, "n")?, require(l_max, "L")?)
        }
        "example-ch" => {
            let n = require(n, "n")?;
            let probs = EdgeProbs::chernoff_hellinger(n, require(a, "a")?, require(b, "b")?)?;
            phase_example_bounds(&probs, n, require(l_max, "L")?)
        }
        "example-ks" => {
            let n = require(n, "n")?;
            let probs = EdgeProbs::kesten_stigum(n, require(c, "c")?, require(d, "d")?)?;
            phase_example_bounds(&probs, n, require(l_max, "L")?)
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown bound name {other:?}"
        ))),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            theta0,
            p,
            q,
            seed,
            out,
        } => {
            let theta0: Labelling = theta0.parse()?;
            let probs = EdgeProbs::explicit(p, q)?;
            let graph = sample_graph(&theta0, &probs, seed);
            write_out(&out, &graph.to_text())
        }
        Command::Posterior {
            graph,
            family,
            prior,
            p,
            q,
            out,
        } => {
            let graph = Graph::from_text(&fs::read_to_string(graph)?)?;
            let family = family.build()?;
            let prior = prior.build(&family)?;
            let probs = EdgeProbs::explicit(p, q)?;
            let table = exact_posterior(&graph, &prior, &probs)?;
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            write_out(&out, &String::from_utf8(buf).expect("CSV is UTF-8"))
        }
        Command::Bounds {
            name,
            n,
            l_max,
            p,
            q,
            a,
            b,
            c,
            d,
            ell,
            k,
            d1,
            d2,
            s_card,
            s_prior_mass,
            b_exponent,
            theta0,
            window,
            sizes,
            prior,
            r,
            a_n,
            b_n,
            out,
        } => {
            let reports = run_bounds_command(
                &name,
                n,
                l_max,
                p,
                q,
                a,
                b,
                c,
                d,
                ell,
                k,
                d1,
                d2,
                s_card,
                s_prior_mass,
                b_exponent,
                &theta0,
                window,
                &sizes,
                &prior,
                r,
                a_n,
                b_n,
            )?;
            let text = if reports.len() == 1 {
                json_line(&reports[0])?
            } else {
                json_line(&reports)?
            };
            write_out(&out, &text)
        }
        Command::Credible {
            graph,
            family,
            prior,
            p,
            q,
            alpha,
            k,
            x,
            out,
        } => {
            let graph = Graph::from_text(&fs::read_to_string(graph)?)?;
            let family = family.build()?;
            let prior = prior.build(&family)?;
            let probs = EdgeProbs::explicit(p, q)?;
            let table = exact_posterior(&graph, &prior, &probs)?;
            let set = hpd_credible_set(&table, alpha)?;
            let enlarged = enlarge(&set, k, &family)?;
            let statement = match x {
                Some(x_n) => {
                    let mut s = confidence_from_credible(alpha, x_n, k)?;
                    s.set_size = Some(enlarged.len());
                    Some(s)
                }
                None => None,
            };
            let value = serde_json::json!({
                "credible_set": {
                    "members": set.members.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                    "level": set.level,
                    "attained_mass": set.attained_mass,
                    "construction": set.construction,
                },
                "enlargement_radius": k,
                "enlarged_members": enlarged.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                "confidence": statement,
            });
            write_out(&out, &json_line(&value)?)
        }
        Command::Test {
            graph,
            family,
            prior,
            p,
            q,
            set_a,
            set_b,
            r,
            theta0,
            a_n,
            b_n,
            second_kind,
            out,
        } => {
            let graph = Graph::from_text(&fs::read_to_string(graph)?)?;
            let family = family.build()?;
            let prior = prior.build(&family)?;
            let probs = EdgeProbs::explicit(p, q)?;
            let table = exact_posterior(&graph, &prior, &probs)?;
            let spec_a: TargetSpec = set_a.parse()?;
            let spec_b: TargetSpec = set_b.parse()?;
            let center: Option<Labelling> = match theta0 {
                Some(t) => Some(t.parse()?),
                None => None,
            };
            let resolve = |spec: &TargetSpec| -> Result<crate::sets::LabelSet> {
                if spec.needs_center() {
                    let c = center
                        .as_ref()
                        .ok_or_else(|| Error::InvalidArgument("set needs --theta0".into()))?;
                    Ok(spec.resolve(c))
                } else {
                    Ok(spec.resolve(&Labelling::single_class(family.n())))
                }
            };
            let decision = odds_test(
                &table,
                &resolve(&spec_a)?,
                &resolve(&spec_b)?,
                r,
                OddsErrorInputs {
                    a_n,
                    b_n,
                    second_kind,
                },
            )?;
            let value = serde_json::json!({
                "a": set_a,
                "b": set_b,
                "decision": if decision.reject_null { "reject-H0" } else { "accept-H0" },
                "record": decision,
            });
            write_out(&out, &json_line(&value)?)
        }
        Command::Verify { config, out, csv } => {
            let cfg: ExperimentConfig = serde_json::from_str(&fs::read_to_string(config)?)?;
            let started = std::time::Instant::now();
            let report = run_experiment(&cfg)?;
            eprintln!(
                "verify: {} rows, all_pass={}, runtime={:.3}s",
                report.rows.len(),
                report.all_pass(),
                started.elapsed().as_secs_f64()
            );
            if let Some(csv_path) = csv {
                fs::write(csv_path, report.to_csv())?;
            }
            write_out(&out, &report.to_json()?)
        }
        Command::Enumerate { family, ell } => {
            let family = family.build()?;
            let filter = match ell {
                Some(l) => crate::enumerate::ClassFilter::Exactly(l),
                None => crate::enumerate::ClassFilter::All,
            };
            let mut stdout = std::io::stdout().lock();
            for lab in crate::enumerate::enumerate_space(&family, filter)? {
                writeln!(stdout, "{lab}")?;
            }
            Ok(())
        }
        Command::AuxCheck { samples, seed } => {
            let reports = aux_inequalities_check(samples, seed);
            let ok = reports.iter().all(|r| r.pass());
            write_out(&None, &json_line(&reports)?)?;
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidArgument("auxiliary inequality failed".into()))
            }
        }
    }
}

/// Parse and execute; returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are successful exits
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
