use crate::{Cli, Command, Format, Global, KindArg, Model, ParamArgs};
use serde::Serialize;
use serde_json::{json, Value};
use spidercert::bench::{gen_gnp, gen_regular, run_experiment, with_random_signs, to_csv, ExperimentConfig, Generator};
use spidercert::certifier::{certify, verify_certificate_with, CertKind, Certificate, ParamChoice, VerifyMode};
use spidercert::csp::{gen_csp, gen_weighted_xor, refute_predicate, refute_xor, Predicate, WeightDist};
use spidercert::feaspoint::{check_embeddability, cmm_point, feasible_floor, feasible_value, lb_arithmetic, Constraints};
use spidercert::graph::SignedGraph;
use spidercert::io::{self, CspJson, GraphJson, Instance, XorJson};
use spidercert::spider::{build_psi, build_spider, canonical_alpha, verify_psi_with};
use spidercert::Tolerances;
use std::fmt;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(spidercert::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        2
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<spidercert::Error> for CliError {
    fn from(e: spidercert::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

pub fn tolerances(g: &Global) -> CliResult<Tolerances> {
    let Some(spec) = &g.tol else { return Ok(Tolerances::default()) };
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| CliError::Usage(format!("tolerance {s:?} is not a number")));
    let t = match parts.as_slice() {
        [rel] => Tolerances::new(num(rel)?, Tolerances::default().abs),
        [rel, abs] => Tolerances::new(num(rel)?, num(abs)?),
        _ => return usage(format!("tolerance {spec:?} must be `rel` or `rel,abs`")),
    };
    if !(t.rel >= 0.0 && t.abs >= 0.0) {
        return usage("tolerances must be nonnegative");
    }
    Ok(t)
}

fn choice(p: &ParamArgs) -> CliResult<ParamChoice> {
    match (p.epsilon, p.k, p.ell) {
        (Some(e), None, None) => {
            if !(e > 0.0 && e < 1.0) {
                return usage(format!("--epsilon must lie in (0, 1), got {e}"));
            }
            Ok(ParamChoice::Epsilon(e))
        }
        (None, Some(k), Some(ell)) => Ok(ParamChoice::Explicit { k, ell }),
        _ => usage("give either --epsilon or both --k and --ell"),
    }
}

fn cert_kind(k: KindArg) -> CertKind {
    match k {
        KindArg::Maxcut => CertKind::MaxCut,
        KindArg::TwoXor => CertKind::TwoXor,
    }
}

struct Output<'a> {
    global: &'a Global,
    command: &'static str,
    started: Instant,
}

impl Output<'_> {
    fn text(&self, body: &str) -> CliResult<()> {
        match &self.global.output {
            Some(p) => std::fs::write(p, body).map_err(|e| CliError::Core(spidercert::Error::Io(format!("{}: {e}", p.display())))),
            None => {
                print!("{body}");
                Ok(())
            }
        }
    }

    fn json<T: Serialize>(&self, value: &T) -> CliResult<()> {
        if self.global.format == Format::Csv {
            return usage(format!("`{}` has JSON output only; CSV is available for `bench`", self.command));
        }
        let result = serde_json::to_value(value).expect("serializable");
        let doc = if self.global.no_meta {
            result
        } else {
            let unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            json!({
                "meta": {
                    "tool": "spidercert",
                    "version": env!("CARGO_PKG_VERSION"),
                    "command": self.command,
                    "seed": self.global.seed,
                    "unix_time": unix,
                    "elapsed_ms": self.started.elapsed().as_secs_f64() * 1e3,
                },
                "result": result,
            })
        };
        self.text(&(serde_json::to_string_pretty(&doc).expect("serializable") + "\n"))
    }
}

fn status(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn graph_constraints(inst: Instance) -> CliResult<Constraints> {
    Ok(match inst {
        Instance::Graph(g) => Constraints::from_graph(&g)?,
        Instance::Xor(x) => Constraints::from_xor(&x)?,
        Instance::Csp(_) => return usage("lowerbound needs a graph or a 2-XOR instance"),
    })
}

/// Accepts a bare certificate or one wrapped in the metadata envelope.
fn read_certificate(path: &std::path::Path) -> CliResult<Certificate> {
    let v: Value = io::read_json(path)?;
    let inner = match v.get("result") {
        Some(r) if v.get("meta").is_some() => r.clone(),
        _ => v,
    };
    serde_json::from_value(inner)
        .map_err(|e| CliError::Core(spidercert::Error::InvalidInstance(format!("{}: not a certificate: {e}", path.display()))))
}

pub fn run(cli: &Cli) -> CliResult<ExitCode> {
    let g = &cli.global;
    let tol = tolerances(g)?;
    let out = |command| Output { global: g, command, started: Instant::now() };
    match &cli.command {
        Command::Gen { model, n, degree, simple, arity, p, m, predicate, random_signs } => {
            let o = out("gen");
            let graph_out = |graph: SignedGraph| -> CliResult<ExitCode> {
                let graph = if *random_signs {
                    with_random_signs(&graph, g.seed)?
                } else {
                    graph
                };
                o.json(&GraphJson::from_graph(&graph))?;
                Ok(ExitCode::SUCCESS)
            };
            match model {
                Model::Gnp => {
                    let Some(d) = degree else { return usage("gnp needs --degree") };
                    graph_out(gen_gnp(*n, *d, g.seed)?)
                }
                Model::Regular => {
                    let Some(d) = degree else { return usage("regular needs --degree") };
                    if d.fract() != 0.0 || *d < 1.0 {
                        return usage("regular --degree must be a positive integer");
                    }
                    let r = gen_regular(*n, *d as usize, g.seed, *simple)?;
                    if let Some(w) = &r.warning {
                        eprintln!("warning: {w}");
                    }
                    graph_out(r.graph)
                }
                Model::Complete => graph_out(SignedGraph::complete(*n)?),
                Model::Cycle => graph_out(SignedGraph::cycle(*n)?),
                Model::Xor => {
                    let Some(k) = arity else { return usage("xor needs --arity") };
                    let dist = WeightDist::Rademacher { p: p.unwrap_or(1.0) };
                    let inst = gen_weighted_xor(*n, *k, &dist, g.seed)?;
                    o.json(&XorJson::from_instance(&inst, Some(g.seed)))?;
                    Ok(ExitCode::SUCCESS)
                }
                Model::Csp => {
                    let (Some(bits), Some(m)) = (predicate, m) else { return usage("csp needs --predicate and --m") };
                    let pred = Predicate::from_bits(bits)?;
                    if let Some(k) = arity {
                        if *k != pred.k {
                            return usage(format!("--arity {k} disagrees with predicate arity {}", pred.k));
                        }
                    }
                    let inst = gen_csp(*n, &pred, *m, g.seed)?;
                    o.json(&CspJson::from_instance(&inst, Some(g.seed)))?;
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Command::Certify { kind, params, input } => {
            let o = out("certify");
            let graph = io::read_graph(input)?;
            let cert = certify(&graph, cert_kind(*kind), choice(params)?)?;
            o.json(&cert)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyCert { input, cert, samples, test_vectors } => {
            let o = out("verify-cert");
            let graph = io::read_graph(input)?;
            let cert = read_certificate(cert)?;
            let mode = match samples {
                Some(s) => VerifyMode::Sampled { samples: *s, seed: g.seed, test_vectors: *test_vectors },
                None => VerifyMode::exhaustive(),
            };
            let report = verify_certificate_with(&cert, &graph, mode, &tol)?;
            o.json(&report)?;
            Ok(status(report.pass))
        }
        Command::RefuteXor { input, epsilon } => {
            let o = out("refute-xor");
            let inst = match io::read_instance(input)? {
                Instance::Xor(x) => x,
                _ => return usage("refute-xor needs an XOR instance"),
            };
            o.json(&refute_xor(&inst, *epsilon, g.seed)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::RefuteCsp { input, epsilon, delta } => {
            let o = out("refute-csp");
            let inst = match io::read_instance(input)? {
                Instance::Csp(c) => c,
                _ => return usage("refute-csp needs a CSP instance with a predicate"),
            };
            o.json(&refute_predicate(&inst, *epsilon, *delta, g.seed)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Lowerbound { rounds, input } => {
            let o = out("lowerbound");
            let c = graph_constraints(io::read_instance(input)?)?;
            let pm = cmm_point(&c, *rounds)?;
            let value = feasible_value(&pm);
            let floor = feasible_floor(*rounds);
            let embed = check_embeddability(&c, *rounds, g.seed)?;
            let (stated_r_form, proposition) = lb_arithmetic(*rounds);
            let pass = embed.pass && value >= floor - tol.abs;
            o.json(&json!({
                "rounds": rounds,
                "r": pm.r,
                "constraints": c.b.len(),
                "feasible_value": value,
                "floor": floor,
                "floor_r_form_stated": stated_r_form,
                "floor_proposition": proposition,
                "hypothesis": embed,
                "pass": pass,
            }))?;
            Ok(status(pass))
        }
        Command::Bench { config, model, n, degree, kind, params, seeds, lb_rounds, brute_cap, random_signs } => {
            let o = out("bench");
            let cfg: ExperimentConfig = match config {
                Some(path) => io::read_json(path)?,
                None => {
                    let (Some(model), Some(n)) = (model, n) else { return usage("bench needs --config or --model and --n") };
                    let generator = match model {
                        Model::Gnp => Generator::Gnp { n: *n, avg_degree: degree.ok_or(CliError::Usage("gnp needs --degree".into()))? },
                        Model::Regular => Generator::Regular {
                            n: *n,
                            degree: degree.ok_or(CliError::Usage("regular needs --degree".into()))? as usize,
                            simple: false,
                        },
                        Model::Complete => Generator::Complete { n: *n },
                        Model::Cycle => Generator::Cycle { n: *n },
                        Model::Xor | Model::Csp => return usage("bench runs graph models only"),
                    };
                    let c = choice(params)?;
                    let (epsilon, k, ell) = match c {
                        ParamChoice::Epsilon(e) => (Some(e), None, None),
                        ParamChoice::Explicit { k, ell } => (None, Some(k), Some(ell)),
                    };
                    ExperimentConfig {
                        generator,
                        kind: cert_kind(*kind),
                        epsilon,
                        k,
                        ell,
                        seeds: (g.seed..g.seed + seeds).collect(),
                        random_signs: *random_signs,
                        lb_rounds: *lb_rounds,
                        brute_cap: *brute_cap,
                        timings: !g.no_meta,
                    }
                }
            };
            let rows = run_experiment(&cfg);
            let violations = rows.iter().filter(|r| r.violation).count();
            match g.format {
                Format::Csv => o.text(&to_csv(&rows)?)?,
                Format::Json => o.json(&json!({ "config": cfg, "violations": violations, "rows": rows }))?,
            }
            Ok(status(violations == 0))
        }
        Command::SpiderCheck { k, ell, alpha } => {
            let o = out("spider-check");
            let alpha = alpha.unwrap_or_else(|| canonical_alpha(*k, *ell));
            let sm = build_psi(&build_spider(*k, *ell)?, alpha)?;
            let rep = verify_psi_with(&sm, &tol);
            let two_ell = 2 * ell;
            let mid = (2..two_ell).map(|d| rep.inner[d].abs()).fold(0.0, f64::max);
            o.json(&json!({
                "k": k,
                "ell": ell,
                "alpha": alpha,
                "inner_0": rep.inner[0],
                "inner_1": rep.inner[1],
                "inner_mid_max_abs": mid,
                "inner_2ell": rep.inner[two_ell],
                "min_eigenvalue": rep.min_eigenvalue,
                "pass": rep.pass,
                "report": rep,
            }))?;
            Ok(status(rep.pass))
        }
        Command::Selftest => {
            let o = out("selftest");
            let report = crate::selftest::run(&tol)?;
            let pass = report.pass;
            o.json(&report)?;
            Ok(status(pass))
        }
    }
}
