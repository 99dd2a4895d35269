use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use srks::charpoly::{
    self, descend_with_trace, main_certificate, mixed_closed_form, mixed_enum, mixed_operator,
};
use srks::graphlab::{self, thin_tree_pipeline, PipelineOptions, WeightedGraph};
use srks::instances::random_instance;
use srks::maxent::{fit_lambda, BasisPolytopePoint};
use srks::measures::SubsetDistribution;
use srks::stablepoly::multiaffine::indices_of;
use srks::stablepoly::VectorSystem;
use srks::{Error, Result};

use crate::{Cli, Command, Global, Inputs};

pub struct Outcome {
    pub report: Value,
    /// Set when the run completed but a checked bound or identity failed.
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome {
            report,
            failure: None,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn load_dist(path: &Path) -> Result<SubsetDistribution> {
    SubsetDistribution::parse_json(&read(path)?)
}

fn load_vectors(path: &Path) -> Result<VectorSystem> {
    VectorSystem::parse(&read(path)?)
}

fn load_graph(path: &Path) -> Result<WeightedGraph> {
    WeightedGraph::parse(&read(path)?)
}

fn load_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, raw) in read(path)?.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    line: ln + 1,
                    msg: format!("bad number {t:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::VerifyIdentity {
            dist,
            vectors,
            random,
            m,
            d,
            trials,
        } => verify_identity(
            g,
            dist.as_deref(),
            vectors.as_deref(),
            *random,
            *m,
            *d,
            *trials,
        ),
        Command::Descend(inputs) => descend(g, inputs),
        Command::Certificate(inputs) => certificate(g, inputs),
        Command::Maxent {
            vectors,
            target,
            max_iter,
        } => maxent(g, vectors, target, *max_iter),
        Command::Thintree {
            graph,
            f,
            d,
            eps_target,
        } => thintree(g, graph, f.as_deref(), d.as_deref(), *eps_target),
        Command::Resistance { graph } => resistance(graph),
        Command::Ksr { vectors, r } => ksr(g, vectors, *r),
        Command::Sample { dist, count } => sample(g, dist, *count),
    }
}

fn identity_record(dist: &SubsetDistribution, vs: &VectorSystem) -> Result<(Value, bool)> {
    let reference = mixed_enum(dist, vs)?;
    let operator = charpoly::align(
        &charpoly::operator_side(dist, vs)?,
        reference.d_mu,
        reference.d,
    )?;
    let closed = charpoly::align(
        &charpoly::closed_form_side(dist, vs)?,
        reference.d_mu,
        reference.d,
    )?;
    let agree = operator == reference.poly && closed == reference.poly;
    let real_rooted = reference.is_real_rooted()?;
    Ok((
        json!({
            "m": vs.len(),
            "d": vs.dim(),
            "d_mu": reference.d_mu,
            "enumeration": reference.poly.to_string(),
            "operator": operator.to_string(),
            "closed_form": closed.to_string(),
            "agree": agree,
            "real_rooted": real_rooted,
            "max_root": reference.max_root,
        }),
        agree && real_rooted,
    ))
}

fn verify_identity(
    g: &Global,
    dist: Option<&Path>,
    vectors: Option<&Path>,
    random: bool,
    m: usize,
    d: usize,
    trials: usize,
) -> Result<Outcome> {
    let mut records = Vec::new();
    let mut all = true;
    if random {
        let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
        for _ in 0..trials {
            let inst = random_instance(m, d, &mut rng)?;
            let (mut rec, ok) = identity_record(&inst.dist, &inst.vectors)?;
            rec["kind"] = json!(inst.kind);
            records.push(rec);
            all &= ok;
        }
    } else {
        let (Some(dp), Some(vp)) = (dist, vectors) else {
            return Err(Error::InvalidInput(
                "give --dist and --vectors, or --random".into(),
            ));
        };
        let (dist, vs) = (load_dist(dp)?, load_vectors(vp)?);
        // the precondition checks run before any polynomial is built
        mixed_operator(&dist, &vs)?;
        mixed_closed_form(&dist, &vs)?;
        let (rec, ok) = identity_record(&dist, &vs)?;
        records.push(rec);
        all &= ok;
    }
    let report = json!({ "instances": records, "all_agree": all });
    Ok(Outcome {
        report,
        failure: (!all)
            .then(|| "identity or real-rootedness failed on at least one instance".to_string()),
    })
}

fn descend(g: &Global, inputs: &Inputs) -> Result<Outcome> {
    let (dist, vs) = (load_dist(&inputs.dist)?, load_vectors(&inputs.vectors)?);
    let trace = descend_with_trace(&dist, &vs, g.tol)?;
    let cert = charpoly::descend(&dist, &vs, g.tol)?;
    let norm_ok = cert.spectral_norm <= cert.bound + g.tol;
    let root_ok = cert.mixed_root <= cert.barrier_bound + g.tol;
    let report = json!({
        "certificate": cert,
        "trace": trace,
        "isotropic": vs.is_isotropic(),
        "bound_met": norm_ok && root_ok,
    });
    Ok(Outcome {
        report,
        failure: (!(norm_ok && root_ok))
            .then(|| "the descent output violates the bound".to_string()),
    })
}

fn certificate(g: &Global, inputs: &Inputs) -> Result<Outcome> {
    let (dist, vs) = (load_dist(&inputs.dist)?, load_vectors(&inputs.vectors)?);
    let cert = main_certificate(&dist, &vs, g.tol)?;
    Ok(Outcome::ok(
        json!({ "certificate": cert, "bound_met": true }),
    ))
}

fn maxent(g: &Global, vectors: &Path, target: &[f64], max_iter: usize) -> Result<Outcome> {
    let vs = load_vectors(vectors)?;
    let point = BasisPolytopePoint::new(target.to_vec(), vs.dim())?;
    let model = fit_lambda(&vs, &point, g.tol, max_iter)?;
    Ok(Outcome::ok(serde_json::to_value(&model)?))
}

fn thintree(
    g: &Global,
    graph: &Path,
    f: Option<&[usize]>,
    d: Option<&Path>,
    eps_target: f64,
) -> Result<Outcome> {
    let graph = load_graph(graph)?;
    let all = graph.all_edges()?;
    let f = match f {
        None => all,
        Some(idx) => {
            if let Some(&bad) = idx.iter().find(|&&i| i >= graph.m()) {
                return Err(Error::IndexOutOfRange {
                    index: bad,
                    len: graph.m(),
                });
            }
            idx.iter().fold(0u64, |m, &i| m | 1 << i)
        }
    };
    let d = d.map(load_matrix).transpose()?;
    let opts = PipelineOptions {
        eps_target,
        tol: g.tol,
        budget: g.budget,
        seed: g.seed,
        ..PipelineOptions::default()
    };
    let cert = thin_tree_pipeline(&graph, f, d.as_ref(), &opts)?;
    Ok(Outcome::ok(serde_json::to_value(&cert)?))
}

fn resistance(graph: &Path) -> Result<Outcome> {
    let graph = load_graph(graph)?;
    let values = graphlab::spectral::all_resistances(&graph)?;
    let edges: Vec<Value> = graph
        .edges()
        .iter()
        .zip(&values)
        .enumerate()
        .map(|(i, (e, r))| json!({ "edge": i, "u": e.u, "v": e.v, "w": e.w, "resistance": r }))
        .collect();
    let foster: f64 = graph
        .edges()
        .iter()
        .zip(&values)
        .map(|(e, r)| e.w * r)
        .sum();
    Ok(Outcome::ok(
        json!({ "n": graph.n(), "edges": edges, "foster_sum": foster }),
    ))
}

fn ksr(g: &Global, vectors: &Path, r: usize) -> Result<Outcome> {
    let vs = load_vectors(vectors)?;
    let partition = charpoly::ksr_partition(&vs, r, g.tol, g.budget)?;
    Ok(Outcome::ok(serde_json::to_value(&partition)?))
}

fn sample(g: &Global, dist: &Path, count: usize) -> Result<Outcome> {
    let dist = load_dist(dist)?;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let samples: Vec<Vec<usize>> = (0..count)
        .map(|_| indices_of(dist.sample(&mut rng)))
        .collect();
    Ok(Outcome::ok(json!({ "seed": g.seed, "samples": samples })))
}
