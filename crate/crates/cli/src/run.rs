use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sprtree::dynamics::{run_chain, Observable};
use sprtree::io::{self, Meta};
use sprtree::metric::{d_ghwt_bounds, delta_ghwt, gh, WeightedSpace};
use sprtree::rtree::tree_from_excursion;
use sprtree::sampler::{replica_rng, sample_excursion};
use sprtree::verify::{self, FormulaId, Params};
use sprtree::{Excursion, WeightedTree};

use crate::args::*;

/// Stream of the initial tree; chains use the next one.
const INIT_STREAM: u64 = 0;
const CHAIN_STREAM: u64 = 1;

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::SampleCrt(a) => sample_crt(&a),
        Command::Chain(a) => chain(&a),
        Command::Verify(a) => verify_cmd(&a),
        Command::Dist(a) => dist(&a),
        Command::Path(p) => match p {
            PathCommand::Excise(a) => excise(&a),
            PathCommand::Insert(a) => insert(&a),
            PathCommand::Spr(a) => path_spr(&a),
        },
    }
}

fn meta_json(command: &str, config: &impl Serialize) -> Value {
    json!({
        "tool": "sprtree",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
    })
}

fn meta_lines(command: &str, config: &impl Serialize, seed: Option<u64>) -> Meta {
    let mut m = vec![
        ("tool".to_string(), "sprtree".to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("command".to_string(), command.to_string()),
    ];
    if let Some(s) = seed {
        m.push(("seed".to_string(), s.to_string()));
    }
    m.push((
        "config".to_string(),
        serde_json::to_string(config).expect("config serializes"),
    ));
    m
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_tree(path: &Path) -> Result<WeightedTree> {
    let (t, _) =
        io::tree_from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    Ok(t)
}

fn read_excursion(path: &Path) -> Result<Excursion> {
    let (e, _) = io::excursion_from_csv(&read(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(e)
}

fn sample_tree(s: &SamplerArgs) -> Result<(Excursion, WeightedTree)> {
    let cfg = s.config();
    let mut rng = replica_rng(cfg.seed, INIT_STREAM);
    let e = sample_excursion(&cfg, &mut rng)?;
    let t = tree_from_excursion(&e.scale_heights(2.0)?, cfg.weight_grid)?;
    Ok((e, t))
}

fn sample_crt(a: &SampleCrtArgs) -> Result<()> {
    let (e, t) = sample_tree(&a.sampler)?;
    if let Some(p) = &a.excursion {
        let meta = meta_lines("sample-crt", a, Some(a.sampler.seed));
        emit(Some(p), &io::excursion_to_csv(&e, &meta))?;
    }
    emit(
        a.out.as_deref(),
        &io::tree_to_json(&t, Some(meta_json("sample-crt", a))),
    )
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse::<T>()
                .map_err(|e| anyhow::anyhow!("bad {what} `{x}`: {e}"))
        })
        .collect()
}

fn chain(a: &ChainArgs) -> Result<()> {
    let t0 = if a.init == "crt" {
        sample_tree(&a.sampler)?.1
    } else {
        read_tree(Path::new(&a.init))?
    };
    let observables: BTreeSet<Observable> = parse_list(&a.observables, "observable")?
        .into_iter()
        .collect();
    let snaps: Vec<usize> = match &a.snapshots {
        Some(s) => parse_list(s, "snapshot index")?,
        None => Vec::new(),
    };
    let mut rng = replica_rng(a.sampler.seed, CHAIN_STREAM);
    let traj = run_chain(&t0, a.time, a.time_scale, &observables, &snaps, &mut rng)?;
    if let Some(dir) = &a.snapshot_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (i, t) in &traj.snapshots {
            let meta = json!({
                "tool": "sprtree",
                "version": env!("CARGO_PKG_VERSION"),
                "command": "chain",
                "config": a,
                "jump_index": i,
            });
            emit(
                Some(&dir.join(format!("snapshot_{i}.json"))),
                &io::tree_to_json(t, Some(meta)),
            )?;
        }
    }
    let meta = meta_lines("chain", a, Some(a.sampler.seed));
    emit(a.out.as_deref(), &io::chain_to_csv(&traj, &meta))
}

fn with_meta(report: impl Serialize, meta: Value) -> Result<String> {
    let mut v = serde_json::to_value(report)?;
    v.as_object_mut()
        .expect("reports are objects")
        .insert("meta".to_string(), meta);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

fn verify_cmd(a: &VerifyArgs) -> Result<()> {
    let cfg = a.sampler.config();
    let start = Instant::now();
    let mut v = match a.id.as_str() {
        "decomposition" => {
            let p0 = a.p0.unwrap_or(0.2);
            serde_json::to_value(verify::distribution_test(&cfg, p0, a.samples)?)?
        }
        "exchangeability" => serde_json::to_value(verify::exchangeability_test(
            &cfg, a.samples, a.rho_min, false,
        )?)?,
        id => {
            let id: FormulaId = id.parse()?;
            let params = Params {
                x: a.x,
                p: a.p,
                alpha: a.alpha,
                beta: a.beta,
                p0: a.p0,
            };
            serde_json::to_value(verify::mc_estimate(id, &params, &cfg, a.samples)?)?
        }
    };
    if a.timing {
        v["runtime_secs"] = json!(start.elapsed().as_secs_f64());
    }
    emit(a.json.as_deref(), &with_meta(v, meta_json("verify", a))?)
}

/// Net spacing: the finest `D / 2^k` keeping both nets within `max_points`.
fn choose_eps(ta: &WeightedTree, tb: &WeightedTree, max_points: usize) -> Result<f64> {
    let d = ta.diameter().max(tb.diameter());
    if !(d > 0.0) {
        return Ok(1.0);
    }
    let mut eps = d;
    let mut best = None;
    for _ in 0..30 {
        let na = ta.tree().eps_net(eps)?.len();
        let nb = tb.tree().eps_net(eps)?.len();
        if na.max(nb) > max_points {
            break;
        }
        best = Some(eps);
        eps /= 2.0;
    }
    best.ok_or_else(|| anyhow::anyhow!("--max-points {max_points} is below the coarsest net"))
}

fn dist(a: &DistArgs) -> Result<()> {
    let ta = read_tree(&a.a)?;
    let tb = read_tree(&a.b)?;
    let eps = match a.eps {
        Some(e) if e > 0.0 && e.is_finite() => e,
        Some(e) => bail!("--eps must be positive, got {e}"),
        None => choose_eps(&ta, &tb, a.max_points)?,
    };
    let xa = WeightedSpace::from_tree_net(&ta, eps)?;
    let xb = WeightedSpace::from_tree_net(&tb, eps)?;
    let mut v = match a.mode {
        DistMode::Gh => serde_json::to_value(gh(&xa.space, &xb.space, a.exact_limit)?)?,
        DistMode::DeltaGhwt => serde_json::to_value(delta_ghwt(&xa, &xb, a.exact_limit)?)?,
        DistMode::DGhwt => {
            let r = delta_ghwt(&xa, &xb, a.exact_limit)?;
            let (lo, hi) = d_ghwt_bounds(&r);
            json!({
                "lower": lo,
                "upper": hi,
                "exact": false,
                "witness": r.witness,
            })
        }
    };
    v["resolution"] = json!(eps);
    v["points"] = json!([xa.len(), xb.len()]);
    emit(a.json.as_deref(), &with_meta(v, meta_json("dist", a))?)
}

fn excise(a: &ExciseArgs) -> Result<()> {
    let e = read_excursion(&a.input)?;
    let gp = e.straddle(a.s, a.a)?;
    let (hat, check) = e.excise(&gp)?;
    let meta = meta_lines("path excise", a, None);
    emit(Some(&a.hat), &io::excursion_to_csv(&hat, &meta))?;
    emit(Some(&a.check), &io::excursion_to_csv(&check, &meta))
}

fn insert(a: &InsertArgs) -> Result<()> {
    let e1 = read_excursion(&a.first)?;
    let e2 = read_excursion(&a.second)?;
    let out = sprtree::insert(&e1, &e2, a.u, a.rho)?;
    let meta = meta_lines("path insert", a, None);
    emit(a.out.as_deref(), &io::excursion_to_csv(&out, &meta))
}

fn path_spr(a: &PathSprArgs) -> Result<()> {
    let e = read_excursion(&a.input)?;
    let gp = e.straddle(a.s, a.a)?;
    let out = e.path_spr(&gp, a.v)?;
    let meta = meta_lines("path spr", a, None);
    emit(a.out.as_deref(), &io::excursion_to_csv(&out, &meta))
}
