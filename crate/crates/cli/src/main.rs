use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use serde_json::{json, Value};
use symdesign::canon::{self, SearchLimits};
use symdesign::expand::{expand, BlockAction, ExpansionLimits, ExpansionProblem};
use symdesign::gfrank::{hamada_bound_check, p_rank, PrimeField};
use symdesign::io::{self, MatrixBundle};
use symdesign::orbmat::{check_orbit_matrix, tactical_decomposition};
use symdesign::reconstruct::Reconstruction;
use symdesign::report::compute_report;
use symdesign::{Error, IncidenceStructure, PermGroup};

#[derive(Parser)]
#[command(name = "symdesign", version, about = "Symmetric designs via orbit matrices")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Node budget for canonical labeling and expansion.
    #[arg(long, global = true, value_name = "N")]
    budget_nodes: Option<u64>,
    /// Wall-clock budget in seconds.
    #[arg(long, global = true, value_name = "N")]
    budget_seconds: Option<f64>,
    /// Prime for rank computations.
    #[arg(long, global = true, default_value_t = 2, value_name = "P")]
    p: u32,
    /// Write the main result to this path.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the 2-design axioms for every matrix in the files.
    Verify { paths: Vec<PathBuf> },
    /// Rank over GF(p) of every matrix, with the Hamada check for symmetric designs.
    Rank { path: PathBuf },
    /// Transpose every matrix.
    Dual { path: PathBuf },
    /// Automorphism group order; `--out` writes the point group as `.perms`.
    Aut { path: PathBuf },
    /// Isomorphism test between the first matrices of two files.
    Iso { a: PathBuf, b: PathBuf },
    /// Whether each matrix is isomorphic to its dual.
    Selfdual { path: PathBuf },
    /// Tactical decomposition of a design under a group of automorphisms.
    Decomp { design: PathBuf, group: PathBuf },
    /// Check the decomposition equations of an orbit matrix.
    Checkom { om: PathBuf },
    /// All designs, up to isomorphism, with a given orbit matrix and point group.
    Expand {
        om: PathBuf,
        group: PathBuf,
        #[arg(long, value_enum, default_value_t = Blocks::AnyStabilizer)]
        blocks: Blocks,
        /// Stop after this many solutions.
        #[arg(long)]
        max_solutions: Option<u64>,
    },
    /// Table of invariants for a bundle of symmetric designs.
    Report { bundle: PathBuf },
    /// Build the 176-point designs from the Golay code and write fixtures into `--out`.
    Reconstruct {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Blocks {
    Unrestricted,
    AnyStabilizer,
}

enum Outcome {
    Ok,
    False,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            e => Failure::Input(e.to_string()),
        }
    }
}

type Run = Result<Outcome, Failure>;

struct Ctx {
    json: bool,
    limits: SearchLimits,
    expansion: ExpansionLimits,
    p: u32,
    out: Option<PathBuf>,
}

impl Ctx {
    fn emit(&self, text: &str, value: Value) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(&value).expect("json"));
        } else if !text.is_empty() {
            println!("{text}");
        }
    }

    fn write_out(&self, contents: &str) -> Result<(), Failure> {
        if let Some(path) = &self.out {
            fs::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
        .and_then(|b| String::from_utf8(b).map_err(|_| Failure::Input(format!("{}: not UTF-8 text", path.display()))))
}

fn with_path<T>(path: &Path, r: symdesign::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| match Failure::from(e) {
        Failure::Input(m) => Failure::Input(format!("{}: {m}", path.display())),
        f => f,
    })
}

fn load_bundle(path: &Path) -> Result<MatrixBundle, Failure> {
    with_path(path, io::parse_matrix_text(&read(path)?))
}

fn load_group(path: &Path) -> Result<PermGroup, Failure> {
    with_path(path, io::parse_group(&read(path)?))
}

fn first(path: &Path) -> Result<IncidenceStructure, Failure> {
    Ok(load_bundle(path)?.structures.swap_remove(0))
}

fn verdict(all: bool) -> Outcome {
    if all {
        Outcome::Ok
    } else {
        Outcome::False
    }
}

fn verify(ctx: &Ctx, paths: &[PathBuf]) -> Run {
    if paths.is_empty() {
        return Err(Failure::Input("no input files".into()));
    }
    let mut lines = Vec::new();
    let mut items = Vec::new();
    let mut all = true;
    for path in paths {
        let bundle = load_bundle(path)?;
        for (i, s) in bundle.structures.iter().enumerate() {
            let name = format!("{}:{}", path.display(), bundle.name(i));
            match s.check_2design() {
                Ok(params) => {
                    let symmetric = params.is_symmetric() && with_path(path, s.is_symmetric())?;
                    let extra = if symmetric { ", symmetric" } else { "" };
                    lines.push(format!("{name}: {params}{extra}"));
                    items.push(json!({"name": name, "design": true, "v": params.v, "b": params.b,
                        "r": params.r, "k": params.k, "lambda": params.lambda, "symmetric": symmetric}));
                }
                Err(defect) => {
                    all = false;
                    lines.push(format!("{name}: not a 2-design ({defect})"));
                    items.push(json!({"name": name, "design": false, "defect": defect.to_string()}));
                }
            }
        }
    }
    ctx.emit(&lines.join("\n"), json!({"command": "verify", "results": items}));
    Ok(verdict(all))
}

fn rank(ctx: &Ctx, path: &Path) -> Run {
    let field = PrimeField::new(ctx.p)?;
    let bundle = load_bundle(path)?;
    let mut lines = Vec::new();
    let mut items = Vec::new();
    let mut all = true;
    for (i, s) in bundle.structures.iter().enumerate() {
        let r = p_rank(s, field);
        let hamada = match s.is_symmetric() {
            Ok(true) => Some(hamada_bound_check(s, field)?),
            _ => None,
        };
        all &= hamada != Some(false);
        let note = match hamada {
            Some(true) => ", Hamada check passed",
            Some(false) => ", Hamada check FAILED",
            None => "",
        };
        lines.push(format!("{}: {}-rank {r}{note}", bundle.name(i), ctx.p));
        items.push(json!({"name": bundle.name(i), "p": ctx.p, "rank": r, "hamada": hamada}));
    }
    ctx.emit(&lines.join("\n"), json!({"command": "rank", "results": items}));
    Ok(verdict(all))
}

fn dual(ctx: &Ctx, path: &Path) -> Run {
    let bundle = load_bundle(path)?;
    let duals = MatrixBundle::new(bundle.structures.iter().map(IncidenceStructure::dual).collect(), bundle.labels.clone())?;
    let text = io::serialize_bundle(&duals);
    ctx.write_out(&text)?;
    if ctx.out.is_none() || ctx.json {
        ctx.emit(text.trim_end(), json!({"command": "dual", "matrices": text}));
    }
    Ok(Outcome::Ok)
}

fn aut(ctx: &Ctx, path: &Path) -> Run {
    let s = first(path)?;
    let cf = canon::canonical_form_with(&s, ctx.limits)?;
    let group = cf.point_group();
    ctx.write_out(&io::serialize_group(&group))?;
    let gens: Vec<Vec<usize>> = group.generators().iter().map(|g| g.images().collect()).collect();
    ctx.emit(
        &format!("|Aut| = {} ({} generators, {} search nodes)", cf.aut_order, gens.len(), cf.nodes),
        json!({"command": "aut", "order": cf.aut_order.to_string(), "generators": gens, "nodes": cf.nodes}),
    );
    Ok(Outcome::Ok)
}

fn iso(ctx: &Ctx, a: &Path, b: &Path) -> Run {
    let (sa, sb) = (first(a)?, first(b)?);
    let witness = canon::are_isomorphic_with(&sa, &sb, ctx.limits)?;
    let (text, value) = match &witness {
        Some(w) => (
            "isomorphic".to_string(),
            json!({"command": "iso", "isomorphic": true,
                "points": w.points.images().collect::<Vec<_>>(),
                "blocks": w.blocks.images().collect::<Vec<_>>()}),
        ),
        None => ("non-isomorphic".to_string(), json!({"command": "iso", "isomorphic": false})),
    };
    ctx.emit(&text, value);
    Ok(verdict(witness.is_some()))
}

fn selfdual(ctx: &Ctx, path: &Path) -> Run {
    let bundle = load_bundle(path)?;
    let mut lines = Vec::new();
    let mut items = Vec::new();
    let mut all = true;
    for (i, s) in bundle.structures.iter().enumerate() {
        if s.v() != s.b() {
            return Err(Failure::Input(format!("{}: {} is not square", path.display(), bundle.name(i))));
        }
        let a = canon::canonical_form_with(s, ctx.limits)?.canonical_matrix;
        let b = canon::canonical_form_with(&s.dual(), ctx.limits)?.canonical_matrix;
        let yes = a == b;
        all &= yes;
        lines.push(format!("{}: {}", bundle.name(i), if yes { "self-dual" } else { "not self-dual" }));
        items.push(json!({"name": bundle.name(i), "self_dual": yes}));
    }
    ctx.emit(&lines.join("\n"), json!({"command": "selfdual", "results": items}));
    Ok(verdict(all))
}

fn decomp(ctx: &Ctx, design: &Path, group: &Path) -> Run {
    let s = first(design)?;
    let g = load_group(group)?;
    let td = with_path(design, tactical_decomposition(&s, &g))?;
    let text = io::serialize_orbit_matrix(&td.matrix);
    ctx.write_out(&text)?;
    ctx.emit(
        text.trim_end(),
        json!({"command": "decomp", "point_orbit_sizes": td.matrix.point_orbit_sizes,
            "block_orbit_sizes": td.matrix.block_orbit_sizes, "entries": td.matrix.entries}),
    );
    Ok(Outcome::Ok)
}

fn checkom(ctx: &Ctx, path: &Path) -> Run {
    let om = with_path(path, io::parse_orbit_matrix(&read(path)?))?;
    match check_orbit_matrix(&om) {
        Ok(()) => {
            ctx.emit("valid orbit matrix", json!({"command": "checkom", "valid": true}));
            Ok(Outcome::Ok)
        }
        Err(v) => {
            ctx.emit(
                &format!("invalid orbit matrix: {v}"),
                json!({"command": "checkom", "valid": false, "violation": v.to_string()}),
            );
            Ok(Outcome::False)
        }
    }
}

fn run_expand(ctx: &Ctx, om: &Path, group: &Path, blocks: Blocks, max_solutions: Option<u64>) -> Run {
    let matrix = with_path(om, io::parse_orbit_matrix(&read(om)?))?;
    let g = load_group(group)?;
    let mut problem = ExpansionProblem::new(matrix, g);
    problem.block_action = match blocks {
        Blocks::Unrestricted => BlockAction::Unrestricted,
        Blocks::AnyStabilizer => BlockAction::AnyStabilizer,
    };
    problem.limits = ctx.expansion;
    problem.limits.max_solutions = max_solutions;
    let res = expand(&problem)?;
    let labels = (1..=res.designs.len()).map(|i| Some(format!("solution {i}"))).collect();
    let bundle = MatrixBundle::new(res.designs.clone(), labels)?;
    ctx.write_out(&io::serialize_bundle(&bundle))?;
    let mut lines = vec![format!(
        "{} design(s) up to isomorphism, search {}",
        res.designs.len(),
        if res.exhausted { "complete" } else { "stopped by budget" }
    )];
    let mut orders = Vec::new();
    for (i, d) in res.designs.iter().enumerate() {
        let order = canon::canonical_form_with(d, ctx.limits)?.aut_order;
        lines.push(format!("solution {}: |Aut| = {order}", i + 1));
        orders.push(order.to_string());
    }
    let s = &res.stats;
    lines.push(format!(
        "nodes {}, leaves {}, duplicate leaves {}, candidates per row {:?}",
        s.nodes, s.leaves, s.dedup_hits, s.candidates
    ));
    ctx.emit(
        &lines.join("\n"),
        json!({"command": "expand", "designs": res.designs.len(), "exhausted": res.exhausted,
            "aut_orders": orders, "nodes": s.nodes, "leaves": s.leaves, "dedup_hits": s.dedup_hits,
            "candidates": s.candidates}),
    );
    if res.exhausted {
        Ok(Outcome::Ok)
    } else {
        Err(Failure::Budget("expansion budget exhausted before the search completed".into()))
    }
}

fn report(ctx: &Ctx, path: &Path) -> Run {
    let bundle = load_bundle(path)?;
    let r = compute_report(&bundle, ctx.limits)?;
    let value = serde_json::to_value(&r).expect("json");
    ctx.write_out(&format!("{}\n", serde_json::to_string_pretty(&value).expect("json")))?;
    ctx.emit(&r.to_string(), value);
    Ok(Outcome::Ok)
}

fn reconstruct(ctx: &Ctx, seed: u64) -> Run {
    let dir = ctx
        .out
        .clone()
        .ok_or_else(|| Failure::Input("reconstruct needs --out DIR".into()))?;
    fs::create_dir_all(&dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let rec = Reconstruction::compute(&mut rng)?;
    let write = |name: &str, text: String| -> Result<(), Failure> {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    };
    let labeled = rec.labeled();
    for (name, d) in &labeled {
        write(&format!("{name}.dmat"), io::serialize_structure(d))?;
    }
    write("d3.dmat", io::serialize_structure(&rec.d2.dual()))?;
    let bundle = MatrixBundle::new(
        labeled.iter().map(|(_, d)| (*d).clone()).collect(),
        labeled.iter().map(|(n, _)| Some(n.to_string())).collect(),
    )?;
    write("designs176.dmat", io::serialize_bundle(&bundle))?;
    for (name, om_name, d) in [("d1", "m1", &rec.d1), ("d2", "m2", &rec.d2)] {
        let group = canon::canonical_form(d)?.point_group();
        let om = tactical_decomposition(d, &group)?.matrix;
        write(&format!("aut_{name}.perms"), io::serialize_group(&group))?;
        write(&format!("{om_name}.om"), io::serialize_orbit_matrix(&om))?;
    }
    ctx.emit(
        &format!("wrote fixtures to {}", dir.display()),
        json!({"command": "reconstruct", "out": dir.display().to_string(), "seed": seed}),
    );
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut limits = SearchLimits::default();
    let mut expansion = ExpansionLimits::default();
    if let Some(n) = cli.budget_nodes {
        limits.max_nodes = n;
        expansion.max_nodes = n;
    }
    limits.max_seconds = cli.budget_seconds;
    expansion.max_seconds = cli.budget_seconds;
    expansion.canon = limits;
    let ctx = Ctx {
        json: cli.json,
        limits,
        expansion,
        p: cli.p,
        out: cli.out,
    };
    let result = match &cli.command {
        Command::Verify { paths } => verify(&ctx, paths),
        Command::Rank { path } => rank(&ctx, path),
        Command::Dual { path } => dual(&ctx, path),
        Command::Aut { path } => aut(&ctx, path),
        Command::Iso { a, b } => iso(&ctx, a, b),
        Command::Selfdual { path } => selfdual(&ctx, path),
        Command::Decomp { design, group } => decomp(&ctx, design, group),
        Command::Checkom { om } => checkom(&ctx, om),
        Command::Expand { om, group, blocks, max_solutions } => run_expand(&ctx, om, group, *blocks, *max_solutions),
        Command::Report { bundle } => report(&ctx, bundle),
        Command::Reconstruct { seed } => reconstruct(&ctx, *seed),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::False) => ExitCode::from(1),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("budget exhausted: {m}");
            ExitCode::from(3)
        }
    }
}
