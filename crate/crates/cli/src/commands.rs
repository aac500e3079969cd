use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use chaoslab_core::bohr::{
    certify_bohr, check_certificate_value, default_input_sft, default_input_toral, verify_theorem1_hypotheses,
    BohrCertificate, BohrSystem, SignSequenceSpec, Theorem1Input,
};
use chaoslab_core::chain::{
    build_transition_graph, chain_components, graph_csv, graph_json, Discretized, ProximalOutcome, ProximalSearch,
    DEFAULT_M_MAX,
};
use chaoslab_core::dynamics::is_shadowed_by_orbit;
use chaoslab_core::horseshoe::{
    build_coding_map, default_horseshoe_input_sft, default_horseshoe_input_toral, special_points,
    theorem2_to_corollary1, HorseshoeInput, HorseshoeSystem, DEFAULT_CODING_BUDGET,
};
use chaoslab_core::registry::list_systems;
use chaoslab_core::toral::homoclinic_point_toral;
use chaoslab_core::{PseudoOrbit, Shadowing, SystemSpec, TorusPoint};

use crate::output::{emit, envelope, stamp, write_atomic};
use crate::parse::{real, real_list};

#[derive(Debug, Parser, Serialize)]
#[command(name = "chaoslab", version, about = "Shadowing, chain recurrence and Bohr-chaos certificates")]
pub struct Cli {
    /// Seed for every random choice made by the command.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// List built-in systems and any system definition files given.
    Systems(SystemsArgs),
    /// Shadow a pseudo-orbit (read from a file or drawn at random).
    Shadow(ShadowArgs),
    /// Box graph of δ-transitions and its chain components.
    ChainGraph(ChainGraphArgs),
    /// Search a chain-proximal pair.
    Proximal(ProximalArgs),
    /// Build a Bohr-chaos certificate.
    CertifyBohr(CertifyArgs),
    /// Re-check a certificate independently of the builder.
    CheckCert(CheckArgs),
    /// Coding map of the two-symbol horseshoe and its distinguished points.
    Horseshoe(HorseshoeArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SystemsArgs {
    /// System definition file (repeatable).
    #[arg(long = "file")]
    pub files: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ShadowArgs {
    #[arg(long)]
    pub system: String,
    /// Step bound of the random pseudo-orbit (ignored with --input).
    #[arg(long, default_value = "1/16")]
    pub delta: String,
    #[arg(long, default_value_t = 1000)]
    pub length: usize,
    /// Pseudo-orbit JSON to shadow instead of a random one.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Orbit trace `i,defect,distance`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ChainGraphArgs {
    #[arg(long)]
    pub system: String,
    /// Box side on the torus (`1/32`, `2^-5`, `0.03`), cylinder depth for shifts.
    #[arg(long)]
    pub resolution: String,
    #[arg(long)]
    pub delta: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `box_id,center_x,center_y,scc_id`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ProximalArgs {
    #[arg(long)]
    pub system: String,
    /// Comma-separated δ values; the witness holds for all of them.
    #[arg(long)]
    pub deltas: String,
    #[arg(long, default_value_t = DEFAULT_M_MAX)]
    pub m_max: usize,
    /// JSON array of candidate points (default: built-in candidates).
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CertifyArgs {
    #[arg(long, default_value = "fullshift2")]
    pub system: String,
    /// `homoclinic-default`, or a certificate-input JSON file.
    #[arg(long, default_value = "homoclinic-default")]
    pub pair: String,
    /// `constant_one`, `sparse_squares`, `periodic:1,0,-1`, `bernoulli:p=0.5,seed=7`.
    #[arg(long, default_value = "constant_one")]
    pub seq: String,
    #[arg(long, default_value_t = 1000)]
    pub n_max: usize,
    #[arg(long)]
    pub n_window: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Partial sums `n,weighted,checkpoint`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckArgs {
    pub file: PathBuf,
    /// Write the check report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct HorseshoeArgs {
    #[arg(long)]
    pub system: String,
    /// Coding radius W: codings have length 2W+1.
    #[arg(long, default_value_t = 4)]
    pub window: usize,
    #[arg(long, default_value_t = DEFAULT_CODING_BUDGET)]
    pub budget: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also certify Bohr chaos for the derived pair and write the certificate here.
    #[arg(long)]
    pub emit_bohr: Option<PathBuf>,
    #[arg(long, default_value = "constant_one")]
    pub seq: String,
    #[arg(long, default_value_t = 1000)]
    pub n_max: usize,
}

pub enum Outcome {
    Success,
    Negative(String),
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let params = serde_json::to_value(&cli)?;
    let params = json!({ "seed": cli.seed, "args": params["command"] });
    match &cli.command {
        Command::Systems(a) => systems(a, params),
        Command::Shadow(a) => shadow(a, cli.seed, params),
        Command::ChainGraph(a) => chain_graph(a, params),
        Command::Proximal(a) => proximal(a, params),
        Command::CertifyBohr(a) => certify(a, cli.seed, params),
        Command::CheckCert(a) => check_cert(a, params),
        Command::Horseshoe(a) => horseshoe(a, cli.seed, params),
    }
}

fn resolve(system: &str) -> Result<SystemSpec> {
    Ok(SystemSpec::resolve(system)?)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))
}

/// A Bernoulli sequence without an explicit seed takes the run seed.
fn sequence(s: &str, seed: u64) -> Result<SignSequenceSpec> {
    let s = s.trim();
    let text = if s.starts_with("bernoulli") && !s.contains("seed=") {
        format!("{s},seed={seed}")
    } else {
        s.to_string()
    };
    Ok(text.parse::<SignSequenceSpec>()?)
}

fn systems(a: &SystemsArgs, params: Value) -> Result<Outcome> {
    let files: Vec<&Path> = a.files.iter().map(PathBuf::as_path).collect();
    let list = list_systems(&files)?;
    for s in &list {
        eprintln!("{:<14} {:<6} {}", s.name, s.kind, s.description);
    }
    emit(a.out.as_deref(), &envelope("systems", params, serde_json::to_value(list)?))?;
    Ok(Outcome::Success)
}

fn shadow(a: &ShadowArgs, seed: u64, params: Value) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match resolve(&a.system)? {
        SystemSpec::Sft(sys) => {
            let po = match &a.input {
                Some(p) => read_pseudo_orbit(p)?,
                None => sys.random_pseudo_orbit(&mut rng, a.length, real(&a.delta)?)?,
            };
            shadow_report(&sys, &po, a, params)
        }
        SystemSpec::Toral(map) => {
            let po = match &a.input {
                Some(p) => read_pseudo_orbit(p)?,
                None => map.random_pseudo_orbit(&mut rng, a.length, real(&a.delta)?)?,
            };
            shadow_report(&map, &po, a, params)
        }
    }
}

/// A bare pseudo-orbit, or the output of an earlier `shadow` run.
fn read_pseudo_orbit<P: DeserializeOwned>(path: &Path) -> Result<PseudoOrbit<P>> {
    let mut v: Value = read_json(path)?;
    if let Some(po) = v.pointer_mut("/result/pseudo_orbit") {
        v = po.take();
    }
    serde_json::from_value(v).with_context(|| format!("{} is not a pseudo-orbit", path.display()))
}

fn shadow_report<S>(sys: &S, po: &PseudoOrbit<S::Point>, a: &ShadowArgs, params: Value) -> Result<Outcome>
where
    S: Shadowing,
    S::Point: Serialize,
{
    if po.system_id != sys.system_id() {
        bail!("pseudo-orbit belongs to '{}', not '{}'", po.system_id, sys.system_id());
    }
    let defects = po.defects(sys);
    let max_defect = defects.iter().copied().fold(0.0, f64::max);
    if max_defect > po.delta + sys.step_tolerance() {
        bail!("input is not a {}-pseudo-orbit (largest defect {max_defect})", po.delta);
    }
    let sh = sys.shadow(po)?;
    let dist: Vec<f64> = (po.i_min..=po.i_max())
        .map(|i| {
            let k = (i - sh.i_min) as usize;
            sys.distance(po.get(i).expect("in window"), &sh.orbit[k])
        })
        .collect();
    let max_distance = dist.iter().copied().fold(0.0, f64::max);
    let max_step_defect = sh
        .orbit
        .windows(2)
        .map(|w| sys.distance(&sys.forward(&w[0]), &w[1]))
        .fold(0.0, f64::max);
    let verified = is_shadowed_by_orbit(sys, po, &sh.orbit, sh.i_min, sh.certified_epsilon)
        && max_step_defect <= sys.step_tolerance();
    let result = json!({
        "pseudo_orbit": po,
        "max_defect": max_defect,
        "base": sh.base,
        "certified_epsilon": sh.certified_epsilon,
        "max_distance": max_distance,
        "orbit_max_step_defect": max_step_defect,
        "verified": verified,
    });
    emit(a.out.as_deref(), &envelope("shadow", params, result))?;
    if let Some(p) = &a.csv {
        let mut csv = String::from("i,defect,distance\n");
        for (t, d) in dist.iter().enumerate() {
            let defect = if t == 0 { 0.0 } else { defects[t - 1] };
            csv.push_str(&format!("{},{defect:.12e},{d:.12e}\n", po.i_min + t as i64));
        }
        write_atomic(p, csv.as_bytes())?;
    }
    if !verified {
        bail!("shadow failed its own verification (distance {max_distance}, step defect {max_step_defect})");
    }
    Ok(Outcome::Success)
}

fn chain_graph(a: &ChainGraphArgs, params: Value) -> Result<Outcome> {
    let resolution = real(&a.resolution)?;
    let delta = real(&a.delta)?;
    match resolve(&a.system)? {
        SystemSpec::Sft(sys) => graph_out(&sys, resolution, delta, a, params),
        SystemSpec::Toral(map) => graph_out(&map, resolution, delta, a, params),
    }
}

fn graph_out<S: Discretized>(sys: &S, resolution: f64, delta: f64, a: &ChainGraphArgs, params: Value) -> Result<Outcome> {
    let graph = build_transition_graph(sys, resolution, delta)?;
    let comps = chain_components(&graph);
    eprintln!(
        "{} boxes, {} edges, {} components ({} recurrent)",
        graph.num_boxes(),
        graph.num_edges(),
        comps.components.len(),
        comps.num_recurrent_components()
    );
    emit(a.out.as_deref(), &envelope("chain-graph", params, graph_json(&graph, &comps)))?;
    if let Some(p) = &a.csv {
        write_atomic(p, graph_csv(&graph, &comps).as_bytes())?;
    }
    Ok(Outcome::Success)
}

fn proximal(a: &ProximalArgs, params: Value) -> Result<Outcome> {
    let deltas = real_list(&a.deltas)?;
    match resolve(&a.system)? {
        SystemSpec::Sft(sys) => {
            let cands = match &a.candidates {
                Some(p) => read_json(p)?,
                None => sys.periodic_points(2),
            };
            proximal_out(&sys, &cands, &deltas, a, params)
        }
        SystemSpec::Toral(map) => {
            let cands = match &a.candidates {
                Some(p) => read_json(p)?,
                None => vec![TorusPoint::origin(), homoclinic_point_toral(&map, [1, 0])?],
            };
            proximal_out(&map, &cands, &deltas, a, params)
        }
    }
}

fn proximal_out<S>(sys: &S, cands: &[S::Point], deltas: &[f64], a: &ProximalArgs, params: Value) -> Result<Outcome>
where
    S: ProximalSearch,
    S::Point: Serialize,
{
    let outcome = sys.find_chain_proximal_pair(cands, deltas, a.m_max)?;
    emit(a.out.as_deref(), &envelope("proximal", params, serde_json::to_value(&outcome)?))?;
    Ok(match outcome {
        ProximalOutcome::Found { witness } => {
            eprintln!("chain-proximal pair found with m = {}", witness.m);
            Outcome::Success
        }
        ProximalOutcome::NoneFound { pairs_tried, m_max } => {
            Outcome::Negative(format!("no chain-proximal pair among {pairs_tried} pairs with m ≤ {m_max}"))
        }
    })
}

fn certify(a: &CertifyArgs, seed: u64, params: Value) -> Result<Outcome> {
    let seq = sequence(&a.seq, seed)?;
    match resolve(&a.system)? {
        SystemSpec::Sft(sys) => {
            let input = match a.pair.as_str() {
                "homoclinic-default" => default_input_sft(&sys, seq, a.n_max)?,
                path => file_input(Path::new(path), seq, a.n_max)?,
            };
            certify_out(&sys, input, a, params)
        }
        SystemSpec::Toral(map) => {
            let input = match a.pair.as_str() {
                "homoclinic-default" => default_input_toral(&map, seq, a.n_max)?,
                path => file_input(Path::new(path), seq, a.n_max)?,
            };
            certify_out(&map, input, a, params)
        }
    }
}

/// A stored input; the command-line sequence and horizon take precedence.
fn file_input<P: DeserializeOwned>(path: &Path, seq: SignSequenceSpec, n_max: usize) -> Result<Theorem1Input<P>> {
    let mut input: Theorem1Input<P> = read_json(path)?;
    input.sequence = seq;
    input.n_max = n_max;
    Ok(input)
}

fn certify_out<S>(sys: &S, mut input: Theorem1Input<S::Point>, a: &CertifyArgs, params: Value) -> Result<Outcome>
where
    S: BohrSystem,
    S::Point: Serialize + DeserializeOwned,
{
    if let Some(n) = a.n_window {
        input.n_window = n;
    }
    let cert = certify_bohr(sys, &input)?;
    write_certificate(&cert, a.out.as_deref(), a.csv.as_deref(), "certify-bohr", params)?;
    Ok(Outcome::Success)
}

fn write_certificate<P: Serialize>(
    cert: &BohrCertificate<P>,
    out: Option<&Path>,
    csv: Option<&Path>,
    command: &str,
    params: Value,
) -> Result<()> {
    eprintln!(
        "certificate: m = {}, r = {}, ε = {}, lower bound {}",
        cert.m, cert.r, cert.epsilon, cert.lower_bound
    );
    emit(out, &stamp(serde_json::to_value(cert)?, command, params))?;
    if let Some(p) = csv {
        let mut s = String::from("n,weighted,checkpoint\n");
        for row in &cert.partial_sums {
            s.push_str(&format!("{},{},{}\n", row.n, row.weighted, row.checkpoint));
        }
        write_atomic(p, s.as_bytes())?;
    }
    Ok(())
}

fn check_cert(a: &CheckArgs, params: Value) -> Result<Outcome> {
    let v: Value = read_json(&a.file)?;
    let report = check_certificate_value(&v).map_err(|e| anyhow!("{}: {e}", a.file.display()))?;
    if let Some(out) = &a.out {
        emit(Some(out), &envelope("check-cert", params, serde_json::to_value(&report)?))?;
    }
    if report.ok {
        eprintln!("certificate verified ({} rows)", report.rows_checked);
        return Ok(Outcome::Success);
    }
    for f in report.failures.iter().take(10) {
        eprintln!("  {f}");
    }
    Ok(Outcome::Negative(match report.first_failing_n {
        Some(n) => format!("certificate rejected; first failing n = {n}"),
        None => "certificate rejected".to_string(),
    }))
}

fn horseshoe(a: &HorseshoeArgs, seed: u64, params: Value) -> Result<Outcome> {
    let seq = sequence(&a.seq, seed)?;
    match resolve(&a.system)? {
        SystemSpec::Sft(sys) => {
            let input = default_horseshoe_input_sft(&sys)?;
            horseshoe_out(&sys, &input, seq, a, params)
        }
        SystemSpec::Toral(map) => {
            let input = default_horseshoe_input_toral(&map)?;
            horseshoe_out(&map, &input, seq, a, params)
        }
    }
}

fn horseshoe_out<S>(
    sys: &S,
    input: &HorseshoeInput<S::Point>,
    seq: SignSequenceSpec,
    a: &HorseshoeArgs,
    params: Value,
) -> Result<Outcome>
where
    S: HorseshoeSystem,
    S::Point: Serialize + DeserializeOwned,
{
    let map = build_coding_map(sys, input, a.window, a.budget)?;
    eprintln!(
        "{} codings, m = {}, ε = {}, checks {}",
        map.entries.len(),
        map.m,
        map.epsilon,
        if map.checks.all_passed() { "passed" } else { "FAILED" }
    );
    let mut result = json!({ "input": input, "coding_map": map });
    let mut derived = None;
    if a.window >= 2 {
        let sp = special_points(sys, input, a.window)?;
        let t1 = theorem2_to_corollary1(sys.system_id(), &sp, seq, a.n_max);
        let report = verify_theorem1_hypotheses(sys, &t1)?;
        result["special_points"] = serde_json::to_value(&sp)?;
        result["theorem1_input"] = serde_json::to_value(&t1)?;
        result["hypotheses"] = serde_json::to_value(&report)?;
        derived = Some((t1, report));
    }
    emit(a.out.as_deref(), &envelope("horseshoe", params.clone(), result))?;
    if !map.checks.all_passed() {
        return Ok(Outcome::Negative("coding-map checks failed".into()));
    }
    if let Some(path) = &a.emit_bohr {
        let Some((t1, report)) = derived else {
            bail!("--emit-bohr needs --window ≥ 2");
        };
        if let Some(err) = report.refusal() {
            return Err(err.into());
        }
        let cert = certify_bohr(sys, &t1)?;
        write_certificate(&cert, Some(path), None, "horseshoe", params)?;
    }
    Ok(Outcome::Success)
}
