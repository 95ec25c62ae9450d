use std::io::Write as _;
use std::path::{Path, PathBuf};

use varexp::criteria::{
    carleson_power_weight_check, curve_potential_weight_check, euclid_maximal_check, hardy_condition_check,
    muckenhoupt_classical, muckenhoupt_variable, potential_weight_check, rn_potential_two_weight_check,
    singular_power_weight_check, stein_weiss_check, theorem_a_check, theorem_b_check, theorem_c_check,
    CriterionVerdict,
};
use varexp::exponent::{hardy_class_check, log_holder_constant, ExponentDescriptor, ExponentField};
use varexp::harness::{refinement_study, write_report, ExperimentConfig, WeightSpec};
use varexp::lebesgue::{luxemburg_norm, weighted_norm};
use varexp::operators::{apply, OperatorSpec};
use varexp::space::io::{meta_path, save_curve, save_space};
use varexp::space::{carleson_check, dimension_report, doubling_constant, RadiusGrid};
use varexp::weight::{mo_indices, mo_indices_at_infinity, phi_class_check, psi_class_check, IndexPair, WeightModel};

use crate::error::{status_code, CliError};
use crate::inputs::{inline, BuiltSpace, FunctionSpec, Params, ProblemConfig, SpaceSpec};
use crate::manifest::{describe_files, now, sha256_hex, RunManifest};
use crate::output::{verdict_table, write_json, Format, Table};
use crate::{
    ApplyCmd, CheckCmd, Cli, Command, ExponentArgs, FunctionArgs, IndicesCmd, NormCmd, ParamArgs, SpaceArgs, SpaceCmd,
    WeightArgs,
};

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn say(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

/// What a command leaves behind for the manifest.
struct Done {
    files: Vec<PathBuf>,
    exit: u8,
    effective: String,
    seed: u64,
}

pub fn run(cli: &Cli) -> Result<u8, CliError> {
    let started = now();
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--workers: {e}")))?;
    }
    let config_text = match &cli.config {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?),
        None => None,
    };
    if let Command::Check(c) = &cli.command {
        // name errors come before any config or space work
        if c.criteria.iter().any(|n| n == "list") {
            say(&CRITERIA.iter().map(|(n, d)| format!("{n:<24}{d}\n")).collect::<String>());
            return Ok(0);
        }
        for name in &c.criteria {
            criterion(name)?;
        }
    }
    let out = cli.out.as_path();
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;

    let done = match &cli.command {
        Command::Experiment(_) => experiment(cli, config_text.as_deref(), out)?,
        cmd => {
            let mut cfg = match &config_text {
                Some(t) => ProblemConfig::from_toml(t)?,
                None => ProblemConfig::default(),
            };
            let ctx = Ctx { out, format: cli.format };
            let mut done = match cmd {
                Command::Space(c) => space_cmd(c, &mut cfg, &ctx)?,
                Command::Norm(c) => norm_cmd(c, &mut cfg, &ctx)?,
                Command::Indices(c) => indices_cmd(c, &mut cfg, &ctx)?,
                Command::Check(c) => check_cmd(c, &mut cfg, &ctx)?,
                Command::Apply(c) => apply_cmd(c, &mut cfg, &ctx)?,
                Command::Experiment(_) => unreachable!(),
            };
            done.seed = cli.seed.unwrap_or(0);
            done
        }
    };

    let manifest = RunManifest {
        command: command_name(&cli.command).into(),
        config_digest: sha256_hex(done.effective.as_bytes()),
        config_text,
        effective_config: done.effective,
        seed: done.seed,
        workers: cli.workers,
        version: env!("CARGO_PKG_VERSION").into(),
        started,
        finished: now(),
        files: describe_files(out, &done.files)?,
        exit_code: done.exit,
    };
    manifest.write(out)?;
    Ok(done.exit)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Space(_) => "space",
        Command::Norm(_) => "norm",
        Command::Indices(_) => "indices",
        Command::Check(_) => "check",
        Command::Apply(_) => "apply",
        Command::Experiment(_) => "experiment",
    }
}

struct Ctx<'a> {
    out: &'a Path,
    format: Format,
}

impl Ctx<'_> {
    /// Prints the table and writes it under `stem`.
    fn emit(&self, table: &Table, stem: &str, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
        say(&table.to_text());
        files.push(table.write(self.out, stem, self.format)?);
        Ok(())
    }

    fn emit_verdicts(&self, verdicts: &[CriterionVerdict], files: &mut Vec<PathBuf>) -> Result<(), CliError> {
        self.emit(&verdict_table(verdicts), "verdicts", files)?;
        files.push(write_json(self.out, "verdicts.json", &verdicts)?);
        Ok(())
    }
}

fn finish(cfg: &ProblemConfig, files: Vec<PathBuf>, exit: u8) -> Result<Done, CliError> {
    Ok(Done { files, exit, effective: cfg.to_toml()?, seed: 0 })
}

fn apply_space_args(a: &SpaceArgs, cfg: &mut ProblemConfig) {
    let kind = if a.circle.is_some() { Some(crate::inputs::SpaceKindArg::Curve) } else { a.kind };
    let mut spec = match (cfg.space.take(), kind) {
        (Some(s), Some(k)) if s.kind != k => SpaceSpec::new(k),
        (Some(s), _) => s,
        (None, Some(k)) => SpaceSpec::new(k),
        (None, None) => return,
    };
    if let Some(n) = a.circle.or(a.n) {
        spec.n = n;
    }
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = a.$f { spec.$f = v; })* };
    }
    set!(lo, hi, radius, x_min, ratio);
    spec.include_lo |= a.include_lo;
    if let Some(p) = &a.path {
        spec.path = Some(p.clone());
    }
    cfg.space = Some(spec);
}

fn apply_exponent_args(a: &ExponentArgs, cfg: &mut ProblemConfig) -> Result<(), CliError> {
    if let Some(p) = a.p {
        cfg.exponent = ExponentDescriptor::Constant { p };
    }
    if let Some(text) = &a.exponent {
        cfg.exponent = inline("exponent", text)?;
    }
    Ok(())
}

fn apply_weight_args(a: &WeightArgs, cfg: &mut ProblemConfig) -> Result<(), CliError> {
    if let Some(power) = a.power {
        cfg.weight = WeightSpec::power_at(a.node.clone(), power);
    }
    if let Some(text) = &a.weight {
        cfg.weight = inline("weight", text)?;
    }
    Ok(())
}

fn apply_param_args(a: &ParamArgs, p: &mut Params) {
    if a.alpha.is_some() {
        p.alpha = a.alpha;
    }
    if a.beta.is_some() {
        p.beta = a.beta;
    }
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = a.$f { p.$f = v; })* };
    }
    set!(ell, gamma0, gamma_inf, beta_inf);
}

fn apply_function_args(a: &FunctionArgs, cfg: &mut ProblemConfig) {
    if let Some(path) = &a.function {
        cfg.function = FunctionSpec::File { path: path.clone() };
    }
    if let Some(value) = a.constant {
        cfg.function = FunctionSpec::Constant { value };
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn space_cmd(c: &SpaceCmd, cfg: &mut ProblemConfig, ctx: &Ctx) -> Result<Done, CliError> {
    apply_space_args(&c.space, cfg);
    let built = cfg.space()?;
    let mut files = Vec::new();
    match &built.curve {
        Some(curve) => {
            let path = ctx.out.join("curve.csv");
            save_curve(curve, &path)?;
            files.push(path.clone());
            if meta_path(&path).exists() {
                files.push(meta_path(&path));
            }
        }
        None => {
            let path = ctx.out.join("space.csv");
            save_space(&built.space, &path)?;
            files.push(path.clone());
            files.push(meta_path(&path));
        }
    }
    let s = &built.space;
    let mut rows = vec![
        ("points".to_string(), s.len().to_string()),
        ("kind".into(), s.kind().as_str().into()),
        ("dim_hint".into(), s.dim_hint().to_string()),
        ("total_mass".into(), s.total_mass().to_string()),
    ];
    let mut exit = 0;
    if c.describe || built.curve.is_some() {
        let grid = RadiusGrid::for_space(s)?;
        if c.describe {
            rows.extend(describe_rows(&built, &grid)?);
        }
        if let Some(curve) = &built.curve {
            let v = carleson_check(curve, &grid);
            rows.push(("carleson_C".into(), fmt_opt(v.get("C_est"))));
            rows.push(("carleson_status".into(), v.status.as_str().into()));
            exit = status_code([v.status]);
        }
    }
    ctx.emit(&Table::pairs(rows), "describe", &mut files)?;
    finish(cfg, files, exit)
}

/// Probe points a quarter of the way in from each end and in the middle, where the
/// edge of a bounded grid does not distort the ball growth.
fn describe_rows(built: &BuiltSpace, grid: &RadiusGrid) -> Result<Vec<(String, String)>, CliError> {
    let s = &built.space;
    let n = s.len();
    let mut probes = if built.curve.is_some() { vec![0] } else { vec![n / 4, n / 2, (3 * n) / 4] };
    probes.dedup();
    let report = dimension_report(s, grid, &probes)?;
    let m_local = report.local.iter().map(|l| l.lower).fold(f64::INFINITY, f64::min);
    let big_m_local = report.local.iter().map(|l| l.upper).fold(f64::NEG_INFINITY, f64::max);
    let mut rows = vec![
        ("diameter".to_string(), s.diameter().to_string()),
        ("mesh".into(), s.mesh().to_string()),
        ("doubling_constant".into(), doubling_constant(s, grid)?.to_string()),
        ("m_local".into(), m_local.to_string()),
        ("M_local".into(), big_m_local.to_string()),
        ("m_uniform".into(), report.m_uniform.to_string()),
        ("probe_band".into(), format!("{} {}", report.band.0, report.band.1)),
    ];
    for l in &report.local {
        rows.push((format!("local_{}", l.point), format!("{} {}", l.lower, l.upper)));
    }
    if let Some(inf) = &report.at_infinity {
        rows.push(("m_infinity".into(), inf.lower.to_string()));
        rows.push(("M_infinity".into(), inf.upper.to_string()));
    }
    Ok(rows)
}

fn norm_cmd(c: &NormCmd, cfg: &mut ProblemConfig, ctx: &Ctx) -> Result<Done, CliError> {
    apply_space_args(&c.space, cfg);
    apply_exponent_args(&c.exponent, cfg)?;
    apply_weight_args(&c.weight, cfg)?;
    apply_function_args(&c.function, cfg);
    let built = cfg.space()?;
    let s = &built.space;
    let p = cfg.exponent.field(s)?;
    let f = cfg.function.sample(s)?;
    let weighted = !cfg.weight.nodes.is_empty() || cfg.weight.infinity.is_some();
    let r = if weighted { weighted_norm(&f, &cfg.weight.resolve(s)?, &p, s)? } else { luxemburg_norm(&f, &p, s)? };
    let rows = vec![
        ("norm".to_string(), r.value.to_string()),
        ("residual".into(), r.residual.to_string()),
        ("iterations".into(), r.iterations.to_string()),
        ("bracket_lo".into(), r.bracket.0.to_string()),
        ("bracket_hi".into(), r.bracket.1.to_string()),
        ("weighted".into(), weighted.to_string()),
        ("p_minus".into(), p.p_minus().to_string()),
        ("p_plus".into(), p.p_plus().to_string()),
    ];
    let mut files = Vec::new();
    ctx.emit(&Table::pairs(rows), "norm", &mut files)?;
    finish(cfg, files, 0)
}

fn index_row(at: &str, i: &IndexPair) -> Vec<String> {
    vec![
        at.into(),
        i.m.to_string(),
        i.big_m.to_string(),
        i.exact.to_string(),
        i.band.0.to_string(),
        i.band.1.to_string(),
        fmt_opt(i.shift),
    ]
}

fn indices_cmd(c: &IndicesCmd, cfg: &mut ProblemConfig, ctx: &Ctx) -> Result<Done, CliError> {
    if let Some(text) = &c.weight_model {
        cfg.weight_model = Some(inline("weight model", text)?);
    }
    apply_param_args(&c.params, &mut cfg.params);
    let w = weight_model(cfg)?;
    let ell = cfg.params.ell;
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(CliError::Data(format!("ℓ = {ell} must be positive and finite")));
    }
    let mut table = Table::new(&["at", "m", "M", "exact", "band_lo", "band_hi", "shift"]);
    table.push(index_row("zero", &mo_indices(w)?));
    table.push(index_row("infinity", &mo_indices_at_infinity(w)?));
    let mut files = Vec::new();
    ctx.emit(&table, "indices", &mut files)?;
    let mut exit = 0;
    if let (Some(alpha), Some(beta)) = (cfg.params.alpha, cfg.params.beta) {
        let verdicts = vec![phi_class_check(w, alpha, beta, ell)?, psi_class_check(w, alpha, beta, ell)?];
        ctx.emit_verdicts(&verdicts, &mut files)?;
        exit = status_code(verdicts.iter().map(|v| v.status));
    }
    finish(cfg, files, exit)
}

fn weight_model(cfg: &ProblemConfig) -> Result<&WeightModel, CliError> {
    cfg.weight_model
        .as_ref()
        .ok_or_else(|| CliError::Usage("no weight model: pass --weight-model or set weight_model".into()))
}

/// Criteria accepted by `check`, with what they need.
const CRITERIA: &[(&str, &str)] = &[
    ("theorem_a", "maximal operator, bounded doubling space, general weight"),
    ("theorem_b", "maximal operator, power-type weight nodes, bounded space"),
    ("theorem_c", "maximal operator, weight nodes plus a factor at infinity"),
    ("euclid_maximal", "maximal operator with the nominal dimension in place of m(μB)"),
    ("muckenhoupt", "variable-exponent Muckenhoupt condition"),
    ("muckenhoupt_classical", "classical Muckenhoupt condition (constant p)"),
    ("hardy_condition", "Hardy operators; needs --alpha or --beta"),
    ("carleson", "Carleson condition of a curve"),
    ("carleson_power_weight", "maximal operator on a curve; power weight nodes"),
    ("singular_power_weight", "singular integral; power weight nodes"),
    ("potential_weight", "potential operator; one weight node, needs --alpha"),
    ("stein_weiss", "potential operator; needs --alpha, --gamma0, --gamma-inf"),
    ("rn_potential_two_weight", "potential operator; node factor and factor at infinity, needs --alpha"),
    ("curve_potential_weight", "potential on a curve; power weight nodes, needs --alpha"),
    ("log_holder", "log-Hölder continuity of p"),
    ("hardy_class", "p in the Hardy-operator exponent class"),
    ("phi_class", "weight model in Φ; needs --weight-model, --alpha, --beta"),
    ("psi_class", "weight model in Ψ; needs --weight-model, --alpha, --beta"),
];

/// Canonical name for `name`, ignoring case, `_` and `-` so `theoremB` also works.
fn criterion(name: &str) -> Result<&'static str, CliError> {
    let key = |s: &str| s.chars().filter(|c| *c != '_' && *c != '-').collect::<String>().to_lowercase();
    CRITERIA.iter().map(|(n, _)| *n).find(|n| key(n) == key(name)).ok_or_else(|| {
        let names: Vec<&str> = CRITERIA.iter().map(|(n, _)| *n).collect();
        CliError::Usage(format!("unknown criterion {name:?}; available: {}", names.join(", ")))
    })
}

fn check_cmd(c: &CheckCmd, cfg: &mut ProblemConfig, ctx: &Ctx) -> Result<Done, CliError> {
    apply_space_args(&c.space, cfg);
    apply_exponent_args(&c.exponent, cfg)?;
    apply_weight_args(&c.weight, cfg)?;
    apply_param_args(&c.params, &mut cfg.params);
    if let Some(text) = &c.weight_model {
        cfg.weight_model = Some(inline("weight model", text)?);
    }
    if !c.criteria.is_empty() {
        cfg.criteria = c.criteria.clone();
    }
    if cfg.criteria.is_empty() {
        return Err(CliError::Usage("no criterion: pass --criterion NAME (or `--criterion list`)".into()));
    }
    let names = cfg.criteria.iter().map(|n| criterion(n)).collect::<Result<Vec<_>, _>>()?;
    let needs_space = names.iter().any(|n| !matches!(*n, "phi_class" | "psi_class"));
    let built = if needs_space { Some(cfg.space()?) } else { None };
    let mut verdicts = Vec::with_capacity(names.len());
    for name in names {
        verdicts.push(evaluate(name, cfg, built.as_ref())?);
    }
    let mut files = Vec::new();
    ctx.emit_verdicts(&verdicts, &mut files)?;
    finish(cfg, files, status_code(verdicts.iter().map(|v| v.status)))
}

fn need(x: Option<f64>, flag: &str, name: &str) -> Result<f64, CliError> {
    x.ok_or_else(|| CliError::Usage(format!("{name} needs {flag}")))
}

/// `(node, exponent)` pairs of a weight made only of power factors.
fn power_nodes(cfg: &ProblemConfig, built: &BuiltSpace, name: &str) -> Result<Vec<(usize, f64)>, CliError> {
    let w = cfg.weight.resolve(&built.space)?;
    w.nodes()
        .iter()
        .zip(w.factors())
        .map(|(&k, f)| match f {
            WeightModel::PowerLaw { a } => Ok((k, *a)),
            other => Err(CliError::Data(format!("{name} needs power_law node factors, got {other:?}"))),
        })
        .collect()
}

fn evaluate(name: &str, cfg: &ProblemConfig, built: Option<&BuiltSpace>) -> Result<CriterionVerdict, CliError> {
    let pr = &cfg.params;
    if let "phi_class" | "psi_class" = name {
        let w = weight_model(cfg)?;
        let (alpha, beta) = (need(pr.alpha, "--alpha", name)?, need(pr.beta, "--beta", name)?);
        return Ok(if name == "phi_class" {
            phi_class_check(w, alpha, beta, pr.ell)?
        } else {
            psi_class_check(w, alpha, beta, pr.ell)?
        });
    }
    let built = built.expect("space built for space criteria");
    let s = &built.space;
    let p: ExponentField = cfg.exponent.field(s)?;
    let curve = || built.curve.as_ref().ok_or_else(|| CliError::Usage(format!("{name} needs a curve space")));
    let v = match name {
        "theorem_a" => theorem_a_check(&cfg.weight.resolve(s)?, &p, s)?,
        "theorem_b" => theorem_b_check(&cfg.weight.resolve(s)?, &p, s)?,
        "theorem_c" => theorem_c_check(&cfg.weight.resolve(s)?, &p, s)?,
        "euclid_maximal" => euclid_maximal_check(&cfg.weight.resolve(s)?, &p, s)?,
        "muckenhoupt" => muckenhoupt_variable(&cfg.weight.resolve(s)?, &p, s, &RadiusGrid::for_space(s)?)?,
        "muckenhoupt_classical" => {
            if !p.is_constant() {
                return Err(CliError::Data("muckenhoupt_classical needs a constant exponent".into()));
            }
            muckenhoupt_classical(&cfg.weight.resolve(s)?, p.value(0), s, &RadiusGrid::for_space(s)?)?
        }
        "hardy_condition" => {
            if pr.alpha.is_none() && pr.beta.is_none() {
                return Err(CliError::Usage("hardy_condition needs --alpha or --beta".into()));
            }
            hardy_condition_check(pr.alpha, pr.beta, p.values(), s)?
        }
        "carleson" => carleson_check(curve()?, &RadiusGrid::for_space(s)?),
        "carleson_power_weight" => {
            carleson_power_weight_check(&power_nodes(cfg, built, name)?, pr.beta_inf, &p, curve()?)?
        }
        "singular_power_weight" => singular_power_weight_check(&power_nodes(cfg, built, name)?, pr.beta_inf, &p, s)?,
        "potential_weight" => {
            let w = cfg.weight.resolve(s)?;
            let (&[node], [factor]) = (w.nodes(), w.factors()) else {
                return Err(CliError::Usage("potential_weight needs exactly one weight node".into()));
            };
            let alpha = vec![need(pr.alpha, "--alpha", name)?; s.len()];
            potential_weight_check(factor, node, &alpha, &p, s)?
        }
        "stein_weiss" => stein_weiss_check(pr.gamma0, pr.gamma_inf, need(pr.alpha, "--alpha", name)?, &p, s)?,
        "rn_potential_two_weight" => {
            let (Some(w0), Some(winf)) = (cfg.weight.nodes.first(), cfg.weight.infinity.as_ref()) else {
                return Err(CliError::Usage(
                    "rn_potential_two_weight needs a node factor and an infinity factor".into(),
                ));
            };
            rn_potential_two_weight_check(&w0.factor, &winf.factor, need(pr.alpha, "--alpha", name)?, &p, s)?
        }
        "curve_potential_weight" => {
            let alpha = vec![need(pr.alpha, "--alpha", name)?; s.len()];
            curve_potential_weight_check(&power_nodes(cfg, built, name)?, &alpha, &p, curve()?)?
        }
        "log_holder" => log_holder_constant(&p, s)?.1,
        "hardy_class" => hardy_class_check(p.values(), s)?,
        other => unreachable!("criterion table covers {other}"),
    };
    Ok(v)
}

fn apply_cmd(c: &ApplyCmd, cfg: &mut ProblemConfig, ctx: &Ctx) -> Result<Done, CliError> {
    apply_space_args(&c.space, cfg);
    apply_function_args(&c.function, cfg);
    if let Some(text) = &c.operator {
        let text = text.trim();
        cfg.operator = Some(if text.starts_with('{') {
            inline("operator", text)?
        } else {
            inline("operator", &format!("{{ type = {text:?} }}"))?
        });
    }
    let op: &OperatorSpec =
        cfg.operator.as_ref().ok_or_else(|| CliError::Usage("no operator: pass --operator".into()))?;
    let built = cfg.space()?;
    let f = cfg.function.sample(&built.space)?;
    let g = apply(op, &f, built.domain())?;
    for note in op.notes() {
        eprintln!("note: {note}");
    }
    // the result is a function table `norm` and `apply` can read back, so always CSV
    let mut table = Table::new(&["id", "re", "im"]);
    for (i, v) in g.values().iter().enumerate() {
        table.push(vec![i.to_string(), v.re.to_string(), v.im.to_string()]);
    }
    let path = table.write(ctx.out, "function", Format::Csv)?;
    say(&format!("{} values written to {}\n", g.len(), path.display()));
    finish(cfg, vec![path], 0)
}

fn experiment(cli: &Cli, text: Option<&str>, out: &Path) -> Result<Done, CliError> {
    let text = text.ok_or_else(|| CliError::Usage("experiment needs --config PATH".into()))?;
    let mut cfg = ExperimentConfig::from_toml(text)?;
    if let Some(seed) = cli.seed {
        cfg.corpus.seed = seed;
    }
    let report = refinement_study(&cfg)?;
    let mut files = write_report(&report, out, cli.format.into())?;
    let mut table = Table::new(&["level", "points", "estimate"]);
    for (k, e) in report.estimates.iter().enumerate() {
        table.push(vec![k.to_string(), e.size.to_string(), e.value.to_string()]);
    }
    say(&table.to_text());
    say(&format!("outcome: {}\n", report.outcome().as_str()));
    let mut exit = 0;
    if let Some(v) = &report.verdict {
        say(&format!("{}: {}\n", v.name, v.status.as_str()));
        files.push(write_json(out, "verdict.json", v)?);
        exit = status_code([v.status]);
    }
    Ok(Done { files, exit, effective: cfg.to_toml()?, seed: cfg.corpus.seed })
}
