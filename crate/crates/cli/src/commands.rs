use std::fmt::Write as _;
use std::path::Path;

use coalescent_core::classification::{classify, ClassificationConfig, CoalescentClass};
use coalescent_core::diagnostics::{probe_value, run_replicates, theorem1_report, Theorem1Verdict};
use coalescent_core::mmspace::UltrametricSpace;
use coalescent_core::rng::replicate_seed;
use coalescent_core::sim::{CoalescentHistory, SimConfig, Simulator};
use coalescent_core::LambdaMeasure;
use serde::Serialize;

use crate::config::{CommandKind, Format, RunConfig};
use crate::error::CliError;
use crate::manifest::{digest_file, FileDigest};

/// Everything a command produces, before anything is written.
pub struct Products {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: String,
    pub notes: Vec<String>,
    pub inputs: Vec<FileDigest>,
    /// Reported after the outputs are written.
    pub failure: Option<CliError>,
}

impl Products {
    fn new() -> Self {
        Self { files: Vec::new(), summary: String::new(), notes: Vec::new(), inputs: Vec::new(), failure: None }
    }

    fn note(&mut self, note: String) {
        if !self.notes.contains(&note) {
            self.notes.push(note);
        }
    }

    /// What to print when there is no output directory.
    pub fn stdout(&self, format: Format) -> Result<String, CliError> {
        let ext = match format {
            Format::Text => return Ok(self.summary.clone()),
            Format::Json => ".json",
            Format::Csv => ".csv",
        };
        let mut matching = self.files.iter().filter(|(name, _)| name.ends_with(ext));
        match (matching.next(), matching.next()) {
            (Some((_, bytes)), None) => Ok(String::from_utf8_lossy(bytes).into_owned()),
            (None, _) => Err(CliError::Usage(format!("this command has no {ext} output"))),
            (Some(_), Some(_)) => Err(CliError::Usage("several output files; pass --out DIR".into())),
        }
    }
}

pub fn execute(command: CommandKind, cfg: &RunConfig) -> Result<Products, CliError> {
    match command {
        CommandKind::Classify => cmd_classify(cfg),
        CommandKind::Simulate => cmd_simulate(cfg),
        CommandKind::Analyze => cmd_analyze(cfg),
        CommandKind::Report => cmd_report(cfg),
    }
}

fn parse_measure(cfg: &RunConfig) -> Result<LambdaMeasure, CliError> {
    Ok(cfg.measure.parse::<LambdaMeasure>()?)
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Validation(format!("serialize: {e}")))?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn cmd_classify(cfg: &RunConfig) -> Result<Products, CliError> {
    let measure = parse_measure(cfg)?;
    let ccfg = ClassificationConfig { b_max: cfg.bmax, ..ClassificationConfig::default() };
    let report = classify(&measure, &ccfg)?;
    let mut p = Products::new();
    p.files.push(("classification.json".into(), to_json(&report)?));
    let s = &mut p.summary;
    writeln!(s, "measure: {}", report.measure).unwrap();
    writeln!(s, "class: {}", report.class.as_str()).unwrap();
    for (name, v) in [("cdi series", &report.cdi_series), ("cdi psi", &report.cdi_psi), ("dust integral", &report.dust_free)]
    {
        writeln!(s, "{name}: {:?} ({})", v.verdict, v.note).unwrap();
    }
    for note in &report.notes {
        writeln!(s, "note: {note}").unwrap();
    }
    if report.class == CoalescentClass::Inconsistent {
        p.failure = Some(CliError::Inconsistent(format!("criteria disagree for {}: {}", report.measure, report.notes.join("; "))));
    }
    Ok(p)
}

fn history_csv(h: &CoalescentHistory) -> String {
    let mut out = String::from("time,new_block,merged\n");
    for e in &h.events {
        let merged: Vec<String> = e.merged.iter().map(|b| b.to_string()).collect();
        writeln!(out, "{},{},{}", e.time, e.new_block, merged.join(";")).unwrap();
    }
    out
}

fn single_n(cfg: &RunConfig) -> Result<usize, CliError> {
    match cfg.n.as_slice() {
        [n] => Ok(*n),
        _ => Err(CliError::Validation("simulate takes a single --n".into())),
    }
}

fn cmd_simulate(cfg: &RunConfig) -> Result<Products, CliError> {
    let measure = parse_measure(cfg)?;
    if cfg.replicates == 0 {
        return Err(CliError::Validation("replicates must be at least 1".into()));
    }
    let sim_cfg = SimConfig { n: single_n(cfg)?, horizon: cfg.horizon, seed: cfg.seed, scheme: cfg.scheme, x_min: cfg.x_min };
    let sim = Simulator::new(&measure, &sim_cfg)?;
    let mut p = Products::new();
    for r in 0..cfg.replicates {
        let seed = replicate_seed(cfg.seed, r as u64);
        let h = sim.run(seed)?;
        let name = format!("history_{r:04}");
        match cfg.format {
            Format::Csv => p.files.push((format!("{name}.csv"), history_csv(&h).into_bytes())),
            _ => p.files.push((format!("{name}.json"), format!("{}\n", h.to_json()?).into_bytes())),
        }
        writeln!(
            p.summary,
            "replicate {r}: seed {seed}, scheme {}, {} events, {} blocks left{}",
            h.scheme,
            h.events.len(),
            h.final_block_count(),
            h.absorption_time().map_or(String::new(), |t| format!(", absorbed at {t}")),
        )
        .unwrap();
        if h.metadata.kingman_superposition {
            p.note("kingman superposition engaged: the atom at 0 adds pairwise mergers at rate m per pair".into());
        }
        if h.metadata.missed_merger_bound > 0.0 {
            p.note(format!("poisson cutoff x_min = {:e}", h.metadata.x_min.unwrap_or(0.0)));
        }
        for note in &h.metadata.notes {
            p.note(note.clone());
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, Serialize)]
struct Row {
    replicate: usize,
    seed: u64,
    n: usize,
    statistic: &'static str,
    eps: Option<f64>,
    delta: Option<f64>,
    eta: Option<f64>,
    value: f64,
}

fn rows_csv(rows: &[Row]) -> String {
    let f = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    let mut out = String::from("replicate,seed,n,statistic,eps,delta,eta,value\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{},{},{},{}", r.replicate, r.seed, r.n, r.statistic, f(r.eps), f(r.delta), f(r.eta), r.value)
            .unwrap();
    }
    out
}

fn analyze_history(cfg: &RunConfig, path: &Path, p: &mut Products) -> Result<Vec<Row>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    p.inputs.push(FileDigest { path: path.display().to_string(), sha256: digest_file(path)? });
    let h = CoalescentHistory::from_json(&text)?;
    let tree = UltrametricSpace::from_history(&h);
    let traj = h.block_count_trajectory();
    let row = |statistic, eps, delta, eta, value| Row { replicate: 0, seed: h.seed, n: h.n, statistic, eps, delta, eta, value };
    let mut rows = Vec::new();
    if !tree.is_censored() {
        rows.push(row("tree_height", None, None, None, tree.tree_height()));
    }
    for &e in &cfg.eps_grid {
        rows.push(row("block_count", Some(e), None, None, traj.at(e) as f64));
        rows.push(row("xi", Some(e), None, None, tree.xi(e)? as f64));
        for &d in &cfg.thin_delta_grid {
            rows.push(row("thin_fraction", Some(e), Some(d), None, tree.thin_mass(e, d)?));
        }
    }
    for &d in &cfg.thin_delta_grid {
        rows.push(row("v_delta", None, Some(d), None, tree.v_delta(d)?));
        rows.push(row("v_tilde", None, Some(d), None, tree.v_tilde_delta(d)?));
    }
    for &d in &cfg.delta_grid {
        for &e in cfg.eta_grid.iter().filter(|&&e| e < d) {
            if tree.is_censored() && d >= h.horizon.unwrap_or(f64::INFINITY) {
                continue;
            }
            rows.push(row("probe_xi", None, Some(d), Some(e), probe_value(&tree, h.n, d, e) as f64));
        }
    }
    writeln!(p.summary, "history {}: n = {}, seed {}, {} statistics", path.display(), h.n, h.seed, rows.len()).unwrap();
    Ok(rows)
}

fn cmd_analyze(cfg: &RunConfig) -> Result<Products, CliError> {
    let mut p = Products::new();
    let rows = if let Some(path) = &cfg.input {
        analyze_history(cfg, path, &mut p)?
    } else {
        let measure = parse_measure(cfg)?;
        let study = cfg.study();
        let recs = run_replicates(&measure, &study)?;
        let pairs = study.probe_pairs();
        let mut rows = Vec::new();
        let mut violations = 0;
        for rec in &recs {
            let row = |n, statistic, eps, delta, eta, value| Row {
                replicate: rec.replicate,
                seed: rec.seed,
                n,
                statistic,
                eps,
                delta,
                eta,
                value,
            };
            for (ei, &e) in study.eps_grid.iter().enumerate() {
                rows.push(row(study.n_grid[study.n_grid.len() - 1], "block_count", Some(e), None, None, rec.block_counts[ei] as f64));
            }
            for (ni, &n) in study.n_grid.iter().enumerate() {
                for (ei, &e) in study.eps_grid.iter().enumerate() {
                    let xi = rec.xi[ni][ei];
                    violations += usize::from(xi > rec.block_counts[ei]);
                    rows.push(row(n, "xi", Some(e), None, None, xi as f64));
                    for (di, &d) in study.thin_delta_grid.iter().enumerate() {
                        rows.push(row(n, "thin_fraction", Some(e), Some(d), None, rec.thin_fraction[ni][ei][di]));
                    }
                }
                for (di, &d) in study.thin_delta_grid.iter().enumerate() {
                    rows.push(row(n, "v_tilde", None, Some(d), None, rec.v_tilde[ni][di]));
                }
                for (pi, &(d, e)) in pairs.iter().enumerate() {
                    rows.push(row(n, "probe_xi", None, Some(d), Some(e), rec.probe[ni][pi] as f64));
                }
            }
        }
        writeln!(p.summary, "{} replicates, {} statistics, {violations} violations of xi_eps <= N(eps)", recs.len(), rows.len())
            .unwrap();
        if violations > 0 {
            p.failure = Some(CliError::Inconsistent(format!("{violations} violations of xi_eps <= N(eps)")));
        }
        rows
    };
    p.files.push(("analyze.json".into(), to_json(&rows)?));
    p.files.push(("analyze.csv".into(), rows_csv(&rows).into_bytes()));
    Ok(p)
}

fn cmd_report(cfg: &RunConfig) -> Result<Products, CliError> {
    let measure = parse_measure(cfg)?;
    let report = theorem1_report(&measure, &cfg.study())?;
    let mut p = Products::new();
    p.files.push(("report.json".into(), format!("{}\n", report.to_json()?).into_bytes()));
    p.files.push(("report.csv".into(), report.to_csv().into_bytes()));
    let s = &mut p.summary;
    writeln!(s, "measure: {}", report.measure).unwrap();
    writeln!(s, "analytic class: {}", report.analytic_class.as_str()).unwrap();
    for c in &report.xi.cells {
        writeln!(s, "xi_eps  n={:<6} eps={:<6} median {:<8} iqr [{}, {}]", c.n, c.eps, c.xi.median, c.xi.q1, c.xi.q3).unwrap();
    }
    for t in &report.probe_trends {
        let ratios: Vec<String> = t.ratios.iter().map(|r| format!("{:.3}", r.ratio)).collect();
        writeln!(s, "probe   delta={} eta={} median ratios [{}]", t.delta, t.eta, ratios.join(", ")).unwrap();
    }
    writeln!(s, "verdict: {} ({})", report.verdict.as_str(), report.verdict_text).unwrap();
    for w in &report.warnings {
        writeln!(s, "warning: {w}").unwrap();
        p.notes.push(w.clone());
    }
    if report.verdict == Theorem1Verdict::Disagreement {
        p.failure = Some(CliError::Inconsistent(report.verdict_text.clone()));
    }
    Ok(p)
}
