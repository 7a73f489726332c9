//! Seeded grid experiments over `(n, m, phi, utility model)` cells. Each
//! record holds a mechanism's achieved ratio against the optimal
//! egalitarian value of a sampled profile.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};

use ordered_float::OrderedFloat;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::egal_lp::solve_oev;
use crate::error::{Error, Result};
use crate::gen::{sample_profile, UtilityModel};
use crate::mechanisms::{Mechanism, MechanismId, DEFAULT_RSD_CAP, RSD_HARD_CAP};
use crate::model::{egalitarian_value, ValuationProfile};

pub const DEFAULT_INSTANCES_PER_CELL: usize = 200;
pub const DEFAULT_RSD_MC_SAMPLES: u64 = 100_000;

pub const RECORD_HEADER: [&str; 10] = [
    "n",
    "m",
    "phi",
    "model",
    "mechanism",
    "instance_id",
    "seed",
    "ev",
    "oev",
    "aar",
];
pub const AGGREGATE_HEADER: [&str; 7] = ["n", "phi", "model", "mechanism", "min_aar", "mean_aar", "count"];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub agents: Vec<usize>,
    pub objects: Vec<usize>,
    pub phis: Vec<f64>,
    pub models: Vec<UtilityModel>,
    pub mechanisms: Vec<MechanismId>,
    pub instances_per_cell: usize,
    pub master_seed: u64,
    pub rsd_exact_cap: usize,
    pub rsd_mc_samples: u64,
    /// Where [`run_grid`] writes the record CSV, if anywhere.
    pub output_path: Option<PathBuf>,
    /// Where the CLI writes aggregated cells, if anywhere.
    pub aggregates_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    /// Full desk-scale grid: n, m in 2..=9, phi in 0.0..=1.0 by 0.1.
    fn default() -> Self {
        Self {
            agents: (2..=9).collect(),
            objects: (2..=9).collect(),
            phis: (0..=10).map(|k| k as f64 / 10.0).collect(),
            models: vec![UtilityModel::Borda, UtilityModel::Exponential],
            mechanisms: vec![MechanismId::Ps, MechanismId::RsdExact, MechanismId::Oeef],
            instances_per_cell: DEFAULT_INSTANCES_PER_CELL,
            master_seed: 0,
            rsd_exact_cap: DEFAULT_RSD_CAP,
            rsd_mc_samples: DEFAULT_RSD_MC_SAMPLES,
            output_path: None,
            aggregates_path: None,
        }
    }
}

fn parse_list<T>(key: &str, value: &str, parse: impl Fn(&str) -> Option<T>) -> std::result::Result<Vec<T>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(s).ok_or_else(|| format!("bad value `{s}` for `{key}`")))
        .collect()
}

impl ExperimentConfig {
    /// Parses flat `key = value` text (lists comma-separated, `#` comments).
    /// Keys not given keep their [`Default`] values.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::parse(origin, no + 1, msg);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "agents" => cfg.agents = parse_list(key, value, |s| s.parse().ok()).map_err(err)?,
                "objects" => cfg.objects = parse_list(key, value, |s| s.parse().ok()).map_err(err)?,
                "phis" => cfg.phis = parse_list(key, value, |s| s.parse().ok()).map_err(err)?,
                "models" => cfg.models = parse_list(key, value, |s| s.parse().ok()).map_err(err)?,
                "mechanisms" => cfg.mechanisms = parse_list(key, value, |s| s.parse().ok()).map_err(err)?,
                "instances_per_cell" => {
                    cfg.instances_per_cell = value.parse().map_err(|_| err(format!("bad count `{value}`")))?
                }
                "master_seed" => cfg.master_seed = value.parse().map_err(|_| err(format!("bad seed `{value}`")))?,
                "rsd_exact_cap" => cfg.rsd_exact_cap = value.parse().map_err(|_| err(format!("bad cap `{value}`")))?,
                "rsd_mc_samples" => {
                    cfg.rsd_mc_samples = value.parse().map_err(|_| err(format!("bad count `{value}`")))?
                }
                "output" => cfg.output_path = Some(PathBuf::from(value)),
                "aggregates" => cfg.aggregates_path = Some(PathBuf::from(value)),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if self.agents.is_empty() || self.objects.is_empty() || self.phis.is_empty() {
            return bad("agents, objects and phis must be nonempty");
        }
        if self.models.is_empty() || self.mechanisms.is_empty() {
            return bad("models and mechanisms must be nonempty");
        }
        if self.agents.iter().chain(&self.objects).any(|&k| k < 2) {
            return bad("agent and object counts must be at least 2");
        }
        if self.phis.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("dispersion values must lie in [0, 1]");
        }
        if self.instances_per_cell == 0 {
            return bad("instances_per_cell must be at least 1");
        }
        if self.rsd_exact_cap > RSD_HARD_CAP {
            return bad("rsd_exact_cap exceeds the hard cap of 9");
        }
        if self.rsd_mc_samples == 0 {
            return bad("rsd_mc_samples must be at least 1");
        }
        Ok(())
    }

    /// Number of `(n, m, phi, model)` cells.
    pub fn cell_count(&self) -> usize {
        self.agents.len() * self.objects.len() * self.phis.len() * self.models.len()
    }
}

/// Seed for instance `instance` of ordinal cell `cell`: the first output word
/// of the ChaCha8 stream `cell` at counter `instance`, keyed by the master
/// seed. Utility models share ordinal cells, so they see the same rankings.
pub fn instance_seed(master_seed: u64, cell: u64, instance: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(cell);
    rng.set_word_pos(u128::from(instance) * 2);
    rng.next_u64()
}

/// One sampled instance of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    /// Position of the `(n, m, phi, model)` cell in grid order.
    pub cell: usize,
    pub n: usize,
    pub m: usize,
    pub phi: f64,
    pub model: UtilityModel,
    pub instance_id: usize,
    pub seed: u64,
}

impl Instance {
    pub fn profile(&self) -> Result<ValuationProfile<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        sample_profile(self.n, self.m, self.phi, self.model, &mut rng)
    }
}

/// Every instance of the grid, in `(n, m, phi, model, instance)` order.
pub fn instances(cfg: &ExperimentConfig) -> Vec<Instance> {
    let mut out = Vec::with_capacity(cfg.cell_count() * cfg.instances_per_cell);
    let mut cell = 0;
    let mut ordinal_cell = 0u64;
    for &n in &cfg.agents {
        for &m in &cfg.objects {
            for &phi in &cfg.phis {
                for &model in &cfg.models {
                    for instance_id in 0..cfg.instances_per_cell {
                        let seed = instance_seed(cfg.master_seed, ordinal_cell, instance_id as u64);
                        out.push(Instance {
                            cell,
                            n,
                            m,
                            phi,
                            model,
                            instance_id,
                            seed,
                        });
                    }
                    cell += 1;
                }
                ordinal_cell += 1;
            }
        }
    }
    out
}

/// Rounds to 12 significant decimal digits, the precision persisted in CSV.
pub fn round_sig12(x: f64) -> f64 {
    format_sig12(x).parse().expect("formatted float parses")
}

/// `%.12g`-style formatting.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..12).contains(&exp) {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{exp}");
    }
    let decimals = (11 - exp).max(0) as usize;
    let fixed = format!("{x:.decimals$}");
    if fixed.contains('.') {
        fixed.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        fixed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub n: usize,
    pub m: usize,
    pub phi: f64,
    pub model: UtilityModel,
    pub mechanism: MechanismId,
    pub instance_id: usize,
    pub seed: u64,
    pub ev: f64,
    pub oev: f64,
    pub aar: f64,
}

impl ExperimentRecord {
    /// Builds a record with floats held at persisted precision.
    pub fn new(inst: &Instance, mechanism: MechanismId, ev: f64, oev: f64) -> Self {
        Self {
            n: inst.n,
            m: inst.m,
            phi: round_sig12(inst.phi),
            model: inst.model,
            mechanism,
            instance_id: inst.instance_id,
            seed: inst.seed,
            ev: round_sig12(ev),
            oev: round_sig12(oev),
            aar: round_sig12(ev / oev),
        }
    }

    fn fields(&self) -> [String; 10] {
        [
            self.n.to_string(),
            self.m.to_string(),
            format_sig12(self.phi),
            self.model.to_string(),
            self.mechanism.to_string(),
            self.instance_id.to_string(),
            self.seed.to_string(),
            format_sig12(self.ev),
            format_sig12(self.oev),
            format_sig12(self.aar),
        ]
    }
}

fn resolve(cfg: &ExperimentConfig, id: MechanismId, inst: &Instance) -> Mechanism {
    let sampled = || Mechanism::RsdSampled {
        samples: cfg.rsd_mc_samples,
        seed: instance_seed(inst.seed, 1, 0),
    };
    match id {
        MechanismId::RsdExact if inst.n <= cfg.rsd_exact_cap => Mechanism::RsdExact { cap: cfg.rsd_exact_cap },
        MechanismId::RsdExact | MechanismId::RsdMc => sampled(),
        other => Mechanism::from(other),
    }
}

/// Records for one instance: the OEV is solved once and shared by every
/// mechanism's record.
pub fn run_instance(cfg: &ExperimentConfig, inst: &Instance) -> Result<Vec<ExperimentRecord>> {
    let v = inst.profile()?;
    let oev = solve_oev(&v)?.value;
    cfg.mechanisms
        .iter()
        .map(|&id| {
            let mech = resolve(cfg, id, inst);
            let outcome = mech.run(&v)?;
            let ev = egalitarian_value(&v, &outcome.allocation)?;
            Ok(ExperimentRecord::new(inst, mech.id(), ev, oev))
        })
        .collect()
}

/// Runs the whole grid on the current rayon pool and, when the config has an
/// output path, writes the records there as CSV.
///
/// Records come back in grid order and, within an instance, in the config's
/// mechanism order, independent of how work was scheduled.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let sink = match &cfg.output_path {
        Some(path) => Some((path, File::create(path).map_err(|e| Error::io(path, e))?)),
        None => None,
    };
    let per_instance: Vec<Vec<ExperimentRecord>> = instances(cfg)
        .par_iter()
        .map(|inst| run_instance(cfg, inst))
        .collect::<Result<_>>()?;
    let records: Vec<ExperimentRecord> = per_instance.into_iter().flatten().collect();
    if let Some((path, file)) = sink {
        write_records_to(file, path, &records)?;
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellAggregate {
    pub n: usize,
    pub phi: f64,
    pub model: UtilityModel,
    pub mechanism: MechanismId,
    pub min_aar: f64,
    pub mean_aar: f64,
    pub count: usize,
}

impl CellAggregate {
    fn fields(&self) -> [String; 7] {
        [
            self.n.to_string(),
            format_sig12(self.phi),
            self.model.to_string(),
            self.mechanism.to_string(),
            format_sig12(self.min_aar),
            format_sig12(self.mean_aar),
            self.count.to_string(),
        ]
    }
}

type CellKey = (usize, OrderedFloat<f64>, UtilityModel, MechanismId);

/// Min and mean achieved ratio per `(n, phi, model, mechanism)`, pooling all
/// object counts. Output is sorted by that key.
pub fn aggregate(records: &[ExperimentRecord]) -> Result<Vec<CellAggregate>> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("cannot aggregate an empty record list".into()));
    }
    let mut groups: BTreeMap<CellKey, (f64, f64, usize)> = BTreeMap::new();
    for r in records {
        let entry = groups
            .entry((r.n, OrderedFloat(r.phi), r.model, r.mechanism))
            .or_insert((f64::INFINITY, 0.0, 0));
        entry.0 = entry.0.min(r.aar);
        entry.1 += r.aar;
        entry.2 += 1;
    }
    Ok(groups
        .into_iter()
        .map(|((n, phi, model, mechanism), (min, sum, count))| CellAggregate {
            n,
            phi: phi.0,
            model,
            mechanism,
            min_aar: round_sig12(min),
            mean_aar: round_sig12(sum / count as f64).max(round_sig12(min)),
            count,
        })
        .collect())
}

fn csv_writer<W: std::io::Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn write_rows<W: std::io::Write, const K: usize>(
    w: W,
    path: &Path,
    header: [&str; K],
    rows: impl Iterator<Item = [String; K]>,
) -> Result<()> {
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut out = csv_writer(w);
    out.write_record(header).map_err(wrap)?;
    for row in rows {
        out.write_record(&row).map_err(wrap)?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

fn write_records_to<W: std::io::Write>(w: W, path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    write_rows(w, path, RECORD_HEADER, records.iter().map(ExperimentRecord::fields))
}

/// Writes records as CSV to any writer; `label` names it in errors.
pub fn write_records<W: std::io::Write>(records: &[ExperimentRecord], w: W, label: &Path) -> Result<()> {
    write_records_to(w, label, records)
}

pub fn write_records_csv(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_records_to(file, path, records)
}

pub fn write_aggregates_csv(aggregates: &[CellAggregate], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_rows(
        file,
        path,
        AGGREGATE_HEADER,
        aggregates.iter().map(CellAggregate::fields),
    )
}

fn read_rows<const K: usize>(path: &Path, header: [&str; K]) -> Result<Vec<(usize, csv::StringRecord)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(file);
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (k, rec) in reader.records().enumerate() {
        let line = k + 1;
        let rec = rec.map_err(|e| Error::parse(path, line, e.to_string()))?;
        if rec.len() != K {
            return Err(Error::parse(
                path,
                line,
                format!("expected {K} fields, found {}", rec.len()),
            ));
        }
        if k == 0 {
            if rec.iter().ne(header.iter().copied()) {
                return Err(Error::parse(
                    path,
                    line,
                    format!("expected header `{}`", header.join(",")),
                ));
            }
            saw_header = true;
            continue;
        }
        rows.push((line, rec));
    }
    if !saw_header {
        return Err(Error::parse(path, 1, "missing header"));
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, rec: &csv::StringRecord, k: usize, name: &str) -> Result<T> {
    rec[k]
        .parse()
        .map_err(|_| Error::parse(path, line, format!("bad {name} `{}`", &rec[k])))
}

pub fn read_records_csv(path: &Path) -> Result<Vec<ExperimentRecord>> {
    read_rows(path, RECORD_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            Ok(ExperimentRecord {
                n: field(path, line, &r, 0, "n")?,
                m: field(path, line, &r, 1, "m")?,
                phi: field(path, line, &r, 2, "phi")?,
                model: field(path, line, &r, 3, "model")?,
                mechanism: field(path, line, &r, 4, "mechanism")?,
                instance_id: field(path, line, &r, 5, "instance_id")?,
                seed: field(path, line, &r, 6, "seed")?,
                ev: field(path, line, &r, 7, "ev")?,
                oev: field(path, line, &r, 8, "oev")?,
                aar: field(path, line, &r, 9, "aar")?,
            })
        })
        .collect()
}

pub fn read_aggregates_csv(path: &Path) -> Result<Vec<CellAggregate>> {
    read_rows(path, AGGREGATE_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            Ok(CellAggregate {
                n: field(path, line, &r, 0, "n")?,
                phi: field(path, line, &r, 1, "phi")?,
                model: field(path, line, &r, 2, "model")?,
                mechanism: field(path, line, &r, 3, "mechanism")?,
                min_aar: field(path, line, &r, 4, "min_aar")?,
                mean_aar: field(path, line, &r, 5, "mean_aar")?,
                count: field(path, line, &r, 6, "count")?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapMetric {
    Min,
    Mean,
}

impl std::str::FromStr for HeatmapMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(HeatmapMetric::Min),
            "mean" => Ok(HeatmapMetric::Mean),
            other => Err(Error::InvalidParameter(format!(
                "unknown metric `{other}` (expected min or mean)"
            ))),
        }
    }
}

type HeatmapCells = BTreeMap<(OrderedFloat<f64>, usize), f64>;

/// One phi-by-n text grid per `(model, mechanism)` pair.
pub fn render_heatmap(aggregates: &[CellAggregate], metric: HeatmapMetric) -> String {
    let mut blocks: BTreeMap<(UtilityModel, MechanismId), HeatmapCells> = BTreeMap::new();
    for a in aggregates {
        let value = match metric {
            HeatmapMetric::Min => a.min_aar,
            HeatmapMetric::Mean => a.mean_aar,
        };
        blocks
            .entry((a.model, a.mechanism))
            .or_default()
            .insert((OrderedFloat(a.phi), a.n), value);
    }
    let label = match metric {
        HeatmapMetric::Min => "min",
        HeatmapMetric::Mean => "mean",
    };
    let mut out = String::new();
    for ((model, mech), cells) in &blocks {
        let mut ns: Vec<usize> = cells.keys().map(|(_, n)| *n).collect();
        ns.sort_unstable();
        ns.dedup();
        let mut phis: Vec<OrderedFloat<f64>> = cells.keys().map(|(p, _)| *p).collect();
        phis.dedup();
        writeln!(out, "# {label} aar, model={model}, mechanism={mech}").unwrap();
        write!(out, "{:>6}", "phi\\n").unwrap();
        for n in &ns {
            write!(out, " {n:>6}").unwrap();
        }
        out.push('\n');
        for phi in phis {
            write!(out, "{:>6.2}", phi.0).unwrap();
            for n in &ns {
                match cells.get(&(phi, *n)) {
                    Some(v) => write!(out, " {v:>6.3}").unwrap(),
                    None => write!(out, " {:>6}", "-").unwrap(),
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
