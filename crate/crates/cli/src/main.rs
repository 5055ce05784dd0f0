// Copyright 2026 The driverloc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `driverloc`: road network preparation, the location-harvesting attack,
//! its mitigation, and experiment sweeps.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use driverloc_core::harness::{
    canonical_key, parse_pairs, run_attack_experiment, run_sweep, write_accuracy_csv,
    write_attack_csv, write_mitigation_csv, write_polyrecover_csv, write_sweep_reports,
    AttackExperiment, ExperimentConfig, RoadSource,
};
use driverloc_core::matching::{evaluate_accuracy, AccuracyConfig, MatchingMode};
use driverloc_core::mitigation::{run_mitigated_experiment, MitigationConfig, ObfuscationParams};
use driverloc_core::polyrecover::{run_recovery_trials, NoiseModel};
use driverloc_core::roadnet::{
    generate_city, generate_manhattan_grid, ingest, write_planar_csv, CitySpec, IngestOptions,
    RoadFormat,
};
use driverloc_core::{Hemisphere, PlanarPoint, RoadNetwork};

#[derive(Parser, Debug)]
#[command(
    name = "driverloc",
    version,
    about = "Lattice-point driver location harvesting and its mitigation"
)]
struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat `key = value` file; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// More logging (-v, -vv).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic street grid as planar CSV.
    GenRoads(GenRoadsArgs),
    /// Convert CSV or GeoJSON roads into planar CSV.
    Ingest(IngestArgs),
    /// Run the rider's attack on random scenes.
    Attack(AttackArgs),
    /// Run the attack against obfuscated drivers.
    Mitigate(MitigateArgs),
    /// Measure matching accuracy with and without obfuscation.
    Accuracy(AccuracyArgs),
    /// Recover inputs of random monotone integer polynomials.
    Polyrecover(PolyArgs),
    /// Run a configured sweep over zone sizes.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct GenRoadsArgs {
    /// Blocks as ROWSxCOLS.
    #[arg(long)]
    grid: String,
    /// Block side in meters.
    #[arg(long)]
    spacing: u64,
    /// Drop this share of block sides that are not needed for connectivity.
    #[arg(long, default_value_t = 0.0)]
    removal: f64,
    /// Blocks between barrier lines (rivers, rail); 0 for none.
    #[arg(long, default_value_t = 0)]
    barrier_every: u32,
    /// Blocks between crossings of a barrier.
    #[arg(long, default_value_t = 1)]
    crossing_every: u32,
    /// South-west corner as X,Y.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    origin: String,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Defaults to the input's extension.
    #[arg(long, value_parser = ["csv", "geojson"])]
    format: Option<String>,
    /// Force one UTM zone, e.g. 18N, for input that straddles a boundary.
    #[arg(long)]
    pin_zone: Option<String>,
}

#[derive(Args, Debug, Default)]
struct SceneArgs {
    /// Road network: planar CSV, GeoJSON, `grid:SPACING:ROWSxCOLS` or
    /// `city:SPACING:ROWSxCOLS:REMOVAL:SEED`.
    #[arg(long)]
    roads: Option<String>,
    #[arg(long)]
    zone_side: Option<u64>,
    #[arg(long)]
    trials: Option<u32>,
}

#[derive(Args, Debug)]
struct AttackArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// Even exponent of the disclosed norm; 2 is Euclidean.
    #[arg(long)]
    pnorm: Option<u32>,
    /// Drivers per trial.
    #[arg(long)]
    drivers: Option<usize>,
    /// On-road tolerance in meters.
    #[arg(long)]
    threshold: Option<f64>,
    /// Fix the rider at X,Y instead of sampling.
    #[arg(long, allow_hyphen_values = true)]
    rider: Option<String>,
    /// Fix the driver at X,Y instead of sampling.
    #[arg(long, allow_hyphen_values = true)]
    driver: Option<String>,
    /// Also write per-driver wall-clock timings here.
    #[arg(long)]
    timings: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MitigateArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[arg(long)]
    radius: Option<f64>,
    /// `pad`, `keep` or `drop`.
    #[arg(long)]
    edge_policy: Option<String>,
    #[arg(long)]
    filter_slack: Option<f64>,
}

#[derive(Args, Debug)]
struct AccuracyArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[arg(long)]
    drivers: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_parser = ["oride", "mitigated"])]
    mode: String,
    /// Travel speed in m/s.
    #[arg(long)]
    speed: Option<f64>,
}

#[derive(Args, Debug)]
struct PolyArgs {
    #[arg(long)]
    degree: u32,
    /// Coefficient bits.
    #[arg(long)]
    alpha: u32,
    /// Input bits.
    #[arg(long)]
    beta: u32,
    #[arg(long)]
    trials: Option<u32>,
    /// Outputs observed per instance.
    #[arg(long, default_value_t = 5)]
    outputs: usize,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    roads: Option<String>,
    /// Comma separated zone sides in meters.
    #[arg(long)]
    zone_sides: Option<String>,
    #[arg(long)]
    trials: Option<u32>,
    /// `attack`, `mitigated`, `pnorm` or `accuracy`.
    #[arg(long)]
    pipeline: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    pnorm: Option<u32>,
    #[arg(long)]
    drivers: Option<usize>,
}

/// Config file values overlaid with command-line flags.
struct Settings {
    cfg: ExperimentConfig,
    from_file: HashSet<String>,
}

impl Settings {
    fn load(cli: &Cli) -> Result<Self> {
        let mut cfg = ExperimentConfig::new(RoadSource::Grid {
            spacing_m: 100,
            rows: 10,
            cols: 10,
        });
        let mut from_file = HashSet::new();
        if let Some(path) = &cli.config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            for (k, v) in parse_pairs(&text)? {
                cfg.set(&k, &v)
                    .with_context(|| format!("{}: key `{k}`", path.display()))?;
                from_file.insert(canonical_key(&k));
            }
        }
        if let Some(seed) = cli.seed {
            cfg.master_seed = seed;
        }
        if let Some(out) = &cli.out {
            cfg.output_path = Some(out.clone());
        }
        Ok(Self { cfg, from_file })
    }

    fn has(&self, key: &str) -> bool {
        self.from_file.contains(key)
    }

    fn apply_scene(&mut self, scene: &SceneArgs) -> Result<()> {
        if let Some(r) = &scene.roads {
            self.cfg.set("road_source", r)?;
            self.from_file.insert("road_source".into());
        }
        if !self.has("road_source") {
            bail!("no road network: pass --roads or set road_source in the config");
        }
        if let Some(t) = scene.trials {
            self.cfg.trials_per_size = t;
        }
        if let Some(s) = scene.zone_side {
            self.cfg.zone_sides_m = vec![s];
        } else if !self.has("zone_sides_m") {
            bail!("pass --zone-side or set zone_sides_m in the config");
        }
        Ok(())
    }

    fn zone_side(&self) -> u64 {
        self.cfg.zone_sides_m[0]
    }

    fn network(&self) -> Result<RoadNetwork> {
        let net = self
            .cfg
            .road_source
            .load(self.cfg.cell_size_m)
            .with_context(|| format!("loading roads from {}", self.cfg.road_source))?;
        log::info!(
            "{} segments, {} nodes",
            net.segments().len(),
            net.node_count()
        );
        Ok(net)
    }

    fn output(&self) -> Result<Box<dyn Write>> {
        output(self.cfg.output_path.as_deref())
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn parse_point(s: &str) -> Result<PlanarPoint> {
    let (x, y) = s.split_once(',').context("expected X,Y")?;
    Ok(PlanarPoint::new(x.trim().parse()?, y.trim().parse()?))
}

fn parse_utm_zone(s: &str) -> Result<(u8, Hemisphere)> {
    let s = s.trim();
    let (num, hemi) = s.split_at(s.len().saturating_sub(1));
    let hemisphere = match hemi {
        "N" | "n" => Hemisphere::North,
        "S" | "s" => Hemisphere::South,
        _ => bail!("UTM zone must look like 18N or 56S, got `{s}`"),
    };
    Ok((num.parse().context("UTM zone number")?, hemisphere))
}

fn gen_roads(cli: &Cli, args: &GenRoadsArgs) -> Result<()> {
    let (rows, cols) = args
        .grid
        .split_once('x')
        .context("--grid expects ROWSxCOLS")?;
    let (rows, cols): (u32, u32) = (rows.parse()?, cols.parse()?);
    let origin = parse_point(&args.origin)?;
    let segments = if args.removal > 0.0 || args.barrier_every > 0 {
        let mut spec = CitySpec::new(
            args.spacing,
            rows,
            cols,
            args.removal,
            cli.seed.unwrap_or(0),
        )
        .with_barriers(args.barrier_every, args.crossing_every);
        spec.origin = origin;
        generate_city(&spec)?
    } else {
        generate_manhattan_grid(args.spacing, rows, cols, origin)?
    };
    write_planar_csv(output(cli.out.as_deref())?, &segments)?;
    log::info!("wrote {} segments", segments.len());
    Ok(())
}

fn ingest_cmd(cli: &Cli, args: &IngestArgs) -> Result<()> {
    let format = match &args.format {
        Some(f) => f.parse()?,
        None => RoadFormat::from_path(&args.input),
    };
    let opts = IngestOptions {
        pin_zone: args.pin_zone.as_deref().map(parse_utm_zone).transpose()?,
    };
    let ingested = ingest(&args.input, format, &opts)?;
    // Validates ids and geometry before writing.
    RoadNetwork::build(ingested.segments.clone())?;
    if let Some((zone, hemi)) = ingested.utm {
        eprintln!(
            "projected into UTM zone {zone}{}",
            if hemi == Hemisphere::North { 'N' } else { 'S' }
        );
    }
    write_planar_csv(output(cli.out.as_deref())?, &ingested.segments)?;
    Ok(())
}

fn attack(cli: &Cli, args: &AttackArgs) -> Result<()> {
    let mut s = Settings::load(cli)?;
    s.apply_scene(&args.scene)?;
    if let Some(p) = args.pnorm {
        s.cfg.pnorm_p = Some(p);
    }
    if let Some(d) = args.drivers {
        s.cfg.drivers = d;
    }
    if let Some(t) = args.threshold {
        s.cfg.on_road_threshold_m = t;
    }
    if let Some(r) = &args.rider {
        s.cfg.fixed_rider = Some(parse_point(r)?);
    }
    if let Some(d) = &args.driver {
        s.cfg.fixed_driver = Some(parse_point(d)?);
    }
    let net = s.network()?;
    let mut exp = AttackExperiment::new(s.zone_side(), s.cfg.trials_per_size, s.cfg.master_seed);
    exp.norm_exponent = s.cfg.pnorm_p.unwrap_or(2);
    exp.attack = s.cfg.attack();
    exp.fixed_rider = s.cfg.fixed_rider;
    exp.fixed_driver = s.cfg.fixed_driver;
    if args.drivers.is_some() || s.has("drivers") {
        exp.drivers_per_trial = s.cfg.drivers;
    }
    let trials = run_attack_experiment(&net, &exp)?;
    write_attack_csv(s.output()?, &trials)?;
    if let Some(path) = &args.timings {
        let mut w = csv_writer(path)?;
        writeln!(w, "trial,driver,disclosed,lattice_points,elapsed_us")?;
        for t in &trials {
            writeln!(
                w,
                "{},{},{},{},{}",
                t.trial, t.driver, t.disclosed, t.lattice_points, t.elapsed_us
            )?;
        }
        w.flush()?;
    }
    let n = trials.len() as f64;
    let total: usize = trials.iter().map(|t| t.candidates.len()).sum();
    let exact = trials.iter().filter(|t| t.exact()).count();
    eprintln!(
        "avg={} exact={}",
        total as f64 / n,
        (100 * exact) as f64 / n
    );
    Ok(())
}

fn csv_writer(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn mitigate(cli: &Cli, args: &MitigateArgs) -> Result<()> {
    let mut s = Settings::load(cli)?;
    s.apply_scene(&args.scene)?;
    if let Some(r) = args.radius {
        s.cfg.obfuscation_radius_m = Some(r);
    }
    if let Some(p) = &args.edge_policy {
        s.cfg.edge_policy = p.parse()?;
    }
    if let Some(slack) = args.filter_slack {
        s.cfg.filter_slack_m = slack;
    }
    let radius = s.cfg.obfuscation_radius_m.context("pass --radius")?;
    let net = s.network()?;
    let config = MitigationConfig {
        zone_side_m: s.zone_side(),
        params: ObfuscationParams::with_slack(radius, s.cfg.filter_slack_m)?,
        trials: s.cfg.trials_per_size,
        seed: s.cfg.master_seed,
        edge_policy: s.cfg.edge_policy,
    };
    let report = run_mitigated_experiment(&net, &config)?;
    write_mitigation_csv(s.output()?, &report)?;
    eprintln!(
        "mean_anonymity={} se={}",
        report.mean_anonymity,
        report.standard_error()
    );
    Ok(())
}

fn accuracy(cli: &Cli, args: &AccuracyArgs) -> Result<()> {
    let mut s = Settings::load(cli)?;
    s.apply_scene(&args.scene)?;
    if let Some(d) = args.drivers {
        s.cfg.drivers = d;
    }
    if let Some(r) = args.radius {
        s.cfg.obfuscation_radius_m = Some(r);
    }
    if let Some(v) = args.speed {
        s.cfg.speed_mps = v;
    }
    let mode: MatchingMode = args.mode.parse()?;
    if mode == MatchingMode::Mitigated && s.cfg.obfuscation_radius_m.is_none() {
        bail!("mitigated mode needs --radius");
    }
    let net = s.network()?;
    let config = AccuracyConfig {
        zone_side_m: s.zone_side(),
        drivers: s.cfg.drivers,
        radius_m: s.cfg.obfuscation_radius_m.unwrap_or(0.0),
        trials: s.cfg.trials_per_size,
        seed: s.cfg.master_seed,
        model: s.cfg.travel_model()?,
    };
    let report = evaluate_accuracy(&net, &config, mode)?;
    write_accuracy_csv(s.output()?, &report)?;
    eprintln!("accuracy_pct={}", report.within_one_minute_pct);
    Ok(())
}

fn polyrecover(cli: &Cli, args: &PolyArgs) -> Result<()> {
    let s = Settings::load(cli)?;
    let trials = args.trials.unwrap_or(s.cfg.trials_per_size);
    let model = NoiseModel::new(args.degree, args.alpha, args.beta)?;
    let results = run_recovery_trials(&model, args.outputs, trials, s.cfg.master_seed)?;
    write_polyrecover_csv(s.output()?, &results)?;
    let recovered = results.iter().filter(|t| t.recovered).count();
    let unique = results.iter().filter(|t| t.unique).count();
    eprintln!("recovered={recovered}/{trials} unique={unique}/{trials}");
    Ok(())
}

fn sweep(cli: &Cli, args: &SweepArgs) -> Result<()> {
    let mut s = Settings::load(cli)?;
    if let Some(r) = &args.roads {
        s.cfg.set("road_source", r)?;
    } else if !s.has("road_source") {
        bail!("no road network: pass --roads or set road_source in the config");
    }
    if let Some(z) = &args.zone_sides {
        s.cfg.set("zone_sides_m", z)?;
    }
    if let Some(t) = args.trials {
        s.cfg.trials_per_size = t;
    }
    if let Some(p) = &args.pipeline {
        s.cfg.pipeline = p.parse()?;
    }
    if let Some(r) = args.radius {
        s.cfg.obfuscation_radius_m = Some(r);
    }
    if let Some(p) = args.pnorm {
        s.cfg.pnorm_p = Some(p);
    }
    if let Some(d) = args.drivers {
        s.cfg.drivers = d;
    }
    let out = s
        .cfg
        .output_path
        .clone()
        .context("sweep needs --out (or output_path in the config)")?;
    let report = run_sweep(&s.cfg)?;
    let paths = write_sweep_reports(&report, &out)?;
    let failed = report.rows.iter().filter(|r| r.status != "ok").count();
    for p in &paths {
        eprintln!("wrote {}", p.display());
    }
    if failed > 0 {
        eprintln!("{failed} of {} cells failed", report.rows.len());
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match &cli.command {
        Command::GenRoads(a) => gen_roads(&cli, a),
        Command::Ingest(a) => ingest_cmd(&cli, a),
        Command::Attack(a) => attack(&cli, a),
        Command::Mitigate(a) => mitigate(&cli, a),
        Command::Accuracy(a) => accuracy(&cli, a),
        Command::Polyrecover(a) => polyrecover(&cli, a),
        Command::Sweep(a) => sweep(&cli, a),
    }
}
