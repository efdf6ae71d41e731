//! Command-line pipeline: synthetic data generation, commitment-model
//! fitting, influence/dominance grids, pass analysis and pass clustering.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pitchfield::gmm::{self, EmOptions};
use pitchfield::grid::{EvalMode, FieldGrid};
use pitchfield::ingest::{self, CommitmentSample, StateIndex, TrackingSet};
use pitchfield::kde::{self, BandwidthRule, CommitmentModel, KdeModel, SliceWindow};
use pitchfield::passing::{self, EquitySurface, PassConfig, PassFeatures};
use pitchfield::spatial::{self, Pitch, Snapshot};
use pitchfield::synth::{self, SynthConfig};

#[derive(Parser)]
#[command(
    name = "pitchfield",
    version,
    about = "Contextual motion models, spatial dominance fields and pass analysis for player-tracking data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Seed for all random choices of the subcommand.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Pitch dimensions in meters, LENGTHxWIDTH.
    #[arg(long, global = true, default_value = "160x130", value_parser = parse_pitch)]
    pitch: Pitch,

    /// Constant ball speed for the time-to-point model (m/s).
    #[arg(long, global = true, default_value_t = 20.0)]
    ball_speed: f64,

    /// Grid cell size in meters.
    #[arg(long, global = true, default_value_t = 2.0)]
    cell_size: f64,

    /// Multiplier on Scott's-rule kernel bandwidths.
    #[arg(long, global = true, default_value_t = 1.0)]
    bandwidth_scale: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic tracking, transactions and ground-truth labels.
    Synth(SynthArgs),
    /// Fit a commitment model from tracking + transactions (or a samples CSV).
    Fit(FitArgs),
    /// Evaluate influence/dominance fields and movement-frame slices.
    Grid(GridArgs),
    /// Extract passes, score their spatial features and smooth them by location.
    Passes(PassesArgs),
    /// Cluster pass features with a Gaussian mixture.
    Cluster(ClusterArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Number of scripted possessions.
    #[arg(long, default_value_t = 100)]
    contests: usize,
    #[arg(long, default_value_t = 8)]
    players_per_team: usize,
    /// Positional tracking noise sigma in meters (0 disables).
    #[arg(long, default_value_t = 0.2)]
    noise: f64,
    #[arg(long, default_value_t = 20.0)]
    kick_speed: f64,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, requires = "transactions", conflicts_with = "samples")]
    tracking: Option<PathBuf>,
    #[arg(long, requires = "tracking")]
    transactions: Option<PathBuf>,
    /// Pre-built samples CSV (x,y,v,t,c); skips ingestion.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Moving-average window for kinematic smoothing (samples; 1 = off).
    #[arg(long, default_value_t = 1)]
    smooth_window: usize,
    /// Also fit the displacement baseline at this horizon (seconds).
    #[arg(long)]
    displacement_horizon: Option<f64>,
}

#[derive(Args)]
struct GridArgs {
    /// Commitment model JSON (or displacement model for --slice).
    #[arg(long)]
    model: PathBuf,
    /// Snapshot JSON; required unless only --slice output is wanted.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Movement-frame slice "V,T" (speed m/s, time-to-point s).
    #[arg(long, value_parser = parse_pair)]
    slice: Option<(f64, f64)>,
    /// Half-extent of the slice window in meters.
    #[arg(long, default_value_t = 30.0)]
    slice_half: f64,
}

#[derive(Args)]
struct PassesArgs {
    #[arg(long)]
    tracking: PathBuf,
    #[arg(long)]
    transactions: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Field-equity surface JSON; a synthetic placeholder is used if omitted.
    #[arg(long)]
    equity: Option<PathBuf>,
    /// Gaussian bandwidth for location smoothing (m).
    #[arg(long, default_value_t = 15.0)]
    kernel_radius: f64,
    #[arg(long, default_value_t = 1)]
    smooth_window: usize,
}

#[derive(Args)]
struct ClusterArgs {
    /// Pass features CSV produced by `passes`.
    #[arg(long)]
    features: PathBuf,
    /// Fixed component count; omit to select via the elbow curve.
    #[arg(long)]
    k: Option<usize>,
    /// Candidate range "LO:HI" for elbow selection.
    #[arg(long, default_value = "1:6", value_parser = parse_range)]
    k_range: (usize, usize),
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    /// Comma-separated feature columns to cluster on.
    #[arg(long, default_value = "dominance,influence,distance,equity")]
    columns: String,
}

fn parse_pitch(s: &str) -> Result<Pitch, String> {
    let (l, w) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected LENGTHxWIDTH, got '{s}'"))?;
    let length: f64 = l.trim().parse().map_err(|_| format!("bad length '{l}'"))?;
    let width: f64 = w.trim().parse().map_err(|_| format!("bad width '{w}'"))?;
    Pitch::new(length, width).map_err(|e| e.to_string())
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected V,T, got '{s}'"))?;
    let v: f64 = a.trim().parse().map_err(|_| format!("bad value '{a}'"))?;
    let t: f64 = b.trim().parse().map_err(|_| format!("bad value '{b}'"))?;
    Ok((v, t))
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got '{s}'"))?;
    let lo: usize = a.trim().parse().map_err(|_| format!("bad value '{a}'"))?;
    let hi: usize = b.trim().parse().map_err(|_| format!("bad value '{b}'"))?;
    if lo == 0 || hi < lo {
        return Err(format!("range {lo}:{hi} is not ascending from 1"));
    }
    Ok((lo, hi))
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output directory {}", cli.out.display()))?;
    match &cli.command {
        Command::Synth(args) => cmd_synth(&cli, args),
        Command::Fit(args) => cmd_fit(&cli, args),
        Command::Grid(args) => cmd_grid(&cli, args),
        Command::Passes(args) => cmd_passes(&cli, args),
        Command::Cluster(args) => cmd_cluster(&cli, args),
    }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path).with_context(|| {
        format!("creating {}", path.display())
    })?))
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn cmd_synth(cli: &Cli, args: &SynthArgs) -> Result<()> {
    let config = SynthConfig {
        seed: cli.seed,
        n_contests: args.contests,
        players_per_team: args.players_per_team,
        pitch: cli.pitch,
        kick_speed: args.kick_speed,
        noise_sigma: args.noise,
        ..SynthConfig::default()
    };
    let data = synth::generate(&config)?;

    let tracking_path = cli.out.join("tracking.csv");
    ingest::write_tracking_csv(&mut create(&tracking_path)?, &data.tracking)?;
    let transactions_path = cli.out.join("transactions.csv");
    ingest::write_transactions_csv(&mut create(&transactions_path)?, &data.transactions)?;
    let truth_path = cli.out.join("ground_truth.csv");
    synth::write_ground_truth_csv(&mut create(&truth_path)?, &data.truth)?;

    let committed = data.truth.iter().filter(|r| r.committed).count();
    println!(
        "synth: {} contests, {} players/team, {} tracking rows, {} labels ({} committed), seed {}",
        args.contests,
        args.players_per_team,
        data.tracking.len(),
        data.truth.len(),
        committed,
        cli.seed
    );
    println!(
        "wrote {}, {}, {}",
        tracking_path.display(),
        transactions_path.display(),
        truth_path.display()
    );
    Ok(())
}

fn load_ingest(
    tracking: &Path,
    transactions: &Path,
) -> Result<(TrackingSet, Vec<ingest::TransactionEvent>)> {
    let (set, stats) = ingest::load_tracking_path(tracking)
        .with_context(|| format!("loading tracking from {}", tracking.display()))?;
    if stats.duplicates_dropped > 0 {
        eprintln!(
            "warning: dropped {} duplicate tracking rows",
            stats.duplicates_dropped
        );
    }
    let events = ingest::load_transactions_path(transactions)
        .with_context(|| format!("loading transactions from {}", transactions.display()))?;
    Ok((set, ingest::align_transactions(&events)))
}

fn cmd_fit(cli: &Cli, args: &FitArgs) -> Result<()> {
    let samples: Vec<CommitmentSample> = if let Some(samples_path) = &args.samples {
        if args.displacement_horizon.is_some() {
            bail!("--displacement-horizon needs raw tracking, not a samples CSV");
        }
        let samples = ingest::read_samples_csv_path(samples_path)
            .with_context(|| format!("loading samples from {}", samples_path.display()))?;
        println!("fit: {} samples from {}", samples.len(), samples_path.display());
        samples
    } else {
        let (tracking_path, transactions_path) = match (&args.tracking, &args.transactions) {
            (Some(t), Some(x)) => (t, x),
            _ => bail!("fit needs either --samples or both --tracking and --transactions"),
        };
        let (tracking, events) = load_ingest(tracking_path, transactions_path)?;
        let (contests, cstats) = ingest::extract_contests(&events, &tracking);
        if cstats.skipped_no_kick + cstats.skipped_out_of_window + cstats.skipped_missing_position > 0
        {
            eprintln!(
                "warning: skipped contests: {} without kick, {} out of window, {} missing position",
                cstats.skipped_no_kick, cstats.skipped_out_of_window, cstats.skipped_missing_position
            );
        }
        let (labeled, sstats) = ingest::build_commitment_samples(&contests, &tracking, args.smooth_window);
        if sstats.players_skipped > 0 {
            eprintln!(
                "warning: {} candidate players lost tracking before the contest",
                sstats.players_skipped
            );
        }
        println!(
            "fit: {} contests, {} samples from {}",
            cstats.contests,
            labeled.len(),
            tracking_path.display()
        );
        if let Some(horizon) = args.displacement_horizon {
            let (disp, _) = ingest::build_displacement_samples(&tracking, horizon, args.smooth_window)?;
            let disp_model = kde::fit_displacement_model(&disp, BandwidthRule::Scott, cli.bandwidth_scale)?;
            let path = cli.out.join("displacement_model.json");
            fs::write(&path, kde::displacement_to_json(&disp_model, horizon)?)?;
            let csv_path = cli.out.join("displacement_samples.csv");
            ingest::write_samples_csv(&mut create(&csv_path)?, &disp)?;
            println!(
                "displacement baseline: {} samples at horizon {horizon} s -> {}",
                disp.len(),
                path.display()
            );
        }
        labeled.iter().map(|s| s.sample).collect()
    };

    let samples_path = cli.out.join("samples.csv");
    ingest::write_samples_csv(&mut create(&samples_path)?, &samples)?;

    let model = CommitmentModel::fit(&samples, BandwidthRule::Scott, cli.bandwidth_scale)?;
    let model_path = cli.out.join("model.json");
    fs::write(&model_path, model.to_json()?)?;
    println!(
        "committed = {}, ignored = {}, w = {:.4} ({:.2})",
        model.f1.sample_count(),
        model.f0.sample_count(),
        model.w,
        model.w
    );
    println!("wrote {} and {}", model_path.display(), samples_path.display());
    Ok(())
}

enum AnyModel {
    Commitment(CommitmentModel),
    /// The displacement baseline plus the horizon it was fitted at.
    Displacement(KdeModel, f64),
}

fn load_model(path: &Path) -> Result<AnyModel> {
    let text = read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    if value.get("samples_c1").is_some() {
        Ok(AnyModel::Commitment(CommitmentModel::from_json(&text)?))
    } else if value.get("samples").is_some() {
        let horizon = value
            .pointer("/metadata/horizon")
            .and_then(|v| v.as_f64())
            .unwrap_or(f64::NAN);
        Ok(AnyModel::Displacement(kde::displacement_from_json(&text)?, horizon))
    } else {
        bail!("{} is neither a commitment nor a displacement model", path.display())
    }
}

fn write_grid_outputs(out: &Path, stem: &str, grid: &FieldGrid, lo: f64, hi: f64) -> Result<()> {
    grid.write_csv_path(&out.join(format!("{stem}.csv")))?;
    grid.write_ppm_path(&out.join(format!("{stem}.ppm")), lo, hi)?;
    Ok(())
}

fn cmd_grid(cli: &Cli, args: &GridArgs) -> Result<()> {
    let model = load_model(&args.model)?;

    if let Some((v, t)) = args.slice {
        let window = SliceWindow::symmetric(args.slice_half, cli.cell_size);
        let (slice, hi, kind) = match &model {
            AnyModel::Commitment(m) => {
                (m.slice_grid(v, t, &window, EvalMode::Parallel)?, 1.0, "commitment probability")
            }
            AnyModel::Displacement(m, horizon) => {
                if (t - horizon).abs() > 1e-9 {
                    eprintln!(
                        "warning: displacement model was fitted at horizon {horizon} s; the slice time {t} s only labels the output"
                    );
                }
                let g = kde::density_slice_grid(m, v, &window, EvalMode::Parallel)?;
                let hi = g.masked_range().map(|(_, hi)| hi).unwrap_or(1.0).max(f64::MIN_POSITIVE);
                (g, hi, "displacement density")
            }
        };
        write_grid_outputs(&cli.out, "slice", &slice, 0.0, hi)?;
        println!("slice v = {v} m/s, t = {t} s ({kind}) -> {}/slice.csv|.ppm", cli.out.display());
    }

    let Some(snapshot_path) = &args.snapshot else {
        if args.slice.is_none() {
            bail!("grid needs --snapshot, --slice, or both");
        }
        return Ok(());
    };
    let AnyModel::Commitment(model) = model else {
        bail!("influence and dominance fields need a commitment model");
    };
    let snapshot = Snapshot::from_json(&read_to_string(snapshot_path)?)?;
    snapshot.validate(&cli.pitch)?;
    let attacking = snapshot.possession_team.clone();
    let defending = snapshot
        .opponent_of(&attacking)
        .ok_or_else(|| anyhow!("snapshot needs two teams"))?;

    let spec = cli.pitch.grid_spec(cli.cell_size)?;
    let inf_a = spatial::team_influence(&snapshot, &attacking, &model, &cli.pitch, spec, cli.ball_speed, EvalMode::Parallel)?;
    let inf_o = spatial::team_influence(&snapshot, &defending, &model, &cli.pitch, spec, cli.ball_speed, EvalMode::Parallel)?;
    let dom_a = spatial::dominance(&inf_a, &inf_o, model.epsilon_floor)?;

    let inf_hi = [&inf_a, &inf_o]
        .iter()
        .filter_map(|g| g.masked_range().map(|(_, hi)| hi))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    write_grid_outputs(&cli.out, "inf_a", &inf_a, 0.0, inf_hi)?;
    write_grid_outputs(&cli.out, "inf_o", &inf_o, 0.0, inf_hi)?;
    write_grid_outputs(&cli.out, "dom_a", &dom_a, 0.0, 1.0)?;
    println!(
        "grids: {} x {} cells at {} m; attacking team '{}' -> inf_a, inf_o, dom_a (.csv/.ppm) in {}",
        spec.nx,
        spec.ny,
        cli.cell_size,
        attacking,
        cli.out.display()
    );
    Ok(())
}

fn cmd_passes(cli: &Cli, args: &PassesArgs) -> Result<()> {
    let (tracking, events) = load_ingest(&args.tracking, &args.transactions)?;
    let AnyModel::Commitment(model) = load_model(&args.model)? else {
        bail!("pass analysis needs a commitment model");
    };
    let equity = match &args.equity {
        Some(path) => EquitySurface::from_json(&read_to_string(path)?)?,
        None => {
            println!("note: no equity surface given, using the synthetic linear placeholder");
            EquitySurface::placeholder(&cli.pitch, cli.cell_size)?
        }
    };

    let (passes, pstats) = ingest::extract_passes(&events, &tracking);
    let features_path = cli.out.join("pass_features.csv");
    if passes.is_empty() {
        eprintln!("warning: no qualifying mark-to-mark passes found");
        passing::write_pass_features_csv(&mut create(&features_path)?, &[])?;
        let mut report = create(&cli.out.join("correlation_report.csv"))?;
        writeln!(report, "feature,rho,p_value")?;
        return Ok(());
    }

    let config = PassConfig {
        pitch: cli.pitch,
        ball_speed: cli.ball_speed,
        epsilon_floor: model.epsilon_floor,
    };
    let index = StateIndex::new(&tracking, args.smooth_window);
    let mut features: Vec<PassFeatures> = Vec::new();
    let mut skipped_off_pitch = 0usize;
    let mut skipped_bad_snapshot = 0usize;
    for (pass_id, pass) in passes.iter().enumerate() {
        let players = index.players_at(&pass.match_id, pass.t_p);
        let snapshot = Snapshot {
            t: pass.t_p,
            ball_pos: pass.origin_pos,
            possession_team: pass.team_id.clone(),
            players,
        };
        if snapshot.team_ids().len() != 2 {
            skipped_bad_snapshot += 1;
            continue;
        }
        match passing::compute_pass_features(pass_id, pass, &snapshot, &model, &equity, &config) {
            Ok(f) => features.push(f),
            Err(pitchfield::Error::OffPitchReception { .. }) => skipped_off_pitch += 1,
            Err(e) => return Err(e.into()),
        }
    }
    passing::write_pass_features_csv(&mut create(&features_path)?, &features)?;
    println!(
        "passes: {} extracted ({} short, {} cross-team dropped), {} scored, {} off-pitch, {} without two teams",
        pstats.passes, pstats.dropped_short, pstats.dropped_cross_team,
        features.len(), skipped_off_pitch, skipped_bad_snapshot
    );

    // Location-smoothed receiver maps.
    if !features.is_empty() {
        let spec = cli.pitch.grid_spec(cli.cell_size)?;
        let dom = passing::smooth_by_location(&features, |f| f.dominance, &cli.pitch, spec, args.kernel_radius, EvalMode::Parallel)?;
        let inf = passing::smooth_by_location(&features, |f| f.influence, &cli.pitch, spec, args.kernel_radius, EvalMode::Parallel)?;
        write_grid_outputs(&cli.out, "smoothed_dominance", &dom, 0.0, 1.0)?;
        let inf_hi = inf.masked_range().map(|(_, hi)| hi).unwrap_or(1.0).max(f64::MIN_POSITIVE);
        write_grid_outputs(&cli.out, "smoothed_influence", &inf, 0.0, inf_hi)?;
    }

    // Rank correlations of each feature against distance to goal.
    let report_path = cli.out.join("correlation_report.csv");
    let mut report = create(&report_path)?;
    writeln!(report, "feature,rho,p_value")?;
    let dist_to_goal: Vec<f64> = features.iter().map(|f| f.dist_to_goal).collect();
    type Selector = Box<dyn Fn(&PassFeatures) -> f64>;
    let columns: [(&str, Selector); 4] = [
        ("distance", Box::new(|f| f.distance)),
        ("dominance", Box::new(|f| f.dominance)),
        ("influence", Box::new(|f| f.influence)),
        ("equity", Box::new(|f| f.equity)),
    ];
    for (name, select) in &columns {
        let values: Vec<f64> = features.iter().map(select).collect();
        match passing::spearman(&values, &dist_to_goal) {
            Ok(rho) => {
                let p = passing::spearman_significance(rho, values.len())
                    .map(|p| format!("{p}"))
                    .unwrap_or_else(|_| "nan".to_string());
                writeln!(report, "{name},{rho},{p}")?;
                println!("spearman {name} vs dist_to_goal: rho = {rho:.4}, p = {p}");
            }
            Err(e) => {
                writeln!(report, "{name},nan,nan")?;
                eprintln!("warning: {name} correlation undefined: {e}");
            }
        }
    }
    println!("wrote {} and {}", features_path.display(), report_path.display());
    Ok(())
}

fn read_feature_matrix(path: &Path, columns: &[String]) -> Result<Vec<Vec<f64>>> {
    let text = read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| anyhow!("{} is empty", path.display()))?
        .trim_end_matches('\r')
        .split(',')
        .collect();
    let indices: Vec<usize> = columns
        .iter()
        .map(|c| {
            header
                .iter()
                .position(|h| h == c)
                .ok_or_else(|| anyhow!("column '{c}' not found in {}", path.display()))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (line_no, line) in lines.enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let row = indices
            .iter()
            .map(|&i| {
                fields
                    .get(i)
                    .and_then(|f| f.trim().parse::<f64>().ok())
                    .ok_or_else(|| anyhow!("bad value at line {} of {}", line_no + 2, path.display()))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn cmd_cluster(cli: &Cli, args: &ClusterArgs) -> Result<()> {
    let columns: Vec<String> = args
        .columns
        .split(',')
        .map(|c| c.trim().to_string())
        .filter(|c| !c.is_empty())
        .collect();
    if columns.is_empty() {
        bail!("--columns must name at least one feature");
    }
    let raw = read_feature_matrix(&args.features, &columns)?;
    let (scaled, standardization) = gmm::standardize(&raw)?;
    let opts = EmOptions::default();

    let k = match args.k {
        Some(k) => k,
        None => {
            let ks: Vec<usize> = (args.k_range.0..=args.k_range.1).collect();
            let curve = gmm::elbow_curve(&scaled, &ks, cli.seed, args.restarts, &opts)?;
            let elbow_path = cli.out.join("elbow.csv");
            let mut f = create(&elbow_path)?;
            writeln!(f, "k,mean_nll,param_count")?;
            for p in &curve {
                writeln!(f, "{},{},{}", p.k, p.mean_nll, p.param_count)?;
            }
            let pick = gmm::elbow_pick(&curve, gmm::DEFAULT_ELBOW_MIN_GAIN);
            println!("elbow curve over k = {}..={} -> picked k = {pick} ({})",
                args.k_range.0, args.k_range.1, elbow_path.display());
            pick
        }
    };

    let model = gmm::fit_best_of(&scaled, k, cli.seed, args.restarts, &opts)?;
    let model_path = cli.out.join("gmm.json");
    fs::write(&model_path, gmm::gmm_to_json(&model, Some(&standardization))?)?;

    // Component table in original units, heaviest component first.
    let mut order: Vec<usize> = (0..model.k).collect();
    order.sort_by(|&a, &b| model.weights[b].total_cmp(&model.weights[a]));
    let components_path = cli.out.join("components.csv");
    let mut f = create(&components_path)?;
    writeln!(f, "component,weight,{}", columns.join(","))?;
    println!("component  weight  {}", columns.join("  "));
    for (rank, &c) in order.iter().enumerate() {
        let mean = standardization.restore(&model.means[c]);
        let cells: Vec<String> = mean.iter().map(|v| format!("{v:.4}")).collect();
        writeln!(f, "{},{:.4},{}", rank + 1, model.weights[c], cells.join(","))?;
        println!("{:<9}  {:<6.2}  {}", rank + 1, model.weights[c], cells.join("  "));
    }
    println!(
        "cluster: {} rows, k = {}, log-likelihood/pt = {:.4}, converged = {} -> {} and {}",
        raw.len(),
        model.k,
        model.log_likelihood,
        model.converged,
        model_path.display(),
        components_path.display()
    );
    Ok(())
}
