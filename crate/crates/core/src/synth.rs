//! Synthetic match generator with a known ground-truth commitment rule.
//!
//! Possessions are scripted, not simulated: a kicker kicks toward a sampled
//! contest point, every other on-field player commits with probability
//! p*(x, y, v, t) evaluated in their own movement frame, committed players
//! arrive within the commitment radius by the contest time, and a dedicated
//! contest anchor (who enters tracking only after the kick, like an
//! interchange player, so sample building skips them) realizes the contest
//! transaction at the contest point. The generator's label table is the
//! oracle for the whole fitting pipeline.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{relative_location_from_heading, TrackingSample, Vec2, EPS_SPEED};
use crate::ingest::{TransactionEvent, TransactionKind};
use crate::spatial::Pitch;

/// Ground-truth commitment probability rule.
#[derive(Debug, Clone, PartialEq)]
pub enum TrueRule {
    /// p* = sigmoid(a - b * max(0, d/t - v_max) - c * (1 - cos theta)).
    ///
    /// The reachability term penalizes contests whose required average
    /// speed d/t exceeds the cap `v_max`; the reorientation term penalizes
    /// contests behind the player. Farther or less reachable contests
    /// always score lower.
    Logistic { a: f64, b: f64, c: f64, v_max: f64 },
    /// p* identically equal to the given probability.
    Constant(f64),
}

impl Default for TrueRule {
    fn default() -> Self {
        TrueRule::Logistic {
            a: 2.0,
            b: 1.5,
            c: 0.5,
            v_max: 8.0,
        }
    }
}

impl TrueRule {
    /// p*(x, y, v, t). The default rule keys on required average speed,
    /// so the current speed `v` enters the sample vector but not the
    /// probability. Errors when t <= 0.
    pub fn probability(&self, x: f64, y: f64, _v: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "time-to-point must be positive, got {t}"
            )));
        }
        match self {
            TrueRule::Constant(p) => Ok(*p),
            TrueRule::Logistic { a, b, c, v_max } => {
                let d = x.hypot(y);
                let cos_theta = if d == 0.0 { 1.0 } else { x / d };
                let infeasibility = (d / t - v_max).max(0.0);
                let logit = a - b * infeasibility - c * (1.0 - cos_theta);
                Ok(1.0 / (1.0 + (-logit).exp()))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            TrueRule::Constant(p) if !(0.0..=1.0).contains(p) => Err(Error::InvalidConfig(
                format!("constant rule probability must lie in [0, 1], got {p}"),
            )),
            TrueRule::Logistic { b, c, v_max, .. } if *b < 0.0 || *c < 0.0 || *v_max <= 0.0 => {
                Err(Error::InvalidConfig(
                    "logistic rule needs b, c >= 0 and v_max > 0".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_contests: usize,
    pub players_per_team: usize,
    pub pitch: Pitch,
    pub rule: TrueRule,
    pub kick_speed: f64,
    /// Gaussian positional noise sigma per tracking sample (m); 0 for
    /// exactness tests.
    pub noise_sigma: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            n_contests: 100,
            players_per_team: 8,
            pitch: Pitch::DEFAULT,
            rule: TrueRule::default(),
            kick_speed: 20.0,
            noise_sigma: 0.2,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_contests == 0 {
            return Err(Error::InvalidConfig("n_contests must be at least 1".into()));
        }
        if self.players_per_team == 0 || self.players_per_team > 18 {
            return Err(Error::InvalidConfig(
                "players_per_team must lie in 1..=18".into(),
            ));
        }
        if !(self.kick_speed > 0.0) {
            return Err(Error::InvalidConfig("kick_speed must be positive".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidConfig("noise_sigma must be non-negative".into()));
        }
        self.rule.validate()
    }
}

/// Ground-truth commitment probability under the config's rule.
pub fn ground_truth_probability(config: &SynthConfig, x: f64, y: f64, v: f64, t: f64) -> Result<f64> {
    config.rule.probability(x, y, v, t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthRow {
    pub contest_id: usize,
    pub player_id: String,
    pub p_star: f64,
    pub committed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SynthData {
    pub tracking: Vec<TrackingSample>,
    pub transactions: Vec<TransactionEvent>,
    pub truth: Vec<GroundTruthRow>,
}

pub const MATCH_ID: &str = "synth";
const FRAME: f64 = 0.1;
const LEAD: f64 = 2.0; // tracking before the kick
const TAIL: f64 = 1.0; // tracking after the contest
const SPACING: f64 = 12.0; // seconds between possessions
/// Non-committed continuation paths keep at least this far from the contest
/// so threshold labels are unambiguous at zero noise.
const AVOID_RADIUS: f64 = 2.5;
/// Committed players are routed to within this distance of the contest.
const ARRIVE_RADIUS: f64 = 1.0;
const MAX_TRIES: usize = 200;

fn polar(rng: &mut ChaCha8Rng, r_min: f64, r_max: f64) -> Vec2 {
    let r = rng.gen_range(r_min..r_max);
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    Vec2::new(r * phi.cos(), r * phi.sin())
}

fn in_pitch_with_margin(pitch: &Pitch, p: Vec2, margin: f64) -> bool {
    let l = pitch.length - 2.0 * margin;
    let w = pitch.width - 2.0 * margin;
    if l <= 0.0 || w <= 0.0 {
        return false;
    }
    let u = 2.0 * p.x / l;
    let v = 2.0 * p.y / w;
    u * u + v * v <= 1.0
}

fn random_in_pitch(rng: &mut ChaCha8Rng, pitch: &Pitch, margin: f64) -> Result<Vec2> {
    for _ in 0..MAX_TRIES {
        let p = Vec2::new(
            rng.gen_range(-pitch.length / 2.0..pitch.length / 2.0),
            rng.gen_range(-pitch.width / 2.0..pitch.width / 2.0),
        );
        if in_pitch_with_margin(pitch, p, margin) {
            return Ok(p);
        }
    }
    Err(Error::Synth(
        "could not place a point inside the pitch; check pitch dimensions".into(),
    ))
}

/// Kick target and whole-second time-to-point for a kick from `origin`.
fn draw_contest(rng: &mut ChaCha8Rng, config: &SynthConfig, origin: Vec2) -> Result<(Vec2, f64)> {
    for _ in 0..MAX_TRIES {
        let q = origin + polar(rng, 16.0, 40.0);
        if !in_pitch_with_margin(&config.pitch, q, 5.0) {
            continue;
        }
        let base = (origin.distance(q) / config.kick_speed).round();
        let ttp = (base + rng.gen_range(0..=2) as f64).clamp(1.0, 5.0);
        return Ok((q, ttp));
    }
    Err(Error::Synth(
        "could not place a contest inside the pitch after repeated retries".into(),
    ))
}

struct PlayerDraw {
    pos: Vec2,
    vel: Vec2,
    speed: f64,
    /// Relative contest location in the player's movement frame.
    x: f64,
    y: f64,
}

/// A player state near the contest: position, velocity, and the contest's
/// location in the movement frame. States whose straight continuation would
/// pass within [`AVOID_RADIUS`] of the contest at t_c are rejected before
/// any label is drawn, so the conditional label law stays exactly p*.
fn draw_player(rng: &mut ChaCha8Rng, config: &SynthConfig, q: Vec2, ttp: f64) -> Result<PlayerDraw> {
    for _ in 0..MAX_TRIES {
        let pos = q + polar(rng, 2.0, 45.0);
        if !config.pitch.contains(pos) {
            continue;
        }
        let speed = rng.gen_range(0.0..8.0);
        let dir = rng.gen_range(0.0..std::f64::consts::TAU);
        let vel = Vec2::new(speed * dir.cos(), speed * dir.sin());
        if (pos + vel * ttp).distance(q) < AVOID_RADIUS {
            continue;
        }
        let heading = if speed < EPS_SPEED {
            Vec2::new(1.0, 0.0)
        } else {
            vel.unit().unwrap()
        };
        let rel = relative_location_from_heading(heading, pos, q);
        return Ok(PlayerDraw {
            pos,
            vel,
            speed,
            x: rel.x,
            y: rel.y,
        });
    }
    Err(Error::Synth(
        "could not place a player near the contest after repeated retries".into(),
    ))
}

/// Piecewise-linear scripted path.
struct Path {
    /// (start_time, start_pos, velocity) pieces, in order.
    pieces: Vec<(f64, Vec2, Vec2)>,
}

impl Path {
    fn constant_velocity(t0: f64, pos0: Vec2, vel: Vec2) -> Path {
        Path {
            pieces: vec![(t0, pos0, vel)],
        }
    }

    /// Hold `vel` until `t_turn`, then travel linearly to reach `target` at
    /// `t_arrive`, then stay there.
    fn join(t0: f64, pos0: Vec2, vel: Vec2, t_turn: f64, target: Vec2, t_arrive: f64) -> Path {
        let turn_pos = pos0 + vel * (t_turn - t0);
        let leg = (target - turn_pos) * (1.0 / (t_arrive - t_turn));
        Path {
            pieces: vec![
                (t0, pos0, vel),
                (t_turn, turn_pos, leg),
                (t_arrive, target, Vec2::ZERO),
            ],
        }
    }

    fn at(&self, t: f64) -> Vec2 {
        let mut current = &self.pieces[0];
        for piece in &self.pieces[1..] {
            if t >= piece.0 {
                current = piece;
            } else {
                break;
            }
        }
        current.1 + current.2 * (t - current.0)
    }
}

struct Emitter {
    noise: Option<Normal<f64>>,
    rows: Vec<TrackingSample>,
}

impl Emitter {
    fn new(sigma: f64) -> Result<Emitter> {
        let noise = if sigma > 0.0 {
            Some(Normal::new(0.0, sigma).map_err(|e| Error::Synth(e.to_string()))?)
        } else {
            None
        };
        Ok(Emitter {
            noise,
            rows: Vec::new(),
        })
    }

    fn emit(
        &mut self,
        rng: &mut ChaCha8Rng,
        player_id: &str,
        team_id: &str,
        path: &Path,
        t_start: f64,
        t_end: f64,
    ) {
        let steps = ((t_end - t_start) / FRAME).round() as usize;
        for k in 0..=steps {
            let t = t_start + FRAME * k as f64;
            let mut pos = path.at(t);
            if let Some(noise) = &self.noise {
                pos.x += noise.sample(rng);
                pos.y += noise.sample(rng);
            }
            self.rows.push(TrackingSample {
                match_id: MATCH_ID.to_string(),
                player_id: player_id.to_string(),
                team_id: team_id.to_string(),
                t,
                pos,
            });
        }
    }
}

/// Generate scripted tracking, transactions and the ground-truth label
/// table. Bitwise deterministic for a given config.
pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut emitter = Emitter::new(config.noise_sigma)?;
    let mut transactions = Vec::new();
    let mut truth = Vec::new();

    let teams = ["home", "away"];
    for contest_id in 0..config.n_contests {
        let t_p = 10.0 + SPACING * contest_id as f64;
        let origin = random_in_pitch(&mut rng, &config.pitch, 20.0)?;
        let (q, ttp) = draw_contest(&mut rng, config, origin)?;
        let t_c = t_p + ttp;
        let window = (t_p - LEAD, t_c + TAIL);

        let kicker_team = teams[0];
        let kicker_idx = contest_id % config.players_per_team;
        let kicker_id = format!("{kicker_team}_{kicker_idx}");

        // Contested mark: reception by the kicking side; spoil: punched away
        // by the defending side. The anchor realizes the transaction.
        let contested = rng.gen_bool(0.5);
        let (kind, anchor_team) = if contested {
            (TransactionKind::ContestedMark, teams[0])
        } else {
            (TransactionKind::Spoil, teams[1])
        };
        let anchor_id = format!("anchor_{anchor_team}");

        // Kicker drifts slowly through the kick origin.
        let kicker_vel = polar(&mut rng, 0.0, 1.5);
        let kicker_path = Path::constant_velocity(t_p, origin, kicker_vel);
        emitter.emit(&mut rng, &kicker_id, kicker_team, &kicker_path, window.0, window.1);

        for team in teams {
            for idx in 0..config.players_per_team {
                if team == kicker_team && idx == kicker_idx {
                    continue;
                }
                let player_id = format!("{team}_{idx}");
                let draw = draw_player(&mut rng, config, q, ttp)?;
                let p_star = config.rule.probability(draw.x, draw.y, draw.speed, ttp)?;
                let committed = rng.gen_bool(p_star.clamp(0.0, 1.0));
                let path = if committed {
                    let target = q + polar(&mut rng, 0.0, ARRIVE_RADIUS);
                    // The turn starts three frames after the kick so the
                    // state derived at t_p reflects pre-kick motion even
                    // under a 5-sample smoothing window.
                    Path::join(t_p, draw.pos, draw.vel, t_p + 3.0 * FRAME, target, t_c)
                } else {
                    Path::constant_velocity(t_p, draw.pos, draw.vel)
                };
                emitter.emit(&mut rng, &player_id, team, &path, window.0, window.1);
                truth.push(GroundTruthRow {
                    contest_id,
                    player_id,
                    p_star,
                    committed,
                });
            }
        }

        // Anchor enters tracking after the kick and arrives exactly at the
        // contest point at t_c; absent at t_p, so it is skipped by sample
        // building but defines the contest position.
        let anchor_start = t_p + 0.5;
        let approach = q + polar(&mut rng, 4.0, 8.0);
        let anchor_vel = (q - approach) * (1.0 / (t_c - anchor_start));
        let anchor_path = Path::join(anchor_start, approach, anchor_vel, anchor_start, q, t_c);
        emitter.emit(&mut rng, &anchor_id, anchor_team, &anchor_path, anchor_start, t_c + 0.5);

        transactions.push(TransactionEvent {
            match_id: MATCH_ID.to_string(),
            t: t_p,
            kind: TransactionKind::Kick,
            player_id: kicker_id,
            team_id: kicker_team.to_string(),
        });
        transactions.push(TransactionEvent {
            match_id: MATCH_ID.to_string(),
            t: t_c,
            kind,
            player_id: anchor_id,
            team_id: anchor_team.to_string(),
        });
    }

    Ok(SynthData {
        tracking: emitter.rows,
        transactions,
        truth,
    })
}

/// Draw held-out (x, y, v, t) states from the same law the generator uses,
/// with their ground-truth probabilities. The oracle side of end-to-end
/// recovery checks.
pub fn sample_states(config: &SynthConfig, n: usize, seed: u64) -> Result<Vec<([f64; 4], f64)>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let origin = random_in_pitch(&mut rng, &config.pitch, 20.0)?;
        let (q, ttp) = draw_contest(&mut rng, config, origin)?;
        let draw = draw_player(&mut rng, config, q, ttp)?;
        let p_star = config.rule.probability(draw.x, draw.y, draw.speed, ttp)?;
        out.push(([draw.x, draw.y, draw.speed, ttp], p_star));
    }
    Ok(out)
}

/// `contest_id,player_id,p_star,committed` rows.
pub fn write_ground_truth_csv<W: Write>(mut out: W, truth: &[GroundTruthRow]) -> Result<()> {
    writeln!(out, "contest_id,player_id,p_star,committed")?;
    for row in truth {
        writeln!(
            out,
            "{},{},{:.6},{}",
            row.contest_id,
            row.player_id,
            row.p_star,
            if row.committed { 1 } else { 0 }
        )?;
    }
    Ok(())
}
