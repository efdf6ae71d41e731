//! Team spatial influence and dominance fields over a pitch grid from a
//! frozen match snapshot.
//!
//! A team's influence at a location is the sum of its players' commitment
//! probabilities there; dominance is that team's share of the combined
//! influence of both teams.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{fallback_heading, relative_location_from_heading, PlayerState, Vec2};
use crate::grid::{EvalMode, FieldGrid, GridSpec};
use crate::kde::CommitmentModel;

/// Floor below which the time-to-point of a grid query is not extrapolated;
/// transactions have one-second resolution, so fitted times never go lower.
pub const T_MIN: f64 = 0.5;

/// Default constant kick speed for the time-to-point model (m/s).
pub const DEFAULT_BALL_SPEED: f64 = 20.0;

/// Maximum players per team on the field.
pub const MAX_TEAM_SIZE: usize = 18;

/// An elliptical playing field inscribed in a length x width box centered on
/// the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pitch {
    pub length: f64,
    pub width: f64,
}

impl Pitch {
    pub const DEFAULT: Pitch = Pitch {
        length: 160.0,
        width: 130.0,
    };

    pub fn new(length: f64, width: f64) -> Result<Pitch> {
        if !(length > 0.0 && width > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "pitch dimensions must be positive, got {length} x {width}"
            )));
        }
        Ok(Pitch { length, width })
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let u = 2.0 * p.x / self.length;
        let v = 2.0 * p.y / self.width;
        u * u + v * v <= 1.0
    }

    /// Grid spec covering the pitch bounding box.
    pub fn grid_spec(&self, cell_size: f64) -> Result<GridSpec> {
        GridSpec::covering(
            -self.length / 2.0,
            self.length / 2.0,
            -self.width / 2.0,
            self.width / 2.0,
            cell_size,
        )
    }

    /// Center of the attacking goal line for a team attacking in +x.
    pub fn goal_center(&self) -> Vec2 {
        Vec2::new(self.length / 2.0, 0.0)
    }
}

impl Default for Pitch {
    fn default() -> Self {
        Pitch::DEFAULT
    }
}

/// A frozen match instant: ball, possession and both teams' player states.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub ball_pos: Vec2,
    pub possession_team: String,
    pub players: Vec<PlayerState>,
}

impl Snapshot {
    /// Distinct team ids in first-appearance order.
    pub fn team_ids(&self) -> Vec<String> {
        let mut teams = Vec::new();
        for p in &self.players {
            if !teams.contains(&p.team_id) {
                teams.push(p.team_id.clone());
            }
        }
        teams
    }

    /// Check the two-team, at-most-18-a-side, ball-in-bounds invariants.
    pub fn validate(&self, pitch: &Pitch) -> Result<()> {
        let teams = self.team_ids();
        if teams.len() != 2 {
            return Err(Error::InvalidSnapshot(format!(
                "expected exactly 2 teams, found {}",
                teams.len()
            )));
        }
        for team in &teams {
            let count = self.players.iter().filter(|p| &p.team_id == team).count();
            if count > MAX_TEAM_SIZE {
                return Err(Error::InvalidSnapshot(format!(
                    "team {team} has {count} players on field (max {MAX_TEAM_SIZE})"
                )));
            }
        }
        if !teams.contains(&self.possession_team) {
            return Err(Error::InvalidSnapshot(format!(
                "possession team '{}' not present in snapshot",
                self.possession_team
            )));
        }
        if !pitch.contains(self.ball_pos) {
            return Err(Error::InvalidSnapshot("ball position out of bounds".into()));
        }
        Ok(())
    }

    pub fn opponent_of(&self, team: &str) -> Option<String> {
        self.team_ids().into_iter().find(|t| t != team)
    }
}

/// Ball travel time from `ball_pos` to `target` under a constant-speed kick
/// model, floored at [`T_MIN`].
pub fn time_to_point(ball_pos: Vec2, target: Vec2, ball_speed: f64) -> f64 {
    (ball_pos.distance(target) / ball_speed).max(T_MIN)
}

/// A player's commitment probability for a contest at `target`, were the
/// ball kicked there now.
pub fn player_commitment_at(
    player: &PlayerState,
    model: &CommitmentModel,
    target: Vec2,
    ball_pos: Vec2,
    ball_speed: f64,
) -> f64 {
    let heading = player.heading.unwrap_or_else(fallback_heading);
    let rel = relative_location_from_heading(heading, player.pos, target);
    let t = time_to_point(ball_pos, target, ball_speed);
    model.probability(&[rel.x, rel.y, player.speed, t])
}

/// Commitment probability field of one player over the pitch grid.
pub fn player_influence(
    player: &PlayerState,
    model: &CommitmentModel,
    pitch: &Pitch,
    spec: GridSpec,
    ball_pos: Vec2,
    ball_speed: f64,
    mode: EvalMode,
) -> FieldGrid {
    let heading = player.heading.unwrap_or_else(fallback_heading);
    let partial = model.partial_v(player.speed);
    let player_pos = player.pos;
    FieldGrid::from_fn(
        spec,
        mode,
        |p| pitch.contains(p),
        move |p| {
            let rel = relative_location_from_heading(heading, player_pos, p);
            let t = time_to_point(ball_pos, p, ball_speed);
            partial.probability(&[rel.x, rel.y, t])
        },
    )
}

/// Team influence: cellwise sum of the team's player influence grids,
/// accumulated in player-id order so the result is independent of the
/// snapshot's player ordering.
pub fn team_influence(
    snapshot: &Snapshot,
    team: &str,
    model: &CommitmentModel,
    pitch: &Pitch,
    spec: GridSpec,
    ball_speed: f64,
    mode: EvalMode,
) -> Result<FieldGrid> {
    let mut members: Vec<&PlayerState> = snapshot
        .players
        .iter()
        .filter(|p| p.team_id == team)
        .collect();
    if members.is_empty() {
        return Err(Error::InvalidSnapshot(format!(
            "team '{team}' not present in snapshot"
        )));
    }
    members.sort_by(|a, b| a.player_id.cmp(&b.player_id));
    let mut total = FieldGrid::filled(spec, 0.0);
    for (idx, m) in total.mask.iter_mut().enumerate() {
        let (i, j) = (idx % spec.nx, idx / spec.nx);
        *m = pitch.contains(spec.cell_center(i, j));
    }
    for player in members {
        let g = player_influence(player, model, pitch, spec, snapshot.ball_pos, ball_speed, mode);
        total.add_assign(&g)?;
    }
    Ok(total)
}

/// Team influence at a single point (sum over the team's players).
pub fn team_influence_at(
    snapshot: &Snapshot,
    team: &str,
    model: &CommitmentModel,
    target: Vec2,
    ball_pos: Vec2,
    ball_speed: f64,
) -> f64 {
    let mut members: Vec<&PlayerState> = snapshot
        .players
        .iter()
        .filter(|p| p.team_id == team)
        .collect();
    members.sort_by(|a, b| a.player_id.cmp(&b.player_id));
    members
        .iter()
        .map(|p| player_commitment_at(p, model, target, ball_pos, ball_speed))
        .sum()
}

/// Dominance: cellwise `a / (a + o)`, with 0.5 where the combined influence
/// falls below `floor` (uncontested-unknown).
pub fn dominance(inf_a: &FieldGrid, inf_o: &FieldGrid, floor: f64) -> Result<FieldGrid> {
    if inf_a.spec != inf_o.spec {
        return Err(Error::GridSpecMismatch);
    }
    let values = inf_a
        .values
        .iter()
        .zip(&inf_o.values)
        .map(|(&a, &o)| dominance_share(a, o, floor))
        .collect();
    let mask = inf_a
        .mask
        .iter()
        .zip(&inf_o.mask)
        .map(|(&m, &n)| m && n)
        .collect();
    Ok(FieldGrid {
        spec: inf_a.spec,
        values,
        mask,
    })
}

/// The scalar form of [`dominance`].
pub fn dominance_share(inf_a: f64, inf_o: f64, floor: f64) -> f64 {
    let total = inf_a + inf_o;
    if total < floor {
        0.5
    } else {
        inf_a / total
    }
}

// --- snapshot file format -------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PlayerDoc {
    player_id: String,
    team_id: String,
    pos: [f64; 2],
    heading: Option<[f64; 2]>,
    speed: f64,
}

#[derive(Serialize, Deserialize)]
struct SnapshotDoc {
    t: f64,
    ball_pos: [f64; 2],
    possession_team: String,
    players: Vec<PlayerDoc>,
}

impl Snapshot {
    pub fn to_json(&self) -> Result<String> {
        let doc = SnapshotDoc {
            t: self.t,
            ball_pos: [self.ball_pos.x, self.ball_pos.y],
            possession_team: self.possession_team.clone(),
            players: self
                .players
                .iter()
                .map(|p| PlayerDoc {
                    player_id: p.player_id.clone(),
                    team_id: p.team_id.clone(),
                    pos: [p.pos.x, p.pos.y],
                    heading: p.heading.map(|h| [h.x, h.y]),
                    speed: p.speed,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Snapshot> {
        let doc: SnapshotDoc = serde_json::from_str(text)?;
        let players = doc
            .players
            .into_iter()
            .map(|p| {
                let heading = match p.heading {
                    Some([hx, hy]) => {
                        let v = Vec2::new(hx, hy);
                        let n = v.norm();
                        if n == 0.0 {
                            return Err(Error::InvalidSnapshot(format!(
                                "player {} has a zero heading vector",
                                p.player_id
                            )));
                        }
                        // Preserve stored bits when already normalized.
                        Some(if (n - 1.0).abs() <= 1e-9 { v } else { v * (1.0 / n) })
                    }
                    None => None,
                };
                if !(p.speed >= 0.0) {
                    return Err(Error::InvalidSnapshot(format!(
                        "player {} has negative speed",
                        p.player_id
                    )));
                }
                Ok(PlayerState {
                    player_id: p.player_id,
                    team_id: p.team_id,
                    t: doc.t,
                    pos: Vec2::new(p.pos[0], p.pos[1]),
                    heading,
                    speed: p.speed,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Snapshot {
            t: doc.t,
            ball_pos: Vec2::new(doc.ball_pos[0], doc.ball_pos[1]),
            possession_team: doc.possession_team,
            players,
        })
    }
}
