//! Kinematics from raw tracking and the contest-relative coordinate transform.
//!
//! A player's relation to a point on the pitch is expressed in their movement
//! frame: the +x axis points along the direction of travel, y is the signed
//! lateral offset (positive = left of the movement line).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed below which a player's heading is considered undefined (m/s).
/// Displacements at this scale are tracking noise, not orientation.
pub const EPS_SPEED: f64 = 0.3;

/// 2D point / vector in pitch coordinates (meters, origin at pitch center).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// 2D cross product (z-component); positive when `other` lies to the left of `self`.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Unit vector, or `None` for the zero vector.
    pub fn unit(self) -> Option<Vec2> {
        let n = self.norm();
        if n == 0.0 {
            None
        } else {
            Some(Vec2::new(self.x / n, self.y / n))
        }
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (other - self).norm()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// One row of player-tracking data (10 Hz nominal).
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingSample {
    pub match_id: String,
    pub player_id: String,
    pub team_id: String,
    pub t: f64,
    pub pos: Vec2,
}

/// A player's kinematic state at one instant, derived from tracking.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerState {
    pub player_id: String,
    pub team_id: String,
    pub t: f64,
    pub pos: Vec2,
    /// Unit movement direction; `None` when speed < [`EPS_SPEED`].
    pub heading: Option<Vec2>,
    pub speed: f64,
}

/// Location of a target point expressed in a player's movement frame.
///
/// `theta` is the unsigned reorientation angle in [0, pi]; the side is
/// carried by the sign of `y` (positive = target on the player's left).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeLocation {
    /// Meters along the movement direction.
    pub x: f64,
    /// Signed lateral offset in meters.
    pub y: f64,
    /// Euclidean distance to the target.
    pub d: f64,
    /// Angle between movement vector and displacement-to-target, radians in [0, pi].
    pub theta: f64,
}

/// Derive per-sample speed and heading for one player's time-ordered track
/// using central finite differences (forward/backward at the ends).
pub fn derive_kinematics(track: &[TrackingSample]) -> Result<Vec<PlayerState>> {
    derive_kinematics_smoothed(track, 1)
}

/// [`derive_kinematics`] with a centered moving-average position filter of
/// `window` samples applied before differencing (window 1 = off). The window
/// shrinks symmetrically near the track ends. Reported positions stay raw;
/// only speed and heading see the smoothed series.
pub fn derive_kinematics_smoothed(
    track: &[TrackingSample],
    window: usize,
) -> Result<Vec<PlayerState>> {
    let times: Vec<f64> = track.iter().map(|s| s.t).collect();
    let positions: Vec<Vec2> = track.iter().map(|s| s.pos).collect();
    let kinematics = kinematics_cols(&times, &positions, window).map_err(|e| match e {
        Error::UnorderedTrack { t, .. } => Error::UnorderedTrack {
            player: track[0].player_id.clone(),
            t,
        },
        other => other,
    })?;
    Ok(track
        .iter()
        .zip(kinematics)
        .map(|(s, (speed, heading))| PlayerState {
            player_id: s.player_id.clone(),
            team_id: s.team_id.clone(),
            t: s.t,
            pos: s.pos,
            heading,
            speed,
        })
        .collect())
}

/// Columnar kinematics: per-sample (speed, heading) for a time-ordered
/// position series.
pub(crate) fn kinematics_cols(
    times: &[f64],
    positions: &[Vec2],
    window: usize,
) -> Result<Vec<(f64, Option<Vec2>)>> {
    let n = times.len();
    if n < 2 {
        return Err(Error::InsufficientTrack(n));
    }
    for pair in times.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::UnorderedTrack {
                player: String::new(),
                t: pair[1],
            });
        }
    }

    let radius = window.max(1) / 2;
    let smoothed: Vec<Vec2> = (0..n)
        .map(|i| {
            let r = radius.min(i).min(n - 1 - i);
            let (lo, hi) = (i - r, i + r);
            let mut acc = Vec2::ZERO;
            for p in &positions[lo..=hi] {
                acc = acc + *p;
            }
            acc * (1.0 / (hi - lo + 1) as f64)
        })
        .collect();

    Ok((0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            let dt = times[b] - times[a];
            let vel = (smoothed[b] - smoothed[a]) * (1.0 / dt);
            let speed = vel.norm();
            let heading = if speed < EPS_SPEED { None } else { vel.unit() };
            (speed, heading)
        })
        .collect())
}

/// Contest location relative to a player's movement, from two consecutive
/// positions and the target point.
///
/// The movement vector is `cur_pos - prev_pos`; the displacement vector is
/// `target_pos - cur_pos`. Errors with "undefined orientation" when the
/// movement vector has zero length (callers fall back to pitch-frame axes).
pub fn relative_location(prev_pos: Vec2, cur_pos: Vec2, target_pos: Vec2) -> Result<RelativeLocation> {
    let movement = cur_pos - prev_pos;
    let heading = movement.unit().ok_or(Error::UndefinedOrientation)?;
    Ok(relative_location_from_heading(heading, cur_pos, target_pos))
}

/// [`relative_location`] given an already-normalized heading. Infallible:
/// the pitch-frame fallback `(1, 0)` is a valid heading for stationary players.
pub fn relative_location_from_heading(
    heading: Vec2,
    cur_pos: Vec2,
    target_pos: Vec2,
) -> RelativeLocation {
    let to_target = target_pos - cur_pos;
    let d = to_target.norm();
    if d == 0.0 {
        return RelativeLocation {
            x: 0.0,
            y: 0.0,
            d: 0.0,
            theta: 0.0,
        };
    }
    let cos_theta = (heading.dot(to_target) / d).clamp(-1.0, 1.0);
    let theta = cos_theta.acos();
    let side = if heading.cross(to_target) < 0.0 { -1.0 } else { 1.0 };
    RelativeLocation {
        x: d * cos_theta,
        y: d * theta.sin() * side,
        d,
        theta,
    }
}

/// Heading to use when a player has none: pitch frame, +x toward the
/// attacking goal.
pub fn fallback_heading() -> Vec2 {
    Vec2::new(1.0, 0.0)
}
