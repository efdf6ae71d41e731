//! Loading and alignment of tracking/transaction files, contest and pass
//! extraction, and construction of labeled commitment / displacement sample
//! sets.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{
    self, fallback_heading, relative_location_from_heading, PlayerState, TrackingSample, Vec2,
};

mod io;
pub use io::{
    load_tracking, load_tracking_path, load_transactions, load_transactions_path,
    read_samples_csv, read_samples_csv_path, write_samples_csv, write_tracking_csv,
    write_transactions_csv, LoadStats,
};

/// Commitment radius: a player within this distance of the contest at t_c
/// realized the displacement.
pub const COMMIT_RADIUS: f64 = 2.0;

/// Maximum plausible ball time-to-point; longer kick-to-contest gaps
/// indicate a missed intermediate event.
pub const T_MAX: f64 = 10.0;

/// Largest tracking gap (s) across which positions are interpolated.
const MAX_GAP: f64 = 0.25;

/// Tolerance (s) when snapping a transaction time onto a tracking frame.
const STATE_TOL: f64 = 0.051;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransactionKind {
    Kick,
    Mark,
    ContestedMark,
    Spoil,
    Other,
}

impl TransactionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TransactionKind::Kick => "kick",
            TransactionKind::Mark => "mark",
            TransactionKind::ContestedMark => "contested_mark",
            TransactionKind::Spoil => "spoil",
            TransactionKind::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<TransactionKind> {
        Some(match s {
            "kick" => TransactionKind::Kick,
            "mark" => TransactionKind::Mark,
            "contested_mark" => TransactionKind::ContestedMark,
            "spoil" => TransactionKind::Spoil,
            "other" => TransactionKind::Other,
            _ => return None,
        })
    }

    fn is_mark_reception(self) -> bool {
        matches!(self, TransactionKind::Mark | TransactionKind::ContestedMark)
    }
}

/// One play-by-play event, recorded to the nearest second.
#[derive(Debug, Clone, PartialEq)]
pub struct TransactionEvent {
    pub match_id: String,
    pub t: f64,
    pub kind: TransactionKind,
    pub player_id: String,
    pub team_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContestKind {
    ContestedMark,
    Spoil,
}

/// A passing contest: the pass that preceded it and the contest transaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Contest {
    pub match_id: String,
    /// Pass (kick) timestamp.
    pub t_p: f64,
    /// Contest timestamp.
    pub t_c: f64,
    pub contest_pos: Vec2,
    pub kind: ContestKind,
    /// The kicker; excluded from commitment candidates.
    pub passer_id: String,
    pub passer_team: String,
}

impl Contest {
    pub fn time_to_point(&self) -> f64 {
        self.t_c - self.t_p
    }
}

/// One (x, y, v, t, C) observation of a player's relation to a forthcoming
/// contest, in the player's movement frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommitmentSample {
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub t: f64,
    pub committed: bool,
}

/// A commitment sample plus the identity of its contest and player, kept for
/// ground-truth reconciliation.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub contest_index: usize,
    pub player_id: String,
    pub sample: CommitmentSample,
}

/// A completed mark-to-mark pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PassEvent {
    pub match_id: String,
    pub t_p: f64,
    pub t_c: f64,
    pub passer_id: String,
    pub receiver_id: String,
    pub team_id: String,
    pub origin_pos: Vec2,
    pub receive_pos: Vec2,
    pub distance: f64,
    /// True when the reception was a contested mark.
    pub contested: bool,
}

/// A contiguous run of samples (no gap wider than [`MAX_GAP`]).
#[derive(Debug, Clone, Default)]
struct Segment {
    t: Vec<f64>,
    pos: Vec<Vec2>,
}

impl Segment {
    /// Linear interpolation inside the segment; `None` outside it.
    fn position_at(&self, t: f64) -> Option<Vec2> {
        let n = self.t.len();
        if n == 0 || t < self.t[0] - 1e-9 || t > self.t[n - 1] + 1e-9 {
            return None;
        }
        let i = self.t.partition_point(|&ti| ti < t);
        if i == 0 {
            return Some(self.pos[0]);
        }
        if i == n {
            return Some(self.pos[n - 1]);
        }
        let (t0, t1) = (self.t[i - 1], self.t[i]);
        let frac = (t - t0) / (t1 - t0);
        Some(self.pos[i - 1] + (self.pos[i] - self.pos[i - 1]) * frac)
    }

    /// Nearest sample index within [`STATE_TOL`] of `t`.
    fn frame_at(&self, t: f64) -> Option<usize> {
        let n = self.t.len();
        if n == 0 {
            return None;
        }
        let i = self.t.partition_point(|&ti| ti < t);
        let mut best: Option<usize> = None;
        for cand in [i.wrapping_sub(1), i] {
            if cand < n && (self.t[cand] - t).abs() <= STATE_TOL {
                best = match best {
                    Some(b) if (self.t[b] - t).abs() <= (self.t[cand] - t).abs() => Some(b),
                    _ => Some(cand),
                };
            }
        }
        best
    }
}

/// One player's track within one match, split into contiguous segments.
#[derive(Debug, Clone)]
pub struct Track {
    pub match_id: String,
    pub player_id: String,
    pub team_id: String,
    segments: Vec<Segment>,
}

impl Track {
    pub fn sample_count(&self) -> usize {
        self.segments.iter().map(|s| s.t.len()).sum()
    }
}

/// All tracking for a dataset, indexed by (match, player).
#[derive(Debug, Clone, Default)]
pub struct TrackingSet {
    tracks: Vec<Track>,
    by_key: HashMap<(String, String), usize>,
    by_match: HashMap<String, Vec<usize>>,
}

impl TrackingSet {
    /// Group rows by (match, player), sort by time, drop duplicate
    /// timestamps (keep first), and split at gaps. Returns the number of
    /// duplicates dropped alongside the set.
    pub fn from_samples(samples: Vec<TrackingSample>) -> (TrackingSet, usize) {
        let mut grouped: HashMap<(String, String), Vec<TrackingSample>> = HashMap::new();
        for s in samples {
            grouped
                .entry((s.match_id.clone(), s.player_id.clone()))
                .or_default()
                .push(s);
        }
        let mut keys: Vec<_> = grouped.keys().cloned().collect();
        keys.sort();

        let mut set = TrackingSet::default();
        let mut duplicates = 0;
        for key in keys {
            let mut rows = grouped.remove(&key).unwrap();
            rows.sort_by(|a, b| a.t.total_cmp(&b.t));
            let team_id = rows[0].team_id.clone();
            let mut segments = vec![Segment::default()];
            let mut last_t = f64::NEG_INFINITY;
            for row in rows {
                if row.t == last_t {
                    duplicates += 1;
                    continue;
                }
                if last_t.is_finite() && row.t - last_t > MAX_GAP {
                    segments.push(Segment::default());
                }
                let seg = segments.last_mut().unwrap();
                seg.t.push(row.t);
                seg.pos.push(row.pos);
                last_t = row.t;
            }
            let idx = set.tracks.len();
            set.tracks.push(Track {
                match_id: key.0.clone(),
                player_id: key.1.clone(),
                team_id,
                segments,
            });
            set.by_key.insert(key.clone(), idx);
            set.by_match.entry(key.0).or_default().push(idx);
        }
        (set, duplicates)
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn match_tracks(&self, match_id: &str) -> &[usize] {
        self.by_match
            .get(match_id)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn position_at(&self, match_id: &str, player_id: &str, t: f64) -> Option<Vec2> {
        let idx = self
            .by_key
            .get(&(match_id.to_string(), player_id.to_string()))?;
        self.tracks[*idx]
            .segments
            .iter()
            .find_map(|s| s.position_at(t))
    }
}

/// Precomputed per-sample speed and heading for every segment of every
/// track; the lookup layer for states at transaction times.
/// Per-sample (speed, heading) for each segment of one track.
type TrackStates = Vec<Vec<(f64, Option<Vec2>)>>;

pub struct StateIndex<'a> {
    set: &'a TrackingSet,
    states: Vec<TrackStates>,
}

impl<'a> StateIndex<'a> {
    /// `window` is the moving-average width for kinematic smoothing (1 = off).
    pub fn new(set: &'a TrackingSet, window: usize) -> StateIndex<'a> {
        let states = set
            .tracks
            .iter()
            .map(|track| {
                track
                    .segments
                    .iter()
                    .map(|seg| {
                        geometry::kinematics_cols(&seg.t, &seg.pos, window).unwrap_or_default()
                    })
                    .collect()
            })
            .collect();
        StateIndex { set, states }
    }

    /// Raw position, speed and heading of a track at time `t`, when a
    /// tracking frame exists there.
    fn state_by_track(&self, track_idx: usize, t: f64) -> Option<(Vec2, f64, Option<Vec2>)> {
        let track = &self.set.tracks[track_idx];
        for (si, seg) in track.segments.iter().enumerate() {
            if let Some(fi) = seg.frame_at(t) {
                let (speed, heading) = *self.states[track_idx].get(si)?.get(fi)?;
                return Some((seg.pos[fi], speed, heading));
            }
        }
        None
    }

    pub fn player_state(&self, match_id: &str, player_id: &str, t: f64) -> Option<PlayerState> {
        let idx = *self
            .set
            .by_key
            .get(&(match_id.to_string(), player_id.to_string()))?;
        let (pos, speed, heading) = self.state_by_track(idx, t)?;
        let track = &self.set.tracks[idx];
        Some(PlayerState {
            player_id: track.player_id.clone(),
            team_id: track.team_id.clone(),
            t,
            pos,
            heading,
            speed,
        })
    }

    /// All players on field (tracked) at time `t`, ordered by player id.
    pub fn players_at(&self, match_id: &str, t: f64) -> Vec<PlayerState> {
        self.set
            .match_tracks(match_id)
            .iter()
            .filter_map(|&idx| {
                let (pos, speed, heading) = self.state_by_track(idx, t)?;
                let track = &self.set.tracks[idx];
                Some(PlayerState {
                    player_id: track.player_id.clone(),
                    team_id: track.team_id.clone(),
                    t,
                    pos,
                    heading,
                    speed,
                })
            })
            .collect()
    }
}

/// Floor every event time to the whole second (transactions are recorded to
/// the nearest second and assumed to occur at the beginning of it). Input
/// order is preserved.
pub fn align_transactions(events: &[TransactionEvent]) -> Vec<TransactionEvent> {
    events
        .iter()
        .map(|e| TransactionEvent {
            t: e.t.floor(),
            ..e.clone()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ContestStats {
    pub contests: usize,
    pub skipped_no_kick: usize,
    pub skipped_out_of_window: usize,
    pub skipped_missing_position: usize,
}

/// Pair every contested-mark/spoil event with the latest preceding kick in
/// the same match. The contest position is the transacting player's tracked
/// position at the contest time.
pub fn extract_contests(
    events: &[TransactionEvent],
    tracking: &TrackingSet,
) -> (Vec<Contest>, ContestStats) {
    let mut stats = ContestStats::default();
    let mut contests = Vec::new();
    let mut last_kick: HashMap<&str, &TransactionEvent> = HashMap::new();
    for event in events {
        match event.kind {
            TransactionKind::Kick => {
                last_kick.insert(&event.match_id, event);
            }
            TransactionKind::ContestedMark | TransactionKind::Spoil => {
                let Some(kick) = last_kick.get(event.match_id.as_str()) else {
                    stats.skipped_no_kick += 1;
                    continue;
                };
                let dt = event.t - kick.t;
                if dt <= 0.0 || dt > T_MAX {
                    stats.skipped_out_of_window += 1;
                    continue;
                }
                let Some(contest_pos) =
                    tracking.position_at(&event.match_id, &event.player_id, event.t)
                else {
                    stats.skipped_missing_position += 1;
                    continue;
                };
                contests.push(Contest {
                    match_id: event.match_id.clone(),
                    t_p: kick.t,
                    t_c: event.t,
                    contest_pos,
                    kind: if event.kind == TransactionKind::ContestedMark {
                        ContestKind::ContestedMark
                    } else {
                        ContestKind::Spoil
                    },
                    passer_id: kick.player_id.clone(),
                    passer_team: kick.team_id.clone(),
                });
                stats.contests += 1;
            }
            _ => {}
        }
    }
    (contests, stats)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PassStats {
    pub passes: usize,
    pub dropped_short: usize,
    pub dropped_cross_team: usize,
    pub dropped_missing_position: usize,
    pub dropped_non_positive_duration: usize,
}

/// Minimum kick length for a mark (m).
pub const MIN_MARK_DISTANCE: f64 = 15.0;

/// Extract mark-to-mark passes: a kick consumed by the next mark-kind event
/// in the same match. A spoil ends the chain without producing a pass.
pub fn extract_passes(
    events: &[TransactionEvent],
    tracking: &TrackingSet,
) -> (Vec<PassEvent>, PassStats) {
    let mut stats = PassStats::default();
    let mut passes = Vec::new();
    let mut pending: HashMap<&str, &TransactionEvent> = HashMap::new();
    for event in events {
        match event.kind {
            TransactionKind::Kick => {
                pending.insert(&event.match_id, event);
            }
            TransactionKind::Spoil => {
                pending.remove(event.match_id.as_str());
            }
            k if k.is_mark_reception() => {
                let Some(kick) = pending.remove(event.match_id.as_str()) else {
                    continue;
                };
                if event.t <= kick.t {
                    stats.dropped_non_positive_duration += 1;
                    continue;
                }
                if event.team_id != kick.team_id {
                    stats.dropped_cross_team += 1;
                    continue;
                }
                let origin = tracking.position_at(&kick.match_id, &kick.player_id, kick.t);
                let receive = tracking.position_at(&event.match_id, &event.player_id, event.t);
                let (Some(origin_pos), Some(receive_pos)) = (origin, receive) else {
                    stats.dropped_missing_position += 1;
                    continue;
                };
                let distance = origin_pos.distance(receive_pos);
                if distance < MIN_MARK_DISTANCE {
                    stats.dropped_short += 1;
                    continue;
                }
                passes.push(PassEvent {
                    match_id: event.match_id.clone(),
                    t_p: kick.t,
                    t_c: event.t,
                    passer_id: kick.player_id.clone(),
                    receiver_id: event.player_id.clone(),
                    team_id: kick.team_id.clone(),
                    origin_pos,
                    receive_pos,
                    distance,
                    contested: event.kind == TransactionKind::ContestedMark,
                });
                stats.passes += 1;
            }
            _ => {}
        }
    }
    (passes, stats)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SampleBuildStats {
    pub samples: usize,
    pub committed: usize,
    pub players_skipped: usize,
}

/// Build the labeled commitment dataset: for every contest and every
/// on-field player except the passer, record the contest's location in the
/// player's movement frame at t_p, the player's speed, the ball
/// time-to-point, and whether the player was within [`COMMIT_RADIUS`] of the
/// contest at t_c.
///
/// On-field means tracked at t_p; players absent then (interchange) are not
/// candidates and are not counted. A candidate whose tracking runs out
/// before t_c is skipped and counted in the stats.
///
/// `window` is the moving-average width for kinematic smoothing (1 = off).
pub fn build_commitment_samples(
    contests: &[Contest],
    tracking: &TrackingSet,
    window: usize,
) -> (Vec<LabeledSample>, SampleBuildStats) {
    let kin = StateIndex::new(tracking, window);
    let mut stats = SampleBuildStats::default();
    let mut out = Vec::new();
    // Track lists are built in sorted key order, so iteration is
    // deterministic by player id within each match.
    for (contest_index, contest) in contests.iter().enumerate() {
        for &track_idx in tracking.match_tracks(&contest.match_id) {
            let track = &tracking.tracks[track_idx];
            if track.player_id == contest.passer_id {
                continue;
            }
            let Some((pos_tp, speed, heading)) = kin.state_by_track(track_idx, contest.t_p)
            else {
                continue; // not on field at the kick
            };
            let Some(pos_tc) =
                tracking.position_at(&contest.match_id, &track.player_id, contest.t_c)
            else {
                stats.players_skipped += 1;
                continue;
            };
            let frame = heading.unwrap_or_else(fallback_heading);
            let rel = relative_location_from_heading(frame, pos_tp, contest.contest_pos);
            let committed = pos_tc.distance(contest.contest_pos) < COMMIT_RADIUS;
            out.push(LabeledSample {
                contest_index,
                player_id: track.player_id.clone(),
                sample: CommitmentSample {
                    x: rel.x,
                    y: rel.y,
                    v: speed,
                    t: contest.time_to_point(),
                    committed,
                },
            });
            stats.samples += 1;
            if committed {
                stats.committed += 1;
            }
        }
    }
    (out, stats)
}

/// Build the displacement-baseline dataset: for every tracked instant with a
/// defined heading, the player's own position `horizon` seconds later,
/// expressed in the movement frame at that instant. All samples carry C = 1
/// (the displacement was realized by construction).
pub fn build_displacement_samples(
    tracking: &TrackingSet,
    horizon: f64,
    window: usize,
) -> Result<(Vec<CommitmentSample>, SampleBuildStats)> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "displacement horizon must be positive, got {horizon}"
        )));
    }
    let kin = StateIndex::new(tracking, window);
    let mut stats = SampleBuildStats::default();
    let mut out = Vec::new();
    for (track_idx, track) in tracking.tracks.iter().enumerate() {
        for (si, seg) in track.segments.iter().enumerate() {
            let states = &kin.states[track_idx][si];
            for (fi, &(speed, heading)) in states.iter().enumerate() {
                let Some(heading) = heading else { continue };
                let Some(target) = seg.position_at(seg.t[fi] + horizon) else {
                    stats.players_skipped += 1;
                    continue;
                };
                let rel = relative_location_from_heading(heading, seg.pos[fi], target);
                out.push(CommitmentSample {
                    x: rel.x,
                    y: rel.y,
                    v: speed,
                    t: horizon,
                    committed: true,
                });
                stats.samples += 1;
                stats.committed += 1;
            }
        }
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample_row(match_id: &str, player: &str, team: &str, t: f64, x: f64, y: f64) -> TrackingSample {
        TrackingSample {
            match_id: match_id.into(),
            player_id: player.into(),
            team_id: team.into(),
            t,
            pos: Vec2::new(x, y),
        }
    }

    fn event(match_id: &str, t: f64, kind: TransactionKind, player: &str, team: &str) -> TransactionEvent {
        TransactionEvent {
            match_id: match_id.into(),
            t,
            kind,
            player_id: player.into(),
            team_id: team.into(),
        }
    }

    /// Linear track for one player: pos(t) = start + vel * (t - t0).
    fn linear_track(
        rows: &mut Vec<TrackingSample>,
        player: &str,
        team: &str,
        t0: f64,
        t1: f64,
        start: Vec2,
        vel: Vec2,
    ) {
        let steps = ((t1 - t0) / 0.1).round() as usize;
        for k in 0..=steps {
            let t = t0 + 0.1 * k as f64;
            let p = start + vel * (t - t0);
            rows.push(sample_row("m", player, team, t, p.x, p.y));
        }
    }

    #[test]
    fn align_floors_and_preserves_order() {
        let events = vec![
            event("m", 12.0, TransactionKind::Kick, "a", "t1"),
            event("m", 12.9, TransactionKind::Mark, "b", "t1"),
            event("m", 12.2, TransactionKind::Spoil, "c", "t2"),
        ];
        let aligned = align_transactions(&events);
        assert_eq!(aligned[0].t, 12.0);
        assert_eq!(aligned[1].t, 12.0);
        assert_eq!(aligned[2].t, 12.0);
        assert_eq!(aligned[1].player_id, "b");
        assert_eq!(aligned[2].player_id, "c");
    }

    #[test]
    fn contest_pairs_with_latest_preceding_kick() {
        let mut rows = Vec::new();
        linear_track(&mut rows, "p", "away", 8.0, 14.0, Vec2::new(30.0, 5.0), Vec2::ZERO);
        let (tracking, _) = TrackingSet::from_samples(rows);
        let events = vec![
            event("m", 10.0, TransactionKind::Kick, "k", "home"),
            event("m", 12.0, TransactionKind::Spoil, "p", "away"),
        ];
        let (contests, stats) = extract_contests(&events, &tracking);
        assert_eq!(stats.contests, 1);
        assert_eq!(contests[0].t_p, 10.0);
        assert_eq!(contests[0].t_c, 12.0);
        assert_abs_diff_eq!(contests[0].contest_pos.x, 30.0, epsilon = 1e-9);
        assert_abs_diff_eq!(contests[0].contest_pos.y, 5.0, epsilon = 1e-9);
        assert_eq!(contests[0].kind, ContestKind::Spoil);
        assert_eq!(contests[0].passer_id, "k");
    }

    #[test]
    fn contest_without_recent_kick_is_skipped() {
        let mut rows = Vec::new();
        linear_track(&mut rows, "p", "away", 0.0, 30.0, Vec2::ZERO, Vec2::ZERO);
        let (tracking, _) = TrackingSet::from_samples(rows);
        // No kick at all.
        let (contests, stats) = extract_contests(
            &[event("m", 12.0, TransactionKind::Spoil, "p", "away")],
            &tracking,
        );
        assert!(contests.is_empty());
        assert_eq!(stats.skipped_no_kick, 1);
        // Kick too long ago.
        let (contests, stats) = extract_contests(
            &[
                event("m", 1.0, TransactionKind::Kick, "k", "home"),
                event("m", 12.0, TransactionKind::Spoil, "p", "away"),
            ],
            &tracking,
        );
        assert!(contests.is_empty());
        assert_eq!(stats.skipped_out_of_window, 1);
    }

    #[test]
    fn one_kick_can_feed_two_contests() {
        // Enumerated with a last-kick cursor: both the contested mark at 11
        // and the spoil at 13 pair with the kick at 10.
        let mut rows = Vec::new();
        linear_track(&mut rows, "p1", "home", 8.0, 14.0, Vec2::new(20.0, 0.0), Vec2::ZERO);
        linear_track(&mut rows, "p2", "away", 8.0, 14.0, Vec2::new(22.0, 1.0), Vec2::ZERO);
        let (tracking, _) = TrackingSet::from_samples(rows);
        let events = vec![
            event("m", 10.0, TransactionKind::Kick, "k", "home"),
            event("m", 11.0, TransactionKind::ContestedMark, "p1", "home"),
            event("m", 13.0, TransactionKind::Spoil, "p2", "away"),
        ];
        let (contests, stats) = extract_contests(&events, &tracking);
        assert_eq!(stats.contests, 2);
        assert_eq!(contests[0].t_p, 10.0);
        assert_eq!(contests[1].t_p, 10.0);
        assert_eq!(contests[0].kind, ContestKind::ContestedMark);
        assert_eq!(contests[1].kind, ContestKind::Spoil);
    }

    #[test]
    fn pass_extraction_applies_minimum_distance() {
        let mut rows = Vec::new();
        linear_track(&mut rows, "a", "home", 4.0, 8.0, Vec2::ZERO, Vec2::ZERO);
        linear_track(&mut rows, "b", "home", 4.0, 8.0, Vec2::new(20.0, 0.0), Vec2::ZERO);
        linear_track(&mut rows, "c", "home", 4.0, 8.0, Vec2::new(10.0, 0.0), Vec2::ZERO);
        let (tracking, _) = TrackingSet::from_samples(rows);
        let qualifying = vec![
            event("m", 5.0, TransactionKind::Kick, "a", "home"),
            event("m", 7.0, TransactionKind::Mark, "b", "home"),
        ];
        let (passes, stats) = extract_passes(&qualifying, &tracking);
        assert_eq!(stats.passes, 1);
        assert_abs_diff_eq!(passes[0].distance, 20.0, epsilon = 1e-9);
        assert!(!passes[0].contested);

        let short = vec![
            event("m", 5.0, TransactionKind::Kick, "a", "home"),
            event("m", 7.0, TransactionKind::Mark, "c", "home"),
        ];
        let (passes, stats) = extract_passes(&short, &tracking);
        assert!(passes.is_empty());
        assert_eq!(stats.dropped_short, 1);
    }

    #[test]
    fn pass_fixture_counts_cross_check() {
        // Hand-built 10-event fixture. Expected passes: a->b (mark, 20 m),
        // a->d (contested mark, 18 m). Dropped: short mark (10 m), spoiled
        // chain, cross-team mark.
        let mut rows = Vec::new();
        linear_track(&mut rows, "a", "home", 0.0, 60.0, Vec2::ZERO, Vec2::ZERO);
        linear_track(&mut rows, "b", "home", 0.0, 60.0, Vec2::new(20.0, 0.0), Vec2::ZERO);
        linear_track(&mut rows, "c", "home", 0.0, 60.0, Vec2::new(10.0, 0.0), Vec2::ZERO);
        linear_track(&mut rows, "d", "home", 0.0, 60.0, Vec2::new(0.0, 18.0), Vec2::ZERO);
        linear_track(&mut rows, "e", "away", 0.0, 60.0, Vec2::new(30.0, 0.0), Vec2::ZERO);
        let (tracking, _) = TrackingSet::from_samples(rows);
        let events = vec![
            event("m", 5.0, TransactionKind::Kick, "a", "home"),
            event("m", 7.0, TransactionKind::Mark, "b", "home"), // pass 1
            event("m", 10.0, TransactionKind::Kick, "a", "home"),
            event("m", 12.0, TransactionKind::Mark, "c", "home"), // short, dropped
            event("m", 15.0, TransactionKind::Kick, "a", "home"),
            event("m", 16.0, TransactionKind::Spoil, "e", "away"), // chain ends
            event("m", 20.0, TransactionKind::Mark, "b", "home"), // no pending kick
            event("m", 25.0, TransactionKind::Kick, "a", "home"),
            event("m", 27.0, TransactionKind::ContestedMark, "d", "home"), // pass 2
            event("m", 30.0, TransactionKind::Other, "a", "home"),
        ];
        let (passes, stats) = extract_passes(&events, &tracking);
        assert_eq!(stats.passes, 2);
        assert_eq!(stats.dropped_short, 1);
        assert_eq!(passes[0].receiver_id, "b");
        assert_eq!(passes[1].receiver_id, "d");
        assert!(passes[1].contested);
    }

    #[test]
    fn commitment_labels_follow_two_meter_rule() {
        let mut rows = Vec::new();
        // Kicker: stays at origin.
        linear_track(&mut rows, "kick", "home", 8.0, 13.0, Vec2::ZERO, Vec2::ZERO);
        // Contest anchor at (30, 0) throughout (also defines contest_pos).
        linear_track(&mut rows, "win", "home", 8.0, 13.0, Vec2::new(30.0, 0.0), Vec2::ZERO);
        // Far player: 50 m away, stationary.
        linear_track(&mut rows, "far", "away", 8.0, 13.0, Vec2::new(30.0, 50.0), Vec2::ZERO);
        // Runner: arrives exactly at the contest by t_c = 12 from (30, -8) at 2 m/s.
        linear_track(&mut rows, "run", "away", 8.0, 13.0, Vec2::new(30.0, -8.0), Vec2::new(0.0, 2.0));
        let (tracking, _) = TrackingSet::from_samples(rows);
        let events = vec![
            event("m", 10.0, TransactionKind::Kick, "kick", "home"),
            event("m", 12.0, TransactionKind::ContestedMark, "win", "home"),
        ];
        let (contests, _) = extract_contests(&events, &tracking);
        let (samples, stats) = build_commitment_samples(&contests, &tracking, 1);
        assert_eq!(stats.samples, 3); // kicker excluded
        let by_player: HashMap<_, _> = samples
            .iter()
            .map(|s| (s.player_id.as_str(), &s.sample))
            .collect();
        assert!(by_player["win"].committed);
        assert!(!by_player["far"].committed);
        assert!(by_player["run"].committed);
        for s in &samples {
            assert_eq!(s.sample.t, 2.0);
        }
        // Runner's movement frame at t_p: heading (0, 1), contest 4 m ahead.
        let run = by_player["run"];
        assert_abs_diff_eq!(run.x, 4.0, epsilon = 1e-6);
        assert_abs_diff_eq!(run.y, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(run.v, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn off_field_players_excluded_and_lost_tracking_counted() {
        let mut rows = Vec::new();
        linear_track(&mut rows, "kick", "home", 8.0, 13.0, Vec2::ZERO, Vec2::ZERO);
        linear_track(&mut rows, "win", "home", 8.0, 13.0, Vec2::new(30.0, 0.0), Vec2::ZERO);
        // Late entrant: tracking starts after t_p = 10, so never a candidate.
        linear_track(&mut rows, "late", "away", 10.5, 13.0, Vec2::new(25.0, 0.0), Vec2::ZERO);
        // Tracked at the kick but gone before t_c = 12.
        linear_track(&mut rows, "gone", "away", 8.0, 11.0, Vec2::new(10.0, 10.0), Vec2::ZERO);
        let (tracking, _) = TrackingSet::from_samples(rows);
        let events = vec![
            event("m", 10.0, TransactionKind::Kick, "kick", "home"),
            event("m", 12.0, TransactionKind::ContestedMark, "win", "home"),
        ];
        let (contests, _) = extract_contests(&events, &tracking);
        let (samples, stats) = build_commitment_samples(&contests, &tracking, 1);
        assert_eq!(samples.len(), 1);
        assert_eq!(samples[0].player_id, "win");
        assert_eq!(stats.players_skipped, 1); // only "gone"
    }

    #[test]
    fn displacement_samples_for_uniform_motion() {
        let mut rows = Vec::new();
        linear_track(&mut rows, "p", "home", 0.0, 6.0, Vec2::ZERO, Vec2::new(2.0, 0.0));
        let (tracking, _) = TrackingSet::from_samples(rows);
        let (samples, _) = build_displacement_samples(&tracking, 2.0, 1).unwrap();
        assert!(!samples.is_empty());
        for s in &samples {
            assert_abs_diff_eq!(s.x, 4.0, epsilon = 1e-6);
            assert_abs_diff_eq!(s.y, 0.0, epsilon = 1e-6);
            assert_abs_diff_eq!(s.v, 2.0, epsilon = 1e-6);
            assert_eq!(s.t, 2.0);
            assert!(s.committed);
        }
    }

    #[test]
    fn stationary_player_produces_no_displacement_samples() {
        let mut rows = Vec::new();
        linear_track(&mut rows, "p", "home", 0.0, 6.0, Vec2::new(5.0, 5.0), Vec2::ZERO);
        let (tracking, _) = TrackingSet::from_samples(rows);
        let (samples, _) = build_displacement_samples(&tracking, 2.0, 1).unwrap();
        assert!(samples.is_empty());
    }

    #[test]
    fn u_turn_produces_negative_x_displacement() {
        // Out along +x for 2 s at 1 m/s, then straight back.
        let mut rows = Vec::new();
        for k in 0..=40 {
            let t = 0.1 * k as f64;
            let x = if t <= 2.0 { t } else { 2.0 - (t - 2.0) };
            rows.push(sample_row("m", "p", "home", t, x, 0.0));
        }
        let (tracking, _) = TrackingSet::from_samples(rows);
        let (samples, _) = build_displacement_samples(&tracking, 2.0, 1).unwrap();
        // At tau = 1.5 (heading +x), position at 3.5 is x = 0.5, so the
        // relative displacement is 0.5 - 1.5 = -1.
        let s = samples
            .iter()
            .find(|s| (s.x - (-1.0)).abs() < 1e-6)
            .expect("expected a -1 m relative displacement");
        assert_abs_diff_eq!(s.v, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn contests_and_passes_pair_within_their_match() {
        let mut rows = Vec::new();
        linear_track(&mut rows, "p", "home", 8.0, 14.0, Vec2::new(30.0, 0.0), Vec2::ZERO);
        let mut rows2: Vec<TrackingSample> = rows
            .iter()
            .map(|s| TrackingSample {
                match_id: "m2".into(),
                ..s.clone()
            })
            .collect();
        rows.append(&mut rows2);
        let (tracking, _) = TrackingSet::from_samples(rows);
        // Interleaved events from two matches: each contest must pair with
        // its own match's kick.
        let events = vec![
            event("m", 10.0, TransactionKind::Kick, "k1", "home"),
            {
                let mut e = event("m2", 11.0, TransactionKind::Kick, "k2", "away");
                e.match_id = "m2".into();
                e
            },
            {
                let mut e = event("m2", 13.0, TransactionKind::Spoil, "p", "home");
                e.match_id = "m2".into();
                e
            },
            event("m", 12.0, TransactionKind::Spoil, "p", "home"),
        ];
        let (contests, stats) = extract_contests(&events, &tracking);
        assert_eq!(stats.contests, 2);
        assert_eq!(contests[0].match_id, "m2");
        assert_eq!(contests[0].t_p, 11.0);
        assert_eq!(contests[1].match_id, "m");
        assert_eq!(contests[1].t_p, 10.0);
        // Partition sizes always add up.
        let (samples, sstats) = build_commitment_samples(&contests, &tracking, 1);
        let committed = samples.iter().filter(|s| s.sample.committed).count();
        assert_eq!(committed + (samples.len() - committed), sstats.samples);
    }

    #[test]
    fn duplicate_rows_keep_first() {
        let rows = vec![
            sample_row("m", "p", "home", 0.0, 1.0, 1.0),
            sample_row("m", "p", "home", 0.1, 2.0, 1.0),
            sample_row("m", "p", "home", 0.1, 9.0, 9.0),
        ];
        let (tracking, duplicates) = TrackingSet::from_samples(rows);
        assert_eq!(duplicates, 1);
        let p = tracking.position_at("m", "p", 0.1).unwrap();
        assert_eq!(p, Vec2::new(2.0, 1.0));
    }

    #[test]
    fn positions_are_not_interpolated_across_gaps() {
        let rows = vec![
            sample_row("m", "p", "home", 0.0, 0.0, 0.0),
            sample_row("m", "p", "home", 0.1, 1.0, 0.0),
            sample_row("m", "p", "home", 5.0, 50.0, 0.0),
            sample_row("m", "p", "home", 5.1, 51.0, 0.0),
        ];
        let (tracking, _) = TrackingSet::from_samples(rows);
        assert!(tracking.position_at("m", "p", 2.5).is_none());
        assert!(tracking.position_at("m", "p", 0.05).is_some());
        assert!(tracking.position_at("m", "p", 5.05).is_some());
    }
}
