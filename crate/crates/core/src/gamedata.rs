//! Structured game data: box score, shot events, score timeline, and the
//! court geometry used to place shots and WHERE mentions.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Region, StatKey};
use crate::validation::ValidationReport;

/// NBA court and clock constants. Coordinates are feet with the basket at the
/// origin, `x` lateral and `y` toward midcourt.
pub mod court {
    pub const HALF_WIDTH: f64 = 25.0;
    pub const HALF_LENGTH: f64 = 47.0;
    pub const RESTRICTED_RADIUS: f64 = 4.0;
    pub const PAINT_HALF_WIDTH: f64 = 8.0;
    pub const PAINT_DEPTH: f64 = 19.0;
    pub const ARC_RADIUS: f64 = 23.75;
    pub const CORNER_THREE_X: f64 = 22.0;
    pub const CORNER_THREE_MAX_Y: f64 = 14.0;
    /// Free-throw line sits at the top of the paint.
    pub const FREE_THROW_Y: f64 = PAINT_DEPTH;
    pub const FREE_THROW_BAND: f64 = 2.0;
    pub const FREE_THROW_HALF_WIDTH: f64 = 6.0;
    pub const BASELINE_BAND: f64 = 3.0;
    pub const QUARTER_SECONDS: f64 = 720.0;
    pub const OVERTIME_SECONDS: f64 = 300.0;
    pub const REGULATION_PERIODS: u32 = 4;
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error("UNREADABLE_FILE: {path}: {source}")]
    UnreadableFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("SCHEMA_MISMATCH: {0}")]
    SchemaMismatch(String),
    #[error("VALIDATION_FAILED: {0}")]
    ValidationFailed(ValidationReport),
    #[error("OUT_OF_BOUNDS: ({x}, {y}) is not on the half court")]
    OutOfBounds { x: f64, y: f64 },
    #[error("OUT_OF_RANGE: {0}")]
    OutOfRange(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameMeta {
    pub game_id: String,
    pub home_team_id: String,
    pub away_team_id: String,
    pub date: String,
    pub final_home: u32,
    pub final_away: u32,
    pub n_periods: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxScoreRow {
    pub player_id: String,
    pub team_id: String,
    pub minutes: f64,
    pub points: u32,
    pub rebounds: u32,
    pub assists: u32,
    pub steals: u32,
    pub blocks: u32,
    pub turnovers: u32,
    pub fouls: u32,
    pub fgm: u32,
    pub fga: u32,
    pub tpm: u32,
    pub tpa: u32,
    pub ftm: u32,
    pub fta: u32,
}

impl BoxScoreRow {
    /// Box-score value for a stat key; `None` for keys the box score lacks.
    pub fn stat(&self, key: StatKey) -> Option<f64> {
        let v = match key {
            StatKey::Points => self.points,
            StatKey::Rebounds => self.rebounds,
            StatKey::Assists => self.assists,
            StatKey::Steals => self.steals,
            StatKey::Blocks => self.blocks,
            StatKey::Turnovers => self.turnovers,
            StatKey::Fouls => self.fouls,
            StatKey::Minutes => return Some(self.minutes),
            StatKey::Fgm => self.fgm,
            StatKey::Fga => self.fga,
            StatKey::Tpm => self.tpm,
            StatKey::Tpa => self.tpa,
            StatKey::Ftm => self.ftm,
            StatKey::Fta => self.fta,
            StatKey::Touches | StatKey::UnknownStat => return None,
        };
        Some(f64::from(v))
    }

    pub fn computed_points(&self) -> i64 {
        let (fgm, tpm, ftm) = (i64::from(self.fgm), i64::from(self.tpm), i64::from(self.ftm));
        2 * (fgm - tpm) + 3 * tpm + ftm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotEvent {
    pub player_id: String,
    pub team_id: String,
    pub quarter: u32,
    pub clock_seconds_remaining: f64,
    pub x_ft: f64,
    pub y_ft: f64,
    pub made: bool,
    pub value: u8,
}

impl ShotEvent {
    pub fn elapsed(&self) -> Result<f64, GameError> {
        to_elapsed(self.quarter, self.clock_seconds_remaining)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSample {
    pub elapsed_seconds: f64,
    pub home_score: u32,
    pub away_score: u32,
}

/// Game JSON file: `{"meta":…, "box_score":[…], "shots":[…], "timeline":[…]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameData {
    #[serde(default = "default_schema_version")]
    pub schema_version: String,
    pub meta: GameMeta,
    pub box_score: Vec<BoxScoreRow>,
    pub shots: Vec<ShotEvent>,
    pub timeline: Vec<ScoreSample>,
}

fn default_schema_version() -> String {
    crate::domain::SCHEMA_VERSION.to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationMode {
    /// Any violation fails the load.
    Strict,
    /// Violations are returned alongside the data.
    Lenient,
}

#[derive(Debug, Clone)]
pub struct LoadedGame {
    pub data: GameData,
    pub report: ValidationReport,
}

impl GameData {
    pub fn from_json(text: &str) -> Result<Self, GameError> {
        serde_json::from_str(text).map_err(|e| GameError::SchemaMismatch(e.to_string()))
    }

    pub fn team_ids(&self) -> [&str; 2] {
        [&self.meta.home_team_id, &self.meta.away_team_id]
    }

    pub fn player(&self, player_id: &str) -> Option<&BoxScoreRow> {
        self.box_score.iter().find(|r| r.player_id == player_id)
    }

    /// Players and teams that appear in this game.
    pub fn roster(&self) -> BTreeSet<&str> {
        self.box_score
            .iter()
            .map(|r| r.player_id.as_str())
            .chain(self.team_ids())
            .collect()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        let meta = &self.meta;
        if meta.home_team_id == meta.away_team_id {
            r.push("TEAMS_NOT_DISTINCT", format!("home and away are both `{}`", meta.home_team_id));
        }
        if meta.n_periods < court::REGULATION_PERIODS {
            r.push("N_PERIODS", format!("n_periods {} < 4", meta.n_periods));
        }
        let teams = self.team_ids();

        let mut seen = BTreeSet::new();
        let mut team_points: BTreeMap<&str, i64> = BTreeMap::new();
        for row in &self.box_score {
            let who = &row.player_id;
            if !seen.insert(who.as_str()) {
                r.push("DUPLICATE_PLAYER", format!("`{who}` has more than one row"));
            }
            if !teams.contains(&row.team_id.as_str()) {
                r.push("UNKNOWN_TEAM", format!("`{who}` plays for unknown team `{}`", row.team_id));
            }
            if !(row.minutes >= 0.0 && row.minutes.is_finite()) {
                r.push("NEGATIVE_MINUTES", format!("`{who}` minutes {}", row.minutes));
            }
            for (code, made, att) in [
                ("FGM_GT_FGA", row.fgm, row.fga),
                ("TPM_GT_TPA", row.tpm, row.tpa),
                ("FTM_GT_FTA", row.ftm, row.fta),
                ("TPM_GT_FGM", row.tpm, row.fgm),
                ("TPA_GT_FGA", row.tpa, row.fga),
            ] {
                if made > att {
                    r.push(code, format!("`{who}`: {made} > {att}"));
                }
            }
            if i64::from(row.points) != row.computed_points() {
                r.push(
                    "POINTS_IDENTITY",
                    format!(
                        "`{who}`: points {} but 2(fgm-tpm)+3tpm+ftm = {}",
                        row.points,
                        row.computed_points()
                    ),
                );
            }
            *team_points.entry(row.team_id.as_str()).or_default() += i64::from(row.points);
        }
        if !self.box_score.is_empty() {
            for (team, final_score) in [
                (meta.home_team_id.as_str(), meta.final_home),
                (meta.away_team_id.as_str(), meta.final_away),
            ] {
                let sum = team_points.get(team).copied().unwrap_or(0);
                if sum != i64::from(final_score) {
                    r.push(
                        "TEAM_POINTS_MISMATCH",
                        format!("`{team}` players sum to {sum}, final score is {final_score}"),
                    );
                }
            }
        }

        for (i, shot) in self.shots.iter().enumerate() {
            if !seen.contains(shot.player_id.as_str()) {
                r.push("SHOT_UNKNOWN_PLAYER", format!("shot {i}: `{}` not in box score", shot.player_id));
            }
            if shot.quarter == 0 || shot.quarter > meta.n_periods {
                r.push("SHOT_QUARTER", format!("shot {i}: quarter {}", shot.quarter));
            }
            if let Err(e) = to_elapsed(shot.quarter.max(1), shot.clock_seconds_remaining) {
                r.push("SHOT_CLOCK", format!("shot {i}: {e}"));
            }
            if shot.value != 2 && shot.value != 3 {
                r.push("SHOT_VALUE", format!("shot {i}: value {}", shot.value));
            }
            match classify_region(shot.x_ft, shot.y_ft) {
                Ok(region) => {
                    if (region == Region::ThreePoint) != (shot.value == 3) {
                        r.push(
                            "SHOT_VALUE_REGION",
                            format!("shot {i}: value {} from {region}", shot.value),
                        );
                    }
                }
                Err(e) => r.push("SHOT_OUT_OF_BOUNDS", format!("shot {i}: {e}")),
            }
        }

        match self.timeline.last() {
            None => r.push("TIMELINE_EMPTY", "timeline has no samples"),
            Some(last) => {
                if (last.home_score, last.away_score) != (meta.final_home, meta.final_away) {
                    r.push(
                        "TIMELINE_FINAL_MISMATCH",
                        format!(
                            "last sample {}-{} but final is {}-{}",
                            last.home_score, last.away_score, meta.final_home, meta.final_away
                        ),
                    );
                }
            }
        }
        for (i, pair) in self.timeline.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if b.elapsed_seconds <= a.elapsed_seconds {
                r.push("TIMELINE_ORDER", format!("sample {} not after sample {i}", i + 1));
            }
            if b.home_score < a.home_score || b.away_score < a.away_score {
                r.push("TIMELINE_NOT_MONOTONE", format!("score decreases at sample {}", i + 1));
            }
        }
        if self.timeline.first().is_some_and(|s| s.elapsed_seconds < 0.0) {
            r.push("TIMELINE_ORDER", "negative elapsed time");
        }
        r
    }
}

/// Parse and validate a game file.
pub fn load_game(path: impl AsRef<Path>, mode: ValidationMode) -> Result<LoadedGame, GameError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| GameError::UnreadableFile {
        path: path.display().to_string(),
        source,
    })?;
    load_game_str(&text, mode)
}

pub fn load_game_str(text: &str, mode: ValidationMode) -> Result<LoadedGame, GameError> {
    let data = GameData::from_json(text)?;
    let report = data.validate();
    if mode == ValidationMode::Strict && !report.is_empty() {
        return Err(GameError::ValidationFailed(report));
    }
    Ok(LoadedGame { data, report })
}

/// Partition region of a half-court point.
pub fn classify_region(x_ft: f64, y_ft: f64) -> Result<Region, GameError> {
    use court::*;
    let in_bounds = x_ft.abs() <= HALF_WIDTH && (0.0..=HALF_LENGTH).contains(&y_ft);
    if !in_bounds {
        return Err(GameError::OutOfBounds { x: x_ft, y: y_ft });
    }
    let r = x_ft.hypot(y_ft);
    Ok(if r <= RESTRICTED_RADIUS {
        Region::RestrictedArea
    } else if x_ft.abs() <= PAINT_HALF_WIDTH && y_ft <= PAINT_DEPTH {
        Region::Paint
    } else if (y_ft <= CORNER_THREE_MAX_Y && x_ft.abs() >= CORNER_THREE_X) || r >= ARC_RADIUS {
        Region::ThreePoint
    } else {
        Region::Midrange
    })
}

/// Whether a point lies in `region`. Unlike [`classify_region`] the regions
/// overlap: the paint includes the restricted area, corners and the baseline
/// band cut across the partition.
pub fn region_contains(region: Region, x_ft: f64, y_ft: f64) -> bool {
    use court::*;
    let Ok(base) = classify_region(x_ft, y_ft) else {
        return false;
    };
    match region {
        Region::RestrictedArea | Region::Midrange | Region::ThreePoint => base == region,
        Region::Paint => matches!(base, Region::Paint | Region::RestrictedArea),
        Region::Corner => y_ft <= CORNER_THREE_MAX_Y && x_ft.abs() >= CORNER_THREE_X,
        Region::FreeThrowLine => {
            x_ft.abs() <= FREE_THROW_HALF_WIDTH && (y_ft - FREE_THROW_Y).abs() <= FREE_THROW_BAND
        }
        Region::Baseline => y_ft <= BASELINE_BAND,
    }
}

/// Seconds since tipoff for a period and countdown clock. Regulation quarters
/// are 720 s; each overtime period is 300 s.
pub fn to_elapsed(quarter: u32, clock_seconds_remaining: f64) -> Result<f64, GameError> {
    let (start, length) = period_bounds(quarter)?;
    if !(0.0..=length).contains(&clock_seconds_remaining) {
        return Err(GameError::OutOfRange(format!(
            "clock {clock_seconds_remaining} outside [0, {length}] for period {quarter}"
        )));
    }
    Ok(start + (length - clock_seconds_remaining))
}

/// `(elapsed at period start, period length)`.
pub fn period_bounds(quarter: u32) -> Result<(f64, f64), GameError> {
    use court::*;
    match quarter {
        0 => Err(GameError::OutOfRange("period 0".into())),
        q if q <= REGULATION_PERIODS => Ok((QUARTER_SECONDS * f64::from(q - 1), QUARTER_SECONDS)),
        q => Ok((
            QUARTER_SECONDS * f64::from(REGULATION_PERIODS)
                + OVERTIME_SECONDS * f64::from(q - REGULATION_PERIODS - 1),
            OVERTIME_SECONDS,
        )),
    }
}

/// Shot filter; absent fields do not constrain.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShotSelector {
    pub players: Option<BTreeSet<String>>,
    pub teams: Option<BTreeSet<String>>,
    pub quarter: Option<u32>,
    /// Elapsed-seconds window, inclusive.
    pub time_range: Option<(f64, f64)>,
    pub regions: Option<BTreeSet<Region>>,
    pub made: Option<bool>,
}

impl ShotSelector {
    pub fn matches(&self, shot: &ShotEvent) -> bool {
        self.players.as_ref().is_none_or(|p| p.contains(&shot.player_id))
            && self.teams.as_ref().is_none_or(|t| t.contains(&shot.team_id))
            && self.quarter.is_none_or(|q| q == shot.quarter)
            && self.time_range.is_none_or(|(lo, hi)| {
                shot.elapsed().is_ok_and(|e| lo <= e && e <= hi)
            })
            && self.regions.as_ref().is_none_or(|rs| {
                rs.iter().any(|&r| region_contains(r, shot.x_ft, shot.y_ft))
            })
            && self.made.is_none_or(|m| m == shot.made)
    }

    /// Conjunction of two selectors. `None` when they can never both hold, or
    /// when both carry different region sets, which one selector cannot express.
    pub fn and(&self, other: &ShotSelector) -> Option<ShotSelector> {
        fn both<T: Ord + Clone>(a: &Option<BTreeSet<T>>, b: &Option<BTreeSet<T>>) -> Option<BTreeSet<T>> {
            match (a, b) {
                (Some(a), Some(b)) => Some(a.intersection(b).cloned().collect()),
                (Some(a), None) | (None, Some(a)) => Some(a.clone()),
                (None, None) => None,
            }
        }
        fn same<T: PartialEq + Copy>(a: Option<T>, b: Option<T>) -> Result<Option<T>, ()> {
            match (a, b) {
                (Some(a), Some(b)) if a != b => Err(()),
                (a, b) => Ok(a.or(b)),
            }
        }
        let time_range = match (self.time_range, other.time_range) {
            (Some((a0, a1)), Some((b0, b1))) => {
                let (lo, hi) = (a0.max(b0), a1.min(b1));
                if lo > hi {
                    return None;
                }
                Some((lo, hi))
            }
            (a, b) => a.or(b),
        };
        // Region sets are unions of overlapping areas, so they cannot be
        // intersected element-wise; intersection happens shot by shot.
        let regions = match (&self.regions, &other.regions) {
            (Some(a), Some(b)) if a != b => return None,
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        Some(ShotSelector {
            players: both(&self.players, &other.players),
            teams: both(&self.teams, &other.teams),
            quarter: same(self.quarter, other.quarter).ok()?,
            time_range,
            regions,
            made: same(self.made, other.made).ok()?,
        })
    }
}

/// Shots satisfying every populated selector field, in original order.
pub fn filter_shots(shots: &[ShotEvent], selector: &ShotSelector) -> Vec<ShotEvent> {
    shots.iter().filter(|s| selector.matches(s)).cloned().collect()
}
