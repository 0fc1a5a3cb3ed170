//! The fixed set of twenty shape concepts and their discrete level range.

use serde::{Deserialize, Serialize};

use crate::palette::PartKind;

/// Number of discrete levels per concept (`0..=MAX_LEVEL`).
pub const LEVELS: u8 = 5;
pub const MAX_LEVEL: u8 = LEVELS - 1;
/// Level used for a neutral, uninformed descriptor.
pub const MID_LEVEL: u8 = 2;

/// A semantic shape attribute. The discriminant is the concept's slot in the
/// attribute vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Concept {
    Armrests = 0,
    LegThickness = 1,
    LegLength = 2,
    LegSplay = 3,
    Pedestal = 4,
    BackHeight = 5,
    Curvature = 6,
    BackTilt = 7,
    BackSlats = 8,
    SeatWidth = 9,
    SeatDepth = 10,
    SeatThickness = 11,
    ArmLength = 12,
    ArmThickness = 13,
    ArmHeight = 14,
    Size = 15,
    Modern = 16,
    Ornate = 17,
    Heavy = 18,
    BackWidth = 19,
}

impl Concept {
    pub const COUNT: usize = 20;

    pub const ALL: [Concept; 20] = [
        Concept::Armrests,
        Concept::LegThickness,
        Concept::LegLength,
        Concept::LegSplay,
        Concept::Pedestal,
        Concept::BackHeight,
        Concept::Curvature,
        Concept::BackTilt,
        Concept::BackSlats,
        Concept::SeatWidth,
        Concept::SeatDepth,
        Concept::SeatThickness,
        Concept::ArmLength,
        Concept::ArmThickness,
        Concept::ArmHeight,
        Concept::Size,
        Concept::Modern,
        Concept::Ornate,
        Concept::Heavy,
        Concept::BackWidth,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn key(self) -> &'static str {
        match self {
            Concept::Armrests => "armrests",
            Concept::LegThickness => "leg_thickness",
            Concept::LegLength => "leg_length",
            Concept::LegSplay => "leg_splay",
            Concept::Pedestal => "pedestal",
            Concept::BackHeight => "back_height",
            Concept::Curvature => "curvature",
            Concept::BackTilt => "back_tilt",
            Concept::BackSlats => "back_slats",
            Concept::SeatWidth => "seat_width",
            Concept::SeatDepth => "seat_depth",
            Concept::SeatThickness => "seat_thickness",
            Concept::ArmLength => "arm_length",
            Concept::ArmThickness => "arm_thickness",
            Concept::ArmHeight => "arm_height",
            Concept::Size => "size",
            Concept::Modern => "modern",
            Concept::Ornate => "ornate",
            Concept::Heavy => "heavy",
            Concept::BackWidth => "back_width",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.key() == key)
    }

    /// The part a part-qualified adjective ("thick legs", "high back") refers to.
    pub fn scope(self) -> Option<PartKind> {
        use Concept::*;
        match self {
            LegThickness | LegLength | LegSplay => Some(PartKind::Legs),
            BackHeight | BackTilt | BackSlats | BackWidth => Some(PartKind::Back),
            SeatWidth | SeatDepth | SeatThickness => Some(PartKind::Seat),
            ArmLength | ArmThickness | ArmHeight => Some(PartKind::Arms),
            Armrests | Pedestal | Curvature | Size | Modern | Ornate | Heavy => None,
        }
    }
}

/// Maps a normalized style value in `[0, 1]` to a level: thresholds at 0.2, 0.4, 0.6, 0.8.
pub fn level_of(value: f64) -> u8 {
    let v = value.clamp(0.0, 1.0);
    ((v * LEVELS as f64).floor() as u8).min(MAX_LEVEL)
}
