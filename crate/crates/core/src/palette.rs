//! Chair parts and the fixed six-color palette.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A segmentable chair component. Integer codes are stable (`0..4`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PartKind {
    Arms = 0,
    Back = 1,
    Seat = 2,
    Legs = 3,
}

impl PartKind {
    pub const ALL: [PartKind; 4] = [PartKind::Arms, PartKind::Back, PartKind::Seat, PartKind::Legs];
    pub const COUNT: usize = 4;

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            PartKind::Arms => "arms",
            PartKind::Back => "back",
            PartKind::Seat => "seat",
            PartKind::Legs => "legs",
        }
    }
}

impl fmt::Display for PartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PartKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown part kind `{s}`"))
    }
}

/// One of the six palette colors. Integer codes are stable (`0..6`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ColorId {
    Red = 0,
    Green = 1,
    Blue = 2,
    Magenta = 3,
    Yellow = 4,
    Cyan = 5,
}

impl ColorId {
    pub const ALL: [ColorId; 6] = [
        ColorId::Red,
        ColorId::Green,
        ColorId::Blue,
        ColorId::Magenta,
        ColorId::Yellow,
        ColorId::Cyan,
    ];
    pub const COUNT: usize = 6;

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    /// Linear RGB triple; primaries and secondaries only.
    pub fn rgb(self) -> [f32; 3] {
        match self {
            ColorId::Red => [1.0, 0.0, 0.0],
            ColorId::Green => [0.0, 1.0, 0.0],
            ColorId::Blue => [0.0, 0.0, 1.0],
            ColorId::Magenta => [1.0, 0.0, 1.0],
            ColorId::Yellow => [1.0, 1.0, 0.0],
            ColorId::Cyan => [0.0, 1.0, 1.0],
        }
    }

    pub fn rgb8(self) -> [u8; 3] {
        self.rgb().map(|c| (c * 255.0) as u8)
    }

    pub fn name(self) -> &'static str {
        match self {
            ColorId::Red => "red",
            ColorId::Green => "green",
            ColorId::Blue => "blue",
            ColorId::Magenta => "magenta",
            ColorId::Yellow => "yellow",
            ColorId::Cyan => "cyan",
        }
    }

    /// Nearest palette entry to an arbitrary RGB triple (squared distance, lowest code wins ties).
    pub fn nearest(rgb: [f32; 3]) -> ColorId {
        let mut best = ColorId::Red;
        let mut best_d = f32::INFINITY;
        for c in Self::ALL {
            let p = c.rgb();
            let d: f32 = (0..3).map(|i| (p[i] - rgb[i]) * (p[i] - rgb[i])).sum();
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        best
    }
}

impl fmt::Display for ColorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ColorId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown color `{s}`"))
    }
}
