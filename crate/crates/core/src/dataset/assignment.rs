//! Injective part-to-color assignments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::palette::{ColorId, PartKind};

/// Colors of the four part slots, indexed by part code. Absent parts are `None`.
///
/// Construction through [`ColorAssignment::new`] guarantees that no two parts
/// share a color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[Option<ColorId>; 4]", into = "[Option<ColorId>; 4]")]
pub struct ColorAssignment([Option<ColorId>; 4]);

impl ColorAssignment {
    pub fn new(slots: [Option<ColorId>; 4]) -> Result<Self> {
        let mut seen = [false; ColorId::COUNT];
        for c in slots.iter().flatten() {
            if std::mem::replace(&mut seen[c.code()], true) {
                return Err(Error::invalid(format!("color {c} assigned to two parts")));
            }
        }
        Ok(ColorAssignment(slots))
    }

    pub fn from_pairs(pairs: &[(PartKind, ColorId)]) -> Result<Self> {
        let mut slots = [None; 4];
        for &(p, c) in pairs {
            if slots[p.code()].replace(c).is_some() {
                return Err(Error::invalid(format!("part {p} assigned twice")));
            }
        }
        Self::new(slots)
    }

    pub fn color(&self, part: PartKind) -> Option<ColorId> {
        self.0[part.code()]
    }

    pub fn slots(&self) -> &[Option<ColorId>; 4] {
        &self.0
    }

    pub fn parts(&self) -> impl Iterator<Item = PartKind> + '_ {
        PartKind::ALL.into_iter().filter(|p| self.0[p.code()].is_some())
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = [false; ColorId::COUNT];
        self.0
            .iter()
            .flatten()
            .all(|c| !std::mem::replace(&mut seen[c.code()], true))
    }
}

impl TryFrom<[Option<ColorId>; 4]> for ColorAssignment {
    type Error = Error;

    fn try_from(slots: [Option<ColorId>; 4]) -> Result<Self> {
        Self::new(slots)
    }
}

impl From<ColorAssignment> for [Option<ColorId>; 4] {
    fn from(a: ColorAssignment) -> Self {
        a.0
    }
}

/// Number of injective assignments of the six colors to `k` parts: `6!/(6-k)!`.
pub fn variation_count(k: usize) -> usize {
    (0..k).map(|i| ColorId::COUNT - i).product()
}

/// All injective assignments of the palette to `parts`, ordered
/// lexicographically by (part code, color code). The position of an
/// assignment in this list is its rank.
pub fn enumerate_assignments(parts: &[PartKind]) -> Result<Vec<ColorAssignment>> {
    if parts.is_empty() {
        return Err(Error::invalid("part set is empty"));
    }
    let mut sorted = parts.to_vec();
    sorted.sort();
    sorted.dedup();

    let mut out = Vec::with_capacity(variation_count(sorted.len()));
    let mut slots = [None; 4];
    let mut used = [false; ColorId::COUNT];
    fill(&sorted, 0, &mut slots, &mut used, &mut out);
    Ok(out)
}

fn fill(
    parts: &[PartKind],
    depth: usize,
    slots: &mut [Option<ColorId>; 4],
    used: &mut [bool; ColorId::COUNT],
    out: &mut Vec<ColorAssignment>,
) {
    let Some(&part) = parts.get(depth) else {
        out.push(ColorAssignment(*slots));
        return;
    };
    for color in ColorId::ALL {
        if used[color.code()] {
            continue;
        }
        used[color.code()] = true;
        slots[part.code()] = Some(color);
        fill(parts, depth + 1, slots, used, out);
        slots[part.code()] = None;
        used[color.code()] = false;
    }
}

/// Rank of `assignment` within `enumerate_assignments(assignment.parts())`.
pub fn assignment_rank(assignment: &ColorAssignment) -> usize {
    let mut rank = 0;
    let mut used = [false; ColorId::COUNT];
    let parts: Vec<PartKind> = assignment.parts().collect();
    for (depth, part) in parts.iter().enumerate() {
        let color = assignment.color(*part).expect("part present");
        let smaller_free = ColorId::ALL[..color.code()]
            .iter()
            .filter(|c| !used[c.code()])
            .count();
        rank += smaller_free * variation_count_from(parts.len() - depth - 1, depth + 1);
        used[color.code()] = true;
    }
    rank
}

// Injective fillings of `remaining` slots when `taken` colors are already used.
fn variation_count_from(remaining: usize, taken: usize) -> usize {
    (0..remaining).map(|i| ColorId::COUNT - taken - i).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    // Independent oracle: filter the full 6^k product for injectivity.
    fn brute_force(parts: &[PartKind]) -> Vec<Vec<usize>> {
        let k = parts.len();
        let mut out = Vec::new();
        for code in 0..6usize.pow(k as u32) {
            let mut digits = vec![0; k];
            let mut c = code;
            for d in (0..k).rev() {
                digits[d] = c % 6;
                c /= 6;
            }
            let set: HashSet<_> = digits.iter().collect();
            if set.len() == k {
                out.push(digits);
            }
        }
        out
    }

    #[test]
    fn four_parts_give_360() {
        let all = enumerate_assignments(&PartKind::ALL).unwrap();
        assert_eq!(all.len(), 360);
        assert!(all.iter().all(ColorAssignment::is_injective));
    }

    #[test]
    fn single_seat_gives_six() {
        let all = enumerate_assignments(&[PartKind::Seat]).unwrap();
        assert_eq!(all.len(), 6);
        for (i, a) in all.iter().enumerate() {
            assert_eq!(a.color(PartKind::Seat), ColorId::from_code(i));
            assert_eq!(a.color(PartKind::Arms), None);
        }
    }

    #[test]
    fn three_parts_match_brute_force() {
        let parts = [PartKind::Back, PartKind::Seat, PartKind::Legs];
        let all = enumerate_assignments(&parts).unwrap();
        let oracle = brute_force(&parts);
        assert_eq!(all.len(), 120);
        assert_eq!(oracle.len(), 120);
        // Lexicographic order coincides with the oracle's base-6 counting order.
        for (a, digits) in all.iter().zip(&oracle) {
            let got: Vec<usize> = parts.iter().map(|p| a.color(*p).unwrap().code()).collect();
            assert_eq!(&got, digits);
        }
    }

    #[test]
    fn counts_for_every_nonempty_subset() {
        for mask in 1u8..16 {
            let parts: Vec<PartKind> = PartKind::ALL
                .into_iter()
                .filter(|p| mask & (1 << p.code()) != 0)
                .collect();
            let all = enumerate_assignments(&parts).unwrap();
            assert_eq!(all.len(), brute_force(&parts).len());
            assert_eq!(all.len(), variation_count(parts.len()));
            for (rank, a) in all.iter().enumerate() {
                assert_eq!(assignment_rank(a), rank);
            }
        }
    }

    #[test]
    fn empty_part_set_is_rejected() {
        assert!(matches!(enumerate_assignments(&[]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn duplicate_color_is_rejected() {
        let r = ColorAssignment::new([Some(ColorId::Red), None, Some(ColorId::Red), None]);
        assert!(r.is_err());
        let json = r#"["Red",null,"Red",null]"#;
        assert!(serde_json::from_str::<ColorAssignment>(json).is_err());
    }
}
