//! Parametric chair shapes, their semantic attribute levels, and the text
//! importer for pre-segmented part meshes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::mesh::{aabb, hexahedron, octagonal_prism, post, PartMesh, Point3};
use crate::concept::{level_of, Concept, MAX_LEVEL};
use crate::error::{Error, Result};
use crate::palette::PartKind;

pub type ShapeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegStyle {
    FourPosts,
    Pedestal,
    Sled,
}

/// Style of a parametric chair. Every scalar is normalized to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StyleParams {
    pub seat_width: f64,
    pub seat_depth: f64,
    pub seat_height: f64,
    pub seat_thickness: f64,
    pub back_height: f64,
    pub back_width: f64,
    pub back_curvature: f64,
    pub back_tilt: f64,
    /// Below 0.2 the back is a solid panel, above it a frame with 2 to 5 slats.
    pub back_slats: f64,
    pub leg_thickness: f64,
    pub leg_splay: f64,
    pub leg_style: LegStyle,
    pub has_arms: bool,
    pub arm_length: f64,
    pub arm_thickness: f64,
    pub arm_height: f64,
    pub modernity: f64,
    pub ornament: f64,
}

impl Default for StyleParams {
    fn default() -> Self {
        StyleParams {
            seat_width: 0.5,
            seat_depth: 0.5,
            seat_height: 0.5,
            seat_thickness: 0.5,
            back_height: 0.5,
            back_width: 0.5,
            back_curvature: 0.5,
            back_tilt: 0.5,
            back_slats: 0.5,
            leg_thickness: 0.5,
            leg_splay: 0.5,
            leg_style: LegStyle::FourPosts,
            has_arms: true,
            arm_length: 0.5,
            arm_thickness: 0.5,
            arm_height: 0.5,
            modernity: 0.5,
            ornament: 0.5,
        }
    }
}

impl StyleParams {
    fn scalars(&self) -> [(&'static str, f64); 16] {
        [
            ("seat_width", self.seat_width),
            ("seat_depth", self.seat_depth),
            ("seat_height", self.seat_height),
            ("seat_thickness", self.seat_thickness),
            ("back_height", self.back_height),
            ("back_width", self.back_width),
            ("back_curvature", self.back_curvature),
            ("back_tilt", self.back_tilt),
            ("back_slats", self.back_slats),
            ("leg_thickness", self.leg_thickness),
            ("leg_splay", self.leg_splay),
            ("arm_length", self.arm_length),
            ("arm_thickness", self.arm_thickness),
            ("arm_height", self.arm_height),
            ("modernity", self.modernity),
            ("ornament", self.ornament),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.scalars() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("style `{name}` = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Discrete concept levels implied by this style.
    ///
    /// Single-parameter concepts use [`level_of`] (thresholds 0.2/0.4/0.6/0.8);
    /// arm concepts are 0 for armless chairs; presence concepts are 0 or 4.
    pub fn attribute_levels(&self) -> [u8; Concept::COUNT] {
        let arms = |v: f64| if self.has_arms { level_of(v) } else { 0 };
        let mut out = [0u8; Concept::COUNT];
        for c in Concept::ALL {
            out[c.index()] = match c {
                Concept::Armrests => {
                    if self.has_arms {
                        MAX_LEVEL
                    } else {
                        0
                    }
                }
                Concept::LegThickness => level_of(self.leg_thickness),
                Concept::LegLength => level_of(self.seat_height),
                Concept::LegSplay => level_of(self.leg_splay),
                Concept::Pedestal => match self.leg_style {
                    LegStyle::Pedestal => MAX_LEVEL,
                    LegStyle::Sled => MAX_LEVEL / 2,
                    LegStyle::FourPosts => 0,
                },
                Concept::BackHeight => level_of(self.back_height),
                Concept::Curvature => level_of(self.back_curvature),
                Concept::BackTilt => level_of(self.back_tilt),
                Concept::BackSlats => level_of(self.back_slats),
                Concept::SeatWidth => level_of(self.seat_width),
                Concept::SeatDepth => level_of(self.seat_depth),
                Concept::SeatThickness => level_of(self.seat_thickness),
                Concept::ArmLength => arms(self.arm_length),
                Concept::ArmThickness => arms(self.arm_thickness),
                Concept::ArmHeight => arms(self.arm_height),
                Concept::Size => level_of(
                    (self.seat_width + self.seat_depth + self.seat_height + self.back_height) / 4.0,
                ),
                Concept::Modern => level_of(self.modernity),
                Concept::Ornate => level_of(self.ornament),
                Concept::Heavy => level_of((self.leg_thickness + self.seat_thickness) / 2.0),
                Concept::BackWidth => level_of(self.back_width),
            };
        }
        out
    }
}

/// A segmented chair shape. Back, seat and legs are always present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChairShape {
    pub shape_id: ShapeId,
    /// `None` for imported meshes.
    pub style: Option<StyleParams>,
    /// Concept level per concept index.
    pub attributes: [u8; Concept::COUNT],
    pub parts: BTreeMap<PartKind, PartMesh>,
}

impl ChairShape {
    pub fn part_kinds(&self) -> Vec<PartKind> {
        self.parts.keys().copied().collect()
    }

    pub fn validate(&self) -> Result<()> {
        for required in [PartKind::Back, PartKind::Seat, PartKind::Legs] {
            match self.parts.get(&required) {
                Some(m) if !m.is_empty() => {}
                _ => {
                    return Err(Error::invalid(format!(
                        "shape {} is missing part {required}",
                        self.shape_id
                    )))
                }
            }
        }
        for (kind, mesh) in &self.parts {
            if mesh.is_empty() {
                return Err(Error::invalid(format!(
                    "shape {} has an empty {kind} mesh",
                    self.shape_id
                )));
            }
            mesh.validate()?;
        }
        if let Some(style) = &self.style {
            style.validate()?;
        }
        if self.attributes.iter().any(|&l| l > MAX_LEVEL) {
            return Err(Error::invalid(format!(
                "shape {} has a concept level above {MAX_LEVEL}",
                self.shape_id
            )));
        }
        Ok(())
    }

    pub fn triangle_count(&self) -> usize {
        self.parts.values().map(|m| m.triangles.len()).sum()
    }
}

/// Builds a chair from boxes and prisms. The result is deterministic and
/// recentred so its footprint is centred on the origin, floor at `y = -0.5`,
/// fitting inside the unit cube.
pub fn generate_parametric_shape(style: &StyleParams, shape_id: ShapeId) -> Result<ChairShape> {
    style.validate()?;
    let s = style;
    let floor = -0.5;

    let sw = 0.45 + 0.30 * s.seat_width;
    let sd = 0.38 + 0.24 * s.seat_depth;
    let seat_top = floor + 0.28 + 0.20 * s.seat_height;
    let st = 0.03 + 0.07 * s.seat_thickness;
    let seat_bottom = seat_top - st;
    let rear = -sd / 2.0;

    let mut parts = BTreeMap::new();

    // Seat.
    parts.insert(
        PartKind::Seat,
        aabb([-sw / 2.0, seat_bottom, -sd / 2.0], [sw / 2.0, seat_top, sd / 2.0]),
    );

    // Back: a curved, tilted panel or a slatted frame.
    let bh = 0.20 + 0.25 * s.back_height;
    let bw = sw * (0.6 + 0.4 * s.back_width);
    let bt = 0.035;
    let curve = 0.10 * s.back_curvature;
    let tilt = 0.14 * s.back_tilt;
    // Point on the back's front face at horizontal offset `x` and height `y`.
    let back_z = |x: f64, y: f64| {
        let u = 2.0 * x / bw;
        rear + bt + curve * u * u - tilt * (y - seat_top) / bh
    };
    let panel = |x0: f64, x1: f64, y0: f64, y1: f64| {
        hexahedron([
            [x0, y0, back_z(x0, y0) - bt],
            [x1, y0, back_z(x1, y0) - bt],
            [x1, y0, back_z(x1, y0)],
            [x0, y0, back_z(x0, y0)],
            [x0, y1, back_z(x0, y1) - bt],
            [x1, y1, back_z(x1, y1) - bt],
            [x1, y1, back_z(x1, y1)],
            [x0, y1, back_z(x0, y1)],
        ])
    };
    let mut back = PartMesh::default();
    let back_top = seat_top + bh;
    if s.back_slats < 0.2 {
        let segments = 6;
        for i in 0..segments {
            let x0 = -bw / 2.0 + bw * i as f64 / segments as f64;
            let x1 = -bw / 2.0 + bw * (i + 1) as f64 / segments as f64;
            back.append(panel(x0, x1, seat_top, back_top));
        }
    } else {
        let post_w = 0.04;
        let rail_h = 0.05 + 0.05 * s.ornament;
        back.append(panel(-bw / 2.0, -bw / 2.0 + post_w, seat_top, back_top));
        back.append(panel(bw / 2.0 - post_w, bw / 2.0, seat_top, back_top));
        back.append(panel(-bw / 2.0 + post_w, bw / 2.0 - post_w, back_top - rail_h, back_top));
        let slats = 1 + (s.back_slats * 5.0).floor().min(4.0) as usize;
        let inner = bw - 2.0 * post_w;
        let slat_w = 0.03;
        for i in 0..slats {
            let cx = -inner / 2.0 + inner * (i as f64 + 0.5) / slats as f64;
            back.append(panel(cx - slat_w / 2.0, cx + slat_w / 2.0, seat_top, back_top - rail_h));
        }
    }
    if s.ornament >= 0.4 {
        let crest_h = 0.015 + 0.02 * s.ornament;
        back.append(panel(-bw / 4.0, bw / 4.0, back_top, back_top + crest_h));
    }
    if s.ornament >= 0.6 {
        for sign in [-1.0, 1.0] {
            let x = sign * (bw / 2.0 - 0.02);
            back.append(panel(x - 0.02, x + 0.02, back_top, back_top + 0.03));
        }
    }
    parts.insert(PartKind::Back, back);

    // Legs.
    let lt = 0.03 + 0.06 * s.leg_thickness;
    let splay = 0.07 * s.leg_splay;
    let modern = s.modernity >= 0.5;
    let leg = |bottom: Point3, top: Point3, half: f64| {
        if modern {
            octagonal_prism(bottom, top, half * 1.2)
        } else {
            post(bottom, top, half)
        }
    };
    let mut legs = PartMesh::default();
    match s.leg_style {
        LegStyle::FourPosts => {
            let lx = sw / 2.0 - lt / 2.0 - 0.01;
            let lz = sd / 2.0 - lt / 2.0 - 0.01;
            for (sx, sz) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
                let top = [sx * lx, seat_bottom, sz * lz];
                let bottom = [sx * (lx + splay), floor, sz * (lz + splay)];
                legs.append(leg(bottom, top, lt / 2.0));
            }
            if s.ornament >= 0.5 {
                let y = floor + 0.10;
                let frac = 0.1 / (seat_bottom - floor);
                for sx in [-1.0, 1.0] {
                    let x = sx * (lx + splay * (1.0 - frac));
                    let z = lz + splay * (1.0 - frac);
                    legs.append(aabb([x - 0.012, y, -z], [x + 0.012, y + 0.024, z]));
                }
            }
        }
        LegStyle::Pedestal => {
            let r = 0.03 + 0.05 * s.leg_thickness;
            let foot = 0.22 + 0.10 * s.leg_splay;
            legs.append(leg([0.0, floor + 0.04, 0.0], [0.0, seat_bottom, 0.0], r));
            legs.append(aabb([-foot, floor, -0.02], [foot, floor + 0.04, 0.02]));
            legs.append(aabb([-0.02, floor, -foot], [0.02, floor + 0.04, foot]));
        }
        LegStyle::Sled => {
            let lx = sw / 2.0 - lt / 2.0 - 0.01;
            let lz = sd / 2.0 - lt / 2.0 - 0.01;
            let runner_y = floor + lt;
            for sx in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    let top = [sx * lx, seat_bottom, sz * lz];
                    let bottom = [sx * lx, runner_y, sz * (lz + splay)];
                    legs.append(leg(bottom, top, lt / 2.0));
                }
                legs.append(aabb(
                    [sx * lx - lt / 2.0, floor, -(lz + splay + lt / 2.0)],
                    [sx * lx + lt / 2.0, runner_y, lz + splay + lt / 2.0],
                ));
            }
        }
    }
    parts.insert(PartKind::Legs, legs);

    // Arms: a rest bar on each side with a front support.
    if s.has_arms {
        let at = 0.03 + 0.05 * s.arm_thickness;
        let ah = 0.10 + 0.16 * s.arm_height;
        let al = (sd - bt) * (0.5 + 0.5 * s.arm_length);
        let z0 = rear + bt;
        let z1 = z0 + al;
        let mut arms = PartMesh::default();
        for sx in [-1.0, 1.0] {
            let x = sx * (sw / 2.0 + at / 2.0);
            arms.append(aabb(
                [x - at / 2.0, seat_top + ah - at, z0],
                [x + at / 2.0, seat_top + ah, z1],
            ));
            arms.append(post(
                [x, seat_bottom, z1 - at / 2.0],
                [x, seat_top + ah - at, z1 - at / 2.0],
                at / 2.0 * 0.8,
            ));
        }
        parts.insert(PartKind::Arms, arms);
    }

    // Centre the footprint.
    let (mut lo, mut hi) = ([f64::INFINITY; 3], [f64::NEG_INFINITY; 3]);
    for m in parts.values() {
        if let Some((l, h)) = m.bounds() {
            for k in 0..3 {
                lo[k] = lo[k].min(l[k]);
                hi[k] = hi[k].max(h[k]);
            }
        }
    }
    let offset = [-(lo[0] + hi[0]) / 2.0, 0.0, -(lo[2] + hi[2]) / 2.0];
    for m in parts.values_mut() {
        m.translate(offset);
    }

    let shape = ChairShape {
        shape_id,
        style: Some(*style),
        attributes: style.attribute_levels(),
        parts,
    };
    shape.validate()?;
    Ok(shape)
}

/// Parses the part-mesh exchange format:
///
/// ```text
/// # comment
/// attr <concept_key> <level>      (optional, any number)
/// part <arms|back|seat|legs>
/// v <x> <y> <z>
/// f <i> <j> <k>                   (0-based, into this part's vertices)
/// end
/// ```
///
/// Concepts without an `attr` line default to level 0.
pub fn import_part_meshes(text: &str, shape_id: ShapeId) -> Result<ChairShape> {
    let mut parts: BTreeMap<PartKind, PartMesh> = BTreeMap::new();
    let mut attributes = [0u8; Concept::COUNT];
    let mut current: Option<(PartKind, PartMesh)> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| Error::Format(format!("line {}: {msg}", lineno + 1));
        let mut fields = line.split_whitespace();
        let tag = fields.next().unwrap_or_default();
        let rest: Vec<&str> = fields.collect();
        match (tag, current.as_mut()) {
            ("attr", None) => {
                let [key, level] = rest[..] else {
                    return Err(err("expected `attr <concept> <level>`"));
                };
                let concept = Concept::from_key(key).ok_or_else(|| err("unknown concept"))?;
                let level: u8 = level.parse().map_err(|_| err("bad level"))?;
                if level > MAX_LEVEL {
                    return Err(err("level out of range"));
                }
                attributes[concept.index()] = level;
            }
            ("part", None) => {
                let [name] = rest[..] else {
                    return Err(err("expected `part <kind>`"));
                };
                let kind: PartKind = name.parse().map_err(|e: String| err(&e))?;
                if parts.contains_key(&kind) {
                    return Err(err("part declared twice"));
                }
                current = Some((kind, PartMesh::default()));
            }
            ("v", Some((_, mesh))) => {
                let coords: Vec<f64> = rest
                    .iter()
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| err("bad vertex coordinate"))?;
                let [x, y, z] = coords[..] else {
                    return Err(err("vertex needs three coordinates"));
                };
                mesh.vertices.push([x, y, z]);
            }
            ("f", Some((_, mesh))) => {
                let idx: Vec<u32> = rest
                    .iter()
                    .map(|t| t.parse::<u32>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| err("bad face index"))?;
                let [a, b, c] = idx[..] else {
                    return Err(err("face needs three indices"));
                };
                mesh.triangles.push([a, b, c]);
            }
            ("end", Some(_)) => {
                let (kind, mesh) = current.take().expect("inside part block");
                parts.insert(kind, mesh);
            }
            _ => return Err(err(&format!("unexpected `{tag}`"))),
        }
    }
    if let Some((kind, _)) = current {
        return Err(Error::Format(format!("part {kind} is not terminated by `end`")));
    }
    let shape = ChairShape {
        shape_id,
        style: None,
        attributes,
        parts,
    };
    shape.validate()?;
    Ok(shape)
}

/// Writes a shape in the format read by [`import_part_meshes`].
pub fn export_part_meshes(shape: &ChairShape) -> String {
    let mut out = String::new();
    for c in Concept::ALL {
        let _ = writeln!(out, "attr {} {}", c.key(), shape.attributes[c.index()]);
    }
    for (kind, mesh) in &shape.parts {
        let _ = writeln!(out, "part {kind}");
        for v in &mesh.vertices {
            let _ = writeln!(out, "v {:?} {:?} {:?}", v[0], v[1], v[2]);
        }
        for t in &mesh.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(out, "end");
    }
    out
}
