//! Environments: raw binary layers, zones of danger and the manifest file.
//!
//! The manifest stores geometry, the generator seed, the ZOD list and each raw
//! layer as a row-major run-length string (`"0x120 1x5 0x75"`). Blurred planes
//! are never stored; [`Environment::stack`] recomputes them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{check_layers, BinaryLayer, FeatureSchema, FeatureStack, LayerKind, OpacityLayer};
use crate::geometry::{Cell, CellRect, GridGeometry, Point};

/// Circular zone of danger in world coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zod {
    pub center_x_m: f64,
    pub center_y_m: f64,
    pub radius_m: f64,
}

impl Zod {
    pub fn new(center: Point, radius_m: f64) -> Self {
        Self {
            center_x_m: center.x,
            center_y_m: center.y,
            radius_m,
        }
    }

    pub fn center(&self) -> Point {
        Point::new(self.center_x_m, self.center_y_m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius_m > 0.0 && self.radius_m.is_finite()) {
            return Err(Error::InvalidScenario(format!("ZOD radius must be positive, got {}", self.radius_m)));
        }
        if !(self.center_x_m.is_finite() && self.center_y_m.is_finite()) {
            return Err(Error::InvalidScenario("ZOD center must be finite".into()));
        }
        Ok(())
    }

    /// Cell-center containment.
    pub fn covers(&self, geometry: &GridGeometry, cell: Cell) -> bool {
        geometry.center_of(cell).distance(self.center()) <= self.radius_m
    }
}

/// Rasterize a ZOD list into an avoidance layer.
pub fn avoidance_layer(geometry: GridGeometry, zods: &[Zod]) -> BinaryLayer {
    BinaryLayer::from_fn(LayerKind::Avoidance, geometry, |c| zods.iter().any(|z| z.covers(&geometry, c)))
}

/// Run-length encode a 0/1 row-major sequence as `value x count` pairs.
pub fn rle_encode(cells: &[u8]) -> String {
    let mut out = String::new();
    let mut iter = cells.iter().peekable();
    while let Some(&v) = iter.next() {
        let mut n = 1usize;
        while iter.peek() == Some(&&v) {
            iter.next();
            n += 1;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&format!("{v}x{n}"));
    }
    out
}

/// Inverse of [`rle_encode`]; accepts `x` or `×` and space or comma separators.
pub fn rle_decode(s: &str, expected_len: usize) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(expected_len);
    for tok in s.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
        let (v, n) = tok
            .split_once(['x', '×'])
            .ok_or_else(|| Error::Format(format!("bad run `{tok}`")))?;
        let v: u8 = v.parse().map_err(|_| Error::Format(format!("bad run value in `{tok}`")))?;
        let n: usize = n.parse().map_err(|_| Error::Format(format!("bad run length in `{tok}`")))?;
        if v > 1 {
            return Err(Error::Format(format!("run value must be 0 or 1, got {v}")));
        }
        if out.len() + n > expected_len {
            return Err(Error::Format(format!("runs exceed {expected_len} cells")));
        }
        out.extend(std::iter::repeat(v).take(n));
    }
    if out.len() != expected_len {
        return Err(Error::Format(format!("runs cover {} of {expected_len} cells", out.len())));
    }
    Ok(out)
}

/// An environment: raw feature layers on one grid, plus the ZODs that
/// produced its avoidance layer and an optional unknown-cell mask.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    geometry: GridGeometry,
    seed: u64,
    zods: Vec<Zod>,
    layers: Vec<BinaryLayer>,
    unknown: Option<BinaryLayer>,
}

#[derive(Serialize, Deserialize)]
struct LayerRecord {
    kind: String,
    rle: String,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    geometry: GridGeometry,
    seed: u64,
    zods: Vec<Zod>,
    layers: Vec<LayerRecord>,
}

const UNKNOWN_LAYER: &str = "unknown";

impl Environment {
    /// `layers` must contain obstacle, road and grass; avoidance is derived from
    /// `zods` when absent.
    pub fn new(seed: u64, layers: Vec<BinaryLayer>, zods: Vec<Zod>, unknown: Option<BinaryLayer>) -> Result<Self> {
        let geometry = check_layers(&layers)?;
        for z in &zods {
            z.validate()?;
        }
        if let Some(u) = &unknown {
            if !u.geometry().same_grid(&geometry) {
                return Err(Error::GeometryMismatch("unknown mask does not match layers".into()));
            }
        }
        let mut layers = layers;
        for kind in [LayerKind::Obstacle, LayerKind::Road, LayerKind::Grass] {
            if !layers.iter().any(|l| l.kind() == kind) {
                return Err(Error::InvalidLayer(format!("environment is missing the {kind} layer")));
            }
        }
        if !layers.iter().any(|l| l.kind() == LayerKind::Avoidance) {
            layers.push(avoidance_layer(geometry, &zods));
        }
        layers.sort_by_key(|l| l.kind());
        Ok(Self {
            geometry,
            seed,
            zods,
            layers,
            unknown,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn zods(&self) -> &[Zod] {
        &self.zods
    }

    pub fn layers(&self) -> &[BinaryLayer] {
        &self.layers
    }

    pub fn unknown(&self) -> Option<&BinaryLayer> {
        self.unknown.as_ref()
    }

    pub fn layer(&self, kind: LayerKind) -> &BinaryLayer {
        self.layers
            .iter()
            .find(|l| l.kind() == kind)
            .expect("constructor guarantees all four layers")
    }

    pub fn is_obstacle(&self, cell: Cell) -> bool {
        self.layer(LayerKind::Obstacle).get(cell).unwrap_or(true)
    }

    /// Replace the ZOD set and regenerate the avoidance layer.
    pub fn with_zods(&self, zods: Vec<Zod>) -> Result<Environment> {
        for z in &zods {
            z.validate()?;
        }
        let mut env = self.clone();
        let avoid = avoidance_layer(self.geometry, &zods);
        for l in env.layers.iter_mut() {
            if l.kind() == LayerKind::Avoidance {
                *l = avoid.clone();
            }
        }
        env.zods = zods;
        Ok(env)
    }

    pub fn stack(&self, schema: &FeatureSchema) -> Result<FeatureStack> {
        FeatureStack::build(&self.layers, schema)
    }

    pub fn opacity(&self) -> OpacityLayer {
        OpacityLayer::from_obstacles(self.layer(LayerKind::Obstacle), self.unknown.as_ref())
    }

    /// Raw layers restricted to a window (geometry keeps the world frame).
    pub fn crop_layers(&self, rect: CellRect) -> Result<Vec<BinaryLayer>> {
        self.layers.iter().map(|l| l.crop(rect)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut layers: Vec<LayerRecord> = self
            .layers
            .iter()
            .map(|l| LayerRecord {
                kind: l.kind().to_string(),
                rle: rle_encode(l.cells()),
            })
            .collect();
        if let Some(u) = &self.unknown {
            layers.push(LayerRecord {
                kind: UNKNOWN_LAYER.into(),
                rle: rle_encode(u.cells()),
            });
        }
        let m = Manifest {
            geometry: self.geometry,
            seed: self.seed,
            zods: self.zods.clone(),
            layers,
        };
        let mut s = serde_json::to_string_pretty(&m)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(s)?;
        m.geometry.validate()?;
        let mut layers = Vec::new();
        let mut unknown = None;
        for rec in m.layers {
            let cells = rle_decode(&rec.rle, m.geometry.len())?;
            if rec.kind == UNKNOWN_LAYER {
                // Stored with the obstacle kind tag; only the cells matter.
                unknown = Some(BinaryLayer::new(LayerKind::Obstacle, m.geometry, cells)?);
            } else {
                layers.push(BinaryLayer::new(rec.kind.parse()?, m.geometry, cells)?);
            }
        }
        Environment::new(m.seed, layers, m.zods, unknown)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
