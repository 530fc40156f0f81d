//! Binary occupancy layers, blurred proximity features and feature stacks.
//!
//! A [`FeatureStack`] holds the per-cell feature vector field φ(s) in
//! cell-major order, laid out exactly as its [`FeatureSchema`] dictates. The
//! last entry of every vector is the constant bias.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Cell, CellRect, GridGeometry};

/// The environment feature classes a binary layer can encode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Obstacle,
    Road,
    Grass,
    Avoidance,
}

impl LayerKind {
    pub const ALL: [LayerKind; 4] = [
        LayerKind::Obstacle,
        LayerKind::Road,
        LayerKind::Grass,
        LayerKind::Avoidance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LayerKind::Obstacle => "obstacle",
            LayerKind::Road => "road",
            LayerKind::Grass => "grass",
            LayerKind::Avoidance => "avoidance",
        }
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LayerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LayerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidLayer(format!("unknown layer kind `{s}`")))
    }
}

/// A grid of 0/1 values marking presence of one feature class.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryLayer {
    kind: LayerKind,
    geometry: GridGeometry,
    cells: Vec<u8>,
}

impl BinaryLayer {
    pub fn new(kind: LayerKind, geometry: GridGeometry, cells: Vec<u8>) -> Result<Self> {
        if cells.len() != geometry.len() {
            return Err(Error::InvalidLayer(format!(
                "{kind} layer has {} cells, geometry needs {}",
                cells.len(),
                geometry.len()
            )));
        }
        if let Some(v) = cells.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidLayer(format!("{kind} layer holds non-binary value {v}")));
        }
        Ok(Self { kind, geometry, cells })
    }

    pub fn empty(kind: LayerKind, geometry: GridGeometry) -> Self {
        Self {
            kind,
            geometry,
            cells: vec![0; geometry.len()],
        }
    }

    pub fn from_fn(kind: LayerKind, geometry: GridGeometry, mut f: impl FnMut(Cell) -> bool) -> Self {
        let cells = (0..geometry.len())
            .map(|i| u8::from(f(geometry.cell(i))))
            .collect();
        Self { kind, geometry, cells }
    }

    pub fn kind(&self) -> LayerKind {
        self.kind
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn get(&self, cell: Cell) -> Option<bool> {
        self.geometry.index(cell).map(|i| self.cells[i] == 1)
    }

    pub fn set(&mut self, cell: Cell, value: bool) -> Result<()> {
        let i = self.geometry.checked_index(cell)?;
        self.cells[i] = u8::from(value);
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&v| v == 1).count()
    }

    pub fn crop(&self, rect: CellRect) -> Result<BinaryLayer> {
        let geometry = self.geometry.window(rect)?;
        let mut cells = Vec::with_capacity(geometry.len());
        for r in 0..rect.height {
            let start = (rect.row0 as usize + r) * self.geometry.width + rect.col0 as usize;
            cells.extend_from_slice(&self.cells[start..start + rect.width]);
        }
        Ok(BinaryLayer {
            kind: self.kind,
            geometry,
            cells,
        })
    }
}

/// Obstacle opacity in [0, 1] plus the mask of never-observed cells.
#[derive(Clone, Debug, PartialEq)]
pub struct OpacityLayer {
    geometry: GridGeometry,
    values: Vec<f64>,
    unknown: Vec<bool>,
}

impl OpacityLayer {
    pub fn new(geometry: GridGeometry, values: Vec<f64>, unknown: Vec<bool>) -> Result<Self> {
        if values.len() != geometry.len() || unknown.len() != geometry.len() {
            return Err(Error::InvalidLayer("opacity layer size does not match geometry".into()));
        }
        let values = values
            .into_iter()
            .map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) })
            .collect();
        Ok(Self {
            geometry,
            values,
            unknown,
        })
    }

    pub fn from_obstacles(obstacle: &BinaryLayer, unknown: Option<&BinaryLayer>) -> Self {
        let geometry = *obstacle.geometry();
        let values = obstacle.cells().iter().map(|&v| f64::from(v)).collect();
        let unknown = match unknown {
            Some(u) => u.cells().iter().map(|&v| v == 1).collect(),
            None => vec![false; geometry.len()],
        };
        Self {
            geometry,
            values,
            unknown,
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unknown(&self) -> &[bool] {
        &self.unknown
    }
}

/// Per-cell Manhattan distance to the nearest source cell (value 1), or
/// `None` everywhere when the layer has no sources.
///
/// Two raster sweeps; exact for the L1 metric on a rectangle.
pub fn manhattan_distance_transform(cells: &[u8], width: usize, height: usize) -> Option<Vec<u32>> {
    const FAR: u32 = u32::MAX / 2;
    if !cells.contains(&1) {
        return None;
    }
    let mut d: Vec<u32> = cells.iter().map(|&v| if v == 1 { 0 } else { FAR }).collect();
    for r in 0..height {
        for c in 0..width {
            let i = r * width + c;
            let mut v = d[i];
            if c > 0 {
                v = v.min(d[i - 1] + 1);
            }
            if r > 0 {
                v = v.min(d[i - width] + 1);
            }
            d[i] = v;
        }
    }
    for r in (0..height).rev() {
        for c in (0..width).rev() {
            let i = r * width + c;
            let mut v = d[i];
            if c + 1 < width {
                v = v.min(d[i + 1] + 1);
            }
            if r + 1 < height {
                v = v.min(d[i + width] + 1);
            }
            d[i] = v;
        }
    }
    Some(d)
}

/// Triangular Manhattan kernel: 1 on a source, falling linearly to 0 at
/// distance `radius + 1`.
pub fn blur_value(distance: u32, radius: u32) -> f64 {
    (1.0 - f64::from(distance) / f64::from(radius + 1)).max(0.0)
}

fn blur_from_distances(distances: Option<&[u32]>, len: usize, radius: u32) -> Vec<f64> {
    match distances {
        Some(d) => d.iter().map(|&m| blur_value(m, radius)).collect(),
        None => vec![0.0; len],
    }
}

/// Blurred proximity plane of `layer` with the given radius in cells.
pub fn blur_layer(layer: &BinaryLayer, radius: u32) -> Result<Vec<f64>> {
    if radius == 0 {
        return Err(Error::InvalidSchema("blur radius must be at least 1".into()));
    }
    let g = layer.geometry();
    let d = manhattan_distance_transform(layer.cells(), g.width, g.height);
    Ok(blur_from_distances(d.as_deref(), g.len(), radius))
}

/// One feature channel: a layer at a blur radius (0 = raw), or the bias.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FeatureDescriptor {
    Layer { kind: LayerKind, radius: u32 },
    Bias,
}

impl FeatureDescriptor {
    pub const fn raw(kind: LayerKind) -> Self {
        FeatureDescriptor::Layer { kind, radius: 0 }
    }

    pub const fn blurred(kind: LayerKind, radius: u32) -> Self {
        FeatureDescriptor::Layer { kind, radius }
    }
}

impl fmt::Display for FeatureDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureDescriptor::Bias => f.write_str("bias"),
            FeatureDescriptor::Layer { kind, radius: 0 } => write!(f, "{kind}"),
            FeatureDescriptor::Layer { kind, radius } => write!(f, "{kind}/r{radius}"),
        }
    }
}

impl FromStr for FeatureDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "bias" {
            return Ok(FeatureDescriptor::Bias);
        }
        let (kind, radius) = match s.split_once("/r") {
            Some((k, r)) => (
                k,
                r.parse::<u32>()
                    .map_err(|_| Error::InvalidSchema(format!("bad radius in `{s}`")))?,
            ),
            None => (s, 0),
        };
        Ok(FeatureDescriptor::Layer {
            kind: kind.parse()?,
            radius,
        })
    }
}

impl TryFrom<String> for FeatureDescriptor {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FeatureDescriptor> for String {
    fn from(d: FeatureDescriptor) -> String {
        d.to_string()
    }
}

/// Named schemas matching the behavior feature sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemaPreset {
    Standard,
    Edge,
    Covert,
    Zod,
}

impl FromStr for SchemaPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(SchemaPreset::Standard),
            "edge" => Ok(SchemaPreset::Edge),
            "covert" => Ok(SchemaPreset::Covert),
            "zod" => Ok(SchemaPreset::Zod),
            _ => Err(Error::InvalidSchema(format!("unknown schema preset `{s}`"))),
        }
    }
}

/// Ordered feature descriptors; fixes the meaning of each weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<FeatureDescriptor>", into = "Vec<FeatureDescriptor>")]
pub struct FeatureSchema {
    descriptors: Vec<FeatureDescriptor>,
}

impl FeatureSchema {
    /// Validates uniqueness and that the bias appears exactly once, last.
    pub fn new(descriptors: Vec<FeatureDescriptor>) -> Result<Self> {
        match descriptors.last() {
            Some(FeatureDescriptor::Bias) => {}
            _ => return Err(Error::InvalidSchema("bias must be the last descriptor".into())),
        }
        for (i, d) in descriptors.iter().enumerate() {
            if descriptors[..i].contains(d) {
                return Err(Error::InvalidSchema(format!("duplicate descriptor `{d}`")));
            }
        }
        Ok(Self { descriptors })
    }

    /// Schema from per-kind radius lists (0 = raw), grouped by kind, then bias.
    pub fn from_radii(radii: &[(LayerKind, &[u32])]) -> Result<Self> {
        let mut descriptors: Vec<FeatureDescriptor> = radii
            .iter()
            .flat_map(|&(kind, rs)| rs.iter().map(move |&radius| FeatureDescriptor::Layer { kind, radius }))
            .collect();
        descriptors.push(FeatureDescriptor::Bias);
        Self::new(descriptors)
    }

    /// Raw obstacle/road/grass/avoidance, then radii 1..=4 for each kind, then bias (D = 21).
    pub fn standard() -> Self {
        let mut descriptors: Vec<FeatureDescriptor> =
            LayerKind::ALL.iter().map(|&k| FeatureDescriptor::raw(k)).collect();
        for kind in LayerKind::ALL {
            descriptors.extend((1..=4).map(|r| FeatureDescriptor::blurred(kind, r)));
        }
        descriptors.push(FeatureDescriptor::Bias);
        Self { descriptors }
    }

    /// Edge-of-road feature set (D = 10).
    pub fn edge_of_road() -> Self {
        Self::from_radii(&[
            (LayerKind::Obstacle, &[0, 4]),
            (LayerKind::Road, &[0, 3, 6]),
            (LayerKind::Grass, &[0, 3, 6, 9]),
        ])
        .expect("preset is valid")
    }

    /// Covert feature set (D = 10).
    pub fn covert() -> Self {
        Self::from_radii(&[
            (LayerKind::Obstacle, &[0, 5, 10]),
            (LayerKind::Road, &[0, 5, 10]),
            (LayerKind::Grass, &[0, 5, 10]),
        ])
        .expect("preset is valid")
    }

    pub fn preset(p: SchemaPreset) -> Self {
        match p {
            SchemaPreset::Standard | SchemaPreset::Zod => Self::standard(),
            SchemaPreset::Edge => Self::edge_of_road(),
            SchemaPreset::Covert => Self::covert(),
        }
    }

    pub fn dim(&self) -> usize {
        self.descriptors.len()
    }

    pub fn descriptors(&self) -> &[FeatureDescriptor] {
        &self.descriptors
    }

    pub fn position(&self, d: FeatureDescriptor) -> Option<usize> {
        self.descriptors.iter().position(|&x| x == d)
    }

    pub fn max_radius(&self) -> u32 {
        self.descriptors
            .iter()
            .map(|d| match d {
                FeatureDescriptor::Layer { radius, .. } => *radius,
                FeatureDescriptor::Bias => 0,
            })
            .max()
            .unwrap_or(0)
    }
}

impl TryFrom<Vec<FeatureDescriptor>> for FeatureSchema {
    type Error = Error;

    fn try_from(d: Vec<FeatureDescriptor>) -> Result<Self> {
        FeatureSchema::new(d)
    }
}

impl From<FeatureSchema> for Vec<FeatureDescriptor> {
    fn from(s: FeatureSchema) -> Self {
        s.descriptors
    }
}

/// Validate a set of layers: one geometry, unique kinds, disjoint terrain.
pub fn check_layers(layers: &[BinaryLayer]) -> Result<GridGeometry> {
    let first = layers
        .first()
        .ok_or_else(|| Error::InvalidLayer("no layers supplied".into()))?;
    let geometry = *first.geometry();
    for (i, l) in layers.iter().enumerate() {
        if !l.geometry().same_grid(&geometry) {
            return Err(Error::GeometryMismatch(format!(
                "{} layer is {}x{}, {} layer is {}x{}",
                l.kind(),
                l.geometry().width,
                l.geometry().height,
                first.kind(),
                geometry.width,
                geometry.height
            )));
        }
        if layers[..i].iter().any(|o| o.kind() == l.kind()) {
            return Err(Error::InvalidLayer(format!("duplicate {} layer", l.kind())));
        }
    }
    let road = layers.iter().find(|l| l.kind() == LayerKind::Road);
    let grass = layers.iter().find(|l| l.kind() == LayerKind::Grass);
    if let (Some(road), Some(grass)) = (road, grass) {
        if let Some(i) = (0..geometry.len()).find(|&i| road.cells()[i] == 1 && grass.cells()[i] == 1) {
            return Err(Error::InvalidLayer(format!(
                "road and grass overlap at cell {:?}",
                geometry.cell(i)
            )));
        }
    }
    Ok(geometry)
}

/// The feature vector field φ(s) over one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStack {
    schema: FeatureSchema,
    geometry: GridGeometry,
    /// Cell-major: `values[cell * dim + k]`.
    values: Vec<f64>,
    /// Hard obstacles (raw obstacle layer).
    blocked: Vec<bool>,
}

impl FeatureStack {
    /// Build the stack for `schema` from raw layers. Kinds the schema names but
    /// `layers` lacks are treated as all-zero.
    pub fn build(layers: &[BinaryLayer], schema: &FeatureSchema) -> Result<Self> {
        let geometry = check_layers(layers)?;
        let n = geometry.len();
        let dim = schema.dim();
        let by_kind: HashMap<LayerKind, &BinaryLayer> = layers.iter().map(|l| (l.kind(), l)).collect();

        let mut distances: HashMap<LayerKind, Option<Vec<u32>>> = HashMap::new();
        let mut values = vec![0.0; n * dim];
        for (k, d) in schema.descriptors().iter().enumerate() {
            let plane: Vec<f64> = match *d {
                FeatureDescriptor::Bias => vec![1.0; n],
                FeatureDescriptor::Layer { kind, radius } => match by_kind.get(&kind) {
                    None => vec![0.0; n],
                    Some(layer) if radius == 0 => layer.cells().iter().map(|&v| f64::from(v)).collect(),
                    Some(layer) => {
                        let dt = distances.entry(kind).or_insert_with(|| {
                            manhattan_distance_transform(layer.cells(), geometry.width, geometry.height)
                        });
                        blur_from_distances(dt.as_deref(), n, radius)
                    }
                },
            };
            for (i, v) in plane.into_iter().enumerate() {
                values[i * dim + k] = v;
            }
        }
        let blocked = match by_kind.get(&LayerKind::Obstacle) {
            Some(l) => l.cells().iter().map(|&v| v == 1).collect(),
            None => vec![false; n],
        };
        Ok(Self {
            schema: schema.clone(),
            geometry,
            values,
            blocked,
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn dim(&self) -> usize {
        self.schema.dim()
    }

    /// All feature vectors, cell-major.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn blocked(&self) -> &[bool] {
        &self.blocked
    }

    pub fn is_blocked(&self, cell: Cell) -> bool {
        self.geometry.index(cell).map_or(true, |i| self.blocked[i])
    }

    /// Feature vector at a cell index.
    pub fn at(&self, index: usize) -> &[f64] {
        let dim = self.dim();
        &self.values[index * dim..(index + 1) * dim]
    }

    pub fn feature_vector(&self, cell: Cell) -> Result<&[f64]> {
        Ok(self.at(self.geometry.checked_index(cell)?))
    }

    /// Row-major plane `k`.
    pub fn plane(&self, k: usize) -> Vec<f64> {
        let dim = self.dim();
        (0..self.geometry.len()).map(|i| self.values[i * dim + k]).collect()
    }

    /// Sub-window of the stack. Planes are copied, not recomputed, so blurred
    /// values keep the influence of sources outside the window.
    pub fn crop(&self, rect: CellRect) -> Result<FeatureStack> {
        let geometry = self.geometry.window(rect)?;
        let dim = self.dim();
        let mut values = Vec::with_capacity(geometry.len() * dim);
        let mut blocked = Vec::with_capacity(geometry.len());
        for r in 0..rect.height {
            let start = (rect.row0 as usize + r) * self.geometry.width + rect.col0 as usize;
            values.extend_from_slice(&self.values[start * dim..(start + rect.width) * dim]);
            blocked.extend_from_slice(&self.blocked[start..start + rect.width]);
        }
        Ok(FeatureStack {
            schema: self.schema.clone(),
            geometry,
            values,
            blocked,
        })
    }

    /// Per-cell reward θᵀφ(s).
    pub fn dot(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: theta.len(),
            });
        }
        Ok(self
            .values
            .chunks_exact(self.dim())
            .map(|phi| phi.iter().zip(theta).map(|(a, b)| a * b).sum())
            .collect())
    }
}
