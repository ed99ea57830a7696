//! JSON interchange formats. Floats are written with 17 significant digits.

use std::path::Path;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::geometry::PointSet;

/// `x` with 17 significant digits, e.g. `5.9999999999999998e-1` for 0.6.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

/// Serializes a float through [`fmt17`] so JSON output never depends on the
/// shortest-representation printer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(fmt17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for F17 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        f64::deserialize(d).map(F17)
    }
}

/// Serializes a slice of floats through [`F17`].
pub fn ser_f17_vec<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for &x in v {
        seq.serialize_element(&F17(x))?;
    }
    seq.end()
}

pub fn ser_f17<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    F17(*v).serialize(s)
}

#[derive(Serialize)]
struct PointSetOut<'a> {
    dim: usize,
    seed: Option<u64>,
    points: Vec<Row<'a>>,
}

struct Row<'a>(&'a [f64]);

impl Serialize for Row<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ser_f17_vec(self.0, s)
    }
}

#[derive(Deserialize)]
struct PointSetIn {
    dim: usize,
    #[serde(default)]
    seed: Option<u64>,
    points: Vec<Vec<f64>>,
}

pub fn point_set_to_json(ps: &PointSet) -> String {
    let out = PointSetOut { dim: ps.dim(), seed: ps.seed(), points: ps.points().map(Row).collect() };
    serde_json::to_string(&out).expect("point set serializes")
}

pub fn point_set_from_json(text: &str) -> Result<PointSet> {
    let raw: PointSetIn = serde_json::from_str(text)?;
    Ok(PointSet::new(raw.dim, raw.points)?.with_seed(raw.seed))
}

pub fn read_point_set(path: impl AsRef<Path>) -> Result<PointSet> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    point_set_from_json(&text)
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    std::fs::write(path.as_ref(), text).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))
}
