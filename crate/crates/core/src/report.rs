//! Self-describing result records and their JSON encoding.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use serde_json::{Map, Value};
use std::io;

pub const TOOL_VERSION: &str = concat!("triphoton ", env!("CARGO_PKG_VERSION"));

/// How `|η̄||β̄|` is formed from the coefficient vectors.
pub const MIN_PRODUCT_CONVENTION: &str = "min over parties of |eta_i|*|beta_i|";

/// Witness result plus everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    /// Echo of every input, defaults included.
    pub inputs: Map<String, Value>,
    pub exact_e3f_gebits: Option<f64>,
    pub witness_gebits: f64,
    pub certified_gebits: f64,
    pub entropy_x_bits: f64,
    pub entropy_k_bits: f64,
    pub bootstrap_se: Option<f64>,
    pub tool_version: String,
    /// Diagnostics: sample counts, drops, warnings, conventions.
    #[serde(default)]
    pub metadata: Map<String, Value>,
}

impl EntanglementReport {
    pub fn new(witness_gebits: f64, entropy_x_bits: f64, entropy_k_bits: f64) -> Self {
        let mut metadata = Map::new();
        metadata.insert(
            "min_product_convention".into(),
            Value::from(MIN_PRODUCT_CONVENTION),
        );
        Self {
            inputs: Map::new(),
            exact_e3f_gebits: None,
            witness_gebits,
            certified_gebits: certified(witness_gebits),
            entropy_x_bits,
            entropy_k_bits,
            bootstrap_se: None,
            tool_version: TOOL_VERSION.to_string(),
            metadata,
        }
    }

    pub fn input(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.inputs.insert(key.to_string(), value.into());
        self
    }

    pub fn meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let required = [
            ("witness_gebits", self.witness_gebits),
            ("certified_gebits", self.certified_gebits),
            ("entropy_x_bits", self.entropy_x_bits),
            ("entropy_k_bits", self.entropy_k_bits),
        ];
        for (name, v) in required {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} is not finite ({v})")));
            }
        }
        to_json_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("bad report JSON: {e}")))
    }
}

/// Certified entanglement: negative bounds certify nothing.
pub fn certified(witness_gebits: f64) -> f64 {
    witness_gebits.max(0.0)
}

/// Writes every float in scientific notation with 17 significant digits,
/// which round-trips any f64.
struct PreciseFormatter(serde_json::ser::PrettyFormatter<'static>);

impl Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value == 0.0 {
            writer.write_all(if value.is_sign_negative() { b"-0.0" } else { b"0.0" })
        } else {
            write!(writer, "{value:.16e}")
        }
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty-printed JSON with lossless float formatting. Non-finite floats
/// become `null`.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let formatter = PreciseFormatter(serde_json::ser::PrettyFormatter::new());
    let mut ser = serde_json::Serializer::with_formatter(&mut out, formatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Validation(format!("cannot encode JSON: {e}")))?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}
