//! Machine-readable output: JSON with fixed-width numbers and CSV profiles.
//!
//! Floats are written with 17 significant digits in scientific notation so
//! that identical runs produce byte-identical files on every platform.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::calculus::BasicFunction;

/// Version of every JSON document written by this crate.
pub const SCHEMA_VERSION: u32 = 1;

/// `1.2345678901234567e-3` style; non-finite values become `NaN`/`inf`
/// (they are mapped to `null` in JSON).
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(format_f64(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty-printed JSON of `value` with [`format_f64`] numbers.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// A JSON document: `{"schema": 1, "kind": ..., <fields of body>}`.
#[derive(Debug, Serialize)]
pub struct Document<'a, T: Serialize> {
    pub schema: u32,
    pub kind: &'a str,
    #[serde(flatten)]
    pub body: T,
}

impl<'a, T: Serialize> Document<'a, T> {
    pub fn new(kind: &'a str, body: T) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            kind,
            body,
        }
    }
}

/// Two-column CSV `t,value` (the header names the grid coordinate).
pub fn write_profile_csv<W: Write>(out: W, f: &BasicFunction) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let coord = match f.grid().interval() {
        crate::calculus::Interval::Unit => "t",
        crate::calculus::Interval::Symmetric => "x",
    };
    w.write_record([coord, "value"])?;
    for (x, v) in f.grid().nodes().iter().zip(f.values()) {
        w.write_record([format_f64(*x), format_f64(*v)])?;
    }
    w.flush()
}
