//! Residual reports and byte-stable output formatting.

use std::collections::{BTreeMap, HashMap};
use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::tensor::Point3;

/// Report schema version.
pub const SCHEMA: u32 = 1;

/// `printf("%.9g", x)`.
pub fn g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.8e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..9).contains(&exp) {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}"))
    }
}

fn strip_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Pretty JSON formatter that prints every float as `%.9g`.
struct G9Formatter<'a>(PrettyFormatter<'a>);

impl Formatter for G9Formatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, x: f64) -> io::Result<()> {
        let text = g9(x);
        w.write_all(if text == "-0" { b"0" } else { text.as_bytes() })
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, x: f32) -> io::Result<()> {
        self.write_f64(w, x as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
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

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty JSON with `%.9g` floats, non-finite floats as `null`, and a
/// trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut out, G9Formatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializable report");
    out.push(b'\n');
    String::from_utf8(out).expect("utf-8 json")
}

/// Aggregate of one named residual over a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub max_abs: f64,
    pub mean_abs: f64,
    pub argmax: [f64; 3],
    pub tolerance: f64,
    pub pass: bool,
}

impl Aggregate {
    pub fn of(tolerance: f64, points: &[Point3], values: &[f64]) -> Self {
        let mut max_abs = 0.0_f64;
        let mut argmax = points.first().map(|p| p.to_array()).unwrap_or([0.0; 3]);
        let mut sum = 0.0;
        let mut nan = false;
        for (p, v) in points.iter().zip(values) {
            let a = v.abs();
            if a.is_nan() {
                if !nan {
                    argmax = p.to_array();
                }
                nan = true;
                continue;
            }
            sum += a;
            if a > max_abs && !nan {
                max_abs = a;
                argmax = p.to_array();
            }
        }
        if nan {
            max_abs = f64::NAN;
        }
        let mean_abs = if values.is_empty() {
            0.0
        } else {
            sum / values.len() as f64
        };
        Aggregate {
            max_abs,
            mean_abs,
            argmax,
            tolerance,
            pass: max_abs <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointRecord {
    pub point: [f64; 3],
    pub values: BTreeMap<String, f64>,
}

/// Named residual aggregates with optional per-point records. Passes iff
/// every aggregate's `max_abs` is within its tolerance.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub aggregates: BTreeMap<String, Aggregate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<PointRecord>,
    #[serde(skip)]
    keep_records: bool,
    #[serde(skip)]
    record_index: HashMap<[u64; 3], usize>,
}

impl ConstraintReport {
    pub fn new(keep_records: bool) -> Self {
        ConstraintReport {
            keep_records,
            ..Default::default()
        }
    }

    pub fn pass(&self) -> bool {
        self.aggregates.values().all(|a| a.pass)
    }

    pub fn add_series(&mut self, name: &str, tolerance: f64, points: &[Point3], values: &[f64]) {
        assert_eq!(points.len(), values.len(), "one value per point");
        self.aggregates
            .insert(name.to_string(), Aggregate::of(tolerance, points, values));
        if self.keep_records {
            for (p, v) in points.iter().zip(values) {
                let key = p.to_array().map(f64::to_bits);
                let idx = *self.record_index.entry(key).or_insert_with(|| {
                    self.records.push(PointRecord {
                        point: p.to_array(),
                        values: BTreeMap::new(),
                    });
                    self.records.len() - 1
                });
                self.records[idx].values.insert(name.to_string(), *v);
            }
        }
    }

    /// Adds a scalar check that has no spatial distribution.
    pub fn add_scalar(&mut self, name: &str, tolerance: f64, value: f64) {
        let a = value.abs();
        self.aggregates.insert(
            name.to_string(),
            Aggregate {
                max_abs: a,
                mean_abs: a,
                argmax: [0.0; 3],
                tolerance,
                pass: a <= tolerance,
            },
        );
    }

    /// Moves every aggregate and record of `other` in under `prefix.`.
    pub fn absorb(&mut self, prefix: &str, other: ConstraintReport) {
        for (k, v) in other.aggregates {
            self.aggregates.insert(format!("{prefix}.{k}"), v);
        }
        for r in other.records {
            let key = r.point.map(f64::to_bits);
            let idx = *self.record_index.entry(key).or_insert_with(|| {
                self.records.push(PointRecord {
                    point: r.point,
                    values: BTreeMap::new(),
                });
                self.records.len() - 1
            });
            for (k, v) in r.values {
                self.records[idx].values.insert(format!("{prefix}.{k}"), v);
            }
        }
    }

    /// Failing aggregate with the largest `max_abs / tolerance`.
    pub fn worst_failure(&self) -> Option<(&str, &Aggregate)> {
        let ratio = |a: &Aggregate| {
            if a.max_abs.is_nan() {
                f64::INFINITY
            } else {
                a.max_abs / a.tolerance
            }
        };
        self.aggregates
            .iter()
            .filter(|(_, a)| !a.pass)
            .max_by(|x, y| ratio(x.1).total_cmp(&ratio(y.1)))
            .map(|(k, a)| (k.as_str(), a))
    }

    pub fn max_abs(&self, name: &str) -> Option<f64> {
        self.aggregates.get(name).map(|a| a.max_abs)
    }
}
