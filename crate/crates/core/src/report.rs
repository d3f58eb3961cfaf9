//! Structured certification results.
//!
//! Every tested inequality becomes one [`Record`]: the property it certifies
//! (`anchor`), what was tested, how many samples, the tolerance, the worst
//! observed violation and where it happened. A record passes iff the worst
//! violation is finite and does not exceed the tolerance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub anchor: String,
    pub subject: String,
    pub samples: usize,
    #[serde(with = "float")]
    pub tolerance: f64,
    #[serde(with = "float")]
    pub worst_violation: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty", with = "float::map")]
    pub stats: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub forced_failure: bool,
}

impl Record {
    pub fn new(anchor: impl Into<String>, subject: impl Into<String>, samples: usize) -> Self {
        Self {
            anchor: anchor.into(),
            subject: subject.into(),
            samples,
            tolerance: 0.0,
            worst_violation: f64::NEG_INFINITY,
            passed: true,
            location: None,
            stats: BTreeMap::new(),
            forced_failure: false,
        }
    }

    fn settle(mut self) -> Self {
        self.passed = !self.forced_failure
            && !self.worst_violation.is_nan()
            && self.worst_violation <= self.tolerance;
        self
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self.settle()
    }

    /// Sets the worst violation (the amount by which the tested inequality
    /// is missed; negative values mean slack).
    pub fn violation(mut self, v: f64) -> Self {
        self.worst_violation = v;
        self.settle()
    }

    pub fn samples(mut self, n: usize) -> Self {
        self.samples = n;
        self
    }

    pub fn at(mut self, location: Vec<[f64; 2]>) -> Self {
        self.location = Some(location);
        self
    }

    /// Marks the record failed regardless of the numeric margin.
    pub fn fail_at(mut self, location: Vec<[f64; 2]>) -> Self {
        self.location = Some(location);
        self.forced_failure = true;
        self.settle()
    }

    pub fn fail(mut self) -> Self {
        self.forced_failure = true;
        self.settle()
    }

    pub fn stat(mut self, key: &str, value: f64) -> Self {
        self.stats.insert(key.to_string(), value);
        self
    }
}

/// Tracks the worst violation seen while scanning samples.
#[derive(Clone, Debug)]
pub struct Worst {
    pub value: f64,
    pub location: Option<Vec<[f64; 2]>>,
    pub count: usize,
}

impl Default for Worst {
    fn default() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            location: None,
            count: 0,
        }
    }
}

impl Worst {
    /// Records `v` observed at the point given by `loc` (evaluated lazily).
    pub fn observe(&mut self, v: f64, loc: impl FnOnce() -> Vec<[f64; 2]>) {
        self.count += 1;
        if v > self.value || (v.is_nan() && !self.value.is_nan()) {
            self.value = v;
            self.location = Some(loc());
        }
    }

    pub fn into_record(self, rec: Record) -> Record {
        let rec = rec.samples(self.count).violation(self.value);
        match self.location {
            Some(l) => rec.at(l),
            None => rec,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub records: Vec<Record>,
}

impl CertificationReport {
    pub fn single(r: Record) -> Self {
        Self { records: vec![r] }
    }

    pub fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn extend(&mut self, other: CertificationReport) {
        self.records.extend(other.records);
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.passed)
    }

    pub fn find(&self, anchor: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.anchor == anchor)
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

/// JSON has no infinities or NaN; these are written as the strings `"inf"`,
/// `"-inf"` and `"nan"` so that records and states round-trip exactly.
pub mod float {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Tag(String),
        Null(()),
    }

    fn to_repr(x: f64) -> Repr {
        if x.is_finite() {
            Repr::Num(x)
        } else if x.is_nan() {
            Repr::Tag("nan".into())
        } else if x > 0.0 {
            Repr::Tag("inf".into())
        } else {
            Repr::Tag("-inf".into())
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(x) => Ok(x),
            Repr::Null(()) => Ok(f64::NAN),
            Repr::Tag(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(E::custom(format!("not a number: {other}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod map {
        use super::*;

        pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
            let r: BTreeMap<&String, Repr> = m.iter().map(|(k, v)| (k, to_repr(*v))).collect();
            r.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
            BTreeMap::<String, Repr>::deserialize(d)?
                .into_iter()
                .map(|(k, v)| from_repr::<D::Error>(v).map(|x| (k, x)))
                .collect::<Result<_, _>>()

        }
    }

    pub mod pairs {
        use super::*;

        pub fn serialize<S: Serializer>(m: &[(usize, f64)], s: S) -> Result<S::Ok, S::Error> {
            let r: Vec<(usize, Repr)> = m.iter().map(|(k, v)| (*k, to_repr(*v))).collect();
            r.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(usize, f64)>, D::Error> {
            Vec::<(usize, Repr)>::deserialize(d)?
                .into_iter()
                .map(|(k, v)| from_repr::<D::Error>(v).map(|x| (k, x)))
                .collect::<Result<_, _>>()

        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_logic() {
        assert!(Record::new("a", "f", 1).tolerance(0.1).violation(0.05).passed);
        assert!(!Record::new("a", "f", 1).tolerance(0.1).violation(0.2).passed);
        assert!(!Record::new("a", "f", 1).violation(f64::NAN).passed);
        assert!(!Record::new("a", "f", 1).fail().passed);
    }

    #[test]
    fn worst_tracks_maximum() {
        let mut w = Worst::default();
        w.observe(-1.0, || vec![[0.0, 0.0]]);
        w.observe(0.5, || vec![[1.0, 0.0]]);
        w.observe(0.2, || vec![[2.0, 0.0]]);
        let r = w.into_record(Record::new("a", "f", 0).tolerance(1.0));
        assert_eq!(r.worst_violation, 0.5);
        assert_eq!(r.location, Some(vec![[1.0, 0.0]]));
        assert_eq!(r.samples, 3);
        assert!(r.passed);
    }

    #[test]
    fn non_finite_values_round_trip() {
        let r = Record::new("a", "f", 0).tolerance(f64::INFINITY).stat("x", f64::NAN);
        let back: Record = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back.worst_violation, f64::NEG_INFINITY);
        assert_eq!(back.tolerance, f64::INFINITY);
        assert!(back.stats["x"].is_nan());
    }
}
