use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Width of the band around a strict endpoint inside which an estimated value is
/// reported as `Boundary`.
pub const BOUNDARY_BAND: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Boundary,
    Unknown,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Boundary => "boundary",
            Status::Unknown => "unknown",
        }
    }

    /// Conjunction of two clauses: a failure dominates, then doubt, then the band.
    pub fn and(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Unknown, _) | (_, Unknown) => Unknown,
            (Boundary, _) | (_, Boundary) => Boundary,
            _ => Pass,
        }
    }

    pub fn all<I: IntoIterator<Item = Status>>(it: I) -> Status {
        it.into_iter().fold(Status::Pass, Status::and)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether a theorem's condition is only sufficient or also necessary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    Sufficient,
    IfAndOnlyIf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub name: String,
    #[serde(with = "extended_float")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub name: String,
    pub status: Status,
    pub witnesses: Vec<Witness>,
    /// Which condition was tested, in words.
    pub citation: String,
    pub strength: Strength,
    pub flags: BTreeMap<String, String>,
    pub notes: Vec<String>,
    pub parts: Vec<CriterionVerdict>,
}

impl CriterionVerdict {
    pub fn new(name: impl Into<String>, citation: impl Into<String>) -> Self {
        CriterionVerdict {
            name: name.into(),
            status: Status::Pass,
            witnesses: Vec::new(),
            citation: citation.into(),
            strength: Strength::Sufficient,
            flags: BTreeMap::new(),
            notes: Vec::new(),
            parts: Vec::new(),
        }
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    pub fn iff(mut self) -> Self {
        self.strength = Strength::IfAndOnlyIf;
        self
    }

    pub fn witness(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.witnesses.push(Witness { name: name.into(), value });
        self
    }

    pub fn flag(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.flags.insert(key.into(), value.to_string());
        self
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.notes.push(note.into());
        self
    }

    /// Folds a clause status into the verdict.
    pub fn require(&mut self, status: Status) -> &mut Self {
        self.status = self.status.and(status);
        self
    }

    /// Attaches a sub-verdict and folds its status in.
    pub fn part(&mut self, sub: CriterionVerdict) -> &mut Self {
        self.status = self.status.and(sub.status);
        self.parts.push(sub);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.witnesses.iter().find(|w| w.name == name).map(|w| w.value)
    }

    pub fn get_flag(&self, key: &str) -> Option<&str> {
        self.flags.get(key).map(String::as_str)
    }

    /// Searches this verdict and its parts, depth first.
    pub fn find(&self, name: &str) -> Option<&CriterionVerdict> {
        if self.name == name {
            return Some(self);
        }
        self.parts.iter().find_map(|p| p.find(name))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdicts always serialize")
    }

    pub fn from_json(s: &str) -> crate::Result<Self> {
        serde_json::from_str(s).map_err(|e| crate::Error::Parse(e.to_string()))
    }
}

/// How well a tested value is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Precision {
    /// Closed form: endpoints are decided exactly.
    Exact,
    /// Estimated with the given absolute uncertainty (beyond the boundary band).
    Estimated(f64),
}

impl Precision {
    pub fn combine(self, other: Precision) -> Precision {
        match (self, other) {
            (Precision::Exact, Precision::Exact) => Precision::Exact,
            (Precision::Exact, p) | (p, Precision::Exact) => p,
            (Precision::Estimated(a), Precision::Estimated(b)) => Precision::Estimated(a.max(b)),
        }
    }
}

/// Status of the strict inequality `margin > 0`.
pub fn margin_status(margin: f64, precision: Precision) -> Status {
    if margin.is_nan() {
        return Status::Unknown;
    }
    match precision {
        Precision::Exact => {
            if margin > 0.0 {
                Status::Pass
            } else {
                Status::Fail
            }
        }
        Precision::Estimated(u) => {
            if margin.abs() <= BOUNDARY_BAND {
                Status::Boundary
            } else if margin.abs() <= BOUNDARY_BAND + u {
                Status::Unknown
            } else if margin > 0.0 {
                Status::Pass
            } else {
                Status::Fail
            }
        }
    }
}

/// Records and evaluates the clause `lo < m ≤ M < hi` on `verdict`.
pub fn interval_clause(
    verdict: &mut CriterionVerdict,
    label: &str,
    lo: f64,
    m: f64,
    big_m: f64,
    hi: f64,
    precision: Precision,
) -> Status {
    verdict
        .witness(format!("{label}.lower_end"), lo)
        .witness(format!("{label}.m"), m)
        .witness(format!("{label}.M"), big_m)
        .witness(format!("{label}.upper_end"), hi)
        .witness(format!("{label}.margin"), (m - lo).min(hi - big_m));
    let status = margin_status(m - lo, precision).and(margin_status(hi - big_m, precision));
    verdict.require(status);
    status
}

/// Serializes non-finite floats as the strings "inf", "-inf" and "nan" so that
/// verdicts survive a JSON round trip.
mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("bad float `{other}`"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjunction_order() {
        assert_eq!(Status::all([Status::Pass, Status::Boundary]), Status::Boundary);
        assert_eq!(Status::all([Status::Unknown, Status::Boundary]), Status::Unknown);
        assert_eq!(Status::all([Status::Unknown, Status::Fail]), Status::Fail);
        assert_eq!(Status::all([]), Status::Pass);
    }

    #[test]
    fn margins() {
        assert_eq!(margin_status(0.0, Precision::Exact), Status::Fail);
        assert_eq!(margin_status(1e-9, Precision::Exact), Status::Pass);
        assert_eq!(margin_status(0.01, Precision::Estimated(0.0)), Status::Boundary);
        assert_eq!(margin_status(-0.01, Precision::Estimated(0.0)), Status::Boundary);
        assert_eq!(margin_status(0.03, Precision::Estimated(0.05)), Status::Unknown);
        assert_eq!(margin_status(-0.3, Precision::Estimated(0.05)), Status::Fail);
    }

    #[test]
    fn round_trip_with_infinities() {
        let mut v = CriterionVerdict::new("demo", "a condition");
        v.witness("finite", 0.25).witness("big", f64::INFINITY).witness("small", f64::NEG_INFINITY);
        v.flag("divergent", true);
        let mut child = CriterionVerdict::new("child", "sub").with_status(Status::Boundary);
        child.witness("x", -1.5);
        v.part(child);
        let back = CriterionVerdict::from_json(&v.to_json()).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.status, Status::Boundary);
    }
}
