use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use super::SymptomError;

/// Version of the questionnaire-to-vector encoding. Trees record the version
/// they were trained against.
pub const FEATURE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgeBand {
    Age0To15,
    Age16To30,
    Age31To45,
    Age46To60,
    Over60,
}

impl AgeBand {
    pub const ALL: [AgeBand; 5] = [
        AgeBand::Age0To15,
        AgeBand::Age16To30,
        AgeBand::Age31To45,
        AgeBand::Age46To60,
        AgeBand::Over60,
    ];

    pub fn id(self) -> &'static str {
        match self {
            AgeBand::Age0To15 => "0-15",
            AgeBand::Age16To30 => "16-30",
            AgeBand::Age31To45 => "31-45",
            AgeBand::Age46To60 => "46-60",
            AgeBand::Over60 => "60+",
        }
    }

    pub fn ordinal(self) -> usize {
        self as usize
    }
}

impl fmt::Display for AgeBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for AgeBand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgeBand::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| format!("unknown age band `{s}`"))
    }
}

impl Serialize for AgeBand {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.id())
    }
}

impl<'de> Deserialize<'de> for AgeBand {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// A yes/no answer that may also be "don't know". On the wire: `true`,
/// `false` or `"unknown"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TriState {
    No,
    Yes,
    Unknown,
}

impl TriState {
    fn encode(self) -> f64 {
        match self {
            TriState::No => 0.0,
            TriState::Yes => 1.0,
            TriState::Unknown => 0.5,
        }
    }

    fn from_json(v: &Value) -> Option<Self> {
        match v {
            Value::Bool(true) => Some(TriState::Yes),
            Value::Bool(false) => Some(TriState::No),
            Value::String(s) if s == "unknown" => Some(TriState::Unknown),
            _ => None,
        }
    }
}

impl Serialize for TriState {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            TriState::No => serializer.serialize_bool(false),
            TriState::Yes => serializer.serialize_bool(true),
            TriState::Unknown => serializer.serialize_str("unknown"),
        }
    }
}

impl<'de> Deserialize<'de> for TriState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(deserializer)?;
        TriState::from_json(&v).ok_or_else(|| serde::de::Error::custom("expected true, false or \"unknown\""))
    }
}

/// Questionnaire answers: current symptoms, pre-existing conditions, age and
/// exposure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SymptomRecord {
    pub cough: bool,
    pub cold: bool,
    pub fever: bool,
    pub diarrhoea: bool,
    pub muscle_pain: bool,
    pub breathing_difficulty: bool,
    pub loss_of_smell: bool,
    pub sore_throat: bool,
    pub fatigue: bool,
    pub respiratory_illness: bool,
    pub diabetes: bool,
    pub hypertension: bool,
    pub age_band: AgeBand,
    pub contact_with_positive: TriState,
}

/// Feature names in encoding order.
pub const FEATURE_NAMES: [&str; 14] = [
    "cough",
    "cold",
    "fever",
    "diarrhoea",
    "muscle_pain",
    "breathing_difficulty",
    "loss_of_smell",
    "sore_throat",
    "fatigue",
    "respiratory_illness",
    "diabetes",
    "hypertension",
    "age_band",
    "contact_with_positive",
];

pub const N_FEATURES: usize = FEATURE_NAMES.len();
const N_BOOLEANS: usize = 12;

/// Encoded questionnaire: booleans as 0/1, unknown as 0.5, age band as its
/// ordinal 0..=4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl SymptomRecord {
    /// Everything false, youngest band, contact unknown.
    pub fn baseline() -> Self {
        SymptomRecord {
            cough: false,
            cold: false,
            fever: false,
            diarrhoea: false,
            muscle_pain: false,
            breathing_difficulty: false,
            loss_of_smell: false,
            sore_throat: false,
            fatigue: false,
            respiratory_illness: false,
            diabetes: false,
            hypertension: false,
            age_band: AgeBand::Age0To15,
            contact_with_positive: TriState::Unknown,
        }
    }

    fn booleans(&self) -> [bool; N_BOOLEANS] {
        [
            self.cough,
            self.cold,
            self.fever,
            self.diarrhoea,
            self.muscle_pain,
            self.breathing_difficulty,
            self.loss_of_smell,
            self.sore_throat,
            self.fatigue,
            self.respiratory_illness,
            self.diabetes,
            self.hypertension,
        ]
    }

    fn booleans_mut(&mut self) -> [&mut bool; N_BOOLEANS] {
        [
            &mut self.cough,
            &mut self.cold,
            &mut self.fever,
            &mut self.diarrhoea,
            &mut self.muscle_pain,
            &mut self.breathing_difficulty,
            &mut self.loss_of_smell,
            &mut self.sore_throat,
            &mut self.fatigue,
            &mut self.respiratory_illness,
            &mut self.diabetes,
            &mut self.hypertension,
        ]
    }

    pub fn encode(&self) -> FeatureVector {
        let mut v: Vec<f64> = self
            .booleans()
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect();
        v.push(self.age_band.ordinal() as f64);
        v.push(self.contact_with_positive.encode());
        FeatureVector(v)
    }

    /// Validates a JSON object field by field, reporting the first missing,
    /// mistyped or unexpected field by name.
    pub fn from_json(value: &Value) -> Result<Self, SymptomError> {
        let obj = value.as_object().ok_or(SymptomError::NotAnObject)?;
        if let Some(extra) = obj.keys().find(|k| !FEATURE_NAMES.contains(&k.as_str())) {
            return Err(SymptomError::UnknownField(extra.clone()));
        }
        let field = |name: &'static str| obj.get(name).ok_or(SymptomError::MissingField(name));
        let invalid = |name: &'static str, reason: &str| SymptomError::InvalidField {
            field: name,
            reason: reason.to_string(),
        };

        let mut rec = SymptomRecord::baseline();
        for (name, slot) in FEATURE_NAMES.iter().zip(rec.booleans_mut()) {
            *slot = field(name)?
                .as_bool()
                .ok_or_else(|| invalid(name, "expected a boolean"))?;
        }
        rec.age_band = field("age_band")?
            .as_str()
            .ok_or_else(|| invalid("age_band", "expected a string"))?
            .parse()
            .map_err(|e: String| invalid("age_band", &e))?;
        rec.contact_with_positive = TriState::from_json(field("contact_with_positive")?)
            .ok_or_else(|| invalid("contact_with_positive", "expected true, false or \"unknown\""))?;
        Ok(rec)
    }
}

impl<'de> Deserialize<'de> for SymptomRecord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(deserializer)?;
        SymptomRecord::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// Free-function form of [`SymptomRecord::encode`].
pub fn encode_symptoms(rec: &SymptomRecord) -> FeatureVector {
    rec.encode()
}
