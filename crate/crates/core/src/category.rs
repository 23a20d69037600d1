//! Recording categories and score sources.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One of the nine kinds of respiratory recording collected per session.
///
/// Declaration order is the collection order and drives `Ord`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SoundCategory {
    BreathingDeep,
    BreathingShallow,
    CoughHeavy,
    CoughShallow,
    CountingFast,
    CountingNormal,
    VowelA,
    VowelE,
    VowelO,
}

impl SoundCategory {
    pub const ALL: [SoundCategory; 9] = [
        SoundCategory::BreathingDeep,
        SoundCategory::BreathingShallow,
        SoundCategory::CoughHeavy,
        SoundCategory::CoughShallow,
        SoundCategory::CountingFast,
        SoundCategory::CountingNormal,
        SoundCategory::VowelA,
        SoundCategory::VowelE,
        SoundCategory::VowelO,
    ];

    /// Stable wire identifier.
    pub fn id(self) -> &'static str {
        match self {
            SoundCategory::BreathingDeep => "breathing-deep",
            SoundCategory::BreathingShallow => "breathing-shallow",
            SoundCategory::CoughHeavy => "cough-heavy",
            SoundCategory::CoughShallow => "cough-shallow",
            SoundCategory::CountingFast => "counting-fast",
            SoundCategory::CountingNormal => "counting-normal",
            SoundCategory::VowelA => "vowel-a",
            SoundCategory::VowelE => "vowel-e",
            SoundCategory::VowelO => "vowel-o",
        }
    }

    /// Instruction shown to the person recording.
    pub fn instructions(self) -> &'static str {
        match self {
            SoundCategory::BreathingDeep => "Take a few deep breaths",
            SoundCategory::BreathingShallow => "Take a few shallow breaths",
            SoundCategory::CoughHeavy => "Cough heavily a few times",
            SoundCategory::CoughShallow => "Cough lightly a few times",
            SoundCategory::CountingFast => "Count from 1 to 20 at a fast pace",
            SoundCategory::CountingNormal => "Count from 1 to 20 at a normal pace",
            SoundCategory::VowelA => "Sustain the vowel sound in 'boot'",
            SoundCategory::VowelE => "Sustain the vowel sound in 'beet'",
            SoundCategory::VowelO => "Sustain the vowel sound in 'bat'",
        }
    }

    /// File name of this category's weight container inside a model directory.
    pub fn model_file_name(self) -> String {
        format!("{}.rspm", self.id())
    }
}

impl fmt::Display for SoundCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown sound category `{0}`")]
pub struct UnknownCategory(pub String);

impl FromStr for SoundCategory {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SoundCategory::ALL
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

/// Where a probability came from: one of the nine sound models, the symptom
/// model, or the fusion of several of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Sound(SoundCategory),
    Symptoms,
    Fused,
}

impl Source {
    /// The ten sources that feed fusion, in collection order.
    pub fn model_sources() -> impl Iterator<Item = Source> {
        SoundCategory::ALL
            .into_iter()
            .map(Source::Sound)
            .chain(std::iter::once(Source::Symptoms))
    }

    pub fn id(self) -> &'static str {
        match self {
            Source::Sound(c) => c.id(),
            Source::Symptoms => "symptoms",
            Source::Fused => "fused",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown score source `{0}`")]
pub struct UnknownSource(pub String);

impl FromStr for Source {
    type Err = UnknownSource;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symptoms" => Ok(Source::Symptoms),
            "fused" => Ok(Source::Fused),
            other => other
                .parse::<SoundCategory>()
                .map(Source::Sound)
                .map_err(|_| UnknownSource(s.to_string())),
        }
    }
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.id())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(SoundCategory);
string_serde!(Source);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for c in SoundCategory::ALL {
            assert_eq!(c.id().parse::<SoundCategory>().unwrap(), c);
            assert_eq!(Source::Sound(c).id().parse::<Source>().unwrap(), Source::Sound(c));
        }
        assert_eq!("symptoms".parse::<Source>().unwrap(), Source::Symptoms);
    }

    #[test]
    fn humming_is_not_a_category() {
        assert_eq!(
            "humming".parse::<SoundCategory>(),
            Err(UnknownCategory("humming".into()))
        );
    }

    #[test]
    fn ten_model_sources() {
        let v: Vec<_> = Source::model_sources().collect();
        assert_eq!(v.len(), 10);
        assert_eq!(v[9], Source::Symptoms);
    }

    #[test]
    fn serializes_as_map_key() {
        let mut m = std::collections::BTreeMap::new();
        m.insert(Source::Sound(SoundCategory::VowelO), 1);
        m.insert(Source::Symptoms, 2);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"vowel-o":1,"symptoms":2}"#);
        let back: std::collections::BTreeMap<Source, i32> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
