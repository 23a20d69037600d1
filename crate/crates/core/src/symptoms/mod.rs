//! Health questionnaire encoding and the CART decision tree that scores it.

mod record;
pub mod synthetic;
mod tree;

pub use record::{
    encode_symptoms, AgeBand, FeatureVector, SymptomRecord, TriState, FEATURE_NAMES, FEATURE_SCHEMA_VERSION,
    N_FEATURES,
};
pub use tree::{train_tree, tree_predict, DecisionTree, Node, TreeConfig, TREE_FORMAT_VERSION};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymptomError {
    #[error("symptom record must be a JSON object")]
    NotAnObject,
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("invalid field `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("training data is empty")]
    EmptyDataset,
    #[error("feature vector has {found} entries, tree expects {expected}")]
    SchemaMismatch { expected: usize, found: usize },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
}

impl SymptomError {
    pub fn code(&self) -> &'static str {
        match self {
            SymptomError::NotAnObject
            | SymptomError::MissingField(_)
            | SymptomError::InvalidField { .. }
            | SymptomError::UnknownField(_) => "SchemaViolation",
            SymptomError::EmptyDataset => "EmptyDataset",
            SymptomError::SchemaMismatch { .. } => "SchemaMismatch",
            SymptomError::InvalidTree(_) => "InvalidTree",
        }
    }
}
