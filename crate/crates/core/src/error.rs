use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The graph violates a structural requirement (cycle, self-loop, duplicate arc).
    #[error("structural error: {0}")]
    Structure(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid data: {0}")]
    Data(String),

    /// Parameter estimation failed. `node` is filled in once the failure is
    /// attributed to a network node.
    #[error("fit error{}: {message}", node.as_ref().map(|n| format!(" at node `{n}`")).unwrap_or_default())]
    Fit {
        node: Option<String>,
        message: String,
    },

    #[error(
        "fkde dimensionality: joint dims {dims:?} need {elements} padded elements per tensor \
         (limit {max_elements}, max parents {max_parents})"
    )]
    FkdeDimensionality {
        dims: Vec<usize>,
        elements: u128,
        max_elements: u128,
        max_parents: usize,
    },

    #[error("sampling error at node `{node}`: {message}")]
    Sampling { node: String, message: String },

    #[error("node sets differ: {0}")]
    NodeSetMismatch(String),
}

impl Error {
    pub(crate) fn fit(message: impl Into<String>) -> Self {
        Error::Fit {
            node: None,
            message: message.into(),
        }
    }

    /// Attaches a node name to fit errors that do not carry one yet.
    pub fn at_node(self, name: &str) -> Self {
        match self {
            Error::Fit { node: None, message } => Error::Fit {
                node: Some(name.to_string()),
                message,
            },
            other => other,
        }
    }
}
