use vlf::eval::EvalError;
use vlf::features::FeatureError;
use vlf::fed::FedError;
use vlf::ingest::IngestError;
use vlf::nn::NnError;

/// Failure classes with distinct exit codes: 2 config, 3 data, 4 numeric,
/// 5 I/O. Code 1 is left to the panic handler.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Config(_) => CliError::Config(e.to_string()),
            IngestError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::BadWindowBounds(..) | FeatureError::BadSplit(..) => {
                CliError::Config(e.to_string())
            }
            FeatureError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<NnError> for CliError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::BadConfig(_) | NnError::DimMismatch(_) => CliError::Config(e.to_string()),
            NnError::Diverged { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<FedError> for CliError {
    fn from(e: FedError) -> Self {
        match e {
            FedError::AllDiverged { .. } | FedError::Overflow => {
                CliError::Numeric(e.to_string())
            }
            FedError::Nn(inner) => inner.into(),
            FedError::NoUpdates | FedError::ZeroWeights => CliError::Data(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::BadGrid(_) => CliError::Config(e.to_string()),
            EvalError::Nn(inner) => inner.into(),
            _ => CliError::Data(e.to_string()),
        }
    }
}
