use serde::Serialize;

/// Exit status for configuration problems.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status for failures inside the numerical modules.
pub const EXIT_NUMERICAL: u8 = 3;

/// Machine-readable error, printed as one JSON line on stderr.
#[derive(Debug, Serialize)]
pub struct Failure {
    pub kind: String,
    /// Module the error originated in.
    pub module: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub registry: Option<Vec<String>>,
    #[serde(skip)]
    pub exit: u8,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            kind: "ConfigInvalid".into(),
            module: "cli".into(),
            message: message.into(),
            registry: None,
            exit: EXIT_CONFIG,
        }
    }

    pub fn io(err: std::io::Error) -> Self {
        Failure {
            kind: "Io".into(),
            module: "cli".into(),
            message: err.to_string(),
            registry: None,
            exit: EXIT_CONFIG,
        }
    }

    /// Wraps a library error; argument-shaped errors count as configuration errors.
    pub fn from_lib(module: &str, err: homoglab::Error) -> Self {
        use homoglab::Error as E;
        let exit = match err {
            E::InvalidArgument(_) | E::ExponentOutOfRange(_) | E::InvalidGrid(_) | E::Format(_) => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        };
        let debug = format!("{err:?}");
        let kind = debug
            .split(|c: char| !c.is_alphanumeric())
            .next()
            .unwrap_or("Error")
            .to_string();
        Failure {
            kind,
            module: module.into(),
            message: err.to_string(),
            registry: None,
            exit,
        }
    }
}

/// `result.map_err(in_module("corrector"))?`
pub fn in_module(module: &'static str) -> impl Fn(homoglab::Error) -> Failure {
    move |e| Failure::from_lib(module, e)
}
