use thiserror::Error;

use idealab::bw::BwError;
use idealab::ideals::IdealError;
use idealab::reductions::ReductionError;
use idealab::setexpr::SetExprError;
use idealab::vdw::VdwError;

/// An error tagged with the flag whose value caused it, when there is one.
#[derive(Debug, Error)]
#[error("error[{code}]{}: {message}", flag.as_ref().map(|f| format!(" in --{f}")).unwrap_or_default())]
pub struct CliError {
    pub code: String,
    pub flag: Option<String>,
    pub message: String,
}

impl CliError {
    pub fn usage(flag: &str, message: impl Into<String>) -> CliError {
        CliError { code: "cli::usage".into(), flag: Some(flag.into()), message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> CliError {
        CliError { code: "cli::io".into(), flag: None, message: message.into() }
    }
}

macro_rules! from_domain {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> CliError {
                CliError { code: e.code().into(), flag: None, message: e.to_string() }
            }
        }
    )*};
}

from_domain!(SetExprError, IdealError, ReductionError, BwError, VdwError);

/// Attaches the flag name to an error raised while reading that flag.
pub trait OnFlag<T> {
    fn on(self, flag: &str) -> Result<T, CliError>;
}

impl<T, E: Into<CliError>> OnFlag<T> for Result<T, E> {
    fn on(self, flag: &str) -> Result<T, CliError> {
        self.map_err(|e| {
            let mut e = e.into();
            e.flag.get_or_insert_with(|| flag.to_string());
            e
        })
    }
}
