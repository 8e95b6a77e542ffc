//! Run configuration: one TOML document per run, overridden by flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{usage, CliError};

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// TOML file with the parameters of this command.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
}

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
}

pub fn to_toml<T: Serialize>(cfg: &T) -> String {
    toml::to_string(cfg).expect("configs serialize to TOML")
}

/// Copies every flag that was given into the config.
macro_rules! overlay {
    ($cfg:expr, $args:expr, $($field:ident),+ $(,)?) => {
        $( if let Some(v) = $args.$field.clone() { $cfg.$field = v.into(); } )+
    };
}
pub(crate) use overlay;

pub fn require<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path, CliError> {
    p.as_deref()
        .ok_or_else(|| usage(format!("missing required `{what}` (flag or config key)")))
}
