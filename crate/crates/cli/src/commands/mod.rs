pub mod analyze;
pub mod budget;
pub mod calibrate;
pub mod resonances;
pub mod simulate;
pub mod sweep;

/// Command failure carrying the process exit code: config errors exit 2,
/// numerical failures exit 3, I/O failures exit 1.
#[derive(Debug)]
pub enum CmdError {
    Config(anyhow::Error),
    Numerical(anyhow::Error),
    Io(anyhow::Error),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Numerical(_) => 3,
            CmdError::Io(_) => 1,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CmdError::Config(e) => format!("config error: {e:#}"),
            CmdError::Numerical(e) => format!("numerical failure: {e:#}"),
            CmdError::Io(e) => format!("i/o error: {e:#}"),
        }
    }
}

pub type CmdResult<T> = Result<T, CmdError>;

/// Classify `nvmag_core` errors raised while *computing* as numerical.
pub trait NumericalExt<T> {
    fn numerical(self) -> CmdResult<T>;
}

impl<T> NumericalExt<T> for Result<T, nvmag_core::Error> {
    fn numerical(self) -> CmdResult<T> {
        self.map_err(|e| CmdError::Numerical(e.into()))
    }
}

/// Classify errors raised while *building domain objects from the config*
/// as config errors.
pub trait ConfigExt<T> {
    fn config_err(self) -> CmdResult<T>;
}

impl<T> ConfigExt<T> for Result<T, nvmag_core::Error> {
    fn config_err(self) -> CmdResult<T> {
        self.map_err(|e| CmdError::Config(e.into()))
    }
}

pub trait IoExt<T> {
    fn io_err(self) -> CmdResult<T>;
}

impl<T> IoExt<T> for anyhow::Result<T> {
    fn io_err(self) -> CmdResult<T> {
        self.map_err(CmdError::Io)
    }
}
