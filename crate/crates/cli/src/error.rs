use std::fmt;

/// Error with the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Parse(String),
    Trap(String),
    Deadlock(String),
    Acceptance(String),
}

impl CliError {
    pub fn io(msg: impl Into<String>) -> CliError {
        CliError::Io(msg.into())
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Trap(_) => 3,
            CliError::Deadlock(_) => 4,
            CliError::Acceptance(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m)
            | CliError::Parse(m)
            | CliError::Trap(m)
            | CliError::Deadlock(m)
            | CliError::Acceptance(m) => f.write_str(m),
        }
    }
}

impl From<xdsp::ClusterError> for CliError {
    fn from(e: xdsp::ClusterError) -> Self {
        match e {
            xdsp::ClusterError::Trap { .. } => CliError::Trap(e.to_string()),
            xdsp::ClusterError::Deadlock { .. } => CliError::Deadlock(e.to_string()),
            xdsp::ClusterError::NoCores => CliError::Io(e.to_string()),
        }
    }
}

impl From<xdsp::kernels::RunError> for CliError {
    fn from(e: xdsp::kernels::RunError) -> Self {
        match e {
            xdsp::kernels::RunError::Cluster(c) => c.into(),
            other => CliError::Io(other.to_string()),
        }
    }
}

/// Writes `contents` to `path` via a temporary file and rename.
pub fn write_atomic(path: &std::path::Path, contents: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp~");
    std::fs::write(&tmp, contents)
        .and_then(|_| std::fs::rename(&tmp, path))
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}
