// Copyright 2026 The rydberg-oct Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("manifest key `{key}`: {message}")]
    Manifest { key: String, message: String },
    #[error("cannot parse manifest {path}: {message}")]
    ManifestSyntax { path: PathBuf, message: String },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: rydberg_oct_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn manifest(key: impl Into<String>, message: impl ToString) -> Self {
        Self::Manifest { key: key.into(), message: message.to_string() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn data(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Self::Data { path: path.into(), message: message.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Manifest { .. } | Self::ManifestSyntax { .. } => "manifest",
            Self::Core { .. } => "numeric",
            Self::Io { .. } => "io",
            Self::Data { .. } => "data",
            Self::Usage(_) => "usage",
        }
    }

    /// The machine-readable form printed on failure.
    pub fn to_json(&self, command: &str) -> serde_json::Value {
        let mut body = json!({
            "kind": self.kind(),
            "command": command,
            "message": self.to_string(),
        });
        if let Self::Manifest { key, .. } = self {
            body["key"] = json!(key);
        }
        json!({ "error": body })
    }
}

/// Attach run context to a core error.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for rydberg_oct_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|source| CliError::Core { context: what(), source })
    }
}
