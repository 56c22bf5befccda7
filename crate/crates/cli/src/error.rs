use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] crackmap::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: crackmap::Error,
    },

    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

impl CliError {
    pub fn in_stage(stage: impl Into<String>) -> impl FnOnce(crackmap::Error) -> Self {
        let stage = stage.into();
        move |source| CliError::Stage { stage, source }
    }

    /// 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) | CliError::Stage { source: e, .. } if e.is_config() => 2,
            _ => 3,
        }
    }
}
