use maxwell_qr::driver::DriverError;
use maxwell_qr::edgefem::FemError;
use maxwell_qr::formulations::FormulationError;
use maxwell_qr::mesh::MeshError;
use maxwell_qr::synth::SynthError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => 1,
            Self::Numerical(_) => 2,
            Self::Invariant(_) => 3,
        }
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::InvalidParameter(_) | MeshError::Parse { .. } | MeshError::Partition(_) => {
                Self::Config(e.to_string())
            }
            _ => Self::Invariant(e.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::InvalidNoise(_) | SynthError::InvalidWave(_) | SynthError::Parse { .. } => {
                Self::Config(e.to_string())
            }
            SynthError::Io(io) => Self::Io(io),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<FormulationError> for CliError {
    fn from(e: FormulationError) -> Self {
        match e {
            FormulationError::InvalidParameter(_)
            | FormulationError::VariantMismatch { .. }
            | FormulationError::MissingData(_) => Self::Config(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<DriverError> for CliError {
    fn from(e: DriverError) -> Self {
        match e {
            DriverError::Formulation(f) => f.into(),
            DriverError::Mesh(m) => m.into(),
            DriverError::Synth(s) => s.into(),
            DriverError::InvalidGrid(_)
            | DriverError::Fem(FemError::NotGamma0(_) | FemError::LengthMismatch { .. }) => Self::Config(e.to_string()),
            DriverError::NotNested(_) => Self::Invariant(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}
