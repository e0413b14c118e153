use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use raforge_core::catalog::{CatalogError, InputError};
use raforge_core::comparison::ComparisonError;
use raforge_core::gateway::GatewayError;
use raforge_core::ingest::IngestError;
use raforge_core::session::SessionError;
use raforge_core::export::ExportError;
use raforge_core::workspace::StoreError;
use serde::Serialize;

/// JSON error body. `code` is stable and machine-readable; `pointer` names
/// the offending request field when there is one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pointer: Option<String>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            pointer: None,
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub fn with_pointer(mut self, pointer: impl Into<String>) -> Self {
        self.pointer = Some(pointer.into());
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

fn comparison_code(e: &ComparisonError) -> &'static str {
    match e {
        ComparisonError::UnknownDimension(_) => "unknown_dimension",
        ComparisonError::UnknownColumn(_) => "unknown_column",
        ComparisonError::DuplicateKey(_) => "duplicate_dimension",
        ComparisonError::DuplicateLabel(_) => "duplicate_column",
        ComparisonError::ColumnLabelClash(_) => "column_label_clash",
        ComparisonError::EmptyIdentity(_) => "empty_identity",
        ComparisonError::Invalid(_) => "invalid_comparison",
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        use StatusCode as S;
        let (status, code) = match &e {
            StoreError::NotFound(_) => (S::NOT_FOUND, "workspace_not_found"),
            StoreError::AlreadyExists(_) => (S::CONFLICT, "workspace_exists"),
            StoreError::InvalidWorkspace(_) => (S::BAD_REQUEST, "invalid_workspace"),
            StoreError::SchemaMismatch { .. } => (S::CONFLICT, "schema_mismatch"),
            StoreError::CorruptFile(_) => (S::INTERNAL_SERVER_ERROR, "corrupt_workspace"),
            StoreError::Io { .. } => (S::INTERNAL_SERVER_ERROR, "storage_io"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        use StatusCode as S;
        let message = e.to_string();
        match e {
            SessionError::Store(e) => e.into(),
            SessionError::Catalog(CatalogError::UnknownScenario(_)) => {
                ApiError::new(S::BAD_REQUEST, "unknown_scenario", message).with_pointer("/scenario")
            }
            SessionError::Catalog(_) => ApiError::new(S::INTERNAL_SERVER_ERROR, "template_error", message),
            SessionError::Input(e) => {
                let code = match e {
                    InputError::MissingSlot { .. } => "missing_slot",
                    InputError::TooFewValues { .. } => "too_few_values",
                    InputError::TooManyValues { .. } => "too_many_values",
                    InputError::EmptyInput { .. } => "empty_input",
                };
                ApiError::new(S::BAD_REQUEST, code, message)
                    .with_pointer(format!("/inputs/{}", e.slot().as_str()))
            }
            SessionError::Ingest(IngestError::NoUsableTable) => {
                ApiError::new(S::UNPROCESSABLE_ENTITY, "no_usable_table", message).with_pointer("/text")
            }
            SessionError::Merge(e) => ApiError::new(S::BAD_REQUEST, comparison_code(&e), message),
            SessionError::Edit { index, error } => {
                ApiError::new(S::BAD_REQUEST, comparison_code(&error), message)
                    .with_pointer(format!("/commands/{index}"))
            }
            SessionError::Conflict { .. } => {
                ApiError::new(S::CONFLICT, "stale_snapshot", message).with_pointer("/base_hash")
            }
            SessionError::Export(ExportError::MissingMetadata(label)) => {
                ApiError::new(S::BAD_REQUEST, "missing_metadata", message)
                    .with_pointer(format!("/papers/{label}"))
            }
            SessionError::Gateway(e) => {
                let (status, code) = match e {
                    GatewayError::Config(_) => (S::INTERNAL_SERVER_ERROR, "gateway_config"),
                    GatewayError::EmptyPrompt => (S::BAD_REQUEST, "empty_prompt"),
                    GatewayError::AuthFailed(_) => (S::BAD_GATEWAY, "gateway_auth"),
                    GatewayError::RateLimited { .. } => (S::SERVICE_UNAVAILABLE, "gateway_rate_limited"),
                    GatewayError::Timeout => (S::GATEWAY_TIMEOUT, "gateway_timeout"),
                    GatewayError::MalformedResponse(_) => (S::BAD_GATEWAY, "gateway_malformed"),
                    GatewayError::Http(_) | GatewayError::Transport(_) => (S::BAD_GATEWAY, "gateway_unreachable"),
                };
                ApiError::new(status, code, message)
            }
        }
    }
}
