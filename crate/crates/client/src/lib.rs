//! Typed client for the screening service's HTTP API.

use std::time::Duration;

use reqwest::{Method, RequestBuilder, Response};
use serde::de::DeserializeOwned;

use rspscrn_core::api::{
    Ack, CategoryInfo, CreatedSession, ErrorBody, Metadata, SessionView, UploadReport, API_PREFIX,
};
use rspscrn_core::fusion::ScreenResult;
use rspscrn_core::symptoms::SymptomRecord;
use rspscrn_core::SoundCategory;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    /// The service answered with an error body.
    #[error("{status} {code}: {message}")]
    Api { status: u16, code: String, message: String },
    #[error("unexpected response ({status}): {message}")]
    Decode { status: u16, message: String },
}

impl ClientError {
    /// The service's error code, when it sent one.
    pub fn code(&self) -> Option<&str> {
        match self {
            ClientError::Api { code, .. } => Some(code),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScreenClient {
    http: reqwest::Client,
    base: String,
}

impl ScreenClient {
    /// `base_url` is the server root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base_url: &str) -> Result<Self, ClientError> {
        let http = reqwest::Client::builder().timeout(Duration::from_secs(120)).build()?;
        Ok(ScreenClient {
            http,
            base: format!("{}{API_PREFIX}", base_url.trim_end_matches('/')),
        })
    }

    fn request(&self, method: Method, path: &str) -> RequestBuilder {
        self.http.request(method, format!("{}{path}", self.base))
    }

    async fn send<T: DeserializeOwned>(req: RequestBuilder) -> Result<T, ClientError> {
        let resp: Response = req.send().await?;
        let status = resp.status().as_u16();
        let bytes = resp.bytes().await?;
        if (200..300).contains(&status) {
            return serde_json::from_slice(&bytes).map_err(|e| ClientError::Decode {
                status,
                message: e.to_string(),
            });
        }
        match serde_json::from_slice::<ErrorBody>(&bytes) {
            Ok(body) => Err(ClientError::Api {
                status,
                code: body.error_code,
                message: body.message,
            }),
            Err(_) => Err(ClientError::Decode {
                status,
                message: String::from_utf8_lossy(&bytes).into_owned(),
            }),
        }
    }

    pub async fn health(&self) -> Result<Ack, ClientError> {
        Self::send(self.request(Method::GET, "/health")).await
    }

    pub async fn categories(&self) -> Result<Vec<CategoryInfo>, ClientError> {
        Self::send(self.request(Method::GET, "/categories")).await
    }

    pub async fn create_session(&self) -> Result<String, ClientError> {
        let created: CreatedSession = Self::send(self.request(Method::POST, "/sessions")).await?;
        Ok(created.id)
    }

    pub async fn session(&self, id: &str) -> Result<SessionView, ClientError> {
        Self::send(self.request(Method::GET, &format!("/sessions/{id}"))).await
    }

    pub async fn put_metadata(&self, id: &str, metadata: &Metadata) -> Result<(), ClientError> {
        let req = self.request(Method::PUT, &format!("/sessions/{id}/metadata")).json(metadata);
        Self::send::<Ack>(req).await.map(drop)
    }

    pub async fn put_symptoms(&self, id: &str, record: &SymptomRecord) -> Result<(), ClientError> {
        self.put_symptoms_json(id, &serde_json::to_value(record).expect("record serializes"))
            .await
    }

    /// Sends answers as-is, for callers holding raw questionnaire JSON.
    pub async fn put_symptoms_json(&self, id: &str, answers: &serde_json::Value) -> Result<(), ClientError> {
        let req = self.request(Method::PUT, &format!("/sessions/{id}/symptoms")).json(answers);
        Self::send::<Ack>(req).await.map(drop)
    }

    pub async fn upload_audio(
        &self,
        id: &str,
        category: SoundCategory,
        wav: Vec<u8>,
    ) -> Result<UploadReport, ClientError> {
        let req = self
            .request(Method::PUT, &format!("/sessions/{id}/audio/{}", category.id()))
            .header(reqwest::header::CONTENT_TYPE, "audio/wav")
            .body(wav);
        Self::send(req).await
    }

    pub async fn score(&self, id: &str) -> Result<ScreenResult, ClientError> {
        Self::send(self.request(Method::POST, &format!("/sessions/{id}/score"))).await
    }
}
