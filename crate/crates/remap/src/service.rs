//! The HTTP front end: every `/api/...` request goes to [`crate::api::dispatch`],
//! anything else is looked up in the static asset directory.

use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::Body;
use axum::extract::State;
use axum::http::{header, HeaderValue, Method, StatusCode, Uri};
use axum::response::Response;
use axum::Router;
use remap_core::datastore::load_snapshot;
use remap_core::Snapshot;
use tokio::net::TcpListener;
use tokio::sync::oneshot;

use crate::api::{self, Defaults};

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub snapshot: PathBuf,
    pub defaults: Defaults,
    /// Directory holding the UI bundle; `None` serves the API only.
    pub static_dir: Option<PathBuf>,
    /// Value of `Access-Control-Allow-Origin`.
    pub cors_origin: String,
}

impl ServiceConfig {
    pub fn new(listen: SocketAddr, snapshot: impl Into<PathBuf>) -> Self {
        Self {
            listen,
            snapshot: snapshot.into(),
            defaults: Defaults::default(),
            static_dir: None,
            cors_origin: "*".into(),
        }
    }

    pub fn validate(&self) -> Result<(), ServeError> {
        self.defaults.validate().map_err(ServeError::Config)?;
        HeaderValue::from_str(&self.cors_origin)
            .map_err(|_| ServeError::Config(format!("invalid CORS origin `{}`", self.cors_origin)))?;
        if let Some(dir) = &self.static_dir {
            if !dir.is_dir() {
                return Err(ServeError::Config(format!("static directory {} does not exist", dir.display())));
            }
        }
        std::fs::File::open(&self.snapshot).map_err(|e| {
            ServeError::Snapshot(remap_core::Error::Io {
                path: self.snapshot.display().to_string(),
                reason: e.to_string(),
            })
        })?;
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error(transparent)]
    Snapshot(#[from] remap_core::Error),
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

struct Inner {
    snapshot: RwLock<Option<Arc<Snapshot>>>,
    defaults: Defaults,
    static_dir: Option<PathBuf>,
    cors_origin: HeaderValue,
}

/// Shared service state. Cloning is cheap; clones share the snapshot slot.
#[derive(Clone)]
pub struct Service {
    inner: Arc<Inner>,
}

impl Service {
    pub fn new(defaults: Defaults, static_dir: Option<PathBuf>, cors_origin: &str) -> Self {
        Self {
            inner: Arc::new(Inner {
                snapshot: RwLock::new(None),
                defaults,
                static_dir,
                cors_origin: HeaderValue::from_str(cors_origin).unwrap_or(HeaderValue::from_static("*")),
            }),
        }
    }

    /// A ready service with default settings.
    pub fn with_snapshot(snapshot: Snapshot) -> Self {
        let service = Self::new(Defaults::default(), None, "*");
        service.swap(snapshot);
        service
    }

    /// Installs a new snapshot. Requests already running keep the old one.
    pub fn swap(&self, snapshot: Snapshot) -> Option<Arc<Snapshot>> {
        let mut slot = self.inner.snapshot.write().unwrap_or_else(|e| e.into_inner());
        slot.replace(Arc::new(snapshot))
    }

    pub fn snapshot(&self) -> Option<Arc<Snapshot>> {
        self.inner.snapshot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn router(&self) -> Router {
        Router::new().fallback(handle).with_state(self.clone())
    }
}

async fn handle(State(service): State<Service>, method: Method, uri: Uri) -> Response {
    let mut response = if method == Method::OPTIONS {
        let mut r = Response::new(Body::empty());
        *r.status_mut() = StatusCode::NO_CONTENT;
        r.headers_mut()
            .insert(header::ACCESS_CONTROL_ALLOW_METHODS, HeaderValue::from_static("GET, OPTIONS"));
        r.headers_mut()
            .insert(header::ACCESS_CONTROL_ALLOW_HEADERS, HeaderValue::from_static("*"));
        r
    } else if uri.path().starts_with("/api/") || uri.path() == "/api" {
        let target = uri.path_and_query().map_or(uri.path(), |pq| pq.as_str()).to_string();
        let answer = match service.snapshot() {
            None => api::not_ready(),
            Some(snapshot) => {
                let defaults = service.inner.defaults;
                let method = method.as_str().to_string();
                tokio::task::spawn_blocking(move || api::dispatch(&snapshot, &defaults, &method, &target))
                    .await
                    .unwrap_or_else(|e| api::Response {
                        status: 500,
                        body: crate::json::error("Internal", &e.to_string()),
                    })
            }
        };
        json_response(answer)
    } else {
        static_asset(service.inner.static_dir.as_deref(), uri.path()).await
    };
    response
        .headers_mut()
        .insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, service.inner.cors_origin.clone());
    response
}

fn json_response(answer: api::Response) -> Response {
    let mut r = Response::new(Body::from(answer.body));
    *r.status_mut() = StatusCode::from_u16(answer.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    r.headers_mut().insert(
        header::CONTENT_TYPE,
        HeaderValue::from_static("application/json; charset=utf-8"),
    );
    r
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).unwrap_or("") {
        "html" => "text/html; charset=utf-8",
        "js" | "mjs" => "text/javascript; charset=utf-8",
        "css" => "text/css; charset=utf-8",
        "json" | "map" => "application/json",
        "svg" => "image/svg+xml",
        "png" => "image/png",
        "ico" => "image/x-icon",
        "woff2" => "font/woff2",
        "txt" => "text/plain; charset=utf-8",
        _ => "application/octet-stream",
    }
}

async fn static_asset(dir: Option<&Path>, request_path: &str) -> Response {
    let not_found = || {
        json_response(api::Response {
            status: 404,
            body: crate::json::error("UnknownRoute", &format!("no resource at `{request_path}`")),
        })
    };
    let Some(dir) = dir else {
        return not_found();
    };
    let relative = Path::new(request_path.trim_start_matches('/'));
    if relative.components().any(|c| !matches!(c, Component::Normal(_))) {
        return not_found();
    }
    let mut path = dir.join(relative);
    if request_path.ends_with('/') || relative.as_os_str().is_empty() {
        path.push("index.html");
    }
    match tokio::fs::read(&path).await {
        Ok(bytes) => {
            let mut r = Response::new(Body::from(bytes));
            r.headers_mut()
                .insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type(&path)));
            r
        }
        Err(_) => not_found(),
    }
}

/// Binds, answers 503 until the snapshot has loaded in the background, then
/// serves until Ctrl-C. On Unix, SIGHUP reloads the snapshot file.
pub async fn serve(config: ServiceConfig) -> Result<(), ServeError> {
    config.validate()?;
    let listener = TcpListener::bind(config.listen)
        .await
        .map_err(|source| ServeError::Bind { addr: config.listen, source })?;
    let service = Service::new(config.defaults, config.static_dir.clone(), &config.cors_origin);
    eprintln!("listening on {}", listener.local_addr()?);

    let (failed_tx, failed_rx) = oneshot::channel::<remap_core::Error>();
    {
        let service = service.clone();
        let path = config.snapshot.clone();
        tokio::spawn(async move {
            match tokio::task::spawn_blocking(move || load_snapshot::<f64>(&path)).await {
                Ok(Ok(snapshot)) => {
                    eprintln!("snapshot loaded: {} countries", snapshot.country_count());
                    service.swap(snapshot);
                }
                Ok(Err(e)) => {
                    let _ = failed_tx.send(e);
                }
                Err(e) => {
                    let _ = failed_tx.send(remap_core::Error::InvalidSnapshot(e.to_string()));
                }
            }
        });
    }
    #[cfg(unix)]
    spawn_reload_on_hangup(service.clone(), config.snapshot.clone())?;

    let (stop_tx, stop_rx) = oneshot::channel::<()>();
    let failure = tokio::spawn(async move {
        // A successful load drops the sender; that must not stop the server.
        let load_failed = async {
            match failed_rx.await {
                Ok(e) => e,
                Err(_) => std::future::pending().await,
            }
        };
        let result = tokio::select! {
            e = load_failed => Some(e),
            _ = tokio::signal::ctrl_c() => None,
        };
        let _ = stop_tx.send(());
        result
    });
    axum::serve(listener, service.router())
        .with_graceful_shutdown(async move {
            let _ = stop_rx.await;
        })
        .await?;
    match failure.await {
        Ok(Some(e)) => Err(e.into()),
        _ => Ok(()),
    }
}

#[cfg(unix)]
fn spawn_reload_on_hangup(service: Service, path: PathBuf) -> Result<(), ServeError> {
    use tokio::signal::unix::{signal, SignalKind};
    let mut hangup = signal(SignalKind::hangup())?;
    tokio::spawn(async move {
        while hangup.recv().await.is_some() {
            let p = path.clone();
            match tokio::task::spawn_blocking(move || load_snapshot::<f64>(&p)).await {
                Ok(Ok(snapshot)) => {
                    service.swap(snapshot);
                    eprintln!("snapshot reloaded from {}", path.display());
                }
                Ok(Err(e)) => eprintln!("reload failed, keeping the current snapshot: {e}"),
                Err(e) => eprintln!("reload failed: {e}"),
            }
        }
    });
    Ok(())
}
