//! Flag/config-file merging and validation.

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use serrin_core::constants::DEFAULT_THETA;
use serrin_core::deviation::CenterStrategy;
use serrin_core::geometry::{default_boundary_order, default_volume_orders, DomainSpec};
use serrin_core::identities::GridOrders;
use serrin_core::torsion::DEFAULT_DEGREE;

use crate::output::Format;
use crate::Common;

pub const MIN_ORDER: usize = 8;
pub const MAX_ORDER: usize = 4096;

#[derive(Debug)]
pub enum Failure {
    /// Bad flags, files or specs.
    Invalid(String),
    /// A library error, with the operation and the input that caused it.
    Core { op: &'static str, input: String, error: serrin_core::Error },
    Io(String),
}

impl Failure {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Failure::Invalid(msg.into())
    }

    pub fn core(op: &'static str, input: &str, error: serrin_core::Error) -> Self {
        Failure::Core { op, input: input.to_string(), error }
    }

    pub fn code(&self) -> u8 {
        2
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "invalid input: {m}"),
            Failure::Core { op, input, error } => write!(f, "{op} failed on {input}: {error}"),
            Failure::Io(m) => write!(f, "{m}"),
        }
    }
}

/// Flags merged over an optional JSON config file.
#[derive(Debug, Clone, Default)]
pub struct Config {
    file: Map<String, Value>,
    pub domain: Option<String>,
    pub output: Option<String>,
    format: Option<Format>,
    boundary_order: Option<usize>,
    radial_order: Option<usize>,
    angular_order: Option<usize>,
    degree: Option<usize>,
    center: Option<String>,
    theta: Option<f64>,
}

impl Config {
    pub fn load(flags: &Common) -> Result<Config, Failure> {
        let file = match &flags.config {
            None => Map::new(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::invalid(format!("config file `{path}` cannot be read: {e}")))?;
                match serde_json::from_str::<Value>(&text) {
                    Ok(Value::Object(m)) => m,
                    Ok(_) => return Err(Failure::invalid(format!("config file `{path}` must hold a JSON object"))),
                    Err(e) => return Err(Failure::invalid(format!("config file `{path}` is not JSON: {e}"))),
                }
            }
        };
        let mut cfg = Config { file, ..Config::default() };
        cfg.domain = cfg.file_get("domain")?;
        cfg.output = flags.output.clone().or(cfg.file_get("output")?);
        cfg.format = flags.format.or(cfg.file_get("format")?);
        cfg.boundary_order = flags.boundary_order.or(cfg.file_get("boundary_order")?);
        cfg.radial_order = flags.radial_order.or(cfg.file_get("radial_order")?);
        cfg.angular_order = flags.angular_order.or(cfg.file_get("angular_order")?);
        cfg.degree = flags.degree.or(cfg.file_get("degree")?);
        cfg.center = flags.center.clone().or(cfg.file_get("center")?);
        cfg.theta = flags.theta.or(cfg.file_get("theta")?);
        Ok(cfg)
    }

    /// Config values may hold the domain as an object or as a string.
    fn file_get<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>, Failure> {
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => {
                let v = if key == "domain" && v.is_object() { Value::String(v.to_string()) } else { v.clone() };
                serde_json::from_value(v).map(Some).map_err(|e| Failure::invalid(format!("config key `{key}`: {e}")))
            }
        }
    }

    pub fn with_domain(mut self, flag: Option<String>) -> Self {
        if flag.is_some() {
            self.domain = flag;
        }
        self
    }

    /// A command-specific value from the config file.
    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        self.file.get(key).and_then(|v| serde_json::from_value(v.clone()).ok())
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.get(key)
    }

    pub fn format(&self) -> Format {
        self.format_or(Format::Table)
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    pub fn degree(&self) -> usize {
        self.degree.unwrap_or(DEFAULT_DEGREE)
    }

    pub fn theta(&self) -> f64 {
        self.theta.unwrap_or(DEFAULT_THETA)
    }

    pub fn center(&self) -> Result<CenterStrategy, Failure> {
        self.center.as_deref().map_or(Ok(CenterStrategy::ArgminU), parse_center)
    }

    /// Orders in `[8, 4096]`, defaulting per dimension.
    pub fn orders(&self, dim: usize) -> Result<GridOrders, Failure> {
        let (radial, angular) = default_volume_orders(dim);
        let o = GridOrders {
            boundary: self.boundary_order.unwrap_or(default_boundary_order(dim)),
            radial: self.radial_order.unwrap_or(radial),
            angular: self.angular_order.unwrap_or(angular),
        };
        for (name, v) in [("boundary order", o.boundary), ("radial order", o.radial), ("angular order", o.angular)] {
            if !(MIN_ORDER..=MAX_ORDER).contains(&v) {
                return Err(Failure::invalid(format!("{name} {v} is outside [{MIN_ORDER}, {MAX_ORDER}]")));
            }
        }
        Ok(o)
    }
}

/// Inline JSON, or a path to a file holding it.
pub fn parse_domain(text: &str) -> Result<DomainSpec, Failure> {
    let body = if text.trim_start().starts_with('{') {
        text.to_string()
    } else {
        let path = Path::new(text);
        if !path.is_file() {
            return Err(Failure::invalid(format!("domain file `{text}` does not exist")));
        }
        std::fs::read_to_string(path).map_err(|e| Failure::invalid(format!("domain file `{text}`: {e}")))?
    };
    DomainSpec::from_json(&body).map_err(|e| Failure::invalid(format!("domain spec: {e}")))
}

/// `argmin`, `centroid` or `feldman:x1,x2,...`.
pub fn parse_center(text: &str) -> Result<CenterStrategy, Failure> {
    match text {
        "argmin" | "argmin-u" => Ok(CenterStrategy::ArgminU),
        "centroid" => Ok(CenterStrategy::Centroid),
        _ => {
            let coords = text
                .strip_prefix("feldman:")
                .ok_or_else(|| Failure::invalid(format!("unknown center strategy `{text}`")))?;
            let x0 = coords
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::invalid(format!("bad Feldman point `{coords}`: {e}")))?;
            Ok(CenterStrategy::Feldman { x0 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_parse() {
        assert_eq!(parse_center("argmin").unwrap(), CenterStrategy::ArgminU);
        assert_eq!(parse_center("feldman:0.3, 0").unwrap(), CenterStrategy::Feldman { x0: vec![0.3, 0.0] });
        assert!(parse_center("feldman:a").is_err() && parse_center("middle").is_err());
    }

    #[test]
    fn orders_are_bounded() {
        let mut cfg = Config::default();
        assert_eq!(cfg.orders(2).unwrap(), GridOrders { boundary: 256, radial: 64, angular: 256 });
        cfg.boundary_order = Some(4);
        assert!(cfg.orders(2).is_err());
        cfg.boundary_order = Some(5000);
        assert!(cfg.orders(2).is_err());
    }

    #[test]
    fn missing_domain_file_is_invalid() {
        assert!(matches!(parse_domain("/nonexistent/domain.json"), Err(Failure::Invalid(_))));
    }
}
