//! Construction certificates: which route built a design and the flat bound
//! that route guarantees.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::io::{Meta, GENERATOR_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Geometry,
    Truncate,
    InflateOdd,
    InflateEven,
    InflateHeavy,
    FallbackEvenTop,
    Catalog,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Geometry => "geometry",
            Route::Truncate => "truncate",
            Route::InflateOdd => "inflate_odd",
            Route::InflateEven => "inflate_even",
            Route::InflateHeavy => "inflate_heavy",
            Route::FallbackEvenTop => "fallback_even_top",
            Route::Catalog => "catalog",
        }
    }

    pub fn from_name(s: &str) -> Option<Route> {
        serde_json::from_value(Value::String(s.into())).ok()
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub route: Route,
    pub d: Option<usize>,
    pub params: Map<String, Value>,
    /// Every flat generated by three points has at most this many points.
    pub flat_bound: usize,
}

impl Certificate {
    pub fn new(route: Route, d: Option<usize>, flat_bound: usize) -> Self {
        Certificate { route, d, params: Map::new(), flat_bound }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }

    pub fn to_meta(&self, seed: u64) -> Meta {
        let mut params = self.params.clone();
        if let Some(d) = self.d {
            params.insert("d".into(), d.into());
        }
        Meta {
            route: Some(self.route.name().into()),
            params,
            flat_bound: Some(self.flat_bound),
            generator_version: GENERATOR_VERSION.into(),
            seed,
        }
    }

    pub fn from_meta(meta: &Meta) -> Result<Self> {
        let name = meta.route.as_deref().ok_or_else(|| Error::Format("meta has no route".into()))?;
        let route = Route::from_name(name).ok_or_else(|| Error::Format(format!("unknown route {name:?}")))?;
        let flat_bound = meta.flat_bound.ok_or_else(|| Error::Format("meta has no flat_bound".into()))?;
        let mut params = meta.params.clone();
        let d = params.remove("d").and_then(|v| v.as_u64()).map(|d| d as usize);
        Ok(Certificate { route, d, params, flat_bound })
    }
}
