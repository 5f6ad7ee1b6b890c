//! Space descriptors from scenario tables and command-line strings.

use curtainlab::geom::{ModelSpace, Point, StripLayout, Tree};
use curtainlab::rng::stream;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::CliError;

/// Deserialize `table` into `T`, reporting failures as `<prefix>.<field>: …`.
pub fn params<T: DeserializeOwned>(table: &toml::Table, prefix: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(toml::Value::Table(table.clone())).map_err(|e| {
        let path = e.path().to_string();
        let at = if path == "." { prefix.to_string() } else { format!("{prefix}.{path}") };
        CliError::Validation(format!("{at}: {}", e.inner().message()))
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeParams {
    vertices: Option<usize>,
    edges: Option<Vec<(usize, usize, f64)>>,
    /// Random tree on this many vertices, drawn from the scenario seed.
    random: Option<usize>,
    #[serde(default = "half")]
    min_edge: f64,
    #[serde(default = "six")]
    max_edge: f64,
}

fn half() -> f64 {
    0.5
}

fn six() -> f64 {
    6.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TripodParams {
    #[serde(default = "forty")]
    leg: f64,
}

fn forty() -> f64 {
    40.0
}

/// Vertices of the random tree used when no edges are given.
const DEFAULT_TREE: usize = 60;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolygonParams {
    #[serde(default = "l_shape")]
    vertices: Vec<[f64; 2]>,
}

fn l_shape() -> Vec<[f64; 2]> {
    vec![[0.0, 0.0], [20.0, 0.0], [20.0, 8.0], [8.0, 8.0], [8.0, 20.0], [0.0, 20.0]]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StripParams {
    /// `squares`, `power` or `band`.
    #[serde(default = "squares")]
    layout: String,
    #[serde(default = "seven")]
    n: usize,
    #[serde(default = "height")]
    height: f64,
    /// Exponent for the `power` layout.
    #[serde(default = "two")]
    k: f64,
}

fn squares() -> String {
    "squares".into()
}

fn seven() -> usize {
    7
}

fn height() -> f64 {
    128.0
}

fn two() -> f64 {
    2.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductParams {
    factors: Vec<FactorSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorSpec {
    kind: String,
    #[serde(default)]
    params: toml::Table,
}

pub const KINDS: &str = "plane, h2, tree, tripod, polygon, strip, product";

/// Build a space; `path` names the table for diagnostics.
pub fn build(kind: &str, table: &toml::Table, seed: u64, path: &str) -> Result<ModelSpace, CliError> {
    let p = format!("{path}.params");
    let no_params = |name: &str| -> Result<(), CliError> {
        match table.keys().next() {
            Some(k) => Err(CliError::Validation(format!("{p}.{k}: {name} takes no parameters"))),
            None => Ok(()),
        }
    };
    let space = match kind {
        "plane" => {
            no_params("plane")?;
            Ok(ModelSpace::plane())
        }
        "h2" | "hyperbolic" => {
            no_params("h2")?;
            Ok(ModelSpace::hyperbolic())
        }
        "tree" => {
            let t: TreeParams = params(table, &p)?;
            match (t.random, t.edges) {
                (Some(n), None) => {
                    let edges = Tree::random_edges(n, t.min_edge, t.max_edge, &mut stream(seed, 0x7ee));
                    ModelSpace::tree(n, &edges)
                }
                (None, Some(edges)) => {
                    let n = t.vertices.unwrap_or_else(|| edges.len() + 1);
                    ModelSpace::tree(n, &edges)
                }
                (None, None) => {
                    let n = DEFAULT_TREE;
                    ModelSpace::tree(n, &Tree::random_edges(n, t.min_edge, t.max_edge, &mut stream(seed, 0x7ee)))
                }
                _ => return Err(CliError::Validation(format!("{p}: give at most one of `edges` or `random`"))),
            }
        }
        "tripod" => ModelSpace::tripod(params::<TripodParams>(table, &p)?.leg),
        "polygon" => ModelSpace::polygon(params::<PolygonParams>(table, &p)?.vertices),
        "strip" => {
            let s: StripParams = params(table, &p)?;
            let layout = match s.layout.as_str() {
                "squares" => StripLayout::example51(s.n, s.height),
                "power" => StripLayout::power_gaps(s.n, s.k, s.height),
                "band" => StripLayout::Band,
                other => return Err(CliError::Validation(format!("{p}.layout: unknown layout {other:?} (squares, power, band)"))),
            };
            ModelSpace::strip(layout)
        }
        "product" => {
            let f: ProductParams = params(table, &p)?;
            let mut fs = Vec::new();
            for (i, fac) in f.factors.iter().enumerate() {
                fs.push(build(&fac.kind, &fac.params, seed, &format!("{p}.factors[{i}]"))?);
            }
            ModelSpace::product(fs)
        }
        other => return Err(CliError::Validation(format!("{path}.kind: unknown space {other:?} ({KINDS})"))),
    };
    space.map_err(|e| CliError::Validation(format!("{path}: {e}")))
}

/// `x,y` in planar charts, `edge,offset` in trees.
pub fn point(space: &ModelSpace, s: &str) -> Result<Point, CliError> {
    let bad = || CliError::Validation(format!("bad point {s:?}: expected two comma-separated numbers"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let p = if space.as_tree().is_some() {
        if a < 0.0 || a.fract() != 0.0 {
            return Err(CliError::Validation(format!("bad tree point {s:?}: edge index must be a whole number")));
        }
        space.point_tree(a as usize, b)
    } else if space.is_planar_chart() {
        space.point_xy(a, b)
    } else {
        return Err(CliError::Validation(format!("points cannot be given on the command line for {}", space.kind_name())));
    };
    p.map_err(|e| CliError::Validation(e.to_string()))
}

/// `key=value` pairs into a table; values are parsed as TOML, falling back to strings.
pub fn kv_table(pairs: &[String]) -> Result<toml::Table, CliError> {
    let mut t = toml::Table::new();
    for kv in pairs {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Validation(format!("expected key=value, got {kv:?}")))?;
        t.insert(k.trim().to_string(), parse_value(v.trim()));
    }
    Ok(t)
}

pub fn parse_value(v: &str) -> toml::Value {
    format!("x = {v}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("x"))
        .unwrap_or_else(|| toml::Value::String(v.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_parse_as_toml() {
        assert_eq!(parse_value("3"), toml::Value::Integer(3));
        assert_eq!(parse_value("[1, 2]"), toml::Value::Array(vec![1.into(), 2.into()]));
        assert_eq!(parse_value("auto"), toml::Value::String("auto".into()));
    }

    #[test]
    fn unknown_param_has_path() {
        let t: toml::Table = "leg = 3\nlegs = 4".parse().unwrap();
        let e = build("tripod", &t, 0, "space").unwrap_err().to_string();
        assert!(e.contains("space.params"), "{e}");
        assert!(e.contains("legs"), "{e}");
    }

    #[test]
    fn tree_points() {
        let s = build("tripod", &toml::Table::new(), 0, "space").unwrap();
        assert!(point(&s, "1,2.5").is_ok());
        assert!(point(&s, "1.5,2").is_err());
    }
}
