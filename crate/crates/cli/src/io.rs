//! Input files: network JSON, scenario CSV, auction JSON.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use gridcap_core::auction::AuctionConfig;
use gridcap_core::network::{NetworkSpec, RadialNetwork};
use gridcap_core::risk::{BoxBounds, ScenarioSet};

use crate::CliError;

/// Raw file contents with their SHA-256, read once so the hash matches what
/// was parsed.
#[derive(Debug, Clone)]
pub struct InputFile {
    pub path: String,
    pub text: String,
    pub sha256: String,
}

pub fn read_input(path: &Path) -> Result<InputFile, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let sha256 = crate::manifest::sha256_hex(&bytes);
    let text = String::from_utf8(bytes).map_err(|e| CliError::Input(format!("{}: not UTF-8: {e}", path.display())))?;
    Ok(InputFile {
        path: path.display().to_string(),
        text,
        sha256,
    })
}

/// Network file layout. Buses are 1-based; `null` limits are unbounded.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    n_buses: usize,
    edges: Vec<(usize, usize)>,
    line_upper: Vec<Option<f64>>,
    line_lower: Vec<Option<f64>>,
    withdrawal_cap: Vec<Option<f64>>,
    demand: Vec<f64>,
    load_lower: Option<Vec<f64>>,
    load_upper: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct NetworkInput {
    pub network: RadialNetwork,
    /// Background-load box, when the file carries one.
    pub bounds: Option<BoxBounds>,
}

pub fn parse_network(file: &InputFile) -> Result<NetworkInput, CliError> {
    let raw: NetworkFile =
        serde_json::from_str(&file.text).map_err(|e| CliError::Input(format!("{}: {e}", file.path)))?;
    let unbounded = |v: Vec<Option<f64>>, inf: f64| -> Vec<f64> { v.into_iter().map(|x| x.unwrap_or(inf)).collect() };
    let spec = NetworkSpec {
        n_buses: raw.n_buses,
        edges: raw.edges,
        line_upper: unbounded(raw.line_upper, f64::INFINITY),
        line_lower: unbounded(raw.line_lower, f64::NEG_INFINITY),
        withdrawal_cap: unbounded(raw.withdrawal_cap, f64::INFINITY),
        demand: raw.demand,
    };
    let network = RadialNetwork::new(spec).map_err(|e| CliError::Input(format!("{}: {e}", file.path)))?;
    let bounds = match (raw.load_lower, raw.load_upper) {
        (None, None) => None,
        (Some(lo), Some(hi)) => {
            let n = network.n_buses();
            for (key, v) in [("load_lower", &lo), ("load_upper", &hi)] {
                if v.len() != n {
                    return Err(CliError::Input(format!(
                        "{}: \"{key}\" has {} entries for {n} buses",
                        file.path,
                        v.len()
                    )));
                }
            }
            Some(BoxBounds::new(lo, hi).map_err(|e| CliError::Input(format!("{}: {e}", file.path)))?)
        }
        (Some(_), None) => return Err(CliError::Input(format!("{}: \"load_lower\" given without \"load_upper\"", file.path))),
        (None, Some(_)) => return Err(CliError::Input(format!("{}: \"load_upper\" given without \"load_lower\"", file.path))),
    };
    Ok(NetworkInput { network, bounds })
}

/// Scenario CSV with header `bus_1,...,bus_N` and one sample per row.
pub fn parse_scenarios(file: &InputFile, n_buses: usize) -> Result<ScenarioSet, CliError> {
    let err = |msg: String| CliError::Input(format!("{}: {msg}", file.path));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file.text.as_bytes());
    let header = reader.headers().map_err(|e| err(e.to_string()))?.clone();
    let expected: Vec<String> = (1..=n_buses).map(|i| format!("bus_{i}")).collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(err(format!(
            "header must be {}, found {}",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| err(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .zip(&expected)
            .map(|(cell, col)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("line {line}, column {col}: {cell:?} is not a finite number")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        samples.push(row);
    }
    ScenarioSet::new(samples).map_err(|e| err(e.to_string()))
}

pub fn parse_auction(file: &InputFile) -> Result<AuctionConfig, CliError> {
    let cfg: AuctionConfig =
        serde_json::from_str(&file.text).map_err(|e| CliError::Input(format!("{}: {e}", file.path)))?;
    cfg.validate().map_err(|e| CliError::Input(format!("{}: {e}", file.path)))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(text: &str) -> InputFile {
        InputFile {
            path: "mem".into(),
            text: text.into(),
            sha256: String::new(),
        }
    }

    const TWO_BUS: &str = r#"{"n_buses": 2, "edges": [[1, 2]], "line_upper": [8], "line_lower": [-8],
        "withdrawal_cap": [null, 12], "demand": [0, 10], "load_lower": [0, 0], "load_upper": [0, 3]}"#;

    #[test]
    fn network_nulls_are_unbounded() {
        let net = parse_network(&file(TWO_BUS)).unwrap();
        assert_eq!(net.network.withdrawal_cap()[0], f64::INFINITY);
        assert_eq!(net.bounds.unwrap().upper(), &[0.0, 3.0]);
    }

    #[test]
    fn missing_key_is_named() {
        let err = parse_network(&file(r#"{"n_buses": 1, "line_upper": [], "line_lower": [],
            "withdrawal_cap": [null], "demand": [0]}"#))
        .unwrap_err();
        assert!(err.to_string().contains("edges"), "{err}");
    }

    #[test]
    fn half_a_box_is_rejected() {
        let text = TWO_BUS.replace(r#", "load_upper": [0, 3]"#, "");
        assert!(parse_network(&file(&text)).unwrap_err().to_string().contains("load_upper"));
    }

    #[test]
    fn scenario_header_and_cells_checked() {
        let ok = parse_scenarios(&file("bus_1,bus_2\n0,1\n0,2\n"), 2).unwrap();
        assert_eq!(ok.count(), 2);
        assert!(parse_scenarios(&file("bus_2,bus_1\n0,1\n"), 2).is_err());
        let err = parse_scenarios(&file("bus_1,bus_2\n0,1\n0,x\n"), 2).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
