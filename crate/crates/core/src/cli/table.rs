//! Reading request tables back and turning them into measure inputs.

use std::collections::HashMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;

use crate::generator::output::cell;
use crate::generator::Instance;
use crate::metrics::{dynamism, geographic_dispersion, urgency, DispersionRequest, MetricsSummary};
use crate::network::{RoadNetwork, StationSet, TravelCache};
use crate::similarity::SimilarityRequest;

/// Request table as strings, one row per request.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Table> {
        let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
        let headers = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for r in rdr.records() {
            rows.push(r?.iter().map(str::to_string).collect());
        }
        Ok(Table { headers, rows })
    }

    /// Every attribute of a generated instance, printed columns or not.
    pub fn from_instance(instance: &Instance, net: &RoadNetwork) -> Table {
        let headers: Vec<String> = instance
            .requests
            .first()
            .map(|r| r.values.keys().cloned().collect())
            .unwrap_or_default();
        let rows = instance
            .requests
            .iter()
            .map(|r| headers.iter().map(|h| r.get(h).map(|v| cell(v, net)).unwrap_or_default()).collect())
            .collect();
        Table { headers, rows }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn numbers(&self, name: &str) -> Option<Result<Vec<f64>>> {
        let c = self.column(name)?;
        Some(
            self.rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    r[c].trim()
                        .parse::<f64>()
                        .map_err(|_| anyhow!("row {}: `{name}` is not a number: {:?}", i + 1, r[c]))
                })
                .collect(),
        )
    }

    fn keys(&self, name: &str, locator: &dyn Locator) -> Option<Result<Vec<usize>>> {
        let c = self.column(name)?;
        Some(
            self.rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    locator
                        .locate(&r[c])
                        .ok_or_else(|| anyhow!("row {}: unknown location {:?} in `{name}`", i + 1, r[c]))
                })
                .collect(),
        )
    }
}

/// Attribute names the measures read.
#[derive(Debug, Clone, Args)]
pub struct ColumnNames {
    #[arg(long, default_value = "origin")]
    pub origin: String,
    #[arg(long, default_value = "destination")]
    pub destination: String,
    #[arg(long, default_value = "time_stamp")]
    pub time_stamp: String,
    #[arg(long, default_value = "earliest_departure")]
    pub earliest_departure: String,
    #[arg(long, default_value = "latest_departure")]
    pub latest_departure: String,
    #[arg(long, default_value = "latest_arrival")]
    pub latest_arrival: String,
    /// Station set near the origin; when given with --stops-destination the
    /// direct time is averaged over station pairs
    #[arg(long)]
    pub stops_origin: Option<String>,
    #[arg(long)]
    pub stops_destination: Option<String>,
}

impl Default for ColumnNames {
    fn default() -> Self {
        ColumnNames {
            origin: "origin".into(),
            destination: "destination".into(),
            time_stamp: "time_stamp".into(),
            earliest_departure: "earliest_departure".into(),
            latest_departure: "latest_departure".into(),
            latest_arrival: "latest_arrival".into(),
            stops_origin: None,
            stops_destination: None,
        }
    }
}

/// Maps location labels to keys and keys to travel times.
pub trait Locator: Sync {
    fn locate(&self, label: &str) -> Option<usize>;
    fn station(&self, id: &str) -> Option<usize>;
    fn travel(&self, u: usize, v: usize) -> f64;
}

pub struct NetworkLocator<'a> {
    net: &'a RoadNetwork,
    cache: TravelCache<'a>,
    stations: HashMap<String, usize>,
}

impl<'a> NetworkLocator<'a> {
    pub fn new(net: &'a RoadNetwork, stations: &StationSet) -> Result<Self> {
        Ok(NetworkLocator {
            net,
            cache: TravelCache::new(net)?,
            stations: stations.stations.iter().map(|s| (s.id.clone(), s.drive_node)).collect(),
        })
    }
}

impl Locator for NetworkLocator<'_> {
    fn locate(&self, label: &str) -> Option<usize> {
        self.net.node_index(label.trim()).ok()
    }

    fn station(&self, id: &str) -> Option<usize> {
        self.stations.get(id.trim()).copied()
    }

    fn travel(&self, u: usize, v: usize) -> f64 {
        self.cache.travel_time(u, v).unwrap_or(f64::INFINITY)
    }
}

/// Travel times read from a matrix file whose first row and column are labels.
pub struct MatrixLocator {
    index: HashMap<String, usize>,
    times: Vec<Vec<f64>>,
}

impl MatrixLocator {
    pub fn read(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_path(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let mut records = rdr.records();
        let header = records.next().context("matrix file is empty")??;
        let labels: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
        let mut times = Vec::with_capacity(labels.len());
        for (i, rec) in records.enumerate() {
            let rec = rec?;
            if rec.get(0).map(str::trim) != labels.get(i).map(String::as_str) {
                bail!("matrix row {} label does not match the header", i + 1);
            }
            let row = rec
                .iter()
                .skip(1)
                .map(|c| if c.trim().is_empty() { Ok(f64::INFINITY) } else { c.trim().parse::<f64>() })
                .collect::<Result<Vec<f64>, _>>()
                .with_context(|| format!("matrix row {}", i + 1))?;
            if row.len() != labels.len() {
                bail!("matrix row {} has {} cells for {} labels", i + 1, row.len(), labels.len());
            }
            times.push(row);
        }
        if times.len() != labels.len() {
            bail!("matrix has {} rows for {} labels", times.len(), labels.len());
        }
        Ok(MatrixLocator {
            index: labels.into_iter().enumerate().map(|(i, l)| (l, i)).collect(),
            times,
        })
    }
}

impl Locator for MatrixLocator {
    fn locate(&self, label: &str) -> Option<usize> {
        self.index.get(label.trim()).copied()
    }

    fn station(&self, id: &str) -> Option<usize> {
        self.locate(id)
    }

    fn travel(&self, u: usize, v: usize) -> f64 {
        self.times[u][v]
    }
}

fn station_list(cell: &str) -> Vec<&str> {
    cell.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

pub struct MeasureOptions<'a> {
    pub columns: &'a ColumnNames,
    pub period: Option<(f64, f64)>,
    pub th_s: f64,
    pub n: usize,
}

/// Computes every measure the table has columns for. Skipped measures are
/// reported as warnings; a table without rows is an error.
pub fn measure_table(table: &Table, locator: &dyn Locator, opts: &MeasureOptions) -> Result<(MetricsSummary, Vec<String>)> {
    if table.rows.is_empty() {
        return Err(crate::metrics::MetricsError::EmptyInstance.into());
    }
    let cols = opts.columns;
    let mut summary = MetricsSummary::default();
    let mut warnings = Vec::new();

    let stamps = table.numbers(&cols.time_stamp).transpose()?;
    match (&stamps, opts.period) {
        (Some(ts), Some(period)) => {
            let mut sorted = ts.clone();
            sorted.sort_by(f64::total_cmp);
            summary.dynamism = Some(dynamism(&sorted, period)?);
        }
        (None, _) => warnings.push(format!("no `{}` column; dynamism skipped", cols.time_stamp)),
        (_, None) => warnings.push("planning period unknown; dynamism skipped".to_string()),
    }

    match (&stamps, table.numbers(&cols.latest_departure).transpose()?) {
        (Some(ts), Some(lu)) => {
            let ts_min = opts.period.map(|p| p.0).unwrap_or(f64::NEG_INFINITY);
            let pairs: Vec<(f64, f64)> = ts.iter().copied().zip(lu).filter(|(t, _)| *t > ts_min).collect();
            summary.urgency = Some(urgency(&pairs)?);
        }
        _ => warnings.push(format!("no `{}` column; urgency skipped", cols.latest_departure)),
    }

    let parts = (
        table.keys(&cols.origin, locator).transpose()?,
        table.keys(&cols.destination, locator).transpose()?,
        table.numbers(&cols.earliest_departure).transpose()?,
        table.numbers(&cols.latest_arrival).transpose()?,
    );
    match parts {
        (Some(o), Some(d), Some(e), Some(l)) => {
            let stops = match (&cols.stops_origin, &cols.stops_destination) {
                (Some(a), Some(b)) => Some((
                    table.column(a).with_context(|| format!("no `{a}` column"))?,
                    table.column(b).with_context(|| format!("no `{b}` column"))?,
                )),
                _ => None,
            };
            let mut reqs = Vec::with_capacity(o.len());
            for (i, row) in table.rows.iter().enumerate() {
                let direct = match stops {
                    Some((sa, sb)) => station_average(&row[sa], &row[sb], locator)
                        .with_context(|| format!("row {}: no usable station pair", i + 1))?,
                    None => locator.travel(o[i], d[i]),
                };
                reqs.push(DispersionRequest {
                    origin: o[i],
                    destination: d[i],
                    earliest_departure: e[i],
                    latest_arrival: l[i],
                    direct,
                });
            }
            let travel = |u: usize, v: usize| locator.travel(u, v);
            summary.dispersion = Some(geographic_dispersion(&reqs, &travel, opts.th_s, opts.n)?);
        }
        _ => warnings.push("origin, destination or time window columns missing; dispersion skipped".to_string()),
    }
    Ok((summary, warnings))
}

fn station_average(a: &str, b: &str, locator: &dyn Locator) -> Option<f64> {
    let from: Vec<usize> = station_list(a).into_iter().filter_map(|s| locator.station(s)).collect();
    let to: Vec<usize> = station_list(b).into_iter().filter_map(|s| locator.station(s)).collect();
    if from.is_empty() || to.is_empty() {
        return None;
    }
    let total: f64 = from.iter().flat_map(|&u| to.iter().map(move |&v| (u, v))).map(|(u, v)| locator.travel(u, v)).sum();
    Some(total / (from.len() * to.len()) as f64)
}

/// Rows as similarity inputs.
pub fn similarity_requests(table: &Table, locator: &dyn Locator, cols: &ColumnNames) -> Result<Vec<SimilarityRequest>> {
    let missing = |name: &str| anyhow!("missing attribute `{name}`");
    let o = table.keys(&cols.origin, locator).ok_or_else(|| missing(&cols.origin))??;
    let d = table.keys(&cols.destination, locator).ok_or_else(|| missing(&cols.destination))??;
    let ts = table.numbers(&cols.time_stamp).ok_or_else(|| missing(&cols.time_stamp))??;
    let e = table
        .numbers(&cols.earliest_departure)
        .ok_or_else(|| missing(&cols.earliest_departure))??;
    Ok((0..o.len())
        .map(|i| SimilarityRequest {
            origin: o[i],
            destination: d[i],
            time_stamp: ts[i],
            earliest_departure: e[i],
        })
        .collect())
}
