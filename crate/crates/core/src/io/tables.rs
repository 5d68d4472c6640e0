//! CSV tables. Undefined values are written as empty fields.

use crate::correlator::CorrelationCurve;
use crate::error::{Error, Result};
use crate::fss::{FssOutcome, QwpPoint, QwpSeries};

/// One temperature of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TempSweepRow {
    pub temperature_k: f64,
    pub peak_fidelity: f64,
    pub sigma: f64,
    /// `None` when the decay fit failed or was degenerate.
    pub hwhm_ps: Option<f64>,
    pub x_lifetime_ps: f64,
}

const TEMPSWEEP_HEADER: [&str; 5] = [
    "temperature_K",
    "peak_fidelity",
    "sigma",
    "hwhm_ps",
    "x_lifetime_ps",
];
const SERIES_HEADER: [&str; 3] = ["chi_rad", "delta_e_ueV", "sigma_ueV"];

fn writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner()
        .map_err(|e| Error::io("<csv buffer>", e.into_error()))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn check_header(r: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<()> {
    let header = r.headers()?;
    let found: Vec<&str> = header.iter().collect();
    if found != expected {
        return Err(Error::Format {
            offset: 0,
            message: format!("expected header {}, found {}", expected.join(","), found.join(",")),
        });
    }
    Ok(())
}

fn field(record: &csv::StringRecord, i: usize) -> Result<Option<f64>> {
    let raw = record.get(i).unwrap_or("").trim();
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse::<f64>().map(Some).map_err(|_| Error::Format {
        offset: record.position().map_or(0, |p| p.byte()),
        message: format!("column {i}: {raw:?} is not a number"),
    })
}

fn required(record: &csv::StringRecord, i: usize) -> Result<f64> {
    field(record, i)?.ok_or_else(|| Error::Format {
        offset: record.position().map_or(0, |p| p.byte()),
        message: format!("column {i} is empty"),
    })
}

/// `delay_ps,<value_column>,sigma`.
pub fn curve_to_csv(curve: &CorrelationCurve, value_column: &str) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(["delay_ps", value_column, "sigma"])?;
    for i in 0..curve.len() {
        let defined = curve.values[i].is_some();
        w.write_record([
            curve.delays_ps[i].to_string(),
            opt(curve.values[i]),
            if defined { curve.sigma[i].to_string() } else { String::new() },
        ])?;
    }
    finish(w)
}

/// Reads a three-column curve table whose first column is `delay_ps` and
/// last is `sigma`. Returns the name of the value column with the curve.
pub fn read_curve_csv(bytes: &[u8]) -> Result<(String, CorrelationCurve)> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers()?.clone();
    if header.len() != 3 || &header[0] != "delay_ps" || &header[2] != "sigma" {
        return Err(Error::Format {
            offset: 0,
            message: format!("unexpected curve header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let (mut d, mut v, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        d.push(required(&rec, 0)?);
        v.push(field(&rec, 1)?);
        s.push(field(&rec, 2)?.unwrap_or(0.0));
    }
    Ok((header[1].to_string(), CorrelationCurve::new(d, v, s)?))
}

pub fn tempsweep_to_csv(rows: &[TempSweepRow]) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(TEMPSWEEP_HEADER)?;
    for row in rows {
        w.write_record([
            row.temperature_k.to_string(),
            row.peak_fidelity.to_string(),
            row.sigma.to_string(),
            opt(row.hwhm_ps),
            row.x_lifetime_ps.to_string(),
        ])?;
    }
    finish(w)
}

pub fn read_tempsweep_csv(bytes: &[u8]) -> Result<Vec<TempSweepRow>> {
    let mut r = csv::Reader::from_reader(bytes);
    check_header(&mut r, &TEMPSWEEP_HEADER)?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(TempSweepRow {
                temperature_k: required(&rec, 0)?,
                peak_fidelity: required(&rec, 1)?,
                sigma: required(&rec, 2)?,
                hwhm_ps: field(&rec, 3)?,
                x_lifetime_ps: required(&rec, 4)?,
            })
        })
        .collect()
}

/// `chi_rad,delta_e_ueV,sigma_ueV`.
pub fn qwp_series_to_csv(series: &QwpSeries) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(SERIES_HEADER)?;
    for p in series.points() {
        w.write_record([
            p.chi_rad.to_string(),
            p.delta_e_ueV.to_string(),
            p.sigma_ueV.to_string(),
        ])?;
    }
    finish(w)
}

pub fn read_qwp_series_csv(bytes: &[u8]) -> Result<QwpSeries> {
    let mut r = csv::Reader::from_reader(bytes);
    check_header(&mut r, &SERIES_HEADER)?;
    let points = r
        .records()
        .map(|rec| {
            let rec = rec?;
            Ok(QwpPoint {
                chi_rad: required(&rec, 0)?,
                delta_e_ueV: required(&rec, 1)?,
                sigma_ueV: required(&rec, 2)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    QwpSeries::new(points)
}

/// `parameter,estimate,sigma`. An unresolved splitting is reported as a
/// single `fss_unresolved` row holding the upper bound on |s|.
pub fn fss_fit_to_csv(outcome: &FssOutcome) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(["parameter", "estimate", "sigma"])?;
    match outcome {
        FssOutcome::Resolved(fit) => {
            for (i, (name, value)) in fit.parameter_names().iter().zip(fit.estimates()).enumerate() {
                w.write_record([name.to_string(), value.to_string(), opt(fit.sigma(i))])?;
            }
            let reduced = if fit.dof > 0 { fit.chi2 / fit.dof as f64 } else { f64::NAN };
            w.write_record(["reduced_chi2".to_string(), reduced.to_string(), String::new()])?;
        }
        FssOutcome::Unresolved { upper_bound_ueV, .. } => {
            w.write_record([
                "fss_unresolved".to_string(),
                upper_bound_ueV.to_string(),
                String::new(),
            ])?;
        }
    }
    finish(w)
}
