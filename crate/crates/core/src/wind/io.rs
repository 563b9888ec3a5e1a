//! CSV exchange formats for wind fields and annual mean-wind series.

use std::io::{Read, Write};

use super::{WindError, WindField};

fn io_err(e: impl std::fmt::Display) -> WindError {
    WindError::Io(e.to_string())
}

/// Header `t_s,wt1_mps,...,wtN_mps`; speeds written at full round-trip precision.
pub fn write_wind_field<W: Write>(field: &WindField, out: W) -> Result<(), WindError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t_s".to_string()];
    header.extend((1..=field.n_turbines()).map(|i| format!("wt{i}_mps")));
    w.write_record(&header).map_err(io_err)?;
    let mut row = Vec::with_capacity(header.len());
    for k in 0..field.n_steps() {
        row.clear();
        row.push(format!("{}", k as f64 * field.dt));
        row.extend(field.speeds.iter().map(|s| format!("{}", s[k])));
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_wind_field<R: Read>(input: R) -> Result<WindField, WindError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(io_err)?.clone();
    if headers.get(0) != Some("t_s") || headers.len() < 2 {
        return Err(WindError::Io("expected header `t_s,wt1_mps,...`".into()));
    }
    for (i, h) in headers.iter().enumerate().skip(1) {
        if h != format!("wt{i}_mps") {
            return Err(WindError::Io(format!("unexpected column `{h}`, expected `wt{i}_mps`")));
        }
    }
    let n = headers.len() - 1;
    let mut times = Vec::new();
    let mut speeds = vec![Vec::new(); n];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(io_err)?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| WindError::Io(format!("row {}: `{s}`: {e}", line + 2)))
        };
        times.push(parse(&rec[0])?);
        for (i, series) in speeds.iter_mut().enumerate() {
            series.push(parse(&rec[i + 1])?);
        }
    }
    let dt = match times.as_slice() {
        [a, b, ..] => b - a,
        _ => return Err(WindError::Io("wind field needs at least two rows".into())),
    };
    let field = WindField { dt, speeds };
    field.validate()?;
    Ok(field)
}

/// Header `hour,mean_mps`, one row per hour.
pub fn read_annual_means<R: Read>(input: R) -> Result<Vec<f64>, WindError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(io_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["hour", "mean_mps"] {
        return Err(WindError::Io("expected header `hour,mean_mps`".into()));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(io_err)?;
        let v: f64 = rec[1]
            .trim()
            .parse()
            .map_err(|e| WindError::Io(format!("row {}: {e}", i + 2)))?;
        if !(v >= 0.0) {
            return Err(WindError::NegativeSpeed(v));
        }
        out.push(v);
    }
    Ok(out)
}

pub fn write_annual_means<W: Write>(means: &[f64], out: W) -> Result<(), WindError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["hour", "mean_mps"]).map_err(io_err)?;
    for (h, v) in means.iter().enumerate() {
        w.write_record([h.to_string(), format!("{v:.4}")]).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wind_field_csv_round_trip() {
        let field = WindField {
            dt: 0.5,
            speeds: vec![vec![1.0, 2.25, 1.0 / 3.0], vec![0.0, 11.123456789, 7.0]],
        };
        let mut buf = Vec::new();
        write_wind_field(&field, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t_s,wt1_mps,wt2_mps\n0,1,0\n0.5,"));
        assert_eq!(read_wind_field(buf.as_slice()).unwrap(), field);
    }

    #[test]
    fn annual_csv_checks_header_and_values() {
        let mut buf = Vec::new();
        write_annual_means(&[7.5, 8.25], &mut buf).unwrap();
        assert_eq!(read_annual_means(buf.as_slice()).unwrap(), vec![7.5, 8.25]);
        assert!(read_annual_means("h,v\n0,1\n".as_bytes()).is_err());
        assert!(read_annual_means("hour,mean_mps\n0,-1\n".as_bytes()).is_err());
        assert!(read_annual_means("hour,mean_mps\n0,abc\n".as_bytes()).is_err());
    }
}
