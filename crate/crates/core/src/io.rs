// SPDX-License-Identifier: Apache-2.0

//! CSV formats.
//!
//! | data | header |
//! |------|--------|
//! | reflection trace | `freq_ghz,re,im` |
//! | scalar spectrum | `freq_ghz,mag_db` or `freq_ghz,mag` |
//! | Rabi record | `t_ns,y` |
//! | sweep table | `V_G,<value>` |
//! | map | `<slow>\<fast>,<fast_0>,<fast_1>,...` then `<slow_i>,<v_i0>,<v_i1>,...` |
//!
//! Numbers are written with the shortest representation that round-trips exactly.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::data::{ComplexTrace, Map2D, Series};
use crate::error::{Error, Result};
use crate::estimators::ReflectionParams;

pub const TRACE_HEADER: [&str; 3] = ["freq_ghz", "re", "im"];
pub const SERIES_HEADERS: [[&str; 2]; 3] =
    [["freq_ghz", "mag_db"], ["freq_ghz", "mag"], ["t_ns", "y"]];

struct Table {
    source: String,
    header: Vec<String>,
    /// `(line number, fields)`.
    rows: Vec<(u64, Vec<String>)>,
}

fn csv_err(source: &str, line: u64, msg: impl Into<String>) -> Error {
    Error::Csv {
        path: source.to_string(),
        line,
        msg: msg.into(),
    }
}

fn read_table<R: Read>(reader: R, source: &str) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut header = None;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_err(source, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        if header.is_none() {
            header = Some(fields);
        } else {
            rows.push((line, fields));
        }
    }
    let header = header.ok_or_else(|| csv_err(source, 1, "file is empty"))?;
    Ok(Table {
        source: source.to_string(),
        header,
        rows,
    })
}

impl Table {
    fn expect_header(&self, options: &[&[&str]]) -> Result<usize> {
        let h: Vec<&str> = self.header.iter().map(|s| s.as_str()).collect();
        options
            .iter()
            .position(|o| *o == h.as_slice())
            .ok_or_else(|| {
                let want: Vec<String> = options.iter().map(|o| o.join(",")).collect();
                csv_err(
                    &self.source,
                    1,
                    format!(
                        "header `{}` is not one of: {}",
                        h.join(","),
                        want.join(" | ")
                    ),
                )
            })
    }

    fn numbers(&self, width: Option<usize>) -> Result<Vec<(u64, Vec<f64>)>> {
        self.rows
            .iter()
            .map(|(line, fields)| {
                if let Some(w) = width {
                    if fields.len() != w {
                        return Err(csv_err(
                            &self.source,
                            *line,
                            format!("expected {w} fields, found {}", fields.len()),
                        ));
                    }
                }
                let vals = fields
                    .iter()
                    .map(|f| {
                        f.parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| {
                                csv_err(
                                    &self.source,
                                    *line,
                                    format!("`{f}` is not a finite number"),
                                )
                            })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Ok((*line, vals))
            })
            .collect()
    }

    fn check_ascending(&self, rows: &[(u64, Vec<f64>)]) -> Result<()> {
        if rows.is_empty() {
            return Err(csv_err(&self.source, 2, "no data rows"));
        }
        for w in rows.windows(2) {
            if !(w[1].1[0] > w[0].1[0]) {
                return Err(csv_err(
                    &self.source,
                    w[1].0,
                    "first column must be strictly increasing",
                ));
            }
        }
        Ok(())
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| csv_err(&path.display().to_string(), 0, e.to_string()))
}

pub fn parse_trace<R: Read>(reader: R, source: &str) -> Result<ComplexTrace> {
    let t = read_table(reader, source)?;
    t.expect_header(&[&TRACE_HEADER])?;
    let rows = t.numbers(Some(3))?;
    t.check_ascending(&rows)?;
    let freqs = rows.iter().map(|r| r.1[0]).collect();
    let values = rows
        .iter()
        .map(|r| Complex64::new(r.1[1], r.1[2]))
        .collect();
    ComplexTrace::new(freqs, values)
}

pub fn read_trace(path: &Path) -> Result<ComplexTrace> {
    parse_trace(open(path)?, &path.display().to_string())
}

/// Parses any of [`SERIES_HEADERS`]; returns the series and its header.
pub fn parse_series<R: Read>(reader: R, source: &str) -> Result<(Series, [&'static str; 2])> {
    let t = read_table(reader, source)?;
    let options: Vec<&[&str]> = SERIES_HEADERS.iter().map(|h| h.as_slice()).collect();
    let which = t.expect_header(&options)?;
    let rows = t.numbers(Some(2))?;
    t.check_ascending(&rows)?;
    let s = Series::new(
        rows.iter().map(|r| r.1[0]).collect(),
        rows.iter().map(|r| r.1[1]).collect(),
    )?;
    Ok((s, SERIES_HEADERS[which]))
}

pub fn read_series(path: &Path) -> Result<(Series, [&'static str; 2])> {
    parse_series(open(path)?, &path.display().to_string())
}

/// Two-column table `V_G,<value>`; returns the value column name and the columns.
pub fn parse_sweep_table<R: Read>(reader: R, source: &str) -> Result<(String, Vec<f64>, Vec<f64>)> {
    let t = read_table(reader, source)?;
    if t.header.len() != 2 || t.header[0] != "V_G" {
        return Err(csv_err(
            source,
            1,
            "sweep table header must be `V_G,<value>`",
        ));
    }
    let rows = t.numbers(Some(2))?;
    t.check_ascending(&rows)?;
    Ok((
        t.header[1].clone(),
        rows.iter().map(|r| r.1[0]).collect(),
        rows.iter().map(|r| r.1[1]).collect(),
    ))
}

pub fn read_sweep_table(path: &Path) -> Result<(String, Vec<f64>, Vec<f64>)> {
    parse_sweep_table(open(path)?, &path.display().to_string())
}

pub fn parse_map<R: Read>(reader: R, source: &str) -> Result<Map2D> {
    let t = read_table(reader, source)?;
    let (slow_label, fast_label) = t
        .header
        .first()
        .and_then(|c| c.split_once('\\'))
        .ok_or_else(|| csv_err(source, 1, "first header cell must be `<slow>\\<fast>`"))?;
    let fast = t
        .header
        .iter()
        .skip(1)
        .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| csv_err(source, 1, "fast-axis header must be numeric"))?;
    if fast.is_empty() || fast.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(csv_err(
            source,
            1,
            "fast axis must be non-empty and strictly increasing",
        ));
    }
    let rows = t.numbers(Some(fast.len() + 1))?;
    t.check_ascending(&rows)?;
    Map2D::new(
        slow_label,
        fast_label,
        rows.iter().map(|r| r.1[0]).collect(),
        fast,
        rows.iter().map(|r| r.1[1..].to_vec()).collect(),
    )
}

pub fn read_map(path: &Path) -> Result<Map2D> {
    parse_map(open(path)?, &path.display().to_string())
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn io_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn write_rows<W: Write, I>(w: W, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut out = writer(w);
    out.write_record(header).map_err(io_err)?;
    for r in rows {
        out.write_record(r.iter().map(|v| v.to_string()))
            .map_err(io_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trace<W: Write>(w: W, trace: &ComplexTrace) -> Result<()> {
    write_rows(
        w,
        &TRACE_HEADER,
        trace
            .freqs_ghz
            .iter()
            .zip(&trace.values)
            .map(|(f, v)| vec![*f, v.re, v.im]),
    )
}

pub fn write_series<W: Write>(w: W, series: &Series, header: [&str; 2]) -> Result<()> {
    write_rows(
        w,
        &header,
        series.x.iter().zip(&series.y).map(|(x, y)| vec![*x, *y]),
    )
}

pub fn write_map<W: Write>(w: W, map: &Map2D) -> Result<()> {
    let mut out = writer(w);
    let mut header = vec![format!("{}\\{}", map.slow_label, map.fast_label)];
    header.extend(map.fast.iter().map(|v| v.to_string()));
    out.write_record(&header).map_err(io_err)?;
    for (s, row) in map.slow.iter().zip(&map.values) {
        let rec = std::iter::once(s.to_string()).chain(row.iter().map(|v| v.to_string()));
        out.write_record(rec).map_err(io_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Data, model and residual per sample of a reflection fit.
pub fn write_reflection_residuals<W: Write>(
    w: W,
    trace: &ComplexTrace,
    model: &ReflectionParams,
) -> Result<()> {
    write_rows(
        w,
        &[
            "freq_ghz", "re", "im", "model_re", "model_im", "resid_re", "resid_im",
        ],
        trace.freqs_ghz.iter().zip(&trace.values).map(|(&f, &s)| {
            let m = model.eval(f);
            let r = s - m;
            vec![f, s.re, s.im, m.re, m.im, r.re, r.im]
        }),
    )
}

/// Data, model and residual per sample of a scalar fit.
pub fn write_series_residuals<W: Write>(
    w: W,
    series: &Series,
    x_label: &str,
    model: impl Fn(f64) -> f64,
) -> Result<()> {
    write_rows(
        w,
        &[x_label, "y", "model", "resid"],
        series.x.iter().zip(&series.y).map(|(&x, &y)| {
            let m = model(x);
            vec![x, y, m, y - m]
        }),
    )
}

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_round_trip_is_exact() {
        let t = ComplexTrace::new(
            vec![5.0, 5.1, 5.2],
            vec![
                Complex64::new(0.1, -0.2),
                Complex64::new(1.0 / 3.0, 1e-17),
                Complex64::new(-2.5, 0.0),
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trace(&mut buf, &t).unwrap();
        assert!(buf.starts_with(b"freq_ghz,re,im\n"));
        assert_eq!(parse_trace(buf.as_slice(), "mem").unwrap(), t);
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = "freq_ghz,re,im\n5.0,0.1,0.2\n5.1,abc,0.2\n";
        match parse_trace(text.as_bytes(), "mem") {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = "freq_ghz,re,im\n5.0,0.1,0.2\n5.1,0.2\n";
        assert!(matches!(
            parse_trace(text.as_bytes(), "mem"),
            Err(Error::Csv { line: 3, .. })
        ));
    }

    #[test]
    fn empty_and_wrong_header() {
        assert!(matches!(
            parse_trace("".as_bytes(), "mem"),
            Err(Error::Csv { line: 1, .. })
        ));
        assert!(matches!(
            parse_trace("f,re,im\n1,2,3\n".as_bytes(), "mem"),
            Err(Error::Csv { line: 1, .. })
        ));
        assert!(matches!(
            parse_trace("freq_ghz,re,im\n".as_bytes(), "mem"),
            Err(Error::Csv { .. })
        ));
    }

    #[test]
    fn descending_axis_rejected() {
        let text = "t_ns,y\n0,1\n2,1\n1,1\n";
        assert!(matches!(
            parse_series(text.as_bytes(), "mem"),
            Err(Error::Csv { line: 4, .. })
        ));
    }

    #[test]
    fn series_headers_recognised() {
        let (s, h) = parse_series("freq_ghz,mag_db\n1,-3\n2,-4\n".as_bytes(), "mem").unwrap();
        assert_eq!(h, ["freq_ghz", "mag_db"]);
        assert_eq!(s.y, vec![-3.0, -4.0]);
    }

    #[test]
    fn map_round_trip() {
        let m = Map2D::new(
            "v_g",
            "freq_ghz",
            vec![-1.0, 0.5],
            vec![5.0, 5.5, 6.0],
            vec![vec![1.0, 2.0, 3.0], vec![0.25, 0.5, 0.125]],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_map(&mut buf, &m).unwrap();
        assert!(buf.starts_with(b"v_g\\freq_ghz,5,5.5,6\n"));
        assert_eq!(parse_map(buf.as_slice(), "mem").unwrap(), m);
    }

    #[test]
    fn sweep_table_parses() {
        let (name, v, x) =
            parse_sweep_table("V_G,EJ_MHz\n0,0\n1,5000\n".as_bytes(), "mem").unwrap();
        assert_eq!(name, "EJ_MHz");
        assert_eq!(v, vec![0.0, 1.0]);
        assert_eq!(x, vec![0.0, 5000.0]);
    }
}
