//! File helpers shared by the command-line tools.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Shortest round-trip rendering of `x`; plain notation for magnitudes in
/// `[1e-3, 1e7)` and zero, scientific notation otherwise.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-3..1e7).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// Value cell of a [`Report`].
pub trait ReportValue {
    fn render(&self) -> String;
}

impl ReportValue for f64 {
    fn render(&self) -> String {
        fmt_f64(*self)
    }
}

macro_rules! display_value {
    ($($t:ty),*) => {$(
        impl ReportValue for $t {
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

display_value!(usize, u32, u64, i64, &str, String);

/// Kind of CSV file recognised from its header row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvKind {
    /// Columns `voltage_V,current_density_A_per_um2,temperature_K`.
    Sweep,
    /// Columns `count,direction,conductance_S,resistance_ohm`.
    Trace,
}

/// Classify a CSV file by its header.
pub fn sniff_csv(path: &Path) -> Result<CsvKind> {
    let mut header = String::new();
    BufReader::new(File::open(path)?).read_line(&mut header)?;
    let cols: Vec<&str> = header.trim().split(',').map(str::trim).collect();
    let has = |name: &str| cols.contains(&name);
    if has("voltage_V") && has("current_density_A_per_um2") && has("temperature_K") {
        Ok(CsvKind::Sweep)
    } else if has("count") && has("direction") && has("conductance_S") {
        Ok(CsvKind::Trace)
    } else {
        Err(Error::invalid(
            "input file",
            format!(
                "{}: header matches neither a sweep nor a pulse trace",
                path.display()
            ),
        ))
    }
}

/// Create `dir` if needed and open `dir/name` for buffered writing.
pub fn create_output(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let file = File::create(&path)?;
    Ok((path, BufWriter::new(file)))
}

/// Write `f`'s output to `dir/name`, returning the path.
pub fn write_output<F>(dir: &Path, name: &str, f: F) -> Result<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let (path, mut w) = create_output(dir, name)?;
    f(&mut w)?;
    w.flush()?;
    Ok(path)
}

/// Table of `metric,value,unit` rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    rows: Vec<(String, String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        metric: impl Into<String>,
        value: impl ReportValue,
        unit: impl Into<String>,
    ) {
        self.rows.push((metric.into(), value.render(), unit.into()));
    }

    pub fn get(&self, metric: &str) -> Option<&str> {
        self.rows
            .iter()
            .find(|(m, _, _)| m == metric)
            .map(|(_, v, _)| v.as_str())
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &str, &str)> {
        self.rows
            .iter()
            .map(|(m, v, u)| (m.as_str(), v.as_str(), u.as_str()))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["metric", "value", "unit"])?;
        for (m, v, u) in &self.rows {
            wtr.write_record([m, v, u])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Aligned plain-text rendering.
    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|(m, _, _)| m.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (m, v, u) in &self.rows {
            let line = format!("{m:<width$}  {v} {u}");
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

/// Parse a comma-separated list of temperatures in kelvin.
pub fn parse_temperatures(s: &str) -> Result<Vec<f64>> {
    let temps = s
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .ok_or_else(|| {
                    Error::config("--temps", format!("`{t}` is not a positive temperature"))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    if temps.is_empty() {
        return Err(Error::config("--temps", "no temperatures given"));
    }
    Ok(temps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(300.0), "300");
        assert_eq!(fmt_f64(1e-9), "1e-9");
        assert_eq!(fmt_f64(-4.2e-13), "-4.2e-13");
        assert_eq!(fmt_f64(7e8), "7e8");
        assert_eq!(fmt_f64(0.0), "0");
        for x in [1.234_567_890_123e-11, 6.999_999_999_999_999, 1e300] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn temperatures_parse() {
        assert_eq!(
            parse_temperatures("300, 330,360").unwrap(),
            vec![300.0, 330.0, 360.0]
        );
        assert!(parse_temperatures("300,-4").is_err());
        assert!(parse_temperatures("300,abc").is_err());
    }

    #[test]
    fn report_round_trip() {
        let mut r = Report::new();
        r.push("on_off", 7.0, "");
        r.push("r_on", 1e8, "ohm");
        assert_eq!(r.get("r_on"), Some("1e8"));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "metric,value,unit\non_off,7,\nr_on,1e8,ohm\n"
        );
    }

    #[test]
    fn sniffing() {
        let dir = std::env::temp_dir().join(format!("fanvm-sniff-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let sweep = dir.join("s.csv");
        std::fs::write(
            &sweep,
            "voltage_V,current_density_A_per_um2,temperature_K\n",
        )
        .unwrap();
        let trace = dir.join("t.csv");
        std::fs::write(&trace, "count,direction,conductance_S,resistance_ohm\n").unwrap();
        let other = dir.join("o.csv");
        std::fs::write(&other, "a,b\n").unwrap();
        assert_eq!(sniff_csv(&sweep).unwrap(), CsvKind::Sweep);
        assert_eq!(sniff_csv(&trace).unwrap(), CsvKind::Trace);
        assert!(sniff_csv(&other).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
