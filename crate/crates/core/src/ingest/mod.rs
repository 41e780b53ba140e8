//! CMAPSS trajectory parsing, sensor selection, standardization,
//! windowing and unit-level train/test splitting.

mod cache;
mod standardize;
mod window;

pub use cache::{IngestManifest, IngestedDataset, UnitSeries, CACHE_FORMAT_VERSION, MANIFEST_FILE, SERIES_FILE};
pub use standardize::{apply_standardizer, fit_standardizer, StandardizationStats};
pub use window::{make_windows, split_by_unit, Split, TimeSeriesWindow, UnitSplit, WindowId};

use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Number of sensor columns in a CMAPSS file.
pub const SENSOR_COUNT: usize = 21;
/// unit, cycle, 3 operating settings, 21 sensors.
pub const FIELD_COUNT: usize = 26;

/// The 14 informative sensors conventionally used for FD001-FD004.
pub const DEFAULT_SENSORS: [&str; 14] = [
    "s2", "s3", "s4", "s7", "s8", "s9", "s11", "s12", "s13", "s14", "s15", "s17", "s20", "s21",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DatasetId {
    FD001,
    FD002,
    FD003,
    FD004,
}

impl DatasetId {
    pub const ALL: [DatasetId; 4] = [Self::FD001, Self::FD002, Self::FD003, Self::FD004];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::FD001 => "FD001",
            Self::FD002 => "FD002",
            Self::FD003 => "FD003",
            Self::FD004 => "FD004",
        }
    }

    /// File name of the run-to-failure training file.
    pub fn train_file_name(self) -> String {
        format!("train_{}.txt", self.as_str())
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown dataset id `{s}` (expected FD001..FD004)")))
    }
}

/// One engine unit's full run-to-failure record.
#[derive(Clone, Debug, PartialEq)]
pub struct RawTrajectory {
    pub unit_id: u32,
    /// 1-based, consecutive.
    pub cycles: Vec<u32>,
    pub op_settings: [Vec<f64>; 3],
    /// `sensors[k]` is the series of sensor `s{k+1}`.
    pub sensors: Vec<Vec<f64>>,
}

impl RawTrajectory {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    fn with_capacity(unit_id: u32, n: usize) -> Self {
        Self {
            unit_id,
            cycles: Vec::with_capacity(n),
            op_settings: [Vec::new(), Vec::new(), Vec::new()],
            sensors: (0..SENSOR_COUNT).map(|_| Vec::with_capacity(n)).collect(),
        }
    }
}

/// Parses a CMAPSS training file.
pub fn parse_cmapss(path: &Path, dataset: DatasetId) -> Result<Vec<RawTrajectory>> {
    let file = std::fs::File::open(path)?;
    log::debug!("parsing {dataset} from {}", path.display());
    parse_cmapss_reader(std::io::BufReader::new(file))
}

/// Parses CMAPSS rows from any reader. Blank lines are ignored.
pub fn parse_cmapss_reader<R: BufRead>(reader: R) -> Result<Vec<RawTrajectory>> {
    let mut out: Vec<RawTrajectory> = Vec::new();
    let mut fields = [0.0f64; FIELD_COUNT];

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut n = 0;
        for tok in line.split_whitespace() {
            if n == FIELD_COUNT {
                n += 1;
                break;
            }
            fields[n] = tok.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("non-numeric token `{tok}`"),
            })?;
            n += 1;
        }
        if n != FIELD_COUNT {
            let found = line.split_whitespace().count();
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {FIELD_COUNT} fields, found {found}"),
            });
        }

        let unit = as_index(fields[0], line_no, "unit id")?;
        let cycle = as_index(fields[1], line_no, "cycle")?;

        let new_unit = out.last().map_or(true, |t| t.unit_id != unit);
        if new_unit {
            if out.iter().any(|t| t.unit_id == unit) {
                return Err(Error::Integrity(format!(
                    "unit {unit} reappears at line {line_no} after other units"
                )));
            }
            out.push(RawTrajectory::with_capacity(unit, 256));
        }
        let traj = out.last_mut().expect("pushed above");
        let expected = traj.cycles.len() as u32 + 1;
        if cycle != expected {
            return Err(Error::Integrity(format!(
                "unit {unit}: cycle {cycle} at line {line_no}, expected {expected}"
            )));
        }
        traj.cycles.push(cycle);
        for k in 0..3 {
            traj.op_settings[k].push(fields[2 + k]);
        }
        for k in 0..SENSOR_COUNT {
            traj.sensors[k].push(fields[5 + k]);
        }
    }
    Ok(out)
}

fn as_index(v: f64, line: usize, what: &str) -> Result<u32> {
    if v.fract() != 0.0 || v < 1.0 || v > f64::from(u32::MAX) {
        return Err(Error::Parse {
            line,
            msg: format!("{what} must be a positive integer, got {v}"),
        });
    }
    Ok(v as u32)
}

/// Resolved, ordered sensor subset (zero-based column indices into
/// `RawTrajectory::sensors`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorSelection {
    names: Vec<String>,
    #[serde(skip)]
    indices: Vec<usize>,
}

impl SensorSelection {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Config("sensor selection is empty".into()));
        }
        let mut indices = Vec::with_capacity(names.len());
        let mut out_names = Vec::with_capacity(names.len());
        for name in names {
            let name = name.as_ref().trim();
            let idx = sensor_index(name)?;
            if indices.contains(&idx) {
                return Err(Error::Config(format!("sensor `{name}` listed twice")));
            }
            indices.push(idx);
            out_names.push(format!("s{}", idx + 1));
        }
        Ok(Self {
            names: out_names,
            indices,
        })
    }

    pub fn all() -> Self {
        let names: Vec<String> = (1..=SENSOR_COUNT).map(|k| format!("s{k}")).collect();
        Self::new(&names).expect("static list")
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Restores `indices` after deserialization.
    pub fn revalidate(self) -> Result<Self> {
        Self::new(&self.names)
    }
}

impl Default for SensorSelection {
    fn default() -> Self {
        Self::new(&DEFAULT_SENSORS).expect("static list")
    }
}

fn sensor_index(name: &str) -> Result<usize> {
    let bad = || Error::Config(format!("unknown sensor `{name}` (expected s1..s21)"));
    let digits = name
        .strip_prefix('s')
        .or_else(|| name.strip_prefix('S'))
        .ok_or_else(bad)?;
    let k: usize = digits.parse().map_err(|_| bad())?;
    if (1..=SENSOR_COUNT).contains(&k) {
        Ok(k - 1)
    } else {
        Err(bad())
    }
}

/// Projects a trajectory onto the selected sensors: an m × T matrix with
/// rows in selection order.
pub fn select_sensors(traj: &RawTrajectory, sensors: &SensorSelection) -> Matrix {
    let t = traj.len();
    let mut out = Matrix::zeros(sensors.len(), t);
    for (row, &k) in sensors.indices().iter().enumerate() {
        out.row_mut(row).copy_from_slice(&traj.sensors[k]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_LINES: &str = "1 1 -0.0007 -0.0004 100.0 518.67 641.82 1589.70 1400.60 14.62 21.61 554.36 2388.06 9046.19 1.30 47.47 521.66 2388.02 8138.62 8.4195 0.03 392 2388 100.00 39.06 23.4190  \n\
1 2 0.0019 -0.0003 100.0 518.67 642.15 1591.82 1403.14 14.62 21.61 553.75 2388.04 9044.07 1.30 47.49 522.28 2388.07 8131.49 8.4318 0.03 392 2388 100.00 39.00 23.4236\n";

    #[test]
    fn parses_two_line_fixture() {
        let trajs = parse_cmapss_reader(TWO_LINES.as_bytes()).unwrap();
        assert_eq!(trajs.len(), 1);
        let t = &trajs[0];
        assert_eq!(t.unit_id, 1);
        assert_eq!(t.cycles, vec![1, 2]);
        assert_eq!(t.op_settings[0], vec![-0.0007, 0.0019]);
        assert_eq!(t.sensors[0], vec![518.67, 518.67]);
        assert_eq!(t.sensors[1], vec![641.82, 642.15]);
        assert_eq!(t.sensors[20], vec![23.4190, 23.4236]);
    }

    #[test]
    fn empty_input_yields_no_trajectories() {
        assert!(parse_cmapss_reader("".as_bytes()).unwrap().is_empty());
        assert!(parse_cmapss_reader("\n  \n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn wrong_field_count_reports_line() {
        let text = format!("{TWO_LINES}1 3 0 0 100\n");
        match parse_cmapss_reader(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let long = format!("{} 7\n", TWO_LINES.lines().next().unwrap());
        assert!(matches!(
            parse_cmapss_reader(long.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn non_numeric_token_reports_line() {
        let text = TWO_LINES.replace("641.82", "abc");
        assert!(matches!(
            parse_cmapss_reader(text.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn cycle_gap_is_integrity_error() {
        let text = TWO_LINES.replacen("1 2 ", "1 3 ", 1);
        assert!(matches!(
            parse_cmapss_reader(text.as_bytes()),
            Err(Error::Integrity(_))
        ));
        let text = TWO_LINES.replacen("1 1 ", "1 2 ", 1);
        assert!(matches!(
            parse_cmapss_reader(text.as_bytes()),
            Err(Error::Integrity(_))
        ));
    }

    #[test]
    fn sensor_selection_rules() {
        let sel = SensorSelection::default();
        assert_eq!(sel.len(), 14);
        assert_eq!(sel.indices()[0], 1);
        assert!(matches!(SensorSelection::new(&["s22"]), Err(Error::Config(_))));
        assert!(matches!(SensorSelection::new(&["x1"]), Err(Error::Config(_))));
        assert!(matches!(
            SensorSelection::new::<&str>(&[]),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            SensorSelection::new(&["s2", "s2"]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn select_projects_columns_in_order() {
        let t = &parse_cmapss_reader(TWO_LINES.as_bytes()).unwrap()[0];
        let m = select_sensors(t, &SensorSelection::new(&["s1"]).unwrap());
        assert_eq!((m.rows(), m.cols()), (1, 2));
        assert_eq!(m.row(0), &[518.67, 518.67]);

        let m = select_sensors(t, &SensorSelection::new(&["s21", "s2"]).unwrap());
        assert_eq!(m.row(0), &[23.4190, 23.4236]);
        assert_eq!(m.row(1), &[641.82, 642.15]);

        let m = select_sensors(t, &SensorSelection::default());
        assert_eq!(m.rows(), 14);
    }

    #[test]
    fn all_sensor_projection_reproduces_file_columns() {
        let t = &parse_cmapss_reader(TWO_LINES.as_bytes()).unwrap()[0];
        let m = select_sensors(t, &SensorSelection::all());
        for (line_idx, line) in TWO_LINES.lines().enumerate() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            for k in 0..SENSOR_COUNT {
                let expected: f64 = toks[5 + k].parse().unwrap();
                assert_eq!(m.get(k, line_idx).to_bits(), expected.to_bits());
            }
        }
    }
}
