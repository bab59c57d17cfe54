//! Curve CSV files: `#`-prefixed `key = value` metadata, one header line, data rows.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::{shrinker_residual, CurveFamily, CurveSample, GeneratingCurve, VerificationReport};
use crate::grim::{first_integral, GrimOrbit, PhasePoint};
use crate::rotational::{bowl::energy_residual, BowlCurve, BowlSample, WingCurve};

pub fn columns(family: CurveFamily) -> &'static [&'static str] {
    match family {
        CurveFamily::Grim | CurveFamily::Wing => &["s", "x", "z", "theta"],
        CurveFamily::Bowl => &["r", "x", "z", "dz", "energy_integral"],
    }
}

/// Fixed 17-significant-digit float text.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveFile {
    pub family: CurveFamily,
    /// Ordered `(key, value)` pairs; `family` is always first.
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<Vec<f64>>,
}

impl CurveFile {
    pub fn new(family: CurveFamily) -> Self {
        Self {
            family,
            metadata: vec![("family".into(), family.name().into())],
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.push((key.into(), value.into()));
        self
    }

    pub fn meta_f64(self, key: &str, value: f64) -> Self {
        self.meta(key, fmt_f64(value))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let v = self.get(key).ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("missing metadata key `{key}`"),
        })?;
        v.trim().parse().map_err(|_| Error::Parse {
            line: 0,
            message: format!("metadata `{key}` is not a number: {v}"),
        })
    }

    pub fn from_grim(orbit: &GrimOrbit) -> Self {
        let mut f = Self::new(CurveFamily::Grim);
        f.rows = orbit.samples.iter().map(|p| vec![p.t, p.x, p.z, p.theta]).collect();
        f
    }

    pub fn from_wing(wing: &WingCurve) -> Self {
        let mut f = Self::new(CurveFamily::Wing);
        f.rows = wing.samples.iter().map(|p| vec![p.t, p.x, p.z, p.theta]).collect();
        f
    }

    pub fn from_bowl(bowl: &BowlCurve) -> Self {
        let mut f = Self::new(CurveFamily::Bowl).meta_f64("z0", bowl.z0);
        f.rows = bowl
            .samples
            .iter()
            .map(|p| vec![p.r, p.r, p.z, p.dz, p.energy_integral])
            .collect();
        f
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut out = std::io::BufWriter::new(out);
        for (k, v) in &self.metadata {
            writeln!(out, "# {k} = {v}")?;
        }
        writeln!(out, "{}", columns(self.family).join(","))?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut out);
        for row in &self.rows {
            w.write_record(row.iter().map(|v| fmt_f64(*v))).map_err(csv_error)?;
        }
        w.flush()?;
        drop(w);
        out.flush()?;
        Ok(())
    }

    /// Parses a file produced by [`CurveFile::write`]. `family` overrides the metadata.
    pub fn read<R: BufRead>(input: R, family: Option<CurveFamily>) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut lines = input.lines().enumerate();
        let header = loop {
            let Some((i, line)) = lines.next() else {
                return Err(Error::Parse {
                    line: 0,
                    message: "file has no header line".into(),
                });
            };
            let line = line?;
            let lineno = i as u64 + 1;
            match line.strip_prefix('#') {
                Some(rest) => {
                    let (k, v) = rest.split_once('=').ok_or_else(|| Error::Parse {
                        line: lineno,
                        message: "metadata line is not `# key = value`".into(),
                    })?;
                    metadata.push((k.trim().to_string(), v.trim().to_string()));
                }
                None => break (lineno, line),
            }
        };
        let family = match (family, metadata.iter().find(|(k, _)| k == "family")) {
            (Some(f), _) => f,
            (None, Some((_, name))) => CurveFamily::parse(name).ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("unknown family `{name}`"),
            })?,
            (None, None) => {
                return Err(Error::Parse {
                    line: 0,
                    message: "no family in metadata and none given".into(),
                })
            }
        };
        let expected = columns(family);
        let got: Vec<&str> = header.1.split(',').map(str::trim).collect();
        if got != expected {
            return Err(Error::Parse {
                line: header.0,
                message: format!("expected columns {}, found {}", expected.join(","), header.1),
            });
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let lineno = i as u64 + 1;
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Parse {
                    line: lineno,
                    message: format!("bad number: {e}"),
                })?;
            if row.len() != expected.len() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected {} fields, found {}", expected.len(), row.len()),
                });
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("non-finite value {v}"),
                });
            }
            rows.push(row);
        }
        Ok(Self { family, metadata, rows })
    }

    pub fn curve(&self) -> GeneratingCurve {
        let samples = self
            .rows
            .iter()
            .map(|r| CurveSample {
                t: r[0],
                x: r[1],
                z: r[2],
                theta: match self.family {
                    CurveFamily::Bowl => r[3].atan(),
                    _ => r[3],
                },
            })
            .collect();
        GeneratingCurve::new(self.family, samples)
    }

    /// Residual statistics plus the family's conservation check, computed from the rows alone.
    pub fn report(&self) -> Result<VerificationReport> {
        let curve = self.curve();
        let mut report = shrinker_residual(&curve, self.family.symmetry())?;
        match self.family {
            CurveFamily::Grim => {
                let reference = curve
                    .samples
                    .iter()
                    .min_by(|a, b| a.t.abs().total_cmp(&b.t.abs()))
                    .expect("residual needs samples");
                let c0 = first_integral(PhasePoint::new(reference.z, reference.theta))?;
                let mut drift = 0.0_f64;
                for p in &curve.samples {
                    drift = drift.max((first_integral(PhasePoint::new(p.z, p.theta))? - c0).abs());
                }
                report.first_integral_drift = Some(drift);
            }
            CurveFamily::Bowl => {
                let z0 = self.get_f64("z0")?;
                let samples: Vec<BowlSample> = self
                    .rows
                    .iter()
                    .map(|r| BowlSample {
                        r: r[0],
                        z: r[2],
                        dz: r[3],
                        energy_integral: r[4],
                    })
                    .collect();
                report.energy_residual = Some(energy_residual(z0, &samples)?);
            }
            CurveFamily::Wing => {}
        }
        Ok(report)
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::new(std::io::ErrorKind::Other, format!("{other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_file() -> CurveFile {
        let mut f = CurveFile::new(CurveFamily::Wing)
            .meta_f64("x0", 1.0)
            .meta("note", "a = b");
        f.rows = vec![vec![0.0, 1.0, 2.0, 0.5], vec![0.1, 1.0 / 3.0, 2.0e-300, -1.5]];
        f
    }

    #[test]
    fn round_trip_is_exact() {
        let f = sample_file();
        let mut buf = Vec::new();
        f.write(&mut buf).unwrap();
        let back = CurveFile::read(buf.as_slice(), None).unwrap();
        assert_eq!(back, f);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# family = wing\n# x0 = 1.0000000000000000e0\n# note = a = b\ns,x,z,theta\n"));
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let text = "# family = grim\ns,x,z,theta\n0,0,1,0\n0.1,0,abc,0\n";
        match CurveFile::read(text.as_bytes(), None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let text = "# family = grim\ns,x,z,theta\n0,0,1\n";
        assert!(matches!(
            CurveFile::read(text.as_bytes(), None),
            Err(Error::Parse { line: 3, .. })
        ));
        let text = "# family = grim\ns,x,z\n";
        assert!(matches!(
            CurveFile::read(text.as_bytes(), None),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(CurveFile::read("".as_bytes(), None).is_err());
    }

    #[test]
    fn horosphere_file_has_zero_residual() {
        let mut f = CurveFile::new(CurveFamily::Grim);
        f.rows = (0..50)
            .map(|i| vec![i as f64 * 0.1, i as f64 * 0.1, 1.0, 0.0])
            .collect();
        let r = f.report().unwrap();
        assert_eq!(r.max_residual, 0.0);
        assert_eq!(r.first_integral_drift, Some(0.0));
    }
}
