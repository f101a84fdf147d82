//! Point CSV: header `x,y,r,g,b` or `x,y,z,r,g,b`, comma separated, `\n`
//! terminated, no quoting. Values are written as the shortest decimal string
//! that parses back to the identical binary64, so a write/read cycle is
//! bit-exact (negative zero included).

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Dataset, Dims, PointRecord};
use crate::error::{Error, Result};

const HEADER_2D: &str = "x,y,r,g,b";
const HEADER_3D: &str = "x,y,z,r,g,b";

/// Appends the shortest round-trip decimal form of `v`. Exponent notation is
/// used outside `[1e-5, 1e16)` to keep extreme magnitudes short.
pub fn format_f64(v: f64, out: &mut String) {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        let _ = write!(out, "{v}");
    } else {
        let _ = write!(out, "{v:e}");
    }
}

/// Writes `dataset` and returns the number of records written.
pub fn write_csv<W: Write>(dataset: &Dataset, sink: W) -> Result<usize> {
    dataset.validate()?;
    let mut w = BufWriter::new(sink);
    let n = dataset.dims.count();
    w.write_all(header(dataset.dims).as_bytes())?;
    w.write_all(b"\n")?;
    let mut line = String::with_capacity(128);
    for p in &dataset.points {
        line.clear();
        for (i, &v) in p.coords[..n].iter().chain(&p.color).enumerate() {
            if i > 0 {
                line.push(',');
            }
            format_f64(v, &mut line);
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(dataset.len())
}

pub fn write_csv_file(dataset: &Dataset, path: impl AsRef<Path>) -> Result<usize> {
    write_csv(dataset, File::create(path)?)
}

fn header(dims: Dims) -> &'static str {
    match dims {
        Dims::Two => HEADER_2D,
        Dims::Three => HEADER_3D,
    }
}

/// Reads a dataset, inferring dimensionality from the header.
pub fn read_csv<R: Read>(source: R) -> Result<Dataset> {
    read_csv_named(source, "csv", "csv stream")
}

pub fn read_csv_file(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".into());
    read_csv_named(File::open(path)?, name, path.display().to_string())
}

fn read_csv_named<R: Read>(
    source: R,
    name: impl Into<String>,
    provenance: impl Into<String>,
) -> Result<Dataset> {
    let mut reader = BufReader::new(source);
    let mut line = String::new();
    if reader.read_line(&mut line)? == 0 {
        return Err(Error::Schema("missing header".into()));
    }
    let dims = match trim_eol(&line) {
        HEADER_2D => Dims::Two,
        HEADER_3D => Dims::Three,
        other => {
            return Err(Error::Schema(format!(
                "unrecognized header '{other}', expected '{HEADER_2D}' or '{HEADER_3D}'"
            )))
        }
    };
    let columns: Vec<&str> = header(dims).split(',').collect();
    let n = dims.count();

    let mut points = Vec::new();
    let mut values = [0.0f64; 6];
    let mut line_no = 1;
    let mut blank_at = None;
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        line_no += 1;
        let row = trim_eol(&line);
        if row.is_empty() {
            blank_at.get_or_insert(line_no);
            continue;
        }
        if let Some(blank) = blank_at {
            return Err(Error::Schema(format!("line {blank}: empty record")));
        }
        let mut found = 0;
        for field in row.split(',') {
            if found < columns.len() {
                values[found] = parse_value(field, columns[found], line_no)?;
            }
            found += 1;
        }
        if found != columns.len() {
            return Err(Error::Schema(format!(
                "line {line_no}: expected {} columns, found {found}",
                columns.len()
            )));
        }
        let mut coords = [0.0; 3];
        coords[..n].copy_from_slice(&values[..n]);
        let color = [values[n], values[n + 1], values[n + 2]];
        if let Some(c) = color.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::parse(
                line_no,
                format!("color channel {c} outside [0, 1]"),
            ));
        }
        points.push(PointRecord { coords, color });
    }
    if points.is_empty() {
        return Err(Error::Validation(
            "csv contains a header but no records".into(),
        ));
    }
    Ok(Dataset::new(name, provenance, dims, points))
}

fn parse_value(field: &str, column: &str, line: usize) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(
            line,
            format!("column '{column}': '{field}' is not a finite number"),
        )),
    }
}

fn trim_eol(line: &str) -> &str {
    let line = line.strip_suffix('\n').unwrap_or(line);
    line.strip_suffix('\r').unwrap_or(line)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(d: &Dataset) -> Dataset {
        let mut buf = Vec::new();
        write_csv(d, &mut buf).unwrap();
        read_csv(buf.as_slice()).unwrap()
    }

    #[test]
    fn single_point_exact_text() {
        let d = Dataset::new(
            "p",
            "t",
            Dims::Two,
            vec![PointRecord::new_2d(0.5, -0.25, [1.0, 0.0, 0.0])],
        );
        let mut buf = Vec::new();
        assert_eq!(write_csv(&d, &mut buf).unwrap(), 1);
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "x,y,r,g,b\n0.5,-0.25,1,0,0\n"
        );
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let d = Dataset::new("e", "t", Dims::Three, vec![]);
        assert!(matches!(
            write_csv(&d, Vec::new()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn adversarial_values_roundtrip() {
        let vals = [
            -0.0,
            f64::MIN_POSITIVE,
            -f64::MIN_POSITIVE,
            f64::MAX,
            f64::MIN,
            5e-324,
            0.1 + 0.2,
            1e16,
            9_999_999_999_999_998.0,
            1e-5,
            9.99999e-6,
        ];
        let points = vals
            .iter()
            .map(|&v| PointRecord::new_3d(v, -v, v / 3.0, [0.0, 1.0, 0.1]))
            .collect();
        let d = Dataset::new("adv", "t", Dims::Three, points);
        let back = roundtrip(&d);
        for (a, b) in d.points.iter().zip(&back.points) {
            for (x, y) in a.coords.iter().zip(&b.coords) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        assert!(back.points[0].coords[0].is_sign_negative());
    }

    #[test]
    fn negative_zero_is_written_as_minus_zero() {
        let mut s = String::new();
        format_f64(-0.0, &mut s);
        assert_eq!(s, "-0");
    }

    #[test]
    fn parse_error_names_line() {
        let text = "x,y,r,g,b\n0,0,0,0,0\n0.5,abc,0,0,0\n";
        match read_csv(text.as_bytes()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("'y'"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_is_a_parse_error() {
        let text = "x,y,r,g,b\ninf,0,0,0,0\n";
        assert!(matches!(
            read_csv(text.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn column_count_mismatch_is_schema_error() {
        let text = "x,y,z,r,g,b\n1,2,3,0,0,0\n1,2,0,0,0\n";
        let err = read_csv(text.as_bytes()).unwrap_err();
        assert!(
            matches!(err, Error::Schema(ref m) if m.contains("line 3")),
            "{err}"
        );
        let text = "x,y,r,g,b\n1,2,0,0,0,7\n";
        assert!(matches!(read_csv(text.as_bytes()), Err(Error::Schema(_))));
    }

    #[test]
    fn header_variants() {
        assert!(matches!(read_csv("".as_bytes()), Err(Error::Schema(_))));
        assert!(matches!(
            read_csv("a,b,c\n1,2,3\n".as_bytes()),
            Err(Error::Schema(_))
        ));
        let d = read_csv("x,y,z,r,g,b\r\n1,2,3,0,0,1\r\n".as_bytes()).unwrap();
        assert_eq!(d.dims, Dims::Three);
        assert_eq!(d.points[0].coords, [1.0, 2.0, 3.0]);
    }

    #[test]
    fn interior_blank_line_rejected_trailing_allowed() {
        assert!(read_csv("x,y,r,g,b\n1,2,0,0,0\n\n".as_bytes()).is_ok());
        assert!(matches!(
            read_csv("x,y,r,g,b\n1,2,0,0,0\n\n3,4,0,0,0\n".as_bytes()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn colors_must_be_unit_range() {
        let text = "x,y,r,g,b\n1,2,0,1.5,0\n";
        assert!(matches!(
            read_csv(text.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn header_only_is_rejected() {
        assert!(matches!(
            read_csv("x,y,r,g,b\n".as_bytes()),
            Err(Error::Validation(_))
        ));
    }
}
