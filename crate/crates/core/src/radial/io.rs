use std::io::Write;
use std::path::Path;

use super::{DecayHints, RadialFunction};
use crate::error::{Error, Result};
use crate::params::ProblemParams;

/// Reads the `r,value` format. Recognized comments: `# sector=k`,
/// `# decay0=a`, `# decayinf=b`; other `#` lines are ignored.
pub fn read_csv(path: impl AsRef<Path>, params: ProblemParams) -> Result<RadialFunction> {
    let text = std::fs::read_to_string(path)?;
    read_csv_str(&text, params)
}

pub fn read_csv_str(text: &str, params: ProblemParams) -> Result<RadialFunction> {
    let mut sector = 0usize;
    let (mut d0, mut dinf) = (None, None);
    for line in text.lines().map(str::trim).filter(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim();
        if let Some(v) = body.strip_prefix("sector=") {
            sector = v.trim().parse().map_err(|_| Error::Parse(format!("bad sector comment: {line}")))?;
        } else if let Some(v) = body.strip_prefix("decay0=") {
            d0 = Some(parse_f64(v, line)?);
        } else if let Some(v) = body.strip_prefix("decayinf=") {
            dinf = Some(parse_f64(v, line)?);
        }
    }
    let hints = match (d0, dinf) {
        (Some(a), Some(b)) => Some(DecayHints {
            at_zero: a,
            at_infinity: b,
        }),
        (None, None) => None,
        _ => return Err(Error::Parse("decay0 and decayinf must be given together".into())),
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "r" || &headers[1] != "value" {
        return Err(Error::Parse(format!(
            "expected header `r,value`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let (mut radii, mut values) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let r = parse_f64(&rec[0], &format!("row {}", i + 1))?;
        let v = parse_f64(&rec[1], &format!("row {}", i + 1))?;
        radii.push(r);
        values.push(v);
    }
    RadialFunction::from_samples(params, sector, &radii, &values, hints)
}

fn parse_f64(s: &str, ctx: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("not a number `{}` in {ctx}", s.trim())))
}

/// Writes `u` sampled at `radii` in the `r,value` format, preceded by `header` comment lines.
pub fn write_csv(u: &RadialFunction, radii: &[f64], header: &[String], out: &mut dyn Write) -> Result<()> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "# sector={}", u.sector())?;
    if let Some(h) = u.hints() {
        writeln!(out, "# decay0={:e}", h.at_zero)?;
        writeln!(out, "# decayinf={:e}", h.at_infinity)?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "value"])?;
    for &r in radii {
        w.write_record([format!("{r:e}"), format!("{:e}", u.eval(r)?)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::log_grid;

    #[test]
    fn csv_roundtrip_with_comments() {
        let p = ProblemParams::new(4, 0.5, 1.0).unwrap();
        let radii = log_grid(1e-2, 1e2, 40);
        let vals: Vec<f64> = radii.iter().map(|r| 1.0 / (1.0 + r * r)).collect();
        let h = DecayHints {
            at_zero: 0.0,
            at_infinity: 2.0,
        };
        let u = RadialFunction::from_samples(p, 2, &radii, &vals, Some(h)).unwrap();
        let mut buf = Vec::new();
        write_csv(&u, &radii, &["note".to_string()], &mut buf).unwrap();
        let v = read_csv_str(std::str::from_utf8(&buf).unwrap(), p).unwrap();
        assert_eq!(v.sector(), 2);
        assert_eq!(v.hints(), Some(h));
        for &r in &radii {
            assert!((v.eval(r).unwrap() - u.eval(r).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_wrong_header_and_garbage() {
        let p = ProblemParams::new(3, 0.1, 0.5).unwrap();
        assert!(matches!(read_csv_str("x,y\n1,2\n", p), Err(Error::Parse(_))));
        let mut text = String::from("r,value\n");
        for i in 1..=20 {
            text.push_str(&format!("{i},abc\n"));
        }
        assert!(matches!(read_csv_str(&text, p), Err(Error::Parse(_))));
    }
}
