//! Number formatting and writers shared by the subcommands.
//!
//! Floats are printed with 17 significant digits (`%.17g`), so every value
//! round-trips and output files diff cleanly between runs.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// `%.17g`: fixed notation for exponents in `[-5, 17)`, scientific
/// otherwise, trailing zeros removed.
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// JSON formatter that writes floats through [`g17`].
struct G17;

impl serde_json::ser::Formatter for G17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(g17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, G17);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf)?)
}

/// Writes JSON to `out`, or to stdout when `out` is `None`.
pub fn emit_json<T: Serialize + ?Sized>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = to_json(value)?;
    match out {
        Some(path) => {
            std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
            log::info!("wrote {}", path.display());
        }
        None => {
            let mut out = io::stdout().lock();
            match writeln!(out, "{text}").and_then(|_| out.flush()) {
                // a closed pipe (e.g. `| head`) is not an error
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

/// Writes a numeric CSV with the given header.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header)?;
    let mut count = 0usize;
    for row in rows {
        w.write_record(row.iter().map(|&v| g17(v)))?;
        count += 1;
    }
    w.flush()?;
    log::info!("wrote {count} rows to {}", path.display());
    Ok(())
}
