//! Deterministic JSON and file output.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::CliError;

/// Pretty printer that writes every float as `{:.16e}`.
/// Non-finite values become `null` before they reach the formatter.
struct FixedFloats<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident),*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.$name(w)
            }
        )*
    };
}

macro_rules! delegate_first {
    ($($name:ident),*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
                self.0.$name(w, first)
            }
        )*
    };
}

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    delegate!(begin_array, end_array, end_array_value, begin_object, end_object, begin_object_value, end_object_value);
    delegate_first!(begin_array_value, begin_object_key);
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(hypoell::Error::from)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        Ok(OutDir(path))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<String, CliError> {
        let text = to_json(value)?;
        let path = self.path(name);
        fs::write(&path, &text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        Ok(text)
    }

    pub fn csv(
        &self,
        name: &str,
        write: impl FnOnce(BufWriter<File>) -> hypoell::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        write(BufWriter::new(file))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_fixed_scientific_format() {
        #[derive(Serialize)]
        struct Doc {
            a: f64,
            b: Vec<f64>,
            n: usize,
        }
        let text = to_json(&Doc {
            a: 0.1,
            b: vec![-0.25, f64::NAN],
            n: 3,
        })
        .unwrap();
        assert!(text.contains("\"a\": 1.0000000000000001e-1"), "{text}");
        assert!(text.contains("-2.5000000000000000e-1"), "{text}");
        assert!(text.contains("null"));
        assert!(text.contains("\"n\": 3"));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }
}
