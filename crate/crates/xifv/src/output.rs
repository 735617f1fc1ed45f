//! Number formatting, CSV tables, JSON reports and run manifests.
//!
//! Every float is written with 17 significant digits, which round-trips any
//! `f64`. Written files are pure functions of the configuration, so two runs
//! with the same configuration produce identical bytes.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

/// `x` with 17 significant digits: plain decimal for exponents in
/// `-5..17`, scientific otherwise. Non-finite values print as `NaN`, `inf`
/// and `-inf`.
pub fn fmt17(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).expect("scientific notation has an exponent");
    if (-5..17).contains(&exp) {
        format!("{x:.*}", (16 - exp) as usize)
    } else {
        sci
    }
}

/// Pretty JSON whose floats go through [`fmt17`].
struct Digits17 {
    inner: PrettyFormatter<'static>,
}

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Pretty JSON with 17-digit floats and a trailing newline. Non-finite
/// floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17 { inner: PrettyFormatter::new() });
    value.serialize(&mut ser).expect("serialising to memory does not fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// Lower-case hex SHA-256.
pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

/// A header and rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// The table followed by the line `# manifest: <reference>`.
    pub fn render(&self, manifest_ref: &str) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        let mut out = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8");
        out.push_str("# manifest: ");
        out.push_str(manifest_ref);
        out.push('\n');
        out
    }
}

/// Recorded next to every written output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub config_sha256: String,
    pub master_seed: u64,
    pub seed_scheme: String,
    pub outputs: Vec<String>,
}

pub const SEED_SCHEME: &str = "replicate i uses derive_seed(master_seed, i) (SplitMix64 finaliser over the master seed and the index); paired sides of a check use independent streams below the master seed";

impl Manifest {
    pub fn new(command: &str, config: serde_json::Value, master_seed: u64) -> Self {
        let config_sha256 = sha256_hex(serde_json::to_string(&config).expect("config serialises").as_bytes());
        Self {
            tool: "xifv".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            core_version: xifv_core::VERSION.into(),
            command: command.into(),
            config,
            config_sha256,
            master_seed,
            seed_scheme: SEED_SCHEME.into(),
            outputs: Vec::new(),
        }
    }
}

/// `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Writes `body` to `out` and the manifest beside it, or prints `body` to
/// stdout when `out` is `None`.
pub fn emit(out: Option<&Path>, body: &str, manifest: &mut Manifest) -> io::Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, body)?;
            manifest.outputs = vec![path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()];
            fs::write(manifest_path(path), to_json(manifest))
        }
        None => io::stdout().write_all(body.as_bytes()),
    }
}

/// What the trailing CSV line points to.
pub fn manifest_ref(out: Option<&Path>, manifest: &Manifest) -> String {
    match out.map(manifest_path) {
        Some(p) => format!("{} config_sha256={}", p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(), manifest.config_sha256),
        None => format!("none (stdout) config_sha256={}", manifest.config_sha256),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt17(0.75), "0.75000000000000000");
        assert_eq!(fmt17(1.0), "1.0000000000000000");
        assert_eq!(fmt17(0.1), "0.10000000000000001");
        assert_eq!(fmt17(-123.5), "-123.50000000000000");
        assert_eq!(fmt17(1e-9), "1.0000000000000001e-9");
        assert_eq!(fmt17(0.0), "0");
        assert_eq!(fmt17(f64::INFINITY), "inf");
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e300, 6.02e23, 1e-300] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_uses_seventeen_digits() {
        #[derive(Serialize)]
        struct R {
            a: f64,
            b: Vec<f64>,
            c: f64,
        }
        let s = to_json(&R { a: 0.5, b: vec![0.1], c: f64::NAN });
        assert!(s.contains("\"a\": 0.50000000000000000"));
        assert!(s.contains("0.10000000000000001"));
        assert!(s.contains("\"c\": null"));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"], 0.5);
    }

    #[test]
    fn csv_has_header_and_manifest_line() {
        let mut t = CsvTable::new(["a", "sig"]);
        t.push(vec!["1".into(), "{1,2}{3}".into()]);
        let s = t.render("x.manifest.json");
        assert_eq!(s, "a,sig\n1,\"{1,2}{3}\"\n# manifest: x.manifest.json\n");
        assert_eq!(manifest_path(Path::new("out/r.csv")), PathBuf::from("out/r.csv.manifest.json"));
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
