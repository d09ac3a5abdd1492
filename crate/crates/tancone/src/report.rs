//! Reports as ordered key/value rows, rendered as text, `key=value` lines
//! or CSV.

use std::fmt::Write as _;

/// Version tag written first in machine-readable output. Bump it whenever a
/// key is renamed or removed.
pub const FORMAT: &str = "tancone-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Output {
    Text,
    Kv,
    Csv,
}

#[derive(Clone, Debug, Default)]
pub struct Section {
    pub title: String,
    pub rows: Vec<(String, String)>,
}

impl Section {
    pub fn new(title: &str) -> Self {
        Section { title: title.to_string(), rows: Vec::new() }
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.rows.push((key.into(), value.to_string()));
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub command: String,
    pub sections: Vec<Section>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { command: command.to_string(), sections: Vec::new() }
    }

    pub fn push(&mut self, s: Section) {
        self.sections.push(s);
    }

    pub fn extend(&mut self, sections: impl IntoIterator<Item = Section>) {
        self.sections.extend(sections);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.sections.iter().flat_map(|s| &s.rows).find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self, mode: Output) -> String {
        match mode {
            Output::Text => self.text(),
            Output::Kv => self.kv(),
            Output::Csv => self.csv(),
        }
    }

    fn text(&self) -> String {
        let width = self.sections.iter().flat_map(|s| &s.rows).map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "{}", s.title);
            for (k, v) in &s.rows {
                let _ = writeln!(out, "  {k:<width$}  {v}");
            }
        }
        out
    }

    fn kv(&self) -> String {
        let mut out = format!("format={FORMAT}\ncommand={}\n", self.command);
        for (k, v) in self.sections.iter().flat_map(|s| &s.rows) {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record(["section", "key", "value"]);
        let _ = w.write_record(["meta", "format", FORMAT]);
        let _ = w.write_record(["meta", "command", &self.command]);
        for s in &self.sections {
            for (k, v) in &s.rows {
                let _ = w.write_record([s.title.as_str(), k, v]);
            }
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
    }
}

/// Stable number formatting: tiny magnitudes print as `0`, very large or
/// small ones in scientific notation, the rest with at most nine decimals.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if a < 1e-12 {
        return "0".into();
    }
    if !(1e-4..1e6).contains(&a) {
        return format!("{x:.6e}");
    }
    let s = format!("{x:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

pub fn point(p: &[f64]) -> String {
    format!("({})", p.iter().map(|&c| num(c)).collect::<Vec<_>>().join(", "))
}

pub fn points(ps: &[Vec<f64>]) -> String {
    format!("[{}]", ps.iter().map(|p| point(p)).collect::<Vec<_>>().join(", "))
}

pub fn indices(ix: &[usize]) -> String {
    if ix.is_empty() {
        return "none".into();
    }
    ix.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_are_stable() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-1e-15), "0");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-0.25), "-0.25");
        assert_eq!(num(1.0 / 3.0), "0.333333333");
        assert_eq!(num(1e7), "1.000000e7");
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn renderings() {
        let mut r = Report::new("demo");
        let mut s = Section::new("cq");
        s.put("cq.GACQ", "HOLDS");
        s.put("note", "a, \"quoted\" value");
        r.push(s);
        assert_eq!(r.render(Output::Kv), "format=tancone-report/1\ncommand=demo\ncq.GACQ=HOLDS\nnote=a, \"quoted\" value\n");
        assert!(r.render(Output::Csv).contains("cq,note,\"a, \"\"quoted\"\" value\""));
        assert!(r.render(Output::Text).starts_with("cq\n  cq.GACQ  HOLDS\n"));
    }
}
