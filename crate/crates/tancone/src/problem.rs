//! Line-oriented problem files.
//!
//! ```text
//! [problem]
//! n = 2
//! q = 2
//!
//! [scenarios V]
//! grid ball r=1 n=64
//!
//! [objective]
//! g = abs(x1)
//! h = 0
//!
//! [constraint]
//! g = norm2(v)*norm2(x) - x2
//! scenarios = V
//! ```
//!
//! The full grammar lives in `docs/grammar.md`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use tancone_core::expr::ParseError;
use tancone_core::model::{
    Config, DtcObjective, ModelError, Objective, ProblemSpec, RobustConstraint, ScenarioFunction, ScenarioSet, SupDtcPair,
};

#[derive(Clone, Debug, PartialEq)]
pub enum LoadError {
    Format { line: usize, section: String, message: String },
    DimensionMismatch { line: usize, message: String },
    EmptyScenarioSet { label: String },
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Format { line, section, message } => write!(f, "line {line} in [{section}]: {message}"),
            LoadError::DimensionMismatch { line, message } => write!(f, "line {line}: dimension mismatch: {message}"),
            LoadError::EmptyScenarioSet { label } => write!(f, "scenario set `{label}` is empty"),
        }
    }
}

impl std::error::Error for LoadError {}

#[derive(Debug, Default)]
struct Section {
    kind: String,
    arg: Option<String>,
    line: usize,
    keys: BTreeMap<String, (usize, String)>,
    rows: Vec<(usize, String)>,
}

impl Section {
    fn name(&self) -> String {
        match &self.arg {
            Some(a) => format!("{} {a}", self.kind),
            None => self.kind.clone(),
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> LoadError {
        LoadError::Format { line, section: self.name(), message: message.into() }
    }

    fn get(&self, key: &str) -> Option<&(usize, String)> {
        self.keys.get(key)
    }

    fn require(&self, key: &str) -> Result<&(usize, String), LoadError> {
        self.get(key).ok_or_else(|| self.err(self.line, format!("missing key `{key}`")))
    }

    fn usize_key(&self, key: &str) -> Result<Option<usize>, LoadError> {
        self.get(key)
            .map(|(l, v)| v.parse::<usize>().map_err(|_| self.err(*l, format!("`{key}` must be a non-negative integer, got `{v}`"))))
            .transpose()
    }
}

fn split_sections(text: &str) -> Result<Vec<Section>, LoadError> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| LoadError::Format { line, section: "?".into(), message: "unterminated section header".into() })?;
            let mut parts = inner.split_whitespace();
            let kind = parts.next().unwrap_or("").to_string();
            let arg = parts.next().map(str::to_string);
            if parts.next().is_some() {
                return Err(LoadError::Format { line, section: kind, message: "section header takes at most one argument".into() });
            }
            out.push(Section { kind, arg, line, ..Section::default() });
            continue;
        }
        let sec = out
            .last_mut()
            .ok_or_else(|| LoadError::Format { line, section: "-".into(), message: "content before the first section".into() })?;
        if sec.kind == "scenarios" {
            sec.rows.push((line, body.to_string()));
            continue;
        }
        let (k, v) = body.split_once('=').ok_or_else(|| sec.err(line, format!("expected `key = value`, got `{body}`")))?;
        let k = k.trim().to_string();
        let v = unquote(v.trim()).to_string();
        if sec.keys.insert(k.clone(), (line, v)).is_some() {
            return Err(sec.err(line, format!("duplicate key `{k}`")));
        }
    }
    Ok(out)
}

fn unquote(s: &str) -> &str {
    s.strip_prefix('"').and_then(|t| t.strip_suffix('"')).unwrap_or(s)
}

fn parse_error(sec: &Section, line: usize, what: &str, e: ParseError) -> LoadError {
    match e {
        ParseError::IndexOutOfRange { .. } => LoadError::DimensionMismatch { line, message: format!("{what} in [{}]: {e}", sec.name()) },
        e => sec.err(line, format!("{what}: {e}")),
    }
}

fn model_error(line: usize, e: ModelError) -> LoadError {
    match e {
        ModelError::EmptyScenarioSet(label) => LoadError::EmptyScenarioSet { label },
        ModelError::DimensionMismatch(message) => LoadError::DimensionMismatch { line, message },
        e => LoadError::Format { line, section: "-".into(), message: e.to_string() },
    }
}

/// Parse a function with an optional analytic directional derivative.
fn function(sec: &Section, key: &str, dkey: &str, n: usize, q: usize) -> Result<ScenarioFunction, LoadError> {
    let (line, src) = sec.require(key)?;
    let mut f = ScenarioFunction::parse(src, n, q).map_err(|e| parse_error(sec, *line, key, e))?;
    if let Some((dl, dsrc)) = sec.get(dkey) {
        f = f.with_dirderiv_src(dsrc).map_err(|e| parse_error(sec, *dl, dkey, e))?;
    }
    Ok(f)
}

fn reals(sec: &Section, line: usize, s: &str) -> Result<Vec<f64>, LoadError> {
    s.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| sec.err(line, format!("`{t}` is not a number"))))
        .collect()
}

fn range(sec: &Section, line: usize, s: &str) -> Result<(f64, f64), LoadError> {
    let (a, b) = s.split_once("..").ok_or_else(|| sec.err(line, format!("expected `lo..hi`, got `{s}`")))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|_| sec.err(line, format!("`{t}` is not a number")));
    let (lo, hi) = (p(a)?, p(b)?);
    if hi < lo {
        return Err(sec.err(line, format!("empty range `{s}`")));
    }
    Ok((lo, hi))
}

fn options<'a>(sec: &Section, line: usize, words: &[&'a str]) -> Result<(Vec<&'a str>, BTreeMap<&'a str, &'a str>), LoadError> {
    let mut pos = Vec::new();
    let mut kv = BTreeMap::new();
    for w in words {
        match w.split_once('=') {
            Some((k, v)) => {
                if kv.insert(k, v).is_some() {
                    return Err(sec.err(line, format!("option `{k}` given twice")));
                }
            }
            None => pos.push(*w),
        }
    }
    Ok((pos, kv))
}

fn opt<T: std::str::FromStr>(sec: &Section, line: usize, kv: &BTreeMap<&str, &str>, key: &str, default: T) -> Result<T, LoadError> {
    match kv.get(key) {
        Some(v) => v.parse().map_err(|_| sec.err(line, format!("bad value `{v}` for `{key}`"))),
        None => Ok(default),
    }
}

/// One `grid ...` shorthand line.
fn grid(sec: &Section, label: &str, q: usize, line: usize, words: &[&str], dens: usize) -> Result<ScenarioSet, LoadError> {
    let (kind, rest) = words.split_first().ok_or_else(|| sec.err(line, "`grid` needs a kind"))?;
    let (pos, kv) = options(sec, line, rest)?;
    let planar = |what: &str| if q == 2 { Ok(()) } else { Err(LoadError::DimensionMismatch { line, message: format!("`grid {what}` needs q = 2, have q = {q}") }) };
    let set = match *kind {
        "ball" => ScenarioSet::ball(label, q, opt(sec, line, &kv, "r", 1.0)?, opt(sec, line, &kv, "n", dens)?),
        "box" => {
            let (lo, hi) = range(sec, line, pos.first().ok_or_else(|| sec.err(line, "`grid box` needs `lo..hi`"))?)?;
            ScenarioSet::box_grid(label, q, lo, hi, opt(sec, line, &kv, "steps", 8)?)
        }
        "box-boundary" => {
            planar("box-boundary")?;
            let (lo, hi) = range(sec, line, pos.first().ok_or_else(|| sec.err(line, "`grid box-boundary` needs `lo..hi`"))?)?;
            ScenarioSet::box_boundary(label, [lo, lo], [hi, hi], opt(sec, line, &kv, "per_edge", (dens / 4).max(2))?, opt(sec, line, &kv, "interior", 3)?)
        }
        "sectors" => {
            planar("sectors")?;
            if pos.is_empty() {
                return Err(sec.err(line, "`grid sectors` needs at least one `from..to` range in degrees"));
            }
            let ranges = pos
                .iter()
                .map(|p| range(sec, line, p).map(|(a, b)| (a * PI / 180.0, b * PI / 180.0)))
                .collect::<Result<Vec<_>, _>>()?;
            ScenarioSet::disk_sectors(label, &ranges, opt(sec, line, &kv, "n", dens)?)
        }
        other => return Err(sec.err(line, format!("unknown grid kind `{other}`"))),
    };
    set.map_err(|e| model_error(line, e))
}

fn scenario_set(sec: &Section, q: usize, dens: usize) -> Result<ScenarioSet, LoadError> {
    let label = sec.arg.clone().ok_or_else(|| sec.err(sec.line, "scenario section needs a label, as in `[scenarios V]`"))?;
    let mut points = Vec::new();
    let mut grids = Vec::new();
    for (line, row) in &sec.rows {
        let words: Vec<&str> = row.split_whitespace().collect();
        if words[0] == "grid" {
            grids.push(grid(sec, &label, q, *line, &words[1..], dens)?);
            continue;
        }
        let p = reals(sec, *line, row)?;
        if p.len() != q {
            return Err(LoadError::DimensionMismatch { line: *line, message: format!("scenario has {} coordinates, q = {q}", p.len()) });
        }
        points.push(p);
    }
    let mut set = if points.is_empty() && grids.is_empty() {
        return Err(LoadError::EmptyScenarioSet { label });
    } else if points.is_empty() {
        grids.remove(0)
    } else {
        ScenarioSet::new(&label, q, points).map_err(|e| model_error(sec.line, e))?
    };
    for g in grids {
        set = set.union(&g).map_err(|e| model_error(sec.line, e))?;
    }
    Ok(set.with_label(&label))
}

fn lookup(sets: &BTreeMap<String, ScenarioSet>, sec: &Section, key: &str, q: usize) -> Result<ScenarioSet, LoadError> {
    match sec.get(key) {
        Some((line, label)) => sets.get(label).cloned().ok_or_else(|| sec.err(*line, format!("no scenario set named `{label}`"))),
        None => Ok(ScenarioSet::singleton(q)),
    }
}

/// Parse and validate a problem file. `cfg` supplies tolerances and the
/// default grid density.
pub fn load_problem(text: &str, cfg: &Config) -> Result<ProblemSpec, LoadError> {
    let sections = split_sections(text)?;
    let problem = sections
        .iter()
        .find(|s| s.kind == "problem")
        .ok_or(LoadError::Format { line: 1, section: "problem".into(), message: "missing [problem] section".into() })?;
    let n = problem.usize_key("n")?.ok_or_else(|| problem.err(problem.line, "missing key `n`"))?;
    if n == 0 {
        return Err(problem.err(problem.require("n")?.0, "`n` must be positive"));
    }
    let q = problem.usize_key("q")?.unwrap_or(0);
    let name = problem.get("name").map_or_else(|| "problem".to_string(), |(_, v)| v.clone());
    let dens = problem.usize_key("grid_density")?.unwrap_or(cfg.grid_density);

    let mut sets = BTreeMap::new();
    let mut objective = None;
    let mut constraints = Vec::new();
    for sec in &sections {
        match sec.kind.as_str() {
            "problem" => {
                if !std::ptr::eq(sec, problem) {
                    return Err(sec.err(sec.line, "only one [problem] section is allowed"));
                }
                for (k, (l, _)) in &sec.keys {
                    if !["n", "q", "name", "grid_density"].contains(&k.as_str()) {
                        return Err(sec.err(*l, format!("unknown key `{k}`")));
                    }
                }
            }
            "scenarios" => {
                let set = scenario_set(sec, q, dens)?;
                if sets.insert(set.label().to_string(), set).is_some() {
                    return Err(sec.err(sec.line, "scenario label defined twice"));
                }
            }
            "objective" | "constraint" => {}
            other => return Err(sec.err(sec.line, format!("unknown section `{other}`"))),
        }
    }
    for sec in &sections {
        match sec.kind.as_str() {
            "objective" => {
                if objective.is_some() {
                    return Err(sec.err(sec.line, "only one [objective] section is allowed"));
                }
                let g = function(sec, "g", "analytic_dg", n, q)?;
                let h = match sec.get("h") {
                    Some(_) => function(sec, "h", "analytic_dh", n, q)?,
                    None => ScenarioFunction::zero(n, q),
                };
                let form = sec.get("form").map_or("dtc", |(_, v)| v.as_str());
                objective = Some(match form {
                    "dtc" => Objective::Dtc(DtcObjective { g, h, scenarios: lookup(&sets, sec, "scenarios", q)? }),
                    "sup" => Objective::SupPair(SupDtcPair {
                        g,
                        g_scenarios: lookup(&sets, sec, "g_scenarios", q)?,
                        h,
                        h_scenarios: lookup(&sets, sec, "h_scenarios", q)?,
                    }),
                    other => return Err(sec.err(sec.get("form").unwrap().0, format!("unknown objective form `{other}`"))),
                });
            }
            "constraint" => {
                let g = function(sec, "g", "analytic_dg", n, q)?;
                constraints.push(RobustConstraint { g, scenarios: lookup(&sets, sec, "scenarios", q)? });
            }
            _ => {}
        }
    }
    let objective = objective.unwrap_or_else(|| {
        Objective::Dtc(DtcObjective { g: ScenarioFunction::zero(n, q), h: ScenarioFunction::zero(n, q), scenarios: ScenarioSet::singleton(q) })
    });
    let spec = ProblemSpec { name, n, objective, constraints, config: Config { grid_density: dens, ..cfg.clone() } };
    spec.validate().map_err(|e| model_error(problem.line, e))?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(s: &str) -> Result<ProblemSpec, LoadError> {
        load_problem(s, &Config::default())
    }

    #[test]
    fn minimal_file() {
        let spec = load("[problem]\nn = 1\n[objective]\ng = abs(x1)\nh = 0\n").unwrap();
        assert_eq!(spec.n, 1);
        assert!(spec.constraints.is_empty());
    }

    #[test]
    fn scenario_index_beyond_q_is_a_dimension_mismatch() {
        let text = "[problem]\nn = 2\nq = 2\n[scenarios V]\n0 0\n[constraint]\ng = v3 * x1\nscenarios = V\n";
        assert!(matches!(load(text), Err(LoadError::DimensionMismatch { line: 7, .. })));
    }

    #[test]
    fn diagnostics_name_the_line() {
        let text = "[problem]\nn = 2\n[objective]\ng = x1 +\n";
        match load(text).err() {
            Some(LoadError::Format { line, section, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(section, "objective");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(load("[problem]\nn = 2\n[scenarios E]\n"), Err(LoadError::EmptyScenarioSet { .. })));
        assert!(matches!(load("[problem]\nn = 2\n[constraint]\ng = x1\nscenarios = W\n"), Err(LoadError::Format { line: 5, .. })));
    }

    #[test]
    fn grids_and_points_are_merged() {
        let text = "[problem]\nn = 2\nq = 2\n[scenarios V]\ngrid ball r=2 n=8\n5 5\n[constraint]\ng = v1*x1\nscenarios = V\n";
        let spec = load(text).unwrap();
        let s = &spec.constraints[0].scenarios;
        assert_eq!(s.label(), "V");
        assert!(s.points().iter().any(|p| p == &vec![5.0, 5.0]));
        assert!(s.points().iter().any(|p| p == &vec![2.0, 0.0]));
    }
}
