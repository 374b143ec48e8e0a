//! Scenario configuration files.
//!
//! A configuration is line oriented: `key = value` pairs, `[section]` headers
//! that prefix the following keys with `section.`, and `#` comments. Dotted
//! keys may also be written directly. Recognized keys:
//!
//! ```text
//! name, expected (symmetric|broken|exploratory), suites (comma separated)
//! sig.eta (+1|-1), orientation.epsilon_sign (+1|-1)
//! params.<name>                  late-bound parameter values (expressions in i, pi)
//! chart.kind (liouville|polar|frame), chart.beta or chart.B (β = √B),
//! chart.e00 chart.e01 chart.e10 chart.e11   frame e_a^μ for kind = frame
//! scheme.c1 … scheme.c4          separation functions; fields follow from them
//! fields.A0 fields.A1 fields.V fields.Vhat fields.q
//! killing.form, killing.e00 killing.e01 killing.e11, killing.vec_form,
//! killing.alpha0 killing.alpha1 killing.zeta0 killing.zeta1, killing.alpha,
//! killing.gprime                 (forms: frame_upper|coord_upper|coord_lower)
//! first_order.xi0 first_order.xi1 first_order.form first_order.omega first_order.a
//! classical.k00 classical.k01 classical.k11 classical.b0 classical.b1
//! classical.w classical.u
//! solution.kind (free|kepler), solution.h
//! sampling.box (x0 x1 y0 y1), sampling.margin, sampling.seed, sampling.count
//! tol.rel, tol.abs
//! ```
//!
//! Expressions follow the grammar of [`crate::expr`] and may use every
//! declared parameter. When `scheme.*` is present the fields and, unless given,
//! the Killing data are derived from the scheme.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::catalog::{scenario, CatalogError, Chart, ClassicalData, Expected, ReferenceSolution, Sampling, Scenario, Suite};
use crate::clifford::Signature;
use crate::expr::{parse, Expr, ExprError, Func, Params};
use crate::fields::ExternalFields;
use crate::geometry::SampleBox;
use crate::operators::{FirstOrderOp, KillingData, TensorForm};
use crate::report::Tolerance;
use crate::separation::SchemeD5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("missing key `{0}`")]
    MissingKey(String),
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
    #[error("expression for `{key}`: {error}")]
    Expr { key: String, error: ExprError },
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("no suite selected")]
    EmptySuite,
    #[error("grid has no points")]
    EmptyGrid,
}

const KNOWN: &[&str] = &[
    "name",
    "expected",
    "suites",
    "sig.eta",
    "orientation.epsilon_sign",
    "chart.kind",
    "chart.beta",
    "chart.B",
    "chart.e00",
    "chart.e01",
    "chart.e10",
    "chart.e11",
    "scheme.c1",
    "scheme.c2",
    "scheme.c3",
    "scheme.c4",
    "fields.A0",
    "fields.A1",
    "fields.V",
    "fields.Vhat",
    "fields.q",
    "killing.form",
    "killing.e00",
    "killing.e01",
    "killing.e11",
    "killing.vec_form",
    "killing.alpha0",
    "killing.alpha1",
    "killing.zeta0",
    "killing.zeta1",
    "killing.alpha",
    "killing.gprime",
    "first_order.xi0",
    "first_order.xi1",
    "first_order.form",
    "first_order.omega",
    "first_order.a",
    "classical.k00",
    "classical.k01",
    "classical.k11",
    "classical.b0",
    "classical.b1",
    "classical.w",
    "classical.u",
    "solution.kind",
    "solution.h",
    "sampling.box",
    "sampling.margin",
    "sampling.seed",
    "sampling.count",
    "tol.rel",
    "tol.abs",
];

/// Raw `key = value` entries with their line numbers.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub entries: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::Syntax { line, message: "unterminated section header".into() })?
                    .trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(ConfigError::Syntax { line, message: format!("bad section name `{name}`") });
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line, message: "expected `key = value`".into() })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(ConfigError::Syntax { line, message: "empty key".into() });
            }
            let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
            let known = KNOWN.contains(&key.as_str()) || key.strip_prefix("params.").is_some_and(|p| !p.is_empty());
            if !known {
                return Err(ConfigError::UnknownKey { line, key });
            }
            if entries.insert(key.clone(), (line, v.trim().to_string())).is_some() {
                return Err(ConfigError::DuplicateKey { line, key });
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.entries.keys().any(|k| k.starts_with(prefix))
    }
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue { key: key.into(), message: message.into() }
}

/// Evaluates a constant expression (no coordinates, no parameters).
fn constant(key: &str, value: &str) -> Result<Complex64, ConfigError> {
    let e = parse(value, &[]).map_err(|error| ConfigError::Expr { key: key.into(), error })?;
    if e.depends_on(0) || e.depends_on(1) {
        return Err(invalid(key, "must not depend on x or y"));
    }
    e.eval((0.0, 0.0), &Params::new()).map_err(|error| ConfigError::Expr { key: key.into(), error })
}

fn real(key: &str, value: &str) -> Result<f64, ConfigError> {
    let c = constant(key, value)?;
    if c.im != 0.0 {
        return Err(invalid(key, "must be real"));
    }
    Ok(c.re)
}

fn sign(key: &str, value: &str) -> Result<i8, ConfigError> {
    match value.trim_start_matches('+') {
        "1" => Ok(1),
        "-1" => Ok(-1),
        _ => Err(invalid(key, "must be +1 or -1")),
    }
}

fn form(key: &str, value: &str) -> Result<TensorForm, ConfigError> {
    match value {
        "frame_upper" => Ok(TensorForm::FrameUpper),
        "coord_upper" => Ok(TensorForm::CoordUpper),
        "coord_lower" => Ok(TensorForm::CoordLower),
        _ => Err(invalid(key, "expected frame_upper, coord_upper or coord_lower")),
    }
}

fn form_name(f: TensorForm) -> &'static str {
    match f {
        TensorForm::FrameUpper => "frame_upper",
        TensorForm::CoordUpper => "coord_upper",
        TensorForm::CoordLower => "coord_lower",
    }
}

/// Comma- or whitespace-separated suite list; `all` selects every suite.
pub fn parse_suites(value: &str) -> Result<Vec<Suite>, ConfigError> {
    let mut out = Vec::new();
    for item in value.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
        if item == "all" {
            for s in Suite::ALL {
                if !out.contains(&s) {
                    out.push(s);
                }
            }
            continue;
        }
        let s = Suite::from_str(item).map_err(|m| invalid("suites", m))?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    if out.is_empty() {
        return Err(ConfigError::EmptySuite);
    }
    Ok(out)
}

struct Reader<'a> {
    raw: &'a RawConfig,
    names: Vec<String>,
}

impl Reader<'_> {
    fn expr(&self, key: &str) -> Result<Option<Expr>, ConfigError> {
        let Some(v) = self.raw.get(key) else { return Ok(None) };
        let names: Vec<&str> = self.names.iter().map(String::as_str).collect();
        parse(v, &names).map(Some).map_err(|error| ConfigError::Expr { key: key.into(), error })
    }

    fn expr_or_zero(&self, key: &str) -> Result<Expr, ConfigError> {
        Ok(self.expr(key)?.unwrap_or_else(Expr::zero))
    }

    /// Real constant that may refer to declared parameters.
    fn real_constant(&self, key: &str, params: &Params) -> Result<Option<f64>, ConfigError> {
        let Some(e) = self.expr(key)? else { return Ok(None) };
        if e.depends_on(0) || e.depends_on(1) {
            return Err(invalid(key, "must not depend on x or y"));
        }
        let v = e.eval((0.0, 0.0), params).map_err(|error| ConfigError::Expr { key: key.into(), error })?;
        if v.im != 0.0 {
            return Err(invalid(key, "must be real"));
        }
        Ok(Some(v.re))
    }

    fn required(&self, key: &str) -> Result<Expr, ConfigError> {
        self.expr(key)?.ok_or_else(|| ConfigError::MissingKey(key.into()))
    }
}

/// Builds a scenario from configuration text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let raw = RawConfig::parse(text)?;
    let mut params = Params::new();
    for (k, (_, v)) in &raw.entries {
        if let Some(name) = k.strip_prefix("params.") {
            if parse(name, &[]).is_ok() || matches!(name, "x" | "y" | "i" | "pi") || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(invalid(k, "parameter names must be identifiers other than x, y, i, pi and function names"));
            }
            params.insert(name.to_string(), constant(k, v)?);
        }
    }
    let rd = Reader { raw: &raw, names: params.keys().cloned().collect() };

    let eta = raw.get("sig.eta").map(|v| sign("sig.eta", v)).transpose()?.unwrap_or(1);
    let orientation = raw.get("orientation.epsilon_sign").map(|v| sign("orientation.epsilon_sign", v)).transpose()?.unwrap_or(1);
    let sig = Signature::new(eta, orientation);

    let kind = raw.get("chart.kind").ok_or_else(|| ConfigError::MissingKey("chart.kind".into()))?;
    let beta = match (rd.expr("chart.beta")?, rd.expr("chart.B")?) {
        (Some(_), Some(_)) => return Err(invalid("chart.B", "give either chart.beta or chart.B")),
        (Some(b), None) => Some(b),
        (None, Some(b)) => Some(Expr::call(Func::Sqrt, b)),
        (None, None) => None,
    };
    let chart = match kind {
        "liouville" | "polar" => {
            let beta = beta.ok_or_else(|| ConfigError::MissingKey("chart.beta".into()))?;
            if kind == "liouville" {
                Chart::Liouville { beta }
            } else {
                Chart::Polar { beta }
            }
        }
        "frame" => Chart::Frame {
            frame: [
                [rd.required("chart.e00")?, rd.required("chart.e01")?],
                [rd.required("chart.e10")?, rd.required("chart.e11")?],
            ],
        },
        other => return Err(invalid("chart.kind", format!("unknown chart kind `{other}`"))),
    };

    let scheme = if raw.has_prefix("scheme.") {
        let Some((kind, beta)) = chart.scheme_kind() else {
            return Err(invalid("scheme.c1", "a separation scheme needs a liouville or polar chart"));
        };
        if raw.has_prefix("fields.") {
            return Err(invalid("fields", "fields are derived from the scheme; remove either section"));
        }
        let c = [rd.required("scheme.c1")?, rd.required("scheme.c2")?, rd.required("scheme.c3")?, rd.required("scheme.c4")?];
        Some(SchemeD5::new(kind, sig, beta.clone(), c, params.clone()))
    } else {
        None
    };

    let fields = match &scheme {
        Some(s) => s.potentials(),
        None => ExternalFields {
            a: [rd.expr_or_zero("fields.A0")?, rd.expr_or_zero("fields.A1")?],
            q: raw.get("fields.q").map(|v| constant("fields.q", v)).transpose()?.unwrap_or(Complex64::new(1.0, 0.0)),
            v: rd.expr_or_zero("fields.V")?,
            vhat: rd.expr_or_zero("fields.Vhat")?,
            va: None,
            params: params.clone(),
        },
    };

    let killing_data = if raw.has_prefix("killing.") {
        let mut kd = KillingData::zero();
        kd.e_form = raw.get("killing.form").map(|v| form("killing.form", v)).transpose()?.unwrap_or(TensorForm::FrameUpper);
        kd.vec_form = raw.get("killing.vec_form").map(|v| form("killing.vec_form", v)).transpose()?.unwrap_or(TensorForm::FrameUpper);
        let e01 = rd.expr_or_zero("killing.e01")?;
        kd.e = [[rd.expr_or_zero("killing.e00")?, e01.clone()], [e01, rd.expr_or_zero("killing.e11")?]];
        kd.alpha_vec = [rd.expr_or_zero("killing.alpha0")?, rd.expr_or_zero("killing.alpha1")?];
        kd.zeta = [rd.expr_or_zero("killing.zeta0")?, rd.expr_or_zero("killing.zeta1")?];
        kd.alpha = rd.expr_or_zero("killing.alpha")?;
        kd.gprime = rd.expr_or_zero("killing.gprime")?;
        kd.params = params.clone();
        Some(kd)
    } else {
        scheme.as_ref().map(|s| s.killing_data())
    };

    let killing_vector = if raw.has_prefix("first_order.") {
        Some(FirstOrderOp {
            xi: [rd.expr_or_zero("first_order.xi0")?, rd.expr_or_zero("first_order.xi1")?],
            xi_form: raw.get("first_order.form").map(|v| form("first_order.form", v)).transpose()?.unwrap_or(TensorForm::CoordUpper),
            omega: rd.expr_or_zero("first_order.omega")?,
            a: raw.get("first_order.a").map(|v| constant("first_order.a", v)).transpose()?.unwrap_or_default(),
            params: params.clone(),
        })
    } else {
        None
    };

    let classical = if raw.has_prefix("classical.") {
        let k01 = rd.expr_or_zero("classical.k01")?;
        Some(ClassicalData {
            k: [[rd.expr_or_zero("classical.k00")?, k01.clone()], [k01, rd.expr_or_zero("classical.k11")?]],
            b: [rd.expr_or_zero("classical.b0")?, rd.expr_or_zero("classical.b1")?],
            w: rd.expr_or_zero("classical.w")?,
            u: rd.expr_or_zero("classical.u")?,
        })
    } else {
        None
    };

    let solution = match raw.get("solution.kind") {
        None => None,
        Some("free") => Some(ReferenceSolution::Free),
        Some("kepler") => {
            let h = rd.real_constant("solution.h", &params)?.ok_or_else(|| ConfigError::MissingKey("solution.h".into()))?;
            Some(ReferenceSolution::Kepler { h })
        }
        Some(other) => return Err(invalid("solution.kind", format!("unknown solution `{other}`"))),
    };

    let sample_box = match raw.get("sampling.box") {
        None => SampleBox::new((-1.0, 1.0), (0.2, 1.0)),
        Some(v) => {
            let nums: Vec<f64> = v
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| real("sampling.box", s))
                .collect::<Result<_, _>>()?;
            if nums.len() != 4 || !(nums[0] < nums[1] && nums[2] < nums[3]) {
                return Err(invalid("sampling.box", "expected x0 x1 y0 y1 with x0 < x1 and y0 < y1"));
            }
            SampleBox::new((nums[0], nums[1]), (nums[2], nums[3]))
        }
    };
    let mut sampling = Sampling::new(sample_box);
    if let Some(v) = raw.get("sampling.margin") {
        sampling.margin = real("sampling.margin", v)?;
        let b = sample_box.shrink(sampling.margin);
        if sampling.margin < 0.0 || b.x.0 >= b.x.1 || b.y.0 >= b.y.1 {
            return Err(invalid("sampling.margin", "margin must be non-negative and leave a non-empty box"));
        }
    }
    if let Some(v) = raw.get("sampling.seed") {
        sampling.seed = v.parse().map_err(|_| invalid("sampling.seed", "expected a non-negative integer"))?;
    }
    if let Some(v) = raw.get("sampling.count") {
        sampling.count = v.parse().map_err(|_| invalid("sampling.count", "expected a non-negative integer"))?;
        if sampling.count == 0 {
            return Err(invalid("sampling.count", "at least one sample point is needed"));
        }
    }
    let mut tol = Tolerance::default();
    if let Some(v) = raw.get("tol.rel") {
        tol.rel = real("tol.rel", v)?;
    }
    if let Some(v) = raw.get("tol.abs") {
        tol.abs = real("tol.abs", v)?;
    }
    if !(tol.rel >= 0.0 && tol.abs >= 0.0) {
        return Err(invalid("tol", "tolerances must be non-negative"));
    }

    let expected = match raw.get("expected") {
        None => Expected::Symmetric,
        Some(v) => Expected::from_str(v).map_err(|m| invalid("expected", m))?,
    };
    let suites = match raw.get("suites") {
        None => Suite::ALL.to_vec(),
        Some(v) => parse_suites(v)?,
    };

    Ok(Scenario {
        name: raw.get("name").unwrap_or("config").to_string(),
        sig,
        chart,
        fields,
        killing_data,
        killing_vector,
        scheme,
        classical,
        solution,
        expected,
        suites,
        params,
        sampling,
        tol,
        notes: Vec::new(),
    })
}

/// Reads a scenario from `catalog:<name>` or from a configuration file.
pub fn load_scenario(spec: &str) -> Result<Scenario, ConfigError> {
    if let Some(name) = spec.strip_prefix("catalog:") {
        return Ok(scenario(name)?);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| ConfigError::Io { path: spec.into(), message: e.to_string() })?;
    parse_scenario(&text)
}

fn complex_text(c: Complex64) -> String {
    Expr::constant(c).to_string()
}

/// Configuration text that parses back to an equivalent scenario.
pub fn to_config(s: &Scenario) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
    line("name", s.name.clone());
    line("expected", s.expected.name().into());
    line("suites", s.suites.iter().map(|x| x.name()).collect::<Vec<_>>().join(", "));
    let mut sections: Vec<(&str, Vec<(String, String)>)> = Vec::new();
    sections.push(("sig", vec![("eta".into(), s.sig.eta.to_string())]));
    sections.push(("orientation", vec![("epsilon_sign".into(), s.sig.orientation.to_string())]));
    if !s.params.is_empty() {
        sections.push(("params", s.params.iter().map(|(k, v)| (k.clone(), complex_text(*v))).collect()));
    }
    let chart = match &s.chart {
        Chart::Liouville { beta } => vec![("kind".into(), "liouville".into()), ("beta".into(), beta.to_string())],
        Chart::Polar { beta } => vec![("kind".into(), "polar".into()), ("beta".into(), beta.to_string())],
        Chart::Frame { frame } => vec![
            ("kind".into(), "frame".into()),
            ("e00".into(), frame[0][0].to_string()),
            ("e01".into(), frame[0][1].to_string()),
            ("e10".into(), frame[1][0].to_string()),
            ("e11".into(), frame[1][1].to_string()),
        ],
    };
    sections.push(("chart", chart));
    match &s.scheme {
        Some(sc) => sections.push((
            "scheme",
            vec![
                ("c1".into(), sc.c1.to_string()),
                ("c2".into(), sc.c2.to_string()),
                ("c3".into(), sc.c3.to_string()),
                ("c4".into(), sc.c4.to_string()),
            ],
        )),
        None => sections.push((
            "fields",
            vec![
                ("A0".into(), s.fields.a[0].to_string()),
                ("A1".into(), s.fields.a[1].to_string()),
                ("V".into(), s.fields.v.to_string()),
                ("Vhat".into(), s.fields.vhat.to_string()),
                ("q".into(), complex_text(s.fields.q)),
            ],
        )),
    }
    if let Some(kd) = &s.killing_data {
        sections.push((
            "killing",
            vec![
                ("form".into(), form_name(kd.e_form).into()),
                ("e00".into(), kd.e[0][0].to_string()),
                ("e01".into(), kd.e[0][1].to_string()),
                ("e11".into(), kd.e[1][1].to_string()),
                ("vec_form".into(), form_name(kd.vec_form).into()),
                ("alpha0".into(), kd.alpha_vec[0].to_string()),
                ("alpha1".into(), kd.alpha_vec[1].to_string()),
                ("zeta0".into(), kd.zeta[0].to_string()),
                ("zeta1".into(), kd.zeta[1].to_string()),
                ("alpha".into(), kd.alpha.to_string()),
                ("gprime".into(), kd.gprime.to_string()),
            ],
        ));
    }
    if let Some(k1) = &s.killing_vector {
        sections.push((
            "first_order",
            vec![
                ("xi0".into(), k1.xi[0].to_string()),
                ("xi1".into(), k1.xi[1].to_string()),
                ("form".into(), form_name(k1.xi_form).into()),
                ("omega".into(), k1.omega.to_string()),
                ("a".into(), complex_text(k1.a)),
            ],
        ));
    }
    if let Some(cd) = &s.classical {
        sections.push((
            "classical",
            vec![
                ("k00".into(), cd.k[0][0].to_string()),
                ("k01".into(), cd.k[0][1].to_string()),
                ("k11".into(), cd.k[1][1].to_string()),
                ("b0".into(), cd.b[0].to_string()),
                ("b1".into(), cd.b[1].to_string()),
                ("w".into(), cd.w.to_string()),
                ("u".into(), cd.u.to_string()),
            ],
        ));
    }
    match s.solution {
        Some(ReferenceSolution::Free) => sections.push(("solution", vec![("kind".into(), "free".into())])),
        Some(ReferenceSolution::Kepler { h }) => {
            sections.push(("solution", vec![("kind".into(), "kepler".into()), ("h".into(), complex_text(Complex64::new(h, 0.0)))]))
        }
        None => {}
    }
    let b = s.sampling.sample_box;
    sections.push((
        "sampling",
        vec![
            ("box".into(), format!("{} {} {} {}", b.x.0, b.x.1, b.y.0, b.y.1)),
            ("margin".into(), s.sampling.margin.to_string()),
            ("seed".into(), s.sampling.seed.to_string()),
            ("count".into(), s.sampling.count.to_string()),
        ],
    ));
    sections.push(("tol", vec![("rel".into(), format!("{:e}", s.tol.rel)), ("abs".into(), format!("{:e}", s.tol.abs))]));
    for n in &s.notes {
        out.push_str(&format!("# {n}\n"));
    }
    for (name, entries) in sections {
        out.push_str(&format!("\n[{name}]\n"));
        for (k, v) in entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
    }
    out
}
