//! On-disk formats: space and cover documents (JSON), the plain-text edge
//! list accepted by `gen-space --graph`, report documents and the bound-curve
//! CSV. Exact rationals are written as `"p/q"` strings, reals with 12
//! significant digits.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::covers::{Cover, CoverError, CoverStats};
use crate::dimension::{BoundRow, DimEstimate};
use crate::spaces::{FiniteMetricSpace, PointId, SpaceError, SpaceKind};
use crate::witness::{Mode, PairAudit, WitnessReport};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field `{field}`: {message}")]
    Field { field: &'static str, message: String },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid rational `{0}`")]
    Rational(String),
}

/// `"p/q"`, always with an explicit denominator.
pub fn format_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse_rational(text: &str) -> Result<BigRational, FormatError> {
    let bad = || FormatError::Rational(text.to_string());
    let (p, q) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text.trim(), "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q == BigInt::from(0) {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}

/// Positional decimal with 12 significant digits.
pub fn format_real(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".to_string() } else { x.to_string() };
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let body = if exponent < 0 {
        format!("0.{}{}", "0".repeat((-exponent - 1) as usize), digits)
    } else {
        let int_len = exponent as usize + 1;
        if int_len >= digits.len() {
            format!("{}{}", digits, "0".repeat(int_len - digits.len()))
        } else {
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

fn rounded_real(x: f64) -> f64 {
    format_real(x).parse().unwrap_or(x)
}

/// Flat on-disk form of a space. Only the fields belonging to `kind` may be
/// present; keeping the struct flat lets parse errors carry line and column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDocument {
    pub kind: String,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arity: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[u32; 2]>>,
}

fn required<T: Clone>(field: &'static str, value: &Option<T>, kind: &str) -> Result<T, FormatError> {
    value.clone().ok_or_else(|| FormatError::Field { field, message: format!("required for kind `{kind}`") })
}

fn forbidden<T>(field: &'static str, value: &Option<T>, kind: &str) -> Result<(), FormatError> {
    match value {
        Some(_) => Err(FormatError::Field { field, message: format!("not allowed for kind `{kind}`") }),
        None => Ok(()),
    }
}

impl SpaceDocument {
    pub fn from_space(space: &FiniteMetricSpace) -> Self {
        let mut doc = SpaceDocument {
            kind: space.kind().name().to_string(),
            size: space.size(),
            dims: None,
            arity: None,
            depth: None,
            edges: None,
        };
        match space.kind() {
            SpaceKind::Graph { edges } => doc.edges = Some(edges.iter().map(|&(a, b)| [a.0, b.0]).collect()),
            SpaceKind::Grid { dims } => doc.dims = Some(dims.clone()),
            SpaceKind::Tree { arity, depth } => {
                doc.arity = Some(*arity);
                doc.depth = Some(*depth);
            }
        }
        doc
    }

    pub fn build(&self) -> Result<FiniteMetricSpace, FormatError> {
        let kind = self.kind.as_str();
        let space = match kind {
            "graph" => {
                forbidden("dims", &self.dims, kind)?;
                forbidden("arity", &self.arity, kind)?;
                forbidden("depth", &self.depth, kind)?;
                let pairs: Vec<(u32, u32)> = required("edges", &self.edges, kind)?.iter().map(|&[a, b]| (a, b)).collect();
                FiniteMetricSpace::from_graph(self.size, &pairs)?
            }
            "grid" => {
                forbidden("edges", &self.edges, kind)?;
                forbidden("arity", &self.arity, kind)?;
                forbidden("depth", &self.depth, kind)?;
                FiniteMetricSpace::grid_space(&required("dims", &self.dims, kind)?)?
            }
            "tree" => {
                forbidden("edges", &self.edges, kind)?;
                forbidden("dims", &self.dims, kind)?;
                FiniteMetricSpace::tree_space(required("arity", &self.arity, kind)?, required("depth", &self.depth, kind)?)?
            }
            other => {
                return Err(FormatError::Field {
                    field: "kind",
                    message: format!("unknown kind `{other}`, expected graph, grid or tree"),
                })
            }
        };
        if space.size() != self.size {
            return Err(FormatError::Field {
                field: "size",
                message: format!("declared {}, but the generator parameters give {}", self.size, space.size()),
            });
        }
        Ok(space)
    }
}

pub fn space_to_json(space: &FiniteMetricSpace) -> String {
    let mut text = serde_json::to_string(&SpaceDocument::from_space(space)).expect("serializable");
    text.push('\n');
    text
}

pub fn space_from_json(text: &str) -> Result<FiniteMetricSpace, FormatError> {
    serde_json::from_str::<SpaceDocument>(text)?.build()
}

/// Plain-text graph: the first non-comment line is the vertex count, every
/// further line is an edge `u v`. `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<FiniteMetricSpace, FormatError> {
    let mut size: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let number = |s: &str| {
            s.parse::<u32>().map_err(|_| FormatError::Line { line, message: format!("`{s}` is not a vertex id") })
        };
        match (size, fields.as_slice()) {
            (None, [count]) => {
                size = Some(count.parse().map_err(|_| FormatError::Line {
                    line,
                    message: format!("expected the vertex count, found `{count}`"),
                })?)
            }
            (None, _) => {
                return Err(FormatError::Line { line, message: "expected the vertex count on its own line".into() })
            }
            (Some(n), [a, b]) => {
                let (a, b) = (number(a)?, number(b)?);
                for id in [a, b] {
                    if id as usize >= n {
                        return Err(FormatError::Line {
                            line,
                            message: format!("vertex {id} is out of range for {n} vertices"),
                        });
                    }
                }
                if a == b {
                    return Err(FormatError::Line { line, message: format!("self-loop at vertex {a}") });
                }
                edges.push((a, b));
            }
            (Some(_), _) => {
                return Err(FormatError::Line { line, message: "expected an edge `u v`".into() })
            }
        }
    }
    let size = size.ok_or(FormatError::Line { line: 1, message: "missing vertex count".into() })?;
    Ok(FiniteMetricSpace::from_graph(size, &edges)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverDocument {
    pub elements: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoints: Option<Vec<u32>>,
}

impl CoverDocument {
    pub fn from_cover(cover: &Cover) -> Self {
        CoverDocument {
            elements: cover.elements().iter().map(|e| e.iter().map(|p| p.0).collect()).collect(),
            basepoints: Some(cover.basepoints().iter().map(|p| p.0).collect()),
        }
    }

    pub fn build(&self, space: &FiniteMetricSpace) -> Result<Cover, FormatError> {
        let elements: Vec<Vec<PointId>> =
            self.elements.iter().map(|e| e.iter().map(|&p| PointId(p)).collect()).collect();
        for (i, e) in self.elements.iter().enumerate() {
            if e.windows(2).any(|w| w[0] >= w[1]) {
                return Err(FormatError::Field {
                    field: "elements",
                    message: format!("element {i} is not a strictly increasing id list"),
                });
            }
        }
        let cover = match &self.basepoints {
            Some(bp) => Cover::with_basepoints(space, elements, bp.iter().map(|&p| PointId(p)).collect())?,
            None => Cover::new(space, elements)?,
        };
        Ok(cover)
    }
}

pub fn cover_to_json(cover: &Cover) -> String {
    let mut text = serde_json::to_string(&CoverDocument::from_cover(cover)).expect("serializable");
    text.push('\n');
    text
}

pub fn cover_from_json(space: &FiniteMetricSpace, text: &str) -> Result<Cover, FormatError> {
    serde_json::from_str::<CoverDocument>(text)?.build(space)
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

#[derive(Debug, Serialize)]
struct StatsDocument {
    multiplicity: u32,
    mesh: u32,
    ball_lebesgue_global: u32,
    per_point_min_location: u32,
    ball_lebesgue_saturation: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_lebesgue_number: Option<u32>,
    ball_lebesgue_per_point: Vec<u32>,
}

pub fn stats_to_json(stats: &CoverStats) -> String {
    pretty(&StatsDocument {
        multiplicity: stats.multiplicity,
        mesh: stats.mesh,
        ball_lebesgue_global: stats.ball_lebesgue.global,
        per_point_min_location: stats.ball_lebesgue.min_location.0,
        ball_lebesgue_saturation: stats.ball_lebesgue.saturation,
        exact_lebesgue_number: stats.exact_lebesgue,
        ball_lebesgue_per_point: stats.ball_lebesgue.per_point.clone(),
    })
}

#[derive(Debug, Serialize)]
struct PairDocument {
    x: u32,
    y: u32,
    eta_dist: String,
    zeta_dist: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    rhs_chain: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rhs_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nesting_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    amgm_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cardinality_ok: Option<bool>,
}

impl From<&PairAudit> for PairDocument {
    fn from(a: &PairAudit) -> Self {
        PairDocument {
            x: a.x.0,
            y: a.y.0,
            eta_dist: format_rational(&a.eta_dist),
            zeta_dist: format_rational(&a.zeta_dist),
            rhs_chain: a.chain.as_ref().map(|c| format_rational(&c.rhs_chain)),
            rhs_final: a.chain.as_ref().map(|c| rounded_real(c.rhs_final)),
            nesting_ok: a.chain.as_ref().map(|c| c.nesting_ok),
            amgm_ok: a.chain.as_ref().map(|c| c.amgm_ok),
            cardinality_ok: a.chain.as_ref().map(|c| c.cardinality_ok),
        }
    }
}

#[derive(Debug, Serialize)]
struct WitnessDocument {
    n: u32,
    #[serde(rename = "R")]
    r: u32,
    mode: &'static str,
    m: u32,
    mesh: u32,
    ball_lebesgue_global: u32,
    measured_sup_eta: String,
    measured_sup_zeta: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_final: Option<f64>,
    worst_pair: PairDocument,
    support_radius: u32,
    pairs_examined: usize,
    all_pairs_ok: bool,
}

pub fn witness_to_json(report: &WitnessReport) -> String {
    pretty(&WitnessDocument {
        n: report.params.n,
        r: report.params.r,
        mode: match report.mode {
            Mode::Bound => "bound",
            Mode::ConstructionOnly => "construction",
        },
        m: report.multiplicity,
        mesh: report.mesh,
        ball_lebesgue_global: report.ball_lebesgue_global,
        measured_sup_eta: format_rational(&report.measured_sup_eta),
        measured_sup_zeta: format_rational(&report.measured_sup_zeta),
        bound_final: report.bound_final.map(rounded_real),
        worst_pair: (&report.worst_pair).into(),
        support_radius: report.support_radius,
        pairs_examined: report.pairs_examined,
        all_pairs_ok: report.all_pairs_ok,
    })
}

#[derive(Debug, Serialize)]
struct DimDocument {
    lambda: u32,
    mesh_cap: u32,
    status: &'static str,
    upper: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<u32>,
    generator: Option<String>,
    surrogate: bool,
    candidates_examined: usize,
    witness_cover: Option<CoverDocument>,
}

pub fn dim_to_json(estimate: &DimEstimate) -> String {
    pretty(&DimDocument {
        lambda: estimate.query.lambda,
        mesh_cap: estimate.query.mesh_cap,
        status: if estimate.upper.is_some() { "upper bound established" } else { "no upper bound established" },
        upper: estimate.upper,
        exact: estimate.exact,
        generator: estimate.generator.clone(),
        surrogate: estimate.surrogate,
        candidates_examined: estimate.candidates_examined,
        witness_cover: estimate.witness_cover.as_ref().map(CoverDocument::from_cover),
    })
}

pub const CSV_HEADER: [&str; 7] =
    ["n", "m", "bound", "measured_sup_eta", "measured_sup_zeta", "sup_pair_x", "sup_pair_y"];

pub fn write_bound_csv<W: Write>(rows: &[BoundRow], out: W) -> Result<(), FormatError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record([
            row.n.to_string(),
            row.m.to_string(),
            format_real(row.bound),
            format_rational(&row.measured_sup_eta),
            format_rational(&row.measured_sup_zeta),
            row.sup_pair.0.to_string(),
            row.sup_pair.1.to_string(),
        ])?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}
