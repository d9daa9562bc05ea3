//! Campaigns over many triples: classifier/oracle scans, generating-pair
//! counts `f(n)` and their quadratic fits, conjecture checks, metric tables,
//! and CSV/SVG output.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cayley::{graph_metrics, CayleyError, GraphMetrics, MAX_BFS_DEGREE};
use crate::classifier::{classify, Triple, Verdict};
use crate::grouptest::{generates_sym_screened, GroupError};

/// In `auto` mode the oracle runs on every triple up to this degree.
pub const AUTO_ORACLE_DEGREE: usize = 40;

/// Fixed denominators of the quadratic model per residue of `n` mod 4.
pub const FIT_DENOMINATORS: [f64; 4] = [13.0, 9.0, 10.0, 7.0];

/// Smallest degree included in the `f(n)` fits.
pub const FIT_MIN_DEGREE: usize = 6;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid degree range {n_min}..={n_max}")]
    InvalidRange { n_min: usize, n_max: usize },
    #[error("residue class {residue} has {points} data points; need at least 3")]
    InsufficientData { residue: usize, points: usize },
    #[error("unknown oracle mode {0:?}; expected on, off or auto")]
    BadOracleMode(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Cayley(#[from] CayleyError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    On,
    Off,
    Auto,
}

impl FromStr for OracleMode {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "on" => Ok(OracleMode::On),
            "off" => Ok(OracleMode::Off),
            "auto" => Ok(OracleMode::Auto),
            other => Err(ExperimentError::BadOracleMode(other.to_string())),
        }
    }
}

impl fmt::Display for OracleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleMode::On => "on",
            OracleMode::Off => "off",
            OracleMode::Auto => "auto",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanRecord {
    pub triple: Triple,
    pub classifier: Verdict,
    pub oracle: Option<bool>,
}

impl ScanRecord {
    /// Set when the classifier is decisive and the oracle ran.
    pub fn agree(&self) -> Option<bool> {
        Some(self.classifier.decision()? == self.oracle?)
    }

    /// Oracle answer if available, else the classifier's.
    pub fn generates(&self) -> Option<bool> {
        self.oracle.or(self.classifier.decision())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct TripleRow {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub classifier_verdict: String,
    pub rule: String,
    pub oracle_verdict: String,
    pub agree: String,
}

fn decision_label(d: Option<bool>) -> &'static str {
    match d {
        Some(true) => "generates",
        Some(false) => "not_generates",
        None => "",
    }
}

impl From<&ScanRecord> for TripleRow {
    fn from(r: &ScanRecord) -> Self {
        TripleRow {
            n: r.triple.n,
            m: r.triple.m,
            k: r.triple.k,
            classifier_verdict: r.classifier.label().to_string(),
            rule: r
                .classifier
                .rule()
                .map(|x| x.as_str())
                .unwrap_or("")
                .to_string(),
            oracle_verdict: decision_label(r.oracle).to_string(),
            agree: r.agree().map(|a| a.to_string()).unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub struct FCount {
    pub n: usize,
    #[serde(rename = "f_n")]
    pub f: usize,
    #[serde(rename = "residue_mod4")]
    pub residue: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ScanResult {
    /// Sorted by `(n, m, k)`.
    pub records: Vec<ScanRecord>,
    pub fcounts: Vec<FCount>,
    /// Degrees where some triple stayed undecided, so `f(n)` is a lower bound.
    pub incomplete: Vec<usize>,
}

impl ScanResult {
    pub fn disagreements(&self) -> Vec<&ScanRecord> {
        self.records
            .iter()
            .filter(|r| r.agree() == Some(false))
            .collect()
    }

    pub fn f(&self, n: usize) -> Option<usize> {
        self.fcounts.iter().find(|c| c.n == n).map(|c| c.f)
    }

    /// Generating pairs `(m, k)` for degree `n`.
    pub fn generating_pairs(&self, n: usize) -> Vec<(usize, usize)> {
        self.records
            .iter()
            .filter(|r| r.triple.n == n && r.generates() == Some(true))
            .map(|r| (r.triple.m, r.triple.k))
            .collect()
    }

    /// Decided triples, keyed for lookup.
    pub fn census(&self) -> Census {
        Census {
            decided: self
                .records
                .iter()
                .filter_map(|r| r.generates().map(|g| (r.triple, g)))
                .collect(),
        }
    }
}

/// Classifies every triple with `n_min <= n <= n_max` and, depending on
/// `mode`, runs the order oracle.
pub fn scan(n_min: usize, n_max: usize, mode: OracleMode) -> Result<ScanResult, ExperimentError> {
    if n_min < 4 || n_min > n_max || n_max > crate::perm::MAX_DEGREE {
        return Err(ExperimentError::InvalidRange { n_min, n_max });
    }
    let triples: Vec<Triple> = (n_min..=n_max).flat_map(Triple::all_of_degree).collect();
    let records = triples
        .into_par_iter()
        .map(|t| {
            let classifier = classify(t);
            let run_oracle = match mode {
                OracleMode::On => true,
                OracleMode::Off => false,
                OracleMode::Auto => t.n <= AUTO_ORACLE_DEGREE || classifier == Verdict::Unknown,
            };
            let oracle = if run_oracle {
                Some(generates_sym_screened(&t.generators())?)
            } else {
                None
            };
            Ok(ScanRecord {
                triple: t,
                classifier,
                oracle,
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let mut fcounts = Vec::new();
    let mut incomplete = Vec::new();
    for n in n_min..=n_max {
        let of_n = records.iter().filter(|r| r.triple.n == n);
        let f = of_n.clone().filter(|r| r.generates() == Some(true)).count();
        if of_n.clone().any(|r| r.generates().is_none()) {
            incomplete.push(n);
        }
        fcounts.push(FCount {
            n,
            f,
            residue: n % 4,
        });
    }
    Ok(ScanResult {
        records,
        fcounts,
        incomplete,
    })
}

/// Generation status of decided triples.
#[derive(Debug, Clone, Default)]
pub struct Census {
    decided: BTreeMap<Triple, bool>,
}

impl Census {
    /// Runs the oracle on every triple up to `n_max`.
    pub fn build(n_max: usize) -> Result<Census, ExperimentError> {
        Ok(scan(4, n_max, OracleMode::On)?.census())
    }

    pub fn get(&self, t: Triple) -> Option<bool> {
        self.decided.get(&t).copied()
    }

    pub fn n_max(&self) -> usize {
        self.decided.keys().map(|t| t.n).max().unwrap_or(0)
    }

    pub fn generating(&self) -> impl Iterator<Item = Triple> + '_ {
        self.decided.iter().filter(|e| *e.1).map(|e| *e.0)
    }
}

/// A generating triple whose shift does not generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShiftViolation {
    pub from: Triple,
    pub to: Triple,
}

fn shift_violations(
    census: &Census,
    step: usize,
    applies: impl Fn(&Triple) -> bool,
) -> Vec<ShiftViolation> {
    let n_max = census.n_max();
    census
        .generating()
        .filter(|t| t.n + step <= n_max && applies(t))
        .filter_map(|t| {
            let to = Triple::new(t.n + step, t.m + step, t.k + step).ok()?;
            (census.get(to) == Some(false)).then_some(ShiftViolation { from: t, to })
        })
        .collect()
}

/// Generating triples `(n,m,k)` whose shift by 4 fails to generate.
pub fn check_conjecture_mod4(census: &Census) -> Vec<ShiftViolation> {
    shift_violations(census, 4, |_| true)
}

/// Generating triples with `n ≡ 0, 1 (mod 4)` whose shift by 2 fails.
pub fn check_conjecture_mod2(census: &Census) -> Vec<ShiftViolation> {
    shift_violations(census, 2, |t| t.n % 4 <= 1)
}

/// Generating triples with `m + k < n` (even `n`) or `m + k < n - 1` (odd `n`).
pub fn check_conjecture_km_sum(census: &Census) -> Vec<Triple> {
    census
        .generating()
        .filter(|t| {
            let bound = if t.n % 2 == 0 { t.n } else { t.n - 1 };
            t.m + t.k < bound
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FkRecord {
    pub n: usize,
    /// `F_k(n)`: the `m` making `(n, m, k)` generate.
    pub members: Vec<usize>,
    pub running_max: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FkScan {
    pub k: usize,
    pub records: Vec<FkRecord>,
    pub observed_max: usize,
    pub conjectured_max: usize,
}

impl FkScan {
    pub fn within_bound(&self) -> bool {
        self.observed_max <= self.conjectured_max
    }
}

/// `k + 1` for even `k`, `(k + 1) / 2` for odd `k`.
pub fn conjectured_fk_max(k: usize) -> usize {
    if k % 2 == 0 {
        k + 1
    } else {
        (k + 1) / 2
    }
}

/// `|F_k(n)|` for `k + 1 < n <= n_max`.
pub fn fk_scan(census: &Census, k: usize) -> FkScan {
    let mut running_max = 0;
    let records = (k + 2..=census.n_max())
        .map(|n| {
            let members: Vec<usize> = (k + 1..n)
                .filter(|&m| census.get(Triple { n, m, k }) == Some(true))
                .collect();
            running_max = running_max.max(members.len());
            FkRecord {
                n,
                members,
                running_max,
            }
        })
        .collect();
    FkScan {
        k,
        records,
        observed_max: running_max,
        conjectured_max: conjectured_fk_max(k),
    }
}

/// Least-squares fit of `f(n) ≈ (n² + u·n + v) / q` for one residue class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub residue: usize,
    pub q: f64,
    pub u: f64,
    pub v: f64,
    pub rmse: f64,
    pub points: usize,
    /// Unconstrained `a·n² + b·n + c` fit on the same data.
    pub free_quadratic: [f64; 3],
    pub free_rmse: f64,
}

impl FitResult {
    pub fn predict(&self, n: f64) -> f64 {
        (n * n + self.u * n + self.v) / self.q
    }
}

fn least_squares(design: DMatrix<f64>, target: DVector<f64>) -> DVector<f64> {
    design
        .svd(true, true)
        .solve(&target, 1e-12)
        .expect("SVD with both factors computed")
}

fn rmse(residuals: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = residuals.fold((0.0, 0usize), |(s, c), r| (s + r * r, c + 1));
    (sum / count as f64).sqrt()
}

/// Fits one residue class with the denominator fixed to `q`.
pub fn fit_class(
    residue: usize,
    q: f64,
    data: &[(usize, usize)],
) -> Result<FitResult, ExperimentError> {
    if data.len() < 3 {
        return Err(ExperimentError::InsufficientData {
            residue,
            points: data.len(),
        });
    }
    let ns: Vec<f64> = data.iter().map(|d| d.0 as f64).collect();
    let fs: Vec<f64> = data.iter().map(|d| d.1 as f64).collect();
    let rows = data.len();
    let linear = DMatrix::from_fn(rows, 2, |i, j| if j == 0 { ns[i] } else { 1.0 });
    let shifted = DVector::from_fn(rows, |i, _| q * fs[i] - ns[i] * ns[i]);
    let uv = least_squares(linear, shifted);
    let (u, v) = (uv[0], uv[1]);
    let quad = DMatrix::from_fn(rows, 3, |i, j| ns[i].powi(2 - j as i32));
    let abc = least_squares(quad, DVector::from_column_slice(&fs));
    let free_quadratic = [abc[0], abc[1], abc[2]];
    let eval = |n: f64| free_quadratic[0] * n * n + free_quadratic[1] * n + free_quadratic[2];
    Ok(FitResult {
        residue,
        q,
        u,
        v,
        rmse: rmse(
            ns.iter()
                .zip(&fs)
                .map(|(&n, &f)| f - (n * n + u * n + v) / q),
        ),
        points: rows,
        free_quadratic,
        free_rmse: rmse(ns.iter().zip(&fs).map(|(&n, &f)| f - eval(n))),
    })
}

/// One fit per residue of `n` mod 4 over counts with `n >= FIT_MIN_DEGREE`.
pub fn fit_fn(fcounts: &[FCount]) -> Result<Vec<FitResult>, ExperimentError> {
    (0..4)
        .map(|r| {
            let data: Vec<(usize, usize)> = fcounts
                .iter()
                .filter(|c| c.n % 4 == r && c.n >= FIT_MIN_DEGREE)
                .map(|c| (c.n, c.f))
                .collect();
            fit_class(r, FIT_DENOMINATORS[r], &data)
        })
        .collect()
}

/// Triples attaining an extreme value of a metric.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Extreme {
    pub value: usize,
    pub triples: Vec<Triple>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeSummary {
    pub n: usize,
    pub min_diameter: Extreme,
    pub max_diameter: Extreme,
    pub min_girth: Extreme,
    pub max_girth: Extreme,
}

#[derive(Debug, Clone)]
pub struct Tables {
    pub rows: Vec<GraphMetrics>,
    pub summaries: Vec<DegreeSummary>,
}

fn extreme(rows: &[&GraphMetrics], key: impl Fn(&GraphMetrics) -> usize, max: bool) -> Extreme {
    let pick = rows.iter().map(|r| key(r));
    let value = if max { pick.max() } else { pick.min() }.unwrap_or(0);
    let mut triples: Vec<Triple> = rows
        .iter()
        .filter(|r| key(r) == value)
        .map(|r| r.triple)
        .collect();
    triples.sort();
    Extreme { value, triples }
}

/// Metrics for every generating triple of each degree in `ns`, with
/// per-degree extremes. Hamiltonicity is checked only for degrees up to
/// `hamilton_upto`, with the given budget.
pub fn reproduce_tables(
    ns: &[usize],
    hamilton_upto: usize,
    budget: u64,
) -> Result<Tables, ExperimentError> {
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &n in ns {
        if !(4..=MAX_BFS_DEGREE).contains(&n) {
            return Err(ExperimentError::InvalidRange { n_min: n, n_max: n });
        }
        let generating: Vec<Triple> = Triple::all_of_degree(n)
            .filter(|t| generates_sym_screened(&t.generators()).unwrap_or(false))
            .collect();
        let ham = (n <= hamilton_upto).then_some(budget);
        let metrics = generating
            .into_par_iter()
            .map(|t| graph_metrics(t, ham))
            .collect::<Result<Vec<_>, CayleyError>>()?;
        let refs: Vec<&GraphMetrics> = metrics.iter().collect();
        summaries.push(DegreeSummary {
            n,
            min_diameter: extreme(&refs, |m| m.diameter, false),
            max_diameter: extreme(&refs, |m| m.diameter, true),
            min_girth: extreme(&refs, |m| m.girth, false),
            max_girth: extreme(&refs, |m| m.girth, true),
        });
        rows.extend(metrics);
    }
    Ok(Tables { rows, summaries })
}

pub fn write_triples_csv<W: Write>(records: &[ScanRecord], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(TripleRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fcounts_csv<W: Write>(fcounts: &[FCount], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    for c in fcounts {
        w.serialize(c)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_fcounts_csv<R: Read>(input: R) -> Result<Vec<FCount>, ExperimentError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(ExperimentError::from))
        .collect()
}

pub fn write_metrics_csv<W: Write>(rows: &[GraphMetrics], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GraphMetrics::CSV_HEADER)?;
    for r in rows {
        w.write_record(r.csv_record())?;
    }
    w.flush()?;
    Ok(())
}

const CLASS_COLORS: [&str; 4] = ["black", "green", "blue", "red"];

/// Scatter plot of `f(n)` colored by `n mod 4`, with the fitted curves.
pub fn render_svg(fcounts: &[FCount], fits: &[FitResult]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 500.0;
    const PAD: f64 = 50.0;
    let n_max = fcounts.iter().map(|c| c.n).max().unwrap_or(1).max(1) as f64;
    let f_max = fcounts.iter().map(|c| c.f).max().unwrap_or(1).max(1) as f64;
    let x = |n: f64| PAD + n / n_max * (W - 2.0 * PAD);
    let y = |f: f64| H - PAD - f / f_max * (H - 2.0 * PAD);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <line x1=\"{PAD}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"gray\"/>\n\
         <line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{b}\" stroke=\"gray\"/>\n\
         <text x=\"{cx}\" y=\"{t}\" text-anchor=\"middle\" font-size=\"14\">n</text>\n\
         <text x=\"15\" y=\"{cy}\" font-size=\"14\">f(n)</text>\n",
        b = H - PAD,
        r = W - PAD,
        cx = W / 2.0,
        t = H - 15.0,
        cy = H / 2.0,
    );
    for fit in fits {
        let color = CLASS_COLORS[fit.residue % 4];
        let points: Vec<String> = (FIT_MIN_DEGREE..=n_max as usize)
            .map(|n| {
                let p = fit.predict(n as f64).clamp(0.0, f_max);
                format!("{:.1},{:.1}", x(n as f64), y(p))
            })
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>\n",
            points.join(" ")
        ));
    }
    for c in fcounts {
        svg.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{}\"/>\n",
            x(c.n as f64),
            y(c.f as f64),
            CLASS_COLORS[c.residue % 4]
        ));
    }
    for (i, fit) in fits.iter().enumerate() {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{}\">r={}: q={}, u={:.3}, v={:.3}, RMSE={:.3}</text>\n",
            PAD + 10.0,
            PAD + 15.0 * i as f64,
            CLASS_COLORS[fit.residue % 4],
            fit.residue,
            fit.q,
            fit.u,
            fit.v,
            fit.rmse
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        let s = scan(4, 8, OracleMode::On).unwrap();
        assert!(s.disagreements().is_empty());
        assert_eq!(s.f(4), Some(1));
        assert_eq!(s.generating_pairs(4), vec![(3, 2)]);
        let mut p7 = s.generating_pairs(7);
        p7.sort();
        let mut want = vec![
            (4, 2),
            (5, 2),
            (6, 2),
            (4, 3),
            (6, 3),
            (5, 4),
            (6, 4),
            (6, 5),
        ];
        want.sort();
        assert_eq!(p7, want);
        assert_eq!(s.f(8), Some(5));
    }

    #[test]
    fn classifier_only_scan_is_marked_incomplete() {
        let s = scan(10, 10, OracleMode::Off).unwrap();
        assert!(s.records.iter().all(|r| r.oracle.is_none()));
        assert_eq!(s.incomplete, vec![10]);
        assert!(scan(3, 5, OracleMode::On).is_err());
        assert!(scan(9, 8, OracleMode::On).is_err());
    }

    #[test]
    fn shifts_and_fk() {
        let census = Census::build(12).unwrap();
        assert!(check_conjecture_mod4(&census).is_empty());
        assert!(check_conjecture_mod2(&census).is_empty());
        assert!(check_conjecture_km_sum(&census).is_empty());
        assert_eq!(census.get(Triple::new(11, 10, 9).unwrap()), Some(true));
        let f2 = fk_scan(&census, 2);
        assert_eq!(
            f2.records.iter().find(|r| r.n == 7).unwrap().members,
            vec![4, 5, 6]
        );
        assert_eq!(f2.conjectured_max, 3);
        let f3 = fk_scan(&census, 3);
        assert_eq!(
            f3.records.iter().find(|r| r.n == 8).unwrap().members,
            vec![6]
        );
    }

    #[test]
    fn exact_model_recovery() {
        let data: Vec<(usize, usize)> = (1..=12)
            .map(|i| 9 * i - 1)
            .map(|n| (n, (n * n + 2 * n + 1) / 9))
            .collect();
        let fit = fit_class(1, 9.0, &data).unwrap();
        assert!(
            (fit.u - 2.0).abs() < 1e-9 && (fit.v - 1.0).abs() < 1e-9 && fit.rmse < 1e-9,
            "{fit:?}"
        );
        assert!(matches!(
            fit_class(0, 13.0, &data[..2]),
            Err(ExperimentError::InsufficientData { points: 2, .. })
        ));
    }

    #[test]
    fn csv_roundtrip() {
        let counts = vec![
            FCount {
                n: 7,
                f: 8,
                residue: 3,
            },
            FCount {
                n: 8,
                f: 5,
                residue: 0,
            },
        ];
        let mut buf = Vec::new();
        write_fcounts_csv(&counts, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("n,f_n,residue_mod4\n7,8,3\n"));
        assert_eq!(read_fcounts_csv(&buf[..]).unwrap(), counts);
        let s = scan(5, 5, OracleMode::On).unwrap();
        let mut buf = Vec::new();
        write_triples_csv(&s.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,m,k,classifier_verdict,rule,oracle_verdict,agree\n"));
        assert!(text.contains("5,3,2,generates,k_eq_2,generates,true"));
    }

    #[test]
    fn svg_has_points_and_curves() {
        let counts: Vec<FCount> = (6..30)
            .map(|n| FCount {
                n,
                f: n * n / 10,
                residue: n % 4,
            })
            .collect();
        let fits = fit_fn(&counts).unwrap();
        let svg = render_svg(&counts, &fits);
        assert_eq!(svg.matches("<circle").count(), counts.len());
        assert_eq!(svg.matches("<polyline").count(), 4);
    }
}
