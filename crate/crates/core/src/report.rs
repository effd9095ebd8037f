//! Refinement sweeps, convergence rates and table output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::{
    exact_eigenvalues, lower_bounds, pair_bounds, upper_bound_higher, upper_bound_lowest, EnclosureReport,
};
use crate::elements::ElementKind;
use crate::error::{Error, Result};
use crate::mesh::{build_mesh, DomainKind};
use crate::solve::{EigOptions, EigenResult, DEFAULT_SEED, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PostKinds {
    None,
    Lowest,
    Higher,
    Both,
}

impl PostKinds {
    pub fn lowest(self) -> bool {
        matches!(self, PostKinds::Lowest | PostKinds::Both)
    }

    pub fn higher(self) -> bool {
        matches!(self, PostKinds::Higher | PostKinds::Both)
    }

    pub fn parse(s: &str) -> Option<PostKinds> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Some(PostKinds::None),
            "lowest" => Some(PostKinds::Lowest),
            "higher" => Some(PostKinds::Higher),
            "both" => Some(PostKinds::Both),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    Csv,
    Markdown,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Markdown => "md",
            Format::Json => "json",
        }
    }

    pub fn parse(s: &str) -> Option<Format> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "markdown" | "md" => Some(Format::Markdown),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub domain: DomainKind,
    pub nc_kind: ElementKind,
    pub post: PostKinds,
    /// Subdivisions per unit length, strictly increasing.
    pub levels: Vec<usize>,
    /// Eigenvalues reported.
    pub m: usize,
    /// Source solves for the higher-order scheme; at least `m`.
    pub subspace: Option<usize>,
    pub tol: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(domain: DomainKind, nc_kind: ElementKind, levels: Vec<usize>) -> ExperimentConfig {
        ExperimentConfig {
            domain,
            nc_kind,
            post: PostKinds::Both,
            levels,
            m: 6,
            subspace: None,
            tol: DEFAULT_TOL,
            seed: DEFAULT_SEED,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidConfig("m must be at least 1".into()));
        }
        if self.levels.is_empty() || self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("levels must be non-empty and strictly increasing".into()));
        }
        if self.levels[0] == 0 {
            return Err(Error::ZeroSubdivisions);
        }
        if self.nc_kind.is_conforming() {
            return Err(Error::InvalidConfig(format!("{} is not a nonconforming element", self.nc_kind)));
        }
        if self.subspace.is_some_and(|s| s < self.m) {
            return Err(Error::InvalidConfig("subspace must be at least m".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        Ok(())
    }

    fn pairs_needed(&self) -> usize {
        if self.post.higher() {
            self.subspace.unwrap_or(self.m).max(self.m)
        } else {
            self.m
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelFailure {
    pub n: usize,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub h: f64,
    pub value: f64,
    pub error: Option<f64>,
    /// Rate from the previous level: `ln(e_prev/e) / ln(h_prev/h)`.
    pub rate: Option<f64>,
}

/// One quantity tracked across levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub label: String,
    /// 1-based eigenvalue index, or `None` for summed series.
    pub j: Option<usize>,
    pub points: Vec<RatePoint>,
    pub fitted_rate: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trend {
    Increasing,
    Decreasing,
    Mixed,
}

impl Trend {
    pub fn of(values: &[f64]) -> Trend {
        if values.len() >= 2 && values.windows(2).all(|w| w[1] > w[0]) {
            Trend::Increasing
        } else if values.len() >= 2 && values.windows(2).all(|w| w[1] < w[0]) {
            Trend::Decreasing
        } else {
            Trend::Mixed
        }
    }

    pub fn arrow(self) -> &'static str {
        match self {
            Trend::Increasing => "↗",
            Trend::Decreasing => "↘",
            Trend::Mixed => "-",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub version: String,
    pub config: ExperimentConfig,
    pub reports: Vec<EnclosureReport>,
    pub failures: Vec<LevelFailure>,
    pub rates: Vec<RateTable>,
    /// Extrapolated from the higher-order upper bounds; only for rate
    /// estimation, never a certified value.
    pub reference: Option<Vec<f64>>,
}

impl Bundle {
    pub fn empty(config: ExperimentConfig) -> Bundle {
        Bundle {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            reports: Vec::new(),
            failures: Vec::new(),
            rates: Vec::new(),
            reference: None,
        }
    }

    pub fn has_inversion(&self) -> bool {
        self.reports
            .iter()
            .any(|r| r.verify().is_err() || !r.direction_violations().is_empty())
    }

    /// Column values across levels: `column` is 0 lower, 1 lowest-order
    /// upper, 2 higher-order upper.
    pub fn column(&self, column: usize, j: usize) -> Vec<f64> {
        self.reports
            .iter()
            .filter_map(|r| r.rows.get(j - 1))
            .filter_map(|row| match column {
                0 => Some(row.lower),
                1 => row.upper_lowest,
                _ => row.upper_higher,
            })
            .collect()
    }

    pub fn trend(&self, column: usize, j: usize) -> Trend {
        Trend::of(&self.column(column, j))
    }
}

fn truncate(res: &EigenResult, m: usize) -> EigenResult {
    let mut r = res.clone();
    r.eigenvalues.truncate(m);
    r.eigenvectors.truncate(m);
    r.residuals.truncate(m);
    r
}

/// Runs one level.
pub fn run_level(config: &ExperimentConfig, n: usize) -> Result<EnclosureReport> {
    let mesh = build_mesh(config.domain, config.nc_kind.cell_kind(), n)?;
    let opts = EigOptions {
        tol: config.tol,
        seed: config.seed,
        ..EigOptions::default()
    };
    let s = config.pairs_needed();
    let nc = lower_bounds(&mesh, config.nc_kind, s, &opts)?;
    let m = config.m;
    let lowest_kind = config.post.lowest().then(|| config.nc_kind.lowest_conforming());
    let higher_kind = config.post.higher().then(|| config.nc_kind.higher_conforming());
    let lowest = match lowest_kind {
        Some(k) => Some(upper_bound_lowest(&truncate(&nc, m), k, &mesh)?),
        None => None,
    };
    let higher = match higher_kind {
        Some(k) => Some(upper_bound_higher(&nc, k, &mesh, s)?),
        None => None,
    };
    let rows = pair_bounds(
        &nc.eigenvalues[..m],
        lowest.as_ref().map(|u| &u.values[..m.min(u.values.len())]),
        higher.as_ref().map(|u| &u.values[..m.min(u.values.len())]),
    );
    Ok(EnclosureReport {
        domain: config.domain,
        n,
        h: mesh.h(),
        nc_kind: config.nc_kind,
        lowest_kind,
        higher_kind,
        subspace: higher_kind.map(|_| s),
        reduced_dim: higher.as_ref().map(|u| u.reduced_dim),
        tol: config.tol,
        seed: config.seed,
        solver_iterations: nc.iterations,
        max_residual: nc.residuals.iter().copied().fold(0.0, f64::max),
        rows,
        exact: exact_eigenvalues(config.domain, m),
    })
}

/// Runs every level in order; a failing level is recorded and skipped.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Bundle> {
    config.validate()?;
    let mut bundle = Bundle::empty(config.clone());
    for &n in &config.levels {
        match run_level(config, n) {
            Ok(r) => bundle.reports.push(r),
            Err(e) => bundle.failures.push(LevelFailure { n, error: e.to_string() }),
        }
    }
    bundle.reference = richardson_reference(&bundle);
    bundle.rates = rate_tables(&bundle);
    Ok(bundle)
}

/// Least-squares slope of `ln e` against `ln h`; nonpositive errors are
/// skipped and fewer than two remaining points give `None`.
pub fn fit_rate(errors: &[f64], hs: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .zip(hs)
        .filter(|(e, h)| **e > 0.0 && **h > 0.0 && e.is_finite())
        .map(|(e, h)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

fn series(label: &str, j: Option<usize>, data: &[(usize, f64, f64, Option<f64>)]) -> RateTable {
    let mut points: Vec<RatePoint> = Vec::new();
    for &(n, h, value, error) in data {
        let rate = match (points.last(), error) {
            (Some(prev), Some(e)) => match prev.error {
                Some(pe) if pe > 0.0 && e > 0.0 => Some((pe / e).ln() / (prev.h / h).ln()),
                _ => None,
            },
            _ => None,
        };
        points.push(RatePoint { n, h, value, error, rate });
    }
    let errs: Vec<f64> = points.iter().filter_map(|p| p.error).collect();
    let hs: Vec<f64> = points.iter().filter(|p| p.error.is_some()).map(|p| p.h).collect();
    RateTable {
        label: label.to_string(),
        j,
        fitted_rate: fit_rate(&errs, &hs),
        points,
    }
}

fn rate_tables(bundle: &Bundle) -> Vec<RateTable> {
    let m = bundle.config.m;
    let reports = &bundle.reports;
    let mut out = Vec::new();
    let exact = exact_eigenvalues(bundle.config.domain, m);
    let cols = [(0, "lower"), (1, "upper_lowest"), (2, "upper_higher")];
    for (col, name) in cols {
        for j in 1..=m {
            let data: Vec<_> = reports
                .iter()
                .filter_map(|r| {
                    let row = r.rows.get(j - 1)?;
                    let v = match col {
                        0 => row.lower,
                        1 => row.upper_lowest?,
                        _ => row.upper_higher?,
                    };
                    let reference = exact.as_ref().map(|e| e[j - 1]).or_else(|| {
                        // non-certified reference only for rate estimation
                        bundle.reference.as_ref().map(|r| r[j - 1])
                    });
                    Some((r.n, r.h, v, reference.map(|l| (v - l).abs())))
                })
                .collect();
            if !data.is_empty() {
                out.push(series(name, Some(j), &data));
            }
        }
    }
    for j in 1..=m {
        let data: Vec<_> = reports
            .iter()
            .filter_map(|r| {
                let w = r.rows.get(j - 1)?.width?;
                Some((r.n, r.h, w, Some(w)))
            })
            .collect();
        if !data.is_empty() {
            out.push(series("width", Some(j), &data));
        }
    }
    // summed errors
    let sum = |f: &dyn Fn(&EnclosureReport) -> Option<f64>| -> Vec<(usize, f64, f64, Option<f64>)> {
        reports.iter().filter_map(|r| f(r).map(|v| (r.n, r.h, v, Some(v)))).collect()
    };
    if let Some(ex) = &exact {
        let err1 = sum(&|r| Some(r.rows.iter().zip(ex).map(|(row, l)| l - row.lower).sum()));
        out.push(series("Err1", None, &err1));
        let err2 = sum(&|r| r.rows.iter().zip(ex).map(|(row, l)| row.upper_lowest.map(|u| u - l)).sum());
        if !err2.is_empty() {
            out.push(series("Err2", None, &err2));
        }
        let err3 = sum(&|r| r.rows.iter().zip(ex).map(|(row, l)| row.upper_higher.map(|u| u - l)).sum());
        if !err3.is_empty() {
            out.push(series("Err3", None, &err3));
        }
    } else {
        let err1 = sum(&|r| r.rows.iter().map(|row| row.upper_lowest.map(|u| u - row.lower)).sum());
        if !err1.is_empty() {
            out.push(series("Err1", None, &err1));
        }
        let err3 = sum(&|r| r.rows.iter().map(|row| row.upper_higher.map(|u| u - row.lower)).sum());
        if !err3.is_empty() {
            out.push(series("Err3", None, &err3));
        }
    }
    out
}

/// Extrapolates each higher-order upper bound sequence from its last three
/// levels, with the rate fitted from the same three values.
pub fn richardson_reference(bundle: &Bundle) -> Option<Vec<f64>> {
    if exact_eigenvalues(bundle.config.domain, 1).is_some() {
        return None;
    }
    let m = bundle.config.m;
    let k = bundle.reports.len();
    if k < 3 {
        return None;
    }
    let last = &bundle.reports[k - 3..];
    let ratio = last[0].h / last[1].h;
    if ((last[1].h / last[2].h) - ratio).abs() > 1e-9 * ratio {
        return None;
    }
    (1..=m)
        .map(|j| {
            let v: Vec<f64> = last.iter().map(|r| r.rows.get(j - 1)?.upper_higher).collect::<Option<_>>()?;
            let (d1, d2) = (v[0] - v[1], v[1] - v[2]);
            if d1 * d2 <= 0.0 {
                return None;
            }
            let factor = d1 / d2;
            if factor <= 1.0 {
                return None;
            }
            // factor = ratio^rate, so the tail is d2 / (factor - 1)
            Some(v[2] - d2 / (factor - 1.0))
        })
        .collect()
}

pub const CSV_HEADER: &str =
    "domain,element,n,h,j,lambda_lower,lambda_upper_lowest,lambda_upper_higher,width,rate";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

pub fn render(bundle: &Bundle, format: Format) -> Result<String> {
    Ok(match format {
        Format::Csv => render_csv(bundle),
        Format::Markdown => render_markdown(bundle),
        Format::Json => serde_json::to_string_pretty(bundle)? + "\n",
    })
}

/// Width rate between consecutive levels in the `rate` column.
fn render_csv(bundle: &Bundle) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for (k, r) in bundle.reports.iter().enumerate() {
        for row in &r.rows {
            let rate = k.checked_sub(1).and_then(|p| {
                let prev = &bundle.reports[p];
                let pw = prev.rows.get(row.j - 1)?.width?;
                let w = row.width?;
                (pw > 0.0 && w > 0.0).then(|| (pw / w).ln() / (prev.h / r.h).ln())
            });
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.domain.name(),
                r.nc_kind.name(),
                r.n,
                r.h,
                row.j,
                row.lower,
                opt(row.upper_lowest),
                opt(row.upper_higher),
                opt(row.width),
                opt(rate)
            );
        }
    }
    s
}

fn render_markdown(bundle: &Bundle) -> String {
    let m = bundle.config.m;
    let mut s = String::new();
    let c = &bundle.config;
    let _ = writeln!(
        s,
        "# {} / {} (m = {}, tol = {:e}, seed = {})\n",
        c.domain.name(),
        c.nc_kind.name(),
        m,
        c.tol,
        c.seed
    );
    let titles = [
        (0, format!("Lower bounds ({})", c.nc_kind.name())),
        (1, format!("Upper bounds, lowest-order postprocessing ({})", c.nc_kind.lowest_conforming().name())),
        (2, format!("Upper bounds, higher-order postprocessing ({})", c.nc_kind.higher_conforming().name())),
    ];
    for (col, title) in titles {
        if (col == 1 && !c.post.lowest()) || (col == 2 && !c.post.higher()) {
            continue;
        }
        let _ = writeln!(s, "## {title}\n");
        let _ = write!(s, "| h |");
        for j in 1..=m {
            let _ = write!(s, " λ{j} |");
        }
        s.push('\n');
        s.push_str("|---|");
        s.push_str(&"---|".repeat(m));
        s.push('\n');
        for r in &bundle.reports {
            let _ = write!(s, "| {:.6} |", r.h);
            for row in &r.rows {
                let v = match col {
                    0 => Some(row.lower),
                    1 => row.upper_lowest,
                    _ => row.upper_higher,
                };
                let _ = write!(s, " {} |", v.map(|x| format!("{x:.7}")).unwrap_or_default());
            }
            s.push('\n');
        }
        let _ = write!(s, "| Trend |");
        for j in 1..=m {
            let _ = write!(s, " {} |", bundle.trend(col, j).arrow());
        }
        s.push_str("\n\n");
    }
    let sums: Vec<&RateTable> = bundle.rates.iter().filter(|t| t.j.is_none()).collect();
    if !sums.is_empty() {
        s.push_str("## Error series\n\n| series | n | h | value | rate |\n|---|---|---|---|---|\n");
        for t in sums {
            for p in &t.points {
                let _ = writeln!(
                    s,
                    "| {} | {} | {:.6} | {:.6e} | {} |",
                    t.label,
                    p.n,
                    p.h,
                    p.value,
                    p.rate.map(|r| format!("{r:.3}")).unwrap_or_default()
                );
            }
        }
        s.push('\n');
    }
    for f in &bundle.failures {
        let _ = writeln!(s, "Level n = {} failed: {}", f.n, f.error);
    }
    s
}

/// Writes `<domain>_<element>.<ext>` into `dir` and returns the path.
pub fn emit(bundle: &Bundle, format: Format, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!(
        "{}_{}.{}",
        bundle.config.domain.name(),
        bundle.config.nc_kind.name(),
        format.extension()
    ));
    std::fs::write(&path, render(bundle, format)?)?;
    Ok(path)
}

pub fn parse_json(text: &str) -> Result<Bundle> {
    Ok(serde_json::from_str(text)?)
}
