//! Analyses behind each subcommand. Each returns its CSV table and summary.

use log::info;
use mpd_core::coherence::{check_lgi_coherence, check_qpi_coherence};
use mpd_core::csv::{self, number};
use mpd_core::histories::{history_weight, Event, HistorySpec};
use mpd_core::lgi::{best_signs, sweep, sweep_maximum, verify_optimum, ClosedFormTerms, Range, SweepAxis, SweepPoint};
use mpd_core::qpi::{best_candidate, candidate_reports, find_destructive, qpi_probabilities, SearchRanges};
use mpd_core::quadrature::QuadratureGrid;
use mpd_core::{Constants, LgiGeometry, QpiGeometry};
use rayon::prelude::*;

use crate::config::{Analysis, Diagnostic, ScenarioConfig, SetupConfig};
use crate::error::CliError;

pub struct Artifact {
    pub csv_name: String,
    pub csv: String,
    pub rows: usize,
    pub summary: Vec<String>,
}

impl Artifact {
    fn new(analysis: Analysis, csv: String, summary: Vec<String>) -> Self {
        let rows = csv.lines().count().saturating_sub(1);
        Self { csv_name: format!("{}.csv", analysis.name()), csv, rows, summary }
    }
}

pub fn run(analysis: Analysis, cfg: &ScenarioConfig) -> Result<Artifact, CliError> {
    let k = cfg.constants()?;
    let grid = QuadratureGrid::auto(cfg.grid_step);
    match analysis {
        Analysis::LgiSweep => lgi_sweep(cfg, lgi(cfg, analysis)?, &k, &grid),
        Analysis::LgiPoint => lgi_point(lgi(cfg, analysis)?, &k, &grid),
        Analysis::QpiSearch => qpi_search(qpi(cfg, analysis)?, &cfg.search, &k, &grid),
        Analysis::QpiPoint => qpi_point(qpi(cfg, analysis)?, &k, &grid),
        Analysis::Coherence => coherence(cfg, &k),
        Analysis::Probabilities => probabilities(cfg, &k, &grid),
    }
}

fn wrong_kind(analysis: Analysis, want: &str) -> CliError {
    CliError::Config(vec![Diagnostic::error("setup.kind", format!("{} needs a `{want}` setup", analysis.name()))])
}

fn lgi(cfg: &ScenarioConfig, analysis: Analysis) -> Result<&LgiGeometry, CliError> {
    match &cfg.setup {
        SetupConfig::Lgi(g) => Ok(g),
        _ => Err(wrong_kind(analysis, "lgi")),
    }
}

fn qpi(cfg: &ScenarioConfig, analysis: Analysis) -> Result<&QpiGeometry, CliError> {
    match &cfg.setup {
        SetupConfig::Qpi(g) => Ok(g),
        _ => Err(wrong_kind(analysis, "qpi")),
    }
}

/// Re-evaluates every point by quadrature; fails on the first disagreement.
fn verify_points(points: &[SweepPoint], k: &Constants, grid: &QuadratureGrid) -> Result<f64, CliError> {
    let rel: Vec<f64> = points
        .par_iter()
        .map(|p| {
            verify_optimum(&p.geometry.setup(), k, grid, &p.report).map(|c| c.ka_rel().max(c.kv_rel())).map_err(|e| {
                match e {
                    mpd_core::MpdError::OracleMismatch(m) => {
                        mpd_core::MpdError::OracleMismatch(format!("{m} at {:?}", p.geometry))
                    }
                    other => other,
                }
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(rel.into_iter().fold(0.0, f64::max))
}

fn describe_point(p: &SweepPoint) -> String {
    let g = &p.geometry;
    let r = &p.report;
    format!(
        "K_A - K_V = {} (K_A {}, K_V {}) at ds {} µm, beta1 {} µm, beta2 {} µm, sigma0 {} µm, signs q1 {:?} q2 {:?}",
        number(r.violation),
        number(r.ka),
        number(r.kv),
        number(g.ds),
        number(g.beta1),
        number(g.beta2),
        number(g.sigma0),
        r.signs.q1,
        r.signs.q2
    )
}

fn lgi_sweep(
    cfg: &ScenarioConfig,
    g: &LgiGeometry,
    k: &Constants,
    grid: &QuadratureGrid,
) -> Result<Artifact, CliError> {
    let axis = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config(vec![Diagnostic::error("sweep", "lgi-sweep needs a sweep axis")]))?;
    let points = sweep(g, axis, &cfg.settings, k)?;
    info!("{} sweep points, verifying by quadrature", points.len());
    let worst = verify_points(&points, k, grid)?;
    let mut summary = vec![format!("{} sweep points", points.len())];
    if let Some(best) = sweep_maximum(&points) {
        summary.push(format!("maximum: {}", describe_point(best)));
    }
    summary.push(format!("closed form vs quadrature: worst relative difference {worst:.3e}"));
    Ok(Artifact::new(Analysis::LgiSweep, csv::lgi_sweep(axis, &points), summary))
}

fn lgi_point(g: &LgiGeometry, k: &Constants, grid: &QuadratureGrid) -> Result<Artifact, CliError> {
    let terms = ClosedFormTerms::new(&g.setup(), k)?;
    let point = SweepPoint { geometry: *g, report: best_signs(|s| terms.evaluate(s)) };
    let worst = verify_points(std::slice::from_ref(&point), k, grid)?;
    let summary = vec![
        describe_point(&point),
        format!("signaling {:?}", point.report.signaling.map(number)),
        format!("closed form vs quadrature: relative difference {worst:.3e}"),
    ];
    let axis = SweepAxis::Ds { range: Range::single(g.ds) };
    Ok(Artifact::new(Analysis::LgiPoint, csv::lgi_sweep(&axis, &[point]), summary))
}

fn qpi_search(
    g: &QpiGeometry,
    ranges: &SearchRanges,
    k: &Constants,
    grid: &QuadratureGrid,
) -> Result<Artifact, CliError> {
    let setup = g.setup();
    let found = find_destructive(&setup, ranges, k)?;
    let reports = candidate_reports(&setup, k, grid, &found)?;
    let mut summary = vec![format!("{} constructive second-plane positions", found.len())];
    match best_candidate(&found) {
        Some(best) => {
            let at = reports.iter().find(|r| r.x21 == best.x21).expect("report per candidate");
            summary.push(format!(
                "optimum: x21 {} µm, x31 {} µm, destructive margin {}",
                number(best.x21),
                number(best.x31),
                number(best.destructive_margin)
            ));
            summary.push(format!("verdicts at optimum {:?}", at.verdicts));
        }
        None => summary.push("no constructive second-plane position in range".into()),
    }
    let all = reports.iter().filter(|r| r.counterintuitive()).count();
    summary.push(format!("{all} positions satisfy all three inequalities"));
    Ok(Artifact::new(Analysis::QpiSearch, csv::qpi(&reports), summary))
}

fn qpi_point(g: &QpiGeometry, k: &Constants, grid: &QuadratureGrid) -> Result<Artifact, CliError> {
    let r = qpi_probabilities(&g.setup(), k, grid, g.x21, g.x31)?;
    let summary = vec![
        format!(
            "x21 {} µm, x31 {} µm: margins {} / {}",
            number(r.x21),
            number(r.x31),
            number(r.constructive_margin),
            number(r.destructive_margin)
        ),
        format!("verdicts {:?}", r.verdicts),
    ];
    Ok(Artifact::new(Analysis::QpiPoint, csv::qpi(&[r]), summary))
}

fn coherence(cfg: &ScenarioConfig, k: &Constants) -> Result<Artifact, CliError> {
    let reports = match &cfg.setup {
        SetupConfig::Lgi(g) => {
            let ds = match &cfg.coherence_range {
                Some(r) => r.values()?,
                None => vec![g.ds],
            };
            ds.into_iter().map(|ds| (ds, check_lgi_coherence(&LgiGeometry { ds, ..*g }, k))).collect()
        }
        SetupConfig::Qpi(g) => match &cfg.coherence_range {
            // Each X₂,₁ is paired with its best third-plane position.
            Some(r) => {
                let ranges = SearchRanges { x21: *r, ..cfg.search.clone() };
                find_destructive(&g.setup(), &ranges, k)?
                    .into_iter()
                    .map(|c| (c.x21, check_qpi_coherence(&g.with_slits(c.x21, c.x31), k)))
                    .collect()
            }
            None => vec![(g.x21, check_qpi_coherence(g, k))],
        },
        SetupConfig::Planes(_) => return Err(wrong_kind(Analysis::Coherence, "lgi` or `qpi")),
    };
    let infeasible = reports.iter().filter(|(_, r)| !r.all_feasible()).count();
    let summary = vec![format!("{} parameter values, {infeasible} with an infeasible check", reports.len())];
    Ok(Artifact::new(Analysis::Coherence, csv::coherence(&reports), summary))
}

/// Compact history label: `p1s2` projects onto slit 2 of plane 1, `p1s1+3`
/// opens slits 1 and 3, `p2m` measures on plane 2. Events joined by '/'.
pub fn history_label(h: &HistorySpec) -> String {
    h.events
        .iter()
        .map(|e| match e {
            Event::Projection { plane, slit } => format!("p{}s{}", plane + 1, slit + 1),
            Event::SlitSet { plane, slits } => {
                let s: Vec<String> = slits.iter().map(|s| (s + 1).to_string()).collect();
                format!("p{}s{}", plane + 1, s.join("+"))
            }
            Event::Measurement { plane } => format!("p{}m", plane + 1),
        })
        .collect::<Vec<_>>()
        .join("/")
}

/// Every single-event history: each slit and the detector on each plane.
fn default_histories(cfg: &ScenarioConfig) -> Vec<HistorySpec> {
    let setup = cfg.setup.physical();
    setup
        .planes
        .iter()
        .enumerate()
        .flat_map(|(plane, p)| {
            (0..p.slit_count())
                .map(move |slit| Event::Projection { plane, slit })
                .chain([Event::Measurement { plane }])
                .map(|e| HistorySpec::new(vec![e]))
        })
        .collect()
}

fn probabilities(cfg: &ScenarioConfig, k: &Constants, grid: &QuadratureGrid) -> Result<Artifact, CliError> {
    let setup = cfg.setup.physical();
    let histories = if cfg.histories.is_empty() { default_histories(cfg) } else { cfg.histories.clone() };
    let weights = histories.par_iter().map(|h| history_weight(&setup, k, grid, h)).collect::<Result<Vec<_>, _>>()?;
    let mut out = String::from("history,weight,zero_probability\n");
    for (h, w) in histories.iter().zip(&weights) {
        let reason = w.zero_probability.as_deref().unwrap_or("").replace(',', ";");
        out.push_str(&format!("{},{},{}\n", history_label(h), number(w.weight), reason));
    }
    let impossible = weights.iter().filter(|w| w.zero_probability.is_some()).count();
    let summary = vec![format!("{} histories, {impossible} dynamically impossible", histories.len())];
    Ok(Artifact::new(Analysis::Probabilities, out, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        let h = HistorySpec::new(vec![
            Event::SlitSet { plane: 0, slits: vec![0, 2] },
            Event::Projection { plane: 1, slit: 1 },
            Event::Measurement { plane: 2 },
        ]);
        assert_eq!(history_label(&h), "p1s1+3/p2s2/p3m");
    }
}
