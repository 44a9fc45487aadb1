use std::cmp::Ordering;
use std::io::{Read, Write};

use irs_swipt::correlation::{build_matrix, CorrelationMatrix, CorrelationModel};
use irs_swipt::metrics::{
    average_harvested_energy, outage_fullcorr_equal, outage_fullcorr_random, outage_gamma_approx,
    outage_uncorrelated_exact,
};
use irs_swipt::moments::{analytic_moments, moments_optimal, moments_uniform, OptimalCorrelation};
use irs_swipt::montecarlo::{Simulator, TrialSummary};
use irs_swipt::{CorrelationKind, Execution, MomentPair, PhaseConfig, PhaseMode, SystemParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Metric, ModelFamily, SweepSpec};

/// Column order of the emitted CSV.
pub const HEADER: [&str; 13] = [
    "preset",
    "metric",
    "phase_mode",
    "correlation_model",
    "rho",
    "n_side",
    "m_elements",
    "analytic_value",
    "analytic_method",
    "mc_value",
    "mc_stderr",
    "trials",
    "seed",
];

/// Which closed form produced `analytic_value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalyticMethod {
    /// General-sum moments under random phases.
    Lemma1,
    /// General-sum moments under equal phases.
    Lemma2,
    /// Uniform-correlation closed-form moments.
    Corollary,
    /// Optimal-phase moments for identity or all-ones correlation.
    Optimal,
    /// Gamma moment matching.
    Thm2,
    Prop1,
    Prop2,
    Prop3,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub preset: String,
    pub metric: Metric,
    #[serde(with = "phase_mode_column")]
    pub phase_mode: PhaseMode,
    pub correlation_model: String,
    pub rho: Option<f64>,
    pub n_side: Option<usize>,
    pub m_elements: usize,
    pub analytic_value: Option<f64>,
    pub analytic_method: AnalyticMethod,
    pub mc_value: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

mod phase_mode_column {
    use irs_swipt::PhaseMode;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(mode: &PhaseMode, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(mode.as_str())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<PhaseMode, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("cell {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: irs_swipt::Error,
    },
}

/// One (phase mode, rho, N) point; every requested metric is read off the
/// same Monte Carlo run.
#[derive(Debug, Clone)]
struct Cell {
    mode: PhaseMode,
    rho: Option<f64>,
    n_side: Option<usize>,
    m: usize,
    model: CorrelationModel,
}

impl Cell {
    fn label(&self) -> String {
        let mut s = format!("{} {}", self.mode, self.model);
        if let Some(n) = self.n_side {
            s.push_str(&format!(" N={n}"));
        }
        s.push_str(&format!(" M={}", self.m));
        s
    }
}

fn cells(spec: &SweepSpec) -> Vec<Cell> {
    let rhos: Vec<Option<f64>> = if spec.correlation.uses_rho() {
        spec.rho_list.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    let sides: Vec<(Option<usize>, usize)> = match &spec.correlation {
        ModelFamily::Custom { dim, .. } => {
            let side = (*dim as f64).sqrt().round() as usize;
            vec![((side * side == *dim).then_some(side), *dim)]
        }
        _ => spec.n_side_list.iter().map(|&n| (Some(n), n * n)).collect(),
    };
    let mut out = Vec::new();
    for &mode in &spec.phase_modes {
        for &rho in &rhos {
            for &(n_side, m) in &sides {
                let model = spec.correlation.model(rho, n_side.unwrap_or(0));
                out.push(Cell {
                    mode,
                    rho,
                    n_side,
                    m,
                    model,
                });
            }
        }
    }
    out
}

fn optimal_correlation(kind: CorrelationKind) -> Option<OptimalCorrelation> {
    match kind {
        CorrelationKind::Uncorrelated => Some(OptimalCorrelation::Uncorrelated),
        CorrelationKind::FullyCorrelated => Some(OptimalCorrelation::FullyCorrelated),
        _ => None,
    }
}

/// Moments behind the energy line, with the result that produced them.
fn line_moments(
    cell: &Cell,
    r: &CorrelationMatrix,
) -> irs_swipt::Result<Option<(MomentPair, AnalyticMethod)>> {
    if cell.mode == PhaseMode::Optimal {
        return Ok(optimal_correlation(r.kind())
            .map(|c| (moments_optimal(cell.m, c), AnalyticMethod::Optimal)));
    }
    if let CorrelationModel::Uniform { rho } = cell.model {
        return Ok(Some((
            moments_uniform(cell.mode, cell.m, rho)?,
            AnalyticMethod::Corollary,
        )));
    }
    let method = match cell.mode {
        PhaseMode::Random => AnalyticMethod::Lemma1,
        _ => AnalyticMethod::Lemma2,
    };
    Ok(Some((analytic_moments(cell.mode, r)?, method)))
}

fn analytic(
    metric: Metric,
    cell: &Cell,
    r: &CorrelationMatrix,
    params: &SystemParams,
) -> irs_swipt::Result<(Option<f64>, AnalyticMethod)> {
    let moments = line_moments(cell, r)?;
    if metric == Metric::AvgEnergy {
        return Ok(match moments {
            Some((pair, method)) => (Some(average_harvested_energy(&pair, params)), method),
            None => (None, AnalyticMethod::None),
        });
    }
    let m = cell.m;
    let value = match (r.kind(), cell.mode) {
        (CorrelationKind::Uncorrelated, PhaseMode::Random | PhaseMode::Equal) => {
            (outage_uncorrelated_exact(m, params)?, AnalyticMethod::Prop1)
        }
        (CorrelationKind::FullyCorrelated, PhaseMode::Random) => {
            (outage_fullcorr_random(m, params)?, AnalyticMethod::Prop2)
        }
        (CorrelationKind::FullyCorrelated, _) => {
            (outage_fullcorr_equal(m, params)?, AnalyticMethod::Prop3)
        }
        _ => match moments {
            Some((pair, _)) => (outage_gamma_approx(&pair, params)?, AnalyticMethod::Thm2),
            None => return Ok((None, AnalyticMethod::None)),
        },
    };
    Ok((Some(value.0), value.1))
}

fn run_cell(spec: &SweepSpec, cell: &Cell) -> irs_swipt::Result<Vec<ResultRow>> {
    let r = build_matrix(&cell.model, cell.m)?;
    let has_closed_form =
        cell.mode != PhaseMode::Optimal || optimal_correlation(r.kind()).is_some();
    if !has_closed_form && (spec.optimal_boundary_only || spec.analytic_only) {
        return Ok(Vec::new());
    }
    let summary: Option<TrialSummary> = if spec.analytic_only {
        None
    } else {
        let sim = Simulator::new(PhaseConfig::from(cell.mode), &r)?;
        Some(sim.run(Some(&spec.params), spec.trials, spec.seed)?)
    };
    spec.metrics
        .iter()
        .map(|&metric| {
            let (analytic_value, analytic_method) = analytic(metric, cell, &r, &spec.params)?;
            let mc = summary.as_ref().map(|s| match metric {
                Metric::AvgEnergy => s.avg_energy(),
                Metric::Outage => s.outage(),
            });
            Ok(ResultRow {
                preset: spec.preset.clone(),
                metric,
                phase_mode: cell.mode,
                correlation_model: spec.correlation.name().to_string(),
                rho: cell.rho,
                n_side: cell.n_side,
                m_elements: cell.m,
                analytic_value,
                analytic_method,
                mc_value: mc.map(|e| e.value),
                mc_stderr: mc.map(|e| e.stderr),
                trials: mc.map(|e| e.trials),
                seed: mc.map(|e| e.seed),
            })
        })
        .collect()
}

fn row_order(a: &ResultRow, b: &ResultRow) -> Ordering {
    let rho = |r: &ResultRow| r.rho.unwrap_or(f64::NEG_INFINITY);
    a.metric
        .cmp(&b.metric)
        .then(a.phase_mode.cmp(&b.phase_mode))
        .then(rho(a).total_cmp(&rho(b)))
        .then(a.n_side.cmp(&b.n_side))
        .then(a.m_elements.cmp(&b.m_elements))
}

/// Runs every cell of the sweep concurrently and returns rows in
/// (metric, mode, rho, N) order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>, SweepError> {
    run_sweep_with(spec, Execution::default())
}

pub fn run_sweep_with(spec: &SweepSpec, exec: Execution) -> Result<Vec<ResultRow>, SweepError> {
    let cells = cells(spec);
    let results = exec.map_indexed(cells.len(), |i| run_cell(spec, &cells[i]));
    let mut rows = Vec::new();
    for (cell, result) in cells.iter().zip(results) {
        rows.extend(result.map_err(|source| SweepError::Cell {
            cell: cell.label(),
            source,
        })?);
    }
    rows.sort_by(row_order);
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> csv::Result<Vec<ResultRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
