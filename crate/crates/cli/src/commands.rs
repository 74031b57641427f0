use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qdisorder::couplings::CouplingMatrix;
use qdisorder::disorder::Average;
use qdisorder::hopfield::{capacity_audit, hebbian_couplings, PatternSet};
use qdisorder::ion_chain::{
    mode_couplings, mode_patterns, normal_modes, solve_equilibrium, Equilibrium, IonChainSpectrum, SolverOptions,
    SpectrumDoc,
};
use qdisorder::qnn::{default_time_grid, ion_couplings, ion_number_sweep, pair_entanglement_series};
use qdisorder::sweep::{run_neighbor_decay, run_spin_glass_sweep, InvariantSummary};
use serde::{Deserialize, Serialize};

use crate::config::{read_json, AuditArgs, IonChainArgs, NeighborDecayArgs, QnnArgs, QnnSizesArgs, SweepArgs};
use crate::output::{num, write_csv, write_json};
use crate::Failure;

fn listing(paths: &[PathBuf]) -> String {
    paths.iter().map(|p| format!("wrote {}\n", p.display())).collect()
}

#[derive(Serialize)]
struct SweepSummary {
    sites: usize,
    bonds_used: usize,
    exterior_neighbors: usize,
    plateau: Average<f64>,
    final_quartile_sd: f64,
    maxima: Vec<(f64, f64)>,
    averaged_state_min_pt_eigenvalue: Option<f64>,
    invariants: Option<InvariantSummary>,
}

pub fn spin_glass_sweep(out: &Path, args: SweepArgs) -> Result<String, Failure> {
    let cfg = args.resolve()?;
    let r = run_spin_glass_sweep(&cfg)?;
    let rows = (0..r.times.len())
        .map(|k| vec![num(r.times[k]), num(r.mean[k]), num(r.stderr[k])])
        .collect();
    let mut paths = vec![write_csv(out, "spin_glass_sweep.csv", &["t", "mean_eln", "stderr"], rows)?];
    if let Some(pair) = &r.averaged_pair {
        let rows = (0..r.times.len())
            .map(|k| vec![num(r.times[k]), num(pair.eln[k]), num(pair.min_pt_eigenvalue[k])])
            .collect();
        paths.push(write_csv(
            out,
            "spin_glass_averaged_state.csv",
            &["t", "eln_of_averaged_state", "min_pt_eigenvalue"],
            rows,
        )?);
    }
    let summary = SweepSummary {
        sites: r.sites,
        bonds_used: r.bonds_used,
        exterior_neighbors: r.exterior_neighbors,
        plateau: r.plateau,
        final_quartile_sd: r.final_quartile_sd,
        maxima: r.maxima(),
        averaged_state_min_pt_eigenvalue: r
            .averaged_pair
            .as_ref()
            .map(|p| p.min_pt_eigenvalue.iter().cloned().fold(f64::INFINITY, f64::min)),
        invariants: r.invariants,
    };
    paths.push(write_json(out, "spin_glass_sweep.json", "spin-glass sweep", &cfg, &summary)?);
    let mut s = format!(
        "plateau {} ± {} over {} realizations ({} bonds, {} exterior neighbors)\n",
        num(r.plateau.mean),
        num(r.plateau.standard_error),
        cfg.realizations,
        r.bonds_used,
        r.exterior_neighbors
    );
    s.push_str(&listing(&paths));
    Ok(s)
}

pub fn neighbor_decay(out: &Path, args: NeighborDecayArgs) -> Result<String, Failure> {
    let cfg = args.resolve()?;
    let report = run_neighbor_decay(&cfg)?;
    let rows = report
        .rows
        .iter()
        .zip(&report.fit.residuals)
        .map(|(r, res)| {
            vec![
                format!("{:?}", r.kind).to_lowercase(),
                r.exterior_neighbors.to_string(),
                num(r.plateau.mean),
                num(r.plateau.standard_error),
                num(r.log_plateau),
                num(*res),
            ]
        })
        .collect();
    let paths = vec![
        write_csv(
            out,
            "neighbor_decay.csv",
            &["kind", "exterior_neighbors", "plateau", "stderr", "ln_plateau", "fit_residual"],
            rows,
        )?,
        write_json(out, "neighbor_decay.json", "spin-glass neighbor-decay", &cfg, &report)?,
    ];
    let mut s = String::new();
    for r in &report.rows {
        writeln!(s, "{:>3} neighbors: plateau {}", r.exterior_neighbors, num(r.plateau.mean)).unwrap();
    }
    writeln!(
        s,
        "ln(plateau) = {} + {} * count, R^2 = {}; strictly decreasing: {}",
        num(report.fit.intercept),
        num(report.fit.slope),
        num(report.fit.r_squared),
        report.strictly_decreasing
    )
    .unwrap();
    s.push_str(&listing(&paths));
    Ok(s)
}

/// Result section of the `ion-chain solve` report; read back by `nn audit`.
#[derive(Debug, Serialize, Deserialize)]
pub struct IonChainResult {
    pub equilibrium: Equilibrium<f64>,
    pub spectrum: SpectrumDoc<f64>,
    pub couplings: CouplingMatrix<f64>,
}

#[derive(Deserialize)]
struct ReportFile<R> {
    command: String,
    result: R,
}

pub fn ion_chain_solve(out: &Path, args: IonChainArgs) -> Result<String, Failure> {
    let cfg = args.resolve()?;
    let trap = cfg.trap()?;
    let eq = solve_equilibrium(&trap, &SolverOptions::default())?;
    let spectrum = normal_modes(&trap, &eq.positions, cfg.mode_policy)?;
    let couplings = mode_couplings(&spectrum, trap.force, trap.mass)?;
    let n = trap.n_ions;
    let doc = SpectrumDoc::from(&spectrum);
    let patterns = mode_patterns(&spectrum);

    let positions = (0..n).map(|i| vec![i.to_string(), num(eq.positions[i])]).collect();
    let modes = (0..n)
        .map(|m| {
            vec![
                m.to_string(),
                num(doc.squared_frequencies[m]),
                num(doc.frequencies[m]),
                doc.unstable_modes.contains(&m).to_string(),
                patterns.states()[m].to_signs(),
            ]
        })
        .collect();
    let mode_header: Vec<String> = std::iter::once("ion".to_string()).chain((0..n).map(|m| format!("mode{m}"))).collect();
    let mode_rows = (0..n)
        .map(|i| std::iter::once(i.to_string()).chain(doc.mode_matrix[i].iter().map(|v| num(*v))).collect())
        .collect();
    let coupling_header: Vec<String> = std::iter::once("ion".to_string()).chain((0..n).map(|j| format!("j{j}"))).collect();
    let coupling_rows = (0..n)
        .map(|i| std::iter::once(i.to_string()).chain((0..n).map(|j| num(couplings.get(i, j)))).collect())
        .collect();

    let result = IonChainResult { equilibrium: eq, spectrum: doc, couplings };
    let paths = vec![
        write_csv(out, "ion_chain_positions.csv", &["ion", "position"], positions)?,
        write_csv(out, "ion_chain_modes.csv", &["mode", "omega_squared", "omega", "unstable", "sign_pattern"], modes)?,
        write_csv(out, "ion_chain_mode_matrix.csv", &header_refs(&mode_header), mode_rows)?,
        write_csv(out, "ion_chain_couplings.csv", &header_refs(&coupling_header), coupling_rows)?,
        write_json(out, "ion_chain.json", "ion-chain solve", &cfg, &result)?,
    ];
    let mut s = format!(
        "{n} ions, extent [{}, {}], frequencies of modes 0-2: {}\n",
        num(result.equilibrium.positions[0]),
        num(result.equilibrium.positions[n - 1]),
        result.spectrum.frequencies.iter().take(3).map(|w| num(*w)).collect::<Vec<_>>().join(", ")
    );
    if !result.spectrum.unstable_modes.is_empty() {
        writeln!(
            s,
            "warning: stationary point is a saddle; negative-curvature modes {:?}",
            result.spectrum.unstable_modes
        )
        .unwrap();
    }
    s.push_str(&listing(&paths));
    Ok(s)
}

fn header_refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PatternsFile {
    List(Vec<Vec<i8>>),
    Set { patterns: Vec<Vec<i8>> },
}

pub fn nn_audit(out: &Path, args: AuditArgs) -> Result<String, Failure> {
    let cfg = args.resolve()?;
    let (couplings, candidates) = match (&cfg.from_ion_chain, &cfg.patterns) {
        (Some(path), _) => {
            let file: ReportFile<IonChainResult> = read_json(path)?;
            if file.command != "ion-chain solve" {
                return Err(Failure::Config(format!(
                    "{} was written by `{}`, not `ion-chain solve`",
                    path.display(),
                    file.command
                )));
            }
            let spectrum = IonChainSpectrum::try_from(file.result.spectrum)?;
            (file.result.couplings, mode_patterns(&spectrum))
        }
        (None, Some(path)) => {
            let patterns = match read_json::<PatternsFile>(path)? {
                PatternsFile::List(p) | PatternsFile::Set { patterns: p } => p,
            };
            if patterns.is_empty() {
                return Err(Failure::Config(format!("{}: no patterns", path.display())));
            }
            let set = PatternSet::new(patterns)?;
            (hebbian_couplings::<f64>(&set), set)
        }
        (None, None) => unreachable!("resolve requires a source"),
    };
    let report = capacity_audit(&couplings, &candidates, &cfg.options())?;
    let rows = report
        .candidates
        .iter()
        .flat_map(|c| {
            c.basin.iter().map(move |(k, f)| {
                vec![c.index.to_string(), c.stable.to_string(), k.to_string(), num(*f)]
            })
        })
        .collect();
    let paths = vec![
        write_csv(out, "nn_basins.csv", &["pattern", "stable", "flips", "recovery"], rows)?,
        write_json(out, "nn_audit.json", "nn audit", &cfg, &report)?,
    ];
    let mut s = report.table();
    s.push_str(&listing(&paths));
    Ok(s)
}

pub fn qnn_revivals(out: &Path, args: QnnArgs) -> Result<String, Failure> {
    let cfg = args.resolve()?;
    let trap = cfg.trap()?;
    let couplings = ion_couplings(&trap, cfg.mode_policy)?;
    let grid = default_time_grid(&couplings, cfg.span, cfg.points)?;
    let report = pair_entanglement_series(&trap, cfg.pair, cfg.bprime, Some(grid), cfg.mode_policy)?;
    let rows = report
        .time_grid
        .iter()
        .zip(&report.eln_series)
        .map(|(t, e)| vec![num(*t), num(t / report.time_scale), num(*e)])
        .collect();
    let paths = vec![
        write_csv(out, "qnn_revivals.csv", &["t", "jmax_t", "eln"], rows)?,
        write_json(out, "qnn_revivals.json", "qnn revivals", &cfg, &report)?,
    ];
    let mut s = format!(
        "pair {:?}: {} collapses, {} revivals (threshold {}, fraction {})\n",
        report.pair,
        report.collapses.len(),
        report.revivals.len(),
        report.collapse_threshold,
        report.revival_fraction
    );
    s.push_str(&listing(&paths));
    Ok(s)
}

#[derive(Serialize)]
struct SizeRow {
    n_ions: usize,
    pair: (usize, usize),
    peak_eln: f64,
    collapses: Vec<(f64, f64)>,
    revivals: Vec<f64>,
    time_scale: f64,
}

pub fn qnn_ion_number(out: &Path, args: QnnSizesArgs) -> Result<String, Failure> {
    let cfg = args.resolve()?;
    let reports = ion_number_sweep(&cfg.sizes, cfg.amplitude, cfg.exponent, cfg.mode_policy)?;
    let rows: Vec<SizeRow> = reports
        .into_iter()
        .map(|r| SizeRow {
            n_ions: r.n_ions,
            pair: r.pair,
            peak_eln: r.eln_series.iter().cloned().fold(0.0, f64::max),
            collapses: r.collapses,
            revivals: r.revivals,
            time_scale: r.time_scale,
        })
        .collect();
    let csv_rows = rows
        .iter()
        .map(|r| {
            vec![
                r.n_ions.to_string(),
                num(r.peak_eln),
                r.collapses.len().to_string(),
                r.revivals.len().to_string(),
                r.revivals.first().map_or(String::new(), |t| num(t / r.time_scale)),
            ]
        })
        .collect();
    let paths = vec![
        write_csv(
            out,
            "qnn_ion_number.csv",
            &["n_ions", "peak_eln", "collapses", "revivals", "first_revival_jmax_t"],
            csv_rows,
        )?,
        write_json(out, "qnn_ion_number.json", "qnn ion-number", &cfg, &rows)?,
    ];
    let mut s = String::new();
    for r in &rows {
        writeln!(s, "N = {:>2}: peak {}, {} collapses, {} revivals", r.n_ions, num(r.peak_eln), r.collapses.len(), r.revivals.len()).unwrap();
    }
    s.push_str(&listing(&paths));
    Ok(s)
}
