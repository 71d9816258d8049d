use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{ExperimentError, ExperimentRecord, Model, SolverKind};

pub const RECORD_HEADER: [&str; 19] = [
    "model",
    "i_target",
    "i_actual",
    "q",
    "mu_dbm",
    "realization",
    "solver",
    "interference_links",
    "zero_interference",
    "cost",
    "avg_degree",
    "degree_std",
    "delta",
    "sp_iterations",
    "sp_restarts",
    "fallback_used",
    "runtime_ms",
    "seed",
    "graph_hash",
];

pub const SUMMARY_HEADER: [&str; 11] = [
    "model",
    "i_target",
    "q",
    "mu_dbm",
    "solver",
    "z",
    "zero_rate_pct",
    "mean_conflicts",
    "std_conflicts",
    "mean_degree",
    "mean_delta",
];

/// Per cell and solver statistics over realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model: Model,
    pub i_target: usize,
    pub q: usize,
    pub mu_dbm: Option<f64>,
    pub solver: SolverKind,
    pub z: usize,
    pub zero_rate_pct: f64,
    pub mean_conflicts: f64,
    /// Population standard deviation.
    pub std_conflicts: f64,
    pub mean_degree: f64,
    pub mean_delta: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Group by `(model, I, Q, mu, solver)` in order of first appearance.
pub fn aggregate(records: &[ExperimentRecord]) -> Result<Vec<SummaryRow>, ExperimentError> {
    if records.is_empty() {
        return Err(ExperimentError::Empty);
    }
    type Key = (Model, usize, usize, Option<u64>, SolverKind);
    let mut order: Vec<Key> = Vec::new();
    let mut groups: HashMap<Key, Vec<&ExperimentRecord>> = HashMap::new();
    for r in records {
        let key = (r.model, r.i_target, r.q, r.mu_dbm.map(f64::to_bits), r.solver);
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r);
    }
    Ok(order
        .into_iter()
        .map(|key| {
            let rs = &groups[&key];
            let z = rs.len() as f64;
            let conflicts: Vec<f64> = rs.iter().map(|r| r.interference_links as f64).collect();
            let mean = conflicts.iter().sum::<f64>() / z;
            let var = conflicts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / z;
            let zeros = rs.iter().filter(|r| r.zero_interference).count() as f64;
            let deltas: Option<Vec<f64>> = rs.iter().map(|r| r.delta).collect();
            SummaryRow {
                model: key.0,
                i_target: key.1,
                q: key.2,
                mu_dbm: rs[0].mu_dbm,
                solver: key.4,
                z: rs.len(),
                zero_rate_pct: 100.0 * zeros / z,
                mean_conflicts: mean,
                std_conflicts: var.sqrt(),
                mean_degree: rs.iter().map(|r| r.avg_degree).sum::<f64>() / z,
                mean_delta: deltas.map(|d| d.iter().sum::<f64>() / z),
            }
        })
        .collect())
}

fn to_csv<I>(header: &[&str], rows: I) -> Result<String, ExperimentError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn records_csv(records: &[ExperimentRecord]) -> Result<String, ExperimentError> {
    to_csv(
        &RECORD_HEADER,
        records.iter().map(|r| {
            vec![
                r.model.to_string(),
                r.i_target.to_string(),
                r.i_actual.to_string(),
                r.q.to_string(),
                opt(r.mu_dbm),
                r.realization.to_string(),
                r.solver.to_string(),
                r.interference_links.to_string(),
                bit(r.zero_interference).to_string(),
                r.cost.to_string(),
                r.avg_degree.to_string(),
                r.degree_std.to_string(),
                opt(r.delta),
                r.sp_iterations.to_string(),
                r.sp_restarts.to_string(),
                bit(r.fallback_used).to_string(),
                format!("{:.3}", r.runtime_ms),
                r.seed.to_string(),
                r.graph_hash.clone(),
            ]
        }),
    )
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<String, ExperimentError> {
    to_csv(
        &SUMMARY_HEADER,
        rows.iter().map(|s| {
            vec![
                s.model.to_string(),
                s.i_target.to_string(),
                s.q.to_string(),
                opt(s.mu_dbm),
                s.solver.to_string(),
                s.z.to_string(),
                s.zero_rate_pct.to_string(),
                s.mean_conflicts.to_string(),
                s.std_conflicts.to_string(),
                s.mean_degree.to_string(),
                opt(s.mean_delta),
            ]
        }),
    )
}

fn distinct<T: PartialEq + Copy>(it: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for x in it {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Gnuplot script over `summary.csv`: zero-interference rate and mean
/// conflicts against `I` for every `Q`, and mean conflicts against `Q` for
/// every `I`. One curve per solver.
pub fn figures_script(rows: &[SummaryRow]) -> String {
    let solvers = distinct(rows.iter().map(|r| r.solver));
    let qs = distinct(rows.iter().map(|r| r.q));
    let is = distinct(rows.iter().map(|r| r.i_target));
    let names = solvers.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" ");
    let xlabel = match rows.first().map(|r| r.model) {
        Some(Model::Geometric) => "mean stations (lambda)",
        _ => "stations I",
    };
    let mut s = String::new();
    s.push_str("# generated by spinalloc; run with: gnuplot figures.gp\n");
    s.push_str("set datafile separator ','\nset terminal pngcairo size 900,600\nset key outside right\nset grid\n");
    let _ = writeln!(s, "solvers = \"{names}\"");
    for &q in &qs {
        let _ = writeln!(
            s,
            "\nset output 'zero_rate_q{q}.png'\nset title 'Q = {q}'\nset xlabel '{xlabel}'\nset ylabel 'zero-interference allocations (%)'\n\
             plot for [sv in solvers] 'summary.csv' every ::1 using ((strcol(5) eq sv && $3 == {q}) ? $2 : NaN):7 with linespoints title sv"
        );
        let _ = writeln!(
            s,
            "\nset output 'conflicts_vs_i_q{q}.png'\nset title 'Q = {q}'\nset xlabel '{xlabel}'\nset ylabel 'mean interference links'\n\
             plot for [sv in solvers] 'summary.csv' every ::1 using ((strcol(5) eq sv && $3 == {q}) ? $2 : NaN):8 with linespoints title sv"
        );
    }
    for &i in &is {
        let _ = writeln!(
            s,
            "\nset output 'conflicts_vs_q_i{i}.png'\nset title '{xlabel} = {i}'\nset xlabel 'pools Q'\nset ylabel 'mean interference links'\n\
             plot for [sv in solvers] 'summary.csv' every ::1 using ((strcol(5) eq sv && $2 == {i}) ? $3 : NaN):8 with linespoints title sv"
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFiles {
    pub records: PathBuf,
    pub summary: PathBuf,
    pub figures: PathBuf,
}

/// Write `records.csv`, `summary.csv` and `figures.gp` into `out_dir`.
/// Nothing is written for an empty record set.
pub fn emit_outputs(records: &[ExperimentRecord], summary: &[SummaryRow], out_dir: &Path) -> Result<OutputFiles, ExperimentError> {
    if records.is_empty() || summary.is_empty() {
        return Err(ExperimentError::Empty);
    }
    let rec = records_csv(records)?;
    let sum = summary_csv(summary)?;
    fs::create_dir_all(out_dir)?;
    let files = OutputFiles {
        records: out_dir.join("records.csv"),
        summary: out_dir.join("summary.csv"),
        figures: out_dir.join("figures.gp"),
    };
    fs::write(&files.records, rec)?;
    fs::write(&files.summary, sum)?;
    fs::write(&files.figures, figures_script(summary))?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(solver: SolverKind, links: usize, r: usize) -> ExperimentRecord {
        ExperimentRecord {
            model: Model::Er,
            i_target: 10,
            i_actual: 10,
            q: 3,
            mu_dbm: None,
            realization: r,
            solver,
            interference_links: links,
            zero_interference: links == 0,
            cost: links,
            avg_degree: 4.0,
            degree_std: 1.0,
            delta: None,
            sp_iterations: 0,
            sp_restarts: 0,
            fallback_used: false,
            runtime_ms: 0.5,
            seed: 1,
            graph_hash: "ab".into(),
        }
    }

    #[test]
    fn two_records_aggregate() {
        let rows = aggregate(&[rec(SolverKind::Mnf, 0, 0), rec(SolverKind::Mnf, 2, 1)]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mean_conflicts, 1.0);
        assert_eq!(rows[0].zero_rate_pct, 50.0);
        assert_eq!(rows[0].std_conflicts, 1.0);
        assert_eq!(rows[0].z, 2);
    }

    #[test]
    fn single_record_is_identity() {
        let rows = aggregate(&[rec(SolverKind::Sp, 3, 0)]).unwrap();
        assert_eq!((rows[0].mean_conflicts, rows[0].std_conflicts, rows[0].zero_rate_pct), (3.0, 0.0, 0.0));
        assert_eq!(rows[0].mean_degree, 4.0);
    }

    #[test]
    fn one_row_per_solver() {
        let rs = [rec(SolverKind::Sp, 0, 0), rec(SolverKind::Random, 1, 0), rec(SolverKind::Sp, 0, 1), rec(SolverKind::Random, 0, 1)];
        let rows = aggregate(&rs).unwrap();
        assert_eq!(rows.iter().map(|r| r.solver).collect::<Vec<_>>(), vec![SolverKind::Sp, SolverKind::Random]);
        assert_eq!(rows[1].zero_rate_pct, 50.0);
    }

    #[test]
    fn empty_guard_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        assert!(matches!(aggregate(&[]), Err(ExperimentError::Empty)));
        assert!(matches!(emit_outputs(&[], &[], &out), Err(ExperimentError::Empty)));
        assert!(!out.exists());
    }

    #[test]
    fn csv_layout() {
        let rs = [rec(SolverKind::Mnf, 0, 0), rec(SolverKind::Mnf, 1, 1)];
        let text = records_csv(&rs).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], RECORD_HEADER.join(","));
        assert_eq!(lines[1], "er,10,10,3,,0,mnf,0,1,0,4,1,,0,0,0,0.500,1,ab");
        assert!(!text.contains('\r'));
        let rows = aggregate(&rs).unwrap();
        assert_eq!(summary_csv(&rows).unwrap(), format!("{}\ner,10,3,,mnf,2,50,0.5,0.5,4,\n", SUMMARY_HEADER.join(",")));
    }

    #[test]
    fn script_mentions_every_panel() {
        let rows = aggregate(&[rec(SolverKind::Sp, 0, 0), rec(SolverKind::Bp, 0, 0)]).unwrap();
        let gp = figures_script(&rows);
        assert!(gp.contains("solvers = \"sp bp\""));
        assert!(gp.contains("zero_rate_q3.png") && gp.contains("conflicts_vs_i_q3.png") && gp.contains("conflicts_vs_q_i10.png"));
    }
}
