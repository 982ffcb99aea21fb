use std::fmt::Write as _;

use mfpt::model::{critical_coupling, solve_gap_with, PRINTED_GROUND_CRITICAL_COUPLING};
use mfpt::oracle::{diagonalize, BasisConfig};
use mfpt::resum::{borel_sum_with, optimal_truncation, BorelConfig, SummationResult};
use mfpt::scalar::rational_to_f64;
use mfpt::series::{certified_corrections, compute_corrections, CorrectionSeries};
use mfpt::table::{reproduce_table, TableOptions, TableRow};
use mfpt::{Execution, OscillatorKind, OscillatorSpec, Precision, Result};
use serde_json::{json, Value};

use crate::output::{fixed, opt, Document};
use crate::{Method, OracleArgs, Resummation, SeriesArgs, SolveArgs, SweepArgs, System, TableArgs};

/// Orders used to estimate the Borel radius when none is given.
const ESTIMATE_ORDERS: usize = 40;

fn precision(digits: u32) -> Precision {
    Precision {
        digits,
        allow_exact: true,
    }
}

fn spec_of(system: &System) -> Result<OscillatorSpec> {
    OscillatorSpec::new(system.kind, system.g.clone(), system.n)
}

fn depth_for(resum: &Resummation, orders: usize) -> usize {
    let mut depth = orders;
    if resum.method != Method::Mot {
        depth = depth.max(resum.nc as usize);
        if resum.rc.is_none() {
            depth = depth.max(ESTIMATE_ORDERS);
        }
    }
    depth
}

struct Resummed {
    mot: Option<SummationResult>,
    borel: Option<SummationResult>,
    estimated: bool,
}

fn resum(
    series: &CorrectionSeries,
    shown: &CorrectionSeries,
    r: &Resummation,
    exec: Execution,
) -> Result<Resummed> {
    let mot = match r.method {
        Method::Borel => None,
        _ => Some(optimal_truncation(shown)?),
    };
    let mut estimated = false;
    let borel = match r.method {
        Method::Mot => None,
        _ => {
            let gamma = r
                .gamma
                .clone()
                .unwrap_or_else(|| series.spec.kind.default_gamma());
            let nc = r.nc as usize;
            let mut cfg = match r.rc {
                Some(rc) => BorelConfig::new(gamma, rc, nc),
                None => {
                    estimated = true;
                    BorelConfig::estimated(series, gamma, nc)?.0
                }
            };
            cfg.epsilon = r.epsilon;
            Some(borel_sum_with(series, &cfg, exec)?)
        }
    };
    Ok(Resummed {
        mot,
        borel,
        estimated,
    })
}

fn borel_json(b: &SummationResult, estimated: bool) -> Value {
    let mut v = b.to_json();
    v["r_c_estimated"] = json!(estimated);
    v["partial_sums"] = json!(b.partial_sums);
    v
}

pub fn solve(a: &SolveArgs) -> Result<Document> {
    let spec = spec_of(&a.system)?;
    let mf = solve_gap_with(&spec, precision(a.common.precision))?;
    let orders = a.orders as usize;
    let series = compute_corrections(&spec, &mf, depth_for(&a.resum, orders))?;
    let shown = series.truncated(orders);
    let r = resum(&series, &shown, &a.resum, Execution::default())?;

    let mut doc = json!({
        "kind": spec.kind,
        "g": spec.g().to_string(),
        "n": spec.level(),
        "xi": spec.xi().to_string(),
        "mode": shown.mode(),
        "mean_field": {
            "omega": mf.omega.to_json_string(),
            "h0": mf.h0.to_json_string(),
            "sigma": mf.sigma.to_json_string(),
            "E0": mf.e0.to_json_string(),
            "phase": mf.phase,
        },
        "corrections": shown.to_json(),
        "mot": r.mot.as_ref().map(SummationResult::to_json),
        "borel": r.borel.as_ref().map(|b| borel_json(b, r.estimated)),
    });
    if spec.kind == OscillatorKind::Qdwo {
        doc["critical_coupling"] = json!({
            "computed": critical_coupling(spec.level()),
            "printed_ground_state": PRINTED_GROUND_CRITICAL_COUPLING,
        });
        doc["well_offset"] = json!(spec.well_offset().to_string());
    }

    let mut text = String::new();
    let _ = writeln!(text, "{} g={} n={}", spec.kind, spec.g(), spec.level());
    let _ = writeln!(text, "omega  {}", short(&mf.omega));
    let _ = writeln!(text, "h0     {}", short(&mf.h0));
    let _ = writeln!(text, "E0     {}", short(&mf.e0));
    for (k, e) in shown.corrections().iter().enumerate().skip(1) {
        let _ = writeln!(text, "E{k:<5} {}", short(e));
    }
    if let Some(m) = &r.mot {
        let _ = writeln!(text, "optimal truncation: N0={} E={:.8}", m.n, m.e_tot);
    }
    if let Some(b) = &r.borel {
        let _ = writeln!(
            text,
            "borel: gamma={} r_c={:.6}{} N_c={} delta_E={:.8} E_tot={:.8} converged={}",
            b.gamma.unwrap_or(f64::NAN),
            b.r_c.unwrap_or(f64::NAN),
            if r.estimated { " (estimated)" } else { "" },
            b.n,
            b.delta_e,
            b.e_tot,
            b.converged
        );
    }

    let csv = vec![
        [
            "kind",
            "g",
            "n",
            "E0",
            "N0",
            "E_MOT",
            "gamma",
            "r_c",
            "N_c",
            "delta_E",
            "E_tot",
            "converged",
        ]
        .map(String::from)
        .to_vec(),
        vec![
            spec.kind.to_string(),
            spec.g().to_string(),
            spec.level().to_string(),
            mf.e0.to_f64().to_string(),
            r.mot.as_ref().map_or(String::new(), |m| m.n.to_string()),
            opt(r.mot.as_ref().map(|m| m.e_tot)),
            opt(r.borel.as_ref().and_then(|b| b.gamma)),
            opt(r.borel.as_ref().and_then(|b| b.r_c)),
            r.borel.as_ref().map_or(String::new(), |b| b.n.to_string()),
            opt(r.borel.as_ref().map(|b| b.delta_e)),
            opt(r.borel.as_ref().map(|b| b.e_tot)),
            r.borel
                .as_ref()
                .map_or(String::new(), |b| b.converged.to_string()),
        ],
    ];
    Ok(Document {
        json: doc,
        csv,
        text,
    })
}

fn short(s: &mfpt::Scalar) -> String {
    match s.as_rational() {
        Some(q) => format!("{q} ({:.12})", rational_to_f64(q)),
        None => format!("{:.20e}", s.to_f64()),
    }
}

pub fn series(a: &SeriesArgs) -> Result<Document> {
    let spec = spec_of(&a.system)?;
    let orders = a.orders as usize;
    let (series, certified) = if a.certify {
        let (s, digits) = certified_corrections(&spec, orders, a.common.precision)?;
        (s, Some(digits))
    } else {
        let mf = solve_gap_with(&spec, precision(a.common.precision))?;
        (compute_corrections(&spec, &mf, orders)?, None)
    };
    let mut json = series.to_json();
    if let Some(d) = &certified {
        json = json!({ "series": json, "certified_digits": d });
    }
    let mut csv = vec![vec!["order".to_string(), "value".to_string()]];
    let mut text = String::new();
    for (k, e) in series.corrections().iter().enumerate() {
        csv.push(vec![k.to_string(), e.to_json_string()]);
        let _ = write!(text, "E{k} = {}", e.to_json_string());
        if let Some(d) = &certified {
            let _ = write!(text, "  [{:.0} digits]", d[k]);
        }
        text.push('\n');
    }
    Ok(Document { json, csv, text })
}

const TABLE_COLUMNS: [&str; 11] = [
    "g",
    "N0",
    "E_MOT",
    "Er_MOT(%)",
    "r_c",
    "N_c",
    "delta_E",
    "E0",
    "E_tot",
    "Exact",
    "Er_tot(%)",
];

fn computed_cell(row: &TableRow, column: &str) -> String {
    let cell = row.cell(column).expect("known column");
    match (column, cell.computed) {
        ("g" | "r_c" | "N_c", _) => cell.printed.clone(),
        ("N0", Some(v)) => format!("{v:.0}"),
        (c, Some(v)) if c.starts_with("Er") => format!("{v:.4}"),
        (_, Some(v)) => format!("{v:.6}"),
        (_, None) => String::new(),
    }
}

pub fn table1(a: &TableArgs) -> Result<Document> {
    let opts = TableOptions {
        precision: precision(a.common.precision),
        epsilon: a.epsilon,
        basis: BasisConfig::with_size(a.basis),
        exec: Execution::default(),
    };
    let rows = reproduce_table(&opts);

    let json = serde_json::to_value(&rows).expect("table serializes");
    let mut header = vec!["kind".to_string(), "source".to_string()];
    header.extend(TABLE_COLUMNS.iter().map(|c| c.to_string()));
    header.push("gamma".into());
    header.push("flags".into());
    let mut csv = vec![header];
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:<5} {:<8} {:>7} {:>3} {:>9} {:>9} {:>6} {:>3} {:>10} {:>9} {:>9} {:>9} {:>9}",
        "kind",
        "source",
        "g",
        "N0",
        "E_MOT",
        "Er(%)",
        "r_c",
        "N_c",
        "dE",
        "E0",
        "E_tot",
        "Exact",
        "Er(%)"
    );
    for row in &rows {
        let flags = row.failed_cells().join(" ");
        let printed: Vec<String> = TABLE_COLUMNS
            .iter()
            .map(|c| row.cell(c).unwrap().printed.clone())
            .collect();
        let computed: Vec<String> = TABLE_COLUMNS
            .iter()
            .map(|c| computed_cell(row, c))
            .collect();
        for (source, cells) in [("printed", &printed), ("computed", &computed)] {
            let mut line = vec![row.kind.to_string(), source.to_string()];
            line.extend(cells.iter().cloned());
            line.push(row.gamma.to_string());
            line.push(if source == "computed" {
                flags.clone()
            } else {
                String::new()
            });
            csv.push(line);
            let mark = |c: &str| {
                if source == "computed" && row.cell(c).and_then(|x| x.ok) == Some(false) {
                    "!"
                } else {
                    " "
                }
            };
            let _ = writeln!(
                text,
                "{:<5} {:<8} {:>7} {:>3}{} {:>9}{} {:>9} {:>6} {:>3} {:>10}{} {:>9}{} {:>9}{} {:>9}{} {:>9}",
                row.kind.to_string(),
                source,
                cells[0],
                cells[1],
                mark("N0"),
                cells[2],
                mark("E_MOT"),
                cells[3],
                cells[4],
                cells[5],
                cells[6],
                mark("delta_E"),
                cells[7],
                mark("E0"),
                cells[8],
                mark("E_tot"),
                cells[9],
                mark("Exact"),
                cells[10]
            );
        }
        if !row.errors.is_empty() {
            let _ = writeln!(text, "      errors: {}", row.errors.join("; "));
        }
        if let Some(cell) = row.cell("E_tot(printed)") {
            if cell.ok == Some(false) {
                let _ = writeln!(
                    text,
                    "      printed E_tot {} disagrees with the computed value",
                    cell.printed
                );
            }
        }
    }
    let _ = writeln!(
        text,
        "double-well energies include the well-bottom offset 1/(16g); '!' marks a cell outside tolerance"
    );
    Ok(Document { json, csv, text })
}

struct SweepRow {
    g: f64,
    e0: Option<f64>,
    e_mot: Option<f64>,
    e_tot: Option<f64>,
    exact: Option<f64>,
    errors: Vec<String>,
}

fn sweep_point(a: &SweepArgs, g: f64) -> SweepRow {
    let mut row = SweepRow {
        g,
        e0: None,
        e_mot: None,
        e_tot: None,
        exact: None,
        errors: Vec::new(),
    };
    let spec = match OscillatorSpec::from_f64(a.kind, g, a.n) {
        Ok(s) => s,
        Err(e) => {
            row.errors.push(e.to_string());
            return row;
        }
    };
    match diagonalize(&spec, &BasisConfig::with_size(a.basis)) {
        Ok(o) => row.exact = Some(o.energy),
        Err(e) => row.errors.push(format!("oracle: {e}")),
    }
    let series = solve_gap_with(&spec, precision(a.common.precision))
        .and_then(|mf| compute_corrections(&spec, &mf, depth_for(&a.resum, a.orders as usize)));
    let series = match series {
        Ok(s) => s,
        Err(e) => {
            row.errors.push(e.to_string());
            return row;
        }
    };
    row.e0 = Some(series.e0().to_f64());
    let shown = series.truncated(a.orders as usize);
    let mut only = a.resum.clone();
    only.method = Method::Mot;
    match resum(&series, &shown, &only, Execution::Sequential) {
        Ok(r) => row.e_mot = r.mot.map(|m| m.e_tot),
        Err(e) => row.errors.push(format!("truncation: {e}")),
    }
    only.method = Method::Borel;
    match resum(&series, &shown, &only, Execution::Sequential) {
        Ok(r) => row.e_tot = r.borel.map(|b| b.e_tot),
        Err(e) => row.errors.push(format!("borel: {e}")),
    }
    row
}

pub fn sweep(a: &SweepArgs) -> Result<Document> {
    let points = a.g_grid.points();
    let rows = Execution::default().map(&points, |&g| sweep_point(a, g));
    let mut csv = vec![["g", "E0", "E_MOT", "E_tot", "E_exact"]
        .map(String::from)
        .to_vec()];
    let mut text = format!(
        "{:>12} {:>12} {:>12} {:>12} {:>12}\n",
        "g", "E0", "E_MOT", "E_tot", "E_exact"
    );
    let mut json_rows = Vec::new();
    for r in &rows {
        for e in &r.errors {
            eprintln!("warning: g={}: {e}", r.g);
        }
        csv.push(vec![
            r.g.to_string(),
            opt(r.e0),
            opt(r.e_mot),
            opt(r.e_tot),
            opt(r.exact),
        ]);
        let _ = writeln!(
            text,
            "{:>12} {:>12} {:>12} {:>12} {:>12}",
            format!("{:.6}", r.g),
            fixed(r.e0, 8),
            fixed(r.e_mot, 8),
            fixed(r.e_tot, 8),
            fixed(r.exact, 8)
        );
        json_rows.push(json!({
            "g": r.g, "E0": r.e0, "E_MOT": r.e_mot, "E_tot": r.e_tot, "E_exact": r.exact, "errors": r.errors,
        }));
    }
    Ok(Document {
        json: json!({ "kind": a.kind, "n": a.n, "rows": json_rows }),
        csv,
        text,
    })
}

pub fn oracle(a: &OracleArgs) -> Result<Document> {
    let spec = spec_of(&a.system)?;
    let basis = BasisConfig {
        omega: a.basis_omega,
        ..BasisConfig::with_size(a.basis)
    };
    let r = diagonalize(&spec, &basis)?;
    let mut json = serde_json::to_value(&r).expect("oracle result serializes");
    let mut text = format!(
        "{} g={} n={}: E = {:.10}\n",
        spec.kind,
        spec.g(),
        spec.level(),
        r.energy
    );
    if spec.kind == OscillatorKind::Qdwo {
        let offset = rational_to_f64(&spec.well_offset());
        json["well_offset"] = json!(offset);
        json["energy_from_well_bottom"] = json!(r.energy + offset);
        let _ = writeln!(
            text,
            "from the bottom of the wells: {:.10}",
            r.energy + offset
        );
    }
    let _ = writeln!(
        text,
        "basis: {} states at omega = {}",
        r.basis_size, r.basis_omega
    );
    let csv = vec![
        ["kind", "g", "n", "energy", "basis_size", "basis_omega"]
            .map(String::from)
            .to_vec(),
        vec![
            spec.kind.to_string(),
            spec.g().to_string(),
            spec.level().to_string(),
            r.energy.to_string(),
            r.basis_size.to_string(),
            r.basis_omega.to_string(),
        ],
    ];
    Ok(Document { json, csv, text })
}
