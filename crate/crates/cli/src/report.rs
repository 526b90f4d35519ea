//! CSV rows and the plain-text summary table.

use shelter_core::experiment::{Metric, ResourceSummary};
use shelter_core::ScenarioSummary;

pub const CSV_HEADER: [&str; 10] = [
    "kind",
    "name",
    "capacity",
    "avg_wait_days",
    "max_wait_days",
    "utilization",
    "pct_reneged",
    "ci_halfwidth_wait",
    "count_mean",
    "count_ci_halfwidth",
];

fn fixed(x: Option<f64>, places: usize) -> String {
    x.map(|v| format!("{v:.places$}")).unwrap_or_default()
}

fn mean(m: &Option<Metric>) -> Option<f64> {
    m.as_ref().map(|m| m.mean)
}

fn resource_row(r: &ResourceSummary) -> Vec<String> {
    vec![
        "resource".into(),
        r.name.clone(),
        r.capacity.to_string(),
        fixed(mean(&r.avg_wait), 2),
        fixed(r.max_wait, 2),
        fixed(mean(&r.utilization).map(|u| 100.0 * u), 1),
        fixed(mean(&r.renege_pct), 1),
        fixed(r.avg_wait.as_ref().and_then(|m| m.half_width), 2),
        String::new(),
        String::new(),
    ]
}

fn flow_rows(s: &ScenarioSummary) -> Vec<Vec<String>> {
    let f = &s.flow;
    [
        ("arrivals", &f.arrivals),
        ("served", &f.served_then_left),
        ("left_unserved", &f.left_unserved),
        ("bed_renege_exit", &f.bed_renege_exit),
        ("bed_renege_stayed", &f.bed_renege_stayed),
    ]
    .into_iter()
    .map(|(name, m)| {
        let mut row = vec![String::new(); CSV_HEADER.len()];
        row[0] = "flow".into();
        row[1] = name.into();
        row[8] = format!("{:.1}", m.mean);
        row[9] = fixed(m.half_width, 1);
        row
    })
    .collect()
}

/// Resource rows (bed first) followed by the youth-flow rows.
pub fn scenario_rows(s: &ScenarioSummary) -> Vec<Vec<String>> {
    s.resources
        .iter()
        .map(resource_row)
        .chain(flow_rows(s))
        .collect()
}

pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> csv::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

fn aligned(rows: &[Vec<String>], right: &[bool]) -> String {
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .zip(right)
            .map(|((cell, &w), &r)| {
                if r {
                    format!("{cell:>w$}")
                } else {
                    format!("{cell:<w$}")
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn cell(x: Option<f64>, places: usize, suffix: &str) -> String {
    x.map(|v| format!("{v:.places$}{suffix}"))
        .unwrap_or_else(|| "-".into())
}

/// Resource table in the usual report layout, then flow counts.
pub fn text_table(s: &ScenarioSummary) -> String {
    let mut rows = vec![[
        "Resource",
        "Capacity",
        "Avg wait (d)",
        "Max wait (d)",
        "Utilization",
        "Reneged",
    ]
    .map(String::from)
    .to_vec()];
    for r in &s.resources {
        rows.push(vec![
            r.name.clone(),
            r.capacity.to_string(),
            cell(mean(&r.avg_wait), 2, ""),
            cell(r.max_wait, 2, ""),
            cell(mean(&r.utilization).map(|u| 100.0 * u), 1, "%"),
            cell(mean(&r.renege_pct), 1, "%"),
        ]);
    }
    let mut out = aligned(&rows, &[false, true, true, true, true, true]);
    let f = &s.flow;
    out.push_str(&format!(
        "\nYouth in the statistics window, mean of {} replications: {:.1} arrived, {:.1} served, {:.1} left unserved, \
         {:.1} left after a bed renege, {:.1} stayed for services only\n",
        s.replications,
        f.arrivals.mean,
        f.served_then_left.mean,
        f.left_unserved.mean,
        f.bed_renege_exit.mean,
        f.bed_renege_stayed.mean,
    ));
    out
}
