use std::fmt::Write as _;

use serde::Serialize;

/// Averages over an evaluation set: D-SARI of the system outputs, readability
/// of the complex inputs (`_c`) and of the outputs (`_s`), and the fraction of
/// outputs judged coherent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    pub d_sari_s: f64,
    pub fkgl_c: f64,
    pub fkgl_s: f64,
    pub fre_c: f64,
    pub fre_s: f64,
    pub coh_s: f64,
    pub n_samples: usize,
}

pub const REPORT_COLUMNS: [&str; 10] = [
    "Model", "Dataset", "Loss", "Setting", "D-SARI_S", "FKGL_C", "FKGL_S", "FRE_C", "FRE_S",
    "COH_S",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub model: String,
    pub dataset: String,
    pub loss: String,
    pub setting: String,
    pub metrics: MetricsReport,
}

impl ReportRow {
    pub fn cells(&self) -> [String; 10] {
        let m = &self.metrics;
        [
            self.model.clone(),
            self.dataset.clone(),
            self.loss.clone(),
            self.setting.clone(),
            format!("{:.3}", m.d_sari_s),
            format!("{:.3}", m.fkgl_c),
            format!("{:.3}", m.fkgl_s),
            format!("{:.3}", m.fre_c),
            format!("{:.3}", m.fre_s),
            format!("{:.3}", m.coh_s),
        ]
    }

    /// Tab-separated table with a header line. `extra` appends one column.
    pub fn to_tsv(rows: &[ReportRow], extra: Option<(&str, &[String])>) -> String {
        let mut out = String::new();
        let mut header: Vec<&str> = REPORT_COLUMNS.to_vec();
        if let Some((name, _)) = extra {
            header.push(name);
        }
        out.push_str(&header.join("\t"));
        out.push('\n');
        for (i, row) in rows.iter().enumerate() {
            let mut cells = row.cells().to_vec();
            if let Some((_, values)) = extra {
                cells.push(values.get(i).cloned().unwrap_or_default());
            }
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }

    /// Space-aligned plain-text table; text columns left-aligned, numbers right-aligned.
    pub fn to_table(rows: &[ReportRow], extra: Option<(&str, &[String])>) -> String {
        let mut header: Vec<String> = REPORT_COLUMNS.iter().map(|s| s.to_string()).collect();
        if let Some((name, _)) = extra {
            header.push(name.to_string());
        }
        let body: Vec<Vec<String>> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut cells = r.cells().to_vec();
                if let Some((_, values)) = extra {
                    cells.push(values.get(i).cloned().unwrap_or_default());
                }
                cells
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|c| {
                body.iter()
                    .map(|r| r[c].chars().count())
                    .chain(std::iter::once(header[c].chars().count()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        for line in std::iter::once(&header).chain(body.iter()) {
            let mut cells = Vec::with_capacity(line.len());
            for (c, cell) in line.iter().enumerate() {
                if (4..10).contains(&c) {
                    cells.push(format!("{cell:>w$}", w = widths[c]));
                } else {
                    cells.push(format!("{cell:<w$}", w = widths[c]));
                }
            }
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        out
    }
}
