//! CSV renderings of a report.
//!
//! Floats use Rust's shortest round-trip formatting. The accuracy column is
//! always present and left empty when no predictions were supplied.

use crate::kstar::Pattern;

use super::AnalysisReport;

fn to_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv of UTF-8 is UTF-8")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(super) fn classes_csv(report: &AnalysisReport) -> String {
    let mut rows = vec![[
        "class_id",
        "class_name",
        "n_samples",
        "mu",
        "sigma",
        "gamma",
        "pattern",
        "accuracy",
    ]
    .map(String::from)
    .to_vec()];
    for r in &report.per_class {
        rows.push(vec![
            r.class_id.to_string(),
            r.class_name.clone(),
            r.n_samples.to_string(),
            r.mu.to_string(),
            r.sigma.to_string(),
            r.gamma.to_string(),
            r.pattern.to_string(),
            opt(r.accuracy),
        ]);
    }
    to_string(rows)
}

/// One row per pattern, absent patterns included with `n_classes` 0, then an
/// `All` row over every class.
pub(super) fn summary_csv(report: &AnalysisReport) -> String {
    let mut rows = vec![[
        "pattern",
        "mean_mu",
        "mean_gamma",
        "mean_accuracy",
        "n_classes",
    ]
    .map(String::from)
    .to_vec()];
    for pattern in Pattern::ALL {
        match report
            .summary
            .patterns
            .iter()
            .find(|s| s.pattern == pattern)
        {
            Some(s) => rows.push(vec![
                pattern.to_string(),
                s.mean_mu.to_string(),
                s.mean_gamma.to_string(),
                opt(s.mean_accuracy),
                s.n_classes.to_string(),
            ]),
            None => rows.push(vec![
                pattern.to_string(),
                String::new(),
                String::new(),
                String::new(),
                "0".into(),
            ]),
        }
    }
    let o = &report.summary.overall;
    rows.push(vec![
        "All".into(),
        o.mean_mu.to_string(),
        o.mean_gamma.to_string(),
        opt(o.mean_accuracy),
        o.n_classes.to_string(),
    ]);
    to_string(rows)
}
