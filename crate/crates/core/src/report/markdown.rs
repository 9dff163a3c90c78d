//! Markdown tables: one row per class, then per-pattern averages.
//!
//! Statistics are printed with two decimals, accuracy as a percentage. The
//! accuracy column appears only when the report carries accuracies.

use std::fmt::Write;

use crate::kstar::Pattern;

use super::{AnalysisReport, Comparison};

const ABSENT: &str = "---";

fn escape(cell: &str) -> String {
    cell.replace('\\', "\\\\")
        .replace('|', "\\|")
        .replace('\n', " ")
}

fn percent(v: Option<f64>) -> String {
    v.map_or_else(|| ABSENT.to_string(), |a| format!("{:.2}", 100.0 * a))
}

fn pattern_label(p: Pattern) -> String {
    format!("{} {} ({})", p.glyph(), p, p.letter())
}

pub(super) fn report(r: &AnalysisReport) -> String {
    let acc = r.has_accuracy();
    let mut out = String::new();
    let src = &r.source;
    writeln!(out, "# k* analysis: {}", escape(&src.input)).unwrap();
    writeln!(out).unwrap();
    writeln!(
        out,
        "n = {}, d = {}, C = {}, metric `{}`.",
        src.n_samples, src.dim, src.n_classes, src.metric
    )
    .unwrap();
    writeln!(out).unwrap();

    writeln!(out, "## Classes").unwrap();
    writeln!(out).unwrap();
    if acc {
        writeln!(
            out,
            "| Class | N | μ_k* | σ_k* | γ_k* | Acc (%) | Pattern |"
        )
        .unwrap();
        writeln!(out, "|---|---:|---:|---:|---:|---:|:---:|").unwrap();
    } else {
        writeln!(out, "| Class | N | μ_k* | σ_k* | γ_k* | Pattern |").unwrap();
        writeln!(out, "|---|---:|---:|---:|---:|:---:|").unwrap();
    }
    for row in &r.per_class {
        write!(
            out,
            "| {} | {} | {:.2} | {:.2} | {:.2} |",
            escape(&row.class_name),
            row.n_samples,
            row.mu,
            row.sigma,
            row.gamma
        )
        .unwrap();
        if acc {
            write!(out, " {} |", percent(row.accuracy)).unwrap();
        }
        writeln!(out, " {} |", row.pattern.glyph()).unwrap();
    }
    writeln!(out).unwrap();

    writeln!(out, "## Patterns").unwrap();
    writeln!(out).unwrap();
    if acc {
        writeln!(out, "| Pattern | μ_k* | γ_k* | Acc (%) | N |").unwrap();
        writeln!(out, "|---|---:|---:|---:|---:|").unwrap();
    } else {
        writeln!(out, "| Pattern | μ_k* | γ_k* | N |").unwrap();
        writeln!(out, "|---|---:|---:|---:|").unwrap();
    }
    for pattern in Pattern::ALL {
        let found = r.summary.patterns.iter().find(|s| s.pattern == pattern);
        let (mu, gamma, accuracy, n) = match found {
            Some(s) => (
                format!("{:.2}", s.mean_mu),
                format!("{:.2}", s.mean_gamma),
                percent(s.mean_accuracy),
                s.n_classes,
            ),
            None => (ABSENT.into(), ABSENT.into(), ABSENT.into(), 0),
        };
        write!(out, "| {} | {mu} | {gamma} |", pattern_label(pattern)).unwrap();
        if acc {
            write!(out, " {accuracy} |").unwrap();
        }
        writeln!(out, " {n} |").unwrap();
    }
    let o = &r.summary.overall;
    write!(out, "| All | {:.2} | {:.2} |", o.mean_mu, o.mean_gamma).unwrap();
    if acc {
        write!(out, " {} |", percent(o.mean_accuracy)).unwrap();
    }
    writeln!(out, " {} |", o.n_classes).unwrap();
    writeln!(out).unwrap();
    writeln!(
        out,
        "★ Fractured: γ > 0.5. ♣ Overlapped: -0.5 ≤ γ ≤ 0.5. ♠ Clustered: γ < -0.5."
    )
    .unwrap();
    out
}

pub(super) fn comparison(c: &Comparison) -> String {
    let mut out = String::new();
    writeln!(out, "# k* comparison").unwrap();
    writeln!(out).unwrap();
    for (i, (src, metric)) in c.sources.iter().zip(&c.metrics).enumerate() {
        writeln!(out, "- [{}] {} (`{}`)", i + 1, escape(src), metric).unwrap();
    }
    writeln!(out).unwrap();

    write!(out, "| Class |").unwrap();
    for i in 1..=c.sources.len() {
        write!(out, " μ [{i}] | γ [{i}] | [{i}] |").unwrap();
    }
    writeln!(out, " Changed |").unwrap();
    write!(out, "|---|").unwrap();
    for _ in &c.sources {
        write!(out, "---:|---:|:---:|").unwrap();
    }
    writeln!(out, ":---:|").unwrap();
    for class in &c.classes {
        write!(out, "| {} |", escape(&class.class_name)).unwrap();
        for e in &class.entries {
            write!(
                out,
                " {:.2} | {:.2} | {} |",
                e.mu,
                e.gamma,
                e.pattern.glyph()
            )
            .unwrap();
        }
        writeln!(out, " {} |", if class.pattern_changed { "yes" } else { "" }).unwrap();
    }
    writeln!(out).unwrap();

    writeln!(out, "## Pattern counts").unwrap();
    writeln!(out).unwrap();
    write!(out, "| Pattern |").unwrap();
    for i in 1..=c.sources.len() {
        write!(out, " N [{i}] |").unwrap();
    }
    writeln!(out).unwrap();
    write!(out, "|---|").unwrap();
    for _ in &c.sources {
        write!(out, "---:|").unwrap();
    }
    writeln!(out).unwrap();
    for pattern in Pattern::ALL {
        write!(out, "| {} |", pattern_label(pattern)).unwrap();
        for summary in &c.summaries {
            let n = summary
                .iter()
                .find(|s| s.pattern == pattern)
                .map_or(0, |s| s.n_classes);
            write!(out, " {n} |").unwrap();
        }
        writeln!(out).unwrap();
    }
    writeln!(out).unwrap();
    writeln!(
        out,
        "{} of {} classes changed pattern.",
        c.n_changed,
        c.classes.len()
    )
    .unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pipes_are_escaped() {
        assert_eq!(escape("a|b"), "a\\|b");
    }

    #[test]
    fn percent_has_two_decimals() {
        assert_eq!(percent(Some(0.975)), "97.50");
        assert_eq!(percent(None), ABSENT);
    }
}
