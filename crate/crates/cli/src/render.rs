//! Text, CSV and JSON renderings of query results and reports.

use agilekb_core::kb::{KnowledgeBase, PracticeVerdict, RecommendationReport};
use agilekb_core::sparql::ResultTable;
use agilekb_core::{Term, Triple};

fn cell(kb: &KnowledgeBase, term: &Term) -> String {
    if term.is_iri() {
        kb.display(term)
    } else {
        term.text().to_owned()
    }
}

/// Left-aligned columns separated by two spaces; header, rule, rows.
pub fn table_text(kb: &KnowledgeBase, table: &ResultTable) -> String {
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| r.iter().map(|t| cell(kb, t).replace(['\n', '\r', '\t'], " ")).collect())
        .collect();
    let mut widths: Vec<usize> = table.columns.iter().map(|c| c.chars().count()).collect();
    for row in &rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            s.push_str(c);
            s.extend(std::iter::repeat_n(' ', w - c.chars().count()));
        }
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    };
    let mut out = line(&table.columns);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&line(&rule));
    for row in &rows {
        out.push_str(&line(row));
    }
    out
}

/// RFC 4180 CSV with full IRIs and literal lexical forms.
pub fn table_csv(table: &ResultTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row.iter().map(Term::text)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn table_json(table: &ResultTable) -> String {
    let mut s = table.to_json();
    s.push('\n');
    s
}

fn triple_text(kb: &KnowledgeBase, t: &Triple) -> String {
    let show = |term: &Term| if term.is_iri() { kb.display(term) } else { term.to_ntriples() };
    format!("{} {} {}", show(t.subject()), show(t.predicate()), show(t.object()))
}

fn verdicts(kb: &KnowledgeBase, out: &mut String, title: &str, list: &[PracticeVerdict]) {
    out.push_str(&format!("{title} ({})\n", list.len()));
    if list.is_empty() {
        out.push_str("  (none)\n");
    }
    for v in list {
        match &v.label {
            Some(label) => out.push_str(&format!("  {}  {label}\n", kb.display(&v.practice))),
            None => out.push_str(&format!("  {}\n", kb.display(&v.practice))),
        }
        for trace in &v.traces {
            let premises: Vec<String> = trace.premises.iter().map(|p| triple_text(kb, &p.triple)).collect();
            out.push_str(&format!(
                "    by {}: {}\n",
                trace.rule.as_deref().unwrap_or("asserted"),
                premises.join(" . ")
            ));
        }
    }
}

pub fn report_text(kb: &KnowledgeBase, report: &RecommendationReport) -> String {
    let mut out = String::new();
    verdicts(kb, &mut out, "Recommended practices", &report.recommended);
    verdicts(kb, &mut out, "Discouraged practices", &report.discouraged);
    out
}
