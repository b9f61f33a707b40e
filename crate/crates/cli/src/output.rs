use std::fmt::Write as _;
use std::time::Duration;

use cogrid_core::counting::CoherenceMeasure;
use cogrid_core::eval::AgreementReport;
use cogrid_core::model::{Diagnostic, Partition, Vocabulary};
use cogrid_core::render::{self, fmt_count, labels_of};
use serde_json::{json, Value};

use crate::args::{ClusterArgs, CompareArgs, Format, Method};
use crate::{Engine, Loaded, Run};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Timing {
    pub parse: Duration,
    pub count: Duration,
    pub extract: Duration,
}

impl Timing {
    fn ms(d: Duration) -> f64 {
        d.as_secs_f64() * 1e3
    }

    pub fn total(&self) -> Duration {
        self.parse + self.count + self.extract
    }

    pub fn line(&self) -> String {
        format!(
            "timing_ms parse={:.3} count={:.3} extract={:.3} total={:.3}\n",
            Self::ms(self.parse),
            Self::ms(self.count),
            Self::ms(self.extract),
            Self::ms(self.total())
        )
    }

    fn json(&self) -> Value {
        json!({
            "parse": Self::ms(self.parse),
            "count": Self::ms(self.count),
            "extract": Self::ms(self.extract),
            "total": Self::ms(self.total()),
        })
    }
}

pub fn render_diagnostics(diagnostics: &[Diagnostic]) -> String {
    let mut out = String::new();
    for d in diagnostics {
        let _ = writeln!(out, "skipped line {}: {}", d.record + 1, d.reason);
    }
    out
}

fn partition_json(partition: &Partition, vocab: &Vocabulary) -> (Value, Value) {
    let labeled = partition.labeled(vocab);
    (json!(labeled.clusters), json!(labeled.unassigned))
}

fn input_json(loaded: &Loaded) -> Value {
    json!({
        "source": loaded.source,
        "events": loaded.dataset.events.len(),
        "variables": loaded.dataset.vocabulary.len(),
        "diagnostics": loaded.diagnostics.len(),
    })
}

pub fn render_cluster(args: &ClusterArgs, loaded: &Loaded, run: &Run) -> String {
    match args.format {
        Format::Text => cluster_text(args, loaded, run),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&cluster_json(args, loaded, run))
                .expect("json serializes");
            s.push('\n');
            s
        }
        Format::Csv => cluster_csv(loaded, run),
    }
}

fn cluster_json(args: &ClusterArgs, loaded: &Loaded, run: &Run) -> Value {
    let vocab = &loaded.dataset.vocabulary;
    let (clusters, unassigned) = partition_json(&run.partition, vocab);
    let measure: CoherenceMeasure = args.engine.coherence.into();
    let (links, details) = match &run.engine {
        Engine::Reinforce(state) => {
            let counts: Vec<Value> = vocab
                .variables()
                .map(|v| json!({ "label": v.label, "count": state.count(v.id) }))
                .collect();
            let bands: Vec<Value> = state
                .band_clusters()
                .iter()
                .map(|b| json!({ "count": b.count, "members": labels_of(vocab, &b.members) }))
                .collect();
            (json!([]), json!({ "counts": counts, "bands": bands }))
        }
        Engine::Counting(store) => {
            let instances: Vec<Value> = store
                .instances()
                .iter()
                .map(|r| {
                    json!({
                        "pattern": labels_of(vocab, &r.pattern),
                        "local_count": r.local_count,
                        "global_count": r.global_count,
                        "coherence": measure.apply(r),
                        "created_at": r.created_at,
                    })
                })
                .collect();
            (json!([]), json!({ "instances": instances }))
        }
        Engine::Grid(grid, result) => {
            let links: Vec<Value> = result
                .links
                .iter()
                .map(|l| json!({ "a": vocab.label(l.a), "b": vocab.label(l.b), "strength": l.strength }))
                .collect();
            let heads: Vec<Value> = result
                .head_sets
                .iter()
                .enumerate()
                .map(|(v, h)| {
                    json!({ "label": vocab.labels()[v], "head_set": labels_of(vocab, h) })
                })
                .collect();
            (json!(links), json!({ "matrix": grid.to_json(), "head_sets": heads }))
        }
    };
    let mut out = json!({
        "method": args.method.name(),
        "parameters": args.engine,
        "input": input_json(loaded),
        "clusters": clusters,
        "unassigned": unassigned,
        "links": links,
        "details": details,
    });
    if args.timing {
        out["timing_ms"] = run.timing.json();
    }
    out
}

fn write_partition(out: &mut String, partition: &Partition, vocab: &Vocabulary) {
    let labeled = partition.labeled(vocab);
    out.push_str("clusters\n");
    if labeled.clusters.is_empty() {
        out.push_str("  (none)\n");
    }
    for (i, c) in labeled.clusters.iter().enumerate() {
        let _ = writeln!(out, "  {}: {}", i + 1, c.join(", "));
    }
    if labeled.unassigned.is_empty() {
        out.push_str("unassigned: (none)\n");
    } else {
        let _ = writeln!(out, "unassigned: {}", labeled.unassigned.join(", "));
    }
}

fn cluster_text(args: &ClusterArgs, loaded: &Loaded, run: &Run) -> String {
    let vocab = &loaded.dataset.vocabulary;
    let mut out = String::new();
    let _ = writeln!(out, "method: {}", args.method.name());
    let _ = writeln!(
        out,
        "input: {} ({} events, {} variables, {} skipped)",
        loaded.source,
        loaded.dataset.events.len(),
        vocab.len(),
        loaded.diagnostics.len()
    );
    out.push('\n');
    match &run.engine {
        Engine::Reinforce(state) => {
            out.push_str("counts\n");
            out.push_str(&render::reinforce_table(vocab, state));
            out.push_str("\nbands\n");
            for b in state.band_clusters() {
                let _ = writeln!(
                    out,
                    "  {}: {}",
                    fmt_count(b.count),
                    labels_of(vocab, &b.members).join(", ")
                );
            }
            out.push('\n');
            write_partition(&mut out, &run.partition, vocab);
        }
        Engine::Counting(store) => {
            let measure: CoherenceMeasure = args.engine.coherence.into();
            out.push_str("instances\n");
            out.push_str(&render::instance_table(vocab, store));
            out.push_str("coherence");
            for r in store.instances() {
                let _ = write!(out, "\t{}", fmt_count(measure.apply(r)));
            }
            out.push_str("\n\n");
            write_partition(&mut out, &run.partition, vocab);
        }
        Engine::Grid(grid, result) => {
            out.push_str("count matrix\n");
            out.push_str(&render::grid_table(grid));
            out.push('\n');
            write_partition(&mut out, &run.partition, vocab);
            let _ = writeln!(out, "links (tau_link = {})", args.engine.tau_link);
            if result.links.is_empty() {
                out.push_str("  (none)\n");
            }
            for l in &result.links {
                let _ = writeln!(out, "  {} - {}  {}", vocab.label(l.a), vocab.label(l.b), l.strength);
            }
        }
    }
    out
}

fn cluster_csv(loaded: &Loaded, run: &Run) -> String {
    let vocab = &loaded.dataset.vocabulary;
    let owner = run.partition.assignment();
    let cluster_of = |i: usize| owner[i].map_or(String::new(), |c| (c + 1).to_string());
    let mut out = String::new();
    match &run.engine {
        Engine::Grid(grid, _) => out.push_str(&grid.to_csv()),
        Engine::Reinforce(state) => {
            out.push_str("label,count,cluster\n");
            for v in vocab.variables() {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    v.label,
                    fmt_count(state.count(v.id)),
                    cluster_of(v.id.index())
                );
            }
        }
        Engine::Counting(store) => {
            out.push_str("pattern,local_count,global_count,coherence,created_at\n");
            for r in store.instances() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    labels_of(vocab, &r.pattern).join(" "),
                    fmt_count(r.local_count),
                    fmt_count(r.global_count),
                    fmt_count(r.global_count - r.local_count),
                    r.created_at
                );
            }
        }
    }
    out
}

pub fn render_compare(
    args: &CompareArgs,
    loaded: &Loaded,
    reports: &[(Method, AgreementReport)],
) -> String {
    match args.format {
        Format::Json => {
            let methods: Vec<Value> = reports
                .iter()
                .map(|(m, r)| json!({ "method": m.name(), "report": r }))
                .collect();
            let value = json!({
                "reference": args.reference,
                "parameters": args.engine,
                "input": input_json(loaded),
                "reports": methods,
            });
            let mut s = serde_json::to_string_pretty(&value).expect("json serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut out = String::from(
                "method,pairwise_precision,pairwise_recall,pairwise_f1,rand_index,exact_cluster_matches\n",
            );
            for (m, r) in reports {
                let _ = writeln!(
                    out,
                    "{},{:.6},{:.6},{:.6},{:.6},{}",
                    m.name(),
                    r.pairwise_precision,
                    r.pairwise_recall,
                    r.pairwise_f1,
                    r.rand_index,
                    r.exact_cluster_matches
                );
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "reference: {}", args.reference);
            let _ = writeln!(
                out,
                "input: {} ({} events, {} variables)\n",
                loaded.source,
                loaded.dataset.events.len(),
                loaded.dataset.vocabulary.len()
            );
            let _ = write!(out, "{:<22}", "");
            for (m, _) in reports {
                let _ = write!(out, "{:>12}", m.name());
            }
            out.push('\n');
            let rows: [(&str, fn(&AgreementReport) -> String); 6] = [
                ("pairwise precision", |r| format!("{:.4}", r.pairwise_precision)),
                ("pairwise recall", |r| format!("{:.4}", r.pairwise_recall)),
                ("pairwise f1", |r| format!("{:.4}", r.pairwise_f1)),
                ("rand index", |r| format!("{:.4}", r.rand_index)),
                ("co-clustered pairs", |r| r.produced_pairs.to_string()),
                ("exact block matches", |r| r.exact_cluster_matches.to_string()),
            ];
            for (name, cell) in rows {
                let _ = write!(out, "{name:<22}");
                for (_, r) in reports {
                    let _ = write!(out, "{:>12}", cell(r));
                }
                out.push('\n');
            }
            out.push_str("(a side with no co-clustered pairs scores 1 on its ratio)\n");
            for (m, r) in reports {
                let _ = writeln!(out, "\n[{}]", m.name());
                out.push_str(&r.render_text());
            }
            out
        }
    }
}
