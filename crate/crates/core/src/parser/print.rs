use std::fmt::Write;

use crate::expr::{const_literal, Expr};
use crate::model::Model;

/// Renders a model as source text that parses back to an identical model
/// under the same seed.
pub fn print_model(m: &Model) -> String {
    let names = &m.variables;
    let list = |es: &[Expr]| {
        es.iter()
            .map(|e| e.display(names).to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut out = String::new();
    for c in &m.constants {
        match c.sampled_from {
            Some(k) => writeln!(out, "let {} = R {}", c.name, k),
            None => writeln!(out, "let {} = {}", c.name, const_literal(c.value)),
        }
        .unwrap();
    }
    writeln!(out, "var {}", names.join(", ")).unwrap();
    let init: Vec<String> = m.initial_state.iter().map(|v| const_literal(*v)).collect();
    writeln!(
        out,
        "init {}, {}",
        m.locations[m.initial_location].name,
        init.join(", ")
    )
    .unwrap();
    for loc in &m.locations {
        writeln!(out, "at {} wait {}", loc.name, list(loc.field.components())).unwrap();
        for tr in &loc.transitions {
            let mut guard = vec![tr.guard_eq.display(names).to_string()];
            guard.extend(tr.guard_ineqs.iter().map(|e| e.display(names).to_string()));
            writeln!(
                out,
                "    once ({}) goto {} then {}",
                guard.join(", "),
                m.locations[tr.target].name,
                list(&tr.reset)
            )
            .unwrap();
        }
        writeln!(out, "end").unwrap();
    }
    if let Some(p) = &m.property {
        writeln!(out, "prop {}", p.display(names)).unwrap();
    }
    out
}
