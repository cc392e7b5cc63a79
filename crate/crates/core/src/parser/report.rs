use std::fmt::Write;

use crate::expr::const_literal;
use crate::model::Model;

/// Human-readable summary: variables, constants (with sampled values),
/// locations and the transition graph.
pub fn model_report(m: &Model) -> String {
    let mut out = String::new();
    let names = &m.variables;
    writeln!(out, "seed: {}", m.seed).unwrap();
    writeln!(out, "variables ({}): {}", m.dim(), names.join(", ")).unwrap();
    if m.constants.is_empty() {
        writeln!(out, "constants: none").unwrap();
    } else {
        writeln!(out, "constants:").unwrap();
        for c in &m.constants {
            match c.sampled_from {
                Some(k) => writeln!(
                    out,
                    "  {} = {} (sampled from R {})",
                    c.name,
                    const_literal(c.value),
                    k
                ),
                None => writeln!(out, "  {} = {}", c.name, const_literal(c.value)),
            }
            .unwrap();
        }
    }
    let init: Vec<String> = names
        .iter()
        .zip(&m.initial_state)
        .map(|(n, v)| format!("{n} = {}", const_literal(*v)))
        .collect();
    writeln!(
        out,
        "initial: {} with {}",
        m.locations[m.initial_location].name,
        init.join(", ")
    )
    .unwrap();
    writeln!(out, "locations ({}):", m.locations.len()).unwrap();
    for loc in &m.locations {
        let mut targets: Vec<&str> = Vec::new();
        for tr in &loc.transitions {
            let t = m.locations[tr.target].name.as_str();
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        writeln!(
            out,
            "  {}: {} transition(s) -> {{{}}}",
            loc.name,
            loc.transitions.len(),
            targets.join(", ")
        )
        .unwrap();
        for (i, tr) in loc.transitions.iter().enumerate() {
            let ineqs: Vec<String> = tr
                .guard_ineqs
                .iter()
                .map(|e| format!("{} > 0", e.display(names)))
                .collect();
            let cond = if ineqs.is_empty() {
                String::new()
            } else {
                format!(" with {}", ineqs.join(", "))
            };
            writeln!(
                out,
                "    #{i} {} = 0{cond} -> {}",
                tr.guard_eq.display(names),
                m.locations[tr.target].name
            )
            .unwrap();
        }
    }
    match &m.property {
        Some(p) => writeln!(out, "property: {}", p.display(names)).unwrap(),
        None => writeln!(out, "property: no property").unwrap(),
    }
    out
}
