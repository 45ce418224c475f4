use super::Formula;

/// Moves every negation down to primitive events, through intervention
/// modalities as well (`![Y<-y](φ)` becomes `[Y<-y](!φ)`).
pub fn push_negations(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, negate: bool) -> Formula {
    match f {
        Formula::Event(_) if negate => Formula::not(f.clone()),
        Formula::Event(_) => f.clone(),
        Formula::Not(inner) => nnf(inner, !negate),
        Formula::And(fs) if negate => Formula::Or(fs.iter().map(|g| nnf(g, true)).collect()),
        Formula::Or(fs) if negate => Formula::And(fs.iter().map(|g| nnf(g, true)).collect()),
        Formula::And(fs) => Formula::And(fs.iter().map(|g| nnf(g, false)).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|g| nnf(g, false)).collect()),
        Formula::Do(set, body) => Formula::intervene(set.clone(), nnf(body, negate)),
    }
}

/// Within every conjunction, merges intervention atoms over the same set:
/// `[S](φ) & [S](ψ)` becomes `[S](φ & ψ)`. Nested conjunctions are flattened
/// first so that atoms at different nesting depths are merged too.
pub fn merge_same_interventions(f: &Formula) -> Formula {
    match f {
        Formula::Event(_) => f.clone(),
        Formula::Not(inner) => Formula::not(merge_same_interventions(inner)),
        Formula::Or(fs) => Formula::Or(fs.iter().map(merge_same_interventions).collect()),
        Formula::Do(set, body) => Formula::intervene(set.clone(), merge_same_interventions(body)),
        Formula::And(fs) => {
            let mut flat = Vec::new();
            flatten_and(fs, &mut flat);
            let mut out: Vec<Formula> = Vec::with_capacity(flat.len());
            for g in flat {
                let g = merge_same_interventions(&g);
                if let Formula::Do(set, body) = &g {
                    let existing = out
                        .iter_mut()
                        .find(|h| matches!(h, Formula::Do(s, _) if s == set));
                    if let Some(Formula::Do(_, acc)) = existing {
                        let mut parts = match std::mem::replace(acc.as_mut(), Formula::And(Vec::new())) {
                            Formula::And(ps) => ps,
                            other => vec![other],
                        };
                        match body.as_ref() {
                            Formula::And(ps) => parts.extend(ps.iter().cloned()),
                            other => parts.push(other.clone()),
                        }
                        **acc = Formula::And(parts);
                        continue;
                    }
                }
                out.push(g);
            }
            if out.len() == 1 {
                out.pop().unwrap()
            } else {
                Formula::And(out)
            }
        }
    }
}

fn flatten_and(fs: &[Formula], out: &mut Vec<Formula>) {
    for g in fs {
        match g {
            Formula::And(inner) => flatten_and(inner, out),
            other => out.push(other.clone()),
        }
    }
}
