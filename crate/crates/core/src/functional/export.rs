use std::io::Write;

use serde_json::{json, Map, Value};

use crate::prob::format_rational;

use super::FunctionalModel;

pub const FCM_FORMAT: &str = "fcm/1";

/// Writes the model as an `fcm/1` document: the exogenous distribution, one
/// response variable `U_<Y>` per endogenous `Y` listing its positive-measure
/// functions, and the structural equations `Y = U_<Y>(parents)`.
pub fn export_fcm<W: Write>(fm: &FunctionalModel, writer: W) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(writer, &document(fm))
}

fn document(fm: &FunctionalModel) -> Value {
    let cbn = &fm.source;
    let exogenous: Vec<Value> = fm
        .exogenous
        .iter()
        .map(|&u| json!({"name": cbn.name(u), "domain": cbn.variable(u).domain}))
        .collect();
    let contexts: Vec<Value> = fm
        .contexts
        .iter()
        .map(|(values, p)| {
            let assignment: Map<String, Value> = fm
                .exogenous
                .iter()
                .zip(values)
                .map(|(&u, &x)| (cbn.name(u).to_string(), Value::from(cbn.label(u, x))))
                .collect();
            json!({"values": assignment, "p": format_rational(p)})
        })
        .collect();
    let responses: Vec<Value> = fm
        .tables
        .iter()
        .map(|t| {
            let parents: Vec<&str> = cbn.parents(t.var).iter().map(|&p| cbn.name(p)).collect();
            let functions: Vec<Value> = t
                .support
                .iter()
                .map(|f| {
                    json!({
                        "code": f.code,
                        "label": t.label(cbn, &f.outputs),
                        "outputs": f.outputs.iter().map(|&y| cbn.label(t.var, y)).collect::<Vec<_>>(),
                        "p": format_rational(&f.probability),
                    })
                })
                .collect();
            json!({
                "name": format!("U_{}", cbn.name(t.var)),
                "for": cbn.name(t.var),
                "parents": parents,
                "settings": t.settings,
                "functions": functions,
            })
        })
        .collect();
    json!({
        "format": FCM_FORMAT,
        "exogenous": exogenous,
        "contexts": contexts,
        "response_variables": responses,
        "positive_contexts": fm.context_count().to_string(),
    })
}
