//! Formulas resolved against a network: variable and value names become
//! indices, and every distinct intervention set becomes a numbered world.
//! World 0 is always the unintervened world.

use std::collections::BTreeSet;

use crate::formula::{Formula, FormulaError};
use crate::model::{Cbn, VarId};

pub(crate) type Assignment = Vec<(VarId, usize)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Expr {
    Lit { world: usize, var: VarId, value: usize },
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

#[derive(Debug, Clone)]
pub(crate) struct Bound {
    pub worlds: Vec<Assignment>,
    pub expr: Expr,
}

impl Expr {
    /// Short-circuit evaluation, asking `lookup` for the value of a variable
    /// in a world only when it is needed.
    pub fn eval<E>(&self, lookup: &mut impl FnMut(usize, VarId) -> Result<usize, E>) -> Result<bool, E> {
        match self {
            Expr::Lit { world, var, value } => Ok(lookup(*world, *var)? == *value),
            Expr::Not(e) => Ok(!e.eval(lookup)?),
            Expr::And(es) => {
                for e in es {
                    if !e.eval(lookup)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Expr::Or(es) => {
                for e in es {
                    if e.eval(lookup)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    fn collect(&self, out: &mut Vec<BTreeSet<VarId>>) {
        match self {
            Expr::Lit { world, var, .. } => {
                out[*world].insert(*var);
            }
            Expr::Not(e) => e.collect(out),
            Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.collect(out)),
        }
    }
}

impl Bound {
    /// Variables read in each world.
    pub fn mentioned(&self) -> Vec<BTreeSet<VarId>> {
        let mut out = vec![BTreeSet::new(); self.worlds.len()];
        self.expr.collect(&mut out);
        out
    }

    pub fn intervenes_on_exogenous(&self, cbn: &Cbn) -> bool {
        self.worlds
            .iter()
            .flatten()
            .any(|&(v, _)| cbn.is_exogenous(v))
    }
}

pub(crate) fn bind(f: &Formula, cbn: &Cbn) -> Result<Bound, FormulaError> {
    let mut worlds = vec![Vec::new()];
    let expr = bind_expr(f, cbn, 0, &mut worlds)?;
    Ok(Bound { worlds, expr })
}

fn bind_expr(f: &Formula, cbn: &Cbn, world: usize, worlds: &mut Vec<Assignment>) -> Result<Expr, FormulaError> {
    Ok(match f {
        Formula::Event(e) => {
            let var = cbn.require(&e.var)?;
            let value = cbn.value_index(var, &e.value)?;
            Expr::Lit { world, var, value }
        }
        Formula::Not(g) => Expr::Not(Box::new(bind_expr(g, cbn, world, worlds)?)),
        Formula::And(gs) => Expr::And(
            gs.iter()
                .map(|g| bind_expr(g, cbn, world, worlds))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Or(gs) => Expr::Or(
            gs.iter()
                .map(|g| bind_expr(g, cbn, world, worlds))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Do(set, body) => {
            if world != 0 {
                return Err(FormulaError::NestedIntervention { position: None });
            }
            let assignment = cbn.bind_interventions(set)?;
            let w = match worlds.iter().position(|a| *a == assignment) {
                Some(w) => w,
                None => {
                    worlds.push(assignment);
                    worlds.len() - 1
                }
            };
            bind_expr(body, cbn, w, worlds)?
        }
    })
}
