//! Small reference networks used throughout the tests, benches and CLI demos.

use num_rational::BigRational;
use num_traits::One;

use crate::model::{Cbn, CbnSpec, VarKind, Variable};

pub fn rat(numer: i64, denom: i64) -> BigRational {
    BigRational::new(numer.into(), denom.into())
}

fn binary(p0: &BigRational) -> Vec<BigRational> {
    vec![p0.clone(), BigRational::one() - p0]
}

/// `U -> X -> Y`, all binary, with `P(U=0)=a`, `P(X=0|U=0)=b`,
/// `P(X=0|U=1)=c`, `P(Y=0|X=0)=d`, `P(Y=0|X=1)=e`.
pub fn m_star(a: BigRational, b: BigRational, c: BigRational, d: BigRational, e: BigRational) -> Cbn {
    let mut spec = CbnSpec::new();
    spec.add_variable(Variable::new("U", VarKind::Exogenous, &["0", "1"]))
        .add_variable(Variable::new("X", VarKind::Endogenous, &["0", "1"]))
        .add_variable(Variable::new("Y", VarKind::Endogenous, &["0", "1"]))
        .add_table("U", &[], vec![binary(&a)])
        .add_table("X", &["U"], vec![binary(&b), binary(&c)])
        .add_table("Y", &["X"], vec![binary(&d), binary(&e)]);
    spec.build().expect("fixture is valid")
}

/// `M*` with every cpt entry equal to 1/2 except `P(U=0) = 1`.
pub fn m_star_converted() -> Cbn {
    let h = rat(1, 2);
    m_star(rat(1, 1), h.clone(), h.clone(), h.clone(), h)
}

/// `U -> X`, `U -> Y`, `X -> Y`. Parameters `[a, b, c, f1, f2, f3, f4]` with
/// `P(Y=0 | U=0,X=0)=f1`, `(U=0,X=1)=f2`, `(U=1,X=0)=f3`, `(U=1,X=1)=f4`.
pub fn m_dagger(params: &[BigRational; 7]) -> Cbn {
    let [a, b, c, f1, f2, f3, f4] = params;
    let mut spec = CbnSpec::new();
    spec.add_variable(Variable::new("U", VarKind::Exogenous, &["0", "1"]))
        .add_variable(Variable::new("X", VarKind::Endogenous, &["0", "1"]))
        .add_variable(Variable::new("Y", VarKind::Endogenous, &["0", "1"]))
        .add_table("U", &[], vec![binary(a)])
        .add_table("X", &["U"], vec![binary(b), binary(c)])
        .add_table("Y", &["U", "X"], vec![binary(f1), binary(f2), binary(f3), binary(f4)]);
    spec.build().expect("fixture is valid")
}

/// `U -> Y -> X` with `P(U=1)=1`, `Y = U`, and `P(X=1 | Y=1) = 1/2`
/// (`P(X=1 | Y=0) = 1/2` as well, though that row is unreachable).
pub fn abduction_chain() -> Cbn {
    let mut spec = CbnSpec::new();
    spec.add_variable(Variable::new("U", VarKind::Exogenous, &["0", "1"]))
        .add_variable(Variable::new("Y", VarKind::Endogenous, &["0", "1"]))
        .add_variable(Variable::new("X", VarKind::Endogenous, &["0", "1"]))
        .add_table("U", &[], vec![vec![rat(0, 1), rat(1, 1)]])
        .add_table("Y", &["U"], vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]])
        .add_table("X", &["Y"], vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 2), rat(1, 2)]]);
    spec.build().expect("fixture is valid")
}

/// `X1 -> X2`, `X1 -> X3`, `X2 -> Y`, `X3 -> Y`, all binary and endogenous,
/// with distinct non-degenerate cpt entries.
pub fn diamond() -> Cbn {
    let mut spec = CbnSpec::new();
    for name in ["X1", "X2", "X3", "Y"] {
        spec.add_variable(Variable::new(name, VarKind::Endogenous, &["0", "1"]));
    }
    spec.add_table("X1", &[], vec![binary(&rat(2, 5))])
        .add_table("X2", &["X1"], vec![binary(&rat(1, 3)), binary(&rat(3, 4))])
        .add_table("X3", &["X1"], vec![binary(&rat(1, 6)), binary(&rat(5, 8))])
        .add_table(
            "Y",
            &["X2", "X3"],
            vec![
                binary(&rat(1, 7)),
                binary(&rat(2, 3)),
                binary(&rat(3, 10)),
                binary(&rat(4, 9)),
            ],
        );
    spec.build().expect("fixture is valid")
}
