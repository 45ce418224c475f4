use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::model::{Cbn, VarId};
use crate::prob::Probability;

use super::slots::{Conjunct, SlotKind, Slots};
use super::SemanticsError;

/// A (possibly partial) choice of one outcome per slot.
pub trait Selection {
    fn choice(&self, slot: usize) -> Option<usize>;
}

/// Complete combination of conditional events: one outcome for every slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ccce {
    choices: Vec<usize>,
}

/// Fixed-context ccce: outcomes only for the slots whose exogenous parent
/// components agree with the context chosen by the exogenous slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fccce {
    choices: Vec<Option<usize>>,
}

impl Selection for Ccce {
    fn choice(&self, slot: usize) -> Option<usize> {
        self.choices.get(slot).copied()
    }
}

impl Selection for Fccce {
    fn choice(&self, slot: usize) -> Option<usize> {
        self.choices.get(slot).copied().flatten()
    }
}

impl Ccce {
    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    pub fn conjuncts(&self, cbn: &Cbn) -> Vec<Conjunct> {
        let slots = Slots::new(cbn);
        self.choices
            .iter()
            .enumerate()
            .map(|(s, &o)| slots.describe(cbn, s, o))
            .collect()
    }

    pub fn probability(&self, cbn: &Cbn) -> Probability {
        let slots = Slots::new(cbn);
        Probability::exact(product(&slots, cbn, self.choices.iter().copied().enumerate()))
    }
}

impl Fccce {
    pub fn len(&self) -> usize {
        self.choices.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn conjuncts(&self, cbn: &Cbn) -> Vec<Conjunct> {
        let slots = Slots::new(cbn);
        self.choices
            .iter()
            .enumerate()
            .filter_map(|(s, o)| o.map(|o| slots.describe(cbn, s, o)))
            .collect()
    }

    pub fn probability(&self, cbn: &Cbn) -> Probability {
        let slots = Slots::new(cbn);
        Probability::exact(product(
            &slots,
            cbn,
            self.choices.iter().enumerate().filter_map(|(s, o)| o.map(|o| (s, o))),
        ))
    }

    /// Whether `ccce` agrees with this fccce on every slot it fixes.
    pub fn is_extended_by(&self, ccce: &Ccce) -> bool {
        self.choices
            .iter()
            .zip(&ccce.choices)
            .all(|(a, b)| a.is_none_or(|a| a == *b))
    }
}

fn product(slots: &Slots, cbn: &Cbn, chosen: impl Iterator<Item = (usize, usize)>) -> BigRational {
    chosen.fold(BigRational::one(), |acc, (s, o)| acc * slots.weight(cbn, s, o))
}

/// Odometer step, last position fastest. Returns `false` after wrapping.
fn advance(digits: &mut [usize], radices: &[usize]) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radices[i] {
            return true;
        }
        digits[i] = 0;
    }
    false
}

fn allowed_options(slots: &Slots, cbn: &Cbn, positive_only: bool) -> Vec<Vec<usize>> {
    (0..slots.len())
        .map(|s| {
            (0..slots.options(cbn, s))
                .filter(|&o| !positive_only || !slots.weight(cbn, s, o).is_zero())
                .collect()
        })
        .collect()
}

/// Endogenous cpt slots whose exogenous parent components match the context
/// currently fixed in `choice`.
fn active_slots(slots: &Slots, cbn: &Cbn, choice: &[Option<usize>]) -> Vec<usize> {
    (0..slots.len())
        .filter(|&s| match slots.kinds[s] {
            SlotKind::Context => false,
            SlotKind::Cpt { var, setting } => {
                if cbn.is_exogenous(var) {
                    return false;
                }
                let cpt = cbn.cpt(var).expect("cpt slot");
                cbn.parents(var)
                    .iter()
                    .zip(cpt.setting_values(setting))
                    .all(|(&p, v)| !cbn.is_exogenous(p) || slots.exogenous_value(cbn, choice, p) == Some(v))
            }
        })
        .collect()
}

fn count(slots: &Slots, cbn: &Cbn, positive_only: bool, fixed_context: bool) -> u128 {
    let options = allowed_options(slots, cbn, positive_only);
    if !fixed_context {
        return options
            .iter()
            .fold(1u128, |acc, o| acc.saturating_mul(o.len() as u128));
    }
    let exo = slots.exogenous_slots(cbn);
    let radices: Vec<usize> = exo.iter().map(|&s| options[s].len()).collect();
    if radices.contains(&0) {
        return 0;
    }
    let mut digits = vec![0; exo.len()];
    let mut total = 0u128;
    let mut choice = vec![None; slots.len()];
    loop {
        for (i, &s) in exo.iter().enumerate() {
            choice[s] = Some(options[s][digits[i]]);
        }
        let inner = active_slots(slots, cbn, &choice)
            .iter()
            .fold(1u128, |acc, &s| acc.saturating_mul(options[s].len() as u128));
        total = total.saturating_add(inner);
        if !advance(&mut digits, &radices) {
            return total;
        }
    }
}

/// Number of ccces, zero-probability ones included.
pub fn ccce_count(cbn: &Cbn) -> u128 {
    count(&Slots::new(cbn), cbn, false, false)
}

/// Number of fccces, zero-probability ones included.
pub fn fccce_count(cbn: &Cbn) -> u128 {
    count(&Slots::new(cbn), cbn, false, true)
}

pub(crate) fn positive_count(cbn: &Cbn, fixed_context: bool) -> u128 {
    count(&Slots::new(cbn), cbn, true, fixed_context)
}

fn check_cap(n: u128, cap: u64) -> Result<(), SemanticsError> {
    if n > cap as u128 {
        Err(SemanticsError::CapExceeded { cap, needed: Some(n) })
    } else {
        Ok(())
    }
}

/// Lazy stream of every ccce with its probability. Fails up front when the
/// stream would be longer than `cap`.
pub fn enumerate_ccces(cbn: &Cbn, cap: u64) -> Result<CcceIter<'_>, SemanticsError> {
    check_cap(ccce_count(cbn), cap)?;
    Ok(CcceIter::new(cbn, false))
}

/// Lazy stream of every fccce with its probability.
pub fn enumerate_fccces(cbn: &Cbn, cap: u64) -> Result<FccceIter<'_>, SemanticsError> {
    check_cap(fccce_count(cbn), cap)?;
    Ok(FccceIter::new(cbn, false))
}

pub struct CcceIter<'a> {
    cbn: &'a Cbn,
    slots: Slots,
    options: Vec<Vec<usize>>,
    digits: Vec<usize>,
    radices: Vec<usize>,
    done: bool,
}

impl<'a> CcceIter<'a> {
    pub(crate) fn new(cbn: &'a Cbn, positive_only: bool) -> Self {
        let slots = Slots::new(cbn);
        let options = allowed_options(&slots, cbn, positive_only);
        let radices: Vec<usize> = options.iter().map(Vec::len).collect();
        Self {
            cbn,
            done: radices.contains(&0),
            digits: vec![0; radices.len()],
            slots,
            options,
            radices,
        }
    }
}

impl Iterator for CcceIter<'_> {
    type Item = (Ccce, Probability);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let choices: Vec<usize> = self
            .digits
            .iter()
            .enumerate()
            .map(|(s, &d)| self.options[s][d])
            .collect();
        let p = product(&self.slots, self.cbn, choices.iter().copied().enumerate());
        self.done = !advance(&mut self.digits, &self.radices);
        Some((Ccce { choices }, Probability::exact(p)))
    }
}

pub struct FccceIter<'a> {
    cbn: &'a Cbn,
    slots: Slots,
    options: Vec<Vec<usize>>,
    exo: Vec<usize>,
    exo_radices: Vec<usize>,
    exo_digits: Vec<usize>,
    inner: Vec<usize>,
    inner_radices: Vec<usize>,
    inner_digits: Vec<usize>,
    context: Vec<Option<usize>>,
    done: bool,
}

impl<'a> FccceIter<'a> {
    pub(crate) fn new(cbn: &'a Cbn, positive_only: bool) -> Self {
        let slots = Slots::new(cbn);
        let options = allowed_options(&slots, cbn, positive_only);
        let exo = slots.exogenous_slots(cbn);
        let exo_radices: Vec<usize> = exo.iter().map(|&s| options[s].len()).collect();
        let mut it = Self {
            cbn,
            done: exo_radices.contains(&0),
            exo_digits: vec![0; exo.len()],
            exo,
            exo_radices,
            inner: Vec::new(),
            inner_radices: Vec::new(),
            inner_digits: Vec::new(),
            context: vec![None; slots.len()],
            slots,
            options,
        };
        if !it.done {
            it.enter_context();
        }
        it
    }

    /// Loads the context named by `exo_digits`, skipping contexts whose
    /// active slots have no allowed outcome.
    fn enter_context(&mut self) {
        loop {
            self.context.iter_mut().for_each(|c| *c = None);
            for (i, &s) in self.exo.iter().enumerate() {
                self.context[s] = Some(self.options[s][self.exo_digits[i]]);
            }
            self.inner = active_slots(&self.slots, self.cbn, &self.context);
            self.inner_radices = self.inner.iter().map(|&s| self.options[s].len()).collect();
            self.inner_digits = vec![0; self.inner.len()];
            if !self.inner_radices.contains(&0) {
                return;
            }
            if !advance(&mut self.exo_digits, &self.exo_radices) {
                self.done = true;
                return;
            }
        }
    }
}

impl Iterator for FccceIter<'_> {
    type Item = (Fccce, Probability);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut choices = self.context.clone();
        for (i, &s) in self.inner.iter().enumerate() {
            choices[s] = Some(self.options[s][self.inner_digits[i]]);
        }
        let p = product(
            &self.slots,
            self.cbn,
            choices.iter().enumerate().filter_map(|(s, o)| o.map(|o| (s, o))),
        );
        if !advance(&mut self.inner_digits, &self.inner_radices) {
            if advance(&mut self.exo_digits, &self.exo_radices) {
                self.enter_context();
            } else {
                self.done = true;
            }
        }
        Some((Fccce { choices }, Probability::exact(p)))
    }
}

/// Values of every variable in the world reached by applying `world` to the
/// selection, computed on demand. `choose` supplies the outcome of a slot or
/// stops the evaluation.
pub(crate) struct WorldSolver<'a> {
    pub cbn: &'a Cbn,
    pub slots: &'a Slots,
    pub worlds: &'a [Vec<(VarId, usize)>],
    cache: Vec<Vec<Option<usize>>>,
}

impl<'a> WorldSolver<'a> {
    pub fn new(cbn: &'a Cbn, slots: &'a Slots, worlds: &'a [Vec<(VarId, usize)>]) -> Self {
        Self {
            cbn,
            slots,
            worlds,
            cache: vec![vec![None; cbn.len()]; worlds.len()],
        }
    }

    pub fn value<E>(
        &mut self,
        world: usize,
        var: VarId,
        choose: &mut impl FnMut(usize) -> Result<usize, E>,
    ) -> Result<usize, E> {
        if let Some(v) = self.cache[world][var.0] {
            return Ok(v);
        }
        let cbn = self.cbn;
        let v = if let Some(&(_, x)) = self.worlds[world].iter().find(|(w, _)| *w == var) {
            x
        } else if cbn.in_context_table(var) {
            let table = cbn.context_table().expect("context table present");
            let row = choose(self.slots.context.expect("context slot"))?;
            let pos = table.vars().iter().position(|&u| u == var).expect("var in table");
            table.rows()[row].0[pos]
        } else {
            let mut parent_values = Vec::with_capacity(cbn.parents(var).len());
            for &p in cbn.parents(var) {
                parent_values.push(self.value(world, p, choose)?);
            }
            let setting = cbn.cpt(var).expect("cpt").setting_index(&parent_values);
            choose(self.slots.slot_of(var, setting))?
        };
        self.cache[world][var.0] = Some(v);
        Ok(v)
    }
}
