use std::fmt;

use super::ModelError;

/// A set of assignments `V <- v`, kept sorted by variable name so that two
/// sets listing the same assignments in different orders compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct InterventionSet(Vec<(String, String)>);

impl InterventionSet {
    pub fn new<I, N, V>(assignments: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (N, V)>,
        N: Into<String>,
        V: Into<String>,
    {
        let mut pairs: Vec<(String, String)> = assignments
            .into_iter()
            .map(|(n, v)| (n.into(), v.into()))
            .collect();
        pairs.sort();
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(ModelError::DuplicateIntervention(w[0].0.clone()));
        }
        Ok(Self(pairs))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(n, v)| (n.as_str(), v.as_str()))
    }

    pub fn get(&self, variable: &str) -> Option<&str> {
        self.0
            .binary_search_by(|(n, _)| n.as_str().cmp(variable))
            .ok()
            .map(|i| self.0[i].1.as_str())
    }

    pub fn contains(&self, variable: &str) -> bool {
        self.get(variable).is_some()
    }

    pub fn without(&self, variable: &str) -> Self {
        Self(self.0.iter().filter(|(n, _)| n != variable).cloned().collect())
    }
}

impl fmt::Display for InterventionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (n, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}<-{v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_identifies_permutations() {
        let a = InterventionSet::new([("X", "0"), ("Z", "1")]).unwrap();
        let b = InterventionSet::new([("Z", "1"), ("X", "0")]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "X<-0, Z<-1");
        assert_eq!(a.get("Z"), Some("1"));
        assert_eq!(a.without("X").to_string(), "Z<-1");
    }

    #[test]
    fn repeated_variable_is_rejected() {
        assert_eq!(
            InterventionSet::new([("X", "0"), ("X", "1")]),
            Err(ModelError::DuplicateIntervention("X".into()))
        );
    }
}
