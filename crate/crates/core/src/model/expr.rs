use super::VarId;
use crate::error::{Error, Result};

/// Affine expression `Σ coef·var + constant` with one term per variable,
/// kept sorted by variable id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    terms: Vec<(VarId, f64)>,
    constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: value,
        }
    }

    pub fn term(var: VarId, coef: f64) -> Self {
        LinExpr {
            terms: vec![(var, coef)],
            constant: 0.0,
        }
    }

    /// Builds an expression, merging duplicate variables. Coefficients of a
    /// repeated variable are summed in ascending order so the stored value does
    /// not depend on the order the terms arrive in.
    pub fn from_terms(terms: impl IntoIterator<Item = (VarId, f64)>) -> Self {
        let mut raw: Vec<(VarId, f64)> = terms.into_iter().collect();
        raw.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(raw.len());
        for (var, coef) in raw {
            match merged.last_mut() {
                Some((last, acc)) if *last == var => *acc += coef,
                _ => merged.push((var, coef)),
            }
        }
        LinExpr {
            terms: merged,
            constant: 0.0,
        }
    }

    pub fn with_constant(mut self, constant: f64) -> Self {
        self.constant = constant;
        self
    }

    pub fn terms(&self) -> &[(VarId, f64)] {
        &self.terms
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn coefficient(&self, var: VarId) -> f64 {
        self.terms
            .binary_search_by(|(v, _)| v.cmp(&var))
            .map(|i| self.terms[i].1)
            .unwrap_or(0.0)
    }

    pub fn add_term(&mut self, var: VarId, coef: f64) {
        match self.terms.binary_search_by(|(v, _)| v.cmp(&var)) {
            Ok(i) => self.terms[i].1 += coef,
            Err(i) => self.terms.insert(i, (var, coef)),
        }
    }

    pub fn plus(mut self, other: &LinExpr) -> Self {
        for &(var, coef) in &other.terms {
            self.add_term(var, coef);
        }
        self.constant += other.constant;
        self
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for (_, c) in &mut self.terms {
            *c *= factor;
        }
        self.constant *= factor;
        self
    }

    pub fn value(&self, values: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|&(v, c)| c * values[v.0])
            .sum::<f64>()
            + self.constant
    }
}

/// `scale · sqrt(Σ (coef·var)² + constant_inside)`, added to the left-hand
/// side of a `<=` row.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeTerm {
    scale: f64,
    components: Vec<(VarId, f64)>,
    constant_inside: f64,
}

impl ConeTerm {
    pub fn new(scale: f64, components: Vec<(VarId, f64)>, constant_inside: f64) -> Result<Self> {
        let cone = ConeTerm {
            scale,
            components,
            constant_inside,
        };
        cone.validate()?;
        Ok(cone)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale >= 0.0) {
            return Err(Error::InvalidCone(format!("scale {} must be >= 0", self.scale)));
        }
        if !(self.constant_inside.is_finite() && self.constant_inside >= 0.0) {
            return Err(Error::InvalidCone(format!(
                "constant {} must be >= 0",
                self.constant_inside
            )));
        }
        if self.components.iter().any(|(_, c)| !c.is_finite()) {
            return Err(Error::InvalidCone("non-finite component coefficient".into()));
        }
        Ok(())
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn components(&self) -> &[(VarId, f64)] {
        &self.components
    }

    pub fn constant_inside(&self) -> f64 {
        self.constant_inside
    }

    /// The radical `sqrt(Σ (coef·var)² + constant)` without the scale.
    pub fn radical(&self, values: &[f64]) -> f64 {
        let sum: f64 = self
            .components
            .iter()
            .map(|&(v, c)| {
                let t = c * values[v.0];
                t * t
            })
            .sum();
        (sum + self.constant_inside).sqrt()
    }

    pub fn value(&self, values: &[f64]) -> f64 {
        self.scale * self.radical(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn shuffled_terms_merge_identically(
            raw in prop::collection::vec((0usize..5, -100.0f64..100.0), 0..20),
            seed in any::<u64>(),
        ) {
            let terms: Vec<(VarId, f64)> = raw.iter().map(|&(v, c)| (VarId(v), c)).collect();
            let mut shuffled = terms.clone();
            // deterministic Fisher-Yates driven by the seed
            let mut s = seed | 1;
            for i in (1..shuffled.len()).rev() {
                s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                shuffled.swap(i, (s % (i as u64 + 1)) as usize);
            }
            let a = LinExpr::from_terms(terms);
            let b = LinExpr::from_terms(shuffled);
            prop_assert_eq!(a.terms(), b.terms());
            prop_assert!(a.terms().windows(2).all(|w| w[0].0 < w[1].0));
        }
    }

    #[test]
    fn cone_value() {
        let cone = ConeTerm::new(2.0, vec![(VarId(0), 3.0), (VarId(1), 4.0)], 0.0).unwrap();
        assert_eq!(cone.value(&[1.0, 1.0]), 10.0);
        assert!(ConeTerm::new(-1.0, vec![], 0.0).is_err());
        assert!(ConeTerm::new(1.0, vec![], -1.0).is_err());
    }
}
