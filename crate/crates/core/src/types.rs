//! Domain value types shared by every part of the optimizer.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::neural::MlpLayout;

/// Flat parameter vector of a policy network, tagged with the layout it instantiates.
#[derive(Clone, Debug, PartialEq)]
pub struct Genotype {
    params: Vec<f64>,
    layout_id: String,
}

impl Genotype {
    pub fn new(params: Vec<f64>, layout: &MlpLayout) -> Result<Self> {
        if params.len() != layout.num_params() {
            return Err(Error::LayoutMismatch(format!(
                "{} parameters for layout {} (expects {})",
                params.len(),
                layout.id(),
                layout.num_params()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("genotype"));
        }
        Ok(Genotype {
            params,
            layout_id: layout.id(),
        })
    }

    /// Rebuilds a genotype from a serialized layout identifier.
    pub fn from_layout_id(layout_id: &str, params: Vec<f64>) -> Result<Self> {
        let layout = MlpLayout::from_id(layout_id)?;
        Genotype::new(params, &layout)
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn into_params(self) -> Vec<f64> {
        self.params
    }

    pub fn layout_id(&self) -> &str {
        &self.layout_id
    }

    pub fn layout(&self) -> Result<MlpLayout> {
        MlpLayout::from_id(&self.layout_id)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }
}

macro_rules! real_vector {
    ($(#[$meta:meta])* $name:ident, $what:literal) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name(Vec<f64>);

        impl $name {
            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.0
            }
        }

        impl Deref for $name {
            type Target = [f64];

            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl AsRef<[f64]> for $name {
            fn as_ref(&self) -> &[f64] {
                &self.0
            }
        }

        impl TryFrom<Vec<f64>> for $name {
            type Error = Error;

            fn try_from(values: Vec<f64>) -> Result<Self> {
                $name::new(values)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}(", $what)?;
                for (i, v) in self.0.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ")")
            }
        }
    };
}

real_vector!(
    /// Per-objective undiscounted episode returns.
    FitnessVector,
    "fitness"
);

real_vector!(
    /// Behaviour descriptor; every entry is an occupancy proportion in `[0, 1]`.
    Feature,
    "feature"
);

real_vector!(
    /// Non-negative objective weights summing to one.
    Preference,
    "preference"
);

impl FitnessVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("fitness"));
        }
        Ok(FitnessVector(values))
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl Feature {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature"));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!(
                "feature entry {v} outside [0, 1]"
            )));
        }
        Ok(Feature(values))
    }
}

impl Preference {
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("preference"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(
                "preference weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "preference weights sum to {total}, not 1"
            )));
        }
        Ok(Preference(weights))
    }

    /// Canonical basis preference selecting objective `index`.
    pub fn one_hot(m: usize, index: usize) -> Self {
        assert!(index < m, "one-hot index {index} out of range for {m} objectives");
        let mut w = vec![0.0; m];
        w[index] = 1.0;
        Preference(w)
    }

    pub fn is_one_hot(&self) -> bool {
        self.0.iter().filter(|&&w| w == 1.0).count() == 1
            && self.0.iter().filter(|&&w| w == 0.0).count() == self.0.len() - 1
    }

    /// Scalarizes a vector with these weights.
    pub fn dot(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.0.len());
        self.0.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// How a solution was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Origin {
    Random,
    Ga,
    Pg,
    ActorInjection,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Random => "random",
            Origin::Ga => "ga",
            Origin::Pg => "pg",
            Origin::ActorInjection => "actor_injection",
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Origin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Origin::Random),
            "ga" => Ok(Origin::Ga),
            "pg" => Ok(Origin::Pg),
            "actor_injection" => Ok(Origin::ActorInjection),
            other => Err(Error::InvalidArgument(format!("unknown origin `{other}`"))),
        }
    }
}

/// An evaluated genotype.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub genotype: Genotype,
    pub fitness: FitnessVector,
    pub feature: Feature,
    pub origin: Origin,
    /// Preference the most recent gradient-based variation was conditioned on.
    pub pref: Option<Preference>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preference_validation() {
        assert!(Preference::new(vec![0.5, 0.5]).is_ok());
        assert!(Preference::new(vec![0.5, 0.6]).is_err());
        assert!(Preference::new(vec![1.5, -0.5]).is_err());
        assert!(Preference::new(vec![]).is_err());
        assert!(Preference::one_hot(3, 1).is_one_hot());
        assert!(!Preference::new(vec![0.5, 0.5]).unwrap().is_one_hot());
    }

    #[test]
    fn feature_bounds() {
        assert!(Feature::new(vec![0.0, 1.0]).is_ok());
        assert!(Feature::new(vec![1.01]).is_err());
        assert!(Feature::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn fitness_rejects_non_finite() {
        assert!(FitnessVector::new(vec![1.0, f64::INFINITY]).is_err());
        assert_eq!(FitnessVector::new(vec![1.0, 2.0]).unwrap().sum(), 3.0);
    }

    #[test]
    fn origin_round_trip() {
        for o in [Origin::Random, Origin::Ga, Origin::Pg, Origin::ActorInjection] {
            assert_eq!(o.as_str().parse::<Origin>().unwrap(), o);
        }
        assert!("mutant".parse::<Origin>().is_err());
    }
}
