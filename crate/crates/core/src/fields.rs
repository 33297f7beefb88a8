//! Domain newtypes over [`ScalarField`]: the phase discontinuity `psi` and the
//! convex potential `phi`.

use std::ops::{Deref, DerefMut};

use crate::grid::ScalarField;

/// Phase discontinuity on the plane `z = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField(pub ScalarField);

/// Convex potential whose gradient is the transport map.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField(pub ScalarField);

macro_rules! field_newtype {
    ($t:ty) => {
        impl Deref for $t {
            type Target = ScalarField;
            fn deref(&self) -> &ScalarField {
                &self.0
            }
        }

        impl DerefMut for $t {
            fn deref_mut(&mut self) -> &mut ScalarField {
                &mut self.0
            }
        }

        impl From<ScalarField> for $t {
            fn from(f: ScalarField) -> Self {
                Self(f)
            }
        }
    };
}

field_newtype!(PhaseField);
field_newtype!(PotentialField);
