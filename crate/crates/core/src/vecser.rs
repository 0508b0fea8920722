//! Serde adapter writing `DVector<f64>` as a flat JSON array.

use nalgebra::DVector;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn serialize<S: Serializer>(v: &DVector<f64>, ser: S) -> Result<S::Ok, S::Error> {
    v.as_slice().serialize(ser)
}

pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<DVector<f64>, D::Error> {
    Vec::<f64>::deserialize(de).map(DVector::from_vec)
}
