//! JSON state files: the non-zero amplitudes of a sparse state.

use qramforge_core::bits::BasisKey;
use qramforge_core::{Complex64, RegisterMap, SparseState};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const STATE_VERSION: &str = "qramforge-state/1";

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    pub version: String,
    pub width: usize,
    /// Qubit names, index `i` naming character `i` of every bit string.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub qubits: Vec<String>,
    pub amplitudes: Vec<AmplitudeRecord>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeRecord {
    pub bitstring: String,
    pub re: f64,
    pub im: f64,
}

impl StateDocument {
    pub fn new(state: &SparseState, layout: Option<&RegisterMap>) -> Self {
        Self {
            version: STATE_VERSION.to_string(),
            width: state.width(),
            qubits: layout
                .map(|l| l.ids().iter().map(ToString::to_string).collect())
                .unwrap_or_default(),
            amplitudes: state
                .iter()
                .map(|(k, a)| AmplitudeRecord {
                    bitstring: k.to_bitstring(),
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.version != STATE_VERSION {
            return Err(Error::Version {
                found: doc.version,
                expected: STATE_VERSION,
            });
        }
        Ok(doc)
    }

    pub fn to_state(&self) -> Result<SparseState> {
        let entries = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let key = BasisKey::from_bitstring(&a.bitstring)
                    .filter(|k| k.width() == self.width)
                    .ok_or_else(|| {
                        Error::schema(
                            format!("amplitudes[{i}].bitstring"),
                            format!("expected {} characters of 0/1", self.width),
                        )
                    })?;
                Ok((key, Complex64::new(a.re, a.im)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SparseState::from_entries(self.width, entries)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut a = BasisKey::zeros(5);
        a.set(1, true);
        let b = BasisKey::zeros(5);
        let s = SparseState::from_entries(
            5,
            [
                (a, Complex64::new(0.6, 0.0)),
                (b, Complex64::new(0.0, -0.8)),
            ],
        )
        .unwrap();
        let doc = StateDocument::new(&s, None);
        let text = doc.to_json();
        assert!(text.contains("\"01000\""));
        let back = StateDocument::from_json(&text).unwrap();
        assert_eq!(back.to_state().unwrap(), s);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn bad_bitstring() {
        let text = r#"{"version":"qramforge-state/1","width":3,"amplitudes":[{"bitstring":"01","re":1.0,"im":0.0}]}"#;
        let err = StateDocument::from_json(text)
            .unwrap()
            .to_state()
            .unwrap_err();
        assert!(err.to_string().contains("amplitudes[0].bitstring"));
    }
}
