//! Instance construction from command-line style parameters.

use qramforge_core::verifier::{
    build_qram_instance, build_random_instance, build_rotation_instance, build_table_lookup,
    random_table, Family, InstanceSpec,
};
use qramforge_core::{SynthesisOptions, Variant};

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FamilyKind {
    Qram,
    Lookup,
    Rotation,
    Random,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Qram => "qram",
            FamilyKind::Lookup => "lookup",
            FamilyKind::Rotation => "rotation",
            FamilyKind::Random => "random",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Self::Qram, Self::Lookup, Self::Rotation, Self::Random]
            .into_iter()
            .find(|f| f.name() == name)
    }

    /// Memory width per leaf for this family, checking a requested `k`.
    pub fn mem_width(self, m: usize, k: Option<usize>) -> Result<usize> {
        let forced = match self {
            FamilyKind::Qram | FamilyKind::Rotation => Some(m),
            FamilyKind::Lookup => Some(0),
            FamilyKind::Random => None,
        };
        match (forced, k) {
            (Some(f), Some(k)) if f != k => Err(Error::Usage(format!(
                "family {} fixes the memory width to {f}, got --k {k}",
                self.name()
            ))),
            (Some(f), _) => Ok(f),
            (None, k) => Ok(k.unwrap_or(m)),
        }
    }
}

/// Everything needed to rebuild an instance and its access circuit.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InstanceParams {
    pub n: usize,
    /// For the rotation family this is the memory (fraction) width; the
    /// result register is a single qubit.
    pub m: usize,
    pub k: Option<usize>,
    pub family: FamilyKind,
    pub seed: u64,
    pub variant: Variant,
    pub block_size: Option<usize>,
}

impl InstanceParams {
    pub fn build(&self) -> Result<InstanceSpec> {
        let k = self.family.mem_width(self.m, self.k)?;
        Ok(match self.family {
            FamilyKind::Qram => build_qram_instance(self.n, self.m)?,
            FamilyKind::Lookup => {
                build_table_lookup(self.n, self.m, &random_table(self.n, self.m, self.seed))?
            }
            FamilyKind::Rotation => build_rotation_instance(self.n, self.m)?,
            FamilyKind::Random => {
                build_random_instance(self.n, self.m, &vec![k; 1 << self.n], self.seed)?
            }
        })
    }

    pub fn options(&self) -> Result<SynthesisOptions> {
        match (self.variant, self.block_size) {
            (Variant::Sequential, Some(_)) => Err(Error::Usage(
                "--s only applies to the fanout variant".into(),
            )),
            (Variant::Sequential, None) => Ok(SynthesisOptions::sequential()),
            (Variant::Fanout, s) => {
                let mut o = SynthesisOptions::fanout();
                o.block_size = s;
                Ok(o)
            }
        }
    }

    /// Seed, if the family draws from one.
    pub fn recorded_seed(&self) -> Option<u64> {
        matches!(self.family, FamilyKind::Lookup | FamilyKind::Random).then_some(self.seed)
    }
}

pub(crate) fn family_table(spec: &InstanceSpec) -> Option<Vec<u64>> {
    match spec.family() {
        Family::TableLookup { table } => Some(table.clone()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(family: FamilyKind, k: Option<usize>) -> InstanceParams {
        InstanceParams {
            n: 2,
            m: 2,
            k,
            family,
            seed: 3,
            variant: Variant::Sequential,
            block_size: None,
        }
    }

    #[test]
    fn family_widths() {
        assert_eq!(
            params(FamilyKind::Qram, None).build().unwrap().mem_widths(),
            [2; 4]
        );
        assert_eq!(
            params(FamilyKind::Lookup, None)
                .build()
                .unwrap()
                .mem_widths(),
            [0; 4]
        );
        assert_eq!(
            params(FamilyKind::Random, Some(1))
                .build()
                .unwrap()
                .mem_widths(),
            [1; 4]
        );
        let rot = params(FamilyKind::Rotation, None).build().unwrap();
        assert_eq!(
            (rot.result_width(), rot.mem_widths()),
            (1, &[2usize; 4][..])
        );
        assert!(params(FamilyKind::Qram, Some(1)).build().is_err());
        assert!(params(FamilyKind::Lookup, Some(0)).build().is_ok());
    }

    #[test]
    fn names_round_trip() {
        for f in [
            FamilyKind::Qram,
            FamilyKind::Lookup,
            FamilyKind::Rotation,
            FamilyKind::Random,
        ] {
            assert_eq!(FamilyKind::from_name(f.name()), Some(f));
        }
        assert_eq!(FamilyKind::from_name("other"), None);
    }

    #[test]
    fn block_size_needs_fanout() {
        let mut p = params(FamilyKind::Qram, None);
        p.block_size = Some(1);
        assert!(p.options().is_err());
        p.variant = Variant::Fanout;
        assert_eq!(p.options().unwrap().block_size, Some(1));
    }
}
