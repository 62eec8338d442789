//! Structural constraint checks for generated molecules.

use crate::graph::MolGraph;
use crate::rings::ring_sizes;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintConfig {
    pub max_ring_size: usize,
    pub max_atoms: usize,
    /// Absorption-wavelength window, checked only when a measured value is
    /// supplied to `constraint_check`.
    pub lambda_min_nm: Option<f64>,
    pub lambda_max_nm: Option<f64>,
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        ConstraintConfig {
            max_ring_size: 6,
            max_atoms: 70,
            lambda_min_nm: None,
            lambda_max_nm: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RingSize { size: usize },
    AtomCount { count: usize },
    Lambda { value_nm: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::RingSize { size } => write!(f, "ring of size {size}"),
            Violation::AtomCount { count } => write!(f, "{count} heavy atoms"),
            Violation::Lambda { value_nm } => {
                write!(f, "absorption at {value_nm} nm outside window")
            }
        }
    }
}

/// All violations of the configured constraints. `lambda_nm` is the measured
/// absorption wavelength when one exists; the wavelength window is skipped
/// otherwise.
pub fn constraint_check(
    mol: &MolGraph,
    config: &ConstraintConfig,
    lambda_nm: Option<f64>,
) -> Vec<Violation> {
    let mut violations = Vec::new();
    if mol.atom_count() > config.max_atoms {
        violations.push(Violation::AtomCount {
            count: mol.atom_count(),
        });
    }
    for size in ring_sizes(mol) {
        if size > config.max_ring_size {
            violations.push(Violation::RingSize { size });
        }
    }
    if let Some(lambda) = lambda_nm {
        let below = config.lambda_min_nm.is_some_and(|lo| lambda < lo);
        let above = config.lambda_max_nm.is_some_and(|hi| lambda > hi);
        if below || above {
            violations.push(Violation::Lambda { value_nm: lambda });
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_smiles;

    #[test]
    fn defaults_pass_small_aromatics() {
        let config = ConstraintConfig::default();
        for smi in ["c1ccccc1", "c1ccc2ccccc2c1", "CC(=O)c1ccccc1"] {
            let mol = parse_smiles(smi).unwrap();
            assert!(constraint_check(&mol, &config, None).is_empty(), "{smi}");
        }
    }

    #[test]
    fn oversized_rings_are_flagged() {
        let config = ConstraintConfig::default();
        let mol = parse_smiles("C1CCCCCC1").unwrap();
        assert_eq!(
            constraint_check(&mol, &config, None),
            vec![Violation::RingSize { size: 7 }]
        );
        let tight = ConstraintConfig {
            max_ring_size: 5,
            ..ConstraintConfig::default()
        };
        let benzene = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(
            constraint_check(&benzene, &tight, None),
            vec![Violation::RingSize { size: 6 }]
        );
    }

    #[test]
    fn atom_budget_is_enforced() {
        let config = ConstraintConfig {
            max_atoms: 4,
            ..ConstraintConfig::default()
        };
        let mol = parse_smiles("CCCCC").unwrap();
        assert_eq!(
            constraint_check(&mol, &config, None),
            vec![Violation::AtomCount { count: 5 }]
        );
    }

    #[test]
    fn wavelength_window_only_applies_when_measured() {
        let config = ConstraintConfig {
            lambda_min_nm: Some(1000.0),
            lambda_max_nm: Some(1400.0),
            ..ConstraintConfig::default()
        };
        let mol = parse_smiles("c1ccccc1").unwrap();
        assert!(constraint_check(&mol, &config, None).is_empty());
        assert_eq!(
            constraint_check(&mol, &config, Some(372.0)),
            vec![Violation::Lambda { value_nm: 372.0 }]
        );
        assert!(constraint_check(&mol, &config, Some(1200.0)).is_empty());
        assert_eq!(
            constraint_check(&mol, &config, Some(1500.0)),
            vec![Violation::Lambda { value_nm: 1500.0 }]
        );
    }
}
