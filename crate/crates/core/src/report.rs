//! Invariants of a bundle of symmetric designs: parameters, automorphism
//! group order, self-duality, 2- and 3-rank, isomorphism classes and duality.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::canon::{canonical_form_with, SearchLimits};
use crate::design::IncidenceStructure;
use crate::error::{Error, Result};
use crate::gfrank::{p_rank, PrimeField};
use crate::io::MatrixBundle;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DesignRow {
    pub label: String,
    pub v: usize,
    pub k: usize,
    pub lambda: usize,
    /// Decimal, since orders can exceed 64 bits.
    pub aut_order: String,
    pub self_dual: bool,
    pub rank2: usize,
    pub rank3: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub designs: Vec<DesignRow>,
    /// `isomorphic[i][j]`: designs `i` and `j` are isomorphic.
    pub isomorphic: Vec<Vec<bool>>,
    /// First design isomorphic to the dual of design `i`, if any in the bundle.
    pub dual_of: Vec<Option<usize>>,
    /// Isomorphism classes, counting the duals of the designs as well.
    pub classes_with_duals: usize,
}

struct Computed {
    row: DesignRow,
    form: IncidenceStructure,
    dual_form: IncidenceStructure,
}

fn compute_one(label: String, s: &IncidenceStructure, limits: SearchLimits) -> Result<Computed> {
    let params = s
        .check_2design()
        .map_err(|d| Error::ContractViolation(format!("{label}: not a 2-design ({d})")))?;
    if !params.is_symmetric() {
        return Err(Error::ContractViolation(format!("{label}: {params} is not symmetric")));
    }
    let cf = canonical_form_with(s, limits)?;
    let dual_form = canonical_form_with(&s.dual(), limits)?.canonical_matrix;
    let rank = |p| p_rank(s, PrimeField::new(p).expect("small prime"));
    Ok(Computed {
        row: DesignRow {
            label,
            v: params.v,
            k: params.k,
            lambda: params.lambda,
            aut_order: cf.aut_order.to_string(),
            self_dual: dual_form == cf.canonical_matrix,
            rank2: rank(2),
            rank3: rank(3),
        },
        form: cf.canonical_matrix,
        dual_form,
    })
}

pub fn compute_report(bundle: &MatrixBundle, limits: SearchLimits) -> Result<Report> {
    let computed: Vec<Computed> = (0..bundle.len())
        .into_par_iter()
        .map(|i| compute_one(bundle.name(i), &bundle.structures[i], limits))
        .collect::<Result<_>>()?;
    let n = computed.len();
    let isomorphic = (0..n)
        .map(|i| (0..n).map(|j| computed[i].form == computed[j].form).collect())
        .collect();
    let dual_of = (0..n)
        .map(|i| (0..n).find(|&j| computed[j].form == computed[i].dual_form))
        .collect();
    let mut forms: Vec<&IncidenceStructure> = computed.iter().flat_map(|c| [&c.form, &c.dual_form]).collect();
    forms.sort();
    forms.dedup();
    let classes_with_duals = forms.len();
    Ok(Report {
        schema: SCHEMA,
        designs: computed.into_iter().map(|c| c.row).collect(),
        isomorphic,
        dual_of,
        classes_with_duals,
    })
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.designs.iter().map(|d| d.label.len()).max().unwrap_or(0).max(6);
        writeln!(
            f,
            "{:<width$}  {:<14}  {:>12}  {:>9}  {:>6}  {:>6}",
            "design", "parameters", "|Aut|", "self-dual", "2-rank", "3-rank"
        )?;
        for d in &self.designs {
            writeln!(
                f,
                "{:<width$}  {:<14}  {:>12}  {:>9}  {:>6}  {:>6}",
                d.label,
                format!("2-({},{},{})", d.v, d.k, d.lambda),
                d.aut_order,
                if d.self_dual { "yes" } else { "no" },
                d.rank2,
                d.rank3
            )?;
        }
        writeln!(f)?;
        for (i, d) in self.designs.iter().enumerate() {
            let same: Vec<&str> = (0..self.designs.len())
                .filter(|&j| j != i && self.isomorphic[i][j])
                .map(|j| self.designs[j].label.as_str())
                .collect();
            let dual = match self.dual_of[i] {
                Some(j) if j == i => "itself".to_string(),
                Some(j) => self.designs[j].label.clone(),
                None => "not in bundle".to_string(),
            };
            let same = if same.is_empty() { "none".to_string() } else { same.join(", ") };
            writeln!(f, "{}: isomorphic to {same}; dual is {dual}", d.label)?;
        }
        write!(f, "isomorphism classes including duals: {}", self.classes_with_duals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fano_row() {
        let fano = IncidenceStructure::develop_difference_set(&[0, 1, 3], 7).unwrap();
        let bundle = MatrixBundle::new(vec![fano], vec![Some("fano".into())]).unwrap();
        let r = compute_report(&bundle, SearchLimits::default()).unwrap();
        assert_eq!(r.designs[0].aut_order, "168");
        assert!(r.designs[0].self_dual);
        assert_eq!(r.dual_of, vec![Some(0)]);
        assert_eq!(r.classes_with_duals, 1);
    }

    #[test]
    fn non_designs_are_named() {
        let s = IncidenceStructure::from_blocks(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        let bundle = MatrixBundle::new(vec![s], vec![Some("pairs".into())]).unwrap();
        let err = compute_report(&bundle, SearchLimits::default()).unwrap_err();
        assert!(err.to_string().contains("pairs"), "{err}");
    }
}
