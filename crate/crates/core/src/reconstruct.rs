//! Rebuilds the 176-point designs from first principles.
//!
//! Starting from the Higman design built on the Golay code octads:
//!
//! * `Aut` of the design (order 44352000) and of S(5,8,24) come from the
//!   canonical search;
//! * the pointwise stabilizer of the coordinates 0 and 1 in `Aut(S(5,8,24))`
//!   acts on the design; the stabilizer of one point in it has order 2520
//!   and point orbits 1, 70, 105;
//! * the stabilizer of an octad through 0 and 1 has order 5760 and point
//!   orbits 80, 96; the subgroup of order 11520 is generated by it and a
//!   random element of `Aut` normalizing it;
//! * a subgroup `4^3:F21` of order 1344: `4^3` is found inside the
//!   centralizer of an involution fixing 16 points, its normalizer has order
//!   10752, and `F21` comes from one element of order 7 and one of order 3;
//! * a subgroup of order 1000 inside the normalizer (order 2000) of a Sylow
//!   5-subgroup, taken from the centralizer of an element of order 5 fixing
//!   one point;
//! * expanding the decompositions of the Higman design under these groups
//!   yields the other designs.
//!
//! Centralizers and normalizers are computed as automorphism groups of the
//! design with extra gadget blocks attached, which the canonical search
//! handles directly.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use crate::canon;
use crate::classical::{self, HigmanConstruction};
use crate::design::IncidenceStructure;
use crate::error::{Error, Result};
use crate::expand::{expand, ExpansionProblem, ExpansionResult};
use crate::orbmat::{tactical_decomposition, OrbitMatrix};
use crate::permgroup::{PermGroup, Permutation};
use crate::subgroups::{subgroup_classes, ElementTable};

/// Subgroups of the automorphism group of the Higman design, acting on its points.
#[derive(Clone, Debug)]
pub struct HigmanSubgroups {
    pub construction: HigmanConstruction,
    /// Full automorphism group of the design.
    pub full: PermGroup,
    /// Stabilizer of the coordinates 0 and 1 in the octad group.
    pub m22: PermGroup,
    /// Order 2520, point orbits 1, 70, 105.
    pub a7: PermGroup,
    /// Order 5760, stabilizer of an octad through 0 and 1.
    pub hexad: PermGroup,
    /// Order 11520, generated by `hexad` and one normalizing element.
    pub h11520: PermGroup,
}

fn restrict(group: &PermGroup, map: impl Fn(&Permutation) -> Result<Permutation>, degree: usize) -> Result<PermGroup> {
    let gens = group.generators().iter().map(map).collect::<Result<Vec<_>>>()?;
    PermGroup::new(degree, gens)
}

/// Automorphisms of `design` that also preserve `extra` blocks living on
/// `design.v() + extra_points` points, restricted to the design points.
/// Extra points must be told apart from design points by their degrees.
fn stabilizer_with(design: &IncidenceStructure, extra_points: usize, extra: Vec<Vec<usize>>) -> Result<PermGroup> {
    let mut blocks = design.blocks();
    blocks.extend(extra);
    let s = IncidenceStructure::from_blocks(design.v() + extra_points, &blocks)?;
    let g = canon::canonical_form(&s)?.point_group();
    restrict(&g, |p| Permutation::from_images(p.images().take(design.v()).collect()), design.v())
}

/// Centralizer of `x` in the automorphism group of `design`.
pub fn centralizer(design: &IncidenceStructure, x: &Permutation) -> Result<PermGroup> {
    let v = design.v();
    if x.degree() != v {
        return Err(Error::DegreeMismatch { expected: v, found: x.degree() });
    }
    // arc p -> x(p) as a 2-block and a 3-block sharing a private point
    let mut extra = Vec::with_capacity(2 * v);
    for p in 0..v {
        extra.push(vec![p, v + p]);
        extra.push(vec![v + p, 2 * v + p, x.apply(p)]);
    }
    stabilizer_with(design, 2 * v, extra)
}

/// Normalizer of `k` in the automorphism group of `design`. The stabilizer
/// of the orbit partition of `k` is listed element by element, so it has to
/// be small.
pub fn normalizer(design: &IncidenceStructure, k: &PermGroup) -> Result<PermGroup> {
    let v = design.v();
    let orbits = k.orbits();
    let extra = orbits
        .iter()
        .enumerate()
        .map(|(i, o)| o.iter().copied().chain([v + i]).collect())
        .collect();
    let outer = stabilizer_with(design, orbits.len(), extra)?;
    let table = ElementTable::new(&outer)?;
    let mut gens = k.generators().to_vec();
    let mut n = k.clone();
    for i in 0..table.len() as u32 {
        let g = table.permutation(i);
        if !n.contains(&g)? && normalizes(&g, k)? {
            gens.push(g);
            n = PermGroup::new(v, gens.clone())?;
        }
    }
    Ok(n)
}

fn element_of_order<R: Rng + ?Sized>(
    group: &PermGroup,
    p: u64,
    fixed: usize,
    rng: &mut R,
) -> Result<Permutation> {
    for _ in 0..100_000 {
        let g = group.random_element(rng);
        let o = g.order().to_u64().unwrap_or(0);
        if !o.is_multiple_of(p) {
            continue;
        }
        let x = g.pow(o / p);
        if (0..group.degree()).filter(|&i| x.fixes(i)).count() == fixed {
            return Ok(x);
        }
    }
    Err(Error::ContractViolation(format!("no element of order {p} fixing {fixed} points was found")))
}

fn exponent_histogram(group: &PermGroup) -> Result<Vec<usize>> {
    let table = ElementTable::new(group)?;
    let mut h = Vec::new();
    for i in 0..table.len() as u32 {
        let o = table.permutation(i).order().to_usize().unwrap_or(0);
        if h.len() <= o {
            h.resize(o + 1, 0);
        }
        h[o] += 1;
    }
    Ok(h)
}

/// Whether `g` conjugates every generator of `k` into `k`.
pub fn normalizes(g: &Permutation, k: &PermGroup) -> Result<bool> {
    let gi = g.inverse();
    for h in k.generators() {
        if !k.contains(&gi.then(h).then(g))? {
            return Ok(false);
        }
    }
    Ok(true)
}

impl HigmanSubgroups {
    pub fn compute<R: Rng + ?Sized>(rng: &mut R) -> Result<Self> {
        let construction = HigmanConstruction::new();
        let design = &construction.design;
        let full = canon::canonical_form(design)?.point_group();

        let octad_group = canon::canonical_form(&classical::steiner_system_5_8_24())?.point_group();
        let m22_coords = octad_group.pointwise_stabilizer(&[0, 1])?;
        let m22 = restrict(&m22_coords, |g| construction.point_action(g), 176)?;

        let a7 = m22.point_stabilizer(0)?;

        let through_both: Vec<u32> = classical::octads()
            .into_iter()
            .filter(|o| o & 3 == 3)
            .collect();
        // coordinates and the octads through 0 and 1, side by side
        let lift = PermGroup::new(
            24 + through_both.len(),
            m22_coords
                .generators()
                .iter()
                .map(|g| {
                    let on = classical::induced_on_octads(&through_both, g)?;
                    Permutation::from_images(g.images().chain(on.images().map(|y| y + 24)).collect())
                })
                .collect::<Result<Vec<_>>>()?,
        )?;
        let hexad_joint = lift.point_stabilizer(24)?;
        let hexad_coords = restrict(
            &hexad_joint,
            |g| Permutation::from_images(g.images().take(24).collect()),
            24,
        )?;
        let hexad = restrict(&hexad_coords, |g| construction.point_action(g), 176)?;

        let target = BigUint::from(2 * 5760u32);
        let mut h11520 = None;
        for _ in 0..2_000_000 {
            let g = full.random_element(rng);
            if hexad.contains(&g)? || !normalizes(&g, &hexad)? {
                continue;
            }
            let mut gens = hexad.generators().to_vec();
            gens.push(g);
            let candidate = PermGroup::new(176, gens)?;
            if candidate.order() == target {
                h11520 = Some(candidate);
                break;
            }
        }
        let h11520 = h11520.ok_or_else(|| {
            Error::ContractViolation("no element normalizing the octad stabilizer was found".into())
        })?;

        Ok(Self {
            construction,
            full,
            m22,
            a7,
            hexad,
            h11520,
        })
    }

    /// A subgroup `4^3:F21` of order 1344.
    pub fn subgroup_1344<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PermGroup> {
        let design = self.higman();
        let t = element_of_order(&self.full, 2, 16, rng)?;
        let c = centralizer(design, &t)?;
        let homocyclic = subgroup_classes(&c, 64)?
            .into_iter()
            .find(|a| {
                let gens = a.generators();
                let abelian = gens.iter().all(|x| gens.iter().all(|y| x.then(y) == y.then(x)));
                abelian && exponent_histogram(a).is_ok_and(|h| h.len() == 5 && h[4] == 56)
            })
            .ok_or_else(|| Error::ContractViolation("no subgroup 4^3 in the involution centralizer".into()))?;
        let n = normalizer(design, &homocyclic)?;
        for _ in 0..100_000 {
            let y = n.random_element(rng);
            let w = n.random_element(rng);
            let (oy, ow) = (y.order().to_u64().unwrap_or(0), w.order().to_u64().unwrap_or(0));
            if oy % 7 != 0 || ow % 3 != 0 {
                continue;
            }
            let mut gens = homocyclic.generators().to_vec();
            gens.push(y.pow(oy / 7));
            gens.push(w.pow(ow / 3));
            let k = PermGroup::new(design.v(), gens)?;
            if k.order() == BigUint::from(1344u32) {
                return Ok(k);
            }
        }
        Err(Error::ContractViolation("no subgroup of order 1344 was found".into()))
    }

    /// A subgroup of order 1000 with elements of order 8, inside the
    /// normalizer of a Sylow 5-subgroup.
    pub fn subgroup_1000<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PermGroup> {
        let design = self.higman();
        // two classes of such elements; only one centralizer has order divisible by 125
        let mut c = None;
        for _ in 0..100 {
            let x = element_of_order(&self.full, 5, 1, rng)?;
            let cx = centralizer(design, &x)?;
            if (cx.order() % 125u32).is_zero() {
                c = Some(cx);
                break;
            }
        }
        let c = c.ok_or_else(|| Error::ContractViolation("no element of order 5 with a large centralizer".into()))?;
        let sylow = subgroup_classes(&c, 125)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::ContractViolation("no Sylow 5-subgroup in the centralizer".into()))?;
        let n = normalizer(design, &sylow)?;
        for k in subgroup_classes(&n, 1000)? {
            if exponent_histogram(&k)?.get(8).is_some_and(|&c| c > 0) {
                return Ok(k);
            }
        }
        Err(Error::ContractViolation("no subgroup of order 1000 with elements of order 8".into()))
    }

    pub fn higman(&self) -> &IncidenceStructure {
        &self.construction.design
    }

    /// Decomposition of the Higman design under `group`, then expansion of
    /// that orbit matrix over every class of block stabilizers.
    pub fn expand_under(&self, group: &PermGroup) -> Result<(OrbitMatrix, ExpansionResult)> {
        let om = tactical_decomposition(self.higman(), group)?.matrix;
        let problem = ExpansionProblem::new(om.clone(), group.clone());
        Ok((om, expand(&problem)?))
    }
}

/// The five designs, each the non-Higman outcome of one expansion.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub higman: IncidenceStructure,
    /// Point group of order 11520, orbits 80 and 96.
    pub d1: IncidenceStructure,
    /// Point group of order 2520, orbits 1, 70 and 105.
    pub d2: IncidenceStructure,
    /// Point group of order 1344, orbits 64 and 112.
    pub j1344: IncidenceStructure,
    /// Point group of order 1000, orbits 1, 50 and 125. The expansion also
    /// gives its dual; the one with the smaller canonical matrix is kept.
    pub b1000: IncidenceStructure,
}

impl Reconstruction {
    pub fn compute<R: Rng + ?Sized>(rng: &mut R) -> Result<Self> {
        let hs = HigmanSubgroups::compute(rng)?;
        let higman_form = canon::canonical_form(hs.higman())?.canonical_matrix;
        let others = |group: &PermGroup, expected: usize| -> Result<Vec<IncidenceStructure>> {
            let (_, res) = hs.expand_under(group)?;
            let mut out = Vec::new();
            for d in res.designs {
                let form = canon::canonical_form(&d)?.canonical_matrix;
                if form != higman_form {
                    out.push(form);
                }
            }
            if !res.exhausted || out.len() != expected {
                return Err(Error::ContractViolation(format!(
                    "expected {expected} designs besides the Higman design, found {}",
                    out.len()
                )));
            }
            out.sort();
            Ok(out)
        };
        let d1 = others(&hs.h11520, 1)?.remove(0);
        let d2 = others(&hs.a7, 1)?.remove(0);
        let j1344 = others(&hs.subgroup_1344(rng)?, 1)?.remove(0);
        let b1000 = others(&hs.subgroup_1000(rng)?, 2)?.remove(0);
        Ok(Self {
            higman: hs.higman().clone(),
            d1,
            d2,
            j1344,
            b1000,
        })
    }

    /// Labeled designs in the usual table order.
    pub fn labeled(&self) -> Vec<(&'static str, &IncidenceStructure)> {
        vec![
            ("higman", &self.higman),
            ("d1", &self.d1),
            ("d2", &self.d2),
            ("janko", &self.j1344),
            ("bozikov", &self.b1000),
        ]
    }
}
