//! Finite-stage join of copies of a structure group.
//!
//! A point of the stage-`N` join is a finitely supported weighted tuple
//! of group elements with weights summing to 1.  Zero-weight slots are
//! not stored; forgetting them is exactly the equivalence freedom of the
//! join construction.  The group acts by right multiplication with the
//! inverse, the slot weights are the canonical partition functions, and
//! the weighted sum of Maurer-Cartan evaluations along a curve realises
//! the universal connection.

use crate::error::{Error, Result};
use crate::lie_group::{AlgebraElement, GroupElement, GroupSpec, GROUP_TOL};

/// Tolerance for weight bookkeeping (sums, comparisons at canonical form).
pub const WEIGHT_TOL: f64 = 1e-12;

/// One stored slot of a join point.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinEntry {
    pub slot: usize,
    pub weight: f64,
    pub element: GroupElement,
}

/// Weighted tuple with strictly positive stored weights, strictly
/// increasing slots, and weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinPoint {
    stage: usize,
    entries: Vec<JoinEntry>,
}

/// Canonical representative of a group orbit in the join: the element at
/// the lowest stored slot is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct BGPoint {
    point: JoinPoint,
}

impl JoinPoint {
    /// Builds a join point from parallel weight/element arrays; position
    /// `i` is slot `i`.  Zero weights are dropped, the rest renormalised
    /// to sum exactly 1.
    pub fn make(weights: &[f64], elements: &[GroupElement], stage: usize) -> Result<JoinPoint> {
        if weights.len() != elements.len() {
            return Err(Error::InvalidWeights(format!(
                "{} weights vs {} elements",
                weights.len(),
                elements.len()
            )));
        }
        let entries: Vec<JoinEntry> = weights
            .iter()
            .zip(elements)
            .enumerate()
            .filter(|(_, (w, _))| **w != 0.0)
            .map(|(slot, (w, g))| JoinEntry {
                slot,
                weight: *w,
                element: g.clone(),
            })
            .collect();
        JoinPoint::from_entries(entries, stage)
    }

    /// Builds a join point from sparse entries (slots need not be dense).
    pub fn from_entries(entries: Vec<JoinEntry>, stage: usize) -> Result<JoinPoint> {
        let mut entries: Vec<JoinEntry> =
            entries.into_iter().filter(|e| e.weight != 0.0).collect();
        entries.sort_by_key(|e| e.slot);
        if entries.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut sum = 0.0;
        for (i, e) in entries.iter().enumerate() {
            if e.weight < 0.0 {
                return Err(Error::InvalidWeights(format!(
                    "negative weight {} at slot {}",
                    e.weight, e.slot
                )));
            }
            if e.slot >= stage {
                return Err(Error::SlotOutOfRange {
                    slot: e.slot,
                    stage,
                });
            }
            if i > 0 && entries[i - 1].slot == e.slot {
                return Err(Error::InvalidWeights(format!("duplicate slot {}", e.slot)));
            }
            sum += e.weight;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        for e in &mut entries {
            e.weight /= sum;
        }
        Ok(JoinPoint { stage, entries })
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn entries(&self) -> &[JoinEntry] {
        &self.entries
    }

    /// Stored weight at `slot`, or 0 if the slot is hidden.
    pub fn weight_at(&self, slot: usize) -> f64 {
        self.entries
            .iter()
            .find(|e| e.slot == slot)
            .map(|e| e.weight)
            .unwrap_or(0.0)
    }

    pub fn element_at(&self, slot: usize) -> Option<&GroupElement> {
        self.entries
            .iter()
            .find(|e| e.slot == slot)
            .map(|e| &e.element)
    }

    pub fn weight_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }

    /// Re-embeds the point at a larger stage.
    pub fn at_stage(&self, stage: usize) -> Result<JoinPoint> {
        let max_slot = self.entries.last().map(|e| e.slot).unwrap_or(0);
        if stage <= max_slot {
            return Err(Error::StageOverflow {
                needed: max_slot + 1,
                stage,
            });
        }
        Ok(JoinPoint {
            stage,
            entries: self.entries.clone(),
        })
    }
}

impl BGPoint {
    pub fn as_join(&self) -> &JoinPoint {
        &self.point
    }

    pub fn stage(&self) -> usize {
        self.point.stage
    }

    pub fn entries(&self) -> &[JoinEntry] {
        &self.point.entries
    }

    /// Componentwise equality: same support, weights within `WEIGHT_TOL`,
    /// elements within group tolerance.
    pub fn approx_eq(&self, other: &BGPoint, spec: &GroupSpec) -> Result<bool> {
        if self.point.stage != other.point.stage
            || self.point.entries.len() != other.point.entries.len()
        {
            return Ok(false);
        }
        for (a, b) in self.point.entries.iter().zip(&other.point.entries) {
            if a.slot != b.slot || (a.weight - b.weight).abs() > WEIGHT_TOL {
                return Ok(false);
            }
            if !spec.equal(&a.element, &b.element, GROUP_TOL)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Join equivalence: stored supports coincide, weights match within
/// 1e-9, elements match at every common slot in the group metric (the
/// irrational torus compares by bounded lattice search).
pub fn join_equiv(spec: &GroupSpec, p: &JoinPoint, q: &JoinPoint) -> Result<bool> {
    if p.stage != q.stage {
        return Err(Error::KindMismatch(format!(
            "stage mismatch: {} vs {}",
            p.stage, q.stage
        )));
    }
    if p.entries.len() != q.entries.len() {
        return Ok(false);
    }
    for (a, b) in p.entries.iter().zip(&q.entries) {
        if a.slot != b.slot || (a.weight - b.weight).abs() > 1e-9 {
            return Ok(false);
        }
        if !spec.equal(&a.element, &b.element, GROUP_TOL)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Group action: every stored element is right-multiplied by `h^{-1}`,
/// weights unchanged.  Composition satisfies
/// `act(h, act(k, p)) = act(mul(h, k), p)`.
pub fn act(spec: &GroupSpec, h: &GroupElement, p: &JoinPoint) -> Result<JoinPoint> {
    let h_inv = spec.inv(h)?;
    let entries = p
        .entries
        .iter()
        .map(|e| {
            Ok(JoinEntry {
                slot: e.slot,
                weight: e.weight,
                element: spec.mul(&e.element, &h_inv)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JoinPoint {
        stage: p.stage,
        entries,
    })
}

/// Partition function on the join: the stored weight at `slot`.
pub fn s_j(p: &JoinPoint, slot: usize) -> f64 {
    p.weight_at(slot)
}

/// The descended partition function on the quotient; equals `s_j` on any
/// representative.
pub fn zeta_j(b: &BGPoint, slot: usize) -> f64 {
    b.point.weight_at(slot)
}

/// Canonical quotient representative: translate so the element at the
/// minimal stored slot becomes the identity.
pub fn to_bg(spec: &GroupSpec, p: &JoinPoint) -> Result<BGPoint> {
    let lead = p.entries.first().ok_or(Error::EmptySupport)?;
    let point = act(spec, &lead.element.clone(), p)?;
    Ok(BGPoint { point })
}

/// Local trivialisation over the chart where `slot` has positive weight:
/// returns the fiber coordinate and the quotient point.
pub fn phi_j(spec: &GroupSpec, p: &JoinPoint, slot: usize) -> Result<(GroupElement, BGPoint)> {
    let g = p
        .element_at(slot)
        .cloned()
        .ok_or(Error::ZeroWeightSlot(slot))?;
    let translated = act(spec, &g, p)?;
    Ok((g, to_bg(spec, &translated)?))
}

/// Inverse of `phi_j`: rebuilds the join point whose `slot` coordinate is
/// `k` from a quotient representative.
pub fn phi_j_inverse(
    spec: &GroupSpec,
    k: &GroupElement,
    b: &BGPoint,
    slot: usize,
) -> Result<JoinPoint> {
    let at_slot = b
        .point
        .element_at(slot)
        .cloned()
        .ok_or(Error::ZeroWeightSlot(slot))?;
    // Representative with the identity at `slot`, then install `k` there.
    let rep = act(spec, &at_slot, &b.point)?;
    act(spec, &spec.inv(k)?, &rep)
}

/// Universal connection evaluated on a curve through the pre-quotient
/// tuples: the weighted sum of Maurer-Cartan values of the slot
/// velocities, with velocities taken by central differences of step `h`.
///
/// `gamma` must expose the same stored support at `t0` and `t0 +- h`.
pub fn universal_connection<F>(
    spec: &GroupSpec,
    gamma: F,
    t0: f64,
    h: f64,
) -> Result<AlgebraElement>
where
    F: Fn(f64) -> Result<JoinPoint>,
{
    if h <= 0.0 {
        return Err(Error::InvalidParameter("step h must be positive".into()));
    }
    let center = gamma(t0)?;
    let plus = gamma(t0 + h)?;
    let minus = gamma(t0 - h)?;
    let mut total = spec.zero_algebra();
    for e in &center.entries {
        let gp = plus
            .element_at(e.slot)
            .ok_or_else(|| Error::InvalidCurve(format!("slot {} disappears at t0 + h", e.slot)))?;
        let gm = minus
            .element_at(e.slot)
            .ok_or_else(|| Error::InvalidCurve(format!("slot {} disappears at t0 - h", e.slot)))?;
        let velocity = ambient_difference(spec, gp, gm, 2.0 * h)?;
        let mc = spec.maurer_cartan(&e.element, &velocity)?;
        total = spec.algebra_add(&total, &spec.algebra_scale(e.weight, &mc));
    }
    if spec.algebra_norm(&total).is_finite() {
        Ok(total)
    } else {
        Err(Error::NonFinite("universal connection value".into()))
    }
}

/// Central-difference tangent between nearby group elements, in ambient
/// coordinates.  Circle and torus angles are unwrapped to the nearest
/// representative; irrational-torus lifts subtract directly.
fn ambient_difference(
    spec: &GroupSpec,
    plus: &GroupElement,
    minus: &GroupElement,
    span: f64,
) -> Result<AlgebraElement> {
    let wrap = |d: f64| {
        let mut r = d % std::f64::consts::TAU;
        if r > std::f64::consts::PI {
            r -= std::f64::consts::TAU;
        }
        if r < -std::f64::consts::PI {
            r += std::f64::consts::TAU;
        }
        r
    };
    Ok(match (plus, minus) {
        (GroupElement::Angle(a), GroupElement::Angle(b)) => {
            AlgebraElement::Scalar(wrap(a - b) / span)
        }
        (GroupElement::Angles(a), GroupElement::Angles(b)) => AlgebraElement::Vector(
            a.iter().zip(b).map(|(x, y)| wrap(x - y) / span).collect(),
        ),
        (GroupElement::Lift(a), GroupElement::Lift(b)) => AlgebraElement::Scalar((a - b) / span),
        (GroupElement::Matrix(a), GroupElement::Matrix(b)) => {
            AlgebraElement::Matrix((a - b) / span)
        }
        _ => {
            return Err(Error::KindMismatch(format!(
                "curve samples of different kinds for {}",
                spec.kind_name()
            )))
        }
    })
}
