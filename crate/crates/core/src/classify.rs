//! Case analysis: which family a parameter set belongs to, its maximal
//! interval of definition, curvature sign and geometric descriptors.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RicciError};
use crate::numeric::exact::{is_marginal, sign_c2_minus_bd};
use crate::params::{excluded_set, Branch, RicciParams};
use crate::profile::{GeneralProfile, PartialFractions, RShape, VEnd, VEndKind};

/// Relative gap below which an exactly decided sign is flagged as marginal.
pub const MARGINAL_TOL: f64 = 1e-12;

/// Serde adapter writing infinities as the strings `"inf"` and `"-inf"`.
pub mod ext_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            ser.serialize_f64(*x)
        } else if x.is_nan() {
            ser.serialize_str("nan")
        } else if *x > 0.0 {
            ser.serialize_str("inf")
        } else {
            ser.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        match Repr::deserialize(de)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not an extended real: {other}"))),
            },
        }
    }
}

/// Why an interval ends where it does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndpointKind {
    Infinite,
    /// `|f'| = 1`: a root of `f^2 - (a f + b s + c)^2`.
    PolynomialRoot,
    /// `f` tends to a finite nonzero limit. Not produced by the closed-form
    /// families, whose asymptotes all sit at infinite ends.
    Asymptote,
    /// `s = -c/b`, where the general-case profile reaches the axis.
    Barrier,
    /// `f = 0` at a cone vertex.
    RadicandZero,
    /// A cut chosen by the caller strictly inside the maximal interval.
    Truncation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainInterval {
    #[serde(with = "ext_real")]
    pub lo: f64,
    #[serde(with = "ext_real")]
    pub hi: f64,
    pub lo_kind: EndpointKind,
    pub hi_kind: EndpointKind,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl DomainInterval {
    pub fn real_line() -> Self {
        DomainInterval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            lo_kind: EndpointKind::Infinite,
            hi_kind: EndpointKind::Infinite,
            lo_closed: false,
            hi_closed: false,
        }
    }

    /// `[lo, hi]` with endpoints of the given kinds; a closed endpoint is one
    /// where `|f'| = 1` is attained.
    pub fn new(lo: f64, lo_kind: EndpointKind, hi: f64, hi_kind: EndpointKind) -> Self {
        let closed = |k: EndpointKind| matches!(k, EndpointKind::PolynomialRoot | EndpointKind::Truncation);
        DomainInterval {
            lo,
            hi,
            lo_kind,
            hi_kind,
            lo_closed: closed(lo_kind),
            hi_closed: closed(hi_kind),
        }
    }

    /// A finite sampling window `[lo, hi]`.
    pub fn window(lo: f64, hi: f64) -> Self {
        Self::new(lo, EndpointKind::Truncation, hi, EndpointKind::Truncation)
    }

    pub fn contains(&self, s: f64) -> bool {
        let above = if self.lo_closed { s >= self.lo } else { s > self.lo };
        let below = if self.hi_closed { s <= self.hi } else { s < self.hi };
        above && below
    }

    /// Whether `[lo, hi]` lies in this interval, endpoints included where closed.
    pub fn contains_range(&self, lo: f64, hi: f64) -> bool {
        self.contains(lo) && self.contains(hi)
    }

    pub fn is_complete(&self) -> bool {
        self.lo == f64::NEG_INFINITY
            && self.hi == f64::INFINITY
            && self.lo_kind == EndpointKind::Infinite
            && self.hi_kind == EndpointKind::Infinite
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    FlatCylinder,
    FlatCone,
    FlatPlane,
    /// `a = 0`, `0 < b <= 1`, `K < 0`: complete.
    CatenoidalRicci,
    /// `a = 0`, `b > 1`, `K < 0`: bounded interval.
    NegativeA0,
    PositiveA0,
    /// `b = 0`, `K < 0`, complete.
    FunnelRicci,
    /// `b = 0`, `K < 0`, incomplete.
    NegativeB0,
    PositiveB0,
    GeneralCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KSign {
    Negative,
    Zero,
    Positive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub params: RicciParams,
    #[serde(rename = "case")]
    pub case_tag: CaseTag,
    #[serde(rename = "K_sign")]
    pub k_sign: KSign,
    /// Maximal admissible bound on the domain of the profile.
    pub interval: DomainInterval,
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub catenoid: Option<bool>,
    pub descriptors: BTreeMap<String, f64>,
    /// The deciding discriminant is within a relative `1e-12` of zero.
    pub marginal: bool,
    pub notes: Vec<String>,
}

struct Draft {
    case_tag: CaseTag,
    k_sign: KSign,
    interval: DomainInterval,
    catenoid: Option<bool>,
    descriptors: Vec<(&'static str, f64)>,
    marginal: bool,
    notes: Vec<String>,
}

impl Draft {
    fn new(case_tag: CaseTag, k_sign: KSign, interval: DomainInterval) -> Self {
        Draft {
            case_tag,
            k_sign,
            interval,
            catenoid: None,
            descriptors: Vec::new(),
            marginal: false,
            notes: Vec::new(),
        }
    }

    fn finish(self, params: &RicciParams) -> ClassificationReport {
        ClassificationReport {
            params: *params,
            case_tag: self.case_tag,
            k_sign: self.k_sign,
            complete: self.interval.is_complete(),
            interval: self.interval,
            catenoid: self.catenoid,
            descriptors: self
                .descriptors
                .into_iter()
                .filter(|(_, v)| v.is_finite())
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            marginal: self.marginal,
            notes: self.notes,
        }
    }
}

pub fn classify(params: &RicciParams) -> Result<ClassificationReport> {
    let RicciParams { a, b, c, .. } = *params;
    if let Some(set) = excluded_set(a, b, c) {
        return Err(RicciError::Inadmissible { a, b, c, set });
    }
    let draft = if a == 0.0 {
        classify_a0(params)?
    } else if b == 0.0 {
        classify_b0(params)?
    } else {
        classify_general(params)?
    };
    Ok(draft.finish(params))
}

/// Cone data for `f = m s + r`: half-angle `phi = 2 atan(m / sqrt(1 - m^2))`
/// and vertex height `-(sqrt(1 - m^2)/m) r`.
fn cone_descriptors(m: f64, r: f64) -> Vec<(&'static str, f64)> {
    let w = (1.0 - m * m).sqrt();
    vec![
        ("m", m),
        ("r", r),
        ("phi", 2.0 * (m / w).atan()),
        ("vertex", -(w / m) * r),
        ("apex_s", -r / m),
    ]
}

/// Roots `s1 < s2` of `b(1-b)s^2 + 2(1-b)cs - c^2 + d`, where `|f'| = 1`.
fn a0_roots(b: f64, c: f64, d: f64) -> (f64, f64) {
    let w = ((b * d - c * c) / (b - 1.0)).sqrt();
    let x = -(c + w) / b;
    let y = -(c - w) / b;
    (x.min(y), x.max(y))
}

/// Maximal interval for `a = 0` with `f^2 = b s^2 + 2 c s + d`, taking the
/// right-hand component where two exist.
pub fn maximal_interval_a0(b: f64, c: f64, d: f64) -> Result<DomainInterval> {
    maximal_interval_a0_branch(b, c, d, Branch::Plus)
}

/// As [`maximal_interval_a0`]; `branch` picks the right (`Plus`) or left
/// (`Minus`) component when there are two.
pub fn maximal_interval_a0_branch(b: f64, c: f64, d: f64, branch: Branch) -> Result<DomainInterval> {
    use EndpointKind::*;
    if b == 0.0 && c == 0.0 {
        return Err(RicciError::Degenerate(
            "b = c = 0: f is constant and every s is admissible".into(),
        ));
    }
    let empty = |why: &str| Err(RicciError::EmptyDomain(format!("a = 0, b = {b}, c = {c}, d = {d}: {why}")));
    match sign_c2_minus_bd(b, c, d) {
        Ordering::Equal => {
            if !(b > 0.0 && b <= 1.0) {
                return empty("flat profile with |f'| > 1 or f^2 <= 0");
            }
            let vertex = -c / b;
            Ok(match branch {
                Branch::Plus => DomainInterval::new(vertex, RadicandZero, f64::INFINITY, Infinite),
                Branch::Minus => DomainInterval::new(f64::NEG_INFINITY, Infinite, vertex, RadicandZero),
            })
        }
        Ordering::Less => {
            if b <= 0.0 {
                return empty("K < 0 needs b > 0");
            }
            if b <= 1.0 {
                return Ok(DomainInterval::real_line());
            }
            let (s1, s2) = a0_roots(b, c, d);
            Ok(DomainInterval::new(s1, PolynomialRoot, s2, PolynomialRoot))
        }
        Ordering::Greater => {
            if b < 0.0 {
                let (s1, s2) = a0_roots(b, c, d);
                return Ok(DomainInterval::new(s1, PolynomialRoot, s2, PolynomialRoot));
            }
            if b == 0.0 {
                let s = (c * c - d) / (2.0 * c);
                return Ok(if c > 0.0 {
                    DomainInterval::new(s, PolynomialRoot, f64::INFINITY, Infinite)
                } else {
                    DomainInterval::new(f64::NEG_INFINITY, Infinite, s, PolynomialRoot)
                });
            }
            if b >= 1.0 {
                return empty("K > 0 needs b < 1");
            }
            let (s1, s2) = a0_roots(b, c, d);
            Ok(match branch {
                Branch::Plus => DomainInterval::new(s2, PolynomialRoot, f64::INFINITY, Infinite),
                Branch::Minus => DomainInterval::new(f64::NEG_INFINITY, Infinite, s1, PolynomialRoot),
            })
        }
    }
}

fn classify_a0(params: &RicciParams) -> Result<Draft> {
    let RicciParams { b, c, d, branch, .. } = *params;
    if b == 0.0 && c == 0.0 {
        if d <= 0.0 {
            return Err(RicciError::EmptyDomain(format!("cylinder with d = {d} <= 0")));
        }
        let mut dr = Draft::new(CaseTag::FlatCylinder, KSign::Zero, DomainInterval::real_line());
        dr.descriptors.push(("radius", d.sqrt()));
        return Ok(dr);
    }
    let interval = maximal_interval_a0_branch(b, c, d, branch)?;
    let marginal = is_marginal(c * c, b * d, MARGINAL_TOL);
    let mut dr = match sign_c2_minus_bd(b, c, d) {
        Ordering::Equal => {
            let sigma = branch.sign();
            let m = sigma * b.sqrt();
            let r = sigma * c / b.sqrt();
            let tag = if b == 1.0 { CaseTag::FlatPlane } else { CaseTag::FlatCone };
            let mut dr = Draft::new(tag, KSign::Zero, interval);
            if b == 1.0 {
                dr.descriptors.extend([("m", m), ("r", r), ("z0", 0.0)]);
            } else {
                dr.descriptors.extend(cone_descriptors(m, r));
            }
            dr
        }
        Ordering::Less => {
            let tag = if b <= 1.0 { CaseTag::CatenoidalRicci } else { CaseTag::NegativeA0 };
            let mut dr = Draft::new(tag, KSign::Negative, interval);
            dr.descriptors.push(("neck_radius", ((b * d - c * c) / b).sqrt()));
            dr.descriptors.push(("neck_s", -c / b + 0.0));
            if b <= 1.0 {
                dr.catenoid = Some(b == 1.0);
            } else {
                let (s1, s2) = a0_roots(b, c, d);
                dr.descriptors.extend([("s1", s1), ("s2", s2)]);
            }
            dr
        }
        Ordering::Greater => {
            let mut dr = Draft::new(CaseTag::PositiveA0, KSign::Positive, interval);
            if b != 0.0 {
                let (s1, s2) = a0_roots(b, c, d);
                dr.descriptors.extend([("s1", s1), ("s2", s2)]);
                if b > 0.0 {
                    dr.notes.push(format!(
                        "two admissible half-lines; the {} one was selected by the branch",
                        if branch == Branch::Plus { "right" } else { "left" }
                    ));
                }
            } else {
                dr.descriptors.push(("s_root", (c * c - d) / (2.0 * c)));
            }
            dr
        }
    };
    dr.descriptors.push(("c2_minus_bd", c * c - b * d));
    dr.marginal = marginal;
    Ok(dr)
}

/// `s` where `|f'| = 1` on the `b = 0` branch.
pub fn b0_turning_point(a: f64, c: f64, d: f64, branch: Branch) -> f64 {
    let a2 = a * a;
    match branch {
        Branch::Plus => c / (a * (1.0 - a)) - (c / a2) * (c / (1.0 - a)).ln() - d / a2,
        Branch::Minus => -c / (a * (1.0 + a)) - (c / a2) * (-c / (1.0 + a)).ln() - d / a2,
    }
}

fn classify_b0(params: &RicciParams) -> Result<Draft> {
    use EndpointKind::*;
    let RicciParams { a, c, d, branch, .. } = *params;
    if c == 0.0 {
        // f = a s + d/a
        let vertex = -d / (a * a);
        let interval = if a > 0.0 {
            DomainInterval::new(vertex, RadicandZero, f64::INFINITY, Infinite)
        } else {
            DomainInterval::new(f64::NEG_INFINITY, Infinite, vertex, RadicandZero)
        };
        let mut dr = Draft::new(CaseTag::FlatCone, KSign::Zero, interval);
        dr.descriptors.extend(cone_descriptors(a, d / a));
        return Ok(dr);
    }
    let violation = || {
        Err(RicciError::BranchViolation(format!(
            "no profile with a = {a}, c = {c} on the {branch:?} branch"
        )))
    };
    // (f range lower, f range upper, s-interval kind)
    enum Shape {
        Line,
        Left,
        Right,
    }
    let (f_lo, f_hi, shape) = match branch {
        Branch::Plus if c < 0.0 && a > 0.0 => {
            if a <= 1.0 {
                (-c / a, f64::INFINITY, Shape::Line)
            } else {
                (-c / a, c / (1.0 - a), Shape::Left)
            }
        }
        Branch::Plus if c > 0.0 && a < 1.0 => {
            if a < 0.0 {
                (c / (1.0 - a), -c / a, Shape::Right)
            } else {
                (c / (1.0 - a), f64::INFINITY, Shape::Right)
            }
        }
        Branch::Minus if c > 0.0 && a < 0.0 => {
            if a >= -1.0 {
                (-c / a, f64::INFINITY, Shape::Line)
            } else {
                (-c / a, -c / (1.0 + a), Shape::Right)
            }
        }
        Branch::Minus if c < 0.0 && a > -1.0 => {
            if a > 0.0 {
                (-c / (1.0 + a), -c / a, Shape::Left)
            } else {
                (-c / (1.0 + a), f64::INFINITY, Shape::Left)
            }
        }
        _ => return violation(),
    };
    let k_sign = if c * branch.sign() < 0.0 { KSign::Negative } else { KSign::Positive };
    let s0 = b0_turning_point(a, c, d, branch);
    let interval = match shape {
        Shape::Line => DomainInterval::real_line(),
        Shape::Left => DomainInterval::new(f64::NEG_INFINITY, Infinite, s0, PolynomialRoot),
        Shape::Right => DomainInterval::new(s0, PolynomialRoot, f64::INFINITY, Infinite),
    };
    let tag = match (k_sign, interval.is_complete()) {
        (KSign::Negative, true) => CaseTag::FunnelRicci,
        (KSign::Negative, false) => CaseTag::NegativeB0,
        _ => CaseTag::PositiveB0,
    };
    let mut dr = Draft::new(tag, k_sign, interval);
    if -c / a > 0.0 {
        dr.descriptors.push(("asymptote", -c / a));
    }
    if !matches!(shape, Shape::Line) {
        dr.descriptors.push(("s0", s0));
    }
    dr.descriptors.push(("f_lo", f_lo));
    dr.descriptors.push(("f_hi", f_hi));
    Ok(dr)
}

fn endpoint_of(end: VEnd) -> EndpointKind {
    match end.kind {
        VEndKind::Tangent => EndpointKind::PolynomialRoot,
        VEndKind::Unbounded => EndpointKind::Infinite,
        VEndKind::Apex => EndpointKind::Barrier,
    }
}

fn classify_general(params: &RicciParams) -> Result<Draft> {
    let RicciParams { a, b, c, .. } = *params;
    let gp = GeneralProfile::new(params)?;
    let ((s_lo, e_lo), (s_hi, e_hi)) = gp.s_interval();
    let interval = DomainInterval::new(s_lo, endpoint_of(e_lo), s_hi, endpoint_of(e_hi));
    let k_sign = if b > 0.0 { KSign::Negative } else { KSign::Positive };
    let mut dr = Draft::new(CaseTag::GeneralCase, k_sign, interval);
    dr.descriptors.push(("B", gp.pf.big_b));
    dr.descriptors.push(("discriminant", gp.pf.discriminant()));
    match gp.pf.shape {
        RShape::Distinct { t1, t2 } => dr.descriptors.extend([("t1", t1), ("t2", t2)]),
        RShape::Double => dr.descriptors.extend([("t1", 0.5), ("t2", 0.5)]),
        RShape::Complex { .. } => {}
    }
    dr.descriptors.push(("t0", gp.anchor_t()));
    dr.descriptors.push(("f_t0", gp.f_star));
    dr.descriptors.push(("s_t0", gp.s_at_v(gp.v_star)));
    if e_lo.kind == VEndKind::Apex || e_hi.kind == VEndKind::Apex {
        dr.descriptors.push(("barrier_s", -c / b));
    }
    dr.marginal = is_marginal(a * a, -4.0 * b, MARGINAL_TOL);
    dr.notes.push("t-parametrisation anchored at t0 = -b/a^2, where f' = 0 and f = -b d / a".into());
    Ok(dr)
}

/// One piece of the admissible `t`-set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TInterval {
    #[serde(with = "ext_real")]
    pub lo: f64,
    #[serde(with = "ext_real")]
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl TInterval {
    pub fn contains(&self, t: f64) -> bool {
        let above = if self.lo_closed { t >= self.lo } else { t > self.lo };
        let below = if self.hi_closed { t <= self.hi } else { t < self.hi };
        above && below
    }
}

/// `{t : -1 <= a + b/(a t) <= 1, R(t) != 0}` as a union of intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JSet {
    pub intervals: Vec<TInterval>,
    /// Real roots of `R`.
    pub r_roots: Vec<f64>,
    /// Roots of `R` that were removed from the slope-admissible set.
    pub excluded: Vec<f64>,
}

impl JSet {
    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(t))
    }
}

pub fn general_case_j(a: f64, b: f64) -> JSet {
    // with v = 1/t the slope condition is v in [v_lo, v_hi]
    let e1 = (1.0 - a) * a / b;
    let e2 = (-1.0 - a) * a / b;
    let (v_lo, v_hi) = (e1.min(e2), e1.max(e2));
    let closed = |lo: f64, hi: f64| TInterval {
        lo,
        hi,
        lo_closed: lo.is_finite(),
        hi_closed: hi.is_finite(),
    };
    let mut pieces = if v_lo > 0.0 || v_hi < 0.0 {
        vec![closed(1.0 / v_hi, 1.0 / v_lo)]
    } else if v_lo == 0.0 {
        vec![closed(1.0 / v_hi, f64::INFINITY)]
    } else if v_hi == 0.0 {
        vec![closed(f64::NEG_INFINITY, 1.0 / v_lo)]
    } else {
        vec![closed(f64::NEG_INFINITY, 1.0 / v_lo), closed(1.0 / v_hi, f64::INFINITY)]
    };
    let r_roots = PartialFractions::new(a, b).roots();
    let mut excluded = Vec::new();
    for &r in &r_roots {
        let mut next = Vec::new();
        for p in pieces {
            if !p.contains(r) {
                next.push(p);
                continue;
            }
            excluded.push(r);
            if r > p.lo {
                next.push(TInterval { hi: r, hi_closed: false, ..p });
            }
            if r < p.hi {
                next.push(TInterval { lo: r, lo_closed: false, ..p });
            }
        }
        pieces = next;
    }
    JSet {
        intervals: pieces,
        r_roots,
        excluded,
    }
}

/// A flat profile recognised from samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatDetection {
    pub tag: CaseTag,
    pub descriptors: BTreeMap<String, f64>,
}

/// Recognises `f` affine within `1e-10` across `(s, f)` samples: a cylinder
/// (`m = 0`), plane (`|m| = 1`) or cone (`0 < |m| < 1`), with `r = f(0)`.
pub fn detect_flat(samples: &[(f64, f64)]) -> Option<FlatDetection> {
    const TOL: f64 = 1e-10;
    let (&(s_a, f_a), &(s_b, f_b)) = (samples.first()?, samples.last()?);
    let m = if samples.len() < 2 || s_b == s_a { 0.0 } else { (f_b - f_a) / (s_b - s_a) };
    let r = f_a - m * s_a;
    let affine = samples
        .iter()
        .all(|&(s, f)| (f - (m * s + r)).abs() <= TOL * f.abs().max(1.0));
    if !affine {
        return None;
    }
    let (tag, desc) = if m.abs() <= TOL {
        (CaseTag::FlatCylinder, vec![("radius", f_a)])
    } else if (m.abs() - 1.0).abs() <= TOL {
        (CaseTag::FlatPlane, vec![("m", m.signum()), ("r", r), ("z0", 0.0)])
    } else if m.abs() < 1.0 {
        (CaseTag::FlatCone, cone_descriptors(m, r))
    } else {
        return None;
    };
    Some(FlatDetection {
        tag,
        descriptors: desc.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    })
}
