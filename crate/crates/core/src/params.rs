//! Parameters of the reduction ODE `f f' = a f + b s + c` and the region
//! `Omega` of the `(s, x)`-plane on which it is well posed.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Sign branch of `a f + c` in the `b = 0` family. For `a = 0` with two
/// admissible half-lines it picks the right (`Plus`) or left (`Minus`) one;
/// ignored otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "plus" | "+" | "p" => Ok(Branch::Plus),
            "minus" | "-" | "m" => Ok(Branch::Minus),
            other => Err(format!("unknown branch '{other}' (expected plus or minus)")),
        }
    }
}

/// The ODE constants `(a, b, c)`, the integration constant `d` and a branch.
///
/// `d` is `f(s)^2 - b s^2 - 2 c s` when `a = 0`, the additive constant of the
/// implicit equation when `b = 0`, and `s + c/b` at the point where `f' = 0`
/// in the general case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicciParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    #[serde(default)]
    pub branch: Branch,
}

impl RicciParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        RicciParams {
            a,
            b,
            c,
            d,
            branch: Branch::Plus,
        }
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    /// `a f + b s + c`, i.e. `f f'` along a solution.
    #[inline]
    pub fn rhs(&self, s: f64, f: f64) -> f64 {
        self.a * f + self.b * s + self.c
    }

    /// `f'` implied by the ODE at `(s, f)`.
    #[inline]
    pub fn slope(&self, s: f64, f: f64) -> f64 {
        self.rhs(s, f) / f
    }

    pub fn is_admissible(&self) -> bool {
        check_admissible(self.a, self.b, self.c)
    }
}

/// The three pieces of the excluded set of constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExcludedSet {
    /// `b = c = 0`, `|a| >= 1`.
    E1,
    /// `b = 0`, `a >= 1`, `c > 0`.
    E2,
    /// `b = 0`, `a <= -1`, `c < 0`.
    E3,
}

impl fmt::Display for ExcludedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExcludedSet::E1 => "ℰ₁",
            ExcludedSet::E2 => "ℰ₂",
            ExcludedSet::E3 => "ℰ₃",
        };
        f.write_str(s)
    }
}

/// Which excluded set contains `(a, b, c)`, if any. Decided by the set
/// definitions; boundary values such as `|a| = 1` are excluded.
pub fn excluded_set(a: f64, b: f64, c: f64) -> Option<ExcludedSet> {
    if b != 0.0 {
        return None;
    }
    if c == 0.0 && a.abs() >= 1.0 {
        Some(ExcludedSet::E1)
    } else if a >= 1.0 && c > 0.0 {
        Some(ExcludedSet::E2)
    } else if a <= -1.0 && c < 0.0 {
        Some(ExcludedSet::E3)
    } else {
        None
    }
}

/// `true` iff `Omega = {(s, x) : x > 0, (a x + b s + c)^2 < x^2}` is nonempty.
pub fn check_admissible(a: f64, b: f64, c: f64) -> bool {
    excluded_set(a, b, c).is_none()
}

/// `(x_coef) x + (s_coef) s + constant = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub x_coef: f64,
    pub s_coef: f64,
    pub constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaRegion {
    /// `(a - 1) x + b s + c = 0`
    pub l1: Line,
    /// `(a + 1) x + b s + c = 0`
    pub l2: Line,
    /// `omega_s = -c/b`: no point of `Omega` has `s` on both sides of it.
    pub barrier_s: Option<f64>,
    /// `omega_x = -c/(2a)`: `Omega = R x (omega_x, +inf)`.
    pub barrier_x: Option<f64>,
    pub nonempty: bool,
}

pub fn omega_region(params: &RicciParams) -> OmegaRegion {
    let RicciParams { a, b, c, .. } = *params;
    let a2 = a * a;
    OmegaRegion {
        l1: Line {
            x_coef: a - 1.0,
            s_coef: b,
            constant: c,
        },
        l2: Line {
            x_coef: a + 1.0,
            s_coef: b,
            constant: c,
        },
        barrier_s: (a2 >= 1.0 && b != 0.0).then(|| -c / b),
        barrier_x: (a2 == 1.0 && b == 0.0).then(|| -c / (2.0 * a)),
        nonempty: check_admissible(a, b, c),
    }
}

/// Membership of `(s, x)` in `Omega`.
pub fn in_omega(params: &RicciParams, s: f64, x: f64) -> bool {
    let r = params.rhs(s, x);
    x > 0.0 && r * r < x * x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility_examples() {
        assert!(!check_admissible(1.0, 0.0, 0.0));
        assert!(check_admissible(0.0, 1.0, 0.0));
        assert!(!check_admissible(1.5, 0.0, 2.0));
        assert_eq!(excluded_set(1.5, 0.0, 2.0), Some(ExcludedSet::E2));
        assert_eq!(excluded_set(-1.0, 0.0, -0.5), Some(ExcludedSet::E3));
        assert_eq!(excluded_set(-1.0, 0.0, 0.0), Some(ExcludedSet::E1));
        // boundary a = 1 with c < 0 is admissible: Omega = R x (omega_x, inf)
        assert!(check_admissible(1.0, 0.0, -2.0));
    }

    #[test]
    fn omega_examples() {
        let o = omega_region(&RicciParams::new(0.0, 1.0, 0.0, 0.0));
        assert!(o.nonempty && o.barrier_s.is_none() && o.barrier_x.is_none());

        let o = omega_region(&RicciParams::new(2.0, 1.0, 3.0, 0.0));
        assert_eq!(o.barrier_s, Some(-3.0));
        assert!(o.nonempty);

        let o = omega_region(&RicciParams::new(1.0, 0.0, -2.0, 0.0));
        assert_eq!(o.barrier_x, Some(1.0));
        assert!(o.barrier_s.is_none() && o.nonempty);
        let p = RicciParams::new(1.0, 0.0, -2.0, 0.0);
        assert!(in_omega(&p, -50.0, 1.0 + 1e-9));
        assert!(!in_omega(&p, 0.0, 1.0));
        assert!(in_omega(&p, 1e3, 7.0));
    }

    #[test]
    fn branch_parses() {
        assert_eq!("minus".parse::<Branch>().unwrap(), Branch::Minus);
        assert_eq!("+".parse::<Branch>().unwrap(), Branch::Plus);
        assert!("sideways".parse::<Branch>().is_err());
    }
}
