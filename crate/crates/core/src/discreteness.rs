//! Discreteness tests for relative punctured-torus characters by trace
//! dynamics on the Farey tree, after Bowditch.
//!
//! Slopes `p/q` name the simple closed curve in the class `qA + pB`; the
//! base superbase is `(0/1, 1/0, 1/1)` carrying the traces `(x, y, z)`.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::character::{CharacterTriple, REAL_POINT_TOL};
use crate::error::{Error, Result};

/// Largest `|κ + 2|` accepted as a relative character.
pub const RELATIVE_TOL: f64 = 1e-6;

/// Imaginary fattening of the bad interval `[−2, 2]`.
pub const BAD_REGION_FATTENING: f64 = 1e-9;

/// Simple-curve traces below this modulus are excluded by Shimizu's lemma
/// applied to the curve and the parabolic commutator: with the commutator
/// normalized at infinity, the lower-left entry `c` of the curve satisfies
/// `c·w = 2 tr`, and discreteness needs `|c·w| ≥ 1`.
pub const SHIMIZU_BOUND: f64 = 0.5;

/// A slope `p/q` in lowest terms with `q ≥ 0`; `1/0` is the slope `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Slope {
    pub p: i64,
    pub q: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Slope {
    pub const ZERO: Slope = Slope { p: 0, q: 1 };
    pub const INFINITY: Slope = Slope { p: 1, q: 0 };
    pub const ONE: Slope = Slope { p: 1, q: 1 };

    pub fn new(p: i64, q: i64) -> Result<Self> {
        if gcd(p, q) != 1 {
            return Err(Error::InvalidSlope { p, q });
        }
        if q < 0 || (q == 0 && p < 0) {
            Ok(Slope { p: -p, q: -q })
        } else {
            Ok(Slope { p, q })
        }
    }

    pub fn height(&self) -> i64 {
        self.p.abs().max(self.q)
    }

    /// Angle of the vector `(q, p)` in `[0, π)`.
    pub fn angle(&self) -> f64 {
        let a = (self.p as f64).atan2(self.q as f64);
        if a < 0.0 {
            a + PI
        } else {
            a
        }
    }

    fn mediant(a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
        (a.0 + b.0, a.1 + b.1)
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl std::str::FromStr for Slope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("cannot parse slope {s:?}"));
        let s = s.trim();
        if s == "∞" || s == "inf" {
            return Ok(Slope::INFINITY);
        }
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?),
            None => (s.parse().map_err(|_| bad())?, 1),
        };
        Slope::new(p, q)
    }
}

/// Compare `a.0/a.1` with `b.0/b.1` for nonnegative denominators.
fn cmp_frac(a: (i64, i64), b: (i64, i64)) -> Ordering {
    (a.0 as i128 * b.1 as i128).cmp(&(b.0 as i128 * a.1 as i128))
}

/// `(x, y, z) ↦ (x, y, xy − z)`: replaces `z` by the trace of the other
/// curve completing the edge `{x, y}`.
pub fn trace_flip(t: &CharacterTriple) -> CharacterTriple {
    CharacterTriple::new(t.x, t.y, t.x * t.y - t.z)
}

/// One of the three edges of the base triangle together with the vertex
/// across it, from which every other slope is reached.
#[derive(Clone, Copy, Debug)]
struct Edge {
    left: (i64, i64),
    right: (i64, i64),
    t_left: Complex64,
    t_right: Complex64,
    t_across: Complex64,
}

impl Edge {
    fn roots(t: &CharacterTriple) -> [Edge; 3] {
        [
            Edge {
                left: (0, 1),
                right: (1, 1),
                t_left: t.x,
                t_right: t.z,
                t_across: t.y,
            },
            Edge {
                left: (1, 1),
                right: (1, 0),
                t_left: t.z,
                t_right: t.y,
                t_across: t.x,
            },
            Edge {
                left: (-1, 0),
                right: (0, 1),
                t_left: t.y,
                t_right: t.x,
                t_across: t.z,
            },
        ]
    }

    fn mediant(&self) -> ((i64, i64), Complex64) {
        (
            Slope::mediant(self.left, self.right),
            self.t_left * self.t_right - self.t_across,
        )
    }

    fn children(&self) -> [Edge; 2] {
        let (m, tm) = self.mediant();
        [
            Edge {
                left: self.left,
                right: m,
                t_left: self.t_left,
                t_right: tm,
                t_across: self.t_right,
            },
            Edge {
                left: m,
                right: self.right,
                t_left: tm,
                t_right: self.t_right,
                t_across: self.t_left,
            },
        ]
    }
}

/// Trace of the simple closed curve of slope `slope`, reached from the base
/// superbase by flips along the Farey tree. `guard` bounds the number of
/// flips.
pub fn simple_trace(slope: Slope, base: &CharacterTriple, guard: usize) -> Result<Complex64> {
    match (slope.p, slope.q) {
        (0, 1) => return Ok(base.x),
        (1, 0) => return Ok(base.y),
        (1, 1) => return Ok(base.z),
        _ => {}
    }
    let target = (slope.p, slope.q);
    let [low, high, neg] = Edge::roots(base);
    let mut edge = if slope.p < 0 {
        neg
    } else if slope.p < slope.q {
        low
    } else {
        high
    };
    for _ in 0..guard {
        let (m, tm) = edge.mediant();
        let [l, r] = edge.children();
        edge = match cmp_frac(target, m) {
            Ordering::Equal => return Ok(tm),
            Ordering::Less => l,
            Ordering::Greater => r,
        };
    }
    Err(Error::DepthExceeded {
        p: slope.p,
        q: slope.q,
        guard,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BqOptions {
    pub max_depth: usize,
    /// Smallest modulus of a new trace that ends a growing branch.
    pub growth_bound: f64,
    /// Total number of Farey vertices visited before giving up.
    pub max_nodes: usize,
}

impl Default for BqOptions {
    fn default() -> Self {
        BqOptions {
            max_depth: 40,
            growth_bound: 4.0,
            max_nodes: 20_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BqKind {
    Quasifuchsian,
    Fuchsian,
    NotDiscrete,
    Inconclusive,
}

impl BqKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BqKind::Quasifuchsian => "quasifuchsian",
            BqKind::Fuchsian => "fuchsian",
            BqKind::NotDiscrete => "not-discrete",
            BqKind::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for BqKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Witness {
    pub slope: Slope,
    pub trace: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BqVerdict {
    pub kind: BqKind,
    /// Deepest Farey level examined.
    pub depth: usize,
    pub nodes: usize,
    pub witness: Option<Witness>,
}

/// Whether a simple-curve trace rules out a discrete faithful
/// type-preserving representation.
pub fn is_bad_trace(t: Complex64) -> bool {
    (t.im.abs() <= BAD_REGION_FATTENING && t.re.abs() <= 2.0) || t.norm() < SHIMIZU_BOUND
}

/// Bowditch-style search. The Farey tree is explored level by level from
/// the base triangle; a branch ends once both sides of its edge have
/// modulus above 2 and the new trace is at least as large as both and at
/// least `growth_bound`, since every trace beyond it is then larger still.
/// Breadth-first order makes a witness found at some depth persist under
/// any larger `max_depth`.
pub fn bq_test(t: &CharacterTriple, opts: &BqOptions) -> Result<BqVerdict> {
    let residual = t.markov_residual();
    if !(residual <= RELATIVE_TOL) {
        return Err(Error::NotRelative { residual });
    }
    let witness_at = |slope: (i64, i64), trace: Complex64, depth: usize, nodes: usize| BqVerdict {
        kind: BqKind::NotDiscrete,
        depth,
        nodes,
        witness: Some(Witness {
            slope: Slope::new(slope.0, slope.1).expect("Farey vertices are reduced"),
            trace,
        }),
    };
    let mut nodes = 3;
    for (slope, trace) in [((0, 1), t.x), ((1, 0), t.y), ((1, 1), t.z)] {
        if is_bad_trace(trace) {
            return Ok(witness_at(slope, trace, 0, nodes));
        }
    }
    let mut queue: VecDeque<(Edge, usize)> = Edge::roots(t).into_iter().map(|e| (e, 1)).collect();
    let mut depth = 0;
    let mut open = false;
    while let Some((edge, d)) = queue.pop_front() {
        if nodes >= opts.max_nodes {
            open = true;
            break;
        }
        nodes += 1;
        depth = depth.max(d);
        let (m, tm) = edge.mediant();
        if is_bad_trace(tm) {
            return Ok(witness_at(m, tm, d, nodes));
        }
        let (al, ar, am) = (edge.t_left.norm(), edge.t_right.norm(), tm.norm());
        if al > 2.0 && ar > 2.0 && am >= al.max(ar) && am >= opts.growth_bound {
            continue;
        }
        if d >= opts.max_depth {
            open = true;
            continue;
        }
        for child in edge.children() {
            queue.push_back((child, d + 1));
        }
    }
    let kind = if open || !queue.is_empty() {
        BqKind::Inconclusive
    } else if t.relative_imag() <= REAL_POINT_TOL {
        BqKind::Fuchsian
    } else {
        BqKind::Quasifuchsian
    };
    Ok(BqVerdict {
        kind,
        depth,
        nodes,
        witness: None,
    })
}

/// A slope carrying the weight `2πn`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedCurve {
    pub slope: Slope,
    pub n: u32,
    pub weight: f64,
}

/// All `(p/q, 2πn)` with `|p|, q ≤ max_height` and
/// `1 ≤ n ≤ max_weight_multiple`, ordered by the angle of the slope in
/// `[0, π)` and then by `n`.
pub fn enumerate_weighted_curves(max_height: u32, max_weight_multiple: u32) -> Vec<WeightedCurve> {
    let h = max_height as i64;
    let mut slopes: Vec<Slope> = Vec::new();
    for q in 0..=h {
        for p in -h..=h {
            if let Ok(s) = Slope::new(p, q) {
                if s.p == p && s.q == q {
                    slopes.push(s);
                }
            }
        }
    }
    slopes.sort_by(|a, b| a.angle().total_cmp(&b.angle()));
    slopes
        .into_iter()
        .flat_map(|slope| {
            (1..=max_weight_multiple).map(move |n| WeightedCurve {
                slope,
                n,
                weight: 2.0 * PI * n as f64,
            })
        })
        .collect()
}
