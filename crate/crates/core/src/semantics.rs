//! Finite monoids, M-sets and their existence and presence modes.
//!
//! An M-set is a carrier with a left action of a monoid. The existence mode
//! of `x` is its orbit `M·x`; its presence mode is the orbit `U·x` under the
//! unit group. Members of `M·x` outside `U·x` are imperceptible from `x`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on `size × carrier` action entries (and on `size²`).
pub const MAX_ENTRIES: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteMonoid {
    pub size: usize,
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteAction {
    pub monoid: FiniteMonoid,
    #[serde(rename = "carrier")]
    pub carrier_size: usize,
    pub action: Vec<Vec<usize>>,
}

/// One failed law instance. Indices refer to monoid elements (`a`, `b`, `c`)
/// or carrier points (`x`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Violation {
    Associativity { a: usize, b: usize, c: usize },
    LeftIdentity { a: usize },
    RightIdentity { a: usize },
    ActionIdentity { x: usize },
    ActionCompatibility { a: usize, b: usize, x: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModeReport {
    /// Connected components of the orbit relation.
    pub existence_modes: Vec<Vec<usize>>,
    /// Orbits of the unit group; these partition the carrier.
    pub presence_modes: Vec<Vec<usize>>,
    /// `orbit[x] = M·x`.
    pub orbit: Vec<Vec<usize>>,
    /// `presence[x] = U·x`.
    pub presence: Vec<Vec<usize>>,
    /// `imperceptible[x] = M·x \ U·x`.
    pub imperceptible: Vec<Vec<usize>>,
}

impl FiniteMonoid {
    pub fn new(table: Vec<Vec<usize>>, identity: usize) -> Result<Self> {
        let m = Self {
            size: table.len(),
            table,
            identity,
        };
        m.check_shape()?;
        Ok(m)
    }

    /// Multiplication table of a cyclic group of order `n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        Self::new((0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect(), 0)
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    fn check_shape(&self) -> Result<()> {
        let s = self.size;
        if s == 0 {
            return Err(Error::validation("monoid must have at least one element"));
        }
        if s.saturating_mul(s) > MAX_ENTRIES {
            return Err(Error::validation(format!("monoid table exceeds {MAX_ENTRIES} entries")));
        }
        if self.table.len() != s || self.table.iter().any(|row| row.len() != s) {
            return Err(Error::validation(format!("monoid table must be {s}x{s}")));
        }
        if self.identity >= s {
            return Err(Error::validation(format!("identity index {} out of range", self.identity)));
        }
        if let Some(v) = self.table.iter().flatten().find(|&&v| v >= s) {
            return Err(Error::validation(format!("monoid table entry {v} out of range")));
        }
        Ok(())
    }

    /// Monoid law violations, after checking index ranges.
    pub fn violations(&self) -> Result<Vec<Violation>> {
        self.check_shape()?;
        let s = self.size;
        let e = self.identity;
        let mut out = Vec::new();
        for a in 0..s {
            if self.mul(e, a) != a {
                out.push(Violation::LeftIdentity { a });
            }
            if self.mul(a, e) != a {
                out.push(Violation::RightIdentity { a });
            }
        }
        for a in 0..s {
            for b in 0..s {
                for c in 0..s {
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                        out.push(Violation::Associativity { a, b, c });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Elements with a two-sided inverse, ascending.
    pub fn units(&self) -> Vec<usize> {
        (0..self.size)
            .filter(|&u| (0..self.size).any(|v| self.mul(u, v) == self.identity && self.mul(v, u) == self.identity))
            .collect()
    }

    /// Proxy for booleanity of the M-set universe: every element is a unit.
    pub fn booleanity_proxy(&self) -> bool {
        self.units().len() == self.size
    }
}

impl FiniteAction {
    pub fn new(monoid: FiniteMonoid, action: Vec<Vec<usize>>) -> Result<Self> {
        let carrier_size = action.first().map_or(0, Vec::len);
        let a = Self {
            monoid,
            carrier_size,
            action,
        };
        a.check_shape()?;
        Ok(a)
    }

    /// The monoid acting on itself by left multiplication.
    pub fn regular(monoid: FiniteMonoid) -> Result<Self> {
        let action = monoid.table.clone();
        Self::new(monoid, action)
    }

    /// Every element acting as the identity on `carrier` points.
    pub fn trivial(monoid: FiniteMonoid, carrier: usize) -> Result<Self> {
        let action = vec![(0..carrier).collect(); monoid.size];
        Self::new(monoid, action)
    }

    pub fn act(&self, m: usize, x: usize) -> usize {
        self.action[m][x]
    }

    fn check_shape(&self) -> Result<()> {
        self.monoid.check_shape()?;
        let (s, c) = (self.monoid.size, self.carrier_size);
        if c == 0 {
            return Err(Error::validation("carrier must have at least one point"));
        }
        if s.saturating_mul(c) > MAX_ENTRIES {
            return Err(Error::validation(format!("action table exceeds {MAX_ENTRIES} entries")));
        }
        if self.action.len() != s || self.action.iter().any(|row| row.len() != c) {
            return Err(Error::validation(format!("action table must be {s}x{c}")));
        }
        if let Some(v) = self.action.iter().flatten().find(|&&v| v >= c) {
            return Err(Error::validation(format!("action entry {v} out of range")));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: Self = serde_json::from_str(text).map_err(|e| Error::validation(format!("invalid M-set model: {e}")))?;
        a.check_shape()?;
        Ok(a)
    }
}

/// Exhaustive check of the monoid laws and both action laws.
pub fn validate_model(a: &FiniteAction) -> Result<ValidationReport> {
    a.check_shape()?;
    let m = &a.monoid;
    let mut violations = m.violations()?;
    for x in 0..a.carrier_size {
        if a.act(m.identity, x) != x {
            violations.push(Violation::ActionIdentity { x });
        }
    }
    for p in 0..m.size {
        for q in 0..m.size {
            for x in 0..a.carrier_size {
                if a.act(m.mul(p, q), x) != a.act(p, a.act(q, x)) {
                    violations.push(Violation::ActionCompatibility { a: p, b: q, x });
                }
            }
        }
    }
    Ok(ValidationReport {
        valid: violations.is_empty(),
        violations,
    })
}

fn orbit_under(a: &FiniteAction, elements: &[usize], x: usize) -> Vec<usize> {
    elements.iter().map(|&m| a.act(m, x)).collect::<BTreeSet<_>>().into_iter().collect()
}

/// Existence and presence modes of a valid M-set.
pub fn orbits(a: &FiniteAction) -> ModeReport {
    let c = a.carrier_size;
    let all: Vec<usize> = (0..a.monoid.size).collect();
    let units = a.monoid.units();
    let orbit: Vec<Vec<usize>> = (0..c).map(|x| orbit_under(a, &all, x)).collect();
    let presence: Vec<Vec<usize>> = (0..c).map(|x| orbit_under(a, &units, x)).collect();
    let imperceptible = orbit
        .iter()
        .zip(&presence)
        .map(|(o, p)| o.iter().copied().filter(|y| !p.contains(y)).collect())
        .collect();

    let mut parent: Vec<usize> = (0..c).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        parent[x] = r;
        r
    }
    for (x, o) in orbit.iter().enumerate() {
        for &y in o {
            let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
            if rx != ry {
                parent[rx.max(ry)] = rx.min(ry);
            }
        }
    }
    let mut existence_modes: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; c];
    for x in 0..c {
        let r = find(&mut parent, x);
        if root_slot[r] == usize::MAX {
            root_slot[r] = existence_modes.len();
            existence_modes.push(Vec::new());
        }
        existence_modes[root_slot[r]].push(x);
    }
    let mut presence_modes: Vec<Vec<usize>> = presence.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    presence_modes.sort_by_key(|p| p[0]);

    ModeReport {
        existence_modes,
        presence_modes,
        orbit,
        presence,
        imperceptible,
    }
}

/// True iff `f(m·x) = m·f(x)` for all `m`, `x`.
pub fn is_equivariant(f: &[usize], a: &FiniteAction, b: &FiniteAction) -> Result<bool> {
    if a.monoid != b.monoid {
        return Err(Error::validation("actions are over different monoids"));
    }
    if f.len() != a.carrier_size {
        return Err(Error::validation(format!("map has {} entries, carrier has {}", f.len(), a.carrier_size)));
    }
    if let Some(v) = f.iter().find(|&&v| v >= b.carrier_size) {
        return Err(Error::validation(format!("map value {v} outside the target carrier")));
    }
    Ok((0..a.monoid.size).all(|m| (0..a.carrier_size).all(|x| f[a.act(m, x)] == b.act(m, f[x]))))
}

/// `views[k][i]` is the unit assigned to the `i`-th point of the `k`-th
/// presence mode (as listed by [`orbits`]). True iff every view is a
/// bijection onto the unit group.
pub fn stability_report(a: &FiniteAction, views: &[Vec<usize>]) -> Result<bool> {
    let modes = orbits(a).presence_modes;
    if views.len() != modes.len() {
        return Err(Error::validation(format!(
            "expected {} views (one per presence mode), got {}",
            modes.len(),
            views.len()
        )));
    }
    let units: BTreeSet<usize> = a.monoid.units().into_iter().collect();
    Ok(modes.iter().zip(views).all(|(mode, view)| {
        let image: BTreeSet<usize> = view.iter().copied().collect();
        view.len() == mode.len() && image.len() == view.len() && image == units
    }))
}
