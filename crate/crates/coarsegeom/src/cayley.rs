//! Word-metric balls in finitely presented groups.
//!
//! Supported presentations: free groups, free abelian groups, and direct
//! products of those. The only accepted relators are commutators of two
//! generators (written `[a,b]` or as a four-letter word like `abAB`);
//! generators are single lowercase letters with uppercase meaning inverse.
//! Anything else is rejected as a capability error rather than guessed at.

use crate::error::{budget, capability, validation, Result};
use crate::space::{Budget, FiniteMetricSpace, Generator};
use std::collections::{HashMap, VecDeque};

#[derive(Debug)]
struct Presentation {
    gens: Vec<char>,
    /// factor index of each generator; factors are either one free factor
    /// (several mutually non-commuting generators) or a rank-1 abelian part.
    factor_of: Vec<usize>,
    factors: Vec<FactorKind>,
}

#[derive(Debug, Clone, PartialEq)]
enum FactorKind {
    Free(Vec<usize>),
    Abelian(usize),
}

/// Group element in normal form: one freely reduced word per free factor
/// (letters are `gen+1` / `-(gen+1)`), one exponent per abelian generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Element {
    words: Vec<Vec<i32>>,
    exps: Vec<i64>,
}

fn parse_presentation(gens: &[String], relators: &[String]) -> Result<Presentation> {
    if gens.is_empty() {
        return Err(validation("at least one generator required"));
    }
    let mut letters = Vec::new();
    for g in gens {
        let mut it = g.chars();
        let c = it.next().ok_or_else(|| validation("empty generator symbol"))?;
        if it.next().is_some() || !c.is_ascii_lowercase() {
            return Err(capability(format!(
                "generator {g:?} unsupported: use single lowercase letters"
            )));
        }
        if letters.contains(&c) {
            return Err(validation(format!("duplicate generator {c}")));
        }
        letters.push(c);
    }
    let k = letters.len();
    let idx = |c: char| letters.iter().position(|&g| g == c);
    let mut commutes = vec![vec![false; k]; k];
    for r in relators {
        let pair = parse_commutator(r, &idx)?;
        if let Some((a, b)) = pair {
            commutes[a][b] = true;
            commutes[b][a] = true;
        }
    }
    // The group is a direct product of free and free abelian factors exactly
    // when every connected component of the non-commuting graph is a clique.
    let mut comp = vec![usize::MAX; k];
    let mut ncomp = 0;
    for start in 0..k {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = ncomp;
        while let Some(u) = stack.pop() {
            for v in 0..k {
                if v != u && !commutes[u][v] && comp[v] == usize::MAX {
                    comp[v] = ncomp;
                    stack.push(v);
                }
            }
        }
        ncomp += 1;
    }
    for u in 0..k {
        for v in (u + 1)..k {
            if comp[u] == comp[v] && commutes[u][v] {
                return Err(capability(
                    "relators do not describe a direct product of free and free abelian groups",
                ));
            }
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    for g in 0..k {
        members[comp[g]].push(g);
    }
    let mut factors = Vec::new();
    let mut factor_of = vec![0usize; k];
    for m in members {
        let fi = factors.len();
        for &g in &m {
            factor_of[g] = fi;
        }
        if m.len() == 1 {
            factors.push(FactorKind::Abelian(m[0]));
        } else {
            factors.push(FactorKind::Free(m));
        }
    }
    Ok(Presentation { gens: letters, factor_of, factors })
}

fn parse_commutator(
    r: &str,
    idx: &dyn Fn(char) -> Option<usize>,
) -> Result<Option<(usize, usize)>> {
    let bad = || capability(format!("relator {r:?} unsupported: only commutators of two generators are accepted"));
    let t = r.trim();
    if let Some(inner) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 2 || parts.iter().any(|p| p.chars().count() != 1) {
            return Err(bad());
        }
        let a = idx(parts[0].chars().next().unwrap()).ok_or_else(bad)?;
        let b = idx(parts[1].chars().next().unwrap()).ok_or_else(bad)?;
        return Ok((a != b).then_some((a, b)));
    }
    let chars: Vec<char> = t.chars().collect();
    if chars.len() == 4 {
        let lower: Vec<char> = chars.iter().map(|c| c.to_ascii_lowercase()).collect();
        if chars[0].is_ascii_lowercase()
            && chars[1].is_ascii_lowercase()
            && chars[2].is_ascii_uppercase()
            && chars[3].is_ascii_uppercase()
            && lower[0] == lower[2]
            && lower[1] == lower[3]
        {
            let a = idx(lower[0]).ok_or_else(bad)?;
            let b = idx(lower[1]).ok_or_else(bad)?;
            return Ok((a != b).then_some((a, b)));
        }
    }
    Err(bad())
}

impl Presentation {
    fn identity(&self) -> Element {
        Element {
            words: self
                .factors
                .iter()
                .map(|f| match f {
                    FactorKind::Free(_) => Vec::new(),
                    FactorKind::Abelian(_) => Vec::new(),
                })
                .collect(),
            exps: vec![0; self.gens.len()],
        }
    }

    /// Right-multiply by generator `g` (sign -1 for the inverse).
    fn step(&self, e: &Element, g: usize, sign: i32) -> Element {
        let mut out = e.clone();
        match self.factors[self.factor_of[g]] {
            FactorKind::Free(_) => {
                let w = &mut out.words[self.factor_of[g]];
                let letter = sign * (g as i32 + 1);
                if w.last() == Some(&-letter) {
                    w.pop();
                } else {
                    w.push(letter);
                }
            }
            FactorKind::Abelian(_) => {
                out.exps[g] += sign as i64;
            }
        }
        out
    }

    fn render(&self, e: &Element) -> String {
        let mut s = String::new();
        for (fi, f) in self.factors.iter().enumerate() {
            match f {
                FactorKind::Free(_) => {
                    for &l in &e.words[fi] {
                        let g = l.unsigned_abs() as usize - 1;
                        let c = self.gens[g];
                        s.push(if l > 0 { c } else { c.to_ascii_uppercase() });
                    }
                }
                FactorKind::Abelian(g) => {
                    let n = e.exps[*g];
                    let c = if n > 0 { self.gens[*g] } else { self.gens[*g].to_ascii_uppercase() };
                    for _ in 0..n.unsigned_abs() {
                        s.push(c);
                    }
                }
            }
        }
        if s.is_empty() {
            s.push('e');
        }
        s
    }
}

/// Ball of the given radius in the Cayley graph, with the path metric of the
/// graph restricted to the ball. Point ids are normal-form words (`e` is the
/// identity and the basepoint); enumeration order is breadth first, so point
/// indices are sorted by word norm.
pub fn cayley_ball(
    gens: &[String],
    relators: &[String],
    radius: usize,
    bud: &Budget,
) -> Result<FiniteMetricSpace> {
    let pres = parse_presentation(gens, relators)?;
    let cap = bud.max_points.min(bud.max_dense);
    let moves: Vec<(usize, i32)> = (0..pres.gens.len())
        .flat_map(|g| [(g, 1), (g, -1)])
        .collect();

    let mut index: HashMap<Element, usize> = HashMap::new();
    let mut elems: Vec<Element> = Vec::new();
    let mut depth: Vec<usize> = Vec::new();
    let id = pres.identity();
    index.insert(id.clone(), 0);
    elems.push(id);
    depth.push(0);
    let mut q = VecDeque::from([0usize]);
    while let Some(i) = q.pop_front() {
        if depth[i] == radius {
            continue;
        }
        let base = elems[i].clone();
        for &(g, sign) in &moves {
            let nb = pres.step(&base, g, sign);
            if !index.contains_key(&nb) {
                if elems.len() >= cap {
                    return Err(budget(format!(
                        "ball exceeds {cap} points (radius {radius} too large)"
                    )));
                }
                index.insert(nb.clone(), elems.len());
                elems.push(nb);
                depth.push(depth[i] + 1);
                q.push_back(elems.len() - 1);
            }
        }
    }

    let n = elems.len();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for i in 0..n {
        for &(g, sign) in &moves {
            if let Some(&j) = index.get(&pres.step(&elems[i], g, sign)) {
                if i < j {
                    adj[i].push(j as u32);
                    adj[j].push(i as u32);
                }
            }
        }
    }
    let mut flat = vec![0.0f64; n * n];
    let mut level = vec![u32::MAX; n];
    for s in 0..n {
        level.iter_mut().for_each(|l| *l = u32::MAX);
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                let v = v as usize;
                if level[v] == u32::MAX {
                    level[v] = level[u] + 1;
                    q.push_back(v);
                }
            }
        }
        for t in 0..n {
            if level[t] == u32::MAX {
                return Err(validation("ball graph disconnected (internal)".to_string()));
            }
            flat[s * n + t] = level[t] as f64;
        }
    }
    let ids: Vec<String> = elems.iter().map(|e| pres.render(e)).collect();
    let gen = Generator::Cayley {
        generators: gens.to_vec(),
        relators: relators.to_vec(),
        radius,
        boundary_distortion: radius > 0,
        suggested_trim: radius.div_ceil(4),
    };
    Ok(FiniteMetricSpace::from_dense(
        format!("cayley_r{radius}"),
        ids,
        0,
        flat,
        gen,
    ))
}
