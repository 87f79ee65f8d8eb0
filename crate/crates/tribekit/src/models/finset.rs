//! The clan of finite sets, in which every map is a fibration.

use crate::clan::{Clan, Pullback, PullbackOf};
use crate::fincat::{cartesian, Category};
use crate::pi::{InternalProduct, InternalProductOf, PiClan};
use crate::tribe::Tribe;

/// A function `{0..n} → {0..tgt}` with `n = map.len()`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinMap {
    pub tgt: usize,
    pub map: Vec<u32>,
}

impl FinMap {
    pub fn new(tgt: usize, map: Vec<u32>) -> FinMap {
        debug_assert!(map.iter().all(|&y| (y as usize) < tgt));
        FinMap { tgt, map }
    }

    pub fn src(&self) -> usize {
        self.map.len()
    }

    pub fn identity(n: usize) -> FinMap {
        FinMap { tgt: n, map: (0..n as u32).collect() }
    }

    pub fn constant(n: usize, tgt: usize, y: u32) -> FinMap {
        FinMap { tgt, map: vec![y; n] }
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &FinMap) -> FinMap {
        FinMap { tgt: self.tgt, map: f.map.iter().map(|&x| self.map[x as usize]).collect() }
    }

    pub fn apply(&self, x: u32) -> u32 {
        self.map[x as usize]
    }

    /// The elements over `y`, ascending.
    pub fn fiber(&self, y: u32) -> Vec<u32> {
        (0..self.src() as u32).filter(|&x| self.map[x as usize] == y).collect()
    }

    pub fn is_bijective(&self) -> bool {
        self.src() == self.tgt && {
            let mut seen = vec![false; self.tgt];
            self.map.iter().all(|&y| !std::mem::replace(&mut seen[y as usize], true))
        }
    }
}

/// All functions `n → m` in lexicographic order of their value tables.
pub fn all_maps(n: usize, m: usize) -> Vec<FinMap> {
    if n > 0 && m == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    loop {
        out.push(FinMap { tgt: m, map: cur.clone() });
        let mut d = n;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            cur[d] += 1;
            if (cur[d] as usize) < m {
                break;
            }
            cur[d] = 0;
        }
    }
}

/// The sections of `p: E → A` over the fibers of `f: A → B`: pairs `(b, s)`
/// ordered by `b`, then lexicographically by `s`, where `s[k]` lies over the
/// `k`-th element of `f⁻¹(b)`.
pub fn sections(f: &FinMap, p: &FinMap) -> Vec<(u32, Vec<u32>)> {
    let mut out = Vec::new();
    for b in 0..f.tgt as u32 {
        let choices: Vec<Vec<u32>> = f.fiber(b).into_iter().map(|a| p.fiber(a)).collect();
        out.extend(cartesian(&choices).into_iter().map(|s| (b, s)));
    }
    out
}

/// Finite sets `{0..n}` for `n` in the working set, with all functions.
#[derive(Debug, Clone)]
pub struct FinSet {
    sizes: Vec<usize>,
}

impl FinSet {
    /// The working set `1, …, cap`; `cap = 1` is the terminal clan.
    pub fn new(cap: usize) -> FinSet {
        FinSet { sizes: (1..=cap.max(1)).collect() }
    }

    /// The working set `0, 1, …, cap`.
    pub fn with_empty(cap: usize) -> FinSet {
        FinSet { sizes: (0..=cap).collect() }
    }

    pub fn with_sizes(mut sizes: Vec<usize>) -> FinSet {
        sizes.sort_unstable();
        sizes.dedup();
        FinSet { sizes }
    }
}

impl Category for FinSet {
    type Obj = usize;
    type Mor = FinMap;

    fn dom(&self, f: &FinMap) -> usize {
        f.src()
    }
    fn cod(&self, f: &FinMap) -> usize {
        f.tgt
    }
    fn id(&self, a: &usize) -> FinMap {
        FinMap::identity(*a)
    }
    fn compose(&self, g: &FinMap, f: &FinMap) -> FinMap {
        g.after(f)
    }
    fn hom(&self, a: &usize, b: &usize) -> Vec<FinMap> {
        all_maps(*a, *b)
    }
    fn objects(&self) -> Vec<usize> {
        self.sizes.clone()
    }
    /// Maps `h: w → dom p` with `p h = g`, choosing in each fiber.
    fn hom_over(&self, w: &usize, p: &FinMap, g: &FinMap) -> Vec<FinMap> {
        if g.src() != *w || g.tgt != p.tgt {
            return Vec::new();
        }
        let choices: Vec<Vec<u32>> = g.map.iter().map(|&y| p.fiber(y)).collect();
        crate::fincat::cartesian(&choices).into_iter().map(|map| FinMap { tgt: p.src(), map }).collect()
    }
    fn first_over(&self, w: &usize, p: &FinMap, g: &FinMap) -> Option<FinMap> {
        if g.src() != *w || g.tgt != p.tgt {
            return None;
        }
        let map = g.map.iter().map(|&y| p.fiber(y).first().copied()).collect::<Option<Vec<_>>>()?;
        Some(FinMap { tgt: p.src(), map })
    }
    fn inverse(&self, f: &FinMap) -> Option<FinMap> {
        f.is_bijective().then(|| {
            let mut inv = vec![0u32; f.tgt];
            for (x, &y) in f.map.iter().enumerate() {
                inv[y as usize] = x as u32;
            }
            FinMap { tgt: f.src(), map: inv }
        })
    }
    fn is_iso(&self, f: &FinMap) -> bool {
        f.is_bijective()
    }
    fn obj_label(&self, a: &usize) -> String {
        a.to_string()
    }
    fn mor_label(&self, f: &FinMap) -> String {
        let vals: Vec<String> = f.map.iter().map(u32::to_string).collect();
        format!("{}>{}[{}]", f.src(), f.tgt, vals.join(","))
    }
}

impl Clan for FinSet {
    fn terminal(&self) -> usize {
        1
    }
    fn to_terminal(&self, a: &usize) -> FinMap {
        FinMap::constant(*a, 1, 0)
    }
    fn is_fibration(&self, _f: &FinMap) -> bool {
        true
    }
    /// Pairs `(x, y)` with `f x = g y`, in lexicographic order.
    fn pullback(&self, f: &FinMap, g: &FinMap) -> Option<PullbackOf<Self>> {
        if f.tgt != g.tgt {
            return None;
        }
        let mut over: Vec<Vec<u32>> = vec![Vec::new(); g.tgt];
        for (y, &z) in g.map.iter().enumerate() {
            over[z as usize].push(y as u32);
        }
        let mut p1 = Vec::new();
        let mut p2 = Vec::new();
        for x in 0..f.src() as u32 {
            for &y in &over[f.apply(x) as usize] {
                p1.push(x);
                p2.push(y);
            }
        }
        Some(Pullback {
            apex: p1.len(),
            p1: FinMap { tgt: f.src(), map: p1 },
            p2: FinMap { tgt: g.src(), map: p2 },
        })
    }
    fn pair(&self, pb: &PullbackOf<Self>, a: &FinMap, b: &FinMap) -> Option<FinMap> {
        if a.src() != b.src() {
            return None;
        }
        let map = a
            .map
            .iter()
            .zip(&b.map)
            .map(|(&x, &y)| (0..pb.apex as u32).find(|&k| pb.p1.apply(k) == x && pb.p2.apply(k) == y))
            .collect::<Option<Vec<_>>>()?;
        Some(FinMap { tgt: pb.apex, map })
    }
}

/// Every map is a fibration, the anodyne maps are the bijections and the path
/// object of `A` is `A` itself, so homotopy is equality.
impl Tribe for FinSet {
    fn af_factorize(&self, f: &FinMap) -> Option<(FinMap, FinMap)> {
        Some((FinMap::identity(f.src()), f.clone()))
    }
    fn is_anodyne(&self, u: &FinMap) -> bool {
        u.is_bijective()
    }
}

/// `Π_f(E)` is the set of pairs `(b, s)` of [`sections`]; evaluation sends
/// `(a, (b, s))` to the value of `s` at `a`.
impl PiClan for FinSet {
    fn internal_product(&self, f: &FinMap, p: &FinMap) -> Option<InternalProductOf<Self>> {
        if p.tgt != f.src() {
            return None;
        }
        let secs = sections(f, p);
        let mut pos = vec![0usize; f.src()];
        for b in 0..f.tgt as u32 {
            for (k, a) in f.fiber(b).into_iter().enumerate() {
                pos[a as usize] = k;
            }
        }
        let structure = FinMap { tgt: f.tgt, map: secs.iter().map(|(b, _)| *b).collect() };
        let cone = self.pullback(f, &structure)?;
        let eval = FinMap {
            tgt: p.src(),
            map: cone.p1.map.iter().zip(&cone.p2.map).map(|(&a, &k)| secs[k as usize].1[pos[a as usize]]).collect(),
        };
        Some(InternalProduct { obj: secs.len(), structure, cone, eval })
    }

    /// Matches the fibers in order.
    fn iso_over(&self, x: &FinMap, y: &FinMap) -> Option<FinMap> {
        if x.tgt != y.tgt || x.src() != y.src() {
            return None;
        }
        let mut map = vec![0u32; x.src()];
        for z in 0..x.tgt as u32 {
            let (fx, fy) = (x.fiber(z), y.fiber(z));
            if fx.len() != fy.len() {
                return None;
            }
            for (a, b) in fx.into_iter().zip(fy) {
                map[a as usize] = b;
            }
        }
        Some(FinMap { tgt: y.src(), map })
    }
}
