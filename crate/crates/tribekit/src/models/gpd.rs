//! Finite groupoids in component normal form.
//!
//! A connected component with `k` objects and vertex group `G` (the
//! automorphisms of its first object) stores morphism `(i, j, g)` at offset
//! `(i·k + j)·|G| + g`. It stands for `t_j ∘ g ∘ t_i⁻¹`, where `t_i` is a fixed
//! arrow from the first object to object `i`, so composition is group
//! multiplication. Constructions build an explicit raw groupoid and call
//! [`normalize`].

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

const NONE: u32 = u32::MAX;

/// A finite group as a multiplication table with identity `0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Group {
    n: usize,
    table: Vec<u32>,
    inv: Vec<u32>,
    gens: Vec<u32>,
}

impl Group {
    /// `table[a·n + b] = a·b`. Element `0` must be the identity.
    pub fn from_table(n: usize, table: Vec<u32>) -> Group {
        assert_eq!(table.len(), n * n);
        let mut inv = vec![NONE; n];
        for a in 0..n {
            for b in 0..n {
                if table[a * n + b] == 0 {
                    inv[a] = b as u32;
                }
            }
        }
        let mut g = Group { n, table, inv, gens: Vec::new() };
        g.gens = g.greedy_generators();
        g
    }

    pub fn trivial() -> Group {
        Group::from_table(1, vec![0])
    }

    pub fn cyclic(k: usize) -> Group {
        assert!(k >= 1);
        let table = (0..k * k).map(|x| ((x / k + x % k) % k) as u32).collect();
        Group::from_table(k, table)
    }

    pub fn product(a: &Group, b: &Group) -> Group {
        let n = a.n * b.n;
        let mut table = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let (x1, x2) = (x / b.n, x % b.n);
                let (y1, y2) = (y / b.n, y % b.n);
                table.push(a.mul(x1 as u32, y1 as u32) * b.n as u32 + b.mul(x2 as u32, y2 as u32));
            }
        }
        Group::from_table(n, table)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.table[a as usize * self.n + b as usize]
    }

    pub fn inv(&self, a: u32) -> u32 {
        self.inv[a as usize]
    }

    /// A generating set, chosen greedily in element order.
    pub fn generators(&self) -> &[u32] {
        &self.gens
    }

    fn greedy_generators(&self) -> Vec<u32> {
        let mut inside = vec![false; self.n];
        inside[0] = true;
        let mut gens = Vec::new();
        for a in 0..self.n as u32 {
            if inside[a as usize] {
                continue;
            }
            gens.push(a);
            // Close the subgroup under the generators found so far.
            let mut stack: Vec<u32> = (0..self.n as u32).filter(|&x| inside[x as usize]).collect();
            while let Some(x) = stack.pop() {
                for &s in &gens {
                    let y = self.mul(s, x);
                    if !inside[y as usize] {
                        inside[y as usize] = true;
                        stack.push(y);
                    }
                }
            }
        }
        gens
    }

    /// All group homomorphisms `self → h`, each as the full image table.
    pub fn homomorphisms(&self, h: &Group) -> Vec<Vec<u32>> {
        let gens = self.generators();
        let mut out = Vec::new();
        let mut choice = vec![0u32; gens.len()];
        loop {
            if let Some(phi) = extend_hom(self, gens, &choice, |a, b| h.mul(a, b), 0) {
                out.push(phi);
            }
            if !odometer(&mut choice, h.n as u32) {
                break;
            }
        }
        out
    }

    pub fn is_isomorphic(&self, h: &Group) -> Option<Vec<u32>> {
        if self.n != h.n {
            return None;
        }
        self.homomorphisms(h).into_iter().find(|phi| {
            let mut seen = vec![false; h.n];
            phi.iter().all(|&x| !std::mem::replace(&mut seen[x as usize], true))
        })
    }
}

/// Increments a mixed-radix counter; false once it wraps.
fn odometer(c: &mut [u32], radix: u32) -> bool {
    for d in c.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// Extends generator images to a homomorphism on all of `g`, or `None` when
/// the images do not respect the relations. `mul` multiplies in the target
/// and `one` is its identity.
fn extend_hom(g: &Group, gens: &[u32], images: &[u32], mul: impl Fn(u32, u32) -> u32, one: u32) -> Option<Vec<u32>> {
    let mut phi = vec![NONE; g.n];
    phi[0] = one;
    let mut stack = vec![0u32];
    while let Some(h) = stack.pop() {
        for (s, &gen) in gens.iter().enumerate() {
            let k = g.mul(gen, h);
            let v = mul(images[s], phi[h as usize]);
            match phi[k as usize] {
                NONE => {
                    phi[k as usize] = v;
                    stack.push(k);
                }
                w if w != v => return None,
                _ => {}
            }
        }
    }
    Some(phi)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Component {
    pub size: u32,
    pub group: Arc<Group>,
}

/// A finite groupoid in component normal form.
#[derive(Debug, Clone)]
pub struct Groupoid {
    comps: Vec<Component>,
    obj_off: Vec<u32>,
    mor_off: Vec<u32>,
    obj_comp: Vec<u32>,
    nmor: u32,
    fingerprint: u64,
}

impl PartialEq for Groupoid {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint && self.comps == other.comps
    }
}

impl Eq for Groupoid {}

impl Hash for Groupoid {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.fingerprint.hash(state);
    }
}

impl PartialOrd for Groupoid {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Groupoid {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num_objects(), self.nmor, &self.comps).cmp(&(other.num_objects(), other.nmor, &other.comps))
    }
}

impl Groupoid {
    pub fn from_components(comps: Vec<Component>) -> Groupoid {
        let mut obj_off = Vec::with_capacity(comps.len());
        let mut mor_off = Vec::with_capacity(comps.len());
        let mut obj_comp = Vec::new();
        let (mut o, mut m) = (0u32, 0u32);
        for (c, comp) in comps.iter().enumerate() {
            obj_off.push(o);
            mor_off.push(m);
            o += comp.size;
            m += comp.size * comp.size * comp.group.order() as u32;
            obj_comp.extend(std::iter::repeat_n(c as u32, comp.size as usize));
        }
        let mut h = DefaultHasher::new();
        comps.hash(&mut h);
        Groupoid { comps, obj_off, mor_off, obj_comp, nmor: m, fingerprint: h.finish() }
    }

    pub fn empty() -> Groupoid {
        Groupoid::from_components(Vec::new())
    }

    pub fn discrete(n: usize) -> Groupoid {
        let one = Arc::new(Group::trivial());
        Groupoid::from_components((0..n).map(|_| Component { size: 1, group: one.clone() }).collect())
    }

    /// One isomorphism between any two of `n` objects.
    pub fn codiscrete(n: usize) -> Groupoid {
        if n == 0 {
            return Groupoid::empty();
        }
        Groupoid::from_components(vec![Component { size: n as u32, group: Arc::new(Group::trivial()) }])
    }

    pub fn delooping(g: Group) -> Groupoid {
        Groupoid::from_components(vec![Component { size: 1, group: Arc::new(g) }])
    }

    pub fn components(&self) -> &[Component] {
        &self.comps
    }

    pub fn num_objects(&self) -> usize {
        self.obj_comp.len()
    }

    pub fn num_morphisms(&self) -> usize {
        self.nmor as usize
    }

    pub fn comp_of(&self, x: u32) -> usize {
        self.obj_comp[x as usize] as usize
    }

    /// The first object of component `c`.
    pub fn base(&self, c: usize) -> u32 {
        self.obj_off[c]
    }

    pub fn objects_of(&self, c: usize) -> std::ops::Range<u32> {
        self.obj_off[c]..self.obj_off[c] + self.comps[c].size
    }

    pub fn encode(&self, c: usize, i: u32, j: u32, g: u32) -> u32 {
        let comp = &self.comps[c];
        self.mor_off[c] + (i * comp.size + j) * comp.group.order() as u32 + g
    }

    /// `(component, local source, local target, group element)`.
    pub fn decode(&self, m: u32) -> (usize, u32, u32, u32) {
        let c = self.mor_off.partition_point(|&o| o <= m) - 1;
        let comp = &self.comps[c];
        let n = comp.group.order() as u32;
        let local = m - self.mor_off[c];
        let (ij, g) = (local / n, local % n);
        (c, ij / comp.size, ij % comp.size, g)
    }

    pub fn src(&self, m: u32) -> u32 {
        let (c, i, _, _) = self.decode(m);
        self.obj_off[c] + i
    }

    pub fn tgt(&self, m: u32) -> u32 {
        let (c, _, j, _) = self.decode(m);
        self.obj_off[c] + j
    }

    pub fn id(&self, x: u32) -> u32 {
        let c = self.comp_of(x);
        let i = x - self.obj_off[c];
        self.encode(c, i, i, 0)
    }

    /// `h ∘ g`.
    pub fn compose(&self, h: u32, g: u32) -> u32 {
        let (c, i, j, a) = self.decode(g);
        let (c2, j2, l, b) = self.decode(h);
        debug_assert!(c == c2 && j == j2, "composing non-composable morphisms");
        self.encode(c, i, l, self.comps[c].group.mul(b, a))
    }

    pub fn inverse(&self, m: u32) -> u32 {
        let (c, i, j, g) = self.decode(m);
        self.encode(c, j, i, self.comps[c].group.inv(g))
    }

    /// The arrow `t_x` from the first object of the component to `x`.
    pub fn tree(&self, x: u32) -> u32 {
        let c = self.comp_of(x);
        self.encode(c, 0, x - self.obj_off[c], 0)
    }

    /// The automorphism of the first object of `c` given by group element `g`.
    pub fn vertex(&self, c: usize, g: u32) -> u32 {
        self.encode(c, 0, 0, g)
    }

    pub fn hom(&self, x: u32, y: u32) -> Vec<u32> {
        let (c, d) = (self.comp_of(x), self.comp_of(y));
        if c != d {
            return Vec::new();
        }
        let (i, j) = (x - self.obj_off[c], y - self.obj_off[c]);
        let first = self.encode(c, i, j, 0);
        (first..first + self.comps[c].group.order() as u32).collect()
    }

    /// All morphisms with source `x`, ascending.
    pub fn out(&self, x: u32) -> Vec<u32> {
        let c = self.comp_of(x);
        let i = x - self.obj_off[c];
        let comp = &self.comps[c];
        let n = comp.group.order() as u32;
        let mut v = Vec::with_capacity((comp.size * n) as usize);
        for j in 0..comp.size {
            let first = self.encode(c, i, j, 0);
            v.extend(first..first + n);
        }
        v
    }

    pub fn is_connected(&self) -> bool {
        self.comps.len() == 1
    }
}

/// Result of [`normalize`]: the normal form plus the raw → normal maps.
pub struct Normalized {
    pub gpd: Arc<Groupoid>,
    pub obj: Vec<u32>,
    pub mor: Vec<u32>,
}

impl Normalized {
    pub fn obj_inverse(&self) -> Vec<u32> {
        invert(&self.obj)
    }
    pub fn mor_inverse(&self) -> Vec<u32> {
        invert(&self.mor)
    }
}

fn invert(v: &[u32]) -> Vec<u32> {
    let mut out = vec![NONE; v.len()];
    for (i, &x) in v.iter().enumerate() {
        out[x as usize] = i as u32;
    }
    out
}

/// Brings an explicit groupoid (objects `0..nobj`, morphism `m: src[m] →
/// tgt[m]`, `compose(g, f)` the index of `g ∘ f`) into normal form.
/// Components are ordered by their least object, the least object is the base,
/// `t_x` is the least morphism from the base to `x`, and the vertex group lists
/// the identity first and then automorphisms in index order.
pub fn normalize(nobj: usize, src: &[u32], tgt: &[u32], compose: impl Fn(u32, u32) -> u32) -> Normalized {
    let nmor = src.len();
    let mut parent: Vec<u32> = (0..nobj as u32).collect();
    fn find(p: &mut [u32], x: u32) -> u32 {
        let mut r = x;
        while p[r as usize] != r {
            r = p[r as usize];
        }
        let mut y = x;
        while p[y as usize] != r {
            let next = p[y as usize];
            p[y as usize] = r;
            y = next;
        }
        r
    }
    for m in 0..nmor {
        let (a, b) = (find(&mut parent, src[m]), find(&mut parent, tgt[m]));
        if a != b {
            let (lo, hi) = (a.min(b), a.max(b));
            parent[hi as usize] = lo;
        }
    }
    // Roots are least elements since unions keep the smaller root.
    let mut comp_of_root = HashMap::new();
    let mut comp_objs: Vec<Vec<u32>> = Vec::new();
    let mut comp_of = vec![0usize; nobj];
    let mut local = vec![0u32; nobj];
    for x in 0..nobj as u32 {
        let r = find(&mut parent, x);
        let c = *comp_of_root.entry(r).or_insert_with(|| {
            comp_objs.push(Vec::new());
            comp_objs.len() - 1
        });
        comp_of[x as usize] = c;
        local[x as usize] = comp_objs[c].len() as u32;
        comp_objs[c].push(x);
    }
    let ncomp = comp_objs.len();
    let mut tree = vec![NONE; nobj];
    let mut auts: Vec<Vec<u32>> = vec![Vec::new(); ncomp];
    for m in 0..nmor as u32 {
        let (s, t) = (src[m as usize], tgt[m as usize]);
        let c = comp_of[s as usize];
        if s == comp_objs[c][0] {
            if tree[t as usize] == NONE {
                tree[t as usize] = m;
            }
            if t == s {
                auts[c].push(m);
            }
        }
    }
    let mut groups = Vec::with_capacity(ncomp);
    let mut gidx = vec![NONE; nmor];
    for aut in auts.iter_mut() {
        let e = aut.iter().position(|&m| compose(m, m) == m).expect("identity present");
        let id = aut.remove(e);
        aut.insert(0, id);
        for (k, &m) in aut.iter().enumerate() {
            gidx[m as usize] = k as u32;
        }
        let n = aut.len();
        let mut table = Vec::with_capacity(n * n);
        for &a in aut.iter() {
            for &b in aut.iter() {
                table.push(gidx[compose(a, b) as usize]);
            }
        }
        groups.push(Group::from_table(n, table));
    }
    // t_y ∘ g ↦ g, for every raw arrow out of a base.
    let mut from_base = vec![NONE; nmor];
    for y in 0..nobj {
        let c = comp_of[y];
        for (g, &a) in auts[c].iter().enumerate() {
            from_base[compose(tree[y], a) as usize] = g as u32;
        }
    }
    let gpd = Groupoid::from_components(
        comp_objs
            .iter()
            .zip(groups)
            .map(|(objs, g)| Component { size: objs.len() as u32, group: Arc::new(g) })
            .collect(),
    );
    let obj: Vec<u32> = (0..nobj).map(|x| gpd.obj_off[comp_of[x]] + local[x]).collect();
    let mor = (0..nmor)
        .map(|m| {
            let (x, y) = (src[m] as usize, tgt[m] as usize);
            let g = from_base[compose(m as u32, tree[x]) as usize];
            gpd.encode(comp_of[x], local[x], local[y], g)
        })
        .collect();
    Normalized { gpd: Arc::new(gpd), obj, mor }
}

/// A functor between finite groupoids, as full object and morphism tables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GFunctor {
    pub src: Arc<Groupoid>,
    pub tgt: Arc<Groupoid>,
    pub ob: Vec<u32>,
    pub mor: Vec<u32>,
}

impl GFunctor {
    pub fn identity(g: &Arc<Groupoid>) -> GFunctor {
        GFunctor {
            src: g.clone(),
            tgt: g.clone(),
            ob: (0..g.num_objects() as u32).collect(),
            mor: (0..g.num_morphisms() as u32).collect(),
        }
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &GFunctor) -> GFunctor {
        GFunctor {
            src: f.src.clone(),
            tgt: self.tgt.clone(),
            ob: f.ob.iter().map(|&x| self.ob[x as usize]).collect(),
            mor: f.mor.iter().map(|&m| self.mor[m as usize]).collect(),
        }
    }

    /// The unique functor into a groupoid with one object and one morphism.
    pub fn to_point(src: &Arc<Groupoid>, point: &Arc<Groupoid>) -> GFunctor {
        GFunctor {
            src: src.clone(),
            tgt: point.clone(),
            ob: vec![0; src.num_objects()],
            mor: vec![0; src.num_morphisms()],
        }
    }

    /// Assembles a functor from, per component of the source, the image `y0`
    /// of the base, the images `phi` of the vertex group and the images `m` of
    /// the tree arrows `t_1 … t_{k-1}`.
    pub fn assemble(src: &Arc<Groupoid>, tgt: &Arc<Groupoid>, parts: &[(u32, Vec<u32>, Vec<u32>)]) -> GFunctor {
        let mut ob = vec![0; src.num_objects()];
        let mut mor = vec![0; src.num_morphisms()];
        for (c, (y0, phi, ms)) in parts.iter().enumerate() {
            let comp = &src.comps[c];
            let tree_img = |i: u32| if i == 0 { tgt.id(*y0) } else { ms[i as usize - 1] };
            for i in 0..comp.size {
                ob[(src.obj_off[c] + i) as usize] = tgt.tgt(tree_img(i));
            }
            for i in 0..comp.size {
                let mi_inv = tgt.inverse(tree_img(i));
                for j in 0..comp.size {
                    let mj = tree_img(j);
                    for g in 0..comp.group.order() as u32 {
                        let v = tgt.compose(mj, tgt.compose(phi[g as usize], mi_inv));
                        mor[src.encode(c, i, j, g) as usize] = v;
                    }
                }
            }
        }
        GFunctor { src: src.clone(), tgt: tgt.clone(), ob, mor }
    }

    pub fn is_injective_on_objects(&self) -> bool {
        let mut seen = vec![false; self.tgt.num_objects()];
        self.ob.iter().all(|&y| !std::mem::replace(&mut seen[y as usize], true))
    }

    pub fn is_iso(&self) -> bool {
        self.ob.len() == self.tgt.num_objects()
            && self.mor.len() == self.tgt.num_morphisms()
            && self.is_injective_on_objects()
            && {
                let mut seen = vec![false; self.tgt.num_morphisms()];
                self.mor.iter().all(|&y| !std::mem::replace(&mut seen[y as usize], true))
            }
    }

    pub fn inverse(&self) -> Option<GFunctor> {
        self.is_iso().then(|| GFunctor {
            src: self.tgt.clone(),
            tgt: self.src.clone(),
            ob: invert(&self.ob),
            mor: invert(&self.mor),
        })
    }

    /// A violated functor law, if any: `(morphism, problem)`.
    pub fn law_violation(&self) -> Option<(u32, &'static str)> {
        let (a, b) = (&self.src, &self.tgt);
        for m in 0..a.num_morphisms() as u32 {
            let fm = self.mor[m as usize];
            if b.src(fm) != self.ob[a.src(m) as usize] || b.tgt(fm) != self.ob[a.tgt(m) as usize] {
                return Some((m, "endpoints"));
            }
        }
        for x in 0..a.num_objects() as u32 {
            if self.mor[a.id(x) as usize] != b.id(self.ob[x as usize]) {
                return Some((a.id(x), "identity"));
            }
        }
        for m in 0..a.num_morphisms() as u32 {
            for n in a.out(a.tgt(m)) {
                let lhs = self.mor[a.compose(n, m) as usize];
                if lhs != b.compose(self.mor[n as usize], self.mor[m as usize]) {
                    return Some((m, "composition"));
                }
            }
        }
        None
    }

    /// Whether the functor is an equivalence: bijective on vertex groups and
    /// on connected components.
    pub fn is_equivalence(&self) -> bool {
        let (a, b) = (&self.src, &self.tgt);
        let mut hit = vec![false; b.comps.len()];
        for c in 0..a.comps.len() {
            let y0 = self.ob[a.base(c) as usize];
            let d = b.comp_of(y0);
            if std::mem::replace(&mut hit[d], true) {
                return false;
            }
            let ga = a.comps[c].group.order();
            if ga != b.comps[d].group.order() {
                return false;
            }
            let mut seen = vec![false; b.num_morphisms()];
            for g in 0..ga as u32 {
                if std::mem::replace(&mut seen[self.mor[a.vertex(c, g) as usize] as usize], true) {
                    return false;
                }
            }
        }
        hit.iter().all(|&h| h)
    }

    /// Whether every arrow out of `p(e)` lifts to an arrow out of `e`. On
    /// failure returns `(e, β)` with `β` unliftable.
    pub fn isofibration_witness(&self) -> Option<(u32, u32)> {
        let (e, b) = (&self.src, &self.tgt);
        for x in 0..e.num_objects() as u32 {
            let px = self.ob[x as usize];
            let mut covered = vec![false; b.num_morphisms()];
            for m in e.out(x) {
                covered[self.mor[m as usize] as usize] = true;
            }
            if let Some(beta) = b.out(px).into_iter().find(|&m| !covered[m as usize]) {
                return Some((x, beta));
            }
        }
        None
    }

    pub fn is_isofibration(&self) -> bool {
        self.isofibration_witness().is_none()
    }
}

/// All functors `a → b`, ascending. With `over = Some((p, g))` only those `F`
/// with `p ∘ F = g` (`p: b → c`, `g: a → c`).
pub fn functors(a: &Arc<Groupoid>, b: &Arc<Groupoid>, over: Option<(&GFunctor, &GFunctor)>) -> Vec<GFunctor> {
    let mut per_comp: Vec<Vec<(u32, Vec<u32>, Vec<u32>)>> = Vec::with_capacity(a.comps.len());
    for c in 0..a.comps.len() {
        let comp = &a.comps[c];
        let x0 = a.base(c);
        let gens = comp.group.generators();
        let mut options = Vec::new();
        for y0 in 0..b.num_objects() as u32 {
            if let Some((p, g)) = over {
                if p.ob[y0 as usize] != g.ob[x0 as usize] {
                    continue;
                }
            }
            let aut = b.hom(y0, y0);
            // Candidate images of each generator.
            let gen_cands: Vec<Vec<u32>> = gens
                .iter()
                .map(|&s| {
                    aut.iter()
                        .copied()
                        .filter(|&m| over.is_none_or(|(p, g)| p.mor[m as usize] == g.mor[a.vertex(c, s) as usize]))
                        .collect()
                })
                .collect();
            if gen_cands.iter().any(Vec::is_empty) {
                continue;
            }
            let phis: Vec<Vec<u32>> = crate::fincat::cartesian(&gen_cands)
                .into_iter()
                .filter_map(|imgs| extend_hom(&comp.group, gens, &imgs, |x, y| b.compose(x, y), b.id(y0)))
                .collect();
            if phis.is_empty() {
                continue;
            }
            let outs = b.out(y0);
            let tree_cands: Vec<Vec<u32>> = (1..comp.size)
                .map(|i| {
                    outs.iter()
                        .copied()
                        .filter(|&m| {
                            over.is_none_or(|(p, g)| {
                                p.mor[m as usize] == g.mor[a.encode(c, 0, i, 0) as usize]
                            })
                        })
                        .collect()
                })
                .collect();
            if tree_cands.iter().any(Vec::is_empty) {
                continue;
            }
            let trees = crate::fincat::cartesian(&tree_cands);
            for phi in &phis {
                for ms in &trees {
                    options.push((y0, phi.clone(), ms.clone()));
                }
            }
        }
        if options.is_empty() {
            return Vec::new();
        }
        per_comp.push(options);
    }
    let mut out: Vec<GFunctor> = Vec::new();
    let mut idx = vec![0usize; per_comp.len()];
    loop {
        let parts: Vec<_> = idx.iter().enumerate().map(|(c, &k)| per_comp[c][k].clone()).collect();
        out.push(GFunctor::assemble(a, b, &parts));
        let mut d = per_comp.len();
        loop {
            if d == 0 {
                out.sort();
                return out;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < per_comp[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Natural isomorphisms `f ⇒ g` as component tables, ascending by the
/// components at the bases. With `vertical = Some(q)` only those whose
/// components are sent to identities by `q`.
pub fn nat_isos(f: &GFunctor, g: &GFunctor, vertical: Option<&GFunctor>, first_only: bool) -> Vec<Vec<u32>> {
    let (a, b) = (&f.src, &f.tgt);
    let mut per_comp: Vec<Vec<Vec<(u32, u32)>>> = Vec::new();
    for c in 0..a.comps.len() {
        let x0 = a.base(c);
        let (fx0, gx0) = (f.ob[x0 as usize], g.ob[x0 as usize]);
        let mut options = Vec::new();
        'alpha: for alpha0 in b.hom(fx0, gx0) {
            for &s in a.comps[c].group.generators() {
                let v = a.vertex(c, s);
                if b.compose(g.mor[v as usize], alpha0) != b.compose(alpha0, f.mor[v as usize]) {
                    continue 'alpha;
                }
            }
            let mut comps = Vec::new();
            for x in a.objects_of(c) {
                let t = a.tree(x);
                let ax = b.compose(
                    g.mor[t as usize],
                    b.compose(alpha0, b.inverse(f.mor[t as usize])),
                );
                if let Some(q) = vertical {
                    if q.mor[ax as usize] != q.tgt.id(q.ob[b.src(ax) as usize]) {
                        continue 'alpha;
                    }
                }
                comps.push((x, ax));
            }
            options.push(comps);
            if first_only {
                break;
            }
        }
        if options.is_empty() {
            return Vec::new();
        }
        per_comp.push(options);
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; per_comp.len()];
    loop {
        let mut comps = vec![0u32; a.num_objects()];
        for (c, &k) in idx.iter().enumerate() {
            for &(x, m) in &per_comp[c][k] {
                comps[x as usize] = m;
            }
        }
        out.push(comps);
        if first_only || !odometer_mixed(&mut idx, &per_comp.iter().map(Vec::len).collect::<Vec<_>>()) {
            return out;
        }
    }
}

fn odometer_mixed(c: &mut [usize], radix: &[usize]) -> bool {
    for d in (0..c.len()).rev() {
        c[d] += 1;
        if c[d] < radix[d] {
            return true;
        }
        c[d] = 0;
    }
    false
}

/// A chosen limit cone with its two legs.
#[derive(Debug, Clone)]
pub struct Cone {
    pub apex: Arc<Groupoid>,
    pub p1: GFunctor,
    pub p2: GFunctor,
}

/// The strict pullback of `f: X → Z` and `g: Y → Z`: pairs `(x, y)` and
/// `(m, n)` agreeing in `Z`, in lexicographic order.
pub fn pullback(f: &GFunctor, g: &GFunctor) -> Cone {
    let (x, y) = (&f.src, &g.src);
    let mut by_obj: HashMap<u32, Vec<u32>> = HashMap::new();
    for yo in 0..y.num_objects() as u32 {
        by_obj.entry(g.ob[yo as usize]).or_default().push(yo);
    }
    let mut by_mor: HashMap<u32, Vec<u32>> = HashMap::new();
    for n in 0..y.num_morphisms() as u32 {
        by_mor.entry(g.mor[n as usize]).or_default().push(n);
    }
    let mut objs: Vec<(u32, u32)> = Vec::new();
    let mut obj_idx = HashMap::new();
    for xo in 0..x.num_objects() as u32 {
        for &yo in by_obj.get(&f.ob[xo as usize]).map(Vec::as_slice).unwrap_or(&[]) {
            obj_idx.insert((xo, yo), objs.len() as u32);
            objs.push((xo, yo));
        }
    }
    let mut mors: Vec<(u32, u32)> = Vec::new();
    let mut mor_idx = HashMap::new();
    for m in 0..x.num_morphisms() as u32 {
        for &n in by_mor.get(&f.mor[m as usize]).map(Vec::as_slice).unwrap_or(&[]) {
            mor_idx.insert((m, n), mors.len() as u32);
            mors.push((m, n));
        }
    }
    let src: Vec<u32> = mors.iter().map(|&(m, n)| obj_idx[&(x.src(m), y.src(n))]).collect();
    let tgt: Vec<u32> = mors.iter().map(|&(m, n)| obj_idx[&(x.tgt(m), y.tgt(n))]).collect();
    let norm = normalize(objs.len(), &src, &tgt, |b, a| {
        let ((m1, n1), (m0, n0)) = (mors[b as usize], mors[a as usize]);
        mor_idx[&(x.compose(m1, m0), y.compose(n1, n0))]
    });
    let (oi, mi) = (norm.obj_inverse(), norm.mor_inverse());
    let p1 = GFunctor {
        src: norm.gpd.clone(),
        tgt: x.clone(),
        ob: oi.iter().map(|&r| objs[r as usize].0).collect(),
        mor: mi.iter().map(|&r| mors[r as usize].0).collect(),
    };
    let p2 = GFunctor {
        src: norm.gpd.clone(),
        tgt: y.clone(),
        ob: oi.iter().map(|&r| objs[r as usize].1).collect(),
        mor: mi.iter().map(|&r| mors[r as usize].1).collect(),
    };
    Cone { apex: norm.gpd, p1, p2 }
}

/// The functor `w → apex` with legs `a` and `b`, if `(a, b)` lands in the
/// cone's image.
pub fn mediate(cone: &Cone, a: &GFunctor, b: &GFunctor) -> Option<GFunctor> {
    let apex = &cone.apex;
    let obj_of: HashMap<(u32, u32), u32> = (0..apex.num_objects())
        .map(|e| ((cone.p1.ob[e], cone.p2.ob[e]), e as u32))
        .collect();
    let mor_of: HashMap<(u32, u32), u32> = (0..apex.num_morphisms())
        .map(|e| ((cone.p1.mor[e], cone.p2.mor[e]), e as u32))
        .collect();
    let ob = a.ob.iter().zip(&b.ob).map(|(&x, &y)| obj_of.get(&(x, y)).copied()).collect::<Option<Vec<_>>>()?;
    let mor = a.mor.iter().zip(&b.mor).map(|(&x, &y)| mor_of.get(&(x, y)).copied()).collect::<Option<Vec<_>>>()?;
    Some(GFunctor { src: a.src.clone(), tgt: apex.clone(), ob, mor })
}

/// The arrow groupoid `A^I` with `∂0`, `∂1` and the unit `σ`. Its objects are
/// the morphisms of `A`; a morphism `β → β'` is a pair `(α0, α1)` with
/// `α1 β = β' α0`.
#[derive(Debug, Clone)]
pub struct ArrowGroupoid {
    pub gpd: Arc<Groupoid>,
    pub d0: GFunctor,
    pub d1: GFunctor,
    pub sigma: GFunctor,
    /// The arrow of `A` each object stands for.
    pub arrows: Vec<u32>,
}

pub fn arrow_groupoid(a: &Arc<Groupoid>) -> ArrowGroupoid {
    let nm = a.num_morphisms() as u32;
    let mut mors: Vec<(u32, u32, u32)> = Vec::new();
    let mut idx = HashMap::new();
    for beta in 0..nm {
        for beta2 in 0..nm {
            for alpha0 in a.hom(a.src(beta), a.src(beta2)) {
                idx.insert((beta, beta2, alpha0), mors.len() as u32);
                mors.push((beta, beta2, alpha0));
            }
        }
    }
    let src: Vec<u32> = mors.iter().map(|m| m.0).collect();
    let tgt: Vec<u32> = mors.iter().map(|m| m.1).collect();
    let norm = normalize(nm as usize, &src, &tgt, |h, g| {
        let ((_, b2, a1), (b0, _, a0)) = (mors[h as usize], mors[g as usize]);
        idx[&(b0, b2, a.compose(a1, a0))]
    });
    let (oi, mi) = (norm.obj_inverse(), norm.mor_inverse());
    let gpd = norm.gpd.clone();
    let alpha1 = |(b, b2, a0): (u32, u32, u32)| a.compose(b2, a.compose(a0, a.inverse(b)));
    let d0 = GFunctor {
        src: gpd.clone(),
        tgt: a.clone(),
        ob: oi.iter().map(|&b| a.src(b)).collect(),
        mor: mi.iter().map(|&r| mors[r as usize].2).collect(),
    };
    let d1 = GFunctor {
        src: gpd.clone(),
        tgt: a.clone(),
        ob: oi.iter().map(|&b| a.tgt(b)).collect(),
        mor: mi.iter().map(|&r| alpha1(mors[r as usize])).collect(),
    };
    let sigma = GFunctor {
        src: a.clone(),
        tgt: gpd.clone(),
        ob: (0..a.num_objects() as u32).map(|x| norm.obj[a.id(x) as usize]).collect(),
        mor: (0..nm)
            .map(|m| norm.mor[idx[&(a.id(a.src(m)), a.id(a.tgt(m)), m)] as usize])
            .collect(),
    };
    ArrowGroupoid { gpd, d0, d1, sigma, arrows: oi }
}

/// The full subgroupoid on the objects with `keep[x]`, with its inclusion.
pub fn full_subgroupoid(g: &Arc<Groupoid>, keep: &[bool]) -> GFunctor {
    let objs: Vec<u32> = (0..g.num_objects() as u32).filter(|&x| keep[x as usize]).collect();
    subgroupoid(g, &objs, |_| true)
}

/// The subgroupoid on `objs` with the morphisms between them satisfying
/// `keep_mor` (which must be closed under composition and inverses), as its
/// inclusion functor.
pub fn subgroupoid(g: &Arc<Groupoid>, objs: &[u32], keep_mor: impl Fn(u32) -> bool) -> GFunctor {
    let mut local = vec![NONE; g.num_objects()];
    for (i, &x) in objs.iter().enumerate() {
        local[x as usize] = i as u32;
    }
    let mut mors = Vec::new();
    let mut mlocal = HashMap::new();
    for &x in objs {
        for m in g.out(x) {
            if local[g.tgt(m) as usize] != NONE && keep_mor(m) {
                mors.push(m);
            }
        }
    }
    mors.sort_unstable();
    for (i, &m) in mors.iter().enumerate() {
        mlocal.insert(m, i as u32);
    }
    let src: Vec<u32> = mors.iter().map(|&m| local[g.src(m) as usize]).collect();
    let tgt: Vec<u32> = mors.iter().map(|&m| local[g.tgt(m) as usize]).collect();
    let norm = normalize(objs.len(), &src, &tgt, |h, f| mlocal[&g.compose(mors[h as usize], mors[f as usize])]);
    let (oi, mi) = (norm.obj_inverse(), norm.mor_inverse());
    GFunctor {
        src: norm.gpd.clone(),
        tgt: g.clone(),
        ob: oi.iter().map(|&r| objs[r as usize]).collect(),
        mor: mi.iter().map(|&r| mors[r as usize]).collect(),
    }
}

/// The strict fiber of `p: E → B` over the object `b`, as an inclusion.
pub fn fiber(p: &GFunctor, b: u32) -> GFunctor {
    let e = &p.src;
    let objs: Vec<u32> = (0..e.num_objects() as u32).filter(|&x| p.ob[x as usize] == b).collect();
    let idb = p.tgt.id(b);
    subgroupoid(e, &objs, |m| p.mor[m as usize] == idb)
}

/// The relative path object `P_B(X)` of `p: X → B`: the full subgroupoid of
/// `X^I` on the arrows sent to identities, with its endpoint maps and unit.
pub fn relative_path(p: &GFunctor) -> ArrowGroupoid {
    let x = &p.src;
    let full = arrow_groupoid(x);
    let keep: Vec<bool> = full
        .arrows
        .iter()
        .map(|&m| p.mor[m as usize] == p.tgt.id(p.ob[x.src(m) as usize]))
        .collect();
    let incl = full_subgroupoid(&full.gpd, &keep);
    let back: HashMap<u32, u32> = incl.ob.iter().enumerate().map(|(i, &o)| (o, i as u32)).collect();
    let mback: HashMap<u32, u32> = incl.mor.iter().enumerate().map(|(i, &m)| (m, i as u32)).collect();
    let sigma = GFunctor {
        src: x.clone(),
        tgt: incl.src.clone(),
        ob: full.sigma.ob.iter().map(|o| back[o]).collect(),
        mor: full.sigma.mor.iter().map(|m| mback[m]).collect(),
    };
    ArrowGroupoid {
        d0: full.d0.after(&incl),
        d1: full.d1.after(&incl),
        arrows: incl.ob.iter().map(|&o| full.arrows[o as usize]).collect(),
        gpd: incl.src.clone(),
        sigma,
    }
}

/// Canonical isomorphism between isomorphic groupoids, matching components
/// greedily in order.
pub fn groupoid_iso(a: &Arc<Groupoid>, b: &Arc<Groupoid>) -> Option<GFunctor> {
    if a.num_objects() != b.num_objects() || a.num_morphisms() != b.num_morphisms() {
        return None;
    }
    let mut used = vec![false; b.comps.len()];
    let mut parts = Vec::new();
    fn go(
        a: &Groupoid,
        b: &Groupoid,
        c: usize,
        used: &mut [bool],
        parts: &mut Vec<(u32, Vec<u32>, Vec<u32>)>,
    ) -> bool {
        if c == a.comps.len() {
            return true;
        }
        let ca = &a.comps[c];
        for d in 0..b.comps.len() {
            let cb = &b.comps[d];
            if used[d] || ca.size != cb.size {
                continue;
            }
            let Some(phi) = ca.group.is_isomorphic(&cb.group) else { continue };
            used[d] = true;
            let phi_mor = phi.iter().map(|&g| b.vertex(d, g)).collect();
            let trees = (1..cb.size).map(|j| b.encode(d, 0, j, 0)).collect();
            parts.push((b.base(d), phi_mor, trees));
            if go(a, b, c + 1, used, parts) {
                return true;
            }
            parts.pop();
            used[d] = false;
        }
        false
    }
    go(a, b, 0, &mut used, &mut parts).then(|| GFunctor::assemble(a, b, &parts))
}

/// Data of a slice exponential `[X, Y]_B` (or, restricted to sections, of an
/// internal product).
#[derive(Debug, Clone)]
pub struct ExponentialOver {
    pub gpd: Arc<Groupoid>,
    /// `[X, Y]_B → B`.
    pub structure: GFunctor,
    /// Pullback of `fx: X → B` and `structure`; `p1` lands in `X`.
    pub cone: Cone,
    /// `X ×_B [X, Y]_B → Y`.
    pub eval: GFunctor,
}

struct FiberData {
    incl: GFunctor,
    local: HashMap<u32, u32>,
    mlocal: HashMap<u32, u32>,
}

fn fiber_data(p: &GFunctor, b: u32) -> FiberData {
    let incl = fiber(p, b);
    let local = incl.ob.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
    let mlocal = incl.mor.iter().enumerate().map(|(i, &m)| (m, i as u32)).collect();
    FiberData { incl, local, mlocal }
}

/// The slice exponential `[X, Y]_B` of isofibrations `fx: X → B` and
/// `fy: Y → B`. Over `b` its objects are the functors `X_b → Y_b`; an arrow
/// over `β: b → b'` is a functor from the pullback of `X` along the walking
/// isomorphism `β` to `Y` over `B`, stored by its values `θ_x` on the chosen
/// lifts `ξ_x` of `β`. With `sections = Some(p)`, where `p: Y → X` is over `B`,
/// only sections of `p` and arrows with `p θ_x = ξ_x` are kept: this is the
/// fiber of `[X, p]_B` over the identity, i.e. `Π_{fx}(Y, p)`.
pub fn exponential_over(fx: &GFunctor, fy: &GFunctor, sections: Option<&GFunctor>) -> ExponentialOver {
    let (x, y, b) = (&fx.src, &fy.src, &fx.tgt);
    let nb = b.num_objects();
    let fx_fib: Vec<FiberData> = (0..nb as u32).map(|o| fiber_data(fx, o)).collect();
    let fy_fib: Vec<FiberData> = (0..nb as u32).map(|o| fiber_data(fy, o)).collect();

    // Objects: (b, F) with F: X_b → Y_b.
    let mut objs: Vec<(u32, GFunctor)> = Vec::new();
    for bo in 0..nb as u32 {
        let (xf, yf) = (&fx_fib[bo as usize], &fy_fib[bo as usize]);
        let fs = match sections {
            None => functors(&xf.incl.src, &yf.incl.src, None),
            Some(p) => {
                // p restricted to the fibers, Y_b → X_b.
                let pb = GFunctor {
                    src: yf.incl.src.clone(),
                    tgt: xf.incl.src.clone(),
                    ob: yf.incl.ob.iter().map(|&e| xf.local[&p.ob[e as usize]]).collect(),
                    mor: yf.incl.mor.iter().map(|&m| xf.mlocal[&p.mor[m as usize]]).collect(),
                };
                functors(&xf.incl.src, &yf.incl.src, Some((&pb, &GFunctor::identity(&xf.incl.src))))
            }
        };
        objs.extend(fs.into_iter().map(|f| (bo, f)));
    }
    // Chosen lift of β at x: the identity when β is one, else the least.
    let mut lifts_of: HashMap<(u32, u32), u32> = HashMap::new();
    for xo in 0..x.num_objects() as u32 {
        let bo = fx.ob[xo as usize];
        lifts_of.insert((xo, b.id(bo)), x.id(xo));
        for m in x.out(xo) {
            lifts_of.entry((xo, fx.mor[m as usize])).or_insert(m);
        }
    }
    let lift = |xo: u32, beta: u32| -> u32 { *lifts_of.get(&(xo, beta)).expect("fx is an isofibration") };
    // Value of F at an X-morphism inside the fiber over its base, in Y.
    let f_at = |f: &GFunctor, bo: u32, m: u32| -> u32 {
        let fd = &fy_fib[bo as usize];
        fd.incl.mor[f.mor[fx_fib[bo as usize].mlocal[&m] as usize] as usize]
    };
    let f_obj = |f: &GFunctor, bo: u32, xo: u32| -> u32 {
        fy_fib[bo as usize].incl.ob[f.ob[fx_fib[bo as usize].local[&xo] as usize] as usize]
    };

    // Arrows.
    type Key = (u32, u32, u32, Vec<u32>);
    let mut arrows: Vec<Key> = Vec::new();
    let mut arrow_idx: HashMap<Key, u32> = HashMap::new();
    let mut by_base: Vec<Vec<u32>> = vec![Vec::new(); nb];
    for (i, (bo, _)) in objs.iter().enumerate() {
        by_base[*bo as usize].push(i as u32);
    }
    for beta in 0..b.num_morphisms() as u32 {
        let (b0, b1) = (b.src(beta), b.tgt(beta));
        let xf = &fx_fib[b0 as usize];
        let xg = &xf.incl.src;
        let lifts: Vec<u32> = xf.incl.ob.iter().map(|&xo| lift(xo, beta)).collect();
        for &fi in &by_base[b0 as usize] {
            let f = &objs[fi as usize].1;
            for &gi in &by_base[b1 as usize] {
                let g = &objs[gi as usize].1;
                let mut per_comp: Vec<Vec<Vec<(u32, u32)>>> = Vec::new();
                let mut dead = false;
                for c in 0..xg.comps.len() {
                    let l0 = xg.base(c);
                    let x0 = xf.incl.ob[l0 as usize];
                    let xi0 = lifts[l0 as usize];
                    let (fx0, gx0t) = (f_obj(f, b0, x0), f_obj(g, b1, x.tgt(xi0)));
                    let mut options = Vec::new();
                    'theta: for theta0 in y.hom(fx0, gx0t) {
                        if fy.mor[theta0 as usize] != beta {
                            continue;
                        }
                        for &s in xg.comps[c].group.generators() {
                            let gam = xf.incl.mor[xg.vertex(c, s) as usize];
                            let conj = x.compose(xi0, x.compose(gam, x.inverse(xi0)));
                            let lhs = y.compose(theta0, f_at(f, b0, gam));
                            let rhs = y.compose(f_at(g, b1, conj), theta0);
                            if lhs != rhs {
                                continue 'theta;
                            }
                        }
                        let mut fam = Vec::new();
                        for l in xg.objects_of(c) {
                            let xo = xf.incl.ob[l as usize];
                            let t = xf.incl.mor[xg.tree(l) as usize];
                            let xi = lifts[l as usize];
                            let eta = x.compose(xi, x.compose(t, x.inverse(xi0)));
                            let th = y.compose(f_at(g, b1, eta), y.compose(theta0, y.inverse(f_at(f, b0, t))));
                            if let Some(p) = sections {
                                if p.mor[th as usize] != xi {
                                    continue 'theta;
                                }
                            }
                            fam.push((xo, th));
                        }
                        options.push(fam);
                    }
                    if options.is_empty() {
                        dead = true;
                        break;
                    }
                    per_comp.push(options);
                }
                if dead {
                    continue;
                }
                let radix: Vec<usize> = per_comp.iter().map(Vec::len).collect();
                let mut idx = vec![0usize; per_comp.len()];
                loop {
                    let mut theta: Vec<(u32, u32)> = Vec::new();
                    for (c, &k) in idx.iter().enumerate() {
                        theta.extend_from_slice(&per_comp[c][k]);
                    }
                    theta.sort_unstable();
                    let key = (beta, fi, gi, theta.into_iter().map(|(_, t)| t).collect());
                    arrow_idx.insert(key.clone(), arrows.len() as u32);
                    arrows.push(key);
                    if !odometer_mixed(&mut idx, &radix) {
                        break;
                    }
                }
            }
        }
    }

    // θ as a map from X-objects of the source fiber.
    let theta_at = |key: &Key, xo: u32| -> u32 {
        let b0 = objs[key.1 as usize].0;
        key.3[fx_fib[b0 as usize].local[&xo] as usize]
    };
    let src: Vec<u32> = arrows.iter().map(|k| k.1).collect();
    let tgt: Vec<u32> = arrows.iter().map(|k| k.2).collect();
    let compose = |h: u32, g: u32| -> u32 {
        let (k2, k1) = (&arrows[h as usize], &arrows[g as usize]);
        let beta = b.compose(k2.0, k1.0);
        let b0 = objs[k1.1 as usize].0;
        let b2 = objs[k2.2 as usize].0;
        let fin = &objs[k2.2 as usize].1;
        let fam: Vec<u32> = fx_fib[b0 as usize]
            .incl
            .ob
            .iter()
            .map(|&xo| {
                let xi1 = lift(xo, k1.0);
                let xt = x.tgt(xi1);
                let xi2 = lift(xt, k2.0);
                let xi = lift(xo, beta);
                let eta = x.compose(xi, x.inverse(x.compose(xi2, xi1)));
                y.compose(f_at(fin, b2, eta), y.compose(theta_at(k2, xt), theta_at(k1, xo)))
            })
            .collect();
        arrow_idx[&(beta, k1.1, k2.2, fam)]
    };
    let norm = normalize(objs.len(), &src, &tgt, compose);
    let (oi, mi) = (norm.obj_inverse(), norm.mor_inverse());
    let gpd = norm.gpd.clone();
    let structure = GFunctor {
        src: gpd.clone(),
        tgt: b.clone(),
        ob: oi.iter().map(|&r| objs[r as usize].0).collect(),
        mor: mi.iter().map(|&r| arrows[r as usize].0).collect(),
    };
    let cone = pullback(fx, &structure);
    let apex = &cone.apex;
    let eval = GFunctor {
        src: apex.clone(),
        tgt: y.clone(),
        ob: (0..apex.num_objects())
            .map(|e| {
                let (xo, o) = (cone.p1.ob[e], cone.p2.ob[e]);
                let (bo, f) = &objs[oi[o as usize] as usize];
                f_obj(f, *bo, xo)
            })
            .collect(),
        mor: (0..apex.num_morphisms())
            .map(|e| {
                let (xi, a) = (cone.p1.mor[e], cone.p2.mor[e]);
                let key = &arrows[mi[a as usize] as usize];
                let (b1, g) = (&objs[key.2 as usize].0, &objs[key.2 as usize].1);
                let xo = x.src(xi);
                let l = lift(xo, key.0);
                let vert = x.compose(xi, x.inverse(l));
                y.compose(f_at(g, *b1, vert), theta_at(key, xo))
            })
            .collect(),
    };
    ExponentialOver { gpd, structure, cone, eval }
}
