//! Clan structures: axiom verification, slices, base change, sums, fibers,
//! Reedy squares, arrow and span clans, clan morphisms and generic elements.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::fincat::{
    all_morphisms, check_square, enumerate_functors, enumerate_nats, functor_law_witness, pullback_cone_witness,
    search_pullback, Category, CategoryPresentation, FinCat, Functor, FunctorData, InputError, LoadError,
    MorphismRecord, SquareData,
};
use crate::report::{Check, VerificationReport};

/// A chosen pullback of `f: X → Z` and `g: Y → Z`, with `p1: apex → X` and
/// `p2: apex → Y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pullback<O, M> {
    pub apex: O,
    pub p1: M,
    pub p2: M,
}

pub type PullbackOf<C> = Pullback<<C as Category>::Obj, <C as Category>::Mor>;

/// A category with a terminal object and a class of fibrations with chosen
/// (canonical) pullbacks.
pub trait Clan: Category {
    fn terminal(&self) -> Self::Obj;

    fn to_terminal(&self, a: &Self::Obj) -> Self::Mor {
        self.hom(a, &self.terminal())
            .into_iter()
            .next()
            .expect("every object maps to the terminal object")
    }

    fn is_fibration(&self, f: &Self::Mor) -> bool;

    /// The canonical pullback of `f` and `g`, if one exists.
    fn pullback(&self, f: &Self::Mor, g: &Self::Mor) -> Option<PullbackOf<Self>>;

    /// The mediating map into `pb` for the cone `(a, b)`.
    fn pair(&self, pb: &PullbackOf<Self>, a: &Self::Mor, b: &Self::Mor) -> Option<Self::Mor> {
        let w = self.dom(a);
        self.hom_over(&w, &pb.p1, a).into_iter().find(|m| &self.compose(&pb.p2, m) == b)
    }

    fn product(&self, a: &Self::Obj, b: &Self::Obj) -> Option<PullbackOf<Self>> {
        self.pullback(&self.to_terminal(a), &self.to_terminal(b))
    }
}

/// Base change of `p` along `f`: the first projection of `pullback(f, p)`.
pub fn base_change_of<C: Clan>(c: &C, f: &C::Mor, p: &C::Mor) -> Option<PullbackOf<C>> {
    c.pullback(f, p)
}

/// An isomorphism `a → b`, least first.
pub fn find_iso<C: Category>(c: &C, a: &C::Obj, b: &C::Obj) -> Option<C::Mor> {
    c.hom(a, b).into_iter().find(|f| c.is_iso(f))
}

/// A presented clan: a validated presentation, a terminal object and a marked
/// class of fibrations. Pullbacks are found by exhaustive search and cached.
#[derive(Debug)]
pub struct ClanStructure {
    pub cat: Arc<FinCat>,
    pub terminal: usize,
    pub fibrations: Vec<bool>,
    cache: Mutex<HashMap<(usize, usize), Option<Pullback<usize, usize>>>>,
}

impl Clone for ClanStructure {
    fn clone(&self) -> Self {
        ClanStructure::new(self.cat.clone(), self.terminal, self.fibrations.clone())
    }
}

impl ClanStructure {
    pub fn new(cat: Arc<FinCat>, terminal: usize, fibrations: Vec<bool>) -> Self {
        ClanStructure { cat, terminal, fibrations, cache: Mutex::new(HashMap::new()) }
    }

    /// Reads `terminal` and `fibrations` from the presentation.
    pub fn from_presentation(p: &CategoryPresentation, max_morphisms: usize) -> Result<Self, LoadError> {
        let cat = FinCat::from_presentation(p, max_morphisms)?;
        let t = p
            .terminal
            .as_deref()
            .ok_or_else(|| InputError::Other("presentation has no terminal object".into()))?;
        let terminal = cat.object(t)?;
        let mut fibrations = vec![false; cat.num_morphisms()];
        for f in &p.fibrations {
            fibrations[cat.morphism(f)?] = true;
        }
        Ok(ClanStructure::new(Arc::new(cat), terminal, fibrations))
    }

    pub fn from_json(text: &str, max_morphisms: usize) -> Result<Self, LoadError> {
        let p: CategoryPresentation = serde_json::from_str(text)?;
        Self::from_presentation(&p, max_morphisms)
    }

    pub fn to_presentation(&self) -> CategoryPresentation {
        let mut p = self.cat.to_presentation();
        p.terminal = Some(self.cat.obj_name(self.terminal).to_string());
        p.fibrations = self
            .cat
            .morphisms()
            .filter(|&m| self.fibrations[m])
            .map(|m| self.cat.mor_name(m).to_string())
            .collect();
        p
    }

    pub fn with_fibrations(&self, fibrations: Vec<bool>) -> Self {
        ClanStructure::new(self.cat.clone(), self.terminal, fibrations)
    }

    pub fn object(&self, name: &str) -> Result<usize, InputError> {
        self.cat.object(name)
    }

    pub fn morphism(&self, name: &str) -> Result<usize, InputError> {
        self.cat.morphism(name)
    }
}

impl Category for ClanStructure {
    type Obj = usize;
    type Mor = usize;
    fn dom(&self, f: &usize) -> usize {
        self.cat.dom(f)
    }
    fn cod(&self, f: &usize) -> usize {
        self.cat.cod(f)
    }
    fn id(&self, a: &usize) -> usize {
        self.cat.id(a)
    }
    fn compose(&self, g: &usize, f: &usize) -> usize {
        self.cat.compose(g, f)
    }
    fn hom(&self, a: &usize, b: &usize) -> Vec<usize> {
        self.cat.hom(a, b)
    }
    fn objects(&self) -> Vec<usize> {
        self.cat.objects()
    }
    fn obj_label(&self, a: &usize) -> String {
        self.cat.obj_label(a)
    }
    fn mor_label(&self, f: &usize) -> String {
        self.cat.mor_label(f)
    }
}

impl Clan for ClanStructure {
    fn terminal(&self) -> usize {
        self.terminal
    }
    fn is_fibration(&self, f: &usize) -> bool {
        self.fibrations[*f]
    }
    fn pullback(&self, f: &usize, g: &usize) -> Option<Pullback<usize, usize>> {
        if let Some(hit) = self.cache.lock().unwrap().get(&(*f, *g)) {
            return hit.clone();
        }
        let found = search_pullback(&*self.cat, f, g)
            .ok()
            .flatten()
            .map(|(apex, p1, p2)| Pullback { apex, p1, p2 });
        self.cache.lock().unwrap().insert((*f, *g), found.clone());
        found
    }
}

/// Checks the clan axioms exhaustively over the working set.
pub fn verify_clan<C: Clan>(c: &C) -> VerificationReport {
    let mut r = VerificationReport::new();
    let objs = c.objects();
    let t = c.terminal();
    let mors = all_morphisms(c);
    let fibs: Vec<C::Mor> = mors.iter().filter(|f| c.is_fibration(f)).cloned().collect();

    r.timed("terminal", || {
        objs.iter().find_map(|a| {
            let n = c.hom(a, &t).len();
            (n != 1).then(|| json!({"object": c.obj_label(a), "maps_to_terminal": n}))
        })
    });
    r.timed("isomorphisms_are_fibrations", || {
        mors.par_iter()
            .find_map_first(|f| (!c.is_fibration(f) && c.is_iso(f)).then(|| json!({"iso": c.mor_label(f)})))
    });
    r.timed("fibrations_compose", || {
        fibs.par_iter().find_map_first(|f| {
            fibs.iter().find_map(|g| {
                if c.dom(g) != c.cod(f) {
                    return None;
                }
                let gf = c.compose(g, f);
                (!c.is_fibration(&gf)).then(|| {
                    json!({"pair": [c.mor_label(g), c.mor_label(f)], "composite": c.mor_label(&gf)})
                })
            })
        })
    });
    let mut base_change_witness = None;
    r.timed("fibrations_carrable", || {
        let found = fibs.par_iter().find_map_first(|p| {
            let y = c.cod(p);
            objs.iter().find_map(|b| {
                c.hom(b, &y).into_iter().find_map(|f| match c.pullback(&f, p) {
                    None => Some((true, json!({"fibration": c.mor_label(p), "along": c.mor_label(&f)}))),
                    Some(pb) if !c.is_fibration(&pb.p1) => Some((
                        false,
                        json!({
                            "fibration": c.mor_label(p),
                            "along": c.mor_label(&f),
                            "base_change": c.mor_label(&pb.p1),
                        }),
                    )),
                    Some(_) => None,
                })
            })
        });
        match found {
            Some((true, w)) => Some(w),
            Some((false, w)) => {
                base_change_witness = Some(w);
                None
            }
            None => None,
        }
    });
    r.push(Check::from_witness("base_change_is_fibration", base_change_witness));
    r.timed("maps_to_terminal_are_fibrations", || {
        objs.iter().find_map(|a| {
            let f = c.to_terminal(a);
            (!c.is_fibration(&f)).then(|| json!({"map": c.mor_label(&f)}))
        })
    });
    r
}

/// Whether `p: E → B` is a cartesian projection, i.e. part of a product
/// diagram `B ← E → F`.
pub fn is_cartesian_projection<C: Clan>(c: &C, p: &C::Mor) -> bool {
    let (e, b) = (c.dom(p), c.cod(p));
    let tb = c.to_terminal(&b);
    c.objects().into_iter().any(|f| {
        let tf = c.to_terminal(&f);
        c.hom(&e, &f)
            .into_iter()
            .any(|q| pullback_cone_witness(c, &tb, &tf, &e, p, &q).is_none())
    })
}

/// The smallest clan structure on a presentation with finite products: the
/// fibrations are the cartesian projections.
pub fn smallest_clan(cat: Arc<FinCat>) -> Result<ClanStructure, InputError> {
    let objs = cat.objects();
    let terminal = objs
        .iter()
        .copied()
        .find(|&t| objs.iter().all(|a| cat.hom(a, &t).len() == 1))
        .ok_or_else(|| InputError::Other("no terminal object".into()))?;
    let probe = ClanStructure::new(cat.clone(), terminal, vec![true; cat.num_morphisms()]);
    for a in &objs {
        for b in &objs {
            if probe.product(a, b).is_none() {
                return Err(InputError::Other(format!(
                    "missing product {} × {}",
                    cat.obj_name(*a),
                    cat.obj_name(*b)
                )));
            }
        }
    }
    let fibrations = cat.morphisms().map(|p| is_cartesian_projection(&probe, &p)).collect();
    Ok(ClanStructure::new(cat, terminal, fibrations))
}

/// Whether every fibration of `a` is a fibration of `b` (same presentation).
pub fn fibrations_contained(a: &ClanStructure, b: &ClanStructure) -> bool {
    a.fibrations.iter().zip(&b.fibrations).all(|(x, y)| !x || *y)
}

/// An object of a slice: `obj` together with its structure map.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Over<O, M> {
    pub obj: O,
    pub map: M,
}

/// A morphism of a slice, carrying its endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SliceMor<O, M> {
    pub src: Over<O, M>,
    pub tgt: Over<O, M>,
    pub map: M,
}

pub type OverOf<C> = Over<<C as Category>::Obj, <C as Category>::Mor>;
pub type SliceMorOf<C> = SliceMor<<C as Category>::Obj, <C as Category>::Mor>;

/// The local clan `E(A)`: fibrations into `A` and maps over `A`.
pub struct Slice<'a, C: Clan> {
    pub base: &'a C,
    pub over: C::Obj,
    working: Vec<OverOf<C>>,
}

impl<'a, C: Clan> Slice<'a, C> {
    /// Working set: every fibration into `a` from a working-set object of `base`.
    pub fn new(base: &'a C, a: C::Obj) -> Self {
        let mut working = Vec::new();
        for x in base.objects() {
            for p in base.hom(&x, &a) {
                if base.is_fibration(&p) {
                    working.push(Over { obj: x.clone(), map: p });
                }
            }
        }
        Slice { base, over: a, working }
    }

    pub fn with_objects(base: &'a C, a: C::Obj, working: Vec<OverOf<C>>) -> Self {
        Slice { base, over: a, working }
    }

    pub fn over_obj(&self, x: &C::Obj, p: &C::Mor) -> OverOf<C> {
        Over { obj: x.clone(), map: p.clone() }
    }

    /// Wraps a base map between two objects over `A`.
    pub fn lift(&self, src: &OverOf<C>, tgt: &OverOf<C>, f: &C::Mor) -> SliceMorOf<C> {
        SliceMor { src: src.clone(), tgt: tgt.clone(), map: f.clone() }
    }

    pub fn push_object(&mut self, o: OverOf<C>) {
        if !self.working.contains(&o) {
            self.working.push(o);
        }
    }
}

impl<C: Clan> Category for Slice<'_, C> {
    type Obj = OverOf<C>;
    type Mor = SliceMorOf<C>;

    fn dom(&self, f: &Self::Mor) -> Self::Obj {
        f.src.clone()
    }
    fn cod(&self, f: &Self::Mor) -> Self::Obj {
        f.tgt.clone()
    }
    fn id(&self, a: &Self::Obj) -> Self::Mor {
        SliceMor { src: a.clone(), tgt: a.clone(), map: self.base.id(&a.obj) }
    }
    fn compose(&self, g: &Self::Mor, f: &Self::Mor) -> Self::Mor {
        SliceMor { src: f.src.clone(), tgt: g.tgt.clone(), map: self.base.compose(&g.map, &f.map) }
    }
    fn hom(&self, a: &Self::Obj, b: &Self::Obj) -> Vec<Self::Mor> {
        self.base
            .hom_over(&a.obj, &b.map, &a.map)
            .into_iter()
            .map(|m| SliceMor { src: a.clone(), tgt: b.clone(), map: m })
            .collect()
    }
    fn objects(&self) -> Vec<Self::Obj> {
        self.working.clone()
    }
    fn hom_over(&self, w: &Self::Obj, p: &Self::Mor, g: &Self::Mor) -> Vec<Self::Mor> {
        // Over A, a map w → dom p with p∘h = g is the same as a base map over g.
        self.base
            .hom_over(&w.obj, &p.map, &g.map)
            .into_iter()
            .map(|m| SliceMor { src: w.clone(), tgt: p.src.clone(), map: m })
            .collect()
    }
    fn extensions(&self, u: &Self::Mor, t: &Self::Mor) -> Vec<Self::Mor> {
        self.base
            .extensions(&u.map, &t.map)
            .into_iter()
            .filter(|d| self.base.compose(&t.tgt.map, d) == u.tgt.map)
            .map(|d| SliceMor { src: u.tgt.clone(), tgt: t.tgt.clone(), map: d })
            .collect()
    }
    fn inverse(&self, f: &Self::Mor) -> Option<Self::Mor> {
        self.base
            .inverse(&f.map)
            .map(|g| SliceMor { src: f.tgt.clone(), tgt: f.src.clone(), map: g })
    }
    fn obj_label(&self, a: &Self::Obj) -> String {
        format!("{}/{}", self.base.obj_label(&a.obj), self.base.mor_label(&a.map))
    }
    fn mor_label(&self, f: &Self::Mor) -> String {
        format!("{}:{}>{}", self.base.mor_label(&f.map), self.base.mor_label(&f.src.map), self.base.mor_label(&f.tgt.map))
    }
}

impl<C: Clan> Clan for Slice<'_, C> {
    fn terminal(&self) -> Self::Obj {
        Over { obj: self.over.clone(), map: self.base.id(&self.over) }
    }
    fn to_terminal(&self, a: &Self::Obj) -> Self::Mor {
        SliceMor { src: a.clone(), tgt: self.terminal(), map: a.map.clone() }
    }
    fn is_fibration(&self, f: &Self::Mor) -> bool {
        self.base.is_fibration(&f.map)
    }
    fn pullback(&self, f: &Self::Mor, g: &Self::Mor) -> Option<PullbackOf<Self>> {
        let pb = self.base.pullback(&f.map, &g.map)?;
        let apex = Over { obj: pb.apex.clone(), map: self.base.compose(&f.src.map, &pb.p1) };
        Some(Pullback {
            p1: SliceMor { src: apex.clone(), tgt: f.src.clone(), map: pb.p1 },
            p2: SliceMor { src: apex.clone(), tgt: g.src.clone(), map: pb.p2 },
            apex,
        })
    }
    fn pair(&self, pb: &PullbackOf<Self>, a: &Self::Mor, b: &Self::Mor) -> Option<Self::Mor> {
        let base_pb = Pullback { apex: pb.apex.obj.clone(), p1: pb.p1.map.clone(), p2: pb.p2.map.clone() };
        let m = self.base.pair(&base_pb, &a.map, &b.map)?;
        Some(SliceMor { src: a.src.clone(), tgt: pb.apex.clone(), map: m })
    }
}

/// Base change `f*: E(B) → E(A)` along `f: A → B`.
pub struct BaseChange<'a, C: Clan> {
    pub clan: &'a C,
    pub along: C::Mor,
}

impl<'a, C: Clan> BaseChange<'a, C> {
    pub fn new(clan: &'a C, along: C::Mor) -> Self {
        BaseChange { clan, along }
    }

    pub fn cone(&self, x: &OverOf<C>) -> PullbackOf<C> {
        self.clan.pullback(&self.along, &x.map).unwrap_or_else(|| {
            panic!(
                "pullback of {} along {} is absent",
                self.clan.mor_label(&x.map),
                self.clan.mor_label(&self.along)
            )
        })
    }

    /// Like `on_obj` but reports an absent pullback instead of panicking.
    pub fn try_obj(&self, x: &OverOf<C>) -> Result<OverOf<C>, InputError> {
        self.clan
            .pullback(&self.along, &x.map)
            .map(|pb| Over { obj: pb.apex, map: pb.p1 })
            .ok_or_else(|| {
                InputError::Other(format!(
                    "pullback of {} along {} is absent",
                    self.clan.mor_label(&x.map),
                    self.clan.mor_label(&self.along)
                ))
            })
    }
}

impl<'a, 'b, C: Clan> Functor<Slice<'b, C>, Slice<'b, C>> for BaseChange<'a, C> {
    fn on_obj(&self, x: &OverOf<C>) -> OverOf<C> {
        let pb = self.cone(x);
        Over { obj: pb.apex, map: pb.p1 }
    }
    fn on_mor(&self, h: &SliceMorOf<C>) -> SliceMorOf<C> {
        let c = self.clan;
        let px = self.cone(&h.src);
        let py = self.cone(&h.tgt);
        let m = c
            .pair(&py, &px.p1, &c.compose(&h.map, &px.p2))
            .expect("base change of a map over B");
        SliceMor {
            src: Over { obj: px.apex, map: px.p1 },
            tgt: Over { obj: py.apex, map: py.p1 },
            map: m,
        }
    }
}

/// `Σ_f: E(A) → E(B)` for a fibration `f: A → B`: post-composition.
pub struct Sigma<'a, C: Clan> {
    pub clan: &'a C,
    pub along: C::Mor,
}

pub fn sigma_along<'a, C: Clan>(c: &'a C, f: &C::Mor) -> Result<Sigma<'a, C>, InputError> {
    if !c.is_fibration(f) {
        return Err(InputError::Other(format!("{} is not a fibration", c.mor_label(f))));
    }
    Ok(Sigma { clan: c, along: f.clone() })
}

impl<'a, 'b, C: Clan> Functor<Slice<'b, C>, Slice<'b, C>> for Sigma<'a, C> {
    fn on_obj(&self, x: &OverOf<C>) -> OverOf<C> {
        Over { obj: x.obj.clone(), map: self.clan.compose(&self.along, &x.map) }
    }
    fn on_mor(&self, h: &SliceMorOf<C>) -> SliceMorOf<C> {
        SliceMor { src: self.on_obj(&h.src), tgt: self.on_obj(&h.tgt), map: h.map.clone() }
    }
}

/// Checks `Σ_f ⊣ f*`: for every `(E, p)` over `A` and `(Y, q)` over `B` in the
/// given working sets, `h ↦ (p, h)` is a bijection
/// `Hom_B(Σ_f E, Y) → Hom_A(E, f*Y)`.
pub fn sigma_adjunction_witness<C: Clan>(
    c: &C,
    f: &C::Mor,
    over_a: &[OverOf<C>],
    over_b: &[OverOf<C>],
) -> Option<Value> {
    let bc = BaseChange::new(c, f.clone());
    for e in over_a {
        let fe = c.compose(f, &e.map);
        for y in over_b {
            let pb = bc.cone(y);
            let left = c.hom_over(&e.obj, &y.map, &fe);
            let right = c.hom_over(&e.obj, &pb.p1, &e.map);
            let mut image = HashSet::new();
            for h in &left {
                let Some(m) = c.pair(&pb, &e.map, h) else {
                    return Some(json!({"object": c.obj_label(&e.obj), "problem": "no pairing"}));
                };
                image.insert(m);
            }
            if image.len() != left.len() || image.len() != right.len() {
                return Some(json!({
                    "E": c.mor_label(&e.map),
                    "Y": c.mor_label(&y.map),
                    "left": left.len(),
                    "right": right.len(),
                    "image": image.len(),
                }));
            }
        }
    }
    None
}

/// The fiber of `p: E → A` at a point `x: 1 → A`: the canonical pullback.
pub fn fiber_of<C: Clan>(c: &C, p: &C::Mor, x: &C::Mor) -> Result<PullbackOf<C>, InputError> {
    if c.dom(x) != c.terminal() || c.cod(x) != c.cod(p) {
        return Err(InputError::Endpoints(format!("{} is not a point of the base", c.mor_label(x))));
    }
    c.pullback(x, p)
        .ok_or_else(|| InputError::Other(format!("fiber of {} at {} is absent", c.mor_label(p), c.mor_label(x))))
}

/// Whether the square has fibrations on its two codomain sides and a fibration
/// as gap map `X00 → X01 ×_{X11} X10`.
pub fn is_reedy_fibrant<C: Clan>(c: &C, s: &SquareData<C::Mor>) -> Result<bool, InputError> {
    check_square(c, s)?;
    if !c.is_fibration(&s.bottom) || !c.is_fibration(&s.right) {
        return Ok(false);
    }
    let pb = c
        .pullback(&s.bottom, &s.right)
        .ok_or_else(|| InputError::Other("gap pullback absent".into()))?;
    let gap = c
        .pair(&pb, &s.left, &s.top)
        .ok_or_else(|| InputError::Other("gap map absent".into()))?;
    Ok(c.is_fibration(&gap))
}

/// A span `X0 ← X01 → X1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanData<O, M> {
    pub x0: O,
    pub x1: O,
    pub apex: O,
    pub left: M,
    pub right: M,
}

pub type SpanOf<C> = SpanData<<C as Category>::Obj, <C as Category>::Mor>;

pub fn span<C: Category>(c: &C, left: &C::Mor, right: &C::Mor) -> SpanOf<C> {
    SpanData { x0: c.cod(left), x1: c.cod(right), apex: c.dom(left), left: left.clone(), right: right.clone() }
}

/// The pairing `(λ, ρ): X01 → X0 × X1`.
pub fn span_pairing<C: Clan>(c: &C, s: &SpanOf<C>) -> Option<(PullbackOf<C>, C::Mor)> {
    let prod = c.product(&s.x0, &s.x1)?;
    let m = c.pair(&prod, &s.left, &s.right)?;
    Some((prod, m))
}

pub fn is_fibrant_span<C: Clan>(c: &C, s: &SpanOf<C>) -> bool {
    span_pairing(c, s).is_some_and(|(_, m)| c.is_fibration(&m))
}

/// Composite of fibrant spans `A ⇀ B ⇀ C` through the pullback `X ×_B Y`.
pub fn compose_spans<C: Clan>(c: &C, x: &SpanOf<C>, y: &SpanOf<C>) -> Result<SpanOf<C>, InputError> {
    if x.x1 != y.x0 {
        return Err(InputError::Endpoints("spans are not composable".into()));
    }
    if !is_fibrant_span(c, x) || !is_fibrant_span(c, y) {
        return Err(InputError::Other("compose_spans expects fibrant spans".into()));
    }
    let pb = c
        .pullback(&x.right, &y.left)
        .ok_or_else(|| InputError::Other("middle pullback absent".into()))?;
    Ok(SpanData {
        x0: x.x0.clone(),
        x1: y.x1.clone(),
        left: c.compose(&x.left, &pb.p1),
        right: c.compose(&y.right, &pb.p2),
        apex: pb.apex,
    })
}

/// The arrow clan `E^(1)`: fibrations of `E` as objects, commuting squares
/// as morphisms, Reedy fibrations as fibrations.
pub struct ArrowClan<'a, C: Clan> {
    pub base: &'a C,
    working: Vec<C::Mor>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArrowMor<M> {
    pub src: M,
    pub tgt: M,
    pub f0: M,
    pub f1: M,
}

impl<'a, C: Clan> ArrowClan<'a, C> {
    pub fn new(base: &'a C) -> Self {
        let working = all_morphisms(base).into_iter().filter(|f| base.is_fibration(f)).collect();
        ArrowClan { base, working }
    }
}

impl<C: Clan> Category for ArrowClan<'_, C> {
    type Obj = C::Mor;
    type Mor = ArrowMor<C::Mor>;
    fn dom(&self, f: &Self::Mor) -> C::Mor {
        f.src.clone()
    }
    fn cod(&self, f: &Self::Mor) -> C::Mor {
        f.tgt.clone()
    }
    fn id(&self, a: &C::Mor) -> Self::Mor {
        let b = self.base;
        ArrowMor { src: a.clone(), tgt: a.clone(), f0: b.id(&b.dom(a)), f1: b.id(&b.cod(a)) }
    }
    fn compose(&self, g: &Self::Mor, f: &Self::Mor) -> Self::Mor {
        let b = self.base;
        ArrowMor { src: f.src.clone(), tgt: g.tgt.clone(), f0: b.compose(&g.f0, &f.f0), f1: b.compose(&g.f1, &f.f1) }
    }
    fn hom(&self, a: &C::Mor, t: &C::Mor) -> Vec<Self::Mor> {
        let b = self.base;
        let mut out = Vec::new();
        for f1 in b.hom(&b.cod(a), &b.cod(t)) {
            for f0 in b.hom_over(&b.dom(a), t, &b.compose(&f1, a)) {
                out.push(ArrowMor { src: a.clone(), tgt: t.clone(), f0, f1: f1.clone() });
            }
        }
        out.sort();
        out
    }
    fn objects(&self) -> Vec<C::Mor> {
        self.working.clone()
    }
    fn obj_label(&self, a: &C::Mor) -> String {
        self.base.mor_label(a)
    }
    fn mor_label(&self, f: &Self::Mor) -> String {
        format!("({},{}):{}>{}", self.base.mor_label(&f.f0), self.base.mor_label(&f.f1), self.base.mor_label(&f.src), self.base.mor_label(&f.tgt))
    }
}

impl<C: Clan> Clan for ArrowClan<'_, C> {
    fn terminal(&self) -> C::Mor {
        self.base.id(&self.base.terminal())
    }
    fn is_fibration(&self, f: &Self::Mor) -> bool {
        let b = self.base;
        if !b.is_fibration(&f.f1) {
            return false;
        }
        let Some(pb) = b.pullback(&f.f1, &f.tgt) else { return false };
        b.pair(&pb, &f.src, &f.f0).is_some_and(|gap| b.is_fibration(&gap))
    }
    fn pullback(&self, f: &Self::Mor, g: &Self::Mor) -> Option<PullbackOf<Self>> {
        let b = self.base;
        let q1 = b.pullback(&f.f1, &g.f1)?;
        let q0 = b.pullback(&f.f0, &g.f0)?;
        let induced = b.pair(
            &q1,
            &b.compose(&f.src, &q0.p1),
            &b.compose(&g.src, &q0.p2),
        )?;
        Some(Pullback {
            p1: ArrowMor { src: induced.clone(), tgt: f.src.clone(), f0: q0.p1.clone(), f1: q1.p1.clone() },
            p2: ArrowMor { src: induced.clone(), tgt: g.src.clone(), f0: q0.p2.clone(), f1: q1.p2.clone() },
            apex: induced,
        })
    }
}

/// The span clan `E^(∧)`: fibrant spans, with Reedy fibrations as fibrations.
pub struct SpanClan<'a, C: Clan> {
    pub base: &'a C,
    working: Vec<SpanOf<C>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanMor<O, M> {
    pub src: SpanData<O, M>,
    pub tgt: SpanData<O, M>,
    pub f0: M,
    pub f1: M,
    pub f01: M,
}

impl<'a, C: Clan> SpanClan<'a, C> {
    /// Working set: every fibrant span between working-set objects.
    pub fn new(base: &'a C) -> Self {
        let objs = base.objects();
        let mut working = Vec::new();
        for x01 in &objs {
            for x0 in &objs {
                for x1 in &objs {
                    for l in base.hom(x01, x0) {
                        for r in base.hom(x01, x1) {
                            let s = span(base, &l, &r);
                            if is_fibrant_span(base, &s) {
                                working.push(s);
                            }
                        }
                    }
                }
            }
        }
        SpanClan { base, working }
    }
}

impl<C: Clan> Category for SpanClan<'_, C> {
    type Obj = SpanOf<C>;
    type Mor = SpanMor<C::Obj, C::Mor>;
    fn dom(&self, f: &Self::Mor) -> Self::Obj {
        f.src.clone()
    }
    fn cod(&self, f: &Self::Mor) -> Self::Obj {
        f.tgt.clone()
    }
    fn id(&self, a: &Self::Obj) -> Self::Mor {
        let b = self.base;
        SpanMor { src: a.clone(), tgt: a.clone(), f0: b.id(&a.x0), f1: b.id(&a.x1), f01: b.id(&a.apex) }
    }
    fn compose(&self, g: &Self::Mor, f: &Self::Mor) -> Self::Mor {
        let b = self.base;
        SpanMor {
            src: f.src.clone(),
            tgt: g.tgt.clone(),
            f0: b.compose(&g.f0, &f.f0),
            f1: b.compose(&g.f1, &f.f1),
            f01: b.compose(&g.f01, &f.f01),
        }
    }
    fn hom(&self, x: &Self::Obj, y: &Self::Obj) -> Vec<Self::Mor> {
        let b = self.base;
        let mut out = Vec::new();
        for f0 in b.hom(&x.x0, &y.x0) {
            let l = b.compose(&f0, &x.left);
            for f1 in b.hom(&x.x1, &y.x1) {
                let r = b.compose(&f1, &x.right);
                for f01 in b.hom_over(&x.apex, &y.left, &l) {
                    if b.compose(&y.right, &f01) == r {
                        out.push(SpanMor { src: x.clone(), tgt: y.clone(), f0: f0.clone(), f1: f1.clone(), f01 });
                    }
                }
            }
        }
        out.sort();
        out
    }
    fn objects(&self) -> Vec<Self::Obj> {
        self.working.clone()
    }
    fn obj_label(&self, a: &Self::Obj) -> String {
        format!("{}<{}>{}", self.base.mor_label(&a.left), self.base.obj_label(&a.apex), self.base.mor_label(&a.right))
    }
    fn mor_label(&self, f: &Self::Mor) -> String {
        format!(
            "({},{},{}):{}>{}",
            self.base.mor_label(&f.f0),
            self.base.mor_label(&f.f01),
            self.base.mor_label(&f.f1),
            self.obj_label(&f.src),
            self.obj_label(&f.tgt)
        )
    }
}

impl<C: Clan> Clan for SpanClan<'_, C> {
    fn terminal(&self) -> Self::Obj {
        let b = self.base;
        let one = b.terminal();
        let i = b.id(&one);
        SpanData { x0: one.clone(), x1: one.clone(), apex: one, left: i.clone(), right: i }
    }
    fn is_fibration(&self, f: &Self::Mor) -> bool {
        let b = self.base;
        if !b.is_fibration(&f.f0) || !b.is_fibration(&f.f1) {
            return false;
        }
        let (Some((px, lx)), Some((py, ly))) = (span_pairing(b, &f.src), span_pairing(b, &f.tgt)) else {
            return false;
        };
        let Some(bottom) = b.pair(&py, &b.compose(&f.f0, &px.p1), &b.compose(&f.f1, &px.p2)) else {
            return false;
        };
        let sq = SquareData::new(f.f01.clone(), lx, ly, bottom);
        is_reedy_fibrant(b, &sq).unwrap_or(false)
    }
    fn pullback(&self, f: &Self::Mor, g: &Self::Mor) -> Option<PullbackOf<Self>> {
        let b = self.base;
        let q0 = b.pullback(&f.f0, &g.f0)?;
        let q1 = b.pullback(&f.f1, &g.f1)?;
        let q01 = b.pullback(&f.f01, &g.f01)?;
        let left = b.pair(&q0, &b.compose(&f.src.left, &q01.p1), &b.compose(&g.src.left, &q01.p2))?;
        let right = b.pair(&q1, &b.compose(&f.src.right, &q01.p1), &b.compose(&g.src.right, &q01.p2))?;
        let apex = SpanData { x0: q0.apex.clone(), x1: q1.apex.clone(), apex: q01.apex.clone(), left, right };
        Some(Pullback {
            p1: SpanMor { src: apex.clone(), tgt: f.src.clone(), f0: q0.p1.clone(), f1: q1.p1.clone(), f01: q01.p1.clone() },
            p2: SpanMor { src: apex.clone(), tgt: g.src.clone(), f0: q0.p2, f1: q1.p2, f01: q01.p2 },
            apex,
        })
    }
}

/// A clan with the fibration marks of `inner` edited, for corruption tests.
pub struct Remarked<'a, C: Clan> {
    pub inner: &'a C,
    pub unmarked: HashSet<C::Mor>,
    pub marked: HashSet<C::Mor>,
}

impl<'a, C: Clan> Remarked<'a, C> {
    pub fn new(inner: &'a C) -> Self {
        Remarked { inner, unmarked: HashSet::new(), marked: HashSet::new() }
    }
    pub fn unmark(mut self, f: C::Mor) -> Self {
        self.unmarked.insert(f);
        self
    }
    pub fn mark(mut self, f: C::Mor) -> Self {
        self.marked.insert(f);
        self
    }
}

impl<C: Clan> Category for Remarked<'_, C> {
    type Obj = C::Obj;
    type Mor = C::Mor;
    fn dom(&self, f: &C::Mor) -> C::Obj {
        self.inner.dom(f)
    }
    fn cod(&self, f: &C::Mor) -> C::Obj {
        self.inner.cod(f)
    }
    fn id(&self, a: &C::Obj) -> C::Mor {
        self.inner.id(a)
    }
    fn compose(&self, g: &C::Mor, f: &C::Mor) -> C::Mor {
        self.inner.compose(g, f)
    }
    fn hom(&self, a: &C::Obj, b: &C::Obj) -> Vec<C::Mor> {
        self.inner.hom(a, b)
    }
    fn objects(&self) -> Vec<C::Obj> {
        self.inner.objects()
    }
    fn hom_over(&self, w: &C::Obj, p: &C::Mor, g: &C::Mor) -> Vec<C::Mor> {
        self.inner.hom_over(w, p, g)
    }
    fn extensions(&self, u: &C::Mor, t: &C::Mor) -> Vec<C::Mor> {
        self.inner.extensions(u, t)
    }
    fn inverse(&self, f: &C::Mor) -> Option<C::Mor> {
        self.inner.inverse(f)
    }
    fn obj_label(&self, a: &C::Obj) -> String {
        self.inner.obj_label(a)
    }
    fn mor_label(&self, f: &C::Mor) -> String {
        self.inner.mor_label(f)
    }
}

impl<C: Clan> Clan for Remarked<'_, C> {
    fn terminal(&self) -> C::Obj {
        self.inner.terminal()
    }
    fn to_terminal(&self, a: &C::Obj) -> C::Mor {
        self.inner.to_terminal(a)
    }
    fn is_fibration(&self, f: &C::Mor) -> bool {
        if self.unmarked.contains(f) {
            return false;
        }
        self.marked.contains(f) || self.inner.is_fibration(f)
    }
    fn pullback(&self, f: &C::Mor, g: &C::Mor) -> Option<PullbackOf<Self>> {
        self.inner.pullback(f, g)
    }
    fn pair(&self, pb: &PullbackOf<Self>, a: &C::Mor, b: &C::Mor) -> Option<C::Mor> {
        self.inner.pair(pb, a, b)
    }
}

/// Materializes the working set of a finite clan as a presented clan.
/// Object and morphism identifiers are the labels of `c` when those are
/// unique, otherwise indexed names.
pub fn materialize<C: Clan>(c: &C, max_morphisms: usize) -> Result<(ClanStructure, Vec<C::Obj>, Vec<C::Mor>), InputError> {
    let objs = c.objects();
    let t = c.terminal();
    if !objs.contains(&t) {
        return Err(InputError::Other("terminal object is outside the working set".into()));
    }
    let mut mors = Vec::new();
    for a in &objs {
        for b in &objs {
            mors.extend(c.hom(a, b));
            if mors.len() > max_morphisms {
                return Err(InputError::TooLarge { what: "materialized clan".into(), size: mors.len(), cap: max_morphisms });
            }
        }
    }
    let unique = |labels: &Vec<String>| labels.iter().collect::<HashSet<_>>().len() == labels.len();
    let mut obj_names: Vec<String> = objs.iter().map(|o| c.obj_label(o)).collect();
    if !unique(&obj_names) {
        obj_names = (0..objs.len()).map(|i| format!("o{i:03}")).collect();
    }
    let mut mor_names: Vec<String> = mors.iter().map(|m| c.mor_label(m)).collect();
    if !unique(&mor_names) || mor_names.iter().any(|m| obj_names.contains(m)) {
        mor_names = (0..mors.len()).map(|i| format!("m{i:04}")).collect();
    }
    let obj_idx: HashMap<&C::Obj, usize> = objs.iter().enumerate().map(|(i, o)| (o, i)).collect();
    let mor_idx: HashMap<&C::Mor, usize> = mors.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut p = CategoryPresentation {
        objects: obj_names.clone(),
        ..Default::default()
    };
    for (i, m) in mors.iter().enumerate() {
        p.morphisms.push(MorphismRecord {
            id: mor_names[i].clone(),
            src: obj_names[obj_idx[&c.dom(m)]].clone(),
            tgt: obj_names[obj_idx[&c.cod(m)]].clone(),
        });
    }
    for (i, o) in objs.iter().enumerate() {
        p.identities.insert(obj_names[i].clone(), mor_names[mor_idx[&c.id(o)]].clone());
    }
    for f in &mors {
        for g in &mors {
            if c.cod(f) == c.dom(g) {
                let h = c.compose(g, f);
                let hi = *mor_idx
                    .get(&h)
                    .ok_or_else(|| InputError::Other("composite left the materialized hom-sets".into()))?;
                p.composition.push([mor_names[mor_idx[g]].clone(), mor_names[mor_idx[f]].clone(), mor_names[hi].clone()]);
            }
        }
    }
    p.terminal = Some(obj_names[obj_idx[&t]].clone());
    p.fibrations = mors
        .iter()
        .enumerate()
        .filter(|(_, m)| c.is_fibration(m))
        .map(|(i, _)| mor_names[i].clone())
        .collect();
    let cs = ClanStructure::from_presentation(&p, max_morphisms.max(mors.len())).map_err(|e| match e {
        LoadError::Input(i) => i,
        other => InputError::Other(other.to_string()),
    })?;
    // Re-key the original objects and morphisms by the sorted indices.
    let mut objs_sorted = vec![objs[0].clone(); objs.len()];
    for (i, o) in objs.iter().enumerate() {
        objs_sorted[cs.cat.object(&obj_names[i]).unwrap()] = o.clone();
    }
    let mut mors_sorted = mors.clone();
    for (i, m) in mors.iter().enumerate() {
        mors_sorted[cs.cat.morphism(&mor_names[i]).unwrap()] = m.clone();
    }
    Ok((cs, objs_sorted, mors_sorted))
}

/// `slice_clan(c, A)` on a presented clan.
pub fn slice_clan(c: &ClanStructure, a: usize, max_morphisms: usize) -> Result<ClanStructure, InputError> {
    materialize(&Slice::new(c, a), max_morphisms).map(|(s, _, _)| s)
}

/// `arrow_clan(c)` on a presented clan.
pub fn arrow_clan(c: &ClanStructure, max_morphisms: usize) -> Result<ClanStructure, InputError> {
    materialize(&ArrowClan::new(c), max_morphisms).map(|(s, _, _)| s)
}

/// The span clan of a presented clan.
pub fn span_clan(c: &ClanStructure, max_morphisms: usize) -> Result<ClanStructure, InputError> {
    materialize(&SpanClan::new(c), max_morphisms).map(|(s, _, _)| s)
}

/// Whether the working set's terminal-object candidate `t` is terminal.
fn is_terminal_in<C: Category>(c: &C, t: &C::Obj) -> bool {
    c.objects().iter().all(|a| c.hom(a, t).len() == 1)
}

/// The three conditions of a morphism of clans, checked over the working set
/// of `s`. With `isofibration` set, also checks that `f` lifts isomorphisms
/// out of images of working-set objects.
pub fn verify_clan_morphism<S: Clan, T: Clan, F: Functor<S, T>>(
    s: &S,
    t: &T,
    f: &F,
    isofibration: bool,
) -> VerificationReport {
    let mut r = VerificationReport::new();
    r.timed("functor_laws", || functor_law_witness(s, t, f));
    let mors = all_morphisms(s);
    r.timed("preserves_fibrations", || {
        mors.iter().find_map(|m| {
            (s.is_fibration(m) && !t.is_fibration(&f.on_mor(m))).then(|| json!({"fibration": s.mor_label(m)}))
        })
    });
    r.timed("preserves_terminal", || {
        let ft = f.on_obj(&s.terminal());
        (!is_terminal_in(t, &ft)).then(|| json!({"image": t.obj_label(&ft)}))
    });
    r.timed("preserves_base_changes", || {
        let objs = s.objects();
        mors.iter().filter(|p| s.is_fibration(p)).find_map(|p| {
            let y = s.cod(p);
            objs.iter().find_map(|b| {
                s.hom(b, &y).into_iter().find_map(|g| {
                    let pb = s.pullback(&g, p)?;
                    let (fg, fp) = (f.on_mor(&g), f.on_mor(p));
                    let ok = t.pullback(&fg, &fp).is_some_and(|q| {
                        t.pair(&q, &f.on_mor(&pb.p1), &f.on_mor(&pb.p2)).is_some_and(|m| t.is_iso(&m))
                    });
                    (!ok).then(|| json!({"fibration": s.mor_label(p), "along": s.mor_label(&g)}))
                })
            })
        })
    });
    if isofibration {
        r.timed("isofibration", || {
            let tobjs = t.objects();
            s.objects().into_iter().find_map(|x| {
                let fx = f.on_obj(&x);
                tobjs.iter().find_map(|y| {
                    t.hom(&fx, y).into_iter().filter(|b| t.is_iso(b)).find_map(|beta| {
                        let lifted = s.objects().into_iter().any(|x2| {
                            s.hom(&x, &x2).into_iter().any(|a| s.is_iso(&a) && f.on_mor(&a) == beta)
                        });
                        (!lifted).then(|| json!({"object": s.obj_label(&x), "iso": t.mor_label(&beta)}))
                    })
                })
            })
        });
    }
    r
}

/// Clan morphisms between two presented clans, found by enumerating functors.
pub fn enumerate_clan_morphisms(s: &Arc<ClanStructure>, t: &Arc<ClanStructure>) -> Vec<FunctorData> {
    enumerate_functors(&s.cat, &t.cat)
        .into_iter()
        .filter(|f| verify_clan_morphism(&**s, &**t, &PresentedMorphism(f), false).all_pass())
        .collect()
}

/// A presented functor viewed as a map between the clans over the same tables.
pub struct PresentedMorphism<'a>(pub &'a FunctorData);

impl Functor<ClanStructure, ClanStructure> for PresentedMorphism<'_> {
    fn on_obj(&self, a: &usize) -> usize {
        self.0.on_objects[*a]
    }
    fn on_mor(&self, f: &usize) -> usize {
        self.0.on_morphisms[*f]
    }
}

/// Cap on either side of the generic-element check.
pub const GENERIC_ELEMENT_CAP: usize = 12;

/// Counts gathered while checking a generic element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericElementCounts {
    pub morphisms_out_of_slice: usize,
    pub pairs: usize,
}

/// Checks that `H ↦ (H∘e_A, H(δ_A))` from clan morphisms `E(A) → R` to pairs
/// `(F, a: 1 → F(A))` is essentially surjective and fully faithful, by
/// enumeration. Refuses instances above [`GENERIC_ELEMENT_CAP`] morphisms.
pub fn verify_generic_element(
    e: &ClanStructure,
    a: usize,
    r: &ClanStructure,
) -> Result<(VerificationReport, GenericElementCounts), InputError> {
    for (what, c) in [("clan", e), ("target clan", r)] {
        if c.cat.num_morphisms() > GENERIC_ELEMENT_CAP {
            return Err(InputError::TooLarge { what: what.into(), size: c.cat.num_morphisms(), cap: GENERIC_ELEMENT_CAP });
        }
    }
    let e_arc = Arc::new(e.clone());
    let r_arc = Arc::new(r.clone());
    let slice = Slice::new(e, a);
    let (ea, ea_objs, ea_mors) = materialize(&slice, GENERIC_ELEMENT_CAP)?;
    let ea = Arc::new(ea);
    let obj_of: HashMap<&OverOf<ClanStructure>, usize> = ea_objs.iter().enumerate().map(|(i, o)| (o, i)).collect();
    let mor_of: HashMap<&SliceMorOf<ClanStructure>, usize> = ea_mors.iter().enumerate().map(|(i, m)| (m, i)).collect();

    // e_A: E → E(A), X ↦ (A × X, p1).
    let t_a = e.to_terminal(&a);
    let prod = |x: usize| {
        e.pullback(&t_a, &e.to_terminal(&x))
            .ok_or_else(|| InputError::Other(format!("missing product with {}", e.cat.obj_name(x))))
    };
    let mut on_objects = Vec::new();
    for x in e.objects() {
        let pb = prod(x)?;
        let o = Over { obj: pb.apex, map: pb.p1 };
        let idx = obj_of
            .get(&o)
            .copied()
            .ok_or_else(|| InputError::Other("A × X is not a fibration over A".into()))?;
        on_objects.push(idx);
    }
    let mut on_morphisms = Vec::new();
    for h in e.cat.morphisms() {
        let (x, y) = (e.dom(&h), e.cod(&h));
        let (px, py) = (prod(x)?, prod(y)?);
        let m = e.pair(&py, &px.p1, &e.compose(&h, &px.p2)).expect("product pairing");
        let sm = SliceMor { src: Over { obj: px.apex, map: px.p1 }, tgt: Over { obj: py.apex, map: py.p1 }, map: m };
        on_morphisms.push(mor_of[&sm]);
    }
    let e_a = FunctorData { source: e.cat.clone(), target: ea.cat.clone(), on_objects, on_morphisms };
    // δ_A: ⊤_A → e_A(A), the diagonal.
    let paa = prod(a)?;
    let diag = e.pair(&paa, &e.id(&a), &e.id(&a)).expect("diagonal");
    let top = Over { obj: a, map: e.id(&a) };
    let delta = mor_of[&SliceMor { src: top.clone(), tgt: Over { obj: paa.apex, map: paa.p1 }, map: diag }];
    let top_idx = obj_of[&top];

    let mut report = VerificationReport::new();
    let hs = enumerate_clan_morphisms(&ea, &r_arc);
    let fs = enumerate_clan_morphisms(&e_arc, &r_arc);
    let one_r = r.terminal;
    let point_of = |h: &FunctorData| -> usize {
        let iota = r.hom(&one_r, &h.on_objects[top_idx])[0];
        r.compose(&h.on_morphisms[delta], &iota)
    };

    // Pairs (F, a).
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        for pt in r.hom(&one_r, &f.on_objects[a]) {
            pairs.push((i, pt));
        }
    }
    let images: Vec<(FunctorData, usize)> = hs.iter().map(|h| (e_a.then(h), point_of(h))).collect();

    report.timed("comparison_lands_in_pairs", || {
        images.iter().enumerate().find_map(|(i, (f, _))| {
            (!fs.iter().any(|g| g.on_objects == f.on_objects && g.on_morphisms == f.on_morphisms))
                .then(|| json!({"morphism_index": i}))
        })
    });

    let pair_morphisms = |f: &FunctorData, pa: usize, g: &FunctorData, pb: usize| -> Vec<Vec<usize>> {
        enumerate_nats(f, g)
            .into_iter()
            .filter(|n| r.compose(&n.components[a], &pa) == pb)
            .map(|n| n.components)
            .collect()
    };

    report.timed("fully_faithful", || {
        for (i, h) in hs.iter().enumerate() {
            for (j, k) in hs.iter().enumerate() {
                let nats = enumerate_nats(h, k);
                let target = pair_morphisms(&images[i].0, images[i].1, &images[j].0, images[j].1);
                let whiskered: HashSet<Vec<usize>> = nats
                    .iter()
                    .map(|n| e_a.on_objects.iter().map(|&o| n.components[o]).collect())
                    .collect();
                let target_set: HashSet<Vec<usize>> = target.into_iter().collect();
                if whiskered.len() != nats.len() || whiskered != target_set {
                    return Some(json!({"pair": [i, j], "nats": nats.len(), "pair_morphisms": target_set.len()}));
                }
            }
        }
        None
    });

    report.timed("essentially_surjective", || {
        pairs.iter().find_map(|&(fi, pt)| {
            let f = &fs[fi];
            let hit = images.iter().any(|(g, pb)| {
                pair_morphisms(f, pt, g, *pb)
                    .iter()
                    .any(|comps| comps.iter().all(|c| r.is_iso(c)))
            });
            (!hit).then(|| json!({"functor_index": fi, "point": r.cat.mor_name(pt)}))
        })
    });

    Ok((report, GenericElementCounts { morphisms_out_of_slice: hs.len(), pairs: pairs.len() }))
}
