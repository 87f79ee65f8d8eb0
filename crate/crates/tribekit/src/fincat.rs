//! Finite-category kernel: the `Category` abstraction, explicit presentations,
//! limits by exhaustive search, lifting problems, functors and natural
//! transformations.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::report::{Check, VerificationReport};

/// Default cap on the number of morphisms of a loaded presentation.
pub const DEFAULT_MAX_MORPHISMS: usize = 64;

/// A category whose hom-sets can be enumerated. `objects` is the working set
/// over which universal statements quantify; hom-sets are always exact, so
/// objects outside the working set (constructed pullbacks, path objects) can
/// still be probed.
pub trait Category: Sync {
    type Obj: Clone + Eq + Hash + Ord + Debug + Send + Sync;
    type Mor: Clone + Eq + Hash + Ord + Debug + Send + Sync;

    fn dom(&self, f: &Self::Mor) -> Self::Obj;
    fn cod(&self, f: &Self::Mor) -> Self::Obj;
    fn id(&self, a: &Self::Obj) -> Self::Mor;
    /// `g ∘ f`; the caller guarantees `cod f == dom g`.
    fn compose(&self, g: &Self::Mor, f: &Self::Mor) -> Self::Mor;
    /// All morphisms `a → b` in ascending order.
    fn hom(&self, a: &Self::Obj, b: &Self::Obj) -> Vec<Self::Mor>;
    fn objects(&self) -> Vec<Self::Obj>;

    /// Maps `h: w → dom p` with `p ∘ h = g`.
    fn hom_over(&self, w: &Self::Obj, p: &Self::Mor, g: &Self::Mor) -> Vec<Self::Mor> {
        self.hom(w, &self.dom(p))
            .into_iter()
            .filter(|h| &self.compose(p, h) == g)
            .collect()
    }

    /// The least map `h: w → dom p` with `p ∘ h = g`.
    fn first_over(&self, w: &Self::Obj, p: &Self::Mor, g: &Self::Mor) -> Option<Self::Mor> {
        self.hom_over(w, p, g).into_iter().next()
    }

    /// Maps `d: cod u → cod t` with `d ∘ u = t`.
    fn extensions(&self, u: &Self::Mor, t: &Self::Mor) -> Vec<Self::Mor> {
        self.hom(&self.cod(u), &self.cod(t))
            .into_iter()
            .filter(|d| &self.compose(d, u) == t)
            .collect()
    }

    fn inverse(&self, f: &Self::Mor) -> Option<Self::Mor> {
        let (a, b) = (self.dom(f), self.cod(f));
        let ida = self.id(&a);
        let idb = self.id(&b);
        self.hom(&b, &a)
            .into_iter()
            .find(|g| self.compose(g, f) == ida && self.compose(f, g) == idb)
    }

    fn is_iso(&self, f: &Self::Mor) -> bool {
        self.inverse(f).is_some()
    }

    fn obj_label(&self, a: &Self::Obj) -> String {
        format!("{a:?}")
    }

    fn mor_label(&self, f: &Self::Mor) -> String {
        format!("{f:?}")
    }
}

/// Every morphism between working-set objects, grouped by (source, target)
/// in working-set order.
pub fn all_morphisms<C: Category>(c: &C) -> Vec<C::Mor> {
    let objs = c.objects();
    let mut out = Vec::new();
    for a in &objs {
        for b in &objs {
            out.extend(c.hom(a, b));
        }
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InputError {
    #[error("duplicate identifier `{0}`")]
    Duplicate(String),
    #[error("unknown identifier `{0}`")]
    Unknown(String),
    #[error("endpoint mismatch: {0}")]
    Endpoints(String),
    #[error("square does not commute: {0}")]
    NotCommuting(String),
    #[error("size cap exceeded: {what} has {size}, cap is {cap}")]
    TooLarge { what: String, size: usize, cap: usize },
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismRecord {
    pub id: String,
    pub src: String,
    pub tgt: String,
}

/// The JSON exchange format. `terminal` and `fibrations` are only read when
/// the presentation is loaded as a clan.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryPresentation {
    pub objects: Vec<String>,
    pub morphisms: Vec<MorphismRecord>,
    pub identities: BTreeMap<String, String>,
    /// Triples `[g, f, gf]` meaning `g ∘ f = gf`.
    pub composition: Vec<[String; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<String>,
    #[serde(default)]
    pub fibrations: Vec<String>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("presentation is not a category: {}", failures(.0))]
    Invalid(VerificationReport),
    #[error("presentation is not a clan: {}", failures(.0))]
    NotClan(VerificationReport),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn failures(r: &VerificationReport) -> String {
    r.failures()
        .map(|c| format!("{} {}", c.name, c.witness.clone().unwrap_or(Value::Null)))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Checks identities, endpoints, totality and associativity of a presentation.
/// Duplicate or unknown identifiers are input errors rather than failed checks.
pub fn validate_presentation(p: &CategoryPresentation) -> Result<VerificationReport, InputError> {
    let mut objs = HashSet::new();
    for o in &p.objects {
        if !objs.insert(o.as_str()) {
            return Err(InputError::Duplicate(o.clone()));
        }
    }
    let mut ends: HashMap<&str, (&str, &str)> = HashMap::new();
    for m in &p.morphisms {
        if objs.contains(m.id.as_str()) || ends.contains_key(m.id.as_str()) {
            return Err(InputError::Duplicate(m.id.clone()));
        }
        for end in [&m.src, &m.tgt] {
            if !objs.contains(end.as_str()) {
                return Err(InputError::Unknown(end.clone()));
            }
        }
        ends.insert(&m.id, (&m.src, &m.tgt));
    }
    for (o, i) in &p.identities {
        if !objs.contains(o.as_str()) {
            return Err(InputError::Unknown(o.clone()));
        }
        if !ends.contains_key(i.as_str()) {
            return Err(InputError::Unknown(i.clone()));
        }
    }
    for t in &p.composition {
        for id in t {
            if !ends.contains_key(id.as_str()) {
                return Err(InputError::Unknown(id.clone()));
            }
        }
    }

    let mut report = VerificationReport::new();

    let mut table: HashMap<(&str, &str), &str> = HashMap::new();
    let mut functional = None;
    let mut endpoints = None;
    for [g, f, gf] in &p.composition {
        let (fs, ft) = ends[f.as_str()];
        let (gs, gt) = ends[g.as_str()];
        let (hs, ht) = ends[gf.as_str()];
        if endpoints.is_none() && (ft != gs || hs != fs || ht != gt) {
            endpoints = Some(json!({"pair": [g, f], "composite": gf}));
        }
        if let Some(prev) = table.insert((g, f), gf) {
            if functional.is_none() && prev != gf {
                functional = Some(json!({"pair": [g, f], "values": [prev, gf]}));
            }
        }
    }
    report.push(Check::from_witness("composition_endpoints", endpoints));
    report.push(Check::from_witness("composition_functional", functional));

    let mut missing = None;
    'outer: for g in &p.morphisms {
        for f in &p.morphisms {
            if f.tgt == g.src && !table.contains_key(&(g.id.as_str(), f.id.as_str())) {
                missing = Some(json!({"missing": [g.id, f.id]}));
                break 'outer;
            }
        }
    }
    report.push(Check::from_witness("composition_total", missing));

    let mut ident = None;
    for o in &p.objects {
        let Some(i) = p.identities.get(o) else {
            ident = Some(json!({"object": o, "problem": "no identity"}));
            break;
        };
        if ends[i.as_str()] != (o.as_str(), o.as_str()) {
            ident = Some(json!({"object": o, "identity": i, "problem": "not an endomorphism"}));
            break;
        }
        let bad = p.morphisms.iter().find_map(|m| {
            if m.src == *o {
                let v = table.get(&(m.id.as_str(), i.as_str()));
                if v != Some(&m.id.as_str()) {
                    return Some(json!({"identity": i, "morphism": m.id, "side": "right"}));
                }
            }
            if m.tgt == *o {
                let v = table.get(&(i.as_str(), m.id.as_str()));
                if v != Some(&m.id.as_str()) {
                    return Some(json!({"identity": i, "morphism": m.id, "side": "left"}));
                }
            }
            None
        });
        if bad.is_some() {
            ident = bad;
            break;
        }
    }
    report.push(Check::from_witness("identities", ident));

    let mut assoc = None;
    'assoc: for f in &p.morphisms {
        for g in p.morphisms.iter().filter(|g| g.src == f.tgt) {
            let Some(gf) = table.get(&(g.id.as_str(), f.id.as_str())) else { continue };
            for h in p.morphisms.iter().filter(|h| h.src == g.tgt) {
                let Some(hg) = table.get(&(h.id.as_str(), g.id.as_str())) else { continue };
                let l = table.get(&(h.id.as_str(), *gf));
                let r = table.get(&(*hg, f.id.as_str()));
                if l.is_some() && r.is_some() && l != r {
                    assoc = Some(json!({"triple": [h.id, g.id, f.id]}));
                    break 'assoc;
                }
            }
        }
    }
    report.push(Check::from_witness("associativity", assoc));
    Ok(report)
}

const NONE: u32 = u32::MAX;

/// An indexed, validated finite category. Objects and morphisms are numbered
/// in lexicographic order of their identifiers.
#[derive(Debug, Clone)]
pub struct FinCat {
    obj_names: Vec<String>,
    mor_names: Vec<String>,
    src: Vec<usize>,
    tgt: Vec<usize>,
    ident: Vec<usize>,
    comp: Vec<u32>,
    homs: Vec<Vec<usize>>,
    obj_index: HashMap<String, usize>,
    mor_index: HashMap<String, usize>,
}

impl FinCat {
    /// Validates `p` and indexes it; never repairs a faulty presentation.
    pub fn from_presentation(p: &CategoryPresentation, max_morphisms: usize) -> Result<FinCat, LoadError> {
        if p.morphisms.len() > max_morphisms {
            return Err(InputError::TooLarge {
                what: "presentation".into(),
                size: p.morphisms.len(),
                cap: max_morphisms,
            }
            .into());
        }
        let report = validate_presentation(p)?;
        if !report.all_pass() {
            return Err(LoadError::Invalid(report));
        }
        let mut obj_names = p.objects.clone();
        obj_names.sort();
        let mut recs = p.morphisms.clone();
        recs.sort_by(|a, b| a.id.cmp(&b.id));
        let obj_index: HashMap<String, usize> =
            obj_names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let mor_index: HashMap<String, usize> =
            recs.iter().enumerate().map(|(i, m)| (m.id.clone(), i)).collect();
        let n = recs.len();
        let src: Vec<usize> = recs.iter().map(|m| obj_index[&m.src]).collect();
        let tgt: Vec<usize> = recs.iter().map(|m| obj_index[&m.tgt]).collect();
        let ident = obj_names.iter().map(|o| mor_index[&p.identities[o]]).collect();
        let mut comp = vec![NONE; n * n];
        for [g, f, gf] in &p.composition {
            comp[mor_index[g] * n + mor_index[f]] = mor_index[gf] as u32;
        }
        let no = obj_names.len();
        let mut homs = vec![Vec::new(); no * no];
        for m in 0..n {
            homs[src[m] * no + tgt[m]].push(m);
        }
        Ok(FinCat {
            mor_names: recs.into_iter().map(|m| m.id).collect(),
            obj_names,
            src,
            tgt,
            ident,
            comp,
            homs,
            obj_index,
            mor_index,
        })
    }

    pub fn from_json(text: &str, max_morphisms: usize) -> Result<FinCat, LoadError> {
        let p: CategoryPresentation = serde_json::from_str(text)?;
        FinCat::from_presentation(&p, max_morphisms)
    }

    pub fn num_objects(&self) -> usize {
        self.obj_names.len()
    }

    pub fn num_morphisms(&self) -> usize {
        self.mor_names.len()
    }

    pub fn obj_name(&self, a: usize) -> &str {
        &self.obj_names[a]
    }

    pub fn mor_name(&self, f: usize) -> &str {
        &self.mor_names[f]
    }

    pub fn object(&self, name: &str) -> Result<usize, InputError> {
        self.obj_index.get(name).copied().ok_or_else(|| InputError::Unknown(name.into()))
    }

    pub fn morphism(&self, name: &str) -> Result<usize, InputError> {
        self.mor_index.get(name).copied().ok_or_else(|| InputError::Unknown(name.into()))
    }

    pub fn morphisms(&self) -> std::ops::Range<usize> {
        0..self.mor_names.len()
    }

    pub fn to_presentation(&self) -> CategoryPresentation {
        let n = self.num_morphisms();
        let mut composition = Vec::new();
        for g in 0..n {
            for f in 0..n {
                let h = self.comp[g * n + f];
                if h != NONE {
                    composition.push([
                        self.mor_names[g].clone(),
                        self.mor_names[f].clone(),
                        self.mor_names[h as usize].clone(),
                    ]);
                }
            }
        }
        CategoryPresentation {
            objects: self.obj_names.clone(),
            morphisms: (0..n)
                .map(|m| MorphismRecord {
                    id: self.mor_names[m].clone(),
                    src: self.obj_names[self.src[m]].clone(),
                    tgt: self.obj_names[self.tgt[m]].clone(),
                })
                .collect(),
            identities: (0..self.num_objects())
                .map(|o| (self.obj_names[o].clone(), self.mor_names[self.ident[o]].clone()))
                .collect(),
            composition,
            terminal: None,
            fibrations: Vec::new(),
        }
    }
}

impl Category for FinCat {
    type Obj = usize;
    type Mor = usize;

    fn dom(&self, f: &usize) -> usize {
        self.src[*f]
    }
    fn cod(&self, f: &usize) -> usize {
        self.tgt[*f]
    }
    fn id(&self, a: &usize) -> usize {
        self.ident[*a]
    }
    fn compose(&self, g: &usize, f: &usize) -> usize {
        let h = self.comp[g * self.num_morphisms() + f];
        assert!(h != NONE, "{} ∘ {} is not composable", self.mor_names[*g], self.mor_names[*f]);
        h as usize
    }
    fn hom(&self, a: &usize, b: &usize) -> Vec<usize> {
        self.homs[a * self.num_objects() + b].clone()
    }
    fn objects(&self) -> Vec<usize> {
        (0..self.num_objects()).collect()
    }
    fn obj_label(&self, a: &usize) -> String {
        self.obj_names[*a].clone()
    }
    fn mor_label(&self, f: &usize) -> String {
        self.mor_names[*f].clone()
    }
}

/// A commuting square
///
/// ```text
///   X00 --top--> X10
///    |            |
///  left         right
///    v            v
///   X01 -bottom-> X11
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SquareData<M> {
    pub top: M,
    pub left: M,
    pub right: M,
    pub bottom: M,
}

impl<M: Clone> SquareData<M> {
    pub fn new(top: M, left: M, right: M, bottom: M) -> Self {
        SquareData { top, left, right, bottom }
    }

    /// The square reflected along its diagonal.
    pub fn transpose(&self) -> Self {
        SquareData {
            top: self.left.clone(),
            left: self.top.clone(),
            right: self.bottom.clone(),
            bottom: self.right.clone(),
        }
    }
}

/// Endpoint and commutation check for a square.
pub fn check_square<C: Category>(c: &C, s: &SquareData<C::Mor>) -> Result<(), InputError> {
    let ends_ok = c.dom(&s.top) == c.dom(&s.left)
        && c.cod(&s.top) == c.dom(&s.right)
        && c.cod(&s.left) == c.dom(&s.bottom)
        && c.cod(&s.right) == c.cod(&s.bottom);
    if !ends_ok {
        return Err(InputError::Endpoints(format!(
            "square {} {} {} {}",
            c.mor_label(&s.top),
            c.mor_label(&s.left),
            c.mor_label(&s.right),
            c.mor_label(&s.bottom)
        )));
    }
    if c.compose(&s.right, &s.top) != c.compose(&s.bottom, &s.left) {
        return Err(InputError::NotCommuting(format!(
            "{}∘{} ≠ {}∘{}",
            c.mor_label(&s.right),
            c.mor_label(&s.top),
            c.mor_label(&s.bottom),
            c.mor_label(&s.left)
        )));
    }
    Ok(())
}

/// `None` if `(apex, p1, p2)` is a pullback of `f: X → Z`, `g: Y → Z` against
/// every cone from the working set; otherwise the offending cone.
pub fn pullback_cone_witness<C: Category>(
    c: &C,
    f: &C::Mor,
    g: &C::Mor,
    apex: &C::Obj,
    p1: &C::Mor,
    p2: &C::Mor,
) -> Option<Value> {
    if c.compose(f, p1) != c.compose(g, p2) {
        return Some(json!({"problem": "cone does not commute"}));
    }
    let (x, y) = (c.dom(f), c.dom(g));
    for w in c.objects() {
        let mut counts: HashMap<(C::Mor, C::Mor), usize> = HashMap::new();
        for m in c.hom(&w, apex) {
            *counts.entry((c.compose(p1, &m), c.compose(p2, &m))).or_default() += 1;
        }
        let hy = c.hom(&w, &y);
        for a in c.hom(&w, &x) {
            let fa = c.compose(f, &a);
            for b in &hy {
                if c.compose(g, b) != fa {
                    continue;
                }
                let n = counts.get(&(a.clone(), b.clone())).copied().unwrap_or(0);
                if n != 1 {
                    return Some(json!({
                        "cone": [c.obj_label(&w), c.mor_label(&a), c.mor_label(b)],
                        "mediators": n,
                    }));
                }
            }
        }
    }
    None
}

/// The first pullback cone of `f` and `g` over the working set, in
/// lexicographic order of (apex, p1, p2); `None` if no cone is universal.
pub fn search_pullback<C: Category>(c: &C, f: &C::Mor, g: &C::Mor) -> Result<Option<(C::Obj, C::Mor, C::Mor)>, InputError> {
    if c.cod(f) != c.cod(g) {
        return Err(InputError::Endpoints(format!(
            "pullback of {} and {}: codomains differ",
            c.mor_label(f),
            c.mor_label(g)
        )));
    }
    let (x, y) = (c.dom(f), c.dom(g));
    for p in c.objects() {
        let hy = c.hom(&p, &y);
        for p1 in c.hom(&p, &x) {
            let fp = c.compose(f, &p1);
            for p2 in &hy {
                if c.compose(g, p2) == fp && pullback_cone_witness(c, f, g, &p, &p1, p2).is_none() {
                    return Ok(Some((p, p1, p2.clone())));
                }
            }
        }
    }
    Ok(None)
}

/// Whether `X00` with `top` and `left` is a pullback of `right` and `bottom`,
/// decided against every cone from the working set.
pub fn is_cartesian_square<C: Category>(c: &C, s: &SquareData<C::Mor>) -> Result<bool, InputError> {
    check_square(c, s)?;
    Ok(cartesian_square_witness(c, s).is_none())
}

/// A competing cone without a unique mediator, if any. Assumes `s` commutes.
pub fn cartesian_square_witness<C: Category>(c: &C, s: &SquareData<C::Mor>) -> Option<Value> {
    pullback_cone_witness(c, &s.right, &s.bottom, &c.dom(&s.top), &s.top, &s.left)
}

/// A diagonal filler `d` of a square whose left side is `u` and right side is
/// `f`: `f ∘ d = bottom` and `d ∘ u = top`. The search runs over all of
/// `Hom(cod u, dom f)` and returns the least filler.
pub fn diagonal_filler<C: Category>(c: &C, s: &SquareData<C::Mor>) -> Result<Option<C::Mor>, InputError> {
    check_square(c, s)?;
    Ok(c
        .hom_over(&c.cod(&s.left), &s.right, &s.bottom)
        .into_iter()
        .find(|d| c.compose(d, &s.left) == s.top))
}

/// `has_diagonal_filler(u, f, square)`: checks that the square really has `u`
/// on the left and `f` on the right before searching.
pub fn has_diagonal_filler<C: Category>(
    c: &C,
    u: &C::Mor,
    f: &C::Mor,
    s: &SquareData<C::Mor>,
) -> Result<Option<C::Mor>, InputError> {
    if &s.left != u || &s.right != f {
        return Err(InputError::Endpoints("square sides do not match u and f".into()));
    }
    diagonal_filler(c, s)
}

/// `None` if `u` has the left lifting property against `f`; otherwise a
/// commuting square `(top, bottom)` without a filler, least first.
pub fn lifting_witness<C: Category>(c: &C, u: &C::Mor, f: &C::Mor) -> Option<(C::Mor, C::Mor)> {
    let (a, b) = (c.dom(u), c.cod(u));
    let (x, y) = (c.dom(f), c.cod(f));
    let mut solvable: HashSet<(C::Mor, C::Mor)> = HashSet::new();
    for d in c.hom(&b, &x) {
        solvable.insert((c.compose(&d, u), c.compose(f, &d)));
    }
    let mut bottoms: HashMap<C::Mor, Vec<C::Mor>> = HashMap::new();
    for bot in c.hom(&b, &y) {
        bottoms.entry(c.compose(&bot, u)).or_default().push(bot);
    }
    for t in c.hom(&a, &x) {
        if let Some(bs) = bottoms.get(&c.compose(f, &t)) {
            for bot in bs {
                if !solvable.contains(&(t.clone(), bot.clone())) {
                    return Some((t, bot.clone()));
                }
            }
        }
    }
    None
}

pub fn lifts_against<C: Category>(c: &C, u: &C::Mor, f: &C::Mor) -> bool {
    lifting_witness(c, u, f).is_none()
}

/// Working-set morphisms with the left lifting property against every map of `k`.
pub fn left_lifting_class<C: Category>(c: &C, k: &[C::Mor]) -> Vec<C::Mor> {
    all_morphisms(c)
        .into_iter()
        .filter(|u| k.iter().all(|f| lifts_against(c, u, f)))
        .collect()
}

/// Working-set morphisms with the right lifting property against every map of `k`.
pub fn right_lifting_class<C: Category>(c: &C, k: &[C::Mor]) -> Vec<C::Mor> {
    all_morphisms(c)
        .into_iter()
        .filter(|f| k.iter().all(|u| lifts_against(c, u, f)))
        .collect()
}

/// Retraction data exhibiting `f: A → B` as a retract of `g: C → D` in the
/// arrow category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetractData<M> {
    pub i0: M,
    pub r0: M,
    pub i1: M,
    pub r1: M,
}

pub fn retract_data<C: Category>(c: &C, f: &C::Mor, g: &C::Mor) -> Option<RetractData<C::Mor>> {
    let (a, b) = (c.dom(f), c.cod(f));
    let (cc, d) = (c.dom(g), c.cod(g));
    let split = |x: &C::Obj, y: &C::Obj| -> Vec<(C::Mor, C::Mor)> {
        let idx = c.id(x);
        let back = c.hom(y, x);
        let mut out = Vec::new();
        for i in c.hom(x, y) {
            for r in &back {
                if c.compose(r, &i) == idx {
                    out.push((i.clone(), r.clone()));
                }
            }
        }
        out
    };
    let s0 = split(&a, &cc);
    let s1 = split(&b, &d);
    for (i0, r0) in &s0 {
        for (i1, r1) in &s1 {
            if c.compose(g, i0) == c.compose(i1, f) && c.compose(f, r0) == c.compose(r1, g) {
                return Some(RetractData { i0: i0.clone(), r0: r0.clone(), i1: i1.clone(), r1: r1.clone() });
            }
        }
    }
    None
}

pub fn is_retract<C: Category>(c: &C, f: &C::Mor, g: &C::Mor) -> bool {
    retract_data(c, f, g).is_some()
}

/// A functor given by its action; laws are checked separately.
pub trait Functor<S: Category, T: Category> {
    fn on_obj(&self, a: &S::Obj) -> T::Obj;
    fn on_mor(&self, f: &S::Mor) -> T::Mor;
}

/// Endpoint, identity and composition preservation over the working set of `s`.
pub fn functor_law_witness<S: Category, T: Category, F: Functor<S, T>>(s: &S, t: &T, f: &F) -> Option<Value> {
    let objs = s.objects();
    for a in &objs {
        if f.on_mor(&s.id(a)) != t.id(&f.on_obj(a)) {
            return Some(json!({"law": "identity", "object": s.obj_label(a)}));
        }
    }
    for a in &objs {
        for b in &objs {
            for m in s.hom(a, b) {
                let fm = f.on_mor(&m);
                if t.dom(&fm) != f.on_obj(a) || t.cod(&fm) != f.on_obj(b) {
                    return Some(json!({"law": "endpoints", "morphism": s.mor_label(&m)}));
                }
            }
        }
    }
    for a in &objs {
        for b in &objs {
            let ab = s.hom(a, b);
            for c in &objs {
                let bc = s.hom(b, c);
                for m in &ab {
                    for n in &bc {
                        let lhs = f.on_mor(&s.compose(n, m));
                        let rhs = t.compose(&f.on_mor(n), &f.on_mor(m));
                        if lhs != rhs {
                            return Some(json!({
                                "law": "composition",
                                "triple": [s.mor_label(n), s.mor_label(m), s.mor_label(&s.compose(n, m))],
                            }));
                        }
                    }
                }
            }
        }
    }
    None
}

/// A functor between presentations as explicit tables.
#[derive(Debug, Clone)]
pub struct FunctorData {
    pub source: Arc<FinCat>,
    pub target: Arc<FinCat>,
    pub on_objects: Vec<usize>,
    pub on_morphisms: Vec<usize>,
}

impl Functor<FinCat, FinCat> for FunctorData {
    fn on_obj(&self, a: &usize) -> usize {
        self.on_objects[*a]
    }
    fn on_mor(&self, f: &usize) -> usize {
        self.on_morphisms[*f]
    }
}

impl FunctorData {
    pub fn identity(c: Arc<FinCat>) -> Self {
        FunctorData {
            on_objects: (0..c.num_objects()).collect(),
            on_morphisms: (0..c.num_morphisms()).collect(),
            source: c.clone(),
            target: c,
        }
    }

    /// `self` followed by `then`.
    pub fn then(&self, then: &FunctorData) -> FunctorData {
        FunctorData {
            source: self.source.clone(),
            target: then.target.clone(),
            on_objects: self.on_objects.iter().map(|&o| then.on_objects[o]).collect(),
            on_morphisms: self.on_morphisms.iter().map(|&m| then.on_morphisms[m]).collect(),
        }
    }
}

pub fn validate_functor(f: &FunctorData) -> Result<VerificationReport, InputError> {
    if f.on_objects.len() != f.source.num_objects() || f.on_morphisms.len() != f.source.num_morphisms() {
        return Err(InputError::Other("functor tables do not cover the source".into()));
    }
    if f.on_objects.iter().any(|&o| o >= f.target.num_objects())
        || f.on_morphisms.iter().any(|&m| m >= f.target.num_morphisms())
    {
        return Err(InputError::Other("functor tables point outside the target".into()));
    }
    let mut r = VerificationReport::new();
    r.push(Check::from_witness("functor_laws", functor_law_witness(&*f.source, &*f.target, f)));
    Ok(r)
}

#[derive(Debug, Clone)]
pub struct NaturalTransformationData {
    pub from: FunctorData,
    pub to: FunctorData,
    pub components: Vec<usize>,
}

pub fn validate_nat(alpha: &NaturalTransformationData) -> Result<VerificationReport, InputError> {
    let (f, g) = (&alpha.from, &alpha.to);
    if !Arc::ptr_eq(&f.source, &g.source) || !Arc::ptr_eq(&f.target, &g.target) {
        return Err(InputError::Other("functors are not parallel".into()));
    }
    let src = &*f.source;
    let tgt = &*f.target;
    if alpha.components.len() != src.num_objects() {
        return Err(InputError::Other("component table does not cover the source".into()));
    }
    let mut r = VerificationReport::new();
    let mut bad = None;
    for a in src.objects() {
        let c = alpha.components[a];
        if tgt.dom(&c) != f.on_obj(&a) || tgt.cod(&c) != g.on_obj(&a) {
            bad = Some(json!({"object": src.obj_name(a), "problem": "component endpoints"}));
            break;
        }
    }
    if bad.is_none() {
        for m in src.morphisms() {
            let (a, b) = (src.dom(&m), src.cod(&m));
            let lhs = tgt.compose(&g.on_mor(&m), &alpha.components[a]);
            let rhs = tgt.compose(&alpha.components[b], &f.on_mor(&m));
            if lhs != rhs {
                bad = Some(json!({"morphism": src.mor_name(m), "problem": "naturality"}));
                break;
            }
        }
    }
    r.push(Check::from_witness("naturality", bad));
    Ok(r)
}

/// Every functor `s → t`, in lexicographic order of (object table, morphism table).
pub fn enumerate_functors(s: &Arc<FinCat>, t: &Arc<FinCat>) -> Vec<FunctorData> {
    let ns = s.num_objects();
    let nm = s.num_morphisms();
    let nt = t.num_objects();
    // Composition constraints keyed by the largest morphism they mention.
    let mut constraints: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); nm];
    for g in 0..nm {
        for f in 0..nm {
            if s.cod(&f) == s.dom(&g) {
                let h = s.compose(&g, &f);
                constraints[g.max(f).max(h)].push((g, f, h));
            }
        }
    }
    let mut out = Vec::new();
    if nt == 0 && ns > 0 {
        return out;
    }
    let mut objmap = vec![0usize; ns];
    loop {
        let mut mormap = vec![usize::MAX; nm];
        search_morphisms(s, t, &objmap, &constraints, 0, &mut mormap, &mut |mm| {
            out.push(FunctorData {
                source: s.clone(),
                target: t.clone(),
                on_objects: objmap.clone(),
                on_morphisms: mm.to_vec(),
            })
        });
        // Advance the object table odometer, last position fastest.
        let mut k = ns;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            objmap[k] += 1;
            if objmap[k] < nt {
                break;
            }
            objmap[k] = 0;
        }
    }
}

fn search_morphisms(
    s: &FinCat,
    t: &FinCat,
    objmap: &[usize],
    constraints: &[Vec<(usize, usize, usize)>],
    k: usize,
    mormap: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if k == mormap.len() {
        emit(mormap);
        return;
    }
    let (a, b) = (objmap[s.dom(&k)], objmap[s.cod(&k)]);
    let candidates = if s.id(&s.dom(&k)) == k {
        vec![t.id(&a)]
    } else {
        t.hom(&a, &b)
    };
    for cand in candidates {
        mormap[k] = cand;
        let ok = constraints[k]
            .iter()
            .all(|&(g, f, h)| t.compose(&mormap[g], &mormap[f]) == mormap[h]);
        if ok {
            search_morphisms(s, t, objmap, constraints, k + 1, mormap, emit);
        }
    }
    mormap[k] = usize::MAX;
}

/// Every natural transformation between two parallel presented functors.
pub fn enumerate_nats(f: &FunctorData, g: &FunctorData) -> Vec<NaturalTransformationData> {
    let src = &*f.source;
    let tgt = &*f.target;
    let choices: Vec<Vec<usize>> = src
        .objects()
        .into_iter()
        .map(|a| tgt.hom(&f.on_obj(&a), &g.on_obj(&a)))
        .collect();
    let mut out = Vec::new();
    for comps in cartesian(&choices) {
        let natural = src.morphisms().all(|m| {
            let (a, b) = (src.dom(&m), src.cod(&m));
            tgt.compose(&g.on_mor(&m), &comps[a]) == tgt.compose(&comps[b], &f.on_mor(&m))
        });
        if natural {
            out.push(NaturalTransformationData { from: f.clone(), to: g.clone(), components: comps });
        }
    }
    out
}

/// Cartesian product of choice lists, last position varying fastest.
pub fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for opts in choices {
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for prefix in &out {
            for o in opts {
                let mut v = prefix.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Builder for presentations used by tests and by the materializer.
#[derive(Debug, Default, Clone)]
pub struct PresentationBuilder {
    p: CategoryPresentation,
    seen: BTreeSet<String>,
}

impl PresentationBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an object together with its identity `id_<name>`.
    pub fn object(mut self, name: &str) -> Self {
        self.p.objects.push(name.into());
        let id = format!("id_{name}");
        self.p.morphisms.push(MorphismRecord { id: id.clone(), src: name.into(), tgt: name.into() });
        self.p.identities.insert(name.into(), id);
        self
    }

    pub fn morphism(mut self, id: &str, src: &str, tgt: &str) -> Self {
        self.p.morphisms.push(MorphismRecord { id: id.into(), src: src.into(), tgt: tgt.into() });
        self
    }

    pub fn compose(mut self, g: &str, f: &str, gf: &str) -> Self {
        if self.seen.insert(format!("{g}\u{0}{f}")) {
            self.p.composition.push([g.into(), f.into(), gf.into()]);
        }
        self
    }

    pub fn terminal(mut self, t: &str) -> Self {
        self.p.terminal = Some(t.into());
        self
    }

    pub fn fibration(mut self, f: &str) -> Self {
        self.p.fibrations.push(f.into());
        self
    }

    /// Fills in every composite with an identity and, for thin presentations,
    /// every composite forced by uniqueness of parallel arrows.
    pub fn complete_identities(mut self) -> Self {
        let recs = self.p.morphisms.clone();
        let ids: Vec<(String, String)> = self.p.identities.iter().map(|(o, i)| (o.clone(), i.clone())).collect();
        for (o, i) in &ids {
            for m in &recs {
                if &m.src == o {
                    self = self.compose(&m.id, i, &m.id);
                }
                if &m.tgt == o {
                    self = self.compose(i, &m.id, &m.id);
                }
            }
        }
        self
    }

    /// Fills in composites for a thin (preorder) presentation.
    pub fn complete_thin(mut self) -> Self {
        let recs = self.p.morphisms.clone();
        let mut by_ends: HashMap<(String, String), String> = HashMap::new();
        for m in &recs {
            by_ends.insert((m.src.clone(), m.tgt.clone()), m.id.clone());
        }
        for f in &recs {
            for g in recs.iter().filter(|g| g.src == f.tgt) {
                if let Some(h) = by_ends.get(&(f.src.clone(), g.tgt.clone())) {
                    let h = h.clone();
                    self = self.compose(&g.id, &f.id, &h);
                }
            }
        }
        self
    }

    pub fn build(self) -> CategoryPresentation {
        self.p
    }
}

/// The thin category of a finite preorder given by `leq(i, j)` on `names`.
/// Morphisms are named `i<j` (identities `id_i`).
pub fn preorder_presentation(names: &[&str], leq: impl Fn(usize, usize) -> bool) -> CategoryPresentation {
    let mut b = PresentationBuilder::new();
    for n in names {
        b = b.object(n);
    }
    for (i, x) in names.iter().enumerate() {
        for (j, y) in names.iter().enumerate() {
            if i != j && leq(i, j) {
                b = b.morphism(&format!("{x}<{y}"), x, y);
            }
        }
    }
    b.complete_thin().build()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn terminal_category() -> CategoryPresentation {
        PresentationBuilder::new().object("1").complete_identities().build()
    }

    pub fn walking_arrow() -> CategoryPresentation {
        PresentationBuilder::new()
            .object("0")
            .object("1")
            .morphism("a", "0", "1")
            .complete_identities()
            .build()
    }

    /// The four-element lattice b ≤ l, r ≤ t.
    pub fn diamond() -> CategoryPresentation {
        preorder_presentation(&["b", "l", "r", "t"], |i, j| {
            i == j || i == 0 || j == 3
        })
    }

    fn cat(p: &CategoryPresentation) -> FinCat {
        FinCat::from_presentation(p, DEFAULT_MAX_MORPHISMS).unwrap()
    }

    #[test]
    fn terminal_and_walking_arrow_validate() {
        assert!(validate_presentation(&terminal_category()).unwrap().all_pass());
        let wa = walking_arrow();
        assert_eq!(wa.objects.len(), 2);
        assert_eq!(wa.morphisms.len(), 3);
        assert!(validate_presentation(&wa).unwrap().all_pass());
    }

    #[test]
    fn wrong_target_in_table_is_reported_with_the_pair() {
        let mut p = walking_arrow();
        // a ∘ id_0 = id_1 has the wrong endpoints.
        for t in &mut p.composition {
            if t[0] == "a" && t[1] == "id_0" {
                t[2] = "id_1".into();
            }
        }
        let r = validate_presentation(&p).unwrap();
        let c = r.get("composition_endpoints").unwrap();
        assert!(!c.passed());
        assert_eq!(c.witness.as_ref().unwrap()["pair"], json!(["a", "id_0"]));
    }

    #[test]
    fn duplicate_ids_are_input_errors() {
        let mut p = walking_arrow();
        p.morphisms.push(MorphismRecord { id: "a".into(), src: "0".into(), tgt: "1".into() });
        assert_eq!(validate_presentation(&p), Err(InputError::Duplicate("a".into())));
    }

    #[test]
    fn missing_composite_is_named() {
        let mut p = walking_arrow();
        p.composition.retain(|t| !(t[0] == "id_1" && t[1] == "a"));
        let err = FinCat::from_presentation(&p, 64).unwrap_err();
        let LoadError::Invalid(r) = err else { panic!() };
        assert_eq!(r.get("composition_total").unwrap().witness, Some(json!({"missing": ["id_1", "a"]})));
    }

    #[test]
    fn size_cap_is_enforced() {
        let err = FinCat::from_presentation(&walking_arrow(), 2).unwrap_err();
        assert!(matches!(err, LoadError::Input(InputError::TooLarge { .. })));
    }

    #[test]
    fn pullback_along_identity() {
        let c = cat(&walking_arrow());
        let id0 = c.id(&0);
        let (p, p1, p2) = search_pullback(&c, &id0, &id0).unwrap().unwrap();
        assert_eq!((p, p1, p2), (0, id0, id0));
    }

    #[test]
    fn arrow_pulled_back_along_itself_is_its_source() {
        // Every cone over (a, a) comes from 0 with identity legs.
        let c = cat(&walking_arrow());
        let a = c.morphism("a").unwrap();
        let id0 = c.id(&0);
        assert_eq!(search_pullback(&c, &a, &a).unwrap(), Some((0, id0, id0)));
    }

    #[test]
    fn pullback_endpoint_mismatch_is_an_input_error() {
        let two = cat(&PresentationBuilder::new().object("x").object("y").complete_identities().build());
        assert!(search_pullback(&two, &two.id(&0), &two.id(&1)).is_err());
    }

    #[test]
    fn pullback_absent_when_no_meet() {
        // Two incomparable elements below a top, nothing below them.
        let v = cat(&preorder_presentation(&["l", "r", "t"], |i, j| i == j || j == 2));
        let l = v.morphism("l<t").unwrap();
        let r = v.morphism("r<t").unwrap();
        assert_eq!(search_pullback(&v, &l, &r).unwrap(), None);
    }

    #[test]
    fn diamond_square_is_cartesian_and_identity_squares_are() {
        let d = cat(&diamond());
        let m = |n: &str| d.morphism(n).unwrap();
        let s = SquareData::new(m("b<l"), m("b<r"), m("l<t"), m("r<t"));
        assert!(is_cartesian_square(&d, &s).unwrap());
        let f = m("l<t");
        let s = SquareData::new(d.id(&d.dom(&f)), f, f, d.id(&d.cod(&f)));
        assert!(is_cartesian_square(&d, &s).unwrap());
        let bad = SquareData::new(m("b<l"), m("b<r"), m("l<t"), m("id_t"));
        assert!(is_cartesian_square(&d, &bad).is_err());
    }

    #[test]
    fn filler_for_iso_and_retract_of_self() {
        let c = cat(&walking_arrow());
        let a = c.morphism("a").unwrap();
        let id0 = c.id(&0);
        // u = id_0 on the left, f = a on the right: the filler is top ∘ u⁻¹.
        let s = SquareData::new(id0, id0, a, a);
        assert_eq!(diagonal_filler(&c, &s).unwrap(), Some(id0));
        assert!(is_retract(&c, &a, &a));
        // The identity of 0 is not a retract of `a`: that would need a map 1 → 0.
        assert!(!is_retract(&c, &id0, &a));
    }

    #[test]
    fn identity_and_constant_functors_validate() {
        let wa = Arc::new(cat(&walking_arrow()));
        let one = Arc::new(cat(&terminal_category()));
        assert!(validate_functor(&FunctorData::identity(wa.clone())).unwrap().all_pass());
        let k = FunctorData {
            source: wa.clone(),
            target: one.clone(),
            on_objects: vec![0, 0],
            on_morphisms: vec![0, 0, 0],
        };
        assert!(validate_functor(&k).unwrap().all_pass());
        let functors = enumerate_functors(&wa, &wa);
        // 0,0 / 1,1 / 0,1 (identity)
        assert_eq!(functors.len(), 3);
    }

    #[test]
    fn corrupted_functor_fails_with_triple() {
        let wa = Arc::new(cat(&walking_arrow()));
        let mut f = FunctorData::identity(wa.clone());
        let a = wa.morphism("a").unwrap();
        let id1 = wa.id(&1);
        // Send the object 0 to 1 but keep `a` unchanged: endpoints break.
        f.on_objects[0] = 1;
        f.on_morphisms[wa.id(&0)] = id1;
        let r = validate_functor(&f).unwrap();
        assert!(!r.all_pass());
        // Mapping `a` to the identity of 1 keeps endpoints but breaks a ∘ id_0 = a
        // once id_0 is sent elsewhere.
        let mut g = FunctorData::identity(wa.clone());
        g.on_morphisms[a] = id1;
        let r = validate_functor(&g).unwrap();
        let w = r.checks[0].witness.clone().unwrap();
        assert_eq!(w["law"], "endpoints");
    }

    #[test]
    fn natural_transformations_on_walking_arrow() {
        let wa = Arc::new(cat(&walking_arrow()));
        let fs = enumerate_functors(&wa, &wa);
        let const0 = fs.iter().find(|f| f.on_objects == vec![0, 0]).unwrap();
        let id = fs.iter().find(|f| f.on_objects == vec![0, 1]).unwrap();
        assert_eq!(enumerate_nats(const0, id).len(), 1);
        assert_eq!(enumerate_nats(id, const0).len(), 0);
        for n in enumerate_nats(const0, id) {
            assert!(validate_nat(&n).unwrap().all_pass());
        }
    }
}

#[cfg(test)]
mod properties {
    use proptest::prelude::*;

    use super::*;
    use crate::clan::Clan;
    use crate::models::{FinMap, FinSet};

    fn map_into(tgt: usize) -> impl Strategy<Value = FinMap> {
        (0..=3usize).prop_flat_map(move |n| {
            proptest::collection::vec(0..tgt.max(1) as u32, if tgt == 0 { 0 } else { n })
                .prop_map(move |v| FinMap::new(tgt, v))
        })
    }

    /// A cospan `f: A → C ← B: g` with `C` nonempty.
    fn cospan() -> impl Strategy<Value = (FinMap, FinMap)> {
        (1..=3usize).prop_flat_map(|c| (map_into(c), map_into(c)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn finset_pullbacks_are_cartesian((f, g) in cospan()) {
            let s = FinSet::with_empty(3);
            let pb = s.pullback(&f, &g).unwrap();
            let sq = SquareData::new(pb.p2.clone(), pb.p1.clone(), g.clone(), f.clone());
            prop_assert!(is_cartesian_square(&s, &sq).unwrap());
            let count = f.map.iter().map(|&x| g.map.iter().filter(|&&y| y == x).count()).sum::<usize>();
            prop_assert_eq!(pb.apex, count);
        }

        /// With the right square a pullback, the left square is one exactly
        /// when the composite rectangle is.
        #[test]
        fn pasting((f, g) in cospan(), k in (0..=3usize).prop_flat_map(|n| proptest::collection::vec(0..3u32, n))) {
            let s = FinSet::with_empty(3);
            let right = s.pullback(&f, &g).unwrap();
            prop_assume!(f.src() > 0 && right.apex <= 3);
            let k = FinMap::new(f.src(), k.iter().map(|&x| x % f.src() as u32).collect());
            let left = s.pullback(&k, &right.p1).unwrap();
            prop_assume!(left.apex <= 3);
            let whole = SquareData::new(s.compose(&right.p2, &left.p2), left.p1.clone(), g.clone(), s.compose(&f, &k));
            prop_assert!(is_cartesian_square(&s, &whole).unwrap());
            // A non-cartesian left square: duplicate one point of the apex.
            if left.apex > 0 && left.apex < 3 {
                let mut top = left.p2.map.clone();
                top.push(top[0]);
                let mut side = left.p1.map.clone();
                side.push(side[0]);
                let top = FinMap::new(left.p2.tgt, top);
                let side = FinMap::new(left.p1.tgt, side);
                let lsq = SquareData::new(top.clone(), side.clone(), right.p1.clone(), k.clone());
                let wsq = SquareData::new(s.compose(&right.p2, &top), side, g.clone(), s.compose(&f, &k));
                prop_assert_eq!(is_cartesian_square(&s, &lsq).unwrap(), is_cartesian_square(&s, &wsq).unwrap());
                prop_assert!(!is_cartesian_square(&s, &lsq).unwrap());
            }
        }

        #[test]
        fn lifting_classes_are_closed(k in proptest::collection::vec((1..=2usize, 1..=2usize, proptest::collection::vec(0..2u32, 2)), 1..3)) {
            let s = FinSet::new(2);
            let k: Vec<FinMap> = k.into_iter().map(|(n, m, v)| FinMap::new(m, v[..n].iter().map(|&x| x % m as u32).collect())).collect();
            let class = left_lifting_class(&s, &k);
            let set: HashSet<&FinMap> = class.iter().collect();
            for f in all_morphisms(&s) {
                if s.is_iso(&f) {
                    prop_assert!(set.contains(&f));
                }
            }
            for f in &class {
                for g in class.iter().filter(|g| g.src() == f.tgt) {
                    prop_assert!(set.contains(&s.compose(g, f)));
                }
            }
            for f in all_morphisms(&s) {
                if class.iter().any(|g| is_retract(&s, &f, g)) {
                    prop_assert!(set.contains(&f));
                }
            }
        }
    }
}
