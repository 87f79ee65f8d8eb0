//! Internal products along fibrations: cofreeness, exponentials, the laws
//! relating Σ, Π and base change, the contractibility object and the π-tribe
//! suite. Polynomial functors live in [`poly`].

pub mod poly;

use std::collections::HashSet;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::clan::{Clan, ClanStructure, Pullback, PullbackOf};
use crate::fincat::{all_morphisms, Category, InputError};
use crate::report::{Check, Status, VerificationReport};
use crate::sample::sample;
use crate::tribe::{
    are_homotopic, is_homotopy_equivalence, is_object_n_truncated, mere_proposition_conditions, verify_tribe, Tribe,
};

/// `Π_f(E, p)` for fibrations `p: E → A` and `f: A → B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InternalProduct<O, M> {
    pub obj: O,
    /// `Π_f(E) → B`.
    pub structure: M,
    /// Pullback of `f` and `structure`; `p1` lands in `A`.
    pub cone: Pullback<O, M>,
    /// `f*(Π_f E) → E`, over `A`.
    pub eval: M,
}

pub type InternalProductOf<C> = InternalProduct<<C as Category>::Obj, <C as Category>::Mor>;

/// A clan with chosen internal products along fibrations.
pub trait PiClan: Clan {
    fn internal_product(&self, f: &Self::Mor, p: &Self::Mor) -> Option<InternalProductOf<Self>>;

    /// An isomorphism `h: dom x → dom y` with `y h = x`, least first.
    fn iso_over(&self, x: &Self::Mor, y: &Self::Mor) -> Option<Self::Mor> {
        if self.cod(x) != self.cod(y) {
            return None;
        }
        self.hom_over(&self.dom(x), y, x).into_iter().find(|h| self.is_iso(h))
    }
}

/// Presented clans have no constructor; internal products are searched.
impl PiClan for ClanStructure {
    fn internal_product(&self, f: &usize, p: &usize) -> Option<InternalProduct<usize, usize>> {
        search_internal_product(self, f, p)
    }
}

/// `ε ∘ f*(v)` for `v: C → Π_f(E)`, where `pb` is a pullback of `f` and
/// `structure ∘ v`.
pub fn transpose<C: Clan>(c: &C, ip: &InternalProductOf<C>, pb: &PullbackOf<C>, v: &C::Mor) -> Option<C::Mor> {
    let m = c.pair(&ip.cone, &pb.p1, &c.compose(v, &pb.p2))?;
    Some(c.compose(&ip.eval, &m))
}

/// All maps into `b` from working-set objects.
pub fn probes_over<C: Category>(c: &C, b: &C::Obj) -> Vec<C::Mor> {
    c.objects().iter().flat_map(|o| c.hom(o, b)).collect()
}

/// The first probe `g: C → B` at which `v ↦ ε ∘ f*(v)` fails to be a
/// bijection `Hom_B(C, Π) → Hom_A(f*C, E)`.
pub fn cofree_witness<C: Clan>(
    c: &C,
    f: &C::Mor,
    p: &C::Mor,
    ip: &InternalProductOf<C>,
    probes: &[C::Mor],
) -> Option<Value> {
    for g in probes {
        let label = || c.mor_label(g);
        let Some(pb) = c.pullback(f, g) else {
            return Some(json!({"probe": label(), "problem": "no pullback along f"}));
        };
        let source = c.hom_over(&c.dom(g), &ip.structure, g);
        let target: HashSet<C::Mor> = c.hom_over(&pb.apex, p, &pb.p1).into_iter().collect();
        let mut seen = HashSet::new();
        for v in &source {
            let Some(w) = transpose(c, ip, &pb, v) else {
                return Some(json!({"probe": label(), "map": c.mor_label(v), "problem": "no map into f*(Π)"}));
            };
            if !target.contains(&w) {
                return Some(json!({"probe": label(), "map": c.mor_label(v), "problem": "transpose not over A"}));
            }
            if !seen.insert(w) {
                return Some(json!({"probe": label(), "map": c.mor_label(v), "problem": "not injective"}));
            }
        }
        if seen.len() < target.len() {
            let mut missing: Vec<&C::Mor> = target.iter().filter(|w| !seen.contains(*w)).collect();
            missing.sort();
            return Some(json!({
                "probe": label(),
                "problem": "not surjective",
                "missing": c.mor_label(missing[0]),
                "hit": seen.len(),
                "total": target.len(),
            }));
        }
    }
    None
}

/// Checks a candidate internal product of `p` along `f` against every probe
/// over `B`.
pub fn verify_cofree<C: Clan>(
    c: &C,
    f: &C::Mor,
    p: &C::Mor,
    ip: &InternalProductOf<C>,
    probes: &[C::Mor],
) -> VerificationReport {
    let mut r = VerificationReport::new();
    r.timed("structure_is_fibration", || {
        let ok = c.is_fibration(&ip.structure) && c.cod(&ip.structure) == c.cod(f);
        (!ok).then(|| json!({"structure": c.mor_label(&ip.structure)}))
    });
    r.timed("evaluation_over_base", || {
        let cone_ok = c.compose(f, &ip.cone.p1) == c.compose(&ip.structure, &ip.cone.p2)
            && c.dom(&ip.eval) == ip.cone.apex
            && c.compose(p, &ip.eval) == ip.cone.p1;
        (!cone_ok).then(|| json!({"eval": c.mor_label(&ip.eval)}))
    });
    r.timed("cofree", || cofree_witness(c, f, p, ip, probes));
    r
}

/// The first working-set candidate `(P, s, ε)` that is cofree against every
/// map into `B`.
pub fn search_internal_product<C: Clan>(c: &C, f: &C::Mor, p: &C::Mor) -> Option<InternalProductOf<C>> {
    if c.cod(p) != c.dom(f) || !c.is_fibration(f) || !c.is_fibration(p) {
        return None;
    }
    let b = c.cod(f);
    let probes = probes_over(c, &b);
    for o in c.objects() {
        for s in c.hom(&o, &b).into_iter().filter(|s| c.is_fibration(s)) {
            let Some(cone) = c.pullback(f, &s) else { continue };
            for eval in c.hom_over(&cone.apex, p, &cone.p1) {
                let ip = InternalProduct { obj: o.clone(), structure: s.clone(), cone: cone.clone(), eval };
                if cofree_witness(c, f, p, &ip, &probes).is_none() {
                    return Some(ip);
                }
            }
        }
    }
    None
}

/// `Π_f(u): Π_f(E) → Π_f(E')` for `u: E → E'` over `A`: the map over `B`
/// whose transpose is `u ∘ ε`.
pub fn pi_on_map<C: Clan>(
    c: &C,
    ip: &InternalProductOf<C>,
    ip2: &InternalProductOf<C>,
    u: &C::Mor,
) -> Option<C::Mor> {
    let want = c.compose(u, &ip.eval);
    c.hom_over(&ip.obj, &ip2.structure, &ip.structure)
        .into_iter()
        .find(|v| transpose(c, ip2, &ip.cone, v).as_ref() == Some(&want))
}

/// The candidate obtained by restricting `Π` along a monomorphism `i: S → Π`.
/// Used to build wrong candidates for the cofreeness checks.
pub fn restrict_candidate<C: Clan>(
    c: &C,
    f: &C::Mor,
    ip: &InternalProductOf<C>,
    i: &C::Mor,
) -> Option<InternalProductOf<C>> {
    let structure = c.compose(&ip.structure, i);
    let cone = c.pullback(f, &structure)?;
    let eval = transpose(c, ip, &cone, i)?;
    Some(InternalProduct { obj: c.dom(i), structure, cone, eval })
}

/// The exponential `[A, B] = Π_A(B × A, p2)`.
#[derive(Debug, Clone)]
pub struct Exponential<O, M> {
    pub a: O,
    pub b: O,
    pub ip: InternalProduct<O, M>,
    /// `B × A` with `p1` into `B`.
    pub bxa: Pullback<O, M>,
    /// `ε: A × [A, B] → B`.
    pub eval: M,
}

pub type ExponentialOf<C> = Exponential<<C as Category>::Obj, <C as Category>::Mor>;

impl<O: Clone, M: Clone> Exponential<O, M> {
    pub fn obj(&self) -> &O {
        &self.ip.obj
    }
}

pub fn exponential<C: PiClan>(c: &C, a: &C::Obj, b: &C::Obj) -> Option<ExponentialOf<C>> {
    exponential_with(c, a, b, &|f, p| c.internal_product(f, p))
}

/// An internal-product constructor, so that suites can run on a replaced one.
pub type PiFn<'a, C> = dyn Fn(&<C as Category>::Mor, &<C as Category>::Mor) -> Option<InternalProductOf<C>> + Sync + 'a;

pub fn exponential_with<C: Clan>(c: &C, a: &C::Obj, b: &C::Obj, pi: &PiFn<C>) -> Option<ExponentialOf<C>> {
    let bxa = c.product(b, a)?;
    let ip = pi(&c.to_terminal(a), &bxa.p2)?;
    let eval = c.compose(&bxa.p1, &ip.eval);
    Some(Exponential { a: a.clone(), b: b.clone(), ip, bxa, eval })
}

/// `ε ∘ (A × g): A × C → B` for `g: C → [A, B]`.
pub fn uncurry<C: Clan>(c: &C, e: &ExponentialOf<C>, g: &C::Mor) -> Option<C::Mor> {
    let pb = c.product(&e.a, &c.dom(g))?;
    let m = c.pair(&e.ip.cone, &pb.p1, &c.compose(g, &pb.p2))?;
    Some(c.compose(&e.eval, &m))
}

/// `λ(h): C → [A, B]` for `h: A × C → B`, by search.
pub fn curry<C: Clan>(c: &C, e: &ExponentialOf<C>, x: &C::Obj, h: &C::Mor) -> Option<C::Mor> {
    c.hom(x, e.obj()).into_iter().find(|g| uncurry(c, e, g).as_ref() == Some(h))
}

/// β- and η-laws of `e` against maps out of the probe objects.
pub fn exponential_report<C: Clan>(c: &C, e: &ExponentialOf<C>, probes: &[C::Obj]) -> VerificationReport {
    let mut r = VerificationReport::new();
    r.timed("beta", || {
        probes.iter().find_map(|x| {
            let pb = c.product(&e.a, x)?;
            c.hom(&pb.apex, &e.b).into_iter().find_map(|h| match curry(c, e, x, &h) {
                Some(_) => None,
                None => Some(json!({"object": c.obj_label(x), "map": c.mor_label(&h), "problem": "no abstraction"})),
            })
        })
    });
    r.timed("eta", || {
        probes.iter().find_map(|x| {
            c.hom(x, e.obj()).into_iter().find_map(|g| {
                let back = uncurry(c, e, &g).and_then(|h| curry(c, e, x, &h));
                (back.as_ref() != Some(&g)).then(|| json!({"object": c.obj_label(x), "map": c.mor_label(&g)}))
            })
        })
    });
    r
}

/// The laws relating Σ, Π and base change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    BeckChevalley,
    Frobenius1,
    Frobenius2,
    Distributivity,
    Fubini,
}

impl Law {
    pub const ALL: [Law; 5] = [Law::BeckChevalley, Law::Frobenius1, Law::Frobenius2, Law::Distributivity, Law::Fubini];

    pub fn name(self) -> &'static str {
        match self {
            Law::BeckChevalley => "beck_chevalley",
            Law::Frobenius1 => "frobenius1",
            Law::Frobenius2 => "frobenius2",
            Law::Distributivity => "distributivity",
            Law::Fubini => "fubini",
        }
    }
}

impl FromStr for Law {
    type Err = InputError;
    fn from_str(s: &str) -> Result<Law, InputError> {
        Law::ALL.into_iter().find(|l| l.name() == s).ok_or_else(|| InputError::Unknown(format!("law {s}")))
    }
}

/// The data a law is checked on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LawInstance<O, M> {
    /// Cartesian square of `f: A → B` (a fibration) and `v: D → B`; `e: E → A`
    /// is compared under `Π`, `y: Y → D` under `Σ`.
    BeckChevalley { f: M, v: M, e: M, y: M },
    /// `f: A → B`, `g: B → C` and a fibration `p: X → C`.
    Frobenius1 { f: M, g: M, p: M },
    /// Fibrations `p: X → A`, `f: A → B` and `q: Y → B`.
    Frobenius2 { p: M, f: M, q: M },
    /// A tower of fibrations `E →e B →q A →f C`.
    Distributivity { f: M, q: M, e: M },
    /// A fibration `e: E → A × B` into the canonical product.
    Fubini { a: O, b: O, e: M },
}

pub type LawInstanceOf<C> = LawInstance<<C as Category>::Obj, <C as Category>::Mor>;

impl<O, M> LawInstance<O, M> {
    pub fn law(&self) -> Law {
        match self {
            LawInstance::BeckChevalley { .. } => Law::BeckChevalley,
            LawInstance::Frobenius1 { .. } => Law::Frobenius1,
            LawInstance::Frobenius2 { .. } => Law::Frobenius2,
            LawInstance::Distributivity { .. } => Law::Distributivity,
            LawInstance::Fubini { .. } => Law::Fubini,
        }
    }
}

fn need(ok: bool, what: &str) -> Result<(), InputError> {
    if ok {
        Ok(())
    } else {
        Err(InputError::Endpoints(what.to_string()))
    }
}

fn pull<C: Clan>(c: &C, x: &C::Mor, g: &C::Mor) -> Result<PullbackOf<C>, InputError> {
    c.pullback(x, g)
        .ok_or_else(|| InputError::Other(format!("no pullback of {} along {}", c.mor_label(x), c.mor_label(g))))
}

fn pi_of<C: PiClan>(c: &C, f: &C::Mor, p: &C::Mor) -> Result<InternalProductOf<C>, InputError> {
    c.internal_product(f, p)
        .ok_or_else(|| InputError::Other(format!("no internal product of {} along {}", c.mor_label(p), c.mor_label(f))))
}

/// Compares two objects over the same base by searching an isomorphism over
/// it; the witness is recorded on success as well.
fn iso_check<C: PiClan>(c: &C, name: &str, lhs: &C::Mor, rhs: &C::Mor) -> Check {
    let sides = json!({
        "lhs": c.obj_label(&c.dom(lhs)),
        "rhs": c.obj_label(&c.dom(rhs)),
        "base": c.obj_label(&c.cod(lhs)),
    });
    match c.iso_over(lhs, rhs) {
        Some(h) => Check {
            name: name.into(),
            status: Status::Pass,
            witness: Some(json!({"sides": sides, "iso": c.mor_label(&h)})),
            elapsed_ms: 0,
        },
        None => Check::fail(name, json!({"sides": sides, "problem": "no isomorphism over the base"})),
    }
}

/// Computes both sides of the law on `inst` and searches an isomorphism over
/// the common base.
pub fn verify_law<C: PiClan>(c: &C, inst: &LawInstanceOf<C>) -> Result<VerificationReport, InputError> {
    let fib = |m: &C::Mor| c.is_fibration(m);
    let mut r = VerificationReport::new();
    match inst {
        LawInstance::BeckChevalley { f, v, e, y } => {
            need(c.cod(f) == c.cod(v) && fib(f), "beck_chevalley: f must be a fibration with the codomain of v")?;
            need(c.cod(e) == c.dom(f) && fib(e), "beck_chevalley: e must be a fibration over dom f")?;
            need(c.cod(y) == c.dom(v) && fib(y), "beck_chevalley: y must be a fibration over dom v")?;
            // C = A ×_B D with u: C → A and g: C → D.
            let sq = pull(c, f, v)?;
            let (u, g) = (&sq.p1, &sq.p2);
            // g_* u^* E against v^* f_* E, over D.
            let ue = pull(c, e, u)?;
            let lhs = pi_of(c, g, &ue.p2)?.structure;
            let fe = pi_of(c, f, e)?;
            let rhs = pull(c, &fe.structure, v)?.p2;
            r.push(iso_check(c, "beck_chevalley/pi", &lhs, &rhs));
            // u_! g^* Y against f^* v_! Y, over A.
            let gy = pull(c, y, g)?;
            let lhs = c.compose(u, &gy.p2);
            let rhs = pull(c, &c.compose(v, y), f)?.p2;
            r.push(iso_check(c, "beck_chevalley/sigma", &lhs, &rhs));
        }
        LawInstance::Frobenius1 { f, g, p } => {
            need(c.cod(f) == c.dom(g) && c.cod(p) == c.cod(g) && fib(p), "frobenius1: need f: A → B, g: B → C, fibration p: X → C")?;
            // A ×_B (B ×_C X) against A ×_C X, over A.
            let inner = pull(c, p, g)?;
            let lhs = pull(c, &inner.p2, f)?.p2;
            let rhs = pull(c, p, &c.compose(g, f))?.p2;
            r.push(iso_check(c, "frobenius1", &lhs, &rhs));
        }
        LawInstance::Frobenius2 { p, f, q } => {
            need(c.cod(p) == c.dom(f) && c.cod(q) == c.cod(f), "frobenius2: need p: X → A, f: A → B, q: Y → B")?;
            need(fib(p) && fib(f) && fib(q), "frobenius2: p, f and q must be fibrations")?;
            // f_!(X ×_A f^* Y) against f_!(X) ×_B Y, over B.
            let fy = pull(c, q, f)?;
            let x_fy = pull(c, p, &fy.p2)?;
            let lhs = c.compose(f, &c.compose(p, &x_fy.p1));
            let fx = c.compose(f, p);
            let pb = pull(c, &fx, q)?;
            let rhs = c.compose(q, &pb.p2);
            r.push(iso_check(c, "frobenius2", &lhs, &rhs));
        }
        LawInstance::Distributivity { f, q, e } => {
            need(c.cod(e) == c.dom(q) && c.cod(q) == c.dom(f), "distributivity: need e: E → B, q: B → A, f: A → C")?;
            need(fib(e) && fib(q) && fib(f), "distributivity: e, q and f must be fibrations")?;
            // Π_f Σ_q E against Σ_S Π_{f'} ε^* E with S = Π_f B, over C.
            let lhs = pi_of(c, f, &c.compose(q, e))?.structure;
            let s = pi_of(c, f, q)?;
            let ee = pull(c, e, &s.eval)?;
            let inner = pi_of(c, &s.cone.p2, &ee.p2)?;
            let rhs = c.compose(&s.structure, &inner.structure);
            r.push(iso_check(c, "distributivity", &lhs, &rhs));
        }
        LawInstance::Fubini { a, b, e } => {
            let prod = c.product(a, b).ok_or_else(|| InputError::Other("no product".into()))?;
            need(c.cod(e) == prod.apex && fib(e), "fubini: e must be a fibration into A × B")?;
            let total = c.to_terminal(&c.dom(e));
            let via_b = c.compose(&c.to_terminal(b), &c.compose(&prod.p2, e));
            let via_a = c.compose(&c.to_terminal(a), &c.compose(&prod.p1, e));
            r.push(iso_check(c, "fubini/sigma_b", &via_b, &total));
            r.push(iso_check(c, "fubini/sigma_a", &via_a, &total));
            let whole = pi_of(c, &c.to_terminal(&prod.apex), e)?.structure;
            let inner_b = pi_of(c, &prod.p2, e)?;
            let via_b = pi_of(c, &c.to_terminal(b), &inner_b.structure)?.structure;
            let inner_a = pi_of(c, &prod.p1, e)?;
            let via_a = pi_of(c, &c.to_terminal(a), &inner_a.structure)?.structure;
            r.push(iso_check(c, "fubini/pi_b", &via_b, &whole));
            r.push(iso_check(c, "fubini/pi_a", &via_a, &whole));
        }
    }
    Ok(r)
}

/// Up to `limit` instances of `law` drawn from the working set, in
/// enumeration order.
pub fn law_instances<C: Clan>(c: &C, law: Law, limit: usize) -> Vec<LawInstanceOf<C>> {
    let maps = all_morphisms(c);
    let fibs: Vec<&C::Mor> = maps.iter().filter(|m| c.is_fibration(m)).collect();
    let into = |x: &C::Obj| -> Vec<C::Mor> { fibs.iter().filter(|m| &c.cod(m) == x).map(|m| (*m).clone()).collect() };
    let mut out = Vec::new();
    match law {
        Law::BeckChevalley => {
            'outer: for f in &fibs {
                for v in maps.iter().filter(|v| c.cod(v) == c.cod(f)) {
                    for e in into(&c.dom(f)) {
                        if let Some(y) = into(&c.dom(v)).into_iter().next() {
                            out.push(LawInstance::BeckChevalley { f: (*f).clone(), v: v.clone(), e, y });
                            if out.len() >= limit {
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
        Law::Frobenius1 => {
            'outer: for g in &maps {
                for f in maps.iter().filter(|f| c.cod(f) == c.dom(g)) {
                    for p in into(&c.cod(g)) {
                        out.push(LawInstance::Frobenius1 { f: f.clone(), g: g.clone(), p });
                        if out.len() >= limit {
                            break 'outer;
                        }
                    }
                }
            }
        }
        Law::Frobenius2 => {
            'outer: for f in &fibs {
                for p in into(&c.dom(f)) {
                    for q in into(&c.cod(f)) {
                        out.push(LawInstance::Frobenius2 { p: p.clone(), f: (*f).clone(), q });
                        if out.len() >= limit {
                            break 'outer;
                        }
                    }
                }
            }
        }
        Law::Distributivity => {
            'outer: for f in &fibs {
                for q in into(&c.dom(f)) {
                    for e in into(&c.dom(&q)) {
                        out.push(LawInstance::Distributivity { f: (*f).clone(), q: q.clone(), e });
                        if out.len() >= limit {
                            break 'outer;
                        }
                    }
                }
            }
        }
        Law::Fubini => {
            let objs = c.objects();
            'outer: for a in &objs {
                for b in &objs {
                    let Some(prod) = c.product(a, b) else { continue };
                    for x in &objs {
                        for e in c.hom(x, &prod.apex).into_iter().filter(|e| c.is_fibration(e)) {
                            out.push(LawInstance::Fubini { a: a.clone(), b: b.clone(), e });
                            if out.len() >= limit {
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// `isCont(A) = Σ_A Π_{p1}(PA)` with the data it is built from.
#[derive(Debug, Clone)]
pub struct Contractibility<O, M> {
    pub obj: O,
    pub ip: InternalProduct<O, M>,
    pub path: crate::tribe::PathObject<O, M>,
}

pub type ContractibilityOf<C> = Contractibility<<C as Category>::Obj, <C as Category>::Mor>;

pub fn is_contr_object<T: Tribe + PiClan>(t: &T, a: &T::Obj) -> Result<ContractibilityOf<T>, InputError> {
    let path = t.path_object(a).ok_or_else(|| InputError::Other("path object unavailable".into()))?;
    let ip = pi_of(t, &path.base.p1, &path.pair)?;
    Ok(Contractibility { obj: ip.obj.clone(), ip, path })
}

/// The contraction `(a, h)` encoded by a point `x` of `isCont(A)`: `a` is its
/// image in `A` and `h: A → PA` runs from `a` to the identity.
pub fn contraction_of_point<T: Tribe + PiClan>(
    t: &T,
    k: &ContractibilityOf<T>,
    a_obj: &T::Obj,
    x: &T::Mor,
) -> Option<(T::Mor, T::Mor)> {
    let a = t.compose(&k.ip.structure, x);
    let po = &k.path;
    let pb = t.pullback(&po.base.p1, &a)?;
    let bang = t.to_terminal(a_obj);
    let diag = t.pair(&po.base, &t.compose(&a, &bang), &t.id(a_obj))?;
    let into = t.pair(&pb, &diag, &bang)?;
    let h = t.compose(&transpose(t, &k.ip, &pb, x)?, &into);
    Some((a, h))
}

/// Builds `isCont(A)` and checks that it is a mere proposition, that it is
/// inhabited exactly when `A` is contractible, and that its points correspond
/// bijectively to contractions of `A`.
pub fn is_contr_witness<T: Tribe + PiClan>(t: &T, a: &T::Obj) -> Result<(T::Obj, VerificationReport), InputError> {
    let k = is_contr_object(t, a)?;
    let one = t.terminal();
    let mut r = VerificationReport::new();
    r.timed("mere_proposition", || {
        let conds = mere_proposition_conditions(t, &k.obj);
        let trunc = is_object_n_truncated(t, &k.obj, -1);
        match (conds, trunc) {
            (Ok(cs), Ok(true)) if cs.iter().all(|&b| b) => None,
            (cs, tr) => Some(json!({
                "object": t.obj_label(&k.obj),
                "conditions": cs.map(|c| c.to_vec()).map_err(|e| e.to_string()),
                "truncated": tr.map_err(|e| e.to_string()),
            })),
        }
    });
    let points = t.hom(&one, &k.obj);
    let inhabited = !points.is_empty();
    let contractible = is_homotopy_equivalence(t, &t.to_terminal(a));
    let status = if inhabited == contractible { Status::Pass } else { Status::Fail };
    r.push(Check {
        name: "inhabited_iff_contractible".into(),
        status,
        witness: Some(json!({"inhabited": inhabited, "contractible": contractible})),
        elapsed_ms: 0,
    });
    r.timed("points_are_contractions", || {
        let po = &k.path;
        let bang = t.to_terminal(a);
        let mut contractions = 0usize;
        for pt in t.hom(&one, a) {
            let diag = t.pair(&po.base, &t.compose(&pt, &bang), &t.id(a))?;
            contractions += t.hom_over(a, &po.pair, &diag).len();
        }
        let mut seen = HashSet::new();
        for x in &points {
            let Some((pt, h)) = contraction_of_point(t, &k, a, x) else {
                return Some(json!({"point": t.mor_label(x), "problem": "no contraction"}));
            };
            let ok = t.compose(&po.d0, &h) == t.compose(&pt, &bang) && t.compose(&po.d1, &h) == t.id(a);
            if !ok {
                return Some(json!({"point": t.mor_label(x), "problem": "not a contraction"}));
            }
            if !seen.insert((pt, h)) {
                return Some(json!({"point": t.mor_label(x), "problem": "two points give one contraction"}));
            }
        }
        (seen.len() != contractions).then(|| json!({"points": points.len(), "contractions": contractions}))
    });
    Ok((k.obj, r))
}

/// Bounds for [`verify_pi_tribe`].
#[derive(Debug, Clone)]
pub struct PiSuiteOptions {
    /// Fibration pairs `(f, p)` checked for cofreeness, evenly spaced through
    /// the enumeration.
    pub max_pairs: usize,
    /// Anodyne maps checked for preservation by `Π`.
    pub max_anodyne: usize,
    /// Objects `C, A, B` for the closedness of `Ho`; `None` means all.
    pub closed_probes: Option<Vec<usize>>,
    /// Shuffles the samples instead of spacing them.
    pub seed: Option<u64>,
}

impl Default for PiSuiteOptions {
    fn default() -> Self {
        PiSuiteOptions { max_pairs: usize::MAX, max_anodyne: usize::MAX, closed_probes: None, seed: None }
    }
}

/// Composable fibration pairs `(f: A → B, p: E → A)` of the working set.
pub fn fibration_pairs<C: Clan>(c: &C) -> Vec<(C::Mor, C::Mor)> {
    let fibs: Vec<C::Mor> = all_morphisms(c).into_iter().filter(|m| c.is_fibration(m)).collect();
    let mut out = Vec::new();
    for f in &fibs {
        for p in fibs.iter().filter(|p| c.cod(p) == c.dom(f)) {
            out.push((f.clone(), p.clone()));
        }
    }
    out
}

pub fn verify_pi_tribe<T: Tribe + PiClan>(t: &T, opts: &PiSuiteOptions) -> VerificationReport {
    verify_pi_tribe_with(t, &|f, p| t.internal_product(f, p), opts)
}

/// The π-tribe suite with internal products taken from `pi`: the tribe axioms,
/// existence and cofreeness of `Π` with fibration structure maps, preservation
/// of anodyne maps by `Π`, and closedness of `Ho` through
/// `π0 Hom(A × C, B) ≅ π0 Hom(C, [A, B])`.
pub fn verify_pi_tribe_with<T: Tribe>(t: &T, pi: &PiFn<T>, opts: &PiSuiteOptions) -> VerificationReport {
    let mut r = VerificationReport::new();
    r.extend(verify_tribe(t));
    let pairs = sample(&fibration_pairs(t), opts.max_pairs, opts.seed);
    r.timed("internal_products_cofree", || {
        pairs.par_iter().find_map_first(|(f, p)| {
            let Some(ip) = pi(f, p) else {
                return Some(json!({"f": t.mor_label(f), "p": t.mor_label(p), "problem": "no internal product"}));
            };
            let rep = verify_cofree(t, f, p, &ip, &probes_over(t, &t.cod(f)));
            let failure = rep.failures().next().map(|c| {
                json!({"f": t.mor_label(f), "p": t.mor_label(p), "check": c.name, "witness": c.witness})
            });
            failure
        })
    });
    r.timed("pi_preserves_anodyne", || {
        let maps = all_morphisms(t);
        let anodyne: Vec<T::Mor> = maps.iter().filter(|u| t.is_anodyne(u)).cloned().collect();
        let fibs: Vec<&T::Mor> = maps.iter().filter(|m| t.is_fibration(m)).collect();
        let mut cases = Vec::new();
        for u in &anodyne {
            for p2 in fibs.iter().filter(|p| t.dom(p) == t.cod(u)) {
                let p = t.compose(p2, u);
                if !t.is_fibration(&p) {
                    continue;
                }
                for f in fibs.iter().filter(|f| t.dom(f) == t.cod(p2)) {
                    cases.push((u.clone(), p.clone(), (*p2).clone(), (*f).clone()));
                }
            }
        }
        sample(&cases, opts.max_anodyne, opts.seed).par_iter().find_map_first(|(u, p, p2, f)| {
            let label = || json!({"u": t.mor_label(u), "p": t.mor_label(p2), "f": t.mor_label(f)});
            let (Some(ip), Some(ip2)) = (pi(f, p), pi(f, p2)) else {
                return Some(json!({"case": label(), "problem": "no internal product"}));
            };
            match pi_on_map(t, &ip, &ip2, u) {
                None => Some(json!({"case": label(), "problem": "Π(u) not found"})),
                Some(v) if !t.is_anodyne(&v) => Some(json!({"case": label(), "problem": "Π(u) not anodyne"})),
                Some(_) => None,
            }
        })
    });
    r.timed("ho_cartesian_closed", || {
        let objs = t.objects();
        let probes: Vec<T::Obj> = match &opts.closed_probes {
            None => objs.clone(),
            Some(ix) => ix.iter().filter_map(|&i| objs.get(i).cloned()).collect(),
        };
        let mut triples = Vec::new();
        for x in &probes {
            for a in &probes {
                for b in &probes {
                    triples.push((x.clone(), a.clone(), b.clone()));
                }
            }
        }
        triples.par_iter().find_map_first(|(x, a, b)| closed_witness(t, pi, x, a, b))
    });
    r
}

/// Whether currying induces a bijection `π0 Hom(A × C, B) ≅ π0 Hom(C, [A, B])`.
fn closed_witness<T: Tribe>(t: &T, pi: &PiFn<T>, x: &T::Obj, a: &T::Obj, b: &T::Obj) -> Option<Value> {
    let label = || json!({"C": t.obj_label(x), "A": t.obj_label(a), "B": t.obj_label(b)});
    let Some(e) = exponential_with(t, a, b, pi) else {
        return Some(json!({"case": label(), "problem": "no exponential"}));
    };
    let curried = t.hom(x, e.obj());
    let Some(uncurried) = curried.iter().map(|g| uncurry(t, &e, g)).collect::<Option<Vec<_>>>() else {
        return Some(json!({"case": label(), "problem": "uncurry failed"}));
    };
    let pb = t.product(a, x)?;
    if uncurried.iter().collect::<HashSet<_>>().len() != t.hom(&pb.apex, b).len() || uncurried.len() != curried.len() {
        return Some(json!({"case": label(), "problem": "currying is not a bijection"}));
    }
    for i in 0..curried.len() {
        for j in i + 1..curried.len() {
            if are_homotopic(t, &curried[i], &curried[j]) != are_homotopic(t, &uncurried[i], &uncurried[j]) {
                return Some(json!({
                    "case": label(),
                    "maps": [t.mor_label(&curried[i]), t.mor_label(&curried[j])],
                    "problem": "homotopy not reflected",
                }));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clan::tests::{all_fib, chain, square_lattice};
    use crate::fincat::preorder_presentation;
    use crate::models::finset::{all_maps, FinMap, FinSet};
    use crate::models::gpd::{arrow_groupoid, exponential_over, groupoid_iso, GFunctor, Group, Groupoid};
    use crate::models::FinGpd;
    use std::sync::Arc;

    fn fm(tgt: usize, map: &[u32]) -> FinMap {
        FinMap::new(tgt, map.to_vec())
    }

    fn small_gpd() -> FinGpd {
        FinGpd::new(vec![
            ("0".into(), Arc::new(Groupoid::empty())),
            ("1".into(), Arc::new(Groupoid::discrete(1))),
            ("I".into(), Arc::new(Groupoid::codiscrete(2))),
            ("d2".into(), Arc::new(Groupoid::discrete(2))),
            ("BZ2".into(), Arc::new(Groupoid::delooping(Group::cyclic(2)))),
        ])
    }

    #[test]
    fn sections_of_fibers_two_and_three() {
        let t = FinSet::new(5);
        let p = fm(2, &[0, 0, 1, 1, 1]);
        let ip = t.internal_product(&t.to_terminal(&2), &p).unwrap();
        assert_eq!(ip.obj, 6);
        assert!(verify_cofree(&t, &t.to_terminal(&2), &p, &ip, &probes_over(&t, &1)).all_pass());
    }

    #[test]
    fn product_along_identity_is_the_object() {
        let t = FinSet::new(3);
        let p = fm(2, &[0, 1, 1]);
        let ip = t.internal_product(&t.id(&2), &p).unwrap();
        assert!(t.iso_over(&ip.structure, &p).is_some());
        assert!(verify_cofree(&t, &t.id(&2), &p, &ip, &probes_over(&t, &2)).all_pass());
    }

    #[test]
    fn terminal_family_has_terminal_product() {
        let t = FinSet::new(3);
        let f = fm(2, &[0, 1, 1]);
        let ip = t.internal_product(&f, &t.id(&3)).unwrap();
        assert!(t.iso_over(&ip.structure, &t.id(&2)).is_some());
        assert!(verify_cofree(&t, &f, &t.id(&3), &ip, &probes_over(&t, &2)).all_pass());
    }

    #[test]
    fn smaller_candidate_is_not_surjective() {
        let t = FinSet::new(5);
        let p = fm(2, &[0, 0, 1, 1, 1]);
        let f = t.to_terminal(&2);
        let ip = t.internal_product(&f, &p).unwrap();
        let drop_last = FinMap::new(6, (0..5).collect());
        let bad = restrict_candidate(&t, &f, &ip, &drop_last).unwrap();
        let rep = verify_cofree(&t, &f, &p, &bad, &probes_over(&t, &1));
        let w = rep.get("cofree").unwrap().witness.clone().unwrap();
        assert_eq!(w["problem"], "not surjective");
    }

    #[test]
    fn constructed_products_match_search_in_a_large_enough_working_set() {
        let t = FinSet::with_empty(4);
        let mut agree = 0;
        for (f, p) in fibration_pairs(&FinSet::with_empty(2)) {
            let built = t.internal_product(&f, &p).unwrap();
            let found = search_internal_product(&t, &f, &p);
            if built.obj <= 4 {
                let found = found.expect("a cofree candidate exists in the working set");
                assert!(t.iso_over(&found.structure, &built.structure).is_some());
                agree += 1;
            }
        }
        assert!(agree > 20);
    }

    #[test]
    fn products_in_a_presented_clan_are_found_by_search() {
        // In a lattice Π along a ≤ b of x ≤ a is the largest y ≤ b with
        // y ∧ a ≤ x; along c0 ≤ c1 in a chain that is c1.
        let c = all_fib(&chain(3), "c2");
        let f = c.cat.morphism("c0<c1").unwrap();
        let p = c.cat.morphism("id_c0").unwrap();
        let ip = c.internal_product(&f, &p).unwrap();
        assert_eq!(c.cat.obj_name(ip.obj), "c1");
        assert!(verify_pi_tribe(&c, &PiSuiteOptions::default()).all_pass());
    }

    #[test]
    fn lattice_without_implication_fails() {
        // Three atoms: no largest y with y ∧ a = 0.
        let names = ["0", "a", "b", "c", "1"];
        let c = all_fib(&preorder_presentation(&names, |i, j| i == j || i == 0 || j == 4), "1");
        let rep = verify_pi_tribe(&c, &PiSuiteOptions::default());
        assert_eq!(rep.get("internal_products_cofree").unwrap().status, Status::Fail);
        let c = all_fib(&square_lattice(), "ab");
        assert!(verify_pi_tribe(&c, &PiSuiteOptions::default()).all_pass());
    }

    #[test]
    fn exponential_counts_in_finset() {
        let t = FinSet::with_empty(3);
        for a in 0..=3usize {
            for b in 0..=3usize {
                let e = exponential(&t, &a, &b).unwrap();
                assert_eq!(*e.obj(), b.pow(a as u32));
            }
        }
        let e = exponential(&t, &2, &3).unwrap();
        assert!(exponential_report(&t, &e, &t.objects()).all_pass());
        let e = exponential(&t, &1, &3).unwrap();
        assert_eq!(*e.obj(), 3);
    }

    #[test]
    fn exponential_from_i_is_the_arrow_groupoid() {
        let t = small_gpd();
        let i = t.member("I").unwrap();
        for b in t.objects() {
            let e = exponential(&t, &i, &b).unwrap();
            assert!(groupoid_iso(e.obj(), &arrow_groupoid(&b).gpd).is_some(), "{}", t.obj_label(&b));
            let direct = exponential_over(&t.to_terminal(&i), &t.to_terminal(&b), None);
            assert!(groupoid_iso(e.obj(), &direct.gpd).is_some());
            let one = exponential(&t, &t.terminal(), &b).unwrap();
            assert!(groupoid_iso(one.obj(), &b).is_some());
        }
        let bz2 = t.member("BZ2").unwrap();
        let e = exponential(&t, &i, &bz2).unwrap();
        let probes = vec![t.terminal(), i.clone(), t.member("d2").unwrap()];
        assert!(exponential_report(&t, &e, &probes).all_pass());
    }

    #[test]
    fn groupoid_products_are_cofree() {
        let t = small_gpd();
        let pairs = fibration_pairs(&t);
        assert!(pairs.len() > 20);
        for (f, p) in sample(&pairs, 25, None) {
            let ip = t.internal_product(&f, &p).unwrap();
            let rep = verify_cofree(&t, &f, &p, &ip, &probes_over(&t, &t.cod(&f)));
            assert!(rep.all_pass(), "{} {} {:?}", t.mor_label(&f), t.mor_label(&p), rep.failures().next());
        }
    }

    #[test]
    fn laws_on_finset() {
        let t = FinSet::with_empty(3);
        let surj = fm(2, &[0, 1, 1]);
        let bc = LawInstance::BeckChevalley { f: surj.clone(), v: fm(2, &[0, 1]), e: fm(3, &[0, 1, 2, 2]), y: fm(2, &[0, 0, 1]) };
        assert!(verify_law(&t, &bc).unwrap().all_pass());
        let dist = LawInstance::Distributivity { f: t.to_terminal(&2), q: fm(2, &[0, 1, 1]), e: fm(3, &[0, 1, 2, 2]) };
        let rep = verify_law(&t, &dist).unwrap();
        assert!(rep.all_pass());
        let w = rep.checks[0].witness.clone().unwrap();
        assert_eq!(w["sides"]["lhs"], "3");
        assert_eq!(w["sides"]["rhs"], "3");
        let fub = LawInstance::Fubini { a: 2, b: 2, e: fm(4, &[0, 1, 1, 2, 3, 3]) };
        assert!(verify_law(&t, &fub).unwrap().all_pass());
        let bad = LawInstance::Frobenius1 { f: fm(2, &[0]), g: fm(3, &[0, 1]), p: fm(2, &[0]) };
        assert!(verify_law(&t, &bad).is_err());
        for law in Law::ALL {
            for inst in law_instances(&t, law, 40) {
                assert!(verify_law(&t, &inst).unwrap().all_pass(), "{law:?} {inst:?}");
            }
        }
    }

    #[test]
    fn laws_on_groupoids() {
        let t = small_gpd();
        for law in Law::ALL {
            let insts = law_instances(&t, law, 6);
            assert!(!insts.is_empty());
            for inst in insts {
                assert!(verify_law(&t, &inst).unwrap().all_pass(), "{law:?}");
            }
        }
    }

    #[test]
    fn law_names_parse() {
        for law in Law::ALL {
            assert_eq!(law.name().parse::<Law>().unwrap(), law);
        }
        assert!("fubini2".parse::<Law>().is_err());
    }

    #[test]
    fn contractibility_objects() {
        let t = small_gpd();
        let expect = [("1", true), ("I", true), ("d2", false), ("BZ2", false), ("0", false)];
        for (name, inhabited) in expect {
            let a = t.member(name).unwrap();
            let (obj, rep) = is_contr_witness(&t, &a).unwrap();
            assert!(rep.all_pass(), "{name}: {:?}", rep.failures().next());
            assert_eq!(obj.num_objects() > 0, inhabited, "{name}");
        }
        let s = FinSet::with_empty(3);
        for a in 0..=3usize {
            let (obj, rep) = is_contr_witness(&s, &a).unwrap();
            assert!(rep.all_pass());
            assert_eq!(obj == 1, a == 1);
        }
    }

    #[test]
    fn pi_tribe_suites() {
        let s = FinSet::with_empty(2);
        assert!(verify_pi_tribe(&s, &PiSuiteOptions::default()).all_pass());
        let t = small_gpd();
        let opts = PiSuiteOptions { max_pairs: 30, max_anodyne: 30, ..Default::default() };
        let rep = verify_pi_tribe(&t, &opts);
        assert!(rep.all_pass(), "{:?}", rep.failures().next());
    }

    #[test]
    fn wrong_pi_fails_cofreeness() {
        let s = FinSet::with_empty(2);
        let wrong = |f: &FinMap, p: &FinMap| {
            let ip = s.internal_product(f, p)?;
            if ip.obj == 0 {
                return Some(ip);
            }
            let i = FinMap::new(ip.obj, (0..ip.obj as u32 - 1).collect());
            restrict_candidate(&s, f, &ip, &i)
        };
        let rep = verify_pi_tribe_with(&s, &wrong, &PiSuiteOptions::default());
        assert_eq!(rep.get("internal_products_cofree").unwrap().status, Status::Fail);
    }

    #[test]
    fn pi_composes_along_composites() {
        let t = FinSet::with_empty(3);
        for g in all_maps(2, 1).into_iter().chain(all_maps(3, 2)) {
            for f in all_maps(3, g.src()) {
                for p in all_maps(2, 3) {
                    let gf = t.compose(&g, &f);
                    let whole = t.internal_product(&gf, &p).unwrap();
                    let inner = t.internal_product(&f, &p).unwrap();
                    let outer = t.internal_product(&g, &inner.structure).unwrap();
                    assert!(t.iso_over(&whole.structure, &outer.structure).is_some());
                }
            }
        }
        let u = small_gpd();
        let one = u.terminal();
        let i = u.member("I").unwrap();
        let p = GFunctor::to_point(&i, &one);
        let d2 = u.member("d2").unwrap();
        let q = u.hom(&d2, &i).into_iter().find(|q| u.is_fibration(q));
        if let Some(q) = q {
            let whole = u.internal_product(&u.compose(&p, &q), &u.id(&d2)).unwrap();
            let inner = u.internal_product(&q, &u.id(&d2)).unwrap();
            let outer = u.internal_product(&p, &inner.structure).unwrap();
            assert!(u.iso_over(&whole.structure, &outer.structure).is_some());
        }
    }
}

#[cfg(test)]
mod properties {
    use proptest::prelude::*;

    use super::*;
    use crate::models::finset::{sections, FinMap, FinSet};

    /// A composable pair `f: A → B`, `p: E → A` with `A, B, E` of size at most 3.
    fn tower() -> impl Strategy<Value = (FinMap, FinMap)> {
        (1..=3usize, 1..=3usize, 0..=3usize).prop_flat_map(|(a, b, e)| {
            (
                proptest::collection::vec(0..b as u32, a).prop_map(move |v| FinMap::new(b, v)),
                proptest::collection::vec(0..a as u32, e).prop_map(move |v| FinMap::new(a, v)),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn finset_products_are_cofree((f, p) in tower()) {
            let s = FinSet::with_empty(3);
            let ip = s.internal_product(&f, &p).unwrap();
            prop_assert!(verify_cofree(&s, &f, &p, &ip, &probes_over(&s, &f.tgt)).all_pass());
            // Independent count: over each b, the product of the fiber sizes of p.
            let expected: usize = (0..f.tgt as u32)
                .map(|b| f.fiber(b).iter().map(|&a| p.fiber(a).len()).product::<usize>())
                .sum();
            prop_assert_eq!(ip.obj, expected);
            prop_assert_eq!(sections(&f, &p).len(), expected);
        }

        /// `Π_{g f} ≅ Π_g Π_f` over the base.
        #[test]
        fn pi_composes((f, p) in tower(), g in proptest::collection::vec(0..2u32, 3)) {
            let s = FinSet::with_empty(3);
            let g = FinMap::new(2, g[..f.tgt].to_vec());
            let whole = s.internal_product(&g.after(&f), &p).unwrap();
            let inner = s.internal_product(&f, &p).unwrap();
            let outer = s.internal_product(&g, &inner.structure).unwrap();
            prop_assert!(s.iso_over(&whole.structure, &outer.structure).is_some());
        }

        #[test]
        fn law_instances_pass(law in 0..5usize, k in 0..200usize) {
            let s = FinSet::new(3);
            let law = Law::ALL[law];
            let insts = law_instances(&s, law, 200);
            let inst = &insts[k % insts.len()];
            prop_assert!(verify_law(&s, inst).unwrap().all_pass(), "{:?}", inst);
        }

        #[test]
        fn exponentials_satisfy_beta_and_eta(a in 0..=2usize, b in 0..=2usize) {
            let s = FinSet::with_empty(2);
            let e = exponential(&s, &a, &b).unwrap();
            prop_assert_eq!(*e.obj(), b.pow(a as u32));
            prop_assert!(exponential_report(&s, &e, &s.objects()).all_pass());
        }
    }
}
