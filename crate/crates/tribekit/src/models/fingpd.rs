//! The tribe of finite groupoids: isofibrations, functors and the path
//! object `A^I`, over a finite working set of groupoids.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::clan::{Clan, Pullback, PullbackOf};
use crate::fincat::Category;
use crate::models::gpd::{
    arrow_groupoid, functors, mediate, nat_isos, pullback, relative_path, ArrowGroupoid, GFunctor, Groupoid,
};
use crate::pi::{InternalProduct, InternalProductOf, PiClan};
use crate::models::gpd::exponential_over;
use crate::tribe::{mapping_path_object, PathObject, PathObjectOf, Tribe};

pub type Gpd = Arc<Groupoid>;

/// A relative path object together with lookup tables for building
/// homotopies from natural isomorphisms.
struct PathData {
    po: PathObject<Gpd, GFunctor>,
    /// Arrow of the source groupoid → object of the path groupoid.
    arrow_obj: HashMap<u32, u32>,
    /// (source object, `∂0` image, `∂1` image) → morphism of the path groupoid.
    mor_of: HashMap<(u32, u32, u32), u32>,
}

/// The groupoid model over a working set of named groupoids.
pub struct FinGpd {
    members: Vec<Gpd>,
    names: HashMap<Gpd, String>,
    point: Gpd,
    homs: RwLock<HashMap<(Gpd, Gpd), Arc<Vec<GFunctor>>>>,
    paths: RwLock<HashMap<GFunctor, Arc<PathData>>>,
}

/// A short structural description of a groupoid, e.g. `[2,1:2]` for a
/// walking isomorphism beside a one-object groupoid with group of order 2.
pub fn describe(g: &Groupoid) -> String {
    let parts: Vec<String> = g
        .components()
        .iter()
        .map(|c| match c.group.order() {
            1 => c.size.to_string(),
            n => format!("{}:{}", c.size, n),
        })
        .collect();
    format!("[{}]", parts.join(","))
}

impl FinGpd {
    /// A model whose working set is `members`, in the given order. The point
    /// is added at the front when no member is isomorphic to it.
    pub fn new(members: Vec<(String, Gpd)>) -> FinGpd {
        let point = Arc::new(Groupoid::discrete(1));
        let mut names = HashMap::new();
        let mut list = Vec::new();
        if !members.iter().any(|(_, g)| **g == *point) {
            names.insert(point.clone(), "1".to_string());
            list.push(point.clone());
        }
        for (n, g) in members {
            if names.contains_key(&g) {
                continue;
            }
            names.insert(g.clone(), n);
            list.push(g);
        }
        FinGpd { members: list, names, point, homs: RwLock::default(), paths: RwLock::default() }
    }

    pub fn member(&self, name: &str) -> Option<Gpd> {
        self.members.iter().find(|g| self.names[*g] == name).cloned()
    }

    pub fn name_of(&self, g: &Groupoid) -> Option<&str> {
        self.names.get(g).map(String::as_str)
    }

    pub fn point(&self) -> Gpd {
        self.point.clone()
    }

    /// The cached hom-set, ascending.
    pub fn hom_arc(&self, a: &Gpd, b: &Gpd) -> Arc<Vec<GFunctor>> {
        let key = (a.clone(), b.clone());
        if let Some(h) = self.homs.read().unwrap().get(&key) {
            return h.clone();
        }
        let h = Arc::new(functors(a, b, None));
        self.homs.write().unwrap().entry(key).or_insert(h).clone()
    }

    /// The `k`-th functor `a → b`.
    pub fn functor(&self, a: &Gpd, b: &Gpd, k: usize) -> Option<GFunctor> {
        self.hom_arc(a, b).get(k).cloned()
    }

    fn path_data(&self, p: &GFunctor) -> Arc<PathData> {
        if let Some(d) = self.paths.read().unwrap().get(p) {
            return d.clone();
        }
        let ag: ArrowGroupoid = if *p.tgt == *self.point { arrow_groupoid(&p.src) } else { relative_path(p) };
        let base = pullback(p, p);
        let pair = mediate(&base, &ag.d0, &ag.d1).expect("endpoints agree over the base");
        let arrow_obj = ag.arrows.iter().enumerate().map(|(o, &a)| (a, o as u32)).collect();
        let g = &ag.gpd;
        let mor_of = (0..g.num_morphisms() as u32)
            .map(|k| ((g.src(k), ag.d0.mor[k as usize], ag.d1.mor[k as usize]), k))
            .collect();
        let po = PathObject {
            obj: ag.gpd.clone(),
            sigma: ag.sigma,
            d0: ag.d0,
            d1: ag.d1,
            pair,
            base: Pullback { apex: base.apex, p1: base.p1, p2: base.p2 },
        };
        let d = Arc::new(PathData { po, arrow_obj, mor_of });
        self.paths.write().unwrap().entry(p.clone()).or_insert(d).clone()
    }

    /// The functor `A → P` into the path object of `d` determined by a
    /// natural isomorphism `f ⇒ g` with components `alpha`.
    fn homotopy_from(&self, d: &PathData, f: &GFunctor, g: &GFunctor, alpha: &[u32]) -> GFunctor {
        let a = &f.src;
        let ob: Vec<u32> = alpha.iter().map(|m| d.arrow_obj[m]).collect();
        let mor = (0..a.num_morphisms())
            .map(|m| d.mor_of[&(ob[a.src(m as u32) as usize], f.mor[m], g.mor[m])])
            .collect();
        GFunctor { src: a.clone(), tgt: d.po.obj.clone(), ob, mor }
    }

    /// The model characterization of anodyne maps: injective on objects and
    /// an equivalence.
    pub fn anodyne_by_model(u: &GFunctor) -> bool {
        u.is_injective_on_objects() && u.is_equivalence()
    }

    /// Builds a strong deformation retraction of `i` directly: each object
    /// outside the image is retracted along the least arrow from the least
    /// image object of its component. Returns `(r, h)` only when every
    /// defining equation holds.
    pub fn constructive_sdr(&self, i: &GFunctor) -> Option<(GFunctor, GFunctor)> {
        if !i.is_injective_on_objects() {
            return None;
        }
        let (a, b) = (&i.src, &i.tgt);
        let mut pre = vec![u32::MAX; b.num_objects()];
        for (x, &y) in i.ob.iter().enumerate() {
            pre[y as usize] = x as u32;
        }
        let mut mor_pre = HashMap::new();
        for (m, &n) in i.mor.iter().enumerate() {
            mor_pre.entry(n).or_insert(m as u32);
        }
        let mut r_ob = vec![0u32; b.num_objects()];
        let mut gamma = vec![0u32; b.num_objects()];
        for y in 0..b.num_objects() as u32 {
            if pre[y as usize] != u32::MAX {
                r_ob[y as usize] = pre[y as usize];
                gamma[y as usize] = b.id(y);
                continue;
            }
            let c = b.comp_of(y);
            let src = b.objects_of(c).find(|&z| pre[z as usize] != u32::MAX)?;
            r_ob[y as usize] = pre[src as usize];
            gamma[y as usize] = b.hom(src, y)[0];
        }
        let mut r_mor = vec![0u32; b.num_morphisms()];
        for m in 0..b.num_morphisms() as u32 {
            let (s, t) = (b.src(m), b.tgt(m));
            let n = b.compose(b.inverse(gamma[t as usize]), b.compose(m, gamma[s as usize]));
            r_mor[m as usize] = *mor_pre.get(&n)?;
        }
        let r = GFunctor { src: b.clone(), tgt: a.clone(), ob: r_ob, mor: r_mor };
        if r.law_violation().is_some() || r.after(i) != GFunctor::identity(a) {
            return None;
        }
        let ir = i.after(&r);
        let d = self.path_data(&self.to_terminal(b));
        let h = self.homotopy_from(&d, &ir, &GFunctor::identity(b), &gamma);
        (h.after(i) == d.po.sigma.after(i)).then_some((r, h))
    }
}

impl Category for FinGpd {
    type Obj = Gpd;
    type Mor = GFunctor;

    fn dom(&self, f: &GFunctor) -> Gpd {
        f.src.clone()
    }
    fn cod(&self, f: &GFunctor) -> Gpd {
        f.tgt.clone()
    }
    fn id(&self, a: &Gpd) -> GFunctor {
        GFunctor::identity(a)
    }
    fn compose(&self, g: &GFunctor, f: &GFunctor) -> GFunctor {
        g.after(f)
    }
    fn hom(&self, a: &Gpd, b: &Gpd) -> Vec<GFunctor> {
        self.hom_arc(a, b).as_ref().clone()
    }
    fn objects(&self) -> Vec<Gpd> {
        self.members.clone()
    }
    fn hom_over(&self, w: &Gpd, p: &GFunctor, g: &GFunctor) -> Vec<GFunctor> {
        if *w != g.src || p.tgt != g.tgt {
            return Vec::new();
        }
        functors(w, &p.src, Some((p, g)))
    }
    fn inverse(&self, f: &GFunctor) -> Option<GFunctor> {
        f.inverse()
    }
    fn is_iso(&self, f: &GFunctor) -> bool {
        f.is_iso()
    }
    fn obj_label(&self, a: &Gpd) -> String {
        self.names.get(a).cloned().unwrap_or_else(|| describe(a))
    }
    fn mor_label(&self, f: &GFunctor) -> String {
        let k = self.hom_arc(&f.src, &f.tgt).binary_search(f).map(|k| k.to_string()).unwrap_or_else(|_| "?".into());
        format!("{}>{}#{}", self.obj_label(&f.src), self.obj_label(&f.tgt), k)
    }
}

impl Clan for FinGpd {
    fn terminal(&self) -> Gpd {
        self.point.clone()
    }
    fn to_terminal(&self, a: &Gpd) -> GFunctor {
        GFunctor::to_point(a, &self.point)
    }
    fn is_fibration(&self, f: &GFunctor) -> bool {
        f.is_isofibration()
    }
    fn pullback(&self, f: &GFunctor, g: &GFunctor) -> Option<PullbackOf<Self>> {
        if f.tgt != g.tgt {
            return None;
        }
        let c = pullback(f, g);
        Some(Pullback { apex: c.apex, p1: c.p1, p2: c.p2 })
    }
    fn pair(&self, pb: &PullbackOf<Self>, a: &GFunctor, b: &GFunctor) -> Option<GFunctor> {
        let cone = crate::models::gpd::Cone { apex: pb.apex.clone(), p1: pb.p1.clone(), p2: pb.p2.clone() };
        mediate(&cone, a, b)
    }
}

impl Tribe for FinGpd {
    /// Fibrations factor trivially; everything else through its mapping path
    /// object.
    fn af_factorize(&self, f: &GFunctor) -> Option<(GFunctor, GFunctor)> {
        if self.is_fibration(f) {
            return Some((self.id(&f.src), f.clone()));
        }
        let mp = mapping_path_object(self, f).ok()?;
        Some((mp.u, mp.d1))
    }

    /// Decided by a constructed strong deformation retraction.
    fn is_anodyne(&self, u: &GFunctor) -> bool {
        self.constructive_sdr(u).is_some()
    }

    fn relative_path_object(&self, p: &GFunctor) -> Option<PathObjectOf<Self>> {
        self.is_fibration(p).then(|| self.path_data(p).po.clone())
    }

    /// Homotopies over `p` are natural isomorphisms with vertical components.
    fn homotopy_over(&self, p: &GFunctor, f: &GFunctor, g: &GFunctor) -> Option<GFunctor> {
        if f.src != g.src || f.tgt != g.tgt || p.after(f) != p.after(g) || !self.is_fibration(p) {
            return None;
        }
        let vertical = (*p.tgt != *self.point).then_some(p);
        let alpha = nat_isos(f, g, vertical, true).into_iter().next()?;
        let d = self.path_data(p);
        Some(self.homotopy_from(&d, f, g, &alpha))
    }
}

/// `Π_f(E, p)` is the fiber of the slice exponential `[A, p]_B` over the
/// identity: sections of `p` over each fiber of `f`, with arrows over the
/// isomorphisms of `B`.
impl PiClan for FinGpd {
    fn internal_product(&self, f: &GFunctor, p: &GFunctor) -> Option<InternalProductOf<Self>> {
        if p.tgt != f.src || !f.is_isofibration() || !p.is_isofibration() {
            return None;
        }
        let e = exponential_over(f, &f.after(p), Some(p));
        Some(InternalProduct {
            obj: e.gpd,
            structure: e.structure,
            cone: Pullback { apex: e.cone.apex, p1: e.cone.p1, p2: e.cone.p2 },
            eval: e.eval,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clan::verify_clan;
    use crate::fincat::lifting_witness;
    use crate::models::gpd::Group;
    use crate::tribe::{
        anodyne_lifting_witness, homotopy_by_search, is_homotopy_equivalence, mapping_path_witness,
        path_object_witness, strong_deformation_retract, verify_fibration_category, verify_tribe, Unfactored,
    };

    fn small() -> FinGpd {
        FinGpd::new(vec![
            ("0".into(), Arc::new(Groupoid::empty())),
            ("1".into(), Arc::new(Groupoid::discrete(1))),
            ("I".into(), Arc::new(Groupoid::codiscrete(2))),
            ("d2".into(), Arc::new(Groupoid::discrete(2))),
            ("BZ2".into(), Arc::new(Groupoid::delooping(Group::cyclic(2)))),
        ])
    }

    #[test]
    fn points_and_anodyne_maps() {
        let t = small();
        let (one, i, d2) = (t.member("1").unwrap(), t.member("I").unwrap(), t.member("d2").unwrap());
        let pt_i = t.functor(&one, &i, 0).unwrap();
        let pt_d2 = t.functor(&one, &d2, 0).unwrap();
        assert!(t.is_anodyne(&pt_i));
        assert!(FinGpd::anodyne_by_model(&pt_i));
        assert!(strong_deformation_retract(&t, &pt_i).is_some());
        assert!(anodyne_lifting_witness(&t, &pt_i).is_none());
        assert!(!t.is_anodyne(&pt_d2));
        assert!(strong_deformation_retract(&t, &pt_d2).is_none());
        // The counterexample square is against the isofibration 1 → d2 itself.
        assert!(lifting_witness(&t, &pt_d2, &pt_d2).is_some());
    }

    #[test]
    fn homotopies_are_natural_isomorphisms() {
        let t = small();
        let (one, i, d2) = (t.member("1").unwrap(), t.member("I").unwrap(), t.member("d2").unwrap());
        let pts = t.hom(&one, &i);
        assert_eq!(pts.len(), 2);
        let h = t.homotopy(&pts[0], &pts[1]).unwrap();
        let po = t.path_object(&i).unwrap();
        assert_eq!(po.d0.after(&h), pts[0]);
        assert_eq!(po.d1.after(&h), pts[1]);
        assert!(homotopy_by_search(&t, &pts[0], &pts[1]).is_some());
        let pd = t.hom(&one, &d2);
        assert!(t.homotopy(&pd[0], &pd[1]).is_none());
        assert!(homotopy_by_search(&t, &pd[0], &pd[1]).is_none());
    }

    #[test]
    fn mapping_path_of_a_point_of_i() {
        let t = small();
        let (one, i) = (t.member("1").unwrap(), t.member("I").unwrap());
        let f = t.functor(&one, &i, 0).unwrap();
        let mp = mapping_path_object(&t, &f).unwrap();
        assert_eq!(mp.obj.num_objects(), 2);
        assert!(mp.obj.is_connected());
        assert!(mapping_path_witness(&t, &f, &mp, &t.objects()).is_none());
        let (u, p) = t.af_factorize(&f).unwrap();
        assert_eq!(p.after(&u), f);
    }

    #[test]
    fn path_objects_and_equivalences() {
        let t = small();
        for a in t.objects() {
            let po = t.path_object(&a).unwrap();
            assert!(path_object_witness(&t, &a, &po).is_none(), "{}", t.obj_label(&a));
        }
        let i = t.member("I").unwrap();
        assert!(is_homotopy_equivalence(&t, &t.to_terminal(&i)));
        let d2 = t.member("d2").unwrap();
        assert!(!is_homotopy_equivalence(&t, &t.to_terminal(&d2)));
    }

    #[test]
    fn small_universe_is_a_tribe() {
        let t = small();
        assert!(verify_clan(&t).all_pass());
        let r = verify_tribe(&t);
        assert!(r.all_pass(), "{}", r.to_json());
        let r = verify_fibration_category(&t);
        assert!(r.all_pass(), "{}", r.to_json());
    }

    #[test]
    fn removing_factorizations_breaks_the_factorization_axiom() {
        let t = small();
        let u = Unfactored { inner: &t };
        let r = verify_fibration_category(&u);
        let c = r.get("acyclic_fibration_factorization").unwrap();
        assert!(!c.passed());
        assert!(c.witness.is_some());
    }
}
