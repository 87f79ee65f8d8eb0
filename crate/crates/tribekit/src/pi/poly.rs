//! Polynomial functors `Σ_v Π_p u*: Set/I → Set/J` between slices of
//! finite sets, their evaluation and their composition.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::clan::Clan;
use crate::fincat::InputError;
use crate::models::finset::{all_maps, sections, FinMap, FinSet};
use crate::pi::PiClan;
use crate::report::VerificationReport;

/// The exchange format: `I ←u E →p B →v J` with named elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialSpan {
    #[serde(rename = "I")]
    pub i: Vec<String>,
    #[serde(rename = "E")]
    pub e: Vec<String>,
    #[serde(rename = "B")]
    pub b: Vec<String>,
    #[serde(rename = "J")]
    pub j: Vec<String>,
    pub u: BTreeMap<String, String>,
    pub p: BTreeMap<String, String>,
    pub v: BTreeMap<String, String>,
}

/// A finite set over a base, by element names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Family {
    pub elements: Vec<String>,
    pub over: BTreeMap<String, String>,
}

/// A polynomial span with elements numbered.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    pub u: FinMap,
    pub p: FinMap,
    pub v: FinMap,
}

fn index_of(names: &[String], what: &str) -> Result<BTreeMap<String, u32>, InputError> {
    let mut ix = BTreeMap::new();
    for (k, n) in names.iter().enumerate() {
        if ix.insert(n.clone(), k as u32).is_some() {
            return Err(InputError::Duplicate(format!("{what} element {n}")));
        }
    }
    Ok(ix)
}

fn compile_map(
    name: &str,
    src: &[String],
    tgt: &[String],
    map: &BTreeMap<String, String>,
) -> Result<FinMap, InputError> {
    let tix = index_of(tgt, name)?;
    let six = index_of(src, name)?;
    if let Some(k) = map.keys().find(|k| !six.contains_key(*k)) {
        return Err(InputError::Unknown(format!("{name}: {k} is not in its domain")));
    }
    let vals = src
        .iter()
        .map(|x| {
            let y = map.get(x).ok_or_else(|| InputError::Endpoints(format!("{name} is undefined at {x}")))?;
            tix.get(y).copied().ok_or_else(|| InputError::Unknown(format!("{name}: {y} is not in its codomain")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FinMap::new(tgt.len(), vals))
}

impl PolynomialSpan {
    pub fn from_json(text: &str) -> Result<Self, InputError> {
        serde_json::from_str(text).map_err(|e| InputError::Other(format!("polynomial span: {e}")))
    }

    pub fn compile(&self) -> Result<Poly, InputError> {
        Ok(Poly {
            u: compile_map("u", &self.e, &self.i, &self.u)?,
            p: compile_map("p", &self.e, &self.b, &self.p)?,
            v: compile_map("v", &self.b, &self.j, &self.v)?,
        })
    }

    /// Names elements `i0, e0, b0, j0, …`.
    pub fn from_poly(q: &Poly, i: Vec<String>, j: Vec<String>) -> PolynomialSpan {
        let names = |pre: &str, n: usize| (0..n).map(|k| format!("{pre}{k}")).collect::<Vec<_>>();
        let (e, b) = (names("e", q.u.src()), names("b", q.v.src()));
        let table = |m: &FinMap, src: &[String], tgt: &[String]| {
            src.iter().zip(&m.map).map(|(x, &y)| (x.clone(), tgt[y as usize].clone())).collect()
        };
        PolynomialSpan {
            u: table(&q.u, &e, &i),
            p: table(&q.p, &e, &b),
            v: table(&q.v, &b, &j),
            i,
            e,
            b,
            j,
        }
    }
}

impl Family {
    pub fn compile(&self, base: &[String]) -> Result<FinMap, InputError> {
        compile_map("over", &self.elements, base, &self.over)
    }
}

impl Poly {
    pub fn new(u: FinMap, p: FinMap, v: FinMap) -> Result<Poly, InputError> {
        if u.src() != p.src() || p.tgt != v.src() {
            return Err(InputError::Endpoints("need u: E → I, p: E → B, v: B → J".into()));
        }
        Ok(Poly { u, p, v })
    }

    pub fn source(&self) -> usize {
        self.u.tgt
    }

    pub fn target(&self) -> usize {
        self.v.tgt
    }

    /// The identity polynomial on `n`.
    pub fn identity(n: usize) -> Poly {
        Poly { u: FinMap::identity(n), p: FinMap::identity(n), v: FinMap::identity(n) }
    }

    /// `u*X` as a set over `E`, with its projection to `X`.
    fn restrict(&self, x: &FinMap) -> (FinMap, FinMap) {
        let pb = FinSet::new(1).pullback(x, &self.u).expect("x lies over I");
        (pb.p2, pb.p1)
    }

    /// `P(X) = Σ_v Π_p u*X` for `x: X → I`. Elements are the pairs `(b, s)`
    /// with `s` a choice of an element of `X` over `u(e)` for each `e` over `b`.
    pub fn eval(&self, x: &FinMap) -> FinMap {
        let (over_e, _) = self.restrict(x);
        let secs = sections(&self.p, &over_e);
        FinMap::new(self.target(), secs.iter().map(|(b, _)| self.v.apply(*b)).collect())
    }

    /// `P(h): P(X) → P(Y)` for `h: X → Y` over `I`.
    pub fn eval_map(&self, x: &FinMap, y: &FinMap, h: &FinMap) -> FinMap {
        let (xe, xp) = self.restrict(x);
        let (ye, yp) = self.restrict(y);
        let find = |e: u32, el: u32| -> u32 {
            (0..ye.src() as u32).find(|&k| ye.apply(k) == e && yp.apply(k) == el).expect("h lies over I")
        };
        let xs = sections(&self.p, &xe);
        let ys = sections(&self.p, &ye);
        let index: BTreeMap<&(u32, Vec<u32>), u32> = ys.iter().enumerate().map(|(k, s)| (s, k as u32)).collect();
        let map = xs
            .iter()
            .map(|(b, s)| {
                let moved: Vec<u32> = s.iter().map(|&k| find(xe.apply(k), h.apply(xp.apply(k)))).collect();
                index[&(*b, moved)]
            })
            .collect();
        FinMap::new(ys.len(), map)
    }
}

/// `Q ∘ P` for `P: I → J` and `Q: J → K`, built from two pullbacks, the
/// distributivity law for `Π_q Σ`, a third pullback, and the composites of
/// the resulting base changes, products and sums.
pub fn compose_polynomials(pp: &Poly, qq: &Poly) -> Result<Poly, InputError> {
    if pp.target() != qq.source() {
        return Err(InputError::Endpoints(format!(
            "first polynomial lands in {} elements, second starts from {}",
            pp.target(),
            qq.source()
        )));
    }
    let s = FinSet::new(1);
    let (u, p, t) = (&pp.u, &pp.p, &pp.v);
    let (uq, q, v) = (&qq.u, &qq.p, &qq.v);
    // A' = A ×_J F and E' = E ×_A A'.
    let a1 = s.pullback(t, uq).expect("common codomain");
    let t1 = &a1.p2;
    let e1 = s.pullback(p, &a1.p1).expect("common codomain");
    let p1 = &e1.p2;
    // D = Π_q(A', t') with C = F ×_B D and evaluation C → A'.
    let d = s.internal_product(q, t1).expect("every map of finite sets is a fibration");
    // R = E' ×_{A'} C.
    let r = s.pullback(p1, &d.eval).expect("common codomain");
    Poly::new(
        u.after(&e1.p1).after(&r.p1),
        d.cone.p2.after(&r.p2),
        v.after(&d.structure),
    )
}

/// All sets over `n` with at most `max` elements, up to isomorphism: the
/// maps `k → n` that are non-decreasing.
pub fn families_upto(n: usize, max: usize) -> Vec<FinMap> {
    (0..=max)
        .flat_map(|k| all_maps(k, n))
        .filter(|m| m.map.windows(2).all(|w| w[0] <= w[1]))
        .collect()
}

/// Compares `r` with `Q(P(−))` on every set over `I` with at most `bound`
/// elements: fiber cardinalities over `K` and an explicit bijection over `K`.
pub fn verify_composite(pp: &Poly, qq: &Poly, r: &Poly, bound: usize) -> VerificationReport {
    let s = FinSet::new(1);
    let mut rep = VerificationReport::new();
    rep.timed("endpoints", || {
        (r.source() != pp.source() || r.target() != qq.target())
            .then(|| json!({"composite": [r.source(), r.target()], "expected": [pp.source(), qq.target()]}))
    });
    rep.timed("extensional", || {
        families_upto(pp.source(), bound).into_iter().find_map(|x| {
            let direct = r.eval(&x);
            let staged = qq.eval(&pp.eval(&x));
            let sizes = |m: &FinMap| (0..m.tgt as u32).map(|k| m.fiber(k).len()).collect::<Vec<_>>();
            let witness = || json!({"input": x.map, "composite": sizes(&direct), "staged": sizes(&staged)});
            if sizes(&direct) != sizes(&staged) {
                return Some(witness());
            }
            match s.iso_over(&direct, &staged) {
                Some(h) if h.is_bijective() && staged.after(&h) == direct => None,
                _ => Some(witness()),
            }
        })
    });
    rep
}

/// A polynomial `I → J` with `|E|, |B| ≤ max_eb`.
pub fn random_poly(rng: &mut impl Rng, i: usize, j: usize, max_eb: usize) -> Poly {
    let nb = rng.random_range(1..=max_eb);
    let ne = rng.random_range(0..=max_eb);
    let draw = |rng: &mut dyn rand::RngCore, n: usize, m: usize| {
        FinMap::new(m, (0..n).map(|_| rng.random_range(0..m as u32)).collect())
    };
    let u = draw(rng, ne, i);
    let p = draw(rng, ne, nb);
    let v = draw(rng, nb, j);
    Poly { u, p, v }
}

/// `count` composable pairs drawn from `seed`, over bases of sizes between
/// one and three.
pub fn seeded_pairs(seed: u64, count: usize, max_eb: usize) -> Vec<(Poly, Poly)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (i, j, k) = (rng.random_range(1..=3), rng.random_range(1..=3), rng.random_range(1..=3));
            let pp = random_poly(&mut rng, i, j, max_eb);
            let qq = random_poly(&mut rng, j, k, max_eb);
            (pp, qq)
        })
        .collect()
}

/// Named evaluation: elements of `P(X)` are written `b{e=x,…}`.
pub fn eval_polynomial(span: &PolynomialSpan, x: &Family) -> Result<Family, InputError> {
    let poly = span.compile()?;
    let xm = x.compile(&span.i)?;
    let (over_e, proj) = poly.restrict(&xm);
    let secs = sections(&poly.p, &over_e);
    let mut elements = Vec::new();
    let mut over = BTreeMap::new();
    for (b, s) in &secs {
        let fib = poly.p.fiber(*b);
        let parts: Vec<String> = fib
            .iter()
            .zip(s)
            .map(|(&e, &k)| format!("{}={}", span.e[e as usize], x.elements[proj.apply(k) as usize]))
            .collect();
        let name = format!("{}{{{}}}", span.b[*b as usize], parts.join(","));
        over.insert(name.clone(), span.j[poly.v.apply(*b) as usize].clone());
        elements.push(name);
    }
    Ok(Family { elements, over })
}

/// Named composition; the composite keeps the outer bases' names.
pub fn compose_spans(pp: &PolynomialSpan, qq: &PolynomialSpan) -> Result<PolynomialSpan, InputError> {
    if pp.j != qq.i {
        return Err(InputError::Endpoints("the first span's J differs from the second span's I".into()));
    }
    let r = compose_polynomials(&pp.compile()?, &qq.compile()?)?;
    Ok(PolynomialSpan::from_poly(&r, pp.i.clone(), qq.j.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Poly {
        // X²: one b with two e's.
        Poly::new(FinMap::new(1, vec![0, 0]), FinMap::new(1, vec![0, 0]), FinMap::new(1, vec![0])).unwrap()
    }

    fn succ() -> Poly {
        // X + 1: b0 with one e, b1 with none.
        Poly::new(FinMap::new(1, vec![0]), FinMap::new(2, vec![0]), FinMap::new(1, vec![0, 0])).unwrap()
    }

    fn size(m: &FinMap) -> usize {
        m.src()
    }

    #[test]
    fn square_of_three_is_nine() {
        assert_eq!(size(&square().eval(&FinMap::new(1, vec![0; 3]))), 9);
    }

    #[test]
    fn empty_input_to_square_plus_one() {
        // X² + 1.
        let q = Poly::new(FinMap::new(1, vec![0, 0]), FinMap::new(2, vec![0, 0]), FinMap::new(1, vec![0, 0])).unwrap();
        assert_eq!(size(&q.eval(&FinMap::new(1, vec![]))), 1);
        assert_eq!(size(&q.eval(&FinMap::new(1, vec![0, 0]))), 5);
    }

    #[test]
    fn square_then_successor() {
        let r = compose_polynomials(&square(), &succ()).unwrap();
        let sizes: Vec<usize> = (0..4).map(|n| size(&r.eval(&FinMap::new(1, vec![0; n])))).collect();
        assert_eq!(sizes, vec![1, 2, 5, 10]);
        assert!(verify_composite(&square(), &succ(), &r, 4).all_pass());
    }

    #[test]
    fn identity_and_constant_composites() {
        let p = succ();
        let r = compose_polynomials(&p, &Poly::identity(1)).unwrap();
        assert!(verify_composite(&p, &Poly::identity(1), &r, 4).all_pass());
        let r = compose_polynomials(&Poly::identity(1), &p).unwrap();
        assert!(verify_composite(&Poly::identity(1), &p, &r, 4).all_pass());
        // The constant 2: two b's, no e's.
        let two = Poly::new(FinMap::new(1, vec![]), FinMap::new(2, vec![]), FinMap::new(1, vec![0, 0])).unwrap();
        let r = compose_polynomials(&square(), &two).unwrap();
        for n in 0..4 {
            assert_eq!(size(&r.eval(&FinMap::new(1, vec![0; n]))), 2);
        }
        let r = compose_polynomials(&two, &square()).unwrap();
        assert_eq!(size(&r.eval(&FinMap::new(1, vec![]))), 4);
    }

    #[test]
    fn a_wrong_composite_is_caught() {
        // X² in place of X² + 1.
        assert!(!verify_composite(&square(), &succ(), &square(), 3).all_pass());
    }

    #[test]
    fn seeded_pairs_compose() {
        let pairs = seeded_pairs(7, 12, 3);
        assert_eq!(pairs, seeded_pairs(7, 12, 3));
        for (p, q) in &pairs {
            let r = compose_polynomials(p, q).unwrap();
            let rep = verify_composite(p, q, &r, 3);
            assert!(rep.all_pass(), "{p:?} {q:?} {:?}", rep.failures().next());
        }
    }

    #[test]
    fn eval_map_is_functorial() {
        let p = Poly::new(FinMap::new(2, vec![0, 1, 1]), FinMap::new(2, vec![0, 0, 1]), FinMap::new(1, vec![0, 0])).unwrap();
        let x = FinMap::new(2, vec![0, 1, 1]);
        let y = FinMap::new(2, vec![0, 0, 1, 1]);
        let h = FinMap::new(4, vec![1, 2, 3]);
        let px = p.eval(&x);
        assert_eq!(p.eval_map(&x, &x, &FinMap::identity(3)), FinMap::identity(px.src()));
        let ph = p.eval_map(&x, &y, &h);
        assert_eq!(p.eval(&y).after(&ph), px);
        let g = FinMap::new(4, vec![1, 0, 3, 2]);
        let pg = p.eval_map(&y, &y, &g);
        assert_eq!(p.eval_map(&x, &y, &g.after(&h)), pg.after(&ph));
    }

    #[test]
    fn named_round_trip() {
        let text = r#"{"I":["*"],"E":["l","r"],"B":["pair"],"J":["*"],
            "u":{"l":"*","r":"*"},"p":{"l":"pair","r":"pair"},"v":{"pair":"*"}}"#;
        let span = PolynomialSpan::from_json(text).unwrap();
        assert_eq!(span.compile().unwrap(), square());
        let x = Family { elements: vec!["a".into(), "b".into()], over: [("a", "*"), ("b", "*")].iter().map(|(k, v)| (k.to_string(), v.to_string())).collect() };
        let out = eval_polynomial(&span, &x).unwrap();
        assert_eq!(out.elements, vec!["pair{l=a,r=a}", "pair{l=a,r=b}", "pair{l=b,r=a}", "pair{l=b,r=b}"]);
        let composite = compose_spans(&span, &span).unwrap();
        assert_eq!(composite.i, span.i);
        let back = PolynomialSpan::from_json(&serde_json::to_string(&composite).unwrap()).unwrap();
        assert_eq!(back, composite);
        let mut broken = span.clone();
        broken.u.remove("l");
        assert!(broken.compile().is_err());
    }
}
