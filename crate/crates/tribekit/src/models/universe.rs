//! Deterministic generation of finite working sets of groupoids.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::clan::{materialize, Clan};
use crate::fincat::{Category, CategoryPresentation, InputError};
use crate::models::fingpd::{FinGpd, Gpd};
use crate::models::gpd::{arrow_groupoid, functors, groupoid_iso, pullback, Group, Groupoid};
use crate::pi::{law_instances, verify_law, verify_pi_tribe, Law, PiSuiteOptions};
use crate::report::{Check, VerificationReport};
use crate::sample::sample;
use crate::tribe::verify_fibration_category;

/// How a seed groupoid is built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builder {
    Discrete(usize),
    /// One isomorphism between any two objects; `codiscrete(2)` is the
    /// walking isomorphism.
    Codiscrete(usize),
    /// One object with the cyclic group of the given order.
    Cyclic(usize),
    /// Product of two earlier seeds, by name.
    Product(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seed {
    pub name: String,
    pub build: Builder,
}

/// A named functor `src → tgt`: the `index`-th one in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedMap {
    pub name: String,
    pub src: String,
    pub tgt: String,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    Product,
    /// `A ↦ A^I`.
    Path,
    /// Pullbacks of isofibrations along arbitrary functors.
    Pullback,
}

/// What happens when closure would exceed `max_objects`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overflow {
    #[default]
    Refuse,
    /// Stop at the cap, keeping the first members found.
    Truncate,
}

fn default_true() -> bool {
    true
}

fn default_max_objects() -> usize {
    32
}

fn default_gpd_objects() -> usize {
    4
}

fn default_gpd_morphisms() -> usize {
    6
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniverseSpec {
    pub seeds: Vec<Seed>,
    #[serde(default)]
    pub closure: Vec<Closure>,
    /// Cap on the number of members.
    #[serde(default = "default_max_objects")]
    pub max_objects: usize,
    /// Constructed groupoids larger than this are not added.
    #[serde(default = "default_gpd_objects")]
    pub max_groupoid_objects: usize,
    #[serde(default = "default_gpd_morphisms")]
    pub max_groupoid_morphisms: usize,
    #[serde(default = "default_true")]
    pub include_empty: bool,
    #[serde(default)]
    pub overflow: Overflow,
    #[serde(default)]
    pub maps: Vec<NamedMap>,
}

impl UniverseSpec {
    pub fn new(seeds: Vec<Seed>, closure: Vec<Closure>) -> Self {
        UniverseSpec {
            seeds,
            closure,
            max_objects: default_max_objects(),
            max_groupoid_objects: default_gpd_objects(),
            max_groupoid_morphisms: default_gpd_morphisms(),
            include_empty: true,
            overflow: Overflow::Refuse,
            maps: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, InputError> {
        serde_json::from_str(text).map_err(|e| InputError::Other(format!("universe spec: {e}")))
    }

    /// The standard seeds `1, I, d2, BZ2` closed under products, path
    /// objects and pullbacks, with the empty groupoid.
    pub fn standard() -> Self {
        let seed = |name: &str, build| Seed { name: name.into(), build };
        UniverseSpec::new(
            vec![
                seed("1", Builder::Discrete(1)),
                seed("I", Builder::Codiscrete(2)),
                seed("d2", Builder::Discrete(2)),
                seed("BZ2", Builder::Cyclic(2)),
            ],
            vec![Closure::Product, Closure::Path, Closure::Pullback],
        )
    }
}

/// A generated working set: members in generation order with their names.
#[derive(Debug, Clone)]
pub struct Universe {
    pub members: Vec<(String, Gpd)>,
    pub maps: Vec<NamedMap>,
}

impl Universe {
    pub fn model(&self) -> FinGpd {
        FinGpd::new(self.members.clone())
    }

    pub fn names(&self) -> Vec<&str> {
        self.members.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Gpd> {
        self.members.iter().find(|(n, _)| n == name).map(|(_, g)| g)
    }

    /// The working set as a presented clan.
    pub fn to_presentation(&self, max_morphisms: usize) -> Result<CategoryPresentation, InputError> {
        let (cs, _, _) = materialize(&self.model(), max_morphisms)?;
        Ok(cs.to_presentation())
    }
}

struct Generator<'a> {
    spec: &'a UniverseSpec,
    members: Vec<(String, Gpd)>,
    full: bool,
}

impl Generator<'_> {
    fn fits(&self, g: &Groupoid) -> bool {
        g.num_objects() <= self.spec.max_groupoid_objects && g.num_morphisms() <= self.spec.max_groupoid_morphisms
    }

    fn known(&self, g: &Gpd) -> bool {
        self.members.iter().any(|(_, m)| groupoid_iso(m, g).is_some())
    }

    fn unique_name(&self, base: String) -> String {
        let mut name = base;
        while self.members.iter().any(|(n, _)| *n == name) {
            name.push('\'');
        }
        name
    }

    /// Adds `g` unless an isomorphic member exists. Returns whether it was added.
    fn offer(&mut self, name: String, g: Gpd, operation: &str) -> Result<bool, InputError> {
        if self.full || !self.fits(&g) || self.known(&g) {
            return Ok(false);
        }
        if self.members.len() >= self.spec.max_objects {
            return match self.spec.overflow {
                Overflow::Truncate => {
                    self.full = true;
                    Ok(false)
                }
                Overflow::Refuse => Err(InputError::TooLarge {
                    what: format!("universe (closure by {operation} producing {name})"),
                    size: self.members.len() + 1,
                    cap: self.spec.max_objects,
                }),
            };
        }
        let name = self.unique_name(name);
        self.members.push((name, g));
        Ok(true)
    }
}

fn build_seed(b: &Builder, built: &HashMap<String, Gpd>) -> Result<Groupoid, InputError> {
    Ok(match b {
        Builder::Discrete(n) => Groupoid::discrete(*n),
        Builder::Codiscrete(n) => Groupoid::codiscrete(*n),
        Builder::Cyclic(k) => {
            if *k == 0 {
                return Err(InputError::Other("cyclic group of order 0".into()));
            }
            Groupoid::delooping(Group::cyclic(*k))
        }
        Builder::Product(a, b) => {
            let get = |n: &String| built.get(n).cloned().ok_or_else(|| InputError::Unknown(n.clone()));
            let (x, y) = (get(a)?, get(b)?);
            let pt = Arc::new(Groupoid::discrete(1));
            let c = pullback(
                &crate::models::gpd::GFunctor::to_point(&x, &pt),
                &crate::models::gpd::GFunctor::to_point(&y, &pt),
            );
            (*c.apex).clone()
        }
    })
}

/// Sizes of the fibers of `f` over each object and each morphism, which
/// determine the size of any strict pullback along `f`.
fn fiber_counts(f: &crate::models::gpd::GFunctor) -> (Vec<usize>, Vec<usize>) {
    let mut ob = vec![0; f.tgt.num_objects()];
    let mut mor = vec![0; f.tgt.num_morphisms()];
    for &y in &f.ob {
        ob[y as usize] += 1;
    }
    for &m in &f.mor {
        mor[m as usize] += 1;
    }
    (ob, mor)
}

/// Breadth-first closure of the seeds under the requested operations. Each
/// round applies the operations in the order given to all current members
/// (pairs in lexicographic order); new groupoids are kept when no isomorphic
/// member exists and they fit the per-groupoid bounds. Stops at a fixed point.
pub fn generate_universe(spec: &UniverseSpec) -> Result<Universe, InputError> {
    let mut gen = Generator { spec, members: Vec::new(), full: false };
    let mut built: HashMap<String, Gpd> = HashMap::new();
    if spec.include_empty {
        gen.offer("0".into(), Arc::new(Groupoid::empty()), "seed")?;
    }
    for s in &spec.seeds {
        let g = Arc::new(build_seed(&s.build, &built)?);
        if built.insert(s.name.clone(), g.clone()).is_some() {
            return Err(InputError::Duplicate(s.name.clone()));
        }
        if !gen.fits(&g) {
            return Err(InputError::TooLarge {
                what: format!("seed {}", s.name),
                size: g.num_objects().max(g.num_morphisms()),
                cap: spec.max_groupoid_objects.min(spec.max_groupoid_morphisms),
            });
        }
        gen.offer(s.name.clone(), g, "seed")?;
    }
    let point = Arc::new(Groupoid::discrete(1));
    let to_pt = |g: &Gpd| crate::models::gpd::GFunctor::to_point(g, &point);
    loop {
        let before = gen.members.len();
        for op in &spec.closure {
            let current = gen.members.clone();
            match op {
                Closure::Product => {
                    for i in 0..current.len() {
                        for j in i..current.len() {
                            let (na, a) = &current[i];
                            let (nb, b) = &current[j];
                            if a.num_objects() * b.num_objects() > spec.max_groupoid_objects
                                || a.num_morphisms() * b.num_morphisms() > spec.max_groupoid_morphisms
                            {
                                continue;
                            }
                            let c = pullback(&to_pt(a), &to_pt(b));
                            gen.offer(format!("({na}x{nb})"), c.apex, "product")?;
                        }
                    }
                }
                Closure::Path => {
                    for (na, a) in &current {
                        if a.num_morphisms() > spec.max_groupoid_objects {
                            continue;
                        }
                        gen.offer(format!("{na}^I"), arrow_groupoid(a).gpd, "path")?;
                    }
                }
                Closure::Pullback => {
                    for (nz, z) in &current {
                        let maps: Vec<(usize, Vec<_>)> = current
                            .iter()
                            .enumerate()
                            .map(|(k, (_, x))| (k, functors(x, z, None)))
                            .collect();
                        let counts: Vec<Vec<(Vec<usize>, Vec<usize>)>> =
                                maps.iter().map(|(_, fs)| fs.iter().map(|f| fiber_counts(f)).collect()).collect();
                        for (i, fs) in &maps {
                            for (fi, f) in fs.iter().enumerate().filter(|(_, f)| f.is_isofibration()) {
                                let cf = &counts[*i][fi];
                                for (j, gs) in &maps {
                                    for (gi, g) in gs.iter().enumerate() {
                                        let cg = &counts[*j][gi];
                                        let dot = |a: &[usize], b: &[usize]| a.iter().zip(b).map(|(x, y)| x * y).sum::<usize>();
                                        if dot(&cf.0, &cg.0) > spec.max_groupoid_objects
                                            || dot(&cf.1, &cg.1) > spec.max_groupoid_morphisms
                                        {
                                            continue;
                                        }
                                        let c = pullback(f, g);
                                        let name = format!("({}x_{nz}{})", current[*i].0, current[*j].0);
                                        gen.offer(name, c.apex, "pullback")?;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        if gen.members.len() == before || gen.full {
            break;
        }
    }
    for m in &spec.maps {
        let get = |n: &String| {
            gen.members.iter().find(|(k, _)| k == n).map(|(_, g)| g.clone()).ok_or_else(|| InputError::Unknown(n.clone()))
        };
        let (a, b) = (get(&m.src)?, get(&m.tgt)?);
        if functors(&a, &b, None).len() <= m.index {
            return Err(InputError::Unknown(format!("map {} (index {} out of range)", m.name, m.index)));
        }
    }
    Ok(Universe { members: gen.members, maps: spec.maps.clone() })
}

/// Bounds for [`check_universe`].
#[derive(Debug, Clone)]
pub struct UniverseChecks {
    pub laws: Vec<Law>,
    /// Instances per law, and pairs per sampled π-tribe check.
    pub cap: usize,
    pub seed: Option<u64>,
}

/// The tribe, fibration-category and π-tribe suites on the model of `u`,
/// then each requested law on up to `cap` instances from the working set.
pub fn check_universe(u: &Universe, opts: &UniverseChecks) -> VerificationReport {
    let t = u.model();
    let mut r = VerificationReport::new();
    let pi_opts = PiSuiteOptions { max_pairs: opts.cap, max_anodyne: opts.cap, closed_probes: None, seed: opts.seed };
    r.extend_prefixed("pi_tribe", verify_pi_tribe(&t, &pi_opts));
    r.extend_prefixed("fibration_category", verify_fibration_category(&t));
    for law in &opts.laws {
        let all = law_instances(&t, *law, usize::MAX);
        for (k, inst) in sample(&all, opts.cap, opts.seed).iter().enumerate() {
            let prefix = format!("law/{}/{k}", law.name());
            match verify_law(&t, inst) {
                Ok(rep) => r.extend_prefixed(&prefix, rep),
                Err(e) => r.push(Check::fail(prefix, serde_json::json!({"error": e.to_string()}))),
            }
        }
    }
    r
}

/// Resolves a named map of the universe in its model.
pub fn named_map(u: &Universe, t: &FinGpd, name: &str) -> Option<<FinGpd as Category>::Mor> {
    let m = u.maps.iter().find(|m| m.name == name)?;
    t.functor(u.get(&m.src)?, u.get(&m.tgt)?, m.index)
}

/// Whether the members are pairwise non-isomorphic and include a terminal.
pub fn is_skeletal(u: &Universe) -> bool {
    let t = u.model();
    let ms: Vec<&Gpd> = u.members.iter().map(|(_, g)| g).collect();
    let distinct = (0..ms.len()).all(|i| (i + 1..ms.len()).all(|j| groupoid_iso(ms[i], ms[j]).is_none()));
    distinct && t.objects().contains(&t.terminal())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_under_products_is_itself() {
        let mut spec = UniverseSpec::new(
            vec![Seed { name: "1".into(), build: Builder::Discrete(1) }],
            vec![Closure::Product],
        );
        spec.include_empty = false;
        let u = generate_universe(&spec).unwrap();
        assert_eq!(u.names(), vec!["1"]);
        spec.include_empty = true;
        let u = generate_universe(&spec).unwrap();
        assert_eq!(u.names(), vec!["0", "1"]);
    }

    #[test]
    fn generation_is_deterministic_and_skeletal() {
        let spec = UniverseSpec::standard();
        let a = generate_universe(&spec).unwrap();
        let b = generate_universe(&spec).unwrap();
        assert_eq!(a.names(), b.names());
        assert!(a.members.iter().zip(&b.members).all(|(x, y)| x.1 == y.1));
        assert!(a.members.len() <= spec.max_objects);
        assert!(is_skeletal(&a));
    }

    #[test]
    fn refusal_names_the_operation() {
        let mut spec = UniverseSpec::standard();
        spec.max_objects = 6;
        let err = generate_universe(&spec).unwrap_err().to_string();
        assert!(err.contains("closure by"), "{err}");
        spec.overflow = Overflow::Truncate;
        assert_eq!(generate_universe(&spec).unwrap().members.len(), 6);
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = UniverseSpec::standard();
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(UniverseSpec::from_json(&text).unwrap(), spec);
        let short = r#"{"seeds": [{"name": "I", "build": {"codiscrete": 2}}]}"#;
        let s = UniverseSpec::from_json(short).unwrap();
        assert_eq!(s.max_objects, 32);
        assert!(s.include_empty);
    }
}
