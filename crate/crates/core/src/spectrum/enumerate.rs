//! Primitive conjugacy classes up to a length cutoff.
//!
//! Outline:
//! 1. Build the Dirichlet polygon P at the base point i from short words and
//!    take its covering radius rho. When the genus is known, P is certified to
//!    be the Dirichlet domain by comparing its area with 4 pi (g - 1).
//! 2. Collect all group elements moving i by at most cutoff + 3 rho, by
//!    breadth-first search over the side pairings of P. A path from i to g(i)
//!    crosses a chain of tiles, each within rho of the path, so nothing
//!    inside the ball is missed.
//! 3. Every class of length <= cutoff has a representative whose axis passes
//!    within rho of i; those representatives are the candidates. Two
//!    candidates of one class are conjugate by an element moving i by at most
//!    2 rho + cutoff / 2, which also lies in the ball.
//! 4. Each candidate gets a canonical word by greedy descent through the side
//!    pairings; class lengths are recomputed from the minimal word, so the
//!    output does not depend on search order or thread count.

use std::collections::HashMap;
use std::f64::consts::PI;

use log::{debug, warn};
use rayon::prelude::*;

use super::{LengthSpectrum, PrimitiveGeodesic, Word};
use crate::error::{Error, Result};
use crate::moebius::{ElementClass, MoebiusElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MultiplicityConvention {
    /// gamma and gamma^-1 count as one closed geodesic.
    #[default]
    Unoriented,
    /// gamma and gamma^-1 are counted separately.
    Oriented,
}

#[derive(Debug, Clone)]
pub struct EnumerationConfig {
    /// Maximum number of group elements to visit.
    pub budget: f64,
    pub convention: MultiplicityConvention,
    /// Genus of the quotient; used to certify the fundamental domain.
    pub genus: Option<u32>,
    /// Longest generator word used while building the Dirichlet polygon.
    pub max_polygon_word_length: usize,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        Self { budget: 1e8, convention: MultiplicityConvention::Unoriented, genus: None, max_polygon_word_length: 6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationStats {
    pub covering_radius: f64,
    /// True when the polygon area matched the genus.
    pub domain_certified: bool,
    pub side_pairings: usize,
    pub ball_radius: f64,
    pub ball_elements: usize,
    pub candidates: usize,
    pub classes: usize,
}

const KEY_GRID: f64 = 1e-6;
const AXIS_MARGIN: f64 = 1e-3;
const PHASE1_CAP: usize = 250_000;

fn match_tol(g: &MoebiusElement) -> f64 {
    1e-8 * g.max_abs_entry().max(1.0)
}

/// Lookup of group elements modulo sign and rounding noise.
struct ElementIndex {
    elems: Vec<MoebiusElement>,
    bins: HashMap<(i64, i64), Vec<usize>>,
}

impl ElementIndex {
    fn new() -> Self {
        Self { elems: Vec::new(), bins: HashMap::new() }
    }

    fn key(a: f64, d: f64) -> (i64, i64) {
        ((a / KEY_GRID).round() as i64, (d / KEY_GRID).round() as i64)
    }

    fn find(&self, g: &MoebiusElement) -> Option<usize> {
        let tol = match_tol(g);
        let mut probes = vec![Self::key(g.a(), g.d())];
        if g.a().abs() < 2.0 * KEY_GRID {
            probes.push(Self::key(-g.a(), -g.d()));
        }
        for (ka, kd) in probes {
            for da in -1..=1 {
                for dd in -1..=1 {
                    if let Some(bin) = self.bins.get(&(ka + da, kd + dd)) {
                        if let Some(&i) = bin.iter().find(|&&i| self.elems[i].approx_eq(g, tol)) {
                            return Some(i);
                        }
                    }
                }
            }
        }
        None
    }

    /// Returns the index and whether the element was new.
    fn insert(&mut self, g: MoebiusElement) -> (usize, bool) {
        if let Some(i) = self.find(&g) {
            return (i, false);
        }
        let i = self.elems.len();
        self.bins.entry(Self::key(g.a(), g.d())).or_default().push(i);
        self.elems.push(g);
        (i, true)
    }

    fn len(&self) -> usize {
        self.elems.len()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx != ry {
            let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
            self.parent[hi] = lo;
        }
    }
}

/// Free reduction of a word.
fn reduce_word(word: &[i32]) -> Word {
    let mut out: Word = Vec::with_capacity(word.len());
    for &x in word {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

fn invert_word(word: &[i32]) -> Word {
    word.iter().rev().map(|x| -x).collect()
}

struct Alphabet {
    gens: Vec<MoebiusElement>,
    invs: Vec<MoebiusElement>,
}

impl Alphabet {
    fn new(gens: &[MoebiusElement]) -> Self {
        Self { gens: gens.to_vec(), invs: gens.iter().map(|g| g.inverse()).collect() }
    }

    fn letter(&self, x: i32) -> &MoebiusElement {
        let i = (x.unsigned_abs() - 1) as usize;
        if x > 0 {
            &self.gens[i]
        } else {
            &self.invs[i]
        }
    }

    fn letters(&self) -> Vec<i32> {
        (1..=self.gens.len() as i32).flat_map(|i| [i, -i]).collect()
    }

    /// Left-to-right product of the word's letters.
    fn evaluate(&self, word: &[i32]) -> MoebiusElement {
        word.iter().fold(MoebiusElement::identity(), |acc, &x| acc.compose(self.letter(x)))
    }
}

// ---------------------------------------------------------------------------
// Dirichlet polygon in the Klein model

#[derive(Clone, Copy, Debug)]
struct Vertex {
    p: [f64; 2],
    /// Label of the edge from this vertex to the next one.
    edge: Option<usize>,
}

struct Polygon {
    verts: Vec<Vertex>,
}

fn klein_distance_cosh(x: [f64; 2], y: [f64; 2]) -> f64 {
    let xy = x[0] * y[0] + x[1] * y[1];
    let xx = x[0] * x[0] + x[1] * x[1];
    let yy = y[0] * y[0] + y[1] * y[1];
    ((1.0 - xy) / ((1.0 - xx) * (1.0 - yy)).sqrt()).max(1.0)
}

impl Polygon {
    fn square() -> Self {
        let c = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]];
        Self { verts: c.iter().map(|&p| Vertex { p, edge: None }).collect() }
    }

    /// Clips by {x : x . u <= t}, labelling the new edge.
    fn clip(&mut self, u: [f64; 2], t: f64, label: usize) {
        let n = self.verts.len();
        if n == 0 {
            return;
        }
        let side = |p: [f64; 2]| p[0] * u[0] + p[1] * u[1] - t;
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            let cur = self.verts[i];
            let nxt = self.verts[(i + 1) % n];
            let (sc, sn) = (side(cur.p), side(nxt.p));
            let cross = |a: [f64; 2], b: [f64; 2], sa: f64, sb: f64| {
                let lam = sa / (sa - sb);
                [a[0] + lam * (b[0] - a[0]), a[1] + lam * (b[1] - a[1])]
            };
            match (sc <= 0.0, sn <= 0.0) {
                (true, true) => out.push(cur),
                (true, false) => {
                    out.push(cur);
                    out.push(Vertex { p: cross(cur.p, nxt.p, sc, sn), edge: Some(label) });
                }
                (false, true) => out.push(Vertex { p: cross(cur.p, nxt.p, sc, sn), edge: cur.edge }),
                (false, false) => {}
            }
        }
        self.verts = out;
        self.dedup();
    }

    fn dedup(&mut self) {
        const TOL: f64 = 1e-10;
        let mut i = 0;
        while self.verts.len() > 2 && i < self.verts.len() {
            let n = self.verts.len();
            let j = (i + 1) % n;
            let (a, b) = (self.verts[i].p, self.verts[j].p);
            if (a[0] - b[0]).hypot(a[1] - b[1]) < TOL {
                self.verts[i].edge = self.verts[j].edge;
                self.verts.remove(j);
                if j < i {
                    i -= 1;
                }
            } else {
                i += 1;
            }
        }
    }

    fn max_radius(&self) -> f64 {
        self.verts.iter().map(|v| v.p[0].hypot(v.p[1])).fold(0.0, f64::max)
    }

    fn is_bounded(&self) -> bool {
        self.verts.len() >= 3 && self.max_radius() < 1.0 - 1e-12 && self.verts.iter().all(|v| v.edge.is_some())
    }

    /// Hyperbolic covering radius from the centre.
    fn covering_radius(&self) -> f64 {
        self.max_radius().atanh()
    }

    /// Gauss-Bonnet area (n - 2) pi - sum of interior angles.
    fn area(&self) -> f64 {
        let n = self.verts.len();
        let mut angle_sum = 0.0;
        for i in 0..n {
            let a = self.verts[(i + n - 1) % n].p;
            let b = self.verts[i].p;
            let c = self.verts[(i + 1) % n].p;
            let ch_a = klein_distance_cosh(b, c);
            let ch_c = klein_distance_cosh(a, b);
            let ch_b = klein_distance_cosh(a, c);
            let sh_a = (ch_a * ch_a - 1.0).sqrt();
            let sh_c = (ch_c * ch_c - 1.0).sqrt();
            let cos_b = ((ch_a * ch_c - ch_b) / (sh_a * sh_c)).clamp(-1.0, 1.0);
            angle_sum += cos_b.acos();
        }
        (n as f64 - 2.0) * PI - angle_sum
    }

    /// Labels of edges with positive length.
    fn edge_labels(&self) -> Vec<usize> {
        let mut labels: Vec<usize> = self.verts.iter().filter_map(|v| v.edge).collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }
}

/// Klein-model half plane {x . u <= tanh(d/2)} bounding the Dirichlet region against g(i).
fn bisector(g: &MoebiusElement) -> Option<([f64; 2], f64)> {
    let z = g.apply(num_complex::Complex64::new(0.0, 1.0));
    let i = num_complex::Complex64::new(0.0, 1.0);
    let w = (z - i) / (z + i);
    let r = w.norm();
    if r < 1e-14 {
        return None;
    }
    let d = g.displacement_at_i();
    Some(([w.re / r, w.im / r], (0.5 * d).tanh()))
}

struct Node {
    g: MoebiusElement,
    word: Word,
}

struct DomainData {
    rho: f64,
    certified: bool,
    steps: Vec<Node>,
}

fn build_domain(alpha: &Alphabet, genus: Option<u32>, max_len: usize) -> Result<DomainData> {
    let letters = alpha.letters();
    let mut index = ElementIndex::new();
    let mut nodes: Vec<Node> = Vec::new();
    index.insert(MoebiusElement::identity());
    nodes.push(Node { g: MoebiusElement::identity(), word: Vec::new() });
    let mut frontier: Vec<usize> = vec![0];
    let mut best: Option<(Polygon, bool)> = None;
    let target_area = genus.map(|g| 4.0 * PI * (g as f64 - 1.0));

    for level in 1..=max_len {
        let produced: Vec<(MoebiusElement, Word)> = frontier
            .par_iter()
            .flat_map_iter(|&i| {
                let node = &nodes[i];
                letters.iter().filter_map(move |&x| {
                    if node.word.last() == Some(&-x) {
                        return None;
                    }
                    let mut w = node.word.clone();
                    w.push(x);
                    Some((node.g.compose(alpha.letter(x)), w))
                })
            })
            .collect();
        let mut next = Vec::new();
        for (g, w) in produced {
            let (i, fresh) = index.insert(g);
            if fresh {
                if g.classify() != ElementClass::Hyperbolic {
                    return Err(Error::NonHyperbolicElementFound { trace: g.abs_trace(), word: w });
                }
                nodes.push(Node { g, word: w });
                next.push(i);
            }
        }
        frontier = next;

        let mut order: Vec<usize> = (1..nodes.len()).collect();
        let disp: Vec<f64> = nodes.iter().map(|n| n.g.displacement_at_i()).collect();
        order.sort_by(|&x, &y| disp[x].total_cmp(&disp[y]).then(x.cmp(&y)));
        let mut poly = Polygon::square();
        for &i in &order {
            if poly.is_bounded() && (0.5 * disp[i]).tanh() > poly.max_radius() {
                break;
            }
            if let Some((u, t)) = bisector(&nodes[i].g) {
                poly.clip(u, t, i);
            }
        }
        let bounded = poly.is_bounded();
        let certified = bounded && target_area.is_some_and(|a| (poly.area() - a).abs() < 1e-6 * a);
        debug!(
            "polygon level {level}: {} elements, {} vertices, bounded {bounded}, certified {certified}",
            nodes.len(),
            poly.verts.len()
        );
        if bounded {
            let stable = best.as_ref().is_some_and(|(prev, _)| (prev.covering_radius() - poly.covering_radius()).abs() < 1e-12);
            best = Some((poly, certified));
            if certified || (target_area.is_none() && stable) {
                break;
            }
        }
        if nodes.len() > PHASE1_CAP || frontier.is_empty() {
            break;
        }
    }

    match best {
        Some((poly, certified)) => {
            if !certified {
                warn!("Dirichlet polygon not certified against the genus; completeness is not guaranteed");
            }
            let mut steps = Vec::new();
            let mut seen = ElementIndex::new();
            for label in poly.edge_labels() {
                let n = &nodes[label];
                for (g, w) in [(n.g, n.word.clone()), (n.g.inverse(), invert_word(&n.word))] {
                    if seen.insert(g).1 {
                        steps.push(Node { g, word: w });
                    }
                }
            }
            if !certified {
                for &x in &letters {
                    let g = *alpha.letter(x);
                    if seen.insert(g).1 {
                        steps.push(Node { g, word: vec![x] });
                    }
                }
            }
            Ok(DomainData { rho: poly.covering_radius(), certified, steps })
        }
        None => {
            warn!("Dirichlet polygon unbounded; group is not cocompact, using generator displacement as radius");
            let rho = alpha.gens.iter().map(|g| g.displacement_at_i()).fold(0.0, f64::max);
            let steps = letters.iter().map(|&x| Node { g: *alpha.letter(x), word: vec![x] }).collect();
            Ok(DomainData { rho, certified: false, steps })
        }
    }
}

/// Canonical word: repeatedly strip the side pairing that brings g(i) closest to i.
fn greedy_word(g: &MoebiusElement, steps: &[Node], step_invs: &[MoebiusElement]) -> Result<Word> {
    let mut cur = *g;
    let mut word: Word = Vec::new();
    let mut guard = 0usize;
    while !cur.approx_eq(&MoebiusElement::identity(), 1e-8) {
        let here = cur.cosh_displacement_at_i();
        let mut best: Option<(usize, f64, MoebiusElement)> = None;
        for (j, inv) in step_invs.iter().enumerate() {
            let h = inv.compose(&cur);
            let v = h.cosh_displacement_at_i();
            let better = match &best {
                None => true,
                Some((_, bv, _)) => v < bv - 1e-10 * bv,
            };
            if better {
                best = Some((j, v, h));
            }
        }
        let (j, v, h) = best.expect("nonempty step set");
        if v >= here * (1.0 - 1e-12) || guard > 100_000 {
            return Err(Error::Domain("greedy descent through side pairings did not terminate".into()));
        }
        word.extend_from_slice(&steps[j].word);
        cur = h;
        guard += 1;
    }
    Ok(reduce_word(&word))
}

struct Candidate {
    g: MoebiusElement,
    word: Word,
    length: f64,
}

fn shortlex(a: &[i32], b: &[i32]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

pub fn enumerate_spectrum(generators: &[MoebiusElement], cutoff: f64) -> Result<LengthSpectrum> {
    enumerate_spectrum_with(generators, cutoff, &EnumerationConfig::default()).map(|(s, _)| s)
}

pub fn enumerate_spectrum_with(
    generators: &[MoebiusElement],
    cutoff: f64,
    config: &EnumerationConfig,
) -> Result<(LengthSpectrum, EnumerationStats)> {
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(Error::Domain(format!("cutoff {cutoff} must be positive")));
    }
    if generators.is_empty() {
        return Err(Error::Domain("no generators".into()));
    }
    for (i, g) in generators.iter().enumerate() {
        if g.classify() != ElementClass::Hyperbolic {
            return Err(Error::NonHyperbolicElementFound { trace: g.abs_trace(), word: vec![i as i32 + 1] });
        }
    }
    let n = generators.len();
    let genus_hint = config.genus.or(if n >= 4 && n % 2 == 0 { Some((n / 2) as u32) } else { None });
    let genus = genus_hint.unwrap_or(2);
    let alpha = Alphabet::new(generators);

    let domain = build_domain(&alpha, genus_hint, config.max_polygon_word_length)?;
    let rho = domain.rho;
    let ball_radius = cutoff + 3.0 * rho + 1e-6;
    let estimate = ((ball_radius.cosh() - 1.0) / (2.0 * (genus as f64 - 1.0).max(1.0))).max(1.0);
    if estimate > config.budget {
        return Err(Error::CutoffTooExpensive { estimate, budget: config.budget });
    }
    debug!("covering radius {rho}, ball radius {ball_radius}, estimated {estimate:.0} elements");

    // Ball of all elements moving i by at most ball_radius.
    let mut ball = ElementIndex::new();
    ball.insert(MoebiusElement::identity());
    let mut frontier = vec![MoebiusElement::identity()];
    while !frontier.is_empty() {
        let produced: Vec<MoebiusElement> = frontier
            .par_iter()
            .flat_map_iter(|g| domain.steps.iter().map(move |s| g.compose(&s.g)))
            .filter(|h| h.displacement_at_i() <= ball_radius)
            .collect();
        let mut next = Vec::new();
        for h in produced {
            if ball.insert(h).1 {
                next.push(h);
                if ball.len() as f64 > config.budget {
                    return Err(Error::CutoffTooExpensive { estimate: ball.len() as f64, budget: config.budget });
                }
            }
        }
        frontier = next;
    }

    let step_invs: Vec<MoebiusElement> = domain.steps.iter().map(|s| s.g.inverse()).collect();
    for g in ball.elems.iter().skip(1) {
        if g.classify() != ElementClass::Hyperbolic {
            let word = greedy_word(g, &domain.steps, &step_invs).unwrap_or_default();
            return Err(Error::NonHyperbolicElementFound { trace: g.abs_trace(), word });
        }
    }

    // Candidates: short elements whose axis passes near i.
    let axis_limit = rho + AXIS_MARGIN;
    let pre: Vec<usize> = (1..ball.len())
        .filter(|&i| {
            let g = &ball.elems[i];
            g.translation_length().is_ok_and(|l| l <= cutoff + 1e-9)
                && g.axis_distance_from_i().is_ok_and(|r| r <= axis_limit + 1e-6)
        })
        .collect();
    let built: Vec<Option<Candidate>> = pre
        .par_iter()
        .map(|&i| -> Result<Option<Candidate>> {
            let word = greedy_word(&ball.elems[i], &domain.steps, &step_invs)?;
            let g = alpha.evaluate(&word);
            let length = g.translation_length()?;
            let r = g.axis_distance_from_i()?;
            Ok((length <= cutoff && r <= axis_limit).then_some(Candidate { g, word, length }))
        })
        .collect::<Result<Vec<_>>>()?;
    let cands: Vec<Candidate> = built.into_iter().flatten().collect();
    if cands.is_empty() {
        let spectrum = LengthSpectrum::empty(genus, cutoff)?;
        let stats = EnumerationStats {
            covering_radius: rho,
            domain_certified: domain.certified,
            side_pairings: domain.steps.len(),
            ball_radius,
            ball_elements: ball.len(),
            candidates: 0,
            classes: 0,
        };
        return Ok((spectrum, stats));
    }

    // Primitivity via hyperbolic roots looked up in the ball.
    let l_min = cands.iter().map(|c| c.length).fold(f64::INFINITY, f64::min);
    let primitive: Vec<bool> = cands
        .par_iter()
        .map(|c| {
            let max_n = (c.length / l_min + 1e-9).floor() as u32;
            (2..=max_n).all(|k| c.g.hyperbolic_root(k).map(|eta| ball.find(&eta).is_none()).unwrap_or(true))
        })
        .collect();
    let prim: Vec<&Candidate> = cands.iter().zip(&primitive).filter(|(_, &p)| p).map(|(c, _)| c).collect();

    let mut prim_index = ElementIndex::new();
    for c in &prim {
        prim_index.insert(c.g);
    }
    // Duplicate words can map to one element only if the index is inconsistent.
    debug_assert_eq!(prim_index.len(), prim.len());

    let conj_radius = 2.0 * axis_limit + 0.5 * cutoff + 1e-3;
    let conjugators: Vec<MoebiusElement> =
        ball.elems.iter().filter(|h| h.displacement_at_i() <= conj_radius).copied().collect();
    let unoriented = config.convention == MultiplicityConvention::Unoriented;
    let links: Vec<Vec<usize>> = prim
        .par_iter()
        .map(|c| {
            let mut out: Vec<usize> = conjugators
                .iter()
                .filter_map(|h| prim_index.find(&c.g.conjugate_by(h)))
                .collect();
            if unoriented {
                if let Some(j) = prim_index.find(&c.g.inverse()) {
                    out.push(j);
                }
            }
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect();
    let mut uf = UnionFind::new(prim.len());
    for (i, js) in links.iter().enumerate() {
        for &j in js {
            uf.union(i, j);
        }
    }

    let mut reps: HashMap<usize, usize> = HashMap::new();
    for i in 0..prim.len() {
        let root = uf.find(i);
        let entry = reps.entry(root).or_insert(i);
        if shortlex(&prim[i].word, &prim[*entry].word).is_lt() {
            *entry = i;
        }
    }
    let mut classes: Vec<(f64, Word)> = reps.values().map(|&i| (prim[i].length, prim[i].word.clone())).collect();
    classes.sort_by(|x, y| x.0.total_cmp(&y.0).then_with(|| shortlex(&x.1, &y.1)));
    let class_count = classes.len();
    let geos: Vec<PrimitiveGeodesic> = classes
        .into_iter()
        .map(|(length, word)| PrimitiveGeodesic { length, multiplicity: 1, witness_word: Some(word) })
        .collect();
    let spectrum = LengthSpectrum::from_geodesics(genus, cutoff, geos)?;
    let stats = EnumerationStats {
        covering_radius: rho,
        domain_certified: domain.certified,
        side_pairings: domain.steps.len(),
        ball_radius,
        ball_elements: ball.len(),
        candidates: cands.len(),
        classes: class_count,
    };
    Ok((spectrum, stats))
}
