//! Weight combinatorics for `so(d)`: Freudenthal multiplicities,
//! Brauer-Klimyk products and the Weyl dimension formula.
//!
//! Weights live in the `e`-basis of the Cartan of `so(d)`, rank `r = d/2`.
//! Odd `d` is type `B_r`, even `d` is type `D_r`. Only integral (tensor)
//! weights occur.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock};

use num_rational::Ratio;
use parking_lot::RwLock;

use super::{Diagram, SoGroup};

pub const MAX_RANK: usize = 8;

/// Fixed-width weight vector; entries past the rank are zero.
pub type Wt = [i16; MAX_RANK];

pub(crate) fn is_type_b(g: SoGroup) -> bool {
    g.d() % 2 == 1
}

/// Twice the Weyl vector.
fn rho2(g: SoGroup) -> Wt {
    let r = g.rank();
    let mut w = [0; MAX_RANK];
    for (i, x) in w.iter_mut().enumerate().take(r) {
        *x = if is_type_b(g) {
            (2 * (r - i) - 1) as i16
        } else {
            (2 * (r - 1 - i)) as i16
        };
    }
    w
}

fn positive_roots(g: SoGroup) -> Vec<Wt> {
    let r = g.rank();
    let mut out = Vec::new();
    for i in 0..r {
        for j in i + 1..r {
            let mut a = [0; MAX_RANK];
            a[i] = 1;
            a[j] = -1;
            out.push(a);
            let mut b = [0; MAX_RANK];
            b[i] = 1;
            b[j] = 1;
            out.push(b);
        }
        if is_type_b(g) {
            let mut c = [0; MAX_RANK];
            c[i] = 1;
            out.push(c);
        }
    }
    out
}

fn dot(a: &Wt, b: &Wt) -> i64 {
    a.iter().zip(b).map(|(&x, &y)| x as i64 * y as i64).sum()
}

/// Representative of `w` under signed permutations: absolute values sorted
/// descending.
pub fn o_dominant(r: usize, w: &Wt) -> Wt {
    let mut out = [0; MAX_RANK];
    for i in 0..r {
        out[i] = w[i].abs();
    }
    out[..r].sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// Representative of `w` in the dominant chamber of `so(d)`.
fn so_dominant(g: SoGroup, w: &Wt) -> Wt {
    let r = g.rank();
    if !is_type_b(g) && r == 1 {
        return *w;
    }
    let mut out = o_dominant(r, w);
    if !is_type_b(g) && r > 0 {
        let negatives = w[..r].iter().filter(|&&x| x < 0).count();
        let has_zero = w[..r].contains(&0);
        if negatives % 2 == 1 && !has_zero {
            out[r - 1] = -out[r - 1];
        }
    }
    out
}

/// `mu <= lam` in the dominance order (difference a non-negative integer
/// combination of simple roots).
fn preceq(g: SoGroup, mu: &Wt, lam: &Wt) -> bool {
    let r = g.rank();
    if r == 0 {
        return true;
    }
    let nu: Vec<i64> = (0..r).map(|i| lam[i] as i64 - mu[i] as i64).collect();
    let mut partial = Vec::with_capacity(r);
    let mut acc = 0;
    for &x in &nu {
        acc += x;
        partial.push(acc);
    }
    if is_type_b(g) {
        return partial.iter().all(|&s| s >= 0);
    }
    if r == 1 {
        return nu[0] == 0;
    }
    if partial[..r - 2].iter().any(|&s| s < 0) {
        return false;
    }
    let total = partial[r - 1];
    let c_last = total;
    let c_prev = partial[r - 2] - nu[r - 1];
    c_last >= 0 && c_prev >= 0 && c_last % 2 == 0 && c_prev % 2 == 0
}

/// Dominant weights of `so(d)` below `lam` (including `lam`).
fn dominant_below(g: SoGroup, lam: &Wt) -> Vec<Wt> {
    let r = g.rank();
    if r == 0 || (!is_type_b(g) && r == 1) {
        return vec![*lam];
    }
    let top = lam[0];
    let mut out = Vec::new();
    let mut cur = [0i16; MAX_RANK];
    fn rec(
        g: SoGroup,
        i: usize,
        bound: i16,
        cur: &mut Wt,
        lam: &Wt,
        out: &mut Vec<Wt>,
    ) {
        let r = g.rank();
        if i == r {
            if preceq(g, cur, lam) {
                out.push(*cur);
            }
            return;
        }
        for v in 0..=bound {
            cur[i] = v;
            rec(g, i + 1, v, cur, lam, out);
            if i == r - 1 && !is_type_b(g) && v > 0 {
                cur[i] = -v;
                if preceq(g, cur, lam) {
                    out.push(*cur);
                }
            }
        }
        cur[i] = 0;
    }
    rec(g, 0, top, &mut cur, lam, &mut out);
    out
}

/// Multiplicities of the irreducible `so(d)` module with highest weight
/// `lam`, at every dominant weight.
pub fn freudenthal(g: SoGroup, lam: &Wt) -> HashMap<Wt, i128> {
    let r = g.rank();
    let rho = rho2(g);
    let roots = positive_roots(g);
    let norm2 = |w: &Wt| {
        let mut v = [0i16; MAX_RANK];
        for i in 0..r {
            v[i] = 2 * w[i] + rho[i];
        }
        dot(&v, &v)
    };
    let top = norm2(lam);
    let mut weights = dominant_below(g, lam);
    weights.sort_by_key(|w| std::cmp::Reverse(norm2(w)));
    let bound = lam[0].max(0);
    let mut mult: HashMap<Wt, i128> = HashMap::with_capacity(weights.len());
    for mu in weights {
        if mu == *lam {
            mult.insert(mu, 1);
            continue;
        }
        let mut acc: i128 = 0;
        for a in &roots {
            let mut w = mu;
            loop {
                for i in 0..r {
                    w[i] += a[i];
                }
                if w[..r].iter().any(|x| x.abs() > bound) {
                    break;
                }
                let m = mult.get(&so_dominant(g, &w)).copied().unwrap_or(0);
                if m != 0 {
                    acc += dot(&w, a) as i128 * m;
                }
            }
        }
        let denom = (top - norm2(&mu)) as i128;
        debug_assert!(denom > 0);
        let m = 8 * acc / denom;
        debug_assert_eq!(8 * acc % denom, 0);
        if m != 0 {
            mult.insert(mu, m);
        }
    }
    mult
}

/// Weight vector of a diagram (rows padded with zeros).
pub fn diagram_weight(lam: &Diagram) -> Wt {
    let mut w = [0; MAX_RANK];
    for (x, &row) in w.iter_mut().zip(lam.rows()) {
        *x = row as i16;
    }
    w
}

fn weight_diagram(r: usize, w: &Wt) -> Diagram {
    Diagram::new(w[..r].iter().map(|&x| x.unsigned_abs() as u32).collect())
}

/// Whether a label denotes a sum of two conjugate `so(d)` irreducibles.
pub(crate) fn is_pair(g: SoGroup, lam: &Diagram) -> bool {
    !is_type_b(g) && g.rank() > 0 && lam.len() == g.rank()
}

/// Character data of one label.
#[derive(Debug)]
pub struct IrrepChar {
    /// Multiplicities at weights with non-negative sorted entries.
    pub dominant: HashMap<Wt, i128>,
    /// Every weight with its multiplicity.
    pub all: Vec<(Wt, i128)>,
}

/// Distinct images of `w` under signed permutations.
pub fn orbit(r: usize, w: &Wt) -> Vec<Wt> {
    let base = o_dominant(r, w);
    let mut vals: Vec<i16> = base[..r].to_vec();
    vals.sort_unstable();
    let mut perms = Vec::new();
    loop {
        perms.push(vals.clone());
        // next lexicographic permutation
        let Some(i) = (0..vals.len().saturating_sub(1)).rev().find(|&i| vals[i] < vals[i + 1]) else {
            break;
        };
        let j = (i + 1..vals.len()).rev().find(|&j| vals[j] > vals[i]).unwrap();
        vals.swap(i, j);
        vals[i + 1..].reverse();
    }
    let mut out = Vec::new();
    for p in perms {
        let nz: Vec<usize> = (0..r).filter(|&i| p[i] != 0).collect();
        for mask in 0u32..(1 << nz.len()) {
            let mut v = [0; MAX_RANK];
            v[..r].copy_from_slice(&p);
            for (b, &i) in nz.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    v[i] = -v[i];
                }
            }
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
fn orbit_size(r: usize, w: &Wt) -> i128 {
    let mut counts: HashMap<i16, u32> = HashMap::new();
    let mut nonzero = 0;
    for &x in &w[..r] {
        *counts.entry(x.abs()).or_default() += 1;
        if x != 0 {
            nonzero += 1;
        }
    }
    let fact = |n: u32| (1..=n as i128).product::<i128>();
    let mut size = fact(r as u32);
    for &c in counts.values() {
        size /= fact(c);
    }
    size << nonzero
}

fn compute_char(g: SoGroup, lam: &Diagram) -> IrrepChar {
    let r = g.rank();
    let w = diagram_weight(lam);
    let so = freudenthal(g, &w);
    let mut dominant = HashMap::new();
    for (mu, _) in so.iter() {
        let key = o_dominant(r, mu);
        if dominant.contains_key(&key) {
            continue;
        }
        let mut m = so.get(&so_dominant(g, &key)).copied().unwrap_or(0);
        if is_pair(g, lam) {
            let mut flipped = key;
            flipped[r - 1] = -flipped[r - 1];
            m += so.get(&so_dominant(g, &flipped)).copied().unwrap_or(0);
        }
        if m != 0 {
            dominant.insert(key, m);
        }
    }
    let mut all = Vec::new();
    for (mu, &m) in &dominant {
        for v in orbit(r, mu) {
            all.push((v, m));
        }
    }
    IrrepChar { dominant, all }
}

type CharCache = RwLock<HashMap<(usize, Diagram), Arc<IrrepChar>>>;
type ProdCache = RwLock<HashMap<(usize, Diagram, Diagram), Arc<Vec<(Diagram, i128)>>>>;

static CHARS: LazyLock<CharCache> = LazyLock::new(Default::default);
static PRODUCTS: LazyLock<ProdCache> = LazyLock::new(Default::default);

/// Cached character of a label (assumed within the stable range).
pub fn irrep_char(g: SoGroup, lam: &Diagram) -> Arc<IrrepChar> {
    let key = (g.d(), lam.clone());
    if let Some(c) = CHARS.read().get(&key) {
        return c.clone();
    }
    let c = Arc::new(compute_char(g, lam));
    CHARS.write().entry(key).or_insert(c).clone()
}

/// Reflects a doubled, shifted weight into the dominant chamber.
/// Returns `None` on a wall, otherwise the image and `det(w)`.
fn reflect(g: SoGroup, v: &Wt) -> Option<(Wt, i128)> {
    let r = g.rank();
    if r == 0 || (!is_type_b(g) && r == 1) {
        return Some((*v, 1));
    }
    let mut abs: Vec<(i16, usize)> = (0..r).map(|i| (v[i].abs(), i)).collect();
    if is_type_b(g) && abs.iter().any(|&(a, _)| a == 0) {
        return None;
    }
    abs.sort_unstable_by(|a, b| b.0.cmp(&a.0));
    if abs.windows(2).any(|p| p[0].0 == p[1].0) {
        return None;
    }
    let perm: Vec<usize> = abs.iter().map(|&(_, i)| i).collect();
    let mut inversions = 0;
    for i in 0..r {
        for j in i + 1..r {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    let mut sign: i128 = if inversions % 2 == 0 { 1 } else { -1 };
    let negatives = v[..r].iter().filter(|&&x| x < 0).count();
    let mut out = [0; MAX_RANK];
    for (k, &(a, _)) in abs.iter().enumerate() {
        out[k] = a;
    }
    if is_type_b(g) {
        if negatives % 2 == 1 {
            sign = -sign;
        }
    } else if negatives % 2 == 1 && out[r - 1] != 0 {
        out[r - 1] = -out[r - 1];
    }
    Some((out, sign))
}

fn compute_product(g: SoGroup, a: &Diagram, b: &Diagram) -> Vec<(Diagram, i128)> {
    let r = g.rank();
    if r == 0 {
        return vec![(Diagram::empty(), 1)];
    }
    let ca = irrep_char(g, a);
    let cb = irrep_char(g, b);
    // iterate over the weights of the factor with fewer weights
    let (hi, lo) = if ca.all.len() <= cb.all.len() {
        (b, ca)
    } else {
        (a, cb)
    };
    let rho = rho2(g);
    let base = diagram_weight(hi);
    let mut starts = vec![base];
    if is_pair(g, hi) {
        let mut f = base;
        f[r - 1] = -f[r - 1];
        starts.push(f);
    }
    let mut acc: HashMap<Wt, i128> = HashMap::new();
    for s in &starts {
        for (nu, m) in &lo.all {
            let mut v = [0; MAX_RANK];
            for i in 0..r {
                v[i] = 2 * (s[i] + nu[i]) + rho[i];
            }
            if let Some((w, sign)) = reflect(g, &v) {
                let mut kappa = [0; MAX_RANK];
                for i in 0..r {
                    kappa[i] = (w[i] - rho[i]) / 2;
                }
                if !is_type_b(g) && kappa[r - 1] < 0 {
                    continue;
                }
                *acc.entry(kappa).or_default() += sign * m;
            }
        }
    }
    let mut out: Vec<(Diagram, i128)> = acc
        .into_iter()
        .filter(|&(_, m)| m != 0)
        .map(|(k, m)| (weight_diagram(r, &k), m))
        .collect();
    out.sort();
    out
}

/// Cached decomposition of the product of two labels.
pub fn product(g: SoGroup, a: &Diagram, b: &Diagram) -> Arc<Vec<(Diagram, i128)>> {
    let (x, y) = if a <= b { (a, b) } else { (b, a) };
    let key = (g.d(), x.clone(), y.clone());
    if let Some(p) = PRODUCTS.read().get(&key) {
        return p.clone();
    }
    let p = Arc::new(compute_product(g, x, y));
    PRODUCTS.write().entry(key).or_insert(p).clone()
}

/// Dimension as the sum of weight multiplicities.
#[cfg(test)]
fn char_dim(g: SoGroup, lam: &Diagram) -> i128 {
    let r = g.rank();
    irrep_char(g, lam)
        .dominant
        .iter()
        .map(|(w, &m)| m * orbit_size(r, w))
        .sum()
}

/// Weyl dimension formula, evaluated independently of the weight machinery.
pub fn weyl_dim(g: SoGroup, lam: &Diagram) -> i128 {
    let r = g.rank();
    if r == 0 {
        return 1;
    }
    let rho = rho2(g);
    let w = diagram_weight(lam);
    let l: Vec<i128> = (0..r).map(|i| 2 * w[i] as i128 + rho[i] as i128).collect();
    let p: Vec<i128> = (0..r).map(|i| rho[i] as i128).collect();
    let mut q = Ratio::from_integer(1i128);
    for i in 0..r {
        for j in i + 1..r {
            q *= Ratio::new(l[i] * l[i] - l[j] * l[j], p[i] * p[i] - p[j] * p[j]);
        }
        if is_type_b(g) {
            q *= Ratio::new(l[i], p[i]);
        }
    }
    let dim = q.to_integer();
    if is_pair(g, lam) {
        2 * dim
    } else {
        dim
    }
}
