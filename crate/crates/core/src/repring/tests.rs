use super::*;
use proptest::prelude::*;

fn g(d: usize) -> SoGroup {
    SoGroup::new(d).unwrap()
}

fn rep(d: usize, s: &str) -> VirtualRep {
    VirtualRep::parse(g(d), s).unwrap()
}

fn dia(rows: &[u32]) -> Diagram {
    Diagram::new(rows.to_vec())
}

fn binom(n: i128, k: i128) -> i128 {
    if k < 0 || k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Weights of the vector representation, one per basis vector.
fn vector_weights(d: usize) -> Vec<Vec<i32>> {
    let r = d / 2;
    let mut out = Vec::new();
    for k in 0..r {
        for s in [1, -1] {
            let mut w = vec![0; r];
            w[k] = s;
            out.push(w);
        }
    }
    if d % 2 == 1 {
        out.push(vec![0; r]);
    }
    out
}

/// Character of `S^k V` or `L^k V` by enumerating multisets / subsets of
/// vector weights.
fn brute_power(d: usize, k: usize, exterior: bool) -> Character {
    let ws = vector_weights(d);
    let r = d / 2;
    let mut acc: HashMap<Vec<i32>, i128> = HashMap::new();
    fn rec(
        ws: &[Vec<i32>],
        start: usize,
        k: usize,
        exterior: bool,
        cur: &mut Vec<i32>,
        acc: &mut HashMap<Vec<i32>, i128>,
    ) {
        if k == 0 {
            *acc.entry(cur.clone()).or_default() += 1;
            return;
        }
        for i in start..ws.len() {
            for (c, x) in cur.iter_mut().zip(&ws[i]) {
                *c += x;
            }
            rec(ws, if exterior { i + 1 } else { i }, k - 1, exterior, cur, acc);
            for (c, x) in cur.iter_mut().zip(&ws[i]) {
                *c -= x;
            }
        }
    }
    rec(&ws, 0, k, exterior, &mut vec![0; r], &mut acc);
    Character::from_weights(g(d), acc).unwrap()
}

#[test]
fn dimensions() {
    assert_eq!(weyl_dim(g(3), &dia(&[1])), 3);
    assert_eq!(weyl_dim(g(5), &dia(&[1, 1])), 10);
    assert_eq!(weyl_dim(g(4), &dia(&[2])), 9);
    for d in 3..=12 {
        let d = d as i128;
        assert_eq!(weyl_dim(g(d as usize), &dia(&[2])), d * (d + 1) / 2 - 1);
    }
    // stable range
    assert!(matches!(
        VirtualRep::irrep(g(5), dia(&[1, 1, 1])),
        Err(Error::OutOfStableRange { .. })
    ));
    // even d, maximal row count denotes a conjugate pair
    assert_eq!(weyl_dim(g(4), &dia(&[1, 1])), 6);
    assert_eq!(weyl_dim(g(2), &dia(&[3])), 2);
}

#[test]
fn vector_square() {
    for d in 5..=9 {
        assert_eq!(
            rep(d, "[1]").tensor(&rep(d, "[1]")),
            rep(d, "1 + [1,1] + [2]")
        );
    }
    let x = rep(6, "[2,1] - 3*[1]");
    assert_eq!(VirtualRep::one(g(6)).tensor(&x), x);
}

#[test]
fn vector_times_adjoint_at_d7() {
    // independent oracle: weight-by-weight character product
    let a = rep(7, "[1]");
    let b = rep(7, "[1,1]");
    let ch = a.character().mul(&b.character());
    let expect = ch.decompose().unwrap();
    assert_eq!(expect, rep(7, "[1] + [1,1,1] + [2,1]"));
    assert_eq!(a.tensor(&b), expect);
}

#[test]
fn small_d_tensor_products() {
    // so(2): [a] x [b] = [a+b] + [|a-b|], with [a] x [a] = [2a] + 2
    assert_eq!(rep(2, "[2]").tensor(&rep(2, "[3]")), rep(2, "[1] + [5]"));
    assert_eq!(rep(2, "[2]").tensor(&rep(2, "[2]")), rep(2, "2 + [4]"));
    // so(3): spin 1 x spin 1
    assert_eq!(rep(3, "[1]").tensor(&rep(3, "[1]")), rep(3, "1 + [1] + [2]"));
    // so(4): the adjoint pair [1,1] = (1,0) + (0,1)
    assert_eq!(
        rep(4, "[1]").tensor(&rep(4, "[1]")),
        rep(4, "1 + [1,1] + [2]")
    );
    // d = 1: everything is trivial
    assert_eq!(rep(1, "3").tensor(&rep(1, "-2")), rep(1, "-6"));
}

#[test]
fn powers_of_the_vector() {
    assert_eq!(rep(7, "[1]").ext_power(2), rep(7, "[1,1]"));
    assert_eq!(rep(7, "[1]").sym_power(2), rep(7, "1 + [2]"));
    assert_eq!(rep(7, "[1]").sym_power(0), VirtualRep::one(g(7)));
    // at so(3) the exterior square of the vector is the vector
    let v3 = rep(3, "[1]").ext_powers(3);
    assert_eq!(v3[2], rep(3, "[1]"));
    assert_eq!(v3[3], rep(3, "1"));
    for d in 1..=8 {
        let v = VirtualRep::vector(g(d));
        let ext = v.ext_powers(d + 1);
        let sym = v.sym_powers(5);
        for (k, e) in ext.iter().enumerate() {
            assert_eq!(e.dim(), binom(d as i128, k as i128), "d={d} L^{k}");
            assert_eq!(e.character(), brute_power(d, k, true), "d={d} L^{k}");
        }
        for (k, s) in sym.iter().enumerate() {
            assert_eq!(s.dim(), binom(d as i128 + k as i128 - 1, k as i128));
            assert_eq!(s.character(), brute_power(d, k, false), "d={d} S^{k}");
        }
    }
}

#[test]
fn adams_operations() {
    let v = rep(3, "[1]");
    assert_eq!(v.adams(1), v);
    let psi2 = v.adams(2);
    assert_eq!(psi2, rep(3, "1 - [1] + [2]"));
    assert_eq!(psi2.dim(), 3);
    // psi_2 = S^2 - L^2
    for d in 2..=7 {
        let v = VirtualRep::vector(g(d));
        assert_eq!(v.adams(2), v.sym_power(2) - v.ext_power(2));
    }
}

#[test]
fn decompose_round_trip_and_invariance() {
    let c = Character::from_weights(g(3), [(vec![1], 1), (vec![0], 1), (vec![-1], 1)]).unwrap();
    assert_eq!(c.decompose().unwrap(), rep(3, "[1]"));
    assert!(Character::zero(g(3)).decompose().unwrap().is_zero());
    assert_eq!(
        Character::from_weights(g(3), [(vec![1], 1)]),
        Err(Error::NotWeylInvariant)
    );
    let ch5 = rep(5, "[1]").character().mul(&rep(5, "[1]").character());
    assert_eq!(ch5.decompose().unwrap(), rep(5, "1 + [1,1] + [2]"));
}

#[test]
fn text_format() {
    let x = rep(7, "[1,1,1] - 2*[2,1]~ + 3");
    assert_eq!(x.to_string(), "3 - 2*[2,1] + [1,1,1]");
    assert_eq!(VirtualRep::zero(g(7)).to_string(), "0");
    assert_eq!(rep(7, "-[1]").to_string(), "-[1]");
    assert_eq!(rep(7, "3[1]"), rep(7, "3*[1]"));
    assert_eq!(rep(7, "[]"), VirtualRep::one(g(7)));
    for bad in ["", "[1,2]", "[0]", "2*", "[1] [2]", "+", "[1"] {
        assert!(VirtualRep::parse(g(7), bad).is_err(), "{bad:?}");
    }
}

#[test]
fn transpose_of_diagrams() {
    assert_eq!(dia(&[3, 1]).transpose(), dia(&[2, 1, 1]));
    assert_eq!(dia(&[]).transpose(), dia(&[]));
    assert!(dia(&[2, 2]).contains_square());
    assert!(!dia(&[3, 1, 1]).contains_square());
}

fn arb_rep(d: usize) -> impl Strategy<Value = VirtualRep> {
    let diagrams = Diagram::all_up_to(3, d / 2);
    proptest::collection::vec((0..diagrams.len(), -3i128..4), 0..4).prop_map(move |v| {
        VirtualRep::from_terms(g(d), v.into_iter().map(|(i, m)| (diagrams[i].clone(), m))).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, rng_seed: proptest::test_runner::RngSeed::Fixed(24), ..ProptestConfig::default() })]

    #[test]
    fn character_round_trip(x in (1usize..9).prop_flat_map(arb_rep)) {
        prop_assert_eq!(x.character().decompose().unwrap(), x);
    }

    #[test]
    fn ring_axioms(a in arb_rep(6), b in arb_rep(6), c in arb_rep(6)) {
        prop_assert_eq!(a.tensor(&b), b.tensor(&a));
        prop_assert_eq!(a.tensor(&b).tensor(&c), a.tensor(&b.tensor(&c)));
        prop_assert_eq!(a.tensor(&(b.clone() + c.clone())), a.tensor(&b) + a.tensor(&c));
        prop_assert_eq!(a.tensor(&b).dim(), a.dim() * b.dim());
        prop_assert_eq!(
            a.tensor(&b).character(),
            a.character().mul(&b.character())
        );
    }

    #[test]
    fn adams_is_a_ring_map(a in arb_rep(5), b in arb_rep(5), j in 1u32..3, k in 1u32..3) {
        prop_assert_eq!(a.adams(j).adams(k), a.adams(j * k));
        prop_assert_eq!(a.tensor(&b).adams(k), a.adams(k).tensor(&b.adams(k)));
        prop_assert_eq!((a.clone() + b.clone()).adams(k), a.adams(k) + b.adams(k));
    }

    #[test]
    fn newton_identity(a in arb_rep(7), n in 1usize..4) {
        let ext = a.ext_powers(n);
        let sym = a.sym_powers(n);
        let mut acc = VirtualRep::zero(a.group());
        for k in 0..=n {
            let t = ext[k].tensor(&sym[n - k]);
            acc = if k % 2 == 0 { acc + t } else { acc - t };
        }
        prop_assert!(acc.is_zero());
    }

    #[test]
    fn text_round_trip(a in arb_rep(8)) {
        prop_assert_eq!(VirtualRep::parse(a.group(), &a.to_string()).unwrap(), a);
    }
}
