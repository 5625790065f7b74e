//! Randomized cross-module consistency checks.
//!
//! The strongest test here is two-sided: on a ball of elements, membership
//! in a computed closure must coincide exactly with being fixed by every
//! witness endomorphism. That is the defining property of the closure
//! whenever the free-part oracle is complete — always true for the identity
//! oracle, and unconditionally in the abelian case (one witness).

use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use fatf::closure::{abelian_closure, nonabelian_closure, ClosureResult, OracleSet};
use fatf::fix::{fix_type_i_family, fix_type_ii, FixResult, TypeIFamily};
use fatf::group::{subgroup_basis, Endomorphism, FatfElement, SubgroupBasis, TypeIIEndo};
use fatf::intlin::IntMatrix;
use fatf::stallings;
use fatf::words::Word;

fn random_word(rng: &mut StdRng, n: usize, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    let mut letters: Vec<i32> = Vec::new();
    for _ in 0..len {
        loop {
            let i = rng.gen_range(1..=n as i32);
            let l = if rng.gen_bool(0.5) { i } else { -i };
            if letters.last() != Some(&-l) {
                letters.push(l);
                break;
            }
        }
    }
    Word::new(n, letters)
}

fn random_nontrivial_word(rng: &mut StdRng, n: usize, max_len: usize) -> Word {
    loop {
        let w = random_word(rng, n, max_len);
        if !w.is_identity() {
            return w;
        }
    }
}

fn random_vec(rng: &mut StdRng, m: usize, bound: i64) -> Vec<BigInt> {
    (0..m)
        .map(|_| BigInt::from(rng.gen_range(-bound..=bound)))
        .collect()
}

/// All reduced words of length at most `max`.
fn ball(n: usize, max: usize) -> Vec<Word> {
    let mut out = vec![Word::identity(n)];
    let mut frontier: Vec<Vec<i32>> = vec![vec![]];
    let letters: Vec<i32> = (1..=n as i32).flat_map(|i| [i, -i]).collect();
    for _ in 0..max {
        let mut next = Vec::new();
        for seq in &frontier {
            for &l in &letters {
                if seq.last() == Some(&-l) {
                    continue;
                }
                let mut s = seq.clone();
                s.push(l);
                out.push(Word::new(n, s.iter().copied()));
                next.push(s);
            }
        }
        frontier = next;
    }
    out
}

/// All vectors in `[-bound, bound]^m`.
fn vec_box(m: usize, bound: i64) -> Vec<Vec<BigInt>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        let mut next = Vec::new();
        for prefix in &out {
            for x in -bound..=bound {
                let mut v = prefix.clone();
                v.push(BigInt::from(x));
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Membership in the closure must equal "fixed by every witness" on a ball.
fn assert_closure_is_witness_intersection(
    s: &SubgroupBasis,
    r: &ClosureResult,
    word_radius: usize,
    vec_bound: i64,
) {
    let closure = r.closure.basis().expect("finitely generated closure");
    for u in ball(s.n(), word_radius) {
        for a in vec_box(s.m(), vec_bound) {
            let g = FatfElement::new(a, u.clone());
            let fixed_by_all = r.witnesses.iter().all(|psi| psi.apply(&g) == g);
            assert_eq!(
                closure.member(&g),
                fixed_by_all,
                "closure of {:?} disagrees with its witnesses at {g:?}",
                s.decorated()
            );
        }
    }
}

#[test]
fn abelian_closures_equal_their_witness_fixed_set_on_balls() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..30 {
        let m = rng.gen_range(1..=2);
        let n = 2;
        let mut gens: Vec<FatfElement> = Vec::new();
        if rng.gen_range(0..4) > 0 {
            let z = random_nontrivial_word(&mut rng, n, 3);
            let r = rng.gen_range(1..=3);
            gens.push(FatfElement::new(random_vec(&mut rng, m, 3), z.pow(r)));
        }
        for _ in 0..rng.gen_range(if gens.is_empty() { 1..=2 } else { 0..=1 }) {
            gens.push(FatfElement::new(
                random_vec(&mut rng, m, 3),
                Word::identity(n),
            ));
        }
        let s = subgroup_basis(m, n, &gens);
        let r = abelian_closure(&s).unwrap();
        assert_closure_is_witness_intersection(&s, &r, 4, 2);
    }
}

#[test]
fn nonabelian_closures_equal_their_witness_intersection_on_balls() {
    let mut rng = StdRng::seed_from_u64(12);
    let oracle = OracleSet::identity_only(2);
    let mut done = 0;
    while done < 20 {
        let m = rng.gen_range(1..=2);
        let count = rng.gen_range(2..=3);
        let gens: Vec<FatfElement> = (0..count)
            .map(|_| FatfElement::new(random_vec(&mut rng, m, 2), random_word(&mut rng, 2, 3)))
            .collect();
        let s = subgroup_basis(m, 2, &gens);
        if s.is_abelian() {
            continue;
        }
        let r = nonabelian_closure(&s, &oracle).unwrap();
        if r.closure.basis().is_none() {
            continue; // not finitely generated: no basis to compare
        }
        assert_closure_is_witness_intersection(&s, &r, 4, 2);
        done += 1;
    }
}

#[test]
fn closures_in_rank_three_free_part_on_balls() {
    let mut rng = StdRng::seed_from_u64(15);
    let oracle = OracleSet::identity_only(3);
    let mut done = 0;
    while done < 8 {
        let m = rng.gen_range(1..=2);
        let gens: Vec<FatfElement> = (0..2)
            .map(|_| FatfElement::new(random_vec(&mut rng, m, 2), random_word(&mut rng, 3, 3)))
            .collect();
        let s = subgroup_basis(m, 3, &gens);
        let r = if s.is_abelian() {
            abelian_closure(&s).unwrap()
        } else {
            nonabelian_closure(&s, &oracle).unwrap()
        };
        if r.closure.basis().is_none() {
            continue;
        }
        assert_closure_is_witness_intersection(&s, &r, 4, 1);
        done += 1;
    }
}

#[test]
fn two_endomorphism_oracle_multiplies_witnesses() {
    // phi: z1 -> z1, z2 -> z2 z1 fixes the projection <z1, z2 z1 z2^-1>;
    // its fixed subgroup is exactly that rank-two subgroup
    let phi = vec![Word::generator(2, 1), Word::new(2, [2, 1])];
    let fix_words = vec![Word::generator(2, 1), Word::new(2, [2, 1, -2])];
    // desk-scale completeness check of the claimed fixed subgroup
    let claimed = stallings::build(2, &fix_words);
    for u in ball(2, 6) {
        let fixed = u.substitute(&phi) == u;
        assert_eq!(
            claimed.contains(&u),
            fixed,
            "claimed fixed subgroup wrong at {u:?}"
        );
    }

    let oracle = OracleSet::new(vec![phi.clone()], vec![fix_words.clone()]).unwrap();
    let gens = [
        FatfElement::from_i64(&[1], Word::generator(2, 1)),
        FatfElement::from_i64(&[0], Word::new(2, [2, 1, -2])),
    ];
    let s = subgroup_basis(1, 2, &gens);
    assert!(!s.is_abelian());
    let r = nonabelian_closure(&s, &oracle).unwrap();
    // identity adjoined: two free-part endomorphisms, q pairs each
    let q = r.qp_pairs.len();
    assert!(q >= 1);
    assert_eq!(r.witnesses.len(), 2 * q);
    // with a complete oracle the two-sided ball identity holds here too
    assert_closure_is_witness_intersection(&s, &r, 4, 2);
    // the closure picks up the free abelian direction, so s is not endo-fixed
    let closure = r.closure.basis().unwrap();
    assert!(closure.member(&FatfElement::from_i64(&[1], Word::identity(2))));
    assert!(!s.member(&FatfElement::from_i64(&[1], Word::identity(2))));
}

#[test]
fn stacked_families_intersect_conditions() {
    // two pairs, the second a consequence of the first: same fixed subgroup
    let k = stallings::build(2, &[Word::generator(2, 1), Word::generator(2, 2)]);
    let one = TypeIFamily::new(
        1,
        vec![(
            IntMatrix::from_i64(&[&[-1]]),
            IntMatrix::from_i64(&[&[1], &[0]]),
        )],
        k.clone(),
    )
    .unwrap();
    let two = TypeIFamily::new(
        1,
        vec![
            (
                IntMatrix::from_i64(&[&[-1]]),
                IntMatrix::from_i64(&[&[1], &[0]]),
            ),
            (
                IntMatrix::from_i64(&[&[-3]]),
                IntMatrix::from_i64(&[&[2], &[0]]),
            ),
        ],
        k.clone(),
    )
    .unwrap();
    let (FixResult::FinitelyGenerated(a), FixResult::FinitelyGenerated(b)) =
        (fix_type_i_family(&one), fix_type_i_family(&two))
    else {
        panic!("both families are finitely generated");
    };
    assert!(a.equal(&b));

    // genuinely independent pairs cut the solution set down to one lattice
    // direction of words: |u|_1 = 2a and |u|_2 = 2a
    let indep = TypeIFamily::new(
        1,
        vec![
            (
                IntMatrix::from_i64(&[&[-1]]),
                IntMatrix::from_i64(&[&[1], &[0]]),
            ),
            (
                IntMatrix::from_i64(&[&[-1]]),
                IntMatrix::from_i64(&[&[0], &[1]]),
            ),
        ],
        k,
    )
    .unwrap();
    match fix_type_i_family(&indep) {
        FixResult::NotFinitelyGenerated { witness } => {
            assert_eq!(witness.len(), 2);
        }
        FixResult::FinitelyGenerated(_) => {
            panic!("equal-exponent condition has infinite index in rank two")
        }
    }
}

#[test]
fn random_stable_letter_fixed_subgroups_match_ball_search() {
    let mut rng = StdRng::seed_from_u64(13);
    let mut done = 0;
    while done < 20 {
        let m = rng.gen_range(1..=2);
        let n = 2;
        let z = random_nontrivial_word(&mut rng, n, 3);
        if !z.is_primitive() {
            continue;
        }
        let ell = random_vec(&mut rng, m, 2);
        if ell.iter().all(|x| x == &BigInt::from(0)) {
            continue;
        }
        let h = random_vec(&mut rng, n, 2);
        let q = IntMatrix::from_rows(m, (0..m).map(|_| random_vec(&mut rng, m, 2)).collect());
        let p = IntMatrix::from_rows(m, (0..n).map(|_| random_vec(&mut rng, m, 2)).collect());
        let endo = TypeIIEndo::new(z, ell, h, q, p).unwrap();
        let fixed = fix_type_ii(&endo);
        let psi = Endomorphism::II(endo);
        // two-sided on a ball: fixed points are exactly the members
        for u in ball(n, 4) {
            for a in vec_box(m, 2) {
                let g = FatfElement::new(a, u.clone());
                assert_eq!(psi.apply(&g) == g, fixed.member(&g), "mismatch at {g:?}");
            }
        }
        done += 1;
    }
}

#[test]
fn random_bases_accept_products_and_reject_offsets() {
    let mut rng = StdRng::seed_from_u64(14);
    for _ in 0..25 {
        let m = rng.gen_range(1..=2);
        let n = 2;
        let count = rng.gen_range(1..=3);
        let gens: Vec<FatfElement> = (0..count)
            .map(|_| FatfElement::new(random_vec(&mut rng, m, 3), random_word(&mut rng, n, 3)))
            .collect();
        let s = subgroup_basis(m, n, &gens);

        // every short product of generators is a member
        let mut elems = vec![FatfElement::identity(m, n)];
        for _ in 0..4 {
            let pick = rng.gen_range(0..gens.len());
            let invert = rng.gen_bool(0.5);
            let g = if invert {
                gens[pick].inverse()
            } else {
                gens[pick].clone()
            };
            let next: Vec<FatfElement> = elems.iter().map(|e| e.mul(&g)).collect();
            elems.extend(next);
        }
        for e in &elems {
            assert!(s.member(e), "product {e:?} rejected by its own subgroup");
        }

        // perturbing a member by a vector outside the lattice breaks membership
        for e in elems.iter().take(8) {
            let mut probe = random_vec(&mut rng, m, 3);
            if s.lattice().contains(&probe) {
                probe[0] += 1; // lattices are discrete; nudging leaves them
                if s.lattice().contains(&probe) {
                    continue;
                }
            }
            let shifted = e.mul(&FatfElement::from_vec(probe, n));
            assert!(
                !s.member(&shifted),
                "offset element {shifted:?} wrongly accepted"
            );
        }
    }
}
