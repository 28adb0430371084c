mod common;

use std::collections::{BTreeSet, HashMap};

use common::*;
use crsat::{Assignment, Circuit, CircuitError, ConstrainedCircuit, GateDef, Literal};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Depth-first topological order check: the reported order is a permutation
/// in which every child precedes its parents.
fn assert_topological(defs: &[GateDef], c: &Circuit) {
    let order: Vec<usize> = c.topo_order().iter().map(|&g| g as usize).collect();
    let mut pos = vec![usize::MAX; defs.len()];
    for (i, &g) in order.iter().enumerate() {
        assert_eq!(pos[g], usize::MAX, "gate {g} listed twice");
        pos[g] = i;
        assert_eq!(c.topo_position(g), i);
    }
    assert!(pos.iter().all(|&p| p != usize::MAX));
    for (g, d) in defs.iter().enumerate() {
        for l in fanin_of(d) {
            assert!(pos[l.gate()] < pos[g]);
        }
    }
}

/// Minimal sets of child bindings forcing `g` to `v`, by enumeration over
/// every subset of bindings of the distinct child gates.
fn brute_force_justifications(c: &Circuit, g: usize, v: bool) -> BTreeSet<BTreeSet<(usize, bool)>> {
    let fanin = c.fanin(g);
    let gates: Vec<usize> = fanin
        .iter()
        .map(|l| l.gate())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let k = gates.len();
    let forces = |binding: &BTreeSet<(usize, bool)>| {
        let free: Vec<usize> = gates
            .iter()
            .copied()
            .filter(|x| !binding.iter().any(|b| b.0 == *x))
            .collect();
        (0u32..1 << free.len()).all(|bits| {
            let mut val: HashMap<usize, bool> = binding.iter().copied().collect();
            for (i, &x) in free.iter().enumerate() {
                val.insert(x, bits >> i & 1 == 1);
            }
            fanin.iter().all(|l| val[&l.gate()] != l.is_complemented()) == v
        })
    };
    let mut forcing = Vec::new();
    // each child gate is unbound, bound to 0, or bound to 1
    for code in 0..3u32.pow(k as u32) {
        let mut b = BTreeSet::new();
        let mut x = code;
        for &gate in &gates {
            match x % 3 {
                1 => {
                    b.insert((gate, false));
                }
                2 => {
                    b.insert((gate, true));
                }
                _ => {}
            }
            x /= 3;
        }
        if forces(&b) {
            forcing.push(b);
        }
    }
    forcing
        .iter()
        .filter(|b| !forcing.iter().any(|o| o != *b && o.is_subset(b)))
        .cloned()
        .collect()
}

#[test]
fn topological_order_on_random_dags() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..300 {
        let inputs = rng.random_range(1..10);
        let ands = rng.random_range(0..120);
        let defs = random_defs(&mut rng, inputs, ands, 4);
        let c = Circuit::new(defs.clone()).unwrap();
        assert_topological(&defs, &c);
        let parents = parents_of(&defs);
        for g in 0..defs.len() {
            let mut fo: Vec<usize> = c.fanout(g).iter().map(|&p| p as usize).collect();
            fo.sort_unstable();
            let mut expect = parents[g].clone();
            expect.sort_unstable();
            assert_eq!(fo, expect);
            assert_eq!(c.is_output(g), parents[g].is_empty());
            assert_eq!(c.is_input(g), matches!(defs[g], GateDef::Input));
        }
    }
}

#[test]
fn back_edge_is_a_cycle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let defs = random_defs(&mut rng, 3, 20, 3);
        let c = Circuit::new(defs.clone()).unwrap();
        // make an AND depend on one of its own ancestors (or itself)
        let first_and = (0..c.num_gates()).find(|&g| !c.is_input(g)).unwrap();
        let mut last = first_and;
        while let Some(&p) = c.fanout(last).first() {
            last = p as usize;
        }
        let mut bad = defs.clone();
        let mut f = fanin_of(&bad[first_and]).to_vec();
        f.push(Literal::positive(last));
        bad[first_and] = GateDef::And(f);
        assert!(matches!(Circuit::new(bad), Err(CircuitError::CycleDetected(_))));
    }
}

#[test]
fn justifications_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..400 {
        let c = random_circuit(&mut rng, 3, 8, 5);
        for g in 0..c.num_gates() {
            if c.is_input(g) {
                assert!(c.minimal_justifications(g, true).is_err());
                continue;
            }
            for v in [false, true] {
                let got: BTreeSet<BTreeSet<(usize, bool)>> = c
                    .minimal_justifications(g, v)
                    .unwrap()
                    .into_iter()
                    .map(|j| j.bindings.into_iter().map(|(l, b)| (l.gate(), b)).collect())
                    .collect();
                assert_eq!(got, brute_force_justifications(&c, g, v), "gate {g} value {v}");
            }
        }
    }
}

#[test]
fn evaluation_matches_recursive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let defs = random_defs(&mut rng, 6, 60, 4);
        let c = Circuit::new(defs.clone()).unwrap();
        let bits: Vec<bool> = c.inputs().iter().map(|_| rng.random()).collect();
        let input: HashMap<usize, bool> =
            c.inputs().iter().map(|&g| g as usize).zip(bits.iter().copied()).collect();
        let a = c.evaluate(&bits);
        assert_eq!(a.values(), &eval_recursive(&defs, &input)[..]);
        assert_eq!(a.num_unjust(), 0);
        assert_eq!(a.input_values(&c), bits);
    }
}

#[test]
fn random_extension_is_unjust_only_at_constraints() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let c = random_circuit(&mut rng, 5, 40, 3);
        let cc = random_constraints(&mut rng, c, 0.7);
        let a = cc.random_complete_extension(&mut rng);
        assert!(a.unjust_is_exact(cc.circuit()));
        for &g in a.unjust() {
            assert!(cc.is_constrained(g as usize));
        }
        for (g, v) in cc.constraints() {
            assert_eq!(a.value(g), v);
        }
        assert_eq!(cc.verify_satisfying(&a), a.num_unjust() == 0);
    }
}

#[test]
fn satisfying_check_uses_all_patterns() {
    // verify_satisfying against the definition, over all 256 patterns of an
    // 8-input circuit
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let defs = random_defs(&mut rng, 8, 30, 3);
    let c = Circuit::new(defs.clone()).unwrap();
    let cc = random_constraints(&mut rng, c, 0.5);
    let inputs: Vec<usize> = cc.circuit().inputs().iter().map(|&g| g as usize).collect();
    for bits in 0u32..256 {
        let input: HashMap<usize, bool> = inputs
            .iter()
            .enumerate()
            .map(|(i, &g)| (g, bits >> i & 1 == 1))
            .collect();
        let values = eval_recursive(&defs, &input);
        let expected = cc.constraints().all(|(g, v)| values[g] == v);
        let a = Assignment::from_values(cc.circuit(), values.clone());
        assert_eq!(cc.verify_satisfying(&a), expected);
        // an inconsistent assignment never satisfies
        let and = (0..values.len()).find(|&g| !cc.circuit().is_input(g)).unwrap();
        let mut broken = values;
        broken[and] = !broken[and];
        assert!(!cc.verify_satisfying(&Assignment::from_values(cc.circuit(), broken)));
    }
}

#[test]
fn constraints_on_internal_gates_rejected() {
    let c = Circuit::new(vec![
        GateDef::Input,
        GateDef::And(vec![Literal::positive(0)]),
        GateDef::And(vec![Literal::negative(1)]),
    ])
    .unwrap();
    assert!(matches!(
        ConstrainedCircuit::new(c.clone(), [(1, true)]),
        Err(CircuitError::ConstraintOnInternalGate(1))
    ));
    assert!(matches!(
        ConstrainedCircuit::new(c, [(2, true), (2, false)]),
        Err(CircuitError::ConflictingConstraint(2))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn flips_keep_unjust_set_exact(seed in any::<u64>(), flips in proptest::collection::vec(any::<u16>(), 1..60)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(&mut rng, 4, 30, 4);
        let values: Vec<bool> = (0..c.num_gates()).map(|_| rng.random()).collect();
        let mut a = Assignment::from_values(&c, values);
        for f in flips {
            let g = f as usize % c.num_gates();
            a.flip(&c, g);
            prop_assert!(a.unjust_is_exact(&c));
        }
        let rebuilt = Assignment::from_values(&c, a.values().to_vec());
        prop_assert_eq!(rebuilt, a);
    }

    #[test]
    fn double_flip_is_identity(seed in any::<u64>(), g in any::<u16>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(&mut rng, 4, 30, 3);
        let values: Vec<bool> = (0..c.num_gates()).map(|_| rng.random()).collect();
        let a = Assignment::from_values(&c, values);
        let mut b = a.clone();
        let g = g as usize % c.num_gates();
        b.flip(&c, g);
        b.flip(&c, g);
        prop_assert_eq!(a, b);
    }
}
