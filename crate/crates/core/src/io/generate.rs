//! Random satisfiable AIG instances.

use crate::circuit::{Assignment, Circuit, ConstrainedCircuit, GateDef, Literal};
use rand::Rng;

/// An instance together with the hidden witness it was built from.
#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub instance: ConstrainedCircuit,
    pub witness: Assignment,
}

/// Random DAG of 2-input ANDs, laid out like a parsed AIGER file: gate 0 is
/// the (unused) constant, gates `1..=num_inputs` are inputs and the ANDs
/// follow. A hidden input pattern is evaluated and every AND without parents
/// is constrained to its value, so the instance is satisfiable by construction.
pub fn generate_random_sat_aig_with_witness<R: Rng + ?Sized>(
    num_inputs: usize,
    num_ands: usize,
    rng: &mut R,
) -> GeneratedInstance {
    assert!(num_inputs >= 1 && num_ands >= 1, "need at least one input and one and gate");
    let mut defs = Vec::with_capacity(1 + num_inputs + num_ands);
    defs.push(GateDef::Input);
    defs.extend(std::iter::repeat_n(GateDef::Input, num_inputs));
    for _ in 0..num_ands {
        let available = defs.len() - 1;
        let a = rng.random_range(1..=available);
        let b = if available == 1 {
            a
        } else {
            let b = rng.random_range(1..available);
            if b >= a {
                b + 1
            } else {
                b
            }
        };
        let mut children = [
            Literal::new(a, rng.random::<bool>()),
            Literal::new(b, rng.random::<bool>()),
        ];
        children.sort_unstable_by(|x, y| y.cmp(x));
        defs.push(GateDef::And(children.to_vec()));
    }
    let circuit = Circuit::new(defs).expect("generated definitions are acyclic");
    let pattern: Vec<bool> = circuit
        .inputs()
        .iter()
        .map(|&g| g != 0 && rng.random::<bool>())
        .collect();
    let witness = circuit.evaluate(&pattern);
    let constraints: Vec<(usize, bool)> = circuit
        .outputs()
        .iter()
        .map(|&g| g as usize)
        .filter(|&g| !circuit.is_input(g))
        .map(|g| (g, witness.value(g)))
        .collect();
    let instance =
        ConstrainedCircuit::new(circuit, constraints).expect("constraints are on outputs");
    GeneratedInstance { instance, witness }
}

/// See [`generate_random_sat_aig_with_witness`].
pub fn generate_random_sat_aig<R: Rng + ?Sized>(
    num_inputs: usize,
    num_ands: usize,
    rng: &mut R,
) -> ConstrainedCircuit {
    generate_random_sat_aig_with_witness(num_inputs, num_ands, rng).instance
}
