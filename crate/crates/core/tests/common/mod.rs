//! Shared generators and independent oracles for the integration suites.
#![allow(dead_code)] // each test binary uses a different subset

use nsbox_core::boxes::table_index;
use nsbox_core::{FirstBox, NsBox, PartyWiring, PlaneCoords, ProtocolWiring, PARTY_WIRING_COUNT};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rule_box(rule: impl Fn(u8, u8, u8, u8) -> f64) -> NsBox {
    let mut p = [0.0; 16];
    for x in 0..2u8 {
        for y in 0..2u8 {
            for a in 0..2u8 {
                for b in 0..2u8 {
                    p[table_index(x, y, a, b)] = rule(x, y, a, b);
                }
            }
        }
    }
    NsBox::from_table(p)
}

/// The 16 deterministic local vertices: `a = alpha ^ (beta & x)`,
/// `b = gamma ^ (delta & y)`.
pub fn local_vertices() -> Vec<NsBox> {
    let mut v = Vec::with_capacity(16);
    for bits in 0..16u8 {
        let (alpha, beta, gamma, delta) = (bits & 1, (bits >> 1) & 1, (bits >> 2) & 1, (bits >> 3) & 1);
        v.push(rule_box(move |x, y, a, b| {
            let fa = alpha ^ (beta & x);
            let fb = gamma ^ (delta & y);
            if a == fa && b == fb {
                1.0
            } else {
                0.0
            }
        }));
    }
    v
}

/// The 8 PR-type vertices: `a ^ b = xy ^ rx ^ sy ^ t`.
pub fn pr_vertices() -> Vec<NsBox> {
    let mut v = Vec::with_capacity(8);
    for bits in 0..8u8 {
        let (r, s, t) = (bits & 1, (bits >> 1) & 1, (bits >> 2) & 1);
        v.push(rule_box(move |x, y, a, b| {
            if a ^ b == (x & y) ^ (r & x) ^ (s & y) ^ t {
                0.5
            } else {
                0.0
            }
        }));
    }
    v
}

fn random_mixture(vertices: &[NsBox], rng: &mut ChaCha8Rng) -> NsBox {
    let mut weights: Vec<f64> = (0..vertices.len()).map(|_| rng.gen::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    // renormalize the largest weight so the sum is 1 up to the last ulp
    let drift: f64 = weights.iter().sum::<f64>() - 1.0;
    weights[0] -= drift;
    NsBox::mix(vertices, &weights).expect("convex mixture of vertices")
}

/// A random point of the non-signaling polytope.
pub fn random_ns_box(vertices: &(Vec<NsBox>, Vec<NsBox>), rng: &mut ChaCha8Rng) -> NsBox {
    let all: Vec<NsBox> = vertices.0.iter().chain(&vertices.1).cloned().collect();
    random_mixture(&all, rng)
}

/// A random point of the local polytope.
pub fn random_local_box(local: &[NsBox], rng: &mut ChaCha8Rng) -> NsBox {
    random_mixture(local, rng)
}

/// A random valid point of the PR / anti-PR / Pc section.
pub fn random_plane_coords(rng: &mut ChaCha8Rng) -> PlaneCoords {
    loop {
        let xi = rng.gen_range(0.0..=1.0);
        let gamma = rng.gen_range(-1.0..=1.0);
        let c = PlaneCoords::new(xi, gamma);
        if c.in_constraint_region() && NsBox::from_plane(c).is_ok() {
            return c;
        }
    }
}

pub fn random_wiring(rng: &mut ChaCha8Rng) -> PartyWiring {
    PartyWiring::decode(rng.gen_range(0..PARTY_WIRING_COUNT as u16)).expect("id in range")
}

/// Independent causal-chain evaluation for crossed query orders.
///
/// Draws the first-queried output of each box from its single-side marginal
/// and the remaining output from the conditional, summing over hidden
/// outcomes. `reference_input` selects the unobserved input setting used to
/// evaluate the marginals (0: anchored on Alice's first draw, 1: on Bob's);
/// non-signaling makes the two agree.
pub fn chain_compose_crossed(
    p1: &NsBox,
    p2: &NsBox,
    w: &ProtocolWiring,
    reference_input: u8,
) -> NsBox {
    assert_ne!(w.alice.first_box(), w.bob.first_box(), "crossed orders only");
    let (pa, pb) = match w.alice.first_box() {
        FirstBox::Box1 => (p1, p2),
        FirstBox::Box2 => (p2, p1),
    };
    // pa: Alice queries first; pb: Bob queries first. The first draw uses
    // the marginal at the reference setting of the not-yet-supplied input;
    // the conditional is normalized by the marginal at the actual input.
    // Only non-signaling makes the two marginals (and hence both chains)
    // agree with the product formula.
    let marg_a = |p: &NsBox, u: u8, other: u8, a: u8| -> f64 {
        (0..2u8).map(|b| p.prob(u, other, a, b)).sum()
    };
    let marg_b = |p: &NsBox, v: u8, other: u8, b: u8| -> f64 {
        (0..2u8).map(|a| p.prob(other, v, a, b)).sum()
    };
    let mut out = [0.0; 16];
    for x in 0..2u8 {
        for y in 0..2u8 {
            for a_first in 0..2u8 {
                for a_second in 0..2u8 {
                    for b_first in 0..2u8 {
                        for b_second in 0..2u8 {
                            let u_a = w.alice.first_input(x);
                            let v_b = w.bob.first_input(y);
                            let u_cross = w.alice.second_input(x, a_first);
                            let v_cross = w.bob.second_input(y, b_first);
                            // box pa holds (alice in u_a, bob in v_cross)
                            let prior_a = marg_a(pa, u_a, reference_input, a_first);
                            let norm_a = marg_a(pa, u_a, v_cross, a_first);
                            let w_a = if norm_a > 0.0 {
                                prior_a * (pa.prob(u_a, v_cross, a_first, b_second) / norm_a)
                            } else {
                                0.0
                            };
                            let prior_b = marg_b(pb, v_b, reference_input, b_first);
                            let norm_b = marg_b(pb, v_b, u_cross, b_first);
                            let w_b = if norm_b > 0.0 {
                                prior_b * (pb.prob(u_cross, v_b, a_second, b_first) / norm_b)
                            } else {
                                0.0
                            };
                            let weight = w_a * w_b;
                            if weight == 0.0 {
                                continue;
                            }
                            let a = w.alice.output(x, a_first, a_second);
                            let b = w.bob.output(y, b_first, b_second);
                            out[table_index(x, y, a, b)] += weight;
                        }
                    }
                }
            }
        }
    }
    NsBox::from_table(out)
}
