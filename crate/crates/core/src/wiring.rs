//! Deterministic two-copy wiring strategies and exact box composition.
//!
//! Each party holds one side of two shared boxes and plays a deterministic
//! strategy: an order (which box to query first), an input map for the first
//! box, an input map for the second box (which may depend on the first
//! output), and an output map over both outputs. A strategy is encoded in a
//! 15-bit id with layout
//!
//! ```text
//! bit 0      order (0 = box 1 first, 1 = box 2 first)
//! bits 1-2   f truth table, bit x      = f(x)
//! bits 3-6   g truth table, bit 2x+o1  = g(x, o1)
//! bits 7-14  h truth table, bit 4x+2o1+o2 = h(x, o1, o2)
//! ```
//!
//! so there are exactly 2 * 4 * 16 * 256 = 32768 strategies per party.
//! Probabilistic strategies are excluded from enumeration: the CHSH value of
//! the composed box is bilinear in the two parties' strategy mixtures, so a
//! linear objective attains its optimum at a deterministic pair.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boxes::{table_index, NsBox};
use crate::error::{Error, Result};

/// Number of distinct deterministic strategies per party.
pub const PARTY_WIRING_COUNT: u32 = 32_768;

/// Which of the two shared boxes a party queries first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FirstBox {
    Box1,
    Box2,
}

/// One party's deterministic two-copy strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartyWiring {
    first: FirstBox,
    f: u8,
    g: u8,
    h: u8,
}

impl PartyWiring {
    pub fn from_tables(first: FirstBox, f: u8, g: u8, h: u8) -> Result<Self> {
        if f >= 4 {
            return Err(Error::TruthTableOutOfRange(f, "f (2 bits)"));
        }
        if g >= 16 {
            return Err(Error::TruthTableOutOfRange(g, "g (4 bits)"));
        }
        Ok(Self { first, f, g, h })
    }

    #[inline]
    pub fn first_box(&self) -> FirstBox {
        self.first
    }

    /// Input to the first-used box, as a function of the party input.
    #[inline]
    pub fn first_input(&self, x: u8) -> u8 {
        (self.f >> x) & 1
    }

    /// Input to the second-used box, from (party input, first output).
    #[inline]
    pub fn second_input(&self, x: u8, first_out: u8) -> u8 {
        (self.g >> ((x << 1) | first_out)) & 1
    }

    /// The party's final output, from (party input, first output, second output).
    #[inline]
    pub fn output(&self, x: u8, first_out: u8, second_out: u8) -> u8 {
        (self.h >> ((x << 2) | (first_out << 1) | second_out)) & 1
    }

    pub fn encode(&self) -> u16 {
        let order = match self.first {
            FirstBox::Box1 => 0u16,
            FirstBox::Box2 => 1,
        };
        order | (self.f as u16) << 1 | (self.g as u16) << 3 | (self.h as u16) << 7
    }

    pub fn decode(id: u16) -> Result<Self> {
        if u32::from(id) >= PARTY_WIRING_COUNT {
            return Err(Error::WiringIdOutOfRange(u32::from(id)));
        }
        let first = if id & 1 == 0 { FirstBox::Box1 } else { FirstBox::Box2 };
        Ok(Self {
            first,
            f: ((id >> 1) & 0b11) as u8,
            g: ((id >> 3) & 0b1111) as u8,
            h: ((id >> 7) & 0xff) as u8,
        })
    }
}

/// Yields all 32768 party strategies in increasing id order.
pub fn enumerate_party_wirings() -> impl Iterator<Item = PartyWiring> {
    (0..PARTY_WIRING_COUNT as u16).map(|id| PartyWiring::decode(id).expect("id in range"))
}

/// A full protocol: one strategy per party.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProtocolWiring {
    pub alice: PartyWiring,
    pub bob: PartyWiring,
}

impl ProtocolWiring {
    pub fn new(alice: PartyWiring, bob: PartyWiring) -> Self {
        Self { alice, bob }
    }

    pub fn from_ids(alice: u16, bob: u16) -> Result<Self> {
        Ok(Self {
            alice: PartyWiring::decode(alice)?,
            bob: PartyWiring::decode(bob)?,
        })
    }

    /// The sequential distillation protocol: both parties feed their input
    /// into box 1, feed `x * a1` into box 2, and output `a1 ^ a2`.
    pub fn distillation() -> Self {
        let party = PartyWiring::from_tables(FirstBox::Box1, 0b10, 0b1000, 0b0110_0110)
            .expect("tables in range");
        Self { alice: party, bob: party }
    }

    /// The parity protocol: both boxes receive the party input directly and
    /// the output is the XOR of both outputs.
    pub fn xor() -> Self {
        let party = PartyWiring::from_tables(FirstBox::Box1, 0b10, 0b1100, 0b0110_0110)
            .expect("tables in range");
        Self { alice: party, bob: party }
    }

    pub fn ids(&self) -> (u16, u16) {
        (self.alice.encode(), self.bob.encode())
    }
}

/// Exact distribution of the composed box when both parties play `w` on two
/// independent copies `p1`, `p2`.
///
/// The hidden-outcome sum assigns box `i` the inputs dictated by each
/// party's strategy; when the parties query the boxes in opposite orders the
/// same product formula equals the causal-chain evaluation (first outputs
/// drawn from marginals, second outputs from conditionals), which
/// non-signaling makes well-defined. Signaling inputs are rejected.
pub fn compose(p1: &NsBox, p2: &NsBox, w: &ProtocolWiring) -> Result<NsBox> {
    p1.ensure_nonsignaling()?;
    p2.ensure_nonsignaling()?;
    Ok(compose_unchecked(p1, p2, w))
}

pub(crate) fn compose_unchecked(p1: &NsBox, p2: &NsBox, w: &ProtocolWiring) -> NsBox {
    let mut out = [0.0; 16];
    for x in 0..2u8 {
        for y in 0..2u8 {
            for a1 in 0..2u8 {
                for b1 in 0..2u8 {
                    for a2 in 0..2u8 {
                        for b2 in 0..2u8 {
                            // box inputs per party, honoring query order
                            let (u1, u2, fst_a, snd_a) = match w.alice.first_box() {
                                FirstBox::Box1 => {
                                    (w.alice.first_input(x), w.alice.second_input(x, a1), a1, a2)
                                }
                                FirstBox::Box2 => {
                                    (w.alice.second_input(x, a2), w.alice.first_input(x), a2, a1)
                                }
                            };
                            let (v1, v2, fst_b, snd_b) = match w.bob.first_box() {
                                FirstBox::Box1 => {
                                    (w.bob.first_input(y), w.bob.second_input(y, b1), b1, b2)
                                }
                                FirstBox::Box2 => {
                                    (w.bob.second_input(y, b2), w.bob.first_input(y), b2, b1)
                                }
                            };
                            let weight = p1.prob(u1, v1, a1, b1) * p2.prob(u2, v2, a2, b2);
                            if weight == 0.0 {
                                continue;
                            }
                            let a = w.alice.output(x, fst_a, snd_a);
                            let b = w.bob.output(y, fst_b, snd_b);
                            out[table_index(x, y, a, b)] += weight;
                        }
                    }
                }
            }
        }
    }
    NsBox::from_table(out)
}

fn sample_alice_output(p: &NsBox, bob_state: Option<(u8, u8)>, u: u8, rng: &mut ChaCha8Rng) -> u8 {
    match bob_state {
        Some((v, ob)) => {
            let p1 = p.prob(u, v, 1, ob);
            let tot = p.prob(u, v, 0, ob) + p1;
            u8::from(tot > 0.0 && rng.gen_bool((p1 / tot).clamp(0.0, 1.0)))
        }
        None => u8::from(rng.gen_bool(p.alice_marginal(u, 1).clamp(0.0, 1.0))),
    }
}

fn sample_bob_output(p: &NsBox, alice_state: Option<(u8, u8)>, v: u8, rng: &mut ChaCha8Rng) -> u8 {
    match alice_state {
        Some((u, oa)) => {
            let p1 = p.prob(u, v, oa, 1);
            let tot = p.prob(u, v, oa, 0) + p1;
            u8::from(tot > 0.0 && rng.gen_bool((p1 / tot).clamp(0.0, 1.0)))
        }
        None => u8::from(rng.gen_bool(p.bob_marginal(v, 1).clamp(0.0, 1.0))),
    }
}

/// Monte Carlo estimate of the composed box, simulating the causal protocol:
/// first outputs are drawn from single-side marginals, second outputs from
/// the box conditionals. Sanity harness for `compose`; `trials` samples per
/// input pair.
pub fn estimate_composed(
    p1: &NsBox,
    p2: &NsBox,
    w: &ProtocolWiring,
    trials: u32,
    seed: u64,
) -> Result<NsBox> {
    p1.ensure_nonsignaling()?;
    p2.ensure_nonsignaling()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let boxes = [p1, p2];
    let ka = match w.alice.first_box() {
        FirstBox::Box1 => 0usize,
        FirstBox::Box2 => 1,
    };
    let kb = match w.bob.first_box() {
        FirstBox::Box1 => 0usize,
        FirstBox::Box2 => 1,
    };
    let mut out = [0.0; 16];
    for x in 0..2u8 {
        for y in 0..2u8 {
            for _ in 0..trials {
                // per-box recorded (input, output) on each side
                let mut a_state: [Option<(u8, u8)>; 2] = [None; 2];
                let mut b_state: [Option<(u8, u8)>; 2] = [None; 2];
                let u = w.alice.first_input(x);
                let a_first = sample_alice_output(boxes[ka], b_state[ka], u, &mut rng);
                a_state[ka] = Some((u, a_first));
                let v = w.bob.first_input(y);
                let b_first = sample_bob_output(boxes[kb], a_state[kb], v, &mut rng);
                b_state[kb] = Some((v, b_first));
                let u2 = w.alice.second_input(x, a_first);
                let a_second = sample_alice_output(boxes[1 - ka], b_state[1 - ka], u2, &mut rng);
                a_state[1 - ka] = Some((u2, a_second));
                let v2 = w.bob.second_input(y, b_first);
                let b_second = sample_bob_output(boxes[1 - kb], a_state[1 - kb], v2, &mut rng);
                let a = w.alice.output(x, a_first, a_second);
                let b = w.bob.output(y, b_first, b_second);
                out[table_index(x, y, a, b)] += 1.0 / trials as f64;
            }
        }
    }
    Ok(NsBox::from_table(out))
}
