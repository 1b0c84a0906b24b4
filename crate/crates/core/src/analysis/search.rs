//! Exhaustive search for the best two-copy wiring pair.
//!
//! The objective `chsh(compose(b, b, w))` is evaluated over all 32768 x 32768
//! deterministic strategy pairs without composing boxes pair by pair. For a
//! fixed Alice strategy the composed CHSH value decomposes as
//! `K[0][r0(bob)] + K[1][r1(bob)]`, where `r_y` encodes Bob's strategy
//! restricted to his input `y` (first-box input bit, plus the second-box
//! input, output-parity flag and sign for each first-box outcome). The two
//! halves of Bob's strategy are independent bits, so the Bob-side maximum
//! separates into `max K[0] + max K[1]`, and tie enumeration only touches the
//! few Alice strategies whose separable bound reaches the maximum. The same
//! decomposition covers opposite query orders through the parity transforms
//! of the box.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxes::NsBox;
use crate::error::{Error, Result};
use crate::io::to_json;
use crate::wiring::{compose, ProtocolWiring, PARTY_WIRING_COUNT};

/// Alice/Bob strategies ignoring the order bit.
const N_CORES: usize = (PARTY_WIRING_COUNT / 2) as usize;
/// Distinct per-input Bob half-strategy signatures.
const N_R: usize = 128;

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub include_crossed: bool,
    /// Worker threads for the sweep; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Cap on collected maximizer pairs; the tie count is always exact.
    pub max_pairs: usize,
    /// Pairs within this distance of the maximum count as maximizers.
    pub tie_tolerance: f64,
    pub checkpoint: Option<PathBuf>,
    /// Alice strategies per checkpoint chunk.
    pub chunk_size: usize,
}

impl SearchOptions {
    pub fn new(include_crossed: bool) -> Self {
        Self {
            include_crossed,
            threads: None,
            max_pairs: 4096,
            tie_tolerance: 1e-9,
            checkpoint: None,
            chunk_size: 2048,
        }
    }
}

/// Outcome of a search over wiring pairs.
#[derive(Clone, Debug)]
pub struct SearchResult {
    pub best_chsh: f64,
    /// Maximizing `(alice id, bob id)` pairs in increasing lexicographic
    /// order, truncated to `max_pairs`.
    pub best_pairs: Vec<(u16, u16)>,
    pub evaluated: u64,
    pub include_crossed: bool,
    /// Exact number of maximizing pairs (may exceed `best_pairs.len()`).
    pub tie_count: u64,
}

#[derive(Serialize)]
struct SearchResultWire<'a> {
    best_chsh: f64,
    best_pairs: &'a [(u16, u16)],
    evaluated: u64,
    include_crossed: bool,
}

impl SearchResult {
    /// `{best_chsh, best_pairs: [[a, b], ...], evaluated, include_crossed}`.
    pub fn to_json(&self) -> String {
        to_json(&SearchResultWire {
            best_chsh: self.best_chsh,
            best_pairs: &self.best_pairs,
            evaluated: self.evaluated,
            include_crossed: self.include_crossed,
        })
        .expect("search result serialization is infallible")
    }
}

/// Box contractions used by the kernel, all indexed `[alice in][bob in][..][..]`.
struct Tables {
    /// `p[u][v][a][b]` = P(ab|uv)
    p: [[[[f64; 2]; 2]; 2]; 2],
    /// parity transform over both outputs
    s: [[[[f64; 2]; 2]; 2]; 2],
    /// Alice outcome kept, Bob output parity: `g[u][v][a][kb]`
    g: [[[[f64; 2]; 2]; 2]; 2],
    /// Bob outcome kept, Alice output parity: `h[u][v][b][ka]`
    h: [[[[f64; 2]; 2]; 2]; 2],
}

fn build_tables(b: &NsBox) -> Tables {
    let mut t = Tables {
        p: [[[[0.0; 2]; 2]; 2]; 2],
        s: [[[[0.0; 2]; 2]; 2]; 2],
        g: [[[[0.0; 2]; 2]; 2]; 2],
        h: [[[[0.0; 2]; 2]; 2]; 2],
    };
    let sign = |k: usize, o: usize| if k == 1 && o == 1 { -1.0 } else { 1.0 };
    for u in 0..2 {
        for v in 0..2 {
            for a in 0..2 {
                for bb in 0..2 {
                    t.p[u][v][a][bb] = b.prob(u as u8, v as u8, a as u8, bb as u8);
                }
            }
            for ka in 0..2 {
                for kb in 0..2 {
                    let mut acc = 0.0;
                    for a in 0..2 {
                        for bb in 0..2 {
                            acc += sign(ka, a) * sign(kb, bb) * t.p[u][v][a][bb];
                        }
                    }
                    t.s[u][v][ka][kb] = acc;
                }
            }
            for a in 0..2 {
                for kb in 0..2 {
                    t.g[u][v][a][kb] =
                        sign(kb, 0) * t.p[u][v][a][0] + sign(kb, 1) * t.p[u][v][a][1];
                }
            }
            for bb in 0..2 {
                for ka in 0..2 {
                    t.h[u][v][bb][ka] =
                        sign(ka, 0) * t.p[u][v][0][bb] + sign(ka, 1) * t.p[u][v][1][bb];
                }
            }
        }
    }
    t
}

/// Second-box input, output-parity flag and sign for one (input, first-outcome)
/// cell of a strategy: `(-1)^{h(in, fo, o2)} = sign * (-1)^{parity * o2}`.
#[derive(Clone, Copy)]
struct Desc {
    input: usize,
    parity: usize,
    sign: f64,
}

fn desc(g_table: u8, h_table: u8, inp: u8, first_out: u8) -> Desc {
    let g_bit = (g_table >> ((inp << 1) | first_out)) & 1;
    let h0 = (h_table >> ((inp << 2) | (first_out << 1))) & 1;
    let h1 = (h_table >> ((inp << 2) | (first_out << 1) | 1)) & 1;
    Desc {
        input: g_bit as usize,
        parity: (h0 ^ h1) as usize,
        sign: if h0 == 1 { -1.0 } else { 1.0 },
    }
}

fn core_tables(core: u16) -> (u8, u8, u8) {
    ((core & 3) as u8, ((core >> 2) & 15) as u8, ((core >> 6) & 255) as u8)
}

/// Bob's half-strategy signature at input `y`: 7 bits.
fn bob_half_index(core: u16, y: u8) -> u8 {
    let (f, g, h) = core_tables(core);
    let mut r = (f >> y) & 1;
    for fo in 0..2u8 {
        let d = desc(g, h, y, fo);
        let packed =
            d.input as u8 | ((d.parity as u8) << 1) | if d.sign < 0.0 { 4 } else { 0 };
        r |= packed << (1 + 3 * fo);
    }
    r
}

#[derive(Clone, Copy)]
struct RDesc {
    f: usize,
    d: [Desc; 2],
}

fn r_descriptors() -> Vec<RDesc> {
    (0..N_R as u8)
        .map(|r| {
            let unpack = |fo: u8| {
                let dd = (r >> (1 + 3 * fo)) & 7;
                Desc {
                    input: (dd & 1) as usize,
                    parity: ((dd >> 1) & 1) as usize,
                    sign: if dd & 4 != 0 { -1.0 } else { 1.0 },
                }
            };
            RDesc { f: (r & 1) as usize, d: [unpack(0), unpack(1)] }
        })
        .collect()
}

/// Alice-side context: first-box input bit per `x`, descriptor per `(x, a1)`.
struct CoreCtx {
    f: [usize; 2],
    d: [[Desc; 2]; 2],
}

fn core_ctx(core: u16) -> CoreCtx {
    let (f, g, h) = core_tables(core);
    let mut ctx = CoreCtx { f: [0; 2], d: [[Desc { input: 0, parity: 0, sign: 1.0 }; 2]; 2] };
    for x in 0..2u8 {
        ctx.f[x as usize] = ((f >> x) & 1) as usize;
        for a1 in 0..2u8 {
            ctx.d[x as usize][a1 as usize] = desc(g, h, x, a1);
        }
    }
    ctx
}

/// `K[y][r]`: CHSH contribution of Bob half-signature `r` at input `y`,
/// for one Alice strategy.
fn k_tables(t: &Tables, ctx: &CoreCtx, rdesc: &[RDesc], crossed: bool) -> [[f64; N_R]; 2] {
    let mut k = [[0.0f64; N_R]; 2];
    for (y, ky) in k.iter_mut().enumerate() {
        for (r, rd) in rdesc.iter().enumerate() {
            let mut acc = 0.0;
            for x in 0..2 {
                let sxy = if x == 1 && y == 1 { -1.0 } else { 1.0 };
                let fa = ctx.f[x];
                for a1 in 0..2 {
                    let da = ctx.d[x][a1];
                    for bo in 0..2 {
                        let db = rd.d[bo];
                        let term = if crossed {
                            da.sign
                                * db.sign
                                * t.g[fa][db.input][a1][db.parity]
                                * t.h[da.input][rd.f][bo][da.parity]
                        } else {
                            t.p[fa][rd.f][a1][bo]
                                * da.sign
                                * db.sign
                                * t.s[da.input][db.input][da.parity][db.parity]
                        };
                        acc += sxy * term;
                    }
                }
            }
            ky[r] = acc;
        }
    }
    k
}

fn separable_max(k: &[[f64; N_R]; 2]) -> f64 {
    let m0 = k[0].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let m1 = k[1].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m0 + m1
}

/// Resumable pass-1 state. Maxima are stored as IEEE bit patterns so the
/// file round-trips exactly (JSON has no negative infinity).
#[derive(Serialize, Deserialize)]
struct Checkpoint {
    box_bits: Vec<u64>,
    include_crossed: bool,
    chunk_size: usize,
    core_best_same: Vec<Option<u64>>,
    core_best_crossed: Vec<Option<u64>>,
}

impl Checkpoint {
    fn fresh(b: &NsBox, include_crossed: bool, chunk_size: usize) -> Self {
        Self {
            box_bits: b.table().iter().map(|x| x.to_bits()).collect(),
            include_crossed,
            chunk_size,
            core_best_same: vec![None; N_CORES],
            core_best_crossed: vec![None; N_CORES],
        }
    }

    fn load(path: &Path, b: &NsBox, include_crossed: bool, chunk_size: usize) -> Result<Self> {
        let raw = fs::read_to_string(path)?;
        let cp: Checkpoint =
            serde_json::from_str(&raw).map_err(|e| Error::CheckpointMismatch(e.to_string()))?;
        let bits: Vec<u64> = b.table().iter().map(|x| x.to_bits()).collect();
        if cp.box_bits != bits {
            return Err(Error::CheckpointMismatch("different box".into()));
        }
        if cp.include_crossed != include_crossed {
            return Err(Error::CheckpointMismatch("different include_crossed flag".into()));
        }
        if cp.chunk_size != chunk_size
            || cp.core_best_same.len() != N_CORES
            || cp.core_best_crossed.len() != N_CORES
        {
            return Err(Error::CheckpointMismatch("different partition".into()));
        }
        Ok(cp)
    }

    fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string(self).expect("checkpoint serializes"))?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

/// Exact maximum of `chsh(compose(b, b, w))` over all deterministic wiring
/// pairs (or the same-order subset when `include_crossed` is false).
pub fn optimal_two_copy_search(b: &NsBox, include_crossed: bool) -> Result<SearchResult> {
    optimal_two_copy_search_with(b, &SearchOptions::new(include_crossed), None)
}

/// Number of pairs in scope for a sweep.
fn pair_total(include_crossed: bool) -> u64 {
    let n = PARTY_WIRING_COUNT as u64;
    if include_crossed {
        n * n
    } else {
        n * (n / 2)
    }
}

pub fn optimal_two_copy_search_with(
    b: &NsBox,
    opts: &SearchOptions,
    progress: Option<&(dyn Fn(u64, u64) + Sync)>,
) -> Result<SearchResult> {
    b.ensure_nonsignaling()?;
    let tables = build_tables(b);
    let rdesc = r_descriptors();
    let evaluated = pair_total(opts.include_crossed);
    let pairs_per_core = evaluated / N_CORES as u64;

    let mut cp = match &opts.checkpoint {
        Some(path) if path.exists() => {
            Checkpoint::load(path, b, opts.include_crossed, opts.chunk_size)?
        }
        _ => Checkpoint::fresh(b, opts.include_crossed, opts.chunk_size),
    };

    let pool = match opts.threads {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Parse(e.to_string()))?,
        ),
        None => None,
    };
    fn with_pool<R: Send>(
        pool: &Option<rayon::ThreadPool>,
        f: impl FnOnce() -> R + Send,
    ) -> R {
        match pool {
            Some(p) => p.install(f),
            None => f(),
        }
    }

    // Pass 1: per-core separable maxima, chunked for checkpointing.
    let chunk_size = opts.chunk_size.max(1);
    let mut done_cores = 0u64;
    let mut start = 0usize;
    while start < N_CORES {
        let end = (start + chunk_size).min(N_CORES);
        let chunk_done = cp.core_best_same[start..end].iter().all(Option::is_some);
        if !chunk_done {
            let include_crossed = opts.include_crossed;
            let tables_ref = &tables;
            let rdesc_ref = &rdesc;
            let results: Vec<(f64, f64)> = with_pool(&pool, || {
                (start..end)
                    .into_par_iter()
                    .map(|core| {
                        let ctx = core_ctx(core as u16);
                        let same = separable_max(&k_tables(tables_ref, &ctx, rdesc_ref, false));
                        let crossed = if include_crossed {
                            separable_max(&k_tables(tables_ref, &ctx, rdesc_ref, true))
                        } else {
                            f64::NEG_INFINITY
                        };
                        (same, crossed)
                    })
                    .collect()
            });
            for (i, (same, crossed)) in results.into_iter().enumerate() {
                cp.core_best_same[start + i] = Some(same.to_bits());
                cp.core_best_crossed[start + i] = Some(crossed.to_bits());
            }
            if let Some(path) = &opts.checkpoint {
                cp.save(path)?;
            }
        }
        done_cores += (end - start) as u64;
        if let Some(cb) = progress {
            cb(done_cores * pairs_per_core, evaluated);
        }
        start = end;
    }

    let best = cp
        .core_best_same
        .iter()
        .chain(&cp.core_best_crossed)
        .filter_map(|v| v.map(f64::from_bits))
        .fold(f64::NEG_INFINITY, f64::max);
    let theta = best - opts.tie_tolerance;

    // Precompute Bob half-signatures once.
    let mut bob_r = vec![[0u8; 2]; N_CORES];
    for (core, r) in bob_r.iter_mut().enumerate() {
        r[0] = bob_half_index(core as u16, 0);
        r[1] = bob_half_index(core as u16, 1);
    }

    // Pass 2: enumerate maximizers in increasing (alice id, bob id) order.
    let mut tie_count = 0u64;
    let mut best_pairs: Vec<(u16, u16)> = Vec::new();
    for core in 0..N_CORES {
        let same_max = f64::from_bits(cp.core_best_same[core].expect("pass 1 complete"));
        let crossed_max = f64::from_bits(cp.core_best_crossed[core].expect("pass 1 complete"));
        if same_max.max(crossed_max) < theta {
            continue;
        }
        let ctx = core_ctx(core as u16);
        let k_same = k_tables(&tables, &ctx, &rdesc, false);
        let k_crossed = if opts.include_crossed && crossed_max >= theta {
            Some(k_tables(&tables, &ctx, &rdesc, true))
        } else {
            None
        };
        for o_a in 0..2u16 {
            let alice_id = ((core as u16) << 1) | o_a;
            for bob_id in 0..PARTY_WIRING_COUNT as u16 {
                let k = if (bob_id & 1) == o_a {
                    if same_max < theta {
                        continue;
                    }
                    &k_same
                } else {
                    match &k_crossed {
                        Some(k) => k,
                        None => continue,
                    }
                };
                let bc = (bob_id >> 1) as usize;
                let v = k[0][bob_r[bc][0] as usize] + k[1][bob_r[bc][1] as usize];
                if v >= theta {
                    tie_count += 1;
                    if best_pairs.len() < opts.max_pairs {
                        best_pairs.push((alice_id, bob_id));
                    }
                }
            }
        }
    }

    Ok(SearchResult {
        best_chsh: best,
        best_pairs,
        evaluated,
        include_crossed: opts.include_crossed,
        tie_count,
    })
}

/// Evaluates `n` seeded random pairs by direct composition. A cheap sanity
/// mode: its maximum can only reach, never exceed, the exhaustive one.
pub fn sampled_search(
    b: &NsBox,
    n: u64,
    seed: u64,
    include_crossed: bool,
) -> Result<SearchResult> {
    b.ensure_nonsignaling()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled: Vec<(u16, u16, f64)> = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let alice_id: u16 = rng.gen_range(0..PARTY_WIRING_COUNT as u16);
        let bob_id: u16 = if include_crossed {
            rng.gen_range(0..PARTY_WIRING_COUNT as u16)
        } else {
            (rng.gen_range(0..(PARTY_WIRING_COUNT / 2) as u16) << 1) | (alice_id & 1)
        };
        let w = ProtocolWiring::from_ids(alice_id, bob_id)?;
        let v = compose(b, b, &w)?.chsh();
        sampled.push((alice_id, bob_id, v));
    }
    let best = sampled.iter().map(|&(_, _, v)| v).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9;
    let mut pairs: Vec<(u16, u16)> = sampled
        .into_iter()
        .filter(|&(_, _, v)| v >= best - tol)
        .map(|(a, bb, _)| (a, bb))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    let tie_count = pairs.len() as u64;
    Ok(SearchResult {
        best_chsh: best,
        best_pairs: pairs,
        evaluated: n,
        include_crossed,
        tie_count,
    })
}
