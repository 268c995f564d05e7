//! Seed derivation and RNG stream construction.
//!
//! All randomness in a run flows from one master seed. Module seeds are
//! derived with [`derive_seed`], and every contract valuation owns a stream
//! keyed by `(valuation seed, contract id)` so the same normal draws are
//! reused for that contract across market scenarios (common random numbers).

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a named module seed from the master seed.
///
/// FNV-1a over the label bytes followed by the little-endian master seed,
/// finished with one splitmix64 round. Stable across platforms and releases,
/// so partial reruns of a pipeline stay consistent.
pub fn derive_seed(master_seed: u64, label: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in label.as_bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(FNV_PRIME);
    }
    for &b in &master_seed.to_le_bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(FNV_PRIME);
    }
    splitmix64(&mut h)
}

/// 32-byte ChaCha seed for a per-contract valuation stream.
///
/// `scenario_tag` is zero when common random numbers are on; otherwise it
/// carries the bits of the market coefficient so scenarios decorrelate.
pub(crate) fn stream_seed(seed: u64, contract_id: u64, scenario_tag: u64) -> [u8; 32] {
    let mut state = seed
        ^ contract_id.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ scenario_tag.wrapping_mul(0xd1b5_4a32_d192_ed03);
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    bytes
}
