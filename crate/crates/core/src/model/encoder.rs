use crate::corpus::vocab::SEP;
use crate::error::{Error, Result};
use crate::nn::gru::{gru_backward, gru_forward, GruCache};
use crate::nn::tensor::axpy;
use crate::nn::{GruParams, Tensor};

/// Sentence encoder output: one `[forward; backward]` row per position.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedSource {
    pub states: Vec<Vec<f64>>,
    pub mask: Vec<f64>,
}

/// Fact encoder output. Rows at separator positions are zero and masked.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedFacts {
    pub states: Vec<Vec<f64>>,
    pub mask: Vec<f64>,
    pub gamma: Vec<u8>,
}

/// Per-position cell caches of both directions, for backprop.
#[derive(Clone, Debug)]
pub(crate) struct BiGruTape {
    pub ids: Vec<usize>,
    pub gamma: Option<Vec<u8>>,
    pub fwd: Vec<GruCache>,
    pub bwd: Vec<GruCache>,
}

fn check_ids(ids: &[usize], table: &Tensor, what: &str) -> Result<()> {
    if let Some(bad) = ids.iter().find(|id| **id >= table.rows()) {
        return Err(Error::Invalid(format!(
            "{what} id {bad} outside vocabulary of size {}",
            table.rows()
        )));
    }
    Ok(())
}

/// Runs both directions from a zero state. With `gamma`, the state carried
/// out of position `i` is multiplied by `gamma[i]` in each direction.
pub(crate) fn bigru_forward(
    table: &Tensor,
    fwd: &GruParams,
    bwd: &GruParams,
    ids: &[usize],
    gamma: Option<&[u8]>,
) -> (Vec<Vec<f64>>, BiGruTape) {
    let h = fwd.hidden_dim();
    let n = ids.len();
    let keep = |i: usize| gamma.map_or(true, |g| g[i] != 0);

    let mut fwd_states = Vec::with_capacity(n);
    let mut fwd_caches = Vec::with_capacity(n);
    let mut state = vec![0.0; h];
    for (i, id) in ids.iter().enumerate() {
        let (out, cache) = gru_forward(table.row(*id), &state, fwd);
        state = if keep(i) { out } else { vec![0.0; h] };
        fwd_states.push(state.clone());
        fwd_caches.push(cache);
    }

    let mut bwd_states = vec![Vec::new(); n];
    let mut bwd_caches = Vec::with_capacity(n);
    let mut state = vec![0.0; h];
    for i in (0..n).rev() {
        let (out, cache) = gru_forward(table.row(ids[i]), &state, bwd);
        state = if keep(i) { out } else { vec![0.0; h] };
        bwd_states[i] = state.clone();
        bwd_caches.push(cache);
    }
    bwd_caches.reverse();

    let rows = fwd_states
        .into_iter()
        .zip(bwd_states)
        .map(|(mut f, b)| {
            f.extend(b);
            f
        })
        .collect();
    let tape = BiGruTape {
        ids: ids.to_vec(),
        gamma: gamma.map(<[u8]>::to_vec),
        fwd: fwd_caches,
        bwd: bwd_caches,
    };
    (rows, tape)
}

/// Backward of [`bigru_forward`] given gradients on the state rows.
pub(crate) fn bigru_backward(
    fwd: &GruParams,
    bwd: &GruParams,
    tape: &BiGruTape,
    d_rows: &[Vec<f64>],
    d_table: &mut Tensor,
    g_fwd: &mut GruParams,
    g_bwd: &mut GruParams,
) {
    let h = fwd.hidden_dim();
    let n = tape.ids.len();
    let keep = |i: usize| tape.gamma.as_ref().map_or(true, |g| g[i] != 0);
    let e = d_table.cols();

    let mut carry = vec![0.0; h];
    for i in (0..n).rev() {
        let mut d_out = d_rows[i][..h].to_vec();
        axpy(1.0, &carry, &mut d_out);
        carry = vec![0.0; h];
        if keep(i) {
            let mut dx = vec![0.0; e];
            gru_backward(fwd, &tape.fwd[i], &d_out, g_fwd, &mut dx, &mut carry);
            axpy(1.0, &dx, d_table.row_mut(tape.ids[i]));
        }
    }

    let mut carry = vec![0.0; h];
    for i in 0..n {
        let mut d_out = d_rows[i][h..].to_vec();
        axpy(1.0, &carry, &mut d_out);
        carry = vec![0.0; h];
        if keep(i) {
            let mut dx = vec![0.0; e];
            gru_backward(bwd, &tape.bwd[i], &d_out, g_bwd, &mut dx, &mut carry);
            axpy(1.0, &dx, d_table.row_mut(tape.ids[i]));
        }
    }
}

/// Bidirectional encoding of a source sentence.
pub fn encode_sentence(ids: &[usize], table: &Tensor, fwd: &GruParams, bwd: &GruParams) -> Result<EncodedSource> {
    if ids.is_empty() {
        return Err(Error::Empty("source sentence".into()));
    }
    check_ids(ids, table, "source")?;
    let (states, _) = bigru_forward(table, fwd, bwd, ids, None);
    Ok(EncodedSource {
        mask: vec![1.0; ids.len()],
        states,
    })
}

/// Bidirectional encoding of a fact sequence with a state reset at every
/// separator, so each description is encoded on its own. `gamma` must be 0
/// exactly at separator ids.
pub fn encode_facts(
    ids: &[usize],
    gamma: &[u8],
    table: &Tensor,
    fwd: &GruParams,
    bwd: &GruParams,
) -> Result<EncodedFacts> {
    if gamma.len() != ids.len() {
        return Err(Error::shape("fact gamma", &[ids.len()], &[gamma.len()]));
    }
    if let Some(i) = ids.iter().zip(gamma).position(|(id, g)| (*id == SEP) != (*g == 0)) {
        return Err(Error::Invalid(format!(
            "gamma[{i}] = {} inconsistent with fact id {}",
            gamma[i], ids[i]
        )));
    }
    check_ids(ids, table, "fact")?;
    let (states, _) = bigru_forward(table, fwd, bwd, ids, Some(gamma));
    Ok(EncodedFacts {
        mask: gamma.iter().map(|g| f64::from(*g)).collect(),
        states,
        gamma: gamma.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::boundary_indicators;
    use crate::nn::init::glorot_uniform;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(seed: u64) -> (Tensor, GruParams, GruParams) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (
            glorot_uniform(12, 4, &mut rng),
            GruParams::init(4, 3, &mut rng),
            GruParams::init(4, 3, &mut rng),
        )
    }

    #[test]
    fn row_layout_and_errors() {
        let (t, f, b) = setup(0);
        let enc = encode_sentence(&[7], &t, &f, &b).unwrap();
        assert_eq!(enc.states.len(), 1);
        assert_eq!(enc.states[0].len(), 6);
        assert!(encode_sentence(&[], &t, &f, &b).is_err());
        assert!(encode_sentence(&[12], &t, &f, &b).is_err());
    }

    #[test]
    fn zero_everything_gives_zero_states() {
        let t = Tensor::zeros(&[8, 2]);
        let g = GruParams::zeros(2, 3);
        let enc = encode_sentence(&[5, 6, 7], &t, &g, &g).unwrap();
        assert!(enc.states.iter().flatten().all(|x| *x == 0.0));
    }

    #[test]
    fn reversal_mirrors_directions_under_swapped_params() {
        let (t, f, b) = setup(3);
        let ids = [5, 9, 6, 11];
        let rev: Vec<usize> = ids.iter().rev().copied().collect();
        let one = encode_sentence(&ids, &t, &f, &b).unwrap();
        let two = encode_sentence(&rev, &t, &b, &f).unwrap();
        for i in 0..ids.len() {
            assert_eq!(one.states[i][3..], two.states[ids.len() - 1 - i][..3]);
        }
    }

    #[test]
    fn separator_rows_are_zero_and_masked() {
        let (t, f, b) = setup(1);
        let ids = [5, 6, SEP, 7];
        let enc = encode_facts(&ids, &boundary_indicators(&ids), &t, &f, &b).unwrap();
        assert!(enc.states[2].iter().all(|x| *x == 0.0));
        assert_eq!(enc.mask, vec![1.0, 1.0, 0.0, 1.0]);
        assert!(encode_facts(&ids, &[1, 1, 1, 1], &t, &f, &b).is_err());
    }

    #[test]
    fn facts_are_encoded_independently() {
        let (t, f, b) = setup(2);
        let ids = [5, 6, SEP, 7, 8, 9];
        let both = encode_facts(&ids, &boundary_indicators(&ids), &t, &f, &b).unwrap();
        let second = encode_facts(&ids[3..], &[1, 1, 1], &t, &f, &b).unwrap();
        assert_eq!(&both.states[3..], &second.states[..]);
        // a single fact without separators is a plain sentence encoding
        let plain = encode_sentence(&ids[3..], &t, &f, &b).unwrap();
        assert_eq!(plain.states, second.states);
        let swapped = [7, 8, 9, SEP, 5, 6];
        let other = encode_facts(&swapped, &boundary_indicators(&swapped), &t, &f, &b).unwrap();
        assert_eq!(&other.states[..3], &both.states[3..]);
        assert_eq!(&other.states[4..], &both.states[..2]);
    }

    #[test]
    fn empty_fact_sequence_is_fully_masked() {
        let (t, f, b) = setup(4);
        let enc = encode_facts(&[], &[], &t, &f, &b).unwrap();
        assert!(enc.states.is_empty() && enc.mask.is_empty());
    }
}
