//! Deterministic template-grammar title generator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{normalize_title, Corpus, Region, Title};
use crate::error::{Error, Result};
use crate::gazetteer::{CoarseTag, Gazetteer};

#[derive(Clone, Copy)]
enum Slot {
    Res,
    Fun,
    Loc,
    /// Connector, "of" when the gazetteer has it.
    Of,
    /// Connector, "and" when the gazetteer has it.
    And,
}

use Slot::*;

// (weight, slots). Optional trailing location is added separately.
const TEMPLATES: &[(u32, &[Slot])] = &[
    (10, &[Res]),
    (12, &[Res, Res]),
    (16, &[Fun, Res]),
    (12, &[Res, Fun, Res]),
    (8, &[Res, Of, Fun]),
    (6, &[Res, Res, Of, Fun]),
    (6, &[Fun, And, Fun, Res]),
    (4, &[Res, And, Res]),
    (5, &[Res, Fun, Fun, Res]),
    (3, &[Res, Res, Fun, Res]),
];

struct Pools<'a> {
    res: Vec<&'a str>,
    fun: Vec<&'a str>,
    loc: Vec<&'a str>,
    other: Vec<&'a str>,
}

impl<'a> Pools<'a> {
    fn connector<R: Rng>(&self, preferred: &str, rng: &mut R) -> &'a str {
        self.other
            .iter()
            .copied()
            .find(|t| *t == preferred)
            .unwrap_or_else(|| self.other.choose(rng).copied().unwrap())
    }

    fn draw<R: Rng>(&self, slot: Slot, rng: &mut R) -> &'a str {
        let pool = match slot {
            Res => &self.res,
            Fun => &self.fun,
            Loc => &self.loc,
            Of => return self.connector("of", rng),
            And => return self.connector("and", rng),
        };
        pool.choose(rng).copied().unwrap()
    }
}

fn display_form(token: &str, rng: &mut impl Rng) -> String {
    if token == "and" && rng.gen_bool(0.5) {
        return "&".to_string();
    }
    let mut chars = token.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Generates `count` titles from weighted templates over the gazetteer's
/// RES / FUN / LOC / O pools; lengths stay within 1..=6. Every title's
/// raw text normalizes back to its tokens.
pub fn synth_corpus(gazetteer: &Gazetteer, seed: u64, count: usize) -> Result<Corpus> {
    let pools = Pools {
        res: gazetteer.tokens_with_tag(CoarseTag::Res),
        fun: gazetteer.tokens_with_tag(CoarseTag::Fun),
        loc: gazetteer.tokens_with_tag(CoarseTag::Loc),
        other: gazetteer.tokens_with_tag(CoarseTag::O),
    };
    for (tag, pool) in [
        (CoarseTag::Res, &pools.res),
        (CoarseTag::Fun, &pools.fun),
        (CoarseTag::Loc, &pools.loc),
        (CoarseTag::O, &pools.other),
    ] {
        if pool.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "gazetteer has no {tag} tokens; synthesis needs every tag class"
            )));
        }
    }
    let total_weight: u32 = TEMPLATES.iter().map(|(w, _)| w).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut titles = Vec::with_capacity(count);
    let mut profile = 0usize;
    let mut left_in_profile = 0usize;
    let mut region = Region::Us;
    while titles.len() < count {
        if left_in_profile == 0 {
            profile += 1;
            left_in_profile = rng.gen_range(1..=5);
            region = if rng.gen_bool(0.567) {
                Region::Us
            } else {
                Region::Asia
            };
        }
        left_in_profile -= 1;

        let mut pick = rng.gen_range(0..total_weight);
        let mut slots: &[Slot] = TEMPLATES[0].1;
        for (w, s) in TEMPLATES {
            if pick < *w {
                slots = s;
                break;
            }
            pick -= w;
        }
        let mut tokens: Vec<&str> = slots.iter().map(|&s| pools.draw(s, &mut rng)).collect();
        let room = 6 - tokens.len();
        if room > 0 && rng.gen_bool(0.25) {
            let n_loc = if room >= 2 && rng.gen_bool(0.4) { 2 } else { 1 };
            for _ in 0..n_loc {
                tokens.push(pools.draw(Loc, &mut rng));
            }
        }
        let raw = tokens
            .iter()
            .map(|t| display_form(t, &mut rng))
            .collect::<Vec<_>>()
            .join(" ");
        let normalized = normalize_title(&raw);
        debug_assert_eq!(normalized.tokens, tokens);
        titles.push(Title {
            raw,
            tokens: normalized.tokens,
            region,
            profile_id: Some(format!("p{profile:06}")),
        });
    }
    Ok(Corpus::new(
        titles,
        format!("synth(seed={seed}, count={count})"),
    ))
}
