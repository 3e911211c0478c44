//! Inter-rater reliability between annotation sets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{majority, Agreement, AnnotationSet, CoarseTag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IrrReport {
    /// Mean pairwise agreement.
    pub percentage_agreement: f64,
    /// Mean of the three pairwise kappas.
    pub cohens_kappa: f64,
    /// κ(a,b), κ(a,c), κ(b,c).
    pub pairwise_kappa: [f64; 3],
    pub unanimous_count: usize,
    pub majority_count: usize,
    pub disagreement_count: usize,
}

impl IrrReport {
    pub fn total(&self) -> usize {
        self.unanimous_count + self.majority_count + self.disagreement_count
    }

    pub fn unanimous_share(&self) -> f64 {
        self.unanimous_count as f64 / self.total() as f64
    }
}

fn check_coverage(a: &AnnotationSet, b: &AnnotationSet) -> Result<()> {
    if a.is_empty() {
        return Err(Error::Empty("annotation set"));
    }
    if !a.same_coverage(b) {
        return Err(Error::Misaligned(format!(
            "annotators {} and {} cover different tokens",
            a.annotator_id, b.annotator_id
        )));
    }
    Ok(())
}

fn pair_agreement(a: &AnnotationSet, b: &AnnotationSet) -> usize {
    a.votes()
        .iter()
        .filter(|(t, tag)| b.vote(t) == Some(*tag))
        .count()
}

/// Mean over all annotator pairs of the fraction of tokens the pair agrees on.
pub fn percentage_agreement(sets: &[AnnotationSet]) -> Result<f64> {
    if sets.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two annotation sets".into(),
        ));
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            check_coverage(&sets[i], &sets[j])?;
            total += pair_agreement(&sets[i], &sets[j]) as f64 / sets[i].len() as f64;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Cohen's κ = (p_o − p_e) / (1 − p_e) with chance agreement from the two
/// annotators' marginal tag distributions.
pub fn cohens_kappa(a: &AnnotationSet, b: &AnnotationSet) -> Result<f64> {
    check_coverage(a, b)?;
    let n = a.len();
    let mut ca = [0usize; 4];
    let mut cb = [0usize; 4];
    let mut agree = 0usize;
    for (tok, ta) in a.votes() {
        let tb = b.vote(tok).expect("coverage checked");
        ca[*ta as usize] += 1;
        cb[tb as usize] += 1;
        if *ta == tb {
            agree += 1;
        }
    }
    let expected: usize = ca.iter().zip(&cb).map(|(x, y)| x * y).sum();
    if expected == n * n {
        // Both annotators used one and the same tag throughout.
        return if agree == n {
            Ok(1.0)
        } else {
            Err(Error::Undefined("Cohen's kappa with chance agreement 1"))
        };
    }
    let nf = n as f64;
    let p_o = agree as f64 / nf;
    let p_e = expected as f64 / (nf * nf);
    Ok((p_o - p_e) / (1.0 - p_e))
}

pub fn irr_report(sets: &[AnnotationSet; 3]) -> Result<IrrReport> {
    let percentage_agreement = percentage_agreement(sets)?;
    let pairwise_kappa = [
        cohens_kappa(&sets[0], &sets[1])?,
        cohens_kappa(&sets[0], &sets[2])?,
        cohens_kappa(&sets[1], &sets[2])?,
    ];
    let (mut unanimous, mut maj, mut dis) = (0, 0, 0);
    for (tok, a) in sets[0].votes() {
        let votes = [*a, sets[1].vote(tok).unwrap(), sets[2].vote(tok).unwrap()];
        match majority(votes) {
            Some((_, Agreement::Unanimous)) => unanimous += 1,
            Some((_, Agreement::Majority)) => maj += 1,
            None => dis += 1,
        }
    }
    Ok(IrrReport {
        percentage_agreement,
        cohens_kappa: pairwise_kappa.iter().sum::<f64>() / 3.0,
        pairwise_kappa,
        unanimous_count: unanimous,
        majority_count: maj,
        disagreement_count: dis,
    })
}

/// Three synthetic annotation sets with exactly the requested numbers of
/// unanimous, two-way and three-way-split tokens. The dissenting annotator
/// rotates so no annotator is systematically the odd one out.
pub fn synth_annotations(
    unanimous: usize,
    majority: usize,
    disagreement: usize,
    seed: u64,
) -> [AnnotationSet; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = unanimous + majority + disagreement;
    let mut kinds: Vec<u8> = std::iter::repeat_n(0, unanimous)
        .chain(std::iter::repeat_n(1, majority))
        .chain(std::iter::repeat_n(2, disagreement))
        .collect();
    kinds.shuffle(&mut rng);
    let mut votes: [Vec<(String, CoarseTag)>; 3] = Default::default();
    let mut dissent = 0usize;
    for (i, kind) in kinds.into_iter().enumerate() {
        let token = format!("tok{i:0width$}", width = total.to_string().len());
        let mut tags = CoarseTag::ALL;
        tags.shuffle(&mut rng);
        let row = match kind {
            0 => [tags[0]; 3],
            1 => {
                let mut r = [tags[0]; 3];
                r[dissent % 3] = tags[1];
                dissent += 1;
                r
            }
            _ => {
                let mut r = [tags[0], tags[1], tags[2]];
                r.rotate_left(rng.gen_range(0..3));
                r
            }
        };
        for (k, v) in votes.iter_mut().enumerate() {
            v.push((token.clone(), row[k]));
        }
    }
    let [a, b, c] = votes;
    [
        AnnotationSet::new("annotator_a", a).expect("unique tokens"),
        AnnotationSet::new("annotator_b", b).expect("unique tokens"),
        AnnotationSet::new("annotator_c", c).expect("unique tokens"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use CoarseTag::*;

    fn set(id: &str, tags: &[CoarseTag]) -> AnnotationSet {
        AnnotationSet::new(
            id,
            tags.iter().enumerate().map(|(i, t)| (format!("t{i}"), *t)),
        )
        .unwrap()
    }

    #[test]
    fn identical_sets() {
        let s = set("a", &[Res, Fun, Loc, O]);
        let sets = [s.clone(), s.clone(), s.clone()];
        assert_eq!(percentage_agreement(&sets).unwrap(), 1.0);
        assert_eq!(cohens_kappa(&s, &s).unwrap(), 1.0);
    }

    #[test]
    fn two_tokens_half_agreement() {
        // token 0: all three agree (3 of 3 pairs); token 1: all differ (0 of 3).
        let sets = [
            set("a", &[Res, Res]),
            set("b", &[Res, Fun]),
            set("c", &[Res, Loc]),
        ];
        assert!((percentage_agreement(&sets).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kappa_hand_computed_fixture() {
        // Agreements on 7 of 10 tokens, p_o = 0.7.
        // Marginals a: RES 3, FUN 3, LOC 2, O 2; b: RES 3, FUN 3, LOC 1, O 3.
        // p_e = (9 + 9 + 2 + 6) / 100 = 0.26, κ = 0.44 / 0.74 = 22/37.
        let a = set("a", &[Res, Res, Res, Fun, Fun, Fun, Loc, Loc, O, O]);
        let b = set("b", &[Res, Res, Fun, Fun, Fun, Res, Loc, O, O, O]);
        let k = cohens_kappa(&a, &b).unwrap();
        assert!((k - 22.0 / 37.0).abs() < 1e-15, "{k}");
        assert_eq!(k, cohens_kappa(&b, &a).unwrap());
    }

    #[test]
    fn constant_identical_annotators() {
        let a = set("a", &[O, O, O]);
        assert_eq!(cohens_kappa(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn empty_sets_error() {
        let e = set("a", &[]);
        assert!(percentage_agreement(&[e.clone(), e.clone()]).is_err());
        assert!(cohens_kappa(&e, &e).is_err());
    }

    #[test]
    fn independent_annotators_have_kappa_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<CoarseTag> {
            (0..10_000)
                .map(|_| CoarseTag::ALL[rng.gen_range(0..4)])
                .collect()
        };
        let a = set("a", &draw(&mut rng));
        let b = set("b", &draw(&mut rng));
        let k = cohens_kappa(&a, &b).unwrap();
        assert!(k.abs() < 0.1, "{k}");
    }

    #[test]
    fn synthesized_counts_reproduce_published_agreement() {
        let sets = synth_annotations(1169, 331, 0, 7);
        let r = irr_report(&sets).unwrap();
        assert_eq!(
            (r.unanimous_count, r.majority_count, r.disagreement_count),
            (1169, 331, 0)
        );
        // (1169·3 + 331·1) / (1500·3)
        let closed_form = (1169.0 * 3.0 + 331.0) / 4500.0;
        assert!((r.percentage_agreement - closed_form).abs() < 1e-12);
        assert!((r.percentage_agreement - 0.853).abs() < 0.001);
        assert!((r.unanimous_share() - 0.779).abs() < 0.001);
    }

    #[test]
    fn synth_disagreements_counted() {
        let sets = synth_annotations(5, 3, 2, 1);
        let r = irr_report(&sets).unwrap();
        assert_eq!(
            (r.unanimous_count, r.majority_count, r.disagreement_count),
            (5, 3, 2)
        );
    }
}
