use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Pow};
use proptest::prelude::*;

use ddm_core::null_models::{
    expected_d_random_arrangement, mixture_probability, noncrossing_mixture_probability,
    ArrangementSampler, Direction, EnsembleSpec,
};
use ddm_core::pipeline::{
    analyze_collection, emit_report, AnalysisConfig, Corpus, Families, HolmScope, LevelSpec,
    ReportFormat,
};
use ddm_core::stats::{self, BinomialTestInput};
use ddm_core::tree::{
    classify, count_crossings, enumerate_arrangements, min_d_formula, sum_of_distances,
    LinearizedTree, TreeShape,
};
use ddm_core::treebank::{parse_treebank, preprocess_sentence, PreprocessConfig, TreebankFormat};

/// Random labelled tree: vertex `i` hangs off an earlier vertex, then the
/// positions are shuffled.
fn tree_strategy(max_n: usize) -> impl Strategy<Value = LinearizedTree> {
    (1..=max_n)
        .prop_flat_map(|n| {
            let parents = (1..n).map(|i| 0..i).collect::<Vec<_>>();
            (
                parents,
                Just((1..=n).collect::<Vec<usize>>()).prop_shuffle(),
            )
        })
        .prop_map(|(parents, perm)| {
            let n = perm.len();
            let edges = parents
                .iter()
                .enumerate()
                .map(|(i, &p)| (perm[i + 1], perm[p]));
            LinearizedTree::new(n, edges).unwrap()
        })
}

fn p_strategy() -> impl Strategy<Value = Rational64> {
    prop_oneof![
        Just(Rational64::new(1, 4)),
        Just(Rational64::new(5, 16)),
        Just(Rational64::new(1, 3)),
        Just(Rational64::new(3, 8)),
        Just(Rational64::new(1, 2)),
        Just(Rational64::new(2, 3)),
        (1i64..20, 21i64..40).prop_map(|(a, b)| Rational64::new(a, b)),
    ]
}

fn four_vertex_tree() -> impl Strategy<Value = LinearizedTree> {
    tree_strategy(4).prop_filter("n = 4", |t| t.n() == 4)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn enumeration_mean_is_closed_form(tree in tree_strategy(7)) {
        let dist = enumerate_arrangements(&tree, false).unwrap();
        prop_assert_eq!(dist.mean().unwrap(), expected_d_random_arrangement(tree.n() as u64));
    }

    #[test]
    fn enumeration_minimum_matches_formula(tree in tree_strategy(7)) {
        let shape = classify(&tree);
        let dist = enumerate_arrangements(&tree, false).unwrap();
        if matches!(shape, TreeShape::Star | TreeShape::Linear) {
            prop_assert_eq!(dist.min().unwrap(), min_d_formula(shape, tree.n()).unwrap());
        }
        if shape == TreeShape::Both && tree.n() >= 2 {
            prop_assert_eq!(dist.min().unwrap(), tree.n() as u64 - 1);
        }
    }

    #[test]
    fn noncrossing_support_is_a_subset(tree in tree_strategy(6)) {
        let all = enumerate_arrangements(&tree, false).unwrap();
        let nc = enumerate_arrangements(&tree, true).unwrap();
        prop_assert!(nc.total > 0 && nc.total <= all.total);
        for (d, &c) in &nc.counts {
            prop_assert!(c <= all.count(*d));
        }
        // the minimum is always reachable without crossings
        prop_assert_eq!(nc.min(), all.min());
    }

    #[test]
    fn reversal_preserves_d_and_crossings(tree in tree_strategy(12)) {
        let rev = tree.reversed();
        prop_assert_eq!(sum_of_distances(&rev), sum_of_distances(&tree));
        prop_assert_eq!(count_crossings(&rev), count_crossings(&tree));
        prop_assert_eq!(classify(&rev), classify(&tree));
    }

    #[test]
    fn random_arrangement_keeps_shape(tree in tree_strategy(12), seed in any::<u64>()) {
        let mut sampler = ArrangementSampler::new(seed);
        let moved = sampler.sample(&tree);
        prop_assert_eq!(classify(&moved), classify(&tree));
        prop_assert_eq!(moved.degrees().iter().sum::<usize>(), tree.degrees().iter().sum::<usize>());
        let mut a = moved.degrees();
        let mut b = tree.degrees();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn four_vertex_tail_matches_mixture_weights(tree in four_vertex_tree()) {
        let dist = enumerate_arrangements(&tree, false).unwrap();
        let mean = expected_d_random_arrangement(4);
        let want = match classify(&tree) {
            TreeShape::Star => Rational64::new(1, 2),
            _ => Rational64::new(1, 4),
        };
        prop_assert_eq!(dist.mass_above(mean), want);
        prop_assert_eq!(dist.mass_below(mean), want);
    }

    #[test]
    fn tail_at_full_success_is_p_to_the_m(m in 1u64..=64, p in p_strategy()) {
        let exact = stats::exact_binomial_upper_tail(m, m, p);
        let p_big = BigRational::new(BigInt::from(*p.numer()), BigInt::from(*p.denom()));
        prop_assert_eq!(&exact, &Pow::pow(&p_big, m));
        let input = BinomialTestInput::new(m, m, p, 0.05).unwrap();
        let want = m as f64 * (*p.numer() as f64 / *p.denom() as f64).ln();
        prop_assert!((stats::ln_binomial_upper_tail(&input) - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn tail_is_monotone_and_complementary(m in 0u64..=300, p in p_strategy()) {
        let mut prev = f64::INFINITY;
        for g in 0..=m {
            let input = BinomialTestInput::new(g, m, p, 0.05).unwrap();
            let upper = stats::binomial_upper_tail(&input);
            prop_assert!(upper <= prev + 1e-15);
            prev = upper;
            if g > 0 {
                // P(X >= g) + P(X <= g - 1) = 1
                let below = BinomialTestInput::new(g - 1, m, p, 0.05).unwrap();
                prop_assert!((upper + stats::binomial_lower_tail(&below) - 1.0).abs() <= 1e-12);
            }
        }
        let zero = BinomialTestInput::new(0, m, p, 0.05).unwrap();
        prop_assert_eq!(stats::binomial_upper_tail(&zero), 1.0);
    }

    #[test]
    fn min_sample_size_is_tight(p in p_strategy(), alpha in 0.001f64..0.2) {
        let m = stats::min_sample_size(p, alpha).unwrap();
        let p_big = BigRational::new(BigInt::from(*p.numer()), BigInt::from(*p.denom()));
        let alpha_big = BigRational::from_float(alpha).unwrap();
        prop_assert!(Pow::pow(&p_big, m) <= alpha_big);
        prop_assert!(m == 1 || Pow::pow(&p_big, m - 1) > alpha_big);
    }

    #[test]
    fn holm_never_beats_bonferroni_or_raw(raw in prop::collection::vec(0.0f64..=1.0, 1..40)) {
        let adj = stats::holm_adjust(&raw, 0.05).unwrap();
        let lambda = raw.len() as f64;
        for (i, &p) in raw.iter().enumerate() {
            prop_assert!(adj.adjusted[i] >= p);
            prop_assert!(adj.adjusted[i] <= (p * lambda).min(1.0) + 1e-15);
        }
        let ln_raw: Vec<f64> = raw.iter().map(|p| p.ln()).collect();
        for (a, l) in adj.adjusted.iter().zip(stats::holm_adjust_ln(&ln_raw)) {
            prop_assert!((a - l.exp()).abs() <= 1e-12);
        }
    }

    #[test]
    fn mixtures_behave(num in 0i64..=16) {
        let p_s = Rational64::new(num, 16);
        let ens = EnsembleSpec::real(p_s);
        let above = mixture_probability(&ens, Direction::Above).unwrap();
        prop_assert_eq!(above, mixture_probability(&ens, Direction::Below).unwrap());
        let nc_above = noncrossing_mixture_probability(&ens, Direction::Above).unwrap();
        let nc_below = noncrossing_mixture_probability(&ens, Direction::Below).unwrap();
        prop_assert!(nc_above >= above && nc_below >= above);
        prop_assert_eq!(nc_above + nc_below, Rational64::one());
    }
}

fn sentence_conllu(tree: &LinearizedTree, punct_every: usize) -> String {
    // root at the smallest vertex, heads from a BFS over the edges
    let n = tree.n();
    let mut head = vec![usize::MAX; n + 1];
    head[1] = 0;
    let mut queue = vec![1];
    while let Some(v) = queue.pop() {
        for &(a, b) in tree.edges() {
            let other = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if head[other] == usize::MAX {
                head[other] = v;
                queue.push(other);
            }
        }
    }
    // interleave punctuation tokens attached to the root
    let mut lines = Vec::new();
    let mut id_of = vec![0; n + 1];
    let mut next = 1;
    for (v, id) in id_of.iter_mut().enumerate().skip(1) {
        *id = next;
        next += 1;
        if punct_every > 0 && v % punct_every == 0 {
            next += 1;
        }
    }
    for v in 1..=n {
        let h = if head[v] == 0 { 0 } else { id_of[head[v]] };
        lines.push(format!("{}\tw{v}\t_\tNOUN\t_\t_\t{h}\tdep\t_\t_", id_of[v]));
        if punct_every > 0 && v % punct_every == 0 {
            lines.push(format!(
                "{}\t,\t_\tPUNCT\t_\t_\t{}\tpunct\t_\t_",
                id_of[v] + 1,
                id_of[1]
            ));
        }
    }
    lines.join("\n") + "\n\n"
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn preprocessing_is_idempotent(trees in prop::collection::vec(tree_strategy(9), 1..6), every in 0usize..4) {
        let text: String = trees.iter().map(|t| sentence_conllu(t, every)).collect();
        let cfg = PreprocessConfig::default();
        let first = parse_treebank(text.as_bytes(), TreebankFormat::Conllu, "x").unwrap();
        prop_assert!(first.errors.is_empty());
        let clean: Vec<_> = first.sentences.iter().map(|s| preprocess_sentence(s, &cfg).unwrap()).collect();
        for (c, t) in clean.iter().zip(&trees) {
            // punctuation removed, words kept in order, tree unchanged
            prop_assert_eq!(c.len(), t.n());
            let in_order = c.tokens.iter().enumerate().all(|(i, tok)| tok.form == format!("w{}", i + 1));
            prop_assert!(in_order);
            prop_assert_eq!(&c.tree(), t);
        }
        let again_text: String = clean.iter().map(|c| c.to_conllu()).collect();
        let again = parse_treebank(again_text.as_bytes(), TreebankFormat::Conllu, "x").unwrap();
        let twice: Vec<_> = again.sentences.iter().map(|s| preprocess_sentence(s, &cfg).unwrap()).collect();
        prop_assert_eq!(clean, twice);
    }
}

fn corpus_strategy() -> impl Strategy<Value = Vec<(String, Vec<LinearizedTree>)>> {
    let tree = prop_oneof![tree_strategy(4), tree_strategy(3), tree_strategy(6)];
    prop::collection::vec(prop::collection::vec(tree, 0..60), 1..8).prop_map(|langs| {
        langs
            .into_iter()
            .enumerate()
            .map(|(i, trees)| (format!("l{i}"), trees))
            .collect()
    })
}

fn build(langs: &[(String, Vec<LinearizedTree>)]) -> Corpus {
    let mut corpus = Corpus::new();
    for (lang, trees) in langs {
        corpus.add_trees(lang, trees.iter().cloned());
    }
    corpus
}

fn families() -> Families {
    (0..8)
        .map(|i| (format!("l{i}"), format!("fam{}", i % 3)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn counts_match_brute_force(langs in corpus_strategy()) {
        let report = analyze_collection("c", &build(&langs), &families(), &AnalysisConfig::default());
        for r in &report.results {
            let trees = &langs.iter().find(|(l, _)| *l == r.language).unwrap().1;
            let n = r.level.sentence_length();
            let rla = expected_d_random_arrangement(n as u64);
            let eligible: Vec<_> = trees.iter().filter(|t| r.level.admits(t)).collect();
            let g = eligible
                .iter()
                .filter(|t| {
                    let d = Rational64::from_integer(sum_of_distances(t) as i64);
                    match r.direction {
                        Direction::Above => d > rla,
                        Direction::Below => d < rla,
                    }
                })
                .count() as u64;
            prop_assert_eq!(r.m, eligible.len() as u64);
            prop_assert_eq!(r.g, g);
        }
    }

    #[test]
    fn correction_only_removes_rejections(langs in corpus_strategy()) {
        for scope in [HolmScope::Global, HolmScope::PerFamily, HolmScope::Disabled] {
            let cfg = AnalysisConfig { holm_scope: scope, ..AnalysisConfig::default() };
            let report = analyze_collection("c", &build(&langs), &families(), &cfg);
            for s in &report.summaries {
                prop_assert!(s.f_h <= s.f && s.f <= s.l0 && s.l <= s.l0);
                if scope == HolmScope::Disabled {
                    prop_assert_eq!(s.f_h, s.f);
                }
            }
            for r in &report.results {
                prop_assert!(r.p_holm >= r.p_value);
                // a language below the minimum sample size can never reject
                prop_assert!(r.adequately_sampled || r.p_value > cfg.alpha || r.m == 0);
            }
        }
    }

    #[test]
    fn report_ignores_insertion_order(langs in corpus_strategy()) {
        let forward = analyze_collection("c", &build(&langs), &families(), &AnalysisConfig::default());
        let mut reversed_langs = langs.clone();
        reversed_langs.reverse();
        let backward = analyze_collection("c", &build(&reversed_langs), &families(), &AnalysisConfig::default());
        for format in [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Markdown] {
            prop_assert_eq!(emit_report(&forward, format).unwrap(), emit_report(&backward, format).unwrap());
        }
    }

    #[test]
    fn more_languages_never_help_a_rejection(langs in corpus_strategy(), extra in prop::collection::vec(tree_strategy(4), 1..40)) {
        let cfg = AnalysisConfig { levels: vec![LevelSpec::N4AllReal], ..AnalysisConfig::default() };
        let before = analyze_collection("c", &build(&langs), &families(), &cfg);
        let mut grown = langs.clone();
        grown.push(("zz".to_string(), extra));
        let after = analyze_collection("c", &build(&grown), &families(), &cfg);
        for r in &before.results {
            let same = after
                .results
                .iter()
                .find(|a| a.language == r.language && a.direction == r.direction)
                .unwrap();
            prop_assert_eq!(same.p_value, r.p_value);
            prop_assert!(same.p_holm >= r.p_holm);
        }
    }
}
