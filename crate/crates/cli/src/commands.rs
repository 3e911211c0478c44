use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use occner::container::ModelFile;
use occner::corpus::{
    length_histogram, length_stats, load_corpus, ngram_counts, normalize_title, synth_corpus,
    Corpus, CorpusFormat, Region, Title,
};
use occner::crf::{train_crf, train_logreg, CrfModel};
use occner::eval::{
    compare_models, grid_search, human_baseline, score, MetricsReport, SearchSpace,
};
use occner::gazetteer::{irr_report, merge_annotations, AnnotationSet, CoarseTag, Gazetteer};
use occner::labeling::{
    auto_tag, load_conll, save_conll, split_dataset, tag_counts, write_conll, LabeledSequence,
};
use occner::neural::{train_lstm_crf, train_lstm_softmax, LstmConfig, LstmCrfModel};
use occner::optim::{TrainConfig, TrainReport};
use occner::title2vec::{
    mean_pool, nearest_titles, train_bilm, BiLmDims, BiLmModel, EmbeddingFile,
};
use occner::{BiLm32, Crf32, LstmCrf32};

use crate::args::*;
use crate::settings::Settings;
use crate::UsageError;

pub fn run(cli: Cli) -> Result<()> {
    let settings = Settings::new(cli.config.as_deref(), cli.seed)?;
    let fmt = cli.format;
    match cli.command {
        Command::Normalize(io) => normalize(&io),
        Command::Stats(a) => stats(&a.io, fmt),
        Command::Ngrams(a) => ngrams(&a, fmt),
        Command::Gazetteer(g) => gazetteer(g, fmt),
        Command::Tag(a) => tag(&a),
        Command::Split(a) => split(&a, &settings, fmt),
        Command::Train(a) => train(&a, &settings, fmt),
        Command::Predict(a) => predict(&a),
        Command::Eval(a) => {
            let gold = load_conll(&a.gold, true)?;
            let pred = load_conll(&a.pred, false)?;
            emit(
                a.output.as_deref(),
                &render_report(&score(&gold, &pred)?, fmt),
            )
        }
        Command::Human(a) => {
            let [x, y, z] = [0, 1, 2].map(|i| load_conll(&a.annotations[i], false));
            let r = human_baseline(&x?, &y?, &z?)?;
            emit(a.output.as_deref(), &render_report(&r, fmt))
        }
        Command::Compare(a) => compare(&a, fmt),
        Command::Embed(a) => embed(&a),
        Command::Nearest(a) => nearest(&a, fmt),
        Command::Gridsearch(a) => gridsearch(&a, &settings, fmt),
        Command::Synth(a) => synth(&a, &settings),
    }
}

/// Writes to `path`, or to standard output when absent.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| occner::Error::Io {
            path: p.into(),
            source: e,
        })?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).map_err(|e| occner::Error::Io {
        path: path.into(),
        source: e,
    })?;
    Ok(BufReader::new(f))
}

fn corpus_format(f: InputFormat) -> Option<CorpusFormat> {
    match f {
        InputFormat::Lines => Some(CorpusFormat::Lines),
        InputFormat::Tsv => Some(CorpusFormat::Tsv),
        InputFormat::Conll => None,
    }
}

/// Titles from a raw file, or from the tokens of a CoNLL file.
fn read_corpus(path: &Path, format: InputFormat) -> Result<Corpus> {
    let label = path.display().to_string();
    Ok(match corpus_format(format) {
        Some(cf) => {
            let c = Corpus::read(open(path)?, cf, &label)?;
            if c.empty_titles > 0 {
                log::warn!(
                    "{label}: {} titles were empty after normalization",
                    c.empty_titles
                );
            }
            c
        }
        None => {
            let seqs = load_conll(path, false)?;
            let titles = seqs.into_iter().map(|s| Title {
                raw: s.tokens.join(" "),
                tokens: s.tokens,
                region: Region::Unknown,
                profile_id: None,
            });
            Corpus::new(titles, label)
        }
    })
}

fn load_gazetteer(path: Option<&Path>) -> Result<Gazetteer> {
    Ok(match path {
        Some(p) => Gazetteer::load(p)?,
        None => Gazetteer::builtin(),
    })
}

fn normalize(io: &Io) -> Result<()> {
    let format = corpus_format(io.input_format)
        .ok_or_else(|| UsageError("normalize reads lines or tsv input".into()))?;
    let corpus = load_corpus(&io.input, format)?;
    let mut out = Vec::new();
    corpus.write(&mut out, format)?;
    emit(io.output.as_deref(), std::str::from_utf8(&out)?)
}

fn stats(io: &Io, fmt: Format) -> Result<()> {
    let corpus = read_corpus(&io.input, io.input_format)?;
    let ls = length_stats(&corpus)?;
    let hist = length_histogram(&corpus)?;
    let mut pairs: Vec<(String, String)> = vec![
        ("titles".into(), corpus.len().to_string()),
        ("tokens".into(), corpus.token_count().to_string()),
        ("empty_titles".into(), corpus.empty_titles.to_string()),
        ("skipped_rows".into(), corpus.skipped_rows.len().to_string()),
        ("profiles".into(), corpus.profile_count().to_string()),
    ];
    let mut scopes = vec![("overall".to_string(), ls.overall.clone())];
    scopes.extend(ls.by_region.iter().map(|(r, s)| (r.to_string(), s.clone())));
    for (name, s) in &scopes {
        pairs.extend([
            (format!("length.{name}.count"), s.count.to_string()),
            (format!("length.{name}.min"), s.min.to_string()),
            (format!("length.{name}.max"), s.max.to_string()),
            (format!("length.{name}.avg"), format!("{:.4}", s.avg)),
            (format!("length.{name}.median"), format!("{}", s.median)),
        ]);
    }
    for (len, pct) in &hist.overall {
        pairs.push((format!("hist.overall.{len}"), format!("{pct:.4}")));
    }
    for (region, h) in &hist.by_region {
        for (len, pct) in h {
            pairs.push((format!("hist.{region}.{len}"), format!("{pct:.4}")));
        }
    }
    pairs.push((
        "within_5_words".into(),
        format!("{:.4}", hist.cumulative_share(5)),
    ));
    if io.input_format == InputFormat::Conll {
        let seqs = load_conll(&io.input, false)?;
        for (tag, n) in tag_counts(&seqs) {
            pairs.push((format!("tags.{tag}"), n.to_string()));
        }
    }
    let text = match fmt {
        Format::Kv => occner::kv::render(&pairs),
        Format::Tsv => {
            let mut s = String::from("scope\tcount\tmin\tmax\tavg\tmedian\n");
            for (name, st) in &scopes {
                let _ = writeln!(
                    s,
                    "{name}\t{}\t{}\t{}\t{:.4}\t{}",
                    st.count, st.min, st.max, st.avg, st.median
                );
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "{} titles, {} tokens, {} profiles ({} empty titles dropped)",
                corpus.len(),
                corpus.token_count(),
                corpus.profile_count(),
                corpus.empty_titles
            );
            let _ = writeln!(
                s,
                "{:<8} {:>7} {:>4} {:>4} {:>7} {:>6}",
                "scope", "titles", "min", "max", "avg", "median"
            );
            for (name, st) in &scopes {
                let _ = writeln!(
                    s,
                    "{name:<8} {:>7} {:>4} {:>4} {:>7.2} {:>6}",
                    st.count, st.min, st.max, st.avg, st.median
                );
            }
            let _ = writeln!(
                s,
                "titles within five words: {:.1}%",
                hist.cumulative_share(5)
            );
            for (k, v) in pairs.iter().filter(|(k, _)| k.starts_with("tags.")) {
                let _ = writeln!(s, "{} tokens: {v}", &k[5..]);
            }
            s
        }
    };
    emit(io.output.as_deref(), &text)
}

fn ngrams(a: &NgramArgs, fmt: Format) -> Result<()> {
    let corpus = read_corpus(&a.io.input, a.io.input_format)?;
    let table = ngram_counts(&corpus, a.n)?;
    let entries = match a.top {
        Some(k) => table.top(k),
        None => &table.entries[..],
    };
    let mut s = String::new();
    for (gram, count) in entries {
        let _ = match fmt {
            Format::Kv => writeln!(s, "{}={count}", gram.join("_")),
            Format::Tsv => writeln!(s, "{}\t{count}", gram.join(" ")),
            Format::Text => writeln!(s, "{count:>8}  {}", gram.join(" ")),
        };
    }
    emit(a.io.output.as_deref(), &s)
}

fn load_votes(paths: &[PathBuf]) -> Result<[AnnotationSet; 3]> {
    let [a, b, c] = [0, 1, 2].map(|i| AnnotationSet::load(&paths[i]));
    Ok([a?, b?, c?])
}

fn gazetteer_tsv(g: &Gazetteer) -> Result<String> {
    let mut out = Vec::new();
    g.write_tsv(&mut out)?;
    Ok(String::from_utf8(out)?)
}

fn gazetteer(cmd: GazetteerCmd, fmt: Format) -> Result<()> {
    match cmd {
        GazetteerCmd::Build { votes, output } => {
            let merged = merge_annotations(&load_votes(&votes)?)?;
            if !merged.rejected.is_empty() {
                eprintln!(
                    "{} tokens had no majority and were left out",
                    merged.rejected.len()
                );
            }
            emit(output.as_deref(), &gazetteer_tsv(&merged.gazetteer)?)
        }
        GazetteerCmd::Irr { votes, output } => {
            let r = irr_report(&load_votes(&votes)?)?;
            let pairs: Vec<(String, String)> = vec![
                ("tokens".into(), r.total().to_string()),
                (
                    "percentage_agreement".into(),
                    format!("{:.6}", r.percentage_agreement),
                ),
                ("cohens_kappa".into(), format!("{:.6}", r.cohens_kappa)),
                ("kappa.1_2".into(), format!("{:.6}", r.pairwise_kappa[0])),
                ("kappa.1_3".into(), format!("{:.6}", r.pairwise_kappa[1])),
                ("kappa.2_3".into(), format!("{:.6}", r.pairwise_kappa[2])),
                ("unanimous".into(), r.unanimous_count.to_string()),
                ("majority".into(), r.majority_count.to_string()),
                ("disagreement".into(), r.disagreement_count.to_string()),
                (
                    "unanimous_share".into(),
                    format!("{:.6}", r.unanimous_share()),
                ),
            ];
            emit(output.as_deref(), &render_pairs(&pairs, fmt))
        }
        GazetteerCmd::Builtin { output } => {
            emit(output.as_deref(), &gazetteer_tsv(&Gazetteer::builtin())?)
        }
    }
}

fn render_pairs(pairs: &[(String, String)], fmt: Format) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        let _ = match fmt {
            Format::Kv => writeln!(s, "{k}={v}"),
            Format::Tsv => writeln!(s, "{k}\t{v}"),
            Format::Text => writeln!(s, "{:<22} {v}", format!("{k}:")),
        };
    }
    s
}

fn tag(a: &TagArgs) -> Result<()> {
    let g = load_gazetteer(a.gazetteer.as_deref())?;
    let corpus = read_corpus(&a.io.input, a.io.input_format)?;
    let labeled: Vec<LabeledSequence> = corpus
        .titles
        .iter()
        .map(|t| auto_tag(t, &g))
        .collect::<occner::Result<_>>()?;
    let mut out = Vec::new();
    write_conll(&mut out, &labeled)?;
    emit(a.io.output.as_deref(), std::str::from_utf8(&out)?)
}

fn split(a: &SplitArgs, settings: &Settings, fmt: Format) -> Result<()> {
    let seed = settings.seed()?;
    let data = load_conll(&a.input, true)?;
    let s = split_dataset(&data, a.train, a.dev, seed)?;
    std::fs::create_dir_all(&a.output).map_err(|e| occner::Error::Io {
        path: a.output.clone(),
        source: e,
    })?;
    let mut pairs = Vec::new();
    for (name, part) in [("train", &s.train), ("dev", &s.dev), ("test", &s.test)] {
        save_conll(a.output.join(format!("{name}.conll")), part)?;
        pairs.push((name.to_string(), part.len().to_string()));
    }
    emit(None, &render_pairs(&pairs, fmt))
}

fn default_config(kind: ModelKind) -> TrainConfig {
    match kind {
        ModelKind::Crf | ModelKind::Logreg => TrainConfig::crf_defaults(),
        ModelKind::Lstm | ModelKind::LstmCrf => TrainConfig::lstm_crf_defaults(),
        ModelKind::Bilm => TrainConfig {
            word_dropout: 0.0,
            variational_dropout: 0.0,
            ..TrainConfig::crf_defaults()
        },
    }
}

fn bilm_default_dims() -> LstmConfig {
    LstmConfig {
        embedding_dim: 64,
        hidden: 64,
        layers: 1,
    }
}

fn summary(kind: &str, cfg: &TrainConfig, report: &TrainReport, hash: &str, fmt: Format) -> String {
    let mut pairs: Vec<(String, String)> = vec![
        ("model".into(), kind.into()),
        ("seed".into(), cfg.seed.to_string()),
        ("epochs".into(), report.epoch_losses.len().to_string()),
        ("steps".into(), report.steps.to_string()),
    ];
    for (i, l) in report.epoch_losses.iter().enumerate() {
        pairs.push((format!("loss.{}", i + 1), format!("{l:.6}")));
    }
    pairs.push(("model_hash".into(), hash.into()));
    render_pairs(&pairs, fmt)
}

fn train(a: &TrainArgs, settings: &Settings, fmt: Format) -> Result<()> {
    let mut cfg = default_config(a.model);
    cfg.seed = settings.seed()?;
    let flags = a.hyper.pairs();
    let kind_name = a.model.to_possible_value().unwrap().get_name().to_string();
    let (bytes, report) = match a.model {
        ModelKind::Crf | ModelKind::Logreg => {
            settings.apply(&flags, &mut cfg, None)?;
            let data = load_conll(&a.input, true)?;
            let g = a.gazetteer.as_deref().map(Gazetteer::load).transpose()?;
            let (m, r): (Crf32, _) = if a.model == ModelKind::Crf {
                train_crf(&data, &cfg, g.as_ref())?
            } else {
                train_logreg(&data, &cfg, g.as_ref())?
            };
            (m.to_file().to_bytes(), r)
        }
        ModelKind::Lstm | ModelKind::LstmCrf => {
            let mut arch = LstmConfig::default();
            settings.apply(&flags, &mut cfg, Some(&mut arch))?;
            let data = load_conll(&a.input, true)?;
            let bilm = a.bilm.as_deref().map(BiLm32::load).transpose()?;
            let (m, r): (LstmCrf32, _) = if a.model == ModelKind::LstmCrf {
                train_lstm_crf(&data, &cfg, &arch, bilm.as_ref())?
            } else {
                train_lstm_softmax(&data, &cfg, &arch, bilm.as_ref())?
            };
            (m.to_file().to_bytes(), r)
        }
        ModelKind::Bilm => {
            let mut arch = bilm_default_dims();
            settings.apply(&flags, &mut cfg, Some(&mut arch))?;
            let format = a.input_format.unwrap_or(InputFormat::Lines);
            let corpus = read_corpus(&a.input, format)?;
            let dims = BiLmDims::new(arch.embedding_dim, arch.hidden, arch.layers)?;
            let (m, r): (BiLm32, _) = train_bilm(&corpus, dims, &cfg)?;
            (m.to_file().to_bytes(), r)
        }
    };
    std::fs::write(&a.output, &bytes).map_err(|e| occner::Error::Io {
        path: a.output.clone(),
        source: e,
    })?;
    let hash = occner::container::content_hash(&bytes);
    emit(None, &summary(&kind_name, &cfg, &report, &hash, fmt))
}

/// Any trained tagger, loaded by the kind recorded in its file.
enum Tagger {
    Crf(Crf32),
    Neural(LstmCrf32),
}

impl Tagger {
    fn load(path: &Path, bilm: Option<&Path>) -> Result<Self> {
        let file = ModelFile::load(path)?;
        Ok(match file.kind.as_str() {
            "crf" | "logreg" => Tagger::Crf(CrfModel::from_file(&file)?),
            "lstm" | "lstm-crf" => {
                let b = bilm.map(BiLmModel::load).transpose()?;
                Tagger::Neural(LstmCrfModel::from_file(&file, b)?)
            }
            other => {
                return Err(occner::Error::Model(format!(
                    "{} holds a {other} model, not a tagger",
                    path.display()
                ))
                .into())
            }
        })
    }

    fn predict(&self, tokens: &[String]) -> occner::Result<LabeledSequence> {
        match self {
            Tagger::Crf(m) => m.predict(tokens),
            Tagger::Neural(m) => m.predict_sequence(tokens),
        }
    }
}

fn predict(a: &PredictArgs) -> Result<()> {
    let tagger = Tagger::load(&a.model, a.bilm.as_deref())?;
    let corpus = read_corpus(&a.input, a.input_format)?;
    let out: Vec<LabeledSequence> = corpus
        .titles
        .iter()
        .map(|t| tagger.predict(&t.tokens))
        .collect::<occner::Result<_>>()?;
    let mut buf = Vec::new();
    write_conll(&mut buf, &out)?;
    emit(a.output.as_deref(), std::str::from_utf8(&buf)?)
}

fn render_report(r: &MetricsReport, fmt: Format) -> String {
    match fmt {
        Format::Kv => r.to_kv(),
        Format::Tsv => render_pairs(&r.to_pairs(), Format::Tsv),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "{} titles, {} tokens", r.titles, r.tokens);
            let _ = writeln!(s, "precision   {:>7.2}", r.precision);
            let _ = writeln!(s, "recall      {:>7.2}", r.recall);
            let _ = writeln!(s, "EM (token)  {:>7.2}", r.em_token);
            let _ = writeln!(s, "F1          {:>7.2}", r.f1);
            let _ = writeln!(s, "EM (title)  {:>7.2}", r.em_title);
            let _ = writeln!(s, "EM (overlap){:>7.2}", r.em_overlap);
            let _ = writeln!(
                s,
                "tp {}  fp {}  fn {}",
                r.counts.tp, r.counts.fp, r.counts.fn_
            );
            for tag in CoarseTag::ENTITIES {
                let t = r.tag(tag);
                let _ = writeln!(s, "{tag}  EM {:>7.2}  F1 {:>7.2}", t.em, t.f1);
            }
            s
        }
    }
}

fn compare(a: &CompareArgs, fmt: Format) -> Result<()> {
    let mut reports = Vec::new();
    for spec in &a.reports {
        let (name, path) = spec
            .split_once('=')
            .ok_or_else(|| UsageError(format!("--report expects NAME=PATH, got '{spec}'")))?;
        let text = std::fs::read_to_string(path).map_err(|e| occner::Error::Io {
            path: path.into(),
            source: e,
        })?;
        let r = MetricsReport::from_kv(&text).with_context(|| format!("report {path}"))?;
        reports.push((name.to_string(), r));
    }
    let table = compare_models(&reports);
    let text = match fmt {
        Format::Text => table.to_text(),
        Format::Tsv => table.to_tsv(),
        Format::Kv => {
            let mut pairs = Vec::new();
            for (name, r) in &reports {
                pairs.extend(
                    r.to_pairs()
                        .into_iter()
                        .map(|(k, v)| (format!("{name}.{k}"), v)),
                );
            }
            occner::kv::render(&pairs)
        }
    };
    emit(a.output.as_deref(), &text)
}

fn embed(a: &EmbedArgs) -> Result<()> {
    let model = BiLm32::load(&a.model)?;
    let corpus = read_corpus(&a.io.input, a.io.input_format)?;
    let titles: Vec<&[String]> = corpus.titles.iter().map(|t| t.tokens.as_slice()).collect();
    let store = EmbeddingFile::from_model(&model, &titles)?;
    let mut out = Vec::new();
    store.write(&mut out)?;
    emit(a.io.output.as_deref(), std::str::from_utf8(&out)?)
}

fn nearest(a: &NearestArgs, fmt: Format) -> Result<()> {
    let store = EmbeddingFile::load(&a.embeddings)?;
    let query: Vec<f32> = match (&a.query, &a.query_id) {
        (Some(text), _) => {
            let model = BiLm32::load(a.model.as_deref().expect("clap enforces --model"))?;
            if model.content_hash() != store.hash() {
                return Err(occner::Error::Model(format!(
                    "{} was not produced by this biLM",
                    a.embeddings.display()
                ))
                .into());
            }
            let t = normalize_title(text);
            if t.is_empty() {
                return Err(occner::Error::Empty("query title").into());
            }
            mean_pool(&model.embed_title(&t.tokens)?)
        }
        (None, Some(id)) => store
            .titles()
            .iter()
            .find(|t| &t.id == id)
            .map(|t| t.pooled())
            .ok_or_else(|| occner::Error::InvalidArgument(format!("no title with id '{id}'")))?,
        (None, None) => return Err(UsageError("nearest needs --query or --query-id".into()).into()),
    };
    let hits = nearest_titles(&store, &query, a.k)?;
    let mut s = String::new();
    for (i, h) in hits.iter().enumerate() {
        let _ = match fmt {
            Format::Kv => writeln!(s, "{}={}\t{:.6}\t{}", i + 1, h.id, h.similarity, h.title),
            Format::Tsv => writeln!(s, "{}\t{:.6}\t{}", h.id, h.similarity, h.title),
            Format::Text => writeln!(
                s,
                "{:>2}. {:.4}  {}  ({})",
                i + 1,
                h.similarity,
                h.title,
                h.id
            ),
        };
    }
    emit(a.output.as_deref(), &s)
}

fn gridsearch(a: &GridArgs, settings: &Settings, fmt: Format) -> Result<()> {
    let seed = settings.seed()?;
    let train_set = load_conll(&a.train, true)?;
    let dev_set = load_conll(&a.dev, true)?;
    let space = if a.space == "default" {
        match a.model {
            ModelKind::Crf | ModelKind::Logreg => SearchSpace::crf_grid(),
            ModelKind::Lstm | ModelKind::LstmCrf => SearchSpace::lstm_crf_grid(),
            ModelKind::Bilm => {
                return Err(
                    UsageError("the biLM has no tagging metric to search over".into()).into(),
                )
            }
        }
    } else {
        SearchSpace::parse(
            &std::fs::read_to_string(&a.space).map_err(|e| occner::Error::Io {
                path: a.space.clone().into(),
                source: e,
            })?,
        )?
    };
    let g = a.gazetteer.as_deref().map(Gazetteer::load).transpose()?;
    let model = a.model;
    let result = grid_search(&space, |point| {
        let mut cfg = default_config(model);
        cfg.seed = seed;
        cfg.epochs = a.epochs;
        let mut arch = LstmConfig::default();
        let pred: Vec<LabeledSequence> = match model {
            ModelKind::Crf | ModelKind::Logreg => {
                point.apply(&mut cfg, None)?;
                let (m, _): (Crf32, _) = if model == ModelKind::Crf {
                    train_crf(&train_set, &cfg, g.as_ref())?
                } else {
                    train_logreg(&train_set, &cfg, g.as_ref())?
                };
                dev_set
                    .iter()
                    .map(|s| m.predict(&s.tokens))
                    .collect::<occner::Result<_>>()?
            }
            _ => {
                point.apply(&mut cfg, Some(&mut arch))?;
                let (m, _): (LstmCrf32, _) = if model == ModelKind::LstmCrf {
                    train_lstm_crf(&train_set, &cfg, &arch, None)?
                } else {
                    train_lstm_softmax(&train_set, &cfg, &arch, None)?
                };
                dev_set
                    .iter()
                    .map(|s| m.predict_sequence(&s.tokens))
                    .collect::<occner::Result<_>>()?
            }
        };
        score(&dev_set, &pred)
    })?;
    if let Some(best) = result.best_row() {
        eprintln!("best: {} (f1 {:.4})", best.point, best.report().unwrap().f1);
    }
    let text = match fmt {
        Format::Kv => {
            let mut pairs: Vec<(String, String)> =
                vec![("configurations".into(), result.rows.len().to_string())];
            match result.best_row() {
                Some(b) => {
                    pairs.push(("best.index".into(), b.point.index.to_string()));
                    pairs.extend(
                        b.point
                            .values
                            .iter()
                            .map(|(k, v)| (format!("best.{k}"), v.clone())),
                    );
                    pairs.push(("best.f1".into(), format!("{:.4}", b.report().unwrap().f1)));
                }
                None => pairs.push(("best".into(), "none".into())),
            }
            occner::kv::render(&pairs)
        }
        _ => result.to_tsv(a.timings),
    };
    emit(a.output.as_deref(), &text)
}

fn synth(a: &SynthArgs, settings: &Settings) -> Result<()> {
    let seed = settings.seed()?;
    let count = settings.count(a.count, 5000)?;
    let g = load_gazetteer(a.gazetteer.as_deref())?;
    let corpus = synth_corpus(&g, seed, count)?;
    let mut out = Vec::new();
    corpus.write(&mut out, CorpusFormat::Lines)?;
    emit(a.output.as_deref(), std::str::from_utf8(&out)?)
}
