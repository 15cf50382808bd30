//! The `graftok` command-line tool.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::bpe::io::{ADDED_TOKENS_FILE, MERGES_FILE, VOCAB_FILE};
use crate::bpe::{normalize, DecodeMode, Tokenizer};
use crate::decoder::{expand_head, run_bench, BenchConfig, TokenHead, ToyDecoderConfig};
use crate::error::{Error, Result};
use crate::extension::{extend_vocabulary, fingerprint};
use crate::prompt::{build_prompt, render_prompt, LanguageFamilyMap, PromptOptions, Task};
use crate::report::{canonical_json, reduction_report};
use crate::trainer::{learn_all, read_lines, Corpus, LearnedExtension, TrainerConfig, DEFAULT_MIN_PAIR_FREQ};
use crate::TokenId;

pub const BASE_DIR_ENV: &str = "GRAFTOK_BASE_DIR";

#[derive(Debug, Parser)]
#[command(name = "graftok", version, about = "Extend a byte-level BPE tokenizer with per-language merges")]
pub struct Cli {
    /// Seed for every random choice; recorded in each report.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for per-language training (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct BaseArgs {
    /// Base tokenizer directory (vocab.json, merges.txt, added_tokens.json).
    /// Falls back to the bundled GPT-2 tokenizer.
    #[arg(long, env = BASE_DIR_ENV)]
    pub base: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn new merges for one or more languages.
    TrainBpe {
        #[command(flatten)]
        base: BaseArgs,
        /// Language code; repeat together with --corpus.
        #[arg(long = "lang", required = true)]
        langs: Vec<String>,
        /// Corpus file, one sentence per line; paired with --lang by position.
        #[arg(long = "corpus", required = true)]
        corpora: Vec<PathBuf>,
        /// New tokens per language.
        #[arg(long, short = 'y')]
        budget: usize,
        #[arg(long, default_value_t = DEFAULT_MIN_PAIR_FREQ)]
        min_pair_freq: u64,
        /// Output file for one language, or a directory for several.
        #[arg(long)]
        out: PathBuf,
    },
    /// Graft extensions (and family prompt tokens) onto the base.
    Extend {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long = "ext")]
        extensions: Vec<PathBuf>,
        /// Language family definition; defaults to the bundled one.
        #[arg(long)]
        families: Option<PathBuf>,
        /// Do not add family prompt tokens.
        #[arg(long)]
        no_family_prompts: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print token ids, one line of ids per input line.
    Encode {
        #[command(flatten)]
        tok: TokenizerArgs,
        #[arg(long, conflicts_with = "input")]
        text: Option<String>,
        /// Input file; stdin when neither --text nor --input is given.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Recognize special-token names in the text.
        #[arg(long)]
        specials: bool,
        /// Apply NFC before encoding.
        #[arg(long)]
        nfc: bool,
    },
    /// Turn whitespace-separated ids back into text, one line per input line.
    Decode {
        #[command(flatten)]
        tok: TokenizerArgs,
        ids: Vec<TokenId>,
        /// Replace invalid UTF-8 with U+FFFD instead of failing.
        #[arg(long)]
        lossy: bool,
    },
    /// Compare token counts of a corpus under two tokenizers.
    Stats {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        extended: PathBuf,
        /// Directory for report.json and report.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a decoder prompt and its ids.
    BuildPrompt {
        #[arg(long)]
        lang: String,
        /// Tokenizer directory; defaults to the base plus family prompt tokens.
        #[arg(long)]
        tokenizer: Option<PathBuf>,
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        families: Option<PathBuf>,
        #[arg(long)]
        no_family_prompt: bool,
        #[arg(long)]
        timestamps: bool,
        #[arg(long, value_enum, default_value_t = TaskArg::Transcribe)]
        task: TaskArg,
    },
    /// Append randomly initialized rows to a token head.
    ExpandHead {
        /// Existing head file; a fresh random head is used when absent.
        #[arg(long)]
        head: Option<PathBuf>,
        /// Rows of the fresh head.
        #[arg(long, default_value_t = 4096)]
        init_rows: usize,
        #[arg(long, default_value_t = 256)]
        hidden: usize,
        /// Rows to add.
        #[arg(long, conflicts_with = "tokenizer")]
        k: Option<usize>,
        /// Grow the head to this tokenizer's size.
        #[arg(long)]
        tokenizer: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time toy greedy decoding and fit T(N) = aN + bN^2.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "32,64,128,256,512")]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        runs: usize,
        #[arg(long, default_value_t = 1)]
        warmup: usize,
        /// Token-count pair `n_base:n_ext`; repeatable.
        #[arg(long = "pair", value_parser = parse_pair, default_values = ["79:31", "27:19"])]
        pairs: Vec<(usize, usize)>,
        #[arg(long, default_value_t = 256)]
        hidden: usize,
        #[arg(long, default_value_t = 4)]
        layers: usize,
        #[arg(long, default_value_t = 4096)]
        vocab_size: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args, Clone)]
pub struct TokenizerArgs {
    /// Tokenizer directory; defaults to the base.
    #[arg(long)]
    pub tokenizer: Option<PathBuf>,
    #[command(flatten)]
    pub base: BaseArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Transcribe,
    Translate,
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected n_base:n_ext, got `{s}`"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    Ok((parse(a)?, parse(b)?))
}

enum Base {
    Bundled,
    Dir(PathBuf),
}

impl Base {
    fn from_args(args: &BaseArgs) -> Self {
        match &args.base {
            Some(dir) => Base::Dir(dir.clone()),
            None => Base::Bundled,
        }
    }

    fn load(&self) -> Result<Tokenizer> {
        match self {
            Base::Bundled => Ok(Tokenizer::gpt2_base().clone()),
            Base::Dir(dir) => Tokenizer::load_dir(dir),
        }
    }
}

fn load_tokenizer(args: &TokenizerArgs) -> Result<Tokenizer> {
    match &args.tokenizer {
        Some(dir) => Tokenizer::load_dir(dir),
        None => Base::from_args(&args.base).load(),
    }
}

fn load_families(path: Option<&Path>) -> Result<LanguageFamilyMap> {
    match path {
        Some(p) => LanguageFamilyMap::read(p),
        None => Ok(LanguageFamilyMap::default()),
    }
}

/// `tool` and `seed` fields shared by every JSON report.
fn header(seed: u64) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert(
        "tool".into(),
        json!({"name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION")}),
    );
    m.insert("seed".into(), json!(seed));
    m
}

fn with_header(seed: u64, body: Value) -> Value {
    let mut m = header(seed);
    if let Value::Object(fields) = body {
        m.extend(fields);
    }
    Value::Object(m)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_input(text: Option<&str>, input: Option<&Path>) -> Result<Vec<String>> {
    if let Some(t) = text {
        return Ok(vec![t.to_string()]);
    }
    let bytes = match input {
        Some(p) => fs::read(p).map_err(|e| Error::io(p, e))?,
        None => {
            let mut buf = Vec::new();
            io::stdin()
                .read_to_end(&mut buf)
                .map_err(|e| Error::io("<stdin>", e))?;
            buf
        }
    };
    read_lines(&bytes)
}

/// Runs a parsed command, writing user-facing output to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let seed = cli.seed;
    let out = |stdout: &mut dyn Write, s: &str| {
        writeln!(stdout, "{s}").map_err(|e| Error::io("<stdout>", e))
    };
    match cli.command {
        Command::TrainBpe {
            base,
            langs,
            corpora,
            budget,
            min_pair_freq,
            out: out_path,
        } => {
            if langs.len() != corpora.len() {
                return Err(Error::InvalidConfig(format!(
                    "{} --lang values but {} --corpus values",
                    langs.len(),
                    corpora.len()
                )));
            }
            let tokenizer = Base::from_args(&base).load()?;
            let mut inputs = BTreeMap::new();
            let mut budgets = BTreeMap::new();
            for (lang, path) in langs.iter().zip(&corpora) {
                let corpus = Corpus::read(path).inspect_err(|e| {
                    if matches!(e, Error::InvalidUtf8 { .. }) {
                        eprintln!("{}:", path.display());
                    }
                })?;
                if inputs.insert(lang.clone(), corpus).is_some() {
                    return Err(Error::InvalidConfig(format!("language `{lang}` given twice")));
                }
                budgets.insert(
                    lang.clone(),
                    TrainerConfig {
                        budget_y: budget,
                        min_pair_freq,
                    },
                );
            }
            let extensions = learn_all(&inputs, &tokenizer, &budgets)?;
            let single = extensions.len() == 1;
            for ext in extensions {
                let path = if single {
                    out_path.clone()
                } else {
                    out_path.join(format!("{}.extension.json", ext.language))
                };
                let json = canonical_json(&with_header(seed, serde_json::to_value(&ext)?));
                write_file(&path, json.as_bytes())?;
                out(stdout, &path.display().to_string())?;
            }
            Ok(())
        }

        Command::Extend {
            base,
            extensions,
            families,
            no_family_prompts,
            out: out_dir,
        } => {
            let base_src = Base::from_args(&base);
            let tokenizer = base_src.load()?;
            let exts = extensions
                .iter()
                .map(LearnedExtension::read)
                .collect::<Result<Vec<_>>>()?;
            let prompts = if no_family_prompts {
                Vec::new()
            } else {
                load_families(families.as_deref())?.prompt_tokens()
            };
            let (extended, manifest) = extend_vocabulary(&tokenizer, &exts, &prompts)?;
            fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            match (&base_src, manifest.extended_fingerprint == manifest.base_fingerprint) {
                (Base::Dir(dir), true) => {
                    for name in [VOCAB_FILE, MERGES_FILE, ADDED_TOKENS_FILE] {
                        let src = dir.join(name);
                        if src.exists() {
                            let dst = out_dir.join(name);
                            fs::copy(&src, &dst).map_err(|e| Error::io(&dst, e))?;
                        }
                    }
                }
                _ => extended.save_dir(&out_dir)?,
            }
            let path = out_dir.join("manifest.json");
            let json = canonical_json(&with_header(seed, serde_json::to_value(&manifest)?));
            write_file(&path, json.as_bytes())?;
            out(stdout, &path.display().to_string())
        }

        Command::Encode {
            tok,
            text,
            input,
            specials,
            nfc,
        } => {
            let tokenizer = load_tokenizer(&tok)?;
            for line in read_input(text.as_deref(), input.as_deref())? {
                let line = if nfc { normalize(&line) } else { line };
                let ids = tokenizer.encode_with_specials(&line, specials);
                let joined: Vec<String> = ids.iter().map(u32::to_string).collect();
                out(stdout, &joined.join(" "))?;
            }
            Ok(())
        }

        Command::Decode { tok, ids, lossy } => {
            let tokenizer = load_tokenizer(&tok)?;
            let mode = if lossy { DecodeMode::Lossy } else { DecodeMode::Strict };
            let groups: Vec<Vec<TokenId>> = if ids.is_empty() {
                read_input(None, None)?
                    .iter()
                    .map(|l| {
                        l.split_whitespace()
                            .map(|t| {
                                t.parse()
                                    .map_err(|_| Error::InvalidConfig(format!("`{t}` is not a token id")))
                            })
                            .collect()
                    })
                    .collect::<Result<_>>()?
            } else {
                vec![ids]
            };
            for g in groups {
                out(stdout, &tokenizer.decode(&g, mode)?)?;
            }
            Ok(())
        }

        Command::Stats {
            base,
            corpus,
            extended,
            out: out_dir,
        } => {
            let base_tok = Base::from_args(&base).load()?;
            let ext_tok = Tokenizer::load_dir(&extended)?;
            let corpus = Corpus::read(&corpus)?;
            let report = reduction_report(&corpus.lines, &base_tok, &ext_tok);
            let mut body = serde_json::to_value(&report)?;
            body["fingerprints"] = json!({
                "base": fingerprint(base_tok.vocab(), base_tok.merges()),
                "extended": fingerprint(ext_tok.vocab(), ext_tok.merges()),
                "corpus": corpus.fingerprint,
            });
            let json_path = out_dir.join("report.json");
            write_file(&json_path, canonical_json(&with_header(seed, body)).as_bytes())?;
            write_file(&out_dir.join("report.csv"), report.to_csv().as_bytes())?;
            out(stdout, &json_path.display().to_string())
        }

        Command::BuildPrompt {
            lang,
            tokenizer,
            base,
            families,
            no_family_prompt,
            timestamps,
            task,
        } => {
            let map = load_families(families.as_deref())?;
            let tok = match tokenizer {
                Some(dir) => Tokenizer::load_dir(dir)?,
                None => {
                    let b = Base::from_args(&base).load()?;
                    extend_vocabulary(&b, &[], &map.prompt_tokens())?.0
                }
            };
            let options = PromptOptions {
                task: match task {
                    TaskArg::Transcribe => Task::Transcribe,
                    TaskArg::Translate => Task::Translate,
                },
                timestamps,
                use_family_prompt: !no_family_prompt,
            };
            let prompt = build_prompt(&lang, options, tok.vocab(), &map)?;
            out(stdout, &render_prompt(&prompt.ids, tok.vocab())?)?;
            let ids: Vec<String> = prompt.ids.iter().map(u32::to_string).collect();
            out(stdout, &ids.join(" "))
        }

        Command::ExpandHead {
            head,
            init_rows,
            hidden,
            k,
            tokenizer,
            out: out_path,
        } => {
            let head = match head {
                Some(p) => TokenHead::load(p)?,
                None => TokenHead::random(init_rows, hidden, seed)?,
            };
            let k = match (k, tokenizer) {
                (Some(k), _) => k,
                (None, Some(dir)) => {
                    let size = Tokenizer::load_dir(dir)?.vocab().len();
                    size.checked_sub(head.vocab_size()).ok_or_else(|| {
                        Error::InvalidConfig(format!(
                            "tokenizer has {size} tokens but the head already has {} rows",
                            head.vocab_size()
                        ))
                    })?
                }
                (None, None) => {
                    return Err(Error::InvalidConfig("give --k or --tokenizer".into()));
                }
            };
            expand_head(&head, k, seed.wrapping_add(1)).save(&out_path)?;
            out(stdout, &out_path.display().to_string())
        }

        Command::Bench {
            ns,
            runs,
            warmup,
            pairs,
            hidden,
            layers,
            vocab_size,
            out: out_path,
        } => {
            let config = BenchConfig {
                decoder: ToyDecoderConfig {
                    hidden_dim: hidden,
                    num_layers: layers,
                    rng_seed: seed,
                },
                vocab_size,
                ns,
                runs,
                warmup,
                pairs,
            };
            let result = run_bench(&config)?;
            let body = json!({
                "config": config,
                "pairs": config.pairs.iter().map(|&(b, e)| json!({"n_base": b, "n_ext": e})).collect::<Vec<_>>(),
                "volatile": {
                    "samples": result.samples.iter().map(|s| json!({
                        "N": s.n, "runs_ms": s.runs_ms, "median_ms": s.median_ms,
                    })).collect::<Vec<_>>(),
                    "fit": {
                        "a": result.fit.a * 1e6,
                        "b": result.fit.b * 1e6,
                        "r2": result.fit.r_squared,
                        "unit": "us",
                    },
                    "speedups": result.speedups,
                },
            });
            write_file(&out_path, canonical_json(&with_header(seed, body)).as_bytes())?;
            out(stdout, &out_path.display().to_string())
        }
    }
}

/// Parses arguments, runs, reports errors on stderr, and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if cli.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
