//! Converts a tiktoken rank file into a tokenizer directory and appends
//! Whisper's special tokens (with `<SOT>`/`<SOTP>` as the start markers).
//!
//! cargo run --example import_tiktoken -- path/to/gpt2.tiktoken assets/gpt2

use std::path::PathBuf;

use graftok::bpe::io::from_tiktoken;
use graftok::Tokenizer;

const LANGUAGES: [&str; 99] = [
    "en", "zh", "de", "es", "ru", "ko", "fr", "ja", "pt", "tr", "pl", "ca", "nl", "ar", "sv",
    "it", "id", "hi", "fi", "vi", "he", "uk", "el", "ms", "cs", "ro", "da", "hu", "ta", "no",
    "th", "ur", "hr", "bg", "lt", "la", "mi", "ml", "cy", "sk", "te", "fa", "lv", "bn", "sr",
    "az", "sl", "kn", "et", "mk", "br", "eu", "is", "hy", "ne", "mn", "bs", "kk", "sq", "sw",
    "gl", "mr", "pa", "si", "km", "sn", "yo", "so", "af", "oc", "ka", "be", "tg", "sd", "gu",
    "am", "yi", "lo", "uz", "fo", "ht", "ps", "tk", "nn", "mt", "sa", "lb", "my", "bo", "tl",
    "mg", "as", "tt", "haw", "ln", "ha", "ba", "jw", "su",
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let src = PathBuf::from(args.next().expect("usage: import_tiktoken <ranks> <out-dir>"));
    let out = PathBuf::from(args.next().expect("usage: import_tiktoken <ranks> <out-dir>"));
    let (mut vocab, merges) = from_tiktoken(&std::fs::read_to_string(&src)?)?;

    let mut specials = vec!["<|endoftext|>".to_string(), "<SOT>".to_string()];
    specials.extend(LANGUAGES.iter().map(|l| format!("<|{l}|>")));
    for s in [
        "<|translate|>",
        "<|transcribe|>",
        "<|startoflm|>",
        "<SOTP>",
        "<|nospeech|>",
        "<|notimestamps|>",
    ] {
        specials.push(s.to_string());
    }
    specials.extend((0..1501).map(|i| format!("<|{:.2}|>", i as f64 * 0.02)));
    for s in specials {
        vocab.push_special(s)?;
    }
    vocab.mark_base();

    let tok = Tokenizer::new(vocab, merges)?;
    tok.save_dir(&out)?;
    eprintln!(
        "wrote {} tokens ({} specials), {} merges to {}",
        tok.vocab().len(),
        tok.vocab().num_specials(),
        tok.merges().len(),
        out.display()
    );
    Ok(())
}
