mod common;

use graftok::bpe::io::{merges_to_text, parse_merges, parse_vocab, vocab_to_json, added_tokens_to_json};
use graftok::{DecodeMode, Tokenizer};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn hindi_extended() -> &'static Tokenizer {
    static TOK: OnceLock<Tokenizer> = OnceLock::new();
    TOK.get_or_init(|| {
        let (train, _) = common::synth::split("hi", 2000, 0, 5);
        common::extend(&[common::train("hi", &train, 250)])
    })
}

#[test]
fn known_gpt2_ids() {
    let base = Tokenizer::gpt2_base();
    assert_eq!(base.encode("I love my country"), vec![40, 1842, 616, 1499]);
    assert_eq!(base.encode("Hello world"), vec![15496, 995]);
    assert_eq!(base.encode(""), Vec::<u32>::new());
    assert_eq!(base.vocab().special_id("<|endoftext|>"), Some(50256));
}

#[test]
fn bundled_files_roundtrip_through_writers() {
    let base = Tokenizer::gpt2_base();
    let vocab = parse_vocab(&vocab_to_json(base.vocab()), Some(&added_tokens_to_json(base.vocab()))).unwrap();
    let merges = parse_merges(&merges_to_text(base.merges())).unwrap();
    assert_eq!(&vocab, base.vocab());
    assert_eq!(merges.rules(), base.merges().rules());
    let assets = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/gpt2");
    let read = |f: &str| std::fs::read_to_string(assets.join(f)).unwrap();
    assert_eq!(vocab_to_json(base.vocab()), read("vocab.json"));
    assert_eq!(added_tokens_to_json(base.vocab()), read("added_tokens.json"));
    assert_eq!(merges_to_text(base.merges()), read("merges.txt"));
}

#[test]
fn specials_are_opt_in() {
    let base = Tokenizer::gpt2_base();
    let sot = base.vocab().special_id("<SOT>").unwrap();
    assert_eq!(base.encode_with_specials("<SOT>hi", true)[0], sot);
    assert!(!base.encode("<SOT>hi").contains(&sot));
    assert_eq!(base.decode(&[sot], DecodeMode::Strict).unwrap(), "<SOT>");
}

#[test]
fn seeded_mixed_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ext = hindi_extended();
    for _ in 0..300 {
        let s = common::synth::mixed_string(&mut rng);
        for tok in [Tokenizer::gpt2_base(), ext] {
            assert_eq!(tok.decode(&tok.encode(&s), DecodeMode::Strict).unwrap(), s);
        }
    }
}

proptest! {
    #[test]
    fn roundtrip_any_string(s in "\\PC{0,60}") {
        let base = Tokenizer::gpt2_base();
        prop_assert_eq!(base.decode(&base.encode(&s), DecodeMode::Strict).unwrap(), s.clone());
        let ext = hindi_extended();
        prop_assert_eq!(ext.decode(&ext.encode(&s), DecodeMode::Strict).unwrap(), s);
    }

    #[test]
    fn extension_never_lengthens(s in "[\\u0900-\\u097F a-z]{0,80}") {
        let ext = hindi_extended().encode(&s).len();
        let base = Tokenizer::gpt2_base().encode(&s).len();
        prop_assert!(ext <= base, "{} > {}", ext, base);
    }

    #[test]
    fn text_without_devanagari_is_unchanged(s in "[a-zA-Z0-9 .,!?\\u0B80-\\u0BFF]{0,80}") {
        prop_assert_eq!(hindi_extended().encode(&s), Tokenizer::gpt2_base().encode(&s));
    }

    #[test]
    fn bytes_api_matches_str_api(s in "\\PC{0,30}") {
        let base = Tokenizer::gpt2_base();
        prop_assert_eq!(base.encode_bytes(s.as_bytes()).unwrap(), base.encode(&s));
    }

    #[test]
    fn chunk_prefix_stability(a in "[\\u0900-\\u097F]{1,20}", b in "[\\u0900-\\u097Fa-z]{1,20}") {
        // a space starts a new chunk, so the first chunk's tokens never change
        let ext = hindi_extended();
        let whole = ext.encode(&format!("{a} {b}"));
        let head = ext.encode(&a);
        prop_assert_eq!(&whole[..head.len()], &head[..]);
    }
}

#[test]
fn invalid_utf8_is_rejected() {
    assert!(Tokenizer::gpt2_base().encode_bytes(&[b'a', 0xff]).is_err());
}
