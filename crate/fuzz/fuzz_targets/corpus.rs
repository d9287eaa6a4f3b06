#![no_main]

use capeval_core::corpus::io::corpus_from_jsonl;
use capeval_core::corpus::DatasetTag;
use libfuzzer_sys::fuzz_target;

// Three files separated by NUL bytes.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut parts = text.splitn(3, '\0');
    let captions = parts.next().unwrap_or("");
    let references = parts.next().unwrap_or("");
    let assessments = parts.next().unwrap_or("");
    let _ = corpus_from_jsonl(captions, references, assessments, DatasetTag::Synthetic);
});
