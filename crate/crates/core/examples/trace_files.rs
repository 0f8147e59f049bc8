//! Writes target and reference traces in the JSONL interchange format, reads
//! them back with the streaming reader, and joins them with labels.
//!
//! Run with `cargo run --example trace_files`.

use std::collections::BTreeMap;
use std::io::Cursor;

use htmia::trace::{join_samples, Label, TokenTrace, TraceFileHeader, TraceReader, TraceWriter, Variant};

fn write(model: &str, rows: &[(&str, Vec<f64>)]) -> Vec<u8> {
    let header = TraceFileHeader::new("demo-tokenizer", model, 16);
    let mut w = TraceWriter::new(Vec::new(), &header).unwrap();
    for (id, probs) in rows {
        let tokens = (0..=probs.len() as u32).map(|t| t * 7).collect();
        w.write(&TokenTrace::new(*id, model, Variant::Original, tokens, probs.clone()).unwrap())
            .unwrap();
    }
    w.finish().unwrap()
}

fn main() {
    let target = write(
        "target",
        &[("a", vec![0.5, 0.125, 0.9]), ("b", vec![0.3, 0.2, 0.7])],
    );
    let reference = write(
        "reference",
        &[("b", vec![0.3, 0.1, 0.6]), ("c", vec![0.4, 0.4, 0.4])],
    );
    println!("target file:\n{}", String::from_utf8_lossy(&target));

    let read = |bytes: &[u8]| {
        let reader = TraceReader::new(Cursor::new(bytes.to_vec())).unwrap();
        println!("reading {} traces", reader.header().model_id);
        reader.collect::<Result<Vec<_>, _>>().unwrap()
    };
    let labels = BTreeMap::from([("b".to_string(), Label::Member)]);
    let joined = join_samples(read(&target), read(&reference), &labels).unwrap();

    println!("{}", joined.summary);
    for rec in &joined.records {
        println!(
            "{} ({}): {} scored positions",
            rec.sample_id,
            rec.label.as_str(),
            rec.len()
        );
    }

    let malformed = b"{\"schema_version\":\"1\",\"tokenizer_id\":\"t\",\"model_id\":\"m\",\"max_length\":4}\n\
                      {\"sample_id\":\"x\",\"variant\":\"original\",\"token_ids\":[1,2],\"next_token_probs\":[1.7]}\n";
    let err = TraceReader::new(Cursor::new(&malformed[..]))
        .unwrap()
        .next()
        .unwrap()
        .unwrap_err();
    println!("rejected bad line: {err}");
}
