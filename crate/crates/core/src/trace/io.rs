use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Label, TokenTrace, TraceFileHeader, TraceValidationError, Variant, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("read failure: {0}")]
    Io(#[from] io::Error),
    #[error("input is empty; expected a header line")]
    MissingHeader,
    #[error("line {line}: malformed JSON: {message}")]
    MalformedJson { line: u64, message: String },
    #[error("line {line}: unknown schema_version '{version}' (expected '{SCHEMA_VERSION}')")]
    UnknownSchema { line: u64, version: String },
    #[error("line {line}: invalid header: {message}")]
    InvalidHeader { line: u64, message: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: u64,
        #[source]
        source: TraceValidationError,
    },
    #[error("line {line}: duplicate sample_id '{sample_id}'")]
    DuplicateId { line: u64, sample_id: String },
}

impl TraceError {
    /// 1-based line number the error refers to, when there is one.
    pub fn line(&self) -> Option<u64> {
        match self {
            TraceError::MalformedJson { line, .. }
            | TraceError::UnknownSchema { line, .. }
            | TraceError::InvalidHeader { line, .. }
            | TraceError::Invalid { line, .. }
            | TraceError::DuplicateId { line, .. } => Some(*line),
            _ => None,
        }
    }
}

#[derive(Deserialize)]
struct TraceLine {
    sample_id: String,
    variant: Variant,
    token_ids: Vec<u32>,
    next_token_probs: Vec<f64>,
}

#[derive(Serialize)]
struct TraceLineRef<'a> {
    sample_id: &'a str,
    variant: Variant,
    token_ids: &'a [u32],
    next_token_probs: &'a [f64],
}

/// Line-at-a-time reader; holds one record in memory at a time.
pub struct TraceReader<R> {
    input: R,
    header: TraceFileHeader,
    line: u64,
    buf: String,
}

impl<R: BufRead> TraceReader<R> {
    /// Reads and validates the header line.
    pub fn new(mut input: R) -> Result<Self, TraceError> {
        let mut buf = String::new();
        let mut line = 0;
        loop {
            buf.clear();
            if input.read_line(&mut buf)? == 0 {
                return Err(TraceError::MissingHeader);
            }
            line += 1;
            if !buf.trim().is_empty() {
                break;
            }
        }
        let header: TraceFileHeader =
            serde_json::from_str(buf.trim()).map_err(|e| TraceError::MalformedJson {
                line,
                message: e.to_string(),
            })?;
        if header.schema_version != SCHEMA_VERSION {
            return Err(TraceError::UnknownSchema {
                line,
                version: header.schema_version,
            });
        }
        if header.max_length == 0 {
            return Err(TraceError::InvalidHeader {
                line,
                message: "max_length must be >= 1".into(),
            });
        }
        Ok(Self {
            input,
            header,
            line,
            buf,
        })
    }

    pub fn header(&self) -> &TraceFileHeader {
        &self.header
    }

    fn next_trace(&mut self) -> Option<Result<TokenTrace, TraceError>> {
        loop {
            self.buf.clear();
            match self.input.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line += 1;
            let text = self.buf.trim();
            if text.is_empty() {
                continue;
            }
            let line = self.line;
            let parsed: TraceLine = match serde_json::from_str(text) {
                Ok(p) => p,
                Err(e) => {
                    return Some(Err(TraceError::MalformedJson {
                        line,
                        message: e.to_string(),
                    }))
                }
            };
            let trace = TokenTrace::new(
                parsed.sample_id,
                self.header.model_id.clone(),
                parsed.variant,
                parsed.token_ids,
                parsed.next_token_probs,
            )
            .map_err(|source| TraceError::Invalid { line, source });
            return Some(trace);
        }
    }
}

impl<R: BufRead> Iterator for TraceReader<R> {
    type Item = Result<TokenTrace, TraceError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_trace()
    }
}

/// Parses a whole trace file, stopping at the first invalid line.
pub fn parse_trace_file<R: BufRead>(input: R) -> Result<(TraceFileHeader, Vec<TokenTrace>), TraceError> {
    let mut reader = TraceReader::new(input)?;
    let mut traces = Vec::new();
    for trace in &mut reader {
        traces.push(trace?);
    }
    Ok((reader.header, traces))
}

/// Writes the header on construction, then one line per trace.
pub struct TraceWriter<W: Write> {
    out: W,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(mut out: W, header: &TraceFileHeader) -> io::Result<Self> {
        serde_json::to_writer(&mut out, header)?;
        out.write_all(b"\n")?;
        Ok(Self { out })
    }

    pub fn write(&mut self, trace: &TokenTrace) -> io::Result<()> {
        let line = TraceLineRef {
            sample_id: &trace.sample_id,
            variant: trace.variant,
            token_ids: &trace.token_ids,
            next_token_probs: &trace.next_token_probs,
        };
        serde_json::to_writer(&mut self.out, &line)?;
        self.out.write_all(b"\n")
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

#[derive(Serialize, Deserialize)]
struct LabelLine {
    sample_id: String,
    label: Label,
}

#[derive(Serialize, Deserialize)]
struct TextLine {
    sample_id: String,
    text: String,
}

fn read_keyed_lines<R: BufRead, T: serde::de::DeserializeOwned>(
    input: R,
    mut key: impl FnMut(&T) -> String,
) -> Result<Vec<(u64, String, T)>, TraceError> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let number = idx as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: T = serde_json::from_str(line.trim()).map_err(|e| TraceError::MalformedJson {
            line: number,
            message: e.to_string(),
        })?;
        let k = key(&value);
        out.push((number, k, value));
    }
    Ok(out)
}

/// Reads a labels JSONL file into a map; duplicate ids are an error.
pub fn read_labels<R: BufRead>(input: R) -> Result<BTreeMap<String, Label>, TraceError> {
    let mut labels = BTreeMap::new();
    for (line, id, value) in read_keyed_lines::<_, LabelLine>(input, |l| l.sample_id.clone())? {
        if labels.insert(id.clone(), value.label).is_some() {
            return Err(TraceError::DuplicateId { line, sample_id: id });
        }
    }
    Ok(labels)
}

pub fn write_labels<W: Write>(mut out: W, labels: &BTreeMap<String, Label>) -> io::Result<()> {
    for (sample_id, &label) in labels {
        serde_json::to_writer(
            &mut out,
            &LabelLine {
                sample_id: sample_id.clone(),
                label,
            },
        )?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads the raw-text sidecar used by the Zlib attack.
pub fn read_texts<R: BufRead>(input: R) -> Result<BTreeMap<String, String>, TraceError> {
    let mut texts = BTreeMap::new();
    for (line, id, value) in read_keyed_lines::<_, TextLine>(input, |l| l.sample_id.clone())? {
        if texts.insert(id.clone(), value.text).is_some() {
            return Err(TraceError::DuplicateId { line, sample_id: id });
        }
    }
    Ok(texts)
}

pub fn write_texts<W: Write>(mut out: W, texts: &BTreeMap<String, String>) -> io::Result<()> {
    for (sample_id, text) in texts {
        serde_json::to_writer(
            &mut out,
            &TextLine {
                sample_id: sample_id.clone(),
                text: text.clone(),
            },
        )?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
