use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use affcorr::RecordError;
use serde::Serialize;

use crate::Failure;

pub fn open_input(path: &str) -> Result<Box<dyn BufRead>, Failure> {
    if path == "-" {
        return Ok(Box::new(BufReader::new(io::stdin().lock())));
    }
    let file = File::open(Path::new(path)).map_err(|e| Failure::io(format!("{path}: {e}")))?;
    Ok(Box::new(BufReader::new(file)))
}

pub fn open_output(path: &str) -> Result<Box<dyn Write>, Failure> {
    if path == "-" {
        return Ok(Box::new(BufWriter::new(io::stdout().lock())));
    }
    let file = File::create(Path::new(path)).map_err(|e| Failure::io(format!("{path}: {e}")))?;
    Ok(Box::new(BufWriter::new(file)))
}

/// Input line with its 1-based line number. Lines that are not valid UTF-8
/// come back as a `parse-error` instead of aborting the stream.
pub struct Line {
    pub number: u64,
    pub text: Result<String, RecordError>,
}

pub struct Lines<R> {
    reader: R,
    number: u64,
    buf: Vec<u8>,
}

impl<R: BufRead> Lines<R> {
    pub fn new(reader: R) -> Self {
        Self {
            reader,
            number: 0,
            buf: Vec::new(),
        }
    }
}

impl<R: BufRead> Iterator for Lines<R> {
    type Item = Result<Line, Failure>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(Failure::io(format!("read failed: {e}")))),
            }
            self.number += 1;
            while matches!(self.buf.last(), Some(b'\n' | b'\r')) {
                self.buf.pop();
            }
            if self.buf.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let text = String::from_utf8(self.buf.clone()).map_err(|e| RecordError {
                reason: "parse-error",
                detail: format!("invalid UTF-8: {e}"),
            });
            return Some(Ok(Line {
                number: self.number,
                text,
            }));
        }
    }
}

#[derive(Serialize)]
struct SidecarEntry<'a> {
    line: u64,
    reason: &'a str,
    detail: &'a str,
    input: &'a str,
}

/// Rejected records, one JSON object per line.
pub struct Sidecar {
    out: Box<dyn Write>,
    pub count: u64,
}

impl Sidecar {
    pub fn open(path: Option<&str>) -> Result<Self, Failure> {
        let out: Box<dyn Write> = match path {
            Some(p) => open_output(p)?,
            None => Box::new(io::stderr()),
        };
        Ok(Self { out, count: 0 })
    }

    pub fn reject(&mut self, line: u64, err: &RecordError, input: &str) -> Result<(), Failure> {
        let entry = SidecarEntry {
            line,
            reason: err.reason,
            detail: &err.detail,
            input,
        };
        let json = serde_json::to_string(&entry).expect("sidecar entry serializes");
        writeln!(self.out, "{json}").map_err(|e| Failure::io(format!("sidecar: {e}")))?;
        self.count += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<u64, Failure> {
        self.out
            .flush()
            .map_err(|e| Failure::io(format!("sidecar: {e}")))?;
        Ok(self.count)
    }
}
