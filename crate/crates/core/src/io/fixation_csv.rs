//! Fixation event CSV: header `subject,frame,row,col`, one event per line.
//! Subjects are free-form labels (`s1`, `obs-03`, ...); they are interned to
//! numeric ids in order of first appearance. All parse and bounds errors
//! carry 1-based line numbers.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::truth::{FixationEvent, FixationEventLog};

pub const HEADER: &str = "subject,frame,row,col";

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

/// Parses a fixation CSV against the given source geometry. When
/// `frame_count` is absent it is inferred as `max frame + 1` (which
/// requires at least one event).
pub fn read_fixation_csv(
    path: &Path,
    source_height: usize,
    source_width: usize,
    frame_count: Option<usize>,
) -> Result<FixationEventLog> {
    let text = std::fs::read_to_string(path)?;
    parse_fixation_csv(&text, source_height, source_width, frame_count)
}

/// String-level parser behind [`read_fixation_csv`].
pub fn parse_fixation_csv(
    text: &str,
    source_height: usize,
    source_width: usize,
    frame_count: Option<usize>,
) -> Result<FixationEventLog> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file, expected header"))?;
    if header.trim() != HEADER {
        return Err(parse_err(1, format!("expected header '{HEADER}', got '{}'", header.trim())));
    }

    let mut subject_ids: HashMap<String, u32> = HashMap::new();
    let mut events = Vec::new();
    let mut max_frame = 0usize;
    for (i, raw) in lines {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(parse_err(
                line_no,
                format!("expected 4 comma-separated fields, got {}", fields.len()),
            ));
        }
        if fields[0].is_empty() {
            return Err(parse_err(line_no, "empty subject label"));
        }
        let next_id = subject_ids.len() as u32;
        let subject = *subject_ids
            .entry(fields[0].to_string())
            .or_insert(next_id);

        let number = |field: &str, name: &str| -> Result<usize> {
            field
                .parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("{name} '{field}' is not a non-negative integer")))
        };
        let frame = number(fields[1], "frame")?;
        let row = number(fields[2], "row")?;
        let col = number(fields[3], "col")?;

        if row >= source_height {
            return Err(parse_err(
                line_no,
                format!("row {row} outside 0..{source_height}"),
            ));
        }
        if col >= source_width {
            return Err(parse_err(
                line_no,
                format!("col {col} outside 0..{source_width}"),
            ));
        }
        if let Some(k) = frame_count {
            if frame >= k {
                return Err(parse_err(line_no, format!("frame {frame} outside 0..{k}")));
            }
        }
        max_frame = max_frame.max(frame);
        events.push(FixationEvent {
            subject,
            frame,
            row,
            col,
        });
    }

    let frames = match frame_count {
        Some(k) => k,
        None => {
            if events.is_empty() {
                return Err(parse_err(
                    1,
                    "cannot infer frame count from a file with no events",
                ));
            }
            max_frame + 1
        }
    };
    FixationEventLog::new(source_height, source_width, frames, events)
}

/// Writes a log back out (atomically), labeling subject n as `s<n>`.
pub fn write_fixation_csv(path: &Path, log: &FixationEventLog) -> Result<()> {
    let mut text = String::with_capacity(16 * log.events().len() + HEADER.len() + 1);
    text.push_str(HEADER);
    text.push('\n');
    for e in log.events() {
        text.push_str(&format!("s{},{},{},{}\n", e.subject, e.frame, e.row, e.col));
    }
    super::atomic_write(path, text.as_bytes())
}
