//! Line-based event files.
//!
//! ```text
//! # spce-events v1
//! 1532,A,1,+1
//! 1610,B,2,-1
//! ```
//!
//! Records are `time_ns,side,setting,outcome`, merged by time with A before B
//! on equal times, and time-sorted within each side.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::models::Spin;
use crate::simulate::{EventRecord, EventStreams, Side};

pub const EVENTS_HEADER: &str = "# spce-events v1";

fn push_record(out: &mut String, e: &EventRecord) {
    let outcome = match e.outcome {
        Spin::Up => "+1",
        Spin::Down => "-1",
    };
    let _ = writeln!(out, "{},{},{},{}", e.time_ns, e.side, e.setting, outcome);
}

pub fn format_events(streams: &EventStreams) -> String {
    let mut out = String::with_capacity(24 * (streams.len() + 1));
    out.push_str(EVENTS_HEADER);
    out.push('\n');
    let (a, b) = (&streams.a, &streams.b);
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].time_ns <= b[j].time_ns) {
            push_record(&mut out, &a[i]);
            i += 1;
        } else {
            push_record(&mut out, &b[j]);
            j += 1;
        }
    }
    out
}

pub fn write_events(path: &Path, streams: &EventStreams) -> Result<()> {
    std::fs::write(path, format_events(streams))?;
    Ok(())
}

pub fn read_events(path: &Path) -> Result<EventStreams> {
    let text = std::fs::read_to_string(path)?;
    parse_events(&text, &path.display().to_string())
}

/// Parses event-file text; `origin` names the source in diagnostics.
pub fn parse_events(text: &str, origin: &str) -> Result<EventStreams> {
    let fail = |line: usize, message: String| Error::Format {
        path: origin.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == EVENTS_HEADER => {}
        _ => return Err(fail(1, format!("expected header `{EVENTS_HEADER}`"))),
    }
    let mut streams = EventStreams::default();
    for (idx, line) in lines {
        let n = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        let [time, side, setting, outcome] = fields[..] else {
            return Err(fail(n, format!("expected 4 comma-separated fields, got {}", fields.len())));
        };
        let time_ns: u64 = time
            .parse()
            .map_err(|_| fail(n, format!("bad time `{time}`")))?;
        let side = match side {
            "A" => Side::A,
            "B" => Side::B,
            _ => return Err(fail(n, format!("bad side `{side}`"))),
        };
        let setting = match setting {
            "1" => 1,
            "2" => 2,
            _ => return Err(fail(n, format!("bad setting `{setting}`"))),
        };
        let outcome = match outcome {
            "+1" => Spin::Up,
            "-1" => Spin::Down,
            _ => return Err(fail(n, format!("bad outcome `{outcome}`"))),
        };
        let stream = match side {
            Side::A => &mut streams.a,
            Side::B => &mut streams.b,
        };
        if stream.last().is_some_and(|prev| prev.time_ns > time_ns) {
            return Err(fail(n, format!("side {side} time goes backwards")));
        }
        stream.push(EventRecord {
            time_ns,
            side,
            setting,
            outcome,
        });
    }
    Ok(streams)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: u64, side: Side, outcome: Spin) -> EventRecord {
        EventRecord {
            time_ns: t,
            side,
            setting: 1,
            outcome,
        }
    }

    #[test]
    fn empty_stream_is_header_only() {
        let text = format_events(&EventStreams::default());
        assert_eq!(text, "# spce-events v1\n");
        assert!(parse_events(&text, "t").unwrap().is_empty());
    }

    #[test]
    fn ties_put_a_first() {
        let s = EventStreams {
            a: vec![rec(5, Side::A, Spin::Up)],
            b: vec![rec(3, Side::B, Spin::Down), rec(5, Side::B, Spin::Up)],
        };
        let text = format_events(&s);
        assert_eq!(text, "# spce-events v1\n3,B,1,-1\n5,A,1,+1\n5,B,1,+1\n");
        assert_eq!(parse_events(&text, "t").unwrap(), s);
    }

    #[test]
    fn malformed_lines_report_their_number() {
        let cases = [
            "# spce-events v1\n1,A,1,+1\n2,A,1,2\n",
            "# spce-events v1\n1,A,1,+1\n2,C,1,+1\n",
            "# spce-events v1\n1,A,1,+1\n2,A,3,+1\n",
            "# spce-events v1\n1,A,1,+1\nx,A,1,+1\n",
            "# spce-events v1\n1,A,1,+1\n2,A,1\n",
            "# spce-events v1\n5,A,1,+1\n2,A,1,+1\n",
        ];
        for text in cases {
            match parse_events(text, "f") {
                Err(Error::Format { line, .. }) => assert_eq!(line, 3, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(parse_events("1,A,1,+1\n", "f"), Err(Error::Format { line: 1, .. })));
    }
}
