use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use super::{Channel, TimeTagEvent};
use crate::error::{Error, Result};
use crate::Side;

/// `site: u8, channel: u8, timestamp_ps: u64 LE`.
pub const RECORD_BYTES: usize = 10;

/// Per-site event lists, each sorted by timestamp (stable for ties).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteStreams {
    pub a: Vec<TimeTagEvent>,
    pub b: Vec<TimeTagEvent>,
}

impl SiteStreams {
    pub fn from_events(events: impl IntoIterator<Item = TimeTagEvent>) -> Self {
        let mut s = SiteStreams::default();
        for e in events {
            match e.site {
                Side::A => s.a.push(e),
                Side::B => s.b.push(e),
            }
        }
        s.sort();
        s
    }

    pub fn sort(&mut self) {
        self.a.sort_by_key(|e| e.timestamp_ps);
        self.b.sort_by_key(|e| e.timestamp_ps);
    }

    pub fn side(&self, side: Side) -> &[TimeTagEvent] {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }

    pub fn len(&self) -> usize {
        self.a.len() + self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn site_from_code(code: u8, index: usize) -> Result<Side> {
    match code {
        0 => Ok(Side::A),
        1 => Ok(Side::B),
        _ => Err(Error::UnknownCode {
            kind: "site",
            code,
            index,
        }),
    }
}

/// Decode the binary record format.
pub fn parse_timetags(bytes: &[u8]) -> Result<SiteStreams> {
    let chunks = bytes.chunks_exact(RECORD_BYTES);
    if !chunks.remainder().is_empty() {
        return Err(Error::TruncatedRecord(bytes.len() - chunks.remainder().len()));
    }
    let events = chunks
        .enumerate()
        .map(|(k, rec)| {
            let mut ts = [0u8; 8];
            ts.copy_from_slice(&rec[2..]);
            Ok(TimeTagEvent {
                site: site_from_code(rec[0], k)?,
                channel: Channel::from_code(rec[1], k)?,
                timestamp_ps: u64::from_le_bytes(ts),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SiteStreams::from_events(events))
}

/// Encode events in the binary record format, A stream then B stream.
pub fn write_timetags<W: Write>(streams: &SiteStreams, mut out: W) -> Result<()> {
    let mut buf = Vec::with_capacity(streams.len() * RECORD_BYTES);
    for e in streams.a.iter().chain(&streams.b) {
        buf.push(e.site.index() as u8);
        buf.push(e.channel.code());
        buf.extend_from_slice(&e.timestamp_ps.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

/// Decode `site,channel,timestamp_ps` lines (`#` comments allowed). Site is
/// `A`/`B` or `0`/`1`; channel is its code 0–3.
pub fn parse_timetags_text<R: Read>(input: R) -> Result<SiteStreams> {
    let mut events = Vec::new();
    for (k, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let bad = || Error::InvalidInput(format!("time-tag line {}: expected `site,channel,timestamp_ps`", k + 1));
        let cols: Vec<&str> = body.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(bad());
        }
        let site = match cols[0] {
            "A" | "a" | "0" => Side::A,
            "B" | "b" | "1" => Side::B,
            _ => return Err(bad()),
        };
        let channel = Channel::from_code(cols[1].parse().map_err(|_| bad())?, k)?;
        let timestamp_ps = cols[2].parse().map_err(|_| bad())?;
        events.push(TimeTagEvent {
            site,
            channel,
            timestamp_ps,
        });
    }
    Ok(SiteStreams::from_events(events))
}

pub fn write_timetags_text<W: Write>(streams: &SiteStreams, mut out: W) -> Result<()> {
    writeln!(out, "# site,channel,timestamp_ps")?;
    for e in streams.a.iter().chain(&streams.b) {
        writeln!(out, "{},{},{}", e.site.label(), e.channel.code(), e.timestamp_ps)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(site: Side, channel: Channel, t: u64) -> TimeTagEvent {
        TimeTagEvent {
            timestamp_ps: t,
            site,
            channel,
        }
    }

    #[test]
    fn empty_input() {
        assert!(parse_timetags(&[]).unwrap().is_empty());
        assert!(parse_timetags_text("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn sorts_stably() {
        let events = vec![
            ev(Side::A, Channel::OutcomePlus, 30),
            ev(Side::A, Channel::OutcomeMinus, 10),
            ev(Side::A, Channel::SettingRed, 10),
        ];
        let s = SiteStreams::from_events(events);
        assert_eq!(s.a.iter().map(|e| e.timestamp_ps).collect::<Vec<_>>(), vec![10, 10, 30]);
        assert_eq!(s.a[0].channel, Channel::OutcomeMinus);
        assert_eq!(s.a[1].channel, Channel::SettingRed);
    }

    #[test]
    fn binary_and_text_round_trip() {
        let s = SiteStreams::from_events(vec![
            ev(Side::B, Channel::SettingBlue, u64::MAX),
            ev(Side::A, Channel::OutcomePlus, 5),
            ev(Side::A, Channel::OutcomePlus, 5),
        ]);
        let mut bin = Vec::new();
        write_timetags(&s, &mut bin).unwrap();
        assert_eq!(bin.len(), 3 * RECORD_BYTES);
        assert_eq!(parse_timetags(&bin).unwrap(), s);
        let mut txt = Vec::new();
        write_timetags_text(&s, &mut txt).unwrap();
        assert_eq!(parse_timetags_text(txt.as_slice()).unwrap(), s);
    }

    #[test]
    fn rejects_truncated_and_unknown() {
        let mut bin = Vec::new();
        write_timetags(
            &SiteStreams::from_events(vec![ev(Side::A, Channel::OutcomePlus, 1)]),
            &mut bin,
        )
        .unwrap();
        assert!(matches!(parse_timetags(&bin[..7]), Err(Error::TruncatedRecord(0))));
        bin[1] = 9;
        assert!(matches!(
            parse_timetags(&bin),
            Err(Error::UnknownCode { kind: "channel", .. })
        ));
        bin[1] = 0;
        bin[0] = 2;
        assert!(matches!(
            parse_timetags(&bin),
            Err(Error::UnknownCode { kind: "site", .. })
        ));
        assert!(parse_timetags_text("A,5,10\n".as_bytes()).is_err());
        assert!(parse_timetags_text("C,0,10\n".as_bytes()).is_err());
    }
}
