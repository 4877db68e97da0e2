//! Streaming PGN header parser.
//!
//! Only the tag-pair section of each game is interpreted; movetext is scanned
//! purely to find game boundaries. Games that cannot yield a usable record
//! are skipped and counted by reason rather than aborting the stream; only
//! I/O failures are fatal.

use std::io::{self, BufRead};

use serde::{Deserialize, Serialize};

use super::{GameRecord, Outcome};

/// Per-stream accounting. Every game encountered is either yielded or counted
/// under exactly one skip reason.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseStats {
    pub games_seen: u64,
    pub yielded: u64,
    /// Tag section contained an unparseable tag pair.
    pub skipped_malformed_header: u64,
    /// WhiteElo, BlackElo or Result tag absent.
    pub skipped_missing_tags: u64,
    /// A rating tag was provisional ("?"), non-numeric or non-positive.
    pub skipped_invalid_rating: u64,
    /// Result tag was not one of 1-0, 0-1, 1/2-1/2.
    pub skipped_invalid_result: u64,
}

impl ParseStats {
    pub fn skipped_total(&self) -> u64 {
        self.skipped_malformed_header
            + self.skipped_missing_tags
            + self.skipped_invalid_rating
            + self.skipped_invalid_result
    }

    /// Outcome conservation: every game seen is yielded or skipped.
    pub fn is_conserved(&self) -> bool {
        self.games_seen == self.yielded + self.skipped_total()
    }
}

#[derive(Default)]
struct RawGame {
    white_elo: Option<String>,
    black_elo: Option<String>,
    result: Option<String>,
    malformed: bool,
    saw_content: bool,
}

/// Iterator over the valid game records of one PGN stream.
pub struct PgnParser<R> {
    reader: R,
    source_tag: String,
    stats: ParseStats,
    /// Header line that terminated the previous game, carried into the next.
    pending: Option<String>,
    done: bool,
}

impl<R: BufRead> PgnParser<R> {
    pub fn new(reader: R, source_tag: impl Into<String>) -> Self {
        PgnParser {
            reader,
            source_tag: source_tag.into(),
            stats: ParseStats::default(),
            pending: None,
            done: false,
        }
    }

    pub fn stats(&self) -> &ParseStats {
        &self.stats
    }

    pub fn into_stats(self) -> ParseStats {
        self.stats
    }

    fn next_line(&mut self) -> io::Result<Option<String>> {
        if let Some(line) = self.pending.take() {
            return Ok(Some(line));
        }
        let mut buf = String::new();
        let n = self.reader.read_line(&mut buf)?;
        if n == 0 {
            return Ok(None);
        }
        while buf.ends_with('\n') || buf.ends_with('\r') {
            buf.pop();
        }
        Ok(Some(buf))
    }

    /// Scans one game: a run of tag-pair lines followed by movetext, ended by
    /// the next tag-pair line or end of stream.
    fn next_raw(&mut self) -> io::Result<Option<RawGame>> {
        let mut game = RawGame::default();
        let mut in_headers = true;
        loop {
            let Some(line) = self.next_line()? else {
                return Ok(if game.saw_content { Some(game) } else { None });
            };
            let trimmed = line.trim();
            if trimmed.is_empty() {
                if game.saw_content {
                    in_headers = false;
                }
                continue;
            }
            if trimmed.starts_with('[') {
                if in_headers {
                    game.saw_content = true;
                    match parse_tag(trimmed) {
                        Some((key, value)) => match key.as_str() {
                            "WhiteElo" => game.white_elo = Some(value),
                            "BlackElo" => game.black_elo = Some(value),
                            "Result" => game.result = Some(value),
                            _ => {}
                        },
                        None => game.malformed = true,
                    }
                } else {
                    // Start of the next game's tag section.
                    self.pending = Some(line);
                    return Ok(Some(game));
                }
            } else {
                // Movetext; only its presence matters.
                game.saw_content = true;
                in_headers = false;
            }
        }
    }

    fn validate(&mut self, raw: RawGame) -> Option<GameRecord> {
        self.stats.games_seen += 1;
        if raw.malformed {
            self.stats.skipped_malformed_header += 1;
            return None;
        }
        let (Some(we), Some(be), Some(result)) = (raw.white_elo, raw.black_elo, raw.result)
        else {
            self.stats.skipped_missing_tags += 1;
            return None;
        };
        let (Some(white_rating), Some(black_rating)) = (parse_rating(&we), parse_rating(&be))
        else {
            self.stats.skipped_invalid_rating += 1;
            return None;
        };
        let outcome = match result.trim() {
            "1-0" => Outcome::WhiteWin,
            "0-1" => Outcome::BlackWin,
            "1/2-1/2" => Outcome::Draw,
            _ => {
                self.stats.skipped_invalid_result += 1;
                return None;
            }
        };
        self.stats.yielded += 1;
        Some(GameRecord {
            white_rating,
            black_rating,
            outcome,
            source_tag: self.source_tag.clone(),
        })
    }
}

impl<R: BufRead> Iterator for PgnParser<R> {
    type Item = io::Result<GameRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            match self.next_raw() {
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
                Ok(None) => {
                    self.done = true;
                    return None;
                }
                Ok(Some(raw)) => {
                    if let Some(rec) = self.validate(raw) {
                        return Some(Ok(rec));
                    }
                }
            }
        }
    }
}

/// Parses one `[Key "Value"]` tag pair; `None` when the line is not a
/// well-formed, terminated tag.
fn parse_tag(line: &str) -> Option<(String, String)> {
    let inner = line.strip_prefix('[')?;
    let quote = inner.find('"')?;
    let key = inner[..quote].trim();
    if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return None;
    }
    let mut value = String::new();
    let mut rest = inner[quote + 1..].chars();
    let mut closed = false;
    while let Some(c) = rest.next() {
        match c {
            '\\' => match rest.next() {
                Some(e) => value.push(e),
                None => return None,
            },
            '"' => {
                closed = true;
                break;
            }
            _ => value.push(c),
        }
    }
    if !closed || rest.as_str().trim_end() != "]" {
        return None;
    }
    Some((key.to_string(), value))
}

/// Accepts plain positive integers; provisional markers ("?", "1500?") and
/// anything non-numeric are rejected.
fn parse_rating(s: &str) -> Option<i32> {
    let s = s.trim();
    if s.is_empty() || s.contains('?') {
        return None;
    }
    match s.parse::<i32>() {
        Ok(r) if r > 0 => Some(r),
        _ => None,
    }
}
