//! Newline-delimited post ingestion.
//!
//! One JSON object per line. Required fields are `id`, `user_id` and
//! `created_at` (integer or fractional epoch seconds, or an RFC 3339 string);
//! `parent_id`, `kind`, `body` and `hashtags` are optional. Lines that fail to
//! parse are counted by reason in [`CorpusStats`] and skipped.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PostKind {
    Post,
    Reply,
    Quote,
}

impl PostKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PostKind::Post => "post",
            PostKind::Reply => "reply",
            PostKind::Quote => "quote",
        }
    }
}

impl FromStr for PostKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "post" => Ok(PostKind::Post),
            "reply" => Ok(PostKind::Reply),
            "quote" | "reshare" | "repost" => Ok(PostKind::Quote),
            other => Err(format!("unknown post kind {other:?}")),
        }
    }
}

impl fmt::Display for PostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One validated post, reply or quote.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Post {
    pub id: String,
    pub parent_id: Option<String>,
    pub user_id: String,
    /// Epoch seconds, UTC.
    pub timestamp: i64,
    pub kind: PostKind,
    pub body: String,
    pub hashtags: Vec<String>,
}

/// Why a line was rejected. The string codes are stable and appear in
/// [`CorpusStats::rejection_reasons`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RejectReason {
    EmptyLine,
    NonUtf8,
    MalformedJson,
    MissingField,
    EmptyField,
    MalformedTimestamp,
    SelfParent,
    InvalidKind,
    InvalidHashtag,
}

impl RejectReason {
    pub fn code(self) -> &'static str {
        match self {
            RejectReason::EmptyLine => "empty_line",
            RejectReason::NonUtf8 => "non_utf8",
            RejectReason::MalformedJson => "malformed_json",
            RejectReason::MissingField => "missing_field",
            RejectReason::EmptyField => "empty_field",
            RejectReason::MalformedTimestamp => "malformed_timestamp",
            RejectReason::SelfParent => "self_parent",
            RejectReason::InvalidKind => "invalid_kind",
            RejectReason::InvalidHashtag => "invalid_hashtag",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub reason: RejectReason,
    pub detail: String,
}

impl ParseError {
    fn new(reason: RejectReason, detail: impl Into<String>) -> Self {
        ParseError {
            reason,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.reason.code(), self.detail)
    }
}

impl std::error::Error for ParseError {}

/// Counters for one ingestion pass. Merging is associative and commutative,
/// so per-chunk stats can be reduced in any order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_records: u64,
    pub parsed: u64,
    pub rejected: u64,
    /// Parsed records dropped by the time/kind filter.
    pub filtered_out: u64,
    pub rejection_reasons: BTreeMap<String, u64>,
    /// (min, max) timestamp over parsed records.
    pub time_range: Option<(i64, i64)>,
}

impl CorpusStats {
    pub fn record_parsed(&mut self, ts: i64) {
        self.total_records += 1;
        self.parsed += 1;
        self.time_range = Some(match self.time_range {
            None => (ts, ts),
            Some((lo, hi)) => (lo.min(ts), hi.max(ts)),
        });
    }

    pub fn record_rejected(&mut self, reason: RejectReason) {
        self.total_records += 1;
        self.rejected += 1;
        *self
            .rejection_reasons
            .entry(reason.code().to_string())
            .or_insert(0) += 1;
    }

    pub fn merge(&mut self, other: &CorpusStats) {
        self.total_records += other.total_records;
        self.parsed += other.parsed;
        self.rejected += other.rejected;
        self.filtered_out += other.filtered_out;
        for (k, v) in &other.rejection_reasons {
            *self.rejection_reasons.entry(k.clone()).or_insert(0) += v;
        }
        self.time_range = match (self.time_range, other.time_range) {
            (None, x) | (x, None) => x,
            (Some((a, b)), Some((c, d))) => Some((a.min(c), b.max(d))),
        };
    }
}

/// Optional record filter applied after parsing. Both time bounds are inclusive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PostFilter {
    pub from: Option<i64>,
    pub to: Option<i64>,
    pub kinds: Option<BTreeSet<PostKind>>,
}

impl PostFilter {
    pub fn accepts(&self, post: &Post) -> bool {
        if self.from.is_some_and(|from| post.timestamp < from) {
            return false;
        }
        if self.to.is_some_and(|to| post.timestamp > to) {
            return false;
        }
        match &self.kinds {
            Some(kinds) => kinds.contains(&post.kind),
            None => true,
        }
    }

    fn is_noop(&self) -> bool {
        self.from.is_none() && self.to.is_none() && self.kinds.is_none()
    }
}

/// Every maximal `#[A-Za-z0-9_]+` run in `body`, without the `#`, lowercased,
/// in order of appearance. A `#` need not follow whitespace.
pub fn extract_hashtags(body: &str) -> Vec<String> {
    let bytes = body.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'#' {
            let start = i + 1;
            let mut end = start;
            while end < bytes.len() && is_tag_byte(bytes[end]) {
                end += 1;
            }
            if end > start {
                out.push(body[start..end].to_ascii_lowercase());
            }
            i = end.max(i + 1);
        } else {
            i += 1;
        }
    }
    out
}

#[inline]
fn is_tag_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Normalizes a supplied hashtag: strips one leading `#` and lowercases.
fn normalize_supplied_tag(tag: &str) -> Option<String> {
    let tag = tag.strip_prefix('#').unwrap_or(tag);
    if !tag.is_empty() && tag.bytes().all(is_tag_byte) {
        Some(tag.to_ascii_lowercase())
    } else {
        None
    }
}

enum RawTimestamp<'a> {
    Int(i64),
    Float(f64),
    Text(Cow<'a, str>),
}

impl<'de: 'a, 'a> Deserialize<'de> for RawTimestamp<'a> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct TsVisitor;
        impl<'de> Visitor<'de> for TsVisitor {
            type Value = RawTimestamp<'de>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("epoch seconds or an RFC 3339 string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                Ok(RawTimestamp::Int(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                i64::try_from(v)
                    .map(RawTimestamp::Int)
                    .map_err(|_| E::custom("timestamp overflows i64"))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                Ok(RawTimestamp::Float(v))
            }
            fn visit_borrowed_str<E: de::Error>(
                self,
                v: &'de str,
            ) -> std::result::Result<Self::Value, E> {
                Ok(RawTimestamp::Text(Cow::Borrowed(v)))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                Ok(RawTimestamp::Text(Cow::Owned(v.to_string())))
            }
            fn visit_string<E: de::Error>(self, v: String) -> std::result::Result<Self::Value, E> {
                Ok(RawTimestamp::Text(Cow::Owned(v)))
            }
        }
        d.deserialize_any(TsVisitor)
    }
}

#[derive(Deserialize)]
struct RawRecord<'a> {
    #[serde(borrow, default)]
    id: Option<Cow<'a, str>>,
    #[serde(borrow, default)]
    parent_id: Option<Cow<'a, str>>,
    #[serde(borrow, default)]
    user_id: Option<Cow<'a, str>>,
    #[serde(borrow, default)]
    created_at: Option<RawTimestamp<'a>>,
    #[serde(borrow, default)]
    kind: Option<Cow<'a, str>>,
    #[serde(borrow, default)]
    body: Option<Cow<'a, str>>,
    #[serde(borrow, default)]
    hashtags: Option<Vec<Cow<'a, str>>>,
}

fn normalize_timestamp(raw: RawTimestamp<'_>) -> std::result::Result<i64, ParseError> {
    let bad = |detail: String| ParseError::new(RejectReason::MalformedTimestamp, detail);
    let ts = match raw {
        RawTimestamp::Int(v) => v,
        RawTimestamp::Float(v) => {
            if !v.is_finite() || v >= i64::MAX as f64 {
                return Err(bad(format!("{v}")));
            }
            v.trunc() as i64
        }
        RawTimestamp::Text(s) => {
            let s = s.trim();
            if let Ok(v) = s.parse::<i64>() {
                v
            } else {
                chrono::DateTime::parse_from_rfc3339(s)
                    .map_err(|e| bad(format!("{s:?}: {e}")))?
                    .timestamp()
            }
        }
    };
    if ts < 0 {
        return Err(bad(format!("negative timestamp {ts}")));
    }
    Ok(ts)
}

/// Parses one JSON record into a [`Post`].
pub fn parse_post_record(line: &str) -> std::result::Result<Post, ParseError> {
    let line = line.trim_end_matches(['\n', '\r']);
    if line.trim().is_empty() {
        return Err(ParseError::new(RejectReason::EmptyLine, "blank line"));
    }
    let raw: RawRecord<'_> = serde_json::from_str(line)
        .map_err(|e| ParseError::new(RejectReason::MalformedJson, e.to_string()))?;

    let required = |field: Option<Cow<'_, str>>, name: &str| match field {
        None => Err(ParseError::new(RejectReason::MissingField, name)),
        Some(v) if v.trim().is_empty() => Err(ParseError::new(RejectReason::EmptyField, name)),
        Some(v) => Ok(v.into_owned()),
    };
    let id = required(raw.id, "id")?;
    let user_id = required(raw.user_id, "user_id")?;
    let timestamp = match raw.created_at {
        None => return Err(ParseError::new(RejectReason::MissingField, "created_at")),
        Some(ts) => normalize_timestamp(ts)?,
    };
    let parent_id = match raw.parent_id {
        Some(p) if p.trim().is_empty() => None,
        Some(p) => Some(p.into_owned()),
        None => None,
    };
    if parent_id.as_deref() == Some(id.as_str()) {
        return Err(ParseError::new(RejectReason::SelfParent, id));
    }
    let kind = match raw.kind {
        Some(k) => k
            .parse::<PostKind>()
            .map_err(|e| ParseError::new(RejectReason::InvalidKind, e))?,
        None if parent_id.is_some() => PostKind::Reply,
        None => PostKind::Post,
    };
    let body = raw.body.map(Cow::into_owned).unwrap_or_default();
    let hashtags = match raw.hashtags {
        Some(tags) => tags
            .iter()
            .map(|t| {
                normalize_supplied_tag(t)
                    .ok_or_else(|| ParseError::new(RejectReason::InvalidHashtag, t.as_ref()))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?,
        None => extract_hashtags(&body),
    };
    Ok(Post {
        id,
        parent_id,
        user_id,
        timestamp,
        kind,
        body,
        hashtags,
    })
}

/// Like [`parse_post_record`] but starts from raw bytes, so invalid UTF-8 is
/// reported as its own reason.
pub fn parse_post_bytes(line: &[u8]) -> std::result::Result<Post, ParseError> {
    match std::str::from_utf8(line) {
        Ok(s) => parse_post_record(s),
        Err(e) => Err(ParseError::new(RejectReason::NonUtf8, e.to_string())),
    }
}

#[derive(Serialize)]
struct CanonicalRecord<'a> {
    id: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    parent_id: Option<&'a str>,
    user_id: &'a str,
    created_at: i64,
    kind: PostKind,
    body: &'a str,
    hashtags: &'a [String],
}

/// Serializes a post in the canonical input schema (hashtags always explicit).
pub fn to_canonical_json(post: &Post) -> String {
    serde_json::to_string(&CanonicalRecord {
        id: &post.id,
        parent_id: post.parent_id.as_deref(),
        user_id: &post.user_id,
        created_at: post.timestamp,
        kind: post.kind,
        body: &post.body,
        hashtags: &post.hashtags,
    })
    .expect("post serialization cannot fail")
}

const CHUNK_LINES: usize = 16 * 1024;

/// Streaming reader over a newline-delimited corpus.
///
/// Lines are parsed in parallel chunks; posts come out in file order.
/// [`CorpusReader::stats`] is complete once the iterator is exhausted.
pub struct CorpusReader<R> {
    reader: R,
    filter: PostFilter,
    stats: CorpusStats,
    buf: Vec<u8>,
    spans: Vec<Range<usize>>,
    pending: std::vec::IntoIter<Post>,
    eof: bool,
    error: Option<std::io::Error>,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, filter: PostFilter) -> Self {
        CorpusReader {
            reader,
            filter,
            stats: CorpusStats::default(),
            buf: Vec::new(),
            spans: Vec::with_capacity(CHUNK_LINES),
            pending: Vec::new().into_iter(),
            eof: false,
            error: None,
        }
    }

    pub fn stats(&self) -> &CorpusStats {
        &self.stats
    }

    /// The I/O error that ended the stream early, if any.
    pub fn take_error(&mut self) -> Option<std::io::Error> {
        self.error.take()
    }

    fn fill_chunk(&mut self) -> std::io::Result<()> {
        self.buf.clear();
        self.spans.clear();
        while self.spans.len() < CHUNK_LINES {
            let start = self.buf.len();
            let n = self.reader.read_until(b'\n', &mut self.buf)?;
            if n == 0 {
                self.eof = true;
                break;
            }
            let mut end = self.buf.len();
            if self.buf[end - 1] == b'\n' {
                end -= 1;
            }
            if end > start && self.buf[end - 1] == b'\r' {
                end -= 1;
            }
            self.spans.push(start..end);
        }
        Ok(())
    }

    fn next_chunk(&mut self) -> bool {
        if self.eof {
            return false;
        }
        if let Err(e) = self.fill_chunk() {
            self.error = Some(e);
            self.eof = true;
            return false;
        }
        let buf = &self.buf;
        let results: Vec<std::result::Result<Post, RejectReason>> = self
            .spans
            .par_iter()
            .map(|span| parse_post_bytes(&buf[span.clone()]).map_err(|e| e.reason))
            .collect();
        let mut posts = Vec::with_capacity(results.len());
        for result in results {
            match result {
                Ok(post) => {
                    self.stats.record_parsed(post.timestamp);
                    if self.filter.is_noop() || self.filter.accepts(&post) {
                        posts.push(post);
                    } else {
                        self.stats.filtered_out += 1;
                    }
                }
                Err(reason) => self.stats.record_rejected(reason),
            }
        }
        self.pending = posts.into_iter();
        true
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Post;

    fn next(&mut self) -> Option<Post> {
        loop {
            if let Some(post) = self.pending.next() {
                return Some(post);
            }
            if !self.next_chunk() {
                return None;
            }
        }
    }
}

/// Opens `path` for streaming ingestion.
pub fn open_corpus(
    path: impl AsRef<Path>,
    filter: PostFilter,
) -> Result<CorpusReader<BufReader<File>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(CorpusReader::new(
        BufReader::with_capacity(1 << 20, file),
        filter,
    ))
}

/// Reads a whole corpus into memory.
pub fn load_corpus(path: impl AsRef<Path>, filter: PostFilter) -> Result<(Vec<Post>, CorpusStats)> {
    let mut reader = open_corpus(path, filter)?;
    let posts: Vec<Post> = reader.by_ref().collect();
    if let Some(e) = reader.take_error() {
        return Err(Error::Stream(e));
    }
    Ok((posts, reader.stats().clone()))
}

/// Parses an in-memory byte stream; mainly for tests and small inputs.
pub fn parse_corpus_bytes<T: Read>(input: T, filter: PostFilter) -> (Vec<Post>, CorpusStats) {
    let mut reader = CorpusReader::new(BufReader::new(input), filter);
    let posts: Vec<Post> = reader.by_ref().collect();
    (posts, reader.stats().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn root_post_with_extracted_tag() {
        let p = parse_post_record(r#"{"id":"p1","user_id":"u1","created_at":100,"body":"hello #Gab"}"#)
            .unwrap();
        assert_eq!(p.id, "p1");
        assert_eq!(p.parent_id, None);
        assert_eq!(p.kind, PostKind::Post);
        assert_eq!(p.hashtags, vec!["gab"]);
    }

    #[test]
    fn self_parent_rejected() {
        let e = parse_post_record(r#"{"id":"p2","parent_id":"p2","user_id":"u","created_at":1}"#)
            .unwrap_err();
        assert_eq!(e.reason, RejectReason::SelfParent);
    }

    #[test]
    fn mid_word_hash_is_extracted() {
        let p = parse_post_record(
            r##"{"id":"p3","user_id":"u","created_at":1,"body":"#MAGA #maga x#y"}"##,
        )
        .unwrap();
        assert_eq!(p.hashtags, vec!["maga", "maga", "y"]);
    }

    #[test]
    fn extraction_edge_cases() {
        assert!(extract_hashtags("").is_empty());
        assert_eq!(extract_hashtags("#QAnon and #qanon"), vec!["qanon", "qanon"]);
        assert_eq!(extract_hashtags("end#tag. #a_b-c"), vec!["tag", "a_b"]);
        assert_eq!(extract_hashtags("## #"), Vec::<String>::new());
        assert_eq!(extract_hashtags("##x"), vec!["x"]);
        assert_eq!(extract_hashtags("#110neveragain"), vec!["110neveragain"]);
        assert_eq!(extract_hashtags("über#Straße"), vec!["stra"]);
    }

    #[test]
    fn reply_kind_defaults_from_parent() {
        let p = parse_post_record(r#"{"id":"c","parent_id":"p","user_id":"u","created_at":5}"#)
            .unwrap();
        assert_eq!(p.kind, PostKind::Reply);
        let q = parse_post_record(
            r#"{"id":"c","parent_id":"p","user_id":"u","created_at":5,"kind":"quote"}"#,
        )
        .unwrap();
        assert_eq!(q.kind, PostKind::Quote);
    }

    #[test]
    fn timestamp_forms() {
        let parse = |ts: &str| {
            parse_post_record(&format!(r#"{{"id":"a","user_id":"u","created_at":{ts}}}"#))
                .map(|p| p.timestamp)
        };
        assert_eq!(parse("1500000000").unwrap(), 1_500_000_000);
        assert_eq!(parse("1500000000.987").unwrap(), 1_500_000_000);
        assert_eq!(parse(r#""2018-10-27T12:00:00Z""#).unwrap(), 1_540_641_600);
        assert_eq!(parse(r#""2018-10-27T14:00:00.75+02:00""#).unwrap(), 1_540_641_600);
        assert_eq!(parse(r#""42""#).unwrap(), 42);
        assert_eq!(
            parse(r#""yesterday""#).unwrap_err().reason,
            RejectReason::MalformedTimestamp
        );
        assert_eq!(parse("-5").unwrap_err().reason, RejectReason::MalformedTimestamp);
        assert_eq!(parse("true").unwrap_err().reason, RejectReason::MalformedJson);
    }

    #[test]
    fn missing_and_empty_fields() {
        let e = parse_post_record(r#"{"user_id":"u","created_at":1}"#).unwrap_err();
        assert_eq!(e.reason, RejectReason::MissingField);
        let e = parse_post_record(r#"{"id":"a","created_at":1}"#).unwrap_err();
        assert_eq!(e.reason, RejectReason::MissingField);
        let e = parse_post_record(r#"{"id":"a","user_id":"u"}"#).unwrap_err();
        assert_eq!(e.reason, RejectReason::MissingField);
        let e = parse_post_record(r#"{"id":" ","user_id":"u","created_at":1}"#).unwrap_err();
        assert_eq!(e.reason, RejectReason::EmptyField);
        let e = parse_post_record("{not json").unwrap_err();
        assert_eq!(e.reason, RejectReason::MalformedJson);
        let e = parse_post_record("   ").unwrap_err();
        assert_eq!(e.reason, RejectReason::EmptyLine);
    }

    #[test]
    fn supplied_hashtags_are_normalized() {
        let p = parse_post_record(
            r##"{"id":"a","user_id":"u","created_at":1,"body":"#ignored","hashtags":["#MAGA","qanon"]}"##,
        )
        .unwrap();
        assert_eq!(p.hashtags, vec!["maga", "qanon"]);
        let e = parse_post_record(
            r#"{"id":"a","user_id":"u","created_at":1,"hashtags":["two words"]}"#,
        )
        .unwrap_err();
        assert_eq!(e.reason, RejectReason::InvalidHashtag);
    }

    #[test]
    fn invalid_utf8_has_its_own_reason() {
        let mut line = br#"{"id":"a","user_id":"u","created_at":1,"body":""#.to_vec();
        line.extend_from_slice(&[0xff, 0xfe]);
        line.extend_from_slice(br#""}"#);
        assert_eq!(parse_post_bytes(&line).unwrap_err().reason, RejectReason::NonUtf8);
    }

    #[test]
    fn corpus_counts_and_filters() {
        let input = concat!(
            r#"{"id":"p1","user_id":"u1","created_at":10}"#,
            "\n",
            "garbage\n",
            r#"{"id":"p2","parent_id":"p1","user_id":"u2","created_at":20}"#,
            "\n",
        );
        let (posts, stats) = parse_corpus_bytes(input.as_bytes(), PostFilter::default());
        assert_eq!(posts.len(), 2);
        assert_eq!(stats.parsed, 2);
        assert_eq!(stats.rejected, 1);
        assert_eq!(stats.rejection_reasons["malformed_json"], 1);
        assert_eq!(stats.time_range, Some((10, 20)));

        let filter = PostFilter {
            kinds: Some([PostKind::Reply].into_iter().collect()),
            ..Default::default()
        };
        let (posts, stats) = parse_corpus_bytes(input.as_bytes(), filter);
        assert_eq!(posts.iter().map(|p| p.id.as_str()).collect::<Vec<_>>(), vec!["p2"]);
        assert_eq!(stats.filtered_out, 1);
        assert_eq!(stats.parsed + stats.rejected, stats.total_records);

        let filter = PostFilter {
            from: Some(15),
            to: Some(20),
            ..Default::default()
        };
        let (posts, _) = parse_corpus_bytes(input.as_bytes(), filter);
        assert_eq!(posts.len(), 1);
    }

    #[test]
    fn empty_input_gives_zeroed_stats() {
        let (posts, stats) = parse_corpus_bytes(&b""[..], PostFilter::default());
        assert!(posts.is_empty());
        assert_eq!(stats, CorpusStats::default());
    }

    #[test]
    fn stats_merge_is_order_insensitive() {
        let mut a = CorpusStats::default();
        a.record_parsed(5);
        a.record_rejected(RejectReason::MissingField);
        let mut b = CorpusStats::default();
        b.record_parsed(1);
        b.record_rejected(RejectReason::NonUtf8);
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        assert_eq!(ab, ba);
        assert_eq!(ab.time_range, Some((1, 5)));
    }

    fn arb_post() -> impl Strategy<Value = Post> {
        (
            "[a-z0-9]{1,8}",
            proptest::option::of("[A-Z0-9]{1,8}"),
            "[a-z]{1,6}",
            0i64..4_000_000_000,
            prop_oneof![Just(PostKind::Post), Just(PostKind::Reply), Just(PostKind::Quote)],
            "\\PC{0,40}",
            proptest::collection::vec("[a-z0-9_]{1,10}", 0..4),
        )
            .prop_map(|(id, parent_id, user_id, timestamp, kind, body, hashtags)| Post {
                id,
                parent_id,
                user_id,
                timestamp,
                kind,
                body,
                hashtags,
            })
            .prop_filter("self parent", |p| p.parent_id.as_deref() != Some(p.id.as_str()))
    }

    proptest! {
        #[test]
        fn canonical_round_trip(post in arb_post()) {
            let line = to_canonical_json(&post);
            prop_assert_eq!(parse_post_record(&line).unwrap(), post);
        }

        #[test]
        fn parsing_is_total(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
            let lines = bytes.split(|b| *b == b'\n').count()
                - usize::from(bytes.last() == Some(&b'\n') || bytes.is_empty());
            let (_, stats) = parse_corpus_bytes(&bytes[..], PostFilter::default());
            prop_assert_eq!(stats.parsed + stats.rejected, stats.total_records);
            prop_assert_eq!(stats.total_records as usize, lines);
        }

        #[test]
        fn extraction_ignores_case_and_surroundings(body in "[ -~]{0,60}") {
            let tags = extract_hashtags(&body);
            prop_assert_eq!(&extract_hashtags(&body.to_lowercase()), &tags);
            prop_assert_eq!(&extract_hashtags(&body.to_uppercase()), &tags);
            for t in &tags {
                prop_assert!(t.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_'));
                prop_assert!(body.to_lowercase().contains(&(String::from("#") + t)));
            }
            // padding with non-tag characters outside matches changes nothing
            let padded = format!("  {} ... ", body);
            prop_assert_eq!(extract_hashtags(&padded), tags);
        }
    }
}
