//! Escaped text form of symbols and the two alphabet profiles.
//!
//! Tokens are written on one line with no spaces, so space, newline,
//! backslash and `#` are escaped: `\s`, `\n`, `\\`, `\#`. In the bytes
//! profile every byte outside printable ASCII is written `\xHH`; in the chars
//! profile control and whitespace characters are written `\u{H…}`. The
//! parser also accepts `\t`, `\r`, and `\u{…}` in the bytes profile (as the
//! UTF-8 encoding of the character).

use std::fmt;
use std::str::FromStr;

use bpetk::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Alphabet {
    #[default]
    Bytes,
    Chars,
}

impl Alphabet {
    pub fn name(self) -> &'static str {
        match self {
            Alphabet::Bytes => "bytes",
            Alphabet::Chars => "chars",
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Alphabet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bytes" => Ok(Alphabet::Bytes),
            "chars" => Ok(Alphabet::Chars),
            _ => Err(format!("unknown alphabet `{s}` (expected bytes or chars)")),
        }
    }
}

/// A symbol profile with a text encoding and a raw byte encoding.
pub trait TextSymbol: Symbol {
    const ALPHABET: Alphabet;

    fn escape_into(&self, out: &mut String);

    /// Symbols spelled by an unescaped character of the text form.
    fn push_char(c: char, out: &mut Vec<Self>);

    /// Symbols spelled by `\xHH`.
    fn from_byte_escape(b: u8) -> Option<Self>;

    fn write_raw(symbols: &[Self], out: &mut Vec<u8>);

    /// Decodes the next chunk of raw input.
    fn decode_chunk(
        decoder: &mut Utf8Decoder,
        chunk: &[u8],
        out: &mut Vec<Self>,
    ) -> Result<(), String>;
}

impl TextSymbol for u8 {
    const ALPHABET: Alphabet = Alphabet::Bytes;

    fn escape_into(&self, out: &mut String) {
        match self {
            b' ' => out.push_str("\\s"),
            b'\n' => out.push_str("\\n"),
            b'\\' => out.push_str("\\\\"),
            b'#' => out.push_str("\\#"),
            0x21..=0x7e => out.push(char::from(*self)),
            _ => out.push_str(&format!("\\x{self:02x}")),
        }
    }

    fn push_char(c: char, out: &mut Vec<Self>) {
        let mut buf = [0u8; 4];
        out.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
    }

    fn from_byte_escape(b: u8) -> Option<Self> {
        Some(b)
    }

    fn write_raw(symbols: &[Self], out: &mut Vec<u8>) {
        out.extend_from_slice(symbols);
    }

    fn decode_chunk(_: &mut Utf8Decoder, chunk: &[u8], out: &mut Vec<Self>) -> Result<(), String> {
        out.extend_from_slice(chunk);
        Ok(())
    }
}

impl TextSymbol for char {
    const ALPHABET: Alphabet = Alphabet::Chars;

    fn escape_into(&self, out: &mut String) {
        match self {
            ' ' => out.push_str("\\s"),
            '\n' => out.push_str("\\n"),
            '\\' => out.push_str("\\\\"),
            '#' => out.push_str("\\#"),
            c if c.is_control() || c.is_whitespace() => {
                out.push_str(&format!("\\u{{{:x}}}", *c as u32))
            }
            c => out.push(*c),
        }
    }

    fn push_char(c: char, out: &mut Vec<Self>) {
        out.push(c);
    }

    fn from_byte_escape(b: u8) -> Option<Self> {
        b.is_ascii().then(|| char::from(b))
    }

    fn write_raw(symbols: &[Self], out: &mut Vec<u8>) {
        let mut buf = [0u8; 4];
        for c in symbols {
            out.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
        }
    }

    fn decode_chunk(
        decoder: &mut Utf8Decoder,
        chunk: &[u8],
        out: &mut Vec<Self>,
    ) -> Result<(), String> {
        decoder.push(chunk, out)
    }
}

pub fn escape<S: TextSymbol>(symbols: &[S]) -> String {
    let mut out = String::with_capacity(symbols.len());
    for s in symbols {
        s.escape_into(&mut out);
    }
    out
}

/// Inverse of [`escape`]. Errors name the offending escape.
pub fn unescape<S: TextSymbol>(text: &str) -> Result<Vec<S>, String> {
    let mut out = Vec::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            S::push_char(c, &mut out);
            continue;
        }
        match chars.next() {
            Some('s') => S::push_char(' ', &mut out),
            Some('n') => S::push_char('\n', &mut out),
            Some('t') => S::push_char('\t', &mut out),
            Some('r') => S::push_char('\r', &mut out),
            Some('\\') => S::push_char('\\', &mut out),
            Some('#') => S::push_char('#', &mut out),
            Some('x') => {
                let hex: String = chars.by_ref().take(2).collect();
                let byte = (hex.len() == 2)
                    .then(|| u8::from_str_radix(&hex, 16).ok())
                    .flatten()
                    .ok_or_else(|| format!("bad escape `\\x{hex}`"))?;
                let symbol = S::from_byte_escape(byte)
                    .ok_or_else(|| format!("`\\x{hex}` is not a {} symbol", S::ALPHABET))?;
                out.push(symbol);
            }
            Some('u') => {
                let rest = chars.as_str();
                let body = rest
                    .strip_prefix('{')
                    .and_then(|r| r.split_once('}'))
                    .map(|(hex, _)| hex)
                    .ok_or("bad escape `\\u`: expected `\\u{HEX}`")?;
                let c = u32::from_str_radix(body, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| format!("bad escape `\\u{{{body}}}`"))?;
                S::push_char(c, &mut out);
                chars = rest[body.len() + 2..].chars();
            }
            Some(other) => return Err(format!("unknown escape `\\{other}`")),
            None => return Err("trailing backslash".into()),
        }
    }
    Ok(out)
}

/// Streaming UTF-8 decoder that carries incomplete sequences across chunks.
#[derive(Debug, Default)]
pub struct Utf8Decoder {
    pending: Vec<u8>,
    offset: u64,
}

impl Utf8Decoder {
    /// Appends the characters completed by `chunk` to `out`.
    pub fn push(&mut self, chunk: &[u8], out: &mut Vec<char>) -> Result<(), String> {
        self.pending.extend_from_slice(chunk);
        let (valid, rest) = match std::str::from_utf8(&self.pending) {
            Ok(s) => (s, self.pending.len()),
            Err(e) if e.error_len().is_none() => {
                let valid =
                    std::str::from_utf8(&self.pending[..e.valid_up_to()]).expect("valid prefix");
                (valid, e.valid_up_to())
            }
            Err(e) => {
                return Err(format!(
                    "input is not valid UTF-8 at byte {}",
                    self.offset + e.valid_up_to() as u64
                ))
            }
        };
        out.extend(valid.chars());
        self.offset += rest as u64;
        self.pending.drain(..rest);
        Ok(())
    }

    pub fn finish(&self) -> Result<(), String> {
        if self.pending.is_empty() {
            Ok(())
        } else {
            Err(format!(
                "input ends inside a UTF-8 sequence at byte {}",
                self.offset
            ))
        }
    }
}

/// Decodes a complete input.
pub fn decode<S: TextSymbol>(bytes: &[u8]) -> Result<Vec<S>, String> {
    let mut decoder = Utf8Decoder::default();
    let mut out = Vec::with_capacity(bytes.len());
    S::decode_chunk(&mut decoder, bytes, &mut out)?;
    decoder.finish()?;
    Ok(out)
}
