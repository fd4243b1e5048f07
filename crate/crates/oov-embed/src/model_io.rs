//! Model files.
//!
//! Point models use the common word2vec text layout: a `V D` header line,
//! then `token v1 ... vD` per line in id order, values printed with six
//! significant digits. Only word vectors are stored.
//!
//! Gaussian-mixture models use the `W2GM` binary layout, all integers and
//! floats little-endian:
//!
//! ```text
//! b"W2GM" | version: u8 = 1 | V: u32 | D: u32 | K: u32
//! weight logits  V×K   f32
//! means          V×K×D f32
//! log variances  V×K×D f32
//! V × (len: u32, UTF-8 bytes)
//! ```
//!
//! Blocks are id-major, component-minor. Mixture weights are stored as their
//! logits so that loading reproduces the model bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use oov_embed_core::similarity::ModelRef;
use oov_embed_core::{GmEmbedding, PointEmbedding, Vocabulary};

use crate::error::{Error, Result};

pub const GM_MAGIC: &[u8; 4] = b"W2GM";
pub const GM_VERSION: u8 = 1;

/// `x` with six significant digits, in the shortest of fixed or
/// exponent notation (like C's `%g`).
pub fn format_sig6(x: f32) -> String {
    const SIG: i32 = 6;
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIG).contains(&exp) {
        format!("{}e{exp}", trim_fraction(mantissa))
    } else {
        let decimals = (SIG - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn check_token(token: &str) -> Result<()> {
    if token.is_empty() || token.chars().any(char::is_whitespace) {
        return Err(Error::Encoding(token.to_string()));
    }
    Ok(())
}

pub fn export_text_to<W: Write>(model: &PointEmbedding, vocab: &Vocabulary, w: &mut W) -> Result<()> {
    if model.len() != vocab.len() {
        return Err(Error::Core(oov_embed_core::Error::DimensionMismatch {
            expected: vocab.len(),
            actual: model.len(),
        }));
    }
    for token in vocab.tokens() {
        check_token(token)?;
    }
    writeln!(w, "{} {}", model.len(), model.dims())?;
    let mut line = String::new();
    for (id, token) in vocab.tokens().iter().enumerate() {
        line.clear();
        line.push_str(token);
        for &x in model.word(id as u32) {
            line.push(' ');
            line.push_str(&format_sig6(x));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn export_text(model: &PointEmbedding, vocab: &Vocabulary, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    export_text_to(model, vocab, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn import_text_from<R: BufRead>(reader: R) -> Result<(Vocabulary, PointEmbedding)> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or(Error::Parse { line: 1, reason: "missing header".into() })??;
    let mut parts = header.split_whitespace();
    let mut header_field = |name: &str| -> Result<usize> {
        parts
            .next()
            .ok_or_else(|| Error::Parse { line: 1, reason: format!("header lacks {name}") })?
            .parse()
            .map_err(|e| Error::Parse { line: 1, reason: format!("bad {name}: {e}") })
    };
    let rows = header_field("vocabulary size")?;
    let dims = header_field("dimension")?;
    if dims == 0 {
        return Err(Error::Parse { line: 1, reason: "dimension must be positive".into() });
    }

    let mut tokens = Vec::with_capacity(rows);
    let mut seen = std::collections::HashSet::with_capacity(rows);
    let mut data = Vec::with_capacity(rows * dims);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().expect("non-empty line").to_string();
        let before = data.len();
        for f in fields {
            let x: f32 = f
                .parse()
                .map_err(|e| Error::Parse { line: line_no, reason: format!("bad value {f:?}: {e}") })?;
            data.push(x);
        }
        let found = data.len() - before;
        if found != dims {
            return Err(Error::HeaderMismatch {
                line: line_no,
                reason: format!("header declares {dims} dimensions, row has {found}"),
            });
        }
        if !seen.insert(token.clone()) {
            return Err(Error::Parse { line: line_no, reason: format!("duplicate token {token:?}") });
        }
        tokens.push(token);
    }
    if tokens.len() != rows {
        return Err(Error::HeaderMismatch {
            line: 1,
            reason: format!("header declares {rows} rows, file has {}", tokens.len()),
        });
    }
    let vocab = Vocabulary::from_ordered_tokens(tokens)?;
    let ctx = vec![0.0; data.len()];
    let model = PointEmbedding::from_parts(dims, data, ctx)?;
    Ok((vocab, model))
}

pub fn import_text(path: &Path) -> Result<(Vocabulary, PointEmbedding)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    import_text_from(BufReader::new(file))
}

pub fn save_gm_to<W: Write>(model: &GmEmbedding, vocab: &Vocabulary, w: &mut W) -> Result<()> {
    if model.len() != vocab.len() {
        return Err(Error::Core(oov_embed_core::Error::DimensionMismatch {
            expected: vocab.len(),
            actual: model.len(),
        }));
    }
    let to_u32 = |x: usize| -> Result<u32> {
        u32::try_from(x).map_err(|_| Error::Config(format!("{x} does not fit in u32")))
    };
    w.write_all(GM_MAGIC)?;
    w.write_all(&[GM_VERSION])?;
    for x in [model.len(), model.dims(), model.components()] {
        w.write_all(&to_u32(x)?.to_le_bytes())?;
    }
    for block in [model.logits_block(), model.means_block(), model.log_vars_block()] {
        for x in block {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    for token in vocab.tokens() {
        w.write_all(&to_u32(token.len())?.to_le_bytes())?;
        w.write_all(token.as_bytes())?;
    }
    Ok(())
}

pub fn save_gm(model: &GmEmbedding, vocab: &Vocabulary, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    save_gm_to(model, vocab, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::TruncatedFile)?;
        let s = self.bytes.get(self.pos..end).ok_or(Error::TruncatedFile)?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let bytes = self.take(n.checked_mul(4).ok_or(Error::TruncatedFile)?)?;
        Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub fn load_gm_from_bytes(bytes: &[u8]) -> Result<(Vocabulary, GmEmbedding)> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4).map_err(|_| Error::MagicMismatch)? != GM_MAGIC {
        return Err(Error::MagicMismatch);
    }
    let version = cur.take(1)?[0];
    if version != GM_VERSION {
        return Err(Error::VersionUnsupported(version));
    }
    let v = cur.u32()? as usize;
    let d = cur.u32()? as usize;
    let k = cur.u32()? as usize;
    let vk = v.checked_mul(k).ok_or(Error::TruncatedFile)?;
    let vkd = vk.checked_mul(d).ok_or(Error::TruncatedFile)?;
    let logits = cur.f32s(vk)?;
    let means = cur.f32s(vkd)?;
    let log_vars = cur.f32s(vkd)?;
    let mut tokens = Vec::with_capacity(v);
    for _ in 0..v {
        let len = cur.u32()? as usize;
        let raw = cur.take(len)?;
        let token = std::str::from_utf8(raw)
            .map_err(|e| Error::Parse { line: tokens.len() + 1, reason: format!("token is not UTF-8: {e}") })?;
        tokens.push(token.to_string());
    }
    if cur.pos != bytes.len() {
        return Err(Error::TrailingBytes(bytes.len() - cur.pos));
    }
    let vocab = Vocabulary::from_ordered_tokens(tokens)?;
    let model = GmEmbedding::from_parts(d, k, logits, means, log_vars)?;
    Ok((vocab, model))
}

pub fn load_gm(path: &Path) -> Result<(Vocabulary, GmEmbedding)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    load_gm_from_bytes(&bytes)
}

/// A model of either kind together with its vocabulary.
pub enum AnyModel {
    Point(PointEmbedding),
    Gm(GmEmbedding),
}

pub struct LoadedModel {
    pub vocab: Vocabulary,
    pub model: AnyModel,
}

impl LoadedModel {
    pub fn as_ref(&self) -> ModelRef<'_, f32> {
        match &self.model {
            AnyModel::Point(m) => ModelRef::Point(m),
            AnyModel::Gm(m) => ModelRef::Gm(m),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.model {
            AnyModel::Point(_) => "point",
            AnyModel::Gm(_) => "gaussian_mixture",
        }
    }
}

/// Loads a model file, choosing the format from its first bytes.
pub fn load_model(path: &Path) -> Result<LoadedModel> {
    let mut head = [0u8; 4];
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let n = file.read(&mut head).map_err(|e| Error::io(path, e))?;
    if n == 4 && &head == GM_MAGIC {
        let (vocab, model) = load_gm(path)?;
        Ok(LoadedModel { vocab, model: AnyModel::Gm(model) })
    } else {
        let (vocab, model) = import_text(path)?;
        Ok(LoadedModel { vocab, model: AnyModel::Point(model) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use oov_embed_core::GmTrainConfig;

    fn vocab(tokens: &[&str]) -> Vocabulary {
        Vocabulary::from_ordered_tokens(tokens.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(1.0), "1");
        assert_eq!(format_sig6(-0.5), "-0.5");
        assert_eq!(format_sig6(0.123_456_79), "0.123457");
        assert_eq!(format_sig6(123456.7), "123457");
        assert_eq!(format_sig6(1234567.0), "1.23457e6");
        assert_eq!(format_sig6(0.0000123456), "1.23456e-5");
        assert_eq!(format_sig6(0.000123456), "0.000123456");
        assert_eq!(format_sig6(9.9999996), "10");
    }

    #[test]
    fn text_layout() {
        let v = vocab(&["pea", "flower"]);
        let m = PointEmbedding::from_parts(2, vec![0.5, -1.0, 0.25, 3.0], vec![0.0; 4]).unwrap();
        let mut out = Vec::new();
        export_text_to(&m, &v, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "2 2\npea 0.5 -1\nflower 0.25 3\n");
    }

    #[test]
    fn tokens_with_spaces_are_rejected() {
        let v = vocab(&["new york"]);
        let m = PointEmbedding::from_parts(1, vec![1.0], vec![0.0]).unwrap();
        assert!(matches!(export_text_to(&m, &v, &mut Vec::new()), Err(Error::Encoding(_))));
    }

    #[test]
    fn import_validation() {
        let ok = import_text_from("3 2\na 1 2\nb 3 4\nc 5 6\n".as_bytes()).unwrap();
        assert_eq!(ok.0.len(), 3);
        assert_eq!(ok.1.word(2), [5.0, 6.0]);
        assert!(ok.1.context_matrix().iter().all(|&x| x == 0.0));

        let short = import_text_from("1 3\na 1 2\n".as_bytes());
        assert!(matches!(short, Err(Error::HeaderMismatch { line: 2, .. })));
        let rows = import_text_from("3 1\na 1\nb 2\n".as_bytes());
        assert!(matches!(rows, Err(Error::HeaderMismatch { .. })));
        let dup = import_text_from("2 1\na 1\na 2\n".as_bytes()).err().unwrap();
        assert!(matches!(dup, Error::Parse { line: 3, .. }));
        assert!(dup.to_string().contains("\"a\""));
        let bad = import_text_from("1 1\na x\n".as_bytes());
        assert!(matches!(bad, Err(Error::Parse { line: 2, .. })));
    }

    proptest::proptest! {
        #[test]
        fn sig6_round_trips_within_half_ulp_of_six_digits(x in proptest::num::f32::NORMAL) {
            let back: f32 = format_sig6(x).parse().unwrap();
            proptest::prop_assert!(((back - x) / x).abs() <= 5e-6);
        }

        #[test]
        fn gm_binary_round_trip(
            v in 1usize..6,
            d in 1usize..5,
            k in 1usize..4,
            seed in 0u64..1000,
        ) {
            let m = GmEmbedding::<f32>::init(v, d, &GmTrainConfig { components: k, ..Default::default() }, seed);
            let vocab = Vocabulary::from_ordered_tokens((0..v).map(|i| format!("tök{i}")).collect()).unwrap();
            let mut bytes = Vec::new();
            save_gm_to(&m, &vocab, &mut bytes).unwrap();
            let (v2, m2) = load_gm_from_bytes(&bytes).unwrap();
            let mut again = Vec::new();
            save_gm_to(&m2, &v2, &mut again).unwrap();
            proptest::prop_assert_eq!(bytes, again);
        }
    }

    #[test]
    fn gm_binary_errors() {
        let v = vocab(&["a", "b"]);
        let m = GmEmbedding::<f32>::init(2, 3, &GmTrainConfig::default(), 1);
        let mut bytes = Vec::new();
        save_gm_to(&m, &v, &mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"W2GM");
        assert_eq!(bytes[4], 1);
        assert_eq!(u32::from_le_bytes(bytes[5..9].try_into().unwrap()), 2);
        assert_eq!(bytes.len(), 4 + 1 + 12 + 4 * (4 + 12 + 12) + 2 * 5);

        let (v2, m2) = load_gm_from_bytes(&bytes).unwrap();
        assert_eq!(m2, m);
        assert_eq!(v2.tokens(), v.tokens());

        assert!(matches!(load_gm_from_bytes(&bytes[..bytes.len() - 1]), Err(Error::TruncatedFile)));
        assert!(matches!(load_gm_from_bytes(&bytes[..40]), Err(Error::TruncatedFile)));
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(matches!(load_gm_from_bytes(&wrong), Err(Error::MagicMismatch)));
        let mut future = bytes.clone();
        future[4] = 9;
        assert!(matches!(load_gm_from_bytes(&future), Err(Error::VersionUnsupported(9))));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(load_gm_from_bytes(&extra), Err(Error::TrailingBytes(1))));
    }
}
