//! Lazy infinite words over `{1, …, N}` and their factor statistics.
//!
//! Sources are immutable specifications; `prefix(L)` regenerates
//! deterministically, so prefixes are coherent across lengths and safe to
//! share between threads.  Factor sets computed on a finite window carry an
//! exactness flag: provably exact for periodic sources, and certified by
//! the observed recurrence scale otherwise (lower bound when uncertified).

use crate::matrices::IMat2;
use crate::realquad::RealQuadratic;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("explicit word has only {have} letters, {want} requested")]
    PrefixTooLong { have: usize, want: usize },
    #[error("letter {letter} outside alphabet 1..={alphabet}")]
    LetterOutOfRange { letter: u8, alphabet: u8 },
    #[error("invalid source: {0}")]
    Invalid(String),
    #[error("spec parse error at line {line}: {message}")]
    Spec { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, WordError>;

/// Slope of a mechanical (Sturmian) word: exact rational or quadratic surd.
#[derive(Debug, Clone, PartialEq)]
pub enum Slope {
    Rational(BigRational),
    Quadratic(RealQuadratic),
}

/// A program built from concatenation only: `W(X₁,…,X_m)` flattens to a
/// sequence of placeholder indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcatProgram {
    arity: usize,
    entries: Vec<usize>,
}

impl ConcatProgram {
    pub fn new(arity: usize, entries: Vec<usize>) -> Result<Self> {
        if arity == 0 {
            return Err(WordError::Invalid("arity must be positive".into()));
        }
        if entries.is_empty() {
            return Err(WordError::Invalid(
                "concatenation program needs at least one placeholder".into(),
            ));
        }
        if let Some(&bad) = entries.iter().find(|&&i| i >= arity) {
            return Err(WordError::Invalid(format!(
                "placeholder X{} exceeds arity {}",
                bad + 1,
                arity
            )));
        }
        Ok(ConcatProgram { arity, entries })
    }

    /// Parse `"X1 X2 X1"` style placeholder lists.
    pub fn parse(arity: usize, text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for tok in text.split_whitespace() {
            let t = tok.trim_start_matches(['X', 'x']);
            let idx: usize = t
                .parse()
                .map_err(|_| WordError::Invalid(format!("bad placeholder `{tok}`")))?;
            if idx == 0 {
                return Err(WordError::Invalid("placeholders are 1-based".into()));
            }
            entries.push(idx - 1);
        }
        ConcatProgram::new(arity, entries)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// Occurrences of `X₁`, the unknown of the backward matrix equation;
    /// a single occurrence makes that equation's solution structurally
    /// unique (all other factors are invertible).
    pub fn count_first_placeholder(&self) -> usize {
        self.entries.iter().filter(|&&i| i == 0).count()
    }

    /// `W̃` on matrices: the product over the placeholder sequence.
    pub fn apply_matrices(&self, args: &[IMat2]) -> IMat2 {
        assert_eq!(args.len(), self.arity);
        let mut acc = IMat2::identity();
        for &i in &self.entries {
            acc = acc.mul(&args[i]);
        }
        acc
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|i| format!("X{}", i + 1))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// `σ_n` of the recursion `σ_{n+m} = σ_{n+m−1}·W(σ_n, …, σ_{n+m−1})`
/// (1-indexed; `σ_1, …, σ_m` are the seeds).
pub fn concat_expand(program: &ConcatProgram, seeds: &[Vec<u8>], n: usize) -> Result<Vec<u8>> {
    let m = program.arity();
    if seeds.len() != m {
        return Err(WordError::Invalid(format!(
            "expected {m} seeds, found {}",
            seeds.len()
        )));
    }
    if seeds.iter().any(|s| s.len() != 1) {
        return Err(WordError::Invalid("seeds must be single letters".into()));
    }
    if m > 1 && seeds.windows(2).all(|w| w[0] == w[1]) {
        return Err(WordError::Invalid(
            "seeds must not all be equal (degenerate scheme)".into(),
        ));
    }
    if n == 0 {
        return Err(WordError::Invalid("σ indices are 1-based".into()));
    }
    let mut window: Vec<Vec<u8>> = seeds.to_vec();
    if n <= m {
        return Ok(window[n - 1].clone());
    }
    for _ in m..n {
        let mut next = window[m - 1].clone();
        for &i in program.entries() {
            next.extend_from_slice(&window[i]);
        }
        window.rotate_left(1);
        window[m - 1] = next;
    }
    Ok(window[m - 1].clone())
}

/// Source kind: how the infinite word is generated.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    Periodic {
        period: Vec<u8>,
    },
    Morphic {
        rules: BTreeMap<u8, Vec<u8>>,
        seed: u8,
        coding: Option<BTreeMap<u8, u8>>,
    },
    Sturmian {
        slope: Slope,
        intercept: BigRational,
    },
    Concat {
        seeds: Vec<u8>,
        program: ConcatProgram,
    },
    Explicit {
        letters: Vec<u8>,
    },
}

/// A lazy infinite word over the alphabet `{1, …, N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WordSource {
    kind: SourceKind,
    alphabet: u8,
    shift: usize,
}

impl WordSource {
    pub fn new(kind: SourceKind, alphabet: u8) -> Result<Self> {
        let src = WordSource {
            kind,
            alphabet,
            shift: 0,
        };
        src.validate()?;
        Ok(src)
    }

    pub fn periodic(period: &[u8]) -> Result<Self> {
        if period.is_empty() {
            return Err(WordError::Invalid("empty period".into()));
        }
        let alphabet = *period.iter().max().unwrap();
        Self::new(
            SourceKind::Periodic {
                period: period.to_vec(),
            },
            alphabet,
        )
    }

    /// The Fibonacci word over `{1, 2}`: `1 → 12`, `2 → 1`.
    pub fn fibonacci() -> Self {
        let rules = BTreeMap::from([(1u8, vec![1, 2]), (2u8, vec![1])]);
        Self::new(
            SourceKind::Morphic {
                rules,
                seed: 1,
                coding: None,
            },
            2,
        )
        .unwrap()
    }

    /// The Thue–Morse word over `{1, 2}`: `1 → 12`, `2 → 21`.
    pub fn thue_morse() -> Self {
        let rules = BTreeMap::from([(1u8, vec![1, 2]), (2u8, vec![2, 1])]);
        Self::new(
            SourceKind::Morphic {
                rules,
                seed: 1,
                coding: None,
            },
            2,
        )
        .unwrap()
    }

    pub fn explicit(letters: &[u8]) -> Result<Self> {
        if letters.is_empty() {
            return Err(WordError::Invalid("empty explicit word".into()));
        }
        let alphabet = *letters.iter().max().unwrap();
        Self::new(
            SourceKind::Explicit {
                letters: letters.to_vec(),
            },
            alphabet,
        )
    }

    pub fn sturmian(slope: Slope, intercept: BigRational) -> Result<Self> {
        Self::new(SourceKind::Sturmian { slope, intercept }, 2)
    }

    pub fn concat_scheme(seeds: &[u8], program: ConcatProgram) -> Result<Self> {
        let alphabet = *seeds
            .iter()
            .max()
            .ok_or_else(|| WordError::Invalid("empty seed list".into()))?;
        Self::new(
            SourceKind::Concat {
                seeds: seeds.to_vec(),
                program,
            },
            alphabet,
        )
    }

    fn validate(&self) -> Result<()> {
        if self.alphabet == 0 {
            return Err(WordError::Invalid("alphabet must be nonempty".into()));
        }
        let check = |letters: &[u8]| -> Result<()> {
            for &l in letters {
                if l == 0 || l > self.alphabet {
                    return Err(WordError::LetterOutOfRange {
                        letter: l,
                        alphabet: self.alphabet,
                    });
                }
            }
            Ok(())
        };
        match &self.kind {
            SourceKind::Periodic { period } => check(period),
            SourceKind::Explicit { letters } => check(letters),
            SourceKind::Morphic {
                rules,
                seed,
                coding,
            } => {
                check(&[*seed])?;
                for (l, image) in rules {
                    check(&[*l])?;
                    check(image)?;
                    if image.is_empty() {
                        return Err(WordError::Invalid("erasing morphisms unsupported".into()));
                    }
                    for il in image {
                        if !rules.contains_key(il) {
                            return Err(WordError::Invalid(format!(
                                "letter {il} in an image has no rule"
                            )));
                        }
                    }
                }
                let seed_image = rules
                    .get(seed)
                    .ok_or_else(|| WordError::Invalid("seed has no rule".into()))?;
                if seed_image.first() != Some(seed) || seed_image.len() < 2 {
                    return Err(WordError::Invalid(
                        "morphism must be prolongable: rule(seed) = seed·…".into(),
                    ));
                }
                if let Some(c) = coding {
                    for (from, to) in c {
                        check(&[*from])?;
                        check(&[*to])?;
                    }
                }
                Ok(())
            }
            SourceKind::Sturmian { slope, intercept } => {
                let in_range = match slope {
                    Slope::Rational(q) => {
                        q.is_positive() && q < &BigRational::from_integer(1.into())
                    }
                    Slope::Quadratic(x) => {
                        x.signum() > 0 && x.cmp_int(&BigInt::from(1)) == std::cmp::Ordering::Less
                    }
                };
                if !in_range {
                    return Err(WordError::Invalid("slope must lie in (0, 1)".into()));
                }
                if intercept.is_negative() {
                    return Err(WordError::Invalid("intercept must be ≥ 0".into()));
                }
                Ok(())
            }
            SourceKind::Concat { seeds, program } => {
                check(seeds)?;
                let as_words: Vec<Vec<u8>> = seeds.iter().map(|&s| vec![s]).collect();
                // Surfaces degenerate seeds and arity mismatches now.
                concat_expand(program, &as_words, program.arity())?;
                Ok(())
            }
        }
    }

    pub fn alphabet_size(&self) -> u8 {
        self.alphabet
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    pub fn shift_offset(&self) -> usize {
        self.shift
    }

    /// The shifted word `T^m w` (composes with existing shifts).
    pub fn shifted(&self, m: usize) -> WordSource {
        let mut s = self.clone();
        s.shift += m;
        s
    }

    /// Periodic sources: the minimal period (rotated by the shift).
    pub fn minimal_period(&self) -> Option<Vec<u8>> {
        match &self.kind {
            SourceKind::Periodic { period } => {
                let n = period.len();
                let d = (1..=n)
                    .find(|&d| n % d == 0 && period.iter().zip(period.iter().cycle().skip(d)).take(n - d).all(|(a, b)| a == b) && period.chunks(d).all(|c| c == &period[..c.len()]))
                    .unwrap_or(n);
                let mut p = period[..d].to_vec();
                p.rotate_left(self.shift % d);
                Some(p)
            }
            _ => None,
        }
    }

    /// Recurrent by construction (periodic, morphic, irrational-slope
    /// Sturmian, concat schemes); explicit finite words make no claim.
    pub fn declared_recurrent(&self) -> bool {
        match &self.kind {
            SourceKind::Periodic { .. } => true,
            SourceKind::Morphic { .. } => true,
            SourceKind::Sturmian { slope, .. } => matches!(slope, Slope::Quadratic(_)),
            SourceKind::Concat { .. } => true,
            SourceKind::Explicit { .. } => false,
        }
    }

    /// First `len` letters (after the shift).
    pub fn prefix(&self, len: usize) -> Result<Vec<u8>> {
        let want = self.shift + len;
        let raw = self.raw_prefix(want)?;
        Ok(raw[self.shift..want].to_vec())
    }

    pub fn letter(&self, index: usize) -> Result<u8> {
        Ok(self.prefix(index + 1)?[index])
    }

    fn raw_prefix(&self, len: usize) -> Result<Vec<u8>> {
        if len == 0 {
            return Ok(Vec::new());
        }
        match &self.kind {
            SourceKind::Periodic { period } => {
                Ok(period.iter().cycle().take(len).copied().collect())
            }
            SourceKind::Explicit { letters } => {
                if letters.len() < len {
                    return Err(WordError::PrefixTooLong {
                        have: letters.len(),
                        want: len,
                    });
                }
                Ok(letters[..len].to_vec())
            }
            SourceKind::Morphic {
                rules,
                seed,
                coding,
            } => {
                let mut word = vec![*seed];
                while word.len() < len {
                    let mut next = Vec::with_capacity(word.len() * 2);
                    for l in &word {
                        next.extend_from_slice(&rules[l]);
                        if next.len() >= len {
                            break;
                        }
                    }
                    word = next;
                }
                word.truncate(len);
                if let Some(c) = coding {
                    for l in &mut word {
                        if let Some(t) = c.get(l) {
                            *l = *t;
                        }
                    }
                }
                Ok(word)
            }
            SourceKind::Sturmian { slope, intercept } => {
                let mut out = Vec::with_capacity(len);
                for i in 1..=len {
                    out.push(sturmian_letter(slope, intercept, i as i64));
                }
                Ok(out)
            }
            SourceKind::Concat { seeds, program } => {
                let as_words: Vec<Vec<u8>> = seeds.iter().map(|&s| vec![s]).collect();
                let m = program.arity();
                // σ_{n} grows by at least one letter per step.
                let mut n = m + 1;
                loop {
                    let w = concat_expand(program, &as_words, n)?;
                    if w.len() >= len {
                        return Ok(w[..len].to_vec());
                    }
                    n += 1;
                }
            }
        }
    }
}

/// Mechanical-word letter `⌊iα + ρ⌋ − ⌊(i−1)α + ρ⌋ + 1 ∈ {1, 2}`.
fn sturmian_letter(slope: &Slope, intercept: &BigRational, i: i64) -> u8 {
    let d = match slope {
        Slope::Rational(alpha) => {
            let f = |n: i64| (alpha * BigRational::from_integer(BigInt::from(n)) + intercept)
                .floor()
                .to_integer();
            f(i) - f(i - 1)
        }
        Slope::Quadratic(alpha) => {
            let f = |n: i64| {
                alpha
                    .mul_int(&BigInt::from(n))
                    .add_rational(intercept)
                    .floor()
            };
            f(i) - f(i - 1)
        }
    };
    d.to_u8().expect("mechanical increments are 0 or 1") + 1
}

impl fmt::Display for WordSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match &self.kind {
            SourceKind::Periodic { period } => format!("periodic({})", render_word(period)),
            SourceKind::Morphic { .. } => "morphic".to_string(),
            SourceKind::Sturmian { .. } => "sturmian".to_string(),
            SourceKind::Concat { seeds, program } => format!(
                "concat(seeds={}, W={})",
                render_word(seeds),
                program.render()
            ),
            SourceKind::Explicit { letters } => format!("explicit(len={})", letters.len()),
        };
        if self.shift > 0 {
            write!(f, "T^{}·{}", self.shift, base)
        } else {
            write!(f, "{}", base)
        }
    }
}

/// Render a word as digits (alphabet ≤ 9) or dot-separated letters.
pub fn render_word(w: &[u8]) -> String {
    if w.iter().all(|&l| l <= 9) {
        w.iter().map(|l| (b'0' + l) as char).collect()
    } else {
        w.iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

// ---------------------------------------------------------------------------
// Factors, complexity, recurrence.
// ---------------------------------------------------------------------------

/// Length-`n` factors found in a window, with the exactness certificate.
#[derive(Debug, Clone)]
pub struct FactorSet {
    pub n: usize,
    pub window: usize,
    pub factors: BTreeSet<Vec<u8>>,
    /// For periodic sources, provable; otherwise certified when every
    /// factor recurred and the window clears twice the observed recurrence
    /// scale.  Uncertified sets are lower bounds.
    pub exact: bool,
    /// Max observed gap between consecutive occurrences over all factors.
    pub max_gap: Option<usize>,
}

/// All length-`n` factors occurring in `prefix(window)`.
pub fn factors(source: &WordSource, n: usize, window: usize) -> Result<FactorSet> {
    assert!(window >= n, "window must cover the factor length");
    let prefix = source.prefix(window)?;
    let mut set: BTreeSet<Vec<u8>> = BTreeSet::new();
    if n == 0 {
        set.insert(Vec::new());
        return Ok(FactorSet {
            n,
            window,
            factors: set,
            exact: true,
            max_gap: Some(0),
        });
    }
    let mut last_seen: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    let mut recurred: BTreeSet<Vec<u8>> = BTreeSet::new();
    let mut max_gap: Option<usize> = None;
    for i in 0..=(prefix.len().saturating_sub(n)) {
        let f = prefix[i..i + n].to_vec();
        set.insert(f.clone());
        if let Some(prev) = last_seen.insert(f.clone(), i) {
            let gap = i - prev;
            max_gap = Some(max_gap.map_or(gap, |g| g.max(gap)));
            recurred.insert(f);
        }
    }
    let exact = match source.kind() {
        SourceKind::Periodic { period } => window >= period.len() + n,
        _ => match max_gap {
            Some(g) => recurred.len() == set.len() && window >= 2 * (g + n),
            None => false,
        },
    };
    Ok(FactorSet {
        n,
        window,
        factors: set,
        exact,
        max_gap,
    })
}

/// Factor complexity `P(w, n)` on the given window, with exactness flag.
pub fn complexity(source: &WordSource, n: usize, window: usize) -> Result<(usize, bool)> {
    let f = factors(source, n, window)?;
    Ok((f.factors.len(), f.exact))
}

/// Max gap between consecutive occurrence starts of `factor` in the window;
/// `None` when it does not recur there.
pub fn recurrence_gap(source: &WordSource, factor: &[u8], window: usize) -> Result<Option<usize>> {
    let prefix = source.prefix(window)?;
    let n = factor.len();
    let mut prev: Option<usize> = None;
    let mut max_gap: Option<usize> = None;
    for i in 0..=(prefix.len().saturating_sub(n)) {
        if &prefix[i..i + n] == factor {
            if let Some(p) = prev {
                let gap = i - p;
                max_gap = Some(max_gap.map_or(gap, |g| g.max(gap)));
            }
            prev = Some(i);
        }
    }
    Ok(max_gap)
}

// ---------------------------------------------------------------------------
// Word-source specification files (key = value text).
// ---------------------------------------------------------------------------

/// Parse a word-source description from `key = value` lines.
///
/// Keys: `kind` (periodic | morphic | sturmian | concat | explicit), then
/// per kind: `period`; `rule.<letter>`, `seed`, `coding.<letter>`;
/// `slope`, `intercept`; `seeds`, `program`; `letters`.  Optional:
/// `alphabet` (override), `shift`.  `#` starts a comment.
pub fn parse_source_spec(text: &str) -> Result<WordSource> {
    let mut map: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(WordError::Spec {
            line: idx + 1,
            message: "expected `key = value`".into(),
        })?;
        map.insert(k.trim().to_string(), (idx + 1, v.trim().to_string()));
    }
    source_from_map(&map)
}

pub(crate) fn source_from_map(map: &BTreeMap<String, (usize, String)>) -> Result<WordSource> {
    let get = |k: &str| map.get(k).map(|(_, v)| v.as_str());
    let kind = get("kind").ok_or_else(|| spec_err("missing `kind`"))?;
    let mut source = match kind {
        "periodic" => {
            let period = parse_word(get("period").ok_or_else(|| spec_err("missing `period`"))?)?;
            WordSource::periodic(&period)?
        }
        "explicit" => {
            let letters =
                parse_word(get("letters").ok_or_else(|| spec_err("missing `letters`"))?)?;
            WordSource::explicit(&letters)?
        }
        "morphic" => {
            let seed = parse_word(get("seed").ok_or_else(|| spec_err("missing `seed`"))?)?;
            if seed.len() != 1 {
                return Err(spec_err("seed must be a single letter"));
            }
            let mut rules = BTreeMap::new();
            let mut coding = BTreeMap::new();
            for (k, (_, v)) in map.iter() {
                if let Some(l) = k.strip_prefix("rule.") {
                    let letter: u8 = l.parse().map_err(|_| spec_err("bad rule letter"))?;
                    rules.insert(letter, parse_word(v)?);
                } else if let Some(l) = k.strip_prefix("coding.") {
                    let letter: u8 = l.parse().map_err(|_| spec_err("bad coding letter"))?;
                    let img = parse_word(v)?;
                    if img.len() != 1 {
                        return Err(spec_err("coding images are single letters"));
                    }
                    coding.insert(letter, img[0]);
                }
            }
            if rules.is_empty() {
                return Err(spec_err("morphic source needs rule.<letter> entries"));
            }
            let alphabet = rules
                .iter()
                .flat_map(|(l, img)| std::iter::once(*l).chain(img.iter().copied()))
                .chain(coding.values().copied())
                .max()
                .unwrap();
            WordSource::new(
                SourceKind::Morphic {
                    rules,
                    seed: seed[0],
                    coding: if coding.is_empty() {
                        None
                    } else {
                        Some(coding)
                    },
                },
                alphabet,
            )?
        }
        "sturmian" => {
            let slope = parse_slope(get("slope").ok_or_else(|| spec_err("missing `slope`"))?)?;
            let intercept = match get("intercept") {
                None => BigRational::zero(),
                Some(t) => parse_ratio(t)?,
            };
            WordSource::sturmian(slope, intercept)?
        }
        "concat" => {
            let seeds = parse_word(get("seeds").ok_or_else(|| spec_err("missing `seeds`"))?)?;
            let program_text = get("program").ok_or_else(|| spec_err("missing `program`"))?;
            let program = ConcatProgram::parse(seeds.len(), program_text)?;
            WordSource::concat_scheme(&seeds, program)?
        }
        other => {
            return Err(spec_err(&format!("unknown source kind `{other}`")));
        }
    };
    if let Some(a) = get("alphabet") {
        let n: u8 = a.parse().map_err(|_| spec_err("bad alphabet size"))?;
        if n < source.alphabet {
            return Err(spec_err("alphabet smaller than letters used"));
        }
        source.alphabet = n;
    }
    if let Some(s) = get("shift") {
        let m: usize = s.parse().map_err(|_| spec_err("bad shift"))?;
        source = source.shifted(m);
    }
    Ok(source)
}

fn spec_err(msg: &str) -> WordError {
    WordError::Spec {
        line: 0,
        message: msg.to_string(),
    }
}

/// Words as digit strings (`1211`) or comma/dot separated lists (`1,2,11`).
pub fn parse_word(text: &str) -> Result<Vec<u8>> {
    let t = text.trim();
    if t.is_empty() {
        return Err(spec_err("empty word"));
    }
    if t.contains([',', '.']) {
        t.split([',', '.'])
            .map(|x| {
                x.trim()
                    .parse::<u8>()
                    .map_err(|_| spec_err(&format!("bad letter `{x}`")))
            })
            .collect()
    } else if t.chars().all(|c| c.is_ascii_digit()) {
        Ok(t.bytes().map(|b| b - b'0').collect())
    } else {
        Err(spec_err(&format!("cannot parse word `{t}`")))
    }
}

fn parse_ratio(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| spec_err("bad numerator"))?;
    let d: BigInt = den.parse().map_err(|_| spec_err("bad denominator"))?;
    if d.is_zero() {
        return Err(spec_err("zero denominator"));
    }
    Ok(BigRational::new(n, d))
}

/// Slopes: `p/q` (rational) or `(a+b*sqrt(D))/c` (quadratic surd).
fn parse_slope(text: &str) -> Result<Slope> {
    let t = text.trim();
    if !t.contains("sqrt") {
        return Ok(Slope::Rational(parse_ratio(t)?));
    }
    let compact: String = t.chars().filter(|c| !c.is_whitespace()).collect();
    let (inner, c_text) = compact
        .strip_prefix('(')
        .and_then(|s| s.split_once(")/"))
        .ok_or_else(|| spec_err("quadratic slope must look like (a+b*sqrt(D))/c"))?;
    let c: BigInt = c_text.parse().map_err(|_| spec_err("bad denominator"))?;
    let pos = inner.find("sqrt").ok_or_else(|| spec_err("missing sqrt"))?;
    let head = &inner[..pos];
    let d_text = inner[pos..]
        .strip_prefix("sqrt(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| spec_err("bad sqrt radicand"))?;
    let d: BigInt = d_text.parse().map_err(|_| spec_err("bad radicand"))?;
    let (a_text, b_text) = match head.rfind(['+', '-']) {
        Some(0) | None => ("", head),
        Some(i) => (&head[..i], &head[i..]),
    };
    let a: BigInt = if a_text.is_empty() {
        BigInt::zero()
    } else {
        a_text.parse().map_err(|_| spec_err("bad rational part"))?
    };
    let b_clean = b_text.trim_end_matches('*');
    let b: BigInt = match b_clean {
        "" | "+" => BigInt::from(1),
        "-" => BigInt::from(-1),
        s => s.parse().map_err(|_| spec_err("bad sqrt coefficient"))?,
    };
    Ok(Slope::Quadratic(RealQuadratic::new(a, b, c, d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::matrix_of_word;

    #[test]
    fn periodic_prefix() {
        let w = WordSource::periodic(&[1, 2]).unwrap();
        assert_eq!(w.prefix(5).unwrap(), vec![1, 2, 1, 2, 1]);
        assert_eq!(w.prefix(0).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn fibonacci_prefix_matches_morphism_oracle() {
        // Oracle: iterate 1→12, 2→1 from the seed directly.
        let mut oracle = vec![1u8];
        for _ in 0..8 {
            let mut next = Vec::new();
            for l in &oracle {
                match l {
                    1 => next.extend([1, 2]),
                    _ => next.push(1),
                }
            }
            oracle = next;
        }
        let w = WordSource::fibonacci();
        assert_eq!(w.prefix(8).unwrap(), vec![1, 2, 1, 1, 2, 1, 2, 1]);
        assert_eq!(w.prefix(21).unwrap(), oracle[..21].to_vec());
    }

    #[test]
    fn thue_morse_prefix_matches_bit_parity_oracle() {
        // t_n = 1 + (parity of ones in n).
        let oracle: Vec<u8> = (0..64u32).map(|n| 1 + (n.count_ones() % 2) as u8).collect();
        let w = WordSource::thue_morse();
        assert_eq!(w.prefix(8).unwrap(), vec![1, 2, 2, 1, 2, 1, 1, 2]);
        assert_eq!(w.prefix(64).unwrap(), oracle);
    }

    #[test]
    fn shift_compatibility() {
        let w = WordSource::thue_morse();
        let s = w.shifted(5);
        let full = w.prefix(25).unwrap();
        assert_eq!(s.prefix(20).unwrap(), full[5..25].to_vec());
        assert_eq!(s.shifted(3).prefix(5).unwrap(), full[8..13].to_vec());
    }

    #[test]
    fn periodic_factor_sets_are_exact() {
        let w = WordSource::periodic(&[1, 2]).unwrap();
        let f = factors(&w, 2, 50).unwrap();
        assert!(f.exact);
        assert_eq!(f.factors, BTreeSet::from([vec![1, 2], vec![2, 1]]));
    }

    #[test]
    fn fibonacci_complexity_is_n_plus_1() {
        let w = WordSource::fibonacci();
        for n in 1..=10 {
            let (p, exact) = complexity(&w, n, 400).unwrap();
            assert!(exact, "window must certify n = {n}");
            assert_eq!(p, n + 1);
        }
    }

    #[test]
    fn thue_morse_complexity_table() {
        let w = WordSource::thue_morse();
        for (i, want) in [2usize, 4, 6, 10].iter().enumerate() {
            let (p, exact) = complexity(&w, i + 1, 4096).unwrap();
            assert!(exact);
            assert_eq!(p, *want, "P({})", i + 1);
        }
    }

    #[test]
    fn complexity_is_monotone_and_periodic_saturates() {
        let w = WordSource::periodic(&[1, 2, 2]).unwrap();
        let mut last = 0;
        for n in 1..=10 {
            let (p, _) = complexity(&w, n, 100).unwrap();
            assert!(p >= last);
            last = p;
        }
        assert_eq!(last, 3, "eventually constant at the period length");
    }

    #[test]
    fn golden_sturmian_matches_fibonacci_complexity() {
        // Slope (−1 + √5)/2 gives a Sturmian word with P(n) = n + 1.
        let slope = Slope::Quadratic(RealQuadratic::new(
            BigInt::from(-1),
            BigInt::from(1),
            BigInt::from(2),
            BigInt::from(5),
        ));
        let w = WordSource::sturmian(slope, BigRational::zero()).unwrap();
        for n in 1..=8 {
            let (p, exact) = complexity(&w, n, 500).unwrap();
            assert!(exact);
            assert_eq!(p, n + 1);
        }
    }

    #[test]
    fn rational_slope_gives_a_periodic_word() {
        let w = WordSource::sturmian(
            Slope::Rational(BigRational::new(2.into(), 5.into())),
            BigRational::zero(),
        )
        .unwrap();
        let (p8, _) = complexity(&w, 8, 200).unwrap();
        let (p12, _) = complexity(&w, 12, 200).unwrap();
        assert_eq!(p8, p12, "complexity saturates for a rational slope");
    }

    #[test]
    fn concat_fibonacci_instance() {
        // σ₁ = 1, σ₂ = 2, W(X₁, X₂) = X₁: σ_{n+2} = σ_{n+1}σ_n.
        let program = ConcatProgram::parse(2, "X1").unwrap();
        let seeds = vec![vec![1u8], vec![2u8]];
        let s3 = concat_expand(&program, &seeds, 3).unwrap();
        assert_eq!(s3, vec![2, 1]);
        let s4 = concat_expand(&program, &seeds, 4).unwrap();
        let s5 = concat_expand(&program, &seeds, 5).unwrap();
        let mut cat = s4.clone();
        cat.extend_from_slice(&s3);
        assert_eq!(s5, cat, "σ₅ = σ₄σ₃");
        // Prefix consistency: σ₇ begins with σ₆.
        let s6 = concat_expand(&program, &seeds, 6).unwrap();
        let s7 = concat_expand(&program, &seeds, 7).unwrap();
        assert_eq!(&s6[..s5.len()], s5.as_slice());
        assert_eq!(&s7[..s6.len()], s6.as_slice());
    }

    #[test]
    fn simplest_program_expands() {
        // m = 2, W(X₁, X₂) = X₁: σ₃ = σ₂σ₁.
        let program = ConcatProgram::parse(2, "X1").unwrap();
        let seeds = vec![vec![2u8], vec![1u8]];
        assert_eq!(concat_expand(&program, &seeds, 3).unwrap(), vec![1, 2]);
    }

    #[test]
    fn degenerate_seeds_rejected() {
        let program = ConcatProgram::parse(2, "X1").unwrap();
        let seeds = vec![vec![1u8], vec![1u8]];
        assert!(concat_expand(&program, &seeds, 5).is_err());
    }

    #[test]
    fn concat_uniqueness_via_invertible_products() {
        // With X₁ occurring once, M = A_{η₂}·X has the unique solution
        // X = A_{η₂}⁻¹·M.
        let program = ConcatProgram::parse(2, "X1").unwrap();
        assert_eq!(program.count_first_placeholder(), 1);
        let eta1 = matrix_of_word(&[1, 2]);
        let eta2 = matrix_of_word(&[2, 1, 1]);
        let m = eta2.mul(&eta1);
        assert_eq!(eta2.inverse().unwrap().mul(&m), eta1);
    }

    #[test]
    fn recurrence_gap_examples() {
        let w = WordSource::periodic(&[1, 2]).unwrap();
        assert_eq!(recurrence_gap(&w, &[1], 50).unwrap(), Some(2));
        let tm = WordSource::thue_morse();
        let gap = recurrence_gap(&tm, &[1, 1], 1 << 14).unwrap();
        assert!(gap.is_some());
        assert!(gap.unwrap() <= 16, "TM gaps are linearly bounded");
        let fib = WordSource::fibonacci();
        let prefix5 = fib.prefix(5).unwrap();
        let gap = recurrence_gap(&fib, &prefix5, 10_000).unwrap();
        assert!(gap.unwrap() <= 21, "Fibonacci-scale bound");
    }

    #[test]
    fn complexity_growth_detects_aperiodicity() {
        for w in [WordSource::fibonacci(), WordSource::thue_morse()] {
            let mut prev = 0;
            for n in 1..=13 {
                let (p, _) = complexity(&w, n, 1 << 13).unwrap();
                assert!(p > prev, "strictly increasing at n = {n}");
                prev = p;
            }
        }
    }

    #[test]
    fn explicit_source_bounds_checked() {
        let w = WordSource::explicit(&[1, 2, 1]).unwrap();
        assert_eq!(w.prefix(3).unwrap(), vec![1, 2, 1]);
        assert!(matches!(
            w.prefix(4),
            Err(WordError::PrefixTooLong { have: 3, want: 4 })
        ));
    }

    #[test]
    fn minimal_period_reduces() {
        let w = WordSource::periodic(&[1, 2, 1, 2]).unwrap();
        assert_eq!(w.minimal_period().unwrap(), vec![1, 2]);
        assert_eq!(w.shifted(1).minimal_period().unwrap(), vec![2, 1]);
    }

    #[test]
    fn source_spec_round_trips() {
        let w = parse_source_spec("kind = periodic\nperiod = 12\n").unwrap();
        assert_eq!(w, WordSource::periodic(&[1, 2]).unwrap());

        let w = parse_source_spec("kind = morphic\nseed = 1\nrule.1 = 12\nrule.2 = 1\n").unwrap();
        assert_eq!(
            w.prefix(8).unwrap(),
            WordSource::fibonacci().prefix(8).unwrap()
        );

        let w = parse_source_spec("kind = sturmian\nslope = (-1+1*sqrt(5))/2\n").unwrap();
        let (p, _) = complexity(&w, 5, 300).unwrap();
        assert_eq!(p, 6);

        let w = parse_source_spec("kind = concat\nseeds = 12\nprogram = X1\n").unwrap();
        assert_eq!(w.prefix(3).unwrap(), vec![2, 1, 2]);

        assert!(parse_source_spec("kind = periodic").is_err());
        assert!(parse_source_spec("period = 12").is_err());
    }
}
