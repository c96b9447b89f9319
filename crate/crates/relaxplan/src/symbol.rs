//! Alphabet symbols: sets of atomic propositions, plus the epsilon marker
//! used by edit transitions.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Characters that may not appear in proposition names because they carry
/// meaning in the rules and formula grammars.
const RESERVED: &[char] = &[
    '/', ',', '(', ')', '*', '|', 'ε', '{', '}', '.', '[', ']', '^', '!', '&',
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolError {
    #[error("empty proposition name")]
    EmptyName,
    #[error("proposition name {0:?} contains whitespace or a reserved character")]
    BadName(String),
}

/// Checks a single proposition name against the naming rules shared by all
/// models and text formats.
pub fn check_prop_name(name: &str) -> Result<(), SymbolError> {
    if name.is_empty() {
        return Err(SymbolError::EmptyName);
    }
    if name
        .chars()
        .any(|c| c.is_whitespace() || RESERVED.contains(&c))
    {
        return Err(SymbolError::BadName(name.to_owned()));
    }
    Ok(())
}

/// A set of atomic propositions observed at one step. The empty set is a
/// valid symbol.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ApSymbol {
    props: BTreeSet<String>,
}

impl ApSymbol {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new<I, S>(props: I) -> Result<Self, SymbolError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = BTreeSet::new();
        for p in props {
            let p = p.into();
            check_prop_name(&p)?;
            set.insert(p);
        }
        Ok(Self { props: set })
    }

    pub fn props(&self) -> impl Iterator<Item = &str> {
        self.props.iter().map(String::as_str)
    }

    pub fn contains(&self, prop: &str) -> bool {
        self.props.contains(prop)
    }

    pub fn is_empty(&self) -> bool {
        self.props.is_empty()
    }

    /// True when every proposition is drawn from `ap`.
    pub fn within(&self, ap: &BTreeSet<String>) -> bool {
        self.props.iter().all(|p| ap.contains(p))
    }
}

impl fmt::Display for ApSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.props.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// One side of an edit pair: either a concrete symbol or epsilon (nothing
/// consumed on that side).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EditSymbol {
    Epsilon,
    Sym(ApSymbol),
}

impl EditSymbol {
    pub fn is_epsilon(&self) -> bool {
        matches!(self, EditSymbol::Epsilon)
    }

    pub fn as_symbol(&self) -> Option<&ApSymbol> {
        match self {
            EditSymbol::Epsilon => None,
            EditSymbol::Sym(s) => Some(s),
        }
    }
}

impl From<ApSymbol> for EditSymbol {
    fn from(s: ApSymbol) -> Self {
        EditSymbol::Sym(s)
    }
}

impl fmt::Display for EditSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EditSymbol::Epsilon => write!(f, "eps"),
            EditSymbol::Sym(s) => write!(f, "{s}"),
        }
    }
}

/// Enumerates all symbols over `ap` (the power set), in canonical order.
/// `limit` guards against accidental blow-ups; exceeding it returns `None`.
pub fn symbols_over(ap: &BTreeSet<String>, limit: usize) -> Option<Vec<ApSymbol>> {
    if ap.len() >= usize::BITS as usize {
        return None;
    }
    let count = 1usize.checked_shl(ap.len() as u32)?;
    if count > limit {
        return None;
    }
    let props: Vec<&String> = ap.iter().collect();
    let mut out = Vec::with_capacity(count);
    for mask in 0..count {
        let set: BTreeSet<String> = props
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| (*p).clone())
            .collect();
        out.push(ApSymbol { props: set });
    }
    out.sort();
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_symbol_prints_braces() {
        assert_eq!(ApSymbol::empty().to_string(), "{}");
    }

    #[test]
    fn props_are_deduplicated_and_ordered() {
        let s = ApSymbol::new(["b", "a", "b"]).unwrap();
        assert_eq!(s.to_string(), "{a,b}");
    }

    #[test]
    fn reserved_characters_rejected() {
        assert!(ApSymbol::new(["a/b"]).is_err());
        assert!(ApSymbol::new(["a b"]).is_err());
        assert!(ApSymbol::new([""]).is_err());
        assert!(ApSymbol::new(["ok_name-2"]).is_ok());
    }

    #[test]
    fn power_set_enumeration() {
        let ap: BTreeSet<String> = ["a".to_owned(), "b".to_owned()].into();
        let all = symbols_over(&ap, 16).unwrap();
        assert_eq!(all.len(), 4);
        assert!(symbols_over(&ap, 3).is_none());
    }
}
