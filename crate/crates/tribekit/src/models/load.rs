//! Loading presented clans from the JSON exchange format.

use crate::clan::{verify_clan, ClanStructure};
use crate::fincat::{CategoryPresentation, LoadError};

/// Parses a presentation; syntax errors carry their line and column.
pub fn parse_presentation(text: &str) -> Result<CategoryPresentation, LoadError> {
    Ok(serde_json::from_str(text)?)
}

/// Parses, validates and checks the clan axioms. A presentation that is not
/// a category or not a clan is rejected with every failed check listed.
pub fn load_presentation(text: &str, max_morphisms: usize) -> Result<ClanStructure, LoadError> {
    let p = parse_presentation(text)?;
    let c = ClanStructure::from_presentation(&p, max_morphisms)?;
    let report = verify_clan(&c);
    if !report.all_pass() {
        return Err(LoadError::NotClan(report));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clan::tests::all_fib;
    use crate::fincat::preorder_presentation;
    use crate::fincat::tests::terminal_category;

    fn text(p: &CategoryPresentation) -> String {
        serde_json::to_string(p).unwrap()
    }

    #[test]
    fn terminal_clan_loads() {
        let c = load_presentation(&text(&all_fib(&terminal_category(), "1").to_presentation()), 16).unwrap();
        assert_eq!(c.cat.num_objects(), 1);
    }

    #[test]
    fn missing_composite_is_named() {
        let mut p = all_fib(&preorder_presentation(&["a", "b", "c"], |i, j| i <= j), "c").to_presentation();
        p.composition.retain(|[g, f, _]| !(g == "b<c" && f == "a<b"));
        let err = load_presentation(&text(&p), 16).unwrap_err().to_string();
        assert!(err.contains("b<c") && err.contains("a<b"), "{err}");
    }

    #[test]
    fn non_carrable_fibration_is_rejected() {
        // a and b below the top with no meet.
        let p = all_fib(&preorder_presentation(&["a", "b", "1"], |i, j| i == j || j == 2), "1").to_presentation();
        match load_presentation(&text(&p), 16) {
            Err(LoadError::NotClan(r)) => assert!(r.failures().next().is_some()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_a_position() {
        let err = load_presentation("{\n  \"objects\": [1,\n", 16).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }
}
